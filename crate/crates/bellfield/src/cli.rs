//! Command-line front end. Each subcommand wraps one library capability,
//! reads an optional JSON config, and emits a machine-readable report.
//!
//! Exit codes: 0 on success, 2 for usage problems (bad flags, malformed or
//! invalid config), 1 for runtime failures (an exhausted quadrature budget,
//! a tripped bound guardrail).
//!
//! JSON output is byte-stable across runs: floats are always printed as
//! `{:.16e}`, which round-trips every finite f64, and key order follows the
//! struct declarations. CSV output uses the same float formatting.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::correlator::{chsh_closed_form, chsh_correlator, CorrelatorReport};
use crate::error::{Error, Result};
use crate::fock::{vacuum_chsh_brute_force, BruteForceReport, FockConfig};
use crate::jc::{
    corrected_chsh_oracle, corrected_chsh_prediction, CorrectedBellRun, CorrectedPrediction,
    JCParams, MomentumProfile,
};
use crate::modular::ModularParams;
use crate::optimize::{grid_sweep, maximize_vacuum_chsh, Bounds3, OptimizeOptions};
use crate::quadrature::Quadrature;
use crate::spin::{chsh_spin, chsh_spin_closed_form, AngleSet, SpinState};

#[derive(Parser)]
#[command(
    name = "bellfield",
    version,
    about = "Bell-CHSH correlators for a scalar field probed by localized systems",
    after_help = "Global flags are accepted by every subcommand; --seed applies to \
                  `optimize` and --nmax to `oracle`, the rest ignore them."
)]
struct Cli {
    /// JSON config file; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Overrides the seed from the config (optimize).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the occupation cutoff from the config (oracle).
    #[arg(long, global = true)]
    nmax: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form vacuum CHSH value at one parameter point.
    Correlator,
    /// Brute-force truncated-Fock evaluation checked against the closed form.
    Oracle,
    /// Second-order corrected CHSH for field-coupled qubit pairs.
    Jc,
    /// CHSH for the composite spin pair on the double singlet.
    Spin,
    /// Maximize the vacuum CHSH value over the parameter box.
    Optimize,
    /// Evaluate the vacuum CHSH value on a rectangular grid.
    Sweep,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // Clap reports 0 for --help/--version, 2 for usage errors.
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => match emit(&cli.out, &report) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("error: {err}");
                1
            }
        },
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, report: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, report)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(report.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| Error::Numerical(format!("stdout write failed: {e}")))
        }
    }
}

fn execute(cli: &Cli) -> Result<String> {
    match cli.command {
        Command::Correlator => {
            let config: CorrelatorConfig = load_config(&cli.config)?;
            let result = chsh_correlator(&config.params()?)?;
            render("correlator", &config, &result, cli.format, correlator_csv)
        }
        Command::Oracle => {
            let mut config: OracleConfig = load_config(&cli.config)?;
            if let Some(n) = cli.nmax {
                config.n_max = n;
            }
            let brute = vacuum_chsh_brute_force(&config.params()?, FockConfig::new(config.n_max)?)?;
            let reference = chsh_closed_form(&config.params()?)?;
            let result = OracleResult {
                abs_error: (brute.value - reference).abs(),
                reference,
                brute,
            };
            render("oracle", &config, &result, cli.format, oracle_csv)
        }
        Command::Jc => {
            let config: JcConfig = load_config(&cli.config)?;
            let modular = config.modular()?;
            let params = config.jc_params()?;
            let quad = config.quadrature()?;
            let prediction = corrected_chsh_prediction(
                &modular,
                &params,
                &config.alice_profile,
                &config.bob_profile,
                &quad,
            )?;
            let both_discrete = matches!(config.alice_profile, MomentumProfile::Discrete { .. })
                && matches!(config.bob_profile, MomentumProfile::Discrete { .. });
            let oracle = if both_discrete {
                Some(corrected_chsh_oracle(
                    &modular,
                    &params,
                    &config.alice_profile,
                    &config.bob_profile,
                )?)
            } else {
                None
            };
            let result = JcResult { prediction, oracle };
            render("jc", &config, &result, cli.format, jc_csv)
        }
        Command::Spin => {
            let config: SpinConfig = load_config(&cli.config)?;
            let closed = chsh_spin_closed_form(&config.angles)?;
            let matrix = chsh_spin(&config.angles, &SpinState::DoubleSinglet)?;
            let result = SpinResult {
                route_gap: (closed.value - matrix.value).abs(),
                value: closed.value,
                magnitude: closed.magnitude,
                terms: closed.terms,
                matrix_value: matrix.value,
            };
            render("spin", &config, &result, cli.format, spin_csv)
        }
        Command::Optimize => {
            let config: OptimizeConfig = load_config(&cli.config)?;
            let opts = config.options(cli.seed)?;
            let result = maximize_vacuum_chsh(&opts)?;
            render("optimize", &config, &result, cli.format, optimize_csv)
        }
        Command::Sweep => {
            let config: SweepConfig = load_config(&cli.config)?;
            let result = grid_sweep(&config.bounds, config.counts)?;
            render("sweep", &config, &result, cli.format, sweep_csv)
        }
    }
}

fn load_config<C: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<C> {
    let Some(path) = path else {
        return Ok(C::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------
// Per-command configs. Every field has a default so a config file only
// needs the values it changes, and unknown keys are rejected rather than
// silently dropped.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CorrelatorConfig {
    eta: f64,
    eta_prime: f64,
    lambda: f64,
}

impl Default for CorrelatorConfig {
    fn default() -> Self {
        let p = ModularParams::benchmark();
        Self {
            eta: p.eta,
            eta_prime: p.eta_prime,
            lambda: p.lambda,
        }
    }
}

impl CorrelatorConfig {
    fn params(&self) -> Result<ModularParams> {
        ModularParams::new(self.eta, self.eta_prime, self.lambda)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OracleConfig {
    eta: f64,
    eta_prime: f64,
    lambda: f64,
    n_max: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let p = ModularParams::benchmark();
        Self {
            eta: p.eta,
            eta_prime: p.eta_prime,
            lambda: p.lambda,
            n_max: 12,
        }
    }
}

impl OracleConfig {
    fn params(&self) -> Result<ModularParams> {
        ModularParams::new(self.eta, self.eta_prime, self.lambda)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct JcConfig {
    eta: f64,
    eta_prime: f64,
    lambda: f64,
    coupling_a: f64,
    coupling_b: f64,
    exchange: f64,
    mass: f64,
    alice_profile: MomentumProfile,
    bob_profile: MomentumProfile,
    rel_tol: f64,
    max_evals: usize,
}

impl Default for JcConfig {
    fn default() -> Self {
        let p = ModularParams::benchmark();
        let quad = Quadrature::default();
        let profile = MomentumProfile::Gaussian {
            amplitude: 1.0,
            center: 0.0,
            width: 1.0,
        };
        Self {
            eta: p.eta,
            eta_prime: p.eta_prime,
            lambda: p.lambda,
            coupling_a: 0.1,
            coupling_b: 0.0,
            exchange: 1.0,
            mass: 1.0,
            alice_profile: profile.clone(),
            bob_profile: profile,
            rel_tol: quad.rel_tol,
            max_evals: quad.max_evals,
        }
    }
}

impl JcConfig {
    fn modular(&self) -> Result<ModularParams> {
        ModularParams::new(self.eta, self.eta_prime, self.lambda)
    }
    fn jc_params(&self) -> Result<JCParams> {
        JCParams::new(self.coupling_a, self.coupling_b, self.exchange, self.mass)
    }
    fn quadrature(&self) -> Result<Quadrature> {
        Quadrature {
            rel_tol: self.rel_tol,
            max_evals: self.max_evals,
        }
        .validated()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SpinConfig {
    angles: AngleSet,
}

impl Default for SpinConfig {
    fn default() -> Self {
        Self {
            angles: AngleSet::reference(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OptimizeConfig {
    bounds: Bounds3,
    seed: u64,
    budget: usize,
    random_starts: usize,
    /// Optional explicit first start [eta, eta_prime, lambda].
    start: Option<[f64; 3]>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        let o = OptimizeOptions::default();
        Self {
            bounds: o.bounds,
            seed: o.seed,
            budget: o.budget,
            random_starts: o.random_starts,
            start: None,
        }
    }
}

impl OptimizeConfig {
    fn options(&self, seed_override: Option<u64>) -> Result<OptimizeOptions> {
        let start = match self.start {
            Some([eta, eta_prime, lambda]) => Some(ModularParams::new(eta, eta_prime, lambda)?),
            None => None,
        };
        Ok(OptimizeOptions {
            bounds: self.bounds,
            seed: seed_override.unwrap_or(self.seed),
            budget: self.budget,
            random_starts: self.random_starts,
            start,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepConfig {
    bounds: Bounds3,
    counts: [usize; 3],
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bounds: Bounds3::default(),
            counts: [20, 20, 20],
        }
    }
}

// ---------------------------------------------------------------------
// Per-command result shapes that are not already library types.

#[derive(Serialize)]
struct OracleResult {
    abs_error: f64,
    reference: f64,
    #[serde(flatten)]
    brute: BruteForceReport,
}

#[derive(Serialize)]
struct JcResult {
    prediction: CorrectedPrediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<CorrectedBellRun>,
}

#[derive(Serialize)]
struct SpinResult {
    value: f64,
    magnitude: f64,
    terms: [f64; 4],
    matrix_value: f64,
    route_gap: f64,
}

// ---------------------------------------------------------------------
// Report rendering.

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    tool: ToolInfo,
    command: &'a str,
    config: &'a C,
    result: &'a R,
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

impl ToolInfo {
    fn current() -> Self {
        Self {
            name: "bellfield",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

fn render<C: Serialize, R: Serialize>(
    command: &str,
    config: &C,
    result: &R,
    format: Format,
    csv: fn(&R) -> String,
) -> Result<String> {
    match format {
        Format::Json => {
            let report = Report {
                tool: ToolInfo::current(),
                command,
                config,
                result,
            };
            to_json(&report)
        }
        Format::Csv => Ok(csv(result)),
    }
}

/// Pretty JSON with every float printed as `{:.16e}`.
struct SciFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for SciFormatter {
    fn write_f64<W: io::Write + ?Sized>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn begin_array<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: io::Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: io::Write + ?Sized>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn end_object_key<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }
    fn begin_object_value<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let formatter = SciFormatter {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Numerical(format!("non-utf8 report: {e}")))
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

fn correlator_csv(r: &CorrelatorReport) -> String {
    let header = "eta,eta_prime,lambda,value,violation";
    let row = csv_line(&[
        sci(r.params.eta),
        sci(r.params.eta_prime),
        sci(r.params.lambda),
        sci(r.value),
        sci(r.violation),
    ]);
    format!("{header}\n{row}\n")
}

fn oracle_csv(r: &OracleResult) -> String {
    let header = "n_max,value,reference,abs_error";
    let row = csv_line(&[
        r.brute.n_max.to_string(),
        sci(r.brute.value),
        sci(r.reference),
        sci(r.abs_error),
    ]);
    format!("{header}\n{row}\n")
}

fn jc_csv(r: &JcResult) -> String {
    let header = "c0,delta_sq,corrected,measured,residual";
    let (measured, residual) = match &r.oracle {
        Some(o) => (sci(o.measured), sci(o.residual)),
        None => (String::new(), String::new()),
    };
    let row = csv_line(&[
        sci(r.prediction.c0),
        sci(r.prediction.delta_sq),
        sci(r.prediction.value),
        measured,
        residual,
    ]);
    format!("{header}\n{row}\n")
}

fn spin_csv(r: &SpinResult) -> String {
    let header = "value,magnitude,matrix_value,route_gap";
    let row = csv_line(&[
        sci(r.value),
        sci(r.magnitude),
        sci(r.matrix_value),
        sci(r.route_gap),
    ]);
    format!("{header}\n{row}\n")
}

fn optimize_csv(r: &crate::optimize::OptimizationResult) -> String {
    let header = "eta,eta_prime,lambda,value,evaluations,starts_used,seed";
    let row = csv_line(&[
        sci(r.best_params.eta),
        sci(r.best_params.eta_prime),
        sci(r.best_params.lambda),
        sci(r.best_value),
        r.evaluations.to_string(),
        r.starts_used.to_string(),
        r.seed.to_string(),
    ]);
    format!("{header}\n{row}\n")
}

fn sweep_csv(r: &crate::optimize::SweepReport) -> String {
    let mut out = String::from("eta,eta_prime,lambda,c0,violation\n");
    for row in &r.rows {
        out.push_str(&csv_line(&[
            sci(row.eta),
            sci(row.eta_prime),
            sci(row.lambda),
            sci(row.c0),
            sci(row.violation),
        ]));
        out.push('\n');
    }
    out
}
