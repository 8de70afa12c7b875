//! Derivative-free maximization of the vacuum CHSH value over (η, η′, λ),
//! plus a deterministic rectangular sweep.
//!
//! The search is a projected Nelder-Mead from a fixed sequence of starts:
//! an optional caller start, then a pinned reference point, then a small
//! lattice, then seeded random draws. The evaluation stream depends only on
//! the options, never on wall-clock or thread order, and a larger budget
//! consumes a strict superset of the evaluations of a smaller one, so the
//! reported maximum is deterministic and monotone in the budget.
//!
//! Every objective value passes a guardrail: the family is quantum, so
//! |⟨C⟩| beyond the bound 2√2 (plus slack) can only mean a broken objective,
//! and the run aborts rather than report it as a maximum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correlator::{chsh_correlator, TSIRELSON_BOUND};
use crate::error::{Error, Result};
use crate::modular::{ModularParams, LAMBDA_MAX};

/// Slack added to the quantum bound before the guardrail trips.
pub const GUARDRAIL_SLACK: f64 = 1e-9;

/// Closed search box, one `[low, high]` pair per parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds3 {
    pub eta: [f64; 2],
    pub eta_prime: [f64; 2],
    pub lambda: [f64; 2],
}

impl Default for Bounds3 {
    fn default() -> Self {
        Self {
            eta: [0.0, 5.0],
            eta_prime: [0.0, 5.0],
            lambda: [1e-3, LAMBDA_MAX],
        }
    }
}

impl Bounds3 {
    pub fn validated(&self) -> Result<&Self> {
        let axes = [
            ("eta", self.eta, 0.0, f64::INFINITY),
            ("eta_prime", self.eta_prime, 0.0, f64::INFINITY),
            ("lambda", self.lambda, 1e-3, LAMBDA_MAX),
        ];
        for (name, [lo, hi], min, max) in axes {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} bounds must be finite, got [{lo}, {hi}]"
                )));
            }
            if lo >= hi {
                return Err(Error::InvalidParameter(format!(
                    "{name} bounds must satisfy low < high, got [{lo}, {hi}]"
                )));
            }
            if lo < min || hi > max {
                return Err(Error::InvalidParameter(format!(
                    "{name} bounds [{lo}, {hi}] leave the admissible range [{min}, {max}]"
                )));
            }
        }
        Ok(self)
    }

    fn axes(&self) -> [[f64; 2]; 3] {
        [self.eta, self.eta_prime, self.lambda]
    }

    pub fn contains(&self, p: &ModularParams) -> bool {
        let x = [p.eta, p.eta_prime, p.lambda];
        self.axes()
            .iter()
            .zip(x)
            .all(|([lo, hi], v)| (*lo..=*hi).contains(&v))
    }

    fn clamp(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = x;
        for (v, [lo, hi]) in out.iter_mut().zip(self.axes()) {
            *v = v.clamp(lo, hi);
        }
        out
    }

    /// Point at fractional coordinates t ∈ [0, 1]³ of the box.
    fn at(&self, t: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, ([lo, hi], f)) in out.iter_mut().zip(self.axes().into_iter().zip(t)) {
            *o = lo + (hi - lo) * f;
        }
        out
    }
}

/// Search configuration. The defaults search the full admissible box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub bounds: Bounds3,
    /// Seed for the random portion of the start sequence.
    pub seed: u64,
    /// Total objective evaluations allowed. At least one evaluation always
    /// runs so the result is well defined; a zero budget with an explicit
    /// start therefore reports exactly that start.
    pub budget: usize,
    /// Random starts appended after the deterministic ones.
    pub random_starts: usize,
    /// Optional first start; must lie inside `bounds`.
    pub start: Option<ModularParams>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            bounds: Bounds3::default(),
            seed: 0,
            budget: 4000,
            random_starts: 8,
            start: None,
        }
    }
}

/// Outcome of a maximization run.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub best_params: ModularParams,
    pub best_value: f64,
    pub evaluations: usize,
    /// Starts that consumed at least one evaluation.
    pub starts_used: usize,
    pub seed: u64,
}

/// Local searches stop once the simplex collapses below these spreads.
const VALUE_SPREAD_TOL: f64 = 1e-13;
const POINT_SPREAD_TOL: f64 = 1e-10;
/// Evaluations a single start may consume before the next start runs.
const PER_START_CAP: usize = 240;

struct Tracker<'a, F> {
    objective: F,
    bounds: &'a Bounds3,
    budget: usize,
    evaluations: usize,
    best: Option<(ModularParams, f64)>,
}

impl<'a, F: FnMut(&ModularParams) -> Result<f64>> Tracker<'a, F> {
    /// Evaluates at a clamped point, charging the budget. Returns None once
    /// the budget is spent (the first evaluation is always allowed).
    fn eval(&mut self, x: [f64; 3]) -> Result<Option<f64>> {
        if self.evaluations >= self.budget.max(1) {
            return Ok(None);
        }
        let x = self.bounds.clamp(x);
        let p = ModularParams::new(x[0], x[1], x[2])?;
        let v = (self.objective)(&p)?;
        if !v.is_finite() || v.abs() > TSIRELSON_BOUND + GUARDRAIL_SLACK {
            return Err(Error::Guardrail {
                value: v,
                slack: GUARDRAIL_SLACK,
                location: "optimizer objective".into(),
            });
        }
        self.evaluations += 1;
        if self.best.is_none_or(|(_, b)| v > b) {
            self.best = Some((p, v));
        }
        Ok(Some(v))
    }
}

/// Projected Nelder-Mead ascent from `x0` with the classic coefficients
/// α = 1, γ = 2, ρ = 1/2, σ = 1/2. Returns false once the global budget ran
/// out mid-search.
fn nelder_mead<F: FnMut(&ModularParams) -> Result<f64>>(
    tracker: &mut Tracker<'_, F>,
    x0: [f64; 3],
    cap: usize,
) -> Result<bool> {
    let spent_before = tracker.evaluations;
    let charge = |t: &mut Tracker<'_, F>, x: [f64; 3]| -> Result<Option<f64>> {
        if t.evaluations - spent_before >= cap {
            return Ok(Some(f64::NEG_INFINITY));
        }
        t.eval(x)
    };

    // Initial simplex: x0 plus one axis step each, flipped at the walls.
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    match charge(tracker, x0)? {
        Some(v) => simplex.push((tracker.bounds.clamp(x0), v)),
        None => return Ok(false),
    }
    for i in 0..3 {
        let [lo, hi] = tracker.bounds.axes()[i];
        let step = 0.08 * (hi - lo);
        let mut x = simplex[0].0;
        x[i] = if x[i] + step <= hi {
            x[i] + step
        } else {
            x[i] - step
        };
        match charge(tracker, x)? {
            Some(v) => simplex.push((tracker.bounds.clamp(x), v)),
            None => return Ok(false),
        }
    }

    loop {
        // Highest value first; the last vertex is the one replaced.
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite objective values"));
        let spread = simplex[0].1 - simplex[3].1;
        let diam = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < VALUE_SPREAD_TOL * (1.0 + simplex[0].1.abs()) || diam < POINT_SPREAD_TOL {
            return Ok(true);
        }

        let worst = simplex[3];
        let mut centroid = [0.0; 3];
        for (x, _) in &simplex[..3] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / 3.0;
            }
        }
        let shift = |t: f64| {
            let mut x = [0.0; 3];
            for i in 0..3 {
                x[i] = centroid[i] + t * (centroid[i] - worst.0[i]);
            }
            x
        };

        let xr = shift(1.0);
        let vr = match charge(tracker, xr)? {
            Some(v) => v,
            None => return Ok(false),
        };
        if vr > simplex[0].1 {
            let xe = shift(2.0);
            let ve = match charge(tracker, xe)? {
                Some(v) => v,
                None => return Ok(false),
            };
            simplex[3] = if ve > vr {
                (tracker.bounds.clamp(xe), ve)
            } else {
                (tracker.bounds.clamp(xr), vr)
            };
        } else if vr > simplex[2].1 {
            simplex[3] = (tracker.bounds.clamp(xr), vr);
        } else {
            let xc = shift(-0.5);
            let vc = match charge(tracker, xc)? {
                Some(v) => v,
                None => return Ok(false),
            };
            if vc > worst.1.max(vr) {
                simplex[3] = (tracker.bounds.clamp(xc), vc);
            } else {
                // Shrink toward the best vertex.
                for k in 1..4 {
                    let x: [f64; 3] = std::array::from_fn(|i| {
                        simplex[0].0[i] + 0.5 * (simplex[k].0[i] - simplex[0].0[i])
                    });
                    match charge(tracker, x)? {
                        Some(v) => simplex[k] = (tracker.bounds.clamp(x), v),
                        None => return Ok(false),
                    }
                }
            }
        }
        if vr == f64::NEG_INFINITY {
            // The per-start cap fired inside this round; hand control back so
            // the next start gets fresh budget.
            return Ok(true);
        }
    }
}

/// Maximizes an arbitrary objective over the box. The guardrail applies to
/// every value the objective returns.
pub fn maximize_with<F>(objective: F, opts: &OptimizeOptions) -> Result<OptimizationResult>
where
    F: FnMut(&ModularParams) -> Result<f64>,
{
    opts.bounds.validated()?;
    if let Some(start) = &opts.start {
        start.validated()?;
        if !opts.bounds.contains(start) {
            return Err(Error::InvalidParameter(format!(
                "start ({}, {}, {}) lies outside the search bounds",
                start.eta, start.eta_prime, start.lambda
            )));
        }
    }

    let mut starts: Vec<[f64; 3]> = Vec::new();
    if let Some(s) = &opts.start {
        starts.push([s.eta, s.eta_prime, s.lambda]);
    }
    let pinned = ModularParams::benchmark();
    if opts.bounds.contains(&pinned) {
        starts.push([pinned.eta, pinned.eta_prime, pinned.lambda]);
    }
    starts.push(opts.bounds.at([0.5, 0.5, 0.5]));
    for &fe in &[0.25, 0.75] {
        for &fp in &[0.25, 0.75] {
            for &fl in &[0.25, 0.75] {
                starts.push(opts.bounds.at([fe, fp, fl]));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        starts.push(opts.bounds.at([
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
        ]));
    }

    let mut tracker = Tracker {
        objective,
        bounds: &opts.bounds,
        budget: opts.budget,
        evaluations: 0,
        best: None,
    };
    let mut starts_used = 0;
    for x0 in starts {
        let before = tracker.evaluations;
        let keep_going = nelder_mead(&mut tracker, x0, PER_START_CAP)?;
        if tracker.evaluations > before {
            starts_used += 1;
        }
        if !keep_going {
            break;
        }
    }

    let (best_params, best_value) = tracker.best.expect("at least one evaluation always runs");
    Ok(OptimizationResult {
        best_params,
        best_value,
        evaluations: tracker.evaluations,
        starts_used,
        seed: opts.seed,
    })
}

/// Maximizes the vacuum CHSH value ⟨C₀⟩.
pub fn maximize_vacuum_chsh(opts: &OptimizeOptions) -> Result<OptimizationResult> {
    maximize_with(|p| Ok(chsh_correlator(p)?.value), opts)
}

/// One sweep grid point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub eta: f64,
    pub eta_prime: f64,
    pub lambda: f64,
    pub c0: f64,
    /// Excess over the classical bound 2, zero when not violated.
    pub violation: f64,
}

/// Rectangular sweep output, rows in row-major (η, η′, λ) order.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub counts: [usize; 3],
    pub rows: Vec<SweepRow>,
    pub best: SweepRow,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Evaluates ⟨C₀⟩ on an inclusive grid over the box. Every row passes the
/// same bound guardrail as the optimizer, so a sweep doubles as a bulk
/// consistency scan.
pub fn grid_sweep(bounds: &Bounds3, counts: [usize; 3]) -> Result<SweepReport> {
    bounds.validated()?;
    if counts.iter().any(|&n| n < 2) {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 2 points per axis, got {counts:?}"
        )));
    }
    let grids = [
        linspace(bounds.eta[0], bounds.eta[1], counts[0]),
        linspace(bounds.eta_prime[0], bounds.eta_prime[1], counts[1]),
        linspace(bounds.lambda[0], bounds.lambda[1], counts[2]),
    ];
    let mut rows = Vec::with_capacity(counts.iter().product());
    let mut best: Option<SweepRow> = None;
    for &eta in &grids[0] {
        for &eta_prime in &grids[1] {
            for &lambda in &grids[2] {
                let report = chsh_correlator(&ModularParams::new(eta, eta_prime, lambda)?)?;
                if report.value.abs() > TSIRELSON_BOUND + GUARDRAIL_SLACK {
                    return Err(Error::Guardrail {
                        value: report.value,
                        slack: GUARDRAIL_SLACK,
                        location: format!("sweep row ({eta}, {eta_prime}, {lambda})"),
                    });
                }
                let row = SweepRow {
                    eta,
                    eta_prime,
                    lambda,
                    c0: report.value,
                    violation: report.violation,
                };
                if best.is_none_or(|b| row.c0 > b.c0) {
                    best = Some(row);
                }
                rows.push(row);
            }
        }
    }
    Ok(SweepReport {
        counts,
        rows,
        best: best.expect("grid is non-empty"),
    })
}
