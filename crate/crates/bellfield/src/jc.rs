//! Second-order corrections from a field-coupled qubit pair.
//!
//! Two qubits with isotropic exchange coupling J sit in the field vacuum and
//! trade quanta with it through rotating-wave couplings: strengths Ω_A, Ω_B
//! and radial momentum profiles h_A, h_B over the measure
//! dμ = p² dp / (4π² ω_p), ω_p = √(p² + m²). The exchange ground state is
//! the singlet at energy −3J; the interaction conserves the total excitation
//! number, so the sector holding it is spanned by
//!
//! ```text
//! |+−, vac⟩,  |−+, vac⟩,  |−−, k⟩        (dimension 2 + number of modes)
//! ```
//!
//! with ⟨−−, k|H|+−, vac⟩ = Ω_A √w_k h̄_A(k) and the B analogue. Second
//! order perturbation theory in the couplings gives the dressed ground
//! state: singlet weight 1 − δ²/2 with
//!
//! ```text
//! δ² = ∫ dμ |Ω_A h_A − Ω_B h_B|² / (2 (4J + ω)²)
//! ```
//!
//! a one-particle cloud −(Ω_A h̄_A − Ω_B h̄_B) / (2(4J + ω)) per mode, and a
//! triplet admixture ∫ dμ (Ω_A h_A + Ω_B h_B)(Ω_A h̄_A − Ω_B h̄_B) / (8J(4J + ω)).
//!
//! Running the vacuum Bell observables on the dressed pair multiplies the
//! correlator by the singlet survival weight: ⟨C⟩ = (1 − δ²)⟨C₀⟩ up to
//! fourth order. [`corrected_chsh_oracle`] checks that claim without
//! perturbation theory: it diagonalizes the sector Hamiltonian exactly and
//! contracts the dressed state against the Bell observables, using only the
//! Weyl pairing data for the field factors.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlator::{chsh_correlator, weyl_pair_expectation, Sign};
use crate::error::{Error, Result};
use crate::fock::CMatrix;
use crate::modular::{GramMatrix, ModularParams, TestFunction};
use crate::quadrature::{gaussian_support_cut, integrate, Quadrature};

/// Couplings of the qubit pair to each other and to the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JCParams {
    /// Field coupling of qubit A; any finite real (the sign is a phase
    /// convention).
    pub coupling_a: f64,
    /// Field coupling of qubit B.
    pub coupling_b: f64,
    /// Isotropic exchange strength J > 0 between the qubits.
    pub exchange: f64,
    /// Field mass m > 0.
    pub mass: f64,
}

impl JCParams {
    pub fn new(coupling_a: f64, coupling_b: f64, exchange: f64, mass: f64) -> Result<Self> {
        Self {
            coupling_a,
            coupling_b,
            exchange,
            mass,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !self.coupling_a.is_finite() || !self.coupling_b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "couplings must be finite, got ({}, {})",
                self.coupling_a, self.coupling_b
            )));
        }
        if !self.exchange.is_finite() || self.exchange <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "exchange must be positive, got {}",
                self.exchange
            )));
        }
        if !self.mass.is_finite() || self.mass <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        Ok(self)
    }

    /// ω_p = √(p² + m²).
    pub fn dispersion(&self, p: f64) -> f64 {
        (p * p + self.mass * self.mass).sqrt()
    }
}

fn default_mode_value() -> Complex64 {
    Complex64::from(1.0)
}

/// One field mode of a discretized profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMode {
    /// Measure weight w_k (already includes the radial volume factor).
    pub weight: f64,
    /// Radial momentum p_k ≥ 0.
    pub momentum: f64,
    /// Profile value h(p_k).
    #[serde(default = "default_mode_value")]
    pub value: Complex64,
}

/// Coupling profile over radial momentum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentumProfile {
    /// h(p) = amplitude · e^{−(p − center)² / (2 width²)}.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Finitely many modes carrying explicit measure weights.
    Discrete { modes: Vec<DiscreteMode> },
}

impl MomentumProfile {
    pub fn validated(&self) -> Result<&Self> {
        match self {
            MomentumProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !amplitude.is_finite() || !center.is_finite() || *center < 0.0 {
                    return Err(Error::InvalidProfile(format!(
                        "gaussian profile needs finite amplitude and center >= 0, got ({amplitude}, {center})"
                    )));
                }
                if !width.is_finite() || *width <= 0.0 {
                    return Err(Error::InvalidProfile(format!(
                        "gaussian profile width must be positive, got {width}"
                    )));
                }
            }
            MomentumProfile::Discrete { modes } => {
                if modes.is_empty() {
                    return Err(Error::InvalidProfile(
                        "discrete profile has no modes".into(),
                    ));
                }
                for (k, mode) in modes.iter().enumerate() {
                    if !mode.weight.is_finite() || mode.weight <= 0.0 {
                        return Err(Error::InvalidProfile(format!(
                            "mode {k}: weight must be positive, got {}",
                            mode.weight
                        )));
                    }
                    if !mode.momentum.is_finite() || mode.momentum < 0.0 {
                        return Err(Error::InvalidProfile(format!(
                            "mode {k}: momentum must be >= 0, got {}",
                            mode.momentum
                        )));
                    }
                    if !mode.value.re.is_finite() || !mode.value.im.is_finite() {
                        return Err(Error::InvalidProfile(format!("mode {k}: non-finite value")));
                    }
                }
            }
        }
        Ok(self)
    }

    /// h(p). For discrete profiles p must land on one of the atoms.
    pub fn value_at(&self, p: f64) -> Result<Complex64> {
        self.validated()?;
        match self {
            MomentumProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let t = (p - center) / width;
                Ok(Complex64::from(amplitude * (-0.5 * t * t).exp()))
            }
            MomentumProfile::Discrete { modes } => modes
                .iter()
                .find(|m| (m.momentum - p).abs() <= 1e-9 * p.abs().max(1.0))
                .map(|m| m.value)
                .ok_or_else(|| {
                    Error::InvalidProfile(format!("discrete profile has no mode at p = {p}"))
                }),
        }
    }
}

/// One mode with both profile values attached, after support matching.
struct MatchedMode {
    weight: f64,
    momentum: f64,
    h_alice: Complex64,
    h_bob: Complex64,
}

/// Discrete profiles must share their (weight, momentum) atoms; only the
/// values may differ.
fn matched_atoms(alice: &MomentumProfile, bob: &MomentumProfile) -> Result<Vec<MatchedMode>> {
    alice.validated()?;
    bob.validated()?;
    let (ma, mb) = match (alice, bob) {
        (MomentumProfile::Discrete { modes: ma }, MomentumProfile::Discrete { modes: mb }) => {
            (ma, mb)
        }
        _ => {
            return Err(Error::InvalidProfile(
                "sector diagonalization needs discrete profiles on both sides".into(),
            ))
        }
    };
    if ma.len() != mb.len() {
        return Err(Error::InvalidProfile(format!(
            "profiles have {} and {} modes; supports must match",
            ma.len(),
            mb.len()
        )));
    }
    ma.iter()
        .zip(mb)
        .enumerate()
        .map(|(k, (a, b))| {
            if (a.weight - b.weight).abs() > 1e-12 * a.weight.max(1.0)
                || (a.momentum - b.momentum).abs() > 1e-12 * a.momentum.abs().max(1.0)
            {
                return Err(Error::InvalidProfile(format!(
                    "mode {k}: supports differ, ({}, {}) vs ({}, {})",
                    a.weight, a.momentum, b.weight, b.momentum
                )));
            }
            Ok(MatchedMode {
                weight: a.weight,
                momentum: a.momentum,
                h_alice: a.value,
                h_bob: b.value,
            })
        })
        .collect()
}

/// Integrates `f` over the union of the two Gaussian supports.
fn integrate_over_profiles<F: Fn(f64) -> f64>(
    alice: &MomentumProfile,
    bob: &MomentumProfile,
    quad: &Quadrature,
    f: F,
) -> Result<f64> {
    let cut = |p: &MomentumProfile| -> Result<(f64, f64)> {
        match p {
            MomentumProfile::Gaussian { center, width, .. } => {
                gaussian_support_cut(*center, *width)
            }
            MomentumProfile::Discrete { .. } => Err(Error::InvalidProfile(
                "profiles must both be gaussian or both be discrete".into(),
            )),
        }
    };
    let (lo_a, hi_a) = cut(alice)?;
    let (lo_b, hi_b) = cut(bob)?;
    Ok(integrate(f, lo_a.min(lo_b), hi_a.max(hi_b), quad)?.value)
}

/// Σ or ∫ of `f(weight, momentum, h_A, h_B)` over the shared support.
fn profile_moment<F>(
    params: &JCParams,
    alice: &MomentumProfile,
    bob: &MomentumProfile,
    quad: &Quadrature,
    f: F,
) -> Result<Complex64>
where
    F: Fn(f64, f64, Complex64, Complex64) -> Complex64,
{
    alice.validated()?;
    bob.validated()?;
    match (alice, bob) {
        (MomentumProfile::Discrete { .. }, MomentumProfile::Discrete { .. }) => {
            let mut acc = Complex64::from(0.0);
            for mode in matched_atoms(alice, bob)? {
                acc += f(mode.weight, mode.momentum, mode.h_alice, mode.h_bob);
            }
            Ok(acc)
        }
        (MomentumProfile::Gaussian { .. }, MomentumProfile::Gaussian { .. }) => {
            // Real profiles and a real measure: the imaginary part vanishes
            // identically, so one real quadrature suffices.
            let _ = params.validated()?;
            let value = integrate_over_profiles(alice, bob, quad, |p| {
                let w = p * p / (4.0 * std::f64::consts::PI.powi(2) * params.dispersion(p));
                let ha = alice.value_at(p).expect("gaussian evaluation is total");
                let hb = bob.value_at(p).expect("gaussian evaluation is total");
                f(w, p, ha, hb).re
            })?;
            Ok(Complex64::from(value))
        }
        _ => Err(Error::InvalidProfile(
            "profiles must both be gaussian or both be discrete".into(),
        )),
    }
}

/// Squared size of the one-particle cloud,
/// δ² = Σ w |Ω_A h_A − Ω_B h_B|² / (2 (4J + ω)²).
pub fn delta_squared(
    params: &JCParams,
    alice: &MomentumProfile,
    bob: &MomentumProfile,
    quad: &Quadrature,
) -> Result<f64> {
    let p = params.validated()?;
    let value = profile_moment(&p, alice, bob, quad, |w, mom, ha, hb| {
        let drive = ha * p.coupling_a - hb * p.coupling_b;
        let gap = 4.0 * p.exchange + p.dispersion(mom);
        Complex64::from(w * drive.norm_sqr() / (2.0 * gap * gap))
    })?;
    Ok(value.re)
}

/// Perturbative dressed ground state to second order in the couplings.
#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderState {
    pub params: JCParams,
    pub delta_sq: f64,
    /// Weight on the bare singlet, 1 − δ²/2.
    pub amplitude_singlet: f64,
    /// Admixture of the symmetric (triplet) combination.
    pub amplitude_triplet: Complex64,
    alice: MomentumProfile,
    bob: MomentumProfile,
}

/// Builds the dressed state; quadrature controls only matter for Gaussian
/// profiles.
pub fn second_order_state(
    params: &JCParams,
    alice: &MomentumProfile,
    bob: &MomentumProfile,
    quad: &Quadrature,
) -> Result<SecondOrderState> {
    let p = params.validated()?;
    let delta_sq = delta_squared(&p, alice, bob, quad)?;
    let amplitude_triplet = profile_moment(&p, alice, bob, quad, |w, mom, ha, hb| {
        let raise = ha * p.coupling_a + hb * p.coupling_b;
        let lower = (ha * p.coupling_a - hb * p.coupling_b).conj();
        let gap = 4.0 * p.exchange + p.dispersion(mom);
        raise * lower * (w / (8.0 * p.exchange * gap))
    })?;
    Ok(SecondOrderState {
        params: p,
        delta_sq,
        amplitude_singlet: 1.0 - 0.5 * delta_sq,
        amplitude_triplet,
        alice: alice.clone(),
        bob: bob.clone(),
    })
}

impl SecondOrderState {
    /// Scalar cloud profile c(p) = −(Ω_A h̄_A − Ω_B h̄_B) / (2 (4J + ω_p));
    /// the doubly-lowered sector state picks up √2 √w_p on top of it.
    pub fn one_particle_amplitude(&self, p: f64) -> Result<Complex64> {
        let ha = self.alice.value_at(p)?;
        let hb = self.bob.value_at(p)?;
        let drive = (ha * self.params.coupling_a - hb * self.params.coupling_b).conj();
        let gap = 4.0 * self.params.exchange + self.params.dispersion(p);
        Ok(-drive / (2.0 * gap))
    }
}

/// Exact ground state of the sector Hamiltonian, phase-fixed so the singlet
/// component is real and nonnegative.
#[derive(Debug, Clone, Serialize)]
pub struct SectorGroundState {
    pub energy: f64,
    pub singlet_amplitude: f64,
    pub triplet_amplitude: Complex64,
    /// One component per mode, in profile order.
    pub one_particle: Vec<Complex64>,
}

/// Diagonalizes the closed excitation sector {|+−,vac⟩, |−+,vac⟩, |−−,k⟩}
/// exactly. Discrete profiles only.
pub fn sector_ground_state(
    params: &JCParams,
    alice: &MomentumProfile,
    bob: &MomentumProfile,
) -> Result<SectorGroundState> {
    let p = params.validated()?;
    let atoms = matched_atoms(alice, bob)?;
    let j = p.exchange;
    let dim = 2 + atoms.len();
    let mut h = CMatrix::zeros(dim, dim);
    h[(0, 0)] = Complex64::from(-j);
    h[(1, 1)] = Complex64::from(-j);
    h[(0, 1)] = Complex64::from(2.0 * j);
    h[(1, 0)] = Complex64::from(2.0 * j);
    for (k, mode) in atoms.iter().enumerate() {
        let row = 2 + k;
        h[(row, row)] = Complex64::from(j + p.dispersion(mode.momentum));
        let va = mode.h_alice.conj() * (p.coupling_a * mode.weight.sqrt());
        let vb = mode.h_bob.conj() * (p.coupling_b * mode.weight.sqrt());
        h[(row, 0)] = va;
        h[(0, row)] = va.conj();
        h[(row, 1)] = vb;
        h[(1, row)] = vb.conj();
    }

    let eig = SymmetricEigen::new(h);
    let mut lowest = 0;
    for k in 1..dim {
        if eig.eigenvalues[k] < eig.eigenvalues[lowest] {
            lowest = k;
        }
    }
    let mut v: Vec<Complex64> = eig.eigenvectors.column(lowest).iter().copied().collect();

    let sqrt2 = std::f64::consts::SQRT_2;
    let singlet_raw = (v[0] - v[1]) / sqrt2;
    let anchor = if singlet_raw.norm() > 1e-12 {
        singlet_raw
    } else {
        *v.iter()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite components"))
            .expect("nonempty eigenvector")
    };
    let phase = anchor / anchor.norm();
    for z in &mut v {
        *z *= phase.conj();
    }

    Ok(SectorGroundState {
        energy: eig.eigenvalues[lowest],
        singlet_amplitude: ((v[0] - v[1]) / sqrt2).re,
        triplet_amplitude: (v[0] + v[1]) / sqrt2,
        one_particle: v[2..].to_vec(),
    })
}

/// Qubit-pair matrix of one CHSH term A(a)·B(b), with the field already
/// traced into Weyl pair expectations. Basis order |++⟩, |+−⟩, |−+⟩, |−−⟩.
///
/// Alice's involution pairs W_a with her lowering flip; Bob's pairs W_b with
/// his raising flip and carries a global minus. With that convention the
/// bare singlet reproduces the vacuum correlator term by term.
fn term_qubit_matrix(gram: &GramMatrix, a: TestFunction, b: TestFunction) -> DMatrix<Complex64> {
    let mut flip_plus = DMatrix::<Complex64>::zeros(2, 2);
    flip_plus[(0, 1)] = Complex64::from(1.0);
    let flip_minus = flip_plus.transpose();
    let v_pp = weyl_pair_expectation(gram, a, Sign::Plus, b);
    let v_pm = weyl_pair_expectation(gram, a, Sign::Minus, b);
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    m += flip_minus.kronecker(&flip_plus) * v_pp;
    m += flip_minus.kronecker(&flip_minus) * v_pm;
    m += flip_plus.kronecker(&flip_plus) * v_pm;
    m += flip_plus.kronecker(&flip_minus) * v_pp;
    -m
}

/// ⟨g| M ⊗ 1_cloud |g⟩ for a sector vector g = (g_{+−}, g_{−+}, cloud modes).
fn sector_contraction(m: &DMatrix<Complex64>, g: &[Complex64]) -> Complex64 {
    let qubit_index = [1usize, 2];
    let mut acc = Complex64::from(0.0);
    for i in 0..2 {
        for jj in 0..2 {
            acc += g[i].conj() * g[jj] * m[(qubit_index[i], qubit_index[jj])];
        }
    }
    let cloud_weight: f64 = g[2..].iter().map(|z| z.norm_sqr()).sum();
    acc + m[(3, 3)] * cloud_weight
}

/// CHSH expectation in an arbitrary sector state.
pub fn chsh_in_sector_state(modular: &ModularParams, sector: &[Complex64]) -> Result<f64> {
    if sector.len() < 2 {
        return Err(Error::InvalidState(
            "sector vector needs at least the two qubit components".into(),
        ));
    }
    let norm: f64 = sector.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "sector vector norm² is {norm}, expected 1"
        )));
    }
    let gram = GramMatrix::build(modular)?;
    use TestFunction::*;
    let terms = [
        (F, Jf, 1.0),
        (FPrime, Jf, 1.0),
        (F, JfPrime, 1.0),
        (FPrime, JfPrime, -1.0),
    ];
    let mut acc = Complex64::from(0.0);
    for (a, b, sign) in terms {
        acc += sector_contraction(&term_qubit_matrix(&gram, a, b), sector) * sign;
    }
    Ok(acc.re)
}

/// Outcome of the exact corrected Bell run.
#[derive(Debug, Clone, Serialize)]
pub struct CorrectedBellRun {
    /// Uncoupled vacuum value ⟨C₀⟩.
    pub c0: f64,
    pub delta_sq: f64,
    /// Second-order prediction (1 − δ²)⟨C₀⟩.
    pub predicted: f64,
    /// Contraction of the exact dressed ground state.
    pub measured: f64,
    /// |measured − predicted|; fourth order in the couplings.
    pub residual: f64,
    pub ground_energy: f64,
}

/// Runs the Bell observables in the exactly diagonalized dressed state and
/// compares with the second-order prediction. Discrete profiles only.
pub fn corrected_chsh_oracle(
    modular: &ModularParams,
    params: &JCParams,
    alice: &MomentumProfile,
    bob: &MomentumProfile,
) -> Result<CorrectedBellRun> {
    let ground = sector_ground_state(params, alice, bob)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let s = Complex64::from(ground.singlet_amplitude);
    let t = ground.triplet_amplitude;
    let mut sector = vec![(s + t) / sqrt2, (t - s) / sqrt2];
    sector.extend_from_slice(&ground.one_particle);

    let measured = chsh_in_sector_state(modular, &sector)?;
    let c0 = chsh_correlator(modular)?.value;
    let delta_sq = delta_squared(params, alice, bob, &Quadrature::default())?;
    let predicted = (1.0 - delta_sq) * c0;
    Ok(CorrectedBellRun {
        c0,
        delta_sq,
        predicted,
        measured,
        residual: (measured - predicted).abs(),
        ground_energy: ground.energy,
    })
}

/// Second-order prediction bundle for any profile kind.
#[derive(Debug, Clone, Serialize)]
pub struct CorrectedPrediction {
    pub c0: f64,
    pub delta_sq: f64,
    /// (1 − δ²)⟨C₀⟩.
    pub value: f64,
    pub amplitude_singlet: f64,
    pub amplitude_triplet: Complex64,
}

pub fn corrected_chsh_prediction(
    modular: &ModularParams,
    params: &JCParams,
    alice: &MomentumProfile,
    bob: &MomentumProfile,
    quad: &Quadrature,
) -> Result<CorrectedPrediction> {
    let state = second_order_state(params, alice, bob, quad)?;
    let c0 = chsh_correlator(modular)?.value;
    Ok(CorrectedPrediction {
        c0,
        delta_sq: state.delta_sq,
        value: (1.0 - state.delta_sq) * c0,
        amplitude_singlet: state.amplitude_singlet,
        amplitude_triplet: state.amplitude_triplet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_mode() -> MomentumProfile {
        MomentumProfile::Discrete {
            modes: vec![DiscreteMode {
                weight: 1.0,
                momentum: 0.0,
                value: Complex64::from(1.0),
            }],
        }
    }

    fn params(coupling_a: f64) -> JCParams {
        JCParams::new(coupling_a, 0.0, 1.0, 1.0).unwrap()
    }

    fn gaussian(amplitude: f64) -> MomentumProfile {
        MomentumProfile::Gaussian {
            amplitude,
            center: 0.0,
            width: 1.0,
        }
    }

    #[test]
    fn discrete_delta_squared_closed_form() {
        // Single unit-weight mode at p = 0: δ² = Ω² / (2 (4J + m)²).
        let d = delta_squared(
            &params(0.1),
            &unit_mode(),
            &unit_mode(),
            &Quadrature::default(),
        )
        .unwrap();
        assert_relative_eq!(d, 0.0002, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_delta_squared_reference_value() {
        let d = delta_squared(
            &params(0.1),
            &gaussian(1.0),
            &gaussian(1.0),
            &Quadrature::default(),
        )
        .unwrap();
        assert!(
            (d / 1.290_550_325_355_803e-6 - 1.0).abs() < 1e-7,
            "delta_squared {d}"
        );
    }

    #[test]
    fn balanced_couplings_cancel() {
        let p = JCParams::new(0.3, 0.3, 1.0, 1.0).unwrap();
        let d = delta_squared(&p, &gaussian(1.0), &gaussian(1.0), &Quadrature::default()).unwrap();
        assert!(d.abs() < 1e-20);
        let d = delta_squared(&p, &unit_mode(), &unit_mode(), &Quadrature::default()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn profile_kinds_must_match() {
        let q = Quadrature::default();
        assert!(delta_squared(&params(0.1), &gaussian(1.0), &unit_mode(), &q).is_err());
        let other_support = MomentumProfile::Discrete {
            modes: vec![DiscreteMode {
                weight: 0.5,
                momentum: 0.0,
                value: Complex64::from(1.0),
            }],
        };
        assert!(delta_squared(&params(0.1), &unit_mode(), &other_support, &q).is_err());
    }

    #[test]
    fn sector_ground_energy_reference_value() {
        let g = sector_ground_state(&params(0.1), &unit_mode(), &unit_mode()).unwrap();
        // 3×3 sector at Ω = 0.1, J = m = w = 1; second order gives −3.001.
        assert!(
            (g.energy - (-3.001_000_049_930)).abs() < 1e-9,
            "energy {}",
            g.energy
        );
        assert!(g.singlet_amplitude > 0.999);
    }

    #[test]
    fn sector_components_match_perturbation_theory() {
        let p = params(0.01);
        let quad = Quadrature::default();
        let exact = sector_ground_state(&p, &unit_mode(), &unit_mode()).unwrap();
        let pt = second_order_state(&p, &unit_mode(), &unit_mode(), &quad).unwrap();
        assert!((exact.singlet_amplitude - pt.amplitude_singlet).abs() < 1e-10);
        assert!((exact.triplet_amplitude - pt.amplitude_triplet).norm() < 1e-8);
        let cloud = pt.one_particle_amplitude(0.0).unwrap() * std::f64::consts::SQRT_2;
        assert!((exact.one_particle[0] - cloud).norm() < 1e-8);
    }

    #[test]
    fn cloud_amplitude_formula() {
        let pt = second_order_state(
            &params(0.1),
            &unit_mode(),
            &unit_mode(),
            &Quadrature::default(),
        )
        .unwrap();
        let c = pt.one_particle_amplitude(0.0).unwrap();
        assert_relative_eq!(c.re, -0.01, epsilon = 1e-15);
        assert_relative_eq!(c.im, 0.0);
    }

    #[test]
    fn bare_singlet_reproduces_vacuum_correlator_exactly() {
        let modular = ModularParams::benchmark();
        let h = 1.0 / std::f64::consts::SQRT_2;
        let sector = [Complex64::from(h), Complex64::from(-h)];
        let got = chsh_in_sector_state(&modular, &sector).unwrap();
        let c0 = chsh_correlator(&modular).unwrap().value;
        assert_relative_eq!(got, c0, epsilon = 1e-15);
    }

    #[test]
    fn oracle_residual_is_fourth_order_small() {
        let modular = ModularParams::benchmark();
        let run =
            corrected_chsh_oracle(&modular, &params(0.01), &unit_mode(), &unit_mode()).unwrap();
        assert!(run.residual < 1e-10, "residual {}", run.residual);
        assert!(run.delta_sq > 0.0);
        assert!(run.measured < run.c0);
    }

    #[test]
    fn oracle_is_even_in_the_coupling() {
        let modular = ModularParams::benchmark();
        let plus = corrected_chsh_oracle(&modular, &params(0.01), &unit_mode(), &unit_mode())
            .unwrap()
            .measured;
        let minus = corrected_chsh_oracle(&modular, &params(-0.01), &unit_mode(), &unit_mode())
            .unwrap()
            .measured;
        assert!((plus - minus).abs() < 1e-12);
    }

    #[test]
    fn prediction_pipeline_reports_consistent_fields() {
        let modular = ModularParams::benchmark();
        let quad = Quadrature::default();
        let pred = corrected_chsh_prediction(
            &modular,
            &params(0.1),
            &gaussian(1.0),
            &gaussian(1.0),
            &quad,
        )
        .unwrap();
        assert_relative_eq!(pred.value, (1.0 - pred.delta_sq) * pred.c0, epsilon = 1e-15);
        assert_relative_eq!(
            pred.amplitude_singlet,
            1.0 - 0.5 * pred.delta_sq,
            epsilon = 1e-15
        );
        assert_relative_eq!(pred.amplitude_triplet.im, 0.0);
    }

    #[test]
    fn parameter_validation_rejects_bad_inputs() {
        assert!(JCParams::new(0.1, 0.0, 0.0, 1.0).is_err());
        assert!(JCParams::new(0.1, 0.0, 1.0, -1.0).is_err());
        assert!(JCParams::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        let bad = MomentumProfile::Gaussian {
            amplitude: 1.0,
            center: 0.0,
            width: 0.0,
        };
        assert!(bad.validated().is_err());
        let empty = MomentumProfile::Discrete { modes: vec![] };
        assert!(empty.validated().is_err());
    }
}
