//! Test-function geometry for the vacuum Bell setup.
//!
//! The four smearing functions live in the complex span of a single unit
//! vector φ and its modular conjugate jφ, with ⟨φ|jφ⟩ = 0. On that span the
//! modular operator acts sharply, δ^{1/2}φ = λφ with 0 < λ < 1, and the
//! modular conjugation j swaps the two coordinates antilinearly,
//! j(c₁, c₂) = (c̄₂, c̄₁). Alice's functions are built from s = jδ^{1/2}:
//!
//! ```text
//! f  = η (1 + s) φ    = η (φ + λ jφ)
//! f′ = η′(1 + s) iφ   = η′(iφ − iλ jφ)
//! ```
//!
//! and Bob's partners are their j-images jf, jf′. All inner products needed
//! downstream are recorded in a 4×4 Gram matrix over the ordered labels
//! (f, f′, jf, jf′); the Pauli-Jordan pairing used by the Weyl relations is
//! Δ(a, b) = 2·Im⟨a|b⟩, which vanishes for every Alice-Bob pair (spacelike
//! commutativity at the level of coefficients).

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive upper bound accepted for λ; the modular spectral parameter must
/// stay strictly below 1 for the state to remain separating.
pub const LAMBDA_MAX: f64 = 0.9999;

/// Smearing strengths and the sharp modular value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularParams {
    /// Strength of Alice's first test function (η ≥ 0).
    pub eta: f64,
    /// Strength of Alice's second test function (η′ ≥ 0).
    pub eta_prime: f64,
    /// Sharp eigenvalue of δ^{1/2} on the window, 0 < λ ≤ 0.9999.
    pub lambda: f64,
}

impl ModularParams {
    pub fn new(eta: f64, eta_prime: f64, lambda: f64) -> Result<Self> {
        Self {
            eta,
            eta_prime,
            lambda,
        }
        .validated()
    }

    /// Returns the parameters unchanged when every bound holds; the error
    /// names the violated bound.
    pub fn validated(self) -> Result<Self> {
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eta must satisfy 0 <= eta < inf, got {}",
                self.eta
            )));
        }
        if !self.eta_prime.is_finite() || self.eta_prime < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eta_prime must satisfy 0 <= eta_prime < inf, got {}",
                self.eta_prime
            )));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 || self.lambda > LAMBDA_MAX {
            return Err(Error::InvalidParameter(format!(
                "lambda must satisfy 0 < lambda <= {LAMBDA_MAX}, got {}",
                self.lambda
            )));
        }
        Ok(self)
    }

    /// Benchmark point used throughout the examples and tests.
    pub fn benchmark() -> Self {
        Self {
            eta: 0.01,
            eta_prime: 0.564058,
            lambda: 0.495456,
        }
    }
}

/// Labels for the four test functions, in fixed Gram order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestFunction {
    F,
    FPrime,
    Jf,
    JfPrime,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [
        TestFunction::F,
        TestFunction::FPrime,
        TestFunction::Jf,
        TestFunction::JfPrime,
    ];

    pub fn index(self) -> usize {
        match self {
            TestFunction::F => 0,
            TestFunction::FPrime => 1,
            TestFunction::Jf => 2,
            TestFunction::JfPrime => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TestFunction::F => "f",
            TestFunction::FPrime => "f'",
            TestFunction::Jf => "jf",
            TestFunction::JfPrime => "jf'",
        }
    }

    /// Alice holds f and f′; Bob holds their modular conjugates.
    pub fn is_alice(self) -> bool {
        matches!(self, TestFunction::F | TestFunction::FPrime)
    }
}

/// Coordinates of each test function in the orthonormal basis (e₁, e₂) =
/// (φ, jφ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCoefficients {
    coeffs: [[Complex64; 2]; 4],
}

/// Modular conjugation on coordinates: swap the two entries and conjugate.
pub fn apply_j(c: [Complex64; 2]) -> [Complex64; 2] {
    [c[1].conj(), c[0].conj()]
}

impl TwoModeCoefficients {
    pub fn from_params(p: &ModularParams) -> Result<Self> {
        let p = p.validated()?;
        let i = Complex64::i();
        let f = [Complex64::from(p.eta), Complex64::from(p.eta * p.lambda)];
        let f_prime = [i * p.eta_prime, -i * p.eta_prime * p.lambda];
        Ok(Self {
            coeffs: [f, f_prime, apply_j(f), apply_j(f_prime)],
        })
    }

    pub fn coefficients(&self, which: TestFunction) -> [Complex64; 2] {
        self.coeffs[which.index()]
    }

    /// Complex inner product ⟨a|b⟩, antilinear in the first slot.
    pub fn inner(&self, a: TestFunction, b: TestFunction) -> Complex64 {
        let ca = self.coefficients(a);
        let cb = self.coefficients(b);
        ca[0].conj() * cb[0] + ca[1].conj() * cb[1]
    }
}

/// Gram matrix of the four test functions in the fixed order (f, f′, jf, jf′).
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    m: Matrix4<Complex64>,
}

impl GramMatrix {
    /// Builds the Gram matrix for the given parameters. The entries with
    /// known closed forms are set from them directly; the rest come from the
    /// coefficient expansion (the two routes agree to rounding, which the
    /// test suite pins down).
    pub fn build(p: &ModularParams) -> Result<Self> {
        let c = TwoModeCoefficients::from_params(p)?;
        let mut m = Matrix4::zeros();
        for a in TestFunction::ALL {
            for b in TestFunction::ALL {
                m[(a.index(), b.index())] = c.inner(a, b);
            }
        }

        // Pin the entries with closed forms; they double as documentation of
        // the geometry. Diagonal, the two real λ-pairings, and the vanishing
        // cross pairings.
        use TestFunction::*;
        let (eta, etp, lam) = (p.eta, p.eta_prime, p.lambda);
        let d = 1.0 + lam * lam;
        m[(F.index(), F.index())] = Complex64::from(eta * eta * d);
        m[(Jf.index(), Jf.index())] = Complex64::from(eta * eta * d);
        m[(FPrime.index(), FPrime.index())] = Complex64::from(etp * etp * d);
        m[(JfPrime.index(), JfPrime.index())] = Complex64::from(etp * etp * d);
        let set_pair =
            |m: &mut Matrix4<Complex64>, a: TestFunction, b: TestFunction, v: Complex64| {
                m[(a.index(), b.index())] = v;
                m[(b.index(), a.index())] = v.conj();
            };
        set_pair(&mut m, F, Jf, Complex64::from(2.0 * eta * eta * lam));
        set_pair(
            &mut m,
            FPrime,
            JfPrime,
            Complex64::from(2.0 * etp * etp * lam),
        );
        set_pair(&mut m, F, JfPrime, Complex64::from(0.0));
        set_pair(&mut m, FPrime, Jf, Complex64::from(0.0));

        Ok(Self { m })
    }

    /// Reconstructs every entry from the coefficient expansion; used to
    /// cross-check `build`.
    pub fn from_coefficients(c: &TwoModeCoefficients) -> Self {
        let mut m = Matrix4::zeros();
        for a in TestFunction::ALL {
            for b in TestFunction::ALL {
                m[(a.index(), b.index())] = c.inner(a, b);
            }
        }
        Self { m }
    }

    pub fn entry(&self, a: TestFunction, b: TestFunction) -> Complex64 {
        self.m[(a.index(), b.index())]
    }

    /// Squared one-particle norm ‖a‖².
    pub fn norm_sq(&self, a: TestFunction) -> f64 {
        self.entry(a, a).re
    }

    /// ‖a ± b‖² assembled from Gram data.
    pub fn sum_norm_sq(&self, a: TestFunction, sign: f64, b: TestFunction) -> f64 {
        self.norm_sq(a) + 2.0 * sign * self.entry(a, b).re + self.norm_sq(b)
    }

    /// Eigenvalues of the Hermitian Gram matrix, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = self.m.symmetric_eigenvalues();
        let mut vals = [eig[0], eig[1], eig[2], eig[3]];
        vals.sort_by(|x, y| x.partial_cmp(y).expect("gram eigenvalues are finite"));
        vals
    }

    /// Largest Hermiticity defect max|G[a][b] − conj(G[b][a])|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                worst = worst.max((self.m[(a, b)] - self.m[(b, a)].conj()).norm());
            }
        }
        worst
    }
}

/// Pauli-Jordan pairing Δ(a, b) = 2·Im⟨a|b⟩. This is the c-number entering
/// the Weyl composition law; it vanishes for every (Alice, Bob) label pair.
pub fn pj_pairing(gram: &GramMatrix, a: TestFunction, b: TestFunction) -> f64 {
    2.0 * gram.entry(a, b).im
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(eta: f64, eta_prime: f64, lambda: f64) -> ModularParams {
        ModularParams::new(eta, eta_prime, lambda).unwrap()
    }

    #[test]
    fn validation_names_the_violated_bound() {
        let err = ModularParams::new(-1.0, 1.0, 0.5).unwrap_err();
        assert!(err.to_string().contains("eta"));
        let err = ModularParams::new(0.0, 1.0, 1.5).unwrap_err();
        assert!(err.to_string().contains("lambda"));
        let err = ModularParams::new(0.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("lambda"));
        assert!(ModularParams::new(0.0, 0.0, LAMBDA_MAX).is_ok());
    }

    #[test]
    fn coefficient_table_at_unit_strengths() {
        let c = TwoModeCoefficients::from_params(&params(1.0, 1.0, 0.5)).unwrap();
        let i = Complex64::i();
        assert_eq!(
            c.coefficients(TestFunction::F),
            [Complex64::from(1.0), Complex64::from(0.5)]
        );
        assert_eq!(c.coefficients(TestFunction::FPrime), [i, -0.5 * i]);
        assert_eq!(
            c.coefficients(TestFunction::Jf),
            [Complex64::from(0.5), Complex64::from(1.0)]
        );
        assert_eq!(c.coefficients(TestFunction::JfPrime), [0.5 * i, -i]);
    }

    #[test]
    fn j_is_an_antilinear_involution_mapping_alice_to_bob() {
        let c = TwoModeCoefficients::from_params(&params(0.7, 1.3, 0.42)).unwrap();
        for (a, b) in [
            (TestFunction::F, TestFunction::Jf),
            (TestFunction::FPrime, TestFunction::JfPrime),
        ] {
            assert_eq!(apply_j(c.coefficients(a)), c.coefficients(b));
            assert_eq!(apply_j(c.coefficients(b)), c.coefficients(a));
        }
    }

    #[test]
    fn gram_closed_forms_at_unit_strengths() {
        let g = GramMatrix::build(&params(1.0, 1.0, 0.5)).unwrap();
        use TestFunction::*;
        assert_relative_eq!(g.norm_sq(F), 1.25);
        assert_relative_eq!(g.norm_sq(FPrime), 1.25);
        assert_relative_eq!(g.entry(F, Jf).re, 1.0);
        assert_relative_eq!(g.entry(F, Jf).im, 0.0);
        // ⟨f|f′⟩ = iηη′(1 − λ²)
        let v = g.entry(F, FPrime);
        assert_relative_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.im, 0.75, epsilon = 1e-15);
        assert_relative_eq!(pj_pairing(&g, F, FPrime), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn causality_pairings_vanish() {
        for &(eta, etp, lam) in &[
            (1.0, 1.0, 0.5),
            (0.01, 0.564058, 0.495456),
            (2.3, 0.4, 0.93),
        ] {
            let g = GramMatrix::build(&params(eta, etp, lam)).unwrap();
            use TestFunction::*;
            for a in [F, FPrime] {
                for b in [Jf, JfPrime] {
                    assert!(pj_pairing(&g, a, b).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gram_matches_coefficient_reconstruction_and_is_psd() {
        for &(eta, etp, lam) in &[
            (1.0, 1.0, 0.5),
            (0.01, 0.564058, 0.495456),
            (0.0, 1.7, 0.2),
            (3.0, 0.0, 0.9999),
        ] {
            let p = params(eta, etp, lam);
            let built = GramMatrix::build(&p).unwrap();
            let rec = GramMatrix::from_coefficients(&TwoModeCoefficients::from_params(&p).unwrap());
            for a in TestFunction::ALL {
                for b in TestFunction::ALL {
                    assert!(
                        (built.entry(a, b) - rec.entry(a, b)).norm() < 1e-14,
                        "entry ({}, {}) differs",
                        a.label(),
                        b.label()
                    );
                }
            }
            assert!(built.hermiticity_defect() < 1e-15);
            let scale = built
                .norm_sq(TestFunction::F)
                .max(built.norm_sq(TestFunction::FPrime));
            for ev in built.eigenvalues() {
                assert!(ev > -1e-14 * scale.max(1.0), "gram not PSD: {ev}");
            }
        }
    }
}
