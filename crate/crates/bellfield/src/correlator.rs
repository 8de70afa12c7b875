//! Closed-form vacuum CHSH correlator.
//!
//! Each party measures dichotomic observables built from Weyl operators,
//! A(h) = W_h ⊗ flip + W_h† ⊗ flip† on their half of an entangled pair.
//! Tracing out the auxiliary qubits leaves vacuum expectations of Weyl
//! products, and those reduce to Gram data through two identities:
//!
//! ```text
//! W_a W_b = e^{-(i/2) Δ(a,b)} W_{a+b},     ⟨0| W_h |0⟩ = e^{-‖h‖²/2}
//! ```
//!
//! The CHSH combination with Alice's (f, f′) against Bob's (jf, jf′)
//! collapses to three exponentials:
//!
//! ```text
//! ⟨C₀⟩ = e^{-η²(1+λ)²} + 2 e^{-(η²+η′²)(1+λ²)/2} − e^{-η′²(1+λ)²}
//! ```
//!
//! `chsh_correlator` evaluates the term-by-term Weyl route; the monolithic
//! exponential form is kept alongside as `chsh_closed_form` so the two can
//! be cross-checked.

use serde::Serialize;

use crate::error::Result;
use crate::modular::{pj_pairing, GramMatrix, ModularParams, TestFunction};
use num_complex::Complex64;

/// Largest CHSH value any quantum state and dichotomic observables allow,
/// 2√2.
pub const TSIRELSON_BOUND: f64 = 2.828_427_124_746_190_3;

/// ⟨0|W_h|0⟩ for a test function with one-particle norm² `norm_sq`.
pub fn weyl_vacuum_expectation(norm_sq: f64) -> f64 {
    (-0.5 * norm_sq).exp()
}

/// Relative sign of the second Weyl generator in a product W_a W_{±b}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// ⟨0| W_a W_{±b} |0⟩ from Gram data alone:
/// e^{∓(i/2)Δ(a,b)} · e^{-‖a±b‖²/2}.
pub fn weyl_pair_expectation(
    gram: &GramMatrix,
    a: TestFunction,
    sign: Sign,
    b: TestFunction,
) -> Complex64 {
    let s = sign.factor();
    let phase = Complex64::new(0.0, -0.5 * s * pj_pairing(gram, a, b)).exp();
    phase * weyl_vacuum_expectation(gram.sum_norm_sq(a, s, b))
}

/// One CHSH term: the real part of ⟨0|W_a W_b|0⟩, which is what survives the
/// qubit trace for the dichotomic observables.
fn term(gram: &GramMatrix, a: TestFunction, b: TestFunction) -> f64 {
    weyl_pair_expectation(gram, a, Sign::Plus, b).re
}

/// CHSH value together with the three distinct Weyl terms it is built from.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelatorReport {
    pub params: ModularParams,
    /// ⟨C₀⟩ = t(f,jf) + t(f′,jf) + t(f,jf′) − t(f′,jf′).
    pub value: f64,
    /// (t(f,jf), t(f′,jf) = t(f,jf′), t(f′,jf′)).
    pub terms: [f64; 3],
    /// Amount above the classical bound 2 (zero when not violated).
    pub violation: f64,
}

/// Evaluates ⟨C₀⟩ by the Weyl-product route, term by term.
pub fn chsh_correlator(params: &ModularParams) -> Result<CorrelatorReport> {
    let gram = GramMatrix::build(params)?;
    use TestFunction::*;
    let t_f_jf = term(&gram, F, Jf);
    let t_fp_jf = term(&gram, FPrime, Jf);
    let t_f_jfp = term(&gram, F, JfPrime);
    let t_fp_jfp = term(&gram, FPrime, JfPrime);
    let value = t_f_jf + t_fp_jf + t_f_jfp - t_fp_jfp;
    Ok(CorrelatorReport {
        params: *params,
        value,
        terms: [t_f_jf, t_fp_jf, t_fp_jfp],
        violation: (value - 2.0).max(0.0),
    })
}

/// The same quantity as one closed-form expression in (η, η′, λ).
pub fn chsh_closed_form(params: &ModularParams) -> Result<f64> {
    let p = params.validated()?;
    let (eta2, etp2) = (p.eta * p.eta, p.eta_prime * p.eta_prime);
    let opl2 = (1.0 + p.lambda) * (1.0 + p.lambda);
    let d = 1.0 + p.lambda * p.lambda;
    Ok((-eta2 * opl2).exp() + 2.0 * (-0.5 * (eta2 + etp2) * d).exp() - (-etp2 * opl2).exp())
}

/// First-order corrected value (1 − δ²)⟨C₀⟩ for a coupling-induced state
/// disturbance of squared size `delta_sq`.
pub fn chsh_corrected(params: &ModularParams, delta_sq: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta_sq) {
        return Err(crate::error::Error::InvalidParameter(format!(
            "delta_sq must lie in [0, 1], got {delta_sq}"
        )));
    }
    Ok((1.0 - delta_sq) * chsh_correlator(params)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Value of ⟨C₀⟩ at the benchmark point, frozen from the closed form.
    pub const BENCHMARK_VALUE: f64 = 2.149_307_217_342_252;

    #[test]
    fn benchmark_point_value_and_terms() {
        let r = chsh_correlator(&ModularParams::benchmark()).unwrap();
        assert_relative_eq!(r.value, BENCHMARK_VALUE, epsilon = 1e-15);
        assert_relative_eq!(r.terms[0], 0.999_776_386_1, epsilon = 1e-10);
        assert_relative_eq!(r.terms[1], 0.820_211_054_9, epsilon = 1e-10);
        assert_relative_eq!(r.terms[2], 0.490_891_278_5, epsilon = 1e-10);
        assert_relative_eq!(r.violation, BENCHMARK_VALUE - 2.0, epsilon = 1e-15);
    }

    #[test]
    fn weyl_route_matches_closed_form() {
        for &(eta, etp, lam) in &[
            (0.01, 0.564058, 0.495456),
            (1.0, 1.0, 0.5),
            (0.3, 0.9, 0.9999),
            (0.0, 0.475, 0.9999),
        ] {
            let p = ModularParams::new(eta, etp, lam).unwrap();
            let a = chsh_correlator(&p).unwrap().value;
            let b = chsh_closed_form(&p).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-14, max_relative = 1e-14);
        }
    }

    #[test]
    fn pair_expectation_at_unit_strengths() {
        // ⟨0|W_f W_{f'}|0⟩ at (1, 1, 0.5): Δ = 1.5, ‖f+f′‖² = 2.5.
        let p = ModularParams::new(1.0, 1.0, 0.5).unwrap();
        let g = GramMatrix::build(&p).unwrap();
        let v = weyl_pair_expectation(&g, TestFunction::F, Sign::Plus, TestFunction::FPrime);
        assert_relative_eq!(v.re, 0.209_632_370_741_556_33, epsilon = 1e-15);
        assert_relative_eq!(v.im, -0.195_292_774_472_517_2, epsilon = 1e-15);
    }

    #[test]
    fn corrected_value_scales_linearly_and_validates() {
        let p = ModularParams::benchmark();
        let c0 = chsh_correlator(&p).unwrap().value;
        assert_relative_eq!(chsh_corrected(&p, 0.0).unwrap(), c0);
        assert_relative_eq!(chsh_corrected(&p, 0.25).unwrap(), 0.75 * c0);
        assert!(chsh_corrected(&p, -0.1).is_err());
        assert!(chsh_corrected(&p, 1.5).is_err());
    }

    proptest! {
        /// The correlator never exceeds the quantum bound 2√2 and the two
        /// evaluation routes stay glued together across the whole box.
        #[test]
        fn bounded_by_tsirelson(
            eta in 0.0_f64..5.0,
            etp in 0.0_f64..5.0,
            lam in 0.001_f64..0.9999,
        ) {
            let p = ModularParams::new(eta, etp, lam).unwrap();
            let v = chsh_correlator(&p).unwrap().value;
            prop_assert!(v.abs() <= TSIRELSON_BOUND + 1e-12);
            let w = chsh_closed_form(&p).unwrap();
            prop_assert!((v - w).abs() <= 1e-13 * (1.0 + v.abs()));
        }

        /// Swapping η ↔ η′ flips the sign of the odd part: the middle term
        /// is symmetric while the outer terms trade places.
        #[test]
        fn eta_swap_symmetry(
            eta in 0.0_f64..3.0,
            etp in 0.0_f64..3.0,
            lam in 0.001_f64..0.9999,
        ) {
            let p = ModularParams::new(eta, etp, lam).unwrap();
            let q = ModularParams::new(etp, eta, lam).unwrap();
            let rp = chsh_correlator(&p).unwrap();
            let rq = chsh_correlator(&q).unwrap();
            prop_assert!((rp.terms[1] - rq.terms[1]).abs() < 1e-13);
            prop_assert!((rp.terms[0] - rq.terms[2]).abs() < 1e-13);
            prop_assert!(((rp.value + rq.value) - 4.0 * rp.terms[1]).abs() < 1e-12);
        }
    }
}
