//! CHSH for a pair of composite spin-1 ⊗ spin-1/2 systems.
//!
//! Each party holds a six-dimensional system with basis ordered
//!
//! ```text
//! |1,+⟩, |−1,+⟩, |0,+⟩, |1,−⟩, |−1,−⟩, |0,−⟩      (index = s·3 + m_idx)
//! ```
//!
//! where m_idx maps the spin-1 projection {1, −1, 0} to {0, 1, 2} and s is
//! the spin-1/2 component. A measurement is labelled by two angles (a₁, a₂)
//! and pairs each basis state with its fully flipped partner through a pure
//! phase, so the operator is Hermitian, unitary, and squares to one:
//!
//! ```text
//! A|1,+⟩ = e^{i(a₁+a₂)}|−1,−⟩,  A|−1,+⟩ = e^{−i(a₁−a₂)}|1,−⟩,  A|0,+⟩ = e^{ia₂}|0,−⟩
//! ```
//!
//! (plus the adjoint images). On the doubly entangled state, spin-1 singlet
//! ⊗ spin-1/2 singlet, the correlator has the closed form
//!
//! ```text
//! E(a, b) = −(1/3) (1 + 2 cos(a₁ − b₁)) cos(a₂ − b₂)
//! ```
//!
//! evaluated here both from that expression and by a dense 6 × 6 matrix
//! contraction so the two routes can police each other. Product states never
//! exceed the classical bound 2, which the seeded scan helpers exercise.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::CMatrix;

/// CHSH magnitude on the double singlet at the reference angles,
/// 2√2(1 + √2)/3.
pub fn reference_magnitude() -> f64 {
    let s = std::f64::consts::SQRT_2;
    2.0 * s * (1.0 + s) / 3.0
}

/// The four measurement directions, two angles each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSet {
    pub alice: [f64; 2],
    pub alice_prime: [f64; 2],
    pub bob: [f64; 2],
    pub bob_prime: [f64; 2],
}

impl AngleSet {
    /// Angles reaching |⟨C⟩| = 2√2(1+√2)/3 on the double singlet: a common
    /// π/4 offset in the first slot and the standard CHSH cross in the
    /// second.
    pub fn reference() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self {
            alice: [FRAC_PI_4, 0.0],
            alice_prime: [FRAC_PI_4, FRAC_PI_2],
            bob: [0.0, FRAC_PI_4],
            bob_prime: [0.0, -FRAC_PI_4],
        }
    }

    pub fn validated(&self) -> Result<&Self> {
        let all = [self.alice, self.alice_prime, self.bob, self.bob_prime];
        if all.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("angles must be finite".into()));
        }
        Ok(self)
    }
}

/// Dichotomic party operator for direction (a₁, a₂).
pub fn composite_operator(angles: [f64; 2]) -> CMatrix {
    let [a1, a2] = angles;
    let phase = |t: f64| Complex64::new(0.0, t).exp();
    let mut m = CMatrix::zeros(6, 6);
    let pairs = [
        // (row, col, phase of ⟨row|A|col⟩); the conjugates are filled below.
        (4, 0, phase(a1 + a2)),
        (3, 1, phase(-(a1 - a2))),
        (5, 2, phase(a2)),
    ];
    for (r, c, v) in pairs {
        m[(r, c)] = v;
        m[(c, r)] = v.conj();
    }
    m
}

/// Bipartite state of the two composites, stored as a 6 × 6 coefficient
/// matrix M with Ψ = Σ M[i, j] |i⟩_A |j⟩_B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpinState {
    /// Spin-1 singlet ⊗ spin-1/2 singlet.
    DoubleSinglet,
    /// Product state u ⊗ v; cannot violate the classical bound.
    Product {
        alice: Vec<Complex64>,
        bob: Vec<Complex64>,
    },
}

impl SpinState {
    pub fn matrix(&self) -> Result<CMatrix> {
        match self {
            SpinState::DoubleSinglet => {
                let third = 1.0 / 3.0_f64.sqrt();
                let half = std::f64::consts::FRAC_1_SQRT_2;
                // Spin-1 singlet (|1,−1⟩ + |−1,1⟩ − |0,0⟩)/√3 in m_idx order.
                let mut spin1 = CMatrix::zeros(3, 3);
                spin1[(0, 1)] = Complex64::from(third);
                spin1[(1, 0)] = Complex64::from(third);
                spin1[(2, 2)] = Complex64::from(-third);
                // Spin-1/2 singlet (|+−⟩ − |−+⟩)/√2.
                let mut spin2 = CMatrix::zeros(2, 2);
                spin2[(0, 1)] = Complex64::from(half);
                spin2[(1, 0)] = Complex64::from(-half);
                // Party index is s·3 + m_idx, so s is the major factor.
                Ok(spin2.kronecker(&spin1))
            }
            SpinState::Product { alice, bob } => {
                if alice.len() != 6 || bob.len() != 6 {
                    return Err(Error::InvalidState(format!(
                        "product factors must have 6 components, got ({}, {})",
                        alice.len(),
                        bob.len()
                    )));
                }
                let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let (na, nb) = (norm(alice), norm(bob));
                if na == 0.0 || nb == 0.0 {
                    return Err(Error::InvalidState("zero-norm product factor".into()));
                }
                let mut m = CMatrix::zeros(6, 6);
                for i in 0..6 {
                    for j in 0..6 {
                        m[(i, j)] = (alice[i] / na) * (bob[j] / nb);
                    }
                }
                Ok(m)
            }
        }
    }
}

/// ⟨Ψ| A(a) ⊗ A(b) |Ψ⟩ by dense contraction.
pub fn correlator_matrix(a: [f64; 2], b: [f64; 2], state: &SpinState) -> Result<f64> {
    let m = state.matrix()?;
    let value =
        (m.adjoint() * composite_operator(a) * &m * composite_operator(b).transpose()).trace();
    Ok(value.re)
}

/// Closed form of the correlator on the double singlet.
pub fn correlator_closed_form(a: [f64; 2], b: [f64; 2]) -> f64 {
    -(1.0 + 2.0 * (a[0] - b[0]).cos()) * (a[1] - b[1]).cos() / 3.0
}

/// CHSH combination with per-term breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct SpinChshReport {
    /// Signed ⟨C⟩ = E(a,b) + E(a′,b) + E(a,b′) − E(a′,b′).
    pub value: f64,
    /// |⟨C⟩|, the quantity compared against the bounds.
    pub magnitude: f64,
    pub terms: [f64; 4],
}

fn chsh_from_correlator<F: FnMut([f64; 2], [f64; 2]) -> Result<f64>>(
    angles: &AngleSet,
    mut corr: F,
) -> Result<SpinChshReport> {
    angles.validated()?;
    let terms = [
        corr(angles.alice, angles.bob)?,
        corr(angles.alice_prime, angles.bob)?,
        corr(angles.alice, angles.bob_prime)?,
        corr(angles.alice_prime, angles.bob_prime)?,
    ];
    let value = terms[0] + terms[1] + terms[2] - terms[3];
    Ok(SpinChshReport {
        value,
        magnitude: value.abs(),
        terms,
    })
}

/// CHSH by matrix contraction, any state.
pub fn chsh_spin(angles: &AngleSet, state: &SpinState) -> Result<SpinChshReport> {
    chsh_from_correlator(angles, |a, b| correlator_matrix(a, b, state))
}

/// CHSH from the closed form; double singlet only.
pub fn chsh_spin_closed_form(angles: &AngleSet) -> Result<SpinChshReport> {
    chsh_from_correlator(angles, |a, b| Ok(correlator_closed_form(a, b)))
}

/// Seeded random normalized product state.
pub fn random_product_state(rng: &mut ChaCha8Rng) -> SpinState {
    let mut draw = |_: usize| {
        (0..6)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect::<Vec<_>>()
    };
    SpinState::Product {
        alice: draw(0),
        bob: draw(1),
    }
}

/// Seeded random angle set, all angles in [0, 2π).
pub fn random_angle_set(rng: &mut ChaCha8Rng) -> AngleSet {
    let tau = 2.0 * std::f64::consts::PI;
    let mut pair = |_: usize| [rng.random_range(0.0..tau), rng.random_range(0.0..tau)];
    AngleSet {
        alice: pair(0),
        alice_prime: pair(1),
        bob: pair(2),
        bob_prime: pair(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::TSIRELSON_BOUND;
    use crate::fock::{hermiticity_defect, unitarity_defect};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn composite_operator_is_a_dichotomic_involution() {
        let a = composite_operator([0.7, -1.3]);
        assert!(hermiticity_defect(&a) < 1e-15);
        assert!(unitarity_defect(&a) < 1e-15);
        let sq = &a * &a;
        let id = CMatrix::identity(6, 6);
        assert!((sq - id).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn matrix_route_matches_closed_form_on_double_singlet() {
        let state = SpinState::DoubleSinglet;
        for (a, b) in [
            ([0.0, 0.0], [0.0, 0.0]),
            ([0.3, 1.1], [-0.4, 0.9]),
            ([2.2, -0.7], [1.0, 0.25]),
        ] {
            let got = correlator_matrix(a, b, &state).unwrap();
            let want = correlator_closed_form(a, b);
            assert_relative_eq!(got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn reference_angles_reach_the_known_magnitude() {
        let angles = AngleSet::reference();
        let closed = chsh_spin_closed_form(&angles).unwrap();
        let matrix = chsh_spin(&angles, &SpinState::DoubleSinglet).unwrap();
        let expect = reference_magnitude();
        assert_relative_eq!(closed.magnitude, expect, epsilon = 1e-14);
        assert_relative_eq!(matrix.magnitude, expect, epsilon = 1e-13);
        // The signed value is negative: each of the first three terms is
        // −(1/3)(1+√2)(√2/2).
        assert!(closed.value < 0.0);
        let term = -(1.0 + std::f64::consts::SQRT_2) * std::f64::consts::FRAC_1_SQRT_2 / 3.0;
        for k in 0..3 {
            assert_relative_eq!(closed.terms[k], term, epsilon = 1e-14);
        }
        assert_relative_eq!(closed.terms[3], -term, epsilon = 1e-14);
    }

    #[test]
    fn product_states_respect_the_classical_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let state = random_product_state(&mut rng);
            let angles = random_angle_set(&mut rng);
            let r = chsh_spin(&angles, &state).unwrap();
            assert!(r.magnitude <= 2.0 + 1e-12, "magnitude {}", r.magnitude);
        }
    }

    #[test]
    fn product_correlator_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = random_product_state(&mut rng);
        let (u, v) = match &state {
            SpinState::Product { alice, bob } => (alice.clone(), bob.clone()),
            _ => unreachable!(),
        };
        let single = |op: &CMatrix, w: &[Complex64]| {
            let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            let mut acc = Complex64::from(0.0);
            for i in 0..6 {
                for j in 0..6 {
                    acc += w[i].conj() * op[(i, j)] * w[j];
                }
            }
            (acc / norm).re
        };
        let a = [0.4, 1.7];
        let b = [-0.9, 0.3];
        let joint = correlator_matrix(a, b, &state).unwrap();
        let split = single(&composite_operator(a), &u) * single(&composite_operator(b), &v);
        assert_relative_eq!(joint, split, epsilon = 1e-13);
    }

    #[test]
    fn state_validation_rejects_bad_product_factors() {
        let zero = SpinState::Product {
            alice: vec![Complex64::from(0.0); 6],
            bob: vec![Complex64::from(1.0); 6],
        };
        assert!(zero.matrix().is_err());
        let short = SpinState::Product {
            alice: vec![Complex64::from(1.0); 5],
            bob: vec![Complex64::from(1.0); 6],
        };
        assert!(short.matrix().is_err());
        assert!(AngleSet {
            alice: [f64::NAN, 0.0],
            ..AngleSet::reference()
        }
        .validated()
        .is_err());
    }

    proptest! {
        /// The double-singlet CHSH never exceeds the quantum bound, and the
        /// two evaluation routes agree everywhere.
        #[test]
        fn chsh_obeys_quantum_bound(
            a1 in 0.0_f64..6.3, a2 in 0.0_f64..6.3,
            b1 in 0.0_f64..6.3, b2 in 0.0_f64..6.3,
            c1 in 0.0_f64..6.3, c2 in 0.0_f64..6.3,
            d1 in 0.0_f64..6.3, d2 in 0.0_f64..6.3,
        ) {
            let angles = AngleSet {
                alice: [a1, a2],
                alice_prime: [b1, b2],
                bob: [c1, c2],
                bob_prime: [d1, d2],
            };
            let closed = chsh_spin_closed_form(&angles).unwrap();
            let matrix = chsh_spin(&angles, &SpinState::DoubleSinglet).unwrap();
            prop_assert!((closed.value - matrix.value).abs() < 1e-12);
            prop_assert!(closed.magnitude <= TSIRELSON_BOUND + 1e-12);
        }
    }
}
