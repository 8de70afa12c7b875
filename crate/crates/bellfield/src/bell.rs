//! Tensor-factored Bell assembly.
//!
//! The truncated two-mode representation in [`crate::fock`] is a good oracle
//! for vacuum expectations, but Alice's and Bob's Weyl operators act on the
//! same pair of modes there, so truncation breaks their commutativity near
//! the edge. This module instead represents the experiment on an explicit
//! tensor product
//!
//! ```text
//! (Fock_a ⊗ aux_A) ⊗ (Fock_b ⊗ aux_B)
//! ```
//!
//! with Alice's field acting only on mode a and Bob's only on mode b:
//!
//! ```text
//! Φ_A(z) = √(1−λ²) (z̄ a + z a†),    Φ_B(w) = √(1−λ²) (w̄ b + w b†)
//! Ω      ∝ Σ_n λⁿ |n, n⟩
//! ```
//!
//! Alice's test functions f, f′ correspond to mode amplitudes z = η, iη′ and
//! Bob's jf, jf′ to w = η, −iη′; these reproduce every Weyl pairing of the
//! closed form in the n_max → ∞ limit while keeping [A, B] = 0 exactly at
//! every truncation. Each party's dichotomic observable pairs a Weyl unitary
//! with a ladder flip on the auxiliary system,
//!
//! ```text
//! A = W ⊗ Σ_k |2k+1⟩⟨2k|  +  W† ⊗ Σ_k |2k⟩⟨2k+1|
//! ```
//!
//! which squares to the identity for any unitary W and any even auxiliary
//! dimension. The auxiliary pair state Σ_j c_j |j⟩|j⟩ multiplies the field
//! correlator by the reduction factor r = Σ_k 2·Re(c̄_{2k+1} c_{2k}); the
//! two-mode squeezed family of coefficients c_j ∝ δ^j makes r approach
//! 2δ/(1+δ²) from below.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilator, unitary_exp_i, CMatrix};
use crate::modular::{ModularParams, LAMBDA_MAX};

/// Normalized weights of the entangled field state Σ ω_n |n, n⟩ up to `n_max`.
pub fn thermofield_weights(lambda: f64, n_max: usize) -> Result<Vec<f64>> {
    if !lambda.is_finite() || lambda <= 0.0 || lambda > LAMBDA_MAX {
        return Err(Error::InvalidParameter(format!(
            "lambda must satisfy 0 < lambda <= {LAMBDA_MAX}, got {lambda}"
        )));
    }
    let mut w: Vec<f64> = (0..=n_max).map(|n| lambda.powi(n as i32)).collect();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut w {
        *x /= norm;
    }
    Ok(w)
}

/// Single-party smeared field Φ(z) = √(1−λ²)(z̄ a + z a†) on levels 0..=n_max.
pub fn party_field(z: Complex64, lambda: f64, n_max: usize) -> CMatrix {
    let scale = (1.0 - lambda * lambda).sqrt();
    let c = z * scale;
    let a = annihilator(n_max + 1);
    let lower = &a * c.conj();
    let upper = lower.adjoint();
    lower + upper
}

/// Single-party Weyl operator e^{iΦ(z)}.
pub fn party_weyl(z: Complex64, lambda: f64, n_max: usize) -> CMatrix {
    unitary_exp_i(&party_field(z, lambda, n_max))
}

/// Mode amplitudes (z_f, z_f′) seen by Alice's field.
pub fn alice_amplitudes(p: &ModularParams) -> [Complex64; 2] {
    [Complex64::from(p.eta), Complex64::i() * p.eta_prime]
}

/// Mode amplitudes (w_jf, w_jf′) seen by Bob's field.
pub fn bob_amplitudes(p: &ModularParams) -> [Complex64; 2] {
    [Complex64::from(p.eta), -Complex64::i() * p.eta_prime]
}

/// ⟨Ω| X_a ⊗ Y_b |Ω⟩ for the field state with the given weights, contracted
/// without forming the tensor product.
pub fn thermofield_pair_expectation(x: &CMatrix, y: &CMatrix, weights: &[f64]) -> Complex64 {
    let mut acc = Complex64::from(0.0);
    for n in 0..weights.len() {
        for m in 0..weights.len() {
            acc += x[(n, m)] * y[(n, m)] * (weights[n] * weights[m]);
        }
    }
    acc
}

/// Involution W ⊗ up + W† ⊗ up† on (party Fock) ⊗ (auxiliary system).
/// Squares to the identity exactly when `weyl` is unitary; requires an even
/// auxiliary dimension so every basis state is flipped.
pub fn dichotomic_observable(weyl: &CMatrix, aux_dim: usize) -> Result<CMatrix> {
    if aux_dim == 0 || !aux_dim.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "auxiliary dimension must be even and positive, got {aux_dim}"
        )));
    }
    let mut up = DMatrix::<Complex64>::zeros(aux_dim, aux_dim);
    for k in 0..aux_dim / 2 {
        up[(2 * k + 1, 2 * k)] = Complex64::from(1.0);
    }
    let down = up.transpose();
    Ok(weyl.kronecker(&up) + weyl.adjoint().kronecker(&down))
}

/// Pair-state reduction factor r = Σ_k 2·Re(c̄_{2k+1} c_{2k}).
///
/// The coefficients are used exactly as given (no normalization); zero
/// entries are allowed even though a cyclic auxiliary state needs them all
/// nonzero, since the factor itself stays well defined.
pub fn qm_reduction(coefficients: &[Complex64]) -> Result<f64> {
    if coefficients.is_empty() {
        return Err(Error::InvalidState("empty coefficient vector".into()));
    }
    if coefficients
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::InvalidState("non-finite coefficient".into()));
    }
    Ok(coefficients
        .chunks_exact(2)
        .map(|pair| 2.0 * (pair[1].conj() * pair[0]).re)
        .sum())
}

fn check_delta(delta: f64) -> Result<f64> {
    if !delta.is_finite() || !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta must satisfy 0 <= delta < 1, got {delta}"
        )));
    }
    Ok(delta)
}

/// Truncated squeezed-pair reduction factor Σ_{2n+1 ≤ m_max} 2(1−δ²) δ^{4n+1}.
pub fn squeezed_factor(delta: f64, m_max: usize) -> Result<f64> {
    let delta = check_delta(delta)?;
    let mut acc = 0.0;
    let mut n = 0;
    while 2 * n < m_max {
        acc += 2.0 * (1.0 - delta * delta) * delta.powi((4 * n + 1) as i32);
        n += 1;
    }
    Ok(acc)
}

/// Limit of [`squeezed_factor`] as m_max → ∞: 2δ / (1 + δ²).
pub fn squeezed_factor_limit(delta: f64) -> Result<f64> {
    let delta = check_delta(delta)?;
    Ok(2.0 * delta / (1.0 + delta * delta))
}

/// Smallest m_max with δ^{2·m_max} ≤ tol, so the dropped tail of the
/// squeezed reduction is below tol.
pub fn suggested_m_max(delta: f64, tol: f64) -> Result<usize> {
    let delta = check_delta(delta)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must lie in (0, 1), got {tol}"
        )));
    }
    let mut m = 1usize;
    while delta.powi(2 * m as i32) > tol {
        m += 1;
        if m > 2_000_000 {
            return Err(Error::Numerical(format!(
                "squeezed truncation for delta = {delta}, tol = {tol} needs over 2e6 levels"
            )));
        }
    }
    Ok(m)
}

/// Auxiliary pair state shared by the two parties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BipartiteState {
    /// Explicit coefficients of Σ_j c_j |j⟩|j⟩; normalized internally.
    Finite { coefficients: Vec<Complex64> },
    /// Two-mode squeezed coefficients c_j ∝ δ^j kept up to j = m_max.
    Squeezed { delta: f64, m_max: usize },
}

impl BipartiteState {
    /// Maximally entangled pair of the first two levels; reduction factor 1.
    pub fn bell_pair() -> Self {
        let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        BipartiteState::Finite {
            coefficients: vec![h, h],
        }
    }

    /// Normalized coefficient vector, padded to even length so the party
    /// observables have a complete set of flip pairs.
    pub fn coefficients(&self) -> Result<Vec<Complex64>> {
        let mut c = match self {
            BipartiteState::Finite { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidState("empty coefficient vector".into()));
                }
                if coefficients
                    .iter()
                    .any(|z| !z.re.is_finite() || !z.im.is_finite())
                {
                    return Err(Error::InvalidState("non-finite coefficient".into()));
                }
                coefficients.clone()
            }
            BipartiteState::Squeezed { delta, m_max } => {
                let delta = check_delta(*delta)?;
                (0..=*m_max)
                    .map(|j| Complex64::from(delta.powi(j as i32)))
                    .collect()
            }
        };
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero-norm coefficient vector".into()));
        }
        for z in &mut c {
            *z /= norm;
        }
        if c.len() % 2 != 0 {
            c.push(Complex64::from(0.0));
        }
        Ok(c)
    }

    /// Reduction factor of the normalized state.
    pub fn reduction(&self) -> Result<f64> {
        qm_reduction(&self.coefficients()?)
    }
}

/// The four dichotomic observables and the joint state of one Bell run.
///
/// The state is stored as a dim_A × dim_B matrix M with Ψ = Σ M[i,j] |i⟩|j⟩,
/// so expectations of X ⊗ Y contract as tr(M† X M Yᵀ) without ever forming
/// the full tensor product.
#[derive(Debug, Clone)]
pub struct BellAssembly {
    alice: CMatrix,
    alice_prime: CMatrix,
    bob: CMatrix,
    bob_prime: CMatrix,
    state: CMatrix,
}

impl BellAssembly {
    /// Assembles arbitrary observables and a state matrix, validating shapes
    /// and normalization.
    pub fn from_observables(
        alice: CMatrix,
        alice_prime: CMatrix,
        bob: CMatrix,
        bob_prime: CMatrix,
        state: CMatrix,
    ) -> Result<Self> {
        let square = |m: &CMatrix, who: &str| -> Result<usize> {
            if m.nrows() != m.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "{who} observable is {}x{}, expected square",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(m.nrows())
        };
        let da = square(&alice, "alice")?;
        if square(&alice_prime, "alice_prime")? != da {
            return Err(Error::DimensionMismatch(
                "alice observables have different dimensions".into(),
            ));
        }
        let db = square(&bob, "bob")?;
        if square(&bob_prime, "bob_prime")? != db {
            return Err(Error::DimensionMismatch(
                "bob observables have different dimensions".into(),
            ));
        }
        if state.nrows() != da || state.ncols() != db {
            return Err(Error::DimensionMismatch(format!(
                "state matrix is {}x{}, observables want {da}x{db}",
                state.nrows(),
                state.ncols()
            )));
        }
        let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self {
            alice,
            alice_prime,
            bob,
            bob_prime,
            state,
        })
    }

    /// Vacuum Bell run: field observables from the modular parameters, pair
    /// observables from the auxiliary state, joint state Ω ⊗ pair.
    pub fn vacuum_chsh(
        params: &ModularParams,
        n_max: usize,
        pair_state: &BipartiteState,
    ) -> Result<Self> {
        let p = params.validated()?;
        let coeffs = pair_state.coefficients()?;
        let aux_dim = coeffs.len();
        let weights = thermofield_weights(p.lambda, n_max)?;

        let [z_f, z_fp] = alice_amplitudes(&p);
        let [w_jf, w_jfp] = bob_amplitudes(&p);
        let alice = dichotomic_observable(&party_weyl(z_f, p.lambda, n_max), aux_dim)?;
        let alice_prime = dichotomic_observable(&party_weyl(z_fp, p.lambda, n_max), aux_dim)?;
        let bob = dichotomic_observable(&party_weyl(w_jf, p.lambda, n_max), aux_dim)?;
        let bob_prime = dichotomic_observable(&party_weyl(w_jfp, p.lambda, n_max), aux_dim)?;

        // M = diag(ω) ⊗ diag(c): the field and pair factors are both
        // diagonal in their correlated bases.
        let field = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            weights.len(),
            weights.iter().map(|&w| Complex64::from(w)),
        ));
        let pair = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(coeffs));
        let state = field.kronecker(&pair);

        Self::from_observables(alice, alice_prime, bob, bob_prime, state)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.alice.nrows(), self.bob.nrows())
    }

    pub fn observables(&self) -> [(&'static str, &CMatrix); 4] {
        [
            ("alice", &self.alice),
            ("alice_prime", &self.alice_prime),
            ("bob", &self.bob),
            ("bob_prime", &self.bob_prime),
        ]
    }

    fn pair_expectation(&self, x: &CMatrix, y: &CMatrix) -> Complex64 {
        (self.state.adjoint() * x * &self.state * y.transpose()).trace()
    }

    /// ⟨Ψ| A(B + B′) + A′(B − B′) |Ψ⟩, term by term.
    pub fn expectation(&self) -> f64 {
        let ab = self.pair_expectation(&self.alice, &self.bob);
        let abp = self.pair_expectation(&self.alice, &self.bob_prime);
        let apb = self.pair_expectation(&self.alice_prime, &self.bob);
        let apbp = self.pair_expectation(&self.alice_prime, &self.bob_prime);
        (ab + abp + apb - apbp).re
    }

    /// Full CHSH operator (A + A′) ⊗ B + (A − A′) ⊗ B′. Dimension is the
    /// product of the party dimensions; build it only when it fits.
    pub fn chsh_operator(&self) -> CMatrix {
        let sum = &self.alice + &self.alice_prime;
        let diff = &self.alice - &self.alice_prime;
        sum.kronecker(&self.bob) + diff.kronecker(&self.bob_prime)
    }

    /// ⟨Ψ| C |Ψ⟩ through the assembled operator; agrees with
    /// [`Self::expectation`] up to rounding and exists as a cross-check.
    pub fn expectation_via_operator(&self) -> f64 {
        let c = self.chsh_operator();
        let (da, db) = self.dims();
        let mut psi = nalgebra::DVector::<Complex64>::zeros(da * db);
        for i in 0..da {
            for j in 0..db {
                psi[i * db + j] = self.state[(i, j)];
            }
        }
        (psi.adjoint() * c * psi)[(0, 0)].re
    }

    /// Largest |eigenvalue| of the CHSH operator. Costs a dense
    /// eigendecomposition of the full tensor product.
    pub fn operator_norm(&self) -> f64 {
        crate::fock::hermitian_operator_norm(&self.chsh_operator())
    }

    /// Worst Hermiticity defect among the four observables.
    pub fn hermiticity_defect(&self) -> f64 {
        self.observables()
            .iter()
            .map(|(_, m)| crate::fock::hermiticity_defect(m))
            .fold(0.0, f64::max)
    }

    /// Worst entry of O² − 1 among the four observables.
    pub fn dichotomy_defect(&self) -> f64 {
        self.observables()
            .iter()
            .map(|(_, m)| {
                let sq = *m * *m;
                let id = CMatrix::identity(m.nrows(), m.ncols());
                (sq - id).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
            })
            .fold(0.0, f64::max)
    }

    /// Worst entry of [X ⊗ 1, 1 ⊗ Y] over Alice's and Bob's observables.
    /// Zero by construction; kept as an executable statement of that fact.
    pub fn commutator_defect(&self) -> f64 {
        let (da, db) = self.dims();
        let ia = CMatrix::identity(da, da);
        let ib = CMatrix::identity(db, db);
        let mut worst: f64 = 0.0;
        for (_, x) in [&self.alice, &self.alice_prime].map(|m| ("", m)) {
            for y in [&self.bob, &self.bob_prime] {
                let lhs = x.kronecker(&ib) * ia.kronecker(y);
                let rhs = ia.kronecker(y) * x.kronecker(&ib);
                worst = (lhs - rhs).iter().fold(worst, |acc, z| acc.max(z.norm()));
            }
        }
        worst
    }
}

/// Randomized assembly for bound checks: four unitaries e^{iH} from uniform
/// Hermitian draws, even auxiliary dimensions, and a random normalized state.
/// The construction guarantees dichotomy and party commutativity, so every
/// draw must respect the quantum bound.
pub fn random_assembly(seed: u64) -> BellAssembly {
    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] =
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        m
    }
    fn random_observable(rng: &mut ChaCha8Rng, dim: usize, aux: usize) -> CMatrix {
        let g = random_matrix(rng, dim, dim);
        let h = (&g + g.adjoint()) * Complex64::from(0.5);
        dichotomic_observable(&unitary_exp_i(&h), aux).expect("even aux dimension")
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Kept small enough that an exact operator-norm eigendecomposition of
    // the full CHSH operator (dim ≤ 256) stays cheap in bulk scans.
    let fock_a = rng.random_range(2..=4);
    let fock_b = rng.random_range(2..=4);
    let aux_a = 2 * rng.random_range(1..=2);
    let aux_b = 2 * rng.random_range(1..=2);
    let alice = random_observable(&mut rng, fock_a, aux_a);
    let alice_prime = random_observable(&mut rng, fock_a, aux_a);
    let bob = random_observable(&mut rng, fock_b, aux_b);
    let bob_prime = random_observable(&mut rng, fock_b, aux_b);
    let mut state = random_matrix(&mut rng, fock_a * aux_a, fock_b * aux_b);
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    state /= Complex64::from(norm);
    BellAssembly::from_observables(alice, alice_prime, bob, bob_prime, state)
        .expect("dimensions consistent by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlator::{chsh_correlator, TSIRELSON_BOUND};
    use crate::modular::{GramMatrix, TestFunction};
    use approx::assert_relative_eq;

    #[test]
    fn thermofield_weights_are_normalized_geometric() {
        let w = thermofield_weights(0.5, 10).unwrap();
        let norm: f64 = w.iter().map(|x| x * x).sum();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-14);
        for k in 1..w.len() {
            assert_relative_eq!(w[k] / w[k - 1], 0.5, epsilon = 1e-14);
        }
        assert!(thermofield_weights(0.0, 4).is_err());
        assert!(thermofield_weights(1.0, 4).is_err());
    }

    #[test]
    fn dichotomic_observable_squares_to_identity() {
        let w = party_weyl(Complex64::new(0.7, 0.2), 0.4, 6);
        let a = dichotomic_observable(&w, 4).unwrap();
        assert!(crate::fock::hermiticity_defect(&a) < 1e-15);
        let sq = &a * &a;
        let id = CMatrix::identity(a.nrows(), a.ncols());
        let defect = (sq - id).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        assert!(defect < 1e-12, "dichotomy defect {defect}");
        assert!(dichotomic_observable(&w, 3).is_err());
        assert!(dichotomic_observable(&w, 0).is_err());
    }

    #[test]
    fn factored_pair_expectation_matches_gram_route() {
        let p = ModularParams::benchmark();
        let gram = GramMatrix::build(&p).unwrap();
        let n_max = 16;
        let weights = thermofield_weights(p.lambda, n_max).unwrap();
        let [z_f, _] = alice_amplitudes(&p);
        let [w_jf, w_jfp] = bob_amplitudes(&p);
        let wa = party_weyl(z_f, p.lambda, n_max);
        let expected = crate::correlator::weyl_pair_expectation(
            &gram,
            TestFunction::F,
            crate::correlator::Sign::Plus,
            TestFunction::Jf,
        );
        let got = thermofield_pair_expectation(&wa, &party_weyl(w_jf, p.lambda, n_max), &weights);
        assert!(
            (got - expected).norm() < 1e-9,
            "pair vev off by {}",
            (got - expected).norm()
        );
        let expected2 = crate::correlator::weyl_pair_expectation(
            &gram,
            TestFunction::F,
            crate::correlator::Sign::Plus,
            TestFunction::JfPrime,
        );
        let got2 = thermofield_pair_expectation(&wa, &party_weyl(w_jfp, p.lambda, n_max), &weights);
        assert!((got2 - expected2).norm() < 1e-9);
    }

    #[test]
    fn assembly_converges_to_closed_form_at_benchmark() {
        let p = ModularParams::benchmark();
        let reference = chsh_correlator(&p).unwrap().value;
        let pair = BipartiteState::bell_pair();
        let e8 = BellAssembly::vacuum_chsh(&p, 8, &pair)
            .unwrap()
            .expectation();
        let e12 = BellAssembly::vacuum_chsh(&p, 12, &pair)
            .unwrap()
            .expectation();
        assert!(
            (e8 - reference).abs() < 2e-5,
            "n_max 8 error {}",
            (e8 - reference).abs()
        );
        assert!(
            (e12 - reference).abs() < 5e-8,
            "n_max 12 error {}",
            (e12 - reference).abs()
        );
        assert!((e12 - reference).abs() < (e8 - reference).abs());
    }

    #[test]
    fn contraction_and_operator_routes_agree() {
        let p = ModularParams::new(1.0, 1.0, 0.5).unwrap();
        let asm = BellAssembly::vacuum_chsh(&p, 6, &BipartiteState::bell_pair()).unwrap();
        assert_relative_eq!(
            asm.expectation(),
            asm.expectation_via_operator(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn assembly_invariants_hold() {
        let p = ModularParams::benchmark();
        let asm = BellAssembly::vacuum_chsh(&p, 8, &BipartiteState::bell_pair()).unwrap();
        assert!(asm.hermiticity_defect() < 1e-14);
        assert!(asm.dichotomy_defect() < 1e-12);
        assert_eq!(asm.commutator_defect(), 0.0);
        assert!(asm.expectation().abs() <= TSIRELSON_BOUND + 1e-9);
    }

    #[test]
    fn operator_norm_respects_quantum_bound() {
        let p = ModularParams::new(0.8, 0.6, 0.45).unwrap();
        let asm = BellAssembly::vacuum_chsh(&p, 4, &BipartiteState::bell_pair()).unwrap();
        let norm = asm.operator_norm();
        assert!(norm <= TSIRELSON_BOUND + 1e-9, "norm {norm}");
        assert!(norm > 2.0);
    }

    #[test]
    fn reduction_scales_the_field_correlator_exactly() {
        let p = ModularParams::benchmark();
        let bell = BellAssembly::vacuum_chsh(&p, 8, &BipartiteState::bell_pair())
            .unwrap()
            .expectation();
        let coeffs = vec![
            Complex64::new(0.6, 0.1),
            Complex64::new(0.5, -0.3),
            Complex64::new(0.2, 0.0),
            Complex64::new(0.1, 0.4),
        ];
        let state = BipartiteState::Finite {
            coefficients: coeffs,
        };
        let r = state.reduction().unwrap();
        let got = BellAssembly::vacuum_chsh(&p, 8, &state)
            .unwrap()
            .expectation();
        // Same field factor on both sides, so the ratio is exact.
        assert_relative_eq!(got, r * bell, epsilon = 1e-12);
    }

    #[test]
    fn qm_reduction_reference_points() {
        let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        assert_relative_eq!(qm_reduction(&[h, h]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(qm_reduction(&[h, -h]).unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(
            qm_reduction(&[Complex64::from(1.0), Complex64::from(0.0)]).unwrap(),
            0.0
        );
        assert!(qm_reduction(&[]).is_err());
    }

    #[test]
    fn squeezed_factor_approaches_limit_at_suggested_truncation() {
        for &delta in &[0.1, 0.5, 0.9] {
            let m_max = suggested_m_max(delta, 1e-12).unwrap();
            let truncated = squeezed_factor(delta, m_max).unwrap();
            let limit = squeezed_factor_limit(delta).unwrap();
            assert!(
                (truncated - limit).abs() < 1e-8,
                "delta {delta}: |{truncated} - {limit}|"
            );
            assert!(truncated <= limit);
        }
        assert_eq!(suggested_m_max(0.1, 1e-12).unwrap(), 7);
        assert_eq!(suggested_m_max(0.5, 1e-12).unwrap(), 20);
        assert_eq!(suggested_m_max(0.9, 1e-12).unwrap(), 132);
    }

    #[test]
    fn squeezed_state_reduction_matches_factor() {
        let state = BipartiteState::Squeezed {
            delta: 0.4,
            m_max: 11,
        };
        let r = state.reduction().unwrap();
        // The state is renormalized after truncation, the plain factor is
        // not; they differ by the dropped tail weight only.
        let factor = squeezed_factor(0.4, 11).unwrap();
        assert!((r - factor).abs() < 1e-6);
        assert!((r - squeezed_factor_limit(0.4).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn squeezed_assembly_reduces_the_bell_value() {
        let p = ModularParams::benchmark();
        let state = BipartiteState::Squeezed {
            delta: 0.4,
            m_max: 5,
        };
        let asm = BellAssembly::vacuum_chsh(&p, 8, &state).unwrap();
        let bell = BellAssembly::vacuum_chsh(&p, 8, &BipartiteState::bell_pair())
            .unwrap()
            .expectation();
        let r = state.reduction().unwrap();
        assert_relative_eq!(asm.expectation(), r * bell, epsilon = 1e-12);
    }

    #[test]
    fn random_assemblies_are_reproducible_and_bounded() {
        for seed in 0..5u64 {
            let a = random_assembly(seed);
            let b = random_assembly(seed);
            assert_eq!(a.expectation(), b.expectation());
            assert!(a.dichotomy_defect() < 1e-12);
            assert_eq!(a.commutator_defect(), 0.0);
            let norm = a.operator_norm();
            assert!(norm <= TSIRELSON_BOUND + 1e-9, "seed {seed}: norm {norm}");
        }
        assert_ne!(
            random_assembly(1).expectation(),
            random_assembly(2).expectation()
        );
    }

    #[test]
    fn from_observables_validates_shapes_and_norm() {
        let id2 = CMatrix::identity(2, 2);
        let id3 = CMatrix::identity(3, 3);
        let mut state = CMatrix::zeros(2, 3);
        state[(0, 0)] = Complex64::from(1.0);
        assert!(BellAssembly::from_observables(
            id2.clone(),
            id3.clone(),
            id3.clone(),
            id3.clone(),
            state.clone()
        )
        .is_err());
        assert!(BellAssembly::from_observables(
            id2.clone(),
            id2.clone(),
            id3.clone(),
            id3.clone(),
            CMatrix::zeros(2, 3)
        )
        .is_err());
        assert!(BellAssembly::from_observables(id2.clone(), id2, id3.clone(), id3, state).is_ok());
    }
}
