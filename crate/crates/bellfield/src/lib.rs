//! Numerical laboratory for Bell-CHSH correlations of a free scalar field
//! probed by localized two-level systems.
//!
//! The vacuum of a relativistic field is entangled across causally
//! complementary regions, and dichotomic Weyl-type observables built from
//! suitably paired smearing functions expose that entanglement as a CHSH
//! violation. This crate evaluates the relevant correlators three
//! independent ways and keeps the routes honest against each other:
//!
//! * [`correlator`] reduces everything to a 4 × 4 Gram matrix of smearing
//!   functions ([`modular`]) and Gaussian vacuum expectations, with a fully
//!   closed form in the three family parameters (η, η′, λ).
//! * [`fock`] rebuilds the same numbers by brute force in a truncated
//!   two-mode occupation basis, exponentiating smeared field operators.
//! * [`bell`] assembles genuinely commuting tensor-product observables in a
//!   factored representation whose weights reproduce the vacuum state, so
//!   operator-level properties (dichotomy, commutation, the quantum bound)
//!   can be checked exactly, including squeezed and finitely entangled
//!   states with their closed-form reduction factors.
//!
//! Two further models complete the picture: [`jc`] couples a pair of qubits
//! to the field with an excitation-conserving interaction and compares
//! second-order perturbation theory against exact diagonalization in the
//! closed one-excitation sector, and [`spin`] carries the CHSH analysis to a
//! composite spin-1 ⊗ spin-1/2 pair with its own closed form.
//!
//! [`optimize`] maximizes the vacuum violation over the parameter box with
//! a deterministic, budget-monotone search, and [`cli`] exposes every
//! capability as a subcommand with byte-stable JSON/CSV reports. The
//! `examples/` directory holds one runnable walkthrough per capability.

pub mod bell;
pub mod cli;
pub mod correlator;
pub mod error;
pub mod fock;
pub mod jc;
pub mod modular;
pub mod optimize;
pub mod quadrature;
pub mod spin;

pub use correlator::{chsh_closed_form, chsh_correlator, TSIRELSON_BOUND};
pub use error::{Error, Result};
pub use modular::ModularParams;
