//! Second-order CHSH correction for field-coupled qubit pairs. For smooth
//! coupling profiles the shift is the prediction (1 - d^2) <C0>; for
//! discrete profiles the closed one-excitation sector can be diagonalized
//! exactly, and the prediction residual falls off as the fourth power of
//! the coupling.

use bellfield::jc::{
    corrected_chsh_oracle, corrected_chsh_prediction, DiscreteMode, JCParams, MomentumProfile,
};
use bellfield::modular::ModularParams;
use bellfield::quadrature::Quadrature;
use num_complex::Complex64;

fn main() -> Result<(), bellfield::Error> {
    let modular = ModularParams::benchmark();
    let quad = Quadrature::default();

    let gaussian = MomentumProfile::Gaussian {
        amplitude: 1.0,
        center: 0.0,
        width: 1.0,
    };
    let params = JCParams::new(0.1, 0.0, 1.0, 1.0)?;
    let pred = corrected_chsh_prediction(&modular, &params, &gaussian, &gaussian, &quad)?;
    println!("gaussian profile, coupling 0.1:");
    println!("  <C0>             = {:.16}", pred.c0);
    println!("  delta^2          = {:.9e}", pred.delta_sq);
    println!("  corrected value  = {:.16}", pred.value);
    println!("  singlet weight   = {:.12}", pred.amplitude_singlet);
    println!(
        "  triplet admixture = {:.6e} {:+.1e} i",
        pred.amplitude_triplet.re, pred.amplitude_triplet.im
    );
    println!();

    // One explicit mode per party lets the dressed ground state be computed
    // without any perturbative input.
    let mode = |value: f64| MomentumProfile::Discrete {
        modes: vec![DiscreteMode {
            weight: 1.0,
            momentum: 0.0,
            value: Complex64::from(value),
        }],
    };
    println!("discrete profile, exact sector diagonalization:");
    println!("coupling   measured              predicted             residual     E0");
    let mut last: Option<f64> = None;
    for omega in [0.01, 0.005, 0.0025] {
        let p = JCParams::new(omega, 0.0, 1.0, 1.0)?;
        let run = corrected_chsh_oracle(&modular, &p, &mode(1.0), &mode(1.0))?;
        let ratio = last
            .map(|r| format!("  x{:.1}", r / run.residual))
            .unwrap_or_default();
        println!(
            "{omega:<8}   {:.16}   {:.16}   {:.3e}{ratio}   {:.9}",
            run.measured, run.predicted, run.residual, run.ground_energy
        );
        last = Some(run.residual);
    }
    println!();
    println!("halving the coupling divides the residual by ~16: a fourth-order tail.");
    Ok(())
}
