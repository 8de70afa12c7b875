//! Rectangular sweep of the vacuum CHSH value. Every evaluated row passes
//! the quantum-bound guardrail, so a sweep doubles as a bulk consistency
//! scan over the parameter box.

use bellfield::optimize::{grid_sweep, Bounds3};

fn main() -> Result<(), bellfield::Error> {
    let bounds = Bounds3::default();
    let counts = [9, 9, 9];
    let report = grid_sweep(&bounds, counts)?;

    let violating = report.rows.iter().filter(|r| r.violation > 0.0).count();
    println!(
        "{} rows over eta in {:?}, eta' in {:?}, lambda in {:?}",
        report.rows.len(),
        bounds.eta,
        bounds.eta_prime,
        bounds.lambda
    );
    println!("rows above the classical bound: {violating}");
    println!();
    println!("best row:");
    println!(
        "  eta = {:.4}, eta' = {:.4}, lambda = {:.4}  ->  <C0> = {:.12} (+{:.6})",
        report.best.eta,
        report.best.eta_prime,
        report.best.lambda,
        report.best.c0,
        report.best.violation
    );
    println!();

    println!("top violating rows:");
    let mut rows = report.rows.clone();
    rows.sort_by(|a, b| b.c0.partial_cmp(&a.c0).expect("finite values"));
    println!("eta      eta'     lambda   c0");
    for row in rows.iter().take(8) {
        println!(
            "{:<8.4} {:<8.4} {:<8.4} {:.12}",
            row.eta, row.eta_prime, row.lambda, row.c0
        );
    }
    Ok(())
}
