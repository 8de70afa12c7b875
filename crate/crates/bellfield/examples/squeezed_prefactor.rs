//! Reduction factor of a two-mode squeezed auxiliary pair. The truncated
//! sum converges to 2δ/(1+δ²) once enough levels are kept, and the factor
//! multiplies the vacuum CHSH value exactly.

use bellfield::bell::{
    squeezed_factor, squeezed_factor_limit, suggested_m_max, BellAssembly, BipartiteState,
};
use bellfield::modular::ModularParams;

fn main() -> Result<(), bellfield::Error> {
    println!("delta   m_max   truncated factor      limit 2d/(1+d^2)      gap");
    for delta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let m_max = suggested_m_max(delta, 1e-12)?;
        let truncated = squeezed_factor(delta, m_max)?;
        let limit = squeezed_factor_limit(delta)?;
        println!(
            "{delta:<5}   {m_max:>5}   {truncated:.16}   {limit:.16}   {:.2e}",
            limit - truncated
        );
    }
    println!();

    // The same factor shows up operationally: an assembly carrying the
    // squeezed pair instead of the Bell pair is scaled by exactly r.
    let p = ModularParams::benchmark();
    let n_max = 10;
    let bell = BellAssembly::vacuum_chsh(&p, n_max, &BipartiteState::bell_pair())?.expectation();
    println!("Bell-pair expectation at n_max = {n_max}: {bell:.12}");
    println!();
    println!("delta   squeezed expectation   r * bell        difference");
    for delta in [0.2, 0.5, 0.8] {
        let m_max = suggested_m_max(delta, 1e-12)?;
        let state = BipartiteState::Squeezed { delta, m_max };
        let value = BellAssembly::vacuum_chsh(&p, n_max, &state)?.expectation();
        let scaled = state.reduction()? * bell;
        println!(
            "{delta:<5}   {value:+.12}        {scaled:+.12}   {:.2e}",
            (value - scaled).abs()
        );
    }
    Ok(())
}
