//! Bounds at every deterministic counterfactual law.

use medbounds::simulation::{vertex_sweep, vertex_sweep_cross_check, SweepMethod};
use medbounds::EstimandId;

fn main() -> medbounds::Result<()> {
    let cross = std::env::args().any(|a| a == "--cross");
    for e in EstimandId::decomposition_terms() {
        let table = vertex_sweep(e, SweepMethod::Auto)?;
        println!("{e} ({} vertices)", table.total());
        for c in table.cells() {
            println!("  [{:+}, {:+}]  {:>5}  {:.4}", c.lower, c.upper, c.count, c.proportion);
        }
        if cross {
            let (_, _, mismatches) = vertex_sweep_cross_check(e)?;
            println!("  closed form vs LP mismatches: {mismatches}");
        }
    }
    Ok(())
}
