//! How often bounds exclude zero when the counterfactual law is drawn from
//! a symmetric Dirichlet, for a few concentrations.
//!
//!     cargo run --release --example dirichlet_study -- 500

use medbounds::simulation::{dirichlet_study, SimulationConfig};
use medbounds::EstimandId;

fn main() -> medbounds::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let config = SimulationConfig {
        alpha_levels: vec![1e-6, 1e-3, 1.0],
        n_per_level: n,
        seed: 7,
        estimands: EstimandId::decomposition_terms().to_vec(),
    };
    let out = dirichlet_study(&config)?;

    println!("alpha      estimand      width<1  excl 0  95% CI");
    for s in &out.summary {
        println!(
            "{:<10} {:<12}  {:.3}    {:.3}   ({:.3}, {:.3})",
            s.alpha, s.estimand, s.prop_width_lt_1, s.prop_excludes_zero, s.ci_low, s.ci_high
        );
    }
    let widest = out
        .rows
        .iter()
        .max_by(|a, b| a.width.total_cmp(&b.width))
        .expect("nonempty study");
    println!("widest interval: {} at alpha {} ({:.4})", widest.estimand, widest.alpha, widest.width);
    println!("{} redraws", out.redraws);
    Ok(())
}
