//! The linear-programming oracle: bounds for estimands without a closed form,
//! an exact rational solve, and a look at the optimal basis.

use std::path::Path;

use medbounds::lp::{sharp_bounds_lp, sharp_bounds_lp_exact, ExactObserved, LinearProgram, LpOptions, Sense};
use medbounds::observed::estimate_distribution;
use medbounds::{EstimandId, RecordTable};

fn main() -> medbounds::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_trial.csv");
    let table = RecordTable::from_csv_path(path)?;
    let dist = estimate_distribution(&table)?;

    println!("all 43 estimands by LP:");
    for e in EstimandId::all() {
        let b = sharp_bounds_lp(&dist, e)?;
        println!("  {e:<12} [{:+.4}, {:+.4}]", b.lower, b.upper);
    }

    // Counts give an exact rational law, so the LP optimum is exact too.
    let exact = ExactObserved::from_counts(&table.counts())?;
    let iv = sharp_bounds_lp_exact(&exact, EstimandId::NIE1_110)?;
    println!("\nNIE1-110 exactly: [{}, {}]", iv.lower, iv.upper);

    let lp = LinearProgram::new(&dist, EstimandId::NIE1_110);
    let sol = lp.solve(Sense::Maximize, &LpOptions::default())?;
    println!("upper optimum after {} pivots, basis:", sol.pivots);
    for (t, v) in sol.basis.iter().zip(&sol.basic_values) {
        if *v > 0.0 {
            println!("  type {t:>5}  mass {v:.4}");
        }
    }
    println!("\n{}", serde_json::to_string(&sol)?);
    Ok(())
}
