//! Reads trial records, estimates the sixteen cell probabilities and writes
//! them as a probability file.

use std::path::Path;

use medbounds::observed::{estimate_distribution, total_effect};
use medbounds::RecordTable;

fn main() -> medbounds::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_trial.csv");
    let table = RecordTable::from_csv_path(&path)?;
    let [n0, n1] = table.arm_sizes();
    println!("{} rows: {n0} control, {n1} treated", table.len());

    let dist = estimate_distribution(&table)?;
    println!("x m1 m2   p(y=0)   p(y=1)");
    for x in 0..2 {
        for m1 in 0..2 {
            for m2 in 0..2 {
                println!("{x} {m1}  {m2}   {:.4}   {:.4}", dist.p(0, m1, m2, x), dist.p(1, m1, m2, x));
            }
        }
    }
    println!("outcome rates {:.4} / {:.4}, TE {:.4}", dist.outcome_rate(0), dist.outcome_rate(1), total_effect(&dist));

    println!("\nprobability file:");
    dist.write_json(std::io::stdout())?;
    println!();
    Ok(())
}
