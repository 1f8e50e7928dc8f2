//! Percentile bootstrap intervals for the bound endpoints.

use std::path::Path;

use medbounds::inference::{bootstrap_bounds, BootstrapConfig};
use medbounds::report::BootstrapReport;
use medbounds::{EstimandId, RecordTable};

fn main() -> medbounds::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_trial.csv");
    let table = RecordTable::from_csv_path(path)?;
    let config = BootstrapConfig {
        replicates: 1000,
        ..BootstrapConfig::new(11)
    };
    for e in EstimandId::decomposition_terms() {
        let r = bootstrap_bounds(&table, e, &config)?;
        println!("{}\n", BootstrapReport::from(&r).to_text());
    }
    Ok(())
}
