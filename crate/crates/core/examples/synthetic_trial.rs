// Simulates a randomized trial from a structural model with an unmeasured
// binary confounder U that shifts both mediators and the outcome.
//
// This is how data/synthetic_trial.csv was produced:
//
//     cargo run --example synthetic_trial -- data/synthetic_trial.csv
//
// Without an argument the CSV goes to stdout.

use medbounds::canonical::{all_types, implied_observed};
use medbounds::estimand::true_value;
use medbounds::observed::estimate_distribution;
use medbounds::simulation::simulate_trial;
use medbounds::{CounterfactualDistribution, EstimandId};

const SEED: u64 = 20_240_611;
const ARMS: [usize; 2] = [299, 600];
const P_U: f64 = 0.35;

fn bern(p: f64, bit: u8) -> f64 {
    if bit == 1 {
        p
    } else {
        1.0 - p
    }
}

/// Potential outcomes are independent Bernoullis given U.
fn structural_law() -> CounterfactualDistribution {
    let q = all_types()
        .map(|t| {
            [0.0, 1.0]
                .iter()
                .map(|&u| {
                    let pu = if u == 1.0 { P_U } else { 1.0 - P_U };
                    let mut w = pu;
                    for x in 0..2u8 {
                        w *= bern(0.15 + 0.45 * x as f64 + 0.25 * u, t.m1(x));
                        for m1 in 0..2u8 {
                            let p = 0.10 + 0.25 * x as f64 + 0.40 * m1 as f64 + 0.15 * u;
                            w *= bern(p, t.m2(x, m1));
                            for m2 in 0..2u8 {
                                let p = 0.10 + 0.10 * x as f64 + 0.15 * m1 as f64 + 0.30 * m2 as f64 + 0.25 * u;
                                w *= bern(p, t.y(x, m1, m2));
                            }
                        }
                    }
                    w
                })
                .sum()
        })
        .collect();
    CounterfactualDistribution::new(q).expect("structural law is a distribution")
}

fn main() -> medbounds::Result<()> {
    let q = structural_law();
    let table = simulate_trial(&q, ARMS, SEED)?;

    match std::env::args().nth(1) {
        Some(path) => {
            table.write_csv(std::fs::File::create(&path)?)?;
            eprintln!("wrote {} rows to {path}", table.len());
        }
        None => table.write_csv(std::io::stdout())?,
    }

    let truth = implied_observed(&q);
    let est = estimate_distribution(&table)?;
    eprintln!("TE population {:.4}  sample {:.4}",
        medbounds::observed::total_effect(&truth),
        medbounds::observed::total_effect(&est));
    for e in EstimandId::decomposition_terms() {
        eprintln!("{e:<12} true {:+.4}", true_value(e, &q));
    }
    Ok(())
}
