//! Bounds for one decomposition term from bounds on the others.

use medbounds::bounds::{addition_procedure, closed_form_bounds, subtraction_procedure, Target};
use medbounds::observed::total_effect;
use medbounds::{EstimandId, ObservedDistribution};

fn main() -> medbounds::Result<()> {
    let p = [
        0.10, 0.05, 0.15, 0.05, 0.05, 0.05, 0.25, 0.30, //
        0.20, 0.05, 0.05, 0.10, 0.10, 0.05, 0.05, 0.40,
    ];
    // cells are indexed 8x + 4y + 2m1 + m2
    let dist = ObservedDistribution::from_cells(p)?;
    let te = total_effect(&dist);
    println!("TE = {te:.4}");

    let terms = EstimandId::decomposition_terms();
    let bounds: Vec<_> = terms
        .iter()
        .map(|&e| closed_form_bounds(&dist, e))
        .collect::<medbounds::Result<_>>()?;
    for (e, b) in terms.iter().zip(&bounds) {
        println!("{e:<12} [{:+.4}, {:+.4}]", b.lower, b.upper);
    }

    // TE = NDE-000 + JNIE-1, so the identified TE and the JNIE-1 bounds
    // bound NDE-000 as well.
    let nde = subtraction_procedure(Target::Identified(te), &bounds[1..2]);
    println!("NDE-000 by subtraction: [{:+.4}, {:+.4}] ({:?})", nde.lower, nde.upper, nde.guarantee);

    // JNIE-1 = MS2NIE1-11 + NIE2-100
    let jnie = addition_procedure(&bounds[2..])?;
    println!(
        "JNIE-1 by addition: [{:+.4}, {:+.4}] ({:?}), direct [{:+.4}, {:+.4}]",
        jnie.lower, jnie.upper, jnie.guarantee, bounds[1].lower, bounds[1].upper
    );
    Ok(())
}
