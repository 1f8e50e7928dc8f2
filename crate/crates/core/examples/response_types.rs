//! Tour of the canonical response-type parametrization.

use medbounds::canonical::{natural_cells, vertex_observed, NUM_TYPES};
use medbounds::estimand::{objective_vector, true_value};
use medbounds::{CounterfactualDistribution, EstimandId, ResponseType};

fn main() -> medbounds::Result<()> {
    // M1(x) = x, M2(x, m1) = m1, Y(x, m1, m2) = m2: the effect flows only
    // through the chain X -> M1 -> M2 -> Y.
    let chain = ResponseType::new(0b10, 0b1010, 0b1010_1010)?;
    println!("{NUM_TYPES} response types; the chain type has index {}", chain.index());

    for x in 0..2 {
        let (m1, m2, y) = chain.natural_world(x);
        println!("  X={x}: M1={m1} M2={m2} Y={y}  -> observed cell {}", natural_cells()[chain.index()][x as usize]);
    }

    println!("nested outcomes Y(1, M1(x1), M2(x2, M1(x3))):");
    for bits in 0..8u8 {
        let (x1, x2, x3) = (bits >> 2 & 1, bits >> 1 & 1, bits & 1);
        println!("  x1x2x3={x1}{x2}{x3}: {}", chain.nested_potential_outcome(1, x1, x2, x3));
    }

    println!("per-type contrasts:");
    for e in EstimandId::decomposition_terms() {
        println!("  {e:<12} {:+}", objective_vector(e)[chain.index()]);
    }

    let obs = vertex_observed(chain);
    println!("its observed law puts mass 1 on p(0,0,0|0) = {} and p(1,1,1|1) = {}", obs.p(0, 0, 0, 0), obs.p(1, 1, 1, 1));

    let q = CounterfactualDistribution::uniform();
    println!("under the uniform law every effect is zero: JNIE-1 = {}", true_value(EstimandId::JNIE_1, &q));
    Ok(())
}
