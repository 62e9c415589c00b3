//! Projecting incoherent credences onto the coherent polytope and checking
//! that the projection is more accurate in every world.
//!
//! $ cargo run --example dominance

use credence_audit::accuracy::{
    brier_score, dominance_certificate, world_vectors, CredenceVector, ProjectionOptions,
};
use credence_audit::logic::{parse_formula, AtomRegistry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = AtomRegistry::from_entries([("p", "it will rain"), ("q", "the match is cancelled")])?;
    let formulas = ["p", "!p", "p & q", "q"]
        .iter()
        .map(|t| parse_formula(t, &reg))
        .collect::<Result<Vec<_>, _>>()?;
    let w = world_vectors(&formulas, &reg)?;
    println!(
        "{} distinct world vectors over {} formulas",
        w.len(),
        w.dim()
    );

    let c = CredenceVector::for_set(&w, vec![0.6, 0.6, 0.5, 0.4])?;
    let cert = dominance_certificate(&c, &w, &ProjectionOptions::default())?;
    println!("projected: {:?}", cert.projected.values);
    println!("distance to the hull: {:.6}", cert.hull_distance);
    for pair in &cert.pairs {
        println!(
            "{:?} x{}: BR(c) = {:.4}  BR(proj) = {:.4}",
            pair.vector, pair.multiplicity, pair.original, pair.projected
        );
    }
    println!(
        "strictly dominated: {}, smallest gain {:.4}",
        cert.strictly_dominates,
        cert.min_margin()
    );

    let truth = [1.0, 0.0, 0.0, 0.0];
    println!(
        "if it rains and the match goes ahead: {:.4} -> {:.4}",
        brier_score(&c.values, &truth)?,
        brier_score(&cert.projected.values, &truth)?
    );
    Ok(())
}
