//! Glue two covers along degree-k lifts of a1 and build a representation
//! of the result from the emitted coordinate template.

use surface_census::covers::{self, PermutationCover};
use surface_census::fenchel;

fn cycle(n: usize) -> Vec<usize> {
    (0..n).map(|i| (i + 1) % n).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 1..=3 {
        let id: Vec<usize> = (0..n).collect();
        let left = PermutationCover::new(2, vec![cycle(n), id.clone(), id.clone(), id.clone()])?;
        let right = PermutationCover::new(2, vec![cycle(n), id.clone(), cycle(n), id.clone()])?;
        let a = covers::amalgamate(&left, &right, n, 0.1, 4.0)?;
        println!(
            "n={n}: χ = {}, genus {} (n(2g₀−1) = {}), degree {} over the base, bend cuffs {:?}",
            a.euler_characteristic, a.genus, a.formula_genus, a.cover.degree, a.bend_cuffs
        );
        let rep = fenchel::build_representation(&a.graph, &a.coordinates_template)?;
        let ex = fenchel::extract_coordinates(&rep, &a.graph)?;
        let bends: Vec<f64> = a.bend_cuffs.iter().map(|&c| ex.twist_representatives[c].im).collect();
        println!("  residual {:.2e}, Im w on the bend cuffs {bends:.6?}", rep.relator_residual);
    }
    Ok(())
}
