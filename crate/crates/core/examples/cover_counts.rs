//! Homomorphisms from surface groups to symmetric groups, and the covers
//! they define up to conjugation.

use surface_census::covers::{self, CountMethod, CoverBudget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for g in 1..=3 {
        let row: Vec<String> = (1..=6)
            .map(|n| covers::count_homomorphisms(g, n, CountMethod::Frobenius).map(|c| c.to_string()))
            .collect::<Result<_, _>>()?;
        println!("genus {g}: |Hom(π₁S_g, S_n)| for n = 1..6: {}", row.join(", "));
    }
    for n in 1..=4 {
        let brute = covers::count_homomorphisms(2, n, CountMethod::Brute)?;
        println!("genus 2, n = {n}: brute force {brute}");
    }

    let budget = CoverBudget::default();
    for n in 2..=4 {
        let e = covers::enumerate_covers(2, n, &budget)?;
        let primitive = e.covers.iter().filter(|c| covers::is_primitive(c).unwrap_or(false)).count();
        println!(
            "degree {n}: {} covers, {primitive} primitive, {} transitive homomorphisms, {} subgroups of index {n}",
            e.covers.len(),
            e.transitive_homomorphisms,
            e.subgroups
        );
    }
    let e = covers::enumerate_covers(2, 3, &budget)?;
    let c = &e.covers[0];
    println!("first degree-3 cover: {}", serde_json::to_string(c)?);
    println!("  genus {}, lift degrees of a1 {:?}", c.cover_genus(), covers::lift_degrees(c, &[1]));
    Ok(())
}
