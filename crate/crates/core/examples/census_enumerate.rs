//! Triangulations of the torus with bounded vertex degree, and their
//! spanning-tree decompositions.

use surface_census::census::{self, CensusBudget, CensusFilter, ClassSummary};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget = CensusBudget {
        shard_count: 4,
        ..CensusBudget::default()
    };
    for k in 3..=9 {
        let classes = census::enumerate_triangulations(1, k, &budget, CensusFilter::default())?;
        println!("genus 1, degree <= {k}: {} classes", classes.len());
    }

    let classes = census::enumerate_triangulations(1, 7, &budget, CensusFilter::default())?;
    for t in &classes {
        let s = ClassSummary::from(t);
        let d = census::decompose(t)?;
        println!(
            "  V={} degrees={:?} tree edges={} generators={:?} regions={:?}",
            s.vertices, s.degrees, d.tree_edges.len(), d.generator_edges, d.complement_regions
        );
    }

    let one_vertex = CensusFilter {
        vertices: Some(1),
        simplicial: false,
    };
    let s = census::enumerate_triangulations(1, 9, &budget, one_vertex)?;
    println!("one-vertex torus triangulations with degree <= 9: {}", s.len());
    Ok(())
}
