//! Build a surface-group representation from complex Fenchel-Nielsen
//! coordinates, then read the coordinates back.

use num_complex::Complex64 as C;
use surface_census::fenchel::{self, FnCoordinates, PantsDecompositionGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = PantsDecompositionGraph::theta();
    let coords = FnCoordinates {
        z: vec![C::new(2.0, 0.3), C::new(1.5, -0.2), C::new(2.5, 0.1)],
        w: vec![C::new(0.4, 0.2), C::new(-0.7, 0.0), C::new(1.1, -0.3)],
        theta: Default::default(),
    };
    let rep = fenchel::build_representation(&graph, &coords)?;
    println!("generators {:?}", rep.presentation.generator_names);
    println!("relator residual {:.2e}", rep.relator_residual);
    let back = fenchel::extract_coordinates(&rep, &graph)?;
    for (i, (z, w)) in back.coordinates.z.iter().zip(&back.twist_representatives).enumerate() {
        println!("cuff {i}: z = {z:.6}, w = {w:.6}");
    }

    let chain = PantsDecompositionGraph::closed_chain(3)?;
    let c3 = FnCoordinates::uniform(chain.cuffs.len(), C::new(1.5, 0.0), C::new(0.5, 0.0));
    let rep3 = fenchel::build_representation(&chain, &c3)?;
    println!("genus 3 chain: {} generators, residual {:.2e}", rep3.generators.len(), rep3.relator_residual);
    let j = fenchel::generator_jorgensen(&rep3);
    println!("Jørgensen violations among generators: {}", j.iter().filter(|(_, v)| v.violated()).count());
    Ok(())
}
