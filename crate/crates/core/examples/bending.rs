//! Bend a Fuchsian representation along two cuffs and compare limit sets.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C;
use surface_census::fenchel::{self, FnCoordinates, PantsDecompositionGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = PantsDecompositionGraph::theta();
    let mut coords = FnCoordinates::uniform(3, C::new(1.5, 0.0), C::new(1.0, 0.0));
    for bend in [0.0, 0.25, 0.5, 1.0, 1.5] {
        coords.theta = BTreeMap::from([(0, bend * PI / 2.0), (1, bend * PI / 2.0)]);
        let r = fenchel::bend(&graph, &coords)?;
        let cloud = fenchel::limit_set_cloud(&r.representation, 5, 1_000_000)?;
        let fit = fenchel::circle_fit(&cloud.points)?;
        println!(
            "bend {:.3}: {} limit points, circle-fit residual {:.2e}, violations {:?}",
            bend * PI / 2.0,
            cloud.points.len(),
            fit.residual,
            r.hypothesis_violations
        );
    }
    Ok(())
}
