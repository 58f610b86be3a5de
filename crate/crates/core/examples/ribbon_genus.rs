//! Face tracing and genus on small ribbon graphs.

use surface_census::ribbon::{fixtures, RibbonGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let named = [
        ("interleaved rose", fixtures::interleaved_rose()),
        ("planar rose", fixtures::planar_rose()),
        ("tetrahedron", fixtures::tetrahedron()),
        ("one-vertex torus", fixtures::torus_one_vertex()),
    ];
    for (name, g) in &named {
        println!(
            "{name:<17} V={} E={} F={} genus={} code={}",
            g.vertex_count(),
            g.edge_count(),
            g.face_count(),
            g.genus()?,
            g.canonical_hex()
        );
    }

    // a theta graph: two vertices joined by three edges, darts 2i and 2i+1
    let theta = RibbonGraph::from_rotations(&[vec![0, 2, 4], vec![1, 5, 3]], &[(0, 1), (2, 3), (4, 5)])?;
    println!("theta: faces {:?}, genus {}", theta.trace_faces(), theta.genus()?);
    let twisted = RibbonGraph::from_rotations(&[vec![0, 2, 4], vec![1, 3, 5]], &[(0, 1), (2, 3), (4, 5)])?;
    println!("theta with one rotation reversed: genus {}", twisted.genus()?);
    Ok(())
}
