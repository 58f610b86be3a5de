//! Cut a cover along the preimage of a1 and glue it back, as a polygon
//! complex.

use surface_census::covers::{self, GluedSurface, PermutationCover};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = PermutationCover::new(2, vec![vec![1, 0, 2], vec![0, 1, 2], vec![0, 2, 1], vec![0, 1, 2]])?;
    let glued = GluedSurface::from_cover(&c);
    println!("cover: {} faces, {} vertices, χ = {}, genus {}", glued.faces(), glued.vertices(), glued.euler_characteristic(), glued.genus()?);

    let cut = covers::cut(&c);
    println!("boundary cycles of a1: {:?}", cut.boundary);
    let back = covers::rejoin(&cut, &cut.identity_matching())?;
    let again = back.to_cover()?;
    println!("rejoined by the identity matching: same cover up to relabelling: {}", again.canonical() == c.canonical());
    println!("  genus {}, unbranched {}", back.genus()?, back.is_unbranched());
    Ok(())
}
