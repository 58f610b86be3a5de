//! Maximal (primitive) covers stratified by the degree of the lift of a
//! marked curve.

use surface_census::covers::{self, CoverBudget, SurfaceGroupPresentation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let budget = CoverBudget::default();
    let p = SurfaceGroupPresentation::new(2)?;
    for curve in ["a1", "b1", "a1 b1"] {
        let word = p.parse_word(curve)?;
        for n in 1..=4 {
            let m = covers::count_maximal(2, n, &word, &budget)?;
            println!(
                "curve {curve:<6} n={n}: {} covers, {} maximal, by lift degree {:?}, m_n(1) >= m_n(n): {}",
                m.covers, m.maximal, m.by_lift_degree, m.inequality_holds
            );
        }
    }
    Ok(())
}
