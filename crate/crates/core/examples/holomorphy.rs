//! Traces along an (ε, R) family depend holomorphically on τ; the complex
//! conjugate of a trace does not.

use num_complex::Complex64 as C;
use surface_census::fenchel::{self, EpsilonRFamily, PantsDecompositionGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = PantsDecompositionGraph::theta();
    let mut f = EpsilonRFamily::reference(3, 3.0, 0.1);
    f.zeta = vec![C::new(0.5, 0.2), C::new(-0.3, 0.4), C::new(0.1, -0.6)];
    f.eta = vec![C::new(0.7, 0.1), C::new(0.2, -0.5), C::new(-0.4, 0.4)];
    for word in [vec![1], vec![6], vec![5, -2, 6]] {
        for h in [1e-2, 1e-3, 1e-4] {
            let r = fenchel::holomorphy_check(&f, &graph, &word, h)?;
            println!("word {word:?} h={h:e}: residual {:.2e}, order {:.3}", r.residual_h, r.observed_order.unwrap_or(f64::NAN));
        }
    }
    let probe = fenchel::conjugate_probe(&f, &graph, &[1], 1e-4)?;
    println!("conjugated trace: residual {:.3}", probe.residual_h);
    Ok(())
}
