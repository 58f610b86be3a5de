//! Möbius transformations: classification, complex length, axes and the
//! Jørgensen inequality.

use num_complex::Complex64 as C;
use surface_census::moebius::{self, Mobius};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lox = Mobius::translation(C::new(1.2, 0.4));
    let par = Mobius::new(C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0))?;
    let ell = Mobius::diagonal(C::from_polar(1.0, 0.7));
    for (name, m) in [("loxodromic", lox), ("parabolic", par), ("elliptic", ell)] {
        println!("{name:<11} kind={:?} trace={:.4} fixed={:?}", m.kind(), m.trace(), m.fixed_points());
    }
    println!("complex length of the loxodromic: {:.6}", lox.complex_length()?);
    let (p, q) = lox.axis()?;
    println!("axis endpoints {p:?} -> {q:?}");

    let h = Mobius::new(C::new(2.0, 1.0), C::new(0.5, 0.0), C::new(-1.0, 0.3), C::new(0.2, 0.1))?;
    let conj = h.conjugate(&lox);
    println!("after conjugation: complex length {:.6}", conj.complex_length()?);

    let a = Mobius::translation(C::new(2.0, 0.0));
    let b = h.conjugate(&a);
    println!("Jørgensen for a and a conjugate: {:?}", moebius::jorgensen_test(&a, &b));
    let small = Mobius::diagonal(C::from_polar(1.0, 0.1));
    let near = h.conjugate(&Mobius::translation(C::new(0.05, 0.0)));
    println!("Jørgensen for a small rotation and a short translation: {:?}", moebius::jorgensen_test(&small, &near));
    Ok(())
}
