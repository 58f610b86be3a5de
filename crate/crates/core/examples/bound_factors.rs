//! The a·b·c·d upper bound on |Tr(k, g)|, with its ingredients.

use surface_census::census;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("polygon triangulations p(m): {:?}", (3..=10).map(|m| census::catalan_triangulations(m).map(|p| p.to_string())).collect::<Result<Vec<_>, _>>()?);
    println!("unlabelled trees t(n): {:?}", census::unlabelled_tree_table(12)?.iter().map(|t| t.to_string()).collect::<Vec<_>>());
    for (g, k) in [(1, 6), (2, 3), (2, 7), (3, 7)] {
        let f = census::bound_factors(g, k)?;
        println!("g={g} k={k}: a={} b={} c={} d={} product={}", f.a, f.b, f.c, f.d, f.product);
    }
    let full = census::upper_bound_count(2, 7, 10, 3)?;
    println!("bound with m=10 balls and K=3: {full}");
    Ok(())
}
