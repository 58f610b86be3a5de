//! The twelve acceptance criteria, one PASS/FAIL line each. Criteria with a
//! documented counterexample are listed in `KNOWN_FAILURES`; the run fails
//! when the observed failures differ from that list.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use surface_census::census::{self, CensusBudget, CensusFilter};
use surface_census::covers::{self, CountMethod, CoverBudget, PermutationCover};
use surface_census::fenchel::{self, EpsilonRFamily, FnCoordinates, PantsDecompositionGraph};
use surface_census::moebius::{bilipschitz_harness, GeodesicSegmentPath, UpperPoint};
use surface_census::ribbon::{fixtures, RibbonGraph};

/// 6: half-twist shift. 10: m_2(1) < m_2(2). 11: amalgam genus formula.
const KNOWN_FAILURES: [u32; 3] = [6, 10, 11];

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Outcome {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "polygon triangulations", c1_catalan),
        (2, "unlabelled trees", c2_trees),
        (3, "census soundness", c3_census),
        (4, "genus arithmetic", c4_genus),
        (5, "representation correctness", c5_representation),
        (6, "twist lattice invariance", c6_lattice),
        (7, "holomorphy", c7_holomorphy),
        (8, "bending", c8_bending),
        (9, "bilipschitz harness", c9_bilipschitz),
        (10, "cover counting", c10_covers),
        (11, "amalgamation", c11_amalgamation),
        (12, "determinism", c12_determinism),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = BTreeSet::new();
    let mut ran = BTreeSet::new();
    for (n, name, f) in criteria {
        if filter.as_ref().is_some_and(|s| !name.contains(s.as_str())) {
            continue;
        }
        ran.insert(n);
        let start = Instant::now();
        match f() {
            Ok(()) => println!("PASS  {n:>2} {name} ({:.2?})", start.elapsed()),
            Err(e) => {
                println!("FAIL  {n:>2} {name} ({:.2?}): {e}", start.elapsed());
                failed.insert(n);
            }
        }
    }
    let expected: BTreeSet<u32> = KNOWN_FAILURES.into_iter().filter(|n| ran.contains(n)).collect();
    if failed != expected {
        eprintln!("failing criteria {failed:?}, expected {expected:?}");
        std::process::exit(1);
    }
}

// ---- 1 -------------------------------------------------------------------

/// Counts maximal sets of pairwise non-crossing diagonals of an m-gon by
/// backtracking over the diagonals in order.
fn brute_polygon_triangulations(m: usize) -> u64 {
    let diagonals: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 2..m).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == 0 && j == m - 1))
        .collect();
    let crosses = |(a, b): (usize, usize), (c, d): (usize, usize)| (a < c && c < b && b < d) || (c < a && a < d && d < b);
    fn go(i: usize, chosen: &mut Vec<(usize, usize)>, diagonals: &[(usize, usize)], need: usize, crosses: &dyn Fn((usize, usize), (usize, usize)) -> bool) -> u64 {
        if chosen.len() == need {
            return 1;
        }
        if diagonals.len() - i < need - chosen.len() {
            return 0;
        }
        let mut total = go(i + 1, chosen, diagonals, need, crosses);
        let d = diagonals[i];
        if chosen.iter().all(|&e| !crosses(d, e)) {
            chosen.push(d);
            total += go(i + 1, chosen, diagonals, need, crosses);
            chosen.pop();
        }
        total
    }
    go(0, &mut Vec::new(), &diagonals, m - 3, &crosses)
}

fn c1_catalan() -> Outcome {
    let start = Instant::now();
    for m in 3..=12 {
        let got = census::catalan_triangulations(m).map_err(|e| e.to_string())?;
        let want = brute_polygon_triangulations(m);
        ensure(got == BigUint::from(want), || format!("m = {m}: {got} vs brute force {want}"))?;
    }
    for m in 3..=30 {
        let p = census::catalan_triangulations(m).map_err(|e| e.to_string())?;
        ensure(p < BigUint::from(1u8) << (2 * m), || format!("p({m}) = {p} is not below 4^{m}"))?;
    }
    within(start, Duration::from_secs(1))
}

// ---- 2 -------------------------------------------------------------------

/// AHU encoding of a tree rooted at `r`.
fn rooted_code(adj: &[Vec<usize>], r: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[r].iter().filter(|&&c| c != parent).map(|&c| rooted_code(adj, c, r)).collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// Canonical code of a free tree: the smallest rooted code over its centers.
fn tree_code(adj: &[Vec<usize>]) -> String {
    let n = adj.len();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &u in &adj[v] {
                deg[u] -= 1;
                if deg[u] == 1 {
                    next.push(u);
                }
            }
        }
        layer = next;
    }
    layer.iter().map(|&c| rooted_code(adj, c, usize::MAX)).min().unwrap()
}

/// Trees on n vertices grown leaf by leaf from the trees on n − 1, deduped
/// by canonical code.
fn brute_tree_counts(max_n: usize) -> Vec<usize> {
    let mut level: Vec<Vec<Vec<usize>>> = vec![vec![vec![]]];
    let mut counts = vec![1];
    for _ in 2..=max_n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for t in &level {
            for v in 0..t.len() {
                let mut a = t.clone();
                let leaf = a.len();
                a.push(vec![v]);
                a[v].push(leaf);
                if seen.insert(tree_code(&a)) {
                    next.push(a);
                }
            }
        }
        counts.push(next.len());
        level = next;
    }
    counts
}

fn c2_trees() -> Outcome {
    let start = Instant::now();
    let brute = brute_tree_counts(16);
    let table = census::unlabelled_tree_table(16).map_err(|e| e.to_string())?;
    for (i, (got, want)) in table.iter().zip(&brute).enumerate() {
        ensure(*got == BigUint::from(*want), || format!("n = {}: {got} vs brute force {want}", i + 1))?;
    }
    for n in 1..=30usize {
        let t = census::unlabelled_trees(n).map_err(|e| e.to_string())?;
        ensure(t <= BigUint::from(12u8).pow(n as u32), || format!("t({n}) = {t} exceeds 12^{n}"))?;
    }
    within(start, Duration::from_secs(10))
}

// ---- 3 -------------------------------------------------------------------

fn orbits(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut n = 0;
    for s in 0..p.len() {
        if !seen[s] {
            n += 1;
            let mut d = s;
            while !seen[d] {
                seen[d] = true;
                d = p[d];
            }
        }
    }
    n
}

/// Genus from V − E + F with faces as orbits of σ∘α, computed here.
fn oracle_genus(g: &RibbonGraph) -> i64 {
    let (sigma, alpha) = (g.sigma(), g.alpha());
    let phi: Vec<usize> = (0..sigma.len()).map(|d| sigma[alpha[d]]).collect();
    let chi = orbits(sigma) as i64 - (sigma.len() / 2) as i64 + orbits(&phi) as i64;
    (2 - chi) / 2
}

fn face_lengths(g: &RibbonGraph) -> Vec<usize> {
    let (sigma, alpha) = (g.sigma(), g.alpha());
    let mut seen = vec![false; sigma.len()];
    let mut out = Vec::new();
    for s in 0..sigma.len() {
        let mut len = 0;
        let mut d = s;
        while !seen[d] {
            seen[d] = true;
            len += 1;
            d = sigma[alpha[d]];
        }
        if len > 0 {
            out.push(len);
        }
    }
    out
}

fn c3_census() -> Outcome {
    let start = Instant::now();
    let instances: Vec<(usize, usize)> = (3..=10).map(|k| (1, k)).chain([(2, 9), (2, 10)]).collect();
    let budget = CensusBudget::default();
    for (g, k) in instances {
        let classes = census::enumerate_triangulations(g, k, &budget, CensusFilter::default()).map_err(|e| format!("({g},{k}): {e}"))?;
        let product = census::bound_factors(g, k).map_err(|e| e.to_string())?.product;
        ensure(product >= BigUint::from(classes.len()), || format!("({g},{k}): bound {product} below count {}", classes.len()))?;
        let codes: HashSet<&Vec<u8>> = classes.iter().map(|c| &c.canonical_code).collect();
        ensure(codes.len() == classes.len(), || format!("({g},{k}): duplicate classes"))?;
        for t in &classes {
            ensure(oracle_genus(&t.graph) == g as i64, || format!("({g},{k}): wrong genus"))?;
            ensure(face_lengths(&t.graph).iter().all(|&l| l == 3), || format!("({g},{k}): non-triangular face"))?;
            ensure(t.graph.degrees().iter().all(|&d| d <= k), || format!("({g},{k}): degree above {k}"))?;
            let d = census::decompose(t).map_err(|e| e.to_string())?;
            ensure(d.region_euler.iter().all(|&e| e == 1), || format!("({g},{k}): region is not a disk: {:?}", d.region_euler))?;
            let sides: usize = d.complement_regions.iter().sum();
            ensure(sides <= 2 * k * g, || format!("({g},{k}): Σm = {sides} > 2kg"))?;
        }
    }
    within(start, Duration::from_secs(120))
}

// ---- 4 -------------------------------------------------------------------

fn c4_genus() -> Outcome {
    let cases = [
        ("interleaved rose", fixtures::interleaved_rose(), 1),
        ("planar rose", fixtures::planar_rose(), 0),
        ("tetrahedron boundary", fixtures::tetrahedron(), 0),
        ("one-vertex torus", fixtures::torus_one_vertex(), 1),
    ];
    for (name, graph, want) in cases {
        let got = graph.genus().map_err(|e| e.to_string())?;
        ensure(got == want && oracle_genus(&graph) == want as i64, || format!("{name}: genus {got}, expected {want}"))?;
    }
    Ok(())
}

// ---- 5 -------------------------------------------------------------------

fn random_coords(rng: &mut ChaCha8Rng, cuffs: usize, re_z: (f64, f64), im: f64) -> FnCoordinates {
    let z = (0..cuffs).map(|_| C::new(rng.gen_range(re_z.0..=re_z.1), im * rng.gen_range(-1.0..=1.0))).collect();
    let w = (0..cuffs).map(|_| C::new(rng.gen_range(-2.0..=2.0), im * rng.gen_range(-1.0..=1.0))).collect();
    FnCoordinates { z, w, theta: BTreeMap::new() }
}

/// Largest |Im tr| / max(1, |tr|) over reduced words.
fn imaginary_part(traces: &[C]) -> f64 {
    traces.iter().map(|t| t.im.abs() / t.norm().max(1.0)).fold(0.0, f64::max)
}

fn c5_representation() -> Outcome {
    let start = Instant::now();
    let graph = PantsDecompositionGraph::theta();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let c = random_coords(&mut rng, 3, (1.0, 10.0), 1.0);
        let rep = fenchel::build_representation(&graph, &c).map_err(|e| format!("draw {i}: {e}"))?;
        worst = worst.max(rep.relator_residual);
    }
    ensure(worst <= 1e-8, || format!("worst relator residual {worst:e}"))?;
    for i in 0..10 {
        let c = random_coords(&mut rng, 3, (1.0, 10.0), 0.0);
        let rep = fenchel::build_representation(&graph, &c).map_err(|e| format!("real draw {i}: {e}"))?;
        let im = imaginary_part(&fenchel::word_traces(&rep, 6));
        ensure(im <= 1e-8, || format!("real draw {i}: relative imaginary trace part {im:e}"))?;
    }
    within(start, Duration::from_secs(60))
}

// ---- 6 -------------------------------------------------------------------

fn c6_lattice() -> Outcome {
    let graph = PantsDecompositionGraph::theta();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    for _ in 0..10 {
        let c = random_coords(&mut rng, 3, (1.0, 3.0), 0.5);
        let base = fenchel::word_traces(&fenchel::build_representation(&graph, &c).map_err(|e| e.to_string())?, 4);
        for cuff in 0..3 {
            for (label, shift) in [("z", c.z[cuff]), ("2πi", C::new(0.0, 2.0 * PI))] {
                let mut s = c.clone();
                s.w[cuff] += shift;
                let rep = fenchel::build_representation(&graph, &s).map_err(|e| e.to_string())?;
                let same = fenchel::trace_multisets_match(&base, &fenchel::word_traces(&rep, 4), 1e-7);
                *failures.entry(label).or_default() += usize::from(!same);
            }
        }
    }
    ensure(failures.values().all(|&n| n == 0), || {
        let parts: Vec<String> = failures.iter().map(|(l, n)| format!("w + {l} changes traces in {n} of 30 cases")).collect();
        parts.join("; ")
    })
}

// ---- 7 -------------------------------------------------------------------

fn c7_holomorphy() -> Outcome {
    let graph = PantsDecompositionGraph::theta();
    let mut f = EpsilonRFamily::reference(3, 3.0, 0.1);
    f.zeta = vec![C::new(0.5, 0.2), C::new(-0.3, 0.4), C::new(0.1, -0.6)];
    f.eta = vec![C::new(0.7, 0.1), C::new(0.2, -0.5), C::new(-0.4, 0.4)];
    for word in [vec![1], vec![2], vec![6], vec![1, 5], vec![5, -2, 6]] {
        let r = fenchel::holomorphy_check(&f, &graph, &word, 1e-4).map_err(|e| e.to_string())?;
        ensure(r.residual_h <= 1e-6, || format!("word {word:?}: residual {:e}", r.residual_h))?;
        let order = r.observed_order.ok_or_else(|| format!("word {word:?}: no observed order"))?;
        ensure((order - 2.0).abs() <= 0.3, || format!("word {word:?}: order {order:.3}"))?;
    }
    Ok(())
}

// ---- 8 -------------------------------------------------------------------

fn c8_bending() -> Outcome {
    let graph = PantsDecompositionGraph::theta();
    let coords = FnCoordinates::uniform(3, C::new(1.5, 0.0), C::new(1.0, 0.0));
    let plain = fenchel::build_representation(&graph, &coords).map_err(|e| e.to_string())?;

    let mut zero = coords.clone();
    zero.theta = BTreeMap::from([(0, 0.0), (1, 0.0), (2, 0.0)]);
    let same = fenchel::bend(&graph, &zero).map_err(|e| e.to_string())?.representation;
    let d = plain.generators.iter().zip(&same.generators).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
    ensure(d <= 1e-12, || format!("zero bend moves generators by {d:e}"))?;

    let mut bent_c = coords.clone();
    bent_c.theta = BTreeMap::from([(0, PI / 2.0), (1, PI / 2.0)]);
    let bent = fenchel::bend(&graph, &bent_c).map_err(|e| e.to_string())?.representation;
    let mut back = bent.coordinates.clone();
    back.theta = BTreeMap::from([(0, -PI / 2.0), (1, -PI / 2.0)]);
    let unbent = fenchel::bend(&graph, &back).map_err(|e| e.to_string())?.representation;
    ensure(
        fenchel::trace_multisets_match(&fenchel::word_traces(&plain, 4), &fenchel::word_traces(&unbent, 4), 1e-9),
        || "bend then unbend changes traces".into(),
    )?;

    let round = fenchel::circle_fit(&fenchel::limit_set_cloud(&plain, 4, usize::MAX).map_err(|e| e.to_string())?.points).map_err(|e| e.to_string())?;
    ensure(round.residual <= 1e-6, || format!("Fuchsian circle fit {:e}", round.residual))?;
    let pleated = fenchel::circle_fit(&fenchel::limit_set_cloud(&bent, 4, usize::MAX).map_err(|e| e.to_string())?.points).map_err(|e| e.to_string())?;
    ensure(pleated.residual > 1e-3, || format!("bent circle fit {:e}", pleated.residual))
}

// ---- 9 -------------------------------------------------------------------

fn c9_bilipschitz() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let point = |rng: &mut ChaCha8Rng| UpperPoint::new(C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), rng.gen_range(0.1..3.0));
    for i in 0..20 {
        let (p, q) = (point(&mut rng).map_err(|e| e.to_string())?, point(&mut rng).map_err(|e| e.to_string())?);
        let path = GeodesicSegmentPath::new(vec![p, q]).map_err(|e| e.to_string())?;
        let d = bilipschitz_harness(&path, 300, i).map_err(|e| e.to_string())?;
        ensure((d.max - 1.0).abs() <= 1e-9 && (d.min - 1.0).abs() <= 1e-9, || format!("single segment {i}: {d:?}"))?;
    }
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = rng.gen_range(2..=6);
        let lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(10.0..30.0)).collect();
        let turns: Vec<f64> = (1..n).map(|_| rng.gen_range(-0.75 * PI..=0.75 * PI)).collect();
        let path = GeodesicSegmentPath::planar(&lengths, &turns).map_err(|e| e.to_string())?;
        let d = bilipschitz_harness(&path, 1000, 100 + i).map_err(|e| e.to_string())?;
        worst = worst.max(d.max);
    }
    ensure(worst.is_finite() && worst < 10.0, || format!("long-segment distortion {worst}"))?;
    let th = 0.75 * PI;
    let short = GeodesicSegmentPath::planar(&[0.09; 8], &[th; 7]).map_err(|e| e.to_string())?;
    let d = bilipschitz_harness(&short, 500, 7).map_err(|e| e.to_string())?;
    ensure(d.max > 100.0, || format!("short segments only reach distortion {}", d.max))?;
    within(start, Duration::from_secs(30))
}

// ---- 10 ------------------------------------------------------------------

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    (0..p.len()).map(|i| q[p[i]]).collect()
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut r = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        r[j] = i;
    }
    r
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Literal count of 4-tuples with [a1,b1][a2,b2] = 1.
fn brute_hom_genus2(n: usize) -> usize {
    let perms = all_perms(n);
    let comm = |a: &[usize], b: &[usize]| compose(&compose(&compose(a, b), &invert(a)), &invert(b));
    let mut by_comm: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for a in &perms {
        for b in &perms {
            *by_comm.entry(comm(a, b)).or_default() += 1;
        }
    }
    by_comm.iter().map(|(c, k)| k * by_comm.get(&invert(c)).copied().unwrap_or(0)).sum()
}

/// Whether some set B ∋ 0 with 1 < |B| < n is a block: its images under
/// the generated group are pairwise equal or disjoint.
fn brute_has_block(gens: &[Vec<usize>], n: usize) -> bool {
    (1u32..1 << n).filter(|m| m & 1 == 1 && (2..n as u32).contains(&m.count_ones())).any(|mask| {
        let mut sets = vec![mask];
        let mut i = 0;
        while i < sets.len() {
            for g in gens {
                let img = (0..n).filter(|&x| sets[i] >> x & 1 == 1).fold(0u32, |acc, x| acc | 1 << g[x]);
                if !sets.contains(&img) {
                    sets.push(img);
                }
            }
            i += 1;
        }
        sets.iter().all(|&a| sets.iter().all(|&b| a == b || a & b == 0))
    })
}

fn c10_covers() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    let frob = |g, n| covers::count_homomorphisms(g, n, CountMethod::Frobenius).map_err(|e| e.to_string());
    ensure(frob(2, 2)? == BigUint::from(16u8), || "|Hom(π₁S₂, S₂)| ≠ 16".into())?;
    for n in 1..=3 {
        ensure(frob(2, n)? == BigUint::from(brute_hom_genus2(n)), || format!("n = {n}: Frobenius disagrees with tuple count"))?;
    }
    for g in 1..=3 {
        for n in 1..=4 {
            let b = covers::count_homomorphisms(g, n, CountMethod::Brute).map_err(|e| e.to_string())?;
            ensure(b == frob(g, n)?, || format!("g = {g}, n = {n}: brute {b} vs Frobenius"))?;
        }
    }
    let budget = CoverBudget { max_seconds: 240.0, threads: 1 };
    let index2 = covers::enumerate_covers(2, 2, &budget).map_err(|e| e.to_string())?;
    // index-2 subgroups are the kernels of the nonzero maps H₁ → ℤ/2
    ensure(index2.covers.len() == (1 << 4) - 1, || format!("{} index-2 classes", index2.covers.len()))?;

    for n in 1..=4 {
        let e = covers::enumerate_covers(2, n, &budget).map_err(|e| e.to_string())?;
        for c in &e.covers {
            let prim = covers::is_primitive(c).map_err(|e| e.to_string())?;
            ensure(prim != brute_has_block(&c.images, n), || format!("primitivity mismatch on {c:?}"))?;
        }
        let m = covers::count_maximal(2, n, &[1], &budget).map_err(|e| e.to_string())?;
        let first = m.by_lift_degree.first().map_or(0, |p| p.1);
        let last = m.by_lift_degree.last().map_or(0, |p| p.1);
        if n == 2 {
            // a₁ has a degree-1 lift exactly when it maps to 0 in ℤ/2
            ensure(m.by_lift_degree == [(1, (1 << 3) - 1), (2, 1 << 3)], || format!("m_2 = {:?}", m.by_lift_degree))?;
        }
        if first < last {
            problems.push(format!("m_{n}(1) = {first} < m_{n}({n}) = {last}"));
        }
    }
    within(start, Duration::from_secs(300))?;
    ensure(problems.is_empty(), || problems.join("; "))
}

// ---- 11 ------------------------------------------------------------------

fn cycle(n: usize) -> Vec<usize> {
    (0..n).map(|i| (i + 1) % n).collect()
}

fn c11_amalgamation() -> Outcome {
    let mut problems = Vec::new();
    for n in 1..=4 {
        let id: Vec<usize> = (0..n).collect();
        let left = PermutationCover::new(2, vec![cycle(n), id.clone(), id.clone(), id.clone()]).map_err(|e| e.to_string())?;
        let right = PermutationCover::new(2, vec![cycle(n), id.clone(), cycle(n), id.clone()]).map_err(|e| e.to_string())?;
        let a = covers::amalgamate(&left, &right, n, 0.1, 4.0).map_err(|e| e.to_string())?;
        if a.genus != n * (2 * 2 - 1) {
            problems.push(format!("n = {n}: genus {} vs n(2g₀−1) = {}", a.genus, n * 3));
        }
        let rep = fenchel::build_representation(&a.graph, &a.coordinates_template).map_err(|e| format!("n = {n}: {e}"))?;
        ensure(rep.relator_residual <= 1e-8, || format!("n = {n}: residual {:e}", rep.relator_residual))?;
        let ex = fenchel::extract_coordinates(&rep, &a.graph).map_err(|e| format!("n = {n}: {e}"))?;
        for &cuff in &a.bend_cuffs {
            let im = ex.twist_representatives[cuff].im.rem_euclid(2.0 * PI);
            ensure((im - PI / 2.0).abs() <= 1e-8, || format!("n = {n}, cuff {cuff}: Im w = {im}"))?;
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))
}

// ---- 12 ------------------------------------------------------------------

fn cli(dir: &std::path::Path, args: &[&str]) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_surface-census"))
        .args(args)
        .current_dir(dir)
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    Ok(status.code().unwrap_or(-1))
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::write(d.join("coords.json"), r#"{"z":[[1.5,0],[1.5,0],[1.5,0]],"w":[[1,0],[1,0],[1,0]]}"#).map_err(|e| e.to_string())?;
    std::fs::write(d.join("left.json"), r#"{"genus":2,"degree":2,"images":{"a1":[2,1],"b1":[1,2],"a2":[1,2],"b2":[1,2]}}"#).map_err(|e| e.to_string())?;
    let runs: [&[&str]; 7] = [
        &["--seed", "7", "census", "enumerate", "--genus", "1", "--max-degree", "7", "--shards", "3", "--out", "OUT"],
        &["--seed", "7", "census", "bound", "--genus", "2", "--max-degree", "3", "--m", "4", "--bigk", "2", "--out", "OUT"],
        &["--seed", "7", "fenchel", "build", "--graph", "theta", "--coords", "coords.json", "--out", "OUT"],
        &["--seed", "7", "cloud", "--graph", "theta", "--coords", "coords.json", "--theta", "0:1.2", "--max-len", "4", "--out", "OUT"],
        &["--seed", "7", "covers", "maximal", "--genus", "2", "--degree", "3", "--out", "OUT"],
        &["--seed", "7", "covers", "enumerate", "--genus", "2", "--degree", "3", "--out", "OUT"],
        &["--seed", "7", "amalgamate", "--left", "left.json", "--right", "left.json", "--k", "2", "--eps", "0.1", "--R", "4", "--out", "OUT"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = format!("run{i}_{rep}");
            let args: Vec<&str> = args.iter().map(|a| if *a == "OUT" { out.as_str() } else { a }).collect();
            let code = cli(d, &args)?;
            ensure(code == 0, || format!("{args:?} exited {code}"))?;
            outputs.push(std::fs::read(d.join(&out)).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("run {i} is not byte-identical"))?;
    }
    let classes = |shards: usize| -> Result<serde_json::Value, String> {
        let out = format!("shards{shards}.json");
        let s = shards.to_string();
        cli(d, &["census", "enumerate", "--genus", "1", "--max-degree", "8", "--shards", &s, "--out", &out])?;
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join(&out)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        Ok(v["classes"].clone())
    };
    let base = classes(1)?;
    for s in [2, 4, 7] {
        ensure(classes(s)? == base, || format!("census differs with {s} shards"))?;
    }
    Ok(())
}
