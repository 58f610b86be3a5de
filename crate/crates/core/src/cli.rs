//! Command-line front end. Every JSON artifact carries a `meta` block with
//! the tool version and seed; identical arguments give identical bytes.
//!
//! Exit codes: 0 success, 1 domain or input errors, 2 budget exhaustion
//! (partial artifacts are still written), 64 usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::census::{self, CensusBudget, CensusError, CensusFilter, ClassSummary};
use crate::covers::{self, CountMethod, CoverBudget, CoverError, PermutationCover};
use crate::fenchel::{self, FenchelError, FnCoordinates, PantsDecompositionGraph};
use crate::moebius::SpherePoint;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "surface-census", version, about = "Triangulation census, Fenchel-Nielsen representations and surface covers")]
struct Cli {
    /// Seed recorded in every artifact and used by randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Triangulation census and counting bounds.
    #[command(subcommand)]
    Census(CensusCmd),
    /// Same as `census bound`.
    Bound(BoundArgs),
    /// Fenchel-Nielsen representations.
    #[command(subcommand)]
    Fenchel(FenchelCmd),
    /// Same as `fenchel bend`.
    Bend(BendArgs),
    /// Same as `fenchel cloud`.
    Cloud(CloudArgs),
    /// Permutation covers of surface groups.
    #[command(subcommand)]
    Covers(CoversCmd),
    /// Same as `covers amalgamate`.
    Amalgamate(AmalgamateArgs),
    /// Runs the invariant suite and prints PASS/FAIL per property.
    Verify,
}

#[derive(Debug, Subcommand)]
enum CensusCmd {
    /// Enumerate triangulations of genus G with vertex degrees at most K.
    Enumerate(EnumerateArgs),
    /// Print the a·b·c·d bound factors.
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long = "max-degree")]
    max_degree: usize,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Keep only triangulations with this many vertices.
    #[arg(long)]
    vertices: Option<usize>,
    /// Keep only simplicial complexes (no loops or multi-edges).
    #[arg(long)]
    simplicial: bool,
    #[arg(long = "max-edges", default_value_t = 24)]
    max_edges: usize,
    #[arg(long = "max-genus", default_value_t = 3)]
    max_genus: usize,
    #[arg(long = "max-seconds", default_value_t = 120.0)]
    max_seconds: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long = "max-degree")]
    max_degree: usize,
    /// Size of the ball cover; with --bigk also prints the full bound.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    bigk: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum FenchelCmd {
    /// Build ρ from a pants graph and coordinates.
    Build(BuildArgs),
    /// Build with the bends θ added to the twists.
    Bend(BendArgs),
    /// Limit-set point cloud of a (possibly bent) representation.
    Cloud(CloudArgs),
}

#[derive(Debug, Args)]
struct SurfaceInput {
    /// Pants graph JSON, or `theta`, or `chain:G`.
    #[arg(long)]
    graph: Option<String>,
    /// FnCoordinates JSON.
    #[arg(long)]
    coords: Option<PathBuf>,
    /// Amalgamation output holding both `graph` and `coordinates_template`.
    #[arg(long)]
    surface: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    input: SurfaceInput,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BendArgs {
    #[command(flatten)]
    input: SurfaceInput,
    /// Bends as `cuff:angle,…`, added to any θ in the coordinates.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CloudArgs {
    #[command(flatten)]
    input: SurfaceInput,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long = "max-len", default_value_t = 6)]
    max_len: usize,
    #[arg(long = "max-words", default_value_t = 2_000_000)]
    max_words: usize,
    /// CSV with columns re, im, chart; chart 1 rows hold 1/z.
    #[arg(long)]
    out: PathBuf,
    /// Optional ASCII PPM rendering of the chart-0 points.
    #[arg(long)]
    ppm: Option<PathBuf>,
    #[arg(long, default_value = "512x512")]
    size: String,
}

#[derive(Debug, Subcommand)]
enum CoversCmd {
    /// |Hom(π₁S_g, S_n)|.
    Count(CountArgs),
    /// Maximal covers and their stratification by lift degree.
    Maximal(MaximalArgs),
    /// Enumerate covers up to conjugation.
    Enumerate(CoverEnumArgs),
    /// Glue two covers along degree-k lifts of a1.
    Amalgamate(AmalgamateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Brute,
    Frobenius,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long)]
    degree: usize,
    #[arg(long, value_enum, default_value_t = Method::Frobenius)]
    method: Method,
}

#[derive(Debug, Args)]
struct MaximalArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long)]
    degree: usize,
    /// Marked curve as a word, e.g. `a1` or `b1`.
    #[arg(long, default_value = "a1")]
    curve: String,
    #[arg(long = "max-seconds", default_value_t = 300.0)]
    max_seconds: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CoverEnumArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long)]
    degree: usize,
    #[arg(long = "max-seconds", default_value_t = 300.0)]
    max_seconds: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AmalgamateArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long = "R")]
    r: f64,
    #[arg(long)]
    out: PathBuf,
}

/// A failed run: exit code and message.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_BUDGET,
            message: message.into(),
        }
    }
}

impl From<CensusError> for Failure {
    fn from(e: CensusError) -> Self {
        match e {
            CensusError::Refused(_) | CensusError::BudgetExceeded { .. } => Failure::budget(e.to_string()),
            _ => Failure::domain(e.to_string()),
        }
    }
}

impl From<CoverError> for Failure {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::Refused { .. } => Failure::budget(e.to_string()),
            _ => Failure::domain(e.to_string()),
        }
    }
}

impl From<FenchelError> for Failure {
    fn from(e: FenchelError) -> Self {
        Failure::domain(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Runs the tool on `args` (including the program name) and returns the
/// exit code. Output goes to stdout, diagnostics to stderr.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    let seed = cli.seed;
    match &cli.command {
        Command::Census(CensusCmd::Enumerate(a)) => census_enumerate(a, seed),
        Command::Census(CensusCmd::Bound(a)) | Command::Bound(a) => census_bound(a, seed),
        Command::Fenchel(FenchelCmd::Build(a)) => fenchel_build(a, seed),
        Command::Fenchel(FenchelCmd::Bend(a)) | Command::Bend(a) => fenchel_bend(a, seed),
        Command::Fenchel(FenchelCmd::Cloud(a)) | Command::Cloud(a) => fenchel_cloud(a, seed),
        Command::Covers(CoversCmd::Count(a)) => covers_count(a, seed),
        Command::Covers(CoversCmd::Maximal(a)) => covers_maximal(a, seed),
        Command::Covers(CoversCmd::Enumerate(a)) => covers_enumerate(a, seed),
        Command::Covers(CoversCmd::Amalgamate(a)) | Command::Amalgamate(a) => covers_amalgamate(a, seed),
        Command::Verify => verify(seed),
    }
}

fn meta(command: &str, seed: u64) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
    })
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        use std::io::Write;
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::domain(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    write_atomic(path, text.as_bytes()).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

/// Parses a JSON file; errors carry the line and column.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        Failure::domain(format!("{}:{}:{}: {msg}", path.display(), e.line(), e.column()))
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::domain(e.to_string()))
}

fn threads() -> usize {
    std::env::var(census::THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn seconds(s: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(s).map_err(|_| Failure::domain(format!("invalid time budget {s}")))
}

fn census_enumerate(a: &EnumerateArgs, seed: u64) -> CmdResult {
    let budget = CensusBudget {
        max_genus: a.max_genus,
        max_edges: a.max_edges,
        max_seconds: seconds(a.max_seconds)?,
        shard_count: a.shards,
    };
    let filter = CensusFilter {
        vertices: a.vertices,
        simplicial: a.simplicial,
    };
    let params = json!({
        "genus": a.genus,
        "max_degree": a.max_degree,
        "shards": a.shards,
        "vertices": a.vertices,
        "simplicial": a.simplicial,
    });
    let (classes, partial, code) = match census::enumerate_triangulations(a.genus, a.max_degree, &budget, filter) {
        Ok(c) => (c, Value::Null, EXIT_OK),
        Err(CensusError::BudgetExceeded {
            completed_shards,
            total_shards,
            partial,
        }) => {
            eprintln!("time budget exceeded; {} of {total_shards} shards completed", completed_shards.len());
            let info = json!({ "completed_shards": completed_shards, "total_shards": total_shards });
            (partial, info, EXIT_BUDGET)
        }
        Err(e) => return Err(e.into()),
    };
    let summaries: Vec<ClassSummary> = classes.iter().map(ClassSummary::from).collect();
    let mut doc = json!({
        "meta": meta("census enumerate", seed),
        "params": params,
        "count": summaries.len(),
        "classes": to_value(&summaries)?,
    });
    if !partial.is_null() {
        doc["partial"] = partial;
    }
    write_json(&a.out, &doc)?;
    println!("{} classes written to {}", summaries.len(), a.out.display());
    Ok(code)
}

fn census_bound(a: &BoundArgs, seed: u64) -> CmdResult {
    let f = census::bound_factors(a.genus, a.max_degree)?;
    let mut doc = json!({
        "meta": meta("census bound", seed),
        "params": { "genus": a.genus, "max_degree": a.max_degree, "m": a.m, "bigk": a.bigk },
        "factors": to_value(&f)?,
    });
    let mut table = String::new();
    let _ = writeln!(table, "factor      value");
    for (name, v) in [("a", &f.a), ("b", &f.b), ("c", &f.c), ("d", &f.d), ("a*b", &f.ab_variant), ("a*b*c*d", &f.product)] {
        let _ = writeln!(table, "{name:<11} {v}");
    }
    match (a.m, a.bigk) {
        (Some(m), Some(k)) => {
            let total = census::upper_bound_count(a.genus, a.max_degree, m, k)?;
            let _ = writeln!(table, "{:<11} {total}", "bound");
            doc["upper_bound"] = Value::String(total.to_string());
        }
        (None, None) => {}
        _ => return Err(Failure::domain("--m and --bigk go together")),
    }
    print!("{table}");
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::domain(e.to_string()))?;
    println!("{text}");
    if let Some(out) = &a.out {
        write_json(out, &doc)?;
    }
    Ok(EXIT_OK)
}

/// Amalgamation output as read back by `fenchel`.
#[derive(Deserialize)]
struct SurfaceFile {
    graph: PantsDecompositionGraph,
    coordinates_template: FnCoordinates,
}

fn load_graph(source: &str) -> Result<PantsDecompositionGraph, Failure> {
    if source == "theta" {
        return Ok(PantsDecompositionGraph::theta());
    }
    if let Some(g) = source.strip_prefix("chain:") {
        let g: usize = g.parse().map_err(|_| Failure::domain(format!("bad genus in {source:?}")))?;
        return Ok(PantsDecompositionGraph::closed_chain(g)?);
    }
    read_json(Path::new(source))
}

fn load_surface(input: &SurfaceInput) -> Result<(PantsDecompositionGraph, FnCoordinates), Failure> {
    match (&input.surface, &input.graph, &input.coords) {
        (Some(s), None, None) => {
            let f: SurfaceFile = read_json(s)?;
            Ok((f.graph, f.coordinates_template))
        }
        (None, Some(g), Some(c)) => Ok((load_graph(g)?, read_json(c)?)),
        _ => Err(Failure::domain("give either --surface, or both --graph and --coords")),
    }
}

/// `cuff:angle,…`.
fn parse_theta(text: &str) -> Result<BTreeMap<usize, f64>, Failure> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|item| {
            let (c, v) = item.split_once(':').ok_or_else(|| Failure::domain(format!("bend {item:?} is not cuff:angle")))?;
            let c = c.trim().parse().map_err(|_| Failure::domain(format!("bad cuff in {item:?}")))?;
            let v = v.trim().parse().map_err(|_| Failure::domain(format!("bad angle in {item:?}")))?;
            Ok((c, v))
        })
        .collect()
}

fn rep_json(rep: &fenchel::SurfaceRepresentation, command: &str, seed: u64) -> Result<Value, Failure> {
    let gens: BTreeMap<&str, [[f64; 2]; 4]> = rep
        .presentation
        .generator_names
        .iter()
        .zip(&rep.generators)
        .map(|(n, m)| (n.as_str(), m.entries().map(|z| [z.re, z.im])))
        .collect();
    Ok(json!({
        "meta": meta(command, seed),
        "generators": to_value(&gens)?,
        "relators": to_value(&rep.presentation.relators)?,
        "relator_residual": rep.relator_residual,
        "coordinates": to_value(&rep.coordinates)?,
    }))
}

fn fenchel_build(a: &BuildArgs, seed: u64) -> CmdResult {
    let (graph, coords) = load_surface(&a.input)?;
    let rep = fenchel::build_representation(&graph, &coords)?;
    write_json(&a.out, &rep_json(&rep, "fenchel build", seed)?)?;
    println!("relator residual {:.3e}", rep.relator_residual);
    Ok(EXIT_OK)
}

fn bent_representation(input: &SurfaceInput, theta: &Option<String>) -> Result<(fenchel::BendResult, PantsDecompositionGraph), Failure> {
    let (graph, mut coords) = load_surface(input)?;
    if let Some(t) = theta {
        for (c, v) in parse_theta(t)? {
            *coords.theta.entry(c).or_insert(0.0) += v;
        }
    }
    Ok((fenchel::bend(&graph, &coords)?, graph))
}

fn fenchel_bend(a: &BendArgs, seed: u64) -> CmdResult {
    let (res, _) = bent_representation(&a.input, &a.theta)?;
    for c in &res.hypothesis_violations {
        eprintln!("warning: bend on cuff {c} is at least 3π/4");
    }
    let mut doc = rep_json(&res.representation, "fenchel bend", seed)?;
    doc["hypothesis_violations"] = to_value(&res.hypothesis_violations)?;
    write_json(&a.out, &doc)?;
    println!("relator residual {:.3e}", res.representation.relator_residual);
    Ok(EXIT_OK)
}

fn fenchel_cloud(a: &CloudArgs, seed: u64) -> CmdResult {
    let (res, _) = bent_representation(&a.input, &a.theta)?;
    let cloud = fenchel::limit_set_cloud(&res.representation, a.max_len, a.max_words)?;
    let fit = fenchel::circle_fit(&cloud.points)?;
    let mut csv = format!("# seed {seed}, version {}\nre,im,chart\n", env!("CARGO_PKG_VERSION"));
    for p in &cloud.points {
        let (z, chart) = match p {
            SpherePoint::Finite(z) if z.norm() <= 1.0 => (*z, 0),
            SpherePoint::Finite(z) => (z.inv(), 1),
            SpherePoint::Infinity => (Complex64::new(0.0, 0.0), 1),
        };
        let _ = writeln!(csv, "{:.12e},{:.12e},{chart}", z.re, z.im);
    }
    write_text(&a.out, &csv)?;
    if let Some(ppm) = &a.ppm {
        write_text(ppm, &render_ppm(&cloud.points, &a.size)?)?;
    }
    println!(
        "{} points from {} words{}; circle-fit residual {:.3e}",
        cloud.points.len(),
        cloud.words_visited,
        if cloud.partial { " (word budget reached)" } else { "" },
        fit.residual
    );
    Ok(if cloud.partial { EXIT_BUDGET } else { EXIT_OK })
}

/// Plain-text PPM of the points with |z| ≤ 2.
fn render_ppm(points: &[SpherePoint], size: &str) -> Result<String, Failure> {
    let (w, h) = size
        .split_once('x')
        .and_then(|(w, h)| Some((w.parse::<usize>().ok()?, h.parse::<usize>().ok()?)))
        .filter(|&(w, h)| w > 0 && h > 0 && w * h <= 16_000_000)
        .ok_or_else(|| Failure::domain(format!("bad size {size:?}, expected WxH")))?;
    let mut px = vec![false; w * h];
    for p in points {
        if let SpherePoint::Finite(z) = p {
            let x = ((z.re + 2.0) / 4.0 * w as f64).floor();
            let y = ((2.0 - z.im) / 4.0 * h as f64).floor();
            if (0.0..w as f64).contains(&x) && (0.0..h as f64).contains(&y) {
                px[y as usize * w + x as usize] = true;
            }
        }
    }
    let mut out = format!("P3\n{w} {h}\n255\n");
    for row in px.chunks(w) {
        let line: Vec<&str> = row.iter().map(|&on| if on { "0 0 0" } else { "255 255 255" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

fn cover_budget(max_seconds: f64) -> Result<CoverBudget, Failure> {
    seconds(max_seconds)?;
    Ok(CoverBudget {
        max_seconds,
        threads: threads(),
    })
}

fn covers_count(a: &CountArgs, seed: u64) -> CmdResult {
    let method = match a.method {
        Method::Brute => CountMethod::Brute,
        Method::Frobenius => CountMethod::Frobenius,
    };
    let count = covers::count_homomorphisms(a.genus, a.degree, method)?;
    let doc = json!({
        "meta": meta("covers count", seed),
        "genus": a.genus,
        "degree": a.degree,
        "method": to_value(&method)?,
        "homomorphisms": count.to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).map_err(|e| Failure::domain(e.to_string()))?);
    Ok(EXIT_OK)
}

fn covers_maximal(a: &MaximalArgs, seed: u64) -> CmdResult {
    let word = covers::SurfaceGroupPresentation::new(a.genus)?.parse_word(&a.curve)?;
    let m = covers::count_maximal(a.genus, a.degree, &word, &cover_budget(a.max_seconds)?)?;
    let mut csv = format!("# seed {seed}, version {}, genus {}, degree {}, curve {}\nk,m_n(k)\n", env!("CARGO_PKG_VERSION"), a.genus, a.degree, a.curve);
    for (k, v) in &m.by_lift_degree {
        let _ = writeln!(csv, "{k},{v}");
    }
    write_text(&a.out, &csv)?;
    println!(
        "{} covers, {} maximal; m_n(1) >= m_n(n): {}{}",
        m.covers,
        m.maximal,
        m.inequality_holds,
        if m.partial { " (partial)" } else { "" }
    );
    Ok(if m.partial { EXIT_BUDGET } else { EXIT_OK })
}

fn covers_enumerate(a: &CoverEnumArgs, seed: u64) -> CmdResult {
    let e = covers::enumerate_covers(a.genus, a.degree, &cover_budget(a.max_seconds)?)?;
    let doc = json!({ "meta": meta("covers enumerate", seed), "enumeration": to_value(&e)? });
    write_json(&a.out, &doc)?;
    println!("{} covers{}", e.covers.len(), if e.partial { " (partial)" } else { "" });
    Ok(if e.partial { EXIT_BUDGET } else { EXIT_OK })
}

fn covers_amalgamate(a: &AmalgamateArgs, seed: u64) -> CmdResult {
    let left: PermutationCover = read_json(&a.left)?;
    let right: PermutationCover = read_json(&a.right)?;
    let s = covers::amalgamate(&left, &right, a.k, a.eps, a.r)?;
    let mut doc = to_value(&s)?;
    doc["meta"] = meta("covers amalgamate", seed);
    write_json(&a.out, &doc)?;
    println!("genus {} (n(2g0-1) = {})", s.genus, s.formula_genus);
    Ok(EXIT_OK)
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn check(&mut self, name: &str, outcome: Result<bool, String>) {
        match outcome {
            Ok(true) => println!("PASS  {name}"),
            Ok(false) => {
                self.failed += 1;
                println!("FAIL  {name}");
            }
            Err(e) => {
                self.failed += 1;
                println!("FAIL  {name}: {e}");
            }
        }
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn verify(seed: u64) -> CmdResult {
    use crate::ribbon::fixtures;
    use num_bigint::BigUint;
    let mut s = Suite { failed: 0 };

    s.check(
        "ribbon genus fixtures",
        (|| {
            let g = [
                fixtures::interleaved_rose().genus().map_err(err)?,
                fixtures::planar_rose().genus().map_err(err)?,
                fixtures::tetrahedron().genus().map_err(err)?,
                fixtures::torus_one_vertex().genus().map_err(err)?,
            ];
            Ok(g == [1, 0, 0, 1])
        })(),
    );
    s.check(
        "polygon triangulations are Catalan numbers",
        (3..=30).try_fold(true, |ok, m| {
            let n = m - 2;
            let binom = (0..n).fold(BigUint::from(1u32), |acc, i| acc * (2 * n - i) / (i + 1));
            let catalan = binom / (n + 1);
            Ok(ok && census::catalan_triangulations(m).map_err(err)? == catalan)
        }),
    );
    s.check(
        "unlabelled trees match the known table for n <= 11",
        census::unlabelled_tree_table(11).map_err(err).map(|t| {
            let known: [u32; 11] = [1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235];
            t.iter().zip(known).all(|(a, b)| *a == BigUint::from(b))
        }),
    );
    s.check(
        "census: bound dominates count and every class decomposes",
        (3..=7).try_fold(true, |ok, k| {
            let classes = census::enumerate_triangulations(1, k, &CensusBudget::default(), CensusFilter::default()).map_err(err)?;
            let bound = census::bound_factors(1, k).map_err(err)?.product;
            let mut ok = ok && bound >= BigUint::from(classes.len());
            for t in &classes {
                let d = census::decompose(t).map_err(err)?;
                ok &= d.all_regions_disks() && d.sides_within(k, 1);
            }
            Ok(ok)
        }),
    );
    s.check(
        "census is shard invariant",
        (|| {
            let run = |shards| {
                let b = CensusBudget {
                    shard_count: shards,
                    ..CensusBudget::default()
                };
                census::enumerate_triangulations(1, 6, &b, CensusFilter::default()).map_err(err)
            };
            let base = run(1)?;
            Ok(run(3)? == base && run(8)? == base)
        })(),
    );
    s.check(
        "single geodesic segment has distortion 1",
        (|| {
            let p = crate::moebius::GeodesicSegmentPath::planar(&[5.0], &[]).map_err(err)?;
            let d = crate::moebius::bilipschitz_harness(&p, 200, seed).map_err(err)?;
            Ok((d.max - 1.0).abs() <= 1e-9 && (d.min - 1.0).abs() <= 1e-9)
        })(),
    );
    s.check(
        "theta representation: small relator residual, real traces",
        (|| {
            let g = PantsDecompositionGraph::theta();
            let c = FnCoordinates::uniform(3, Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.0));
            let rep = fenchel::build_representation(&g, &c).map_err(err)?;
            let real = fenchel::word_traces(&rep, 4).iter().all(|t| t.im.abs() <= 1e-8);
            Ok(rep.relator_residual <= 1e-8 && real)
        })(),
    );
    s.check(
        "zero bend is the identity",
        (|| {
            let g = PantsDecompositionGraph::theta();
            let mut c = FnCoordinates::uniform(3, Complex64::new(2.0, 0.3), Complex64::new(0.5, -0.2));
            let plain = fenchel::build_representation(&g, &c).map_err(err)?;
            c.theta.insert(0, 0.0);
            let bent = fenchel::bend(&g, &c).map_err(err)?.representation;
            Ok(plain.generators.iter().zip(&bent.generators).all(|(a, b)| (*a * b.inverse()).distance_from_identity() <= 1e-12))
        })(),
    );
    s.check(
        "|Hom(pi1 S2, S2)| = 16",
        covers::count_homomorphisms(2, 2, CountMethod::Frobenius).map_err(err).map(|c| c == BigUint::from(16u32)),
    );
    s.check(
        "brute-force and Frobenius counts agree for n <= 4",
        (1..=4).try_fold(true, |ok, n| {
            let b = covers::count_homomorphisms(2, n, CountMethod::Brute).map_err(err)?;
            let f = covers::count_homomorphisms(2, n, CountMethod::Frobenius).map_err(err)?;
            Ok(ok && b == f)
        }),
    );
    let budget = CoverBudget {
        max_seconds: 120.0,
        threads: threads(),
    };
    s.check(
        "15 index-2 cover classes of the genus-2 surface",
        covers::enumerate_covers(2, 2, &budget).map_err(err).map(|e| e.covers.len() == 15 && !e.partial),
    );
    s.check(
        "m_n(1) >= m_n(n) for the curve a1, n <= 3",
        (1..=3).try_fold(true, |ok, n| {
            let m = covers::count_maximal(2, n, &[1], &budget).map_err(err)?;
            Ok(ok && m.inequality_holds && !m.partial)
        }),
    );
    s.check(
        "amalgam genus equals n(2g0 - 1) for g0 = 2, n = 2",
        (|| {
            let c = PermutationCover::new(2, vec![vec![1, 0], vec![0, 1], vec![0, 1], vec![0, 1]]).map_err(err)?;
            let a = covers::amalgamate(&c, &c, 2, 0.1, 4.0).map_err(err)?;
            Ok(a.genus == a.formula_genus)
        })(),
    );

    if s.failed == 0 {
        println!("all checks passed");
        Ok(EXIT_OK)
    } else {
        println!("{} check(s) failed", s.failed);
        Ok(EXIT_DOMAIN)
    }
}
