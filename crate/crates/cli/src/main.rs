//! `annulus`: sparsity checks, constructions and symmetric realizations.
//!
//! Exit codes: 0 success, 1 negative verdict, 2 input error, 3 internal
//! failure (an outcome the theory rules out).

mod svg;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use annulus::catalog::enumerate_maps;
use annulus::format::{map_from_json, map_to_json, AnyPpt, AnySystem, MapFile, PptFile};
use annulus::geometry::{Pt, SymmetryGroup};
use annulus::realize_contact::{self, extract_components, extract_quotient_graph, ContactError, ContactSystem};
use annulus::realize_pseudo::{self, decide_symmetric_rigidity, validate_ppt, PptError, PptRealization};
use annulus::reduction::{
    complete_to_tight, decompose, generate_random_tight, rebuild, ConstructionSequence, ReductionError,
};
use annulus::sparsity::is_tight;
use annulus::{check_sparse, isomorphic, oracle_sparse, AnnulusMap, QSqrt3, Rational, Scalar};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "annulus", version, about = "Gain-sparse graphs on the annulus and their symmetric realizations")]
struct Cli {
    /// Seed for every random choice; echoed in the report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report (2,3,l)-sparsity and tightness of a map.
    Check {
        graph: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: u8,
        /// Also compare with another map up to isomorphism.
        #[arg(long)]
        isomorphic: Option<String>,
    },
    /// Reduce a tight map to a base graph and print the construction sequence.
    Decompose {
        graph: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: u8,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Replay a construction sequence into a map.
    Rebuild {
        cert: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// A random tight map built by random splits.
    Generate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: u8,
        #[arg(long)]
        vertices: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Add edges to a sparse map until it is tight.
    Complete {
        graph: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: u8,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Symmetric contact system of segments from a sequence or a tight map.
    RealizeContact {
        input: String,
        /// `translation` or `rotation:K`.
        #[arg(long)]
        group: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Symmetric pointed pseudotriangulation from a sequence or a tight map.
    RealizePpt {
        input: String,
        /// `cylinder` or `cone:K`.
        #[arg(long)]
        surface: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Validate a contact system or pseudotriangulation and read off its quotient map.
    Extract { input: String },
    /// Draw a map, contact system or pseudotriangulation as SVG.
    Render {
        input: String,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare the sparsity checker with the brute-force oracle on every small map.
    Census {
        #[arg(long)]
        max_edges: usize,
    },
    /// Decide minimal rigidity under rotational symmetry of order K ≥ 3.
    Rigidity {
        graph: String,
        #[arg(long)]
        order: u32,
        /// Where to write the pseudotriangulation witness.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Negative(Value),
    Input(String),
    Internal(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<annulus::format::FormatError> for Failure {
    fn from(e: annulus::format::FormatError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(format!("json: {e}"))
    }
}

/// What a successful command leaves behind.
struct Outcome {
    verdict: Value,
    artifact: Option<String>,
    out: Option<PathBuf>,
}

impl Outcome {
    fn verdict(verdict: Value) -> Self {
        Outcome { verdict, artifact: None, out: None }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
    }
}

fn read_map(path: &str) -> Result<AnnulusMap, Failure> {
    map_from_json(&read_input(path)?).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

enum Input {
    Map(AnnulusMap),
    Sequence(ConstructionSequence),
    System(AnySystem),
    Ppt(AnyPpt),
}

/// Tells the file kinds apart by their top-level keys.
fn read_any(path: &str) -> Result<Input, Failure> {
    let text = read_input(path)?;
    let value: Value = serde_json::from_str(&text)?;
    let has = |k: &str| value.get(k).is_some();
    if has("segments") {
        Ok(Input::System(AnySystem::from_json(&text)?))
    } else if has("steps") {
        Ok(Input::Sequence(serde_json::from_value(value)?))
    } else if has("rotation") {
        Ok(Input::Map(map_from_json(&text)?))
    } else if has("vertices") && has("group") {
        Ok(Input::Ppt(AnyPpt::from_json(&text)?))
    } else {
        Err(Failure::Input(format!("{path}: not a map, construction sequence, contact system or pseudotriangulation")))
    }
}

fn map_json(map: &AnnulusMap) -> Value {
    serde_json::to_value(MapFile::from_map(map)).expect("maps serialize")
}

fn pretty<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("artifacts serialize")
}

#[derive(Copy, Clone, Debug)]
enum GroupSpec {
    Translation,
    Rotation(u32),
}

impl GroupSpec {
    fn parse(s: &str) -> Result<GroupSpec, Failure> {
        let order = |k: &str| {
            k.parse::<u32>()
                .ok()
                .filter(|&k| k >= 2)
                .ok_or_else(|| Failure::Input(format!("rotation order must be an integer ≥ 2, got {k:?}")))
        };
        match s.split_once(':') {
            None if s == "translation" || s == "cylinder" => Ok(GroupSpec::Translation),
            Some(("rotation" | "cone", k)) => Ok(GroupSpec::Rotation(order(k)?)),
            _ => Err(Failure::Input(format!("unknown group {s:?}; use translation, rotation:K, cylinder or cone:K"))),
        }
    }

    /// Level of the tight maps this group realizes.
    fn level(self) -> u8 {
        match self {
            GroupSpec::Translation | GroupSpec::Rotation(2) => 2,
            GroupSpec::Rotation(_) => 1,
        }
    }
}

fn group<S: Scalar>(spec: GroupSpec) -> SymmetryGroup<S> {
    match spec {
        GroupSpec::Translation => SymmetryGroup::translation(Pt::from_ratios((1, 1), (0, 1))),
        GroupSpec::Rotation(k) => SymmetryGroup::rotation(k, Pt::zero()),
    }
    .expect("every number system carries its groups")
}

/// Runs `$f::<S>(group, args..)` in the number system the group needs:
/// rationals for translations and orders 2 and 4, √3 for 3 and 6, floats otherwise.
macro_rules! dispatch {
    ($spec:expr, $f:ident ( $($arg:expr),* )) => {
        match $spec {
            GroupSpec::Translation | GroupSpec::Rotation(2 | 4) => $f::<Rational>(group($spec), $($arg),*),
            GroupSpec::Rotation(3 | 6) => $f::<QSqrt3>(group($spec), $($arg),*),
            GroupSpec::Rotation(_) => $f::<f64>(group($spec), $($arg),*),
        }
    };
}

fn reduction_failure(e: ReductionError, what: &str) -> Failure {
    match e {
        ReductionError::NotTight(l) => Failure::Negative(json!({ "tight": false, "level": l, "error": e.to_string() })),
        ReductionError::IllegalStep { .. } => Failure::Input(format!("{what}: {e}")),
        ReductionError::NoMoveFound | ReductionError::CompletionStuck => Failure::Internal(format!("{what}: {e}")),
    }
}

fn contact_failure(e: ContactError) -> Failure {
    match e {
        ContactError::GroupLevelMismatch(_) | ContactError::UnsupportedGroup(_) => Failure::Input(e.to_string()),
        ContactError::Reduction(r) => reduction_failure(r, "realize-contact"),
        other => Failure::Internal(other.to_string()),
    }
}

fn ppt_failure(e: PptError) -> Failure {
    match e {
        PptError::SurfaceLevelMismatch(_) | PptError::UnsupportedGroup(_) => Failure::Input(e.to_string()),
        PptError::Reduction(r) => reduction_failure(r, "realize-ppt"),
        other => Failure::Internal(other.to_string()),
    }
}

fn realize_contact_with<S: Scalar>(group: SymmetryGroup<S>, input: Input, spec: GroupSpec) -> Result<Value, Failure> {
    let sys = match input {
        Input::Sequence(seq) => realize_contact::realize(&seq, group),
        Input::Map(map) => realize_contact::realize_map(&map, spec.level(), group),
        _ => return Err(Failure::Input("expected a map or a construction sequence".into())),
    }
    .map_err(contact_failure)?;
    let cert =
        extract_quotient_graph(&sys).map_err(|e| Failure::Internal(format!("fresh system fails validation: {e}")))?;
    let text = annulus::format::SystemFile::from_system(&sys);
    Ok(json!({
        "system": serde_json::to_value(text)?,
        "number_system": S::NUMBER_SYSTEM,
        "segments": sys.reps.len(),
        "free_end_orbit_count": cert.free_end_orbit_count,
    }))
}

fn realize_ppt_with<S: Scalar>(group: SymmetryGroup<S>, input: Input, spec: GroupSpec) -> Result<Value, Failure> {
    let real = match input {
        Input::Sequence(seq) => realize_pseudo::realize_ppt(&seq, group),
        Input::Map(map) => realize_pseudo::realize_ppt_map(&map, spec.level(), group),
        _ => return Err(Failure::Input("expected a map or a construction sequence".into())),
    }
    .map_err(ppt_failure)?;
    let report =
        validate_ppt(&real).map_err(|e| Failure::Internal(format!("fresh realization fails validation: {e}")))?;
    Ok(json!({
        "ppt": serde_json::to_value(PptFile::from_ppt(&real))?,
        "number_system": S::NUMBER_SYSTEM,
        "convex_corners": report.c,
        "faces": report.f,
    }))
}

fn rigidity_with<S: Scalar>(group: SymmetryGroup<S>, map: &AnnulusMap) -> Result<(Value, Option<String>), Failure> {
    let verdict = decide_symmetric_rigidity(map, &group).map_err(ppt_failure)?;
    let witness = verdict.witness.as_ref().map(|w| pretty(&PptFile::from_ppt(w)));
    let report = json!({
        "rigid": verdict.rigid,
        "tight": is_tight(map, 1),
        "deficiency": verdict.deficiency,
        "violator": verdict.violator,
        "number_system": S::NUMBER_SYSTEM,
    });
    Ok((report, witness))
}

fn extract_system<S: Scalar>(sys: &ContactSystem<S>) -> Result<Value, Failure> {
    match extract_quotient_graph(sys) {
        Ok(cert) => Ok(json!({
            "valid": true,
            "quotient_graph": map_json(&cert.quotient_graph),
            "free_end_orbit_count": cert.free_end_orbit_count,
            "tight_level_2": is_tight(&cert.quotient_graph, 2),
            "tight_level_1": is_tight(&cert.quotient_graph, 1),
        })),
        Err(e) => {
            let parts = extract_components(sys).unwrap_or_default();
            Err(Failure::Negative(json!({
                "valid": false,
                "error": e.to_string(),
                "components": parts.iter().map(map_json).collect::<Vec<_>>(),
            })))
        }
    }
}

fn extract_ppt<S: Scalar>(real: &PptRealization<S>) -> Result<Value, Failure> {
    match validate_ppt(real) {
        Ok(r) => Ok(json!({
            "valid": true,
            "quotient_graph": map_json(&r.quotient_graph),
            "balanced": r.balanced,
            "convex_corners": r.c,
            "faces": r.f,
            "vertices": r.n,
            "edges": r.m,
            "face_convex": r.face_convex,
        })),
        Err(e) => Err(Failure::Negative(json!({ "valid": false, "error": e.to_string() }))),
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Check { graph, level, isomorphic: other } => {
            let map = read_map(graph)?;
            let v = check_sparse(&map, *level);
            let violator: Option<Vec<&str>> =
                v.violator.as_ref().map(|s| s.members.iter().map(|&e| map.edges()[e].id.as_str()).collect());
            let mut verdict = json!({
                "level": level,
                "sparse": v.sparse,
                "tight": v.tight,
                "balanced": map.is_map_balanced(),
                "vertices": map.n_vertices(),
                "edges": map.n_edges(),
                "violator": violator,
            });
            let mut negative = !v.sparse;
            if let Some(path) = other {
                let same = isomorphic(&map, &read_map(path)?);
                verdict["isomorphic"] = json!(same);
                negative |= !same;
            }
            if negative {
                Err(Failure::Negative(verdict))
            } else {
                Ok(Outcome::verdict(verdict))
            }
        }
        Command::Decompose { graph, level, out } => {
            let map = read_map(graph)?;
            let seq = decompose(&map, *level).map_err(|e| reduction_failure(e, "decompose"))?;
            let verdict = json!({ "level": level, "base": format!("{:?}", seq.base), "steps": seq.steps.len() });
            Ok(Outcome { verdict, artifact: Some(pretty(&seq)), out: out.clone() })
        }
        Command::Rebuild { cert, out } => {
            let seq: ConstructionSequence = serde_json::from_str(&read_input(cert)?)?;
            let map = rebuild(&seq).map_err(|e| reduction_failure(e, "rebuild"))?;
            if !is_tight(&map, seq.level) {
                return Err(Failure::Internal("a replayed sequence produced a non-tight map".into()));
            }
            let verdict = json!({ "vertices": map.n_vertices(), "edges": map.n_edges(), "level": seq.level });
            Ok(Outcome { verdict, artifact: Some(map_to_json(&map)), out: out.clone() })
        }
        Command::Generate { level, vertices, out } => {
            if *vertices < 1 {
                return Err(Failure::Input("--vertices must be at least 1".into()));
            }
            let map = generate_random_tight(*level, *vertices, cli.seed);
            let verdict = json!({ "vertices": map.n_vertices(), "edges": map.n_edges(), "level": level });
            Ok(Outcome { verdict, artifact: Some(map_to_json(&map)), out: out.clone() })
        }
        Command::Complete { graph, level, out } => {
            let map = read_map(graph)?;
            let full = complete_to_tight(&map, *level).map_err(|e| reduction_failure(e, "complete"))?;
            let spanning =
                map.edges().iter().all(|e| full.edge_index(&e.id).is_some()) && full.n_vertices() == map.n_vertices();
            if !is_tight(&full, *level) || !spanning {
                return Err(Failure::Internal("completion lost tightness or an input edge".into()));
            }
            let verdict = json!({ "added_edges": full.n_edges() - map.n_edges(), "level": level });
            Ok(Outcome { verdict, artifact: Some(map_to_json(&full)), out: out.clone() })
        }
        Command::RealizeContact { input, group: g, out } => {
            let spec = GroupSpec::parse(g)?;
            let input = read_any(input)?;
            let mut verdict = dispatch!(spec, realize_contact_with(input, spec))?;
            let artifact = pretty(&verdict["system"].take());
            verdict.as_object_mut().expect("object").remove("system");
            Ok(Outcome { verdict, artifact: Some(artifact), out: out.clone() })
        }
        Command::RealizePpt { input, surface, out } => {
            let spec = GroupSpec::parse(surface)?;
            let input = read_any(input)?;
            let mut verdict = dispatch!(spec, realize_ppt_with(input, spec))?;
            let artifact = pretty(&verdict["ppt"].take());
            verdict.as_object_mut().expect("object").remove("ppt");
            Ok(Outcome { verdict, artifact: Some(artifact), out: out.clone() })
        }
        Command::Extract { input } => {
            let verdict = match read_any(input)? {
                Input::System(AnySystem::Rational(s)) => extract_system(&s),
                Input::System(AnySystem::Sqrt3(s)) => extract_system(&s),
                Input::System(AnySystem::Float(s)) => extract_system(&s),
                Input::Ppt(AnyPpt::Rational(r)) => extract_ppt(&r),
                Input::Ppt(AnyPpt::Sqrt3(r)) => extract_ppt(&r),
                Input::Ppt(AnyPpt::Float(r)) => extract_ppt(&r),
                _ => Err(Failure::Input("expected a contact system or a pseudotriangulation".into())),
            }?;
            Ok(Outcome::verdict(verdict))
        }
        Command::Render { input, copies, out } => {
            let drawing = match read_any(input)? {
                Input::Map(m) => svg::render_map(&m, *copies),
                Input::Sequence(seq) => {
                    svg::render_map(&rebuild(&seq).map_err(|e| reduction_failure(e, "render"))?, *copies)
                }
                Input::System(AnySystem::Rational(s)) => svg::render_system(&s, *copies),
                Input::System(AnySystem::Sqrt3(s)) => svg::render_system(&s, *copies),
                Input::System(AnySystem::Float(s)) => svg::render_system(&s, *copies),
                Input::Ppt(AnyPpt::Rational(r)) => svg::render_ppt(&r, *copies),
                Input::Ppt(AnyPpt::Sqrt3(r)) => svg::render_ppt(&r, *copies),
                Input::Ppt(AnyPpt::Float(r)) => svg::render_ppt(&r, *copies),
            };
            let verdict = json!({ "copies": copies, "bytes": drawing.len() });
            Ok(Outcome { verdict, artifact: Some(drawing), out: out.clone() })
        }
        Command::Census { max_edges } => {
            let maps = enumerate_maps(*max_edges);
            let mut counts = json!({});
            let mut disagreements = Vec::new();
            for l in [1u8, 2] {
                let (mut sparse, mut tight) = (0usize, 0usize);
                for (i, map) in maps.iter().enumerate() {
                    let fast = check_sparse(map, l);
                    let slow = oracle_sparse(map, l).map_err(|e| Failure::Input(e.to_string()))?;
                    if (fast.sparse, fast.tight) != (slow.sparse, slow.tight)
                        || (map.n_edges() > 0 && !map.euler_check())
                    {
                        disagreements.push(json!({ "level": l, "index": i, "map": map_json(map) }));
                    }
                    sparse += usize::from(fast.sparse);
                    tight += usize::from(fast.tight);
                }
                counts[format!("level_{l}")] = json!({ "sparse": sparse, "tight": tight });
            }
            let verdict = json!({ "maps": maps.len(), "max_edges": max_edges, "counts": counts, "disagreements": disagreements.len() });
            if disagreements.is_empty() {
                Ok(Outcome::verdict(verdict))
            } else {
                Err(Failure::Internal(format!("checker and oracle disagree: {}", Value::Array(disagreements))))
            }
        }
        Command::Rigidity { graph, order, out } => {
            let map = read_map(graph)?;
            let spec = GroupSpec::Rotation(*order);
            if *order < 3 {
                return Err(Failure::Input(format!("rotations of order {order} are not covered; use K ≥ 3")));
            }
            let (verdict, witness) = dispatch!(spec, rigidity_with(&map))?;
            if verdict["rigid"] == json!(true) {
                Ok(Outcome { verdict, artifact: witness, out: out.clone() })
            } else {
                Err(Failure::Negative(verdict))
            }
        }
    }
}

/// A closed pipe downstream is not an error of ours.
fn print_stdout(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn print_stderr(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    let mut report = json!({
        "command": std::env::args().collect::<Vec<_>>(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
    });
    let (code, artifact_on_stdout) = match result {
        Ok(outcome) => {
            report["verdict"] = outcome.verdict;
            let mut on_stdout = false;
            if let Some(artifact) = outcome.artifact {
                match &outcome.out {
                    Some(path) => {
                        if let Err(e) = std::fs::write(path, artifact) {
                            print_stderr(&format!("error: cannot write {}: {e}", path.display()));
                            return ExitCode::from(2);
                        }
                    }
                    None => {
                        print_stdout(&artifact);
                        on_stdout = true;
                    }
                }
            }
            (0, on_stdout)
        }
        Err(Failure::Negative(verdict)) => {
            report["verdict"] = verdict;
            (1, false)
        }
        Err(Failure::Input(msg)) => {
            report["error"] = json!(msg);
            print_stderr(&format!("error: {msg}"));
            (2, false)
        }
        Err(Failure::Internal(msg)) => {
            report["error"] = json!(msg);
            print_stderr(&format!("internal failure: {msg}"));
            (3, false)
        }
    };
    report["elapsed_ms"] = json!(start.elapsed().as_millis() as u64);
    report["exit_code"] = json!(code);
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    if artifact_on_stdout || code >= 2 {
        print_stderr(&text);
    } else {
        print_stdout(&text);
    }
    ExitCode::from(code)
}
