//! Command-line front end for `holo`.

pub mod chart;
pub mod selftest;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use holo_core::cohomology::{cohomology_report, CohomologyReport, Stabilizer};
use holo_core::reduction::{
    check_hypothesis, random_abelian_boundary_point, random_abelian_traceless_point, random_traceless_point,
    restrict_to_sphere, submersion_probe, ProbeHypothesis, ProbeMap,
};
use holo_core::sampling::stream;
use holo_core::solver::{dedup_classes, local_rank, solve_raw, Ansatz, SolutionPoint, SolverConfig};
use holo_core::surface::{builtin_curves, find_curve, surface_presentation, twist_flow, CurveDatum, SurfaceModel};
use holo_core::tangles::TangleDatum;
use holo_core::words::eval_word;
use holo_core::{Error, Representation, Word};
use serde::{Deserialize, Serialize};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: m.into() }
    }
    pub fn data(m: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: m.into() }
    }
    pub fn numeric(m: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERIC, message: m.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownGenerator(_) | Error::IndexOutOfRange { .. } | Error::InvalidArgument(_) | Error::Parse(_) => {
                EXIT_USAGE
            }
            Error::NotOnVariety(_)
            | Error::NotClosed(_)
            | Error::NotIrreducible
            | Error::IncompleteCurveDatum(_)
            | Error::HypothesisViolation(_) => EXIT_DATA,
            Error::CentralElement | Error::NormalFormFailure(_) => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "holo", version, about = "Traceless SU(2) character varieties of tangles and surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a tangle's constraint system and summarize the strata.
    Solve(SolveArgs),
    /// Cohomology and stabilizer of each representation in a file.
    Classify(ClassifyArgs),
    /// Twist-flow a surface representation along a built-in curve.
    Flow(FlowArgs),
    /// Chart sphere representations (pillowcase or fingerprint) to CSV/SVG.
    Reduce(ReduceArgs),
    /// Rank of the flow probe maps at given or sampled points.
    Probe(ProbeArgs),
    /// Render a points file to SVG through a chart.
    Plot(ReduceArgs),
    /// Run every module's property suite.
    Selftest,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long, default_value_t = holo_core::solver::ON_VARIETY_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
}

impl RunConfig {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig { restarts: self.restarts, tol: self.tol, seed: self.seed, max_iter: self.max_iter }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnsatzArg {
    None,
    Abelian,
    Central,
}

impl From<AnsatzArg> for Ansatz {
    fn from(a: AnsatzArg) -> Self {
        match a {
            AnsatzArg::None => Ansatz::None,
            AnsatzArg::Abelian => Ansatz::Abelian,
            AnsatzArg::Central => Ansatz::Central,
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Tangle JSON file.
    pub tangle: Option<PathBuf>,
    /// Impose traceless meridians.
    #[arg(long)]
    pub traceless: bool,
    /// Restrict the search to one stratum; without it the generic, abelian
    /// and central searches are merged.
    #[arg(long, value_enum)]
    pub ansatz: Option<AnsatzArg>,
    #[command(flatten)]
    pub run: RunConfig,
    /// Points JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Points or representation JSON file.
    pub points: Option<PathBuf>,
    /// Tangle whose presentation (and perturbations) define the cohomology.
    #[arg(long, conflicts_with = "genus")]
    pub tangle: Option<PathBuf>,
    /// Use the closed genus-n surface presentation.
    #[arg(long)]
    pub genus: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[arg(long)]
    pub genus: Option<usize>,
    /// Curve name such as `C_I(1)` or `IV(1,2)`.
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub t: f64,
    /// Representation JSON file.
    #[arg(long)]
    pub rep: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Assert the relation and the conserved trace after flowing.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Pillowcase,
    Fingerprint,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Points or representation JSON file.
    pub points: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ChartArg::Pillowcase)]
    pub chart: ChartArg,
    /// Inputs are surface representations; restrict them to the sphere first.
    #[arg(long)]
    pub restrict: bool,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Join the charted points by a polyline in chart order.
    #[arg(long)]
    pub polyline: bool,
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    Trace,
    H1,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    IrreducibleAbelianBoundary,
    IrreducibleBoundary,
    Abelian,
    None,
}

impl From<HypothesisArg> for ProbeHypothesis {
    fn from(h: HypothesisArg) -> Self {
        match h {
            HypothesisArg::IrreducibleAbelianBoundary => ProbeHypothesis::IrreducibleAbelianBoundary,
            HypothesisArg::IrreducibleBoundary => ProbeHypothesis::IrreducibleBoundary,
            HypothesisArg::Abelian => ProbeHypothesis::Abelian,
            HypothesisArg::None => ProbeHypothesis::None,
        }
    }
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 2)]
    pub genus: usize,
    #[arg(long, value_enum, default_value_t = MapArg::Trace)]
    pub map: MapArg,
    #[arg(long, value_enum, default_value_t = HypothesisArg::IrreducibleBoundary)]
    pub hypothesis: HypothesisArg,
    /// Probe this representation instead of sampling.
    #[arg(long)]
    pub rep: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exit 4 unless every rank equals the expected value.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub selftest: bool,
}

/// Points file written by `solve` and read by `classify`, `reduce` and `plot`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointsFile {
    pub generators: Vec<String>,
    #[serde(rename = "boundaryA", default)]
    pub boundary_a: Vec<Word>,
    #[serde(rename = "boundaryB", default)]
    pub boundary_b: Vec<Word>,
    pub points: Vec<PointRecord>,
    #[serde(default)]
    pub summary: Vec<StratumSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    #[serde(flatten)]
    pub point: SolutionPoint,
    #[serde(rename = "localRank", default, skip_serializing_if = "Option::is_none")]
    pub local_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumSummary {
    pub stabilizer: Stabilizer,
    #[serde(rename = "boundaryStabilizer")]
    pub boundary_stabilizer: Stabilizer,
    pub points: usize,
    #[serde(rename = "localRanks")]
    pub local_ranks: Vec<usize>,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, s: &str) -> CliResult<()> {
    std::fs::write(path, s).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn required<'a, T>(v: &'a Option<T>, what: &str) -> CliResult<&'a T> {
    v.as_ref().ok_or_else(|| CliError::usage(format!("missing {what}")))
}

/// Representations from a points file, a JSON array of representations or a
/// single representation, with the points file's boundary words if any.
pub fn load_reps(s: &str) -> CliResult<(Vec<Representation>, Option<(Vec<Word>, Vec<Word>)>)> {
    if let Ok(f) = serde_json::from_str::<PointsFile>(s) {
        let boundary = (!f.boundary_a.is_empty()).then(|| (f.boundary_a.clone(), f.boundary_b.clone()));
        return Ok((f.points.into_iter().map(|p| p.point.rep).collect(), boundary));
    }
    if let Ok(v) = serde_json::from_str::<Vec<Representation>>(s) {
        return Ok((v, None));
    }
    serde_json::from_str::<Representation>(s)
        .map(|r| (vec![r], None))
        .map_err(|e| CliError::usage(format!("not a points or representation file: {e}")))
}

pub fn run(cli: Cli, out: &mut String) -> CliResult<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Classify(a) => cmd_classify(&a, out),
        Command::Flow(a) => cmd_flow(&a, out),
        Command::Reduce(a) => cmd_reduce(&a, false, out),
        Command::Plot(a) => cmd_reduce(&a, true, out),
        Command::Probe(a) => cmd_probe(&a, out),
        Command::Selftest => selftest::report(selftest::Suite::all(), out),
    }
}

fn summarize(points: &[PointRecord]) -> Vec<StratumSummary> {
    let mut groups: BTreeMap<(Stabilizer, Stabilizer), (usize, Vec<usize>)> = BTreeMap::new();
    for p in points {
        let g = groups.entry((p.point.stabilizer, p.point.boundary_stabilizer)).or_default();
        g.0 += 1;
        if let Some(r) = p.local_rank {
            if !g.1.contains(&r) {
                g.1.push(r);
            }
        }
    }
    groups
        .into_iter()
        .map(|((s, b), (n, mut ranks))| {
            ranks.sort_unstable();
            StratumSummary { stabilizer: s, boundary_stabilizer: b, points: n, local_ranks: ranks }
        })
        .collect()
}

pub fn cmd_solve(a: &SolveArgs, out: &mut String) -> CliResult<()> {
    if a.selftest {
        return selftest::report(&[selftest::Suite::Words, selftest::Suite::Solver], out);
    }
    let tangle = TangleDatum::from_json(&read(required(&a.tangle, "tangle file")?)?)?;
    let ansatze = match a.ansatz {
        Some(x) => vec![Ansatz::from(x)],
        None => vec![Ansatz::None, Ansatz::Abelian, Ansatz::Central],
    };
    let cfg = a.run.solver();
    let mut raw = Vec::new();
    for ans in ansatze {
        let c = tangle.constraints(a.traceless, true, ans);
        raw.extend(solve_raw(&c, &cfg)?);
    }
    let c = tangle.constraints(a.traceless, true, Ansatz::None);
    let points: Vec<PointRecord> = dedup_classes(raw)
        .into_iter()
        .map(|p| {
            let local_rank = local_rank(&c, &p).ok();
            PointRecord { point: p, local_rank }
        })
        .collect();
    let summary = summarize(&points);
    let file = PointsFile {
        generators: tangle.presentation.generators.clone(),
        boundary_a: tangle.boundary_a.clone(),
        boundary_b: tangle.boundary_b.clone(),
        points,
        summary: summary.clone(),
    };
    if let Some(p) = &a.out {
        write(p, &to_json(&file))?;
    }
    writeln!(out, "{:<10} {:<10} {:>7}  local rank", "stabilizer", "boundary", "points").unwrap();
    for s in &summary {
        let ranks: Vec<String> = s.local_ranks.iter().map(|r| r.to_string()).collect();
        writeln!(out, "{:<10} {:<10} {:>7}  {}", s.stabilizer, s.boundary_stabilizer, s.points, ranks.join(",")).unwrap();
    }
    Ok(())
}

#[derive(Serialize)]
struct Classified {
    index: usize,
    #[serde(flatten)]
    report: CohomologyReport,
}

pub fn cmd_classify(a: &ClassifyArgs, out: &mut String) -> CliResult<()> {
    if a.selftest {
        return selftest::report(&[selftest::Suite::Cohomology], out);
    }
    let (reps, _) = load_reps(&read(required(&a.points, "points file")?)?)?;
    let (pres, perts) = match (&a.tangle, a.genus) {
        (Some(t), _) => {
            let t = TangleDatum::from_json(&read(t)?)?;
            (t.presentation, t.perturbations)
        }
        (None, Some(n)) => (surface_presentation(n)?.presentation, Vec::new()),
        (None, None) => return Err(CliError::usage("classify needs --tangle or --genus")),
    };
    let mut rows = Vec::new();
    writeln!(out, "{:>5} {:<10} {:>5} {:>5}", "point", "stabilizer", "dimH0", "dimH1").unwrap();
    for (k, r) in reps.iter().enumerate() {
        let report = cohomology_report(&pres, r, &perts)?;
        writeln!(out, "{:>5} {:<10} {:>5} {:>5}", k, report.stabilizer, report.dim_h0, report.dim_h1).unwrap();
        rows.push(Classified { index: k, report });
    }
    if let Some(p) = &a.out {
        write(p, &to_json(&rows))?;
    }
    Ok(())
}

pub fn cmd_flow(a: &FlowArgs, out: &mut String) -> CliResult<()> {
    if a.selftest {
        return selftest::report(&[selftest::Suite::Surface], out);
    }
    let n = *required(&a.genus, "--genus")?;
    let model = surface_presentation(n)?;
    let curves = builtin_curves(n)?;
    let name = required(&a.curve, "--curve")?;
    let curve: &CurveDatum =
        find_curve(&curves, name).ok_or_else(|| CliError::usage(format!("unknown curve {name} at genus {n}")))?;
    let (reps, _) = load_reps(&read(required(&a.rep, "--rep")?)?)?;
    let [rho] = reps.as_slice() else {
        return Err(CliError::usage("flow takes exactly one representation"));
    };
    let rho = rho.reordered(model.generators())?;
    let err = model.relation_error(&rho)?;
    if err > holo_core::surface::VALIDATION_TOL {
        return Err(Error::NotOnVariety(err).into());
    }
    let flowed = twist_flow(&rho, curve, a.t)?;
    if a.check {
        let rel = model.relation_error(&flowed)?;
        let cons = (eval_word(&curve.curve_word, &flowed)?.re() - eval_word(&curve.curve_word, &rho)?.re()).abs();
        if rel > 1e-8 || cons > 1e-9 {
            return Err(CliError::numeric(format!("flow check failed: relation {rel:.2e}, trace drift {cons:.2e}")));
        }
        writeln!(out, "check ok: relation {rel:.1e}, trace drift {cons:.1e}").unwrap();
    }
    let json = to_json(&flowed);
    match &a.out {
        Some(p) => write(p, &json)?,
        None => out.push_str(&json),
    }
    Ok(())
}

fn sphere_reps(a: &ReduceArgs, s: &str) -> CliResult<Vec<Representation>> {
    let (reps, boundary) = load_reps(s)?;
    reps.into_iter()
        .map(|r| {
            if a.restrict {
                let n = r.len() / 2;
                let model: SurfaceModel = surface_presentation(n)?;
                return Ok(restrict_to_sphere(&model, &r.reordered(model.generators())?)?);
            }
            match &boundary {
                Some((ba, bb)) => {
                    let mut pairs = Vec::new();
                    for (i, (wa, wb)) in ba.iter().zip(bb).enumerate() {
                        pairs.push((holo_core::surface::a_gen(i + 1), eval_word(wa, &r)?));
                        pairs.push((holo_core::surface::b_gen(i + 1), eval_word(wb, &r)?));
                    }
                    Ok(Representation::from_pairs(pairs))
                }
                None => Ok(r),
            }
        })
        .collect()
}

pub fn cmd_reduce(a: &ReduceArgs, plot: bool, out: &mut String) -> CliResult<()> {
    if a.selftest {
        return selftest::report(&[selftest::Suite::Reduction], out);
    }
    if plot && a.svg.is_none() {
        return Err(CliError::usage("plot needs --svg"));
    }
    let reps = sphere_reps(a, &read(required(&a.points, "points file")?)?)?;
    let charted = match a.chart {
        ChartArg::Pillowcase => chart::pillowcase(&reps)?,
        ChartArg::Fingerprint => chart::fingerprints(&reps),
    };
    if let Some(p) = &a.csv {
        write(p, &charted.csv())?;
    }
    if let Some(p) = &a.svg {
        write(p, &charted.svg(a.polyline))?;
    }
    if a.csv.is_none() && a.svg.is_none() {
        out.push_str(&charted.csv());
    } else {
        let corners = charted.rows.iter().filter(|r| r.corner).count();
        writeln!(out, "{} points charted, {} corners", charted.rows.len(), corners).unwrap();
    }
    Ok(())
}

fn expected_rank(map: MapArg, n: usize) -> usize {
    match map {
        MapArg::Trace => n,
        MapArg::H1 => 6 * n - 6,
    }
}

pub fn cmd_probe(a: &ProbeArgs, out: &mut String) -> CliResult<()> {
    if a.selftest {
        return selftest::report(&[selftest::Suite::Probe], out);
    }
    let model = surface_presentation(a.genus)?;
    let lib = builtin_curves(a.genus)?;
    let curves: Vec<&CurveDatum> = lib.iter().filter(|c| c.complete).collect();
    let hyp = ProbeHypothesis::from(a.hypothesis);
    let map = match a.map {
        MapArg::Trace => ProbeMap::TraceAfterFlow,
        MapArg::H1 => ProbeMap::H1AfterFlow,
    };
    let points = match &a.rep {
        Some(p) => load_reps(&read(p)?)?.0,
        None => {
            let mut rng = stream(a.seed, 0);
            let mut pts = Vec::with_capacity(a.samples);
            for _ in 0..a.samples {
                let r = match a.hypothesis {
                    HypothesisArg::IrreducibleAbelianBoundary => random_abelian_boundary_point(&model, &mut rng)?,
                    HypothesisArg::Abelian => random_abelian_traceless_point(&model, &mut rng),
                    _ => random_traceless_point(&model, &mut rng),
                };
                pts.push(r);
            }
            pts
        }
    };
    let want = expected_rank(a.map, a.genus);
    let mut short = 0;
    for (k, rho) in points.iter().enumerate() {
        let rho = rho.reordered(model.generators())?;
        check_hypothesis(&model, &rho, hyp)?;
        let r = submersion_probe(&model, map, &rho, &curves, hyp)?;
        if r != want {
            short += 1;
        }
        writeln!(out, "point {k}: rank {r} of {want}").unwrap();
    }
    if a.check && short > 0 {
        return Err(CliError::numeric(format!("{short} points below full rank")));
    }
    Ok(())
}
