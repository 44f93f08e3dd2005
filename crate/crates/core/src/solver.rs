//! Zero sets of the (perturbed, traceless) relation map on a product of
//! 3-spheres: residuals, a Levenberg–Marquardt solver with random restarts,
//! conjugacy-class deduplication and local dimension probes.

use nalgebra::{DMatrix, DVector, Matrix3, RowVector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohomology::{stabilizer_class, Perturbation, Stabilizer};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::{random_unit_quaternion, stream};
use crate::su2::{exp_im, ImVector, ShapeFunction, UnitQuaternion};
use crate::words::{CompiledWord, Presentation, Representation, Word};

/// Default acceptance threshold for the residual norm.
pub const ON_VARIETY_TOL: f64 = 1e-9;
/// Step size below which the iteration stops.
pub const STEP_TOL: f64 = 1e-10;
/// Max-norm distance below which two fingerprints name the same class.
pub const DEDUP_TOL: f64 = 1e-6;

/// Optional restriction of the search to a stratum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ansatz {
    #[default]
    None,
    /// Every generator lies on the circle through `i` (j, k components vanish).
    Abelian,
    /// Every generator is ±1.
    Central,
}

/// Conjugation slice: `first ↦ i`, and `second` has vanishing j-component
/// and nonnegative k-component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub first: String,
    pub second: Option<String>,
}

/// `ρ(x)ρ(y)ρ(x)⁻¹ρ(y)⁻¹ = −1`, imposed as `Re x = Re y = Re xy = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinusOne {
    pub x: Word,
    pub y: Word,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub presentation: Presentation,
    pub traceless: Vec<Word>,
    pub perturbations: Vec<Perturbation>,
    pub minus_one: Vec<MinusOne>,
    pub gauge: Option<Gauge>,
    pub ansatz: Ansatz,
    /// Words whose joint stabilizer is reported as the boundary stabilizer.
    pub boundary: Vec<Word>,
}

impl ConstraintSet {
    pub fn new(presentation: Presentation) -> Self {
        Self {
            presentation,
            traceless: Vec::new(),
            perturbations: Vec::new(),
            minus_one: Vec::new(),
            gauge: None,
            ansatz: Ansatz::None,
            boundary: Vec::new(),
        }
    }

    pub fn generators(&self) -> &[String] {
        &self.presentation.generators
    }

    pub fn validate(&self) -> Result<()> {
        self.presentation.validate()?;
        let p = &self.presentation;
        for w in self.traceless.iter().chain(&self.boundary) {
            p.check_word(w)?;
        }
        for q in &self.perturbations {
            p.check_word(&q.mu)?;
            p.check_word(&q.lambda)?;
        }
        for m in &self.minus_one {
            p.check_word(&m.x)?;
            p.check_word(&m.y)?;
        }
        if let Some(g) = &self.gauge {
            p.check_word(&Word::gen(g.first.clone()))?;
            if let Some(s) = &g.second {
                p.check_word(&Word::gen(s.clone()))?;
            }
        }
        Ok(())
    }

    fn compile(&self) -> Result<Compiled> {
        self.validate()?;
        let names = self.generators();
        let cw = |w: &Word| CompiledWord::compile(w, names);
        let idx = |s: &str| names.iter().position(|n| n == s).ok_or_else(|| Error::UnknownGenerator(s.into()));
        Ok(Compiled {
            ngen: names.len(),
            relators: self.presentation.relators.iter().map(cw).collect::<Result<_>>()?,
            traceless: self.traceless.iter().map(cw).collect::<Result<_>>()?,
            perts: self
                .perturbations
                .iter()
                .map(|p| Ok((cw(&p.mu)?, cw(&p.lambda)?, p.shape)))
                .collect::<Result<_>>()?,
            minus_one: self
                .minus_one
                .iter()
                .map(|m| Ok([cw(&m.x)?, cw(&m.y)?, cw(&m.x.concat(&m.y))?]))
                .collect::<Result<_>>()?,
            gauge: match &self.gauge {
                Some(g) => Some((idx(&g.first)?, g.second.as_deref().map(idx).transpose()?)),
                None => None,
            },
            ansatz: self.ansatz,
        })
    }
}

struct Compiled {
    ngen: usize,
    relators: Vec<CompiledWord>,
    traceless: Vec<CompiledWord>,
    perts: Vec<(CompiledWord, CompiledWord, ShapeFunction)>,
    minus_one: Vec<[CompiledWord; 3]>,
    gauge: Option<(usize, Option<usize>)>,
    ansatz: Ansatz,
}

/// Which optional row groups to include.
#[derive(Clone, Copy)]
struct Rows {
    gauge: bool,
    ansatz: bool,
}

const ALL_ROWS: Rows = Rows { gauge: true, ansatz: true };
const INTRINSIC_ROWS: Rows = Rows { gauge: false, ansatz: false };

/// Derivative of the four components of `g` under `g ↦ e^{ξ} g`, as a 4×3 matrix.
fn quat_rows(g: UnitQuaternion) -> [RowVector3<f64>; 4] {
    let r = g.im();
    [
        RowVector3::new(-r.x, -r.y, -r.z),
        RowVector3::new(g.w, r.z, -r.y),
        RowVector3::new(-r.z, g.w, r.x),
        RowVector3::new(r.y, -r.x, g.w),
    ]
}

impl Compiled {
    fn nrows(&self, rows: Rows) -> usize {
        let mut n = 4 * self.relators.len() + self.traceless.len() + 4 * self.perts.len() + 3 * self.minus_one.len();
        if rows.gauge {
            if let Some((_, s)) = self.gauge {
                n += 4 + usize::from(s.is_some());
            }
        }
        if rows.ansatz {
            n += match self.ansatz {
                Ansatz::None => 0,
                Ansatz::Abelian => 2 * self.ngen,
                Ansatz::Central => 3 * self.ngen,
            };
        }
        n
    }

    fn evaluate(&self, v: &[UnitQuaternion], rows: Rows, jac: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let m = self.nrows(rows);
        let mut r = DVector::zeros(m);
        let mut j = if jac { Some(DMatrix::zeros(m, 3 * self.ngen)) } else { None };
        let mut row = 0;

        // Four rows of `value − target` for a word value with derivative blocks.
        let put4 = |row: &mut usize, r: &mut DVector<f64>, j: &mut Option<DMatrix<f64>>, g: UnitQuaternion, target: [f64; 4], blocks: Option<&[Matrix3<f64>]>| {
            let c = g.to_array();
            for a in 0..4 {
                r[*row + a] = c[a] - target[a];
            }
            if let (Some(j), Some(blocks)) = (j.as_mut(), blocks) {
                let qr = quat_rows(g);
                for (k, b) in blocks.iter().enumerate() {
                    for a in 0..4 {
                        let d = qr[a] * b;
                        j.view_mut((*row + a, 3 * k), (1, 3)).copy_from(&d);
                    }
                }
            }
            *row += 4;
        };
        let put_re = |row: &mut usize, r: &mut DVector<f64>, j: &mut Option<DMatrix<f64>>, cw: &CompiledWord| {
            if let Some(j) = j.as_mut() {
                let (g, blocks) = cw.jacobian(v);
                r[*row] = g.w;
                let qr = quat_rows(g);
                for (k, b) in blocks.iter().enumerate() {
                    j.view_mut((*row, 3 * k), (1, 3)).copy_from(&(qr[0] * b));
                }
            } else {
                r[*row] = cw.eval(v).w;
            }
            *row += 1;
        };

        for cw in &self.relators {
            if jac {
                let (g, blocks) = cw.jacobian(v);
                put4(&mut row, &mut r, &mut j, g, [1.0, 0.0, 0.0, 0.0], Some(&blocks));
            } else {
                put4(&mut row, &mut r, &mut j, cw.eval(v), [1.0, 0.0, 0.0, 0.0], None);
            }
        }
        for cw in &self.traceless {
            put_re(&mut row, &mut r, &mut j, cw);
        }
        for (mu, lambda, shape) in &self.perts {
            if jac {
                let (l, jl) = lambda.jacobian(v);
                let (mv, jm) = mu.jacobian(v);
                let p = shape.apply(l) * mv.inverse();
                let df = shape.differential(l);
                let adp = p.ad_matrix();
                let blocks: Vec<Matrix3<f64>> = jl.iter().zip(&jm).map(|(a, b)| df * a - adp * b).collect();
                put4(&mut row, &mut r, &mut j, p, [1.0, 0.0, 0.0, 0.0], Some(&blocks));
            } else {
                let p = shape.apply(lambda.eval(v)) * mu.eval(v).inverse();
                put4(&mut row, &mut r, &mut j, p, [1.0, 0.0, 0.0, 0.0], None);
            }
        }
        for words in &self.minus_one {
            for cw in words {
                put_re(&mut row, &mut r, &mut j, cw);
            }
        }
        if rows.gauge {
            if let Some((first, second)) = self.gauge {
                let mut blocks = vec![Matrix3::zeros(); self.ngen];
                blocks[first] = Matrix3::identity();
                put4(&mut row, &mut r, &mut j, v[first], [0.0, 1.0, 0.0, 0.0], jac.then_some(&blocks[..]));
                if let Some(s) = second {
                    r[row] = v[s].y;
                    if let Some(j) = j.as_mut() {
                        j.view_mut((row, 3 * s), (1, 3)).copy_from(&quat_rows(v[s])[2]);
                    }
                    row += 1;
                }
            }
        }
        if rows.ansatz {
            let comps: &[usize] = match self.ansatz {
                Ansatz::None => &[],
                Ansatz::Abelian => &[2, 3],
                Ansatz::Central => &[1, 2, 3],
            };
            for (k, g) in v.iter().enumerate() {
                let c = g.to_array();
                let qr = quat_rows(*g);
                for &a in comps {
                    r[row] = c[a];
                    if let Some(j) = j.as_mut() {
                        j.view_mut((row, 3 * k), (1, 3)).copy_from(&qr[a]);
                    }
                    row += 1;
                }
            }
        }
        debug_assert_eq!(row, m);
        (r, j)
    }
}

/// Residual vector: relators (four components of `eval − 1` each), real parts
/// of traceless words, perturbation equations `F(λ)μ⁻¹ − 1`, the three traces
/// of each minus-one pair, then gauge and ansatz rows.
pub fn residual(c: &ConstraintSet, rho: &Representation) -> Result<DVector<f64>> {
    let rho = rho.reordered(c.generators())?;
    Ok(c.compile()?.evaluate(rho.values(), ALL_ROWS, false).0)
}

/// Analytic Jacobian of `residual` with respect to left-translations
/// `ρ(x_k) ↦ e^{u_k} ρ(x_k)`; columns are grouped by generator.
pub fn residual_jacobian(c: &ConstraintSet, rho: &Representation) -> Result<DMatrix<f64>> {
    let rho = rho.reordered(c.generators())?;
    Ok(c.compile()?.evaluate(rho.values(), ALL_ROWS, true).1.unwrap())
}

/// Jacobian of the residual without gauge and ansatz rows.
pub fn intrinsic_jacobian(c: &ConstraintSet, rho: &Representation) -> Result<DMatrix<f64>> {
    let rho = rho.reordered(c.generators())?;
    Ok(c.compile()?.evaluate(rho.values(), INTRINSIC_ROWS, true).1.unwrap())
}

pub fn residual_norm(c: &ConstraintSet, rho: &Representation) -> Result<f64> {
    Ok(residual(c, rho)?.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { restarts: 64, tol: ON_VARIETY_TOL, seed: 0, max_iter: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionPoint {
    pub rep: Representation,
    pub residual: f64,
    pub stabilizer: Stabilizer,
    #[serde(rename = "boundaryStabilizer")]
    pub boundary_stabilizer: Stabilizer,
    pub fingerprint: Vec<f64>,
}

/// Fingerprint words: products of one, two or three distinct generators in
/// increasing order. Their traces generate the SU(2) character ring.
pub fn fingerprint_words(names: &[String]) -> Vec<Word> {
    let g = names.len();
    let w = |ks: &[usize]| Word::from_letters(ks.iter().map(|&k| crate::words::Letter::new(names[k].clone(), 1)));
    let mut out = Vec::new();
    for a in 0..g {
        out.push(w(&[a]));
    }
    for a in 0..g {
        for b in a + 1..g {
            out.push(w(&[a, b]));
        }
    }
    for a in 0..g {
        for b in a + 1..g {
            for c in b + 1..g {
                out.push(w(&[a, b, c]));
            }
        }
    }
    out
}

/// Conjugation-invariant vector `(Re ρ(w))` over `fingerprint_words`.
pub fn fingerprint(rho: &Representation) -> Vec<f64> {
    let v = rho.values();
    let g = v.len();
    let mut out = Vec::with_capacity(g + g * g / 2 + g * g * g / 6);
    out.extend(v.iter().map(|q| q.w));
    for a in 0..g {
        for b in a + 1..g {
            out.push((v[a] * v[b]).w);
        }
    }
    for a in 0..g {
        for b in a + 1..g {
            let ab = v[a] * v[b];
            for c in b + 1..g {
                out.push((ab * v[c]).w);
            }
        }
    }
    out
}

pub fn fingerprint_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn boundary_rep(c: &ConstraintSet, rho: &Representation) -> Result<Representation> {
    let names: Vec<String> = (0..c.boundary.len()).map(|k| format!("b{k}")).collect();
    let values = c.boundary.iter().map(|w| crate::words::eval_word(w, rho)).collect::<Result<Vec<_>>>()?;
    Representation::new(names, values)
}

/// Builds a solution record from a representation, recomputing its residual.
pub fn solution_point(c: &ConstraintSet, rho: &Representation) -> Result<SolutionPoint> {
    let rep = rho.reordered(c.generators())?;
    let residual = residual_norm(c, &rep)?;
    let stabilizer = stabilizer_class(&rep);
    let boundary_stabilizer =
        if c.boundary.is_empty() { stabilizer } else { stabilizer_class(&boundary_rep(c, &rep)?) };
    let fingerprint = fingerprint(&rep);
    Ok(SolutionPoint { rep, residual, stabilizer, boundary_stabilizer, fingerprint })
}

/// Puts a representation into the gauge slice by conjugation: `first ↦ i`
/// when it is traceless, then `second` into the i–k half plane.
pub fn gauge_normalize(rho: &Representation, gauge: &Gauge) -> Result<Representation> {
    let mut r = rho.clone();
    let first = r.get(&gauge.first)?;
    if let Ok(q) = crate::su2::axis(first) {
        let h = crate::sampling::rotation_between(q, ImVector::I);
        r = r.conjugate(h);
    }
    if let Some(s) = &gauge.second {
        let g = r.get(s)?;
        let (y, z) = (g.y, g.z);
        if y.hypot(z) > 1e-14 {
            // Rotate about i by the angle taking (y, z) to (0, +|·|).
            let phi = z.atan2(y) - std::f64::consts::FRAC_PI_2;
            let h = exp_im(ImVector::I.scale(-phi / 2.0));
            r = r.conjugate(h);
        }
    }
    Ok(r)
}

/// Result of one descent run.
struct Run {
    values: Vec<UnitQuaternion>,
    residual: f64,
}

fn retract(values: &[UnitQuaternion], step: &DVector<f64>) -> Vec<UnitQuaternion> {
    values
        .iter()
        .enumerate()
        .map(|(k, &g)| (exp_im(ImVector::new(step[3 * k], step[3 * k + 1], step[3 * k + 2])) * g).renormalized())
        .collect()
}

fn levenberg_marquardt(c: &Compiled, start: Vec<UnitQuaternion>, cfg: &SolverConfig) -> Run {
    let mut values = start;
    let (mut r, _) = c.evaluate(&values, ALL_ROWS, false);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let n = 3 * c.ngen;
    for _ in 0..cfg.max_iter {
        if cost.sqrt() < 1e-15 {
            break;
        }
        let (r0, j) = c.evaluate(&values, ALL_ROWS, true);
        r = r0;
        let j = j.unwrap();
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        let mut improved = false;
        let mut step_norm = 0.0;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = -chol.solve(&g);
            step_norm = step.norm();
            let trial = retract(&values, &step);
            let (rt, _) = c.evaluate(&trial, ALL_ROWS, false);
            let ct = rt.norm_squared();
            if ct < cost {
                values = trial;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved || step_norm < STEP_TOL {
            break;
        }
    }
    let residual = c.evaluate(&values, ALL_ROWS, false).0.norm();
    Run { values, residual }
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("HOLO_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(k) if k > 0 => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Random-restart descent. Returns every converged point (residual below
/// `cfg.tol`), in restart order. Deterministic for a fixed seed.
pub fn solve_raw(c: &ConstraintSet, cfg: &SolverConfig) -> Result<Vec<SolutionPoint>> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let compiled = c.compile()?;
    let runs: Vec<Run> = with_pool(|| {
        (0..cfg.restarts)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(cfg.seed, k as u64);
                let start = (0..compiled.ngen).map(|_| random_unit_quaternion(&mut rng)).collect();
                levenberg_marquardt(&compiled, start, cfg)
            })
            .collect()
    });
    let mut out = Vec::new();
    for run in runs {
        if run.residual >= cfg.tol {
            continue;
        }
        let mut rep = Representation::new(c.generators().to_vec(), run.values)?;
        if let Some(g) = &c.gauge {
            if let Some(s) = &g.second {
                if rep.get(s)?.z < 0.0 {
                    rep = rep.conjugate(UnitQuaternion::I);
                }
            }
        }
        let p = solution_point(c, &rep)?;
        if p.residual < cfg.tol {
            out.push(p);
        }
    }
    Ok(out)
}

/// Runs the descent from a given starting representation.
pub fn polish(c: &ConstraintSet, start: &Representation, max_iter: usize) -> Result<SolutionPoint> {
    let compiled = c.compile()?;
    let start = start.reordered(c.generators())?;
    let cfg = SolverConfig { max_iter, ..Default::default() };
    let run = levenberg_marquardt(&compiled, start.values().to_vec(), &cfg);
    solution_point(c, &Representation::new(c.generators().to_vec(), run.values)?)
}

/// Solves and deduplicates; output is sorted by fingerprint.
pub fn solve_variety(c: &ConstraintSet, cfg: &SolverConfig) -> Result<Vec<SolutionPoint>> {
    Ok(dedup_classes(solve_raw(c, cfg)?))
}

fn cmp_fingerprint(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// One representative per conjugacy class (fingerprints within `DEDUP_TOL`),
/// keeping the lowest-residual member; sorted by fingerprint.
pub fn dedup_classes(mut points: Vec<SolutionPoint>) -> Vec<SolutionPoint> {
    points.sort_by(|a, b| a.residual.total_cmp(&b.residual).then_with(|| cmp_fingerprint(&a.fingerprint, &b.fingerprint)));
    let mut kept: Vec<SolutionPoint> = Vec::new();
    for p in points {
        if !kept.iter().any(|q| fingerprint_distance(&q.fingerprint, &p.fingerprint) < DEDUP_TOL) {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| cmp_fingerprint(&a.fingerprint, &b.fingerprint));
    kept
}

/// Local dimension of the solution set at `p` modulo conjugation: nullity of
/// the intrinsic Jacobian (no gauge, no ansatz rows) minus the dimension of
/// the conjugation orbit.
pub fn local_rank(c: &ConstraintSet, p: &SolutionPoint) -> Result<usize> {
    let rep = p.rep.reordered(c.generators())?;
    let compiled = c.compile()?;
    let (r, j) = compiled.evaluate(rep.values(), INTRINSIC_ROWS, true);
    let res = r.norm();
    if res > 10.0 * ON_VARIETY_TOL {
        return Err(Error::NotOnVariety(res));
    }
    let kernel = linalg::nullity(&j.unwrap());
    let orbit = 3 - crate::cohomology::dim_h0(&rep);
    Ok(kernel.saturating_sub(orbit))
}

/// Nullity of the intrinsic Jacobian at `rho`.
pub fn kernel_dimension(c: &ConstraintSet, rho: &Representation) -> Result<usize> {
    Ok(linalg::nullity(&intrinsic_jacobian(c, rho)?))
}
