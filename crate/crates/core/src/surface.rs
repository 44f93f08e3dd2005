//! Closed genus-n surface groups, the 2n-punctured sphere, the library of
//! perturbation curves, their twist flows and Hamiltonians.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohomology::Cocycle;
use crate::error::{Error, Result};
use crate::sampling::{random_orthogonal, random_unit_im, random_unit_quaternion, rotation_between, stream};
use crate::su2::{exp_im, log_axis, ImVector, UnitQuaternion};
use crate::words::{CompiledWord, Presentation, Representation, Word};

/// Tolerance of the relation-preservation validator.
pub const VALIDATION_TOL: f64 = 1e-8;

pub fn a_gen(i: usize) -> String {
    format!("A{i}")
}

pub fn d_gen(i: usize) -> String {
    format!("D{i}")
}

pub fn b_gen(i: usize) -> String {
    format!("B{i}")
}

/// `⟨A_1, D_1, …, A_n, D_n | ∏[A_i, D_i]⟩` with its boundary words
/// `B_i = D_i A_i D_i⁻¹` and the punctured-sphere presentation
/// `⟨A_1, B_1, …, A_n, B_n | ∏ A_i B_i⁻¹⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceModel {
    pub n: usize,
    pub presentation: Presentation,
    pub boundary_b: Vec<Word>,
    pub sphere: Presentation,
}

impl SurfaceModel {
    pub fn relator(&self) -> &Word {
        &self.presentation.relators[0]
    }

    pub fn generators(&self) -> &[String] {
        &self.presentation.generators
    }

    /// `‖ρ(∏[A_i, D_i]) − 1‖`.
    pub fn relation_error(&self, rho: &Representation) -> Result<f64> {
        Ok(crate::words::eval_word(self.relator(), rho)?.distance(UnitQuaternion::IDENTITY))
    }
}

pub fn surface_presentation(n: usize) -> Result<SurfaceModel> {
    if n < 1 {
        return Err(Error::InvalidArgument("genus must be at least 1".into()));
    }
    let mut gens = Vec::with_capacity(2 * n);
    let mut rel = Vec::with_capacity(n);
    let mut boundary_b = Vec::with_capacity(n);
    let mut sphere_gens = Vec::with_capacity(2 * n);
    let mut sphere_rel = Vec::with_capacity(n);
    for i in 1..=n {
        let (a, d) = (Word::gen(a_gen(i)), Word::gen(d_gen(i)));
        gens.push(a_gen(i));
        gens.push(d_gen(i));
        rel.push(Word::commutator(&a, &d));
        boundary_b.push(Word::product([&d, &a, &d.inverse()]));
        sphere_gens.push(a_gen(i));
        sphere_gens.push(b_gen(i));
        sphere_rel.push(a.concat(&Word::gen(b_gen(i)).inverse()));
    }
    let presentation = Presentation::new(gens, vec![Word::product(&rel)])?;
    let sphere = Presentation::new(sphere_gens, vec![Word::product(&sphere_rel)])?;
    Ok(SurfaceModel { n, presentation, boundary_b, sphere })
}

/// How a perturbation curve acts on one generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum CurveAction {
    None,
    /// `E ↦ e^{s φ Q} ρ(E)`.
    Transverse { sign: i8, longitude: Word },
    /// `E ↦ e^{s φ Q} ρ(E) e^{−s φ Q}`.
    Arc { sign: i8, longitude: Word },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDatum {
    pub name: String,
    pub actions: BTreeMap<String, CurveAction>,
    /// Word for the curve itself, used by the Hamiltonian.
    pub curve_word: Word,
    #[serde(default)]
    pub complete: bool,
}

impl CurveDatum {
    pub fn action(&self, gen: &str) -> &CurveAction {
        self.actions.get(gen).unwrap_or(&CurveAction::None)
    }

    fn compiled(&self, names: &[String]) -> Result<Vec<(usize, bool, f64, CompiledWord)>> {
        let mut out = Vec::new();
        for (g, a) in &self.actions {
            let k = names.iter().position(|n| n == g).ok_or_else(|| Error::UnknownGenerator(g.clone()))?;
            match a {
                CurveAction::None => {}
                CurveAction::Transverse { sign, longitude } => {
                    out.push((k, false, *sign as f64, CompiledWord::compile(longitude, names)?))
                }
                CurveAction::Arc { sign, longitude } => {
                    out.push((k, true, *sign as f64, CompiledWord::compile(longitude, names)?))
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Deserialize)]
struct TransverseTemplate {
    gen: String,
    sign: i8,
    longitude: String,
}

#[derive(Debug, Deserialize)]
struct ArcTemplate {
    sign: i8,
    between: String,
    outside: String,
}

#[derive(Debug, Deserialize)]
struct FamilyTemplate {
    family: String,
    arity: usize,
    transverse: Vec<TransverseTemplate>,
    arc: Option<ArcTemplate>,
}

#[derive(Debug, Deserialize)]
struct CurveTemplates {
    families: Vec<FamilyTemplate>,
}

const CURVE_TEMPLATES: &str = include_str!("../data/curve_families.json");

/// Sectors strictly between `i` and `j` going forward cyclically in `1..=n`.
fn cyclic_between(i: usize, j: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut l = i % n + 1;
    while l != j {
        out.push(l);
        l = l % n + 1;
    }
    out
}

/// `∏ A_ℓ B_ℓ⁻¹ = ∏ [A_ℓ, D_ℓ]` over the given sectors.
fn sector_product(sectors: &[usize]) -> Word {
    let parts: Vec<Word> =
        sectors.iter().map(|&l| Word::commutator(&Word::gen(a_gen(l)), &Word::gen(d_gen(l)))).collect();
    Word::product(&parts)
}

fn expand(template: &str, i: usize, j: usize, n: usize) -> Result<Word> {
    let mut s = template.to_string();
    if s.contains("{o") || s.contains("{c") {
        let open = sector_product(&cyclic_between(i, j, n));
        let mut closed_sectors = vec![i];
        closed_sectors.extend(cyclic_between(i, j, n));
        closed_sectors.push(j);
        let closed = sector_product(&closed_sectors);
        s = s
            .replace("{o^-1}", &open.inverse().to_string())
            .replace("{o}", &open.to_string())
            .replace("{c^-1}", &closed.inverse().to_string())
            .replace("{c}", &closed.to_string());
    }
    let s = s.replace("{i}", &i.to_string()).replace("{j}", &j.to_string());
    Word::parse(&s)
}

fn expand_family(f: &FamilyTemplate, i: usize, j: usize, n: usize) -> Result<CurveDatum> {
    let name = if f.arity == 1 { format!("C_{}({i})", f.family) } else { format!("C_{}({i},{j})", f.family) };
    let mut actions = BTreeMap::new();
    let mut curve_word = None;
    for t in &f.transverse {
        let gen = t.gen.replace("{i}", &i.to_string()).replace("{j}", &j.to_string());
        let longitude = expand(&t.longitude, i, j, n)?;
        curve_word.get_or_insert_with(|| longitude.clone());
        actions.insert(gen, CurveAction::Transverse { sign: t.sign, longitude });
    }
    if let Some(arc) = &f.arc {
        let between = expand(&arc.between, i, j, n)?;
        let outside = expand(&arc.outside, i, j, n)?;
        for (sectors, lon) in [(cyclic_between(i, j, n), &between), (cyclic_between(j, i, n), &outside)] {
            for l in sectors {
                for g in [a_gen(l), d_gen(l)] {
                    actions.insert(g, CurveAction::Arc { sign: arc.sign, longitude: lon.clone() });
                }
            }
        }
    }
    let curve_word = curve_word.ok_or_else(|| Error::IncompleteCurveDatum(name.clone()))?;
    Ok(CurveDatum { name, actions, curve_word, complete: false })
}

/// Unvalidated curve data for genus `n`, in library order.
pub fn curve_templates(n: usize) -> Result<Vec<CurveDatum>> {
    if n < 2 {
        return Err(Error::InvalidArgument("the curve library needs genus at least 2".into()));
    }
    let t: CurveTemplates =
        serde_json::from_str(CURVE_TEMPLATES).map_err(|e| Error::Parse(format!("curve templates: {e}")))?;
    let mut out = Vec::new();
    for f in t.families.iter().filter(|f| f.arity == 1) {
        for i in 1..=n {
            out.push(expand_family(f, i, i, n)?);
        }
    }
    for f in t.families.iter().filter(|f| f.arity == 2) {
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                out.push(expand_family(f, i, j, n)?);
            }
        }
    }
    Ok(out)
}

/// Largest relator error after flowing random surface points by random times.
pub fn validate_curve(model: &SurfaceModel, c: &CurveDatum, points: usize, times: usize, seed: u64) -> Result<f64> {
    let mut rng = stream(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let rho = random_point(model, &mut rng);
        for _ in 0..times {
            let t = rng.random_range(-1.0..1.0);
            let flowed = flow_unchecked(&rho, c, t)?;
            worst = worst.max(model.relation_error(&flowed)?);
        }
    }
    Ok(worst)
}

/// The `8n² − 5n` library curves for genus `n`, each validated and flagged
/// complete when relation preservation holds.
pub fn builtin_curves(n: usize) -> Result<Vec<CurveDatum>> {
    let model = surface_presentation(n)?;
    let mut curves = curve_templates(n)?;
    for (k, c) in curves.iter_mut().enumerate() {
        let err = validate_curve(&model, c, 3, 3, 0x5eed ^ k as u64)?;
        c.complete = err < VALIDATION_TOL;
    }
    Ok(curves)
}

pub fn find_curve<'a>(curves: &'a [CurveDatum], name: &str) -> Option<&'a CurveDatum> {
    let key = |s: &str| s.replace(' ', "").to_ascii_uppercase();
    let want = key(name);
    curves.iter().find(|c| key(&c.name) == want || key(&c.name[2..]) == want)
}

fn flow_unchecked(rho: &Representation, c: &CurveDatum, t: f64) -> Result<Representation> {
    let values = rho.values();
    let mut out = rho.clone();
    for (k, arc, sign, lon) in c.compiled(rho.names())? {
        let Ok((alpha, q)) = log_axis(lon.eval(values)) else { continue };
        let g = exp_im(q.scale(sign * t * alpha.sin()));
        out.values_mut()[k] = if arc { g * values[k] * g.inverse() } else { g * values[k] };
    }
    Ok(out)
}

/// Twist flow of a curve for time `t` with `φ(α) = t·sin α`. Each generator
/// uses the longitude value of the input representation.
pub fn twist_flow(rho: &Representation, c: &CurveDatum, t: f64) -> Result<Representation> {
    if !c.complete {
        return Err(Error::IncompleteCurveDatum(c.name.clone()));
    }
    flow_unchecked(rho, c, t)
}

/// Composition `Φ_{t_K, C_K} ∘ … ∘ Φ_{t_1, C_1}`.
pub fn multi_flow(rho: &Representation, curves: &[&CurveDatum], t: &[f64]) -> Result<Representation> {
    if curves.len() != t.len() {
        return Err(Error::InvalidArgument(format!("{} curves but {} times", curves.len(), t.len())));
    }
    let mut r = rho.clone();
    for (c, &s) in curves.iter().zip(t) {
        r = twist_flow(&r, c, s)?;
    }
    Ok(r)
}

/// Right-translated derivative in `t` at 0 of the twist flow.
pub fn flow_cocycle(rho: &Representation, c: &CurveDatum) -> Result<Cocycle> {
    if !c.complete {
        return Err(Error::IncompleteCurveDatum(c.name.clone()));
    }
    let values = rho.values();
    let mut z = vec![ImVector::ZERO; values.len()];
    for (k, arc, sign, lon) in c.compiled(rho.names())? {
        let Ok((alpha, q)) = log_axis(lon.eval(values)) else { continue };
        let s = sign * alpha.sin();
        z[k] = if arc { (q - values[k].ad(q)).scale(s) } else { q.scale(s) };
    }
    Cocycle::new(rho.names().to_vec(), z)
}

/// `f_C(ρ) = ψ(arccos Re ρ(C))` with `ψ(α) = −t cos α`.
pub fn hamiltonian_fc(rho: &Representation, c: &CurveDatum, t: f64) -> Result<f64> {
    let v = crate::words::eval_word(&c.curve_word, rho)?;
    Ok(-t * v.re().clamp(-1.0, 1.0).acos().cos())
}

/// Random representation of the surface group, generically irreducible.
///
/// The first `n − 1` handles are Haar-random; the last handle is solved in
/// closed form so that its commutator cancels the rest.
pub fn random_point<R: Rng + ?Sized>(model: &SurfaceModel, rng: &mut R) -> Representation {
    let n = model.n;
    loop {
        let mut values = Vec::with_capacity(2 * n);
        let mut x = UnitQuaternion::IDENTITY;
        for _ in 1..n {
            let a = random_unit_quaternion(rng);
            let d = random_unit_quaternion(rng);
            x = x * a * d * a.inverse() * d.inverse();
            values.push(a);
            values.push(d);
        }
        let c = x.inverse();
        if n == 1 || c.is_central() {
            let q = random_unit_im(rng);
            values.push(exp_im(q.scale(rng.random_range(0.0..std::f64::consts::PI))));
            values.push(exp_im(q.scale(rng.random_range(0.0..std::f64::consts::PI))));
            if n == 1 {
                return Representation::new(model.generators().to_vec(), values).unwrap();
            }
            continue;
        }
        let Some(last) = solve_last_handle(c, rng) else { continue };
        values.push(last.0);
        values.push(last.1);
        return Representation::new(model.generators().to_vec(), values).unwrap();
    }
}

/// Finds `(A, D)` with `A D A⁻¹ D⁻¹ = c` for non-central `c`.
fn solve_last_handle<R: Rng + ?Sized>(c: UnitQuaternion, rng: &mut R) -> Option<(UnitQuaternion, UnitQuaternion)> {
    let (theta, q) = log_axis(c).ok()?;
    // A = e^{aP} needs Re(A⁻¹c) = Re(A), i.e. ⟨P, Q⟩ = cot(a)·tan(θ/2).
    for _ in 0..64 {
        let a = rng.random_range(0.05..std::f64::consts::PI - 0.05);
        let kappa = (theta / 2.0).tan() / a.tan();
        if kappa.abs() > 0.999 {
            continue;
        }
        let r = random_orthogonal(rng, q);
        let p = q.scale(kappa) + r.scale((1.0 - kappa * kappa).sqrt());
        let am = exp_im(p.scale(a));
        let target = am.inverse() * c;
        let (_, p2) = log_axis(target).ok()?;
        let rot = rotation_between(-p, p2);
        let twist = exp_im(p.scale(-rng.random_range(0.0..std::f64::consts::TAU)));
        return Some((am, rot * twist));
    }
    None
}

/// Random representation with all values on one circle (abelian, generically
/// non-central), conjugated by a random element.
pub fn random_abelian_point<R: Rng + ?Sized>(model: &SurfaceModel, rng: &mut R) -> Representation {
    let values =
        (0..2 * model.n).map(|_| exp_im(ImVector::I.scale(rng.random_range(0.0..std::f64::consts::TAU)))).collect();
    let rho = Representation::new(model.generators().to_vec(), values).unwrap();
    rho.conjugate(random_unit_quaternion(rng))
}

/// Random central representation (every value ±1).
pub fn random_central_point<R: Rng + ?Sized>(model: &SurfaceModel, rng: &mut R) -> Representation {
    let values = (0..2 * model.n)
        .map(|_| if rng.random::<bool>() { UnitQuaternion::IDENTITY } else { UnitQuaternion::MINUS_ONE })
        .collect();
    Representation::new(model.generators().to_vec(), values).unwrap()
}

/// Maps each generator name to its expansion in surface generators
/// (`B_i ↦ D_i A_i D_i⁻¹`), for words written over `A_i, B_i, D_i`.
pub fn boundary_substitution(model: &SurfaceModel) -> HashMap<String, Word> {
    (1..=model.n).map(|i| (b_gen(i), model.boundary_b[i - 1].clone())).collect()
}
