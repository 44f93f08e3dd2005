//! Trace and moment maps, the torus action on surface moduli, restriction to
//! the punctured sphere, the pillowcase chart for four punctures, and
//! finite-difference submersion probes for twist flows.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cohomology::{h1_basis, stabilizer_class, Stabilizer};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::rotation_between;
use crate::su2::{axis, exp_im, ImVector, UnitQuaternion, TRACELESS_TOL};
use crate::surface::{a_gen, b_gen, d_gen, multi_flow, CurveDatum, SurfaceModel};
use crate::words::{eval_word, Representation, Word};

/// Trace data `T_i = Re ρ(A_i)` and moment map `μ_i = −arcsin T_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub t: Vec<f64>,
    pub mu: Vec<f64>,
}

pub fn moment(model: &SurfaceModel, rho: &Representation) -> Result<Moment> {
    let t = (1..=model.n).map(|i| rho.get(&a_gen(i)).map(|g| g.re())).collect::<Result<Vec<_>>>()?;
    let mu = t.iter().map(|x| -x.clamp(-1.0, 1.0).asin()).collect();
    Ok(Moment { t, mu })
}

/// `(ρ·t)(D_i) = ρ(D_i) e^{t_i H(ρ(A_i))}`; the `A_i` are fixed.
pub fn torus_act(model: &SurfaceModel, rho: &Representation, t: &[f64]) -> Result<Representation> {
    if t.len() != model.n {
        return Err(Error::InvalidArgument(format!("expected {} torus parameters, got {}", model.n, t.len())));
    }
    let mut out = rho.clone();
    for i in 1..=model.n {
        let h = axis(rho.get(&a_gen(i))?)?;
        let d = rho.get(&d_gen(i))?;
        out.set(&d_gen(i), d * exp_im(h.scale(t[i - 1])))?;
    }
    Ok(out)
}

/// Representation of the punctured sphere: `A_i ↦ ρ(A_i)`, `B_i ↦ ρ(D_i A_i D_i⁻¹)`.
pub fn restrict_to_sphere(model: &SurfaceModel, rho: &Representation) -> Result<Representation> {
    let mut pairs = Vec::with_capacity(2 * model.n);
    for i in 1..=model.n {
        pairs.push((a_gen(i), rho.get(&a_gen(i))?));
        pairs.push((b_gen(i), eval_word(&model.boundary_b[i - 1], rho)?));
    }
    Ok(Representation::from_pairs(pairs))
}

/// A surface representation restricting to a given traceless sphere
/// representation: `D_i` rotates the axis of `A_i` onto that of `B_i`, then
/// is twisted by `e^{s_i A_i}`.
pub fn lift_from_sphere(model: &SurfaceModel, sphere: &Representation, twists: &[f64]) -> Result<Representation> {
    let mut pairs = Vec::with_capacity(2 * model.n);
    for i in 1..=model.n {
        let a = sphere.get(&a_gen(i))?;
        let b = sphere.get(&b_gen(i))?;
        if (a.re() - b.re()).abs() > 1e-9 {
            return Err(Error::HypothesisViolation(format!("A{i} and B{i} are not conjugate")));
        }
        let (qa, qb) = (axis(a)?, axis(b)?);
        let s = twists.get(i - 1).copied().unwrap_or(0.0);
        pairs.push((a_gen(i), a));
        pairs.push((d_gen(i), rotation_between(qa, qb) * exp_im(qa.scale(s))));
    }
    Ok(Representation::from_pairs(pairs))
}

/// Point of the pillowcase in the fundamental domain `γ ∈ [0, π]`,
/// `θ ∈ [0, 2π)`, with `θ ∈ [0, π]` on the edges `γ ∈ {0, π}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PillowcasePoint {
    pub gamma: f64,
    pub theta: f64,
}

/// Distance from an integer multiple of π below which a coordinate snaps to it.
const CHART_SNAP: f64 = 1e-9;

impl PillowcasePoint {
    pub fn is_corner(&self) -> bool {
        let at = |x: f64| x.abs() < CHART_SNAP || (x - PI).abs() < CHART_SNAP;
        at(self.gamma) && at(self.theta)
    }
}

fn snap(x: f64) -> f64 {
    for m in [0.0, PI, TAU] {
        if (x - m).abs() < CHART_SNAP {
            return if m == TAU { 0.0 } else { m };
        }
    }
    x
}

/// Folds `(γ, θ) ∈ T²` into the fundamental domain of `(γ, θ) ~ (−γ, −θ)`.
pub fn fold(gamma: f64, theta: f64) -> PillowcasePoint {
    let mut g = snap(gamma.rem_euclid(TAU));
    let mut t = snap(theta.rem_euclid(TAU));
    if g > PI {
        g = snap(TAU - g);
        t = snap((TAU - t).rem_euclid(TAU));
    }
    if (g == 0.0 || g == PI) && t > PI {
        t = snap(TAU - t);
    }
    PillowcasePoint { gamma: g, theta: t }
}

/// Normal form `ρ(A_1) = i`, `ρ(B_1) = e^{γk} i`, `ρ(A_2) = e^{θk} i` of a
/// traceless representation of the four-punctured sphere, folded.
pub fn pillowcase_chart(rho: &Representation) -> Result<PillowcasePoint> {
    let a1 = rho.get("A1")?;
    let b1 = rho.get("B1")?;
    let a2 = rho.get("A2")?;
    let b2 = rho.get("B2")?;
    if [a1, b1, a2, b2].iter().any(|g| g.re().abs() > 1e-8) {
        return Err(Error::HypothesisViolation("pillowcase chart needs a traceless representation".into()));
    }
    let h1 = rotation_between(a1.im().scale(1.0 / a1.im().norm()), ImVector::I);
    let r = rho.conjugate(h1);
    let (b1, a2) = (r.get("B1")?.im(), r.get("A2")?.im());
    // The plane of the four axes; rotate it about i onto the i–j plane.
    let pick = if b1.cross(ImVector::I).norm() > a2.cross(ImVector::I).norm() { b1 } else { a2 };
    let r = if pick.cross(ImVector::I).norm() > 1e-12 {
        let phi = pick.z.atan2(pick.y);
        r.conjugate(exp_im(ImVector::I.scale(-phi / 2.0)))
    } else {
        r
    };
    let (a1, b1, a2, b2) = (r.get("A1")?, r.get("B1")?, r.get("A2")?, r.get("B2")?);
    let relation = (a1 * b1.inverse() * a2 * b2.inverse()).distance(UnitQuaternion::IDENTITY);
    let defect = [a1.distance(UnitQuaternion::I), b1.z.abs(), a2.z.abs(), b2.z.abs(), relation]
        .into_iter()
        .fold(0.0, f64::max);
    if defect > 1e-8 {
        return Err(Error::NormalFormFailure(defect));
    }
    Ok(fold(b1.y.atan2(b1.x), a2.y.atan2(a2.x)))
}

/// Representation in normal form for given chart coordinates.
pub fn pillowcase_rep(gamma: f64, theta: f64) -> Representation {
    let ek = |s: f64| exp_im(ImVector::K.scale(s));
    let a1 = UnitQuaternion::I;
    let b1 = ek(gamma) * UnitQuaternion::I;
    let a2 = ek(theta) * UnitQuaternion::I;
    let b2 = a1 * b1.inverse() * a2;
    Representation::from_pairs([("A1", a1), ("B1", b1), ("A2", a2), ("B2", b2)])
}

/// Maps whose derivative in the flow times is probed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeMap {
    /// `T ∘ Φ_C(ρ, ·) : ℝ^K → ℝⁿ`.
    TraceAfterFlow,
    /// `Φ_C(ρ, ·)` followed by projection onto H¹ at ρ.
    H1AfterFlow,
}

/// Hypotheses under which a probe is meaningful.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeHypothesis {
    /// ρ irreducible with abelian restriction and traceless `A_i`.
    IrreducibleAbelianBoundary,
    /// ρ and its restriction irreducible, traceless `A_i`.
    IrreducibleBoundary,
    /// ρ abelian with traceless `A_i`.
    Abelian,
    /// No check.
    None,
}

pub fn check_hypothesis(model: &SurfaceModel, rho: &Representation, h: ProbeHypothesis) -> Result<()> {
    if h == ProbeHypothesis::None {
        return Ok(());
    }
    let fail = |m: String| Err(Error::HypothesisViolation(m));
    let m = moment(model, rho)?;
    if m.t.iter().any(|x| x.abs() > TRACELESS_TOL.max(1e-9)) {
        return fail("Re ρ(A_i) is not zero".into());
    }
    let s = stabilizer_class(rho);
    let sb = stabilizer_class(&restrict_to_sphere(model, rho)?);
    match h {
        ProbeHypothesis::IrreducibleAbelianBoundary if s != Stabilizer::Irreducible || sb != Stabilizer::Abelian => {
            fail(format!("need irreducible ρ with abelian restriction, got {s}/{sb}"))
        }
        ProbeHypothesis::IrreducibleBoundary if s != Stabilizer::Irreducible || sb != Stabilizer::Irreducible => {
            fail(format!("need irreducible ρ with irreducible restriction, got {s}/{sb}"))
        }
        ProbeHypothesis::Abelian if s != Stabilizer::Abelian => fail(format!("need abelian ρ, got {s}")),
        _ => Ok(()),
    }
}

const PROBE_STEP: f64 = 1e-6;

/// Finite-difference Jacobian of the probe map at `t = 0`, one column per curve.
pub fn probe_jacobian(
    model: &SurfaceModel,
    map: ProbeMap,
    rho: &Representation,
    curves: &[&CurveDatum],
) -> Result<DMatrix<f64>> {
    let k = curves.len();
    let rho = rho.reordered(model.generators())?;
    let basis = match map {
        ProbeMap::H1AfterFlow => Some(h1_basis(&model.presentation, &rho, &[])?),
        ProbeMap::TraceAfterFlow => None,
    };
    let rows = match &basis {
        Some(b) => b.ncols(),
        None => model.n,
    };
    let mut jac = DMatrix::zeros(rows, k);
    for c in 0..k {
        let mut tp = vec![0.0; k];
        tp[c] = PROBE_STEP;
        let plus = multi_flow(&rho, curves, &tp)?;
        tp[c] = -PROBE_STEP;
        let minus = multi_flow(&rho, curves, &tp)?;
        match &basis {
            None => {
                let (mp, mm) = (moment(model, &plus)?, moment(model, &minus)?);
                for i in 0..model.n {
                    jac[(i, c)] = (mp.t[i] - mm.t[i]) / (2.0 * PROBE_STEP);
                }
            }
            Some(b) => {
                // Right-translated tangent vector of the path, as a cochain.
                let mut v = nalgebra::DVector::zeros(3 * rho.len());
                for (g, base) in rho.values().iter().enumerate() {
                    let dp = (plus.values()[g] * base.inverse()).im();
                    let dm = (minus.values()[g] * base.inverse()).im();
                    let d = (dp - dm).scale(0.5 / PROBE_STEP);
                    v[3 * g] = d.x;
                    v[3 * g + 1] = d.y;
                    v[3 * g + 2] = d.z;
                }
                let proj = b.transpose() * v;
                jac.set_column(c, &proj);
            }
        }
    }
    Ok(jac)
}

/// Rank of the probe Jacobian after checking the hypotheses.
pub fn submersion_probe(
    model: &SurfaceModel,
    map: ProbeMap,
    rho: &Representation,
    curves: &[&CurveDatum],
    hypothesis: ProbeHypothesis,
) -> Result<usize> {
    check_hypothesis(model, rho, hypothesis)?;
    if curves.is_empty() {
        return Ok(0);
    }
    Ok(linalg::rank(&probe_jacobian(model, map, rho, curves)?))
}

/// Random surface representation with traceless `A_i` and generically
/// irreducible restriction: random handles with `Re A_i = 0`, closed off in
/// the last handle.
pub fn random_traceless_point<R: Rng + ?Sized>(model: &SurfaceModel, rng: &mut R) -> Representation {
    use crate::sampling::{random_orthogonal, random_unit_im, random_unit_quaternion};
    let n = model.n;
    loop {
        let mut values = Vec::with_capacity(2 * n);
        let mut x = UnitQuaternion::IDENTITY;
        for _ in 1..n {
            let q = random_unit_im(rng);
            let a = UnitQuaternion::new(0.0, q.x, q.y, q.z);
            let d = random_unit_quaternion(rng);
            x = x * a * d * a.inverse() * d.inverse();
            values.push(a);
            values.push(d);
        }
        let c = x.inverse();
        if c.is_central() && n > 1 {
            continue;
        }
        let (a, d) = if n == 1 {
            let q = random_unit_im(rng);
            (UnitQuaternion::new(0.0, q.x, q.y, q.z), exp_im(q.scale(rng.random_range(0.0..PI))))
        } else {
            // Traceless A with A D A⁻¹ D⁻¹ = c: A ⊥ axis of c, D rotates −A onto A⁻¹c.
            let (_, qc) = crate::su2::log_axis(c).expect("non-central");
            let p = random_orthogonal(rng, qc);
            let a = UnitQuaternion::new(0.0, p.x, p.y, p.z);
            let target = axis(a.inverse() * c).expect("non-central");
            let twist = exp_im(p.scale(rng.random_range(0.0..TAU)));
            (a, rotation_between(-p, target) * twist)
        };
        values.push(a);
        values.push(d);
        return Representation::new(model.generators().to_vec(), values).unwrap();
    }
}

/// Random abelian surface representation with every `A_i = ±i`.
pub fn random_abelian_traceless_point<R: Rng + ?Sized>(model: &SurfaceModel, rng: &mut R) -> Representation {
    let mut pairs = Vec::new();
    for i in 1..=model.n {
        let a = if rng.random::<bool>() { UnitQuaternion::I } else { UnitQuaternion::I.neg() };
        pairs.push((a_gen(i), a));
        pairs.push((d_gen(i), exp_im(ImVector::I.scale(rng.random_range(0.0..TAU)))));
    }
    Representation::from_pairs(pairs)
}

/// Random irreducible surface representation whose restriction to the
/// sphere is abelian: `A_i = ±i`, an even number (at least two) of handles
/// with `D_i ∈ e^{s i} j` (so `B_i = −A_i`), the rest on the circle through `i`.
pub fn random_abelian_boundary_point<R: Rng + ?Sized>(model: &SurfaceModel, rng: &mut R) -> Result<Representation> {
    let n = model.n;
    if n < 2 {
        return Err(Error::InvalidArgument("needs genus at least 2".into()));
    }
    let mut flip = vec![false; n];
    let count = 2 * rng.random_range(1..=n / 2);
    let mut chosen = 0;
    while chosen < count {
        let k = rng.random_range(0..n);
        if !flip[k] {
            flip[k] = true;
            chosen += 1;
        }
    }
    let mut pairs = Vec::new();
    for i in 1..=n {
        let a = if rng.random::<bool>() { UnitQuaternion::I } else { UnitQuaternion::I.neg() };
        let e = exp_im(ImVector::I.scale(rng.random_range(0.0..TAU)));
        pairs.push((a_gen(i), a));
        pairs.push((d_gen(i), if flip[i - 1] { e * UnitQuaternion::J } else { e }));
    }
    Ok(Representation::from_pairs(pairs))
}

/// Word list `A_1, B_1, …` in sphere generators, for fingerprints of
/// sphere representations built from surface data.
pub fn sphere_words(model: &SurfaceModel) -> Vec<Word> {
    model.sphere.generators.iter().cloned().map(Word::gen).collect()
}
