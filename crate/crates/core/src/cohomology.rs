//! Twisted cochains of a presentation with coefficients in su(2) (via Ad∘ρ):
//! the differentials d⁰ and d¹, perturbed H¹, stabilizer classes, and the
//! Goldman form on surface H¹.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::su2::{vec3, ImVector, ShapeFunction, UnitQuaternion};
use crate::words::{CompiledWord, Presentation, Representation, Word};

/// Relator residual above which a point is rejected as off the variety.
pub const ON_VARIETY_TOL: f64 = 1e-8;

/// Closedness tolerance for cocycles.
pub const CLOSED_TOL: f64 = 1e-9;

/// Global orientation sign of the Goldman form. With this choice the twist
/// field of a curve is the Hamiltonian vector field of `−t·Re ρ(C)`.
pub const OMEGA_SIGN: f64 = -1.0;

/// Holonomy perturbation `ρ(μ) = F(ρ(λ))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub mu: Word,
    pub lambda: Word,
    #[serde(flatten)]
    pub shape: ShapeFunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stabilizer {
    #[serde(rename = "Z2")]
    Irreducible,
    #[serde(rename = "U1")]
    Abelian,
    #[serde(rename = "SU2")]
    Central,
}

impl Stabilizer {
    pub fn from_dim_h0(d: usize) -> Self {
        match d {
            0 => Stabilizer::Irreducible,
            3 => Stabilizer::Central,
            _ => Stabilizer::Abelian,
        }
    }

    pub fn dim_h0(self) -> usize {
        match self {
            Stabilizer::Irreducible => 0,
            Stabilizer::Abelian => 1,
            Stabilizer::Central => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Stabilizer::Irreducible => "Z2",
            Stabilizer::Abelian => "U1",
            Stabilizer::Central => "SU2",
        }
    }
}

impl fmt::Display for Stabilizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyReport {
    #[serde(rename = "dimH0")]
    pub dim_h0: usize,
    #[serde(rename = "dimH1")]
    pub dim_h1: usize,
    pub stabilizer: Stabilizer,
}

/// Cochain values on the generators, in generator order.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    names: Vec<String>,
    values: Vec<ImVector>,
}

impl Cocycle {
    pub fn new(names: Vec<String>, values: Vec<ImVector>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::InvalidArgument("names and values differ in length".into()));
        }
        Ok(Self { names, values })
    }

    pub fn zero(names: &[String]) -> Self {
        Self { names: names.to_vec(), values: vec![ImVector::ZERO; names.len()] }
    }

    pub fn from_vector(names: &[String], v: &DVector<f64>) -> Self {
        assert_eq!(v.len(), 3 * names.len());
        let values = (0..names.len()).map(|k| ImVector::new(v[3 * k], v[3 * k + 1], v[3 * k + 2])).collect();
        Self { names: names.to_vec(), values }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(3 * self.values.len(), self.values.iter().flat_map(|v| v.to_array()))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[ImVector] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Result<ImVector> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.values[k])
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn set(&mut self, name: &str, v: ImVector) -> Result<()> {
        let k = self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        self.values[k] = v;
        Ok(())
    }

    /// Transport under conjugation of the representation by `h`.
    pub fn conjugate(&self, h: UnitQuaternion) -> Cocycle {
        Self { names: self.names.clone(), values: self.values.iter().map(|&v| h.ad(v)).collect() }
    }

    pub fn reordered(&self, names: &[String]) -> Result<Cocycle> {
        let values = names.iter().map(|n| self.get(n)).collect::<Result<Vec<_>>>()?;
        Ok(Self { names: names.to_vec(), values })
    }
}

impl Serialize for Cocycle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.names.len()))?;
        for (n, v) in self.names.iter().zip(&self.values) {
            m.serialize_entry(n, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for Cocycle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Cocycle;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map from generator names to [x,y,z]")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> std::result::Result<Cocycle, A::Error> {
                let mut names = Vec::new();
                let mut values = Vec::new();
                while let Some((k, v)) = a.next_entry::<String, ImVector>()? {
                    names.push(k);
                    values.push(v);
                }
                Ok(Cocycle { names, values })
            }
        }
        d.deserialize_map(V)
    }
}

fn put_block(m: &mut DMatrix<f64>, r: usize, c: usize, b: &Matrix3<f64>) {
    m.view_mut((r, c), (3, 3)).copy_from(b);
}

/// `v ↦ ((Ad_{ρ(x_k)} − I) v)_k`, a `3g × 3` matrix.
pub fn d0_matrix(rho: &Representation) -> DMatrix<f64> {
    let g = rho.len();
    let mut m = DMatrix::zeros(3 * g, 3);
    for (k, q) in rho.values().iter().enumerate() {
        put_block(&mut m, 3 * k, 0, &(q.ad_matrix() - Matrix3::identity()));
    }
    m
}

/// Right-translated derivative of the augmented relation map: one 3-row block
/// per relator, then one per perturbation `F(λ) μ⁻¹`. Columns follow `ρ.names()`.
pub fn d1_matrix(pres: &Presentation, rho: &Representation, perts: &[Perturbation]) -> Result<DMatrix<f64>> {
    let names = rho.names();
    let g = names.len();
    let rows = 3 * (pres.relators.len() + perts.len());
    let mut m = DMatrix::zeros(rows, 3 * g);
    let mut r = 0;
    for rel in &pres.relators {
        let (_, blocks) = CompiledWord::compile(rel, names)?.jacobian(rho.values());
        for (k, b) in blocks.iter().enumerate() {
            put_block(&mut m, r, 3 * k, b);
        }
        r += 3;
    }
    for p in perts {
        let blocks = perturbation_jacobian(p, rho)?;
        for (k, b) in blocks.iter().enumerate() {
            put_block(&mut m, r, 3 * k, b);
        }
        r += 3;
    }
    Ok(m)
}

/// Value of `F(ρ(λ)) ρ(μ)⁻¹`.
pub fn perturbation_value(p: &Perturbation, rho: &Representation) -> Result<UnitQuaternion> {
    let l = CompiledWord::compile(&p.lambda, rho.names())?.eval(rho.values());
    let m = CompiledWord::compile(&p.mu, rho.names())?.eval(rho.values());
    Ok(p.shape.apply(l) * m.inverse())
}

/// Right-translated derivative blocks of `F(ρ(λ)) ρ(μ)⁻¹`.
pub fn perturbation_jacobian(p: &Perturbation, rho: &Representation) -> Result<Vec<Matrix3<f64>>> {
    let (l, jl) = CompiledWord::compile(&p.lambda, rho.names())?.jacobian(rho.values());
    let (m, jm) = CompiledWord::compile(&p.mu, rho.names())?.jacobian(rho.values());
    let df = p.shape.differential(l);
    let value = p.shape.apply(l) * m.inverse();
    let adp = value.ad_matrix();
    Ok(jl.iter().zip(&jm).map(|(a, b)| df * a - adp * b).collect())
}

/// Largest deviation from 1 over relators and perturbation equations.
pub fn relation_residual(pres: &Presentation, rho: &Representation, perts: &[Perturbation]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for rel in &pres.relators {
        let v = CompiledWord::compile(rel, rho.names())?.eval(rho.values());
        worst = worst.max(v.distance(UnitQuaternion::IDENTITY));
    }
    for p in perts {
        worst = worst.max(perturbation_value(p, rho)?.distance(UnitQuaternion::IDENTITY));
    }
    Ok(worst)
}

/// Dimension of the common fixed space of `Ad_{ρ(x_k)}`.
pub fn dim_h0(rho: &Representation) -> usize {
    linalg::nullity(&d0_matrix(rho))
}

pub fn stabilizer_class(rho: &Representation) -> Stabilizer {
    Stabilizer::from_dim_h0(dim_h0(rho))
}

/// Orthonormal basis (columns) of `ker d¹ ∩ (im d⁰)^⊥`, representing H¹.
pub fn h1_basis(pres: &Presentation, rho: &Representation, perts: &[Perturbation]) -> Result<DMatrix<f64>> {
    let rho = rho.reordered(&pres.generators)?;
    let res = relation_residual(pres, &rho, perts)?;
    if res > ON_VARIETY_TOL {
        return Err(Error::NotOnVariety(res));
    }
    let d1 = d1_matrix(pres, &rho, perts)?;
    let d0t = d0_matrix(&rho).transpose();
    Ok(linalg::null_space(&linalg::vstack(&[&d1, &d0t])))
}

pub fn h1_cocycles(pres: &Presentation, rho: &Representation, perts: &[Perturbation]) -> Result<Vec<Cocycle>> {
    let basis = h1_basis(pres, rho, perts)?;
    Ok(basis.column_iter().map(|c| Cocycle::from_vector(&pres.generators, &c.into_owned())).collect())
}

pub fn cohomology_report(pres: &Presentation, rho: &Representation, perts: &[Perturbation]) -> Result<CohomologyReport> {
    let dim_h1 = h1_basis(pres, rho, perts)?.ncols();
    let dim_h0 = dim_h0(&rho.reordered(&pres.generators)?);
    Ok(CohomologyReport { dim_h0, dim_h1, stabilizer: Stabilizer::from_dim_h0(dim_h0) })
}

/// Dimension of H¹ for cochains valued in the line spanned by `axis`, at a
/// representation commuting with `axis` (the trivial-coefficient summand).
pub fn h1_dimension_along(pres: &Presentation, rho: &Representation, axis: ImVector) -> Result<usize> {
    let rho = rho.reordered(&pres.generators)?;
    let g = rho.len();
    let d1 = d1_matrix(pres, &rho, &[])?;
    let a = vec3(axis) / axis.norm();
    let mut emb = DMatrix::zeros(3 * g, g);
    for k in 0..g {
        for c in 0..3 {
            emb[(3 * k + c, k)] = a[c];
        }
    }
    let z1 = linalg::nullity(&(&d1 * &emb));
    let col = d0_matrix(&rho) * a;
    let b1 = linalg::rank(&DMatrix::from_column_slice(col.len(), 1, col.as_slice()));
    Ok(z1 - b1)
}

/// Norm of `d¹ u` over the relators.
pub fn closedness_residual(pres: &Presentation, rho: &Representation, u: &Cocycle) -> Result<f64> {
    let d1 = d1_matrix(pres, &rho.reordered(&pres.generators)?, &[])?;
    let uv = u.reordered(&pres.generators)?.to_vector();
    Ok((d1 * uv).amax())
}

/// Value of the cochain `u` on each prefix of a word is accumulated by the
/// crossed-homomorphism rule; this returns `u` on a single letter.
fn letter_value(u: &[ImVector], values: &[UnitQuaternion], g: usize, inv: bool) -> ImVector {
    if inv {
        -values[g].inverse().ad(u[g])
    } else {
        u[g]
    }
}

/// Cup product of two 1-cochains evaluated on the 2-cycle of a one-relator
/// presentation, times `OMEGA_SIGN`. Does not check its hypotheses.
///
/// The bar chain of the relator is corrected by `Σ_x [x | x⁻¹]` over the
/// generators it contains so that it is a genuine cycle; without the
/// correction the pairing is not antisymmetric on cohomology.
pub fn cup_pairing(relator: &Word, rho: &Representation, u: &Cocycle, v: &Cocycle) -> Result<f64> {
    let names = rho.names();
    let cw = CompiledWord::compile(relator, names)?;
    let uu = u.reordered(names)?;
    let vv = v.reordered(names)?;
    let (uv, vv) = (uu.values(), vv.values());
    let values = rho.values();

    let mut total = 0.0;
    let mut prefix = UnitQuaternion::IDENTITY;
    let mut u_prefix = ImVector::ZERO;
    for (k, &(g, inv)) in cw.letters.iter().enumerate() {
        if k > 0 {
            total += u_prefix.inner(prefix.ad(letter_value(vv, values, g, inv)));
        }
        u_prefix += prefix.ad(letter_value(uv, values, g, inv));
        prefix = prefix * if inv { values[g].inverse() } else { values[g] };
    }
    let mut seen = vec![false; names.len()];
    for &(g, _) in &cw.letters {
        if !seen[g] {
            seen[g] = true;
            total += uv[g].inner(vv[g]);
        }
    }
    Ok(OMEGA_SIGN * total)
}

fn single_relator(surface: &Presentation) -> Result<&Word> {
    match surface.relators.as_slice() {
        [r] => Ok(r),
        _ => Err(Error::InvalidArgument("surface presentation must have exactly one relator".into())),
    }
}

fn check_form_hypotheses(surface: &Presentation, rho: &Representation) -> Result<Representation> {
    single_relator(surface)?;
    let rho = rho.reordered(&surface.generators)?;
    let res = relation_residual(surface, &rho, &[])?;
    if res > ON_VARIETY_TOL {
        return Err(Error::NotOnVariety(res));
    }
    if stabilizer_class(&rho) != Stabilizer::Irreducible {
        return Err(Error::NotIrreducible);
    }
    Ok(rho)
}

fn check_closed(surface: &Presentation, rho: &Representation, u: &Cocycle) -> Result<()> {
    let r = closedness_residual(surface, rho, u)?;
    if r > CLOSED_TOL * (1.0 + u.to_vector().amax()) {
        return Err(Error::NotClosed(r));
    }
    Ok(())
}

/// Goldman symplectic form `ω(u, v)` on H¹ of a closed surface group.
pub fn goldman_form(surface: &Presentation, rho: &Representation, u: &Cocycle, v: &Cocycle) -> Result<f64> {
    let rho = check_form_hypotheses(surface, rho)?;
    check_closed(surface, &rho, u)?;
    check_closed(surface, &rho, v)?;
    cup_pairing(single_relator(surface)?, &rho, u, v)
}

/// Largest `|ω(u_a, u_b)|` over pairs from `subspace`.
pub fn isotropy_defect(surface: &Presentation, rho: &Representation, subspace: &[Cocycle]) -> Result<f64> {
    if subspace.is_empty() {
        return Ok(0.0);
    }
    let rho = check_form_hypotheses(surface, rho)?;
    for u in subspace {
        check_closed(surface, &rho, u)?;
    }
    let rel = single_relator(surface)?;
    let mut worst: f64 = 0.0;
    for a in 0..subspace.len() {
        for b in a + 1..subspace.len() {
            worst = worst.max(cup_pairing(rel, &rho, &subspace[a], &subspace[b])?.abs());
        }
    }
    Ok(worst)
}

/// Gram matrix `ω(b_a, b_b)` on the columns of an H¹ basis.
pub fn goldman_gram(surface: &Presentation, rho: &Representation, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rho = check_form_hypotheses(surface, rho)?;
    let rel = single_relator(surface)?;
    let cs: Vec<Cocycle> =
        basis.column_iter().map(|c| Cocycle::from_vector(&surface.generators, &c.into_owned())).collect();
    let n = cs.len();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let w = cup_pairing(rel, &rho, &cs[a], &cs[b])?;
            m[(a, b)] = w;
            m[(b, a)] = -w;
        }
    }
    Ok(m)
}

/// The coboundary `d⁰ v` as a cocycle.
pub fn coboundary(rho: &Representation, v: ImVector) -> Cocycle {
    let values = rho.values().iter().map(|q| q.ad(v) - v).collect();
    Cocycle { names: rho.names().to_vec(), values }
}
