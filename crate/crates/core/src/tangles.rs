//! Built-in tangle data: trivial tangles, braid-generated tangles, punctured
//! spheres and the earring-perturbed trivial 2-tangle with its circle of solutions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cohomology::Perturbation;
use crate::error::{Error, Result};
use crate::solver::{Ansatz, ConstraintSet, Gauge, MinusOne};
use crate::su2::{exp_im, ImVector, ShapeFunction, UnitQuaternion};
use crate::words::{artin_act, braid_generator, Presentation, Representation, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangleDatum {
    #[serde(flatten)]
    pub presentation: Presentation,
    pub meridians: Vec<Word>,
    #[serde(rename = "boundaryA")]
    pub boundary_a: Vec<Word>,
    #[serde(rename = "boundaryB")]
    pub boundary_b: Vec<Word>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbations: Vec<Perturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub earring: Option<MinusOne>,
}

impl TangleDatum {
    pub fn strands(&self) -> usize {
        self.boundary_a.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.presentation.validate()?;
        if self.boundary_a.len() != self.boundary_b.len() {
            return Err(Error::InvalidArgument("boundaryA and boundaryB differ in length".into()));
        }
        if self.meridians.iter().any(Word::is_empty) {
            return Err(Error::InvalidArgument("empty meridian word".into()));
        }
        if self.meridians.is_empty() && self.presentation.relators.is_empty() && self.earring.is_none() {
            return Err(Error::InvalidArgument("tangle has no constraints".into()));
        }
        let p = &self.presentation;
        for w in self.meridians.iter().chain(&self.boundary_a).chain(&self.boundary_b) {
            p.check_word(w)?;
        }
        for q in &self.perturbations {
            p.check_word(&q.mu)?;
            p.check_word(&q.lambda)?;
        }
        if let Some(e) = &self.earring {
            p.check_word(&e.x)?;
            p.check_word(&e.y)?;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: TangleDatum = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    /// Constraint system: relators and perturbations always; meridians
    /// traceless when `traceless`; the earring pair; optional gauge slice on
    /// the first meridian and the second generator.
    pub fn constraints(&self, traceless: bool, gauge: bool, ansatz: Ansatz) -> ConstraintSet {
        let mut c = ConstraintSet::new(self.presentation.clone());
        if traceless {
            c.traceless = self.meridians.clone();
        }
        c.perturbations = self.perturbations.clone();
        c.minus_one = self.earring.iter().cloned().collect();
        c.ansatz = ansatz;
        c.boundary = self.boundary_a.iter().chain(&self.boundary_b).cloned().collect();
        if gauge {
            let first = self.meridians.first().filter(|w| w.len() == 1).map(|w| w.letters()[0].gen.clone());
            if let Some(first) = first {
                let second = self.presentation.generators.iter().find(|g| **g != first).cloned();
                c.gauge = Some(Gauge { first, second });
            }
        }
        c
    }
}

fn xs(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("x{k}")).collect()
}

/// Free group on `x_1..x_n` with every generator a meridian and
/// `A_i = B_i = x_i`.
pub fn trivial_tangle(n: usize) -> Result<TangleDatum> {
    if n < 1 {
        return Err(Error::InvalidArgument("a tangle needs at least one strand".into()));
    }
    let gens = xs(n);
    let words: Vec<Word> = gens.iter().cloned().map(Word::gen).collect();
    Ok(TangleDatum {
        presentation: Presentation::free(gens),
        meridians: words.clone(),
        boundary_a: words.clone(),
        boundary_b: words,
        perturbations: Vec::new(),
        earring: None,
    })
}

/// Trivial tangle whose boundary is re-marked by a braid on the `2n`
/// boundary points.
///
/// The points are ordered `a_1, …, a_n, b_n, …, b_1`; around `a_k` the loop is
/// `x_k` and around `b_k` it is `x_k⁻¹`. The braid acts on these loops by the
/// Artin automorphism, and the new boundary words are `A_i = φ(y_{a_i})` and
/// `B_i = φ(y_{b_i})⁻¹`.
pub fn braid_tangle(braid: &[i32], n: usize) -> Result<TangleDatum> {
    let mut t = trivial_tangle(n)?;
    let m = 2 * n;
    let mut subst = HashMap::new();
    for s in 1..=m {
        let w = if s <= n { Word::gen(format!("x{s}")) } else { Word::gen(format!("x{}", m + 1 - s)).inverse() };
        subst.insert(braid_generator(s), w);
    }
    let image = |s: usize| -> Result<Word> { Ok(artin_act(braid, &Word::gen(braid_generator(s)), m)?.substitute(&subst)) };
    t.boundary_a = (1..=n).map(image).collect::<Result<_>>()?;
    t.boundary_b = (1..=n).map(|i| Ok(image(m + 1 - i)?.inverse())).collect::<Result<_>>()?;
    Ok(t)
}

/// The `2n`-punctured sphere `⟨A_i, B_i | ∏ A_i B_i⁻¹⟩` as a tangle datum.
pub fn sphere_tangle(n: usize) -> Result<TangleDatum> {
    let model = crate::surface::surface_presentation(n)?;
    let a: Vec<Word> = (1..=n).map(|i| Word::gen(crate::surface::a_gen(i))).collect();
    let b: Vec<Word> = (1..=n).map(|i| Word::gen(crate::surface::b_gen(i))).collect();
    let meridians = model.sphere.generators.iter().cloned().map(Word::gen).collect();
    Ok(TangleDatum {
        presentation: model.sphere,
        meridians,
        boundary_a: a,
        boundary_b: b,
        perturbations: Vec::new(),
        earring: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarringFamilyParams {
    pub epsilon: f64,
    pub beta: f64,
}

impl EarringFamilyParams {
    pub fn new(epsilon: f64, beta: f64) -> Self {
        Self { epsilon, beta }
    }

    /// `ν = ε sin β`.
    pub fn nu(&self) -> f64 {
        self.epsilon * self.beta.sin()
    }
}

pub const EARRING_GENERATORS: [&str; 6] = ["a", "b", "c", "d", "h", "p"];

/// Earring constraint system on the loops `a, b, c, d, h, p`: traceless
/// `a, b, c, d` and earring meridian `h`; `[a p⁻¹, h] = −1`; and the
/// perturbation `ρ(p) = F(ρ(b h))` with `f = ε sin`.
///
/// Only the constraints are modelled, not a full presentation. The boundary
/// words are `A = (b⁻¹, a⁻¹)` and `B = (c⁻¹, d⁻¹)`.
pub fn earring_tangle(epsilon: f64) -> TangleDatum {
    let gens: Vec<String> = EARRING_GENERATORS.iter().map(|s| s.to_string()).collect();
    let w = |s: &str| Word::parse(s).expect("static word");
    TangleDatum {
        presentation: Presentation::free(gens),
        meridians: vec![w("a"), w("b"), w("c"), w("d"), w("h")],
        boundary_a: vec![w("b^-1"), w("a^-1")],
        boundary_b: vec![w("c^-1"), w("d^-1")],
        perturbations: vec![Perturbation { mu: w("p"), lambda: w("b h"), shape: ShapeFunction::sine(epsilon) }],
        earring: Some(MinusOne { x: w("a p^-1"), y: w("h") }),
    }
}

/// The explicit circle of solutions:
/// `a ↦ i, b ↦ e^{(β+ν)k} j, c ↦ e^{(β−ν)k} j, d ↦ e^{−2νk} i, h ↦ −j e^{−νk}, p ↦ e^{νk}`.
pub fn earring_family(p: EarringFamilyParams) -> Representation {
    let nu = p.nu();
    let ek = |s: f64| exp_im(ImVector::K.scale(s));
    let values = vec![
        UnitQuaternion::I,
        ek(p.beta + nu) * UnitQuaternion::J,
        ek(p.beta - nu) * UnitQuaternion::J,
        ek(-2.0 * nu) * UnitQuaternion::I,
        UnitQuaternion::J.neg() * ek(-nu),
        ek(nu),
    ];
    Representation::from_pairs(EARRING_GENERATORS.iter().map(|s| s.to_string()).zip(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::residual;

    #[test]
    fn trivial_examples() {
        let t = trivial_tangle(2).unwrap();
        assert!(t.presentation.relators.is_empty());
        assert_eq!(t.boundary_a, vec![Word::gen("x1"), Word::gen("x2")]);
        assert_eq!(t.boundary_b, t.boundary_a);
        assert!(trivial_tangle(0).is_err());
    }

    #[test]
    fn braid_examples() {
        assert_eq!(braid_tangle(&[], 2).unwrap(), trivial_tangle(2).unwrap());
        let t = braid_tangle(&[1], 2).unwrap();
        assert_eq!(t.boundary_a[0], Word::parse("x1 x2 x1^-1").unwrap());
        let t = braid_tangle(&[1, 3, -2, 2, -3, -1], 2).unwrap();
        assert_eq!(t, trivial_tangle(2).unwrap());
        assert!(matches!(braid_tangle(&[4], 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn earring_family_at_zero() {
        let r = earring_family(EarringFamilyParams::new(0.13, 0.0));
        let want = [
            UnitQuaternion::I,
            UnitQuaternion::J,
            UnitQuaternion::J,
            UnitQuaternion::I,
            UnitQuaternion::J.neg(),
            UnitQuaternion::IDENTITY,
        ];
        for (v, w) in r.values().iter().zip(want) {
            assert!(v.distance(w) < 1e-15);
        }
    }

    #[test]
    fn earring_family_solves_constraints() {
        let c = earring_tangle(0.1).constraints(true, false, Ansatz::None);
        let r = earring_family(EarringFamilyParams::new(0.1, 0.0));
        assert!(residual(&c, &r).unwrap().amax() < 1e-12);
        let c = earring_tangle(0.2).constraints(true, false, Ansatz::None);
        let r = earring_family(EarringFamilyParams::new(0.2, 2.1));
        assert!(residual(&c, &r).unwrap().amax() < 1e-12);
    }

    #[test]
    fn tangle_json_round_trip() {
        let t = earring_tangle(0.1);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains(r#""shape":"sine","t":0.1"#), "{s}");
        assert_eq!(TangleDatum::from_json(&s).unwrap(), t);
    }
}
