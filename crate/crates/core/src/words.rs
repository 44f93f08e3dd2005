//! Free-group words, presentations and representations, with word evaluation,
//! Fox-calculus derivatives and the Artin braid action.

use std::collections::HashMap;
use std::fmt;

use nalgebra::Matrix3;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::su2::UnitQuaternion;

/// Products longer than this are renormalized to bound rounding drift.
const RENORM_EVERY: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: String,
    /// +1 or −1.
    pub exp: i8,
}

impl Letter {
    pub fn new(gen: impl Into<String>, exp: i8) -> Self {
        debug_assert!(exp == 1 || exp == -1);
        Self { gen: gen.into(), exp }
    }

    pub fn inverse(&self) -> Letter {
        Letter { gen: self.gen.clone(), exp: -self.exp }
    }
}

/// A freely reduced word. Every constructor reduces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn gen(name: impl Into<String>) -> Self {
        Self { letters: vec![Letter::new(name, 1)] }
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(it: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in it {
            match out.last() {
                Some(p) if p.gen == l.gen && p.exp == -l.exp => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Self { letters: out }
    }

    /// Parses whitespace-separated tokens such as `"A1 D1 A1^-1"`.
    /// `1` alone denotes the empty word.
    pub fn parse(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, exp) = match tok.strip_suffix("^-1") {
                Some(n) => (n, -1),
                None => match tok.strip_suffix("^1") {
                    Some(n) => (n, 1),
                    None => (tok, 1),
                },
            };
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::Parse(format!("bad token `{tok}` in word `{s}`")));
            }
            letters.push(Letter::new(name, exp));
        }
        Ok(Self::from_letters(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(Letter::inverse).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).cloned())
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Word>>(words: I) -> Word {
        Word::from_letters(words.into_iter().flat_map(|w| w.letters.iter().cloned()))
    }

    /// `[u, v] = u v u⁻¹ v⁻¹`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        Word::product([u, v, &u.inverse(), &v.inverse()])
    }

    /// Replaces each generator by a word; generators absent from `map` stay.
    pub fn substitute(&self, map: &HashMap<String, Word>) -> Word {
        let mut out = Vec::new();
        for l in &self.letters {
            match map.get(&l.gen) {
                Some(w) if l.exp == 1 => out.extend(w.letters.iter().cloned()),
                Some(w) => out.extend(w.inverse().letters),
                None => out.push(l.clone()),
            }
        }
        Word::from_letters(out)
    }

    pub fn generators(&self) -> impl Iterator<Item = &str> {
        self.letters.iter().map(|l| l.gen.as_str())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", l.gen)?;
            if l.exp < 0 {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Presentation {
    pub generators: Vec<String>,
    #[serde(default)]
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self> {
        let p = Self { generators, relators };
        p.validate()?;
        Ok(p)
    }

    pub fn free(generators: Vec<String>) -> Self {
        Self { generators, relators: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for g in &self.generators {
            if !seen.insert(g.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate generator `{g}`")));
            }
        }
        for r in &self.relators {
            self.check_word(r)?;
        }
        Ok(())
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        for g in w.generators() {
            if !self.generators.iter().any(|x| x == g) {
                return Err(Error::UnknownGenerator(g.to_string()));
            }
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }
}

/// Values of the generators, kept in presentation order.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    names: Vec<String>,
    values: Vec<UnitQuaternion>,
}

impl Representation {
    pub fn new(names: Vec<String>, values: Vec<UnitQuaternion>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::InvalidArgument("names and values differ in length".into()));
        }
        Ok(Self { names, values })
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, UnitQuaternion)>) -> Self {
        let (names, values) = pairs.into_iter().map(|(n, v)| (n.into(), v)).unzip();
        Self { names, values }
    }

    pub fn constant(names: &[String], value: UnitQuaternion) -> Self {
        Self { names: names.to_vec(), values: vec![value; names.len()] }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[UnitQuaternion] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [UnitQuaternion] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|g| g == name)
    }

    pub fn get(&self, name: &str) -> Result<UnitQuaternion> {
        self.index_of(name)
            .map(|k| self.values[k])
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn set(&mut self, name: &str, value: UnitQuaternion) -> Result<()> {
        let k = self.index_of(name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        self.values[k] = value;
        Ok(())
    }

    /// `h ρ h⁻¹`.
    pub fn conjugate(&self, h: UnitQuaternion) -> Representation {
        let hi = h.inverse();
        Self { names: self.names.clone(), values: self.values.iter().map(|&g| h * g * hi).collect() }
    }

    pub fn max_distance(&self, other: &Representation) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.distance(*b)).fold(0.0, f64::max)
    }

    /// Reorders (and restricts) to the given generator list.
    pub fn reordered(&self, names: &[String]) -> Result<Representation> {
        let values = names.iter().map(|n| self.get(n)).collect::<Result<Vec<_>>>()?;
        Ok(Self { names: names.to_vec(), values })
    }
}

impl Serialize for Representation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.names.len()))?;
        for (n, v) in self.names.iter().zip(&self.values) {
            m.serialize_entry(n, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for Representation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Representation;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map from generator names to [w,x,y,z]")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> std::result::Result<Representation, A::Error> {
                let mut names = Vec::new();
                let mut values = Vec::new();
                while let Some((k, v)) = a.next_entry::<String, UnitQuaternion>()? {
                    names.push(k);
                    values.push(v);
                }
                Ok(Representation { names, values })
            }
        }
        d.deserialize_map(V)
    }
}

/// A word with letters resolved to generator indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledWord {
    /// (generator index, inverted?)
    pub letters: Vec<(usize, bool)>,
}

impl CompiledWord {
    pub fn compile(w: &Word, names: &[String]) -> Result<Self> {
        let letters = w
            .letters()
            .iter()
            .map(|l| {
                names
                    .iter()
                    .position(|n| *n == l.gen)
                    .map(|k| (k, l.exp < 0))
                    .ok_or_else(|| Error::UnknownGenerator(l.gen.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { letters })
    }

    pub fn eval(&self, values: &[UnitQuaternion]) -> UnitQuaternion {
        let mut acc = UnitQuaternion::IDENTITY;
        for (k, &(g, inv)) in self.letters.iter().enumerate() {
            let x = if inv { values[g].inverse() } else { values[g] };
            acc = acc * x;
            if (k + 1) % RENORM_EVERY == 0 {
                acc = acc.renormalized();
            }
        }
        if self.letters.len() > RENORM_EVERY {
            acc = acc.renormalized();
        }
        acc
    }

    /// Value and right-translated derivative blocks, one per generator.
    pub fn jacobian(&self, values: &[UnitQuaternion]) -> (UnitQuaternion, Vec<Matrix3<f64>>) {
        let mut blocks = vec![Matrix3::zeros(); values.len()];
        let mut prefix = UnitQuaternion::IDENTITY;
        for (k, &(g, inv)) in self.letters.iter().enumerate() {
            if inv {
                prefix = prefix * values[g].inverse();
                blocks[g] -= prefix.ad_matrix();
            } else {
                blocks[g] += prefix.ad_matrix();
                prefix = prefix * values[g];
            }
            if (k + 1) % RENORM_EVERY == 0 {
                prefix = prefix.renormalized();
            }
        }
        (prefix, blocks)
    }
}

pub fn eval_word(w: &Word, rho: &Representation) -> Result<UnitQuaternion> {
    Ok(CompiledWord::compile(w, rho.names())?.eval(rho.values()))
}

/// Blocks `J_k` with `d/ds eval(w, ρ_s) eval(w, ρ)⁻¹ = Σ_k J_k u_k` for
/// `ρ_s(x_k) = e^{s u_k} ρ(x_k)`. Blocks follow the order of `ρ.names()`.
pub fn word_jacobian(w: &Word, rho: &Representation) -> Result<Vec<Matrix3<f64>>> {
    Ok(CompiledWord::compile(w, rho.names())?.jacobian(rho.values()).1)
}

/// Name of the `k`-th free generator (1-based) acted on by braids.
pub fn braid_generator(k: usize) -> String {
    format!("x{k}")
}

/// Applies the Artin automorphism of a braid to `w`. The braid is a list of
/// nonzero integers, `k` for σ_k and `−k` for σ_k⁻¹, applied left to right.
pub fn artin_act(braid: &[i32], w: &Word, strands: usize) -> Result<Word> {
    for &b in braid {
        if b == 0 || b.unsigned_abs() as usize >= strands {
            return Err(Error::IndexOutOfRange { index: b, strands });
        }
    }
    let mut out = w.clone();
    for &b in braid {
        let k = b.unsigned_abs() as usize;
        let xk = Word::gen(braid_generator(k));
        let xk1 = Word::gen(braid_generator(k + 1));
        let mut map = HashMap::new();
        if b > 0 {
            map.insert(braid_generator(k), Word::product([&xk, &xk1, &xk.inverse()]));
            map.insert(braid_generator(k + 1), xk);
        } else {
            map.insert(braid_generator(k), xk1.clone());
            map.insert(braid_generator(k + 1), Word::product([&xk1.inverse(), &xk, &xk1]));
        }
        out = out.substitute(&map);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{exp_im, ImVector};

    fn rep(pairs: &[(&str, UnitQuaternion)]) -> Representation {
        Representation::from_pairs(pairs.iter().map(|(n, v)| (n.to_string(), *v)))
    }

    #[test]
    fn parse_and_display() {
        let w = Word::parse("A1 D1 A1^-1").unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.to_string(), "A1 D1 A1^-1");
        assert_eq!(Word::parse("x y y^-1 x^-1").unwrap(), Word::empty());
        assert_eq!(Word::empty().to_string(), "1");
        assert!(Word::parse("x^2").is_err());
    }

    #[test]
    fn eval_examples() {
        let r = rep(&[("x", UnitQuaternion::I), ("y", UnitQuaternion::J)]);
        assert_eq!(eval_word(&Word::parse("x").unwrap(), &r).unwrap(), UnitQuaternion::I);
        let g = eval_word(&Word::parse("x y x^-1").unwrap(), &r).unwrap();
        assert!(g.distance(UnitQuaternion::J.neg()) < 1e-15);
        assert_eq!(eval_word(&Word::empty(), &r).unwrap(), UnitQuaternion::IDENTITY);
        assert_eq!(
            eval_word(&Word::parse("z").unwrap(), &r),
            Err(Error::UnknownGenerator("z".into()))
        );
    }

    #[test]
    fn jacobian_examples() {
        let g = exp_im(ImVector::new(0.4, -0.9, 0.3));
        let r = rep(&[("x", g)]);
        let j = word_jacobian(&Word::parse("x").unwrap(), &r).unwrap();
        assert!((j[0] - Matrix3::identity()).abs().max() < 1e-15);
        let j = word_jacobian(&Word::parse("x x").unwrap(), &r).unwrap();
        assert!((j[0] - (Matrix3::identity() + g.ad_matrix())).abs().max() < 1e-14);
        let j = word_jacobian(&Word::parse("x^-1").unwrap(), &r).unwrap();
        assert!((j[0] + g.inverse().ad_matrix()).abs().max() < 1e-14);
    }

    #[test]
    fn artin_examples() {
        let x1 = Word::gen("x1");
        let x2 = Word::gen("x2");
        assert_eq!(artin_act(&[1], &x1, 2).unwrap(), Word::parse("x1 x2 x1^-1").unwrap());
        assert_eq!(artin_act(&[1], &x2, 2).unwrap(), x1);
        let w = Word::parse("x1 x2^-1 x1 x2").unwrap();
        assert_eq!(artin_act(&[1, -1], &w, 2).unwrap(), w);
        assert_eq!(
            artin_act(&[2], &x1, 2),
            Err(Error::IndexOutOfRange { index: 2, strands: 2 })
        );
    }

    #[test]
    fn representation_json_keeps_order() {
        let r = rep(&[("b", UnitQuaternion::I), ("a", UnitQuaternion::J)]);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"b":[0.0,1.0,0.0,0.0],"a":[0.0,0.0,1.0,0.0]}"#);
        let back: Representation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
