//! SU(2) as unit quaternions and su(2) as imaginary quaternions.
//!
//! Conventions: `q = w + x i + y j + z k`, `Re(q) = w`. The inner product on
//! su(2) is `⟨u, v⟩ = −Re(uv)`, which is the Euclidean dot product of the
//! imaginary parts, so `⟨i, i⟩ = 1`. Every element off the center has a unique
//! polar form `e^{αQ} = cos α + sin α Q` with `0 < α < π` and `Q` a unit
//! imaginary quaternion.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Matrix3;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Distance of `|Re g|` from 1 below which `g` is treated as ±1.
pub const CENTRAL_TOL: f64 = 1e-10;

/// `|Re g|` at or below this counts as traceless.
pub const TRACELESS_TOL: f64 = 1e-10;

/// Element of su(2), written in the basis `{i, j, k}`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ImVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ImVector {
    pub const ZERO: ImVector = ImVector { x: 0.0, y: 0.0, z: 0.0 };
    pub const I: ImVector = ImVector { x: 1.0, y: 0.0, z: 0.0 };
    pub const J: ImVector = ImVector { x: 0.0, y: 1.0, z: 0.0 };
    pub const K: ImVector = ImVector { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// `⟨u, v⟩ = −Re(uv)`.
    pub fn inner(self, other: ImVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, o: ImVector) -> ImVector {
        ImVector::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(self, s: f64) -> ImVector {
        ImVector::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn as_quaternion(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }
}

impl Add for ImVector {
    type Output = ImVector;
    fn add(self, o: ImVector) -> ImVector {
        ImVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for ImVector {
    fn add_assign(&mut self, o: ImVector) {
        *self = *self + o;
    }
}

impl Sub for ImVector {
    type Output = ImVector;
    fn sub(self, o: ImVector) -> ImVector {
        ImVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for ImVector {
    type Output = ImVector;
    fn neg(self) -> ImVector {
        ImVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for ImVector {
    type Output = ImVector;
    fn mul(self, s: f64) -> ImVector {
        self.scale(s)
    }
}

impl Serialize for ImVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ImVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(ImVector::from_array(a))
    }
}

/// Plain (not necessarily unit) quaternion, used for intermediate algebra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn im(self) -> ImVector {
        ImVector::new(self.x, self.y, self.z)
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, b: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

/// Element of SU(2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const MINUS_ONE: UnitQuaternion = UnitQuaternion { w: -1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: UnitQuaternion = UnitQuaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: UnitQuaternion = UnitQuaternion { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: UnitQuaternion = UnitQuaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizing constructor. Panics on a zero or non-finite input.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self::try_new(w, x, y, z).expect("cannot normalize a zero or non-finite quaternion")
    }

    pub fn try_new(w: f64, x: f64, y: f64, z: f64) -> Option<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-300 {
            return None;
        }
        Some(Self { w: w / n, x: x / n, y: y / n, z: z / n })
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_quaternion(q: Quaternion) -> Self {
        Self::new(q.w, q.x, q.y, q.z)
    }

    pub fn as_quaternion(self) -> Quaternion {
        Quaternion::new(self.w, self.x, self.y, self.z)
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn im(self) -> ImVector {
        ImVector::new(self.x, self.y, self.z)
    }

    pub fn inverse(self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn neg(self) -> Self {
        Self { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn renormalized(self) -> Self {
        Self::new(self.w, self.x, self.y, self.z)
    }

    pub fn norm_defect(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z - 1.0).abs()
    }

    pub fn is_traceless(self) -> bool {
        self.w.abs() <= TRACELESS_TOL
    }

    pub fn is_central(self) -> bool {
        1.0 - self.w.abs() < CENTRAL_TOL
    }

    /// Euclidean distance in ℝ⁴.
    pub fn distance(self, o: UnitQuaternion) -> f64 {
        let d = [self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z];
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Adjoint action `v ↦ g v g⁻¹`.
    pub fn ad(self, v: ImVector) -> ImVector {
        (self.as_quaternion() * v.as_quaternion() * self.inverse().as_quaternion()).im()
    }

    /// Matrix of `Ad_g` on su(2) in the basis `{i, j, k}` (a rotation).
    pub fn ad_matrix(self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            w * w + x * x - y * y - z * z,
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            w * w - x * x + y * y - z * z,
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            w * w - x * x - y * y + z * z,
        )
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, b: UnitQuaternion) -> UnitQuaternion {
        let q = self.as_quaternion() * b.as_quaternion();
        UnitQuaternion { w: q.w, x: q.x, y: q.y, z: q.z }
    }
}

impl fmt::Display for UnitQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.w, self.x, self.y, self.z)
    }
}

impl Serialize for UnitQuaternion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitQuaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let a = <[f64; 4]>::deserialize(d)?;
        UnitQuaternion::try_new(a[0], a[1], a[2], a[3])
            .ok_or_else(|| serde::de::Error::custom("quaternion has zero or non-finite norm"))
    }
}

/// `exp(v) = cos‖v‖ + sin‖v‖ · v/‖v‖`.
pub fn exp_im(v: ImVector) -> UnitQuaternion {
    let a = v.norm();
    if a < 1e-300 {
        return UnitQuaternion::IDENTITY;
    }
    let s = a.sin() / a;
    UnitQuaternion::new(a.cos(), v.x * s, v.y * s, v.z * s)
}

/// Polar decomposition `g = e^{αQ}` with `α ∈ (0, π)`.
pub fn log_axis(g: UnitQuaternion) -> Result<(f64, ImVector)> {
    if g.is_central() {
        return Err(Error::CentralElement);
    }
    let im = g.im();
    let n = im.norm();
    if n == 0.0 {
        return Err(Error::CentralElement);
    }
    // atan2 keeps full precision near the poles where acos does not.
    let alpha = n.atan2(g.w);
    Ok((alpha, im.scale(1.0 / n)))
}

/// The axis map `H(g) = (g − Re g)/‖g − Re g‖`.
pub fn axis(g: UnitQuaternion) -> Result<ImVector> {
    log_axis(g).map(|(_, q)| q)
}

/// Holonomy shape: an odd, 2π-periodic `f` acting by `e^{αQ} ↦ e^{f(α)Q}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ShapeFunction {
    Zero,
    Sine { t: f64 },
}

impl ShapeFunction {
    pub fn sine(t: f64) -> Self {
        ShapeFunction::Sine { t }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        match *self {
            ShapeFunction::Zero => 0.0,
            ShapeFunction::Sine { t } => t * alpha.sin(),
        }
    }

    pub fn derivative(&self, alpha: f64) -> f64 {
        match *self {
            ShapeFunction::Zero => 0.0,
            ShapeFunction::Sine { t } => t * alpha.cos(),
        }
    }

    /// Antiderivative `ψ` with `ψ' = f`, normalized by `ψ(α) = −t cos α`.
    pub fn antiderivative(&self, alpha: f64) -> f64 {
        match *self {
            ShapeFunction::Zero => 0.0,
            ShapeFunction::Sine { t } => -t * alpha.cos(),
        }
    }

    /// `F(e^{αQ}) = e^{f(α)Q}`; central elements map to 1.
    pub fn apply(&self, g: UnitQuaternion) -> UnitQuaternion {
        match log_axis(g) {
            Ok((alpha, q)) => exp_im(q.scale(self.eval(alpha))),
            Err(_) => UnitQuaternion::IDENTITY,
        }
    }

    /// Right-translated differential of `F` at `g`:
    /// `u ↦ d/ds F(e^{su} g) F(g)⁻¹ |_{s=0}`.
    ///
    /// Along the axis `Q` this is `f'(α)`; on the orthogonal plane it is
    /// `sin f(α) / sin α` times the rotation about `Q` by `f(α) − α`.
    pub fn differential(&self, g: UnitQuaternion) -> Matrix3<f64> {
        if let ShapeFunction::Zero = self {
            return Matrix3::zeros();
        }
        let (alpha, q) = match log_axis(g) {
            Ok(p) if p.0.sin().abs() > 1e-6 => p,
            _ => return self.differential_fd(g),
        };
        let b = self.eval(alpha);
        let par = self.derivative(alpha);
        let scale = b.sin() / alpha.sin();
        let theta = b - alpha;
        let qv = nalgebra::Vector3::new(q.x, q.y, q.z);
        let proj = qv * qv.transpose();
        let cross = Matrix3::new(0.0, -q.z, q.y, q.z, 0.0, -q.x, -q.y, q.x, 0.0);
        let perp = Matrix3::identity() - proj;
        proj * par + (perp * theta.cos() + cross * theta.sin()) * scale
    }

    fn differential_fd(&self, g: UnitQuaternion) -> Matrix3<f64> {
        let h = 1e-6;
        let base_inv = self.apply(g).inverse();
        let mut m = Matrix3::zeros();
        for c in 0..3 {
            let mut e = [0.0; 3];
            e[c] = h;
            let u = ImVector::from_array(e);
            let p = self.apply(exp_im(u) * g) * base_inv;
            let n = self.apply(exp_im(-u) * g) * base_inv;
            let d = (p.im() - n.im()).scale(1.0 / (2.0 * h));
            m[(0, c)] = d.x;
            m[(1, c)] = d.y;
            m[(2, c)] = d.z;
        }
        m
    }
}

/// Shorthand for `f.apply(g)`.
pub fn shape_apply(f: &ShapeFunction, g: UnitQuaternion) -> UnitQuaternion {
    f.apply(g)
}

pub(crate) fn vec3(v: ImVector) -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(v.x, v.y, v.z)
}

#[cfg(test)]
pub(crate) fn imvec(v: &nalgebra::Vector3<f64>) -> ImVector {
    ImVector::new(v[0], v[1], v[2])
}
