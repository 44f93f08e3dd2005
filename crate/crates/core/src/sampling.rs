//! Random elements of SU(2) and su(2), and the per-restart RNG streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::su2::{ImVector, UnitQuaternion};

/// Haar-random element: a normalized 4-dimensional Gaussian.
pub fn random_unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion {
    loop {
        let a: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if let Some(q) = UnitQuaternion::try_new(a[0], a[1], a[2], a[3]) {
            return q;
        }
    }
}

/// Uniform point on the unit sphere of su(2).
pub fn random_unit_im<R: Rng + ?Sized>(rng: &mut R) -> ImVector {
    loop {
        let v = ImVector::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v.scale(1.0 / n);
        }
    }
}

pub fn random_im<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> ImVector {
    ImVector::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)).scale(scale)
}

/// Unit vector orthogonal to `q` (assumed unit), random within that circle.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, q: ImVector) -> ImVector {
    loop {
        let v = random_unit_im(rng);
        let w = v - q.scale(v.inner(q));
        let n = w.norm();
        if n > 1e-6 {
            return w.scale(1.0 / n);
        }
    }
}

/// Rotation taking the unit vector `u` to the unit vector `w` by the shortest arc.
pub fn rotation_between(u: ImVector, w: ImVector) -> UnitQuaternion {
    let c = u.inner(w);
    if c < -1.0 + 1e-12 {
        let mut axis = u.cross(ImVector::I);
        if axis.norm() < 1e-6 {
            axis = u.cross(ImVector::J);
        }
        let a = axis.scale(1.0 / axis.norm());
        return UnitQuaternion::new(0.0, a.x, a.y, a.z);
    }
    let x = u.cross(w);
    UnitQuaternion::new(1.0 + c, x.x, x.y, x.z)
}

/// Independent stream for restart `index` under a global `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
