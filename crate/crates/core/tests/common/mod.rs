#![allow(dead_code)]

use holo_core::sampling::{random_unit_quaternion, stream};
use holo_core::su2::exp_im;
use holo_core::{ImVector, Representation, UnitQuaternion, Word};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 0)
}

pub fn names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("x{i}")).collect()
}

pub fn random_rep(names: &[String], rng: &mut ChaCha8Rng) -> Representation {
    let values = names.iter().map(|_| random_unit_quaternion(rng)).collect();
    Representation::new(names.to_vec(), values).unwrap()
}

/// Random word of the given length in the first `k` generators.
pub fn random_word(k: usize, len: usize, rng: &mut ChaCha8Rng) -> Word {
    let s: Vec<String> = (0..len)
        .map(|_| {
            let g = rng.random_range(1..=k);
            if rng.random::<bool>() { format!("x{g}") } else { format!("x{g}^-1") }
        })
        .collect();
    Word::parse(&s.join(" ")).unwrap()
}

/// `E ↦ e^{h ξ_E} ρ(E)` for one generator and one basis direction.
pub fn nudge(rho: &Representation, g: usize, a: usize, h: f64) -> Representation {
    let mut xi = [0.0; 3];
    xi[a] = h;
    let mut out = rho.clone();
    out.values_mut()[g] = exp_im(ImVector::from_array(xi)) * rho.values()[g];
    out
}

pub fn close(a: UnitQuaternion, b: UnitQuaternion, tol: f64) -> bool {
    a.distance(b) < tol
}
