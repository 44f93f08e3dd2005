//! SVD-based rank and kernel helpers shared by the cohomology, solver and probe code.

use nalgebra::{DMatrix, DVector};

/// Singular values below `RANK_REL_TOL · σ_max` count as zero.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Absolute floor so that an all-zero matrix has rank 0.
const RANK_ABS_TOL: f64 = 1e-12;

fn threshold(sv: &DVector<f64>) -> f64 {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    (RANK_REL_TOL * smax).max(RANK_ABS_TOL)
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let tol = threshold(&sv);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis of `ker m`, as columns.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // nalgebra computes a thin SVD, so pad to at least square to get all of V.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let tol = threshold(&svd.singular_values);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(k, _)| vt.row(k).transpose())
        .collect();
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols)
}

pub fn nullity(m: &DMatrix<f64>) -> usize {
    m.ncols() - rank(m)
}

/// Stacks matrices with equal column counts.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let ncols = blocks.iter().map(|b| b.ncols()).max().unwrap_or(0);
    let nrows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(nrows, ncols);
    let mut r = 0;
    for b in blocks {
        assert!(b.nrows() == 0 || b.ncols() == ncols, "column mismatch in vstack");
        if b.nrows() > 0 {
            out.view_mut((r, 0), (b.nrows(), ncols)).copy_from(*b);
        }
        r += b.nrows();
    }
    out
}
