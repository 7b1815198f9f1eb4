//! Dense linear-algebra kernels.
//!
//! Decompositions are delegated to `nalgebra`; this module adds the contracts the
//! rest of the crate relies on (symmetry checks, eigenvalue clamping, descending
//! singular values with a deterministic sign convention).

use nalgebra::{Cholesky, Dyn, SymmetricEigen, SVD};

use crate::{Error, RealMatrix, RealVector, Result};

/// Relative symmetry tolerance accepted by the SPD/PSD routines.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Eigenvalues above this (but below zero) are treated as round-off and clamped.
pub const INDEFINITE_TOL: f64 = 1e-6;

pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn all_finite(m: &RealMatrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Largest `|A_ij - A_ji|`.
pub fn asymmetry(a: &RealMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(a: &RealMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::dims(format!("expected a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    if !all_finite(a) {
        return Err(Error::NonFinite("matrix"));
    }
    let asym = asymmetry(a);
    if asym > SYMMETRY_TOL * max_abs(a).max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Cholesky factor of a symmetric positive-definite matrix, reused for many solves.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(a: &RealMatrix) -> Result<Self> {
        check_symmetric(a).map_err(|e| match e {
            Error::NotSymmetric(_) => Error::NonSpd,
            other => other,
        })?;
        let chol = Cholesky::new(a.clone()).ok_or(Error::NonSpd)?;
        Ok(Self { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &RealMatrix) -> Result<RealMatrix> {
        if b.nrows() != self.dim() {
            return Err(Error::dims(format!("rhs has {} rows, factor is {}", b.nrows(), self.dim())));
        }
        Ok(self.chol.solve(b))
    }

    /// `A⁻¹ b`. Panics on a length mismatch; callers own both sides.
    pub fn solve_vec(&self, b: &RealVector) -> RealVector {
        self.chol.solve(b)
    }

    /// `bᵀ A⁻¹ b`, computed as `‖L⁻¹ b‖²`.
    pub fn inv_quad(&self, b: &RealVector) -> f64 {
        let mut y = b.clone();
        self.chol.l_dirty().solve_lower_triangular_mut(&mut y);
        y.norm_squared()
    }

    pub fn ln_det(&self) -> f64 {
        self.chol.ln_determinant()
    }
}

/// Solves `A X = B` for symmetric positive-definite `A`.
pub fn spd_solve(a: &RealMatrix, b: &RealMatrix) -> Result<RealMatrix> {
    if b.nrows() != a.nrows() {
        return Err(Error::dims(format!("A is {}x{}, B has {} rows", a.nrows(), a.ncols(), b.nrows())));
    }
    SpdFactor::new(a)?.solve(b)
}

/// Symmetric square root of a positive-semidefinite matrix via eigendecomposition.
///
/// Eigenvalues in `[-1e-6, 0)` are clamped to zero; anything more negative is an error.
pub fn psd_sqrt(a: &RealMatrix) -> Result<RealMatrix> {
    check_symmetric(a)?;
    let eig = SymmetricEigen::new(a.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -INDEFINITE_TOL {
        return Err(Error::IndefiniteMatrix(min));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let s = v * RealMatrix::from_diagonal(&roots) * v.transpose();
    Ok((&s + s.transpose()) * 0.5)
}

/// Top-`k` left singular vectors and singular values, descending.
///
/// Each returned column is signed so its largest-magnitude entry is positive.
pub fn svd_top_k(a: &RealMatrix, k: usize) -> Result<(RealMatrix, RealVector)> {
    let (rows, cols) = a.shape();
    if k == 0 || k > rows.min(cols) {
        return Err(Error::dims(format!("k = {k} outside 1..={} for a {rows}x{cols} matrix", rows.min(cols))));
    }
    if !all_finite(a) {
        return Err(Error::NonFinite("matrix"));
    }
    let svd = SVD::try_new(a.clone(), true, false, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let u = svd.u.ok_or(Error::NoConvergence)?;
    let sigma = svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    // Stable sort keeps the decomposition's own order among exact ties.
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let mut basis = RealMatrix::zeros(rows, k);
    let mut values = RealVector::zeros(k);
    for (out, &src) in order.iter().take(k).enumerate() {
        let mut col = u.column(src).into_owned();
        let pivot = col.iter().copied().fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
        basis.set_column(out, &col);
        values[out] = sigma[src].max(0.0);
    }
    Ok((basis, values))
}

/// Numerical rank of `a` using the usual `max(m, n) · ε · σ_max` cutoff.
pub fn numerical_rank(a: &RealMatrix) -> Result<usize> {
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let smax = svd.singular_values.max();
    let tol = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * smax;
    Ok(svd.singular_values.iter().filter(|&&s| s > tol).count())
}

/// `M + x xᵀ`.
pub fn gram_rank1_update(m: &RealMatrix, x: &RealVector) -> Result<RealMatrix> {
    let mut out = m.clone();
    gram_rank1_update_mut(&mut out, x)?;
    Ok(out)
}

pub fn gram_rank1_update_mut(m: &mut RealMatrix, x: &RealVector) -> Result<()> {
    if !m.is_square() || m.nrows() != x.len() {
        return Err(Error::dims(format!("gram is {}x{}, vector has {} entries", m.nrows(), m.ncols(), x.len())));
    }
    let n = x.len();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] += x[i] * x[j];
        }
    }
    Ok(())
}
