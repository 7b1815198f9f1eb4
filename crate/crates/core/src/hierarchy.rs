//! Coarse-to-fine feature hierarchies learned from existing user profiles.
//!
//! A hierarchy pairs the full `D`-dimensional feature space with a coarse
//! `K`-dimensional subspace given by `U ∈ R^{D×K}`. Actions project as
//! `x̃ = Uᵀx` and a preference vector splits as `w = U w̃ + w⊥`.
//!
//! [`learn_u`] builds `U = U₀ Ω^{1/2}` from the top-`K` left singular vectors
//! `U₀` of the profile matrix and the trace-constrained weighting `Ω` that
//! minimises `Σ_w w̃₀ᵀ Ω⁻¹ w̃₀` (see [`solve_omega`]).

use nalgebra::SymmetricEigen;

use crate::numerics::{numerical_rank, psd_sqrt, spd_solve, svd_top_k, SpdFactor};
use crate::{Error, RealMatrix, RealVector, Result};

/// Pre-existing user profiles, one per column of a `D × N` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSet {
    w: RealMatrix,
}

impl ProfileSet {
    pub fn new(w: RealMatrix) -> Result<Self> {
        if w.nrows() == 0 || w.ncols() == 0 {
            return Err(Error::InvalidProfiles("profile matrix is empty".into()));
        }
        if !w.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("profiles"));
        }
        if let Some(j) = w.column_iter().position(|c| c.iter().all(|&v| v == 0.0)) {
            return Err(Error::InvalidProfiles(format!("profile {j} is all zeros")));
        }
        Ok(Self { w })
    }

    pub fn from_columns(cols: &[RealVector]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::InvalidProfiles("no profiles".into()));
        }
        Self::new(RealMatrix::from_columns(cols))
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn len(&self) -> usize {
        self.w.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.w.ncols() == 0
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.w
    }

    pub fn profile(&self, i: usize) -> RealVector {
        self.w.column(i).into_owned()
    }

    /// Column mean, the `w̄` used by the mean-regularized baseline.
    pub fn mean(&self) -> RealVector {
        self.w.column_mean()
    }

    /// All profiles except column `i`; `None` if that would leave nothing.
    pub fn without(&self, i: usize) -> Option<Self> {
        if self.len() < 2 || i >= self.len() {
            return None;
        }
        Some(Self { w: self.w.clone().remove_column(i) })
    }
}

/// A two-level feature hierarchy.
///
/// `u_d` carries an optional full-rank reshaping of the feature space. When
/// `composed` is set, `U` was learned on the reshaped profiles and contexts are
/// mapped through `U_Dᵀ` before they reach `U`; otherwise `U_D` is only used by
/// the reshape baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    /// `U = U₀ Ω^{1/2}`, `D × K`.
    pub u: RealMatrix,
    /// Orthonormal basis of the subspace, `D × K`.
    pub u0: RealMatrix,
    /// Singular values of the (possibly ridge-augmented) profile matrix behind `u0`.
    pub singular_values: RealVector,
    /// `K × K`, symmetric PSD, trace `K`.
    pub omega: RealMatrix,
    /// Optional `D × D` reshaping transform.
    pub u_d: Option<RealMatrix>,
    pub composed: bool,
}

impl Hierarchy {
    /// Hierarchy spanned by an orthonormal basis with `Ω = I`.
    pub fn orthonormal(u0: RealMatrix) -> Result<Self> {
        let k = u0.ncols();
        let gram = u0.transpose() * &u0;
        if (gram - RealMatrix::identity(k, k)).abs().max() > 1e-8 {
            return Err(Error::dims("basis columns are not orthonormal"));
        }
        Ok(Self {
            u: u0.clone(),
            u0,
            singular_values: RealVector::from_element(k, 1.0),
            omega: RealMatrix::identity(k, k),
            u_d: None,
            composed: false,
        })
    }

    /// The first `k` coordinate axes of `R^dim`.
    pub fn coordinate(dim: usize, k: usize) -> Result<Self> {
        if k == 0 || k > dim {
            return Err(Error::dims(format!("K = {k} outside 1..={dim}")));
        }
        Self::orthonormal(RealMatrix::identity(dim, k))
    }

    pub fn with_reshape(mut self, u_d: RealMatrix) -> Result<Self> {
        if u_d.nrows() != self.dim() || !u_d.is_square() {
            return Err(Error::dims(format!("U_D is {}x{}, expected {}x{}", u_d.nrows(), u_d.ncols(), self.dim(), self.dim())));
        }
        if condition_number(&u_d).is_infinite() {
            return Err(Error::SingularProjection);
        }
        self.u_d = Some(u_d);
        self.composed = false;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn k(&self) -> usize {
        self.u.ncols()
    }

    /// `x̃ = Uᵀx`.
    pub fn project(&self, x: &RealVector) -> RealVector {
        self.u.tr_mul(x)
    }

    /// Maps a raw context into the coordinates `U` acts on (`U_Dᵀx` when reshaped).
    pub fn to_policy_coords(&self, x: &RealVector) -> RealVector {
        match (&self.u_d, self.composed) {
            (Some(u_d), true) => u_d.tr_mul(x),
            _ => x.clone(),
        }
    }

    /// Condition number of `U_D`, if present.
    pub fn reshape_condition(&self) -> Option<f64> {
        self.u_d.as_ref().map(condition_number)
    }
}

/// 2-norm condition number via singular values; infinite when singular.
pub fn condition_number(a: &RealMatrix) -> f64 {
    let s = a.clone().singular_values();
    let (min, max) = s.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if min <= max * f64::EPSILON * a.nrows().max(a.ncols()) as f64 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn augment_with_ridge(w: &RealMatrix) -> RealMatrix {
    let d = w.nrows();
    let mut out = RealMatrix::zeros(d, w.ncols() + d);
    out.columns_mut(0, w.ncols()).copy_from(w);
    out.columns_mut(w.ncols(), d).fill_with_identity();
    out
}

/// Learns `U = U₀ Ω^{1/2}` from profiles.
///
/// With `ridge`, the profile matrix is first augmented to `[W, I_D]`.
pub fn learn_u(profiles: &ProfileSet, k: usize, ridge: bool) -> Result<Hierarchy> {
    let d = profiles.dim();
    let w = if ridge { augment_with_ridge(profiles.matrix()) } else { profiles.matrix().clone() };
    if k == 0 || k > d {
        return Err(Error::dims(format!("K = {k} outside 1..={d}")));
    }
    let rank = numerical_rank(&w)?;
    if rank < k {
        return Err(Error::RankDeficient { rank, k });
    }
    let (u0, singular_values) = svd_top_k(&w, k)?;
    let omega = solve_omega(&u0, &w)?;
    let u = &u0 * psd_sqrt(&omega)?;
    Ok(Hierarchy { u, u0, singular_values, omega, u_d: None, composed: false })
}

/// `Ω = K · √(W̃₀W̃₀ᵀ) / trace √(W̃₀W̃₀ᵀ)` with `W̃₀ = U₀ᵀW`.
pub fn solve_omega(u0: &RealMatrix, w: &RealMatrix) -> Result<RealMatrix> {
    let k = u0.ncols();
    if u0.nrows() != w.nrows() {
        return Err(Error::dims(format!("U0 has {} rows, W has {}", u0.nrows(), w.nrows())));
    }
    let gram = u0.transpose() * u0;
    if (gram - RealMatrix::identity(k, k)).abs().max() > 1e-8 {
        return Err(Error::dims("U0 columns are not orthonormal"));
    }
    let w0 = u0.transpose() * w;
    let cov = &w0 * w0.transpose();
    let root = psd_sqrt(&cov)?;
    let trace = root.trace();
    if trace < 1e-12 {
        return Err(Error::DegenerateProjection(trace));
    }
    Ok(root * (k as f64 / trace))
}

/// `Σ_w w̃₀ᵀ Ω⁻¹ w̃₀ = trace(Ω⁻¹ W̃₀W̃₀ᵀ)`, the objective `Ω` minimises.
///
/// Returns `+∞` when `Ω` is not positive-definite.
pub fn omega_objective(omega: &RealMatrix, w_tilde0: &RealMatrix) -> f64 {
    match SpdFactor::new(omega) {
        Ok(f) => w_tilde0.column_iter().map(|c| f.inv_quad(&c.into_owned())).sum(),
        Err(_) => f64::INFINITY,
    }
}

/// Split of a preference vector against a hierarchy: `w = U w̃ + w⊥`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub w_tilde: RealVector,
    pub w_perp: RealVector,
    pub s_tilde: f64,
    pub s_perp: f64,
}

/// Least-squares coefficient `w̃ = (UᵀU)⁻¹Uᵀw` and residual `w⊥ = w − U w̃`.
pub fn decompose(w: &RealVector, h: &Hierarchy) -> Result<Decomposition> {
    if w.len() != h.dim() {
        return Err(Error::dims(format!("w has {} entries, hierarchy D = {}", w.len(), h.dim())));
    }
    let utu = h.u.transpose() * &h.u;
    let rhs = RealMatrix::from_column_slice(h.k(), 1, h.u.tr_mul(w).as_slice());
    let w_tilde = spd_solve(&utu, &rhs).map_err(|_| Error::SingularProjection)?.column(0).into_owned();
    let w_perp = w - &h.u * &w_tilde;
    Ok(Decomposition { s_tilde: w_tilde.norm(), s_perp: w_perp.norm(), w_tilde, w_perp })
}

/// `U_D = LearnU([W, I_D], D).U`, a full-rank reshaping of the feature space.
pub fn learn_reshape(profiles: &ProfileSet) -> Result<RealMatrix> {
    Ok(learn_u(profiles, profiles.dim(), true)?.u)
}

/// `Ŵ = (U_DᵀU_D)⁻¹ U_Dᵀ W`.
pub fn reshape_profiles(profiles: &ProfileSet, u_d: &RealMatrix) -> Result<ProfileSet> {
    if u_d.nrows() != profiles.dim() {
        return Err(Error::dims(format!("U_D has {} rows, profiles D = {}", u_d.nrows(), profiles.dim())));
    }
    let gram = u_d.transpose() * u_d;
    let rhs = u_d.transpose() * profiles.matrix();
    let w_hat = spd_solve(&gram, &rhs).map_err(|_| Error::SingularProjection)?;
    ProfileSet::new(w_hat)
}

/// Reshape-composed hierarchy: `U_D` from all profiles, then `U = LearnU(Ŵ, K)`.
pub fn learn_composed(profiles: &ProfileSet, k: usize, ridge: bool) -> Result<Hierarchy> {
    let u_d = learn_reshape(profiles)?;
    let reshaped = reshape_profiles(profiles, &u_d)?;
    let mut h = learn_u(&reshaped, k, ridge)?.with_reshape(u_d)?;
    h.composed = true;
    Ok(h)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &RealMatrix) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
