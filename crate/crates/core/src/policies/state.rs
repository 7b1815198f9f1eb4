use crate::numerics::{gram_rank1_update_mut, SpdFactor};
use crate::{Error, RealMatrix, RealVector, Result};

/// Rounds between full recomputations of the Gram matrix from stored history.
pub const REFRESH_INTERVAL: usize = 512;

/// Regularized least-squares sufficient statistics in one feature space:
/// `M = λI + Σ xxᵀ` and `b = Σ y x`.
#[derive(Clone, Debug)]
pub struct RidgeState {
    lambda: f64,
    gram: RealMatrix,
    xy_sum: RealVector,
    factor: SpdFactor,
    xs: Vec<RealVector>,
    ys: Vec<f64>,
}

impl RidgeState {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dims("ridge state needs dim ≥ 1"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("ridge λ must be finite and > 0, got {lambda}")));
        }
        let gram = RealMatrix::identity(dim, dim) * lambda;
        let factor = SpdFactor::new(&gram)?;
        Ok(Self { lambda, gram, xy_sum: RealVector::zeros(dim), factor, xs: Vec::new(), ys: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.xy_sum.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gram(&self) -> &RealMatrix {
        &self.gram
    }

    pub fn xy_sum(&self) -> &RealVector {
        &self.xy_sum
    }

    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    pub fn observations(&self) -> usize {
        self.ys.len()
    }

    pub fn history(&self) -> (&[RealVector], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn observe(&mut self, x: &RealVector, y: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::dims(format!("observation has {} entries, state dim {}", x.len(), self.dim())));
        }
        if !y.is_finite() || !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        self.xs.push(x.clone());
        self.ys.push(y);
        if self.ys.len().is_multiple_of(REFRESH_INTERVAL) {
            self.recompute();
        } else {
            gram_rank1_update_mut(&mut self.gram, x)?;
            self.xy_sum.axpy(y, x, 1.0);
        }
        self.factor = SpdFactor::new(&self.gram)?;
        Ok(())
    }

    fn recompute(&mut self) {
        let d = self.dim();
        let x = RealMatrix::from_columns(&self.xs);
        let y = RealVector::from_column_slice(&self.ys);
        self.gram = RealMatrix::identity(d, d) * self.lambda + &x * x.transpose();
        self.xy_sum = &x * y;
    }

    /// `M⁻¹(b + λ·prior)`; the ridge estimate shrunk toward `prior`.
    pub fn solve_toward(&self, prior: Option<&RealVector>) -> RealVector {
        match prior {
            Some(p) => self.factor.solve_vec(&(&self.xy_sum + p * self.lambda)),
            None => self.factor.solve_vec(&self.xy_sum),
        }
    }

    /// `ln det M − dim · ln λ`, i.e. `ln(det(M)/det(λI))`.
    pub fn ln_det_ratio(&self) -> f64 {
        self.factor.ln_det() - self.dim() as f64 * self.lambda.ln()
    }

    /// `(ln det M, dim · ln λ)` for callers that combine them differently.
    pub fn ln_dets(&self) -> (f64, f64) {
        (self.factor.ln_det(), self.dim() as f64 * self.lambda.ln())
    }
}

/// Online state of one policy for one user.
///
/// `full` is the `D`-dimensional Gram/target pair (`M_t`, `X_tY_tᵀ`) for every
/// variant except SubspaceUCB, where it is `K`-dimensional. `coarse` holds
/// `M̃_t` and `X̃_tY_tᵀ` for the CoFineUCB variants.
#[derive(Clone, Debug)]
pub struct PolicyState {
    pub t: usize,
    pub full: RidgeState,
    pub coarse: Option<RidgeState>,
    pub w_hat: RealVector,
    pub w_hat_tilde: RealVector,
}
