//! Discrete blurring operator: `y = S_h u` solves the Neumann problem
//! `(α K + M) y = M u`, and the adjoint state `p` solves the same system
//! driven by the misfit `y − y_d`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{self, BandedCholesky, FeFunction, FeSystem, SparseMatrix};
use crate::mesh::Mesh;

/// Poincaré constant used by default in the stability constant.
pub const DEFAULT_POINCARE: f64 = 1.0 / PI;

/// Relative residual used for blur solves that fall back to CG.
pub const BLUR_TOL: f64 = 1e-12;

#[derive(Debug)]
pub struct BlurOperator {
    system: Arc<FeSystem>,
    alpha: f64,
    poincare: f64,
    matrix: SparseMatrix,
    factor: Option<BandedCholesky>,
    tol: f64,
}

impl BlurOperator {
    pub fn new(system: Arc<FeSystem>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!(
                "blurring strength must be positive, got {alpha}"
            )));
        }
        let matrix =
            SparseMatrix::linear_combination(&[(alpha, &system.stiffness), (1.0, &system.mass)])?;
        let factor = if fem::prefers_direct(&matrix) {
            Some(BandedCholesky::factor(&matrix)?)
        } else {
            None
        };
        Ok(Self {
            system,
            alpha,
            poincare: DEFAULT_POINCARE,
            matrix,
            factor,
            tol: BLUR_TOL,
        })
    }

    /// Convenience constructor assembling the finite-element system too.
    pub fn on_mesh(mesh: Arc<Mesh>, alpha: f64) -> Result<Self> {
        Self::new(Arc::new(FeSystem::new(mesh)), alpha)
    }

    pub fn with_poincare_constant(mut self, c_p: f64) -> Result<Self> {
        if !(c_p > 0.0) {
            return Err(Error::invalid("Poincaré constant must be positive"));
        }
        self.poincare = c_p;
        Ok(self)
    }

    /// Forces the iterative solver with relative residual `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.factor = None;
        self
    }

    /// True when solves use a banded Cholesky factor rather than CG.
    pub fn is_direct(&self) -> bool {
        self.factor.is_some()
    }

    pub fn system(&self) -> &Arc<FeSystem> {
        &self.system
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.system.mesh()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn poincare_constant(&self) -> f64 {
        self.poincare
    }

    /// The cached system matrix `αK + M`.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// `C_s(α) = 1 / (1 + α / C_p)`.
    pub fn stability_constant(&self) -> f64 {
        1.0 / (1.0 + self.alpha / self.poincare)
    }

    fn max_iter(&self) -> usize {
        20 * self.system.num_nodes() + 200
    }

    /// Solves `(αK + M) x = load`; the iterative path warm-starts from `x`.
    pub(crate) fn solve_load(&self, load: &[f64], x: &mut [f64]) -> Result<()> {
        match &self.factor {
            Some(f) => {
                f.solve_into(load, x);
                Ok(())
            }
            None => {
                fem::solve_spd_from(&self.matrix, load, x, self.tol, self.max_iter()).map(|_| ())
            }
        }
    }

    /// `S_h` on raw coefficients, warm-starting from `guess`.
    pub(crate) fn apply_coeffs(&self, u: &[f64], guess: &mut [f64]) -> Result<()> {
        let load = self.system.mass.mul_vec(u);
        self.solve_load(&load, guess)
    }

    fn check_mesh(&self, f: &FeFunction) -> Result<()> {
        if Arc::ptr_eq(f.mesh(), self.mesh()) || **f.mesh() == **self.mesh() {
            Ok(())
        } else {
            Err(Error::invalid(
                "function is not on the blur operator's mesh",
            ))
        }
    }

    /// `y_h = S_h u`.
    pub fn apply(&self, u: &FeFunction) -> Result<FeFunction> {
        self.check_mesh(u)?;
        let mut y = vec![0.0; u.coeffs().len()];
        self.apply_coeffs(u.coeffs(), &mut y)?;
        FeFunction::new(self.mesh().clone(), y)
    }

    /// Blurs an arbitrary function given pointwise, using the quadrature load
    /// `∫ f φ_i` instead of an interpolant.
    pub fn apply_sampled(&self, f: impl Fn(&[f64]) -> f64) -> Result<FeFunction> {
        let load = fem::load_vector(self.mesh(), f);
        let mut y = vec![0.0; load.len()];
        self.solve_load(&load, &mut y)?;
        FeFunction::new(self.mesh().clone(), y)
    }

    /// Forward state `y = S_h u_prev` followed by the adjoint state `p`
    /// solving `(αK + M) p = M (y − y_d)`.
    pub fn adjoint_chain(
        &self,
        u_prev: &FeFunction,
        y_d: &FeFunction,
    ) -> Result<(FeFunction, FeFunction)> {
        self.check_mesh(u_prev)?;
        self.check_mesh(y_d)?;
        let n = u_prev.coeffs().len();
        let mut state = AdjointState::new(n);
        state.update(self, u_prev.coeffs(), y_d.coeffs())?;
        Ok((
            FeFunction::new(self.mesh().clone(), state.y)?,
            FeFunction::new(self.mesh().clone(), state.p)?,
        ))
    }
}

/// Forward and adjoint states kept between iterations so each solve can be
/// warm-started from the previous one.
#[derive(Debug, Clone)]
pub(crate) struct AdjointState {
    pub y: Vec<f64>,
    pub p: Vec<f64>,
}

impl AdjointState {
    pub fn new(n: usize) -> Self {
        Self {
            y: vec![0.0; n],
            p: vec![0.0; n],
        }
    }

    pub fn update(&mut self, op: &BlurOperator, u: &[f64], y_d: &[f64]) -> Result<()> {
        op.apply_coeffs(u, &mut self.y)?;
        let misfit: Vec<f64> = self.y.iter().zip(y_d).map(|(a, b)| a - b).collect();
        op.apply_coeffs(&misfit, &mut self.p)
    }
}
