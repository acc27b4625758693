//! Double-well and double-obstacle potentials, the Ginzburg-Landau
//! functional, and the full discrete energy minimised by the solver.
//!
//! Both energies integrate the potential with lumped-mass quadrature, so the
//! obstacle energy is finite exactly when every nodal value lies in `[-1, 1]`.
//! An infinite energy is reported as `f64::INFINITY`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::blur::BlurOperator;
use crate::error::{Error, Result};
use crate::fem::{quad_form, FeFunction, FeSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Potential {
    /// `Ψ(s) = ¼ (1 − s²)²`
    SmoothDoubleWell,
    /// `Ψ(s) = ½ (1 − s²)` on `[-1, 1]`, `+∞` outside.
    DoubleObstacle,
}

impl Potential {
    pub const ALL: [Potential; 2] = [Potential::SmoothDoubleWell, Potential::DoubleObstacle];

    /// Interface energy per unit perimeter of the sharp-interface limit.
    pub fn gamma_constant(self) -> f64 {
        match self {
            Potential::SmoothDoubleWell => 4.0 * std::f64::consts::SQRT_2 / 3.0,
            Potential::DoubleObstacle => PI / 2.0,
        }
    }

    /// `σ / c(Ψ)`, the weight that makes the regularisation tend to `σ·Per`.
    pub fn sigma_eff(self, sigma: f64) -> f64 {
        sigma / self.gamma_constant()
    }

    pub fn value(self, s: f64) -> f64 {
        match self {
            Potential::SmoothDoubleWell => {
                let w = 1.0 - s * s;
                0.25 * w * w
            }
            Potential::DoubleObstacle => {
                if s.abs() <= 1.0 {
                    0.5 * (1.0 - s * s)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Potential::SmoothDoubleWell => "well",
            Potential::DoubleObstacle => "obstacle",
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "well" | "dw" | "double_well" | "smooth_double_well" => Ok(Potential::SmoothDoubleWell),
            "obstacle" | "do" | "double_obstacle" => Ok(Potential::DoubleObstacle),
            other => Err(Error::invalid(format!("unknown potential '{other}'"))),
        }
    }
}

/// Problem, model, approximation, discretisation and iteration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Blurring strength.
    pub alpha: f64,
    /// Noise variance.
    pub gamma: f64,
    /// Perimeter weight.
    pub sigma: f64,
    /// Interface width scale.
    pub epsilon: f64,
    /// Target grid width.
    pub h: f64,
    /// Smallest feature width of the ground truth.
    pub omega: f64,
    /// Splitting parameter (inverse pseudo time step).
    pub rho: f64,
    /// Stopping tolerance on successive iterates.
    pub tol: f64,
    pub max_iters: usize,
}

pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Default parameters derived from the smallest feature width `omega`.
///
/// `alpha` and `gamma` describe the problem rather than the method and are
/// left at zero; set them with [`ModelParams::with_problem`].
pub fn parameter_heuristics(omega: f64, potential: Potential) -> Result<ModelParams> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::invalid(format!(
            "feature width must be positive, got {omega}"
        )));
    }
    let (rho, tol) = match potential {
        Potential::SmoothDoubleWell => (0.833, 3e-4),
        Potential::DoubleObstacle => (0.588, 3.5e-4),
    };
    Ok(ModelParams {
        alpha: 0.0,
        gamma: 0.0,
        sigma: omega / 80.0,
        epsilon: omega / (4.0 * PI),
        h: omega / 32.0,
        omega,
        rho,
        tol,
        max_iters: DEFAULT_MAX_ITERS,
    })
}

impl ModelParams {
    pub fn with_problem(mut self, alpha: f64, gamma: f64) -> Self {
        self.alpha = alpha;
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("sigma", self.sigma),
            ("epsilon", self.epsilon),
            ("h", self.h),
            ("rho", self.rho),
            ("tol", self.tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }

    /// `σ_i / ε`, the lower bound on `ρ` for a well-posed step.
    pub fn reaction(&self, potential: Potential) -> f64 {
        potential.sigma_eff(self.sigma) / self.epsilon
    }
}

/// `(ε/2) uᵀKu + (1/ε) Σ m_i Ψ(u_i)`.
pub fn ginzburg_landau(
    system: &FeSystem,
    u: &FeFunction,
    epsilon: f64,
    potential: Potential,
) -> f64 {
    let c = u.coeffs();
    let mut well = 0.0;
    for (m, &v) in system.lumped.iter().zip(c) {
        let psi = potential.value(v);
        if psi.is_infinite() {
            return f64::INFINITY;
        }
        well += m * psi;
    }
    0.5 * epsilon * quad_form(&system.stiffness, c) + well / epsilon
}

/// `½‖y − y_d‖² + σ_i G_ε(u)` for a forward state `y = S_h u` computed by the caller.
pub(crate) fn energy_from_state(
    system: &FeSystem,
    u: &FeFunction,
    y: &[f64],
    y_d: &[f64],
    params: &ModelParams,
    potential: Potential,
) -> f64 {
    let gl = ginzburg_landau(system, u, params.epsilon, potential);
    if gl.is_infinite() {
        return f64::INFINITY;
    }
    let misfit: Vec<f64> = y.iter().zip(y_d).map(|(a, b)| a - b).collect();
    0.5 * quad_form(&system.mass, &misfit) + potential.sigma_eff(params.sigma) * gl
}

/// Full discrete energy `F_i(u) = ½‖S_h u − y_d‖² + σ_i G_ε(u)`.
pub fn total_energy(
    u: &FeFunction,
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
    potential: Potential,
) -> Result<f64> {
    u.check_same_mesh(y_d)?;
    let y = blur.apply(u)?;
    Ok(energy_from_state(
        blur.system(),
        u,
        y.coeffs(),
        y_d.coeffs(),
        params,
        potential,
    ))
}
