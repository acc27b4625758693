//! Convex-splitting iterations for the phase-field recovery problem.
//!
//! Every step minimises a strictly convex quadratic `½ uᵀ A u − bᵀ u`,
//! optionally over the box `[-1, 1]^n`. The blur misfit enters explicitly
//! through the adjoint state `p`, while the gradient and (linearised)
//! potential terms are implicit. The splitting parameter `ρ` plays the role
//! of an inverse time step, so a run with `ρ = 1/Δt` is exactly a
//! semi-implicit gradient flow.

use std::borrow::Cow;
use std::sync::Arc;

use log::warn;

use crate::blur::{AdjointState, BlurOperator};
use crate::error::{Error, Result};
use crate::fem::{self, FeFunction, FeSystem, SparseMatrix};
use crate::phasefield::{energy_from_state, ModelParams, Potential};

/// Max-norm change between projected Gauss-Seidel sweeps at which the inner
/// solve stops.
pub const PGS_TOL: f64 = 1e-10;
pub const PGS_MAX_SWEEPS: usize = 200_000;
/// Relative slack allowed before an energy increase is reported.
pub const MONOTONE_RTOL: f64 = 1e-12;
/// Relative residual of the linear solve inside a double-well step.
pub const STEP_CG_TOL: f64 = 1e-12;
/// Unconstrained steps with at most this half bandwidth are solved directly.
pub const DIRECT_STEP_BANDWIDTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    None,
    Box { lower: f64, upper: f64 },
}

/// One step of a splitting scheme: minimise `½ uᵀ A u − bᵀ u` subject to
/// `constraint`, where `A` collects the implicit (convex) part and `b` the
/// explicit (concave and data) part.
#[derive(Debug, Clone)]
pub struct SplittingProblem<'a> {
    pub matrix: Cow<'a, SparseMatrix>,
    pub load: Vec<f64>,
    pub constraint: Constraint,
}

impl SplittingProblem<'_> {
    pub fn objective(&self, u: &[f64]) -> f64 {
        0.5 * fem::quad_form(&self.matrix, u) - fem::dot(&self.load, u)
    }

    /// Solves the step starting from `guess`, overwriting it.
    pub fn solve_into(&self, guess: &mut [f64]) -> Result<()> {
        match self.constraint {
            // narrow bands (interval meshes) factor in linear time
            Constraint::None if fem::half_bandwidth(&self.matrix) <= DIRECT_STEP_BANDWIDTH => {
                let f = fem::BandedCholesky::factor(&self.matrix)?;
                f.solve_into(&self.load, guess);
                Ok(())
            }
            Constraint::None => {
                let max_iter = 20 * self.matrix.dim() + 200;
                fem::solve_spd_from(&self.matrix, &self.load, guess, STEP_CG_TOL, max_iter)
                    .map(|_| ())
            }
            Constraint::Box { lower, upper } => projected_gauss_seidel(
                &self.matrix,
                &self.load,
                lower,
                upper,
                guess,
                PGS_TOL,
                PGS_MAX_SWEEPS,
            )
            .map(|_| ()),
        }
    }
}

/// Projected Gauss-Seidel for `min ½ xᵀAx − bᵀx` over `lower ≤ x ≤ upper`,
/// sweeping nodes in ascending order. Returns the number of sweeps.
pub fn projected_gauss_seidel(
    a: &SparseMatrix,
    b: &[f64],
    lower: f64,
    upper: f64,
    x: &mut [f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<usize> {
    let n = a.dim();
    if b.len() != n || x.len() != n {
        return Err(Error::invalid("PGS vector length does not match matrix"));
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::invalid(format!("non-positive diagonal at row {i}")));
    }
    for v in x.iter_mut() {
        *v = v.clamp(lower, upper);
    }
    let mut change = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        change = 0.0f64;
        for i in 0..n {
            let mut s = b[i];
            for (j, v) in a.row(i) {
                if j != i {
                    s -= v * x[j];
                }
            }
            let new = (s / diag[i]).clamp(lower, upper);
            change = change.max((new - x[i]).abs());
            x[i] = new;
        }
        if !change.is_finite() {
            return Err(Error::numerical("PGS produced non-finite values", change));
        }
        if change < tol {
            return Ok(sweep);
        }
    }
    Err(Error::numerical(
        format!("projected Gauss-Seidel did not converge in {max_sweeps} sweeps"),
        change,
    ))
}

/// A splitting scheme turns the previous iterate and its adjoint state into
/// the next step problem.
pub trait SplittingScheme: Send + Sync {
    fn potential(&self) -> Potential;

    fn problem(&self, u_prev: &[f64], p_prev: &[f64]) -> SplittingProblem<'_>;

    fn step(&self, u_prev: &[f64], p_prev: &[f64]) -> Result<Vec<f64>> {
        let problem = self.problem(u_prev, p_prev);
        let mut u = u_prev.to_vec();
        problem.solve_into(&mut u)?;
        Ok(u)
    }
}

fn check_rho(params: &ModelParams, potential: Potential) -> Result<()> {
    params.validate()?;
    let bound = params.reaction(potential);
    if params.rho <= bound {
        return Err(Error::invalid(format!(
            "rho = {} must exceed sigma_eff/epsilon = {bound} for the {potential} scheme",
            params.rho
        )));
    }
    Ok(())
}

/// Linearised double-well step:
/// `[ρM + σ₁εK + (σ₁/ε)(D(u_prev²) − M_L)] u = ρ M u_prev − M p_prev`.
#[derive(Debug)]
pub struct DoubleWellScheme {
    system: Arc<FeSystem>,
    base: SparseMatrix,
    rho: f64,
    reaction: f64,
}

impl DoubleWellScheme {
    pub fn new(system: Arc<FeSystem>, params: &ModelParams) -> Result<Self> {
        let potential = Potential::SmoothDoubleWell;
        check_rho(params, potential)?;
        let sigma = potential.sigma_eff(params.sigma);
        let reaction = sigma / params.epsilon;
        let lumped = SparseMatrix::from_diagonal(&system.lumped);
        let base = SparseMatrix::linear_combination(&[
            (params.rho, &system.mass),
            (sigma * params.epsilon, &system.stiffness),
            (-reaction, &lumped),
        ])?;
        Ok(Self {
            system,
            base,
            rho: params.rho,
            reaction,
        })
    }
}

impl SplittingScheme for DoubleWellScheme {
    fn potential(&self) -> Potential {
        Potential::SmoothDoubleWell
    }

    fn problem(&self, u_prev: &[f64], p_prev: &[f64]) -> SplittingProblem<'_> {
        let extra: Vec<f64> = self
            .system
            .lumped
            .iter()
            .zip(u_prev)
            .map(|(m, u)| self.reaction * m * u * u)
            .collect();
        let matrix = self.base.with_added_diagonal(&extra);
        let mu = self.system.mass.mul_vec(u_prev);
        let mp = self.system.mass.mul_vec(p_prev);
        let load = mu.iter().zip(&mp).map(|(a, b)| self.rho * a - b).collect();
        SplittingProblem {
            matrix: Cow::Owned(matrix),
            load,
            constraint: Constraint::None,
        }
    }
}

/// Double-obstacle step: the box-constrained problem with
/// `A = (ρ − σ₂/ε) M_L + σ₂εK` and `b = ρ M_L u_prev − M p_prev`.
#[derive(Debug)]
pub struct DoubleObstacleScheme {
    system: Arc<FeSystem>,
    matrix: SparseMatrix,
    rho: f64,
}

impl DoubleObstacleScheme {
    pub fn new(system: Arc<FeSystem>, params: &ModelParams) -> Result<Self> {
        let potential = Potential::DoubleObstacle;
        check_rho(params, potential)?;
        let sigma = potential.sigma_eff(params.sigma);
        let lumped = SparseMatrix::from_diagonal(&system.lumped);
        let matrix = SparseMatrix::linear_combination(&[
            (params.rho - sigma / params.epsilon, &lumped),
            (sigma * params.epsilon, &system.stiffness),
        ])?;
        Ok(Self {
            system,
            matrix,
            rho: params.rho,
        })
    }
}

impl SplittingScheme for DoubleObstacleScheme {
    fn potential(&self) -> Potential {
        Potential::DoubleObstacle
    }

    fn problem(&self, u_prev: &[f64], p_prev: &[f64]) -> SplittingProblem<'_> {
        let mp = self.system.mass.mul_vec(p_prev);
        let load = self
            .system
            .lumped
            .iter()
            .zip(u_prev)
            .zip(&mp)
            .map(|((m, u), q)| self.rho * m * u - q)
            .collect();
        SplittingProblem {
            matrix: Cow::Borrowed(&self.matrix),
            load,
            constraint: Constraint::Box {
                lower: -1.0,
                upper: 1.0,
            },
        }
    }
}

pub fn scheme_for(
    potential: Potential,
    system: Arc<FeSystem>,
    params: &ModelParams,
) -> Result<Box<dyn SplittingScheme>> {
    Ok(match potential {
        Potential::SmoothDoubleWell => Box::new(DoubleWellScheme::new(system, params)?),
        Potential::DoubleObstacle => Box::new(DoubleObstacleScheme::new(system, params)?),
    })
}

fn one_step(
    potential: Potential,
    u_prev: &FeFunction,
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
) -> Result<FeFunction> {
    let scheme = scheme_for(potential, blur.system().clone(), params)?;
    let (_, p) = blur.adjoint_chain(u_prev, y_d)?;
    let u = scheme.step(u_prev.coeffs(), p.coeffs())?;
    FeFunction::new(blur.mesh().clone(), u)
}

/// One linearised double-well step from `u_prev`.
pub fn dw_step(
    u_prev: &FeFunction,
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
) -> Result<FeFunction> {
    if u_prev.coeffs().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("previous iterate has non-finite values"));
    }
    one_step(Potential::SmoothDoubleWell, u_prev, y_d, blur, params)
}

/// One double-obstacle step from a feasible `u_prev`.
pub fn do_step(
    u_prev: &FeFunction,
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
) -> Result<FeFunction> {
    check_feasible(u_prev)?;
    one_step(Potential::DoubleObstacle, u_prev, y_d, blur, params)
}

fn check_feasible(u: &FeFunction) -> Result<()> {
    if let Some(i) = u.coeffs().iter().position(|v| !(v.abs() <= 1.0)) {
        return Err(Error::invalid(format!(
            "iterate violates |u| <= 1 at node {i} (value {})",
            u.coeffs()[i]
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Stop once `‖u^n − u^{n−1}‖_{L²} < TOL`.
    #[default]
    L2Diff,
    /// Stop once `|F(u^n) − F(u^{n−1})| < TOL`.
    EnergyChange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    pub iteration: usize,
    pub increase: f64,
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub final_u: FeFunction,
    pub initial_energy: f64,
    /// `energies[k]` is the energy of iterate `k + 1`.
    pub energies: Vec<f64>,
    pub diffs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
    pub violations: Vec<MonotonicityViolation>,
}

/// Per-iteration record handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub l2_diff: f64,
}

/// Runs the splitting iteration from `u0` until the stopping rule fires or
/// `params.max_iters` is reached.
pub fn run_recovery(
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
    potential: Potential,
    u0: &FeFunction,
) -> Result<RecoveryResult> {
    run_recovery_with(
        y_d,
        blur,
        params,
        potential,
        u0,
        StopRule::L2Diff,
        |_, _| {},
    )
}

/// [`run_recovery`] with an explicit stopping rule and a callback invoked
/// after every iteration with the new iterate.
pub fn run_recovery_with(
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
    potential: Potential,
    u0: &FeFunction,
    stop: StopRule,
    mut observer: impl FnMut(&IterationRecord, &FeFunction),
) -> Result<RecoveryResult> {
    y_d.check_same_mesh(u0)?;
    if !y_d.same_mesh(&FeFunction::constant(blur.mesh().clone(), 0.0)) {
        return Err(Error::invalid("data is not on the blur operator's mesh"));
    }
    if potential == Potential::DoubleObstacle {
        check_feasible(u0)?;
    }
    let system = blur.system().clone();
    let scheme = scheme_for(potential, system.clone(), params)?;
    let mesh = blur.mesh().clone();

    let mut u = FeFunction::new(mesh.clone(), u0.coeffs().to_vec())?;
    let mut state = AdjointState::new(u.coeffs().len());
    state.update(blur, u.coeffs(), y_d.coeffs())?;
    let initial_energy = energy_from_state(&system, &u, &state.y, y_d.coeffs(), params, potential);

    let mut energies = Vec::new();
    let mut diffs = Vec::new();
    let mut violations = Vec::new();
    let mut converged = false;
    let mut prev_energy = initial_energy;

    for iteration in 1..=params.max_iters {
        let next = scheme.step(u.coeffs(), &state.p)?;
        let delta: Vec<f64> = next.iter().zip(u.coeffs()).map(|(a, b)| a - b).collect();
        let l2_diff = system.l2_norm(&delta);
        u = FeFunction::new(mesh.clone(), next)?;
        state.update(blur, u.coeffs(), y_d.coeffs())?;
        let energy = energy_from_state(&system, &u, &state.y, y_d.coeffs(), params, potential);

        if energy - prev_energy > MONOTONE_RTOL * prev_energy.abs() {
            warn!(
                "{potential} energy increased by {:e} at iteration {iteration}",
                energy - prev_energy
            );
            violations.push(MonotonicityViolation {
                iteration,
                increase: energy - prev_energy,
            });
        }
        let record = IterationRecord {
            iteration,
            energy,
            l2_diff,
        };
        observer(&record, &u);
        energies.push(energy);
        diffs.push(l2_diff);

        let done = match stop {
            StopRule::L2Diff => l2_diff < params.tol,
            StopRule::EnergyChange => (energy - prev_energy).abs() < params.tol,
        };
        prev_energy = energy;
        if done {
            converged = true;
            break;
        }
    }

    Ok(RecoveryResult {
        final_u: u,
        initial_energy,
        iterations: energies.len(),
        energies,
        diffs,
        converged,
        monotone: violations.is_empty(),
        violations,
    })
}

/// The recovery iteration viewed as a semi-implicit gradient flow with time
/// step `dt`, i.e. `ρ = 1/dt`.
pub fn gradient_flow_run(
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
    potential: Potential,
    u0: &FeFunction,
    dt: f64,
) -> Result<RecoveryResult> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let params = ModelParams {
        rho: 1.0 / dt,
        ..*params
    };
    run_recovery(y_d, blur, &params, potential, u0)
}

/// L2 norm of the first-order optimality residual at `u`.
///
/// For the double well this is the discrete Euler-Lagrange residual
/// `M p + σ₁εKu + (σ₁/ε) M_L (u³ − u)`; for the obstacle it is the natural
/// residual `u − Π(u − g)` of the box-constrained problem. Both are mapped
/// to nodal values through the lumped mass before taking the norm.
pub fn stationarity_residual(
    u: &FeFunction,
    y_d: &FeFunction,
    blur: &BlurOperator,
    params: &ModelParams,
    potential: Potential,
) -> Result<f64> {
    u.check_same_mesh(y_d)?;
    let system = blur.system();
    let (_, p) = blur.adjoint_chain(u, y_d)?;
    let sigma = potential.sigma_eff(params.sigma);
    let eps = params.epsilon;
    let c = u.coeffs();
    let mp = system.mass.mul_vec(p.coeffs());
    let ku = system.stiffness.mul_vec(c);
    let m = &system.lumped;

    let mut sum = 0.0;
    for i in 0..c.len() {
        let reaction = match potential {
            Potential::SmoothDoubleWell => c[i] * c[i] * c[i] - c[i],
            Potential::DoubleObstacle => -c[i],
        };
        let g = (mp[i] + sigma * eps * ku[i] + sigma / eps * m[i] * reaction) / m[i];
        let r = match potential {
            Potential::SmoothDoubleWell => g,
            Potential::DoubleObstacle => c[i] - (c[i] - g).clamp(-1.0, 1.0),
        };
        sum += m[i] * r * r;
    }
    Ok(sum.sqrt())
}
