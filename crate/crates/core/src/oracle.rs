//! Small dense reference computations used to cross-check the sparse
//! assembly and the step solvers on tiny 1D meshes.
//!
//! Nothing here touches the sparse assembly code: element matrices are
//! written down in closed form for a uniform interval mesh.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blur::BlurOperator;
use crate::error::{Error, Result};
use crate::fem::FeFunction;
use crate::mesh::build_interval_mesh;
use crate::phasefield::{ModelParams, Potential};
use crate::solver::{do_step, dw_step};

pub type Dense = Vec<Vec<f64>>;

/// Tolerance every oracle comparison must meet.
pub const ORACLE_TOL: f64 = 1e-8;
pub const PG_ITERATIONS: usize = 100_000;
pub const PG_STARTS: usize = 20;

fn zeros(n: usize) -> Dense {
    vec![vec![0.0; n]; n]
}

/// Consistent mass matrix of the uniform mesh with `n` cells on `[0, 1]`.
pub fn dense_mass_1d(n: usize) -> Dense {
    let h = 1.0 / n as f64;
    let mut m = zeros(n + 1);
    for e in 0..n {
        m[e][e] += h / 3.0;
        m[e + 1][e + 1] += h / 3.0;
        m[e][e + 1] += h / 6.0;
        m[e + 1][e] += h / 6.0;
    }
    m
}

pub fn dense_stiffness_1d(n: usize) -> Dense {
    let h = 1.0 / n as f64;
    let mut k = zeros(n + 1);
    for e in 0..n {
        k[e][e] += 1.0 / h;
        k[e + 1][e + 1] += 1.0 / h;
        k[e][e + 1] -= 1.0 / h;
        k[e + 1][e] -= 1.0 / h;
    }
    k
}

/// Lumped mass weights: `h/2` at the ends, `h` inside.
pub fn dense_lumped_1d(n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (0..=n)
        .map(|i| if i == 0 || i == n { h / 2.0 } else { h })
        .collect()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn combine(terms: &[(f64, &Dense)]) -> Dense {
    let n = terms[0].1.len();
    let mut out = zeros(n);
    for (c, a) in terms {
        for i in 0..n {
            for j in 0..n {
                out[i][j] += c * a[i][j];
            }
        }
    }
    out
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &Dense, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("dense_solve: dimension mismatch"));
    }
    let mut m: Dense = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::numerical("dense_solve: singular matrix", 0.0));
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (x[r] - s) / m[r][r];
    }
    Ok(x)
}

/// Optional deliberate corruption of the oracle matrices, used as a
/// negative control for the comparison harness.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Perturbation {
    /// Added to the `(0, 0)` entry of the dense stiffness matrix.
    pub stiffness_shift: f64,
}

/// Dense matrices for a uniform interval mesh with `n` cells.
#[derive(Debug, Clone)]
pub struct DenseProblem {
    pub mass: Dense,
    pub stiffness: Dense,
    pub lumped: Vec<f64>,
    pub alpha: f64,
}

impl DenseProblem {
    pub fn new(n: usize, alpha: f64, perturbation: Perturbation) -> Self {
        let mut stiffness = dense_stiffness_1d(n);
        stiffness[0][0] += perturbation.stiffness_shift;
        Self {
            mass: dense_mass_1d(n),
            stiffness,
            lumped: dense_lumped_1d(n),
            alpha,
        }
    }

    fn blur_matrix(&self) -> Dense {
        combine(&[(self.alpha, &self.stiffness), (1.0, &self.mass)])
    }

    pub fn blur(&self, u: &[f64]) -> Result<Vec<f64>> {
        dense_solve(&self.blur_matrix(), &matvec(&self.mass, u))
    }

    /// Adjoint state `p` for iterate `u`.
    pub fn adjoint(&self, u: &[f64], y_d: &[f64]) -> Result<Vec<f64>> {
        let y = self.blur(u)?;
        let r: Vec<f64> = y.iter().zip(y_d).map(|(a, b)| a - b).collect();
        dense_solve(&self.blur_matrix(), &matvec(&self.mass, &r))
    }

    pub fn dw_step(&self, u_prev: &[f64], y_d: &[f64], params: &ModelParams) -> Result<Vec<f64>> {
        let sigma = Potential::SmoothDoubleWell.sigma_eff(params.sigma);
        let eps = params.epsilon;
        let p = self.adjoint(u_prev, y_d)?;
        let mut a = combine(&[(params.rho, &self.mass), (sigma * eps, &self.stiffness)]);
        for i in 0..a.len() {
            a[i][i] += sigma / eps * self.lumped[i] * (u_prev[i] * u_prev[i] - 1.0);
        }
        let mu = matvec(&self.mass, u_prev);
        let mp = matvec(&self.mass, &p);
        let b: Vec<f64> = mu
            .iter()
            .zip(&mp)
            .map(|(x, q)| params.rho * x - q)
            .collect();
        dense_solve(&a, &b)
    }

    /// Quadratic data `(A, b)` of the obstacle step objective `½uᵀAu − bᵀu`.
    pub fn do_quadratic(
        &self,
        u_prev: &[f64],
        y_d: &[f64],
        params: &ModelParams,
    ) -> Result<(Dense, Vec<f64>)> {
        let sigma = Potential::DoubleObstacle.sigma_eff(params.sigma);
        let eps = params.epsilon;
        let p = self.adjoint(u_prev, y_d)?;
        let mut a = combine(&[(sigma * eps, &self.stiffness)]);
        for i in 0..a.len() {
            a[i][i] += (params.rho - sigma / eps) * self.lumped[i];
        }
        let mp = matvec(&self.mass, &p);
        let b = (0..a.len())
            .map(|i| params.rho * self.lumped[i] * u_prev[i] - mp[i])
            .collect();
        Ok((a, b))
    }
}

pub fn quadratic_objective(a: &Dense, b: &[f64], u: &[f64]) -> f64 {
    let au = matvec(a, u);
    0.5 * au.iter().zip(u).map(|(x, y)| x * y).sum::<f64>()
        - b.iter().zip(u).map(|(x, y)| x * y).sum::<f64>()
}

/// Minimises `½uᵀAu − bᵀu` over `[-1, 1]^n` by projected gradient descent
/// with step `1/L` (Gershgorin bound), keeping the best of several random
/// feasible starts.
pub fn projected_gradient_min(
    a: &Dense,
    b: &[f64],
    iterations: usize,
    starts: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let n = b.len();
    let lip = a
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let step = 1.0 / lip;
    let mut best = vec![0.0; n];
    let mut best_val = f64::INFINITY;
    for _ in 0..starts.max(1) {
        let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        for _ in 0..iterations {
            let g = matvec(a, &u);
            for i in 0..n {
                u[i] = (u[i] - step * (g[i] - b[i])).clamp(-1.0, 1.0);
            }
        }
        let val = quadratic_objective(a, b, &u);
        if val < best_val {
            best_val = val;
            best = u;
        }
    }
    best
}

/// One line of an oracle report.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub check: &'static str,
    pub instances: usize,
    pub max_deviation: f64,
    /// Largest `J(u_pgs) − J(u_oracle)` seen (obstacle rows only).
    pub energy_gap: Option<f64>,
    pub tolerance: f64,
}

impl OracleRow {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
            && self.energy_gap.is_none_or(|g| g.abs() <= self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(OracleRow::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("check,instances,max_deviation,energy_gap,tolerance,status\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.16e},{},{:.16e},{}\n",
                r.check,
                r.instances,
                r.max_deviation,
                r.energy_gap
                    .map_or_else(String::new, |g| format!("{g:.16e}")),
                r.tolerance,
                if r.passed() { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Random step parameters satisfying the `ρ` precondition for both potentials.
pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    let sigma = rng.random_range(0.01..0.1);
    let epsilon = rng.random_range(0.05..0.3);
    let reaction = Potential::SmoothDoubleWell
        .sigma_eff(sigma)
        .max(Potential::DoubleObstacle.sigma_eff(sigma))
        / epsilon;
    ModelParams {
        alpha: rng.random_range(1e-3..0.1),
        gamma: 0.0,
        sigma,
        epsilon,
        h: 0.125,
        omega: 0.5,
        rho: reaction * rng.random_range(1.2..3.0),
        tol: 1e-6,
        max_iters: 1,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs every oracle comparison on `instances` random problems with 2 to 8
/// cells, seeded by `seed`.
pub fn run_oracle_checks(
    instances: usize,
    seed: u64,
    perturbation: Perturbation,
) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assembly = 0.0f64;
    let mut blur_dev = 0.0f64;
    let mut dw_dev = 0.0f64;
    let mut do_dev = 0.0f64;
    let mut do_gap = 0.0f64;

    for _ in 0..instances {
        let n = rng.random_range(2..=7usize);
        let params = random_params(&mut rng);
        let mesh = Arc::new(build_interval_mesh(n)?);
        let blur = BlurOperator::on_mesh(mesh.clone(), params.alpha)?;
        let dense = DenseProblem::new(n, params.alpha, perturbation);
        let sys = blur.system();
        for i in 0..=n {
            for j in 0..=n {
                assembly = assembly
                    .max((sys.mass.get(i, j) - dense.mass[i][j]).abs())
                    .max((sys.stiffness.get(i, j) - dense.stiffness[i][j]).abs());
            }
            assembly = assembly.max((sys.lumped[i] - dense.lumped[i]).abs());
        }

        let u: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let y_d: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.5..=1.5)).collect();
        let u_f = FeFunction::new(mesh.clone(), u.clone())?;
        let y_f = FeFunction::new(mesh.clone(), y_d.clone())?;

        let s = blur.apply(&u_f)?;
        blur_dev = blur_dev.max(max_abs_diff(s.coeffs(), &dense.blur(&u)?));

        let dw = dw_step(&u_f, &y_f, &blur, &params)?;
        dw_dev = dw_dev.max(max_abs_diff(
            dw.coeffs(),
            &dense.dw_step(&u, &y_d, &params)?,
        ));

        let ob = do_step(&u_f, &y_f, &blur, &params)?;
        let (a, b) = dense.do_quadratic(&u, &y_d, &params)?;
        let reference = projected_gradient_min(&a, &b, PG_ITERATIONS, PG_STARTS, &mut rng);
        do_dev = do_dev.max(max_abs_diff(ob.coeffs(), &reference));
        let gap =
            quadratic_objective(&a, &b, ob.coeffs()) - quadratic_objective(&a, &b, &reference);
        if gap.abs() > do_gap.abs() {
            do_gap = gap;
        }
    }

    let row = |check, dev, gap| OracleRow {
        check,
        instances,
        max_deviation: dev,
        energy_gap: gap,
        tolerance: ORACLE_TOL,
    };
    Ok(OracleReport {
        rows: vec![
            row("assembly", assembly, None),
            row("blur", blur_dev, None),
            row("dw_step", dw_dev, None),
            row("do_step", do_dev, Some(do_gap)),
        ],
    })
}
