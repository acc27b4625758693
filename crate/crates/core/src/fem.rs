//! Piecewise-linear finite elements: assembly of the mass, stiffness and
//! lumped-mass matrices, L2 projection, and a Jacobi-preconditioned
//! conjugate-gradient solver for the SPD systems that arise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Default relative-residual tolerance for [`solve_spd`].
pub const DEFAULT_CG_TOL: f64 = 1e-10;

/// Symmetric sparse matrix in compressed-row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in the order given.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            // stable sort keeps the summation order of duplicates
            row.sort_by_key(|&(j, _)| j);
            let mut iter = row.into_iter().peekable();
            while let Some((j, mut v)) = iter.next() {
                while let Some(&(jj, vv)) = iter.peek() {
                    if jj != j {
                        break;
                    }
                    v += vv;
                    iter.next();
                }
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: diag.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates over the stored `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `sum_k c_k A_k` for matrices of equal dimension.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<Self> {
        let n = terms.first().map(|(_, m)| m.n).unwrap_or(0);
        if terms.iter().any(|(_, m)| m.n != n) {
            return Err(Error::invalid("matrix dimensions differ"));
        }
        let triplets: Vec<_> = terms
            .iter()
            .flat_map(|&(c, m)| m.triplets().map(move |(i, j, v)| (i, j, c * v)))
            .collect();
        Ok(Self::from_triplets(n, &triplets))
    }

    /// Returns `self + diag(d)`. The diagonal must already be stored.
    pub fn with_added_diagonal(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, di) in d.iter().enumerate() {
            let r = out.row_ptr[i]..out.row_ptr[i + 1];
            match out.cols[r.clone()].binary_search(&i) {
                Ok(k) => out.vals[r.start + k] += di,
                Err(_) => panic!("diagonal entry ({i}, {i}) not in sparsity pattern"),
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.triplets().all(|(i, j, v)| self.get(j, i) == v)
    }
}

/// Nodal coefficients of a P1 function on a shared mesh.
#[derive(Debug, Clone)]
pub struct FeFunction {
    mesh: Arc<Mesh>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(mesh: Arc<Mesh>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.num_nodes() {
            return Err(Error::invalid(format!(
                "{} coefficients for a mesh with {} nodes",
                coeffs.len(),
                mesh.num_nodes()
            )));
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64) -> Self {
        let coeffs = vec![value; mesh.num_nodes()];
        Self { mesh, coeffs }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<Mesh>, f: impl Fn(&[f64]) -> f64) -> Self {
        let coeffs = (0..mesh.num_nodes()).map(|i| f(mesh.node(i))).collect();
        Self { mesh, coeffs }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            coeffs: self.coeffs.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn same_mesh(&self, other: &FeFunction) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    pub(crate) fn check_same_mesh(&self, other: &FeFunction) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::invalid("functions live on different meshes"))
        }
    }

    /// Evaluates the piecewise-linear interpolant at `point`.
    pub fn eval(&self, point: &[f64]) -> Option<f64> {
        let (e, bary) = self.mesh.locate(point)?;
        let el = self.mesh.element(e);
        Some(el.iter().zip(bary).map(|(&v, b)| b * self.coeffs[v]).sum())
    }
}

/// The three P1 operators of a mesh, assembled once and shared.
#[derive(Debug)]
pub struct FeSystem {
    mesh: Arc<Mesh>,
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    /// Diagonal of the lumped mass matrix.
    pub lumped: Vec<f64>,
}

impl FeSystem {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let mass = assemble_mass(&mesh);
        let stiffness = assemble_stiffness(&mesh);
        let lumped = lumped_diagonal(&mesh);
        Self {
            mesh,
            mass,
            stiffness,
            lumped,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.num_nodes()
    }

    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        quad_form(&self.mass, u).max(0.0).sqrt()
    }
}

fn element_mass(mesh: &Mesh, e: usize) -> [[f64; 3]; 3] {
    let m = mesh.element_measure(e);
    let mut out = [[0.0; 3]; 3];
    match mesh.dim() {
        1 => {
            out[0][0] = m / 3.0;
            out[1][1] = m / 3.0;
            out[0][1] = m / 6.0;
            out[1][0] = m / 6.0;
        }
        _ => {
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { m / 6.0 } else { m / 12.0 };
                }
            }
        }
    }
    out
}

fn element_stiffness(mesh: &Mesh, e: usize) -> [[f64; 3]; 3] {
    let el = mesh.element(e);
    let mut out = [[0.0; 3]; 3];
    match mesh.dim() {
        1 => {
            let k = 1.0 / mesh.element_measure(e);
            out[0][0] = k;
            out[1][1] = k;
            out[0][1] = -k;
            out[1][0] = -k;
        }
        _ => {
            let p: Vec<&[f64]> = el.iter().map(|&v| mesh.node(v)).collect();
            let area = mesh.element_measure(e);
            // gradient of barycentric i is perp(edge opposite i) / (2 area)
            let grad = |i: usize| {
                let a = p[(i + 1) % 3];
                let b = p[(i + 2) % 3];
                [a[1] - b[1], b[0] - a[0]]
            };
            let g = [grad(0), grad(1), grad(2)];
            for i in 0..3 {
                for j in i..3 {
                    let v = (g[i][0] * g[j][0] + g[i][1] * g[j][1]) / (4.0 * area);
                    out[i][j] = v;
                    out[j][i] = v;
                }
            }
        }
    }
    out
}

fn assemble(mesh: &Mesh, local: impl Fn(&Mesh, usize) -> [[f64; 3]; 3]) -> SparseMatrix {
    let k = mesh.dim() + 1;
    let mut triplets = Vec::with_capacity(mesh.num_elements() * k * k);
    for (e, el) in mesh.elements().enumerate() {
        let a = local(mesh, e);
        for i in 0..k {
            for j in 0..k {
                triplets.push((el[i], el[j], a[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.num_nodes(), &triplets)
}

/// Consistent mass matrix `M_ij = ∫ φ_i φ_j`.
pub fn assemble_mass(mesh: &Mesh) -> SparseMatrix {
    assemble(mesh, element_mass)
}

/// Stiffness matrix `K_ij = ∫ ∇φ_i · ∇φ_j` (natural Neumann boundary).
pub fn assemble_stiffness(mesh: &Mesh) -> SparseMatrix {
    assemble(mesh, element_stiffness)
}

fn lumped_diagonal(mesh: &Mesh) -> Vec<f64> {
    let mass = assemble_mass(mesh);
    (0..mass.dim())
        .map(|i| mass.row(i).map(|(_, v)| v).sum())
        .collect()
}

/// Row-sum lumped mass matrix.
pub fn assemble_lumped_mass(mesh: &Mesh) -> SparseMatrix {
    SparseMatrix::from_diagonal(&lumped_diagonal(mesh))
}

/// Gauss points on the reference element as (barycentric coords, weight
/// relative to the element measure).
fn quadrature_rule(dim: usize) -> Vec<([f64; 3], f64)> {
    match dim {
        1 => {
            // 3-point Gauss-Legendre on [0, 1], exact to degree 5
            let d = 0.5 * (0.6f64).sqrt();
            vec![
                ([0.5 + d, 0.5 - d, 0.0], 5.0 / 18.0),
                ([0.5, 0.5, 0.0], 8.0 / 18.0),
                ([0.5 - d, 0.5 + d, 0.0], 5.0 / 18.0),
            ]
        }
        _ => {
            // 6-point Dunavant rule, exact to degree 4
            let (a1, b1, w1) = (
                0.445_948_490_915_965,
                0.108_103_018_168_070,
                0.223_381_589_678_011,
            );
            let (a2, b2, w2) = (
                0.091_576_213_509_771,
                0.816_847_572_980_459,
                0.109_951_743_655_322,
            );
            vec![
                ([a1, a1, b1], w1),
                ([a1, b1, a1], w1),
                ([b1, a1, a1], w1),
                ([a2, a2, b2], w2),
                ([a2, b2, a2], w2),
                ([b2, a2, a2], w2),
            ]
        }
    }
}

/// Load vector `b_i = ∫ φ_i f`, integrated element-wise by Gauss quadrature.
pub fn load_vector(mesh: &Mesh, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let rule = quadrature_rule(mesh.dim());
    let k = mesh.dim() + 1;
    let mut b = vec![0.0; mesh.num_nodes()];
    for (e, el) in mesh.elements().enumerate() {
        let meas = mesh.element_measure(e);
        for (bary, w) in &rule {
            let mut x = [0.0; 2];
            for i in 0..k {
                for (d, xd) in x.iter_mut().enumerate().take(mesh.dim()) {
                    *xd += bary[i] * mesh.node(el[i])[d];
                }
            }
            let fx = f(&x[..mesh.dim()]) * w * meas;
            for i in 0..k {
                b[el[i]] += bary[i] * fx;
            }
        }
    }
    b
}

/// L2 projection of `sampler` onto the P1 space of `mesh`.
pub fn l2_project(mesh: &Arc<Mesh>, sampler: impl Fn(&[f64]) -> f64) -> Result<FeFunction> {
    let mass = assemble_mass(mesh);
    let b = load_vector(mesh, sampler);
    let c = solve_spd(&mass, &b, 1e-14, 10 * mass.dim() + 100)?;
    FeFunction::new(mesh.clone(), c)
}

/// `uᵀ A v`.
pub fn inner(a: &SparseMatrix, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != a.dim() || v.len() != a.dim() {
        return Err(Error::invalid(format!(
            "vector lengths {} and {} do not match matrix dimension {}",
            u.len(),
            v.len(),
            a.dim()
        )));
    }
    Ok(dot(&a.mul_vec(v), u))
}

/// `√(uᵀ M u)`.
pub fn l2_norm(mass: &SparseMatrix, u: &[f64]) -> Result<f64> {
    Ok(inner(mass, u, u)?.max(0.0).sqrt())
}

pub(crate) fn quad_form(a: &SparseMatrix, u: &[f64]) -> f64 {
    dot(&a.mul_vec(u), u)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Largest `|i − j|` over the stored entries.
pub fn half_bandwidth(a: &SparseMatrix) -> usize {
    a.triplets()
        .map(|(i, j, _)| i.abs_diff(j))
        .max()
        .unwrap_or(0)
}

/// Band storage cap (in entries) below which direct factorisation is used.
pub const DIRECT_BAND_ENTRIES: usize = 16_000_000;

/// Whether a banded factorisation of `a` fits within [`DIRECT_BAND_ENTRIES`].
pub fn prefers_direct(a: &SparseMatrix) -> bool {
    a.dim().saturating_mul(half_bandwidth(a) + 1) <= DIRECT_BAND_ENTRIES
}

const PIVOT_RTOL: f64 = 1e-12;

/// Dense-band Cholesky factor `A = L Lᵀ` of an SPD matrix.
///
/// Storage and work are `O(n·b)` and `O(n·b²)` for half bandwidth `b`, so
/// this pays off for interval meshes and moderate square meshes with the
/// natural lexicographic node order.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds `L[i][i-bw..=i]`.
    data: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = half_bandwidth(a);
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for (i, j, v) in a.triplets() {
            if j <= i {
                data[i * w + (j + bw - i)] = v;
            }
        }
        for i in 0..n {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                let mut s = data[i * w + (j + bw - i)];
                for k in lo..j {
                    s -= data[i * w + (k + bw - i)] * data[j * w + (k + bw - j)];
                }
                if j == i {
                    // a pivot lost to cancellation means A is singular up to rounding
                    if !(s > PIVOT_RTOL * a.get(i, i).abs()) {
                        return Err(Error::numerical("matrix is not positive definite", s));
                    }
                    data[i * w + bw] = s.sqrt();
                } else {
                    data[i * w + (j + bw - i)] = s / data[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Overwrites `x` with the solution of `A x = b`.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let (bw, w) = (self.bw, self.bw + 1);
        x.copy_from_slice(b);
        for i in 0..self.n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.data[i * w + (k + bw - i)] * x[k];
            }
            x[i] = s / self.data[i * w + bw];
        }
        for i in (0..self.n).rev() {
            x[i] /= self.data[i * w + bw];
            let xi = x[i];
            for k in i.saturating_sub(bw)..i {
                x[k] -= self.data[i * w + (k + bw - i)] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x);
        x
    }
}

/// Solves `A x = b` for SPD `A` by Jacobi-preconditioned conjugate gradients
/// starting from zero. Returns once `‖A x − b‖ ≤ tol ‖b‖`.
pub fn solve_spd(a: &SparseMatrix, rhs: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let mut x = vec![0.0; rhs.len()];
    solve_spd_from(a, rhs, &mut x, tol, max_iter)?;
    Ok(x)
}

/// As [`solve_spd`], starting from the guess in `x`. Returns the number of
/// iterations taken.
pub fn solve_spd_from(
    a: &SparseMatrix,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = a.dim();
    if rhs.len() != n || x.len() != n {
        return Err(Error::invalid(
            "right-hand side length does not match matrix",
        ));
    }
    let b_norm = norm(rhs);
    if !b_norm.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite input to CG", f64::NAN));
    }
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let target = tol * b_norm;

    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iters = 0;
    // the outer loop restarts from the true residual whenever the recursive
    // one claims convergence but the true one disagrees
    loop {
        a.mul_vec_into(x, &mut q);
        for i in 0..n {
            r[i] = rhs[i] - q[i];
        }
        let mut r_norm = norm(&r);
        if r_norm <= target {
            return Ok(iters);
        }
        if iters >= max_iter {
            return Err(Error::numerical(
                format!("CG did not converge in {max_iter} iterations"),
                r_norm / b_norm,
            ));
        }
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while r_norm > target {
            if iters >= max_iter {
                return Err(Error::numerical(
                    format!("CG did not converge in {max_iter} iterations"),
                    r_norm / b_norm,
                ));
            }
            a.mul_vec_into(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) {
                return Err(Error::numerical(
                    "matrix is not positive definite along a search direction",
                    r_norm / b_norm,
                ));
            }
            let step = rz / pq;
            for i in 0..n {
                x[i] += step * p[i];
                r[i] -= step * q[i];
            }
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            r_norm = norm(&r);
            iters += 1;
            if !r_norm.is_finite() {
                return Err(Error::numerical("CG produced non-finite residual", r_norm));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_interval_mesh, build_square_mesh};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn single_interval_element_matrices() {
        let m = build_interval_mesh(1).unwrap();
        let mass = assemble_mass(&m);
        assert!((mass.get(0, 0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((mass.get(0, 1) - 1.0 / 6.0).abs() < 1e-16);
        assert!((mass.get(1, 1) - 1.0 / 3.0).abs() < 1e-16);
        let k = assemble_stiffness(&m);
        assert_eq!((k.get(0, 0), k.get(0, 1), k.get(1, 1)), (1.0, -1.0, 1.0));
    }

    #[test]
    fn mass_integrates_constants() {
        for m in [
            build_interval_mesh(7).unwrap(),
            build_square_mesh(5).unwrap(),
        ] {
            let mass = assemble_mass(&m);
            let one = vec![1.0; m.num_nodes()];
            assert!((quad_form(&mass, &one) - 1.0).abs() < 1e-13);
            assert!((l2_norm(&mass, &one).unwrap() - 1.0).abs() < 1e-13);
            assert_eq!(l2_norm(&mass, &vec![0.0; m.num_nodes()]).unwrap(), 0.0);
        }
    }

    #[test]
    fn mass_matches_gauss_quadrature_of_interpolant() {
        // independent check: integrate (Σ u_i φ_i)^2 with a 3-point Gauss rule per element
        let m = build_interval_mesh(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = rand_vec(&mut rng, m.num_nodes());
        let d = 0.5 * (0.6f64).sqrt();
        let pts = [
            (0.5 - d, 5.0 / 18.0),
            (0.5, 8.0 / 18.0),
            (0.5 + d, 5.0 / 18.0),
        ];
        let mut exact = 0.0;
        for e in 0..8 {
            for (t, w) in pts {
                let v = u[e] * (1.0 - t) + u[e + 1] * t;
                exact += w * v * v / 8.0;
            }
        }
        let mass = assemble_mass(&m);
        assert!((quad_form(&mass, &u) - exact).abs() < 1e-14);
    }

    #[test]
    fn stiffness_of_linear_function() {
        let m = build_interval_mesh(10).unwrap();
        let k = assemble_stiffness(&m);
        let x: Vec<f64> = (0..m.num_nodes()).map(|i| m.node(i)[0]).collect();
        assert!((inner(&k, &x, &x).unwrap() - 1.0).abs() < 1e-12);
        let m2 = build_square_mesh(6).unwrap();
        let k2 = assemble_stiffness(&m2);
        // u = 2x + 3y: ∫|∇u|² = 13
        let u: Vec<f64> = (0..m2.num_nodes())
            .map(|i| 2.0 * m2.node(i)[0] + 3.0 * m2.node(i)[1])
            .collect();
        assert!((quad_form(&k2, &u) - 13.0).abs() < 1e-11);
    }

    #[test]
    fn stiffness_kills_constants_and_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [
            build_interval_mesh(9).unwrap(),
            build_square_mesh(4).unwrap(),
        ] {
            let k = assemble_stiffness(&m);
            let kc = k.mul_vec(&vec![1.0; m.num_nodes()]);
            assert!(kc.iter().all(|v| v.abs() < 1e-12), "{kc:?}");
            assert!(k.is_symmetric());
            for _ in 0..100 {
                let v = rand_vec(&mut rng, m.num_nodes());
                assert!(quad_form(&k, &v) >= -1e-14);
            }
        }
    }

    #[test]
    fn mass_is_spd_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [
            build_interval_mesh(12).unwrap(),
            build_square_mesh(5).unwrap(),
        ] {
            let mass = assemble_mass(&m);
            assert!(mass.is_symmetric());
            for _ in 0..100 {
                let v = rand_vec(&mut rng, m.num_nodes());
                assert!(quad_form(&mass, &v) > 0.0);
            }
        }
    }

    #[test]
    fn lumped_mass_row_sums() {
        let m = build_interval_mesh(2).unwrap();
        for (a, b) in assemble_lumped_mass(&m)
            .diagonal()
            .iter()
            .zip([0.25, 0.5, 0.25])
        {
            assert!((a - b).abs() < 1e-15);
        }

        let m2 = build_square_mesh(2).unwrap();
        let lumped = assemble_lumped_mass(&m2).diagonal();
        let mass = assemble_mass(&m2);
        for (i, l) in lumped.iter().enumerate() {
            let rs: f64 = mass.row(i).map(|(_, v)| v).sum();
            assert_eq!(*l, rs);
        }
        // centre node touches six triangles of area 1/8
        assert!((lumped[4] - 6.0 * 0.125 / 3.0).abs() < 1e-15);
        for m in [
            build_interval_mesh(17).unwrap(),
            build_square_mesh(9).unwrap(),
        ] {
            let s: f64 = assemble_lumped_mass(&m).diagonal().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_reproduces_p1_functions() {
        let m = Arc::new(build_interval_mesh(7).unwrap());
        let c = l2_project(&m, |_| 0.75).unwrap();
        assert!(c.coeffs().iter().all(|v| (v - 0.75).abs() < 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for mesh in [m, Arc::new(build_square_mesh(4).unwrap())] {
            let f = FeFunction::new(mesh.clone(), rand_vec(&mut rng, mesh.num_nodes())).unwrap();
            let p = l2_project(&mesh, |x| f.eval(x).unwrap()).unwrap();
            for (a, b) in p.coeffs().iter().zip(f.coeffs()) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn projection_of_x_squared_matches_dense_solve() {
        let m = Arc::new(build_interval_mesh(4).unwrap());
        let p = l2_project(&m, |x| x[0] * x[0]).unwrap();
        // dense oracle: exact load ∫ x² φ_i and exact mass matrix
        let h = 0.25f64;
        let mut dm = nalgebra::DMatrix::<f64>::zeros(5, 5);
        let mut b = nalgebra::DVector::<f64>::zeros(5);
        for e in 0..4 {
            let (a, c) = (e as f64 * h, (e + 1) as f64 * h);
            dm[(e, e)] += h / 3.0;
            dm[(e + 1, e + 1)] += h / 3.0;
            dm[(e, e + 1)] += h / 6.0;
            dm[(e + 1, e)] += h / 6.0;
            // ∫_a^c x² (c − x)/h dx and ∫_a^c x² (x − a)/h dx
            let i3 = (c.powi(3) - a.powi(3)) / 3.0;
            let i4 = (c.powi(4) - a.powi(4)) / 4.0;
            b[e] += (c * i3 - i4) / h;
            b[e + 1] += (i4 - a * i3) / h;
        }
        let x = dm.lu().solve(&b).unwrap();
        for i in 0..5 {
            assert!((p.coeffs()[i] - x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cg_diagonal_and_mass() {
        let a = SparseMatrix::from_diagonal(&[2.0, 4.0, 8.0]);
        let x = solve_spd(&a, &[1.0, 1.0, 1.0], DEFAULT_CG_TOL, 10).unwrap();
        assert_eq!(x, vec![0.5, 0.25, 0.125]);

        let m = build_square_mesh(6).unwrap();
        let mass = assemble_mass(&m);
        let b = mass.mul_vec(&vec![1.0; m.num_nodes()]);
        let x = solve_spd(&mass, &b, DEFAULT_CG_TOL, 1000).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn cg_matches_dense_solve_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let g = nalgebra::DMatrix::<f64>::from_fn(8, 8, |_, _| rng.random_range(-1.0..1.0));
            let spd = &g * g.transpose() + nalgebra::DMatrix::<f64>::identity(8, 8) * 0.5;
            let trip: Vec<_> = (0..8)
                .flat_map(|i| (0..8).map(move |j| (i, j)))
                .map(|(i, j)| (i, j, spd[(i, j)]))
                .collect();
            let a = SparseMatrix::from_triplets(8, &trip);
            let b = rand_vec(&mut rng, 8);
            let x = solve_spd(&a, &b, 1e-13, 200).unwrap();
            let xd = spd
                .clone()
                .cholesky()
                .unwrap()
                .solve(&nalgebra::DVector::from_vec(b.clone()));
            for i in 0..8 {
                assert!((x[i] - xd[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn cg_reports_failure() {
        let m = build_interval_mesh(50).unwrap();
        let a = assemble_stiffness(&m);
        let a = SparseMatrix::linear_combination(&[(1.0, &a), (1e-6, &assemble_mass(&m))]).unwrap();
        let b: Vec<f64> = (0..51).map(|i| (i as f64).sin()).collect();
        match solve_spd(&a, &b, 1e-14, 3) {
            Err(Error::Numerical { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected numerical error, got {other:?}"),
        }
        let bad = vec![f64::NAN; 51];
        assert!(solve_spd(&a, &bad, 1e-10, 10).is_err());
    }

    #[test]
    fn dimension_mismatch_is_invalid_argument() {
        let m = build_interval_mesh(3).unwrap();
        let mass = assemble_mass(&m);
        assert!(matches!(
            inner(&mass, &[1.0; 3], &[1.0; 4]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(FeFunction::new(Arc::new(m), vec![0.0; 2]).is_err());
    }

    proptest! {
        #[test]
        fn cg_residual_contract(seed in 0u64..1000, n in 2usize..40) {
            let m = build_interval_mesh(n).unwrap();
            let a = SparseMatrix::linear_combination(
                &[(1e-3, &assemble_stiffness(&m)), (1.0, &assemble_mass(&m))]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = rand_vec(&mut rng, n + 1);
            let x = solve_spd(&a, &b, 1e-10, 1000).unwrap();
            let r: Vec<f64> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
            prop_assert!(norm(&r) <= 1e-10 * norm(&b));
        }
    }

    #[test]
    fn banded_cholesky_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = build_square_mesh(5).unwrap();
        let a = SparseMatrix::linear_combination(&[
            (0.3, &assemble_stiffness(&m)),
            (1.0, &assemble_mass(&m)),
        ])
        .unwrap();
        assert_eq!(half_bandwidth(&a), 7);
        let f = BandedCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..a.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = f.solve(&b);
        let dense = nalgebra::DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j));
        let reference = dense
            .lu()
            .solve(&nalgebra::DVector::from_vec(b.clone()))
            .unwrap();
        for i in 0..x.len() {
            assert!((x[i] - reference[i]).abs() < 1e-12);
        }
        assert!(BandedCholesky::factor(&assemble_stiffness(&m)).is_err());
    }
}
