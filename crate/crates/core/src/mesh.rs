//! Uniform simplicial meshes of the unit interval and the unit square.
//!
//! Nodes of the interval mesh are stored in ascending order of `x`. Nodes of
//! the square mesh are stored row-major starting at the bottom-left corner,
//! i.e. node `(i, j)` (column `i`, row `j`) has index `j * (n + 1) + i`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Interval { cells: usize },
    Square { cells_per_side: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    kind: MeshKind,
    /// Flattened coordinates, `dim` values per node.
    coords: Vec<f64>,
    /// Flattened connectivity, `dim + 1` node indices per element.
    connectivity: Vec<usize>,
    h: f64,
}

/// Builds the mesh of `[0, 1]` with `n_cells` equal intervals.
pub fn build_interval_mesh(n_cells: usize) -> Result<Mesh> {
    if n_cells == 0 {
        return Err(Error::invalid("interval mesh needs at least one cell"));
    }
    let coords = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
    let connectivity = (0..n_cells).flat_map(|e| [e, e + 1]).collect();
    Ok(Mesh {
        kind: MeshKind::Interval { cells: n_cells },
        coords,
        connectivity,
        h: 1.0 / n_cells as f64,
    })
}

/// Builds the mesh of `[0, 1]^2` with `n` cells per side, each square split
/// along its bottom-left to top-right diagonal.
pub fn build_square_mesh(n_cells_per_side: usize) -> Result<Mesh> {
    let n = n_cells_per_side;
    if n == 0 {
        return Err(Error::invalid(
            "square mesh needs at least one cell per side",
        ));
    }
    let stride = n + 1;
    let mut coords = Vec::with_capacity(2 * stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            coords.push(i as f64 / n as f64);
            coords.push(j as f64 / n as f64);
        }
    }
    let mut connectivity = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let bl = j * stride + i;
            let br = bl + 1;
            let tl = bl + stride;
            let tr = tl + 1;
            // counter-clockwise, sharing the diagonal bl-tr
            connectivity.extend_from_slice(&[bl, br, tr]);
            connectivity.extend_from_slice(&[bl, tr, tl]);
        }
    }
    Ok(Mesh {
        kind: MeshKind::Square { cells_per_side: n },
        coords,
        connectivity,
        h: std::f64::consts::SQRT_2 / n as f64,
    })
}

/// Number of cells needed so that the element diameter does not exceed `h`.
pub fn cells_for_width(dim: usize, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!(
            "grid width must be positive, got {h}"
        )));
    }
    let n = match dim {
        1 => (1.0 / h).ceil(),
        2 => (std::f64::consts::SQRT_2 / h).ceil(),
        _ => return Err(Error::invalid(format!("unsupported dimension {dim}"))),
    };
    // guard against 1/h landing a hair above an integer
    let n = n as usize;
    let reduced = n.saturating_sub(1).max(1);
    let width = |cells: usize| match dim {
        1 => 1.0 / cells as f64,
        _ => std::f64::consts::SQRT_2 / cells as f64,
    };
    if reduced < n && width(reduced) <= h * (1.0 + 1e-12) {
        Ok(reduced)
    } else {
        Ok(n.max(1))
    }
}

impl Mesh {
    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            MeshKind::Interval { .. } => 1,
            MeshKind::Square { .. } => 2,
        }
    }

    /// Maximal element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn num_elements(&self) -> usize {
        self.connectivity.len() / (self.dim() + 1)
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.dim() + 1;
        &self.connectivity[e * k..(e + 1) * k]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.connectivity.chunks_exact(self.dim() + 1)
    }

    /// Length (1D) or area (2D) of element `e`.
    pub fn element_measure(&self, e: usize) -> f64 {
        let el = self.element(e);
        match self.dim() {
            1 => (self.node(el[1])[0] - self.node(el[0])[0]).abs(),
            _ => {
                let (a, b, c) = (self.node(el[0]), self.node(el[1]), self.node(el[2]));
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
            }
        }
    }

    /// Cells per side of the structured grid (1D: number of intervals).
    pub fn cells_per_side(&self) -> usize {
        match self.kind {
            MeshKind::Interval { cells } => cells,
            MeshKind::Square { cells_per_side } => cells_per_side,
        }
    }

    /// Locates the element containing `point` and returns it together with
    /// the barycentric coordinates of `point` in that element.
    pub fn locate(&self, point: &[f64]) -> Option<(usize, [f64; 3])> {
        let n = self.cells_per_side();
        let cell = |t: f64| -> Option<usize> {
            if !(-1e-14..=1.0 + 1e-14).contains(&t) {
                return None;
            }
            Some(((t * n as f64).floor() as usize).min(n - 1))
        };
        match self.kind {
            MeshKind::Interval { .. } => {
                let e = cell(point[0])?;
                let el = self.element(e);
                let (x0, x1) = (self.node(el[0])[0], self.node(el[1])[0]);
                let t = (point[0] - x0) / (x1 - x0);
                Some((e, [1.0 - t, t, 0.0]))
            }
            MeshKind::Square { .. } => {
                let i = cell(point[0])?;
                let j = cell(point[1])?;
                let s = point[0] * n as f64 - i as f64;
                let t = point[1] * n as f64 - j as f64;
                let base = 2 * (j * n + i);
                if t <= s {
                    // lower triangle (bl, br, tr)
                    Some((base, [1.0 - s, s - t, t]))
                } else {
                    // upper triangle (bl, tr, tl)
                    Some((base + 1, [1.0 - t, s, t - s]))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_smallest_and_uniform() {
        let m = build_interval_mesh(1).unwrap();
        assert_eq!(m.num_nodes(), 2);
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.h(), 1.0);

        let m = build_interval_mesh(4).unwrap();
        let xs: Vec<f64> = (0..m.num_nodes()).map(|i| m.node(i)[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.h(), 0.25);
    }

    #[test]
    fn interval_reference_resolution() {
        let m = build_interval_mesh(6038).unwrap();
        assert!((m.h() - 1.656e-4).abs() < 1e-7);
        assert!((m.h() - 1.67e-4).abs() / 1.67e-4 < 0.01);
    }

    #[test]
    fn zero_cells_rejected() {
        assert!(matches!(
            build_interval_mesh(0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_square_mesh(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn square_small_meshes() {
        let m = build_square_mesh(1).unwrap();
        assert_eq!((m.num_nodes(), m.num_elements()), (4, 2));
        let area: f64 = (0..2).map(|e| m.element_measure(e)).sum();
        assert!((area - 1.0).abs() < 1e-15);

        let m = build_square_mesh(2).unwrap();
        assert_eq!((m.num_nodes(), m.num_elements()), (9, 8));
        for e in 0..8 {
            assert!((m.element_measure(e) - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn square_reference_resolution() {
        let m = build_square_mesh(410).unwrap();
        assert!((m.h() - 0.00345).abs() < 1e-5);
    }

    #[test]
    fn measures_sum_to_one_and_counts_match() {
        for n in [1, 3, 7, 16, 33] {
            let m = build_interval_mesh(n).unwrap();
            assert_eq!((m.num_nodes(), m.num_elements()), (n + 1, n));
            let s: f64 = (0..m.num_elements()).map(|e| m.element_measure(e)).sum();
            assert!((s - 1.0).abs() < 1e-12);

            let m = build_square_mesh(n).unwrap();
            assert_eq!(
                (m.num_nodes(), m.num_elements()),
                ((n + 1) * (n + 1), 2 * n * n)
            );
            let s: f64 = (0..m.num_elements()).map(|e| m.element_measure(e)).sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!((m.h() - std::f64::consts::SQRT_2 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn refinement_halves_h() {
        for n in [1, 5, 12] {
            let a = build_interval_mesh(n).unwrap();
            let b = build_interval_mesh(2 * n).unwrap();
            assert_eq!(a.h(), 2.0 * b.h());
        }
    }

    #[test]
    fn every_node_is_used_and_indices_valid() {
        for m in [
            build_interval_mesh(5).unwrap(),
            build_square_mesh(4).unwrap(),
        ] {
            let mut used = vec![false; m.num_nodes()];
            for el in m.elements() {
                for &v in el {
                    assert!(v < m.num_nodes());
                    used[v] = true;
                }
            }
            assert!(used.into_iter().all(|u| u));
            for e in 0..m.num_elements() {
                assert!(m.element_measure(e) > 0.0);
            }
        }
    }

    #[test]
    fn triangles_do_not_overlap() {
        // every sample point away from edges lies in exactly one triangle
        let m = build_square_mesh(3).unwrap();
        let inside = |e: usize, p: [f64; 2]| {
            let el = m.element(e);
            let (a, b, c) = (m.node(el[0]), m.node(el[1]), m.node(el[2]));
            let cross = |u: &[f64], v: &[f64]| {
                (v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0])
            };
            cross(a, b) > 1e-12 && cross(b, c) > 1e-12 && cross(c, a) > 1e-12
        };
        for k in 0..400 {
            let p = [
                ((k * 37) % 97) as f64 / 97.0 + 0.001,
                ((k * 53) % 89) as f64 / 89.0 + 0.002,
            ];
            let hits = (0..m.num_elements()).filter(|&e| inside(e, p)).count();
            assert!(hits <= 1, "point {p:?} inside {hits} triangles");
        }
    }

    #[test]
    fn locate_returns_consistent_barycentrics() {
        let m = build_square_mesh(4).unwrap();
        for p in [[0.1, 0.2], [0.9, 0.05], [0.5, 0.5], [1.0, 1.0], [0.0, 0.0]] {
            let (e, bary) = m.locate(&p).unwrap();
            let el = m.element(e);
            let mut q = [0.0; 2];
            for k in 0..3 {
                assert!(bary[k] >= -1e-12);
                q[0] += bary[k] * m.node(el[k])[0];
                q[1] += bary[k] * m.node(el[k])[1];
            }
            assert!((q[0] - p[0]).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn cells_for_width_rounds_up() {
        assert_eq!(cells_for_width(1, 0.25).unwrap(), 4);
        assert_eq!(cells_for_width(1, 0.3).unwrap(), 4);
        assert_eq!(cells_for_width(1, 1.0 / 3.0).unwrap(), 3);
        assert_eq!(
            cells_for_width(2, std::f64::consts::SQRT_2 / 128.0).unwrap(),
            128
        );
        assert!(cells_for_width(1, 0.0).is_err());
    }
}
