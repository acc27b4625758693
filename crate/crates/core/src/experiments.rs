//! Ground-truth patterns, synthetic data, initial guesses, the recovery
//! error metric, and noise-averaged experiment runs.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::blur::BlurOperator;
use crate::error::{Error, Result};
use crate::fem::{FeFunction, FeSystem};
use crate::mesh::{build_interval_mesh, build_square_mesh, cells_for_width, Mesh};
use crate::pgm::GrayImage;
use crate::phasefield::{ModelParams, Potential};
use crate::solver::{run_recovery, RecoveryResult};

/// A binary (±1) ground truth on the unit interval or square.
#[derive(Debug, Clone, PartialEq)]
pub enum BinaryPattern {
    /// Alternating bars on `[0, 1]`; the first segment is `+1` and the value
    /// flips at each cut.
    Barcode { cuts: Vec<f64> },
    /// `+1` inside the star-shaped curve
    /// `r(θ) = radius (1 + Σ a_k cos(k θ + φ_k))` around `center`, `−1` outside.
    Blob {
        center: [f64; 2],
        radius: f64,
        harmonics: Vec<(u32, f64, f64)>,
    },
    /// Grid of equal square blocks, row 0 at the top; `true` is `+1`.
    Blocks { cells: Vec<Vec<bool>> },
    /// Grayscale image stretched over the square, thresholded at 128.
    RasterImage(GrayImage),
}

const UPC_LEFT: [&str; 10] = [
    "0001101", "0011001", "0010011", "0111101", "0100011", "0110001", "0101111", "0111011",
    "0110111", "0001011",
];

impl BinaryPattern {
    /// Two dark bars and the gap between them, all of width 0.2, with
    /// margins of the same width.
    pub fn three_bars() -> Self {
        BinaryPattern::Barcode {
            cuts: vec![0.2, 0.4, 0.6, 0.8],
        }
    }

    /// A UPC-A symbol with 9-module quiet zones on each side, 113 modules in
    /// total, so the narrowest bar is `1/113` wide. Dark modules are `−1`.
    pub fn upc_a(digits: &str) -> Result<Self> {
        let ds: Vec<usize> = digits
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::invalid("UPC digits must be decimal"))?;
        if ds.len() != 12 {
            return Err(Error::invalid("UPC-A needs 12 digits"));
        }
        let mut modules = String::new();
        modules.push_str(&"0".repeat(9));
        modules.push_str("101");
        for &d in &ds[..6] {
            modules.push_str(UPC_LEFT[d]);
        }
        modules.push_str("01010");
        for &d in &ds[6..] {
            let right: String = UPC_LEFT[d]
                .chars()
                .map(|c| if c == '0' { '1' } else { '0' })
                .collect();
            modules.push_str(&right);
        }
        modules.push_str("101");
        modules.push_str(&"0".repeat(9));
        let bits: Vec<u8> = modules.bytes().collect();
        let total = bits.len() as f64;
        let cuts = (1..bits.len())
            .filter(|&i| bits[i] != bits[i - 1])
            .map(|i| i as f64 / total)
            .collect();
        Ok(BinaryPattern::Barcode { cuts })
    }

    /// The barcode used for the 1D experiments.
    pub fn default_barcode() -> Self {
        Self::upc_a("036000291452").expect("valid digits")
    }

    pub fn default_blob() -> Self {
        BinaryPattern::Blob {
            center: [0.5, 0.5],
            radius: 0.27,
            harmonics: vec![(3, 0.18, 0.3), (5, 0.06, 1.1)],
        }
    }

    /// A 25×25 pattern with QR-style finder squares in three corners, timing
    /// rows and seeded pseudo-random data modules.
    pub fn qr_like(seed: u64) -> Self {
        use rand::Rng;
        let n = 25;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cells = vec![vec![false; n]; n];
        for row in cells.iter_mut() {
            for c in row.iter_mut() {
                *c = rng.random_bool(0.5);
            }
        }
        let finder = |cells: &mut Vec<Vec<bool>>, r0: usize, c0: usize| {
            for r in 0..9 {
                for c in 0..9 {
                    let (rr, cc) = (r0 as isize + r as isize - 1, c0 as isize + c as isize - 1);
                    if rr < 0 || cc < 0 || rr >= n as isize || cc >= n as isize {
                        continue;
                    }
                    let (dr, dc) = ((r as isize - 4).abs(), (c as isize - 4).abs());
                    let ring = dr.max(dc);
                    // dark (false) centre 3×3 and outer ring, light between and around
                    cells[rr as usize][cc as usize] = !(ring <= 1 || ring == 3);
                }
            }
        };
        finder(&mut cells, 0, 0);
        finder(&mut cells, 0, n - 7);
        finder(&mut cells, n - 7, 0);
        for i in 8..n - 8 {
            cells[6][i] = i % 2 == 1;
            cells[i][6] = i % 2 == 1;
        }
        BinaryPattern::Blocks { cells }
    }

    pub fn dim(&self) -> usize {
        match self {
            BinaryPattern::Barcode { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BinaryPattern::Barcode { cuts } => {
                if cuts.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
                    return Err(Error::invalid("barcode cuts must lie in (0, 1)"));
                }
                if cuts.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid("barcode cuts must be strictly increasing"));
                }
            }
            BinaryPattern::Blob { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::invalid("blob radius must be positive"));
                }
            }
            BinaryPattern::Blocks { cells } => {
                let cols = cells.first().map(Vec::len).unwrap_or(0);
                if cols == 0 || cells.iter().any(|r| r.len() != cols) {
                    return Err(Error::invalid(
                        "block matrix must be nonempty and rectangular",
                    ));
                }
            }
            BinaryPattern::RasterImage(img) => {
                if img.width == 0 || img.height == 0 {
                    return Err(Error::invalid("empty raster image"));
                }
            }
        }
        Ok(())
    }

    fn blob_radius(radius: f64, harmonics: &[(u32, f64, f64)], theta: f64) -> f64 {
        radius
            * (1.0
                + harmonics
                    .iter()
                    .map(|&(k, a, ph)| a * (k as f64 * theta + ph).cos())
                    .sum::<f64>())
    }

    /// Value of the pattern at a point; points on a discontinuity take the
    /// limit from the right (and from above in 2D).
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let grid = |cols: usize, rows: usize| {
            let col = ((x[0] * cols as f64).floor().max(0.0) as usize).min(cols - 1);
            let row = ((((1.0 - x[1]) * rows as f64).ceil() - 1.0).max(0.0) as usize).min(rows - 1);
            (col, row)
        };
        match self {
            BinaryPattern::Barcode { cuts } => {
                let flips = cuts.iter().filter(|&&c| x[0] >= c).count();
                if flips % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            BinaryPattern::Blob {
                center,
                radius,
                harmonics,
            } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let theta = dy.atan2(dx);
                if dx.hypot(dy) <= Self::blob_radius(*radius, harmonics, theta) {
                    1.0
                } else {
                    -1.0
                }
            }
            BinaryPattern::Blocks { cells } => {
                let (col, row) = grid(cells[0].len(), cells.len());
                if cells[row][col] {
                    1.0
                } else {
                    -1.0
                }
            }
            BinaryPattern::RasterImage(img) => {
                let (col, row) = grid(img.width, img.height);
                if img.get(col, row) >= 128 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Nodal ±1 representation of `pattern` on `mesh`.
pub fn rasterize(pattern: &BinaryPattern, mesh: &Arc<Mesh>) -> Result<FeFunction> {
    pattern.validate()?;
    if pattern.dim() != mesh.dim() {
        return Err(Error::invalid(format!(
            "{}D pattern on a {}D mesh",
            pattern.dim(),
            mesh.dim()
        )));
    }
    Ok(FeFunction::interpolate(mesh.clone(), |x| {
        pattern.value_at(x)
    }))
}

/// Width `ω` of the smallest feature of the pattern.
pub fn min_feature_width(pattern: &BinaryPattern) -> f64 {
    match pattern {
        BinaryPattern::Barcode { cuts } => {
            let mut edges = vec![0.0];
            edges.extend_from_slice(cuts);
            edges.push(1.0);
            edges
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min)
        }
        BinaryPattern::Blob {
            radius, harmonics, ..
        } => {
            let r_min = (0..3600)
                .map(|i| {
                    BinaryPattern::blob_radius(*radius, harmonics, 2.0 * PI * i as f64 / 3600.0)
                })
                .fold(f64::INFINITY, f64::min);
            2.0 * r_min
        }
        BinaryPattern::Blocks { cells } => {
            let rows = cells.len().max(1);
            let cols = cells.first().map(Vec::len).unwrap_or(1).max(1);
            (1.0 / rows as f64).min(1.0 / cols as f64)
        }
        BinaryPattern::RasterImage(img) => {
            // shortest constant run along rows and columns, in domain units
            let on = |c: usize, r: usize| img.get(c, r) >= 128;
            let mut best = usize::MAX;
            for r in 0..img.height {
                let mut run = 1;
                for c in 1..img.width {
                    if on(c, r) == on(c - 1, r) {
                        run += 1;
                    } else {
                        best = best.min(run);
                        run = 1;
                    }
                }
                if run < img.width {
                    best = best.min(run);
                }
            }
            let px = 1.0 / img.width.max(img.height) as f64;
            if best == usize::MAX {
                1.0
            } else {
                best as f64 * px
            }
        }
    }
}

/// Additive Gaussian noise of variance `gamma`, drawn node by node from a
/// ChaCha8 stream seeded with `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub gamma: f64,
    pub seed: u64,
}

/// `y_d = S_h ū + ζ`.
pub fn synthesize_data(
    u_true: &FeFunction,
    blur: &BlurOperator,
    noise: NoiseSpec,
) -> Result<FeFunction> {
    if !(noise.gamma >= 0.0) {
        return Err(Error::invalid("noise variance must be non-negative"));
    }
    let mut y = blur.apply(u_true)?;
    if noise.gamma > 0.0 {
        let normal =
            Normal::new(0.0, noise.gamma.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for v in y.coeffs_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(y)
}

/// Affinely maps `[min y_d, max y_d]` onto `[-1, 1]` (then clamps). Constant
/// data gives the zero function.
pub fn initial_guess(y_d: &FeFunction) -> FeFunction {
    let (lo, hi) = y_d
        .coeffs()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !(hi > lo) {
        return y_d.map(|_| 0.0);
    }
    y_d.map(|v| ((2.0 * v - (hi + lo)) / (hi - lo)).clamp(-1.0, 1.0))
}

/// Sign projection onto `{−1, +1}`; zero maps to `+1`.
pub fn project_binary(u: &FeFunction) -> FeFunction {
    u.map(|v| if v >= 0.0 { 1.0 } else { -1.0 })
}

fn require_1d(u: &FeFunction) -> Result<()> {
    if u.mesh().dim() != 1 {
        return Err(Error::Unsupported(
            "binary TV and E are defined on 1D meshes only".into(),
        ));
    }
    Ok(())
}

/// Total variation of a ±1 nodal function on an interval mesh: two per sign change.
pub fn tv_binary(u: &FeFunction) -> Result<f64> {
    require_1d(u)?;
    let c = u.coeffs();
    if c.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("tv_binary expects values in {-1, +1}"));
    }
    Ok(2.0 * c.windows(2).filter(|w| w[0] != w[1]).count() as f64)
}

/// Exact `L¹` norm of a P1 function on an interval mesh.
pub fn l1_norm_1d(u: &FeFunction) -> Result<f64> {
    require_1d(u)?;
    let mesh = u.mesh();
    let c = u.coeffs();
    Ok(mesh
        .elements()
        .enumerate()
        .map(|(e, el)| {
            let (a, b) = (c[el[0]], c[el[1]]);
            let h = mesh.element_measure(e);
            if a * b >= 0.0 {
                0.5 * h * (a.abs() + b.abs())
            } else {
                0.5 * h * (a * a + b * b) / (a.abs() + b.abs())
            }
        })
        .sum())
}

/// `E = ¼ |TV(P u) − TV(ū)| + ½ ‖P u − ū‖_{L¹}`.
pub fn error_metric(u_rec: &FeFunction, u_true: &FeFunction) -> Result<f64> {
    require_1d(u_rec)?;
    u_rec.check_same_mesh(u_true)?;
    let p = project_binary(u_rec);
    let tv_true = tv_binary(u_true)?;
    let tv_rec = tv_binary(&p)?;
    let diff = FeFunction::new(
        p.mesh().clone(),
        p.coeffs()
            .iter()
            .zip(u_true.coeffs())
            .map(|(a, b)| a - b)
            .collect(),
    )?;
    Ok(0.25 * (tv_rec - tv_true).abs() + 0.5 * l1_norm_1d(&diff)?)
}

/// Fraction of nodes where the sign projection of `u_rec` disagrees with `u_true`.
pub fn sign_mismatch_fraction(u_rec: &FeFunction, u_true: &FeFunction) -> Result<f64> {
    u_rec.check_same_mesh(u_true)?;
    let p = project_binary(u_rec);
    let bad = p
        .coeffs()
        .iter()
        .zip(u_true.coeffs())
        .filter(|(a, b)| a != b)
        .count();
    Ok(bad as f64 / p.coeffs().len() as f64)
}

/// A ground truth rasterised on a mesh together with its blur operator.
#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub pattern: BinaryPattern,
    pub blur: Arc<BlurOperator>,
    pub u_true: FeFunction,
}

impl RecoveryProblem {
    /// Builds the mesh from `h` (never coarser than requested) and the blur
    /// operator from `alpha`.
    pub fn new(pattern: BinaryPattern, alpha: f64, h: f64) -> Result<Self> {
        let n = cells_for_width(pattern.dim(), h)?;
        Self::with_cells(pattern, alpha, n)
    }

    pub fn with_cells(pattern: BinaryPattern, alpha: f64, cells: usize) -> Result<Self> {
        let mesh = Arc::new(match pattern.dim() {
            1 => build_interval_mesh(cells)?,
            _ => build_square_mesh(cells)?,
        });
        let blur = Arc::new(BlurOperator::new(
            Arc::new(FeSystem::new(mesh.clone())),
            alpha,
        )?);
        let u_true = rasterize(&pattern, &mesh)?;
        Ok(Self {
            pattern,
            blur,
            u_true,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.blur.mesh()
    }

    pub fn data(&self, noise: NoiseSpec) -> Result<FeFunction> {
        synthesize_data(&self.u_true, &self.blur, noise)
    }

    /// Synthesises data for `seed` and recovers from the scaled-and-clamped data.
    pub fn solve(
        &self,
        params: &ModelParams,
        potential: Potential,
        seed: u64,
    ) -> Result<(FeFunction, RecoveryResult)> {
        let y_d = self.data(NoiseSpec {
            gamma: params.gamma,
            seed,
        })?;
        let u0 = initial_guess(&y_d);
        let result = run_recovery(&y_d, &self.blur, params, potential, &u0)?;
        Ok((y_d, result))
    }
}

#[derive(Debug, Clone)]
pub struct RealizationOutcome {
    pub seed: u64,
    pub error: std::result::Result<f64, String>,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct AveragedError {
    /// Mean `E` over successful realisations (NaN if none succeeded).
    pub mean: f64,
    pub runs: Vec<RealizationOutcome>,
    pub failures: usize,
}

/// Mean error over `n_realizations` noise seeds `base_seed..base_seed + n`.
/// Realisations run on the current rayon pool; results are kept in seed order.
pub fn averaged_error(
    problem: &RecoveryProblem,
    params: &ModelParams,
    potential: Potential,
    n_realizations: usize,
    base_seed: u64,
) -> Result<AveragedError> {
    if n_realizations == 0 {
        return Err(Error::invalid("need at least one realisation"));
    }
    params.validate()?;
    let runs: Vec<RealizationOutcome> = (0..n_realizations as u64)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed + k;
            match problem
                .solve(params, potential, seed)
                .and_then(|(_, res)| Ok((error_metric(&res.final_u, &problem.u_true)?, res)))
            {
                Ok((e, res)) => RealizationOutcome {
                    seed,
                    error: Ok(e),
                    iterations: res.iterations,
                    converged: res.converged,
                    monotone: res.monotone,
                },
                Err(err) => RealizationOutcome {
                    seed,
                    error: Err(err.to_string()),
                    iterations: 0,
                    converged: false,
                    monotone: false,
                },
            }
        })
        .collect();
    let ok: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.error.as_ref().ok().copied())
        .collect();
    let mean = if ok.is_empty() {
        f64::NAN
    } else {
        ok.iter().sum::<f64>() / ok.len() as f64
    };
    Ok(AveragedError {
        mean,
        failures: runs.len() - ok.len(),
        runs,
    })
}
