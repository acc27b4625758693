//! Configuration parsing and the pipelines behind the `binrec` binary.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::{
    averaged_error, error_metric, initial_guess, min_feature_width, sign_mismatch_fraction,
    BinaryPattern, NoiseSpec, RecoveryProblem,
};
use crate::fem::FeFunction;
use crate::oracle::{run_oracle_checks, Perturbation};
use crate::pgm::{read_pgm, to_gray, write_pgm, GrayImage};
use crate::phasefield::{parameter_heuristics, ModelParams, Potential};
use crate::solver::{run_recovery_with, RecoveryResult, StopRule};

/// Starting iterate for recovery runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    /// Scaled and clamped data.
    #[default]
    Data,
    /// The ground truth itself (diagnostics only).
    Truth,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synthesize,
    Recover,
    Sweep,
    Compare,
    OracleCheck,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "synthesize" => Command::Synthesize,
            "recover" => Command::Recover,
            "sweep" => Command::Sweep,
            "compare" => Command::Compare,
            "oracle-check" | "oracle_check" => Command::OracleCheck,
            other => return Err(Error::invalid(format!("unknown command '{other}'"))),
        })
    }
}

/// Explicit parameter values that replace the heuristic defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub h: Option<f64>,
    pub rho: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub n_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Ground truth; required by every command except `oracle-check`.
    pub pattern: Option<BinaryPattern>,
    /// Blurring strength; required by every command except `sweep` and `oracle-check`.
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub potential: Potential,
    pub overrides: Overrides,
    pub seed: u64,
    pub n_realizations: usize,
    pub out_dir: PathBuf,
    pub stop_on: StopRule,
    pub init: InitialGuess,
    pub sweep_alphas: Vec<f64>,
    pub sweep_gammas: Vec<f64>,
    pub oracle_instances: usize,
    /// Negative-control corruption for `oracle-check`.
    pub oracle_perturbation: f64,
}

impl RunConfig {
    pub fn pattern(&self) -> Result<&BinaryPattern> {
        self.pattern
            .as_ref()
            .ok_or_else(|| cfg_err(0, "missing required key 'pattern'"))
    }

    pub fn omega(&self) -> Result<f64> {
        Ok(min_feature_width(self.pattern()?))
    }

    /// Heuristic parameters for `potential` with the configured overrides applied.
    pub fn params_for(&self, potential: Potential) -> Result<ModelParams> {
        let alpha = self
            .alpha
            .ok_or_else(|| cfg_err(0, "missing required key 'alpha'"))?;
        let gamma = self
            .gamma
            .ok_or_else(|| cfg_err(0, "missing required key 'gamma'"))?;
        self.params_at(potential, alpha, gamma)
    }

    pub fn params_at(&self, potential: Potential, alpha: f64, gamma: f64) -> Result<ModelParams> {
        let p = parameter_heuristics(self.omega()?, potential)?.with_problem(alpha, gamma);
        self.apply_overrides(p)
    }

    fn apply_overrides(&self, mut p: ModelParams) -> Result<ModelParams> {
        let o = &self.overrides;
        p.sigma = o.sigma.unwrap_or(p.sigma);
        p.epsilon = o.epsilon.unwrap_or(p.epsilon);
        p.h = o.h.unwrap_or(p.h);
        p.rho = o.rho.unwrap_or(p.rho);
        p.tol = o.tol.unwrap_or(p.tol);
        p.max_iters = o.max_iters.unwrap_or(p.max_iters);
        p.validate()?;
        Ok(p)
    }

    pub fn problem(&self, alpha: f64, h: f64) -> Result<RecoveryProblem> {
        match self.overrides.n_cells {
            Some(n) => RecoveryProblem::with_cells(self.pattern()?.clone(), alpha, n),
            None => RecoveryProblem::new(self.pattern()?.clone(), alpha, h),
        }
    }
}

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| cfg_err(line, format!("cannot parse '{v}' as a value for {key}")))
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(line, key, s))
        .collect()
}

/// Parses `key = value` lines. `#` starts a comment. Relative image paths
/// are resolved against `base_dir`.
pub fn parse_config_in(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut pattern_name: Option<(usize, String)> = None;
    let mut cuts = None;
    let mut digits = None;
    let mut blocks = None;
    let mut image = None;
    let mut pattern_seed = 0u64;
    let mut alpha = None;
    let mut gamma = None;
    let mut cfg = RunConfig {
        command: Command::Recover,
        pattern: None,
        alpha: None,
        gamma: None,
        potential: Potential::SmoothDoubleWell,
        overrides: Overrides::default(),
        seed: 0,
        n_realizations: 20,
        out_dir: PathBuf::from("."),
        stop_on: StopRule::L2Diff,
        init: InitialGuess::Data,
        sweep_alphas: vec![1e-4, 1e-3, 1e-2, 1e-1],
        sweep_gammas: vec![0.2, 0.4],
        oracle_instances: 20,
        oracle_perturbation: 0.0,
    };
    // positive-value check applied to the overrides
    let pos = |line: usize, key: &str, v: f64| -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(cfg_err(line, format!("{key} must be positive, got {v}")))
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, v) = (key.trim(), value.trim());
        let o = &mut cfg.overrides;
        match key {
            "command" => {
                cfg.command = v.parse().map_err(|e: Error| cfg_err(line, e.to_string()))?
            }
            "pattern" => pattern_name = Some((line, v.to_string())),
            "cuts" => cuts = Some(parse_list(line, key, v)?),
            "digits" => digits = Some((line, v.to_string())),
            "blocks" => blocks = Some(parse_num::<usize>(line, key, v)?),
            "image" => image = Some((line, base_dir.join(v))),
            "pattern_seed" => pattern_seed = parse_num(line, key, v)?,
            "alpha" => alpha = Some(pos(line, key, parse_num(line, key, v)?)?),
            "gamma" => {
                let g: f64 = parse_num(line, key, v)?;
                if !(g >= 0.0) || !g.is_finite() {
                    return Err(cfg_err(
                        line,
                        format!("gamma must be non-negative, got {g}"),
                    ));
                }
                gamma = Some(g);
            }
            "potential" => {
                cfg.potential = v.parse().map_err(|e: Error| cfg_err(line, e.to_string()))?
            }
            "sigma" => o.sigma = Some(pos(line, key, parse_num(line, key, v)?)?),
            "epsilon" => o.epsilon = Some(pos(line, key, parse_num(line, key, v)?)?),
            "h" => o.h = Some(pos(line, key, parse_num(line, key, v)?)?),
            "rho" => o.rho = Some(pos(line, key, parse_num(line, key, v)?)?),
            "tol" => o.tol = Some(pos(line, key, parse_num(line, key, v)?)?),
            "max_iters" => {
                let m: usize = parse_num(line, key, v)?;
                if m == 0 {
                    return Err(cfg_err(line, "max_iters must be at least 1"));
                }
                o.max_iters = Some(m);
            }
            "n_cells" => {
                let n: usize = parse_num(line, key, v)?;
                if n == 0 {
                    return Err(cfg_err(line, "n_cells must be at least 1"));
                }
                o.n_cells = Some(n);
            }
            "seed" => cfg.seed = parse_num(line, key, v)?,
            "n_realizations" => {
                cfg.n_realizations = parse_num(line, key, v)?;
                if cfg.n_realizations == 0 {
                    return Err(cfg_err(line, "n_realizations must be at least 1"));
                }
            }
            "out" => cfg.out_dir = PathBuf::from(v),
            "stop_on" => {
                cfg.stop_on = match v {
                    "l2" => StopRule::L2Diff,
                    "energy" => StopRule::EnergyChange,
                    _ => {
                        return Err(cfg_err(
                            line,
                            format!("stop_on must be 'l2' or 'energy', got '{v}'"),
                        ))
                    }
                }
            }
            "init" => {
                cfg.init = match v {
                    "data" => InitialGuess::Data,
                    "truth" => InitialGuess::Truth,
                    "zero" => InitialGuess::Zero,
                    _ => {
                        return Err(cfg_err(
                            line,
                            format!("init must be data, truth or zero, got '{v}'"),
                        ))
                    }
                }
            }
            "sweep_alpha" => cfg.sweep_alphas = parse_list(line, key, v)?,
            "sweep_gamma" => cfg.sweep_gammas = parse_list(line, key, v)?,
            "oracle_instances" => cfg.oracle_instances = parse_num(line, key, v)?,
            "oracle_perturbation" => cfg.oracle_perturbation = parse_num(line, key, v)?,
            _ => return Err(cfg_err(line, format!("unknown key '{key}'"))),
        }
    }

    if let Some((pline, name)) = pattern_name {
        let pattern = match name.as_str() {
            "three_bars" => BinaryPattern::three_bars(),
            "barcode" => match (cuts, digits) {
                (Some(c), _) => BinaryPattern::Barcode { cuts: c },
                (None, Some((l, d))) => {
                    BinaryPattern::upc_a(&d).map_err(|e| cfg_err(l, e.to_string()))?
                }
                (None, None) => BinaryPattern::default_barcode(),
            },
            "blob" => BinaryPattern::default_blob(),
            "qr" => BinaryPattern::qr_like(pattern_seed),
            "checkerboard" => {
                let k = blocks.unwrap_or(2).max(1);
                BinaryPattern::Blocks {
                    cells: (0..k)
                        .map(|r| (0..k).map(|c| (r + c) % 2 == 0).collect())
                        .collect(),
                }
            }
            "image" => {
                let (l, path) =
                    image.ok_or_else(|| cfg_err(pline, "pattern = image needs an 'image' path"))?;
                BinaryPattern::RasterImage(read_pgm(&path).map_err(|e| cfg_err(l, e.to_string()))?)
            }
            other => return Err(cfg_err(pline, format!("unknown pattern '{other}'"))),
        };
        pattern
            .validate()
            .map_err(|e| cfg_err(pline, e.to_string()))?;
        cfg.pattern = Some(pattern);
    }
    cfg.alpha = alpha;
    cfg.gamma = gamma;
    // surface invariant violations of the combined parameter set now
    for p in Potential::ALL {
        let alpha = alpha.unwrap_or(cfg.sweep_alphas.first().copied().unwrap_or(1e-2));
        let gamma = gamma.unwrap_or(0.0);
        let checked = match cfg.pattern {
            Some(_) => cfg.params_at(p, alpha, gamma),
            // no feature width yet: check the overrides against unit-width defaults
            None => parameter_heuristics(1.0, p)
                .and_then(|d| cfg.apply_overrides(d.with_problem(alpha, gamma))),
        };
        checked.map_err(|e| cfg_err(0, e.to_string()))?;
    }
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, Path::new("."))
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_in(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Output files are written under a `.partial` name and renamed once the
/// whole command has succeeded.
struct Outputs {
    dir: PathBuf,
    pending: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
        })
    }

    fn partial(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(format!("{name}.partial"));
        self.pending.push(p.clone());
        p
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.partial(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    }

    fn commit(self) -> Result<Vec<PathBuf>> {
        let mut done = Vec::new();
        for p in self.pending {
            let name = p.to_string_lossy();
            let target = PathBuf::from(name.strip_suffix(".partial").unwrap_or(&name));
            fs::rename(&p, &target).map_err(|e| Error::io(&p, e))?;
            done.push(target);
        }
        Ok(done)
    }
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub potential: Potential,
    pub params: ModelParams,
    pub n_cells: usize,
    pub seed: u64,
    /// Error metric (1D only).
    pub error: Option<f64>,
    pub sign_mismatch: f64,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
    pub final_energy: f64,
}

const SUMMARY_HEADER: &str =
    "potential,alpha,gamma,sigma,epsilon,h,n_cells,rho,tol,seed,E,sign_mismatch,iterations,converged,monotone,final_energy\n";

impl SummaryRow {
    fn csv(&self) -> String {
        let p = &self.params;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.potential,
            fmt_f64(p.alpha),
            fmt_f64(p.gamma),
            fmt_f64(p.sigma),
            fmt_f64(p.epsilon),
            fmt_f64(p.h),
            self.n_cells,
            fmt_f64(p.rho),
            fmt_f64(p.tol),
            self.seed,
            self.error.map(fmt_f64).unwrap_or_default(),
            fmt_f64(self.sign_mismatch),
            self.iterations,
            self.converged,
            self.monotone,
            fmt_f64(self.final_energy),
        )
    }
}

/// What a command produced.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<SummaryRow>,
    /// Human-readable lines for the terminal.
    pub lines: Vec<String>,
    /// False when a check failed (oracle-check only); files are still written.
    pub ok: bool,
}

fn grid_image(u: &FeFunction) -> GrayImage {
    let n = u.mesh().cells_per_side();
    let side = n + 1;
    let c = u.coeffs();
    let mut pixels = Vec::with_capacity(side * side);
    for row in 0..side {
        let j = n - row;
        for i in 0..side {
            pixels.push(to_gray(c[j * side + i]));
        }
    }
    GrayImage {
        width: side,
        height: side,
        pixels,
    }
}

fn function_dumps(
    out: &mut Outputs,
    prefix: &str,
    u_true: &FeFunction,
    y_d: &FeFunction,
    u_rec: Option<&FeFunction>,
) -> Result<()> {
    let mesh = u_true.mesh();
    if mesh.dim() == 1 {
        let mut s = String::from(if u_rec.is_some() {
            "x,u_true,y_d,u_rec\n"
        } else {
            "x,u_true,y_d\n"
        });
        for i in 0..mesh.num_nodes() {
            let _ = write!(
                s,
                "{},{},{}",
                fmt_f64(mesh.node(i)[0]),
                fmt_f64(u_true.coeffs()[i]),
                fmt_f64(y_d.coeffs()[i])
            );
            if let Some(u) = u_rec {
                let _ = write!(s, ",{}", fmt_f64(u.coeffs()[i]));
            }
            s.push('\n');
        }
        let name = if u_rec.is_some() {
            "solution.csv"
        } else {
            "data.csv"
        };
        out.write(&format!("{prefix}{name}"), s.as_bytes())?;
    } else {
        let mut emit = |name: String, u: &FeFunction| -> Result<()> {
            let p = out.partial(&name);
            write_pgm(&p, &grid_image(u))
        };
        emit(format!("{prefix}y_d.pgm"), y_d)?;
        match u_rec {
            Some(u) => emit(format!("{prefix}u_rec.pgm"), u)?,
            None => emit(format!("{prefix}u_true.pgm"), u_true)?,
        }
    }
    Ok(())
}

fn recover_one(
    cfg: &RunConfig,
    potential: Potential,
    out: &mut Outputs,
    prefix: &str,
) -> Result<SummaryRow> {
    let params = cfg.params_for(potential)?;
    let problem = cfg.problem(params.alpha, params.h)?;
    let y_d = problem.data(NoiseSpec {
        gamma: params.gamma,
        seed: cfg.seed,
    })?;
    let u0 = match cfg.init {
        InitialGuess::Data => initial_guess(&y_d),
        InitialGuess::Truth => problem.u_true.clone(),
        InitialGuess::Zero => y_d.map(|_| 0.0),
    };

    let energy_path = out.partial(&format!("{prefix}energy.csv"));
    let file = fs::File::create(&energy_path).map_err(|e| Error::io(&energy_path, e))?;
    let mut energy = std::io::BufWriter::new(file);
    let mut io_err = None;
    let _ = energy.write_all(b"iter,energy,l2_diff\n");
    let result: Result<RecoveryResult> = run_recovery_with(
        &y_d,
        &problem.blur,
        &params,
        potential,
        &u0,
        cfg.stop_on,
        |rec, _| {
            if io_err.is_none() {
                if let Err(e) = writeln!(
                    energy,
                    "{},{},{}",
                    rec.iteration,
                    fmt_f64(rec.energy),
                    fmt_f64(rec.l2_diff)
                ) {
                    io_err = Some(e);
                }
            }
        },
    );
    energy.flush().map_err(|e| Error::io(&energy_path, e))?;
    if let Some(e) = io_err {
        return Err(Error::io(&energy_path, e));
    }
    let result = result?;

    function_dumps(out, prefix, &problem.u_true, &y_d, Some(&result.final_u))?;
    let error = if problem.mesh().dim() == 1 {
        Some(error_metric(&result.final_u, &problem.u_true)?)
    } else {
        None
    };
    Ok(SummaryRow {
        potential,
        params,
        n_cells: problem.mesh().cells_per_side(),
        seed: cfg.seed,
        error,
        sign_mismatch: sign_mismatch_fraction(&result.final_u, &problem.u_true)?,
        iterations: result.iterations,
        converged: result.converged,
        monotone: result.monotone,
        final_energy: result
            .energies
            .last()
            .copied()
            .unwrap_or(result.initial_energy),
    })
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    for r in rows {
        s.push_str(&r.csv());
    }
    s
}

fn describe(r: &SummaryRow) -> String {
    format!(
        "{}: iterations={} converged={} monotone={} E={} sign_mismatch={:.4} energy={:.9e}",
        r.potential,
        r.iterations,
        r.converged,
        r.monotone,
        r.error.map_or("n/a".into(), |e| format!("{e:.6}")),
        r.sign_mismatch,
        r.final_energy
    )
}

/// Executes `cfg.command`, writing outputs into `cfg.out_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let mut out = Outputs::new(&cfg.out_dir)?;
    let mut report = RunReport {
        ok: true,
        ..Default::default()
    };
    match cfg.command {
        Command::Synthesize => {
            let params = cfg.params_for(cfg.potential)?;
            let problem = cfg.problem(params.alpha, params.h)?;
            let y_d = problem.data(NoiseSpec {
                gamma: params.gamma,
                seed: cfg.seed,
            })?;
            function_dumps(&mut out, "", &problem.u_true, &y_d, None)?;
            report.lines.push(format!(
                "synthesized {} nodes (omega={:.6}, seed={})",
                problem.mesh().num_nodes(),
                cfg.omega()?,
                cfg.seed
            ));
        }
        Command::Recover => {
            let row = recover_one(cfg, cfg.potential, &mut out, "")?;
            report.lines.push(describe(&row));
            report.summary.push(row);
            out.write("summary.csv", summary_csv(&report.summary).as_bytes())?;
        }
        Command::Compare => {
            for p in Potential::ALL {
                let row = recover_one(cfg, p, &mut out, &format!("{}_", p.name()))?;
                report.lines.push(describe(&row));
                report.summary.push(row);
            }
            out.write("summary.csv", summary_csv(&report.summary).as_bytes())?;
        }
        Command::Sweep => {
            if cfg.pattern()?.dim() != 1 {
                return Err(Error::Unsupported(
                    "sweep averages the 1D error metric".into(),
                ));
            }
            let mut s = String::from(
                "alpha,gamma,potential,n_realizations,mean_E,failures,mean_iterations,all_converged,all_monotone\n",
            );
            for &alpha in &cfg.sweep_alphas {
                for &gamma in &cfg.sweep_gammas {
                    let params = cfg.params_at(cfg.potential, alpha, gamma)?;
                    let problem = cfg.problem(alpha, params.h)?;
                    let avg = averaged_error(
                        &problem,
                        &params,
                        cfg.potential,
                        cfg.n_realizations,
                        cfg.seed,
                    )?;
                    let ok: Vec<_> = avg.runs.iter().filter(|r| r.error.is_ok()).collect();
                    let mean_it = ok.iter().map(|r| r.iterations as f64).sum::<f64>()
                        / ok.len().max(1) as f64;
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{}",
                        fmt_f64(alpha),
                        fmt_f64(gamma),
                        cfg.potential,
                        cfg.n_realizations,
                        fmt_f64(avg.mean),
                        avg.failures,
                        fmt_f64(mean_it),
                        ok.iter().all(|r| r.converged),
                        ok.iter().all(|r| r.monotone),
                    );
                    report.lines.push(format!(
                        "alpha={alpha:e} gamma={gamma}: mean E={:.6} ({} failures)",
                        avg.mean, avg.failures
                    ));
                }
            }
            out.write("sweep.csv", s.as_bytes())?;
        }
        Command::OracleCheck => {
            let oracle = run_oracle_checks(
                cfg.oracle_instances,
                cfg.seed,
                Perturbation {
                    stiffness_shift: cfg.oracle_perturbation,
                },
            )?;
            for r in &oracle.rows {
                report.lines.push(format!(
                    "{:<9} {} max_dev={:.3e}{} tol={:.0e}",
                    r.check,
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.max_deviation,
                    r.energy_gap
                        .map_or(String::new(), |g| format!(" energy_gap={g:.3e}")),
                    r.tolerance
                ));
            }
            report.ok = oracle.all_passed();
            out.write("oracle.csv", oracle.to_csv().as_bytes())?;
        }
    }
    report.files = out.commit()?;
    Ok(report)
}

/// Caps rayon parallelism from `BINREC_THREADS` if it is set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BINREC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("BINREC_THREADS must be an integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    Ok(())
}
