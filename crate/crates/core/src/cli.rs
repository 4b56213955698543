//! Batch front-end behind the `slipcell` binary.
//!
//! ```text
//! slipcell <command> [--config FILE] [--key value ...]
//! ```
//!
//! Configuration files hold `key = value` lines (`#` starts a comment);
//! command-line flags override them. Every run writes `PREFIX.csv` (also echoed
//! to stdout) and a `PREFIX.meta` sidecar listing every parameter actually used,
//! defaults included. `PREFIX` defaults to the command name.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use crate::cell::{g_upper, grid_energy, zigzag_energy, zigzag_optimize, AffineSlip, GUpperParams, ZigzagConfig};
use crate::error::{Error, Result};
use crate::kernel::{AngularTable, KernelOnCircle, MaterialCubic};
use crate::limit::{limit_energy, self_energy, GUpperDensity, PiecewiseAffineSlip, SlipDensity};
use crate::linetension::{psi0_cubic, psi0_quadrature, BurgersVector, CubicPrelog, KernelPrelog, Prelog};
use crate::phasefield::{
    build_dipole_stack, build_regularized_dipole, build_sharp_dipole, elastic_energy_spectral, minimize_energy,
    near_far_split, scaling_fit, stack_energies, total_energy, PhaseFieldConfig, TorusGrid,
};
use crate::relax::{AsymptoticDensity, RelaxParams, Relaxer};

pub const COMMANDS: [&str; 11] = [
    "psi0",
    "psirel",
    "psiinf",
    "cell-energy",
    "zigzag-scan",
    "threshold-scan",
    "phasefield-eval",
    "scaling-fit",
    "near-far",
    "selfenergy",
    "limit-energy",
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Parameters of one job. Every lookup is recorded, with its default when the
/// key was absent, so the metadata sidecar lists exactly what was used.
#[derive(Debug, Default)]
pub struct JobConfig {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s {
        "4pi" => 4.0 * PI,
        "pi" => PI,
        _ => s.parse::<f64>().map_err(|_| Error::Parse(format!("{key}: '{s}' is not a number")))?,
    };
    if !v.is_finite() {
        return Err(Error::Parse(format!("{key}: '{s}' is not finite")));
    }
    Ok(v)
}

impl JobConfig {
    /// Parse `key = value` lines.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values, used: RefCell::default() })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.replace('_', "-"), value.to_string());
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn record(&self, key: &str, value: String) {
        self.used.borrow_mut().insert(key.to_string(), value);
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn str_opt(&self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.record(key, v.clone());
        }
        v
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            Some(s) => {
                let v = parse_f64(key, s)?;
                self.record(key, s.clone());
                Ok(v)
            }
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        let s = self.str_or(key, &default.to_string());
        s.parse().map_err(|_| Error::Parse(format!("{key}: '{s}' is not a non-negative integer")))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.str_or(key, &default.to_string()).as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            s => Err(Error::Parse(format!("{key}: '{s}' is not a boolean"))),
        }
    }

    pub fn f64_list(&self, key: &str, default: Option<&str>) -> Result<Vec<f64>> {
        let s = match default {
            Some(d) => self.str_or(key, d),
            None => self.str_opt(key).ok_or_else(|| Error::Parse(format!("missing required key '{key}'")))?,
        };
        s.split(',').map(|x| parse_f64(key, x)).collect()
    }

    pub fn i64_list(&self, key: &str) -> Result<Vec<i64>> {
        let s = self.str_opt(key).ok_or_else(|| Error::Parse(format!("missing required key '{key}'")))?;
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("{key}: '{x}' is not an integer"))))
            .collect()
    }

    /// A unit direction; `angle` (radians) is accepted in place of `n`.
    pub fn direction(&self, key: &str) -> Result<[f64; 2]> {
        if !self.has(key) && self.has("angle") {
            let t = self.f64_or("angle", 0.0)?;
            return Ok([t.cos(), t.sin()]);
        }
        let v = self.f64_list(key, Some("1,0"))?;
        if v.len() != 2 {
            return Err(Error::Parse(format!("{key} needs two components")));
        }
        let r = v[0].hypot(v[1]);
        if !(r > 0.0) {
            return Err(Error::Parse(format!("{key} must be non-zero")));
        }
        Ok([v[0] / r, v[1] / r])
    }

    /// An `N×2` matrix written as `a11,a12;a21,a22;...`.
    pub fn matrix(&self, key: &str, default: Option<&str>) -> Result<AffineSlip> {
        let s = match default {
            Some(d) => self.str_or(key, d),
            None => self.str_opt(key).ok_or_else(|| Error::Parse(format!("missing required key '{key}'")))?,
        };
        let rows = s
            .split(';')
            .map(|r| {
                let v: Vec<f64> = r.split(',').map(|x| parse_f64(key, x)).collect::<Result<_>>()?;
                match v.as_slice() {
                    [a, b] => Ok([*a, *b]),
                    _ => Err(Error::Parse(format!("{key}: each row needs two entries"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        AffineSlip::new(rows)
    }

    /// Every parameter looked up so far, with the value used.
    pub fn used(&self) -> BTreeMap<String, String> {
        self.used.borrow().clone()
    }
}

/// Result of one command: a CSV table plus metadata and optional extra files.
#[derive(Debug, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub meta: BTreeMap<String, String>,
    /// `(suffix, contents)` written next to the CSV as `PREFIX.suffix`.
    pub extra: Vec<(String, Vec<u8>)>,
}

impl Report {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    fn row(&mut self, values: Vec<String>) {
        self.rows.push(values);
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.insert(key.to_string(), value.to_string());
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

struct Material {
    kernel: KernelOnCircle,
    cubic: Option<MaterialCubic>,
    prelog: Arc<dyn Prelog>,
}

fn material(cfg: &JobConfig, rep: &mut Report) -> Result<Material> {
    if let Some(path) = cfg.str_opt("kernel") {
        let table = AngularTable::from_csv_reader(BufReader::new(File::open(&path)?))?;
        let kernel = KernelOnCircle::from_table(table);
        let tol = cfg.f64_or("tol", 1e-10)?;
        let prelog: Arc<dyn Prelog> = Arc::new(KernelPrelog::new(kernel.clone(), tol)?);
        rep.meta("mu_over_4pi", "n/a (tabulated kernel)");
        return Ok(Material { kernel, cubic: None, prelog });
    }
    let mu = cfg.f64_or("mu", 4.0 * PI)?;
    if !cfg.has("mu") {
        cfg.record("mu", "4pi".into());
    }
    let nu = cfg.f64_or("nu", 1.0 / 3.0)?;
    let mat = MaterialCubic::new(mu, nu)?;
    rep.meta("mu_over_4pi", mat.mu_over_4pi());
    rep.meta("eta", mat.eta());
    Ok(Material { kernel: KernelOnCircle::cubic(mat), cubic: Some(mat), prelog: Arc::new(CubicPrelog(mat)) })
}

fn cubic_only(m: &Material, cmd: &str) -> Result<MaterialCubic> {
    m.cubic.ok_or_else(|| Error::Parse(format!("{cmd} needs a cubic material (mu, nu), not a kernel table")))
}

fn relax_params(cfg: &JobConfig) -> Result<RelaxParams> {
    let p_max = cfg.str_opt("p-max").map(|s| s.parse()).transpose().map_err(|_| Error::Parse("p-max".into()))?;
    let b_max = cfg.str_opt("b-max").map(|s| s.parse()).transpose().map_err(|_| Error::Parse("b-max".into()))?;
    Ok(RelaxParams { m_dirs: cfg.usize_or("m-dirs", 720)?, p_max, b_max })
}

fn asymptotic(cfg: &JobConfig, m: &Material) -> Result<AsymptoticDensity> {
    let relaxer = Arc::new(Relaxer::new(m.prelog.clone(), cfg.usize_or("m-dirs", 720)?)?);
    Ok(match cfg.str_opt("box") {
        Some(s) => AsymptoticDensity::new(relaxer, s.parse().map_err(|_| Error::Parse("box: not an integer".into()))?),
        None => AsymptoticDensity::with_default_box(relaxer),
    })
}

fn gupper_params(cfg: &JobConfig) -> Result<GUpperParams> {
    let d = GUpperParams::default();
    Ok(GUpperParams {
        laminate_normals: cfg.usize_or("laminate-normals", d.laminate_normals)?,
        triple_normals: cfg.usize_or("triple-normals", d.triple_normals)?,
        zigzag: cfg.bool_or("zigzag", d.zigzag)?,
        zigzag_free_angle: cfg.bool_or("zigzag-free-angle", d.zigzag_free_angle)?,
        iters: cfg.usize_or("iters", d.iters)?,
        ..d
    })
}

/// `g` on `N×2` matrices selected by `density`: the grid construction over
/// ψ∞ (`grid`), the cell-problem upper bound (`gupper`), or the closed forms
/// `frobenius` and `l1`.
fn with_density<T>(cfg: &JobConfig, m: &Material, body: impl FnOnce(&dyn SlipDensity) -> Result<T>) -> Result<T> {
    match cfg.str_or("density", "grid").as_str() {
        "frobenius" => body(&|a: &AffineSlip| a.frobenius()),
        "l1" => body(&|a: &AffineSlip| a.rows().iter().flatten().map(|x| x.abs()).sum::<f64>()),
        "grid" => {
            let walls = asymptotic(cfg, m)?;
            body(&|a: &AffineSlip| grid_energy(a, &walls))
        }
        "gupper" => {
            let walls = asymptotic(cfg, m)?;
            body(&GUpperDensity { walls: &walls, params: gupper_params(cfg)? })
        }
        other => Err(Error::Parse(format!("unknown density '{other}' (grid, gupper, frobenius, l1)"))),
    }
}

fn cmd_psi0(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["b", "n1", "n2", "psi0"]);
    let m = material(cfg, &mut rep)?;
    let b = cfg.f64_list("b", None)?;
    let n = cfg.direction("n")?;
    let method = cfg.str_or("method", if m.cubic.is_some() { "cubic" } else { "quadrature" });
    let v = match method.as_str() {
        "cubic" => psi0_cubic(&b, n, &cubic_only(&m, "psi0 method=cubic")?)?,
        "quadrature" => psi0_quadrature(&b, n, &m.kernel, cfg.f64_or("tol", 1e-10)?)?,
        other => return Err(Error::Parse(format!("unknown method '{other}'"))),
    };
    rep.row(vec![join(&b), f(n[0]), f(n[1]), f(v)]);
    Ok(rep)
}

fn cmd_psirel(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["b", "n1", "n2", "psi0", "psi_rel_upper", "parts"]);
    let m = material(cfg, &mut rep)?;
    let b = BurgersVector::new(cfg.i64_list("b")?);
    let n = cfg.direction("n")?;
    let params = relax_params(cfg)?;
    let relaxer = Relaxer::new(m.prelog.clone(), params.m_dirs)?;
    let (v, wit) = relaxer.psi_rel_upper_with_witness(&b, n, &params)?;
    rep.meta("p_max", params.resolved_p_max(&b));
    rep.meta("b_max", params.resolved_b_max(&b));
    let parts = wit.parts.iter().map(|p| format!("{:?}", p.burgers)).collect::<Vec<_>>().join(" ");
    let b_f = b.to_f64();
    rep.row(vec![join(&b_f), f(n[0]), f(n[1]), f(m.prelog.psi0(&b_f, n)), f(v), parts]);
    rep.extra.push(("witness.json".into(), wit.to_json().into_bytes()));
    Ok(rep)
}

fn cmd_psiinf(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["b", "n1", "n2", "psi_rel_upper", "psi_infinity"]);
    let m = material(cfg, &mut rep)?;
    let b = BurgersVector::new(cfg.i64_list("b")?);
    let n = cfg.direction("n")?;
    let params = relax_params(cfg)?;
    let s_max = cfg.usize_or("s-max", 4)?;
    let relaxer = Relaxer::new(m.prelog.clone(), params.m_dirs)?;
    let rel = relaxer.psi_rel_upper(&b, n, &params)?;
    let inf = relaxer.psi_infinity(&b, n, s_max, &params)?;
    rep.row(vec![join(&b.to_f64()), f(n[0]), f(n[1]), f(rel), f(inf)]);
    Ok(rep)
}

fn cmd_cell_energy(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["A", "grid", "g_upper", "witness"]);
    let m = material(cfg, &mut rep)?;
    let a = cfg.matrix("a", Some("1,0;0,-1"))?;
    let walls = asymptotic(cfg, &m)?;
    let params = gupper_params(cfg)?;
    let grid = grid_energy(&a, &walls);
    let (g, wit) = g_upper(&a, &walls, &params)?;
    let kind = match &wit {
        crate::cell::GWitness::Zero => "zero",
        crate::cell::GWitness::Grid => "grid",
        crate::cell::GWitness::Laminate(_) => "laminate",
        crate::cell::GWitness::Zigzag { .. } => "zigzag",
        crate::cell::GWitness::Topology { .. } => "topology",
    };
    let a_str = a.rows().iter().map(|r| format!("{},{}", r[0], r[1])).collect::<Vec<_>>().join(";");
    rep.row(vec![a_str, f(grid), f(g), kind.into()]);
    rep.extra.push(("witness.json".into(), serde_json::to_vec_pretty(&wit)?));
    Ok(rep)
}

fn cmd_zigzag_scan(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["delta", "e_cell", "e_over_sigma2"]);
    let m = material(cfg, &mut rep)?;
    let mat = cubic_only(&m, "zigzag-scan")?;
    let sigma = cfg.f64_or("sigma", 1.0)?;
    let steps = cfg.usize_or("steps", 200)?;
    if steps == 0 {
        return Err(Error::Parse("steps must be positive".into()));
    }
    // δ = σ/2 is excluded: the two diagonals would coincide
    for j in 0..steps {
        let delta = sigma / 2.0 * j as f64 / steps as f64;
        let e = zigzag_energy(&ZigzagConfig::new(sigma, delta, mat)?)?;
        rep.row(vec![f(delta), f(e.cell), f(e.cell / (sigma * sigma))]);
    }
    let opt = zigzag_optimize(sigma, &mat)?;
    rep.meta("delta_star", opt.delta);
    rep.meta("delta_star_over_sigma", opt.delta / sigma);
    rep.meta("e_star_per_area", opt.energy.per_area);
    rep.meta("e_grid_per_area", opt.grid.per_area);
    Ok(rep)
}

fn cmd_threshold_scan(cfg: &JobConfig) -> Result<Report> {
    let param = cfg.str_or("param", "eta");
    let mut rep = Report::new(&["nu", "eta", "delta_star_over_sigma", "gain_per_area"]);
    rep.meta("mu_over_4pi", 1.0);
    let (lo_d, hi_d) = if param == "eta" { (0.2, 0.6) } else { (0.15, 0.45) };
    let lo = cfg.f64_or("lo", lo_d)?;
    let hi = cfg.f64_or("hi", hi_d)?;
    let steps = cfg.usize_or("steps", 40)?;
    let tol = cfg.f64_or("tol", 1e-6)?;
    if steps == 0 || !(hi > lo) {
        return Err(Error::Parse("threshold-scan needs steps > 0 and hi > lo".into()));
    }
    let to_nu = |p: f64| -> Result<f64> {
        match param.as_str() {
            "eta" => Ok(MaterialCubic::nu_from_eta(p)),
            "nu" => Ok(p),
            other => Err(Error::Parse(format!("param must be eta or nu, got '{other}'"))),
        }
    };
    for j in 0..=steps {
        let p = lo + (hi - lo) * j as f64 / steps as f64;
        let mat = MaterialCubic::normalized(to_nu(p)?)?;
        let opt = zigzag_optimize(1.0, &mat)?;
        rep.row(vec![f(mat.nu), f(mat.eta()), f(opt.delta), f(opt.margin_per_area())]);
    }
    let t = match param.as_str() {
        "eta" => crate::cell::eta_threshold(lo, hi, tol)?,
        _ => crate::cell::nu_threshold(lo, hi, tol)?,
    };
    rep.meta("threshold", t);
    Ok(rep)
}

/// A grid read from `grid`, or built from `profile` with resolution `m`.
fn phasefield_grid(cfg: &JobConfig, dim: usize, m_default: usize, eps_default: f64) -> Result<TorusGrid> {
    if let Some(path) = cfg.str_opt("grid") {
        return TorusGrid::read_binary(BufReader::new(File::open(path)?));
    }
    let l = cfg.f64_or("l", 1.0)?;
    let mres = cfg.usize_or("m", m_default)?;
    let b = cfg.f64_list("b", Some(if dim == 2 { "1,0" } else { "1" }))?;
    match cfg.str_or("profile", "dipole").as_str() {
        "dipole" => build_regularized_dipole(l, mres, cfg.f64_or("eps", l * eps_default)?, &b),
        "sharp" => build_sharp_dipole(l, mres, &b),
        "stack" => build_dipole_stack(l, mres, cfg.f64_or("eps", l * eps_default)?, &b, cfg.usize_or("count", 4)?),
        other => Err(Error::Parse(format!("unknown profile '{other}' (dipole, sharp, stack)"))),
    }
}

fn cmd_phasefield_eval(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["iteration", "peierls", "elastic", "total"]);
    let m = material(cfg, &mut rep)?;
    let g = phasefield_grid(cfg, m.kernel.dim(), 256, 1.0 / 32.0)?;
    let pf = PhaseFieldConfig::new(cfg.f64_or("eps", g.period() / 32.0)?, m.kernel.clone(), g.period() / 4.0)?;
    let iters = cfg.usize_or("iters", 0)?;
    let e = total_energy(&g, &pf);
    rep.row(vec!["0".into(), f(e.peierls), f(e.elastic), f(e.total)]);
    if iters > 0 {
        let out = minimize_energy(&g, &pf, iters, cfg.f64_or("step", 0.01)?)?;
        let e = total_energy(&out.grid, &pf);
        rep.row(vec![iters.to_string(), f(e.peierls), f(e.elastic), f(e.total)]);
        rep.meta("accepted_steps", out.accepted);
        let mut buf = Vec::new();
        out.grid.write_binary(&mut buf)?;
        rep.extra.push(("grid.bin".into(), buf));
    }
    rep.meta("elastic_multiplier", "|xi| * pi * Q(xi/|xi|), Q the prelogarithmic matrix");
    Ok(rep)
}

fn cmd_scaling_fit(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["eps", "ln_inv_eps", "peierls", "elastic", "total"]);
    let m = material(cfg, &mut rep)?;
    let l = cfg.f64_or("l", 1.0)?;
    let mres = cfg.usize_or("m", 512)?;
    let b = cfg.f64_list("b", Some("1,0"))?;
    let eps = cfg.f64_list("eps", Some("0.0625,0.03125,0.015625,0.0078125"))?;
    let fit = scaling_fit(l, mres, &eps, &b, &m.kernel)?;
    for r in &fit.rows {
        rep.row(vec![f(r.eps), f(r.ln_inv_eps), f(r.peierls), f(r.elastic), f(r.total)]);
    }
    rep.meta("slope", fit.slope);
    rep.meta("intercept", fit.intercept);
    rep.meta("r2", fit.r2);
    rep.meta("slope_without_coarsest", fit.slope_without_coarsest());
    let reference = 2.0 * l * m.prelog.psi0(&b, [1.0, 0.0]);
    rep.meta("slope_reference_2L_psi0", reference);
    rep.meta("slope_over_reference", fit.slope / reference);
    if let Some(counts) = cfg.str_opt("stack-counts") {
        let counts: Vec<usize> = counts
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("stack-counts: '{s}'"))))
            .collect::<Result<_>>()?;
        let eps_s = cfg.f64_or("stack-eps", *eps.last().unwrap_or(&(l / 64.0)))?;
        let rows = stack_energies(l, mres, eps_s, &b, &counts, &m.kernel)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["count", "total", "ratio"])?;
        for r in rows {
            w.write_record([r.count.to_string(), f(r.total), f(r.ratio)])?;
        }
        rep.extra.push(("stack.csv".into(), w.into_inner().map_err(|e| Error::Io(e.into_error()))?));
    }
    Ok(rep)
}

fn cmd_near_far(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["eps", "rho", "near", "far", "self_cell", "near_plus_far", "spectral", "tolerance"]);
    let m = material(cfg, &mut rep)?;
    let g = phasefield_grid(cfg, m.kernel.dim(), 64, 1.0 / 16.0)?;
    let eps = cfg.f64_or("eps", g.period() / 16.0)?;
    let rho = cfg.f64_or("rho", g.period() / 4.0)?;
    let pf = PhaseFieldConfig::new(eps, m.kernel.clone(), rho)?;
    let s = near_far_split(&g, &pf, rho)?;
    let spectral = elastic_energy_spectral(&g, pf.symbol());
    rep.row(vec![f(eps), f(rho), f(s.near), f(s.far), f(s.self_cell), f(s.near + s.far), f(spectral), f(s.tolerance)]);
    rep.meta("cutoff", s.cutoff);
    Ok(rep)
}

fn slip_field(cfg: &JobConfig) -> Result<PiecewiseAffineSlip> {
    match cfg.str_opt("slip") {
        Some(path) => PiecewiseAffineSlip::read_json(BufReader::new(File::open(path)?)),
        None => PiecewiseAffineSlip::half_strip(cfg.f64_or("l", 1.0)?, &cfg.matrix("a", Some("0,1;0,0"))?),
    }
}

fn cmd_selfenergy(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["bulk", "jump", "total"]);
    let m = material(cfg, &mut rep)?;
    let u = slip_field(cfg)?;
    let e = with_density(cfg, &m, |g| self_energy(&u, g))?;
    rep.row(vec![f(e.bulk), f(e.jump), f(e.total)]);
    rep.meta("cells", u.cells.len());
    rep.meta("jump_edges", u.edges().len());
    Ok(rep)
}

fn cmd_limit_energy(cfg: &JobConfig) -> Result<Report> {
    let mut rep = Report::new(&["bulk", "jump", "elastic", "total", "theta_j", "jump_increments"]);
    let m = material(cfg, &mut rep)?;
    let g = match cfg.str_opt("grid") {
        Some(path) => TorusGrid::read_binary(BufReader::new(File::open(path)?))?,
        None => slip_field(cfg)?.to_grid(cfg.usize_or("m", 128)?)?,
    };
    let e = with_density(cfg, &m, |d| limit_energy(&g, d, &m.kernel))?;
    rep.row(vec![f(e.bulk), f(e.jump), f(e.elastic), f(e.total), f(e.theta_j), e.jump_count.to_string()]);
    Ok(rep)
}

/// Run one command on a configuration.
pub fn execute(command: &str, cfg: &JobConfig) -> Result<Report> {
    let mut rep = match command {
        "psi0" => cmd_psi0(cfg),
        "psirel" => cmd_psirel(cfg),
        "psiinf" => cmd_psiinf(cfg),
        "cell-energy" => cmd_cell_energy(cfg),
        "zigzag-scan" => cmd_zigzag_scan(cfg),
        "threshold-scan" => cmd_threshold_scan(cfg),
        "phasefield-eval" => cmd_phasefield_eval(cfg),
        "scaling-fit" => cmd_scaling_fit(cfg),
        "near-far" => cmd_near_far(cfg),
        "selfenergy" => cmd_selfenergy(cfg),
        "limit-energy" => cmd_limit_energy(cfg),
        other => Err(Error::Parse(format!("unknown command '{other}'"))),
    }?;
    rep.meta.insert("command".into(), command.into());
    rep.meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    for (k, v) in cfg.used() {
        rep.meta.insert(format!("param.{k}"), v);
    }
    Ok(rep)
}

fn usage() -> String {
    format!("usage: slipcell <command> [--config FILE] [--out PREFIX] [--key value ...]\ncommands: {}", COMMANDS.join(", "))
}

fn parse_args(args: &[String]) -> Result<(String, JobConfig, PathBuf)> {
    let command = args.first().ok_or_else(|| Error::Parse(usage()))?.clone();
    if !COMMANDS.contains(&command.as_str()) {
        return Err(Error::Parse(format!("unknown command '{command}'\n{}", usage())));
    }
    let mut flags = Vec::new();
    let mut it = args[1..].iter();
    while let Some(a) = it.next() {
        let key = a.strip_prefix("--").ok_or_else(|| Error::Parse(format!("expected --key, got '{a}'")))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (key.to_string(), it.next().ok_or_else(|| Error::Parse(format!("--{key} needs a value")))?.clone()),
        };
        flags.push((key, value));
    }
    let mut cfg = match flags.iter().find(|(k, _)| k == "config") {
        Some((_, path)) => JobConfig::from_text(&std::fs::read_to_string(path)?)?,
        None => JobConfig::default(),
    };
    let mut out = None;
    for (k, v) in flags {
        match k.as_str() {
            "config" => {}
            "out" => out = Some(PathBuf::from(v)),
            _ => cfg.set(&k, &v),
        }
    }
    if out.is_none() {
        out = cfg.values.remove("out").map(PathBuf::from);
    }
    let out = out.unwrap_or_else(|| PathBuf::from(&command));
    Ok((command, cfg, out))
}

fn with_suffix(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write_report(rep: &Report, prefix: &std::path::Path, stdout: &mut dyn Write) -> Result<()> {
    let body = rep.csv()?;
    std::fs::write(with_suffix(prefix, "csv"), &body)?;
    let mut meta = BufWriter::new(File::create(with_suffix(prefix, "meta"))?);
    for (k, v) in &rep.meta {
        writeln!(meta, "{k}={v}")?;
    }
    meta.flush()?;
    for (suffix, data) in &rep.extra {
        std::fs::write(with_suffix(prefix, suffix), data)?;
    }
    stdout.write_all(&body)?;
    Ok(())
}

/// Parse `args` (without the program name), run, write reports; returns the
/// process exit status.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (command, cfg, out) = match parse_args(args) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(stderr, "slipcell: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&command, &cfg).and_then(|rep| write_report(&rep, &out, stdout)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "slipcell {command}: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_CONFIG
            }
        }
    }
}
