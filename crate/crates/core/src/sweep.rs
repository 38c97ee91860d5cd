//! Single-point analysis and deterministic `(Δ, η)` parameter maps.
//!
//! `sweep.csv` columns, in order (`NA` never appears; missing values are empty):
//!
//! | column | meaning |
//! |---|---|
//! | `delta_over_gamma` | `Δ = Δa = Δc`, units of γ |
//! | `eta_over_gamma` | drive `η`, units of γ |
//! | `n_max` | Fock truncation used at this point |
//! | `nbar_2q` | two-qubit steady-state `⟨a†a⟩` |
//! | `nbar_1q_1`, `nbar_1q_2` | single-qubit reference `⟨a†a⟩` |
//! | `R` | radiance witness |
//! | `s_min` | `min_θ S_θ` |
//! | `theta_s_rad` | minimising angle in `[0, π)` |
//! | `residual` | `‖L vec ρ‖_∞` of the two-qubit steady state |
//! | `tail_population` | population of the three highest Fock levels |
//! | `truncation_flag` | `1` when the tail exceeds 1e-6 |
//! | `K1`..`K5` | Klyshko ratios, empty where undefined |
//! | `error` | `;`-separated error codes, empty on success |
//!
//! Floats are written with 17 significant digits, so the file is
//! byte-identical for any worker count.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CouplingPhase, ModelParams};
use crate::observables::{
    cavity_state, klyshko, photon_distribution, single_qubit_photon_numbers, two_qubit_steady_state, wigner,
    KlyshkoResult, PhotonDistribution, QuadratureMoments, RadianceWitness, SqueezingResult, WignerAxes, WignerGrid,
    DEFAULT_KLYSHKO_FLOOR, WIGNER_CONVENTION,
};
use crate::parallel::{map_indexed, map_sequential, with_workers};

pub const CSV_HEADER: &str = "delta_over_gamma,eta_over_gamma,n_max,nbar_2q,nbar_1q_1,nbar_1q_2,R,s_min,theta_s_rad,residual,tail_population,truncation_flag,K1,K2,K3,K4,K5,error";
pub const DISSIPATOR_CONVENTION: &str = "rate * (2 c rho c^dag - rho c^dag c - c^dag c rho)";
/// Number of Klyshko columns in `sweep.csv`.
pub const KLYSHKO_COLUMNS: usize = 5;
const MIRROR_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Observable {
    R,
    Smin,
    #[serde(rename = "thetaS")]
    ThetaS,
    #[serde(rename = "nbar")]
    Nbar,
    Kn,
}

impl Observable {
    pub const ALL: [Observable; 5] = [
        Observable::R,
        Observable::Smin,
        Observable::ThetaS,
        Observable::Nbar,
        Observable::Kn,
    ];
}

impl std::str::FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(Observable::R),
            "Smin" => Ok(Observable::Smin),
            "thetaS" => Ok(Observable::ThetaS),
            "nbar" => Ok(Observable::Nbar),
            "Kn" => Ok(Observable::Kn),
            other => Err(Error::invalid(format!(
                "unknown observable {other:?} (expected R, Smin, thetaS, nbar, Kn)"
            ))),
        }
    }
}

/// `[min, max, count]`; a single point sits at `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisRange(pub f64, pub f64, pub usize);

impl AxisRange {
    pub fn values(&self) -> Vec<f64> {
        let AxisRange(min, max, count) = *self;
        if count == 1 {
            return vec![min];
        }
        (0..count)
            .map(|i| {
                if i + 1 == count {
                    max
                } else {
                    min + (max - min) * i as f64 / (count - 1) as f64
                }
            })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.2 == 0 || !self.0.is_finite() || !self.1.is_finite() || self.1 < self.0 {
            return Err(Error::invalid(format!("{name} = {self:?} needs finite min <= max and count >= 1")));
        }
        Ok(())
    }
}

fn default_delta() -> AxisRange {
    AxisRange(-15.0, 15.0, 41)
}
fn default_eta() -> AxisRange {
    AxisRange(0.0, 3.0, 31)
}
fn default_g() -> f64 {
    10.0
}
fn default_kappa() -> f64 {
    0.5
}
fn default_observables() -> BTreeSet<Observable> {
    Observable::ALL.into_iter().collect()
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Sweep description; every field has a default, so `{}` is a valid config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_delta")]
    pub delta_range: AxisRange,
    #[serde(default = "default_eta")]
    pub eta_range: AxisRange,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Fixed truncation; `None` picks it per point from `η` (see [`auto_n_max`]).
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub phase: CouplingPhase,
    #[serde(default = "default_observables")]
    pub observables: BTreeSet<Observable>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    #[serde(default)]
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            delta_range: default_delta(),
            eta_range: default_eta(),
            g: default_g(),
            kappa: default_kappa(),
            n_max: None,
            phase: CouplingPhase::Out,
            observables: default_observables(),
            output: default_output(),
            workers: 0,
        }
    }
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.delta_range.validate("delta_range")?;
        self.eta_range.validate("eta_range")?;
        if self.observables.is_empty() {
            return Err(Error::invalid("observables must not be empty"));
        }
        if let Some(n) = self.n_max {
            if n < 1 {
                return Err(Error::invalid("n_max must be at least 1"));
            }
        }
        self.params(0.0, 0.0).validate()
    }

    /// Model parameters at one grid point.
    pub fn params(&self, delta: f64, eta: f64) -> ModelParams {
        let n_max = self.n_max.unwrap_or_else(|| auto_n_max(eta));
        ModelParams::preset(self.phase, delta, eta, self.g, self.kappa, n_max)
    }

    /// Grid points in row-major order over `(delta, eta)`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let etas = self.eta_range.values();
        self.delta_range
            .values()
            .into_iter()
            .flat_map(|d| etas.iter().map(move |&e| (d, e)))
            .collect()
    }
}

/// Default truncation: 20 up to `η = 1.5γ`, 30 up to `3γ`, 40 beyond.
pub fn auto_n_max(eta: f64) -> usize {
    if eta <= 1.5 {
        20
    } else if eta <= 3.0 {
        30
    } else {
        40
    }
}

/// What [`run_point`] should compute beyond the steady state itself.
#[derive(Clone, Debug, PartialEq)]
pub struct PointRequest {
    pub observables: BTreeSet<Observable>,
    pub wigner: Option<WignerAxes>,
    pub klyshko_floor: f64,
}

impl PointRequest {
    pub fn all() -> Self {
        PointRequest {
            observables: default_observables(),
            wigner: None,
            klyshko_floor: DEFAULT_KLYSHKO_FLOOR,
        }
    }

    pub fn with_wigner(mut self, axes: WignerAxes) -> Self {
        self.wigner = Some(axes);
        self
    }
}

/// Everything computed at one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct ObservablesRecord {
    pub params: ModelParams,
    pub nbar_2q: f64,
    pub residual: f64,
    pub tail_population: f64,
    pub truncation_suspect: bool,
    pub photon_distribution: PhotonDistribution,
    pub witness: Option<RadianceWitness>,
    /// Error code when the witness was requested but could not be evaluated.
    pub witness_error: Option<String>,
    pub squeezing: Option<SqueezingResult>,
    pub klyshko: Option<KlyshkoResult>,
    pub wigner: Option<WignerGrid>,
}

/// Steady state and requested observables at `p`.
///
/// Solver failures of the two-qubit system abort the point; a witness that
/// cannot be evaluated is recorded in `witness_error` instead.
pub fn run_point(p: &ModelParams, request: &PointRequest) -> Result<ObservablesRecord> {
    let rep = two_qubit_steady_state(p)?;
    let moments = QuadratureMoments::of(&rep.rho);
    let pdist = photon_distribution(&rep.rho)?;
    let wants = |o| request.observables.contains(&o);

    let (witness, witness_error) = if wants(Observable::R) {
        match single_qubit_photon_numbers(p).and_then(|n1| RadianceWitness::from_photon_numbers(moments.n, n1, p)) {
            Ok(w) => (Some(w), None),
            Err(e) => (None, Some(e.code().to_string())),
        }
    } else {
        (None, None)
    };
    let squeezing = (wants(Observable::Smin) || wants(Observable::ThetaS)).then(|| moments.min_squeezing());
    let klyshko = wants(Observable::Kn).then(|| klyshko(&pdist, request.klyshko_floor));
    let wigner = match &request.wigner {
        Some(axes) => Some(wigner(&cavity_state(&rep.rho)?, axes)?),
        None => None,
    };
    Ok(ObservablesRecord {
        params: p.clone(),
        nbar_2q: moments.n,
        residual: rep.residual,
        tail_population: rep.tail_population,
        truncation_suspect: rep.truncation_suspect,
        photon_distribution: pdist,
        witness,
        witness_error,
        squeezing,
        klyshko,
        wigner,
    })
}

/// One line of `sweep.csv`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepResultRow {
    pub delta: f64,
    pub eta: f64,
    pub n_max: usize,
    pub nbar_2q: Option<f64>,
    pub nbar_1q_1: Option<f64>,
    pub nbar_1q_2: Option<f64>,
    pub r: Option<f64>,
    pub s_min: Option<f64>,
    pub theta_s: Option<f64>,
    pub residual: Option<f64>,
    pub tail_population: Option<f64>,
    pub truncation_flag: bool,
    pub k: [Option<f64>; KLYSHKO_COLUMNS],
    pub errors: Vec<String>,
}

impl SweepResultRow {
    fn from_point(delta: f64, eta: f64, p: &ModelParams, cfg: &SweepConfig) -> Self {
        let mut row = SweepResultRow {
            delta,
            eta,
            n_max: p.n_max,
            ..Default::default()
        };
        let request = PointRequest {
            observables: cfg.observables.clone(),
            wigner: None,
            klyshko_floor: DEFAULT_KLYSHKO_FLOOR,
        };
        let rec = match run_point(p, &request) {
            Ok(rec) => rec,
            Err(e) => {
                row.errors.push(e.code().to_string());
                return row;
            }
        };
        let wants = |o| cfg.observables.contains(&o);
        row.residual = Some(rec.residual);
        row.tail_population = Some(rec.tail_population);
        row.truncation_flag = rec.truncation_suspect;
        if wants(Observable::Nbar) || wants(Observable::R) {
            row.nbar_2q = Some(rec.nbar_2q);
        }
        if let Some(w) = &rec.witness {
            row.nbar_1q_1 = Some(w.nbar_1q[0]);
            row.nbar_1q_2 = Some(w.nbar_1q[1]);
            row.r = Some(w.r);
        }
        row.errors.extend(rec.witness_error);
        if let Some(s) = &rec.squeezing {
            row.s_min = wants(Observable::Smin).then_some(s.s_min);
            row.theta_s = wants(Observable::ThetaS).then_some(s.theta_s);
        }
        if let Some(k) = &rec.klyshko {
            for (n, slot) in row.k.iter_mut().enumerate() {
                *slot = k.get(n + 1);
            }
        }
        row
    }

    /// The row as written to `sweep.csv` (no trailing newline).
    pub fn to_csv(&self) -> String {
        let mut cells = vec![fmt_float(self.delta), fmt_float(self.eta), self.n_max.to_string()];
        for v in [
            self.nbar_2q,
            self.nbar_1q_1,
            self.nbar_1q_2,
            self.r,
            self.s_min,
            self.theta_s,
            self.residual,
            self.tail_population,
        ] {
            cells.push(fmt_opt(v));
        }
        cells.push(if self.truncation_flag { "1" } else { "0" }.to_string());
        cells.extend(self.k.iter().map(|&v| fmt_opt(v)));
        cells.push(self.errors.join(";"));
        cells.join(",")
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

#[derive(Clone, Debug, Serialize)]
pub struct MirrorCheck {
    pub checked_pairs: usize,
    pub max_s_min_deviation: f64,
    pub max_r_deviation: f64,
    pub warnings: Vec<String>,
}

/// Compare `s_min` and `R` at `±Δ` for every mirrored pair of grid rows.
pub fn mirror_symmetry(rows: &[SweepResultRow], cfg: &SweepConfig) -> MirrorCheck {
    let (nd, ne) = (cfg.delta_range.2, cfg.eta_range.2);
    let deltas = cfg.delta_range.values();
    let mut out = MirrorCheck {
        checked_pairs: 0,
        max_s_min_deviation: 0.0,
        max_r_deviation: 0.0,
        warnings: Vec::new(),
    };
    for i in 0..nd / 2 {
        let m = nd - 1 - i;
        if (deltas[i] + deltas[m]).abs() > 1e-12 * deltas[i].abs().max(1.0) {
            continue;
        }
        for j in 0..ne {
            let (a, b) = (&rows[i * ne + j], &rows[m * ne + j]);
            out.checked_pairs += 1;
            for (name, x, y, max) in [
                ("s_min", a.s_min, b.s_min, &mut out.max_s_min_deviation),
                ("R", a.r, b.r, &mut out.max_r_deviation),
            ] {
                if let (Some(x), Some(y)) = (x, y) {
                    let dev = (x - y).abs();
                    *max = max.max(dev);
                    if dev > MIRROR_TOL * x.abs().max(1.0) {
                        out.warnings.push(format!(
                            "{name} differs by {dev:e} between delta = {} and {} at eta = {}",
                            a.delta, b.delta, a.eta
                        ));
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub csv: PathBuf,
    pub meta: PathBuf,
    pub rows: usize,
    pub failed_points: usize,
    pub mirror: MirrorCheck,
    pub seconds: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Evaluate every grid point and write `sweep.csv` and `meta.json` into `cfg.output`.
///
/// The output directory is created and `sweep.csv` opened before any solve,
/// so an unwritable destination fails fast.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;
    let csv_path = cfg.output.join("sweep.csv");
    let meta_path = cfg.output.join("meta.json");
    let mut csv = create(&csv_path)?;
    let meta_file = create(&meta_path)?;

    let start = Instant::now();
    let rows = sweep_rows(cfg)?;
    let seconds = start.elapsed().as_secs_f64();

    write_csv(&mut csv, &rows).map_err(|e| Error::io(&csv_path, e))?;
    let mirror = mirror_symmetry(&rows, cfg);
    let failed_points = rows.iter().filter(|r| r.residual.is_none()).count();
    let meta = serde_json::json!({
        "library": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "backend": if crate::is_parallel() { "rayon" } else { "sequential" },
        "dissipator_convention": DISSIPATOR_CONVENTION,
        "csv_header": CSV_HEADER,
        "rows": rows.len(),
        "failed_points": failed_points,
        "mirror_symmetry": mirror,
        "timings": {
            "total_seconds": seconds,
            "mean_point_seconds": seconds / rows.len() as f64,
        },
    });
    let mut meta_file = meta_file;
    serde_json::to_writer_pretty(&mut meta_file, &meta)?;
    meta_file
        .write_all(b"\n")
        .and_then(|_| meta_file.flush())
        .map_err(|e| Error::io(&meta_path, e))?;
    Ok(SweepSummary {
        csv: csv_path,
        meta: meta_path,
        rows: rows.len(),
        failed_points,
        mirror,
        seconds,
    })
}

/// Grid rows in row-major order, evaluated on `cfg.workers` threads.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepResultRow>> {
    cfg.validate()?;
    let points = cfg.points();
    with_workers(cfg.workers, || {
        map_indexed(points.len(), |k| {
            let (delta, eta) = points[k];
            SweepResultRow::from_point(delta, eta, &cfg.params(delta, eta), cfg)
        })
    })
}

/// [`sweep_rows`] on the calling thread only, whatever the build features.
pub fn sweep_rows_sequential(cfg: &SweepConfig) -> Result<Vec<SweepResultRow>> {
    cfg.validate()?;
    let points = cfg.points();
    Ok(map_sequential(points.len(), |k| {
        let (delta, eta) = points[k];
        SweepResultRow::from_point(delta, eta, &cfg.params(delta, eta), cfg)
    }))
}

pub fn write_csv(out: &mut impl Write, rows: &[SweepResultRow]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()
}

/// Write `wigner_<tag>.csv`: header comments, then a matrix whose first row
/// holds the `x` axis and whose first column holds the `y` axis.
pub fn export_wigner(p: &ModelParams, axes: &WignerAxes, dir: &Path, tag: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("wigner_{tag}.csv"));
    let mut out = create(&path)?;
    let rec = run_point(p, &PointRequest::all().with_wigner(axes.clone()))?;
    let grid = rec.wigner.as_ref().expect("requested");
    let squeezing = rec.squeezing.as_ref().expect("requested");
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "# convention: {WIGNER_CONVENTION}")?;
        writeln!(out, "# params: {}", serde_json::to_string(p).expect("plain struct"))?;
        writeln!(
            out,
            "# s_min: {} theta_s_rad: {}",
            fmt_float(squeezing.s_min),
            fmt_float(squeezing.theta_s)
        )?;
        writeln!(out, "# grid_too_small: {}", grid.grid_too_small)?;
        if grid.grid_too_small {
            writeln!(out, "# WARNING: |W| on the grid boundary exceeds 1e-3 of the peak; enlarge the grid")?;
        }
        let header: Vec<String> = grid.x.iter().map(|&x| fmt_float(x)).collect();
        writeln!(out, "y\\x,{}", header.join(","))?;
        let nx = grid.x.len();
        for (j, &y) in grid.y.iter().enumerate() {
            let cells: Vec<String> = grid.w[j * nx..(j + 1) * nx].iter().map(|&w| fmt_float(w)).collect();
            writeln!(out, "{},{}", fmt_float(y), cells.join(","))?;
        }
        out.flush()
    };
    body().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Write `klyshko_<tag>.csv` with columns `n,P_n,K_n` (`K_n` empty where undefined).
pub fn export_klyshko(p: &ModelParams, dir: &Path, tag: &str, floor: f64) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("klyshko_{tag}.csv"));
    let mut out = create(&path)?;
    let request = PointRequest {
        klyshko_floor: floor,
        ..PointRequest::all()
    };
    let rec = run_point(p, &request)?;
    let k = rec.klyshko.as_ref().expect("requested");
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "# params: {}", serde_json::to_string(p).expect("plain struct"))?;
        writeln!(out, "# floor: {}", fmt_float(floor))?;
        writeln!(out, "n,P_n,K_n")?;
        for (n, &prob) in rec.photon_distribution.probabilities().iter().enumerate() {
            let kn = k.get(n);
            writeln!(out, "{n},{},{}", fmt_float(prob), fmt_opt(kn))?;
        }
        out.flush()
    };
    body().map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
