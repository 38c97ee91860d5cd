use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tqcavity::dressed::{interference_check, manifold_spectrum, pathway_amplitudes};
use tqcavity::observables::{WignerAxes, DEFAULT_KLYSHKO_FLOOR};
use tqcavity::sweep::{
    auto_n_max, export_klyshko, export_wigner, run_point, run_sweep, AxisRange, Observable, PointRequest,
    SweepConfig,
};
use tqcavity::{CouplingPhase, ModelParams};

/// Steady states, squeezing and photon statistics of two driven qubits in a cavity.
///
/// Rates and frequencies are in units of the qubit decay rate γ.
#[derive(Parser, Debug)]
#[command(name = "tqcavity", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one parameter point and print its observables as JSON.
    Point {
        #[command(flatten)]
        model: ModelArgs,
        /// Also write the record (including the S_θ curve) to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Map observables over a (Δ, η) grid into sweep.csv and meta.json.
    Sweep(SweepArgs),
    /// Export the cavity Wigner function as wigner_<tag>.csv.
    Wigner {
        #[command(flatten)]
        model: ModelArgs,
        /// Half-width of the square grid in x and y.
        #[arg(long, default_value_t = 4.0)]
        extent: f64,
        /// Samples per axis.
        #[arg(long, default_value_t = 121)]
        points: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "point")]
        tag: String,
    },
    /// Export P_n and the Klyshko ratios K_n as klyshko_<tag>.csv.
    Klyshko {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "point")]
        tag: String,
        /// K_n is left undefined where P_n is below this.
        #[arg(long, default_value_t = DEFAULT_KLYSHKO_FLOOR)]
        floor: f64,
    },
    /// Print dressed-state manifold tables and transition pathways.
    Dressed {
        /// Largest excitation manifold to print.
        #[arg(long, default_value_t = 4)]
        manifolds: usize,
        #[arg(long, default_value_t = 10.0)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Photon index of the pathway ladder.
        #[arg(long, default_value_t = 0)]
        photon: usize,
    },
}

/// Model flags shared by the single-point commands. Flags override `--config`.
#[derive(Args, Debug)]
struct ModelArgs {
    /// JSON config (same schema as `sweep`); its g, kappa, n_max, phase and output apply.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detuning Δ = Δa = Δc.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    /// Drive strength η.
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Fock truncation; defaults to 20 for η ≤ 1.5 and 30 for η ≤ 3.
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    phase: Option<CouplingPhase>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<(ModelParams, SweepConfig)> {
        let mut cfg = load_config(self.config.as_ref())?;
        if let Some(g) = self.g {
            cfg.g = g;
        }
        if let Some(k) = self.kappa {
            cfg.kappa = k;
        }
        if let Some(n) = self.nmax {
            cfg.n_max = Some(n);
        }
        if let Some(p) = self.phase {
            cfg.phase = p;
        }
        let n_max = cfg.n_max.unwrap_or_else(|| auto_n_max(self.eta));
        let p = ModelParams::preset(cfg.phase, self.delta, self.eta, cfg.g, cfg.kappa, n_max);
        p.validate()?;
        Ok((p, cfg))
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON sweep config; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detuning axis as `min,max,count`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    delta_range: Option<AxisRange>,
    /// Drive axis as `min,max,count`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    eta_range: Option<AxisRange>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    phase: Option<CouplingPhase>,
    /// Comma-separated subset of R, Smin, thetaS, nbar, Kn.
    #[arg(long, value_delimiter = ',')]
    observables: Option<Vec<Observable>>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "TQCAVITY_WORKERS")]
    workers: Option<usize>,
}

fn parse_range(s: &str) -> Result<AxisRange, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected min,max,count, got {s:?}"));
    }
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let count = parts[2].parse::<usize>().map_err(|e| format!("{:?}: {e}", parts[2]))?;
    Ok(AxisRange(num(parts[0])?, num(parts[1])?, count))
}

fn load_config(path: Option<&PathBuf>) -> Result<SweepConfig> {
    match path {
        Some(p) => SweepConfig::from_json_file(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(SweepConfig::default()),
    }
}

#[derive(Serialize)]
struct PointSummary<'a> {
    params: &'a ModelParams,
    nbar_2q: f64,
    radiance_witness: Option<f64>,
    nbar_1q: Option<[f64; 2]>,
    witness_error: Option<&'a str>,
    s_min: Option<f64>,
    theta_s: Option<f64>,
    residual: f64,
    tail_population: f64,
    truncation_suspect: bool,
    photon_distribution: &'a [f64],
    klyshko: Vec<(usize, Option<f64>)>,
}

fn point(model: &ModelArgs, output: Option<&PathBuf>) -> Result<()> {
    let (p, _) = model.resolve()?;
    let rec = run_point(&p, &PointRequest::all())?;
    let summary = PointSummary {
        params: &rec.params,
        nbar_2q: rec.nbar_2q,
        radiance_witness: rec.witness.as_ref().map(|w| w.r),
        nbar_1q: rec.witness.as_ref().map(|w| w.nbar_1q),
        witness_error: rec.witness_error.as_deref(),
        s_min: rec.squeezing.as_ref().map(|s| s.s_min),
        theta_s: rec.squeezing.as_ref().map(|s| s.theta_s),
        residual: rec.residual,
        tail_population: rec.tail_population,
        truncation_suspect: rec.truncation_suspect,
        photon_distribution: rec.photon_distribution.probabilities(),
        klyshko: rec.klyshko.as_ref().map(|k| k.k.clone()).unwrap_or_default(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = output {
        let text = serde_json::to_string_pretty(&rec)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_ref())?;
    if let Some(r) = args.delta_range {
        cfg.delta_range = r;
    }
    if let Some(r) = args.eta_range {
        cfg.eta_range = r;
    }
    if let Some(g) = args.g {
        cfg.g = g;
    }
    if let Some(k) = args.kappa {
        cfg.kappa = k;
    }
    if let Some(n) = args.nmax {
        cfg.n_max = Some(n);
    }
    if let Some(p) = args.phase {
        cfg.phase = p;
    }
    if let Some(obs) = &args.observables {
        cfg.observables = obs.iter().copied().collect();
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let summary = run_sweep(&cfg)?;
    for w in &summary.mirror.warnings {
        eprintln!("warning: mirror symmetry: {w}");
    }
    eprintln!(
        "{} rows ({} failed) in {:.1} s -> {}",
        summary.rows,
        summary.failed_points,
        summary.seconds,
        summary.csv.display()
    );
    Ok(())
}

fn dressed(manifolds: usize, g: f64, eta: f64, photon: usize) -> Result<()> {
    if manifolds < 1 {
        bail!("--manifolds must be at least 1");
    }
    for n in 1..=manifolds {
        print!("{}", manifold_spectrum(n, g)?);
        println!();
    }
    let p = ModelParams::out_phase(0.0, eta, g, 0.5, photon + 2);
    println!("pathway |gg,{photon}> -> |gg,{}> (out-phase, g = {g}, eta = {eta}):", photon + 2);
    for e in pathway_amplitudes(photon, &p)? {
        println!("  {e}");
    }
    let out = interference_check(&p)?;
    let inp = interference_check(&ModelParams::in_phase(0.0, eta, g, 0.5, 1))?;
    println!("|<gg,1|H_int|+,0>|: out-phase {out:.3e}, in-phase {inp:.12}");
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Point { model, output } => point(model, output.as_ref()),
        Command::Sweep(args) => sweep(args),
        Command::Wigner {
            model,
            extent,
            points,
            output,
            tag,
        } => {
            let (p, cfg) = model.resolve()?;
            let dir = output.clone().unwrap_or(cfg.output);
            let path = export_wigner(&p, &WignerAxes::square(*extent, *points), &dir, tag)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Klyshko {
            model,
            output,
            tag,
            floor,
        } => {
            let (p, cfg) = model.resolve()?;
            let dir = output.clone().unwrap_or(cfg.output);
            let path = export_klyshko(&p, &dir, tag, *floor)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Dressed {
            manifolds,
            g,
            eta,
            photon,
        } => dressed(*manifolds, *g, *eta, *photon),
    }
}
