//! Subcommand implementations.

use crate::config::{self, Settings};
use crate::error::CliError;
use crate::output::{manifest_path, write_atomic, RunManifest};
use crate::Common;
use clap::Args;
use reactlab::dispersion::Linearization;
use reactlab::fmt::sig9;
use reactlab::pde::{self, Boundary, FieldGrid, SimJob, SimResult};
use reactlab::scanner::{self, Axis, ScanConfig, ScanRow};
use reactlab::transient::{
    amplification_envelope, default_t_max, kreiss_constant, EnvelopeSummary,
};
use reactlab::{dispersion, par, Execution};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct Context {
    pub common: Common,
    pub argv: Vec<String>,
}

impl Context {
    /// Defaults, then the config file, then `--set`, then dedicated flags.
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &self.common.config {
            s.apply_table(&config::load(path)?)?;
        }
        for a in &self.common.set {
            s.apply_assignment(a)?;
        }
        if let Some(q) = self.common.q {
            s.model.q = q;
        }
        if let Some(beta) = self.common.beta {
            s.model.beta = beta;
        }
        s.model.validate()?;
        Ok(s)
    }

    fn manifest<P: Serialize>(
        &self,
        subcommand: &str,
        parameters: P,
        outputs: Vec<PathBuf>,
        seed: Option<u64>,
        start: Instant,
    ) -> RunManifest<P> {
        RunManifest {
            subcommand: subcommand.into(),
            argv: self.argv.clone(),
            parameters,
            config_file: self.common.config.clone(),
            outputs,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            workers: par::workers(),
            duration_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Sends `fill` to `out` atomically, or to stdout.
fn emit(
    out: Option<&Path>,
    fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, fill),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_else(|| "NA".into())
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[arg(long, default_value_t = 0.0)]
    pub k2_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub k2_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 201)]
    pub k2_steps: usize,
    /// `linear` or `log`.
    #[arg(long, default_value = "linear")]
    pub spacing: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const DISPERSION_HEADER: &str =
    "k2,h,h_tilde,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,delta,unstable,reactive";

pub fn dispersion(ctx: &Context, args: &DispersionArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let settings = ctx.settings()?;
    let spacing = config::parse_spacing(&args.spacing)?;
    let axis = Axis::new(args.k2_min, args.k2_max, args.k2_steps);
    if args.k2_steps < 2
        || !(args.k2_min >= 0.0 && args.k2_min < args.k2_max && args.k2_max.is_finite())
    {
        return Err(CliError::config(
            "k2",
            "need 0 <= k2-min < k2-max and k2-steps >= 2",
        ));
    }
    if spacing == scanner::Spacing::Log && args.k2_min <= 0.0 {
        return Err(CliError::config("k2-min", "log spacing needs k2-min > 0"));
    }
    let lin = Linearization::of(&settings.model)?;
    let points = axis
        .values(spacing)
        .into_iter()
        .map(|k2| lin.point(k2))
        .collect::<Result<Vec<_>, _>>()?;
    emit(args.out.as_deref(), |w| {
        writeln!(w, "{DISPERSION_HEADER}")?;
        for p in &points {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                sig9(p.k2),
                sig9(p.h),
                sig9(p.h_tilde),
                sig9(p.lambda_plus.re),
                sig9(p.lambda_plus.im),
                sig9(p.lambda_minus.re),
                sig9(p.lambda_minus.im),
                p.delta.map(sig9).unwrap_or_default(),
                p.unstable as u8,
                p.reactive as u8,
            )?;
        }
        Ok(())
    })?;
    if let Some(out) = &args.out {
        #[derive(Serialize)]
        struct P<'a> {
            model: &'a reactlab::ModelParams,
            k2: Axis,
            spacing: scanner::Spacing,
        }
        let params = P {
            model: &settings.model,
            k2: axis,
            spacing,
        };
        ctx.manifest("dispersion", params, vec![out.clone()], None, start)
            .write(&manifest_path(out))?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct EnvelopeArgs {
    /// Wavenumber squared; defaults to the selected most transient one.
    #[arg(long)]
    pub k2: Option<f64>,
    /// End of the time window; defaults to ten e-folding times.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of time samples.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn summary_line(k2: f64, s: &EnvelopeSummary) -> String {
    format!(
        "k2={} max_rho={} t_at_max={} return_time={} chi_star={} t_star={} kreiss={}",
        sig9(k2),
        sig9(s.max_rho),
        sig9(s.t_at_max),
        opt(s.return_time),
        opt(s.chi_star),
        opt(s.t_star),
        sig9(s.kreiss),
    )
}

pub fn envelope(ctx: &Context, args: &EnvelopeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let settings = ctx.settings()?;
    let k2 = match args.k2 {
        Some(k2) if k2 >= 0.0 && k2.is_finite() => k2,
        Some(k2) => {
            return Err(CliError::config(
                "k2",
                format!("must be finite and >= 0, got {k2}"),
            ))
        }
        None => dispersion::select_k2(&settings.model)?
            .ok_or_else(|| CliError::config("k2", "no reactive wavenumber; pass --k2"))?,
    };
    let m = Linearization::of(&settings.model)?.jk(k2)?;
    let t_max = args.t_max.unwrap_or_else(|| default_t_max(&m));
    let (series, mut summary) = amplification_envelope(&m, t_max, args.samples)?;
    summary.kreiss = kreiss_constant(&m)?;
    emit(args.out.as_deref(), |w| {
        writeln!(w, "t,rho,chi")?;
        for i in 0..series.times.len() {
            let chi = series.chi_values[i];
            let chi = if chi.is_nan() {
                String::new()
            } else {
                sig9(chi)
            };
            writeln!(
                w,
                "{},{},{chi}",
                sig9(series.times[i]),
                sig9(series.values[i])
            )?;
        }
        Ok(())
    })?;
    let line = summary_line(k2, &summary);
    match &args.out {
        Some(out) => {
            println!("{line}");
            #[derive(Serialize)]
            struct P<'a> {
                model: &'a reactlab::ModelParams,
                k2: f64,
                t_max: f64,
                samples: usize,
                summary: EnvelopeSummary,
            }
            let params = P {
                model: &settings.model,
                k2,
                t_max,
                samples: args.samples,
                summary,
            };
            ctx.manifest("envelope", params, vec![out.clone()], None, start)
                .write(&manifest_path(out))?;
        }
        None => eprintln!("{line}"),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// `min:max:steps` for q.
    #[arg(long)]
    pub q_range: Option<String>,
    /// `min:max:steps` for β.
    #[arg(long)]
    pub beta_range: Option<String>,
    /// `linear` or `log`.
    #[arg(long)]
    pub spacing: Option<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the number of points per region.
    #[arg(long)]
    pub summary: bool,
}

fn region_summary(rows: &[ScanRow]) -> String {
    scanner::region_counts(rows)
        .iter()
        .map(|(r, n)| format!("{r}={n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn scan(ctx: &Context, args: &ScanArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut s = ctx.settings()?;
    if let Some(r) = &args.q_range {
        s.q_axis = config::parse_range("q", r)?;
    }
    if let Some(r) = &args.beta_range {
        s.beta_axis = config::parse_range("beta", r)?;
    }
    if let Some(sp) = &args.spacing {
        s.spacing = config::parse_spacing(sp)?;
    }
    let mut cfg = ScanConfig::new(s.q_axis, s.beta_axis, s.model);
    cfg.spacing = s.spacing;
    cfg.thresholds = s.thresholds;
    let rows = scanner::scan_with(&cfg, Execution::Parallel)?;
    emit(args.out.as_deref(), |w| scanner::write_csv(&rows, w))?;
    if args.summary {
        let line = region_summary(&rows);
        if args.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    if let Some(out) = &args.out {
        ctx.manifest("scan", cfg, vec![out.clone()], None, start)
            .write(&manifest_path(out))?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    /// Domain side length.
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
    /// Standard deviation of the initial noise.
    #[arg(long)]
    pub eta: Option<f64>,
    /// `periodic` or `neumann`.
    #[arg(long)]
    pub bc: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Steps between samples of E.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Independent noise realisations, run in parallel.
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, default_value = "reactlab")]
    pub out_prefix: String,
}

fn write_e_series(path: &Path, r: &SimResult) -> Result<(), CliError> {
    write_atomic(path, |w| {
        writeln!(w, "t,E")?;
        for &(t, e) in &r.e_series {
            writeln!(w, "{},{}", sig9(t), sig9(e))?;
        }
        Ok(())
    })
}

fn write_grid(path: &Path, g: &FieldGrid) -> Result<(), CliError> {
    write_atomic(path, |w| pde::write_snapshot(g, w))
}

#[derive(Serialize)]
struct RunReport {
    replicate: usize,
    verdict: String,
    final_e: f64,
    threshold: f64,
    relative_slope: f64,
    min_u: f64,
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let s = ctx.settings()?;
    let mut cfg = s.sim;
    let set = |v: Option<usize>, slot: &mut usize| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(args.dim, &mut cfg.dim);
    set(args.nx, &mut cfg.nx);
    set(args.snapshot_every, &mut cfg.snapshot_every);
    cfg.length = args.length.unwrap_or(cfg.length);
    cfg.dt = args.dt.unwrap_or(cfg.dt);
    cfg.t_final = args.t_final.unwrap_or(cfg.t_final);
    cfg.eta = args.eta.unwrap_or(cfg.eta);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if let Some(bc) = &args.bc {
        cfg.bc = bc.parse::<Boundary>()?;
    }
    if args.replicates == 0 {
        return Err(CliError::config("replicates", "must be >= 1"));
    }
    cfg.validate_for(&s.model)?;

    let jobs = vec![
        SimJob {
            params: s.model,
            config: cfg,
        };
        args.replicates
    ];
    let results = if jobs.len() == 1 {
        vec![pde::run(&s.model, &cfg)]
    } else {
        pde::run_batch(&jobs, Execution::Parallel)
    };

    let mut outputs = Vec::new();
    let mut reports = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        let r = result?;
        let stem = if args.replicates == 1 {
            args.out_prefix.clone()
        } else {
            format!("{}_{i}", args.out_prefix)
        };
        let e_path = PathBuf::from(format!("{stem}_E.csv"));
        let grid_path = PathBuf::from(format!("{stem}_final.grid"));
        write_e_series(&e_path, &r)?;
        write_grid(&grid_path, &r.final_fields)?;
        println!(
            "replicate={i} verdict={} final_E={} threshold={} relative_slope={}",
            r.verdict,
            sig9(r.final_e()),
            sig9(r.threshold),
            sig9(r.plateau.relative_slope)
        );
        if let Some(t) = r.negativity.first_violation {
            eprintln!(
                "reactlab: warning: u went negative at t = {} (min {})",
                sig9(t),
                sig9(r.negativity.min_u)
            );
        }
        outputs.push(e_path);
        outputs.push(grid_path);
        reports.push(RunReport {
            replicate: i,
            verdict: r.verdict.to_string(),
            final_e: r.final_e(),
            threshold: r.threshold,
            relative_slope: r.plateau.relative_slope,
            min_u: r.negativity.min_u,
        });
    }

    #[derive(Serialize)]
    struct P {
        model: reactlab::ModelParams,
        sim: pde::SimConfig,
        replicates: usize,
        results: Vec<RunReport>,
    }
    let params = P {
        model: s.model,
        sim: cfg,
        replicates: args.replicates,
        results: reports,
    };
    let manifest = PathBuf::from(format!("{}_manifest.json", args.out_prefix));
    ctx.manifest("simulate", params, outputs, Some(cfg.seed), start)
        .write(&manifest)
}

pub fn classify(ctx: &Context) -> Result<(), CliError> {
    let s = ctx.settings()?;
    let row = scanner::classify_point_with(s.model.q, s.model.beta, &s.model, &s.thresholds)?;
    println!(
        "q={} beta={} region={} beta_c={} case={} k2={} chi_star={} log_inv_h={} flag_chi={} flag_h={}",
        sig9(row.q),
        sig9(row.beta),
        row.region,
        sig9(row.beta_c),
        row.case,
        opt(row.k2),
        opt(row.chi_star),
        opt(row.log_inv_h),
        row.flag_chi as u8,
        row.flag_h as u8,
    );
    Ok(())
}
