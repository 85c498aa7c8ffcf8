//! `ewmirror`: predictions, sweeps, simulated imaging runs and the regression
//! report, all driven by one JSON experiment config.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ewmirror::config::{Dimension, Experiment, ExperimentConfig};
use ewmirror::diagnostics::{encode_pgm, frame_file_name, PipelineResult, PipelineSetup};
use ewmirror::dynamics::rng::ensemble_id;
use ewmirror::dynamics::{fall_time, simulate_cloud, CloudModel};
use ewmirror::mirror::{
    bounce_fraction, cloud_sigma_at, decay_length_threshold, detuning_threshold,
    effective_mirror_radius,
};
use ewmirror::verify::{self, VerifyReport};
use ewmirror::Error;

use output::{num, to_csv, write_atomic};

#[derive(Parser)]
#[command(name = "ewmirror", version, about = "Evanescent-wave atom mirror simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; results go to stdout when omitted (pipeline
    /// falls back to the config's output_dir, then `ewmirror-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Upper bound on worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Photon budget for the configured point.
    Predict(Common),
    /// Photon budget over a detuning or angle grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Start of the grid (Gamma for detuning, mrad above critical for angle).
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Drop, image, fit and correct one simulated cloud.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Also write per-atom CSVs for the first shot of every frame.
        #[arg(long)]
        snapshots: bool,
    },
    /// Compare against the bundled reference values.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated groups or criterion numbers, e.g. `thresholds,1`.
        #[arg(long, default_value = "")]
        rows: String,
    },
    /// Reflection thresholds, mirror radius and bounce fraction.
    Thresholds(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    /// Detuning in units of the natural linewidth.
    Detuning,
    /// Angle of incidence in mrad above the critical angle.
    Angle,
}

/// Usage and config errors exit 1, infeasible physics 2, numerics 3.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NoBounce { .. } | Error::ThresholdNotFound { .. }) => 2,
        Some(
            Error::Config(_)
            | Error::InvalidMedium(_)
            | Error::SubcriticalAngle { .. }
            | Error::ResonantDetuning
            | Error::RedDetuning(_)
            | Error::InvalidParameter { .. }
            | Error::LineCrossing { .. }
            | Error::AlreadyCorrected,
        ) => 1,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Predict(c) => {
            let (cfg, exp) = setup(&c)?;
            predict(&c, &cfg, &exp)
        }
        Command::Sweep {
            common,
            axis,
            from,
            to,
            points,
        } => {
            let (_, exp) = setup(&common)?;
            sweep(&common, &exp, axis, from, to, points)
        }
        Command::Pipeline { common, snapshots } => {
            let (cfg, exp) = setup(&common)?;
            pipeline(&common, &cfg, &exp, snapshots)
        }
        Command::Verify { common, rows } => {
            let (cfg, _) = setup(&common)?;
            verify_cmd(&common, &cfg, &rows)
        }
        Command::Thresholds(c) => {
            let (_, exp) = setup(&c)?;
            thresholds(&c, &exp)
        }
    }
}

fn setup(c: &Common) -> Result<(ExperimentConfig, Experiment)> {
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let exp = cfg.resolve()?;
    Ok((cfg, exp))
}

/// Writes to `<out>/<name>` when an output directory is given, else stdout.
fn emit(c: &Common, name: &str, bytes: &[u8]) -> Result<()> {
    match &c.out {
        Some(dir) => write_atomic(&dir.join(name), bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

const BUDGET_HEADER: [&str; 8] = [
    "delta_over_Gamma",
    "xi_um",
    "n_twolevel",
    "n_pathintegral",
    "n_obe",
    "hyperfine_factor",
    "n_corrected",
    "status",
];

fn budget_row(exp: &Experiment) -> std::result::Result<Vec<String>, (Vec<String>, Error)> {
    let mut row = vec![
        num(Some(exp.detuning / exp.species.linewidth)),
        num(Some(exp.field.decay_length * 1e6)),
    ];
    match exp.budget() {
        Ok(b) => {
            row.extend(
                [b.n_twolevel, b.n_pathintegral, b.n_obe, b.hyperfine_factor, b.n_corrected]
                    .map(|v| num(Some(v))),
            );
            row.push("ok".into());
            Ok(row)
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(status(&e).into());
            Err((row, e))
        }
    }
}

fn status(e: &Error) -> &'static str {
    match e {
        Error::NoBounce { .. } | Error::ThresholdNotFound { .. } => "no_bounce",
        Error::Quadrature { .. } | Error::RootBracketing { .. } | Error::BlochDiverged { .. } => {
            "numerical_failure"
        }
        _ => "invalid",
    }
}

/// Where the configured point sits relative to the reflection thresholds.
fn threshold_hint(exp: &Experiment) -> String {
    let opts = &exp.potential_options;
    let power = exp.geometry.power;
    let mut parts = Vec::new();
    match detuning_threshold(&exp.geometry, &exp.species, power, exp.fall_height, opts) {
        Ok(d) => parts.push(format!(
            "at this angle the mirror reflects up to {:.3} GHz ({:.1} Gamma)",
            d / (2.0 * std::f64::consts::PI * 1e9),
            d / exp.species.linewidth
        )),
        Err(_) => parts.push("at this angle the mirror does not reflect at any detuning".into()),
    }
    match decay_length_threshold(&exp.geometry, &exp.species, power, exp.detuning, exp.fall_height, opts) {
        Ok(Some(t)) => parts.push(format!(
            "at this detuning the decay length must exceed {:.1} nm",
            t.decay_length * 1e9
        )),
        Ok(None) => {}
        Err(_) => parts.push("at this detuning no angle reflects".into()),
    }
    format!("hint: {}", parts.join("; "))
}

fn predict(c: &Common, _cfg: &ExperimentConfig, exp: &Experiment) -> Result<u8> {
    match budget_row(exp) {
        Ok(row) => {
            emit(c, "predict.csv", &to_csv(&BUDGET_HEADER, &[row])?)?;
            Ok(0)
        }
        Err((_, e)) => {
            if matches!(e, Error::NoBounce { .. }) {
                eprintln!("{}", threshold_hint(exp));
            }
            Err(e.into())
        }
    }
}

fn grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        1 => vec![from],
        n => (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                from * (1.0 - f) + to * f
            })
            .collect(),
    }
}

fn sweep(c: &Common, exp: &Experiment, axis: Axis, from: f64, to: f64, points: usize) -> Result<u8> {
    if points == 0 {
        bail!(Error::Config("--points must be at least 1".into()));
    }
    if !(from.is_finite() && to.is_finite()) {
        bail!(Error::Config("--from and --to must be finite".into()));
    }
    let values = grid(from, to, points);
    let critical = exp.geometry.critical_angle();
    // Validate the whole grid before evaluating anything.
    let experiments: Vec<Experiment> = values
        .iter()
        .map(|&v| match axis {
            Axis::Detuning if v <= 0.0 => Err(Error::Config(format!("detuning must be positive, got {v} Gamma"))),
            Axis::Detuning => exp.with_detuning(v * exp.species.linewidth),
            Axis::Angle if v <= 0.0 => Err(Error::SubcriticalAngle {
                angle: critical + v * 1e-3,
                critical,
            }),
            Axis::Angle => exp.with_angle(critical + v * 1e-3),
        })
        .collect::<ewmirror::Result<_>>()?;
    let rows: Vec<(Vec<String>, bool)> = experiments
        .par_iter()
        .map(|e| match budget_row(e) {
            Ok(r) => (r, false),
            Err((r, _)) => (r, true),
        })
        .collect();
    let flagged = rows.iter().filter(|r| r.1).count();
    if flagged > 0 {
        eprintln!("{flagged} of {points} grid points flagged (see the status column)");
    }
    let rows: Vec<Vec<String>> = rows.into_iter().map(|r| r.0).collect();
    emit(c, "sweep.csv", &to_csv(&BUDGET_HEADER, &rows)?)?;
    Ok(0)
}

fn thresholds(c: &Common, exp: &Experiment) -> Result<u8> {
    let cfg = &exp.config;
    let opts = &exp.potential_options;
    let power = exp.geometry.power;
    let d_th = match detuning_threshold(&exp.geometry, &exp.species, power, exp.fall_height, opts) {
        Ok(d) => Some(d / (2.0 * std::f64::consts::PI * 1e9)),
        Err(Error::ThresholdNotFound { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let xi_th = match decay_length_threshold(
        &exp.geometry,
        &exp.species,
        power,
        exp.detuning,
        exp.fall_height,
        opts,
    ) {
        Ok(t) => t.map(|t| t.decay_length * 1e9),
        Err(Error::ThresholdNotFound { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let energy = exp.species.mass * ewmirror::constants::GRAVITY * exp.fall_height;
    let r_eff = effective_mirror_radius(&exp.potential, exp.geometry.waist, energy)?;
    let sigma = cloud_sigma_at(
        cfg.mot_sigma.si(Dimension::Length)?,
        cfg.temperature.si(Dimension::Temperature)?,
        exp.species.mass,
        fall_time(exp.fall_height),
    );
    let (sys, _) = cfg.systematics.resolve(cfg.corrections.roughness_offset)?;
    let fraction = bounce_fraction(sigma, sys.mot_horizontal_offset, r_eff)?;
    let row = vec![num(d_th), num(xi_th), num(Some(r_eff)), num(Some(fraction))];
    let header = ["delta_th_GHz", "xi_th_nm", "r_eff_m", "fraction"];
    emit(c, "thresholds.csv", &to_csv(&header, &[row])?)?;
    Ok(0)
}

fn pipeline(c: &Common, cfg: &ExperimentConfig, exp: &Experiment, snapshots: bool) -> Result<u8> {
    let out = c
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ewmirror-out"));
    let budget = match exp.budget() {
        Ok(b) => b,
        Err(e @ Error::NoBounce { .. }) => {
            eprintln!("{}", threshold_hint(exp));
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let setup = exp.pipeline_setup(&budget)?;
    let result = ewmirror::diagnostics::run_pipeline(&setup, cfg.seed)?;
    write_pipeline(&out, &result, budget.n_corrected)?;
    if snapshots {
        write_snapshots(&out, &setup, cfg.seed)?;
    }
    let (measured, err) = result.recoils().map_or((None, None), |(m, e)| (Some(m), Some(e)));
    println!(
        "recoils measured {} ± {} (truth {}); bounce fraction {}; {} frames in {}",
        num(measured),
        num(err),
        budget.n_corrected,
        result.bounce_fraction,
        result.frames.frames.len(),
        out.display()
    );
    if result.no_signal {
        eprintln!("no signal: no bounced atoms reached the imaged frames");
    }
    Ok(0)
}

fn write_pipeline(out: &Path, result: &PipelineResult, truth: f64) -> Result<()> {
    for frame in &result.frames.frames {
        write_atomic(&out.join(frame.file_name()), &encode_pgm(frame))?;
    }
    let frame_rows: Vec<Vec<String>> = result
        .reports
        .iter()
        .map(|r| {
            let c = r.centroid.as_ref();
            vec![
                num(Some(r.t * 1e3)),
                num(c.map(|c| c.x * 1e3)),
                num(c.map(|c| c.z * 1e3)),
                num(c.map(|c| c.err * 1e3)),
                serde_json::to_value(r.status)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                r.atoms_in_view.to_string(),
                r.bounced_atoms.to_string(),
                r.saturated_pixels.to_string(),
            ]
        })
        .collect();
    let header = [
        "t_ms",
        "x_mm",
        "z_mm",
        "x_err_mm",
        "status",
        "atoms_in_view",
        "bounced_atoms",
        "saturated_pixels",
    ];
    write_atomic(&out.join("frames.csv"), &to_csv(&header, &frame_rows)?)?;

    let fit = result.fit.as_ref();
    let corrected = result.corrected.as_ref();
    let summary = vec![
        num(fit.map(|f| f.pre_bounce.v_x)),
        num(fit.map(|f| f.post_bounce.v_x)),
        num(fit.map(|f| f.delta_vx)),
        num(fit.map(|f| f.recoils)),
        num(fit.map(|f| f.recoils_err)),
        num(corrected.map(|f| f.recoils)),
        num(corrected.map(|f| f.recoils_err)),
        num(Some(truth)),
        num(Some(result.bounce_fraction)),
        num(Some(result.bounce_time * 1e3)),
        result.no_signal.to_string(),
        result.fit_error.clone().unwrap_or_default(),
    ];
    let header = [
        "vx_pre",
        "vx_post",
        "delta_vx",
        "recoils",
        "recoils_err",
        "recoils_corrected",
        "recoils_corrected_err",
        "recoils_truth",
        "bounce_fraction",
        "bounce_time_ms",
        "no_signal",
        "fit_error",
    ];
    write_atomic(&out.join("summary.csv"), &to_csv(&header, &[summary])?)
}

/// Re-simulates the first shot of each frame (same random streams as the
/// imaged one) and dumps its atoms.
fn write_snapshots(out: &Path, setup: &PipelineSetup, seed: u64) -> Result<()> {
    let mut cloud = setup.cloud.clone();
    cloud.atom_count = cloud.atom_count.div_ceil(setup.shots_per_frame as usize);
    let model = CloudModel::new(cloud)?;
    let mut times = setup.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    let header = ["t_ms", "atom_id", "x_m", "z_m", "vx_mps", "vz_mps", "scattered", "bounced_flag"];
    for (k, &t) in times.iter().enumerate() {
        let run = simulate_cloud(&model, seed, ensemble_id(k as u32, 0), &[t])?;
        let rows: Vec<Vec<String>> = run.snapshots[0]
            .atoms
            .iter()
            .map(|a| {
                let s = &a.state;
                vec![
                    num(Some(t * 1e3)),
                    a.atom_id.to_string(),
                    num(Some(s.x)),
                    num(Some(s.z)),
                    num(Some(s.v_x)),
                    num(Some(s.v_z)),
                    num(Some(s.scattered)),
                    u8::from(a.bounced()).to_string(),
                ]
            })
            .collect();
        let name = frame_file_name(t).replace("frame_", "atoms_").replace(".pgm", ".csv");
        write_atomic(&out.join("snapshots").join(name), &to_csv(&header, &rows)?)?;
    }
    Ok(())
}

fn verify_cmd(c: &Common, cfg: &ExperimentConfig, rows: &str) -> Result<u8> {
    let groups = verify::parse_groups(rows)?;
    let report = verify::run(cfg, &groups, cfg.seed)?;
    print_report(&report);
    if let Some(dir) = &c.out {
        let body: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.id.clone(),
                    verify::Group::name(r.group).into(),
                    if r.pass { "PASS" } else { "FAIL" }.into(),
                    num(Some(r.computed)),
                    num(Some(r.reference)),
                    r.tolerance.to_string(),
                    r.description.clone(),
                    r.citation.into(),
                ]
            })
            .collect();
        let header = [
            "id",
            "group",
            "result",
            "computed",
            "reference",
            "tolerance",
            "description",
            "citation",
        ];
        write_atomic(&dir.join("verify.csv"), &to_csv(&header, &body)?)?;
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn print_report(report: &VerifyReport) {
    for r in &report.rows {
        println!(
            "{} {:<8} {:<55} computed {:<12.6} reference {:<8} {} [{}] ({:.1} s)",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.description,
            r.computed,
            r.reference,
            r.tolerance,
            r.citation,
            r.seconds
        );
    }
    if !report.sensitivity.is_empty() {
        println!("\nthreshold sensitivity (GHz at 2.8 um, GHz at 0.67 um, nm at 44 Gamma):");
        for s in &report.sensitivity {
            println!(
                "  {:<22} {:>8.3} {:>8.3} {:>8}",
                s.variant,
                s.detuning_threshold_2p8_ghz,
                s.detuning_threshold_0p67_ghz,
                s.decay_length_threshold_nm.map_or("-".into(), |x| format!("{x:.1}"))
            );
        }
    }
    let failed = report.failed().count();
    println!("\n{} rows, {} failed", report.rows.len(), failed);
}
