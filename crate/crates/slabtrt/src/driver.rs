//! Command implementations behind the CLI: scheme reports, stability
//! regions, embedding optimization, transport runs, and fixed-step
//! convergence studies.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use imexrk::{
    integrate, optimize_embedding, quality, stability_region, write_history_csv, Integration,
    Mode, Region, RegionSpec, Scheme, StepControllerConfig, Tolerance,
};

use crate::config::{ErrorMask, RunConfig, RunMode};
use crate::output::{
    config_hash, header_comment, relative_norms, write_rates, write_region, write_snapshot,
    RateRow,
};
use crate::system::TrtSystem;

/// Driver failures map onto the process exit codes: configuration
/// problems exit 2, runtime (solver or I/O) failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// The scheme property table as aligned text; optionally also written as
/// CSV with the implicit/explicit sub-measures.
pub fn cmd_schemes(csv: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    writeln!(
        out,
        "{:<20} {:>2} {:>8} {:>8} {:>8} {:>8}",
        "scheme", "s", "A3", "B3", "C3", "E3"
    )?;
    let mut rows = Vec::new();
    for s in Scheme::ALL {
        let pair = s.pair();
        let q = quality(&pair).map_err(|e| CliError::Run(e.to_string()))?;
        writeln!(
            out,
            "{:<20} {:>2} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            s.name(),
            pair.stages(),
            q.a3,
            q.b3,
            q.c3,
            q.e3
        )?;
        rows.push((s, pair.stages(), q));
    }
    if let Some(path) = csv {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "name,s,A3,B3,C3,E3,B3_I,C3_I,E3_I,B3_E,C3_E,E3_E")?;
        for (s, stages, q) in rows {
            writeln!(
                w,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                s.name(),
                stages,
                q.a3,
                q.b3,
                q.c3,
                q.e3,
                q.b3_implicit,
                q.c3_implicit,
                q.e3_implicit,
                q.b3_explicit,
                q.c3_explicit,
                q.e3_explicit
            )?;
        }
    }
    Ok(())
}

pub struct StabilityArgs {
    pub scheme: String,
    pub alpha_deg: f64,
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n: usize,
    pub embedded: bool,
    pub dense: bool,
    pub out: PathBuf,
}

pub fn cmd_stability(args: &StabilityArgs) -> CliResult<Region> {
    let pair = imexrk::builtin_scheme(&args.scheme).map_err(|e| CliError::Config(e.to_string()))?;
    let spec = RegionSpec {
        alpha: args.alpha_deg.to_radians(),
        re_min: args.re_min,
        re_max: args.re_max,
        im_min: args.im_min,
        im_max: args.im_max,
        n_re: args.n,
        n_im: args.n,
        dense: args.dense,
    };
    let region = stability_region(&pair, &spec, args.embedded)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let tag = format!(
        "scheme={} alpha_deg={} embedded={} dense={}",
        args.scheme, args.alpha_deg, args.embedded, args.dense
    );
    write_region(&args.out, &header_comment(config_hash(&tag)), &region)?;
    Ok(region)
}

pub fn cmd_embed(
    scheme: &str,
    seeds: usize,
    rng_seed: u64,
    out: &mut dyn Write,
) -> CliResult<()> {
    let pair = imexrk::builtin_scheme(scheme).map_err(|e| CliError::Config(e.to_string()))?;
    let published = imexrk::embedding_objective(&pair, pair.b_hat());
    let opt = optimize_embedding(&pair, seeds, rng_seed).map_err(|e| CliError::Run(e.to_string()))?;
    writeln!(out, "scheme            {scheme}")?;
    writeln!(out, "published b_hat   {:?}  (objective {:.9})", pair.b_hat(), published)?;
    writeln!(out, "optimized b_hat   {:?}  (objective {:.9})", opt.b_hat, opt.objective)?;
    writeln!(out, "A-stability margin of optimized embedding: {:.12}", opt.margin)?;
    Ok(())
}

/// Everything a finished run reports.
pub struct RunArtifacts {
    pub integration: Integration,
    pub final_t: Vec<f64>,
    pub final_e: Vec<f64>,
    pub wall_seconds: f64,
    pub accepted: usize,
    pub rejected: usize,
}

fn controller_config(cfg: &RunConfig, system: &TrtSystem) -> StepControllerConfig {
    let mask = match cfg.mask {
        ErrorMask::Temperature => vec![system.temperature_range()],
        ErrorMask::RadEnergy => vec![system.rad_energy_range()],
        ErrorMask::Both => vec![system.rad_energy_range(), system.temperature_range()],
    };
    StepControllerConfig {
        atol: Tolerance::Scalar(cfg.atol),
        rtol: Tolerance::Scalar(cfg.rtol),
        safety: 0.9,
        growth_max: 5.0,
        shrink_min: 0.1,
        dt_min: cfg.dt_min,
        dt_max: if cfg.dt_max.is_finite() { cfg.dt_max } else { cfg.t_final },
        error_mask: mask,
        max_rejects_per_step: cfg.max_rejects,
    }
}

/// Integrates `cfg.t_final` worth of the configured problem, landing
/// exactly on each requested output time by step truncation, and writes
/// the dt history, snapshots, and a summary under `cfg.outdir`.
pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<RunArtifacts> {
    let spec = cfg.problem_spec().map_err(CliError::Config)?;
    let (system, y0) = spec
        .system(cfg.formulation, cfg.solver_options())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let pair = imexrk::builtin_scheme(&cfg.scheme).map_err(|e| CliError::Config(e.to_string()))?;
    let ctrl = controller_config(cfg, &system);
    let hash = config_hash(&cfg.canonical());
    let header = header_comment(hash);
    std::fs::create_dir_all(&cfg.outdir)?;
    let outdir = Path::new(&cfg.outdir);

    // Segment boundaries: sorted output times inside (0, t_final], then
    // t_final itself.
    let mut marks: Vec<f64> = cfg
        .output_times
        .iter()
        .copied()
        .filter(|t| *t > 0.0 && *t < cfg.t_final)
        .collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    marks.push(cfg.t_final);

    let started = Instant::now();
    let mut y = y0;
    let mut t = 0.0;
    let mut dt_next = cfg.dt0;
    let mut merged: Option<Integration> = None;
    let layout = *system.layout();
    for &mark in &marks {
        let mode = match cfg.mode {
            RunMode::Adaptive => Mode::Adaptive { dt0: dt_next },
            RunMode::Fixed => Mode::Fixed { dt: cfg.dt },
        };
        let run = integrate(&system, &pair, &y, t, mark, &ctrl, mode).map_err(|e| {
            // Flush what we have before reporting the failure.
            if let Some(m) = &merged {
                let _ = write_history(outdir, &header, m);
            }
            CliError::Run(e.to_string())
        })?;
        y = run.y_final.clone();
        t = mark;
        dt_next = run.dt_next;
        let (_, e, f, temps) = layout.split(&y);
        let snap = outdir.join(format!("snapshot_t{mark:.6e}.csv"));
        write_snapshot(&snap, &header, &system.problem().mesh, temps, e, f)?;
        merged = Some(match merged {
            None => run,
            Some(mut m) => {
                m.history.extend(run.history);
                m.stats.accumulate(&run.stats);
                m.y_final = run.y_final;
                m.dt_next = run.dt_next;
                m
            }
        });
    }
    let integration = merged.expect("at least one segment");
    write_history(outdir, &header, &integration)?;

    let wall = started.elapsed().as_secs_f64();
    let accepted = integration.accepted_steps();
    let rejected = integration.rejected_steps();
    let summary = format!(
        "problem={} scheme={} formulation={} mask={}\nsteps_accepted={accepted}\nsteps_rejected={rejected}\nsweeps={}\nlo_newton_iters={}\nclipped_energy={:.3e}\nwall_seconds={wall:.3}\n",
        cfg.problem,
        cfg.scheme,
        cfg.formulation.name(),
        cfg.mask.name(),
        integration.stats.ho_solves,
        integration.stats.lo_iters,
        integration.stats.clipped_mass,
    );
    std::fs::write(outdir.join("run_summary.txt"), &summary)?;
    write!(out, "{summary}")?;

    let (_, e, _, temps) = layout.split(&y);
    Ok(RunArtifacts {
        final_t: temps.to_vec(),
        final_e: e.to_vec(),
        integration,
        wall_seconds: wall,
        accepted,
        rejected,
    })
}

fn write_history(outdir: &Path, header: &str, run: &Integration) -> std::io::Result<()> {
    let f = std::fs::File::create(outdir.join("dt_history.csv"))?;
    write_history_csv(std::io::BufWriter::new(f), &run.history, Some(header))
}

/// Final (T, E) fields of one fixed-dt run.
pub fn fixed_run_fields(
    cfg: &RunConfig,
    scheme: &str,
    formulation: crate::system::Formulation,
    dt: f64,
) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let spec = cfg.problem_spec().map_err(CliError::Config)?;
    let (system, y0) = spec
        .system(formulation, cfg.solver_options())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let pair = imexrk::builtin_scheme(scheme).map_err(|e| CliError::Config(e.to_string()))?;
    let ctrl = controller_config(cfg, &system);
    let run = integrate(&system, &pair, &y0, 0.0, cfg.t_final, &ctrl, Mode::Fixed { dt })
        .map_err(|e| CliError::Run(e.to_string()))?;
    let layout = *system.layout();
    let (_, e, _, t) = layout.split(&run.y_final);
    Ok((t.to_vec(), e.to_vec()))
}

/// Fixed-dt convergence study of the configured scheme against a
/// reference computed with `cfg.ref_scheme` (semi-implicit) at
/// `cfg.ref_dt` (default: smallest dt / 10). Emits the rate table CSV and
/// returns the rows.
pub fn cmd_converge(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<Vec<RateRow>> {
    let dts: Vec<f64> = (0..cfg.levels).map(|k| cfg.dt_start / 2f64.powi(k as i32)).collect();
    let ref_dt = if cfg.ref_dt > 0.0 { cfg.ref_dt } else { dts[cfg.levels - 1] / 10.0 };
    writeln!(
        out,
        "reference: {} semi-implicit at dt = {ref_dt:.3e} (t_final = {:.3e})",
        cfg.ref_scheme, cfg.t_final
    )?;
    let (ref_t, ref_e) = fixed_run_fields(cfg, &cfg.ref_scheme, crate::system::Formulation::Semi, ref_dt)?;

    let mut rows: Vec<RateRow> = Vec::new();
    for &dt in &dts {
        let (t, e) = fixed_run_fields(cfg, &cfg.scheme, cfg.formulation, dt)?;
        let errors_t = relative_norms(&t, &ref_t);
        let errors_er = relative_norms(&e, &ref_e);
        let rate = |prev: &[f64; 3], cur: &[f64; 3], k: usize| -> Option<f64> {
            Some((prev[k] / cur[k]).log2())
        };
        let (rates_t, rates_er) = match rows.last() {
            None => ([None; 3], [None; 3]),
            Some(prev) => {
                let mut rt = [None; 3];
                let mut re = [None; 3];
                for k in 0..3 {
                    rt[k] = rate(&prev.errors_t, &errors_t, k);
                    re[k] = rate(&prev.errors_er, &errors_er, k);
                }
                (rt, re)
            }
        };
        writeln!(
            out,
            "dt={dt:.3e}  L2_T={:.3e} ({})  L2_Er={:.3e} ({})",
            errors_t[1],
            rates_t[1].map(|r| format!("{r:.2}")).unwrap_or_else(|| "-".into()),
            errors_er[1],
            rates_er[1].map(|r| format!("{r:.2}")).unwrap_or_else(|| "-".into()),
        )?;
        rows.push(RateRow { dt, errors_t, errors_er, rates_t, rates_er });
    }
    std::fs::create_dir_all(&cfg.outdir)?;
    let hash = config_hash(&cfg.canonical());
    write_rates(
        &Path::new(&cfg.outdir).join(format!(
            "rates_{}_{}.csv",
            sanitize(&cfg.scheme),
            cfg.formulation.name()
        )),
        &header_comment(hash),
        &rows,
    )?;
    Ok(rows)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}
