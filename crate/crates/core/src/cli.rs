//! Command-line driver: `run`, `sweep`, `verify` and `convergence`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::diagnostics::{self, DiagRecord, EnergySummary};
use crate::error::{Error, Result};
use crate::io::{config, csv, pgm, vtk};
use crate::params::{steps_to, Params};
use crate::stepper::{State, Stepper};
use crate::verify;

/// Modes reported by `sweep`.
pub const SWEEP_MODES: usize = 6;
/// Rays cast by the interface analysis of `sweep`.
pub const SWEEP_RAYS: usize = 360;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nppac", version, about = "Anisotropic dendritic electrodeposition simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation, writing diagnostics and snapshots.
    Run {
        /// Configuration file (defaults when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one simulation per value of a parameter and summarise the
    /// interface shape of each.
    Sweep {
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Time of the interface analysis (and end of each run).
        #[arg(long)]
        snapshot_time: Option<f64>,
        /// Number of runs executed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check the numerical building blocks and a short run.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Self-convergence in time and space, plus the potential solver rate.
    Convergence {
        #[arg(long, default_value_t = 2)]
        refinements: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured end time.
        #[arg(long)]
        end_time: Option<f64>,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let out = std::io::stdout();
    let mut out = out.lock();
    match dispatch(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn load(path: Option<&Path>) -> Result<Params> {
    match path {
        Some(p) => config::load_config(p),
        None => Ok(Params::default()),
    }
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<i32> {
    match cmd {
        Command::Run { config, out: dir } => {
            let p = load(config.as_deref())?;
            let summary = run_simulation(&p, &dir)?;
            log::info!("{} records written to {}", summary.records.len(), dir.display());
            Ok(EXIT_OK)
        }
        Command::Sweep {
            param,
            values,
            config,
            out: dir,
            snapshot_time,
            jobs,
        } => {
            let p = load(config.as_deref())?;
            let values: Vec<String> = values
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            let rows = sweep(&p, &param, &values, &dir, snapshot_time, jobs)?;
            for r in &rows {
                let _ = writeln!(out, "{} = {}: mode0 {:.6e}, mode4 {:.6e}", param, r.value, r.modes[0], r.modes[4]);
            }
            Ok(EXIT_OK)
        }
        Command::Verify { config } => {
            let p = load(config.as_deref())?;
            let checks = verify::run_checks(&p);
            let mut failed = 0;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{tag} {}: {}", c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            let _ = writeln!(out, "{} of {} checks passed", checks.len() - failed, checks.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Convergence {
            refinements,
            config,
            end_time,
        } => {
            let mut p = load(config.as_deref())?;
            if let Some(t) = end_time {
                p.end_time = t;
                p.snapshot_times.retain(|&s| s <= t);
            }
            p.validate()?;
            convergence(&p, refinements, out)?;
            Ok(EXIT_OK)
        }
    }
}

/// Files produced by one `run`.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<DiagRecord>,
    pub final_state: State,
}

/// Runs `p` to its end time, writing into `dir`:
/// `config.txt`, `diagnostics.csv`, and at every snapshot step
/// `snapshot_KKKKK.vtk`, `u_KKKKK.pgm`, `c_KKKKK.pgm`.
pub fn run_simulation(p: &Params, dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg_path = dir.join("config.txt");
    fs::write(&cfg_path, config::serialize_config(p)).map_err(|e| Error::io(&cfg_path, e))?;
    let stepper = Stepper::new(p.clone())?;
    if p.scheme.tau > stepper.max_principle_tau_bound(&stepper.initial_state()?) {
        log::warn!("tau exceeds the maximum-principle bound of the initial state");
    }
    let snaps = p.snapshot_steps();
    let init = stepper.initial_state()?;
    if snaps.contains(&0) {
        write_snapshot(&stepper, &init, dir)?;
    }
    let steps = p.num_steps();
    let (final_state, records) = diagnostics::run_recorded(&stepper, init, steps, |_, next| {
        if next.k % 100 == 0 {
            log::info!("step {} / {steps}, t = {:.4}", next.k, next.t);
        }
        if snaps.contains(&next.k) {
            write_snapshot(&stepper, next, dir)?;
        }
        Ok(())
    })?;
    csv::write_csv(&dir.join("diagnostics.csv"), &records)?;
    Ok(RunSummary { records, final_state })
}

fn write_snapshot(stepper: &Stepper, state: &State, dir: &Path) -> Result<()> {
    let mesh = stepper.mesh();
    let phi = stepper.full_potential(&state.phi_bar)?;
    let k = state.k;
    vtk::write_vtk(&dir.join(format!("snapshot_{k:05}.vtk")), mesh, state.t, &state.u, &state.c, &phi)?;
    pgm::write_pgm(&dir.join(format!("u_{k:05}.pgm")), mesh, &state.u, (0.0, 1.0))?;
    pgm::write_pgm(&dir.join(format!("c_{k:05}.pgm")), mesh, &state.c, (0.0, 1.0))
}

/// One line of the sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub dir: String,
    pub t: f64,
    pub modes: Vec<f64>,
}

fn sweep_dir_name(param: &str, index: usize, value: &str) -> String {
    let safe: String = value
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect();
    format!("{param}_{index:02}_{safe}")
}

/// Runs one simulation per value of `param` (each in its own directory
/// under `dir`) up to `snapshot_time`, then writes `summary.csv` with the
/// interface mode amplitudes at that time.
pub fn sweep(
    base: &Params,
    param: &str,
    values: &[String],
    dir: &Path,
    snapshot_time: Option<f64>,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    let mut configs = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let mut p = base.clone();
        config::set_param(&mut p, param, v)?;
        if let Some(t) = snapshot_time {
            p.end_time = t;
            p.snapshot_times = vec![t];
        }
        p.validate()?;
        configs.push((sweep_dir_name(param, i, v), v.clone(), p));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let run_one = |(name, value, p): &(String, String, Params)| -> Result<SweepRow> {
        let summary = run_simulation(p, &dir.join(name))?;
        let stepper_mesh = p.build_mesh()?;
        let center = [p.initial.seed_x, p.initial.seed_y];
        let modes =
            diagnostics::interface_radius_modes(&stepper_mesh, &summary.final_state.u, center, SWEEP_MODES, SWEEP_RAYS)?;
        Ok(SweepRow {
            value: value.clone(),
            dir: name.clone(),
            t: summary.final_state.t,
            modes,
        })
    };

    let jobs = jobs.clamp(1, configs.len());
    let results: Vec<Result<SweepRow>> = if jobs == 1 {
        configs.iter().map(run_one).collect()
    } else {
        let chunk = configs.len().div_ceil(jobs);
        std::thread::scope(|s| {
            let handles: Vec<_> = configs
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(run_one).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    };
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut text = String::from("param,value,dir,t");
    for m in 0..=SWEEP_MODES {
        text.push_str(&format!(",mode{m}"));
    }
    text.push('\n');
    for r in &rows {
        text.push_str(&format!("{param},{},{},{:.16e}", r.value, r.dir, r.t));
        for m in &r.modes {
            text.push_str(&format!(",{m:.16e}"));
        }
        text.push('\n');
    }
    let path = dir.join("summary.csv");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

fn print_refinement(out: &mut impl Write, title: &str, size: &str, r: &verify::Refinement) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "  {size:>12}  {:>14}", "|u - u_ref|");
    for (s, e) in r.sizes.iter().zip(&r.errors) {
        let _ = writeln!(out, "  {s:>12.5e}  {e:>14.6e}");
    }
    let orders: Vec<String> = r.orders.iter().map(|o| format!("{o:.3}")).collect();
    let _ = writeln!(out, "  observed orders: {}", orders.join(", "));
}

fn convergence(p: &Params, refinements: usize, out: &mut impl Write) -> Result<()> {
    let steps = steps_to(p.end_time, p.scheme.tau);
    let _ = writeln!(out, "end time {} ({steps} coarse steps), mesh {}x{}", p.end_time, p.nx, p.ny);
    let time = verify::time_refinement(p, refinements)?;
    print_refinement(out, "time refinement", "tau", &time);

    let mut halves = Vec::new();
    for l in 0..2 {
        let mut q = p.clone();
        q.scheme.tau = p.scheme.tau / f64::powi(2.0, l);
        let (_, records) = verify::run_to_end(q.clone())?;
        halves.push(diagnostics::energy_estimate_summary(&records, q.scheme.tau)?);
    }
    let _ = writeln!(out, "energy estimates at tau and tau/2");
    for (i, name) in EnergySummary::NAMES.iter().enumerate() {
        let (a, b) = (halves[0].as_array()[i], halves[1].as_array()[i]);
        let _ = writeln!(out, "  {name:<24} {a:>14.6e} {b:>14.6e}");
    }

    let space = verify::space_refinement(p, refinements)?;
    print_refinement(out, "space refinement", "h", &space);

    let sizes: Vec<usize> = (0..=refinements.max(2)).map(|l| 16 << l).collect();
    let errors = sizes
        .iter()
        .map(|&n| verify::poisson_mms_error(n))
        .collect::<Result<Vec<_>>>()?;
    let _ = writeln!(out, "potential solver, manufactured solution");
    for (n, e) in sizes.iter().zip(&errors) {
        let _ = writeln!(out, "  {n:>5}  {e:>14.6e}");
    }
    let rates: Vec<String> = verify::ratios(&errors).iter().map(|r| format!("{r:.3}")).collect();
    let _ = writeln!(out, "  error ratios: {}", rates.join(", "));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with_args(["nppac", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["nppac"]), EXIT_USAGE);
        assert_eq!(main_with_args(["nppac", "run"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(main_with_args(["nppac", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_config_exits_1() {
        let code = main_with_args(["nppac", "verify", "--config", "/nonexistent/nppac.cfg"]);
        assert_eq!(code, EXIT_FAILURE);
    }

    #[test]
    fn sweep_dirs_are_distinct() {
        let names: Vec<String> = ["0", "0.5", "1e-2", "0,5"]
            .iter()
            .enumerate()
            .map(|(i, v)| sweep_dir_name("mu", i, v))
            .collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert_eq!(names[1], "mu_01_0.5");
    }
}
