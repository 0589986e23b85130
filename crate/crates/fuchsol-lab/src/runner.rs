//! `fuchsol run`: one experiment per system, with its output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use fuchsol_euler::run_stability_experiment;
use fuchsol_minkowski::{default_wave_schedule, physical_time_csv, reconstruction_csv, run_minkowski, WaveModel};
use fuchsol_numerics::StepSchedule;
use fuchsol_oracle::oracle_csv;
use fuchsol_schwarzschild::run_schwarzschild;

use crate::config::{LabConfig, SystemParams};
use crate::error::LabError;
use crate::manifest::{GridInfo, RunManifest};
use crate::ode::{run_ode, ODE_POINTS};

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Whether the run completed and met its own checks.
    pub pass: bool,
    pub summary: String,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, text: &str) -> Result<(), LabError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| LabError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), LabError> {
        self.put(name, &(serde_json::to_string_pretty(value).map_err(LabError::run)? + "\n"))
    }
}

fn exponent(e: Option<f64>) -> String {
    e.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

/// Wave runs overwrite the schedule's floor with the configured one, which
/// is stored in the internal time `τ = −t`.
fn wave_schedule(s: Option<StepSchedule>, t_floor: f64) -> StepSchedule {
    StepSchedule { t_floor: -t_floor, ..s.unwrap_or_else(default_wave_schedule) }
}

fn schedule_json<T: Serialize>(s: &T) -> Value {
    serde_json::to_value(s).expect("schedules serialise")
}

/// Runs the configured experiment and writes `record.csv`, the
/// system-specific outputs, `config.json` and `manifest.json` into `out`.
pub fn run_experiment(cfg: &LabConfig, out: &Path) -> Result<RunSummary, LabError> {
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let mut w = Writer { dir: out, files: Vec::new() };
    let (grid, schedule, pass, summary) = match &cfg.params {
        SystemParams::Ode(c) => {
            let o = run_ode(c)?;
            w.put("record.csv", &o.record.to_csv())?;
            w.put("oracle.csv", &oracle_csv(&o.oracle))?;
            w.json("report.json", &o.report)?;
            let r = &o.report;
            let pass = r.completed && r.endpoint_error.iter().all(|&e| e <= 1e-6);
            let summary = format!(
                "ode a={} p={}: t_end={:e}, endpoint rel err ({:.2e}, {:.2e}), u1(0) quadrature {:.12}",
                r.a, r.p, r.t_end, r.endpoint_error[0], r.endpoint_error[1], r.u1_limit
            );
            (GridInfo { n_points: ODE_POINTS, domain: (0.0, 2.0 * std::f64::consts::PI) }, schedule_json(&c.schedule()), pass, summary)
        }
        SystemParams::Euler(c) => {
            let o = run_stability_experiment(c).map_err(LabError::run)?;
            w.put("record.csv", &o.record.to_csv())?;
            w.json("report.json", &o.report)?;
            let r = &o.report;
            let f = &r.pass_flags;
            let summary = format!(
                "euler Gamma={:.6}: u1 exponent {}, u0-u0(0) exponent {}, |V*-V*hat| {:.3e}, {} steps",
                r.big_gamma,
                exponent(r.fitted_exponents.u1),
                exponent(r.fitted_exponents.u0_minus_limit),
                r.vstar_distance,
                r.steps
            );
            let pass = f.completed && f.u1_decay && f.u0_rate_bound && f.vstar_close;
            (GridInfo { n_points: c.n_points, domain: (0.0, 2.0 * std::f64::consts::PI) }, schedule_json(&c.step_schedule()), pass, summary)
        }
        SystemParams::Minkowski(c) => {
            let o = run_minkowski(c).map_err(LabError::run)?;
            w.put("record.csv", &physical_time_csv(&o.record))?;
            w.put("reconstruction.csv", &reconstruction_csv(o.model.as_ref(), o.layout, &o.record.snapshots))?;
            w.json("report.json", &o.report)?;
            let r = &o.report;
            let pass = r.completed && r.decay.pass && r.boundary.pass && r.restriction_gap <= 1e-8;
            let summary = format!(
                "minkowski lambda={} m={}: decay bound worst ratio {:.3}, restriction gap {:.2e}, {} steps",
                r.lambda, r.m, r.decay.worst_ratio, r.restriction_gap, r.steps
            );
            let half = o.model.cutoff().half_period();
            let sched = wave_schedule(c.schedule, c.t_floor);
            (GridInfo { n_points: c.n_points, domain: (-half, 2.0 * half) }, schedule_json(&sched), pass, summary)
        }
        SystemParams::Schwarzschild(c) => {
            let o = run_schwarzschild(c).map_err(LabError::run)?;
            w.put("record.csv", &physical_time_csv(&o.record))?;
            w.put("reconstruction.csv", &reconstruction_csv(o.model.as_ref(), o.layout, &o.record.snapshots))?;
            w.json("report.json", &o.report)?;
            w.json("audit.json", &o.report.audit)?;
            let r = &o.report;
            let pass = r.completed && r.audit.pass && r.decay.pass && r.restriction_gap <= 1e-8;
            let summary = format!(
                "schwarzschild mu={} m={} rho0={:.4}: audit {}, decay bound worst ratio {:.3}, restriction gap {:.2e}",
                r.mu,
                r.audit.chosen_m,
                r.audit.chosen_rho0,
                if r.audit.pass { "pass" } else { "FAIL" },
                r.decay.worst_ratio,
                r.restriction_gap
            );
            let half = o.model.cutoff().half_period();
            let sched = wave_schedule(c.schedule, c.t_floor);
            (GridInfo { n_points: c.n_points, domain: (-half, 2.0 * half) }, schedule_json(&sched), pass, summary)
        }
    };
    w.put("config.json", &(cfg.to_json() + "\n"))?;
    let mut outputs: Vec<String> =
        w.files.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect();
    outputs.push("manifest.json".into());
    let manifest = RunManifest::new(cfg, grid, schedule, outputs);
    w.put("manifest.json", &(manifest.to_json() + "\n"))?;
    Ok(RunSummary { files: w.files, pass, summary })
}
