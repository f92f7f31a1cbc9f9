use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimulationConfig;
use super::library::CaseDefinition;
use crate::diagnostics::{convergence_order, l2_error, measure, vorticity, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::multipatch::build_multipatch;
use crate::operators::OperatorContext;
use crate::spline::{l2_project, Slot};
use crate::stepper::Stepper;

/// Column names of the diagnostics CSV.
pub const DIAGNOSTICS_COLUMNS: [&str; 8] = [
    "time",
    "energy",
    "mom_x",
    "mom_y",
    "div_l2",
    "jump_energy",
    "enstrophy_term",
    "picard_iters",
];

/// A configured case on its discrete spaces.
#[derive(Debug)]
pub struct Simulation {
    pub config: SimulationConfig,
    pub case: CaseDefinition,
    pub ctx: OperatorContext,
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub steps: usize,
    pub time: f64,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub records: Vec<DiagnosticsRecord>,
    /// Velocity L2 error against the exact solution at the final time.
    pub final_error: Option<f64>,
    /// True when the run stopped on the steady-state criterion.
    pub steady: bool,
    pub wall_time: Duration,
    /// Set when a step failed twice; the fields hold the last good state.
    pub failure: Option<String>,
}

impl RunOutcome {
    pub fn summary_line(&self) -> String {
        let err = match self.final_error {
            Some(e) => format!("{e:.6e}"),
            None => "n/a".into(),
        };
        let status = match &self.failure {
            Some(f) => format!("failed: {f}"),
            None if self.steady => "steady".into(),
            None => "done".into(),
        };
        format!(
            "{status}: {} steps, t = {:.6}, l2 error = {err}, wall time = {:.3} s",
            self.steps,
            self.time,
            self.wall_time.as_secs_f64()
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

struct Output {
    dir: PathBuf,
    csv: csv::Writer<File>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("diagnostics.csv");
        let mut csv = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        csv.write_record(DIAGNOSTICS_COLUMNS).map_err(csv_err(&path))?;
        Ok(Self { dir: dir.to_path_buf(), csv })
    }

    fn record(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        let row = [
            r.time,
            r.energy,
            r.momentum[0],
            r.momentum[1],
            r.div_l2,
            r.jump_energy,
            r.enstrophy_term,
        ];
        let mut fields: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        fields.push(r.picard_iterations.to_string());
        let path = self.dir.join("diagnostics.csv");
        self.csv.write_record(&fields).map_err(csv_err(&path))
    }

    fn flush(&mut self) -> Result<()> {
        let path = self.dir.join("diagnostics.csv");
        self.csv.flush().map_err(io_err(&path))
    }
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let case = config.case_definition();
        let space = build_multipatch(&config.multipatch())?;
        let ctx = OperatorContext::new(space, case.boundary.clone())?;
        Ok(Self { config, case, ctx })
    }

    pub fn stepper(&self) -> Result<Stepper<'_>> {
        Stepper::new(&self.ctx, self.config.stepper_config())
    }

    /// L2 projection of the initial velocity, made conforming and then
    /// discretely divergence free.
    pub fn initial_velocity(&self, stepper: &Stepper<'_>) -> Result<Vec<f64>> {
        let seq = self.ctx.seq();
        let u = l2_project(seq, Slot::V1, |x, y| self.case.initial(x, y))?.coeffs;
        let u = self.ctx.space.pc1.matvec(&u);
        Ok(stepper.leray_project(&u)?.0)
    }

    pub fn l2_error(&self, u: &[f64], t: f64) -> Result<Option<f64>> {
        if !self.case.has_exact() {
            return Ok(None);
        }
        let err = l2_error(&self.ctx, u, |x, y| self.case.exact(t, x, y).unwrap_or([0.0; 2]))?;
        Ok(Some(err))
    }

    /// Writes `u`, `p` and `ω` sampled on the configured uniform grid.
    pub fn write_snapshot(&self, path: &Path, t: f64, u: &[f64], p: &[f64]) -> Result<()> {
        let seq = self.ctx.seq();
        let omega = vorticity(&self.ctx, u)?;
        let [nx, ny] = self.config.output.sample;
        let [(x0, x1), (y0, y1)] = seq.domain();
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        let mut text = format!("# grid {nx} {ny}\n# bounds {x0} {x1} {y0} {y1}\n# time {t}\n# x y u_x u_y p omega\n");
        for i in 0..nx {
            let x = x0 + (x1 - x0) * i as f64 / (nx - 1) as f64;
            for j in 0..ny {
                let y = y0 + (y1 - y0) * j as f64 / (ny - 1) as f64;
                let v = seq.eval_point(Slot::V1, u, x, y)?;
                let q = seq.eval_point(Slot::V2, p, x, y)?[0];
                let o = seq.eval_point(Slot::V0, &omega, x, y)?[0];
                text.push_str(&format!("{x:e} {y:e} {:e} {:e} {q:e} {o:e}\n", v[0], v[1]));
            }
        }
        w.write_all(text.as_bytes()).map_err(io_err(path))?;
        w.flush().map_err(io_err(path))
    }

    /// Runs to `t_final` (or steady state). With `out` set, writes the
    /// diagnostics CSV and snapshots there.
    pub fn run(&self, out: Option<&Path>) -> Result<RunOutcome> {
        let start = Instant::now();
        let mut stepper = self.stepper()?;
        let mut u = self.initial_velocity(&stepper)?;
        let mut p = vec![0.0; self.ctx.dim(Slot::V2)];
        let mut output = out.map(Output::create).transpose()?;
        let every = self.config.output.snapshot_every;
        let snapshot = |step: usize, t: f64, u: &[f64], p: &[f64]| -> Result<()> {
            if let Some(dir) = out {
                self.write_snapshot(&dir.join(format!("snapshot_{step:06}.txt")), t, u, p)?;
            }
            Ok(())
        };

        let mut records = vec![measure(&self.ctx, &u)?];
        if let Some(o) = output.as_mut() {
            o.record(&records[0])?;
        }
        if every > 0 {
            snapshot(0, 0.0, &u, &p)?;
        }

        let t_final = self.config.run.t_final;
        let mut t = 0.0;
        let mut step = 0;
        let mut steady = false;
        let mut failure = None;
        let mut base_dt = stepper.config().dt;
        loop {
            let remaining = t_final - t;
            if remaining <= 1e-8 * base_dt {
                break;
            }
            let dt = if self.config.run.cfl_auto { stepper.cfl_dt(&u)? } else { base_dt };
            stepper.set_dt(dt.min(remaining))?;
            let outcome = match stepper.advance(&u) {
                Ok(o) => o,
                Err(e @ Error::StepFailure { .. }) => {
                    failure = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            };
            if stepper.config().dt < dt.min(remaining) {
                base_dt = stepper.config().dt;
            }
            let dt_used = outcome.report.dt_used;
            let change: Vec<f64> = outcome.velocity.iter().zip(&u).map(|(a, b)| a - b).collect();
            let rate = stepper.m1_norm(&change) / dt_used;
            u = outcome.velocity;
            p = outcome.pressure;
            t += dt_used;
            step += 1;
            let rec = measure(&self.ctx, &u)?.at(t, outcome.report.picard_iterations);
            if let Some(o) = output.as_mut() {
                o.record(&rec)?;
            }
            records.push(rec);
            if every > 0 && step % every == 0 {
                snapshot(step, t, &u, &p)?;
            }
            if self.config.run.steady_tol.is_some_and(|tol| rate <= tol) {
                steady = true;
                break;
            }
        }
        if let Some(o) = output.as_mut() {
            o.flush()?;
        }
        if out.is_some() && (failure.is_some() || (every > 0 && step % every != 0)) {
            snapshot(step, t, &u, &p)?;
        }
        Ok(RunOutcome {
            steps: step,
            time: t,
            final_error: self.l2_error(&u, t)?,
            velocity: u,
            pressure: p,
            records,
            steady,
            wall_time: start.elapsed(),
            failure,
        })
    }
}

/// Builds and runs a configuration.
pub fn run(config: SimulationConfig, out: Option<&Path>) -> Result<RunOutcome> {
    Simulation::new(config)?.run(out)
}

/// One line of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub degree: usize,
    /// Total cells per direction.
    pub cells: usize,
    pub h: f64,
    /// Absent when the sub-run failed.
    pub error: Option<f64>,
    /// Least-squares order over all successful meshes of this degree.
    pub order: Option<f64>,
}

/// Runs `base` on every (mesh, degree) pair and fits the error decay per
/// degree. `meshes` count cells per direction over the whole domain and
/// must be divisible by the patch counts.
pub fn convergence_study(base: &SimulationConfig, meshes: &[usize], degrees: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if !base.case_definition().has_exact() {
        return Err(Error::Config(format!("case {} has no exact solution", base.case)));
    }
    let mut jobs = Vec::new();
    for &degree in degrees {
        for &cells in meshes {
            let mut cfg = base.clone();
            cfg.grid.degree = degree;
            for d in 0..2 {
                let np = cfg.grid.n_patches[d];
                if cells % np != 0 {
                    return Err(Error::Config(format!("{cells} cells do not split over {np} patches")));
                }
                cfg.grid.cells_per_patch[d] = cells / np;
            }
            cfg.validate()?;
            jobs.push((degree, cells, cfg));
        }
    }
    let width = base.case_definition().domain[0].1 - base.case_definition().domain[0].0;
    let results: Vec<(usize, usize, Option<f64>)> = jobs
        .into_par_iter()
        .map(|(degree, cells, cfg)| {
            let err = run(cfg, None)
                .ok()
                .filter(|o| o.failure.is_none())
                .and_then(|o| o.final_error);
            (degree, cells, err)
        })
        .collect();

    let mut rows: Vec<ConvergenceRow> = results
        .into_iter()
        .map(|(degree, cells, error)| ConvergenceRow {
            degree,
            cells,
            h: width / cells as f64,
            error,
            order: None,
        })
        .collect();
    for &degree in degrees {
        let mut samples: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.degree == degree)
            .filter_map(|r| r.error.map(|e| (r.h, e)))
            .collect();
        samples.sort_by(|a, b| b.0.total_cmp(&a.0));
        let order = convergence_order(&samples).ok();
        rows.iter_mut().filter(|r| r.degree == degree).for_each(|r| r.order = order);
    }
    Ok(rows)
}

/// Writes a convergence table as CSV; failed runs leave `error` empty.
pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["degree", "cells", "h", "error", "order"]).map_err(csv_err(path))?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        w.write_record([r.degree.to_string(), r.cells.to_string(), format!("{:e}", r.h), opt(r.error), opt(r.order)])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
