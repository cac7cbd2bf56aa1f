//! Convergence studies: one solve per sweep entry, a CSV row each, and a
//! least-squares slope over the fit window.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use stcutfem::norms::lls_fit;
use stcutfem::{error_breakdown, march_on, Execution, NormBreakdown};

use crate::config::{Config, Sweep};
use crate::error::CliError;
use crate::svg::{self, Series, Style};

#[derive(Debug, Clone)]
pub struct StudyRow {
    pub resolution: usize,
    pub k: f64,
    pub h0: f64,
    pub h_g: f64,
    pub outcome: Result<NormBreakdown, String>,
    pub runtime_s: f64,
}

impl StudyRow {
    /// The swept step size.
    pub fn step(&self, sweep: Sweep) -> f64 {
        match sweep {
            Sweep::K => self.k,
            Sweep::H => self.h0,
        }
    }

    pub fn error_x(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(NormBreakdown::x)
    }
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub sweep: Sweep,
    pub q: usize,
    pub rows: Vec<StudyRow>,
    pub fit_window: [usize; 2],
    /// `(slope, intercept)` of `log error` against `log step`.
    pub fit: Option<(f64, f64)>,
    pub reference_slope: f64,
    pub runtime_s: f64,
}

impl StudyReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.0)
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(|e| (r.resolution, e.as_str())))
    }

    pub fn is_success(&self) -> bool {
        self.failures().next().is_none() && self.fit.is_some()
    }
}

fn run_entry(config: &Config, index: usize) -> StudyRow {
    let start = Instant::now();
    let study = config.study.as_ref().expect("validated study");
    let resolution = study.resolutions[index];
    let outcome = config.study_entry(index).map_err(|e| e.to_string());
    let (k, h0, h_g, outcome) = match outcome {
        Ok(setup) => {
            let d = &setup.discretization;
            let k = setup.problem.final_time / d.n_slabs as f64;
            let h0 = setup.problem.domain.length() / d.n_background as f64;
            let h_g = setup.overlap.length / d.n_overlap as f64;
            let outcome = setup.mesh().map_err(|e| e.to_string()).and_then(|mesh| {
                let mesh = Arc::new(mesh);
                let u = march_on(&mesh, &setup.problem, Execution::default()).map_err(|e| e.to_string())?;
                let exact = setup.problem.exact.as_ref().expect("problems carry an exact solution");
                Ok(error_breakdown(&u, exact, Execution::default()))
            });
            (k, h0, h_g, outcome)
        }
        Err(e) => (f64::NAN, f64::NAN, f64::NAN, Err(e)),
    };
    StudyRow {
        resolution,
        k,
        h0,
        h_g,
        outcome,
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

/// Runs every sweep entry, concurrently when the `parallel` feature is on.
/// Failed entries are recorded in their row and the study carries on.
pub fn run_convergence(config: &Config) -> Result<StudyReport, CliError> {
    let study = config
        .study
        .as_ref()
        .ok_or_else(|| CliError::Config("study: missing, required by converge".into()))?;
    let start = Instant::now();
    let n = study.resolutions.len();
    #[cfg(feature = "parallel")]
    let rows: Vec<StudyRow> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(|i| run_entry(config, i)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<StudyRow> = (0..n).map(|i| run_entry(config, i)).collect();

    let [i, j] = study.fit_window;
    let window: Option<Vec<(f64, f64)>> = rows[i - 1..j]
        .iter()
        .map(|r| r.error_x().map(|e| (r.step(study.sweep), e)))
        .collect();
    let fit = window.and_then(|points| lls_fit(&points).ok());
    Ok(StudyReport {
        sweep: study.sweep,
        q: config.discretization.q,
        rows,
        fit_window: study.fit_window,
        fit,
        reference_slope: config.reference_slope(),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize)]
struct CsvRow {
    resolution: usize,
    k: f64,
    h0: f64,
    #[serde(rename = "hG")]
    h_g: f64,
    error_x: Option<f64>,
    error_b: Option<f64>,
    gradient_sq: Option<f64>,
    overlap_jump_sq: Option<f64>,
    interface_sq: Option<f64>,
    time_jumps_sq: Option<f64>,
    final_trace_sq: Option<f64>,
    initial_trace_sq: Option<f64>,
    upwind_sq: Option<f64>,
    material_sq: Option<f64>,
    runtime_s: f64,
}

impl From<&StudyRow> for CsvRow {
    fn from(r: &StudyRow) -> Self {
        let b = r.outcome.as_ref().ok();
        let part = |f: fn(&NormBreakdown) -> f64| b.map(f);
        CsvRow {
            resolution: r.resolution,
            k: r.k,
            h0: r.h0,
            h_g: r.h_g,
            error_x: part(NormBreakdown::x),
            error_b: part(NormBreakdown::b),
            gradient_sq: part(|b| b.gradient),
            overlap_jump_sq: part(|b| b.overlap_jump),
            interface_sq: part(|b| b.interface),
            time_jumps_sq: part(|b| b.time_jumps),
            final_trace_sq: part(|b| b.final_trace),
            initial_trace_sq: part(|b| b.initial_trace),
            upwind_sq: part(|b| b.upwind),
            material_sq: part(|b| b.material),
            runtime_s: r.runtime_s,
        }
    }
}

#[derive(Serialize)]
struct Failure<'a> {
    resolution: usize,
    message: &'a str,
}

#[derive(Serialize)]
struct Summary<'a> {
    sweep: Sweep,
    q: usize,
    fit_window: [usize; 2],
    slope: Option<f64>,
    intercept: Option<f64>,
    reference_slope: f64,
    failures: Vec<Failure<'a>>,
    config: &'a Config,
}

pub fn write_csv(report: &StudyReport, path: &Path) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for row in &report.rows {
        w.serialize(CsvRow::from(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_svg(report: &StudyReport) -> String {
    let (step_name, sweep_name) = match report.sweep {
        Sweep::K => ("k", "time step"),
        Sweep::H => ("h", "mesh size"),
    };
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter_map(|r| r.error_x().map(|e| (r.step(report.sweep), e)))
        .collect();
    let [i, j] = report.fit_window;
    let window: Vec<f64> = report.rows[i - 1..j].iter().map(|r| r.step(report.sweep)).collect();
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let mut series = vec![Series {
        label: "error (X-norm)".into(),
        points,
        style: Style::Markers,
        color: "#1f4e9c",
    }];
    if let Some((slope, intercept)) = report.fit {
        let line = |s: f64| (s, (intercept + slope * s.ln()).exp());
        series.push(Series {
            label: format!("fit, slope {slope:.4}"),
            points: vec![line(lo), line(hi)],
            style: Style::Line,
            color: "#c0392b",
        });
        // reference slope through the fitted value at the coarsest window point
        let anchor = line(hi);
        let p = report.reference_slope;
        series.push(Series {
            label: format!("slope {p}"),
            points: vec![(lo, anchor.1 * (lo / hi).powf(p)), anchor],
            style: Style::Dashed,
            color: "#555555",
        });
    }
    svg::loglog(
        &format!("dG({}) convergence in the {sweep_name}", report.q),
        step_name,
        "error",
        &series,
    )
}

/// Writes `convergence.csv`, `convergence.svg` and `summary.json` into `dir`.
pub fn write_convergence(report: &StudyReport, config: &Config, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    write_csv(report, &dir.join("convergence.csv"))?;
    std::fs::write(dir.join("convergence.svg"), render_svg(report))?;
    let summary = Summary {
        sweep: report.sweep,
        q: report.q,
        fit_window: report.fit_window,
        slope: report.fit.map(|f| f.0),
        intercept: report.fit.map(|f| f.1),
        reference_slope: report.reference_slope,
        failures: report
            .failures()
            .map(|(resolution, message)| Failure { resolution, message })
            .collect(),
        config,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}
