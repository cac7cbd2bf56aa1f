//! A single solve, sampled on a uniform grid.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use stcutfem::{march_on, EvalSide, Execution, SpaceTimeSolution};

use crate::config::Config;
use crate::error::CliError;

/// `u_h` at one grid point. The first time level is the trace from above
/// at `t = 0`, later ones the traces from below at the slab ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub slab: usize,
    pub t: f64,
    pub x: f64,
    pub u_h: f64,
}

/// Position of the overlapping domain over one slab.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub slab: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub velocity: f64,
    pub left_start: f64,
    pub left_end: f64,
    pub right_start: f64,
    pub right_end: f64,
}

pub struct SingleReport {
    pub solution: SpaceTimeSolution,
    pub samples: Vec<Sample>,
    pub trace: Vec<TraceRow>,
}

pub fn run_single(config: &Config) -> Result<SingleReport, CliError> {
    let setup = config.base_run()?;
    let mesh = Arc::new(setup.mesh().map_err(|e| CliError::Config(e.to_string()))?);
    let solution =
        march_on(&mesh, &setup.problem, Execution::default()).map_err(|e| CliError::Numerical(e.to_string()))?;

    let domain = mesh.domain;
    let m = 4 * mesh.background.n_cells();
    let xs: Vec<f64> = (0..=m)
        .map(|i| domain.lo + domain.length() * i as f64 / m as f64)
        .collect();
    let mut levels = vec![(0, mesh.partition.slab(0).0)];
    levels.extend((0..mesh.n_slabs()).map(|n| (n, mesh.partition.slab(n).1)));
    let mut samples = Vec::with_capacity(levels.len() * xs.len());
    for &(slab, t) in &levels {
        for &x in &xs {
            let u_h = solution
                .eval_in_slab(slab, x, t, EvalSide::Auto)
                .map_err(|e| CliError::Numerical(e.to_string()))?
                .value;
            samples.push(Sample { slab, t, x, u_h });
        }
    }

    let length = mesh.overlap_length();
    let trace = (0..mesh.n_slabs())
        .map(|n| {
            let (t_start, t_end) = mesh.partition.slab(n);
            let (left_start, left_end) = (mesh.left_positions()[n], mesh.left_positions()[n + 1]);
            TraceRow {
                slab: n,
                t_start,
                t_end,
                velocity: mesh.velocity(n),
                left_start,
                left_end,
                right_start: left_start + length,
                right_end: left_end + length,
            }
        })
        .collect();
    Ok(SingleReport {
        solution,
        samples,
        trace,
    })
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `solution.csv` and `geometry.csv` into `dir`.
pub fn write_single(report: &SingleReport, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    write_rows(&report.samples, &dir.join("solution.csv"))?;
    write_rows(&report.trace, &dir.join("geometry.csv"))?;
    Ok(())
}
