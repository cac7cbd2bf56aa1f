//! Slab-by-slab time marching and the linear solver behind it.
//!
//! Slab matrices are stored densely. Ordering the unknowns by spatial
//! position makes them narrowly banded (both meshes only couple neighbours),
//! so the LU factorization with partial pivoting is restricted to the band.

use std::sync::Arc;

use crate::assembly::{assemble_slab_with, PreviousTrace, SlabSystem};
use crate::error::{Error, Result};
use crate::geometry::SlabGeometry;
use crate::par::Execution;
use crate::problem::{Discretization, OverlapSpec, ProblemSpec, SpaceTimeMesh};
use crate::spaces::{SlabFunction, SlabSpace, SpaceTimeSolution};

/// Pivots below this multiple of `‖A‖∞` are treated as zero.
pub const PIVOT_TOL: f64 = 1e-14;
/// Largest accepted relative residual `‖Ax - b‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix rows must form a square array"));
        }
        Ok(DenseMatrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `yᵀ A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        y.iter().zip(self.mul_vec(x)).map(|(a, b)| a * b).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut t = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Lower and upper bandwidth.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v != 0.0 {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        (kl, ku)
    }

    /// `P A Pᵀ` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = DenseMatrix::zeros(self.n);
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                out.set(i, j, self.get(pi, pj));
            }
        }
        out
    }
}

/// Diagnostics of one linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub size: usize,
    pub lower_bandwidth: usize,
    pub upper_bandwidth: usize,
    /// Ratio of the largest to the smallest pivot magnitude, a cheap lower
    /// bound proxy for the condition number.
    pub condition: f64,
    pub residual: f64,
}

/// Solves `A x = b` by banded LU with partial pivoting. `slab` only labels
/// errors.
pub fn solve_banded(a: &DenseMatrix, b: &[f64], slab: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n();
    if b.len() != n {
        return Err(Error::invalid("right-hand side length does not match the matrix"));
    }
    let norm = a.norm_inf();
    let (kl, ku) = a.bandwidths();
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let (mut pmax, mut pmin) = (0.0_f64, f64::INFINITY);
    // with row interchanges the upper factor widens to kl + ku
    let width = kl + ku;
    for k in 0..n {
        let last_row = (k + kl).min(n - 1);
        let (p, pv) = (k..=last_row)
            .map(|i| (i, lu.get(i, k).abs()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        let condition = if pmin.is_finite() { pmax / pmin.min(pv) } else { f64::INFINITY };
        if !(pv > PIVOT_TOL * norm) {
            return Err(Error::Singular {
                slab,
                column: k,
                pivot: pv,
                condition,
            });
        }
        pmax = pmax.max(pv);
        pmin = pmin.min(pv);
        let last_col = (k + width).min(n - 1);
        if p != k {
            for j in k..=last_col {
                let (u, v) = (lu.get(k, j), lu.get(p, j));
                lu.set(k, j, v);
                lu.set(p, j, u);
            }
            x.swap(k, p);
        }
        let pivot = lu.get(k, k);
        for i in k + 1..=last_row {
            let factor = lu.get(i, k) / pivot;
            if factor == 0.0 {
                continue;
            }
            lu.set(i, k, 0.0);
            for j in k + 1..=last_col {
                let u = lu.get(k, j);
                if u != 0.0 {
                    lu.add(i, j, -factor * u);
                }
            }
            x[i] -= factor * x[k];
        }
    }
    for k in (0..n).rev() {
        let last_col = (k + width).min(n - 1);
        let mut s = x[k];
        for j in k + 1..=last_col {
            s -= lu.get(k, j) * x[j];
        }
        x[k] = s / lu.get(k, k);
    }

    let r = a.mul_vec(&x);
    let res_num = r.iter().zip(b).map(|(ri, bi)| (ri - bi).abs()).fold(0.0, f64::max);
    let x_norm = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let b_norm = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let denom = norm * x_norm + b_norm;
    let residual = if denom > 0.0 { res_num / denom } else { 0.0 };
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Inaccurate { slab, residual });
    }
    let stats = SolveStats {
        size: n,
        lower_bandwidth: kl,
        upper_bandwidth: ku,
        condition: if n == 0 { 1.0 } else { pmax / pmin },
        residual,
    };
    Ok((x, stats))
}

/// Solves one slab system, ordering unknowns by position first.
pub fn solve_slab(system: &SlabSystem) -> Result<(Vec<f64>, SolveStats)> {
    let n = system.rhs.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&i, &j| system.positions[i].total_cmp(&system.positions[j]).then(i.cmp(&j)));
    let a = system.matrix.permuted(&perm);
    let b: Vec<f64> = perm.iter().map(|&i| system.rhs[i]).collect();
    let (y, stats) = solve_banded(&a, &b, system.slab)?;
    let mut x = vec![0.0; n];
    for (new, &old) in perm.iter().enumerate() {
        x[old] = y[new];
    }
    Ok((x, stats))
}

/// Builds the space-time mesh and marches through all slabs.
pub fn march(problem: &ProblemSpec, overlap: &OverlapSpec, disc: &Discretization) -> Result<SpaceTimeSolution> {
    let mesh = Arc::new(SpaceTimeMesh::new(problem, overlap, disc)?);
    march_on(&mesh, problem, Execution::default())
}

pub fn march_on(mesh: &Arc<SpaceTimeMesh>, problem: &ProblemSpec, exec: Execution) -> Result<SpaceTimeSolution> {
    march_with(mesh, problem, exec).map(|(solution, _)| solution)
}

/// Marches and also returns per-slab solver diagnostics.
pub fn march_with(
    mesh: &Arc<SpaceTimeMesh>,
    problem: &ProblemSpec,
    exec: Execution,
) -> Result<(SpaceTimeSolution, Vec<SolveStats>)> {
    problem.validate()?;
    let mut slabs: Vec<SlabFunction> = Vec::with_capacity(mesh.n_slabs());
    let mut stats = Vec::with_capacity(mesh.n_slabs());
    for n in 0..mesh.n_slabs() {
        let geometry = SlabGeometry::build(mesh, n)?;
        let space = SlabSpace::build(&geometry);
        let previous = match slabs.last() {
            None => PreviousTrace::Initial(&*problem.initial),
            Some(prev) => PreviousTrace::Slab(prev),
        };
        let system = assemble_slab_with(&geometry, &space, problem, previous, exec).map_err(|e| e.in_slab(n))?;
        let (coefficients, s) = solve_slab(&system).map_err(|e| e.in_slab(n))?;
        stats.push(s);
        slabs.push(SlabFunction {
            geometry,
            space,
            coefficients,
        });
    }
    Ok((SpaceTimeSolution::new(Arc::clone(mesh), slabs)?, stats))
}
