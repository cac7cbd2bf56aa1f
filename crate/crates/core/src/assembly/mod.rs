//! Slab system assembly.
//!
//! Rows are test functions, columns trial functions. For one slab the
//! matrix collects
//!
//! * `Σᵢ ∫ (ẇ, v)_{Ωᵢ(t)} dt` with `ẇ` the time derivative of the
//!   transported basis (`φλ' - μ φ' λ` on `Ω₂`),
//! * `∫ A_{h,t}(w, v) dt`: stiffness on both sides, Nitsche consistency,
//!   symmetry and penalty terms at the two interface points, and the
//!   gradient-jump term on the overlap domain `Ω_O(t)`,
//! * the upwind interface term `∫ n₁ μ [w] v_σ dt`,
//! * the trace term `(w⁺, v⁺)` at the slab start.
//!
//! The right-hand side holds the source integral and the trace of the
//! previous slab (or the initial data) tested against `v⁺`.

pub mod forms;

use crate::error::{Error, Result};
use crate::geometry::{sigma_side, Interface, Segment, Side, SlabGeometry, SpatialPartition};
use crate::par::{map_collect, Execution};
use crate::problem::{ProblemSpec, TimeDegree};
use crate::quadrature::{composite_time_rule, Rule1D};
use crate::solver::DenseMatrix;
use crate::spaces::{cell_shapes, temporal_basis, SlabFunction, SlabSpace, SpatialDof};

/// Assembled linear system of one slab.
#[derive(Debug, Clone)]
pub struct SlabSystem {
    pub slab: usize,
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    /// Spatial position attached to each column (slab-midpoint location of
    /// its node), used to order unknowns for the banded factorization.
    pub positions: Vec<f64>,
}

/// Data entering the slab through the trace at its start time.
#[derive(Clone, Copy)]
pub enum PreviousTrace<'a> {
    Initial(&'a (dyn Fn(f64) -> f64 + Send + Sync)),
    Slab(&'a SlabFunction),
}

#[derive(Debug, Clone, Copy, Default)]
struct Local {
    dof: usize,
    value: f64,
    slope: f64,
}

/// Up to two nonzero shape functions of one representation at a point.
#[derive(Debug, Clone, Copy, Default)]
struct Locals {
    items: [Local; 2],
    len: usize,
}

impl Locals {
    fn iter(&self) -> impl Iterator<Item = &Local> {
        self.items[..self.len].iter()
    }
}

fn locals(space: &SlabSpace, geometry: &SlabGeometry, side: Side, cell: usize, x: f64, t: f64) -> Locals {
    let mesh = geometry.mesh();
    let (nodes, local_x) = match side {
        Side::One => (mesh.background.nodes(), x),
        Side::Two => (mesh.overlap.nodes(), x - geometry.left(t)),
    };
    let shapes = cell_shapes(nodes[cell], nodes[cell + 1], local_x);
    let mut out = Locals::default();
    for (i, (value, slope)) in shapes.into_iter().enumerate() {
        let dof = match side {
            Side::One => match space.background_dof(cell + i) {
                Some(d) => d,
                None => continue,
            },
            Side::Two => space.overlap_dof(cell + i),
        };
        out.items[out.len] = Local { dof, value, slope };
        out.len += 1;
    }
    out
}

fn segment_cell(segment: &Segment, side: Side) -> usize {
    match side {
        Side::One => segment.background_cell,
        Side::Two => segment
            .overlap_cell
            .expect("segments inside G(t) carry an overlap cell"),
    }
}

/// Spatial bilinear contribution between trial `col` and test `row`.
/// `stiff` multiplies `λ_r λ_s`, `mass` multiplies `λ_r λ_s'`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    row: usize,
    col: usize,
    stiff: f64,
    mass: f64,
}

fn stiff(row: usize, col: usize, value: f64) -> Entry {
    Entry {
        row,
        col,
        stiff: value,
        mass: 0.0,
    }
}

#[derive(Debug, Clone, Copy)]
struct Terms {
    /// Transport, upwind and mass terms in addition to `A_{h,t}`.
    full: bool,
    mass: bool,
}

fn spatial_entries(
    geometry: &SlabGeometry,
    space: &SlabSpace,
    partition: &SpatialPartition,
    terms: Terms,
    probe: f64,
) -> Vec<Entry> {
    let t = partition.t;
    let mesh = geometry.mesh();
    let mu = geometry.velocity;
    let gauss = Rule1D::gauss_legendre3();
    let mut out = Vec::with_capacity(partition.segments.len() * 10);

    for seg in &partition.segments {
        let side = seg.side;
        let cell = segment_cell(seg, side);
        let len = seg.length();
        let mid = locals(space, geometry, side, cell, seg.midpoint(), t);
        for a in mid.iter() {
            for b in mid.iter() {
                out.push(stiff(b.dof, a.dof, len * a.slope * b.slope));
            }
        }
        if terms.full && (terms.mass || side == Side::Two) {
            for (x, w) in gauss.mapped(seg.a, seg.b) {
                let loc = locals(space, geometry, side, cell, x, t);
                for a in loc.iter() {
                    for b in loc.iter() {
                        let transport = if side == Side::Two {
                            -mu * w * a.slope * b.value
                        } else {
                            0.0
                        };
                        let mass = if terms.mass { w * a.value * b.value } else { 0.0 };
                        out.push(Entry {
                            row: b.dof,
                            col: a.dof,
                            stiff: transport,
                            mass,
                        });
                    }
                }
            }
        }
        if side == Side::Two && geometry.is_cut(seg.background_cell) {
            // [∇w] = ∇w₁ - ∇w₂ with the background polynomial of the cut cell
            let x = seg.midpoint();
            let bg = locals(space, geometry, Side::One, seg.background_cell, x, t);
            let ov = locals(space, geometry, Side::Two, cell, x, t);
            let grads: Vec<(usize, f64)> = bg
                .iter()
                .map(|l| (l.dof, l.slope))
                .chain(ov.iter().map(|l| (l.dof, -l.slope)))
                .collect();
            for &(a, ga) in &grads {
                for &(b, gb) in &grads {
                    out.push(stiff(b, a, len * ga * gb));
                }
            }
        }
    }

    let mu_bar = (mu * mu + 1.0).sqrt();
    let n_ocells = mesh.overlap.n_cells();
    for iface in Interface::BOTH {
        let p = geometry.interface_position(iface, t);
        let n1 = iface.normal_one();
        let cell = geometry.interface_cell(iface, probe);
        let h_k = mesh.background.cell_size(cell);
        let ocell = match iface {
            Interface::Left => 0,
            Interface::Right => n_ocells - 1,
        };
        let (sigma, upwind) = sigma_side(iface, mu);
        // (dof, jump, flux, upwind trace)
        let mut trace: Vec<(usize, f64, f64, f64)> = Vec::with_capacity(4);
        for l in locals(space, geometry, Side::One, cell, p, t).iter() {
            let s = if sigma == Side::One { l.value } else { 0.0 };
            trace.push((l.dof, l.value, n1 * mesh.omega1 * l.slope, s));
        }
        for l in locals(space, geometry, Side::Two, ocell, p, t).iter() {
            let s = if sigma == Side::Two { l.value } else { 0.0 };
            trace.push((l.dof, -l.value, n1 * mesh.omega2() * l.slope, s));
        }
        let penalty = mu_bar * mesh.gamma / h_k;
        for &(a, ja, da, _) in &trace {
            for &(b, jb, db, sb) in &trace {
                let mut v = -(da * jb + db * ja) + penalty * ja * jb;
                if terms.full && mesh.upwind_interface {
                    v += upwind * ja * sb;
                }
                out.push(stiff(b, a, v));
            }
        }
    }
    out
}

/// `(w, v)_{Ω₀}` over a partition, each side in its own representation.
fn mass_entries(geometry: &SlabGeometry, space: &SlabSpace, partition: &SpatialPartition) -> Vec<Entry> {
    let gauss = Rule1D::gauss_legendre3();
    let mut out = Vec::with_capacity(partition.segments.len() * 12);
    for seg in &partition.segments {
        let cell = segment_cell(seg, seg.side);
        for (x, w) in gauss.mapped(seg.a, seg.b) {
            let loc = locals(space, geometry, seg.side, cell, x, partition.t);
            for a in loc.iter() {
                for b in loc.iter() {
                    out.push(stiff(b.dof, a.dof, w * a.value * b.value));
                }
            }
        }
    }
    out
}

/// `A_{h,t}` at time `t` over the spatial degrees of freedom of `space`.
/// At an event time this is the limit from the following panel.
pub fn assemble_aht(geometry: &SlabGeometry, space: &SlabSpace, t: f64) -> DenseMatrix {
    let partition = geometry.spatial_partition(t);
    let entries = spatial_entries(
        geometry,
        space,
        &partition,
        Terms {
            full: false,
            mass: false,
        },
        t,
    );
    let mut m = DenseMatrix::zeros(space.n_spatial());
    for e in entries {
        m.add(e.row, e.col, e.stiff);
    }
    m
}

fn lambdas(space: &SlabSpace, geometry: &SlabGeometry, t: f64) -> [(f64, f64); 2] {
    let mut out = [(0.0, 0.0); 2];
    for (mode, slot) in out.iter_mut().enumerate().take(space.n_modes()) {
        *slot = temporal_basis(space.degree, geometry.t_start, geometry.step(), mode, t);
    }
    out
}

fn scatter(m: &mut DenseMatrix, space: &SlabSpace, lam: &[(f64, f64); 2], weight: f64, entries: &[Entry]) {
    let modes = space.n_modes();
    for e in entries {
        for r in 0..modes {
            for s in 0..modes {
                let v = lam[r].0 * (lam[s].0 * e.stiff + lam[s].1 * e.mass);
                if v != 0.0 {
                    m.add(space.column(e.row, r), space.column(e.col, s), weight * v);
                }
            }
        }
    }
}

/// Assembles the slab system with the default execution strategy.
pub fn assemble_slab(
    geometry: &SlabGeometry,
    space: &SlabSpace,
    problem: &ProblemSpec,
    previous: PreviousTrace<'_>,
) -> Result<SlabSystem> {
    assemble_slab_with(geometry, space, problem, previous, Execution::default())
}

pub fn assemble_slab_with(
    geometry: &SlabGeometry,
    space: &SlabSpace,
    problem: &ProblemSpec,
    previous: PreviousTrace<'_>,
    exec: Execution,
) -> Result<SlabSystem> {
    let mesh = geometry.mesh();
    let n = space.n_columns();
    let (t0, t1) = (geometry.t_start, geometry.t_end);
    let terms = Terms {
        full: true,
        mass: space.degree == TimeDegree::One,
    };

    let lhs_points = composite_time_rule(t0, t1, &geometry.events, &mesh.lhs_time_rule.rule());
    let per_point = map_collect(exec, &lhs_points, |p| {
        let partition = geometry.spatial_partition(p.t);
        spatial_entries(geometry, space, &partition, terms, p.probe)
    });
    let mut matrix = DenseMatrix::zeros(n);
    for (p, entries) in lhs_points.iter().zip(&per_point) {
        scatter(&mut matrix, space, &lambdas(space, geometry, p.t), p.weight, entries);
    }
    let start = geometry.spatial_partition(t0);
    let trace = mass_entries(geometry, space, &start);
    let start_lambdas = lambdas(space, geometry, t0).map(|(l, _)| (l, 0.0));
    scatter(&mut matrix, space, &start_lambdas, 1.0, &trace);

    let rhs = assemble_rhs(geometry, space, problem, previous, &start, exec);

    if let Some(row) = (0..n).find(|&i| matrix.row(i).iter().all(|&v| v == 0.0)) {
        let dofs: Vec<SpatialDof> = space.dofs().to_vec();
        return Err(Error::Assembly {
            slab: geometry.slab,
            reason: format!(
                "row {row} ({:?}) is identically zero; active dofs: {dofs:?}",
                space.dof(row / space.n_modes())
            ),
        });
    }

    let t_mid = 0.5 * (t0 + t1);
    let positions = (0..n)
        .map(|c| match space.dof(c / space.n_modes()) {
            SpatialDof::Background(node) => mesh.background.nodes()[node],
            SpatialDof::Overlap(node) => geometry.left(t_mid) + mesh.overlap.nodes()[node],
        })
        .collect();

    Ok(SlabSystem {
        slab: geometry.slab,
        matrix,
        rhs,
        positions,
    })
}

/// Temporal rule for the source term: midpoint for `q = 0`, three-point
/// Lobatto for `q = 1`, applied per event panel.
pub fn rhs_time_rule(degree: TimeDegree) -> Rule1D {
    match degree {
        TimeDegree::Zero => Rule1D::midpoint(),
        TimeDegree::One => Rule1D::lobatto3(),
    }
}

fn assemble_rhs(
    geometry: &SlabGeometry,
    space: &SlabSpace,
    problem: &ProblemSpec,
    previous: PreviousTrace<'_>,
    start: &SpatialPartition,
    exec: Execution,
) -> Vec<f64> {
    let n = space.n_columns();
    let (t0, t1) = (geometry.t_start, geometry.t_end);
    let mut rhs = vec![0.0; n];

    // source: time quadrature, then the trapezoidal rule on every segment
    let points = composite_time_rule(t0, t1, &geometry.events, &rhs_time_rule(space.degree));
    let per_point = map_collect(exec, &points, |p| {
        let partition = geometry.spatial_partition(p.t);
        let mut local = vec![0.0; space.n_spatial()];
        for seg in &partition.segments {
            let cell = segment_cell(seg, seg.side);
            let half = 0.5 * seg.length();
            for x in [seg.a, seg.b] {
                let f = (problem.source)(x, p.t);
                if f == 0.0 {
                    continue;
                }
                for l in locals(space, geometry, seg.side, cell, x, p.t).iter() {
                    local[l.dof] += half * f * l.value;
                }
            }
        }
        local
    });
    for (p, local) in points.iter().zip(&per_point) {
        let lam = lambdas(space, geometry, p.t);
        for (dof, &v) in local.iter().enumerate() {
            for (r, &(l, _)) in lam.iter().enumerate().take(space.n_modes()) {
                rhs[space.column(dof, r)] += p.weight * l * v;
            }
        }
    }

    // incoming trace tested against v at the slab start
    let gauss = Rule1D::gauss_legendre3();
    let lam0 = lambdas(space, geometry, t0);
    for seg in &start.segments {
        let cell = segment_cell(seg, seg.side);
        for (x, w) in gauss.mapped(seg.a, seg.b) {
            let incoming = match previous {
                PreviousTrace::Initial(u0) => u0(x),
                PreviousTrace::Slab(prev) => prev.eval_side(seg.side, x, t0).value,
            };
            if incoming == 0.0 {
                continue;
            }
            for l in locals(space, geometry, seg.side, cell, x, t0).iter() {
                for (r, &(lr, _)) in lam0.iter().enumerate().take(space.n_modes()) {
                    rhs[space.column(l.dof, r)] += w * incoming * l.value * lr;
                }
            }
        }
    }
    rhs
}

#[cfg(test)]
mod tests;
