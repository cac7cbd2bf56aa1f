//! Degrees of freedom of the broken slab space and evaluation of discrete
//! space-time functions.
//!
//! A slab function is `v = v₀` on `Ω₁(t)` and `v = v_G` on `Ω₂(t)`. Both
//! parts are tensor products of P1 hats with a temporal basis that is
//! polynomial along the mesh trajectories: the background hats are fixed,
//! the overlap hats translate with the slab velocity. For `q = 1` the
//! temporal basis is nodal at the two slab endpoints.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Side, SlabGeometry};
use crate::problem::{SpaceTimeMesh, TimeDegree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpatialDof {
    /// Interior node of the background mesh.
    Background(usize),
    /// Node of the overlapping mesh.
    Overlap(usize),
}

/// Temporal basis function `mode` on `[t_start, t_start + k]` and its
/// derivative at `t`.
pub fn temporal_basis(degree: TimeDegree, t_start: f64, k: f64, mode: usize, t: f64) -> (f64, f64) {
    match (degree, mode) {
        (TimeDegree::Zero, _) => (1.0, 0.0),
        (TimeDegree::One, 0) => ((t_start + k - t) / k, -1.0 / k),
        (TimeDegree::One, _) => ((t - t_start) / k, 1.0 / k),
    }
}

/// Values and derivatives of the two P1 shape functions on the cell
/// `[xa, xb]` at `x`: `[(value, slope); 2]` for the left and right node.
#[inline]
pub fn cell_shapes(xa: f64, xb: f64, x: f64) -> [(f64, f64); 2] {
    let h = xb - xa;
    [((xb - x) / h, -1.0 / h), ((x - xa) / h, 1.0 / h)]
}

/// Active degrees of freedom on one slab.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabSpace {
    pub slab: usize,
    pub degree: TimeDegree,
    dofs: Vec<SpatialDof>,
    background_index: Vec<Option<usize>>,
    n_background: usize,
}

impl SlabSpace {
    /// Background nodes are active when a cell of their support meets
    /// `Ω₁(t)` at some time or belongs to the slab's cut set; boundary nodes
    /// never are. All overlap nodes are active. Ordering: background nodes
    /// ascending, then overlap nodes ascending.
    pub fn build(geometry: &SlabGeometry) -> Self {
        let mesh = geometry.mesh();
        let n_cells = mesh.background.n_cells();
        let cell_used = |j: usize| !geometry.is_covered(j) || geometry.is_cut(j);
        let mut background_index = vec![None; n_cells + 1];
        let mut dofs = Vec::new();
        for (node, slot) in background_index.iter_mut().enumerate().take(n_cells).skip(1) {
            if cell_used(node - 1) || cell_used(node) {
                *slot = Some(dofs.len());
                dofs.push(SpatialDof::Background(node));
            }
        }
        let n_background = dofs.len();
        dofs.extend((0..mesh.overlap.n_nodes()).map(SpatialDof::Overlap));
        SlabSpace {
            slab: geometry.slab,
            degree: mesh.degree,
            dofs,
            background_index,
            n_background,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.degree.n_modes()
    }

    pub fn n_spatial(&self) -> usize {
        self.dofs.len()
    }

    pub fn n_columns(&self) -> usize {
        self.dofs.len() * self.n_modes()
    }

    pub fn n_active_background(&self) -> usize {
        self.n_background
    }

    pub fn dofs(&self) -> &[SpatialDof] {
        &self.dofs
    }

    pub fn dof(&self, spatial: usize) -> SpatialDof {
        self.dofs[spatial]
    }

    /// Column of `(spatial dof, temporal mode)`; the mode runs fastest.
    #[inline]
    pub fn column(&self, spatial: usize, mode: usize) -> usize {
        spatial * self.n_modes() + mode
    }

    #[inline]
    pub fn background_dof(&self, node: usize) -> Option<usize> {
        self.background_index.get(node).copied().flatten()
    }

    #[inline]
    pub fn overlap_dof(&self, node: usize) -> usize {
        self.n_background + node
    }
}

/// Basis function value and derivatives at a space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointValue {
    pub value: f64,
    pub dx: f64,
    /// Partial time derivative at fixed `x`.
    pub dt: f64,
    /// Derivative along the mesh trajectories, `dt + mu_i dx`.
    pub material: f64,
}

/// Evaluates the basis function `(spatial, mode)` of `space` at `(x, t)`,
/// extended by zero outside its support.
pub fn eval_basis(
    space: &SlabSpace,
    geometry: &SlabGeometry,
    spatial: usize,
    mode: usize,
    x: f64,
    t: f64,
) -> Result<PointValue> {
    check_time(geometry, t)?;
    let mesh = geometry.mesh();
    let k = geometry.step();
    let (lambda, dlambda) = temporal_basis(space.degree, geometry.t_start, k, mode, t);
    let (nodes, local, velocity, node) = match space.dof(spatial) {
        SpatialDof::Background(node) => (mesh.background.nodes(), x, 0.0, node),
        SpatialDof::Overlap(node) => (mesh.overlap.nodes(), x - geometry.left(t), geometry.velocity, node),
    };
    let (phi, dphi) = hat(nodes, node, local);
    Ok(PointValue {
        value: phi * lambda,
        dx: dphi * lambda,
        dt: phi * dlambda - velocity * dphi * lambda,
        material: phi * dlambda,
    })
}

/// Global hat of `node` at `x`; on a node the slope of the right cell.
fn hat(nodes: &[f64], node: usize, x: f64) -> (f64, f64) {
    if node > 0 && x >= nodes[node - 1] && x < nodes[node] {
        let [_, right] = cell_shapes(nodes[node - 1], nodes[node], x);
        return right;
    }
    if node + 1 < nodes.len() && x >= nodes[node] && x <= nodes[node + 1] {
        let [left, _] = cell_shapes(nodes[node], nodes[node + 1], x);
        return left;
    }
    if node + 1 == nodes.len() && x == nodes[node] {
        return (1.0, 1.0 / (nodes[node] - nodes[node - 1]));
    }
    (0.0, 0.0)
}

fn check_time(geometry: &SlabGeometry, t: f64) -> Result<()> {
    let slack = 1e-12 * geometry.step();
    if t < geometry.t_start - slack || t > geometry.t_end + slack {
        return Err(Error::invalid(format!(
            "time {t} outside slab [{}, {}]",
            geometry.t_start, geometry.t_end
        )));
    }
    Ok(())
}

/// Requested representation for evaluating a discrete function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSide {
    /// `Ω₂` representation inside `G(t)`, background elsewhere.
    Auto,
    Forced(Side),
}

/// One slab of a discrete space-time function.
#[derive(Debug, Clone)]
pub struct SlabFunction {
    pub geometry: SlabGeometry,
    pub space: SlabSpace,
    pub coefficients: Vec<f64>,
}

impl SlabFunction {
    /// Value of the `side` representation at `(x, t)` using background
    /// cell `cell` (for `Side::One`) or overlap cell `cell` (for `Side::Two`).
    pub fn eval_cell(&self, side: Side, cell: usize, x: f64, t: f64) -> PointValue {
        let mesh = self.geometry.mesh();
        let k = self.geometry.step();
        let t0 = self.geometry.t_start;
        let modes = self.space.n_modes();
        let (nodes, local, velocity) = match side {
            Side::One => (mesh.background.nodes(), x, 0.0),
            Side::Two => (mesh.overlap.nodes(), x - self.geometry.left(t), self.geometry.velocity),
        };
        let shapes = cell_shapes(nodes[cell], nodes[cell + 1], local);
        let mut out = PointValue::default();
        for (i, (phi, dphi)) in shapes.into_iter().enumerate() {
            let node = cell + i;
            let spatial = match side {
                Side::One => match self.space.background_dof(node) {
                    Some(s) => s,
                    None => continue,
                },
                Side::Two => self.space.overlap_dof(node),
            };
            for mode in 0..modes {
                let c = self.coefficients[self.space.column(spatial, mode)];
                if c == 0.0 {
                    continue;
                }
                let (lambda, dlambda) = temporal_basis(self.space.degree, t0, k, mode, t);
                out.value += c * phi * lambda;
                out.dx += c * dphi * lambda;
                out.dt += c * (phi * dlambda - velocity * dphi * lambda);
                out.material += c * phi * dlambda;
            }
        }
        out
    }

    /// Evaluates the `side` representation, locating the cell containing `x`.
    pub fn eval_side(&self, side: Side, x: f64, t: f64) -> PointValue {
        let mesh = self.geometry.mesh();
        let cell = match side {
            Side::One => mesh.background.locate(x),
            Side::Two => mesh.overlap.locate(x - self.geometry.left(t)),
        };
        self.eval_cell(side, cell, x, t)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }
}

/// Discrete solution over all slabs.
#[derive(Debug, Clone)]
pub struct SpaceTimeSolution {
    mesh: Arc<SpaceTimeMesh>,
    slabs: Vec<SlabFunction>,
}

impl SpaceTimeSolution {
    pub fn new(mesh: Arc<SpaceTimeMesh>, slabs: Vec<SlabFunction>) -> Result<Self> {
        if slabs.len() != mesh.n_slabs() {
            return Err(Error::invalid("one slab function per slab is required"));
        }
        for (n, s) in slabs.iter().enumerate() {
            if s.geometry.slab != n || s.coefficients.len() != s.space.n_columns() {
                return Err(Error::invalid(format!("slab {n} data is inconsistent")));
            }
        }
        Ok(SpaceTimeSolution { mesh, slabs })
    }

    /// Builds geometries and spaces for every slab and fills coefficients
    /// with `fill(slab, space)`.
    pub fn from_fn(
        mesh: &Arc<SpaceTimeMesh>,
        mut fill: impl FnMut(usize, &SlabGeometry, &SlabSpace) -> Vec<f64>,
    ) -> Result<Self> {
        let slabs = (0..mesh.n_slabs())
            .map(|n| {
                let geometry = SlabGeometry::build(mesh, n)?;
                let space = SlabSpace::build(&geometry);
                let coefficients = fill(n, &geometry, &space);
                Ok(SlabFunction {
                    geometry,
                    space,
                    coefficients,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeSolution::new(Arc::clone(mesh), slabs)
    }

    pub fn zero(mesh: &Arc<SpaceTimeMesh>) -> Result<Self> {
        Self::from_fn(mesh, |_, _, space| vec![0.0; space.n_columns()])
    }

    /// Nodal interpolant of `f` on both meshes; temporal modes take the
    /// values at the slab endpoints (`q = 1`) or at the slab end (`q = 0`).
    /// Background boundary nodes carry no degrees of freedom.
    pub fn interpolate(mesh: &Arc<SpaceTimeMesh>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::from_fn(mesh, |_, geometry, space| {
            let times: Vec<f64> = match space.degree {
                TimeDegree::Zero => vec![geometry.t_end],
                TimeDegree::One => vec![geometry.t_start, geometry.t_end],
            };
            let mut c = vec![0.0; space.n_columns()];
            for (s, dof) in space.dofs().iter().enumerate() {
                for (mode, &t) in times.iter().enumerate() {
                    let x = match *dof {
                        SpatialDof::Background(node) => mesh.background.nodes()[node],
                        SpatialDof::Overlap(node) => geometry.left(t) + mesh.overlap.nodes()[node],
                    };
                    c[space.column(s, mode)] = f(x, t);
                }
            }
            c
        })
    }

    pub fn mesh(&self) -> &Arc<SpaceTimeMesh> {
        &self.mesh
    }

    pub fn n_slabs(&self) -> usize {
        self.slabs.len()
    }

    pub fn slab(&self, n: usize) -> &SlabFunction {
        &self.slabs[n]
    }

    pub fn slabs(&self) -> &[SlabFunction] {
        &self.slabs
    }

    pub fn slabs_mut(&mut self) -> &mut [SlabFunction] {
        &mut self.slabs
    }

    /// Evaluates slab `n`'s polynomial at `(x, t)` with `t` in the closed
    /// slab interval, so `t_start` gives the trace from above and `t_end`
    /// the trace from below.
    pub fn eval_in_slab(&self, n: usize, x: f64, t: f64, side: EvalSide) -> Result<PointValue> {
        let slab = self.slabs.get(n).ok_or_else(|| Error::invalid(format!("no slab {n}")))?;
        check_time(&slab.geometry, t)?;
        let domain = self.mesh.domain;
        if x < domain.lo || x > domain.hi {
            return Err(Error::invalid(format!("x = {x} outside the domain")));
        }
        let g = &slab.geometry;
        let side = match side {
            EvalSide::Auto => {
                if g.in_overlap(x, t) {
                    Side::Two
                } else {
                    Side::One
                }
            }
            EvalSide::Forced(Side::Two) => {
                let tol = g.tolerance();
                if x < g.left(t) - tol || x > g.right(t) + tol {
                    return Err(Error::invalid(format!(
                        "x = {x} is outside the overlapping domain at t = {t}"
                    )));
                }
                Side::Two
            }
            EvalSide::Forced(Side::One) => Side::One,
        };
        Ok(slab.eval_side(side, x, t))
    }

    /// Evaluates at `t ∈ [0, T]`, using the slab whose interval `(t_{n-1}, t_n]`
    /// contains `t` (the first slab for `t = 0`).
    pub fn eval(&self, x: f64, t: f64, side: EvalSide) -> Result<PointValue> {
        let n = self
            .mesh
            .partition
            .slab_of(t)
            .ok_or_else(|| Error::invalid(format!("t = {t} outside [0, T]")))?;
        self.eval_in_slab(n, x, t, side)
    }

    /// Whether two solutions live on the same discretization.
    pub fn compatible(&self, other: &SpaceTimeSolution) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
            || (self.mesh.partition == other.mesh.partition
                && self.mesh.background == other.mesh.background
                && self.mesh.overlap == other.mesh.overlap
                && self.mesh.left_positions() == other.mesh.left_positions()
                && self.mesh.degree == other.mesh.degree)
    }

    /// `alpha * self + beta * other` on the same discretization.
    pub fn linear_combination(&self, alpha: f64, other: &SpaceTimeSolution, beta: f64) -> Result<Self> {
        if !self.compatible(other) {
            return Err(Error::invalid("solutions live on different discretizations"));
        }
        let slabs = self
            .slabs
            .iter()
            .zip(&other.slabs)
            .map(|(a, b)| SlabFunction {
                geometry: a.geometry.clone(),
                space: a.space.clone(),
                coefficients: a
                    .coefficients
                    .iter()
                    .zip(&b.coefficients)
                    .map(|(x, y)| alpha * x + beta * y)
                    .collect(),
            })
            .collect();
        Ok(SpaceTimeSolution {
            mesh: Arc::clone(&self.mesh),
            slabs,
        })
    }
}
