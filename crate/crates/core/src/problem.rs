//! Problem data, meshes, and discretization parameters.
//!
//! Everything here is immutable once built and cheap to share between
//! threads; the functions carried by [`ProblemSpec`] are `Arc`ed closures.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{Rule1D, TimeRule};

/// Geometric tolerance relative to the background domain length.
pub const GEOMETRY_TOL: f64 = 1e-12;

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type InitialField = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type VelocityField = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Sorted node positions of a 1D mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1d {
    nodes: Vec<f64>,
}

impl Mesh1d {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("a mesh needs at least two nodes"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("mesh nodes must be strictly increasing"));
        }
        Ok(Mesh1d { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell(&self, j: usize) -> (f64, f64) {
        (self.nodes[j], self.nodes[j + 1])
    }

    pub fn cell_size(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn max_cell_size(&self) -> f64 {
        (0..self.n_cells()).map(|j| self.cell_size(j)).fold(0.0, f64::max)
    }

    pub fn min_cell_size(&self) -> f64 {
        (0..self.n_cells())
            .map(|j| self.cell_size(j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the cell containing `x`; points on an interior node belong
    /// to the cell on their right. Points outside are clamped.
    pub fn locate(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&node| node <= x);
        k.saturating_sub(1).min(self.n_cells() - 1)
    }
}

/// `n_cells + 1` equally spaced nodes spanning `interval`.
pub fn make_uniform_mesh(interval: Interval, n_cells: usize) -> Result<Mesh1d> {
    if n_cells == 0 {
        return Err(Error::invalid("a mesh needs at least one cell"));
    }
    let h = interval.length() / n_cells as f64;
    let mut nodes: Vec<f64> = (0..=n_cells)
        .map(|j| interval.lo + j as f64 * h)
        .collect();
    nodes[n_cells] = interval.hi;
    Mesh1d::from_nodes(nodes)
}

/// Exact solution with the derivatives needed by the error norms.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub u_x: ScalarField,
    pub u_t: ScalarField,
}

impl ExactSolution {
    pub fn zero() -> Self {
        let z: ScalarField = Arc::new(|_, _| 0.0);
        ExactSolution {
            u: z.clone(),
            u_x: z.clone(),
            u_t: z,
        }
    }
}

/// Heat equation `u_t - u_xx = f` on `domain x (0, T]` with homogeneous
/// Dirichlet data and initial value `initial`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: Interval,
    pub final_time: f64,
    pub source: ScalarField,
    pub initial: InitialField,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("domain", &self.domain)
            .field("final_time", &self.final_time)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        Interval::new(self.domain.lo, self.domain.hi)?;
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::invalid("final time must be positive"));
        }
        if let Some(exact) = &self.exact {
            let scale = 1.0 + (exact.u)((self.domain.lo + self.domain.hi) / 2.0, 0.0).abs();
            for i in 0..=16 {
                let t = self.final_time * i as f64 / 16.0;
                let left = (exact.u)(self.domain.lo, t);
                let right = (exact.u)(self.domain.hi, t);
                if left.abs() > 1e-10 * scale || right.abs() > 1e-10 * scale {
                    return Err(Error::invalid(format!(
                        "exact solution violates the homogeneous boundary condition at t = {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Zero source and zero initial data; the solution is identically zero.
    pub fn zero(domain: Interval, final_time: f64) -> Self {
        ProblemSpec {
            domain,
            final_time,
            source: Arc::new(|_, _| 0.0),
            initial: Arc::new(|_| 0.0),
            exact: Some(ExactSolution::zero()),
        }
    }

    pub fn with_final_time(mut self, final_time: f64) -> Self {
        self.final_time = final_time;
        self
    }
}

/// `u = sin^2(pi x) exp(-t/2)` on `[0, 1]`, final time 1.
pub fn manufactured_problem() -> ProblemSpec {
    let u: ScalarField = Arc::new(|x, t| (PI * x).sin().powi(2) * (-t / 2.0).exp());
    let u_x: ScalarField = Arc::new(|x, t| PI * (2.0 * PI * x).sin() * (-t / 2.0).exp());
    let u_t: ScalarField = Arc::new(|x, t| -0.5 * (PI * x).sin().powi(2) * (-t / 2.0).exp());
    // u_t - u_xx with u_xx = 2 pi^2 cos(2 pi x) exp(-t/2)
    let source: ScalarField = Arc::new(|x, t| {
        (-t / 2.0).exp() * (-0.5 * (PI * x).sin().powi(2) - 2.0 * PI * PI * (2.0 * PI * x).cos())
    });
    ProblemSpec {
        domain: Interval { lo: 0.0, hi: 1.0 },
        final_time: 1.0,
        source,
        initial: Arc::new(|x| (PI * x).sin().powi(2)),
        exact: Some(ExactSolution { u, u_x, u_t }),
    }
}

#[derive(Clone)]
pub enum Velocity {
    Constant(f64),
    Varying(VelocityField),
}

impl fmt::Debug for Velocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Velocity::Constant(mu) => write!(f, "Constant({mu})"),
            Velocity::Varying(_) => write!(f, "Varying(..)"),
        }
    }
}

impl Velocity {
    /// `amplitude * sin(2 pi t / 3)`, the demonstration motion.
    pub fn sin_demo(amplitude: f64) -> Self {
        Velocity::Varying(Arc::new(move |t| amplitude * (2.0 * PI * t / 3.0).sin()))
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Velocity::Constant(mu) => *mu,
            Velocity::Varying(f) => f(t),
        }
    }
}

/// How the continuous velocity is turned into one constant per slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityMode {
    /// `mu(t_n)` at the end of the slab.
    #[default]
    Endpoint,
    /// Mean of `mu` over the slab.
    SlabAverage,
}

/// The overlapping domain `G = [a(t), a(t) + length]`.
#[derive(Debug, Clone)]
pub struct OverlapSpec {
    pub length: f64,
    pub initial_left: f64,
    pub velocity: Velocity,
    pub mode: VelocityMode,
}

impl OverlapSpec {
    pub fn new(length: f64, initial_left: f64, velocity: Velocity) -> Self {
        OverlapSpec {
            length,
            initial_left,
            velocity,
            mode: VelocityMode::default(),
        }
    }

    pub fn with_mode(mut self, mode: VelocityMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Constant velocity used on the slab `(t_start, t_end]`.
pub fn slab_velocity(spec: &OverlapSpec, t_start: f64, t_end: f64) -> f64 {
    match (&spec.velocity, spec.mode) {
        (Velocity::Constant(mu), _) => *mu,
        (Velocity::Varying(f), VelocityMode::Endpoint) => f(t_end),
        (Velocity::Varying(f), VelocityMode::SlabAverage) => {
            const PANELS: usize = 32;
            let rule = Rule1D::gauss_legendre3();
            let h = (t_end - t_start) / PANELS as f64;
            let sum: f64 = (0..PANELS)
                .map(|p| {
                    let a = t_start + p as f64 * h;
                    rule.integrate(a, a + h, |t| f(t))
                })
                .sum();
            sum / (t_end - t_start)
        }
    }
}

/// Polynomial degree of the time discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDegree {
    Zero,
    One,
}

impl TimeDegree {
    pub fn from_q(q: usize) -> Result<Self> {
        match q {
            0 => Ok(TimeDegree::Zero),
            1 => Ok(TimeDegree::One),
            _ => Err(Error::invalid(format!("temporal degree q = {q} is not supported"))),
        }
    }

    pub fn q(self) -> usize {
        match self {
            TimeDegree::Zero => 0,
            TimeDegree::One => 1,
        }
    }

    pub fn n_modes(self) -> usize {
        self.q() + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub n_background: usize,
    pub n_overlap: usize,
    pub n_slabs: usize,
    pub degree: TimeDegree,
    pub gamma: f64,
    pub omega1: f64,
    /// Temporal rule applied per event panel for the left-hand side.
    pub lhs_time_rule: TimeRule,
    /// Whether the upwind jump term on the space-time interface is
    /// assembled. Switching it off gives an inconsistent scheme for moving
    /// meshes and exists only to demonstrate that.
    pub upwind_interface: bool,
}

impl Discretization {
    pub fn new(n_background: usize, n_overlap: usize, n_slabs: usize, degree: TimeDegree) -> Self {
        Discretization {
            n_background,
            n_overlap,
            n_slabs,
            degree,
            gamma: 10.0,
            omega1: 0.5,
            lhs_time_rule: TimeRule::Lobatto3,
            upwind_interface: true,
        }
    }

    pub fn omega2(&self) -> f64 {
        1.0 - self.omega1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_background == 0 || self.n_overlap == 0 || self.n_slabs == 0 {
            return Err(Error::invalid("cell and slab counts must be positive"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.omega1) {
            return Err(Error::invalid("omega1 must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Slab breakpoints `t_0 < ... < t_N` and the constant velocity per slab.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    breakpoints: Vec<f64>,
    velocities: Vec<f64>,
}

impl TimePartition {
    pub fn new(breakpoints: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || velocities.len() + 1 != breakpoints.len() {
            return Err(Error::invalid("need N + 1 breakpoints and N velocities"));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid("time partition must start at t = 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("time breakpoints must be strictly increasing"));
        }
        if velocities.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("slab velocities must be finite"));
        }
        Ok(TimePartition {
            breakpoints,
            velocities,
        })
    }

    pub fn uniform(final_time: f64, n_slabs: usize, overlap: &OverlapSpec) -> Result<Self> {
        if n_slabs == 0 {
            return Err(Error::invalid("need at least one slab"));
        }
        let k = final_time / n_slabs as f64;
        let mut breakpoints: Vec<f64> = (0..=n_slabs).map(|n| n as f64 * k).collect();
        breakpoints[n_slabs] = final_time;
        let velocities = breakpoints
            .windows(2)
            .map(|w| slab_velocity(overlap, w[0], w[1]))
            .collect();
        TimePartition::new(breakpoints, velocities)
    }

    pub fn n_slabs(&self) -> usize {
        self.velocities.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    /// `(t_start, t_end)` of slab `n` (zero based).
    pub fn slab(&self, n: usize) -> (f64, f64) {
        (self.breakpoints[n], self.breakpoints[n + 1])
    }

    pub fn step(&self, n: usize) -> f64 {
        self.breakpoints[n + 1] - self.breakpoints[n]
    }

    pub fn max_step(&self) -> f64 {
        (0..self.n_slabs()).map(|n| self.step(n)).fold(0.0, f64::max)
    }

    pub fn min_step(&self) -> f64 {
        (0..self.n_slabs())
            .map(|n| self.step(n))
            .fold(f64::INFINITY, f64::min)
    }

    /// Slab whose half-open interval `(t_start, t_end]` contains `t`;
    /// `t = 0` maps to the first slab.
    pub fn slab_of(&self, t: f64) -> Option<usize> {
        let last = *self.breakpoints.last()?;
        if t < 0.0 || t > last {
            return None;
        }
        let k = self.breakpoints.partition_point(|&b| b < t);
        Some(k.saturating_sub(1).min(self.n_slabs() - 1))
    }
}

/// Fully resolved space-time discretization: both meshes, the slab
/// partition, and the piecewise linear trajectory of the overlapping mesh.
#[derive(Debug, Clone)]
pub struct SpaceTimeMesh {
    pub domain: Interval,
    pub background: Mesh1d,
    /// Overlap mesh in coordinates relative to its left end, from 0 to `length`.
    pub overlap: Mesh1d,
    pub partition: TimePartition,
    /// Left end of the overlapping mesh at each breakpoint.
    left_positions: Vec<f64>,
    pub degree: TimeDegree,
    pub gamma: f64,
    pub omega1: f64,
    pub lhs_time_rule: TimeRule,
    pub upwind_interface: bool,
}

impl SpaceTimeMesh {
    pub fn new(problem: &ProblemSpec, overlap: &OverlapSpec, disc: &Discretization) -> Result<Self> {
        problem.validate()?;
        disc.validate()?;
        if !(overlap.length > 0.0) {
            return Err(Error::invalid("overlap length must be positive"));
        }
        let background = make_uniform_mesh(problem.domain, disc.n_background)?;
        let overlap_mesh = make_uniform_mesh(
            Interval {
                lo: 0.0,
                hi: overlap.length,
            },
            disc.n_overlap,
        )?;
        let partition = TimePartition::uniform(problem.final_time, disc.n_slabs, overlap)?;
        Self::from_parts(
            problem.domain,
            background,
            overlap_mesh,
            partition,
            overlap.initial_left,
            disc,
        )
    }

    pub fn from_parts(
        domain: Interval,
        background: Mesh1d,
        overlap: Mesh1d,
        partition: TimePartition,
        initial_left: f64,
        disc: &Discretization,
    ) -> Result<Self> {
        disc.validate()?;
        if overlap.nodes()[0] != 0.0 {
            return Err(Error::invalid("overlap mesh must start at offset 0"));
        }
        if background.nodes()[0] != domain.lo || *background.nodes().last().unwrap() != domain.hi {
            return Err(Error::invalid("background mesh must span the domain"));
        }
        let mut left_positions = Vec::with_capacity(partition.n_slabs() + 1);
        left_positions.push(initial_left);
        for n in 0..partition.n_slabs() {
            let prev = left_positions[n];
            left_positions.push(prev + partition.velocities()[n] * partition.step(n));
        }
        let mesh = SpaceTimeMesh {
            domain,
            background,
            overlap,
            partition,
            left_positions,
            degree: disc.degree,
            gamma: disc.gamma,
            omega1: disc.omega1,
            lhs_time_rule: disc.lhs_time_rule,
            upwind_interface: disc.upwind_interface,
        };
        mesh.check_interior()?;
        Ok(mesh)
    }

    /// Linear motion reaches its extremes at breakpoints, so checking those
    /// covers every `t`.
    fn check_interior(&self) -> Result<()> {
        let margin = GEOMETRY_TOL * self.domain.length();
        for n in 0..self.n_slabs() {
            for &left in &self.left_positions[n..=n + 1] {
                let right = left + self.overlap_length();
                if !(left > self.domain.lo + margin && right < self.domain.hi - margin) {
                    return Err(Error::GeometryViolation {
                        slab: n,
                        reason: format!(
                            "overlapping domain [{left:.6}, {right:.6}] is not strictly inside [{}, {}]",
                            self.domain.lo, self.domain.hi
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn n_slabs(&self) -> usize {
        self.partition.n_slabs()
    }

    pub fn overlap_length(&self) -> f64 {
        *self.overlap.nodes().last().unwrap()
    }

    pub fn velocity(&self, n: usize) -> f64 {
        self.partition.velocities()[n]
    }

    pub fn left_positions(&self) -> &[f64] {
        &self.left_positions
    }

    /// Left end of the overlapping mesh at time `t` within slab `n`.
    pub fn left_at(&self, n: usize, t: f64) -> f64 {
        let (t0, _) = self.partition.slab(n);
        self.left_positions[n] + self.velocity(n) * (t - t0)
    }

    pub fn omega2(&self) -> f64 {
        1.0 - self.omega1
    }

    /// Largest cell size over both meshes.
    pub fn h_max(&self) -> f64 {
        self.background.max_cell_size().max(self.overlap.max_cell_size())
    }

    /// Space-time quasi-uniformity ratios `(h^2 / k_min, k / h_min)`;
    /// both should stay bounded under refinement.
    pub fn quasi_uniformity(&self) -> (f64, f64) {
        let h = self.h_max();
        let h_min = self.background.min_cell_size().min(self.overlap.min_cell_size());
        (h * h / self.partition.min_step(), self.partition.max_step() / h_min)
    }
}
