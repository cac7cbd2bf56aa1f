//! Cut geometry of one space-time slab.
//!
//! The overlapping domain `G(t) = [a(t), a(t) + L]` moves with constant
//! velocity inside a slab. `Ω₂(t)` is the open interval `G(t)`, `Ω₁(t)` the
//! rest of the background domain. Within a slab the only combinatorial
//! changes of the cut configuration happen when an interface passes a
//! background node; those times are the slab's events.

use std::sync::Arc;

use crate::error::Result;
use crate::problem::{SpaceTimeMesh, GEOMETRY_TOL};

/// Which representation a point or segment belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `Ω₁`, described by the background mesh.
    One,
    /// `Ω₂`, described by the overlapping mesh.
    Two,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interface {
    Left,
    Right,
}

impl Interface {
    pub const BOTH: [Interface; 2] = [Interface::Left, Interface::Right];

    /// Outward unit normal of `Ω₁` at this interface.
    pub fn normal_one(self) -> f64 {
        match self {
            Interface::Left => 1.0,
            Interface::Right => -1.0,
        }
    }
}

/// Space-time unit normal `(n, -n mu) / sqrt((n mu)^2 + 1)` of the interface
/// surface for spatial normal `n = ±1`.
pub fn spacetime_normal(normal: f64, velocity: f64) -> (f64, f64) {
    let nm = normal * velocity;
    let scale = 1.0 / (nm * nm + 1.0).sqrt();
    (normal * scale, -nm * scale)
}

/// Upwind side `σ` and signed weight `n₁ mu` of the space-time jump term at
/// `interface`.
///
/// `σ` is the subdomain that occupies the interface point just after the
/// current time. The space-time jump term over one interface trajectory
/// reduces to `∫ n₁ mu [w] v_σ dt`. For `mu = 0` the weight vanishes and
/// `σ` is reported as [`Side::One`].
pub fn sigma_side(interface: Interface, velocity: f64) -> (Side, f64) {
    let n1 = interface.normal_one();
    let (_, nt) = spacetime_normal(n1, velocity);
    let sigma = if nt > 0.0 { Side::Two } else { Side::One };
    (sigma, n1 * velocity)
}

/// A piece of the background domain on which both meshes are polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub side: Side,
    pub background_cell: usize,
    /// Overlap cell covering the segment, for segments inside `G(t)`.
    pub overlap_cell: Option<usize>,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// `Ω₀ = Ω₁(t) ∪ Γ(t) ∪ Ω₂(t)` split at every node of both meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialPartition {
    pub t: f64,
    pub segments: Vec<Segment>,
}

impl SpatialPartition {
    pub fn measure(&self, side: Side) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.side == side)
            .map(Segment::length)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct SlabGeometry {
    mesh: Arc<SpaceTimeMesh>,
    pub slab: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub velocity: f64,
    left_start: f64,
    /// Sorted interior times at which an interface sits on a background node.
    pub events: Vec<f64>,
    cut: Vec<bool>,
    covered: Vec<bool>,
}

impl SlabGeometry {
    pub fn build(mesh: &Arc<SpaceTimeMesh>, slab: usize) -> Result<Self> {
        let (t_start, t_end) = mesh.partition.slab(slab);
        let velocity = mesh.velocity(slab);
        let left_start = mesh.left_positions()[slab];
        let length = mesh.overlap_length();
        let tol = GEOMETRY_TOL * mesh.domain.length();
        let k = t_end - t_start;
        let nodes = mesh.background.nodes();
        let n_cells = mesh.background.n_cells();

        let mut events = Vec::new();
        let mut cut = vec![false; n_cells];
        for offset in [0.0, length] {
            let p0 = left_start + offset;
            let p1 = p0 + velocity * k;
            let (lo, hi) = (p0.min(p1), p0.max(p1));
            if hi - lo <= tol {
                // stationary interface: only the cell holding it in its interior
                let j = mesh.background.locate(p0);
                let (xa, xb) = mesh.background.cell(j);
                if p0 > xa + tol && p0 < xb - tol {
                    cut[j] = true;
                }
                continue;
            }
            for j in 0..n_cells {
                let (xa, xb) = mesh.background.cell(j);
                if xa < hi - tol && xb > lo + tol {
                    cut[j] = true;
                }
            }
            let event_tol = 1e-14 * k;
            for &x in nodes {
                if x > lo && x < hi {
                    let tau = t_start + (x - p0) / velocity;
                    if tau > t_start + event_tol && tau < t_end - event_tol {
                        events.push(tau);
                    }
                }
            }
        }
        events.sort_by(f64::total_cmp);
        events.dedup_by(|b, a| (*b - *a).abs() <= 1e-14 * k);

        let left_end = left_start + velocity * k;
        let covered = (0..n_cells)
            .map(|j| {
                let (xa, xb) = mesh.background.cell(j);
                [left_start, left_end]
                    .iter()
                    .all(|&a| xa >= a - tol && xb <= a + length + tol)
            })
            .collect();

        Ok(SlabGeometry {
            mesh: Arc::clone(mesh),
            slab,
            t_start,
            t_end,
            velocity,
            left_start,
            events,
            cut,
            covered,
        })
    }

    pub fn mesh(&self) -> &Arc<SpaceTimeMesh> {
        &self.mesh
    }

    pub fn step(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Translation of the overlapping mesh since the start of the slab.
    pub fn shift(&self, t: f64) -> f64 {
        self.velocity * (t - self.t_start)
    }

    pub fn left(&self, t: f64) -> f64 {
        self.left_start + self.shift(t)
    }

    pub fn right(&self, t: f64) -> f64 {
        self.left(t) + self.mesh.overlap_length()
    }

    pub fn interface_position(&self, interface: Interface, t: f64) -> f64 {
        match interface {
            Interface::Left => self.left(t),
            Interface::Right => self.right(t),
        }
    }

    /// Background cells cut by the interface at some time in the slab.
    pub fn cut_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cut.iter().enumerate().filter(|(_, &c)| c).map(|(j, _)| j)
    }

    pub fn is_cut(&self, cell: usize) -> bool {
        self.cut[cell]
    }

    /// Background cells inside `G(t)` for the whole slab.
    pub fn covered_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.covered
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(j, _)| j)
    }

    pub fn is_covered(&self, cell: usize) -> bool {
        self.covered[cell]
    }

    pub fn tolerance(&self) -> f64 {
        GEOMETRY_TOL * self.mesh.domain.length()
    }

    /// Positions of the overlapping mesh nodes at time `t`.
    pub fn overlap_nodes(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        let left = self.left(t);
        self.mesh.overlap.nodes().iter().map(move |&y| left + y)
    }

    /// Whether `x` lies in the open overlapping domain at time `t`.
    pub fn in_overlap(&self, x: f64, t: f64) -> bool {
        x > self.left(t) && x < self.right(t)
    }

    /// Background cell on the `Ω₁` side of `interface` at time `t`.
    pub fn interface_cell(&self, interface: Interface, t: f64) -> usize {
        let p = self.interface_position(interface, t);
        let delta = 2.0 * self.tolerance();
        self.mesh
            .background
            .locate(p - interface.normal_one() * delta)
    }

    pub fn spatial_partition(&self, t: f64) -> SpatialPartition {
        let tol = self.tolerance();
        let background = self.mesh.background.nodes();
        let left = self.left(t);
        let overlap: Vec<f64> = self.overlap_nodes(t).collect();
        let right = *overlap.last().unwrap();

        // merge both node sets, collapsing near-coincident points
        let mut points: Vec<f64> = Vec::with_capacity(background.len() + overlap.len());
        let (mut i, mut j) = (0, 0);
        while i < background.len() || j < overlap.len() {
            let next = if j >= overlap.len() || (i < background.len() && background[i] <= overlap[j]) {
                i += 1;
                background[i - 1]
            } else {
                j += 1;
                overlap[j - 1]
            };
            match points.last() {
                Some(&last) if next - last <= tol => {}
                _ => points.push(next),
            }
        }

        let mut segments = Vec::with_capacity(points.len());
        let mut cell = 0;
        let mut ocell = 0;
        let n_cells = self.mesh.background.n_cells();
        let n_ocells = overlap.len() - 1;
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            while cell + 1 < n_cells && background[cell + 1] <= mid {
                cell += 1;
            }
            let inside = mid > left && mid < right;
            let overlap_cell = if inside {
                while ocell + 1 < n_ocells && overlap[ocell + 1] <= mid {
                    ocell += 1;
                }
                Some(ocell)
            } else {
                None
            };
            segments.push(Segment {
                a,
                b,
                side: if inside { Side::Two } else { Side::One },
                background_cell: cell,
                overlap_cell,
            });
        }
        SpatialPartition { t, segments }
    }

    /// Segments of `Ω_O(t)`: cut cells intersected with `Ω₂(t)`.
    pub fn overlap_segments(&self, t: f64) -> Vec<Segment> {
        self.overlap_segments_of(&self.spatial_partition(t))
    }

    pub fn overlap_segments_of(&self, partition: &SpatialPartition) -> Vec<Segment> {
        partition
            .segments
            .iter()
            .filter(|s| s.side == Side::Two && self.cut[s.background_cell])
            .copied()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{
        make_uniform_mesh, Discretization, Interval, TimeDegree, TimePartition,
    };
    use approx::assert_abs_diff_eq;

    fn mesh(n0: usize, ng: usize, left: f64, length: f64, mu: f64, k: f64) -> Arc<SpaceTimeMesh> {
        let domain = Interval::new(0.0, 1.0).unwrap();
        let bg = make_uniform_mesh(domain, n0).unwrap();
        let ov = make_uniform_mesh(Interval::new(0.0, length).unwrap(), ng).unwrap();
        let tp = TimePartition::new(vec![0.0, k], vec![mu]).unwrap();
        let disc = Discretization::new(n0, ng, 1, TimeDegree::Zero);
        Arc::new(SpaceTimeMesh::from_parts(domain, bg, ov, tp, left, &disc).unwrap())
    }

    #[test]
    fn no_event_inside_a_cell() {
        // left interface 0.125 -> 0.185
        let m = mesh(10, 4, 0.125, 0.25, 0.6, 0.1);
        let g = SlabGeometry::build(&m, 0).unwrap();
        // right interface 0.375 -> 0.435 crosses 0.4
        assert_eq!(g.events.len(), 1);
        assert_abs_diff_eq!(g.events[0], 0.025 / 0.6, epsilon = 1e-14);
    }

    #[test]
    fn event_when_interface_reaches_node() {
        let m = mesh(10, 4, 0.125, 0.25, 0.6, 0.15);
        let g = SlabGeometry::build(&m, 0).unwrap();
        // left hits 0.2 at 0.125; right hits 0.4 at 0.041666
        assert_eq!(g.events.len(), 2);
        assert_abs_diff_eq!(g.events[1], 0.125, epsilon = 1e-14);
        let p = g.left(g.events[1]);
        assert_abs_diff_eq!(p, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn stationary_interfaces_have_no_events() {
        for n0 in [3, 10, 37] {
            let m = mesh(n0, 3, 0.3, 0.25, 0.0, 0.2);
            let g = SlabGeometry::build(&m, 0).unwrap();
            assert!(g.events.is_empty());
        }
    }

    #[test]
    fn partition_example() {
        let m = mesh(4, 2, 0.125, 0.25, 0.0, 0.1);
        let g = SlabGeometry::build(&m, 0).unwrap();
        let p = g.spatial_partition(0.05);
        let bounds: Vec<(f64, f64, Side)> = p.segments.iter().map(|s| (s.a, s.b, s.side)).collect();
        assert_eq!(
            bounds,
            vec![
                (0.0, 0.125, Side::One),
                (0.125, 0.25, Side::Two),
                (0.25, 0.375, Side::Two),
                (0.375, 0.5, Side::One),
                (0.5, 0.75, Side::One),
                (0.75, 1.0, Side::One),
            ]
        );
        assert_eq!(p.segments[1].overlap_cell, Some(0));
        assert_eq!(p.segments[2].overlap_cell, Some(1));
        assert_eq!(p.segments[2].background_cell, 1);
        assert_abs_diff_eq!(p.measure(Side::Two), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn aligned_overlap_cuts_nothing() {
        let m = mesh(4, 1, 0.25, 0.25, 0.0, 0.1);
        let g = SlabGeometry::build(&m, 0).unwrap();
        assert_eq!(g.cut_cells().count(), 0);
        assert_eq!(g.covered_cells().collect::<Vec<_>>(), vec![1]);
        assert!(g.overlap_segments(0.05).is_empty());
    }

    #[test]
    fn overlap_domain_stationary() {
        let m = mesh(10, 5, 0.125, 0.25, 0.0, 0.1);
        let g = SlabGeometry::build(&m, 0).unwrap();
        assert_eq!(g.cut_cells().collect::<Vec<_>>(), vec![1, 3]);
        let total: f64 = g.overlap_segments(0.03).iter().map(Segment::length).sum();
        // (0.125, 0.2) and (0.3, 0.375)
        assert_abs_diff_eq!(total, 0.15, epsilon = 1e-12);
    }

    #[test]
    fn overlap_domain_keeps_swept_cells() {
        // left interface 0.15 -> 0.27 sweeps cell [0.1, 0.2] and into [0.2, 0.3]
        let m = mesh(10, 5, 0.15, 0.25, 0.6, 0.2);
        let g = SlabGeometry::build(&m, 0).unwrap();
        assert!(g.is_cut(1) && g.is_cut(2));
        let t = 0.15; // left at 0.24
        let segs = g.overlap_segments(t);
        let in_cell1: f64 = segs
            .iter()
            .filter(|s| s.background_cell == 1)
            .map(Segment::length)
            .sum();
        // cell 1 is in Ω₁ entirely now
        assert_abs_diff_eq!(in_cell1, 0.0, epsilon = 1e-12);
        let in_cell2: f64 = segs
            .iter()
            .filter(|s| s.background_cell == 2)
            .map(Segment::length)
            .sum();
        assert_abs_diff_eq!(in_cell2, 0.3 - 0.24, epsilon = 1e-12);

        // left interface 0.27 -> 0.39
        let m = mesh(10, 5, 0.27, 0.25, 0.6, 0.2);
        let g = SlabGeometry::build(&m, 0).unwrap();
        assert!(g.is_cut(2) && g.is_cut(3));
        let later = g.overlap_segments(0.2);
        let c3: f64 = later.iter().filter(|s| s.background_cell == 3).map(Segment::length).sum();
        assert_abs_diff_eq!(c3, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn fully_covered_cell_after_crossing_contributes() {
        // left interface 0.2 -> 0.32, right 0.45 -> 0.57; cell [0.4, 0.5] is cut
        // early and fully covered afterwards
        let m = mesh(10, 5, 0.2, 0.25, 0.6, 0.2);
        let g = SlabGeometry::build(&m, 0).unwrap();
        assert!(g.is_cut(4));
        let t = 0.15; // right interface at 0.54
        let c4: f64 = g
            .overlap_segments(t)
            .iter()
            .filter(|s| s.background_cell == 4)
            .map(Segment::length)
            .sum();
        assert_abs_diff_eq!(c4, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn uncut_covered_cells_are_excluded_from_overlap_domain() {
        let m = mesh(20, 4, 0.15, 0.2, 0.0, 0.1);
        let g = SlabGeometry::build(&m, 0).unwrap();
        assert_eq!(g.cut_cells().count(), 0);
        assert!(g.overlap_segments(0.05).is_empty());
        assert_eq!(g.covered_cells().collect::<Vec<_>>(), vec![3, 4, 5, 6]);
    }

    #[test]
    fn spacetime_normals() {
        assert_eq!(spacetime_normal(1.0, 0.0), (1.0, 0.0));
        let (x, t) = spacetime_normal(1.0, 0.6);
        assert_abs_diff_eq!(x, 0.857493, epsilon = 1e-6);
        assert_abs_diff_eq!(t, -0.514496, epsilon = 1e-6);
        assert_abs_diff_eq!(x * x + t * t, 1.0, epsilon = 1e-15);
        let (x, t) = spacetime_normal(-1.0, 0.6);
        assert_abs_diff_eq!(x, -0.857493, epsilon = 1e-6);
        assert_abs_diff_eq!(t, 0.514496, epsilon = 1e-6);
    }

    #[test]
    fn upwind_sides() {
        assert_eq!(sigma_side(Interface::Right, 0.6), (Side::Two, -0.6));
        assert_eq!(sigma_side(Interface::Left, 0.6), (Side::One, 0.6));
        assert_eq!(sigma_side(Interface::Left, -0.6), (Side::Two, -0.6));
        assert_eq!(sigma_side(Interface::Right, -0.6), (Side::One, 0.6));
        assert_eq!(sigma_side(Interface::Left, 0.0).1, 0.0);
    }

    #[test]
    fn upwind_side_is_occupant_after_time() {
        for mu in [-0.7, -0.2, 0.3, 0.6] {
            let m = mesh(10, 5, 0.4, 0.25, mu, 0.1);
            let g = SlabGeometry::build(&m, 0).unwrap();
            for iface in Interface::BOTH {
                let t = 0.05;
                let x = g.interface_position(iface, t);
                let later = t + 1e-6;
                let occupant = if g.in_overlap(x, later) { Side::Two } else { Side::One };
                assert_eq!(sigma_side(iface, mu).0, occupant, "mu={mu} {iface:?}");
            }
        }
    }

    #[test]
    fn interface_cell_is_on_side_one() {
        let m = mesh(4, 1, 0.25, 0.25, 0.0, 0.1);
        let g = SlabGeometry::build(&m, 0).unwrap();
        assert_eq!(g.interface_cell(Interface::Left, 0.0), 0);
        assert_eq!(g.interface_cell(Interface::Right, 0.0), 2);
    }
}
