#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use rand::Rng;
use stcutfem::{
    Discretization, Interval, OverlapSpec, ProblemSpec, SpaceTimeMesh, SpaceTimeSolution, TimeDegree, TimeRule,
    Velocity,
};

/// A small random configuration whose overlapping domain stays well inside
/// the unit interval. Slab velocities vary between slabs.
pub fn random_mesh(rng: &mut impl Rng, degree: TimeDegree, rule: TimeRule) -> Arc<SpaceTimeMesh> {
    let length = rng.gen_range(0.15..0.35);
    let left = rng.gen_range(0.2..(0.8 - length));
    let n_slabs = rng.gen_range(2..5);
    let final_time = rng.gen_range(0.05..0.2);
    let amplitude = rng.gen_range(-0.6..0.6);
    let phase = rng.gen_range(0.0..6.0);
    let velocity = Velocity::Varying(Arc::new(move |t: f64| amplitude * (20.0 * t + phase).cos()));
    let problem = ProblemSpec::zero(Interval::new(0.0, 1.0).unwrap(), final_time);
    let overlap = OverlapSpec::new(length, left, velocity);
    let mut disc = Discretization::new(rng.gen_range(5..14), rng.gen_range(1..5), n_slabs, degree);
    disc.lhs_time_rule = rule;
    Arc::new(SpaceTimeMesh::new(&problem, &overlap, &disc).unwrap())
}

/// Mesh with constant velocity on the unit interval; the overlapping
/// domain starts at 0.125, or at 0.625 when it moves left.
pub fn uniform_mesh(
    mu: f64,
    h_inv: usize,
    n_slabs: usize,
    final_time: f64,
    degree: TimeDegree,
    rule: TimeRule,
) -> Arc<SpaceTimeMesh> {
    let problem = ProblemSpec::zero(Interval::new(0.0, 1.0).unwrap(), final_time);
    let left = if mu < 0.0 { 0.625 } else { 0.125 };
    let overlap = OverlapSpec::new(0.25, left, Velocity::Constant(mu));
    let mut disc = Discretization::new(h_inv, (h_inv / 4).max(1), n_slabs, degree);
    disc.lhs_time_rule = rule;
    Arc::new(SpaceTimeMesh::new(&problem, &overlap, &disc).unwrap())
}

pub fn random_function(mesh: &Arc<SpaceTimeMesh>, rng: &mut impl Rng) -> SpaceTimeSolution {
    SpaceTimeSolution::from_fn(mesh, |_, _, space| {
        (0..space.n_columns()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    })
    .unwrap()
}
