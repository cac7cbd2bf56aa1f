use std::sync::Arc;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::problem::{Discretization, Interval, OverlapSpec, SpaceTimeMesh, Velocity};
use crate::spaces::SpatialDof;

fn setup(mu: f64, degree: TimeDegree) -> (Arc<SpaceTimeMesh>, ProblemSpec) {
    let problem = ProblemSpec::zero(Interval::new(0.0, 1.0).unwrap(), 0.5);
    let overlap = OverlapSpec::new(0.25, 0.3, Velocity::Constant(mu));
    let disc = Discretization::new(8, 3, 4, degree);
    (Arc::new(SpaceTimeMesh::new(&problem, &overlap, &disc).unwrap()), problem)
}

fn slab(mesh: &Arc<SpaceTimeMesh>, n: usize) -> (SlabGeometry, SlabSpace) {
    let g = SlabGeometry::build(mesh, n).unwrap();
    let s = SlabSpace::build(&g);
    (g, s)
}

#[test]
fn aht_is_symmetric_and_nonnegative() {
    let (mesh, _) = setup(0.6, TimeDegree::One);
    let (g, s) = slab(&mesh, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in [g.t_start, 0.5 * (g.t_start + g.t_end), g.t_end] {
        let a = assemble_aht(&g, &s, t);
        for i in 0..a.n() {
            for j in 0..a.n() {
                assert!((a.get(i, j) - a.get(j, i)).abs() <= 1e-12 * a.norm_inf());
            }
        }
        for _ in 0..50 {
            let v: Vec<f64> = (0..a.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(a.bilinear(&v, &v) >= 0.0);
        }
    }
}

#[test]
fn aht_of_conforming_tent_is_dirichlet_energy() {
    // tent with peak 1 at x = 0.75, linear on both sides of the peak; the
    // overlapping domain stays inside (0, 0.75) so both representations
    // agree and all jumps vanish
    let (mesh, _) = setup(0.2, TimeDegree::Zero);
    let (g, s) = slab(&mesh, 0);
    let tent = |x: f64| if x <= 0.75 { x / 0.75 } else { (1.0 - x) / 0.25 };
    let t = 0.5 * (g.t_start + g.t_end);
    let v: Vec<f64> = s
        .dofs()
        .iter()
        .map(|d| match *d {
            SpatialDof::Background(node) => tent(mesh.background.nodes()[node]),
            SpatialDof::Overlap(node) => tent(g.left(t) + mesh.overlap.nodes()[node]),
        })
        .collect();
    let a = assemble_aht(&g, &s, t);
    assert_relative_eq!(a.bilinear(&v, &v), 1.0 / 0.75 + 1.0 / 0.25, max_relative = 1e-12);
}

#[test]
fn zero_data_gives_zero_rhs() {
    let (mesh, problem) = setup(0.6, TimeDegree::One);
    let (g, s) = slab(&mesh, 0);
    let sys = assemble_slab(&g, &s, &problem, PreviousTrace::Initial(&*problem.initial)).unwrap();
    assert!(sys.rhs.iter().all(|&v| v == 0.0));
    assert_eq!(sys.matrix.n(), s.n_columns());
    assert_eq!(s.n_columns(), 2 * s.n_spatial());
    assert_eq!(sys.positions.len(), s.n_columns());
}

#[test]
fn constant_initial_data_tested_against_unit_functions() {
    // testing u0 = 1 with all basis functions of the first mode and summing
    // gives |Ω₀| when the spatial hats form a partition of unity away
    // from the boundary cells; here we only check the total mass budget
    let (mesh, mut problem) = setup(0.0, TimeDegree::Zero);
    problem.initial = Arc::new(|_| 1.0);
    let (g, s) = slab(&mesh, 0);
    let sys = assemble_slab(&g, &s, &problem, PreviousTrace::Initial(&*problem.initial)).unwrap();
    let total: f64 = sys.rhs.iter().sum();
    // boundary cells lose half their mass to the inactive boundary nodes
    let h = mesh.background.cell_size(0);
    assert_relative_eq!(total, 1.0 - h, max_relative = 1e-12);
}

#[test]
fn stationary_dg0_slab_is_mass_plus_k_stiffness() {
    let (mesh, _) = setup(0.0, TimeDegree::Zero);
    let (g, s) = slab(&mesh, 2);
    let problem = ProblemSpec::zero(mesh.domain, 0.5);
    let sys = assemble_slab(&g, &s, &problem, PreviousTrace::Initial(&*problem.initial)).unwrap();
    let a = assemble_aht(&g, &s, g.t_start);
    let k = g.step();
    // mass part: B - k A must be symmetric positive definite
    let mut m = sys.matrix.clone();
    for i in 0..m.n() {
        for j in 0..m.n() {
            m.add(i, j, -k * a.get(i, j));
        }
    }
    for i in 0..m.n() {
        for j in 0..m.n() {
            assert!((m.get(i, j) - m.get(j, i)).abs() < 1e-14);
        }
        assert!(m.get(i, i) > 0.0);
    }
}

#[test]
fn parallel_and_sequential_assembly_agree() {
    let (mesh, _) = setup(0.6, TimeDegree::One);
    let problem = crate::problem::manufactured_problem().with_final_time(0.5);
    let (g, s) = slab(&mesh, 1);
    let u0 = &*problem.initial;
    let a = assemble_slab_with(&g, &s, &problem, PreviousTrace::Initial(u0), Execution::Sequential).unwrap();
    let b = assemble_slab_with(&g, &s, &problem, PreviousTrace::Initial(u0), Execution::Parallel).unwrap();
    assert_eq!(a.matrix, b.matrix);
    assert_eq!(a.rhs, b.rhs);
}
