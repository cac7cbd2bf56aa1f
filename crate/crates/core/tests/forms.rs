mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stcutfem::assembly::forms::{apply_bh, eval_aht, galerkin_residual, slab_load, FormVariant};
use stcutfem::quadrature::{composite_time_rule, Rule1D};
use stcutfem::{bnorm, breakdown, manufactured_problem, march_on, Execution, TimeDegree, TimeRule};

use common::{random_function, random_mesh, uniform_mesh};

#[test]
fn integration_by_parts_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for config in 0..5 {
        let degree = if config % 2 == 0 { TimeDegree::One } else { TimeDegree::Zero };
        let mesh = random_mesh(&mut rng, degree, TimeRule::Gauss3);
        for _ in 0..10 {
            let w = random_function(&mesh, &mut rng);
            let v = random_function(&mesh, &mut rng);
            let standard = apply_bh(&w, &v, TimeRule::Gauss3, FormVariant::Standard).unwrap();
            let by_parts = apply_bh(&w, &v, TimeRule::Gauss3, FormVariant::IntegratedByParts).unwrap();
            assert!(
                (standard - by_parts).abs() <= 1e-9 * (1.0 + standard.abs()),
                "config {config}: {standard:.15e} vs {by_parts:.15e}"
            );
        }
    }
}

#[test]
fn symmetric_part_of_the_form_is_the_energy() {
    // B(v, v) = ∫ A(v, v) + (Σ‖[v]‖² + ‖v_0⁺‖² + ‖v_N⁻‖² + ∫|n₁μ|[v]²) / 2
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for degree in [TimeDegree::Zero, TimeDegree::One] {
        let mesh = random_mesh(&mut rng, degree, TimeRule::Gauss3);
        let v = random_function(&mesh, &mut rng);
        let b = apply_bh(&v, &v, TimeRule::Gauss3, FormVariant::Standard).unwrap();
        let gauss = Rule1D::gauss_legendre3();
        let a: f64 = v
            .slabs()
            .iter()
            .map(|s| {
                let g = &s.geometry;
                composite_time_rule(g.t_start, g.t_end, &g.events, &gauss)
                    .iter()
                    .map(|p| p.weight * eval_aht(s, s, p.t, p.probe))
                    .sum::<f64>()
            })
            .sum();
        let parts = breakdown(&v);
        let expected = a + 0.5 * (parts.time_jumps + parts.initial_trace + parts.final_trace + parts.upwind);
        assert!((b - expected).abs() <= 1e-9 * b.abs(), "{b} vs {expected}");
    }
}

#[test]
fn discrete_coercivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = f64::INFINITY;
    for &mu in &[-0.6, 0.0, 0.3, 0.6] {
        for &h_inv in &[16, 32] {
            for &n_slabs in &[8, 16] {
                for degree in [TimeDegree::Zero, TimeDegree::One] {
                    let mesh = uniform_mesh(mu, h_inv, n_slabs, 1.0, degree, TimeRule::Gauss3);
                    for _ in 0..7 {
                        let v = random_function(&mesh, &mut rng);
                        let b = apply_bh(&v, &v, TimeRule::Gauss3, FormVariant::Standard).unwrap();
                        let n = bnorm(&v);
                        worst = worst.min(b / (n * n));
                    }
                }
            }
        }
    }
    println!("worst coercivity ratio over 224 samples: {worst:.4}");
    assert!(worst >= 0.01, "coercivity ratio {worst}");
}

#[test]
fn galerkin_orthogonality_of_the_computed_solution() {
    let problem = manufactured_problem().with_final_time(0.25);
    for degree in [TimeDegree::Zero, TimeDegree::One] {
        for mu in [0.0, 0.6] {
            let mesh = {
                let overlap = stcutfem::OverlapSpec::new(0.25, 0.125, stcutfem::Velocity::Constant(mu));
                let disc = stcutfem::Discretization::new(12, 3, 4, degree);
                std::sync::Arc::new(stcutfem::SpaceTimeMesh::new(&problem, &overlap, &disc).unwrap())
            };
            let u = march_on(&mesh, &problem, Execution::Sequential).unwrap();
            let residual = galerkin_residual(&problem, &u).unwrap();
            let problem = &problem;
            let scale = u
                .slabs()
                .iter()
                .flat_map(|s| {
                    (0..s.space.n_columns()).map(move |c| {
                        let mut phi = s.clone();
                        phi.coefficients.iter_mut().enumerate().for_each(|(i, x)| *x = (i == c) as u8 as f64);
                        slab_load(problem, &phi).abs()
                    })
                })
                .fold(1.0, f64::max);
            let worst = residual.iter().flatten().map(|r| r.abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-9 * scale, "q={degree:?} mu={mu}: residual {worst:.3e}");
        }
    }
}

#[test]
fn mismatched_discretizations_are_rejected() {
    let a = uniform_mesh(0.2, 8, 2, 0.2, TimeDegree::Zero, TimeRule::Gauss3);
    let b = uniform_mesh(0.2, 16, 2, 0.2, TimeDegree::Zero, TimeRule::Gauss3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = random_function(&a, &mut rng);
    let v = random_function(&b, &mut rng);
    assert!(apply_bh(&w, &v, TimeRule::Gauss3, FormVariant::Standard).is_err());
}
