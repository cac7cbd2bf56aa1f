//! Energy-type norms of discrete functions and of discretization errors.
//!
//! Every contribution is kept separately in [`NormBreakdown`] so studies can
//! report which part dominates. Integrals use three-point Gauss rules: per
//! event panel in time and per merged segment in space.

use crate::error::Result;
use crate::geometry::{sigma_side, Interface, Side};
use crate::par::{map_range, Execution};
use crate::problem::ExactSolution;
use crate::quadrature::{composite_time_rule, Rule1D};
use crate::spaces::{PointValue, SlabFunction, SpaceTimeSolution};

/// Squared contributions of the norms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormBreakdown {
    /// `∫ Σᵢ ‖∇v‖²_{Ωᵢ(t)} dt`
    pub gradient: f64,
    /// `∫ ‖[∇v]‖²_{Ω_O(t)} dt`
    pub overlap_jump: f64,
    /// `∫ Σ_Γ (h_K ⟨∂ₙv⟩² / |μ̄| + |μ̄| [v]² / h_K) dt`
    pub interface: f64,
    /// `Σ_{n<N} ‖[v]_n‖²` over interior time levels
    pub time_jumps: f64,
    /// `‖v_N⁻‖²`
    pub final_trace: f64,
    /// `‖v_0⁺‖²`
    pub initial_trace: f64,
    /// `∫ Σ_Γ |n₁ μ| [v]² dt`
    pub upwind: f64,
    /// `Σₙ kₙ ∫ ‖D_t v‖² dt`, the extra term of the X-norm
    pub material: f64,
}

impl NormBreakdown {
    /// Squared spatial energy norm integrated in time.
    pub fn energy_sq(&self) -> f64 {
        self.gradient + self.overlap_jump + self.interface
    }

    pub fn b_sq(&self) -> f64 {
        self.energy_sq() + self.time_jumps + self.final_trace + self.initial_trace + self.upwind
    }

    pub fn x_sq(&self) -> f64 {
        self.b_sq() + self.material
    }

    pub fn b(&self) -> f64 {
        self.b_sq().sqrt()
    }

    pub fn x(&self) -> f64 {
        self.x_sq().sqrt()
    }

    fn accumulate(mut self, other: &NormBreakdown) -> Self {
        self.gradient += other.gradient;
        self.overlap_jump += other.overlap_jump;
        self.interface += other.interface;
        self.time_jumps += other.time_jumps;
        self.final_trace += other.final_trace;
        self.initial_trace += other.initial_trace;
        self.upwind += other.upwind;
        self.material += other.material;
        self
    }
}

fn exact_point(exact: &ExactSolution, x: f64, t: f64) -> (f64, f64, f64) {
    ((exact.u)(x, t), (exact.u_x)(x, t), (exact.u_t)(x, t))
}

/// Squared trace distance `‖u(t) - f(t)‖²_{Ω₀}` over the partition of `f`'s slab.
fn trace_error(f: &SlabFunction, other: Option<&SlabFunction>, exact: &ExactSolution, t: f64) -> f64 {
    let gauss = Rule1D::gauss_legendre3();
    let mut total = 0.0;
    for seg in &f.geometry.spatial_partition(t).segments {
        for (x, w) in gauss.mapped(seg.a, seg.b) {
            let reference = match other {
                Some(o) => o.eval_side(seg.side, x, t).value,
                None => (exact.u)(x, t),
            };
            let d = reference - f.eval_side(seg.side, x, t).value;
            total += w * d * d;
        }
    }
    total
}

fn slab_contribution(solution: &SpaceTimeSolution, n: usize, exact: &ExactSolution) -> NormBreakdown {
    let f = solution.slab(n);
    let g = &f.geometry;
    let mesh = g.mesh();
    let mu = g.velocity;
    let mu_bar = (mu * mu + 1.0).sqrt();
    let k = g.step();
    let gauss = Rule1D::gauss_legendre3();
    let mut out = NormBreakdown::default();

    for p in composite_time_rule(g.t_start, g.t_end, &g.events, &gauss) {
        let t = p.t;
        for seg in &g.spatial_partition(t).segments {
            let cell = match seg.side {
                Side::One => seg.background_cell,
                Side::Two => seg.overlap_cell.unwrap(),
            };
            let overlap_domain = seg.side == Side::Two && g.is_cut(seg.background_cell);
            for (x, w) in gauss.mapped(seg.a, seg.b) {
                let (_, ux, ut) = exact_point(exact, x, t);
                let v = f.eval_cell(seg.side, cell, x, t);
                let de = ux - v.dx;
                let material_exact = match seg.side {
                    Side::One => ut,
                    Side::Two => ut + mu * ux,
                };
                let dm = material_exact - v.material;
                out.gradient += p.weight * w * de * de;
                out.material += k * p.weight * w * dm * dm;
                if overlap_domain {
                    let v1 = f.eval_cell(Side::One, seg.background_cell, x, t);
                    let j = v1.dx - v.dx;
                    out.overlap_jump += p.weight * w * j * j;
                }
            }
        }
        for iface in Interface::BOTH {
            let (v1, v2, h_k) = interface_traces(f, iface, t, p.probe);
            let (_, ux, _) = exact_point(exact, g.interface_position(iface, t), t);
            let flux = ux - (mesh.omega1 * v1.dx + mesh.omega2() * v2.dx);
            let jump = v1.value - v2.value;
            out.interface += p.weight * (h_k * flux * flux / mu_bar + mu_bar * jump * jump / h_k);
            let (_, weight) = sigma_side(iface, mu);
            out.upwind += p.weight * weight.abs() * jump * jump;
        }
    }

    if n == 0 {
        out.initial_trace = trace_error(f, None, exact, g.t_start);
    } else {
        // [e]_n = [u_h]_n since u is continuous in time
        out.time_jumps = trace_error(f, Some(solution.slab(n - 1)), exact, g.t_start);
    }
    if n + 1 == solution.n_slabs() {
        out.final_trace = trace_error(f, None, exact, g.t_end);
    }
    out
}

fn interface_traces(f: &SlabFunction, iface: Interface, t: f64, probe: f64) -> (PointValue, PointValue, f64) {
    let g = &f.geometry;
    let mesh = g.mesh();
    let p = g.interface_position(iface, t);
    let cell = g.interface_cell(iface, probe);
    let ocell = match iface {
        Interface::Left => 0,
        Interface::Right => mesh.overlap.n_cells() - 1,
    };
    (
        f.eval_cell(Side::One, cell, p, t),
        f.eval_cell(Side::Two, ocell, p, t),
        mesh.background.cell_size(cell),
    )
}

/// Norm contributions of `u - u_h`.
pub fn error_breakdown(solution: &SpaceTimeSolution, exact: &ExactSolution, exec: Execution) -> NormBreakdown {
    map_range(exec, solution.n_slabs(), |n| slab_contribution(solution, n, exact))
        .iter()
        .fold(NormBreakdown::default(), NormBreakdown::accumulate)
}

/// X-norm of the discretization error.
pub fn xnorm_error(solution: &SpaceTimeSolution, exact: &ExactSolution) -> f64 {
    error_breakdown(solution, exact, Execution::default()).x()
}

/// Norm contributions of the discrete function itself.
pub fn breakdown(solution: &SpaceTimeSolution) -> NormBreakdown {
    error_breakdown(solution, &ExactSolution::zero(), Execution::default())
}

pub fn bnorm(solution: &SpaceTimeSolution) -> f64 {
    breakdown(solution).b()
}

pub fn xnorm(solution: &SpaceTimeSolution) -> f64 {
    breakdown(solution).x()
}

/// Least-squares fit `log e = s log p + c`, returning `(s, c)`.
pub fn lls_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 || points.iter().any(|&(p, e)| !(p > 0.0 && e > 0.0)) {
        return Err(crate::error::Error::invalid(
            "a slope fit needs at least two points with positive values",
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(p, e)| (p.ln(), e.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / m;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
    if sxx == 0.0 {
        return Err(crate::error::Error::invalid("slope fit needs distinct parameters"));
    }
    let s = sxy / sxx;
    Ok((s, my - s * mx))
}

pub fn lls_slope(points: &[(f64, f64)]) -> Result<f64> {
    lls_fit(points).map(|(s, _)| s)
}
