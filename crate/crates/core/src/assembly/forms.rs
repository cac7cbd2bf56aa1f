//! Pointwise evaluation of the space-time bilinear form and load functional
//! for discrete functions, without going through the assembled matrices.
//!
//! This is a second route to the same quantities the slab systems encode;
//! the property tests compare the two and check the integration-by-parts
//! form of the bilinear form against the defining one.

use crate::error::{Error, Result};
use crate::geometry::{sigma_side, Interface, Side, SlabGeometry};
use crate::problem::ProblemSpec;
use crate::quadrature::{composite_time_rule, Rule1D, TimeRule};
use crate::spaces::{PointValue, SlabFunction, SpaceTimeSolution};

use super::rhs_time_rule;

/// Which of the two equivalent expressions of the bilinear form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormVariant {
    /// Time derivative on the trial function, jumps tested against `v⁺`.
    Standard,
    /// Integrated by parts in time: time derivative on the test function,
    /// jumps of the test function against `w⁻`, downwind interface values.
    IntegratedByParts,
}

fn eval_on(f: &SlabFunction, side: Side, segment_cell: usize, x: f64, t: f64) -> PointValue {
    f.eval_cell(side, segment_cell, x, t)
}

/// Side-wise values of `f` at an interface point; the background cell is
/// the one holding the interface at time `probe` of the same panel.
fn interface_values(f: &SlabFunction, iface: Interface, t: f64, probe: f64) -> (PointValue, PointValue) {
    let g = &f.geometry;
    let mesh = g.mesh();
    let p = g.interface_position(iface, t);
    let cell = g.interface_cell(iface, probe);
    let ocell = match iface {
        Interface::Left => 0,
        Interface::Right => mesh.overlap.n_cells() - 1,
    };
    (f.eval_cell(Side::One, cell, p, t), f.eval_cell(Side::Two, ocell, p, t))
}

/// `A_{h,t}(w, v)` at time `t` for two functions of the same slab, with
/// interface cells taken at `probe` (see [`crate::quadrature::TimePoint`]).
pub fn eval_aht(w: &SlabFunction, v: &SlabFunction, t: f64, probe: f64) -> f64 {
    let g = &w.geometry;
    let mesh = g.mesh();
    let gauss = Rule1D::gauss_legendre3();
    let partition = g.spatial_partition(t);
    let mut total = 0.0;
    for seg in &partition.segments {
        let cell = match seg.side {
            Side::One => seg.background_cell,
            Side::Two => seg.overlap_cell.unwrap(),
        };
        let overlap_domain = seg.side == Side::Two && g.is_cut(seg.background_cell);
        for (x, wq) in gauss.mapped(seg.a, seg.b) {
            let wv = eval_on(w, seg.side, cell, x, t);
            let vv = eval_on(v, seg.side, cell, x, t);
            total += wq * wv.dx * vv.dx;
            if overlap_domain {
                let w1 = eval_on(w, Side::One, seg.background_cell, x, t);
                let v1 = eval_on(v, Side::One, seg.background_cell, x, t);
                total += wq * (w1.dx - wv.dx) * (v1.dx - vv.dx);
            }
        }
    }
    let mu = g.velocity;
    let mu_bar = (mu * mu + 1.0).sqrt();
    for iface in Interface::BOTH {
        let n1 = iface.normal_one();
        let h_k = mesh.background.cell_size(g.interface_cell(iface, probe));
        let (w1, w2) = interface_values(w, iface, t, probe);
        let (v1, v2) = interface_values(v, iface, t, probe);
        let (jw, jv) = (w1.value - w2.value, v1.value - v2.value);
        let flux_w = n1 * (mesh.omega1 * w1.dx + mesh.omega2() * w2.dx);
        let flux_v = n1 * (mesh.omega1 * v1.dx + mesh.omega2() * v2.dx);
        total += -flux_w * jv - flux_v * jw + mu_bar * mesh.gamma / h_k * jw * jv;
    }
    total
}

/// `(a, b)_{Ω₀}` at time `t`, where `a` and `b` are evaluated side-wise.
fn trace_product(
    g: &SlabGeometry,
    t: f64,
    a: impl Fn(Side, f64) -> f64,
    b: impl Fn(Side, f64) -> f64,
) -> f64 {
    let gauss = Rule1D::gauss_legendre3();
    g.spatial_partition(t)
        .segments
        .iter()
        .flat_map(|seg| gauss.mapped(seg.a, seg.b).map(move |(x, wq)| (seg.side, x, wq)))
        .map(|(side, x, wq)| wq * a(side, x) * b(side, x))
        .sum()
}

/// Contribution of slab `n` to `B_h(w, v)` where only slab `n` of the test
/// function is used. Summing over all slabs gives the global form.
pub fn slab_bh(
    w: &SpaceTimeSolution,
    n: usize,
    v: &SlabFunction,
    rule: TimeRule,
    variant: FormVariant,
) -> Result<f64> {
    let ws = w.slab(n);
    if v.geometry.slab != n || v.coefficients.len() != ws.coefficients.len() {
        return Err(Error::invalid("test function does not belong to this slab"));
    }
    let g = &ws.geometry;
    let mu = g.velocity;
    let gauss = Rule1D::gauss_legendre3();
    let points = composite_time_rule(g.t_start, g.t_end, &g.events, &rule.rule());
    let mut total = 0.0;
    for p in &points {
        let t = p.t;
        let mut volume = 0.0;
        for seg in &g.spatial_partition(t).segments {
            let cell = match seg.side {
                Side::One => seg.background_cell,
                Side::Two => seg.overlap_cell.unwrap(),
            };
            for (x, wq) in gauss.mapped(seg.a, seg.b) {
                let wv = eval_on(ws, seg.side, cell, x, t);
                let vv = eval_on(v, seg.side, cell, x, t);
                volume += wq
                    * match variant {
                        FormVariant::Standard => wv.dt * vv.value,
                        FormVariant::IntegratedByParts => -wv.value * vv.dt,
                    };
            }
        }
        let mut interface = 0.0;
        for iface in Interface::BOTH {
            let (sigma, weight) = sigma_side(iface, mu);
            if weight == 0.0 {
                continue;
            }
            let (w1, w2) = interface_values(ws, iface, t, p.probe);
            let (v1, v2) = interface_values(v, iface, t, p.probe);
            interface += match variant {
                FormVariant::Standard => {
                    let v_sigma = if sigma == Side::One { v1.value } else { v2.value };
                    weight * (w1.value - w2.value) * v_sigma
                }
                FormVariant::IntegratedByParts => {
                    let w_zeta = if sigma == Side::One { w2.value } else { w1.value };
                    -weight * w_zeta * (v1.value - v2.value)
                }
            };
        }
        total += p.weight * (volume + eval_aht(ws, v, t, p.probe) + interface);
    }

    let prev = n.checked_sub(1).map(|m| w.slab(m));
    match variant {
        FormVariant::Standard => {
            // ([w]_{n-1}, v⁺) with w⁻ = 0 before the first slab
            let t0 = g.t_start;
            total += trace_product(
                g,
                t0,
                |side, x| {
                    let plus = ws.eval_side(side, x, t0).value;
                    let minus = prev.map_or(0.0, |pf| pf.eval_side(side, x, t0).value);
                    plus - minus
                },
                |side, x| v.eval_side(side, x, t0).value,
            );
        }
        FormVariant::IntegratedByParts => {
            let t1 = g.t_end;
            total += trace_product(
                g,
                t1,
                |side, x| ws.eval_side(side, x, t1).value,
                |side, x| v.eval_side(side, x, t1).value,
            );
            if let Some(pf) = prev {
                let t0 = g.t_start;
                total -= trace_product(
                    g,
                    t0,
                    |side, x| pf.eval_side(side, x, t0).value,
                    |side, x| v.eval_side(side, x, t0).value,
                );
            }
        }
    }
    Ok(total)
}

/// Global `B_h(w, v)` evaluated by quadrature with temporal rule `rule`.
pub fn apply_bh(w: &SpaceTimeSolution, v: &SpaceTimeSolution, rule: TimeRule, variant: FormVariant) -> Result<f64> {
    if !w.compatible(v) {
        return Err(Error::invalid("B_h arguments live on different discretizations"));
    }
    let mut total = 0.0;
    for n in 0..w.n_slabs() {
        let vs = v.slab(n);
        if vs.is_zero() {
            continue;
        }
        total += slab_bh(w, n, vs, rule, variant)?;
    }
    Ok(total)
}

/// Load functional of slab `n` tested with `v`, using the same quadrature
/// as the assembled right-hand side.
pub fn slab_load(problem: &ProblemSpec, v: &SlabFunction) -> f64 {
    let g = &v.geometry;
    let points = composite_time_rule(g.t_start, g.t_end, &g.events, &rhs_time_rule(v.space.degree));
    let mut total = 0.0;
    for p in &points {
        let t = p.t;
        for seg in &g.spatial_partition(t).segments {
            let cell = match seg.side {
                Side::One => seg.background_cell,
                Side::Two => seg.overlap_cell.unwrap(),
            };
            for x in [seg.a, seg.b] {
                let vv = v.eval_cell(seg.side, cell, x, t).value;
                total += p.weight * 0.5 * seg.length() * (problem.source)(x, t) * vv;
            }
        }
    }
    if g.slab == 0 {
        let t0 = g.t_start;
        total += trace_product(g, t0, |_, x| (problem.initial)(x), |side, x| v.eval_side(side, x, t0).value);
    }
    total
}

/// `B_h(u_h, φ) - L(φ)` for every basis function `φ` of every slab,
/// evaluated pointwise.
pub fn galerkin_residual(problem: &ProblemSpec, solution: &SpaceTimeSolution) -> Result<Vec<Vec<f64>>> {
    let rule = solution.mesh().lhs_time_rule;
    (0..solution.n_slabs())
        .map(|n| {
            let template = solution.slab(n);
            (0..template.space.n_columns())
                .map(|c| {
                    let mut coefficients = vec![0.0; template.space.n_columns()];
                    coefficients[c] = 1.0;
                    let phi = SlabFunction {
                        geometry: template.geometry.clone(),
                        space: template.space.clone(),
                        coefficients,
                    };
                    Ok(slab_bh(solution, n, &phi, rule, FormVariant::Standard)? - slab_load(problem, &phi))
                })
                .collect()
        })
        .collect()
}
