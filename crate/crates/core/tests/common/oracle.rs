//! Brute-force evaluation of the slab matrix on a tiny instance: three
//! background cells, one overlap cell, one slab. Every term is integrated
//! from explicit piecewise formulas with a high-order Gauss rule, without
//! touching the crate's geometry or quadrature code.

use std::sync::Arc;

use stcutfem::assembly::assemble_slab;
use stcutfem::spaces::SpatialDof;
use stcutfem::{
    Discretization, Interval, OverlapSpec, PreviousTrace, ProblemSpec, SlabGeometry, SlabSpace, SpaceTimeMesh,
    TimeDegree, TimeRule, Velocity,
};

const BG: [f64; 4] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
const LEN: f64 = 0.2;
const LEFT0: f64 = 0.42;
const K: f64 = 0.1;
const GAMMA: f64 = 10.0;
const OMEGA1: f64 = 0.5;

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn integrate(a: f64, b: f64, rule: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    rule.iter().map(|&(s, w)| (b - a) * w * f(a + (b - a) * s)).sum()
}

/// Hat of `node` over `nodes`, evaluated off the nodes; `(value, slope)`.
fn hat(nodes: &[f64], node: usize, x: f64) -> (f64, f64) {
    if node > 0 && x > nodes[node - 1] && x <= nodes[node] {
        let h = nodes[node] - nodes[node - 1];
        return ((x - nodes[node - 1]) / h, 1.0 / h);
    }
    if node + 1 < nodes.len() && x > nodes[node] && x < nodes[node + 1] {
        let h = nodes[node + 1] - nodes[node];
        return ((nodes[node + 1] - x) / h, -1.0 / h);
    }
    (0.0, 0.0)
}

#[derive(Clone, Copy)]
struct Basis {
    background: bool,
    node: usize,
    mode: usize,
}

struct Tiny {
    mu: f64,
    q: usize,
}

impl Tiny {
    fn left(&self, t: f64) -> f64 {
        LEFT0 + self.mu * t
    }

    fn inside(&self, x: f64, t: f64) -> bool {
        x > self.left(t) && x < self.left(t) + LEN
    }

    fn lambda(&self, mode: usize, t: f64) -> (f64, f64) {
        match (self.q, mode) {
            (0, _) => (1.0, 0.0),
            (_, 0) => ((K - t) / K, -1.0 / K),
            _ => (t / K, 1.0 / K),
        }
    }

    /// `(value, dx, dt)` of a basis function in its own representation.
    fn eval(&self, b: Basis, x: f64, t: f64) -> (f64, f64, f64) {
        let (l, dl) = self.lambda(b.mode, t);
        if b.background {
            let (p, dp) = hat(&BG, b.node, x);
            (p * l, dp * l, p * dl)
        } else {
            let (p, dp) = hat(&[0.0, LEN], b.node, x - self.left(t));
            (p * l, dp * l, p * dl - self.mu * dp * l)
        }
    }

    /// Side-restricted evaluation: zero if the function belongs to the other side.
    fn eval_side(&self, b: Basis, two: bool, x: f64, t: f64) -> (f64, f64, f64) {
        if b.background == two {
            (0.0, 0.0, 0.0)
        } else {
            self.eval(b, x, t)
        }
    }

    fn breakpoints(&self, t: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = BG.to_vec();
        pts.push(self.left(t));
        pts.push(self.left(t) + LEN);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        pts
    }

    fn cut(&self, cell: usize) -> bool {
        let (a, b) = (BG[cell], BG[cell + 1]);
        [0.0, LEN].iter().any(|off| {
            let p0 = LEFT0 + off;
            let p1 = p0 + self.mu * K;
            let (lo, hi) = (p0.min(p1), p0.max(p1));
            if hi > lo {
                lo.max(a) < hi.min(b)
            } else {
                a < lo && lo < b
            }
        })
    }

    fn events(&self) -> Vec<f64> {
        let mut ev = vec![0.0, K];
        if self.mu != 0.0 {
            for off in [0.0, LEN] {
                for &x in &BG {
                    let t = (x - LEFT0 - off) / self.mu;
                    if t > 1e-12 && t < K - 1e-12 {
                        ev.push(t);
                    }
                }
            }
        }
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn entry(&self, row: Basis, col: Basis) -> f64 {
        let rule = gauss_legendre(8);
        let mu_bar = (self.mu * self.mu + 1.0).sqrt();
        let at_time = |t: f64| -> f64 {
            let mut total = 0.0;
            let pts = self.breakpoints(t);
            for w in pts.windows(2) {
                let (a, b) = (w[0], w[1]);
                let two = self.inside(0.5 * (a + b), t);
                let cell = BG.windows(2).position(|c| c[0] <= 0.5 * (a + b) && 0.5 * (a + b) < c[1]).unwrap();
                total += integrate(a, b, &rule, |x| {
                    let (_, wx, wt) = self.eval_side(col, two, x, t);
                    let (v, vx, _) = self.eval_side(row, two, x, t);
                    let mut s = wt * v + wx * vx;
                    if two && self.cut(cell) {
                        // background polynomial of the cut cell against the overlap one
                        let jw = if col.background { self.eval(col, x, t).1 } else { -wx };
                        let jv = if row.background { self.eval(row, x, t).1 } else { -vx };
                        s += jw * jv;
                    }
                    s
                });
            }
            for (n1, p) in [(1.0, self.left(t)), (-1.0, self.left(t) + LEN)] {
                // side-wise traces: Ω₁ lies at p - n1 ε, Ω₂ at p + n1 ε
                let eps = 1e-9;
                let outside = p - n1 * eps;
                let inside = p + n1 * eps;
                // (value on Ω₁, slope on Ω₁, value on Ω₂, slope on Ω₂); values
                // are continuous in x so they are taken at p itself
                let trace = |b: Basis| -> (f64, f64, f64, f64) {
                    if b.background {
                        (self.eval(b, p, t).0, self.eval(b, outside, t).1, 0.0, 0.0)
                    } else {
                        (0.0, 0.0, self.overlap_value(b, p, t), self.eval(b, inside, t).1)
                    }
                };
                let (w1, w1x, w2, w2x) = trace(col);
                let (v1, v1x, v2, v2x) = trace(row);
                let cell = BG.windows(2).position(|c| c[0] < outside && outside < c[1]).unwrap();
                let h = BG[cell + 1] - BG[cell];
                let (jw, jv) = (w1 - w2, v1 - v2);
                let fw = n1 * (OMEGA1 * w1x + (1.0 - OMEGA1) * w2x);
                let fv = n1 * (OMEGA1 * v1x + (1.0 - OMEGA1) * v2x);
                total += -fw * jv - fv * jw + mu_bar * GAMMA / h * jw * jv;
                // upwind value: the side that holds p just after t
                let after_two = self.inside(p, t + 1e-9);
                let v_sigma = if after_two { v2 } else { v1 };
                total += n1 * self.mu * jw * v_sigma;
            }
            total
        };
        let ev = self.events();
        let mut total = 0.0;
        for w in ev.windows(2) {
            total += integrate(w[0], w[1], &rule, at_time);
        }
        // (w⁺, v⁺) at the slab start
        let pts = self.breakpoints(0.0);
        for w in pts.windows(2) {
            let two = self.inside(0.5 * (w[0] + w[1]), 0.0);
            total += integrate(w[0], w[1], &rule, |x| {
                self.eval_side(col, two, x, 0.0).0 * self.eval_side(row, two, x, 0.0).0
            });
        }
        total
    }

    /// Overlap basis value at an interface point, taking the limit from inside G.
    fn overlap_value(&self, b: Basis, p: f64, t: f64) -> f64 {
        let (l, _) = self.lambda(b.mode, t);
        let s = (p - self.left(t)) / LEN;
        let phi = if b.node == 0 { 1.0 - s } else { s };
        phi * l
    }
}

/// Largest entry mismatch between the assembled slab matrix and the
/// brute-force integrals, relative to the largest assembled entry.
pub fn mismatch(q: usize, mu: f64, rule: TimeRule) -> f64 {

    let problem = ProblemSpec::zero(Interval::new(0.0, 1.0).unwrap(), K);
    let overlap = OverlapSpec::new(LEN, LEFT0, Velocity::Constant(mu));
    let mut disc = Discretization::new(3, 1, 1, TimeDegree::from_q(q).unwrap());
    disc.lhs_time_rule = rule;
    let mesh = Arc::new(SpaceTimeMesh::new(&problem, &overlap, &disc).unwrap());
    let geometry = SlabGeometry::build(&mesh, 0).unwrap();
    let space = SlabSpace::build(&geometry);
    let system = assemble_slab(&geometry, &space, &problem, PreviousTrace::Initial(&*problem.initial)).unwrap();

    let tiny = Tiny { mu, q };
    let basis: Vec<Basis> = (0..space.n_columns())
        .map(|c| {
            let (spatial, mode) = (c / space.n_modes(), c % space.n_modes());
            assert_eq!(space.column(spatial, mode), c);
            match space.dof(spatial) {
                SpatialDof::Background(node) => Basis {
                    background: true,
                    node,
                    mode,
                },
                SpatialDof::Overlap(node) => Basis {
                    background: false,
                    node,
                    mode,
                },
            }
        })
        .collect();
    // interior background nodes and both overlap nodes are active here
    assert_eq!(space.n_spatial(), 4);
    let scale = (0..basis.len())
        .map(|r| (0..basis.len()).map(|c| system.matrix.get(r, c).abs()).fold(0.0, f64::max))
        .fold(1.0, f64::max);
    let mut worst: f64 = 0.0;
    for (r, &br) in basis.iter().enumerate() {
        for (c, &bc) in basis.iter().enumerate() {
            worst = worst.max((system.matrix.get(r, c) - tiny.entry(br, bc)).abs());
        }
    }
    worst / scale
}

