//! One-dimensional quadrature rules on the reference interval `[0, 1]` and
//! composite temporal rules over event-split slabs.

/// Nodes and weights on `[0, 1]`; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    /// Three-point Gauss-Lobatto (Simpson), exact to degree 3.
    pub fn lobatto3() -> Self {
        Rule1D {
            nodes: vec![0.0, 0.5, 1.0],
            weights: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        }
    }

    /// Three-point Gauss-Legendre, exact to degree 5.
    pub fn gauss_legendre3() -> Self {
        let d = 0.5 * (3.0_f64 / 5.0).sqrt();
        Rule1D {
            nodes: vec![0.5 - d, 0.5, 0.5 + d],
            weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
        }
    }

    pub fn midpoint() -> Self {
        Rule1D {
            nodes: vec![0.5],
            weights: vec![1.0],
        }
    }

    pub fn trapezoid() -> Self {
        Rule1D {
            nodes: vec![0.0, 1.0],
            weights: vec![0.5, 0.5],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(x, w)` pairs mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&s, &w)| (a + s * len, w * len))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Named temporal rules; the discretization picks one for the left-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeRule {
    Lobatto3,
    Gauss3,
    Midpoint,
}

impl TimeRule {
    pub fn rule(self) -> Rule1D {
        match self {
            TimeRule::Lobatto3 => Rule1D::lobatto3(),
            TimeRule::Gauss3 => Rule1D::gauss_legendre3(),
            TimeRule::Midpoint => Rule1D::midpoint(),
        }
    }
}

/// A temporal quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePoint {
    pub t: f64,
    pub weight: f64,
    /// Midpoint of the panel the point belongs to. Quantities that jump at
    /// events (which background cell holds an interface) are taken from
    /// here, so a point on a panel end sees that panel's one-sided limit.
    pub probe: f64,
}

/// Applies `base` on every panel between consecutive breakpoints
/// `{t_start} ∪ events ∪ {t_end}`. Events must be sorted and interior.
pub fn composite_time_rule(t_start: f64, t_end: f64, events: &[f64], base: &Rule1D) -> Vec<TimePoint> {
    let mut points = Vec::with_capacity((events.len() + 1) * base.len());
    let mut a = t_start;
    for &b in events.iter().chain(std::iter::once(&t_end)) {
        let probe = 0.5 * (a + b);
        points.extend(base.mapped(a, b).map(|(t, weight)| TimePoint { t, weight, probe }));
        a = b;
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn monomial(rule: &Rule1D, p: i32) -> f64 {
        rule.integrate(0.0, 1.0, |x| x.powi(p))
    }

    #[test]
    fn weights_sum_to_one() {
        for r in [
            Rule1D::lobatto3(),
            Rule1D::gauss_legendre3(),
            Rule1D::midpoint(),
            Rule1D::trapezoid(),
        ] {
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn lobatto_degree() {
        let r = Rule1D::lobatto3();
        for p in 0..=3 {
            assert_relative_eq!(monomial(&r, p), 1.0 / (p + 1) as f64, max_relative = 1e-14);
        }
        assert_relative_eq!(monomial(&r, 4), 5.0 / 24.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_degree() {
        let r = Rule1D::gauss_legendre3();
        for p in 0..=5 {
            assert_relative_eq!(monomial(&r, p), 1.0 / (p + 1) as f64, max_relative = 1e-14);
        }
        assert!((monomial(&r, 6) - 1.0 / 7.0).abs() > 1e-6);
    }

    #[test]
    fn low_order_rules() {
        assert_eq!(monomial(&Rule1D::midpoint(), 1), 0.5);
        assert_eq!(monomial(&Rule1D::trapezoid(), 1), 0.5);
        assert_eq!(monomial(&Rule1D::trapezoid(), 2), 0.5);
    }

    #[test]
    fn composite_panels() {
        let base = Rule1D::lobatto3();
        let single = composite_time_rule(0.2, 0.3, &[], &base);
        assert_eq!(single.len(), 3);

        let split = composite_time_rule(0.0, 0.15, &[0.125], &base);
        assert_eq!(split.len(), 6);
        let first: f64 = split[..3].iter().map(|p| p.weight).sum();
        let second: f64 = split[3..].iter().map(|p| p.weight).sum();
        assert_relative_eq!(first, 0.125, max_relative = 1e-14);
        assert_relative_eq!(second, 0.025, max_relative = 1e-13);

        let cubic: f64 = split.iter().map(|p| p.weight * p.t.powi(3)).sum();
        assert_relative_eq!(cubic, 0.15_f64.powi(4) / 4.0, max_relative = 1e-13);
    }
}
