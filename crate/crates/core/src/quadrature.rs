//! Gauss–Legendre rules: composite 1D/2D with panel doubling, and a
//! recursive adaptive rule for smooth integrands.

use std::sync::OnceLock;

/// Nodes per panel for the flux integrals.
pub const FLUX_NODES: usize = 32;
/// Starting panel count for the flux integrals.
pub const FLUX_PANELS: usize = 8;
/// Panel doubling stops at this count.
pub const MAX_PANELS: usize = 64;
/// Successive composite results closer than this are accepted.
pub const DOUBLING_TOL: f64 = 1e-11;

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached 32-point rule used by the flux computations.
    pub fn flux_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(FLUX_NODES))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Tensor-product composite rule on a rectangle.
    pub fn composite_2d<F: FnMut(f64, f64) -> f64>(
        &self,
        (a, b): (f64, f64),
        (c, d): (f64, f64),
        panels: usize,
        mut f: F,
    ) -> f64 {
        self.composite(a, b, panels, |x| self.composite(c, d, panels, |y| f(x, y)))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of a panel-doubling integration.
#[derive(Debug, Clone, Copy)]
pub struct Doubled {
    pub value: f64,
    pub panels: usize,
    pub estimate: f64,
}

/// Composite Gauss–Legendre, doubling panels from [`FLUX_PANELS`] until two
/// successive results agree to [`DOUBLING_TOL`] or [`MAX_PANELS`] is reached.
pub fn doubling<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> Doubled {
    let rule = GaussLegendre::flux_rule();
    let mut panels = FLUX_PANELS;
    let mut prev = rule.composite(a, b, panels, &mut f);
    loop {
        let next_panels = panels * 2;
        if next_panels > MAX_PANELS {
            return Doubled {
                value: prev,
                panels,
                estimate: f64::NAN,
            };
        }
        let next = rule.composite(a, b, next_panels, &mut f);
        let diff = (next - prev).abs();
        if diff < DOUBLING_TOL {
            return Doubled {
                value: next,
                panels: next_panels,
                estimate: diff,
            };
        }
        prev = next;
        panels = next_panels;
    }
}

/// Two-dimensional analogue of [`doubling`]; both axes share the panel count.
pub fn doubling_2d<F: FnMut(f64, f64) -> f64>(x: (f64, f64), y: (f64, f64), mut f: F) -> Doubled {
    let rule = GaussLegendre::flux_rule();
    let mut panels = FLUX_PANELS;
    let mut prev = rule.composite_2d(x, y, panels, &mut f);
    loop {
        let next_panels = panels * 2;
        if next_panels > MAX_PANELS {
            return Doubled {
                value: prev,
                panels,
                estimate: f64::NAN,
            };
        }
        let next = rule.composite_2d(x, y, next_panels, &mut f);
        let diff = (next - prev).abs();
        if diff < DOUBLING_TOL {
            return Doubled {
                value: next,
                panels: next_panels,
                estimate: diff,
            };
        }
        prev = next;
        panels = next_panels;
    }
}

/// Recursive adaptive Gauss–Legendre (10-point rule on bisected intervals).
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(10));
    if a == b {
        return 0.0;
    }
    let whole = rule.integrate(a, b, &mut f);
    adaptive_rec(rule, a, b, whole, tol, 0, &mut f)
}

fn adaptive_rec<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    f: &mut F,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, &mut *f);
    let right = rule.integrate(mid, b, &mut *f);
    if (left + right - whole).abs() <= tol || depth >= 40 {
        return left + right;
    }
    adaptive_rec(rule, a, mid, left, 0.5 * tol, depth + 1, f)
        + adaptive_rec(rule, mid, b, right, 0.5 * tol, depth + 1, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(9) - 3.0 * x.powi(4));
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (2f64.powi(5) + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-11);
        let w: f64 = GaussLegendre::new(32).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn doubling_converges_for_smooth_periodic() {
        let r = doubling(0.0, 2.0 * PI, |x| (x.sin()).exp());
        // I_0(1) * 2 pi
        let exact = 2.0 * PI * 1.266_065_877_752_008_4;
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.panels, 16);
    }

    #[test]
    fn doubling_2d_product() {
        let r = doubling_2d((0.0, 1.0), (0.0, PI), |x, y| x * y.sin());
        assert!((r.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive(-1.0, 1.0, 1e-12, |x| 1.0 / (1e-4 + x * x));
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-9 * exact);
    }
}
