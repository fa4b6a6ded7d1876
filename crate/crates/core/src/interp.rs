//! Piecewise Hermite interpolation and finite-difference weights on
//! arbitrary grids.

use std::ops::{Add, Mul, Sub};

pub trait Field: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>> Field for T {}

/// Node data for one interpolated quantity.
#[derive(Debug, Clone)]
pub struct HermiteNodes<T> {
    pub x: Vec<f64>,
    pub y: Vec<T>,
    pub dy: Vec<T>,
    /// Second derivatives at nodes; quintic segments when present, cubic otherwise.
    pub ddy: Option<Vec<T>>,
}

impl<T: Field> HermiteNodes<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Segment index containing `t` (clamped to the grid).
    pub fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        let j = self.x.partition_point(|&xi| xi <= t);
        j.saturating_sub(1).min(n - 2)
    }

    /// Value and first three derivatives at `t`.
    pub fn eval(&self, t: f64) -> [T; 4] {
        let j = self.segment(t);
        let (x0, x1) = (self.x[j], self.x[j + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let dy0 = self.dy[j] * h;
        let dy1 = self.dy[j + 1] * h;
        let (y0, y1) = (self.y[j], self.y[j + 1]);
        let diff = y1 - y0;
        let c: [T; 6] = match &self.ddy {
            Some(dd) => {
                let s0 = dd[j] * (h * h);
                let s1 = dd[j + 1] * (h * h);
                [
                    y0,
                    dy0,
                    s0 * 0.5,
                    diff * 10.0 - dy0 * 6.0 - dy1 * 4.0 - s0 * 1.5 + s1 * 0.5,
                    diff * -15.0 + dy0 * 8.0 + dy1 * 7.0 + s0 * 1.5 - s1,
                    diff * 6.0 - dy0 * 3.0 - dy1 * 3.0 - s0 * 0.5 + s1 * 0.5,
                ]
            }
            None => {
                let zero = y0 * 0.0;
                [
                    y0,
                    dy0,
                    diff * 3.0 - dy0 * 2.0 - dy1,
                    diff * -2.0 + dy0 + dy1,
                    zero,
                    zero,
                ]
            }
        };
        // Horner for the value and its derivatives in s.
        let mut p = [c[5], c[5] * 0.0, c[5] * 0.0, c[5] * 0.0];
        for &ck in c[..5].iter().rev() {
            p[3] = p[3] * s + p[2];
            p[2] = p[2] * s + p[1];
            p[1] = p[1] * s + p[0];
            p[0] = p[0] * s + ck;
        }
        [
            p[0],
            p[1] * (1.0 / h),
            p[2] * (2.0 / (h * h)),
            p[3] * (6.0 / (h * h * h)),
        ]
    }

    /// Second derivatives of the cubic interpolant at nodes, averaging the
    /// one-sided values from the adjacent segments.
    pub fn averaged_node_second_derivatives(&self) -> Vec<T> {
        let n = self.x.len();
        (0..n)
            .map(|j| {
                let left = (j > 0).then(|| self.segment_second_derivative(j - 1, 1.0));
                let right = (j + 1 < n).then(|| self.segment_second_derivative(j, 0.0));
                match (left, right) {
                    (Some(l), Some(r)) => (l + r) * 0.5,
                    (Some(l), None) => l,
                    (None, Some(r)) => r,
                    (None, None) => self.y[j] * 0.0,
                }
            })
            .collect()
    }

    fn segment_second_derivative(&self, j: usize, s: f64) -> T {
        let h = self.x[j + 1] - self.x[j];
        let dy0 = self.dy[j] * h;
        let dy1 = self.dy[j + 1] * h;
        let diff = self.y[j + 1] - self.y[j];
        let c2 = diff * 3.0 - dy0 * 2.0 - dy1;
        let c3 = diff * -2.0 + dy0 + dy1;
        (c2 * 2.0 + c3 * (6.0 * s)) * (1.0 / (h * h))
    }
}

/// Fornberg's finite-difference weights for derivatives `0..=order` at `z`
/// from values at `x`.
pub fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    // transpose to [order][node]
    (0..=order).map(|k| (0..n).map(|i| c[i][k]).collect()).collect()
}

/// First derivative of sampled data with 5-point stencils: centred on the
/// interior, shifted to one side near the ends.
pub fn five_point_derivative(t: &[f64], values: &[f64]) -> Vec<f64> {
    let n = t.len();
    assert_eq!(n, values.len());
    assert!(n >= 2);
    let width = n.min(5);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(width / 2).min(n - width);
            let stencil = &t[lo..lo + width];
            let w = fornberg_weights(t[i], stencil, 1);
            w[1].iter().zip(&values[lo..lo + width]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reproduces_quintic_polynomials() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) + 0.25 * x.powi(5);
        let dp = |x: f64| -2.0 + 1.5 * x * x + 1.25 * x.powi(4);
        let ddp = |x: f64| 3.0 * x + 5.0 * x.powi(3);
        let xs = vec![-1.0, -0.2, 0.7, 2.0];
        let nodes = HermiteNodes {
            y: xs.iter().map(|&x| p(x)).collect(),
            dy: xs.iter().map(|&x| dp(x)).collect(),
            ddy: Some(xs.iter().map(|&x| ddp(x)).collect()),
            x: xs,
        };
        for t in [-0.9, -0.2, 0.1, 1.3, 1.99] {
            let v = nodes.eval(t);
            assert!((v[0] - p(t)).abs() < 1e-12);
            assert!((v[1] - dp(t)).abs() < 1e-11);
            assert!((v[2] - ddp(t)).abs() < 1e-10);
            assert!((v[3] - (3.0 + 15.0 * t * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn cubic_reproduces_cubics_and_averages_second_derivative() {
        let p = |x: f64| x.powi(3) - x;
        let dp = |x: f64| 3.0 * x * x - 1.0;
        let xs = vec![0.0, 0.5, 1.5];
        let nodes = HermiteNodes {
            y: xs.iter().map(|&x| p(x)).collect(),
            dy: xs.iter().map(|&x| dp(x)).collect(),
            ddy: None,
            x: xs,
        };
        assert!((nodes.eval(1.0)[0] - p(1.0)).abs() < 1e-14);
        let dd = nodes.averaged_node_second_derivatives();
        assert!((dd[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fornberg_matches_known_stencil() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[1].iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let t: Vec<f64> = (0..20).map(|i| 0.1 * i as f64 + 0.003 * (i as f64).sin()).collect();
        let v: Vec<f64> = t.iter().map(|x| x.sin()).collect();
        let d = five_point_derivative(&t, &v);
        for (x, dx) in t.iter().zip(d) {
            assert!((dx - x.cos()).abs() < 5e-5);
        }
    }
}
