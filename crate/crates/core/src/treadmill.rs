//! Treadmills and treadmillsleds.
//!
//! The `l`-treadmill of a curve is `sigma_l = (1 - l) s - gamma' conj(gamma) / v`
//! with `s` the arclength and `v = |gamma'|`. For `l = 1` this is the
//! treadmillsled `tau`, which depends only on `(gamma, gamma')` at each point
//! and determines the curve up to a rotation about the origin:
//! `gamma = -e^{i theta} conj(tau)` where `e^{i theta}` is the unit tangent.
//!
//! With the standard (counter-clockwise positive) curvature `k` a treadmill
//! path satisfies
//!
//! ```text
//! x' = s' (-l - k y),    y' = s' k (x - (1 - l) s).
//! ```
//!
//! Helicoidal CMC curves in R^3 are exactly those whose mirrored sled
//! `P = conj(tau) = (x, -y)` lies on a level set of
//! `F(x, y) = H (x^2 + y^2) - 2 m y / sqrt(m^2 + x^2)`; the level is `M` and
//! the conserved flux is `C = -pi M`.

use std::f64::consts::PI;

use crate::conservation::{conserved_quantity, max_deviation, median, ConservationData};
use crate::curve::{BaseCurve, SupportCurve, C64};
use crate::error::{Error, Result};
use crate::interp::five_point_derivative;
use crate::spaceform::SpaceForm;
use crate::twizzler::Twizzler;

/// Relative size of `x x' + y y'` below which a sample counts as singular.
pub const SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TreadmillPath {
    pub ell: f64,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// The curve the path was computed from, if any.
    pub source: Option<BaseCurve>,
}

impl TreadmillPath {
    pub fn new(ell: f64, t: Vec<f64>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if t.len() != x.len() || t.len() != y.len() {
            return Err(Error::InvalidInput("path columns differ in length".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("path parameter not strictly increasing".into()));
        }
        Ok(TreadmillPath { ell, t, x, y, source: None })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn point(&self, i: usize) -> C64 {
        C64::new(self.x[i], self.y[i])
    }
}

/// `sigma_l` at one point, given the arclength `s` from the start.
pub fn treadmill_point(pos: C64, vel: C64, s: f64, ell: f64) -> C64 {
    (1.0 - ell) * s - vel * pos.conj() / vel.norm()
}

/// The `l`-treadmill of `c` at the given (sorted) parameters; arclength is
/// measured from the left end of the domain.
pub fn treadmill(c: &BaseCurve, ell: f64, params: &[f64]) -> Result<TreadmillPath> {
    let s = if ell == 1.0 {
        vec![0.0; params.len()]
    } else {
        c.cumulative_arclength(params)?
    };
    let mut x = Vec::with_capacity(params.len());
    let mut y = Vec::with_capacity(params.len());
    for (&u, &si) in params.iter().zip(&s) {
        let j = c.eval(u)?;
        if j.speed() == 0.0 {
            return Err(Error::ZeroSpeed { u });
        }
        let p = treadmill_point(j.pos, j.vel, si, ell);
        x.push(p.re);
        y.push(p.im);
    }
    let mut path = TreadmillPath::new(ell, params.to_vec(), x, y)?;
    path.source = Some(c.clone());
    Ok(path)
}

/// `tau = -q' - i q` on the given angles.
pub fn support_tau(sc: &SupportCurve, thetas: &[f64]) -> Result<TreadmillPath> {
    let mut x = Vec::with_capacity(thetas.len());
    let mut y = Vec::with_capacity(thetas.len());
    for &th in thetas {
        let [q, dq, _, _] = sc.eval(th)?;
        x.push(-dq);
        y.push(-q);
    }
    TreadmillPath::new(1.0, thetas.to_vec(), x, y)
}

/// Perdomo's level function minus the level `M`.
pub fn perdomo_residual(x: f64, y: f64, h: f64, m: f64, m_level: f64) -> f64 {
    perdomo_level(x, y, h, m) - m_level
}

/// `H (x^2 + y^2) - 2 m y / sqrt(m^2 + x^2)`.
pub fn perdomo_level(x: f64, y: f64, h: f64, m: f64) -> f64 {
    h * (x * x + y * y) - 2.0 * m * y / (m * m + x * x).sqrt()
}

/// Gradient of [`perdomo_level`].
pub fn perdomo_gradient(x: f64, y: f64, h: f64, m: f64) -> [f64; 2] {
    let d2 = m * m + x * x;
    let d = d2.sqrt();
    [2.0 * h * x + 2.0 * m * y * x / (d2 * d), 2.0 * h * y - 2.0 * m / d]
}

/// Mirror of a sled point into the coordinates of the level function.
pub fn perdomo_coords(tau: C64) -> C64 {
    tau.conj()
}

/// Curve from a sampled treadmillsled (`l = 1`), up to rotation.
///
/// The curve is anchored with `theta = 0` at the first sample, so its sled
/// reproduces the first path point exactly. Where `x x' + y y'` vanishes the
/// curvature is not determined by the path; the path is then split and the
/// pieces are returned inside [`Error::SingularDenominator`], each with its
/// own unknown rotation.
pub fn reconstruct(path: &TreadmillPath) -> Result<BaseCurve> {
    if path.ell != 1.0 {
        return Err(Error::InvalidInput(format!(
            "reconstruction needs a treadmillsled (l = 1), got l = {}",
            path.ell
        )));
    }
    let n = path.len();
    if n < 3 {
        return Err(Error::DegenerateArc(format!("{n} path samples; need at least 3")));
    }
    let dx = five_point_derivative(&path.t, &path.x);
    let dy = five_point_derivative(&path.t, &path.y);
    let scale = (0..n).map(|i| path.point(i).norm()).fold(0.0, f64::max).max(1.0);
    let motion = dx.iter().zip(&dy).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    let span = path.t[n - 1] - path.t[0];
    if motion * span <= SINGULAR_TOL * scale {
        return stationary_sled(path);
    }
    let d: Vec<f64> = (0..n).map(|i| path.x[i] * dx[i] + path.y[i] * dy[i]).collect();
    let d_scale = d.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let singular: Vec<usize> = (0..n)
        .filter(|&i| {
            d[i].abs() <= SINGULAR_TOL * d_scale || (i + 1 < n && d[i].signum() != d[i + 1].signum())
        })
        .collect();
    if singular.is_empty() {
        return reconstruct_arc(path, 0, n, &dx, &dy, &d);
    }
    let mut arcs = Vec::new();
    let mut start = 0;
    for &i in singular.iter().chain(std::iter::once(&n)) {
        // keep a clear gap of one sample on each side of a singular sample
        let end = i.min(n);
        if end >= start + 3 {
            arcs.push(reconstruct_arc(path, start, end, &dx, &dy, &d)?);
        }
        start = i + 2;
    }
    Err(Error::SingularDenominator {
        at: singular.iter().map(|&i| path.t[i]).collect(),
        arcs,
    })
}

fn reconstruct_arc(path: &TreadmillPath, lo: usize, hi: usize, dx: &[f64], dy: &[f64], d: &[f64]) -> Result<BaseCurve> {
    let t = &path.t[lo..hi];
    let (x, y) = (&path.x[lo..hi], &path.y[lo..hi]);
    let len = hi - lo;
    let mut k = Vec::with_capacity(len);
    let mut ds = Vec::with_capacity(len);
    for j in 0..len {
        let i = lo + j;
        let kj = -dy[i] / d[i];
        // two expressions for s'; use the better conditioned one
        let (den1, den2) = (-1.0 - kj * y[j], kj * x[j]);
        let sj = if den1.abs() >= den2.abs() { dx[i] / den1 } else { dy[i] / den2 };
        if !(sj > 0.0) {
            return Err(Error::NonMonotoneArclength { t: t[j], ds: sj });
        }
        k.push(kj);
        ds.push(sj);
    }
    let omega: Vec<f64> = k.iter().zip(&ds).map(|(a, b)| a * b).collect();
    let domega = five_point_derivative(t, &omega);
    let dds = five_point_derivative(t, &ds);
    let mut theta = vec![0.0; len];
    for j in 1..len {
        let h = t[j] - t[j - 1];
        theta[j] = theta[j - 1] + 0.5 * h * (omega[j - 1] + omega[j]) + h * h * (domega[j - 1] - domega[j]) / 12.0;
    }
    let mut pos = Vec::with_capacity(len);
    let mut vel = Vec::with_capacity(len);
    let mut acc = Vec::with_capacity(len);
    for j in 0..len {
        let e = C64::from_polar(1.0, theta[j]);
        pos.push(-e * C64::new(x[j], -y[j]));
        vel.push(e * ds[j]);
        acc.push(e * C64::new(dds[j], ds[j] * omega[j]));
    }
    BaseCurve::sampled(t.to_vec(), pos, vel, Some(acc))
}

/// A sled that does not move belongs to a circle about the origin: radius
/// `|y|`, counter-clockwise when `y < 0`. The path parameter is used as the
/// polar angle.
fn stationary_sled(path: &TreadmillPath) -> Result<BaseCurve> {
    let p = path.point(0);
    let r = p.norm();
    if r == 0.0 || p.re.abs() > SINGULAR_TOL * r {
        return Err(Error::DegenerateArc(format!(
            "a stationary sled must lie on the imaginary axis, got ({}, {})",
            p.re, p.im
        )));
    }
    let sign = -p.im.signum();
    let (a, b) = (path.t[0], path.t[path.len() - 1]);
    Ok(BaseCurve::circle_on(sign * r, C64::new(0.0, 0.0), (a, b)))
}

impl ConservationData {
    /// Whether `C` or the fitted `M` vary by more than `tol` along the curve.
    pub fn non_constant(&self, tol: f64) -> bool {
        self.deviation > tol || self.m_deviation.is_some_and(|d| d > tol)
    }
}

/// Compares the conserved flux `C` of the R^3 twizzler of `c` with the level
/// `M` of its mirrored sled, sample by sample.
pub fn equivalence_check(c: &BaseCurve, m: f64, h: f64, samples: usize) -> Result<ConservationData> {
    let t = Twizzler::new(SpaceForm::EUCLIDEAN, c.clone(), m)?;
    let u = c.grid(samples);
    let path = treadmill(c, 1.0, &u)?;
    let mut cs = Vec::with_capacity(u.len());
    let mut ms = Vec::with_capacity(u.len());
    for (i, &ui) in u.iter().enumerate() {
        cs.push(conserved_quantity(&t, ui, h)?);
        let p = perdomo_coords(path.point(i));
        ms.push(perdomo_level(p.re, p.im, h, m));
    }
    let (c_med, m_med) = (median(&cs), median(&ms));
    let link = cs.iter().zip(&ms).map(|(c, m)| (c + PI * m).abs()).fold(0.0, f64::max);
    Ok(ConservationData {
        h,
        c: c_med,
        m_level: Some(m_med),
        deviation: max_deviation(&cs, c_med),
        m_deviation: Some(max_deviation(&ms, m_med)),
        link_residual: Some(link),
    })
}
