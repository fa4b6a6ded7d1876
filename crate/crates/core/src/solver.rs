//! Base curves of helicoidal CMC surfaces from the first-order conservation
//! law.
//!
//! # R^3
//!
//! The mirrored sled `P = conj(tau) = (x, y)` of a CMC base curve moves on a
//! level set `F(P) = M` of `F = H (x^2 + y^2) - 2 m y / sqrt(m^2 + x^2)`.
//! With `phi` the tangent angle of the arclength-parameterized curve and
//! `k = phi'` its curvature, the sled obeys `x' = -1 + k y`, `y' = -k x`, and
//! tangency to the level set forces
//!
//! ```text
//! k = (H D^3 + m y) / (m (m^2 + x^2 + y^2)),   D = sqrt(m^2 + x^2).
//! ```
//!
//! The denominator never vanishes, so the system is integrated directly
//! (RK4 predictor, Newton corrector back onto `F = M`), and the curve is
//! `gamma = -e^{i phi} P`, `gamma' = e^{i phi}`.
//!
//! # S^3 and H^3
//!
//! Write the unit-speed curve in polar form `gamma = rho e^{i psi}` and let
//! `beta` be the angle between `gamma'` and the radial direction, scaled so
//! that `rho' = f cos beta`. Unit speed gives `a = gamma'.i gamma = rho sin beta`,
//! and the conservation law `C = 2 pi m f^2 a / sqrt(rho^2 + m^2 f^2 - a^2) -+ H pi rho^2`
//! solves in closed form:
//!
//! ```text
//! K = (C +- H pi rho^2) / (2 pi m f^2),   a = K sqrt(rho^2 + m^2 f^2) / sqrt(1 + K^2).
//! ```
//!
//! Differentiating `sin beta = a(rho) / rho` gives the regular system
//! `rho' = f cos beta`, `beta' = f Phi'(rho)`, `psi' = sin beta / rho` with
//! `Phi = a / rho`, which passes through turning points of `rho` without any
//! branch switching.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::curve::{BaseCurve, Jet, C64};
use crate::interp::HermiteNodes;
use crate::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::spaceform::SpaceFormKind;
use crate::treadmill::{perdomo_gradient, perdomo_level};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    /// Arclength step.
    pub step: f64,
    /// Tolerance of the level-set corrector.
    pub tol_root: f64,
    pub max_steps: usize,
    /// `+1` or `-1`: which root starts the R^3 trace, or the initial sign of
    /// `rho'` in S^3 and H^3.
    pub branch: f64,
    /// `|cos beta|` below which a sample is reported as a turning point; also
    /// the slack in `1 - (a / rho)^2 >= 0` accepted at the start.
    pub turning_eps: f64,
    /// Arclength to integrate. `None` traces a bounded R^3 level set once
    /// around, an unbounded one for [`DEFAULT_HALF_LENGTH`] each way, and
    /// curved cases for `2 pi`.
    pub length: Option<f64>,
}

/// Arclength traced in each direction on unbounded R^3 level sets.
pub const DEFAULT_HALF_LENGTH: f64 = 10.0;
/// Radius (or `f` in S^3) at which a curved-case curve counts as touching the axis.
pub const AXIS_TOL: f64 = 1e-9;
/// Cap on the substeps a single step may be split into near the axis.
const MAX_SUBSTEPS: usize = 100_000;
/// Angular rate (per unit arclength) a full step may carry before it is split.
const SUBSTEP_RATE: f64 = 4.0;

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step: 1e-3,
            tol_root: 1e-12,
            max_steps: 200_000,
            branch: 1.0,
            turning_eps: 1e-9,
            length: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidInput(format!("step must be positive, got {}", self.step)));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidInput("max_steps must be at least 1".into()));
        }
        if !(self.tol_root > 0.0) {
            return Err(Error::InvalidInput(format!("tol_root must be positive, got {}", self.tol_root)));
        }
        if let Some(l) = self.length {
            if !(l > 0.0) {
                return Err(Error::InvalidInput(format!("length must be positive, got {l}")));
            }
        }
        Ok(())
    }

    fn sign(&self) -> f64 {
        if self.branch < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    /// Reached the requested length.
    Length,
    /// The bounded level set closed up.
    Closed,
    /// Closed form (line or circle).
    Analytic,
    MaxSteps,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub termination: Termination,
    /// Largest `|F(P) - M|` (R^3) or `|sin beta - a / rho|` (curved) seen.
    pub max_residual: f64,
    /// Arclengths where `rho'` changes sign.
    pub turning_points: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub space: SpaceFormKind,
    pub curve: BaseCurve,
    pub h: f64,
    pub c: f64,
    /// Perdomo level `M` (R^3 only).
    pub m_level: Option<f64>,
    pub pitch: f64,
    pub diagnostics: Diagnostics,
}

/// Sidecar metadata of a solution.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionMeta<'a> {
    pub spaceform: &'static str,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "M")]
    pub m_level: Option<f64>,
    pub m: f64,
    pub domain: (f64, f64),
    pub diagnostics: &'a Diagnostics,
}

impl Solution {
    pub fn meta(&self) -> SolutionMeta<'_> {
        SolutionMeta {
            spaceform: self.space.tag(),
            h: self.h,
            c: self.c,
            m_level: self.m_level,
            m: self.pitch,
            domain: self.curve.domain(),
            diagnostics: &self.diagnostics,
        }
    }
}

fn check_pitch(m: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidPitch(m));
    }
    Ok(())
}

/// Curvature forced on an arclength-parameterized curve whose mirrored sled
/// sits at `(x, y)` on a level set of the R^3 level function.
pub fn sled_curvature(x: f64, y: f64, h: f64, m: f64) -> f64 {
    let d = (m * m + x * x).sqrt();
    (h * d * d * d + m * y) / (m * (m * m + x * x + y * y))
}

/// Arclength derivative of [`sled_curvature`] along the sled flow.
pub fn sled_curvature_rate(x: f64, y: f64, h: f64, m: f64) -> f64 {
    let d = (m * m + x * x).sqrt();
    let num = h * d * d * d + m * y;
    let den = m * (m * m + x * x + y * y);
    let k = num / den;
    let kx = (3.0 * h * d * x - k * 2.0 * m * x) / den;
    let ky = (m - k * 2.0 * m * y) / den;
    kx * (-1.0 + k * y) + ky * (-k * x)
}

#[derive(Debug, Clone, Copy)]
struct SledState {
    x: f64,
    y: f64,
    phi: f64,
}

fn sled_rhs(s: SledState, h: f64, m: f64) -> [f64; 3] {
    let k = sled_curvature(s.x, s.y, h, m);
    [-1.0 + k * s.y, -k * s.x, k]
}

/// One level-set trace: arclengths with sled positions and tangent angles.
#[derive(Debug, Clone)]
pub struct LevelTrace {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub phi: Vec<f64>,
    pub closed: bool,
    pub max_residual: f64,
}

impl LevelTrace {
    fn push(&mut self, s: f64, st: SledState) {
        self.s.push(s);
        self.x.push(st.x);
        self.y.push(st.y);
        self.phi.push(st.phi);
    }
}

/// Newton steps along the gradient back onto `F = M`.
fn correct(st: &mut SledState, h: f64, m_level: f64, m: f64, tol: f64) -> f64 {
    let mut res = perdomo_level(st.x, st.y, h, m) - m_level;
    for _ in 0..20 {
        if res.abs() <= tol {
            break;
        }
        let g = perdomo_gradient(st.x, st.y, h, m);
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2 == 0.0 {
            break;
        }
        st.x -= res * g[0] / g2;
        st.y -= res * g[1] / g2;
        res = perdomo_level(st.x, st.y, h, m) - m_level;
    }
    res.abs()
}

/// Traces the level set `F = M` from the mirrored sled position `start`
/// with tangent angle `phi0`, stepping `direction * step` in arclength.
///
/// Stops after `length` (when given), when the sled returns to `start` after
/// leaving it, or after `cfg.max_steps` steps.
pub fn trace_level_set(
    h: f64,
    m_level: f64,
    m: f64,
    start: C64,
    phi0: f64,
    direction: f64,
    length: Option<f64>,
    cfg: &SolverConfig,
) -> Result<LevelTrace> {
    cfg.validate()?;
    check_pitch(m)?;
    let step = cfg.step * direction.signum();
    let mut st = SledState { x: start.re, y: start.im, phi: phi0 };
    let mut trace = LevelTrace {
        s: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
        phi: Vec::new(),
        closed: false,
        max_residual: 0.0,
    };
    trace.max_residual = correct(&mut st, h, m_level, m, cfg.tol_root);
    let p0 = C64::new(st.x, st.y);
    trace.push(0.0, st);
    let mut s: f64 = 0.0;
    let mut left = false;
    let mut prev_dist = 0.0;
    let steps_for_length = length.map(|l| (l / cfg.step).ceil() as usize);
    for n in 1..=cfg.max_steps {
        let mut hstep = step;
        if let (Some(l), Some(total)) = (length, steps_for_length) {
            if n == total {
                hstep = direction.signum() * (l - s.abs());
            } else if n > total {
                break;
            }
        }
        st = rk4(st, hstep, h, m);
        let res = correct(&mut st, h, m_level, m, cfg.tol_root);
        trace.max_residual = trace.max_residual.max(res);
        s += hstep;
        trace.push(s, st);
        if length.is_none() {
            let dist = (C64::new(st.x, st.y) - p0).norm();
            if dist > 10.0 * cfg.step {
                left = true;
            }
            if left && dist > prev_dist && prev_dist < 2.0 * cfg.step {
                trace.closed = true;
                break;
            }
            prev_dist = dist;
        }
    }
    Ok(trace)
}

fn rk4(st: SledState, hstep: f64, h: f64, m: f64) -> SledState {
    let add = |s: SledState, k: [f64; 3], c: f64| SledState {
        x: s.x + c * k[0],
        y: s.y + c * k[1],
        phi: s.phi + c * k[2],
    };
    let k1 = sled_rhs(st, h, m);
    let k2 = sled_rhs(add(st, k1, 0.5 * hstep), h, m);
    let k3 = sled_rhs(add(st, k2, 0.5 * hstep), h, m);
    let k4 = sled_rhs(add(st, k3, hstep), h, m);
    SledState {
        x: st.x + hstep / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y: st.y + hstep / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        phi: st.phi + hstep / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    }
}

/// Starting sled position on `F = M`: a root on the symmetry axis `x = 0`
/// when there is one, else a bracketed root on a probe grid.
fn level_start(h: f64, m_level: f64, m: f64, cfg: &SolverConfig) -> Result<C64> {
    let on_axis = if h == 0.0 {
        Some(-m_level / 2.0)
    } else {
        let disc = 1.0 + h * m_level;
        (disc >= 0.0).then(|| (1.0 + cfg.sign() * disc.sqrt()) / h)
    };
    if let Some(y) = on_axis {
        return Ok(C64::new(0.0, y));
    }
    let mut r = 1.0f64.max(m_level.abs());
    if h != 0.0 {
        r = r.max(1.0 / h.abs());
    }
    let r = 10.0 * r;
    let n = 201;
    let at = |i: usize| -r + 2.0 * r * i as f64 / (n - 1) as f64;
    let g = |x: f64, y: f64| perdomo_level(x, y, h, m) - m_level;
    for i in 0..n {
        let x = at(i);
        for j in 0..n - 1 {
            let (y0, y1) = (at(j), at(j + 1));
            let (f0, f1) = (g(x, y0), g(x, y1));
            if f0 == 0.0 {
                return Ok(C64::new(x, y0));
            }
            if f0.signum() != f1.signum() {
                let (mut lo, mut hi, mut flo) = (y0, y1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = g(x, mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                    if (hi - lo).abs() <= cfg.tol_root * (1.0 + mid.abs()) {
                        break;
                    }
                }
                return Ok(C64::new(x, 0.5 * (lo + hi)));
            }
        }
    }
    Err(Error::EmptyLevelSet { h, m_level, pitch: m })
}

/// Base curve of a helicoidal CMC surface in R^3 with mean curvature `H`
/// and Perdomo level `M` (conserved flux `C = -pi M`).
pub fn solve_r3(h: f64, m_level: f64, m: f64, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    check_pitch(m)?;
    let c = -PI * m_level;
    let finish = |curve: BaseCurve, diagnostics: Diagnostics| Solution {
        space: SpaceFormKind::Euclidean3,
        curve,
        h,
        c,
        m_level: Some(m_level),
        pitch: m,
        diagnostics,
    };
    let analytic = Diagnostics {
        steps: 0,
        termination: Termination::Analytic,
        max_residual: 0.0,
        turning_points: Vec::new(),
    };
    if h == 0.0 && m_level == 0.0 {
        // the helicoid: the level set is y = 0 and the curve a line
        let half = cfg.length.map_or(DEFAULT_HALF_LENGTH, |l| 0.5 * l);
        return Ok(finish(BaseCurve::line((-half, half))?, analytic));
    }
    let p0 = level_start(h, m_level, m, cfg)?;
    let v = sled_rhs(SledState { x: p0.re, y: p0.im, phi: 0.0 }, h, m);
    if v[0].hypot(v[1]) <= 1e-10 {
        // stationary sled: the curve is a circle of radius 1/|k| about 0
        let k = v[2];
        let p = p0;
        let len = cfg.length.unwrap_or(TAU / k.abs());
        let curve = BaseCurve::from_fn((0.0, len), move |s| {
            let e = C64::from_polar(1.0, k * s);
            Jet {
                pos: -e * p,
                vel: e,
                acc: C64::i() * e * k,
            }
        })?;
        let mut d = analytic;
        d.max_residual = (perdomo_level(p.re, p.im, h, m) - m_level).abs();
        return Ok(finish(curve, d));
    }
    let bounded = h != 0.0;
    let trace = if bounded || cfg.length.is_some() {
        let t = trace_level_set(h, m_level, m, p0, 0.0, 1.0, cfg.length, cfg)?;
        vec![t]
    } else {
        let half = Some(DEFAULT_HALF_LENGTH);
        let back = trace_level_set(h, m_level, m, p0, 0.0, -1.0, half, cfg)?;
        let fwd = trace_level_set(h, m_level, m, p0, 0.0, 1.0, half, cfg)?;
        vec![back, fwd]
    };
    let termination = if trace.len() == 1 && trace[0].closed {
        Termination::Closed
    } else if cfg.length.is_some() || !bounded {
        Termination::Length
    } else {
        Termination::MaxSteps
    };
    let max_residual = trace.iter().map(|t| t.max_residual).fold(0.0, f64::max);
    // merge into increasing arclength
    let mut samples: Vec<(f64, f64, f64, f64)> = Vec::new();
    if trace.len() == 2 {
        let b = &trace[0];
        for i in (1..b.s.len()).rev() {
            samples.push((b.s[i], b.x[i], b.y[i], b.phi[i]));
        }
    }
    let f = trace.last().expect("at least one trace");
    for i in 0..f.s.len() {
        samples.push((f.s[i], f.x[i], f.y[i], f.phi[i]));
    }
    let steps = samples.len() - 1;
    let n = samples.len();
    let (mut u, mut phi, mut ks, mut dks) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut anchor = (0, C64::new(0.0, 0.0));
    for (i, &(s, x, y, ph)) in samples.iter().enumerate() {
        if s == 0.0 {
            anchor = (i, -C64::from_polar(1.0, ph) * C64::new(x, y));
        }
        u.push(s);
        phi.push(ph);
        ks.push(sled_curvature(x, y, h, m));
        dks.push(sled_curvature_rate(x, y, h, m));
    }
    let curve = tangent_angle_curve(u, phi, ks, dks, anchor.0, anchor.1)?;
    Ok(finish(
        curve,
        Diagnostics {
            steps,
            termination,
            max_residual,
            turning_points: Vec::new(),
        },
    ))
}

/// Unit-speed curve from samples of its tangent angle `phi` with `phi' = k`
/// and `phi'' = dk`, anchored so that `gamma(s[anchor]) = anchor_pos`.
///
/// The angle is a quintic Hermite interpolant and positions are integrated
/// from `e^{i phi}` by Gauss-Legendre within each segment, so `gamma''`
/// never comes from differencing positions. (Differencing loses about
/// `eps |gamma| / step^2`, which for `|gamma| ~ 10` already shows up in
/// the mean curvature at the `1e-6` level.)
fn tangent_angle_curve(
    s: Vec<f64>,
    phi: Vec<f64>,
    k: Vec<f64>,
    dk: Vec<f64>,
    anchor: usize,
    anchor_pos: C64,
) -> Result<BaseCurve> {
    let angle = HermiteNodes { x: s.clone(), y: phi, dy: k, ddy: Some(dk) };
    let gl = GaussLegendre::new(6);
    let tangent = move |angle: &HermiteNodes<f64>, t: f64| C64::from_polar(1.0, angle.eval(t)[0]);
    let chord = move |angle: &HermiteNodes<f64>, a: f64, b: f64| {
        C64::new(
            gl.integrate(a, b, |t| tangent(angle, t).re),
            gl.integrate(a, b, |t| tangent(angle, t).im),
        )
    };
    let mut pos = vec![C64::new(0.0, 0.0); s.len()];
    pos[anchor] = anchor_pos;
    for i in anchor..s.len() - 1 {
        pos[i + 1] = pos[i] + chord(&angle, s[i], s[i + 1]);
    }
    for i in (1..=anchor).rev() {
        pos[i - 1] = pos[i] - chord(&angle, s[i - 1], s[i]);
    }
    BaseCurve::from_fn_on_nodes(s, move |t| {
        let j = angle.segment(t);
        let a = angle.eval(t);
        let e = C64::from_polar(1.0, a[0]);
        let p = if t == angle.x[j] { pos[j] } else { pos[j] + chord(&angle, angle.x[j], t) };
        Jet { pos: p, vel: e, acc: C64::i() * e * a[1] }
    })
}

/// Closed-form data of the curved-case conservation law at radius `rho`.
#[derive(Debug, Clone, Copy)]
struct Radial {
    /// `f(rho)`.
    f: f64,
    /// `a / rho` and its derivative in `rho`.
    phi: f64,
    dphi: f64,
}

#[derive(Debug, Clone, Copy)]
struct CurvedLaw {
    /// `-1` in S^3 (`f^2 = 1 - rho^2`), `+1` in H^3 (`f^2 = 1 + rho^2`).
    eps: f64,
    h: f64,
    c: f64,
    m: f64,
}

impl CurvedLaw {
    fn radial(&self, rho: f64) -> Radial {
        let CurvedLaw { eps, h, c, m } = *self;
        // C enters as C + H pi rho^2 in S^3 and C - H pi rho^2 in H^3
        let sh = -eps;
        let f2 = 1.0 + eps * rho * rho;
        let num = c + sh * h * PI * rho * rho;
        let den = TAU * m * f2;
        let k = num / den;
        let dk = (2.0 * sh * h * PI * rho - k * TAU * m * 2.0 * eps * rho) / den;
        let a2 = rho * rho + m * m * f2;
        let sa = a2.sqrt();
        let da2 = 2.0 * rho + 2.0 * m * m * eps * rho;
        let w = (1.0 + k * k).sqrt();
        let a = k * sa / w;
        let da = da2 / (2.0 * sa) * k / w + sa * dk / (w * w * w);
        Radial {
            f: f2.max(0.0).sqrt(),
            phi: a / rho,
            dphi: da / rho - a / (rho * rho),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PolarState {
    rho: f64,
    beta: f64,
    psi: f64,
}

fn polar_rhs(law: &CurvedLaw, s: PolarState) -> [f64; 3] {
    let r = law.radial(s.rho);
    [r.f * s.beta.cos(), r.f * r.dphi, s.beta.sin() / s.rho]
}

fn solve_curved(kind: SpaceFormKind, h: f64, c: f64, m: f64, start: C64, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    check_pitch(m)?;
    let eps = if kind == SpaceFormKind::Sphere3 { -1.0 } else { 1.0 };
    let law = CurvedLaw { eps, h, c, m };
    let rho0 = start.norm();
    if rho0 <= AXIS_TOL {
        return Err(Error::AxisTouch { s: 0.0, partial: None });
    }
    if kind == SpaceFormKind::Sphere3 && rho0 >= 1.0 - AXIS_TOL {
        if rho0 > 1.0 {
            return Err(Error::OutsideSphere { u: 0.0, radius: rho0 });
        }
        return Err(Error::AxisTouch { s: 0.0, partial: None });
    }
    let r0 = law.radial(rho0);
    // a start within turning_eps of tangency (|a| = rho) is taken as tangent
    if !(1.0 - r0.phi * r0.phi >= -cfg.turning_eps) {
        return Err(Error::NoRoot { radius: rho0, ratio: r0.phi.abs() });
    }
    let asin = r0.phi.clamp(-1.0, 1.0).asin();
    let beta0 = if cfg.sign() > 0.0 { asin } else { PI - asin };
    let mut st = PolarState { rho: rho0, beta: beta0, psi: start.arg() };
    let length = cfg.length.unwrap_or(TAU);
    let total = ((length / cfg.step).ceil() as usize).max(1);
    let steps = total.min(cfg.max_steps);

    let mut s_list = vec![0.0];
    let mut states = vec![st];
    let mut turning = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut s = 0.0;
    let mut touched = None;
    'outer: for n in 1..=steps {
        let hstep = if n == total { length - s } else { cfg.step };
        // psi' and beta' blow up like 1/rho near the axis, so the step is
        // split until no substep turns the state faster than SUBSTEP_RATE
        let k = polar_rhs(&law, st);
        let rate = k[1].abs().max(k[2].abs());
        let sub = ((rate / SUBSTEP_RATE).ceil() as usize).clamp(1, MAX_SUBSTEPS);
        let dh = hstep / sub as f64;
        for _ in 0..sub {
            let next = rk4_polar(&law, st, dh);
            let f_next = law.radial(next.rho.abs()).f;
            if !next.rho.is_finite() || !next.beta.is_finite() || next.rho <= AXIS_TOL || f_next <= AXIS_TOL {
                touched = Some(s + dh);
                break 'outer;
            }
            let (c0, c1) = (st.beta.cos(), next.beta.cos());
            if c0.signum() != c1.signum() || c1.abs() <= cfg.turning_eps {
                // linear interpolation of the sign change of rho'
                let frac = if c0 != c1 { c0 / (c0 - c1) } else { 1.0 };
                turning.push(s + frac * dh);
            }
            s += dh;
            st = next;
            max_residual = max_residual.max((st.beta.sin() - law.radial(st.rho).phi).abs());
            s_list.push(s);
            states.push(st);
        }
    }
    turning.dedup_by(|a, b| (*a - *b).abs() < cfg.step);

    let curve = polar_curve(&law, &s_list, &states)?;
    if let Some(at) = touched {
        return Err(Error::AxisTouch { s: at, partial: Some(curve) });
    }
    let termination = if steps < total { Termination::MaxSteps } else { Termination::Length };
    Ok(Solution {
        space: kind,
        curve,
        h,
        c,
        m_level: None,
        pitch: m,
        diagnostics: Diagnostics {
            steps: s_list.len() - 1,
            termination,
            max_residual,
            turning_points: turning,
        },
    })
}

fn rk4_polar(law: &CurvedLaw, st: PolarState, h: f64) -> PolarState {
    let add = |p: PolarState, k: [f64; 3], c: f64| PolarState {
        rho: p.rho + c * k[0],
        beta: p.beta + c * k[1],
        psi: p.psi + c * k[2],
    };
    let k1 = polar_rhs(law, st);
    let k2 = polar_rhs(law, add(st, k1, 0.5 * h));
    let k3 = polar_rhs(law, add(st, k2, 0.5 * h));
    let k4 = polar_rhs(law, add(st, k3, h));
    let w = |i: usize| h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    PolarState { rho: st.rho + w(0), beta: st.beta + w(1), psi: st.psi + w(2) }
}

/// Position, velocity and acceleration of the curve through `st`, all read
/// off the ODE so that nothing is obtained by differencing.
fn polar_jet(law: &CurvedLaw, st: PolarState) -> Jet {
    let r = law.radial(st.rho);
    let (sb, cb) = st.beta.sin_cos();
    let e = C64::from_polar(1.0, st.psi);
    let drho = r.f * cb;
    let dpsi = sb / st.rho;
    let dbeta = r.f * r.dphi;
    let df = law.eps * st.rho / r.f * drho;
    let ddrho = df * cb - r.f * sb * dbeta;
    let ddpsi = (cb * dbeta * st.rho - sb * drho) / (st.rho * st.rho);
    Jet {
        pos: e * st.rho,
        vel: e * C64::new(drho, st.rho * dpsi),
        acc: e * C64::new(ddrho - st.rho * dpsi * dpsi, 2.0 * drho * dpsi + st.rho * ddpsi),
    }
}

/// The state is interpolated by cubic Hermite pieces (derivatives from the
/// right-hand side) and the jet is evaluated from the interpolated state.
fn polar_curve(law: &CurvedLaw, s: &[f64], states: &[PolarState]) -> Result<BaseCurve> {
    if s.len() < 2 {
        return Err(Error::DegenerateArc("solver stopped before its first step".into()));
    }
    let rhs: Vec<[f64; 3]> = states.iter().map(|&st| polar_rhs(law, st)).collect();
    let comp = |i: usize, val: fn(&PolarState) -> f64| HermiteNodes {
        x: s.to_vec(),
        y: states.iter().map(val).collect(),
        dy: rhs.iter().map(|k| k[i]).collect(),
        ddy: None,
    };
    let rho = comp(0, |p| p.rho);
    let beta = comp(1, |p| p.beta);
    let psi = comp(2, |p| p.psi);
    let law = *law;
    BaseCurve::from_fn_on_nodes(s.to_vec(), move |t| {
        let st = PolarState { rho: rho.eval(t)[0], beta: beta.eval(t)[0], psi: psi.eval(t)[0] };
        polar_jet(&law, st)
    })
}

/// Unit-speed base curve of a helicoidal CMC surface in S^3 with mean
/// curvature `H` and conserved flux `C`, starting at `start` (`0 < |start| < 1`).
pub fn solve_s3(h: f64, c: f64, m: f64, start: C64, cfg: &SolverConfig) -> Result<Solution> {
    solve_curved(SpaceFormKind::Sphere3, h, c, m, start, cfg)
}

/// As [`solve_s3`] in hyperbolic space (`|start| > 0`).
pub fn solve_h3(h: f64, c: f64, m: f64, start: C64, cfg: &SolverConfig) -> Result<Solution> {
    solve_curved(SpaceFormKind::Hyperbolic3, h, c, m, start, cfg)
}

/// `a = gamma' . i gamma` demanded by the curved-case law at radius `rho`
/// for a unit-speed curve; exposed for diagnostics.
pub fn angular_demand(kind: SpaceFormKind, h: f64, c: f64, m: f64, rho: f64) -> Result<f64> {
    let eps = match kind {
        SpaceFormKind::Sphere3 => -1.0,
        SpaceFormKind::Hyperbolic3 => 1.0,
        SpaceFormKind::Euclidean3 => {
            return Err(Error::InvalidInput("the R^3 solver works with M, not a radial law".into()))
        }
    };
    Ok(CurvedLaw { eps, h, c, m }.radial(rho).phi * rho)
}
