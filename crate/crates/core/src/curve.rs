//! Planar base curves and their support parameterization.
//!
//! A [`BaseCurve`] is a C^2 map `gamma: I -> C` given either in closed form or
//! as samples of `(gamma, gamma')` (optionally `gamma''`) joined by Hermite
//! segments. Curvature is the usual signed planar curvature, positive when
//! the curve turns counter-clockwise.
//!
//! A strictly convex arc can be written by normal angle as
//! `gamma(theta) = (q + i q') e^{i theta}` with support function `q`; then
//! `gamma' = (q + q'') i e^{i theta}` and the speed is `q + q''`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::HermiteNodes;
use crate::quadrature;

pub type C64 = Complex64;

/// Slack when deciding whether a parameter lies inside the domain.
const DOMAIN_SLACK: f64 = 1e-12;
/// Absolute tolerance of the arclength quadrature.
pub const ARCLENGTH_TOL: f64 = 1e-12;

/// `gamma`, `gamma'` and `gamma''` at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub pos: C64,
    pub vel: C64,
    pub acc: C64,
}

impl Jet {
    pub fn speed(&self) -> f64 {
        self.vel.norm()
    }

    /// Signed curvature `Im(conj(gamma') gamma'') / |gamma'|^3`.
    pub fn curvature(&self) -> f64 {
        (self.vel.conj() * self.acc).im / self.vel.norm().powi(3)
    }

    /// Planar dot product `gamma' . i gamma`.
    pub fn angular(&self) -> f64 {
        dot(self.vel, C64::i() * self.pos)
    }
}

/// Real dot product under the identification C = R^2.
pub fn dot(a: C64, b: C64) -> f64 {
    (a * b.conj()).re
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub speed: f64,
    pub tangent: C64,
    pub curvature: f64,
    /// Arclength measured from the left end of the domain.
    pub arclength: f64,
}

type JetFn = dyn Fn(f64) -> Jet + Send + Sync;

/// Sampled curve. `node_acc` holds averaged node second derivatives when the
/// segments are cubic; exact-node queries return those instead of the
/// one-sided segment value.
struct Samples {
    nodes: HermiteNodes<C64>,
    node_acc: Option<Vec<C64>>,
}

#[derive(Clone)]
enum Repr {
    Analytic(Arc<JetFn>),
    /// Evaluated by a closure but carrying the parameters it was built on.
    Noded(Arc<JetFn>, Arc<Vec<f64>>),
    Sampled(Arc<Samples>),
}

#[derive(Clone)]
pub struct BaseCurve {
    domain: (f64, f64),
    repr: Repr,
}

impl fmt::Debug for BaseCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Analytic(_) => "analytic".to_string(),
            Repr::Noded(_, x) => format!("noded({})", x.len()),
            Repr::Sampled(s) => format!("sampled({})", s.nodes.len()),
        };
        f.debug_struct("BaseCurve")
            .field("domain", &self.domain)
            .field("repr", &kind)
            .finish()
    }
}

impl BaseCurve {
    pub fn from_fn<F>(domain: (f64, f64), f: F) -> Result<Self>
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(Error::InvalidInput(format!("bad domain {domain:?}")));
        }
        Ok(BaseCurve {
            domain,
            repr: Repr::Analytic(Arc::new(f)),
        })
    }

    /// Closure-evaluated curve over `[nodes[0], nodes[last]]` that reports
    /// `nodes` as its sample parameters (for export).
    pub fn from_fn_on_nodes<F>(nodes: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("nodes must be strictly increasing, at least two".into()));
        }
        let domain = (nodes[0], nodes[nodes.len() - 1]);
        if !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(Error::InvalidInput(format!("bad domain {domain:?}")));
        }
        Ok(BaseCurve {
            domain,
            repr: Repr::Noded(Arc::new(f), Arc::new(nodes)),
        })
    }

    /// Circle `center + r e^{iu}` on `[0, 2 pi]` (clockwise when `r < 0`).
    pub fn circle(r: f64, center: C64) -> Self {
        Self::circle_on(r, center, (0.0, std::f64::consts::TAU))
    }

    pub fn circle_on(r: f64, center: C64, domain: (f64, f64)) -> Self {
        let (r, sign) = (r.abs(), r.signum());
        BaseCurve::from_fn(domain, move |u| {
            let e = C64::from_polar(1.0, sign * u);
            Jet {
                pos: center + e * r,
                vel: C64::i() * e * (r * sign),
                acc: -e * r,
            }
        })
        .expect("valid domain")
    }

    /// The straight line `gamma(u) = u` through the origin.
    pub fn line(domain: (f64, f64)) -> Result<Self> {
        BaseCurve::from_fn(domain, |u| Jet {
            pos: C64::new(u, 0.0),
            vel: C64::new(1.0, 0.0),
            acc: C64::new(0.0, 0.0),
        })
    }

    /// Builds a sampled curve. Without second derivatives the segments are
    /// cubic Hermite and node values of `gamma''` are averaged from both sides.
    pub fn sampled(u: Vec<f64>, pos: Vec<C64>, vel: Vec<C64>, acc: Option<Vec<C64>>) -> Result<Self> {
        let n = u.len();
        if n < 2 {
            return Err(Error::InvalidInput("a sampled curve needs at least 2 samples".into()));
        }
        if pos.len() != n || vel.len() != n || acc.as_ref().is_some_and(|a| a.len() != n) {
            return Err(Error::InvalidInput("sample columns differ in length".into()));
        }
        if let Some(w) = u.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "sample grid not strictly increasing at {}",
                w[1]
            )));
        }
        if u.iter().chain(pos.iter().flat_map(|c| [&c.re, &c.im])).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        let domain = (u[0], u[n - 1]);
        let nodes = HermiteNodes {
            x: u,
            y: pos,
            dy: vel,
            ddy: acc,
        };
        let node_acc = nodes.ddy.is_none().then(|| nodes.averaged_node_second_derivatives());
        let repr = Repr::Sampled(Arc::new(Samples { nodes, node_acc }));
        Ok(BaseCurve { domain, repr })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Sample parameters when the curve is sampled.
    pub fn nodes(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Sampled(s) => Some(&s.nodes.x),
            Repr::Noded(_, x) => Some(x),
            Repr::Analytic(_) => None,
        }
    }

    /// Whether node second derivatives were supplied (quintic segments).
    pub fn has_second_derivatives(&self) -> bool {
        match &self.repr {
            Repr::Analytic(_) | Repr::Noded(..) => true,
            Repr::Sampled(s) => s.node_acc.is_none(),
        }
    }

    pub fn contains(&self, u: f64) -> bool {
        let slack = DOMAIN_SLACK * (1.0 + self.domain.0.abs().max(self.domain.1.abs()));
        u >= self.domain.0 - slack && u <= self.domain.1 + slack
    }

    pub fn eval(&self, u: f64) -> Result<Jet> {
        if !self.contains(u) || u.is_nan() {
            return Err(Error::DomainViolation {
                value: u,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok(self.jet(u.clamp(self.domain.0, self.domain.1)))
    }

    /// Unchecked evaluation; callers guarantee `u` is in the domain.
    pub(crate) fn jet(&self, u: f64) -> Jet {
        match &self.repr {
            Repr::Analytic(f) | Repr::Noded(f, _) => f(u),
            Repr::Sampled(s) => {
                if let Some(node_acc) = &s.node_acc {
                    let j = s.nodes.x.partition_point(|&x| x < u);
                    if j < s.nodes.x.len() && s.nodes.x[j] == u {
                        return Jet {
                            pos: s.nodes.y[j],
                            vel: s.nodes.dy[j],
                            acc: node_acc[j],
                        };
                    }
                }
                let v = s.nodes.eval(u);
                Jet {
                    pos: v[0],
                    vel: v[1],
                    acc: v[2],
                }
            }
        }
    }

    /// Uniform grid of `n >= 2` parameters spanning the domain.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.domain;
        let n = n.max(2);
        (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect()
    }

    /// Length of the arc between `a` and `b` (negative when `b < a`).
    pub fn arclength(&self, a: f64, b: f64) -> Result<f64> {
        for u in [a, b] {
            self.eval(u)?;
        }
        if b < a {
            return Ok(-self.arclength(b, a)?);
        }
        let speed = |u: f64| self.jet(u).speed();
        match self.nodes() {
            None => Ok(quadrature::adaptive(a, b, ARCLENGTH_TOL, speed)),
            Some(x) => {
                // integrate segment by segment; the interpolant is only C^1 at nodes
                let mut cuts: Vec<f64> = vec![a];
                cuts.extend(x.iter().copied().filter(|&t| t > a && t < b));
                cuts.push(b);
                let tol = ARCLENGTH_TOL / cuts.len() as f64;
                Ok(cuts
                    .windows(2)
                    .map(|w| quadrature::adaptive(w[0], w[1], tol, speed))
                    .sum())
            }
        }
    }

    /// Arclength from the left end at each (sorted) parameter.
    pub fn cumulative_arclength(&self, params: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(params.len());
        let mut s = 0.0;
        let mut prev = self.domain.0;
        for &u in params {
            s += self.arclength(prev, u)?;
            out.push(s);
            prev = u;
        }
        Ok(out)
    }

    pub fn kinematics(&self, u: f64) -> Result<Kinematics> {
        let jet = self.eval(u)?;
        let speed = jet.speed();
        if speed == 0.0 {
            return Err(Error::ZeroSpeed { u });
        }
        Ok(Kinematics {
            speed,
            tangent: jet.vel / speed,
            curvature: jet.curvature(),
            arclength: self.arclength(self.domain.0, u)?,
        })
    }

    /// Checks `|gamma'| > 0` on a uniform grid of `n` points.
    pub fn check_immersed(&self, n: usize) -> Result<()> {
        let scale = self.speed_scale(n);
        for u in self.grid(n) {
            if self.jet(u).speed() <= 1e-12 * scale.max(1e-300) {
                return Err(Error::ZeroSpeed { u });
            }
        }
        Ok(())
    }

    fn speed_scale(&self, n: usize) -> f64 {
        self.grid(n)
            .into_iter()
            .map(|u| self.jet(u).speed())
            .fold(0.0, f64::max)
    }

    /// Resamples onto `n` uniform parameters keeping `gamma''`.
    pub fn resample(&self, n: usize) -> Result<BaseCurve> {
        let u = self.grid(n);
        let jets: Vec<Jet> = u.iter().map(|&t| self.jet(t)).collect();
        BaseCurve::sampled(
            u,
            jets.iter().map(|j| j.pos).collect(),
            jets.iter().map(|j| j.vel).collect(),
            Some(jets.iter().map(|j| j.acc).collect()),
        )
    }

    /// The same point set traversed backwards over the same domain.
    pub fn reversed(&self) -> BaseCurve {
        let this = self.clone();
        let (a, b) = self.domain;
        BaseCurve::from_fn(self.domain, move |u| {
            let j = this.jet(a + b - u);
            Jet {
                pos: j.pos,
                vel: -j.vel,
                acc: j.acc,
            }
        })
        .expect("valid domain")
    }

    /// `e^{i alpha} gamma`.
    pub fn rotated(&self, alpha: f64) -> BaseCurve {
        let this = self.clone();
        let r = C64::from_polar(1.0, alpha);
        BaseCurve::from_fn(self.domain, move |u| {
            let j = this.jet(u);
            Jet {
                pos: r * j.pos,
                vel: r * j.vel,
                acc: r * j.acc,
            }
        })
        .expect("valid domain")
    }

    /// Restriction to `[a, b]` inside the domain.
    pub fn restrict(&self, a: f64, b: f64) -> Result<BaseCurve> {
        self.eval(a)?;
        self.eval(b)?;
        let this = self.clone();
        BaseCurve::from_fn((a, b), move |u| this.jet(u))
    }
}

/// Support function data `(q, q', q'', q''')` at an angle.
pub type SupportJet = [f64; 4];

type SupportFn = dyn Fn(f64) -> SupportJet + Send + Sync;

#[derive(Clone)]
enum SupportRepr {
    Analytic(Arc<SupportFn>),
    Sampled(Arc<HermiteNodes<f64>>),
}

/// Strictly convex arc described by its support function over an angle range.
#[derive(Clone)]
pub struct SupportCurve {
    domain: (f64, f64),
    repr: SupportRepr,
    /// +1 when the source curve turned counter-clockwise, -1 when it was
    /// traversed the other way (angle then runs against the source parameter).
    pub orientation: f64,
}

impl fmt::Debug for SupportCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupportCurve")
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl SupportCurve {
    pub fn from_fn<F>(domain: (f64, f64), f: F) -> Result<Self>
    where
        F: Fn(f64) -> SupportJet + Send + Sync + 'static,
    {
        if !(domain.0 < domain.1) {
            return Err(Error::InvalidInput(format!("bad angle domain {domain:?}")));
        }
        Ok(SupportCurve {
            domain,
            repr: SupportRepr::Analytic(Arc::new(f)),
            orientation: 1.0,
        })
    }

    /// Quintic Hermite support function from samples of `q, q', q''`.
    pub fn sampled(theta: Vec<f64>, q: Vec<f64>, dq: Vec<f64>, ddq: Vec<f64>) -> Result<Self> {
        if theta.len() < 3 {
            return Err(Error::DegenerateArc(format!(
                "{} angle samples; need at least 3",
                theta.len()
            )));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("angle grid not strictly increasing".into()));
        }
        let domain = (theta[0], theta[theta.len() - 1]);
        Ok(SupportCurve {
            domain,
            repr: SupportRepr::Sampled(Arc::new(HermiteNodes {
                x: theta,
                y: q,
                dy: dq,
                ddy: Some(ddq),
            })),
            orientation: 1.0,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn eval(&self, theta: f64) -> Result<SupportJet> {
        let (a, b) = self.domain;
        let slack = DOMAIN_SLACK * (1.0 + a.abs().max(b.abs()));
        if !(theta >= a - slack && theta <= b + slack) {
            return Err(Error::DomainViolation { value: theta, lo: a, hi: b });
        }
        Ok(self.jet(theta.clamp(a, b)))
    }

    pub(crate) fn jet(&self, theta: f64) -> SupportJet {
        match &self.repr {
            SupportRepr::Analytic(f) => f(theta),
            SupportRepr::Sampled(s) => s.eval(theta),
        }
    }

    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.domain;
        let n = n.max(2);
        (0..n)
            .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect()
    }

    /// Checks `q + q'' > 0` on `n` uniform angles (and at sample nodes).
    pub fn check_convex(&self, n: usize) -> Result<()> {
        let mut thetas = self.grid(n);
        if let SupportRepr::Sampled(s) = &self.repr {
            thetas.extend_from_slice(&s.x);
        }
        for t in thetas {
            let j = self.jet(t);
            let radius = j[0] + j[2];
            if !(radius > 1e-12) {
                return Err(Error::ConvexityViolation { theta: t, value: radius });
            }
        }
        Ok(())
    }
}

/// Default density used when checking curvature and convexity.
pub const CHECK_SAMPLES: usize = 512;

/// Curve with `gamma(theta) = (q + i q') e^{i theta}`.
pub fn from_support(sc: &SupportCurve) -> Result<BaseCurve> {
    sc.check_convex(CHECK_SAMPLES)?;
    let sc = sc.clone();
    BaseCurve::from_fn(sc.domain, move |theta| {
        let [q, dq, ddq, dddq] = sc.jet(theta);
        let e = C64::from_polar(1.0, theta);
        let i = C64::i();
        Jet {
            pos: C64::new(q, dq) * e,
            vel: i * e * (q + ddq),
            acc: i * e * (dq + dddq) - e * (q + ddq),
        }
    })
}

/// Writes a strictly convex curve by its support function on `samples`
/// uniform normal angles.
///
/// The angle is accumulated by integrating `theta' = |gamma'| k`. Curves
/// turning clockwise are traversed backwards and flagged with
/// `orientation = -1`.
pub fn support_parameterize(c: &BaseCurve, samples: usize) -> Result<SupportCurve> {
    if samples < 3 {
        return Err(Error::DegenerateArc(format!("{samples} samples requested; need at least 3")));
    }
    let check = c.grid(CHECK_SAMPLES.max(samples));
    let mut probe: Vec<f64> = check.clone();
    if let Some(x) = c.nodes() {
        probe.extend_from_slice(x);
    }
    let k0 = c.eval(c.domain.0)?.curvature();
    for &u in &probe {
        let j = c.eval(u)?;
        if j.speed() == 0.0 {
            return Err(Error::ZeroSpeed { u });
        }
        let k = j.curvature();
        if !(k * k0.signum() > 1e-12) || !k.is_finite() {
            return Err(Error::CurvatureVanishes { u });
        }
    }
    let orientation = k0.signum();
    let curve = if orientation > 0.0 { c.clone() } else { c.reversed() };
    let turning = |u: f64| {
        let j = curve.jet(u);
        j.speed() * j.curvature()
    };

    // cumulative angle table on the check grid
    let mut table = Vec::with_capacity(check.len());
    let start = curve.jet(check[0]);
    let theta0 = start.vel.arg() - std::f64::consts::FRAC_PI_2;
    let mut acc = theta0;
    table.push(acc);
    for w in check.windows(2) {
        acc += quadrature::adaptive(w[0], w[1], 1e-14, turning);
        table.push(acc);
    }
    let theta1 = acc;
    if !(theta1 > theta0) {
        return Err(Error::DegenerateArc("normal angle does not advance".into()));
    }

    let angle_at = |u: f64| {
        let j = check.partition_point(|&x| x <= u).saturating_sub(1).min(check.len() - 2);
        table[j] + quadrature::adaptive(check[j], u, 1e-14, turning)
    };
    let thetas: Vec<f64> = (0..samples)
        .map(|i| {
            if i + 1 == samples {
                theta1
            } else {
                theta0 + (theta1 - theta0) * i as f64 / (samples - 1) as f64
            }
        })
        .collect();

    let mut q = Vec::with_capacity(samples);
    let mut dq = Vec::with_capacity(samples);
    let mut ddq = Vec::with_capacity(samples);
    for &theta in &thetas {
        // invert the angle map by safeguarded Newton
        let j = table.partition_point(|&t| t <= theta).saturating_sub(1).min(table.len() - 2);
        let (mut lo, mut hi) = (check[j], check[j + 1]);
        let mut u = lo + (hi - lo) * ((theta - table[j]) / (table[j + 1] - table[j])).clamp(0.0, 1.0);
        for _ in 0..60 {
            let f = angle_at(u) - theta;
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let step = f / turning(u);
            let mut next = u - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 1e-15 * (1.0 + u.abs()) {
                u = next;
                break;
            }
            u = next;
        }
        let jet = curve.jet(u);
        let w = jet.pos * C64::from_polar(1.0, -theta);
        let radius = 1.0 / jet.curvature();
        q.push(w.re);
        dq.push(w.im);
        ddq.push(radius - w.re);
    }
    let mut sc = SupportCurve::sampled(thetas, q, dq, ddq)?;
    sc.orientation = orientation;
    Ok(sc)
}
