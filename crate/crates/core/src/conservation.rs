//! The conserved flux of a twizzler.
//!
//! For a surface of mean curvature `H` and the screw Killing field `Y`, the
//! quantity `omega = oint Y.eta - H iint Y.nu` over a helix and a 2-chain
//! capping it ("shaving") does not depend on the helix. For twizzlers it has
//! the closed form
//!
//! ```text
//! R^3: C = (2 pi / sqrt g) m (gamma' . i gamma) - H pi |gamma|^2
//! S^3: C = (2 pi / sqrt g) m f^2 (gamma' . i gamma) - H pi |gamma|^2
//! H^3: C = (2 pi / sqrt g) m f^2 (gamma' . i gamma) + H pi |gamma|^2
//! ```
//!
//! With the conormal pointing towards increasing `u` and the shaving
//! orientations fixed below, the quadrature value is `omega = -C` pointwise,
//! for every base curve. See [`FLUX_SIGN`].

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::curve::C64;
use crate::error::{Error, Result};
use crate::quadrature::{doubling, doubling_2d};
use crate::spaceform::{AmbientVector, SpaceFormKind};
use crate::twizzler::Twizzler;

/// `omega = FLUX_SIGN * C` in every spaceform.
pub const FLUX_SIGN: f64 = -1.0;

/// Radii below this make the shaving degenerate.
const ZERO_RADIUS: f64 = 1e-12;

/// Closed-form conserved quantity at `u` for mean curvature `h`.
pub fn conserved_quantity(t: &Twizzler, u: f64, h: f64) -> Result<f64> {
    let jet = t.base().eval(u)?;
    let sqrt_g = t.sqrt_g(u)?;
    let m = t.pitch();
    let r2 = jet.pos.norm_sqr();
    let a = jet.angular();
    Ok(match t.space().kind {
        SpaceFormKind::Euclidean3 => TAU / sqrt_g * m * a - h * PI * r2,
        SpaceFormKind::Sphere3 => TAU / sqrt_g * m * (1.0 - r2) * a - h * PI * r2,
        SpaceFormKind::Hyperbolic3 => TAU / sqrt_g * m * (1.0 + r2) * a + h * PI * r2,
    })
}

/// `oint <Y, eta> dl` along the helix `v in [0, 2 pi]` through `u0`.
pub fn flux_conormal(t: &Twizzler, u0: f64) -> Result<f64> {
    let sf = t.space();
    // surface the first error instead of integrating NaNs
    t.helix_frame(u0, 0.0)?;
    let r = doubling(0.0, TAU, |v| {
        let v = slice(t, v);
        match t.helix_frame(u0, v) {
            Ok(fr) => {
                let p = t.immerse(u0, v).expect("checked above");
                sf.metric(&sf.killing(&p), &fr.eta) * sf.metric(&fr.tv, &fr.tv).sqrt()
            }
            Err(_) => f64::NAN,
        }
    });
    Ok(r.value)
}

/// Where the integrands are evaluated for the helix angle `v`.
///
/// Both flux integrands are invariant under the screw isometry (which fixes
/// `Y`). In H^3 the ambient coordinates grow like `cosh(mv)` and the Lorentz
/// products of tangent vectors lose all digits to cancellation once `mv` is a
/// few units, so the integrand is taken on the congruent slice `v = 0`.
fn slice(t: &Twizzler, v: f64) -> f64 {
    match t.space().kind {
        SpaceFormKind::Hyperbolic3 => 0.0,
        _ => v,
    }
}

/// Parametric shaving `S(v, t)` with `S_v`, `S_t`; `t_max` is the upper
/// end of the `t` range.
fn shaving(t: &Twizzler, g0: C64) -> (f64, impl Fn(f64, f64) -> [AmbientVector; 3]) {
    let kind = t.space().kind;
    let m = t.pitch();
    let r = g0.norm();
    let dir = if r > 0.0 { g0 / r } else { C64::new(1.0, 0.0) };
    let t_max = match kind {
        SpaceFormKind::Euclidean3 => 1.0,
        SpaceFormKind::Sphere3 => r.min(1.0).asin(),
        // arccosh f with f = sqrt(1 + r^2)
        SpaceFormKind::Hyperbolic3 => r.asinh(),
    };
    let vec = move |z: C64, a: f64, b: f64| AmbientVector::from_array(kind, [z.re, z.im, a, b]);
    let eval = move |v: f64, s: f64| {
        let e = C64::from_polar(1.0, v);
        let i = C64::i();
        match kind {
            SpaceFormKind::Euclidean3 => [
                vec(e * g0 * s, m * v, 0.0),
                vec(i * e * g0 * s, m, 0.0),
                vec(e * g0, 0.0, 0.0),
            ],
            SpaceFormKind::Sphere3 => {
                let (sn, cs) = s.sin_cos();
                let (smv, cmv) = (m * v).sin_cos();
                [
                    vec(e * dir * sn, cmv * cs, smv * cs),
                    vec(i * e * dir * sn, -m * smv * cs, m * cmv * cs),
                    vec(e * dir * cs, -cmv * sn, -smv * sn),
                ]
            }
            SpaceFormKind::Hyperbolic3 => {
                let (sn, cs) = (s.sinh(), s.cosh());
                let (smv, cmv) = ((m * v).sinh(), (m * v).cosh());
                [
                    vec(e * dir * sn, cs * smv, cs * cmv),
                    vec(i * e * dir * sn, m * cs * cmv, m * cs * smv),
                    vec(e * dir * cs, sn * smv, sn * cmv),
                ]
            }
        }
    };
    (t_max, eval)
}

/// `iint <Y, nu> dS` over the shaving capping the helix through `u0`.
///
/// The area element is oriented so that the result is `-pi |gamma|^2` in
/// R^3 and S^3 and `+pi |gamma|^2` in H^3, matching the sign with which `H`
/// enters the closed form.
pub fn flux_shaving(t: &Twizzler, u0: f64) -> Result<f64> {
    let g0 = t.base().eval(u0)?.pos;
    let sf = t.space();
    if t.space().kind == SpaceFormKind::Sphere3 && g0.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideSphere { u: u0, radius: g0.norm() });
    }
    if g0.norm() <= ZERO_RADIUS {
        // the t-range (R^3: the disk itself) collapses
        return Ok(0.0);
    }
    let (t_max, s) = shaving(t, g0);
    let r = doubling_2d((0.0, TAU), (0.0, t_max), |v, tt| {
        let [p, sv, st] = s(slice(t, v), tt);
        let n = match sf.kind {
            SpaceFormKind::Hyperbolic3 => sf.normal_of(&p, &st, &sv),
            _ => sf.normal_of(&p, &sv, &st),
        };
        sf.metric(&sf.killing(&p), &n)
    });
    Ok(r.value)
}

/// Per-sample flux data and summary statistics.
#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    pub h: f64,
    pub u: Vec<f64>,
    pub conormal: Vec<f64>,
    pub shaving: Vec<f64>,
    /// `conormal - H * shaving`.
    pub omega: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub median_c: f64,
    /// Max deviation of the closed form from its median.
    pub max_dev: f64,
    /// Max deviation of the quadrature value from its median.
    pub max_dev_omega: f64,
    /// Max of `|omega - FLUX_SIGN * C|`.
    pub max_discrepancy: f64,
}

impl FluxReport {
    /// Largest deviation from constancy across both methods.
    pub fn deviation(&self) -> f64 {
        self.max_dev.max(self.max_dev_omega)
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.deviation() <= tol
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "u,omega,closed_form,abs_diff")?;
        for i in 0..self.u.len() {
            let diff = (self.omega[i] - FLUX_SIGN * self.closed_form[i]).abs();
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.3e}",
                self.u[i], self.omega[i], self.closed_form[i], diff
            )?;
        }
        writeln!(
            w,
            "# median_C={:.17e} max_dev={:.3e} max_dev_omega={:.3e} max_discrepancy={:.3e}",
            self.median_c, self.max_dev, self.max_dev_omega, self.max_discrepancy
        )
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn max_deviation(values: &[f64], center: f64) -> f64 {
    values.iter().map(|x| (x - center).abs()).fold(0.0, f64::max)
}

/// Evaluates both the quadrature flux and the closed form at every sample.
pub fn check_constancy(t: &Twizzler, h: f64, u_samples: &[f64]) -> Result<FluxReport> {
    if u_samples.is_empty() {
        return Err(Error::InvalidInput("no u samples".into()));
    }
    let rows: Vec<(f64, f64, f64)> = u_samples
        .par_iter()
        .map(|&u| Ok((flux_conormal(t, u)?, flux_shaving(t, u)?, conserved_quantity(t, u, h)?)))
        .collect::<Result<_>>()?;
    let conormal: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let shaving: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let closed_form: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let omega: Vec<f64> = conormal.iter().zip(&shaving).map(|(a, b)| a - h * b).collect();
    let median_c = median(&closed_form);
    let median_omega = median(&omega);
    let max_discrepancy = omega
        .iter()
        .zip(&closed_form)
        .map(|(w, c)| (w - FLUX_SIGN * c).abs())
        .fold(0.0, f64::max);
    Ok(FluxReport {
        h,
        u: u_samples.to_vec(),
        max_dev: max_deviation(&closed_form, median_c),
        max_dev_omega: max_deviation(&omega, median_omega),
        conormal,
        shaving,
        omega,
        closed_form,
        median_c,
        max_discrepancy,
    })
}

/// Closed-form `C` only, on many samples (cheap constancy check).
pub fn closed_form_profile(t: &Twizzler, h: f64, u_samples: &[f64]) -> Result<Vec<f64>> {
    u_samples.par_iter().map(|&u| conserved_quantity(t, u, h)).collect()
}

/// The `(H, C, M)` triple tied by `C = -pi M`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConservationData {
    pub h: f64,
    pub c: f64,
    pub m_level: Option<f64>,
    /// Max `|C(u) - median C|`.
    pub deviation: f64,
    /// Max `|M(u) - median M|` when `M` was fitted along the curve.
    pub m_deviation: Option<f64>,
    /// Max `|C(u) + pi M(u)|` over the samples.
    pub link_residual: Option<f64>,
}

impl ConservationData {
    pub fn from_c(h: f64, c: f64) -> Self {
        ConservationData {
            h,
            c,
            m_level: Some(-c / PI),
            deviation: 0.0,
            m_deviation: None,
            link_residual: None,
        }
    }

    pub fn from_m(h: f64, m_level: f64) -> Self {
        Self::from_c(h, -PI * m_level)
    }
}
