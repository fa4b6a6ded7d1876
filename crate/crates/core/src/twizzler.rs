//! Twizzlers: surfaces swept by a planar base curve under a screw motion.
//!
//! With `gamma` the base curve and `m > 0` the pitch,
//!
//! * R^3: `T(u, v) = (e^{iv} gamma(u), m v)`,
//! * S^3: `T(u, v) = (e^{iv} gamma(u), e^{imv} f(u))` with `f = sqrt(1 - |gamma|^2)`,
//! * H^3: `T(u, v) = (e^{iv} gamma(u), f(u) sinh mv, f(u) cosh mv)` with `f = sqrt(1 + |gamma|^2)`.
//!
//! The unit normal is oriented so that the trace of the second fundamental
//! form equals the constant `H` that enters the closed-form conserved
//! quantity of `crate::conservation`. In R^3 that is `T_v x T_u`.

use std::io::Write;

use rayon::prelude::*;

use crate::curve::{dot, BaseCurve, Jet, C64};
use crate::error::{Error, Result};
use crate::spaceform::{AmbientVector, SpaceForm, SpaceFormKind};

/// Area densities at or below this are treated as degenerate.
pub const DEGENERATE_SQRT_G: f64 = 1e-12;
/// Base step of the finite-difference oracle (scaled by `max(1, |u|)`).
pub const FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Twizzler {
    sf: SpaceForm,
    base: BaseCurve,
    m: f64,
}

/// `f`, `f'`, `f''` of the curved-case profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
}

/// Point and analytic partial derivatives up to second order.
#[derive(Debug, Clone, Copy)]
pub struct Partials {
    pub p: AmbientVector,
    pub tu: AmbientVector,
    pub tv: AmbientVector,
    pub tuu: AmbientVector,
    pub tuv: AmbientVector,
    pub tvv: AmbientVector,
}

#[derive(Debug, Clone, Copy)]
pub struct FundamentalData {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m2: f64,
    pub n2: f64,
    pub sqrt_g: f64,
    /// Mean curvature as the trace of the second fundamental form.
    pub h: f64,
    pub nu: AmbientVector,
}

#[derive(Debug, Clone, Copy)]
pub struct FrameAtPoint {
    pub tu: AmbientVector,
    pub tv: AmbientVector,
    /// Unit conormal of the helix, pointing towards increasing `u`.
    pub eta: AmbientVector,
    pub nu: AmbientVector,
}

impl Twizzler {
    pub fn new(sf: SpaceForm, base: BaseCurve, m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidPitch(m));
        }
        Ok(Twizzler { sf, base, m })
    }

    pub fn space(&self) -> SpaceForm {
        self.sf
    }

    pub fn base(&self) -> &BaseCurve {
        &self.base
    }

    pub fn pitch(&self) -> f64 {
        self.m
    }

    fn kind(&self) -> SpaceFormKind {
        self.sf.kind
    }

    /// Profile `f` and its derivatives; `None` in R^3.
    pub fn profile(&self, u: f64, jet: &Jet) -> Result<Option<Profile>> {
        let r2 = jet.pos.norm_sqr();
        let gg1 = dot(jet.pos, jet.vel);
        let speed2 = jet.vel.norm_sqr();
        let gg2 = dot(jet.pos, jet.acc);
        match self.kind() {
            SpaceFormKind::Euclidean3 => Ok(None),
            SpaceFormKind::Sphere3 => {
                let r = r2.sqrt();
                if r > 1.0 + 1e-12 {
                    return Err(Error::OutsideSphere { u, radius: r });
                }
                let f = (1.0 - r2).max(0.0).sqrt();
                if f == 0.0 {
                    return Err(Error::DegenerateMetric { u, sqrt_g: 0.0 });
                }
                let df = -gg1 / f;
                let ddf = -(speed2 + gg2 + df * df) / f;
                Ok(Some(Profile { f, df, ddf }))
            }
            SpaceFormKind::Hyperbolic3 => {
                let f = (1.0 + r2).sqrt();
                let df = gg1 / f;
                let ddf = (speed2 + gg2 - df * df) / f;
                Ok(Some(Profile { f, df, ddf }))
            }
        }
    }

    /// `f` alone, which unlike [`Twizzler::profile`] is defined on the axis.
    pub fn profile_value(&self, u: f64) -> Result<f64> {
        let r2 = self.base.eval(u)?.pos.norm_sqr();
        match self.kind() {
            SpaceFormKind::Euclidean3 => Ok(0.0),
            SpaceFormKind::Sphere3 => {
                if r2.sqrt() > 1.0 + 1e-12 {
                    return Err(Error::OutsideSphere { u, radius: r2.sqrt() });
                }
                Ok((1.0 - r2).max(0.0).sqrt())
            }
            SpaceFormKind::Hyperbolic3 => Ok((1.0 + r2).sqrt()),
        }
    }

    fn screw(&self, v: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        // second factor W(v) with W' and W''
        let mv = self.m * v;
        let m = self.m;
        match self.kind() {
            SpaceFormKind::Sphere3 => {
                let (s, c) = mv.sin_cos();
                ([c, s], [-m * s, m * c], [-m * m * c, -m * m * s])
            }
            _ => {
                let (s, c) = (mv.sinh(), mv.cosh());
                ([s, c], [m * c, m * s], [m * m * s, m * m * c])
            }
        }
    }

    fn vec(&self, z: C64, w: [f64; 2]) -> AmbientVector {
        AmbientVector::from_array(self.kind(), [z.re, z.im, w[0], w[1]])
    }

    pub fn immerse(&self, u: f64, v: f64) -> Result<AmbientVector> {
        let jet = self.base.eval(u)?;
        let z = C64::from_polar(1.0, v) * jet.pos;
        let p = match self.kind() {
            SpaceFormKind::Euclidean3 => self.vec(z, [self.m * v, 0.0]),
            _ => {
                let f = self.profile_value(u)?;
                let (w, _, _) = self.screw(v);
                self.vec(z, [f * w[0], f * w[1]])
            }
        };
        Ok(p)
    }

    pub fn partials(&self, u: f64, v: f64) -> Result<Partials> {
        let jet = self.base.eval(u)?;
        let e = C64::from_polar(1.0, v);
        let i = C64::i();
        let (g, g1, g2) = (e * jet.pos, e * jet.vel, e * jet.acc);
        Ok(match self.profile(u, &jet)? {
            None => Partials {
                p: self.vec(g, [self.m * v, 0.0]),
                tu: self.vec(g1, [0.0, 0.0]),
                tv: self.vec(i * g, [self.m, 0.0]),
                tuu: self.vec(g2, [0.0, 0.0]),
                tuv: self.vec(i * g1, [0.0, 0.0]),
                tvv: self.vec(-g, [0.0, 0.0]),
            },
            Some(pr) => {
                let (w, w1, w2) = self.screw(v);
                let sc = |a: f64, x: [f64; 2]| [a * x[0], a * x[1]];
                Partials {
                    p: self.vec(g, sc(pr.f, w)),
                    tu: self.vec(g1, sc(pr.df, w)),
                    tv: self.vec(i * g, sc(pr.f, w1)),
                    tuu: self.vec(g2, sc(pr.ddf, w)),
                    tuv: self.vec(i * g1, sc(pr.df, w1)),
                    tvv: self.vec(-g, sc(pr.f, w2)),
                }
            }
        })
    }

    /// Oriented unit normal at `p` for tangent vectors `tu`, `tv`.
    fn unit_normal(&self, u: f64, p: &AmbientVector, tu: &AmbientVector, tv: &AmbientVector) -> Result<AmbientVector> {
        let n = match self.kind() {
            SpaceFormKind::Hyperbolic3 => self.sf.normal_of(p, tu, tv),
            _ => self.sf.normal_of(p, tv, tu),
        };
        let len = self.sf.metric(&n, &n).max(0.0).sqrt();
        if len <= DEGENERATE_SQRT_G {
            return Err(Error::DegenerateMetric { u, sqrt_g: len });
        }
        Ok(n * (1.0 / len))
    }

    fn assemble(&self, u: f64, d: &Partials) -> Result<FundamentalData> {
        let g = |a: &AmbientVector, b: &AmbientVector| self.sf.metric(a, b);
        let (e, f, gg) = (g(&d.tu, &d.tu), g(&d.tu, &d.tv), g(&d.tv, &d.tv));
        let det = e * gg - f * f;
        let sqrt_g = det.max(0.0).sqrt();
        if sqrt_g <= DEGENERATE_SQRT_G {
            return Err(Error::DegenerateMetric { u, sqrt_g });
        }
        let nu = self.unit_normal(u, &d.p, &d.tu, &d.tv)?;
        let (l, m2, n2) = (g(&d.tuu, &nu), g(&d.tuv, &nu), g(&d.tvv, &nu));
        Ok(FundamentalData {
            e,
            f,
            g: gg,
            l,
            m2,
            n2,
            sqrt_g,
            h: (gg * l - 2.0 * f * m2 + e * n2) / det,
            nu,
        })
    }

    /// Fundamental forms on the helix through `u` (evaluated at `v = 0`;
    /// everything but the normal is independent of `v`).
    pub fn fundamental_forms(&self, u: f64) -> Result<FundamentalData> {
        self.fundamental_forms_at(u, 0.0)
    }

    pub fn fundamental_forms_at(&self, u: f64, v: f64) -> Result<FundamentalData> {
        let d = self.partials(u, v)?;
        self.assemble(u, &d)
    }

    pub fn mean_curvature(&self, u: f64) -> Result<f64> {
        Ok(self.fundamental_forms(u)?.h)
    }

    pub fn sqrt_g(&self, u: f64) -> Result<f64> {
        Ok(self.fundamental_forms(u)?.sqrt_g)
    }

    /// Fundamental forms from central differences of [`Twizzler::immerse`]
    /// with one Richardson level. Independent of the analytic partials and
    /// of `gamma''`; used as an oracle.
    pub fn fundamental_forms_fd(&self, u: f64, v: f64) -> Result<FundamentalData> {
        let hu = FD_STEP * u.abs().max(1.0);
        let hv = FD_STEP * v.abs().max(1.0);
        let (a, b) = self.base.domain();
        if u - hu < a || u + hu > b {
            return Err(Error::DomainViolation { value: u, lo: a + hu, hi: b - hu });
        }
        let t = |du: f64, dv: f64| self.immerse(u + du, v + dv);
        let diff = |hu: f64, hv: f64| -> Result<[AmbientVector; 5]> {
            let c = t(0.0, 0.0)?;
            let (up, um, vp, vm) = (t(hu, 0.0)?, t(-hu, 0.0)?, t(0.0, hv)?, t(0.0, -hv)?);
            let (pp, pm, mp, mm) = (t(hu, hv)?, t(hu, -hv)?, t(-hu, hv)?, t(-hu, -hv)?);
            Ok([
                (up - um) * (0.5 / hu),
                (vp - vm) * (0.5 / hv),
                (up - c * 2.0 + um) * (1.0 / (hu * hu)),
                (pp - pm - mp + mm) * (0.25 / (hu * hv)),
                (vp - c * 2.0 + vm) * (1.0 / (hv * hv)),
            ])
        };
        let coarse = diff(hu, hv)?;
        let fine = diff(0.5 * hu, 0.5 * hv)?;
        let r: Vec<AmbientVector> = fine
            .iter()
            .zip(coarse.iter())
            .map(|(f, c)| (*f * 4.0 - *c) * (1.0 / 3.0))
            .collect();
        let d = Partials {
            p: self.immerse(u, v)?,
            tu: r[0],
            tv: r[1],
            tuu: r[2],
            tuv: r[3],
            tvv: r[4],
        };
        self.assemble(u, &d)
    }

    /// Tangents, helix conormal and normal at `(u0, v)`.
    pub fn helix_frame(&self, u0: f64, v: f64) -> Result<FrameAtPoint> {
        let d = self.partials(u0, v)?;
        let data = self.assemble(u0, &d)?;
        let eta = d.tu - d.tv * (data.f / data.g);
        let len = self.sf.metric(&eta, &eta).sqrt();
        Ok(FrameAtPoint {
            tu: d.tu,
            tv: d.tv,
            eta: eta * (1.0 / len),
            nu: data.nu,
        })
    }

    /// Samples an `nu x nv` grid of the surface and triangulates it.
    pub fn sample_mesh(&self, u_range: (f64, f64), v_range: (f64, f64), nu: usize, nv: usize) -> Result<Mesh> {
        if nu < 2 || nv < 2 {
            return Err(Error::InvalidInput(format!("mesh needs at least 2x2 samples, got {nu}x{nv}")));
        }
        if !(u_range.0 < u_range.1) || !(v_range.0 < v_range.1) {
            return Err(Error::InvalidInput(format!("degenerate mesh range {u_range:?} x {v_range:?}")));
        }
        for u in [u_range.0, u_range.1] {
            self.base.eval(u)?;
        }
        let lerp = |(a, b): (f64, f64), i: usize, n: usize| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let rows: Vec<Vec<(AmbientVector, AmbientVector)>> = (0..nu)
            .into_par_iter()
            .map(|i| {
                let u = lerp(u_range, i, nu);
                (0..nv)
                    .map(|j| {
                        let v = lerp(v_range, j, nv);
                        let d = self.partials(u, v)?;
                        let data = self.assemble(u, &d)?;
                        Ok((self.sf.renormalize(&d.p)?, data.nu))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let (vertices, normals) = rows.into_iter().flatten().unzip();
        let mut faces = Vec::with_capacity(2 * (nu - 1) * (nv - 1));
        for i in 0..nu - 1 {
            for j in 0..nv - 1 {
                let a = i * nv + j;
                let (b, c, d) = (a + nv, a + 1, a + nv + 1);
                // winding agrees with the surface normal
                faces.push([a, c, d]);
                faces.push([a, d, b]);
            }
        }
        Ok(Mesh {
            kind: self.kind(),
            vertices,
            normals,
            faces,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub kind: SpaceFormKind,
    pub vertices: Vec<AmbientVector>,
    pub normals: Vec<AmbientVector>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    /// 3D chart used for OBJ export: identity in R^3, stereographic
    /// projection from `(0, 0, 0, -1)` in S^3, Poincare ball in H^3.
    pub fn chart(&self, p: &AmbientVector) -> [f64; 3] {
        let c = p.raw();
        match self.kind {
            SpaceFormKind::Euclidean3 => [c[0], c[1], c[2]],
            SpaceFormKind::Sphere3 | SpaceFormKind::Hyperbolic3 => {
                let s = 1.0 / (1.0 + c[3]);
                [c[0] * s, c[1] * s, c[2] * s]
            }
        }
    }

    pub fn write_obj<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# twizzler mesh ({}), {} vertices", self.kind.tag(), self.vertices.len())?;
        for p in &self.vertices {
            let [x, y, z] = self.chart(p);
            writeln!(w, "v {x:.17e} {y:.17e} {z:.17e}")?;
        }
        for [a, b, c] in &self.faces {
            writeln!(w, "f {} {} {}", a + 1, b + 1, c + 1)?;
        }
        Ok(())
    }

    /// Raw ambient coordinates, one vertex per row.
    pub fn write_raw_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let names = ["x1", "x2", "x3", "x4"];
        writeln!(w, "{}", names[..self.kind.dim()].join(","))?;
        for p in &self.vertices {
            let row: Vec<String> = p.coords().iter().map(|x| format!("{x:.17e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
