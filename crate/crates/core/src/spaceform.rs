//! Ambient geometries: Euclidean 3-space, the round 3-sphere in R^4 and the
//! Lorentz (hyperboloid) model of hyperbolic 3-space in R^4.
//!
//! R^4 is identified with C x C through coordinates `(Re z, Im z, Re w, Im w)`,
//! and C with `span(e1, e2)` through `a + ib <-> a e1 + b e2`.
//!
//! The hyperbolic model uses the form `Q = diag(-1, -1, -1, 1)`, so points have
//! `<p, p> = 1` and tangent vectors are negative under `Q`. Everything that
//! measures lengths or areas on the surface goes through [`SpaceForm::metric`],
//! which is the positive definite metric `-Q` restricted to tangent spaces.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance within which a point counts as lying on the constraint.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceFormKind {
    Euclidean3,
    Sphere3,
    Hyperbolic3,
}

impl SpaceFormKind {
    pub fn dim(self) -> usize {
        match self {
            SpaceFormKind::Euclidean3 => 3,
            SpaceFormKind::Sphere3 | SpaceFormKind::Hyperbolic3 => 4,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            SpaceFormKind::Euclidean3 => "r3",
            SpaceFormKind::Sphere3 => "s3",
            SpaceFormKind::Hyperbolic3 => "h3",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "r3" | "e3" | "euclidean" => Some(SpaceFormKind::Euclidean3),
            "s3" | "sphere" => Some(SpaceFormKind::Sphere3),
            "h3" | "hyperbolic" => Some(SpaceFormKind::Hyperbolic3),
            _ => None,
        }
    }
}

/// An ambient vector: 3 components in R^3, 4 in the curved cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientVector {
    kind: SpaceFormKind,
    coords: [f64; 4],
}

impl AmbientVector {
    pub fn new(kind: SpaceFormKind, coords: &[f64]) -> Result<Self> {
        if coords.len() != kind.dim() {
            return Err(Error::DimensionMismatch {
                kind,
                expected: kind.dim(),
                got: coords.len(),
            });
        }
        let mut c = [0.0; 4];
        c[..coords.len()].copy_from_slice(coords);
        Ok(AmbientVector { kind, coords: c })
    }

    pub(crate) fn from_array(kind: SpaceFormKind, coords: [f64; 4]) -> Self {
        let mut c = coords;
        if kind.dim() == 3 {
            c[3] = 0.0;
        }
        AmbientVector { kind, coords: c }
    }

    pub fn zero(kind: SpaceFormKind) -> Self {
        AmbientVector {
            kind,
            coords: [0.0; 4],
        }
    }

    pub fn kind(&self) -> SpaceFormKind {
        self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.kind.dim()]
    }

    pub(crate) fn raw(&self) -> [f64; 4] {
        self.coords
    }

    /// Plain Euclidean dot product of the coordinate vectors.
    pub fn euclidean_dot(&self, other: &AmbientVector) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.euclidean_dot(self).sqrt()
    }
}

impl Index<usize> for AmbientVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

impl Add for AmbientVector {
    type Output = AmbientVector;
    fn add(self, rhs: AmbientVector) -> AmbientVector {
        debug_assert_eq!(self.kind, rhs.kind);
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(rhs.coords.iter()) {
            *a += b;
        }
        AmbientVector { kind: self.kind, coords: c }
    }
}

impl Sub for AmbientVector {
    type Output = AmbientVector;
    fn sub(self, rhs: AmbientVector) -> AmbientVector {
        self + (-rhs)
    }
}

impl Neg for AmbientVector {
    type Output = AmbientVector;
    fn neg(self) -> AmbientVector {
        self * -1.0
    }
}

impl Mul<f64> for AmbientVector {
    type Output = AmbientVector;
    fn mul(self, s: f64) -> AmbientVector {
        let mut c = self.coords;
        c.iter_mut().for_each(|a| *a *= s);
        AmbientVector { kind: self.kind, coords: c }
    }
}

/// Ambient geometry descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceForm {
    pub kind: SpaceFormKind,
}

impl SpaceForm {
    pub const EUCLIDEAN: SpaceForm = SpaceForm {
        kind: SpaceFormKind::Euclidean3,
    };
    pub const SPHERE: SpaceForm = SpaceForm {
        kind: SpaceFormKind::Sphere3,
    };
    pub const HYPERBOLIC: SpaceForm = SpaceForm {
        kind: SpaceFormKind::Hyperbolic3,
    };

    pub fn new(kind: SpaceFormKind) -> Self {
        SpaceForm { kind }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Diagonal weights of the ambient bilinear form.
    pub fn signature(&self) -> &'static [f64] {
        match self.kind {
            SpaceFormKind::Euclidean3 => &[1.0, 1.0, 1.0],
            SpaceFormKind::Sphere3 => &[1.0, 1.0, 1.0, 1.0],
            SpaceFormKind::Hyperbolic3 => &[-1.0, -1.0, -1.0, 1.0],
        }
    }

    fn check(&self, v: &AmbientVector) -> Result<()> {
        if v.kind != self.kind {
            return Err(Error::KindMismatch {
                left: self.kind,
                right: v.kind,
            });
        }
        Ok(())
    }

    /// The ambient bilinear form with the spaceform's signature.
    pub fn inner(&self, a: &AmbientVector, b: &AmbientVector) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.form(a, b))
    }

    pub(crate) fn form(&self, a: &AmbientVector, b: &AmbientVector) -> f64 {
        self.signature()
            .iter()
            .enumerate()
            .map(|(i, w)| w * a.coords[i] * b.coords[i])
            .sum()
    }

    /// Riemannian metric on tangent vectors (positive definite there).
    pub fn metric(&self, a: &AmbientVector, b: &AmbientVector) -> f64 {
        match self.kind {
            SpaceFormKind::Hyperbolic3 => -self.form(a, b),
            _ => self.form(a, b),
        }
    }

    /// Builds a point, accepting it if it lies on the constraint surface to
    /// [`CONSTRAINT_TOL`] and renormalizing the residual away.
    pub fn point(&self, coords: &[f64]) -> Result<AmbientVector> {
        let p = AmbientVector::new(self.kind, coords)?;
        if self.kind == SpaceFormKind::Euclidean3 {
            return Ok(p);
        }
        let residual = self.form(&p, &p) - 1.0;
        if residual.abs() > CONSTRAINT_TOL
            || (self.kind == SpaceFormKind::Hyperbolic3 && p.coords[3] <= 0.0)
        {
            return Err(Error::OffConstraint {
                kind: self.kind,
                residual,
            });
        }
        self.renormalize(&p)
    }

    /// Projects a point radially back onto the constraint surface.
    pub fn renormalize(&self, p: &AmbientVector) -> Result<AmbientVector> {
        self.check(p)?;
        match self.kind {
            SpaceFormKind::Euclidean3 => Ok(*p),
            _ => {
                let q = self.form(p, p);
                if q <= 0.0 || (self.kind == SpaceFormKind::Hyperbolic3 && p.coords[3] <= 0.0) {
                    return Err(Error::OffConstraint {
                        kind: self.kind,
                        residual: q - 1.0,
                    });
                }
                Ok(*p * (1.0 / q.sqrt()))
            }
        }
    }

    /// Screw-motion Killing field: translation along e3 in R^3, rotation of
    /// the second complex factor in S^3, boost of the last two coordinates in H^3.
    pub fn killing_field(&self, p: &AmbientVector) -> Result<AmbientVector> {
        self.check(p)?;
        Ok(self.killing(p))
    }

    pub(crate) fn killing(&self, p: &AmbientVector) -> AmbientVector {
        let c = p.coords;
        let y = match self.kind {
            SpaceFormKind::Euclidean3 => [0.0, 0.0, 1.0, 0.0],
            // (0, i w)
            SpaceFormKind::Sphere3 => [0.0, 0.0, -c[3], c[2]],
            // (0, [[0, 1], [1, 0]] w)
            SpaceFormKind::Hyperbolic3 => [0.0, 0.0, c[3], c[2]],
        };
        AmbientVector::from_array(self.kind, y)
    }

    pub fn project_tangent(&self, p: &AmbientVector, v: &AmbientVector) -> Result<AmbientVector> {
        self.check(p)?;
        self.check(v)?;
        Ok(self.tangent_part(p, v))
    }

    pub(crate) fn tangent_part(&self, p: &AmbientVector, v: &AmbientVector) -> AmbientVector {
        match self.kind {
            SpaceFormKind::Euclidean3 => *v,
            _ => *v - *p * (self.form(v, p) / self.form(p, p)),
        }
    }

    /// Oriented normal to the tangent plane spanned by `a`, `b` at `p`, with
    /// metric length equal to the area of the parallelogram `(a, b)`.
    ///
    /// R^3 uses `a x b`. In R^4 the generalized cross product
    /// `X(p, a, b)_i = det[p; a; b; e_i]` is orthogonal to all three
    /// arguments; the hyperbolic case raises the index with `Q` so that
    /// orthogonality holds for the Lorentz form.
    pub(crate) fn normal_of(
        &self,
        p: &AmbientVector,
        a: &AmbientVector,
        b: &AmbientVector,
    ) -> AmbientVector {
        match self.kind {
            SpaceFormKind::Euclidean3 => {
                let (a, b) = (a.coords, b.coords);
                AmbientVector::from_array(
                    self.kind,
                    [
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                        0.0,
                    ],
                )
            }
            SpaceFormKind::Sphere3 => {
                AmbientVector::from_array(self.kind, cross4(&p.coords, &a.coords, &b.coords))
            }
            SpaceFormKind::Hyperbolic3 => {
                let mut x = cross4(&p.coords, &a.coords, &b.coords);
                for (xi, w) in x.iter_mut().zip(self.signature()) {
                    *xi *= w;
                }
                AmbientVector::from_array(self.kind, x)
            }
        }
    }
}

/// `X_i = det[a; b; c; e_i]`.
fn cross4(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]) -> [f64; 4] {
    let det3 = |cols: [usize; 3]| {
        let m = |r: &[f64; 4], k: usize| r[cols[k]];
        m(a, 0) * (m(b, 1) * m(c, 2) - m(b, 2) * m(c, 1))
            - m(a, 1) * (m(b, 0) * m(c, 2) - m(b, 2) * m(c, 0))
            + m(a, 2) * (m(b, 0) * m(c, 1) - m(b, 1) * m(c, 0))
    };
    // Expanding along the last row: sign (-1)^(3 + i).
    [
        -det3([1, 2, 3]),
        det3([0, 2, 3]),
        -det3([0, 1, 3]),
        det3([0, 1, 2]),
    ]
}

impl SpaceForm {
    /// Applies the screw motion of pitch `m` by angle `v` to a point
    /// (`point = true`) or to a vector, which only sees its linear part.
    pub fn screw(&self, m: f64, v: f64, x: &AmbientVector, point: bool) -> AmbientVector {
        let c = x.coords;
        let (s, co) = v.sin_cos();
        let z = [co * c[0] - s * c[1], s * c[0] + co * c[1]];
        let w = match self.kind {
            SpaceFormKind::Euclidean3 => [c[2] + if point { m * v } else { 0.0 }, 0.0],
            SpaceFormKind::Sphere3 => {
                let (s, co) = (m * v).sin_cos();
                [co * c[2] - s * c[3], s * c[2] + co * c[3]]
            }
            SpaceFormKind::Hyperbolic3 => {
                let b = boost(m, v);
                [b[0][0] * c[2] + b[0][1] * c[3], b[1][0] * c[2] + b[1][1] * c[3]]
            }
        };
        AmbientVector::from_array(self.kind, [z[0], z[1], w[0], w[1]])
    }
}

/// The boost `B_m(v)` acting on the last two coordinates in H^3.
pub fn boost(m: f64, v: f64) -> [[f64; 2]; 2] {
    let (s, c) = ((m * v).sinh(), (m * v).cosh());
    [[c, s], [s, c]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn screw_is_an_isometry_fixing_the_killing_field() {
        for sf in [SpaceForm::EUCLIDEAN, SpaceForm::SPHERE, SpaceForm::HYPERBOLIC] {
            let p = match sf.kind {
                SpaceFormKind::Euclidean3 => AmbientVector::new(sf.kind, &[0.3, -1.0, 2.0]).unwrap(),
                SpaceFormKind::Sphere3 => sf.point(&[0.5, 0.5, 0.5, 0.5]).unwrap(),
                SpaceFormKind::Hyperbolic3 => sf.point(&[0.3, -0.4, 1.0, 2.25f64.sqrt()]).unwrap(),
            };
            let a = sf.tangent_part(&p, &AmbientVector::from_array(sf.kind, [0.2, 0.7, -0.1, 0.4]));
            let (m, v) = (1.3, 0.8);
            let (q, b) = (sf.screw(m, v, &p, true), sf.screw(m, v, &a, false));
            assert!((sf.metric(&a, &a) - sf.metric(&b, &b)).abs() < 1e-13);
            if sf.kind != SpaceFormKind::Euclidean3 {
                assert!((sf.form(&p, &p) - sf.form(&q, &q)).abs() < 1e-13);
            }
            let y = sf.screw(m, v, &sf.killing(&p), false);
            assert!((y - sf.killing(&q)).euclidean_norm() < 1e-13);
            let back = sf.screw(m, -v, &q, true);
            assert!((back - p).euclidean_norm() < 1e-13);
        }
    }

    fn v(kind: SpaceFormKind, c: &[f64]) -> AmbientVector {
        AmbientVector::new(kind, c).unwrap()
    }

    #[test]
    fn inner_products_follow_signature() {
        let e = SpaceForm::EUCLIDEAN;
        let e1 = v(e.kind, &[1.0, 0.0, 0.0]);
        assert_eq!(e.inner(&e1, &e1).unwrap(), 1.0);

        let h = SpaceForm::HYPERBOLIC;
        let e1 = v(h.kind, &[1.0, 0.0, 0.0, 0.0]);
        let e4 = v(h.kind, &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(h.inner(&e1, &e1).unwrap(), -1.0);
        assert_eq!(h.inner(&e4, &e4).unwrap(), 1.0);
    }

    #[test]
    fn inner_rejects_mismatched_vectors() {
        let e3 = v(SpaceFormKind::Euclidean3, &[1.0, 0.0, 0.0]);
        let s3 = v(SpaceFormKind::Sphere3, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            SpaceForm::EUCLIDEAN.inner(&e3, &s3),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            AmbientVector::new(SpaceFormKind::Sphere3, &[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 4, got: 3, .. })
        ));
    }

    #[test]
    fn killing_fields_at_reference_points() {
        let e = SpaceForm::EUCLIDEAN;
        let y = e.killing_field(&v(e.kind, &[3.0, -1.0, 7.0])).unwrap();
        assert_eq!(y.coords(), &[0.0, 0.0, 1.0]);

        let s = SpaceForm::SPHERE;
        let y = s.killing_field(&v(s.kind, &[0.0, 0.0, 1.0, 0.0])).unwrap();
        assert_eq!(y.coords(), &[0.0, 0.0, 0.0, 1.0]);

        let h = SpaceForm::HYPERBOLIC;
        let y = h.killing_field(&v(h.kind, &[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(y.coords(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn project_tangent_examples() {
        let e = SpaceForm::EUCLIDEAN;
        let p = v(e.kind, &[1.0, 2.0, 3.0]);
        let w = v(e.kind, &[0.5, -1.0, 2.0]);
        assert_eq!(e.project_tangent(&p, &w).unwrap(), w);

        let s = SpaceForm::SPHERE;
        let p = v(s.kind, &[0.0, 0.0, 0.0, 1.0]);
        let r = s.project_tangent(&p, &p).unwrap();
        assert!(r.euclidean_norm() < 1e-15);

        let h = SpaceForm::HYPERBOLIC;
        let p = v(h.kind, &[0.0, 0.0, 0.0, 1.0]);
        let w = v(h.kind, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(h.project_tangent(&p, &w).unwrap().coords(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn boost_examples() {
        assert_eq!(boost(3.0, 0.0), [[1.0, 0.0], [0.0, 1.0]]);
        let b = boost(2.0, 1.0);
        assert_eq!(b, [[2f64.cosh(), 2f64.sinh()], [2f64.sinh(), 2f64.cosh()]]);
        let (p, q) = (boost(1.0, 0.3), boost(1.0, -1.1));
        let r = boost(1.0, -0.8);
        for i in 0..2 {
            for j in 0..2 {
                let prod: f64 = (0..2).map(|k| p[i][k] * q[k][j]).sum();
                assert!((prod - r[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn point_construction_renormalizes_small_drift() {
        let s = SpaceForm::SPHERE;
        let p = s.point(&[0.6, 0.0, 0.8 + 1e-10, 0.0]).unwrap();
        assert!((s.form(&p, &p) - 1.0).abs() < 1e-15);
        assert!(s.point(&[0.6, 0.0, 0.9, 0.0]).is_err());
        let h = SpaceForm::HYPERBOLIC;
        assert!(h.point(&[0.0, 0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn normals_are_orthogonal_with_area_length() {
        let s = SpaceForm::SPHERE;
        let p = s.point(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        let a = s.tangent_part(&p, &v(s.kind, &[1.0, 0.0, 0.0, 0.0]));
        let b = s.tangent_part(&p, &v(s.kind, &[0.0, 0.3, 1.0, -0.2]));
        let n = s.normal_of(&p, &a, &b);
        for w in [&p, &a, &b] {
            assert!(s.form(&n, w).abs() < 1e-14);
        }
        let area2 = s.metric(&a, &a) * s.metric(&b, &b) - s.metric(&a, &b).powi(2);
        assert!((s.metric(&n, &n) - area2).abs() < 1e-14);

        let h = SpaceForm::HYPERBOLIC;
        let p = h.point(&[0.3, -0.4, 1.0, 2.25f64.sqrt()]).unwrap();
        let a = h.tangent_part(&p, &v(h.kind, &[1.0, 0.0, 0.0, 0.0]));
        let b = h.tangent_part(&p, &v(h.kind, &[0.0, 0.2, -1.0, 0.4]));
        let n = h.normal_of(&p, &a, &b);
        for w in [&p, &a, &b] {
            assert!(h.form(&n, w).abs() < 1e-13);
        }
        let area2 = h.metric(&a, &a) * h.metric(&b, &b) - h.metric(&a, &b).powi(2);
        assert!((h.metric(&n, &n) - area2).abs() < 1e-12);
    }

    fn sphere_point(x: [f64; 4]) -> Option<AmbientVector> {
        let n = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        (n > 1e-3).then(|| AmbientVector::from_array(SpaceFormKind::Sphere3, x) * (1.0 / n))
    }

    fn hyperbolic_point(x: [f64; 3]) -> AmbientVector {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        AmbientVector::from_array(
            SpaceFormKind::Hyperbolic3,
            [x[0], x[1], x[2], (1.0 + r2).sqrt()],
        )
    }

    /// Symmetrized derivative of Y along tangent vectors, by central differences
    /// along geodesic-free straight steps followed by tangent projection.
    fn killing_defect(sf: SpaceForm, p: AmbientVector, a: AmbientVector, b: AmbientVector) -> f64 {
        let eps = 1e-6;
        let dy = |dir: AmbientVector| {
            let plus = sf.renormalize(&(p + dir * eps)).unwrap();
            let minus = sf.renormalize(&(p - dir * eps)).unwrap();
            let d = (sf.killing(&plus) - sf.killing(&minus)) * (0.5 / eps);
            sf.tangent_part(&p, &d)
        };
        sf.metric(&dy(a), &b) + sf.metric(&dy(b), &a)
    }

    proptest! {
        #[test]
        fn killing_field_is_tangent_on_sphere(x in prop::array::uniform4(-1.0f64..1.0)) {
            if let Some(p) = sphere_point(x) {
                let y = SpaceForm::SPHERE.killing(&p);
                prop_assert!(SpaceForm::SPHERE.form(&y, &p).abs() < 1e-15);
            }
        }

        #[test]
        fn killing_field_is_tangent_on_hyperboloid(x in prop::array::uniform3(-3.0f64..3.0)) {
            let h = SpaceForm::HYPERBOLIC;
            let p = hyperbolic_point(x);
            let y = h.killing(&p);
            prop_assert!(h.form(&y, &p).abs() < 1e-12);
        }

        #[test]
        fn killing_equation_holds(
            x in prop::array::uniform4(-1.0f64..1.0),
            a in prop::array::uniform4(-1.0f64..1.0),
            b in prop::array::uniform4(-1.0f64..1.0),
        ) {
            if let Some(p) = sphere_point(x) {
                let s = SpaceForm::SPHERE;
                let ta = s.tangent_part(&p, &AmbientVector::from_array(s.kind, a));
                let tb = s.tangent_part(&p, &AmbientVector::from_array(s.kind, b));
                prop_assert!(killing_defect(s, p, ta, tb).abs() < 1e-7);
            }
            let h = SpaceForm::HYPERBOLIC;
            let p = hyperbolic_point([x[0], x[1], x[2]]);
            let ta = h.tangent_part(&p, &AmbientVector::from_array(h.kind, a));
            let tb = h.tangent_part(&p, &AmbientVector::from_array(h.kind, b));
            prop_assert!(killing_defect(h, p, ta, tb).abs() < 1e-6);
        }

        #[test]
        fn boost_preserves_lorentz_form(m in -2.0f64..2.0, t in -2.0f64..2.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let bm = boost(m, t);
            let (x, y) = (bm[0][0] * a + bm[0][1] * b, bm[1][0] * a + bm[1][1] * b);
            let before = -a * a + b * b;
            let after = -x * x + y * y;
            prop_assert!((before - after).abs() <= 1e-12 * (1.0 + x * x + y * y));
            prop_assert!((bm[0][0] * bm[1][1] - bm[0][1] * bm[1][0] - 1.0).abs() < 1e-12 * bm[0][0] * bm[0][0]);
        }
    }
}
