//! Hyperbolic plane kernel.
//!
//! Isometries are kept as real 2x2 determinant-one matrices (the half-plane
//! normal form); points and boundary data live in the Poincaré disk, where the
//! Busemann function and the interval machinery have closed forms. The two
//! pictures are glued by the Cayley transform z ↦ (z−i)/(z+i).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DET_TOL: f64 = 1e-12;
pub const PARABOLIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    HalfPlane,
    Disk,
}

/// Isometry type by trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsometryClass {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

/// A real Möbius transformation with a·d − b·c = 1, up to sign.
#[derive(Debug, Clone, Copy)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    /// Build from entries, normalizing the determinant to 1 and fixing the
    /// sign so the first nonzero entry of (a, b, c, d) is positive.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "matrix determinant must be positive and finite, got {det}"
            )));
        }
        let s = det.sqrt();
        let m = Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        };
        debug_assert!((m.det() - 1.0).abs() <= DET_TOL);
        Ok(m.canonical_sign())
    }

    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    fn canonical_sign(self) -> Self {
        let lead = [self.a, self.b, self.c, self.d]
            .into_iter()
            .find(|x| x.abs() > 0.0)
            .unwrap_or(1.0);
        if lead < 0.0 {
            Self {
                a: -self.a,
                b: -self.b,
                c: -self.c,
                d: -self.d,
            }
        } else {
            self
        }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Trace with the sign of the canonical representative; use `abs_trace`
    /// for classification.
    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn abs_trace(&self) -> f64 {
        self.trace().abs()
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
        .renorm()
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .canonical_sign()
    }

    /// Rescale so the determinant stays at 1 under long products.
    fn renorm(self) -> Self {
        let det = self.det();
        let s = det.sqrt();
        Self {
            a: self.a / s,
            b: self.b / s,
            c: self.c / s,
            d: self.d / s,
        }
        .canonical_sign()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        (self.a - 1.0).abs() <= tol
            && self.b.abs() <= tol
            && self.c.abs() <= tol
            && (self.d - 1.0).abs() <= tol
    }

    /// Entrywise comparison up to the projective sign.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let m = self.canonical_sign();
        let o = other.canonical_sign();
        (m.a - o.a).abs() <= tol
            && (m.b - o.b).abs() <= tol
            && (m.c - o.c).abs() <= tol
            && (m.d - o.d).abs() <= tol
    }

    pub fn classify(&self) -> IsometryClass {
        let t = self.abs_trace();
        if (t - 2.0).abs() <= PARABOLIC_TOL {
            IsometryClass::Parabolic
        } else if t > 2.0 {
            IsometryClass::Hyperbolic
        } else {
            IsometryClass::Elliptic
        }
    }

    /// Disk-model form: z ↦ (αz + β)/(β̄z + ᾱ) with |α|² − |β|² = 1.
    pub fn su11(&self) -> (Complex64, Complex64) {
        let alpha = Complex64::new((self.a + self.d) / 2.0, (self.b - self.c) / 2.0);
        let beta = Complex64::new((self.a - self.d) / 2.0, -(self.b + self.c) / 2.0);
        (alpha, beta)
    }

    /// Apply to a point of the closed disk (interior or boundary).
    pub fn apply_disk(&self, z: Complex64) -> Complex64 {
        let (alpha, beta) = self.su11();
        (alpha * z + beta) / (beta.conj() * z + alpha.conj())
    }

    /// Image of the disk origin.
    pub fn origin_image(&self) -> Complex64 {
        let (alpha, beta) = self.su11();
        beta / alpha.conj()
    }

    /// |g'(ξ)| at a boundary point, in the disk picture.
    pub fn boundary_deriv(&self, xi: Complex64) -> f64 {
        let (alpha, beta) = self.su11();
        1.0 / (beta.conj() * xi + alpha.conj()).norm_sqr()
    }

    /// Image arc, keeping orientation.
    pub fn apply_arc(&self, arc: &Arc) -> Arc {
        arc.apply(self)
    }

    /// Translation length min_x d(x, m·x) together with the isometry class.
    pub fn translation_length(&self) -> Result<(f64, IsometryClass)> {
        if self.is_identity(1e-12) {
            return Err(Error::Domain("translation length of the identity".into()));
        }
        match self.classify() {
            IsometryClass::Hyperbolic => {
                Ok((2.0 * (self.abs_trace() / 2.0).acosh(), IsometryClass::Hyperbolic))
            }
            IsometryClass::Parabolic => Ok((0.0, IsometryClass::Parabolic)),
            IsometryClass::Elliptic => Err(Error::Domain(format!(
                "elliptic isometry (|tr| = {} < 2) is invalid for a torsion-free Fuchsian group",
                self.abs_trace()
            ))),
        }
    }

    /// Fixed points on the disk boundary: (attracting, repelling) for a
    /// hyperbolic map, a single point for a parabolic one.
    pub fn fixed_points(&self) -> Result<FixedPoints> {
        if self.is_identity(1e-12) {
            return Err(Error::Domain("fixed points of the identity".into()));
        }
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        match self.classify() {
            IsometryClass::Elliptic => Err(Error::Domain(format!(
                "elliptic isometry (|tr| = {}) has no boundary fixed points",
                self.abs_trace()
            ))),
            IsometryClass::Parabolic => {
                let xi = if c.abs() <= 1e-14 {
                    ext_real_to_disk(ExtReal::Infinity)
                } else {
                    ext_real_to_disk(ExtReal::Finite((a - d) / (2.0 * c)))
                };
                Ok(FixedPoints::Parabolic(xi))
            }
            IsometryClass::Hyperbolic => {
                let disc = (self.trace() * self.trace() - 4.0).sqrt();
                let (att, rep) = if c.abs() <= 1e-14 {
                    // z ↦ (a/d) z + b/d fixes ∞ and b/(d−a)
                    let other = b / (d - a);
                    if a.abs() > d.abs() {
                        (ExtReal::Infinity, ExtReal::Finite(other))
                    } else {
                        (ExtReal::Finite(other), ExtReal::Infinity)
                    }
                } else {
                    let z1 = (a - d + disc) / (2.0 * c);
                    let z2 = (a - d - disc) / (2.0 * c);
                    // attracting root has |cz + d| > 1
                    if (c * z1 + d).abs() > 1.0 {
                        (ExtReal::Finite(z1), ExtReal::Finite(z2))
                    } else {
                        (ExtReal::Finite(z2), ExtReal::Finite(z1))
                    }
                };
                Ok(FixedPoints::Hyperbolic {
                    attracting: ext_real_to_disk(att),
                    repelling: ext_real_to_disk(rep),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FixedPoints {
    Hyperbolic {
        attracting: Complex64,
        repelling: Complex64,
    },
    Parabolic(Complex64),
}

impl FixedPoints {
    pub fn attracting(&self) -> Complex64 {
        match *self {
            FixedPoints::Hyperbolic { attracting, .. } => attracting,
            FixedPoints::Parabolic(p) => p,
        }
    }
}

/// Extended real line, the half-plane boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

/// Cayley transform of an interior half-plane point.
pub fn half_plane_to_disk(z: Complex64) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("point {z} is not in the upper half-plane")));
    }
    Ok((z - Complex64::i()) / (z + Complex64::i()))
}

pub fn disk_to_half_plane(w: Complex64) -> Result<Complex64> {
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!("point {w} is not inside the unit disk")));
    }
    Ok(Complex64::i() * (Complex64::new(1.0, 0.0) + w) / (Complex64::new(1.0, 0.0) - w))
}

/// Cayley transform of a boundary point; ∞ goes to 1.
pub fn ext_real_to_disk(x: ExtReal) -> Complex64 {
    match x {
        ExtReal::Infinity => Complex64::new(1.0, 0.0),
        ExtReal::Finite(x) => {
            let z = Complex64::new(x, -1.0) / Complex64::new(x, 1.0);
            z / z.norm()
        }
    }
}

pub fn assert_interior(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 - 1e-14 {
        Ok(())
    } else {
        Err(Error::Domain(format!("point {z} is not strictly inside the disk")))
    }
}

pub fn assert_boundary(xi: Complex64) -> Result<()> {
    if (xi.norm() - 1.0).abs() <= 1e-9 {
        Ok(())
    } else {
        Err(Error::Domain(format!("point {xi} is not on the unit circle")))
    }
}

/// Hyperbolic distance between interior disk points.
pub fn distance(x: Complex64, y: Complex64) -> Result<f64> {
    assert_interior(x)?;
    assert_interior(y)?;
    let num = 2.0 * (x - y).norm_sqr();
    let den = (1.0 - x.norm_sqr()) * (1.0 - y.norm_sqr());
    Ok((1.0 + num / den).acosh())
}

/// Busemann cocycle B_ξ(x, y) = lim_{z→ξ} d(x,z) − d(y,z) in the disk:
/// ln[(1−|y|²)/|ξ−y|² · |ξ−x|²/(1−|x|²)].
pub fn busemann(xi: Complex64, x: Complex64, y: Complex64) -> Result<f64> {
    assert_boundary(xi)?;
    assert_interior(x)?;
    assert_interior(y)?;
    let py = (1.0 - y.norm_sqr()) / (xi - y).norm_sqr();
    let px = (1.0 - x.norm_sqr()) / (xi - x).norm_sqr();
    Ok(py.ln() - px.ln())
}

/// Closed counterclockwise arc of the unit circle, stored as a start angle
/// and a positive angular width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub width: f64,
}

fn wrap_angle(t: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = t % two_pi;
    if t < 0.0 {
        t += two_pi;
    }
    t
}

impl Arc {
    pub fn new(start: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width < std::f64::consts::TAU) {
            return Err(Error::Domain(format!(
                "arc width must lie in (0, 2π), got {width}"
            )));
        }
        Ok(Self {
            start: wrap_angle(start),
            width,
        })
    }

    /// Arc from two endpoints, counterclockwise from `p` to `q`. Endpoints
    /// that coincide to machine precision give a fully contracted arc, which
    /// happens when deep interval nests bottom out.
    pub fn from_endpoints(p: Complex64, q: Complex64) -> Result<Self> {
        let s = wrap_angle(p.arg());
        let e = wrap_angle(q.arg());
        let mut width = e - s;
        if width < 0.0 {
            width += std::f64::consts::TAU;
        }
        if width == 0.0 || width >= std::f64::consts::TAU {
            if (p - q).norm() < 1e-9 {
                width = f64::MIN_POSITIVE;
            } else {
                return Err(Error::Domain("degenerate arc endpoints".into()));
            }
        }
        Self::new(s, width)
    }

    pub fn end(&self) -> f64 {
        wrap_angle(self.start + self.width)
    }

    pub fn start_point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.start)
    }

    pub fn end_point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.end())
    }

    pub fn midpoint(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.start + self.width / 2.0)
    }

    pub fn contains_angle(&self, t: f64) -> bool {
        let rel = wrap_angle(t - self.start);
        rel <= self.width
    }

    pub fn contains(&self, xi: Complex64) -> bool {
        self.contains_angle(xi.arg())
    }

    /// Image under an (orientation-preserving) Möbius map.
    pub fn apply(&self, m: &MobiusMap) -> Arc {
        let p = m.apply_disk(self.start_point());
        let q = m.apply_disk(self.end_point());
        Arc::from_endpoints(p, q).expect("image of a proper arc is a proper arc")
    }

    /// Euclidean diameter bound of the arc: the chord length once the arc is
    /// shorter than a half-circle, 2 otherwise.
    pub fn chordal_diameter(&self) -> f64 {
        if self.width >= std::f64::consts::PI {
            2.0
        } else {
            (self.start_point() - self.end_point()).norm()
        }
    }
}

/// The geodesic with ideal endpoints p and q, as data for intersections.
enum Geodesic {
    /// Euclidean line through the origin in direction `u`.
    Diameter { u: Complex64 },
    /// Euclidean circle orthogonal to the unit circle.
    Circle { center: Complex64, radius: f64 },
}

fn geodesic(p: Complex64, q: Complex64) -> Geodesic {
    let det = p.re * q.im - p.im * q.re;
    if det.abs() < 1e-12 {
        Geodesic::Diameter { u: p / p.norm() }
    } else {
        // center solves Re(conj(p) c) = 1, Re(conj(q) c) = 1
        let cx = (q.im - p.im) / det;
        let cy = (p.re - q.re) / det;
        let center = Complex64::new(cx, cy);
        let radius = (center.norm_sqr() - 1.0).sqrt();
        Geodesic::Circle { center, radius }
    }
}

/// Intersection point of the geodesics p1↔q1 and p2↔q2, assuming they cross
/// inside the disk.
pub fn geodesic_intersection(
    p1: Complex64,
    q1: Complex64,
    p2: Complex64,
    q2: Complex64,
) -> Result<Complex64> {
    let g1 = geodesic(p1, q1);
    let g2 = geodesic(p2, q2);
    let inside = |z: Complex64| z.norm() < 1.0;
    match (g1, g2) {
        (Geodesic::Diameter { .. }, Geodesic::Diameter { .. }) => Ok(Complex64::new(0.0, 0.0)),
        (Geodesic::Diameter { u }, Geodesic::Circle { center, radius })
        | (Geodesic::Circle { center, radius }, Geodesic::Diameter { u }) => {
            let b = u.re * center.re + u.im * center.im;
            let disc = b * b - (center.norm_sqr() - radius * radius);
            if disc < 0.0 {
                return Err(Error::Domain("geodesics do not intersect".into()));
            }
            for t in [b - disc.sqrt(), b + disc.sqrt()] {
                let z = u * t;
                if inside(z) {
                    return Ok(z);
                }
            }
            Err(Error::Domain("geodesic intersection not inside the disk".into()))
        }
        (
            Geodesic::Circle {
                center: c1,
                radius: r1,
            },
            Geodesic::Circle {
                center: c2,
                radius: r2,
            },
        ) => {
            let d = (c2 - c1).norm();
            if d < 1e-15 {
                return Err(Error::Domain("coincident geodesics".into()));
            }
            let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
            let h2 = r1 * r1 - a * a;
            if h2 < 0.0 {
                return Err(Error::Domain("geodesics do not intersect".into()));
            }
            let base = c1 + (c2 - c1) * (a / d);
            let off = Complex64::new(-(c2 - c1).im, (c2 - c1).re) * (h2.sqrt() / d);
            for z in [base + off, base - off] {
                if inside(z) {
                    return Ok(z);
                }
            }
            Err(Error::Domain("geodesic intersection not inside the disk".into()))
        }
    }
}

/// Disk automorphism taking `c` to the origin followed by a rotation by `phi`.
/// Returned as a real matrix (conjugated back through the Cayley transform).
pub fn centering_map(c: Complex64, phi: f64) -> Result<MobiusMap> {
    assert_interior(c)?;
    // T(z) = e^{iφ} (z − c)/(1 − c̄ z) as an SU(1,1) pair, then back to SL(2,R)
    let half = Complex64::from_polar(1.0, phi / 2.0);
    let s = 1.0 / (1.0 - c.norm_sqr()).sqrt();
    let alpha = half * s;
    let beta = -half * c * s;
    // U = [[α, β], [β̄, ᾱ]]; M = C⁻¹ U C with C the Cayley matrix.
    // Writing α = p + iq, β = r + is gives the real matrix below.
    let (p, q) = (alpha.re, alpha.im);
    let (r, s_) = (beta.re, beta.im);
    MobiusMap::new(p + r, q - s_, -(q + s_), p - r)
}
