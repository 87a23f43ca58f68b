//! Hyperbolic plane in the hyperboloid model.
//!
//! Points live on the upper sheet `x0² − x1² − x2² = 1` of Minkowski space with
//! the form `⟨x, y⟩ = x0·y0 − x1·y1 − x2·y2`. Geodesics are cut out by planes
//! through the origin and are represented by a spacelike normal `n` with
//! `⟨n, n⟩ = −1`. Isometries are 3×3 matrices preserving the form.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Largest distance any operation is asked to handle.
pub const MAX_DISTANCE: f64 = 40.0;

/// The Lorentz form `diag(1, −1, −1)`.
pub fn lorentz_form() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))
}

#[inline]
pub fn lorentz(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2]
}

/// `arccosh` with its argument clamped to `[1, ∞)`.
#[inline]
pub fn acosh_clamped(x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        x.acosh()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(Vector3<f64>);

impl Point {
    pub fn origin() -> Self {
        Point(Vector3::new(1.0, 0.0, 0.0))
    }

    /// Builds a point from raw coordinates, projecting onto the upper sheet.
    pub fn new(x0: f64, x1: f64, x2: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x0, x1, x2))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let norm = lorentz(&v, &v);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput(format!(
                "vector {v:?} is not timelike (⟨v,v⟩ = {norm})"
            )));
        }
        let scale = norm.sqrt().copysign(v[0]);
        Ok(Point(v / scale))
    }

    /// The point at distance `r` from the origin in direction `theta`.
    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point(Vector3::new(r.cosh(), r.sinh() * c, r.sinh() * s))
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn x0(&self) -> f64 {
        self.0[0]
    }

    pub fn x1(&self) -> f64 {
        self.0[1]
    }

    pub fn x2(&self) -> f64 {
        self.0[2]
    }

    /// `x0² − x1² − x2² − 1`; zero on the hyperboloid.
    pub fn constraint_residual(&self) -> f64 {
        lorentz(&self.0, &self.0) - 1.0
    }

    /// Rescale back onto the hyperboloid.
    pub(crate) fn renormalized(v: Vector3<f64>) -> Self {
        let norm = lorentz(&v, &v);
        Self::on_sheet(v / norm.sqrt().copysign(v[0]))
    }

    /// Recomputes `x0` from the spatial part. Far from the origin `⟨v, v⟩`
    /// suffers cancellation, so rescaling by it would move the point; fixing
    /// `x0` instead keeps the spatial coordinates at full relative precision.
    pub(crate) fn on_sheet(v: Vector3<f64>) -> Self {
        Point(Vector3::new((1.0 + v[1] * v[1] + v[2] * v[2]).sqrt(), v[1], v[2]))
    }
}

/// Hyperbolic distance between two points.
///
/// This is `arccosh⟨p, q⟩`; for nearby points the equivalent chord form
/// `2·asinh(|p − q|/2)` is used since it does not lose precision near 1.
#[inline]
pub fn distance(p: &Point, q: &Point) -> f64 {
    let pairing = lorentz(&p.0, &q.0);
    if pairing < 2.0 {
        let v = p.0 - q.0;
        let chord = (-lorentz(&v, &v)).max(0.0).sqrt();
        2.0 * (0.5 * chord).asinh()
    } else {
        acosh_clamped(pairing)
    }
}

/// Distance from `p` to the full geodesic with unit normal `n`.
#[inline]
pub fn distance_to_geodesic(p: &Point, n: &Vector3<f64>) -> f64 {
    lorentz(&p.0, n).abs().asinh()
}

/// Orthogonal projection of `p` onto the geodesic with unit normal `n`.
pub fn perpendicular_foot(p: &Point, n: &Vector3<f64>) -> Point {
    Point::renormalized(p.0 + n * lorentz(&p.0, n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry(Matrix3<f64>);

impl Isometry {
    pub fn identity() -> Self {
        Isometry(Matrix3::identity())
    }

    /// Wraps a matrix, checking that it preserves the Lorentz form.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let iso = Isometry(m);
        let defect = iso.lorentz_defect();
        if defect > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "matrix does not preserve the Lorentz form (defect {defect:e})"
            )));
        }
        Ok(iso)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Translation by `a` along the geodesic `x2 = 0`.
    pub fn translation_x(a: f64) -> Self {
        let (c, s) = (a.cosh(), a.sinh());
        Isometry(Matrix3::new(c, s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// Rotation about the origin by `theta` (counterclockwise).
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Isometry(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// The pure boost carrying the origin to `p`.
    pub fn boost_to(p: &Point) -> Self {
        let v = p.coords();
        let (p0, a, b) = (v[0], v[1], v[2]);
        let k = 1.0 / (1.0 + p0);
        Isometry(Matrix3::new(
            p0,
            a,
            b,
            a,
            1.0 + a * a * k,
            a * b * k,
            b,
            a * b * k,
            1.0 + b * b * k,
        ))
    }

    /// Inverse via `J mᵀ J`.
    pub fn inverse(&self) -> Self {
        let j = lorentz_form();
        Isometry(j * self.0.transpose() * j)
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Largest entry of `mᵀ J m − J`.
    pub fn lorentz_defect(&self) -> f64 {
        let j = lorentz_form();
        (self.0.transpose() * j * self.0 - j).abs().max()
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::on_sheet(self.0 * p.0)
    }

    /// Applies to a spacelike normal (no renormalization onto the hyperboloid).
    pub fn apply_normal(&self, n: &Vector3<f64>) -> Vector3<f64> {
        self.0 * n
    }

    pub fn apply_segment(&self, s: &GeodesicSegment) -> GeodesicSegment {
        GeodesicSegment {
            a: self.apply(&s.a),
            b: self.apply(&s.b),
            normal: self.apply_normal(&s.normal),
        }
    }

    /// Entrywise distance to the identity.
    pub fn distance_from_identity(&self) -> f64 {
        (self.0 - Matrix3::identity()).abs().max()
    }
}

impl Mul for Isometry {
    type Output = Isometry;

    fn mul(self, rhs: Isometry) -> Isometry {
        Isometry(self.0 * rhs.0)
    }
}

impl Mul for &Isometry {
    type Output = Isometry;

    fn mul(self, rhs: &Isometry) -> Isometry {
        Isometry(self.0 * rhs.0)
    }
}

/// Reflection in the geodesic whose unit spacelike normal is `n`.
pub fn reflection_in_geodesic(n: &Vector3<f64>) -> Result<Isometry> {
    let norm = lorentz(n, n);
    if (norm + 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "carrier normal must satisfy ⟨n,n⟩ = −1, got {norm}"
        )));
    }
    // x ↦ x + 2⟨x,n⟩ n
    let jn = lorentz_form() * n;
    Ok(Isometry(Matrix3::identity() + 2.0 * n * jn.transpose()))
}

/// A closed geodesic segment together with the normal of its carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSegment {
    pub a: Point,
    pub b: Point,
    /// Unit spacelike normal of the carrier geodesic, `⟨n, n⟩ = −1`.
    pub normal: Vector3<f64>,
}

impl GeodesicSegment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        let n = lorentz_form() * a.0.cross(&b.0);
        let norm = -lorentz(&n, &n);
        if !(norm > 1e-24) {
            return Err(Error::InvalidInput("segment endpoints coincide".into()));
        }
        Ok(GeodesicSegment {
            a,
            b,
            normal: n / norm.sqrt(),
        })
    }

    /// Segment on a carrier whose unit normal is already known; this avoids
    /// the cancellation in `a × b` for short segments far from the origin.
    pub fn with_normal(a: Point, b: Point, normal: Vector3<f64>) -> Result<Self> {
        let defect = (lorentz(&normal, &normal) + 1.0).abs();
        let off = lorentz(&a.0, &normal).abs().max(lorentz(&b.0, &normal).abs());
        let scale = normal.norm_squared() * a.x0().max(b.x0());
        if defect > 1e-12 * scale || off > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "normal does not cut out the segment carrier (defect {defect:e}, offset {off:e})"
            )));
        }
        Ok(GeodesicSegment { a, b, normal })
    }

    pub fn length(&self) -> f64 {
        distance(&self.a, &self.b)
    }

    pub fn midpoint(&self) -> Point {
        Point::renormalized(self.a.0 + self.b.0)
    }

    /// Point at fraction `u ∈ [0, 1]` of the way from `a` to `b` (by arc length).
    pub fn point_at(&self, u: f64) -> Point {
        let len = self.length();
        if len == 0.0 {
            return self.a;
        }
        let (x, y) = ((1.0 - u) * len, u * len);
        Point::renormalized((self.a.0 * x.sinh() + self.b.0 * y.sinh()) / len.sinh())
    }
}

/// Cosh of the distance from `p` to the segment `[a, b]` with carrier normal
/// `n` and `cosh_len = cosh(d(a, b))`.
#[inline]
pub(crate) fn segment_distance_cosh(
    p: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    n: &Vector3<f64>,
    cosh_len: f64,
) -> f64 {
    let h = lorentz(p, n);
    let cosh_perp = (1.0 + h * h).sqrt();
    let ca = lorentz(p, a);
    let cb = lorentz(p, b);
    // The foot f lies inside [a, b] iff it is within the segment length of
    // both endpoints; cosh d(f, a) = cosh d(p, a) / cosh d(p, f).
    let slack = cosh_len * (1.0 + 1e-12);
    if ca <= slack * cosh_perp && cb <= slack * cosh_perp {
        cosh_perp
    } else {
        ca.min(cb)
    }
}

/// Minimum distance from `p` to a point of `s`.
pub fn distance_point_to_segment(p: &Point, s: &GeodesicSegment) -> f64 {
    let len = s.length();
    if len < 1e-12 {
        return distance(p, &s.a);
    }
    acosh_clamped(segment_distance_cosh(
        &p.0,
        &s.a.0,
        &s.b.0,
        &s.normal,
        len.cosh(),
    ))
}

/// Angle in `[0, π/2]` between two geodesics meeting at a point.
pub fn crossing_angle(n1: &Vector3<f64>, n2: &Vector3<f64>) -> f64 {
    lorentz(n1, n2).abs().min(1.0).acos()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn rng_points(seed: u64, count: usize) -> Vec<Point> {
        // Small LCG keeps these unit tests free of RNG plumbing.
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        (0..count)
            .map(|_| Point::polar(4.0 * next(), 2.0 * PI * next()))
            .collect()
    }

    fn random_isometry(p: &Point, theta: f64) -> Isometry {
        Isometry::boost_to(p) * Isometry::rotation(theta)
    }

    #[test]
    fn distance_identity_and_axis_translation() {
        let o = Point::origin();
        assert_eq!(distance(&o, &o), 0.0);
        let q = Point::new(1f64.cosh(), 1f64.sinh(), 0.0).unwrap();
        assert!((distance(&o, &q) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_is_involution_with_fixed_carrier() {
        let a = Point::polar(0.7, 0.3);
        let b = Point::polar(1.9, 2.1);
        let seg = GeodesicSegment::new(a, b).unwrap();
        let r = reflection_in_geodesic(&seg.normal).unwrap();
        assert!((r * r).distance_from_identity() < 1e-12);
        assert!((r.determinant() + 1.0).abs() < 1e-12);
        for u in [0.0, 0.25, 0.5, 1.0, 1.7] {
            let p = seg.point_at(u);
            assert!(distance(&r.apply(&p), &p) < 1e-9);
        }
        assert!(r.lorentz_defect() < 1e-12);
    }

    #[test]
    fn reflection_rejects_non_unit_normal() {
        let n = Vector3::new(0.0, 2.0, 0.0);
        assert!(matches!(
            reflection_in_geodesic(&n),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn reflected_distance_is_twice_perpendicular() {
        let seg = GeodesicSegment::new(Point::polar(0.4, 1.0), Point::polar(1.2, -0.5)).unwrap();
        let r = reflection_in_geodesic(&seg.normal).unwrap();
        for p in rng_points(7, 200) {
            let foot = perpendicular_foot(&p, &seg.normal);
            // foot lies on the carrier
            assert!(lorentz(foot.coords(), &seg.normal).abs() < 1e-9);
            let d = distance(&p, &r.apply(&p));
            assert!((d - 2.0 * distance(&p, &foot)).abs() < 1e-7, "{d}");
        }
    }

    #[test]
    fn segment_distance_perpendicular_case() {
        // geodesic x2 = 0, point at signed distance c from it
        let c: f64 = 0.8;
        let p = Point::new(c.cosh(), 0.0, c.sinh()).unwrap();
        let seg = GeodesicSegment::new(Point::polar(1.0, PI), Point::polar(1.0, 0.0)).unwrap();
        assert!((distance_point_to_segment(&p, &seg) - c).abs() < 1e-12);
        let on = seg.point_at(0.3);
        assert!(distance_point_to_segment(&on, &seg) < 1e-7);
    }

    #[test]
    fn segment_distance_matches_dense_sampling() {
        let seg = GeodesicSegment::new(Point::polar(2.0, 0.2), Point::polar(2.3, 0.5)).unwrap();
        for p in rng_points(11, 60) {
            let exact = distance_point_to_segment(&p, &seg);
            let sampled = (0..=10_000)
                .map(|i| distance(&p, &seg.point_at(i as f64 / 10_000.0)))
                .fold(f64::INFINITY, f64::min);
            assert!(exact <= sampled + 1e-9);
            assert!((exact - sampled).abs() < 1e-6, "{exact} vs {sampled}");
        }
    }

    #[test]
    fn degenerate_segment_falls_back_to_point() {
        let a = Point::polar(1.0, 0.0);
        let seg = GeodesicSegment {
            a,
            b: a,
            normal: Vector3::new(0.0, 0.0, 1.0),
        };
        let p = Point::polar(2.0, 1.0);
        assert!((distance_point_to_segment(&p, &seg) - distance(&p, &a)).abs() < 1e-12);
    }

    #[test]
    fn two_reflections_compose_to_rotation() {
        let l1 = GeodesicSegment::new(Point::polar(1.0, 0.0), Point::polar(1.0, PI)).unwrap();
        let l2 = GeodesicSegment::new(Point::polar(1.0, 0.9), Point::polar(1.0, 0.9 + PI)).unwrap();
        let rot = reflection_in_geodesic(&l1.normal).unwrap()
            * reflection_in_geodesic(&l2.normal).unwrap();
        assert!((rot.determinant() - 1.0).abs() < 1e-12);
        let o = Point::origin();
        assert!(distance(&rot.apply(&o), &o) < 1e-8);
    }

    #[test]
    fn renormalization_controls_drift() {
        let step = random_isometry(&Point::polar(0.9, 0.4), 1.3);
        let back = step.inverse();
        let mut p = Point::polar(0.5, 2.0);
        for i in 0..10_000 {
            p = if i % 3 == 2 { back.apply(&p) } else { step.apply(&p) };
        }
        assert!(p.constraint_residual().abs() < 1e-7);
    }

    #[test]
    fn boost_carries_origin() {
        let p = Point::polar(2.5, -1.1);
        let b = Isometry::boost_to(&p);
        assert!(distance(&b.apply(&Point::origin()), &p) < 1e-9);
        assert!(b.lorentz_defect() < 1e-9);
        assert!((b * b.inverse()).distance_from_identity() < 1e-9);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn point() -> impl Strategy<Value = Point> {
            (0.0f64..3.0, 0.0f64..(2.0 * PI)).prop_map(|(r, t)| Point::polar(r, t))
        }

        proptest! {
            #[test]
            fn isometries_preserve_distance(p in point(), q in point(), c in point(), theta in 0.0f64..6.3) {
                let m = random_isometry(&c, theta);
                let before = distance(&p, &q);
                let after = distance(&m.apply(&p), &m.apply(&q));
                prop_assert!((before - after).abs() <= 1e-8);
            }

            #[test]
            fn triangle_inequality(p in point(), q in point(), r in point()) {
                prop_assert!(distance(&p, &r) <= distance(&p, &q) + distance(&q, &r) + 1e-8);
            }

            #[test]
            fn distance_is_symmetric(p in point(), q in point()) {
                prop_assert!((distance(&p, &q) - distance(&q, &p)).abs() < 1e-12);
            }
        }
    }
}
