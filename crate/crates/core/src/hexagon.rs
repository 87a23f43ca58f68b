//! The right-angled hexagon with three alternating sides of length `ℓ/2`.
//!
//! The hexagon has an order-three rotational symmetry about its center. The
//! short side length and the two center-to-side distances have closed forms;
//! the sides are placed around the origin from those distances and the
//! vertices are their pairwise intersections.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyp::{
    crossing_angle, distance, reflection_in_geodesic, GeodesicSegment, Isometry,
    Point,
};

pub const MIN_ELL: f64 = 0.1;
pub const MAX_ELL: f64 = 60.0;

#[derive(Debug, Clone)]
pub struct HexagonGeometry {
    /// Cuff length ℓ.
    pub ell: f64,
    /// Long side length ℓ/2.
    pub s: f64,
    /// Short side length.
    pub t: f64,
    /// Distance from the center to each long side.
    pub c_ell: f64,
    /// Distance from the center to each short side.
    pub c_prime: f64,
    /// Largest distance from the center to a point of the hexagon.
    pub rho: f64,
    pub center: Point,
    /// Vertices in counterclockwise order; side `k` joins `vertices[k]` and `vertices[k + 1]`.
    pub vertices: [Point; 6],
    /// Sides in alternating order long, short, long, short, long, short.
    pub sides: [GeodesicSegment; 6],
    /// Reflections in the three long sides, labeled counterclockwise.
    pub reflections: [Isometry; 3],
    /// Closing defect of the side chain.
    pub closing_residual: f64,
}

impl HexagonGeometry {
    /// Long side `i ∈ {0, 1, 2}`.
    pub fn s_side(&self, i: usize) -> &GeodesicSegment {
        &self.sides[2 * i]
    }

    /// Short side `i`, which sits between long sides `i` and `i + 1`.
    pub fn t_side(&self, i: usize) -> &GeodesicSegment {
        &self.sides[2 * i + 1]
    }

    /// Interior angle at each vertex, between the incoming and outgoing side.
    pub fn interior_angles(&self) -> [f64; 6] {
        std::array::from_fn(|k| {
            let prev = &self.sides[(k + 5) % 6];
            crossing_angle(&prev.normal, &self.sides[k].normal)
        })
    }

    /// Residual of `cosh(t)·(cosh(ℓ/2) − 1) = cosh(ℓ/2)`, evaluated as the
    /// equal quantity `(cosh t − 1)(cosh(ℓ/2) − 1) − 1 = 4 sinh²(t/2) sinh²(ℓ/4) − 1`
    /// so that it stays accurate when `cosh(ℓ/2)` is large.
    pub fn short_side_identity_residual(&self) -> f64 {
        identity_residual(self.s, self.t)
    }

    pub fn summary(&self) -> HexagonSummary {
        HexagonSummary {
            ell: self.ell,
            s: self.s,
            t: self.t,
            c_ell: self.c_ell,
            c_prime: self.c_prime,
            rho: self.rho,
            pants_radius: pants_radius(self),
            seam_length: seam_length(self),
        }
    }
}

/// The scalar constants of a hexagon, as emitted by the CLI.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HexagonSummary {
    pub ell: f64,
    pub s: f64,
    pub t: f64,
    pub c_ell: f64,
    pub c_prime: f64,
    pub rho: f64,
    pub pants_radius: f64,
    pub seam_length: f64,
}

/// `4 sinh²(t/2) sinh²(s/2) − 1`, which equals `cosh t (cosh s − 1) − cosh s`.
pub fn identity_residual(s: f64, t: f64) -> f64 {
    let a = (t / 2.0).sinh() * (s / 2.0).sinh();
    4.0 * a * a - 1.0
}

/// Short side length from `sinh(s/2)·sinh(t/2) = 1/2`.
pub fn short_side_length(s: f64) -> f64 {
    2.0 * (0.5 / (0.5 * s).sinh()).asinh()
}

/// Distances from the center to the long and short sides.
///
/// With `A = cosh²(s/2)`, `B = cosh²(t/2)` and `x = tanh²(C)`, the two
/// trirectangles meeting at a vertex give `B·x² + (A − B)·x − A/4 = 0`.
pub fn center_distances(s: f64, t: f64) -> (f64, f64) {
    let a = (0.5 * s).cosh().powi(2);
    let b = (0.5 * t).cosh().powi(2);
    let lin = a - b;
    let root = (lin * lin + a * b).sqrt();
    let x = if lin >= 0.0 {
        a / (2.0 * (lin + root))
    } else {
        (root - lin) / (2.0 * b)
    };
    let c = x.sqrt().atanh();
    let tanh_prime = 0.5 / x.sqrt();
    let c_prime = if tanh_prime < 0.9 {
        tanh_prime.atanh()
    } else {
        (c.cosh() * (0.5 * s).cosh() / (0.5 * t).cosh()).acosh()
    };
    (c, c_prime)
}

/// Unit normal of the geodesic at distance `d` from the origin whose
/// nearest point lies in direction `theta`.
fn side_normal(d: f64, theta: f64) -> Vector3<f64> {
    let (sn, cs) = theta.sin_cos();
    Vector3::new(d.sinh(), d.cosh() * cs, d.cosh() * sn)
}

/// The point reached from the foot of that geodesic by moving `h` along it
/// counterclockwise (as seen from the origin).
fn point_on_side(d: f64, theta: f64, h: f64) -> Point {
    let (sn, cs) = theta.sin_cos();
    let (ch, sh) = (h.cosh(), h.sinh());
    Point::on_sheet(Vector3::new(
        ch * d.cosh(),
        ch * d.sinh() * cs - sh * sn,
        ch * d.sinh() * sn + sh * cs,
    ))
}

pub fn build_hexagon(ell: f64) -> Result<HexagonGeometry> {
    if !(MIN_ELL..=MAX_ELL).contains(&ell) {
        return Err(Error::InvalidInput(format!(
            "ell = {ell} outside [{MIN_ELL}, {MAX_ELL}]"
        )));
    }
    let s = ell / 2.0;
    let t = short_side_length(s);
    let (c_ell, c_prime) = center_distances(s, t);

    // Side k has its foot in direction kπ/3; even sides are long. Vertex k
    // is where side k starts.
    let dist = |k: usize| if k.is_multiple_of(2) { c_ell } else { c_prime };
    let half = |k: usize| if k.is_multiple_of(2) { 0.5 * s } else { 0.5 * t };
    let normals: [Vector3<f64>; 6] =
        std::array::from_fn(|k| side_normal(dist(k), k as f64 * FRAC_PI_3));
    let vertices: [Point; 6] =
        std::array::from_fn(|k| point_on_side(dist(k), k as f64 * FRAC_PI_3, -half(k)));

    let mut sides = Vec::with_capacity(6);
    for k in 0..6 {
        sides.push(GeodesicSegment::with_normal(vertices[k], vertices[(k + 1) % 6], normals[k])?);
    }
    let sides: [GeodesicSegment; 6] = sides.try_into().expect("six sides");

    let mut reflections = Vec::with_capacity(3);
    for i in 0..3 {
        reflections.push(reflection_in_geodesic(&sides[2 * i].normal)?);
    }
    let reflections: [Isometry; 3] = reflections.try_into().expect("three reflections");

    let mut closing_residual: f64 = 0.0;
    for k in 0..6 {
        let target = if k % 2 == 0 { s } else { t };
        closing_residual = closing_residual.max((sides[k].length() - target).abs() / target.max(1.0));
        let angle = crossing_angle(&sides[(k + 5) % 6].normal, &sides[k].normal);
        closing_residual = closing_residual.max((angle - FRAC_PI_2).abs());
    }
    if !(closing_residual <= 1e-6) {
        return Err(Error::Consistency(format!(
            "hexagon fails to close (residual {closing_residual:e})"
        )));
    }

    let origin = Point::origin();
    let rho = vertices
        .iter()
        .map(|v| distance(&origin, v))
        .fold(0.0, f64::max);

    Ok(HexagonGeometry {
        ell,
        s,
        t,
        c_ell,
        c_prime,
        rho,
        center: origin,
        vertices,
        sides,
        reflections,
        closing_residual,
    })
}

/// Length of the shortest disconnecting geodesic of the doubled hexagon.
pub fn seam_length(hex: &HexagonGeometry) -> f64 {
    2.0 * hex.t
}

pub fn circumradius(hex: &HexagonGeometry) -> f64 {
    hex.rho
}

/// Upper bound on the distance from the pants midpoint to any point of the
/// pants (two copies of the hexagon glued along the short sides).
///
/// A point `x'` of the back copy is within `d(o, y) + d(y, x)` of the center,
/// where `y` is the nearest short-side point to the front copy `x`. The first
/// term is at most `rho`; the second is at most `max(c_prime, ℓ/4)` since the
/// hexagon splits into right triangles (center, side foot, vertex) whose
/// farthest points from the short side through the vertex are the center and
/// the long-side midpoints.
pub fn pants_radius(hex: &HexagonGeometry) -> f64 {
    hex.rho + hex.c_prime.max(hex.ell / 4.0)
}
