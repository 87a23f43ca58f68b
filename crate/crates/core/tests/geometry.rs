mod common;

use std::f64::consts::FRAC_PI_2;

use hypdiam_core::hexagon::{build_hexagon, pants_radius, seam_length};
use hypdiam_core::hyp::{distance, distance_point_to_segment, Point};

use common::short_side_oracle;

const GRID: [f64; 9] = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 40.0];

#[test]
fn short_side_matches_closed_form() {
    for ell in GRID {
        let hex = build_hexagon(ell).unwrap();
        // cosh t (cosh(ℓ/2) − 1) − cosh(ℓ/2) = (cosh t − 1)(cosh(ℓ/2) − 1) − 1
        let residual = 4.0 * ((hex.t / 2.0).sinh() * (ell / 4.0).sinh()).powi(2) - 1.0;
        assert!(residual.abs() <= 1e-8, "ell = {ell}: {residual:e}");
        assert!((hex.t - short_side_oracle(ell)).abs() <= 1e-10, "ell = {ell}");
    }
}

#[test]
fn regular_hexagon() {
    let hex = build_hexagon(2.0 * 2f64.acosh()).unwrap();
    assert!((hex.t - 2f64.acosh()).abs() <= 1e-9);
    assert!((hex.c_ell - 2f64.sqrt().acosh()).abs() <= 1e-9);
    assert!((hex.c_prime - hex.c_ell).abs() <= 1e-9);
}

#[test]
fn center_is_thick() {
    for ell in GRID {
        let hex = build_hexagon(ell).unwrap();
        assert!(hex.c_ell.min(hex.c_prime) > 3f64.ln() / 2.0, "ell = {ell}");
    }
}

#[test]
fn seam_length_asymptotics() {
    for (ell, tol) in [(12.0, 0.05), (20.0, 0.01)] {
        let hex = build_hexagon(ell).unwrap();
        let ratio = seam_length(&hex) / (4.0 * (-ell / 4.0).exp());
        assert!((ratio - 1.0).abs() <= tol, "ell = {ell}: {ratio}");
    }
}

#[test]
fn side_lengths_angles_and_center_distances() {
    for ell in GRID {
        let hex = build_hexagon(ell).unwrap();
        for (k, angle) in hex.interior_angles().iter().enumerate() {
            assert!((angle - FRAC_PI_2).abs() < 1e-8, "ell = {ell}, corner {k}");
        }
        for i in 0..3 {
            assert!((hex.s_side(i).length() - ell / 2.0).abs() < 1e-8 * ell);
            assert!((hex.t_side(i).length() - hex.t).abs() < 1e-8);
            let o = Point::origin();
            assert!((distance_point_to_segment(&o, hex.s_side(i)) - hex.c_ell).abs() < 1e-9);
            assert!((distance_point_to_segment(&o, hex.t_side(i)) - hex.c_prime).abs() < 1e-9);
        }
    }
}

#[test]
fn pants_radius_covers_the_hexagon() {
    for ell in GRID {
        let hex = build_hexagon(ell).unwrap();
        let o = Point::origin();
        for v in &hex.vertices {
            assert!(distance(&o, v) <= pants_radius(&hex) + 1e-12);
        }
    }
}
