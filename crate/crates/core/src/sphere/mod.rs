//! The classical phase space: `CP^1` with the Fubini-Study form of total area `2pi`.
//!
//! In the affine chart `z` the form is `omega = i dz ^ dzbar / (1 + |z|^2)^2`;
//! on the unit sphere with `u = cos(theta) = (1 - |z|^2) / (1 + |z|^2)` and
//! `x + iy = 2z / (1 + |z|^2)` it is half the standard area form,
//! `omega = 1/2 dphi ^ du`.
//!
//! Sign convention: `i_{X_f} omega = -df`, which gives
//! `X_f = -2 f_u d/dphi + 2 f_phi d/du` and
//! `{f, g} = X_f g = 2 (f_phi g_u - f_u g_phi)`. In particular `{x, y} = 2u`,
//! `{u, x} = 2y`, and `f = c u` rotates the sphere about the `u`-axis with
//! `phi' = -2c`. In embedding coordinates `X_f = 2 p x grad f`.

mod flow;
mod function;
mod grid;
pub mod legendre;
pub mod registry;

pub use flow::ClassicalFlow;
pub use function::{harmonic_index, SphereFunction, DEFAULT_L_CAP};
pub use grid::QuadratureGrid;

use std::f64::consts::PI;

/// Point on the unit sphere in embedding coordinates `(x, y, u)`.
pub type Point = [f64; 3];

/// `integral of omega` over the sphere.
pub const TOTAL_AREA: f64 = 2.0 * PI;

pub fn point_from_u_phi(u: f64, phi: f64) -> Point {
    let s = (1.0 - u * u).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), u]
}

pub fn u_phi(p: &Point) -> (f64, f64) {
    let r = norm(p);
    ((p[2] / r).clamp(-1.0, 1.0), p[1].atan2(p[0]))
}

/// Affine coordinate of a point (the north pole `u = 1` is `z = 0`).
pub fn affine_coordinate(p: &Point) -> (f64, f64) {
    let d = 1.0 + p[2];
    (p[0] / d, p[1] / d)
}

pub fn point_from_affine(re: f64, im: f64) -> Point {
    let r2 = re * re + im * im;
    [2.0 * re / (1.0 + r2), 2.0 * im / (1.0 + r2), (1.0 - r2) / (1.0 + r2)]
}

pub(crate) fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

pub(crate) fn normalize(p: Point) -> Point {
    let r = norm(&p);
    [p[0] / r, p[1] / r, p[2] / r]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Rotation of `p` by `angle` about the unit vector `axis` (right-handed).
pub fn rotate(p: &Point, axis: &Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    let kxp = cross(axis, p);
    let kdp = dot(axis, p);
    [
        p[0] * c + kxp[0] * s + axis[0] * kdp * (1.0 - c),
        p[1] * c + kxp[1] * s + axis[1] * kdp * (1.0 - c),
        p[2] * c + kxp[2] * s + axis[2] * kdp * (1.0 - c),
    ]
}
