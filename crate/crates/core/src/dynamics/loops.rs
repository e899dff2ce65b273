use std::f64::consts::{PI, TAU};

use super::HamiltonianPath;
use crate::error::{Error, Result};
use crate::sphere::legendre::gauss_legendre_unit;
use crate::sphere::{cross, dot, norm, normalize, rotate, Point};

/// Semiclassical data of a loop at a fixed base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopInvariants {
    /// `A = int_D omega - int_0^1 H_t(x) dt` with a degenerate disc, not reduced.
    pub action: f64,
    /// Net turns of the polar part of the linearized flow at the base point.
    pub winding: i64,
    pub maslov_parity: u8,
}

impl LoopInvariants {
    pub fn action_mod_2pi(&self) -> f64 {
        self.action.rem_euclid(TAU)
    }

    /// `k A + pi m` reduced to `[0, 2pi)`.
    pub fn predicted_phase(&self, k: usize) -> f64 {
        (k as f64 * self.action.rem_euclid(TAU) + PI * self.maslov_parity as f64).rem_euclid(TAU)
    }
}

const LOOP_TOL: f64 = 1e-8;

/// Action and Maslov parity of a loop of Hamiltonian diffeomorphisms at a
/// point that stays fixed for all `t`.
pub fn loop_invariants(path: &HamiltonianPath, base: Point) -> Result<LoopInvariants> {
    let moved = path.time_one_displacement()?;
    if moved > LOOP_TOL {
        return Err(Error::NotALoop(moved));
    }
    let base = normalize(base);
    for i in 1..64 {
        let t = i as f64 / 64.0;
        let q = path.flow(t, base)?;
        let d = norm(&[q[0] - base[0], q[1] - base[1], q[2] - base[2]]);
        if d > LOOP_TOL {
            return Err(Error::Input(format!(
                "base point moves by {d:.3e} at t = {t}; only fixed base points are supported"
            )));
        }
    }
    let winding = linearized_winding(path, base)?;
    Ok(LoopInvariants {
        action: -hamiltonian_integral(path, base)?,
        winding,
        maslov_parity: winding.rem_euclid(2) as u8,
    })
}

/// `int_0^1 H_t(x) dt`, Gauss-Legendre on every smooth stretch.
fn hamiltonian_integral(path: &HamiltonianPath, x: Point) -> Result<f64> {
    let mut knots = vec![0.0];
    knots.extend(path.breakpoints());
    knots.push(1.0);
    let (nodes, weights) = gauss_legendre_unit(24);
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (t, wt) in nodes.iter().zip(&weights) {
            total += (b - a) * wt * path.hamiltonian(a + (b - a) * t)?.eval_point(&x);
        }
    }
    Ok(total)
}

fn tangent_frame(x: &Point) -> (Point, Point) {
    let helper = if x[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(cross(&cross(x, &helper), x));
    let e2 = cross(x, &e1);
    (e1, e2)
}

/// Rotation angle of the polar part of `d phi_t` on `T_x`, by central differences.
fn polar_angle(path: &HamiltonianPath, t: f64, x: &Point, frame: &(Point, Point)) -> Result<f64> {
    const H: f64 = 1e-6;
    let mut j = [[0.0; 2]; 2];
    for (a, e) in [frame.0, frame.1].iter().enumerate() {
        let axis = normalize(cross(x, e));
        let plus = path.flow(t, rotate(x, &axis, H))?;
        let minus = path.flow(t, rotate(x, &axis, -H))?;
        let d = [(plus[0] - minus[0]) / (2.0 * H), (plus[1] - minus[1]) / (2.0 * H), (plus[2] - minus[2]) / (2.0 * H)];
        j[0][a] = dot(&d, &frame.0);
        j[1][a] = dot(&d, &frame.1);
    }
    Ok((j[1][0] - j[0][1]).atan2(j[0][0] + j[1][1]))
}

fn linearized_winding(path: &HamiltonianPath, x: Point) -> Result<i64> {
    let frame = tangent_frame(&x);
    let mut samples = 64usize;
    loop {
        let mut total = 0.0;
        let mut prev = polar_angle(path, 0.0, &x, &frame)?;
        let mut smooth = true;
        for i in 1..=samples {
            let cur = polar_angle(path, i as f64 / samples as f64, &x, &frame)?;
            let step = (cur - prev + PI).rem_euclid(TAU) - PI;
            if step.abs() > PI / 4.0 {
                smooth = false;
                break;
            }
            total += step;
            prev = cur;
        }
        if smooth {
            let turns = total / TAU;
            let rounded = turns.round();
            if (turns - rounded).abs() > 1e-3 {
                return Err(Error::NotALoop((turns - rounded).abs()));
            }
            return Ok(rounded as i64);
        }
        if samples >= 1 << 16 {
            return Err(Error::Integration(
                "linearized flow turns too fast to track".to_string(),
            ));
        }
        samples *= 2;
    }
}
