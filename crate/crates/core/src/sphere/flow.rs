use super::legendre::zonal_with_derivative;
use super::{cross, norm, normalize, point_from_u_phi, rotate, u_phi, Point, SphereFunction};
use crate::error::{Error, Result};

const DETECT_TOL: f64 = 1e-13;
const RK_TOL: f64 = 1e-10;
const RK_MAX_STEPS: usize = 1 << 18;

/// Time-`t` flow of an autonomous Hamiltonian on the sphere.
///
/// Linear and axisymmetric Hamiltonians have closed-form flows; anything else
/// is integrated with RK4 on the embedded sphere.
#[derive(Debug, Clone)]
pub enum ClassicalFlow {
    Identity,
    /// Rigid rotation `p -> R(t) p` with angular velocity vector `omega`.
    Rotation { omega: Point },
    /// `f = F(u)`: `phi' = -2 F'(u)`, `u` conserved. Holds the zonal coefficients.
    Axisymmetric { zonal: Vec<f64> },
    Numeric { hamiltonian: SphereFunction },
}

impl ClassicalFlow {
    pub fn of_hamiltonian(f: &SphereFunction) -> Self {
        if let Some(n) = f.linear_part(DETECT_TOL) {
            if norm(&n) <= DETECT_TOL {
                return Self::Identity;
            }
            // f = n . p gives X_f = 2 p x n = (-2n) x p.
            return Self::Rotation {
                omega: [-2.0 * n[0], -2.0 * n[1], -2.0 * n[2]],
            };
        }
        if f.is_axisymmetric(DETECT_TOL) {
            let zonal = (0..=f.l_max()).map(|l| f.coeff(l, 0)).collect();
            return Self::Axisymmetric { zonal };
        }
        Self::Numeric {
            hamiltonian: f.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::Numeric { .. })
    }

    /// `phi_t(p)`.
    pub fn map(&self, t: f64, p: Point) -> Result<Point> {
        match self {
            Self::Identity => Ok(p),
            Self::Rotation { omega } => {
                let w = norm(omega);
                Ok(rotate(&p, &[omega[0] / w, omega[1] / w, omega[2] / w], w * t))
            }
            Self::Axisymmetric { zonal } => {
                let (u, phi) = u_phi(&p);
                let (_, dp) = zonal_with_derivative(zonal.len() - 1, u);
                let fu: f64 = zonal.iter().zip(&dp).map(|(a, d)| a * d).sum();
                Ok(point_from_u_phi(u, phi - 2.0 * fu * t))
            }
            Self::Numeric { hamiltonian } => integrate_rk4(hamiltonian, t, p),
        }
    }

    /// `g o phi_t^{-1}` (the flow is autonomous, so the inverse runs time backwards).
    pub fn pullback(&self, g: &SphereFunction, t: f64, l_cap: usize) -> Result<SphereFunction> {
        g.compose(|p| self.map(-t, p), l_cap)
    }
}

fn vector_field(f: &SphereFunction, p: &Point) -> Point {
    let g = f.gradient(p);
    let c = cross(p, &g);
    [2.0 * c[0], 2.0 * c[1], 2.0 * c[2]]
}

fn rk4(f: &SphereFunction, t: f64, p: Point, steps: usize) -> Point {
    let h = t / steps as f64;
    let add = |a: &Point, b: &Point, s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let mut x = p;
    for _ in 0..steps {
        let k1 = vector_field(f, &x);
        let k2 = vector_field(f, &add(&x, &k1, h / 2.0));
        let k3 = vector_field(f, &add(&x, &k2, h / 2.0));
        let k4 = vector_field(f, &add(&x, &k3, h));
        for i in 0..3 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x = normalize(x);
    }
    x
}

fn integrate_rk4(f: &SphereFunction, t: f64, p: Point) -> Result<Point> {
    if t == 0.0 {
        return Ok(p);
    }
    let mut steps = 64 * (t.abs().ceil() as usize).max(1);
    let mut prev = rk4(f, t, p, steps);
    while steps < RK_MAX_STEPS {
        steps *= 2;
        let next = rk4(f, t, p, steps);
        let d = norm(&[next[0] - prev[0], next[1] - prev[1], next[2] - prev[2]]);
        if d < RK_TOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Flow(format!(
        "RK4 did not settle to {RK_TOL:e} within {RK_MAX_STEPS} steps"
    )))
}
