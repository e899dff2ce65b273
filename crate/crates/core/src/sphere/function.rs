use std::f64::consts::{PI, SQRT_2};
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::grid::QuadratureGrid;
use super::legendre::{legendre_over_sin, tri_index, zonal_with_derivative, LegendreTable};
use super::{point_from_u_phi, u_phi, Point, TOTAL_AREA};
use crate::error::{Error, Result};

/// Default cap on band limits produced by products, brackets and pullbacks.
pub const DEFAULT_L_CAP: usize = 64;

/// Relative tail size at which adaptive re-analysis stops growing the band.
/// The quadrature itself leaves a noise floor that grows with the band, so
/// the effective threshold is the larger of this and [`analysis_noise`].
const COMPOSE_TOL: f64 = 1e-15;

/// Roundoff level of coefficients analysed at band `l` from samples of size `scale`.
fn analysis_noise(l: usize, scale: f64) -> f64 {
    16.0 * l as f64 * f64::EPSILON * scale
}

/// Position of the real harmonic `Y_{l,q}` in a coefficient vector.
#[inline]
pub fn harmonic_index(l: usize, q: i64) -> usize {
    ((l * l + l) as i64 + q) as usize
}

#[inline]
fn band_sup_factor(l: usize) -> f64 {
    // Addition theorem: sum_q Y_{l,q}^2 = (2l + 1) / 4pi everywhere.
    ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()
}

/// Real band-limited function on the sphere, stored as coefficients in the
/// real orthonormal harmonics
/// `Y_{l,0} = Pbar_l^0(u)`, `Y_{l,q} = sqrt2 Pbar_l^q(u) cos(q phi)`,
/// `Y_{l,-q} = sqrt2 Pbar_l^q(u) sin(q phi)` (orthonormal for `dphi du`).
///
/// `truncation` carries an estimated sup-norm bound on whatever was discarded
/// when the function was produced by a non-band-limited operation.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereFunction {
    l_max: usize,
    coeffs: Vec<f64>,
    truncation: f64,
}

impl SphereFunction {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            l_max: 0,
            coeffs: vec![c * (4.0 * PI).sqrt()],
            truncation: 0.0,
        }
    }

    pub fn harmonic(l: usize, q: i64) -> Self {
        assert!(q.unsigned_abs() as usize <= l, "|q| must not exceed l");
        let mut coeffs = vec![0.0; (l + 1) * (l + 1)];
        coeffs[harmonic_index(l, q)] = 1.0;
        Self {
            l_max: l,
            coeffs,
            truncation: 0.0,
        }
    }

    pub fn from_coeffs(l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != (l_max + 1) * (l_max + 1) {
            return Err(Error::Input(format!(
                "band limit {l_max} needs {} coefficients, got {}",
                (l_max + 1) * (l_max + 1),
                coeffs.len()
            )));
        }
        Ok(Self {
            l_max,
            coeffs,
            truncation: 0.0,
        })
    }

    /// The embedding coordinate `u = cos(theta)`.
    pub fn u() -> Self {
        Self::harmonic(1, 0) * (4.0 * PI / 3.0).sqrt()
    }

    pub fn x() -> Self {
        Self::harmonic(1, 1) * (4.0 * PI / 3.0).sqrt()
    }

    pub fn y() -> Self {
        Self::harmonic(1, -1) * (4.0 * PI / 3.0).sqrt()
    }

    /// `a x + b y + c u`.
    pub fn linear(n: Point) -> Self {
        Self::x() * n[0] + Self::y() * n[1] + Self::u() * n[2]
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, l: usize, q: i64) -> f64 {
        if l > self.l_max {
            0.0
        } else {
            self.coeffs[harmonic_index(l, q)]
        }
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self
    }

    fn padded(&self, l: usize) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        c.resize((l + 1) * (l + 1), 0.0);
        c
    }

    /// Drops trailing bands whose coefficients are all below `tol` in magnitude
    /// (they are added to `truncation`).
    pub fn trimmed(&self, tol: f64) -> Self {
        let mut l = self.l_max;
        let mut dropped = 0.0;
        while l > 0 {
            let band = &self.coeffs[l * l..(l + 1) * (l + 1)];
            if band.iter().any(|c| c.abs() > tol) {
                break;
            }
            dropped += band_norm(band) * band_sup_factor(l);
            l -= 1;
        }
        Self {
            l_max: l,
            coeffs: self.coeffs[..(l + 1) * (l + 1)].to_vec(),
            truncation: self.truncation + dropped,
        }
    }

    /// Restriction to band limit `l`, recording the dropped part in `truncation`.
    pub fn truncated(&self, l: usize) -> Self {
        if l >= self.l_max {
            return self.clone();
        }
        let dropped: f64 = (l + 1..=self.l_max)
            .map(|b| band_norm(&self.coeffs[b * b..(b + 1) * (b + 1)]) * band_sup_factor(b))
            .sum();
        Self {
            l_max: l,
            coeffs: self.coeffs[..(l + 1) * (l + 1)].to_vec(),
            truncation: self.truncation + dropped,
        }
    }

    /// Cheap upper bound on `max |f|` from the addition theorem.
    pub fn sup_bound(&self) -> f64 {
        (0..=self.l_max)
            .map(|l| band_norm(&self.coeffs[l * l..(l + 1) * (l + 1)]) * band_sup_factor(l))
            .sum::<f64>()
            + self.truncation
    }

    pub fn is_axisymmetric(&self, tol: f64) -> bool {
        (1..=self.l_max).all(|l| {
            (1..=l as i64).all(|q| self.coeff(l, q).abs() <= tol && self.coeff(l, -q).abs() <= tol)
        })
    }

    /// `n` with `f = const + n . p`, when `f` has no content above degree one.
    pub fn linear_part(&self, tol: f64) -> Option<Point> {
        if self.coeffs.iter().skip(4).any(|c| c.abs() > tol) {
            return None;
        }
        let s = (3.0 / (4.0 * PI)).sqrt();
        Some([s * self.coeff(1, 1), s * self.coeff(1, -1), s * self.coeff(1, 0)])
    }

    /// Complex azimuthal modes `F_q(u)` for `q = 0..=min(q_max, l_max)`, with
    /// `f(u, phi) = F_0 + 2 Re sum_{q>0} F_q e^{i q phi}`.
    pub fn fourier_modes(&self, table: &LegendreTable, q_max: usize) -> Vec<Complex64> {
        let qm = q_max.min(self.l_max);
        let mut modes = vec![Complex64::new(0.0, 0.0); qm + 1];
        for l in 0..=self.l_max {
            modes[0].re += self.coeffs[harmonic_index(l, 0)] * table.get(l, 0);
            for q in 1..=l.min(qm) {
                let p = table.get(l, q) / SQRT_2;
                let a = self.coeffs[harmonic_index(l, q as i64)];
                let b = self.coeffs[harmonic_index(l, -(q as i64))];
                modes[q] += Complex64::new(a * p, -b * p);
            }
        }
        modes
    }

    pub fn eval(&self, u: f64, phi: f64) -> f64 {
        self.eval_with_derivatives(u, phi).0
    }

    pub fn eval_point(&self, p: &Point) -> f64 {
        let (u, phi) = u_phi(p);
        self.eval(u, phi)
    }

    /// `(f, df/dphi, (1 - u^2) df/du)` at `(u, phi)`.
    pub fn eval_with_derivatives(&self, u: f64, phi: f64) -> (f64, f64, f64) {
        let table = LegendreTable::new(self.l_max, u);
        let (mut f, mut fphi, mut du) = (0.0, 0.0, 0.0);
        for l in 0..=self.l_max {
            let a0 = self.coeffs[harmonic_index(l, 0)];
            f += a0 * table.get(l, 0);
            du += a0 * table.sin_deriv(l, 0);
            for q in 1..=l {
                let (s, c) = (q as f64 * phi).sin_cos();
                let a = self.coeffs[harmonic_index(l, q as i64)];
                let b = self.coeffs[harmonic_index(l, -(q as i64))];
                let p = SQRT_2 * table.get(l, q);
                let dp = SQRT_2 * table.sin_deriv(l, q);
                f += p * (a * c + b * s);
                du += dp * (a * c + b * s);
                fphi += p * q as f64 * (b * c - a * s);
            }
        }
        (f, fphi, du)
    }

    /// Values on the grid, ring-major.
    pub fn samples(&self, grid: &QuadratureGrid) -> Vec<f64> {
        let n = grid.n_phi;
        grid.u_nodes
            .par_iter()
            .flat_map_iter(|&u| {
                let table = LegendreTable::new(self.l_max, u);
                let modes = self.fourier_modes(&table, self.l_max);
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                buf[0] += modes[0];
                for (q, m) in modes.iter().enumerate().skip(1) {
                    buf[q % n] += m;
                    buf[(n - q % n) % n] += m.conj();
                }
                grid.fft_inverse(&mut buf);
                buf.into_iter().map(|z| z.re)
            })
            .collect()
    }

    /// Projects sampled data onto harmonics of degree `<= l`. Exact when the
    /// data is band-limited and the grid resolves the product with degree `l`.
    pub fn analyze(grid: &QuadratureGrid, samples: &[f64], l: usize) -> Result<Self> {
        if !grid.resolves(l) {
            return Err(Error::Resolution {
                needed: l,
                available: grid.max_band_limit(),
            });
        }
        if samples.len() != grid.len() {
            return Err(Error::Input(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let n = grid.n_phi;
        let dphi = 2.0 * PI / n as f64;
        let partials: Vec<Vec<f64>> = grid
            .u_nodes
            .par_iter()
            .zip(grid.u_weights.par_iter())
            .zip(samples.par_chunks(n))
            .map(|((&u, &w), ring)| {
                let mut buf: Vec<Complex64> = ring.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                grid.fft_forward(&mut buf);
                let table = LegendreTable::new(l, u);
                let mut c = vec![0.0; (l + 1) * (l + 1)];
                for ll in 0..=l {
                    c[harmonic_index(ll, 0)] = w * dphi * table.get(ll, 0) * buf[0].re;
                    for q in 1..=ll {
                        let p = w * dphi * SQRT_2 * table.get(ll, q);
                        c[harmonic_index(ll, q as i64)] = p * buf[q].re;
                        c[harmonic_index(ll, -(q as i64))] = -p * buf[q].im;
                    }
                }
                c
            })
            .collect();
        // Fixed summation order keeps results bit-reproducible.
        let mut coeffs = vec![0.0; (l + 1) * (l + 1)];
        for p in &partials {
            for (c, v) in coeffs.iter_mut().zip(p) {
                *c += v;
            }
        }
        Ok(Self {
            l_max: l,
            coeffs,
            truncation: 0.0,
        })
    }

    /// `integral f omega` by quadrature on `grid`.
    pub fn integrate_on(&self, grid: &QuadratureGrid) -> Result<f64> {
        // The constant has degree 0, so exactness needs 2 n_u - 1 >= l_max.
        if 2 * grid.n_u < self.l_max + 1 || grid.n_phi <= self.l_max {
            return Err(Error::Resolution {
                needed: self.l_max,
                available: (2 * grid.n_u - 1).min(grid.n_phi - 1),
            });
        }
        Ok(0.5 * grid.integrate_area(&self.samples(grid)))
    }

    pub fn integrate(&self) -> f64 {
        let grid = QuadratureGrid::for_band_limit(self.l_max);
        self.integrate_on(&grid).expect("grid sized for the band limit")
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / TOTAL_AREA
    }

    /// `f - (integral f omega) / 2pi`; the constant mode is removed exactly.
    pub fn normalize_zero_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = 0.0;
        out
    }

    /// Holomorphic Laplacian `(1 + |z|^2)^2 d_z d_zbar`, i.e. the round
    /// Laplacian: `Y_{l,q} -> -l(l+1) Y_{l,q}`.
    pub fn laplacian(&self) -> Self {
        let mut out = self.clone();
        for l in 0..=self.l_max {
            let ev = -((l * (l + 1)) as f64);
            for c in &mut out.coeffs[l * l..(l + 1) * (l + 1)] {
                *c *= ev;
            }
        }
        out.truncation *= (self.l_max * (self.l_max + 1)) as f64;
        out
    }

    /// Pointwise combination of two functions, re-analysed at `l_out`.
    fn combine<F>(&self, other: &Self, l_full: usize, l_out: usize, op: F) -> Self
    where
        F: Fn((f64, f64, f64), (f64, f64, f64), f64) -> f64 + Sync,
    {
        let grid = QuadratureGrid::for_band_limit(l_full);
        let values: Vec<f64> = grid
            .u_nodes
            .par_iter()
            .flat_map_iter(|&u| {
                let (grid, op) = (&grid, &op);
                grid.phi_nodes.iter().map(move |&phi| {
                    op(
                        self.eval_with_derivatives(u, phi),
                        other.eval_with_derivatives(u, phi),
                        u,
                    )
                })
            })
            .collect();
        let full = Self::analyze(&grid, &values, l_full).expect("grid sized for the band limit");
        full.truncated(l_out)
    }

    pub fn product(&self, other: &Self) -> Self {
        self.product_capped(other, DEFAULT_L_CAP)
    }

    pub fn product_capped(&self, other: &Self, l_cap: usize) -> Self {
        let l_full = self.l_max + other.l_max;
        let out = self.combine(other, l_full, l_full.min(l_cap), |f, g, _| f.0 * g.0);
        let carried = self.truncation * other.sup_bound()
            + other.truncation * self.sup_bound()
            + self.truncation * other.truncation;
        let t = out.truncation + carried;
        out.with_truncation(t)
    }

    /// `{f, g} = 2 (f_phi g_u - f_u g_phi)`.
    pub fn poisson_bracket(&self, other: &Self) -> Self {
        self.poisson_bracket_capped(other, DEFAULT_L_CAP)
    }

    pub fn poisson_bracket_capped(&self, other: &Self, l_cap: usize) -> Self {
        let l_full = (self.l_max + other.l_max).max(1);
        let out = self.combine(other, l_full, l_full.min(l_cap), |f, g, u| {
            2.0 * (f.1 * g.2 - f.2 * g.1) / (1.0 - u * u)
        });
        // Derivatives of a discarded tail are only bounded through its band.
        let grad = 2.0 * l_cap as f64;
        let carried = grad
            * (self.truncation * other.sup_bound() * other.l_max.max(1) as f64
                + other.truncation * self.sup_bound() * self.l_max.max(1) as f64);
        let t = out.truncation + carried;
        out.with_truncation(t)
    }

    /// Poisson bracket evaluated on a caller-supplied grid.
    pub fn poisson_bracket_on(&self, other: &Self, grid: &QuadratureGrid) -> Result<Self> {
        let l_full = self.l_max + other.l_max;
        if !grid.resolves(l_full) {
            return Err(Error::Resolution {
                needed: l_full,
                available: grid.max_band_limit(),
            });
        }
        let values: Vec<f64> = grid
            .points()
            .map(|(u, phi)| {
                let f = self.eval_with_derivatives(u, phi);
                let g = other.eval_with_derivatives(u, phi);
                2.0 * (f.1 * g.2 - f.2 * g.1) / (1.0 - u * u)
            })
            .collect();
        Self::analyze(grid, &values, l_full)
    }

    /// `f o map`, re-analysed with a band limit that starts at
    /// `min(2 l_max, l_cap)` and doubles until the spectral tail is negligible
    /// or `l_cap` is reached.
    pub fn compose<F>(&self, map: F, l_cap: usize) -> Result<Self>
    where
        F: Fn(Point) -> Result<Point> + Sync + Send,
    {
        let mut l = (2 * self.l_max).clamp(1, l_cap.max(1));
        let scale = 1.0 + self.sup_bound();
        loop {
            let l_probe = 2 * l;
            let grid = QuadratureGrid::new(l_probe + l_probe / 4 + 4, 2 * l_probe + l_probe / 2 + 4);
            let values: Vec<f64> = grid
                .u_nodes
                .par_iter()
                .map(|&u| {
                    grid.phi_nodes
                        .iter()
                        .map(|&phi| Ok(self.eval_point(&map(point_from_u_phi(u, phi))?)))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<Vec<f64>>>>()?
                .concat();
            let probe = Self::analyze(&grid, &values, l_probe)?;
            let out = probe.truncated(l);
            let tail = out.truncation;
            if tail <= (COMPOSE_TOL * scale).max(analysis_noise(l_probe, scale)) || l >= l_cap {
                return Ok(out.with_truncation(tail + self.truncation));
            }
            l = (2 * l).min(l_cap);
        }
    }

    /// `max |f|`, by dense sampling (poles and `phi = 0` included) followed by
    /// a local pattern search around the extreme samples.
    pub fn sup_norm(&self) -> f64 {
        let n = (4 * self.l_max).max(16);
        let m = 2 * n;
        let mut best_max = (f64::NEG_INFINITY, 0.0, 0.0);
        let mut best_min = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=n {
            let theta = PI * i as f64 / n as f64;
            let phis = if i == 0 || i == n { 1 } else { m };
            for j in 0..phis {
                let phi = 2.0 * PI * j as f64 / m as f64;
                let v = self.eval(theta.cos(), phi);
                if v > best_max.0 {
                    best_max = (v, theta, phi);
                }
                if v < best_min.0 {
                    best_min = (v, theta, phi);
                }
            }
        }
        let step = PI / n as f64;
        let hi = self.pattern_search(best_max.1, best_max.2, step, 1.0);
        let lo = self.pattern_search(best_min.1, best_min.2, step, -1.0);
        hi.max(-lo).max(best_max.0).max(-best_min.0)
    }

    fn pattern_search(&self, mut theta: f64, mut phi: f64, mut step: f64, sign: f64) -> f64 {
        let eval = |t: f64, p: f64| sign * self.eval(t.cos(), p);
        let mut best = eval(theta, phi);
        while step > 1e-12 {
            let mut moved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = eval(theta + dt, phi + dp);
                if v > best {
                    best = v;
                    theta += dt;
                    phi += dp;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        sign * best
    }

    /// Tangential gradient in embedding coordinates, finite up to the poles.
    pub fn gradient(&self, p: &Point) -> Point {
        let r = super::norm(p);
        let u = (p[2] / r).clamp(-1.0, 1.0);
        let s = (p[0] * p[0] + p[1] * p[1]).sqrt() / r;
        let phi = p[1].atan2(p[0]);
        let q = legendre_over_sin(self.l_max, u, s);
        let (_, dzonal) = zonal_with_derivative(self.l_max, u);
        // d_theta f and (1/s) d_phi f.
        let (mut a, mut b) = (0.0, 0.0);
        for l in 0..=self.l_max {
            a -= s * self.coeffs[harmonic_index(l, 0)] * dzonal[l];
            let lf = l as f64;
            for m in 1..=l {
                let mf = m as f64;
                let (sn, cs) = (mf * phi).sin_cos();
                let c = self.coeffs[harmonic_index(l, m as i64)];
                let d = self.coeffs[harmonic_index(l, -(m as i64))];
                let mut dq = -lf * u * q[tri_index(l, m)];
                if l > m {
                    dq += ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt()
                        * q[tri_index(l - 1, m)];
                }
                a -= SQRT_2 * dq * (c * cs + d * sn);
                b += SQRT_2 * q[tri_index(l, m)] * mf * (d * cs - c * sn);
            }
        }
        let (sp, cp) = phi.sin_cos();
        [a * u * cp - b * sp, a * u * sp + b * cp, -a * s]
    }

    pub fn l2_coefficient_norm(&self) -> f64 {
        band_norm(&self.coeffs)
    }
}

fn band_norm(c: &[f64]) -> f64 {
    c.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Add for &SphereFunction {
    type Output = SphereFunction;

    fn add(self, rhs: &SphereFunction) -> SphereFunction {
        let l = self.l_max.max(rhs.l_max);
        let coeffs = self
            .padded(l)
            .into_iter()
            .zip(rhs.padded(l))
            .map(|(a, b)| a + b)
            .collect();
        SphereFunction {
            l_max: l,
            coeffs,
            truncation: self.truncation + rhs.truncation,
        }
    }
}

impl Add for SphereFunction {
    type Output = SphereFunction;

    fn add(self, rhs: SphereFunction) -> SphereFunction {
        &self + &rhs
    }
}

impl Sub for &SphereFunction {
    type Output = SphereFunction;

    fn sub(self, rhs: &SphereFunction) -> SphereFunction {
        self + &(-rhs)
    }
}

impl Sub for SphereFunction {
    type Output = SphereFunction;

    fn sub(self, rhs: SphereFunction) -> SphereFunction {
        &self - &rhs
    }
}

impl Neg for &SphereFunction {
    type Output = SphereFunction;

    fn neg(self) -> SphereFunction {
        self * -1.0
    }
}

impl Neg for SphereFunction {
    type Output = SphereFunction;

    fn neg(self) -> SphereFunction {
        &self * -1.0
    }
}

impl Mul<f64> for &SphereFunction {
    type Output = SphereFunction;

    fn mul(self, s: f64) -> SphereFunction {
        SphereFunction {
            l_max: self.l_max,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            truncation: self.truncation * s.abs(),
        }
    }
}

impl Mul<f64> for SphereFunction {
    type Output = SphereFunction;

    fn mul(self, s: f64) -> SphereFunction {
        &self * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::ClassicalFlow;

    fn u2() -> SphereFunction {
        SphereFunction::u().product(&SphereFunction::u()) - SphereFunction::constant(1.0 / 3.0)
    }

    fn max_abs_diff(a: &SphereFunction, b: &SphereFunction) -> f64 {
        let d = a - b;
        d.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    #[test]
    fn coordinate_functions_match_embedding() {
        let (u, phi): (f64, f64) = (0.3, 1.1);
        let s = (1.0 - u * u).sqrt();
        assert!((SphereFunction::x().eval(u, phi) - s * phi.cos()).abs() < 1e-14);
        assert!((SphereFunction::y().eval(u, phi) - s * phi.sin()).abs() < 1e-14);
        assert!((SphereFunction::u().eval(u, phi) - u).abs() < 1e-14);
    }

    #[test]
    fn integrate_examples() {
        assert!((SphereFunction::constant(1.0).integrate() - 2.0 * PI).abs() < 1e-12);
        assert!(SphereFunction::u().integrate().abs() < 1e-14);
        let uu = SphereFunction::u().product(&SphereFunction::u());
        // Oracle: 2pi * (1/2) integral_{-1}^{1} u^2 du = 2pi / 3.
        let oracle = 2.0 * PI * 0.5 * (2.0 / 3.0);
        assert!((uu.integrate() - oracle).abs() < 1e-12);
    }

    #[test]
    fn integrate_refuses_coarse_grid() {
        let f = SphereFunction::harmonic(6, 3);
        let coarse = QuadratureGrid::new(2, 4);
        assert!(matches!(f.integrate_on(&coarse), Err(Error::Resolution { .. })));
    }

    #[test]
    fn zero_mean_normalization() {
        assert!(SphereFunction::constant(1.0).normalize_zero_mean().sup_bound() < 1e-15);
        let u = SphereFunction::u();
        assert!(max_abs_diff(&u.normalize_zero_mean(), &u) == 0.0);
        let uu = SphereFunction::u().product(&SphereFunction::u());
        let n = uu.normalize_zero_mean();
        assert!(n.integrate().abs() < 1e-12);
        assert!(max_abs_diff(&n, &u2()) < 1e-14);
    }

    #[test]
    fn synthesis_analysis_round_trip() {
        let l = 10;
        let coeffs: Vec<f64> = (0..(l + 1) * (l + 1)).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let f = SphereFunction::from_coeffs(l, coeffs).unwrap();
        let grid = QuadratureGrid::for_band_limit(l);
        let back = SphereFunction::analyze(&grid, &f.samples(&grid), l).unwrap();
        assert!(max_abs_diff(&f, &back) < 1e-12);
        // Direct pointwise evaluation agrees with the FFT synthesis.
        let s = f.samples(&grid);
        for (i, (u, phi)) in grid.points().enumerate().step_by(17) {
            assert!((s[i] - f.eval(u, phi)).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_kills_every_nonconstant_harmonic() {
        let l_max = 12;
        let grid = QuadratureGrid::for_band_limit(l_max);
        for l in 1..=l_max {
            for q in -(l as i64)..=(l as i64) {
                let v = SphereFunction::harmonic(l, q).integrate_on(&grid).unwrap();
                assert!(v.abs() < 1e-12, "l={l} q={q}: {v}");
            }
        }
    }

    #[test]
    fn bracket_examples() {
        let (x, y, u) = (SphereFunction::x(), SphereFunction::y(), SphereFunction::u());
        assert!(max_abs_diff(&x.poisson_bracket(&y), &(&u * 2.0)) < 1e-13);
        assert!(max_abs_diff(&u.poisson_bracket(&x), &(&y * 2.0)) < 1e-13);
        assert!(max_abs_diff(&y.poisson_bracket(&u), &(&x * 2.0)) < 1e-13);
        let f = u2();
        assert!(f.poisson_bracket(&f).sup_bound() < 1e-13);
    }

    #[test]
    fn bracket_sign_matches_flow_transport() {
        // d/dt x o phi_t^{-1} at t = 0 equals -{u, x}; the flow of u is exact.
        let u = SphereFunction::u();
        let x = SphereFunction::x();
        let flow = ClassicalFlow::of_hamiltonian(&u);
        let h = 1e-4;
        let fwd = flow.pullback(&x, h, 8).unwrap();
        let bwd = flow.pullback(&x, -h, 8).unwrap();
        let deriv = (&fwd - &bwd) * (1.0 / (2.0 * h));
        let expected = -u.poisson_bracket(&x);
        assert!(max_abs_diff(&deriv, &expected) < 1e-7);
    }

    #[test]
    fn bracket_on_coarse_grid_is_rejected() {
        let f = SphereFunction::harmonic(3, 1);
        let g = SphereFunction::harmonic(3, -2);
        assert!(f.poisson_bracket_on(&g, &QuadratureGrid::for_band_limit(4)).is_err());
        let ok = f.poisson_bracket_on(&g, &QuadratureGrid::for_band_limit(6)).unwrap();
        assert!(max_abs_diff(&ok, &f.poisson_bracket(&g)) < 1e-12);
    }

    #[test]
    fn laplacian_examples() {
        assert!(SphereFunction::constant(1.0).laplacian().sup_bound() < 1e-15);
        let u = SphereFunction::u();
        assert!(max_abs_diff(&u.laplacian(), &(&u * -2.0)) < 1e-15);
        let f = u2();
        assert!(max_abs_diff(&f.laplacian(), &(&f * -6.0)) < 1e-13);
    }

    #[test]
    fn laplacian_matches_affine_chart_operator() {
        // (1 + |z|^2)^2 d_z d_zbar = (1 + r^2)^2 / 4 (d_xx + d_yy) by finite differences.
        let f = SphereFunction::harmonic(3, 2) + SphereFunction::harmonic(2, -1);
        let lap = f.laplacian();
        let val = |a: f64, b: f64| f.eval_point(&crate::sphere::point_from_affine(a, b));
        let (a, b, h) = (0.4, -0.7, 1e-4);
        let d2 = (val(a + h, b) + val(a - h, b) + val(a, b + h) + val(a, b - h) - 4.0 * val(a, b)) / (h * h);
        let r2 = a * a + b * b;
        let fd = (1.0 + r2).powi(2) / 4.0 * d2;
        let exact = lap.eval_point(&crate::sphere::point_from_affine(a, b));
        assert!((fd - exact).abs() < 1e-5, "{fd} vs {exact}");
    }

    #[test]
    fn gradient_matches_chart_derivatives() {
        let f = SphereFunction::harmonic(3, 2) + SphereFunction::harmonic(4, -1) * 0.3;
        let p = crate::sphere::point_from_u_phi(0.2, 0.7);
        let g = f.gradient(&p);
        let h = 1e-6;
        for e in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let axis = crate::sphere::normalize(crate::sphere::cross(&p, &e));
            let fd = (f.eval_point(&crate::sphere::rotate(&p, &axis, h))
                - f.eval_point(&crate::sphere::rotate(&p, &axis, -h)))
                / (2.0 * h);
            // Rotating about p x e moves p along the tangent projection of e.
            let tangent_len = crate::sphere::norm(&crate::sphere::cross(&p, &e));
            let ed = crate::sphere::dot(&e, &p);
            let t = [(e[0] - ed * p[0]) / tangent_len, (e[1] - ed * p[1]) / tangent_len, (e[2] - ed * p[2]) / tangent_len];
            assert!((fd - crate::sphere::dot(&g, &t)).abs() < 1e-8);
        }
    }

    #[test]
    fn sup_norm_of_known_functions() {
        assert!((SphereFunction::u().sup_norm() - 1.0).abs() < 1e-12);
        assert!((SphereFunction::x().sup_norm() - 1.0).abs() < 1e-12);
        assert!((u2().sup_norm() - 2.0 / 3.0).abs() < 1e-12);
        let xy = SphereFunction::x().product(&SphereFunction::y());
        assert!((xy.sup_norm() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn gradient_of_linear_function() {
        let f = SphereFunction::linear([0.2, -0.5, 0.7]);
        for p in [
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [1e-9, 0.0, 1.0],
            crate::sphere::point_from_u_phi(0.3, 2.0),
        ] {
            let g = f.gradient(&p);
            let n = [0.2, -0.5, 0.7];
            let np = crate::sphere::dot(&n, &p);
            for i in 0..3 {
                assert!((g[i] - (n[i] - np * p[i])).abs() < 1e-12, "{g:?}");
            }
        }
    }

    #[test]
    fn truncation_is_recorded() {
        let f = SphereFunction::harmonic(5, 2) * 0.5 + SphereFunction::u();
        let t = f.truncated(2);
        assert_eq!(t.l_max(), 2);
        assert!((t.truncation() - 0.5 * (11.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
        let p = f.product_capped(&f, 6);
        assert!(p.truncation() > 0.0);
    }
}
