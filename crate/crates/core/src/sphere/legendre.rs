//! Gauss-Legendre rules and fully normalized associated Legendre functions.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for l in 2..=n {
        let lf = l as f64;
        let p2 = ((2.0 * lf - 1.0) * x * p1 - (lf - 1.0) * p0) / lf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        w.iter().map(|w| 0.5 * w).collect(),
    )
}

#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// `Pbar_l^m(u)` for `0 <= m <= l <= l_max`, orthonormal on the sphere once
/// paired with `sqrt(2) cos / sin (m phi)` (no Condon-Shortley phase), plus
/// `(1 - u^2) d/du Pbar_l^m`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub l_max: usize,
    pub values: Vec<f64>,
    pub sin_derivs: Vec<f64>,
}

impl LegendreTable {
    pub fn new(l_max: usize, u: f64) -> Self {
        let size = tri_index(l_max, l_max) + 1;
        let mut p = vec![0.0; size];
        let s = (1.0 - u * u).max(0.0).sqrt();
        p[0] = 1.0 / (4.0 * PI).sqrt();
        for m in 1..=l_max {
            let mf = m as f64;
            p[tri_index(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri_index(m - 1, m - 1)];
        }
        for m in 0..l_max {
            p[tri_index(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * u * p[tri_index(m, m)];
        }
        for m in 0..=l_max {
            let mf = m as f64;
            for l in (m + 2)..=l_max {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                p[tri_index(l, m)] = a * (u * p[tri_index(l - 1, m)] - b * p[tri_index(l - 2, m)]);
            }
        }
        let mut d = vec![0.0; size];
        for l in 0..=l_max {
            let lf = l as f64;
            for m in 0..=l {
                let mf = m as f64;
                let mut v = -lf * u * p[tri_index(l, m)];
                if l > m {
                    v += ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt()
                        * p[tri_index(l - 1, m)];
                }
                d[tri_index(l, m)] = v;
            }
        }
        Self {
            l_max,
            values: p,
            sin_derivs: d,
        }
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        self.values[tri_index(l, m)]
    }

    #[inline]
    pub fn sin_deriv(&self, l: usize, m: usize) -> f64 {
        self.sin_derivs[tri_index(l, m)]
    }
}

/// `Pbar_l^m(u) / sin(theta)` for `m >= 1` (entries with `m = 0` are zero),
/// finite at the poles. `s` is `sin(theta)`, passed separately so callers can
/// supply it without the cancellation in `sqrt(1 - u^2)`.
pub fn legendre_over_sin(l_max: usize, u: f64, s: f64) -> Vec<f64> {
    let mut q = vec![0.0; tri_index(l_max, l_max) + 1];
    if l_max == 0 {
        return q;
    }
    q[tri_index(1, 1)] = (1.5f64).sqrt() / (4.0 * PI).sqrt();
    for m in 2..=l_max {
        let mf = m as f64;
        q[tri_index(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * q[tri_index(m - 1, m - 1)];
    }
    for m in 1..l_max {
        q[tri_index(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * u * q[tri_index(m, m)];
    }
    for m in 1..=l_max {
        let mf = m as f64;
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            q[tri_index(l, m)] = a * (u * q[tri_index(l - 1, m)] - b * q[tri_index(l - 2, m)]);
        }
    }
    q
}

/// Zonal values `Pbar_l^0(u)` and their plain `u`-derivatives, valid at the poles.
pub fn zonal_with_derivative(l_max: usize, u: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; l_max + 1];
    let mut dp = vec![0.0; l_max + 1];
    p[0] = 1.0;
    if l_max >= 1 {
        p[1] = u;
        dp[1] = 1.0;
    }
    for l in 1..l_max {
        let lf = l as f64;
        p[l + 1] = ((2.0 * lf + 1.0) * u * p[l] - lf * p[l - 1]) / (lf + 1.0);
        dp[l + 1] = dp[l - 1] + (2.0 * lf + 1.0) * p[l];
    }
    for l in 0..=l_max {
        let norm = ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt();
        p[l] *= norm;
        dp[l] *= norm;
    }
    (p, dp)
}
