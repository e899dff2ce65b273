use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::linalg::CMatrix;
use super::{HermitianOperator, QuantizationLevel};
use crate::error::{Error, Result};
use crate::sphere::legendre::{gauss_legendre_unit, LegendreTable};
use crate::sphere::{QuadratureGrid, SphereFunction};

/// Which quantization `Q_k` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantizer {
    /// `T_k(f)`.
    Toeplitz,
    /// `Op_k(f) = T_k(f - Delta f / 2k)`.
    Fine,
}

impl Quantizer {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Toeplitz => "toeplitz",
            Self::Fine => "fine",
        }
    }
}

impl std::str::FromStr for Quantizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "toeplitz" => Ok(Self::Toeplitz),
            "fine" => Ok(Self::Fine),
            other => Err(Error::UnknownName(format!(
                "quantizer '{other}' (expected toeplitz or fine)"
            ))),
        }
    }
}

/// Gauss-Legendre nodes on `[0, 1]` that integrate every Toeplitz matrix
/// element of a band-`l_max` symbol exactly (the radial integrand is a
/// polynomial of degree `m + l_max` in `t = |z|^2 / (1 + |z|^2)`).
pub fn required_nodes(level: &QuantizationLevel, l_max: usize) -> usize {
    (level.m + l_max).div_ceil(2) + 2
}

/// Floating-point error allowance, in operator norm, for a quantized symbol
/// of sup-norm `scale` at dimension `dim`. Matrix entries come from
/// exponentials of log-binomials of size up to `dim`, so each carries a
/// relative error of order `dim * eps`.
pub fn roundoff(dim: usize, scale: f64) -> f64 {
    (dim * dim) as f64 * f64::EPSILON * scale.max(1.0)
}

fn ln_binomials(m: usize) -> Vec<f64> {
    let mut ln_fact = vec![0.0; m + 1];
    for i in 1..=m {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (0..=m).map(|j| ln_fact[m] - ln_fact[j] - ln_fact[m - j]).collect()
}

/// `T_k(f)` with the default exact node count.
pub fn toeplitz(level: &QuantizationLevel, f: &SphereFunction) -> HermitianOperator {
    toeplitz_with_nodes(level, f, required_nodes(level, f.l_max()))
        .expect("default node count is exact")
}

/// `T_k(f)_{ij} = <f e_j, e_i>`. Only the azimuthal mode `q = i - j` of `f`
/// reaches entry `(i, j)`; with `t = r^2 / (1 + r^2)` the entry is
/// `(m + 1) int_0^1 a_i(t) a_j(t) F_{i-j}(1 - 2t) dt`,
/// `a_i(t)^2 = binom(m, i) t^i (1 - t)^(m - i)`.
pub fn toeplitz_with_nodes(
    level: &QuantizationLevel,
    f: &SphereFunction,
    nodes: usize,
) -> Result<HermitianOperator> {
    let m = level.m;
    let minimal = (m + f.l_max() + 1).div_ceil(2);
    if nodes < minimal {
        return Err(Error::Resolution {
            needed: m + f.l_max(),
            available: (2 * nodes).saturating_sub(1),
        });
    }
    let dim = level.dim;
    let q_max = f.l_max().min(m);
    let ln_binom = ln_binomials(m);
    let (ts, ws) = gauss_legendre_unit(nodes);
    // Band storage: band[q][j] accumulates entry (j + q, j).
    let mut band = vec![vec![Complex64::new(0.0, 0.0); dim]; q_max + 1];
    let mut a = vec![0.0; dim];
    for (&t, &w) in ts.iter().zip(&ws) {
        let (lt, l1t) = (t.ln(), (1.0 - t).ln());
        for (i, ai) in a.iter_mut().enumerate() {
            *ai = (0.5 * (ln_binom[i] + i as f64 * lt + (m - i) as f64 * l1t)).exp();
        }
        let table = LegendreTable::new(f.l_max(), 1.0 - 2.0 * t);
        let modes = f.fourier_modes(&table, q_max);
        for (q, row) in band.iter_mut().enumerate() {
            let fq = modes[q] * w;
            for j in 0..dim - q {
                row[j] += fq * (a[j + q] * a[j]);
            }
        }
    }
    let scale = (m + 1) as f64;
    let mut mat = CMatrix::zeros(dim, dim);
    for (q, row) in band.iter().enumerate() {
        for j in 0..dim - q {
            let v = row[j] * scale;
            if q == 0 {
                mat[(j, j)] = Complex64::new(v.re, 0.0);
            } else {
                mat[(j + q, j)] = v;
                mat[(j, j + q)] = v.conj();
            }
        }
    }
    Ok(HermitianOperator::from_parts(*level, mat))
}

/// `Op_k(f) = T_k(f - Delta f / 2k)`.
pub fn op_fine(level: &QuantizationLevel, f: &SphereFunction) -> HermitianOperator {
    let corrected = f - &(f.laplacian() * (0.5 / level.k as f64));
    toeplitz(level, &corrected)
}

pub fn quantize(level: &QuantizationLevel, f: &SphereFunction, q: Quantizer) -> HermitianOperator {
    match q {
        Quantizer::Toeplitz => toeplitz(level, f),
        Quantizer::Fine => op_fine(level, f),
    }
}

/// Gram matrix of the monomial basis, by direct quadrature of
/// `c_i c_j z^i zbar^j (1 + |z|^2)^{-m}` against `omega` in the `(u, phi)`
/// chart (independent of the Toeplitz route).
pub fn gram_matrix(level: &QuantizationLevel) -> CMatrix {
    let m = level.m;
    let dim = level.dim;
    let grid = QuadratureGrid::new(m / 2 + 2, 2 * m + 2);
    let ln_binom = ln_binomials(m);
    let ln_c: Vec<f64> = ln_binom
        .iter()
        .map(|lb| 0.5 * (((m + 1) as f64).ln() + lb - (2.0 * PI).ln()))
        .collect();
    let dphi = 2.0 * PI / grid.n_phi as f64;
    // angular[d + m] = sum over phi nodes of e^{i d phi}.
    let angular: Vec<Complex64> = (-(m as i64)..=m as i64)
        .map(|d| {
            grid.phi_nodes
                .iter()
                .map(|&phi| Complex64::from_polar(1.0, d as f64 * phi))
                .sum()
        })
        .collect();
    let mut g = CMatrix::zeros(dim, dim);
    for (&u, &w) in grid.u_nodes.iter().zip(&grid.u_weights) {
        // |z|^2 = (1 - u)/(1 + u) and (1 + |z|^2)^{-1} = (1 + u)/2.
        let (ln_minus, ln_plus) = (((1.0 - u) / 2.0).ln(), ((1.0 + u) / 2.0).ln());
        for i in 0..dim {
            for j in 0..dim {
                let half = 0.5 * (i + j) as f64;
                let radial = (ln_c[i] + ln_c[j] + half * ln_minus + (m as f64 - half) * ln_plus).exp();
                // omega = 1/2 dphi du.
                g[(i, j)] += angular[i + m - j] * (0.5 * w * dphi * radial);
            }
        }
    }
    g
}

/// `||[Q f, Q g] - (hbar / i) Q({f, g})||_op`.
pub fn bracket_defect(
    level: &QuantizationLevel,
    f: &SphereFunction,
    g: &SphereFunction,
    q: Quantizer,
) -> f64 {
    let qf = quantize(level, f, q);
    let qg = quantize(level, g, q);
    let qb = quantize(level, &f.poisson_bracket(g), q);
    let comm = super::commutator(qf.matrix(), qg.matrix());
    // (hbar / i) = -i / k.
    let rhs = qb.matrix() * Complex64::new(0.0, -level.hbar());
    super::op_norm(&(comm - rhs))
}
