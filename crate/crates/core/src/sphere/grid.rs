use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::legendre::gauss_legendre;

/// Gauss-Legendre nodes in `u = cos(theta)` times equispaced azimuths.
///
/// Exact for integrands whose `u`-degree is at most `2 n_u - 1` and whose
/// azimuthal modes are below `n_phi`.
#[derive(Clone)]
pub struct QuadratureGrid {
    pub n_u: usize,
    pub n_phi: usize,
    pub u_nodes: Vec<f64>,
    pub u_weights: Vec<f64>,
    pub phi_nodes: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for QuadratureGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadratureGrid")
            .field("n_u", &self.n_u)
            .field("n_phi", &self.n_phi)
            .finish()
    }
}

impl QuadratureGrid {
    pub fn new(n_u: usize, n_phi: usize) -> Self {
        let n_u = n_u.max(1);
        let n_phi = n_phi.max(1);
        let (u_nodes, u_weights) = gauss_legendre(n_u);
        let phi_nodes = (0..n_phi)
            .map(|j| 2.0 * PI * j as f64 / n_phi as f64)
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n_u,
            n_phi,
            u_nodes,
            u_weights,
            phi_nodes,
            forward: planner.plan_fft_forward(n_phi),
            inverse: planner.plan_fft_inverse(n_phi),
        }
    }

    /// Smallest grid on which the analysis of a band-`l` function is exact.
    pub fn for_band_limit(l: usize) -> Self {
        Self::new(l + 1, 2 * l + 2)
    }

    /// Largest band limit `L` such that products of two band-`L` functions
    /// integrate exactly.
    pub fn max_band_limit(&self) -> usize {
        (self.n_u - 1).min((self.n_phi - 1) / 2)
    }

    pub fn resolves(&self, l: usize) -> bool {
        l <= self.max_band_limit()
    }

    /// Integrates sampled data against the standard area form `dphi du`.
    pub fn integrate_area(&self, samples: &[f64]) -> f64 {
        let dphi = 2.0 * PI / self.n_phi as f64;
        self.u_weights
            .iter()
            .zip(samples.chunks(self.n_phi))
            .map(|(w, ring)| w * ring.iter().sum::<f64>())
            .sum::<f64>()
            * dphi
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points as `(u, phi)`, ring-major.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u_nodes
            .iter()
            .flat_map(move |&u| self.phi_nodes.iter().map(move |&phi| (u, phi)))
    }
}
