use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::HamiltonianPath;
use crate::error::{Error, Result};
use crate::quantization::{
    exp_i_hermitian, exp_i_hermitian_fast, matmul, op_norm, polar_unitary, quantize, roundoff, CMatrix, PropagatorMeta, QuantizationLevel,
    Quantizer, UnitaryPropagator,
};

/// Knobs for solving `U' = -i k Q_k(f_t) U`, `U(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub quantizer: Quantizer,
    /// Stop refining once successive extrapolated results differ by less
    /// than this in operator norm.
    pub tol: f64,
    /// Cap on midpoint steps per smooth segment.
    pub max_steps: usize,
    pub initial_steps: usize,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            quantizer: Quantizer::Fine,
            tol: 1e-10,
            max_steps: 1 << 20,
            initial_steps: 2,
        }
    }
}

/// `mu_k` of the path's time-one map, with the fine quantization.
pub fn propagate(level: &QuantizationLevel, path: &HamiltonianPath) -> Result<UnitaryPropagator> {
    propagate_with(level, path, &PropagateOptions::default())
}

/// Time-independent stretches use the exact exponential
/// `exp(-i k Q(f) dt)`; time-dependent ones use exponential-midpoint steps
/// with step halving and Richardson extrapolation (the midpoint rule is
/// symmetric, so its error expands in even powers of the step).
pub fn propagate_with(
    level: &QuantizationLevel,
    path: &HamiltonianPath,
    opts: &PropagateOptions,
) -> Result<UnitaryPropagator> {
    let k = level.k as f64;
    let mut knots = vec![0.0];
    knots.extend(path.breakpoints());
    knots.push(1.0);
    let mut u = CMatrix::identity(level.dim, level.dim);
    let mut error = 0.0;
    let mut steps = 0usize;
    let mut stepped = false;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let seg = match path.autonomous_on(a, b) {
            Some(f) => {
                let (v, est) = exp_i_hermitian(quantize(level, &f, opts.quantizer).matrix(), k * (b - a));
                error += est + k * (b - a) * (f.truncation() + roundoff(level.dim, f.sup_bound()));
                steps = steps.max(1);
                v
            }
            None => {
                let (v, est, n) = richardson(level, path, a, b, opts)?;
                error += est;
                steps = steps.max(n);
                stepped = true;
                v
            }
        };
        u = matmul(&seg, &u);
    }
    if stepped {
        u = polar_unitary(&u);
    }
    Ok(UnitaryPropagator {
        level: *level,
        matrix: u,
        meta: PropagatorMeta {
            path: path.label().to_string(),
            steps,
            error_estimate: error,
        },
    })
}

/// Product of `n` exponential-midpoint steps on `[a, b]` and the largest
/// truncation plus quantization roundoff of the sampled Hamiltonians.
pub fn midpoint_product(
    level: &QuantizationLevel,
    path: &HamiltonianPath,
    a: f64,
    b: f64,
    n: usize,
    quantizer: Quantizer,
) -> Result<(CMatrix, f64)> {
    const CHUNK: usize = 32;
    let k = level.k as f64;
    let h = (b - a) / n as f64;
    let mut u = CMatrix::identity(level.dim, level.dim);
    let mut trunc = 0.0f64;
    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        let factors: Vec<(CMatrix, f64)> = (start..end)
            .into_par_iter()
            .map(|s| {
                let f = path.hamiltonian(a + (s as f64 + 0.5) * h)?;
                let v = exp_i_hermitian_fast(quantize(level, &f, quantizer).matrix(), k * h);
                Ok((v, f.truncation() + roundoff(level.dim, f.sup_bound())))
            })
            .collect::<Result<_>>()?;
        for (v, t) in factors {
            u = matmul(&v, &u);
            trunc = trunc.max(t);
        }
    }
    Ok((u, trunc))
}

fn richardson(
    level: &QuantizationLevel,
    path: &HamiltonianPath,
    a: f64,
    b: f64,
    opts: &PropagateOptions,
) -> Result<(CMatrix, f64, usize)> {
    let k = level.k as f64;
    let mut n = opts.initial_steps.max(1);
    let mut prev: Vec<CMatrix> = Vec::new();
    let mut last_diff = f64::INFINITY;
    loop {
        let (t0, trunc) = midpoint_product(level, path, a, b, n, opts.quantizer)?;
        let mut row = vec![t0];
        for i in 1..=prev.len() {
            let factor = Complex64::new(1.0 / (4f64.powi(i as i32) - 1.0), 0.0);
            let next = &row[i - 1] + (&row[i - 1] - &prev[i - 1]) * factor;
            row.push(next);
        }
        if let Some(p) = prev.last() {
            let diff = op_norm(&(row.last().expect("row is non-empty") - p));
            if diff < opts.tol {
                let est = diff + k * (b - a) * trunc;
                return Ok((row.pop().expect("row is non-empty"), est, n));
            }
            last_diff = diff;
        }
        if 2 * n > opts.max_steps {
            return Err(Error::Integration(format!(
                "no convergence on [{a}, {b}] with {n} steps: last change {last_diff:.3e} > {:.1e}",
                opts.tol
            )));
        }
        prev = row;
        n *= 2;
    }
}
