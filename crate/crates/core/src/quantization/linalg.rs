//! Dense complex matrix services: norms, traces, exponentials, phase-quotient
//! distances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `A B`. Splits into real and imaginary parts so the four products run on
/// the blocked real kernel; the generic complex product is several times slower.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMatrix::from_fn(a.nrows(), b.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// `A* B`.
pub fn adjoint_matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(&a.adjoint(), b)
}

/// Frobenius norm, an upper bound for the operator norm.
pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise deviation from `A = A*`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn is_hermitian(a: &CMatrix) -> bool {
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    hermiticity_defect(a) <= 1e-14 * scale
}

/// Singular values, descending. Hermitian input uses `|eigenvalues|`; anything
/// else goes through the spectrum of `A* A`.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = if is_hermitian(a) {
        hermitian_eigenvalues(a).into_iter().map(f64::abs).collect()
    } else {
        hermitian_eigenvalues(&adjoint_matmul(a, a))
            .into_iter()
            .map(|l| l.max(0.0).sqrt())
            .collect()
    };
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// `(sum sigma_i^p)^(1/p)`; `p = infinity` is the operator norm.
pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("Schatten exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(op_norm(a));
    }
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    // Scale by the largest value so large p cannot overflow.
    let sum: f64 = s.iter().map(|x| (x / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().fold(C0, |acc, z| acc + z)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(a, b) - matmul(b, a)
}

/// `exp(-i scale H)` for Hermitian `H`, with a residual-based error bound
/// `|scale| ||H V - V L||_F + ||V* V - I||_F`.
pub fn exp_i_hermitian(h: &CMatrix, scale: f64) -> (CMatrix, f64) {
    let n = h.nrows();
    let (values, v) = hermitian_eigen(h);
    let u = eigen_exponential(&values, &v, scale);
    let mut hv = matmul(h, &v);
    for (j, mut col) in hv.column_iter_mut().enumerate() {
        col -= v.column(j) * Complex64::new(values[j], 0.0);
    }
    let orth = adjoint_matmul(&v, &v) - CMatrix::identity(n, n);
    let est = scale.abs() * frobenius_norm(&hv) + frobenius_norm(&orth);
    (u, est)
}

/// `exp(-i scale H)` without the error bound.
pub fn exp_i_hermitian_fast(h: &CMatrix, scale: f64) -> CMatrix {
    let (values, v) = hermitian_eigen(h);
    eigen_exponential(&values, &v, scale)
}

fn eigen_exponential(values: &[f64], v: &CMatrix, scale: f64) -> CMatrix {
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::from_polar(1.0, -scale * l)),
    );
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    matmul(&vd, &v.adjoint())
}

/// `||U* U - I||_op`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    op_norm(&(adjoint_matmul(u, u) - CMatrix::identity(n, n)))
}

/// Nearest unitary matrix (polar factor) `U (U* U)^(-1/2)`.
pub fn polar_unitary(u: &CMatrix) -> CMatrix {
    let (values, v) = hermitian_eigen(&adjoint_matmul(u, u));
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::new(1.0 / values[j].max(f64::MIN_POSITIVE).sqrt(), 0.0);
    }
    matmul(&matmul(u, &scaled), &v.adjoint())
}

/// `inf_theta ||U - e^{i theta} V||_p` by a 256-point scan followed by
/// golden-section refinement to `1e-10` in `theta`.
pub fn projective_distance(u: &CMatrix, v: &CMatrix, p: f64) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::LevelMismatch(u.nrows(), v.nrows()));
    }
    let dist = |theta: f64| schatten_norm(&(u - v * Complex64::from_polar(1.0, theta)), p);
    const SCAN: usize = 256;
    let step = std::f64::consts::TAU / SCAN as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..SCAN {
        let theta = i as f64 * step;
        let d = dist(theta)?;
        if d < best.0 {
            best = (d, theta);
        }
    }
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (dist(c)?, dist(d)?);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = dist(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = dist(d)?;
        }
    }
    Ok(best.0.min(fc).min(fd))
}

/// Closed form for the Frobenius norm: the optimal phase is `arg tr(V* U)`.
pub fn projective_distance_frobenius(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::LevelMismatch(u.nrows(), v.nrows()));
    }
    let t = trace(&(v.adjoint() * u));
    let theta = t.arg();
    schatten_norm(&(u - v * Complex64::from_polar(1.0, theta)), 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
    }

    #[test]
    fn identity_schatten_norms() {
        let id = CMatrix::identity(16, 16);
        for p in [1.0, 2.0, 5.0] {
            let expected = 16f64.powf(1.0 / p);
            assert!((schatten_norm(&id, p).unwrap() - expected).abs() < 1e-12);
        }
        assert!((schatten_norm(&id, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(schatten_norm(&id, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn op_norm_of_non_normal_matrix() {
        // [[0, 2], [0, 0]] has singular values 2 and 0.
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = Complex64::new(2.0, 0.0);
        assert!((op_norm(&a) - 2.0).abs() < 1e-14);
        assert!((schatten_norm(&a, 1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_is_unitary_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(12, &mut rng);
        let (u, est) = exp_i_hermitian(&h, 3.0);
        let (w, _) = exp_i_hermitian(&h, -3.0);
        assert!(est < 1e-11);
        assert!(unitarity_defect(&u) < 1e-12);
        assert!(op_norm(&(&u * &w - CMatrix::identity(12, 12))) < 1e-12);
    }

    #[test]
    fn polar_factor_repairs_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (u, _) = exp_i_hermitian(&random_hermitian(6, &mut rng), 1.0);
        let drifted = &u * Complex64::new(1.0 + 1e-7, 0.0);
        let fixed = polar_unitary(&drifted);
        assert!(unitarity_defect(&fixed) < 1e-14);
        assert!(op_norm(&(fixed - u)) < 1e-13);
    }

    #[test]
    fn projective_distance_quotients_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (u, _) = exp_i_hermitian(&random_hermitian(8, &mut rng), 1.0);
        let v = &u * Complex64::from_polar(1.0, 1.234);
        for p in [1.0, 2.0, f64::INFINITY] {
            assert!(projective_distance(&u, &u, p).unwrap() < 1e-9);
            assert!(projective_distance(&u, &v, p).unwrap() < 1e-9);
        }
    }

    #[test]
    fn golden_section_matches_frobenius_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (u, _) = exp_i_hermitian(&random_hermitian(6, &mut rng), 1.0);
            let (v, _) = exp_i_hermitian(&random_hermitian(6, &mut rng), 1.0);
            let closed = projective_distance_frobenius(&u, &v).unwrap();
            let searched = projective_distance(&u, &v, 2.0).unwrap();
            assert!((closed - searched).abs() < 1e-9, "{closed} vs {searched}");
        }
    }

    #[test]
    fn commutator_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_hermitian(5, &mut rng);
        let b = random_hermitian(5, &mut rng);
        assert!(trace(&commutator(&a, &b)).norm() < 1e-13);
        assert!(trace(&CMatrix::identity(5, 5)).re == 5.0);
    }
}
