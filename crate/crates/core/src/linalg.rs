//! Dense symmetric eigensolver, Krylov norm estimation and small numeric helpers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::C64;

/// Eigenvalues (ascending) and column-major eigenvectors of a real symmetric matrix.
///
/// `matrix` is `n x n` row-major; only its lower triangle is read.
pub fn symmetric_eigen(matrix: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(matrix.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let frob = matrix.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !frob.is_finite() {
        return Err(Error::Eigensolver { info: -4, condition: "matrix has non-finite entries".into() });
    }
    let a = Mat::from_fn(n, n, |i, j| matrix[i * n + j]);
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver {
        info: 1,
        condition: format!("n = {n}, Frobenius norm = {frob:.6e}: {e:?}"),
    })?;
    let w: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    let u = evd.U();
    let mut vectors = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            vectors[j * n + i] = u[(i, j)];
        }
    }
    Ok((w, vectors))
}

/// Eigenvalues of a symmetric tridiagonal matrix (ascending).
fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let t = Mat::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if i == j + 1 {
            off[j]
        } else if j == i + 1 {
            off[i]
        } else {
            0.0
        }
    });
    t.self_adjoint_eigenvalues(Side::Lower).expect("tridiagonal eigenvalues")
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator, by Lanczos
/// with full reorthogonalization.
///
/// Stops when the Ritz value changes by less than `tol` relatively between steps
/// or when the Krylov space becomes invariant.
pub fn lanczos_max_eigenvalue<F>(apply: F, n: usize, tol: f64, seed: u64) -> f64
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut previous = f64::NAN;
    let max_steps = n.min(300);
    for _ in 0..max_steps {
        let mut w = apply(&q);
        let alpha = inner(&w, &q).re;
        basis.push(q.clone());
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let c = inner(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = norm2(&w);
        let ritz = *tridiagonal_eigenvalues(&alphas, &betas).last().unwrap();
        let scale = ritz.abs().max(f64::MIN_POSITIVE);
        let invariant = beta <= 1e-13 * scale.max(alpha.abs());
        if invariant || (previous.is_finite() && (ritz - previous).abs() <= tol * scale) {
            return ritz.max(0.0);
        }
        previous = ritz;
        betas.push(beta);
        q = w.into_iter().map(|v| v / beta).collect();
    }
    previous.max(0.0)
}

/// Spectral norm of a real symmetric matrix by power iteration.
pub fn symmetric_spectral_norm(matrix: &[f64], n: usize, tol: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut est = 0.0;
    for _ in 0..2000 {
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let w: Vec<f64> = (0..n).map(|i| matrix[i * n..(i + 1) * n].iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let next = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (next - est).abs() <= tol * next {
            return next;
        }
        est = next;
        v = w;
    }
    est
}

/// `sum_x f(x) conj(g(x))`.
pub fn inner(f: &[C64], g: &[C64]) -> C64 {
    f.iter().zip(g).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm2(f: &[C64]) -> f64 {
    f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(f: &mut [C64]) {
    let n = norm2(f);
    f.iter_mut().for_each(|v| *v /= n);
}

#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope * x + intercept`; needs two distinct `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

/// Median of a slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
