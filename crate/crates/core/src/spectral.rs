//! Sublaplacian, its exact eigendecomposition and the functional calculus
//! `m(sqrt L)` built on top of it.
//!
//! Frequencies are `sqrt(lambda)` of the scaled operator `s0^2 L_raw`; the
//! matching physical distance of a point is its quasi-norm divided by `s0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::linalg;
use crate::multipliers::sobolev;
use crate::C64;

/// Relative gap below which neighbouring eigenvalues are treated as one eigenvalue.
const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Sublaplacian {
    size: usize,
    s0: f64,
    /// Row-major dense matrix.
    matrix: Vec<f64>,
}

/// `s0^2 * sum_a (I - R_a)` over the first-stratum generators and their inverses,
/// where `(R_a f)(x) = f(x a)`.
pub fn assemble_sublaplacian(g: &GroupModel, s0: f64) -> Result<Sublaplacian> {
    if !(s0 > 0.0 && s0.is_finite()) {
        return Err(Error::InvalidParameter(format!("s0 must be positive, got {s0}")));
    }
    let n = g.size();
    let scale = s0 * s0;
    let mut matrix = vec![0.0; n * n];
    for x in 0..n {
        for &a in g.generators() {
            let y = g.mul(x, a);
            matrix[x * n + x] += scale;
            matrix[x * n + y] -= scale;
        }
    }
    Ok(Sublaplacian { size: n, s0, matrix })
}

impl Sublaplacian {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.size + y]
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let n = self.size;
        (0..n)
            .map(|x| {
                self.matrix[x * n..(x + 1) * n].iter().zip(f).filter(|(a, _)| **a != 0.0).map(|(a, v)| v * *a).sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    size: usize,
    s0: f64,
    eigenvalues: Vec<f64>,
    frequencies: Vec<f64>,
    /// Column-major: eigenvector `i` is `vectors[i * size..(i + 1) * size]`.
    vectors: Vec<f64>,
    reconstruction_error: f64,
    orthonormality_error: f64,
}

/// Dense eigendecomposition with eigenvalue clusters snapped to their mean.
///
/// Snapping makes every function of the spectrum constant on numerically
/// degenerate eigenspaces, so the functional calculus stays left-invariant.
pub fn spectral_decompose(l: &Sublaplacian) -> Result<SpectralDecomposition> {
    let n = l.size;
    let (mut w, v) = linalg::symmetric_eigen(l.matrix.clone(), n)?;
    let top = w.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let tol = CLUSTER_TOL * top.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && w[end] - w[end - 1] <= tol {
            end += 1;
        }
        let mean = w[start..end].iter().sum::<f64>() / (end - start) as f64;
        let value = if mean.abs() <= tol { 0.0 } else { mean };
        w[start..end].iter_mut().for_each(|x| *x = value);
        start = end;
    }
    if w[0] < 0.0 {
        return Err(Error::Eigensolver {
            info: 0,
            condition: format!("negative eigenvalue {:.3e} for a positive semidefinite matrix", w[0]),
        });
    }
    let frequencies = w.iter().map(|x| x.sqrt()).collect();
    let mut dec = SpectralDecomposition {
        size: n,
        s0: l.s0,
        eigenvalues: w,
        frequencies,
        vectors: v,
        reconstruction_error: 0.0,
        orthonormality_error: 0.0,
    };
    dec.reconstruction_error = dec.measure_reconstruction(l);
    dec.orthonormality_error = dec.measure_orthonormality();
    if dec.reconstruction_error > 1e-8 || dec.orthonormality_error > 1e-10 {
        return Err(Error::Eigensolver {
            info: 0,
            condition: format!(
                "reconstruction error {:.3e}, orthonormality error {:.3e}",
                dec.reconstruction_error, dec.orthonormality_error
            ),
        });
    }
    Ok(dec)
}

impl SpectralDecomposition {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// Eigenvalues of `L`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `sqrt(lambda_i)`, the points where multipliers are evaluated.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.size..(i + 1) * self.size]
    }

    /// `||V diag(lambda) V^T - L|| / ||L||` in spectral norm.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        self.orthonormality_error
    }

    /// Physical length of a lattice quasi-norm value.
    pub fn physical(&self, lattice_norm: f64) -> f64 {
        lattice_norm / self.s0
    }

    /// `m(sqrt(lambda_i))` for every eigenvalue; errors on non-finite values.
    pub fn multiplier_values<M>(&self, m: M) -> Result<Vec<C64>>
    where
        M: Fn(f64) -> C64,
    {
        self.frequencies
            .iter()
            .map(|&lam| {
                let v = m(lam);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { at: lam, value: format!("{v}") })
                }
            })
            .collect()
    }

    /// Coefficients `<f, v_i>`.
    pub fn analyze(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.size);
        self.vectors.par_chunks(self.size).map(|v| v.iter().zip(f).map(|(a, b)| b * *a).sum()).collect()
    }

    /// `sum_i c_i v_i`.
    pub fn synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        let n = self.size;
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for (v, c) in self.vectors.chunks(n).zip(coeffs) {
            if c.re != 0.0 {
                re.iter_mut().zip(v).for_each(|(o, a)| *o += c.re * a);
            }
            if c.im != 0.0 {
                im.iter_mut().zip(v).for_each(|(o, a)| *o += c.im * a);
            }
        }
        re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect()
    }

    /// Applies the operator with precomputed eigenvalue multipliers.
    pub fn apply_values(&self, values: &[C64], f: &[C64]) -> Vec<C64> {
        let coeffs: Vec<C64> = self.analyze(f).iter().zip(values).map(|(c, m)| c * m).collect();
        self.synthesize(&coeffs)
    }

    /// `m(sqrt L) f`.
    pub fn apply_multiplier<M>(&self, m: M, f: &[C64]) -> Result<Vec<C64>>
    where
        M: Fn(f64) -> C64,
    {
        let values = self.multiplier_values(m)?;
        Ok(self.apply_values(&values, f))
    }

    /// Convolution kernel from eigenvalue multipliers: `K = m(sqrt L) delta_e`.
    pub fn kernel_from_values(&self, values: &[C64]) -> Vec<C64> {
        let coeffs: Vec<C64> = self.vectors.chunks(self.size).zip(values).map(|(v, m)| m * v[0]).collect();
        self.synthesize(&coeffs)
    }

    pub fn kernel_of<M>(&self, m: M) -> Result<Vec<C64>>
    where
        M: Fn(f64) -> C64,
    {
        let values = self.multiplier_values(m)?;
        Ok(self.kernel_from_values(&values))
    }

    /// Relative gap between `sum_x |K_m(x)|^2` and `(1/|G|) sum_i |m(sqrt lambda_i)|^2`.
    pub fn plancherel_check<M>(&self, m: M) -> Result<f64>
    where
        M: Fn(f64) -> C64,
    {
        let values = self.multiplier_values(m)?;
        Ok(self.plancherel_error(&values))
    }

    pub fn plancherel_error(&self, values: &[C64]) -> f64 {
        let kernel = self.kernel_from_values(values);
        let lhs: f64 = kernel.iter().map(|v| v.norm_sqr()).sum();
        let rhs = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.size as f64;
        (lhs - rhs).abs() / rhs.max(1e-30)
    }

    /// Heat kernel `p_t`, the kernel of `exp(-t L)`.
    pub fn heat_kernel(&self, t: f64) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("heat time must be positive, got {t}")));
        }
        let k = self.kernel_of(|lam| C64::new((-t * lam * lam).exp(), 0.0))?;
        Ok(k.into_iter().map(|v| v.re).collect())
    }

    fn measure_reconstruction(&self, l: &Sublaplacian) -> f64 {
        let n = self.size;
        let mut diff = l.matrix.clone();
        for (i, &lam) in self.eigenvalues.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let v = self.eigenvector(i);
            diff.par_chunks_mut(n).enumerate().for_each(|(x, row)| {
                let s = lam * v[x];
                row.iter_mut().zip(v).for_each(|(r, b)| *r -= s * b);
            });
        }
        let err = linalg::symmetric_spectral_norm(&diff, n, 1e-3, 11);
        let top = self.eigenvalues.last().copied().unwrap_or(0.0);
        if top > 0.0 {
            err / top
        } else {
            err
        }
    }

    fn measure_orthonormality(&self) -> f64 {
        let n = self.size;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let vi = self.eigenvector(i);
                (i..n)
                    .map(|j| {
                        let d: f64 = vi.iter().zip(self.eigenvector(j)).map(|(a, b)| a * b).sum();
                        (d - if i == j { 1.0 } else { 0.0 }).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GaussianFit {
    /// Amplitude constant `C` in `p_t(x) <= C t^{-Q/2} exp(-|x|^2 / (c t))`.
    pub amplitude: f64,
    /// Spread constant `c`.
    pub spread: f64,
    /// Fitted coefficient of `|x|^2 / t` in `log p_t`; negative for Gaussian decay.
    pub exponent: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `log p_t(x)` against `|x|^2 / t` over `|x| <= diam / 4`.
///
/// Points whose value is below `1e-12 p_t(e)` carry no information beyond
/// rounding and are left out.
pub fn gaussian_decay_report(g: &GroupModel, dec: &SpectralDecomposition, p_t: &[f64], t: f64) -> Result<GaussianFit> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("heat time must be positive, got {t}")));
    }
    let peak = p_t[g.identity()];
    let pts: Vec<(f64, f64)> = (0..g.size())
        .filter(|&x| g.norm(x) <= g.diameter() / 4.0 && p_t[x] > 1e-12 * peak)
        .map(|x| {
            let r = dec.physical(g.norm(x));
            (r * r / t, p_t[x].ln())
        })
        .collect();
    let fit =
        linalg::linear_fit(&pts).ok_or_else(|| Error::Diagnostic("too few points for the Gaussian fit".into()))?;
    let q = g.homogeneous_dim() as f64;
    Ok(GaussianFit {
        amplitude: fit.intercept.exp() * t.powf(q / 2.0),
        spread: -1.0 / fit.slope,
        exponent: fit.slope,
        r_squared: fit.r_squared,
        points: pts.len(),
    })
}

/// `sum_x |K_m(x)|^2 (1 + |x|^s)^2 / ||m||^2_{L^2_s}` with `m` sampled on `window`.
///
/// Returns 0 when both numerator and Sobolev norm vanish.
pub fn weighted_kernel_norm_check<M>(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    m: M,
    s: u32,
    window: (f64, f64),
) -> Result<f64>
where
    M: Fn(f64) -> C64 + Copy,
{
    let kernel = dec.kernel_of(m)?;
    let num: f64 = kernel
        .iter()
        .enumerate()
        .map(|(x, k)| k.norm_sqr() * (1.0 + dec.physical(g.norm(x)).powi(s as i32)).powi(2))
        .sum();
    let sob = sobolev::sobolev_norm_fn(m, window, s, sobolev::DEFAULT_POINTS)?;
    if sob == 0.0 {
        if num <= 1e-28 {
            return Ok(0.0);
        }
        return Err(Error::Diagnostic(format!("Sobolev norm vanishes but the weighted kernel norm is {num:.3e}")));
    }
    Ok(num / (sob * sob))
}

#[derive(Debug, Clone, Copy)]
pub struct PointwiseReport {
    pub ratio: f64,
    /// `sup |K_h|`.
    pub sup_kernel: f64,
    /// Hölder bound `||p_{1/R^2}||_2 ||K_H||_2` with `H = exp(lambda^2 / R^2) h`.
    pub holder_bound: f64,
    pub eigenvalues_in_support: usize,
}

/// Worst ratio `|K_h(x)| (1 + R|x|)^s / ((R/s0)^Q ||h(R .)||_{L^2_{s+0.1}})`.
///
/// Fractional Sobolev order is interpolated log-convexly between integer orders.
pub fn pointwise_kernel_bound_check<M>(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    h: M,
    r: f64,
    s: u32,
) -> Result<PointwiseReport>
where
    M: Fn(f64) -> C64 + Copy,
{
    const KAPPA: f64 = 0.1;
    let values = dec.multiplier_values(h)?;
    let mut in_support = 0;
    for (&lam, v) in dec.frequencies().iter().zip(&values) {
        let inside = lam >= r / 4.0 && lam <= r;
        if inside {
            in_support += 1;
        } else if v.norm() > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "h is nonzero at sqrt(lambda) = {lam} outside [{}, {r}]",
                r / 4.0
            )));
        }
    }
    if in_support == 0 {
        return Err(Error::EmptySpectralSupport(format!("no eigenvalue in [{}, {r}]", r / 4.0)));
    }
    let kernel = dec.kernel_from_values(&values);
    let sup_kernel = kernel.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let n = dec.size() as f64;
    let heat_l2 = (dec.frequencies().iter().map(|l| (-2.0 * l * l / (r * r)).exp()).sum::<f64>() / n).sqrt();
    let lifted_l2 =
        (dec.frequencies().iter().zip(&values).map(|(l, v)| ((l * l / (r * r)).exp() * v.norm()).powi(2)).sum::<f64>()
            / n)
            .sqrt();
    let holder_bound = heat_l2 * lifted_l2;
    if sup_kernel == 0.0 {
        return Ok(PointwiseReport { ratio: 0.0, sup_kernel, holder_bound, eigenvalues_in_support: in_support });
    }
    let rescaled = move |lam: f64| h(r * lam);
    let window = (-0.25, 1.25);
    let lo = sobolev::sobolev_norm_fn(rescaled, window, s, sobolev::DEFAULT_POINTS)?;
    let hi = sobolev::sobolev_norm_fn(rescaled, window, s + 1, sobolev::DEFAULT_POINTS)?;
    let frac = lo.powf(1.0 - KAPPA) * hi.powf(KAPPA);
    let q = g.homogeneous_dim() as i32;
    let scale = (r / dec.s0()).powi(q) * frac;
    let worst = kernel
        .iter()
        .enumerate()
        .map(|(x, k)| k.norm() * (1.0 + r * dec.physical(g.norm(x))).powi(s as i32))
        .fold(0.0, f64::max);
    Ok(PointwiseReport { ratio: worst / scale, sup_kernel, holder_bound, eigenvalues_in_support: in_support })
}

/// Empirical spectral counting function against the continuum density on the torus.
///
/// For `Torus(d, n)` the continuum Laplacian on the flat torus of side `n / s0`
/// has `N(lambda) ~ omega_d (n / (2 pi s0))^d lambda^d` eigenvalues below `lambda^2`.
/// Returns rows `(lambda, empirical count, continuum count)`.
pub fn torus_weyl_comparison(g: &GroupModel, dec: &SpectralDecomposition, points: usize) -> Vec<(f64, usize, f64)> {
    let d = g.homogeneous_dim() as i32;
    let side = g.moduli()[0] as f64 / dec.s0();
    let omega = std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half_integer(d as u32 + 2);
    let top = dec.frequencies().last().copied().unwrap_or(0.0);
    (1..=points)
        .map(|i| {
            let lam = top * i as f64 / points as f64;
            let count = dec.frequencies().partition_point(|&f| f <= lam);
            let cont = omega * (side * lam / (2.0 * std::f64::consts::PI)).powi(d);
            (lam, count, cont)
        })
        .collect()
}

/// `Gamma(k / 2)` for positive integer `k`.
fn gamma_half_integer(k: u32) -> f64 {
    let mut v = if k.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < k as f64 / 2.0 {
        v *= x;
        x += 1.0;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, ModelKind};

    fn torus(n: usize) -> GroupModel {
        build_group(ModelKind::Torus { d: 1, n }, 4096).unwrap()
    }

    #[test]
    fn torus_four_spectrum() {
        let g = torus(4);
        let dec = spectral_decompose(&assemble_sublaplacian(&g, 1.0).unwrap()).unwrap();
        let expected = [0.0, 2.0, 2.0, 4.0];
        for (a, b) in dec.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn constants_in_kernel() {
        let g = build_group(ModelKind::Heisenberg { n: 3 }, 4096).unwrap();
        let l = assemble_sublaplacian(&g, 2.0).unwrap();
        let one = vec![C64::new(1.0, 0.0); g.size()];
        assert!(l.apply(&one).iter().all(|v| v.norm() == 0.0));
        let dec = spectral_decompose(&l).unwrap();
        assert_eq!(dec.eigenvalues()[0], 0.0);
        let v0 = dec.eigenvector(0);
        let c = 1.0 / (g.size() as f64).sqrt();
        assert!(v0.iter().all(|x| (x.abs() - c).abs() < 1e-10));
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(assemble_sublaplacian(&torus(4), 0.0).is_err());
        assert!(assemble_sublaplacian(&torus(4), -1.0).is_err());
    }

    #[test]
    fn identity_and_square() {
        let g = torus(16);
        let l = assemble_sublaplacian(&g, 1.5).unwrap();
        let dec = spectral_decompose(&l).unwrap();
        let f: Vec<C64> = (0..16).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let same = dec.apply_multiplier(|_| C64::new(1.0, 0.0), &f).unwrap();
        let sq = dec.apply_multiplier(|x| C64::new(x * x, 0.0), &f).unwrap();
        let lf = l.apply(&f);
        for i in 0..16 {
            assert!((same[i] - f[i]).norm() < 1e-12);
            assert!((sq[i] - lf[i]).norm() < 1e-11);
        }
    }

    #[test]
    fn non_finite_multiplier_is_an_error() {
        let g = torus(8);
        let dec = spectral_decompose(&assemble_sublaplacian(&g, 1.0).unwrap()).unwrap();
        let err = dec.kernel_of(|x| C64::new(1.0 / x, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn plancherel_trivial_cases() {
        let g = torus(8);
        let dec = spectral_decompose(&assemble_sublaplacian(&g, 1.0).unwrap()).unwrap();
        assert!(dec.plancherel_check(|_| C64::new(1.0, 0.0)).unwrap() < 1e-14);
        let top = *dec.frequencies().last().unwrap();
        let ind = |x: f64| C64::new(if x >= top - 1e-9 { 1.0 } else { 0.0 }, 0.0);
        let k = dec.kernel_of(ind).unwrap();
        let lhs: f64 = k.iter().map(|v| v.norm_sqr()).sum();
        assert!((lhs - 1.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn heat_kernel_is_stochastic_and_peaked() {
        let g = torus(64);
        let dec = spectral_decompose(&assemble_sublaplacian(&g, 1.0).unwrap()).unwrap();
        let p = dec.heat_kernel(0.05).unwrap();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        let peak = p.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, p[0]);
        assert!(dec.heat_kernel(0.0).is_err());
    }
}
