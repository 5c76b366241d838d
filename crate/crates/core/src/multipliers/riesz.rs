//! Riesz means `k t^{-k} int_0^t (t - s)^{k-1} exp(i s (sqrt L)^alpha) ds`.

use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;
use crate::C64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate with the usual scaled error estimate derived from
/// the embedded 7-point Gauss rule.
fn kronrod_panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut values = [C64::new(0.0, 0.0); 15];
    values[7] = f(c);
    for i in 0..7 {
        let x = h * XGK[i];
        values[i] = f(c - x);
        values[14 - i] = f(c + x);
    }
    let weight = |i: usize| WGK[if i < 8 { i } else { 14 - i }];
    let mut kron = C64::new(0.0, 0.0);
    let mut gauss = C64::new(0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        kron += v * weight(i);
        let m = if i < 8 { i } else { 14 - i };
        if m % 2 == 1 {
            gauss += v * WG[m / 2];
        }
    }
    let mean = kron * 0.5;
    let spread: f64 = values.iter().enumerate().map(|(i, v)| weight(i) * (v - mean).norm()).sum::<f64>() * h.abs();
    let abs: f64 = values.iter().enumerate().map(|(i, v)| weight(i) * v.norm()).sum::<f64>() * h.abs();
    let mut err = ((kron - gauss) * h).norm();
    if spread > 0.0 && err > 0.0 {
        err = spread * (200.0 * err / spread).powf(1.5).min(1.0);
    }
    (kron * h, err, abs)
}

struct Panel {
    lo: f64,
    hi: f64,
    value: C64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

const MAX_SPLITS: usize = 1 << 18;

/// Globally adaptive Gauss-Kronrod integration of a complex integrand over `[a, b]`.
///
/// The interval is first cut into `panels` pieces; the panel with the largest
/// error estimate is bisected until the summed estimate is at most `tol`, or
/// at most the rounding level of the integrand's absolute integral.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> Result<C64> {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = std::collections::BinaryHeap::with_capacity(panels);
    let mut err_sum = 0.0;
    let mut abs_sum = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        let (value, err, abs) = kronrod_panel(&f, lo, hi);
        err_sum += err;
        abs_sum += abs;
        heap.push(Panel { lo, hi, value, err });
    }
    let mut splits = 0;
    while err_sum > tol.max(50.0 * f64::EPSILON * abs_sum) {
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if splits >= MAX_SPLITS || mid <= worst.lo || mid >= worst.hi {
            return Err(Error::Quadrature(format!(
                "error estimate {err_sum:.3e} above {tol:.3e} after {splits} bisections"
            )));
        }
        splits += 1;
        err_sum -= worst.err;
        for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
            let (value, err, _) = kronrod_panel(&f, lo, hi);
            err_sum += err;
            heap.push(Panel { lo, hi, value, err });
        }
    }
    let mut values: Vec<(f64, C64)> = heap.into_iter().map(|p| (p.lo, p.value)).collect();
    values.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairwise_sum(&values))
}

fn pairwise_sum(values: &[(f64, C64)]) -> C64 {
    if values.len() <= 8 {
        return values.iter().map(|v| v.1).sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

fn check(k: f64, alpha: f64, t: f64) -> Result<()> {
    if !(k > 0.0 && alpha > 0.0 && t > 0.0) || !(k.is_finite() && alpha.is_finite() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Riesz means need k, alpha, t > 0 (got k={k}, alpha={alpha}, t={t})"
        )));
    }
    Ok(())
}

/// Scalar multiplier of the Riesz mean at frequency `lambda = sqrt(eigenvalue)`.
///
/// For `k >= 1` the weight `(t - s)^{k-1}` is bounded and the integral is taken
/// in `s`. For `k < 1` the substitution `v = (t - s)^k` removes the endpoint
/// singularity: `t^{-k} int_0^{t^k} exp(i (t - v^{1/k}) mu) dv`, `mu = lambda^alpha`.
pub fn riesz_multiplier(k: f64, alpha: f64, t: f64, lambda: f64) -> Result<C64> {
    check(k, alpha, t)?;
    if lambda == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let mu = lambda.powf(alpha);
    let panels = ((t * mu / std::f64::consts::PI).ceil() as usize + 1).min(1 << 20);
    if k >= 1.0 {
        let scale = k / t.powf(k);
        let integrand = |s: f64| C64::from_polar((t - s).max(0.0).powf(k - 1.0), s * mu);
        return Ok(integrate(integrand, 0.0, t, panels, 1e-15 * t.powf(k) / k)? * scale);
    }
    let upper = t.powf(k);
    let integrand = |v: f64| C64::from_polar(1.0, (t - v.powf(1.0 / k)) * mu);
    Ok(integrate(integrand, 0.0, upper, panels, 1e-15 * upper)? / upper)
}

/// Closed form for `k = 1`: `(exp(i t mu) - 1) / (i t mu)`.
pub fn riesz_first_order(alpha: f64, t: f64, lambda: f64) -> C64 {
    let x = t * lambda.powf(alpha);
    if x.abs() < 1e-4 {
        // 1 + ix/2 - x^2/6 - i x^3/24
        return C64::new(1.0 - x * x / 6.0, x / 2.0 - x * x * x / 24.0);
    }
    (C64::from_polar(1.0, x) - 1.0) / C64::new(0.0, x)
}

/// Scalars `sigma(sqrt(lambda_i))` for the whole spectrum.
pub fn riesz_values(dec: &SpectralDecomposition, k: f64, alpha: f64, t: f64) -> Result<Vec<C64>> {
    dec.frequencies().iter().map(|&lam| riesz_multiplier(k, alpha, t, lam)).collect()
}

pub fn riesz_mean_apply(dec: &SpectralDecomposition, k: f64, alpha: f64, t: f64, f: &[C64]) -> Result<Vec<C64>> {
    let values = riesz_values(dec, k, alpha, t)?;
    Ok(dec.apply_values(&values, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frequency_is_one() {
        assert_eq!(riesz_multiplier(2.5, 1.0, 1.0, 0.0).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn first_order_matches_closed_form() {
        for i in 0..400 {
            let lam = 0.1 * i as f64;
            for alpha in [1.0, 2.0] {
                let q = riesz_multiplier(1.0, alpha, 1.0, lam).unwrap();
                let c = riesz_first_order(alpha, 1.0, lam);
                assert!((q - c).norm() <= 1e-8 * c.norm(), "lambda={lam}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn second_order_matches_antiderivative() {
        // k = 2: 2 int_0^1 (1 - s) e^{i s mu} ds = 2 (e^{i mu} - 1 - i mu) / (i mu)^2
        let mu: f64 = 7.3;
        let i_mu = C64::new(0.0, mu);
        let exact = (C64::from_polar(1.0, mu) - 1.0 - i_mu) * 2.0 / (i_mu * i_mu);
        let q = riesz_multiplier(2.0, 1.0, 1.0, mu).unwrap();
        assert!((q - exact).norm() < 1e-10);
    }

    #[test]
    fn half_order_matches_series() {
        // k = 1/2: sum_n (i mu)^n / prod_{m=1}^{n} (m + 1/2)
        let mu: f64 = 3.0;
        let mut term = C64::new(1.0, 0.0);
        let mut exact = term;
        for n in 1..80 {
            term *= C64::new(0.0, mu) / (n as f64 + 0.5);
            exact += term;
        }
        let q = riesz_multiplier(0.5, 1.0, 1.0, mu).unwrap();
        assert!((q - exact).norm() < 1e-10, "{q} vs {exact}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(riesz_multiplier(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(riesz_multiplier(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(riesz_multiplier(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| C64::new(x * x * x, x), 0.0, 2.0, 1, 1e-14).unwrap();
        assert!((v - C64::new(4.0, 2.0)).norm() < 1e-13);
    }
}
