//! Integer-order Sobolev norms of compactly supported functions on the line.

use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_POINTS: usize = 4096;
const MAX_POINTS: usize = 1 << 23;

/// `(sum_{k<=s} ||h^{(k)}||_2^2)^{1/2}` for `h` sampled at spacing `step`.
///
/// Derivatives use compact central differences (second differences, plus one
/// first difference for odd orders) with zero extension past the window;
/// integrals use the trapezoid rule. The first and last samples must vanish.
pub fn sobolev_norm(samples: &[C64], step: f64, s: u32) -> Result<f64> {
    if samples.len() < DEFAULT_POINTS {
        return Err(Error::Window(format!("need at least {DEFAULT_POINTS} samples, got {}", samples.len())));
    }
    if !(step > 0.0) {
        return Err(Error::Window(format!("grid spacing must be positive, got {step}")));
    }
    let guard = (s as usize + 1).max(2);
    let n = samples.len();
    let edge = samples[..guard].iter().chain(&samples[n - guard..]).any(|v| v.norm() > 0.0);
    if edge {
        return Err(Error::Window("support touches the window boundary".into()));
    }
    let mut total = trapezoid_sq(samples, step);
    let mut even = samples.to_vec();
    for k in 1..=s {
        let d = if k % 2 == 0 {
            even = second_difference(&even, step);
            even.clone()
        } else {
            first_difference(&even, step)
        };
        total += trapezoid_sq(&d, step);
    }
    Ok(total.sqrt())
}

/// Samples `h` on `points` uniform nodes of `window` and returns its Sobolev norm.
pub fn sobolev_norm_fn<H>(h: H, window: (f64, f64), s: u32, points: usize) -> Result<f64>
where
    H: Fn(f64) -> C64,
{
    let (a, b) = window;
    if !(b > a) {
        return Err(Error::Window(format!("empty window [{a}, {b}]")));
    }
    let points = points.clamp(DEFAULT_POINTS, MAX_POINTS);
    let step = (b - a) / (points - 1) as f64;
    let samples: Vec<C64> = (0..points).map(|i| h(a + step * i as f64)).collect();
    sobolev_norm(&samples, step, s)
}

/// Grid size that resolves oscillation of angular frequency `omega` over `width`.
pub fn points_for(omega: f64, width: f64) -> usize {
    let want = (omega * width / 0.02).ceil();
    if want.is_finite() {
        (want as usize).clamp(DEFAULT_POINTS, MAX_POINTS)
    } else {
        MAX_POINTS
    }
}

fn trapezoid_sq(v: &[C64], step: f64) -> f64 {
    let n = v.len();
    let inner: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    step * (inner - 0.5 * (v[0].norm_sqr() + v[n - 1].norm_sqr()))
}

fn at(v: &[C64], i: isize) -> C64 {
    if i < 0 || i as usize >= v.len() {
        C64::new(0.0, 0.0)
    } else {
        v[i as usize]
    }
}

fn first_difference(v: &[C64], step: f64) -> Vec<C64> {
    (0..v.len() as isize).map(|i| (at(v, i + 1) - at(v, i - 1)) / (2.0 * step)).collect()
}

fn second_difference(v: &[C64], step: f64) -> Vec<C64> {
    (0..v.len() as isize).map(|i| (at(v, i + 1) - at(v, i) * 2.0 + at(v, i - 1)) / (step * step)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(x: f64) -> C64 {
        C64::new(if (0.0..=1.0).contains(&x) { (PI * x).sin() } else { 0.0 }, 0.0)
    }

    #[test]
    fn zero_function() {
        assert_eq!(sobolev_norm_fn(|_| C64::new(0.0, 0.0), (0.0, 1.0), 3, 5000).unwrap(), 0.0);
    }

    #[test]
    fn sine_orders_zero_and_one() {
        let s0 = sobolev_norm_fn(sine, (-1.0, 2.0), 0, DEFAULT_POINTS).unwrap();
        assert!((s0 - 0.5f64.sqrt()).abs() < 1e-4, "{s0}");
        let s1 = sobolev_norm_fn(sine, (-1.0, 2.0), 1, DEFAULT_POINTS).unwrap();
        assert!((s1 - (0.5 + PI * PI / 2.0).sqrt()).abs() < 1e-3, "{s1}");
    }

    #[test]
    fn gaussian_refinement_converges() {
        // ||g||^2 + ||g'||^2 + ||g''||^2 for g = exp(-x^2) is sqrt(pi/2) (1 + 1 + 3)
        let g = |x: f64| C64::new((-x * x).exp(), 0.0);
        let g = move |x: f64| if x.abs() < 9.0 { g(x) } else { C64::new(0.0, 0.0) };
        let exact = ((PI / 2.0).sqrt() * 5.0).sqrt();
        let coarse = sobolev_norm_fn(g, (-10.0, 10.0), 2, 4096).unwrap();
        let fine = sobolev_norm_fn(g, (-10.0, 10.0), 2, 8191).unwrap();
        assert!((fine - exact).abs() < (coarse - exact).abs() + 1e-12);
        assert!((fine - exact).abs() < 1e-4);
    }

    #[test]
    fn boundary_support_is_rejected() {
        let err = sobolev_norm_fn(sine, (0.0, 1.0), 0, DEFAULT_POINTS).unwrap_err();
        assert!(matches!(err, Error::Window(_)));
        // sin(pi x) vanishes at 0 and 1 up to rounding but not at the neighbours.
        assert!(sobolev_norm_fn(sine, (0.5, 3.0), 0, DEFAULT_POINTS).is_err());
        assert!(sobolev_norm(&[C64::new(0.0, 0.0); 10], 0.1, 0).is_err());
    }
}
