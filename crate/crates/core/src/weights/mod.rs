//! Muckenhoupt and reverse Hölder characteristics over the exhaustive ball
//! family, power weights, weighted norms and the weighted sparse-form bound.

pub mod quantitative;

use std::collections::BTreeMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dyadic::sparse::{conjugate, sparse_form_sum, SparseFamily};
use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::kernel_ops::interpolated_upper_bound;
use crate::linalg;
use crate::spectral::SpectralDecomposition;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Ap(u64),
    Rh(u64),
}

/// A positive function on the group with cached characteristics.
#[derive(Debug)]
pub struct Weight {
    values: Vec<f64>,
    cache: Mutex<BTreeMap<Key, f64>>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        Weight { values: self.values.clone(), cache: Mutex::new(self.cache.lock().unwrap().clone()) }
    }
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((x, &v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("weight must be positive and finite, w({x}) = {v}")));
        }
        Ok(Weight { values, cache: Mutex::new(BTreeMap::new()) })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Weight::new(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Weight::new(self.values.iter().map(|w| w * c).collect())
    }

    fn cached(&self, key: Key, compute: impl FnOnce() -> f64) -> f64 {
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return v;
        }
        let v = compute();
        *self.cache.lock().unwrap().entry(key).or_insert(v)
    }
}

/// Supremum of `score(sum_B u / |B|, sum_B v / |B|)` over all balls `B(z, r)`,
/// every center and every radius giving a distinct ball.
///
/// Singleton balls score exactly 1 for both characteristics and are skipped; the
/// supremum starts at 1.
fn ball_supremum(g: &GroupModel, u: &[f64], v: &[f64], score: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let sizes: Vec<usize> = g.ball_radii().iter().map(|&(_, len)| len).filter(|&len| len > 1).collect();
    let by_norm = g.points_by_norm();
    (0..g.size())
        .into_par_iter()
        .map(|z| {
            let mut su = 0.0;
            let mut sv = 0.0;
            let mut best: f64 = 1.0;
            let mut next = 0;
            for (i, &b) in by_norm.iter().enumerate() {
                let x = g.mul(z, b);
                su += u[x];
                sv += v[x];
                if next < sizes.len() && i + 1 == sizes[next] {
                    let len = sizes[next] as f64;
                    best = best.max(score(su / len, sv / len));
                    next += 1;
                }
            }
            best
        })
        .reduce(|| 1.0, f64::max)
}

/// `[w]_{A_p} = sup_B <w>_B <w^{1 - p'}>_B^{p - 1}`.
pub fn ap_characteristic(g: &GroupModel, w: &Weight, p: f64) -> Result<f64> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::InvalidParameter(format!("A_p needs 1 < p < inf, got {p}")));
    }
    Ok(w.cached(Key::Ap(p.to_bits()), || {
        let dual: Vec<f64> = w.values.iter().map(|x| x.powf(1.0 - conjugate(p))).collect();
        ball_supremum(g, &w.values, &dual, |a, b| a * b.powf(p - 1.0))
    }))
}

/// `[w]_{RH_q} = sup_B <w>_{q,B} / <w>_{1,B}`.
pub fn rh_characteristic(g: &GroupModel, w: &Weight, q: f64) -> Result<f64> {
    if !(q > 1.0) || q.is_infinite() {
        return Err(Error::InvalidParameter(format!("RH_q needs 1 < q < inf, got {q}")));
    }
    Ok(w.cached(Key::Rh(q.to_bits()), || {
        let powered: Vec<f64> = w.values.iter().map(|x| x.powf(q)).collect();
        ball_supremum(g, &w.values, &powered, |a, b| b.powf(1.0 / q) / a)
    }))
}

/// `w(x) = max(|x|, h0)^a` with `h0` the smallest nonzero norm.
pub fn power_weight(g: &GroupModel, a: f64) -> Weight {
    let h0 = g.min_positive_norm();
    let values = g.norms().iter().map(|&r| if a == 0.0 { 1.0 } else { r.max(h0).powf(a) }).collect();
    Weight::new(values).expect("power weights are positive")
}

/// `(sum |f|^p w)^{1/p}`; `p = inf` gives `max |f|`.
pub fn weighted_norm(f: &[C64], p: f64, w: &[f64]) -> f64 {
    if p.is_infinite() {
        return f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    f.iter().zip(w).map(|(v, w)| v.norm().powf(p) * w).sum::<f64>().powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNormBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Exact `L^1(w)` norm: `max_y sum_x |K(y^{-1} x)| w(x) / w(y)`.
fn weighted_one_norm(g: &GroupModel, kernel: &[f64], w: &[f64]) -> f64 {
    (0..g.size())
        .into_par_iter()
        .map(|y| (0..g.size()).map(|x| kernel[g.mul(g.inv(y), x)] * w[x]).sum::<f64>() / w[y])
        .reduce(|| 0.0, f64::max)
}

/// Bounds for `||m(sqrt L)||_{L^p(w) -> L^p(w)}`.
///
/// `p = 1`, `2` and `inf` are exact (`p = 2` via the largest singular value of
/// `W^{1/2} T W^{-1/2}`). Other `p` get a lower bound from test functions and an
/// upper bound by interpolation between the exact norms, which is valid because
/// every `L^p(w)` is an `L^p` space of the same measure.
pub fn weighted_opnorm(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    values: &[C64],
    p: f64,
    w: &Weight,
    seed: u64,
) -> Result<OpNormBounds> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("operator norm exponent must be >= 1, got {p}")));
    }
    let n = g.size();
    let wv = w.values();
    let kernel: Vec<f64> = dec.kernel_from_values(values).iter().map(|v| v.norm()).collect();
    let one = weighted_one_norm(g, &kernel, wv);
    let inf: f64 = kernel.iter().sum();
    let adjoint: Vec<C64> = values.iter().map(|v| v.conj()).collect();
    let root: Vec<f64> = wv.iter().map(|x| x.sqrt()).collect();
    let two = if values.iter().all(|v| v.norm() == 0.0) {
        0.0
    } else {
        let normal = |f: &[C64]| {
            let a: Vec<C64> = f.iter().zip(&root).map(|(v, r)| v / r).collect();
            let b: Vec<C64> = dec.apply_values(values, &a).iter().zip(&root).map(|(v, r)| v * r * r).collect();
            dec.apply_values(&adjoint, &b).iter().zip(&root).map(|(v, r)| v / r).collect()
        };
        linalg::lanczos_max_eigenvalue(normal, n, 1e-12, seed).sqrt()
    };
    if p == 1.0 {
        return Ok(OpNormBounds { lower: one, upper: one });
    }
    if p == 2.0 {
        return Ok(OpNormBounds { lower: two, upper: two });
    }
    if p.is_infinite() {
        return Ok(OpNormBounds { lower: inf, upper: inf });
    }
    let upper = interpolated_upper_bound(one, two, inf, p);
    let lower = test_function_lower_bound(g, dec, values, p, wv, seed);
    Ok(OpNormBounds { lower: lower.min(upper), upper })
}

/// `max ||T f||_{p,w} / ||f||_{p,w}` over 200 random functions, ball indicators
/// and weight-adapted bumps.
fn test_function_lower_bound(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    values: &[C64],
    p: f64,
    w: &[f64],
    seed: u64,
) -> f64 {
    let n = g.size();
    let mut tests: Vec<Vec<C64>> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        tests.push((0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect());
    }
    let radii: Vec<f64> = g.distinct_norms().iter().copied().filter(|&r| r > 0.0).collect();
    let centers = [g.identity(), n / 3, (2 * n) / 3];
    let step = (radii.len() / 8).max(1);
    for &z in &centers {
        for &r in radii.iter().step_by(step) {
            let ball = g.ball(z, r);
            let mut ind = vec![C64::new(0.0, 0.0); n];
            let mut bump = vec![C64::new(0.0, 0.0); n];
            for &x in &ball {
                ind[x] = C64::new(1.0, 0.0);
                bump[x] = C64::new(w[x].powf(-1.0 / p), 0.0);
            }
            tests.push(ind);
            tests.push(bump);
        }
    }
    tests
        .par_iter()
        .map(|f| {
            let denom = weighted_norm(f, p, w);
            if denom == 0.0 {
                0.0
            } else {
                weighted_norm(&dec.apply_values(values, f), p, w) / denom
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Exponent `max{1/(p - r1), (r2 - 1)/(r2 - p)}` of the weighted sparse-form bound;
/// `r2 = inf` gives `max{1/(p - r1), 1}`.
pub fn bfp_exponent(r1: f64, r2: f64, p: f64) -> f64 {
    let second = if r2.is_infinite() { 1.0 } else { (r2 - 1.0) / (r2 - p) };
    (1.0 / (p - r1)).max(second)
}

/// `([w]_{A_{p/r1}} [w]_{RH_{(r2/p)'}})^{exponent}`; `r2 = inf` drops the reverse Hölder factor.
pub fn bfp_characteristic(g: &GroupModel, w: &Weight, r1: f64, r2: f64, p: f64) -> Result<f64> {
    if !(r1 < p && p < r2) {
        return Err(Error::InvalidParameter(format!("need r1 < p < r2 (got {r1}, {p}, {r2})")));
    }
    let ap = ap_characteristic(g, w, p / r1)?;
    let rh = if r2.is_infinite() { 1.0 } else { rh_characteristic(g, w, conjugate(r2 / p))? };
    Ok((ap * rh).powf(bfp_exponent(r1, r2, p)))
}

/// `Lambda_{S, r1, r2'}(f, g) / (characteristic * ||f||_{L^p(w)} ||g||_{L^{p'}(w^{1-p'})})`.
#[allow(clippy::too_many_arguments)]
pub fn bfp_bound_check(
    grp: &GroupModel,
    families: &[SparseFamily],
    f: &[C64],
    g: &[C64],
    r1: f64,
    r2: f64,
    p: f64,
    w: &Weight,
) -> Result<f64> {
    let form = sparse_form_sum(families, f, g, r1, conjugate(r2))?;
    let pp = conjugate(p);
    let dual: Vec<f64> = w.values().iter().map(|x| x.powf(1.0 - pp)).collect();
    let rhs = bfp_characteristic(grp, w, r1, r2, p)? * weighted_norm(f, p, w.values()) * weighted_norm(g, pp, &dual);
    if rhs == 0.0 {
        if form > 0.0 {
            return Err(Error::Diagnostic("weighted bound vanishes while the sparse form does not".into()));
        }
        return Ok(0.0);
    }
    Ok(form / rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, ModelKind};

    fn torus(n: usize) -> GroupModel {
        build_group(ModelKind::Torus { d: 1, n }, 4096).unwrap()
    }

    #[test]
    fn unit_weight_is_one() {
        let g = torus(16);
        let w = Weight::constant(16, 1.0).unwrap();
        for p in [1.5, 2.0, 7.0] {
            assert_eq!(ap_characteristic(&g, &w, p).unwrap(), 1.0);
            assert_eq!(rh_characteristic(&g, &w, p).unwrap(), 1.0);
        }
        assert!(ap_characteristic(&g, &w, 1.0).is_err());
        assert!(rh_characteristic(&g, &w, 0.5).is_err());
    }

    #[test]
    fn two_valued_weight_by_hand() {
        // Torus(1,4), w = (3,1,1,1): balls of size 1, 3 and 4.
        let g = torus(4);
        let w = Weight::new(vec![3.0, 1.0, 1.0, 1.0]).unwrap();
        // RH_2 on {3,1,1}: sqrt(11/3) / (5/3); on all: sqrt(3) / (3/2)
        let expect = ((11.0f64 / 3.0).sqrt() / (5.0 / 3.0)).max(3.0f64.sqrt() / 1.5);
        assert!((rh_characteristic(&g, &w, 2.0).unwrap() - expect).abs() < 1e-14);
        // A_2 on {3,1,1}: (5/3)(7/9); on all: (3/2)(10/12)
        let expect = (5.0 / 3.0 * 7.0 / 9.0f64).max(1.5 * 10.0 / 12.0);
        assert!((ap_characteristic(&g, &w, 2.0).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn power_weight_regularized() {
        let g = torus(32);
        assert!(power_weight(&g, 0.0).values().iter().all(|&v| v == 1.0));
        let w = power_weight(&g, 0.7);
        assert_eq!(w.values()[g.identity()], g.min_positive_norm().powf(0.7));
    }

    #[test]
    fn delta_norm() {
        let mut f = vec![C64::new(0.0, 0.0); 5];
        f[2] = C64::new(1.0, 0.0);
        let w = [1.0, 2.0, 5.0, 1.0, 1.0];
        assert!((weighted_norm(&f, 3.0, &w) - 5f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn exponent_arithmetic() {
        assert_eq!(bfp_exponent(2.0, 4.0, 3.0), 3.0);
        assert_eq!(bfp_exponent(1.0, f64::INFINITY, 3.0), 1.0);
    }
}
