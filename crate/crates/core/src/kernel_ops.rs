//! Norms of left-invariant operators `f -> f * K` given by their kernel.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::linalg;
use crate::C64;

/// Exponent pair `(p, q)` for an `L^p -> L^q` norm with `p, q` in `{1, 2, inf}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormPair {
    OneOne,
    TwoTwo,
    InfInf,
    OneInf,
    OneTwo,
    TwoInf,
}

impl NormPair {
    pub const ALL: [NormPair; 6] =
        [NormPair::OneOne, NormPair::TwoTwo, NormPair::InfInf, NormPair::OneInf, NormPair::OneTwo, NormPair::TwoInf];

    pub fn exponents(self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match self {
            NormPair::OneOne => (1.0, 1.0),
            NormPair::TwoTwo => (2.0, 2.0),
            NormPair::InfInf => (inf, inf),
            NormPair::OneInf => (1.0, inf),
            NormPair::OneTwo => (1.0, 2.0),
            NormPair::TwoInf => (2.0, inf),
        }
    }

    pub fn from_exponents(p: f64, q: f64) -> Result<Self> {
        NormPair::ALL
            .into_iter()
            .find(|pair| pair.exponents() == (p, q))
            .ok_or_else(|| Error::InvalidParameter(format!("unsupported exponent pair ({p}, {q})")))
    }
}

impl fmt::Display for NormPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q) = self.exponents();
        let show = |v: f64| if v.is_infinite() { "inf".to_string() } else { format!("{v}") };
        write!(f, "{}-{}", show(p), show(q))
    }
}

impl FromStr for NormPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| -> Result<f64> {
            match v.trim() {
                "inf" | "infinity" => Ok(f64::INFINITY),
                other => other.parse().map_err(|_| Error::InvalidParameter(format!("bad exponent '{other}' in '{s}'"))),
            }
        };
        let (p, q) =
            s.split_once(['-', ',']).ok_or_else(|| Error::InvalidParameter(format!("expected p-q, got '{s}'")))?;
        NormPair::from_exponents(parse(p)?, parse(q)?)
    }
}

/// Kernel of the adjoint operator: `K*(a) = conj(K(a^{-1}))`.
pub fn adjoint_kernel(g: &GroupModel, k: &[C64]) -> Vec<C64> {
    (0..g.size()).map(|a| k[g.inv(a)].conj()).collect()
}

/// `||f -> f * K||_{2 -> 2}` via Lanczos on `T* T`.
pub fn two_norm(g: &GroupModel, k: &[C64], tol: f64) -> f64 {
    if k.iter().all(|v| v.norm_sqr() == 0.0) {
        return 0.0;
    }
    let adj = adjoint_kernel(g, k);
    let top = linalg::lanczos_max_eigenvalue(|f| g.convolve(&g.convolve(f, k), &adj), g.size(), tol, 0x1a2c);
    top.sqrt()
}

/// Exact norm of the convolution operator with kernel `k` for the given pair.
///
/// With `T[x][y] = K(y^{-1} x)`, every row and every column is a rearrangement of
/// `K`, so the `1 -> 1`, `inf -> inf`, `1 -> inf`, `1 -> 2` and `2 -> inf` norms are
/// norms of `K` itself.
pub fn kernel_operator_norm(g: &GroupModel, k: &[C64], pair: NormPair) -> f64 {
    match pair {
        NormPair::OneOne | NormPair::InfInf => k.iter().map(|v| v.norm()).sum(),
        NormPair::OneInf => k.iter().map(|v| v.norm()).fold(0.0, f64::max),
        NormPair::OneTwo | NormPair::TwoInf => linalg::norm2(k),
        NormPair::TwoTwo => two_norm(g, k, 1e-10),
    }
}

/// Upper bound for `||T||_{r -> r}` by Riesz-Thorin between the exact `1`, `2`
/// and `inf` norms.
pub fn interpolated_upper_bound(norm_1: f64, norm_2: f64, norm_inf: f64, r: f64) -> f64 {
    if r <= 1.0 {
        return norm_1;
    }
    if r.is_infinite() {
        return norm_inf;
    }
    if r <= 2.0 {
        // 1/r = (1 - t) + t/2
        let t = 2.0 * (1.0 - 1.0 / r);
        norm_1.powf(1.0 - t) * norm_2.powf(t)
    } else {
        // 1/r = t/2
        let t = 2.0 / r;
        norm_2.powf(t) * norm_inf.powf(1.0 - t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, ModelKind};

    #[test]
    fn parse_pairs() {
        assert_eq!("1-inf".parse::<NormPair>().unwrap(), NormPair::OneInf);
        assert_eq!("2,2".parse::<NormPair>().unwrap(), NormPair::TwoTwo);
        assert!("3-3".parse::<NormPair>().is_err());
        assert_eq!(NormPair::TwoInf.to_string(), "2-inf");
    }

    #[test]
    fn column_sum_matches_dense_matrix() {
        let g = build_group(ModelKind::Heisenberg { n: 3 }, 4096).unwrap();
        let n = g.size();
        let k: Vec<C64> = (0..n).map(|a| C64::new((a as f64 * 0.37).sin(), (a as f64 * 0.11).cos() * 0.2)).collect();
        let col_max = (0..n).map(|y| (0..n).map(|x| k[g.mul(g.inv(y), x)].norm()).sum::<f64>()).fold(0.0, f64::max);
        let got = kernel_operator_norm(&g, &k, NormPair::OneOne);
        assert!((got - col_max).abs() < 1e-12 * col_max);
    }

    #[test]
    fn delta_kernel_has_unit_norms() {
        let g = build_group(ModelKind::Torus { d: 2, n: 5 }, 4096).unwrap();
        let mut k = vec![C64::new(0.0, 0.0); g.size()];
        k[0] = C64::new(1.0, 0.0);
        for pair in NormPair::ALL {
            assert!((kernel_operator_norm(&g, &k, pair) - 1.0).abs() < 1e-9, "{pair}");
        }
    }

    #[test]
    fn interpolation_endpoints() {
        assert_eq!(interpolated_upper_bound(3.0, 2.0, 5.0, 1.0), 3.0);
        assert!((interpolated_upper_bound(3.0, 2.0, 5.0, 2.0) - 2.0).abs() < 1e-14);
        assert_eq!(interpolated_upper_bound(3.0, 2.0, 5.0, f64::INFINITY), 5.0);
    }
}
