//! Exponent thresholds of the weighted estimates and the sweep comparing
//! measured weighted norms with characteristic-based ceilings.

use num_rational::Ratio;

use super::{ap_characteristic, bfp_characteristic, power_weight, weighted_opnorm};
use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::kernel_ops::{interpolated_upper_bound, kernel_operator_norm, NormPair};
use crate::multipliers::MultiplierSpec;
use crate::spectral::SpectralDecomposition;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Full decay: every `1 < p < inf`, `w in A_p`.
    I,
    /// `p > p_beta`, `w in A_{p / p_beta}`.
    II,
    /// `2 < p < s_beta`, `w in A_{p/2} cap RH_{(s_beta / p)'}`.
    III,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Mode::I),
            "ii" | "2" => Ok(Mode::II),
            "iii" | "3" => Ok(Mode::III),
            _ => Err(Error::InvalidParameter(format!("unknown mode '{s}' (expected i, ii or iii)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::I => "i",
            Mode::II => "ii",
            Mode::III => "iii",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub mode: Mode,
    /// Lower end `2Q / beta` of the range in mode ii (and `1` in mode i).
    pub p_low: Option<Rational>,
    /// Upper end `s` with `1/s = 1/2 - beta / 2Q` in mode iii.
    pub s_high: Option<Rational>,
}

/// Reads `x` as the simplest rational that rounds to it.
pub fn rational(x: f64) -> Result<Rational> {
    Rational::approximate_float(x)
        .filter(|r| *r.numer() as f64 / *r.denom() as f64 == x)
        .ok_or_else(|| Error::InvalidParameter(format!("{x} has no small exact rational form")))
}

/// Thresholds for decay `beta` in homogeneous dimension `q`.
pub fn thresholds(q: Rational, beta: Rational) -> Result<Thresholds> {
    let zero = Rational::from_integer(0);
    if q <= zero || beta <= zero {
        return Err(Error::InvalidParameter(format!("need Q > 0 and beta > 0 (got {q}, {beta})")));
    }
    let two = Rational::from_integer(2);
    if beta >= two * q {
        return Ok(Thresholds { mode: Mode::I, p_low: Some(Rational::from_integer(1)), s_high: None });
    }
    if beta >= q {
        return Ok(Thresholds { mode: Mode::II, p_low: Some(two * q / beta), s_high: None });
    }
    let inv_s = Rational::new(1, 2) - beta / (two * q);
    Ok(Thresholds { mode: Mode::III, p_low: None, s_high: Some(inv_s.recip()) })
}

/// Multiplier thresholds: `p_beta = 2Q / beta`, `1/s_beta = 1/2 - beta / 2Q`.
pub fn multiplier_thresholds(q: f64, beta: f64) -> Result<Thresholds> {
    thresholds(rational(q)?, rational(beta)?)
}

/// Riesz means of order `k`: decay `2k`, so `p_k = Q / k` and `1/s_k = 1/2 - k/Q`.
pub fn riesz_thresholds(q: f64, k: f64) -> Result<Thresholds> {
    thresholds(rational(q)?, rational(k)? * 2)
}

/// Dispersive propagator with `beta` derivatives: decay `2 beta / alpha`, so
/// `p = Q alpha / beta` and `1/s = 1/2 - beta / (alpha Q)`.
pub fn dispersive_thresholds(q: f64, alpha: f64, beta: f64) -> Result<Thresholds> {
    thresholds(rational(q)?, rational(beta)? * 2 / rational(alpha)?)
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub p: f64,
    pub a: f64,
    /// Sparse exponents used for the ceiling.
    pub r1: f64,
    pub r2: f64,
    /// `[w]_{A_{p/r1}}` (the class the weight must belong to).
    pub ap: f64,
    pub characteristic: f64,
    pub lower: f64,
    pub upper: f64,
    pub ceiling: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct QuantitativeReport {
    pub thresholds: Thresholds,
    pub unweighted: [f64; 3],
    pub cells: Vec<SweepCell>,
}

impl QuantitativeReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Sweeps `p` and power weights inside the mode's weight class and compares the
/// measured `L^p(w)` lower bound with
/// `||T||_{p -> p} ([w]_{A_{p/r1}} [w]_{RH_{(r2/p)'}})^{max{1/(p - r1), (r2 - 1)/(r2 - p)}}`,
/// where the unweighted norm is itself bounded by interpolation.
pub fn quantitative_suite(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    spec: &MultiplierSpec,
    mode: Mode,
    seed: u64,
) -> Result<QuantitativeReport> {
    let q = g.homogeneous_dim() as f64;
    let th = multiplier_thresholds(q, spec.beta())?;
    if th.mode != mode {
        return Err(Error::InvalidParameter(format!(
            "beta = {} with Q = {q} belongs to mode {}, not {mode}",
            spec.beta(),
            th.mode
        )));
    }
    let values = dec.multiplier_values(|lam| spec.eval(lam))?;
    let kernel = dec.kernel_from_values(&values);
    let n1 = kernel_operator_norm(g, &kernel, NormPair::OneOne);
    let n2 = kernel_operator_norm(g, &kernel, NormPair::TwoTwo);
    let ninf = kernel_operator_norm(g, &kernel, NormPair::InfInf);
    // (p, r1, r2, admissible power range for the weight)
    let plan: Vec<(f64, f64, f64, f64, f64)> = match mode {
        Mode::I => [1.5, 2.0, 3.0].iter().map(|&p| (p, 1.0, f64::INFINITY, -q, q * (p - 1.0))).collect(),
        Mode::II => {
            let pb = to_f64(th.p_low.unwrap());
            [1.5, 2.0, 3.0].iter().map(|&c| (c * pb, pb, f64::INFINITY, -q, q * (c - 1.0))).collect()
        }
        Mode::III => {
            let s = to_f64(th.s_high.unwrap());
            [0.25, 0.5, 0.75]
                .iter()
                .map(|&t| {
                    let p = 2.0 + t * (s - 2.0);
                    let rh = 1.0 / (1.0 - p / s);
                    (p, 2.0, s, -q / rh, q * (p / 2.0 - 1.0))
                })
                .collect()
        }
    };
    let mut cells = Vec::new();
    for (p, r1, r2, a_lo, a_hi) in plan {
        let unweighted = interpolated_upper_bound(n1, n2, ninf, p);
        for a in [0.5 * a_lo, 0.0, 0.5 * a_hi] {
            let w = power_weight(g, a);
            let bounds = weighted_opnorm(g, dec, &values, p, &w, seed)?;
            let ap = ap_characteristic(g, &w, p / r1)?;
            let characteristic = bfp_characteristic(g, &w, r1, r2, p)?;
            let ceiling = unweighted * characteristic;
            cells.push(SweepCell {
                p,
                a,
                r1,
                r2,
                ap,
                characteristic,
                lower: bounds.lower,
                upper: bounds.upper,
                ceiling,
                pass: bounds.lower <= ceiling * (1.0 + 1e-9),
            });
        }
    }
    Ok(QuantitativeReport { thresholds: th, unweighted: [n1, n2, ninf], cells })
}
