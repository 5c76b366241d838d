//! The multiplier class: oscillating multipliers, their dyadic frequency pieces,
//! Sobolev-type class conditions, spatial pieces, Riesz means and dispersive flows.

pub mod bump;
pub mod dispersive;
pub mod riesz;
pub mod sobolev;
pub mod spatial;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::C64;
pub use bump::{make_bump_partition, BumpProfile};

type Profile = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// A multiplier together with its class parameters and dyadic decomposition data.
#[derive(Clone)]
pub struct MultiplierSpec {
    name: String,
    theta: f64,
    beta: f64,
    bump: BumpProfile,
    epsilon: f64,
    slack: f64,
    profile: Profile,
    /// Oscillating profiles get denser sampling at large `|j|`.
    oscillates: bool,
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSpec")
            .field("name", &self.name)
            .field("theta", &self.theta)
            .field("beta", &self.beta)
            .field("nu", &self.bump.nu())
            .field("epsilon", &self.epsilon)
            .field("slack", &self.slack)
            .finish()
    }
}

fn check_theta_beta(theta: f64, beta: f64) -> Result<()> {
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("theta must be nonzero and finite, got {theta}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
    }
    Ok(())
}

/// `lambda^theta >= 1` with `lambda > 0`.
fn in_support(theta: f64, lambda: f64) -> bool {
    lambda > 0.0 && if theta > 0.0 { lambda >= 1.0 } else { lambda <= 1.0 }
}

/// `exp(i lambda^theta) lambda^{-theta beta / 2}` cut to `lambda^theta >= 1`, with `nu = 2`.
pub fn oscillating_multiplier(theta: f64, beta: f64) -> Result<MultiplierSpec> {
    MultiplierSpec::oscillating(theta, beta, 2.0)
}

impl MultiplierSpec {
    pub fn oscillating(theta: f64, beta: f64, nu: f64) -> Result<Self> {
        check_theta_beta(theta, beta)?;
        let profile: Profile = Arc::new(move |lam: f64| {
            let phase = lam.powf(theta);
            C64::from_polar(lam.powf(-theta * beta / 2.0), phase)
        });
        Ok(MultiplierSpec {
            name: format!("oscillating(theta={theta},beta={beta})"),
            theta,
            beta,
            bump: make_bump_partition(nu)?,
            epsilon: 0.1,
            slack: 0.01,
            profile,
            oscillates: true,
        })
    }

    /// Arbitrary profile; the support restriction `lambda^theta >= 1` is applied on top.
    pub fn custom<F>(name: &str, theta: f64, beta: f64, nu: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        check_theta_beta(theta, beta)?;
        Ok(MultiplierSpec {
            name: name.to_string(),
            theta,
            beta,
            bump: make_bump_partition(nu)?,
            epsilon: 0.1,
            slack: 0.01,
            profile: Arc::new(f),
            oscillates: false,
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu(&self) -> f64 {
        self.bump.nu()
    }

    pub fn bump(&self) -> &BumpProfile {
        &self.bump
    }

    /// Spatial grouping parameter.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Slack added to predicted exponents.
    pub fn slack(&self) -> f64 {
        self.slack
    }

    /// `m(lambda)`.
    pub fn eval(&self, lambda: f64) -> C64 {
        if in_support(self.theta, lambda) {
            (self.profile)(lambda)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Whether `j` indexes a piece of the decomposition (`j >= 0` for `theta > 0`,
    /// `j <= 0` for `theta < 0`).
    pub fn valid_index(&self, j: i32) -> bool {
        if self.theta > 0.0 {
            j >= 0
        } else {
            j <= 0
        }
    }

    /// Rescaled piece `m^j(lambda) = m(nu^j lambda) phi(lambda)`.
    pub fn scaled_piece(&self, j: i32, lambda: f64) -> C64 {
        let b = self.bump.phi(lambda);
        if b == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.eval(self.nu().powi(j) * lambda) * b
    }

    /// Frequency piece `m_j(lambda) = m(lambda) phi(nu^{-j} lambda)`.
    pub fn piece(&self, j: i32, lambda: f64) -> C64 {
        let b = self.bump.phi_scaled(j, lambda);
        if b == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.eval(lambda) * b
    }

    /// Support interval `[nu^{j-1}, nu^{j+1}]` of `m_j`.
    pub fn piece_support(&self, j: i32) -> (f64, f64) {
        (self.nu().powi(j - 1), self.nu().powi(j + 1))
    }

    /// Valid indices whose pieces can be nonzero somewhere in `[lambda_min, lambda_max]`.
    pub fn piece_indices(&self, lambda_min: f64, lambda_max: f64) -> Vec<i32> {
        let ln_nu = self.nu().ln();
        if self.theta > 0.0 {
            let top = (lambda_max.ln() / ln_nu).ceil() as i32 + 1;
            (0..=top.max(0)).collect()
        } else {
            let bottom = (lambda_min.ln() / ln_nu).floor() as i32 - 1;
            (bottom.min(0)..=0).collect()
        }
    }

    /// `sum_j m_j(lambda)` over every valid index.
    pub fn piece_sum(&self, lambda: f64) -> C64 {
        if lambda <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let c = (lambda.ln() / self.nu().ln()).floor() as i32;
        (c - 1..=c + 2).filter(|&j| self.valid_index(j)).map(|j| self.piece(j, lambda)).sum()
    }

    /// Grid size for sampling `m^j` on its support window.
    fn grid_points(&self, j: i32) -> usize {
        if !self.oscillates {
            return sobolev::DEFAULT_POINTS;
        }
        let nu = self.nu();
        let omega = self.theta.abs() * nu.powf(j as f64 * self.theta) * nu.powf((self.theta - 1.0).abs());
        let decay = self.theta.abs() * self.beta / 2.0 + 1.0;
        sobolev::points_for(omega + decay, nu - 1.0 / nu)
    }

    /// Window strictly containing `[1/nu, nu]`.
    fn piece_window(&self) -> (f64, f64) {
        let nu = self.nu();
        let pad = 0.05 * (nu - 1.0 / nu);
        (1.0 / nu - pad, nu + pad)
    }
}

#[derive(Debug, Clone)]
pub struct ClassRow {
    pub j: i32,
    pub sup_norm: f64,
    /// `nu^{j theta beta / 2} ||m^j||_inf`.
    pub cond1: f64,
    /// `nu^{-j theta (2s - beta) / 2} ||m^j||_{L^2_s}` for `s = 0..=s_max`.
    pub cond2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ClassReport {
    pub rows: Vec<ClassRow>,
    /// Max/min of each column over the upper half of the index range.
    pub cond1_spread: f64,
    pub cond2_spread: Vec<f64>,
    pub bounded: bool,
}

/// Spread (max/min) above which a column is declared unbounded.
pub const CLASS_SPREAD_LIMIT: f64 = 10.0;

/// Evaluates the two class conditions on every valid `j` in `j_range`.
pub fn class_membership_report(spec: &MultiplierSpec, j_range: (i32, i32), s_max: u32) -> Result<ClassReport> {
    if s_max > 6 {
        return Err(Error::InvalidParameter(format!("s_max must be at most 6, got {s_max}")));
    }
    let js: Vec<i32> = (j_range.0..=j_range.1).filter(|&j| spec.valid_index(j)).collect();
    if js.is_empty() {
        return Err(Error::InvalidParameter(format!("no valid index in {j_range:?}")));
    }
    let window = spec.piece_window();
    let rows = js
        .par_iter()
        .map(|&j| -> Result<ClassRow> {
            let points = spec.grid_points(j);
            let step = (window.1 - window.0) / (points - 1) as f64;
            let samples: Vec<C64> = (0..points).map(|i| spec.scaled_piece(j, window.0 + step * i as f64)).collect();
            let sup_norm = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let jt = j as f64 * spec.theta;
            let nu = spec.nu();
            let cond2 = (0..=s_max)
                .map(|s| {
                    sobolev::sobolev_norm(&samples, step, s)
                        .map(|v| nu.powf(-jt * (2.0 * s as f64 - spec.beta) / 2.0) * v)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ClassRow { j, sup_norm, cond1: nu.powf(jt * spec.beta / 2.0) * sup_norm, cond2 })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_magnitude: Vec<&ClassRow> = rows.iter().collect();
    by_magnitude.sort_by_key(|r| r.j.abs());
    let upper = &by_magnitude[by_magnitude.len() / 2..];
    let spread = |vals: Vec<f64>| {
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    };
    let cond1_spread = spread(upper.iter().map(|r| r.cond1).collect());
    let cond2_spread: Vec<f64> =
        (0..=s_max as usize).map(|s| spread(upper.iter().map(|r| r.cond2[s]).collect())).collect();
    let bounded = cond1_spread <= CLASS_SPREAD_LIMIT && cond2_spread.iter().all(|&v| v <= CLASS_SPREAD_LIMIT);
    Ok(ClassReport { rows, cond1_spread, cond2_spread, bounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn oscillating_examples() {
        let m = oscillating_multiplier(1.0, 0.0).unwrap();
        assert!((m.eval(3.7).norm() - 1.0).abs() < 1e-15);
        assert_eq!(m.eval(0.5), C64::new(0.0, 0.0));
        let m = oscillating_multiplier(1.0, 2.0).unwrap();
        assert!((m.eval(4.0).norm() - 0.25).abs() < 1e-15);
        let low = oscillating_multiplier(-1.0, 2.0).unwrap();
        assert_eq!(low.eval(1.5), C64::new(0.0, 0.0));
        assert_eq!(low.eval(0.0), C64::new(0.0, 0.0));
        assert!(low.eval(0.5).norm() > 0.0);
        assert!(oscillating_multiplier(0.0, 1.0).is_err());
        assert!(oscillating_multiplier(1.0, -1.0).is_err());
    }

    #[test]
    fn piece_support_is_exact() {
        let m = oscillating_multiplier(2.0, 3.0).unwrap();
        for j in 0..6 {
            assert_eq!(m.piece(j, 2f64.powi(j + 2)), C64::new(0.0, 0.0));
            assert_eq!(m.piece(j, 2f64.powi(j + 1)), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn indices_follow_sign_of_theta() {
        assert!(oscillating_multiplier(1.0, 1.0).unwrap().valid_index(0));
        assert!(!oscillating_multiplier(1.0, 1.0).unwrap().valid_index(-1));
        assert!(oscillating_multiplier(-1.0, 1.0).unwrap().valid_index(-3));
        assert!(!oscillating_multiplier(-1.0, 1.0).unwrap().valid_index(1));
    }

    #[test]
    fn class_report_for_decaying_multiplier() {
        let m = oscillating_multiplier(1.0, 2.0).unwrap();
        let rep = class_membership_report(&m, (0, 6), 2).unwrap();
        assert!(rep.bounded, "{rep:?}");
        // j = 0: the sup of lambda^{-1} phi(lambda) on [1, 2] is attained at 1.
        assert!((rep.rows[0].cond1 - 1.0).abs() < 1e-3);
        let c: Vec<f64> = rep.rows[1..].iter().map(|r| r.cond1).collect();
        for v in &c {
            assert!((v - c[0]).abs() < 1e-3 * c[0]);
        }
    }

    #[test]
    fn class_report_for_growing_multiplier() {
        let m = MultiplierSpec::custom("identity", 1.0, 0.0, 2.0, |l| C64::new(l, 0.0)).unwrap();
        let rep = class_membership_report(&m, (0, 12), 1).unwrap();
        assert!(!rep.bounded);
        assert!(rep.cond1_spread > 10.0);
    }

    #[test]
    fn class_report_low_frequency() {
        let m = oscillating_multiplier(-1.0, 2.0).unwrap();
        let rep = class_membership_report(&m, (-6, 0), 2).unwrap();
        assert!(rep.bounded, "{rep:?}");
        assert!(class_membership_report(&m, (1, 3), 1).is_err());
        assert!(class_membership_report(&m, (-3, 0), 7).is_err());
    }

    proptest! {
        #[test]
        fn pieces_telescope(log_lam in -6.0f64..8.0, which in 0usize..3) {
            let (theta, beta) = [(1.0, 2.0), (2.0, 3.0), (-1.0, 2.0)][which];
            let m = oscillating_multiplier(theta, beta).unwrap();
            let lam = log_lam.exp();
            let whole = m.eval(lam);
            prop_assert!((m.piece_sum(lam) - whole).norm() <= 1e-10 * whole.norm().max(1.0));
        }

        #[test]
        fn rescaled_piece_matches(lam in 0.3f64..2.5, j in 0i32..6) {
            let m = oscillating_multiplier(1.0, 2.0).unwrap();
            let a = m.scaled_piece(j, lam);
            let b = m.piece(j, 2f64.powi(j) * lam);
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }
}
