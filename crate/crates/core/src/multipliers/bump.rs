//! Smooth dyadic partition of unity on `(0, inf)`.

use crate::error::{Error, Result};

/// `phi(lambda) = chi(lambda) - chi(nu lambda)` with `chi` a smooth step from 1
/// (on `(0, 1]`) to 0 (on `[nu, inf)`) in the variable `log lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    nu: f64,
    ln_nu: f64,
}

pub fn make_bump_partition(nu: f64) -> Result<BumpProfile> {
    if !(nu > 1.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must exceed 1, got {nu}")));
    }
    Ok(BumpProfile { nu, ln_nu: nu.ln() })
}

fn flat(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = flat(u);
        a / (a + flat(1.0 - u))
    }
}

impl BumpProfile {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Cutoff equal to 1 on `(0, 1]` and 0 on `[nu, inf)`.
    pub fn cutoff(&self, lambda: f64) -> f64 {
        if lambda <= 1.0 {
            1.0
        } else if lambda >= self.nu {
            0.0
        } else {
            smooth_step(1.0 - lambda.ln() / self.ln_nu)
        }
    }

    /// The bump, supported in `[1/nu, nu]`.
    pub fn phi(&self, lambda: f64) -> f64 {
        if lambda <= 1.0 / self.nu || lambda >= self.nu {
            return 0.0;
        }
        self.cutoff(lambda) - self.cutoff(self.nu * lambda)
    }

    /// `phi(nu^{-j} lambda)`.
    pub fn phi_scaled(&self, j: i32, lambda: f64) -> f64 {
        self.phi(lambda * self.nu.powi(-j))
    }

    /// `sum_j phi(nu^{-j} lambda)` over the (at most two) nonzero terms.
    pub fn partition_sum(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let c = (lambda.ln() / self.ln_nu).floor() as i32;
        (c - 1..=c + 2).map(|j| self.phi_scaled(j, lambda)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_nu_at_most_one() {
        assert!(make_bump_partition(1.0).is_err());
        assert!(make_bump_partition(0.5).is_err());
    }

    #[test]
    fn support_and_peak() {
        let b = make_bump_partition(2.0).unwrap();
        assert_eq!(b.phi(4.0), 0.0);
        assert_eq!(b.phi(0.5), 0.0);
        assert_eq!(b.phi(1.0), 1.0);
        assert!((b.partition_sum(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn at_most_two_terms() {
        let b = make_bump_partition(2.0).unwrap();
        for i in 0..1000 {
            let lam = 0.01 * 1.01f64.powi(i);
            let nonzero = (-20..20).filter(|&j| b.phi_scaled(j, lam) != 0.0).count();
            assert!(nonzero <= 2);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(log_lam in -7.0f64..7.0, nu in 1.2f64..4.0) {
            let b = make_bump_partition(nu).unwrap();
            let lam = log_lam.exp();
            let full: f64 = (-60..60).map(|j| b.phi_scaled(j, lam)).sum();
            prop_assert!((full - 1.0).abs() < 1e-10);
            prop_assert!((b.partition_sum(lam) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn bump_in_unit_interval(lam in 0.0f64..10.0) {
            let b = make_bump_partition(2.0).unwrap();
            let v = b.phi(lam);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
