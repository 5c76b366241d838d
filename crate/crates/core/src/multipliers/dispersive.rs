//! The propagator `exp(i t (sqrt L)^alpha)` and a weighted Sobolev ratio.

use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;
use crate::weights::weighted_norm;
use crate::C64;

/// `u(., t) = exp(i t (sqrt L)^alpha) f`.
pub fn dispersive_apply(dec: &SpectralDecomposition, alpha: f64, t: f64, f: &[C64]) -> Result<Vec<C64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if t == 0.0 {
        return Ok(f.to_vec());
    }
    dec.apply_multiplier(|lam| C64::from_polar(1.0, t * lam.powf(alpha)), f)
}

/// `||u(., t)||_{L^p(w)} / ||(I + sqrt L)^beta f||_{L^p(w)}`.
pub fn weighted_sobolev_check(
    dec: &SpectralDecomposition,
    alpha: f64,
    beta: f64,
    t: f64,
    p: f64,
    w: &[f64],
    f: &[C64],
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    let u = dispersive_apply(dec, alpha, t, f)?;
    let lifted = dec.apply_multiplier(|lam| C64::new((1.0 + lam).powf(beta), 0.0), f)?;
    let den = weighted_norm(&lifted, p, w);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(weighted_norm(&u, p, w) / den)
}
