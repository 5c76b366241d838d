//! Spatial decomposition `T_j = sum_l T_j^l` of the frequency pieces and the
//! decay of their operator norms in `j`.

use rayon::prelude::*;

use super::MultiplierSpec;
use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::kernel_ops::{kernel_operator_norm, NormPair};
use crate::linalg::{self, LinearFit};
use crate::spectral::SpectralDecomposition;
use crate::C64;

#[derive(Debug, Clone)]
pub struct SpatialPiece {
    pub l: i32,
    /// Kernel of `T_j^l`: `K_{m_j}(a) phi(nu^{-l + j(1 - theta)} |a|)` off the identity.
    pub kernel: Vec<C64>,
    pub empty: bool,
}

#[derive(Debug, Clone)]
pub struct SpatialPieces {
    pub j: i32,
    /// Kernel of the whole frequency piece `T_j = m_j(sqrt L)`.
    pub full: Vec<C64>,
    pub pieces: Vec<SpatialPiece>,
    /// `j (1 - theta)`: piece `l` lives where `nu^{l - shift}` is comparable to `|a|`.
    pub shift: f64,
}

impl SpatialPieces {
    pub fn piece(&self, l: i32) -> Option<&SpatialPiece> {
        self.pieces.iter().find(|p| p.l == l)
    }

    /// Sum of the kernels of all pieces with `l <= l_max`.
    pub fn block_up_to(&self, l_max: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.full.len()];
        for p in self.pieces.iter().filter(|p| p.l as f64 <= l_max) {
            out.iter_mut().zip(&p.kernel).for_each(|(o, k)| *o += k);
        }
        out
    }
}

/// Annulus `[nu^{l - shift - 1}, nu^{l - shift + 1}]` of physical radii for piece `l`.
pub fn piece_annulus(nu: f64, shift: f64, l: i32) -> (f64, f64) {
    (nu.powf(l as f64 - shift - 1.0), nu.powf(l as f64 - shift + 1.0))
}

/// Splits the kernel of `m_j(sqrt L)` into spatial annuli.
///
/// The identity entry is placed in the lowest nonempty piece so that the
/// pieces sum to `T_j` exactly.
pub fn spatial_pieces(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    spec: &MultiplierSpec,
    j: i32,
) -> Result<SpatialPieces> {
    if !spec.valid_index(j) {
        return Err(Error::InvalidParameter(format!("index {j} is not a valid piece for theta = {}", spec.theta())));
    }
    let values = dec.multiplier_values(|lam| spec.piece(j, lam))?;
    let full = dec.kernel_from_values(&values);
    Ok(split_kernel(g, dec, spec, j, full))
}

pub(crate) fn split_kernel(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    spec: &MultiplierSpec,
    j: i32,
    full: Vec<C64>,
) -> SpatialPieces {
    let nu = spec.nu();
    let shift = j as f64 * (1.0 - spec.theta());
    let ln_nu = nu.ln();
    let lo = dec.physical(g.min_positive_norm());
    let hi = dec.physical(g.diameter());
    let l_lo = (lo.ln() / ln_nu + shift).floor() as i32 - 1;
    let l_hi = (hi.ln() / ln_nu + shift).ceil() as i32 + 1;
    let e = g.identity();
    let mut pieces: Vec<SpatialPiece> = (l_lo..=l_hi)
        .map(|l| {
            let scale = nu.powf(-(l as f64) + shift);
            let mut kernel = vec![C64::new(0.0, 0.0); full.len()];
            let mut empty = true;
            for (a, k) in kernel.iter_mut().enumerate() {
                if a == e {
                    continue;
                }
                let w = spec.bump().phi(scale * dec.physical(g.norm(a)));
                if w != 0.0 {
                    empty = false;
                    *k = full[a] * w;
                }
            }
            SpatialPiece { l, kernel, empty }
        })
        .collect();
    if let Some(first) = pieces.iter_mut().find(|p| !p.empty) {
        first.kernel[e] = full[e];
    }
    SpatialPieces { j, full, pieces, shift }
}

/// Dense matrix `T[x][y] = K(y^{-1} x)` (row-major), for small models.
pub fn kernel_matrix(g: &GroupModel, kernel: &[C64]) -> Vec<C64> {
    let n = g.size();
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for x in 0..n {
        for y in 0..n {
            m[x * n + y] = kernel[g.mul(g.inv(y), x)];
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct DecayRow {
    pub j: i32,
    pub pair: NormPair,
    /// `||T_j||`.
    pub total: f64,
    /// `||sum_{l <= |j| eps} T_j^l||`.
    pub small_block: f64,
    /// `max_{l > |j| eps} ||T_j^l||` and its maximizing `l`.
    pub worst_large: f64,
    pub worst_large_l: Option<i32>,
    /// `max_i |m_j(sqrt lambda_i)|`, the exact `2 -> 2` norm of `T_j`.
    pub spectral_sup: f64,
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    pub pair: NormPair,
    /// Fitted `log_nu` slope of `||T_j||` in `j`.
    pub total: LinearFit,
    pub small_block: Option<LinearFit>,
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub usable: Vec<i32>,
    pub fits: Vec<DecayFit>,
}

/// Predicted `log_nu` growth rate in `j` for the supported pairs.
pub fn predicted_slope(spec: &MultiplierSpec, q: f64, pair: NormPair) -> Option<f64> {
    let (t, b) = (spec.theta(), spec.beta());
    match pair {
        NormPair::TwoTwo => Some(-t * b / 2.0),
        NormPair::OneOne | NormPair::InfInf => Some(-t * b / 2.0 + t * q / 2.0 + spec.slack()),
        NormPair::OneInf => Some(q - t * q / 2.0),
        _ => None,
    }
}

/// Indices whose band holds an eigenvalue in its core (`phi >= 1/2`) where `m` is nonzero.
pub fn usable_indices(dec: &SpectralDecomposition, spec: &MultiplierSpec, js: &[i32]) -> Vec<i32> {
    js.iter()
        .copied()
        .filter(|&j| {
            dec.frequencies().iter().any(|&lam| spec.bump().phi_scaled(j, lam) >= 0.5 && spec.eval(lam).norm() > 0.0)
        })
        .collect()
}

/// Norms of `T_j`, of its small-`l` block and of the worst large-`l` piece.
pub fn piece_decay_report(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    spec: &MultiplierSpec,
    js: &[i32],
    pairs: &[NormPair],
) -> Result<DecayReport> {
    let js: Vec<i32> = js.iter().copied().filter(|&j| spec.valid_index(j)).collect();
    let usable = usable_indices(dec, spec, &js);
    if usable.len() < 3 {
        return Err(Error::Diagnostic(format!(
            "only {} usable frequency bands ({usable:?}); at least 3 are needed",
            usable.len()
        )));
    }
    let q = g.homogeneous_dim() as f64;
    let per_j = usable
        .par_iter()
        .map(|&j| -> Result<Vec<DecayRow>> {
            let values = dec.multiplier_values(|lam| spec.piece(j, lam))?;
            let spectral_sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let sp = split_kernel(g, dec, spec, j, dec.kernel_from_values(&values));
            let cut = j.abs() as f64 * spec.epsilon();
            let small = sp.block_up_to(cut);
            Ok(pairs
                .iter()
                .map(|&pair| {
                    let total = kernel_operator_norm(g, &sp.full, pair);
                    let small_block = kernel_operator_norm(g, &small, pair);
                    let (worst_large, worst_large_l) = sp
                        .pieces
                        .iter()
                        .filter(|p| p.l as f64 > cut && !p.empty)
                        .map(|p| (kernel_operator_norm(g, &p.kernel, pair), Some(p.l)))
                        .fold((0.0, None), |acc, v| if v.0 > acc.0 { v } else { acc });
                    DecayRow { j, pair, total, small_block, worst_large, worst_large_l, spectral_sup }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<DecayRow> = per_j.into_iter().flatten().collect();
    let ln_nu = spec.nu().ln();
    let fits = pairs
        .iter()
        .filter_map(|&pair| {
            let pts = |f: &dyn Fn(&DecayRow) -> f64| -> Vec<(f64, f64)> {
                rows.iter().filter(|r| r.pair == pair && f(r) > 0.0).map(|r| (r.j as f64, f(r).ln() / ln_nu)).collect()
            };
            let total = linalg::linear_fit(&pts(&|r| r.total))?;
            Some(DecayFit {
                pair,
                total,
                small_block: linalg::linear_fit(&pts(&|r| r.small_block)),
                predicted: predicted_slope(spec, q, pair),
            })
        })
        .collect();
    Ok(DecayReport { rows, usable, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, ModelKind};
    use crate::multipliers::oscillating_multiplier;
    use crate::spectral::{assemble_sublaplacian, spectral_decompose};

    #[test]
    fn pieces_sum_to_whole_and_respect_annuli() {
        let g = build_group(ModelKind::Torus { d: 1, n: 64 }, 4096).unwrap();
        let dec = spectral_decompose(&assemble_sublaplacian(&g, 32.0).unwrap()).unwrap();
        let spec = oscillating_multiplier(1.0, 2.0).unwrap();
        for j in 2..6 {
            let sp = spatial_pieces(&g, &dec, &spec, j).unwrap();
            let total = sp.block_up_to(f64::INFINITY);
            for (a, b) in total.iter().zip(&sp.full) {
                assert!((a - b).norm() <= 1e-14);
            }
            for p in &sp.pieces {
                let (lo, hi) = piece_annulus(2.0, sp.shift, p.l);
                for a in 1..g.size() {
                    let r = dec.physical(g.norm(a));
                    if r < lo || r > hi {
                        assert_eq!(p.kernel[a], C64::new(0.0, 0.0));
                    }
                }
            }
        }
        assert!(spatial_pieces(&g, &dec, &spec, -1).is_err());
    }

    #[test]
    fn dense_matrix_matches_convolution() {
        let g = build_group(ModelKind::Heisenberg { n: 3 }, 4096).unwrap();
        let k: Vec<C64> = (0..g.size()).map(|a| C64::new(a as f64, -(a as f64) * 0.5)).collect();
        let f: Vec<C64> = (0..g.size()).map(|a| C64::new((a as f64).cos(), 0.0)).collect();
        let m = kernel_matrix(&g, &k);
        let n = g.size();
        let conv = g.convolve(&f, &k);
        for x in 0..n {
            let v: C64 = (0..n).map(|y| m[x * n + y] * f[y]).sum();
            assert!((v - conv[x]).norm() < 1e-9);
        }
    }
}
