//! Random-trial comparison of `|<T f, g>|` with sparse forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grid::GridFamily;
use super::sparse::{
    admissible_region, conjugate, proof_scale_collection, sparse_form_sum, sparsify, CubeCollection, Region,
    SparseFamily,
};
use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::linalg::{inner, median};
use crate::multipliers::MultiplierSpec;
use crate::spectral::SpectralDecomposition;
use crate::C64;

/// Random function with i.i.d. uniform `[-1, 1]` values on a random ball of
/// radius at most `diam / 4`, zero elsewhere.
pub fn random_ball_function(g: &GroupModel, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let radii: Vec<f64> = g.distinct_norms().iter().copied().filter(|&r| r > 0.0 && r <= g.diameter() / 4.0).collect();
    let center = rng.random_range(0..g.size());
    let r = if radii.is_empty() { g.diameter() } else { radii[rng.random_range(0..radii.len())] };
    let mut f = vec![C64::new(0.0, 0.0); g.size()];
    for x in g.ball(center, r) {
        f[x] = C64::new(rng.random_range(-1.0..=1.0), 0.0);
    }
    f
}

#[derive(Debug, Clone)]
pub struct TrialRow {
    pub trial: usize,
    pub inner_product: f64,
    pub sparse_form: f64,
    pub ratio: f64,
    /// `|<T* g, f>| / Lambda'(g, f)` with the dual exponents.
    pub dual_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct DominationStats {
    pub rows: Vec<TrialRow>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub region: Region,
    /// Set when `(r1, r2)` is outside both admissible regions.
    pub diagnostic: bool,
    /// Largest relative gap between the primal and dual ratios.
    pub dual_gap: f64,
    pub packing_constant: f64,
    pub clamped_fraction: f64,
    pub unreliable: bool,
    pub families: usize,
    pub members: usize,
    /// Largest domination constant over the sparse families.
    pub constant: f64,
    /// Smallest verified sparseness over the families.
    pub min_eta: f64,
}

#[derive(Debug, Clone)]
pub struct DominationSetup {
    pub collection: CubeCollection,
    pub families: Vec<SparseFamily>,
}

/// Valid piece indices whose support meets the spectrum.
pub fn spectral_indices(dec: &SpectralDecomposition, spec: &MultiplierSpec) -> Vec<i32> {
    let freqs = dec.frequencies();
    let lo = freqs.iter().copied().filter(|&l| l > 0.0).fold(f64::INFINITY, f64::min);
    let hi = freqs.iter().copied().fold(0.0, f64::max);
    if !lo.is_finite() {
        return Vec::new();
    }
    spec.piece_indices(lo, hi)
        .into_iter()
        .filter(|&j| {
            let (a, b) = spec.piece_support(j);
            freqs.iter().any(|&l| l > a && l < b)
        })
        .collect()
}

pub fn domination_setup(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    spec: &MultiplierSpec,
    family: &GridFamily,
    r1: f64,
    r2: f64,
) -> Result<DominationSetup> {
    let js = spectral_indices(dec, spec);
    let q = g.homogeneous_dim() as f64;
    let collection = proof_scale_collection(spec, family, &js, dec.s0(), q, dec.physical(g.diameter()), r1, r2)?;
    let families = sparsify(family, &collection, g.size(), r1, r2)?;
    for (i, s) in families.iter().enumerate() {
        let check = s.verify(g.size());
        if !check.passed(0.5) {
            return Err(Error::Diagnostic(format!("sparse family {i} fails the sparseness check: {check:?}")));
        }
    }
    Ok(DominationSetup { collection, families })
}

/// Ratios `|<m(sqrt L) f, g>| / Lambda_{S, r1, r2'}(f, g)` over seeded random pairs.
#[allow(clippy::too_many_arguments)]
pub fn domination_experiment(
    g: &GroupModel,
    dec: &SpectralDecomposition,
    spec: &MultiplierSpec,
    family: &GridFamily,
    r1: f64,
    r2: f64,
    trials: usize,
    seed: u64,
) -> Result<DominationStats> {
    let region = admissible_region(g.homogeneous_dim() as f64, spec.beta(), r1, r2)?.region();
    let setup = domination_setup(g, dec, spec, family, r1, r2)?;
    let values = dec.multiplier_values(|lam| spec.eval(lam))?;
    let adjoint: Vec<C64> = values.iter().map(|v| v.conj()).collect();
    let r2p = conjugate(r2);
    let rows: Vec<TrialRow> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialRow> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
            let f = random_ball_function(g, &mut rng);
            let h = random_ball_function(g, &mut rng);
            let tf = dec.apply_values(&values, &f);
            let inner_product = inner(&tf, &h).norm();
            let form = sparse_form_sum(&setup.families, &f, &h, r1, r2p)?;
            let dual_inner = inner(&dec.apply_values(&adjoint, &h), &f).norm();
            let dual_form = sparse_form_sum(&setup.families, &h, &f, r2p, r1)?;
            if form == 0.0 && inner_product > 0.0 {
                return Err(Error::Diagnostic(format!(
                    "trial {trial}: sparse form vanishes but <Tf, g> = {inner_product}"
                )));
            }
            let ratio = if form > 0.0 { inner_product / form } else { 0.0 };
            let dual_ratio = if dual_form > 0.0 { dual_inner / dual_form } else { 0.0 };
            Ok(TrialRow { trial, inner_product, sparse_form: form, ratio, dual_ratio })
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let dual_gap = rows
        .iter()
        .map(|r| {
            let scale = r.ratio.abs().max(r.dual_ratio.abs());
            if scale == 0.0 {
                0.0
            } else {
                (r.ratio - r.dual_ratio).abs() / scale
            }
        })
        .fold(0.0, f64::max);
    Ok(DominationStats {
        max_ratio,
        median_ratio: if ratios.is_empty() { 0.0 } else { median(&ratios) },
        rows,
        region,
        diagnostic: region == Region::Inadmissible,
        dual_gap,
        packing_constant: setup.collection.packing_constant,
        clamped_fraction: setup.collection.clamped_fraction(),
        unreliable: setup.collection.unreliable(),
        families: setup.families.len(),
        members: setup.families.iter().map(|s| s.len()).sum(),
        constant: setup.families.iter().map(|s| s.constant).fold(0.0, f64::max),
        min_eta: setup.families.iter().map(|s| s.eta()).fold(1.0, f64::min),
    })
}
