//! Averages, sparse families and sparse forms, the scale-indexed cube
//! collections of the domination argument, and the admissible exponent regions.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use super::grid::GridFamily;
use crate::error::{Error, Result};
use crate::multipliers::MultiplierSpec;
use crate::C64;

/// `(|R|^{-1} sum_{x in R} |f(x)|^p)^{1/p}`; `p = inf` gives the maximum.
pub fn average(f: &[C64], set: &[usize], p: f64) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::InvalidParameter("average over an empty set".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("average exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(set.iter().map(|&x| f[x].norm()).fold(0.0, f64::max));
    }
    let sum: f64 = set.iter().map(|&x| f[x].norm().powf(p)).sum();
    Ok((sum / set.len() as f64).powf(1.0 / p))
}

/// Conjugate exponent, with `1' = inf` and `inf' = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SparseMember {
    /// Sorted points of the cube.
    pub points: Vec<usize>,
    /// Sorted designated subset.
    pub exclusive: Vec<usize>,
    /// Total collection weight carried by this member, absorbed cubes included.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct SparseFamily {
    pub members: Vec<SparseMember>,
    /// Sparseness target used to build the family.
    pub target: f64,
    /// Constant by which the family's form dominates the weighted collection form.
    pub constant: f64,
    /// Number of input cubes that were absorbed into larger members.
    pub absorbed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCheck {
    /// `min |E_R| / |R|`.
    pub eta: f64,
    pub disjoint: bool,
    /// First point found in two designated subsets.
    pub witness: Option<usize>,
    pub subsets_inside: bool,
}

impl SparseCheck {
    pub fn passed(&self, eta: f64) -> bool {
        self.eta >= eta && self.disjoint && self.subsets_inside
    }
}

impl SparseFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn eta(&self) -> f64 {
        self.members.iter().map(|m| m.exclusive.len() as f64 / m.points.len() as f64).fold(1.0, f64::min)
    }

    /// Exact check of the sparseness ratio and disjointness of the designated subsets.
    pub fn verify(&self, n: usize) -> SparseCheck {
        let mut owner = vec![false; n];
        let mut witness = None;
        let mut inside = true;
        for m in &self.members {
            for &x in &m.exclusive {
                if owner[x] && witness.is_none() {
                    witness = Some(x);
                }
                owner[x] = true;
                inside &= m.points.binary_search(&x).is_ok();
            }
        }
        SparseCheck { eta: self.eta(), disjoint: witness.is_none(), witness, subsets_inside: inside }
    }
}

/// `Lambda(f, g) = sum_R |R| <f>_{r1,R} <g>_{r2p,R}`.
pub fn sparse_form(family: &SparseFamily, f: &[C64], g: &[C64], r1: f64, r2p: f64) -> Result<f64> {
    if !(r1 >= 1.0 && r2p >= 1.0) {
        return Err(Error::InvalidParameter(format!("sparse form exponents must be >= 1 (got {r1}, {r2p})")));
    }
    let mut total = 0.0;
    for m in &family.members {
        total += m.points.len() as f64 * average(f, &m.points, r1)? * average(g, &m.points, r2p)?;
    }
    Ok(total)
}

/// Sum of the forms of several families.
pub fn sparse_form_sum(families: &[SparseFamily], f: &[C64], g: &[C64], r1: f64, r2p: f64) -> Result<f64> {
    families.iter().map(|s| sparse_form(s, f, g, r1, r2p)).sum()
}

/// Converts a nested-or-disjoint collection of weighted sets into a sparse family.
///
/// Sets are processed from largest to smallest. A set is kept when at least
/// `ceil(target |R|)` of its points are unclaimed; its designated subset is the
/// unclaimed part not covered by any later set, topped up with the least covered
/// unclaimed points. Other sets are absorbed into their smallest kept superset,
/// which costs the factor `(|P| / |R|)^{gap}`.
pub fn sparsify_sets(n: usize, sets: &[(Vec<usize>, f64)], target: f64, gap: f64) -> Result<SparseFamily> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter(format!("sparseness target must lie in (0, 1], got {target}")));
    }
    // merge identical point sets
    let mut merged: Vec<(Vec<usize>, f64)> = Vec::new();
    {
        let mut sorted: Vec<(Vec<usize>, f64)> = sets
            .iter()
            .map(|(p, w)| {
                let mut p = p.clone();
                p.sort_unstable();
                p.dedup();
                (p, *w)
            })
            .filter(|(p, _)| !p.is_empty())
            .collect();
        sorted.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        for (p, w) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += w,
                _ => merged.push((p, w)),
            }
        }
    }
    let mut cover = vec![0u32; n];
    for (p, _) in &merged {
        p.iter().for_each(|&x| cover[x] += 1);
    }
    let mut claimed = vec![false; n];
    let mut members: Vec<SparseMember> = Vec::new();
    let mut rejected: Vec<usize> = Vec::new();
    for (i, (points, _)) in merged.iter().enumerate() {
        points.iter().for_each(|&x| cover[x] -= 1);
        let need = (target * points.len() as f64 - 1e-9).ceil() as usize;
        let mut avail: Vec<usize> = points.iter().copied().filter(|&x| !claimed[x]).collect();
        if avail.len() < need.max(1) {
            rejected.push(i);
            continue;
        }
        let mut exclusive: Vec<usize> = avail.iter().copied().filter(|&x| cover[x] == 0).collect();
        if exclusive.len() < need {
            avail.retain(|&x| cover[x] > 0);
            avail.sort_by_key(|&x| (cover[x], x));
            exclusive.extend(avail.into_iter().take(need - exclusive.len()));
            exclusive.sort_unstable();
        }
        exclusive.iter().for_each(|&x| claimed[x] = true);
        members.push(SparseMember { points: points.clone(), exclusive, weight: merged[i].1 });
    }
    // absorb rejected sets into their smallest kept superset
    let own: Vec<f64> = members.iter().map(|m| m.weight).collect();
    let mut extra = vec![0.0; members.len()];
    for &i in &rejected {
        let (points, w) = &merged[i];
        let host = members
            .iter()
            .enumerate()
            .filter(|(_, m)| points.iter().all(|x| m.points.binary_search(x).is_ok()))
            .min_by_key(|(_, m)| m.points.len())
            .map(|(h, _)| h);
        let Some(h) = host else {
            return Err(Error::Diagnostic(format!(
                "a set of {} points has no kept superset; the input is not nested",
                points.len()
            )));
        };
        let ratio = members[h].points.len() as f64 / points.len() as f64;
        extra[h] += w * ratio.powf(gap);
        members[h].weight += w;
    }
    let constant = own.iter().zip(&extra).map(|(w, e)| w + e).fold(0.0, f64::max);
    Ok(SparseFamily { members, target, constant, absorbed: rejected.len() })
}

/// Which part of the scale ladder a collection cube serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// The pieces `l <= |j| epsilon`, grouped at one level.
    Small,
    /// A single piece `l > |j| epsilon`.
    Large(i32),
}

#[derive(Debug, Clone)]
pub struct TaggedCube {
    pub grid: usize,
    pub level: i32,
    pub index: usize,
    pub j: i32,
    pub block: Block,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct CubeCollection {
    pub cubes: Vec<TaggedCube>,
    /// Number of `(j, block)` levels prescribed.
    pub prescribed: usize,
    /// How many of them fell outside the grid's levels and were clamped.
    pub clamped: usize,
    /// `max_R sum_{P in collection, P subset R} |P| / |R|`, per grid.
    pub packing_constant: f64,
}

impl CubeCollection {
    pub fn clamped_fraction(&self) -> f64 {
        if self.prescribed == 0 {
            0.0
        } else {
            self.clamped as f64 / self.prescribed as f64
        }
    }

    /// More than 30% of prescribed levels were clamped.
    pub fn unreliable(&self) -> bool {
        self.clamped_fraction() > 0.3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Sparse1,
    Sparse2,
    Inadmissible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admissibility {
    pub sparse1: bool,
    pub sparse2: bool,
}

impl Admissibility {
    pub fn region(&self) -> Region {
        if self.sparse1 {
            Region::Sparse1
        } else if self.sparse2 {
            Region::Sparse2
        } else {
            Region::Inadmissible
        }
    }
}

/// Simplest rational that rounds to `x`, falling back to the exact binary value.
fn to_rational(x: f64) -> Result<BigRational> {
    if let Some(r) = Ratio::<i64>::approximate_float(x) {
        if *r.numer() as f64 / *r.denom() as f64 == x {
            return Ok(BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())));
        }
    }
    BigRational::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not a finite number")))
}

/// `1/r` as an exact rational, with `1/inf = 0`.
fn reciprocal(r: f64) -> Result<BigRational> {
    if r.is_infinite() && r > 0.0 {
        return Ok(BigRational::zero());
    }
    Ok(to_rational(r)?.recip())
}

/// Exact evaluation of both admissible regions.
///
/// `sparse1`: `1 <= r1 <= r2 <= 2` and `1/r1 - 1/2 < beta / 2Q`;
/// `sparse2`: `1 <= r1 <= 2 <= r2 <= r1'` and `1/r1 - 1/r2 < beta / 2Q`.
/// Finite inputs are read as the simplest rational that rounds to them.
pub fn admissible_region(q: f64, beta: f64, r1: f64, r2: f64) -> Result<Admissibility> {
    if !(r1 >= 1.0 && r2 >= 1.0) || r1.is_infinite() {
        return Err(Error::InvalidParameter(format!("exponents must satisfy 1 <= r1 < inf, r2 >= 1 (got {r1}, {r2})")));
    }
    let one = BigRational::one();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let inv1 = reciprocal(r1)?;
    let inv2 = reciprocal(r2)?;
    let bound = to_rational(beta)? / (to_rational(q)? * BigRational::from_integer(BigInt::from(2)));
    let inv1_conj = &one - &inv1;
    let sparse1 = inv1 <= one && inv2 <= inv1 && inv2 >= half && (&inv1 - &half) < bound;
    let sparse2 = inv1 <= one && inv1 >= half && inv2 <= half && inv2 >= inv1_conj && (&inv1 - &inv2) < bound;
    Ok(Admissibility { sparse1, sparse2 })
}

/// Exponent, in powers of `nu`, of the geometric factor attached to a block.
///
/// For `theta < 0` the formulas are evaluated at `|j|` and `|theta|`.
pub fn block_exponent(spec: &MultiplierSpec, q: f64, r1: f64, r2: f64, region: Region, j: i32, block: Block) -> f64 {
    let jj = j.unsigned_abs() as f64;
    let th = spec.theta().abs();
    let beta = spec.beta();
    let gap = 1.0 / r1 - 1.0 / r2;
    let eps = spec.epsilon();
    let slack = spec.slack();
    match block {
        Block::Small => match region {
            Region::Sparse2 => jj * (th * q * gap - th * beta / 2.0 + slack * q),
            _ => {
                let tail = 2.0 / r2 - 1.0;
                jj * (th * q * gap - th * beta / 2.0 + th * q / 2.0 * tail + slack * tail + eps * q * gap)
            }
        },
        Block::Large(l) => {
            let decay = q + th * beta / 2.0;
            jj * q * (th * gap - decay) + q * l as f64 * (gap - decay)
        }
    }
}

/// Grid level of a block at scale `j`: `floor(j (1 - theta) - |j| eps - shift)` for
/// the small block and `floor(j (1 - theta) - l - shift)` for piece `l`, where
/// `shift = log_nu s0` converts physical to lattice scales.
pub fn block_level(spec: &MultiplierSpec, s0: f64, j: i32, block: Block) -> i32 {
    let lattice = s0.ln() / spec.nu().ln();
    let base = j as f64 * (1.0 - spec.theta()) - lattice;
    let x = match block {
        Block::Small => base - j.unsigned_abs() as f64 * spec.epsilon(),
        Block::Large(l) => base - l as f64,
    };
    (x + 1e-9).floor() as i32
}

/// Largest piece index whose annulus meets the physical radii of the model.
fn top_piece(spec: &MultiplierSpec, physical_diameter: f64, j: i32) -> i32 {
    let shift = j as f64 * (1.0 - spec.theta());
    (physical_diameter.ln() / spec.nu().ln() + shift).ceil() as i32 + 1
}

/// All cubes at the levels the domination argument assigns to each `j`, across
/// all grids, tagged with the block's geometric factor.
///
/// The grids' scale `mu` must equal `1 / nu`.
#[allow(clippy::too_many_arguments)]
pub fn proof_scale_collection(
    spec: &MultiplierSpec,
    family: &GridFamily,
    js: &[i32],
    s0: f64,
    q: f64,
    physical_diameter: f64,
    r1: f64,
    r2: f64,
) -> Result<CubeCollection> {
    let first = family.grids.first().ok_or_else(|| Error::Grid("empty grid family".into()))?;
    if (first.mu() * spec.nu() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("grid scale {} is not 1/nu = {}", first.mu(), 1.0 / spec.nu())));
    }
    let region = admissible_region(q, spec.beta(), r1, r2)?.region();
    let mut cubes = Vec::new();
    let mut prescribed = 0;
    let mut clamped = 0;
    for &j in js.iter().filter(|&&j| spec.valid_index(j)) {
        let cut = j.unsigned_abs() as f64 * spec.epsilon();
        let first_large = (cut + 1e-9).floor() as i32 + 1;
        let blocks = std::iter::once(Block::Small)
            .chain((first_large..=top_piece(spec, physical_diameter, j)).map(Block::Large));
        for block in blocks {
            let k = block_level(spec, s0, j, block);
            prescribed += 1;
            let kk = k.clamp(first.k_min(), first.k_max());
            if kk != k {
                clamped += 1;
            }
            let weight = spec.nu().powf(block_exponent(spec, q, r1, r2, region, j, block));
            for (gi, grid) in family.grids.iter().enumerate() {
                for index in 0..grid.level(kk).len() {
                    cubes.push(TaggedCube { grid: gi, level: kk, index, j, block, weight });
                }
            }
        }
    }
    if cubes.is_empty() {
        return Err(Error::Grid("no cubes prescribed for the given scales".into()));
    }
    let packing_constant = packing(family, &cubes);
    Ok(CubeCollection { cubes, prescribed, clamped, packing_constant })
}

/// Carleson packing constant of a multiset of cubes, computed per grid.
fn packing(family: &GridFamily, cubes: &[TaggedCube]) -> f64 {
    let mut worst: f64 = 0.0;
    for (gi, grid) in family.grids.iter().enumerate() {
        let mut counts: std::collections::BTreeMap<(i32, usize), usize> = Default::default();
        for c in cubes.iter().filter(|c| c.grid == gi) {
            *counts.entry((c.level, c.index)).or_default() += 1;
        }
        let distinct: Vec<(&[usize], usize)> =
            counts.iter().map(|(&(k, i), &m)| (grid.level(k)[i].points.as_slice(), m)).collect();
        for &(outer, _) in &distinct {
            let mass: usize = distinct
                .iter()
                .filter(|(inner, _)| inner.len() <= outer.len() && outer.binary_search(&inner[0]).is_ok())
                .map(|(inner, m)| inner.len() * m)
                .sum();
            worst = worst.max(mass as f64 / outer.len() as f64);
        }
    }
    worst
}

/// One sparse family per grid from a scale collection, with target `1/2`.
pub fn sparsify(
    family: &GridFamily,
    collection: &CubeCollection,
    n: usize,
    r1: f64,
    r2: f64,
) -> Result<Vec<SparseFamily>> {
    let gap = 1.0 / r1 - 1.0 / r2;
    (0..family.grids.len())
        .map(|gi| {
            let grid = &family.grids[gi];
            let sets: Vec<(Vec<usize>, f64)> = collection
                .cubes
                .iter()
                .filter(|c| c.grid == gi)
                .map(|c| (grid.level(c.level)[c.index].points.clone(), c.weight))
                .collect();
            sparsify_sets(n, &sets, 0.5, gap)
        })
        .filter(|r| !matches!(r, Ok(s) if s.is_empty()))
        .collect()
}
