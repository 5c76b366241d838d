//! Finite models of stratified groups.
//!
//! Two families are provided: the torus `Z_n^d` (abelian, one stratum, `Q = d`)
//! and the Heisenberg group over `Z_n` with polarized coordinates
//! `(x, y, z)·(x', y', z') = (x + x', y + y', z + z' + x y')`, whose first
//! stratum is spanned by `X = (1, 0, 0)` and `Y = (0, 1, 0)` and whose
//! homogeneous dimension is `Q = 4`.
//!
//! Points are stored as indices in mixed radix; [`GroupPoint`] is the
//! coordinate view. Counting measure plays the role of Haar measure.

use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default upper bound on `|G|`.
pub const DEFAULT_MAX_SIZE: usize = 4096;

/// Hard ceiling from the 16-bit multiplication table.
const TABLE_LIMIT: usize = 1 << 16;

/// Exhaustive quasi-triangle measurement is used up to this many pairs.
const EXHAUSTIVE_PAIR_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Torus { d: usize, n: usize },
    Heisenberg { n: usize },
}

impl ModelKind {
    /// Parses `torus:D:N` or `heisenberg:N`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| -> Result<usize> {
            p.trim().parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad model size '{p}' in '{s}'")))
        };
        match parts.as_slice() {
            [k, d, n] if k.eq_ignore_ascii_case("torus") => Ok(ModelKind::Torus { d: num(d)?, n: num(n)? }),
            [k, n] if k.eq_ignore_ascii_case("torus") => Ok(ModelKind::Torus { d: 1, n: num(n)? }),
            [k, n] if k.eq_ignore_ascii_case("heisenberg") => Ok(ModelKind::Heisenberg { n: num(n)? }),
            _ => Err(Error::InvalidParameter(format!("unknown model '{s}' (expected torus:D:N or heisenberg:N)"))),
        }
    }

    fn moduli(&self) -> Vec<usize> {
        match *self {
            ModelKind::Torus { d, n } => vec![n; d],
            ModelKind::Heisenberg { n } => vec![n, n, n],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Torus { d, n } => write!(f, "torus:{d}:{n}"),
            ModelKind::Heisenberg { n } => write!(f, "heisenberg:{n}"),
        }
    }
}

/// Coordinates of a group element in canonical residue form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupPoint {
    pub coords: Vec<i64>,
}

/// Measured axiom checks performed at construction.
#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub associativity_samples: usize,
    pub identity_checked: usize,
    pub inverse_checked: usize,
}

#[derive(Debug, Clone)]
pub struct GroupModel {
    kind: ModelKind,
    moduli: Vec<usize>,
    size: usize,
    generators: Vec<usize>,
    homogeneous_dim: usize,
    inverse: Vec<usize>,
    norms: Vec<f64>,
    by_norm: Vec<usize>,
    distinct_norms: Vec<f64>,
    /// `prefix_len[i]` = number of points with norm strictly below `distinct_norms[i]`.
    prefix_len: Vec<usize>,
    diameter: f64,
    min_positive_norm: f64,
    quasi_triangle: f64,
    axioms: AxiomCheck,
    /// `right_table[b * size + x] = x b`, built on first use.
    right_table: OnceLock<Vec<u16>>,
}

/// Builds a model and verifies the group axioms on a seeded random sample.
pub fn build_group(kind: ModelKind, max_size: usize) -> Result<GroupModel> {
    let (dims_ok, n) = match kind {
        ModelKind::Torus { d, n } => (d >= 1, n),
        ModelKind::Heisenberg { n } => (true, n),
    };
    if !dims_ok || n < 2 {
        return Err(Error::InvalidParameter(format!("model {kind} needs n >= 2 and d >= 1")));
    }
    let moduli = kind.moduli();
    let size = moduli.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m)).unwrap_or(usize::MAX);
    if size > max_size.min(TABLE_LIMIT) {
        return Err(Error::SizeLimit { size, limit: max_size.min(TABLE_LIMIT) });
    }
    let homogeneous_dim = match kind {
        ModelKind::Torus { d, .. } => d,
        ModelKind::Heisenberg { .. } => 4,
    };

    let mut g = GroupModel {
        kind,
        moduli,
        size,
        generators: Vec::new(),
        homogeneous_dim,
        inverse: Vec::new(),
        norms: Vec::new(),
        by_norm: Vec::new(),
        distinct_norms: Vec::new(),
        prefix_len: Vec::new(),
        diameter: 0.0,
        min_positive_norm: 0.0,
        quasi_triangle: 0.0,
        axioms: AxiomCheck { associativity_samples: 0, identity_checked: 0, inverse_checked: 0 },
        right_table: OnceLock::new(),
    };

    let generators: Vec<usize> = match kind {
        ModelKind::Torus { d, .. } => (0..d)
            .flat_map(|i| {
                let mut plus = vec![0i64; d];
                plus[i] = 1;
                let mut minus = vec![0i64; d];
                minus[i] = -1;
                [plus, minus]
            })
            .map(|c| g.encode(&c))
            .collect(),
        ModelKind::Heisenberg { .. } => {
            [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]].iter().map(|c| g.encode(c)).collect()
        }
    };
    g.generators = generators;

    g.inverse = (0..size).map(|a| g.inverse_raw(a)).collect();
    // Symmetrized gauge: |a| = max(gauge(a), gauge(a^{-1})).
    let raw: Vec<f64> = (0..size).map(|a| g.raw_gauge(a)).collect();
    g.norms = (0..size).map(|a| raw[a].max(raw[g.inverse[a]])).collect();

    let mut by_norm: Vec<usize> = (0..size).collect();
    by_norm.sort_by(|&a, &b| g.norms[a].total_cmp(&g.norms[b]).then(a.cmp(&b)));
    let mut distinct = Vec::new();
    let mut prefix = Vec::new();
    for (pos, &a) in by_norm.iter().enumerate() {
        let v = g.norms[a];
        if distinct.last().is_none_or(|&last: &f64| v > last) {
            distinct.push(v);
            prefix.push(pos);
        }
    }
    g.by_norm = by_norm;
    g.distinct_norms = distinct;
    g.prefix_len = prefix;
    g.diameter = g.norms.iter().cloned().fold(0.0, f64::max);
    g.min_positive_norm = g.norms.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);

    g.axioms = g.check_axioms(0x5eed_0001)?;
    g.quasi_triangle = g.measure_quasi_triangle(0x5eed_0002);
    Ok(g)
}

impl GroupModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn homogeneous_dim(&self) -> usize {
        self.homogeneous_dim
    }

    /// Index of the identity element.
    pub fn identity(&self) -> usize {
        0
    }

    /// First-stratum generators together with their inverses.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest nonzero value of the quasi-norm.
    pub fn min_positive_norm(&self) -> f64 {
        self.min_positive_norm
    }

    /// Measured constant `K` with `|ab| <= K (|a| + |b|)`.
    pub fn quasi_triangle_constant(&self) -> f64 {
        self.quasi_triangle
    }

    pub fn axiom_check(&self) -> &AxiomCheck {
        &self.axioms
    }

    pub fn encode(&self, coords: &[i64]) -> usize {
        let mut idx = 0usize;
        for (&c, &m) in coords.iter().zip(&self.moduli) {
            idx = idx * m + c.rem_euclid(m as i64) as usize;
        }
        idx
    }

    pub fn decode(&self, mut idx: usize) -> GroupPoint {
        let mut coords = vec![0i64; self.moduli.len()];
        for (slot, &m) in coords.iter_mut().zip(&self.moduli).rev() {
            *slot = (idx % m) as i64;
            idx /= m;
        }
        GroupPoint { coords }
    }

    pub fn point(&self, coords: &[i64]) -> GroupPoint {
        self.decode(self.encode(coords))
    }

    pub fn index_of(&self, p: &GroupPoint) -> usize {
        self.encode(&p.coords)
    }

    /// Group product on indices.
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match self.kind {
            ModelKind::Torus { d, n } => {
                if d == 1 {
                    return (a + b) % n;
                }
                let mut idx = 0usize;
                let mut scale = 1usize;
                let (mut a, mut b) = (a, b);
                for _ in 0..d {
                    idx += ((a % n + b % n) % n) * scale;
                    scale *= n;
                    a /= n;
                    b /= n;
                }
                idx
            }
            ModelKind::Heisenberg { n } => {
                let (x1, y1, z1) = (a / (n * n), (a / n) % n, a % n);
                let (x2, y2, z2) = (b / (n * n), (b / n) % n, b % n);
                let x = (x1 + x2) % n;
                let y = (y1 + y2) % n;
                let z = (z1 + z2 + x1 * y2) % n;
                (x * n + y) * n + z
            }
        }
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn group_law(&self, a: &GroupPoint, b: &GroupPoint) -> GroupPoint {
        self.decode(self.mul(self.index_of(a), self.index_of(b)))
    }

    pub fn inverse(&self, a: &GroupPoint) -> GroupPoint {
        self.decode(self.inv(self.index_of(a)))
    }

    /// Quasi-norm of the element with index `a`.
    #[inline]
    pub fn norm(&self, a: usize) -> f64 {
        self.norms[a]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn quasi_norm(&self, a: &GroupPoint) -> f64 {
        self.norm(self.index_of(a))
    }

    /// Left-invariant quasi-distance `|a^{-1} b|`.
    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.norms[self.mul(self.inverse[a], b)]
    }

    /// All points ordered by quasi-norm (ties by index); the identity comes first.
    pub fn points_by_norm(&self) -> &[usize] {
        &self.by_norm
    }

    /// Distinct values taken by the quasi-norm, ascending (starts with 0).
    pub fn distinct_norms(&self) -> &[f64] {
        &self.distinct_norms
    }

    /// Number of points `a` with `|a| < r`.
    pub fn ball_size(&self, r: f64) -> usize {
        self.by_norm.partition_point(|&a| self.norms[a] < r)
    }

    /// Points of the open ball `{x : |center^{-1} x| < r}`.
    pub fn ball(&self, center: usize, r: f64) -> Vec<usize> {
        let len = self.ball_size(r);
        self.by_norm[..len].iter().map(|&b| self.mul(center, b)).collect()
    }

    /// Ball radii that give distinct open balls, each paired with the ball size.
    ///
    /// Radius `distinct_norms[i]` selects exactly the points with norm below it;
    /// the final entry uses a radius above the diameter and gives all of `G`.
    pub fn ball_radii(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> =
            self.distinct_norms.iter().zip(&self.prefix_len).skip(1).map(|(&r, &len)| (r, len)).collect();
        out.push((self.diameter * 1.5 + 1.0, self.size));
        out
    }

    /// `(r, |B(e, r)|)` for every distinct radius up to the diameter.
    pub fn ball_growth(&self) -> Vec<(f64, usize)> {
        self.ball_radii().into_iter().filter(|&(r, _)| r <= self.diameter).collect()
    }

    /// Largest `|B(e, 2r)| / |B(e, r)|` over radii `r <= diam / 4` with nonempty balls.
    pub fn doubling_constant(&self) -> f64 {
        self.ball_radii()
            .iter()
            .filter(|&&(r, _)| r <= self.diameter / 4.0)
            .map(|&(r, len)| self.ball_size(2.0 * r) as f64 / len as f64)
            .fold(1.0, f64::max)
    }

    /// Least-squares slope of `log |B(e, r)|` against `log r` for `r` in
    /// `[r_lo, diam / 4]`.
    pub fn growth_exponent(&self, r_lo: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .ball_radii()
            .into_iter()
            .filter(|&(r, _)| r >= r_lo && r <= self.diameter / 4.0)
            .map(|(r, len)| (r.ln(), (len as f64).ln()))
            .collect();
        crate::linalg::linear_fit(&pts).map(|fit| fit.slope)
    }

    /// Convolution `(f * k)(x) = sum_y f(y) k(y^{-1} x)` with counting measure.
    pub fn convolve(&self, f: &[crate::C64], k: &[crate::C64]) -> Vec<crate::C64> {
        assert_eq!(f.len(), self.size);
        assert_eq!(k.len(), self.size);
        let table = self.right_table();
        let n = self.size;
        let mut out = vec![crate::C64::new(0.0, 0.0); n];
        // (f * k)(x) = sum_a k(a) f(x a^{-1})
        for (a, &ka) in k.iter().enumerate() {
            if ka.re == 0.0 && ka.im == 0.0 {
                continue;
            }
            let b = self.inverse[a];
            let row = &table[b * n..(b + 1) * n];
            for (o, &xb) in out.iter_mut().zip(row) {
                *o += ka * f[xb as usize];
            }
        }
        out
    }

    /// Right multiplication table, `table[b * |G| + x] = x b`.
    pub fn right_table(&self) -> &[u16] {
        self.right_table.get_or_init(|| {
            let n = self.size;
            let mut t = vec![0u16; n * n];
            for b in 0..n {
                for x in 0..n {
                    t[b * n + x] = self.mul(x, b) as u16;
                }
            }
            t
        })
    }

    /// Left translation `(tau_g f)(x) = f(g^{-1} x)`.
    pub fn left_translate<T: Copy>(&self, g: usize, f: &[T]) -> Vec<T> {
        let gi = self.inv(g);
        (0..self.size).map(|x| f[self.mul(gi, x)]).collect()
    }

    fn symmetric_rep(v: i64, m: usize) -> f64 {
        let m = m as i64;
        let r = v.rem_euclid(m);
        (if 2 * r > m { r - m } else { r }) as f64
    }

    fn raw_gauge(&self, a: usize) -> f64 {
        let p = self.decode(a);
        let reps: Vec<f64> = p.coords.iter().zip(&self.moduli).map(|(&c, &m)| Self::symmetric_rep(c, m)).collect();
        match self.kind {
            ModelKind::Torus { .. } => reps.iter().map(|v| v * v).sum::<f64>().sqrt(),
            ModelKind::Heisenberg { .. } => {
                let h = reps[0] * reps[0] + reps[1] * reps[1];
                (h * h + reps[2] * reps[2]).powf(0.25)
            }
        }
    }

    fn inverse_raw(&self, a: usize) -> usize {
        let p = self.decode(a).coords;
        match self.kind {
            ModelKind::Torus { .. } => {
                let neg: Vec<i64> = p.iter().map(|&c| -c).collect();
                self.encode(&neg)
            }
            ModelKind::Heisenberg { .. } => {
                let (x, y, z) = (p[0], p[1], p[2]);
                self.encode(&[-x, -y, -z + x * y])
            }
        }
    }

    fn check_axioms(&self, seed: u64) -> Result<AxiomCheck> {
        let n = self.size;
        let e = self.identity();
        for a in 0..n {
            if self.mul(a, e) != a || self.mul(e, a) != a {
                return Err(Error::GroupAxiom(format!("identity fails at {:?}", self.decode(a).coords)));
            }
            if self.mul(a, self.inv(a)) != e || self.mul(self.inv(a), a) != e {
                return Err(Error::GroupAxiom(format!("inverse fails at {:?}", self.decode(a).coords)));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = 1000;
        for _ in 0..samples {
            let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(Error::GroupAxiom(format!(
                    "associativity fails at {:?}, {:?}, {:?}",
                    self.decode(a).coords,
                    self.decode(b).coords,
                    self.decode(c).coords
                )));
            }
        }
        Ok(AxiomCheck { associativity_samples: samples, identity_checked: n, inverse_checked: n })
    }

    fn measure_quasi_triangle(&self, seed: u64) -> f64 {
        let n = self.size;
        let ratio = |a: usize, b: usize| {
            let denom = self.norms[a] + self.norms[b];
            if denom > 0.0 {
                self.norms[self.mul(a, b)] / denom
            } else {
                0.0
            }
        };
        if n * n <= EXHAUSTIVE_PAIR_LIMIT {
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| ratio(a, b)).fold(0.0, f64::max)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..EXHAUSTIVE_PAIR_LIMIT)
                .map(|_| ratio(rng.random_range(0..n), rng.random_range(0..n)))
                .fold(0.0, f64::max)
        }
    }
}
