//! Nested dyadic partitions of a finite quasi-metric group and families of them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::GroupModel;

#[derive(Debug, Clone)]
pub struct Cube {
    pub level: i32,
    pub center: usize,
    /// Sorted member points.
    pub points: Vec<usize>,
    /// Index of the containing cube one level up.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DyadicGrid {
    mu: f64,
    k_min: i32,
    k_max: i32,
    root: usize,
    seed: u64,
    levels: Vec<Vec<Cube>>,
    /// `cell_of[level - k_min][x]` = index of the cube holding `x`.
    cell_of: Vec<Vec<u32>>,
    c_inner: f64,
    c_outer: f64,
}

/// Coarsest level `k` with `mu^k >= diam` and finest level with `mu^k < h0`.
pub fn level_range(g: &GroupModel, mu: f64) -> (i32, i32) {
    let ln_mu = mu.ln();
    let k_min = (g.diameter().ln() / ln_mu).floor() as i32;
    let mut k_max = (g.min_positive_norm().ln() / ln_mu).floor() as i32;
    while mu.powi(k_max) >= g.min_positive_norm() {
        k_max += 1;
    }
    (k_min, k_max)
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!("mu must lie in (0, 1), got {mu}")));
    }
    Ok(())
}

/// Builds one grid from nested maximal nets rooted at `root`.
///
/// Net points are added greedily in a seeded random order; cells are refined top
/// down, each point joining the nearest child center inside its parent cell
/// (ties by lowest index).
pub fn build_grid(g: &GroupModel, mu: f64, root: usize, seed: u64) -> Result<DyadicGrid> {
    check_mu(mu)?;
    let n = g.size();
    let (k_min, k_max) = level_range(g, mu);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).filter(|&x| x != root).collect();
    order.shuffle(&mut rng);

    let mut levels: Vec<Vec<Cube>> = Vec::new();
    let mut cell_of: Vec<Vec<u32>> = Vec::new();
    let mut net = vec![root];
    levels.push(vec![Cube { level: k_min, center: root, points: (0..n).collect(), parent: None }]);
    cell_of.push(vec![0; n]);

    for k in k_min + 1..=k_max {
        let radius = mu.powi(k);
        let mut covered = vec![false; n];
        let closed_ball = |z: usize, covered: &mut [bool]| {
            for &b in g.points_by_norm() {
                if g.norm(b) > radius {
                    break;
                }
                covered[g.mul(z, b)] = true;
            }
        };
        for &z in &net {
            closed_ball(z, &mut covered);
        }
        for &x in &order {
            if !covered[x] {
                net.push(x);
                closed_ball(x, &mut covered);
            }
        }
        let is_center: Vec<bool> = {
            let mut v = vec![false; n];
            net.iter().for_each(|&z| v[z] = true);
            v
        };
        let parents = levels.last().unwrap();
        let mut cubes: Vec<Cube> = Vec::new();
        let mut cells = vec![u32::MAX; n];
        for (pi, parent) in parents.iter().enumerate() {
            let centers: Vec<usize> = parent.points.iter().copied().filter(|&x| is_center[x]).collect();
            let base = cubes.len();
            for &c in &centers {
                cubes.push(Cube { level: k, center: c, points: Vec::new(), parent: Some(pi) });
            }
            for &x in &parent.points {
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (ci, &c) in centers.iter().enumerate() {
                    let d = g.dist(c, x);
                    if d < best_d || (d == best_d && c < centers[best]) {
                        best = ci;
                        best_d = d;
                    }
                }
                cubes[base + best].points.push(x);
                cells[x] = (base + best) as u32;
            }
        }
        levels.push(cubes);
        cell_of.push(cells);
    }

    let mut grid = DyadicGrid { mu, k_min, k_max, root, seed, levels, cell_of, c_inner: 0.0, c_outer: 0.0 };
    grid.fit_constants(g);
    Ok(grid)
}

impl DyadicGrid {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Inner sandwich constant `c1`.
    pub fn c_inner(&self) -> f64 {
        self.c_inner
    }

    /// Outer sandwich constant `C1`.
    pub fn c_outer(&self) -> f64 {
        self.c_outer
    }

    pub fn level(&self, k: i32) -> &[Cube] {
        &self.levels[(k - self.k_min) as usize]
    }

    pub fn cell_of(&self, k: i32, x: usize) -> usize {
        self.cell_of[(k - self.k_min) as usize][x] as usize
    }

    pub fn levels(&self) -> impl Iterator<Item = (i32, &[Cube])> {
        self.levels.iter().enumerate().map(move |(i, c)| (self.k_min + i as i32, c.as_slice()))
    }

    /// Moves `x` into cube `to` at level `k`, breaking the partition structure.
    ///
    /// Used to build negative controls for the axiom checks.
    pub fn move_point(&mut self, k: i32, x: usize, to: usize) {
        let li = (k - self.k_min) as usize;
        let from = self.cell_of[li][x] as usize;
        self.levels[li][from].points.retain(|&p| p != x);
        let pts = &mut self.levels[li][to].points;
        pts.push(x);
        pts.sort_unstable();
        self.cell_of[li][x] = to as u32;
    }

    fn fit_constants(&mut self, g: &GroupModel) {
        let mu = self.mu;
        let mut c_inner = f64::INFINITY;
        let mut c_outer: f64 = 0.0;
        for (k, cubes) in self.levels() {
            let scale = mu.powi(k);
            for cube in cubes {
                let (inner, outer) = cube_radii(g, cube);
                if inner.is_finite() {
                    c_inner = c_inner.min(inner / scale);
                }
                c_outer = c_outer.max(outer / scale);
            }
        }
        self.c_inner = if c_inner.is_finite() { c_inner * (1.0 - 1e-12) } else { 1.0 };
        self.c_outer = (c_outer * (1.0 + 1e-9)).max(self.c_inner);
        while !self.dilated_balls_nest(g).is_empty() {
            self.c_outer *= 1.25;
        }
    }

    fn dilated_balls_nest(&self, g: &GroupModel) -> Vec<String> {
        let mut bad = Vec::new();
        for (k, cubes) in self.levels().skip(1) {
            for cube in cubes {
                let r_small = self.c_outer * self.mu.powi(k);
                let mut ancestor = cube.parent;
                let mut ak = k - 1;
                while let Some(ai) = ancestor {
                    let anc = &self.level(ak)[ai];
                    let r_big = self.c_outer * self.mu.powi(ak);
                    let ok = g.ball(cube.center, r_small).iter().all(|&x| g.dist(anc.center, x) < r_big);
                    if !ok {
                        bad.push(format!(
                            "dilated ball of cube at level {k} centered {} escapes level {ak} cube centered {}",
                            cube.center, anc.center
                        ));
                        return bad;
                    }
                    ancestor = anc.parent;
                    ak -= 1;
                }
            }
        }
        bad
    }

    /// Exhaustive check of the four grid axioms with the stored constants.
    pub fn verify(&self, g: &GroupModel) -> AxiomReport {
        let n = g.size();
        let mut report = AxiomReport::default();
        // cover: every point lies in exactly one cube of each level
        for (k, cubes) in self.levels() {
            let mut count = vec![0u32; n];
            cubes.iter().flat_map(|c| &c.points).for_each(|&x| count[x] += 1);
            if let Some(x) = count.iter().position(|&c| c != 1) {
                report.cover.push(format!("level {k}: point {x} lies in {} cubes", count[x]));
            }
        }
        // nesting: membership computed from the point lists themselves
        let owner: Vec<Vec<u32>> = self
            .levels
            .iter()
            .map(|cubes| {
                let mut o = vec![u32::MAX; n];
                for (i, c) in cubes.iter().enumerate() {
                    c.points.iter().for_each(|&x| o[x] = i as u32);
                }
                o
            })
            .collect();
        for (li, cubes) in self.levels.iter().enumerate() {
            for cube in cubes {
                for (lk, own) in owner.iter().enumerate().take(li) {
                    let first = own[cube.points.first().copied().unwrap_or(0)];
                    if let Some(&x) = cube.points.iter().find(|&&x| own[x] != first) {
                        report.nesting.push(format!(
                            "cube at level {} centered {} meets two cubes of level {} (witness point {x})",
                            self.k_min + li as i32,
                            cube.center,
                            self.k_min + lk as i32
                        ));
                        break;
                    }
                }
            }
        }
        // sandwich
        for (k, cubes) in self.levels() {
            let scale = self.mu.powi(k);
            for cube in cubes {
                let inner_ok =
                    g.ball(cube.center, self.c_inner * scale).iter().all(|x| cube.points.binary_search(x).is_ok());
                let outer_ok = cube.points.iter().all(|&x| g.dist(cube.center, x) < self.c_outer * scale);
                if !inner_ok || !outer_ok {
                    report.sandwich.push(format!("cube at level {k} centered {}", cube.center));
                }
            }
        }
        report.dilated = self.dilated_balls_nest(g);
        report.c_inner = self.c_inner;
        report.c_outer = self.c_outer;
        report
    }

    /// Number of cubes per level.
    pub fn level_counts(&self) -> Vec<(i32, usize)> {
        self.levels().map(|(k, c)| (k, c.len())).collect()
    }
}

/// `(largest r with B(z, r) inside the cube, max distance from z to a member)`.
fn cube_radii(g: &GroupModel, cube: &Cube) -> (f64, f64) {
    let outer = cube.points.iter().map(|&x| g.dist(cube.center, x)).fold(0.0, f64::max);
    let mut inner = f64::INFINITY;
    for &b in g.points_by_norm() {
        let x = g.mul(cube.center, b);
        if cube.points.binary_search(&x).is_err() {
            inner = g.norm(b);
            break;
        }
    }
    (inner, outer)
}

#[derive(Debug, Clone, Default)]
pub struct AxiomReport {
    pub cover: Vec<String>,
    pub nesting: Vec<String>,
    pub sandwich: Vec<String>,
    pub dilated: Vec<String>,
    pub c_inner: f64,
    pub c_outer: f64,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.cover.is_empty() && self.nesting.is_empty() && self.sandwich.is_empty() && self.dilated.is_empty()
    }

    pub fn violations(&self) -> usize {
        self.cover.len() + self.nesting.len() + self.sandwich.len() + self.dilated.len()
    }
}

pub fn verify_grid_axioms(g: &GroupModel, grid: &DyadicGrid) -> AxiomReport {
    grid.verify(g)
}

#[derive(Debug, Clone)]
pub struct GridFamily {
    pub grids: Vec<DyadicGrid>,
    /// Measured covering constant: worst `diam(R) / r` over the best cube of each ball.
    pub covering_constant: f64,
    /// Balls of radius at most `diam / 4` not inside any cube of the prescribed level.
    pub uncovered: Vec<(usize, f64)>,
    pub balls_checked: usize,
}

/// Level `k` with `mu^{k+2} <= r < mu^{k+1}`.
pub fn covering_level(r: f64, mu: f64) -> i32 {
    let x = r.ln() / mu.ln();
    let c = if (x - x.round()).abs() < 1e-12 { x.round() } else { x.ceil() };
    c as i32 - 2
}

/// Diameter of a point set.
pub fn set_diameter(g: &GroupModel, points: &[usize]) -> f64 {
    points.par_iter().map(|&x| points.iter().map(|&y| g.dist(x, y)).fold(0.0, f64::max)).reduce(|| 0.0, f64::max)
}

/// Covering check of every ball `B(z, r)` with `h0 <= r <= diam / 4`.
///
/// Each distinct ball is tested at its smallest admissible radius (the largest
/// norm it contains), which selects the finest required level.
fn covering(g: &GroupModel, grids: &[DyadicGrid]) -> (f64, Vec<(usize, f64)>, usize) {
    let mu = grids[0].mu;
    let radii: Vec<(f64, usize)> = g
        .ball_radii()
        .into_iter()
        .zip(g.distinct_norms())
        .map(|((_, len), &largest)| (largest, len))
        .filter(|&(r, _)| r >= g.min_positive_norm() && r <= g.diameter() / 4.0)
        .collect();
    let by_norm = g.points_by_norm();
    let mut diam_cache: Vec<std::collections::HashMap<(i32, usize), f64>> = vec![Default::default(); grids.len()];
    let results: Vec<(f64, Option<(usize, f64)>)> = (0..g.size())
        .into_par_iter()
        .flat_map_iter(|z| {
            radii.iter().map(move |&(r, len)| {
                let k = covering_level(r, mu);
                let ball: Vec<usize> = by_norm[..len].iter().map(|&b| g.mul(z, b)).collect();
                let mut hits = Vec::new();
                for (gi, grid) in grids.iter().enumerate() {
                    let kk = k.clamp(grid.k_min, grid.k_max);
                    let cell = grid.cell_of(kk, ball[0]);
                    if ball.iter().all(|&x| grid.cell_of(kk, x) == cell) {
                        hits.push((gi, kk, cell));
                    }
                }
                (r, if hits.is_empty() { Some((z, r)) } else { None }, hits)
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(r, miss, hits)| {
            let best = hits
                .iter()
                .map(|&(gi, kk, cell)| {
                    *diam_cache[gi]
                        .entry((kk, cell))
                        .or_insert_with(|| set_diameter(g, &grids[gi].level(kk)[cell].points))
                })
                .fold(f64::INFINITY, f64::min);
            (if best.is_finite() { best / r } else { 0.0 }, miss)
        })
        .collect();
    let checked = results.len();
    let constant = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let uncovered = results.into_iter().filter_map(|r| r.1).collect();
    (constant, uncovered, checked)
}

/// Adds grids until every ball of radius at most `diam / 4` sits in a cube of the
/// prescribed level, each new grid rooted at the center of an uncovered ball.
pub fn build_dyadic_grids(g: &GroupModel, mu: f64, seed: u64) -> Result<GridFamily> {
    build_dyadic_grids_capped(g, mu, seed, 16)
}

pub fn build_dyadic_grids_capped(g: &GroupModel, mu: f64, seed: u64, max_grids: usize) -> Result<GridFamily> {
    check_mu(mu)?;
    let mut grids = vec![build_grid(g, mu, g.identity(), seed)?];
    loop {
        let (constant, uncovered, checked) = covering(g, &grids);
        if uncovered.is_empty() || grids.len() >= max_grids {
            for grid in &grids {
                let rep = grid.verify(g);
                if !rep.passed() {
                    let witness = rep
                        .cover
                        .iter()
                        .chain(&rep.nesting)
                        .chain(&rep.sandwich)
                        .chain(&rep.dilated)
                        .next()
                        .cloned()
                        .unwrap_or_default();
                    return Err(Error::Grid(format!("axiom check failed: {witness}")));
                }
            }
            return Ok(GridFamily { grids, covering_constant: constant, uncovered, balls_checked: checked });
        }
        let root = uncovered[0].0;
        let next_seed = seed.wrapping_add(0x9e37_79b9 * grids.len() as u64);
        grids.push(build_grid(g, mu, root, next_seed)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_group, ModelKind};

    #[test]
    fn covering_level_brackets_radius() {
        for &r in &[0.3, 1.0, 1.5, 2.0, 3.9, 7.0, 8.0] {
            let k = covering_level(r, 0.5);
            assert!(0.5f64.powi(k + 2) <= r && r < 0.5f64.powi(k + 1), "r={r} k={k}");
        }
    }

    #[test]
    fn coarsest_level_is_whole_group() {
        let g = build_group(ModelKind::Torus { d: 1, n: 64 }, 4096).unwrap();
        let grid = build_grid(&g, 0.5, 0, 1).unwrap();
        assert!(0.5f64.powi(grid.k_min()) >= g.diameter());
        assert_eq!(grid.level(grid.k_min()).len(), 1);
        assert_eq!(grid.level(grid.k_min())[0].points.len(), 64);
        assert!(grid.level(grid.k_max()).iter().all(|c| c.points.len() == 1));
    }

    #[test]
    fn fresh_grid_passes_and_moved_point_fails() {
        let g = build_group(ModelKind::Heisenberg { n: 4 }, 4096).unwrap();
        let mut grid = build_grid(&g, 0.5, 0, 7).unwrap();
        let rep = grid.verify(&g);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.c_inner <= rep.c_outer);
        // move a point into a cube with a different parent
        let (k, x, to) = grid
            .levels()
            .skip(1)
            .find_map(|(k, cubes)| {
                let c0 = &cubes[0];
                let other = cubes.iter().position(|c| c.parent != c0.parent)?;
                Some((k, c0.points[0], other))
            })
            .unwrap();
        grid.move_point(k, x, to);
        let rep = grid.verify(&g);
        assert!(!rep.nesting.is_empty());
    }

    #[test]
    fn rejects_bad_mu() {
        let g = build_group(ModelKind::Torus { d: 1, n: 8 }, 4096).unwrap();
        assert!(build_grid(&g, 1.0, 0, 1).is_err());
        assert!(build_dyadic_grids(&g, 0.0, 1).is_err());
    }
}
