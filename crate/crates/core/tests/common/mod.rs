//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use faer::linalg::solvers::Solve;
use faer::{Mat, Scale};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratified_sparse::group::{GroupModel, GroupPoint, ModelKind};
use stratified_sparse::C64;

/// Dense `s0^2 sum_a (I - R_a)` built from coordinates, without the index tables.
pub fn laplacian_from_coordinates(g: &GroupModel, s0: f64) -> Mat<f64> {
    let n = g.size();
    let gens: Vec<Vec<i64>> = match g.kind() {
        ModelKind::Torus { d, .. } => (0..d)
            .flat_map(|i| {
                let mut e = vec![0; d];
                e[i] = 1;
                let mut m = vec![0; d];
                m[i] = -1;
                [e, m]
            })
            .collect(),
        ModelKind::Heisenberg { .. } => vec![vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, -1, 0]],
    };
    let mut l = Mat::<f64>::zeros(n, n);
    for x in 0..n {
        let px = g.decode(x);
        for a in &gens {
            let y = g.index_of(&heisenberg_or_torus_law(g, &px, a));
            l[(x, x)] += s0 * s0;
            l[(x, y)] -= s0 * s0;
        }
    }
    l
}

/// Group law written out from the coordinate formulas.
pub fn heisenberg_or_torus_law(g: &GroupModel, p: &GroupPoint, a: &[i64]) -> GroupPoint {
    let m: Vec<i64> = g.moduli().iter().map(|&v| v as i64).collect();
    let c = &p.coords;
    let coords = match g.kind() {
        ModelKind::Torus { .. } => c.iter().zip(a).zip(&m).map(|((x, y), n)| (x + y).rem_euclid(*n)).collect(),
        ModelKind::Heisenberg { .. } => vec![
            (c[0] + a[0]).rem_euclid(m[0]),
            (c[1] + a[1]).rem_euclid(m[1]),
            (c[2] + a[2] + c[0] * a[1]).rem_euclid(m[2]),
        ],
    };
    GroupPoint { coords }
}

fn one_norm(a: &Mat<f64>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &Mat<f64>) -> Mat<f64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * Scale(0.5f64.powi(s));
    let id = Mat::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * Scale(B[13]) + &a4 * Scale(B[11]) + &a2 * Scale(B[9]))
        + &a6 * Scale(B[7])
        + &a4 * Scale(B[5])
        + &a2 * Scale(B[3])
        + &id * Scale(B[1]);
    let u = &a * &u_inner;
    let v = &a6 * (&a6 * Scale(B[12]) + &a4 * Scale(B[10]) + &a2 * Scale(B[8]))
        + &a6 * Scale(B[6])
        + &a4 * Scale(B[4])
        + &a2 * Scale(B[2])
        + &id * Scale(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

pub fn mat_apply(a: &Mat<f64>, f: &[C64]) -> Vec<C64> {
    let n = a.nrows();
    (0..n).map(|i| (0..n).map(|j| f[j] * a[(i, j)]).sum()).collect()
}

pub fn random_function(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))).collect()
}

pub fn l2(f: &[C64]) -> f64 {
    f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn l2_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Breadth-first search over the generating set; returns the number of reached points.
pub fn reachable(g: &GroupModel) -> usize {
    let mut seen = vec![false; g.size()];
    let mut queue = std::collections::VecDeque::from([g.identity()]);
    seen[g.identity()] = true;
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for &a in g.generators() {
            let y = g.mul(x, a);
            if !seen[y] {
                seen[y] = true;
                count += 1;
                queue.push_back(y);
            }
        }
    }
    count
}

/// `(f * K)(x) = sum_y f(y) K(y^{-1} x)` by direct summation.
pub fn naive_convolve(g: &GroupModel, f: &[C64], k: &[C64]) -> Vec<C64> {
    let n = g.size();
    (0..n).map(|x| (0..n).map(|y| f[y] * k[g.mul(g.inv(y), x)]).sum()).collect()
}

/// Every distinct ball `B(z, r)` as a point list, by brute-force distance tests.
pub fn all_balls(g: &GroupModel) -> Vec<Vec<usize>> {
    let n = g.size();
    let mut out = Vec::new();
    for z in 0..n {
        for &r in g.distinct_norms() {
            out.push((0..n).filter(|&x| g.dist(z, x) <= r).collect());
        }
    }
    out
}

/// `sup_B <w>_B <w^{1 - p'}>_B^{p - 1}` over every ball.
pub fn brute_ap(g: &GroupModel, w: &[f64], p: f64) -> f64 {
    all_balls(g)
        .iter()
        .map(|b| {
            let m = b.len() as f64;
            let avg: f64 = b.iter().map(|&x| w[x]).sum::<f64>() / m;
            let dual: f64 = b.iter().map(|&x| w[x].powf(-1.0 / (p - 1.0))).sum::<f64>() / m;
            avg * dual.powf(p - 1.0)
        })
        .fold(0.0, f64::max)
}

/// `sup_B <w^q>_B^{1/q} / <w>_B` over every ball.
pub fn brute_rh(g: &GroupModel, w: &[f64], q: f64) -> f64 {
    all_balls(g)
        .iter()
        .map(|b| {
            let m = b.len() as f64;
            let avg: f64 = b.iter().map(|&x| w[x]).sum::<f64>() / m;
            let high: f64 = b.iter().map(|&x| w[x].powf(q)).sum::<f64>() / m;
            high.powf(1.0 / q) / avg
        })
        .fold(0.0, f64::max)
}
