//! Suite runners: each builds its model from the config, computes its table(s)
//! and check rows.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::report::{Cell, CheckRow, RunReport, Table};
use crate::dyadic::domination::{domination_experiment, spectral_indices};
use crate::dyadic::grid::build_dyadic_grids;
use crate::dyadic::sparse::Region;
use crate::error::{Error, Result};
use crate::group::{build_group, GroupModel, ModelKind};
use crate::kernel_ops::NormPair;
use crate::multipliers::dispersive::dispersive_apply;
use crate::multipliers::riesz::{riesz_first_order, riesz_multiplier, riesz_values};
use crate::multipliers::spatial::{piece_decay_report, spatial_pieces};
use crate::multipliers::{class_membership_report, MultiplierSpec, CLASS_SPREAD_LIMIT};
use crate::spectral::{
    assemble_sublaplacian, gaussian_decay_report, spectral_decompose, torus_weyl_comparison, SpectralDecomposition,
};
use crate::weights::quantitative::{
    dispersive_thresholds, multiplier_thresholds, quantitative_suite, riesz_thresholds, Mode, Thresholds,
};
use crate::weights::{ap_characteristic, power_weight, rh_characteristic, Weight};
use crate::C64;

pub const SUITES: [&str; 12] = [
    "group",
    "spectrum",
    "heat",
    "spectral",
    "multiplier-check",
    "decay",
    "riesz",
    "dispersive",
    "grids",
    "sparse-check",
    "weights",
    "quantitative",
];

struct Budget {
    start: Instant,
    limit: f64,
    exceeded: bool,
}

impl Budget {
    fn new(limit: f64) -> Self {
        Budget { start: Instant::now(), limit, exceeded: false }
    }

    /// True once the elapsed time passes the limit; latches.
    fn out(&mut self) -> bool {
        if self.start.elapsed().as_secs_f64() > self.limit {
            self.exceeded = true;
        }
        self.exceeded
    }
}

struct Output {
    checks: Vec<CheckRow>,
    tables: Vec<Table>,
}

impl Output {
    fn new() -> Self {
        Output { checks: Vec::new(), tables: Vec::new() }
    }
}

fn model(cfg: &ExperimentConfig) -> Result<GroupModel> {
    build_group(cfg.model, cfg.max_size)
}

fn decomposition(g: &GroupModel, cfg: &ExperimentConfig) -> Result<SpectralDecomposition> {
    spectral_decompose(&assemble_sublaplacian(g, cfg.s0)?)
}

fn multiplier(cfg: &ExperimentConfig) -> Result<MultiplierSpec> {
    Ok(MultiplierSpec::oscillating(cfg.theta, cfg.beta, cfg.nu)?.with_epsilon(cfg.epsilon).with_slack(cfg.slack))
}

/// Complex function with independent uniform `[-1, 1]` parts.
fn random_function(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))).collect()
}

fn l2(f: &[C64]) -> f64 {
    f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn rational_f64(r: num_rational::Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn threshold_rows(out: &mut Output, prefix: &str, th: &Thresholds) {
    let mode = match th.mode {
        Mode::I => 1.0,
        Mode::II => 2.0,
        Mode::III => 3.0,
    };
    out.checks.push(CheckRow::info(format!("{prefix}_mode"), mode));
    if let Some(p) = th.p_low {
        out.checks.push(CheckRow::info(format!("{prefix}_p_low"), rational_f64(p)));
    }
    if let Some(s) = th.s_high {
        out.checks.push(CheckRow::info(format!("{prefix}_s_high"), rational_f64(s)));
    }
}

/// Runs the named suite and collects its report.
pub fn run_experiment(suite: &str, cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut budget = Budget::new(cfg.budget_seconds);
    let out = match suite {
        "group" => group_suite(cfg)?,
        "spectrum" => spectrum_suite(cfg)?,
        "heat" => heat_suite(cfg)?,
        "spectral" => spectral_suite(cfg, &mut budget)?,
        "multiplier-check" => multiplier_check_suite(cfg, &mut budget)?,
        "decay" => decay_suite(cfg)?,
        "riesz" => riesz_suite(cfg)?,
        "dispersive" => dispersive_suite(cfg, &mut budget)?,
        "grids" => grids_suite(cfg)?,
        "sparse-check" => sparse_check_suite(cfg)?,
        "weights" => weights_suite(cfg, &mut budget)?,
        "quantitative" => quantitative_suite_run(cfg)?,
        other => return Err(Error::Config(format!("unknown suite '{other}' (expected one of {})", SUITES.join(", ")))),
    };
    let wall_clock = budget.start.elapsed().as_secs_f64();
    let partial = budget.out();
    let mut checks = out.checks;
    if partial {
        checks.push(CheckRow::at_most("time_budget_seconds", wall_clock, cfg.budget_seconds));
    }
    Ok(RunReport { suite: suite.to_string(), config: cfg.clone(), checks, tables: out.tables, wall_clock, partial })
}

fn group_suite(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let mut out = Output::new();
    let mut t = Table::new("group", &["r", "ball_size"]);
    for (r, size) in g.ball_growth() {
        t.push(vec![r.into(), size.into()]);
    }
    out.tables.push(t);
    let ax = g.axiom_check();
    out.checks.push(CheckRow::info("size", g.size() as f64));
    out.checks.push(CheckRow::info("homogeneous_dimension", g.homogeneous_dim() as f64));
    out.checks.push(CheckRow::info("diameter", g.diameter()));
    out.checks.push(CheckRow::at_least("quasi_triangle_constant", g.quasi_triangle_constant(), 1.0));
    out.checks.push(CheckRow::info("doubling_constant", g.doubling_constant()));
    out.checks.push(CheckRow::info("associativity_samples", ax.associativity_samples as f64));
    out.checks.push(CheckRow::info("identity_checked", ax.identity_checked as f64));
    out.checks.push(CheckRow::info("inverse_checked", ax.inverse_checked as f64));
    Ok(out)
}

fn spectrum_suite(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let mut out = Output::new();
    let mut t = Table::new("spectrum", &["index", "lambda", "sqrt_lambda"]);
    for (i, (&lam, &f)) in dec.eigenvalues().iter().zip(dec.frequencies()).enumerate() {
        t.push(vec![i.into(), lam.into(), f.into()]);
    }
    out.tables.push(t);
    if matches!(g.kind(), ModelKind::Torus { .. }) {
        let mut w = Table::new("spectrum_weyl", &["sqrt_lambda", "count", "continuum"]);
        for (lam, count, cont) in torus_weyl_comparison(&g, &dec, 32) {
            w.push(vec![lam.into(), count.into(), cont.into()]);
        }
        out.tables.push(w);
    }
    let top = dec.eigenvalues().last().copied().unwrap_or(0.0);
    out.checks.push(CheckRow::at_most("reconstruction_error", dec.reconstruction_error(), 1e-8));
    out.checks.push(CheckRow::at_most("orthonormality_error", dec.orthonormality_error(), 1e-10));
    out.checks.push(CheckRow::at_most("ground_state_relative", dec.eigenvalues()[0].abs() / top.max(1e-300), 1e-12));
    out.checks.push(CheckRow::info("top_eigenvalue", top));
    Ok(out)
}

fn heat_suite(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let p = dec.heat_kernel(cfg.heat_t)?;
    let mut out = Output::new();
    let mut t = Table::new("heat", &["x_index", "norm_x", "p_t"]);
    for (x, &v) in p.iter().enumerate() {
        t.push(vec![x.into(), dec.physical(g.norm(x)).into(), v.into()]);
    }
    out.tables.push(t);
    let mass: f64 = p.iter().sum();
    let peak = p.iter().copied().fold(0.0, f64::max);
    let lowest = p.iter().copied().fold(f64::INFINITY, f64::min);
    out.checks.push(CheckRow::at_most("mass_error", (mass - 1.0).abs(), 1e-10));
    out.checks.push(CheckRow::at_least("relative_minimum", lowest / peak, -1e-10));
    match gaussian_decay_report(&g, &dec, &p, cfg.heat_t) {
        Ok(fit) => {
            out.checks.push(CheckRow::info("gaussian_amplitude", fit.amplitude));
            out.checks.push(CheckRow::info("gaussian_spread", fit.spread));
            out.checks.push(CheckRow::info("gaussian_exponent", fit.exponent));
            out.checks.push(CheckRow::info("gaussian_r_squared", fit.r_squared));
        }
        Err(e) => return Err(Error::Diagnostic(format!("gaussian fit: {e}"))),
    }
    Ok(out)
}

fn spectral_suite(cfg: &ExperimentConfig, budget: &mut Budget) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let spec = multiplier(cfg)?;
    let heat_t = cfg.heat_t;
    let mut named: Vec<(String, Vec<C64>)> = vec![
        ("heat".into(), dec.multiplier_values(|l| C64::new((-heat_t * l * l).exp(), 0.0))?),
        ("oscillating".into(), dec.multiplier_values(|l| spec.eval(l))?),
        ("riesz".into(), riesz_values(&dec, cfg.riesz_k, cfg.riesz_alpha, cfg.riesz_t)?),
        ("dispersive".into(), dec.multiplier_values(|l| C64::from_polar(1.0, l.powf(cfg.dispersive_alpha)))?),
    ];
    for j in spectral_indices(&dec, &spec) {
        named.push((format!("piece_{j}"), dec.multiplier_values(|l| spec.piece(j, l))?));
    }
    let mut out = Output::new();
    let mut t = Table::new("spectral", &["multiplier", "plancherel_error"]);
    for (name, values) in &named {
        if budget.out() {
            break;
        }
        let err = dec.plancherel_error(values);
        t.push(vec![name.as_str().into(), err.into()]);
        out.checks.push(CheckRow::at_most(format!("plancherel_{name}"), err, 1e-10));
    }
    out.tables.push(t);
    let f = random_function(g.size(), cfg.seed);
    let h = random_function(g.size(), cfg.seed.wrapping_add(1));
    let heat = &named[0].1;
    let lhs = crate::linalg::inner(&dec.apply_values(heat, &f), &h);
    let rhs = crate::linalg::inner(&f, &dec.apply_values(heat, &h));
    out.checks.push(CheckRow::at_most("self_adjoint_heat", (lhs - rhs).norm() / lhs.norm().max(1e-300), 1e-10));
    Ok(out)
}

fn default_j_range(theta: f64) -> (i32, i32) {
    let reach = ((10.0 / theta.abs()).floor() as i32).max(2);
    if theta > 0.0 {
        (0, reach)
    } else {
        (-reach, 0)
    }
}

fn multiplier_check_suite(cfg: &ExperimentConfig, budget: &mut Budget) -> Result<Output> {
    let spec = multiplier(cfg)?;
    let range = cfg.j_range.unwrap_or_else(|| default_j_range(cfg.theta));
    let report = class_membership_report(&spec, range, cfg.s_max)?;
    let mut out = Output::new();
    let mut cols: Vec<String> = vec!["j".into(), "sup_norm".into(), "cond1".into()];
    cols.extend((0..=cfg.s_max).map(|s| format!("cond2_s{s}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("multiplier_check", &col_refs);
    for row in &report.rows {
        let mut cells: Vec<Cell> = vec![row.j.into(), row.sup_norm.into(), row.cond1.into()];
        cells.extend(row.cond2.iter().map(|&v| Cell::Num(v)));
        t.push(cells);
    }
    out.tables.push(t);
    out.checks.push(CheckRow::at_most("cond1_spread", report.cond1_spread, CLASS_SPREAD_LIMIT));
    for (s, &sp) in report.cond2_spread.iter().enumerate() {
        out.checks.push(CheckRow::at_most(format!("cond2_spread_s{s}"), sp, CLASS_SPREAD_LIMIT));
    }
    // scalar telescoping on 1000 log-spaced frequencies
    let ln_nu = cfg.nu.ln();
    let scalar_err = (0..1000)
        .map(|i| {
            let lam = (ln_nu * (-6.0 + 14.0 * i as f64 / 999.0)).exp();
            (spec.piece_sum(lam) - spec.eval(lam)).norm()
        })
        .fold(0.0, f64::max);
    out.checks.push(CheckRow::at_most("telescoping_scalar", scalar_err, 1e-10));

    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let f = random_function(g.size(), cfg.seed);
    let mut spatial_err: f64 = 0.0;
    for j in spectral_indices(&dec, &spec) {
        if budget.out() {
            break;
        }
        let sp = spatial_pieces(&g, &dec, &spec, j)?;
        let whole = g.convolve(&f, &sp.full);
        let mut sum = vec![C64::new(0.0, 0.0); g.size()];
        for piece in sp.pieces.iter().filter(|p| !p.empty) {
            sum.iter_mut().zip(g.convolve(&f, &piece.kernel)).for_each(|(s, v)| *s += v);
        }
        let scale = whole.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        spatial_err = spatial_err.max(sup_diff(&sum, &whole) / scale);
    }
    out.checks.push(CheckRow::at_most("telescoping_spatial", spatial_err, 1e-10));
    Ok(out)
}

fn decay_suite(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let spec = multiplier(cfg)?;
    let js: Vec<i32> = match cfg.j_range {
        Some((lo, hi)) => (lo..=hi).collect(),
        None => spectral_indices(&dec, &spec),
    };
    let pairs = [NormPair::TwoTwo, NormPair::OneOne, NormPair::OneInf];
    let report = piece_decay_report(&g, &dec, &spec, &js, &pairs)?;
    let mut out = Output::new();
    let mut t =
        Table::new("decay", &["j", "p", "q", "norm_small_l", "worst_large_l", "norm_total", "spectral_sup", "worst_l"]);
    for r in &report.rows {
        let (p, q) = r.pair.exponents();
        t.push(vec![
            r.j.into(),
            p.into(),
            q.into(),
            r.small_block.into(),
            r.worst_large.into(),
            r.total.into(),
            r.spectral_sup.into(),
            r.worst_large_l.map(Cell::from).unwrap_or(Cell::Text(String::new())),
        ]);
    }
    out.tables.push(t);
    out.checks.push(CheckRow::at_least("usable_bands", report.usable.len() as f64, 5.0));
    for fit in &report.fits {
        let name = fit.pair.to_string();
        out.checks.push(CheckRow::info(format!("slope_{name}"), fit.total.slope));
        if let Some(pred) = fit.predicted {
            out.checks.push(CheckRow::info(format!("predicted_slope_{name}"), pred));
            if fit.pair == NormPair::TwoTwo {
                let rel = (fit.total.slope - pred).abs() / pred.abs();
                out.checks.push(CheckRow::at_most("slope_relative_deviation_2-2", rel, 0.15));
            }
        }
    }
    let identity = report
        .rows
        .iter()
        .filter(|r| r.pair == NormPair::TwoTwo && r.spectral_sup > 0.0)
        .map(|r| (r.total - r.spectral_sup).abs() / r.spectral_sup)
        .fold(0.0, f64::max);
    out.checks.push(CheckRow::at_most("two_norm_identity", identity, 1e-6));
    Ok(out)
}

fn riesz_suite(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let (k, alpha, t) = (cfg.riesz_k, cfg.riesz_alpha, cfg.riesz_t);
    let mut freqs: Vec<f64> = dec.frequencies().to_vec();
    freqs.dedup();
    let mut out = Output::new();
    let mut table = Table::new("riesz", &["lambda", "scalar_re", "scalar_im"]);
    let mut closed_err: f64 = 0.0;
    for &lam in &freqs {
        let v = riesz_multiplier(k, alpha, t, lam)?;
        table.push(vec![lam.into(), v.re.into(), v.im.into()]);
        if k == 1.0 {
            let c = riesz_first_order(alpha, t, lam);
            closed_err = closed_err.max((v - c).norm() / c.norm());
        }
    }
    out.tables.push(table);
    if k == 1.0 {
        out.checks.push(CheckRow::at_most("closed_form_relative_error", closed_err, 1e-8));
    }
    let zero = riesz_multiplier(k, alpha, t, 0.0)?;
    out.checks.push(CheckRow::equal("zero_frequency_deviation", (zero - 1.0).norm(), 0.0));
    let values = riesz_values(&dec, k, alpha, t)?;
    out.checks.push(CheckRow::at_most("plancherel_riesz", dec.plancherel_error(&values), 1e-10));
    threshold_rows(&mut out, "riesz", &riesz_thresholds(g.homogeneous_dim() as f64, k)?);
    Ok(out)
}

fn dispersive_suite(cfg: &ExperimentConfig, budget: &mut Budget) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let alpha = cfg.dispersive_alpha;
    let f = random_function(g.size(), cfg.seed);
    let norm_f = l2(&f);
    let mut out = Output::new();
    let mut t = Table::new("dispersive", &["t", "norm"]);
    let mut unitarity: f64 = 0.0;
    let mut identity = 0.0;
    let mut states = Vec::new();
    for &time in &cfg.dispersive_times {
        if budget.out() {
            break;
        }
        let u = dispersive_apply(&dec, alpha, time, &f)?;
        let n = l2(&u);
        t.push(vec![time.into(), n.into()]);
        unitarity = unitarity.max((n - norm_f).abs() / norm_f);
        if time == 0.0 {
            identity = sup_diff(&u, &f);
        }
        states.push((time, u));
    }
    out.tables.push(t);
    out.checks.push(CheckRow::at_most("norm_preservation", unitarity, 1e-10));
    out.checks.push(CheckRow::equal("zero_time_identity", identity, 0.0));
    let mut group_err: f64 = 0.0;
    for (s, us) in states.iter().filter(|(s, _)| *s > 0.0) {
        for (tt, _) in states.iter().filter(|(tt, _)| *tt > 0.0) {
            let composed = dispersive_apply(&dec, alpha, *tt, us)?;
            let direct = dispersive_apply(&dec, alpha, s + tt, &f)?;
            let diff: Vec<C64> = composed.iter().zip(&direct).map(|(a, b)| a - b).collect();
            group_err = group_err.max(l2(&diff) / norm_f);
        }
    }
    out.checks.push(CheckRow::at_most("group_property", group_err, 1e-9));
    let q = g.homogeneous_dim() as f64;
    threshold_rows(&mut out, "dispersive", &dispersive_thresholds(q, alpha, cfg.dispersive_beta)?);
    Ok(out)
}

fn grids_suite(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let family = build_dyadic_grids(&g, cfg.mu, cfg.seed)?;
    let mut out = Output::new();
    let mut t = Table::new("grids", &["grid", "level", "cubes"]);
    for (gi, grid) in family.grids.iter().enumerate() {
        for (k, count) in grid.level_counts() {
            t.push(vec![gi.into(), k.into(), count.into()]);
        }
        let rep = grid.verify(&g);
        out.checks.push(CheckRow::equal(format!("axiom_violations_grid{gi}"), rep.violations() as f64, 0.0));
    }
    out.tables.push(t);
    out.checks.push(CheckRow::equal("uncovered_balls", family.uncovered.len() as f64, 0.0));
    out.checks.push(CheckRow::info("grids", family.grids.len() as f64));
    out.checks.push(CheckRow::info("balls_checked", family.balls_checked as f64));
    out.checks.push(CheckRow::info("covering_constant", family.covering_constant));
    Ok(out)
}

fn sparse_check_suite(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let spec = multiplier(cfg)?;
    let family = build_dyadic_grids(&g, cfg.mu, cfg.seed)?;
    let stats = domination_experiment(&g, &dec, &spec, &family, cfg.r1, cfg.r2, cfg.trials, cfg.seed)?;
    let mut out = Output::new();
    let mut t = Table::new("sparse_check", &["trial", "inner_product", "sparse_form", "ratio", "dual_ratio"]);
    for r in &stats.rows {
        t.push(vec![r.trial.into(), r.inner_product.into(), r.sparse_form.into(), r.ratio.into(), r.dual_ratio.into()]);
    }
    let max_dual = stats.rows.iter().map(|r| r.dual_ratio).fold(0.0, f64::max);
    let blank = || Cell::Text(String::new());
    t.push(vec!["max".into(), blank(), blank(), stats.max_ratio.into(), max_dual.into()]);
    t.push(vec!["median".into(), blank(), blank(), stats.median_ratio.into(), blank()]);
    out.tables.push(t);
    let region = match stats.region {
        Region::Sparse1 => 1.0,
        Region::Sparse2 => 2.0,
        Region::Inadmissible => 0.0,
    };
    out.checks.push(CheckRow::info("admissible_region", region));
    out.checks.push(CheckRow::at_most("max_ratio", stats.max_ratio, f64::MAX));
    out.checks.push(CheckRow::info("median_ratio", stats.median_ratio));
    out.checks.push(CheckRow::at_most("dual_gap", stats.dual_gap, 1e-12));
    out.checks.push(CheckRow::at_least("min_sparseness", stats.min_eta, 0.5));
    out.checks.push(CheckRow::at_most("clamped_fraction", stats.clamped_fraction, 0.3));
    out.checks.push(CheckRow::info("packing_constant", stats.packing_constant));
    out.checks.push(CheckRow::info("grids", family.grids.len() as f64));
    out.checks.push(CheckRow::info("families", stats.families as f64));
    out.checks.push(CheckRow::info("members", stats.members as f64));
    out.checks.push(CheckRow::info("family_constant", stats.constant));
    Ok(out)
}

fn weights_suite(cfg: &ExperimentConfig, budget: &mut Budget) -> Result<Output> {
    let g = model(cfg)?;
    let (p, q) = (cfg.p, cfg.q);
    let mut out = Output::new();
    let unit = Weight::constant(g.size(), 1.0)?;
    out.checks.push(CheckRow::equal("unit_weight_ap", ap_characteristic(&g, &unit, p)?, 1.0));
    out.checks.push(CheckRow::equal("unit_weight_rh", rh_characteristic(&g, &unit, q)?, 1.0));
    let mut t = Table::new("weights", &["a", "p", "Ap", "q", "RHq"]);
    let mut ap_values = Vec::new();
    let mut min_char = f64::INFINITY;
    let mut nesting: f64 = 0.0;
    for &a in &cfg.weight_exponents {
        if budget.out() {
            break;
        }
        let w = power_weight(&g, a);
        let ap = ap_characteristic(&g, &w, p)?;
        let rh = rh_characteristic(&g, &w, q)?;
        nesting = nesting.max(ap_characteristic(&g, &w, 2.0 * p)? / ap);
        min_char = min_char.min(ap.min(rh));
        ap_values.push(ap);
        t.push(vec![a.into(), p.into(), ap.into(), q.into(), rh.into()]);
    }
    out.tables.push(t);
    out.checks.push(CheckRow::at_least("min_characteristic", min_char, 1.0));
    out.checks.push(CheckRow::at_most("ap_nesting_ratio", nesting, 1.0));
    if let (Some(first), Some(last)) = (ap_values.first(), ap_values.last()) {
        out.checks.push(CheckRow::info("ap_growth", last / first));
    }
    Ok(out)
}

fn quantitative_suite_run(cfg: &ExperimentConfig) -> Result<Output> {
    let g = model(cfg)?;
    let dec = decomposition(&g, cfg)?;
    let spec = multiplier(cfg)?;
    let q = g.homogeneous_dim() as f64;
    let mode = match &cfg.mode {
        Some(m) => m.parse()?,
        None => multiplier_thresholds(q, cfg.beta)?.mode,
    };
    let report = quantitative_suite(&g, &dec, &spec, mode, cfg.seed)?;
    let mut out = Output::new();
    let mut t = Table::new(
        "quantitative",
        &["p", "a", "r1", "r2", "ap", "characteristic", "lower", "upper", "ceiling", "verdict"],
    );
    for c in &report.cells {
        t.push(vec![
            c.p.into(),
            c.a.into(),
            c.r1.into(),
            c.r2.into(),
            c.ap.into(),
            c.characteristic.into(),
            c.lower.into(),
            c.upper.into(),
            c.ceiling.into(),
            if c.pass { "pass" } else { "fail" }.into(),
        ]);
    }
    out.tables.push(t);
    threshold_rows(&mut out, "multiplier", &report.thresholds);
    out.checks.push(CheckRow::info("unweighted_1-1", report.unweighted[0]));
    out.checks.push(CheckRow::info("unweighted_2-2", report.unweighted[1]));
    out.checks.push(CheckRow::info("unweighted_inf-inf", report.unweighted[2]));
    let failed = report.cells.iter().filter(|c| !c.pass).count();
    out.checks.push(CheckRow::equal("failed_cells", failed as f64, 0.0));
    Ok(out)
}
