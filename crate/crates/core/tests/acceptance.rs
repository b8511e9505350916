//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Criteria can be selected by number:
//! `cargo test --test acceptance -- 3 7`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng;
use secroute::experiment::{
    self, ExperimentConfig, Results, SchemeRow, SolverChoice, SolverConfig, StandardRow, SweepConfig, SweepMode,
    SweepVariable,
};
use secroute::geometry::{substream, NetworkInstance, PairSelection, Point, Region, Stream, SystemParams};
use secroute::jamming::{FeasibleRegion, JammerConfig};
use secroute::montecarlo::{covering_region, g_n_monte_carlo, simulate_cop, simulate_sop, SimOptions};
use secroute::outage::{cop, omega, sop, sop_budget, DerivedConstants, Route};
use secroute::polyblock::{jammer_grid, objective, polyblock_solve, solve_with_jammer_search, PolyblockConfig};
use secroute::power::{allocate_powers, min_cop_for_route};
use secroute::routing::{enumerate_all_routes, run_algorithm_1, WeightedGraph};
use secroute::sca::{sca_multi_start, seed_grid, ScaConfig};

enum Verdict {
    Pass,
    Fail,
    /// Calibration-level check that reports without failing the run.
    Flag,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Self { verdict: if pass { Verdict::Pass } else { Verdict::Fail }, detail }
    }
}

fn base(seed: u64) -> ExperimentConfig {
    ExperimentConfig { seed, trials: 0, ..ExperimentConfig::default() }
}

fn jamming_solver() -> SolverConfig {
    SolverConfig { kind: SolverChoice::Sca, jam: true, starts: 3, seed_iterations: 50, ..SolverConfig::default() }
}

fn sweep(config: &ExperimentConfig, variable: SweepVariable, values: &[f64], mode: SweepMode) -> Results {
    let config = ExperimentConfig {
        sweep: Some(SweepConfig { variable, values: values.to_vec(), mode }),
        ..config.clone()
    };
    experiment::run(&config).expect("valid config").results
}

fn standard_rows(r: Results) -> Vec<StandardRow> {
    match r {
        Results::Standard(rows) => rows,
        _ => unreachable!(),
    }
}

fn scheme_rows(r: Results) -> Vec<SchemeRow> {
    match r {
        Results::Schemes(rows) => rows,
        _ => unreachable!(),
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

fn fmt_curve(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(" > ")
}

fn binomial_z(estimate: f64, p: f64, trials: u64) -> f64 {
    let sd = (p * (1.0 - p) / trials as f64).sqrt().max(1.0 / trials as f64);
    (estimate - p) / sd
}

fn c1_formula_vs_simulation() -> Outcome {
    const TRIALS: u64 = 100_000;
    let config = base(101);
    let params = config.params.to_params();
    let eve = Region::square(Point::default(), config.geometry.eve_side).unwrap();
    let (mut worst_cop, mut worst_sop) = (0.0f64, 0.0f64);
    let mut bad = 0;
    for i in 0..20 {
        let inst = experiment::layout(&config, 10, i).unwrap();
        let (route, sol) = experiment::secure_route(&inst, &params, None).unwrap();
        let seed = 1000 + i as u64;
        let mc_cop = simulate_cop(&route, &sol.powers, &params, TRIALS, seed).unwrap();
        // The closed form integrates over the plane; widen the area until
        // the truncated tail is negligible.
        let cover = covering_region(&route, &sol.powers, &params).unwrap();
        let area = Region::new(
            eve.x_min.min(cover.x_min),
            eve.x_max.max(cover.x_max),
            eve.y_min.min(cover.y_min),
            eve.y_max.max(cover.y_max),
        )
        .unwrap();
        let opts = SimOptions { trials: TRIALS, seed, resample_per_hop: true, include_noise: false };
        let mc_sop = simulate_sop(&route, &sol.powers, &params, &area, &opts).unwrap();
        let zc = binomial_z(mc_cop.estimate, sol.achieved_cop, TRIALS);
        let zs = binomial_z(mc_sop.estimate, sol.achieved_sop, TRIALS);
        worst_cop = worst_cop.max(zc.abs());
        worst_sop = worst_sop.max(zs.abs());
        bad += usize::from(zc.abs() > 3.0) + usize::from(zs.abs() > 3.0);
    }
    Outcome::check(
        bad == 0,
        format!("20 instances, 1e5 trials: {bad}/40 outside 3σ, max |z| COP {worst_cop:.2}, SOP {worst_sop:.2}"),
    )
}

fn c2_constraint_activity() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let mut rng = substream(102, Stream::Layout, i);
        let params = SystemParams {
            alpha: rng.random_range(2.5..6.0),
            sigma2: 10f64.powf(rng.random_range(-2.0..2.0)),
            gamma_c: 10f64.powf(rng.random_range(-0.5..1.0)),
            gamma_e: 10f64.powf(rng.random_range(-0.5..1.0)),
            lambda_e: 10f64.powf(rng.random_range(-6.0..-2.0)),
            zeta: rng.random_range(0.01..0.99),
        };
        let hops = rng.random_range(1..=8);
        let pts: Vec<Point> =
            (0..=hops).map(|_| Point::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0))).collect();
        let route = Route::from_positions(pts, &params).unwrap();
        let sol = allocate_powers(&route, &DerivedConstants::new(&params).unwrap(), params.alpha).unwrap();
        let eps = sop_budget(params.zeta).unwrap();
        let lhs = omega(&params) * sol.powers.iter().map(|p| p.powf(2.0 / params.alpha)).sum::<f64>();
        worst = worst.max((lhs - eps).abs() / eps);
    }
    Outcome::check(worst <= 1e-9, format!("1000 routes: max relative residual {worst:.2e} (limit 1e-9)"))
}

fn c3_routing_optimality() -> Outcome {
    let params = SystemParams::reference();
    let constants = DerivedConstants::new(&params).unwrap();
    let node_region = Region::square(Point::default(), 20.0).unwrap();
    let eve = Region::square(Point::default(), 400.0).unwrap();
    let (mut same, mut tied, mut wrong) = (0, 0, 0);
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let mut rng = substream(103, Stream::Layout, i);
        let m = rng.random_range(2..=7);
        let inst = NetworkInstance::random(&mut rng, m, node_region, eve, PairSelection::Farthest).unwrap();
        let found = run_algorithm_1(&inst, &params).unwrap();
        let graph = WeightedGraph::from_instance(&inst, &params);
        let best = enumerate_all_routes(&graph, inst.source, inst.destination, 8)
            .unwrap()
            .into_iter()
            .map(|p| {
                let route = graph.route(p.nodes.clone()).unwrap();
                (min_cop_for_route(&route, &constants, params.alpha), p.nodes)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        let rel = (found.solution.achieved_cop - best.0).abs() / best.0;
        worst = worst.max(rel);
        if found.route.nodes() == best.1.as_slice() {
            same += 1;
        } else if rel <= 1e-12 {
            tied += 1;
        } else {
            wrong += 1;
        }
    }
    Outcome::check(
        wrong == 0,
        format!("1000 layouts (M<=7): {same} same path, {tied} ties, {wrong} worse; max relative COP gap {worst:.1e}"),
    )
}

fn c4_routing_invariance() -> Outcome {
    let config = base(104);
    let mut changed = 0;
    for i in 0..100 {
        let inst = experiment::layout(&config, 10, i).unwrap();
        let mut paths = Vec::new();
        for lambda_e in [1e-5, 1e-4, 1e-3] {
            for zeta in [0.1, 0.5, 0.9] {
                let params = SystemParams { lambda_e, zeta, ..config.params.to_params() };
                let (route, _) = experiment::secure_route(&inst, &params, None).unwrap();
                paths.push(route.nodes().to_vec());
            }
        }
        changed += usize::from(paths.iter().any(|p| p != &paths[0]));
    }
    Outcome::check(changed == 0, format!("100 layouts x 9 (lambda_e, zeta): {changed} layouts changed path"))
}

/// Largest `x` in `[lo, hi]` with `feasible(x)`, by bisection.
fn last_feasible(feasible: impl Fn(f64) -> bool, lo: f64, hi: f64) -> Option<f64> {
    if hi <= lo || !feasible(lo) {
        return None;
    }
    if feasible(hi) {
        return Some(hi);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if feasible(m) {
            a = m;
        } else {
            b = m;
        }
    }
    Some(a)
}

fn c5_polyblock_global() -> Outcome {
    const GRID: usize = 4000;
    let params = SystemParams::reference();
    let eve = Region::square(Point::default(), 400.0).unwrap();
    let nodes = Region::square(Point::default(), 20.0).unwrap();
    let cfg = PolyblockConfig::default();
    let total = 1e9;
    let grid = jammer_grid(total, 100);
    let mut failures = Vec::new();
    let (mut worst_gap, mut worst_excess) = (0.0f64, 0.0f64);
    for i in 0..10u64 {
        let mut rng = substream(105, Stream::Layout, i);
        let pts: Vec<Point> = (0..3).map(|_| nodes.sample_uniform(&mut rng)).collect();
        let route = Route::from_positions(pts, &params).unwrap();
        let region = FeasibleRegion::new(route, JammerConfig::new(nodes.center(), total).unwrap(), params, eve).unwrap();
        let p_j = grid[rng.random_range(0..grid.len())];
        let out = polyblock_solve(&region, p_j, &cfg).unwrap();
        let monotone = out.trace.windows(2).all(|w| w[1].upper <= w[0].upper && w[1].lower >= w[0].lower);
        let gap = (out.upper - out.lower) / out.lower.abs();
        worst_gap = worst_gap.max(gap);

        // Objective increases in both powers, so the optimum lies on the
        // upper boundary: grid over P1 and push P2 to the boundary.
        let psi = region.route().psi();
        let budget = total - p_j;
        // Kernels stay within their tabulated range above this.
        let lo = 2e-7 * p_j;
        let feasible = |p: [f64; 2]| region.is_feasible(&p, p_j).unwrap().feasible;
        let p1_max = last_feasible(|p1| feasible([p1, lo]), lo, budget - lo).unwrap();
        let mut values = Vec::with_capacity(GRID);
        for k in 0..=GRID {
            let p1 = lo + (p1_max - lo) * k as f64 / GRID as f64;
            if let Some(p2) = last_feasible(|p2| feasible([p1, p2]), lo, budget - p1) {
                values.push(objective(psi, &[p1, p2]));
            }
        }
        let (k_best, &grid_best) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let resolution = [k_best.wrapping_sub(1), k_best + 1]
            .iter()
            .filter_map(|&k| values.get(k))
            .map(|v| (grid_best - v).abs())
            .fold(0.0, f64::max);
        let allowed = cfg.eta * grid_best.abs() + resolution;
        let excess = (out.lower - grid_best).abs() - allowed;
        worst_excess = worst_excess.max(excess / grid_best.abs());
        if !(monotone && gap <= cfg.eta && out.solution.converged && excess <= 0.0) {
            failures.push(format!("#{i}: monotone {monotone}, gap {gap:.1e}, excess {excess:.1e}"));
        }
    }
    Outcome::check(
        failures.is_empty(),
        format!(
            "10 two-hop instances: max relative gap {worst_gap:.1e} (eta 1e-4), worst distance to grid beyond \
             eta+resolution {worst_excess:.1e} relative{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn c6_jamming_quadrature() -> Outcome {
    const SAMPLES: u64 = 10_000_000;
    let config = base(106);
    let params = config.params.to_params();
    let mut worst_z = 0.0f64;
    let mut worst_limit = 0.0f64;
    let mut bad = 0;
    for i in 0..10 {
        let mut rng = substream(106, Stream::Solver, i as u64);
        let inst = experiment::layout(&config, 10, i).unwrap();
        let (route, _) = experiment::secure_route(&inst, &params, None).unwrap();
        let region = experiment::jamming_region(&config, &route, &params).unwrap();
        let hop = rng.random_range(0..route.num_hops());
        let p_j = 10f64.powf(rng.random_range(5.0..9.0));
        let p_t = p_j * 10f64.powf(rng.random_range(-4.0..2.0));
        let g = region.g_n(hop, p_t, p_j).unwrap();
        let (est, se) = g_n_monte_carlo(
            route.transmitter(hop),
            region.jammer().position,
            region.eve_region(),
            &params,
            p_t / p_j,
            SAMPLES,
            500 + i as u64,
        )
        .unwrap();
        let z = (g - est) / se;
        worst_z = worst_z.max(z.abs());
        bad += usize::from(z.abs() > 3.0);

        let area = region.eve_region().area();
        let quiet = region.g_n(hop, p_t, p_t * 1e-12).unwrap();
        let loud = region.g_n(hop, p_t, p_t * 1e12).unwrap();
        let err = ((quiet - area).abs() / area).max(loud / area);
        worst_limit = worst_limit.max(err);
        bad += usize::from(err > 1e-4);
    }
    Outcome::check(
        bad == 0,
        format!("10 configurations, 1e7 samples: max |z| {worst_z:.2}; limits P_J->0 and P_J->inf off by {worst_limit:.1e} of the area"),
    )
}

fn c7_sca_quality() -> Outcome {
    let config = base(107);
    let params = config.params.to_params();
    let poly = PolyblockConfig::default();
    let mut ratios = Vec::new();
    let mut problems = Vec::new();
    let mut runs = 0;
    for i in 0..5 {
        let inst = experiment::layout(&config, 10, i).unwrap();
        let (route, _) = experiment::secure_route(&inst, &params, None).unwrap();
        let region = experiment::jamming_region(&config, &route, &params).unwrap();
        let total = region.total_power();
        let search = solve_with_jammer_search(&region, &jammer_grid(total, 100), &poly).unwrap();
        let multi = sca_multi_start(&region, &seed_grid(total, 20), &ScaConfig::default(), &poly).unwrap();
        for (seed, run) in &multi.runs {
            runs += 1;
            if !run.trace.windows(2).all(|w| w[1].objective <= w[0].objective) {
                problems.push(format!("layout {i} seed {seed:.2e}: objective increased"));
            }
            if !run.trace.iter().all(|r| r.sop_slack >= 0.0 && r.budget_slack >= 0.0) {
                problems.push(format!("layout {i} seed {seed:.2e}: infeasible iterate"));
            }
        }
        let ratio = multi.best.solution.achieved_cop / search.best.solution.achieved_cop;
        if ratio > 1.05 {
            problems.push(format!("layout {i} ({} hops): SCA/polyblock COP {ratio:.4}", route.num_hops()));
        }
        ratios.push(ratio);
    }
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    Outcome::check(
        problems.is_empty(),
        format!(
            "5 instances, {runs} SCA runs from 20 seeds each: SCA/polyblock COP = [{}] (limit 1.05){}",
            shown.join(", "),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn c8_scheme_ordering() -> Outcome {
    const TRIALS: u64 = 100_000;
    let mut config = base(108);
    config.layouts = 100;
    config.solver = jamming_solver();
    let zetas = [0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9];
    let mut rows = scheme_rows(sweep(&config, SweepVariable::Zeta, &zetas, SweepMode::Schemes));
    config.trials = TRIALS;
    let at_half = scheme_rows(sweep(&config, SweepVariable::Zeta, &[0.5], SweepMode::Schemes));
    rows.extend(at_half.iter().cloned());

    let mut out_of_order = 0;
    let mut errors = 0;
    for r in &rows {
        match (&r.a, &r.b, &r.c) {
            (Some(a), Some(b), Some(c)) => {
                out_of_order += usize::from(!(c.achieved_cop <= b.achieved_cop && b.achieved_cop <= a.achieved_cop));
            }
            _ => errors += 1,
        }
    }
    let mut unconfirmed = 0;
    for r in &at_half {
        let Some([a, b, c]) = r.mc_cop else { continue };
        let tol = |x: &secroute::montecarlo::SimReport, y: &secroute::montecarlo::SimReport| {
            3.0 * (x.std_error.powi(2) + y.std_error.powi(2)).sqrt().max(1.0 / TRIALS as f64)
        };
        unconfirmed += usize::from(c.estimate > b.estimate + tol(&c, &b) || b.estimate > a.estimate + tol(&b, &a));
    }
    let ratio_cb = mean(rows.iter().filter_map(|r| Some(r.c.as_ref()?.achieved_cop / r.b.as_ref()?.achieved_cop)));
    let ratio_ba = mean(rows.iter().filter_map(|r| Some(r.b.as_ref()?.achieved_cop / r.a.as_ref()?.achieved_cop)));
    Outcome::check(
        out_of_order == 0 && errors == 0 && unconfirmed == 0,
        format!(
            "{} rows over 9 zeta values: {out_of_order} out of order, {errors} failed; mean COP ratios C/B {ratio_cb:.3}, \
             B/A {ratio_ba:.3}; Monte Carlo (1e5 trials, zeta 0.5) contradicts ordering on {unconfirmed} of {} layouts",
            rows.len(),
            at_half.len()
        ),
    )
}

fn c9_trends() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut config = base(109);
    config.layouts = 10_000;
    let zetas = [0.1, 0.5, 0.9];
    let node_counts = [5.0, 10.0, 20.0];

    // COP and average power against M, per zeta. The endpoints are the
    // first two nodes, so a larger M adds relays between the same pair.
    // With the farthest pair the endpoints also move apart as M grows,
    // which is reported for reference only.
    for &zeta in &zetas {
        config.params.zeta = zeta;
        let mut curves = Vec::new();
        for pair in [PairSelection::Fixed { source: 0, destination: 1 }, PairSelection::Farthest] {
            config.geometry.pair = pair;
            let rows = standard_rows(sweep(&config, SweepVariable::Nodes, &node_counts, SweepMode::Standard));
            let by_m = |f: fn(&StandardRow) -> f64| -> Vec<f64> {
                node_counts.iter().map(|&m| mean(rows.iter().filter(|r| r.value == m).map(f))).collect()
            };
            curves.push((
                by_m(|r| r.solution.as_ref().unwrap().achieved_cop),
                by_m(|r| r.solution.as_ref().unwrap().average_power()),
            ));
        }
        let (cop_m, pow_m) = &curves[0];
        pass &= strictly_decreasing(cop_m) && strictly_decreasing(pow_m);
        lines.push(format!("zeta {zeta}: COP(M=5,10,20) {}; power {}", fmt_curve(cop_m), fmt_curve(pow_m)));
        lines.push(format!(
            "  farthest pair (reference): COP {}; power {}",
            fmt_curve(&curves[1].0),
            fmt_curve(&curves[1].1)
        ));
    }
    config.geometry.pair = PairSelection::Farthest;

    // Average power against zeta.
    config.params.zeta = 0.5;
    let zeta_grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let rows = standard_rows(sweep(&config, SweepVariable::Zeta, &zeta_grid, SweepMode::Standard));
    let pow_z: Vec<f64> = zeta_grid
        .iter()
        .map(|&z| mean(rows.iter().filter(|r| r.value == z).map(|r| r.solution.as_ref().unwrap().average_power())))
        .collect();
    pass &= strictly_increasing(&pow_z);
    lines.push(format!("power(zeta 0.1..0.9) increasing: {}", strictly_increasing(&pow_z)));

    // SOP at a fixed COP against lambda_e: scale each optimal allocation to
    // the target COP; the shape is the same at every target.
    let lambdas = [1e-5, 1e-4, 1e-3];
    let params = config.params.to_params();
    let mut routes = Vec::new();
    for i in 0..config.layouts {
        let inst = experiment::layout(&config, 10, i).unwrap();
        routes.push(experiment::secure_route(&inst, &params, None).unwrap());
    }
    for target in [0.01f64, 0.05, 0.1] {
        let x = -(-target).ln_1p();
        let sops: Vec<f64> = lambdas
            .iter()
            .map(|&lambda_e| {
                let p = SystemParams { lambda_e, ..params };
                mean(routes.iter().map(|(route, sol)| {
                    let exponent: f64 = route.psi().iter().zip(&sol.powers).map(|(s, q)| s / q).sum();
                    let powers: Vec<f64> = sol.powers.iter().map(|q| q * exponent / x).collect();
                    debug_assert!((cop(route, &powers).unwrap() - target).abs() < 1e-9);
                    sop(route, &powers, &p).unwrap()
                }))
            })
            .collect();
        pass &= strictly_increasing(&sops);
        lines.push(format!("SOP at COP {target} vs lambda_e 1e-5,1e-4,1e-3: {}", fmt_curve(&sops).replace('>', "<")));
    }

    // Jamming against non-jamming average power.
    let mut jam = base(109);
    jam.layouts = 1000;
    jam.solver = jamming_solver();
    let with = standard_rows(sweep(&jam, SweepVariable::Zeta, &zetas, SweepMode::Standard));
    jam.solver = SolverConfig::default();
    let without = standard_rows(sweep(&jam, SweepVariable::Zeta, &zetas, SweepMode::Standard));
    for &z in &zetas {
        let avg = |rows: &[StandardRow]| {
            mean(rows.iter().filter(|r| r.value == z).filter_map(|r| Some(r.solution.as_ref()?.average_power())))
        };
        let (j, n) = (avg(&with), avg(&without));
        pass &= j > n;
        lines.push(format!("zeta {z}: jamming power {j:.3e} vs {n:.3e} without (1000 layouts)"));
    }
    Outcome::check(pass, format!("10^4 layouts\n    {}", lines.join("\n    ")))
}

fn c10_hop_distribution() -> Outcome {
    let mut config = base(110);
    config.layouts = 10_000;
    let Results::Hops(rows) = sweep(&config, SweepVariable::Nodes, &[30.0], SweepMode::Hops) else { unreachable!() };
    let hist: BTreeMap<usize, f64> = rows.iter().map(|r| (r.hops, r.fraction)).collect();
    let many: f64 = hist.range(14..).map(|(_, f)| f).sum();
    let single = hist.get(&1).copied().unwrap_or(0.0);
    let shape: Vec<String> = hist.iter().map(|(h, f)| format!("{h}:{:.3}", f)).collect();
    let ok = many < 0.01 && single < 0.01;
    Outcome {
        verdict: if ok { Verdict::Pass } else { Verdict::Flag },
        detail: format!("M=30, 10^4 layouts: mass N>13 {many:.4}, N=1 {single:.4}; histogram {}", shape.join(" ")),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "formula vs simulation", c1_formula_vs_simulation, Some(Duration::from_secs(120))),
        (2, "constraint activity", c2_constraint_activity, Some(Duration::from_secs(10))),
        (3, "routing optimality", c3_routing_optimality, Some(Duration::from_secs(60))),
        (4, "routing invariance", c4_routing_invariance, None),
        (5, "polyblock global optimality", c5_polyblock_global, Some(Duration::from_secs(300))),
        (6, "jamming quadrature", c6_jamming_quadrature, Some(Duration::from_secs(120))),
        (7, "SCA quality", c7_sca_quality, Some(Duration::from_secs(600))),
        (8, "scheme ordering", c8_scheme_ordering, None),
        (9, "trend reproduction", c9_trends, None),
        (10, "hop-count distribution", c10_hop_distribution, None),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run, budget) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            if elapsed > limit && matches!(outcome.verdict, Verdict::Pass) {
                outcome.verdict = Verdict::Fail;
                outcome.detail.push_str(&format!("; over the {}s budget", limit.as_secs()));
            }
        }
        let tag = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
            Verdict::Flag => "FLAG",
        };
        println!("criterion {n:>2} {tag} {name} ({:.1}s): {}", elapsed.as_secs_f64(), outcome.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
