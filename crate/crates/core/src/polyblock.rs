//! Global power allocation under jamming by outer polyblock approximation.
//!
//! For a fixed jammer power the admissible transmit powers form a compact
//! normal set, and `U(p) = -Σ ψ_n / p_n` is increasing, so its maximum lies
//! on the upper boundary. Starting from one box that covers the region, the
//! best vertex is repeatedly projected onto the boundary along the ray from
//! the origin and replaced by the `N` vertices obtained by pulling one
//! coordinate back to the boundary point. The best vertex bounds the optimum
//! from above and the best boundary point from below.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::jamming::FeasibleRegion;
use crate::power::{PowerSolution, SolverKind};

/// How the optimality gap `U(z̃) - U(r̃)` is compared with `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    Absolute,
    /// `eta` is a fraction of `|U(r̃)|`.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PolyblockConfig {
    pub eta: f64,
    pub gap: GapKind,
    /// Vertices with a coordinate below `vertex_floor * P_total` are dropped.
    pub vertex_floor: f64,
    /// Accuracy of the projection step in `δ`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PolyblockConfig {
    fn default() -> Self {
        Self { eta: 1e-4, gap: GapKind::Relative, vertex_floor: 1e-6, tolerance: 1e-9, max_iterations: 10_000 }
    }
}

impl PolyblockConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.eta > 0.0 && self.vertex_floor > 0.0 && self.tolerance > 0.0 && self.max_iterations > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid polyblock settings {self:?}")))
        }
    }

    fn gap_limit(&self, lower: f64) -> f64 {
        match self.gap {
            GapKind::Absolute => self.eta,
            GapKind::Relative => self.eta * lower.abs(),
        }
    }
}

/// `Σ -ψ_n / p_n`.
pub fn objective(psi: &[f64], powers: &[f64]) -> f64 {
    psi.iter().zip(powers).map(|(s, p)| -s / p).sum()
}

/// Largest `x` in `[lo, hi]` with `h(x) <= target`, for `h` concave and
/// increasing. `eval` returns `(h, h')`. Requires `h(lo) <= target < h(hi)`.
/// Newton steps from the feasible side never overshoot because the tangent
/// of a concave function lies above it; bisection covers the start, where
/// `h'` may be unbounded, and any loss of monotonicity from rounding.
pub(crate) fn concave_root(
    mut eval: impl FnMut(f64) -> Result<(f64, f64)>,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let mut h_lo = if lo > 0.0 { Some(eval(lo)?) } else { None };
    for _ in 0..200 {
        if hi - lo <= tol * hi {
            break;
        }
        let newton = match h_lo {
            Some((h, d)) if d > 0.0 && d.is_finite() => Some(lo + (target - h) / d),
            _ => None,
        };
        let x = match newton {
            Some(x) if x > lo && x < hi => {
                if x - lo <= 1e-3 * tol * hi {
                    break;
                }
                x
            }
            _ => 0.5 * (lo + hi),
        };
        let (h, d) = eval(x)?;
        if h <= target {
            lo = x;
            h_lo = Some((h, d));
        } else {
            hi = x;
            // Newton landing on the wrong side means rounding has taken
            // over; fall back to halving.
            if newton.is_some_and(|n| n == x) {
                h_lo = h_lo.map(|(h, _)| (h, f64::NAN));
            }
        }
    }
    Ok(lo)
}

/// Relaxed per-hop maximum: each coordinate may use the whole integral
/// budget and the whole power budget left after the jammer.
pub fn initial_vertex(region: &FeasibleRegion, p_j: f64, tol: f64) -> Result<Vec<f64>> {
    let budget = region.total_power() - p_j;
    if !(p_j > 0.0 && budget > 0.0) {
        return Err(Error::InvalidInput(format!("jammer power {p_j} outside (0, P_total)")));
    }
    let target = region.integral_budget();
    if !(target > 0.0) {
        return Err(Error::Infeasible("SOP budget is not positive".into()));
    }
    region
        .kernels()
        .iter()
        .map(|k| {
            let c_max = budget / p_j;
            if k.value(c_max)? <= target {
                return Ok(budget);
            }
            let mut c_lo = c_max;
            while k.value(c_lo)? > target {
                c_lo *= 1e-3;
                if c_lo < 1e-300 {
                    return Err(Error::Infeasible("SOP budget unreachable".into()));
                }
            }
            let c = concave_root(|c| k.value_and_derivative(c), target, c_lo, c_max, tol)?;
            Ok(c * p_j)
        })
        .collect()
}

/// Boundary point on the ray through `vertex`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub delta: f64,
    pub point: Vec<f64>,
}

/// Largest `δ ∈ [0, 1]` keeping `δ·vertex` feasible at jammer power `p_j`.
pub fn project_to_boundary(vertex: &[f64], region: &FeasibleRegion, p_j: f64, tol: f64) -> Result<Projection> {
    if vertex.len() != region.num_hops() {
        return Err(Error::LengthMismatch { expected: region.num_hops(), got: vertex.len() });
    }
    if let Some((hop, &power)) = vertex.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositivePower { hop, power });
    }
    let sum: f64 = vertex.iter().sum();
    let d_budget = ((region.total_power() - p_j) / sum).min(1.0);
    if !(d_budget > 0.0) {
        return Ok(Projection { delta: 0.0, point: vec![0.0; vertex.len()] });
    }
    let target = region.integral_budget();
    let eval = |d: f64| -> Result<(f64, f64)> {
        let mut h = 0.0;
        let mut dh = 0.0;
        for (k, &z) in region.kernels().iter().zip(vertex) {
            let s = z / p_j;
            let (v, dv) = k.value_and_derivative(d * s)?;
            h += v;
            dh += dv * s;
        }
        Ok((h, dh))
    };
    let delta = if eval(d_budget)?.0 <= target {
        d_budget
    } else {
        concave_root(eval, target, 0.0, d_budget, tol)?
    };
    Ok(Projection { delta, point: vertex.iter().map(|z| delta * z).collect() })
}

/// The `N` vertices replacing `vertex` after projection onto `boundary`.
pub fn generate_vertices(vertex: &[f64], boundary: &[f64]) -> Vec<Vec<f64>> {
    (0..vertex.len())
        .map(|n| {
            let mut v = vertex.to_vec();
            v[n] = boundary[n];
            v
        })
        .collect()
}

/// Exact optimum at a fixed jammer power, for validating the polyblock.
///
/// In the coordinates `t_n = g_n(c_n)` each term `-ψ_n / (P_J c_n)` is
/// concave (because `c² g'(c)` increases) and the power budget is convex,
/// so the KKT conditions `ψ_n / (P_J c_n²) = μ g_n'(c_n) + ν` identify the
/// global optimum. Both multipliers are found by nested bisection.
pub fn fixed_jammer_optimum(region: &FeasibleRegion, p_j: f64) -> Result<Vec<f64>> {
    let budget = (region.total_power() - p_j) / p_j;
    if !(p_j > 0.0 && budget > 0.0) {
        return Err(Error::InvalidInput(format!("jammer power {p_j} outside (0, P_total)")));
    }
    let psi: Vec<f64> = region.route().psi().iter().map(|s| s / p_j).collect();
    let target = region.integral_budget();
    let kernels = region.kernels();

    // Stationary ratio of one hop: the sign of ψ/c² - μ g'(c) - ν changes
    // once, from + to -, as c grows.
    let ratio_at = |n: usize, mu: f64, nu: f64| -> Result<f64> {
        let (mut lo, mut hi) = (-60.0f64, 40.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            let c = mid.exp();
            let d = if mu > 0.0 { kernels[n].derivative(c)? } else { 0.0 };
            if psi[n] / (c * c) - mu * d - nu > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    };
    let ratios = |mu: f64, nu: f64| -> Result<Vec<f64>> { (0..psi.len()).map(|n| ratio_at(n, mu, nu)).collect() };
    let g_total = |c: &[f64]| -> Result<f64> { c.iter().zip(kernels).map(|(&c, k)| k.value(c)).sum() };
    // Largest-to-smallest search on a log scale for a decreasing function.
    let solve_log = |f: &dyn Fn(f64) -> Result<f64>, goal: f64| -> Result<f64> {
        let (mut lo, mut hi) = (-80.0f64, 80.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if f(mid.exp())? > goal {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi.exp())
    };

    // Only the SOP constraint active.
    let mu_sop = solve_log(&|mu| g_total(&ratios(mu, 0.0)?), target)?;
    let c = ratios(mu_sop, 0.0)?;
    if c.iter().sum::<f64>() <= budget {
        return Ok(c.iter().map(|c| c * p_j).collect());
    }
    // Only the power budget active: c_n ∝ sqrt(ψ_n).
    let root_sum: f64 = psi.iter().map(|s| s.sqrt()).sum();
    let c: Vec<f64> = psi.iter().map(|s| budget * s.sqrt() / root_sum).collect();
    if g_total(&c)? <= target {
        return Ok(c.iter().map(|c| c * p_j).collect());
    }
    // Both active.
    let on_budget = |mu: f64| -> Result<Vec<f64>> {
        let nu = solve_log(&|nu| Ok(ratios(mu, nu)?.iter().sum::<f64>()), budget)?;
        ratios(mu, nu)
    };
    let mu = solve_log(&|mu| g_total(&on_budget(mu)?), target)?;
    Ok(on_budget(mu)?.iter().map(|c| c * p_j).collect())
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TraceRow {
    pub k: usize,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyblockOutcome {
    pub solution: PowerSolution,
    pub upper: f64,
    pub lower: f64,
    pub trace: Vec<TraceRow>,
    /// Stopped early because the upper bound fell below a cutoff supplied
    /// by the caller.
    pub dominated: bool,
}

struct Vertex {
    z: Vec<f64>,
    u: f64,
}

impl PartialEq for Vertex {
    fn eq(&self, other: &Self) -> bool {
        self.u == other.u
    }
}
impl Eq for Vertex {}
impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.u.total_cmp(&other.u)
    }
}

/// Globally optimal transmit powers at a fixed jammer power.
pub fn polyblock_solve(region: &FeasibleRegion, p_j: f64, config: &PolyblockConfig) -> Result<PolyblockOutcome> {
    polyblock_with_cutoff(region, p_j, config, f64::NEG_INFINITY)
}

fn polyblock_with_cutoff(
    region: &FeasibleRegion,
    p_j: f64,
    config: &PolyblockConfig,
    cutoff: f64,
) -> Result<PolyblockOutcome> {
    config.validate()?;
    let psi = region.route().psi();
    let floor = config.vertex_floor * region.total_power();
    let z0 = initial_vertex(region, p_j, config.tolerance)?;

    let mut heap = BinaryHeap::new();
    if z0.iter().all(|&z| z >= floor) {
        heap.push(Vertex { u: objective(psi, &z0), z: z0 });
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut dominated = false;
    let mut upper = f64::INFINITY;

    for k in 1..=config.max_iterations {
        let lower = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);
        let Some(top) = heap.pop() else {
            // Every remaining box was pruned, so nothing beats the incumbent.
            upper = lower;
            converged = best.is_some();
            trace.push(TraceRow { k, upper, lower, gap: 0.0 });
            break;
        };
        upper = top.u;
        let r = project_to_boundary(&top.z, region, p_j, config.tolerance)?;
        if r.delta > 0.0 {
            let u = objective(psi, &r.point);
            if u > lower {
                best = Some((r.point.clone(), u));
            }
        }
        let lower = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);
        let gap = upper - lower;
        trace.push(TraceRow { k, upper, lower, gap });
        if gap <= config.gap_limit(lower) {
            converged = true;
            break;
        }
        if upper <= cutoff {
            dominated = true;
            break;
        }
        for v in generate_vertices(&top.z, &r.point) {
            if v.iter().any(|&x| x < floor) {
                continue;
            }
            let u = objective(psi, &v);
            if u > lower {
                heap.push(Vertex { z: v, u });
            }
        }
    }

    let Some((powers, lower)) = best else {
        return Err(Error::Infeasible(format!("no feasible transmit powers at jammer power {p_j}")));
    };
    let achieved_sop = region.sop_jamming(&powers, p_j)?;
    let feasible = region.is_feasible(&powers, p_j)?.feasible;
    let solution = PowerSolution {
        achieved_cop: -lower.exp_m1(),
        achieved_sop,
        powers,
        jammer_power: Some(p_j),
        feasible,
        converged,
        solver: SolverKind::Polyblock,
        iterations: trace.len(),
    };
    Ok(PolyblockOutcome { solution, upper, lower, trace, dominated })
}

/// `count` log-spaced jammer powers over `[1e-3, 0.99]·P_total`.
pub fn jammer_grid(total_power: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = ((1e-3 * total_power).ln(), (0.99 * total_power).ln());
    match count {
        0 => Vec::new(),
        1 => vec![0.99 * total_power],
        _ => (0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammerSearch {
    pub best: PolyblockOutcome,
    pub jammer_power: f64,
    /// Jammer powers whose polyblock run finished (not cut off or
    /// infeasible), with the final lower bound.
    pub evaluated: Vec<(f64, f64)>,
}

/// Polyblock at every grid point, keeping the best. Grid points are visited
/// in order of a cheap lower bound, and a run stops as soon as its upper
/// bound cannot beat the incumbent, so the answer matches the exhaustive
/// search to within the gap tolerance.
pub fn solve_with_jammer_search(
    region: &FeasibleRegion,
    grid: &[f64],
    config: &PolyblockConfig,
) -> Result<JammerSearch> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty jammer power grid".into()));
    }
    let psi = region.route().psi();
    let mut order: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    for &p_j in grid {
        if !(p_j > 0.0 && p_j < region.total_power()) {
            return Err(Error::InvalidInput(format!("jammer power {p_j} outside (0, P_total)")));
        }
        let z = initial_vertex(region, p_j, config.tolerance)?;
        let r = project_to_boundary(&z, region, p_j, config.tolerance)?;
        let lb = if r.delta > 0.0 { objective(psi, &r.point) } else { f64::NEG_INFINITY };
        order.push((p_j, lb));
    }
    order.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut best: Option<(f64, PolyblockOutcome)> = None;
    let mut evaluated = Vec::new();
    for (p_j, _) in order {
        let cutoff = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1.lower);
        let out = match polyblock_with_cutoff(region, p_j, config, cutoff) {
            Ok(o) => o,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        if out.dominated {
            continue;
        }
        evaluated.push((p_j, out.lower));
        if best.as_ref().is_none_or(|b| out.lower > b.1.lower) {
            best = Some((p_j, out));
        }
    }
    let (jammer_power, best) =
        best.ok_or_else(|| Error::Infeasible("no jammer power in the grid admits feasible powers".into()))?;
    Ok(JammerSearch { best, jammer_power, evaluated })
}
