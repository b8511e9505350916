//! Joint transmit and jammer power by successive convex approximation.
//!
//! With `c_n = P_n / P_J`, slacks `a >= 1/P_J` and `b >= Σ ψ_n / c_n`, and
//! `ab = ¼[(a+b)² - (a-b)²]`, the problem is a product minimisation whose
//! non-convex pieces are `-(a-b)²`, the SOP integrals (concave in `c`) and
//! `-P_total/P_J`. Each is replaced by its tangent at the previous iterate.
//! The tangents lie above the terms they replace, so every subproblem
//! solution is feasible for the original problem and no worse than the
//! point it was expanded around.
//!
//! `ab` is unchanged by `(a, b) -> (κa, b/κ)` when the slack constraints are
//! scaled to match. By default each expansion picks `κ` so that the two
//! slacks are equal there, which makes the `-(a-b)²` tangent vanish. Without
//! it the tangent adds the proximal term `¼((a-a') - (b-b'))²`, and with
//! `a ≈ 1/P_J` and `b ≈ Σ ψ_n/c_n` many orders of magnitude apart progress
//! becomes slow enough for the stopping rule to fire short of a KKT point.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jamming::FeasibleRegion;
use crate::polyblock::{jammer_grid, polyblock_solve, project_to_boundary, PolyblockConfig};
use crate::power::{PowerSolution, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaConfig {
    /// Stop once the objective improves by less than `rho` relative.
    pub rho: f64,
    pub max_iterations: usize,
    /// Duality gap of each convex subproblem, relative to its objective.
    pub inner_tolerance: f64,
    /// Equalise the slacks at every expansion point.
    pub rebalance: bool,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self { rho: 1e-6, max_iterations: 200, inner_tolerance: 1e-7, rebalance: true }
    }
}

impl ScaConfig {
    fn validate(&self) -> Result<()> {
        if self.rho > 0.0 && self.inner_tolerance > 0.0 && self.max_iterations > 0 {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid SCA settings {self:?}")))
        }
    }
}

/// An iterate `(a, b, c, P_J)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaPoint {
    pub a: f64,
    pub b: f64,
    pub c: Vec<f64>,
    pub p_j: f64,
}

impl ScaPoint {
    /// Point with both slacks tight.
    pub fn from_powers(psi: &[f64], powers: &[f64], p_j: f64) -> Result<Self> {
        if psi.len() != powers.len() {
            return Err(Error::LengthMismatch { expected: psi.len(), got: powers.len() });
        }
        if let Some((hop, &power)) = powers.iter().enumerate().find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::NonPositivePower { hop, power });
        }
        if !(p_j > 0.0 && p_j.is_finite()) {
            return Err(Error::InvalidInput(format!("jammer power must be positive, got {p_j}")));
        }
        let c: Vec<f64> = powers.iter().map(|p| p / p_j).collect();
        Ok(Self { a: 1.0 / p_j, b: ratio_sum(psi, &c), c, p_j })
    }

    pub fn powers(&self) -> Vec<f64> {
        self.c.iter().map(|c| c * self.p_j).collect()
    }

    /// `Σ ψ_n / (c_n P_J)`, the COP exponent.
    pub fn true_objective(&self, psi: &[f64]) -> f64 {
        ratio_sum(psi, &self.c) / self.p_j
    }

    fn tightened(mut self, psi: &[f64]) -> Self {
        self.a = 1.0 / self.p_j;
        self.b = ratio_sum(psi, &self.c);
        self
    }
}

fn ratio_sum(psi: &[f64], c: &[f64]) -> f64 {
    psi.iter().zip(c).map(|(s, c)| s / c).sum()
}

/// Tangent of `-(a-b)²` at `(a_prev, b_prev)`.
pub fn surrogate_h1(a: f64, b: f64, a_prev: f64, b_prev: f64) -> f64 {
    let d = a_prev - b_prev;
    d * d - 2.0 * (a - b) * d
}

/// Tangent of `Σ_n g_n(c_n)` at `c_prev`. Affine in `c`.
pub fn surrogate_h2(c: &[f64], c_prev: &[f64], region: &FeasibleRegion) -> Result<f64> {
    let n = region.num_hops();
    for v in [c, c_prev] {
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
    }
    let mut total = 0.0;
    for ((k, &c), &c0) in region.kernels().iter().zip(c).zip(c_prev) {
        let (g, d) = k.value_and_derivative(c0)?;
        total += g + d * (c - c0);
    }
    Ok(total)
}

/// Tangent of `-P_total / P_J` at `p_j_prev`.
pub fn surrogate_h3(p_j: f64, p_j_prev: f64, total_power: f64) -> f64 {
    -2.0 * total_power / p_j_prev + total_power * p_j / (p_j_prev * p_j_prev)
}

/// Solution of one convex subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub point: ScaPoint,
    /// Subproblem objective `¼[(a+b)² + H1]` in the balanced slack scale
    /// when rebalancing, otherwise in the original one.
    pub objective: f64,
    /// Final duality gap relative to the objective at the expansion point.
    pub gap: f64,
}

/// Convex subproblem expanded around one iterate, in variables
/// `x = (â, b̂, c_1..c_N, P_J)` with `â = κa`, `b̂ = b/κ`.
struct Subproblem<'a> {
    psi: &'a [f64],
    kappa: f64,
    /// `â' - b̂'` at the expansion point.
    d0: f64,
    /// Objective scale.
    f0: f64,
    /// SOP tangent `Σ w_n c_n + offset <= budget`; absent without eavesdroppers.
    sop: Option<(Vec<f64>, f64, f64)>,
    total: f64,
    p0: f64,
    /// Typical magnitude of each variable.
    scale: Vec<f64>,
    /// Typical magnitude of each constraint.
    g_scale: [f64; 4],
}

impl<'a> Subproblem<'a> {
    fn new(at: &ScaPoint, region: &'a FeasibleRegion, rebalance: bool) -> Result<Self> {
        let psi = region.route().psi();
        let kappa = if rebalance { (at.b / at.a).sqrt() } else { 1.0 };
        let (a0, b0) = (kappa * at.a, at.b / kappa);
        let budget = region.integral_budget();
        let sop = if budget.is_finite() {
            let mut w = Vec::with_capacity(at.c.len());
            let mut offset = 0.0;
            for (k, &c0) in region.kernels().iter().zip(&at.c) {
                let (g, d) = k.value_and_derivative(c0)?;
                w.push(d);
                offset += g - d * c0;
            }
            Some((w, offset, budget))
        } else {
            None
        };
        let mut scale = vec![a0, b0];
        scale.extend(&at.c);
        scale.push(at.p_j);
        let g_scale = [kappa / at.p_j, ratio_sum(psi, &at.c) / kappa, budget, region.total_power() / at.p_j];
        Ok(Self {
            psi,
            kappa,
            d0: a0 - b0,
            f0: a0 * b0,
            sop,
            total: region.total_power(),
            p0: at.p_j,
            scale,
            g_scale,
        })
    }

    fn n(&self) -> usize {
        self.scale.len() - 3
    }

    fn objective(&self, x: &[f64]) -> f64 {
        // Same as ¼[(a+b)² + H1], arranged to avoid cancellation when the
        // slacks differ by many orders of magnitude.
        let (a, b) = (x[0], x[1]);
        let e = a - b - self.d0;
        a * b + 0.25 * e * e
    }

    /// Constraint values `g_j(x) <= 0`, with the linearised SOP last.
    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let (c, p) = (&x[2..2 + n], x[2 + n]);
        let mut g = vec![
            self.kappa / p - x[0],
            ratio_sum(self.psi, c) / self.kappa - x[1],
            1.0 + c.iter().sum::<f64>() + surrogate_h3(p, self.p0, self.total),
        ];
        if let Some((w, offset, budget)) = &self.sop {
            g.push(w.iter().zip(c).map(|(w, c)| w * c).sum::<f64>() + offset - budget);
        }
        g
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| *v > 0.0 && v.is_finite()) && self.constraints(x).iter().all(|&g| g < 0.0)
    }

    /// Barrier value, gradient and Hessian in the scaled variables `u = x / scale`.
    fn barrier(&self, x: &[f64], t: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = self.n();
        let m = n + 3;
        let ip = m - 1;
        let (a, b) = (x[0], x[1]);
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);

        let w = t / self.f0;
        let mut value = w * self.objective(x);
        let e = a - b - self.d0;
        grad[0] = w * (b + 0.5 * e);
        grad[1] = w * (a - 0.5 * e);
        for i in 0..2 {
            for j in 0..2 {
                hess[(i, j)] = w * 0.5;
            }
        }

        // Each term is -ln(-g/s); its derivatives are ∇g/(-g) and
        // ∇g∇gᵀ/g² + ∇²g/(-g).
        let mut add = |g: f64, s: f64, dg: &[(usize, f64)], d2g: &[(usize, f64)]| {
            let r = -g;
            value -= (r / s).ln();
            for &(i, di) in dg {
                grad[i] += di / r;
                for &(j, dj) in dg {
                    hess[(i, j)] += di * dj / (r * r);
                }
            }
            for &(i, d2) in d2g {
                hess[(i, i)] += d2 / r;
            }
        };
        let g = self.constraints(x);
        let (c, p) = (&x[2..2 + n], x[ip]);

        add(g[0], self.g_scale[0], &[(0, -1.0), (ip, -self.kappa / (p * p))], &[(ip, 2.0 * self.kappa / (p * p * p))]);

        let mut dg: Vec<(usize, f64)> = vec![(1, -1.0)];
        let mut d2g = Vec::with_capacity(n);
        for (i, (&s, &ci)) in self.psi.iter().zip(c).enumerate() {
            dg.push((2 + i, -s / (self.kappa * ci * ci)));
            d2g.push((2 + i, 2.0 * s / (self.kappa * ci * ci * ci)));
        }
        add(g[1], self.g_scale[1], &dg, &d2g);

        let mut dg: Vec<(usize, f64)> = (0..n).map(|i| (2 + i, 1.0)).collect();
        dg.push((ip, self.total / (self.p0 * self.p0)));
        add(g[2], self.g_scale[3], &dg, &[]);

        if let Some((wts, _, _)) = &self.sop {
            let dg: Vec<(usize, f64)> = wts.iter().enumerate().map(|(i, &w)| (2 + i, w)).collect();
            add(g[3], self.g_scale[2], &dg, &[]);
        }

        for i in 0..m {
            grad[i] *= self.scale[i];
            for j in 0..m {
                hess[(i, j)] *= self.scale[i] * self.scale[j];
            }
        }
        (value, grad, hess)
    }

    fn barrier_value(&self, x: &[f64], t: f64) -> f64 {
        let g = self.constraints(x);
        let s = [self.g_scale[0], self.g_scale[1], self.g_scale[3], self.g_scale[2]];
        t / self.f0 * self.objective(x) - g.iter().zip(s).map(|(g, s)| (-g / s).ln()).sum::<f64>()
    }

    /// Strictly feasible start near the expansion point: shrink `c`, then
    /// loosen both slacks.
    fn interior_start(&self, at: &ScaPoint) -> Result<Vec<f64>> {
        let n = self.n();
        let mut tau = 1e-4;
        for _ in 0..6 {
            let c: Vec<f64> = at.c.iter().map(|c| c * (1.0 - tau)).collect();
            let mut x = vec![self.kappa / at.p_j * (1.0 + tau), ratio_sum(self.psi, &c) / self.kappa * (1.0 + tau)];
            x.extend(&c);
            x.push(at.p_j);
            debug_assert_eq!(x.len(), n + 3);
            if self.in_domain(&x) {
                return Ok(x);
            }
            tau *= 10.0;
        }
        Err(Error::InnerSolver("expansion point has no strictly feasible neighbourhood".into()))
    }

    fn solve(&self, at: &ScaPoint, tolerance: f64) -> Result<(Vec<f64>, f64)> {
        let mut x = self.interior_start(at)?;
        let m_constraints = if self.sop.is_some() { 4.0 } else { 3.0 };
        let mut t = 1.0;
        for _ in 0..60 {
            let decrement = self.centre(&mut x, t)?;
            let gap = m_constraints / t;
            if gap <= tolerance && decrement <= tolerance {
                return Ok((x, gap.max(decrement)));
            }
            t *= 16.0;
        }
        Err(Error::InnerSolver(format!("barrier did not reach gap {tolerance:e}")))
    }

    /// Damped Newton on the barrier at fixed `t`. Returns the final
    /// Newton decrement `λ²/2`, normalised by `t`.
    fn centre(&self, x: &mut Vec<f64>, t: f64) -> Result<f64> {
        let m = x.len();
        let mut decrement = f64::INFINITY;
        for _ in 0..200 {
            let (phi, grad, hess) = self.barrier(x, t);
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    let ridge = 1e-12 * hess.trace().abs().max(1.0);
                    let reg = hess + DMatrix::identity(m, m) * ridge;
                    match reg.lu().solve(&(-&grad)) {
                        Some(s) => s,
                        None => return Err(Error::InnerSolver("singular Newton system".into())),
                    }
                }
            };
            let slope = grad.dot(&step);
            if !(slope < 0.0) {
                // Only rounding noise is left.
                return Ok(0.0);
            }
            decrement = -0.5 * slope / t;
            if -0.5 * slope <= 1e-12 {
                return Ok(decrement);
            }
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-16 {
                let trial: Vec<f64> = (0..m).map(|i| x[i] + s * step[i] * self.scale[i]).collect();
                if self.in_domain(&trial) && self.barrier_value(&trial, t) <= phi + 0.25 * s * slope {
                    *x = trial;
                    moved = true;
                    break;
                }
                s *= 0.5;
            }
            if !moved {
                return Ok(decrement);
            }
        }
        Ok(decrement)
    }
}

/// Solves the convex subproblem expanded around `at`.
pub fn solve_subproblem(at: &ScaPoint, region: &FeasibleRegion, config: &ScaConfig) -> Result<SubproblemSolution> {
    config.validate()?;
    check_point(at, region)?;
    let sub = Subproblem::new(at, region, config.rebalance)?;
    let (x, gap) = sub.solve(at, config.inner_tolerance)?;
    let n = sub.n();
    let objective = sub.objective(&x);
    let point = ScaPoint { a: x[0] / sub.kappa, b: x[1] * sub.kappa, c: x[2..2 + n].to_vec(), p_j: x[2 + n] };
    Ok(SubproblemSolution { point, objective, gap })
}

fn check_point(at: &ScaPoint, region: &FeasibleRegion) -> Result<()> {
    let n = region.num_hops();
    if at.c.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: at.c.len() });
    }
    let positive = at.a > 0.0 && at.b > 0.0 && at.p_j > 0.0 && at.c.iter().all(|c| *c > 0.0);
    if !positive || !at.a.is_finite() || !at.b.is_finite() {
        return Err(Error::InvalidInput(format!("SCA iterate must be positive, got {at:?}")));
    }
    Ok(())
}

/// One row of the SCA trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaTraceRow {
    pub k: usize,
    /// `Σ ψ_n / P_n`.
    pub objective: f64,
    pub sop_slack: f64,
    pub budget_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub solution: PowerSolution,
    pub point: ScaPoint,
    pub trace: Vec<ScaTraceRow>,
    /// Scaled KKT residual of the original problem at the final point.
    pub kkt_residual: f64,
}

fn trace_row(k: usize, x: &ScaPoint, region: &FeasibleRegion) -> Result<ScaTraceRow> {
    let f = region.is_feasible(&x.powers(), x.p_j)?;
    Ok(ScaTraceRow {
        k,
        objective: x.true_objective(region.route().psi()),
        sop_slack: f.sop_slack,
        budget_slack: f.budget_slack,
    })
}

/// Runs the successive approximation from a feasible point.
pub fn sca_solve(region: &FeasibleRegion, initial: &ScaPoint, config: &ScaConfig) -> Result<ScaOutcome> {
    config.validate()?;
    check_point(initial, region)?;
    let psi = region.route().psi();
    let start = trace_row(0, initial, region)?;
    let budget_tol = 1e-9 * region.total_power();
    let sop_tol = 1e-9 * region.integral_budget().min(1e300);
    let slack_ok = initial.a * initial.p_j >= 1.0 - 1e-9 && initial.b >= ratio_sum(psi, &initial.c) * (1.0 - 1e-9);
    if !(slack_ok && start.sop_slack >= -sop_tol && start.budget_slack >= -budget_tol) {
        return Err(Error::Infeasible(format!("SCA initial point violates the constraints: {start:?}")));
    }

    let mut x = initial.clone().tightened(psi);
    let mut trace = vec![start];
    let mut converged = false;
    for k in 1..=config.max_iterations {
        let next = solve_subproblem(&x, region, config)?.point.tightened(psi);
        let row = trace_row(k, &next, region)?;
        let previous = trace.last().expect("trace starts non-empty").objective;
        if row.objective > previous {
            // The subproblem is only solved to its duality gap; a step that
            // loses ground means there is nothing left to gain.
            converged = true;
            break;
        }
        trace.push(row);
        x = next;
        if previous - row.objective <= config.rho * row.objective {
            converged = true;
            break;
        }
    }

    let powers = x.powers();
    let objective = x.true_objective(psi);
    let feasibility = region.is_feasible(&powers, x.p_j)?;
    let solution = PowerSolution {
        achieved_cop: -(-objective).exp_m1(),
        achieved_sop: region.sop_jamming(&powers, x.p_j)?,
        powers,
        jammer_power: Some(x.p_j),
        feasible: feasibility.feasible,
        converged,
        solver: SolverKind::Sca,
        iterations: trace.len() - 1,
    };
    let kkt_residual = kkt_residual(region, &x.c, x.p_j)?;
    Ok(ScaOutcome { solution, point: x, trace, kkt_residual })
}

/// Scaled KKT residual of `min Σ ψ_n/(c_n P_J)` subject to the SOP and
/// power constraints, at `(c, P_J)`.
///
/// Gradients are taken with respect to `ln c_n` and `ln P_J` and divided by
/// the objective, constraints are normalised by their right-hand sides, and
/// the best non-negative multipliers are fitted by least squares. The
/// result is the largest of the stationarity norm, the complementarity
/// products and the constraint violations.
pub fn kkt_residual(region: &FeasibleRegion, c: &[f64], p_j: f64) -> Result<f64> {
    let n = region.num_hops();
    if c.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: c.len() });
    }
    let psi = region.route().psi();
    let f = ratio_sum(psi, c) / p_j;
    let mut v_f = DVector::zeros(n + 1);
    let mut v_b = DVector::zeros(n + 1);
    let mut v_s = DVector::zeros(n + 1);
    let budget = region.integral_budget();
    let total = region.total_power();
    let sum_c: f64 = c.iter().sum();
    let mut g_total = 0.0;
    for i in 0..n {
        let (g, d) = region.kernel(i).value_and_derivative(c[i])?;
        g_total += g;
        v_f[i] = -psi[i] / (c[i] * p_j) / f;
        v_b[i] = c[i] * p_j / total;
        v_s[i] = if budget.is_finite() { c[i] * d / budget } else { 0.0 };
    }
    v_f[n] = -1.0;
    v_b[n] = p_j * (1.0 + sum_c) / total;
    let g_b = p_j * (1.0 + sum_c) / total - 1.0;
    let g_s = if budget.is_finite() { g_total / budget - 1.0 } else { f64::NEG_INFINITY };

    let residual = |mu: f64, nu: f64| -> f64 {
        let r = &v_f + &v_s * mu + &v_b * nu;
        let comp_s = if mu > 0.0 { mu * g_s.abs() } else { 0.0 };
        r.norm().max(comp_s).max(nu * g_b.abs())
    };
    let fit = |v: &DVector<f64>| -> f64 {
        let vv = v.dot(v);
        if vv > 0.0 {
            (-v_f.dot(v) / vv).max(0.0)
        } else {
            0.0
        }
    };
    let mut best = residual(0.0, 0.0);
    best = best.min(residual(fit(&v_s), 0.0));
    best = best.min(residual(0.0, fit(&v_b)));
    let gram = nalgebra::Matrix2::new(v_s.dot(&v_s), v_s.dot(&v_b), v_b.dot(&v_s), v_b.dot(&v_b));
    if let Some(inv) = gram.try_inverse() {
        let m = inv * nalgebra::Vector2::new(-v_f.dot(&v_s), -v_f.dot(&v_b));
        if m[0] >= 0.0 && m[1] >= 0.0 {
            best = best.min(residual(m[0], m[1]));
        }
    }
    Ok(best.max(g_b).max(if budget.is_finite() { g_s } else { 0.0 }))
}

/// Initial point from the polyblock optimum at jammer power `p_j_seed`,
/// with both slacks taken with equality.
pub fn initial_point_from_polyblock(
    region: &FeasibleRegion,
    p_j_seed: f64,
    config: &PolyblockConfig,
) -> Result<ScaPoint> {
    let out = polyblock_solve(region, p_j_seed, config)?;
    ScaPoint::from_powers(region.route().psi(), &pull_inside(&out.solution.powers), p_j_seed)
}

/// Boundary points can land a rounding error outside once mapped through
/// `c = P/P_J` and back.
fn pull_inside(powers: &[f64]) -> Vec<f64> {
    powers.iter().map(|p| p * (1.0 - 1e-12)).collect()
}

/// Initial point on the boundary along a random direction at a
/// log-uniform jammer power in `[1e-3, 0.99]·P_total`.
pub fn random_initial_point<R: Rng + ?Sized>(region: &FeasibleRegion, rng: &mut R) -> Result<ScaPoint> {
    let total = region.total_power();
    let p_j = (rng.random_range((1e-3f64).ln()..(0.99f64).ln())).exp() * total;
    let dir: Vec<f64> = (0..region.num_hops()).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = dir.iter().sum();
    let vertex: Vec<f64> = dir.iter().map(|d| d / sum * (total - p_j)).collect();
    let r = project_to_boundary(&vertex, region, p_j, 1e-9)?;
    if !(r.delta > 0.0) {
        return Err(Error::Infeasible(format!("no feasible transmit powers at jammer power {p_j}")));
    }
    ScaPoint::from_powers(region.route().psi(), &pull_inside(&r.point), p_j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStart {
    pub best: ScaOutcome,
    /// Seed jammer power of the best run.
    pub seed: f64,
    /// Every run that started, keyed by its seed jammer power.
    pub runs: Vec<(f64, ScaOutcome)>,
}

/// `count` seed jammer powers, log-spaced like the polyblock grid.
pub fn seed_grid(total_power: f64, count: usize) -> Vec<f64> {
    jammer_grid(total_power, count)
}

/// SCA from the polyblock solution at each seed, keeping the best.
pub fn sca_multi_start(
    region: &FeasibleRegion,
    seeds: &[f64],
    sca: &ScaConfig,
    polyblock: &PolyblockConfig,
) -> Result<MultiStart> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("no SCA seeds".into()));
    }
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let start = match initial_point_from_polyblock(region, seed, polyblock) {
            Ok(p) => p,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        runs.push((seed, sca_solve(region, &start, sca)?));
    }
    let (seed, best) = runs
        .iter()
        .min_by(|x, y| x.1.solution.achieved_cop.total_cmp(&y.1.solution.achieved_cop))
        .map(|(s, o)| (*s, o.clone()))
        .ok_or_else(|| Error::Infeasible("no seed admits a feasible start".into()))?;
    Ok(MultiStart { best, seed, runs })
}
