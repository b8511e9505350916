//! Optimal per-hop transmit powers for a fixed route under a secrecy outage
//! budget, without jamming.
//!
//! Substituting `t_n = P_n^(2/α)` turns the problem into minimising
//! `Σ ψ_n t_n^(-α/2)` over the hyperplane `ω Σ t_n = ε`, which is convex.
//! Its stationary point is
//! `t_n = ψ_n^(2/(α+2)) / ((ω/ε) Σ_k ψ_k^(2/(2+α)))`, always strictly positive.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::SystemParams;
use crate::outage::{cop, DerivedConstants, Route};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    ClosedForm,
    EqualPower,
    Polyblock,
    Sca,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::ClosedForm => "closed_form",
            SolverKind::EqualPower => "equal_power",
            SolverKind::Polyblock => "polyblock",
            SolverKind::Sca => "sca",
        }
    }
}

/// Per-hop powers (σ²-normalised) with the outage figures they achieve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSolution {
    pub powers: Vec<f64>,
    pub jammer_power: Option<f64>,
    pub achieved_cop: f64,
    pub achieved_sop: f64,
    pub feasible: bool,
    pub converged: bool,
    pub solver: SolverKind,
    pub iterations: usize,
}

impl PowerSolution {
    /// Mean legitimate transmit power `(1/N) Σ P_n`.
    pub fn average_power(&self) -> f64 {
        self.powers.iter().sum::<f64>() / self.powers.len() as f64
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum::<f64>() + self.jammer_power.unwrap_or(0.0)
    }
}

/// Routing weight sum `Σ ψ_n^(2/(2+α))`.
pub fn weight_sum(route: &Route, alpha: f64) -> f64 {
    let e = 2.0 / (2.0 + alpha);
    route.psi().iter().map(|s| s.powf(e)).sum()
}

/// Closed-form COP-minimising powers. The SOP constraint is active at the
/// result, so `achieved_sop` equals ζ up to rounding.
pub fn allocate_powers(route: &Route, constants: &DerivedConstants, alpha: f64) -> Result<PowerSolution> {
    let DerivedConstants { omega, sop_budget } = *constants;
    let scale = omega / sop_budget * weight_sum(route, alpha);
    let e = 2.0 / (2.0 + alpha);
    let powers: Vec<f64> = route
        .psi()
        .iter()
        .map(|s| (s.powf(e) / scale).powf(alpha / 2.0))
        .collect();
    let sop_exp = omega * powers.iter().map(|p| p.powf(2.0 / alpha)).sum::<f64>();
    Ok(PowerSolution {
        achieved_cop: cop(route, &powers)?,
        achieved_sop: -(-sop_exp).exp_m1(),
        powers,
        jammer_power: None,
        feasible: true,
        converged: true,
        solver: SolverKind::ClosedForm,
        iterations: 0,
    })
}

/// `1 - exp(-(ω/ε)^(α/2) (Σ ψ_n^(2/(2+α)))^(α/2+1))`, the COP reached by
/// [`allocate_powers`].
pub fn min_cop_for_route(route: &Route, constants: &DerivedConstants, alpha: f64) -> f64 {
    let w = weight_sum(route, alpha);
    let x = (constants.omega / constants.sop_budget).powf(alpha / 2.0) * w.powf(alpha / 2.0 + 1.0);
    -(-x).exp_m1()
}

/// Identical powers on every hop, summing to `total_power`.
pub fn equal_powers(route: &Route, total_power: f64, params: &SystemParams) -> Result<PowerSolution> {
    let n = route.num_hops();
    let powers = vec![total_power / n as f64; n];
    let achieved_sop = crate::outage::sop(route, &powers, params)?;
    Ok(PowerSolution {
        achieved_cop: cop(route, &powers)?,
        feasible: achieved_sop <= params.zeta,
        achieved_sop,
        powers,
        jammer_power: None,
        converged: true,
        solver: SolverKind::EqualPower,
        iterations: 0,
    })
}
