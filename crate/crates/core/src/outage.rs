//! Closed-form connection and secrecy outage probabilities of a multi-hop
//! decode-and-forward route.
//!
//! With unit-mean Rayleigh fading each hop fails independently, so
//! `COP = 1 - exp(-Σ ψ_n / P_n)` with `ψ_n = γ_c d_n^α σ²`. Treating the
//! eavesdropper field seen by each hop as independent and applying the PPP
//! generating functional gives `SOP = 1 - exp(-ω Σ P_n^(2/α))`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{distance, NetworkInstance, Point, SystemParams};

/// Eavesdropper-field constant `ω = (2πλ_e/α) Γ(2/α) (γ_e σ²)^(-2/α)`.
pub fn omega(params: &SystemParams) -> f64 {
    let a = params.alpha;
    2.0 * PI * params.lambda_e / a * libm::tgamma(2.0 / a) * (params.gamma_e * params.sigma2).powf(-2.0 / a)
}

/// Per-hop outage coefficient `ψ = γ_c d^α σ²`.
pub fn psi(params: &SystemParams, hop_distance: f64) -> f64 {
    params.gamma_c * hop_distance.powf(params.alpha) * params.sigma2
}

/// SOP exponent budget `ε = ln(1/(1-ζ))`.
pub fn sop_budget(zeta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidInput(format!("zeta outside (0,1): {zeta}")));
    }
    Ok(-(-zeta).ln_1p())
}

/// `ω` and `ε` for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub omega: f64,
    pub sop_budget: f64,
}

impl DerivedConstants {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { omega: omega(params), sop_budget: sop_budget(params.zeta)? })
    }
}

/// An ordered simple path through the legitimate nodes.
///
/// `nodes` has one more entry than there are hops; hop `n` goes from
/// `nodes[n]` to `nodes[n + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    nodes: Vec<usize>,
    positions: Vec<Point>,
    hop_distances: Vec<f64>,
    psi: Vec<f64>,
}

impl Route {
    /// Route through `nodes` of `instance`.
    pub fn new(instance: &NetworkInstance, nodes: Vec<usize>, params: &SystemParams) -> Result<Self> {
        Self::through(&instance.nodes, nodes, params)
    }

    /// Route through `nodes`, indexing into `all_positions`.
    pub fn through(all_positions: &[Point], nodes: Vec<usize>, params: &SystemParams) -> Result<Self> {
        if let Some(&bad) = nodes.iter().find(|&&i| i >= all_positions.len()) {
            return Err(Error::InvalidInput(format!("node {bad} does not exist")));
        }
        let positions = nodes.iter().map(|&i| all_positions[i]).collect();
        Self::build(nodes, positions, params)
    }

    /// Route visiting `positions` in order, with node ids `0..positions.len()`.
    pub fn from_positions(positions: Vec<Point>, params: &SystemParams) -> Result<Self> {
        let nodes = (0..positions.len()).collect();
        Self::build(nodes, positions, params)
    }

    fn build(nodes: Vec<usize>, positions: Vec<Point>, params: &SystemParams) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("a route needs at least one hop".into()));
        }
        let mut seen = nodes.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("route {nodes:?} repeats a node")));
        }
        let hop_distances: Vec<f64> = positions.windows(2).map(|w| distance(w[0], w[1])).collect();
        if let Some(n) = hop_distances.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::InvalidInput(format!("hop {n} has zero length")));
        }
        let psi = hop_distances.iter().map(|&d| psi(params, d)).collect();
        Ok(Self { nodes, positions, hop_distances, psi })
    }

    pub fn num_hops(&self) -> usize {
        self.psi.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Transmitter of hop `n`.
    pub fn transmitter(&self, n: usize) -> Point {
        self.positions[n]
    }

    /// Receiver of hop `n`.
    pub fn receiver(&self, n: usize) -> Point {
        self.positions[n + 1]
    }

    pub fn hops(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn hop_distances(&self) -> &[f64] {
        &self.hop_distances
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }
}

fn check_powers(expected: usize, powers: &[f64]) -> Result<()> {
    if powers.len() != expected {
        return Err(Error::LengthMismatch { expected, got: powers.len() });
    }
    if let Some(hop) = powers.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::NonPositivePower { hop, power: powers[hop] });
    }
    Ok(())
}

/// `Σ ψ_n / P_n`, the negated log of the end-to-end connection probability.
pub fn cop_exponent(route: &Route, powers: &[f64]) -> Result<f64> {
    check_powers(route.num_hops(), powers)?;
    Ok(route.psi.iter().zip(powers).map(|(s, p)| s / p).sum())
}

/// Connection outage probability.
pub fn cop(route: &Route, powers: &[f64]) -> Result<f64> {
    Ok(-(-cop_exponent(route, powers)?).exp_m1())
}

/// `ω Σ P_n^(2/α)`.
pub fn sop_exponent(route: &Route, powers: &[f64], params: &SystemParams) -> Result<f64> {
    check_powers(route.num_hops(), powers)?;
    let e = 2.0 / params.alpha;
    Ok(omega(params) * powers.iter().map(|p| p.powf(e)).sum::<f64>())
}

/// Secrecy outage probability without jamming.
pub fn sop(route: &Route, powers: &[f64], params: &SystemParams) -> Result<f64> {
    Ok(-(-sop_exponent(route, powers, params)?).exp_m1())
}
