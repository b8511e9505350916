//! Friendly jamming: SOP as a spatial integral and the joint power region.
//!
//! The jammer beamforms artificial noise into the null space of every
//! legitimate receiver, so COP is unaffected while an eavesdropper at `x`
//! intercepts hop `n` with probability `c / (c + F_n(x))`, where
//! `c = P_Tn / P_J` and `F_n(x) = γ_e (d(T_n, x) / d(J, x))^α`. Averaging
//! over the PPP gives `SOP = 1 - exp(-λ_e Σ g_n)` with
//! `g_n(c) = ∫ c / (c + F_n(x)) dx`.
//!
//! `g_n` depends on the powers only through `c`. Each hop therefore gets a
//! [`HopKernel`]: a positive-weight quadrature rule refined once against a
//! log-spaced set of probe ratios and then reused for every evaluation.
//! On that rule `g_n` is exactly concave and increasing in `c`, which the
//! optimizers rely on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Point, Region, SystemParams};
use crate::outage::{sop_budget, Route};
use crate::quadrature::{build_rule, integrate_2d, refined_mesh, Tolerance};

/// Default jammer-plus-transmitters power budget in noise-normalized units.
pub const DEFAULT_TOTAL_POWER: f64 = 1e9;

/// Accuracy and coverage of the per-hop quadrature rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Ratios `c` the frozen rule is refined against. Outside
    /// `[probe_min, probe_max]` evaluation falls back to direct adaptive
    /// integration.
    pub probe_min: f64,
    pub probe_max: f64,
    pub probes_per_decade: usize,
    /// Width in `ln F` of the bins in which nodes are merged into two-point
    /// Gauss rules after refinement; `0` keeps every node.
    pub compress_width: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-7, max_panels: 40_000, probe_min: 1e-7, probe_max: 1e4, probes_per_decade: 2, compress_width: 0.04 }
    }
}

impl QuadratureSpec {
    fn probes(&self) -> Vec<f64> {
        let lo = self.probe_min.log10();
        let hi = self.probe_max.log10();
        let steps = (((hi - lo) * self.probes_per_decade as f64).ceil() as usize).max(1);
        (0..=steps).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / steps as f64)).collect()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.max_panels >= 4
            && self.probe_min > 0.0
            && self.probe_max > self.probe_min
            && self.probe_max.is_finite()
            && self.probes_per_decade >= 1
            && self.compress_width >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid quadrature settings {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JammerConfig {
    pub position: Point,
    /// Budget shared by the jammer and all transmitters.
    pub total_power: f64,
    pub quadrature: QuadratureSpec,
}

impl JammerConfig {
    pub fn new(position: Point, total_power: f64) -> Result<Self> {
        let cfg = Self { position, total_power, quadrature: QuadratureSpec::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            return Err(Error::InvalidInput(format!("total power must be positive, got {}", self.total_power)));
        }
        if !(self.position.x.is_finite() && self.position.y.is_finite()) {
            return Err(Error::InvalidInput("jammer position must be finite".into()));
        }
        self.quadrature.validate()
    }
}

/// `F(x) = γ_e (d_T / d_J)^α`; infinite on the jammer itself.
fn ratio(transmitter: Point, jammer: Point, gamma_e: f64, alpha: f64, x: Point) -> f64 {
    let dt = distance(transmitter, x);
    let dj = distance(jammer, x);
    if dj == 0.0 {
        // On the jammer; if the transmitter is there too the point has
        // measure zero and any finite value will do.
        return if dt == 0.0 { gamma_e } else { f64::INFINITY };
    }
    gamma_e * (dt / dj).powf(alpha)
}

fn intercept(c: f64, f: f64) -> f64 {
    if f.is_infinite() {
        0.0
    } else {
        c / (c + f)
    }
}

fn intercept_slope(c: f64, f: f64) -> f64 {
    if f.is_infinite() {
        0.0
    } else {
        f / ((c + f) * (c + f))
    }
}

/// Starting mesh resolved to a quarter of the transmitter-jammer spacing
/// around both points, where the intercept probability varies fastest.
fn feature_mesh(region: &Region, transmitter: Point, jammer: Point) -> Vec<Region> {
    let side = region.width().max(region.height());
    let min_size = (distance(transmitter, jammer) / 4.0).max(side * 1e-6);
    refined_mesh(region, &[transmitter, jammer], min_size)
}

/// Merges the atoms `(F_i, w_i)` of the measure behind `∫ c / (c + F)`
/// within bins of width `width` in `ln F` into the two-point Gauss rule of
/// each bin. The result is again a positive measure, so every integral
/// stays increasing and concave in `c`. Atoms at `F = ∞` contribute nothing
/// and are dropped.
fn compress(ratios: &[f64], weights: &[f64], width: f64) -> (Vec<f64>, Vec<f64>) {
    let mut atoms: Vec<(f64, f64)> =
        ratios.iter().zip(weights).filter(|(f, _)| f.is_finite()).map(|(&f, &w)| (f, w)).collect();
    if width == 0.0 {
        return atoms.into_iter().unzip();
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let bin = |f: f64| if f > 0.0 { (f.ln() / width).floor() as i64 } else { i64::MIN };
    let mut out_f = Vec::new();
    let mut out_w = Vec::new();
    for group in atoms.chunk_by(|a, b| bin(a.0) == bin(b.0)) {
        let m0: f64 = group.iter().map(|a| a.1).sum();
        let mean = group.iter().map(|a| a.0 * a.1).sum::<f64>() / m0;
        let scale = group.last().map_or(0.0, |a| a.0) - group[0].0;
        if scale <= 1e-12 * mean.abs() || group.len() < 3 {
            if group.len() < 3 {
                for &(f, w) in group {
                    out_f.push(f);
                    out_w.push(w);
                }
            } else {
                out_f.push(mean);
                out_w.push(m0);
            }
            continue;
        }
        // Centred, scaled moments; the monic orthogonal quadratic is
        // x² - a x - b with b = μ2/μ0 and a = μ3/μ2.
        let (mut m2, mut m3) = (0.0, 0.0);
        for &(f, w) in group {
            let x = (f - mean) / scale;
            m2 += w * x * x;
            m3 += w * x * x * x;
        }
        let (a, b) = (m3 / m2, m2 / m0);
        let disc = (a * a + 4.0 * b).sqrt();
        let (x1, x2) = ((a - disc) / 2.0, (a + disc) / 2.0);
        let w1 = m0 * x2 / (x2 - x1);
        for (x, w) in [(x1, w1), (x2, m0 - w1)] {
            out_f.push(mean + x * scale);
            out_w.push(w);
        }
    }
    (out_f, out_w)
}

/// `g_n` as a function of `c = P_Tn / P_J` for a single hop.
#[derive(Debug, Clone)]
pub struct HopKernel {
    transmitter: Point,
    jammer: Point,
    region: Region,
    gamma_e: f64,
    alpha: f64,
    spec: QuadratureSpec,
    ratios: Vec<f64>,
    weights: Vec<f64>,
}

impl HopKernel {
    pub fn new(transmitter: Point, jammer: Point, region: Region, params: &SystemParams, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let (gamma_e, alpha) = (params.gamma_e, params.alpha);
        let probes = spec.probes();
        let family = |x: Point, out: &mut [f64]| {
            let f = ratio(transmitter, jammer, gamma_e, alpha, x);
            for (o, &c) in out.iter_mut().zip(&probes) {
                *o = intercept(c, f);
            }
        };
        let tol = Tolerance { rel: spec.rel_tol, abs: 0.0 };
        let mesh = feature_mesh(&region, transmitter, jammer);
        let rule = build_rule(family, probes.len(), &mesh, tol, spec.max_panels)?;
        let ratios: Vec<f64> = rule.points.iter().map(|&x| ratio(transmitter, jammer, gamma_e, alpha, x)).collect();
        let (ratios, weights) = compress(&ratios, &rule.weights, spec.compress_width);
        Ok(Self { transmitter, jammer, region, gamma_e, alpha, spec, ratios, weights })
    }

    pub fn nodes(&self) -> usize {
        self.ratios.len()
    }

    fn in_range(&self, c: f64) -> bool {
        c >= self.spec.probe_min && c <= self.spec.probe_max
    }

    fn direct(&self, integrand: impl Fn(f64) -> f64) -> Result<f64> {
        let (t, j, g, a) = (self.transmitter, self.jammer, self.gamma_e, self.alpha);
        let tol = Tolerance { rel: self.spec.rel_tol, abs: 1e-14 * self.region.area() };
        let est = integrate_2d(|x| integrand(ratio(t, j, g, a, x)), &feature_mesh(&self.region, t, j), tol, self.spec.max_panels)?;
        Ok(est.value)
    }

    fn check(c: f64) -> Result<()> {
        if c > 0.0 && c.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("power ratio must be positive and finite, got {c}")))
        }
    }

    /// `g_n(c)` in m².
    pub fn value(&self, c: f64) -> Result<f64> {
        Self::check(c)?;
        if !self.in_range(c) {
            return self.direct(|f| intercept(c, f));
        }
        Ok(self.ratios.iter().zip(&self.weights).map(|(&f, &w)| w * intercept(c, f)).sum())
    }

    /// `dg_n/dc = ∫ F / (c + F)²`.
    pub fn derivative(&self, c: f64) -> Result<f64> {
        Self::check(c)?;
        if !self.in_range(c) {
            return self.direct(|f| intercept_slope(c, f));
        }
        Ok(self.ratios.iter().zip(&self.weights).map(|(&f, &w)| w * intercept_slope(c, f)).sum())
    }

    pub fn value_and_derivative(&self, c: f64) -> Result<(f64, f64)> {
        Self::check(c)?;
        if !self.in_range(c) {
            return Ok((self.value(c)?, self.derivative(c)?));
        }
        let mut v = 0.0;
        let mut d = 0.0;
        for (&f, &w) in self.ratios.iter().zip(&self.weights) {
            v += w * intercept(c, f);
            d += w * intercept_slope(c, f);
        }
        Ok((v, d))
    }
}

/// Slack of both joint constraints; feasible when both are non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// `ε/λ_e - Σ g_n`.
    pub sop_slack: f64,
    /// `P_total - P_J - Σ P_n`.
    pub budget_slack: f64,
}

/// Powers `(P_1..P_N)` admissible at a given jammer power.
#[derive(Debug, Clone)]
pub struct FeasibleRegion {
    route: Route,
    jammer: JammerConfig,
    params: SystemParams,
    eve_region: Region,
    integral_budget: f64,
    kernels: Vec<HopKernel>,
}

impl FeasibleRegion {
    /// `λ_e = 0` is accepted and describes a network with no eavesdroppers.
    pub fn new(route: Route, jammer: JammerConfig, params: SystemParams, eve_region: Region) -> Result<Self> {
        jammer.validate()?;
        if params.lambda_e == 0.0 {
            params.with_lambda_e(1.0).validate()?;
        } else {
            params.validate()?;
        }
        let integral_budget = sop_budget(params.zeta)? / params.lambda_e;
        let kernels = (0..route.num_hops())
            .map(|n| HopKernel::new(route.transmitter(n), jammer.position, eve_region, &params, jammer.quadrature))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { route, jammer, params, eve_region, integral_budget, kernels })
    }

    pub fn route(&self) -> &Route {
        &self.route
    }

    pub fn jammer(&self) -> &JammerConfig {
        &self.jammer
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn eve_region(&self) -> &Region {
        &self.eve_region
    }

    pub fn num_hops(&self) -> usize {
        self.kernels.len()
    }

    pub fn total_power(&self) -> f64 {
        self.jammer.total_power
    }

    /// Right-hand side `ε/λ_e` of the SOP constraint.
    pub fn integral_budget(&self) -> f64 {
        self.integral_budget
    }

    pub fn kernel(&self, hop: usize) -> &HopKernel {
        &self.kernels[hop]
    }

    pub fn kernels(&self) -> &[HopKernel] {
        &self.kernels
    }

    fn check(&self, powers: &[f64], p_j: f64) -> Result<()> {
        if powers.len() != self.num_hops() {
            return Err(Error::LengthMismatch { expected: self.num_hops(), got: powers.len() });
        }
        if let Some((hop, &power)) = powers.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
            return Err(Error::NonPositivePower { hop, power });
        }
        if !(p_j > 0.0) {
            return Err(Error::InvalidInput(format!("jammer power must be positive, got {p_j}")));
        }
        Ok(())
    }

    /// `g_n` at transmit power `p_t` and jammer power `p_j`.
    pub fn g_n(&self, hop: usize, p_t: f64, p_j: f64) -> Result<f64> {
        if !(p_t > 0.0) {
            return Err(Error::NonPositivePower { hop, power: p_t });
        }
        if !(p_j > 0.0) {
            return Err(Error::InvalidInput(format!("jammer power must be positive, got {p_j}")));
        }
        self.kernels[hop].value(p_t / p_j)
    }

    pub fn g_sum(&self, powers: &[f64], p_j: f64) -> Result<f64> {
        self.check(powers, p_j)?;
        powers.iter().zip(&self.kernels).map(|(&p, k)| k.value(p / p_j)).sum()
    }

    /// Secrecy outage probability with jamming.
    pub fn sop_jamming(&self, powers: &[f64], p_j: f64) -> Result<f64> {
        let g = self.g_sum(powers, p_j)?;
        Ok(-(-self.params.lambda_e * g).exp_m1())
    }

    pub fn is_feasible(&self, powers: &[f64], p_j: f64) -> Result<Feasibility> {
        let g = self.g_sum(powers, p_j)?;
        let sop_slack = self.integral_budget - g;
        let budget_slack = self.jammer.total_power - p_j - powers.iter().sum::<f64>();
        Ok(Feasibility { feasible: sop_slack >= 0.0 && budget_slack >= 0.0, sop_slack, budget_slack })
    }
}

/// Free-function form of [`FeasibleRegion::g_n`].
pub fn g_n(hop: usize, p_t: f64, p_j: f64, region: &FeasibleRegion) -> Result<f64> {
    region.g_n(hop, p_t, p_j)
}

/// Free-function form of [`FeasibleRegion::sop_jamming`].
pub fn sop_jamming(powers: &[f64], p_j: f64, region: &FeasibleRegion) -> Result<f64> {
    region.sop_jamming(powers, p_j)
}
