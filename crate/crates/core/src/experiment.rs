//! Batch experiments over random layouts: configuration, parameter sweeps
//! and CSV output.
//!
//! Layout `i` is drawn from its own substream, so every sweep value sees
//! the same layouts (for ζ and λ_e sweeps) and rows never depend on the
//! order in which they are produced.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hasher;
use std::io::Write;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{db_to_linear, substream, NetworkInstance, PairSelection, Point, Region, Stream, SystemParams};
use crate::jamming::{FeasibleRegion, JammerConfig, QuadratureSpec, DEFAULT_TOTAL_POWER};
use crate::montecarlo::{covering_region, simulate_cop, simulate_sop, simulate_sop_jamming, SimOptions, SimReport};
use crate::outage::{DerivedConstants, Route};
use crate::polyblock::{jammer_grid, solve_with_jammer_search, PolyblockConfig};
use crate::power::{allocate_powers, equal_powers, PowerSolution};
use crate::routing::{find_optimal_route, WeightedGraph};
use crate::sca::{sca_multi_start, seed_grid, ScaConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Channel parameters as written in a config file, thresholds in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub alpha: f64,
    pub sigma2: f64,
    pub gamma_c_db: f64,
    pub gamma_e_db: f64,
    pub lambda_e: f64,
    pub zeta: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { alpha: 4.0, sigma2: 1.0, gamma_c_db: 0.8, gamma_e_db: 0.0, lambda_e: 1e-4, zeta: 0.5 }
    }
}

impl ParamsConfig {
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            alpha: self.alpha,
            sigma2: self.sigma2,
            gamma_c: db_to_linear(self.gamma_c_db),
            gamma_e: db_to_linear(self.gamma_e_db),
            lambda_e: self.lambda_e,
            zeta: self.zeta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Number of legitimate nodes `M`.
    pub nodes: usize,
    /// Side of the square node area, centred at the origin.
    pub node_side: f64,
    /// Side of the square eavesdropper area.
    pub eve_side: f64,
    /// Centre of the eavesdropper area relative to the node area.
    pub eve_offset: [f64; 2],
    pub pair: PairSelection,
    pub max_link_distance: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { nodes: 10, node_side: 20.0, eve_side: 400.0, eve_offset: [0.0, 0.0], pair: PairSelection::Farthest, max_link_distance: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JammerSection {
    /// Defaults to the centre of the node area.
    pub position: Option<[f64; 2]>,
    pub total_power: f64,
    pub quadrature: QuadratureSpec,
}

impl Default for JammerSection {
    fn default() -> Self {
        Self { position: None, total_power: DEFAULT_TOTAL_POWER, quadrature: QuadratureSpec::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    /// Closed-form allocation without jamming.
    #[default]
    Closed,
    /// Polyblock at every point of a jammer-power grid.
    Polyblock,
    /// Multi-start successive convex approximation.
    Sca,
}

impl SolverChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverChoice::Closed => "closed",
            SolverChoice::Polyblock => "polyblock",
            SolverChoice::Sca => "sca",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: SolverChoice,
    pub jam: bool,
    /// Jammer powers searched by the polyblock solver.
    pub grid_points: usize,
    /// SCA initial points.
    pub starts: usize,
    /// Polyblock iteration cap when building SCA initial points.
    pub seed_iterations: usize,
    pub polyblock: PolyblockConfig,
    pub sca: ScaConfig,
    /// Treat a non-converged solver as a failure of the run.
    pub strict: bool,
    /// Transmit powers above this are reported as warnings.
    pub power_warning: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kind: SolverChoice::Closed,
            jam: false,
            grid_points: 100,
            starts: 20,
            seed_iterations: 10_000,
            polyblock: PolyblockConfig::default(),
            sca: ScaConfig::default(),
            strict: false,
            power_warning: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Zeta,
    LambdaE,
    #[serde(alias = "m")]
    Nodes,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::Zeta => "zeta",
            SweepVariable::LambdaE => "lambda_e",
            SweepVariable::Nodes => "nodes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// One row per layout with the configured solver.
    #[default]
    Standard,
    /// Equal powers, closed-form powers and jamming on the same route.
    Schemes,
    /// Histogram of hop counts.
    Hops,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::Standard => "standard",
            SweepMode::Schemes => "schemes",
            SweepMode::Hops => "hops",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    #[serde(default)]
    pub mode: SweepMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Random layouts per sweep value.
    pub layouts: usize,
    /// Monte Carlo trials per row; 0 skips simulation.
    pub trials: u64,
    pub output: Option<PathBuf>,
    pub params: ParamsConfig,
    pub geometry: GeometryConfig,
    pub jammer: JammerSection,
    pub solver: SolverConfig,
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            layouts: 100,
            trials: 10_000,
            output: None,
            params: ParamsConfig::default(),
            geometry: GeometryConfig::default(),
            jammer: JammerSection::default(),
            solver: SolverConfig::default(),
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config { field: "<file>".into(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { field: "<file>".into(), message: format!("{}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// 64-bit FNV-1a of the canonical TOML form, ignoring the output path.
    pub fn hash(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(Self { output: None, ..self.clone() }.to_toml().as_bytes());
        h.finish()
    }

    fn node_region(&self) -> Result<Region> {
        Region::square(Point::default(), self.geometry.node_side)
    }

    fn eve_region(&self) -> Result<Region> {
        let [x, y] = self.geometry.eve_offset;
        Region::square(Point::new(x, y), self.geometry.eve_side)
    }

    fn jammer_position(&self) -> Result<Point> {
        Ok(match self.jammer.position {
            Some([x, y]) => Point::new(x, y),
            None => self.node_region()?.center(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

/// Schema and range checks. Never fails; problems come back as diagnostics.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut error = |field: &str, message: String| {
        out.push(Diagnostic { severity: Severity::Error, field: field.into(), message });
    };
    let p = &config.params;
    let zeta_ok = |z: f64| z > 0.0 && z < 1.0;
    if !zeta_ok(p.zeta) {
        error("params.zeta", format!("zeta outside (0,1): {}", p.zeta));
    }
    if !(p.lambda_e > 0.0 && p.lambda_e.is_finite()) {
        error("params.lambda_e", format!("lambda_e must be positive, got {}", p.lambda_e));
    }
    if !(p.alpha > 2.0 && p.alpha.is_finite()) {
        error("params.alpha", format!("alpha must exceed 2, got {}", p.alpha));
    }
    if !(p.sigma2 > 0.0 && p.sigma2.is_finite()) {
        error("params.sigma2", format!("sigma2 must be positive, got {}", p.sigma2));
    }
    for (name, v) in [("params.gamma_c_db", p.gamma_c_db), ("params.gamma_e_db", p.gamma_e_db)] {
        if !v.is_finite() {
            error(name, format!("threshold must be finite, got {v}"));
        }
    }
    let g = &config.geometry;
    if g.nodes < 2 {
        error("geometry.nodes", format!("need at least 2 nodes, got {}", g.nodes));
    }
    for (name, v) in [("geometry.node_side", g.node_side), ("geometry.eve_side", g.eve_side)] {
        if !(v > 0.0 && v.is_finite()) {
            error(name, format!("side must be positive, got {v}"));
        }
    }
    if let PairSelection::Fixed { source, destination } = g.pair {
        if source == destination || source.max(destination) >= g.nodes {
            error("geometry.pair", format!("invalid source/destination ({source}, {destination}) for {} nodes", g.nodes));
        }
    }
    if g.max_link_distance.is_some_and(|d| !(d > 0.0)) {
        error("geometry.max_link_distance", "must be positive".into());
    }
    if !(config.jammer.total_power > 0.0 && config.jammer.total_power.is_finite()) {
        error("jammer.total_power", format!("must be positive, got {}", config.jammer.total_power));
    }
    if config.layouts == 0 {
        error("layouts", "at least one layout is required".into());
    }
    let s = &config.solver;
    match (s.kind, s.jam) {
        (SolverChoice::Closed, true) => error("solver.kind", "jamming needs the polyblock or sca solver".into()),
        (SolverChoice::Polyblock | SolverChoice::Sca, false) => {
            error("solver.jam", format!("solver `{}` only applies with jamming", s.kind.as_str()))
        }
        _ => {}
    }
    if s.grid_points == 0 {
        error("solver.grid_points", "must be positive".into());
    }
    if s.starts == 0 {
        error("solver.starts", "must be positive".into());
    }
    if !(s.polyblock.eta > 0.0 && s.polyblock.vertex_floor > 0.0 && s.polyblock.tolerance > 0.0) {
        error("solver.polyblock", "eta, vertex_floor and tolerance must be positive".into());
    }
    if !(s.sca.rho > 0.0 && s.sca.inner_tolerance > 0.0 && s.sca.max_iterations > 0) {
        error("solver.sca", "rho, inner_tolerance and max_iterations must be positive".into());
    }
    if let Some(sweep) = &config.sweep {
        if sweep.values.is_empty() {
            error("sweep.values", "no sweep values".into());
        }
        for &v in &sweep.values {
            match sweep.variable {
                SweepVariable::Zeta if !zeta_ok(v) => error("sweep.values", format!("zeta outside (0,1): {v}")),
                SweepVariable::LambdaE if !(v > 0.0 && v.is_finite()) => {
                    error("sweep.values", format!("lambda_e must be positive, got {v}"))
                }
                SweepVariable::Nodes if !(v >= 2.0 && v.fract() == 0.0 && v <= 1e6) => {
                    error("sweep.values", format!("node count must be an integer >= 2, got {v}"))
                }
                _ => {}
            }
        }
        if sweep.mode == SweepMode::Schemes && !s.jam {
            error("sweep.mode", "scheme comparison needs jamming enabled (solver.jam = true)".into());
        }
    }

    let mut warn = |field: &str, message: String| {
        out.push(Diagnostic { severity: Severity::Warning, field: field.into(), message });
    };
    if config.trials > 10_000_000 {
        warn("trials", format!("{} Monte Carlo trials per row will be slow", config.trials));
    } else if config.trials > 0 && config.trials < 100 {
        warn("trials", format!("{} Monte Carlo trials give very coarse estimates", config.trials));
    }
    if g.eve_side > 10_000.0 {
        warn("geometry.eve_side", format!("eavesdropper area of side {} m makes the jamming quadrature expensive", g.eve_side));
    }
    if config.jammer.quadrature.max_panels > 1_000_000 || config.jammer.quadrature.rel_tol < 1e-10 {
        warn("jammer.quadrature", "very fine quadrature settings will be slow".into());
    }
    let node_half = 0.5 * g.node_side;
    let eve_half = 0.5 * g.eve_side;
    if g.eve_offset[0].abs() + node_half > eve_half || g.eve_offset[1].abs() + node_half > eve_half {
        warn("geometry.eve_offset", "node area is not inside the eavesdropper area".into());
    }
    out
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

/// Parameters and node count at one sweep value.
fn at_value(config: &ExperimentConfig, variable: Option<SweepVariable>, value: f64) -> (SystemParams, usize) {
    let mut params = config.params.to_params();
    let mut nodes = config.geometry.nodes;
    match variable {
        Some(SweepVariable::Zeta) => params.zeta = value,
        Some(SweepVariable::LambdaE) => params.lambda_e = value,
        Some(SweepVariable::Nodes) => nodes = value as usize,
        None => {}
    }
    (params, nodes)
}

/// Layout `index` with `nodes` nodes.
pub fn layout(config: &ExperimentConfig, nodes: usize, index: usize) -> Result<NetworkInstance> {
    let mut rng = substream(config.seed, Stream::Layout, index as u64);
    NetworkInstance::random(&mut rng, nodes, config.node_region()?, config.eve_region()?, config.geometry.pair)
}

/// Minimum-weight route and its closed-form powers.
pub fn secure_route(
    instance: &NetworkInstance,
    params: &SystemParams,
    max_link_distance: Option<f64>,
) -> Result<(Route, PowerSolution)> {
    let graph = WeightedGraph::new(instance.nodes.clone(), *params, max_link_distance);
    let route = find_optimal_route(&graph, instance.source, instance.destination)?;
    let solution = allocate_powers(&route, &DerivedConstants::new(params)?, params.alpha)?;
    Ok((route, solution))
}

/// Jamming region for a route under the configured jammer.
pub fn jamming_region(config: &ExperimentConfig, route: &Route, params: &SystemParams) -> Result<FeasibleRegion> {
    let jammer = JammerConfig {
        position: config.jammer_position()?,
        total_power: config.jammer.total_power,
        quadrature: config.jammer.quadrature,
    };
    FeasibleRegion::new(route.clone(), jammer, *params, config.eve_region()?)
}

/// Transmit and jammer powers from the configured jamming solver.
pub fn solve_jamming(config: &ExperimentConfig, region: &FeasibleRegion) -> Result<PowerSolution> {
    let s = &config.solver;
    match s.kind {
        SolverChoice::Polyblock => {
            let grid = jammer_grid(region.total_power(), s.grid_points);
            Ok(solve_with_jammer_search(region, &grid, &s.polyblock)?.best.solution)
        }
        SolverChoice::Sca => {
            let seeds = seed_grid(region.total_power(), s.starts);
            let poly = PolyblockConfig { max_iterations: s.seed_iterations, ..s.polyblock };
            Ok(sca_multi_start(region, &seeds, &s.sca, &poly)?.best.solution)
        }
        SolverChoice::Closed => Err(Error::Config { field: "solver.kind".into(), message: "no jamming solver selected".into() }),
    }
}

fn row_seed(seed: u64, value_index: usize, layout: usize) -> u64 {
    let mut h = FnvHasher::default();
    h.write_u64(seed);
    h.write_u64(value_index as u64);
    h.write_u64(layout as u64);
    h.finish()
}

fn route_hash(nodes: &[usize]) -> u64 {
    let mut h = FnvHasher::default();
    for &n in nodes {
        h.write_u64(n as u64);
    }
    h.finish()
}

/// Smallest rectangle holding both regions.
fn hull(a: &Region, b: &Region) -> Result<Region> {
    Region::new(a.x_min.min(b.x_min), a.x_max.max(b.x_max), a.y_min.min(b.y_min), a.y_max.max(b.y_max))
}

/// Simulated COP and SOP of one solution. Without jamming the
/// eavesdropper area is widened until truncation is negligible, since the
/// closed form integrates over the whole plane.
fn simulate(
    config: &ExperimentConfig,
    route: &Route,
    solution: &PowerSolution,
    params: &SystemParams,
    seed: u64,
) -> Result<(SimReport, SimReport)> {
    let trials = config.trials;
    let cop = simulate_cop(route, &solution.powers, params, trials, seed)?;
    let opts = SimOptions { trials, seed, resample_per_hop: true, include_noise: false };
    let eve = config.eve_region()?;
    let sop = match solution.jammer_power {
        Some(p_j) => simulate_sop_jamming(route, &solution.powers, config.jammer_position()?, p_j, params, &eve, &opts)?,
        None => {
            let region = hull(&eve, &covering_region(route, &solution.powers, params)?)?;
            simulate_sop(route, &solution.powers, params, &region, &opts)?
        }
    };
    Ok((cop, sop))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardRow {
    pub value: f64,
    pub layout: usize,
    pub route: Vec<usize>,
    pub solution: Option<PowerSolution>,
    pub mc_cop: Option<SimReport>,
    pub mc_sop: Option<SimReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRow {
    pub value: f64,
    pub layout: usize,
    pub route: Vec<usize>,
    /// Equal powers with the same sum as `b`.
    pub a: Option<PowerSolution>,
    /// Closed-form powers.
    pub b: Option<PowerSolution>,
    /// Jamming.
    pub c: Option<PowerSolution>,
    /// Simulated COP of `a`, `b`, `c`.
    pub mc_cop: Option<[SimReport; 3]>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopCount {
    pub value: f64,
    pub hops: usize,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Results {
    Standard(Vec<StandardRow>),
    Schemes(Vec<SchemeRow>),
    Hops(Vec<HopCount>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub seed: u64,
    pub config_hash: u64,
    pub mode: SweepMode,
    pub variable: Option<SweepVariable>,
    pub results: Results,
    /// Rows whose solver stopped without meeting its tolerance.
    pub nonconverged: usize,
    /// Rows that failed outright.
    pub failures: usize,
    pub warnings: Vec<String>,
}

/// Runs the configured experiment. Solver failures are recorded per row
/// and the run continues.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let diagnostics = validate(config);
    if let Some(d) = diagnostics.iter().find(|d| d.severity == Severity::Error) {
        return Err(Error::Config { field: d.field.clone(), message: d.message.clone() });
    }
    let (variable, values, mode) = match &config.sweep {
        Some(s) => (Some(s.variable), s.values.clone(), s.mode),
        None => (None, vec![f64::NAN], SweepMode::Standard),
    };
    let mut warnings = Vec::new();
    let mut nonconverged = 0;
    let mut failures = 0;
    let results = match mode {
        SweepMode::Standard => {
            let rows: Vec<StandardRow> =
                cells(&values, config.layouts).map(|(vi, value, i)| standard_row(config, variable, vi, value, i)).collect();
            for row in &rows {
                if let Some(sol) = &row.solution {
                    nonconverged += usize::from(!sol.converged);
                    check_powers(config, row.value, row.layout, sol, &mut warnings);
                }
                failures += usize::from(row.error.is_some());
            }
            Results::Standard(rows)
        }
        SweepMode::Schemes => {
            let rows: Vec<SchemeRow> =
                cells(&values, config.layouts).map(|(vi, value, i)| scheme_row(config, variable, vi, value, i)).collect();
            for row in &rows {
                if let Some(sol) = &row.c {
                    nonconverged += usize::from(!sol.converged);
                }
                failures += usize::from(row.error.is_some());
            }
            Results::Schemes(rows)
        }
        SweepMode::Hops => {
            let mut rows = Vec::new();
            for &value in &values {
                let (params, nodes) = at_value(config, variable, value);
                let hops: Vec<Option<usize>> = (0..config.layouts)
                    .into_par_iter()
                    .map(|i| {
                        let inst = layout(config, nodes, i).ok()?;
                        secure_route(&inst, &params, config.geometry.max_link_distance).ok().map(|(r, _)| r.num_hops())
                    })
                    .collect();
                let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
                let mut done = 0;
                for h in hops {
                    match h {
                        Some(h) => {
                            *counts.entry(h).or_default() += 1;
                            done += 1;
                        }
                        None => failures += 1,
                    }
                }
                rows.extend(counts.into_iter().map(|(hops, count)| HopCount {
                    value,
                    hops,
                    count,
                    fraction: count as f64 / done.max(1) as f64,
                }));
            }
            Results::Hops(rows)
        }
    };
    Ok(RunOutput { seed: config.seed, config_hash: config.hash(), mode, variable, results, nonconverged, failures, warnings })
}

/// Every (sweep value, layout) pair, in output order, processed in parallel.
fn cells(values: &[f64], layouts: usize) -> impl IndexedParallelIterator<Item = (usize, f64, usize)> + '_ {
    (0..values.len() * layouts).into_par_iter().map(move |k| (k / layouts, values[k / layouts], k % layouts))
}

fn check_powers(config: &ExperimentConfig, value: f64, layout: usize, sol: &PowerSolution, warnings: &mut Vec<String>) {
    let bound = config.solver.power_warning;
    if let Some(p) = sol.powers.iter().cloned().find(|&p| p > bound) {
        warnings.push(format!("value {value}, layout {layout}: transmit power {p:e} exceeds {bound:e}"));
    }
}

fn standard_row(config: &ExperimentConfig, variable: Option<SweepVariable>, vi: usize, value: f64, i: usize) -> StandardRow {
    let mut row = StandardRow { value, layout: i, route: Vec::new(), solution: None, mc_cop: None, mc_sop: None, error: None };
    let result = (|| -> Result<()> {
        let (params, nodes) = at_value(config, variable, value);
        let inst = layout(config, nodes, i)?;
        let (route, closed) = secure_route(&inst, &params, config.geometry.max_link_distance)?;
        row.route = route.nodes().to_vec();
        let solution = if config.solver.jam {
            let region = jamming_region(config, &route, &params)?;
            solve_jamming(config, &region)?
        } else {
            closed
        };
        if config.trials > 0 {
            let (c, s) = simulate(config, &route, &solution, &params, row_seed(config.seed, vi, i))?;
            row.mc_cop = Some(c);
            row.mc_sop = Some(s);
        }
        row.solution = Some(solution);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

fn scheme_row(config: &ExperimentConfig, variable: Option<SweepVariable>, vi: usize, value: f64, i: usize) -> SchemeRow {
    let mut row = SchemeRow { value, layout: i, route: Vec::new(), a: None, b: None, c: None, mc_cop: None, error: None };
    let result = (|| -> Result<()> {
        let (params, nodes) = at_value(config, variable, value);
        let inst = layout(config, nodes, i)?;
        let (route, b) = secure_route(&inst, &params, config.geometry.max_link_distance)?;
        row.route = route.nodes().to_vec();
        let a = equal_powers(&route, b.powers.iter().sum(), &params)?;
        let region = jamming_region(config, &route, &params)?;
        let c = solve_jamming(config, &region)?;
        if config.trials > 0 {
            let seed = row_seed(config.seed, vi, i);
            let sim = |s: &PowerSolution| simulate_cop(&route, &s.powers, &params, config.trials, seed);
            row.mc_cop = Some([sim(&a)?, sim(&b)?, sim(&c)?]);
        }
        row.a = Some(a);
        row.b = Some(b);
        row.c = Some(c);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

fn joined<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

impl RunOutput {
    /// Writes the metadata block (lines starting with `#`) and the table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
        writeln!(out, "# secroute {VERSION}").map_err(io)?;
        writeln!(out, "# seed = {}", self.seed).map_err(io)?;
        writeln!(out, "# config_hash = {:016x}", self.config_hash).map_err(io)?;
        writeln!(out, "# mode = {}", self.mode.as_str()).map_err(io)?;
        if let Some(v) = self.variable {
            writeln!(out, "# variable = {}", v.as_str()).map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("write failed: {e}"));
        let var = self.variable.map_or("", SweepVariable::as_str).to_string();
        match &self.results {
            Results::Standard(rows) => {
                w.write_record([
                    "variable", "value", "layout", "route_hash", "hops", "route", "powers", "jammer_power", "cop", "sop",
                    "average_power", "mc_cop", "mc_cop_se", "mc_sop", "mc_sop_se", "solver", "converged", "feasible", "error",
                ])
                .map_err(csv_err)?;
                for r in rows {
                    let s = r.solution.as_ref();
                    w.write_record([
                        var.clone(),
                        num(r.value),
                        r.layout.to_string(),
                        format!("{:016x}", route_hash(&r.route)),
                        if r.route.is_empty() { String::new() } else { (r.route.len() - 1).to_string() },
                        joined(&r.route, "-"),
                        s.map_or_else(String::new, |s| joined(&s.powers, ";")),
                        opt_num(s.and_then(|s| s.jammer_power)),
                        opt_num(s.map(|s| s.achieved_cop)),
                        opt_num(s.map(|s| s.achieved_sop)),
                        opt_num(s.map(|s| s.average_power())),
                        opt_num(r.mc_cop.map(|m| m.estimate)),
                        opt_num(r.mc_cop.map(|m| m.std_error)),
                        opt_num(r.mc_sop.map(|m| m.estimate)),
                        opt_num(r.mc_sop.map(|m| m.std_error)),
                        s.map_or("", |s| s.solver.as_str()).to_string(),
                        s.map_or_else(String::new, |s| s.converged.to_string()),
                        s.map_or_else(String::new, |s| s.feasible.to_string()),
                        r.error.clone().unwrap_or_default(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            Results::Schemes(rows) => {
                w.write_record([
                    "variable", "value", "layout", "route_hash", "hops", "route", "cop_a", "sop_a", "cop_b", "sop_b",
                    "cop_c", "sop_c", "jammer_power", "average_power_b", "average_power_c", "mc_cop_a", "mc_cop_a_se",
                    "mc_cop_b", "mc_cop_b_se", "mc_cop_c", "mc_cop_c_se", "error",
                ])
                .map_err(csv_err)?;
                for r in rows {
                    let f = |s: &Option<PowerSolution>, g: fn(&PowerSolution) -> f64| opt_num(s.as_ref().map(g));
                    let mc = |k: usize, se: bool| opt_num(r.mc_cop.map(|m| if se { m[k].std_error } else { m[k].estimate }));
                    w.write_record([
                        var.clone(),
                        num(r.value),
                        r.layout.to_string(),
                        format!("{:016x}", route_hash(&r.route)),
                        if r.route.is_empty() { String::new() } else { (r.route.len() - 1).to_string() },
                        joined(&r.route, "-"),
                        f(&r.a, |s| s.achieved_cop),
                        f(&r.a, |s| s.achieved_sop),
                        f(&r.b, |s| s.achieved_cop),
                        f(&r.b, |s| s.achieved_sop),
                        f(&r.c, |s| s.achieved_cop),
                        f(&r.c, |s| s.achieved_sop),
                        opt_num(r.c.as_ref().and_then(|s| s.jammer_power)),
                        f(&r.b, PowerSolution::average_power),
                        f(&r.c, PowerSolution::average_power),
                        mc(0, false),
                        mc(0, true),
                        mc(1, false),
                        mc(1, true),
                        mc(2, false),
                        mc(2, true),
                        r.error.clone().unwrap_or_default(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            Results::Hops(rows) => {
                w.write_record(["variable", "value", "hops", "count", "fraction"]).map_err(csv_err)?;
                for r in rows {
                    w.write_record([var.clone(), num(r.value), r.hops.to_string(), r.count.to_string(), num(r.fraction)])
                        .map_err(csv_err)?;
                }
            }
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outage::{cop, sop};

    fn small(mode: SweepMode, variable: SweepVariable, values: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            layouts: 5,
            trials: 0,
            sweep: Some(SweepConfig { variable, values, mode }),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let c = ExperimentConfig::default();
        assert!(validate(&c).is_empty(), "{:?}", validate(&c));
        let back = ExperimentConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let mut c = ExperimentConfig::default();
        c.params.zeta = 1.5;
        let d = validate(&c);
        assert!(d.iter().any(|d| d.severity == Severity::Error && d.message.contains("zeta outside (0,1)")));
        let mut c = ExperimentConfig::default();
        c.params.lambda_e = -1e-4;
        let d = validate(&c);
        assert!(has_errors(&d));
        assert!(d.iter().any(|d| d.field == "params.lambda_e"));
        let mut c = ExperimentConfig::default();
        c.solver.kind = SolverChoice::Sca;
        assert!(has_errors(&validate(&c)));
        c.solver.jam = true;
        assert!(!has_errors(&validate(&c)));
        let c = small(SweepMode::Standard, SweepVariable::Nodes, vec![10.0, 2.5]);
        assert!(has_errors(&validate(&c)));
    }

    #[test]
    fn parses_documented_schema() {
        let text = r#"
            seed = 7
            layouts = 3
            trials = 0

            [params]
            gamma_c_db = 0.8
            zeta = 0.3

            [geometry]
            nodes = 12
            pair = { fixed = { source = 0, destination = 5 } }

            [solver]
            kind = "sca"
            jam = true
            starts = 2

            [sweep]
            variable = "lambda_e"
            values = [1e-5, 1e-4]
        "#;
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.params.zeta, 0.3);
        assert_eq!(c.params.alpha, 4.0);
        assert_eq!(c.geometry.pair, PairSelection::Fixed { source: 0, destination: 5 });
        assert_eq!(c.solver.kind, SolverChoice::Sca);
        assert_eq!(c.sweep.as_ref().unwrap().variable, SweepVariable::LambdaE);
        assert!(validate(&c).is_empty());
        let bad = ExperimentConfig::parse("[params]\nzeta_db = 3\n");
        assert!(matches!(bad, Err(Error::Config { .. })));
    }

    #[test]
    fn zeta_sweep_lowers_cop_and_rows_are_self_consistent() {
        let c = small(SweepMode::Standard, SweepVariable::Zeta, vec![0.1, 0.5, 0.9]);
        let out = run(&c).unwrap();
        let Results::Standard(rows) = &out.results else { panic!("wrong mode") };
        assert_eq!(rows.len(), 15);
        for i in 0..5 {
            let cops: Vec<f64> = rows.iter().filter(|r| r.layout == i).map(|r| r.solution.as_ref().unwrap().achieved_cop).collect();
            assert!(cops[0] > cops[1] && cops[1] > cops[2]);
        }
        for r in rows {
            let (params, nodes) = at_value(&c, Some(SweepVariable::Zeta), r.value);
            let inst = layout(&c, nodes, r.layout).unwrap();
            let route = Route::through(&inst.nodes, r.route.clone(), &params).unwrap();
            let s = r.solution.as_ref().unwrap();
            assert!((cop(&route, &s.powers).unwrap() - s.achieved_cop).abs() <= 1e-12 * s.achieved_cop);
            assert!((sop(&route, &s.powers, &params).unwrap() - s.achieved_sop).abs() <= 1e-12);
        }
    }

    #[test]
    fn csv_is_bit_identical_for_a_seed() {
        let mut c = small(SweepMode::Standard, SweepVariable::LambdaE, vec![1e-4, 1e-3]);
        c.trials = 500;
        let a = run(&c).unwrap().to_csv_string().unwrap();
        let b = run(&c).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(&format!("# secroute {VERSION}\n# seed = 1\n# config_hash = {:016x}", c.hash())));
        let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 1 + 10);
        c.seed = 2;
        assert_ne!(run(&c).unwrap().to_csv_string().unwrap(), a);
    }

    #[test]
    fn schemes_are_ordered() {
        let mut c = small(SweepMode::Schemes, SweepVariable::Zeta, vec![0.2, 0.7]);
        c.solver = SolverConfig { kind: SolverChoice::Sca, jam: true, starts: 2, seed_iterations: 50, ..SolverConfig::default() };
        let out = run(&c).unwrap();
        let Results::Schemes(rows) = &out.results else { panic!("wrong mode") };
        for r in rows {
            assert!(r.error.is_none(), "{:?}", r.error);
            let (a, b, cc) = (r.a.as_ref().unwrap(), r.b.as_ref().unwrap(), r.c.as_ref().unwrap());
            assert!(cc.achieved_cop <= b.achieved_cop && b.achieved_cop <= a.achieved_cop);
            assert!((a.total_power() - b.total_power()).abs() <= 1e-9 * b.total_power());
        }
        let csv = out.to_csv_string().unwrap();
        assert!(csv.contains("cop_a,sop_a,cop_b"));
    }

    #[test]
    fn hop_histogram_counts_every_layout() {
        let mut c = small(SweepMode::Hops, SweepVariable::Nodes, vec![5.0, 30.0]);
        c.layouts = 40;
        let out = run(&c).unwrap();
        let Results::Hops(rows) = &out.results else { panic!("wrong mode") };
        for v in [5.0, 30.0] {
            let total: usize = rows.iter().filter(|r| r.value == v).map(|r| r.count).sum();
            assert_eq!(total, 40);
        }
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let mut c = small(SweepMode::Standard, SweepVariable::Zeta, vec![0.5]);
        // Links this short disconnect most layouts.
        c.geometry.max_link_distance = Some(2.0);
        let out = run(&c).unwrap();
        let Results::Standard(rows) = &out.results else { panic!("wrong mode") };
        assert_eq!(rows.len(), 5);
        assert!(out.failures > 0);
        assert!(rows.iter().any(|r| r.error.is_some()));
    }
}
