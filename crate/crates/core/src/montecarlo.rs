//! Direct simulation of connection and secrecy outage.
//!
//! Trial `t` draws every random quantity from substreams indexed by `t`, so
//! a report depends only on `(seed, trials)` and the inputs, whatever order
//! the trials run in.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance, sample_ppp, sample_rayleigh_power, substream, Point, Region, Stream, SystemParams};
use crate::outage::Route;

/// Outage frequency over independent trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimReport {
    pub estimate: f64,
    pub trials: u64,
    /// Binomial standard error `sqrt(p(1-p)/trials)`.
    pub std_error: f64,
    pub seed: u64,
}

impl SimReport {
    fn from_count(outages: u64, trials: u64, seed: u64) -> Self {
        let p = outages as f64 / trials as f64;
        Self { estimate: p, trials, std_error: (p * (1.0 - p) / trials as f64).sqrt(), seed }
    }

    /// Whether `value` lies within `k` standard errors. The standard error
    /// is floored at `1/trials` so that an all-or-nothing sample still
    /// admits values within one outage of it.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let se = self.std_error.max(1.0 / self.trials as f64);
        (self.estimate - value).abs() <= k * se
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SimOptions {
    pub trials: u64,
    pub seed: u64,
    /// Draw a fresh eavesdropper field for every hop instead of one per trial.
    pub resample_per_hop: bool,
    /// Add receiver noise to the eavesdropper SIR under jamming.
    pub include_noise: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { trials: 10_000, seed: 0, resample_per_hop: true, include_noise: false }
    }
}

fn check(route: &Route, powers: &[f64], params: &SystemParams, trials: u64) -> Result<()> {
    if powers.len() != route.num_hops() {
        return Err(Error::LengthMismatch { expected: route.num_hops(), got: powers.len() });
    }
    if let Some((hop, &power)) = powers.iter().enumerate().find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::NonPositivePower { hop, power });
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    // λ_e = 0 is a legitimate simulation input.
    params.with_lambda_e(params.lambda_e.max(1.0)).validate()?;
    if params.lambda_e < 0.0 || !params.lambda_e.is_finite() {
        return Err(Error::InvalidInput(format!("lambda_e must be non-negative, got {}", params.lambda_e)));
    }
    Ok(())
}

fn path_loss(d: f64, alpha: f64) -> f64 {
    d.powf(alpha)
}

/// Connection outage: some hop's SNR `P_n |h|² / (d^α σ²)` falls below `γ_c`.
pub fn simulate_cop(route: &Route, powers: &[f64], params: &SystemParams, trials: u64, seed: u64) -> Result<SimReport> {
    check(route, powers, params, trials)?;
    let loss: Vec<f64> = route.hop_distances().iter().map(|&d| path_loss(d, params.alpha) * params.sigma2).collect();
    let mut outages = 0;
    for t in 0..trials {
        let mut rng = substream(seed, Stream::Fading, t);
        let mut out = false;
        for (p, l) in powers.iter().zip(&loss) {
            // Every hop consumes one draw, so trials stay aligned across inputs.
            let snr = p * sample_rayleigh_power(&mut rng) / l;
            out |= snr < params.gamma_c;
        }
        outages += u64::from(out);
    }
    Ok(SimReport::from_count(outages, trials, seed))
}

/// Rectangle around the route, wide enough that an eavesdropper outside it
/// reaches SNR `γ_e` at any hop with probability below `e^-40`.
pub fn covering_region(route: &Route, powers: &[f64], params: &SystemParams) -> Result<Region> {
    let p_max = powers.iter().cloned().fold(0.0, f64::max);
    let reach = (40.0 * p_max / (params.gamma_e * params.sigma2)).powf(1.0 / params.alpha);
    let pts = route.positions();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    Region::new(x0 - reach, x1 + reach, y0 - reach, y1 + reach)
}

/// Secrecy outage without jamming: some eavesdropper in `eve_region`
/// reaches SNR `γ_e` at some hop. The closed form integrates over the
/// whole plane, so compare it against a [`covering_region`].
pub fn simulate_sop(
    route: &Route,
    powers: &[f64],
    params: &SystemParams,
    eve_region: &Region,
    options: &SimOptions,
) -> Result<SimReport> {
    check(route, powers, params, options.trials)?;
    let transmitters: Vec<Point> = (0..route.num_hops()).map(|n| route.transmitter(n)).collect();
    let mut outages = 0;
    for t in 0..options.trials {
        let mut field_rng = substream(options.seed, Stream::Eavesdroppers, t);
        let mut fade_rng = substream(options.seed, Stream::Fading, t);
        let mut field = sample_ppp(eve_region, params.lambda_e, &mut field_rng);
        let mut out = false;
        for (n, (&tx, &p)) in transmitters.iter().zip(powers).enumerate() {
            if n > 0 && options.resample_per_hop {
                field = sample_ppp(eve_region, params.lambda_e, &mut field_rng);
            }
            for e in &field {
                let snr = p * sample_rayleigh_power(&mut fade_rng) / (path_loss(distance(tx, *e), params.alpha) * params.sigma2);
                out |= snr >= params.gamma_e;
            }
        }
        outages += u64::from(out);
    }
    Ok(SimReport::from_count(outages, options.trials, options.seed))
}

/// Secrecy outage with a friendly jammer at `jammer` radiating `p_j`. An
/// eavesdropper leaks hop `n` when
/// `P_n |h|² / d_T^α >= γ_e (P_J |g|² / d_J^α [+ σ²])`, with independent
/// Exp(1) gains `|h|²` and `|g|²`.
pub fn simulate_sop_jamming(
    route: &Route,
    powers: &[f64],
    jammer: Point,
    p_j: f64,
    params: &SystemParams,
    eve_region: &Region,
    options: &SimOptions,
) -> Result<SimReport> {
    check(route, powers, params, options.trials)?;
    if !(p_j > 0.0) {
        return Err(Error::InvalidInput(format!("jammer power must be positive, got {p_j}")));
    }
    let noise = if options.include_noise { params.sigma2 } else { 0.0 };
    let transmitters: Vec<Point> = (0..route.num_hops()).map(|n| route.transmitter(n)).collect();
    let mut outages = 0;
    for t in 0..options.trials {
        let mut field_rng = substream(options.seed, Stream::Eavesdroppers, t);
        let mut fade_rng = substream(options.seed, Stream::Fading, t);
        let mut jam_rng = substream(options.seed, Stream::JammingFading, t);
        let mut field = sample_ppp(eve_region, params.lambda_e, &mut field_rng);
        let mut out = false;
        for (n, (&tx, &p)) in transmitters.iter().zip(powers).enumerate() {
            if n > 0 && options.resample_per_hop {
                field = sample_ppp(eve_region, params.lambda_e, &mut field_rng);
            }
            for e in &field {
                let signal = p * sample_rayleigh_power(&mut fade_rng) / path_loss(distance(tx, *e), params.alpha);
                let jam = p_j * sample_rayleigh_power(&mut jam_rng) / path_loss(distance(jammer, *e), params.alpha);
                out |= signal >= params.gamma_e * (jam + noise);
            }
        }
        outages += u64::from(out);
    }
    Ok(SimReport::from_count(outages, options.trials, options.seed))
}

/// Plain Monte Carlo estimate of `∫ c/(c + γ_e (d_T/d_J)^α)` over `region`,
/// with its standard error.
pub fn g_n_monte_carlo(
    transmitter: Point,
    jammer: Point,
    region: &Region,
    params: &SystemParams,
    c: f64,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(c > 0.0) || samples < 2 {
        return Err(Error::InvalidInput(format!("need c > 0 and at least 2 samples, got c = {c}, {samples}")));
    }
    let mut rng = substream(seed, Stream::Eavesdroppers, 0);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let x = Point::new(rng.random_range(region.x_min..region.x_max), rng.random_range(region.y_min..region.y_max));
        let f = params.gamma_e * (distance(transmitter, x) / distance(jammer, x)).powf(params.alpha);
        let v = if f.is_finite() { c / (c + f) } else { 0.0 };
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((region.area() * mean, region.area() * (var / n).sqrt()))
}
