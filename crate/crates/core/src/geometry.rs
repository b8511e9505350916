//! Node layouts, deployment regions, and the random primitives of the channel
//! model: Poisson eavesdropper fields and Rayleigh power gains.
//!
//! All randomness flows through [`SimRng`] streams obtained from
//! [`substream`], so every draw is reproducible from a 64-bit seed plus a
//! `(Stream, index)` pair.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator used for every simulation stream.
pub type SimRng = ChaCha8Rng;

/// Purpose tag of a random stream. Distinct tags never share a ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Stream {
    Layout = 1,
    Eavesdroppers = 2,
    Fading = 3,
    JammingFading = 4,
    Solver = 5,
}

const INDEX_BITS: u32 = 56;

/// Derives the random stream for `(seed, stream, index)`.
///
/// The generator is `ChaCha8Rng::seed_from_u64(seed)` with its 64-bit stream
/// id set to `tag << 56 | index`. Indices are masked to 56 bits, so any two
/// distinct `(tag, index)` pairs with `index < 2^56` read disjoint keystreams.
pub fn substream(seed: u64, stream: Stream, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = ((stream as u64) << INDEX_BITS) | (index & ((1u64 << INDEX_BITS) - 1));
    rng.set_stream(id);
    rng
}

/// Converts a decibel ratio to linear scale.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Axis-aligned rectangle, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || y_max <= y_min {
            return Err(Error::InvalidInput(format!(
                "degenerate region [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    /// Square of side `side` centered on `center`.
    pub fn square(center: Point, side: f64) -> Result<Self> {
        let h = side / 2.0;
        Self::new(center.x - h, center.x + h, center.y - h, center.y + h)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            self.x_min + self.width() * rng.random::<f64>(),
            self.y_min + self.height() * rng.random::<f64>(),
        )
    }
}

/// Homogeneous Poisson point process of density `lambda` (points per m²)
/// restricted to `region`.
pub fn sample_ppp<R: Rng + ?Sized>(region: &Region, lambda: f64, rng: &mut R) -> Vec<Point> {
    let mean = lambda * region.area();
    if mean <= 0.0 {
        return Vec::new();
    }
    // Poisson::new only fails for non-positive or non-finite means.
    let count: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    (0..count as usize).map(|_| region.sample_uniform(rng)).collect()
}

/// Power gain |h|² of a unit-variance Rayleigh channel, i.e. an Exp(1) draw.
pub fn sample_rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// How the source and destination are chosen for a random layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    /// The two nodes with the largest separation (lowest indices on ties).
    #[default]
    Farthest,
    /// Explicit node indices.
    Fixed { source: usize, destination: usize },
}

/// A set of legitimate nodes with a designated source and destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub nodes: Vec<Point>,
    pub source: usize,
    pub destination: usize,
    pub node_region: Region,
    pub eve_region: Region,
}

impl NetworkInstance {
    pub fn new(
        nodes: Vec<Point>,
        source: usize,
        destination: usize,
        node_region: Region,
        eve_region: Region,
    ) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if source == destination {
            return Err(Error::InvalidInput("source equals destination".into()));
        }
        if source >= nodes.len() || destination >= nodes.len() {
            return Err(Error::InvalidInput(format!(
                "source/destination index out of range for {} nodes",
                nodes.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|p| !node_region.contains(*p)) {
            return Err(Error::InvalidInput(format!("node {i} lies outside the node region")));
        }
        Ok(Self { nodes, source, destination, node_region, eve_region })
    }

    /// Draws `m` nodes uniformly over `node_region`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        m: usize,
        node_region: Region,
        eve_region: Region,
        pair: PairSelection,
    ) -> Result<Self> {
        let nodes: Vec<Point> = (0..m).map(|_| node_region.sample_uniform(rng)).collect();
        let (source, destination) = match pair {
            PairSelection::Fixed { source, destination } => (source, destination),
            PairSelection::Farthest => farthest_pair(&nodes).unwrap_or((0, 1)),
        };
        Self::new(nodes, source, destination, node_region, eve_region)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.nodes[i], self.nodes[j])
    }
}

/// Indices of the two most distant points, or `None` for fewer than two points.
pub fn farthest_pair(points: &[Point]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = distance(points[i], points[j]);
            if best.is_none_or(|(_, _, bd)| d > bd) {
                best = Some((i, j, d));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// Channel and security parameters, all in linear units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Noise power. Powers elsewhere in the crate are normalized by it.
    pub sigma2: f64,
    /// Legitimate-receiver SNR threshold.
    pub gamma_c: f64,
    /// Eavesdropper SNR (or SIR) threshold.
    pub gamma_e: f64,
    /// Eavesdropper density per m².
    pub lambda_e: f64,
    /// Maximum tolerable secrecy outage probability.
    pub zeta: f64,
}

impl SystemParams {
    /// 0.8 dB / 0 dB thresholds, α = 4, λ_e = 1e-4, unit noise, ζ = 0.5.
    pub fn reference() -> Self {
        Self {
            alpha: 4.0,
            sigma2: 1.0,
            gamma_c: db_to_linear(0.8),
            gamma_e: db_to_linear(0.0),
            lambda_e: 1e-4,
            zeta: 0.5,
        }
    }

    pub fn with_zeta(self, zeta: f64) -> Self {
        Self { zeta, ..self }
    }

    pub fn with_lambda_e(self, lambda_e: f64) -> Self {
        Self { lambda_e, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        if self.alpha < 2.0 {
            return Err(Error::InvalidInput(format!("alpha must be >= 2, got {}", self.alpha)));
        }
        positive("sigma2", self.sigma2)?;
        positive("gamma_c", self.gamma_c)?;
        positive("gamma_e", self.gamma_e)?;
        positive("lambda_e", self.lambda_e)?;
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return Err(Error::InvalidInput(format!("zeta outside (0,1): {}", self.zeta)));
        }
        Ok(())
    }
}
