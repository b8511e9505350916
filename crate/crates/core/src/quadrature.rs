//! Adaptive tensor Gauss-Legendre quadrature on rectangles.
//!
//! Each panel is integrated with an 8x8 and a 5x5 rule; their difference is
//! the panel's error estimate. Refinement is global: the panel with the
//! largest error is split into four until the summed error meets the
//! tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};

const LOW_ORDER: usize = 5;
const HIGH_ORDER: usize = 8;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1],
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor rule on the reference square, cached per order.
#[derive(Debug, Clone)]
struct TensorRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TensorRule {
    fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    /// Calls `visit(point, weight)` for every node mapped onto `panel`.
    fn for_each(&self, panel: &Region, mut visit: impl FnMut(Point, f64)) {
        let (cx, cy) = ((panel.x_min + panel.x_max) / 2.0, (panel.y_min + panel.y_max) / 2.0);
        let (hx, hy) = (panel.width() / 2.0, panel.height() / 2.0);
        for (xi, wx) in self.nodes.iter().zip(&self.weights) {
            for (yi, wy) in self.nodes.iter().zip(&self.weights) {
                visit(Point::new(cx + hx * xi, cy + hy * yi), wx * wy * hx * hy);
            }
        }
    }
}

/// Stopping rule: the summed error estimate must not exceed
/// `max(rel * |value|, abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    fn bound(&self, value: f64) -> f64 {
        (self.rel * value.abs()).max(self.abs)
    }
}

/// Result of a scalar integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Positive-weight quadrature rule frozen after adaptive refinement.
#[derive(Debug, Clone, Default)]
pub struct PointRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub panels: usize,
}

impl PointRule {
    pub fn integrate(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

struct Cell {
    panel: Region,
    high: Vec<f64>,
    error: Vec<f64>,
    priority: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

/// Global adaptive refinement of a vector-valued integrand with `dim`
/// components. `family(x, out)` writes all components at `x`. Every
/// component must meet `tol` for refinement to stop.
struct Refiner<F> {
    family: F,
    dim: usize,
    tol: Tolerance,
    low: TensorRule,
    high: TensorRule,
    scratch: Vec<f64>,
}

impl<F: FnMut(Point, &mut [f64])> Refiner<F> {
    fn evaluate(&mut self, panel: Region, scale: &[f64]) -> Cell {
        let dim = self.dim;
        let mut high = vec![0.0; dim];
        let mut low = vec![0.0; dim];
        let family = &mut self.family;
        let scratch = &mut self.scratch;
        self.high.for_each(&panel, |p, w| {
            family(p, scratch);
            for k in 0..dim {
                high[k] += w * scratch[k];
            }
        });
        self.low.for_each(&panel, |p, w| {
            family(p, scratch);
            for k in 0..dim {
                low[k] += w * scratch[k];
            }
        });
        let error: Vec<f64> = high.iter().zip(&low).map(|(h, l)| (h - l).abs()).collect();
        let priority = error.iter().zip(scale).map(|(e, s)| e / s).fold(0.0, f64::max);
        Cell { panel, high, error, priority }
    }

    fn run(mut self, initial: &[Region], max_panels: usize) -> Result<Vec<Cell>> {
        let dim = self.dim;
        let unit = vec![1.0; dim];
        let first: Vec<Cell> = initial.iter().map(|&p| self.evaluate(p, &unit)).collect();
        let mut value = vec![0.0; dim];
        let mut error = vec![0.0; dim];
        for c in &first {
            for k in 0..dim {
                value[k] += c.high[k];
                error[k] += c.error[k];
            }
        }
        let scale_of = |value: &[f64], tol: &Tolerance| -> Vec<f64> {
            value.iter().map(|&v| tol.bound(v).max(f64::MIN_POSITIVE)).collect()
        };
        let mut scale = scale_of(&value, &self.tol);
        let mut heap: BinaryHeap<Cell> = first
            .into_iter()
            .map(|mut c| {
                c.priority = c.error.iter().zip(&scale).map(|(e, s)| e / s).fold(0.0, f64::max);
                c
            })
            .collect();
        let mut splits = 0usize;
        loop {
            let done = (0..dim).all(|k| error[k] <= self.tol.bound(value[k]));
            if done {
                break;
            }
            if heap.len() + 3 > max_panels {
                let k = (0..dim)
                    .max_by(|&a, &b| (error[a] / scale[a]).total_cmp(&(error[b] / scale[b])))
                    .unwrap_or(0);
                return Err(Error::Quadrature { estimate: value[k], error: error[k], panels: heap.len() });
            }
            let worst = heap.pop().expect("heap never empties");
            let Region { x_min, x_max, y_min, y_max } = worst.panel;
            let (xm, ym) = ((x_min + x_max) / 2.0, (y_min + y_max) / 2.0);
            for k in 0..dim {
                value[k] -= worst.high[k];
                error[k] -= worst.error[k];
            }
            for child in [
                Region { x_min, x_max: xm, y_min, y_max: ym },
                Region { x_min: xm, x_max, y_min, y_max: ym },
                Region { x_min, x_max: xm, y_min: ym, y_max },
                Region { x_min: xm, x_max, y_min: ym, y_max },
            ] {
                let c = self.evaluate(child, &scale);
                for k in 0..dim {
                    value[k] += c.high[k];
                    error[k] += c.error[k];
                }
                heap.push(c);
            }
            splits += 1;
            if splits.is_multiple_of(512) {
                // Re-sum to shed drift from the running totals.
                value.iter_mut().for_each(|v| *v = 0.0);
                error.iter_mut().for_each(|v| *v = 0.0);
                for c in heap.iter() {
                    for k in 0..dim {
                        value[k] += c.high[k];
                        error[k] += c.error[k];
                    }
                }
                scale = scale_of(&value, &self.tol);
            }
        }
        Ok(heap.into_vec())
    }
}

fn refiner<F: FnMut(Point, &mut [f64])>(family: F, dim: usize, tol: Tolerance) -> Result<Refiner<F>> {
    if dim == 0 {
        return Err(Error::InvalidInput("integrand family is empty".into()));
    }
    if !(tol.rel >= 0.0 && tol.abs >= 0.0) || (tol.rel == 0.0 && tol.abs == 0.0) {
        return Err(Error::InvalidInput("quadrature tolerance must be positive".into()));
    }
    Ok(Refiner {
        family,
        dim,
        tol,
        low: TensorRule::new(LOW_ORDER),
        high: TensorRule::new(HIGH_ORDER),
        scratch: vec![0.0; dim],
    })
}

/// Quadtree mesh of `region` in which every panel touching one of
/// `points` has been split down to at most `min_size` per side. Features
/// smaller than the coarse panels cannot then slip between nodes.
pub fn refined_mesh(region: &Region, points: &[Point], min_size: f64) -> Vec<Region> {
    let touches = |r: &Region| points.iter().any(|p| r.contains(*p));
    let mut out = Vec::new();
    let mut stack = vec![*region];
    while let Some(r) = stack.pop() {
        if r.width().max(r.height()) <= min_size || !touches(&r) {
            out.push(r);
            continue;
        }
        let Region { x_min, x_max, y_min, y_max } = r;
        let (xm, ym) = ((x_min + x_max) / 2.0, (y_min + y_max) / 2.0);
        stack.extend([
            Region { x_min, x_max: xm, y_min, y_max: ym },
            Region { x_min: xm, x_max, y_min, y_max: ym },
            Region { x_min, x_max: xm, y_min: ym, y_max },
            Region { x_min: xm, x_max, y_min: ym, y_max },
        ]);
    }
    out
}

/// Integrates `f` over the union of `panels`.
pub fn integrate_2d(
    mut f: impl FnMut(Point) -> f64,
    panels: &[Region],
    tol: Tolerance,
    max_panels: usize,
) -> Result<Estimate> {
    let r = refiner(|p, out: &mut [f64]| out[0] = f(p), 1, tol)?;
    let cells = r.run(panels, max_panels)?;
    let n = cells.len();
    let value = cells.iter().map(|c| c.high[0]).sum();
    let error = cells.iter().map(|c| c.error[0]).sum();
    Ok(Estimate { value, error, panels: n })
}

/// Refines until every member of `family` meets `tol`, then returns the
/// high-order nodes of the final mesh as a single reusable rule.
pub fn build_rule(
    family: impl FnMut(Point, &mut [f64]),
    dim: usize,
    panels: &[Region],
    tol: Tolerance,
    max_panels: usize,
) -> Result<PointRule> {
    let r = refiner(family, dim, tol)?;
    let high = r.high.clone();
    let cells = r.run(panels, max_panels)?;
    let mut rule = PointRule { panels: cells.len(), ..PointRule::default() };
    rule.points.reserve(cells.len() * HIGH_ORDER * HIGH_ORDER);
    rule.weights.reserve(cells.len() * HIGH_ORDER * HIGH_ORDER);
    for c in &cells {
        high.for_each(&c.panel, |p, w| {
            rule.points.push(p);
            rule.weights.push(w);
        });
    }
    Ok(rule)
}
