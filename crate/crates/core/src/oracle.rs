//! Floating-point evaluation of ⟨cos(φ·θ)⟩ under the Gibbs measure
//! `∝ exp(Σ_xy J_xy cos(θ_x − θ_y)) dθ`, independent of the current
//! expansion.
//!
//! Two routes: a periodic trapezoid rule on the torus `[0, 2π)^V` (spectrally
//! accurate for these smooth integrands), and importance sampling from the
//! uniform measure. Both reduce in a fixed chunk order so results do not
//! depend on the thread count.
//!
//! The sampler is ChaCha8 (`rand_chacha`), seeded with `seed_from_u64(seed)`;
//! batch `b` of `MC_BATCH` samples reads stream `b` of that key.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, SourceFunction};
use crate::rational::to_f64;

/// Angles θ_x in `[0, 2π)`, one per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleConfig(Vec<f64>);

impl AngleConfig {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        for (vertex, &value) in angles.iter().enumerate() {
            if !(0.0..TAU).contains(&value) {
                return Err(Error::AngleOutOfRange { vertex, value });
            }
        }
        Ok(AngleConfig(angles))
    }

    /// Wraps arbitrary reals into `[0, 2π)`.
    pub fn wrapped(angles: impl IntoIterator<Item = f64>) -> Self {
        AngleConfig(
            angles
                .into_iter()
                .map(|a| {
                    let w = a.rem_euclid(TAU);
                    // rem_euclid can round up to exactly 2π
                    if w >= TAU { 0.0 } else { w }
                })
                .collect(),
        )
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }
}

/// H(θ) = −Σ_xy J_xy cos(θ_x − θ_y).
pub fn hamiltonian(graph: &Graph, theta: &AngleConfig) -> f64 {
    let angles = theta.angles();
    -graph
        .edges()
        .iter()
        .map(|e| to_f64(&e.coupling) * (angles[e.tail] - angles[e.head]).cos())
        .sum::<f64>()
}

/// Whether one vertex's angle is pinned to 0 during quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    /// Pin vertex 0; needs Σφ = 0.
    #[default]
    Fixed,
    /// Integrate every angle.
    Full,
}

/// Number of grid points the quadrature visits.
pub fn quadrature_work(graph: &Graph, points: usize, gauge: Gauge) -> u128 {
    let free = match gauge {
        Gauge::Fixed => graph.vertex_count().saturating_sub(1),
        Gauge::Full => graph.vertex_count(),
    };
    (points as u128).saturating_pow(free as u32)
}

const QUAD_CHUNK: usize = 1 << 12;

/// Ratio of `points`-per-angle periodic trapezoid sums of
/// `cos(φ·θ) e^{−H}` and `e^{−H}`.
pub fn quadrature_correlation(graph: &Graph, phi: &SourceFunction, points: usize, gauge: Gauge) -> Result<f64> {
    graph.check_source(phi)?;
    if points < 2 {
        return Err(Error::GridTooSmall(points));
    }
    if gauge == Gauge::Fixed && phi.total() != 0 {
        return Err(Error::GaugeNeedsMeanZero { total: phi.total() });
    }
    let v = graph.vertex_count();
    if v == 0 {
        return Ok(1.0);
    }
    let pinned = usize::from(gauge == Gauge::Fixed);
    let free = v - pinned;
    let total = points
        .checked_pow(free as u32)
        .expect("grid size overflows usize");

    // every angle is a multiple of 2π/K, so all cosines come from one table
    let k = points as i64;
    let cos_table: Vec<f64> = (0..points).map(|m| (TAU * m as f64 / points as f64).cos()).collect();
    let couplings: Vec<(usize, usize, f64)> = graph
        .edges()
        .iter()
        .map(|e| (e.tail, e.head, to_f64(&e.coupling)))
        .collect();
    let phi = phi.values();

    let chunks = total.div_ceil(QUAD_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut grid = vec![0i64; v];
            let (mut num, mut den) = (0.0, 0.0);
            for index in chunk * QUAD_CHUNK..((chunk + 1) * QUAD_CHUNK).min(total) {
                let mut rest = index;
                for slot in grid[pinned..].iter_mut().rev() {
                    *slot = (rest % points) as i64;
                    rest /= points;
                }
                let exponent: f64 = couplings
                    .iter()
                    .map(|&(x, y, j)| j * (cos_table[(grid[x] - grid[y]).rem_euclid(k) as usize] - 1.0))
                    .sum();
                // shifted by −ΣJ so weights stay in (0, 1]; the shift cancels
                let weight = exponent.exp();
                let phase: i64 = phi.iter().zip(&grid).map(|(p, g)| p * g).sum();
                num += cos_table[phase.rem_euclid(k) as usize] * weight;
                den += weight;
            }
            (num, den)
        })
        .collect();
    let (num, den) = partials
        .into_iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Ok(num / den)
}

/// Samples per independent ChaCha stream.
pub const MC_BATCH: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    w: f64,
    wc: f64,
    w2: f64,
    w2c: f64,
    w2c2: f64,
}

impl Moments {
    fn add(self, o: Moments) -> Moments {
        Moments {
            w: self.w + o.w,
            wc: self.wc + o.wc,
            w2: self.w2 + o.w2,
            w2c: self.w2c + o.w2c,
            w2c2: self.w2c2 + o.w2c2,
        }
    }
}

/// Self-normalised importance sampling with uniform proposals:
/// estimate `Σ w c / Σ w` with `w = e^{−H}`, `c = cos(φ·θ)`, and the
/// delta-method standard error `sqrt(Σ w² (c − R)²) / Σ w`.
pub fn mc_correlation(graph: &Graph, phi: &SourceFunction, samples: u64, seed: u64) -> Result<McEstimate> {
    graph.check_source(phi)?;
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    if phi.is_zero() {
        return Ok(McEstimate {
            estimate: 1.0,
            stderr: 0.0,
            samples,
            seed,
        });
    }
    let v = graph.vertex_count();
    let couplings: Vec<(usize, usize, f64)> = graph
        .edges()
        .iter()
        .map(|e| (e.tail, e.head, to_f64(&e.coupling)))
        .collect();
    let phi: Vec<f64> = phi.values().iter().map(|&p| p as f64).collect();

    let batches = samples.div_ceil(MC_BATCH);
    let partials: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let mut theta = vec![0.0; v];
            let mut m = Moments::default();
            let count = MC_BATCH.min(samples - batch * MC_BATCH);
            for _ in 0..count {
                for t in theta.iter_mut() {
                    *t = rng.random::<f64>() * TAU;
                }
                let exponent: f64 = couplings
                    .iter()
                    .map(|&(x, y, j)| j * ((theta[x] - theta[y]).cos() - 1.0))
                    .sum();
                let w = exponent.exp();
                let phase: f64 = phi.iter().zip(&theta).map(|(p, t)| p * t).sum();
                let c = phase.cos();
                m.w += w;
                m.wc += w * c;
                m.w2 += w * w;
                m.w2c += w * w * c;
                m.w2c2 += w * w * c * c;
            }
            m
        })
        .collect();
    let m = partials.into_iter().fold(Moments::default(), Moments::add);
    let estimate = m.wc / m.w;
    let spread = m.w2c2 - 2.0 * estimate * m.w2c + estimate * estimate * m.w2;
    Ok(McEstimate {
        estimate,
        stderr: spread.max(0.0).sqrt() / m.w,
        samples,
        seed,
    })
}
