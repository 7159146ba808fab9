//! Trace-distance non-Markovianity: the total increase of the distance
//! between two evolving states over `[0, t_c]`, maximized over orthogonal
//! pure initial pairs.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalMap, Dynamics, Trajectory};
use crate::error::{Error, Result};
use crate::operators::{trace_distance, QubitMatrix};

/// Values closer than this are treated as ties when picking the best pair.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Bloch angles of the initial pair
/// `|psi> = cos(theta/2)|e> + e^{i phi} sin(theta/2)|g>` and its orthogonal
/// partner `sin(theta/2)|e> - e^{i phi} cos(theta/2)|g>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialPair {
    pub theta: f64,
    pub phi: f64,
}

impl InitialPair {
    pub fn new(theta: f64, phi: f64) -> Self {
        InitialPair { theta, phi }
    }

    fn key(&self) -> (f64, f64) {
        (self.theta, self.phi)
    }
}

pub fn pair_states(p: InitialPair) -> (QubitMatrix, QubitMatrix) {
    let (s, c) = (0.5 * p.theta).sin_cos();
    let phase = C64::from_polar(1.0, p.phi);
    let psi = QubitMatrix::projector(C64::new(c, 0.0), phase * s);
    let perp = QubitMatrix::projector(C64::new(s, 0.0), -phase * c);
    (psi, perp)
}

/// `D(t_i)` for two trajectories on the same grid.
pub fn trace_distance_series(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(
            "trajectories on different grids".into(),
        ));
    }
    a.states()
        .iter()
        .zip(b.states())
        .map(|(x, y)| trace_distance(x, y))
        .collect()
}

/// Sum of the positive increments `max(0, D_{i+1} - D_i)`.
pub fn positive_variation(series: &[f64]) -> f64 {
    series.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum()
}

/// Non-Markovianity contributed by one initial pair, propagating both states
/// with `dynamics`.
pub fn nonmarkovianity_for_pair<D: Dynamics + ?Sized>(p: InitialPair, dynamics: &D) -> Result<f64> {
    let (r1, r2) = pair_states(p);
    let t1 = dynamics.evolve(&r1)?;
    let t2 = dynamics.evolve(&r2)?;
    Ok(positive_variation(&trace_distance_series(&t1, &t2)?))
}

/// `D(t_i)` for a pair, read off a precomputed dynamical map.
pub fn distance_series_from_map(map: &DynamicalMap, p: InitialPair) -> Result<Vec<f64>> {
    let (r1, r2) = pair_states(p);
    let diff = r1 - r2;
    (0..map.len())
        .map(|k| {
            let [lo, hi] = map.apply(k, &diff).hermitian_eigenvalues()?;
            Ok(0.5 * (lo.abs() + hi.abs()))
        })
        .collect()
}

/// How initial pairs are chosen: a uniform `(theta, phi)` grid including
/// both endpoints, plus seeded uniform random samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampler {
    pub grid: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            grid: 13,
            random: 128,
            seed: 0,
        }
    }
}

impl Sampler {
    pub fn pairs(&self) -> Result<Vec<InitialPair>> {
        if self.grid == 0 && self.random == 0 {
            return Err(Error::InvalidParameter(
                "sampler produces no initial pairs".into(),
            ));
        }
        let mut out = Vec::with_capacity(self.grid * self.grid + self.random);
        if self.grid == 1 {
            out.push(InitialPair::new(0.0, 0.0));
        } else if self.grid > 1 {
            let denom = (self.grid - 1) as f64;
            for i in 0..self.grid {
                for j in 0..self.grid {
                    out.push(InitialPair::new(
                        PI * i as f64 / denom,
                        2.0 * PI * j as f64 / denom,
                    ));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random {
            let theta = rng.gen_range(0.0..=PI);
            let phi = rng.gen_range(0.0..=2.0 * PI);
            out.push(InitialPair::new(theta, phi));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub pair: InitialPair,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub best_pair: InitialPair,
    pub per_pair: Vec<PairValue>,
    pub t_c: f64,
    pub grid_dt: f64,
}

/// Evaluates every sampled pair and keeps the largest measure.
pub fn maximize<D: Dynamics + ?Sized>(dynamics: &D, sampler: &Sampler) -> Result<MeasureResult> {
    let map = DynamicalMap::from_dynamics(dynamics)?;
    maximize_with_map(&map, sampler, dynamics.t_final(), dynamics.grid_dt())
}

/// As [`maximize`] with the dynamical map already built.
///
/// Pairs are evaluated in parallel on the current rayon pool; the reduction
/// is order-independent, with near-ties (within [`TIE_TOLERANCE`]) resolved
/// towards the smallest `theta`, then the smallest `phi`.
pub fn maximize_with_map(
    map: &DynamicalMap,
    sampler: &Sampler,
    t_c: f64,
    grid_dt: f64,
) -> Result<MeasureResult> {
    let pairs = sampler.pairs()?;
    let per_pair = pairs
        .par_iter()
        .map(|&pair| {
            let series = distance_series_from_map(map, pair)?;
            Ok(PairValue {
                pair,
                value: positive_variation(&series),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = select_best(&per_pair);
    Ok(MeasureResult {
        value: best.value,
        best_pair: best.pair,
        per_pair,
        t_c,
        grid_dt,
    })
}

fn select_best(values: &[PairValue]) -> PairValue {
    let top = values
        .iter()
        .map(|v| v.value)
        .fold(f64::NEG_INFINITY, f64::max);
    *values
        .iter()
        .filter(|v| v.value >= top - TIE_TOLERANCE)
        .min_by(|a, b| a.pair.key().partial_cmp(&b.pair.key()).unwrap())
        .expect("sampler is non-empty")
}
