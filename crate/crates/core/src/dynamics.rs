//! Reduced-dynamics containers shared by the propagators.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::QubitMatrix;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Reduced density matrix sampled on a uniform time grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<QubitMatrix>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<QubitMatrix>) -> Self {
        assert_eq!(times.len(), states.len(), "one state per grid point");
        Trajectory { times, states }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[QubitMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&QubitMatrix> {
        self.states.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &QubitMatrix)> {
        self.times.iter().copied().zip(&self.states)
    }

    /// Largest entrywise deviation between two trajectories on the same grid.
    pub fn max_difference(&self, other: &Trajectory) -> f64 {
        assert_eq!(self.len(), other.len(), "trajectories on different grids");
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    }

    /// Every `stride`-th sample, keeping t = 0.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        assert!(stride > 0);
        Trajectory {
            times: self.times.iter().step_by(stride).copied().collect(),
            states: self.states.iter().step_by(stride).copied().collect(),
        }
    }

    /// Checks every sample as a density matrix.
    pub fn validate(&self) -> Result<()> {
        for (t, rho) in self.iter() {
            rho.validate_density()
                .map_err(|e| Error::NotDensityMatrix(format!("at t = {t}: {e}")))?;
        }
        Ok(())
    }
}

/// A linear propagator of the reduced state on a fixed grid.
pub trait Dynamics: Sync {
    /// Evolves an arbitrary operator; used for basis images of the map.
    fn evolve_operator(&self, x: &QubitMatrix) -> Result<Trajectory>;

    fn grid_dt(&self) -> f64;

    fn t_final(&self) -> f64;

    fn evolve(&self, rho0: &QubitMatrix) -> Result<Trajectory> {
        rho0.validate_density()?;
        self.evolve_operator(rho0)
    }
}

/// Images of the four matrix units `|i><j|` under a linear evolution.
///
/// Since both the hierarchy and the exact rotating-wave master equation are
/// linear in the initial state, any initial state's trajectory follows from
/// these four by superposition.
#[derive(Clone, Debug)]
pub struct DynamicalMap {
    times: Vec<f64>,
    // images of UNITS, same order
    images: [Vec<QubitMatrix>; 4],
}

impl DynamicalMap {
    /// `|e><e|`, `|e><g|`, `|g><e|`, `|g><g|`.
    pub const UNITS: [QubitMatrix; 4] = [
        QubitMatrix([[C64::new(1.0, 0.0), ZERO], [ZERO, ZERO]]),
        QubitMatrix([[ZERO, C64::new(1.0, 0.0)], [ZERO, ZERO]]),
        QubitMatrix([[ZERO, ZERO], [C64::new(1.0, 0.0), ZERO]]),
        QubitMatrix([[ZERO, ZERO], [ZERO, C64::new(1.0, 0.0)]]),
    ];

    pub fn from_dynamics<D: Dynamics + ?Sized>(dynamics: &D) -> Result<Self> {
        let trajs = Self::UNITS
            .par_iter()
            .map(|u| dynamics.evolve_operator(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_unit_trajectories(trajs))
    }

    /// Builds the map from trajectories of [`Self::UNITS`], in that order.
    pub(crate) fn from_unit_trajectories(trajs: Vec<Trajectory>) -> Self {
        assert_eq!(trajs.len(), 4);
        let times = trajs[0].times.clone();
        let mut it = trajs.into_iter().map(|t| t.states);
        let images = [
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        ];
        DynamicalMap { times, images }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State at grid index `k` for initial state `rho0`.
    #[inline]
    pub fn apply(&self, k: usize, rho0: &QubitMatrix) -> QubitMatrix {
        let mut out = QubitMatrix::ZERO;
        out.add_scaled(rho0.0[0][0], &self.images[0][k]);
        out.add_scaled(rho0.0[0][1], &self.images[1][k]);
        out.add_scaled(rho0.0[1][0], &self.images[2][k]);
        out.add_scaled(rho0.0[1][1], &self.images[3][k]);
        out
    }

    pub fn trajectory(&self, rho0: &QubitMatrix) -> Trajectory {
        let states = (0..self.len()).map(|k| self.apply(k, rho0)).collect();
        Trajectory::new(self.times.clone(), states)
    }

    /// Largest entry deviation between the two maps over all basis images.
    pub fn max_difference(&self, other: &DynamicalMap) -> f64 {
        assert_eq!(self.len(), other.len(), "maps on different grids");
        self.images
            .iter()
            .zip(&other.images)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).max_abs()))
            .fold(0.0, f64::max)
    }
}
