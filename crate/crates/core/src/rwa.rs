//! Exact rotating-wave (`chi = 0`) dynamics.
//!
//! In the rotating-wave limit the memory kernel collapses to a scalar `F(t)`
//! obeying the Riccati equation
//!
//! ```text
//! dF/dt = F^2 - (lambda - i delta) F + gamma0 lambda / 2,   F(0) = 0,
//! ```
//!
//! and the reduced state follows a time-local master equation driven by
//! `F`. For zero detuning everything has a closed form in terms of
//! `Omega = sqrt(lambda^2 - 2 gamma0 lambda)`. This module is independent of
//! the hierarchy and serves as its reference solution.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::BathModel;
use crate::dynamics::{Dynamics, Trajectory};
use crate::error::{Error, Result};
use crate::heom::step_count;
use crate::operators::{commutator, QubitMatrix};

/// `|F|` above which the Riccati solution is treated as a pole.
pub const RICCATI_BLOWUP: f64 = 1e6;
/// Largest internal RK4 step used between grid points.
pub const MAX_SUBSTEP: f64 = 0.01;

/// Sign of `Omega^2 = lambda^2 - 2 gamma0 lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayRegime {
    /// `Omega` real: monotone decay of `G` at zero detuning.
    Overdamped,
    Critical,
    /// `Omega` imaginary: `G` oscillates (strong coupling).
    Underdamped,
}

pub fn decay_regime(bath: &BathModel) -> DecayRegime {
    let omega_sq = omega_squared(bath);
    let scale = bath.lambda * bath.lambda;
    if omega_sq.abs() <= 1e-14 * scale {
        DecayRegime::Critical
    } else if omega_sq > 0.0 {
        DecayRegime::Overdamped
    } else {
        DecayRegime::Underdamped
    }
}

fn omega_squared(bath: &BathModel) -> f64 {
    bath.lambda * bath.lambda - 2.0 * bath.gamma0 * bath.lambda
}

/// `Omega = sqrt(lambda^2 - 2 gamma0 lambda)`, imaginary in the strong-coupling
/// regime.
pub fn omega(bath: &BathModel) -> C64 {
    C64::new(omega_squared(bath), 0.0).sqrt()
}

fn require_resonant(bath: &BathModel) -> Result<()> {
    bath.validate()?;
    if bath.delta != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "closed form requires zero detuning, got delta = {}",
            bath.delta
        )));
    }
    Ok(())
}

/// Closed-form `F(t)` at zero detuning.
pub fn closed_form_f(bath: &BathModel, t: f64) -> Result<C64> {
    require_resonant(bath)?;
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let lambda = bath.lambda;
    if decay_regime(bath) == DecayRegime::Critical {
        return Ok(C64::new(0.5 * lambda - lambda / (2.0 + lambda * t), 0.0));
    }
    // F = -G'/G, written through tanh(Omega t/2) so it stays finite for large
    // t; equivalent to lambda/2 - Omega/2 coth(Omega t/2 + acoth(lambda/Omega)).
    let omega_sq = omega_squared(bath);
    let f = if omega_sq > 0.0 {
        let om = omega_sq.sqrt();
        let th = (0.5 * om * t).tanh();
        0.5 * lambda - 0.5 * om * (om * th + lambda) / (om + lambda * th)
    } else {
        // Omega = i w, tanh(i x) = i tan(x)
        let w = (-omega_sq).sqrt();
        let tn = (0.5 * w * t).tan();
        0.5 * lambda - 0.5 * w * (lambda - w * tn) / (w + lambda * tn)
    };
    Ok(C64::new(f, 0.0))
}

/// Decay factor `G(t) = exp(-int_0^t F)` at zero detuning:
/// `exp(-lambda t/2) [cosh(Omega t/2) + lambda/Omega sinh(Omega t/2)]`,
/// continued to `cos`/`sin` when `Omega` is imaginary.
pub fn closed_form_g(bath: &BathModel, t: f64) -> Result<f64> {
    require_resonant(bath)?;
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let lambda = bath.lambda;
    let envelope = (-0.5 * lambda * t).exp();
    let omega_sq = omega_squared(bath);
    let g = match decay_regime(bath) {
        DecayRegime::Critical => envelope * (1.0 + 0.5 * lambda * t),
        DecayRegime::Overdamped => {
            let om = omega_sq.sqrt();
            let x = 0.5 * om * t;
            envelope * (x.cosh() + lambda / om * x.sinh())
        }
        DecayRegime::Underdamped => {
            let w = (-omega_sq).sqrt();
            let x = 0.5 * w * t;
            envelope * (x.cos() + lambda / w * x.sin())
        }
    };
    Ok(g)
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::InvalidParameter("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidParameter(format!(
                "time grid must start at 0, starts at {t0}"
            )))
        }
        _ => {}
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "time grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Uniform grid `0, dt, ..., t_final`.
pub fn uniform_grid(dt: f64, t_final: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let steps = step_count(dt, t_final)?;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

struct Riccati {
    rate: C64,
    source: C64,
}

impl Riccati {
    fn new(bath: &BathModel) -> Self {
        Riccati {
            rate: C64::new(bath.lambda, -bath.delta),
            source: bath.alpha(),
        }
    }

    #[inline]
    fn rhs(&self, f: C64) -> C64 {
        f * f - self.rate * f + self.source
    }
}

fn substeps(h: f64) -> usize {
    ((h / MAX_SUBSTEP) - 1e-9).ceil().max(1.0) as usize
}

/// Integrates the Riccati equation for `F(t)` with RK4 and samples it on
/// `t_grid`.
pub fn solve_f(bath: &BathModel, t_grid: &[f64]) -> Result<Vec<C64>> {
    bath.validate()?;
    validate_grid(t_grid)?;
    let eq = Riccati::new(bath);
    let mut f = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(f);
    for w in t_grid.windows(2) {
        let n = substeps(w[1] - w[0]);
        let h = (w[1] - w[0]) / n as f64;
        for _ in 0..n {
            let k1 = eq.rhs(f);
            let k2 = eq.rhs(f + k1 * (0.5 * h));
            let k3 = eq.rhs(f + k2 * (0.5 * h));
            let k4 = eq.rhs(f + k3 * h);
            f += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        }
        if !(f.norm() <= RICCATI_BLOWUP) {
            return Err(Error::RiccatiBlowUp {
                time: w[1],
                magnitude: f.norm(),
            });
        }
        out.push(f);
    }
    Ok(out)
}

/// Rotating-wave master-equation solution on a grid.
#[derive(Clone, Debug)]
pub struct RwaSolution {
    pub times: Vec<f64>,
    pub f_values: Vec<C64>,
    pub states: Vec<QubitMatrix>,
    pub regime: DecayRegime,
}

impl RwaSolution {
    pub fn trajectory(&self) -> Trajectory {
        Trajectory::new(self.times.clone(), self.states.clone())
    }
}

struct MasterEquation {
    half_epsilon: f64,
    riccati: Riccati,
}

impl MasterEquation {
    /// Joint right-hand side for `(F, rho)`.
    fn rhs(&self, f: C64, rho: &QubitMatrix) -> (C64, QubitMatrix) {
        let sz = QubitMatrix::sigma_z();
        let sm = QubitMatrix::sigma_minus();
        let sp = QubitMatrix::sigma_plus();
        let n_e = sp * sm;
        let jump = sm * *rho * sp;
        let mut d = commutator(&sz, rho) * C64::new(0.0, -self.half_epsilon);
        d.add_scaled(f, &(jump - n_e * *rho));
        d.add_scaled(f.conj(), &(jump - *rho * n_e));
        (self.riccati.rhs(f), d)
    }
}

/// Integrates the exact rotating-wave master equation from `rho0`.
pub fn propagate_rwa(rho0: &QubitMatrix, bath: &BathModel, t_grid: &[f64]) -> Result<RwaSolution> {
    rho0.validate_density()?;
    propagate_rwa_operator(rho0, bath, t_grid)
}

/// As [`propagate_rwa`] for an arbitrary initial operator.
pub fn propagate_rwa_operator(
    x: &QubitMatrix,
    bath: &BathModel,
    t_grid: &[f64],
) -> Result<RwaSolution> {
    bath.validate()?;
    validate_grid(t_grid)?;
    let eq = MasterEquation {
        half_epsilon: 0.5 * bath.epsilon,
        riccati: Riccati::new(bath),
    };
    let mut f = C64::new(0.0, 0.0);
    let mut rho = *x;
    let mut f_values = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    f_values.push(f);
    states.push(rho);
    for w in t_grid.windows(2) {
        let n = substeps(w[1] - w[0]);
        let h = (w[1] - w[0]) / n as f64;
        for _ in 0..n {
            let (a1, b1) = eq.rhs(f, &rho);
            let (a2, b2) = eq.rhs(f + a1 * (0.5 * h), &(rho + b1 * (0.5 * h)));
            let (a3, b3) = eq.rhs(f + a2 * (0.5 * h), &(rho + b2 * (0.5 * h)));
            let (a4, b4) = eq.rhs(f + a3 * h, &(rho + b3 * h));
            f += (a1 + (a2 + a3) * 2.0 + a4) * (h / 6.0);
            rho += (b1 + (b2 + b3) * 2.0 + b4) * (h / 6.0);
        }
        if !(f.norm() <= RICCATI_BLOWUP) {
            return Err(Error::RiccatiBlowUp {
                time: w[1],
                magnitude: f.norm(),
            });
        }
        f_values.push(f);
        states.push(rho);
    }
    Ok(RwaSolution {
        times: t_grid.to_vec(),
        f_values,
        states,
        regime: decay_regime(bath),
    })
}

/// The exact rotating-wave solution as a [`Dynamics`] engine.
#[derive(Clone, Copy, Debug)]
pub struct RwaDynamics {
    pub bath: BathModel,
    pub dt: f64,
    pub t_final: f64,
}

impl RwaDynamics {
    pub fn new(bath: BathModel, dt: f64, t_final: f64) -> Self {
        RwaDynamics { bath, dt, t_final }
    }
}

impl Dynamics for RwaDynamics {
    fn evolve_operator(&self, x: &QubitMatrix) -> Result<Trajectory> {
        let grid = uniform_grid(self.dt, self.t_final)?;
        propagate_rwa_operator(x, &self.bath, &grid).map(|s| s.trajectory())
    }

    fn grid_dt(&self) -> f64 {
        self.dt
    }

    fn t_final(&self) -> f64 {
        self.t_final
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::Statistics;

    fn fig_bath() -> BathModel {
        BathModel::baseline()
    }

    #[test]
    fn omega_value() {
        let om = omega(&fig_bath());
        assert!((om.re - 0.006f64.sqrt()).abs() < 1e-15);
        assert_eq!(om.im, 0.0);
        assert!((om.re - 0.0774597).abs() < 1e-7);
    }

    #[test]
    fn g_starts_at_one_and_f_at_zero() {
        assert_eq!(closed_form_g(&fig_bath(), 0.0).unwrap(), 1.0);
        assert!(closed_form_f(&fig_bath(), 0.0).unwrap().norm() < 1e-17);
        let grid = uniform_grid(0.01, 1.0).unwrap();
        assert_eq!(solve_f(&fig_bath(), &grid).unwrap()[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn g_at_fifty() {
        // direct evaluation of the hyperbolic form
        let om = 0.006f64.sqrt();
        let x = 0.5 * om * 50.0;
        let expected = (-2.5f64).exp() * (x.cosh() + 0.1 / om * x.sinh());
        let g = closed_form_g(&fig_bath(), 50.0).unwrap();
        assert!((g - expected).abs() < 1e-15);
        assert!((g - 0.650_304_548_282_080_4).abs() < 1e-12, "{g}");
    }

    #[test]
    fn decoupled_f_vanishes() {
        let bath = fig_bath().with_gamma0(0.0).with_delta(0.7);
        let grid = uniform_grid(0.05, 10.0).unwrap();
        assert!(solve_f(&bath, &grid)
            .unwrap()
            .iter()
            .all(|f| f.norm() == 0.0));
    }

    #[test]
    fn f_saturates() {
        let b = fig_bath();
        let limit = 0.5 * (b.lambda - omega(&b).re);
        let f = closed_form_f(&b, 1e4).unwrap();
        assert!((f.re - limit).abs() < 1e-12);
        let grid = uniform_grid(0.01, 400.0).unwrap();
        let numeric = *solve_f(&b, &grid).unwrap().last().unwrap();
        assert!((numeric.re - limit).abs() < 1e-9);
    }

    #[test]
    fn closed_form_requires_zero_detuning() {
        assert!(closed_form_g(&fig_bath().with_delta(0.1), 1.0).is_err());
        assert!(closed_form_f(&fig_bath().with_delta(0.1), 1.0).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(decay_regime(&fig_bath()), DecayRegime::Overdamped);
        assert_eq!(
            decay_regime(&fig_bath().with_gamma0(0.05)),
            DecayRegime::Critical
        );
        assert_eq!(
            decay_regime(&fig_bath().with_gamma0(0.2)),
            DecayRegime::Underdamped
        );
    }

    #[test]
    fn strong_coupling_closed_forms_are_consistent() {
        // oscillating G: compare F = -G'/G against the Riccati ODE before the
        // first zero of G
        let b = BathModel::new(2.0, 0.1, 0.2, 0.0, Statistics::Bose).unwrap();
        let grid = uniform_grid(0.01, 8.0).unwrap();
        let f = solve_f(&b, &grid).unwrap();
        for (t, fv) in grid.iter().zip(&f).step_by(50) {
            let exact = closed_form_f(&b, *t).unwrap();
            assert!((exact - fv).norm() < 1e-9, "t={t}: {exact} vs {fv}");
        }
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(solve_f(&fig_bath(), &[]).is_err());
        assert!(solve_f(&fig_bath(), &[0.5, 1.0]).is_err());
        assert!(solve_f(&fig_bath(), &[0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn ground_state_is_fixed() {
        let grid = uniform_grid(0.01, 20.0).unwrap();
        let sol =
            propagate_rwa(&QubitMatrix::ground(), &fig_bath().with_delta(0.4), &grid).unwrap();
        for s in &sol.states {
            assert!((*s - QubitMatrix::ground()).max_abs() < 1e-15);
        }
    }
}
