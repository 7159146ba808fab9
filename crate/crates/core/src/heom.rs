//! Truncated hierarchy of auxiliary density matrices for a single-exponential
//! bath, with bosonic and fermionic generators and fixed-step RK4 propagation.
//!
//! Auxiliaries `rho^(m,n)` are kept for `m + n <= depth`; anything above the
//! simplex is treated as zero.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::{BathModel, Statistics};
use rayon::prelude::*;

use crate::dynamics::{DynamicalMap, Dynamics, Trajectory};
use crate::error::{Error, Result};
use crate::operators::{CouplingOperator, QubitMatrix};

/// Entry magnitude above which a propagation is declared divergent.
pub const DIVERGENCE_MAGNITUDE: f64 = 1e6;
/// Drift of `Tr rho^(0,0)` above which a propagation is declared divergent.
pub const DIVERGENCE_TRACE_DRIFT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, Default)]
struct Links {
    down_m: Option<usize>,
    down_n: Option<usize>,
    up_m: Option<usize>,
    up_n: Option<usize>,
}

/// Index bookkeeping for a triangular hierarchy of a given depth.
#[derive(Debug)]
pub struct HierarchyLayout {
    depth: usize,
    indices: Vec<(usize, usize)>,
    offsets: Vec<Option<usize>>,
    links: Vec<Links>,
}

impl HierarchyLayout {
    pub fn new(depth: usize) -> Self {
        let side = depth + 1;
        let mut indices = Vec::with_capacity(side * (side + 1) / 2);
        for tier in 0..=depth {
            for m in (0..=tier).rev() {
                indices.push((m, tier - m));
            }
        }
        let mut offsets = vec![None; side * side];
        for (k, &(m, n)) in indices.iter().enumerate() {
            offsets[m * side + n] = Some(k);
        }
        let lookup = |m: usize, n: usize| -> Option<usize> {
            if m + n > depth {
                None
            } else {
                offsets[m * side + n]
            }
        };
        let links = indices
            .iter()
            .map(|&(m, n)| Links {
                down_m: m.checked_sub(1).and_then(|mm| lookup(mm, n)),
                down_n: n.checked_sub(1).and_then(|nn| lookup(m, nn)),
                up_m: lookup(m + 1, n),
                up_n: lookup(m, n + 1),
            })
            .collect();
        HierarchyLayout {
            depth,
            indices,
            offsets,
            links,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn offset(&self, m: usize, n: usize) -> Option<usize> {
        if m + n > self.depth {
            return None;
        }
        self.offsets[m * (self.depth + 1) + n]
    }
}

/// Snapshot of the whole hierarchy at one instant.
#[derive(Clone, Debug)]
pub struct HierarchyState {
    layout: Arc<HierarchyLayout>,
    matrices: Vec<QubitMatrix>,
    time: f64,
}

impl HierarchyState {
    /// `rho^(0,0) = rho0`, every auxiliary zero.
    pub fn initial(rho0: QubitMatrix, depth: usize) -> Self {
        Self::initial_with_layout(rho0, Arc::new(HierarchyLayout::new(depth)))
    }

    fn initial_with_layout(rho0: QubitMatrix, layout: Arc<HierarchyLayout>) -> Self {
        let mut matrices = vec![QubitMatrix::ZERO; layout.len()];
        matrices[0] = rho0;
        HierarchyState {
            layout,
            matrices,
            time: 0.0,
        }
    }

    pub fn depth(&self) -> usize {
        self.layout.depth
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn layout(&self) -> &HierarchyLayout {
        &self.layout
    }

    pub fn matrices(&self) -> &[QubitMatrix] {
        &self.matrices
    }

    pub fn matrices_mut(&mut self) -> &mut [QubitMatrix] {
        &mut self.matrices
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&QubitMatrix> {
        self.layout.offset(m, n).map(|k| &self.matrices[k])
    }

    /// The physical reduced density matrix `rho^(0,0)`.
    pub fn reduced(&self) -> &QubitMatrix {
        &self.matrices[0]
    }

    /// `max |rho^(m,n)^dagger - rho^(n,m)|` over the hierarchy.
    pub fn pair_asymmetry(&self) -> f64 {
        self.layout
            .indices
            .iter()
            .enumerate()
            .map(|(k, &(m, n))| {
                let mirror = self.get(n, m).expect("layout is symmetric");
                (self.matrices[k].dagger() - *mirror).max_abs()
            })
            .fold(0.0, f64::max)
    }

    fn max_abs(&self) -> f64 {
        self.matrices
            .iter()
            .map(QubitMatrix::max_abs)
            .fold(0.0, |a, b| {
                if b.is_nan() || a.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            })
    }
}

/// The linear generator `d/dt rho^(m,n) = ...` for one bath and coupling.
#[derive(Clone, Debug)]
pub struct Generator {
    layout: Arc<HierarchyLayout>,
    statistics: Statistics,
    half_epsilon: f64,
    alpha: C64,
    beta: C64,
    l: QubitMatrix,
    l_dag: QubitMatrix,
}

impl Generator {
    pub fn new(bath: &BathModel, coupling: &CouplingOperator, depth: usize) -> Result<Self> {
        bath.validate()?;
        if depth == 0 {
            return Err(Error::InvalidParameter(
                "hierarchy depth must be at least 1".into(),
            ));
        }
        Ok(Generator {
            layout: Arc::new(HierarchyLayout::new(depth)),
            statistics: bath.statistics,
            half_epsilon: 0.5 * bath.epsilon,
            alpha: bath.alpha(),
            beta: bath.beta(),
            l: *coupling.matrix(),
            l_dag: coupling.adjoint(),
        })
    }

    pub fn with_statistics(mut self, statistics: Statistics) -> Self {
        self.statistics = statistics;
        self
    }

    pub fn layout(&self) -> &Arc<HierarchyLayout> {
        &self.layout
    }

    pub fn initial_state(&self, rho0: QubitMatrix) -> HierarchyState {
        HierarchyState::initial_with_layout(rho0, Arc::clone(&self.layout))
    }

    /// Writes the time derivative of every auxiliary in `input` into `out`.
    pub fn apply(&self, input: &[QubitMatrix], out: &mut [QubitMatrix]) {
        debug_assert_eq!(input.len(), self.layout.len());
        debug_assert_eq!(out.len(), self.layout.len());
        let fermi = self.statistics == Statistics::Fermi;
        let (l, ld) = (self.l, self.l_dag);
        let eps = self.half_epsilon;
        // -i[H_s, .] with H_s = eps/2 sigma_z only touches the coherences
        let free_eg = C64::new(0.0, -2.0 * eps);
        let free_ge = C64::new(0.0, 2.0 * eps);

        for (k, &(m, n)) in self.layout.indices.iter().enumerate() {
            let rho = &input[k];
            let links = &self.layout.links[k];
            let damping = -(self.beta * m as f64 + self.beta.conj() * n as f64);

            let mut d = QubitMatrix::new(
                damping * rho.0[0][0],
                (damping + free_eg) * rho.0[0][1],
                (damping + free_ge) * rho.0[1][0],
                damping * rho.0[1][1],
            );

            let (w_down_m, w_down_n) = if fermi {
                ((m % 2) as f64, (n % 2) as f64)
            } else {
                (m as f64, n as f64)
            };
            if let Some(j) = links.down_m {
                if w_down_m != 0.0 {
                    d.add_scaled(self.alpha * w_down_m, &(l * input[j]));
                }
            }
            if let Some(j) = links.down_n {
                if w_down_n != 0.0 {
                    d.add_scaled(self.alpha.conj() * w_down_n, &(input[j] * ld));
                }
            }

            if let Some(j) = links.up_m {
                let up = input[j];
                if fermi {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    d += (up * ld) * sign - ld * up;
                } else {
                    d += up * ld - ld * up;
                }
            }
            if let Some(j) = links.up_n {
                let up = input[j];
                if fermi {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    d += (l * up) * sign - up * l;
                } else {
                    d += l * up - up * l;
                }
            }
            out[k] = d;
        }
    }

    /// One classical RK4 step of size `dt`, in place.
    pub fn rk4_step(&self, state: &mut HierarchyState, dt: f64, scratch: &mut Rk4Scratch) {
        let y = &mut state.matrices;
        let Rk4Scratch {
            k1,
            k2,
            k3,
            k4,
            tmp,
        } = scratch;
        let h = C64::new(dt, 0.0);
        let half = C64::new(0.5 * dt, 0.0);

        self.apply(y, k1);
        for i in 0..y.len() {
            tmp[i] = y[i];
            tmp[i].add_scaled(half, &k1[i]);
        }
        self.apply(tmp, k2);
        for i in 0..y.len() {
            tmp[i] = y[i];
            tmp[i].add_scaled(half, &k2[i]);
        }
        self.apply(tmp, k3);
        for i in 0..y.len() {
            tmp[i] = y[i];
            tmp[i].add_scaled(h, &k3[i]);
        }
        self.apply(tmp, k4);
        let sixth = C64::new(dt / 6.0, 0.0);
        for i in 0..y.len() {
            let incr = k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i];
            y[i].add_scaled(sixth, &incr);
        }
        state.time += dt;
    }

    pub fn scratch(&self) -> Rk4Scratch {
        let n = self.layout.len();
        Rk4Scratch {
            k1: vec![QubitMatrix::ZERO; n],
            k2: vec![QubitMatrix::ZERO; n],
            k3: vec![QubitMatrix::ZERO; n],
            k4: vec![QubitMatrix::ZERO; n],
            tmp: vec![QubitMatrix::ZERO; n],
        }
    }

    /// Integrates from `x` at t = 0 for `steps` steps, calling `observe` at
    /// every grid point including t = 0.
    pub fn run<F>(
        &self,
        x: QubitMatrix,
        dt: f64,
        steps: usize,
        mut observe: F,
    ) -> Result<HierarchyState>
    where
        F: FnMut(&HierarchyState),
    {
        let mut state = self.initial_state(x);
        let mut scratch = self.scratch();
        let trace0 = x.trace();
        observe(&state);
        for i in 1..=steps {
            self.rk4_step(&mut state, dt, &mut scratch);
            // keep the grid exact rather than accumulating dt
            state.time = i as f64 * dt;
            let magnitude = state.max_abs();
            if !(magnitude <= DIVERGENCE_MAGNITUDE) {
                return Err(Error::Divergence {
                    time: state.time,
                    reason: format!("auxiliary entry magnitude {magnitude:.3e}"),
                });
            }
            let drift = (state.reduced().trace() - trace0).norm();
            if drift > DIVERGENCE_TRACE_DRIFT {
                return Err(Error::Divergence {
                    time: state.time,
                    reason: format!("trace drift {drift:.3e}"),
                });
            }
            observe(&state);
        }
        Ok(state)
    }
}

pub struct Rk4Scratch {
    k1: Vec<QubitMatrix>,
    k2: Vec<QubitMatrix>,
    k3: Vec<QubitMatrix>,
    k4: Vec<QubitMatrix>,
    tmp: Vec<QubitMatrix>,
}

fn rhs_with(
    state: &HierarchyState,
    bath: &BathModel,
    coupling: &CouplingOperator,
    statistics: Statistics,
) -> Result<Vec<QubitMatrix>> {
    let mut generator = Generator::new(bath, coupling, state.depth())?.with_statistics(statistics);
    generator.layout = Arc::clone(&state.layout);
    let mut out = vec![QubitMatrix::ZERO; state.matrices.len()];
    generator.apply(&state.matrices, &mut out);
    Ok(out)
}

/// Time derivative of every auxiliary under the bosonic hierarchy,
/// ordered as `state.layout().indices()`.
pub fn bosonic_rhs(
    state: &HierarchyState,
    bath: &BathModel,
    coupling: &CouplingOperator,
) -> Result<Vec<QubitMatrix>> {
    rhs_with(state, bath, coupling, Statistics::Bose)
}

/// Time derivative under the fermionic hierarchy, where the down-coupling
/// weights are `m mod 2` and the up-couplings pick up parity signs.
pub fn fermionic_rhs(
    state: &HierarchyState,
    bath: &BathModel,
    coupling: &CouplingOperator,
) -> Result<Vec<QubitMatrix>> {
    rhs_with(state, bath, coupling, Statistics::Fermi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub t_final: f64,
    pub depth: usize,
    pub depth_tolerance: f64,
    pub max_depth: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            dt: 0.005,
            t_final: 50.0,
            depth: 10,
            depth_tolerance: 1e-8,
            max_depth: 40,
        }
    }
}

impl PropagatorConfig {
    /// Defaults with the starting depth picked for the coupling: the
    /// rotating-wave hierarchy closes at depth 2, otherwise start at 10.
    pub fn for_coupling(coupling: &CouplingOperator) -> Self {
        let depth = if coupling.chi() == 0.0 { 2 } else { 10 };
        PropagatorConfig {
            depth,
            ..Self::default()
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t_final(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        if !(self.depth_tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "depth_tolerance must be positive".into(),
            ));
        }
        self.steps().map(|_| ())
    }

    /// Number of RK4 steps; `t_final` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        step_count(self.dt, self.t_final)
    }
}

pub(crate) fn step_count(dt: f64, t_final: f64) -> Result<usize> {
    let ratio = t_final / dt;
    let steps = ratio.round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "t_final {t_final} is not a whole multiple of dt {dt}"
        )));
    }
    Ok(steps as usize)
}

/// Integrates the hierarchy selected by `bath.statistics` and returns the
/// reduced density matrix on the uniform grid `0, dt, ..., t_final`.
pub fn propagate(
    rho0: &QubitMatrix,
    bath: &BathModel,
    coupling: &CouplingOperator,
    cfg: &PropagatorConfig,
) -> Result<Trajectory> {
    rho0.validate_density()?;
    propagate_operator(rho0, bath, coupling, cfg)
}

/// Like [`propagate`] but for an arbitrary initial operator; the hierarchy
/// is linear, so this is how basis images of the dynamical map are built.
pub fn propagate_operator(
    x: &QubitMatrix,
    bath: &BathModel,
    coupling: &CouplingOperator,
    cfg: &PropagatorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = cfg.steps()?;
    let generator = Generator::new(bath, coupling, cfg.depth)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    generator.run(*x, cfg.dt, steps, |s| {
        times.push(s.time());
        states.push(*s.reduced());
    })?;
    Ok(Trajectory::new(times, states))
}

/// HEOM propagation packaged as a [`Dynamics`] engine.
#[derive(Clone, Copy, Debug)]
pub struct HeomDynamics {
    pub bath: BathModel,
    pub coupling: CouplingOperator,
    pub cfg: PropagatorConfig,
}

impl HeomDynamics {
    pub fn new(bath: BathModel, coupling: CouplingOperator, cfg: PropagatorConfig) -> Self {
        HeomDynamics {
            bath,
            coupling,
            cfg,
        }
    }
}

impl Dynamics for HeomDynamics {
    fn evolve_operator(&self, x: &QubitMatrix) -> Result<Trajectory> {
        propagate_operator(x, &self.bath, &self.coupling, &self.cfg)
    }

    fn grid_dt(&self) -> f64 {
        self.cfg.dt
    }

    fn t_final(&self) -> f64 {
        self.cfg.t_final
    }
}

/// Outcome of a depth-convergence search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthVerdict {
    pub depth: usize,
    /// `max_t |rho_N(t) - rho_{N+2}(t)|_max` at the accepted depth.
    pub residual: f64,
    pub tolerance: f64,
}

/// Smallest depth `N >= cfg.depth` for which the reduced dynamics of every
/// operator in `probes` changes by less than `cfg.depth_tolerance` when the
/// hierarchy is deepened to `N + 2`.
pub fn converged_depth_for(
    probes: &[QubitMatrix],
    bath: &BathModel,
    coupling: &CouplingOperator,
    cfg: &PropagatorConfig,
) -> Result<DepthVerdict> {
    search_depth(probes, bath, coupling, cfg).map(|(v, _)| v)
}

fn search_depth(
    probes: &[QubitMatrix],
    bath: &BathModel,
    coupling: &CouplingOperator,
    cfg: &PropagatorConfig,
) -> Result<(DepthVerdict, Vec<Trajectory>)> {
    cfg.validate()?;
    let mut cache: BTreeMap<usize, Vec<Trajectory>> = BTreeMap::new();
    let mut residual = f64::INFINITY;
    for depth in cfg.depth..=cfg.max_depth {
        for d in [depth, depth + 2] {
            if let Entry::Vacant(slot) = cache.entry(d) {
                let c = cfg.with_depth(d);
                let trajs = probes
                    .par_iter()
                    .map(|x| propagate_operator(x, bath, coupling, &c))
                    .collect::<Result<Vec<_>>>()?;
                slot.insert(trajs);
            }
        }
        residual = cache[&depth]
            .iter()
            .zip(&cache[&(depth + 2)])
            .map(|(a, b)| a.max_difference(b))
            .fold(0.0, f64::max);
        if residual < cfg.depth_tolerance {
            let verdict = DepthVerdict {
                depth,
                residual,
                tolerance: cfg.depth_tolerance,
            };
            return Ok((verdict, cache.remove(&depth).unwrap()));
        }
    }
    Err(Error::DepthNotConverged {
        max_depth: cfg.max_depth,
        tolerance: cfg.depth_tolerance,
        residual,
    })
}

/// Depth search over all four matrix units, returning the dynamical map at
/// the accepted depth. Convergence of the map bounds the error for every
/// initial state.
pub fn converged_map(
    bath: &BathModel,
    coupling: &CouplingOperator,
    cfg: &PropagatorConfig,
) -> Result<(DepthVerdict, DynamicalMap)> {
    let (verdict, trajs) = search_depth(&DynamicalMap::UNITS, bath, coupling, cfg)?;
    Ok((verdict, DynamicalMap::from_unit_trajectories(trajs)))
}

/// Smallest converged depth for a single initial state.
pub fn converged_depth(
    rho0: &QubitMatrix,
    bath: &BathModel,
    coupling: &CouplingOperator,
    cfg: &PropagatorConfig,
) -> Result<usize> {
    rho0.validate_density()?;
    converged_depth_for(std::slice::from_ref(rho0), bath, coupling, cfg).map(|v| v.depth)
}
