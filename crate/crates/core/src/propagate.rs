//! Time-ordered propagation and cyclic-phase extraction.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::frames::prepare_branch;
use crate::hamiltonian::{gate_phase, h_rotating};
use crate::linalg::expm_unitary;
use crate::model::{to_angular, QuantumState, RotatingField, Spin, SpinConstants, StaticFields};
use crate::{CMatrix, CVector};

/// Steps per period of the fast rotation in the default gate step.
pub const STEPS_PER_FAST_PERIOD: f64 = 40.0;
/// Maximum number of step halvings before giving up on a tolerance.
pub const MAX_HALVINGS: u32 = 3;
/// Below this overlap the evolution is not cyclic and no phase is defined.
pub const CYCLIC_OVERLAP_MIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Exact exponential of H at each step midpoint.
    PiecewiseExpm,
    /// Classical fourth-order Runge–Kutta on the state.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationConfig {
    /// Integrator step, µs.
    pub step: f64,
    pub method: Method,
    /// Self-convergence target for step halving; `None` runs the step once.
    pub tolerance: Option<f64>,
}

impl PropagationConfig {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            method: Method::PiecewiseExpm,
            tolerance: None,
        }
    }

    /// Step resolving the fast rotation of `r` by 40 steps per period.
    pub fn for_field(r: &RotatingField) -> Self {
        Self::new(1.0 / (STEPS_PER_FAST_PERIOD * r.omega.abs()))
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn with_tolerance(self, tolerance: f64) -> Self {
        Self {
            tolerance: Some(tolerance),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(invalid("step_us", "must be finite and > 0"));
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(invalid("tolerance", "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

fn minus_i(v: &CVector) -> CVector {
    v.scale(Complex64::new(0.0, -1.0))
}

fn rk4_step(h: &impl Fn(f64) -> CMatrix, v: &CVector, t: f64, dt: f64) -> CVector {
    let f = |t: f64, v: &CVector| minus_i(&h(t).mul_vec(v));
    let half = Complex64::new(dt / 2.0, 0.0);
    let k1 = f(t, v);
    let k2 = f(t + dt / 2.0, &(*v + k1.scale(half)));
    let k3 = f(t + dt / 2.0, &(*v + k2.scale(half)));
    let k4 = f(t + dt, &(*v + k3.scale(dt.into())));
    let sum = k1 + k2.scale(2.0.into()) + k3.scale(2.0.into()) + k4;
    *v + sum.scale((dt / 6.0).into())
}

fn step_count(t0: f64, t1: f64, step: f64) -> usize {
    (((t1 - t0) / step).ceil() as usize).max(1)
}

fn evolve(
    h: &impl Fn(f64) -> CMatrix,
    v: &CVector,
    t0: f64,
    t1: f64,
    step: f64,
    method: Method,
) -> Result<CVector> {
    if t1 == t0 {
        return Ok(*v);
    }
    let n = step_count(t0, t1, step);
    let dt = (t1 - t0) / n as f64;
    let mut psi = *v;
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        psi = match method {
            Method::PiecewiseExpm => expm_unitary(&h(t + dt / 2.0), dt)?.mul_vec(&psi),
            Method::Rk4 => rk4_step(h, &psi, t, dt),
        };
    }
    Ok(psi)
}

fn warn_on_coarse_step(h: &impl Fn(f64) -> CMatrix, t0: f64, step: f64) {
    // Frobenius norm bounds the largest eigenfrequency.
    let w = h(t0).frobenius_norm();
    if step * w > 0.1 {
        log::warn!("step {step:.3e} µs times |H| {w:.3e} rad/µs exceeds 0.1 rad");
    }
}

/// Evolve any vector (dim 2..8) from `t0` to `t1` under `h`.
pub fn propagate_vector(
    h: impl Fn(f64) -> CMatrix,
    v: &CVector,
    t0: f64,
    t1: f64,
    cfg: &PropagationConfig,
) -> Result<CVector> {
    cfg.validate()?;
    if !(t1 >= t0) {
        return Err(invalid("t1", "must be >= t0"));
    }
    warn_on_coarse_step(&h, t0, cfg.step);
    let mut step = cfg.step;
    let mut current = evolve(&h, v, t0, t1, step, cfg.method)?;
    let Some(tolerance) = cfg.tolerance else {
        return Ok(current);
    };
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        step /= 2.0;
        let refined = evolve(&h, v, t0, t1, step, cfg.method)?;
        change = refined.max_abs_diff(&current);
        current = refined;
        if change < tolerance {
            return Ok(current);
        }
    }
    Err(Error::Convergence { change, tolerance })
}

/// `U(t1, t0)ψ₀` for a normalized state.
pub fn propagate(
    h: impl Fn(f64) -> CMatrix,
    psi0: &QuantumState,
    t0: f64,
    t1: f64,
    cfg: &PropagationConfig,
) -> Result<QuantumState> {
    let v = propagate_vector(h, psi0.vector(), t0, t1, cfg)?;
    QuantumState::new(v)
}

/// Time-ordered propagator as a matrix (midpoint exponentials, fixed step).
pub fn propagate_unitary(
    h: impl Fn(f64) -> CMatrix,
    dim: usize,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<CMatrix> {
    if !(step.is_finite() && step > 0.0) {
        return Err(invalid("step_us", "must be finite and > 0"));
    }
    let mut u = CMatrix::identity(dim);
    if t1 == t0 {
        return Ok(u);
    }
    let n = step_count(t0, t1, step);
    let dt = (t1 - t0) / n as f64;
    for k in 0..n {
        let t = t0 + (k as f64 + 0.5) * dt;
        u = expm_unitary(&h(t), dt)? * u;
    }
    Ok(u)
}

/// Phase Ω with ψT = e^{−iΩ}ψ₀, in (−π, π], and the cyclicity defect
/// 1 − |⟨ψ₀|ψT⟩|.
pub fn global_phase(psi0: &CVector, psi_t: &CVector) -> Result<(f64, f64)> {
    let overlap = psi0.inner(psi_t);
    let magnitude = overlap.norm();
    if magnitude < CYCLIC_OVERLAP_MIN {
        return Err(Error::NonCyclic { overlap: magnitude });
    }
    let mut phase = -overlap.arg();
    if phase <= -PI {
        phase += 2.0 * PI;
    }
    Ok((phase, (1.0 - magnitude).max(0.0)))
}

fn wrap(angle: f64) -> f64 {
    let w = angle.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Phases accumulated by the two nuclear branches over a gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseResult {
    /// Ω↑, rad (per-cycle phases summed).
    pub omega_up: f64,
    /// Ω↓, rad.
    pub omega_down: f64,
    /// d/dt(Ω↑ − Ω↓) − A∥, rad/µs (nuclear rotating frame).
    pub delta_omega_rate: f64,
    /// d/dt(Ω↑ − Ω↓) without the A∥ correction, rad/µs.
    pub raw_rate: f64,
    /// Worst per-cycle 1 − |⟨ψ|U(τ)|ψ⟩| for ↑ and ↓.
    pub cyclicity: [f64; 2],
    /// Slow-rotation cycles propagated.
    pub cycles: u32,
    /// Propagated time, µs.
    pub duration: f64,
}

impl PhaseResult {
    /// Time to accumulate a relative phase π at the corrected rate, µs.
    pub fn pi_gate_time(&self) -> f64 {
        PI / self.delta_omega_rate.abs()
    }
}

/// Prepare each nuclear branch in the static eigenstate, switch suddenly to
/// the rotating drive with φ = ω′t + φ₀, and read off the phase of every
/// slow-rotation cycle.
pub fn run_gate(
    c: &SpinConstants,
    s: &StaticFields,
    r: &RotatingField,
    cfg: &PropagationConfig,
) -> Result<PhaseResult> {
    run_gate_with(c, s, r, cfg, |t| h_rotating(c, r, t, gate_phase(r, t)))
}

/// [`run_gate`] under an arbitrary gate Hamiltonian on electron ⊗ ¹⁵N.
pub fn run_gate_with(
    c: &SpinConstants,
    s: &StaticFields,
    r: &RotatingField,
    cfg: &PropagationConfig,
    h: impl Fn(f64) -> CMatrix + Copy,
) -> Result<PhaseResult> {
    run_gate_traced(c, s, r, cfg, h).map(|(result, _)| result)
}

/// Accumulated phases at the end of one slow-rotation cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleRecord {
    pub cycle: u32,
    /// µs.
    pub time: f64,
    pub omega_up: f64,
    pub omega_down: f64,
    /// Unwrapped Ω↑ − Ω↓, rad.
    pub relative: f64,
}

/// [`run_gate_with`] that also returns the per-cycle phase history.
pub fn run_gate_traced(
    c: &SpinConstants,
    s: &StaticFields,
    r: &RotatingField,
    cfg: &PropagationConfig,
    h: impl Fn(f64) -> CMatrix + Copy,
) -> Result<(PhaseResult, Vec<CycleRecord>)> {
    c.validate()?;
    s.validate()?;
    r.validate()?;
    let raw_cycles = r.cycles();
    let cycles = raw_cycles.round().max(1.0);
    if (raw_cycles - cycles).abs() > 1e-6 {
        log::warn!("gate duration spans {raw_cycles:.4} slow cycles; using {cycles}");
    }
    let cycles = cycles as u32;
    let tau = r.cycle_period();

    let mut states = [
        *prepare_branch(c, s, Spin::Up)?.vector(),
        *prepare_branch(c, s, Spin::Down)?.vector(),
    ];
    let mut omega = [0.0; 2];
    let mut cyclicity = [0.0f64; 2];
    let mut relative = 0.0;
    let mut trace = Vec::with_capacity(cycles as usize);
    for k in 0..cycles {
        let (t0, t1) = (k as f64 * tau, (k + 1) as f64 * tau);
        let mut cycle_phase = [0.0; 2];
        for b in 0..2 {
            let next = propagate_vector(h, &states[b], t0, t1, cfg)?;
            let (phase, defect) = global_phase(&states[b], &next)?;
            cycle_phase[b] = phase;
            omega[b] += phase;
            cyclicity[b] = cyclicity[b].max(defect);
            states[b] = next;
        }
        // Per-cycle differences are small, so wrapping them is unambiguous
        // even when the individual phases sit near ±π.
        relative += wrap(cycle_phase[0] - cycle_phase[1]);
        trace.push(CycleRecord {
            cycle: k + 1,
            time: t1,
            omega_up: omega[0],
            omega_down: omega[1],
            relative,
        });
    }
    let duration = cycles as f64 * tau;
    let raw_rate = relative / duration;
    let result = PhaseResult {
        omega_up: omega[0],
        omega_down: omega[1],
        delta_omega_rate: raw_rate - to_angular(c.a_par_n),
        raw_rate,
        cyclicity,
        cycles,
        duration,
    };
    Ok((result, trace))
}
