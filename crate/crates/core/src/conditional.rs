//! ¹³C-controlled ¹⁵N phase gate.
//!
//! The ¹³C spin enters as an effective field: γeB₀ → γeB₀ ± A∥ᶜ/2 for the
//! two carbon projections.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::frames::prepare_input;
use crate::hamiltonian::{gate_phase, h_conditional, h_rotating_biased};
use crate::model::{to_angular, RotatingField, Spin, SpinConstants, StaticFields};
use crate::propagate::{propagate_vector, run_gate_with, PhaseResult, PropagationConfig};
use crate::CVector;

/// Default number of series terms.
pub const DEFAULT_KMAX: usize = 10;
/// Above this |A∥ᴺ/(2γeB₀ ± A∥ᶜ)| the substitution picture is doubtful.
pub const WEAK_NITROGEN_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalReport {
    /// Geometric gate speed with γeB₀ + A∥ᶜ/2, rad/µs.
    pub shift_plus: f64,
    /// Geometric gate speed with γeB₀ − A∥ᶜ/2, rad/µs.
    pub shift_minus: f64,
    /// Truncated series for shift_plus − shift_minus, rad/µs.
    pub relative: f64,
    /// Signed contribution of each k = 1..=kmax, rad/µs.
    pub series_terms: Vec<f64>,
    pub kmax: usize,
    /// π/|relative|, µs (infinite when the carbon decouples).
    pub gate_time: f64,
    /// shift_plus − shift_minus without expanding, rad/µs.
    pub exact_difference: f64,
    /// Magnitude of the first omitted term, rad/µs.
    pub truncation_bound: f64,
}

fn geometric_rate(c: &SpinConstants, gamma_b: f64, d_e: f64, omega_prime: f64) -> f64 {
    to_angular(omega_prime / 2.0 * (d_e / gamma_b).powi(2) * c.a_par_n / gamma_b)
}

/// Relative phase rate of the two ¹³C branches from the series in
/// `A∥ᶜ/2γeB₀`. `omega_prime` is ω′/2π in MHz.
pub fn conditional_shift(
    c: &SpinConstants,
    s: &StaticFields,
    omega_prime: f64,
    kmax: usize,
) -> Result<ConditionalReport> {
    if kmax == 0 {
        return Err(invalid("kmax", "must be >= 1"));
    }
    let b = s.gamma_b0;
    if b == 0.0 {
        return Err(Error::Singular("γeB₀ = 0".into()));
    }
    let x = c.a_par_c / (2.0 * b);
    if x.abs() >= 1.0 {
        return Err(Error::DivergentSeries { ratio: x.abs() });
    }
    for sign in [1.0, -1.0] {
        let weak = (c.a_par_n / (2.0 * b + sign * c.a_par_c)).abs();
        if weak > WEAK_NITROGEN_LIMIT {
            log::warn!("|A∥ᴺ/(2γeB₀ ± A∥ᶜ)| = {weak:.3} exceeds {WEAK_NITROGEN_LIMIT}");
        }
    }

    let lead = -geometric_rate(c, b, s.d_e0, omega_prime);
    let term = |k: usize| {
        let k = k as f64;
        lead * 2.0 * k * (2.0 * k + 1.0) * x.powf(2.0 * k - 1.0)
    };
    let series_terms: Vec<f64> = (1..=kmax).map(term).collect();
    let relative: f64 = series_terms.iter().sum();
    let shift_plus = geometric_rate(c, b + c.a_par_c / 2.0, s.d_e0, omega_prime);
    let shift_minus = geometric_rate(c, b - c.a_par_c / 2.0, s.d_e0, omega_prime);
    Ok(ConditionalReport {
        shift_plus,
        shift_minus,
        relative,
        series_terms,
        kmax,
        gate_time: if relative == 0.0 {
            f64::INFINITY
        } else {
            PI / relative.abs()
        },
        exact_difference: shift_plus - shift_minus,
        truncation_bound: term(kmax + 1).abs(),
    })
}

/// Brute-force conditional gate: one nuclear run per ¹³C branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalNumeric {
    pub plus: PhaseResult,
    pub minus: PhaseResult,
    /// plus − minus corrected rates, rad/µs.
    pub relative: f64,
    /// π/|relative|, µs.
    pub gate_time: f64,
    pub analytic: ConditionalReport,
    /// |relative − analytic| / |analytic|.
    pub relative_error: f64,
}

fn carbon_bias(c: &SpinConstants, carbon: Spin) -> f64 {
    2.0 * carbon.iz() * c.a_par_c / 2.0
}

fn branch_fields(c: &SpinConstants, s: &StaticFields, carbon: Spin) -> StaticFields {
    s.with_gamma_b0(s.gamma_b0 + carbon_bias(c, carbon))
}

/// Gate Hamiltonian seen by one ¹³C projection: the rotating drive plus the
/// carbon's static field on the electron.
fn branch_hamiltonian(
    c: SpinConstants,
    r: RotatingField,
    carbon: Spin,
) -> impl Fn(f64) -> crate::CMatrix + Copy {
    let bias = carbon_bias(&c, carbon);
    move |t| h_rotating_biased(&c, &r, t, gate_phase(&r, t), bias)
}

pub fn conditional_numeric(
    c: &SpinConstants,
    s: &StaticFields,
    r: &RotatingField,
    cfg: &PropagationConfig,
) -> Result<ConditionalNumeric> {
    let analytic = conditional_shift(c, s, r.omega_prime, DEFAULT_KMAX)?;
    let run = |carbon: Spin| {
        run_gate_with(c, &branch_fields(c, s, carbon), r, cfg, branch_hamiltonian(*c, *r, carbon))
    };
    let (plus, minus) = rayon::join(|| run(Spin::Up), || run(Spin::Down));
    let (plus, minus) = (plus?, minus?);
    let relative = plus.delta_omega_rate - minus.delta_omega_rate;
    Ok(ConditionalNumeric {
        plus,
        minus,
        relative,
        gate_time: if relative == 0.0 {
            f64::INFINITY
        } else {
            PI / relative.abs()
        },
        relative_error: (relative - analytic.relative).abs() / analytic.relative.abs(),
        analytic,
    })
}

/// Largest elementwise gap between evolving the 8-dim system with the ¹³C
/// in (|↑⟩ + |↓⟩)/√2 and evolving each carbon branch as a 4-dim problem
/// with the shifted field, over `[0, t]`.
pub fn block_consistency(
    c: &SpinConstants,
    s: &StaticFields,
    r: &RotatingField,
    cfg: &PropagationConfig,
    t: f64,
) -> Result<f64> {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let branches = [
        *prepare_input(c, &branch_fields(c, s, Spin::Up))?.vector(),
        *prepare_input(c, &branch_fields(c, s, Spin::Down))?.vector(),
    ];
    let mut joint = CVector::zeros(8);
    for carbon in Spin::BOTH {
        for k in 0..4 {
            joint[2 * k + carbon.index()] = branches[carbon.index()][k] * half;
        }
    }
    let (c8, r8) = (*c, *r);
    let full = propagate_vector(
        move |time| h_conditional(&c8, &r8, time, gate_phase(&r8, time)),
        &joint,
        0.0,
        t,
        cfg,
    )?;
    let mut worst: f64 = 0.0;
    for carbon in Spin::BOTH {
        let v = branches[carbon.index()];
        let out = propagate_vector(branch_hamiltonian(*c, *r, carbon), &v, 0.0, t, cfg)?;
        for k in 0..4 {
            let gap = (full[2 * k + carbon.index()] - out[k] * half).norm();
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}
