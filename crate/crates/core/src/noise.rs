//! Classical dephasing: Ornstein–Uhlenbeck field noise, Monte-Carlo
//! coherence and gate error, and the closed-form error estimates.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::frames::gate_speed;
use crate::linalg::eig_hermitian;
use crate::model::{to_angular, SpinConstants, StaticFields};
use crate::CMatrix;

/// Default seed of every Monte-Carlo run.
pub const DEFAULT_SEED: u64 = 12345;

/// Stochastic field model: `B₀ → B₀ + δB·f(t)` with OU-correlated `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    /// γeδB/2π, MHz.
    pub delta_b: f64,
    /// Bath correlation time τ_c, µs.
    pub tau_c: f64,
    pub trajectories: usize,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            delta_b: 0.02,
            tau_c: 1e4,
            trajectories: 10_000,
            seed: DEFAULT_SEED,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_b.is_finite() && self.delta_b >= 0.0) {
            return Err(invalid("deltaB_MHz", "must be finite and >= 0"));
        }
        if !(self.tau_c.is_finite() && self.tau_c > 0.0) {
            return Err(invalid("tau_c_us", "must be finite and > 0"));
        }
        if self.trajectories == 0 {
            return Err(invalid("trajectories", "must be >= 1"));
        }
        Ok(())
    }

    /// Independent generator for one trajectory: ChaCha8 keyed by the seed,
    /// one stream per trajectory index.
    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Unit-variance OU samples at `t = 0, dt, …, n·dt` (n + 1 values), started
/// from the stationary distribution.
pub fn ou_trajectory(nm: &NoiseModel, dt: f64, n: usize, index: u64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt_us", "must be finite and > 0"));
    }
    let mut rng = nm.rng(index);
    let decay = (-dt / nm.tau_c).exp();
    let kick = (1.0 - decay * decay).sqrt();
    let mut f: f64 = StandardNormal.sample(&mut rng);
    let mut out = Vec::with_capacity(n + 1);
    out.push(f);
    for _ in 0..n {
        let g: f64 = StandardNormal.sample(&mut rng);
        f = f * decay + kick * g;
        out.push(f);
    }
    Ok(out)
}

fn require_field(s: &StaticFields) -> Result<()> {
    if s.gamma_b0 <= 0.0 {
        return Err(Error::Singular("γeB₀ must be > 0".into()));
    }
    Ok(())
}

/// Static-field nuclear noise amplitude `b = γeδB(d⊥E₀/γeB₀)²(A∥/γeB₀)`, rad/µs.
pub fn noise_amplitude_b(c: &SpinConstants, s: &StaticFields) -> Result<f64> {
    require_field(s)?;
    let ratio = s.d_e0 / s.gamma_b0;
    Ok(to_angular(s.delta_b * ratio * ratio * c.a_par_n / s.gamma_b0))
}

fn coherence_time(rate: f64) -> f64 {
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// Static-field T₂* = 2/b, µs (infinite when b = 0).
pub fn t2star_static(c: &SpinConstants, s: &StaticFields) -> Result<f64> {
    Ok(coherence_time(noise_amplitude_b(c, s)? / 2.0))
}

/// Effective nuclear noise γₙδBₙ = 3ΔΩ·δB/B₀ during gating, rad/µs, with ΔΩ
/// the geometric gate speed. `omega_prime` is ω′/2π in MHz.
pub fn effective_nuclear_noise(c: &SpinConstants, s: &StaticFields, omega_prime: f64) -> Result<f64> {
    require_field(s)?;
    let g = gate_speed(c, s, omega_prime)?;
    Ok(3.0 * g.geometric_part.abs() * s.delta_b / s.gamma_b0)
}

/// T₂* during gating, `1/T₂* = (3ω′/4)(d⊥E₀/γeB₀)²(A∥/γeB₀)(δB/B₀)`, µs.
pub fn t2star_gate(c: &SpinConstants, s: &StaticFields, omega_prime: f64) -> Result<f64> {
    require_field(s)?;
    let ratio = s.d_e0 / s.gamma_b0;
    let rate = 0.75
        * to_angular(omega_prime)
        * ratio
        * ratio
        * (c.a_par_n / s.gamma_b0)
        * (s.delta_b / s.gamma_b0);
    Ok(coherence_time(rate.abs()))
}

/// Decoherence error of a π-gate, `(3π/(2√2)·δB/B₀)²`.
pub fn epsilon_dec(s: &StaticFields) -> Result<f64> {
    require_field(s)?;
    let x = 3.0 * PI / (2.0 * std::f64::consts::SQRT_2) * s.delta_b / s.gamma_b0;
    Ok(x * x)
}

/// Systematic error `4π²(−3ΔB/4B₀ + ΔE/2E₀)²` from the relative shifts.
pub fn epsilon_sys(s: &StaticFields) -> Result<f64> {
    require_field(s)?;
    if s.d_e0 <= 0.0 {
        return Err(Error::Singular("d⊥E₀ must be > 0".into()));
    }
    let x = -0.75 * s.shift_b + 0.5 * s.shift_e;
    Ok(4.0 * PI * PI * x * x)
}

/// Systematic error without expanding in the shifts: a π-gate timed for
/// the nominal fields picks up a phase error `π(ΔΩ′/ΔΩ − 1)`, and a pure
/// nuclear state loses `sin²` of half of it.
pub fn epsilon_sys_exact(c: &SpinConstants, s: &StaticFields) -> Result<f64> {
    require_field(s)?;
    if s.d_e0 <= 0.0 {
        return Err(Error::Singular("d⊥E₀ must be > 0".into()));
    }
    // The geometric rate ratio does not depend on ω′.
    let nominal = gate_speed(c, s, 1.0)?.geometric_part;
    let shifted_fields = StaticFields {
        gamma_b0: s.gamma_b0 * (1.0 + s.shift_b),
        d_e0: s.d_e0 * (1.0 + s.shift_e),
        ..*s
    };
    let shifted = gate_speed(c, &shifted_fields, 1.0)?.geometric_part;
    let error = PI * (shifted / nominal - 1.0);
    Ok((error / 2.0).sin().powi(2))
}

const DENSITY_TOLERANCE: f64 = 1e-10;
const CLAMP_TOLERANCE: f64 = 1e-9;

fn check_density(rho: &CMatrix, name: &str) -> Result<()> {
    let fail = |why: String| Err(Error::InvalidDensityMatrix(format!("{name}: {why}")));
    if !rho.is_hermitian(DENSITY_TOLERANCE) {
        return fail(format!("not Hermitian (defect {:.2e})", rho.hermiticity_defect()));
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > DENSITY_TOLERANCE {
        return fail(format!("trace {trace} != 1"));
    }
    let lowest = eig_hermitian(rho)?.values()[0];
    if lowest < -DENSITY_TOLERANCE {
        return fail(format!("negative eigenvalue {lowest:.3e}"));
    }
    Ok(())
}

/// Fidelity tr(ρρ′), clamped to [0, 1].
pub fn fidelity(rho: &CMatrix, rho_prime: &CMatrix) -> Result<f64> {
    if rho.dim() != rho_prime.dim() {
        return Err(invalid("rho_prime", "dimension differs from rho"));
    }
    check_density(rho, "rho")?;
    check_density(rho_prime, "rho_prime")?;
    let f = (*rho * *rho_prime).trace().re;
    if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&f) {
        log::warn!("fidelity {f} outside [0, 1] beyond {CLAMP_TOLERANCE:e}; clamping");
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Nuclear `|+⟩⟨+|` after a relative phase `phase` (↑ relative to ↓),
/// dephased by `visibility` ∈ [0, 1].
pub fn dephased_plus(phase: f64, visibility: f64) -> CMatrix {
    let off = num_complex::Complex64::from_polar(0.5 * visibility, -phase);
    CMatrix::from_rows(&[&[0.5.into(), off], &[off.conj(), 0.5.into()]])
}

/// Ensemble coherence `⟨+|ρ̄(t)|+⟩` and its Gaussian T₂* fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceCurve {
    pub times: Vec<f64>,
    pub coherence: Vec<f64>,
    /// 1/√slope of −ln(coherence) against t², µs.
    pub fitted_t2star: f64,
    /// Slope of −ln(coherence) against t², µs⁻².
    pub slope: f64,
    /// Coefficient of determination of that line.
    pub r_squared: f64,
}

/// Least-squares line through the origin of `−ln C` against t².
pub fn fit_gaussian_decay(times: &[f64], coherence: &[f64]) -> Result<(f64, f64)> {
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(coherence)
        .filter(|(t, c)| **t > 0.0 && **c > 0.0)
        .map(|(t, c)| (t * t, -c.ln()))
        .collect();
    if points.len() < 2 {
        return Err(invalid("coherence", "need at least two positive samples to fit"));
    }
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let mean = points.iter().map(|(_, y)| y).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok((slope, r2))
}

/// Monte-Carlo coherence of a nuclear `|+⟩` under `H = amplitude·f(t)·Iz`
/// (amplitude in rad/µs) on `points` uniform times in `[0, t_max]`.
pub fn mc_coherence(amplitude: f64, nm: &NoiseModel, t_max: f64, points: usize) -> Result<CoherenceCurve> {
    nm.validate()?;
    if !(t_max.is_finite() && t_max > 0.0) || points < 3 {
        return Err(invalid("t_max_us", "need t_max > 0 and at least 3 points"));
    }
    // Sub-steps per output interval for the phase integral.
    const SUB: usize = 8;
    let intervals = points - 1;
    let dt = t_max / (intervals * SUB) as f64;
    let per_trajectory: Vec<Vec<f64>> = (0..nm.trajectories as u64)
        .into_par_iter()
        .map(|index| {
            let f = ou_trajectory(nm, dt, intervals * SUB, index).expect("dt validated");
            let mut phase = 0.0;
            let mut out = Vec::with_capacity(points);
            out.push(1.0);
            for k in 0..intervals * SUB {
                phase += amplitude * 0.5 * (f[k] + f[k + 1]) * dt;
                if (k + 1) % SUB == 0 {
                    out.push(phase.cos());
                }
            }
            out
        })
        .collect();
    let n = per_trajectory.len() as f64;
    let coherence: Vec<f64> = (0..points)
        .map(|j| 0.5 * (1.0 + per_trajectory.iter().map(|v| v[j]).sum::<f64>() / n))
        .collect();
    let times: Vec<f64> = (0..points).map(|j| t_max * j as f64 / intervals as f64).collect();
    let (slope, r_squared) = fit_gaussian_decay(&times, &coherence)?;
    Ok(CoherenceCurve {
        times,
        coherence,
        fitted_t2star: if slope > 0.0 { 1.0 / slope.sqrt() } else { f64::INFINITY },
        slope,
        r_squared,
    })
}

/// Fraction of the closed-form T₂* covered by the default fit window.
pub const FIT_WINDOW: f64 = 0.3;

/// [`mc_coherence`] under the static-field amplitude b, over
/// `[0, 0.3·T₂*]` of the closed form.
pub fn static_coherence(c: &SpinConstants, s: &StaticFields, nm: &NoiseModel, points: usize) -> Result<CoherenceCurve> {
    let fields = StaticFields {
        delta_b: nm.delta_b,
        ..*s
    };
    let b = noise_amplitude_b(c, &fields)?;
    if b == 0.0 {
        return Err(invalid("deltaB_MHz", "no static dephasing: b = 0"));
    }
    mc_coherence(b, nm, FIT_WINDOW * t2star_static(c, &fields)?, points)
}

/// Monte-Carlo π-gate error under slow field noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McGateError {
    /// 1 − tr(ρρ̄′) against the noiseless gate.
    pub mean: f64,
    pub stderr: f64,
    /// ½(1 − ⟨+|ρ̄′|+⟩) in the frame of the ideal gate, the quantity the
    /// closed form `ε_dec` tracks.
    pub half_loss: f64,
    pub half_loss_stderr: f64,
    /// Gate time, µs.
    pub gate_time: f64,
    pub trajectories: usize,
}

/// π-gate error with `B₀ → B₀ + δB·f(t)` fed through the geometric gate
/// speed. Each trajectory integrates its phase error over the noiseless gate
/// time; the ensemble density matrix is compared with the ideal gate output.
pub fn mc_gate_error(
    c: &SpinConstants,
    s: &StaticFields,
    omega_prime: f64,
    nm: &NoiseModel,
    steps: usize,
) -> Result<McGateError> {
    nm.validate()?;
    require_field(s)?;
    if steps == 0 {
        return Err(invalid("steps", "must be >= 1"));
    }
    let nominal = gate_speed(c, s, omega_prime)?.geometric_part;
    if nominal == 0.0 {
        return Err(Error::Singular("no geometric gate speed (E₀ = 0)".into()));
    }
    let gate_time = PI / nominal.abs();
    let dt = gate_time / steps as f64;
    let rate = |f: f64| -> Result<f64> {
        let noisy = s.with_gamma_b0(s.gamma_b0 + nm.delta_b * f);
        Ok(gate_speed(c, &noisy, omega_prime)?.geometric_part - nominal)
    };
    let errors: Vec<f64> = (0..nm.trajectories as u64)
        .into_par_iter()
        .map(|index| -> Result<f64> {
            let f = ou_trajectory(nm, dt, steps, index)?;
            let mut phase = 0.0;
            let mut previous = rate(f[0])?;
            for &value in &f[1..] {
                let next = rate(value)?;
                phase += 0.5 * (previous + next) * dt;
                previous = next;
            }
            Ok(phase)
        })
        .collect::<Result<_>>()?;

    // Ideal output is |+⟩ rotated by π; each trajectory is that state with an
    // extra phase, so tr(ρρ′) = ½(1 + cos φ) per trajectory.
    let losses: Vec<f64> = errors.iter().map(|phi| 0.5 * (1.0 - phi.cos())).collect();
    let (mean, stderr) = mean_stderr(&losses);
    let halves: Vec<f64> = losses.iter().map(|l| 0.5 * l).collect();
    let (half_loss, half_loss_stderr) = mean_stderr(&halves);
    Ok(McGateError {
        mean,
        stderr,
        half_loss,
        half_loss_stderr,
        gate_time,
        trajectories: nm.trajectories,
    })
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
