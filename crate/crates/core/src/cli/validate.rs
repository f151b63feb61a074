//! Cross-tier validation: closed forms against frame algebra, propagation
//! and Monte Carlo.
//!
//! Checks comparing numerics with analytic results only hold inside the
//! model's regime. Outside it a mismatch is reported as an expected warning.

use std::f64::consts::{PI, TAU};
use std::fmt;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CliResult, RunConfig};
use crate::conditional::conditional_numeric;
use crate::frames::{
    gate_speed, h1_decomposition_defect, lab_evolution_defect, u1, u1_from_generator, v_interaction,
};
use crate::hamiltonian::sz_iz;
use crate::model::{in_regime, to_angular, validate_regime, StaticFields};
use crate::noise::{epsilon_dec, epsilon_sys, epsilon_sys_exact, mc_gate_error, static_coherence, t2star_static, NoiseModel};
use crate::propagate::run_gate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// About a minute.
    Quick,
    /// More samples, trajectories and the ω′ linearity sweep.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    ExpectedWarn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::ExpectedWarn => "WARN",
            CheckStatus::Fail => "FAIL",
        };
        write!(
            f,
            "{tag} {:<26} {:.4e} (limit {:.4e}) {}",
            self.name, self.value, self.threshold, self.detail
        )
    }
}

pub fn to_csv(checks: &[Check]) -> String {
    let mut out = String::from("check,status,value,threshold\n");
    for c in checks {
        let status = serde_json::to_value(c.status).expect("status serializes");
        out.push_str(&format!(
            "{},{},{},{}\n",
            c.name,
            status.as_str().unwrap_or_default(),
            c.value,
            c.threshold
        ));
    }
    out
}

struct Suite {
    checks: Vec<Check>,
    in_regime: bool,
}

impl Suite {
    /// `value <= threshold` passes.
    fn upper(&mut self, name: &'static str, value: crate::Result<f64>, threshold: f64, detail: String, gated: bool) {
        let (value, detail) = match value {
            Ok(v) => (v, detail),
            Err(e) => (f64::NAN, format!("{detail} error: {e}")),
        };
        let status = if value <= threshold {
            CheckStatus::Pass
        } else if gated && !self.in_regime {
            CheckStatus::ExpectedWarn
        } else {
            CheckStatus::Fail
        };
        self.checks.push(Check {
            name,
            status,
            value,
            threshold,
            detail,
        });
    }
}

fn worst(samples: impl Iterator<Item = f64>) -> f64 {
    samples.fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Least-squares slope, intercept and R² of y against x.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

pub fn run_checks(cfg: &RunConfig, level: Level) -> CliResult<Vec<Check>> {
    let full = level == Level::Full;
    let (c, s, r) = (cfg.constants, cfg.fields, cfg.drive());
    let pc = cfg.propagation();
    let regime = validate_regime(&c, &s, &r);
    let mut suite = Suite {
        checks: Vec::new(),
        in_regime: in_regime(&regime),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);
    let samples = if full { 200 } else { 20 };

    // Frame algebra on random parameters.
    let u1_gap = worst((0..samples).map(|_| {
        let (t, phi, w) = (rng.random_range(0.0..2.0), rng.random_range(-PI..PI), rng.random_range(-50.0..50.0));
        u1(t, phi, w).max_abs_diff(&u1_from_generator(t, phi, w))
    }));
    suite.upper("u1_product_vs_generator", Ok(u1_gap), 1e-12, format!("{samples} samples"), false);

    let a = to_angular(c.a_par_n);
    let h1_gap = worst((0..samples).map(|_| {
        let t = rng.random_range(0.0..1.0);
        let phi = rng.random_range(-PI..PI);
        let w1 = rng.random_range(0.0..10.0);
        let w = rng.random_range(5.0..40.0);
        h1_decomposition_defect(t, phi, w1, w, a)
    }));
    suite.upper("h1_decomposition", Ok(h1_gap), 1e-6, format!("{samples} samples"), false);

    let vi_gap = worst((0..samples).map(|_| {
        let t = rng.random_range(0.0..1.0);
        let wp = TAU * rng.random_range(1.0..100.0);
        v_interaction(t, wp / 2.0, 25.0 * wp, wp, a).max_abs_diff(&(sz_iz() * a))
    }));
    suite.upper("interaction_hyperfine_const", Ok(vi_gap), 1e-6, format!("{samples} samples at resonance"), false);

    let kmax = if full { 10 } else { 3 };
    let lab = (1..=kmax)
        .map(|k| lab_evolution_defect(&c, &r, k, pc.step))
        .collect::<crate::Result<Vec<f64>>>()
        .map(|v| worst(v.into_iter()));
    suite.upper("lab_vs_closed_evolution", lab, 1e-6, format!("k = 1..={kmax} double fast periods"), true);

    // Gate speed: propagation against the closed form.
    let closed = gate_speed(&c, &s, r.omega_prime);
    let numeric = run_gate(&c, &s, &r, &pc);
    let speed = match (&closed, &numeric) {
        (Ok(g), Ok(n)) => Ok(relative(n.delta_omega_rate, g.geometric_part)),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    let detail = match (&closed, &numeric) {
        (Ok(g), Ok(n)) => format!(
            "numeric {:.4} vs closed {:.4} rad/us",
            n.delta_omega_rate, g.geometric_part
        ),
        _ => String::new(),
    };
    suite.upper("gate_speed_numeric", speed, 0.10, detail, true);

    if full {
        let scales = [0.5, 1.0, 1.5, 2.0];
        let rates: crate::Result<Vec<f64>> = scales
            .iter()
            .map(|&k| {
                let mut scaled = cfg.clone();
                scaled.omega_prime = cfg.omega_prime * k;
                scaled.omega1 = Some(r.omega1 * k);
                scaled.omega = Some(r.omega * k);
                scaled.duration = None;
                let (rr, pp) = (scaled.drive(), scaled.propagation());
                Ok(run_gate(&c, &s, &rr, &pp)?.delta_omega_rate)
            })
            .collect();
        let fit = rates.map(|y| {
            let x: Vec<f64> = scales.iter().map(|k| k * r.omega_prime).collect();
            linear_fit(&x, &y)
        });
        let detail = match &fit {
            Ok((slope, _, _)) => format!("slope {slope:.4e} rad/us per MHz"),
            Err(_) => String::new(),
        };
        suite.upper("gate_speed_linear_in_wp", fit.map(|(_, _, r2)| 1.0 - r2), 1e-3, detail, true);
    }

    // Closed-form gate speed tiers converge quadratically.
    let gap = |scale: f64| -> crate::Result<f64> {
        let g = gate_speed(&c, &s.with_gamma_b0(s.gamma_b0 * scale), r.omega_prime)?;
        Ok(relative(g.exact, g.approx))
    };
    let order = gap(1.0).and_then(|a| Ok((a / gap(2.0)? - 4.0).abs()));
    suite.upper("exact_to_approx_quadratic", order, 1.0, "ratio per doubling of gammaB0 vs 4".into(), false);

    // Monte Carlo against the closed-form errors.
    let noise = NoiseModel {
        trajectories: if full { cfg.noise.trajectories } else { cfg.noise.trajectories.min(2000) },
        ..cfg.noise
    };
    let dec_fields = StaticFields {
        delta_b: 1e-3 * s.gamma_b0,
        ..s
    };
    let dec = mc_gate_error(&c, &dec_fields, r.omega_prime, &NoiseModel { delta_b: dec_fields.delta_b, ..noise }, 64)
        .and_then(|mc| Ok((mc, epsilon_dec(&dec_fields)?)));
    let (ratio, detail) = match &dec {
        Ok((mc, closed)) => (
            Ok(mc.mean / closed),
            format!("ratio {:.4}, half-loss ratio {:.4}", mc.mean / closed, mc.half_loss / closed),
        ),
        Err(e) => (Err(e.clone()), String::new()),
    };
    // Within a factor of two either way.
    suite.upper("mc_vs_epsilon_dec", ratio.map(|q| q.max(1.0 / q)), 2.0, detail, false);

    let coherence_noise = NoiseModel {
        trajectories: noise.trajectories.min(if full { 10_000 } else { 1000 }),
        ..noise
    };
    let t2 = static_coherence(&c, &s, &coherence_noise, 16)
        .and_then(|fit| Ok((fit.fitted_t2star, t2star_static(&c, &StaticFields { delta_b: coherence_noise.delta_b, ..s })?)));
    let detail = match &t2 {
        Ok((fit, closed)) => format!("fit {fit:.1} vs closed {closed:.1} us"),
        Err(_) => String::new(),
    };
    suite.upper("static_t2star_mc", t2.map(|(f, c)| relative(f, c)), 0.15, detail, false);

    let line = StaticFields {
        shift_b: 0.02,
        shift_e: 0.03,
        ..s
    };
    suite.upper("epsilon_sys_cancellation", epsilon_sys(&line), 1e-15, "3dB/4B0 = dE/2E0".into(), false);
    suite.upper("epsilon_sys_unexpanded_line", epsilon_sys_exact(&c, &line), 1e-4, "second order on the line".into(), false);

    // Conditional gate: series against two propagated branches.
    let cond = conditional_numeric(&c, &s, &r, &pc);
    let detail = match &cond {
        Ok(n) => format!("numeric {:.4} vs series {:.4} rad/us", n.relative, n.analytic.relative),
        Err(_) => String::new(),
    };
    suite.upper("conditional_series_numeric", cond.map(|n| n.relative_error), 0.10, detail, true);

    Ok(suite.checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_line() {
        let (m, b, r2) = linear_fit(&[1.0, 2.0, 3.0, 4.0], &[3.0, 5.0, 7.0, 9.0]);
        assert!((m - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_regime_mismatch_is_expected_warn() {
        let mut cfg = RunConfig::default();
        // Weak field: large-field ratios exceed their limits.
        cfg.set("gammaB0_MHz", "8").unwrap();
        cfg.set("omega_prime_MHz", "100").unwrap();
        cfg.set("trajectories", "200").unwrap();
        let checks = run_checks(&cfg, Level::Quick).unwrap();
        let speed = checks.iter().find(|c| c.name == "gate_speed_numeric").unwrap();
        assert_ne!(speed.status, CheckStatus::Fail, "{speed}");
        for c in checks.iter().filter(|c| c.name.starts_with("u1") || c.name.starts_with("h1")) {
            assert_eq!(c.status, CheckStatus::Pass, "{c}");
        }
    }
}
