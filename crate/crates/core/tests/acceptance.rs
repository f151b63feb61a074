//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion and fails if any part of the criterion fails.
//!
//! Reference values are rebuilt here from elementary formulas and
//! hand-built matrices rather than taken from the library.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasegate::conditional::conditional_shift;
use phasegate::frames::{gate_speed, h1_rotating_frame, h2_effective, u1, u1_from_generator, v_interaction};
use phasegate::hamiltonian::{
    gate_phase, h_conditional, h_conditional_static, h_full, h_full_compound, h_reduced, h_rotating, h_snapshot,
    h_static, h_static_noise, leakage,
};
use phasegate::model::{validate_regime, RotatingField, SpinConstants, StaticFields};
use phasegate::noise::{epsilon_dec, epsilon_sys, mc_gate_error, static_coherence, NoiseModel};
use phasegate::propagate::{propagate_unitary, run_gate, PropagationConfig};
use phasegate::CMatrix;

struct Criterion {
    number: u32,
    title: &'static str,
    parts: Vec<(bool, String)>,
}

impl Criterion {
    fn new(number: u32, title: &'static str) -> Self {
        Self {
            number,
            title,
            parts: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.parts.push((ok, detail));
    }

    fn finish(self) {
        let ok = self.parts.iter().all(|(ok, _)| *ok);
        let details: Vec<String> = self
            .parts
            .iter()
            .map(|(ok, d)| format!("[{}] {d}", if *ok { "ok" } else { "FAIL" }))
            .collect();
        println!(
            "{} criterion {} ({}): {}",
            if ok { "PASS" } else { "FAIL" },
            self.number,
            self.title,
            details.join("; ")
        );
        assert!(ok, "criterion {} failed", self.number);
    }
}

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn sx() -> CMatrix {
    CMatrix::from_rows(&[&[c0(), re(1.0)], &[re(1.0), c0()]])
}

fn sy() -> CMatrix {
    CMatrix::from_rows(&[&[c0(), im(-1.0)], &[im(1.0), c0()]])
}

fn sz() -> CMatrix {
    CMatrix::from_rows(&[&[re(1.0), c0()], &[c0(), re(-1.0)]])
}

/// `exp(−iθP)` for any P with P² = 1.
fn pauli_exp(p: &CMatrix, theta: f64) -> CMatrix {
    CMatrix::identity(2) * theta.cos() - *p * im(theta.sin())
}

/// 2×2 ⊗ 2×2 written out entry by entry.
fn kron2(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix::from_fn(4, |i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

fn iz() -> CMatrix {
    sz() * 0.5
}

fn geometric_rate(omega_prime: f64, b: f64, e: f64, a: f64) -> f64 {
    TAU * omega_prime / 2.0 * (e / b).powi(2) * (a / b)
}

#[test]
fn criterion_1_gate_time() {
    let mut k = Criterion::new(1, "gate time");
    let start = Instant::now();
    let c = SpinConstants::default();
    let s = StaticFields::new(20.0, 4.0);
    let oracle = PI / geometric_rate(1000.0, 20.0, 4.0, c.a_par_n);
    let g = gate_speed(&c, &s, 1000.0).unwrap();
    k.check(
        (g.pi_gate_time - oracle).abs() < 1e-12 && (g.pi_gate_time - 0.165).abs() / 0.165 <= 0.02,
        format!("closed form {:.5} us (hand {oracle:.5}, target 0.165 +- 2%)", g.pi_gate_time),
    );
    let r = RotatingField::for_gate(1000.0, 20);
    let numeric = run_gate(&c, &s, &r, &PropagationConfig::for_field(&r)).unwrap();
    let t = numeric.pi_gate_time();
    k.check(
        (t - oracle).abs() / oracle <= 0.10,
        format!("propagated {t:.5} us vs {oracle:.5} us (within 10%)"),
    );
    let elapsed = start.elapsed().as_secs_f64();
    k.check(elapsed < 60.0, format!("runtime {elapsed:.2} s"));
    k.finish();
}

#[test]
fn criterion_2_conditional_gate() {
    let mut k = Criterion::new(2, "conditional gate");
    let c = SpinConstants::default();
    let s = StaticFields::new(40.0, 4.0);
    let x = c.a_par_c / (2.0 * s.gamma_b0);
    let lead = TAU * 1000.0 * c.a_par_n * s.d_e0.powi(2) / (2.0 * s.gamma_b0.powi(3));
    let sum: f64 = (1..=10)
        .map(|k| (2 * k * (2 * k + 1)) as f64 * x.powi(2 * k - 1))
        .sum();
    let oracle_time = PI / (lead * sum);
    let ten = conditional_shift(&c, &s, 1000.0, 10).unwrap();
    let three = conditional_shift(&c, &s, 1000.0, 3).unwrap();
    k.check(
        (ten.gate_time - oracle_time).abs() < 1e-9 && (ten.gate_time - 1.13).abs() / 1.13 <= 0.05,
        format!("gate time {:.4} us (hand {oracle_time:.4}, target 1.13 +- 5%)", ten.gate_time),
    );
    let trunc = (three.relative - ten.relative).abs() / ten.relative.abs();
    k.check(trunc < 1e-3, format!("kmax 3 vs 10: {trunc:.2e}"));
    k.finish();
}

#[test]
fn criterion_3_static_coherence() {
    let mut k = Criterion::new(3, "static coherence");
    let start = Instant::now();
    let c = SpinConstants::default();
    let s = StaticFields::default();
    let b = TAU * s.delta_b * (s.d_e0 / s.gamma_b0).powi(2) * c.a_par_n / s.gamma_b0;
    let oracle = 2.0 / b;
    k.check(
        oracle > 1000.0 && (oracle / 1000.0 - 2.6).abs() < 0.05,
        format!("closed form T2* {:.3} ms (> 1 ms, about 2.6)", oracle / 1000.0),
    );
    let nm = NoiseModel::default();
    let fit = static_coherence(&c, &s, &nm, 16).unwrap();
    let window = fit.times.last().copied().unwrap();
    k.check(
        nm.trajectories >= 1000 && nm.tau_c > 10.0 * window,
        format!("{} trajectories, tau_c {} us vs window {window:.0} us", nm.trajectories, nm.tau_c),
    );
    let rel = (fit.fitted_t2star - oracle).abs() / oracle;
    k.check(
        rel <= 0.15,
        format!("Monte Carlo T2* {:.1} us vs {oracle:.1} us ({:.1}%)", fit.fitted_t2star, rel * 100.0),
    );
    let elapsed = start.elapsed().as_secs_f64();
    k.check(elapsed < 300.0, format!("runtime {elapsed:.2} s"));
    k.finish();
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

/// Difference-of-fractions gate speed, rad/µs.
fn d1(omega_prime: f64, b: f64, e: f64, a: f64) -> f64 {
    let (xp, xm) = (e / (b + a / 2.0), e / (b - a / 2.0));
    TAU * (a - e / 2.0 * (xp - xm) - omega_prime / 4.0 * (xp * xp - xm * xm))
}

#[test]
fn criterion_4_gate_speed_law() {
    let mut k = Criterion::new(4, "gate-speed law");
    let c = SpinConstants::default();
    let s = StaticFields::new(20.0, 4.0);
    let a = c.a_par_n;
    let wps = [250.0, 500.0, 750.0, 1000.0];
    let mut raw = Vec::new();
    for &wp in &wps {
        let r = RotatingField::for_gate(wp, 20);
        raw.push(run_gate(&c, &s, &r, &PropagationConfig::for_field(&r)).unwrap().raw_rate);
    }
    let r2 = r_squared(&wps, &raw);
    k.check(r2 > 0.999, format!("R^2 of rate against omega' = {r2:.4} ({raw:.3?} rad/us)"));
    let worst = wps
        .iter()
        .zip(&raw)
        .map(|(&wp, &n)| (n - d1(wp, 20.0, 4.0, a)).abs() / d1(wp, 20.0, 4.0, a).abs())
        .fold(0.0, f64::max);
    k.check(worst <= 0.05, format!("worst deviation from closed form {:.1}%", worst * 100.0));

    let gaps: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&m| {
            let (b, exact) = (20.0 * m, d1(1000.0, 20.0 * m, 4.0, a));
            let approx = geometric_rate(1000.0, b, 4.0, a) + TAU * a;
            (exact - approx).abs() / approx.abs()
        })
        .collect();
    let quadratic = gaps.windows(2).all(|w| (3.0..5.0).contains(&(w[0] / w[1])));
    let lib = gate_speed(&c, &s, 1000.0).unwrap();
    k.check(
        quadratic && (lib.exact - d1(1000.0, 20.0, 4.0, a)).abs() < 1e-9,
        format!(
            "expanded-form error {} per doubling of B0",
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    k.finish();
}

#[test]
fn criterion_5_error_formulas() {
    let mut k = Criterion::new(5, "error formulas");
    let c = SpinConstants::default();
    let s = StaticFields::default();
    let ratio = s.delta_b / s.gamma_b0;
    let oracle = (3.0 * PI / (2.0 * 2f64.sqrt()) * ratio).powi(2);
    let closed = epsilon_dec(&s).unwrap();
    k.check(
        (ratio - 1e-3).abs() < 1e-15 && (closed - oracle).abs() < 1e-18 && (oracle - 1.11e-5).abs() < 0.01e-5,
        format!("closed form {closed:.4e} at dB/B0 = {ratio}"),
    );
    let nm = NoiseModel::default();
    let mc = mc_gate_error(&c, &s, 1000.0, &nm, 64).unwrap();
    let q = mc.mean / closed;
    k.check(
        (0.5..=2.0).contains(&q),
        format!(
            "Monte Carlo {:.4e} +- {:.1e}, ratio {q:.4} (half-loss convention {:.4})",
            mc.mean,
            mc.stderr,
            mc.half_loss / closed
        ),
    );
    let mut line = s;
    (line.shift_b, line.shift_e) = (0.04, 0.06);
    let on_line = epsilon_sys(&line).unwrap();
    k.check(on_line < 1e-15, format!("on 3dB/4B0 = dE/2E0: {on_line:.1e}"));
    (line.shift_b, line.shift_e) = (0.01, 0.0);
    let off = epsilon_sys(&line).unwrap();
    let hand = 4.0 * PI * PI * (0.75f64 * 0.01).powi(2);
    k.check(
        (off - hand).abs() < 1e-15 && (off - 2.22e-3).abs() < 0.01e-3,
        format!("dB/B0 = 0.01: {off:.4e}"),
    );
    k.finish();
}

/// σ′ triad at plane angle φ, built by rotating σy about z.
fn primed(phi: f64) -> (CMatrix, CMatrix, CMatrix) {
    let rot = pauli_exp(&sz(), phi / 2.0);
    let spz = rot * sy() * rot.adjoint();
    (sz(), sx() * phi.cos() + sy() * phi.sin(), spz)
}

fn rk4_unitary(h: impl Fn(f64) -> CMatrix, t1: f64, n: usize) -> CMatrix {
    let dt = t1 / n as f64;
    let f = |t: f64, u: &CMatrix| h(t) * *u * im(-1.0);
    let mut u = CMatrix::identity(4);
    for i in 0..n {
        let t = i as f64 * dt;
        let k1 = f(t, &u);
        let k2 = f(t + dt / 2.0, &(u + k1 * (dt / 2.0)));
        let k3 = f(t + dt / 2.0, &(u + k2 * (dt / 2.0)));
        let k4 = f(t + dt, &(u + k3 * dt));
        u = u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    u
}

#[test]
fn criterion_6_frame_chain() {
    let mut k = Criterion::new(6, "frame chain");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = TAU * SpinConstants::default().a_par_n;

    let mut u1_gap: f64 = 0.0;
    let mut h1_gap: f64 = 0.0;
    let mut vi_gap: f64 = 0.0;
    for _ in 0..50 {
        let t: f64 = rng.random_range(0.0..1.0);
        let phi: f64 = rng.random_range(-PI..PI);
        let w: f64 = rng.random_range(5.0..60.0);
        let w1: f64 = rng.random_range(0.0..10.0);
        let (spx, _, spz) = primed(phi);

        let generator = pauli_exp(&spz, w * t / 2.0);
        u1_gap = u1_gap.max(generator.max_abs_diff(&u1(t, phi, w)));
        u1_gap = u1_gap.max(generator.max_abs_diff(&u1_from_generator(t, phi, w)));

        // U₁†HU₁ − iU₁†U̇₁ with U̇₁ = −i(ω/2)σ′zU₁.
        let c = SpinConstants {
            a_par_n: a / TAU,
            ..SpinConstants::default()
        };
        let r = RotatingField {
            omega1: w1 / TAU,
            omega: w / TAU,
            omega_prime: 1.0,
            phi0: 0.0,
            duration: 1.0,
        };
        let u = kron2(&generator, &CMatrix::identity(2));
        let rotated = u.adjoint() * h_rotating(&c, &r, t, phi) * u - kron2(&spz, &CMatrix::identity(2)) * (w / 2.0);
        let h1 = spx * w1 - spz * (w / 2.0);
        let v1 = kron2(&(generator.adjoint() * spx * generator), &iz()) * a;
        let expected = kron2(&h1, &CMatrix::identity(2)) + v1;
        h1_gap = h1_gap.max(rotated.max_abs_diff(&expected));
        h1_gap = h1_gap.max(h1_rotating_frame(w1, w, phi).max_abs_diff(&h1));

        let wp = TAU * rng.random_range(1.0..100.0);
        let target = kron2(&sz(), &iz()) * a;
        vi_gap = vi_gap.max(v_interaction(t, wp / 2.0, 25.0 * wp, wp, a).max_abs_diff(&target));
    }
    k.check(u1_gap < 1e-6, format!("U1 forms {u1_gap:.1e}"));
    k.check(h1_gap < 1e-6, format!("H1 + V1 decomposition {h1_gap:.1e}"));
    k.check(vi_gap < 1e-6, format!("interaction hyperfine constancy {vi_gap:.1e}"));

    // Closed-form laboratory evolution at times where the first frame and
    // exp(−iH₂t) are the identity (two fast periods at resonance).
    let c = SpinConstants::default();
    let mut lab_gap: f64 = 0.0;
    for _ in 0..5 {
        let wp_mhz: f64 = rng.random_range(5.0..50.0);
        let r = RotatingField::for_gate(wp_mhz, 1);
        let periods = rng.random_range(1..=3) as f64;
        let t = periods * 2.0 / r.omega;
        let numeric = rk4_unitary(|time| h_rotating(&c, &r, time, gate_phase(&r, time)), t, 400 * periods as usize);
        let (wp, a) = (TAU * wp_mhz, TAU * c.a_par_n);
        let closed = kron2(&pauli_exp(&sz(), wp * t / 2.0), &CMatrix::identity(2))
            * CMatrix::from_fn(4, |i, j| {
                if i == j {
                    let e = if i < 2 { 1.0 } else { -1.0 };
                    let n = if i % 2 == 0 { 0.5 } else { -0.5 };
                    Complex64::from_polar(1.0, -a * e * n * t)
                } else {
                    c0()
                }
            });
        lab_gap = lab_gap.max(numeric.max_abs_diff(&closed));
    }
    k.check(lab_gap < 1e-6, format!("closed-form vs propagated lab evolution {lab_gap:.3e}"));
    k.finish();
}

#[test]
fn criterion_7_structural_invariants() {
    let mut k = Criterion::new(7, "structural invariants");
    let c = SpinConstants::default();
    let s = StaticFields::default();
    let r = RotatingField::for_gate(1000.0, 20);
    let step = PropagationConfig::for_field(&r).step;
    let u = propagate_unitary(|t| h_rotating(&c, &r, t, gate_phase(&r, t)), 4, 0.0, 1000.0 * step, step).unwrap();
    let drift = (u.adjoint() * u).max_abs_diff(&CMatrix::identity(4));
    k.check(drift < 1e-9, format!("unitarity drift over 1000 steps {drift:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut herm: f64 = 0.0;
    for _ in 0..20 {
        let mut x = || rng.random_range(-50.0f64..50.0);
        let (b, e1, e2, t, phi) = (x(), x(), x(), x().abs() * 1e-3, x());
        let fields = StaticFields::new(b.abs() + 5.0, e1.abs());
        let hs = [
            h_full(&c, b / 28.0, e1 * 1e4, e2 * 1e4),
            h_full_compound(&c, b, e1, e2),
            h_reduced(&c, b, e1, e2),
            h_rotating(&c, &r, t, phi),
            h_static(&c, &fields),
            h_static_noise(&c, &fields, e2 * 1e-3),
            h_snapshot(e1, b),
            h_conditional(&c, &r, t, phi),
            h_conditional_static(&c, &fields),
            h1_rotating_frame(e1, b, phi),
            h2_effective(e1, b, e2).exact,
        ];
        for h in &hs {
            herm = herm.max(h.max_abs_diff(&h.adjoint()));
        }
    }
    k.check(herm < 1e-12, format!("Hermiticity defect {herm:.1e}"));

    let hand = (c.a_perp_n / (c.d - s.gamma_b0)).powi(2);
    let reported = validate_regime(&c, &s, &r)
        .into_iter()
        .find(|d| d.name == "two_level_reduction")
        .unwrap()
        .value;
    k.check(
        (reported - hand).abs() < 1e-15 && (reported / 1.6e-6 - 1.0).abs() < 0.05,
        format!("two-level reduction ratio {reported:.3e}"),
    );

    let ratio2: f64 = 1e-7;
    let w0 = c.a_par_n;
    let leak = leakage(ratio2.sqrt() * w0, w0).unwrap();
    let rel = (leak / ratio2 - 1.0).abs();
    k.check(rel < 2e-3, format!("leakage at the (w1/w0)^2 = 1e-7 boundary {leak:.4e} ({rel:.1e})"));
    k.finish();
}
