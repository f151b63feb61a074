//! The rotating-frame chain and the closed forms built on it.
//!
//! Frame operators take angular frequencies (rad/µs) and times in µs. The
//! static eigensystem and gate-speed entry points take the MHz model types.
//!
//! Primed Paulis follow the plane angle φ:
//! `σ′x = σz`, `σ′y = cos φ σx + sin φ σy`, `σ′z = −sin φ σx + cos φ σy`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, kron, ops};
use crate::hamiltonian::{gate_phase, h_rotating};
use crate::model::{from_angular, to_angular, QuantumState, RotatingField, Spin, SpinConstants, StaticFields};
use crate::propagate::propagate_unitary;
use crate::{CMatrix, CVector};

fn rz(angle: f64) -> CMatrix {
    expm_unitary(&ops::sigma_z(), angle / 2.0).expect("Pauli is Hermitian")
}

fn ry(angle: f64) -> CMatrix {
    expm_unitary(&ops::sigma_y(), angle / 2.0).expect("Pauli is Hermitian")
}

/// `(σ′x, σ′y, σ′z)` at plane angle `phi`.
pub fn rotated_paulis(phi: f64) -> (CMatrix, CMatrix, CMatrix) {
    let (s, c) = phi.sin_cos();
    let sx = ops::sigma_x::<f64>();
    let sy = ops::sigma_y::<f64>();
    (ops::sigma_z(), sx * c + sy * s, sx * (-s) + sy * c)
}

/// First frame, `U₁ = e^{−iφσz/2} e^{−iωtσy/2} e^{iφσz/2}`.
pub fn u1(t: f64, phi: f64, omega: f64) -> CMatrix {
    rz(phi) * ry(omega * t) * rz(-phi)
}

/// First frame from its generator, `exp(−i(ωt/2)σ′z(φ))`.
pub fn u1_from_generator(t: f64, phi: f64, omega: f64) -> CMatrix {
    let (_, _, sz) = rotated_paulis(phi);
    expm_unitary(&sz, omega * t / 2.0).expect("Pauli is Hermitian")
}

/// Unperturbed first-frame Hamiltonian `ω₁σ′x − (ω/2)σ′z` (2×2).
pub fn h1_rotating_frame(omega1: f64, omega: f64, phi: f64) -> CMatrix {
    let (sx, _, sz) = rotated_paulis(phi);
    sx * omega1 - sz * (omega / 2.0)
}

/// Hyperfine term seen in the first frame,
/// `A∥ e^{iωtσ′z/2} σ′x e^{−iωtσ′z/2} ⊗ Iz` (4×4).
pub fn v1_perturbation(a_par: f64, omega: f64, phi: f64, t: f64) -> CMatrix {
    let u = u1(t, phi, omega);
    let (sx, _, _) = rotated_paulis(phi);
    let electron = u.adjoint() * sx * u;
    kron(&electron, &ops::iz()).expect("4-dim product") * a_par
}

/// Second frame, `U₂ = exp(−i(ω′t/2)σz)`.
pub fn u2(t: f64, omega_prime: f64) -> CMatrix {
    rz(omega_prime * t)
}

/// Second-frame Hamiltonian and its near-resonant eigenbasis.
#[derive(Debug, Clone, Copy)]
pub struct H2Effective {
    /// `(ω₁ − ω′/2)σz − (ω/2)σy`.
    pub exact: CMatrix,
    /// `−(ω/2)σy`.
    pub approx: CMatrix,
    /// δ = 2(ω₁ − ω′/2)/ω.
    pub delta: f64,
    /// `(i(1+δ)|1⟩ + |−1⟩)/√(2(1+δ))`; unit norm only to first order in δ.
    pub plus: CVector,
    /// `(|1⟩ + i(1+δ)|−1⟩)/√(2(1+δ))`.
    pub minus: CVector,
}

pub fn h2_effective(omega1: f64, omega: f64, omega_prime: f64) -> H2Effective {
    let detuning = omega1 - omega_prime / 2.0;
    let delta = 2.0 * detuning / omega;
    let approx = ops::sigma_y::<f64>() * (-omega / 2.0);
    let exact = ops::sigma_z::<f64>() * detuning + approx;
    let n = 1.0 / (2.0 * (1.0 + delta)).sqrt();
    let big = Complex64::new(0.0, (1.0 + delta) * n);
    let small = Complex64::new(n, 0.0);
    H2Effective {
        exact,
        approx,
        delta,
        plus: CVector::from_slice(&[big, small]),
        minus: CVector::from_slice(&[small, big]),
    }
}

/// Hyperfine term in the interaction picture of `H₂`, with the plane angle
/// slaved to the second frame (φ = ω′t):
/// `e^{iH₂t} U₂† V₁ U₂ e^{−iH₂t}`.
pub fn v_interaction(t: f64, omega1: f64, omega: f64, omega_prime: f64, a_par: f64) -> CMatrix {
    let h2 = h2_effective(omega1, omega, omega_prime).exact;
    let w = u2(t, omega_prime) * expm_unitary(&h2, t).expect("H₂ is Hermitian");
    let w4 = kron(&w, &CMatrix::identity(2)).expect("4-dim product");
    w4.adjoint() * v1_perturbation(a_par, omega, omega_prime * t, t) * w4
}

/// Closed-form laboratory evolution `exp(−i(ω′t/2)σz) exp(−iA∥tσzIz)` (4×4).
pub fn analytic_u(t: f64, omega_prime: f64, a_par: f64) -> CMatrix {
    let e = [1.0, 1.0, -1.0, -1.0];
    let n = [0.5, -0.5, 0.5, -0.5];
    let phases: Vec<f64> = (0..4)
        .map(|k| e[k] * (omega_prime / 2.0 + a_par * n[k]) * t)
        .collect();
    CMatrix::from_fn(4, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -phases[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Largest elementwise gap between `U₁†HU₁ − iU₁†U̇₁` (lab Hamiltonian at a
/// frozen plane angle, U̇₁ by central difference) and `H₁ + V₁(t)`.
/// Angular frequencies in rad/µs.
pub fn h1_decomposition_defect(t: f64, phi: f64, omega1: f64, omega: f64, a_par: f64) -> f64 {
    let c = SpinConstants {
        a_par_n: from_angular(a_par),
        ..SpinConstants::default()
    };
    let r = RotatingField {
        omega1: from_angular(omega1),
        omega: from_angular(omega),
        omega_prime: 1.0,
        phi0: 0.0,
        duration: 1.0,
    };
    let i2 = CMatrix::identity(2);
    let lift = |m: CMatrix| kron(&m, &i2).expect("4-dim product");
    let h = h_rotating(&c, &r, t, phi);
    let u = lift(u1(t, phi, omega));
    let dt = 1e-6;
    let du = (lift(u1(t + dt, phi, omega)) - lift(u1(t - dt, phi, omega))) * (1.0 / (2.0 * dt));
    let rotated = u.adjoint() * h * u - u.adjoint() * du * Complex64::new(0.0, 1.0);
    let expected = lift(h1_rotating_frame(omega1, omega, phi)) + v1_perturbation(a_par, omega, phi, t);
    rotated.max_abs_diff(&expected)
}

/// Elementwise gap between the propagated laboratory unitary with φ = ω′t
/// and the closed-form evolution, at `t = 2k·(2π/ω)` where U₁ and
/// `exp(−iH₂t)` are both the identity. `step` is the midpoint step, µs.
pub fn lab_evolution_defect(c: &SpinConstants, r: &RotatingField, k: u32, step: f64) -> Result<f64> {
    let omega = to_angular(r.omega);
    let t = 2.0 * k as f64 * std::f64::consts::TAU / omega.abs();
    let (c2, r2) = (*c, *r);
    let numeric = propagate_unitary(move |time| h_rotating(&c2, &r2, time, gate_phase(&r2, time)), 4, 0.0, t, step)?;
    let closed = analytic_u(t, to_angular(r.omega_prime), to_angular(c.a_par_n));
    Ok(numeric.max_abs_diff(&closed))
}

/// Eigenpairs of the static preparation Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct StaticEigensystem {
    pub theta_up: f64,
    pub theta_down: f64,
    /// Normalization constants of the `|1′⟩` branches, MHz.
    pub c_up: f64,
    pub c_down: f64,
    /// Energies of `|1′↑⟩, |1′↓⟩, |−1′↑⟩, |−1′↓⟩`, rad/µs.
    pub eigenvalues: [f64; 4],
    /// Columns in the same order as `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl StaticEigensystem {
    pub fn theta(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.theta_up,
            Spin::Down => self.theta_down,
        }
    }

    pub fn cos_theta(&self, spin: Spin) -> f64 {
        self.theta(spin).cos()
    }

    /// Electron part of `|1′⟩` for one nuclear branch (2-dim).
    pub fn upper_electron(&self, spin: Spin) -> CVector {
        let (s, c) = (self.theta(spin) / 2.0).sin_cos();
        CVector::from_slice(&[Complex64::new(c, 0.0), Complex64::new(s, 0.0)])
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> CVector {
        let entries: Vec<Complex64> = (0..4).map(|i| self.eigenvectors[(i, k)]).collect();
        CVector::from_slice(&entries)
    }
}

fn branch_field(c: &SpinConstants, s: &StaticFields, spin: Spin) -> f64 {
    s.gamma_b0 + 2.0 * spin.iz() * c.a_par_n / 2.0
}

pub fn static_eigensystem(c: &SpinConstants, s: &StaticFields) -> Result<StaticEigensystem> {
    let e = s.d_e0;
    let mut theta = [0.0; 2];
    let mut norm = [0.0; 2];
    let mut energy = [0.0; 2];
    for spin in Spin::BOTH {
        let b = branch_field(c, s, spin);
        let r = b.hypot(e);
        if r == 0.0 {
            return Err(Error::Degenerate(format!(
                "static levels coincide for nuclear {spin:?} (γeB₀ ± A∥/2 = 0 and E₀ = 0)"
            )));
        }
        let k = spin.index();
        theta[k] = e.atan2(b);
        norm[k] = (b + r).hypot(e);
        energy[k] = to_angular(r);
    }

    let mut vectors = CMatrix::zeros(4);
    for spin in Spin::BOTH {
        let k = spin.index();
        let (sn, cs) = (theta[k] / 2.0).sin_cos();
        // |1′⟩ in column k, |−1′⟩ in column 2 + k.
        vectors[(k, k)] = Complex64::new(cs, 0.0);
        vectors[(2 + k, k)] = Complex64::new(sn, 0.0);
        vectors[(k, 2 + k)] = Complex64::new(sn, 0.0);
        vectors[(2 + k, 2 + k)] = Complex64::new(-cs, 0.0);
    }
    Ok(StaticEigensystem {
        theta_up: theta[0],
        theta_down: theta[1],
        c_up: norm[0],
        c_down: norm[1],
        eigenvalues: [energy[0], energy[1], -energy[0], -energy[1]],
        eigenvectors: vectors,
    })
}

/// `cos θ` of the `|1′⟩` branch from the exact eigenvector.
pub fn cos_theta_exact(c: &SpinConstants, s: &StaticFields, spin: Spin) -> Result<f64> {
    Ok(static_eigensystem(c, s)?.cos_theta(spin))
}

/// Large-field expansion `1 − ½(d⊥E₀/(γeB₀ ± A∥/2))²`.
pub fn cos_theta_approx(c: &SpinConstants, s: &StaticFields, spin: Spin) -> Result<f64> {
    let b = branch_field(c, s, spin);
    if b == 0.0 {
        return Err(Error::Singular(format!(
            "γeB₀ ± A∥/2 = 0 for nuclear {spin:?}"
        )));
    }
    Ok(1.0 - 0.5 * (s.d_e0 / b).powi(2))
}

/// Gate input `|1′⟩(|↑⟩ + |↓⟩)/√2` with the electron conditioned on the
/// nuclear branch.
pub fn prepare_input(c: &SpinConstants, s: &StaticFields) -> Result<QuantumState> {
    let sys = static_eigensystem(c, s)?;
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::zeros(4);
    for spin in Spin::BOTH {
        let el = sys.upper_electron(spin);
        v[spin.index()] = el[0] * half;
        v[2 + spin.index()] = el[1] * half;
    }
    QuantumState::new(v)
}

/// Single nuclear branch `|1′⟩|↑⟩` or `|1′⟩|↓⟩`.
pub fn prepare_branch(c: &SpinConstants, s: &StaticFields, spin: Spin) -> Result<QuantumState> {
    let sys = static_eigensystem(c, s)?;
    QuantumState::new(sys.vector(spin.index()))
}

/// Closed-form gate speeds, rad/µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateSpeedReport {
    /// Full difference-of-fractions form.
    pub exact: f64,
    /// Large-field form `(ω′/2)(d⊥E₀/γeB₀)²(A∥/γeB₀) + A∥`.
    pub approx: f64,
    /// ω′ term of `approx`.
    pub geometric_part: f64,
    /// Bare A∥ term, removed by detecting in the nuclear rotating frame.
    pub hyperfine_part: f64,
    /// `exact − A∥`.
    pub exact_corrected: f64,
    /// π / |geometric_part|, µs (infinite without an electric field).
    pub pi_gate_time: f64,
}

/// Gate speed ΔΩ = d/dt(Ω↑ − Ω↓). `omega_prime` is ω′/2π in MHz.
pub fn gate_speed(c: &SpinConstants, s: &StaticFields, omega_prime: f64) -> Result<GateSpeedReport> {
    let b = s.gamma_b0;
    let a = c.a_par_n;
    let e = s.d_e0;
    if b == 0.0 {
        return Err(Error::Singular("γeB₀ = 0".into()));
    }
    let (bp, bm) = (b + a / 2.0, b - a / 2.0);
    if bp == 0.0 || bm == 0.0 {
        return Err(Error::Singular("γeB₀ = ±A∥/2".into()));
    }
    let (xp, xm) = (e / bp, e / bm);
    let exact = a - e / 2.0 * (xp - xm) - omega_prime / 4.0 * (xp * xp - xm * xm);
    let geometric = omega_prime / 2.0 * (e / b).powi(2) * (a / b);
    let geometric_part = to_angular(geometric);
    Ok(GateSpeedReport {
        exact: to_angular(exact),
        approx: to_angular(geometric + a),
        geometric_part,
        hyperfine_part: to_angular(a),
        exact_corrected: to_angular(exact - a),
        pi_gate_time: PI / geometric_part.abs(),
    })
}

/// ΔΩ generated by the closed-form evolution on the exact static input:
/// `(ω′/2)(cos θ↑ − cos θ↓) + (A∥/2)(cos θ↑ + cos θ↓)`, rad/µs.
pub fn analytic_rate(c: &SpinConstants, s: &StaticFields, omega_prime: f64) -> Result<f64> {
    let sys = static_eigensystem(c, s)?;
    let (up, down) = (sys.cos_theta(Spin::Up), sys.cos_theta(Spin::Down));
    Ok(to_angular(
        omega_prime / 2.0 * (up - down) + c.a_par_n / 2.0 * (up + down),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{h_static, sz_iz};
    use crate::linalg::eig_hermitian;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    #[test]
    fn u1_special_cases() {
        assert!(u1(0.0, 0.7, 5.0).max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        let t = 0.3;
        let w = 2.0;
        let expected = expm_unitary(&ops::sigma_y(), w * t / 2.0).unwrap();
        assert!(u1(t, 0.0, w).max_abs_diff(&expected) < 1e-15);
        assert!(u1(t, 0.4, w).unitarity_defect() < 1e-14);
    }

    #[test]
    fn primed_z_is_conjugated_sigma_y() {
        let phi = 1.1;
        let (_, _, sz) = rotated_paulis(phi);
        let conj = rz(phi) * ops::sigma_y() * rz(-phi);
        assert!(sz.max_abs_diff(&conj) < 1e-14);
    }

    #[test]
    fn h1_examples() {
        let phi = 0.9;
        let (_, _, sz) = rotated_paulis(phi);
        assert!(h1_rotating_frame(0.0, 4.0, phi).max_abs_diff(&(sz * -2.0)) < 1e-15);
        let eig = eig_hermitian(&h1_rotating_frame(1.5, 4.0, phi)).unwrap();
        let r = (1.5f64 * 1.5 + 4.0).sqrt();
        assert!((eig.values()[0] + r).abs() < 1e-12);
        assert!((eig.values()[1] - r).abs() < 1e-12);
    }

    #[test]
    fn h2_at_resonance() {
        let h = h2_effective(3.0, 40.0, 6.0);
        assert_eq!(h.delta, 0.0);
        assert!(h.exact.max_abs_diff(&h.approx) < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVector::from_slice(&[Complex64::new(0.0, s), Complex64::new(s, 0.0)]);
        let minus = CVector::from_slice(&[Complex64::new(s, 0.0), Complex64::new(0.0, s)]);
        assert!(h.plus.max_abs_diff(&plus) < 1e-15);
        assert!(h.minus.max_abs_diff(&minus) < 1e-15);
    }

    #[test]
    fn h2_states_are_first_order_eigenvectors() {
        let omega = 40.0;
        let residual = |delta: f64| {
            let omega1 = 3.0 + delta * omega / 2.0;
            let h = h2_effective(omega1, omega, 6.0);
            let eig = eig_hermitian(&h.exact).unwrap();
            // |+⟩ belongs to the upper level, |−⟩ to the lower.
            let r_plus = (h.exact.mul_vec(&h.plus) - h.plus.scale(eig.values()[1].into())).norm();
            let r_minus =
                (h.exact.mul_vec(&h.minus) - h.minus.scale(eig.values()[0].into())).norm();
            r_plus.max(r_minus) / (omega / 2.0)
        };
        let r1 = residual(1e-3);
        let r2 = residual(5e-4);
        assert!(r1 < 5e-6, "{r1}");
        // Quadratic: halving δ quarters the residual.
        assert!((r1 / r2 - 4.0).abs() < 0.1, "{}", r1 / r2);
    }

    #[test]
    fn analytic_u_examples() {
        assert!(analytic_u(0.0, 7.0, 2.0).max_abs_diff(&CMatrix::identity(4)) < 1e-15);
        let (t, wp, a) = (0.37, 11.0, 3.0);
        let u = analytic_u(t, wp, a);
        // Independent construction from the two exponentials.
        let electron = kron(&expm_unitary(&ops::sigma_z(), wp * t / 2.0).unwrap(), &CMatrix::identity(2)).unwrap();
        let hyper = expm_unitary(&sz_iz(), a * t).unwrap();
        assert!(u.max_abs_diff(&(electron * hyper)) < 1e-13);
        let expected = Complex64::from_polar(1.0, -wp * t / 2.0 - a * t / 2.0);
        assert!((u[(0, 0)] - expected).norm() < 1e-14);
        let full_turn = analytic_u(TAU / wp, wp, 0.0);
        assert!(full_turn.max_abs_diff(&(-CMatrix::identity(4))) < 1e-13);
    }

    #[test]
    fn frame_identity_at_fixed_plane() {
        assert!(h1_decomposition_defect(0.13, 0.4, 3.0, 30.0, TAU * 3.03) < 1e-6);
    }

    #[test]
    fn interaction_picture_hyperfine_is_constant_at_resonance() {
        let a = TAU * 3.03;
        let wp = TAU * 10.0;
        let target = sz_iz() * a;
        for t in [0.0, 0.013, 0.05, 0.31] {
            let v = v_interaction(t, wp / 2.0, 25.0 * wp, wp, a);
            assert!(v.max_abs_diff(&target) < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn lab_evolution_matches_without_drive() {
        // ω₁ = 0 and ω′ → 0 leave only A∥σzIz, which both sides share.
        let c = SpinConstants::default();
        let r = RotatingField { omega1: 0.0, omega: 500.0, omega_prime: 1e-9, phi0: 0.0, duration: 1.0 };
        let d = lab_evolution_defect(&c, &r, 3, 1e-4).unwrap();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn static_eigensystem_zero_electric_field() {
        let c = SpinConstants::default();
        let sys = static_eigensystem(&c, &StaticFields::new(20.0, 0.0)).unwrap();
        assert_eq!(sys.theta_up, 0.0);
        assert_eq!(sys.theta_down, 0.0);
        assert!(sys.vector(0).max_abs_diff(&CVector::basis(4, 0)) < 1e-15);
    }

    #[test]
    fn static_eigensystem_matches_numeric_diagonalization() {
        let c = SpinConstants::default();
        let s = StaticFields::default();
        let sys = static_eigensystem(&c, &s).unwrap();
        let h = h_static(&c, &s);
        for k in 0..4 {
            let v = sys.vector(k);
            let residual = (h.mul_vec(&v) - v.scale(sys.eigenvalues[k].into())).norm();
            assert!(residual < 1e-10, "column {k}: {residual}");
        }
        let v = sys.eigenvectors;
        assert!((v.adjoint() * v).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
        let closed: Vec<f64> = [20.0 + 1.515, 20.0 - 1.515]
            .iter()
            .map(|b: &f64| TAU * b.hypot(4.0))
            .collect();
        assert!((sys.eigenvalues[0] - closed[0]).abs() < 1e-12);
        assert!((sys.eigenvalues[3] + closed[1]).abs() < 1e-12);
        let mut numeric = eig_hermitian(&h).unwrap().values().to_vec();
        let mut ours = sys.eigenvalues.to_vec();
        numeric.sort_by(f64::total_cmp);
        ours.sort_by(f64::total_cmp);
        for (a, b) in numeric.iter().zip(&ours) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn cos_theta_exact_vs_expansion() {
        let c = SpinConstants::default();
        let s = StaticFields::default();
        let approx = cos_theta_approx(&c, &s, Spin::Up).unwrap();
        assert!((approx - 0.98272).abs() < 1e-5, "{approx}");
        let exact = cos_theta_exact(&c, &s, Spin::Up).unwrap();
        let oracle = 21.515 / 21.515f64.hypot(4.0);
        assert!((exact - oracle).abs() < 1e-12);
        assert!((exact - approx).abs() < 1e-3);
    }

    #[test]
    fn degenerate_static_configuration_is_rejected() {
        let c = SpinConstants::default();
        let s = StaticFields::new(c.a_par_n / 2.0, 0.0);
        assert!(matches!(static_eigensystem(&c, &s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn prepared_input() {
        let c = SpinConstants::default();
        let plain = prepare_input(&c, &StaticFields::new(20.0, 0.0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = CVector::from_slice(&[h.into(), h.into(), zero(), zero()]);
        assert!(plain.vector().max_abs_diff(&expected) < 1e-15);

        let s = StaticFields::default();
        let psi = prepare_input(&c, &s).unwrap();
        assert!((psi.vector().norm() - 1.0).abs() < 1e-12);
        // Projection onto the numeric |1′↑⟩, |1′↓⟩ eigenvectors carries all weight.
        let eig = eig_hermitian(&h_static(&c, &s)).unwrap();
        let weight: f64 = (2..4).map(|k| eig.vector(k).inner(psi.vector()).norm_sqr()).sum();
        assert!((weight - 1.0).abs() < 1e-10, "{weight}");
    }

    #[test]
    fn gate_speed_headline() {
        let c = SpinConstants::default();
        let g = gate_speed(&c, &StaticFields::default(), 1000.0).unwrap();
        assert!((g.pi_gate_time - 0.165).abs() / 0.165 < 0.02, "{}", g.pi_gate_time);
        assert!((g.geometric_part - TAU * 3.03).abs() < 1e-9);
        assert!((g.approx - g.geometric_part - g.hyperfine_part).abs() < 1e-12);
        // Difference-of-fractions form evaluated by hand.
        let (x, y) = (4.0 / 21.515, 4.0 / 18.485);
        let oracle = 3.03 - 2.0 * (x - y) - 250.0 * (x * x - y * y);
        assert!((g.exact - TAU * oracle).abs() < 1e-9);
    }

    #[test]
    fn gate_speed_without_electric_field() {
        let c = SpinConstants::default();
        let g = gate_speed(&c, &StaticFields::new(20.0, 0.0), 1000.0).unwrap();
        assert_eq!(g.geometric_part, 0.0);
        assert!((g.exact - TAU * c.a_par_n).abs() < 1e-12);
        assert!(g.pi_gate_time.is_infinite());
    }

    #[test]
    fn gate_speed_singularities() {
        let c = SpinConstants::default();
        for b in [0.0, c.a_par_n / 2.0, -c.a_par_n / 2.0] {
            let r = gate_speed(&c, &StaticFields::new(b, 4.0), 1000.0);
            assert!(matches!(r, Err(Error::Singular(_))), "{b}");
        }
    }

    #[test]
    fn exact_to_approx_converges_quadratically() {
        let c = SpinConstants::default();
        let rel = |scale: f64| {
            let s = StaticFields::new(20.0 * scale, 4.0);
            let g = gate_speed(&c, &s, 1000.0).unwrap();
            (g.exact - g.approx).abs() / g.approx.abs()
        };
        let errors: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&k| rel(k)).collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.0..5.0).contains(&ratio), "{errors:?}");
        }
    }

    #[test]
    fn analytic_rate_reduces_to_expansion() {
        let c = SpinConstants::default();
        let s = StaticFields::new(200.0, 4.0);
        let g = gate_speed(&c, &s, 1000.0).unwrap();
        let r = analytic_rate(&c, &s, 1000.0).unwrap();
        assert!((r - g.approx).abs() / g.approx < 1e-3);
    }

    proptest! {
        #[test]
        fn generator_and_product_forms_agree(t in 0.0f64..2.0, phi in -4.0f64..4.0, w in -50.0f64..50.0) {
            prop_assert!(u1(t, phi, w).max_abs_diff(&u1_from_generator(t, phi, w)) < 1e-12);
        }

        #[test]
        fn frame_identity(t in 0.0f64..1.0, phi in -3.2f64..3.2, w1 in 0.0f64..10.0, w in 5.0f64..40.0) {
            prop_assert!(h1_decomposition_defect(t, phi, w1, w, TAU * 3.03) < 1e-6);
        }

        #[test]
        fn interaction_hyperfine_constant(t in 0.0f64..1.0, wp in 1.0f64..100.0) {
            let a = TAU * 3.03;
            let v = v_interaction(t, wp / 2.0, 25.0 * wp, wp, a);
            prop_assert!(v.max_abs_diff(&(sz_iz() * a)) < 1e-6);
        }
    }
}
