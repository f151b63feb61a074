//! Hamiltonians of the NV electron–nuclear system in the fixed product basis.
//!
//! Inputs are cyclic frequencies in MHz (or lab units where noted); every
//! returned matrix is in angular frequency, rad/µs. Two-level operators act on
//! `{|1⟩, |−1⟩}` with `σz = diag(1, −1)`; the nuclear factor uses
//! `Iz = diag(1/2, −1/2)`.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron, ops};
use crate::model::{to_angular, RotatingField, SpinConstants, StaticFields};
use crate::CMatrix;

fn electron(op: CMatrix) -> CMatrix {
    kron(&op, &CMatrix::identity(2)).expect("4-dim product")
}

/// `σz ⊗ Iz` on electron ⊗ nucleus.
pub fn sz_iz() -> CMatrix {
    kron(&ops::sigma_z(), &ops::iz()).expect("4-dim product")
}

/// Full spin-1 ⊗ spin-1/2 ground-state Hamiltonian, basis `(+1, 0, −1) ⊗ (↑, ↓)`.
/// Field along the NV axis in mT, perpendicular electric field in V/cm.
pub fn h_full(c: &SpinConstants, b_mt: f64, ex_v_cm: f64, ey_v_cm: f64) -> CMatrix {
    h_full_compound(
        c,
        c.zeeman_mhz(b_mt),
        c.stark_mhz(ex_v_cm),
        c.stark_mhz(ey_v_cm),
    )
}

/// [`h_full`] with γeB, d⊥Ex, d⊥Ey given directly in MHz.
pub fn h_full_compound(c: &SpinConstants, gamma_b: f64, d_ex: f64, d_ey: f64) -> CMatrix {
    let sz = ops::s1_z::<f64>();
    let sx = ops::s1_x::<f64>();
    let sy = ops::s1_y::<f64>();
    let sp = ops::s1_plus::<f64>();
    let sm = ops::s1_minus::<f64>();
    let i2 = CMatrix::identity(2);
    let on_e = |m: CMatrix| kron(&m, &i2).expect("6-dim product");

    let electron_part = sz * sz * to_angular(c.d)
        + sz * to_angular(gamma_b)
        + (sx * sx - sy * sy) * to_angular(d_ex)
        + (sx * sy + sy * sx) * to_angular(d_ey);
    let secular = kron(&sz, &ops::iz()).expect("6-dim product") * to_angular(c.a_par_n);
    let flip_flop = (kron(&sp, &ops::i_minus()).expect("6-dim product")
        + kron(&sm, &ops::i_plus()).expect("6-dim product"))
        * (to_angular(c.a_perp_n) / 2.0);
    on_e(electron_part) + secular + flip_flop
}

/// Two-level reduction `γeBσz + d⊥Exσx + d⊥Eyσy + A∥σzIz`.
pub fn h_reduced(c: &SpinConstants, gamma_b: f64, d_ex: f64, d_ey: f64) -> CMatrix {
    let field = ops::sigma_z::<f64>() * to_angular(gamma_b)
        + ops::sigma_x::<f64>() * to_angular(d_ex)
        + ops::sigma_y::<f64>() * to_angular(d_ey);
    electron(field) + sz_iz() * to_angular(c.a_par_n)
}

/// Laboratory-frame rotating-field Hamiltonian at time `t` (µs) and plane
/// angle `phi`: γeB = ω₁cos ωt, d⊥Ex = ω₁ sin ωt cos φ, d⊥Ey = ω₁ sin ωt sin φ.
pub fn h_rotating(c: &SpinConstants, r: &RotatingField, t: f64, phi: f64) -> CMatrix {
    h_rotating_biased(c, r, t, phi, 0.0)
}

/// [`h_rotating`] plus a static electron field `bias·σz` (MHz), the effective
/// field a spectator ¹³C adds.
pub fn h_rotating_biased(
    c: &SpinConstants,
    r: &RotatingField,
    t: f64,
    phi: f64,
    bias: f64,
) -> CMatrix {
    let wt = to_angular(r.omega) * t;
    let (s, co) = wt.sin_cos();
    h_reduced(
        c,
        r.omega1 * co + bias,
        r.omega1 * s * phi.cos(),
        r.omega1 * s * phi.sin(),
    )
}

/// Plane angle φ(t) = ω′t + φ₀ during gating.
pub fn gate_phase(r: &RotatingField, t: f64) -> f64 {
    to_angular(r.omega_prime) * t + r.phi0
}

/// Static preparation Hamiltonian `γeB₀σz + d⊥E₀σx + A∥σzIz`.
pub fn h_static(c: &SpinConstants, s: &StaticFields) -> CMatrix {
    h_reduced(c, s.gamma_b0, s.d_e0, 0.0)
}

/// Static Hamiltonian with the magnetic field displaced by a noise value
/// `noise` (γeδB/2π, MHz): B₀ → B₀ + δB.
pub fn h_static_noise(c: &SpinConstants, s: &StaticFields, noise: f64) -> CMatrix {
    h_reduced(c, s.gamma_b0 + noise, s.d_e0, 0.0)
}

/// Electron snapshot `ω₁σx + (ω₀/2)σz` (2×2).
pub fn h_snapshot(omega1: f64, omega0: f64) -> CMatrix {
    ops::sigma_x::<f64>() * to_angular(omega1) + ops::sigma_z::<f64>() * (to_angular(omega0) / 2.0)
}

/// Admixture `|⟨−1|ψ₁⟩|²` of the upper snapshot eigenstate, from the exact
/// eigenvectors of [`h_snapshot`].
pub fn leakage(omega1: f64, omega0: f64) -> Result<f64> {
    if omega0 == 0.0 {
        return Err(Error::Degenerate(
            "leakage undefined for omega0 = 0 (no preferred axis)".into(),
        ));
    }
    let eig = eig_hermitian(&h_snapshot(omega1, omega0))?;
    // ψ₁ is the state that reduces to |1⟩ as ω₁ → 0.
    let k = if omega0 > 0.0 { 1 } else { 0 };
    Ok(eig.vector(k)[1].norm_sqr())
}

/// 8-dim gate Hamiltonian with a ¹³C spectator:
/// `h_rotating ⊗ 1 + A∥ᶜ σz ⊗ 1 ⊗ Iz`.
pub fn h_conditional(c: &SpinConstants, r: &RotatingField, t: f64, phi: f64) -> CMatrix {
    with_carbon(c, h_rotating(c, r, t, phi))
}

/// 8-dim static Hamiltonian with the ¹³C coupling.
pub fn h_conditional_static(c: &SpinConstants, s: &StaticFields) -> CMatrix {
    with_carbon(c, h_static(c, s))
}

fn with_carbon(c: &SpinConstants, h4: CMatrix) -> CMatrix {
    let i2 = CMatrix::identity(2);
    let carbon = kron(&electron(ops::sigma_z()), &ops::iz()).expect("8-dim product")
        * to_angular(c.a_par_c);
    kron(&h4, &i2).expect("8-dim product") + carbon
}

/// Named Hamiltonian with its parameters, for callers that pick the kind at
/// run time.
#[derive(Debug, Clone, Copy)]
pub enum HamiltonianSpec<'a> {
    Full6 {
        c: &'a SpinConstants,
        b_mt: f64,
        ex_v_cm: f64,
        ey_v_cm: f64,
    },
    Reduced4 {
        c: &'a SpinConstants,
        gamma_b: f64,
        d_ex: f64,
        d_ey: f64,
    },
    RotatingLab {
        c: &'a SpinConstants,
        r: &'a RotatingField,
        time: f64,
    },
    Static {
        c: &'a SpinConstants,
        s: &'a StaticFields,
    },
    StaticNoise {
        c: &'a SpinConstants,
        s: &'a StaticFields,
        noise: f64,
    },
    SnapshotA1 {
        omega1: f64,
        omega0: f64,
    },
    Conditional8 {
        c: &'a SpinConstants,
        r: &'a RotatingField,
        time: f64,
    },
}

impl HamiltonianSpec<'_> {
    pub fn matrix(&self) -> CMatrix {
        match *self {
            Self::Full6 { c, b_mt, ex_v_cm, ey_v_cm } => h_full(c, b_mt, ex_v_cm, ey_v_cm),
            Self::Reduced4 { c, gamma_b, d_ex, d_ey } => h_reduced(c, gamma_b, d_ex, d_ey),
            Self::RotatingLab { c, r, time } => h_rotating(c, r, time, gate_phase(r, time)),
            Self::Static { c, s } => h_static(c, s),
            Self::StaticNoise { c, s, noise } => h_static_noise(c, s, noise),
            Self::SnapshotA1 { omega1, omega0 } => h_snapshot(omega1, omega0),
            Self::Conditional8 { c, r, time } => h_conditional(c, r, time, gate_phase(r, time)),
        }
    }
}
