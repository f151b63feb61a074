//! Physical constants, field programs and basis conventions.
//!
//! Configuration values are cyclic frequencies in MHz (the `f/2π` numbers
//! quoted for the NV–¹⁵N system); times are in µs. [`to_angular`] converts to
//! the rad/µs angular frequencies every Hamiltonian is assembled in.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::CVector;

/// `2π·f`: cyclic frequency (MHz) to angular frequency (rad/µs).
pub fn to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

pub fn from_angular(w: f64) -> f64 {
    w / TAU
}

/// Constants of the NV electron spin coupled to ¹⁵N (and optionally ¹³C).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinConstants {
    /// Zero-field splitting D/2π, MHz.
    pub d: f64,
    /// ¹⁵N secular hyperfine A∥/2π, MHz.
    pub a_par_n: f64,
    /// ¹⁵N flip-flop hyperfine A⊥/2π, MHz.
    pub a_perp_n: f64,
    /// ¹³C secular hyperfine A∥ᶜ/2π, MHz.
    pub a_par_c: f64,
    /// Perpendicular electric dipole moment d⊥/2π, Hz·cm/V.
    pub d_perp: f64,
    /// Electron gyromagnetic ratio γe/2π, MHz/mT.
    pub gamma_e: f64,
}

impl Default for SpinConstants {
    fn default() -> Self {
        Self {
            d: 2870.0,
            a_par_n: 3.03,
            a_perp_n: 3.65,
            a_par_c: 14.0,
            d_perp: 17.0,
            gamma_e: 28.024_951_4,
        }
    }
}

impl SpinConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("D_MHz", self.d),
            ("A_par_N_MHz", self.a_par_n),
            ("A_perp_N_MHz", self.a_perp_n),
            ("A_par_C_MHz", self.a_par_c),
            ("d_perp_Hz_cm_per_V", self.d_perp),
            ("gamma_e_MHz_per_mT", self.gamma_e),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// γeB/2π in MHz for a field along the NV axis given in mT.
    pub fn zeeman_mhz(&self, b_mt: f64) -> f64 {
        self.gamma_e * b_mt
    }

    pub fn field_mt(&self, gamma_b_mhz: f64) -> f64 {
        gamma_b_mhz / self.gamma_e
    }

    /// d⊥E/2π in MHz for a perpendicular electric field given in V/cm.
    pub fn stark_mhz(&self, e_v_per_cm: f64) -> f64 {
        self.d_perp * e_v_per_cm * 1e-6
    }

    pub fn efield_v_per_cm(&self, d_e_mhz: f64) -> f64 {
        d_e_mhz / (self.d_perp * 1e-6)
    }
}

/// Static preparation fields plus the noise and systematic-shift model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticFields {
    /// γeB₀/2π, MHz.
    pub gamma_b0: f64,
    /// d⊥E₀/2π, MHz.
    pub d_e0: f64,
    /// γeδB/2π, MHz (noise amplitude).
    pub delta_b: f64,
    /// ΔB/B₀.
    pub shift_b: f64,
    /// ΔE/E₀.
    pub shift_e: f64,
}

impl Default for StaticFields {
    fn default() -> Self {
        Self {
            gamma_b0: 20.0,
            d_e0: 4.0,
            delta_b: 0.02,
            shift_b: 0.0,
            shift_e: 0.0,
        }
    }
}

impl StaticFields {
    pub fn new(gamma_b0: f64, d_e0: f64) -> Self {
        Self {
            gamma_b0,
            d_e0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_b0.is_finite() && self.gamma_b0 >= 0.0) {
            return Err(invalid("gammaB0_MHz", "must be finite and >= 0"));
        }
        if !(self.d_e0.is_finite() && self.d_e0 >= 0.0) {
            return Err(invalid("dE0_MHz", "must be finite and >= 0"));
        }
        if !(self.delta_b.is_finite() && self.delta_b >= 0.0) {
            return Err(invalid("deltaB_MHz", "must be finite and >= 0"));
        }
        if !(self.shift_b.abs() < 0.5) {
            return Err(invalid("shiftB", "|ΔB/B₀| must be < 0.5"));
        }
        if !(self.shift_e.abs() < 0.5) {
            return Err(invalid("shiftE", "|ΔE/E₀| must be < 0.5"));
        }
        Ok(())
    }

    /// Copy with the magnetic field replaced.
    pub fn with_gamma_b0(self, gamma_b0: f64) -> Self {
        Self { gamma_b0, ..self }
    }
}

/// Gate-time drive: a field of amplitude ω₁ rotating at ω whose rotation
/// plane turns about the NV axis at ω′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotatingField {
    /// ω₁/2π, MHz.
    pub omega1: f64,
    /// ω/2π, MHz.
    pub omega: f64,
    /// ω′/2π, MHz.
    pub omega_prime: f64,
    /// Initial plane angle φ₀, rad.
    pub phi0: f64,
    /// Gate duration, µs.
    pub duration: f64,
}

/// Default ratio ω/ω′ of fast to slow rotation.
pub const DEFAULT_FAST_RATIO: f64 = 25.0;

impl RotatingField {
    /// Drive for `cycles` slow rotations at ω′ with ω₁ = ω′/2 (δ = 0) and
    /// ω = 25·ω′.
    pub fn for_gate(omega_prime: f64, cycles: u32) -> Self {
        Self {
            omega1: omega_prime / 2.0,
            omega: DEFAULT_FAST_RATIO * omega_prime,
            omega_prime,
            phi0: 0.0,
            duration: cycles as f64 / omega_prime,
        }
    }

    /// Period 2π/ω′ of the slow rotation, µs.
    pub fn cycle_period(&self) -> f64 {
        1.0 / self.omega_prime
    }

    /// Number of slow-rotation cycles in `duration` (not rounded).
    pub fn cycles(&self) -> f64 {
        self.duration * self.omega_prime
    }

    /// δ = 2(ω₁ − ω′/2)/ω.
    pub fn delta(&self) -> f64 {
        2.0 * (self.omega1 - self.omega_prime / 2.0) / self.omega
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega1_MHz", self.omega1),
            ("omega_MHz", self.omega),
            ("phi0_rad", self.phi0),
            ("duration_us", self.duration),
            ("omega_prime_MHz", self.omega_prime),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.omega_prime == 0.0 {
            return Err(invalid("omega_prime_MHz", "must be non-zero"));
        }
        if self.omega == 0.0 {
            return Err(invalid("omega_MHz", "must be non-zero"));
        }
        if self.duration < 0.0 {
            return Err(invalid("duration_us", "must be >= 0"));
        }
        Ok(())
    }
}

/// Nuclear spin projection of a spin-1/2 (¹⁵N or ¹³C).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Iz eigenvalue ±1/2.
    pub fn iz(self) -> f64 {
        match self {
            Spin::Up => 0.5,
            Spin::Down => -0.5,
        }
    }

    /// Index inside a spin-1/2 factor (↑ first).
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];
}

/// Electron level of the two-level reduction (`|1⟩` first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Electron {
    Plus,
    Minus,
}

/// Normalized state over electron ⊗ ¹⁵N (⊗ ¹³C, innermost).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumState {
    vector: CVector,
}

impl QuantumState {
    pub const NORM_TOLERANCE: f64 = 1e-10;

    pub fn new(vector: CVector) -> Result<Self> {
        if vector.dim() != 4 && vector.dim() != 8 {
            return Err(invalid(
                "state",
                format!("dimension must be 4 or 8, got {}", vector.dim()),
            ));
        }
        let n = vector.norm();
        if (n - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(invalid("state", format!("norm {n} is not 1")));
        }
        Ok(Self { vector })
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }

    pub fn has_carbon(&self) -> bool {
        self.dim() == 8
    }

    /// Index of `|e, n(, c)⟩` in the product basis.
    pub fn basis_index(electron: Electron, nitrogen: Spin, carbon: Option<Spin>) -> usize {
        let e = match electron {
            Electron::Plus => 0,
            Electron::Minus => 1,
        };
        let base = 2 * e + nitrogen.index();
        match carbon {
            Some(c) => 2 * base + c.index(),
            None => base,
        }
    }

    /// Basis labels in storage order, e.g. `|1↑⟩`.
    pub fn basis_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.dim());
        for e in ["1", "-1"] {
            for n in ["↑", "↓"] {
                if self.has_carbon() {
                    for c in ["+", "-"] {
                        labels.push(format!("|{e}{n}{c}⟩"));
                    }
                } else {
                    labels.push(format!("|{e}{n}⟩"));
                }
            }
        }
        labels
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.vector[index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeStatus {
    Pass,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeDiagnostic {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub status: RegimeStatus,
    pub message: String,
}

impl RegimeDiagnostic {
    fn upper(name: &'static str, value: f64, threshold: f64, what: &str) -> Self {
        let ok = value.is_finite() && value <= threshold;
        Self {
            name,
            value,
            threshold,
            status: if ok { RegimeStatus::Pass } else { RegimeStatus::Warn },
            message: if ok {
                format!("{what}: {value:.3e} <= {threshold:.3e}")
            } else {
                format!("{what}: {value:.3e} exceeds {threshold:.3e}")
            },
        }
    }
}

/// Upper bound on (A⊥/(D−γeB₀))² for the two-level reduction.
pub const REDUCTION_RATIO_LIMIT: f64 = 1e-4;
/// Suppression boundary (ω₁/A∥)² of the oscillating-field effect.
pub const AMPLITUDE_SUPPRESSION: f64 = 1e-7;
/// "Much greater than" margin applied to [`AMPLITUDE_SUPPRESSION`].
pub const AMPLITUDE_MARGIN: f64 = 100.0;
pub const ADIABATICITY_LIMIT: f64 = 0.05;
pub const FAST_ROTATION_MIN: f64 = 20.0;
pub const FIELD_RATIO_E_LIMIT: f64 = 0.2;
pub const FIELD_RATIO_A_LIMIT: f64 = 0.16;

/// Regime checks; diagnostics only, never an error.
pub fn validate_regime(
    c: &SpinConstants,
    s: &StaticFields,
    r: &RotatingField,
) -> Vec<RegimeDiagnostic> {
    let mut out = Vec::new();

    let reduction = (c.a_perp_n / (c.d - s.gamma_b0)).powi(2);
    out.push(RegimeDiagnostic::upper(
        "two_level_reduction",
        reduction,
        REDUCTION_RATIO_LIMIT,
        "(A_perp/(D - gammaB0))^2",
    ));

    let amplitude = (r.omega1 / c.a_par_n).powi(2);
    let floor = AMPLITUDE_SUPPRESSION * AMPLITUDE_MARGIN;
    let amplitude_ok = amplitude >= floor;
    out.push(RegimeDiagnostic {
        name: "amplitude_threshold",
        value: amplitude,
        threshold: floor,
        status: if amplitude_ok { RegimeStatus::Pass } else { RegimeStatus::Warn },
        message: if amplitude <= AMPLITUDE_SUPPRESSION {
            format!(
                "(omega1/A_par)^2 = {amplitude:.3e} <= {AMPLITUDE_SUPPRESSION:.0e}: oscillating field suppressed by orthogonal field"
            )
        } else if !amplitude_ok {
            format!("(omega1/A_par)^2 = {amplitude:.3e} is not >> {AMPLITUDE_SUPPRESSION:.0e}")
        } else {
            format!("(omega1/A_par)^2 = {amplitude:.3e} >> {AMPLITUDE_SUPPRESSION:.0e}")
        },
    });

    out.push(RegimeDiagnostic::upper(
        "adiabaticity",
        (r.omega_prime / r.omega).abs(),
        ADIABATICITY_LIMIT,
        "|omega'/omega|",
    ));

    let detuning = (r.omega_prime - 2.0 * r.omega1).abs();
    let fast = if detuning == 0.0 {
        f64::INFINITY
    } else {
        r.omega.abs() / detuning
    };
    out.push(RegimeDiagnostic {
        name: "fast_rotation",
        value: fast,
        threshold: FAST_ROTATION_MIN,
        status: if fast >= FAST_ROTATION_MIN { RegimeStatus::Pass } else { RegimeStatus::Warn },
        message: format!("|omega|/|omega' - 2 omega1| = {fast:.3e} (need >= {FAST_ROTATION_MIN})"),
    });

    let e_ratio = if s.gamma_b0 == 0.0 { f64::INFINITY } else { (s.d_e0 / s.gamma_b0).abs() };
    out.push(RegimeDiagnostic::upper(
        "large_field_electric",
        e_ratio,
        FIELD_RATIO_E_LIMIT,
        "|dE0/gammaB0|",
    ));
    let a_ratio = if s.gamma_b0 == 0.0 { f64::INFINITY } else { (c.a_par_n / s.gamma_b0).abs() };
    out.push(RegimeDiagnostic::upper(
        "large_field_hyperfine",
        a_ratio,
        FIELD_RATIO_A_LIMIT,
        "|A_par/gammaB0|",
    ));
    out
}

/// True when every diagnostic passes.
pub fn in_regime(diagnostics: &[RegimeDiagnostic]) -> bool {
    diagnostics.iter().all(|d| d.status == RegimeStatus::Pass)
}
