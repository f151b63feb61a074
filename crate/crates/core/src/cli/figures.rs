//! Figure grids and parameter sweeps, emitted as CSV.
//!
//! Cells are evaluated in parallel and written in grid order. A cell whose
//! physics fails (a singular field, say) is written as `NaN` with a warning.

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use super::{CliError, CliResult, RunConfig};
use crate::conditional::{conditional_shift, DEFAULT_KMAX};
use crate::frames::gate_speed;
use crate::model::StaticFields;
use crate::noise::{epsilon_dec, epsilon_sys, epsilon_sys_exact, mc_gate_error, static_coherence, t2star_static};
use crate::propagate::run_gate;

pub const DEFAULT_POINTS: usize = 50;
/// OU steps per gate in the Monte-Carlo gate error.
const MC_GATE_STEPS: usize = 64;
/// Output times of each static-coherence Monte-Carlo curve.
const MC_COHERENCE_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Figure {
    /// Gate time over (γeB₀, d⊥E₀).
    #[value(name = "2")]
    #[serde(rename = "2")]
    Fig2,
    /// Decoherence error against γeB₀.
    #[value(name = "3a")]
    #[serde(rename = "3a")]
    Fig3a,
    /// Systematic error over the relative shifts (ΔB/B₀, ΔE/E₀).
    #[value(name = "3b")]
    #[serde(rename = "3b")]
    Fig3b,
    /// Static-field T₂* over (γeB₀, d⊥E₀).
    #[value(name = "4")]
    #[serde(rename = "4")]
    Fig4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Quantity {
    GateTime,
    EpsilonDec,
    EpsilonSys,
    T2starStatic,
    ConditionalTime,
}

impl Quantity {
    pub fn column(self) -> &'static str {
        match self {
            Quantity::GateTime => "gate_time_us",
            Quantity::EpsilonDec => "epsilon_dec",
            Quantity::EpsilonSys => "epsilon_sys",
            Quantity::T2starStatic => "t2star_static_us",
            Quantity::ConditionalTime => "conditional_time_us",
        }
    }

    fn eval(self, cfg: &RunConfig) -> crate::Result<f64> {
        let (c, s) = (&cfg.constants, &cfg.fields);
        match self {
            Quantity::GateTime => Ok(gate_speed(c, s, cfg.omega_prime)?.pi_gate_time),
            Quantity::EpsilonDec => epsilon_dec(s),
            Quantity::EpsilonSys => epsilon_sys(s),
            Quantity::T2starStatic => t2star_static(c, s),
            Quantity::ConditionalTime => Ok(conditional_shift(c, s, cfg.omega_prime, DEFAULT_KMAX)?.gate_time),
        }
    }
}

/// CSV table; every row already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

/// `n` evenly spaced values from `lo` to `hi`, snapped to 1e-9 so that
/// round grid values such as 4 or 0 come out exact.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            let v = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            (v * 1e9).round() / 1e9
        })
        .collect()
}

/// Default axes: γeB₀ 10..108 MHz and d⊥E₀ 0.2..10 MHz, shifts −0.1..0.096.
fn b_axis(points: usize) -> Vec<f64> {
    grid(10.0, 108.0, points)
}

fn e_axis(points: usize) -> Vec<f64> {
    grid(0.2, 10.0, points)
}

fn shift_axis(points: usize) -> Vec<f64> {
    grid(-0.1, 0.096, points)
}

fn num(v: f64) -> String {
    v.to_string()
}

fn settle(what: &str, r: crate::Result<f64>) -> f64 {
    r.unwrap_or_else(|e| {
        log::warn!("{what}: {e}");
        f64::NAN
    })
}

/// One method's value per grid cell; `f` runs in parallel.
fn cells<F>(points: &[(f64, f64)], f: F) -> Vec<f64>
where
    F: Fn(f64, f64) -> crate::Result<f64> + Sync,
{
    points
        .par_iter()
        .map(|&(x, y)| settle(&format!("cell ({x}, {y})"), f(x, y)))
        .collect()
}

fn plane(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
}

fn with_fields(cfg: &RunConfig, b: f64, e: f64) -> StaticFields {
    StaticFields {
        gamma_b0: b,
        d_e0: e,
        ..cfg.fields
    }
}

/// Figure data. Columns:
/// - `2`: gammaB0_MHz, dE0_MHz, method, gate_time_us
/// - `3a`: gammaB0_MHz, method, epsilon_dec
/// - `3b`: shiftB, shiftE, method, epsilon_sys
/// - `4`: gammaB0_MHz, dE0_MHz, method, t2star_ms
pub fn figure(cfg: &RunConfig, which: Figure, numeric: bool, points: usize) -> CliResult<Table> {
    if points < 2 {
        return Err(CliError::config("--points must be >= 2"));
    }
    let c = cfg.constants;
    let wp = cfg.omega_prime;
    let mut methods: Vec<(&str, Vec<f64>)> = Vec::new();
    let (mut table, coords) = match which {
        Figure::Fig2 => {
            let coords = plane(&b_axis(points), &e_axis(points));
            methods.push(("closed_form", cells(&coords, |b, e| Ok(gate_speed(&c, &with_fields(cfg, b, e), wp)?.pi_gate_time))));
            if numeric {
                let (r, pc) = (cfg.drive(), cfg.propagation());
                methods.push(("numeric", cells(&coords, |b, e| Ok(run_gate(&c, &with_fields(cfg, b, e), &r, &pc)?.pi_gate_time()))));
            }
            (Table::new(&["gammaB0_MHz", "dE0_MHz", "method", "gate_time_us"]), coords)
        }
        Figure::Fig3a => {
            let coords: Vec<(f64, f64)> = b_axis(points).into_iter().map(|b| (b, cfg.fields.d_e0)).collect();
            methods.push(("closed_form", cells(&coords, |b, e| epsilon_dec(&with_fields(cfg, b, e)))));
            if numeric {
                let mc = |b: f64, e: f64| mc_gate_error(&c, &with_fields(cfg, b, e), wp, &cfg.noise, MC_GATE_STEPS);
                // Trajectories already run in parallel; cells go one by one.
                let runs: Vec<_> = coords.iter().map(|&(b, e)| mc(b, e)).collect();
                methods.push(("monte_carlo", runs.iter().map(|r| settle("monte carlo", r.clone().map(|m| m.mean))).collect()));
                methods.push(("monte_carlo_half", runs.iter().map(|r| settle("monte carlo", r.clone().map(|m| m.half_loss))).collect()));
            }
            (Table::new(&["gammaB0_MHz", "method", "epsilon_dec"]), coords)
        }
        Figure::Fig3b => {
            let coords = plane(&shift_axis(points), &shift_axis(points));
            let shifted = |x: f64, y: f64| StaticFields {
                shift_b: x,
                shift_e: y,
                ..cfg.fields
            };
            methods.push(("closed_form", cells(&coords, |x, y| epsilon_sys(&shifted(x, y)))));
            if numeric {
                methods.push(("unexpanded", cells(&coords, |x, y| epsilon_sys_exact(&c, &shifted(x, y)))));
            }
            (Table::new(&["shiftB", "shiftE", "method", "epsilon_sys"]), coords)
        }
        Figure::Fig4 => {
            let coords = plane(&b_axis(points), &e_axis(points));
            methods.push(("closed_form", cells(&coords, |b, e| Ok(t2star_static(&c, &with_fields(cfg, b, e))? / 1000.0))));
            if numeric {
                let runs: Vec<f64> = coords
                    .iter()
                    .map(|&(b, e)| {
                        let fit = static_coherence(&c, &with_fields(cfg, b, e), &cfg.noise, MC_COHERENCE_POINTS);
                        settle("monte carlo", fit.map(|f| f.fitted_t2star / 1000.0))
                    })
                    .collect();
                methods.push(("monte_carlo", runs));
            }
            (Table::new(&["gammaB0_MHz", "dE0_MHz", "method", "t2star_ms"]), coords)
        }
    };
    let one_axis = which == Figure::Fig3a;
    for (i, &(x, y)) in coords.iter().enumerate() {
        for (name, values) in &methods {
            let mut row = vec![num(x)];
            if !one_axis {
                row.push(num(y));
            }
            row.push(name.to_string());
            row.push(num(values[i]));
            table.rows.push(row);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    /// `key=min:max:steps`.
    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = || CliError::config(format!("axis `{text}` is not `key=min:max:steps`"));
        let (key, range) = text.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [min, max, steps] = parts[..] else {
            return Err(bad());
        };
        let min: f64 = min.trim().parse().map_err(|_| bad())?;
        let max: f64 = max.trim().parse().map_err(|_| bad())?;
        let steps: usize = steps.trim().parse().map_err(|_| bad())?;
        if !(min.is_finite() && max.is_finite()) {
            return Err(bad());
        }
        if steps < 2 {
            return Err(CliError::config(format!("axis `{key}` needs at least 2 steps")));
        }
        let key = key.trim().to_string();
        RunConfig::default()
            .set(&key, &min.to_string())
            .map_err(CliError::config)?;
        Ok(Self { key, min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        grid(self.min, self.max, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub x: Axis,
    pub y: Option<Axis>,
    pub quantity: Quantity,
}

impl SweepSpec {
    pub fn parse(quantity: Quantity, x: &str, y: Option<&str>) -> CliResult<Self> {
        let x = Axis::parse(x)?;
        let y = y.map(Axis::parse).transpose()?;
        if y.as_ref().is_some_and(|y| y.key == x.key) {
            return Err(CliError::config("sweep axes must differ"));
        }
        Ok(Self { x, y, quantity })
    }
}

/// Closed-form `spec.quantity` over the axes; every cell's configuration
/// must validate.
pub fn sweep(cfg: &RunConfig, spec: &SweepSpec) -> CliResult<Table> {
    let xs = spec.x.values();
    let ys = spec.y.as_ref().map(Axis::values);
    let mut configs = Vec::new();
    for &x in &xs {
        for y in ys.as_deref().map_or(vec![None], |ys| ys.iter().copied().map(Some).collect()) {
            let mut cell = cfg.clone();
            cell.set(&spec.x.key, &x.to_string()).map_err(CliError::config)?;
            if let (Some(axis), Some(y)) = (&spec.y, y) {
                cell.set(&axis.key, &y.to_string()).map_err(CliError::config)?;
            }
            cell.validate()?;
            configs.push((x, y, cell));
        }
    }
    let values: Vec<f64> = configs
        .par_iter()
        .map(|(x, y, cell)| settle(&format!("cell ({x}, {y:?})"), spec.quantity.eval(cell)))
        .collect();
    let mut header = vec![spec.x.key.as_str()];
    if let Some(axis) = &spec.y {
        header.push(&axis.key);
    }
    header.push(spec.quantity.column());
    let mut table = Table::new(&header);
    for ((x, y, _), v) in configs.iter().zip(values) {
        let mut row = vec![num(*x)];
        if let Some(y) = y {
            row.push(num(*y));
        }
        row.push(num(v));
        table.rows.push(row);
    }
    Ok(table)
}
