//! Grid scans over `R` or `T`, beat analysis of `R` scans and time averages.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atom::PairSystem;
use crate::closed_form::{energy_adiabatic, energy_far_field, energy_full, EnergyResult, Method};
use crate::contour::evaluate_prescription;
use crate::error::{Error, Result};
use crate::quadrature::{energy_quadrature, gl, QuadratureConfig};
use crate::spectral::{dominant_peaks, spectrum};

/// Energy of one system at one time by any evaluation path.
pub fn evaluate(sys: &PairSystem, t: f64, method: Method) -> Result<EnergyResult> {
    match method {
        Method::ClosedForm => energy_full(sys, t),
        Method::FarField => Ok(energy_far_field(sys, t)?.direct),
        Method::Adiabatic => energy_adiabatic(sys),
        Method::Contour(p) => evaluate_prescription(sys, t, p),
        Method::Quadrature => energy_quadrature(sys, t, &QuadratureConfig::default()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    R,
    T,
}

impl Variable {
    pub fn unit(&self) -> &'static str {
        match self {
            Variable::R => "um",
            Variable::T => "ps",
        }
    }
    /// SI value per display unit.
    pub fn si(&self) -> f64 {
        match self {
            Variable::R => 1e-6,
            Variable::T => 1e-12,
        }
    }
}

/// Linear grid `min:max:count`, in display units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected a number or min:max:count, got `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let g = match parts.as_slice() {
            [v] => {
                let v: f64 = v.trim().parse().map_err(|_| bad())?;
                Grid { min: v, max: v, count: 1 }
            }
            [a, b, n] => Grid {
                min: a.trim().parse().map_err(|_| bad())?,
                max: b.trim().parse().map_err(|_| bad())?,
                count: n.trim().parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || self.count == 0 {
            return Err(Error::InvalidArgument("grid needs finite bounds and count ≥ 1".into()));
        }
        if self.count == 1 && self.min != self.max {
            return Err(Error::InvalidArgument("a one-point grid needs min = max".into()));
        }
        if self.count > 1 && !(self.max > self.min) {
            return Err(Error::InvalidArgument("grid needs max > min".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyUnit {
    #[default]
    RadPerSecond,
    Scaled,
    Joule,
}

impl EnergyUnit {
    pub fn label(&self) -> &'static str {
        match self {
            EnergyUnit::RadPerSecond => "rad/s",
            EnergyUnit::Scaled => "W*R^6/U0",
            EnergyUnit::Joule => "J",
        }
    }
    /// `scaled` is `R⁶/U₀` of the row's system.
    fn pick(&self, e: &EnergyResult, per_line: Option<usize>, scaled: f64) -> f64 {
        let v = match per_line {
            Some(i) => e.per_line[i],
            None => e.value,
        };
        match self {
            EnergyUnit::RadPerSecond => v / crate::units::HBAR,
            EnergyUnit::Scaled => v * scaled,
            EnergyUnit::Joule => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub variable: Variable,
    /// Display units of `variable`.
    pub grid: Grid,
    /// The other variable, display units (µm for R, ps for T).
    pub fixed: f64,
    pub methods: Vec<Method>,
    pub per_line: bool,
    pub unit: EnergyUnit,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub row: usize,
    pub column: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub id: String,
    pub system_hash: String,
    pub variable: Variable,
    pub variable_unit: String,
    pub fixed_name: String,
    pub fixed_value: f64,
    pub fixed_unit: String,
    pub energy_unit: String,
    /// Largest carrier wavenumber `max(k_A, k_B)`, m⁻¹.
    pub k_max: f64,
    /// Set only on request, so that repeated scans are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub meta: DatasetMeta,
    /// Grid in display units.
    pub grid: Vec<f64>,
    pub columns: Vec<Column>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Worker count: `VDW_THREADS` if set, else the available cores.
pub fn thread_count() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("VDW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => avail,
    }
}

pub fn scan(sys: &PairSystem, spec: &ScanSpec) -> Result<Dataset> {
    spec.grid.validate()?;
    if spec.methods.is_empty() {
        return Err(Error::InvalidArgument("scan needs at least one method".into()));
    }
    let grid = spec.grid.values();
    let nl = sys.atom_b_lines.len();
    let row = |x: f64| -> (f64, Vec<std::result::Result<EnergyResult, Error>>) {
        let (r, t) = match spec.variable {
            Variable::R => (x * 1e-6, spec.fixed * 1e-12),
            Variable::T => (spec.fixed * 1e-6, x * 1e-12),
        };
        let s = match sys.with_distance(r) {
            Ok(s) => s,
            Err(e) => return (0.0, spec.methods.iter().map(|_| Err(e.clone())).collect()),
        };
        (r.powi(6) / s.u0(), spec.methods.iter().map(|&m| evaluate(&s, t, m)).collect())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let rows: Vec<_> = pool.install(|| grid.par_iter().map(|&x| row(x)).collect());

    let mut columns = Vec::new();
    let mut diagnostics = Vec::new();
    for (mi, m) in spec.methods.iter().enumerate() {
        let mut names = vec![(m.to_string(), None)];
        if spec.per_line {
            names.extend((0..nl).map(|i| (format!("{m}[line{i}]"), Some(i))));
        }
        for (name, line) in names {
            let mut values = Vec::with_capacity(grid.len());
            for (ri, (scaled, r)) in rows.iter().enumerate() {
                match &r[mi] {
                    Ok(e) => values.push(Some(spec.unit.pick(e, line, *scaled))),
                    Err(err) => {
                        values.push(None);
                        if line.is_none() {
                            diagnostics.push(Diagnostic { row: ri, column: name.clone(), message: err.to_string() });
                        }
                    }
                }
            }
            columns.push(Column { name, values });
        }
    }
    let (fixed_name, fixed_unit) = match spec.variable {
        Variable::R => ("T", "ps"),
        Variable::T => ("R", "um"),
    };
    let k_max = sys.atom_b_lines.iter().map(|b| b.k).fold(sys.atom_a.k, f64::max);
    Ok(Dataset {
        meta: DatasetMeta {
            id: spec.id.clone(),
            system_hash: sys.hash(),
            variable: spec.variable,
            variable_unit: spec.variable.unit().into(),
            fixed_name: fixed_name.into(),
            fixed_value: spec.fixed,
            fixed_unit: fixed_unit.into(),
            energy_unit: spec.unit.label().into(),
            k_max,
            timestamp: None,
        },
        grid,
        columns,
        diagnostics,
    })
}

impl Dataset {
    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column `{name}`")))
    }

    /// CSV with a header row carrying units. Floats use the shortest
    /// representation that round-trips; missing cells are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{} [{}]",
            match self.meta.variable {
                Variable::R => "R",
                Variable::T => "T",
            },
            self.meta.variable_unit
        );
        for c in &self.columns {
            let _ = write!(out, ",{} [{}]", c.name, self.meta.energy_unit);
        }
        out.push('\n');
        for (i, x) in self.grid.iter().enumerate() {
            let _ = write!(out, "{x:e}");
            for c in &self.columns {
                match c.values[i] {
                    Some(v) => {
                        let _ = write!(out, ",{v:e}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatResult {
    /// Carrier period, m.
    pub short_period: f64,
    /// Envelope node spacing, m.
    pub long_period: f64,
    /// The two spectral peaks, cycles per metre.
    pub peaks: [f64; 2],
}

/// Carrier and envelope periods of an `R` scan from the two strongest
/// spatial frequencies of `R²·W`.
pub fn beat_analysis(ds: &Dataset, column: &str) -> Result<BeatResult> {
    if ds.meta.variable != Variable::R {
        return Err(Error::InvalidArgument("beat analysis needs an R scan".into()));
    }
    let col = ds.column(column)?;
    let n = ds.grid.len();
    if n < 16 {
        return Err(Error::InsufficientResolution(format!("{n} points")));
    }
    let dx = (ds.grid[n - 1] - ds.grid[0]) / (n - 1) as f64 * 1e-6;
    if ds.meta.k_max > 0.0 && dx > std::f64::consts::PI / (8.0 * ds.meta.k_max) {
        return Err(Error::InsufficientResolution(format!(
            "step {:.3e} m above an eighth of the carrier period {:.3e} m",
            dx,
            std::f64::consts::PI / ds.meta.k_max
        )));
    }
    let mut y = Vec::with_capacity(n);
    for (i, v) in col.values.iter().enumerate() {
        let v = v.ok_or_else(|| Error::InsufficientResolution(format!("missing value in row {i}")))?;
        let r = ds.grid[i] * 1e-6;
        y.push(v * r * r);
    }
    let spec = spectrum(&y, dx, (1 << 20).max(4 * n));
    let p = dominant_peaks(&spec, 2);
    if p.len() < 2 {
        return Err(Error::InsufficientResolution("fewer than two spectral peaks".into()));
    }
    let (f1, f2) = (p[0].freq, p[1].freq);
    let short_period = 2.0 / (f1 + f2);
    if short_period < 8.0 * dx {
        return Err(Error::InsufficientResolution(format!("carrier period {short_period:.3e} m under 8 samples")));
    }
    Ok(BeatResult { short_period, long_period: 1.0 / (f1 - f2).abs(), peaks: [f1, f2] })
}

/// Uniform mean of the energy over `[start, start + window]` (seconds) at
/// separation `r`. Gauss–Legendre panels of at most a sixth of the shortest
/// detuning period.
pub fn time_average(sys: &PairSystem, r: f64, start: f64, window: f64, method: Method) -> Result<EnergyResult> {
    if !(window > 0.0) || !(start >= 0.0) || !window.is_finite() {
        return Err(Error::InvalidArgument("window must be positive and start non-negative".into()));
    }
    let s = sys.with_distance(r)?;
    if method == Method::Adiabatic {
        return energy_adiabatic(&s);
    }
    let d_max = s.detunings.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let period = 2.0 * std::f64::consts::PI / d_max;
    // panel edges include the front so that the step in the integrand sits on one
    let front = 2.0 * r / crate::units::C;
    let mut edges = vec![start];
    if front > start && front < start + window {
        edges.push(front);
    }
    edges.push(start + window);
    let (x, w) = gl::rule(20);
    let mut acc = vec![0.0; s.atom_b_lines.len()];
    for e in edges.windows(2) {
        let m = (((e[1] - e[0]) / (period / 6.0)).ceil() as usize).max(1);
        let h = (e[1] - e[0]) / m as f64;
        for k in 0..m {
            let a = e[0] + h * k as f64;
            for (xi, wi) in x.iter().zip(&w) {
                let t = a + 0.5 * h * (1.0 + xi);
                let v = evaluate(&s, t, method)?;
                for (acc_i, p) in acc.iter_mut().zip(&v.per_line) {
                    *acc_i += 0.5 * h * wi * p;
                }
            }
        }
    }
    let per_line = acc.into_iter().map(|v| v / window).collect();
    Ok(EnergyResult::from_lines(&s, method, Some(start + 0.5 * window), per_line))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::load_system;

    fn fig3() -> PairSystem {
        load_system(include_str!("../../../systems/fig3_rb_k.json")).unwrap()
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(Grid::parse("30").unwrap().values(), vec![30.0]);
        let g = Grid::parse("20:70:6").unwrap();
        assert_eq!(g.values(), vec![20.0, 30.0, 40.0, 50.0, 60.0, 70.0]);
        assert!(Grid::parse("3:1:4").is_err());
        assert!(Grid::parse("1:2").is_err());
    }

    #[test]
    fn single_point_matches_direct_call() {
        let sys = fig3();
        let spec = ScanSpec {
            variable: Variable::R,
            grid: Grid::parse("30").unwrap(),
            fixed: 3.0,
            methods: vec![Method::ClosedForm],
            per_line: false,
            unit: EnergyUnit::Joule,
            id: "one".into(),
        };
        let ds = scan(&sys, &spec).unwrap();
        // same unit conversion as the scan
        let direct = energy_full(&sys.with_distance(30.0 * 1e-6).unwrap(), 3.0 * 1e-12).unwrap().value;
        assert_eq!(ds.columns[0].values, vec![Some(direct)]);
    }

    #[test]
    fn far_field_errors_become_null_cells() {
        let sys = fig3();
        let spec = ScanSpec {
            variable: Variable::R,
            grid: Grid::parse("0.0001:30:3").unwrap(),
            fixed: 3.0,
            methods: vec![Method::FarField, Method::Adiabatic],
            per_line: true,
            unit: EnergyUnit::RadPerSecond,
            id: "ff".into(),
        };
        let ds = scan(&sys, &spec).unwrap();
        assert_eq!(ds.columns.len(), 2 * (1 + 2));
        assert_eq!(ds.columns[0].values[0], None);
        assert!(ds.columns[0].values[2].is_some());
        assert_eq!(ds.diagnostics.len(), 1);
        assert!(ds.to_csv().lines().nth(1).unwrap().contains(",,"));
    }

    #[test]
    fn time_average_before_front_is_zero() {
        let sys = fig3();
        let r = 30e-6;
        let v = time_average(&sys, r, 0.0, 1.5 * r / crate::units::C, Method::ClosedForm).unwrap();
        assert_eq!(v.value, 0.0);
    }
}
