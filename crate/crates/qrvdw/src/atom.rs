//! Atomic transitions, the two-atom system, its JSON config and the
//! quasi-resonant regime check.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{make_tensors, DipoleContractions, GeometryTensors, SeparationGeometry, Vec3};
use crate::units;

/// Ratio below which `|Δ| ≪ ω` is considered satisfied.
pub const MUCH_LESS_THAN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    pub nu_tilde_cm: f64,
    /// Angular wavenumber, m⁻¹.
    pub k: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Dipole matrix element magnitude, C·m.
    pub mu: f64,
    /// `None` means orientation-averaged.
    pub dir: Option<Vec3>,
    /// Linewidth, rad/s.
    pub gamma: f64,
    pub label: Option<String>,
}

impl TransitionLine {
    pub fn new(nu_tilde_cm: f64, mu_debye: f64, gamma_hz: f64, dir: Option<Vec3>) -> Result<Self> {
        let field = |f: &str, msg: String| Error::Config { field: f.into(), msg };
        if !(nu_tilde_cm > 0.0) || !nu_tilde_cm.is_finite() {
            return Err(field("nu_tilde_cm", format!("must be positive, got {nu_tilde_cm}")));
        }
        if !(mu_debye > 0.0) || !mu_debye.is_finite() {
            return Err(field("mu_debye", format!("must be positive, got {mu_debye}")));
        }
        if !(gamma_hz >= 0.0) || !gamma_hz.is_finite() {
            return Err(field("gamma_hz", format!("must be non-negative, got {gamma_hz}")));
        }
        let dir = match dir {
            Some(d) => Some(crate::geometry::normalize(&d).map_err(|_| field("dir", "zero vector".into()))?),
            None => None,
        };
        let k = units::angular_wavenumber_from_cm(nu_tilde_cm);
        Ok(Self {
            nu_tilde_cm,
            k,
            omega: units::C * k,
            mu: units::debye_to_si(mu_debye),
            dir,
            gamma: units::gamma_from_hz(gamma_hz),
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn to_config(&self) -> LineConfig {
        LineConfig {
            label: self.label.clone(),
            nu_tilde_cm: self.nu_tilde_cm,
            mu_debye: self.mu / units::DEBYE,
            gamma_hz: self.gamma / (2.0 * std::f64::consts::PI),
            dir: self.dir,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSystem {
    pub atom_a: TransitionLine,
    pub atom_b_lines: Vec<TransitionLine>,
    pub geom: SeparationGeometry,
    pub tensors: GeometryTensors,
    /// `Δ_AB = ω_A − ω_B` per B line, rad/s.
    pub detunings: Vec<f64>,
}

/// Everything an evaluator needs about one A–B channel at the current R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub k_a: f64,
    pub k_b: f64,
    /// `Δ_AB`, rad/s (signed).
    pub delta: f64,
    /// `1/[(4πε₀)²ħΔ_AB]` (signed).
    pub prefactor: f64,
    pub s: DipoleContractions,
    pub r: f64,
}

impl Channel {
    pub fn x_a(&self) -> f64 {
        self.k_a * self.r
    }
    pub fn x_b(&self) -> f64 {
        self.k_b * self.r
    }
    /// `δ = Δ_AB/c = k_A − k_B`.
    pub fn delta_k(&self) -> f64 {
        self.k_a - self.k_b
    }
}

impl PairSystem {
    pub fn new(atom_a: TransitionLine, atom_b_lines: Vec<TransitionLine>, geom: SeparationGeometry) -> Result<Self> {
        if atom_b_lines.is_empty() {
            return Err(Error::InvalidSystem("atom B needs at least one line".into()));
        }
        let tensors = make_tensors(&geom)?;
        let mut detunings = Vec::with_capacity(atom_b_lines.len());
        for (i, b) in atom_b_lines.iter().enumerate() {
            let d = atom_a.omega - b.omega;
            if d == 0.0 || atom_a.nu_tilde_cm == b.nu_tilde_cm {
                return Err(Error::InvalidSystem(format!("B line {i} is resonant with A (zero detuning)")));
            }
            detunings.push(d);
        }
        Ok(Self { atom_a, atom_b_lines, geom, tensors, detunings })
    }

    pub fn r(&self) -> f64 {
        self.geom.r
    }

    pub fn with_distance(&self, r: f64) -> Result<Self> {
        let geom = self.geom.with_distance(r)?;
        Ok(Self { geom, ..self.clone() })
    }

    /// Fixed orientation when both A and the line carry a direction, else
    /// the isotropic average.
    pub fn contractions(&self, line: usize) -> Result<DipoleContractions> {
        let b = &self.atom_b_lines[line];
        match (&self.atom_a.dir, &b.dir) {
            (Some(da), Some(db)) => DipoleContractions::fixed(self.atom_a.mu, da, b.mu, db, &self.tensors),
            _ => Ok(DipoleContractions::isotropic(self.atom_a.mu, b.mu)),
        }
    }

    pub fn channel(&self, line: usize) -> Result<Channel> {
        let b = &self.atom_b_lines[line];
        let delta = self.detunings[line];
        Ok(Channel {
            k_a: self.atom_a.k,
            k_b: b.k,
            delta,
            prefactor: units::coulomb_sq() / (units::HBAR * delta),
            s: self.contractions(line)?,
            r: self.geom.r,
        })
    }

    pub fn channels(&self) -> Result<Vec<Channel>> {
        (0..self.atom_b_lines.len()).map(|i| self.channel(i)).collect()
    }

    /// `U₀ = |μ_A|²|μ_B|²/[(4πε₀)²ħ|Δ_AB|]` of the first B line.
    pub fn u0(&self) -> f64 {
        let b = &self.atom_b_lines[0];
        let m = self.atom_a.mu * self.atom_a.mu * b.mu * b.mu;
        m * units::coulomb_sq() / (units::HBAR * self.detunings[0].abs())
    }

    /// `max |Δ|/ω` over lines, the relative size of the neglected terms.
    pub fn error_scale(&self) -> f64 {
        self.atom_b_lines
            .iter()
            .zip(&self.detunings)
            .map(|(b, d)| d.abs() / self.atom_a.omega.min(b.omega))
            .fold(0.0, f64::max)
    }

    pub fn to_config(&self) -> SystemConfig {
        SystemConfig {
            atoms: AtomsConfig {
                a: self.atom_a.to_config(),
                b: BConfig { lines: self.atom_b_lines.iter().map(|l| l.to_config()).collect() },
            },
            geometry: GeometryConfig { r_um: self.geom.r * 1e6, direction: self.geom.r_hat },
            note: None,
            scan: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_config()).expect("config serializes")
    }

    /// Hex SHA-256 of the compact config with every number rounded to 12
    /// significant digits, so unit round trips do not change it.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self.to_config()).expect("config serializes");
        round_numbers(&mut v);
        let text = serde_json::to_string(&v).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn round_numbers(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
                // -0 and 0 hash alike
                *v = serde_json::json!(if r == 0.0 { 0.0 } else { r });
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub nu_tilde_cm: f64,
    pub mu_debye: f64,
    #[serde(default)]
    pub gamma_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BConfig {
    pub lines: Vec<LineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomsConfig {
    #[serde(rename = "A")]
    pub a: LineConfig,
    #[serde(rename = "B")]
    pub b: BConfig,
}

fn default_direction() -> Vec3 {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(rename = "R_um")]
    pub r_um: f64,
    #[serde(default = "default_direction")]
    pub direction: Vec3,
}

/// Optional default scan carried by a system file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanDefaults {
    #[serde(rename = "R_um")]
    pub r_um: String,
    #[serde(rename = "T_ps")]
    pub t_ps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub atoms: AtomsConfig,
    pub geometry: GeometryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanDefaults>,
}

impl SystemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            field: format!("line {} column {}", e.line(), e.column()),
            msg: e.to_string(),
        })
    }

    pub fn build(&self) -> Result<PairSystem> {
        let line = |c: &LineConfig, name: String| -> Result<TransitionLine> {
            let l = TransitionLine::new(c.nu_tilde_cm, c.mu_debye, c.gamma_hz, c.dir).map_err(|e| match e {
                Error::Config { field, msg } => Error::Config { field: format!("{name}.{field}"), msg },
                other => other,
            })?;
            Ok(match &c.label {
                Some(s) => l.with_label(s.clone()),
                None => l,
            })
        };
        let a = line(&self.atoms.a, "atoms.A".into())?;
        let b = self
            .atoms
            .b
            .lines
            .iter()
            .enumerate()
            .map(|(i, c)| line(c, format!("atoms.B.lines[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        if b.is_empty() {
            return Err(Error::Config { field: "atoms.B.lines".into(), msg: "at least one line required".into() });
        }
        let r_um = self.geometry.r_um;
        if !(r_um > 0.0) || !r_um.is_finite() {
            return Err(Error::Config { field: "geometry.R_um".into(), msg: format!("must be positive, got {r_um}") });
        }
        let geom = SeparationGeometry::along(units::um_to_m(r_um), self.geometry.direction).map_err(|_| {
            Error::Config { field: "geometry.direction".into(), msg: "must be a nonzero vector".into() }
        })?;
        PairSystem::new(a, b, geom)
    }
}

pub fn load_system(config_text: &str) -> Result<PairSystem> {
    SystemConfig::parse(config_text)?.build()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRegime {
    pub detuning: f64,
    /// `|Δ|/ω̄` with `ω̄ = (ω_A + ω_B)/2`.
    pub delta_over_omega: f64,
    pub gamma_a_over_delta: f64,
    pub gamma_b_over_delta: f64,
    pub quasi_resonant: bool,
    pub linewidth_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub lines: Vec<LineRegime>,
    pub quasi_resonant: bool,
    pub linewidth_ok: bool,
    /// `2π/Γ_A` in seconds; `None` when `Γ_A = 0`.
    pub observation_window: Option<f64>,
}

pub fn validate_regime(sys: &PairSystem) -> RegimeReport {
    let a = &sys.atom_a;
    let lines: Vec<LineRegime> = sys
        .atom_b_lines
        .iter()
        .zip(&sys.detunings)
        .map(|(b, &d)| {
            let ad = d.abs();
            let ratio = ad / (0.5 * (a.omega + b.omega));
            LineRegime {
                detuning: d,
                delta_over_omega: ratio,
                gamma_a_over_delta: a.gamma / ad,
                gamma_b_over_delta: b.gamma / ad,
                quasi_resonant: a.gamma < ad && b.gamma < ad && ratio < MUCH_LESS_THAN,
                linewidth_ok: ad > 0.5 * (a.gamma + b.gamma),
            }
        })
        .collect();
    RegimeReport {
        quasi_resonant: lines.iter().all(|l| l.quasi_resonant),
        linewidth_ok: lines.iter().all(|l| l.linewidth_ok),
        observation_window: (a.gamma > 0.0).then(|| 2.0 * std::f64::consts::PI / a.gamma),
        lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = include_str!("../../../systems/fig3_rb_k.json");

    #[test]
    fn fig3_file_loads() {
        let sys = load_system(FIG3).unwrap();
        assert_eq!(sys.atom_b_lines.len(), 2);
        let rep = validate_regime(&sys);
        assert!(rep.quasi_resonant);
        assert!((rep.lines[0].delta_over_omega - 0.0318).abs() < 5e-4);
        assert!((rep.lines[1].delta_over_omega - 0.0364).abs() < 5e-4);
    }

    #[test]
    fn omega_unit_conversion() {
        let l = TransitionLine::new(12578.95, 1.0, 0.0, None).unwrap();
        let want = 2.0 * std::f64::consts::PI * units::C * 1_257_895.0;
        assert!((l.omega - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn missing_dir_is_isotropic() {
        let sys = load_system(FIG3).unwrap();
        assert_eq!(sys.contractions(0).unwrap().mode, crate::geometry::ContractionMode::IsotropicAverage);
    }

    #[test]
    fn resonant_pair_rejected() {
        let a = TransitionLine::new(100.0, 1.0, 0.0, None).unwrap();
        let b = TransitionLine::new(100.0, 1.0, 0.0, None).unwrap();
        let g = SeparationGeometry::new([0.0, 0.0, 1e-6]).unwrap();
        assert!(matches!(PairSystem::new(a, vec![b], g), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn broad_lines_flagged() {
        let a = TransitionLine::new(1000.0, 1.0, 0.0, None).unwrap();
        let b = TransitionLine::new(990.0, 1.0, 0.0, None).unwrap();
        let g = SeparationGeometry::new([0.0, 0.0, 1e-6]).unwrap();
        let mut sys = PairSystem::new(a, vec![b], g).unwrap();
        let d = sys.detunings[0].abs();
        sys.atom_a.gamma = 2.0 * d;
        sys.atom_b_lines[0].gamma = 2.0 * d;
        let rep = validate_regime(&sys);
        assert!(!rep.linewidth_ok);
        assert!(!rep.quasi_resonant);
    }

    #[test]
    fn bad_config_reports_location() {
        let err = load_system("{\n  \"atoms\": 3\n}").unwrap_err();
        match err {
            Error::Config { field, .. } => assert!(field.starts_with("line 2")),
            e => panic!("unexpected {e:?}"),
        }
        let text = FIG3.replace("\"mu_debye\": 1.0", "\"mu_debye\": -1.0");
        let err = load_system(&text).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "atoms.A.mu_debye"), "{err:?}");
    }
}
