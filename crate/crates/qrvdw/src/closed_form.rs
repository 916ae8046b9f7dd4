//! Closed-form interaction energy, its far-field limit, the time-independent
//! (adiabatic) part and the excitation probability of atom B.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atom::{Channel, PairSystem};
use crate::contour::Prescription;
use crate::error::{Error, Result};
use crate::units::{C, HBAR};

/// Default lower bound on `k_A R` for the far-field evaluator.
pub const FAR_FIELD_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    FarField,
    Adiabatic,
    Contour(Prescription),
    Quadrature,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::ClosedForm => write!(f, "closed-form"),
            Method::FarField => write!(f, "far-field"),
            Method::Adiabatic => write!(f, "adiabatic"),
            Method::Contour(p) => write!(f, "contour:{p}"),
            Method::Quadrature => write!(f, "quadrature"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "closed-form" => Method::ClosedForm,
            "far-field" => Method::FarField,
            "adiabatic" => Method::Adiabatic,
            "quadrature" => Method::Quadrature,
            "causal" => Method::Contour(Prescription::Causal),
            other => match other.strip_prefix("contour:") {
                Some(p) => Method::Contour(p.parse()?),
                None => return Err(Error::InvalidArgument(format!("unknown method `{s}`"))),
            },
        })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    /// Joules.
    pub value: f64,
    /// `W R⁶ / U₀`.
    pub value_scaled: f64,
    /// `W/ħ`, rad/s.
    pub value_rad_s: f64,
    pub method: Method,
    /// `max |Δ|/ω` over B lines.
    pub error_scale: f64,
    /// Separation, m.
    pub r: f64,
    /// Observation time, s (absent for time-independent results).
    pub t: Option<f64>,
    /// Contribution of each B line, joules.
    pub per_line: Vec<f64>,
}

impl EnergyResult {
    pub fn from_lines(sys: &PairSystem, method: Method, t: Option<f64>, per_line: Vec<f64>) -> Self {
        let value: f64 = per_line.iter().sum();
        let r = sys.r();
        Self {
            value,
            value_scaled: value * r.powi(6) / sys.u0(),
            value_rad_s: value / HBAR,
            method,
            error_scale: sys.error_scale(),
            r,
            t,
            per_line,
        }
    }
}

/// `Θ(T − 2R/c)` closed from below: the front itself counts as "before".
pub fn is_before_front(r: f64, t: f64) -> bool {
    t <= 2.0 * r / C
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// Polynomial coefficients of one group of the closed form at `x = kR`:
/// `(cosine coefficient, sine coefficient)`.
fn group(x: f64, ch: &Channel) -> (f64, f64) {
    let s = &ch.s;
    let x2 = x * x;
    let cos_c = s.s_bb - x2 * (s.s_bb + 2.0 * s.s_ab) + x2 * x2 * s.s_aa;
    let sin_c = 2.0 * x * (s.s_bb - x2 * s.s_ab);
    (cos_c, sin_c)
}

/// Time-independent group of one channel, joules.
pub fn adiabatic_line(ch: &Channel) -> f64 {
    let xa = ch.x_a();
    let (ca, sa) = group(xa, ch);
    let (s2, c2) = (2.0 * xa).sin_cos();
    ch.prefactor / ch.r.powi(6) * (ca * c2 + sa * s2)
}

/// Time-dependent group of one channel (entering with a minus sign), joules.
pub fn oscillating_line(ch: &Channel, t: f64) -> f64 {
    let xb = ch.x_b();
    let (cb, sb) = group(xb, ch);
    let (s2, c2) = (2.0 * xb + ch.delta * t).sin_cos();
    -ch.prefactor / ch.r.powi(6) * (cb * c2 + sb * s2)
}

pub fn full_line(ch: &Channel, t: f64) -> f64 {
    if is_before_front(ch.r, t) {
        return 0.0;
    }
    adiabatic_line(ch) + oscillating_line(ch, t)
}

/// Sum of absolute values of every term of the closed form, joules. This is
/// the natural magnitude against which errors of an oscillating energy are
/// measured.
pub fn magnitude_scale(sys: &PairSystem) -> Result<f64> {
    let mut tot = 0.0;
    for ch in sys.channels()? {
        let s = &ch.s;
        let part = |x: f64| {
            let x2 = x * x;
            s.s_bb.abs() * (1.0 + x2 + 2.0 * x) + s.s_ab.abs() * (2.0 * x2 + 2.0 * x2 * x) + s.s_aa.abs() * x2 * x2
        };
        tot += ch.prefactor.abs() / ch.r.powi(6) * (part(ch.x_a()) + part(ch.x_b()));
    }
    Ok(tot)
}

pub fn energy_full(sys: &PairSystem, t: f64) -> Result<EnergyResult> {
    check_time(t)?;
    let per_line = sys.channels()?.iter().map(|ch| full_line(ch, t)).collect();
    Ok(EnergyResult::from_lines(sys, Method::ClosedForm, Some(t), per_line))
}

pub fn energy_adiabatic(sys: &PairSystem) -> Result<EnergyResult> {
    let per_line = sys.channels()?.iter().map(adiabatic_line).collect();
    Ok(EnergyResult::from_lines(sys, Method::Adiabatic, None, per_line))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldResult {
    /// `(U/R²) α:α [k_A⁴ cos 2k_AR − k_B⁴ cos(2k_BR + ΔT)]` summed over lines.
    pub direct: EnergyResult,
    /// `−2(U/R²) α:α k_A⁴ sin[Δ(R/c − T/2)] sin[k_A(R + cT/2) + k_B(R − cT/2)]`,
    /// joules. Uses `k_B⁴ → k_A⁴`.
    pub factorized: f64,
    /// The direct form with `k_B⁴ → k_A⁴`, joules.
    pub direct_equal_amplitude: f64,
}

pub fn energy_far_field(sys: &PairSystem, t: f64) -> Result<FarFieldResult> {
    energy_far_field_with(sys, t, FAR_FIELD_THRESHOLD)
}

pub fn energy_far_field_with(sys: &PairSystem, t: f64, threshold: f64) -> Result<FarFieldResult> {
    check_time(t)?;
    let chans = sys.channels()?;
    for ch in &chans {
        let x = ch.x_a().min(ch.x_b());
        if x < threshold {
            return Err(Error::FarFieldDomain { value: x, threshold });
        }
    }
    let r = sys.r();
    let before = is_before_front(r, t);
    let mut per_line = Vec::with_capacity(chans.len());
    let mut fact = 0.0;
    let mut equal = 0.0;
    for ch in &chans {
        if before {
            per_line.push(0.0);
            continue;
        }
        let u = ch.prefactor * ch.s.s_aa / (r * r);
        let ka4 = ch.k_a.powi(4);
        let kb4 = ch.k_b.powi(4);
        let ca = (2.0 * ch.x_a()).cos();
        let cb = (2.0 * ch.x_b() + ch.delta * t).cos();
        per_line.push(u * (ka4 * ca - kb4 * cb));
        equal += u * ka4 * (ca - cb);
        let ct2 = 0.5 * C * t;
        fact += -2.0 * u * ka4 * (ch.delta * (r / C - 0.5 * t)).sin() * (ch.k_a * (r + ct2) + ch.k_b * (r - ct2)).sin();
    }
    Ok(FarFieldResult {
        direct: EnergyResult::from_lines(sys, Method::FarField, Some(t), per_line),
        factorized: fact,
        direct_equal_amplitude: equal,
    })
}

/// `sin²[Δ(R/c − T)/2]` for `T > R/c`, zero before the photon arrives.
pub fn excitation_probability(sys: &PairSystem, t: f64) -> Result<f64> {
    check_time(t)?;
    if sys.atom_b_lines.len() != 1 {
        return Err(Error::MultiLine(sys.atom_b_lines.len()));
    }
    let r = sys.r();
    if t <= r / C {
        return Ok(0.0);
    }
    let s = (0.5 * sys.detunings[0] * (r / C - t)).sin();
    Ok(s * s)
}
