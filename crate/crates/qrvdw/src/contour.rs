//! Residue evaluation of the frequency integrals for each pole-shift
//! prescription.
//!
//! Integrals are taken in units where `R = 1`. Every integrand is a sum of
//! `e^{iLu} P(u)/Π(u − p_j)` pieces; each piece is closed in the half-plane
//! selected by the sign of `L` and the partial-fraction coefficients of its
//! poles are collected with weight `iπ sgn L` (pole on the axis), `2πi`
//! (shifted into the closing half-plane) or zero (shifted away from it).
//! Polynomial remainders integrate to zero for `L ≠ 0`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atom::{Channel, PairSystem};
use crate::closed_form::{self, is_before_front, EnergyResult, Method};
use crate::error::{Error, Result};
use crate::expo::{cos_shift, kernel, ExpPoly, ExpTerm, I};
use crate::geometry::Tensor;
use crate::units::C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prescription {
    Causal,
    Adiabatic,
    StationaryPv,
    Pt1995,
}

impl Prescription {
    pub const ALL: [Prescription; 4] =
        [Prescription::Causal, Prescription::Adiabatic, Prescription::StationaryPv, Prescription::Pt1995];

    pub fn includes_time_terms(&self) -> bool {
        matches!(self, Prescription::Causal)
    }
}

impl fmt::Display for Prescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prescription::Causal => "causal",
            Prescription::Adiabatic => "adiabatic",
            Prescription::StationaryPv => "stationary-pv",
            Prescription::Pt1995 => "pt1995",
        })
    }
}

impl std::str::FromStr for Prescription {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "causal" => Prescription::Causal,
            "adiabatic" => Prescription::Adiabatic,
            "stationary-pv" => Prescription::StationaryPv,
            "pt1995" => Prescription::Pt1995,
            _ => return Err(Error::InvalidArgument(format!("unknown prescription `{s}`"))),
        })
    }
}

/// Where a real pole sits relative to the integration line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shift {
    /// Principal value, half residue.
    OnAxis,
    /// `+iη`, `η → 0⁺`.
    Above,
    /// `−iη`, `η → 0⁺`.
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// Real part of the location. Wavenumber in m⁻¹ inside a [`PoleSpec`],
    /// dimensionless `kR` inside the residue primitives.
    pub location: f64,
    /// Imaginary part for finite shifts; zero in the `η → 0⁺` limit.
    pub imag: f64,
    pub shift: Shift,
}

impl Pole {
    pub fn on_axis(location: f64) -> Self {
        Self { location, imag: 0.0, shift: Shift::OnAxis }
    }
    pub fn shifted(location: f64, shift: Shift) -> Self {
        Self { location, imag: 0.0, shift }
    }
    fn z(&self) -> C64 {
        C64::new(self.location, self.imag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermId {
    /// `1/[(k − k_A)(k' − k_A)]`
    AA,
    /// `cos(ΔT)/[(k − k_B)(k' − k_B)]`
    BBCos,
    /// `cos[(ω − ω_A)T]/[(k − k_A)(k − k_B)(k' − k)]`
    MixedK,
    /// `cos[(ω' − ω_A)T]/[(k' − k_A)(k' − k_B)(k' − k)]`
    MixedKPrime,
}

impl TermId {
    pub const ALL: [TermId; 4] = [TermId::AA, TermId::BBCos, TermId::MixedK, TermId::MixedKPrime];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeFactor {
    None,
    CosDeltaT,
    CosOmegaMinusOmegaA,
    CosOmegaPrimeMinusOmegaA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    Separable,
    /// Through the `1/(k' − k)` factor.
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSpec {
    pub term_id: TermId,
    pub poles_k: Vec<Pole>,
    pub poles_k1: Vec<Pole>,
    pub time_factor: TimeFactor,
    pub coupling: Coupling,
}

impl PoleSpec {
    /// The pole structure of one term under a prescription. Terms that a
    /// prescription drops are rejected.
    pub fn new(term_id: TermId, prescription: Prescription, ch: &Channel) -> Result<Self> {
        let (ka, kb) = (ch.k_a, ch.k_b);
        if term_id != TermId::AA && !prescription.includes_time_terms() {
            return Err(Error::InvalidArgument(format!("{prescription} keeps only the AA term")));
        }
        let spec = match term_id {
            TermId::AA => {
                let (sk, sk1) = match prescription {
                    Prescription::Causal | Prescription::StationaryPv => (Shift::OnAxis, Shift::OnAxis),
                    Prescription::Adiabatic => (Shift::Above, Shift::Above),
                    Prescription::Pt1995 => (Shift::Above, Shift::Below),
                };
                PoleSpec {
                    term_id,
                    poles_k: vec![Pole::shifted(ka, sk)],
                    poles_k1: vec![Pole::shifted(ka, sk1)],
                    time_factor: TimeFactor::None,
                    coupling: Coupling::Separable,
                }
            }
            TermId::BBCos => PoleSpec {
                term_id,
                poles_k: vec![Pole::on_axis(kb)],
                poles_k1: vec![Pole::on_axis(kb)],
                time_factor: TimeFactor::CosDeltaT,
                coupling: Coupling::Separable,
            },
            TermId::MixedK => PoleSpec {
                term_id,
                poles_k: vec![Pole::on_axis(ka), Pole::on_axis(kb)],
                poles_k1: Vec::new(),
                time_factor: TimeFactor::CosOmegaMinusOmegaA,
                coupling: Coupling::Coupled,
            },
            TermId::MixedKPrime => PoleSpec {
                term_id,
                poles_k: Vec::new(),
                poles_k1: vec![Pole::on_axis(ka), Pole::on_axis(kb)],
                time_factor: TimeFactor::CosOmegaPrimeMinusOmegaA,
                coupling: Coupling::Coupled,
            },
        };
        Ok(spec)
    }
}

fn sign(l: f64) -> Result<f64> {
    if l > 0.0 {
        Ok(1.0)
    } else if l < 0.0 {
        Ok(-1.0)
    } else {
        Err(Error::ContourAmbiguity(l))
    }
}

/// `∫ e^{iLu} P(u)/Π(u − p_j) du` along the real line with each pole
/// treated according to its shift. Poles must be distinct.
pub fn residue_integral(term: &ExpTerm, poles: &[Pole]) -> Result<C64> {
    let s = sign(term.l)?;
    let mut tot = C64::new(0.0, 0.0);
    for (j, p) in poles.iter().enumerate() {
        let weight = match p.shift {
            Shift::OnAxis => I * PI * s,
            Shift::Above if s > 0.0 => I * 2.0 * PI,
            Shift::Below if s < 0.0 => -I * 2.0 * PI,
            _ => continue,
        };
        let z = p.z();
        let mut den = C64::new(1.0, 0.0);
        for (m, q) in poles.iter().enumerate() {
            if m != j {
                den *= z - q.z();
            }
        }
        tot += weight * term.eval(z) / den;
    }
    Ok(tot)
}

pub fn residue_integral_poly(f: &ExpPoly, poles: &[Pole]) -> Result<C64> {
    f.terms.iter().map(|t| residue_integral(t, poles)).sum()
}

fn on_axis(ps: &[f64]) -> Vec<Pole> {
    ps.iter().map(|&p| Pole::on_axis(p)).collect()
}

/// `H[φ](u) = P.V.∫ φ(u')/(u' − u) du'` for an exponential polynomial,
/// which is again an exponential polynomial: `iπ sgn(L) e^{iLu} P(u)`.
pub fn hilbert(phi: &ExpPoly) -> Result<ExpPoly> {
    let terms = phi
        .terms
        .iter()
        .map(|t| Ok(ExpTerm { l: t.l, poly: t.poly.scale(I * PI * sign(t.l)?) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpPoly { terms })
}

/// Which variable the coupled terms integrate first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    #[default]
    KPrimeFirst,
    KFirst,
}

/// Dimensionless integrals of the coupled terms for one tensor pair, without
/// the `δ` factor: `(mixed-k, mixed-k')`.
pub fn coupled_terms(x: Tensor, y: Tensor, xa: f64, xb: f64, tau: f64, order: Order) -> Result<(C64, C64)> {
    let kx = kernel(x);
    let ky = kernel(y);
    let cs = cos_shift(tau, xa);
    let pa = on_axis(&[xa]);
    let pb = on_axis(&[xb]);
    let pab = on_axis(&[xa, xb]);
    match order {
        Order::KPrimeFirst => {
            let t3 = -residue_integral_poly(&kx.mul(&cs).mul(&hilbert(&ky)?), &pab)?;
            let g = ky.mul(&cs);
            let t4 = -residue_integral_poly(&g, &pa)? * residue_integral_poly(&kx, &pa)? / (xa - xb)
                - residue_integral_poly(&g, &pb)? * residue_integral_poly(&kx, &pb)? / (xb - xa)
                + residue_integral_poly(&kx.mul(&hilbert(&g)?), &pab)?;
            Ok((t3, t4))
        }
        Order::KFirst => {
            let h = kx.mul(&cs);
            let t3 = -residue_integral_poly(&h, &pa)? * residue_integral_poly(&ky, &pa)? / (xa - xb)
                - residue_integral_poly(&h, &pb)? * residue_integral_poly(&ky, &pb)? / (xb - xa)
                + residue_integral_poly(&ky.mul(&hilbert(&h)?), &pab)?;
            let t4 = -residue_integral_poly(&ky.mul(&cs).mul(&hilbert(&kx)?), &pab)?;
            Ok((t3, t4))
        }
    }
}

/// Contribution of one term of the pole structure for one channel, joules.
/// The physical energy is the real part of the sum over terms.
pub fn evaluate_term(ch: &Channel, t: f64, spec: &PoleSpec, order: Order) -> Result<C64> {
    let r = ch.r;
    let scale = ch.prefactor / (PI * PI * r.powi(6));
    let dimless = |ps: &[Pole]| -> Vec<Pole> {
        ps.iter().map(|p| Pole { location: p.location * r, imag: p.imag * r, shift: p.shift }).collect()
    };
    let mut tot = C64::new(0.0, 0.0);
    match spec.coupling {
        Coupling::Separable => {
            let pk = dimless(&spec.poles_k);
            let pk1 = dimless(&spec.poles_k1);
            for x in Tensor::BOTH {
                let ix = residue_integral_poly(&kernel(x), &pk)?;
                for y in Tensor::BOTH {
                    let iy = residue_integral_poly(&kernel(y), &pk1)?;
                    tot += ch.s.get(x, y) * ix * iy;
                }
            }
            if spec.time_factor == TimeFactor::CosDeltaT {
                tot *= -(ch.delta * t).cos();
            }
        }
        Coupling::Coupled => {
            if is_before_front(r, t) {
                return Ok(C64::new(0.0, 0.0));
            }
            let tau = C * t / r;
            for x in Tensor::BOTH {
                for y in Tensor::BOTH {
                    let (t3, t4) = coupled_terms(x, y, ch.x_a(), ch.x_b(), tau, order)?;
                    let v = if spec.term_id == TermId::MixedK { t3 } else { t4 };
                    tot += ch.s.get(x, y) * v;
                }
            }
            tot *= ch.delta_k() * r;
        }
    }
    Ok(tot * scale)
}

/// Which terms of the pole structure enter a causal evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermMask {
    pub aa: bool,
    pub bb_cos: bool,
    pub mixed_k: bool,
    pub mixed_k_prime: bool,
}

impl Default for TermMask {
    fn default() -> Self {
        Self { aa: true, bb_cos: true, mixed_k: true, mixed_k_prime: true }
    }
}

impl TermMask {
    pub fn without_mixed() -> Self {
        Self { mixed_k: false, mixed_k_prime: false, ..Self::default() }
    }
    fn keeps(&self, t: TermId) -> bool {
        match t {
            TermId::AA => self.aa,
            TermId::BBCos => self.bb_cos,
            TermId::MixedK => self.mixed_k,
            TermId::MixedKPrime => self.mixed_k_prime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CausalOptions {
    pub order: Order,
    pub mask: TermMask,
}

pub fn evaluate_causal(sys: &PairSystem, t: f64) -> Result<EnergyResult> {
    evaluate_causal_with(sys, t, CausalOptions::default())
}

pub fn evaluate_causal_with(sys: &PairSystem, t: f64, opts: CausalOptions) -> Result<EnergyResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T must be finite and non-negative, got {t}")));
    }
    let method = Method::Contour(Prescription::Causal);
    if is_before_front(sys.r(), t) {
        return Ok(EnergyResult::from_lines(sys, method, Some(t), vec![0.0; sys.atom_b_lines.len()]));
    }
    let mut per_line = Vec::with_capacity(sys.atom_b_lines.len());
    for ch in sys.channels()? {
        let mut v = C64::new(0.0, 0.0);
        for term in TermId::ALL {
            if opts.mask.keeps(term) {
                let spec = PoleSpec::new(term, Prescription::Causal, &ch)?;
                v += evaluate_term(&ch, t, &spec, opts.order)?;
            }
        }
        per_line.push(v.re);
    }
    Ok(EnergyResult::from_lines(sys, method, Some(t), per_line))
}

/// Energy under any prescription. Only the causal one depends on `T`.
pub fn evaluate_prescription(sys: &PairSystem, t: f64, p: Prescription) -> Result<EnergyResult> {
    if p == Prescription::Causal {
        return evaluate_causal(sys, t);
    }
    let mut per_line = Vec::with_capacity(sys.atom_b_lines.len());
    for ch in sys.channels()? {
        let spec = PoleSpec::new(TermId::AA, p, &ch)?;
        per_line.push(evaluate_term(&ch, t, &spec, Order::default())?.re);
    }
    Ok(EnergyResult::from_lines(sys, Method::Contour(p), None, per_line))
}

/// Adiabatic energy with the poles at finite `k_A + iη/c` (`η` in rad/s).
pub fn adiabatic_finite_eta(sys: &PairSystem, eta: f64) -> Result<f64> {
    let mut tot = 0.0;
    for ch in sys.channels()? {
        let r = ch.r;
        let pole = [Pole { location: ch.x_a(), imag: eta * r / C, shift: Shift::Above }];
        let mut v = C64::new(0.0, 0.0);
        for x in Tensor::BOTH {
            let ix = residue_integral_poly(&kernel(x), &pole)?;
            for y in Tensor::BOTH {
                v += ch.s.get(x, y) * ix * residue_integral_poly(&kernel(y), &pole)?;
            }
        }
        tot += (v * ch.prefactor / (PI * PI * r.powi(6))).re;
    }
    Ok(tot)
}

/// Leading far-field forms `(U/R²) k_A⁴ α:α × {1, cos² k_AR, cos 2k_AR}`
/// for pt1995, stationary-pv and adiabatic, summed over lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldForms {
    pub pt1995: f64,
    pub stationary_pv: f64,
    pub adiabatic: f64,
}

pub fn far_field_forms(sys: &PairSystem) -> Result<FarFieldForms> {
    let mut out = FarFieldForms { pt1995: 0.0, stationary_pv: 0.0, adiabatic: 0.0 };
    for ch in sys.channels()? {
        let u = ch.prefactor * ch.s.s_aa * ch.k_a.powi(4) / (ch.r * ch.r);
        let x = ch.x_a();
        out.pt1995 += u;
        out.stationary_pv += u * x.cos().powi(2);
        out.adiabatic += u * (2.0 * x).cos();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub r: f64,
    pub causal: f64,
    pub adiabatic: f64,
    pub stationary_pv: f64,
    pub pt1995: f64,
    pub far_field: FarFieldForms,
}

pub fn compare_prescriptions(sys: &PairSystem, t: f64, r_grid: &[f64]) -> Result<Vec<ComparisonRow>> {
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("empty R grid".into()));
    }
    r_grid
        .iter()
        .map(|&r| {
            let s = sys.with_distance(r)?;
            Ok(ComparisonRow {
                r,
                causal: evaluate_causal(&s, t)?.value,
                adiabatic: evaluate_prescription(&s, t, Prescription::Adiabatic)?.value,
                stationary_pv: evaluate_prescription(&s, t, Prescription::StationaryPv)?.value,
                pt1995: evaluate_prescription(&s, t, Prescription::Pt1995)?.value,
                far_field: far_field_forms(&s)?,
            })
        })
        .collect()
}

/// Difference `closed form − adiabatic` as a check helper: the part of the
/// causal energy that oscillates in time.
pub fn oscillating_part(sys: &PairSystem, t: f64) -> Result<f64> {
    Ok(evaluate_causal(sys, t)?.value - closed_form::energy_adiabatic(sys)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::TransitionLine;
    use crate::geometry::SeparationGeometry;

    fn single(ka_r: f64, ratio: f64) -> PairSystem {
        let a = TransitionLine::new(10_000.0, 1.0, 0.0, None).unwrap();
        let b = TransitionLine::new(10_000.0 * (1.0 - ratio), 1.0, 0.0, None).unwrap();
        let r = ka_r / a.k;
        PairSystem::new(a, vec![b], SeparationGeometry::new([0.0, 0.0, r]).unwrap()).unwrap()
    }

    #[test]
    fn half_residue_identity() {
        // P.V.∫ e^{iu}/(u − x₀) du = iπ e^{ix₀}
        let t = ExpTerm { l: 1.0, poly: crate::expo::Poly::constant(C64::new(1.0, 0.0)) };
        let v = residue_integral(&t, &[Pole::on_axis(7.3)]).unwrap();
        assert!((v - I * PI * (I * 7.3).exp()).norm() < 1e-14);
    }

    #[test]
    fn zero_exponent_is_ambiguous() {
        let t = ExpTerm { l: 0.0, poly: crate::expo::Poly::constant(C64::new(1.0, 0.0)) };
        assert_eq!(residue_integral(&t, &[Pole::on_axis(1.0)]), Err(Error::ContourAmbiguity(0.0)));
    }

    #[test]
    fn causal_matches_closed_form() {
        let sys = single(5.0, 0.04);
        let d = sys.detunings[0].abs();
        let t = 2.0 * sys.r() / C + 1.3 / d;
        let a = evaluate_causal(&sys, t).unwrap().value;
        let b = closed_form::energy_full(&sys, t).unwrap().value;
        let scale = closed_form::magnitude_scale(&sys).unwrap();
        assert!((a - b).abs() < 1e-11 * scale, "{a} {b}");
    }

    #[test]
    fn adiabatic_is_time_independent_group() {
        let sys = single(3.7, 0.05);
        let a = evaluate_prescription(&sys, 0.0, Prescription::Adiabatic).unwrap().value;
        let b = closed_form::energy_adiabatic(&sys).unwrap().value;
        assert!((a - b).abs() < 1e-12 * b.abs());
    }

    #[test]
    fn prescription_rejects_dropped_terms() {
        let sys = single(3.0, 0.05);
        let ch = sys.channel(0).unwrap();
        assert!(PoleSpec::new(TermId::MixedK, Prescription::Pt1995, &ch).is_err());
    }
}
