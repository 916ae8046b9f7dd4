//! Principal-value quadrature of the frequency integrals.
//!
//! Nothing here uses residues: the single integrals are adaptive
//! Gauss–Kronrod sums over the real axis with symmetric excision windows, and
//! the coupled terms are iterated principal values computed by a Nyström
//! rule on deformed contours. The energy is assembled from the same term
//! structure as the residue engine, so the two paths can be compared term by
//! term.

pub mod coupled;
pub mod gk;
pub mod gl;
pub mod pv1d;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atom::{Channel, PairSystem};
use crate::closed_form::{is_before_front, EnergyResult, Method};
use crate::contour::{Order, TermId, TermMask};
use crate::error::{Error, Result};
use crate::expo::{cos_shift, kernel, ExpPoly, ExpRational};
use crate::geometry::Tensor;
use crate::units::C;

pub use coupled::{coupled_sum, CoupledPair, CoupledParts};
pub use pv1d::{pv_integral_1d, shifted_pole_integral};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    /// Tails moved onto vertical rays where each exponential decays.
    #[default]
    ContourRotation,
    /// Tails kept on the real axis under a smooth cutoff of width `~12/|L|`.
    WindowExtrapolation,
}

/// Integrals are taken in `u = kR`, so lengths here are dimensionless and
/// scale with the pole layout rather than being fixed wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Excision half-width as a fraction of the smallest pole spacing.
    pub epsilon_fraction: f64,
    /// Cutoff of the window tail method as a multiple of the largest pole.
    pub lambda_factor: f64,
    pub rel_tol: f64,
    /// Integrate the excision windows with mirrored nodes; when false the
    /// windows are dropped.
    pub subtraction: bool,
    pub tail_method: TailMethod,
    pub max_panels: usize,
    /// Gauss–Legendre nodes per panel for the coupled terms.
    pub nodes_per_panel: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            epsilon_fraction: 1.0 / 12.0,
            lambda_factor: 60.0,
            rel_tol: 1e-10,
            subtraction: true,
            tail_method: TailMethod::ContourRotation,
            max_panels: 20_000,
            nodes_per_panel: 20,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::Config { field: field.into(), msg: msg.into() });
        if !(self.epsilon_fraction > 0.0 && self.epsilon_fraction < 0.1) {
            return bad("epsilon_fraction", "must lie in (0, 0.1)");
        }
        if !(self.lambda_factor > 50.0) || !self.lambda_factor.is_finite() {
            return bad("lambda_factor", "must exceed 50");
        }
        if !(self.rel_tol >= 1e-15 && self.rel_tol < 0.1) {
            return bad("rel_tol", "must lie in [1e-15, 0.1)");
        }
        if self.max_panels < 16 {
            return bad("max_panels", "must be at least 16");
        }
        if !(4..=64).contains(&self.nodes_per_panel) {
            return bad("nodes_per_panel", "must lie in 4..=64");
        }
        Ok(())
    }
}

/// `P.V.∫ k³F_X(kR)/(k − k₀) dk` over the whole real `k` axis, m⁻³.
pub fn kernel_pv(x: Tensor, k0: f64, r: f64, cfg: &QuadratureConfig) -> Result<C64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("R must be positive".into()));
    }
    let f = ExpRational { num: kernel(x), poles: vec![k0 * r] };
    Ok(pv_integral_1d(&f, cfg)? / r.powi(3))
}

fn q(f: &ExpPoly, p: f64, cfg: &QuadratureConfig) -> Result<C64> {
    pv_integral_1d(&ExpRational { num: f.clone(), poles: vec![p] }, cfg)
}

fn weighted(ch: &Channel, x: Tensor, swap: bool, extra: Option<&ExpPoly>) -> ExpPoly {
    let mut out = ExpPoly::default();
    for y in Tensor::BOTH {
        let s = if swap { ch.s.get(y, x) } else { ch.s.get(x, y) };
        let k = kernel(y).scale(C64::new(s, 0.0));
        out = out.add(&match extra {
            Some(e) => k.mul(e),
            None => k,
        });
    }
    out
}

/// The two coupled terms of one channel, dimensionless and without the
/// `δ` factor, weighted by the dipole contractions: `(mixed-k, mixed-k')`.
pub fn coupled_channel(ch: &Channel, tau: f64, order: Order, cfg: &QuadratureConfig) -> Result<(C64, C64)> {
    let (xa, xb) = (ch.x_a(), ch.x_b());
    let cs = cos_shift(tau, xa);
    let neg = C64::new(-1.0, 0.0);
    let mut sep = C64::new(0.0, 0.0);
    let mut direct = Vec::new();
    let mut split = Vec::new();
    // In k'-first order the first term is a single iterated integral and the
    // second carries the separable product; in k-first order the roles swap.
    for x in Tensor::BOTH {
        let kx = kernel(x);
        match order {
            Order::KPrimeFirst => {
                direct.push(CoupledPair { outer: kx.mul(&cs), inner: weighted(ch, x, false, None).scale(neg) });
                let g = weighted(ch, x, false, Some(&cs));
                sep -= q(&g, xa, cfg)? * q(&kx, xa, cfg)? / (xa - xb) + q(&g, xb, cfg)? * q(&kx, xb, cfg)? / (xb - xa);
                split.push(CoupledPair { outer: kx, inner: g });
            }
            Order::KFirst => {
                // here `x` labels the k' kernel
                let h = weighted(ch, x, true, Some(&cs));
                sep -= q(&h, xa, cfg)? * q(&kx, xa, cfg)? / (xa - xb) + q(&h, xb, cfg)? * q(&kx, xb, cfg)? / (xb - xa);
                split.push(CoupledPair { outer: kx.clone(), inner: h });
                direct.push(CoupledPair { outer: kx.mul(&cs), inner: weighted(ch, x, true, None).scale(neg) });
            }
        }
    }
    let d = coupled_sum(&direct, xa, xb, cfg)?.total;
    let s = sep + coupled_sum(&split, xa, xb, cfg)?.total;
    Ok(match order {
        Order::KPrimeFirst => (d, s),
        Order::KFirst => (s, d),
    })
}

/// One term of the pole structure for one channel by quadrature, joules,
/// on the same footing as the residue engine's term evaluator.
pub fn pv_integral_2d_coupled(ch: &Channel, t: f64, term: TermId, order: Order, cfg: &QuadratureConfig) -> Result<C64> {
    if !matches!(term, TermId::MixedK | TermId::MixedKPrime) {
        return Err(Error::InvalidArgument("only the mixed terms are coupled".into()));
    }
    if is_before_front(ch.r, t) {
        return Ok(C64::new(0.0, 0.0));
    }
    let (t3, t4) = coupled_channel(ch, C * t / ch.r, order, cfg)?;
    let v = if term == TermId::MixedK { t3 } else { t4 };
    Ok(v * ch.delta_k() * ch.r * ch.prefactor / (PI * PI * ch.r.powi(6)))
}

/// Causal energy of one channel by quadrature, joules.
pub fn channel_energy(ch: &Channel, t: f64, order: Order, mask: TermMask, cfg: &QuadratureConfig) -> Result<f64> {
    if is_before_front(ch.r, t) {
        return Ok(0.0);
    }
    let (xa, xb) = (ch.x_a(), ch.x_b());
    let mut tot = C64::new(0.0, 0.0);
    if mask.aa || mask.bb_cos {
        let qa: Vec<C64> = Tensor::BOTH.iter().map(|&x| q(&kernel(x), xa, cfg)).collect::<Result<_>>()?;
        let qb: Vec<C64> = Tensor::BOTH.iter().map(|&x| q(&kernel(x), xb, cfg)).collect::<Result<_>>()?;
        let cos_dt = (ch.delta * t).cos();
        for (i, x) in Tensor::BOTH.iter().enumerate() {
            for (j, y) in Tensor::BOTH.iter().enumerate() {
                let s = ch.s.get(*x, *y);
                if mask.aa {
                    tot += s * qa[i] * qa[j];
                }
                if mask.bb_cos {
                    tot -= s * cos_dt * qb[i] * qb[j];
                }
            }
        }
    }
    if mask.mixed_k || mask.mixed_k_prime {
        let (t3, t4) = coupled_channel(ch, C * t / ch.r, order, cfg)?;
        let mut m = C64::new(0.0, 0.0);
        if mask.mixed_k {
            m += t3;
        }
        if mask.mixed_k_prime {
            m += t4;
        }
        tot += m * ch.delta_k() * ch.r;
    }
    Ok((tot * ch.prefactor / (PI * PI * ch.r.powi(6))).re)
}

pub fn energy_quadrature(sys: &PairSystem, t: f64, cfg: &QuadratureConfig) -> Result<EnergyResult> {
    energy_quadrature_with(sys, t, Order::default(), TermMask::default(), cfg)
}

pub fn energy_quadrature_with(
    sys: &PairSystem,
    t: f64,
    order: Order,
    mask: TermMask,
    cfg: &QuadratureConfig,
) -> Result<EnergyResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T must be finite and non-negative, got {t}")));
    }
    let per_line =
        sys.channels()?.iter().map(|ch| channel_energy(ch, t, order, mask, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(EnergyResult::from_lines(sys, Method::Quadrature, Some(t), per_line))
}

/// Adiabatic energy by quadrature with both poles at `k_A + iη/c`.
pub fn adiabatic_quadrature_eta(sys: &PairSystem, eta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument("η must be positive".into()));
    }
    let mut tot = 0.0;
    for ch in sys.channels()? {
        let z0 = C64::new(ch.x_a(), eta * ch.r / C);
        let qs: Vec<C64> =
            Tensor::BOTH.iter().map(|&x| shifted_pole_integral(&kernel(x), z0, cfg)).collect::<Result<_>>()?;
        let mut v = C64::new(0.0, 0.0);
        for (i, x) in Tensor::BOTH.iter().enumerate() {
            for (j, y) in Tensor::BOTH.iter().enumerate() {
                v += ch.s.get(*x, *y) * qs[i] * qs[j];
            }
        }
        tot += (v * ch.prefactor / (PI * PI * ch.r.powi(6))).re;
    }
    Ok(tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaExtrapolation {
    pub etas: Vec<f64>,
    pub values: Vec<f64>,
    /// Successive differences `v_{n+1} − v_n`.
    pub differences: Vec<f64>,
    /// Polynomial extrapolation of the sequence to `η = 0`.
    pub extrapolated: f64,
}

/// Quadrature at `η₀/2ⁿ`, `n = 0..levels`, extrapolated to `η → 0⁺`.
pub fn eta_extrapolation(
    sys: &PairSystem,
    eta0: f64,
    levels: usize,
    cfg: &QuadratureConfig,
) -> Result<EtaExtrapolation> {
    if levels < 2 {
        return Err(Error::InvalidArgument("need at least two η levels".into()));
    }
    let etas: Vec<f64> = (0..levels).map(|n| eta0 / 2f64.powi(n as i32)).collect();
    let values = etas.iter().map(|&e| adiabatic_quadrature_eta(sys, e, cfg)).collect::<Result<Vec<_>>>()?;
    let differences = values.windows(2).map(|w| w[1] - w[0]).collect();
    // Neville's scheme evaluated at zero
    let mut p = values.clone();
    for k in 1..levels {
        for i in 0..levels - k {
            p[i] = (etas[i] * p[i + 1] - etas[i + k] * p[i]) / (etas[i] - etas[i + k]);
        }
    }
    Ok(EtaExtrapolation { etas, values, differences, extrapolated: p[0] })
}
