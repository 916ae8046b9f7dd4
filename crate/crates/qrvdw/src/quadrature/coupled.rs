//! Iterated principal-value integrals
//!
//! `J(o, φ) = P.V.∫ du o(u)/[(u − x_A)(u − x_B)] · P.V.∫ du' φ(u')/(u' − u)`
//!
//! for exponential polynomials `o` and `φ`. The outer integral of each
//! exponential piece of `o` runs along a contour `C_σ` that follows the real
//! segment around the poles and leaves it on vertical rays in the half-plane
//! where that piece decays; the inner integral of each piece of `φ` uses the
//! same construction, `Γ_σ'`. Both contours share their segment nodes, so the
//! inner principal value at an outer node is a Nyström sum with the diagonal
//! handled by singularity subtraction.

use num_complex::Complex64 as C64;

use super::gl;
use super::pv1d::{layout, pv_integral_1d, ray_length};
use super::QuadratureConfig;
use crate::error::{Error, Result};
use crate::expo::{ExpPoly, ExpRational, ExpTerm, I};

/// One `(o, φ)` pair of a batch.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub outer: ExpPoly,
    pub inner: ExpPoly,
}

struct Contour {
    z: Vec<C64>,
    w: Vec<C64>,
}

struct Plan {
    seg: usize,
    up: Contour,
    down: Contour,
    a: f64,
    b: f64,
    s_max: f64,
}

impl Plan {
    fn contour(&self, sigma: f64) -> &Contour {
        if sigma > 0.0 {
            &self.up
        } else {
            &self.down
        }
    }
}

fn push_panel(z: &mut Vec<C64>, w: &mut Vec<C64>, lo: f64, hi: f64, n: usize) {
    let (x, wt) = gl::rule(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for (xi, wi) in x.iter().zip(&wt) {
        z.push(C64::new(mid + half * xi, 0.0));
        w.push(C64::new(half * wi, 0.0));
    }
}

/// Breakpoints on `[lo, hi]`, starting at width `h` at each graded end and
/// doubling up to `w_max`.
fn graded(lo: f64, hi: f64, h: f64, w_max: f64, grade_lo: bool, grade_hi: bool) -> Vec<f64> {
    let mut left = vec![lo];
    let mut right = vec![hi];
    let mut hl = h;
    let mut hr = h;
    loop {
        let gap = right.last().unwrap() - left.last().unwrap();
        let mut moved = false;
        if grade_lo && hl < w_max && hl < 0.5 * gap {
            let v = *left.last().unwrap() + hl;
            left.push(v);
            hl *= 2.0;
            moved = true;
        }
        let gap = right.last().unwrap() - left.last().unwrap();
        if grade_hi && hr < w_max && hr < 0.5 * gap {
            let v = *right.last().unwrap() - hr;
            right.push(v);
            hr *= 2.0;
            moved = true;
        }
        if !moved {
            break;
        }
    }
    let x0 = *left.last().unwrap();
    let x1 = *right.last().unwrap();
    let n = (((x1 - x0) / w_max).ceil() as usize).max(1);
    for k in 1..n {
        left.push(x0 + (x1 - x0) * k as f64 / n as f64);
    }
    right.reverse();
    left.extend(right);
    left
}

fn build_plan(poles: &[f64; 2], l_max: f64, l_min: f64, cfg: &QuadratureConfig) -> Result<Plan> {
    let lay = layout(poles, cfg)?;
    let n = cfg.nodes_per_panel;
    let spacing = lay.poles[1] - lay.poles[0];
    let w_max = (12.0 / l_max).min(0.5 * spacing);
    let eps = lay.eps;
    let (p0, p1) = (lay.poles[0], lay.poles[1]);

    let mut z = Vec::new();
    let mut w = Vec::new();
    let intervals = [(lay.a, p0 - eps, false, true), (p0 + eps, p1 - eps, true, true), (p1 + eps, lay.b, true, false)];
    for (lo, hi, gl_, gh) in intervals {
        let br = graded(lo, hi, eps, w_max, gl_, gh);
        for k in 0..br.len() - 1 {
            push_panel(&mut z, &mut w, br[k], br[k + 1], n);
        }
    }
    // mirrored windows: the pairs p ± t cancel the odd part of 1/(u − p)
    for p in [p0, p1] {
        let m = ((eps / w_max).ceil() as usize).max(1);
        let mut tz = Vec::new();
        let mut tw = Vec::new();
        for k in 0..m {
            push_panel(&mut tz, &mut tw, eps * k as f64 / m as f64, eps * (k + 1) as f64 / m as f64, n);
        }
        for (t, wt) in tz.iter().zip(&tw) {
            z.push(C64::new(p + t.re, 0.0));
            w.push(*wt);
            z.push(C64::new(p - t.re, 0.0));
            w.push(*wt);
        }
    }
    let seg = z.len();

    let base = lay.a.abs().max(lay.b.abs());
    let s_max = ray_length(l_min, 4, base, 1e-18);
    let h0 = (0.25 * (lay.b - p1)).min(0.5 / l_max);
    let mut rb = vec![0.0];
    let mut s = h0;
    while s < s_max {
        rb.push(s);
        s *= 2.0;
    }
    rb.push(s_max);
    let mut rs = Vec::new();
    let mut rw = Vec::new();
    for k in 0..rb.len() - 1 {
        push_panel(&mut rs, &mut rw, rb[k], rb[k + 1], n);
    }

    let make = |sigma: f64| {
        let mut cz = z.clone();
        let mut cw = w.clone();
        for (s, ws) in rs.iter().zip(&rw) {
            cz.push(C64::new(lay.a, sigma * s.re));
            cw.push(-I * sigma * *ws);
        }
        for (s, ws) in rs.iter().zip(&rw) {
            cz.push(C64::new(lay.b, sigma * s.re));
            cw.push(I * sigma * *ws);
        }
        Contour { z: cz, w: cw }
    };
    Ok(Plan { seg, up: make(1.0), down: make(-1.0), a: lay.a, b: lay.b, s_max })
}

/// `∫ dz'/(z' − z)` over the parts of `Γ_σ'` beyond the truncation height.
fn tail_log(plan: &Plan, sigma: f64, z: C64) -> C64 {
    let top = C64::new(0.0, sigma * plan.s_max);
    (top + plan.a - z).ln() - (top + plan.b - z).ln()
}

fn signed(phi: &ExpPoly) -> ExpPoly {
    ExpPoly {
        terms: phi.terms.iter().map(|t| ExpTerm { l: t.l, poly: t.poly.scale(C64::new(t.l.signum(), 0.0)) }).collect(),
    }
}

/// Split of the iterated integral into the numerical remainder of the inner
/// principal value and the part carried by its subtraction constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledParts {
    pub total: C64,
    /// Outer integral of the Nyström remainder; zero up to quadrature error.
    pub remainder: C64,
}

/// `Σ_p J(o_p, φ_p)` over a batch sharing the two outer poles.
pub fn coupled_sum(pairs: &[CoupledPair], xa: f64, xb: f64, cfg: &QuadratureConfig) -> Result<CoupledParts> {
    cfg.validate()?;
    let mut ls = Vec::new();
    for p in pairs {
        for t in p.outer.terms.iter().chain(&p.inner.terms) {
            if t.l == 0.0 {
                return Err(Error::ContourAmbiguity(t.l));
            }
            ls.push(t.l.abs());
        }
    }
    if ls.is_empty() {
        return Ok(CoupledParts { total: C64::new(0.0, 0.0), remainder: C64::new(0.0, 0.0) });
    }
    let l_max = ls.iter().cloned().fold(0.0, f64::max);
    let l_min = ls.iter().cloned().fold(f64::INFINITY, f64::min);
    let plan = build_plan(&[xa, xb], l_max, l_min, cfg)?;

    // constant part: iπ Σ o_m s'_n φ_n along the real line
    let mut direct = ExpPoly::default();
    for p in pairs {
        direct = direct.add(&p.outer.mul(&signed(&p.inner)));
    }
    direct.terms.retain(|t| t.poly.0.iter().any(|c| *c != C64::new(0.0, 0.0)));
    let constant = if direct.terms.is_empty() {
        C64::new(0.0, 0.0)
    } else {
        I * std::f64::consts::PI * pv_integral_1d(&ExpRational { num: direct, poles: vec![xa, xb] }, cfg)?
    };

    let mut remainder = C64::new(0.0, 0.0);
    for sigma_in in [1.0, -1.0] {
        let gamma = plan.contour(sigma_in);
        let inner: Vec<(usize, &ExpTerm)> = pairs
            .iter()
            .enumerate()
            .flat_map(|(k, p)| p.inner.terms.iter().filter(move |t| t.l * sigma_in > 0.0).map(move |t| (k, t)))
            .collect();
        if inner.is_empty() {
            continue;
        }
        let vals: Vec<Vec<C64>> = inner.iter().map(|(_, t)| gamma.z.iter().map(|&z| t.eval(z)).collect()).collect();
        let dvals: Vec<Vec<C64>> =
            inner.iter().map(|(_, t)| gamma.z.iter().map(|&z| t.eval_derivative(z)).collect()).collect();

        for sigma_out in [1.0, -1.0] {
            let c = plan.contour(sigma_out);
            let outer: Vec<ExpPoly> = pairs
                .iter()
                .map(|p| ExpPoly { terms: p.outer.terms.iter().filter(|t| t.l * sigma_out > 0.0).cloned().collect() })
                .collect();
            if inner.iter().all(|(k, _)| outer[*k].terms.is_empty()) {
                continue;
            }
            let mut acc = vec![C64::new(0.0, 0.0); inner.len()];
            for i in 0..c.z.len() {
                let z = c.z[i];
                let den = (z - xa) * (z - xb);
                let o: Vec<C64> = outer
                    .iter()
                    .map(|p| if p.terms.is_empty() { C64::new(0.0, 0.0) } else { p.eval(z) / den })
                    .collect();
                if o.iter().all(|v| v.norm() == 0.0) {
                    continue;
                }
                let same = i < plan.seg || sigma_in == sigma_out;
                acc.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
                let mut s = C64::new(0.0, 0.0);
                for j in 0..gamma.z.len() {
                    if same && j == i {
                        continue;
                    }
                    let k = gamma.w[j] / (gamma.z[j] - z);
                    s += k;
                    for (a, v) in acc.iter_mut().zip(&vals) {
                        *a += k * v[j];
                    }
                }
                let g = tail_log(&plan, sigma_in, z);
                for (n, (pk, t)) in inner.iter().enumerate() {
                    if o[*pk].norm() == 0.0 {
                        continue;
                    }
                    let mut d = acc[n];
                    if same || t.l.abs() * z.im.abs() <= 4.0 {
                        let phi_z = if same { vals[n][i] } else { t.eval(z) };
                        d -= phi_z * (s + g);
                    }
                    if same {
                        d += gamma.w[i] * dvals[n][i];
                    }
                    remainder += c.w[i] * o[*pk] * d;
                }
            }
        }
    }
    Ok(CoupledParts { total: constant + remainder, remainder })
}

/// Single-pole reduction used for checks: `P.V.∫ o(u)/(u − x₀) du` with
/// `o` an exponential polynomial.
pub fn single_pole(o: &ExpPoly, x0: f64, cfg: &QuadratureConfig) -> Result<C64> {
    pv_integral_1d(&ExpRational { num: o.clone(), poles: vec![x0] }, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{hilbert, residue_integral_poly, Pole};
    use crate::expo::{cos_shift, kernel};
    use crate::geometry::Tensor;

    fn oracle(o: &ExpPoly, phi: &ExpPoly, xa: f64, xb: f64) -> C64 {
        let f = o.mul(&hilbert(phi).unwrap());
        residue_integral_poly(&f, &[Pole::on_axis(xa), Pole::on_axis(xb)]).unwrap()
    }

    #[test]
    fn matches_residue_for_kernel_products() {
        let cfg = QuadratureConfig::default();
        let (xa, xb, tau) = (6.0, 5.7, 3.4);
        let o = kernel(Tensor::Alpha).mul(&cos_shift(tau, xa));
        let phi = kernel(Tensor::Beta);
        let got = coupled_sum(&[CoupledPair { outer: o.clone(), inner: phi.clone() }], xa, xb, &cfg).unwrap();
        let want = oracle(&o, &phi, xa, xb);
        assert!((got.total - want).norm() < 1e-7 * want.norm(), "{got:?} {want}");
        assert!(got.remainder.norm() < 1e-7 * want.norm());
    }

    #[test]
    fn graded_breaks_are_monotone() {
        let b = graded(0.0, 1.0, 0.01, 0.1, true, true);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-12));
    }
}
