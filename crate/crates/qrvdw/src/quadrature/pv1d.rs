//! One-dimensional principal-value integrals of `e^{iLu}P(u)/Π(u − p_j)`
//! along the whole real line.
//!
//! The real line is cut into a finite segment holding every pole and two
//! tails. Around each real pole a symmetric window `[p − ε, p + ε]` is
//! integrated with mirrored nodes, `∫₀^ε [f(p + t) + f(p − t)] dt`, in which
//! the `1/(u − p)` parts cancel exactly. The tails are either rotated onto
//! vertical rays in the half-plane where each exponential decays, or kept on
//! the real axis under a smooth cutoff window.

use num_complex::Complex64 as C64;

use super::gk::{integrate_pieces, Outcome, Piece, Tolerance};
use super::{QuadratureConfig, TailMethod};
use crate::error::{Error, Result};
use crate::expo::{ExpPoly, ExpRational, ExpTerm, I};

type BoxFn<'a> = Box<dyn Fn(f64) -> C64 + 'a>;

/// Terms of an exponential polynomial whose exponent has the given sign.
fn split(num: &ExpPoly, sigma: f64) -> ExpPoly {
    ExpPoly { terms: num.terms.iter().filter(|t| t.l * sigma > 0.0).cloned().collect() }
}

fn check_exponents(num: &ExpPoly) -> Result<()> {
    for t in &num.terms {
        if t.l == 0.0 {
            return Err(Error::ContourAmbiguity(t.l));
        }
    }
    Ok(())
}

pub(crate) struct Layout {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub poles: Vec<f64>,
}

/// Segment `[a, b]` around sorted poles and the excision half-width.
pub(crate) fn layout(poles: &[f64], cfg: &QuadratureConfig) -> Result<Layout> {
    let mut p = poles.to_vec();
    p.sort_by(f64::total_cmp);
    for w in p.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument("poles must be distinct".into()));
        }
    }
    let spacing = if p.len() >= 2 {
        p.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    } else if let Some(&q) = p.first() {
        q.abs().max(1.0)
    } else {
        1.0
    };
    let eps = cfg.epsilon_fraction * spacing;
    let margin = 0.5 * spacing;
    let (a, b) = match (p.first(), p.last()) {
        (Some(&lo), Some(&hi)) => (lo - margin, hi + margin),
        _ => (-margin, margin),
    };
    Ok(Layout { a, b, eps, poles: p })
}

/// Breakpoints on `[lo, hi]` with panel width at most `w`.
fn breaks(lo: f64, hi: f64, w: f64) -> Vec<f64> {
    let n = (((hi - lo) / w).ceil() as usize).clamp(1, 100_000);
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Geometric breakpoints `0, h, 2h, 4h, …` up to `s_max`.
fn ray_breaks(h0: f64, s_max: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    let mut s = h0;
    while s < s_max {
        v.push(s);
        s *= 2.0;
    }
    v.push(s_max);
    v
}

/// Ray length beyond which `e^{−|L|s}` times polynomial growth of degree
/// `deg` is below `tol` relative to its start.
pub(crate) fn ray_length(l_min: f64, deg: usize, base: f64, tol: f64) -> f64 {
    let mut s = 1.0 / l_min;
    for _ in 0..200 {
        let growth = (1.0 + s / base.max(1.0)).powi(deg as i32);
        if (-l_min * s).exp() * growth < tol {
            break;
        }
        s *= 1.25;
    }
    s
}

fn tolerance(cfg: &QuadratureConfig) -> Tolerance {
    Tolerance { rel: cfg.rel_tol, rel_abs: cfg.rel_tol * 1e-2, max_panels: cfg.max_panels }
}

/// `P.V.∫_{−∞}^{∞} f(u) du` for real, distinct poles.
pub fn pv_integral_1d(f: &ExpRational, cfg: &QuadratureConfig) -> Result<C64> {
    Ok(pv_integral_1d_outcome(f, cfg)?.value)
}

pub fn pv_integral_1d_outcome(f: &ExpRational, cfg: &QuadratureConfig) -> Result<Outcome> {
    cfg.validate()?;
    check_exponents(&f.num)?;
    if f.num.terms.is_empty() {
        return Ok(Outcome { value: C64::new(0.0, 0.0), error: 0.0, resabs: 0.0, evaluations: 0 });
    }
    let lay = layout(&f.poles, cfg)?;
    let l_max = f.num.terms.iter().map(|t| t.l.abs()).fold(0.0, f64::max);
    let panel = (4.0 * std::f64::consts::PI / l_max).min(lay.b - lay.a);

    let eval = |u: C64| f.eval(u);
    let real = |u: f64| eval(C64::new(u, 0.0));

    // real intervals between windows
    let mut cuts = vec![lay.a];
    for &p in &lay.poles {
        cuts.push(p - lay.eps);
        cuts.push(p + lay.eps);
    }
    cuts.push(lay.b);

    // Close to the pole the mirrored sum is lost to cancellation (and is
    // inf − inf once p ± t rounds to p), so below `t_c` it is replaced by its
    // limit 2h'(p), h = f·(u − p). The O(t²) truncation there is below the
    // rounding noise of the direct sum.
    let deg = f.num.terms.iter().map(|t| t.poly.degree()).max().unwrap_or(0);
    let kappa = l_max + (deg + lay.poles.len()) as f64 / lay.eps;
    let t_c = 1e-5 / kappa;
    let window_fns: Vec<(BoxFn<'_>, f64)> = lay
        .poles
        .iter()
        .map(|&p| {
            let zp = C64::new(p, 0.0);
            let d: C64 = lay.poles.iter().filter(|&&q| q != p).map(|&q| zp - q).product();
            let inv: f64 = lay.poles.iter().filter(|&&q| q != p).map(|&q| 1.0 / (p - q)).sum();
            let n = f.num.eval(zp);
            let dn: C64 = f.num.terms.iter().map(|t| t.eval_derivative(zp)).sum();
            let limit = 2.0 * (dn - n * inv) / d;
            let wf = move |t: f64| if t < t_c { limit } else { real(p + t) + real(p - t) };
            (Box::new(wf) as BoxFn<'_>, t_c)
        })
        .collect();

    let mut pieces: Vec<Piece<'_>> = Vec::new();
    let cut_w = |lo: f64, hi: f64| breaks(lo, hi, panel);
    match cfg.tail_method {
        TailMethod::ContourRotation => {
            for k in 0..cuts.len() / 2 {
                pieces.push((&real, cut_w(cuts[2 * k], cuts[2 * k + 1])));
            }
        }
        TailMethod::WindowExtrapolation => {}
    }
    if cfg.subtraction {
        for (wf, t_c) in &window_fns {
            pieces.push((wf.as_ref(), vec![0.0, *t_c, 0.5 * lay.eps, lay.eps]));
        }
    }

    // tails
    let up = split(&f.num, 1.0);
    let down = split(&f.num, -1.0);
    let groups: Vec<(f64, ExpRational)> = [(1.0, up), (-1.0, down)]
        .into_iter()
        .filter(|(_, g)| !g.terms.is_empty())
        .map(|(s, g)| (s, ExpRational { num: g, poles: f.poles.clone() }))
        .collect();
    let base = lay.a.abs().max(lay.b.abs());
    let mut ray_fns: Vec<(BoxFn<'_>, Vec<f64>)> = Vec::new();
    let mut window_real: Option<BoxFn<'_>> = None;
    let mut window_breaks = Vec::new();
    match cfg.tail_method {
        TailMethod::ContourRotation => {
            for (sigma, g) in &groups {
                let sigma = *sigma;
                let l_min = g.num.terms.iter().map(|t| t.l.abs()).fold(f64::INFINITY, f64::min);
                let l_top = g.num.terms.iter().map(|t| t.l.abs()).fold(0.0, f64::max);
                let s_max = ray_length(l_min, deg, base, cfg.rel_tol * 1e-3);
                let h0 = (0.5 / l_top).min(0.25 * (lay.b - lay.a));
                let rb = ray_breaks(h0, s_max);
                let (a, b) = (lay.a, lay.b);
                let gl = g.clone();
                let gr = g.clone();
                ray_fns.push((Box::new(move |s: f64| -I * sigma * gl.eval(C64::new(a, sigma * s))), rb.clone()));
                ray_fns.push((Box::new(move |s: f64| I * sigma * gr.eval(C64::new(b, sigma * s))), rb));
            }
        }
        TailMethod::WindowExtrapolation => {
            let l_min = f.num.terms.iter().map(|t| t.l.abs()).fold(f64::INFINITY, f64::min);
            let sigma_w = 12.0 / l_min;
            let p_max = lay.poles.iter().map(|p| p.abs()).fold(1.0, f64::max);
            let lambda = (cfg.lambda_factor * p_max).max(10.0 * sigma_w);
            let lo = lay.a - lambda;
            let hi = lay.b + lambda;
            let root2 = std::f64::consts::SQRT_2;
            let w =
                move |u: f64| 0.5 * (libm::erf((u - lo) / (sigma_w * root2)) - libm::erf((u - hi) / (sigma_w * root2)));
            window_real = Some(Box::new(move |u: f64| real(u) * w(u)));
            let mut all = Vec::new();
            all.push((lo - 8.0 * sigma_w, lay.a));
            for k in 0..cuts.len() / 2 {
                all.push((cuts[2 * k], cuts[2 * k + 1]));
            }
            all.push((lay.b, hi + 8.0 * sigma_w));
            for (x0, x1) in all {
                window_breaks.push(cut_w(x0, x1));
            }
        }
    }
    for (rf, rb) in &ray_fns {
        pieces.push((rf.as_ref(), rb.clone()));
    }
    if let Some(wr) = &window_real {
        for b in &window_breaks {
            pieces.push((wr.as_ref(), b.clone()));
        }
    }
    integrate_pieces(&pieces, tolerance(cfg))
}

/// `∫ e^{iLu}P(u)/(u − z₀) du` over the real line for one pole `z₀` off the
/// axis. Near the pole the smooth difference quotient is integrated and the
/// `1/(u − z₀)` part is added in closed form; the tails are rotated as above.
pub fn shifted_pole_integral(num: &ExpPoly, z0: C64, cfg: &QuadratureConfig) -> Result<C64> {
    cfg.validate()?;
    check_exponents(num)?;
    if z0.im == 0.0 {
        return pv_integral_1d(&ExpRational { num: num.clone(), poles: vec![z0.re] }, cfg);
    }
    let lay = layout(&[z0.re], cfg)?;
    let l_max = num.terms.iter().map(|t| t.l.abs()).fold(0.0, f64::max);
    let panel = (4.0 * std::f64::consts::PI / l_max).min(lay.b - lay.a);
    let n0 = num.eval(z0);
    let diff = |u: f64| {
        let z = C64::new(u, 0.0);
        let d = z - z0;
        // the quotient is entire; near z₀ use the first Taylor terms
        if d.norm() < 1e-7 * (1.0 + z0.norm()) {
            num.terms.iter().map(|t: &ExpTerm| t.eval_derivative(z0)).sum::<C64>()
        } else {
            (num.eval(z) - n0) / d
        }
    };
    let mut pieces: Vec<Piece<'_>> = Vec::new();
    let seg = breaks(lay.a, lay.b, panel);
    pieces.push((&diff, seg));
    let deg = num.terms.iter().map(|t| t.poly.degree()).max().unwrap_or(0);
    let base = lay.a.abs().max(lay.b.abs());
    let mut rays: Vec<(BoxFn<'_>, Vec<f64>)> = Vec::new();
    for sigma in [1.0, -1.0] {
        let g = split(num, sigma);
        if g.terms.is_empty() {
            continue;
        }
        let l_min = g.terms.iter().map(|t| t.l.abs()).fold(f64::INFINITY, f64::min);
        let l_top = g.terms.iter().map(|t| t.l.abs()).fold(0.0, f64::max);
        let s_max = ray_length(l_min, deg, base, cfg.rel_tol * 1e-3);
        let h0 = (0.5 / l_top).min(0.25 * (lay.b - lay.a));
        let rb = ray_breaks(h0, s_max);
        let f = ExpRational { num: g, poles: Vec::new() };
        let (a, b) = (lay.a, lay.b);
        let fl = f.clone();
        rays.push((
            Box::new(move |s: f64| {
                let z = C64::new(a, sigma * s);
                -I * sigma * fl.eval(z) / (z - z0)
            }),
            rb.clone(),
        ));
        rays.push((
            Box::new(move |s: f64| {
                let z = C64::new(b, sigma * s);
                I * sigma * f.eval(z) / (z - z0)
            }),
            rb,
        ));
    }
    for (rf, rb) in &rays {
        pieces.push((rf.as_ref(), rb.clone()));
    }
    let out = integrate_pieces(&pieces, tolerance(cfg))?;
    let a = C64::new(lay.a, 0.0);
    let b = C64::new(lay.b, 0.0);
    Ok(out.value + n0 * ((b - z0).ln() - (a - z0).ln()))
}
