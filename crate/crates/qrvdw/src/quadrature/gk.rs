//! Globally adaptive Gauss–Kronrod (10/21) integration of complex-valued
//! functions over a set of parameterized pieces.

use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_114,
    0.562_757_134_668_604_683_339_000_099_272,
    0.433_395_394_129_247_190_799_265_943_165,
    0.294_392_862_701_460_198_131_126_603_103,
    0.148_874_338_981_631_210_884_826_001_129,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_244,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_325,
    0.123_491_976_262_065_851_077_208_734_508,
    0.134_709_217_311_473_325_928_054_001_771,
    0.142_775_938_577_060_080_797_094_273_138,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_389,
];

/// 10-point Gauss weights for the odd Kronrod abscissae.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_657,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
    /// Integral of |f|, used as the magnitude scale.
    pub resabs: f64,
}

/// One 21-point Kronrod panel with the embedded Gauss error estimate.
pub fn qk21<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[10];
    let mut rg = C64::new(0.0, 0.0);
    let mut ra = fc.norm() * WGK[10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        rk += (f1 + f2) * WGK[j];
        ra += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            rg += (f1 + f2) * WG[j / 2];
        }
    }
    let value = rk * h;
    let raw = ((rk - rg) * h).norm();
    // QUADPACK-style rescaling of the raw difference
    let resabs = ra * h.abs();
    let mut error = raw;
    if resabs > 0.0 && raw > 0.0 {
        let scale = (200.0 * raw / resabs).powf(1.5);
        error = if scale < 1.0 { resabs * scale } else { raw };
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if floor > error {
        error = floor;
    }
    Estimate { value, error, resabs }
}

struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.est.error == o.est.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.est.error.total_cmp(&o.est.error)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Relative to `|value|`.
    pub rel: f64,
    /// Relative to `∫|f|`; guards against cancellation.
    pub rel_abs: f64,
    pub max_panels: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome {
    pub value: C64,
    pub error: f64,
    pub resabs: f64,
    pub evaluations: usize,
}

/// Integrate a sum of pieces, each a function on a real parameter interval
/// with initial breakpoints. Refinement is global: the panel with the largest
/// error estimate is bisected until the summed error meets the tolerance.
/// An integrand with its initial panel breaks.
pub type Piece<'a> = (&'a dyn Fn(f64) -> C64, Vec<f64>);

pub fn integrate_pieces(pieces: &[Piece<'_>], tol: Tolerance) -> Result<Outcome> {
    let mut heap = BinaryHeap::new();
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut resabs = 0.0;
    let mut evaluations = 0;
    for (idx, (f, breaks)) in pieces.iter().enumerate() {
        for w in breaks.windows(2) {
            let est = qk21(f, w[0], w[1]);
            evaluations += 21;
            value += est.value;
            error += est.error;
            resabs += est.resabs;
            heap.push(Panel { piece: idx, a: w[0], b: w[1], est });
        }
    }
    loop {
        let target = (tol.rel * value.norm()).max(tol.rel_abs * resabs);
        if error <= target {
            break;
        }
        if heap.len() >= tol.max_panels {
            return Err(Error::NonConvergence(format!(
                "error {error:.3e} above target {target:.3e} after {} panels",
                heap.len()
            )));
        }
        let p = heap.pop().expect("non-empty heap");
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a.min(p.b) && m < p.a.max(p.b)) {
            return Err(Error::NonConvergence("panel width underflow".into()));
        }
        let f = pieces[p.piece].0;
        let l = qk21(&f, p.a, m);
        let r = qk21(&f, m, p.b);
        evaluations += 42;
        value += l.value + r.value - p.est.value;
        error += l.error + r.error - p.est.error;
        resabs += l.resabs + r.resabs - p.est.resabs;
        heap.push(Panel { piece: p.piece, a: p.a, b: m, est: l });
        heap.push(Panel { piece: p.piece, a: m, b: p.b, est: r });
    }
    // recompute from panels to shed accumulated rounding
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut resabs = 0.0;
    for p in heap.iter() {
        value += p.est.value;
        error += p.est.error;
        resabs += p.est.resabs;
    }
    Ok(Outcome { value, error, resabs, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let f = |x: f64| C64::new(x.powi(5) - 2.0 * x, x * x);
        let e = qk21(&f, -1.0, 2.0);
        let want = C64::new((64.0 - 1.0) / 6.0 - (4.0 - 1.0), (8.0 + 1.0) / 3.0);
        assert!((e.value - want).norm() < 1e-13);
    }

    #[test]
    fn oscillatory_adaptive() {
        let f = |x: f64| C64::new(0.0, 30.0 * x).exp();
        let tol = Tolerance { rel: 1e-12, rel_abs: 1e-14, max_panels: 10_000 };
        let out = integrate_pieces(&[(&f, vec![0.0, 1.0, 2.0])], tol).unwrap();
        let want = (C64::new(0.0, 60.0).exp() - 1.0) / C64::new(0.0, 30.0);
        assert!((out.value - want).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let f = |x: f64| C64::new(x.sqrt().ln(), 0.0);
        let tol = Tolerance { rel: 1e-10, rel_abs: 1e-12, max_panels: 10_000 };
        let out = integrate_pieces(&[(&f, vec![0.0, 1.0])], tol).unwrap();
        assert!((out.value.re + 0.5).abs() < 1e-9);
    }
}
