//! Separation geometry, the α/β tensors, the radiation kernel and the
//! dipole contractions that every evaluator consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &Vec3) -> Result<Vec3> {
    let n = norm(a);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::DegenerateGeometry(format!("cannot normalize {a:?}")));
    }
    Ok([a[0] / n, a[1] / n, a[2] / n])
}

/// `u·M·v`
pub fn bilinear(u: &Vec3, m: &Mat3, v: &Vec3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += u[i] * m[i][j] * v[j];
        }
    }
    s
}

pub fn trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

/// Frobenius contraction `A:B = Σ A_ij B_ij`.
pub fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationGeometry {
    /// `R_B − R_A` in meters.
    pub r_vec: Vec3,
    pub r: f64,
    pub r_hat: Vec3,
}

impl SeparationGeometry {
    pub fn new(r_vec: Vec3) -> Result<Self> {
        let r = norm(&r_vec);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::DegenerateGeometry(format!("separation must be nonzero and finite, got {r_vec:?}")));
        }
        let r_hat = [r_vec[0] / r, r_vec[1] / r, r_vec[2] / r];
        Ok(Self { r_vec, r, r_hat })
    }

    /// Distance `r` along a direction (normalized internally).
    pub fn along(r: f64, direction: Vec3) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::DegenerateGeometry(format!("distance must be positive, got {r}")));
        }
        let d = normalize(&direction)?;
        Self::new([r * d[0], r * d[1], r * d[2]])
    }

    pub fn with_distance(&self, r: f64) -> Result<Self> {
        Self::along(r, self.r_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryTensors {
    /// `δ − R̂R̂`
    pub alpha: Mat3,
    /// `δ − 3R̂R̂`
    pub beta: Mat3,
}

pub fn make_tensors(geom: &SeparationGeometry) -> Result<GeometryTensors> {
    if !(geom.r > 0.0) {
        return Err(Error::DegenerateGeometry("zero separation".into()));
    }
    let n = geom.r_hat;
    let mut alpha = [[0.0; 3]; 3];
    let mut beta = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            alpha[i][j] = d - n[i] * n[j];
            beta[i][j] = d - 3.0 * n[i] * n[j];
        }
    }
    Ok(GeometryTensors { alpha, beta })
}

/// Scalar coefficient of α in `F(x)`: `sin x / x`.
pub fn kernel_alpha(x: f64) -> f64 {
    x.sin() / x
}

/// Scalar coefficient of β in `F(x)`: `cos x / x² − sin x / x³`.
pub fn kernel_beta(x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    c / (x * x) - s / (x * x * x)
}

/// `F_ij(x) = α_ij sin x/x + β_ij (cos x/x² − sin x/x³)`.
pub fn radiation_kernel(x: f64, t: &GeometryTensors) -> Result<Mat3> {
    if x == 0.0 {
        return Err(Error::Singularity);
    }
    let a = kernel_alpha(x);
    let b = kernel_beta(x);
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| a * t.alpha[i][j] + b * t.beta[i][j])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionMode {
    FixedOrientation,
    IsotropicAverage,
}

/// `s_XY = U_ijpq X^ij Y^pq` without the `1/[(4πε₀)²ħΔ]` prefactor, in C⁴·m⁴.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleContractions {
    pub s_bb: f64,
    pub s_ab: f64,
    pub s_aa: f64,
    pub mode: ContractionMode,
}

impl DipoleContractions {
    pub fn fixed(mu_a: f64, dir_a: &Vec3, mu_b: f64, dir_b: &Vec3, t: &GeometryTensors) -> Result<Self> {
        let ua = normalize(dir_a)?;
        let ub = normalize(dir_b)?;
        let scale = mu_a * mu_b;
        let pa = scale * bilinear(&ua, &t.alpha, &ub);
        let pb = scale * bilinear(&ua, &t.beta, &ub);
        Ok(Self { s_bb: pb * pb, s_ab: pa * pb, s_aa: pa * pa, mode: ContractionMode::FixedOrientation })
    }

    /// Orientation average over both dipoles.
    ///
    /// With `⟨û_i û_q⟩ = δ_iq/3` for each atom,
    /// `⟨U_ijpq X^ij Y^pq⟩ = |μ_A|²|μ_B|² (X:Y)/9`, and the Frobenius
    /// contractions are `β:β = 6`, `α:β = 2`, `α:α = 2`.
    pub fn isotropic(mu_a: f64, mu_b: f64) -> Self {
        let m = mu_a * mu_a * mu_b * mu_b;
        Self { s_bb: m * 6.0 / 9.0, s_ab: m * 2.0 / 9.0, s_aa: m * 2.0 / 9.0, mode: ContractionMode::IsotropicAverage }
    }

    /// Component by tensor labels, `X, Y ∈ {α, β}`.
    pub fn get(&self, x: Tensor, y: Tensor) -> f64 {
        match (x, y) {
            (Tensor::Alpha, Tensor::Alpha) => self.s_aa,
            (Tensor::Beta, Tensor::Beta) => self.s_bb,
            _ => self.s_ab,
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self { s_bb: self.s_bb * f, s_ab: self.s_ab * f, s_aa: self.s_aa * f, mode: self.mode }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tensor {
    Alpha,
    Beta,
}

impl Tensor {
    pub const BOTH: [Tensor; 2] = [Tensor::Alpha, Tensor::Beta];
}
