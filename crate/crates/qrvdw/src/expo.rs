//! Exponential polynomials `Σ_j e^{i L_j z} P_j(z)` and the kernel catalogue.
//!
//! All frequency integrals are written in units where `R = 1`, so the
//! integration variable is `u = kR` and the kernel `k³F(kR)` becomes
//! `R⁻³·[α u² sin u + β (u cos u − sin u)]`.

use num_complex::Complex64 as C64;

use crate::geometry::Tensor;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Polynomial with complex coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<C64>);

impl Poly {
    pub fn constant(c: C64) -> Self {
        Poly(vec![c])
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_re(&self, x: f64) -> C64 {
        self.0.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![C64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly(self.0.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(n, &c)| c * n as f64).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

/// `e^{i l z} p(z)`
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub l: f64,
    pub poly: Poly,
}

impl ExpTerm {
    pub fn eval(&self, z: C64) -> C64 {
        (I * self.l * z).exp() * self.poly.eval(z)
    }

    /// `d/dz [e^{ilz} p(z)] = e^{ilz}(i l p + p')`
    pub fn eval_derivative(&self, z: C64) -> C64 {
        (I * self.l * z).exp() * (I * self.l * self.poly.eval(z) + self.poly.derivative().eval(z))
    }

    pub fn mul(&self, other: &ExpTerm) -> ExpTerm {
        ExpTerm { l: self.l + other.l, poly: self.poly.mul(&other.poly) }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    pub terms: Vec<ExpTerm>,
}

impl ExpPoly {
    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        ExpPoly { terms }.merged()
    }

    pub fn scale(&self, c: C64) -> ExpPoly {
        ExpPoly { terms: self.terms.iter().map(|t| ExpTerm { l: t.l, poly: t.poly.scale(c) }).collect() }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        ExpPoly { terms }.merged()
    }

    /// Combine terms with bitwise-equal exponents.
    pub fn merged(self) -> ExpPoly {
        let mut out: Vec<ExpTerm> = Vec::new();
        for t in self.terms {
            if let Some(m) = out.iter_mut().find(|m| m.l == t.l) {
                let n = m.poly.0.len().max(t.poly.0.len());
                m.poly.0.resize(n, C64::new(0.0, 0.0));
                for (i, c) in t.poly.0.iter().enumerate() {
                    m.poly.0[i] += c;
                }
            } else {
                out.push(t);
            }
        }
        ExpPoly { terms: out }
    }
}

/// `u³F_X(u)` split into `e^{±iu}` pieces: `α → u² sin u`, `β → u cos u − sin u`.
pub fn kernel(x: Tensor) -> ExpPoly {
    let half_i = C64::new(0.0, -0.5); // 1/(2i)
    let terms = [1.0, -1.0]
        .iter()
        .map(|&s| {
            let poly = match x {
                Tensor::Alpha => Poly(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), half_i * s]),
                Tensor::Beta => Poly(vec![-half_i * s, C64::new(0.5, 0.0)]),
            };
            ExpTerm { l: s, poly }
        })
        .collect();
    ExpPoly { terms }
}

/// `cos[τ(u − x₀)]` as `½Σ_σ e^{−iστx₀} e^{iστu}`.
pub fn cos_shift(tau: f64, x0: f64) -> ExpPoly {
    let terms = [1.0, -1.0]
        .iter()
        .map(|&sg| ExpTerm { l: sg * tau, poly: Poly::constant(0.5 * (-I * sg * tau * x0).exp()) })
        .collect();
    ExpPoly { terms }
}

/// Rational function `N(z)/Π(z − p_j)` with an exponential-polynomial
/// numerator and real, distinct poles.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpRational {
    pub num: ExpPoly,
    pub poles: Vec<f64>,
}

impl ExpRational {
    pub fn eval(&self, z: C64) -> C64 {
        let d: C64 = self.poles.iter().map(|&p| z - p).product();
        self.num.eval(z) / d
    }

    /// One exponential term of the numerator over the full denominator.
    pub fn term(&self, idx: usize) -> ExpRational {
        ExpRational { num: ExpPoly { terms: vec![self.num.terms[idx].clone()] }, poles: self.poles.clone() }
    }
}
