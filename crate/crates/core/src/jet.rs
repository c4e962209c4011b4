//! Truncated Taylor-jet arithmetic in the spectral parameter.
//!
//! A [`Jet`] stores the coefficients `c_0 .. c_R` of a truncated expansion
//! around a base point; `c_k` is the k-th derivative divided by `k!`.
//! Running the fixed-point solvers in jet arithmetic yields all derivative
//! orders of the first-passage and Green functions in one pass.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Value coefficients below this magnitude make a jet singular for division.
pub const SINGULAR_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Jet {
        assert!(!coeffs.is_empty(), "a jet has at least the value coefficient");
        Jet { coeffs }
    }

    pub fn zero(order: usize) -> Jet {
        Jet {
            coeffs: vec![Complex64::ZERO; order + 1],
        }
    }

    pub fn one(order: usize) -> Jet {
        Jet::constant(Complex64::ONE, order)
    }

    pub fn constant(value: Complex64, order: usize) -> Jet {
        let mut coeffs = vec![Complex64::ZERO; order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// The identity function `λ` expanded at `value`: `[value, 1, 0, ...]`.
    pub fn variable(value: Complex64, order: usize) -> Jet {
        let mut coeffs = vec![Complex64::ZERO; order + 1];
        coeffs[0] = value;
        if order >= 1 {
            coeffs[1] = Complex64::ONE;
        }
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// The k-th derivative value `k! c_k`.
    pub fn derivative_value(&self, k: usize) -> Complex64 {
        self.coeffs[k] * factorial(k)
    }

    /// Largest coefficient magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale(&self, factor: Complex64) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn truncated(&self, order: usize) -> Jet {
        let end = (order + 1).min(self.coeffs.len());
        Jet {
            coeffs: self.coeffs[..end].to_vec(),
        }
    }

    /// Derivative as a function of the base parameter; the order drops by one.
    pub fn derivative(&self) -> Jet {
        if self.coeffs.len() == 1 {
            return Jet::zero(0);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64))
            .collect();
        Jet { coeffs }
    }

    pub fn try_div(&self, rhs: &Jet) -> Result<Jet> {
        let order = common_order(self, rhs);
        let b0 = rhs.coeffs[0];
        if b0.norm() < SINGULAR_TOL {
            return Err(Error::DivisionBySingularJet { magnitude: b0.norm() });
        }
        let mut out = vec![Complex64::ZERO; order + 1];
        for k in 0..=order {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * out[k - j];
            }
            out[k] = acc / b0;
        }
        Ok(Jet { coeffs: out })
    }

    pub fn try_inv(&self) -> Result<Jet> {
        Jet::one(self.order()).try_div(self)
    }

    /// Principal-branch square root; the other branch is the negation.
    pub fn try_sqrt(&self) -> Result<Jet> {
        let b0 = self.coeffs[0];
        if b0.norm() < SINGULAR_TOL {
            return Err(Error::SqrtOfSingularJet { magnitude: b0.norm() });
        }
        let order = self.order();
        let mut out = vec![Complex64::ZERO; order + 1];
        out[0] = b0.sqrt();
        let two_s0 = out[0] * 2.0;
        for k in 1..=order {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= out[j] * out[k - j];
            }
            out[k] = acc / two_s0;
        }
        Ok(Jet { coeffs: out })
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Jet::one(self.order());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn common_order(a: &Jet, b: &Jet) -> usize {
    a.order().min(b.order())
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let order = common_order(self, rhs);
        Jet {
            coeffs: (0..=order).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let order = common_order(self, rhs);
        Jet {
            coeffs: (0..=order).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let order = common_order(self, rhs);
        let mut out = vec![Complex64::ZERO; order + 1];
        for (k, slot) in out.iter_mut().enumerate() {
            for j in 0..=k {
                *slot += self.coeffs[j] * rhs.coeffs[k - j];
            }
        }
        Jet { coeffs: out }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}
