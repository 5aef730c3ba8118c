//! Truncated multivariate Taylor arithmetic (one or two variables).
//!
//! Used to differentiate closed-form kernels and partition-of-unity bumps
//! exactly instead of by finite differences. Coefficients are stored as
//! `D^alpha g(y0) / alpha!` in [`multi_index`] order.

use crate::multi_index::{self, MultiIndex};

#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    dim: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl Taylor {
    pub fn constant(dim: usize, order: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; multi_index::count(dim, order)];
        coeffs[0] = value;
        Taylor { dim, order, coeffs }
    }

    /// The coordinate function `y_axis` expanded at `value`.
    pub fn variable(dim: usize, order: usize, axis: usize, value: f64) -> Self {
        let mut t = Self::constant(dim, order, value);
        if order >= 1 {
            let mut alpha = [0, 0];
            alpha[axis] = 1;
            t.coeffs[multi_index::position(dim, alpha)] = 1.0;
        }
        t
    }

    /// From coefficients `D^alpha g(y0) / alpha!` in graded order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), multi_index::count(dim, order), "coefficient count");
        Taylor { dim, order, coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, alpha: MultiIndex) -> f64 {
        self.coeffs[multi_index::position(self.dim, alpha)]
    }

    /// `D^alpha g(y0)`.
    pub fn derivative(&self, alpha: MultiIndex) -> f64 {
        self.coeff(alpha) * multi_index::factorial(alpha)
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }

    pub fn add_const(mut self, c: f64) -> Self {
        self.coeffs[0] += c;
        self
    }

    pub fn add(&self, other: &Taylor) -> Taylor {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Taylor { coeffs, ..*self }
    }

    pub fn mul(&self, other: &Taylor) -> Taylor {
        let idx = multi_index::all(self.dim, self.order);
        let mut out = vec![0.0; idx.len()];
        for (i, a) in idx.iter().enumerate() {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            for (j, b) in idx.iter().enumerate() {
                if multi_index::order(*a) + multi_index::order(*b) > self.order {
                    continue;
                }
                let k = multi_index::position(self.dim, [a[0] + b[0], a[1] + b[1]]);
                out[k] += self.coeffs[i] * other.coeffs[j];
            }
        }
        Taylor {
            coeffs: out,
            ..*self
        }
    }

    fn nilpotent_part(&self) -> Taylor {
        let mut u = self.clone();
        u.coeffs[0] = 0.0;
        u
    }

    /// Composes a univariate function, given its derivatives at the
    /// constant term, with this series.
    fn compose(&self, derivs: &[f64]) -> Taylor {
        let u = self.nilpotent_part();
        let mut out = Taylor::constant(self.dim, self.order, derivs[0]);
        let mut power = Taylor::constant(self.dim, self.order, 1.0);
        let mut kfact = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1).take(self.order) {
            power = power.mul(&u);
            kfact *= k as f64;
            out = out.add(&power.clone().scale(d / kfact));
        }
        out
    }

    pub fn exp(&self) -> Taylor {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn recip(&self) -> Taylor {
        let g0 = self.value();
        // d^k/dx^k (1/x) = (-1)^k k! / x^{k+1}
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut d = 1.0 / g0;
        for k in 0..=self.order {
            derivs.push(d);
            d *= -((k + 1) as f64) / g0;
        }
        self.compose(&derivs)
    }
}

/// Standard bump `exp(-1/(1-|y|^2))` for `|y| < 1`, zero outside, expanded
/// at `y0`. Outside the open unit ball every coefficient is zero.
pub fn bump(dim: usize, order: usize, y0: &[f64]) -> Taylor {
    let s0: f64 = y0.iter().map(|v| v * v).sum();
    if s0 >= 1.0 {
        return Taylor::constant(dim, order, 0.0);
    }
    let mut s = Taylor::constant(dim, order, 0.0);
    for (axis, &v) in y0.iter().enumerate().take(dim) {
        let y = Taylor::variable(dim, order, axis, v);
        s = s.add(&y.mul(&y));
    }
    // 1 - s
    let one_minus = s.scale(-1.0).add_const(1.0);
    one_minus.recip().scale(-1.0).exp()
}

pub fn bump_value(y: &[f64]) -> f64 {
    let s: f64 = y.iter().map(|v| v * v).sum();
    if s >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s)).exp()
    }
}
