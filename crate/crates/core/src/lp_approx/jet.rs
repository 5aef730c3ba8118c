use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index::{self, MultiIndex};

/// Polynomial in centered form `P(x) = sum_alpha c_alpha (x - x0)^alpha` with
/// `c_alpha = D^alpha P(x0) / alpha!`. Coefficients follow
/// [`multi_index`] graded order and are zero-filled up to `degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJet {
    pub center: Vec<f64>,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl PolyJet {
    pub fn new(center: Vec<f64>, degree: usize, mut coeffs: Vec<f64>) -> Result<Self> {
        let dim = center.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!("jet dimension {dim} not in {{1, 2}}")));
        }
        let n = multi_index::count(dim, degree);
        if coeffs.len() > n {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients given for degree {degree} in dimension {dim} (max {n})",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite jet coefficient".into()));
        }
        coeffs.resize(n, 0.0);
        Ok(PolyJet {
            center,
            degree,
            coeffs,
        })
    }

    pub fn zero(center: Vec<f64>, degree: usize) -> Self {
        let n = multi_index::count(center.len(), degree);
        PolyJet {
            center,
            degree,
            coeffs: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn coeff(&self, alpha: MultiIndex) -> f64 {
        if multi_index::order(alpha) > self.degree {
            return 0.0;
        }
        self.coeffs[multi_index::position(self.dim(), alpha)]
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let dim = self.dim();
        let y = [x[0] - self.center[0], if dim == 2 { x[1] - self.center[1] } else { 0.0 }];
        self.eval_offset(&y)
    }

    /// Evaluates at `x0 + y`.
    pub fn eval_offset(&self, y: &[f64]) -> f64 {
        if self.dim() == 1 {
            // Horner
            self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y[0] + c)
        } else {
            multi_index::all(2, self.degree)
                .iter()
                .zip(&self.coeffs)
                .map(|(a, c)| c * multi_index::monomial(y, *a))
                .sum()
        }
    }

    /// `D^beta P(x)`.
    pub fn derivative(&self, beta: MultiIndex, x: &[f64]) -> f64 {
        let dim = self.dim();
        let y = [x[0] - self.center[0], if dim == 2 { x[1] - self.center[1] } else { 0.0 }];
        multi_index::all(dim, self.degree)
            .iter()
            .zip(&self.coeffs)
            .filter(|(a, _)| multi_index::le(beta, **a))
            .map(|(a, c)| {
                let falling = |n: usize, k: usize| (0..k).map(|i| (n - i) as f64).product::<f64>();
                let rest = [a[0] - beta[0], a[1] - beta[1]];
                c * falling(a[0], beta[0]) * falling(a[1], beta[1]) * multi_index::monomial(&y, rest)
            })
            .sum()
    }

    /// The same polynomial re-expanded around `center`.
    pub fn recenter(&self, center: &[f64]) -> PolyJet {
        let dim = self.dim();
        let coeffs = multi_index::all(dim, self.degree)
            .into_iter()
            .map(|a| self.derivative(a, center) / multi_index::factorial(a))
            .collect();
        PolyJet {
            center: center.to_vec(),
            degree: self.degree,
            coeffs,
        }
    }

    pub fn scaled(&self, lambda: f64) -> PolyJet {
        PolyJet {
            coeffs: self.coeffs.iter().map(|c| c * lambda).collect(),
            ..self.clone()
        }
    }
}
