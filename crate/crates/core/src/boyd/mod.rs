//! Boyd weight functions built from powers and iterated logarithms.
//!
//! A weight is a product of `t^u` and `L_k(t)^a`, where
//! `L_1(t) = 1 + |log t|` and `L_{k+1}(t) = 1 + log L_k(t)`. Every primitive
//! equals one at `t = 1`, is positive and continuous on `(0, inf)`, and has a
//! finite dilation function, so every expression is a Boyd function.

mod indices;
mod parse;

pub use indices::{
    admissible, dilation, fractional_band, indices, numeric_indices, BoydIndices, Dilation,
    DilationGrid, IndexMethod,
};
pub use parse::parse;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoydExpr {
    Power(f64),
    LogFactor { depth: u32, exponent: f64 },
    Product(Vec<BoydExpr>),
    Pow(Box<BoydExpr>, f64),
}

/// `t^power * prod L_k(t)^a_k`, the normal form of every expression.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub power: f64,
    /// `(depth, exponent)` pairs with distinct depths, sorted by depth.
    pub logs: Vec<(u32, f64)>,
}

/// `L_depth(t)`; always `>= 1`.
pub fn iterated_log(depth: u32, t: f64) -> f64 {
    let mut l = 1.0 + t.ln().abs();
    for _ in 1..depth {
        l = 1.0 + l.ln();
    }
    l
}

impl BoydExpr {
    pub fn power(u: f64) -> Self {
        BoydExpr::Power(u)
    }

    pub fn log_factor(depth: u32, exponent: f64) -> Self {
        BoydExpr::LogFactor { depth, exponent }
    }

    /// The weight used for the Brownian iterated-logarithm modulus,
    /// `t^{1/2} L_2(t)^{1/2}`.
    pub fn brownian_lil() -> Self {
        BoydExpr::Product(vec![Self::power(0.5), Self::log_factor(2, 0.5)])
    }

    pub fn times(self, other: BoydExpr) -> Self {
        let mut factors = match self {
            BoydExpr::Product(v) => v,
            e => vec![e],
        };
        match other {
            BoydExpr::Product(v) => factors.extend(v),
            e => factors.push(e),
        }
        BoydExpr::Product(factors)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoydExpr::Power(u) if !u.is_finite() => {
                Err(Error::Domain(format!("non-finite exponent {u}")))
            }
            BoydExpr::LogFactor { depth, .. } if *depth == 0 => {
                Err(Error::Domain("iterated log depth must be >= 1".into()))
            }
            BoydExpr::LogFactor { exponent, .. } if !exponent.is_finite() => {
                Err(Error::Domain(format!("non-finite exponent {exponent}")))
            }
            BoydExpr::Product(v) => v.iter().try_for_each(|e| e.validate()),
            BoydExpr::Pow(e, q) => {
                if !q.is_finite() {
                    return Err(Error::Domain(format!("non-finite exponent {q}")));
                }
                e.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn normal_form(&self) -> NormalForm {
        let mut power = 0.0;
        let mut logs: Vec<(u32, f64)> = Vec::new();
        self.accumulate(1.0, &mut power, &mut logs);
        logs.retain(|(_, a)| *a != 0.0);
        logs.sort_by_key(|(k, _)| *k);
        NormalForm { power, logs }
    }

    fn accumulate(&self, scale: f64, power: &mut f64, logs: &mut Vec<(u32, f64)>) {
        match self {
            BoydExpr::Power(u) => *power += scale * u,
            BoydExpr::LogFactor { depth, exponent } => {
                match logs.iter_mut().find(|(k, _)| k == depth) {
                    Some(entry) => entry.1 += scale * exponent,
                    None => logs.push((*depth, scale * exponent)),
                }
            }
            BoydExpr::Product(v) => v.iter().for_each(|e| e.accumulate(scale, power, logs)),
            BoydExpr::Pow(e, q) => e.accumulate(scale * q, power, logs),
        }
    }

    pub fn log_eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("weight evaluated at non-positive t = {t}")));
        }
        Ok(self.log_eval_unchecked(t))
    }

    pub(crate) fn log_eval_unchecked(&self, t: f64) -> f64 {
        match self {
            BoydExpr::Power(u) => u * t.ln(),
            BoydExpr::LogFactor { depth, exponent } => exponent * iterated_log(*depth, t).ln(),
            BoydExpr::Product(v) => v.iter().map(|e| e.log_eval_unchecked(t)).sum(),
            BoydExpr::Pow(e, q) => q * e.log_eval_unchecked(t),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.log_eval(t).map(f64::exp)
    }

    /// Evaluation without the domain check, for callers that already hold a
    /// positive radius.
    pub fn at(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        self.log_eval_unchecked(t).exp()
    }

    /// `phi^q`. Exponents of every primitive scale by `q`.
    pub fn pow(&self, q: f64) -> Result<BoydExpr> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::Domain(format!("power exponent must be positive, got {q}")));
        }
        Ok(self.scaled(q))
    }

    fn scaled(&self, q: f64) -> BoydExpr {
        match self {
            BoydExpr::Power(u) => BoydExpr::Power(u * q),
            BoydExpr::LogFactor { depth, exponent } => BoydExpr::LogFactor {
                depth: *depth,
                exponent: exponent * q,
            },
            BoydExpr::Product(v) => BoydExpr::Product(v.iter().map(|e| e.scaled(q)).collect()),
            BoydExpr::Pow(e, r) => BoydExpr::Pow(e.clone(), r * q),
        }
    }

    pub fn is_pure_power(&self) -> bool {
        self.normal_form().logs.is_empty()
    }
}

impl fmt::Display for BoydExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoydExpr::Power(u) => write!(f, "t^{u}"),
            BoydExpr::LogFactor { depth, exponent } => write!(f, "L{depth}^{exponent}"),
            BoydExpr::Product(v) => {
                if v.is_empty() {
                    return write!(f, "t^0");
                }
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            BoydExpr::Pow(e, q) => write!(f, "({e})^{q}"),
        }
    }
}

impl std::str::FromStr for BoydExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_power() {
        assert_relative_eq!(BoydExpr::power(0.5).eval(4.0).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_rejects_nonpositive() {
        assert!(matches!(BoydExpr::power(0.5).eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(BoydExpr::power(0.5).eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_lil_weight_at_e_to_minus_e() {
        // (t * (1 + log(1 + e)))^{1/2} at t = e^{-e}, evaluated at 30 digits
        // with mpmath.
        let t = (-std::f64::consts::E).exp();
        let oracle = 0.390_701_414_324_981_2_f64;
        let v = BoydExpr::brownian_lil().eval(t).unwrap();
        assert_relative_eq!(v, oracle, max_relative = 1e-14);
    }

    #[test]
    fn pow_distributes() {
        let phi = BoydExpr::power(0.5).times(BoydExpr::log_factor(1, 1.0));
        let sq = phi.pow(2.0).unwrap();
        assert_eq!(
            sq,
            BoydExpr::Product(vec![BoydExpr::power(1.0), BoydExpr::log_factor(1, 2.0)])
        );
        assert_eq!(BoydExpr::power(0.5).pow(2.0).unwrap(), BoydExpr::power(1.0));
    }

    #[test]
    fn display_round_trips() {
        let phi = parse("t^0.5 * L2^0.5").unwrap();
        assert_eq!(phi.to_string(), "t^0.5 * L2^0.5");
        assert_eq!(parse(&phi.to_string()).unwrap(), phi);
    }

    fn arb_expr() -> impl Strategy<Value = BoydExpr> {
        let leaf = prop_oneof![
            (-3.0f64..3.0).prop_map(BoydExpr::Power),
            (1u32..4, -2.0f64..2.0).prop_map(|(d, a)| BoydExpr::log_factor(d, a)),
        ];
        leaf.prop_recursive(3, 12, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..4).prop_map(BoydExpr::Product),
                (inner, 0.1f64..3.0).prop_map(|(e, q)| BoydExpr::Pow(Box::new(e), q)),
            ]
        })
    }

    proptest! {
        #[test]
        fn normalized_at_one(phi in arb_expr()) {
            prop_assert!((phi.eval(1.0).unwrap() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn positive_and_continuous(phi in arb_expr(), t in 1e-6f64..1e6) {
            let v = phi.eval(t).unwrap();
            prop_assert!(v > 0.0 && v.is_finite());
            let w = phi.eval(t * (1.0 + 1e-9)).unwrap();
            prop_assert!((w - v).abs() <= 1e-6 * v);
        }

        #[test]
        fn normal_form_agrees_with_tree(phi in arb_expr(), t in 1e-6f64..1e6) {
            let nf = phi.normal_form();
            let direct = phi.log_eval(t).unwrap();
            let via_nf = nf.power * t.ln()
                + nf.logs.iter().map(|(k, a)| a * iterated_log(*k, t).ln()).sum::<f64>();
            prop_assert!((direct - via_nf).abs() <= 1e-10 * (1.0 + direct.abs()));
        }
    }
}
