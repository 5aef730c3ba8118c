use serde::{Deserialize, Serialize};

use super::BoydExpr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMethod {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoydIndices {
    pub lower: f64,
    pub upper: f64,
    pub method: IndexMethod,
    pub uncertainty: f64,
}

/// Geometric grid of dilation parameters `s` used for the supremum in
/// `sup_s phi(st)/phi(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

impl Default for DilationGrid {
    fn default() -> Self {
        DilationGrid {
            s_min: 1e-12,
            s_max: 1e12,
            points: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dilation {
    pub value: f64,
    /// True when the closed form was used (pure powers).
    pub exact: bool,
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
    pub argmax: f64,
}

/// `phi_bar(t) = sup_{s>0} phi(st)/phi(s)`.
///
/// Pure powers use `t^u`. Otherwise the supremum is taken over the
/// geometric grid together with `s = 1` and `s = 1/t`, where the iterated
/// logarithms have their kinks.
pub fn dilation(phi: &BoydExpr, t: f64, grid: &DilationGrid) -> Result<Dilation> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("dilation at non-positive t = {t}")));
    }
    let nf = phi.normal_form();
    if nf.logs.is_empty() {
        return Ok(Dilation {
            value: t.powf(nf.power),
            exact: true,
            s_min: grid.s_min,
            s_max: grid.s_max,
            points: 0,
            argmax: 1.0,
        });
    }
    let ratio = |s: f64| phi.log_eval_unchecked(s * t) - phi.log_eval_unchecked(s);
    let (best, best_s) = grid_sup(ratio, t, &[1.0, 1.0 / t], grid)?;
    let n = grid.points.max(2);
    Ok(Dilation {
        value: best.exp(),
        exact: false,
        s_min: grid.s_min,
        s_max: grid.s_max,
        points: n,
        argmax: best_s,
    })
}

/// Supremum of `log_ratio` over the geometric grid plus `extra` points.
/// An argmax on a grid edge that still increases outward means the
/// supremum lies beyond the grid.
fn grid_sup<F: Fn(f64) -> f64>(
    log_ratio: F,
    t: f64,
    extra: &[f64],
    grid: &DilationGrid,
) -> Result<(f64, f64)> {
    let (lo, hi) = (grid.s_min.ln(), grid.s_max.ln());
    let n = grid.points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| (lo + step * i as f64).exp();

    let mut best = f64::NEG_INFINITY;
    let mut best_s = 1.0;
    let mut best_idx = None;
    for i in 0..n {
        let v = log_ratio(at(i));
        if v > best {
            best = v;
            best_s = at(i);
            best_idx = Some(i);
        }
    }
    for &s in extra {
        let v = log_ratio(s);
        if v > best {
            best = v;
            best_s = s;
            best_idx = None;
        }
    }
    let edge = match best_idx {
        Some(0) => Some(1),
        Some(i) if i == n - 1 => Some(n - 2),
        _ => None,
    };
    if let Some(j) = edge {
        if best - log_ratio(at(j)) > 1e-12 * (1.0 + best.abs()) {
            return Err(Error::UnboundedDilation { t, s: best_s });
        }
    }
    if !best.is_finite() {
        return Err(Error::UnboundedDilation { t, s: best_s });
    }
    Ok((best, best_s))
}

/// Exact indices from the normal form: iterated logarithms are slowly
/// varying, so both indices equal the power exponent.
pub fn indices(phi: &BoydExpr) -> BoydIndices {
    let u = phi.normal_form().power;
    BoydIndices {
        lower: u,
        upper: u,
        method: IndexMethod::Exact,
        uncertainty: 0.0,
    }
}

/// Indices from the limit definitions: least-squares slope of
/// `log phi_bar(t)` against `log t` over `t = 2^{-10..-40}` (lower) and
/// `t = 2^{10..40}` (upper). The uncertainty is the largest fit residual
/// converted to slope units (divided by half the `log t` span).
pub fn numeric_indices(phi: &BoydExpr, grid: &DilationGrid) -> Result<BoydIndices> {
    let fit = |sign: f64| -> Result<(f64, f64)> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 10..=40 {
            let t = 2f64.powf(sign * k as f64);
            let d = dilation(phi, t, grid)?;
            xs.push(t.ln());
            ys.push(d.value.ln());
        }
        let (slope, intercept) = least_squares_line(&xs, &ys);
        if !slope.is_finite() {
            return Err(Error::IndexEstimation(format!(
                "non-finite slope fitting log dilation (t -> {})",
                if sign < 0.0 { "0" } else { "inf" }
            )));
        }
        let max_resid = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - slope * x - intercept).abs())
            .fold(0.0, f64::max);
        let half_span = 0.5 * (xs[xs.len() - 1] - xs[0]).abs();
        Ok((slope, max_resid / half_span))
    };
    let (lower, ul) = fit(-1.0)?;
    let (upper, uu) = fit(1.0)?;
    let uncertainty = ul.max(uu);
    if lower > upper + uncertainty + 1e-12 {
        return Err(Error::IndexEstimation(format!(
            "lower index estimate {lower} exceeds upper {upper} beyond uncertainty {uncertainty}"
        )));
    }
    Ok(BoydIndices {
        lower,
        upper,
        method: IndexMethod::Numeric,
        uncertainty,
    })
}

pub(crate) fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Whether `lower index > -d/p`. Numeric indices that straddle the
/// threshold within their uncertainty yield [`Error::Indeterminate`].
pub fn admissible(ind: &BoydIndices, p: f64, dim: usize) -> Result<bool> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidArgument(format!("dimension {dim} not in {{1, 2}}")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must be in [1, inf]")));
    }
    let threshold = -(dim as f64) / p;
    match ind.method {
        IndexMethod::Exact => Ok(ind.lower > threshold),
        IndexMethod::Numeric => {
            if ind.lower - ind.uncertainty > threshold {
                Ok(true)
            } else if ind.lower + ind.uncertainty <= threshold {
                Ok(false)
            } else {
                Err(Error::Indeterminate {
                    lower: ind.lower,
                    uncertainty: ind.uncertainty,
                    threshold,
                })
            }
        }
    }
}

/// The unique `n >= 0` with `n < lower <= upper < n + 1`.
pub fn fractional_band(ind: &BoydIndices) -> Result<usize> {
    let n = ind.lower.floor();
    if n >= 0.0 && ind.lower > n && ind.upper < n + 1.0 {
        Ok(n as usize)
    } else {
        Err(Error::NoBand {
            lower: ind.lower,
            upper: ind.upper,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boyd::parse;
    use approx::assert_relative_eq;

    fn grid() -> DilationGrid {
        DilationGrid::default()
    }

    #[test]
    fn dilation_of_power_is_exact() {
        for &t in &[0.01, 0.5, 1.0, 3.0, 1e5] {
            let d = dilation(&BoydExpr::power(0.7), t, &grid()).unwrap();
            assert!(d.exact);
            assert_relative_eq!(d.value, t.powf(0.7), max_relative = 1e-15);
        }
    }

    #[test]
    fn dilation_at_one_is_one() {
        let phi = parse("t^0.5 * L2^0.5 * L1^-1").unwrap();
        assert_relative_eq!(dilation(&phi, 1.0, &grid()).unwrap().value, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dilation_matches_brute_force() {
        // Brute-force oracle: dense log grid over [1e-12, 1e12], 200k points.
        let phi = parse("t^0.5 * L1").unwrap();
        let t = 0.5;
        let n = 200_000;
        let (lo, hi) = (1e-12f64.ln(), 1e12f64.ln());
        let brute = (0..n)
            .map(|i| {
                let s = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
                phi.eval(s * t).unwrap() / phi.eval(s).unwrap()
            })
            .fold(0.0, f64::max);
        let d = dilation(&phi, t, &grid()).unwrap();
        assert!(d.value >= 0.5f64.sqrt());
        assert!(d.value.is_finite());
        assert!(d.value >= brute * (1.0 - 1e-9));
        assert_relative_eq!(d.value, brute, max_relative = 1e-3);
    }

    #[test]
    fn growth_at_grid_edge_is_reported() {
        let g = DilationGrid {
            s_min: 1e-3,
            s_max: 1e3,
            points: 64,
        };
        let r = grid_sup(|s: f64| s.ln(), 0.5, &[], &g);
        assert!(matches!(r, Err(Error::UnboundedDilation { .. })), "{r:?}");
        let (v, s) = grid_sup(|s: f64| -(s.ln()).powi(2), 0.5, &[1.0], &g).unwrap();
        assert_eq!((v, s), (0.0, 1.0));
    }

    #[test]
    fn exact_and_numeric_indices() {
        for u in [-0.5, 0.3, 1.0, 2.5] {
            let phi = BoydExpr::power(u);
            let e = indices(&phi);
            assert_eq!((e.lower, e.upper, e.method), (u, u, IndexMethod::Exact));
            let n = numeric_indices(&phi, &grid()).unwrap();
            assert!((n.lower - u).abs() < 1e-9 && (n.upper - u).abs() < 1e-9);
        }
    }

    #[test]
    fn lil_weight_numeric_indices() {
        let n = numeric_indices(&BoydExpr::brownian_lil(), &grid()).unwrap();
        assert!((n.lower - 0.5).abs() < 1e-2, "{n:?}");
        assert!((n.upper - 0.5).abs() < 1e-2, "{n:?}");
        assert!(n.lower <= n.upper + n.uncertainty);
    }

    #[test]
    fn admissibility() {
        let a = |phi: &BoydExpr| admissible(&indices(phi), 2.0, 1).unwrap();
        assert!(a(&BoydExpr::power(0.5)));
        assert!(!a(&BoydExpr::power(-1.0)));
        let n = numeric_indices(&BoydExpr::brownian_lil(), &grid()).unwrap();
        assert!(admissible(&n, 2.0, 1).unwrap());
        let straddle = BoydIndices {
            lower: -0.5,
            upper: -0.5,
            method: IndexMethod::Numeric,
            uncertainty: 0.01,
        };
        assert!(matches!(
            admissible(&straddle, 2.0, 1),
            Err(Error::Indeterminate { .. })
        ));
    }

    #[test]
    fn bands() {
        let band = |u: f64| fractional_band(&indices(&BoydExpr::power(u)));
        assert_eq!(band(0.5).unwrap(), 0);
        assert_eq!(band(1.5).unwrap(), 1);
        assert!(matches!(band(1.0), Err(Error::NoBand { .. })));
        assert!(matches!(band(-0.25), Err(Error::NoBand { .. })));
        assert_eq!(fractional_band(&indices(&BoydExpr::brownian_lil())).unwrap(), 0);
    }

    #[test]
    fn power_scales_indices() {
        let phi = BoydExpr::power(0.4);
        let i3 = indices(&phi.pow(3.0).unwrap());
        assert_relative_eq!(i3.lower, 1.2, epsilon = 1e-15);
        let lil = BoydExpr::brownian_lil();
        let a = numeric_indices(&lil, &grid()).unwrap();
        let b = numeric_indices(&lil.pow(2.0).unwrap(), &grid()).unwrap();
        assert!((b.lower - 2.0 * a.lower).abs() <= 2.0 * a.uncertainty + b.uncertainty + 1e-12);
    }

    #[test]
    fn dilation_dominates_eval_and_is_submultiplicative() {
        let phi = parse("t^0.5 * L2^0.5").unwrap();
        let ts = [1e-4, 0.01, 0.3, 2.0, 50.0, 1e3];
        for &t1 in &ts {
            let d1 = dilation(&phi, t1, &grid()).unwrap().value;
            assert!(d1 >= phi.eval(t1).unwrap() * (1.0 - 1e-12));
            for &t2 in &ts {
                let d2 = dilation(&phi, t2, &grid()).unwrap().value;
                let d12 = dilation(&phi, t1 * t2, &grid()).unwrap().value;
                assert!(d12 <= d1 * d2 * (1.0 + 1e-6), "t1={t1} t2={t2}");
            }
        }
    }

    #[test]
    fn positive_lower_index_gives_decay() {
        let phi = BoydExpr::brownian_lil();
        let vals: Vec<f64> = (1..40).map(|k| phi.eval(2f64.powi(-k)).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(*vals.last().unwrap() < 1e-4);
    }
}
