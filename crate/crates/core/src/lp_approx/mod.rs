//! Best polynomial approximation of bounded degree in `L^p` over a ball.
//!
//! All solvers work in the basis of monomials in `(x - x0) / r`, so the
//! design matrix has entries in `[-1, 1]` at every radius, and rescale to
//! the centered expansion on return.

mod irls;
mod jet;
mod minimax;

pub use jet::PolyJet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multi_index;
use crate::signals::{BallSamples, SampledFunction};

/// Ball `B(x, r)` together with the integrability exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub x: Vec<f64>,
    pub r: f64,
    pub p: f64,
}

impl BallSpec {
    pub fn new(x: &[f64], r: f64, p: f64) -> Self {
        BallSpec { x: x.to_vec(), r, p }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestPoly {
    pub jet: PolyJet,
    pub residual: f64,
    /// Solver iterations (0 for closed-form paths).
    pub iterations: usize,
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("exponent p = {p} must lie in [1, inf]")));
    }
    Ok(())
}

/// `L^p` norm of samples with quadrature weights `weights`.
pub fn weighted_lp_norm(values: &[f64], p: f64, weights: &[f64]) -> f64 {
    if p.is_infinite() {
        return lp_norm(values, p, 1.0);
    }
    let m = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v.abs() / m).powf(p))
        .sum();
    m * s.powf(1.0 / p)
}

/// Riemann-sum `L^p` norm of samples with the given cell volume.
pub fn lp_norm(values: &[f64], p: f64, cell_volume: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 2.0 {
        (values.iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt()
    } else if p == 1.0 {
        values.iter().map(|v| v.abs()).sum::<f64>() * cell_volume
    } else {
        // factor out the maximum to keep |v|^p in range
        let m = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        let s: f64 = values.iter().map(|v| (v.abs() / m).powf(p)).sum();
        m * (s * cell_volume).powf(1.0 / p)
    }
}

pub fn lp_ball_norm(f: &SampledFunction, ball: &BallSpec) -> Result<f64> {
    check_exponent(ball.p)?;
    let s = f.ball(&ball.x, ball.r)?;
    Ok(weighted_lp_norm(&s.values, ball.p, &s.weights))
}

pub fn eval_jet(jet: &PolyJet, x: &[f64]) -> f64 {
    jet.eval(x)
}

pub fn best_poly(f: &SampledFunction, ball: &BallSpec, n: usize) -> Result<BestPoly> {
    let s = f.ball(&ball.x, ball.r)?;
    best_poly_samples(&s, &ball.x, ball.r, ball.p, n)
}

/// [`best_poly`] on pre-extracted ball samples (offsets relative to `x`).
pub fn best_poly_samples(
    s: &BallSamples,
    x: &[f64],
    r: f64,
    p: f64,
    n: usize,
) -> Result<BestPoly> {
    check_exponent(p)?;
    if p < 1.1 {
        return Err(Error::InvalidArgument(format!(
            "best approximation for p = {p} < 1.1 is not supported"
        )));
    }
    let dim = x.len();
    let alphas = multi_index::all(dim, n);
    let m = alphas.len();
    if s.len() < m {
        return Err(Error::InsufficientSamples {
            found: s.len(),
            needed: m,
        });
    }
    let a = DMatrix::from_fn(s.len(), m, |i, k| {
        let y = [s.offsets[i][0] / r, s.offsets[i][1] / r];
        multi_index::monomial(&y, alphas[k])
    });
    let b = DVector::from_column_slice(&s.values);
    // rows scaled by w^{1/p} turn the weighted objective into a plain one
    let row_scale: Vec<f64> = if p.is_finite() {
        s.weights.iter().map(|w| w.powf(1.0 / p)).collect()
    } else {
        vec![1.0; s.len()]
    };
    let aw = DMatrix::from_fn(s.len(), m, |i, k| row_scale[i] * a[(i, k)]);
    let bw = DVector::from_fn(s.len(), |i, _| row_scale[i] * b[i]);

    let unscale = |c: &DVector<f64>| -> Vec<f64> {
        alphas
            .iter()
            .zip(c.iter())
            .map(|(al, ck)| ck / r.powi(multi_index::order(*al) as i32))
            .collect()
    };
    let finish = |c: &DVector<f64>, iterations: usize| -> Result<BestPoly> {
        let resid = &b - &a * c;
        Ok(BestPoly {
            jet: PolyJet::new(x.to_vec(), n, unscale(c))?,
            residual: weighted_lp_norm(resid.as_slice(), p, &s.weights),
            iterations,
        })
    };

    if p.is_infinite() && n == 0 {
        let (lo, hi) = s
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        let mid = 0.5 * (lo + hi);
        return Ok(BestPoly {
            jet: PolyJet::new(x.to_vec(), 0, vec![mid])?,
            residual: 0.5 * (hi - lo),
            iterations: 0,
        });
    }

    if p.is_infinite() {
        least_squares(&a, &b)?; // rank check
        let sol = minimax::solve(&a, &s.values)?;
        return finish(&sol.coeffs, sol.iterations);
    }
    let ls = least_squares(&aw, &bw)?;
    if p == 2.0 {
        return finish(&ls, 0);
    }
    match irls::solve(&aw, &bw, p, ls) {
        Ok(sol) => finish(&sol.coeffs, sol.iterations),
        Err(Error::IterationLimit {
            iterations,
            residual,
            last_coeffs,
        }) => Err(Error::IterationLimit {
            iterations,
            residual,
            last_coeffs: unscale(&DVector::from_vec(last_coeffs)),
        }),
        Err(e) => Err(e),
    }
}

/// Householder QR least squares with a relative rank check.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let qr = a.clone().qr();
    let rmat = qr.r();
    let diag: Vec<f64> = rmat.diagonal().iter().map(|v| v.abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    if dmax == 0.0 || diag.iter().any(|d| *d <= 1e-10 * dmax) {
        return Err(Error::Conditioning(
            "rank-deficient design: degenerate point configuration".into(),
        ));
    }
    rmat.solve_upper_triangular(&(qr.q().transpose() * b))
        .ok_or_else(|| Error::Conditioning("singular triangular factor".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{from_fn, GridSpec};
    use approx::assert_relative_eq;

    fn line(n: usize, f: impl Fn(f64) -> f64) -> SampledFunction {
        let g = GridSpec::interval(-1.0, 1.0, n).unwrap();
        from_fn(&g, |x| f(x[0]), "test")
    }

    #[test]
    fn norms_of_simple_functions() {
        let one = line(2001, |_| 1.0);
        assert_eq!(lp_ball_norm(&one, &BallSpec::new(&[0.0], 0.5, f64::INFINITY)).unwrap(), 1.0);
        let l2 = lp_ball_norm(&one, &BallSpec::new(&[0.0], 0.5, 2.0)).unwrap();
        assert_relative_eq!(l2, 1.0, max_relative = 1e-3);
        let id = line(2001, |x| x);
        let v = lp_ball_norm(&id, &BallSpec::new(&[0.0], 1.0, 2.0)).unwrap();
        assert_relative_eq!(v, (2.0f64 / 3.0).sqrt(), max_relative = 2e-3);
        assert!(lp_ball_norm(&id, &BallSpec::new(&[0.0], 1.0, 0.5)).is_err());
    }

    #[test]
    fn polynomial_data_is_reproduced() {
        let f = line(401, |x| 0.5 - x + 2.0 * x * x);
        for p in [2.0, 3.0, f64::INFINITY] {
            let bp = best_poly(&f, &BallSpec::new(&[0.25], 0.5, p), 2).unwrap();
            assert!(bp.residual < 1e-10, "p={p}: {}", bp.residual);
            let expect = PolyJet::new(vec![0.0], 2, vec![0.5, -1.0, 2.0]).unwrap().recenter(&[0.25]);
            for (c, e) in bp.jet.coeffs.iter().zip(&expect.coeffs) {
                assert_relative_eq!(c, e, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn x_squared_projection() {
        let r = 0.5;
        let f = line(4001, |x| x * x);
        let bp = best_poly(&f, &BallSpec::new(&[0.0], r, 2.0), 1).unwrap();
        assert_relative_eq!(bp.jet.coeffs[0], r * r / 3.0, max_relative = 2e-3);
        assert!(bp.jet.coeffs[1].abs() < 1e-12);
    }

    #[test]
    fn abs_best_constant_is_midrange() {
        let r = 0.4;
        let f = line(2001, f64::abs);
        let bp = best_poly(&f, &BallSpec::new(&[0.0], r, f64::INFINITY), 0).unwrap();
        assert_relative_eq!(bp.jet.coeffs[0], r / 2.0, epsilon = 1e-12);
        assert_relative_eq!(bp.residual, r / 2.0, epsilon = 1e-12);
        // through the LP as well
        let lin = best_poly(&f, &BallSpec::new(&[0.0], r, f64::INFINITY), 1).unwrap();
        assert_relative_eq!(lin.residual, r / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn errors() {
        let f = line(11, f64::sin);
        assert!(matches!(
            best_poly(&f, &BallSpec::new(&[0.0], 0.2, 2.0), 3),
            Err(Error::InsufficientSamples { found: 3, needed: 4 })
        ));
        assert!(best_poly(&f, &BallSpec::new(&[0.0], 0.5, 1.05), 1).is_err());
        // collinear points in the plane cannot determine a plane
        let g = GridSpec {
            origin: vec![0.0, 0.0],
            spacing: 1.0,
            shape: vec![5, 1],
        };
        let s = from_fn(&g, |x| x[0], "rail");
        let b = s.ball(&[2.0, 0.0], 2.0);
        // the ball leaves the one-wide window along the second axis
        assert!(b.is_err());
        let samples = BallSamples {
            offsets: (0..5).map(|i| [i as f64 - 2.0, 0.0]).collect(),
            values: vec![0.0; 5],
            weights: vec![1.0; 5],
            cell_volume: 1.0,
        };
        assert!(matches!(
            best_poly_samples(&samples, &[2.0, 0.0], 2.0, 2.0, 1),
            Err(Error::Conditioning(_))
        ));
    }
}
