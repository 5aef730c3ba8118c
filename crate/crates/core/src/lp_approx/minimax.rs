//! Discrete Chebyshev (minimax) fitting as a linear program.
//!
//! The primal problem `min e  s.t. |b_i - a_i . c| <= e` is solved through
//! its dual
//!
//! ```text
//! max  sum_i b_i (u_i - v_i)
//! s.t. sum_i (u_i - v_i) a_i = 0,   sum_i (u_i + v_i) = 1,   u, v >= 0
//! ```
//!
//! which has only `m + 1` rows. The simplex multipliers of the optimal
//! basis are exactly `(c, e)`, and pricing a column reduces to comparing
//! `|b_i - a_i . c|` with `e`, so each iteration is a Remez-style exchange
//! that also works for non-Haar systems (polynomials in the plane).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 20_000;
const BLAND_AFTER_STALL: usize = 50;

pub struct Minimax {
    pub coeffs: DVector<f64>,
    pub error: f64,
    pub iterations: usize,
}

struct Lp<'a> {
    a: &'a DMatrix<f64>,
    b: &'a [f64],
    m: usize,
    n: usize,
}

impl Lp<'_> {
    fn rows(&self) -> usize {
        self.m + 1
    }

    /// Structural columns `0..2n` then artificials `2n..2n+m+1`.
    fn column(&self, j: usize) -> DVector<f64> {
        let mut col = DVector::zeros(self.rows());
        if j < 2 * self.n {
            let (i, sign) = if j < self.n { (j, 1.0) } else { (j - self.n, -1.0) };
            for k in 0..self.m {
                col[k] = sign * self.a[(i, k)];
            }
            col[self.m] = 1.0;
        } else {
            col[j - 2 * self.n] = 1.0;
        }
        col
    }

    fn cost(&self, j: usize, phase_one: bool) -> f64 {
        if phase_one {
            if j >= 2 * self.n {
                -1.0
            } else {
                0.0
            }
        } else if j < self.n {
            self.b[j]
        } else if j < 2 * self.n {
            -self.b[j - self.n]
        } else {
            0.0
        }
    }
}

pub fn solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Minimax> {
    let (n, m) = a.shape();
    let scale = b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return Ok(Minimax {
            coeffs: DVector::zeros(m),
            error: 0.0,
            iterations: 0,
        });
    }
    let bs: Vec<f64> = b.iter().map(|v| v / scale).collect();
    let lp = Lp { a, b: &bs, m, n };
    let rows = lp.rows();
    let mut basis: Vec<usize> = (0..rows).map(|k| 2 * n + k).collect();
    let mut rhs = DVector::zeros(rows);
    rhs[m] = 1.0;

    let mut iterations = 0;
    for phase_one in [true, false] {
        iterations += run_phase(&lp, &mut basis, &rhs, phase_one)?;
        if phase_one {
            drive_out_artificials(&lp, &mut basis)?;
        }
    }

    let binv = basis_inverse(&lp, &basis)?;
    let cb = DVector::from_iterator(rows, basis.iter().map(|&j| lp.cost(j, false)));
    let y = binv.transpose() * cb;
    let coeffs = DVector::from_iterator(m, (0..m).map(|k| y[k] * scale));
    let mut c = Minimax {
        coeffs,
        error: y[m] * scale,
        iterations,
    };
    let xb = &binv * &rhs;
    min_norm_on_optimal_face(a, b, &lp, &basis, &xb, &mut c);
    c.error = max_abs_residual(a, b, &c.coeffs);
    Ok(c)
}

fn basis_inverse(lp: &Lp, basis: &[usize]) -> Result<DMatrix<f64>> {
    let rows = lp.rows();
    let mut bm = DMatrix::zeros(rows, rows);
    for (k, &j) in basis.iter().enumerate() {
        bm.set_column(k, &lp.column(j));
    }
    bm.try_inverse()
        .ok_or_else(|| Error::Conditioning("singular simplex basis".into()))
}

fn run_phase(lp: &Lp, basis: &mut [usize], rhs: &DVector<f64>, phase_one: bool) -> Result<usize> {
    let rows = lp.rows();
    let total = 2 * lp.n + if phase_one { rows } else { 0 };
    let tol = 1e-11;
    let mut best_obj = f64::NEG_INFINITY;
    let mut stall = 0;
    for it in 0..MAX_ITERATIONS {
        let binv = basis_inverse(lp, basis)?;
        let xb = &binv * rhs;
        let cb = DVector::from_iterator(rows, basis.iter().map(|&j| lp.cost(j, phase_one)));
        let obj = cb.dot(&xb);
        if obj > best_obj + 1e-14 {
            best_obj = obj;
            stall = 0;
        } else {
            stall += 1;
        }
        let bland = stall > BLAND_AFTER_STALL;
        let y = binv.transpose() * &cb;
        let ya = y.rows(0, lp.m);
        let ylast = y[lp.m];

        // pricing
        let mut entering = None;
        let mut best = tol;
        let in_basis = |j: usize| basis.contains(&j);
        for i in 0..lp.n {
            let fit: f64 = (0..lp.m).map(|k| lp.a[(i, k)] * ya[k]).sum();
            let r = if phase_one { 0.0 } else { lp.b[i] - fit };
            // reduced costs of u_i and v_i
            let du = if phase_one { -(fit + ylast) } else { r - ylast };
            let dv = if phase_one { fit - ylast } else { -r - ylast };
            for (j, d) in [(i, du), (lp.n + i, dv)] {
                if d > best && !in_basis(j) {
                    if bland {
                        if entering.is_none_or(|e| j < e) {
                            entering = Some(j);
                        }
                    } else {
                        best = d;
                        entering = Some(j);
                    }
                }
            }
        }
        if phase_one {
            for j in 2 * lp.n..total {
                let d = lp.cost(j, true) - y.dot(&lp.column(j));
                if d > best && !in_basis(j) && !bland {
                    best = d;
                    entering = Some(j);
                }
            }
        }
        let Some(q) = entering else {
            return Ok(it);
        };

        let alpha = &binv * lp.column(q);
        let mut leave: Option<(usize, f64)> = None;
        for k in 0..rows {
            if alpha[k] > 1e-12 {
                let ratio = xb[k].max(0.0) / alpha[k];
                let better = match leave {
                    None => true,
                    Some((l, r)) => {
                        ratio < r - 1e-15 || (ratio <= r + 1e-15 && basis[k] < basis[l])
                    }
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
        }
        let Some((k, _)) = leave else {
            return Err(Error::Conditioning("unbounded minimax dual".into()));
        };
        basis[k] = q;
    }
    Err(Error::IterationLimit {
        iterations: MAX_ITERATIONS,
        residual: f64::NAN,
        last_coeffs: Vec::new(),
    })
}

fn drive_out_artificials(lp: &Lp, basis: &mut [usize]) -> Result<()> {
    for k in 0..basis.len() {
        if basis[k] < 2 * lp.n {
            continue;
        }
        let binv = basis_inverse(lp, basis)?;
        let row = binv.row(k);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..2 * lp.n {
            if basis.contains(&j) {
                continue;
            }
            let v = (row * lp.column(j))[0].abs();
            if v > 1e-9 && best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, _)) => basis[k] = j,
            None => {
                return Err(Error::Conditioning(
                    "degenerate point configuration for minimax fit".into(),
                ))
            }
        }
    }
    Ok(())
}

fn max_abs_residual(a: &DMatrix<f64>, b: &[f64], c: &DVector<f64>) -> f64 {
    let fit = a * c;
    b.iter().zip(fit.iter()).fold(0.0, |m, (bi, fi)| m.max((bi - fi).abs()))
}

/// Among minimax optima, moves toward the minimum-norm point of the face
/// fixed by the dual support, as far as the remaining constraints allow.
/// A no-op when the support determines `c` (always so for the Haar case).
fn min_norm_on_optimal_face(
    a: &DMatrix<f64>,
    b: &[f64],
    lp: &Lp,
    basis: &[usize],
    xb: &DVector<f64>,
    sol: &mut Minimax,
) {
    let m = lp.m;
    let support: Vec<usize> = basis
        .iter()
        .zip(xb.iter())
        .filter(|(&j, &x)| j < 2 * lp.n && x > 1e-12)
        .map(|(&j, _)| if j < lp.n { j } else { j - lp.n })
        .collect();
    let mut rows = DMatrix::zeros(support.len().max(1), m);
    for (r, &i) in support.iter().enumerate() {
        rows.set_row(r, &a.row(i));
    }
    let svd = rows.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
    if rank >= m {
        return;
    }
    // the minimum-norm point of the face is the row-space component of c
    let mut d = DVector::zeros(m);
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-10 * smax {
            let v = vt.row(k).transpose();
            d += &v * v.dot(&sol.coeffs);
        }
    }
    let dir = &d - &sol.coeffs;
    let e = sol.error * (1.0 + 1e-12) + 1e-300;
    let base = a * &sol.coeffs;
    let step = a * &dir;
    let mut tmax = 1.0f64;
    for i in 0..lp.n {
        let r0 = b[i] - base[i];
        let g = -step[i];
        if g > 0.0 {
            tmax = tmax.min(((e - r0) / g).max(0.0));
        } else if g < 0.0 {
            tmax = tmax.min(((-e - r0) / g).max(0.0));
        }
    }
    sol.coeffs += dir * tmax;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn design(xs: &[f64], m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), m, |i, k| xs[i].powi(k as i32))
    }

    #[test]
    fn best_constant_is_midrange() {
        let xs: Vec<f64> = (0..101).map(|i| -1.0 + 0.02 * i as f64).collect();
        let b: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let s = solve(&design(&xs, 1), &b).unwrap();
        assert_relative_eq!(s.coeffs[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.error, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn chebyshev_alternation_for_x_squared() {
        // best linear approximation of x^2 on [-1, 1] is 1/2 with error 1/2
        let xs: Vec<f64> = (0..201).map(|i| -1.0 + 0.01 * i as f64).collect();
        let b: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let s = solve(&design(&xs, 2), &b).unwrap();
        assert_relative_eq!(s.coeffs[0], 0.5, epsilon = 1e-10);
        assert_relative_eq!(s.coeffs[1], 0.0, epsilon = 1e-10);
        assert_relative_eq!(s.error, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn exact_polynomial_has_zero_error() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
        let b: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x).collect();
        let s = solve(&design(&xs, 3), &b).unwrap();
        assert!(s.error < 1e-12);
        assert_relative_eq!(s.coeffs[2], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn matches_brute_force_on_small_instances() {
        // brute force over the candidate (m+1)-point reference sets: for a
        // Haar system the minimax error is the max over references of the
        // levelled error.
        let xs = [-1.0, -0.6, -0.1, 0.3, 0.7, 1.0];
        let b = [0.3, -0.2, 0.9, 0.1, -0.5, 0.4];
        let s = solve(&design(&xs, 2), &b).unwrap();
        let mut best = 0.0f64;
        for i in 0..6 {
            for j in i + 1..6 {
                for k in j + 1..6 {
                    let idx = [i, j, k];
                    // solve b = c0 + c1 x + (-1)^l h
                    let m = nalgebra::Matrix3::from_fn(|r, c| match c {
                        0 => 1.0,
                        1 => xs[idx[r]],
                        _ => if r % 2 == 0 { 1.0 } else { -1.0 },
                    });
                    let v = nalgebra::Vector3::new(b[i], b[j], b[k]);
                    let sol = m.lu().solve(&v).unwrap();
                    best = best.max(sol[2].abs());
                }
            }
        }
        assert_relative_eq!(s.error, best, epsilon = 1e-10);
    }

    #[test]
    fn two_dimensional_design() {
        // plane fit over a 5x5 lattice of a saddle
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                pts.push((i as f64 / 2.0 - 1.0, j as f64 / 2.0 - 1.0));
            }
        }
        let a = DMatrix::from_fn(pts.len(), 3, |r, c| match c {
            0 => 1.0,
            1 => pts[r].0,
            _ => pts[r].1,
        });
        let b: Vec<f64> = pts.iter().map(|(x, y)| x * y).collect();
        let s = solve(&a, &b).unwrap();
        assert_relative_eq!(s.error, 1.0, epsilon = 1e-10);
        // minimum-norm optimum among the family of optimal planes is 0
        assert!(s.coeffs.norm() < 1e-9, "{:?}", s.coeffs);
    }
}
