//! Multi-indices in one or two variables, in graded order.
//!
//! Degree-`k` indices in two variables are listed as `(k,0), (k-1,1), ..., (0,k)`,
//! so the position of `(a, b)` is `k(k+1)/2 + b` with `k = a + b`. In one
//! variable the second component is always zero and the position is `a`.

pub type MultiIndex = [usize; 2];

/// Number of monomials of total degree at most `degree` in `dim` variables.
pub fn count(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        2 => (degree + 1) * (degree + 2) / 2,
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub fn position(dim: usize, alpha: MultiIndex) -> usize {
    match dim {
        1 => alpha[0],
        _ => {
            let k = alpha[0] + alpha[1];
            k * (k + 1) / 2 + alpha[1]
        }
    }
}

pub fn all(dim: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(count(dim, degree));
    for k in 0..=degree {
        if dim == 1 {
            out.push([k, 0]);
        } else {
            for b in 0..=k {
                out.push([k - b, b]);
            }
        }
    }
    out
}

#[inline]
pub fn order(alpha: MultiIndex) -> usize {
    alpha[0] + alpha[1]
}

pub fn factorial(alpha: MultiIndex) -> f64 {
    fact(alpha[0]) * fact(alpha[1])
}

pub fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `y^alpha` for a point in one or two dimensions.
#[inline]
pub fn monomial(y: &[f64], alpha: MultiIndex) -> f64 {
    let mut v = powi(y[0], alpha[0]);
    if alpha[1] > 0 {
        v *= powi(y[1], alpha[1]);
    }
    v
}

#[inline]
fn powi(x: f64, k: usize) -> f64 {
    x.powi(k as i32)
}

/// Componentwise `beta <= alpha`.
#[inline]
pub fn le(beta: MultiIndex, alpha: MultiIndex) -> bool {
    beta[0] <= alpha[0] && beta[1] <= alpha[1]
}

pub fn binomial(alpha: MultiIndex, beta: MultiIndex) -> f64 {
    binom(alpha[0], beta[0]) * binom(alpha[1], beta[1])
}

fn binom(n: usize, k: usize) -> f64 {
    fact(n) / (fact(k) * fact(n - k))
}
