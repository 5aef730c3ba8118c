//! Jet extraction through mollifiers with vanishing moments.
//!
//! The kernel is `K(y) = q(y) * bump(y)` on the unit ball, with `q` of degree
//! at most `n` chosen so that `K` has unit mass and vanishing moments of
//! orders `1..=n`. Then `K_eps * P = P` for every polynomial of degree `<= n`
//! and `D^alpha (K_eps * f)(x)` tends to `D^alpha P_x(x)` as `eps -> 0`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_approx::PolyJet;
use crate::multi_index::{self, MultiIndex};
use crate::quadrature;
use crate::signals::SampledFunction;
use crate::taylor::{self, Taylor};

#[derive(Debug, Clone, PartialEq)]
pub struct MollifierKernel {
    pub degree: usize,
    pub dim: usize,
    /// Coefficients of `q` in graded monomial order.
    pub q: Vec<f64>,
}

fn radial_moment(k: usize) -> f64 {
    quadrature::integrate(
        |rho| rho.powi(k as i32 + 1) * taylor::bump_value(&[rho]),
        0.0,
        1.0,
        64,
        20,
    )
}

/// `int_{|y| < 1} y^alpha bump(y) dy`.
pub fn bump_moment(dim: usize, alpha: MultiIndex) -> f64 {
    if dim == 1 {
        if alpha[0] % 2 == 1 {
            return 0.0;
        }
        let k = alpha[0] as i32;
        2.0 * quadrature::integrate(|y| y.powi(k) * taylor::bump_value(&[y]), 0.0, 1.0, 64, 20)
    } else {
        if alpha[0] % 2 == 1 || alpha[1] % 2 == 1 {
            return 0.0;
        }
        // the trapezoid rule is exact for trigonometric polynomials of low degree
        let m = 64;
        let ang: f64 = (0..m)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                th.cos().powi(alpha[0] as i32) * th.sin().powi(alpha[1] as i32)
            })
            .sum::<f64>()
            * 2.0
            * std::f64::consts::PI
            / m as f64;
        ang * radial_moment(multi_index::order(alpha))
    }
}

pub fn make_kernel(n: usize, d: usize) -> Result<MollifierKernel> {
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidArgument(format!("kernel dimension {d} not in {{1, 2}}")));
    }
    let alphas = multi_index::all(d, n);
    let m = alphas.len();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        bump_moment(d, [alphas[i][0] + alphas[j][0], alphas[i][1] + alphas[j][1]])
    });
    let mut rhs = DVector::zeros(m);
    rhs[0] = 1.0;
    let q = gram
        .cholesky()
        .ok_or_else(|| Error::Conditioning("singular kernel moment matrix".into()))?
        .solve(&rhs);
    Ok(MollifierKernel {
        degree: n,
        dim: d,
        q: q.iter().copied().collect(),
    })
}

/// Shared kernel for `(n, d)`, built on first use.
pub fn kernel(n: usize, d: usize) -> Result<Arc<MollifierKernel>> {
    type Cache = RwLock<HashMap<(usize, usize), Arc<MollifierKernel>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(k) = cache.read().expect("kernel cache poisoned").get(&(n, d)) {
        return Ok(k.clone());
    }
    let k = Arc::new(make_kernel(n, d)?);
    cache
        .write()
        .expect("kernel cache poisoned")
        .entry((n, d))
        .or_insert(k.clone());
    Ok(k)
}

impl MollifierKernel {
    pub fn alphas(&self) -> Vec<MultiIndex> {
        multi_index::all(self.dim, self.degree)
    }

    fn q_value(&self, y: &[f64]) -> f64 {
        self.alphas()
            .iter()
            .zip(&self.q)
            .map(|(a, c)| c * multi_index::monomial(y, *a))
            .sum()
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        let b = taylor::bump_value(&y[..self.dim]);
        if b == 0.0 {
            0.0
        } else {
            self.q_value(y) * b
        }
    }

    /// Expansion of the kernel at `y` up to `order`.
    pub fn taylor(&self, order: usize, y: &[f64]) -> Taylor {
        let b = taylor::bump(self.dim, order, y);
        if b.value() == 0.0 {
            return b;
        }
        let vars: Vec<Taylor> =
            (0..self.dim).map(|a| Taylor::variable(self.dim, order, a, y[a])).collect();
        let mut q = Taylor::constant(self.dim, order, 0.0);
        for (alpha, c) in self.alphas().iter().zip(&self.q) {
            let mut term = Taylor::constant(self.dim, order, *c);
            for (axis, v) in vars.iter().enumerate() {
                for _ in 0..alpha[axis] {
                    term = term.mul(v);
                }
            }
            q = q.add(&term);
        }
        q.mul(&b)
    }

    /// `D^beta K(y)`, differentiated analytically.
    pub fn derivative(&self, beta: MultiIndex, y: &[f64]) -> f64 {
        self.taylor(multi_index::order(beta), y).derivative(beta)
    }

    /// `int y^alpha K(y) dy` from the stored bump moments.
    pub fn moment(&self, alpha: MultiIndex) -> f64 {
        self.alphas()
            .iter()
            .zip(&self.q)
            .map(|(g, c)| c * bump_moment(self.dim, [alpha[0] + g[0], alpha[1] + g[1]]))
            .sum()
    }
}

/// Per-`eps` record of the extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsDiagnostic {
    pub eps: f64,
    /// `D^alpha (K_eps * f)(x) / alpha!` in graded order.
    pub coeffs: Vec<f64>,
    /// Relative size of the discrete moment correction.
    pub correction: f64,
    /// `eps^|alpha| * sum |w|` per multi-index at this scale.
    pub kernel_constant: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetExtraction {
    pub jet: PolyJet,
    pub per_eps: Vec<EpsDiagnostic>,
    /// Extrapolation exponent used per multi-index.
    pub gamma: Vec<f64>,
}

/// Dyadic scales from `256 h` down to `4 h`, keeping those whose ball fits
/// in the window around `x`.
pub fn default_epsilons(f: &SampledFunction, x: &[f64]) -> Vec<f64> {
    let h = f.spacing();
    (0..7)
        .map(|k| h * 256.0 / 2f64.powi(k))
        .filter(|&e| f.contains_ball(x, e))
        .collect()
}

/// Dyadic ladder of `levels` scales from `eps_max` down.
pub fn dyadic_epsilons(eps_max: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| eps_max / 2f64.powi(k as i32)).collect()
}

/// Discrete weights `w_g` with `sum_g w_g f(g) ~ D^alpha (K_eps * f)(x)`,
/// corrected on the grid so that polynomials of degree `<= n` are
/// differentiated exactly.
fn weights(
    k: &MollifierKernel,
    offsets: &[[f64; 2]],
    eps: f64,
    cell: f64,
    alpha: MultiIndex,
) -> Result<(Vec<f64>, f64)> {
    let d = k.dim;
    let na = multi_index::order(alpha);
    let scale = cell / eps.powi((d + na) as i32);
    let alphas = k.alphas();
    let m = alphas.len();
    let mut w = Vec::with_capacity(offsets.len());
    let mut basis = Vec::with_capacity(offsets.len());
    for y in offsets {
        let z = [-y[0] / eps, -y[1] / eps];
        w.push(scale * k.derivative(alpha, &z[..d]));
        basis.push(taylor::bump_value(&z[..d]));
    }
    // scaled moments u^beta with u = (g - x) / eps
    let mono = |i: usize, b: MultiIndex| {
        multi_index::monomial(&[offsets[i][0] / eps, offsets[i][1] / eps], b)
    };
    let mut gram = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for (bi, beta) in alphas.iter().enumerate() {
        let target = if *beta == alpha {
            multi_index::factorial(alpha) / eps.powi(na as i32)
        } else {
            0.0
        };
        let have: f64 = (0..offsets.len()).map(|i| w[i] * mono(i, *beta)).sum();
        rhs[bi] = target - have;
        for (gi, g) in alphas.iter().enumerate() {
            gram[(bi, gi)] = (0..offsets.len())
                .map(|i| basis[i] * mono(i, *g) * mono(i, *beta))
                .sum();
        }
    }
    let lambda = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Conditioning("kernel not resolvable on the grid".into()))?;
    let wnorm: f64 = w.iter().map(|v| v.abs()).sum();
    let mut cnorm = 0.0;
    for i in 0..offsets.len() {
        let c: f64 = alphas.iter().zip(lambda.iter()).map(|(g, l)| l * mono(i, *g)).sum::<f64>()
            * basis[i];
        cnorm += c.abs();
        w[i] += c;
    }
    Ok((w, if wnorm > 0.0 { cnorm / wnorm } else { 0.0 }))
}

/// Extracts the degree-`n` jet of `f` at `x` from mollified derivatives at
/// the given decreasing scales. `lower_index` (the Boyd lower index of the
/// weight, when known) sets the extrapolation exponent
/// `gamma = lower_index - |alpha|`; otherwise `gamma = 1`.
pub fn extract_jet(
    f: &SampledFunction,
    x: &[f64],
    n: usize,
    epsilons: &[f64],
    lower_index: Option<f64>,
) -> Result<JetExtraction> {
    let d = f.dim();
    if x.len() != d {
        return Err(Error::InvalidArgument("point dimension mismatch".into()));
    }
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("no mollification scales".into()));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) || !(epsilons[epsilons.len() - 1] > 0.0) {
        return Err(Error::InvalidArgument("scales must be positive and decreasing".into()));
    }
    let finest = epsilons[epsilons.len() - 1];
    if finest < 3.0 * f.spacing() * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "smallest scale {finest} is below 3 grid cells ({})",
            3.0 * f.spacing()
        )));
    }
    let k = kernel(n, d)?;
    let alphas = k.alphas();
    let mut per_eps = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let s = f.ball(x, eps)?;
        let mut coeffs = Vec::with_capacity(alphas.len());
        let mut kc = Vec::with_capacity(alphas.len());
        let mut corr = 0.0f64;
        for alpha in &alphas {
            let (w, c) = weights(&k, &s.offsets, eps, s.cell_volume, *alpha)?;
            corr = corr.max(c);
            let v: f64 = w.iter().zip(&s.values).map(|(a, b)| a * b).sum();
            coeffs.push(v / multi_index::factorial(*alpha));
            kc.push(
                w.iter().map(|v| v.abs()).sum::<f64>() * eps.powi(multi_index::order(*alpha) as i32),
            );
        }
        per_eps.push(EpsDiagnostic {
            eps,
            coeffs,
            correction: corr,
            kernel_constant: kc,
        });
    }

    let mut out = Vec::with_capacity(alphas.len());
    let mut gammas = Vec::with_capacity(alphas.len());
    for (ai, alpha) in alphas.iter().enumerate() {
        let vals: Vec<f64> = per_eps.iter().map(|e| e.coeffs[ai]).collect();
        check_stable(&vals, multi_index::order(*alpha))?;
        let gamma = lower_index
            .map(|b| b - multi_index::order(*alpha) as f64)
            .filter(|g| *g > 0.0)
            .unwrap_or(1.0);
        gammas.push(gamma);
        out.push(extrapolate(epsilons, &vals, gamma));
    }
    Ok(JetExtraction {
        jet: PolyJet::new(x.to_vec(), n, out)?,
        per_eps,
        gamma: gammas,
    })
}

/// Divergence check: successive changes at the fine end must not outgrow
/// those at the coarse end.
fn check_stable(vals: &[f64], order: usize) -> Result<()> {
    if vals.len() < 3 {
        return Ok(());
    }
    let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let big = vals.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + big);
    let half = diffs.len().div_ceil(2);
    let coarse = diffs[..half].iter().cloned().fold(0.0, f64::max);
    let last = diffs[diffs.len() - 1];
    if last > tol && last > 2.0 * coarse {
        return Err(Error::ExtractionUnstable {
            order,
            message: format!(
                "changes across scales grow from {coarse:.3e} to {last:.3e} at the finest scale"
            ),
        });
    }
    Ok(())
}

/// Least-squares fit of `v(eps) = a + b eps^gamma`; returns `a`.
fn extrapolate(eps: &[f64], vals: &[f64], gamma: f64) -> f64 {
    if vals.len() < 2 {
        return vals[0];
    }
    let emax = eps[0];
    let t: Vec<f64> = eps.iter().map(|e| (e / emax).powf(gamma)).collect();
    let n = t.len() as f64;
    let (st, sv) = (t.iter().sum::<f64>() / n, vals.iter().sum::<f64>() / n);
    let stt: f64 = t.iter().map(|ti| (ti - st) * (ti - st)).sum();
    if stt == 0.0 {
        return sv;
    }
    let b: f64 = t.iter().zip(vals).map(|(ti, v)| (ti - st) * (v - sv)).sum::<f64>() / stt;
    sv - b * st
}
