use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

use super::{GridSpec, Meta, SampledFunction};
use crate::error::{Error, Result};
use crate::lp_approx::PolyJet;

/// Samples an arbitrary closure on a grid.
pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: &GridSpec, f: F, name: &str) -> SampledFunction {
    let values = (0..grid.len())
        .map(|k| {
            let p = grid.point(k);
            f(&p[..grid.dim()])
        })
        .collect();
    SampledFunction {
        grid: grid.clone(),
        values,
        meta: Meta {
            generator: name.to_string(),
            ..Default::default()
        },
    }
}

/// Brownian path on `[0, horizon]` with `n` exact grid samples:
/// `B(0) = 0` and independent `N(0, spacing)` increments.
pub fn gen_brownian(n: usize, horizon: f64, seed: u64) -> Result<SampledFunction> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("brownian path needs n >= 2, got {n}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon {horizon} must be positive")));
    }
    let grid = GridSpec::interval(0.0, horizon, n)?;
    let sd = grid.spacing.sqrt();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n);
    let mut b = 0.0;
    values.push(b);
    for _ in 1..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        b += sd * z;
        values.push(b);
    }
    let mut meta = Meta {
        generator: "brownian".into(),
        seed: Some(seed),
        ..Default::default()
    };
    meta.params.insert("n".into(), json!(n));
    meta.params.insert("horizon".into(), json!(horizon));
    SampledFunction::new(grid, values, meta)
}

/// `W(x) = sum_{k < terms} a^k cos(b^k pi x)`; in the plane the two
/// coordinate sums are added.
pub fn weierstrass_value(a: f64, b: u32, terms: usize, x: f64) -> f64 {
    let mut amp = 1.0;
    let mut freq = std::f64::consts::PI;
    let mut s = 0.0;
    for _ in 0..terms {
        s += amp * (freq * x).cos();
        amp *= a;
        freq *= b as f64;
    }
    s
}

pub fn gen_weierstrass(a: f64, b: u32, terms: usize, grid: &GridSpec) -> Result<SampledFunction> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidArgument(format!("weierstrass a = {a} must lie in (0, 1)")));
    }
    if b < 2 {
        return Err(Error::InvalidArgument(format!("weierstrass b = {b} must be >= 2")));
    }
    if a * (b as f64) < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "weierstrass needs a*b >= 1 (a = {a}, b = {b})"
        )));
    }
    if terms == 0 {
        return Err(Error::InvalidArgument("weierstrass needs at least one term".into()));
    }
    let mut f = from_fn(
        grid,
        |x| x.iter().map(|&xi| weierstrass_value(a, b, terms, xi)).sum(),
        "weierstrass",
    );
    f.meta.params.insert("a".into(), json!(a));
    f.meta.params.insert("b".into(), json!(b));
    f.meta.params.insert("terms".into(), json!(terms));
    f.meta
        .params
        .insert("truncation_bound".into(), json!(a.powi(terms as i32) / (1.0 - a)));
    if grid.dim() == 1 {
        f.meta
            .params
            .insert("holder_exponent".into(), json!(-a.ln() / (b as f64).ln()));
    }
    SampledFunction::new(f.grid, f.values, f.meta)
}

/// `|x - x0|^u`.
pub fn gen_cusp(x0: &[f64], u: f64, grid: &GridSpec) -> Result<SampledFunction> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::InvalidArgument(format!("cusp exponent u = {u} must be positive")));
    }
    if x0.len() != grid.dim() {
        return Err(Error::InvalidArgument("cusp center dimension mismatch".into()));
    }
    let mut f = from_fn(
        grid,
        |x| {
            let d2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt().powf(u)
        },
        "cusp",
    );
    f.meta.params.insert("u".into(), json!(u));
    f.meta.params.insert("x0".into(), json!(x0));
    SampledFunction::new(f.grid, f.values, f.meta)
}

pub fn gen_poly(jet: &PolyJet, grid: &GridSpec) -> Result<SampledFunction> {
    if jet.dim() != grid.dim() {
        return Err(Error::InvalidArgument("polynomial/grid dimension mismatch".into()));
    }
    let mut f = from_fn(grid, |x| jet.eval(x), "poly");
    f.meta.params.insert("center".into(), json!(jet.center));
    f.meta.params.insert("degree".into(), json!(jet.degree));
    f.meta.params.insert("coeffs".into(), json!(jet.coeffs));
    SampledFunction::new(f.grid, f.values, f.meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn brownian_starts_at_zero_and_is_deterministic() {
        let a = gen_brownian(1024, 1.0, 7).unwrap();
        let b = gen_brownian(1024, 1.0, 7).unwrap();
        let c = gen_brownian(1024, 1.0, 8).unwrap();
        assert_eq!(a.values[0], 0.0);
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert!(gen_brownian(1, 1.0, 0).is_err());
    }

    #[test]
    fn weierstrass_values() {
        let g = GridSpec::interval(-1.0, 1.0, 2001).unwrap();
        let one = gen_weierstrass(0.5, 3, 1, &g).unwrap();
        for (k, v) in one.values.iter().enumerate() {
            let x = one.point(k)[0];
            assert_relative_eq!(*v, (std::f64::consts::PI * x).cos(), epsilon = 1e-15);
        }
        let w = gen_weierstrass(0.5, 3, 20, &g).unwrap();
        let at0 = w.nearest_value(&[0.0]);
        // geometric series 1/(1-a) up to the recorded truncation
        assert!((at0 - 2.0).abs() <= 0.5f64.powi(20) / 0.5 + 1e-12);
        assert!(gen_weierstrass(0.2, 3, 5, &g).is_err());
        assert!(gen_weierstrass(1.2, 3, 5, &g).is_err());
        assert!(gen_weierstrass(0.5, 1, 5, &g).is_err());
    }

    #[test]
    fn weierstrass_truncation_bound() {
        let (a, b) = (0.6f64, 4);
        for terms in [3usize, 6, 9] {
            let bound = a.powi(terms as i32);
            let worst = (0..500)
                .map(|i| {
                    let x = -1.0 + i as f64 * 0.004;
                    (weierstrass_value(a, b, terms, x) - weierstrass_value(a, b, terms + 1, x))
                        .abs()
                })
                .fold(0.0, f64::max);
            assert!(worst <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn cusp_properties() {
        let g = GridSpec::interval(-1.0, 1.0, 401).unwrap();
        let f = gen_cusp(&[0.0], 1.0, &g).unwrap();
        assert_eq!(f.nearest_value(&[0.0]), 0.0);
        for w in f.values.windows(2) {
            assert_relative_eq!((w[1] - w[0]).abs(), g.spacing, max_relative = 1e-9);
        }
        let h = gen_cusp(&[0.0], 0.6, &g).unwrap();
        // sup_r r^{-u} sup_{B(x0,r)} |f| = 1 on grid-aligned radii
        for k in 1..=200 {
            let r = k as f64 * g.spacing;
            let b = h.ball(&[0.0], r.min(1.0)).unwrap();
            let m = b.values.iter().cloned().fold(0.0, f64::max);
            assert_relative_eq!(m / r.powf(0.6), 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn poly_generation() {
        let g = GridSpec::interval(0.0, 4.0, 5).unwrap();
        let zero = gen_poly(&PolyJet::zero(vec![0.0], 2), &g).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
        let lin = gen_poly(&PolyJet::new(vec![0.0], 1, vec![1.0, 2.0]).unwrap(), &g).unwrap();
        assert_eq!(lin.values[3], 7.0);
    }
}
