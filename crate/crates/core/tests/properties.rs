//! Property tests over randomly drawn signals, balls and weights.

use czspace::boyd::BoydExpr;
use czspace::lp_approx::{best_poly, weighted_lp_norm, BallSpec, PolyJet};
use czspace::oscillation::{
    batch_membership, default_radii, profile, LittleOConfig, MembershipConfig, Policy, Verdict,
};
use czspace::signals::{from_fn, gen_brownian, weierstrass_value, GridSpec, SampledFunction};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone)]
struct Signal {
    a: f64,
    k: f64,
    c: f64,
    u: f64,
}

fn arb_signal() -> impl Strategy<Value = Signal> {
    (0.2f64..2.0, 0.5f64..8.0, -0.5f64..0.5, 0.3f64..1.7).prop_map(|(a, k, c, u)| Signal { a, k, c, u })
}

fn sample(s: &Signal, n: usize) -> SampledFunction {
    let g = GridSpec::interval(-1.0, 1.0, n).unwrap();
    from_fn(&g, |x| s.a * (s.k * x[0]).sin() + (x[0] - s.c).abs().powf(s.u), "mix")
}

fn arb_p() -> impl Strategy<Value = f64> {
    prop_oneof![Just(2.0), Just(f64::INFINITY), 1.5f64..4.0]
}

/// Residual of `jet` against the samples of `f` in the ball.
fn residual_of(f: &SampledFunction, ball: &BallSpec, jet: &PolyJet) -> f64 {
    let s = f.ball(&ball.x, ball.r).unwrap();
    let diff: Vec<f64> = s
        .offsets
        .iter()
        .zip(&s.values)
        .map(|(o, v)| v - jet.eval_offset(&o[..1]))
        .collect();
    weighted_lp_norm(&diff, ball.p, &s.weights)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn l2_fit_beats_perturbed_jets(s in arb_signal(), xi in 0usize..800, r in 0.02f64..0.4, n in 0usize..=3, seed in any::<u64>()) {
        let f = sample(&s, 1601);
        let x = f.snap(&[-0.5 + xi as f64 / 800.0]);
        let ball = BallSpec::new(&x, r, 2.0);
        let best = best_poly(&f, &ball, n).unwrap();
        let mut state = seed | 1;
        for _ in 0..100 {
            let coeffs: Vec<f64> = best.jet.coeffs.iter().enumerate().map(|(k, c)| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                let z = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                c + 1e-3 * z / r.powi(k as i32)
            }).collect();
            let other = PolyJet::new(x.clone(), n, coeffs).unwrap();
            prop_assert!(best.residual <= residual_of(&f, &ball, &other) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn residual_is_monotone_in_degree(s in arb_signal(), xi in 0usize..800, r in 0.02f64..0.4, p in arb_p()) {
        let f = sample(&s, 1601);
        let x = f.snap(&[-0.5 + xi as f64 / 800.0]);
        let ball = BallSpec::new(&x, r, p);
        let mut prev = f64::INFINITY;
        for n in 0..=3 {
            let res = best_poly(&f, &ball, n).unwrap().residual;
            prop_assert!(res <= prev + 1e-12, "n={} {} > {}", n, res, prev);
            prev = res;
        }
    }

    #[test]
    fn translation_covariance(s in arb_signal(), xi in 0usize..400, shift in -200i64..200, r in 0.02f64..0.3, n in 0usize..=2, p in arb_p()) {
        let f = sample(&s, 1601);
        let h = f.spacing();
        let mut g = f.clone();
        g.grid.origin[0] += shift as f64 * h;
        let x = f.snap(&[-0.3 + xi as f64 / 800.0]);
        let y = [x[0] + shift as f64 * h];
        let a = best_poly(&f, &BallSpec::new(&x, r, p), n).unwrap();
        let b = best_poly(&g, &BallSpec::new(&y, r, p), n).unwrap();
        let tol = if p == 2.0 || p.is_infinite() { 1e-9 } else { 1e-6 };
        prop_assert!((a.residual - b.residual).abs() <= tol * (1.0 + a.residual));
        for (k, (ca, cb)) in a.jet.coeffs.iter().zip(&b.jet.coeffs).enumerate() {
            prop_assert!((ca - cb).abs() * r.powi(k as i32) <= tol * (1.0 + ca.abs() * r.powi(k as i32)));
        }
    }

    #[test]
    fn scaling_covariance(s in arb_signal(), lambda in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], r in 0.05f64..0.4, n in 0usize..=2, p in arb_p()) {
        let f = sample(&s, 1601);
        let mut g = f.clone();
        g.values.iter_mut().for_each(|v| *v *= lambda);
        let ball = BallSpec::new(&[0.1], r, p);
        let a = best_poly(&f, &ball, n).unwrap();
        let b = best_poly(&g, &ball, n).unwrap();
        let tol = if p == 2.0 || p.is_infinite() { 1e-9 } else { 1e-6 };
        prop_assert!((b.residual - lambda.abs() * a.residual).abs() <= tol * lambda.abs() * (a.residual + 1e-12));
        for (k, (ca, cb)) in a.jet.coeffs.iter().zip(&b.jet.coeffs).enumerate() {
            let sc = r.powi(k as i32);
            prop_assert!((cb - lambda * ca).abs() * sc <= tol * lambda.abs() * (1.0 + ca.abs() * sc));
        }
    }

    #[test]
    fn per_ball_residual_below_fixed_jet(s in arb_signal(), xi in 0usize..400, p in arb_p()) {
        let f = sample(&s, 2049);
        let radii = default_radii(&f, 8);
        let x = f.snap(&[-0.2 + xi as f64 / 1000.0]);
        let jet = PolyJet::new(x.clone(), 0, vec![f.nearest_value(&x)]).unwrap();
        let per = profile(&f, &x, p, 0, &radii, Policy::PerBall, None).unwrap();
        let fixed = profile(&f, &x, p, 0, &radii, Policy::FixedJet, Some(&jet)).unwrap();
        for (a, b) in per.residual.iter().zip(&fixed.residual) {
            prop_assert!(a.unwrap() <= b.unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn adding_a_polynomial_leaves_residuals(s in arb_signal(), c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, n in 1usize..=2) {
        let f = sample(&s, 2049);
        let mut g = f.clone();
        for (i, v) in g.values.iter_mut().enumerate() {
            let x = -1.0 + f.spacing() * i as f64;
            *v += c0 + c1 * x;
        }
        let radii = default_radii(&f, 8);
        for p in [2.0, f64::INFINITY] {
            let a = profile(&f, &[0.2], p, n, &radii, Policy::PerBall, None).unwrap();
            let b = profile(&g, &[0.2], p, n, &radii, Policy::PerBall, None).unwrap();
            for (ra, rb) in a.residual.iter().zip(&b.residual) {
                prop_assert!((ra.unwrap() - rb.unwrap()).abs() <= 1e-10 * (1.0 + ra.unwrap()));
            }
        }
    }

    #[test]
    fn seminorm_scales_and_verdicts_are_consistent(s in arb_signal(), lambda in 0.1f64..10.0, u in 0.2f64..0.9, p in prop_oneof![Just(2.0), Just(f64::INFINITY)]) {
        let f = sample(&s, 4097);
        let mut g = f.clone();
        g.values.iter_mut().for_each(|v| *v *= -lambda);
        let cfg = MembershipConfig {
            p,
            degree: 0,
            phi: BoydExpr::power(u),
            policy: Policy::PerBall,
            radii: default_radii(&f, 10),
            little_o: LittleOConfig::default(),
        };
        let pts: Vec<Vec<f64>> = (0..9).map(|i| f.snap(&[-0.4 + 0.1 * i as f64])).collect();
        let a = batch_membership(&f, &pts, &cfg).unwrap();
        let b = batch_membership(&g, &pts, &cfg).unwrap();
        let tau = cfg.little_o.tau;
        for (ra, rb) in a.reports.iter().zip(&b.reports) {
            let (sa, sb) = (ra.seminorm.unwrap(), rb.seminorm.unwrap());
            prop_assert!((sb - lambda * sa).abs() <= 1e-9 * lambda * sa.max(1e-300));
            prop_assert_eq!(ra.verdict_t, rb.verdict_t);
            if ra.verdict_t == Verdict::Pass {
                prop_assert!(ra.verdict_big_o);
            }
            let rho: Vec<f64> = ra.ratios.iter().map(|q| q.rho).collect();
            let max = rho.iter().cloned().fold(0.0, f64::max);
            match ra.verdict_t {
                Verdict::Pass => prop_assert!(rho[rho.len() - 1] < rho[0]),
                Verdict::Fail => prop_assert!(rho[rho.len() - 1] >= (1.0 - tau) * max),
                Verdict::Indeterminate => {}
            }
        }
    }

    #[test]
    fn weierstrass_truncation_bound(terms in 1usize..12, xs in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = 0.5;
        for x in xs {
            let d = (weierstrass_value(a, 3, terms, x) - weierstrass_value(a, 3, terms + 1, x)).abs();
            prop_assert!(d <= a.powi(terms as i32) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn brownian_increments_are_gaussian() {
    let n = 1 << 20;
    let f = gen_brownian(n, 1.0, 2024).unwrap();
    let h = f.spacing();
    let mut z: Vec<f64> = f.values.windows(2).map(|w| (w[1] - w[0]) / h.sqrt()).collect();
    let m = z.len() as f64;
    let mean = z.iter().sum::<f64>() / m;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    // standardized increments: mean within 3 standard errors of 0, variance near 1
    assert!(mean.abs() < 3.0 / m.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 3.0 * (2.0 / m).sqrt(), "variance {var}");
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let ks = z
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = normal.cdf(*v);
            (c - i as f64 / m).abs().max((i as f64 + 1.0) / m - c)
        })
        .fold(0.0, f64::max);
    // 1% critical value of the one-sample Kolmogorov-Smirnov statistic
    assert!(ks < 1.63 / m.sqrt(), "KS distance {ks}");
    assert_eq!(gen_brownian(n, 1.0, 2024).unwrap().values, f.values);
}
