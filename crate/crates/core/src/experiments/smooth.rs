use serde::{Deserialize, Serialize};

use super::{probes, Check, ExperimentReport, Generator};
use crate::boyd::{self, BoydExpr};
use crate::error::{Error, Result};
use crate::oscillation::{
    batch_membership, default_radii, p_exponent, LittleOConfig, MembershipConfig, Policy,
    Verdict,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothConfig {
    pub generator: Generator,
    pub phi: BoydExpr,
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    pub degree: usize,
    pub points: usize,
    pub levels: usize,
    /// Slack in the expected decay exponent `n + 1 - upper index`.
    pub eta: f64,
    pub little_o: LittleOConfig,
}

impl SmoothConfig {
    pub fn sine() -> Self {
        SmoothConfig {
            generator: Generator::Sine {
                lo: 0.0,
                hi: 4.0,
                samples: 1 << 14,
            },
            phi: BoydExpr::power(0.5),
            p: 2.0,
            degree: 0,
            points: 64,
            levels: 12,
            eta: 0.1,
            little_o: LittleOConfig::default(),
        }
    }
}

fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let pos: Vec<&(f64, f64)> = pts.iter().filter(|(_, v)| *v > 0.0).collect();
    if pos.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = pos.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = pos.iter().map(|(_, v)| v.ln()).collect();
    Some(crate::oscillation::fit_line(&xs, &ys).slope)
}

/// For a smooth signal and a weight with upper index below `n + 1`: the
/// degree-`n` little-o verdict passes everywhere and the ratio decays at
/// least like `r^{n + 1 - upper - eta}`. Also records whether the measured
/// exponent exceeds the upper index at every probe, in which case the
/// degree-`n` verdicts must pass.
pub fn exp_smooth_remark(cfg: &SmoothConfig) -> Result<ExperimentReport> {
    let ind = boyd::indices(&cfg.phi);
    if !(ind.upper < (cfg.degree + 1) as f64) {
        return Err(Error::InvalidArgument(format!(
            "upper index {} is not below n + 1 = {}",
            ind.upper,
            cfg.degree + 1
        )));
    }
    let f = cfg.generator.build()?;
    let radii = default_radii(&f, cfg.levels);
    let pts = probes(&cfg.generator, &f, cfg.points, radii[0]);
    let mc = MembershipConfig {
        p: cfg.p,
        degree: cfg.degree,
        phi: cfg.phi.clone(),
        policy: Policy::PerBall,
        radii: radii.clone(),
        little_o: cfg.little_o,
    };
    let batch = batch_membership(&f, &pts, &mc)?;
    let count = pts.len() as f64;
    let pass_fraction = batch.summary.pass as f64 / count;
    let slopes: Vec<f64> = batch
        .reports
        .iter()
        .filter_map(|r| {
            let q: Vec<(f64, f64)> = r.ratios.iter().map(|q| (q.r, q.rho)).collect();
            fit_slope(&q)
        })
        .collect();
    let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let expected = (cfg.degree + 1) as f64 - ind.upper - cfg.eta;

    let mut exponent_above = true;
    for x in &pts {
        let e = p_exponent(&f, x, cfg.p, cfg.degree, &radii)?;
        if e.value.is_some_and(|v| v <= ind.upper) {
            exponent_above = false;
            break;
        }
    }
    let all_pass = batch.reports.iter().all(|r| r.verdict_t == Verdict::Pass);

    let mut rep = ExperimentReport::new("smooth-remark", cfg);
    let stats = &mut rep.statistics;
    stats.insert("points".into(), count);
    stats.insert("pass_fraction".into(), pass_fraction);
    stats.insert("min_ratio_slope".into(), min_slope);
    stats.insert("expected_slope".into(), expected);
    stats.insert("exponent_above_upper_index".into(), exponent_above as u8 as f64);
    rep.per_scale = batch.summary.per_scale.clone();
    rep.checks = vec![
        Check::at_least("pass_fraction", pass_fraction, 1.0),
        Check::at_least("min_ratio_slope", min_slope, expected),
    ];
    if exponent_above {
        rep.checks.push(Check::at_least(
            "vacuous_case_passes",
            all_pass as u8 as f64,
            1.0,
        ));
    }
    rep.notes.push("min_ratio_slope is +inf when every residual vanishes".into());
    rep.push_ratios(cfg.generator.name(), "per-ball", &batch);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_passes_with_half_slope() {
        let rep = exp_smooth_remark(&SmoothConfig::sine()).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.checks);
        assert!(rep.statistics["min_ratio_slope"] >= 0.4);
        assert!(rep.check("vacuous_case_passes").is_some());
    }

    #[test]
    fn polynomial_has_zero_residual() {
        let mut cfg = SmoothConfig::sine();
        cfg.generator = Generator::Poly {
            coeffs: vec![1.0, 2.0],
            lo: 0.0,
            hi: 1.0,
            samples: 4096,
        };
        cfg.degree = 1;
        cfg.phi = BoydExpr::power(1.5);
        let rep = exp_smooth_remark(&cfg).unwrap();
        assert!(rep.all_passed());
        assert_eq!(rep.statistics["min_ratio_slope"], f64::INFINITY);
    }

    #[test]
    fn exp_with_log_weight() {
        let cfg = SmoothConfig {
            generator: Generator::Exp {
                lo: 0.0,
                hi: 1.0,
                samples: 1 << 14,
            },
            phi: boyd::parse("t^1.5 * L1^1").unwrap(),
            degree: 1,
            ..SmoothConfig::sine()
        };
        let rep = exp_smooth_remark(&cfg).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.checks);
    }

    #[test]
    fn rejects_weight_above_band() {
        let mut cfg = SmoothConfig::sine();
        cfg.phi = BoydExpr::power(1.2);
        assert!(exp_smooth_remark(&cfg).is_err());
    }
}
