use serde::{Deserialize, Serialize};

use super::{decay_fraction, probes, Check, ExperimentReport, Generator};
use crate::boyd::{self, BoydExpr};
use crate::error::{Error, Result};
use crate::oscillation::{
    batch_membership, default_radii, LittleOConfig, MembershipConfig, Policy,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RademacherConfig {
    pub generator: Generator,
    pub p: f64,
    pub phi: BoydExpr,
    /// Degree of the hypothesis jets; the conclusion uses `degree + 1`.
    pub degree: usize,
    pub points: usize,
    pub levels: usize,
    pub little_o: LittleOConfig,
}

impl RademacherConfig {
    /// Weierstrass `a = 1/2`, `b = 3` on `[0, 1]` with `phi = t^{log 2 / log 3}`.
    pub fn weierstrass() -> Self {
        RademacherConfig {
            generator: Generator::Weierstrass {
                a: 0.5,
                b: 3,
                terms: None,
                lo: 0.0,
                hi: 1.0,
                samples: 1 << 16,
            },
            p: 2.0,
            phi: BoydExpr::power(2f64.ln() / 3f64.ln()),
            degree: 0,
            points: 256,
            levels: 12,
            little_o: LittleOConfig::default(),
        }
    }
}

/// Hypothesis side: big-O verdicts with degree-`n` jets at every probe.
/// Conclusion side: little-o verdicts and ratio decay with degree `n + 1`,
/// summarized per truncated radius ladder.
pub fn exp_rademacher(cfg: &RademacherConfig) -> Result<ExperimentReport> {
    if !(cfg.p > 1.0 && cfg.p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p = {} must lie in (1, inf)", cfg.p)));
    }
    let band = boyd::fractional_band(&boyd::indices(&cfg.phi))?;
    if band != cfg.degree {
        return Err(Error::InvalidArgument(format!(
            "the weight's indices lie in ({band}, {}), not ({}, {})",
            band + 1,
            cfg.degree,
            cfg.degree + 1
        )));
    }
    let f = cfg.generator.build()?;
    let radii = default_radii(&f, cfg.levels);
    if radii.len() < cfg.little_o.min_radii {
        return Err(Error::InsufficientSamples {
            found: radii.len(),
            needed: cfg.little_o.min_radii,
        });
    }
    let pts = probes(&cfg.generator, &f, cfg.points, radii[0]);
    let at_degree = |degree| MembershipConfig {
        p: cfg.p,
        degree,
        phi: cfg.phi.clone(),
        policy: Policy::PerBall,
        radii: radii.clone(),
        little_o: cfg.little_o,
    };
    let hyp = batch_membership(&f, &pts, &at_degree(cfg.degree))?;
    let concl = batch_membership(&f, &pts, &at_degree(cfg.degree + 1))?;

    let count = pts.len() as f64;
    let hyp_fraction = hyp.summary.big_o_pass as f64 / count;
    if hyp_fraction < 0.5 {
        return Err(Error::Inapplicable(format!(
            "big-O hypothesis holds at only {:.1}% of the probes",
            100.0 * hyp_fraction
        )));
    }
    let max_seminorm = hyp
        .reports
        .iter()
        .filter_map(|r| r.seminorm)
        .fold(0.0, f64::max);
    let decay = decay_fraction(&concl, 1.0);
    let fail_fraction = concl.summary.fail as f64 / count;
    let per_scale = concl.summary.per_scale.clone();
    let coarse_pass = per_scale.first().map_or(0.0, |s| 1.0 - s.fraction_not_pass);
    let fine_pass = per_scale.last().map_or(0.0, |s| 1.0 - s.fraction_not_pass);

    let mut rep = ExperimentReport::new("rademacher", cfg);
    let stats = &mut rep.statistics;
    stats.insert("points".into(), count);
    stats.insert("radii".into(), radii.len() as f64);
    stats.insert("hypothesis_big_o_fraction".into(), hyp_fraction);
    stats.insert("hypothesis_max_seminorm".into(), max_seminorm);
    stats.insert("conclusion_pass_fraction".into(), concl.summary.pass as f64 / count);
    stats.insert("conclusion_fail_fraction".into(), fail_fraction);
    stats.insert("conclusion_decay_fraction".into(), decay);
    stats.insert("conclusion_pass_fraction_coarsest_ladder".into(), coarse_pass);
    stats.insert("conclusion_pass_fraction_finest_ladder".into(), fine_pass);
    rep.per_scale = per_scale;
    rep.checks = vec![
        Check::at_least("hypothesis_big_o_fraction", hyp_fraction, 0.95),
        Check::at_least("conclusion_decay_fraction", decay, 0.8),
        Check::at_most("conclusion_fail_fraction", fail_fraction, 3.0 / count),
        Check::at_least("conclusion_pass_trend", fine_pass - coarse_pass, 0.0),
    ];
    rep.notes.push(
        "decay: ratio at the finest radius below the ratio at the coarsest radius of the smaller half"
            .into(),
    );
    rep.push_ratios(cfg.generator.name(), "hypothesis", &hyp);
    rep.push_ratios(cfg.generator.name(), "conclusion", &concl);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cusp_cfg() -> RademacherConfig {
        RademacherConfig {
            generator: Generator::Cusp {
                x0: 0.0,
                u: 0.6,
                lo: -1.0,
                hi: 1.0,
                samples: (1 << 15) + 1,
            },
            p: 2.0,
            phi: BoydExpr::power(0.6),
            degree: 0,
            points: 40,
            levels: 12,
            little_o: LittleOConfig::default(),
        }
    }

    #[test]
    fn cusp_fails_only_at_the_cusp() {
        let rep = exp_rademacher(&cusp_cfg()).unwrap();
        let count = rep.statistics["points"];
        assert_eq!(rep.statistics["hypothesis_big_o_fraction"], 1.0);
        assert_eq!(rep.statistics["conclusion_fail_fraction"], 1.0 / count);
        assert!(rep.check("conclusion_fail_fraction").unwrap().passed);
    }

    #[test]
    fn polynomial_conclusion_passes_everywhere() {
        let mut cfg = cusp_cfg();
        cfg.generator = Generator::Poly {
            coeffs: vec![0.5, -1.0, 2.0],
            lo: -1.0,
            hi: 1.0,
            samples: 1 << 13,
        };
        let rep = exp_rademacher(&cfg).unwrap();
        assert_eq!(rep.statistics["conclusion_pass_fraction"], 1.0);
        assert!(rep.all_passed(), "{:?}", rep.checks);
    }

    #[test]
    fn rejects_weights_outside_the_band() {
        let mut cfg = cusp_cfg();
        cfg.degree = 1;
        assert!(matches!(exp_rademacher(&cfg), Err(Error::InvalidArgument(_))));
        cfg.degree = 0;
        cfg.p = f64::INFINITY;
        assert!(exp_rademacher(&cfg).is_err());
    }
}
