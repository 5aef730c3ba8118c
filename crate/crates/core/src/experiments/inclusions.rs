use serde::{Deserialize, Serialize};

use super::{probes, Check, ExperimentReport, Generator};
use crate::boyd::{self, BoydExpr};
use crate::error::{Error, Result};
use crate::oscillation::{
    batch_membership, default_radii, LittleOConfig, MembershipConfig, Policy, Verdict,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionCase {
    pub generator: Generator,
    pub phi: BoydExpr,
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionConfig {
    pub cases: Vec<InclusionCase>,
    pub points: usize,
    pub levels: usize,
    /// Upper bound on the offset from the indices; shrunk so that both
    /// power levels stay inside the weight's band.
    pub eta: f64,
    pub little_o: LittleOConfig,
}

impl Default for InclusionConfig {
    fn default() -> Self {
        let (lo, hi, samples) = (-1.0, 1.0, 1usize << 16);
        InclusionConfig {
            cases: vec![
                InclusionCase {
                    generator: Generator::Cusp {
                        x0: 0.0,
                        u: 0.7,
                        lo,
                        hi,
                        samples: samples + 1,
                    },
                    phi: BoydExpr::power(0.6),
                    p: 2.0,
                },
                InclusionCase {
                    generator: Generator::Poly {
                        coeffs: vec![1.0, -2.0, 0.5, 3.0],
                        lo,
                        hi,
                        samples,
                    },
                    phi: BoydExpr::power(0.6),
                    p: 2.0,
                },
                InclusionCase {
                    generator: Generator::Sine { lo: 0.0, hi: 4.0, samples },
                    phi: BoydExpr::power(1.5),
                    p: 2.0,
                },
                InclusionCase {
                    generator: Generator::Weierstrass {
                        a: 0.5,
                        b: 3,
                        terms: None,
                        lo: 0.0,
                        hi: 1.0,
                        samples,
                    },
                    phi: BoydExpr::power(2f64.ln() / 3f64.ln()),
                    p: 2.0,
                },
                InclusionCase {
                    generator: Generator::Brownian {
                        samples: 1 << 18,
                        seed: 5,
                    },
                    phi: BoydExpr::brownian_lil(),
                    p: f64::INFINITY,
                },
            ],
            points: 64,
            levels: 12,
            eta: 0.2,
            little_o: LittleOConfig::default(),
        }
    }
}

const LEVELS: [&str; 4] = ["power-upper+eta", "phi-degree-n", "phi-degree-n+1", "power-lower-eta"];

/// Largest polynomial degree strictly below `u`.
fn degree_below(u: f64) -> usize {
    (u.ceil() - 1.0).max(0.0) as usize
}

/// Verdicts along `t_{upper+eta} => t_{phi,n} => t_{phi,n+1} => t_{lower-eta}`
/// at every probe of every case. A pass at one level followed by a fail at
/// the next is an [`Error::InvariantFailure`]; a fail followed by a pass is
/// recorded as a strictness witness of that inclusion.
pub fn exp_inclusions(cfg: &InclusionConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("inclusions", cfg);
    let mut witnesses = [0usize; 3];
    let mut probed = 0usize;
    for (ci, case) in cfg.cases.iter().enumerate() {
        let ind = boyd::indices(&case.phi);
        let n = boyd::fractional_band(&ind)?;
        let eta = cfg
            .eta
            .min((ind.lower - n as f64) / 2.0)
            .min((n as f64 + 1.0 - ind.upper) / 2.0);
        let f = case.generator.build()?;
        let radii = default_radii(&f, cfg.levels);
        let pts = probes(&case.generator, &f, cfg.points, radii[0]);
        let upper = ind.upper + eta;
        let lower = ind.lower - eta;
        let levels = [
            (BoydExpr::power(upper), degree_below(upper)),
            (case.phi.clone(), n),
            (case.phi.clone(), n + 1),
            (BoydExpr::power(lower), n + 1),
        ];
        let mut verdicts = Vec::with_capacity(4);
        for (li, (phi, degree)) in levels.iter().enumerate() {
            let mc = MembershipConfig {
                p: case.p,
                degree: *degree,
                phi: phi.clone(),
                policy: Policy::PerBall,
                radii: radii.clone(),
                little_o: cfg.little_o,
            };
            let b = batch_membership(&f, &pts, &mc)?;
            let label = format!("{ci}-{}", case.generator.name());
            rep.push_ratios(&label, LEVELS[li], &b);
            verdicts.push(b.reports.iter().map(|r| r.verdict_t).collect::<Vec<_>>());
        }
        for (pi, x) in pts.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (verdicts[k][pi], verdicts[k + 1][pi]);
                if a == Verdict::Pass && b == Verdict::Fail {
                    return Err(Error::InvariantFailure(format!(
                        "case {ci} ({}) at x = {}: pass at {} but fail at {}",
                        case.generator.name(),
                        x[0],
                        LEVELS[k],
                        LEVELS[k + 1]
                    )));
                }
                if a == Verdict::Fail && b == Verdict::Pass {
                    witnesses[k] += 1;
                }
            }
        }
        probed += pts.len();
        let name = case.generator.name();
        for (li, v) in verdicts.iter().enumerate() {
            let pass = v.iter().filter(|x| **x == Verdict::Pass).count();
            rep.statistics
                .insert(format!("{ci}-{name}/{}/pass_fraction", LEVELS[li]), pass as f64 / pts.len() as f64);
        }
        rep.statistics.insert(format!("{ci}-{name}/eta"), eta);
    }
    rep.statistics.insert("points".into(), probed as f64);
    for (k, w) in witnesses.iter().enumerate() {
        rep.statistics.insert(format!("witnesses/{}<{}", LEVELS[k], LEVELS[k + 1]), *w as f64);
    }
    rep.statistics.insert("violations".into(), 0.0);
    rep.checks = vec![Check::at_least("middle_inclusion_witnesses", witnesses[1] as f64, 1.0)];
    rep.notes.push(
        "levels are little-o verdicts; a witness of an inclusion is a fail at the smaller space with a pass at the larger one"
            .into(),
    );
    Ok(rep)
}
