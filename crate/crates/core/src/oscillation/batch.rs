use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    fixed_jet_at, little_o_test, profile, ratios, seminorm, verdict_big_o, LittleOConfig,
    OscillationProfile, Policy, Verdict,
};
use crate::boyd::{self, BoydExpr};
use crate::error::Result;
use crate::signals::SampledFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipConfig {
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    pub degree: usize,
    pub phi: BoydExpr,
    pub policy: Policy,
    pub radii: Vec<f64>,
    pub little_o: LittleOConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub r: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub point: Vec<f64>,
    /// Max of the ratio over the probed radii (a lower bound of the seminorm).
    pub seminorm: Option<f64>,
    #[serde(rename = "verdict_T")]
    pub verdict_big_o: bool,
    pub verdict_t: Verdict,
    /// Log-log slope of the residual over all evaluated radii; `None` when
    /// the residuals vanish.
    pub p_exponent: Option<f64>,
    pub slope: Option<f64>,
    pub ratios: Vec<Ratio>,
    /// Verdict with the ladder cut after each radius (from the sixth on).
    pub verdict_by_scale: Vec<Verdict>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSummary {
    /// Smallest radius of the truncated ladder.
    pub r_min: f64,
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    pub fraction_not_pass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub points: usize,
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    pub errors: usize,
    pub big_o_pass: usize,
    pub fraction_fail: f64,
    pub per_scale: Vec<ScaleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub reports: Vec<MembershipReport>,
    pub summary: BatchSummary,
}

/// `count` probe points (about `count` in the plane) spread evenly over the
/// window shrunk by `margin`, snapped to grid nodes.
pub fn probe_points(f: &SampledFunction, count: usize, margin: f64) -> Vec<Vec<f64>> {
    let d = f.dim();
    let per_axis = if d == 1 {
        count
    } else {
        (count as f64).sqrt().ceil() as usize
    };
    let axis = |a: usize| -> Vec<f64> {
        let lo = f.lo(a) + margin;
        let hi = f.hi(a) - margin;
        (0..per_axis)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / per_axis as f64)
            .collect()
    };
    let mut pts: Vec<Vec<f64>> = if d == 1 {
        axis(0).into_iter().map(|x| f.snap(&[x])).collect()
    } else {
        let (a0, a1) = (axis(0), axis(1));
        a0.iter()
            .flat_map(|x| a1.iter().map(move |y| vec![*x, *y]))
            .map(|p| f.snap(&p))
            .collect()
    };
    pts.dedup();
    pts
}

fn point_report(f: &SampledFunction, x: &[f64], cfg: &MembershipConfig) -> Result<MembershipReport> {
    let jet = match cfg.policy {
        Policy::FixedJet => {
            let lower = boyd::indices(&cfg.phi).lower;
            Some(fixed_jet_at(f, x, cfg.degree, Some(lower))?)
        }
        Policy::PerBall => None,
    };
    let pr = profile(f, x, cfg.p, cfg.degree, &cfg.radii, cfg.policy, jet.as_ref())?;
    Ok(summarize(&pr, &cfg.phi, &cfg.little_o))
}

/// Membership report of one profile.
pub fn summarize(pr: &OscillationProfile, phi: &BoydExpr, lo: &LittleOConfig) -> MembershipReport {
    let little = little_o_test(pr, phi, lo);
    let valid = pr.valid();
    let pos: Vec<&(f64, f64)> = valid.iter().filter(|(_, v)| *v > pr.noise_floor).collect();
    let p_exponent = (pos.len() >= 2).then(|| {
        let xs: Vec<f64> = pos.iter().map(|(r, _)| r.ln()).collect();
        let ys: Vec<f64> = pos.iter().map(|(_, v)| v.ln()).collect();
        super::verdict::fit_line(&xs, &ys).slope
    });
    let verdict_by_scale = (lo.min_radii..=pr.radii.len())
        .map(|k| little_o_test(&pr.truncated(k), phi, lo).verdict)
        .collect();
    MembershipReport {
        point: pr.x.clone(),
        seminorm: seminorm(pr, phi),
        verdict_big_o: verdict_big_o(pr, phi, lo),
        verdict_t: little.verdict,
        p_exponent,
        slope: little.slope,
        ratios: ratios(pr, phi).into_iter().map(|(r, rho)| Ratio { r, rho }).collect(),
        verdict_by_scale,
        error: None,
    }
}

fn failed_report(x: &[f64], e: String) -> MembershipReport {
    MembershipReport {
        point: x.to_vec(),
        seminorm: None,
        verdict_big_o: false,
        verdict_t: Verdict::Indeterminate,
        p_exponent: None,
        slope: None,
        ratios: Vec::new(),
        verdict_by_scale: Vec::new(),
        error: Some(e),
    }
}

/// Profiles, seminorms and verdicts at every point, in parallel. Points are
/// sorted first; per-point errors are recorded and never abort the batch.
pub fn batch_membership(
    f: &SampledFunction,
    points: &[Vec<f64>],
    cfg: &MembershipConfig,
) -> Result<BatchResult> {
    cfg.phi.validate()?;
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    let reports: Vec<MembershipReport> = pts
        .par_iter()
        .map(|x| point_report(f, x, cfg).unwrap_or_else(|e| failed_report(x, e.to_string())))
        .collect();
    let summary = summarize_batch(&reports, &cfg.radii, cfg.little_o.min_radii);
    Ok(BatchResult { reports, summary })
}

fn summarize_batch(reports: &[MembershipReport], radii: &[f64], min_radii: usize) -> BatchSummary {
    let count = |v: Verdict| reports.iter().filter(|r| r.error.is_none() && r.verdict_t == v).count();
    let points = reports.len();
    let per_scale = (min_radii..=radii.len())
        .enumerate()
        .map(|(i, k)| {
            let at = |v: Verdict| {
                reports
                    .iter()
                    .filter(|r| r.verdict_by_scale.get(i) == Some(&v))
                    .count()
            };
            let pass = at(Verdict::Pass);
            ScaleSummary {
                r_min: radii[k - 1],
                pass,
                fail: at(Verdict::Fail),
                indeterminate: at(Verdict::Indeterminate),
                fraction_not_pass: if points > 0 {
                    (points - pass) as f64 / points as f64
                } else {
                    0.0
                },
            }
        })
        .collect();
    let fail = count(Verdict::Fail);
    BatchSummary {
        points,
        pass: count(Verdict::Pass),
        fail,
        indeterminate: count(Verdict::Indeterminate),
        errors: reports.iter().filter(|r| r.error.is_some()).count(),
        big_o_pass: reports.iter().filter(|r| r.verdict_big_o).count(),
        fraction_fail: if points > 0 { fail as f64 / points as f64 } else { 0.0 },
        per_scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_approx::PolyJet;
    use crate::oscillation::default_radii;
    use crate::signals::{gen_cusp, gen_poly, GridSpec};

    #[test]
    fn polynomial_passes_everywhere() {
        let g = GridSpec::interval(-1.0, 1.0, 1 << 13).unwrap();
        let jet = PolyJet::new(vec![0.0], 2, vec![1.0, -0.5, 3.0]).unwrap();
        let f = gen_poly(&jet, &g).unwrap();
        let radii = default_radii(&f, 12);
        let cfg = MembershipConfig {
            p: 2.0,
            degree: 2,
            phi: BoydExpr::power(1.5),
            policy: Policy::PerBall,
            radii: radii.clone(),
            little_o: LittleOConfig::default(),
        };
        let pts = probe_points(&f, 32, radii[0]);
        let b = batch_membership(&f, &pts, &cfg).unwrap();
        assert_eq!(b.summary.pass, b.summary.points);
        assert!(b.reports.iter().all(|r| r.seminorm == Some(0.0)));
    }

    #[test]
    fn cusp_fails_only_at_the_cusp() {
        let g = GridSpec::interval(-1.0, 1.0, (1 << 17) + 1).unwrap();
        let f = gen_cusp(&[0.0], 0.6, &g).unwrap();
        let radii = default_radii(&f, 12);
        let cfg = MembershipConfig {
            p: f64::INFINITY,
            degree: 0,
            phi: BoydExpr::power(0.6),
            policy: Policy::PerBall,
            radii: radii.clone(),
            little_o: LittleOConfig::default(),
        };
        let mut pts = probe_points(&f, 40, radii[0]);
        pts.push(vec![0.0]);
        let b = batch_membership(&f, &pts, &cfg).unwrap();
        assert!(b.summary.fail <= 1);
        let at0 = b.reports.iter().find(|r| r.point == [0.0]).unwrap();
        assert_eq!(at0.verdict_t, Verdict::Fail);
        for r in &b.reports {
            if r.point[0].abs() > 0.05 {
                assert_eq!(r.verdict_t, Verdict::Pass, "{:?}", r.point);
            }
            // little-o pass implies big-O
            if r.verdict_t == Verdict::Pass {
                assert!(r.verdict_big_o);
            }
        }
        // points are sorted
        assert!(b.reports.windows(2).all(|w| w[0].point <= w[1].point));
    }
}
