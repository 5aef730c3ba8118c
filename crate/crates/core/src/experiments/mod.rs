//! Seeded experiments on synthetic signals. Each returns a report whose
//! serialization is byte-identical across runs with equal configs, plus a
//! table of ratios for plotting.

mod brownian;
mod inclusions;
mod rademacher;
mod smooth;

pub use brownian::{exp_brownian_lil, BrownianConfig};
pub use inclusions::{exp_inclusions, InclusionCase, InclusionConfig};
pub use rademacher::{exp_rademacher, RademacherConfig};
pub use smooth::{exp_smooth_remark, SmoothConfig};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_approx::PolyJet;
use crate::oscillation::{BatchResult, ScaleSummary};
use crate::report::{self, fmt_f64};
use crate::signals::{self, GridSpec, SampledFunction};

/// A synthetic signal on a uniform grid of `samples` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Cusp {
        x0: f64,
        u: f64,
        lo: f64,
        hi: f64,
        samples: usize,
    },
    /// `terms = None` keeps every term whose period spans at least two cells.
    Weierstrass {
        a: f64,
        b: u32,
        terms: Option<usize>,
        lo: f64,
        hi: f64,
        samples: usize,
    },
    Brownian {
        samples: usize,
        seed: u64,
    },
    /// Coefficients of `sum c_k x^k`.
    Poly {
        coeffs: Vec<f64>,
        lo: f64,
        hi: f64,
        samples: usize,
    },
    Sine {
        lo: f64,
        hi: f64,
        samples: usize,
    },
    Exp {
        lo: f64,
        hi: f64,
        samples: usize,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Cusp { .. } => "cusp",
            Generator::Weierstrass { .. } => "weierstrass",
            Generator::Brownian { .. } => "brownian",
            Generator::Poly { .. } => "poly",
            Generator::Sine { .. } => "sine",
            Generator::Exp { .. } => "exp",
        }
    }

    pub fn build(&self) -> Result<SampledFunction> {
        match self {
            Generator::Cusp { x0, u, lo, hi, samples } => {
                signals::gen_cusp(&[*x0], *u, &GridSpec::interval(*lo, *hi, *samples)?)
            }
            Generator::Weierstrass {
                a,
                b,
                terms,
                lo,
                hi,
                samples,
            } => {
                let grid = GridSpec::interval(*lo, *hi, *samples)?;
                let terms = terms.unwrap_or_else(|| nyquist_terms(*b, grid.spacing));
                signals::gen_weierstrass(*a, *b, terms, &grid)
            }
            Generator::Brownian { samples, seed } => signals::gen_brownian(*samples, 1.0, *seed),
            Generator::Poly {
                coeffs,
                lo,
                hi,
                samples,
            } => {
                if coeffs.is_empty() {
                    return Err(Error::InvalidArgument("empty polynomial".into()));
                }
                let jet = PolyJet::new(vec![0.0], coeffs.len() - 1, coeffs.clone())?;
                signals::gen_poly(&jet, &GridSpec::interval(*lo, *hi, *samples)?)
            }
            Generator::Sine { lo, hi, samples } => Ok(signals::from_fn(
                &GridSpec::interval(*lo, *hi, *samples)?,
                |x| x[0].sin(),
                "sine",
            )),
            Generator::Exp { lo, hi, samples } => Ok(signals::from_fn(
                &GridSpec::interval(*lo, *hi, *samples)?,
                |x| x[0].exp(),
                "exp",
            )),
        }
    }

    /// Points that must be probed in addition to the even spread.
    pub fn special_points(&self) -> Vec<f64> {
        match self {
            Generator::Cusp { x0, .. } => vec![*x0],
            _ => Vec::new(),
        }
    }
}

/// Number of Weierstrass terms whose period `2 / b^k` spans at least two
/// grid cells.
pub fn nyquist_terms(b: u32, spacing: f64) -> usize {
    let mut k = 0;
    let mut period = 2.0;
    while period >= 2.0 * spacing {
        k += 1;
        period /= b as f64;
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `>= 0.95`.
    pub condition: String,
    pub passed: bool,
}

impl Check {
    pub fn at_least(name: &str, value: f64, min: f64) -> Check {
        Check {
            name: name.into(),
            value,
            condition: format!(">= {}", fmt_f64(min)),
            passed: value >= min,
        }
    }

    pub fn at_most(name: &str, value: f64, max: f64) -> Check {
        Check {
            name: name.into(),
            value,
            condition: format!("<= {}", fmt_f64(max)),
            passed: value <= max,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            value,
            condition: format!("in [{}, {}]", fmt_f64(lo), fmt_f64(hi)),
            passed: (lo..=hi).contains(&value),
        }
    }
}

/// One row of the ratio table: `rho` at radius `r` around `point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub case: String,
    pub series: String,
    pub point: f64,
    pub r: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub version: String,
    pub params: serde_json::Value,
    pub statistics: BTreeMap<String, f64>,
    pub per_scale: Vec<ScaleSummary>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub ratios: Vec<RatioRow>,
}

impl ExperimentReport {
    fn new(name: &str, params: impl Serialize) -> Self {
        ExperimentReport {
            name: name.into(),
            version: report::VERSION.into(),
            params: serde_json::to_value(params).expect("config serializes"),
            statistics: BTreeMap::new(),
            per_scale: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            ratios: Vec::new(),
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        report::to_json(self)
    }

    /// Columns: `case,series,point,r,rho`.
    pub fn ratios_csv(&self) -> String {
        report::to_csv(
            &["case", "series", "point", "r", "rho"],
            self.ratios.iter().map(|row| {
                vec![
                    row.case.clone(),
                    row.series.clone(),
                    fmt_f64(row.point),
                    fmt_f64(row.r),
                    fmt_f64(row.rho),
                ]
            }),
        )
    }

    fn push_ratios(&mut self, case: &str, series: &str, batch: &BatchResult) {
        for rep in &batch.reports {
            for q in &rep.ratios {
                self.ratios.push(RatioRow {
                    case: case.into(),
                    series: series.into(),
                    point: rep.point[0],
                    r: q.r,
                    rho: q.rho,
                });
            }
        }
    }
}

/// Whether the ratio at the finest radius is below `factor` times the ratio
/// at the coarsest radius of the smaller half of the ladder (exact zeros
/// count as decayed). `None` with fewer than four ratios.
pub fn decays(ratios: &[(f64, f64)], factor: f64) -> Option<bool> {
    let k = ratios.len();
    if k < 4 {
        return None;
    }
    let fine = ratios[k - 1].1;
    let coarse = ratios[k / 2].1;
    Some(fine == 0.0 || fine < factor * coarse)
}

fn decay_fraction(batch: &BatchResult, factor: f64) -> f64 {
    let n = batch.reports.len();
    if n == 0 {
        return 0.0;
    }
    let hits = batch
        .reports
        .iter()
        .filter(|r| {
            let q: Vec<(f64, f64)> = r.ratios.iter().map(|q| (q.r, q.rho)).collect();
            decays(&q, factor) == Some(true)
        })
        .count();
    hits as f64 / n as f64
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

/// Evenly spread probe points plus the generator's special points, sorted.
fn probes(gen: &Generator, f: &SampledFunction, count: usize, margin: f64) -> Vec<Vec<f64>> {
    let mut pts = crate::oscillation::probe_points(f, count, margin);
    for x in gen.special_points() {
        if x - margin >= f.lo(0) && x + margin <= f.hi(0) {
            pts.push(f.snap(&[x]));
        }
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    pts.dedup();
    pts
}
