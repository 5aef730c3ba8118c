use serde::{Deserialize, Serialize};

use super::{profile, ratios, OscillationProfile, Policy};
use crate::boyd::BoydExpr;
use crate::error::{Error, Result};
use crate::signals::SampledFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

/// Thresholds of the little-o test: `delta` is the minimal decay slope of
/// the ratio on log-log axes, `tau` the required drop relative to its max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LittleOConfig {
    pub delta: f64,
    pub tau: f64,
    pub min_radii: usize,
}

impl Default for LittleOConfig {
    fn default() -> Self {
        LittleOConfig {
            delta: 0.05,
            tau: 0.2,
            min_radii: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LittleO {
    pub verdict: Verdict,
    /// Regression slope of `log rho` on `log r` over the smallest half.
    pub slope: Option<f64>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub radii_used: usize,
}

pub(crate) struct LineFit {
    pub slope: f64,
    pub stderr: f64,
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let stderr = if xs.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LineFit { slope, stderr }
}

/// Slope of `log rho` against `log r` over entries with positive `rho`.
fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pos: Vec<&(f64, f64)> = points.iter().filter(|(_, v)| *v > 0.0).collect();
    if pos.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pos.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = pos.iter().map(|(_, v)| v.ln()).collect();
    Some(fit_line(&xs, &ys).slope)
}

pub fn little_o_test(profile: &OscillationProfile, phi: &BoydExpr, cfg: &LittleOConfig) -> LittleO {
    let rho = ratios(profile, phi);
    let mut out = LittleO {
        verdict: Verdict::Indeterminate,
        slope: None,
        rho_min: rho.last().map(|(_, v)| *v),
        rho_max: rho.iter().map(|(_, v)| *v).reduce(f64::max),
        radii_used: rho.len(),
    };
    if rho.len() < cfg.min_radii {
        return out;
    }
    let small = &rho[rho.len() / 2..];
    let rmax = out.rho_max.unwrap_or(0.0);
    let rmin = out.rho_min.unwrap_or(0.0);
    if small.iter().all(|(_, v)| *v == 0.0) {
        out.verdict = Verdict::Pass;
        out.slope = None;
        return out;
    }
    let Some(slope) = log_slope(small) else {
        return out;
    };
    out.slope = Some(slope);
    if slope >= cfg.delta && rmin <= cfg.tau * rmax {
        out.verdict = Verdict::Pass;
    } else if slope <= cfg.delta / 4.0 && rmin >= (1.0 - cfg.tau) * rmax {
        out.verdict = Verdict::Fail;
    }
    out
}

/// Big-O verdict on the probed range: the ratio shows no significant growth
/// as `r -> 0`, i.e. the log-log slope over all evaluated radii plus twice
/// its standard error is at least `-delta`. A little-o pass implies it.
pub fn verdict_big_o(profile: &OscillationProfile, phi: &BoydExpr, cfg: &LittleOConfig) -> bool {
    if little_o_test(profile, phi, cfg).verdict == Verdict::Pass {
        return true;
    }
    let rho = ratios(profile, phi);
    let pos: Vec<&(f64, f64)> = rho.iter().filter(|(_, v)| *v > 0.0).collect();
    if pos.len() < 3 {
        return true;
    }
    let xs: Vec<f64> = pos.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = pos.iter().map(|(_, v)| v.ln()).collect();
    let fit = fit_line(&xs, &ys);
    fit.slope + 2.0 * fit.stderr >= -cfg.delta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PExponent {
    /// `None` stands for `+inf` (residuals vanish: exact polynomial).
    pub value: Option<f64>,
    pub band: Option<[f64; 2]>,
    /// Degree at which the estimate was taken.
    pub degree: usize,
    /// Set when the estimate hits the degree ceiling or is infinite.
    pub flagged: bool,
    pub note: Option<String>,
}

/// Slope of `log residual` on `log r` (per-ball, all evaluated radii),
/// raising the degree while the slope saturates at `n + 1`. The whole
/// ladder is used because log-periodic modulation (self-similar signals)
/// biases fits over short spans.
pub fn p_exponent(
    f: &SampledFunction,
    x: &[f64],
    p: f64,
    n_max: usize,
    radii: &[f64],
) -> Result<PExponent> {
    if radii.len() < 6 {
        return Err(Error::InsufficientSamples {
            found: radii.len(),
            needed: 6,
        });
    }
    for n in 0..=n_max {
        let pr = profile(f, x, p, n, radii, Policy::PerBall, None)?;
        let valid = pr.valid();
        if valid.len() < 6 {
            return Err(Error::InsufficientSamples {
                found: valid.len(),
                needed: 6,
            });
        }
        if valid.iter().all(|(_, v)| *v <= pr.noise_floor) {
            return Ok(PExponent {
                value: None,
                band: None,
                degree: n,
                flagged: true,
                note: Some("residuals vanish: exact polynomial".into()),
            });
        }
        let pts: Vec<&(f64, f64)> = valid.iter().filter(|(_, v)| *v > pr.noise_floor).collect();
        if pts.len() < 3 {
            return Ok(PExponent {
                value: None,
                band: None,
                degree: n,
                flagged: true,
                note: Some("residuals vanish at the finest radii".into()),
            });
        }
        let xs: Vec<f64> = pts.iter().map(|(r, _)| r.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
        let fit = fit_line(&xs, &ys);
        let saturated = fit.slope >= n as f64 + 1.0 - 0.25;
        if !saturated || n == n_max {
            return Ok(PExponent {
                value: Some(fit.slope),
                band: Some([fit.slope - 2.0 * fit.stderr, fit.slope + 2.0 * fit.stderr]),
                degree: n,
                flagged: saturated,
                note: saturated.then(|| format!("slope ceiling of degree {n}")),
            });
        }
    }
    unreachable!("loop returns at n_max")
}
