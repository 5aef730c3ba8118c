//! Oscillation profiles `r -> r^{-d/p} ||f - P||_{L^p(B(x, r))}` and the
//! membership verdicts derived from them.

mod batch;
mod verdict;

pub use batch::{
    batch_membership, probe_points, BatchResult, BatchSummary, MembershipConfig,
    MembershipReport, ScaleSummary,
};
pub(crate) use verdict::fit_line;
pub use verdict::{
    little_o_test, p_exponent, verdict_big_o, LittleO, LittleOConfig, PExponent, Verdict,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boyd::BoydExpr;
use crate::error::{Error, Result};
use crate::jet_extract;
use crate::lp_approx::{self, PolyJet};
use crate::signals::SampledFunction;

/// How the polynomial in the oscillation is chosen at each radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Best polynomial on each ball separately (the infimum).
    PerBall,
    /// One jet at `x` used at every radius.
    FixedJet,
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-ball" => Ok(Policy::PerBall),
            "fixed-jet" => Ok(Policy::FixedJet),
            _ => Err(Error::InvalidArgument(format!(
                "unknown policy {s:?} (expected per-ball or fixed-jet)"
            ))),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::PerBall => "per-ball",
            Policy::FixedJet => "fixed-jet",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationProfile {
    pub x: Vec<f64>,
    #[serde(with = "crate::report::exponent")]
    pub p: f64,
    pub degree: usize,
    pub policy: Policy,
    /// Strictly decreasing.
    pub radii: Vec<f64>,
    /// `None` where the radius could not be evaluated (see `errors`).
    pub residual: Vec<Option<f64>>,
    /// Per-ball minimizers (empty for the fixed-jet policy).
    pub jets: Vec<Option<PolyJet>>,
    pub fixed_jet: Option<PolyJet>,
    pub errors: Vec<Option<String>>,
    /// Residuals at or below this level are treated as exact zeros.
    pub noise_floor: f64,
}

impl OscillationProfile {
    /// `(r, residual)` for the evaluated radii, largest first.
    pub fn valid(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .zip(&self.residual)
            .filter_map(|(r, v)| v.map(|v| (*r, v)))
            .collect()
    }

    /// The profile restricted to its first `k` radii.
    pub fn truncated(&self, k: usize) -> OscillationProfile {
        let k = k.min(self.radii.len());
        OscillationProfile {
            radii: self.radii[..k].to_vec(),
            residual: self.residual[..k].to_vec(),
            jets: self.jets.iter().take(k).cloned().collect(),
            errors: self.errors[..k].to_vec(),
            ..self.clone()
        }
    }
}

/// Dyadic radii from a quarter of the window down, at most `levels` of them,
/// none below eight grid cells.
pub fn default_radii(f: &SampledFunction, levels: usize) -> Vec<f64> {
    let floor = 8.0 * f.spacing() * (1.0 - 1e-12);
    let top = f.window_width() / 4.0;
    (0..levels)
        .map(|k| top / 2f64.powi(k as i32))
        .take_while(|r| *r >= floor)
        .collect()
}

/// `r^{-d/p}`, equal to 1 for `p = inf`.
pub fn normalization(r: f64, d: usize, p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        r.powf(-(d as f64) / p)
    }
}

/// The jet used by the fixed-jet policy: the sample value for degree 0,
/// otherwise the mollifier extraction at default scales.
pub fn fixed_jet_at(
    f: &SampledFunction,
    x: &[f64],
    n: usize,
    lower_index: Option<f64>,
) -> Result<PolyJet> {
    if n == 0 {
        return PolyJet::new(x.to_vec(), 0, vec![f.nearest_value(x)]);
    }
    let eps = jet_extract::default_epsilons(f, x);
    Ok(jet_extract::extract_jet(f, x, n, &eps, lower_index)?.jet)
}

pub fn profile(
    f: &SampledFunction,
    x: &[f64],
    p: f64,
    n: usize,
    radii: &[f64],
    policy: Policy,
    jet: Option<&PolyJet>,
) -> Result<OscillationProfile> {
    let d = f.dim();
    if x.len() != d {
        return Err(Error::InvalidArgument("point dimension mismatch".into()));
    }
    lp_approx::check_exponent(p)?;
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] < w[0])) || !(radii[radii.len() - 1] > 0.0)
    {
        return Err(Error::InvalidArgument("radii must be positive and strictly decreasing".into()));
    }
    let fixed = match policy {
        Policy::FixedJet => Some(
            jet.ok_or_else(|| Error::InvalidArgument("fixed-jet policy needs a jet".into()))?
                .clone(),
        ),
        Policy::PerBall => None,
    };
    let mut residual = Vec::with_capacity(radii.len());
    let mut jets = Vec::new();
    let mut errors = Vec::with_capacity(radii.len());
    let mut scale = 0.0f64;
    for &r in radii {
        let outcome = f.ball(x, r).and_then(|s| {
            scale = scale.max(s.values.iter().fold(0.0, |m, v| m.max(v.abs())));
            let norm = normalization(r, d, p);
            match &fixed {
                Some(jet) => {
                    let diff: Vec<f64> = s
                        .offsets
                        .iter()
                        .zip(&s.values)
                        .map(|(o, v)| {
                            let y = [x[0] + o[0], if d == 2 { x[1] + o[1] } else { 0.0 }];
                            v - jet.eval(&y[..d])
                        })
                        .collect();
                    Ok((norm * lp_approx::weighted_lp_norm(&diff, p, &s.weights), None))
                }
                None => {
                    let bp = lp_approx::best_poly_samples(&s, x, r, p, n)?;
                    Ok((norm * bp.residual, Some(bp.jet)))
                }
            }
        });
        match outcome {
            Ok((v, j)) => {
                residual.push(Some(v));
                if fixed.is_none() {
                    jets.push(j);
                }
                errors.push(None);
            }
            Err(e) => {
                residual.push(None);
                if fixed.is_none() {
                    jets.push(None);
                }
                errors.push(Some(e.to_string()));
            }
        }
    }
    Ok(OscillationProfile {
        x: x.to_vec(),
        p,
        degree: n,
        policy,
        radii: radii.to_vec(),
        residual,
        jets,
        fixed_jet: fixed,
        errors,
        noise_floor: 1e-10 * scale,
    })
}

/// `(r, rho)` with `rho = residual / phi(r)`; residuals under the noise
/// floor count as exact zeros.
pub fn ratios(profile: &OscillationProfile, phi: &BoydExpr) -> Vec<(f64, f64)> {
    profile
        .valid()
        .into_iter()
        .map(|(r, v)| {
            let v = if v <= profile.noise_floor { 0.0 } else { v };
            (r, v / phi.at(r))
        })
        .collect()
}

/// `max_r residual(r) / phi(r)` over the probed radii: a lower bound for the
/// seminorm, which takes the sup over all radii. `None` when no radius was
/// evaluated.
pub fn seminorm(profile: &OscillationProfile, phi: &BoydExpr) -> Option<f64> {
    let r = ratios(profile, phi);
    if r.is_empty() {
        return None;
    }
    Some(r.iter().fold(0.0, |m, (_, rho)| m.max(*rho)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{from_fn, gen_cusp, GridSpec};
    use approx::assert_relative_eq;

    fn cusp() -> SampledFunction {
        let g = GridSpec::interval(-1.0, 1.0, 4097).unwrap();
        gen_cusp(&[0.0], 0.6, &g).unwrap()
    }

    #[test]
    fn radii_ladder() {
        let f = cusp();
        let r = default_radii(&f, 12);
        assert_eq!(r[0], 0.5);
        assert!(r.len() <= 12);
        assert!(*r.last().unwrap() >= 8.0 * f.spacing() * (1.0 - 1e-9));
        assert_eq!(r.len(), 8); // 0.5 / 2^7 = 8 cells of 2/4096
    }

    #[test]
    fn cusp_profiles() {
        let f = cusp();
        let radii = default_radii(&f, 12);
        let pb = profile(&f, &[0.0], f64::INFINITY, 0, &radii, Policy::PerBall, None).unwrap();
        let zero = PolyJet::zero(vec![0.0], 0);
        let fj = profile(&f, &[0.0], f64::INFINITY, 0, &radii, Policy::FixedJet, Some(&zero)).unwrap();
        for ((r, a), b) in radii.iter().zip(&pb.residual).zip(&fj.residual) {
            assert_relative_eq!(a.unwrap(), r.powf(0.6) / 2.0, max_relative = 1e-12);
            assert_relative_eq!(b.unwrap(), r.powf(0.6), max_relative = 1e-12);
        }
        let phi = BoydExpr::power(0.6);
        assert_relative_eq!(seminorm(&fj, &phi).unwrap(), 1.0, max_relative = 1e-12);
        let half = BoydExpr::power(0.5);
        let rho = ratios(&fj, &half);
        // ratio r^0.1 is largest at the largest radius
        assert_relative_eq!(seminorm(&fj, &half).unwrap(), rho[0].1);
    }

    #[test]
    fn per_ball_never_exceeds_fixed_jet() {
        let g = GridSpec::interval(-1.0, 1.0, 2049).unwrap();
        let f = from_fn(&g, |x| (5.0 * x[0]).sin() + x[0].abs().sqrt(), "mix");
        let radii = default_radii(&f, 12);
        for p in [2.0, 3.0, f64::INFINITY] {
            for n in 0..=2 {
                let x = [0.1];
                let jet = fixed_jet_at(&f, &x, n, None).unwrap_or_else(|_| PolyJet::zero(x.to_vec(), n));
                let a = profile(&f, &x, p, n, &radii, Policy::PerBall, None).unwrap();
                let b = profile(&f, &x, p, n, &radii, Policy::FixedJet, Some(&jet)).unwrap();
                for (u, v) in a.residual.iter().zip(&b.residual) {
                    assert!(u.unwrap() <= v.unwrap() * (1.0 + 1e-9) + 1e-14, "p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn missing_radii_are_recorded() {
        let f = cusp();
        let radii = default_radii(&f, 12);
        let pr = profile(&f, &[0.9], 2.0, 1, &radii, Policy::PerBall, None).unwrap();
        assert!(pr.residual[0].is_none());
        assert!(pr.errors[0].as_ref().unwrap().contains("leaves"));
        assert!(pr.residual.last().unwrap().is_some());
        assert!(profile(&f, &[0.0], 2.0, 0, &[0.1, 0.2], Policy::PerBall, None).is_err());
        assert!(profile(&f, &[0.0], 2.0, 0, &radii, Policy::FixedJet, None).is_err());
    }

    #[test]
    fn zero_function_has_zero_seminorm() {
        let g = GridSpec::interval(0.0, 1.0, 1025).unwrap();
        let f = from_fn(&g, |_| 0.0, "zero");
        let radii = default_radii(&f, 12);
        let pr = profile(&f, &[0.5], 2.0, 0, &radii, Policy::PerBall, None).unwrap();
        assert_eq!(seminorm(&pr, &BoydExpr::power(0.5)), Some(0.0));
    }
}
