//! Whitney extension on the line: a `C^n` function on a neighborhood of a
//! finite set built from a jet at each point, blended by a partition of
//! unity over the Whitney decomposition of the complement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boyd::{self, BoydExpr};
use crate::error::{Error, Result};
use crate::lp_approx::PolyJet;
use crate::signals::{GridSpec, Meta, SampledFunction};
use crate::taylor::{self, Taylor};

/// Supports of the partition of unity are the intervals dilated by this
/// factor about their centers.
const DILATION: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetField {
    /// Strictly increasing.
    pub points: Vec<f64>,
    /// One-dimensional jets of common degree, centered at `points`.
    pub jets: Vec<PolyJet>,
    pub phi: BoydExpr,
    pub bound: f64,
    /// The compatibility cap is `cap_factor * bound / phi(1)`.
    pub cap_factor: f64,
}

impl JetField {
    pub fn new(points: Vec<f64>, jets: Vec<PolyJet>, phi: BoydExpr, bound: f64) -> Result<Self> {
        phi.validate()?;
        if points.is_empty() || points.len() != jets.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points for {} jets",
                points.len(),
                jets.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("points must be finite and strictly increasing".into()));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("bound must be positive, got {bound}")));
        }
        let n = jets[0].degree;
        for (x, j) in points.iter().zip(&jets) {
            if j.dim() != 1 || j.degree != n {
                return Err(Error::InvalidArgument("jets must be one-dimensional of common degree".into()));
            }
            if j.center[0] != *x {
                return Err(Error::InvalidArgument(format!("jet at {x} has center {}", j.center[0])));
            }
        }
        Ok(JetField {
            points,
            jets,
            phi,
            bound,
            cap_factor: 10.0,
        })
    }

    /// Jets of `f` at `points` from its derivatives: `derivs(x)[k] = D^k f(x)`.
    pub fn from_derivatives(
        points: Vec<f64>,
        degree: usize,
        derivs: impl Fn(f64) -> Vec<f64>,
        phi: BoydExpr,
        bound: f64,
    ) -> Result<Self> {
        let jets = points
            .iter()
            .map(|&x| {
                let d = derivs(x);
                let mut fact = 1.0;
                let coeffs = (0..=degree)
                    .map(|k| {
                        if k > 0 {
                            fact *= k as f64;
                        }
                        d.get(k).copied().unwrap_or(0.0) / fact
                    })
                    .collect();
                PolyJet::new(vec![x], degree, coeffs)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, jets, phi, bound)
    }

    pub fn degree(&self) -> usize {
        self.jets[0].degree
    }

    pub fn cap(&self) -> f64 {
        self.cap_factor * self.bound / self.phi.at(1.0)
    }

    pub fn scaled(&self, lambda: f64) -> JetField {
        JetField {
            jets: self.jets.iter().map(|j| j.scaled(lambda)).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub compatible: bool,
    pub measured: f64,
    pub cap: f64,
    /// `(x index, y index, derivative order)` of the largest normalized
    /// remainder.
    pub worst: Option<(usize, usize, usize)>,
}

/// Largest `|D^b P_x(y) - D^b P_y(y)| / (phi(|x-y|) |x-y|^{-b})` over
/// ordered pairs of distinct points and `b <= n`.
pub fn check_compatibility(field: &JetField) -> Result<Compatibility> {
    let pts = &field.points;
    if pts.len() < 2 {
        return Err(Error::InsufficientSamples {
            found: pts.len(),
            needed: 2,
        });
    }
    let n = field.degree();
    let mut measured = 0.0f64;
    let mut worst = None;
    for (i, x) in pts.iter().enumerate() {
        for (j, y) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let t = (x - y).abs();
            let w = field.phi.at(t);
            for b in 0..=n {
                let r = field.jets[i].derivative([b, 0], &[*y]) - field.jets[j].derivative([b, 0], &[*y]);
                let v = r.abs() * t.powi(b as i32) / w;
                if v > measured {
                    measured = v;
                    worst = Some((i, j, b));
                }
            }
        }
    }
    let cap = field.cap();
    Ok(Compatibility {
        compatible: measured <= cap,
        measured,
        cap,
        worst,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhitneyInterval {
    pub lo: f64,
    pub hi: f64,
    /// Index of the data point assigned to the interval.
    pub source: usize,
    /// Below the minimal length: kept whole, next to a data point.
    pub terminal: bool,
}

impl WhitneyInterval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn support_radius(&self) -> f64 {
        0.5 * DILATION * self.len()
    }
}

/// One stretch of `U \ E` between two consecutive boundary points, with
/// flags telling which ends belong to `E`.
struct Stretch {
    lo: f64,
    hi: f64,
    lo_in_e: bool,
    hi_in_e: bool,
    lo_point: usize,
    hi_point: usize,
}

impl Stretch {
    fn dist(&self, a: f64, b: f64) -> f64 {
        let l = if self.lo_in_e { a - self.lo } else { f64::INFINITY };
        let r = if self.hi_in_e { self.hi - b } else { f64::INFINITY };
        l.min(r)
    }

    /// Nearest data point to the midpoint, ties to the left.
    fn source(&self, a: f64, b: f64) -> usize {
        match (self.lo_in_e, self.hi_in_e) {
            (true, false) => self.lo_point,
            (false, true) => self.hi_point,
            _ => {
                let m = 0.5 * (a + b);
                if m - self.lo <= self.hi - m {
                    self.lo_point
                } else {
                    self.hi_point
                }
            }
        }
    }
}

fn stretches(points: &[f64], margin: f64) -> Vec<Stretch> {
    let last = points.len() - 1;
    let mut out = vec![Stretch {
        lo: points[0] - margin,
        hi: points[0],
        lo_in_e: false,
        hi_in_e: true,
        lo_point: 0,
        hi_point: 0,
    }];
    for i in 0..last {
        out.push(Stretch {
            lo: points[i],
            hi: points[i + 1],
            lo_in_e: true,
            hi_in_e: true,
            lo_point: i,
            hi_point: i + 1,
        });
    }
    out.push(Stretch {
        lo: points[last],
        hi: points[last] + margin,
        lo_in_e: true,
        hi_in_e: false,
        lo_point: last,
        hi_point: last,
    });
    out
}

/// Default minimal interval length: `2^-24` of the shortest stretch.
pub fn default_min_length(points: &[f64], margin: f64) -> f64 {
    let shortest = points
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(margin, f64::min);
    shortest * 2f64.powi(-24)
}

/// Whitney decomposition of `[min E - margin, max E + margin] \ E` by
/// repeated halving: an interval is kept once its length is at most its
/// distance to `E`, so kept intervals satisfy
/// `dist / 4 <= length <= dist`. Intervals shorter than `min_length` are
/// kept as terminal pieces. The result is sorted and tiles the domain.
pub fn whitney_decompose(points: &[f64], margin: f64, min_length: f64) -> Result<Vec<WhitneyInterval>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no data points".into()));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("points must be strictly increasing".into()));
    }
    if !(margin > 0.0 && min_length > 0.0) {
        return Err(Error::InvalidArgument("margin and minimal length must be positive".into()));
    }
    let mut out = Vec::new();
    for s in stretches(points, margin) {
        // depth-first, right half pushed first so output is left to right
        let mut stack = vec![(s.lo, s.hi)];
        while let Some((a, b)) = stack.pop() {
            let len = b - a;
            let dist = s.dist(a, b);
            if len <= dist || len < min_length {
                out.push(WhitneyInterval {
                    lo: a,
                    hi: b,
                    source: s.source(a, b),
                    terminal: len > dist,
                });
            } else {
                let m = 0.5 * (a + b);
                stack.push((m, b));
                stack.push((a, m));
            }
        }
    }
    Ok(out)
}

/// The extension `F = sum_I theta_I P_{s(I)}` on `U`, with exact jet values
/// at the data points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extension {
    pub field: JetField,
    pub intervals: Vec<WhitneyInterval>,
    pub domain: [f64; 2],
}

/// Builds the extension on `[min E - 1, max E + 1]` after the compatibility
/// gate.
pub fn extend(field: &JetField) -> Result<Extension> {
    if field.points.len() >= 2 {
        let c = check_compatibility(field)?;
        if !c.compatible {
            return Err(Error::Incompatible {
                measured: c.measured,
                cap: c.cap,
            });
        }
    }
    extend_unchecked(field, 1.0)
}

/// Builds the extension with the given margin, without the gate.
pub fn extend_unchecked(field: &JetField, margin: f64) -> Result<Extension> {
    let min_length = default_min_length(&field.points, margin);
    let intervals = whitney_decompose(&field.points, margin, min_length)?;
    let domain = [field.points[0] - margin, field.points[field.points.len() - 1] + margin];
    Ok(Extension {
        field: field.clone(),
        intervals,
        domain,
    })
}

impl Extension {
    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !(x >= self.domain[0] && x <= self.domain[1]) {
            return Err(Error::Domain(format!(
                "{x} outside the extension domain [{}, {}]",
                self.domain[0], self.domain[1]
            )));
        }
        Ok(())
    }

    /// Intervals whose dilated support contains `x`.
    fn covering(&self, x: f64) -> Vec<usize> {
        let iv = &self.intervals;
        let k = iv.partition_point(|i| i.lo <= x).saturating_sub(1);
        let covers = |i: usize| (x - iv[i].center()).abs() < iv[i].support_radius();
        let mut out = Vec::new();
        // neighbors have comparable lengths; a few misses in a row end the scan
        let mut misses = 0;
        for i in (0..k).rev() {
            if covers(i) {
                out.push(i);
                misses = 0;
            } else {
                misses += 1;
                if misses > 3 {
                    break;
                }
            }
        }
        out.reverse();
        misses = 0;
        for i in k..iv.len() {
            if covers(i) {
                out.push(i);
                misses = 0;
            } else {
                misses += 1;
                if misses > 3 {
                    break;
                }
            }
        }
        out
    }

    fn psi(&self, i: usize, x: f64, order: usize) -> Taylor {
        let iv = &self.intervals[i];
        let rho = iv.support_radius();
        let t = taylor::bump(1, order, &[(x - iv.center()) / rho]);
        // chain rule for y = (x - c) / rho
        let mut s = 1.0;
        let coeffs = t
            .coeffs()
            .iter()
            .map(|c| {
                let v = c * s;
                s /= rho;
                v
            })
            .collect();
        Taylor::from_coeffs(1, order, coeffs)
    }

    fn jet_taylor(&self, j: usize, x: f64, order: usize) -> Taylor {
        let jet = &self.field.jets[j];
        let mut fact = 1.0;
        let coeffs = (0..=order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                jet.derivative([k, 0], &[x]) / fact
            })
            .collect();
        Taylor::from_coeffs(1, order, coeffs)
    }

    /// Taylor expansion of `F` at `x` up to `order`.
    fn expand(&self, x: f64, order: usize) -> Result<Taylor> {
        self.check_domain(x)?;
        if let Ok(j) = self.field.points.binary_search_by(|p| p.total_cmp(&x)) {
            return Ok(self.jet_taylor(j, x, order));
        }
        let cover = self.covering(x);
        // Blending differences from one of the jets keeps F exactly equal to
        // that jet where all covering intervals share it; the bump
        // derivatives grow like length^{-k} near E and would cancel badly.
        let base = self.intervals[cover[0]].source;
        let reference = self.jet_taylor(base, x, order);
        let mut num = Taylor::constant(1, order, 0.0);
        let mut den = Taylor::constant(1, order, 0.0);
        for i in cover {
            let psi = self.psi(i, x, order);
            let s = self.intervals[i].source;
            if s != base {
                let diff = self.jet_taylor(s, x, order).add(&reference.clone().scale(-1.0));
                num = num.add(&psi.mul(&diff));
            }
            den = den.add(&psi);
        }
        Ok(reference.add(&num.mul(&den.recip())))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        if let Ok(j) = self.field.points.binary_search_by(|p| p.total_cmp(&x)) {
            return Ok(self.field.jets[j].eval(&[x]));
        }
        let cover = self.covering(x);
        let base = self.intervals[cover[0]].source;
        let reference = self.field.jets[base].eval(&[x]);
        let (mut num, mut den) = (0.0, 0.0);
        for i in cover {
            let iv = &self.intervals[i];
            let psi = taylor::bump_value(&[(x - iv.center()) / iv.support_radius()]);
            if iv.source != base {
                num += psi * (self.field.jets[iv.source].eval(&[x]) - reference);
            }
            den += psi;
        }
        Ok(reference + num / den)
    }

    /// `D^k F(x)` for `k <= n`.
    pub fn derivative(&self, k: usize, x: f64) -> Result<f64> {
        if k == 0 {
            return self.eval(x);
        }
        if k > self.degree() {
            return Err(Error::InvalidArgument(format!(
                "derivative order {k} above the jet degree {}",
                self.degree()
            )));
        }
        Ok(self.expand(x, k)?.derivative([k, 0]))
    }

    /// `sum_I theta_I(x)`, computed from the same weights as `F`. Equal to 1
    /// up to rounding off `E`.
    pub fn partition_sum(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let idx = self.covering(x);
        let w: Vec<f64> = idx.iter().map(|&i| self.psi(i, x, 0).value()).collect();
        let total: f64 = w.iter().sum();
        Ok(w.iter().map(|v| v / total).sum())
    }

    /// `F` on `samples` evenly spaced points of the domain.
    pub fn sample(&self, samples: usize) -> Result<SampledFunction> {
        let grid = GridSpec::interval(self.domain[0], self.domain[1], samples)?;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| self.eval(grid.point(i)[0].clamp(self.domain[0], self.domain[1])))
            .collect::<Result<Vec<f64>>>()?;
        let meta = Meta {
            generator: "whitney".into(),
            ..Meta::default()
        };
        SampledFunction::new(grid, values, meta)
    }
}

/// Evaluation grid of `verify_bound`: steps `h = h_max 2^{-k / per_octave}`
/// down to `h_min` (a fraction of the domain width), and for each step base
/// points spaced `h / per_step` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundGrid {
    pub per_octave: usize,
    pub per_step: usize,
    pub h_min: f64,
}

impl Default for BoundGrid {
    fn default() -> Self {
        BoundGrid {
            per_octave: 8,
            per_step: 8,
            h_min: 1e-4,
        }
    }
}

impl BoundGrid {
    /// Twice as dense in both `h` and `x`.
    pub fn refined(&self) -> BoundGrid {
        BoundGrid {
            per_octave: 2 * self.per_octave,
            per_step: 2 * self.per_step,
            h_min: self.h_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub constant: f64,
    pub argmax_x: f64,
    pub argmax_h: f64,
    pub n: usize,
    pub m: usize,
}

fn binomial(k: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Empirical constant of `|Delta_h^{m-n} D^n F(x)| <= C phi(h) h^{-n}`: the
/// largest ratio over a grid of `(x, h)` with `[x, x + (m-n) h]` in the
/// domain. Negative steps are covered since
/// `Delta_{-h}^k g(x) = (-1)^k Delta_h^k g(x - kh)`.
pub fn verify_bound(ext: &Extension, phi: &BoydExpr, n: usize, m: usize, grid: &BoundGrid) -> Result<BoundReport> {
    phi.validate()?;
    if n > ext.degree() {
        return Err(Error::InvalidArgument(format!("n = {n} above the jet degree {}", ext.degree())));
    }
    let upper = boyd::indices(phi).upper;
    if !(m > n && (m as f64) > upper) {
        return Err(Error::InvalidArgument(format!(
            "need m > n and m above the upper index {upper}, got m = {m}"
        )));
    }
    if grid.per_step == 0 || grid.per_octave == 0 || !(grid.h_min > 0.0 && grid.h_min < 1.0) {
        return Err(Error::InvalidArgument("degenerate bound grid".into()));
    }
    let k = m - n;
    let [lo, hi] = ext.domain;
    let width = hi - lo;
    let h_max = width / k as f64;
    let levels = (grid.per_octave as f64 * (h_max / (grid.h_min * width)).log2()).floor() as usize;
    let pairs: Vec<(f64, f64)> = (0..=levels)
        .flat_map(|l| {
            let h = h_max * 2f64.powf(-(l as f64) / grid.per_octave as f64);
            let span = width - k as f64 * h;
            let steps = (span / h * grid.per_step as f64).ceil().max(1.0) as usize;
            (0..=steps).map(move |i| (lo + span * i as f64 / steps as f64, h))
        })
        .collect();
    let best = pairs
        .par_iter()
        .map(|&(x, h)| -> Result<(f64, f64, f64)> {
            let mut diff = 0.0;
            for j in 0..=k {
                let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
                let at = (x + j as f64 * h).min(hi);
                diff += sign * binomial(k, j) * ext.derivative(n, at)?;
            }
            Ok((diff.abs() * h.powi(n as i32) / phi.at(h), x, h))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0, lo, h_max), |a, b| if b.0 > a.0 { b } else { a });
    Ok(BoundReport {
        constant: best.0,
        argmax_x: best.1,
        argmax_h: best.2,
        n,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly_field(points: Vec<f64>) -> JetField {
        // P(x) = 1 - x + 2x^2
        JetField::from_derivatives(
            points,
            2,
            |x| vec![1.0 - x + 2.0 * x * x, -1.0 + 4.0 * x, 4.0],
            BoydExpr::power(2.5),
            1.0,
        )
        .unwrap()
    }

    fn cusp_field() -> JetField {
        let pts: Vec<f64> = (0..=40).map(|i| -1.0 + 0.05 * i as f64).collect();
        JetField::from_derivatives(pts, 0, |x| vec![x.abs().powf(0.7)], BoydExpr::power(0.7), 1.0)
            .unwrap()
    }

    /// Reference splitter, written recursively.
    fn split(lo: f64, hi: f64, dist: &dyn Fn(f64, f64) -> f64, min_len: f64, out: &mut Vec<(f64, f64)>) {
        if hi - lo <= dist(lo, hi) || hi - lo < min_len {
            out.push((lo, hi));
        } else {
            let m = 0.5 * (lo + hi);
            split(lo, m, dist, min_len, out);
            split(m, hi, dist, min_len, out);
        }
    }

    #[test]
    fn decomposition_matches_recursive_oracle() {
        let pts = [0.0, 1.0, 1.3];
        let min_len = 1e-5;
        let iv = whitney_decompose(&pts, 1.0, min_len).unwrap();
        let mut expect = Vec::new();
        split(-1.0, 0.0, &|_, b| -b, min_len, &mut expect);
        split(0.0, 1.0, &|a, b| a.min(1.0 - b), min_len, &mut expect);
        split(1.0, 1.3, &|a, b| (a - 1.0).min(1.3 - b), min_len, &mut expect);
        split(1.3, 2.3, &|a, _| a - 1.3, min_len, &mut expect);
        let got: Vec<(f64, f64)> = iv.iter().map(|i| (i.lo, i.hi)).collect();
        assert_eq!(got, expect);
        // logarithmic count per gap end
        let in_unit_gap = iv.iter().filter(|i| i.lo >= 0.0 && i.hi <= 1.0).count();
        assert!(in_unit_gap <= 2 * ((1.0 / min_len).log2().ceil() as usize + 2));
    }

    #[test]
    fn decomposition_tiles_with_whitney_proportions() {
        let pts = [0.0];
        let iv = whitney_decompose(&pts, 1.0, 1e-6).unwrap();
        assert_eq!(iv[0].lo, -1.0);
        assert_eq!(iv.last().unwrap().hi, 1.0);
        for w in iv.windows(2) {
            assert!(w[0].hi == w[1].lo);
        }
        for i in iv.iter().filter(|i| !i.terminal) {
            let dist = i.lo.abs().min(i.hi.abs());
            assert!(i.len() <= dist && i.len() >= dist / 4.0, "{i:?}");
        }
        assert!(iv.iter().all(|i| i.source == 0));
        // the unit gap: central pieces are the largest, shrinking toward both ends
        let iv = whitney_decompose(&[0.0, 1.0], 1.0, 1e-6).unwrap();
        let gap: Vec<_> = iv.iter().filter(|i| i.lo >= 0.0 && i.hi <= 1.0).collect();
        let mid = gap.iter().position(|i| i.hi == 0.5).unwrap();
        assert_eq!(gap[mid].len(), 0.25);
        assert!(gap[..=mid].windows(2).all(|w| w[0].len() <= w[1].len()));
        assert_eq!(gap[mid].source, 0);
        assert_eq!(gap[mid + 1].source, 1);
    }

    #[test]
    fn compatibility() {
        assert_eq!(check_compatibility(&poly_field(vec![0.0, 0.5, 2.0])).unwrap().measured, 0.0);
        let two = JetField::new(
            vec![0.0, 0.25],
            vec![
                PolyJet::new(vec![0.0], 0, vec![1.0]).unwrap(),
                PolyJet::new(vec![0.25], 0, vec![3.0]).unwrap(),
            ],
            BoydExpr::power(0.5),
            1.0,
        )
        .unwrap();
        let c = check_compatibility(&two).unwrap();
        assert_relative_eq!(c.measured, 2.0 / 0.5, max_relative = 1e-15);
        assert!(c.compatible);
        let cusp = check_compatibility(&cusp_field()).unwrap();
        assert!(cusp.measured <= 2.0);
        // brute force
        let f = cusp_field();
        let mut brute = 0.0f64;
        for x in &f.points {
            for y in &f.points {
                if x != y {
                    brute = brute.max((x.abs().powf(0.7) - y.abs().powf(0.7)).abs() / (x - y).abs().powf(0.7));
                }
            }
        }
        assert_relative_eq!(cusp.measured, brute, max_relative = 1e-12);
    }

    #[test]
    fn incompatible_field_is_refused() {
        let mut f = cusp_field();
        f.cap_factor = 0.1;
        match extend(&f) {
            Err(Error::Incompatible { measured, cap }) => assert!(measured > cap),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reproduces_polynomials() {
        let pts: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 2.0 + i as f64 * 0.1).collect();
        let mut pts = pts;
        pts.sort_by(f64::total_cmp);
        let f = poly_field(pts);
        let ext = extend(&f).unwrap();
        let [lo, hi] = ext.domain;
        for i in 0..=2000 {
            let x = lo + (hi - lo) * i as f64 / 2000.0;
            let p = 1.0 - x + 2.0 * x * x;
            assert!((ext.eval(x).unwrap() - p).abs() <= 1e-9 * (1.0 + p.abs()));
            assert!((ext.derivative(1, x).unwrap() - (4.0 * x - 1.0)).abs() <= 1e-8);
            assert!((ext.partition_sum(x).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn interpolates_jets() {
        let f = JetField::from_derivatives(
            vec![-0.5, 0.0, 0.3, 1.0],
            2,
            |x| vec![x.sin(), x.cos(), -x.sin()],
            BoydExpr::power(2.5),
            1.0,
        )
        .unwrap();
        let ext = extend(&f).unwrap();
        for x in &f.points {
            for k in 0..=2 {
                let want = [x.sin(), x.cos(), -x.sin()][k];
                assert!((ext.derivative(k, *x).unwrap() - want).abs() <= 1e-8);
                // approached from both sides
                for s in [-1e-7, 1e-7] {
                    let got = ext.derivative(k, x + s).unwrap();
                    assert!((got - want).abs() < 1e-5, "x={x} k={k} s={s} got={got} want={want}");
                }
            }
        }
        assert!(ext.eval(5.0).is_err());
    }

    #[test]
    fn two_point_blend_is_monotone() {
        let f = JetField::from_derivatives(vec![0.0, 1.0], 0, |x| vec![x], BoydExpr::power(0.5), 1.0)
            .unwrap();
        let ext = extend(&f).unwrap();
        assert_eq!(ext.eval(0.0).unwrap(), 0.0);
        assert_eq!(ext.eval(1.0).unwrap(), 1.0);
        let vals: Vec<f64> = (0..=4000).map(|i| ext.eval(-1.0 + 3.0 * i as f64 / 4000.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(vals[0] >= -0.1 && vals[4000] <= 1.1);
    }

    #[test]
    fn smooth_across_interval_boundaries() {
        let f = JetField::from_derivatives(
            vec![0.0, 0.4, 1.0],
            1,
            |x| vec![x.exp(), x.exp()],
            BoydExpr::power(1.5),
            1.0,
        )
        .unwrap();
        let ext = extend(&f).unwrap();
        let h = 1e-6;
        for iv in ext.intervals.iter().filter(|i| i.len() > 1e-3) {
            let b = iv.hi;
            if b >= ext.domain[1] {
                continue;
            }
            let left = (ext.eval(b).unwrap() - ext.eval(b - h).unwrap()) / h;
            let right = (ext.eval(b + h).unwrap() - ext.eval(b).unwrap()) / h;
            assert!((left - right).abs() < 1e-3, "at {b}: {left} vs {right}");
            let d = ext.derivative(1, b).unwrap();
            assert!((d - left).abs() < 1e-3);
        }
    }

    #[test]
    fn cantor_field_error_is_quadratic_in_gap() {
        let mut ends = vec![(0.0, 1.0)];
        for _ in 0..5 {
            ends = ends
                .into_iter()
                .flat_map(|(a, b)| {
                    let t = (b - a) / 3.0;
                    [(a, a + t), (b - t, b)]
                })
                .collect();
        }
        let pts: Vec<f64> = ends.iter().flat_map(|(a, b)| [*a, *b]).collect();
        let f = JetField::from_derivatives(pts.clone(), 1, |x| vec![x * x, 2.0 * x], BoydExpr::power(1.5), 1.0)
            .unwrap();
        let ext = extend(&f).unwrap();
        for w in pts.windows(2) {
            let gap = w[1] - w[0];
            let worst = (1..100)
                .map(|i| {
                    let x = w[0] + gap * i as f64 / 100.0;
                    (ext.eval(x).unwrap() - x * x).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst <= gap * gap, "gap {gap}: {worst}");
        }
    }

    #[test]
    fn scaling_jets_scales_extension() {
        let f = cusp_field();
        let ext = extend(&f).unwrap();
        let ext2 = extend_unchecked(&f.scaled(2.0), 1.0).unwrap();
        for i in 0..=500 {
            let x = -2.0 + 4.0 * i as f64 / 500.0;
            assert_eq!(ext2.eval(x).unwrap(), 2.0 * ext.eval(x).unwrap());
        }
    }

    #[test]
    fn bound_vanishes_for_polynomials() {
        let ext = extend(&poly_field(vec![0.0, 0.5, 1.0])).unwrap();
        let grid = BoundGrid {
            per_octave: 2,
            per_step: 2,
            h_min: 1e-3,
        };
        let r = verify_bound(&ext, &BoydExpr::power(2.5), 2, 3, &grid).unwrap();
        assert!(r.constant < 1e-6, "{r:?}");
        assert!(verify_bound(&ext, &BoydExpr::power(2.5), 2, 2, &grid).is_err());
    }

    #[test]
    fn cusp_bound_is_finite_and_stable() {
        let f = cusp_field();
        let c_comp = check_compatibility(&f).unwrap().measured;
        let ext = extend(&f).unwrap();
        let phi = BoydExpr::power(0.7);
        let grid = BoundGrid::default();
        let a = verify_bound(&ext, &phi, 0, 1, &grid).unwrap();
        let b = verify_bound(&ext, &phi, 0, 1, &grid.refined()).unwrap();
        assert!(a.constant.is_finite() && a.constant > 0.0);
        assert!((a.constant - b.constant).abs() <= 0.05 * b.constant, "{a:?} {b:?}");
        // the blend switches between neighboring constants over an eighth
        // of a gap, so the constant exceeds the compatibility constant
        assert!(b.constant >= c_comp && b.constant < 10.0 * c_comp);
    }
}
