//! Discrete convexity tests of orbit-volume functionals along straight lines.
//!
//! In log coordinates the geodesics of the orbit space are straight lines,
//! so convexity of a functional is convexity of its restriction to lines.
//! Every test samples a uniform grid on a segment and looks at the second
//! differences `(v[i-1] − 2v[i] + v[i+1]) / step²`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::potential::ToricPotential;
use crate::region::GridRegion;
use crate::toric::{hessian_condition, orbit_log_volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    LogVol,
    Vol,
    NegLogVol,
    InvVol,
}

impl Functional {
    pub const ALL: [Functional; 4] =
        [Functional::LogVol, Functional::Vol, Functional::NegLogVol, Functional::InvVol];

    pub fn name(self) -> &'static str {
        match self {
            Functional::LogVol => "log_vol",
            Functional::Vol => "vol",
            Functional::NegLogVol => "neg_log_vol",
            Functional::InvVol => "inv_vol",
        }
    }

    pub fn eval(self, p: &ToricPotential, x: &[f64]) -> Result<f64> {
        let lv = orbit_log_volume(p, x)?;
        Ok(match self {
            Functional::LogVol => lv,
            Functional::Vol => lv.exp(),
            Functional::NegLogVol => -lv,
            Functional::InvVol => (-lv).exp(),
        })
    }
}

/// Segment `x0 + t·d`, `t ∈ [t_min, t_max]`, sampled at `samples` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSegment {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl LineSegment {
    /// Normalizes `direction`.
    pub fn new(base: Vec<f64>, direction: Vec<f64>, t_min: f64, t_max: f64, samples: usize) -> Result<Self> {
        if base.len() != direction.len() {
            return Err(Error::DimensionMismatch { expected: base.len(), got: direction.len() });
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("line direction must be nonzero"));
        }
        let seg = Self {
            base,
            direction: direction.iter().map(|v| v / norm).collect(),
            t_min,
            t_max,
            samples,
        };
        seg.validate()?;
        Ok(seg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base.len() != self.direction.len() {
            return Err(Error::DimensionMismatch { expected: self.base.len(), got: self.direction.len() });
        }
        if !(self.t_min < self.t_max) {
            return Err(Error::invalid(format!("need t_min < t_max, got [{}, {}]", self.t_min, self.t_max)));
        }
        if self.samples < 5 {
            return Err(Error::invalid(format!("need at least 5 samples, got {}", self.samples)));
        }
        let norm = self.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("direction must be a unit vector, norm = {norm}")));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / (self.samples - 1) as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            self.t_max
        } else {
            self.t_min + i as f64 * self.step()
        }
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        self.base.iter().zip(&self.direction).map(|(b, d)| b + t * d).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.t(i)).collect()
    }
}

/// Values of `functional` at the sample points of `seg`.
pub fn sample_functional(p: &ToricPotential, functional: Functional, seg: &LineSegment) -> Result<Vec<f64>> {
    seg.validate()?;
    if seg.base.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: seg.base.len() });
    }
    seg.ts().into_iter().map(|t| functional.eval(p, &seg.point(t))).collect()
}

/// `Δᵢ = (v[i−1] − 2v[i] + v[i+1]) / step²`.
pub fn second_differences(values: &[f64], step: f64) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]) / (step * step))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexityVerdict {
    StrictlyConvex,
    Convex,
    Affine,
    Concave,
    StrictlyConcave,
    Neither,
}

/// Relative margins; the absolute margins are these times `scale = max|v| + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Margins {
    pub num_rel: f64,
    pub strict_rel: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Self { num_rel: defaults::MARGIN_NUM_REL, strict_rel: defaults::MARGIN_STRICT_REL }
    }
}

/// Verdict from the extreme second differences and absolute margins.
pub fn verdict_from_extremes(min_d: f64, max_d: f64, eps_num: f64, eps_strict: f64) -> ConvexityVerdict {
    if min_d > eps_strict {
        ConvexityVerdict::StrictlyConvex
    } else if max_d < -eps_strict {
        ConvexityVerdict::StrictlyConcave
    } else if min_d.abs() <= eps_num && max_d.abs() <= eps_num {
        ConvexityVerdict::Affine
    } else if min_d > -eps_num {
        ConvexityVerdict::Convex
    } else if max_d < eps_num {
        ConvexityVerdict::Concave
    } else {
        ConvexityVerdict::Neither
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub functional: String,
    pub verdict: ConvexityVerdict,
    pub min_second_difference: f64,
    pub max_second_difference: f64,
    /// Location of the smallest second difference.
    pub argmin: Vec<f64>,
    pub eps_num: f64,
    pub eps_strict: f64,
    pub scale: f64,
    pub margins: Margins,
    pub lines_tested: usize,
    pub seed: Option<u64>,
    /// Line holding the smallest second difference.
    pub worst_line: Option<LineSegment>,
    /// Sample points where `cond(Hess F)` exceeds 1e10.
    pub ill_conditioned_points: usize,
}

impl ConvexityReport {
    /// Report for values sampled on a single uniform grid (no potential involved).
    pub fn from_profile(name: &str, ts: &[f64], values: &[f64], margins: Margins) -> Result<Self> {
        if ts.len() != values.len() || ts.len() < 3 {
            return Err(Error::invalid("profile needs at least 3 matching samples"));
        }
        let step = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        let deltas = second_differences(values, step);
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + 1.0;
        let (imin, min_d) = argmin(&deltas);
        let max_d = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (eps_num, eps_strict) = (margins.num_rel * scale, margins.strict_rel * scale);
        Ok(Self {
            functional: name.to_string(),
            verdict: verdict_from_extremes(min_d, max_d, eps_num, eps_strict),
            min_second_difference: min_d,
            max_second_difference: max_d,
            argmin: vec![ts[imin + 1]],
            eps_num,
            eps_strict,
            scale,
            margins,
            lines_tested: 1,
            seed: None,
            worst_line: None,
            ill_conditioned_points: 0,
        })
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, x)| if x < bv { (i, x) } else { (bi, bv) })
}

/// Random chords of the box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSampler {
    pub lines: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl LineSampler {
    pub fn new(region: &GridRegion, lines: usize, samples: usize, seed: u64) -> Self {
        Self { lines, lo: region.lo.clone(), hi: region.hi.clone(), samples, seed }
    }

    /// Box cube `[lo, hi]^n` with default line and sample counts.
    pub fn cube(n: usize, lo: f64, hi: f64, seed: u64) -> Self {
        Self { lines: defaults::LINES, lo: vec![lo; n], hi: vec![hi; n], samples: defaults::LINE_SAMPLES, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.lo.len() != self.hi.len() || self.lo.is_empty() {
            return Err(Error::invalid("sampler box must have matching nonempty bounds"));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l < h)) {
            return Err(Error::invalid("sampler box needs lo < hi on every axis"));
        }
        if self.lines == 0 {
            return Err(Error::invalid("need at least one line"));
        }
        if self.samples < 5 {
            return Err(Error::invalid("need at least 5 samples per line"));
        }
        Ok(())
    }

    /// Chords through uniform random points in uniform random directions.
    ///
    /// Chords shorter than a quarter of the smallest box side are redrawn so
    /// the sampling step stays well above rounding noise.
    pub fn segments(&self) -> Result<Vec<LineSegment>> {
        self.validate()?;
        let n = self.lo.len();
        let min_side = self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(f64::INFINITY, f64::min);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.lines);
        while out.len() < self.lines {
            let x0: Vec<f64> = (0..n).map(|i| rng.random_range(self.lo[i]..self.hi[i])).collect();
            let d: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue;
            }
            let d: Vec<f64> = d.iter().map(|v| v / norm).collect();
            let (mut t_min, mut t_max) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..n {
                if d[i].abs() < 1e-14 {
                    continue;
                }
                let a = (self.lo[i] - x0[i]) / d[i];
                let b = (self.hi[i] - x0[i]) / d[i];
                t_min = t_min.max(a.min(b));
                t_max = t_max.min(a.max(b));
            }
            if t_max - t_min < 0.25 * min_side {
                continue;
            }
            out.push(LineSegment { base: x0, direction: d, t_min, t_max, samples: self.samples });
        }
        Ok(out)
    }
}

struct LineStats {
    min_d: f64,
    max_d: f64,
    argmin: Vec<f64>,
    max_abs_value: f64,
    ill_conditioned: usize,
}

fn line_stats(p: &ToricPotential, functional: Functional, seg: &LineSegment) -> Result<LineStats> {
    let values = sample_functional(p, functional, seg)?;
    let deltas = second_differences(&values, seg.step());
    let (imin, min_d) = argmin(&deltas);
    let max_d = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut ill_conditioned = 0;
    for t in seg.ts() {
        if hessian_condition(p, &seg.point(t))? > defaults::ILL_CONDITIONED {
            ill_conditioned += 1;
        }
    }
    Ok(LineStats {
        min_d,
        max_d,
        argmin: seg.point(seg.t(imin + 1)),
        max_abs_value: values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        ill_conditioned,
    })
}

/// Convexity verdict of `functional` over seeded random lines in a box.
pub fn check_convexity(
    p: &ToricPotential,
    functional: Functional,
    sampler: &LineSampler,
    margins: Margins,
) -> Result<ConvexityReport> {
    if sampler.lo.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: sampler.lo.len() });
    }
    let segments = sampler.segments()?;
    let stats: Vec<LineStats> = segments
        .par_iter()
        .enumerate()
        .map(|(i, seg)| {
            line_stats(p, functional, seg).map_err(|e| Error::OnLine { line: i, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;

    let scale = stats.iter().map(|s| s.max_abs_value).fold(0.0, f64::max) + 1.0;
    let (eps_num, eps_strict) = (margins.num_rel * scale, margins.strict_rel * scale);
    let (worst, worst_stats) = stats
        .iter()
        .enumerate()
        .fold((0, &stats[0]), |(bi, b), (i, s)| if s.min_d < b.min_d { (i, s) } else { (bi, b) });
    let min_d = worst_stats.min_d;
    let max_d = stats.iter().map(|s| s.max_d).fold(f64::NEG_INFINITY, f64::max);

    Ok(ConvexityReport {
        functional: functional.name().to_string(),
        verdict: verdict_from_extremes(min_d, max_d, eps_num, eps_strict),
        min_second_difference: min_d,
        max_second_difference: max_d,
        argmin: worst_stats.argmin.clone(),
        eps_num,
        eps_strict,
        scale,
        margins,
        lines_tested: segments.len(),
        seed: Some(sampler.seed),
        worst_line: Some(segments[worst].clone()),
        ill_conditioned_points: stats.iter().map(|s| s.ill_conditioned).sum(),
    })
}

/// Writes the `t,value,second_difference` profile of one line as CSV.
/// Endpoints have an empty second difference.
pub fn write_profile_csv<W: Write>(out: W, ts: &[f64], values: &[f64]) -> std::io::Result<()> {
    let step = if ts.len() > 1 { (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64 } else { 1.0 };
    let deltas = second_differences(values, step);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["t", "value", "second_difference"])?;
    for (i, (t, v)) in ts.iter().zip(values).enumerate() {
        let d = if i == 0 || i + 1 == ts.len() { String::new() } else { deltas[i - 1].to_string() };
        w.write_record([t.to_string(), v.to_string(), d])?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub slope: Vec<f64>,
    pub intercept: f64,
    pub max_residual: f64,
}

/// Least-squares fit `log Vol(x) ≈ a·x + b` over the nodes of `grid`.
///
/// A residual near zero means `Vol` is the exponential of an affine
/// function, the normal form of the Ricci-flat case.
pub fn fit_log_affine(p: &ToricPotential, grid: &GridRegion) -> Result<AffineFit> {
    grid.validate()?;
    let n = p.dim();
    if grid.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: grid.dim() });
    }
    let nodes: Vec<Vec<f64>> = grid.nodes().collect();
    let values: Vec<f64> = nodes.iter().map(|x| orbit_log_volume(p, x)).collect::<Result<_>>()?;

    // centre the design for conditioning
    let m = nodes.len() as f64;
    let centre: Vec<f64> = (0..n).map(|i| nodes.iter().map(|x| x[i]).sum::<f64>() / m).collect();
    let design = DMatrix::from_fn(nodes.len(), n + 1, |r, c| if c < n { nodes[r][c] - centre[c] } else { 1.0 });
    let rhs = DVector::from_column_slice(&values);
    let normal = design.transpose() * &design;
    let chol = normal.cholesky().ok_or(Error::DegenerateGrid)?;
    let l = chol.l();
    let diag_max = (0..=n).map(|i| l[(i, i)].abs()).fold(0.0, f64::max);
    let diag_min = (0..=n).map(|i| l[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if diag_min <= 1e-10 * diag_max {
        return Err(Error::DegenerateGrid);
    }
    let coef = chol.solve(&(design.transpose() * &rhs));

    let slope: Vec<f64> = coef.iter().take(n).copied().collect();
    let intercept = coef[n] - slope.iter().zip(&centre).map(|(a, c)| a * c).sum::<f64>();
    let max_residual = nodes
        .iter()
        .zip(&values)
        .map(|(x, v)| (v - intercept - slope.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    Ok(AffineFit { slope, intercept, max_residual })
}
