//! Analysis configuration: one JSON document, unknown keys rejected, every
//! omitted field filled from [`crate::defaults`].

use serde::{Deserialize, Serialize};

use crate::convexity::{Functional, Margins};
use crate::defaults;
use crate::error::{Error, Result};
use crate::optimizer::NewtonOptions;
use crate::potential::ToricPotential;
use crate::region::GridRegion;
use crate::su2::haar::Resolution;
use crate::su2::lassalle::LassalleFunction;
use crate::su2::{c, Mat2, Su2LieBasis};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub potential: Option<ToricPotential>,
    /// Ricci grid and line-sampling box; defaults to `[−2, 2]ⁿ` with 9 nodes per axis.
    #[serde(default)]
    pub region: Option<GridRegion>,
    #[serde(default)]
    pub sampler: SamplerSettings,
    #[serde(default)]
    pub ricci: RicciSettings,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    #[serde(default)]
    pub decay: DecaySettings,
    #[serde(default)]
    pub segment: Option<SegmentSettings>,
    #[serde(default)]
    pub su2: Su2Settings,
    #[serde(default)]
    pub lassalle: LassalleSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSettings {
    pub lines: usize,
    pub samples: usize,
    pub seed: u64,
    pub margins: Margins,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            lines: defaults::LINES,
            samples: defaults::LINE_SAMPLES,
            seed: defaults::SEED,
            margins: Margins::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RicciSettings {
    pub tau: f64,
    pub fd_step: f64,
    pub richardson: bool,
}

impl Default for RicciSettings {
    fn default() -> Self {
        Self { tau: defaults::RICCI_TAU, fd_step: defaults::FD_STEP_BASE, richardson: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub newton: NewtonOptions,
    pub starts: usize,
    pub start_lo: f64,
    pub start_hi: f64,
    /// Start of the primary solve; the origin when absent.
    pub x0: Option<Vec<f64>>,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            starts: defaults::N_STARTS,
            start_lo: -1.0,
            start_hi: 1.0,
            x0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySettings {
    pub radii: Vec<f64>,
    pub samples: usize,
    pub floor_rel: f64,
}

impl Default for DecaySettings {
    fn default() -> Self {
        Self {
            radii: defaults::DECAY_RADII.to_vec(),
            samples: defaults::SPHERE_SAMPLES,
            floor_rel: defaults::DECAY_FLOOR_REL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSettings {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_line_samples")]
    pub samples: usize,
    #[serde(default = "default_functional")]
    pub functional: Functional,
}

fn default_line_samples() -> usize {
    defaults::LINE_SAMPLES
}

fn default_functional() -> Functional {
    Functional::LogVol
}

/// Complex 2×2 matrix, row-major real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntries {
    pub re: [f64; 4],
    #[serde(default)]
    pub im: [f64; 4],
}

impl MatrixEntries {
    pub fn identity() -> Self {
        Self { re: [1.0, 0.0, 0.0, 1.0], im: [0.0; 4] }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            c(self.re[0], self.im[0]),
            c(self.re[1], self.im[1]),
            c(self.re[2], self.im[2]),
            c(self.re[3], self.im[3]),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Su2Settings {
    pub lambda: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub resolution: Resolution,
    /// Coefficients of the geodesic generator in the basis `Xₖ = iσₖ/2`.
    pub generator: [f64; 3],
    /// Extra base points `k₀` of the geodesics `k₀·exp(itX)`; the identity is always profiled.
    pub left_translates: Vec<MatrixEntries>,
    /// Repeat every profile at doubled resolution and report the change in `vol_J`.
    pub convergence_check: bool,
}

impl Default for Su2Settings {
    fn default() -> Self {
        Self {
            lambda: defaults::FS_LAMBDA,
            t_min: defaults::SU2_T_MIN,
            t_max: defaults::SU2_T_MAX,
            t_points: defaults::SU2_T_POINTS,
            resolution: defaults::HAAR_RESOLUTION.into(),
            generator: [0.0, 0.0, 1.0],
            left_translates: Vec::new(),
            convergence_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LassalleSettings {
    pub functions: Vec<LassalleFunction>,
    /// All zeros gives the constant path `k₀`.
    pub generator: [f64; 3],
    pub k0: MatrixEntries,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub resolution: Resolution,
}

impl Default for LassalleSettings {
    fn default() -> Self {
        Self {
            functions: LassalleFunction::ALL.to_vec(),
            generator: [0.0, 0.0, 1.0],
            k0: MatrixEntries::identity(),
            t_min: defaults::SU2_T_MIN,
            t_max: defaults::SU2_T_MAX,
            t_points: defaults::SU2_T_POINTS,
            resolution: defaults::HAAR_RESOLUTION.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSettings {
    /// Output directory; `--out` takes precedence.
    pub dir: String,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { dir: ".".to_string() }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn t_range(name: &str, lo: f64, hi: f64, points: usize, min_points: usize) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("{name}: need finite t_min < t_max")));
    }
    if points < min_points {
        return Err(Error::invalid(format!("{name}: t_points must be at least {min_points}")));
    }
    Ok(())
}

fn resolution(name: &str, r: &Resolution) -> Result<()> {
    if r.n_theta < 4 || r.n_phi < 4 || r.n_psi < 4 {
        return Err(Error::invalid(format!("{name}: every quadrature resolution must be at least 4")));
    }
    Ok(())
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: AnalysisConfig =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn potential(&self) -> Result<&ToricPotential> {
        self.potential.as_ref().ok_or_else(|| Error::invalid("config has no potential"))
    }

    /// Configured region, or `[−2, 2]ⁿ` with 9 nodes per axis.
    pub fn region(&self) -> Result<GridRegion> {
        match &self.region {
            Some(r) => Ok(r.clone()),
            None => GridRegion::cube(self.potential()?.dim(), -2.0, 2.0, 9),
        }
    }

    pub fn su2_generator(&self) -> Mat2 {
        Su2LieBasis::default().combine(self.su2.generator)
    }

    pub fn lassalle_generator(&self) -> Mat2 {
        Su2LieBasis::default().combine(self.lassalle.generator)
    }

    /// Checks every field that deserialization cannot.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.potential {
            let n = p.dim();
            if let Some(r) = &self.region {
                r.validate()?;
                if r.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: r.dim() });
                }
            }
            if let Some(x0) = &self.optimizer.x0 {
                if x0.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
                }
            }
            if let Some(s) = &self.segment {
                if s.base.len() != n || s.direction.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: s.base.len().max(s.direction.len()) });
                }
            }
        }
        let s = &self.sampler;
        if s.lines == 0 || s.samples < 5 {
            return Err(Error::invalid("sampler needs at least one line and 5 samples per line"));
        }
        positive("sampler.margins.num_rel", s.margins.num_rel)?;
        positive("sampler.margins.strict_rel", s.margins.strict_rel)?;
        positive("ricci.tau", self.ricci.tau)?;
        positive("ricci.fd_step", self.ricci.fd_step)?;
        let o = &self.optimizer;
        if o.starts < 2 {
            return Err(Error::invalid("optimizer.starts must be at least 2"));
        }
        if !(o.start_lo < o.start_hi) || !o.start_lo.is_finite() || !o.start_hi.is_finite() {
            return Err(Error::invalid("optimizer: need finite start_lo < start_hi"));
        }
        positive("optimizer.newton.tol", o.newton.tol)?;
        positive("optimizer.newton.max_step", o.newton.max_step)?;
        positive("optimizer.newton.divergence_radius", o.newton.divergence_radius)?;
        positive("optimizer.newton.fd_step", o.newton.fd_step)?;
        if o.newton.max_iter == 0 || !(o.newton.backtrack > 0.0 && o.newton.backtrack < 1.0) {
            return Err(Error::invalid("optimizer.newton: max_iter ≥ 1 and backtrack in (0, 1) required"));
        }
        if !(o.newton.armijo_c1 > 0.0 && o.newton.armijo_c1 < 1.0) {
            return Err(Error::invalid("optimizer.newton.armijo_c1 must lie in (0, 1)"));
        }
        let d = &self.decay;
        if d.radii.is_empty() || d.radii.iter().any(|r| !(*r > 0.0)) || d.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("decay.radii must be positive and strictly increasing"));
        }
        if d.samples == 0 {
            return Err(Error::invalid("decay.samples must be positive"));
        }
        positive("decay.floor_rel", d.floor_rel)?;
        if let Some(seg) = &self.segment {
            if !(seg.t_min < seg.t_max) || seg.samples < 5 {
                return Err(Error::invalid("segment: need t_min < t_max and at least 5 samples"));
            }
        }
        positive("su2.lambda", self.su2.lambda)?;
        t_range("su2", self.su2.t_min, self.su2.t_max, self.su2.t_points, 5)?;
        resolution("su2", &self.su2.resolution)?;
        if self.su2.generator.iter().all(|v| *v == 0.0) || self.su2.generator.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("su2.generator must be finite and nonzero"));
        }
        t_range("lassalle", self.lassalle.t_min, self.lassalle.t_max, self.lassalle.t_points, 3)?;
        resolution("lassalle", &self.lassalle.resolution)?;
        if self.lassalle.functions.is_empty() {
            return Err(Error::invalid("lassalle.functions must not be empty"));
        }
        if self.lassalle.generator.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("lassalle.generator must be finite"));
        }
        Ok(())
    }
}
