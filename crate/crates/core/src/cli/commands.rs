//! The five subcommands. Each returns the files to write and an outcome;
//! nothing touches the filesystem here.

use serde::Serialize;

use super::config::AnalysisConfig;
use super::output::{config_digest, json_bytes, Envelope};
use crate::convexity::{
    check_convexity, sample_functional, write_profile_csv, ConvexityReport, ConvexityVerdict, Functional,
    LineSampler, LineSegment,
};
use crate::error::{Error, Result};
use crate::fd::StepRule;
use crate::optimizer::{
    boundary_decay_check, find_critical_orbit, multistart_uniqueness, random_starts, CriticalOrbitResult,
    DecayReport, SolveStatus,
};
use crate::su2::haar::{HaarQuadrature, Resolution};
use crate::su2::lassalle::{lassalle_average, LassalleFunction};
use crate::su2::orbit::{geodesic_profile, uniform_grid, write_geodesic_csv, GeodesicProfile};
use crate::toric::{classify_ricci, moment_map, NodeEigen, RicciClassification, RicciVerdict};
use crate::{defaults, GridRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Critical,
    Profile,
    Su2,
    Lassalle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Critical => "critical",
            Command::Profile => "profile",
            Command::Su2 => "su2",
            Command::Lassalle => "lassalle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub files: Vec<OutputFile>,
    /// The run finished but a solver did not reach its guarantee.
    pub nonconvergence: bool,
    pub summary: String,
}

pub fn run_command(cmd: Command, cfg: &AnalysisConfig) -> Result<CommandOutput> {
    let digest = config_digest(cfg);
    let ctx = Ctx { cmd: cmd.name(), digest: &digest, seed: cfg.sampler.seed };
    match cmd {
        Command::Analyze => analyze(cfg, &ctx),
        Command::Critical => critical(cfg, &ctx),
        Command::Profile => profile(cfg, &ctx),
        Command::Su2 => su2(cfg, &ctx),
        Command::Lassalle => lassalle(cfg, &ctx),
    }
}

struct Ctx<'a> {
    cmd: &'a str,
    digest: &'a str,
    seed: u64,
}

impl Ctx<'_> {
    fn json<T: Serialize>(&self, name: &str, result: &T) -> OutputFile {
        let env = Envelope {
            tool: super::output::TOOL,
            version: super::output::VERSION,
            command: self.cmd,
            config_digest: self.digest,
            seed: self.seed,
            result,
        };
        OutputFile { name: name.to_string(), bytes: json_bytes(&env) }
    }
}

fn csv_file(name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<OutputFile> {
    let mut bytes = Vec::new();
    write(&mut bytes).map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(OutputFile { name: name.to_string(), bytes })
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciSummary {
    pub verdict: RicciVerdict,
    pub tau: f64,
    pub threshold: f64,
    pub region: GridRegion,
    pub nodes: usize,
    pub min_witness: NodeEigen,
    pub max_witness: NodeEigen,
    pub richardson: bool,
}

impl RicciSummary {
    fn new(c: RicciClassification, richardson: bool) -> Self {
        Self {
            verdict: c.verdict,
            tau: c.tau,
            threshold: c.threshold,
            nodes: c.nodes.len(),
            region: c.region,
            min_witness: c.min_witness,
            max_witness: c.max_witness,
            richardson,
        }
    }
}

/// `log Vol` verdict that the Ricci sign predicts.
pub fn expected_log_vol_verdict(ricci: RicciVerdict) -> ConvexityVerdict {
    match ricci {
        RicciVerdict::NegativeDefinite => ConvexityVerdict::StrictlyConvex,
        RicciVerdict::Zero => ConvexityVerdict::Affine,
        RicciVerdict::PositiveDefinite => ConvexityVerdict::StrictlyConcave,
        RicciVerdict::Indefinite | RicciVerdict::Mixed => ConvexityVerdict::Neither,
    }
}

fn ricci(cfg: &AnalysisConfig) -> Result<RicciClassification> {
    let mut rule = StepRule::with_base(cfg.ricci.fd_step);
    if cfg.ricci.richardson {
        rule = rule.richardson();
    }
    classify_ricci(cfg.potential()?, &cfg.region()?, Some(cfg.ricci.tau), &rule)
}

#[derive(Debug, Clone, Serialize)]
struct AnalyzeReport {
    potential: String,
    ricci: RicciSummary,
    log_vol: ConvexityReport,
    vol: ConvexityReport,
    neg_log_vol: ConvexityReport,
    inv_vol: ConvexityReport,
    expected_log_vol: ConvexityVerdict,
    consistency: bool,
}

fn analyze(cfg: &AnalysisConfig, ctx: &Ctx) -> Result<CommandOutput> {
    let p = cfg.potential()?;
    let region = cfg.region()?;
    let classification = ricci(cfg)?;
    let s = &cfg.sampler;
    let sampler = LineSampler::new(&region, s.lines, s.samples, s.seed);
    let mut reports = Functional::ALL
        .iter()
        .map(|f| check_convexity(p, *f, &sampler, s.margins))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let (log_vol, vol, neg_log_vol, inv_vol) = (
        reports.next().unwrap(),
        reports.next().unwrap(),
        reports.next().unwrap(),
        reports.next().unwrap(),
    );
    let expected = expected_log_vol_verdict(classification.verdict);
    let report = AnalyzeReport {
        potential: p.label(),
        consistency: expected == log_vol.verdict,
        expected_log_vol: expected,
        ricci: RicciSummary::new(classification, cfg.ricci.richardson),
        log_vol,
        vol,
        neg_log_vol,
        inv_vol,
    };
    let summary = format!(
        "analyze: ricci={:?} log_vol={:?} consistency={}",
        report.ricci.verdict, report.log_vol.verdict, report.consistency
    );
    Ok(CommandOutput { files: vec![ctx.json("analyze.json", &report)], nonconvergence: false, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub x_star: Vec<f64>,
    pub grad_norm: f64,
    pub newton_iterations: usize,
    pub hessian_at_solution: Vec<Vec<f64>>,
    pub hessian_eigenvalues: Vec<f64>,
    pub converged: bool,
    pub status: SolveStatus,
    pub phi_history: Vec<f64>,
}

impl From<&CriticalOrbitResult> for SolveSummary {
    fn from(r: &CriticalOrbitResult) -> Self {
        let h = &r.hessian_at_solution;
        Self {
            x_star: r.x_star.clone(),
            grad_norm: r.grad_norm,
            newton_iterations: r.newton_iterations,
            hessian_at_solution: (0..h.nrows()).map(|i| h.row(i).iter().copied().collect()).collect(),
            hessian_eigenvalues: r.hessian_eigenvalues.clone(),
            converged: r.converged,
            status: r.status,
            phi_history: r.phi_history.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalOutcome {
    UniqueMaximum,
    /// Newton converged but the multistart runs disagree.
    NotUnique,
    EveryOrbitCritical,
    NoInteriorMaximum,
    NotConverged,
}

#[derive(Debug, Clone, Serialize)]
struct StartSummary {
    x0: Vec<f64>,
    x_star: Vec<f64>,
    status: SolveStatus,
    newton_iterations: usize,
    grad_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CriticalReport {
    potential: String,
    outcome: CriticalOutcome,
    ricci_verdict: RicciVerdict,
    solve: SolveSummary,
    moment_map: Option<Vec<f64>>,
    unique: bool,
    spread: f64,
    starts: Vec<StartSummary>,
    decay: DecayReport,
}

fn critical(cfg: &AnalysisConfig, ctx: &Ctx) -> Result<CommandOutput> {
    let p = cfg.potential()?;
    let n = p.dim();
    let o = &cfg.optimizer;
    let classification = ricci(cfg)?;
    let x0 = o.x0.clone().unwrap_or_else(|| vec![0.0; n]);
    let primary = find_critical_orbit(p, &x0, &o.newton)?;
    let starts = random_starts(n, o.starts, o.start_lo, o.start_hi, cfg.sampler.seed);
    let multi = multistart_uniqueness(p, &starts, &o.newton)?;
    let d = &cfg.decay;
    let decay = boundary_decay_check(p, &d.radii, d.samples, Some(d.floor_rel))?;

    let outcome = match primary.status {
        SolveStatus::Converged if multi.unique => CriticalOutcome::UniqueMaximum,
        SolveStatus::Converged => CriticalOutcome::NotUnique,
        SolveStatus::DegenerateCritical => CriticalOutcome::EveryOrbitCritical,
        SolveStatus::NotMaximum | SolveStatus::Diverged => CriticalOutcome::NoInteriorMaximum,
        SolveStatus::MaxIterations | SolveStatus::LineSearchFailed => CriticalOutcome::NotConverged,
    };
    let moment = if primary.converged { Some(moment_map(p, &primary.x_star)?.iter().copied().collect()) } else { None };
    let nonconvergence = classification.verdict == RicciVerdict::PositiveDefinite
        && outcome != CriticalOutcome::UniqueMaximum;
    let report = CriticalReport {
        potential: p.label(),
        outcome,
        ricci_verdict: classification.verdict,
        solve: SolveSummary::from(&primary),
        moment_map: moment,
        unique: multi.unique,
        spread: multi.spread,
        starts: starts
            .iter()
            .zip(&multi.results)
            .map(|(x0, r)| StartSummary {
                x0: x0.clone(),
                x_star: r.x_star.clone(),
                status: r.status,
                newton_iterations: r.newton_iterations,
                grad_norm: r.grad_norm,
            })
            .collect(),
        decay,
    };
    let summary = format!("critical: outcome={:?} unique={}", report.outcome, report.unique);
    Ok(CommandOutput { files: vec![ctx.json("critical.json", &report)], nonconvergence, summary })
}

#[derive(Debug, Clone, Serialize)]
struct ProfileReport {
    potential: String,
    segment: LineSegment,
    functional: Functional,
    values: Vec<f64>,
    convexity: ConvexityReport,
}

fn profile(cfg: &AnalysisConfig, ctx: &Ctx) -> Result<CommandOutput> {
    let p = cfg.potential()?;
    let s = cfg.segment.as_ref().ok_or_else(|| Error::invalid("profile needs a segment in the config"))?;
    let seg = LineSegment::new(s.base.clone(), s.direction.clone(), s.t_min, s.t_max, s.samples)?;
    let values = sample_functional(p, s.functional, &seg)?;
    let ts = seg.ts();
    let convexity = ConvexityReport::from_profile(s.functional.name(), &ts, &values, cfg.sampler.margins)?;
    let csv = csv_file("profile.csv", |w| write_profile_csv(w, &ts, &values))?;
    let summary = format!("profile: {} {:?}", s.functional.name(), convexity.verdict);
    let report = ProfileReport { potential: p.label(), segment: seg, functional: s.functional, values, convexity };
    Ok(CommandOutput { files: vec![csv, ctx.json("profile.json", &report)], nonconvergence: false, summary })
}

#[derive(Debug, Clone, Serialize)]
struct Su2ProfileSummary {
    base_point: super::config::MatrixEntries,
    csv: String,
    argmax_t: f64,
    defect_at_argmax: f64,
    lagrangian_at_argmax: bool,
    verdict: ConvexityVerdict,
    min_second_difference: f64,
    max_density_rel_stddev: f64,
    /// Largest `|vol_J|` change at doubled resolution, when checked.
    refinement_change: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct Su2Report {
    lambda: f64,
    generator: [f64; 3],
    t_grid: Vec<f64>,
    resolution: Resolution,
    lagrangian_defect_threshold: f64,
    /// Geodesics profiled: the identity plus the configured left translates.
    coverage: usize,
    profiles: Vec<Su2ProfileSummary>,
}

fn su2(cfg: &AnalysisConfig, ctx: &Ctx) -> Result<CommandOutput> {
    let s = &cfg.su2;
    let ts = uniform_grid(s.t_min, s.t_max, s.t_points)?;
    let quad = HaarQuadrature::with_resolution(s.resolution)?;
    let fine = if s.convergence_check { Some(HaarQuadrature::with_resolution(s.resolution.doubled())?) } else { None };
    let x = cfg.su2_generator();
    let mut bases = vec![super::config::MatrixEntries::identity()];
    bases.extend(s.left_translates.iter().copied());

    let mut files = Vec::new();
    let mut profiles = Vec::new();
    for (i, base) in bases.iter().enumerate() {
        let k0 = base.matrix();
        let prof: GeodesicProfile = geodesic_profile(&x, &ts, s.lambda, &quad, Some(&k0))?;
        let refinement_change = match &fine {
            Some(q) => {
                let f = geodesic_profile(&x, &ts, s.lambda, q, Some(&k0))?;
                Some(prof.rows.iter().zip(&f.rows).map(|(a, b)| (a.vol_j - b.vol_j).abs()).fold(0.0, f64::max))
            }
            None => None,
        };
        let name = if i == 0 { "su2_profile.csv".to_string() } else { format!("su2_profile_{i}.csv") };
        files.push(csv_file(&name, |w| write_geodesic_csv(w, &prof))?);
        profiles.push(Su2ProfileSummary {
            base_point: *base,
            csv: name,
            argmax_t: prof.argmax_t,
            defect_at_argmax: prof.defect_at_argmax,
            lagrangian_at_argmax: prof.defect_at_argmax.abs() < defaults::LAGRANGIAN_DEFECT,
            verdict: prof.convexity.verdict,
            min_second_difference: prof.convexity.min_second_difference,
            max_density_rel_stddev: prof.max_density_rel_stddev,
            refinement_change,
        });
    }
    let summary = format!(
        "su2: argmax_t={} verdict={:?} profiles={}",
        profiles[0].argmax_t,
        profiles[0].verdict,
        profiles.len()
    );
    let report = Su2Report {
        lambda: s.lambda,
        generator: s.generator,
        t_grid: ts,
        resolution: s.resolution,
        lagrangian_defect_threshold: defaults::LAGRANGIAN_DEFECT,
        coverage: profiles.len(),
        profiles,
    };
    files.push(ctx.json("su2.json", &report));
    Ok(CommandOutput { files, nonconvergence: false, summary })
}

#[derive(Debug, Clone, Serialize)]
struct LassalleEntry {
    function: LassalleFunction,
    csv: String,
    values: Vec<f64>,
    report: ConvexityReport,
}

#[derive(Debug, Clone, Serialize)]
struct LassalleReport {
    generator: [f64; 3],
    k0: super::config::MatrixEntries,
    t_grid: Vec<f64>,
    resolution: Resolution,
    functions: Vec<LassalleEntry>,
}

fn lassalle(cfg: &AnalysisConfig, ctx: &Ctx) -> Result<CommandOutput> {
    let s = &cfg.lassalle;
    let ts = uniform_grid(s.t_min, s.t_max, s.t_points)?;
    let quad = HaarQuadrature::with_resolution(s.resolution)?;
    let x = cfg.lassalle_generator();
    let k0 = s.k0.matrix();
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for f in &s.functions {
        let prof = lassalle_average(*f, &k0, &x, &ts, &quad)?;
        let name = format!("lassalle_{}.csv", f.name());
        files.push(csv_file(&name, |w| write_profile_csv(w, &prof.ts, &prof.values))?);
        entries.push(LassalleEntry { function: *f, csv: name, values: prof.values, report: prof.report });
    }
    let summary = entries
        .iter()
        .map(|e| format!("{}={:?}", e.function.name(), e.report.verdict))
        .collect::<Vec<_>>()
        .join(" ");
    let report = LassalleReport { generator: s.generator, k0: s.k0, t_grid: ts, resolution: s.resolution, functions: entries };
    files.push(ctx.json("lassalle.json", &report));
    Ok(CommandOutput { files, nonconvergence: false, summary: format!("lassalle: {summary}") })
}
