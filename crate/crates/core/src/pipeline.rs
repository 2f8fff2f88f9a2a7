//! File-driven run of the whole search: ideal, Gröbner basis, Gram problem,
//! numeric solve, spectral factor, rounding and exact verification.
//!
//! Every stage writes its artifact into the output directory in the same
//! format the matching CLI subcommand reads, so a run can be resumed or
//! inspected stage by stage.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Monomial, Polynomial, Rat, VarTable};
use crate::certify::{
    gram_certificate_text, gram_residual, gram_to_polys, poly_certificate_text, project_gram,
    rational_kernel, round_gram, verify_certificate, CertifyError, GramCertificate,
    PolyCertificate, DEFAULT_MAX_DEN,
};
use crate::families::grouped_sdp;
use crate::groebner::{reduced_monomials, GbCache, GroebnerBasis, DEFAULT_STEP_BUDGET};
use crate::model::{build_fstar_in, build_ideal_sos_in, GraphClassParams};
use crate::oracle::fstar_zeros;
use crate::sdp::{
    build_sdp, export_heatmap, export_sdpa, jacobi_eigen, solve, spectral_factor, suggest_mask,
    write_matrix_csv, MonomialMask, Objective, SdpProblem, SdpStatus, SolverSettings,
    DEFAULT_COL_TOL, DEFAULT_EIG_TOL,
};
use crate::MonomialOrder;

/// Gram problems up to this size are projected exactly after rounding.
pub const DEFAULT_PROJECT_MAX_DIM: usize = 40;
/// Eigenvalue drop that marks the edge of the numerical face.
const KERNEL_GAP: f64 = 1e-2;
/// Relative residual allowed for a rounded kernel vector.
const KERNEL_TOL: f64 = 1e-4;
const MAX_PROJECT_DEN: u64 = 100_000_000;
const MAX_FACE_STEPS: usize = 6;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("stage `{stage}` failed: {message} (artifacts so far: {})", display_paths(.artifacts))]
    Stage {
        stage: Stage,
        message: String,
        artifacts: Vec<PathBuf>,
    },
}

fn display_paths(paths: &[PathBuf]) -> String {
    let v: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ideal,
    Groebner,
    Sdp,
    Solve,
    Factor,
    Round,
    Verify,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ideal,
        Stage::Groebner,
        Stage::Sdp,
        Stage::Solve,
        Stage::Factor,
        Stage::Round,
        Stage::Verify,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Ideal => "ideal",
            Stage::Groebner => "groebner",
            Stage::Sdp => "sdp",
            Stage::Solve => "solve",
            Stage::Factor => "factor",
            Stage::Round => "round",
            Stage::Verify => "verify",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| PipelineError::Config(format!("unknown stage `{s}`")))
    }
}

/// `zero`, `trace-min`, `trace-max`, `cross-row` or `custom:FILE`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ObjectiveChoice {
    #[default]
    Zero,
    TraceMin,
    TraceMax,
    /// See [`cross_row_penalty`].
    CrossRow,
    Custom(PathBuf),
}

impl ObjectiveChoice {
    /// The objective over `basis`, the unmasked reduced monomials.
    pub fn load(&self, vars: &Arc<VarTable>, basis: &[Monomial]) -> Result<Objective, String> {
        Ok(match self {
            ObjectiveChoice::Zero => Objective::Zero,
            ObjectiveChoice::TraceMin => Objective::TraceMin,
            ObjectiveChoice::TraceMax => Objective::TraceMax,
            ObjectiveChoice::CrossRow => cross_row_penalty(basis, vars),
            ObjectiveChoice::Custom(path) => {
                let text =
                    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                Objective::parse_custom(&text, vars).map_err(|e| e.to_string())?
            }
        })
    }
}

impl fmt::Display for ObjectiveChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveChoice::Zero => f.write_str("zero"),
            ObjectiveChoice::TraceMin => f.write_str("trace-min"),
            ObjectiveChoice::TraceMax => f.write_str("trace-max"),
            ObjectiveChoice::CrossRow => f.write_str("cross-row"),
            ObjectiveChoice::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl FromStr for ObjectiveChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "zero" => Ok(ObjectiveChoice::Zero),
            "trace-min" => Ok(ObjectiveChoice::TraceMin),
            "trace-max" => Ok(ObjectiveChoice::TraceMax),
            "cross-row" => Ok(ObjectiveChoice::CrossRow),
            other => other
                .strip_prefix("custom:")
                .filter(|p| !p.is_empty())
                .map(|p| ObjectiveChoice::Custom(PathBuf::from(p)))
                .ok_or_else(|| format!("unknown objective `{other}` (zero, trace-min, trace-max, cross-row, custom:FILE)")),
        }
    }
}

impl TryFrom<String> for ObjectiveChoice {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ObjectiveChoice> for String {
    fn from(o: ObjectiveChoice) -> String {
        o.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual and gap tolerance of the solver.
    pub gap: f64,
    /// Relative eigenvalue cutoff of the spectral factor.
    pub eig: f64,
    /// Column cutoff for mask suggestions.
    pub col: f64,
    /// Largest denominator used in rounding.
    pub max_den: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap: SolverSettings::default().tol,
            eig: DEFAULT_EIG_TOL,
            col: DEFAULT_COL_TOL,
            max_den: DEFAULT_MAX_DEN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub max_iter: usize,
    /// Reduction step budget of the Gröbner computation.
    pub gb_steps: u64,
    /// Largest Gram dimension that is projected exactly after rounding;
    /// 0 disables projection.
    pub project_max_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_iter: SolverSettings::default().max_iter,
            gb_steps: DEFAULT_STEP_BUDGET,
            project_max_dim: DEFAULT_PROJECT_MAX_DIM,
        }
    }
}

/// One run of the search, read from and written to TOML.
///
/// ```toml
/// params = [3, 2, 3, 2]        # n_G, k_G, n_H, k_H
/// ell = 2
/// mask = "mask.txt"            # optional, one monomial per line
/// objective = "zero"           # zero | trace-min | trace-max | cross-row | custom:FILE
/// until = "verify"             # last stage to run
/// cache_dir = ".cache/gb"
/// output_dir = "out"
///
/// [tolerances]
/// gap = 1e-8
/// eig = 1e-6
/// col = 1e-5
/// max_den = 99
///
/// [limits]
/// max_iter = 200
/// gb_steps = 10000000
/// project_max_dim = 40
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub params: GraphClassParams,
    pub ell: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    pub objective: ObjectiveChoice,
    pub until: Stage,
    pub cache_dir: PathBuf,
    pub output_dir: PathBuf,
    pub tolerances: Tolerances,
    pub limits: Limits,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            params: GraphClassParams::new(3, 2, 3, 2).expect("valid defaults"),
            ell: 2,
            mask: None,
            objective: ObjectiveChoice::Zero,
            until: Stage::Verify,
            cache_dir: PathBuf::from(".cache/gb"),
            output_dir: PathBuf::from("out"),
            tolerances: Tolerances::default(),
            limits: Limits::default(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let t = &self.tolerances;
        let positive = [("gap", t.gap), ("eig", t.eig), ("col", t.col)];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(PipelineError::Config(format!(
                "tolerance `{name}` must be positive, got {v}"
            )));
        }
        if t.max_den == 0 || self.limits.max_iter == 0 || self.limits.gb_steps == 0 {
            return Err(PipelineError::Config(
                "max_den, max_iter and gb_steps must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            tol: self.tolerances.gap,
            max_iter: self.limits.max_iter,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SdpSummary {
    pub reduced_monomials: usize,
    pub basis: usize,
    pub constraints: usize,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<SdpStatus>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    /// Exact or numerically checked infeasibility ray.
    pub witness_checked: bool,
}

/// Deterministic record of a run; timings live in [`RunTimings`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub params: String,
    pub ell: u32,
    pub objective: String,
    pub stages_completed: Vec<Stage>,
    pub ideal_generators: usize,
    pub variables: usize,
    pub groebner_size: usize,
    /// `f*` reduces to zero, so the empty certificate works.
    pub fstar_in_ideal: bool,
    pub sdp: SdpSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suggested_mask: Option<usize>,
    pub rounded_psd: bool,
    pub projected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face_dim: Option<usize>,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<String>,
    pub files: BTreeMap<String, PathBuf>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// True when the last requested stage ran and produced a positive result.
    pub fn succeeded(&self, until: Stage) -> bool {
        if !self.stages_completed.contains(&until) {
            return until == Stage::Verify && self.fstar_in_ideal && self.verified;
        }
        match until {
            Stage::Solve | Stage::Factor => self.sdp.status == Some(SdpStatus::Feasible),
            Stage::Round => self.rounded_psd,
            Stage::Verify => self.verified,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunTimings {
    /// Seconds per stage.
    pub seconds: BTreeMap<String, f64>,
    /// The Gröbner basis came from the cache.
    pub groebner_cached: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: RunTimings,
    pub gram: Option<GramCertificate>,
    pub certificate: Option<PolyCertificate>,
}

struct Run<'a> {
    config: &'a PipelineConfig,
    report: RunReport,
    timings: RunTimings,
    artifacts: Vec<PathBuf>,
    clock: Instant,
}

impl Run<'_> {
    fn fail(&self, stage: Stage, message: impl fmt::Display) -> PipelineError {
        PipelineError::Stage {
            stage,
            message: message.to_string(),
            artifacts: self.artifacts.clone(),
        }
    }

    fn write(
        &mut self,
        stage: Stage,
        key: &str,
        name: &str,
        text: &str,
    ) -> Result<(), PipelineError> {
        let path = self.config.output_dir.join(name);
        fs::write(&path, text).map_err(|e| self.fail(stage, format!("{}: {e}", path.display())))?;
        self.note(key, path);
        Ok(())
    }

    fn note(&mut self, key: &str, path: PathBuf) {
        self.report.files.insert(key.to_string(), path.clone());
        self.artifacts.push(path);
    }

    fn finish(&mut self, stage: Stage) -> bool {
        self.timings
            .seconds
            .insert(stage.name().to_string(), self.clock.elapsed().as_secs_f64());
        self.clock = Instant::now();
        self.report.stages_completed.push(stage);
        stage < self.config.until
    }
}

/// Runs the stages up to `config.until`, writing artifacts, `report.json`
/// and `timings.json` into the output directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    config.validate()?;
    let mut run = Run {
        config,
        report: RunReport {
            params: config.params.to_string(),
            ell: config.ell,
            objective: config.objective.to_string(),
            ..RunReport::default()
        },
        timings: RunTimings::default(),
        artifacts: Vec::new(),
        clock: Instant::now(),
    };
    fs::create_dir_all(&config.output_dir).map_err(|e| run.fail(Stage::Ideal, e))?;
    let mut gram = None;
    let mut certificate = None;
    execute(&mut run, &mut gram, &mut certificate)?;

    let report_json = run.report.to_json();
    run.write(config.until, "report", "report.json", &report_json)?;
    let timings = serde_json::to_string_pretty(&run.timings).expect("timings serialize");
    fs::write(config.output_dir.join("timings.json"), timings)
        .map_err(|e| run.fail(config.until, e))?;
    Ok(RunOutcome {
        report: run.report,
        timings: run.timings,
        gram,
        certificate,
    })
}

fn execute(
    run: &mut Run,
    gram_out: &mut Option<GramCertificate>,
    cert_out: &mut Option<PolyCertificate>,
) -> Result<(), PipelineError> {
    let config = run.config;
    let vars = Arc::new(VarTable::new(config.params));

    let ideal = build_ideal_sos_in(&vars);
    let fstar = build_fstar_in(&vars);
    run.report.ideal_generators = ideal.len();
    run.report.variables = vars.len();
    run.write(Stage::Ideal, "ideal", "ideal.txt", &ideal.to_text())?;
    run.write(
        Stage::Ideal,
        "fstar",
        "fstar.txt",
        &format!("{}\n", fstar.to_text()),
    )?;
    if !run.finish(Stage::Ideal) {
        return Ok(());
    }

    let cache = GbCache::new(&config.cache_dir);
    let (gb, hit) = cache
        .get_or_compute(&ideal, MonomialOrder::Grevlex, config.limits.gb_steps)
        .map_err(|e| run.fail(Stage::Groebner, e))?;
    run.report.groebner_size = gb.len();
    run.timings.groebner_cached = hit;
    run.note("groebner", cache.path_for(&ideal, MonomialOrder::Grevlex));
    let target = gb
        .normal_form(&fstar)
        .map_err(|e| run.fail(Stage::Groebner, e))?;
    if target.is_zero() {
        // the empty sum of squares already certifies
        run.report.fstar_in_ideal = true;
        let cert = PolyCertificate::new(Vec::new(), config.ell)
            .map_err(|e| run.fail(Stage::Groebner, e))?;
        run.report.verified = verify_certificate(&cert, &gb, &fstar);
        run.report.rounded_psd = true;
        run.write(
            Stage::Groebner,
            "certificate",
            "certificate.txt",
            &poly_certificate_text(&cert, config.params),
        )?;
        *cert_out = Some(cert);
        run.finish(Stage::Groebner);
        return Ok(());
    }
    if !run.finish(Stage::Groebner) {
        return Ok(());
    }

    let full = reduced_monomials(&gb, config.ell).map_err(|e| run.fail(Stage::Sdp, e))?;
    run.report.sdp.reduced_monomials = full.len();
    let mask = match &config.mask {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| run.fail(Stage::Sdp, format!("{}: {e}", path.display())))?;
            Some(MonomialMask::parse(&text, &full, &vars).map_err(|e| run.fail(Stage::Sdp, e))?)
        }
        None => None,
    };
    let objective = config
        .objective
        .load(&vars, &full)
        .map_err(|e| run.fail(Stage::Sdp, e))?;
    let problem = build_sdp(&gb, &fstar, config.ell, mask.as_ref(), &objective)
        .map_err(|e| run.fail(Stage::Sdp, e))?;
    run.report.sdp.basis = problem.p();
    run.report.sdp.constraints = problem.num_constraints();
    run.report.sdp.warnings = problem.warnings().to_vec();
    let names = problem.basis_names();
    run.write(Stage::Sdp, "basis", "basis.txt", &(names.join("\n") + "\n"))?;
    run.write(Stage::Sdp, "sdpa", "problem.dat-s", &export_sdpa(&problem))?;
    if !run.finish(Stage::Sdp) {
        return Ok(());
    }

    let sol = solve(&problem, &config.solver_settings()).map_err(|e| run.fail(Stage::Solve, e))?;
    let s = &mut run.report.sdp;
    s.status = Some(sol.status);
    s.iterations = sol.iterations;
    s.primal_residual = sol.primal_residual;
    s.dual_residual = sol.dual_residual;
    s.gap = sol.gap;
    s.witness_checked = sol
        .witness
        .as_ref()
        .is_some_and(|w| w.check(&problem, config.tolerances.gap.sqrt()));
    match sol.status {
        SdpStatus::Feasible => {}
        SdpStatus::Infeasible => {
            run.report.suggestion = Some(format!("increase ell to {}", config.ell + 1));
            run.finish(Stage::Solve);
            return Ok(());
        }
        SdpStatus::Indeterminate => {
            run.report.suggestion = Some(
                "solver did not converge; try the zero objective, a mask or more iterations".into(),
            );
            run.finish(Stage::Solve);
            return Ok(());
        }
    }
    let x_path = config.output_dir.join("x.csv");
    write_matrix_csv(&x_path, &sol.x, Some(&names)).map_err(|e| run.fail(Stage::Solve, e))?;
    run.note("x", x_path);
    if !run.finish(Stage::Solve) {
        return Ok(());
    }

    let factor =
        spectral_factor(&sol.x, config.tolerances.eig).map_err(|e| run.fail(Stage::Factor, e))?;
    run.report.rank = Some(factor.rank());
    let (csv, pgm) = export_heatmap(&factor, &names, &config.output_dir.join("heatmap"))
        .map_err(|e| run.fail(Stage::Factor, e))?;
    run.note("heatmap_csv", csv);
    run.note("heatmap_pgm", pgm);
    let suggested = suggest_mask(&factor, config.tolerances.col, problem.basis());
    run.report.suggested_mask = Some(suggested.len());
    // indices refer to the full reduced basis so the file feeds back as --mask
    let in_full: Vec<Monomial> = suggested
        .retained()
        .iter()
        .map(|&i| problem.basis()[i].clone())
        .collect();
    let full_mask = MonomialMask::from_monomials(&full, &in_full, &vars)
        .map_err(|e| run.fail(Stage::Factor, e))?;
    run.write(
        Stage::Factor,
        "suggested_mask",
        "suggested_mask.txt",
        &full_mask.to_text(&full, &vars),
    )?;
    if !run.finish(Stage::Factor) {
        return Ok(());
    }

    let rounded = round_solution(
        &problem,
        &sol.x,
        &gb,
        &fstar,
        config.tolerances.max_den,
        config.limits.project_max_dim,
        &config.solver_settings(),
    )
    .map_err(|e| run.fail(Stage::Round, e))?;
    run.report.projected = rounded.projected;
    run.report.face_dim = rounded.face_dim;
    let (cert, ok) = (rounded.gram, rounded.exact);
    run.report.rounded_psd = cert.witness().is_ok();
    run.write(
        Stage::Round,
        "gram_certificate",
        "gram_certificate.txt",
        &gram_certificate_text(&cert, config.params),
    )?;
    let keep_going = run.finish(Stage::Round);
    if !keep_going || !run.report.rounded_psd {
        if !run.report.rounded_psd {
            run.report.suggestion =
                Some("rounded matrix is not PSD; try a larger max_den or a mask".into());
        }
        *gram_out = Some(cert);
        return Ok(());
    }

    match gram_to_polys(&cert, config.ell) {
        Ok(polys) => {
            run.report.verified = verify_certificate(&polys, &gb, &fstar);
            run.write(
                Stage::Verify,
                "certificate",
                "certificate.txt",
                &poly_certificate_text(&polys, config.params),
            )?;
            *cert_out = Some(polys);
        }
        Err(_) => run.report.verified = ok,
    }
    if !run.report.verified {
        let residual = gram_residual(&cert, &gb, &fstar).map_err(|e| run.fail(Stage::Verify, e))?;
        run.report.residual = Some(residual.to_text());
        run.report.suggestion =
            Some("residual is nonzero; refine the mask or the objective and rerun".into());
    }
    *gram_out = Some(cert);
    run.finish(Stage::Verify);
    Ok(())
}

/// A rounded Gram matrix and what is known about it.
#[derive(Clone, Debug)]
pub struct Rounded {
    pub gram: GramCertificate,
    pub projected: bool,
    /// Basis length after facial reduction, when that was needed.
    pub face_dim: Option<usize>,
    /// PSD and reproduces `f*` exactly modulo the ideal.
    pub exact: bool,
}

/// Rounds `x` to denominators up to `max_den`. If that is not an exact PSD
/// solution and the basis has at most `project_max_dim` entries:
///
/// 1. the rounded matrix is projected onto the constraints and the kernel
///    given by the zeros of `f*`;
/// 2. failing that, the face is reduced numerically: a rational basis of the
///    kernel at the sharpest eigenvalue gap is removed, the problem is solved
///    again over the complementary polynomial basis, and its solution is
///    rounded and projected. This repeats while gaps remain.
pub fn round_solution(
    problem: &SdpProblem,
    x: &DMatrix<f64>,
    gb: &GroebnerBasis,
    fstar: &Polynomial,
    max_den: u64,
    project_max_dim: usize,
    settings: &SolverSettings,
) -> Result<Rounded, CertifyError> {
    let vars = gb.vars();
    let basis: Vec<Polynomial> = problem
        .basis()
        .iter()
        .map(|m| Polynomial::monomial(vars.clone(), m.clone(), Rat::from(1)))
        .collect();
    let q = round_gram(x, max_den);
    let cert = GramCertificate::new(basis.clone(), q.clone())?;
    let exact = |c: &GramCertificate| {
        c.witness().is_ok() && gram_residual(c, gb, fstar).is_ok_and(|r| r.is_zero())
    };
    if exact(&cert) || problem.p() > project_max_dim {
        let exact = exact(&cert);
        return Ok(Rounded {
            gram: cert,
            projected: false,
            face_dim: None,
            exact,
        });
    }
    let zeros = monomial_kernel(gb.params(), problem.basis());
    if let Some(y) = project_gram(&q, problem.constraints(), &zeros) {
        let projected = GramCertificate::new(basis.clone(), y)?;
        if exact(&projected) {
            return Ok(Rounded {
                gram: projected,
                projected: true,
                face_dim: None,
                exact: true,
            });
        }
    }
    let (mut basis, mut x) = (basis, x.clone());
    for _ in 0..MAX_FACE_STEPS {
        let Some(kernel) = face_kernel(&x, max_den) else {
            break;
        };
        basis = complement(&basis, &kernel);
        let Ok(reduced) = grouped_sdp(
            gb,
            fstar,
            std::slice::from_ref(&basis),
            problem.ell(),
            Vec::new(),
        ) else {
            break;
        };
        let Ok(sol) = solve(&reduced, settings) else {
            break;
        };
        if sol.status != SdpStatus::Feasible {
            break;
        }
        x = sol.x;
        let mut den = max_den;
        while den <= MAX_PROJECT_DEN {
            if let Some(y) = project_gram(&round_gram(&x, den), reduced.constraints(), &[]) {
                let c = GramCertificate::new(basis.clone(), y)?;
                if exact(&c) {
                    return Ok(Rounded {
                        gram: c,
                        projected: true,
                        face_dim: Some(basis.len()),
                        exact: true,
                    });
                }
            }
            den = den.saturating_mul(100);
        }
    }
    Ok(Rounded {
        gram: cert,
        projected: false,
        face_dim: None,
        exact: false,
    })
}

/// Rational kernel of `x` at its sharpest eigenvalue drop, if one exists.
fn face_kernel(x: &DMatrix<f64>, max_den: u64) -> Option<Vec<Vec<Rat>>> {
    let (vals, _) = jacobi_eigen(x).ok()?;
    let mut gaps: Vec<(f64, usize)> = (1..vals.len())
        .map(|r| (vals[r].max(0.0) / vals[r - 1].max(f64::MIN_POSITIVE), r))
        .filter(|&(ratio, _)| ratio < KERNEL_GAP)
        .collect();
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    gaps.into_iter().find_map(|(_, rank)| {
        rational_kernel(x, rank, max_den, KERNEL_TOL).filter(|k| !k.is_empty())
    })
}

/// The basis `Vᵀ b` where the columns of `V` span the orthogonal complement
/// of `kernel`, given in reduced row echelon form.
fn complement(basis: &[Polynomial], kernel: &[Vec<Rat>]) -> Vec<Polynomial> {
    let pivots: Vec<usize> = kernel
        .iter()
        .filter_map(|k| k.iter().position(|v| !v.is_zero()))
        .collect();
    (0..basis.len())
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut w = basis[free].clone();
            for (k, &piv) in kernel.iter().zip(&pivots) {
                if !k[free].is_zero() {
                    let term = basis[piv].scale(&-k[free].clone()).expect("rational scale");
                    w = w.checked_add(&term).expect("shared variables");
                }
            }
            w
        })
        .collect()
}

/// Basis monomials evaluated at the zeros of `f*`; empty when the variety is
/// too large to enumerate.
pub fn monomial_kernel(params: GraphClassParams, basis: &[Monomial]) -> Vec<Vec<Rat>> {
    let Ok(points) = fstar_zeros(params) else {
        return Vec::new();
    };
    let mut out: Vec<Vec<Rat>> = points
        .iter()
        .map(|p| {
            basis
                .iter()
                .map(|m| Rat::from(i64::from(m.exponents().all(|(v, _)| p.get(v)))))
                .collect()
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Loads or computes the Gröbner basis of `I_sos` through the cache.
pub fn cached_groebner(
    params: GraphClassParams,
    cache_dir: &Path,
) -> Result<(GroebnerBasis, bool), PipelineError> {
    let vars = Arc::new(VarTable::new(params));
    GbCache::new(cache_dir)
        .get_or_compute(
            &build_ideal_sos_in(&vars),
            MonomialOrder::Grevlex,
            DEFAULT_STEP_BUDGET,
        )
        .map_err(|e| PipelineError::Stage {
            stage: Stage::Groebner,
            message: e.to_string(),
            artifacts: Vec::new(),
        })
}

/// Weight 1 on the diagonal entry of every basis monomial that involves an
/// edge variable or vertex variables of two different rows `g`. Minimizing
/// it pushes the solution onto same-row vertex monomials.
pub fn cross_row_penalty(basis: &[Monomial], vars: &VarTable) -> Objective {
    use crate::algebra::Var;
    let entries = basis
        .iter()
        .filter(|m| {
            let mut rows = m.exponents().map(|(i, _)| match vars.var(i) {
                Var::Vertex { g, .. } => Some(g),
                _ => None,
            });
            let first = rows.next().flatten();
            let mixed = m
                .exponents()
                .any(|(i, _)| !matches!(vars.var(i), Var::Vertex { .. }));
            mixed || rows.any(|g| g != first)
        })
        .map(|m| (m.clone(), m.clone(), Rat::from(1)))
        .collect();
    Objective::Custom(entries)
}
