//! Batch front-end: `kdvcurves <verb> --config <file> [--out <dir>] [--quiet]`.
//!
//! Exit codes: 0 success; 1 a check failed or a mathematical precondition was
//! violated; 2 a time integration was unstable, blew up or drifted off the
//! constraint; 3 the invocation, config or input files were invalid.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::calculus::{ComplexField, PeriodicGrid, RealField};
use crate::checks::{calculus_suite, eca_suite, euclid_suite, miura_suite, CheckReport, ConjugacyRun, Fixture};
use crate::eca::curve::{EcaCurve, EcaTangent, DEFAULT_DET_TOL};
use crate::eca::forms::{bracket_k, omega_k};
use crate::eca::hill::{eca_from_curvature, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS};
use crate::eca::level::LevelSetSpec;
use crate::error::{Error, Result};
use crate::euclid::curve::{euc_from_curvature, EucCurve, EucTangent, DEFAULT_EUC_CLOSURE_TOL, DEFAULT_EUC_TANGENT_TOL, DEFAULT_SPEED_TOL};
use crate::euclid::forms::omega_hat_k;
use crate::flow::{evolve, FlowSpec, FlowState, Model, Representation, TrajectoryRecord};
use crate::io::{from_json_str, io_error, read_text, to_json_string, write_text, CurveData, FieldData, SCHEMA_VERSION};
use crate::miura::{miura_curvature, miura_curve, MiuraBranchReport};
use crate::seeds::{rng_from_seed, CurveSeed, FieldSeed};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

/// Round-trip tolerance of the `reconstruct` verb.
pub const RECONSTRUCT_TOL: f64 = 1e-8;
/// Tolerance of the Miura curve checks on even rotation index.
pub const MIURA_CURVE_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "kdvcurves", version, about = "KdV and mKdV hierarchies on closed plane curves")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary on standard output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Verb {
    /// Integrate a flow and write a trajectory.
    Evolve,
    /// Run the identity check suites.
    Check,
    /// Evaluate a form or bracket on two tangents.
    Pair,
    /// Run the Miura identities and the flow conjugacy.
    Miura,
    /// Curve and curvature round trips.
    Reconstruct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Eca,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Curvature(FieldSeed),
    ComplexCurvature { re: FieldSeed, im: FieldSeed },
    Curve(CurveSeed),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub schema_version: u32,
    pub n_points: usize,
    pub flow: FlowSpec,
    pub initial: InitialState,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_trials() -> usize {
    20
}

fn default_max_mode() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub schema_version: u32,
    pub n_points: usize,
    /// Seed of every random tangent and field.
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Highest mode of random fields, capped at `n_points/4`.
    #[serde(default = "default_max_mode")]
    pub max_mode: usize,
    #[serde(default = "default_true")]
    pub calculus: bool,
    /// Equicentroaffine curvature; defaults to that of `curve`.
    #[serde(default)]
    pub kappa: Option<FieldSeed>,
    #[serde(default)]
    pub curve: Option<CurveSeed>,
    /// Euclidean curvature, also used for the Miura suite; defaults to that
    /// of `euclidean_curve`.
    #[serde(default)]
    pub kappa_hat: Option<FieldSeed>,
    #[serde(default)]
    pub euclidean_curve: Option<CurveSeed>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairForm {
    /// `ω_k` or `ω̂_k`.
    Omega,
    /// `{F, G}_k` on gradients (equicentroaffine only).
    Bracket,
}

/// A tangent: `alpha` for equicentroaffine forms and bracket gradients,
/// `lambda` and `mu` for Euclidean forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentSeed {
    #[serde(default)]
    pub alpha: Option<FieldSeed>,
    #[serde(default)]
    pub lambda: Option<FieldSeed>,
    #[serde(default)]
    pub mu: Option<FieldSeed>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub schema_version: u32,
    pub n_points: usize,
    pub geometry: Geometry,
    #[serde(default = "default_form")]
    pub form: PairForm,
    pub k: usize,
    pub kappa: FieldSeed,
    pub first: TangentSeed,
    pub second: TangentSeed,
    #[serde(default)]
    pub level: Option<LevelSetSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_form() -> PairForm {
    PairForm::Omega
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiuraConfig {
    pub schema_version: u32,
    pub n_points: usize,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_max_mode")]
    pub max_mode: usize,
    pub kappa_hat: FieldSeed,
    #[serde(default)]
    pub conjugacy: Option<ConjugacyRun>,
    /// Euclidean curve for the curve-level map and its branch report.
    #[serde(default)]
    pub curve: Option<CurveSeed>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ReconstructInput {
    Curvature(FieldSeed),
    Curve(CurveSeed),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub schema_version: u32,
    pub n_points: usize,
    pub geometry: Geometry,
    pub input: ReconstructInput,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// `pair.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub geometry: Geometry,
    pub form: PairForm,
    pub k: usize,
    pub value: f64,
}

/// `miura.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiuraReport {
    #[serde(flatten)]
    pub report: CheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<MiuraBranchReport>,
}

/// `reconstruct.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub geometry: Geometry,
    /// `max|κ(reconstructed curve) − κ|`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Constraint defect of the reconstructed curve.
    pub curve_defect: f64,
}

/// What a verb produced: files for the output directory and summary lines.
struct Outcome {
    files: Vec<(PathBuf, Artifact)>,
    summary: Vec<String>,
    code: i32,
}

enum Artifact {
    Text(String),
    Trajectory(Box<TrajectoryRecord>),
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if !cli.quiet {
                for line in &outcome.summary {
                    println!("{line}");
                }
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("kdvcurves {}: error: {e}", verb_name(cli.verb));
            exit_code(cli.verb, &e)
        }
    }
}

fn verb_name(verb: Verb) -> &'static str {
    match verb {
        Verb::Evolve => "evolve",
        Verb::Check => "check",
        Verb::Pair => "pair",
        Verb::Miura => "miura",
        Verb::Reconstruct => "reconstruct",
    }
}

/// The outcome class of an error, as an exit code.
fn exit_code(verb: Verb, e: &Error) -> i32 {
    match e {
        Error::Stability { .. } | Error::Blowup { .. } | Error::ConstraintDrift { .. } => EXIT_NUMERICAL,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Config(_)
        | Error::InvalidSpec(_)
        | Error::InvalidGrid { .. }
        | Error::LengthMismatch { .. }
        | Error::NonFinite { .. }
        | Error::GridMismatch { .. }
        | Error::InvalidCurve { .. }
        | Error::CurveThroughOrigin { .. } => EXIT_INVALID,
        _ if verb == Verb::Evolve => EXIT_INVALID,
        _ => EXIT_FAILED,
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let config = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let text = read_text(config)?;
    let origin = config.display().to_string();
    let base_dir = config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let (outcome, cfg_out) = match cli.verb {
        Verb::Evolve => {
            let cfg: EvolveConfig = load(&text, &origin)?;
            let out = output_dir(cli.out.as_deref(), cfg.out.as_deref(), &base_dir)
                .ok_or_else(|| Error::Config("evolve needs an output directory (--out or \"out\")".into()))?;
            (cmd_evolve(&cfg, &base_dir)?, Some(out))
        }
        Verb::Check => {
            let cfg: CheckConfig = load(&text, &origin)?;
            let out = output_dir(cli.out.as_deref(), cfg.out.as_deref(), &base_dir);
            (cmd_check(&cfg, &base_dir)?, out)
        }
        Verb::Pair => {
            let cfg: PairConfig = load(&text, &origin)?;
            let out = output_dir(cli.out.as_deref(), cfg.out.as_deref(), &base_dir);
            (cmd_pair(&cfg, &base_dir)?, out)
        }
        Verb::Miura => {
            let cfg: MiuraConfig = load(&text, &origin)?;
            let out = output_dir(cli.out.as_deref(), cfg.out.as_deref(), &base_dir);
            (cmd_miura(&cfg, &base_dir)?, out)
        }
        Verb::Reconstruct => {
            let cfg: ReconstructConfig = load(&text, &origin)?;
            let out = output_dir(cli.out.as_deref(), cfg.out.as_deref(), &base_dir);
            (cmd_reconstruct(&cfg, &base_dir)?, out)
        }
    };
    if let Some(dir) = cfg_out {
        commit(&dir, &outcome.files)?;
    }
    Ok(outcome)
}

/// Parse a versioned config document; `origin` names it in error messages.
pub fn load<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    // check the version first so an old config gets a clear message rather
    // than an unknown-field error
    #[derive(Deserialize)]
    struct Version {
        schema_version: Option<u32>,
    }
    let v: Version = from_json_str(text, origin)?;
    match v.schema_version {
        Some(SCHEMA_VERSION) => from_json_str(text, origin),
        Some(other) => Err(Error::Config(format!(
            "{origin}: unsupported schema_version {other} (expected {SCHEMA_VERSION})"
        ))),
        None => Err(Error::Config(format!("{origin}: missing schema_version"))),
    }
}

fn output_dir(cli: Option<&Path>, config: Option<&Path>, base_dir: &Path) -> Option<PathBuf> {
    cli.map(Path::to_path_buf).or_else(|| {
        config.map(|p| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) })
    })
}

/// Write every artifact into a staging directory next to `dir`, then move
/// the entries into place, so a failure never leaves partial output.
/// Entries of the same name already in `dir` are replaced.
fn commit(dir: &Path, files: &[(PathBuf, Artifact)]) -> Result<()> {
    let name = dir.file_name().map_or_else(|| "out".into(), |n| n.to_string_lossy().into_owned());
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| io_error(&parent, e))?;
    let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| io_error(&staging, e))?;
    }
    let staged = (|| {
        fs::create_dir_all(&staging).map_err(|e| io_error(&staging, e))?;
        for (rel, artifact) in files {
            let path = staging.join(rel);
            match artifact {
                Artifact::Text(t) => write_text(&path, t)?,
                Artifact::Trajectory(rec) => crate::io::write_trajectory(&path, rec)?,
            }
        }
        Ok(())
    })();
    if let Err(e) = staged {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    let moved = (|| {
        if !dir.exists() {
            return fs::rename(&staging, dir).map_err(|e| io_error(dir, e));
        }
        for entry in fs::read_dir(&staging).map_err(|e| io_error(&staging, e))? {
            let entry = entry.map_err(|e| io_error(&staging, e))?;
            let target = dir.join(entry.file_name());
            if target.is_dir() {
                fs::remove_dir_all(&target).map_err(|e| io_error(&target, e))?;
            }
            fs::rename(entry.path(), &target).map_err(|e| io_error(&target, e))?;
        }
        fs::remove_dir(&staging).map_err(|e| io_error(&staging, e))
    })();
    if moved.is_err() && staging.exists() {
        let _ = fs::remove_dir_all(&staging);
    }
    moved
}

fn grid(n_points: usize) -> Result<PeriodicGrid> {
    PeriodicGrid::new(n_points)
}

fn pretty(x: f64) -> String {
    format!("{x:.16e}")
}

fn validated_eca(seed: &CurveSeed, grid: &PeriodicGrid, base_dir: &Path) -> Result<EcaCurve> {
    let curve = seed.realize_eca(grid, base_dir)?;
    let rep = curve.validate(DEFAULT_DET_TOL);
    if !rep.ok {
        return Err(Error::InvalidCurve {
            defect: rep.max_det_defect,
            tolerance: DEFAULT_DET_TOL,
        });
    }
    Ok(curve)
}

fn validated_euc(seed: &CurveSeed, grid: &PeriodicGrid, base_dir: &Path) -> Result<EucCurve> {
    let curve = seed.realize_euc(grid, base_dir)?;
    let rep = curve.validate(DEFAULT_SPEED_TOL);
    if !rep.ok {
        return Err(Error::InvalidCurve {
            defect: rep.max_speed_defect,
            tolerance: DEFAULT_SPEED_TOL,
        });
    }
    Ok(curve)
}

fn cmd_evolve(cfg: &EvolveConfig, base_dir: &Path) -> Result<Outcome> {
    let g = grid(cfg.n_points)?;
    cfg.flow.validate()?;
    let state = match (&cfg.initial, cfg.flow.representation, cfg.flow.model) {
        (InitialState::Curvature(seed), Representation::Curvature, Model::Eca | Model::Euclidean) => {
            FlowState::Curvature(seed.realize(&g, base_dir)?)
        }
        (InitialState::Curvature(seed), Representation::Curvature, Model::EcaComplex) => {
            let re = seed.realize(&g, base_dir)?;
            FlowState::ComplexCurvature(ComplexField::from_parts(&re, &RealField::zeros(&g))?)
        }
        (InitialState::ComplexCurvature { re, im }, Representation::Curvature, Model::EcaComplex) => {
            FlowState::ComplexCurvature(ComplexField::from_parts(&re.realize(&g, base_dir)?, &im.realize(&g, base_dir)?)?)
        }
        (InitialState::Curve(seed), Representation::Curve, Model::Eca) => FlowState::Eca(validated_eca(seed, &g, base_dir)?),
        (InitialState::Curve(seed), Representation::Curve, Model::Euclidean) => {
            FlowState::Euc(validated_euc(seed, &g, base_dir)?)
        }
        _ => {
            return Err(Error::Config(format!(
                "initial state does not match model {:?} with representation {:?}",
                cfg.flow.model, cfg.flow.representation
            )))
        }
    };
    let rec = evolve(&state, &cfg.flow)?;
    let mut summary = vec![format!(
        "evolved {} steps to t = {} ({} snapshots; max stable dt {})",
        cfg.flow.n_steps(),
        rec.times.last().copied().unwrap_or(0.0),
        rec.states.len(),
        pretty(rec.max_stable_dt)
    )];
    for q in &rec.invariants.quantities {
        summary.push(format!(
            "{}: initial {} max abs drift {} max rel drift {}",
            q.name,
            pretty(q.initial),
            pretty(q.max_abs_drift),
            pretty(q.max_rel_drift)
        ));
    }
    Ok(Outcome {
        files: vec![(PathBuf::new(), Artifact::Trajectory(Box::new(rec)))],
        summary,
        code: EXIT_OK,
    })
}

fn report_outcome(report: &CheckReport, file: &str, json: String) -> Outcome {
    let mut summary: Vec<String> = report
        .checks
        .iter()
        .map(|(name, c)| {
            let r = c.residual.map_or_else(|| "n/a".to_string(), pretty);
            let status = if c.pass { "pass" } else { "FAIL" };
            match &c.error {
                Some(e) => format!("{status} {name}: residual {r} tolerance {} ({e})", pretty(c.tolerance)),
                None => format!("{status} {name}: residual {r} tolerance {}", pretty(c.tolerance)),
            }
        })
        .collect();
    let failures = report.failures();
    let code = if failures.is_empty() {
        summary.push(format!("all {} checks passed", report.checks.len()));
        EXIT_OK
    } else {
        eprintln!("failed checks: {}", failures.join(", "));
        EXIT_FAILED
    };
    Outcome {
        files: vec![(PathBuf::from(file), Artifact::Text(json))],
        summary,
        code,
    }
}

/// The check report a `check` config describes.
pub fn check_report(cfg: &CheckConfig, base_dir: &Path) -> Result<CheckReport> {
    let g = grid(cfg.n_points)?;
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    // realize everything before any computation
    let curve = cfg.curve.as_ref().map(|c| c.realize_eca(&g, base_dir)).transpose()?;
    let kappa = match (&cfg.kappa, &curve) {
        (Some(k), _) => Some(k.realize(&g, base_dir)?),
        (None, Some(c)) => Some(c.curvature()),
        (None, None) => None,
    };
    let euc = cfg.euclidean_curve.as_ref().map(|c| c.realize_euc(&g, base_dir)).transpose()?;
    let kappa_hat = match (&cfg.kappa_hat, &euc) {
        (Some(k), _) => Some(k.realize(&g, base_dir)?),
        (None, Some(c)) => Some(c.curvature()),
        (None, None) => None,
    };
    let mut rng = rng_from_seed(cfg.seed);
    let mut fx = Fixture {
        grid: g.clone(),
        rng: &mut rng,
        trials: cfg.trials,
        max_mode: cfg.max_mode.clamp(1, cfg.n_points / 4),
    };
    let mut report = CheckReport::default();
    if cfg.calculus {
        report.merge(calculus_suite(&mut fx));
    }
    if let Some(k) = &kappa {
        report.merge(eca_suite(&mut fx, k, curve.as_ref()));
    }
    if let Some(k) = &kappa_hat {
        report.merge(euclid_suite(&mut fx, k, euc.as_ref()));
        report.merge(miura_suite(&mut fx, k, None));
    }
    if report.checks.is_empty() {
        return Err(Error::Config("nothing to check".into()));
    }
    Ok(report)
}

fn cmd_check(cfg: &CheckConfig, base_dir: &Path) -> Result<Outcome> {
    let report = check_report(cfg, base_dir)?;
    let json = to_json_string(&report);
    Ok(report_outcome(&report, "report.json", json))
}

/// The scalar a `pair` config describes.
pub fn pair_value(cfg: &PairConfig, base_dir: &Path) -> Result<f64> {
    let g = grid(cfg.n_points)?;
    let kappa = cfg.kappa.realize(&g, base_dir)?;
    let level = cfg.level.clone().unwrap_or_else(LevelSetSpec::unconstrained);
    let field = |seed: &Option<FieldSeed>, name: &str| -> Result<RealField> {
        seed.as_ref()
            .ok_or_else(|| Error::Config(format!("tangent needs \"{name}\"")))?
            .realize(&g, base_dir)
    };
    match (cfg.geometry, cfg.form) {
        (Geometry::Eca, form) => {
            for t in [&cfg.first, &cfg.second] {
                if t.lambda.is_some() || t.mu.is_some() {
                    return Err(Error::Config("equicentroaffine tangents take only \"alpha\"".into()));
                }
            }
            let a = field(&cfg.first.alpha, "alpha")?;
            let b = field(&cfg.second.alpha, "alpha")?;
            match form {
                PairForm::Omega => omega_k(&kappa, &EcaTangent::new(a), &EcaTangent::new(b), cfg.k, &level),
                PairForm::Bracket => bracket_k(&kappa, &a, &b, cfg.k),
            }
        }
        (Geometry::Euclidean, PairForm::Omega) => {
            let mut tangents = Vec::new();
            for t in [&cfg.first, &cfg.second] {
                if t.alpha.is_some() {
                    return Err(Error::Config("Euclidean tangents take \"lambda\" and \"mu\"".into()));
                }
                // with λ omitted, solve λ_s = κ̂μ for the mean-zero λ
                let mu = field(&t.mu, "mu")?;
                let t = match &t.lambda {
                    Some(_) => EucTangent::new(field(&t.lambda, "lambda")?, mu)?,
                    None => EucTangent::from_mu(&kappa, &mu, 0.0)?,
                };
                let defect = t.tangency_residual(&kappa);
                if defect > DEFAULT_EUC_TANGENT_TOL {
                    return Err(Error::NotTangent { defect });
                }
                tangents.push(t);
            }
            omega_hat_k(&kappa, &tangents[0], &tangents[1], cfg.k, &level)
        }
        (Geometry::Euclidean, PairForm::Bracket) => {
            Err(Error::Config("brackets are only available for the equicentroaffine geometry".into()))
        }
    }
}

fn cmd_pair(cfg: &PairConfig, base_dir: &Path) -> Result<Outcome> {
    let value = pair_value(cfg, base_dir)?;
    let report = PairReport {
        geometry: cfg.geometry,
        form: cfg.form,
        k: cfg.k,
        value,
    };
    Ok(Outcome {
        files: vec![(PathBuf::from("pair.json"), Artifact::Text(to_json_string(&report)))],
        summary: vec![pretty(value)],
        code: EXIT_OK,
    })
}

fn cmd_miura(cfg: &MiuraConfig, base_dir: &Path) -> Result<Outcome> {
    let g = grid(cfg.n_points)?;
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let kappa_hat = cfg.kappa_hat.realize(&g, base_dir)?;
    let curve = cfg.curve.as_ref().map(|c| validated_euc(c, &g, base_dir)).transpose()?;
    if let Some(run) = &cfg.conjugacy {
        FlowSpec::new(Model::Euclidean, Representation::Curvature, run.n, run.t_final, run.dt).validate()?;
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut fx = Fixture {
        grid: g.clone(),
        rng: &mut rng,
        trials: cfg.trials,
        max_mode: cfg.max_mode.clamp(1, cfg.n_points / 4),
    };
    let mut report = miura_suite(&mut fx, &kappa_hat, cfg.conjugacy);
    let branch = curve.map(|gamma_hat| {
        let (phi, branch) = miura_curve(&gamma_hat);
        if !branch.antiperiodic {
            // periodic image: it is a complex equicentroaffine curve whose
            // curvature is the Miura curvature
            let det = phi.det_defect().max_abs();
            report.record("miura.curve_det", MIURA_CURVE_TOL, Ok(vec![det]));
            let k = phi.curvature().max_abs_diff(&miura_curvature(&gamma_hat.curvature()));
            report.record("miura.curve_curvature", MIURA_CURVE_TOL, Ok(vec![k]));
        }
        branch
    });
    let out = MiuraReport { report, branch };
    let json = to_json_string(&out);
    let mut outcome = report_outcome(&out.report, "miura.json", json);
    if let Some(b) = &out.branch {
        outcome.summary.push(format!(
            "branch: rotation index {} antiperiodic {} jump defect {}",
            b.rotation_index,
            b.antiperiodic,
            pretty(b.jump_defect)
        ));
    }
    Ok(outcome)
}

fn cmd_reconstruct(cfg: &ReconstructConfig, base_dir: &Path) -> Result<Outcome> {
    let g = grid(cfg.n_points)?;
    let (kappa, curve, curve_defect, kappa_back) = match (cfg.geometry, &cfg.input) {
        (Geometry::Eca, input) => {
            let kappa = match input {
                ReconstructInput::Curvature(seed) => seed.realize(&g, base_dir)?,
                ReconstructInput::Curve(seed) => validated_eca(seed, &g, base_dir)?.curvature(),
            };
            let gamma = eca_from_curvature(&kappa, DEFAULT_CLOSURE_TOL, DEFAULT_SUBSTEPS)?;
            let defect = gamma.validate(DEFAULT_DET_TOL).max_det_defect;
            let back = gamma.curvature();
            (kappa, CurveData::from(&gamma), defect, back)
        }
        (Geometry::Euclidean, input) => {
            let kappa = match input {
                ReconstructInput::Curvature(seed) => seed.realize(&g, base_dir)?,
                ReconstructInput::Curve(seed) => validated_euc(seed, &g, base_dir)?.curvature(),
            };
            let gamma = euc_from_curvature(&kappa, DEFAULT_EUC_CLOSURE_TOL)?;
            let defect = gamma.validate(DEFAULT_SPEED_TOL).max_speed_defect;
            let back = gamma.curvature();
            (kappa, CurveData::from(&gamma), defect, back)
        }
    };
    let residual = kappa_back.max_abs_diff(&kappa);
    let report = ReconstructReport {
        geometry: cfg.geometry,
        residual,
        tolerance: RECONSTRUCT_TOL,
        pass: residual <= RECONSTRUCT_TOL,
        curve_defect,
    };
    let code = if report.pass { EXIT_OK } else { EXIT_FAILED };
    if !report.pass {
        eprintln!("round-trip residual {} exceeds {}", pretty(residual), pretty(RECONSTRUCT_TOL));
    }
    Ok(Outcome {
        files: vec![
            (PathBuf::from("curvature.json"), Artifact::Text(to_json_string(&FieldData::from(&kappa)))),
            (PathBuf::from("curve.json"), Artifact::Text(to_json_string(&curve))),
            (PathBuf::from("reconstruct.json"), Artifact::Text(to_json_string(&report))),
        ],
        summary: vec![format!(
            "round-trip residual {} (curve defect {})",
            pretty(residual),
            pretty(curve_defect)
        )],
        code,
    })
}
