//! Command-line front end for the `spirokin` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::calibration::{compensate_rows, SlackModel};
use crate::error::{Error, Result};
use crate::io::{atomic_write, joint_angles, read_json, read_shape_csv, shape_csv_bytes, write_json};
use crate::kinematics::cables::{sweep, CableRole, ScheduleRow};
use crate::kinematics::frames::{forward_shape, BackboneShape, JointConfiguration};
use crate::kinematics::{actuate, actuate_from_rest, apply_twist, ActuationCommand};
use crate::manipulator::{build_spec, Cable, ManipulatorSpec, MaterialConstants, DEFAULT_JOINT_FRACTION};
use crate::spiral::{
    compactness_residual, discretize_profile, grasp_range, profile_mesh_obj, solve_design_parameters,
    DesignConstraints, DiscreteProfile, GraspRange, Quad, SpiralParams,
};
use crate::statics::{rest_shape, solve_rest_shape, RestState};
use crate::strategy::{get_strategy, playback, strategy_names};
use crate::validation::{compare, read_mapping, Alignment, Trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

const DEFAULT_DELTA_THETA_DEG: f64 = 30.0;
const DEFAULT_THETA_SPAN_DEG: f64 = 540.0;

#[derive(Parser, Debug)]
#[command(name = "spirokin", version, about = "Spiral soft-manipulator kinematics")]
#[command(allow_negative_numbers = true, arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the spiral design and print the profile as JSON.
    Design(DesignArgs),
    /// Rest shape under gravity.
    Rest(RestArgs),
    /// Shape after shortening one cable.
    Bend(BendArgs),
    /// Shape after shortening two cables in sequence.
    Twist(TwistArgs),
    /// Stepwise shortening protocol with relax lengths for the other cables.
    Sweep(SweepArgs),
    /// Add slack compensation to a sweep schedule.
    Calibrate(CalibrateArgs),
    /// Play back a grasping strategy.
    Strategy(StrategyArgs),
    /// Compare model shapes against a marker trace.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 1.53)]
    pub m: f64,
    /// Radius of the rigid arm's last link (mm).
    #[arg(long, default_value_t = 31.5)]
    pub r_rigid: f64,
    /// Section step (degrees).
    #[arg(long, default_value_t = DEFAULT_DELTA_THETA_DEG)]
    pub delta_theta: f64,
    /// Angular extent of the profile (degrees).
    #[arg(long, default_value_t = DEFAULT_THETA_SPAN_DEG)]
    pub theta_span: f64,
    #[arg(long, default_value_t = DEFAULT_JOINT_FRACTION)]
    pub joint_fraction: f64,
    /// Profile JSON output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a revolved triangle mesh (OBJ).
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Also write the manipulator description used by the other subcommands.
    #[arg(long)]
    pub spec_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SpecArg {
    /// Manipulator description; the default trunk design when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct RestArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Base tilt below horizontal (degrees).
    #[arg(long)]
    pub tilt_deg: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct BendArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long)]
    pub cable: Cable,
    #[arg(long)]
    pub shorten_mm: f64,
    /// Start from the gravity rest shape at this tilt (degrees).
    #[arg(long)]
    pub tilt_deg: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct TwistArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long)]
    pub cable1: Cable,
    #[arg(long)]
    pub d1: f64,
    #[arg(long)]
    pub cable2: Cable,
    #[arg(long)]
    pub d2: f64,
    #[arg(long)]
    pub tilt_deg: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long, default_value = "dorsal")]
    pub cable: Cable,
    #[arg(long, default_value_t = 26)]
    pub steps: usize,
    #[arg(long, default_value_t = 5.0)]
    pub step_mm: f64,
    #[arg(long)]
    pub tilt_deg: Option<f64>,
    /// Directory for step_NNN.csv, relax.csv and schedule.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct CalibrateArgs {
    /// Residual slack per cable: dorsal,ventral_left,ventral_right (mm).
    #[arg(long, value_delimiter = ',', required = true)]
    pub slack_mm: Vec<f64>,
    #[arg(long)]
    pub steps: usize,
    /// Sweep schedule CSV to adjust.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Output path; the schedule is rewritten in place when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct StrategyArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long, required_unless_present = "list")]
    pub name: Option<String>,
    #[arg(long, required_unless_present = "list")]
    pub out: Option<PathBuf>,
    /// List the bundled strategies and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct CompareArgs {
    /// Directory of step_NNN.csv shape files.
    #[arg(long)]
    pub model_dir: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    /// JSON object mapping marker frame id to backbone frame index.
    #[arg(long)]
    pub mapping: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fit a separate rigid transform for each step.
    #[arg(long)]
    pub per_step_alignment: bool,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!(
                "error kind={} message={}",
                error_kind(&e),
                serde_json::json!(e.to_string())
            );
            EXIT_DOMAIN
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::InvalidParams(_) => "invalid_params",
        Error::NoRootInBracket { .. } => "no_root",
        Error::NotConverged { .. } => "not_converged",
        Error::IndexOutOfRange { .. } => "index",
        Error::Degenerate(_) => "degenerate",
        Error::Mismatch(_) => "mismatch",
        Error::UnknownStrategy { .. } => "unknown_strategy",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Design(a) => design(a),
        Command::Rest(a) => rest(a),
        Command::Bend(a) => bend(a),
        Command::Twist(a) => twist(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Strategy(a) => strategy(a),
        Command::Compare(a) => run_compare(a),
    }
}

/// The trunk built from the default design inputs.
pub fn default_spec() -> Result<ManipulatorSpec> {
    let params = solve_design_parameters(&DesignConstraints::trunk(1.53, 31.5))?;
    build_spec(
        &discretize_profile(&params),
        MaterialConstants::default(),
        DEFAULT_JOINT_FRACTION,
    )
}

fn load_spec(arg: &SpecArg) -> Result<ManipulatorSpec> {
    let spec = match &arg.spec {
        Some(p) => read_json::<ManipulatorSpec>(p)?,
        None => default_spec()?,
    };
    spec.validate()?;
    Ok(spec)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => {
            atomic_write(p, bytes)?;
            log::info!("wrote {}", p.display());
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn finite_deg(name: &str, v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite")));
    }
    Ok(v.to_radians())
}

#[derive(Serialize)]
struct DesignDoc<'a> {
    params: &'a SpiralParams,
    k_p: f64,
    sections: &'a [Quad],
    grasp_range: GraspRange,
    compactness_residual: f64,
}

fn design(a: DesignArgs) -> Result<()> {
    let base = DesignConstraints::trunk(a.m, a.r_rigid);
    // Keep the library's exact angles when the defaults are requested, so a
    // written spec matches the built-in one bit for bit.
    let delta = match a.delta_theta {
        d if d == DEFAULT_DELTA_THETA_DEG => base.delta_theta,
        d => finite_deg("delta-theta", d)?,
    };
    let theta_end = match a.theta_span {
        s if s == DEFAULT_THETA_SPAN_DEG => base.theta_end,
        s => base.theta_start + finite_deg("theta-span", s)?,
    };
    let c = DesignConstraints {
        delta_theta: delta,
        theta_end,
        ..base
    };
    let params = solve_design_parameters(&c)?;
    let profile: DiscreteProfile = discretize_profile(&params);
    let doc = DesignDoc {
        params: &params,
        k_p: profile.k_p,
        sections: &profile.sections,
        grasp_range: grasp_range(&params, a.m),
        compactness_residual: compactness_residual(&params),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    if let Some(p) = &a.mesh {
        atomic_write(p, profile_mesh_obj(&profile, 32).as_bytes())?;
    }
    if let Some(p) = &a.spec_out {
        let spec = build_spec(&profile, MaterialConstants::default(), a.joint_fraction)?;
        write_json(p, &spec)?;
    }
    emit(a.out.as_deref(), text.as_bytes())
}

fn rest(a: RestArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let state = solve_rest_shape(&spec, finite_deg("tilt-deg", a.tilt_deg)?)?;
    let shape = rest_shape(&spec, &state);
    emit(a.out.as_deref(), &shape_csv_bytes(&shape, &state.joint_angles)?)
}

fn shape_for(spec: &ManipulatorSpec, command: &ActuationCommand, tilt_deg: Option<f64>) -> Result<BackboneShape> {
    match tilt_deg {
        Some(t) => {
            let rest = solve_rest_shape(spec, finite_deg("tilt-deg", t)?)?;
            actuate_from_rest(spec, &rest, command)
        }
        None => Ok(forward_shape(spec, &actuate(spec, command)?)),
    }
}

fn bend(a: BendArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let command = ActuationCommand::bend(a.cable, a.shorten_mm);
    command.validate()?;
    let shape = shape_for(&spec, &command, a.tilt_deg)?;
    emit(a.out.as_deref(), &shape_csv_bytes(&shape, &joint_angles(&shape))?)
}

fn twist(a: TwistArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let command = ActuationCommand::twist(a.cable1, a.d1, a.cable2, a.d2);
    command.validate()?;
    if a.tilt_deg.is_none() {
        let r = apply_twist(&spec, (a.cable1, a.d1), (a.cable2, a.d2))?;
        if r.remainder > 0.0 || r.first.remainder_quanta > 0 {
            log::warn!("command exceeds the joint budget; the excess was not applied");
        }
    }
    let shape = shape_for(&spec, &command, a.tilt_deg)?;
    emit(a.out.as_deref(), &shape_csv_bytes(&shape, &joint_angles(&shape))?)
}

fn schedule_bytes(rows: &[ScheduleRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let spec = load_spec(&a.spec)?;
    let result = sweep(&spec, a.cable, a.steps, a.step_mm)?;
    std::fs::create_dir_all(&a.out_dir)?;
    let rest = match a.tilt_deg {
        Some(t) => solve_rest_shape(&spec, finite_deg("tilt-deg", t)?)?,
        None => RestState::straight(0.0, spec.joints()),
    };
    let rest_only = match a.tilt_deg {
        Some(_) => rest_shape(&spec, &rest),
        None => forward_shape(&spec, &JointConfiguration::straight(spec.joints())),
    };
    atomic_write(
        &a.out_dir.join("step_000.csv"),
        &shape_csv_bytes(&rest_only, &joint_angles(&rest_only))?,
    )?;
    for step in &result.steps {
        let shape = match a.tilt_deg {
            Some(_) => actuate_from_rest(&spec, &rest, &ActuationCommand::bend(a.cable, step.commanded_mm))?,
            None => forward_shape(&spec, &step.configuration),
        };
        let path = a.out_dir.join(format!("step_{:03}.csv", step.step));
        atomic_write(&path, &shape_csv_bytes(&shape, &joint_angles(&shape))?)?;
    }

    #[derive(Serialize)]
    struct RelaxRow {
        step: usize,
        cable: Cable,
        relax_mm: f64,
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for step in &result.steps {
        for &(cable, relax_mm) in &step.relax {
            w.serialize(RelaxRow {
                step: step.step,
                cable,
                relax_mm,
            })?;
        }
    }
    let relax = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    atomic_write(&a.out_dir.join("relax.csv"), &relax)?;
    atomic_write(&a.out_dir.join("schedule.csv"), &schedule_bytes(&result.schedule())?)?;
    log::info!(
        "sweep of {} steps written to {}",
        result.steps.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn calibrate(a: CalibrateArgs) -> Result<()> {
    let slack: [f64; 3] = a
        .slack_mm
        .as_slice()
        .try_into()
        .map_err(|_| Error::Domain("--slack-mm needs three values".into()))?;
    let model = SlackModel::new(slack, a.steps)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(&a.schedule)?;
    let rows: Vec<ScheduleRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    let active = rows.iter().filter(|r| r.role == CableRole::Active).count();
    if active > 0 && rows.iter().any(|r| r.role == CableRole::Active && r.step > model.steps) {
        log::warn!("schedule has steps beyond the slack model's step count");
    }
    let adjusted = compensate_rows(&rows, &model);
    let out = a.out.as_deref().unwrap_or(&a.schedule);
    atomic_write(out, &schedule_bytes(&adjusted)?)
}

#[derive(Serialize)]
struct ManifestEntry {
    index: usize,
    phase: crate::strategy::Phase,
    file: String,
    aperture: f64,
    base_pose: crate::strategy::BasePose,
    saturated_joints: usize,
    planarity_mm: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    number: u8,
    class: crate::strategy::StrategyClass,
    description: &'a str,
    object_size_mm: [f64; 2],
    keyframes: Vec<ManifestEntry>,
}

fn strategy(a: StrategyArgs) -> Result<()> {
    if a.list {
        let mut text = String::new();
        for name in strategy_names() {
            let s = get_strategy(name)?;
            text.push_str(&format!("{}\t{}\t{:?}\t{}\n", s.number, s.name, s.class, s.description));
        }
        return emit(None, text.as_bytes());
    }
    let (Some(name), Some(out)) = (a.name, a.out) else {
        return Err(Error::Domain("--name and --out are required".into()));
    };
    let spec = load_spec(&a.spec)?;
    let script = get_strategy(&name)?;
    let frames = playback(&script, &spec)?;
    std::fs::create_dir_all(&out)?;
    let mut entries = Vec::with_capacity(frames.len());
    for f in &frames {
        let file = format!("keyframe_{:02}.csv", f.index);
        atomic_write(&out.join(&file), &shape_csv_bytes(&f.shape, &joint_angles(&f.shape))?)?;
        entries.push(ManifestEntry {
            index: f.index,
            phase: f.phase,
            file,
            aperture: f.aperture,
            base_pose: f.base_pose,
            saturated_joints: f.saturated_joints,
            planarity_mm: f.planarity,
        });
    }
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            name: &script.name,
            number: script.number,
            class: script.class,
            description: &script.description,
            object_size_mm: script.object_size_mm,
            keyframes: entries,
        },
    )
}

/// `step_NNN.csv` files in `dir`, keyed by step number.
pub fn load_model_dir(dir: &Path) -> Result<BTreeMap<i64, BackboneShape>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(num) = name.strip_prefix("step_").and_then(|n| n.strip_suffix(".csv")) else {
            continue;
        };
        let Ok(step) = num.parse::<i64>() else { continue };
        out.insert(step, read_shape_csv(std::fs::File::open(&path)?)?);
    }
    if out.is_empty() {
        return Err(Error::Mismatch(format!("no step_NNN.csv files in {}", dir.display())));
    }
    Ok(out)
}

fn run_compare(a: CompareArgs) -> Result<()> {
    let model = load_model_dir(&a.model_dir)?;
    let trace = Trace::read_csv(std::fs::File::open(&a.trace)?)?;
    let mapping = read_mapping(std::fs::File::open(&a.mapping)?)?;
    let alignment = if a.per_step_alignment {
        Alignment::PerStep
    } else {
        Alignment::Global
    };
    let report = compare(&model, &trace, &mapping, alignment)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(a.out.as_deref(), text.as_bytes())
}
