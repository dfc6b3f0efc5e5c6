//! The `magk` command line: JSON in, one JSON document out.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical or theorem check
//! failure.

pub mod input;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bloch::{self, BlochError, ChernOptions, ChernResult, ModelSpec};
use crate::chars::CharError;
use crate::corep::{CorepError, MagneticContext};
use crate::groups::{CentralExtensionZ2, MagneticGroup};
use crate::torus::{self, TorusError};
use input::CatalogEntry;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{message} (at {pointer:?})")]
    Validation { pointer: String, message: String },
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Validation { pointer, message } => json!({
                "error": { "kind": "validation", "pointer": pointer, "message": message }
            }),
            CliError::Numerical(message) => json!({
                "error": { "kind": "numerical", "message": message }
            }),
        }
    }
}

fn validation(message: impl ToString) -> CliError {
    CliError::Validation {
        pointer: String::new(),
        message: message.to_string(),
    }
}

impl From<CorepError> for CliError {
    fn from(e: CorepError) -> Self {
        match e {
            CorepError::TheoremViolated(_) | CorepError::Char(CharError::NumericalDegeneracy(_)) => {
                CliError::Numerical(e.to_string())
            }
            _ => validation(e),
        }
    }
}

impl From<TorusError> for CliError {
    fn from(e: TorusError) -> Self {
        match e {
            TorusError::NonIntegral(_) => CliError::Numerical(e.to_string()),
            TorusError::Corep(c) => c.into(),
            TorusError::NotAnAction(g, h) => CliError::Validation {
                pointer: format!("/action/{g}"),
                message: format!("not an action: witness ({g}, {h})"),
            },
            _ => validation(e),
        }
    }
}

impl From<BlochError> for CliError {
    fn from(e: BlochError) -> Self {
        match e {
            BlochError::GappedAssumptionFailed { .. }
            | BlochError::NonConvergent { .. }
            | BlochError::InconsistentTotal { .. } => CliError::Numerical(e.to_string()),
            BlochError::NotHermitian(d) => CliError::Validation {
                pointer: "/model/hoppings".into(),
                message: format!("{e} (d = {d:?})"),
            },
            _ => validation(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "magk",
    version,
    about = "Magnetic equivariant K-theory and spin Chern parity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corepresentation types, generators and the restriction theorem check.
    Classify(GroupArgs),
    /// Coefficient groups for q = qmax down to qmin.
    Ktable {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = -7, allow_hyphen_values = true)]
        qmin: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        qmax: i64,
    },
    /// Restriction matrix and rational isomorphism report.
    Restrict(GroupArgs),
    /// Rational ranks of equivariant K-theory of the 2-torus.
    TorusRank {
        #[command(flatten)]
        group: GroupArgs,
        /// Action file; defaults to the catalog entry's action.
        #[arg(long)]
        action: Option<PathBuf>,
    },
    /// Chern numbers of a model, spin resolved when it carries `sz`.
    Chern(ModelArgs),
    /// Spin Chern parity of a C4T and Sz symmetric model.
    Z2(ModelArgs),
    /// Sweep every check over the catalog.
    VerifyAll(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Catalog directory; defaults to the shipped catalog.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Group spec file.
    #[arg(long, conflicts_with = "builtin")]
    pub group: Option<PathBuf>,
    /// Catalog entry name.
    #[arg(long)]
    pub builtin: Option<String>,
    /// `builtin` for the catalog entry's cocycle, or a cocycle file.
    #[arg(long)]
    pub twist: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, conflicts_with = "builtin")]
    pub model: Option<PathBuf>,
    /// Only `c4t-model`.
    #[arg(long)]
    pub builtin: Option<String>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mass: f64,
    #[arg(long, default_value_t = 48)]
    pub mesh: usize,
    /// Symmetry residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Gap tolerance relative to the spectral width.
    #[arg(long, default_value_t = 1e-6)]
    pub gap_tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn catalog(common: &CommonArgs) -> Result<Vec<CatalogEntry>, CliError> {
    let dir = common.catalog.clone().unwrap_or_else(input::default_catalog_dir);
    input::load_catalog(&dir)
}

/// A parsed group spec, optionally twisted, with the catalog entry it came
/// from and its canonical JSON form.
pub struct GroupInput {
    pub graded: (crate::groups::Group, Vec<u8>),
    pub ext: Option<CentralExtensionZ2>,
    pub entry: Option<CatalogEntry>,
    pub input: Value,
}

fn resolve(args: &GroupArgs) -> Result<GroupInput, CliError> {
    let (spec, entry) = match (&args.group, &args.builtin) {
        (Some(path), None) => (input::read_json(path)?, None),
        (None, Some(name)) => {
            let cat = catalog(&args.common)?;
            let e = input::find_entry(&cat, name)?.clone();
            (e.spec.clone(), Some(e))
        }
        _ => return Err(validation("exactly one of --group or --builtin is required")),
    };
    let twist = match args.twist.as_deref() {
        None => None,
        Some("builtin") => Some(
            entry
                .as_ref()
                .and_then(|e: &CatalogEntry| e.twist.clone())
                .ok_or_else(|| validation("--twist builtin needs a catalog entry with a twist"))?,
        ),
        Some(t) => Some(input::parse_cocycle(&input::read_json(&PathBuf::from(t))?, "/twist")?),
    };
    GroupInput::new(&spec, entry, twist)
}

impl GroupInput {
    pub fn new(spec: &Value, entry: Option<CatalogEntry>, twist: Option<Vec<Vec<i8>>>) -> Result<Self, CliError> {
        let mut input = json!({ "group": spec });
        if let Some(e) = &entry {
            input["builtin"] = json!(e.name);
        }
        let graded = input::parse_graded_group(spec, "/group")?;
        let mut res = GroupInput {
            graded,
            ext: None,
            entry,
            input,
        };
        if let Some(cocycle) = twist {
            let base = res.magnetic()?;
            res.ext = Some(input::extension(&base, &cocycle, "/twist")?);
            res.input["twist"] = json!(cocycle);
        }
        Ok(res)
    }

    pub fn magnetic(&self) -> Result<MagneticGroup, CliError> {
        MagneticGroup::new(self.graded.0.clone(), self.graded.1.clone()).map_err(|e| CliError::Validation {
            pointer: "/group/phi".into(),
            message: e.to_string(),
        })
    }

    pub fn context(&self) -> Result<MagneticContext, CliError> {
        Ok(match &self.ext {
            Some(ext) => MagneticContext::twisted(ext)?,
            None => MagneticContext::new(self.magnetic()?)?,
        })
    }

    /// Rational torus ranks; `action` is the JSON action spec, defaulting to
    /// the catalog entry's. Returns the canonical input and the result.
    pub fn torus_rank(&self, action: Option<&Value>) -> Result<(Value, Value), CliError> {
        torus_rank(self, action)
    }
}

fn envelope(command: &str, input: Value, result: Value) -> Value {
    json!({
        "tool": "magk",
        "version": VERSION,
        "command": command,
        "input": input,
        "result": result,
    })
}

fn torus_rank(res: &GroupInput, action_spec: Option<&Value>) -> Result<(Value, Value), CliError> {
    let mut input = res.input.clone();
    let (group, phi) = &res.graded;
    if let Some(ext) = &res.ext {
        let entry = res
            .entry
            .as_ref()
            .ok_or_else(|| validation("twisted torus ranks need a catalog entry"))?;
        let action = match action_spec {
            Some(v) => input::parse_action(v, group.order(), "/action")?,
            None => entry
                .action
                .clone()
                .ok_or_else(|| validation("catalog entry has no action"))?,
        };
        input["action"] = input::action_to_json(&action);
        let spin = entry
            .spin
            .ok_or_else(|| validation("catalog entry has no spin element"))?;
        let lifted = ext.proj.iter().position(|&p| p == spin).expect("surjective");
        let r = torus::magnetic_invariant_rank_spinsplit(ext, &action.restrict(&ext.proj), lifted)?;
        return Ok((input, json!({ "mode": "spin_split", "spin_split": r })));
    }
    let action = match (action_spec, res.entry.as_ref().and_then(|e| e.action.clone())) {
        (Some(v), _) => input::parse_action(v, group.order(), "/action")?,
        (None, Some(a)) => a,
        (None, None) => return Err(validation("--action is required")),
    };
    input["action"] = input::action_to_json(&action);
    torus::validate_action(group, &action)?;
    if phi.iter().all(|&p| p == 0) {
        let r = torus::delocalized_rank(group, &action)?;
        return Ok((input, json!({ "mode": "delocalized", "rank": r })));
    }
    let mg = res.magnetic()?;
    let (g0, emb) = mg.kernel();
    let r = torus::delocalized_rank(&g0, &action.restrict(&emb))?;
    let a0 = mg.antiunitary_elements()[0];
    let inv = match torus::involution_rank(&g0, &action.restrict(&emb), action.map(a0)) {
        Ok(r) => serde_json::to_value(r).expect("serializable"),
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok((
        input,
        json!({ "mode": "delocalized", "rank": r, "involution_rank_exploratory": inv }),
    ))
}

fn model_input(args: &ModelArgs) -> Result<(ModelSpec, Value), CliError> {
    match (&args.model, args.builtin.as_deref()) {
        (Some(path), None) => {
            let v = input::read_json(path)?;
            let spec = input::parse_model(&v, "/model")?;
            Ok((spec, json!({ "model": v })))
        }
        (None, Some("c4t-model")) => {
            let (m, c4t, sz) = bloch::builtin_c4t_model(args.mass);
            let spec = ModelSpec::from_model(&m, &[("c4t", &c4t), ("sz", &sz)]);
            let v = serde_json::to_value(&spec).expect("serializable");
            Ok((spec, json!({ "builtin": "c4t-model", "mass": args.mass, "model": v })))
        }
        (None, Some(other)) => Err(validation(format!(
            "unknown model builtin {other:?}; available: c4t-model"
        ))),
        _ => Err(validation("exactly one of --model or --builtin is required")),
    }
}

fn symmetry(spec: &ModelSpec, name: &str) -> Result<Option<bloch::SymmetryOp>, CliError> {
    spec.symmetry(name).transpose().map_err(|e| CliError::Validation {
        pointer: format!("/model/symmetries/{name}"),
        message: e.to_string(),
    })
}

fn chern(args: &ModelArgs, full: bool) -> Result<(Value, Value), CliError> {
    let (spec, mut input) = model_input(args)?;
    for (k, v) in [
        ("mesh", json!(args.mesh)),
        ("tol", json!(args.tol)),
        ("gap_tol", json!(args.gap_tol)),
    ] {
        input[k] = v;
    }
    let opts = ChernOptions {
        mesh: args.mesh,
        gap_rel_tol: args.gap_tol,
        symmetry_tol: args.tol,
    };
    let result = model_invariants(&spec, &opts, full)?;
    Ok((input, serde_json::to_value(result).expect("serializable")))
}

/// Chern numbers of a model spec. With `full`, the model must carry `c4t`
/// and `sz` and both are checked; otherwise `sz` is optional and without it
/// the whole model counts as spin up.
pub fn model_invariants(spec: &ModelSpec, opts: &ChernOptions, full: bool) -> Result<ChernResult, CliError> {
    if opts.mesh < 2 {
        return Err(CliError::Validation {
            pointer: "/mesh".into(),
            message: "mesh must be at least 2".into(),
        });
    }
    let model = spec.to_model()?;
    let sz = symmetry(spec, "sz")?;
    if full {
        let c4t = symmetry(spec, "c4t")?.ok_or_else(|| CliError::Validation {
            pointer: "/model/symmetries/c4t".into(),
            message: "missing field".into(),
        })?;
        let sz = sz.ok_or_else(|| CliError::Validation {
            pointer: "/model/symmetries/sz".into(),
            message: "missing field".into(),
        })?;
        return Ok(bloch::invariants(&model, &c4t, &sz, opts)?);
    }
    let (total, gap) = bloch::chern_number(&model, opts)?;
    let (spin_up, spin_down) = match sz {
        Some(sz) => {
            let (up, down) = bloch::spin_blocks(&model, &sz, opts.symmetry_tol)?;
            (bloch::chern_number(&up, opts)?.0, bloch::chern_number(&down, opts)?.0)
        }
        None => (total, 0),
    };
    Ok(ChernResult {
        total,
        spin_up,
        spin_down,
        z2_parity: spin_up.rem_euclid(2) as u8,
        gap_min: (gap * 1e12).round() / 1e12,
        mesh: opts.mesh,
    })
}

/// Runs one command; returns the JSON document and the exit code.
pub fn execute(command: &Command) -> (Value, i32) {
    let outcome: Result<(String, Value, Value, i32), CliError> = (|| match command {
        Command::Classify(g) => {
            let r = resolve(g)?;
            let result = report::classify_result(&r.context()?)?;
            Ok(("classify".into(), r.input, result, 0))
        }
        Command::Ktable { group, qmin, qmax } => {
            if qmin > qmax {
                return Err(CliError::Validation {
                    pointer: "/qmin".into(),
                    message: "qmin exceeds qmax".into(),
                });
            }
            let r = resolve(group)?;
            let basis = r.context()?.corep_basis()?;
            let mut input = r.input;
            input["qmin"] = json!(qmin);
            input["qmax"] = json!(qmax);
            Ok(("ktable".into(), input, report::ktable_result(&basis, *qmin, *qmax), 0))
        }
        Command::Restrict(g) => {
            let r = resolve(g)?;
            let result = report::restrict_result(&r.context()?)?;
            Ok(("restrict".into(), r.input, result, 0))
        }
        Command::TorusRank { group, action } => {
            let r = resolve(group)?;
            let action = action.as_ref().map(|p| input::read_json(p)).transpose()?;
            let (input, result) = r.torus_rank(action.as_ref())?;
            Ok(("torus-rank".into(), input, result, 0))
        }
        Command::Chern(m) => {
            let (input, result) = chern(m, false)?;
            Ok(("chern".into(), input, result, 0))
        }
        Command::Z2(m) => {
            let (input, result) = chern(m, true)?;
            Ok(("z2".into(), input, result, 0))
        }
        Command::VerifyAll(common) => {
            let cat = catalog(common)?;
            let (result, ok) = report::verify_all(&cat);
            Ok(("verify-all".into(), json!({}), result, if ok { 0 } else { 3 }))
        }
    })();
    match outcome {
        Ok((name, input, result, code)) => (envelope(&name, input, result), code),
        Err(e) => (e.to_json(), e.exit_code()),
    }
}

fn output_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Classify(g) | Command::Restrict(g) => g.common.output.as_ref(),
        Command::Ktable { group, .. } | Command::TorusRank { group, .. } => group.common.output.as_ref(),
        Command::Chern(m) | Command::Z2(m) => m.common.output.as_ref(),
        Command::VerifyAll(c) => c.output.as_ref(),
    }
}

/// Parses `args` (including the program name), runs, and writes the
/// report to `--output` or stdout. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let doc = json!({ "error": { "kind": "usage", "pointer": "", "message": e.to_string() } });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            return 2;
        }
    };
    let (doc, code) = execute(&cli.command);
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match (code, output_path(&cli.command)) {
        (0 | 3, Some(path)) if doc.get("error").is_none() => {
            if let Err(e) = std::fs::write(path, &text) {
                let err =
                    json!({ "error": { "kind": "io", "pointer": "", "message": format!("{}: {e}", path.display()) } });
                println!("{}", serde_json::to_string_pretty(&err).expect("serializable"));
                return 2;
            }
        }
        _ => print!("{text}"),
    }
    code
}
