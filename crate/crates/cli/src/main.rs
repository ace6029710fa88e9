use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nahodge::blowup::{run_ledger, Ledger, LedgerReport};
use nahodge::hodge_descent::rational_descent;
use nahodge::invariants::{
    property_check_family, property_check_map, tuple_table, Property, PropertyVerdict, Scope, Witness,
};
use nahodge::io::{
    default_family, parse_nf, DescentDump, DescentFile, EvFile, FieldFile, FrameFile, KappaDump, KappaEntry,
    OutputFormat, Report, RunConfig, SpectrumDump,
};
use nahodge::levi_civita::default_truncation;
use nahodge::number_field::{NFElem, NumberField};
use nahodge::quantum_model::{
    build_kappa_cubic, build_kappa_generic, build_kappa_nef_surface, verify_hodge_compatibility, CohomologyFrame,
    CorrelatorTable, Kappa, NefParameters, Tau,
};
use nahodge::scalar::fmt_rational;
use nahodge::spectral::{render_eigenvalue, spectrum, BMatrix};
use nahodge::Error;

#[derive(Parser)]
#[command(name = "nahodge", version, about = "Spectra, invariant tuples and blow-up ledgers over Levi-Civita fields")]
struct Cli {
    /// Truncation order for inexact series (overrides QH_TRUNC).
    #[arg(long, global = true)]
    truncation: Option<u32>,
    /// Threshold convention tag echoed into reports.
    #[arg(long, global = true, default_value = "1/2")]
    epsilon: String,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Reject evaluation maps that vanish on every curve class.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Auto,
    Nef,
    Cubic,
    Generic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TauChoice {
    Auto,
    Zero,
    Formal,
}

#[derive(clap::Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "auto")]
    model: Model,
    #[arg(long, value_enum, default_value = "auto")]
    tau: TauChoice,
}

#[derive(Subcommand)]
enum Command {
    /// Print the matrix of quantum multiplication by the Euler field.
    Kappa {
        frame: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Spectrum and invariant tuples of an evaluated matrix.
    Spectrum {
        frame: PathBuf,
        ev: PathBuf,
        /// Splitting field: a preset (Q, Q(i), Q(w), Q(zp)) or a field file.
        #[arg(long)]
        field: Option<String>,
        /// Known field elements that may occur as eigenvalue coefficients.
        #[arg(long = "hint")]
        hints: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Check the club or heart property.
    Property {
        #[arg(value_parser = ["club", "heart"])]
        property: String,
        frame: PathBuf,
        /// Evaluation-map file; its family section, if any, is used.
        #[arg(long)]
        ev: Option<PathBuf>,
        /// One-parameter family sending each curve class to t^(c1 . beta).
        #[arg(long, value_parser = ["t"], conflicts_with = "ev")]
        family: Option<String>,
        #[arg(long)]
        field: Option<String>,
        #[arg(long = "hint")]
        hints: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Audit a weak-factorization ledger.
    Ledger {
        file: PathBuf,
        /// Value of nu at the target eigenvalue on the starting frame.
        #[arg(long)]
        target_nu: Option<usize>,
    },
    /// Search for an invertible rational combination of coefficient layers.
    Descent { file: PathBuf },
}

enum Failure {
    Input(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_input_error(&e) {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e)
        }
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::InvalidFrame(_)
            | Error::InvalidField(_)
            | Error::Shape(_)
            | Error::FieldMismatch
            | Error::DegreeMismatch { .. }
            | Error::MissingCorrelator(_)
            | Error::MissingExponential(_)
            | Error::NotASurface
            | Error::NotNef
            | Error::NotNormalizable { .. }
            | Error::NonZeroConstantInWrongDegree { .. }
            | Error::Reducible(_)
            | Error::NonPolynomialParameter(_)
    )
}

type Outcome = Result<(String, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Input(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn load_frame(path: &Path) -> Result<(CohomologyFrame, Option<CorrelatorTable>), Failure> {
    let file: FrameFile = load_json(path)?;
    Ok(file.load()?)
}

fn load_field(arg: &str) -> Result<Arc<NumberField>, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let file: FieldFile = load_json(path)?;
        return Ok(file.load()?);
    }
    Ok(FieldFile::Preset(arg.to_string()).load()?)
}

fn point_slot(frame: &CohomologyFrame) -> Option<usize> {
    let top = 2 * frame.dim_c() as i64;
    frame.hodge_subbasis().iter().position(|&i| frame.degrees()[i] == top)
}

fn resolve_model(frame: &CohomologyFrame, table: Option<&CorrelatorTable>, args: &ModelArgs) -> (Model, TauChoice) {
    let model = match args.model {
        Model::Auto if build_kappa_cubic(frame).is_ok() => Model::Cubic,
        Model::Auto if frame.data().nef_canonical && frame.dim_c() == 2 => Model::Nef,
        Model::Auto if table.is_none() && frame.cone().is_empty() && frame.dim() == 1 => Model::Nef,
        Model::Auto => Model::Generic,
        m => m,
    };
    let tau = match (args.tau, model) {
        (TauChoice::Auto, Model::Cubic) => TauChoice::Zero,
        (TauChoice::Auto, _) => TauChoice::Formal,
        (t, _) => t,
    };
    (model, tau)
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Auto => "auto",
        Model::Nef => "nef",
        Model::Cubic => "cubic",
        Model::Generic => "generic",
    }
}

fn build_kappa(
    frame: &CohomologyFrame,
    table: Option<&CorrelatorTable>,
    args: &ModelArgs,
) -> Result<(Kappa, Model, TauChoice), Failure> {
    let (model, tau_choice) = resolve_model(frame, table, args);
    let tau = match tau_choice {
        TauChoice::Zero => Tau::zero(frame),
        _ => Tau::formal(frame),
    };
    let kappa = match model {
        Model::Cubic => {
            if tau_choice != TauChoice::Zero {
                return Err(Failure::Input("the cubic model is only available at tau = 0".into()));
            }
            build_kappa_cubic(frame)?
        }
        Model::Nef => {
            if frame.dim_c() != 2 {
                return Err(Error::NotASurface.into());
            }
            let slot = point_slot(frame).ok_or_else(|| Failure::Input("no point class in the Hodge subbasis".into()))?;
            let params =
                NefParameters { f0: tau.coeffs[0].clone(), f_point: tau.coeffs[slot].clone(), odd_block: None };
            build_kappa_nef_surface(frame, &params)?
        }
        Model::Generic => {
            let table = table.ok_or_else(|| Failure::Input("the generic model needs a correlator table in the frame file".into()))?;
            build_kappa_generic(frame, table, &tau)?
        }
        Model::Auto => unreachable!("resolved above"),
    };
    Ok((kappa, model, tau_choice))
}

fn tau_name(t: TauChoice) -> &'static str {
    match t {
        TauChoice::Zero => "zero",
        _ => "formal",
    }
}

fn parse_hints(hints: &[String], field: &Arc<NumberField>) -> Result<Vec<NFElem>, Failure> {
    Ok(hints.iter().map(|h| parse_nf(h, field)).collect::<Result<_, _>>()?)
}

fn emit<T: Serialize>(config: &RunConfig, command: &str, body: T, text: impl FnOnce(&T) -> String) -> String {
    match config.format {
        OutputFormat::Json => {
            let report = Report { command: command.to_string(), config: config.clone(), body };
            serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
        }
        OutputFormat::Text => format!("{}\n# command={command}\n{}", config.header(), text(&body)),
    }
}

fn cmd_kappa(config: &RunConfig, frame_path: &Path, args: &ModelArgs) -> Outcome {
    let (frame, table) = load_frame(frame_path)?;
    let (kappa, model, tau) = build_kappa(&frame, table.as_ref(), args)?;
    let hodge = verify_hodge_compatibility(&frame, &kappa)?;
    let labels = frame.labels();
    let mut entries = Vec::new();
    for col in 0..frame.dim() {
        for row in 0..frame.dim() {
            let x = kappa.matrix.get(row, col);
            if !x.is_exact_zero() {
                entries.push(KappaEntry { row: labels[row].clone(), col: labels[col].clone(), value: x.to_string() });
            }
        }
    }
    let violations: Vec<String> = hodge
        .violations
        .iter()
        .map(|v| match (v.row, v.col) {
            (Some(r), Some(c)) => format!("[{}, {}] {}", labels[r], labels[c], v.detail),
            _ => v.detail.clone(),
        })
        .collect();
    let dump = KappaDump {
        frame: frame.name().to_string(),
        model: model_name(model).into(),
        tau: tau_name(tau).into(),
        entries,
        hodge_compatible: hodge.is_compatible(),
        violations,
    };
    let ok = dump.hodge_compatible;
    let out = emit(config, "kappa", dump, |d| {
        let mut s = format!("frame: {}\nmodel: {}\ntau: {}\n", d.frame, d.model, d.tau);
        for e in &d.entries {
            let _ = writeln!(s, "kappa[{}, {}] = {}", e.row, e.col, e.value);
        }
        let _ = writeln!(s, "hodge compatible: {}", if d.hodge_compatible { "yes" } else { "no" });
        for v in &d.violations {
            let _ = writeln!(s, "  violation: {v}");
        }
        s
    });
    Ok((out, ok))
}

fn rows_text(rows: &[Witness]) -> String {
    let mut s = String::from("eigenvalue | mult | rho nu nu' gamma\n");
    for r in rows {
        let t = r.tuple;
        let _ = writeln!(s, "{} | {} | {} {} {} {}", r.eigenvalue, r.multiplicity, t.rho, t.nu, t.nu_prime, t.gamma);
    }
    s
}

fn field_label(field: &Arc<NumberField>) -> String {
    match FieldFile::describe(field) {
        FieldFile::Preset(p) => p,
        FieldFile::Explicit { minpoly, .. } => format!("Q[{}]/({})", field.var(), minpoly.join(", ")),
    }
}

fn cmd_spectrum(
    config: &RunConfig,
    frame_path: &Path,
    ev_path: &Path,
    field: Option<&str>,
    hints: &[String],
    args: &ModelArgs,
) -> Outcome {
    let (frame, table) = load_frame(frame_path)?;
    let mut ev_file: EvFile = load_json(ev_path)?;
    let target = field.map(load_field).transpose()?;
    if ev_file.field.is_none() {
        if let Some(k) = &target {
            ev_file.field = Some(FieldFile::describe(k));
        }
    }
    let ev = ev_file.load(&frame)?;
    let norm = ev.check_normalizable()?;
    let field = target.unwrap_or_else(|| ev.field().clone());
    let hints = parse_hints(hints, &field)?;
    let (kappa, _, _) = build_kappa(&frame, table.as_ref(), args)?;
    let a = BMatrix::from_kappa(&kappa, &ev)?;
    let report = spectrum(&a, &field, &hints)?;
    let table = tuple_table(&report, &frame.subspaces())?;
    let dump = SpectrumDump {
        frame: frame.name().to_string(),
        field: field_label(&field),
        size: report.size(),
        lambda: norm.lambda.to_string(),
        char_poly: report.char_poly.render("X"),
        squarefree: report.squarefree.render("X"),
        rows: table
            .iter()
            .map(|r| Witness { eigenvalue: render_eigenvalue(&r.value), multiplicity: r.multiplicity, tuple: r.tuple })
            .collect(),
    };
    let out = emit(config, "spectrum", dump, |d| {
        format!(
            "frame: {}\nfield: {}\nsize: {}\nlambda: {}\ncharacteristic polynomial (b-normalized): {}\nsquarefree part: {}\n{}",
            d.frame,
            d.field,
            d.size,
            d.lambda,
            d.char_poly,
            d.squarefree,
            rows_text(&d.rows)
        )
    });
    Ok((out, true))
}

fn scope_name(s: &Scope) -> &'static str {
    match s {
        Scope::Pointwise => "pointwise",
        Scope::Generic => "generic",
        Scope::Vacuous => "vacuous (nu = 0 everywhere)",
        Scope::Skipped => "skipped (map vanishes on curve classes)",
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_property(
    config: &RunConfig,
    property: &str,
    frame_path: &Path,
    ev_path: Option<&Path>,
    field: Option<&str>,
    hints: &[String],
    args: &ModelArgs,
) -> Outcome {
    let property = Property::parse(property)?;
    let (frame, table) = load_frame(frame_path)?;
    let target = field.map(load_field).transpose()?;
    let ev_file: Option<EvFile> = ev_path.map(load_json).transpose()?;
    let verdict: PropertyVerdict = if frame.hochschild(2).is_empty() {
        PropertyVerdict::vacuous(property, Scope::Vacuous)
    } else {
        let (kappa, _, _) = build_kappa(&frame, table.as_ref(), args)?;
        match ev_file {
            Some(mut file) => {
                if file.field.is_none() {
                    file.field = target.as_ref().map(FieldFile::describe);
                }
                match file.load_family(&frame)? {
                    Some(family) => {
                        let hints = parse_hints(hints, family.field())?;
                        property_check_family(property, &frame, &kappa, &family, &hints)?
                    }
                    None => {
                        let ev = file.load(&frame)?;
                        let field = target.unwrap_or_else(|| ev.field().clone());
                        let hints = parse_hints(hints, &field)?;
                        property_check_map(property, &frame, &kappa, &ev, &field, &hints, config.strict)?
                    }
                }
            }
            None => {
                let field = target.unwrap_or_else(|| frame.field().clone());
                let hints = parse_hints(hints, &field)?;
                let family = default_family(&frame, &field)?;
                property_check_family(property, &frame, &kappa, &family, &hints)?
            }
        }
    };
    let ok = verdict.holds;
    let frame_name = frame.name().to_string();
    let out = emit(config, "property", verdict, |v| {
        let mut s = format!(
            "frame: {frame_name}\nproperty: {}\nscope: {}\nverdict: {}\n",
            v.property.name(),
            scope_name(&v.scope),
            if v.holds { "PASS" } else { "FAIL" }
        );
        if !v.table.is_empty() {
            s.push_str(&rows_text(&v.table));
        }
        for w in &v.witnesses {
            let _ = writeln!(s, "witness: {} with {}", w.eigenvalue, w.tuple);
        }
        if !v.certificates.is_empty() {
            let _ = writeln!(s, "genericity certificates: {} polynomials in t (listed in json output)", v.certificates.len());
        }
        match &v.exceptional {
            Some(pts) => {
                let _ = writeln!(s, "exceptional parameters: {{{}}}", pts.join(", "));
            }
            None if v.scope == Scope::Generic => s.push_str("exceptional parameters: not split over the field\n"),
            None => {}
        }
        s
    });
    Ok((out, ok))
}

fn cmd_ledger(config: &RunConfig, path: &Path, target_nu: Option<usize>) -> Outcome {
    let mut ledger: Ledger = load_json(path)?;
    if let (Some(nu), Some(first)) = (target_nu, ledger.frames.first_mut()) {
        first.invariants.nu = Some(nu);
    }
    let report = match run_ledger(&ledger) {
        Ok(r) => r,
        Err(e @ Error::InconsistentLedger(_)) => {
            let text = emit(config, "ledger", e.to_string(), |m| format!("verdict: INCONSISTENT\n{m}\n"));
            return Ok((text, false));
        }
        Err(e) => return Err(e.into()),
    };
    let out = emit(config, "ledger", report, ledger_text);
    Ok((out, true))
}

fn opt(x: Option<usize>) -> String {
    x.map_or_else(|| "?".into(), |v| v.to_string())
}

fn ledger_text(r: &LedgerReport) -> String {
    let mut s = format!("ledger: {}\n", r.ledger);
    for eq in &r.equalities {
        let terms: Vec<String> =
            eq.terms.iter().map(|t| format!("{}[{}#{}]={}", t.center, t.step, t.copy, opt(t.value))).collect();
        let rhs = if terms.is_empty() { String::new() } else { format!(" + {}", terms.join(" + ")) };
        let _ = writeln!(s, "{}: {} = {}{}", eq.invariant, opt(eq.start), opt(eq.end), rhs);
        if let Some(u) = eq.unexplained.filter(|u| *u != 0) {
            let names: Vec<String> = eq.candidates.iter().map(|c| format!("{}[{}#{}]", c.center, c.step, c.copy)).collect();
            let _ = writeln!(s, "  unexplained {u}, carried by one of: {}", names.join(", "));
        }
    }
    let audited: Vec<String> = r.audited_steps.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(s, "audited steps: [{}]", audited.join(", "));
    let _ = writeln!(s, "verdict: {}", r.verdict);
    s
}

fn cmd_descent(config: &RunConfig, path: &Path) -> Outcome {
    let file: DescentFile = load_json(path)?;
    let (decomp, witness, descent_config) = file.load()?;
    let d = match rational_descent(&decomp, &witness, &descent_config) {
        Ok(d) => d,
        Err(e @ (Error::NotInvertible(_) | Error::DescentSaturated(_))) => {
            let text = emit(config, "descent", e.to_string(), |m| format!("verdict: FAIL\n{m}\n"));
            return Ok((text, false));
        }
        Err(e) => return Err(e.into()),
    };
    let dump = DescentDump {
        tuple: d.tuple.iter().map(fmt_rational).collect(),
        m: d.m,
        denominator: d.denominator,
        matrix: (0..d.matrix.rows()).map(|i| d.matrix.row(i).iter().map(fmt_rational).collect()).collect(),
        det: fmt_rational(&d.det),
        witness_valuation: fmt_rational(&d.witness_valuation),
        tried: d.tried,
    };
    let out = emit(config, "descent", dump, |d| {
        let mut s = format!(
            "tuple: ({})\nM: {}\ndenominator: {}\ndeterminant: {}\nwitness valuation: {}\ntuples tried: {}\nmatrix:\n",
            d.tuple.join(", "),
            d.m,
            d.denominator,
            d.det,
            d.witness_valuation,
            d.tried
        );
        for row in &d.matrix {
            let _ = writeln!(s, "  [{}]", row.join(", "));
        }
        s.push_str("verdict: PASS\n");
        s
    });
    Ok((out, true))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.truncation {
        std::env::set_var("QH_TRUNC", n.to_string());
    }
    let config = RunConfig {
        truncation: fmt_rational(&default_truncation()),
        epsilon: cli.epsilon.clone(),
        format: match cli.format {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        },
        seed: cli.seed,
        strict: cli.strict,
    };
    let result = match &cli.command {
        Command::Kappa { frame, model } => cmd_kappa(&config, frame, model),
        Command::Spectrum { frame, ev, field, hints, model } => {
            cmd_spectrum(&config, frame, ev, field.as_deref(), hints, model)
        }
        Command::Property { property, frame, ev, family: _, field, hints, model } => {
            cmd_property(&config, property, frame, ev.as_deref(), field.as_deref(), hints, model)
        }
        Command::Ledger { file, target_nu } => cmd_ledger(&config, file, *target_nu),
        Command::Descent { file } => cmd_descent(&config, file),
    };
    match result {
        Ok((out, ok)) => {
            print!("{out}");
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            if let Error::SplitFailure { degree, .. } = &e {
                eprintln!("hint: pass --field with an extension containing the roots (degree {degree} over the current field)");
            }
            ExitCode::from(1)
        }
    }
}
