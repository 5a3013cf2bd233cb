//! Command-line frontend: parse, check, translate, simulate, verify,
//! and export, over model / scenario / triple files.
//!
//! Exit codes: 0 = no error findings, 2 = error findings, 1 = the input
//! itself was rejected (syntax, unresolved references, IO). Reports are
//! reproducible byte for byte for the same inputs and `--clock`; no
//! command reads the wall clock.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::lint::lint_model;
use crate::machine::{check_cohesion, check_deadlock, check_reachability, extract_state_graph};
use crate::model::WorkModel;
use crate::pattern::{Clock, Diagnostics};
use crate::report::{Finding, Report, ReportFormat, Severity};
use crate::rules::{check_constraints, RunStatus, DEFAULT_MAX_ITERATIONS};
use crate::scenario::{probe_confluence, simulate, Scenario, SimulationTrace};
use crate::schema::{
    materialize, schema_to_triples, translate, PartWholeStrategy, SemanticSchema,
    TranslationOptions, ValuePartitionStrategy,
};
use crate::store::TripleStore;
use crate::syntax::{parse_model, parse_scenario, parse_triples};
use crate::term::{DateTime, Name};

/// Clock used when `--clock` is not given; fixed so reports never depend
/// on the wall clock.
pub const DEFAULT_CLOCK_TEXT: &str = "2016-01-01T00:00:00";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Human,
    Lines,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Human => ReportFormat::Human,
            Format::Lines => ReportFormat::Lines,
        }
    }
}

#[derive(Parser)]
#[command(name = "cwp", version, about = "Model, check, and verify declarative work-product specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model file and report lints.
    Parse {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Check instance data: structure, constraints, cohesion.
    Check {
        model: PathBuf,
        /// Instance data in triple text format (repeatable).
        #[arg(long)]
        data: Vec<PathBuf>,
        #[arg(long, default_value = DEFAULT_CLOCK_TEXT)]
        clock: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Translate the class model to the axiom vocabulary (triple text).
    Translate {
        model: PathBuf,
        /// Override the model's value-partition strategy.
        #[arg(long, value_parser = ["disjoint-individuals", "disjoint-subclasses"])]
        value_partition: Option<String>,
        /// Override the model's part-whole strategy.
        #[arg(long, value_parser = ["per-association", "single-haspart"])]
        part_whole: Option<String>,
        /// Write the export here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Run a scenario and report expectation results.
    Simulate {
        model: PathBuf,
        scenario: PathBuf,
        #[arg(long, default_value = DEFAULT_CLOCK_TEXT)]
        clock: String,
        /// Write the full trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        max_iterations: u32,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Solvability verification: reachability, deadlocks, cohesion.
    Verify {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        max_iterations: u32,
        /// Also replay a scenario under this many rule orders.
        #[arg(long, default_value_t = 0)]
        permutations: u32,
        /// Scenario for the permutation probe.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_CLOCK_TEXT)]
        clock: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Canonical triple text of the translated schema or of data files.
    Export {
        model: PathBuf,
        /// Canonicalize these data files instead of exporting the schema.
        #[arg(long)]
        data: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An input the tool rejects outright (exit 1).
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Reads a file, or stdin for the conventional `-`.
fn read(path: &Path) -> Result<String, InputError> {
    if path == Path::new("-") {
        use std::io::Read as _;
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| InputError(format!("cannot read stdin: {}", e)))?;
        return Ok(text);
    }
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {}", path.display(), e)))
}

fn load_model(path: &Path) -> Result<(WorkModel, String), InputError> {
    let text = read(path)?;
    match parse_model(&text) {
        Ok(model) => Ok((model, text)),
        Err(errors) => {
            let mut msg = format!("{}: {} error(s)\n", path.display(), errors.len());
            for e in errors {
                msg.push_str(&format!("  {}\n", e));
            }
            Err(InputError(msg))
        }
    }
}

fn load_scenario_file(path: &Path) -> Result<(Scenario, String), InputError> {
    let text = read(path)?;
    match parse_scenario(&text) {
        Ok(s) => Ok((s, text)),
        Err(errors) => {
            let mut msg = format!("{}: {} error(s)\n", path.display(), errors.len());
            for e in errors {
                msg.push_str(&format!("  {}\n", e));
            }
            Err(InputError(msg))
        }
    }
}

fn load_data(paths: &[PathBuf], model: &WorkModel) -> Result<(TripleStore, Vec<(String, String)>), InputError> {
    let mut store = TripleStore::new();
    let mut digests = Vec::new();
    for path in paths {
        let text = read(path)?;
        digests.push((path.display().to_string(), crate::report::sha256_hex(text.as_bytes())));
        let parsed = parse_triples(&text).map_err(|errors| {
            let mut msg = format!("{}: {} error(s)\n", path.display(), errors.len());
            for e in errors {
                msg.push_str(&format!("  {}\n", e));
            }
            InputError(msg)
        })?;
        for t in parsed.iter() {
            for term in t.terms() {
                if let crate::term::Term::Name(n) = term {
                    if n.is_type_pred() {
                        continue;
                    }
                    match n.prefix() {
                        Some(p) if model.has_prefix(p) => {}
                        _ => {
                            return Err(InputError(format!(
                                "{}: name {} does not use a declared prefix",
                                path.display(),
                                n
                            )))
                        }
                    }
                }
            }
            store.add(t.clone()).expect("parsed triples are ground");
        }
    }
    Ok((store, digests))
}

fn parse_clock(text: &str) -> Result<DateTime, InputError> {
    DateTime::parse(text).map_err(|e| InputError(format!("--clock: {}", e)))
}

fn translate_or_input(model: &WorkModel, options: &TranslationOptions) -> Result<SemanticSchema, InputError> {
    translate(&model.class_model, options).map_err(|e| InputError(format!("translation failed: {}", e)))
}

/// Parses and lints a model.
pub fn cmd_parse(model: &WorkModel) -> Report {
    let mut report = Report::default();
    for finding in lint_model(model) {
        report.push(finding);
    }
    report.finish();
    report
}

/// Materializes the data, then runs structural checks, ASK constraints,
/// cohesion, and the abstract-instance check.
pub fn cmd_check(model: &WorkModel, data: &TripleStore, clock: DateTime) -> Result<Report, InputError> {
    let schema = translate_or_input(model, &model.options)?;
    let mut store = data.clone();
    materialize(&mut store, &schema);
    let mut report = Report::default();
    let mut diags = Diagnostics::new();
    let clock = Clock::new(clock);

    for v in crate::schema::check_structural(&store, &schema) {
        report.push(Finding::new(
            Severity::Error,
            format!("STRUCT:{}", v.kind.as_str()),
            v.subject.to_string(),
            format!("{} [{}]", v.detail, v.witness),
        ));
    }
    let violations = check_constraints(&store, &model.constraints, &schema, &clock, &mut diags)
        .map_err(|e| InputError(e.to_string()))?;
    for v in violations {
        report.push(Finding::new(
            Severity::Error,
            format!("CONSTRAINT:{}", v.constraint),
            v.instance.to_string(),
            v.message,
        ));
    }
    for machine in &model.machines {
        for e in check_cohesion(
            &model.rules,
            &model.constraints,
            &model.constructors,
            machine,
            &schema,
            &model.mutability,
        ) {
            report.push(Finding::new(
                Severity::Error,
                format!("COHESION:{}", e.kind.as_str()),
                e.subject,
                e.detail,
            ));
        }
    }

    // Instances whose most-specific asserted type is abstract cannot
    // exist; a bare order would stall in the type-guarded states.
    let mut instances: BTreeSet<Name> = BTreeSet::new();
    for t in store.matching(None, Some(&Name::type_pred()), None) {
        if let Some(s) = t.subject.as_name() {
            instances.insert(s.clone());
        }
    }
    for instance in instances {
        let types: Vec<Name> = store
            .matching(Some(&instance), Some(&Name::type_pred()), None)
            .filter_map(|t| t.object.as_name().cloned())
            .collect();
        for class in &types {
            let most_specific = !types
                .iter()
                .any(|other| other != class && schema.is_subclass(other, class));
            if most_specific && schema.classes.get(class).is_some_and(|c| c.is_abstract) {
                report.push(Finding::new(
                    Severity::Error,
                    "ABSTRACT_INSTANCE",
                    instance.to_string(),
                    format!("most specific type {} is abstract", class),
                ));
            }
        }
    }

    for d in diags.distinct() {
        report.push(Finding::new(
            Severity::Warning,
            "LINT:TypeMismatch",
            String::new(),
            d.detail,
        ));
    }
    report.finish();
    Ok(report)
}

/// Translates under optional strategy overrides; returns the report and
/// the canonical triple text of the schema.
pub fn cmd_translate(
    model: &WorkModel,
    value_partition: Option<ValuePartitionStrategy>,
    part_whole: Option<PartWholeStrategy>,
) -> Result<(Report, String), InputError> {
    let options = TranslationOptions {
        value_partition: value_partition.unwrap_or(model.options.value_partition),
        part_whole: part_whole.unwrap_or(model.options.part_whole),
    };
    let schema = translate_or_input(model, &options)?;
    let mut report = Report::default();
    for w in &schema.warnings {
        report.push(Finding::new(
            Severity::Warning,
            "TRANSLATE:TransitiveCardinalityConflict",
            match w {
                crate::schema::TranslationWarning::TransitiveCardinalityConflict {
                    association,
                    ..
                } => association.to_string(),
            },
            w.to_string(),
        ));
    }
    report.finish();
    Ok((report, schema_to_triples(&schema).serialize()))
}

/// Runs a scenario; the trace is returned alongside the report.
pub fn cmd_simulate(
    model: &WorkModel,
    scenario: &Scenario,
    clock: DateTime,
    max_iterations: u32,
) -> Result<(Report, SimulationTrace), InputError> {
    let trace = simulate(model, scenario, clock, max_iterations)
        .map_err(|e| InputError(e.to_string()))?;
    let mut report = Report::default();
    for step in &trace.steps {
        match step {
            crate::scenario::TraceStep::ExpectedState {
                name,
                label,
                actual,
                ok,
            } if !ok => {
                report.push(Finding::new(
                    Severity::Error,
                    "EXPECT:State",
                    name.to_string(),
                    format!(
                        "expected state \"{}\", found {}",
                        label,
                        if actual.is_empty() {
                            "no state".to_string()
                        } else {
                            actual.join(", ")
                        }
                    ),
                ));
            }
            crate::scenario::TraceStep::CheckedConstraints {
                expected,
                violations,
                ok,
            } if !ok => {
                let actual: Vec<String> =
                    violations.iter().map(|v| v.constraint.clone()).collect();
                report.push(Finding::new(
                    Severity::Error,
                    "EXPECT:Constraints",
                    String::new(),
                    format!("expected violations [{}], found [{}]", expected.join(", "), actual.join(", ")),
                ));
            }
            crate::scenario::TraceStep::Ran(t) if t.status != RunStatus::FixedPoint => {
                report.push(Finding::new(
                    Severity::Warning,
                    format!("ENGINE:{}", t.status.as_str()),
                    String::new(),
                    format!("run ended after {} passes without a fixed point", t.passes),
                ));
            }
            _ => {}
        }
    }
    report.finish();
    Ok((report, trace))
}

/// Reachability, deadlock, coverage, cohesion, and (optionally) the
/// rule-order permutation probe.
pub fn cmd_verify(
    model: &WorkModel,
    max_iterations: u32,
    permutations: u32,
    scenario: Option<&Scenario>,
    clock: DateTime,
) -> Result<Report, InputError> {
    let schema = translate_or_input(model, &model.options)?;
    let mut report = Report::default();
    let clock = Clock::new(clock);

    for machine in &model.machines {
        for e in check_cohesion(
            &model.rules,
            &model.constraints,
            &model.constructors,
            machine,
            &schema,
            &model.mutability,
        ) {
            report.push(Finding::new(
                Severity::Error,
                format!("COHESION:{}", e.kind.as_str()),
                e.subject,
                e.detail,
            ));
        }
        let graph = match extract_state_graph(&model.rules, machine, &schema) {
            Ok(g) => g,
            Err(e) => {
                report.push(Finding::new(
                    Severity::Error,
                    "VERIFY:MalformedRule",
                    machine.subject.to_string(),
                    e.to_string(),
                ));
                continue;
            }
        };
        for (ty, (_, unreachable)) in check_reachability(&graph, machine) {
            for state in unreachable {
                report.push(Finding::new(
                    Severity::Note,
                    "UNREACHABLE_STATE",
                    ty.to_string(),
                    format!("state \"{}\" is unreachable from \"{}\"", state, machine.initial),
                ));
            }
        }
        match check_deadlock(&graph, machine, &model.rules, &schema, &model.mutability, &clock) {
            Ok(analysis) => {
                for (ty, a) in analysis {
                    for state in &a.deadlocks {
                        report.push(Finding::new(
                            Severity::Error,
                            "DEADLOCK",
                            ty.to_string(),
                            format!("state \"{}\" has no eventually satisfiable outgoing guard", state),
                        ));
                    }
                    for gap in &a.gaps {
                        report.push(Finding::new(
                            Severity::Warning,
                            "COVERAGE_GAP",
                            ty.to_string(),
                            format!("no escape from {}", gap.describe(&model.mutability)),
                        ));
                    }
                }
            }
            Err(e) => {
                report.push(Finding::new(
                    Severity::Error,
                    "VERIFY:UnclassifiedProperty",
                    machine.subject.to_string(),
                    e.to_string(),
                ));
            }
        }
    }

    for finding in lint_model(model) {
        if finding.code == "LINT:PastDateGuard" {
            report.push(finding);
        }
    }

    if permutations > 0 {
        let scenario = scenario.ok_or_else(|| {
            InputError("--permutations needs --scenario <file> to replay".into())
        })?;
        let probe = probe_confluence(model, scenario, permutations, clock.now(), max_iterations)
            .map_err(|e| InputError(e.to_string()))?;
        if probe.confluent {
            report.push(Finding::new(
                Severity::Note,
                "CONFLUENT",
                String::new(),
                format!("{} rule orders reach the same fixed point", probe.runs),
            ));
        } else {
            let detail = match &probe.divergent {
                Some(d) => format!(
                    "order [{}] reaches {}, order [{}] reaches {}",
                    d.baseline_order.join(","),
                    d.baseline_digest,
                    d.divergent_order.join(","),
                    d.divergent_digest
                ),
                None => "a rule order failed to reach a fixed point".into(),
            };
            report.push(Finding::new(Severity::Error, "NOT_CONFLUENT", String::new(), detail));
        }
    }

    report.finish();
    Ok(report)
}

/// Schema export, or canonicalized data when `--data` files are given.
pub fn cmd_export(model: &WorkModel, data: Option<&TripleStore>) -> Result<String, InputError> {
    match data {
        Some(store) => Ok(store.serialize()),
        None => {
            let schema = translate_or_input(model, &model.options)?;
            Ok(schema_to_triples(&schema).serialize())
        }
    }
}

fn write_out(path: Option<&Path>, content: &str) -> Result<(), InputError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| InputError(format!("cannot write {}: {}", p.display(), e))),
        None => {
            print!("{}", content);
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, InputError> {
    match cli.command {
        Command::Parse { model, format } => {
            let (parsed, text) = load_model(&model)?;
            let mut report = cmd_parse(&parsed);
            report.inputs.clear();
            report.add_input(model.display().to_string(), text.as_bytes());
            print!("{}", report.render(format.into()));
            Ok(report.exit_code())
        }
        Command::Check {
            model,
            data,
            clock,
            format,
        } => {
            let (parsed, text) = load_model(&model)?;
            let (store, digests) = load_data(&data, &parsed)?;
            let clock = parse_clock(&clock)?;
            let mut report = cmd_check(&parsed, &store, clock)?;
            report.inputs.clear();
            report.add_input(model.display().to_string(), text.as_bytes());
            for (name, digest) in digests {
                report.inputs.push((name, digest));
            }
            print!("{}", report.render(format.into()));
            Ok(report.exit_code())
        }
        Command::Translate {
            model,
            value_partition,
            part_whole,
            out,
            format,
        } => {
            let (parsed, _) = load_model(&model)?;
            let vp = value_partition.as_deref().map(|s| match s {
                "disjoint-subclasses" => ValuePartitionStrategy::DisjointSubclasses,
                _ => ValuePartitionStrategy::DisjointIndividuals,
            });
            let pw = part_whole.as_deref().map(|s| match s {
                "single-haspart" => PartWholeStrategy::SingleHasPart,
                _ => PartWholeStrategy::PerAssociation,
            });
            let (report, export) = cmd_translate(&parsed, vp, pw)?;
            write_out(out.as_deref(), &export)?;
            eprint!("{}", report.render(format.into()));
            Ok(report.exit_code())
        }
        Command::Simulate {
            model,
            scenario,
            clock,
            trace,
            max_iterations,
            format,
        } => {
            let (parsed, model_text) = load_model(&model)?;
            let (events, scenario_text) = load_scenario_file(&scenario)?;
            let clock = parse_clock(&clock)?;
            let (mut report, sim_trace) = cmd_simulate(&parsed, &events, clock, max_iterations)?;
            report.inputs.clear();
            report.add_input(model.display().to_string(), model_text.as_bytes());
            report.add_input(scenario.display().to_string(), scenario_text.as_bytes());
            if let Some(path) = &trace {
                write_out(Some(path), &sim_trace.render())?;
            }
            print!("{}", report.render(format.into()));
            Ok(report.exit_code())
        }
        Command::Verify {
            model,
            max_iterations,
            permutations,
            scenario,
            clock,
            format,
        } => {
            let (parsed, text) = load_model(&model)?;
            let scenario_parsed = match &scenario {
                Some(path) => Some(load_scenario_file(path)?.0),
                None => None,
            };
            let clock = parse_clock(&clock)?;
            let mut report = cmd_verify(
                &parsed,
                max_iterations,
                permutations,
                scenario_parsed.as_ref(),
                clock,
            )?;
            report.inputs.clear();
            report.add_input(model.display().to_string(), text.as_bytes());
            print!("{}", report.render(format.into()));
            Ok(report.exit_code())
        }
        Command::Export { model, data, out } => {
            let (parsed, _) = load_model(&model)?;
            let text = if data.is_empty() {
                cmd_export(&parsed, None)?
            } else {
                let (store, _) = load_data(&data, &parsed)?;
                cmd_export(&parsed, Some(&store))?
            };
            write_out(out.as_deref(), &text)?;
            Ok(0)
        }
    }
}

/// Entry point used by the binary. Returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            1
        }
    }
}
