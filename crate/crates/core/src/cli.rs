//! `pnet` command-line front end.
//!
//! Exit codes: 0 success, 1 input or validation error (or a failed
//! comparison), 2 resource limit exceeded.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{self, AnalysisError, StatsAccumulator, Waypoint, WaypointFilter};
use crate::asp::{self, AspDialect, AspLevel, AspVariant};
use crate::engine::{
    cross_validate, walk, EngineError, EnumerationConfig, LayeredGraph, Limits, ResetMode,
    SemanticsMode,
};
use crate::io::{self as netio, AnswerFormat, TraceSequence, TraceWriter};
use crate::model::{Marking, PetriNet};

/// Environment variable with default limits, e.g. `sequences=1000,states=50000`.
pub const LIMITS_ENV: &str = "PNET_LIMITS";

#[derive(Parser, Debug)]
#[command(
    name = "pnet",
    version,
    about = "Exhaustive Petri net simulation and ASP encoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count (and optionally dump) every execution sequence.
    Simulate(SimulateArgs),
    /// Write the answer-set program simulating the net.
    EmitAsp(EmitArgs),
    /// Check a horizon-bounded property.
    Analyze(AnalyzeArgs),
    /// Per-step mean, min, max and distinct counts of places.
    Stats(StatsArgs),
    /// Compare saved solver output with native enumeration.
    Crossval(CrossvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Net description file (.pnet).
    net: PathBuf,
    /// Horizon k: transitions fire at steps 0..=k.
    #[arg(long)]
    steps: usize,
    /// set | max | interleaved
    #[arg(long, default_value = "set")]
    semantics: SemanticsMode,
    /// contention | standard
    #[arg(long = "reset-mode", default_value = "contention")]
    reset_mode: ResetMode,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long = "limit-sequences")]
    limit_sequences: Option<u64>,
    #[arg(long = "limit-states")]
    limit_states: Option<u64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    limits: LimitArgs,
    /// Also write every sequence.
    #[arg(long)]
    dump: bool,
}

#[derive(Args, Debug)]
struct EmitArgs {
    #[command(flatten)]
    common: Common,
    /// Largest representable token count (num(0..ntok)).
    #[arg(long)]
    ntok: Option<u64>,
    /// base | reset | inhibit | read | auto
    #[arg(long, default_value = "auto")]
    level: String,
    /// legacy (`#sum[..]`) or clingo (`#sum{..}`) aggregates.
    #[arg(long, default_value = "legacy")]
    dialect: AspDialect,
    /// Append a `% label` comment naming each line's rule.
    #[arg(long)]
    annotate: bool,
    /// Compare the emitted facts with a golden listing written with pooled
    /// or ranged shorthand instead of printing the program.
    #[arg(long = "expand-shorthand", value_name = "GOLDEN")]
    expand_shorthand: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Property {
    Reachable,
    Bounded,
    Deadlocks,
    Liveness,
    TInvariants,
    PInvariants,
    Waypoints,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long, value_enum)]
    property: Property,
    /// Partial marking for `reachable`, e.g. `bpg13=4,dhap=2`.
    #[arg(long)]
    target: Option<String>,
    /// Token bound for `bounded`.
    #[arg(long)]
    bound: Option<u64>,
    /// Transition for `liveness`.
    #[arg(long)]
    transition: Option<String>,
    /// Largest place set tried by `p-invariants`.
    #[arg(long = "max-subset", default_value_t = 3)]
    max_subset: usize,
    /// Way-point such as `bpg13=4@5`, `dhap>=1@any`, `g3p=0 then g3p>=1`
    /// or `depletion_recovery(dhap)`; repeatable.
    #[arg(long = "waypoint")]
    waypoints: Vec<String>,
    /// How many witnesses to include in reports.
    #[arg(long = "max-witnesses", default_value_t = 10)]
    max_witnesses: usize,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    limits: LimitArgs,
    /// Place to aggregate; repeatable.
    #[arg(long = "place", required = true)]
    places: Vec<String>,
    /// Only aggregate sequences passing these way-points; repeatable.
    #[arg(long = "waypoint")]
    waypoints: Vec<String>,
}

#[derive(Args, Debug)]
struct CrossvalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    limits: LimitArgs,
    /// Saved solver output.
    #[arg(long)]
    answers: PathBuf,
    /// One answer set per line instead of `Answer: N` blocks.
    #[arg(long)]
    plain: bool,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Limit(String),
    /// The reader of our output went away; not worth reporting.
    BrokenPipe,
    /// Command ran but the check it performs failed.
    Mismatch,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::BrokenPipe => 0,
            CliError::Input(_) | CliError::Mismatch => 1,
            CliError::Limit(_) => 2,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::LimitExceeded { .. } => CliError::Limit(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Engine(e) => e.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return CliError::BrokenPipe;
        }
        CliError::Input(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

/// Parses `sequences=N,states=M`.
pub fn parse_limits(text: &str) -> Result<Limits, String> {
    let mut limits = Limits::unlimited();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{part}`"))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| format!("`{key}` needs a positive integer"))?;
        if value == 0 {
            return Err(format!("`{key}` must be positive"));
        }
        match key.trim() {
            "sequences" => limits.max_sequences = Some(value),
            "states" => limits.max_states = Some(value),
            other => return Err(format!("unknown limit `{other}`")),
        }
    }
    Ok(limits)
}

fn resolve_limits(args: &LimitArgs, env: Option<&str>) -> Result<Limits, CliError> {
    let mut limits = match env {
        Some(text) => {
            parse_limits(text).map_err(|e| CliError::Input(format!("{LIMITS_ENV}: {e}")))?
        }
        None => Limits::unlimited(),
    };
    for (flag, v) in [
        ("--limit-sequences", args.limit_sequences),
        ("--limit-states", args.limit_states),
    ] {
        if v == Some(0) {
            return Err(CliError::Input(format!("{flag} must be positive")));
        }
    }
    if args.limit_sequences.is_some() {
        limits.max_sequences = args.limit_sequences;
    }
    if args.limit_states.is_some() {
        limits.max_states = args.limit_states;
    }
    Ok(limits)
}

fn load_net(path: &Path, err: &mut dyn Write) -> Result<(PetriNet, Marking), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    match netio::parse_net(&text) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                writeln!(err, "{}:{w}", path.display())?;
            }
            Ok((parsed.net, parsed.marking))
        }
        Err(errors) => {
            let mut msg = String::new();
            for e in &errors.0 {
                let _ = writeln!(msg, "{}:{e}", path.display());
            }
            Err(CliError::Input(msg.trim_end().to_owned()))
        }
    }
}

fn config(common: &Common, limits: Limits) -> EnumerationConfig {
    EnumerationConfig::new(common.steps, common.semantics)
        .with_reset_mode(common.reset_mode)
        .with_limits(limits)
}

fn open_out<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(stdout),
    })
}

fn plural(n: impl std::fmt::Display) -> String {
    count(n, "sequence")
}

/// `1 thing`, `2 things`.
fn count(n: impl std::fmt::Display, noun: &str) -> String {
    let n = n.to_string();
    if n == "1" {
        format!("{n} {noun}")
    } else {
        format!("{n} {noun}s")
    }
}

fn simulate(
    a: &SimulateArgs,
    env: Option<&str>,
    stdout: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let (net, m0) = load_net(&a.common.net, err)?;
    let config = config(&a.common, resolve_limits(&a.limits, env)?);
    let mut out = open_out(&a.common.out, stdout)?;
    let format = a.common.format;

    let mut io_error: Option<io::Error> = None;
    let (result, mut out) = if a.dump && format == Format::Json {
        let mut writer = TraceWriter::begin(out, &config)?;
        let r = walk(&net, &m0, &config, |v| {
            match writer.push(&TraceSequence::from_view(&net, v)) {
                Ok(()) => ControlFlow::Continue(()),
                Err(e) => {
                    io_error = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        (r, writer.finish()?)
    } else if a.dump {
        if format == Format::Csv {
            let header: Vec<&str> = net.places().iter().map(|p| p.as_str()).collect();
            writeln!(out, "sequence,step,fires,{}", header.join(","))?;
        }
        let mut index = 0usize;
        let r = walk(&net, &m0, &config, |v| {
            let res = if format == Format::Csv {
                (0..=v.horizon() + 1).try_for_each(|s| {
                    let fires = if s <= v.horizon() {
                        v.firing(s).names(&net).join(" ")
                    } else {
                        String::new()
                    };
                    let counts: Vec<String> =
                        v.marking(s).counts().iter().map(u64::to_string).collect();
                    writeln!(out, "{},{s},{fires},{}", index + 1, counts.join(","))
                })
            } else {
                out.write_all(netio::render_text(&net, index, v).as_bytes())
            };
            index += 1;
            match res {
                Ok(()) => ControlFlow::Continue(()),
                Err(e) => {
                    io_error = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        (r, out)
    } else if config.limits.max_sequences.is_some() {
        // a walk stops at the limit and reports how far it got
        (walk(&net, &m0, &config, |_| ControlFlow::Continue(())), out)
    } else {
        return count_only(&net, &m0, &config, format, out);
    };
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let summary = result?;
    match (a.dump, format) {
        (true, Format::Json | Format::Csv) => {}
        (_, Format::Json) => writeln!(
            out,
            "{}",
            json!({
                "semantics": config.semantics,
                "reset_mode": config.reset_mode,
                "k": config.steps,
                "sequences": summary.sequences,
                "states": summary.states,
            })
        )?,
        _ => writeln!(out, "{}", plural(summary.sequences))?,
    }
    out.flush()?;
    Ok(())
}

/// Counts through the layered graph, so the cost follows the number of
/// distinct markings per step rather than the number of sequences.
fn count_only(
    net: &PetriNet,
    m0: &Marking,
    config: &EnumerationConfig,
    format: Format,
    mut out: Box<dyn Write + '_>,
) -> CliResult {
    let graph = LayeredGraph::build(net, m0, config)?;
    let total = graph.sequence_count();
    match format {
        Format::Json => {
            let sequences = u64::try_from(&total).map_or_else(|_| json!(total.to_string()), |n| json!(n));
            writeln!(
                out,
                "{}",
                json!({
                    "semantics": config.semantics,
                    "reset_mode": config.reset_mode,
                    "k": config.steps,
                    "sequences": sequences,
                    "states": graph.node_count(),
                })
            )?
        }
        _ => writeln!(out, "{}", plural(total))?,
    }
    out.flush()?;
    Ok(())
}

fn emit_asp(a: &EmitArgs, stdout: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (net, m0) = load_net(&a.common.net, err)?;
    let level = match a.level.as_str() {
        "auto" => AspLevel::required_for(&net),
        other => other.parse().map_err(CliError::Input)?,
    };
    let ntok = a.ntok.ok_or_else(|| {
        CliError::Input(format!(
            "--ntok is required; a bound covering every count reachable in {} steps is {}",
            a.common.steps,
            asp::suggest_ntok(&net, &m0, a.common.steps)
        ))
    })?;
    let variant = AspVariant::new(level, a.common.semantics, a.common.steps, ntok)
        .with_reset_mode(a.common.reset_mode)
        .with_dialect(a.dialect);
    let program = asp::emit(&net, &m0, &variant).map_err(|e| CliError::Input(e.to_string()))?;
    let mut out = open_out(&a.common.out, stdout)?;

    if let Some(golden) = &a.expand_shorthand {
        let text = fs::read_to_string(golden)
            .map_err(|e| CliError::Input(format!("{}: {e}", golden.display())))?;
        let expected = asp::fact_set(&text).map_err(|e| CliError::Input(e.to_string()))?;
        let actual = asp::fact_set(&program.text()).map_err(|e| CliError::Input(e.to_string()))?;
        let missing: Vec<&String> = expected.difference(&actual).collect();
        let extra: Vec<&String> = actual.difference(&expected).collect();
        if a.common.format == Format::Json {
            writeln!(
                out,
                "{}",
                json!({"identical": missing.is_empty() && extra.is_empty(), "facts": actual.len(), "missing": missing, "extra": extra})
            )?;
        } else {
            for f in &missing {
                writeln!(out, "- {f}")?;
            }
            for f in &extra {
                writeln!(out, "+ {f}")?;
            }
            if missing.is_empty() && extra.is_empty() {
                writeln!(out, "fact sets identical ({})", count(actual.len(), "fact"))?;
            }
        }
        out.flush()?;
        return if missing.is_empty() && extra.is_empty() {
            Ok(())
        } else {
            Err(CliError::Mismatch)
        };
    }

    let text = if a.annotate {
        program.annotated_text()
    } else {
        program.text()
    };
    if a.common.format == Format::Json {
        writeln!(
            out,
            "{}",
            json!({"level": level, "semantics": a.common.semantics, "reset_mode": a.common.reset_mode,
                   "ntok": ntok, "k": a.common.steps, "atom_schema": program.atom_schema, "lines": program.lines})
        )?;
    } else {
        out.write_all(text.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn parse_target(text: &str) -> Result<BTreeMap<String, u64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (place, n) = p.split_once('=').ok_or_else(|| {
                CliError::Input(format!("target entries look like place=count, got `{p}`"))
            })?;
            let n = n
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad count in `{p}`")))?;
            Ok((place.trim().to_owned(), n))
        })
        .collect()
}

fn parse_waypoints(list: &[String]) -> Result<Vec<Waypoint>, CliError> {
    list.iter()
        .map(|w| {
            w.parse()
                .map_err(|e: AnalysisError| CliError::Input(e.to_string()))
        })
        .collect()
}

fn trace_json(net: &PetriNet, s: &crate::engine::ExecutionSequence) -> Value {
    serde_json::to_value(TraceSequence::from_sequence(net, s)).expect("serializable")
}

fn analyze(
    a: &AnalyzeArgs,
    env: Option<&str>,
    stdout: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let (net, m0) = load_net(&a.common.net, err)?;
    let config = config(&a.common, resolve_limits(&a.limits, env)?);
    let k = config.steps;
    let cap = a.max_witnesses;
    let missing = |flag: &str| CliError::Input(format!("this property needs {flag}"));

    let (name, parameters, result, witnesses, summary): (&str, Value, Value, Vec<Value>, String) =
        match a.property {
            Property::Reachable => {
                let target = parse_target(a.target.as_deref().ok_or_else(|| missing("--target"))?)?;
                let r = analysis::reachable(&net, &m0, &target, &config)?;
                let summary = match r.step {
                    Some(s) => format!("reachable at step {s}"),
                    None => format!("not reachable within {k} steps"),
                };
                let w = r.witness.iter().map(|s| trace_json(&net, s)).collect();
                (
                    "reachable",
                    json!({"target": target}),
                    json!({"reachable": r.reachable(), "step": r.step}),
                    w,
                    summary,
                )
            }
            Property::Bounded => {
                let bound = a.bound.ok_or_else(|| missing("--bound"))?;
                let v = analysis::bounded(&net, &m0, bound, &config)?;
                let summary = if v.is_empty() {
                    format!("{bound}-bounded within {k} steps")
                } else {
                    format!("{} of bound {bound}", count(v.len(), "violation"))
                };
                let w = v
                    .iter()
                    .take(cap)
                    .map(|v| serde_json::to_value(v).expect("serializable"))
                    .collect();
                (
                    "bounded",
                    json!({"bound": bound}),
                    json!({"bounded": v.is_empty(), "violations": v.len()}),
                    w,
                    summary,
                )
            }
            Property::Deadlocks => {
                let d = analysis::deadlocks(&net, &m0, &config)?;
                let summary = if d.is_empty() {
                    format!("no deadlock within {k} steps")
                } else {
                    count(d.len(), "deadlocked step")
                };
                let w = d
                .iter()
                .take(cap)
                .map(|d| json!({"sequence": d.sequence, "step": d.step, "marking": net.marking_to_map(&d.marking)}))
                .collect();
                (
                    "deadlocks",
                    json!({}),
                    json!({"deadlock_free": d.is_empty(), "count": d.len()}),
                    w,
                    summary,
                )
            }
            Property::Liveness => {
                let t = a
                    .transition
                    .as_deref()
                    .ok_or_else(|| missing("--transition"))?;
                let l = analysis::liveness_basic(&net, &m0, t, &config)?;
                let summary = if l.fires {
                    format!("{t} fires within {k} steps once every place has a source")
                } else {
                    format!("{t} does not fire within {k} steps")
                };
                let w = l
                    .witness
                    .iter()
                    .map(|s| trace_json(&l.augmented, s))
                    .collect();
                (
                    "liveness",
                    json!({"transition": t}),
                    json!({"fires": l.fires}),
                    w,
                    summary,
                )
            }
            Property::TInvariants => {
                let inv = analysis::t_invariants(&net, &m0, &config)?;
                let summary = format!(
                    "{} observed within {k} steps",
                    count(inv.len(), "T-invariant")
                );
                let list: Vec<Value> = inv
                    .iter()
                    .map(|i| serde_json::to_value(i).expect("serializable"))
                    .collect();
                (
                    "t-invariants",
                    json!({}),
                    json!({"count": inv.len(), "invariants": list}),
                    Vec::new(),
                    summary,
                )
            }
            Property::PInvariants => {
                let r = analysis::p_invariants(&net, &m0, a.max_subset, &config)?;
                let summary = format!(
                    "{} observed within {k} steps",
                    count(r.sets.len(), "P-invariant")
                );
                (
                    "p-invariants",
                    json!({"max_subset": a.max_subset}),
                    json!({"count": r.sets.len(), "sets": r.sets}),
                    Vec::new(),
                    summary,
                )
            }
            Property::Waypoints => {
                let wps = parse_waypoints(&a.waypoints)?;
                let filter = WaypointFilter::new(&net, &wps, k)?;
                let mut matching = 0u64;
                let mut w = Vec::new();
                walk(&net, &m0, &config, |v| {
                    if filter.accepts(v) {
                        matching += 1;
                        if w.len() < cap {
                            w.push(
                                serde_json::to_value(TraceSequence::from_view(&net, v))
                                    .expect("serializable"),
                            );
                        }
                    }
                    ControlFlow::Continue(())
                })?;
                let summary = format!("{} matching", plural(matching));
                (
                    "waypoints",
                    json!({"waypoints": a.waypoints}),
                    json!({"matching": matching}),
                    w,
                    summary,
                )
            }
        };

    let mut out = open_out(&a.common.out, stdout)?;
    if a.common.format == Format::Json {
        let report = json!({
            "property": name,
            "parameters": parameters,
            "semantics": config.semantics,
            "reset_mode": config.reset_mode,
            "horizon": k,
            "result": result,
            "witnesses": witnesses,
        });
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        )?;
    } else {
        writeln!(out, "{summary}")?;
    }
    out.flush()?;
    Ok(())
}

fn stats(
    a: &StatsArgs,
    env: Option<&str>,
    stdout: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let (net, m0) = load_net(&a.common.net, err)?;
    let config = config(&a.common, resolve_limits(&a.limits, env)?);
    let series = if a.waypoints.is_empty() {
        let graph = LayeredGraph::build(&net, &m0, &config)?;
        a.places
            .iter()
            .map(|p| analysis::place_stats_layered(&net, &graph, p))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let filter = WaypointFilter::new(&net, &parse_waypoints(&a.waypoints)?, config.steps)?;
        let mut accs = a
            .places
            .iter()
            .map(|p| StatsAccumulator::new(&net, p, config.steps))
            .collect::<Result<Vec<_>, _>>()?;
        walk(&net, &m0, &config, |v| {
            if filter.accepts(v) {
                accs.iter_mut().for_each(|acc| acc.push(v));
            }
            ControlFlow::Continue(())
        })?;
        accs.into_iter()
            .map(|a| a.finish())
            .collect::<Result<Vec<_>, _>>()?
    };

    let mut out = open_out(&a.common.out, stdout)?;
    match a.common.format {
        Format::Csv => {
            writeln!(out, "place,step,mean,min,max,distinct_count")?;
            for s in &series {
                for r in s.rows() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.place, r.step, r.mean, r.min, r.max, r.distinct_count
                    )?;
                }
            }
        }
        Format::Json => {
            let places: Vec<Value> = series
                .iter()
                .map(|s| {
                    let rate = s.mean_rate();
                    json!({
                        "place": s.place,
                        "sequences": s.sequences.to_string(),
                        "series": s.rows(),
                        "mean_rate": rate.as_ref().map(analysis::fraction_string),
                        "mean_rate_decimal": rate.as_ref().map(|r| analysis::decimal_string(r, 6)),
                    })
                })
                .collect();
            let doc = json!({
                "semantics": config.semantics,
                "reset_mode": config.reset_mode,
                "k": config.steps,
                "places": places,
            });
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            )?;
        }
        Format::Text => {
            for s in &series {
                writeln!(out, "{} over {}", s.place, plural(s.sequences.clone()))?;
                writeln!(
                    out,
                    "{:>5} {:>12} {:>6} {:>6} {:>9}",
                    "step", "mean", "min", "max", "distinct"
                )?;
                for r in s.rows() {
                    writeln!(
                        out,
                        "{:>5} {:>12} {:>6} {:>6} {:>9}",
                        r.step, r.mean_decimal, r.min, r.max, r.distinct_count
                    )?;
                }
                if let Some(rate) = s.mean_rate() {
                    writeln!(
                        out,
                        "mean rate {} per step",
                        analysis::decimal_string(&rate, 6)
                    )?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn crossval(
    a: &CrossvalArgs,
    env: Option<&str>,
    stdout: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let (net, m0) = load_net(&a.common.net, err)?;
    let config = config(&a.common, resolve_limits(&a.limits, env)?);
    let text = fs::read_to_string(&a.answers)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.answers.display())))?;
    let format = if a.plain {
        AnswerFormat::Plain
    } else {
        AnswerFormat::Blocks
    };
    let external = netio::parse_answer_sets(&text, &net, config.steps, format)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.answers.display())))?;
    let native = crate::engine::enumerate(&net, &m0, &config)?;
    let report = cross_validate(&native, &external);

    let mut out = open_out(&a.common.out, stdout)?;
    if a.common.format == Format::Json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("serializable")
        )?;
    } else {
        writeln!(
            out,
            "native {}, external {}, matched {}, unmatched native {}, unmatched external {}, duplicates {}",
            report.native_count,
            report.external_count,
            report.matched,
            report.unmatched_native.len(),
            report.unmatched_external.len(),
            report.duplicate_external.len()
        )?;
        writeln!(
            out,
            "{}",
            if report.is_match() {
                "match"
            } else {
                "mismatch"
            }
        )?;
    }
    out.flush()?;
    if report.is_match() {
        Ok(())
    } else {
        Err(CliError::Mismatch)
    }
}

/// Runs the CLI with explicit streams and `PNET_LIMITS` value.
pub fn run_with<I, T>(
    args: I,
    limits_env: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a, limits_env, stdout, stderr),
        Command::EmitAsp(a) => emit_asp(a, stdout, stderr),
        Command::Analyze(a) => analyze(a, limits_env, stdout, stderr),
        Command::Stats(a) => stats(a, limits_env, stdout, stderr),
        Command::Crossval(a) => crossval(a, limits_env, stdout, stderr),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Input(m) | CliError::Limit(m) => {
                    let _ = writeln!(stderr, "error: {m}");
                }
                CliError::Mismatch | CliError::BrokenPipe => {}
            }
            e.code()
        }
    }
}

/// Entry point used by the `pnet` binary.
pub fn run() -> i32 {
    let env = std::env::var(LIMITS_ENV).ok();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(
        std::env::args_os(),
        env.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}
