//! Command-line front-end: scenario files in, reports / graph dumps / plots /
//! model exports out.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mv_core::navgraph::NavGraph;
use mv_core::partition::{build_all_cells, dump_cells};
use mv_core::plot::render_svg;
use mv_core::rules::{load_rule_templates, PropositionSet, RuleCatalog, RuleSpec};
use mv_core::scenario::Scenario;
use mv_core::smv::export_trace;
use mv_core::verify::{envelope_of, run_pipeline_with_rules, PipelineOptions};

/// Exit code when verification ran but no trace satisfied the rules.
const EXIT_NO_SATISFYING_TRACE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "maneuver-verify",
    about = "Abstract predicted traffic scenes into a navigation graph and verify maneuvers against formalized traffic rules",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (YAML).
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when omitted. File writes are atomic.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the scenario's planning step (seconds).
    #[arg(long)]
    step: Option<f64>,
    /// Override the scenario's congestion flag.
    #[arg(long, value_parser = clap::value_parser!(bool))]
    congested: Option<bool>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Envelope sample spacing Δs in meters.
    #[arg(long, default_value_t = 0.5)]
    ds: f64,
    /// Verify at most this many cost-sorted traces.
    #[arg(long)]
    max_checked: Option<usize>,
    /// Additional rule templates (YAML rules file).
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the per-step cell partition listing.
    Partition {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write the navigation graph in DOT format.
    Graph {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Enumerate all root-to-goal traces with their costs.
    Enumerate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full verification pipeline and write the report.
    Verify {
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Write the maneuver envelopes of one cost-sorted trace.
    Envelope {
        #[command(flatten)]
        verify: VerifyArgs,
        /// Index into the cost-sorted trace list.
        #[arg(long, default_value_t = 0)]
        trace: usize,
    },
    /// Render the per-step partition (and optionally one trace) as SVG.
    Plot {
        #[command(flatten)]
        common: CommonArgs,
        /// Highlight this cost-sorted trace in the rendering.
        #[arg(long)]
        trace: Option<usize>,
    },
    /// Export one verified trace as an SMV model with LTLSPEC rules.
    ExportSmv {
        #[command(flatten)]
        verify: VerifyArgs,
        /// Index into the cost-sorted trace list.
        #[arg(long, default_value_t = 0)]
        trace: usize,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Partition { common } => {
            let scenario = load(&common)?;
            let cells = build_all_cells(&scenario)?;
            emit(&common.output, &to_yaml(&dump_cells(&cells))?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Graph { common } => {
            let scenario = load(&common)?;
            let graph = NavGraph::from_cells(&scenario, build_all_cells(&scenario)?);
            emit(&common.output, &graph.to_dot())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate { common } => {
            let scenario = load(&common)?;
            let report =
                run_pipeline_with_rules(&scenario, &pipeline_options(None, 0.5), &[])?;
            #[derive(Serialize)]
            struct TraceLine {
                signatures: Vec<String>,
                cost: f64,
            }
            #[derive(Serialize)]
            struct Listing {
                total: usize,
                truncated: bool,
                traces: Vec<TraceLine>,
            }
            let listing = Listing {
                total: report.traces.enumerated,
                truncated: report.traces.truncated,
                traces: report
                    .results
                    .iter()
                    .map(|r| TraceLine { signatures: r.signatures.clone(), cost: r.cost })
                    .collect(),
            };
            emit(&common.output, &to_yaml(&listing)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { verify } => {
            let scenario = load(&verify.common)?;
            let rules = rule_set(&scenario, &verify)?;
            let report = run_pipeline_with_rules(
                &scenario,
                &pipeline_options(verify.max_checked, verify.ds),
                &rules,
            )?;
            emit(&verify.common.output, &report.to_yaml())?;
            eprintln!(
                "verified {} of {} traces: {} satisfying",
                report.traces.checked, report.traces.enumerated, report.traces.satisfying
            );
            if report.traces.satisfying == 0 {
                return Ok(ExitCode::from(EXIT_NO_SATISFYING_TRACE));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Envelope { verify, trace } => {
            let scenario = load(&verify.common)?;
            let graph = NavGraph::from_cells(&scenario, build_all_cells(&scenario)?);
            let rules = rule_set(&scenario, &verify)?;
            let report = run_pipeline_with_rules(
                &scenario,
                &pipeline_options(verify.max_checked, verify.ds),
                &rules,
            )?;
            let record = report.results.get(trace).with_context(|| {
                format!("trace index {trace} out of range (checked {})", report.traces.checked)
            })?;
            let envelopes = envelope_of(&graph, &record.path, verify.ds);
            emit(&verify.common.output, &to_yaml(&envelopes)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { common, trace } => {
            let scenario = load(&common)?;
            let cells = build_all_cells(&scenario)?;
            let highlight = match trace {
                Some(index) => {
                    let report =
                        run_pipeline_with_rules(&scenario, &pipeline_options(None, 0.5), &[])?;
                    let record = report
                        .results
                        .get(index)
                        .with_context(|| format!("trace index {index} out of range"))?;
                    Some(record.path.indices.clone())
                }
                None => None,
            };
            let svg = render_svg(&scenario, &cells, highlight.as_deref());
            emit(&common.output, &svg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportSmv { verify, trace } => {
            let scenario = load(&verify.common)?;
            let graph = NavGraph::from_cells(&scenario, build_all_cells(&scenario)?);
            let rules = rule_set(&scenario, &verify)?;
            let report = run_pipeline_with_rules(
                &scenario,
                &pipeline_options(verify.max_checked, verify.ds),
                &rules,
            )?;
            let record = report.results.get(trace).with_context(|| {
                format!("trace index {trace} out of range (checked {})", report.traces.checked)
            })?;
            let props = PropositionSet::for_scenario(&scenario);
            let semantic = props.trace_of(&graph.path_cells(&record.path), scenario.congested)?;
            emit(&verify.common.output, &export_trace(&semantic, &rules))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(common: &CommonArgs) -> Result<Scenario> {
    let text = std::fs::read_to_string(&common.input)
        .with_context(|| format!("reading {}", common.input.display()))?;
    let mut scenario = Scenario::from_yaml(&text)
        .with_context(|| format!("loading {}", common.input.display()))?;
    if let Some(step) = common.step {
        scenario = scenario.with_step(step).context("applying --step override")?;
    }
    if let Some(congested) = common.congested {
        scenario = scenario.with_congested(congested);
    }
    Ok(scenario)
}

fn rule_set(scenario: &Scenario, verify: &VerifyArgs) -> Result<Vec<RuleSpec>> {
    let mut catalog = RuleCatalog::builtin();
    if let Some(path) = &verify.rules {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        for template in load_rule_templates(&text)? {
            catalog.register(template);
        }
    }
    Ok(catalog.rules_for(scenario))
}

fn pipeline_options(max_checked: Option<usize>, ds: f64) -> PipelineOptions {
    PipelineOptions { max_checked, ds, threads: verification_threads(), ..Default::default() }
}

/// Verification worker threads from `MV_THREADS` (0 or unset = automatic).
fn verification_threads() -> usize {
    std::env::var("MV_THREADS").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
}

fn to_yaml<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_yaml::to_string(value)?)
}

/// Writes to stdout, or atomically (write-temp-then-rename) to a file.
fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => write_atomic(path, text),
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
