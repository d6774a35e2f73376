//! Command-line front end: list matchings, check independence and
//! deletion properties, apply parallel steps, iterate full parallel
//! rewriting, and run the cellular-automaton demo.
//!
//! Exit codes: 0 on success, 1 when a requested property fails or a step
//! is refused, 2 on parse or validation errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pargraph::eca::{eca_build, eca_oracle, read_row, render_row, single_one};
use pargraph::format::{parse_document, serialize_document, serialize_graph, Document};
use pargraph::graph::AttributedGraph;
use pargraph::independence::{property_report, DEFAULT_SEQUENTIAL_BOUND};
use pargraph::rewrite::{
    deletion_spec, edp_witness, parallel_apply, recovered_attribution, MatchSet, StepError,
};
use pargraph::rules::{find_matchings_all, Matching, Rule};
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "pargraph",
    about = "Parallel rewriting of attributed graphs with set-valued attributes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List all matchings of the selected rules in a graph, with their
    /// ordinals and canonical ids.
    Match {
        /// Document file.
        file: PathBuf,
        /// Graph name within the document.
        #[arg(short = 'g')]
        graph: String,
        /// Rule selection: `all` or comma-separated rule names.
        #[arg(short = 'r', default_value = "all")]
        rules: String,
    },
    /// Report the independence and deletion properties of a match set.
    Check {
        file: PathBuf,
        #[arg(short = 'g')]
        graph: String,
        #[arg(short = 'r', default_value = "all")]
        rules: String,
        /// Matching ordinals (from `match`), comma-separated; all when
        /// omitted.
        #[arg(short = 'm')]
        matchings: Option<String>,
        /// Properties to check: `all` or a comma-separated subset of
        /// parindep, seqindep, regular, coherent, edp.
        #[arg(long, default_value = "all")]
        props: String,
    },
    /// Apply the selected matchings simultaneously and write the result.
    Apply {
        file: PathBuf,
        #[arg(short = 'g')]
        graph: String,
        #[arg(short = 'r', default_value = "all")]
        rules: String,
        #[arg(short = 'm')]
        matchings: Option<String>,
        /// Apply even when the effective deletion property fails.
        #[arg(long)]
        force: bool,
        /// Output document file.
        #[arg(short = 'o')]
        output: PathBuf,
    },
    /// Iterate full parallel steps (all matchings each time).
    Run {
        file: PathBuf,
        #[arg(short = 'g')]
        graph: String,
        #[arg(short = 'r', default_value = "all")]
        rules: String,
        #[arg(long)]
        steps: usize,
        #[arg(short = 'o')]
        output: PathBuf,
    },
    /// Run an elementary cellular automaton as a rewriting system.
    Eca {
        /// Wolfram rule number.
        #[arg(long)]
        rule: u8,
        /// Number of cells in the cycle (at least 3).
        #[arg(long)]
        width: usize,
        /// Number of synchronous generations.
        #[arg(long)]
        steps: usize,
        /// Compare every generation against the direct array simulation.
        #[arg(long)]
        check_oracle: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("{message}");
            code
        }
    }
}

struct Failure {
    code: ExitCode,
    message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: ExitCode::from(2),
        message: format!("error: {}", message.into()),
    }
}

fn refused(message: impl Into<String>) -> Failure {
    Failure {
        code: ExitCode::from(1),
        message: format!("error: {}", message.into()),
    }
}

fn dispatch(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Match { file, graph, rules } => {
            let (_, _, matchings) = load_matchings(&file, &graph, &rules)?;
            for (k, m) in matchings.iter().enumerate() {
                println!("{k}\t{}", m.id());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            file,
            graph,
            rules,
            matchings,
            props,
        } => check(&file, &graph, &rules, matchings.as_deref(), &props),
        Command::Apply {
            file,
            graph,
            rules,
            matchings,
            force,
            output,
        } => apply(&file, &graph, &rules, matchings.as_deref(), force, &output),
        Command::Run {
            file,
            graph,
            rules,
            steps,
            output,
        } => run(&file, &graph, &rules, steps, &output),
        Command::Eca {
            rule,
            width,
            steps,
            check_oracle,
        } => eca(rule, width, steps, check_oracle),
    }
}

fn load_document(file: &PathBuf) -> Result<Document, Failure> {
    let text = fs::read_to_string(file)
        .map_err(|e| invalid(format!("cannot read {}: {e}", file.display())))?;
    parse_document(&text).map_err(|diags| {
        let rendered: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        Failure {
            code: ExitCode::from(2),
            message: rendered.join("\n"),
        }
    })
}

fn load_matchings(
    file: &PathBuf,
    graph: &str,
    rules: &str,
) -> Result<(AttributedGraph, Vec<Arc<Rule>>, Vec<Matching>), Failure> {
    let doc = load_document(file)?;
    let host = doc
        .graph(graph)
        .ok_or_else(|| invalid(format!("no graph named `{graph}` in the document")))?
        .clone();
    let rules = doc.select_rules(rules).map_err(invalid)?;
    let matchings = find_matchings_all(&rules, &host)
        .map_err(|e| invalid(format!("matching failed: {e}")))?;
    Ok((host, rules, matchings))
}

fn select(
    matchings: Vec<Matching>,
    selection: Option<&str>,
) -> Result<Vec<Matching>, Failure> {
    let Some(selection) = selection else {
        return Ok(matchings);
    };
    let mut picked = Vec::new();
    for token in selection.split(',') {
        let token = token.trim();
        let k: usize = token
            .parse()
            .map_err(|_| invalid(format!("`{token}` is not a matching ordinal")))?;
        let m = matchings.get(k).ok_or_else(|| {
            invalid(format!(
                "matching ordinal {k} is out of range (0..{})",
                matchings.len()
            ))
        })?;
        picked.push(m.clone());
    }
    Ok(picked)
}

fn match_set(host: AttributedGraph, matchings: Vec<Matching>) -> Result<MatchSet, Failure> {
    MatchSet::new(host, matchings).map_err(|e| invalid(format!("invalid match set: {e}")))
}

fn check(
    file: &PathBuf,
    graph: &str,
    rules: &str,
    selection: Option<&str>,
    props: &str,
) -> Result<ExitCode, Failure> {
    let requested: Vec<&str> = if props == "all" {
        vec!["parindep", "seqindep", "regular", "coherent", "edp"]
    } else {
        props.split(',').map(str::trim).collect()
    };
    for p in &requested {
        if !matches!(
            *p,
            "parindep" | "seqindep" | "regular" | "coherent" | "edp"
        ) {
            return Err(invalid(format!("unknown property `{p}`")));
        }
    }

    let (host, _, all) = load_matchings(file, graph, rules)?;
    let selected = select(all, selection)?;
    let ms = match_set(host, selected)?;
    let report = property_report(&ms, DEFAULT_SEQUENTIAL_BOUND)
        .map_err(|e| invalid(format!("property check failed: {e}")))?;

    println!("matchings = {}", ms.len());
    let mut failed = false;
    let mut line = |key: &str, verdict: &dyn Fn() -> (bool, Option<String>)| {
        let (holds, witness) = verdict();
        println!("{key} = {holds}");
        if let Some(w) = witness {
            println!("{key}.witness = {w}");
        }
        if requested.contains(&key) && !holds {
            failed = true;
        }
    };
    line("parindep", &|| {
        (
            report.parallel_independent.holds(),
            report.parallel_independent.witness().map(|w| w.to_string()),
        )
    });
    match &report.sequential_independent {
        Some(v) => line("seqindep", &|| {
            (v.holds(), v.witness().map(|w| w.to_string()))
        }),
        None => println!("seqindep = skipped (bound exceeded)"),
    }
    line("regular", &|| {
        (
            report.regular.holds(),
            report.regular.witness().map(|w| w.to_string()),
        )
    });
    line("coherent", &|| {
        (
            report.parallel_coherent.holds(),
            report.parallel_coherent.witness().map(|w| w.to_string()),
        )
    });
    line("edp", &|| {
        (
            report.effective_deletion.holds(),
            report.effective_deletion.witness().map(|w| w.to_string()),
        )
    });

    let spec = deletion_spec(&ms).map_err(|e| invalid(e.to_string()))?;
    print!("{spec}");
    let recovered = recovered_attribution(&ms).map_err(|e| invalid(e.to_string()))?;
    for (item, terms) in recovered.llift.iter() {
        let values: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
        println!("llift({item}) = {{{}}}", values.join(", "));
    }

    if failed {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn write_result(
    file: &PathBuf,
    graph_name: &str,
    result: AttributedGraph,
    output: &PathBuf,
) -> Result<(), Failure> {
    let mut doc = load_document(file)?;
    doc.graphs.insert(graph_name.to_string(), result);
    fs::write(output, serialize_document(&doc))
        .map_err(|e| invalid(format!("cannot write {}: {e}", output.display())))
}

fn apply(
    file: &PathBuf,
    graph: &str,
    rules: &str,
    selection: Option<&str>,
    force: bool,
    output: &PathBuf,
) -> Result<ExitCode, Failure> {
    let (host, _, all) = load_matchings(file, graph, rules)?;
    let selected = select(all, selection)?;
    let ms = match_set(host, selected)?;
    if !force {
        if let Some(violation) = edp_witness(&ms).map_err(|e| invalid(e.to_string()))? {
            return Err(refused(format!(
                "refusing to apply ({violation}); use --force to apply anyway"
            )));
        }
    }
    let result = parallel_apply(&ms).map_err(|e| invalid(e.to_string()))?;
    print!("{}", serialize_graph(&result));
    write_result(file, graph, result, output)?;
    Ok(ExitCode::SUCCESS)
}

fn run(
    file: &PathBuf,
    graph: &str,
    rules: &str,
    steps: usize,
    output: &PathBuf,
) -> Result<ExitCode, Failure> {
    let doc = load_document(file)?;
    let mut host = doc
        .graph(graph)
        .ok_or_else(|| invalid(format!("no graph named `{graph}` in the document")))?
        .clone();
    let rules = doc.select_rules(rules).map_err(invalid)?;
    for step in 0..steps {
        let matchings = find_matchings_all(&rules, &host)
            .map_err(|e| invalid(format!("matching failed: {e}")))?;
        if matchings.is_empty() {
            println!("step {step}: no matchings, stopping");
            break;
        }
        println!("step {step}: matchings = {}", matchings.len());
        match pargraph::rewrite::full_parallel_step(&host, &rules) {
            Ok(next) => host = next,
            Err(StepError::Refused(violation)) => {
                write_result(file, graph, host, output)?;
                return Err(refused(format!("step {step} refused: {violation}")));
            }
            Err(e) => return Err(invalid(e.to_string())),
        }
    }
    print!("{}", serialize_graph(&host));
    write_result(file, graph, host, output)?;
    Ok(ExitCode::SUCCESS)
}

fn eca(rule: u8, width: usize, steps: usize, check_oracle: bool) -> Result<ExitCode, Failure> {
    let initial = single_one(width);
    let mut system = eca_build(rule, &initial).map_err(|e| invalid(e.to_string()))?;
    let expected = eca_oracle(rule, &initial, steps);
    let mut rows = vec![initial];
    println!("{}", render_row(&rows[0]));
    for _ in 0..steps {
        let next = pargraph::rewrite::full_parallel_step(&system.host, &system.rules)
            .map_err(|e| refused(format!("parallel step refused: {e}")))?;
        let row = read_row(&next, width).map_err(|e| invalid(e.to_string()))?;
        println!("{}", render_row(&row));
        rows.push(row);
        system.host = next;
    }
    if check_oracle {
        if rows == expected {
            println!("oracle check: ok");
        } else {
            return Err(refused("oracle check failed: generations diverge"));
        }
    }
    Ok(ExitCode::SUCCESS)
}
