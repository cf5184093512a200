use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gtscegar::abstraction::{self, Predicate, PredicateSet, PredicateSource};
use gtscegar::cegar::{self, Outcome, RunConfig, SpuriousMode};
use gtscegar::condition::{negate, Condition};
use gtscegar::entailment::{Engine, Verdict};
use gtscegar::rules::{self, ReactiveSystem};
use gtscegar::specio::{self, SystemSpec};

#[derive(Parser)]
#[command(name = "gtscegar", about = "Reachability verification for graph transformation systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct BudgetArgs {
    /// wall-clock budget per entailment query, in milliseconds
    #[arg(long)]
    budget_ms: Option<u64>,
    /// proof search depth
    #[arg(long)]
    unfold_depth: Option<u32>,
    /// counter-model search bound: nodes
    #[arg(long)]
    model_nodes: Option<usize>,
    /// counter-model search bound: edges
    #[arg(long)]
    model_edges: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct VerifyArgs {
    /// spec file
    input: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    max_refinements: Option<usize>,
    /// counterexample analysis direction: wp or sp
    #[arg(long)]
    spurious_mode: Option<String>,
    /// refine with one predicate per top-level conjunct
    #[arg(long)]
    split_conjuncts: bool,
    #[arg(long)]
    witness_nodes: Option<usize>,
    #[arg(long)]
    witness_edges: Option<usize>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    skip_undetermined: bool,
    /// write the verdict report as JSON to this path
    #[arg(long)]
    json: Option<PathBuf>,
    /// write the abstract transition system as DOT to this path
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// run the full verification loop on a spec file
    Verify(VerifyArgs),
    /// build the abstract transition system for the given predicates
    Explore {
        input: PathBuf,
        /// condition names to use as predicates (init and the bad-state
        /// negation are always included)
        #[arg(long, value_delimiter = ',')]
        predicates: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        max_states: Option<usize>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// print the strongest postcondition of a named condition under a rule
    Sp {
        input: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        cond: String,
    },
    /// print the weakest precondition of a named condition under a rule
    Wp {
        input: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        cond: String,
    },
    /// shift a named condition along a cospan literal
    Shift {
        input: PathBuf,
        #[arg(long)]
        cond: String,
        /// cospan literal, e.g. "empty -> G <- I [right: a -> x]"
        #[arg(long)]
        arrow: String,
    },
    /// decide entailment between two named conditions
    Entail {
        input: PathBuf,
        left: String,
        right: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// apply a rule to a named graph and print the results
    Step {
        input: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        graph: String,
    },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(3)
}

fn load_spec(path: &PathBuf) -> Result<SystemSpec, ExitCode> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Err(fail(format!("{}: {}", path.display(), e))),
    };
    match specio::parse_spec(&text) {
        Ok(spec) => Ok(spec),
        Err(errors) => {
            for e in &errors {
                eprintln!("{}: {}", path.display(), e);
            }
            Err(ExitCode::from(3))
        }
    }
}

fn budget_with(base: gtscegar::entailment::Budget, args: &BudgetArgs) -> gtscegar::entailment::Budget {
    let mut b = base;
    if let Ok(ms) = std::env::var("GTSCEGAR_BUDGET_MS") {
        if let Ok(ms) = ms.parse() {
            b.wall_ms = ms;
        }
    }
    if let Some(v) = args.budget_ms {
        b.wall_ms = v;
    }
    if let Some(v) = args.unfold_depth {
        b.unfold_depth = v;
    }
    if let Some(v) = args.model_nodes {
        b.model_nodes = v;
    }
    if let Some(v) = args.model_edges {
        b.model_edges = v;
    }
    b
}

/// resolve the system block into the pieces the verification loop needs
fn resolve_system(
    spec: &SystemSpec,
) -> Result<(ReactiveSystem, Condition, Condition, Vec<Predicate>, RunConfig), String> {
    let block = spec.system.as_ref().ok_or("spec has no system block")?;
    let init = spec.cond(&block.init).ok_or("unresolved init condition")?.clone();
    let bad = spec.cond(&block.bad).ok_or("unresolved bad condition")?.clone();
    let mut rules = Vec::new();
    for name in &block.rules {
        rules.push(
            spec.rules
                .iter()
                .find(|r| r.name == *name)
                .ok_or_else(|| format!("unresolved rule '{}'", name))?
                .clone(),
        );
    }
    let preds = block
        .predicates
        .iter()
        .map(|name| {
            spec.cond(name)
                .map(|c| Predicate {
                    name: name.clone(),
                    source: PredicateSource::User,
                    cond: c.clone(),
                })
                .ok_or_else(|| format!("unresolved predicate '{}'", name))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let config = block.config.apply(RunConfig::default());
    Ok((ReactiveSystem { rules }, init, bad, preds, config))
}

fn write_output(path: &PathBuf, contents: &str) -> Result<(), ExitCode> {
    std::fs::write(path, contents).map_err(|e| fail(format!("{}: {}", path.display(), e)))
}

fn verify(args: &VerifyArgs) -> ExitCode {
    let spec = match load_spec(&args.input) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let (system, init, bad, preds, mut config) = match resolve_system(&spec) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    config.budget = budget_with(config.budget, &args.budget);
    if let Some(v) = args.max_refinements {
        config.max_refinements = v;
    }
    match args.spurious_mode.as_deref() {
        None => {}
        Some("wp") => config.spurious_mode = SpuriousMode::Wp,
        Some("sp") => config.spurious_mode = SpuriousMode::Sp,
        Some(other) => return fail(format!("unknown spurious mode '{}'", other)),
    }
    if args.split_conjuncts {
        config.split_conjuncts = true;
    }
    if let Some(v) = args.witness_nodes {
        config.witness_nodes = v;
    }
    if let Some(v) = args.witness_edges {
        config.witness_edges = v;
    }
    if let Some(v) = args.max_states {
        config.explore_max_states = v;
    }
    if args.skip_undetermined {
        config.skip_undetermined = true;
    }
    let report = match cegar::run(&system, &init, &bad, preds, &config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match &report.outcome {
        Outcome::Safe => println!("safe"),
        Outcome::Unsafe { trace, witness } => {
            println!("unsafe");
            println!("trace: {}", if trace.is_empty() { "(initial)".into() } else { trace.join(" ; ") });
            println!(
                "witness: {} nodes, {} edges",
                witness.node_count(),
                witness.edge_count()
            );
            print!("{}", specio::write_dot_graph(witness));
        }
        Outcome::Inconclusive { reason } => {
            println!("inconclusive");
            println!("reason: {}", reason);
        }
    }
    println!(
        "iterations: {}; predicates: {}; entailment calls: {} ({} unknown); wall: {} ms",
        report.iterations,
        report.predicates.preds.len(),
        report.stats.entailment_calls,
        report.stats.unknown_results,
        report.wall_millis
    );
    if let Some(path) = &args.json {
        if let Err(code) = write_output(path, &specio::report_json(&report)) {
            return code;
        }
    }
    if let (Some(path), Some(ts)) = (&args.dot, &report.ts) {
        if let Err(code) = write_output(path, &specio::write_dot_ats(ts, &report.predicates)) {
            return code;
        }
    }
    match report.outcome {
        Outcome::Safe => ExitCode::from(0),
        Outcome::Unsafe { .. } => ExitCode::from(1),
        Outcome::Inconclusive { .. } => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Verify(args) => verify(args),
        Command::Explore { input, predicates, budget, max_states, dot } => {
            let spec = match load_spec(input) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let (system, init, bad, mut preds, config) = match resolve_system(&spec) {
                Ok(x) => x,
                Err(e) => return fail(e),
            };
            for name in predicates {
                let Some(c) = spec.cond(name) else {
                    return fail(format!("unknown condition '{}'", name));
                };
                preds.push(Predicate {
                    name: name.clone(),
                    source: PredicateSource::User,
                    cond: c.clone(),
                });
            }
            preds.insert(0, Predicate {
                name: "safe".into(),
                source: PredicateSource::User,
                cond: negate(&bad),
            });
            preds.insert(0, Predicate {
                name: "init".into(),
                source: PredicateSource::User,
                cond: init.clone(),
            });
            let pset = PredicateSet::new(preds);
            let mut engine = Engine::new(budget_with(config.budget, budget));
            let limits = abstraction::ExploreLimits {
                max_states: max_states.unwrap_or(config.explore_max_states),
            };
            let (ts, ces) =
                match abstraction::explore(&system, &init, &bad, &pset, &mut engine, limits, false) {
                    Ok(x) => x,
                    Err(e) => return fail(e),
                };
            println!("states: {}; transitions: {}", ts.states.len(), ts.transitions.len());
            for ce in &ces {
                println!(
                    "unproven state via: {}",
                    if ce.trace.is_empty() { "(initial)".into() } else { ce.trace.join(" ; ") }
                );
            }
            if let Some(path) = dot {
                if let Err(code) = write_output(path, &specio::write_dot_ats(&ts, &pset)) {
                    return code;
                }
            } else {
                print!("{}", specio::write_dot_ats(&ts, &pset));
            }
            ExitCode::from(0)
        }
        Command::Sp { input, rule, cond } | Command::Wp { input, rule, cond } => {
            let forward = matches!(cli.command, Command::Sp { .. });
            let spec = match load_spec(input) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let Some(c) = spec.cond(cond) else {
                return fail(format!("unknown condition '{}'", cond));
            };
            let Some(r) = spec.rules.iter().find(|r| r.name == *rule) else {
                return fail(format!("unknown rule '{}'", rule));
            };
            let out = if forward { rules::sp(c, r) } else { rules::wp(r, c) };
            match out {
                Ok(out) => {
                    print!("{}", specio::write_condition("result", &out));
                    ExitCode::from(0)
                }
                Err(e) => fail(e),
            }
        }
        Command::Shift { input, cond, arrow } => {
            let spec = match load_spec(input) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let Some(c) = spec.cond(cond) else {
                return fail(format!("unknown condition '{}'", cond));
            };
            let arrow = match specio::parse_cospan(&spec, arrow) {
                Ok(a) => a,
                Err(errors) => {
                    for e in &errors {
                        eprintln!("--arrow: {}", e);
                    }
                    return ExitCode::from(3);
                }
            };
            if arrow.domain() != c.root() {
                return fail("the cospan domain must match the condition root");
            }
            match gtscegar::condition::shift(c, &arrow) {
                Ok(out) => {
                    print!("{}", specio::write_condition("result", &out));
                    ExitCode::from(0)
                }
                Err(e) => fail(e),
            }
        }
        Command::Entail { input, left, right, budget } => {
            let spec = match load_spec(input) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let (Some(a), Some(b)) = (spec.cond(left), spec.cond(right)) else {
                return fail("both condition names must be defined");
            };
            let mut engine = Engine::new(budget_with(Default::default(), budget));
            match engine.entails(a, b) {
                Ok(Verdict::Proved) => {
                    println!("proved");
                    ExitCode::from(0)
                }
                Ok(Verdict::Refuted(g)) => {
                    println!("refuted");
                    print!("{}", specio::write_dot_graph(&g));
                    ExitCode::from(1)
                }
                Ok(Verdict::Unknown(why)) => {
                    println!("unknown: {}", why);
                    ExitCode::from(2)
                }
                Err(e) => fail(e),
            }
        }
        Command::Step { input, rule, graph } => {
            let spec = match load_spec(input) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let Some(def) = spec.graph(graph) else {
                return fail(format!("unknown graph '{}'", graph));
            };
            let Some(r) = spec.rules.iter().find(|r| r.name == *rule) else {
                return fail(format!("unknown rule '{}'", rule));
            };
            let results = rules::step(&def.graph, r);
            println!("{} result(s)", results.len());
            for res in &results {
                print!("{}", specio::write_dot_graph(&res.result));
            }
            ExitCode::from(0)
        }
    }
}
