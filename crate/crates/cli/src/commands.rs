use std::fmt::Write as _;
use std::fs;

use serde_json::{json, Value};
use shm_core::nsm::{self, export, HaltingReport, LeafSearch, NodeStatus};
use shm_core::psm::{self, DecideMode, Engine, EstimateReport, Evidence, ProbabilityInterval, Verdict};
use shm_core::testkit::{self, GeneratorParams};
use shm_core::{
    format_program, parse_program, AcceptancePolicy, Mode, ParseError, Rational, Registers, RunResult,
    SourceProgram, Trace,
};

use crate::args::{
    CheckArgs, Command, DecideArgs, DecideModeArg, EngineArg, EstimateArgs, Format, GenArgs, GenMode,
    MachineArgs, ProbArgs, RunArgs, TreeArgs,
};
use crate::report::{self, configuration, fraction, fraction_text, Failure, Report};

type Outcome = Result<Report, Failure>;

pub fn dispatch(command: &Command) -> (Format, Outcome) {
    match command {
        Command::Run(a) => (a.machine.format, run(a)),
        Command::Tree(a) => (a.machine.format, tree(a)),
        Command::Prob(a) => (a.machine.format, prob(a)),
        Command::Estimate(a) => (a.machine.format, estimate(a)),
        Command::Decide(a) => (a.machine.format, decide(a)),
        Command::Gen(a) => (Format::Text, gen(a)),
        Command::Check(a) => (a.format, check(a)),
    }
}

/// Weight-sum errors are reported as weight errors by the commands that
/// need a distribution, and as plain parse errors everywhere else.
fn load(file: &std::path::Path, weights_matter: bool) -> Result<SourceProgram, Failure> {
    let name = file.display().to_string();
    let text =
        fs::read_to_string(file).map_err(|e| Failure::new(report::EXIT_PARSE, format!("{name}: {e}")))?;
    parse_program(&text).map_err(|e| {
        let mut failure = Failure::parse(&name, &e);
        if weights_matter && matches!(e, ParseError::WeightSum { .. }) {
            failure.code = report::EXIT_WEIGHT;
        }
        failure
    })
}

fn base_parameters(m: &MachineArgs) -> serde_json::Map<String, Value> {
    let inputs: serde_json::Map<String, Value> = m
        .inputs()
        .iter()
        .map(|(r, v)| (r.to_string(), json!(v)))
        .collect();
    let mut p = serde_json::Map::new();
    p.insert("file".into(), json!(m.file.display().to_string()));
    p.insert("inputs".into(), Value::Object(inputs));
    p.insert("accept_register".into(), json!(m.accept_reg));
    p
}

fn inputs_text(inputs: &Registers) -> String {
    if inputs.is_empty() {
        return "(none)".into();
    }
    inputs
        .iter()
        .map(|(r, v)| format!("R{r}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn trace_json(trace: &Trace) -> Value {
    serde_json::to_value(trace).expect("trace serializes")
}

fn run(a: &RunArgs) -> Outcome {
    let source = load(&a.machine.file, false)?;
    let inputs = a.machine.inputs();
    let mut chain = Vec::new();
    let result = shm_core::run_deterministic_with(&source.program, &inputs, a.fuel, |c| {
        if a.trace {
            chain.push(c.clone());
        }
    })?;
    let policy = AcceptancePolicy::new(a.machine.accept_reg);
    let last = result.configuration();
    let (status, exit) = match result {
        RunResult::Halted { .. } => ("halted", report::EXIT_OK),
        RunResult::FuelExhausted { .. } => ("fuel-exhausted", report::EXIT_FUEL),
    };
    let acceptance = match policy.evaluate(last, result.is_halted()) {
        shm_core::Acceptance::Accept => "accept",
        shm_core::Acceptance::Reject => "reject",
        shm_core::Acceptance::NotHalted => "not-halted",
    };

    let mut text = String::new();
    let _ = writeln!(text, "status: {status}");
    let _ = writeln!(text, "steps: {}", result.steps());
    let _ = writeln!(text, "counter: {}", last.counter());
    let _ = writeln!(text, "registers: {}", inputs_text(last.registers()));
    let _ = writeln!(text, "acceptance: {acceptance}");
    if a.trace {
        let _ = writeln!(text, "chain:");
        for (i, c) in chain.iter().enumerate() {
            let _ = writeln!(text, "  {i}: {c}");
        }
    }

    let mut parameters = base_parameters(&a.machine);
    parameters.insert("fuel".into(), json!(a.fuel));
    parameters.insert("trace".into(), json!(a.trace));
    let mut result_json = json!({
        "status": status,
        "steps": result.steps(),
        "final": configuration(last),
        "acceptance": acceptance,
    });
    if a.trace {
        result_json["chain"] = Value::Array(chain.iter().map(configuration).collect());
    }
    Ok(Report {
        command: "run",
        parameters: Value::Object(parameters),
        result: result_json,
        text,
        graph: None,
        exit,
    })
}

fn halting_json(report: &HaltingReport) -> Value {
    match report {
        HaltingReport::AllHalted {
            max_depth,
            leaf_count,
        } => json!({
            "all_halted": true,
            "max_depth": max_depth,
            "leaf_count": leaf_count.to_string(),
        }),
        HaltingReport::SomeRunning {
            live_frontier,
            halted_leaves,
        } => json!({
            "all_halted": false,
            "live_frontier": live_frontier.to_string(),
            "halted_leaves": halted_leaves.to_string(),
        }),
    }
}

fn tree(a: &TreeArgs) -> Outcome {
    let source = load(&a.machine.file, false)?;
    let inputs = a.machine.inputs();
    let tree = nsm::build_tree(&source.program, &inputs, a.depth, a.node_budget);
    let policy = AcceptancePolicy::new(a.machine.accept_reg);
    let halting = tree.halting_report();
    let search = nsm::exists_accepting_leaf(&tree, &policy);
    let records = export::records(&tree);

    let mut text = String::new();
    let _ = writeln!(text, "nodes: {}", tree.node_count());
    let _ = writeln!(text, "edges: {}", records.edges.len());
    let _ = writeln!(text, "truncated: {}", tree.truncated());
    for status in [NodeStatus::Expanded, NodeStatus::LeafHalted, NodeStatus::Frontier] {
        let _ = writeln!(text, "{}: {}", status.as_str(), tree.count(status));
    }
    match &halting {
        HaltingReport::AllHalted {
            max_depth,
            leaf_count,
        } => {
            let _ = writeln!(
                text,
                "halting: all paths halt (max depth {max_depth}, {leaf_count} leaves)"
            );
        }
        HaltingReport::SomeRunning {
            live_frontier,
            halted_leaves,
        } => {
            let _ = writeln!(text, "halting: {live_frontier} running, {halted_leaves} halted");
        }
    }
    let search_json = match &search {
        LeafSearch::Found { node, trace } => {
            let _ = writeln!(text, "accepting leaf: n{} after {} steps", node.0, trace.len());
            json!({ "status": "found", "node": node.0, "trace": trace_json(trace) })
        }
        LeafSearch::NotFound => {
            let _ = writeln!(text, "accepting leaf: none");
            json!({ "status": "not-found" })
        }
        LeafSearch::Inconclusive => {
            let _ = writeln!(text, "accepting leaf: none so far (tree truncated)");
            json!({ "status": "inconclusive" })
        }
    };

    let mut parameters = base_parameters(&a.machine);
    parameters.insert("depth".into(), json!(a.depth));
    parameters.insert("node_budget".into(), json!(a.node_budget));
    Ok(Report {
        command: "tree",
        parameters: Value::Object(parameters),
        result: json!({
            "tree": serde_json::to_value(&records).expect("records serialize"),
            "halting": halting_json(&halting),
            "accepting_leaf": search_json,
        }),
        text,
        graph: Some(export::to_dot(&tree)),
        exit: report::EXIT_OK,
    })
}

fn interval_json(i: &ProbabilityInterval<Rational>) -> Value {
    json!({
        "accept": fraction(&i.accept),
        "reject": fraction(&i.reject),
        "unresolved": fraction(&i.unresolved),
    })
}

fn interval_text(out: &mut String, i: &ProbabilityInterval<Rational>) {
    let _ = writeln!(out, "accept: {}", fraction_text(&i.accept));
    let _ = writeln!(out, "reject: {}", fraction_text(&i.reject));
    let _ = writeln!(out, "unresolved: {}", fraction_text(&i.unresolved));
}

fn prob(a: &ProbArgs) -> Outcome {
    let source = load(&a.machine.file, true)?;
    let engine = match a.engine {
        EngineArg::Naive => Engine::Naive,
        EngineArg::Memoized => Engine::Memoized,
    };
    let policy = AcceptancePolicy::new(a.machine.accept_reg);
    let interval = psm::exact_acceptance_with(
        engine,
        &source.program,
        &a.machine.inputs(),
        a.fuel,
        &policy,
        a.node_cap,
    )?;
    let mut text = String::new();
    interval_text(&mut text, &interval);

    let mut parameters = base_parameters(&a.machine);
    parameters.insert("fuel".into(), json!(a.fuel));
    parameters.insert("engine".into(), json!(engine_name(a.engine)));
    parameters.insert("node_cap".into(), json!(a.node_cap));
    Ok(Report {
        command: "prob",
        parameters: Value::Object(parameters),
        result: interval_json(&interval),
        text,
        graph: None,
        exit: report::EXIT_OK,
    })
}

fn engine_name(e: EngineArg) -> &'static str {
    match e {
        EngineArg::Naive => "naive",
        EngineArg::Memoized => "memoized",
    }
}

fn estimate_json(r: &EstimateReport) -> Value {
    json!({
        "estimate": fraction(&r.estimate),
        "sample_count": r.sample_count,
        "accepts": r.accepts,
        "rejects": r.rejects,
        "unresolved": r.unresolved,
        "epsilon": fraction(&r.epsilon),
        "seed": r.seed,
    })
}

fn estimate_text(out: &mut String, r: &EstimateReport) {
    let _ = writeln!(out, "estimate: {}", fraction_text(&r.estimate));
    let _ = writeln!(out, "samples: {}", r.sample_count);
    let _ = writeln!(out, "accepts: {}", r.accepts);
    let _ = writeln!(out, "rejects: {}", r.rejects);
    let _ = writeln!(out, "unresolved: {}", r.unresolved);
    let _ = writeln!(out, "seed: {}", r.seed);
}

fn estimate(a: &EstimateArgs) -> Outcome {
    let source = load(&a.machine.file, true)?;
    let policy = AcceptancePolicy::new(a.machine.accept_reg);
    let r = psm::estimate_acceptance(
        &source.program,
        &a.machine.inputs(),
        &a.epsilon,
        a.fuel,
        a.seed,
        &policy,
    )?;
    let mut text = String::new();
    estimate_text(&mut text, &r);

    let mut parameters = base_parameters(&a.machine);
    parameters.insert("fuel".into(), json!(a.fuel));
    parameters.insert("epsilon".into(), fraction(&a.epsilon));
    parameters.insert("seed".into(), json!(a.seed));
    Ok(Report {
        command: "estimate",
        parameters: Value::Object(parameters),
        result: estimate_json(&r),
        text,
        graph: None,
        exit: report::EXIT_OK,
    })
}

fn decide(a: &DecideArgs) -> Outcome {
    let source = load(&a.machine.file, true)?;
    let policy = AcceptancePolicy::new(a.machine.accept_reg);
    let mode = match a.mode {
        DecideModeArg::Exact => DecideMode::Exact { node_cap: a.node_cap },
        DecideModeArg::Sampled => DecideMode::Sampled { seed: a.seed },
    };
    let decision = psm::decide_bounded_error(
        &source.program,
        &a.machine.inputs(),
        &a.eta,
        a.fuel,
        mode,
        &policy,
    )?;
    let (verdict, reason, exit) = match decision.verdict {
        Verdict::Accept => ("accept", None, report::EXIT_OK),
        Verdict::Reject => ("reject", None, report::EXIT_REJECT),
        Verdict::Undetermined(r) => ("undetermined", Some(r.as_str()), report::EXIT_UNDETERMINED),
    };

    let mut text = String::new();
    match reason {
        Some(r) => {
            let _ = writeln!(text, "verdict: {verdict} ({r})");
        }
        None => {
            let _ = writeln!(text, "verdict: {verdict}");
        }
    }
    let evidence = match &decision.evidence {
        Evidence::Interval(i) => {
            interval_text(&mut text, i);
            json!({ "kind": "interval", "interval": interval_json(i) })
        }
        Evidence::Estimate(r) => {
            estimate_text(&mut text, r);
            json!({ "kind": "estimate", "estimate": estimate_json(r) })
        }
    };

    let mut parameters = base_parameters(&a.machine);
    parameters.insert("fuel".into(), json!(a.fuel));
    parameters.insert("eta".into(), fraction(&a.eta));
    parameters.insert(
        "mode".into(),
        json!(match a.mode {
            DecideModeArg::Exact => "exact",
            DecideModeArg::Sampled => "sampled",
        }),
    );
    parameters.insert("seed".into(), json!(a.seed));
    parameters.insert("node_cap".into(), json!(a.node_cap));
    Ok(Report {
        command: "decide",
        parameters: Value::Object(parameters),
        result: json!({ "verdict": verdict, "reason": reason, "evidence": evidence }),
        text,
        graph: None,
        exit,
    })
}

fn gen(a: &GenArgs) -> Outcome {
    let mode = match a.mode {
        GenMode::Det => Mode::Deterministic,
        GenMode::Nondet => Mode::NonDeterministic,
        GenMode::Prob => Mode::Probabilistic,
    };
    let params = GeneratorParams {
        line_count: a.lines.0..=a.lines.1,
        max_choices_per_line: a.max_choices,
        register_span: a.registers,
        jump_span: a.jump_slack,
        mode,
        weight_denominator_bound: a.denominator_bound,
    };
    let program = testkit::generate_program(&params, a.seed)?;
    let text = format_program(&program);
    Ok(Report {
        command: "gen",
        parameters: json!({
            "mode": mode.as_str(),
            "lines": [a.lines.0, a.lines.1],
            "max_choices": a.max_choices,
            "registers": a.registers,
            "jump_slack": a.jump_slack,
            "denominator_bound": a.denominator_bound,
            "seed": a.seed,
        }),
        result: json!({ "program": text }),
        text,
        graph: None,
        exit: report::EXIT_OK,
    })
}

fn check(a: &CheckArgs) -> Outcome {
    let source = load(&a.file, false)?;
    let program = &source.program;
    let name = a.file.display().to_string();
    let weights_ok = program.ensure_distribution().is_ok();
    let formatted = format_program(program);
    let reparsed =
        parse_program(&formatted).map_err(|e| Failure::parse(&format!("{name} (formatted)"), &e))?;
    let fixpoint = &reparsed.program == program && format_program(&reparsed.program) == formatted;
    if !fixpoint {
        return Err(Failure::new(
            report::EXIT_PARSE,
            format!("{name}: formatted program does not round-trip"),
        ));
    }

    let mut text = String::from("ok\n");
    let _ = writeln!(text, "mode: {}", source.mode.as_str());
    let _ = writeln!(text, "lines: {}", program.len());
    let _ = writeln!(text, "max width: {}", program.max_width());
    let _ = writeln!(text, "weights: {}", if weights_ok { "ok" } else { "invalid" });
    let _ = writeln!(text, "round trip: fixpoint");
    Ok(Report {
        command: "check",
        parameters: json!({ "file": name }),
        result: json!({
            "status": "ok",
            "mode": source.mode.as_str(),
            "lines": program.len(),
            "max_width": program.max_width(),
            "weights_ok": weights_ok,
            "round_trip": "fixpoint",
        }),
        text,
        graph: None,
        exit: report::EXIT_OK,
    })
}
