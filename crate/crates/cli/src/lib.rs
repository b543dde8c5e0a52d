//! Command implementations behind the `bce` binary.

use std::path::{Path, PathBuf};

use bce_core::consistency::recover_belief_system;
use bce_core::extensions::{
    across_problems, product_problem, project_marginal, ring_check, shift_bounds_table, ProblemFamily,
};
use bce_core::geometry::{identified_set, lift, DEFAULT_CAP};
use bce_core::io::{self, canonical_json};
use bce_core::rationalizer::{
    experiment_kernel, implement_tau, menu_choice, menu_measure, tau_from_bce, FlowOutcome, PosteriorDistribution,
};
use bce_core::structure::fit_two_step;
use bce_core::support_tests::{
    bounds_binary_action, canonical_direction, check_aud, check_binary_states, check_small_states, check_two_step,
    testfns_aud, testfns_simplex, testfns_two_step, TestVerdict,
};
use bce_core::{check_bce, classify, extreme_marginal_bounds, DecisionProblem, Distribution, Rational, StructureTag};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub const EXIT_CONSISTENT: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "bce",
    version,
    about = "Exact consistency checks for priors and action marginals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a prior and an action marginal are consistent.
    Check {
        #[command(flatten)]
        io: Inputs,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Facets, affine hull and rays of the identified set of priors.
    Facets {
        #[command(flatten)]
        io: Inputs,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Range of the probability of a set of actions over obedient joints.
    Bounds {
        #[command(flatten)]
        io: Inputs,
        /// Comma-separated action labels; defaults to the last action.
        #[arg(long, value_delimiter = ',')]
        actions: Vec<String>,
    },
    /// Witness joint, beliefs, posteriors, decision rule and kernel.
    Rationalize {
        #[command(flatten)]
        io: Inputs,
    },
    /// Gale flow from a distribution over posteriors to the marginal.
    ImplementTau {
        #[command(flatten)]
        io: Inputs,
    },
    /// Joint marginal over action profiles across problems (`--problem` lists them).
    Across {
        #[command(flatten)]
        io: Inputs,
    },
    /// Ring-network game (`--problem` is the game, `--marginal` the per-player list).
    Ring {
        #[command(flatten)]
        io: Inputs,
    },
    /// Per-parameter bounds or verdicts over a family (`--problem` is the family).
    Sweep {
        #[command(flatten)]
        io: Inputs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Vertex cycles of the optimal-belief sets and the identified set.
    PlotData {
        #[command(flatten)]
        io: Inputs,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Inputs {
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub prior: Option<PathBuf>,
    #[arg(long)]
    pub marginal: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Lp,
    SmallStates,
    Aud,
    TwoStep,
    Binary,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Lp => "lp",
            Method::SmallStates => "small-states",
            Method::Aud => "aud",
            Method::TwoStep => "two-step",
            Method::Binary => "binary",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Result text and exit status of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub body: String,
}

#[derive(Debug)]
pub struct CliError(pub String);

impl From<bce_core::Error> for CliError {
    fn from(e: bce_core::Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Option<PathBuf>, flag: &str) -> CliResult<String> {
    let p = path.as_ref().ok_or_else(|| CliError(format!("missing --{flag}")))?;
    read_path(p)
}

fn read_path(p: &Path) -> CliResult<String> {
    std::fs::read_to_string(p).map_err(|e| CliError(format!("{}: {e}", p.display())))
}

fn problem(io: &Inputs) -> CliResult<DecisionProblem> {
    Ok(io::read_problem(&read(&io.problem, "problem")?)?)
}

fn prior(io: &Inputs, p: &DecisionProblem) -> CliResult<Distribution> {
    Ok(io::read_distribution(p.states(), &read(&io.prior, "prior")?)?)
}

fn marginal(io: &Inputs, p: &DecisionProblem) -> CliResult<Distribution> {
    Ok(io::read_distribution(p.actions(), &read(&io.marginal, "marginal")?)?)
}

fn json_out(code: i32, v: &impl serde::Serialize) -> CliResult<Output> {
    Ok(Output {
        code,
        body: canonical_json(v)? + "\n",
    })
}

fn verdict_code(consistent: bool) -> i32 {
    if consistent {
        EXIT_CONSISTENT
    } else {
        EXIT_INCONSISTENT
    }
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Check { io, method } => cmd_check(io, *method),
        Command::Facets { io, cap } => cmd_facets(io, *cap),
        Command::Bounds { io, actions } => cmd_bounds(io, actions),
        Command::Rationalize { io } => cmd_rationalize(io),
        Command::ImplementTau { io } => cmd_implement_tau(io),
        Command::Across { io } => cmd_across(io),
        Command::Ring { io } => cmd_ring(io),
        Command::Sweep { io, format } => cmd_sweep(io, *format),
        Command::PlotData { io } => cmd_plot_data(io),
    }
}

/// Runs a command and writes its output, returning the exit status.
pub fn execute(cli: &Cli) -> i32 {
    let out_path = match &cli.command {
        Command::Check { io, .. }
        | Command::Facets { io, .. }
        | Command::Bounds { io, .. }
        | Command::Rationalize { io }
        | Command::ImplementTau { io }
        | Command::Across { io }
        | Command::Ring { io }
        | Command::Sweep { io, .. }
        | Command::PlotData { io } => io.out.clone(),
    };
    match run(cli) {
        Ok(out) => {
            let written = match &out_path {
                Some(p) => std::fs::write(p, &out.body).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{}", out.body);
                    Ok(())
                }
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(CliError(e)) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// The characterization `auto` picks for a problem.
pub fn auto_method(problem: &DecisionProblem) -> Method {
    match classify(problem).tag {
        StructureTag::BinaryState => Method::Binary,
        StructureTag::BinaryAction | StructureTag::AffineUtilityDifferences => Method::Aud,
        StructureTag::TwoStep => Method::TwoStep,
        StructureTag::SmallState => Method::SmallStates,
        StructureTag::MonotoneConcave | StructureTag::General => Method::Lp,
    }
}

fn run_family(method: Method, p: &DecisionProblem, mu: &Distribution, nu: &Distribution) -> CliResult<TestVerdict> {
    Ok(match method {
        Method::SmallStates => check_small_states(p, mu, nu)?,
        Method::Aud => check_aud(p, mu, nu)?,
        Method::TwoStep => check_two_step(p, mu, nu)?,
        Method::Binary if p.num_states() == 2 => check_binary_states(p, mu, nu)?,
        Method::Binary if p.num_actions() == 2 => check_aud(p, mu, nu)?,
        Method::Binary => return Err(CliError("binary method needs two states or two actions".into())),
        Method::Auto | Method::Lp => unreachable!("resolved before"),
    })
}

fn cmd_check(io: &Inputs, method: Method) -> CliResult<Output> {
    let p = problem(io)?;
    let mu = prior(io, &p)?;
    let nu = marginal(io, &p)?;
    let resolved = if method == Method::Auto {
        auto_method(&p)
    } else {
        method
    };
    let structure = classify(&p).tag;
    let lp = check_bce(&p, &mu, &nu)?;
    if resolved == Method::Lp {
        let v = json!({ "method": "lp", "structure": structure, "verdict": lp, "consistent": lp.consistent });
        return json_out(verdict_code(lp.consistent), &v);
    }
    let family = run_family(resolved, &p, &mu, &nu)?;
    let v = json!({
        "method": resolved.name(),
        "structure": structure,
        "consistent": family.consistent,
        "exactness": family.exactness,
        "violated": family.violated,
        "dominated": family.dominated,
        "lp": { "consistent": lp.consistent, "agrees": lp.consistent == family.consistent },
    });
    json_out(verdict_code(family.consistent), &v)
}

/// Test-function families applicable to a problem, by canonical direction.
fn known_directions(p: &DecisionProblem, nu: &Distribution) -> Vec<(Vec<Rational>, String)> {
    let mut out = Vec::new();
    let mut add = |fs: Vec<bce_core::support_tests::TestFunction>| {
        for f in fs {
            out.push((canonical_direction(&f.p), f.tag.describe(p)));
        }
    };
    if let Ok(fs) = testfns_simplex(p, nu) {
        add(fs);
    }
    if let Ok(fs) = testfns_aud(p) {
        add(fs);
    }
    if fit_two_step(p).is_some() {
        if let Ok(fs) = testfns_two_step(p) {
            add(fs);
        }
    }
    out
}

fn cmd_facets(io: &Inputs, cap: usize) -> CliResult<Output> {
    let p = problem(io)?;
    let nu = marginal(io, &p)?;
    let (v, h, basis) = identified_set(&p, &nu, cap).map_err(|e| match e {
        bce_core::Error::Cap(m) => CliError(format!("{m}; use `bce check --method lp` instead")),
        e => e.into(),
    })?;
    let known = known_directions(&p, &nu);
    let rays: Vec<Value> = h
        .inequalities
        .iter()
        .map(|f| {
            let full = lift(&f.normal);
            let key = canonical_direction(&full);
            let tags: Vec<&String> = known.iter().filter(|(k, _)| *k == key).map(|(_, t)| t).collect();
            json!({
                "normal": f.normal,
                "height": f.height,
                "full_normal": full,
                "canonical": key,
                "provenance": if tags.is_empty() { vec!["refinement".to_string()] } else { tags.into_iter().cloned().collect() },
            })
        })
        .collect();
    let out = json!({
        "coordinates": p.states()[1..].to_vec(),
        "polytope": {
            "inequalities": h.inequalities,
            "equalities": h.equalities,
            "vertices": v.vertices,
        },
        "affine_hull": basis,
        "facet_count": h.inequalities.len(),
        "rays": rays,
    });
    json_out(EXIT_CONSISTENT, &out)
}

fn cmd_bounds(io: &Inputs, actions: &[String]) -> CliResult<Output> {
    let p = problem(io)?;
    let mu = prior(io, &p)?;
    let set: Vec<usize> = if actions.is_empty() {
        vec![p.num_actions() - 1]
    } else {
        actions.iter().map(|a| p.action_index(a)).collect::<Result<_, _>>()?
    };
    let (lo, hi) = extreme_marginal_bounds(&p, &mu, &set)?;
    let mut out = json!({
        "actions": set.iter().map(|&a| p.actions()[a].clone()).collect::<Vec<_>>(),
        "lower": lo,
        "upper": hi,
        "lower_decimal": io::decimal(&lo),
        "upper_decimal": io::decimal(&hi),
    });
    if p.num_actions() == 2 && set == [1] {
        let (clo, chi) = bounds_binary_action(&p, &mu)?;
        out["closed_form"] = json!({ "lower": clo, "upper": chi, "agrees": clo == lo && chi == hi });
    }
    json_out(EXIT_CONSISTENT, &out)
}

fn cmd_rationalize(io: &Inputs) -> CliResult<Output> {
    let p = problem(io)?;
    let mu = prior(io, &p)?;
    let nu = marginal(io, &p)?;
    let v = check_bce(&p, &mu, &nu)?;
    let Some(joint) = v.joint() else {
        return json_out(
            EXIT_INCONSISTENT,
            &json!({ "consistent": false, "dual": v.dual, "dominated": v.dominated }),
        );
    };
    let beliefs = recover_belief_system(&joint, &nu)?;
    let tau = tau_from_bce(&p, &joint, &nu)?;
    let rule = implement_tau(&p, &tau, &nu)?
        .feasible()
        .ok_or_else(|| CliError("posteriors of a witness failed to implement the marginal".into()))?;
    let kernel = experiment_kernel(&p, &mu, &tau, &rule)?;
    let out = json!({
        "consistent": true,
        "pi": joint.pi,
        "beliefs": beliefs.actions.iter().zip(&beliefs.posteriors)
            .map(|(&a, b)| json!({ "action": p.actions()[a], "posterior": b }))
            .collect::<Vec<_>>(),
        "tau": tau,
        "menu": menu_measure(&p, &tau)?,
        "rule": rule,
        "kernel": kernel,
    });
    json_out(EXIT_CONSISTENT, &out)
}

fn cmd_implement_tau(io: &Inputs) -> CliResult<Output> {
    let p = problem(io)?;
    let nu = marginal(io, &p)?;
    let tau = PosteriorDistribution::from_json(p.states(), &read(&io.tau, "tau")?)?;
    let menu = menu_measure(&p, &tau)?;
    let mut out = json!({ "tau": tau, "menu": menu });
    let code = match implement_tau(&p, &tau, &nu)? {
        FlowOutcome::Feasible(rule) => {
            out["feasible"] = json!(true);
            if let FlowOutcome::Feasible(choice) = menu_choice(&menu, &nu)? {
                out["menu_choice"] = json!(choice);
            }
            if io.prior.is_some() {
                let mu = prior(io, &p)?;
                out["bayes_plausible"] = json!(tau.is_bayes_plausible(&mu));
                if tau.is_bayes_plausible(&mu) {
                    out["kernel"] = json!(experiment_kernel(&p, &mu, &tau, &rule)?);
                }
            }
            out["rule"] = json!(rule);
            EXIT_CONSISTENT
        }
        FlowOutcome::Violated(b) => {
            out["feasible"] = json!(false);
            out["violating"] = json!(b.iter().map(|&a| p.actions()[a].clone()).collect::<Vec<_>>());
            EXIT_INCONSISTENT
        }
    };
    json_out(code, &out)
}

fn cmd_across(io: &Inputs) -> CliResult<Output> {
    let problems = io::read_problems(&read(&io.problem, "problem")?)?;
    let product = product_problem(&problems)?;
    let mu = prior(io, &product)?;
    let nu = marginal(io, &product)?;
    let v = across_problems(&problems, &nu, &mu)?;
    let projections = (0..problems.len())
        .map(|n| {
            let m = project_marginal(&problems, &nu, n)?;
            let single = check_bce(&problems[n], &mu, &m)?;
            Ok(json!({ "marginal": m, "consistent": single.consistent }))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let out = json!({
        "actions": product.actions(),
        "consistent": v.consistent,
        "verdict": v,
        "projections": projections,
    });
    json_out(verdict_code(v.consistent), &out)
}

fn cmd_ring(io: &Inputs) -> CliResult<Output> {
    let game = io::read_ring(&read(&io.problem, "problem")?)?;
    let mu = io::read_distribution(&game.states, &read(&io.prior, "prior")?)?;
    let marginals = io::read_ring_marginals(&game, &read(&io.marginal, "marginal")?)?;
    let v = ring_check(&game, &mu, &marginals)?;
    json_out(verdict_code(v.consistent), &v)
}

fn sweep_verdicts(family: &ProblemFamily, mu: &Distribution, nu_text: &str) -> CliResult<Vec<(Rational, bool)>> {
    let results: Vec<CliResult<bool>> = std::thread::scope(|s| {
        let handles: Vec<_> = family
            .problems
            .iter()
            .map(|p| {
                s.spawn(move || -> CliResult<bool> {
                    let nu = io::read_distribution(p.actions(), nu_text)?;
                    Ok(check_bce(p, mu, &nu)?.consistent)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    family
        .theta
        .iter()
        .cloned()
        .zip(results)
        .map(|(t, r)| r.map(|c| (t, c)))
        .collect()
}

fn cmd_sweep(io: &Inputs, format: Format) -> CliResult<Output> {
    let family = io::read_family(&read(&io.problem, "problem")?)?;
    let base = &family.problems[0];
    let mu = prior(io, base)?;
    if io.marginal.is_some() {
        let text = read(&io.marginal, "marginal")?;
        let rows = sweep_verdicts(&family, &mu, &text)?;
        let body = match format {
            Format::Csv => {
                let mut s = String::from("theta,consistent\n");
                for (t, c) in &rows {
                    s += &format!("{t},{c}\n");
                }
                s
            }
            Format::Json => {
                let v: Vec<Value> = rows
                    .iter()
                    .map(|(t, c)| json!({ "theta": t, "consistent": c }))
                    .collect();
                canonical_json(&json!({ "rows": v }))? + "\n"
            }
        };
        return Ok(Output {
            code: EXIT_CONSISTENT,
            body,
        });
    }
    let table = shift_bounds_table(&family, &mu)?;
    let body = match format {
        Format::Csv => {
            let mut s = String::from("theta,lower,upper\n");
            for r in &table.rows {
                s += &format!("{},{},{}\n", r.theta, r.lower, r.upper);
            }
            s
        }
        Format::Json => canonical_json(&table)? + "\n",
    };
    Ok(Output {
        code: EXIT_CONSISTENT,
        body,
    })
}

fn cmd_plot_data(io: &Inputs) -> CliResult<Output> {
    let p = problem(io)?;
    let nu = marginal(io, &p)?;
    let mu = match io.prior {
        Some(_) => Some(prior(io, &p)?),
        None => None,
    };
    let data = io::plot_data(&p, &nu, mu.as_ref())?;
    json_out(EXIT_CONSISTENT, &data)
}
