//! JSON documents: input files, canonical output and plot data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::{FamilyMode, PrivateGame, ProblemFamily, RingGame};
use crate::geometry::{polygon_cycle, to_full, vertices, weighted_minkowski, VPolytope};
use crate::model::{DecisionProblem, Distribution};
use crate::rational::Rational;
use crate::rationalizer::PosteriorDistribution;

/// Significant digits of the approximate `decimal` fields.
pub const DECIMAL_DIGITS: usize = 12;

/// Pretty JSON with sorted object keys.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn decimal(x: &Rational) -> String {
    x.to_decimal(DECIMAL_DIGITS)
}

/// Exact coordinates with an approximate decimal rendering alongside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    pub exact: Vec<Rational>,
    pub decimal: Vec<String>,
}

impl Point {
    pub fn new(exact: Vec<Rational>) -> Self {
        let decimal = exact.iter().map(decimal).collect();
        Point { exact, decimal }
    }
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_problem(text: &str) -> Result<DecisionProblem> {
    DecisionProblem::from_json(text)
}

pub fn read_distribution(domain: &[String], text: &str) -> Result<Distribution> {
    Distribution::from_json(domain, text)
}

pub fn read_tau(states: &[String], text: &str) -> Result<PosteriorDistribution> {
    PosteriorDistribution::from_json(states, text)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemsDoc {
    Wrapped { problems: Vec<DecisionProblem> },
    Bare(Vec<DecisionProblem>),
}

/// `{"problems":[...]}` or a bare list of problems.
pub fn read_problems(text: &str) -> Result<Vec<DecisionProblem>> {
    let problems = match parse::<ProblemsDoc>(text)? {
        ProblemsDoc::Wrapped { problems } | ProblemsDoc::Bare(problems) => problems,
    };
    if problems.is_empty() {
        return Err(Error::Precondition("no decision problems".into()));
    }
    Ok(problems)
}

pub fn read_private_game(text: &str) -> Result<PrivateGame> {
    PrivateGame::new(read_problems(text)?)
}

#[derive(Deserialize)]
struct FamilyDoc {
    problem: DecisionProblem,
    theta: Vec<Rational>,
    mode: FamilyMode,
    #[serde(default)]
    shift: Option<Vec<Rational>>,
    #[serde(default)]
    utilities: Option<Vec<Vec<Vec<Rational>>>>,
}

/// `{"problem":{...}, "theta":[...], "mode":"shift|ratio|table", "shift":[...]}`
/// with `"utilities"` (one table per θ) instead of `"shift"` for the table modes.
pub fn read_family(text: &str) -> Result<ProblemFamily> {
    let doc: FamilyDoc = parse(text)?;
    match doc.mode {
        FamilyMode::Shift => {
            let shift = doc
                .shift
                .ok_or_else(|| Error::Parse("shift family needs a \"shift\" vector".into()))?;
            ProblemFamily::shift(&doc.problem, doc.theta, &shift)
        }
        mode => {
            let tables = doc
                .utilities
                .ok_or_else(|| Error::Parse("table family needs \"utilities\"".into()))?;
            ProblemFamily::tables(&doc.problem, mode, doc.theta, tables)
        }
    }
}

#[derive(Deserialize)]
struct RingDoc {
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    first: Vec<Vec<Rational>>,
    #[serde(default)]
    links: Vec<Vec<Vec<Rational>>>,
}

/// `{"states":[...], "actions":[[...],...], "first":[[v₁(a₁,ω)]], "links":[[[v_n(a_{n−1},a_n)]]]}`.
pub fn read_ring(text: &str) -> Result<RingGame> {
    let doc: RingDoc = parse(text)?;
    RingGame::new(doc.states, doc.actions, doc.first, doc.links)
}

/// A list of per-player marginals, each a label map.
pub fn read_ring_marginals(game: &RingGame, text: &str) -> Result<Vec<Distribution>> {
    let maps: Vec<std::collections::BTreeMap<String, Rational>> = parse(text)?;
    if maps.len() != game.num_players() {
        return Err(Error::Dimension(format!(
            "{} marginals for {} players",
            maps.len(),
            game.num_players()
        )));
    }
    maps.iter()
        .zip(&game.actions)
        .map(|(m, a)| Distribution::from_map(a, m))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Region {
    pub label: String,
    pub cycle: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlotData {
    /// Plotted belief coordinates, by state label.
    pub coordinates: Vec<String>,
    /// One region per action with a nonempty optimal set.
    pub actions: Vec<Region>,
    pub identified: Region,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<Point>,
}

/// Projects to `(μ(ω₁), μ(ω₂))` for three states and to `μ(ω₂)` for two.
fn project(problem: &DecisionProblem, v: &VPolytope) -> Vec<Vec<Rational>> {
    let pts: Vec<Vec<Rational>> = v.vertices.iter().map(|x| to_full(x)).collect();
    match problem.num_states() {
        3 => polygon_cycle(&pts.iter().map(|b| b[..2].to_vec()).collect::<Vec<_>>()),
        _ => {
            let mut line: Vec<Vec<Rational>> = pts.iter().map(|b| vec![b[1].clone()]).collect();
            line.sort();
            line.dedup();
            match (line.first(), line.last()) {
                (Some(lo), Some(hi)) if lo != hi => vec![lo.clone(), hi.clone()],
                _ => line,
            }
        }
    }
}

/// Vertex cycles of every `Δ*(a)` and of `M(u,ν₀)`.
pub fn plot_data(problem: &DecisionProblem, marginal: &Distribution, prior: Option<&Distribution>) -> Result<PlotData> {
    let n = problem.num_states();
    let coordinates = match n {
        2 => vec![problem.states()[1].clone()],
        3 => problem.states()[..2].to_vec(),
        _ => return Err(Error::Precondition(format!("no plot projection for {n} states"))),
    };
    if let Some(p) = prior {
        p.expect_domain(problem.states(), "prior")?;
    }
    let to_points = |v: &VPolytope| project(problem, v).into_iter().map(Point::new).collect();
    let mut actions = Vec::new();
    for a in 0..problem.num_actions() {
        let h = problem.optimal_belief_set(a);
        if !h.is_feasible() {
            continue;
        }
        let v = vertices(&h, n)?;
        actions.push(Region {
            label: problem.actions()[a].clone(),
            cycle: to_points(&v),
        });
    }
    let m = weighted_minkowski(problem, marginal, n)?;
    let identified = Region {
        label: "M".into(),
        cycle: to_points(&m),
    };
    let prior = prior.map(|p| {
        let w = p.weights();
        Point::new(if n == 3 { w[..2].to_vec() } else { vec![w[1].clone()] })
    });
    Ok(PlotData {
        coordinates,
        actions,
        identified,
        prior,
    })
}
