//! Resolution scripts (`.rsc`): a chain of determinantal steps, each with
//! charts, renamings, expectations and exceptional divisors.
//!
//! ```text
//! step s1
//! vars x y z
//! claim y^2 + x^3 + x*z^3
//! matrix (y) (x^2 + z^3)
//! matrix (-x) (y)
//! chart 1
//!   rename a2 -> w
//!   continue s2
//!   expect singular@(x=0, z=0, w=0)
//!   divisor E1 = x, z
//! chart 2
//!   expect smooth
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use super::{divisor_incidence, reduced_space, Divisor, MeetKind, Meeting, Renaming, ResolveError};
use crate::detvar::{minors, DetPresentation, PolyMatrix};
use crate::format::{paren_groups, parse_at, split_key, strip_comment, syntax, FormatError};
use crate::ideal::{
    contains, groebner_basis, ideals_equal, normal_form, saturate, GroebnerLimits, MonomialOrder,
};
use crate::poly::{parse_poly, Polynomial, Rational, VarSet};
use crate::smooth::{smoothness_report, SmoothnessReport, Verdict};
use crate::tjurina::{chart_presentation, chart_transition, eliminate_linear, ChartIndex, Side};

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionScript {
    pub steps: Vec<StepSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSpec {
    pub label: String,
    pub line: usize,
    pub vars: Arc<VarSet>,
    pub claim: Polynomial,
    pub matrix: PolyMatrix,
    pub t: usize,
    pub charts: Vec<ChartSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub line: usize,
    pub chart: ChartIndex,
    /// `(old, new, negate)`.
    pub renames: Vec<(String, String, bool)>,
    pub continue_to: Option<String>,
    pub expect: Option<Expectation>,
    /// Expression over the renamed, reduced chart coordinates.
    pub saturate: Option<String>,
    pub divisors: Vec<DivisorSpec>,
    pub meets: Vec<MeetSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Smooth,
    /// Named coordinates of each singular point; unnamed ones are zero.
    Singular(Vec<Vec<(String, Rational)>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisorSpec {
    pub name: String,
    pub generators: Vec<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeetSpec {
    pub a: String,
    pub b: String,
    pub kind: MeetKind,
    pub line: usize,
}

struct StepDraft {
    label: String,
    line: usize,
    vars: Option<Arc<VarSet>>,
    claim: Option<Polynomial>,
    rows: Vec<(Vec<Polynomial>, usize)>,
    t: Option<(usize, usize)>,
    charts: Vec<ChartDraft>,
}

struct ChartDraft {
    line: usize,
    list: Vec<usize>,
    side: Side,
    spec: ChartSpec,
}

pub fn parse_script_file(path: impl AsRef<Path>) -> Result<ResolutionScript, FormatError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_script(&text)
}

pub fn parse_script(text: &str) -> Result<ResolutionScript, FormatError> {
    let mut steps: Vec<StepSpec> = Vec::new();
    let mut cur: Option<StepDraft> = None;
    let mut last_line = 1;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let (key, rest, col) = split_key(body);
        if key == "step" {
            if let Some(d) = cur.take() {
                steps.push(finish_step(d)?);
            }
            let label = rest.trim();
            if label.is_empty() || label.contains(char::is_whitespace) {
                return Err(syntax(line, col, "`step` expects a single label"));
            }
            if steps.iter().any(|s| s.label == label) {
                return Err(syntax(line, col, format!("duplicate step label `{label}`")));
            }
            cur = Some(StepDraft {
                label: label.to_string(),
                line,
                vars: None,
                claim: None,
                rows: Vec::new(),
                t: None,
                charts: Vec::new(),
            });
            continue;
        }
        let Some(step) = cur.as_mut() else {
            return Err(syntax(line, 1, format!("`{key}` before the first `step`")));
        };
        let in_chart = !step.charts.is_empty();
        match key {
            "vars" | "claim" | "matrix" | "t" if in_chart => {
                return Err(syntax(
                    line,
                    1,
                    format!("`{key}` must come before the step's charts"),
                ));
            }
            "vars" => {
                if step.vars.is_some() {
                    return Err(syntax(line, 1, "duplicate `vars` line"));
                }
                let names: Vec<&str> = rest.split_whitespace().collect();
                if names.is_empty() {
                    return Err(syntax(line, col, "empty variable list"));
                }
                step.vars = Some(VarSet::new(names).map_err(|e| syntax(line, col, e.to_string()))?);
            }
            "claim" => {
                let vars = step
                    .vars
                    .as_ref()
                    .ok_or_else(|| syntax(line, 1, "`claim` before `vars`"))?;
                if step.claim.is_some() {
                    return Err(syntax(line, 1, "duplicate `claim` line"));
                }
                step.claim = Some(parse_at(rest, vars, line, col)?);
            }
            "matrix" => {
                let vars = step
                    .vars
                    .as_ref()
                    .ok_or_else(|| syntax(line, 1, "`matrix` before `vars`"))?;
                let groups = paren_groups(rest, line, col - 1)?;
                if groups.is_empty() {
                    return Err(syntax(line, col, "empty matrix row"));
                }
                if let Some((first, _)) = step.rows.first() {
                    if first.len() != groups.len() {
                        return Err(syntax(
                            line,
                            col,
                            format!("expected {} entries, found {}", first.len(), groups.len()),
                        ));
                    }
                }
                let row = groups
                    .iter()
                    .map(|(g, c)| parse_at(g, vars, line, *c))
                    .collect::<Result<Vec<_>, _>>()?;
                step.rows.push((row, line));
            }
            "t" => {
                let t = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| syntax(line, col, "`t` expects a positive integer"))?;
                step.t = Some((t, line));
            }
            "chart" => {
                let (list, side) = parse_chart_list(rest, line, col)?;
                let spec = ChartSpec {
                    line,
                    chart: ChartIndex::new(&list, side)
                        .map_err(|e| syntax(line, col, e.to_string()))?,
                    renames: Vec::new(),
                    continue_to: None,
                    expect: None,
                    saturate: None,
                    divisors: Vec::new(),
                    meets: Vec::new(),
                };
                step.charts.push(ChartDraft {
                    line,
                    list,
                    side,
                    spec,
                });
            }
            _ if !in_chart => return Err(syntax(line, 1, format!("unknown keyword `{key}`"))),
            _ => parse_chart_key(
                &mut step.charts.last_mut().expect("in chart").spec,
                key,
                rest,
                line,
                col,
            )?,
        }
    }
    if let Some(d) = cur.take() {
        steps.push(finish_step(d)?);
    }
    if steps.is_empty() {
        return Err(syntax(last_line, 1, "script has no steps"));
    }
    for s in &steps {
        for c in &s.charts {
            if let Some(target) = &c.continue_to {
                if !steps.iter().any(|t| &t.label == target) {
                    return Err(syntax(
                        c.line,
                        1,
                        format!("chart continues to unknown step `{target}`"),
                    ));
                }
            }
        }
    }
    Ok(ResolutionScript { steps })
}

fn parse_chart_list(
    rest: &str,
    line: usize,
    col: usize,
) -> Result<(Vec<usize>, Side), FormatError> {
    let mut text = rest.trim();
    let mut side = Side::Row;
    if let Some(head) = text.strip_suffix("transpose") {
        side = Side::Column;
        text = head.trim();
    }
    let inner = text.trim_start_matches('{').trim_end_matches('}');
    let list = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| {
            syntax(
                line,
                col,
                "chart expects a list of indices, optionally followed by `transpose`",
            )
        })?;
    Ok((list, side))
}

fn parse_chart_key(
    spec: &mut ChartSpec,
    key: &str,
    rest: &str,
    line: usize,
    col: usize,
) -> Result<(), FormatError> {
    match key {
        "rename" => {
            for item in rest.split(',') {
                let Some((old, new)) = item.split_once("->") else {
                    return Err(syntax(line, col, "`rename` expects `old -> new`"));
                };
                let old = old.trim();
                let new = new.trim();
                let (new, negate) = match new.strip_prefix('-') {
                    Some(n) => (n.trim(), true),
                    None => (new, false),
                };
                let ident = |s: &str| {
                    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                };
                if !ident(old) || !ident(new) {
                    return Err(syntax(line, col, format!("bad renaming `{}`", item.trim())));
                }
                spec.renames
                    .push((old.to_string(), new.to_string(), negate));
            }
        }
        "continue" => {
            if spec.continue_to.is_some() {
                return Err(syntax(line, 1, "duplicate `continue`"));
            }
            spec.continue_to = Some(rest.trim().to_string());
        }
        "expect" => {
            let r = rest.trim();
            if r == "smooth" {
                if spec.expect.is_some() {
                    return Err(syntax(line, col, "conflicting expectations"));
                }
                spec.expect = Some(Expectation::Smooth);
            } else if let Some(pts) = r.strip_prefix("singular") {
                let pts = pts.trim_start().trim_start_matches('@');
                let offset = col - 1 + (rest.len() - pts.len());
                let groups = paren_groups(pts, line, offset)?;
                if groups.is_empty() {
                    return Err(syntax(
                        line,
                        col,
                        "`expect singular` needs at least one point",
                    ));
                }
                let mut parsed = Vec::new();
                for (g, c) in groups {
                    parsed.push(parse_point(&g, line, c)?);
                }
                match &mut spec.expect {
                    None => spec.expect = Some(Expectation::Singular(parsed)),
                    Some(Expectation::Singular(v)) => v.extend(parsed),
                    Some(Expectation::Smooth) => {
                        return Err(syntax(line, col, "conflicting expectations"))
                    }
                }
            } else {
                return Err(syntax(
                    line,
                    col,
                    "`expect` takes `smooth` or `singular@(...)`",
                ));
            }
        }
        "saturate" => {
            if spec.saturate.is_some() {
                return Err(syntax(line, 1, "duplicate `saturate`"));
            }
            spec.saturate = Some(rest.trim().to_string());
        }
        "divisor" => {
            let Some((name, gens)) = rest.split_once('=') else {
                return Err(syntax(line, col, "`divisor` expects `NAME = g1, g2, ...`"));
            };
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(syntax(line, col, "bad divisor name"));
            }
            if spec.divisors.iter().any(|d| d.name == name) {
                return Err(syntax(
                    line,
                    col,
                    format!("divisor `{name}` declared twice in this chart"),
                ));
            }
            let generators: Vec<String> = gens.split(',').map(|g| g.trim().to_string()).collect();
            if generators.iter().any(String::is_empty) {
                return Err(syntax(line, col, "empty divisor generator"));
            }
            spec.divisors.push(DivisorSpec {
                name: name.to_string(),
                generators,
                line,
            });
        }
        "meet" => {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [a, b, kind] = parts[..] else {
                return Err(syntax(
                    line,
                    col,
                    "`meet` expects `A B disjoint|smooth|singular|curve`",
                ));
            };
            if a == b {
                return Err(syntax(
                    line,
                    col,
                    format!("divisor `{a}` cannot meet itself"),
                ));
            }
            let kind = match kind {
                "disjoint" => MeetKind::Disjoint,
                "smooth" => MeetKind::Smooth,
                "singular" => MeetKind::Singular,
                "curve" => MeetKind::Curve,
                other => return Err(syntax(line, col, format!("unknown meeting kind `{other}`"))),
            };
            spec.meets.push(MeetSpec {
                a: a.to_string(),
                b: b.to_string(),
                kind,
                line,
            });
        }
        other => return Err(syntax(line, 1, format!("unknown keyword `{other}`"))),
    }
    Ok(())
}

fn parse_point(
    text: &str,
    line: usize,
    col: usize,
) -> Result<Vec<(String, Rational)>, FormatError> {
    let mut out: Vec<(String, Rational)> = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let Some((name, value)) = item.split_once('=') else {
            return Err(syntax(
                line,
                col,
                format!("expected `name=value`, found `{}`", item.trim()),
            ));
        };
        let value = Rational::from_str(value.trim())
            .map_err(|_| syntax(line, col, format!("bad rational `{}`", value.trim())))?;
        let name = name.trim().to_string();
        if out.iter().any(|(n, _)| *n == name) {
            return Err(syntax(
                line,
                col,
                format!("coordinate `{name}` given twice"),
            ));
        }
        out.push((name, value));
    }
    Ok(out)
}

fn finish_step(d: StepDraft) -> Result<StepSpec, FormatError> {
    let vars = d
        .vars
        .ok_or_else(|| syntax(d.line, 1, format!("step `{}` has no `vars`", d.label)))?;
    let claim = d
        .claim
        .ok_or_else(|| syntax(d.line, 1, format!("step `{}` has no `claim`", d.label)))?;
    if d.rows.is_empty() {
        return Err(syntax(
            d.line,
            1,
            format!("step `{}` has no `matrix`", d.label),
        ));
    }
    let m = d.rows.len();
    let n = d.rows[0].0.len();
    let entries: Vec<Polynomial> = d.rows.into_iter().flat_map(|(r, _)| r).collect();
    let matrix =
        PolyMatrix::new(&vars, m, n, entries).map_err(|e| syntax(d.line, 1, e.to_string()))?;
    let t = match d.t {
        Some((t, _)) if t == 0 || t > m.min(n) => return Err(FormatError::Range { t, m, n }),
        Some((t, _)) => t,
        None => m.min(n),
    };
    let mut charts = Vec::new();
    for c in d.charts {
        let width = if c.side == Side::Row { n } else { m };
        if c.list.len() + 1 != t || c.list.iter().any(|&i| i > width) {
            return Err(syntax(
                c.line,
                1,
                format!("chart needs {} distinct indices in 1..={width}", t - 1),
            ));
        }
        for meet in &c.spec.meets {
            for name in [&meet.a, &meet.b] {
                if !c.spec.divisors.iter().any(|dv| &dv.name == name) {
                    return Err(syntax(meet.line, 1, format!("unknown divisor `{name}`")));
                }
            }
        }
        charts.push(c.spec);
    }
    Ok(StepSpec {
        label: d.label,
        line: d.line,
        vars,
        claim,
        matrix,
        t,
        charts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScriptReport {
    pub steps: Vec<StepReport>,
    pub failures: Vec<Failure>,
}

impl ScriptReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub label: String,
    pub determinant: DetCheck,
    pub charts: Vec<ChartReport>,
    /// Edges of the dual graph of the divisors seen at this step.
    pub graph: Vec<GraphEdge>,
    pub nodes: Vec<DivisorNode>,
}

/// How many distinct points a divisor shares with the others at one step,
/// after identifying points seen in several charts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisorNode {
    pub name: String,
    pub smooth_points: usize,
    pub singular_points: usize,
    pub neighbours: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetCheck {
    pub claim: String,
    pub computed: Vec<String>,
    /// `equal`, `negated`, `ideal` or `mismatch`.
    pub relation: String,
    pub passed: bool,
    pub residue: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartReport {
    pub chart: String,
    pub vars: Vec<String>,
    pub eliminated: Vec<String>,
    pub generators: Vec<String>,
    pub smoothness: Option<SmoothnessReport>,
    pub singular_points: Vec<String>,
    pub expectation: Option<String>,
    pub expectation_passed: Option<bool>,
    pub continuation: Option<ContinuationCheck>,
    pub incidences: Vec<IncidenceReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationCheck {
    pub target: String,
    pub relation: String,
    pub passed: bool,
    pub residue: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceReport {
    pub a: String,
    pub b: String,
    pub kind: Option<MeetKind>,
    pub points: Vec<String>,
    pub complete: bool,
    pub expected: Option<MeetKind>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphEdge {
    pub a: String,
    pub b: String,
    pub smooth_points: usize,
    pub singular_points: usize,
    pub curve: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub step: String,
    /// 1-based position of the step in the script.
    pub step_number: usize,
    pub chart: Option<String>,
    pub what: String,
    /// The polynomial that failed to vanish, when there is one.
    pub residue: Option<String>,
}

struct MeetRecord {
    chart: ChartIndex,
    width: usize,
    ambient: Vec<Rational>,
    coords: Vec<Rational>,
    smooth: bool,
}

#[derive(Default)]
struct EdgeAcc {
    points: Vec<MeetRecord>,
    curve: bool,
}

fn same_point(p: &MeetRecord, q: &MeetRecord) -> bool {
    if p.ambient != q.ambient {
        return false;
    }
    if p.chart == q.chart {
        return p.coords == q.coords;
    }
    chart_transition(&p.chart, &q.chart, p.width, &p.coords).is_ok_and(|c| c == q.coords)
}

fn fmt_point(vars: &VarSet, point: &[Rational]) -> String {
    let items: Vec<String> = point
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{}={}", vars.name(i), c))
        .collect();
    format!("({})", items.join(", "))
}

/// Runs every check in the script. Computation errors become failures
/// rather than aborting the run.
pub fn run_script(script: &ResolutionScript, limits: &GroebnerLimits) -> ScriptReport {
    let mut failures = Vec::new();
    let mut steps = Vec::new();
    for (si, step) in script.steps.iter().enumerate() {
        let fail = |failures: &mut Vec<Failure>,
                    chart: Option<String>,
                    what: String,
                    residue: Option<String>| {
            failures.push(Failure {
                step: step.label.clone(),
                step_number: si + 1,
                chart,
                what,
                residue,
            });
        };
        let determinant = check_claim(step, limits);
        if !determinant.passed {
            fail(
                &mut failures,
                None,
                "matrix does not present the claimed equation".into(),
                determinant.residue.clone(),
            );
        }
        let p = match DetPresentation::new(step.matrix.clone(), step.t, step.label.clone()) {
            Ok(p) => p,
            Err(e) => {
                fail(&mut failures, None, e.to_string(), None);
                steps.push(StepReport {
                    label: step.label.clone(),
                    determinant,
                    charts: Vec::new(),
                    graph: Vec::new(),
                    nodes: Vec::new(),
                });
                continue;
            }
        };
        let mut charts = Vec::new();
        let mut edges: BTreeMap<(String, String), EdgeAcc> = BTreeMap::new();
        for spec in &step.charts {
            let name = spec.chart.to_string();
            let mut local = Vec::new();
            let report = run_chart(script, &p, spec, limits, &mut local, &mut edges)
                .unwrap_or_else(|e| {
                    local.push((format!("computation failed: {e}"), None));
                    ChartReport {
                        chart: name.clone(),
                        vars: Vec::new(),
                        eliminated: Vec::new(),
                        generators: Vec::new(),
                        smoothness: None,
                        singular_points: Vec::new(),
                        expectation: None,
                        expectation_passed: None,
                        continuation: None,
                        incidences: Vec::new(),
                        error: Some(e.to_string()),
                    }
                });
            for (what, residue) in local {
                fail(&mut failures, Some(name.clone()), what, residue);
            }
            charts.push(report);
        }
        let nodes = divisor_nodes(&edges);
        let graph = edges
            .into_iter()
            .filter(|(_, acc)| acc.curve || !acc.points.is_empty())
            .map(|((a, b), acc)| {
                let mut distinct: Vec<&MeetRecord> = Vec::new();
                for p in &acc.points {
                    if !distinct.iter().any(|q| same_point(q, p)) {
                        distinct.push(p);
                    }
                }
                GraphEdge {
                    a,
                    b,
                    smooth_points: distinct.iter().filter(|p| p.smooth).count(),
                    singular_points: distinct.iter().filter(|p| !p.smooth).count(),
                    curve: acc.curve,
                }
            })
            .collect();
        steps.push(StepReport {
            label: step.label.clone(),
            determinant,
            charts,
            graph,
            nodes,
        });
    }
    ScriptReport { steps, failures }
}

fn divisor_nodes(edges: &BTreeMap<(String, String), EdgeAcc>) -> Vec<DivisorNode> {
    let mut names: Vec<&String> = edges.keys().flat_map(|(a, b)| [a, b]).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .map(|name| {
            let mut distinct: Vec<&MeetRecord> = Vec::new();
            let mut neighbours = Vec::new();
            for ((a, b), acc) in edges {
                let other = if a == name {
                    b
                } else if b == name {
                    a
                } else {
                    continue;
                };
                if acc.curve || !acc.points.is_empty() {
                    neighbours.push(other.clone());
                }
                for p in &acc.points {
                    if !distinct.iter().any(|q| same_point(q, p)) {
                        distinct.push(p);
                    }
                }
            }
            DivisorNode {
                name: name.clone(),
                smooth_points: distinct.iter().filter(|p| p.smooth).count(),
                singular_points: distinct.iter().filter(|p| !p.smooth).count(),
                neighbours,
            }
        })
        .collect()
}

fn check_claim(step: &StepSpec, limits: &GroebnerLimits) -> DetCheck {
    let claim = &step.claim;
    let square = step.matrix.rows() == step.matrix.cols() && step.t == step.matrix.rows();
    let computed: Vec<Polynomial> = if square {
        vec![step.matrix.determinant().expect("square")]
    } else {
        minors(&step.matrix, step.t)
            .expect("t in range")
            .into_iter()
            .filter(|p| !p.is_zero())
            .collect()
    };
    let shown = computed.iter().map(ToString::to_string).collect();
    let (relation, residue) = if computed.len() == 1 && &computed[0] == claim {
        ("equal", None)
    } else if computed.len() == 1 && computed[0] == -claim {
        ("negated", None)
    } else if ideals_equal(&step.vars, &computed, std::slice::from_ref(claim), limits)
        .unwrap_or(false)
    {
        ("ideal", None)
    } else if computed.len() == 1 {
        ("mismatch", Some((&computed[0] - claim).to_string()))
    } else {
        let gb = groebner_basis(
            &step.vars,
            std::slice::from_ref(claim),
            &MonomialOrder::GrevLex,
            limits,
        );
        let res = gb.ok().and_then(|gb| {
            computed
                .iter()
                .map(|g| normal_form(g, &gb))
                .find(|r| !r.is_zero())
        });
        ("mismatch", res.map(|r| r.to_string()))
    };
    DetCheck {
        claim: claim.to_string(),
        computed: shown,
        relation: relation.into(),
        passed: residue.is_none() && relation != "mismatch",
        residue,
    }
}

fn run_chart(
    script: &ResolutionScript,
    p: &DetPresentation,
    spec: &ChartSpec,
    limits: &GroebnerLimits,
    failures: &mut Vec<(String, Option<String>)>,
    edges: &mut BTreeMap<(String, String), EdgeAcc>,
) -> Result<ChartReport, ResolveError> {
    let cp = eliminate_linear(&chart_presentation(p, &spec.chart)?);
    let free = cp.free_vars();
    let moved: Vec<usize> = (0..cp.vars().len()).filter(|v| !free.contains(v)).collect();
    let renaming = Renaming::displacing(cp.vars(), &spec.renames, &moved)?;
    let full_vars = renaming.target.clone();
    let (reduced_src, _) = reduced_space(&cp)?;
    let reduced_vars = full_vars.subset(&free);
    let mut generators: Vec<Polynomial> = cp
        .generators()
        .iter()
        .map(|g| renaming.apply(g).embed(&reduced_vars))
        .collect::<Result<_, _>>()?;
    debug_assert_eq!(reduced_src.len(), reduced_vars.len());
    if let Some(expr) = &spec.saturate {
        let f = parse_poly(expr, &reduced_vars)?;
        generators = saturate(&reduced_vars, &generators, &f, limits)?;
    }
    let eliminated: Vec<(usize, Polynomial)> = cp
        .ledger()
        .iter()
        .map(|(v, g)| (*v, renaming.apply(g)))
        .collect();
    let eliminated_text = eliminated
        .iter()
        .map(|(v, g)| {
            let h = &Polynomial::var(&full_vars, *v) - g;
            format!("{} = {}", full_vars.name(*v), h)
        })
        .collect();

    let smoothness = smoothness_report(&reduced_vars, &generators, limits)?;
    let singular_points: Vec<String> = match &smoothness.verdict {
        Verdict::SingularAt { points, .. } => points
            .iter()
            .map(|pt| fmt_point(&reduced_vars, pt))
            .collect(),
        _ => Vec::new(),
    };

    let (expectation, expectation_passed) = match &spec.expect {
        None => (None, None),
        Some(Expectation::Smooth) => {
            let ok = smoothness.is_smooth();
            if !ok {
                failures.push((
                    format!(
                        "expected smooth, found {}",
                        describe(&smoothness, &singular_points)
                    ),
                    None,
                ));
            }
            (Some("smooth".to_string()), Some(ok))
        }
        Some(Expectation::Singular(pts)) => {
            let mut expected = Vec::new();
            let mut bad_name = None;
            for pt in pts {
                let mut coords = vec![Rational::zero(); reduced_vars.len()];
                for (name, value) in pt {
                    match reduced_vars.index_of(name) {
                        Some(i) => coords[i] = value.clone(),
                        None => bad_name = Some(name.clone()),
                    }
                }
                expected.push(coords);
            }
            expected.sort();
            expected.dedup();
            let text: Vec<String> = expected
                .iter()
                .map(|pt| fmt_point(&reduced_vars, pt))
                .collect();
            let ok = match (&bad_name, &smoothness.verdict) {
                (Some(_), _) => false,
                (None, Verdict::SingularAt { points, complete }) => {
                    *complete && smoothness.certified && *points == expected
                }
                _ => false,
            };
            if let Some(n) = bad_name {
                failures.push((
                    format!("expected singular point names unknown coordinate `{n}`"),
                    None,
                ));
            } else if !ok {
                failures.push((
                    format!(
                        "expected singular at {}, found {}",
                        text.join(" "),
                        describe(&smoothness, &singular_points)
                    ),
                    None,
                ));
            }
            (Some(format!("singular at {}", text.join(" "))), Some(ok))
        }
    };

    let continuation = match &spec.continue_to {
        None => None,
        Some(target) => {
            let next = script
                .steps
                .iter()
                .find(|s| &s.label == target)
                .expect("validated at parse time");
            let check = check_continuation(&reduced_vars, &generators, next, limits);
            if !check.passed {
                failures.push((
                    format!("chart does not continue as step `{target}`"),
                    check.residue.clone(),
                ));
            }
            Some(check)
        }
    };

    let mut incidences = Vec::new();
    if !spec.divisors.is_empty() {
        let mut full: Vec<Polynomial> = generators
            .iter()
            .map(|g| g.embed(&full_vars))
            .collect::<Result<_, _>>()?;
        full.extend(eliminated.iter().map(|(_, g)| g.clone()));
        let divisors: Vec<Divisor> = spec
            .divisors
            .iter()
            .map(|d| {
                let gens = d
                    .generators
                    .iter()
                    .map(|g| parse_poly(g, &full_vars))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Divisor {
                    name: d.name.clone(),
                    generators: gens,
                })
            })
            .collect::<Result<_, ResolveError>>()?;
        let n_ambient = p.ambient_dim();
        let width = if spec.chart.side() == Side::Row {
            p.n()
        } else {
            p.m()
        };
        for inc in divisor_incidence(&full_vars, &full, &divisors, limits)? {
            let expected = spec
                .meets
                .iter()
                .find(|m| (m.a == inc.a && m.b == inc.b) || (m.a == inc.b && m.b == inc.a))
                .map(|m| m.kind);
            let kind = inc.meeting.kind();
            let key = if inc.a <= inc.b {
                (inc.a.clone(), inc.b.clone())
            } else {
                (inc.b.clone(), inc.a.clone())
            };
            let acc = edges.entry(key).or_default();
            let (points, complete) = match &inc.meeting {
                Meeting::Points { points, complete } => {
                    for mp in points {
                        let orig = renaming.pull_back(&mp.coords);
                        acc.points.push(MeetRecord {
                            chart: spec.chart.clone(),
                            width,
                            ambient: orig[..n_ambient].to_vec(),
                            coords: cp.chart_vars().iter().map(|&v| orig[v].clone()).collect(),
                            smooth: mp.smooth,
                        });
                    }
                    let text = points
                        .iter()
                        .map(|mp| {
                            let tag = if mp.smooth { "smooth" } else { "singular" };
                            format!("{} {tag}", fmt_point(&full_vars, &mp.coords))
                        })
                        .collect();
                    (text, *complete)
                }
                Meeting::Positive { .. } => {
                    acc.curve = true;
                    (Vec::new(), true)
                }
                Meeting::Disjoint => (Vec::new(), true),
            };
            let passed = complete && expected.is_none_or(|e| Some(e) == kind);
            if !passed {
                let found = kind.map_or("a mix of smooth and singular points".to_string(), |k| {
                    format!("{k:?}").to_lowercase()
                });
                let what = match expected {
                    Some(e) => format!(
                        "{} and {} expected to meet {}, found {found}",
                        inc.a,
                        inc.b,
                        format!("{e:?}").to_lowercase()
                    ),
                    None => format!(
                        "{} and {} meet at points that are not all rational",
                        inc.a, inc.b
                    ),
                };
                failures.push((what, None));
            }
            incidences.push(IncidenceReport {
                a: inc.a,
                b: inc.b,
                kind,
                points,
                complete,
                expected,
                passed,
            });
        }
    }

    Ok(ChartReport {
        chart: spec.chart.to_string(),
        vars: reduced_vars.names().to_vec(),
        eliminated: eliminated_text,
        generators: generators.iter().map(ToString::to_string).collect(),
        smoothness: Some(smoothness),
        singular_points,
        expectation,
        expectation_passed,
        continuation,
        incidences,
        error: None,
    })
}

fn describe(r: &SmoothnessReport, points: &[String]) -> String {
    match &r.verdict {
        Verdict::Empty => "an empty chart".into(),
        Verdict::Smooth => "smooth".into(),
        Verdict::SingularAt { complete, .. } => {
            let extra = if *complete {
                ""
            } else {
                " and irrational points"
            };
            format!("singular at {}{extra}", points.join(" "))
        }
        Verdict::SingularPositiveDim { dim } => format!("a singular locus of dimension {dim}"),
    }
}

fn check_continuation(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    next: &StepSpec,
    limits: &GroebnerLimits,
) -> ContinuationCheck {
    let target = next.label.clone();
    let mut mine: Vec<&str> = vars.names().iter().map(String::as_str).collect();
    let mut theirs: Vec<&str> = next.vars.names().iter().map(String::as_str).collect();
    mine.sort_unstable();
    theirs.sort_unstable();
    if mine != theirs {
        return ContinuationCheck {
            target,
            relation: format!(
                "coordinates {{{}}} differ from {{{}}}",
                mine.join(", "),
                theirs.join(", ")
            ),
            passed: false,
            residue: None,
        };
    }
    let embedded: Vec<Polynomial> = gens
        .iter()
        .map(|g| g.embed(&next.vars).expect("same names"))
        .collect();
    let claim = &next.claim;
    let (relation, residue) = if embedded.len() == 1 && &embedded[0] == claim {
        ("equal", None)
    } else if embedded.len() == 1 && embedded[0] == -claim {
        ("negated", None)
    } else if ideals_equal(&next.vars, &embedded, std::slice::from_ref(claim), limits)
        .unwrap_or(false)
    {
        ("ideal", None)
    } else if embedded.len() == 1 {
        ("mismatch", Some((&embedded[0] - claim).to_string()))
    } else {
        let res = groebner_basis(&next.vars, &embedded, &MonomialOrder::GrevLex, limits)
            .ok()
            .filter(|gb| !contains(gb, claim))
            .map(|gb| normal_form(claim, &gb).to_string());
        ("mismatch", res)
    };
    ContinuationCheck {
        target,
        relation: relation.into(),
        passed: relation != "mismatch",
        residue,
    }
}

impl fmt::Display for ScriptReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let d = &s.determinant;
            let status = if d.passed {
                format!("ok ({})", d.relation)
            } else {
                "FAILED".to_string()
            };
            writeln!(f, "step {}: {} ... {status}", s.label, d.claim)?;
            if let Some(r) = &d.residue {
                writeln!(f, "  residue: {r}")?;
            }
            for c in &s.charts {
                writeln!(f, "  chart {} in ({})", c.chart, c.vars.join(", "))?;
                if let Some(e) = &c.error {
                    writeln!(f, "    error: {e}")?;
                    continue;
                }
                for e in &c.eliminated {
                    writeln!(f, "    eliminated {e}")?;
                }
                if c.generators.is_empty() {
                    writeln!(f, "    no equations left")?;
                }
                for g in &c.generators {
                    writeln!(f, "    0 = {g}")?;
                }
                if let Some(r) = &c.smoothness {
                    writeln!(f, "    {}", describe(r, &c.singular_points))?;
                }
                if let (Some(e), Some(ok)) = (&c.expectation, c.expectation_passed) {
                    writeln!(f, "    expected {e}: {}", if ok { "ok" } else { "FAILED" })?;
                }
                if let Some(k) = &c.continuation {
                    let status = if k.passed {
                        format!("ok ({})", k.relation)
                    } else {
                        format!("FAILED ({})", k.relation)
                    };
                    writeln!(f, "    continues as {}: {status}", k.target)?;
                    if let Some(r) = &k.residue {
                        writeln!(f, "      residue: {r}")?;
                    }
                }
                for i in &c.incidences {
                    let kind = i
                        .kind
                        .map_or("mixed".to_string(), |k| format!("{k:?}").to_lowercase());
                    let status = if i.passed { "" } else { "  FAILED" };
                    writeln!(f, "    {} x {}: {kind}{status}", i.a, i.b)?;
                    for p in &i.points {
                        writeln!(f, "      {p}")?;
                    }
                }
            }
            if !s.graph.is_empty() {
                writeln!(f, "  dual graph:")?;
                for e in &s.graph {
                    if e.curve {
                        writeln!(f, "    {} -- {}: share a curve", e.a, e.b)?;
                    } else {
                        writeln!(
                            f,
                            "    {} -- {}: {} smooth, {} singular",
                            e.a, e.b, e.smooth_points, e.singular_points
                        )?;
                    }
                }
                for n in s.nodes.iter().filter(|n| n.neighbours.len() > 1) {
                    writeln!(
                        f,
                        "    {} meets {}: {} distinct smooth, {} distinct singular",
                        n.name,
                        n.neighbours.join(", "),
                        n.smooth_points,
                        n.singular_points
                    )?;
                }
            }
        }
        match self.first_failure() {
            None => writeln!(f, "all checks passed"),
            Some(x) => {
                let chart = x
                    .chart
                    .as_deref()
                    .map(|c| format!(" chart {c}"))
                    .unwrap_or_default();
                writeln!(
                    f,
                    "{} failure(s); first at step {} (#{}){chart}: {}",
                    self.failures.len(),
                    x.step,
                    x.step_number,
                    x.what
                )?;
                if let Some(r) = &x.residue {
                    writeln!(f, "  residue: {r}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
step a2
vars x y z
claim x*y - z^3
matrix (x) (z^2)
matrix (z) (y)
chart 1
  rename a2 -> y
  continue a1
chart 2
  expect smooth
step a1
vars x y z
claim x*y - z^2
matrix (x) (z)
matrix (z) (y)
chart 1
  expect smooth
";

    #[test]
    fn parses_steps_and_charts() {
        let s = parse_script(SMALL).unwrap();
        assert_eq!(s.steps.len(), 2);
        assert_eq!(s.steps[0].t, 2);
        assert_eq!(
            s.steps[0].charts[0].renames,
            vec![("a2".into(), "y".into(), false)]
        );
        assert_eq!(s.steps[0].charts[1].expect, Some(Expectation::Smooth));
    }

    #[test]
    fn small_chain_passes() {
        let r = run_script(&parse_script(SMALL).unwrap(), &GroebnerLimits::default());
        assert!(r.passed(), "{r}");
        assert_eq!(
            r.steps[0].charts[0].continuation.as_ref().unwrap().relation,
            "negated"
        );
    }

    #[test]
    fn wrong_claim_is_located() {
        let text = SMALL.replace("claim x*y - z^2", "claim x*y + z^2");
        let r = run_script(&parse_script(&text).unwrap(), &GroebnerLimits::default());
        assert!(!r.passed());
        let f = r.first_failure().unwrap();
        assert_eq!(f.step_number, 1);
        assert_eq!(f.chart.as_deref(), Some("{1}"));
        assert!(f.residue.is_some());
    }

    #[test]
    fn rejects_bad_input() {
        let bad_meet = format!("{SMALL}  divisor E = x, z\n  meet E E smooth\n");
        assert!(matches!(
            parse_script(&bad_meet),
            Err(FormatError::Syntax { line: 19, .. })
        ));
        let dup = format!("{SMALL}  divisor E = x, z\n  divisor E = y, z\n");
        assert!(matches!(
            parse_script(&dup),
            Err(FormatError::Syntax { line: 19, .. })
        ));
        let unknown = format!("{SMALL}  divisor E = x, z\n  meet E F smooth\n");
        assert!(parse_script(&unknown).is_err());
        assert!(parse_script(&SMALL.replace("continue a1", "continue a9")).is_err());
        assert!(parse_script(&SMALL.replace("chart 2", "chart 3")).is_err());
        assert!(parse_script("").is_err());
    }
}
