//! Line-oriented text format for instances.
//!
//! ```text
//! nodes <n>
//! edges <E>
//! <u> <v>                 # E lines, 0-based
//! sources <k> <j1> ... <jk>
//! probs <p1> ... <pk>     # optional, default uniform
//! costs <a_0> ... <a_{n-1}>
//! budget <b>
//! scenarios <m>
//! <w_1 ... w_E>           # m lines
//! alpha <unit | values v_1 ... v_m | solve>
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::{AlphaSpec, Instance, Network, Scenario, MAX_EDGE_WEIGHT};
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
                .map(|(i, l)| (i, l.split_whitespace().collect::<Vec<_>>()))
                .filter(|(_, toks)| !toks.is_empty()),
        );
        Self { inner: it.peekable(), last_line: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((line, toks)) => {
                self.last_line = line;
                Ok((line, toks))
            }
            None => Err(Error::Parse {
                line: self.last_line + 1,
                msg: format!("unexpected end of input, expected {what}"),
            }),
        }
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, t)| t[0])
    }

    /// Reads `<keyword> <args...>` and returns the arguments.
    fn keyword(&mut self, kw: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, toks) = self.next(&format!("`{kw}`"))?;
        if toks[0] != kw {
            return Err(err(line, format!("expected `{kw}`, found `{}`", toks[0])));
        }
        Ok((line, toks[1..].to_vec()))
    }
}

/// Caps the scenario count, which edgeless networks would otherwise leave
/// unbounded by the input size.
pub const MAX_SCENARIOS: usize = 1 << 20;

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| err(line, format!("invalid {what} `{tok}`")))
}

fn single<T: FromStr>(line: usize, args: &[&str], what: &str) -> Result<T> {
    match args {
        [tok] => num(line, tok, what),
        _ => Err(err(line, format!("expected exactly one {what}, found {}", args.len()))),
    }
}

fn list<T: FromStr>(line: usize, args: &[&str], expected: usize, what: &str) -> Result<Vec<T>> {
    if args.len() != expected {
        return Err(err(line, format!("expected {expected} {what} values, found {}", args.len())));
    }
    args.iter().map(|t| num(line, t, what)).collect()
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);

    let (line, args) = lines.keyword("nodes")?;
    let n: usize = single(line, &args, "node count")?;
    if n == 0 {
        return Err(err(line, "node count must be positive"));
    }

    let (line, args) = lines.keyword("edges")?;
    let e: usize = single(line, &args, "edge count")?;
    let mut edges = Vec::with_capacity(e.min(1 << 20));
    for _ in 0..e {
        let (line, toks) = lines.next("an edge line")?;
        let pair: Vec<usize> = list(line, &toks, 2, "edge endpoint")?;
        if pair[0] >= n || pair[1] >= n {
            return Err(err(line, format!("edge ({}, {}) outside 0..{n}", pair[0], pair[1])));
        }
        edges.push((pair[0], pair[1]));
    }

    let (line, args) = lines.keyword("sources")?;
    let Some((count, rest)) = args.split_first() else {
        return Err(err(line, "missing source count"));
    };
    let k: usize = num(line, count, "source count")?;
    let sources: Vec<usize> = list(line, rest, k, "source")?;
    if k == 0 {
        return Err(err(line, "at least one source is required"));
    }
    if let Some(&j) = sources.iter().find(|&&j| j >= n) {
        return Err(err(line, format!("source {j} outside 0..{n}")));
    }
    let mut sorted = sources.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(err(line, format!("source {} listed twice", w[0])));
    }

    let source_probabilities = if lines.peek_keyword() == Some("probs") {
        let (line, args) = lines.keyword("probs")?;
        let p: Vec<f64> = list(line, &args, k, "probability")?;
        if p.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(err(line, "probabilities must be finite and nonnegative"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(err(line, format!("probabilities sum to {total}, expected 1")));
        }
        p
    } else {
        vec![1.0 / k as f64; k]
    };

    let (line, args) = lines.keyword("costs")?;
    let sensor_costs: Vec<u64> = list(line, &args, n, "cost")?;
    if sensor_costs.iter().any(|&c| c == 0) {
        return Err(err(line, "sensor costs must be positive"));
    }

    let (line, args) = lines.keyword("budget")?;
    let budget: u64 = single(line, &args, "budget")?;

    let (line, args) = lines.keyword("scenarios")?;
    let m: usize = single(line, &args, "scenario count")?;
    if m == 0 || m > MAX_SCENARIOS {
        return Err(err(line, format!("scenario count must lie in 1..={MAX_SCENARIOS}")));
    }
    let mut scenarios = Vec::with_capacity(m.min(1 << 16));
    for _ in 0..m {
        if e == 0 {
            // nothing to weigh, and a blank line would not survive a round trip
            scenarios.push(Scenario { edge_weights: Vec::new() });
            continue;
        }
        let (line, toks) = lines.next("a scenario weight line")?;
        let edge_weights: Vec<u64> = list(line, &toks, e, "edge weight")?;
        if edge_weights.iter().any(|&w| w == 0 || w > MAX_EDGE_WEIGHT) {
            return Err(err(line, format!("edge weights must lie in 1..={MAX_EDGE_WEIGHT}")));
        }
        scenarios.push(Scenario { edge_weights });
    }

    let alpha = if lines.peek_keyword().is_some() {
        let (line, args) = lines.keyword("alpha")?;
        match args.split_first() {
            Some((&"unit", [])) => AlphaSpec::Unit,
            Some((&"solve", [])) => AlphaSpec::Solve,
            Some((&"values", vals)) => {
                let v: Vec<f64> = list(line, vals, m, "alpha")?;
                if v.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    return Err(err(line, "alpha values must be positive"));
                }
                AlphaSpec::Values(v)
            }
            _ => return Err(err(line, "expected `alpha unit`, `alpha solve` or `alpha values ...`")),
        }
    } else {
        AlphaSpec::Unit
    };

    if let Some((line, toks)) = lines.inner.next() {
        return Err(err(line, format!("unexpected trailing content `{}`", toks[0])));
    }

    Ok(Instance {
        network: Network { node_count: n, edges, sources, source_probabilities, sensor_costs, budget },
        scenarios,
        alpha,
    })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

pub fn serialize_instance(inst: &Instance) -> String {
    let net = &inst.network;
    let mut out = String::new();
    let _ = writeln!(out, "nodes {}", net.node_count);
    let _ = writeln!(out, "edges {}", net.edges.len());
    for (u, v) in &net.edges {
        let _ = writeln!(out, "{u} {v}");
    }
    let _ = writeln!(out, "sources {} {}", net.sources.len(), join(&net.sources));
    let _ = writeln!(out, "probs {}", join(&net.source_probabilities));
    let _ = writeln!(out, "costs {}", join(&net.sensor_costs));
    let _ = writeln!(out, "budget {}", net.budget);
    let _ = writeln!(out, "scenarios {}", inst.scenarios.len());
    for s in inst.scenarios.iter().filter(|s| !s.edge_weights.is_empty()) {
        let _ = writeln!(out, "{}", join(&s.edge_weights));
    }
    let _ = match &inst.alpha {
        AlphaSpec::Unit => writeln!(out, "alpha unit"),
        AlphaSpec::Solve => writeln!(out, "alpha solve"),
        AlphaSpec::Values(v) => writeln!(out, "alpha values {}", join(v)),
    };
    out
}
