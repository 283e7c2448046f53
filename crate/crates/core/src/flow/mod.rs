//! Maximum concurrent multicommodity flow on the shared networks, plus the
//! undirected conversion and the comparison reports against coding rates.
//!
//! Flow variables live on directed arcs: a directed network uses its edges
//! as-is, an undirected network gets one arc per orientation of every edge,
//! with both orientations drawing on the shared capacity.

mod simplex;

use crate::coding::Network;
use serde::Serialize;
use simplex::simplex_max;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Feasibility tolerance: residuals above this mean a defective solution.
pub const FEAS_TOL: f64 = 1e-9;
/// Optimality tolerance for rate comparisons between solvers.
pub const OPT_TOL: f64 = 1e-7;

const PATH_LIMIT: usize = 10_000;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("linear program is unbounded, which finite capacities should prevent")]
    Unbounded,
    #[error("simplex failed to converge after {iterations} iterations")]
    Stalled { iterations: usize },
    #[error("a commodity has more than {limit} simple paths")]
    PathLimitExceeded { limit: usize },
    #[error("network file line {line}: {detail}")]
    MalformedFile { line: usize, detail: String },
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    /// Largest r such that every commodity ships at least r units.
    pub rate: f64,
    pub arcs: Vec<(usize, usize)>,
    /// Arc flows per commodity, nonnegative, antiparallel-cancelled.
    pub flows: Vec<Vec<f64>>,
    pub pairs: Vec<(usize, usize)>,
    pub iterations: usize,
    /// Largest constraint residual of the returned solution.
    pub max_violation: f64,
    /// Largest complementary-slackness product at the solver's optimum.
    pub complementary_slackness: f64,
}

impl FlowSolution {
    pub fn arc_flow(&self, commodity: usize, arc: usize) -> f64 {
        self.flows[commodity][arc]
    }

    pub fn inflow(&self, commodity: usize, v: usize) -> f64 {
        self.arcs
            .iter()
            .zip(&self.flows[commodity])
            .filter_map(|(&(_, hd), f)| (hd == v).then_some(f))
            .sum()
    }

    pub fn outflow(&self, commodity: usize, v: usize) -> f64 {
        self.arcs
            .iter()
            .zip(&self.flows[commodity])
            .filter_map(|(&(tl, _), f)| (tl == v).then_some(f))
            .sum()
    }

    pub fn delivered(&self, commodity: usize) -> f64 {
        let t = self.pairs[commodity].1;
        self.inflow(commodity, t) - self.outflow(commodity, t)
    }

    /// One line per positive arc flow: `commodity,u,v,flow`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("commodity,u,v,flow\n");
        for (i, row) in self.flows.iter().enumerate() {
            for (&(u, v), &f) in self.arcs.iter().zip(row) {
                if f > 1e-12 {
                    out.push_str(&format!("{i},{u},{v},{f}\n"));
                }
            }
        }
        out
    }
}

struct ArcModel {
    arcs: Vec<(usize, usize)>,
    /// Arcs drawing on each edge's capacity.
    groups: Vec<Vec<usize>>,
}

impl ArcModel {
    fn new(net: &Network) -> Self {
        let mut arcs = Vec::new();
        let mut groups = Vec::with_capacity(net.edges().len());
        for e in net.edges() {
            if net.is_directed() {
                groups.push(vec![arcs.len()]);
                arcs.push((e.u, e.v));
            } else {
                groups.push(vec![arcs.len(), arcs.len() + 1]);
                arcs.push((e.u, e.v));
                arcs.push((e.v, e.u));
            }
        }
        ArcModel { arcs, groups }
    }
}

/// Solves max r with conservation, shared capacities, nonnegativity, and
/// delivery of at least r per commodity, then cancels antiparallel flow so
/// no commodity uses both orientations between two vertices.
pub fn flow_rate(net: &Network) -> Result<FlowSolution, FlowError> {
    let model = ArcModel::new(net);
    let n_arcs = model.arcs.len();
    let k = net.pairs().len();
    let n_vars = k * n_arcs + 1;
    let r_var = k * n_arcs;
    let var = |i: usize, a: usize| i * n_arcs + a;

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (e, edge) in net.edges().iter().enumerate() {
        let mut row = vec![0.0; n_vars];
        for i in 0..k {
            for &a in &model.groups[e] {
                row[var(i, a)] = 1.0;
            }
        }
        rows.push((row, edge.cap));
    }
    for (i, &(s, t)) in net.pairs().iter().enumerate() {
        for v in 0..net.n_vertices() {
            if v == s || v == t {
                continue;
            }
            let mut row = vec![0.0; n_vars];
            let mut touched = false;
            for (a, &(tl, hd)) in model.arcs.iter().enumerate() {
                if hd == v {
                    row[var(i, a)] += 1.0;
                    touched = true;
                }
                if tl == v {
                    row[var(i, a)] -= 1.0;
                    touched = true;
                }
            }
            if !touched {
                continue;
            }
            let negated: Vec<f64> = row.iter().map(|x| -x).collect();
            rows.push((row, 0.0));
            rows.push((negated, 0.0));
        }
        let mut row = vec![0.0; n_vars];
        row[r_var] = 1.0;
        for (a, &(tl, hd)) in model.arcs.iter().enumerate() {
            if hd == t {
                row[var(i, a)] -= 1.0;
            }
            if tl == t {
                row[var(i, a)] += 1.0;
            }
        }
        rows.push((row, 0.0));
    }
    let mut objective = vec![0.0; n_vars];
    objective[r_var] = 1.0;

    let sol = simplex_max(&objective, &rows)?;
    let slackness = complementary_slackness(&rows, &sol);
    let rate = sol.x[r_var];
    // The tableau maintains the objective cell incrementally; it must agree
    // with the extracted rate variable, or a pivot corrupted the basis.
    debug_assert!((sol.objective - rate).abs() <= 1e-9 * rate.abs().max(1.0));
    let mut flows: Vec<Vec<f64>> =
        (0..k).map(|i| sol.x[var(i, 0)..var(i, 0) + n_arcs].to_vec()).collect();
    cancel_antiparallel(&model.arcs, &mut flows);
    let max_violation = worst_residual(net, &model, &flows, rate);
    Ok(FlowSolution {
        rate,
        arcs: model.arcs,
        flows,
        pairs: net.pairs().to_vec(),
        iterations: sol.iterations,
        max_violation,
        complementary_slackness: slackness,
    })
}

fn complementary_slackness(rows: &[(Vec<f64>, f64)], sol: &simplex::SimplexResult) -> f64 {
    let mut worst = 0.0f64;
    for (j, &xj) in sol.x.iter().enumerate() {
        worst = worst.max((xj * sol.reduced_costs[j]).abs());
    }
    for ((a, b), &y) in rows.iter().zip(&sol.duals) {
        let lhs: f64 = a.iter().zip(&sol.x).map(|(h, x)| h * x).sum();
        worst = worst.max(((b - lhs) * y).abs());
    }
    worst
}

/// Makes min(f(u,v), f(v,u)) = 0 per commodity while preserving net flow
/// through every vertex, so conservation and delivery are untouched.
fn cancel_antiparallel(arcs: &[(usize, usize)], flows: &mut [Vec<f64>]) {
    let mut dirs: HashMap<(usize, usize), (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (a, &(u, v)) in arcs.iter().enumerate() {
        let entry = dirs.entry((u.min(v), u.max(v))).or_default();
        if u < v {
            entry.0.push(a);
        } else {
            entry.1.push(a);
        }
    }
    for (fwd, bwd) in dirs.values() {
        if fwd.is_empty() || bwd.is_empty() {
            continue;
        }
        for row in flows.iter_mut() {
            let f: f64 = fwd.iter().map(|&a| row[a]).sum();
            let b: f64 = bwd.iter().map(|&a| row[a]).sum();
            let cancel = f.min(b);
            if cancel <= 0.0 {
                continue;
            }
            for side in [fwd, bwd] {
                let mut left = cancel;
                for &a in side {
                    let d = left.min(row[a]);
                    row[a] -= d;
                    left -= d;
                    if left <= 0.0 {
                        break;
                    }
                }
            }
        }
    }
}

fn worst_residual(net: &Network, model: &ArcModel, flows: &[Vec<f64>], rate: f64) -> f64 {
    let mut worst = 0.0f64;
    for row in flows {
        for &f in row {
            worst = worst.max(-f);
        }
    }
    for (e, edge) in net.edges().iter().enumerate() {
        let used: f64 = flows
            .iter()
            .map(|row| model.groups[e].iter().map(|&a| row[a]).sum::<f64>())
            .sum();
        worst = worst.max(used - edge.cap);
    }
    for (i, &(s, t)) in net.pairs().iter().enumerate() {
        for v in 0..net.n_vertices() {
            if v == s || v == t {
                continue;
            }
            let mut net_in = 0.0;
            for (a, &(tl, hd)) in model.arcs.iter().enumerate() {
                if hd == v {
                    net_in += flows[i][a];
                }
                if tl == v {
                    net_in -= flows[i][a];
                }
            }
            worst = worst.max(net_in.abs());
        }
        let mut delivered = 0.0;
        for (a, &(tl, hd)) in model.arcs.iter().enumerate() {
            if hd == t {
                delivered += flows[i][a];
            }
            if tl == t {
                delivered -= flows[i][a];
            }
        }
        worst = worst.max(rate - delivered);
    }
    worst
}

/// Independent check on `flow_rate`: the same objective over explicit
/// simple-path variables instead of arc flows. Only practical on networks
/// with few paths.
pub fn flow_rate_by_paths(net: &Network) -> Result<f64, FlowError> {
    let model = ArcModel::new(net);
    let mut arc_edge = vec![0usize; model.arcs.len()];
    for (e, group) in model.groups.iter().enumerate() {
        for &a in group {
            arc_edge[a] = e;
        }
    }
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); net.n_vertices()];
    for (a, &(tl, _)) in model.arcs.iter().enumerate() {
        out_arcs[tl].push(a);
    }

    // paths[i] lists the edge sets of all simple s_i -> t_i paths.
    let mut paths: Vec<Vec<Vec<usize>>> = Vec::new();
    for &(s, t) in net.pairs() {
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut on_path = vec![false; net.n_vertices()];
        on_path[s] = true;
        let mut trail: Vec<usize> = Vec::new();
        // Iterative DFS: (vertex, next out-arc position to try).
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if v == t {
                found.push(trail.iter().map(|&a| arc_edge[a]).collect());
                if found.len() > PATH_LIMIT {
                    return Err(FlowError::PathLimitExceeded { limit: PATH_LIMIT });
                }
                stack.pop();
                on_path[v] = false;
                trail.pop();
                continue;
            }
            if top.1 < out_arcs[v].len() {
                let a = out_arcs[v][top.1];
                top.1 += 1;
                let head = model.arcs[a].1;
                if !on_path[head] {
                    on_path[head] = true;
                    trail.push(a);
                    stack.push((head, 0));
                }
            } else {
                stack.pop();
                on_path[v] = false;
                trail.pop();
            }
        }
        paths.push(found);
    }

    let total_paths: usize = paths.iter().map(|p| p.len()).sum();
    let n_vars = total_paths + 1;
    let r_var = total_paths;
    let offsets: Vec<usize> = paths
        .iter()
        .scan(0, |acc, p| {
            let v = *acc;
            *acc += p.len();
            Some(v)
        })
        .collect();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (e, edge) in net.edges().iter().enumerate() {
        let mut row = vec![0.0; n_vars];
        for (i, per) in paths.iter().enumerate() {
            for (p, edges) in per.iter().enumerate() {
                if edges.contains(&e) {
                    row[offsets[i] + p] = 1.0;
                }
            }
        }
        rows.push((row, edge.cap));
    }
    for (i, per) in paths.iter().enumerate() {
        let mut row = vec![0.0; n_vars];
        row[r_var] = 1.0;
        for p in 0..per.len() {
            row[offsets[i] + p] = -1.0;
        }
        rows.push((row, 0.0));
    }
    let mut objective = vec![0.0; n_vars];
    objective[r_var] = 1.0;
    Ok(simplex_max(&objective, &rows)?.x[r_var])
}

/// Forgets edge directions; parallel and antiparallel edges between the
/// same endpoints merge by capacity summation. Pairs are unchanged.
pub fn undirect(net: &Network) -> Network {
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in net.edges() {
        *merged.entry((e.u.min(e.v), e.u.max(e.v))).or_insert(0.0) += e.cap;
    }
    let edges = merged
        .into_iter()
        .map(|((u, v), cap)| crate::coding::Edge { u, v, cap })
        .collect();
    Network::new(false, net.n_vertices(), edges, net.pairs().to_vec())
        .expect("undirecting a valid network preserves validity")
}

const GAP_TOL: f64 = 1e-6;

/// Flow rates on both versions of the network next to an achieved coding
/// rate. A directed gap (coding beats flow) is normal; an undirected gap
/// would be a counterexample to the flow-equals-coding conjecture.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub directed_flow_rate: f64,
    pub undirected_flow_rate: f64,
    pub coding_rate_bits: f64,
    pub coding_over_directed: f64,
    pub coding_over_undirected: f64,
    pub directed_gap: bool,
    pub undirected_counterexample: bool,
}

pub fn ncc_gap_report(net: &Network, coding_rate_bits: f64) -> Result<GapReport, FlowError> {
    let base = flow_rate(net)?.rate;
    let undirected = if net.is_directed() { flow_rate(&undirect(net))?.rate } else { base };
    Ok(GapReport {
        directed_flow_rate: base,
        undirected_flow_rate: undirected,
        coding_rate_bits,
        coding_over_directed: coding_rate_bits / base,
        coding_over_undirected: coding_rate_bits / undirected,
        directed_gap: coding_rate_bits > base + GAP_TOL,
        undirected_counterexample: coding_rate_bits > undirected + GAP_TOL,
    })
}

/// Edge-density inequality for networks whose pairs are mostly far apart:
/// with excess delta' = (delta - 5/6)/10, demands |E|/k >= delta' * d.
/// Vacuous unless delta > 5/6.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub delta: f64,
    pub delta_prime: f64,
    pub distance: usize,
    pub pairs: usize,
    pub edges: usize,
    pub edges_per_pair: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub holds: Option<bool>,
}

pub fn pair_density_check(edges: usize, pairs: usize, delta: f64, distance: usize) -> DensityReport {
    let delta_prime = (delta - 5.0 / 6.0) / 10.0;
    let edges_per_pair = edges as f64 / pairs as f64;
    let bound = delta_prime * distance as f64;
    let vacuous = delta <= 5.0 / 6.0;
    DensityReport {
        delta,
        delta_prime,
        distance,
        pairs,
        edges,
        edges_per_pair,
        bound,
        vacuous,
        holds: if vacuous { None } else { Some(edges_per_pair + 1e-12 >= bound) },
    }
}

/// Parses the line-oriented network text format. The header declares the
/// counts; a mismatch with the actual record lines is reported against the
/// header line.
pub fn parse_network_file(text: &str) -> Result<Network, FlowError> {
    let mut header: Option<(bool, usize, usize, usize)> = None;
    let mut header_line = 1;
    let mut edges = Vec::new();
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let bad = |detail: String| FlowError::MalformedFile { line, detail };
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if header.is_none() {
            if fields.len() != 5 || fields[0] != "network" {
                return Err(bad(
                    "expected header: network <directed|undirected> <#vertices> <#edges> <#pairs>"
                        .into(),
                ));
            }
            let directed = match fields[1] {
                "directed" => true,
                "undirected" => false,
                other => return Err(bad(format!("orientation must be directed or undirected, got {other}"))),
            };
            let counts: Result<Vec<usize>, _> = fields[2..].iter().map(|f| f.parse()).collect();
            let counts = counts.map_err(|_| bad("counts must be nonnegative integers".into()))?;
            header = Some((directed, counts[0], counts[1], counts[2]));
            header_line = line;
            continue;
        }
        match fields[0] {
            "e" if fields.len() == 4 => {
                let u = fields[1].parse().map_err(|_| bad("bad tail vertex".into()))?;
                let v = fields[2].parse().map_err(|_| bad("bad head vertex".into()))?;
                let cap: f64 =
                    fields[3].parse().map_err(|_| bad("bad capacity".into()))?;
                edges.push(crate::coding::Edge { u, v, cap });
            }
            "e" => return Err(bad("expected: e <u> <v> <capacity>".into())),
            "p" if fields.len() == 3 => {
                let s = fields[1].parse().map_err(|_| bad("bad source vertex".into()))?;
                let t = fields[2].parse().map_err(|_| bad("bad target vertex".into()))?;
                pairs.push((s, t));
            }
            "p" => return Err(bad("expected: p <source> <target>".into())),
            other => return Err(bad(format!("unknown record kind {other}"))),
        }
    }
    let (directed, n_vertices, n_edges, n_pairs) = header.ok_or(FlowError::MalformedFile {
        line: 1,
        detail: "file has no header line".into(),
    })?;
    let count = |what: &str, declared: usize, got: usize| FlowError::MalformedFile {
        line: header_line,
        detail: format!("header declares {declared} {what}, file has {got}"),
    };
    if edges.len() != n_edges {
        return Err(count("edges", n_edges, edges.len()));
    }
    if pairs.len() != n_pairs {
        return Err(count("pairs", n_pairs, pairs.len()));
    }
    Network::new(directed, n_vertices, edges, pairs)
        .map_err(|e| FlowError::MalformedFile { line: header_line, detail: e.to_string() })
}

/// Inverse of [`parse_network_file`]; floats print in shortest round-trip
/// form, so parse(render(net)) == net exactly.
pub fn render_network_file(net: &Network) -> String {
    let orientation = if net.is_directed() { "directed" } else { "undirected" };
    let mut out = format!(
        "network {orientation} {} {} {}\n",
        net.n_vertices(),
        net.edges().len(),
        net.pairs().len()
    );
    for e in net.edges() {
        out.push_str(&format!("e {} {} {:?}\n", e.u, e.v, e.cap));
    }
    for &(s, t) in net.pairs() {
        out.push_str(&format!("p {s} {t}\n"));
    }
    out
}
