//! Capacitated networks and coding schemes: the three-step execution
//! (sources emit, relays transform, targets decode), correctness and
//! entropy audits, and pair-distance measurement.
//!
//! Networks are immutable after construction. Execution is defined for
//! directed acyclic networks; undirected networks exist for flow-rate
//! computation and distance measurement only.

pub mod correction;
pub mod search;
pub mod supervisor;

use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("network has a directed cycle")]
    CyclicNetwork,
    #[error("operation requires a directed network")]
    NotDirected,
    #[error("invalid network: {detail}")]
    InvalidNetwork { detail: String },
    #[error("network file line {line}: {detail}")]
    BadNetworkFile { line: usize, detail: String },
    #[error("edge {edge} encoder expects {expected} inputs, got {got}")]
    ArityMismatch { edge: usize, expected: usize, got: usize },
    #[error("decoder {pair} expects {expected} inputs, got {got}")]
    DecoderArityMismatch { pair: usize, expected: usize, got: usize },
    #[error("message {value} for commodity {pair} outside space of size {size}")]
    MessageOutOfRange { pair: usize, value: u64, size: u64 },
    #[error("edge {edge} produced symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { edge: usize, symbol: u64, size: u64 },
    #[error("expected {expected} messages, got {got}")]
    WrongInputCount { expected: usize, got: usize },
    #[error("scheme does not fit this network: {detail}")]
    SchemeShape { detail: String },
    #[error("empty codebook")]
    EmptyCodebook,
    #[error("block {block} does not fit in {m} bits")]
    BlockOutOfRange { block: u64, m: usize },
    #[error("malformed scheme message: {detail}")]
    MalformedMessage { detail: String },
    #[error("search space of {tables} function tables exceeds limit {limit}")]
    SearchSpaceTooLarge { tables: u128, limit: u128 },
    #[error("alphabets above 2 bits are not searchable (requested {bits})")]
    AlphabetTooLarge { bits: u32 },
    #[error("witness table dump of {entries} entries exceeds limit {limit}")]
    TableDumpTooLarge { entries: u128, limit: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cap: f64,
}

/// A capacitated graph with source-target pairs. Directed edges point u -> v;
/// undirected edges keep the (u, v) orientation they were written with.
#[derive(Debug, Clone)]
pub struct Network {
    directed: bool,
    n_vertices: usize,
    edges: Vec<Edge>,
    pairs: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed
            && self.n_vertices == other.n_vertices
            && self.edges == other.edges
            && self.pairs == other.pairs
    }
}

impl Network {
    pub fn new(
        directed: bool,
        n_vertices: usize,
        edges: Vec<Edge>,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Self, CodingError> {
        let bad = |detail: String| Err(CodingError::InvalidNetwork { detail });
        if n_vertices == 0 {
            return bad("no vertices".into());
        }
        if pairs.is_empty() {
            return bad("at least one source-target pair is required".into());
        }
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= n_vertices || e.v >= n_vertices {
                return bad(format!("edge {idx} endpoint out of range"));
            }
            if e.u == e.v {
                return bad(format!("edge {idx} is a self-loop at {}", e.u));
            }
            if !(e.cap.is_finite() && e.cap > 0.0) {
                return bad(format!("edge {idx} capacity must be positive, got {}", e.cap));
            }
        }
        for (i, &(s, t)) in pairs.iter().enumerate() {
            if s >= n_vertices || t >= n_vertices {
                return bad(format!("pair {i} endpoint out of range"));
            }
            if s == t {
                return bad(format!("pair {i} has source equal to target"));
            }
        }
        let mut out_adj = vec![Vec::new(); n_vertices];
        let mut in_adj = vec![Vec::new(); n_vertices];
        for (idx, e) in edges.iter().enumerate() {
            out_adj[e.u].push(idx);
            in_adj[e.v].push(idx);
        }
        Ok(Self { directed, n_vertices, edges, pairs, out_adj, in_adj })
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Edge indices with tail v (as-written orientation for undirected).
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    /// Kahn's algorithm, smallest vertex first for determinism.
    pub fn topological_order(&self) -> Result<Vec<usize>, CodingError> {
        if !self.directed {
            return Err(CodingError::NotDirected);
        }
        let mut indeg: Vec<usize> = (0..self.n_vertices).map(|v| self.in_adj[v].len()).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..self.n_vertices).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n_vertices);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for &e in &self.out_adj[v] {
                let w = self.edges[e].v;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() != self.n_vertices {
            return Err(CodingError::CyclicNetwork);
        }
        Ok(order)
    }

    /// Line-oriented text format:
    /// `network <directed|undirected> <#vertices> <#edges> <#pairs>`,
    /// then `e <u> <v> <capacity>` and `p <s> <t>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CodingError> {
        let fail = |line: usize, detail: String| Err(CodingError::BadNetworkFile { line, detail });
        let mut header: Option<(usize, bool, usize, usize, usize)> = None;
        let mut edges = Vec::new();
        let mut pairs = Vec::new();
        let mut edge_lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            match (header.is_some(), tok[0]) {
                (false, "network") => {
                    if tok.len() != 5 {
                        return fail(lineno, "header needs: network <dir> <#v> <#e> <#p>".into());
                    }
                    let directed = match tok[1] {
                        "directed" => true,
                        "undirected" => false,
                        other => return fail(lineno, format!("unknown orientation {other:?}")),
                    };
                    let nums: Result<Vec<usize>, _> = tok[2..].iter().map(|s| s.parse()).collect();
                    match nums {
                        Ok(v) => header = Some((lineno, directed, v[0], v[1], v[2])),
                        Err(_) => return fail(lineno, "header counts must be integers".into()),
                    }
                }
                (false, _) => return fail(lineno, "expected the network header first".into()),
                (true, "e") => {
                    if tok.len() != 4 {
                        return fail(lineno, "edge line needs: e <u> <v> <capacity>".into());
                    }
                    let (u, v) = match (tok[1].parse(), tok[2].parse()) {
                        (Ok(u), Ok(v)) => (u, v),
                        _ => return fail(lineno, "edge endpoints must be integers".into()),
                    };
                    let cap: f64 = match tok[3].parse() {
                        Ok(c) => c,
                        Err(_) => return fail(lineno, "capacity must be a decimal number".into()),
                    };
                    edges.push(Edge { u, v, cap });
                    edge_lines.push(lineno);
                }
                (true, "p") => {
                    if tok.len() != 3 {
                        return fail(lineno, "pair line needs: p <s> <t>".into());
                    }
                    match (tok[1].parse(), tok[2].parse()) {
                        (Ok(s), Ok(t)) => pairs.push((s, t)),
                        _ => return fail(lineno, "pair endpoints must be integers".into()),
                    }
                }
                (true, other) => return fail(lineno, format!("unknown line tag {other:?}")),
            }
        }
        let Some((hline, directed, nv, ne, np)) = header else {
            return fail(0, "missing network header".into());
        };
        if edges.len() != ne {
            return fail(hline, format!("header declares {ne} edges, found {}", edges.len()));
        }
        if pairs.len() != np {
            return fail(hline, format!("header declares {np} pairs, found {}", pairs.len()));
        }
        Network::new(directed, nv, edges, pairs).map_err(|e| match e {
            CodingError::InvalidNetwork { detail } => {
                CodingError::BadNetworkFile { line: hline, detail }
            }
            other => other,
        })
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "network {} {} {} {}\n",
            if self.directed { "directed" } else { "undirected" },
            self.n_vertices,
            self.edges.len(),
            self.pairs.len()
        ));
        for e in &self.edges {
            out.push_str(&format!("e {} {} {}\n", e.u, e.v, e.cap));
        }
        for &(s, t) in &self.pairs {
            out.push_str(&format!("p {s} {t}\n"));
        }
        out
    }
}

/// One encoder or decoder: a function of a fixed number of symbols.
pub struct SchemeFn {
    arity: usize,
    func: Box<dyn Fn(&[u64]) -> u64>,
}

impl SchemeFn {
    pub fn new(arity: usize, func: impl Fn(&[u64]) -> u64 + 'static) -> Self {
        Self { arity, func: Box::new(func) }
    }

    /// A lookup table in row-major mixed-radix order over `dims`.
    pub fn from_table(dims: Vec<u64>, table: Vec<u64>) -> Self {
        let arity = dims.len();
        Self::new(arity, move |ins| {
            let mut idx = 0u64;
            for (d, &x) in dims.iter().zip(ins) {
                idx = idx * d + x;
            }
            table[idx as usize]
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn apply(&self, inputs: &[u64]) -> u64 {
        (self.func)(inputs)
    }
}

impl std::fmt::Debug for SchemeFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SchemeFn(arity={})", self.arity)
    }
}

/// Message spaces, edge alphabets, one encoder per edge, one decoder per
/// pair. Symbols are integers below the declared alphabet size.
///
/// Encoder input convention for an edge with tail v: first the messages of
/// the pairs whose source is v (in pair order), then the symbols on v's
/// in-edges (in edge-index order). Decoder input for pair i: the symbols on
/// t_i's in-edges, in edge-index order.
pub struct CodingScheme {
    pub name: String,
    pub message_sizes: Vec<u64>,
    pub edge_alphabets: Vec<u64>,
    pub encoders: Vec<SchemeFn>,
    pub decoders: Vec<SchemeFn>,
}

impl std::fmt::Debug for CodingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CodingScheme")
            .field("name", &self.name)
            .field("message_sizes", &self.message_sizes)
            .field("edge_alphabets", &self.edge_alphabets)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub edge_messages: Vec<u64>,
    pub outputs: Vec<u64>,
}

fn check_scheme_shape(net: &Network, scheme: &CodingScheme) -> Result<(), CodingError> {
    let shape = |detail: String| Err(CodingError::SchemeShape { detail });
    if scheme.encoders.len() != net.edges.len() || scheme.edge_alphabets.len() != net.edges.len() {
        return shape(format!(
            "{} encoders / {} alphabets for {} edges",
            scheme.encoders.len(),
            scheme.edge_alphabets.len(),
            net.edges.len()
        ));
    }
    if scheme.decoders.len() != net.pairs.len() || scheme.message_sizes.len() != net.pairs.len() {
        return shape(format!(
            "{} decoders / {} message spaces for {} pairs",
            scheme.decoders.len(),
            scheme.message_sizes.len(),
            net.pairs.len()
        ));
    }
    Ok(())
}

/// Sends one input tuple through the scheme: sources emit, relays transform
/// in topological order, targets decode.
pub fn execute_scheme(
    net: &Network,
    scheme: &CodingScheme,
    inputs: &[u64],
) -> Result<Transcript, CodingError> {
    check_scheme_shape(net, scheme)?;
    if inputs.len() != net.pairs.len() {
        return Err(CodingError::WrongInputCount { expected: net.pairs.len(), got: inputs.len() });
    }
    for (i, &w) in inputs.iter().enumerate() {
        if w >= scheme.message_sizes[i] {
            return Err(CodingError::MessageOutOfRange {
                pair: i,
                value: w,
                size: scheme.message_sizes[i],
            });
        }
    }
    let order = net.topological_order()?;
    let mut messages: Vec<Option<u64>> = vec![None; net.edges.len()];
    let mut ins: Vec<u64> = Vec::new();
    for &v in &order {
        if net.out_adj[v].is_empty() {
            continue;
        }
        ins.clear();
        for (i, &(s, _)) in net.pairs.iter().enumerate() {
            if s == v {
                ins.push(inputs[i]);
            }
        }
        for &e in &net.in_adj[v] {
            ins.push(messages[e].expect("in-edge computed by topological order"));
        }
        for &e in &net.out_adj[v] {
            let enc = &scheme.encoders[e];
            if enc.arity() != ins.len() {
                return Err(CodingError::ArityMismatch {
                    edge: e,
                    expected: enc.arity(),
                    got: ins.len(),
                });
            }
            let sym = enc.apply(&ins);
            if sym >= scheme.edge_alphabets[e] {
                return Err(CodingError::SymbolOutOfRange {
                    edge: e,
                    symbol: sym,
                    size: scheme.edge_alphabets[e],
                });
            }
            messages[e] = Some(sym);
        }
    }
    let edge_messages: Vec<u64> =
        messages.into_iter().map(|m| m.expect("every tail appears in the order")).collect();
    let mut outputs = Vec::with_capacity(net.pairs.len());
    for (i, &(_, t)) in net.pairs.iter().enumerate() {
        let dec_ins: Vec<u64> = net.in_adj[t].iter().map(|&e| edge_messages[e]).collect();
        let dec = &scheme.decoders[i];
        if dec.arity() != dec_ins.len() {
            return Err(CodingError::DecoderArityMismatch {
                pair: i,
                expected: dec.arity(),
                got: dec_ins.len(),
            });
        }
        outputs.push(dec.apply(&dec_ins));
    }
    Ok(Transcript { edge_messages, outputs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeAudit {
    pub correct: usize,
    pub tested: usize,
    /// Size of the full message-tuple space, regardless of how many tuples
    /// were tested.
    pub total_inputs: u128,
    pub edge_entropy_bits: Vec<f64>,
    /// Empirical H(M_e) <= c(e) on every edge (1e-9 slack).
    pub capacity_respected: bool,
    /// Stricter: log2 |Sigma_e| <= c(e) on every edge.
    pub strict_alphabet_fits: bool,
}

impl SchemeAudit {
    /// Whether the correct-count clears 2^((1 - epsilon) * r * k).
    pub fn meets_rate_threshold(&self, epsilon: f64, r_bits: f64, k: usize) -> bool {
        self.correct as f64 + 1e-9 >= ((1.0 - epsilon) * r_bits * k as f64).exp2()
    }
}

/// Runs every tuple in `input_set`, counting exact decodes and tallying
/// per-edge message frequencies for the empirical entropy (uniform weight on
/// the given set).
pub fn audit_scheme(
    net: &Network,
    scheme: &CodingScheme,
    input_set: &[Vec<u64>],
) -> Result<SchemeAudit, CodingError> {
    check_scheme_shape(net, scheme)?;
    let mut correct = 0usize;
    let mut tallies: Vec<HashMap<u64, usize>> = vec![HashMap::new(); net.edges.len()];
    for tuple in input_set {
        let tr = execute_scheme(net, scheme, tuple)?;
        if tr.outputs == *tuple {
            correct += 1;
        }
        for (e, &m) in tr.edge_messages.iter().enumerate() {
            *tallies[e].entry(m).or_insert(0) += 1;
        }
    }
    let n = input_set.len() as f64;
    let edge_entropy_bits: Vec<f64> = tallies
        .iter()
        .map(|t| {
            if t.is_empty() {
                return 0.0;
            }
            t.values().map(|&c| -(c as f64 / n) * (c as f64 / n).log2()).sum()
        })
        .collect();
    let capacity_respected = edge_entropy_bits
        .iter()
        .zip(&net.edges)
        .all(|(&h, e)| h <= e.cap + 1e-9);
    let strict_alphabet_fits = scheme
        .edge_alphabets
        .iter()
        .zip(&net.edges)
        .all(|(&a, e)| (a as f64).log2() <= e.cap + 1e-9);
    let total_inputs = scheme
        .message_sizes
        .iter()
        .fold(1u128, |acc, &s| acc.saturating_mul(s as u128));
    Ok(SchemeAudit {
        correct,
        tested: input_set.len(),
        total_inputs,
        edge_entropy_bits,
        capacity_respected,
        strict_alphabet_fits,
    })
}

/// Fraction of pairs at undirected distance >= d (unreachable counts), and
/// whether that fraction clears 5/6, the threshold that makes the edge-count
/// bound non-vacuous.
pub fn is_delta_d_long(net: &Network, d: usize) -> (bool, f64) {
    let mut adj = vec![Vec::new(); net.n_vertices];
    for e in &net.edges {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut long_pairs = 0usize;
    for &(s, t) in &net.pairs {
        let mut dist = vec![usize::MAX; net.n_vertices];
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if dist[t] >= d {
            long_pairs += 1;
        }
    }
    let delta = long_pairs as f64 / net.pairs.len() as f64;
    (delta > 5.0 / 6.0, delta)
}

const TABLE_DUMP_LIMIT: u128 = 1 << 16;

/// Serializes a scheme as explicit tables: one line per (tail vertex,
/// out-edge, input tuple), plus decoder lines. Only usable when every
/// function's input space is small.
pub fn scheme_table_text(net: &Network, scheme: &CodingScheme) -> Result<String, CodingError> {
    check_scheme_shape(net, scheme)?;
    let mut out = String::new();
    out.push_str(&format!(
        "scheme {} edges={} pairs={}\n",
        scheme.name,
        net.edges.len(),
        net.pairs.len()
    ));
    let dims_for_vertex = |v: usize| -> Vec<u64> {
        let mut dims = Vec::new();
        for (i, &(s, _)) in net.pairs.iter().enumerate() {
            if s == v {
                dims.push(scheme.message_sizes[i]);
            }
        }
        for &e in net.in_edges(v) {
            dims.push(scheme.edge_alphabets[e]);
        }
        dims
    };
    let mut emit = |label: String, dims: &[u64], f: &SchemeFn| -> Result<(), CodingError> {
        let entries: u128 = dims.iter().fold(1u128, |a, &d| a.saturating_mul(d as u128));
        if entries > TABLE_DUMP_LIMIT {
            return Err(CodingError::TableDumpTooLarge { entries, limit: TABLE_DUMP_LIMIT });
        }
        let mut tuple = vec![0u64; dims.len()];
        loop {
            let csv = if tuple.is_empty() {
                "-".to_string()
            } else {
                tuple.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            };
            out.push_str(&format!("{label} {csv} -> {}\n", f.apply(&tuple)));
            let mut pos = dims.len();
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < dims[pos] {
                    break;
                }
                tuple[pos] = 0;
            }
        }
    };
    for (e, edge) in net.edges.iter().enumerate() {
        let dims = dims_for_vertex(edge.u);
        emit(format!("enc {} {} {}", e, edge.u, edge.v), &dims, &scheme.encoders[e])?;
    }
    for (i, &(_, t)) in net.pairs.iter().enumerate() {
        let dims: Vec<u64> = net.in_edges(t).iter().map(|&e| scheme.edge_alphabets[e]).collect();
        emit(format!("dec {i} {t}"), &dims, &scheme.decoders[i])?;
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn parse_round_trip() {
        let net = butterfly();
        let text = net.to_file_string();
        assert!(text.starts_with("network directed 6 7 2\n"));
        let back = Network::parse(&text).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn parse_accepts_comments_and_blanks() {
        let text = "# tiny path\n\nnetwork directed 2 1 1\ne 0 1 2.5\n# done\np 0 1\n";
        let net = Network::parse(text).unwrap();
        assert_eq!(net.edges()[0].cap, 2.5);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        let cases: &[(&str, usize)] = &[
            ("network sideways 2 1 1\ne 0 1 1\np 0 1\n", 1),
            ("e 0 1 1\n", 1),
            ("network directed 2 2 1\ne 0 1 1\np 0 1\n", 1),
            ("network directed 2 1 1\ne 0 1 nope\np 0 1\n", 2),
            ("network directed 2 1 1\ne 0 1 1\nq 0 1\n", 3),
            ("network directed 2 1 1\ne 0 1 -3\np 0 1\n", 1),
            ("network directed 2 1 1\ne 0 5 1\np 0 1\n", 1),
            ("network directed 2 1 1\ne 0 1 1\np 1 1\n", 1),
            ("network directed 2 1 0\ne 0 1 1\n", 1),
        ];
        for (text, want_line) in cases {
            match Network::parse(text) {
                Err(CodingError::BadNetworkFile { line, .. }) => {
                    assert_eq!(line, *want_line, "wrong line for {text:?}")
                }
                other => panic!("expected parse failure for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn topological_order_rejects_cycles() {
        let net = Network::new(
            true,
            3,
            vec![
                Edge { u: 0, v: 1, cap: 1.0 },
                Edge { u: 1, v: 2, cap: 1.0 },
                Edge { u: 2, v: 0, cap: 1.0 },
            ],
            vec![(0, 2)],
        )
        .unwrap();
        assert_eq!(net.topological_order(), Err(CodingError::CyclicNetwork));
        let scheme = CodingScheme {
            name: "x".into(),
            message_sizes: vec![2],
            edge_alphabets: vec![2; 3],
            encoders: vec![
                SchemeFn::new(1, |w| w[0]),
                SchemeFn::new(1, |m| m[0]),
                SchemeFn::new(1, |m| m[0]),
            ],
            decoders: vec![SchemeFn::new(1, |m| m[0])],
        };
        assert_eq!(execute_scheme(&net, &scheme, &[1]), Err(CodingError::CyclicNetwork));
    }

    #[test]
    fn forwarding_path_decodes_everything() {
        let net = path3(2.0);
        let scheme = forwarding_scheme(2);
        for w in 0..4u64 {
            let tr = execute_scheme(&net, &scheme, &[w]).unwrap();
            assert_eq!(tr.outputs, vec![w]);
            assert_eq!(tr.edge_messages, vec![w, w]);
        }
        let audit = audit_scheme(&net, &scheme, &all_tuples(&[4])).unwrap();
        assert_eq!(audit.correct, 4);
        assert_eq!(audit.total_inputs, 4);
        assert!((audit.edge_entropy_bits[0] - 2.0).abs() < 1e-12);
        assert!((audit.edge_entropy_bits[1] - 2.0).abs() < 1e-12);
        assert!(audit.capacity_respected);
        assert!(audit.strict_alphabet_fits);
        assert!(audit.meets_rate_threshold(0.0, 2.0, 1));
    }

    #[test]
    fn butterfly_xor_decodes_all_four() {
        let net = butterfly();
        let scheme = butterfly_xor_scheme();
        let audit = audit_scheme(&net, &scheme, &all_tuples(&[2, 2])).unwrap();
        assert_eq!(audit.correct, 4);
        for h in &audit.edge_entropy_bits {
            assert!((h - 1.0).abs() < 1e-12, "expected 1 bit, got {h}");
        }
        assert!(audit.capacity_respected);
        assert!(audit.meets_rate_threshold(0.0, 1.0, 2));
    }

    #[test]
    fn messages_depend_only_on_ancestor_inputs() {
        // Perturbing w2 must not change the s1-rooted edges (s1,m), (s1,t2).
        let net = butterfly();
        let scheme = butterfly_xor_scheme();
        for w1 in 0..2u64 {
            let a = execute_scheme(&net, &scheme, &[w1, 0]).unwrap();
            let b = execute_scheme(&net, &scheme, &[w1, 1]).unwrap();
            assert_eq!(a.edge_messages[0], b.edge_messages[0]);
            assert_eq!(a.edge_messages[6], b.edge_messages[6]);
            assert_ne!(a.edge_messages[1], b.edge_messages[1]);
        }
    }

    #[test]
    fn execution_errors_are_specific() {
        let net = path3(1.0);
        let scheme = forwarding_scheme(1);
        assert_eq!(
            execute_scheme(&net, &scheme, &[5]),
            Err(CodingError::MessageOutOfRange { pair: 0, value: 5, size: 2 })
        );
        assert_eq!(
            execute_scheme(&net, &scheme, &[0, 1]),
            Err(CodingError::WrongInputCount { expected: 1, got: 2 })
        );
        let bad_arity = CodingScheme {
            name: "bad".into(),
            message_sizes: vec![2],
            edge_alphabets: vec![2; 2],
            encoders: vec![SchemeFn::new(3, |w| w[0]), SchemeFn::new(1, |m| m[0])],
            decoders: vec![SchemeFn::new(1, |m| m[0])],
        };
        assert_eq!(
            execute_scheme(&net, &bad_arity, &[1]),
            Err(CodingError::ArityMismatch { edge: 0, expected: 3, got: 1 })
        );
        let oversized = CodingScheme {
            name: "big".into(),
            message_sizes: vec![2],
            edge_alphabets: vec![2, 2],
            encoders: vec![SchemeFn::new(1, |w| w[0] + 7), SchemeFn::new(1, |m| m[0])],
            decoders: vec![SchemeFn::new(1, |m| m[0])],
        };
        assert_eq!(
            execute_scheme(&net, &oversized, &[1]),
            Err(CodingError::SymbolOutOfRange { edge: 0, symbol: 8, size: 2 })
        );
    }

    #[test]
    fn pair_distances() {
        // Edgeless: the only pair is unreachable, so every distance is long.
        let edgeless = Network::new(true, 2, vec![], vec![(0, 1)]).unwrap();
        let (long, delta) = is_delta_d_long(&edgeless, 100);
        assert!(long);
        assert_eq!(delta, 1.0);

        // Path of length 3: distance exactly 3.
        let path = Network::new(
            true,
            4,
            (0..3).map(|i| Edge { u: i, v: i + 1, cap: 1.0 }).collect(),
            vec![(0, 3)],
        )
        .unwrap();
        assert_eq!(is_delta_d_long(&path, 3), (true, 1.0));
        assert_eq!(is_delta_d_long(&path, 4), (false, 0.0));

        // Butterfly pairs are exactly 3 apart: the cross edges reach the
        // other pair's endpoints, not their own.
        let (long2, delta2) = is_delta_d_long(&butterfly(), 3);
        assert!(long2);
        assert_eq!(delta2, 1.0);
        assert_eq!(is_delta_d_long(&butterfly(), 4).1, 0.0);
    }

    #[test]
    fn table_dump_lists_every_tuple() {
        let net = path3(1.0);
        let scheme = forwarding_scheme(1);
        let text = scheme_table_text(&net, &scheme).unwrap();
        assert!(text.contains("enc 0 0 1 0 -> 0"));
        assert!(text.contains("enc 0 0 1 1 -> 1"));
        assert!(text.contains("enc 1 1 2 1 -> 1"));
        assert!(text.contains("dec 0 2 0 -> 0"));
        let lines = text.lines().count();
        // header + 2 entries per function, three functions.
        assert_eq!(lines, 1 + 3 * 2);
    }
}
