//! Wires a non-adaptive table structure into a three-layer directed network
//! and runs the structure twice over it: sources broadcast their values,
//! the middle layer answers first-pass queries and re-broadcasts shifted
//! results, and the last layer answers second-pass queries so that every
//! target reproduces its source's input. High-degree vertices are priced
//! out by fixing their values as shared constants, which partitions the
//! input space into buckets.

use crate::bits::BitString;
use crate::coding::{CodingError, CodingScheme, Edge, Network, SchemeFn};
use crate::ds::{
    answer, permutation_inverse, preprocess, DsError, OracleTape, PolyTableKind, SystematicDs,
};
use crate::field::{FieldError, RootOfUnity};
use crate::flow::{pair_density_check, DensityReport};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("{name} answers adaptively and cannot be wired into a network")]
    AdaptiveDsRejected { name: String },
    #[error("layer width {n} is too small for the construction; need at least 4")]
    LayerTooSmall { n: usize },
    #[error("census received no inputs")]
    EmptyInput,
    #[error("{vertex} needs tape cell {position}, which neither arrived on an edge nor is fixed")]
    MissingMessage { vertex: String, position: usize },
    #[error("input does not belong to the fixing's bucket: {detail}")]
    InconsistentInput { detail: String },
    #[error(transparent)]
    Ds(#[from] DsError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Coding(#[from] CodingError),
}

/// Three layers of n vertices each. Sources are vertices `0..n`, middles
/// `n..2n`, sinks `2n..3n`; an edge reaches v_j or u_j from every vertex
/// the structure reads when answering query j.
#[derive(Debug, Clone)]
pub struct LayeredGraph {
    n: usize,
    t: usize,
    edge_bits: usize,
    edges: Vec<(usize, usize)>,
}

impl LayeredGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Capacity of every edge, in bits.
    pub fn edge_bits(&self) -> usize {
        self.edge_bits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn source(&self, i: usize) -> usize {
        i
    }

    pub fn middle(&self, j: usize) -> usize {
        self.n + j
    }

    pub fn sink(&self, l: usize) -> usize {
        2 * self.n + l
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; 3 * self.n];
        for &(u, _) in &self.edges {
            deg[u] += 1;
        }
        deg
    }
}

/// Builds the two-pass network for a non-adaptive structure: edge
/// (s_i, v_j) and edge (v_i, u_j) whenever query j reads cell i. Every edge
/// carries `edge_bits` bits (index width for permutations, element width
/// for field tapes).
pub fn build_layered_graph(
    ds: &dyn SystematicDs,
    edge_bits: usize,
) -> Result<LayeredGraph, ReductionError> {
    let n = ds.n();
    if n < 4 {
        return Err(ReductionError::LayerTooSmall { n });
    }
    if ds.adaptive() {
        return Err(ReductionError::AdaptiveDsRejected { name: ds.name() });
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    for j in 0..n {
        let mut set = ds
            .query_set(j)
            .ok_or_else(|| ReductionError::AdaptiveDsRejected { name: ds.name() })?;
        set.sort_unstable();
        set.dedup();
        for &i in &set {
            if i >= n {
                return Err(DsError::CellOutOfRange { pos: i, len: n }.into());
            }
            first.push((i, n + j));
            second.push((n + i, 2 * n + j));
        }
    }
    first.extend(second);
    Ok(LayeredGraph { n, t: ds.t_queries(), edge_bits, edges: first })
}

/// The graph after expensive vertices are removed, plus the shift that
/// defines which sink serves which source.
#[derive(Debug, Clone)]
pub struct PrunedNetwork {
    pub graph: LayeredGraph,
    /// Vertices whose out-degree exceeded q*t; all their edges are gone and
    /// their values become part of every fixing.
    pub removed: BTreeSet<usize>,
    pub q: usize,
    pub edges_before_prune: usize,
    /// b: source s_i is paired with sink u_{(i+b) mod n}.
    pub shift: usize,
    /// d: pairs at undirected distance >= d count as long.
    pub distance: usize,
    /// Fraction of pairs that are long under the current shift.
    pub long_fraction: f64,
}

/// Removes every edge incident to a vertex of out-degree above q*t. The
/// total out-degree is at most 2tn, so at most 2n/q vertices disappear.
pub fn prune_high_degree(graph: LayeredGraph, q: usize) -> PrunedNetwork {
    let bound = q * graph.t;
    let deg = graph.out_degrees();
    let removed: BTreeSet<usize> =
        (0..3 * graph.n).filter(|&v| deg[v] > bound).collect();
    let edges_before_prune = graph.edges.len();
    let edges = graph
        .edges
        .iter()
        .filter(|(u, v)| !removed.contains(u) && !removed.contains(v))
        .copied()
        .collect();
    let graph = LayeredGraph { edges, ..graph };
    PrunedNetwork {
        graph,
        removed,
        q,
        edges_before_prune,
        shift: 0,
        distance: 1,
        long_fraction: f64::NAN,
    }
}

/// Distance threshold used by the long-pair census: half of log base q*t
/// of n, rounded up, and at least 1.
pub fn suggested_distance(n: usize, q: usize, t: usize) -> usize {
    let qt = q * t;
    if qt < 2 {
        return 1;
    }
    let raw = 0.5 * (n as f64).ln() / (qt as f64).ln();
    (raw - 1e-12).ceil().max(1.0) as usize
}

impl PrunedNetwork {
    /// Undirected source-to-sink distances; None means unreachable.
    fn sink_distances(&self) -> Vec<Vec<Option<usize>>> {
        let n = self.graph.n;
        let mut adj = vec![Vec::new(); 3 * n];
        for &(u, v) in &self.graph.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        (0..n)
            .map(|s| {
                let mut dist = vec![None; 3 * n];
                dist[s] = Some(0);
                let mut queue = VecDeque::from([s]);
                while let Some(v) = queue.pop_front() {
                    for &w in &adj[v] {
                        if dist[w].is_none() {
                            dist[w] = Some(dist[v].unwrap() + 1);
                            queue.push_back(w);
                        }
                    }
                }
                (0..n).map(|l| dist[2 * n + l]).collect()
            })
            .collect()
    }

    fn long_count(dist: &[Vec<Option<usize>>], n: usize, b: usize, d: usize) -> usize {
        (0..n).filter(|&i| dist[i][(i + b) % n].map_or(true, |x| x >= d)).count()
    }

    /// Pins the shift to b and records the resulting long-pair fraction.
    pub fn set_shift(&mut self, b: usize, d: usize) {
        let n = self.graph.n;
        let dist = self.sink_distances();
        self.shift = b % n;
        self.distance = d;
        self.long_fraction = Self::long_count(&dist, n, self.shift, d) as f64 / n as f64;
    }

    /// For every source i within distance d of its sink, some shift does
    /// better; this tries all n shifts and keeps the best (smallest b on
    /// ties).
    pub fn choose_shift(&mut self, d: usize) -> usize {
        let n = self.graph.n;
        let dist = self.sink_distances();
        let mut best = (0usize, 0usize);
        for b in 0..n {
            let count = Self::long_count(&dist, n, b, d);
            if count > best.1 {
                best = (b, count);
            }
        }
        self.shift = best.0;
        self.distance = d;
        self.long_fraction = best.1 as f64 / n as f64;
        best.0
    }

    /// Largest number of sinks any source sees within distance d.
    pub fn max_close_sinks(&self, d: usize) -> usize {
        let n = self.graph.n;
        let dist = self.sink_distances();
        (0..n)
            .map(|i| (0..n).filter(|&l| dist[i][l].is_some_and(|x| x < d)).count())
            .max()
            .unwrap_or(0)
    }

    pub fn targets(&self) -> Vec<usize> {
        let n = self.graph.n;
        (0..n).map(|i| 2 * n + (i + self.shift) % n).collect()
    }

    /// The network in shared form: capacities in bits, one pair per source.
    pub fn to_network(&self) -> Result<Network, ReductionError> {
        let n = self.graph.n;
        let edges = self
            .graph
            .edges
            .iter()
            .map(|&(u, v)| Edge { u, v, cap: self.graph.edge_bits as f64 })
            .collect();
        let pairs = (0..n).map(|i| (i, 2 * n + (i + self.shift) % n)).collect();
        Ok(Network::new(true, 3 * n, edges, pairs)?)
    }

    /// Per middle vertex, the source cells arriving on its in-edges; per
    /// sink, the middle cells. Both in edge order.
    fn in_lists(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let n = self.graph.n;
        let mut in_src = vec![Vec::new(); n];
        let mut in_mid = vec![Vec::new(); n];
        for &(u, v) in &self.graph.edges {
            if u < n {
                in_src[v - n].push(u);
            } else {
                in_mid[v - 2 * n].push(u - n);
            }
        }
        (in_src, in_mid)
    }
}

/// The shared constants that define one bucket: both advice strings plus
/// the values of every removed vertex. Orders lexicographically in exactly
/// this field order, which is the tie-break for bucket selection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixing {
    pub advice_1: BitString,
    pub advice_2: BitString,
    /// x_i for every removed source s_i.
    pub source_fixes: BTreeMap<usize, u64>,
    /// Second-pass tape value for every removed middle v_j.
    pub middle_fixes: BTreeMap<usize, u64>,
}

impl Fixing {
    pub fn fixed_bits(&self, value_bits: usize) -> usize {
        self.advice_1.len()
            + self.advice_2.len()
            + value_bits * (self.source_fixes.len() + self.middle_fixes.len())
    }
}

fn fixing_mismatch(expected: &Fixing, given: &Fixing) -> String {
    if expected.advice_1 != given.advice_1 {
        "first-pass advice differs".into()
    } else if expected.advice_2 != given.advice_2 {
        "second-pass advice differs".into()
    } else if expected.source_fixes != given.source_fixes {
        "source fixes differ".into()
    } else {
        "middle fixes differ".into()
    }
}

fn wire_error(vertex: String) -> impl Fn(DsError) -> ReductionError {
    move |e| match e {
        DsError::MissingCell { pos } => {
            ReductionError::MissingMessage { vertex: vertex.clone(), position: pos }
        }
        other => ReductionError::Ds(other),
    }
}

/// Both preprocessing passes for a permutation input x: the second pass
/// runs on h(j) = f^{-1}(j) + b mod n, which the first pass determines.
pub fn inversion_fixing(
    net: &PrunedNetwork,
    ds: &dyn SystematicDs,
    x: &[u64],
) -> Result<Fixing, ReductionError> {
    let n = net.graph.n;
    let advice_1 = preprocess(ds, &OracleTape::new(x.to_vec()))?;
    let inv = permutation_inverse(x)?;
    let b = net.shift;
    let h: Vec<u64> = (0..n).map(|j| ((inv[j] + b) % n) as u64).collect();
    let advice_2 = preprocess(ds, &OracleTape::new(h.clone()))?;
    Ok(Fixing {
        advice_1,
        advice_2,
        source_fixes: net.removed.iter().filter(|&&v| v < n).map(|&i| (i, x[i])).collect(),
        middle_fixes: net
            .removed
            .iter()
            .filter(|&&v| (n..2 * n).contains(&v))
            .map(|&v| (v - n, h[v - n]))
            .collect(),
    })
}

/// One full execution: all middle values, all target outputs, and the
/// message seen on every edge.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    /// outputs[i] is what source i's target emitted.
    pub outputs: Vec<u64>,
    pub middle_values: Vec<u64>,
    /// Message per edge, aligned with the graph's edge order.
    pub edge_messages: Vec<u64>,
    pub max_reads_pass1: usize,
    pub max_reads_pass2: usize,
}

/// Runs the two-pass inversion scheme on a bucket member. Every vertex
/// sees only what its in-edges carry plus the shared fixing; on a
/// consistent permutation, target i outputs x_i.
pub fn run_inversion_scheme(
    net: &PrunedNetwork,
    ds: &dyn SystematicDs,
    fixing: &Fixing,
    x: &[u64],
) -> Result<SchemeRun, ReductionError> {
    let expected = inversion_fixing(net, ds, x)?;
    if expected != *fixing {
        return Err(ReductionError::InconsistentInput {
            detail: fixing_mismatch(&expected, fixing),
        });
    }
    let n = net.graph.n;
    let b = net.shift;
    let (in_src, in_mid) = net.in_lists();

    let mut middle_values = vec![0u64; n];
    let mut max_reads_pass1 = 0;
    for j in 0..n {
        if net.removed.contains(&net.graph.middle(j)) {
            middle_values[j] = fixing.middle_fixes[&j];
            continue;
        }
        let mut cells = vec![None; n];
        for &i in &in_src[j] {
            cells[i] = Some(x[i]);
        }
        for (&i, &v) in &fixing.source_fixes {
            cells[i] = Some(v);
        }
        let mut tape = OracleTape::from_partial(cells);
        let f_inv = answer(ds, &fixing.advice_1, j, &mut tape)
            .map_err(wire_error(format!("v_{j}")))?;
        max_reads_pass1 = max_reads_pass1.max(tape.read_log().len());
        middle_values[j] = (f_inv + b as u64) % n as u64;
    }

    let mut outputs = vec![0u64; n];
    let mut max_reads_pass2 = 0;
    for l in 0..n {
        let mut cells = vec![None; n];
        for &i in &in_mid[l] {
            cells[i] = Some(middle_values[i]);
        }
        for (&j, &v) in &fixing.middle_fixes {
            cells[j] = Some(v);
        }
        let mut tape = OracleTape::from_partial(cells);
        let out = answer(ds, &fixing.advice_2, l, &mut tape)
            .map_err(wire_error(format!("u_{l}")))?;
        max_reads_pass2 = max_reads_pass2.max(tape.read_log().len());
        outputs[(l + n - b) % n] = out;
    }

    let edge_messages = net
        .graph
        .edges
        .iter()
        .map(|&(u, _)| if u < n { x[u] } else { middle_values[u - n] })
        .collect();
    Ok(SchemeRun { outputs, middle_values, edge_messages, max_reads_pass1, max_reads_pass2 })
}

/// Both passes for a coefficient tape: the middle layer carries
/// h(j) = p(sigma^j) * sigma^(j*b), whose power sums the second pass reads.
pub fn poly_fixing(
    net: &PrunedNetwork,
    kind: PolyTableKind,
    root: &RootOfUnity,
    alpha: &[u64],
) -> Result<Fixing, ReductionError> {
    let n = net.graph.n;
    let field = root.field();
    let ds = kind.build(*root);
    let advice_1 = preprocess(ds.as_ref(), &OracleTape::new(alpha.to_vec()))?;
    let b = net.shift;
    let mut h = vec![0u64; n];
    for (j, slot) in h.iter_mut().enumerate() {
        let mut tape = OracleTape::new(alpha.to_vec());
        let query = kind.power_sum_query(n as u64, j as u64);
        let raw = answer(ds.as_ref(), &advice_1, query, &mut tape)?;
        let p_j = kind.power_sum_unscale(field, n as u64, raw);
        *slot = field.mul(p_j, root.pow_signed((j * b) as i64).value());
    }
    let advice_2 = preprocess(ds.as_ref(), &OracleTape::new(h.clone()))?;
    Ok(Fixing {
        advice_1,
        advice_2,
        source_fixes: net.removed.iter().filter(|&&v| v < n).map(|&i| (i, alpha[i])).collect(),
        middle_fixes: net
            .removed
            .iter()
            .filter(|&&v| (n..2 * n).contains(&v))
            .map(|&v| (v - n, h[v - n]))
            .collect(),
    })
}

/// Two-pass polynomial scheme: v_j turns first-pass answers into
/// h(j) = p(sigma^j) * sigma^(j*b); u_l reads the power sum of h at
/// sigma^(-l) and divides by n, which telescopes to alpha_{(l-b) mod n}.
pub fn run_poly_scheme(
    net: &PrunedNetwork,
    kind: PolyTableKind,
    root: &RootOfUnity,
    fixing: &Fixing,
    alpha: &[u64],
) -> Result<SchemeRun, ReductionError> {
    let expected = poly_fixing(net, kind, root, alpha)?;
    if expected != *fixing {
        return Err(ReductionError::InconsistentInput {
            detail: fixing_mismatch(&expected, fixing),
        });
    }
    let n = net.graph.n;
    let field = root.field();
    let ds = kind.build(*root);
    let b = net.shift;
    let (in_src, in_mid) = net.in_lists();

    let mut middle_values = vec![0u64; n];
    let mut max_reads_pass1 = 0;
    for j in 0..n {
        if net.removed.contains(&net.graph.middle(j)) {
            middle_values[j] = fixing.middle_fixes[&j];
            continue;
        }
        let mut cells = vec![None; n];
        for &i in &in_src[j] {
            cells[i] = Some(alpha[i]);
        }
        for (&i, &v) in &fixing.source_fixes {
            cells[i] = Some(v);
        }
        let mut tape = OracleTape::from_partial(cells);
        let query = kind.power_sum_query(n as u64, j as u64);
        let raw = answer(ds.as_ref(), &fixing.advice_1, query, &mut tape)
            .map_err(wire_error(format!("v_{j}")))?;
        max_reads_pass1 = max_reads_pass1.max(tape.read_log().len());
        let p_j = kind.power_sum_unscale(field, n as u64, raw);
        middle_values[j] = field.mul(p_j, root.pow_signed((j * b) as i64).value());
    }

    let n_inv = field.inv(n as u64 % field.modulus())?;
    let mut outputs = vec![0u64; n];
    let mut max_reads_pass2 = 0;
    for l in 0..n {
        let mut cells = vec![None; n];
        for &i in &in_mid[l] {
            cells[i] = Some(middle_values[i]);
        }
        for (&j, &v) in &fixing.middle_fixes {
            cells[j] = Some(v);
        }
        let mut tape = OracleTape::from_partial(cells);
        let query = kind.power_sum_query(n as u64, ((n - l) % n) as u64);
        let raw = answer(ds.as_ref(), &fixing.advice_2, query, &mut tape)
            .map_err(wire_error(format!("u_{l}")))?;
        max_reads_pass2 = max_reads_pass2.max(tape.read_log().len());
        let val = kind.power_sum_unscale(field, n as u64, raw);
        outputs[(l + n - b) % n] = field.mul(val, n_inv);
    }

    let edge_messages = net
        .graph
        .edges
        .iter()
        .map(|&(u, _)| if u < n { alpha[u] } else { middle_values[u - n] })
        .collect();
    Ok(SchemeRun { outputs, middle_values, edge_messages, max_reads_pass1, max_reads_pass2 })
}

/// The inversion scheme as encoder/decoder closures on the exported
/// network, for replay through the shared execution engine. Closures
/// assume bucket-consistent inputs.
pub fn inversion_coding_scheme(
    net: &PrunedNetwork,
    ds: Rc<dyn SystematicDs>,
    fixing: &Fixing,
) -> CodingScheme {
    let n = net.graph.n;
    let b = net.shift;
    let (in_src, in_mid) = net.in_lists();
    let mut encoders = Vec::with_capacity(net.graph.edges.len());
    for &(u, _) in &net.graph.edges {
        if u < n {
            encoders.push(SchemeFn::new(1, |ins| ins[0]));
        } else {
            let j = u - n;
            let sources = in_src[j].clone();
            let ds = Rc::clone(&ds);
            let advice = fixing.advice_1.clone();
            let fixes = fixing.source_fixes.clone();
            encoders.push(SchemeFn::new(sources.len(), move |ins| {
                let mut cells = vec![None; n];
                for (slot, &i) in sources.iter().enumerate() {
                    cells[i] = Some(ins[slot]);
                }
                for (&i, &v) in &fixes {
                    cells[i] = Some(v);
                }
                let mut tape = OracleTape::from_partial(cells);
                let f_inv = answer(ds.as_ref(), &advice, j, &mut tape)
                    .expect("bucket-consistent input");
                (f_inv + b as u64) % n as u64
            }));
        }
    }
    let decoders = (0..n)
        .map(|i| {
            let l = (i + b) % n;
            let mids = in_mid[l].clone();
            let ds = Rc::clone(&ds);
            let advice = fixing.advice_2.clone();
            let fixes = fixing.middle_fixes.clone();
            SchemeFn::new(mids.len(), move |ins| {
                let mut cells = vec![None; n];
                for (slot, &jm) in mids.iter().enumerate() {
                    cells[jm] = Some(ins[slot]);
                }
                for (&jm, &v) in &fixes {
                    cells[jm] = Some(v);
                }
                let mut tape = OracleTape::from_partial(cells);
                answer(ds.as_ref(), &advice, l, &mut tape).expect("bucket-consistent input")
            })
        })
        .collect();
    CodingScheme {
        name: format!("{}-bucket-replay", ds.name()),
        message_sizes: vec![n as u64; n],
        edge_alphabets: vec![n as u64; net.graph.edges.len()],
        encoders,
        decoders,
    }
}

#[derive(Debug, Clone)]
pub struct Bucket {
    pub fixing: Fixing,
    pub members: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub enum CensusPlan {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

impl CensusPlan {
    /// Exhaustive census up to n = 8 (40320 permutations), sampling beyond.
    pub fn auto(n: usize, samples: usize, seed: u64) -> Self {
        if n <= 8 {
            CensusPlan::Exhaustive
        } else {
            CensusPlan::Sample { count: samples, seed }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BucketCensus {
    pub bucket: Bucket,
    pub census_size: usize,
    pub bucket_count: usize,
    pub exhaustive: bool,
    pub seed: Option<u64>,
}

fn all_permutations(n: usize) -> Vec<Vec<u64>> {
    let mut a: Vec<u64> = (0..n as u64).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Groups permutations by their fixing and returns the largest bucket,
/// ties resolved toward the lexicographically smallest fixing.
pub fn select_bucket(
    net: &PrunedNetwork,
    ds: &dyn SystematicDs,
    plan: &CensusPlan,
) -> Result<BucketCensus, ReductionError> {
    let n = net.graph.n;
    let (inputs, exhaustive, seed) = match plan {
        CensusPlan::Exhaustive => (all_permutations(n), true, None),
        CensusPlan::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut inputs = Vec::with_capacity(*count);
            for _ in 0..*count {
                let mut p: Vec<u64> = (0..n as u64).collect();
                p.shuffle(&mut rng);
                inputs.push(p);
            }
            (inputs, false, Some(*seed))
        }
    };
    if inputs.is_empty() {
        return Err(ReductionError::EmptyInput);
    }
    let census_size = inputs.len();
    let mut buckets: BTreeMap<Fixing, Vec<Vec<u64>>> = BTreeMap::new();
    for x in inputs {
        let fixing = inversion_fixing(net, ds, &x)?;
        buckets.entry(fixing).or_default().push(x);
    }
    let bucket_count = buckets.len();
    let mut best: Option<(Fixing, Vec<Vec<u64>>)> = None;
    for (fixing, members) in buckets {
        if best.as_ref().map_or(true, |(_, m)| members.len() > m.len()) {
            best = Some((fixing, members));
        }
    }
    let (fixing, members) = best.expect("census is nonempty");
    Ok(BucketCensus {
        bucket: Bucket { fixing, members },
        census_size,
        bucket_count,
        exhaustive,
        seed,
    })
}

/// Everything measured about one reduction run, in declaration order.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub structure: String,
    pub n: usize,
    pub advice_bits: usize,
    pub queries: usize,
    pub q: usize,
    pub edge_bits: usize,
    pub edges_before_prune: usize,
    pub edges: usize,
    pub edge_bound: usize,
    pub max_out_degree: usize,
    pub degree_bound: usize,
    pub removed_count: usize,
    pub removed_bound: f64,
    pub shift: usize,
    pub distance: usize,
    pub long_fraction: f64,
    pub long_fraction_threshold: f64,
    pub census_size: usize,
    pub bucket_count: usize,
    pub bucket_size: usize,
    pub bucket_fraction: f64,
    pub fixed_bits: usize,
    pub fixed_bits_bound: f64,
    pub guaranteed_fraction: f64,
    pub min_inputs_bound: f64,
    pub epsilon: f64,
    pub epsilon_measured: f64,
    pub epsilon_prime: f64,
    pub members_verified: usize,
    pub all_correct: bool,
    pub max_edge_entropy_bits: f64,
    pub capacity_respected: bool,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    pub density: DensityReport,
}

fn entropy_bits(counts: &BTreeMap<u64, usize>, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Verifies the scheme on every bucket member and assembles the measured
/// quantities next to their structural bounds. The density inequality and
/// the epsilon' slack are reported, not gated: both are asymptotic and
/// usually vacuous at desk scale.
pub fn audit_reduction(
    net: &PrunedNetwork,
    ds: &dyn SystematicDs,
    census: &BucketCensus,
    epsilon: f64,
) -> Result<ReductionReport, ReductionError> {
    let n = net.graph.n;
    let t = ds.t_queries();
    let bits = net.graph.edge_bits;
    let mut tallies: Vec<BTreeMap<u64, usize>> =
        vec![BTreeMap::new(); net.graph.edges.len()];
    let mut all_correct = true;
    for member in &census.bucket.members {
        let run = run_inversion_scheme(net, ds, &census.bucket.fixing, member)?;
        if run.outputs != *member {
            all_correct = false;
        }
        for (tally, &m) in tallies.iter_mut().zip(&run.edge_messages) {
            *tally.entry(m).or_insert(0) += 1;
        }
    }
    let members = census.bucket.members.len();
    let max_edge_entropy_bits = tallies
        .iter()
        .map(|t| entropy_bits(t, members))
        .fold(0.0, f64::max);
    let log_n = (n as f64).log2();
    let fixed_bits_bound =
        2.0 * ds.s_bits() as f64 + (2.0 / net.q as f64) * n as f64 * bits as f64;
    let max_out_degree = net.graph.out_degrees().into_iter().max().unwrap_or(0);
    Ok(ReductionReport {
        structure: ds.name(),
        n,
        advice_bits: ds.s_bits(),
        queries: t,
        q: net.q,
        edge_bits: bits,
        edges_before_prune: net.edges_before_prune,
        edges: net.graph.edges.len(),
        edge_bound: 2 * t * n,
        max_out_degree,
        degree_bound: net.q * t,
        removed_count: net.removed.len(),
        removed_bound: 2.0 * n as f64 / net.q as f64,
        shift: net.shift,
        distance: net.distance,
        long_fraction: net.long_fraction,
        long_fraction_threshold: 1.0 - 2.0 / (n as f64).sqrt(),
        census_size: census.census_size,
        bucket_count: census.bucket_count,
        bucket_size: members,
        bucket_fraction: members as f64 / census.census_size as f64,
        fixed_bits: census.bucket.fixing.fixed_bits(bits),
        fixed_bits_bound,
        guaranteed_fraction: (-fixed_bits_bound).exp2(),
        min_inputs_bound: (n as f64 * log_n - 2.0 * n as f64).exp2(),
        epsilon,
        epsilon_measured: ds.s_bits() as f64 / (n as f64 * log_n),
        epsilon_prime: 2.0 * epsilon + 2.0 / net.q as f64 + 2.0 / log_n,
        members_verified: members,
        all_correct,
        max_edge_entropy_bits,
        capacity_respected: max_edge_entropy_bits <= bits as f64 + 1e-9,
        exhaustive: census.exhaustive,
        seed: census.seed,
        density: pair_density_check(net.graph.edges.len(), n, net.long_fraction, net.distance),
    })
}
