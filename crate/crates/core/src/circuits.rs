//! Fan-in-2 boolean circuits, a common-bits cut finder, and the conversion
//! from a blockwise circuit to a non-adaptive table structure: advice = the
//! values of the cut gates, and each output block answers by re-evaluating
//! its sub-circuit from the queried input cells plus the advice.

use crate::bits::BitString;
use crate::ds::{DsError, OracleTape, SystematicDs};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("expected {expected} input bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("gate {gate}: {detail}")]
    BadGate { gate: usize, detail: String },
    #[error("netlist line {line}: {detail}")]
    MalformedNetlist { line: usize, detail: String },
    #[error("invalid cut: {detail}")]
    InvalidCut { detail: String },
    #[error("exact cut search handles at most {max} gates, circuit has {gates}")]
    ExactCutTooLarge { gates: usize, max: usize },
    #[error("unsupported width: {detail}")]
    UnsupportedWidth { detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input,
    And(usize, usize),
    Or(usize, usize),
    Not(usize),
    Output(usize),
}

impl Gate {
    fn operands(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            Gate::Input => (None, None),
            Gate::And(x, y) | Gate::Or(x, y) => (Some(x), Some(y)),
            Gate::Not(x) | Gate::Output(x) => (Some(x), None),
        };
        a.into_iter().chain(b)
    }
}

/// Gates in topological order: every operand index is smaller than the
/// gate's own index, so acyclicity holds by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    n_in: usize,
    n_out: usize,
    gates: Vec<Gate>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl Circuit {
    pub fn new(n_in: usize, n_out: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (idx, g) in gates.iter().enumerate() {
            for op in g.operands() {
                if op >= idx {
                    return Err(CircuitError::BadGate {
                        gate: idx,
                        detail: format!("operand {op} is not an earlier gate"),
                    });
                }
                if matches!(gates[op], Gate::Output(_)) {
                    return Err(CircuitError::BadGate {
                        gate: idx,
                        detail: format!("operand {op} is an output gate"),
                    });
                }
            }
            match g {
                Gate::Input => inputs.push(idx),
                Gate::Output(_) => outputs.push(idx),
                _ => {}
            }
        }
        if inputs.len() != n_in {
            return Err(CircuitError::WidthMismatch { expected: n_in, got: inputs.len() });
        }
        if outputs.len() != n_out {
            return Err(CircuitError::WidthMismatch { expected: n_out, got: outputs.len() });
        }
        Ok(Self { n_in, n_out, gates, inputs, outputs })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Longest chain of logic gates (inputs and output taps are free).
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.gates.len()];
        for (idx, g) in self.gates.iter().enumerate() {
            let above = g.operands().map(|op| d[op]).max().unwrap_or(0);
            d[idx] = match g {
                Gate::Input | Gate::Output(_) => above,
                _ => above + 1,
            };
        }
        d.into_iter().max().unwrap_or(0)
    }

    pub fn to_netlist(&self) -> String {
        let mut out = format!("circuit {} {}\n", self.n_in, self.n_out);
        for (idx, g) in self.gates.iter().enumerate() {
            let line = match g {
                Gate::Input => format!("gate {idx} INPUT"),
                Gate::And(a, b) => format!("gate {idx} AND {a} {b}"),
                Gate::Or(a, b) => format!("gate {idx} OR {a} {b}"),
                Gate::Not(a) => format!("gate {idx} NOT {a}"),
                Gate::Output(a) => format!("gate {idx} OUTPUT {a}"),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Parses the one-gate-per-line text form. Ids must appear in order
    /// starting at 0; blank lines and `#` comments are skipped.
    pub fn from_netlist(text: &str) -> Result<Self, CircuitError> {
        let mut header: Option<(usize, usize)> = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let bad = |detail: String| CircuitError::MalformedNetlist { line, detail };
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            if header.is_none() {
                if fields.len() != 3 || fields[0] != "circuit" {
                    return Err(bad("expected header: circuit <n_in> <n_out>".into()));
                }
                let n_in = fields[1].parse().map_err(|_| bad("bad n_in".into()))?;
                let n_out = fields[2].parse().map_err(|_| bad("bad n_out".into()))?;
                header = Some((n_in, n_out));
                continue;
            }
            if fields[0] != "gate" || fields.len() < 3 {
                return Err(bad("expected: gate <id> <KIND> [ops]".into()));
            }
            let id: usize = fields[1].parse().map_err(|_| bad("bad gate id".into()))?;
            if id != gates.len() {
                return Err(bad(format!("gate id {id} out of order, expected {}", gates.len())));
            }
            let ops: Result<Vec<usize>, _> = fields[3..].iter().map(|f| f.parse()).collect();
            let ops = ops.map_err(|_| bad("bad operand".into()))?;
            let arity_err =
                |want: usize| bad(format!("{} takes {want} operand(s), got {}", fields[2], ops.len()));
            let gate = match fields[2] {
                "INPUT" if ops.is_empty() => Gate::Input,
                "INPUT" => return Err(arity_err(0)),
                "AND" if ops.len() == 2 => Gate::And(ops[0], ops[1]),
                "AND" => return Err(arity_err(2)),
                "OR" if ops.len() == 2 => Gate::Or(ops[0], ops[1]),
                "OR" => return Err(arity_err(2)),
                "NOT" if ops.len() == 1 => Gate::Not(ops[0]),
                "NOT" => return Err(arity_err(1)),
                "OUTPUT" if ops.len() == 1 => Gate::Output(ops[0]),
                "OUTPUT" => return Err(arity_err(1)),
                other => return Err(bad(format!("unknown gate kind {other}"))),
            };
            gates.push(gate);
        }
        let (n_in, n_out) =
            header.ok_or(CircuitError::MalformedNetlist { line: 1, detail: "empty netlist".into() })?;
        Circuit::new(n_in, n_out, gates)
    }
}

pub fn eval_circuit(c: &Circuit, input: &[bool]) -> Result<Vec<bool>, CircuitError> {
    if input.len() != c.n_in {
        return Err(CircuitError::WidthMismatch { expected: c.n_in, got: input.len() });
    }
    let mut vals = vec![false; c.gates.len()];
    let mut next_input = 0;
    for (idx, g) in c.gates.iter().enumerate() {
        vals[idx] = match *g {
            Gate::Input => {
                let v = input[next_input];
                next_input += 1;
                v
            }
            Gate::And(a, b) => vals[a] && vals[b],
            Gate::Or(a, b) => vals[a] || vals[b],
            Gate::Not(a) => !vals[a],
            Gate::Output(a) => vals[a],
        };
    }
    Ok(c.outputs.iter().map(|&o| vals[o]).collect())
}

/// A set of gates whose values, once fixed, disconnect each output bit from
/// all input bits outside its connectivity set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonBitsCut {
    pub cut: BTreeSet<usize>,
    /// Per output bit: the input positions still reaching it around the cut.
    pub connectivity: Vec<BTreeSet<usize>>,
    /// Set when the iterative search gave up and fell back to cutting every
    /// non-input gate.
    pub bound_unreachable: bool,
}

/// Input bits reaching each output bit by paths avoiding cut gates.
fn surviving_connectivity(c: &Circuit, cut: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let input_pos: HashMap<usize, usize> =
        c.inputs.iter().enumerate().map(|(pos, &g)| (g, pos)).collect();
    c.outputs
        .iter()
        .map(|&o| {
            let mut reach = BTreeSet::new();
            if cut.contains(&o) {
                return reach;
            }
            let mut seen = vec![false; c.gates.len()];
            let mut stack = vec![o];
            seen[o] = true;
            while let Some(g) = stack.pop() {
                if let Some(&pos) = input_pos.get(&g) {
                    reach.insert(pos);
                    continue;
                }
                for op in c.gates[g].operands() {
                    if !seen[op] && !cut.contains(&op) {
                        seen[op] = true;
                        stack.push(op);
                    }
                }
            }
            reach
        })
        .collect()
}

fn logic_depths(c: &Circuit) -> Vec<usize> {
    let mut d = vec![0usize; c.gates.len()];
    for (idx, g) in c.gates.iter().enumerate() {
        let above = g.operands().map(|op| d[op]).max().unwrap_or(0);
        d[idx] = match g {
            Gate::Input | Gate::Output(_) => above,
            _ => above + 1,
        };
    }
    d
}

/// Iteratively cuts gates until every output bit sees at most `bound` input
/// bits. Each round groups the live edges by the highest bit at which the
/// endpoint depths differ and cuts the heads of the cheapest class. If no
/// class remains while some output is still over the bound, every non-input
/// gate is cut and the result is flagged.
pub fn find_common_bits(c: &Circuit, bound: usize) -> CommonBitsCut {
    let depths = logic_depths(c);
    let mut cut = BTreeSet::new();
    loop {
        let connectivity = surviving_connectivity(c, &cut);
        if connectivity.iter().all(|s| s.len() <= bound) {
            return CommonBitsCut { cut, connectivity, bound_unreachable: false };
        }
        let mut classes: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
        for (idx, g) in c.gates.iter().enumerate() {
            if cut.contains(&idx) || matches!(g, Gate::Input | Gate::Output(_)) {
                continue;
            }
            for op in g.operands() {
                if cut.contains(&op) {
                    continue;
                }
                let differ = depths[idx] ^ depths[op];
                if differ != 0 {
                    let beta = usize::BITS - 1 - differ.leading_zeros();
                    classes.entry(beta).or_default().insert(idx);
                }
            }
        }
        let cheapest = classes.into_iter().min_by_key(|(beta, set)| (set.len(), *beta));
        match cheapest {
            Some((_, set)) => cut.extend(set),
            None => {
                let cut: BTreeSet<usize> = (0..c.gates.len())
                    .filter(|&g| !matches!(c.gates[g], Gate::Input))
                    .collect();
                let connectivity = surviving_connectivity(c, &cut);
                return CommonBitsCut { cut, connectivity, bound_unreachable: true };
            }
        }
    }
}

const EXACT_CUT_MAX_GATES: usize = 12;

/// Minimum cut by subset enumeration; ties go to the lexicographically
/// first subset in gate order. Usable as an oracle for the heuristic on
/// circuits of at most 12 gates.
pub fn find_common_bits_exact(
    c: &Circuit,
    bound: usize,
) -> Result<CommonBitsCut, CircuitError> {
    if c.gates.len() > EXACT_CUT_MAX_GATES {
        return Err(CircuitError::ExactCutTooLarge {
            gates: c.gates.len(),
            max: EXACT_CUT_MAX_GATES,
        });
    }
    let cuttable: Vec<usize> = (0..c.gates.len())
        .filter(|&g| !matches!(c.gates[g], Gate::Input))
        .collect();
    let mut best: Option<(usize, u32, CommonBitsCut)> = None;
    for mask in 0u32..1 << cuttable.len() {
        let cut: BTreeSet<usize> = cuttable
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, &g)| g)
            .collect();
        let size = cut.len();
        if best.as_ref().is_some_and(|(s, m, _)| (size, mask) >= (*s, *m)) {
            continue;
        }
        let connectivity = surviving_connectivity(c, &cut);
        if connectivity.iter().all(|s| s.len() <= bound) {
            best = Some((size, mask, CommonBitsCut { cut, connectivity, bound_unreachable: false }));
        }
    }
    Ok(best.expect("cutting every non-input gate satisfies any bound").2)
}

/// Cell values to the circuit's bit view: bit k of cell i (k = 0 is the
/// most significant of the b bits) lands at input position i*b + k.
pub fn cells_to_bits(cells: &[u64], b: usize) -> Result<Vec<bool>, CircuitError> {
    let mut bits = Vec::with_capacity(cells.len() * b);
    for &v in cells {
        if b < 64 && v >> b != 0 {
            return Err(CircuitError::UnsupportedWidth {
                detail: format!("cell value {v} does not fit in {b} bits"),
            });
        }
        for k in 0..b {
            bits.push(v >> (b - 1 - k) & 1 == 1);
        }
    }
    Ok(bits)
}

pub fn bits_to_cells(bits: &[bool], b: usize) -> Vec<u64> {
    assert!(b >= 1 && bits.len() % b == 0, "bit vector must split into b-bit cells");
    bits.chunks(b)
        .map(|chunk| chunk.iter().fold(0u64, |acc, &bit| acc << 1 | bit as u64))
        .collect()
}

/// A circuit computing n output blocks of b bits from n input cells of b
/// bits, packaged as a non-adaptive structure: preprocessing evaluates the
/// circuit once and stores the cut gates' values; a query re-evaluates its
/// block's sub-circuit from the queried cells plus that advice.
#[derive(Debug, Clone)]
pub struct CircuitDs {
    circuit: Circuit,
    cut_gates: Vec<usize>,
    queries: Vec<Vec<usize>>,
    n: usize,
    b: usize,
}

impl CircuitDs {
    pub fn block_bits(&self) -> usize {
        self.b
    }

    pub fn cut_gates(&self) -> &[usize] {
        &self.cut_gates
    }
}

pub fn circuit_to_ds(
    circuit: Circuit,
    cut: &CommonBitsCut,
    b: usize,
) -> Result<CircuitDs, CircuitError> {
    if b == 0 || b > 63 {
        return Err(CircuitError::UnsupportedWidth {
            detail: format!("block width {b} outside 1..=63"),
        });
    }
    if circuit.n_in != circuit.n_out || circuit.n_in % b != 0 {
        return Err(CircuitError::UnsupportedWidth {
            detail: format!(
                "need n_in = n_out divisible by {b}, got {} -> {}",
                circuit.n_in, circuit.n_out
            ),
        });
    }
    if let Some(&g) = cut.cut.iter().find(|&&g| g >= circuit.gates.len()) {
        return Err(CircuitError::InvalidCut { detail: format!("gate {g} does not exist") });
    }
    if surviving_connectivity(&circuit, &cut.cut) != cut.connectivity {
        return Err(CircuitError::InvalidCut {
            detail: "connectivity map does not match the cut".into(),
        });
    }
    let n = circuit.n_in / b;
    let queries = (0..n)
        .map(|j| {
            let mut cells: Vec<usize> = cut.connectivity[j * b..(j + 1) * b]
                .iter()
                .flatten()
                .map(|&bit| bit / b)
                .collect();
            cells.sort_unstable();
            cells.dedup();
            cells
        })
        .collect();
    let cut_gates = cut.cut.iter().copied().collect();
    Ok(CircuitDs { circuit, cut_gates, queries, n, b })
}

impl CircuitDs {
    /// Evaluates what is known: cut gates come from advice, input cells from
    /// `cells`, everything else from its operands when they are all known.
    fn partial_eval(
        &self,
        advice: &BitString,
        q: usize,
        cells: &HashMap<usize, u64>,
    ) -> Result<u64, DsError> {
        let gates = &self.circuit.gates;
        let mut vals: Vec<Option<bool>> = vec![None; gates.len()];
        let mut next_input = 0;
        for (idx, g) in gates.iter().enumerate() {
            if let Ok(slot) = self.cut_gates.binary_search(&idx) {
                vals[idx] =
                    Some(advice.bit(slot).map_err(|_| DsError::Unanswerable { q })?);
                if matches!(g, Gate::Input) {
                    next_input += 1;
                }
                continue;
            }
            vals[idx] = match *g {
                Gate::Input => {
                    let pos = next_input;
                    next_input += 1;
                    cells
                        .get(&(pos / self.b))
                        .map(|&v| v >> (self.b - 1 - pos % self.b) & 1 == 1)
                }
                Gate::And(a, x) => vals[a].zip(vals[x]).map(|(p, r)| p && r),
                Gate::Or(a, x) => vals[a].zip(vals[x]).map(|(p, r)| p || r),
                Gate::Not(a) => vals[a].map(|p| !p),
                Gate::Output(a) => vals[a],
            };
        }
        let mut out = 0u64;
        for &o in &self.circuit.outputs[q * self.b..(q + 1) * self.b] {
            let bit = vals[o].ok_or(DsError::Unanswerable { q })?;
            out = out << 1 | bit as u64;
        }
        Ok(out)
    }
}

impl SystematicDs for CircuitDs {
    fn name(&self) -> String {
        format!(
            "circuit_ds(n={},b={},gates={},cut={})",
            self.n,
            self.b,
            self.circuit.size(),
            self.cut_gates.len()
        )
    }
    fn n(&self) -> usize {
        self.n
    }
    fn s_bits(&self) -> usize {
        self.cut_gates.len()
    }
    fn t_queries(&self) -> usize {
        self.queries.iter().map(Vec::len).max().unwrap_or(0)
    }
    fn adaptive(&self) -> bool {
        false
    }
    fn query_set(&self, q: usize) -> Option<Vec<usize>> {
        Some(self.queries[q].clone())
    }

    fn preprocess_impl(&self, input: &OracleTape) -> Result<BitString, DsError> {
        let cells = input.snapshot()?;
        let domain = 1u64 << self.b;
        for (pos, &v) in cells.iter().enumerate() {
            if v >= domain {
                return Err(DsError::ValueOutOfRange { pos, value: v, domain });
            }
        }
        let bits = cells_to_bits(&cells, self.b).expect("cell range checked above");
        let mut vals = vec![false; self.circuit.gates.len()];
        let mut next_input = 0;
        for (idx, g) in self.circuit.gates.iter().enumerate() {
            vals[idx] = match *g {
                Gate::Input => {
                    let v = bits[next_input];
                    next_input += 1;
                    v
                }
                Gate::And(a, b) => vals[a] && vals[b],
                Gate::Or(a, b) => vals[a] || vals[b],
                Gate::Not(a) => !vals[a],
                Gate::Output(a) => vals[a],
            };
        }
        let mut advice = BitString::new();
        for &g in &self.cut_gates {
            advice.push_bit(vals[g]);
        }
        Ok(advice)
    }

    fn answer_impl(
        &self,
        advice: &BitString,
        q: usize,
        oracle: &mut OracleTape,
    ) -> Result<u64, DsError> {
        let domain = 1u64 << self.b;
        let mut cells = HashMap::new();
        for &p in &self.queries[q] {
            let v = oracle.read(p)?;
            if v >= domain {
                return Err(DsError::ValueOutOfRange { pos: p, value: v, domain });
            }
            cells.insert(p, v);
        }
        self.partial_eval(advice, q, &cells)
    }
}

/// Incremental gate-list builder with a NOT cache, shared by the fixture
/// constructors.
struct Builder {
    gates: Vec<Gate>,
    nots: HashMap<usize, usize>,
}

impl Builder {
    fn with_inputs(n: usize) -> Self {
        Self { gates: vec![Gate::Input; n], nots: HashMap::new() }
    }

    fn push(&mut self, g: Gate) -> usize {
        self.gates.push(g);
        self.gates.len() - 1
    }

    fn not(&mut self, a: usize) -> usize {
        if let Some(&g) = self.nots.get(&a) {
            return g;
        }
        let g = self.push(Gate::Not(a));
        self.nots.insert(a, g);
        g
    }

    fn and(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::And(a, b))
    }

    fn or(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::Or(a, b))
    }

    fn xnor(&mut self, a: usize, b: usize) -> usize {
        let na = self.not(a);
        let nb = self.not(b);
        let both = self.and(a, b);
        let neither = self.and(na, nb);
        self.or(both, neither)
    }

    /// a > b over equal-width MSB-first bit vectors.
    fn greater(&mut self, a: &[usize], b: &[usize]) -> usize {
        let mut gt: Option<usize> = None;
        let mut eq_prefix: Option<usize> = None;
        for k in 0..a.len() {
            let nb = self.not(b[k]);
            let here = self.and(a[k], nb);
            let term = match eq_prefix {
                Some(e) => self.and(e, here),
                None => here,
            };
            gt = Some(match gt {
                Some(g) => self.or(g, term),
                None => term,
            });
            if k + 1 < a.len() {
                let e = self.xnor(a[k], b[k]);
                eq_prefix = Some(match eq_prefix {
                    Some(prev) => self.and(prev, e),
                    None => e,
                });
            }
        }
        gt.expect("keys are at least one bit wide")
    }

    /// sel ? a : b, bitwise.
    fn mux(&mut self, sel: usize, a: &[usize], b: &[usize]) -> Vec<usize> {
        let nsel = self.not(sel);
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let p = self.and(sel, x);
                let r = self.and(nsel, y);
                self.or(p, r)
            })
            .collect()
    }
}

/// Batcher's bitonic network on n b-bit keys, compiled to gates through
/// compare-exchange blocks. Size O(n log^2 n * b); a fixture, not an
/// asymptotically optimal sorter.
pub fn build_sorting_network(n: usize, b: usize) -> Result<Circuit, CircuitError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(CircuitError::UnsupportedWidth {
            detail: format!("bitonic construction needs a power-of-two key count, got {n}"),
        });
    }
    if b == 0 {
        return Err(CircuitError::UnsupportedWidth { detail: "keys need at least 1 bit".into() });
    }
    let mut bld = Builder::with_inputs(n * b);
    let mut keys: Vec<Vec<usize>> =
        (0..n).map(|i| (i * b..(i + 1) * b).collect()).collect();
    let mut k = 2;
    while k <= n {
        let mut j = k / 2;
        while j >= 1 {
            for i in 0..n {
                let l = i ^ j;
                if l > i {
                    let ascending = i & k == 0;
                    let gt = bld.greater(&keys[i], &keys[l]);
                    let low = bld.mux(gt, &keys[l].clone(), &keys[i].clone());
                    let high = bld.mux(gt, &keys[i].clone(), &keys[l].clone());
                    if ascending {
                        keys[i] = low;
                        keys[l] = high;
                    } else {
                        keys[i] = high;
                        keys[l] = low;
                    }
                }
            }
            j /= 2;
        }
        k *= 2;
    }
    for key in &keys {
        for &bit in key {
            bld.push(Gate::Output(bit));
        }
    }
    Circuit::new(n * b, n * b, bld.gates)
}

/// Naive inverse-table circuit: output cell y holds the x with f(x) = y,
/// or zero when no preimage exists. Size O(n^2 * b).
pub fn build_inversion_circuit(n: usize) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::UnsupportedWidth {
            detail: format!("inversion table needs n >= 2, got {n}"),
        });
    }
    let b = crate::ds::index_bits(n);
    let mut bld = Builder::with_inputs(n * b);
    let cell_bit = |x: usize, k: usize| x * b + k;
    let mut out_gates = Vec::with_capacity(n * b);
    for y in 0..n {
        let eq: Vec<usize> = (0..n)
            .map(|x| {
                let mut acc: Option<usize> = None;
                for k in 0..b {
                    let lit = if y >> (b - 1 - k) & 1 == 1 {
                        cell_bit(x, k)
                    } else {
                        bld.not(cell_bit(x, k))
                    };
                    acc = Some(match acc {
                        Some(a) => bld.and(a, lit),
                        None => lit,
                    });
                }
                acc.expect("b >= 1 for n >= 2")
            })
            .collect();
        // Priority-encode: the least matching x wins, so several preimages
        // never blend and an empty preimage set reads as zero.
        let mut first = Vec::with_capacity(n);
        let mut seen: Option<usize> = None;
        for &e in &eq {
            first.push(match seen {
                Some(s) => {
                    let ns = bld.not(s);
                    bld.and(e, ns)
                }
                None => e,
            });
            seen = Some(match seen {
                Some(s) => bld.or(s, e),
                None => e,
            });
        }
        for k in 0..b {
            // Bit k of the preimage index: OR of first_x over x with that bit.
            let mut acc: Option<usize> = None;
            for (x, &f) in first.iter().enumerate() {
                if x >> (b - 1 - k) & 1 == 1 {
                    acc = Some(match acc {
                        Some(a) => bld.or(a, f),
                        None => f,
                    });
                }
            }
            out_gates.push(acc.expect("some index below n has every bit"));
        }
    }
    for g in out_gates {
        bld.push(Gate::Output(g));
    }
    Circuit::new(n * b, n * b, bld.gates)
}
