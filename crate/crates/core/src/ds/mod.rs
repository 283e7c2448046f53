//! Systematic data structures over read-counted oracle tapes.
//!
//! A data structure here is a pair of procedures: `preprocess` sees the whole
//! input for free and emits a bounded advice string; `answer` responds to one
//! query using the advice plus a budgeted number of oracle reads. Budgets are
//! hard-enforced by the tape, not merely asserted in tests: an implementation
//! that overreads gets an error, and a non-adaptive structure that strays
//! outside its declared query set gets an error.

mod invert;
mod poly;

pub use invert::{Hellman, InvBlock, InvTrivialScan, InvTrivialTable};
pub use poly::{EvalTable, InterpTable, PolyTableKind};

use crate::bits::BitString;
use crate::field::FieldError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DsError {
    #[error("query {q} out of range for domain size {n}")]
    QueryOutOfRange { q: usize, n: usize },
    #[error("oracle position {pos} out of range for tape of {len} cells")]
    CellOutOfRange { pos: usize, len: usize },
    #[error("oracle position {pos} holds no value")]
    MissingCell { pos: usize },
    #[error("{resource} budget exceeded: declared {declared}, needed more")]
    BudgetExceeded { resource: Resource, declared: usize },
    #[error("non-adaptive structure read position {pos} outside its declared set for query {q}")]
    NonAdaptivityViolation { q: usize, pos: usize },
    #[error("input is not a permutation: {detail}")]
    NotAPermutation { detail: String },
    #[error("query {q} has no answer consistent with the advice")]
    Unanswerable { q: usize },
    #[error("invalid parameters: {detail}")]
    InvalidParams { detail: String },
    #[error("expected an input tape of {expected} cells, got {got}")]
    WrongInputLength { expected: usize, got: usize },
    #[error("tape value {value} at position {pos} outside domain of size {domain}")]
    ValueOutOfRange { pos: usize, value: u64, domain: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    AdviceBits,
    OracleReads,
}

impl std::fmt::Display for Resource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Resource::AdviceBits => write!(f, "advice"),
            Resource::OracleReads => write!(f, "oracle-read"),
        }
    }
}

/// A table of cells with logged, budgeted reads.
///
/// Cells may be unknown (`None`), which models a relay that received only the
/// messages its in-edges carry. Reading an unknown cell is an error. One tape
/// serves one answer call at a time; the read log is per-call state.
#[derive(Debug, Clone)]
pub struct OracleTape {
    cells: Vec<Option<u64>>,
    read_log: Vec<usize>,
    budget: Option<usize>,
    allowed: Option<Vec<bool>>,
}

impl OracleTape {
    pub fn new(table: Vec<u64>) -> Self {
        Self {
            cells: table.into_iter().map(Some).collect(),
            read_log: Vec::new(),
            budget: None,
            allowed: None,
        }
    }

    pub fn from_partial(cells: Vec<Option<u64>>) -> Self {
        Self { cells, read_log: Vec::new(), budget: None, allowed: None }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Starts one budgeted answer call: clears the log, caps reads at
    /// `budget`, and (for non-adaptive structures) restricts reads to
    /// `allowed`.
    pub fn arm(&mut self, budget: usize, allowed: Option<&[usize]>) {
        self.read_log.clear();
        self.budget = Some(budget);
        self.allowed = allowed.map(|set| {
            let mut mask = vec![false; self.cells.len()];
            for &p in set {
                if p < mask.len() {
                    mask[p] = true;
                }
            }
            mask
        });
    }

    pub fn disarm(&mut self) {
        self.budget = None;
        self.allowed = None;
    }

    /// One counted oracle probe.
    pub fn read(&mut self, pos: usize) -> Result<u64, DsError> {
        if let Some(b) = self.budget {
            if self.read_log.len() >= b {
                return Err(DsError::BudgetExceeded { resource: Resource::OracleReads, declared: b });
            }
        }
        if pos >= self.cells.len() {
            return Err(DsError::CellOutOfRange { pos, len: self.cells.len() });
        }
        if let Some(mask) = &self.allowed {
            if !mask[pos] {
                // The query index is not known here; the wrapper's error
                // context carries it. Use the position alone.
                return Err(DsError::NonAdaptivityViolation { q: usize::MAX, pos });
            }
        }
        let value = self.cells[pos].ok_or(DsError::MissingCell { pos })?;
        self.read_log.push(pos);
        Ok(value)
    }

    pub fn read_log(&self) -> &[usize] {
        &self.read_log
    }

    /// Unlogged full view for preprocessing, which sees the input for free.
    pub fn snapshot(&self) -> Result<Vec<u64>, DsError> {
        self.cells
            .iter()
            .enumerate()
            .map(|(pos, c)| c.ok_or(DsError::MissingCell { pos }))
            .collect()
    }
}

/// A systematic data structure: declared bounds plus the two procedures.
///
/// Implementations provide `preprocess_impl` / `answer_impl`; callers go
/// through the module-level [`preprocess`] and [`answer`] wrappers, which
/// enforce the declared budgets.
pub trait SystematicDs {
    /// Human-readable instance name, including parameters.
    fn name(&self) -> String;

    /// Query-domain and input-tape size.
    fn n(&self) -> usize;

    /// Declared advice budget in bits.
    fn s_bits(&self) -> usize;

    /// Declared per-query oracle-read budget.
    fn t_queries(&self) -> usize;

    fn adaptive(&self) -> bool;

    /// The declared read set for query `q`; `None` iff the structure is
    /// adaptive.
    fn query_set(&self, q: usize) -> Option<Vec<usize>>;

    fn preprocess_impl(&self, input: &OracleTape) -> Result<BitString, DsError>;

    fn answer_impl(
        &self,
        advice: &BitString,
        q: usize,
        oracle: &mut OracleTape,
    ) -> Result<u64, DsError>;
}

/// Runs preprocessing and enforces the advice budget.
pub fn preprocess(ds: &dyn SystematicDs, input: &OracleTape) -> Result<BitString, DsError> {
    if input.len() != ds.n() {
        return Err(DsError::WrongInputLength { expected: ds.n(), got: input.len() });
    }
    let advice = ds.preprocess_impl(input)?;
    if advice.len() > ds.s_bits() {
        return Err(DsError::BudgetExceeded {
            resource: Resource::AdviceBits,
            declared: ds.s_bits(),
        });
    }
    Ok(advice)
}

/// Answers one query with the tape armed: reads are capped at the declared
/// budget and, for non-adaptive structures, confined to the declared set.
/// After the call the tape's `read_log` holds the probed positions.
pub fn answer(
    ds: &dyn SystematicDs,
    advice: &BitString,
    q: usize,
    oracle: &mut OracleTape,
) -> Result<u64, DsError> {
    if q >= ds.n() {
        return Err(DsError::QueryOutOfRange { q, n: ds.n() });
    }
    let allowed = ds.query_set(q);
    oracle.arm(ds.t_queries(), allowed.as_deref());
    let result = ds.answer_impl(advice, q, oracle);
    oracle.disarm();
    result.map_err(|e| match e {
        DsError::NonAdaptivityViolation { pos, .. } => DsError::NonAdaptivityViolation { q, pos },
        other => other,
    })
}

/// Bits needed to index or store values of a domain of size `n`.
pub fn index_bits(n: usize) -> usize {
    if n <= 1 { 0 } else { (usize::BITS - (n - 1).leading_zeros()) as usize }
}

/// Checks that the tape holds a permutation of [n] and returns its inverse.
pub(crate) fn permutation_inverse(table: &[u64]) -> Result<Vec<usize>, DsError> {
    let n = table.len();
    let mut inv = vec![usize::MAX; n];
    for (x, &v) in table.iter().enumerate() {
        if v >= n as u64 {
            return Err(DsError::ValueOutOfRange { pos: x, value: v, domain: n as u64 });
        }
        let y = v as usize;
        if inv[y] != usize::MAX {
            return Err(DsError::NotAPermutation {
                detail: format!("value {y} appears at positions {} and {x}", inv[y]),
            });
        }
        inv[y] = x;
    }
    Ok(inv)
}

/// Minimum-preimage inversion for arbitrary tables: min {x : f(x) = y},
/// with the empty preimage mapped to 0.
pub(crate) fn min_preimage_table(table: &[u64]) -> Result<Vec<u64>, DsError> {
    let n = table.len();
    let mut inv = vec![u64::MAX; n];
    for (x, &v) in table.iter().enumerate() {
        if v >= n as u64 {
            return Err(DsError::ValueOutOfRange { pos: x, value: v, domain: n as u64 });
        }
        if inv[v as usize] == u64::MAX {
            inv[v as usize] = x as u64;
        }
    }
    Ok(inv.into_iter().map(|v| if v == u64::MAX { 0 } else { v }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Overreader;

    impl SystematicDs for Overreader {
        fn name(&self) -> String {
            "overreader".into()
        }
        fn n(&self) -> usize {
            4
        }
        fn s_bits(&self) -> usize {
            0
        }
        fn t_queries(&self) -> usize {
            1
        }
        fn adaptive(&self) -> bool {
            false
        }
        fn query_set(&self, q: usize) -> Option<Vec<usize>> {
            Some(vec![q])
        }
        fn preprocess_impl(&self, _input: &OracleTape) -> Result<BitString, DsError> {
            Ok(BitString::new())
        }
        fn answer_impl(
            &self,
            _advice: &BitString,
            q: usize,
            oracle: &mut OracleTape,
        ) -> Result<u64, DsError> {
            oracle.read(q)?;
            oracle.read(q) // second read of a 1-read budget
        }
    }

    struct Strayer;

    impl SystematicDs for Strayer {
        fn name(&self) -> String {
            "strayer".into()
        }
        fn n(&self) -> usize {
            4
        }
        fn s_bits(&self) -> usize {
            0
        }
        fn t_queries(&self) -> usize {
            2
        }
        fn adaptive(&self) -> bool {
            false
        }
        fn query_set(&self, q: usize) -> Option<Vec<usize>> {
            Some(vec![q])
        }
        fn preprocess_impl(&self, _input: &OracleTape) -> Result<BitString, DsError> {
            Ok(BitString::new())
        }
        fn answer_impl(
            &self,
            _advice: &BitString,
            q: usize,
            oracle: &mut OracleTape,
        ) -> Result<u64, DsError> {
            oracle.read((q + 1) % 4)
        }
    }

    #[test]
    fn read_budget_is_hard_enforced() {
        let ds = Overreader;
        let mut tape = OracleTape::new(vec![0, 1, 2, 3]);
        let advice = preprocess(&ds, &tape).unwrap();
        let err = answer(&ds, &advice, 2, &mut tape).unwrap_err();
        assert_eq!(
            err,
            DsError::BudgetExceeded { resource: Resource::OracleReads, declared: 1 }
        );
    }

    #[test]
    fn declared_set_is_hard_enforced() {
        let ds = Strayer;
        let mut tape = OracleTape::new(vec![0, 1, 2, 3]);
        let advice = preprocess(&ds, &tape).unwrap();
        let err = answer(&ds, &advice, 1, &mut tape).unwrap_err();
        assert_eq!(err, DsError::NonAdaptivityViolation { q: 1, pos: 2 });
    }

    #[test]
    fn missing_cells_error() {
        let mut tape = OracleTape::from_partial(vec![Some(7), None]);
        tape.arm(5, None);
        assert_eq!(tape.read(0).unwrap(), 7);
        assert_eq!(tape.read(1), Err(DsError::MissingCell { pos: 1 }));
        assert_eq!(tape.read(9), Err(DsError::CellOutOfRange { pos: 9, len: 2 }));
    }

    #[test]
    fn index_bits_values() {
        assert_eq!(index_bits(0), 0);
        assert_eq!(index_bits(1), 0);
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(4), 2);
        assert_eq!(index_bits(5), 3);
        assert_eq!(index_bits(64), 6);
    }

    #[test]
    fn permutation_checks() {
        assert!(permutation_inverse(&[2, 0, 1]).is_ok());
        assert!(matches!(
            permutation_inverse(&[0, 0, 1]),
            Err(DsError::NotAPermutation { .. })
        ));
        assert!(matches!(
            permutation_inverse(&[0, 5, 1]),
            Err(DsError::ValueOutOfRange { .. })
        ));
        assert_eq!(min_preimage_table(&[1, 1, 3, 3]).unwrap(), vec![0, 0, 0, 2]);
    }
}
