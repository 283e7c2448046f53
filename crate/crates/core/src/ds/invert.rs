//! Function-inversion data structures over tapes holding f: [n] -> [n].
//!
//! Two trivial extremes (store the whole inverse; scan the whole tape), one
//! non-adaptive block structure whose query sets are contiguous blocks, and
//! one adaptive cycle-walking structure with anchor shortcuts.

use super::{index_bits, min_preimage_table, permutation_inverse, DsError, OracleTape, SystematicDs};
use crate::bits::BitString;

/// Stores f^-1 outright: s = n * ceil(log2 n) bits, zero reads per query.
/// Non-permutations use min {x : f(x) = y}, with min of nothing = 0.
#[derive(Debug, Clone)]
pub struct InvTrivialTable {
    n: usize,
}

impl InvTrivialTable {
    pub fn new(n: usize) -> Result<Self, DsError> {
        if n == 0 {
            return Err(DsError::InvalidParams { detail: "n must be positive".into() });
        }
        Ok(Self { n })
    }
}

impl SystematicDs for InvTrivialTable {
    fn name(&self) -> String {
        format!("inv_trivial_table(n={})", self.n)
    }
    fn n(&self) -> usize {
        self.n
    }
    fn s_bits(&self) -> usize {
        self.n * index_bits(self.n)
    }
    fn t_queries(&self) -> usize {
        0
    }
    fn adaptive(&self) -> bool {
        false
    }
    fn query_set(&self, _q: usize) -> Option<Vec<usize>> {
        Some(Vec::new())
    }

    fn preprocess_impl(&self, input: &OracleTape) -> Result<BitString, DsError> {
        let table = input.snapshot()?;
        let inv = min_preimage_table(&table)?;
        let w = index_bits(self.n);
        let mut advice = BitString::new();
        for v in inv {
            advice.push_uint(v, w);
        }
        Ok(advice)
    }

    fn answer_impl(
        &self,
        advice: &BitString,
        q: usize,
        _oracle: &mut OracleTape,
    ) -> Result<u64, DsError> {
        let w = index_bits(self.n);
        Ok(advice.read_uint(q * w, w).map_err(|_| DsError::Unanswerable { q })?)
    }
}

/// No advice at all: reads the entire tape (always all n positions, so the
/// probe sequence is input-independent) and returns the least preimage.
#[derive(Debug, Clone)]
pub struct InvTrivialScan {
    n: usize,
}

impl InvTrivialScan {
    pub fn new(n: usize) -> Result<Self, DsError> {
        if n == 0 {
            return Err(DsError::InvalidParams { detail: "n must be positive".into() });
        }
        Ok(Self { n })
    }
}

impl SystematicDs for InvTrivialScan {
    fn name(&self) -> String {
        format!("inv_trivial_scan(n={})", self.n)
    }
    fn n(&self) -> usize {
        self.n
    }
    fn s_bits(&self) -> usize {
        0
    }
    fn t_queries(&self) -> usize {
        self.n
    }
    fn adaptive(&self) -> bool {
        false
    }
    fn query_set(&self, _q: usize) -> Option<Vec<usize>> {
        Some((0..self.n).collect())
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
        let mut found = None;
        for x in 0..self.n {
            let v = oracle.read(x)?;
            if v == q as u64 && found.is_none() {
                found = Some(x as u64);
            }
        }
        Ok(found.unwrap_or(0))
    }
}

/// Block-local inversion: query y may read exactly the block of t positions
/// containing y. One flag bit per y says whether f^-1(y) sits in that block;
/// if not, the advice carries the value outright.
#[derive(Debug, Clone)]
pub struct InvBlock {
    n: usize,
    t: usize,
}

impl InvBlock {
    pub fn new(n: usize, t: usize) -> Result<Self, DsError> {
        if n == 0 || t == 0 || t > n || n % t != 0 {
            return Err(DsError::InvalidParams {
                detail: format!("block size {t} must divide n = {n}"),
            });
        }
        Ok(Self { n, t })
    }

    pub fn block_size(&self) -> usize {
        self.t
    }

    fn block_of(&self, y: usize) -> std::ops::Range<usize> {
        let start = (y / self.t) * self.t;
        start..start + self.t
    }

    /// Walks the variable-width advice to the entry for `y`.
    /// Entry layout: flag bit, then ceil(log2 n) explicit bits iff flag = 0.
    fn entry_offset(&self, advice: &BitString, y: usize) -> Result<usize, DsError> {
        let w = index_bits(self.n);
        let mut pos = 0;
        for _ in 0..y {
            let flag = advice.bit(pos).map_err(|_| DsError::Unanswerable { q: y })?;
            pos += if flag { 1 } else { 1 + w };
        }
        Ok(pos)
    }
}

impl SystematicDs for InvBlock {
    fn name(&self) -> String {
        format!("inv_block(n={},t={})", self.n, self.t)
    }
    fn n(&self) -> usize {
        self.n
    }
    fn s_bits(&self) -> usize {
        self.n * (1 + index_bits(self.n))
    }
    fn t_queries(&self) -> usize {
        self.t
    }
    fn adaptive(&self) -> bool {
        false
    }
    fn query_set(&self, q: usize) -> Option<Vec<usize>> {
        Some(self.block_of(q).collect())
    }

    fn preprocess_impl(&self, input: &OracleTape) -> Result<BitString, DsError> {
        let table = input.snapshot()?;
        let inv = permutation_inverse(&table)?;
        let w = index_bits(self.n);
        let mut advice = BitString::new();
        for (y, &x) in inv.iter().enumerate() {
            if self.block_of(y).contains(&x) {
                advice.push_bit(true);
            } else {
                advice.push_bit(false);
                advice.push_uint(x as u64, w);
            }
        }
        Ok(advice)
    }

    fn answer_impl(
        &self,
        advice: &BitString,
        q: usize,
        oracle: &mut OracleTape,
    ) -> Result<u64, DsError> {
        let w = index_bits(self.n);
        let off = self.entry_offset(advice, q)?;
        let in_block = advice.bit(off).map_err(|_| DsError::Unanswerable { q })?;
        // Read the whole block regardless of the flag: the probe sequence is a
        // function of the query alone.
        let mut found = None;
        for x in self.block_of(q) {
            let v = oracle.read(x)?;
            if v == q as u64 && found.is_none() {
                found = Some(x as u64);
            }
        }
        if in_block {
            found.ok_or(DsError::Unanswerable { q })
        } else {
            Ok(advice.read_uint(off + 1, w).map_err(|_| DsError::Unanswerable { q })?)
        }
    }
}

/// Cycle-walking permutation inversion with anchors.
///
/// Preprocessing walks each cycle of f from its smallest element and, on
/// cycles longer than t, stores an anchor every t steps together with the
/// element t steps earlier. A query walks forward to the first anchor (at
/// most t-1 probes), jumps back, and walks forward again until it steps on
/// the predecessor; short cycles resolve by walking alone. Total probes are
/// at most 2t.
#[derive(Debug, Clone)]
pub struct Hellman {
    n: usize,
    t: usize,
}

impl Hellman {
    pub fn new(n: usize, t: usize) -> Result<Self, DsError> {
        if n == 0 || t == 0 || t > n {
            return Err(DsError::InvalidParams {
                detail: format!("need 1 <= t <= n, got n = {n}, t = {t}"),
            });
        }
        Ok(Self { n, t })
    }

    /// Anchor spacing; the declared read budget is twice this.
    pub fn spacing(&self) -> usize {
        self.t
    }

    fn pair_width(&self) -> usize {
        2 * index_bits(self.n)
    }

    fn lookup_anchor(&self, advice: &BitString, elt: u64) -> Option<u64> {
        let pw = self.pair_width();
        let w = index_bits(self.n);
        if pw == 0 {
            return None;
        }
        let pairs = advice.len() / pw;
        for k in 0..pairs {
            let anchor = advice.read_uint(k * pw, w).ok()?;
            if anchor == elt {
                return advice.read_uint(k * pw + w, w).ok();
            }
        }
        None
    }
}

impl SystematicDs for Hellman {
    fn name(&self) -> String {
        format!("hellman(n={},t={})", self.n, self.t)
    }
    fn n(&self) -> usize {
        self.n
    }
    fn s_bits(&self) -> usize {
        // At most 2n/(t+1) anchors: a cycle of length L > t stores
        // ceil(L/t) <= 2L/(t+1) pairs, and cycles of length <= t store none.
        (2 * self.n / (self.t + 1)) * self.pair_width()
    }
    fn t_queries(&self) -> usize {
        2 * self.t
    }
    fn adaptive(&self) -> bool {
        true
    }
    fn query_set(&self, _q: usize) -> Option<Vec<usize>> {
        None
    }

    fn preprocess_impl(&self, input: &OracleTape) -> Result<BitString, DsError> {
        let table = input.snapshot()?;
        permutation_inverse(&table)?;
        let w = index_bits(self.n);
        let mut advice = BitString::new();
        let mut visited = vec![false; self.n];
        for start in 0..self.n {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            loop {
                visited[cur] = true;
                cycle.push(cur as u64);
                cur = table[cur] as usize;
                if cur == start {
                    break;
                }
            }
            let len = cycle.len();
            if len <= self.t {
                continue;
            }
            let mut pos = 0;
            while pos < len {
                let anchor = cycle[pos];
                let pred = cycle[(pos + len - self.t) % len];
                advice.push_uint(anchor, w);
                advice.push_uint(pred, w);
                pos += self.t;
            }
        }
        Ok(advice)
    }

    fn answer_impl(
        &self,
        advice: &BitString,
        q: usize,
        oracle: &mut OracleTape,
    ) -> Result<u64, DsError> {
        let y = q as u64;
        // Phase 1: forward walk until an anchor (long cycles) or until the
        // predecessor shows up directly (short cycles).
        let mut cur = y;
        let mut rewound = None;
        for _ in 0..self.t {
            if let Some(pred) = self.lookup_anchor(advice, cur) {
                rewound = Some(pred);
                break;
            }
            let next = oracle.read(cur as usize)?;
            if next == y {
                return Ok(cur);
            }
            cur = next;
        }
        let mut cur = match rewound.or_else(|| self.lookup_anchor(advice, cur)) {
            Some(pred) => pred,
            None => return Err(DsError::Unanswerable { q }),
        };
        // Phase 2: at most t forward probes from the rewound point.
        for _ in 0..self.t {
            let next = oracle.read(cur as usize)?;
            if next == y {
                return Ok(cur);
            }
            cur = next;
        }
        Err(DsError::Unanswerable { q })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ds::{answer, preprocess};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn random_perm(n: usize, rng: &mut impl rand::Rng) -> Vec<u64> {
        let mut p: Vec<u64> = (0..n as u64).collect();
        p.shuffle(rng);
        p
    }

    #[test]
    fn trivial_table_identity_example() {
        let ds = InvTrivialTable::new(4).unwrap();
        let tape = OracleTape::new(vec![0, 1, 2, 3]);
        let advice = preprocess(&ds, &tape).unwrap();
        assert_eq!(advice.len(), 8);
        let decoded: Vec<u64> = (0..4).map(|y| advice.read_uint(y * 2, 2).unwrap()).collect();
        assert_eq!(decoded, vec![0, 1, 2, 3]);
        let mut tape = OracleTape::new(vec![0, 1, 2, 3]);
        for y in 0..4 {
            assert_eq!(answer(&ds, &advice, y, &mut tape).unwrap(), y as u64);
            assert!(tape.read_log().is_empty());
        }
    }

    #[test]
    fn trivial_table_min_preimage_convention() {
        let ds = InvTrivialTable::new(4).unwrap();
        // f = (1, 1, 3, 3): preimage of 0 and 2 is empty -> 0.
        let tape = OracleTape::new(vec![1, 1, 3, 3]);
        let advice = preprocess(&ds, &tape).unwrap();
        let mut tape = OracleTape::new(vec![1, 1, 3, 3]);
        let answers: Vec<u64> =
            (0..4).map(|y| answer(&ds, &advice, y, &mut tape).unwrap()).collect();
        assert_eq!(answers, vec![0, 0, 0, 2]);
    }

    #[test]
    fn trivial_scan_reads_everything() {
        let ds = InvTrivialScan::new(3).unwrap();
        let mut tape = OracleTape::new(vec![2, 0, 1]);
        let advice = preprocess(&ds, &tape).unwrap();
        assert!(advice.is_empty());
        assert_eq!(answer(&ds, &advice, 2, &mut tape).unwrap(), 0);
        assert_eq!(tape.read_log(), &[0, 1, 2]);
    }

    #[test]
    fn inv_block_identity_example() {
        let ds = InvBlock::new(4, 2).unwrap();
        let tape = OracleTape::new(vec![0, 1, 2, 3]);
        let advice = preprocess(&ds, &tape).unwrap();
        // Every inverse lands in its own block: four flag bits, nothing else.
        assert_eq!(advice.len(), 4);
        for y in 0..4 {
            assert!(advice.bit(y).unwrap());
        }
    }

    #[test]
    fn inv_block_out_of_block_entry() {
        let ds = InvBlock::new(4, 2).unwrap();
        let f = vec![2u64, 3, 0, 1];
        let tape = OracleTape::new(f.clone());
        let advice = preprocess(&ds, &tape).unwrap();
        // f^-1(0) = 2, outside block {0,1}: flag 0 then the value 2.
        assert!(!advice.bit(0).unwrap());
        assert_eq!(advice.read_uint(1, 2).unwrap(), 2);
        let mut tape = OracleTape::new(f);
        assert_eq!(answer(&ds, &advice, 0, &mut tape).unwrap(), 2);
        assert_eq!(tape.read_log(), &[0, 1]);
    }

    #[test]
    fn inv_block_rejects_non_permutations() {
        let ds = InvBlock::new(4, 2).unwrap();
        let tape = OracleTape::new(vec![0, 0, 1, 2]);
        assert!(matches!(
            preprocess(&ds, &tape),
            Err(DsError::NotAPermutation { .. })
        ));
    }

    #[test]
    fn inv_block_probes_are_input_independent() {
        let ds = InvBlock::new(8, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = random_perm(8, &mut rng);
        let g = random_perm(8, &mut rng);
        for q in 0..8 {
            let mut tf = OracleTape::new(f.clone());
            let mut tg = OracleTape::new(g.clone());
            let af = preprocess(&ds, &tf).unwrap();
            let ag = preprocess(&ds, &tg).unwrap();
            answer(&ds, &af, q, &mut tf).unwrap();
            answer(&ds, &ag, q, &mut tg).unwrap();
            assert_eq!(tf.read_log(), tg.read_log());
            assert_eq!(tf.read_log(), ds.query_set(q).unwrap().as_slice());
        }
    }

    #[test]
    fn hellman_eight_cycle_example() {
        // f = the 8-cycle x -> x + 1: anchors every 2 steps -> 4 pairs.
        let ds = Hellman::new(8, 2).unwrap();
        let f: Vec<u64> = (0..8).map(|x| (x + 1) % 8).collect();
        let mut tape = OracleTape::new(f);
        let advice = preprocess(&ds, &tape).unwrap();
        assert_eq!(advice.len(), 4 * 2 * 3);
        let got = answer(&ds, &advice, 5, &mut tape).unwrap();
        assert_eq!(got, 4);
        assert!(tape.read_log().len() <= 4, "reads {:?}", tape.read_log());
    }

    #[test]
    fn hellman_fixed_points_need_no_anchors() {
        let ds = Hellman::new(6, 3).unwrap();
        let mut tape = OracleTape::new(vec![0, 1, 2, 3, 4, 5]);
        let advice = preprocess(&ds, &tape).unwrap();
        assert!(advice.is_empty());
        for y in 0..6 {
            assert_eq!(answer(&ds, &advice, y, &mut tape).unwrap(), y as u64);
            assert_eq!(tape.read_log().len(), 1);
        }
    }

    #[test]
    fn hellman_inverts_random_permutations_within_budget() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for &n in &[8usize, 16, 33] {
            for &t in &[1usize, 2, 4, 7] {
                if t > n {
                    continue;
                }
                let ds = Hellman::new(n, t).unwrap();
                for _ in 0..10 {
                    let f = random_perm(n, &mut rng);
                    let inv = permutation_inverse(&f).unwrap();
                    let mut tape = OracleTape::new(f);
                    let advice = preprocess(&ds, &tape).unwrap();
                    assert!(advice.len() * t <= 4 * n * index_bits(n));
                    for y in 0..n {
                        let got = answer(&ds, &advice, y, &mut tape).unwrap();
                        assert_eq!(got, inv[y] as u64, "n={n} t={t} y={y}");
                        assert!(tape.read_log().len() <= 2 * t);
                    }
                }
            }
        }
    }

    #[test]
    fn all_inverters_agree_with_scan_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let f = random_perm(12, &mut rng);
            let inv = permutation_inverse(&f).unwrap();
            let structures: Vec<Box<dyn SystematicDs>> = vec![
                Box::new(InvTrivialTable::new(12).unwrap()),
                Box::new(InvTrivialScan::new(12).unwrap()),
                Box::new(InvBlock::new(12, 3).unwrap()),
                Box::new(Hellman::new(12, 3).unwrap()),
            ];
            for ds in structures {
                let mut tape = OracleTape::new(f.clone());
                let advice = preprocess(ds.as_ref(), &tape).unwrap();
                for y in 0..12 {
                    let got = answer(ds.as_ref(), &advice, y, &mut tape).unwrap();
                    assert_eq!(got, inv[y] as u64, "{} y={y}", ds.name());
                }
            }
        }
    }
}
