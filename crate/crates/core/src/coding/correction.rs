//! The correction game: a supervisor sees all players' blocks and sends each
//! player a short prefix-free message steering the joint output into a
//! codebook.
//!
//! The supervisor picks the codeword minimizing the total encoded message
//! length (ties broken toward the lexicographically smallest codeword) and
//! tells player i the difference block alpha_i XOR w_i, encoded sparsely when
//! its Hamming weight is low and raw otherwise.

use super::CodingError;
use crate::bits::BitString;
use rand::{Rng, SeedableRng};

/// Elias-gamma code for x >= 1: floor(log2 x) zeros, then x's bits from the
/// leading 1 down.
pub fn gamma_encode(x: u64, out: &mut BitString) {
    debug_assert!(x >= 1);
    let width = 64 - x.leading_zeros() as usize;
    for _ in 0..width - 1 {
        out.push_bit(false);
    }
    out.push_uint(x, width);
}

pub fn gamma_len(x: u64) -> usize {
    debug_assert!(x >= 1);
    2 * (64 - x.leading_zeros() as usize) - 1
}

pub fn gamma_decode(bits: &BitString, mut pos: usize) -> Result<(u64, usize), CodingError> {
    let truncated = || CodingError::MalformedMessage { detail: "truncated gamma code".into() };
    let mut zeros = 0usize;
    loop {
        let b = bits.bit(pos).map_err(|_| truncated())?;
        pos += 1;
        if b {
            break;
        }
        zeros += 1;
        if zeros > 63 {
            return Err(CodingError::MalformedMessage { detail: "gamma code overlong".into() });
        }
    }
    let rest = bits.read_uint(pos, zeros).map_err(|_| truncated())?;
    Ok(((1u64 << zeros) | rest, pos + zeros))
}

fn position_bits(m: usize) -> usize {
    crate::ds::index_bits(m)
}

/// Encoded length of a difference block of the given Hamming weight: the
/// cheaper of the sparse form (mode bit, gamma(weight + 1), positions) and
/// the raw form (mode bit, m bits).
pub fn block_code_len(weight: u32, m: usize) -> usize {
    let sparse = 1 + gamma_len(weight as u64 + 1) + weight as usize * position_bits(m);
    sparse.min(1 + m)
}

/// Prefix-free encoding of one difference block (m <= 32 bits).
pub fn encode_diff_block(d: u64, m: usize) -> Result<BitString, CodingError> {
    if m > 32 || (m < 64 && d >= 1u64 << m) {
        return Err(CodingError::BlockOutOfRange { block: d, m });
    }
    let weight = d.count_ones();
    let mut out = BitString::new();
    let sparse = 1 + gamma_len(weight as u64 + 1) + weight as usize * position_bits(m);
    if sparse < 1 + m {
        out.push_bit(false);
        gamma_encode(weight as u64 + 1, &mut out);
        for pos in 0..m {
            if d >> pos & 1 == 1 {
                out.push_uint(pos as u64, position_bits(m));
            }
        }
    } else {
        out.push_bit(true);
        out.push_uint(d, m);
    }
    Ok(out)
}

pub fn decode_diff_block(
    bits: &BitString,
    pos: usize,
    m: usize,
) -> Result<(u64, usize), CodingError> {
    let truncated = || CodingError::MalformedMessage { detail: "truncated block code".into() };
    let raw_mode = bits.bit(pos).map_err(|_| truncated())?;
    if raw_mode {
        let d = bits.read_uint(pos + 1, m).map_err(|_| truncated())?;
        return Ok((d, pos + 1 + m));
    }
    let (wplus, mut at) = gamma_decode(bits, pos + 1)?;
    let weight = wplus - 1;
    let mut d = 0u64;
    for _ in 0..weight {
        let p = bits.read_uint(at, position_bits(m)).map_err(|_| truncated())?;
        if p >= m as u64 {
            return Err(CodingError::MalformedMessage {
                detail: format!("bit position {p} outside block of {m}"),
            });
        }
        d |= 1 << p;
        at += position_bits(m);
    }
    Ok((d, at))
}

/// Packs a bit string into one symbol: a leading 1 above the payload keeps
/// the length recoverable. Usable for strings up to 63 bits.
pub fn pack_bits(bits: &BitString) -> u64 {
    debug_assert!(bits.len() < 64);
    let mut word = 1u64 << bits.len();
    for i in 0..bits.len() {
        if bits.bit(i).unwrap() {
            word |= 1 << i;
        }
    }
    word
}

pub fn unpack_bits(word: u64) -> Result<BitString, CodingError> {
    if word == 0 {
        return Err(CodingError::MalformedMessage { detail: "packed symbol 0".into() });
    }
    let len = 63 - word.leading_zeros() as usize;
    let mut bits = BitString::new();
    for i in 0..len {
        bits.push_bit(word >> i & 1 == 1);
    }
    Ok(bits)
}

/// A set of codewords, each an ell-tuple of m-bit blocks.
#[derive(Debug, Clone)]
pub enum Codebook {
    Explicit(ExplicitCode),
    Affine(AffineCode),
}

impl Codebook {
    pub fn m(&self) -> usize {
        match self {
            Codebook::Explicit(c) => c.m,
            Codebook::Affine(c) => c.m,
        }
    }

    pub fn ell(&self) -> usize {
        match self {
            Codebook::Explicit(c) => c.ell,
            Codebook::Affine(c) => c.ell,
        }
    }

    pub fn size_log2(&self) -> f64 {
        match self {
            Codebook::Explicit(c) => (c.words.len() as f64).log2(),
            Codebook::Affine(c) => (c.m * c.ell - c.rows.len()) as f64,
        }
    }

    pub fn contains(&self, w: &[u64]) -> bool {
        match self {
            Codebook::Explicit(c) => c.words.iter().any(|word| word == w),
            Codebook::Affine(c) => c.contains(w),
        }
    }

    /// The cost-minimal codeword for the given blocks; ties break to the
    /// lexicographically smallest codeword (blocks compared in order).
    pub fn nearest(&self, alpha: &[u64]) -> Result<Vec<u64>, CodingError> {
        let expected = self.ell();
        if alpha.len() != expected {
            return Err(CodingError::WrongInputCount { expected, got: alpha.len() });
        }
        let m = self.m();
        for &a in alpha {
            if m < 64 && a >= 1u64 << m {
                return Err(CodingError::BlockOutOfRange { block: a, m });
            }
        }
        match self {
            Codebook::Explicit(c) => c.nearest(alpha),
            Codebook::Affine(c) => Ok(c.nearest(alpha)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExplicitCode {
    m: usize,
    ell: usize,
    words: Vec<Vec<u64>>,
}

impl ExplicitCode {
    pub fn new(m: usize, words: Vec<Vec<u64>>) -> Result<Self, CodingError> {
        if words.is_empty() {
            return Err(CodingError::EmptyCodebook);
        }
        let ell = words[0].len();
        for w in &words {
            if w.len() != ell {
                return Err(CodingError::WrongInputCount { expected: ell, got: w.len() });
            }
            for &b in w {
                if m > 32 || (m < 64 && b >= 1u64 << m) {
                    return Err(CodingError::BlockOutOfRange { block: b, m });
                }
            }
        }
        Ok(Self { m, ell, words })
    }

    /// Every codeword of an affine code, for cross-checking; only for tiny
    /// codes.
    pub fn from_affine(code: &AffineCode) -> Result<Self, CodingError> {
        let total_bits = code.m * code.ell;
        if total_bits > 20 {
            return Err(CodingError::SearchSpaceTooLarge {
                tables: 1u128 << total_bits,
                limit: 1 << 20,
            });
        }
        let mut words = Vec::new();
        for x in 0..1u64 << total_bits {
            let blocks = unpack_blocks(x, code.m, code.ell);
            if code.contains(&blocks) {
                words.push(blocks);
            }
        }
        Self::new(code.m, words)
    }

    fn nearest(&self, alpha: &[u64]) -> Result<Vec<u64>, CodingError> {
        let mut best: Option<(usize, &Vec<u64>)> = None;
        for w in &self.words {
            let cost: usize = alpha
                .iter()
                .zip(w)
                .map(|(&a, &b)| block_code_len((a ^ b).count_ones(), self.m))
                .sum();
            best = match best {
                None => Some((cost, w)),
                Some((bc, bw)) => {
                    if cost < bc || (cost == bc && w.as_slice() < bw.as_slice()) {
                        Some((cost, w))
                    } else {
                        Some((bc, bw))
                    }
                }
            };
        }
        Ok(best.expect("nonempty by construction").1.clone())
    }
}

fn unpack_blocks(x: u64, m: usize, ell: usize) -> Vec<u64> {
    let mask = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    (0..ell).map(|j| x >> (j * m) & mask).collect()
}

fn pack_blocks(blocks: &[u64], m: usize) -> u64 {
    blocks.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | b << (j * m))
}

/// An affine subspace {x : Ax = c} of {0,1}^(m*ell), m*ell <= 64, with A of
/// full row rank so the code size is exactly 2^(m*ell - rank).
#[derive(Debug, Clone)]
pub struct AffineCode {
    m: usize,
    ell: usize,
    rows: Vec<u64>,
    target: u64,
}

impl AffineCode {
    pub fn random(m: usize, ell: usize, rank: usize, seed: u64) -> Result<Self, CodingError> {
        let total = m * ell;
        if m == 0 || m > 32 || ell == 0 || total > 64 || rank == 0 || rank > total {
            return Err(CodingError::MalformedMessage {
                detail: format!("unsupported code shape m={m} ell={ell} rank={rank}"),
            });
        }
        let mask = if total == 64 { u64::MAX } else { (1u64 << total) - 1 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<u64> = Vec::with_capacity(rank);
        let mut pivots = [0u64; 64];
        while rows.len() < rank {
            let candidate = rng.random::<u64>() & mask;
            // XOR-basis insertion: a candidate that reduces to zero is
            // dependent on the accepted rows and gets resampled.
            let mut x = candidate;
            for bit in (0..total).rev() {
                if x >> bit & 1 == 0 {
                    continue;
                }
                if pivots[bit] == 0 {
                    pivots[bit] = x;
                    rows.push(candidate);
                    break;
                }
                x ^= pivots[bit];
            }
        }
        let target_mask = if rank == 64 { u64::MAX } else { (1u64 << rank) - 1 };
        let target = rng.random::<u64>() & target_mask;
        Ok(Self { m, ell, rows, target })
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn syndrome(&self, x: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u64, |acc, (r, &row)| acc | (((row & x).count_ones() as u64 & 1) << r))
    }

    pub fn contains(&self, blocks: &[u64]) -> bool {
        blocks.len() == self.ell && self.syndrome(pack_blocks(blocks, self.m)) == self.target
    }

    /// Exact minimum-cost coset member via dynamic programming over block
    /// syndromes; reconstruction picks the smallest block value at each step,
    /// which yields the lexicographically smallest optimum.
    fn nearest(&self, alpha: &[u64]) -> Vec<u64> {
        let states = 1usize << self.rows.len();
        let values = 1u64 << self.m;
        const INF: usize = usize::MAX / 2;
        let sig: Vec<Vec<usize>> = (0..self.ell)
            .map(|j| (0..values).map(|v| self.syndrome(v << (j * self.m)) as usize).collect())
            .collect();
        let cost = |j: usize, v: u64| block_code_len((alpha[j] ^ v).count_ones(), self.m);
        // suffix[j][s]: cheapest choice of blocks j.. with syndrome s.
        let mut suffix = vec![vec![INF; states]; self.ell + 1];
        suffix[self.ell][0] = 0;
        for j in (0..self.ell).rev() {
            for v in 0..values {
                let c = cost(j, v);
                let sg = sig[j][v as usize];
                for s in 0..states {
                    let next = suffix[j + 1][s ^ sg].saturating_add(c);
                    if next < suffix[j][s] {
                        suffix[j][s] = next;
                    }
                }
            }
        }
        let mut remaining = self.target as usize;
        let mut out = Vec::with_capacity(self.ell);
        for j in 0..self.ell {
            let want = suffix[j][remaining];
            for v in 0..values {
                let sg = sig[j][v as usize];
                if cost(j, v).saturating_add(suffix[j + 1][remaining ^ sg]) == want {
                    out.push(v);
                    remaining ^= sg;
                    break;
                }
            }
        }
        debug_assert_eq!(out.len(), self.ell);
        out
    }
}

#[derive(Debug, Clone)]
pub struct CorrectionRun {
    pub chosen: Vec<u64>,
    pub betas: Vec<BitString>,
    pub gammas: Vec<u64>,
    pub total_beta_bits: usize,
    /// 3l + 2l log2(sqrt(eps/2) m + 1) + sqrt(eps/8) m l log2(2/eps).
    pub reference_bound_bits: f64,
    /// The coarser m*l/4 simplification of the same bound.
    pub quarter_bound_bits: f64,
}

pub fn reference_bound_bits(epsilon: f64, m: usize, ell: usize) -> f64 {
    let (m, l) = (m as f64, ell as f64);
    3.0 * l
        + 2.0 * l * ((epsilon / 2.0).sqrt() * m + 1.0).log2()
        + (epsilon / 8.0).sqrt() * m * l * (2.0 / epsilon).log2()
}

/// One round of the game: pick the codeword, encode the differences, and
/// decode them back so every output gamma_i really is a decoder product.
pub fn correction_protocol(
    codebook: &Codebook,
    alpha: &[u64],
    epsilon: f64,
) -> Result<CorrectionRun, CodingError> {
    let m = codebook.m();
    let chosen = codebook.nearest(alpha)?;
    let mut betas = Vec::with_capacity(alpha.len());
    let mut gammas = Vec::with_capacity(alpha.len());
    let mut total = 0usize;
    for (&a, &w) in alpha.iter().zip(&chosen) {
        let beta = encode_diff_block(a ^ w, m)?;
        total += beta.len();
        let (gamma, consumed) = decode_diff_block(&beta, 0, m)?;
        debug_assert_eq!(consumed, beta.len());
        betas.push(beta);
        gammas.push(gamma);
    }
    Ok(CorrectionRun {
        chosen,
        betas,
        gammas,
        total_beta_bits: total,
        reference_bound_bits: reference_bound_bits(epsilon, m, codebook.ell()),
        quarter_bound_bits: (m * codebook.ell()) as f64 / 4.0,
    })
}
