//! Supervisor augmentation: a network R whose scheme is only correct on a
//! codebook F becomes a network R' that decodes every input, by routing each
//! message through a fresh source and letting one supervisor vertex send
//! correction messages to both ends of every pair.

use super::correction::{
    correction_protocol, decode_diff_block, pack_bits, unpack_bits, Codebook,
};
use super::{CodingError, CodingScheme, Edge, Network, SchemeFn};
use std::rc::Rc;

/// Rounds a capacity up to 1/1024-bit granularity, keeping it positive.
pub fn round_capacity(bits: f64) -> f64 {
    ((bits * 1024.0).ceil() / 1024.0).max(1.0 / 1024.0)
}

/// Measured expected message lengths, the capacities of the supervisor's
/// out-edges.
#[derive(Debug, Clone)]
pub struct BetaMeasurement {
    /// Per-player E|beta_i|, rounded up to 1/1024.
    pub budgets: Vec<f64>,
    pub mean_total_bits: f64,
    pub samples: usize,
}

/// Averages |beta_i| over every input tuple (all 2^(m*ell) of them), so the
/// block count must stay desk-sized.
pub fn measure_beta_budgets(
    codebook: &Codebook,
    epsilon: f64,
) -> Result<BetaMeasurement, CodingError> {
    let m = codebook.m();
    let ell = codebook.ell();
    let total_bits = m * ell;
    if total_bits > 20 {
        return Err(CodingError::SearchSpaceTooLarge {
            tables: 1u128 << total_bits,
            limit: 1 << 20,
        });
    }
    let mask = (1u64 << m) - 1;
    let mut sums = vec![0usize; ell];
    let count = 1u64 << total_bits;
    for x in 0..count {
        let alpha: Vec<u64> = (0..ell).map(|j| x >> (j * m) & mask).collect();
        let run = correction_protocol(codebook, &alpha, epsilon)?;
        for (s, b) in sums.iter_mut().zip(&run.betas) {
            *s += b.len();
        }
    }
    let budgets: Vec<f64> =
        sums.iter().map(|&s| round_capacity(s as f64 / count as f64)).collect();
    let mean_total = sums.iter().sum::<usize>() as f64 / count as f64;
    Ok(BetaMeasurement { budgets, mean_total_bits: mean_total, samples: count as usize })
}

/// Builds R' from R: new sources s'_i (vertex V+i) and a supervisor u
/// (vertex V+k). Edge order: R's edges unchanged, then (s'_i, s_i), (s'_i, u)
/// for each i, then (u, s_i), (u, t_i) for each i. Pairs become (s'_i, t_i).
pub fn augment_with_supervisor(
    net: &Network,
    r_bits: f64,
    beta_budgets: &[f64],
) -> Result<Network, CodingError> {
    if !net.is_directed() {
        return Err(CodingError::NotDirected);
    }
    let k = net.pairs().len();
    if beta_budgets.len() != k {
        return Err(CodingError::WrongInputCount { expected: k, got: beta_budgets.len() });
    }
    if !(r_bits > 0.0) {
        return Err(CodingError::InvalidNetwork { detail: "rate must be positive".into() });
    }
    let v0 = net.n_vertices();
    let supervisor = v0 + k;
    let mut edges = net.edges().to_vec();
    for (i, &(s, _)) in net.pairs().iter().enumerate() {
        edges.push(Edge { u: v0 + i, v: s, cap: r_bits });
        edges.push(Edge { u: v0 + i, v: supervisor, cap: r_bits });
    }
    for (i, &(s, t)) in net.pairs().iter().enumerate() {
        let cap = round_capacity(beta_budgets[i]);
        edges.push(Edge { u: supervisor, v: s, cap });
        edges.push(Edge { u: supervisor, v: t, cap });
    }
    let pairs = net.pairs().iter().enumerate().map(|(i, &(_, t))| (v0 + i, t)).collect();
    Network::new(true, v0 + k + 1, edges, pairs)
}

/// Wraps a base scheme that is correct exactly on `codebook` into a scheme
/// on the augmented network that is correct on every input: sources hand
/// their raw messages to the supervisor, the supervisor steers the tuple
/// into the codebook, and targets undo the correction.
///
/// Requires distinct sources, distinct targets, and no vertex serving as
/// both. The base message spaces must all be 2^m for the codebook's block
/// size m, with one player per pair.
pub fn combined_supervisor_scheme(
    base_net: &Network,
    aug: &Network,
    base: CodingScheme,
    codebook: Rc<Codebook>,
    epsilon: f64,
) -> Result<CodingScheme, CodingError> {
    let shape = |detail: String| Err(CodingError::SchemeShape { detail });
    let e0 = base_net.edges().len();
    let k = base_net.pairs().len();
    let m = codebook.m();
    if codebook.ell() != k {
        return shape(format!("codebook has {} players for {k} pairs", codebook.ell()));
    }
    if base.encoders.len() != e0 || base.decoders.len() != k {
        return shape("base scheme does not fit the base network".into());
    }
    if aug.n_vertices() != base_net.n_vertices() + k + 1
        || aug.edges().len() != e0 + 4 * k
        || aug.edges()[..e0] != base_net.edges()[..]
    {
        return shape("augmented network does not extend the base network".into());
    }
    for &size in &base.message_sizes {
        if size != 1u64 << m {
            return shape(format!("message space {size} is not 2^{m}"));
        }
    }
    let mut src_pair = vec![None; base_net.n_vertices()];
    let mut seen_targets = vec![false; base_net.n_vertices()];
    for (i, &(s, t)) in base_net.pairs().iter().enumerate() {
        if src_pair[s].is_some() {
            return shape(format!("vertex {s} sources two pairs"));
        }
        if seen_targets[t] {
            return shape(format!("vertex {t} is the target of two pairs"));
        }
        src_pair[s] = Some(i);
        seen_targets[t] = true;
    }
    for &(s, _) in base_net.pairs() {
        if seen_targets[s] {
            return shape(format!("vertex {s} is both a source and a target"));
        }
    }
    // Fail fast on an unusable codebook before it is buried in closures.
    correction_protocol(&codebook, &vec![0u64; k], epsilon)?;

    let beta_alphabet = 1u64 << (m + 2);
    let msg_size = 1u64 << m;
    let mut encoders: Vec<SchemeFn> = Vec::with_capacity(e0 + 4 * k);
    let mut alphabets: Vec<u64> = Vec::with_capacity(e0 + 4 * k);
    for (e, enc) in base.encoders.into_iter().enumerate() {
        let tail = base_net.edges()[e].u;
        if src_pair[tail].is_some() {
            // In R' this vertex receives [w'_i, beta_i] and must feed the
            // corrected block into the base encoder.
            if enc.arity() != 1 {
                return shape(format!("base encoder on edge {e} has arity {}", enc.arity()));
            }
            encoders.push(SchemeFn::new(2, move |ins| {
                let beta = unpack_bits(ins[1]).expect("supervisor symbol");
                let (d, _) = decode_diff_block(&beta, 0, m).expect("supervisor message");
                enc.apply(&[ins[0] ^ d])
            }));
        } else {
            encoders.push(enc);
        }
        alphabets.push(base.edge_alphabets[e]);
    }
    for _ in 0..k {
        encoders.push(SchemeFn::new(1, |w| w[0])); // (s'_i, s_i)
        encoders.push(SchemeFn::new(1, |w| w[0])); // (s'_i, u)
        alphabets.push(msg_size);
        alphabets.push(msg_size);
    }
    for i in 0..k {
        for _ in 0..2 {
            let cb = Rc::clone(&codebook);
            encoders.push(SchemeFn::new(k, move |alpha| {
                let run = correction_protocol(&cb, alpha, epsilon).expect("valid blocks");
                pack_bits(&run.betas[i])
            }));
            alphabets.push(beta_alphabet);
        }
    }
    let mut decoders: Vec<SchemeFn> = Vec::with_capacity(k);
    for dec in base.decoders.into_iter() {
        decoders.push(SchemeFn::new(dec.arity() + 1, move |ins| {
            let (orig, beta_in) = ins.split_at(ins.len() - 1);
            let v = dec.apply(orig);
            let beta = unpack_bits(beta_in[0]).expect("supervisor symbol");
            let (d, _) = decode_diff_block(&beta, 0, m).expect("supervisor message");
            v ^ d
        }));
    }
    Ok(CodingScheme {
        name: format!("{}+supervisor", base.name),
        message_sizes: base.message_sizes,
        edge_alphabets: alphabets,
        encoders,
        decoders,
    })
}

/// Flow-side arithmetic for the augmented network: how much of the flow can
/// be forced through the supervisor, and how many commodities must ship at
/// least half their demand over the direct (s'_i, s_i) edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisorAudit {
    pub k: usize,
    pub r_bits: f64,
    pub sum_beta_budgets: f64,
    pub supervisor_in_capacity: f64,
    pub supervisor_out_capacity: f64,
    pub through_supervisor: f64,
    /// Conservation forces through-flow <= half the incident capacity.
    pub through_le_half_incident: bool,
    /// The bound below is only claimed when sum E|beta_i| <= k r / 4.
    pub small_beta_precondition: bool,
    pub through_le_three_quarter_kr: Option<bool>,
    /// |A|: commodities shipping >= rate/2 on their direct edge.
    pub direct_half_count: usize,
    pub direct_lower_bound: f64,
    pub claim_holds: Option<bool>,
    pub vacuous: bool,
}

pub fn supervisor_flow_audit(
    k: usize,
    r_bits: f64,
    beta_budgets: &[f64],
    rate: f64,
    through_supervisor: f64,
    direct_flows: &[f64],
) -> SupervisorAudit {
    let sum_beta: f64 = beta_budgets.iter().sum();
    let in_cap = k as f64 * r_bits;
    let out_cap = 2.0 * sum_beta;
    let through_le_half_incident = through_supervisor <= (in_cap + out_cap) / 2.0 + 1e-9;
    let small_beta = sum_beta <= k as f64 * r_bits / 4.0 + 1e-12;
    let direct_half_count =
        direct_flows.iter().filter(|&&f| f >= rate / 2.0 - 1e-9).count();
    let bound = k as f64 / 6.0;
    let (through_check, claim) = if small_beta {
        let through_ok = through_supervisor <= 0.75 * k as f64 * r_bits + 1e-9;
        let claim = if through_ok {
            Some(direct_half_count as f64 + 1e-9 >= bound)
        } else {
            None
        };
        (Some(through_ok), claim)
    } else {
        (None, None)
    };
    SupervisorAudit {
        k,
        r_bits,
        sum_beta_budgets: sum_beta,
        supervisor_in_capacity: in_cap,
        supervisor_out_capacity: out_cap,
        through_supervisor,
        through_le_half_incident,
        small_beta_precondition: small_beta,
        through_le_three_quarter_kr: through_check,
        direct_half_count,
        direct_lower_bound: bound,
        claim_holds: claim,
        vacuous: !small_beta,
    }
}
