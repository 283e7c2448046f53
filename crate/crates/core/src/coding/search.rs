//! Exhaustive search for the best achievable coding rate on a small
//! directed network: every encoder table is enumerated and a rate counts as
//! achieved when some table assignment lets every target decode its message.

use super::{CodingError, CodingScheme, Network, SchemeFn};

/// Hard ceiling on encoder-table assignments examined per rate.
pub const TABLE_SEARCH_LIMIT: u128 = 1 << 28;

const DECODER_KEYSPACE_LIMIT: u128 = 1 << 20;

#[derive(Debug)]
pub struct RateSearch {
    /// Largest rate (bits per message) with a correct scheme, 0 if none.
    pub best_rate_bits: u32,
    pub witness: Option<CodingScheme>,
    pub tables_tried: u128,
    /// Rates whose table space exceeded the search limit, best first.
    pub skipped_rates: Vec<u32>,
}

struct VertexPlan {
    pair_sources: Vec<usize>, // pairs sourced here, in pair order
    in_edges: Vec<usize>,
    out_edges: Vec<usize>,
    dims: Vec<u64>,
}

fn saturating_product(dims: &[u64]) -> u128 {
    dims.iter().fold(1u128, |a, &d| a.saturating_mul(d as u128))
}

/// Tries rates `min(max_rate_bits, 2)` down to 1 and returns the first that
/// admits a correct scheme, with the lexicographically first witness (tables
/// enumerated in ascending mixed-radix order from all zeros). Each edge
/// carries an alphabet of `2^min(floor(cap), 2)` symbols. Rates whose table
/// space is too large are skipped; if every rate is skipped the search fails.
pub fn search_coding_rate(net: &Network, max_rate_bits: u32) -> Result<RateSearch, CodingError> {
    if max_rate_bits > 2 {
        return Err(CodingError::AlphabetTooLarge { bits: max_rate_bits });
    }
    let topo = net.topological_order()?;
    let k = net.pairs().len();
    let edge_bits: Vec<u32> =
        net.edges().iter().map(|e| (e.cap.floor() as u32).min(2)).collect();
    let edge_alphabets: Vec<u64> = edge_bits.iter().map(|&b| 1u64 << b).collect();
    let bits_limit = TABLE_SEARCH_LIMIT.trailing_zeros() as u128;

    let mut tables_tried = 0u128;
    let mut skipped = Vec::new();
    let mut smallest_skipped = u128::MAX;
    for rate in (1..=max_rate_bits.min(2)).rev() {
        let msg_size = 1u64 << rate;
        let plans: Vec<VertexPlan> = (0..net.n_vertices())
            .map(|v| {
                let pair_sources: Vec<usize> = net
                    .pairs()
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &(s, _))| (s == v).then_some(i))
                    .collect();
                let in_edges = net.in_edges(v).to_vec();
                let out_edges = net.out_edges(v).to_vec();
                let dims: Vec<u64> = pair_sources
                    .iter()
                    .map(|_| msg_size)
                    .chain(in_edges.iter().map(|&e| edge_alphabets[e]))
                    .collect();
                VertexPlan { pair_sources, in_edges, out_edges, dims }
            })
            .collect();

        // Table cells, flattened edge by edge; cells range over the edge's
        // alphabet, so the assignment count is 2^(total cell bits).
        // Single-symbol edges need no cells.
        let mut cell_radix: Vec<u64> = Vec::new();
        let mut edge_offset: Vec<usize> = Vec::with_capacity(net.edges().len());
        let mut total_bits = 0u128;
        for (e, edge) in net.edges().iter().enumerate() {
            edge_offset.push(cell_radix.len());
            if edge_bits[e] == 0 {
                continue;
            }
            let combos = saturating_product(&plans[edge.u].dims);
            total_bits = total_bits.saturating_add(combos.saturating_mul(edge_bits[e] as u128));
            if total_bits > bits_limit {
                break;
            }
            cell_radix.extend(std::iter::repeat(edge_alphabets[e]).take(combos as usize));
        }
        let table_count =
            if total_bits > 127 { u128::MAX } else { 1u128 << (total_bits as u32) };
        let msg_combos_wide = saturating_product(&vec![msg_size; k]);
        let dec_keyspace: Vec<u128> = net
            .pairs()
            .iter()
            .map(|&(_, t)| {
                let dims: Vec<u64> =
                    net.in_edges(t).iter().map(|&e| edge_alphabets[e]).collect();
                saturating_product(&dims)
            })
            .collect();
        let max_keyspace = dec_keyspace.iter().copied().max().unwrap_or(1);
        if table_count > TABLE_SEARCH_LIMIT
            || msg_combos_wide > TABLE_SEARCH_LIMIT
            || max_keyspace > DECODER_KEYSPACE_LIMIT
        {
            skipped.push(rate);
            smallest_skipped =
                smallest_skipped.min(table_count.max(msg_combos_wide).max(max_keyspace));
            continue;
        }
        let msg_combos = msg_combos_wide as u64;
        let msg_stride: Vec<u64> = (0..k)
            .scan(1u64, |s, _| {
                let v = *s;
                *s *= msg_size;
                Some(v)
            })
            .collect();

        let mut cells = vec![0u64; cell_radix.len()];
        let mut symbols = vec![0u64; net.edges().len()];
        let mut ins: Vec<u64> = Vec::new();
        // Decoder consistency maps per pair, stamped to avoid clearing.
        let mut dec_stamp: Vec<Vec<u64>> =
            dec_keyspace.iter().map(|&s| vec![0; s as usize]).collect();
        let mut dec_value: Vec<Vec<u64>> =
            dec_keyspace.iter().map(|&s| vec![0; s as usize]).collect();
        let mut stamp = 0u64;

        loop {
            tables_tried += 1;
            stamp += 1;
            let mut ok = true;
            'msgs: for widx in 0..msg_combos {
                for &v in &topo {
                    let plan = &plans[v];
                    if plan.out_edges.is_empty() {
                        continue;
                    }
                    ins.clear();
                    for &i in &plan.pair_sources {
                        ins.push(widx / msg_stride[i] % msg_size);
                    }
                    for &e in &plan.in_edges {
                        ins.push(symbols[e]);
                    }
                    let mut idx = 0u64;
                    for (d, &x) in plan.dims.iter().zip(&ins) {
                        idx = idx * d + x;
                    }
                    for &e in &plan.out_edges {
                        symbols[e] = if edge_bits[e] == 0 {
                            0
                        } else {
                            cells[edge_offset[e] + idx as usize]
                        };
                    }
                }
                for (i, &(_, t)) in net.pairs().iter().enumerate() {
                    let mut key = 0u64;
                    for &e in net.in_edges(t) {
                        key = key * edge_alphabets[e] + symbols[e];
                    }
                    let w_i = widx / msg_stride[i] % msg_size;
                    let slot = key as usize;
                    if dec_stamp[i][slot] == stamp {
                        if dec_value[i][slot] != w_i {
                            ok = false;
                            break 'msgs;
                        }
                    } else {
                        dec_stamp[i][slot] = stamp;
                        dec_value[i][slot] = w_i;
                    }
                }
            }
            if ok {
                let witness = Witness {
                    rate,
                    msg_size,
                    plans: &plans,
                    edge_bits: &edge_bits,
                    edge_alphabets: &edge_alphabets,
                    cells: &cells,
                    edge_offset: &edge_offset,
                    dec_stamp: &dec_stamp,
                    dec_value: &dec_value,
                    stamp,
                }
                .build(net);
                return Ok(RateSearch {
                    best_rate_bits: rate,
                    witness: Some(witness),
                    tables_tried,
                    skipped_rates: skipped,
                });
            }
            // Next assignment in ascending mixed-radix order.
            let mut pos = 0;
            while pos < cells.len() {
                cells[pos] += 1;
                if cells[pos] < cell_radix[pos] {
                    break;
                }
                cells[pos] = 0;
                pos += 1;
            }
            if pos == cells.len() {
                break;
            }
        }
    }
    if !skipped.is_empty() && skipped.len() == max_rate_bits.min(2) as usize {
        return Err(CodingError::SearchSpaceTooLarge {
            tables: smallest_skipped,
            limit: TABLE_SEARCH_LIMIT,
        });
    }
    Ok(RateSearch { best_rate_bits: 0, witness: None, tables_tried, skipped_rates: skipped })
}

struct Witness<'a> {
    rate: u32,
    msg_size: u64,
    plans: &'a [VertexPlan],
    edge_bits: &'a [u32],
    edge_alphabets: &'a [u64],
    cells: &'a [u64],
    edge_offset: &'a [usize],
    dec_stamp: &'a [Vec<u64>],
    dec_value: &'a [Vec<u64>],
    stamp: u64,
}

impl Witness<'_> {
    fn build(&self, net: &Network) -> CodingScheme {
        let encoders: Vec<SchemeFn> = net
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let dims = self.plans[edge.u].dims.clone();
                if self.edge_bits[e] == 0 {
                    return SchemeFn::new(dims.len(), |_| 0);
                }
                let len: usize = dims.iter().product::<u64>() as usize;
                let start = self.edge_offset[e];
                SchemeFn::from_table(dims, self.cells[start..start + len].to_vec())
            })
            .collect();
        let decoders: Vec<SchemeFn> = net
            .pairs()
            .iter()
            .enumerate()
            .map(|(i, &(_, t))| {
                let dims: Vec<u64> =
                    net.in_edges(t).iter().map(|&e| self.edge_alphabets[e]).collect();
                // Keys never observed during verification cannot occur; map
                // them to 0.
                let table: Vec<u64> = self.dec_stamp[i]
                    .iter()
                    .zip(&self.dec_value[i])
                    .map(|(&st, &v)| if st == self.stamp { v } else { 0 })
                    .collect();
                SchemeFn::from_table(dims, table)
            })
            .collect();
        CodingScheme {
            name: format!("searched-rate-{}", self.rate),
            message_sizes: vec![self.msg_size; net.pairs().len()],
            edge_alphabets: self.edge_alphabets.to_vec(),
            encoders,
            decoders,
        }
    }
}
