//! End-to-end acceptance checks for the whole pipeline, one test per
//! criterion. Each test prints a single PASS line with the measured
//! quantities; informational figures (beta totals, density inequalities)
//! are reported, never gated.

use std::rc::Rc;

use ncclab::bits::BitString;
use ncclab::circuits::{
    bits_to_cells, build_inversion_circuit, build_sorting_network, cells_to_bits, circuit_to_ds,
    eval_circuit, find_common_bits,
};
use ncclab::coding::correction::{
    block_code_len, correction_protocol, decode_diff_block, reference_bound_bits, AffineCode,
    Codebook, ExplicitCode,
};
use ncclab::coding::search::search_coding_rate;
use ncclab::coding::supervisor::{
    augment_with_supervisor, combined_supervisor_scheme, measure_beta_budgets,
    supervisor_flow_audit,
};
use ncclab::coding::{audit_scheme, execute_scheme, Edge, Network};
use ncclab::ds::{
    answer, index_bits, preprocess, Hellman, InvBlock, OracleTape, PolyTableKind, SystematicDs,
};
use ncclab::field::{ffft, ffft_inverse, naive_dft, FieldElement, PrimeField, RootOfUnity};
use ncclab::flow::{
    flow_rate, flow_rate_by_paths, pair_density_check, parse_network_file, undirect,
};
use ncclab::reduction::{
    audit_reduction, build_layered_graph, inversion_coding_scheme, poly_fixing,
    prune_high_degree, run_inversion_scheme, run_poly_scheme, select_bucket, suggested_distance,
    CensusPlan, PrunedNetwork,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUTTERFLY: &str = "\
network directed 6 7 2
e 0 2 1
e 1 2 1
e 2 3 1
e 3 4 1
e 3 5 1
e 1 4 1
e 0 5 1
p 0 4
p 1 5
";

fn values(xs: &[FieldElement]) -> Vec<u64> {
    xs.iter().map(|x| x.value()).collect()
}

fn random_vectors(p: u64, n: usize, count: usize, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.random_range(0..p)).collect()).collect()
}

fn elements(field: PrimeField, v: &[u64]) -> Vec<FieldElement> {
    v.iter().map(|&x| field.element(x)).collect()
}

fn permutations(n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n as u64 {
            if !cur.contains(&v) {
                cur.push(v);
                rec(n, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, &mut cur, &mut out);
    out
}

/// The n=8, t=2, q=4 block-inverter reduction every structural check runs on.
fn block_reduction_8() -> (InvBlock, PrunedNetwork) {
    let ds = InvBlock::new(8, 2).unwrap();
    let graph = build_layered_graph(&ds, index_bits(8)).unwrap();
    let mut pruned = prune_high_degree(graph, 4);
    let d = suggested_distance(8, 4, ds.t_queries());
    pruned.choose_shift(d);
    (ds, pruned)
}

#[test]
fn transform_round_trips_and_matches_naive_dft() {
    for &(p, n) in &[(17u64, 16usize), (257, 1 << 8)] {
        let field = PrimeField::new(p).unwrap();
        let root = RootOfUnity::find(field, n as u64).unwrap();
        for v in random_vectors(p, n, 1000, 0xF0F0 + p) {
            let coeffs = elements(field, &v);
            let fwd = ffft(&coeffs, &root).unwrap();
            assert_eq!(values(&ffft_inverse(&fwd, &root).unwrap()), v);
            assert_eq!(values(&fwd), values(&naive_dft(&coeffs, &root).unwrap()));
        }
    }
    println!("PASS transform: 1000 round trips + naive-DFT matches over GF(17) n=16 and GF(257) n=256, exact");
}

#[test]
fn scaled_inverse_transform_is_forward_at_inverse_root() {
    for &(p, n) in &[(17u64, 16usize), (257, 1 << 8)] {
        let field = PrimeField::new(p).unwrap();
        let root = RootOfUnity::find(field, n as u64).unwrap();
        let back = root.inverse();
        for v in random_vectors(p, n, 1000, 0xF0F0 + p) {
            let elems = elements(field, &v);
            let lhs = ffft_inverse(&elems, &root).unwrap();
            let rhs = ffft(&elems, &back).unwrap();
            for (l, r) in lhs.iter().zip(&rhs) {
                assert_eq!(field.mul(n as u64 % p, l.value()), r.value());
            }
        }
    }
    println!("PASS inverse identity: n * inverse(beta, sigma) = forward(beta, sigma^-1), 1000 vectors per field, exact");
}

#[test]
fn anchored_inverter_stays_inside_measured_budgets() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_product = 0usize;
    for &n in &[8usize, 16, 32, 64] {
        for &t in &[1usize, 2, 4, 8] {
            let ds = Hellman::new(n, t).unwrap();
            for _ in 0..50 {
                let mut table: Vec<u64> = (0..n as u64).collect();
                table.shuffle(&mut rng);
                let mut inverse = vec![0u64; n];
                for (x, &y) in table.iter().enumerate() {
                    inverse[y as usize] = x as u64;
                }
                let mut tape = OracleTape::new(table);
                let advice = preprocess(&ds, &tape).unwrap();
                let product = advice.len() * t;
                assert!(
                    product <= 4 * n * index_bits(n),
                    "s*t = {product} exceeds 4 n ceil(log n) = {} at n={n} t={t}",
                    4 * n * index_bits(n),
                );
                worst_product = worst_product.max(product);
                for y in 0..n {
                    assert_eq!(answer(&ds, &advice, y, &mut tape).unwrap(), inverse[y]);
                    assert!(tape.read_log().len() <= 2 * t);
                }
            }
        }
    }
    println!("PASS anchored inverter: 16 (n,t) grid points x 50 permutations, reads <= 2t, worst s*t = {worst_product}");
}

#[test]
fn reduction_has_exact_structural_counts() {
    let (_, pruned) = block_reduction_8();
    assert_eq!(pruned.edges_before_prune, 2 * 2 * 8);
    assert_eq!(pruned.graph.edges().len(), 32);
    let mut outdeg = vec![0usize; 3 * 8];
    for &(u, _) in pruned.graph.edges() {
        outdeg[u] += 1;
    }
    let max_out = outdeg.iter().copied().max().unwrap();
    assert!(max_out <= 4 * 2, "out-degree {max_out} exceeds q*t = 8");
    assert!(pruned.removed.len() <= 2 * 8 / 4);
    println!(
        "PASS structural audit: |E| = 32 = 2tn, max out-degree {max_out} <= 8 = qt, removed {} <= 4 = 2n/q",
        pruned.removed.len(),
    );
}

#[test]
fn bucket_scheme_recovers_every_member_at_all_targets() {
    let (ds, pruned) = block_reduction_8();
    let census = select_bucket(&pruned, &ds, &CensusPlan::Exhaustive).unwrap();
    assert!(census.exhaustive);
    assert_eq!(census.census_size, 40320);
    assert!(!census.bucket.members.is_empty());
    let net = pruned.to_network().unwrap();
    let scheme = inversion_coding_scheme(
        &pruned,
        Rc::new(InvBlock::new(8, 2).unwrap()),
        &census.bucket.fixing,
    );
    for x in &census.bucket.members {
        let run = run_inversion_scheme(&pruned, &ds, &census.bucket.fixing, x).unwrap();
        assert_eq!(&run.outputs, x, "two-pass replay differs at the targets");
        let tr = execute_scheme(&net, &scheme, x).unwrap();
        assert_eq!(&tr.outputs, x, "shared-engine replay differs at the targets");
    }
    println!(
        "PASS two-pass inversion: largest bucket {} of 8! = 40320, every member recovered by both engines",
        census.bucket.members.len(),
    );
}

#[test]
fn polynomial_scheme_telescopes_at_every_shift() {
    let field = PrimeField::new(17).unwrap();
    let root = RootOfUnity::find(field, 16).unwrap();
    let alphas = random_vectors(17, 16, 200, 6);
    for kind in [PolyTableKind::Eval, PolyTableKind::Interp] {
        let ds = kind.build(root);
        let graph = build_layered_graph(ds.as_ref(), field.element_bits()).unwrap();
        let mut pruned = prune_high_degree(graph, 8);
        for b in 0..16 {
            pruned.set_shift(b, 1);
            for alpha in &alphas {
                let fixing = poly_fixing(&pruned, kind, &root, alpha).unwrap();
                let run = run_poly_scheme(&pruned, kind, &root, &fixing, alpha).unwrap();
                assert_eq!(&run.outputs, alpha, "telescoping failed: kind={kind} b={b}");
            }
        }
    }
    println!("PASS telescoping: p'(sigma^-l)/n recovers alpha at all 16 shifts x 16 targets, 200 vectors, both table kinds");
}

#[test]
fn butterfly_gap_is_directed_only() {
    let net = parse_network_file(BUTTERFLY).unwrap();
    let sol = flow_rate(&net).unwrap();
    assert!((sol.rate - 0.5).abs() <= 1e-6, "directed flow rate {}", sol.rate);

    let search = search_coding_rate(&net, 1).unwrap();
    assert_eq!(search.best_rate_bits, 1, "exhaustive search missed the rate-1 scheme");
    let witness = search.witness.expect("rate-1 witness");
    let tuples: Vec<Vec<u64>> =
        (0..2u64).flat_map(|a| (0..2u64).map(move |b| vec![a, b])).collect();
    let audit = audit_scheme(&net, &witness, &tuples).unwrap();
    assert_eq!(audit.correct, 4);
    assert!(audit.capacity_respected);
    // Any correct rate-1 witness is forced to xor across the middle edge
    // (up to relabeling): same symbol on equal-parity inputs, different
    // otherwise.
    let mid: Vec<u64> = tuples
        .iter()
        .map(|t| execute_scheme(&net, &witness, t).unwrap().edge_messages[2])
        .collect();
    assert_eq!(mid[0], mid[3]);
    assert_eq!(mid[1], mid[2]);
    assert_ne!(mid[0], mid[1]);

    let usol = flow_rate(&undirect(&net)).unwrap();
    assert!(usol.rate >= 1.0 - 1e-6, "undirected flow rate {}", usol.rate);
    println!(
        "PASS butterfly: directed flow {:.6}, coding rate 1 bit (xor witness), undirected flow {:.6} (no gap)",
        sol.rate, usol.rate,
    );
}

#[test]
fn lp_rate_matches_path_formulation_on_small_fixtures() {
    let netw = |directed: bool, n: usize, edges: &[(usize, usize, f64)], pairs: &[(usize, usize)]| {
        Network::new(
            directed,
            n,
            edges.iter().map(|&(u, v, cap)| Edge { u, v, cap }).collect(),
            pairs.to_vec(),
        )
        .unwrap()
    };
    let butterfly = parse_network_file(BUTTERFLY).unwrap();
    let fixtures: Vec<(&str, Network)> = vec![
        ("un(butterfly)", undirect(&butterfly)),
        ("butterfly", butterfly),
        ("path3", netw(true, 3, &[(0, 1, 1.0), (1, 2, 1.0)], &[(0, 2)])),
        ("uneven-path", netw(true, 3, &[(0, 1, 0.3), (1, 2, 0.7)], &[(0, 2)])),
        ("shared-edge", netw(true, 2, &[(0, 1, 1.0)], &[(0, 1), (0, 1)])),
        (
            "diamond",
            netw(true, 4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)], &[(0, 3)]),
        ),
        (
            "crossing",
            netw(
                true,
                6,
                &[(0, 2, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (3, 5, 1.0)],
                &[(0, 4), (1, 5)],
            ),
        ),
        (
            "triangle",
            netw(false, 3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[(0, 1), (1, 2)]),
        ),
        (
            "disjoint",
            netw(true, 6, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 2.0), (4, 5, 2.0)], &[(0, 2), (3, 5)]),
        ),
    ];
    for (name, net) in &fixtures {
        let sol = flow_rate(net).unwrap();
        let by_paths = flow_rate_by_paths(net).unwrap();
        let rel = (sol.rate - by_paths).abs() / by_paths.abs().max(1.0);
        assert!(rel <= 1e-7, "{name}: edge LP {} vs path LP {by_paths}", sol.rate);
        assert!(sol.max_violation <= 1e-9, "{name}: residual {}", sol.max_violation);
    }
    println!(
        "PASS lp oracle: edge and path formulations agree within 1e-7 on {} fixtures, residuals < 1e-9",
        fixtures.len(),
    );
}

#[test]
fn correction_always_lands_in_the_codebook() {
    let epsilon = 1.0 / 16.0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total_bits = 0usize;
    for i in 0..100u64 {
        let code = AffineCode::random(8, 8, 4, 1000 + i).unwrap();
        let cb = Codebook::Affine(code);
        assert_eq!(cb.size_log2(), 60.0);
        let alpha: Vec<u64> = (0..8).map(|_| rng.random_range(0..256u64)).collect();
        let run = correction_protocol(&cb, &alpha, epsilon).unwrap();

        let corrected: Vec<u64> =
            alpha.iter().zip(&run.gammas).map(|(&a, &g)| a ^ g).collect();
        assert_eq!(corrected, run.chosen);
        assert!(cb.contains(&corrected), "alpha xor gamma left the codebook");

        // Prefix-freeness, operationally: the concatenated blocks decode
        // with no lookahead and land exactly on the final bit.
        let mut stream = BitString::new();
        for b in &run.betas {
            stream.extend(b);
        }
        let mut pos = 0;
        for (&g, beta) in run.gammas.iter().zip(&run.betas) {
            assert_eq!(beta.len(), block_code_len(g.count_ones(), 8));
            let (decoded, next) = decode_diff_block(&stream, pos, 8).unwrap();
            assert_eq!(decoded, g);
            pos = next;
        }
        assert_eq!(pos, stream.len());
        assert_eq!(run.total_beta_bits, stream.len());
        total_bits += run.total_beta_bits;
    }
    println!(
        "PASS correction game: 100 instances, |F| = 2^60, outputs in F, betas prefix-free; mean total {:.2} bits vs reference bound {:.2} bits (informational)",
        total_bits as f64 / 100.0,
        reference_bound_bits(epsilon, 8, 8),
    );
}

#[test]
fn supervisor_makes_the_bucket_scheme_total() {
    let epsilon = 1.0 / 16.0;
    let ds = InvBlock::new(4, 2).unwrap();
    let graph = build_layered_graph(&ds, index_bits(4)).unwrap();
    let mut pruned = prune_high_degree(graph, 4);
    pruned.choose_shift(suggested_distance(4, 4, ds.t_queries()));
    let census = select_bucket(&pruned, &ds, &CensusPlan::Exhaustive).unwrap();
    let base_net = pruned.to_network().unwrap();
    let base = inversion_coding_scheme(
        &pruned,
        Rc::new(InvBlock::new(4, 2).unwrap()),
        &census.bucket.fixing,
    );

    // The bucket members are exactly the tuples the base scheme handles.
    let codebook =
        Rc::new(Codebook::Explicit(ExplicitCode::new(2, census.bucket.members.clone()).unwrap()));
    let meas = measure_beta_budgets(&codebook, epsilon).unwrap();
    let r_bits = index_bits(4) as f64;
    let aug = augment_with_supervisor(&base_net, r_bits, &meas.budgets).unwrap();
    let combined =
        combined_supervisor_scheme(&base_net, &aug, base, Rc::clone(&codebook), epsilon).unwrap();

    for perm in permutations(4) {
        let tr = execute_scheme(&aug, &combined, &perm).unwrap();
        assert_eq!(tr.outputs, perm, "supervisor scheme misdelivered {perm:?}");
    }
    let all_tuples: Vec<Vec<u64>> = (0..256u64)
        .map(|code| (0..4).map(|i| (code >> (2 * i)) & 3).collect())
        .collect();
    let audit = audit_scheme(&aug, &combined, &all_tuples).unwrap();
    assert_eq!(audit.correct, 256, "correction must extend the scheme to every tuple");
    assert!(audit.capacity_respected);

    let k = 4usize;
    let sol = flow_rate(&aug).unwrap();
    let supervisor = base_net.n_vertices() + k;
    let through: f64 = (0..k).map(|i| sol.inflow(i, supervisor)).sum();
    let direct: Vec<f64> = (0..k)
        .map(|i| {
            let a = sol
                .arcs
                .iter()
                .position(|&(u, v)| u == base_net.n_vertices() + i && v == i)
                .expect("direct edge");
            sol.arc_flow(i, a)
        })
        .collect();
    let fa = supervisor_flow_audit(k, r_bits, &meas.budgets, sol.rate, through, &direct);

    let kr = k as f64 * r_bits;
    assert_eq!(fa.supervisor_in_capacity, kr);
    let sum_beta: f64 = meas.budgets.iter().sum();
    assert_eq!(fa.supervisor_out_capacity, 2.0 * sum_beta);
    assert!(fa.through_le_half_incident);
    let incident = fa.supervisor_in_capacity + fa.supervisor_out_capacity;
    // kr + 2*sum_beta <= (3/2) kr exactly when sum_beta <= kr/4.
    assert_eq!(incident <= 1.5 * kr + 2e-12, fa.small_beta_precondition);
    let verdict = if fa.small_beta_precondition {
        assert!(!fa.vacuous);
        assert!(incident <= 1.5 * kr + 1e-9);
        assert!(fa.through_le_three_quarter_kr.is_some());
        format!("incident {incident:.3} <= (3/2)kr = {:.3}, claim {:?}", 1.5 * kr, fa.claim_holds)
    } else {
        assert!(fa.vacuous);
        assert!(fa.claim_holds.is_none());
        format!(
            "vacuous at desk scale: sum E|beta| = {sum_beta:.3} > kr/4 = {:.3} (flagged, not asserted)",
            kr / 4.0,
        )
    };
    println!(
        "PASS supervisor: all 24 permutations (and all 256 tuples) decoded on the augmented network; {verdict}",
    );
}

#[test]
fn circuit_pipeline_yields_a_faithful_structure() {
    let circuit = build_inversion_circuit(4).unwrap();
    let cut = find_common_bits(&circuit, 4);
    let ds = circuit_to_ds(circuit.clone(), &cut, 2).unwrap();
    assert!(!ds.adaptive());
    assert_eq!(ds.s_bits(), cut.cut.len(), "advice must be exactly the cut values");

    let mut perm_count = 0;
    for code in 0..256u64 {
        let cells: Vec<u64> = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
        // Independent reference: least preimage, zero when none exists.
        let expected: Vec<u64> = (0..4u64)
            .map(|y| (0..4u64).find(|&x| cells[x as usize] == y).unwrap_or(0))
            .collect();
        let bits = cells_to_bits(&cells, 2).unwrap();
        assert_eq!(bits_to_cells(&eval_circuit(&circuit, &bits).unwrap(), 2), expected);
        let mut tape = OracleTape::new(cells.clone());
        let advice = preprocess(&ds, &tape).unwrap();
        for (q, &want) in expected.iter().enumerate() {
            assert_eq!(answer(&ds, &advice, q, &mut tape).unwrap(), want);
        }
        let mut sorted = cells.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() == 4 {
            perm_count += 1;
        }
    }
    assert_eq!(perm_count, 24);

    // Non-adaptivity, differentially: the declared query set alone
    // determines the answer, full tape or not.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in 0..4 {
        let q_set = ds.query_set(q).expect("declared query set");
        for _ in 0..25 {
            let cells: Vec<u64> = (0..4).map(|_| rng.random_range(0..4u64)).collect();
            let mut full = OracleTape::new(cells.clone());
            let advice = preprocess(&ds, &full).unwrap();
            let on_full = answer(&ds, &advice, q, &mut full).unwrap();
            assert!(full.read_log().iter().all(|p| q_set.contains(p)));
            let masked: Vec<Option<u64>> =
                (0..4).map(|i| q_set.contains(&i).then(|| cells[i])).collect();
            let mut partial = OracleTape::from_partial(masked);
            assert_eq!(answer(&ds, &advice, q, &mut partial).unwrap(), on_full);
        }
    }

    let sorter = build_sorting_network(4, 2).unwrap();
    for code in 0..256u64 {
        let cells: Vec<u64> = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
        let bits = cells_to_bits(&cells, 2).unwrap();
        let out = bits_to_cells(&eval_circuit(&sorter, &bits).unwrap(), 2);
        let mut sorted = cells;
        sorted.sort_unstable();
        assert_eq!(out, sorted);
    }
    println!(
        "PASS circuit pipeline: cut of {} gates -> correct structure on all 256 tables (24 permutations included); bitonic sorter sorts all 256 inputs",
        cut.cut.len(),
    );
}

#[test]
fn density_arithmetic_is_reported_never_asserted() {
    // Inversion run: the audit report embeds the full density arithmetic.
    let (ds, pruned) = block_reduction_8();
    let census = select_bucket(&pruned, &ds, &CensusPlan::Exhaustive).unwrap();
    let report = audit_reduction(&pruned, &ds, &census, 1.0 / 16.0).unwrap();
    let dr = &report.density;
    assert_eq!(dr.delta, pruned.long_fraction);
    assert_eq!(dr.distance, pruned.distance);
    assert_eq!(dr.edges, report.edges);
    assert_eq!(dr.pairs, 8);
    assert!((dr.delta_prime - (dr.delta - 5.0 / 6.0) / 10.0).abs() < 1e-15);
    assert!((dr.edges_per_pair - dr.edges as f64 / 8.0).abs() < 1e-15);
    assert!((dr.bound - dr.delta_prime * dr.distance as f64).abs() < 1e-15);
    assert_eq!(dr.vacuous, dr.delta <= 5.0 / 6.0);
    if dr.vacuous {
        assert!(dr.holds.is_none(), "vacuous cases carry no verdict");
    } else {
        assert_eq!(dr.holds, Some(dr.edges_per_pair + 1e-12 >= dr.bound));
    }

    // Polynomial run: same arithmetic on its pruned network.
    let field = PrimeField::new(17).unwrap();
    let root = RootOfUnity::find(field, 16).unwrap();
    let pds = PolyTableKind::Eval.build(root);
    let graph = build_layered_graph(pds.as_ref(), field.element_bits()).unwrap();
    let mut poly_net = prune_high_degree(graph, 8);
    poly_net.choose_shift(suggested_distance(16, 8, pds.t_queries()));
    let pdr = pair_density_check(
        poly_net.graph.edges().len(),
        16,
        poly_net.long_fraction,
        poly_net.distance,
    );
    assert_eq!(pdr.vacuous, pdr.delta <= 5.0 / 6.0);
    assert_eq!(pdr.holds.is_some(), !pdr.vacuous);

    // Both branches of the flag behave.
    let vac = pair_density_check(32, 8, 0.5, 2);
    assert!(vac.vacuous && vac.holds.is_none());
    let live = pair_density_check(32, 8, 1.0, 2);
    assert!(!live.vacuous);
    assert_eq!(live.holds, Some(true));

    println!(
        "PASS density arithmetic: delta {:.4} -> delta' {:.6}, |E|/k = {} vs bound {:.6} ({}) on the inversion run; poly run {}",
        dr.delta,
        dr.delta_prime,
        dr.edges_per_pair,
        dr.bound,
        if dr.vacuous { "vacuous, flagged" } else { "evaluated" },
        if pdr.vacuous { "vacuous, flagged" } else { "evaluated" },
    );
}
