//! Library results checked against independent brute-force computations.

mod common;

use std::collections::HashMap;

use common::{brute_hcct, canonical_text, context_counts, random_trace, threshold};
use hcct::stream_summary::DenseCounters;
use hcct::{
    build_exact_cct, exact_hcct, exact_hot_set, generate_zipf_trace, read_trace, skewness, write_trace, CounterStore,
    ExactCct, Fraction, HcctBuilder, MonitorPool, Trace, TraceEvent, ZipfWorkloadSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

fn frac(n: u64, d: u64) -> Fraction {
    Fraction::new(n, d).unwrap()
}

fn exact_counts(cct: &ExactCct) -> HashMap<Vec<hcct::Frame>, u64> {
    cct.contexts().map(|c| (cct.path(c), cct.count(c))).collect()
}

#[test]
fn text_format_roundtrip_on_fuzzed_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let trace = random_trace(&mut rng, 200, 1 << 20, u32::MAX);
        let mut text = String::new();
        for ev in trace.events() {
            if rng.random_bool(0.05) {
                text.push_str("# noise\n");
            }
            match ev {
                TraceEvent::Call(f) => text.push_str(&format!("C {} {}\n", f.routine.0, f.call_site.0)),
                TraceEvent::Return => text.push_str("R\n"),
            }
        }
        let parsed = read_trace(text.as_bytes()).unwrap();
        assert_eq!(parsed, trace);
        let mut out = Vec::new();
        write_trace(&parsed, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), canonical_text(trace.events()));
    }
}

#[test]
fn exact_cct_matches_stack_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let trace = random_trace(&mut rng, 400, 6, 3);
        let cct = build_exact_cct(&trace).unwrap();
        let oracle = context_counts(trace.events());
        assert_eq!(exact_counts(&cct), oracle);
        assert_eq!(cct.node_count(), oracle.len());
        assert_eq!(cct.n_events(), trace.call_count());
        assert_eq!(cct.contexts().map(|c| cct.count(c)).sum::<u64>(), cct.n_events());
    }
}

#[test]
fn hot_set_and_hcct_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let trace = random_trace(&mut rng, 600, 5, 2);
        let cct = build_exact_cct(&trace).unwrap();
        let oracle = context_counts(trace.events());
        let n = trace.call_count();
        for (pn, pd) in [(0, 1), (1, 100), (1, 20), (1, 5), (1, 2), (1, 1)] {
            let phi = frac(pn, pd);
            let min = threshold(pn, pd, n);
            let mut hot: Vec<_> = exact_hot_set(&cct, phi).into_iter().map(|id| cct.path(id)).collect();
            hot.sort();
            let mut want: Vec<_> = oracle.iter().filter(|(_, &c)| c >= min).map(|(k, _)| k.clone()).collect();
            want.sort();
            assert_eq!(hot, want);

            let hcct = exact_hcct(&cct, phi);
            assert_eq!(exact_counts(&hcct), brute_hcct(&oracle, min));
            // Every leaf of the HCCT is hot.
            for id in hcct.contexts().filter(|&id| hcct.is_leaf(id)) {
                assert!(hcct.count(id) >= min);
            }
        }
    }
}

#[test]
fn exact_hcct_shrinks_as_phi_grows() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let phis: Vec<Fraction> = [0, 1, 2, 5, 10, 25, 50, 100].iter().map(|&p| frac(p, 100)).collect();
    for _ in 0..100 {
        let trace = random_trace(&mut rng, 800, 4, 2);
        let cct = build_exact_cct(&trace).unwrap();
        let trees: Vec<_> = phis.iter().map(|&phi| exact_counts(&exact_hcct(&cct, phi))).collect();
        for pair in trees.windows(2) {
            assert!(pair[1].keys().all(|k| pair[0].contains_key(k)));
        }
    }
}

#[test]
fn space_saving_counts_bracket_true_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let capacity = rng.random_range(1..=20u64);
        let eps = frac(1, capacity);
        let mut pool = MonitorPool::new(eps).unwrap();
        let mut store = DenseCounters::new();
        let mut truth: HashMap<usize, u64> = HashMap::new();
        let universe = rng.random_range(1..=60usize);
        let len = rng.random_range(0..=400);
        let zipf = Zipf::new(universe as f64, rng.random_range(0.0..2.0)).unwrap();
        let mut first_fill: HashMap<usize, bool> = HashMap::new();
        for step in 1..=len {
            let item = zipf.sample(&mut rng) as usize - 1;
            *truth.entry(item).or_default() += 1;
            let full_before = pool.is_full();
            let out = pool.update(item, &mut store);
            if out.newly_monitored {
                first_fill.insert(item, !full_before);
            }
            assert_eq!(out.victim.is_none(), !out.newly_monitored || !full_before);
            let cap = eps.floor_mul(step);
            for &k in pool.slots().iter().flatten() {
                let est = store.count(k);
                let t = truth[&k];
                assert!(est >= t, "count below truth");
                assert!(est - t <= store.error_bound(k), "error beyond recorded bound");
                assert!(est - t <= cap, "error beyond floor(eps N)");
                assert!(store.error_bound(k) <= est);
            }
            if pool.is_full() {
                let true_min = pool.slots().iter().flatten().map(|&k| store.count(k)).min().unwrap();
                assert!(true_min <= cap);
                assert!(pool.min() <= cap);
            }
        }
        // Inserted during the fill phase and never evicted: exact.
        for &k in pool.slots().iter().flatten() {
            if first_fill.get(&k) == Some(&true) && store.error_bound(k) == 0 {
                assert_eq!(store.count(k), truth[&k]);
            }
        }
    }
}

#[test]
fn space_saving_query_is_a_valid_heavy_hitter_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..300 {
        let phi_den = [10u64, 20, 50, 100][rng.random_range(0..4)];
        let phi = frac(1, phi_den);
        let eps = frac(1, phi_den * rng.random_range(2..=6));
        let mut pool = MonitorPool::new(eps).unwrap();
        let mut store = DenseCounters::new();
        let mut truth: HashMap<usize, u64> = HashMap::new();
        let zipf = Zipf::new(500.0, rng.random_range(0.0..1.6)).unwrap();
        let n = rng.random_range(1..20_000u64);
        for _ in 0..n {
            let item = zipf.sample(&mut rng) as usize;
            *truth.entry(item).or_default() += 1;
            pool.update(item, &mut store);
        }
        let hits: HashMap<usize, u64> =
            pool.query(phi, &store).unwrap().into_iter().map(|e| (e.key, e.count)).collect();
        let hot_min = threshold(1, phi_den, n);
        let floor_gap = phi.saturating_sub(eps).floor_mul(n);
        for (item, &t) in &truth {
            if t >= hot_min {
                assert!(hits.contains_key(item), "missed heavy hitter");
            }
        }
        for item in hits.keys() {
            assert!(truth[item] > floor_gap, "returned an item below the epsilon band");
        }
    }
}

#[test]
fn find_min_agrees_with_full_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for capacity in [1usize, 2, 7, 64] {
        let mut pool = MonitorPool::with_capacity(frac(1, capacity as u64), capacity);
        let mut store = DenseCounters::new();
        for _ in 0..50_000 {
            let item = if rng.random_bool(0.3) {
                // A currently monitored item, to exercise plain increments.
                pool.slots().iter().flatten().copied().nth(rng.random_range(0..capacity)).unwrap_or(0)
            } else {
                rng.random_range(0..4 * capacity)
            };
            pool.update(item, &mut store);
            let scan = pool.slots().iter().map(|s| s.map_or(0, |k| store.count(k))).min().unwrap();
            assert_eq!(pool.find_min(&store).unwrap(), scan);
            let idx = pool.min_idx();
            assert_eq!(pool.slots()[idx].map_or(0, |k| store.count(k)), scan);
            let steps = pool.scan_steps();
            assert!(steps <= 2 * capacity as u64 * pool.min() + capacity as u64);
        }
    }
}

#[test]
fn builder_tracks_the_lattice_and_stays_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for round in 0..300 {
        let trace = random_trace(&mut rng, 500, 5, 2);
        let capacity = rng.random_range(1..=8u64);
        let eps = frac(1, capacity);
        let mut b = HcctBuilder::new(eps).unwrap();
        let mut exact = hcct::ExactCctBuilder::new();
        for (i, &ev) in trace.events().iter().enumerate() {
            b.on_event(ev).unwrap();
            exact.on_event(ev).unwrap();
            b.check_invariants().unwrap_or_else(|e| panic!("round {round}, event {i}: {e}"));
            assert_eq!(b.cursor() == hcct::hcct_builder::McctNodeId::ROOT, exact.cursor() == exact.tree().root());
        }
        b.finish_stream();
        let cct = exact.finish();
        let oracle = context_counts(trace.events());
        let live: Vec<_> = b.mcct_nodes().into_iter().map(|id| b.path(id)).collect();
        assert!(live.iter().all(|p| oracle.contains_key(p)));
        assert!(b.pool().len() <= b.pool().capacity());

        // Any phi above epsilon; 3/(2c) for c >= 2, and 1 for a single slot.
        let phi = if capacity == 1 { Fraction::ONE } else { frac(3, 2 * capacity) };
        if phi <= eps {
            continue;
        }
        let report = b.query_hcct(phi).unwrap();
        let reported: Vec<_> = (0..report.nodes.len()).map(|i| report.path(i)).collect();
        for ctx in exact_counts(&exact_hcct(&cct, phi)).keys() {
            assert!(reported.contains(ctx), "exact HCCT node missing from report");
        }
        for ctx in &reported {
            assert!(live.contains(ctx), "report node not in the MCCT");
        }
    }
}

#[test]
fn generated_traces_are_well_formed_and_sized() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10_000 {
        let spec = ZipfWorkloadSpec::new(
            rng.random_range(1..50),
            rng.random_range(1..10),
            rng.random_range(1..300),
            rng.random_range(0.0..2.5),
            rng.random(),
        )
        .unwrap()
        .with_contexts(rng.random_range(1..200))
        .unwrap();
        let trace = generate_zipf_trace(&spec);
        assert_eq!(trace.call_count(), spec.total_calls());
        assert_eq!(trace.open_calls(), 0);
        Trace::from_events(trace.into_events()).unwrap();
    }
}

#[test]
fn zipf_workload_skew_regression() {
    let spec = ZipfWorkloadSpec::new(100, 8, 1_000_000, 1.0, 7).unwrap().with_contexts(10_000).unwrap();
    let cct = build_exact_cct(&generate_zipf_trace(&spec)).unwrap();
    let curve = skewness(&cct).unwrap();
    let top10 = curve.at_percent(10);
    assert!(top10 >= 0.6);
    assert!((top10 - 0.8761).abs() < 5e-4, "top-10% share moved to {top10}");
    assert!(curve.points.windows(2).all(|w| w[0].1 <= w[1].1));
    assert_eq!(*curve.points.last().unwrap(), (1.0, 1.0));
}

#[test]
fn structural_work_is_linear_in_calls() {
    let spec = ZipfWorkloadSpec::new(300, 12, 300_000, 0.8, 3).unwrap().with_contexts(50_000).unwrap();
    let trace = generate_zipf_trace(&spec);
    let mut b = HcctBuilder::new(frac(1, 1000)).unwrap();
    b.run(&trace).unwrap();
    assert!(b.pruned_nodes() <= b.created_nodes());
    assert!(b.structural_work() <= 3 * b.n_events(), "work {} for {} calls", b.structural_work(), b.n_events());
    assert!(b.pool().scan_steps() <= 2 * b.n_events() + b.pool().capacity() as u64);
    b.check_invariants().unwrap();
}
