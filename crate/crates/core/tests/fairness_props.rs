use hetalloc::baselines::{
    fair_queuing, max_min_fair, random_access, round_robin, weighted_fair_queuing, SchedulerInput,
};
use proptest::prelude::*;

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn lex_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-9 {
            return x < y;
        }
    }
    true
}

/// Every integer allocation within demands and capacity.
fn feasible(demands: &[u32], cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<f64>>) {
    if prefix.len() == demands.len() {
        out.push(prefix.iter().map(|&v| v as f64).collect());
        return;
    }
    let used: u32 = prefix.iter().sum();
    for v in 0..=demands[prefix.len()].min(cap - used) {
        prefix.push(v);
        feasible(demands, cap, prefix, out);
        prefix.pop();
    }
}

#[test]
fn max_min_sorted_vector_dominates_every_integer_alternative() {
    let mut checked = 0;
    for n in 1..=3u32 {
        for cap in 0..=12u32 {
            for code in 0..7u32.pow(n) {
                let demands: Vec<u32> = (0..n).map(|i| (code / 7u32.pow(i)) % 7).collect();
                let df: Vec<f64> = demands.iter().map(|&d| d as f64).collect();
                let got = sorted(&max_min_fair(&SchedulerInput::with_demands(cap as f64, &df)));
                let mut alts = Vec::new();
                feasible(&demands, cap, &mut Vec::new(), &mut alts);
                for alt in alts {
                    assert!(lex_le(&sorted(&alt), &got), "cap {cap} demands {demands:?}: {alt:?} beats {got:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}

fn input() -> impl Strategy<Value = SchedulerInput> {
    (0.0..100.0f64, prop::collection::vec(0.0..50.0f64, 1..=8))
        .prop_map(|(cap, demands)| SchedulerInput::with_demands(cap, &demands))
}

proptest! {
    #[test]
    fn allocating_schedulers_stay_within_capacity(input in input(), seed in any::<u64>()) {
        let wfq = weighted_fair_queuing(&input).unwrap();
        for shares in [round_robin(&input), fair_queuing(&input), random_access(&input, seed), max_min_fair(&input), wfq] {
            prop_assert!(shares.iter().all(|&s| s >= 0.0));
            prop_assert!(shares.iter().sum::<f64>() <= input.capacity + 1e-9);
        }
    }

    #[test]
    fn demand_capped_schedulers_respect_demands(input in input()) {
        let wfq = weighted_fair_queuing(&input).unwrap();
        for shares in [max_min_fair(&input), wfq] {
            for (s, u) in shares.iter().zip(&input.users) {
                prop_assert!(*s <= u.demand + 1e-9);
            }
        }
    }
}
