// SPDX-License-Identifier: Apache-2.0
mod common;

use std::collections::{BTreeMap, BTreeSet};

use cellprobe::analysis::{
    collision_probability, collision_stat, conditional_entropy, distance_map, entropy,
    entropy_of_pmf, hamming_dist_to_set, neighborhood, output_distribution, pack,
    prob_at_least_two, tv_distance, unpack, CollisionSource, Distribution, IndependentEnsemble,
    OutcomeSet, SetKind,
};
use cellprobe::samplers::{fisher_yates, is_permutation, uniform_perm_distribution};
use cellprobe::{Mode, Symbol};
use common::{all_inputs, small_forest};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter("some mass", |w| w.iter().sum::<f64>() > 1e-3)
}

fn on_cube(w: &[f64]) -> Distribution {
    Distribution::from_weights(2, 3, None, w.iter().enumerate().map(|(i, &p)| (unpack(i as u64, 2, 3), p))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tv_is_a_metric(a in weights(9), b in weights(9), c in weights(9)) {
        let (a, b, c) = (on_cube(&a), on_cube(&b), on_cube(&c));
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!(tv_distance(&a, &a).unwrap() == 0.0);
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn conditional_entropy_obeys_chain_rule(f in small_forest(), mask in any::<u64>()) {
        let cells: BTreeSet<usize> = (0..f.s()).filter(|c| mask >> c & 1 == 1).collect();
        let cond = conditional_entropy(&f, &cells, Mode::Exact, 1 << 20).unwrap().value;
        // Oracle: the joint law of (f(u), u_I) from the full cube.
        let inputs = all_inputs(f.s(), f.lambda());
        let mut joint: BTreeMap<Vec<Symbol>, u64> = BTreeMap::new();
        for x in &inputs {
            let mut key = f.eval(x).unwrap();
            key.extend(cells.iter().map(|&c| x[c]));
            *joint.entry(key).or_default() += 1;
        }
        let n = inputs.len() as f64;
        let h_joint = entropy_of_pmf(&joint.values().map(|&c| c as f64 / n).collect::<Vec<_>>());
        let h_cells = cells.len() as f64 * (f.lambda() as f64).log2();
        prop_assert!((h_joint - h_cells - cond).abs() < 1e-9);
        let h = entropy(&output_distribution(&f, 1 << 20).unwrap());
        prop_assert!(cond <= h + 1e-9);
    }

    #[test]
    fn collision_stat_has_bounded_differences(
        z in prop::collection::vec(0u32..6, 1..12),
        at in any::<prop::sample::Index>(),
        v in 0u32..6,
    ) {
        let n = 5;
        let mut w = z.clone();
        w[at.index(z.len())] = v;
        let (a, b) = (collision_stat(&z, n) as i64, collision_stat(&w, n) as i64);
        prop_assert!((a - b).abs() <= 1);
    }

    #[test]
    fn neighborhoods_grow_and_measure_distance(members in prop::collection::btree_set(0u64..81, 1..6), k in 0usize..4) {
        let set = OutcomeSet::new(4, 3, members.iter().map(|&i| unpack(i, 4, 3)), SetKind::Custom).unwrap();
        let nk = neighborhood(&set, k, 1 << 12).unwrap();
        let next = neighborhood(&set, k + 1, 1 << 12).unwrap();
        prop_assert!(set.is_subset(&nk) && nk.is_subset(&next));
        let dist = distance_map(&set, 1 << 12).unwrap();
        for i in 0..81u64 {
            let x = unpack(i, 4, 3);
            let d = hamming_dist_to_set(&x, &set).unwrap();
            prop_assert_eq!(dist[pack(&x, 3) as usize] as usize, d);
            prop_assert_eq!(hamming_dist_to_set(&x, &nk).unwrap(), d.saturating_sub(k));
        }
    }

    #[test]
    fn at_least_two_matches_enumeration(q in prop::collection::vec(0.0f64..=1.0, 0..9)) {
        let mut oracle = 0.0;
        for mask in 0u32..(1 << q.len()) {
            if mask.count_ones() >= 2 {
                oracle += q.iter().enumerate().map(|(i, &p)| if mask >> i & 1 == 1 { p } else { 1.0 - p }).product::<f64>();
            }
        }
        prop_assert!((prob_at_least_two(&q) - oracle).abs() < 1e-12);
    }

    #[test]
    fn ensemble_collision_matches_enumeration(n in 1usize..=3, rows in prop::collection::vec(weights(4), 1..=4)) {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|w| {
                let w = &w[..n + 1];
                let t: f64 = w.iter().sum();
                if t < 1e-3 {
                    let mut r = vec![0.0; n + 1];
                    r[0] = 1.0;
                    r
                } else {
                    w.iter().map(|x| x / t).collect()
                }
            })
            .collect();
        let e = IndependentEnsemble::new(n, rows.clone()).unwrap();
        let m = rows.len();
        let mut oracle = 0.0;
        for idx in 0..((n + 1) as u64).pow(m as u32) {
            let z = unpack(idx, m, (n + 1) as Symbol);
            let p: f64 = z.iter().zip(&rows).map(|(&v, r)| r[v as usize]).product();
            let hit = (0..m).any(|i| (i + 1..m).any(|j| z[i] == z[j] && (z[i] as usize) < n));
            if hit {
                oracle += p;
            }
        }
        let exact = collision_probability(CollisionSource::Ensemble(&e), Mode::Exact, 0).unwrap().value;
        prop_assert!((exact - oracle).abs() < 1e-12);
    }
}

#[test]
fn fisher_yates_is_uniform() {
    let n = 4;
    let table = uniform_perm_distribution(n).unwrap();
    assert_eq!(table.support_size(), 24);
    let draws = 48_000u64;
    let mut counts: BTreeMap<Vec<Symbol>, u64> = BTreeMap::new();
    for seed in 0..draws {
        let p = fisher_yates(n, seed);
        assert!(is_permutation(&p));
        *counts.entry(p).or_default() += 1;
    }
    assert_eq!(counts.len(), 24);
    let expected = draws as f64 / 24.0;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p_value = 1.0 - ChiSquared::new(23.0).unwrap().cdf(stat);
    assert!(p_value > 1e-4, "chi-square {stat}, p = {p_value}");
    for (perm, _) in table.iter() {
        assert!(counts.contains_key(perm));
    }
}
