// SPDX-License-Identifier: Apache-2.0
//! Seeded instance families and the standard corpora built from them.
//!
//! A corpus is a family plus a seed range: instance `i` is generated from
//! seed `seed + i` alone, so every report can be regenerated from the seed
//! it records.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::claims::{
    collision_ensemble_report, verify_at_least_two, verify_harper, verify_light_mass,
    verify_power_bound, verify_ratio_bound,
};
use super::coupling::{acceptance, couple_report};
use super::entropy_checks::{
    containment_set, verify_avg_to_tail, verify_chain_bound, verify_entropy_deviation,
    verify_mixture_bound, verify_second_moment_tail,
};
use super::lipschitz::{verify_enforcement, verify_lipschitz_after_conditioning, AssignmentSampler};
use super::report::{ExperimentReport, Relation};
use crate::analysis::{
    output_distribution, tv_distance, tv_lower_bound_via_collision, Distribution,
    IndependentEnsemble, OutcomeSet, SetKind,
};
use crate::error::Result;
use crate::forest::{query_profile, BucketStructure, DecisionForest, Symbol};
use crate::samplers::{random_forest, uniform_perm_distribution, ForestGenSpec};
use crate::{rng, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Containment,
    MixtureBound,
    ChainBound,
    EntropyDeviation,
    SecondMomentTail,
    AverageToTail,
    Harper,
    AtLeastTwo,
    LightMass,
    PowerBound,
    RatioBound,
    Coupling,
    CollisionTv,
    CollisionEnsemble,
    Enforcement,
    LipschitzAfterConditioning,
}

impl Family {
    pub const ALL: [Family; 16] = [
        Family::Containment,
        Family::MixtureBound,
        Family::ChainBound,
        Family::EntropyDeviation,
        Family::SecondMomentTail,
        Family::AverageToTail,
        Family::Harper,
        Family::AtLeastTwo,
        Family::LightMass,
        Family::PowerBound,
        Family::RatioBound,
        Family::Coupling,
        Family::CollisionTv,
        Family::CollisionEnsemble,
        Family::Enforcement,
        Family::LipschitzAfterConditioning,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Containment => "containment",
            Family::MixtureBound => "mixture-bound",
            Family::ChainBound => "chain-bound",
            Family::EntropyDeviation => "entropy-deviation",
            Family::SecondMomentTail => "second-moment-tail",
            Family::AverageToTail => "average-to-tail",
            Family::Harper => "harper",
            Family::AtLeastTwo => "at-least-two",
            Family::LightMass => "light-mass",
            Family::PowerBound => "power-bound",
            Family::RatioBound => "ratio-bound",
            Family::Coupling => "coupling",
            Family::CollisionTv => "collision-tv",
            Family::CollisionEnsemble => "collision-ensemble",
            Family::Enforcement => "enforcement",
            Family::LipschitzAfterConditioning => "lipschitz-after-conditioning",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `count` instances of `family` with seeds `seed..seed + count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
    pub count: usize,
    /// Monte-Carlo runs per instance, for the families that sample.
    #[serde(default)]
    pub trials: Option<u64>,
}

/// A list of corpora, as read from a config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub corpora: Vec<CorpusSpec>,
}

impl CorpusSpec {
    pub fn new(family: Family, seed: u64, count: usize) -> Self {
        Self {
            family,
            seed,
            count,
            trials: None,
        }
    }
}

/// The standard corpora with their stated sizes.
pub fn standard_corpora() -> Vec<CorpusSpec> {
    use Family::*;
    let base = |f: Family, count: usize| CorpusSpec::new(f, 1000 * (f as u64 + 1), count);
    vec![
        base(Containment, 500),
        base(MixtureBound, 200),
        base(ChainBound, 100),
        base(EntropyDeviation, 200),
        base(SecondMomentTail, 100),
        base(AverageToTail, 100),
        base(Harper, 100),
        base(AtLeastTwo, 500),
        base(LightMass, 500),
        base(PowerBound, 1),
        base(RatioBound, 10),
        base(Coupling, 100),
        base(CollisionTv, 100),
        base(CollisionEnsemble, 50),
        CorpusSpec {
            trials: Some(1000),
            ..base(Enforcement, 50)
        },
        CorpusSpec {
            trials: Some(10_000),
            ..base(LipschitzAfterConditioning, 30)
        },
    ]
}

/// Runs every instance of the corpus; reports come back in instance order.
pub fn run_corpus(spec: &CorpusSpec, budget: u64) -> Result<Vec<ExperimentReport>> {
    let per_instance: Vec<Result<Vec<ExperimentReport>>> = (0..spec.count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed + i;
            let reports = run_instance(spec.family, seed, spec.trials, budget)?;
            Ok(reports
                .into_iter()
                .map(|mut r| {
                    r.instance_id = format!("{}#{seed}/{}", spec.family, r.instance_id);
                    if r.seed.is_none() {
                        r.seed = Some(seed);
                    }
                    r
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in per_instance {
        out.extend(r?);
    }
    Ok(out)
}

/// Reports for the single instance of `family` generated from `seed`.
pub fn run_instance(family: Family, seed: u64, trials: Option<u64>, budget: u64) -> Result<Vec<ExperimentReport>> {
    let mut r = rng::seeded(seed);
    let one = |x: ExperimentReport| Ok(vec![x]);
    match family {
        Family::Containment => {
            let d = random_distribution(&mut r, 3, 4, false)?;
            let h = crate::analysis::entropy(&d);
            let k = if r.gen_bool(0.3) { h } else { h + r.gen_range(0.0..1.5) };
            one(containment_set(&d, k)?.1)
        }
        Family::MixtureBound => one(verify_mixture_bound(&random_distribution(&mut r, 4, 3, true)?)),
        Family::ChainBound => {
            let f = random_forest(&forest_spec(&mut r, 6, 3, 4, 3, seed))?;
            let parts = r.gen_range(1..=3.min(f.s()));
            one(verify_chain_bound(&f, &random_partition(&mut r, f.s(), parts), budget)?)
        }
        Family::EntropyDeviation => {
            let f = random_forest(&forest_spec(&mut r, 5, 3, 4, 3, seed))?;
            (0..f.s()).map(|c| verify_entropy_deviation(&f, c, budget)).collect()
        }
        Family::SecondMomentTail | Family::AverageToTail => {
            let spec = ForestGenSpec {
                sigma: 2,
                bot_prob: 0.0,
                ..forest_spec(&mut r, 8, 3, 6, 3, seed)
            };
            let f = random_forest(&spec)?;
            let eps = [0.5, 0.25, 0.125];
            if family == Family::SecondMomentTail {
                one(verify_second_moment_tail(&f, &eps, budget)?)
            } else {
                one(verify_avg_to_tail(&f, &eps, budget)?)
            }
        }
        Family::Harper => {
            let set = random_dense_set(&mut r, 12)?;
            (1..=6).map(|k| verify_harper(&set, k, budget)).collect()
        }
        Family::AtLeastTwo => {
            let l = r.gen_range(1..=20);
            let alpha = r.gen_range(0.001..=0.125);
            let mut q: Vec<f64> = (0..l)
                .map(|_| if r.gen_bool(0.2) { alpha } else { r.gen_range(0.0..=alpha) })
                .collect();
            let total: f64 = q.iter().sum();
            if total > 0.125 {
                q.iter_mut().for_each(|x| *x *= 0.125 / total);
            }
            one(verify_at_least_two(&q, alpha)?)
        }
        Family::LightMass => {
            let n = [16, 64, 256][r.gen_range(0..3)];
            loop {
                let p = random_pmf(&mut r, n);
                let top = crate::analysis::entropy_of_pmf(&p) / (n as f64).log2();
                let floor = 4.0 / n as f64;
                if top > floor * 1.001 {
                    let c = r.gen_range(floor * 1.0005..=top);
                    return one(verify_light_mass(&p, c)?);
                }
            }
        }
        Family::PowerBound => one(verify_power_bound(2000)),
        Family::RatioBound => one(verify_ratio_bound(1000, 16, seed)),
        Family::Coupling => {
            let mut attempt = 0u64;
            loop {
                let s = r.gen_range(1..=16);
                let spec = ForestGenSpec {
                    s,
                    lambda: 2,
                    m: 1,
                    sigma: 2,
                    depth: r.gen_range(1..=6),
                    stop_prob: 0.15,
                    bot_prob: 0.0,
                    seed: seed.wrapping_mul(31).wrapping_add(attempt),
                    ..Default::default()
                };
                let tree = random_forest(&spec)?.tree(0).clone();
                if acceptance(tree.root()) >= 1.0 / 16.0 {
                    return one(couple_report(&tree, s, 2.0)?);
                }
                attempt += 1;
            }
        }
        Family::CollisionTv => {
            let n = r.gen_range(2..=4usize);
            let f = if seed.is_multiple_of(100) {
                DecisionForest::constant(r.gen_range(1..=4), n as Symbol, n as Symbol, &vec![0; n])?
            } else {
                let spec = ForestGenSpec {
                    s: r.gen_range(1..=6),
                    lambda: r.gen_range(2..=4),
                    m: n,
                    sigma: n as Symbol,
                    depth: r.gen_range(1..=3),
                    bot_prob: 0.0,
                    stop_prob: 0.15,
                    seed,
                    ..Default::default()
                };
                random_forest(&spec)?
            };
            one(collision_tv_report(&f, budget)?)
        }
        Family::CollisionEnsemble => {
            let m = r.gen_range(1..=12);
            let n = r.gen_range(1..=8);
            let rows = (0..m)
                .map(|_| {
                    let mut p = random_pmf(&mut r, n + 1);
                    if r.gen_bool(0.5) && p[n] < 1.0 {
                        let bot = p[n];
                        p[n] = 0.0;
                        p.iter_mut().for_each(|x| *x /= 1.0 - bot);
                    }
                    p
                })
                .collect();
            let e = IndependentEnsemble::new(n, rows)?;
            one(collision_ensemble_report(&e, trials.unwrap_or(crate::DEFAULT_TRIALS), seed)?)
        }
        Family::Enforcement => {
            let spec = ForestGenSpec {
                stop_prob: 0.1,
                ..forest_spec(&mut r, 8, 3, 8, 3, seed)
            };
            let f = random_forest(&spec)?;
            let mu = [0.5, 1.0, 1.5][r.gen_range(0..3)];
            let eps = [0.5, 0.25, 0.125][r.gen_range(0..3)];
            one(verify_enforcement(&f, mu, eps, trials.unwrap_or(1000), seed)?)
        }
        Family::LipschitzAfterConditioning => {
            let f = random_forest(&forest_spec(&mut r, 8, 3, 6, 3, seed))?;
            let mu = [1.0, 2.0][r.gen_range(0..2)];
            let delta = query_profile(&f, mu, Mode::Exact, budget)?.max_tail();
            let sampler = if r.gen_bool(0.5) {
                let spec = ForestGenSpec {
                    s: f.s(),
                    lambda: f.lambda(),
                    m: 1,
                    sigma: 2,
                    depth: r.gen_range(1..=3),
                    stop_prob: 0.1,
                    seed: seed ^ 0x5eed,
                    ..Default::default()
                };
                AssignmentSampler::Tree(random_forest(&spec)?.tree(0).clone())
            } else {
                let mut cells: Vec<usize> = (0..f.s()).collect();
                cells.shuffle(&mut r);
                cells.truncate(r.gen_range(1..=3.min(f.s())));
                AssignmentSampler::Cells(cells)
            };
            one(verify_lipschitz_after_conditioning(
                &f,
                mu,
                delta,
                &sampler,
                trials.unwrap_or(10_000),
                seed,
                budget,
            )?)
        }
    }
}

/// `Pr[not a permutation]` against the exact distance to uniform permutations.
pub fn collision_tv_report(f: &DecisionForest, budget: u64) -> Result<ExperimentReport> {
    let n = f.m();
    let lower = tv_lower_bound_via_collision(f, n, Mode::Exact, budget)?.value;
    let tv = tv_distance(&output_distribution(f, budget)?, &uniform_perm_distribution(n)?)?;
    Ok(ExperimentReport::check("collision-tv", format!("n={n}"), lower, Relation::AtMost, tv)
        .with_aux("tv", tv))
}

fn forest_spec(r: &mut rng::Rng, max_s: usize, max_alpha: Symbol, max_m: usize, max_d: usize, seed: u64) -> ForestGenSpec {
    ForestGenSpec {
        s: r.gen_range(1..=max_s),
        lambda: r.gen_range(2..=max_alpha),
        m: r.gen_range(1..=max_m),
        sigma: r.gen_range(2..=max_alpha),
        depth: r.gen_range(1..=max_d),
        stop_prob: r.gen_range(0.0..0.4),
        bot_prob: if r.gen_bool(0.3) { 0.2 } else { 0.0 },
        seed,
        ..Default::default()
    }
}

/// Random probability vector with a random amount of skew and sparsity.
fn random_pmf(r: &mut rng::Rng, n: usize) -> Vec<f64> {
    let skew = [1.0, 2.0, 4.0, 8.0][r.gen_range(0..4)];
    let keep = r.gen_range(0.2..=1.0);
    let mut w: Vec<f64> = (0..n)
        .map(|_| if r.gen_bool(keep) { r.gen::<f64>().powf(skew) } else { 0.0 })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[r.gen_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn random_distribution(r: &mut rng::Rng, max_arity: usize, max_alpha: Symbol, with_bot: bool) -> Result<Distribution> {
    let arity = r.gen_range(1..=max_arity);
    let sigma = r.gen_range(if with_bot { 1 } else { 2 }..=max_alpha);
    let alphabet = sigma + with_bot as Symbol;
    let bot_rate = r.gen_range(0.3..0.9);
    let support = r.gen_range(1..=12);
    let skew = [1.0, 3.0, 8.0][r.gen_range(0..3)];
    let mut weights = BTreeMap::new();
    for _ in 0..support {
        let x: Vec<Symbol> = (0..arity)
            .map(|_| {
                if with_bot && r.gen_bool(bot_rate) {
                    sigma
                } else {
                    r.gen_range(0..sigma)
                }
            })
            .collect();
        *weights.entry(x).or_insert(0.0) += r.gen::<f64>().powf(skew) + 1e-6;
    }
    Distribution::from_weights(arity, alphabet, with_bot.then_some(sigma), weights)
}

fn random_partition(r: &mut rng::Rng, s: usize, parts: usize) -> BucketStructure {
    let mut cells: Vec<usize> = (0..s).collect();
    cells.shuffle(r);
    let mut cuts: Vec<usize> = (1..s).collect();
    cuts.shuffle(r);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut buckets = Vec::with_capacity(parts);
    let mut start = 0;
    for c in cuts.into_iter().chain([s]) {
        buckets.push(cells[start..c].to_vec());
        start = c;
    }
    BucketStructure::new(s, buckets).expect("cuts form a partition")
}

/// A subset of `{0,1}^s` of density at least 1/8: scattered points, a
/// Hamming ball or a subcube.
fn random_dense_set(r: &mut rng::Rng, s: usize) -> Result<OutcomeSet> {
    let size = 1u64 << s;
    let members: Vec<Vec<Symbol>> = match r.gen_range(0..3) {
        0 => {
            let rho = r.gen_range(0.125..0.5);
            let mut m: Vec<u64> = (0..size).filter(|_| r.gen_bool(rho)).collect();
            while (m.len() as u64) * 8 < size {
                m.push(r.gen_range(0..size));
                m.sort_unstable();
                m.dedup();
            }
            m.into_iter().map(|i| crate::analysis::unpack(i, s, 2)).collect()
        }
        1 => {
            let center: Vec<Symbol> = (0..s).map(|_| r.gen_range(0..2)).collect();
            let radius = r.gen_range(4..=s / 2 + 1);
            (0..size)
                .map(|i| crate::analysis::unpack(i, s, 2))
                .filter(|x| crate::analysis::hamming_distance(x, &center) <= radius)
                .collect()
        }
        _ => {
            let fixed = r.gen_range(1..=3);
            let mut cells: Vec<usize> = (0..s).collect();
            cells.shuffle(r);
            let pin: Vec<(usize, Symbol)> = cells[..fixed].iter().map(|&c| (c, r.gen_range(0..2))).collect();
            (0..size)
                .map(|i| crate::analysis::unpack(i, s, 2))
                .filter(|x| pin.iter().all(|&(c, v)| x[c] == v))
                .collect()
        }
    };
    OutcomeSet::new(s, 2, members, SetKind::Custom)
}
