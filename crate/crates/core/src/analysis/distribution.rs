// SPDX-License-Identifier: Apache-2.0
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng as _;
use rayon::prelude::*;

use crate::enumerate::Cube;
use crate::error::{Error, Result};
use crate::forest::{DecisionForest, Symbol};
use crate::{rng, Mode, TOLERANCE};

/// An exact finite probability table over output tuples.
///
/// All outcomes share one arity and take symbols in `[alphabet)`. When `bot`
/// is set, that symbol is ⊥.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    arity: usize,
    alphabet: Symbol,
    bot: Option<Symbol>,
    probs: BTreeMap<Vec<Symbol>, f64>,
}

impl Distribution {
    pub fn new(
        arity: usize,
        alphabet: Symbol,
        bot: Option<Symbol>,
        probs: BTreeMap<Vec<Symbol>, f64>,
    ) -> Result<Self> {
        let mut total = 0.0;
        for (o, &p) in &probs {
            if o.len() != arity {
                return Err(Error::InvalidDistribution(format!(
                    "outcome {o:?} has arity {}, expected {arity}",
                    o.len()
                )));
            }
            if let Some(v) = o.iter().find(|&&v| v >= alphabet) {
                return Err(Error::InvalidDistribution(format!(
                    "symbol {v} outside alphabet of size {alphabet}"
                )));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!("bad probability {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let probs = probs.into_iter().filter(|&(_, p)| p > 0.0).collect();
        Ok(Self {
            arity,
            alphabet,
            bot,
            probs,
        })
    }

    /// Builds from `(outcome, weight)` pairs; weights are normalised.
    pub fn from_weights(
        arity: usize,
        alphabet: Symbol,
        bot: Option<Symbol>,
        weights: impl IntoIterator<Item = (Vec<Symbol>, f64)>,
    ) -> Result<Self> {
        let mut probs: BTreeMap<Vec<Symbol>, f64> = BTreeMap::new();
        for (o, w) in weights {
            *probs.entry(o).or_default() += w;
        }
        let total: f64 = pairwise_sum(&probs.values().copied().collect::<Vec<_>>());
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("total weight is zero".into()));
        }
        for p in probs.values_mut() {
            *p /= total;
        }
        Self::new(arity, alphabet, bot, probs)
    }

    pub fn from_counts(
        arity: usize,
        alphabet: Symbol,
        bot: Option<Symbol>,
        counts: impl IntoIterator<Item = (Vec<Symbol>, u64)>,
    ) -> Result<Self> {
        let counts: Vec<(Vec<Symbol>, u64)> = counts.into_iter().collect();
        let total: u64 = counts.iter().map(|(_, c)| c).sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("no samples".into()));
        }
        let probs = counts
            .into_iter()
            .map(|(o, c)| (o, c as f64 / total as f64))
            .collect();
        Self::new(arity, alphabet, bot, probs)
    }

    pub fn point_mass(outcome: Vec<Symbol>, alphabet: Symbol) -> Result<Self> {
        let arity = outcome.len();
        Self::new(arity, alphabet, None, BTreeMap::from([(outcome, 1.0)]))
    }

    /// Uniform distribution over the given distinct outcomes.
    pub fn uniform(arity: usize, alphabet: Symbol, outcomes: Vec<Vec<Symbol>>) -> Result<Self> {
        Self::from_weights(arity, alphabet, None, outcomes.into_iter().map(|o| (o, 1.0)))
    }

    /// Single-coordinate distribution with `P(i) = probs[i]`.
    pub fn from_pmf(probs: &[f64]) -> Result<Self> {
        let alphabet = probs.len() as Symbol;
        let table = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (vec![i as Symbol], p))
            .collect();
        Self::new(1, alphabet, None, table)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn alphabet(&self) -> Symbol {
        self.alphabet
    }

    pub fn bot(&self) -> Option<Symbol> {
        self.bot
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    /// Support in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Symbol>, f64)> + '_ {
        self.probs.iter().map(|(o, &p)| (o, p))
    }

    pub fn prob(&self, outcome: &[Symbol]) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    /// Probability of the event `{o : pred(o)}`.
    pub fn mass_where(&self, pred: impl Fn(&[Symbol]) -> bool) -> f64 {
        let ps: Vec<f64> = self
            .probs
            .iter()
            .filter(|(o, _)| pred(o))
            .map(|(_, &p)| p)
            .collect();
        pairwise_sum(&ps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.probs.values().copied().collect()
    }

    pub fn same_space(&self, other: &Distribution) -> bool {
        self.arity == other.arity && self.alphabet == other.alphabet
    }

    /// Line-delimited `outcome<TAB>probability` dump; ⊥ is written as `_`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for (o, p) in self.iter() {
            let cells: Vec<String> = o
                .iter()
                .map(|&v| match self.bot {
                    Some(b) if b == v => "_".to_string(),
                    _ => v.to_string(),
                })
                .collect();
            let _ = writeln!(out, "{}\t{}", cells.join(","), p);
        }
        out
    }

    /// Parses [`Distribution::to_dump`] output.
    pub fn from_dump(text: &str, alphabet: Symbol, bot: Option<Symbol>) -> Result<Self> {
        let mut probs = BTreeMap::new();
        let mut arity = None;
        for (lineno, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (o, p) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("line {}: missing tab", lineno + 1)))?;
            let outcome = o
                .split(',')
                .map(|c| match (c.trim(), bot) {
                    ("_", Some(b)) => Ok(b),
                    (c, _) => c
                        .parse::<Symbol>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1))),
                })
                .collect::<Result<Vec<_>>>()?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            arity.get_or_insert(outcome.len());
            probs.insert(outcome, p);
        }
        Self::new(arity.unwrap_or(0), alphabet, bot, probs)
    }
}

/// Pairwise (cascade) summation with a fixed split by index.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Statistical distance `½ Σ_o |a(o) − b(o)|`.
pub fn tv_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    if !a.same_space(b) {
        return Err(Error::MismatchedSpaces(format!(
            "arity/alphabet {}/{} vs {}/{}",
            a.arity, a.alphabet, b.arity, b.alphabet
        )));
    }
    let mut diffs = Vec::with_capacity(a.probs.len() + b.probs.len());
    for (o, &p) in &a.probs {
        diffs.push((p - b.prob(o)).abs());
    }
    for (o, &q) in &b.probs {
        if !a.probs.contains_key(o) {
            diffs.push(q);
        }
    }
    Ok((0.5 * pairwise_sum(&diffs)).clamp(0.0, 1.0))
}

/// Integer outcome counts keyed by packed tuples when they fit in 128 bits.
#[derive(Debug, Clone)]
pub(crate) enum OutcomeCounts {
    Packed {
        bits: u32,
        arity: usize,
        map: HashMap<u128, u64>,
    },
    Wide(HashMap<Vec<Symbol>, u64>),
}

impl OutcomeCounts {
    pub(crate) fn new(arity: usize, alphabet: Symbol) -> Self {
        let bits = (u32::BITS - alphabet.saturating_sub(1).leading_zeros()).max(1);
        if bits as usize * arity <= 128 {
            OutcomeCounts::Packed {
                bits,
                arity,
                map: HashMap::new(),
            }
        } else {
            OutcomeCounts::Wide(HashMap::new())
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, outcome: &[Symbol], n: u64) {
        match self {
            OutcomeCounts::Packed { bits, map, .. } => {
                let mut key = 0u128;
                for &v in outcome.iter().rev() {
                    key = (key << *bits) | v as u128;
                }
                *map.entry(key).or_default() += n;
            }
            OutcomeCounts::Wide(map) => *map.entry(outcome.to_vec()).or_default() += n,
        }
    }

    pub(crate) fn merge(&mut self, other: OutcomeCounts) {
        match (self, other) {
            (OutcomeCounts::Packed { map: a, .. }, OutcomeCounts::Packed { map: b, .. }) => {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
            }
            (OutcomeCounts::Wide(a), OutcomeCounts::Wide(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
            }
            _ => unreachable!("counters built for the same space"),
        }
    }

    pub(crate) fn into_pairs(self) -> Vec<(Vec<Symbol>, u64)> {
        match self {
            OutcomeCounts::Packed { bits, arity, map } => map
                .into_iter()
                .map(|(mut key, n)| {
                    let mask = (1u128 << bits) - 1;
                    let o = (0..arity)
                        .map(|_| {
                            let v = (key & mask) as Symbol;
                            key >>= bits;
                            v
                        })
                        .collect();
                    (o, n)
                })
                .collect(),
            OutcomeCounts::Wide(map) => map.into_iter().collect(),
        }
    }

    pub(crate) fn into_distribution(
        self,
        arity: usize,
        alphabet: Symbol,
        bot: Option<Symbol>,
    ) -> Result<Distribution> {
        Distribution::from_counts(arity, alphabet, bot, self.into_pairs())
    }
}

fn output_space(forest: &DecisionForest) -> (usize, Symbol, Option<Symbol>) {
    let out = forest.output();
    (
        out.m,
        out.effective_alphabet(),
        out.bot_allowed.then_some(out.bot()),
    )
}

/// Output counts of `forest` over the cube of `free` cells, other cells taken from `base`.
pub(crate) fn output_counts(
    forest: &DecisionForest,
    base: Vec<Symbol>,
    free: Vec<usize>,
    budget: u64,
) -> Result<(OutcomeCounts, u64)> {
    let (m, alphabet, _) = output_space(forest);
    let cube = Cube::with_base(base, forest.lambda(), free, budget)?;
    let counts = cube.fold(
        || (OutcomeCounts::new(m, alphabet), vec![0; m]),
        |(acc, out), x| {
            forest.eval_into(x, out);
            acc.add(out, 1);
        },
        |(a, _), (b, _)| a.merge(b),
    );
    Ok((counts.0, cube.size()))
}

/// Exact pushforward of the uniform input distribution through the forest.
pub fn output_distribution(forest: &DecisionForest, budget: u64) -> Result<Distribution> {
    let (m, alphabet, bot) = output_space(forest);
    let (counts, _) = output_counts(
        forest,
        vec![0; forest.s()],
        forest.mentioned_cells().into_iter().collect(),
        budget,
    )?;
    counts.into_distribution(m, alphabet, bot)
}

/// Empirical output distribution from `trials` seeded uniform inputs.
pub fn sampled_distribution(forest: &DecisionForest, trials: u64, seed: u64) -> Result<Distribution> {
    let (m, alphabet, bot) = output_space(forest);
    let s = forest.s();
    let lambda = forest.lambda();
    let chunks = trials.div_ceil(4096).max(1);
    let parts: Vec<OutcomeCounts> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = OutcomeCounts::new(m, alphabet);
            let mut input = vec![0; s];
            let mut out = vec![0; m];
            for t in c * 4096..((c + 1) * 4096).min(trials) {
                let mut r = rng::stream(seed, t);
                input.iter_mut().for_each(|v| *v = r.gen_range(0..lambda));
                forest.eval_into(&input, &mut out);
                acc.add(&out, 1);
            }
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one chunk");
    for p in it {
        acc.merge(p);
    }
    acc.into_distribution(m, alphabet, bot)
}

/// Output distribution in the requested mode.
pub fn output_distribution_in(forest: &DecisionForest, mode: Mode, budget: u64) -> Result<Distribution> {
    match mode {
        Mode::Exact => output_distribution(forest, budget),
        Mode::MonteCarlo { trials, seed } => sampled_distribution(forest, trials, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalised() {
        let probs = BTreeMap::from([(vec![0], 0.5), (vec![1], 0.4)]);
        assert!(Distribution::new(1, 2, None, probs).is_err());
    }

    #[test]
    fn tv_examples() {
        let a = Distribution::point_mass(vec![0, 1], 2).unwrap();
        let b = Distribution::point_mass(vec![1, 0], 2).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        let u = Distribution::uniform(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(tv_distance(&u, &a).unwrap(), 0.5);
    }

    #[test]
    fn tv_rejects_other_spaces() {
        let a = Distribution::point_mass(vec![0, 1], 2).unwrap();
        let b = Distribution::point_mass(vec![0, 1], 3).unwrap();
        assert!(matches!(tv_distance(&a, &b), Err(Error::MismatchedSpaces(_))));
    }

    #[test]
    fn packed_counts_round_trip() {
        let mut c = OutcomeCounts::new(3, 5);
        c.add(&[4, 0, 3], 2);
        c.add(&[4, 0, 3], 1);
        c.add(&[0, 0, 0], 1);
        let mut pairs = c.into_pairs();
        pairs.sort();
        assert_eq!(pairs, vec![(vec![0, 0, 0], 1), (vec![4, 0, 3], 3)]);
    }

    #[test]
    fn dump_round_trip_with_bot() {
        let d = Distribution::from_weights(
            2,
            3,
            Some(2),
            [(vec![0, 2], 1.0), (vec![1, 1], 3.0)],
        )
        .unwrap();
        let text = d.to_dump();
        assert_eq!(text, "0,_\t0.25\n1,1\t0.75\n");
        assert_eq!(Distribution::from_dump(&text, 3, Some(2)).unwrap(), d);
    }

    #[test]
    fn constant_and_identity_pushforwards() {
        let c = DecisionForest::constant(2, 2, 3, &[1, 2]).unwrap();
        let d = output_distribution(&c, 1 << 20).unwrap();
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.prob(&[1, 2]), 1.0);
        let id = DecisionForest::identity(2, 2).unwrap();
        let d = output_distribution(&id, 1 << 20).unwrap();
        assert_eq!(d.probabilities(), vec![0.25; 4]);
    }
}
