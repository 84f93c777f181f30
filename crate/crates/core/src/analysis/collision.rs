// SPDX-License-Identifier: Apache-2.0
//! Collisions among output symbols.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::pairwise_sum;
use super::entropy::entropy_of_pmf;
use super::measurement::Measurement;
use crate::enumerate::Cube;
use crate::error::{Error, Result};
use crate::forest::{DecisionForest, Symbol};
use crate::{rng, Mode, TOLERANCE};

/// `Σ_{k<n} max(0, #{i : z_i = k} − 1)`. Symbols `≥ n` (in particular ⊥
/// encoded as `n`) are ignored.
pub fn collision_stat(z: &[Symbol], n: Symbol) -> u64 {
    let mut seen = vec![0u32; n as usize];
    let mut total = 0;
    for &v in z {
        if v < n {
            if seen[v as usize] > 0 {
                total += 1;
            }
            seen[v as usize] += 1;
        }
    }
    total
}

/// True when two coordinates share a symbol other than `bot`.
pub fn has_collision(z: &[Symbol], bot: Option<Symbol>) -> bool {
    let mut v: Vec<Symbol> = z.iter().copied().filter(|&x| Some(x) != bot).collect();
    v.sort_unstable();
    v.windows(2).any(|w| w[0] == w[1])
}

/// `z` fails to be a permutation of `[n]`.
fn not_a_permutation(z: &[Symbol], n: Symbol) -> bool {
    z.len() != n as usize || z.iter().any(|&v| v >= n) || has_collision(z, None)
}

/// Independent variables `z_1, …, z_m` over `[n] ∪ {⊥}`. Row `i` has `n + 1`
/// entries; the last one is `Pr[z_i = ⊥]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentEnsemble {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl IndependentEnsemble {
    pub fn new(n: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || rows.is_empty() {
            return Err(Error::InvalidDistribution("empty ensemble".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n + 1 {
                return Err(Error::InvalidDistribution(format!(
                    "row {i} has {} entries, expected {}",
                    r.len(),
                    n + 1
                )));
            }
            if r.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidDistribution(format!("row {i} has a bad entry")));
            }
            let total: f64 = r.iter().sum();
            if (total - 1.0).abs() > TOLERANCE {
                return Err(Error::InvalidDistribution(format!("row {i} sums to {total}")));
            }
        }
        Ok(Self { n, rows })
    }

    /// `m` variables, each uniform over `[n]`.
    pub fn uniform(m: usize, n: usize) -> Result<Self> {
        let mut row = vec![1.0 / n as f64; n + 1];
        row[n] = 0.0;
        Self::new(n, vec![row; m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `H(z_i)` per variable, ⊥ counted as an ordinary value.
    pub fn entropies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| entropy_of_pmf(r)).collect()
    }

    /// Joint entropy, which for independent variables is the sum.
    pub fn joint_entropy(&self) -> f64 {
        pairwise_sum(&self.entropies())
    }

    /// `Pr[z_i = k]` for every `i`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    fn identical_rows(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] == w[1])
    }

    fn sample(&self, r: &mut rng::Rng, out: &mut [Symbol]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            let u: f64 = r.gen();
            let mut acc = 0.0;
            *o = self.n as Symbol;
            for (k, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    *o = k as Symbol;
                    break;
                }
            }
        }
    }
}

/// Exact `Pr[at least two of the independent events occur]`.
pub fn prob_at_least_two(q: &[f64]) -> f64 {
    if q.len() < 2 {
        return 0.0;
    }
    let none: f64 = q.iter().map(|&x| 1.0 - x).product();
    // Π_{j≠i}(1−q_j), computed without dividing so q_i = 1 is handled.
    let exactly_one: Vec<f64> = (0..q.len())
        .map(|i| {
            q[i] * q
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &x)| 1.0 - x)
                .product::<f64>()
        })
        .collect();
    (1.0 - none - pairwise_sum(&exactly_one)).clamp(0.0, 1.0)
}

/// For each symbol `k < n`, the probability that at least two variables take it.
pub fn symbol_collision_probs(e: &IndependentEnsemble) -> Vec<f64> {
    (0..e.n).map(|k| prob_at_least_two(&e.column(k))).collect()
}

/// Largest `2^m · m · n` handled by the exact subset recursion.
const SUBSET_WORK_LIMIT: f64 = (1u64 << 32) as f64;

/// Exact `Pr[no two variables share a non-⊥ symbol]`.
fn ensemble_no_collision(e: &IndependentEnsemble) -> Result<f64> {
    if e.identical_rows() {
        Ok(no_collision_identical(&e.rows[0], e.m()))
    } else {
        no_collision_subsets(e)
    }
}

/// `Σ_j m!/(m−j)! · p⊥^{m−j} · e_j(p_0, …, p_{n−1})` for `m` copies of `row`.
fn no_collision_identical(row: &[f64], m: usize) -> f64 {
    let n = row.len() - 1;
    let top = m.min(n);
    let mut esym = vec![0.0; top + 1];
    esym[0] = 1.0;
    for &p in &row[..n] {
        for j in (1..=top).rev() {
            esym[j] += esym[j - 1] * p;
        }
    }
    let bot = row[n];
    let mut terms = Vec::with_capacity(top + 1);
    let mut falling = 1.0;
    for (j, &ej) in esym.iter().enumerate() {
        if j > 0 {
            falling *= (m - j + 1) as f64;
        }
        terms.push(falling * bot.powi((m - j) as i32) * ej);
    }
    pairwise_sum(&terms).clamp(0.0, 1.0)
}

fn no_collision_subsets(e: &IndependentEnsemble) -> Result<f64> {
    let (m, n) = (e.m(), e.n);
    let work = 2f64.powi(m as i32) * m as f64 * n as f64;
    if m > 20 || work > SUBSET_WORK_LIMIT {
        return Err(Error::BudgetExceeded {
            needed: work,
            budget: SUBSET_WORK_LIMIT as u64,
        });
    }
    // dp[S]: probability that exactly the variables in S took distinct
    // symbols among those processed so far.
    let mut dp = vec![0.0; 1 << m];
    dp[0] = 1.0;
    for k in 0..n {
        let col = e.column(k);
        for set in (0..1usize << m).rev() {
            let base = dp[set];
            if base == 0.0 {
                continue;
            }
            for (i, &p) in col.iter().enumerate() {
                if set & (1 << i) == 0 && p > 0.0 {
                    dp[set | (1 << i)] += base * p;
                }
            }
        }
    }
    let terms: Vec<f64> = (0..1usize << m)
        .map(|set| {
            let rest: f64 = (0..m)
                .filter(|i| set & (1 << i) == 0)
                .map(|i| e.rows[i][n])
                .product();
            dp[set] * rest
        })
        .collect();
    Ok(pairwise_sum(&terms).clamp(0.0, 1.0))
}

fn sampled_frequency<F>(trials: u64, seed: u64, hit: F) -> f64
where
    F: Fn(&mut rng::Rng) -> bool + Sync,
{
    let chunks = trials.div_ceil(4096).max(1);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            (c * 4096..((c + 1) * 4096).min(trials))
                .filter(|&t| hit(&mut rng::stream(seed, t)))
                .count() as u64
        })
        .sum();
    hits as f64 / trials.max(1) as f64
}

/// What a collision probability is computed for.
#[derive(Debug, Clone, Copy)]
pub enum CollisionSource<'a> {
    Forest(&'a DecisionForest),
    Ensemble(&'a IndependentEnsemble),
}

/// `Pr[∃ i ≠ j : z_i = z_j ≠ ⊥]`.
pub fn collision_probability(source: CollisionSource<'_>, mode: Mode, budget: u64) -> Result<Measurement> {
    const Q: &str = "collision_probability";
    match (source, mode) {
        (CollisionSource::Ensemble(e), Mode::Exact) => {
            Ok(Measurement::exact(Q, 1.0 - ensemble_no_collision(e)?))
        }
        (CollisionSource::Ensemble(e), Mode::MonteCarlo { trials, seed }) => {
            let v = sampled_frequency(trials, seed, |r| {
                let mut z = vec![0; e.m()];
                e.sample(r, &mut z);
                has_collision(&z, Some(e.n as Symbol))
            });
            Ok(Measurement::frequency(Q, v, trials, seed))
        }
        (CollisionSource::Forest(f), mode) => {
            let bot = f.output().bot_allowed.then_some(f.bot());
            forest_event_probability(f, mode, budget, |z| has_collision(z, bot))
                .map(|v| Measurement::in_mode(Q, v, mode))
        }
    }
}

/// Probability under a uniform input that the forest output satisfies `event`.
pub fn forest_event_probability<E>(forest: &DecisionForest, mode: Mode, budget: u64, event: E) -> Result<f64>
where
    E: Fn(&[Symbol]) -> bool + Sync,
{
    let m = forest.m();
    match mode {
        Mode::Exact => {
            let cube = Cube::new(
                forest.s(),
                forest.lambda(),
                forest.mentioned_cells().into_iter().collect(),
                budget,
            )?;
            let hits = cube.fold(
                || (0u64, vec![0; m]),
                |(h, out), x| {
                    forest.eval_into(x, out);
                    *h += event(out) as u64;
                },
                |a, b| a.0 += b.0,
            );
            Ok(hits.0 as f64 / cube.size() as f64)
        }
        Mode::MonteCarlo { trials, seed } => {
            let (s, lambda) = (forest.s(), forest.lambda());
            Ok(sampled_frequency(trials, seed, |r| {
                let x: Vec<Symbol> = (0..s).map(|_| r.gen_range(0..lambda)).collect();
                event(&forest.eval_unchecked(&x))
            }))
        }
    }
}

/// `Pr[f(u) is not a permutation of [n]]`. A uniform permutation never lands
/// in that event, so the value lower-bounds the statistical distance to it.
pub fn tv_lower_bound_via_collision(
    forest: &DecisionForest,
    n: usize,
    mode: Mode,
    budget: u64,
) -> Result<Measurement> {
    if forest.m() != n || forest.sigma() as usize > n {
        return Err(Error::MismatchedSpaces(format!(
            "forest with m = {} over σ = {} cannot be compared with permutations of {n}",
            forest.m(),
            forest.sigma()
        )));
    }
    let n = n as Symbol;
    forest_event_probability(forest, mode, budget, |z| not_a_permutation(z, n))
        .map(|v| Measurement::in_mode("tv_lower_bound_via_collision", v, mode))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_examples() {
        assert_eq!(collision_stat(&[1, 2, 3], 4), 0);
        assert_eq!(collision_stat(&[1, 1, 2], 4), 1);
        assert_eq!(collision_stat(&[3, 3, 3, 4, 4], 4), 2);
    }

    #[test]
    fn birthday_four() {
        let e = IndependentEnsemble::uniform(4, 4).unwrap();
        let p = collision_probability(CollisionSource::Ensemble(&e), Mode::Exact, 0).unwrap();
        assert!((p.value - 0.90625).abs() < 1e-12);
    }

    #[test]
    fn subset_recursion_matches_symmetric_formula() {
        let row = vec![0.2, 0.3, 0.1, 0.4];
        let e = IndependentEnsemble::new(3, vec![row.clone(); 4]).unwrap();
        let sym = no_collision_identical(&row, 4);
        let general = no_collision_subsets(&e).unwrap();
        assert!((sym - general).abs() < 1e-12);
    }

    #[test]
    fn disjoint_supports_never_collide() {
        let e = IndependentEnsemble::new(
            4,
            vec![vec![0.5, 0.5, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.3, 0.7, 0.0]],
        )
        .unwrap();
        let p = collision_probability(CollisionSource::Ensemble(&e), Mode::Exact, 0).unwrap();
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn at_least_two_formula() {
        assert!((prob_at_least_two(&[0.04, 0.04]) - 0.0016).abs() < 1e-15);
        assert_eq!(prob_at_least_two(&[0.3]), 0.0);
        assert!((prob_at_least_two(&[1.0, 1.0, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_lower_bound() {
        let f = DecisionForest::identity(4, 4).unwrap();
        let v = tv_lower_bound_via_collision(&f, 4, Mode::Exact, 1 << 20).unwrap();
        assert!((v.value - 0.90625).abs() < 1e-12);
        let c = DecisionForest::constant(4, 4, 4, &[1, 1, 1, 1]).unwrap();
        assert_eq!(tv_lower_bound_via_collision(&c, 4, Mode::Exact, 1 << 20).unwrap().value, 1.0);
        assert!(tv_lower_bound_via_collision(&c, 5, Mode::Exact, 1 << 20).is_err());
    }
}
