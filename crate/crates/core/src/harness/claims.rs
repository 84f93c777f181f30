// SPDX-License-Identifier: Apache-2.0
//! Probability claims about independent events, light atoms, Hamming
//! neighborhoods and collisions.

use rand::Rng as _;

use super::report::{ExperimentReport, Relation};
use crate::analysis::{
    collision_probability, distance_map, entropy_of_pmf, prob_at_least_two, CollisionSource,
    IndependentEnsemble, OutcomeSet,
};
use crate::error::{Error, Result};
use crate::{rng, Mode, TOLERANCE};

/// `Pr[at least two events] ≥ q̄²/4 − 2αq̄` for independent events with
/// `q_i ≤ α` and `q̄ = Σ q_i ≤ 1/8`.
pub fn verify_at_least_two(q: &[f64], alpha: f64) -> Result<ExperimentReport> {
    if q.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::InvalidInput("event probabilities must lie in [0, 1]".into()));
    }
    let id = format!("l={},alpha={alpha}", q.len());
    let total: f64 = q.iter().sum();
    if let Some(&big) = q.iter().find(|&&x| x > alpha + TOLERANCE) {
        return Ok(ExperimentReport::precondition(
            "at-least-two",
            id,
            format!("q_i = {big} exceeds α = {alpha}"),
        ));
    }
    if total > 0.125 + TOLERANCE {
        return Ok(ExperimentReport::precondition(
            "at-least-two",
            id,
            format!("Σ q_i = {total} exceeds 1/8"),
        ));
    }
    let exact = prob_at_least_two(q);
    let bound = total * total / 4.0 - 2.0 * alpha * total;
    Ok(ExperimentReport::check("at-least-two", id, exact, Relation::AtLeast, bound).with_aux("q_total", total))
}

/// For `c > 4/n` and `H(p) ≥ c·log n`, the atoms with `p(i) ≤ n^{-c/2}` carry
/// mass at least `c/8`.
pub fn verify_light_mass(p: &[f64], c: f64) -> Result<ExperimentReport> {
    let n = p.len();
    if n < 2 || p.iter().any(|&x| !(x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > TOLERANCE {
        return Err(Error::InvalidDistribution(
            "expected a probability vector over at least two points".into(),
        ));
    }
    let nf = n as f64;
    let id = format!("n={n},c={c}");
    let h = entropy_of_pmf(p);
    if !(c > 4.0 / nf) {
        return Ok(ExperimentReport::precondition("light-mass", id, format!("c = {c} is not above 4/n")));
    }
    if h < c * nf.log2() - TOLERANCE {
        return Ok(ExperimentReport::precondition(
            "light-mass",
            id,
            format!("entropy {h} is below c·log n"),
        ));
    }
    let threshold = nf.powf(-c / 2.0);
    let light: f64 = p.iter().filter(|&&x| x <= threshold).sum();
    Ok(ExperimentReport::check("light-mass", id, light, Relation::AtLeast, c / 8.0)
        .with_aux("entropy", h)
        .with_aux("threshold", threshold))
}

/// `Pr[u ∈ N_k(S)] ≥ 1 − exp(−k²/(2s·log λ))/Pr[u ∈ S]` over `[λ]^s`.
pub fn verify_harper(set: &OutcomeSet, k: usize, budget: u64) -> Result<ExperimentReport> {
    if set.alphabet() < 2 {
        return Err(Error::InvalidInput("alphabet must have at least two symbols".into()));
    }
    let dist = distance_map(set, budget)?;
    let size = dist.len() as f64;
    let inside = dist.iter().filter(|&&d| d as usize <= k).count() as f64 / size;
    let density = set.len() as f64 / size;
    let s = set.arity() as f64;
    let kk = k as f64;
    let bound = if s == 0.0 {
        1.0 - 1.0 / density
    } else {
        1.0 - (-kk * kk / (2.0 * s * (set.alphabet() as f64).log2())).exp() / density
    };
    Ok(ExperimentReport::check("harper", format!("s={},k={k},size={}", set.arity(), set.len()), inside, Relation::AtLeast, bound)
        .with_aux("density", density))
}

/// `(1−x)^n ≤ 1 − nx + (nx)²/2` on a grid `x = i/steps`, `n ∈ [2, 64]`.
/// Measured is the largest violation, so the bound is 0.
pub fn verify_power_bound(steps: usize) -> ExperimentReport {
    let mut worst = f64::NEG_INFINITY;
    for n in 2..=64 {
        for i in 1..steps {
            let x = i as f64 / steps as f64;
            let nx = n as f64 * x;
            let lhs = (1.0 - x).powi(n);
            let rhs = 1.0 - nx + nx * nx / 2.0;
            worst = worst.max((lhs - rhs) / rhs.abs().max(1.0));
        }
    }
    ExperimentReport::check("power-bound", format!("grid={steps}"), worst, Relation::AtMost, 0.0)
}

/// `Σ a_i/b_i ≥ (Σ a_i)²/Σ a_i·b_i` for random `a ≥ 0`, `b > 0`. Measured is
/// the largest relative violation over `count` vectors of length `1..=len`.
pub fn verify_ratio_bound(count: usize, len: usize, seed: u64) -> ExperimentReport {
    let mut worst = f64::NEG_INFINITY;
    for t in 0..count {
        let mut r = rng::stream(seed, t as u64);
        let l = r.gen_range(1..=len.max(1));
        // Spread magnitudes over several orders.
        let a: Vec<f64> = (0..l)
            .map(|_| if r.gen_bool(0.1) { 0.0 } else { 10f64.powf(r.gen_range(-3.0..3.0)) })
            .collect();
        let b: Vec<f64> = (0..l).map(|_| 10f64.powf(r.gen_range(-3.0..3.0))).collect();
        let sum_a: f64 = a.iter().sum();
        let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        if ab == 0.0 {
            continue;
        }
        let lhs: f64 = a.iter().zip(&b).map(|(x, y)| x / y).sum();
        let rhs = sum_a * sum_a / ab;
        worst = worst.max((rhs - lhs) / lhs.max(f64::MIN_POSITIVE));
    }
    ExperimentReport::check("ratio-bound", format!("vectors={count}"), worst, Relation::AtMost, 1e-12)
        .with_seed(seed)
}

/// Collision probability of an ensemble of independent variables next to
/// its entropies. Exact when the ensemble allows it, otherwise Monte-Carlo
/// with the given trials and seed. No bound is asserted.
pub fn collision_ensemble_report(e: &IndependentEnsemble, trials: u64, seed: u64) -> Result<ExperimentReport> {
    let (measured, mode) = match collision_probability(CollisionSource::Ensemble(e), Mode::Exact, 0) {
        Ok(m) => (m, Mode::Exact),
        Err(Error::BudgetExceeded { .. }) => {
            let mode = Mode::monte_carlo(trials, seed);
            (collision_probability(CollisionSource::Ensemble(e), mode, 0)?, mode)
        }
        Err(other) => return Err(other),
    };
    let entropies = e.entropies();
    let min_h = entropies.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = e.m() as f64 * (e.n() as f64).log2();
    let delta = if scale > 0.0 { min_h / scale } else { 0.0 };
    let mut r = ExperimentReport::info("collision-ensemble", format!("m={},n={}", e.m(), e.n()), measured.value)
        .with_mode(mode)
        .with_aux("entropies", &entropies)
        .with_aux("joint_entropy", e.joint_entropy())
        .with_aux("delta", delta);
    if let Some(h) = measured.ci_halfwidth {
        r = r.with_aux("ci_halfwidth", h);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::SetKind;
    use crate::Status;

    #[test]
    fn at_least_two_examples() {
        let r = verify_at_least_two(&[0.04, 0.04], 0.04).unwrap();
        assert!(r.passed());
        assert!((r.measured - 0.0016).abs() < 1e-15);
        assert!((r.bound.unwrap() + 0.0048).abs() < 1e-15);
        let r = verify_at_least_two(&[0.1], 0.1).unwrap();
        assert_eq!(r.measured, 0.0);
        assert!(r.passed());
        let r = verify_at_least_two(&[0.5, 0.5], 0.5).unwrap();
        assert_eq!(r.status, Status::PreconditionViolated);
    }

    #[test]
    fn light_mass_examples() {
        let r = verify_light_mass(&[1.0 / 16.0; 16], 1.0).unwrap();
        assert!(r.passed());
        assert_eq!(r.measured, 1.0);
        let mut point = vec![0.0; 16];
        point[3] = 1.0;
        assert_eq!(verify_light_mass(&point, 0.5).unwrap().status, Status::PreconditionViolated);
    }

    #[test]
    fn harper_examples() {
        let full = OutcomeSet::full_cube(4, 2, 1 << 10).unwrap();
        let r = verify_harper(&full, 2, 1 << 10).unwrap();
        assert_eq!(r.measured, 1.0);
        assert!(r.passed());
        let one = OutcomeSet::new(6, 2, [vec![0; 6]], SetKind::Custom).unwrap();
        let r = verify_harper(&one, 0, 1 << 10).unwrap();
        assert!(r.passed());
        let empty = OutcomeSet::new(6, 2, [], SetKind::Custom).unwrap();
        assert!(matches!(verify_harper(&empty, 1, 1 << 10), Err(Error::EmptySet)));
    }

    #[test]
    fn elementary_inequalities() {
        assert!(verify_power_bound(200).passed());
        assert!(verify_ratio_bound(500, 12, 3).passed());
    }

    #[test]
    fn birthday_report() {
        let e = IndependentEnsemble::uniform(4, 4).unwrap();
        let r = collision_ensemble_report(&e, 1000, 1).unwrap();
        assert!((r.measured - 0.90625).abs() < 1e-12);
        assert_eq!(r.mode, "exact");
        assert_eq!(r.status, Status::Info);
    }
}
