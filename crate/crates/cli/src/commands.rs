// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeSet;

use cellprobe::analysis::{
    collision_probability, conditional_entropy, entropy, neighborhood, output_distribution,
    output_distribution_in, tv_distance, tv_lower_bound_via_collision, CollisionSource,
    IndependentEnsemble, OutcomeSet, SetKind,
};
use cellprobe::forest::{check_lipschitz, format, query_profile};
use cellprobe::harness::corpus::collision_tv_report;
use cellprobe::harness::{
    bucketed_dichotomy_experiment, collision_ensemble_report, containment_set, couple_report,
    couple_sample, coupling_stats, depth_reduction_step, enforce_avg_lipschitz, run_corpus,
    standard_corpora, verify_at_least_two, verify_avg_to_tail, verify_chain_bound,
    verify_enforcement, verify_entropy_deviation, verify_harper, verify_light_mass,
    verify_lipschitz_after_conditioning, verify_mixture_bound, verify_power_bound,
    verify_ratio_bound, verify_second_moment_tail, AssignmentSampler, CorpusConfig, CorpusSpec,
    Family,
};
use cellprobe::rng;
use cellprobe::samplers::{random_forest, thorp_forest, uniform_perm_distribution, ForestGenSpec, ThorpSpec};
use cellprobe::{BucketStructure, DecisionForest, DecisionTree, ExperimentReport, Status, Symbol, DEFAULT_TRIALS};
use rand::Rng;
use serde_json::json;

use crate::failure::Failure;
use crate::output::{append_ledger, write_atomic};
use crate::params::{load_forest, read, Params};
use crate::{Analysis, Outcome};

type Run = Result<Outcome, Failure>;

const DEFAULT_EPS: [f64; 3] = [0.5, 0.25, 0.125];

/// Prints the reports, appends them to the ledger, and fails if any failed.
fn finish(p: &Params, reports: &[ExperimentReport]) -> Run {
    for r in reports {
        println!("{}", r.to_json());
        eprintln!("{}", r.summary());
    }
    append_ledger(&p.ledger_path(), reports, p.fresh)?;
    if reports.iter().any(|r| r.status.is_failure()) {
        Ok(Outcome::Failed)
    } else {
        Ok(Outcome::Success)
    }
}

/// Writes the forest to `--out`, or prints it when no path is given.
fn emit_forest(p: &Params, f: &DecisionForest) -> Run {
    let text = format::to_json(f);
    match &p.out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            println!(
                "{}",
                json!({ "forest": path, "s": f.s(), "m": f.m(), "depth": f.depth() })
            );
        }
        None => println!("{text}"),
    }
    Ok(Outcome::Success)
}

fn forest_label(p: &Params) -> String {
    p.forest.as_ref().map(|f| f.display().to_string()).unwrap_or_default()
}

fn tree_of(p: &Params, f: &DecisionForest) -> Result<DecisionTree, Failure> {
    let i = p.tree.unwrap_or(0);
    if i >= f.m() {
        return Err(Failure::new("invalid-input", format!("--tree {i} but the forest has {} trees", f.m())));
    }
    Ok(f.tree(i).clone())
}

fn buckets_of(p: &Params, f: &DecisionForest) -> Result<BucketStructure, Failure> {
    Ok(BucketStructure::contiguous(f.s(), p.need(&p.buckets, "buckets")?)?)
}

/// `--set`: `empty`, or a file of comma-separated tuples over `[--lambda]`
/// (default: one more than the largest symbol, at least 2).
fn load_set(p: &Params) -> Result<OutcomeSet, Failure> {
    let spec = p.need(&p.set, "set")?;
    if spec == "empty" {
        return Ok(OutcomeSet::new(p.s.unwrap_or(1), p.lambda.unwrap_or(2), [], SetKind::Custom)?);
    }
    let text = read(spec.as_ref())?;
    let members = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<Symbol>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::new("parse", format!("{spec}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let arity = members.first().map_or(p.s.unwrap_or(1), Vec::len);
    let top = members.iter().flatten().copied().max().map_or(0, |v| v + 1);
    let lambda = p.lambda.unwrap_or(top.max(2));
    Ok(OutcomeSet::new(arity, lambda, members, SetKind::Custom)?)
}

/// `--ensemble` rows, or `--m` uniform variables over `[--n]`.
fn load_ensemble(p: &Params) -> Result<IndependentEnsemble, Failure> {
    match &p.ensemble {
        Some(path) => {
            let rows: Vec<Vec<f64>> = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))?;
            let n = rows.first().map_or(0, |r| r.len().saturating_sub(1));
            Ok(IndependentEnsemble::new(n, rows)?)
        }
        None => Ok(IndependentEnsemble::uniform(p.need(&p.m, "m")?, p.need(&p.n, "n")?)?),
    }
}

pub fn gen_thorp(p: &Params) -> Run {
    let log2n = match (p.log2n, p.n) {
        (Some(l), _) => l,
        (None, Some(n)) if n.is_power_of_two() => n.trailing_zeros(),
        (None, Some(n)) => {
            return Err(Failure::new("invalid-input", format!("--n {n} is not a power of two")))
        }
        (None, None) => return Err(Failure::new("missing-argument", "--log2n or --n is required")),
    };
    let spec = ThorpSpec::new(log2n, p.need(&p.rounds, "rounds")?)?;
    emit_forest(p, &thorp_forest(spec)?)
}

pub fn gen_random(p: &Params) -> Run {
    let d = ForestGenSpec::default();
    let spec = ForestGenSpec {
        s: p.s.unwrap_or(d.s),
        lambda: p.lambda.unwrap_or(d.lambda),
        m: p.m.unwrap_or(d.m),
        sigma: p.sigma.unwrap_or(d.sigma),
        depth: p.depth.unwrap_or(d.depth),
        nonadaptive: p.nonadaptive,
        max_influence: p.max_influence,
        max_locality: p.max_locality,
        buckets: None,
        stop_prob: p.stop_prob.unwrap_or(d.stop_prob),
        bot_prob: p.bot_prob.unwrap_or(d.bot_prob),
        seed: p.seed()?,
    };
    emit_forest(p, &random_forest(&spec)?)
}

pub fn eval(p: &Params) -> Run {
    let f = p.forest()?;
    let input = match &p.input {
        Some(x) => x.clone(),
        None => {
            let mut r = rng::seeded(p.seed()?);
            (0..f.s()).map(|_| r.gen_range(0..f.lambda())).collect()
        }
    };
    let out = f.eval(&input)?;
    let bot = f.bot();
    let shown: Vec<Option<Symbol>> = out.iter().map(|&v| (v != bot).then_some(v)).collect();
    println!("{}", json!({ "input": input, "output": shown, "seed": p.seed }));
    Ok(Outcome::Success)
}

pub fn analyze(p: &Params, what: Analysis) -> Run {
    let report = match what {
        Analysis::Tv => {
            let f = p.forest()?;
            let mode = p.mode()?;
            let target = p.need(&p.target, "target")?;
            let b = if target == "uniform-perm" {
                uniform_perm_distribution(f.m())?
            } else {
                output_distribution(&load_forest(target.as_ref())?, p.states())?
            };
            let a = output_distribution_in(&f, mode, p.states())?;
            ExperimentReport::info("tv", format!("{}~{target}", forest_label(p)), tv_distance(&a, &b)?).with_mode(mode)
        }
        Analysis::Entropy => {
            let f = p.forest()?;
            let mode = p.mode()?;
            let d = output_distribution_in(&f, mode, p.states())?;
            ExperimentReport::info("entropy", forest_label(p), entropy(&d))
                .with_mode(mode)
                .with_aux("support_size", d.support_size())
        }
        Analysis::CondEntropy => {
            let f = p.forest()?;
            let mode = p.mode()?;
            let cells: BTreeSet<usize> = p.cells.clone().unwrap_or_default().into_iter().collect();
            let c = conditional_entropy(&f, &cells, mode, p.states())?;
            ExperimentReport::info("cond-entropy", forest_label(p), c.value)
                .with_mode(mode)
                .with_aux("cells", &c.cells)
                .with_aux("conditioning_values", c.per_beta.len())
                .with_aux("max_beta_entropy", c.max_beta_entropy())
                .with_aux("biased_low", c.biased_low)
        }
        Analysis::Collision => {
            let mode = p.mode()?;
            if p.forest.is_some() {
                let f = p.forest()?;
                let m = collision_probability(CollisionSource::Forest(&f), mode, p.states())?;
                let mut r = ExperimentReport::info("collision", forest_label(p), m.value).with_mode(mode);
                if let Some(h) = m.ci_halfwidth {
                    r = r.with_aux("ci_halfwidth", h);
                }
                if let Ok(tv) = tv_lower_bound_via_collision(&f, f.m(), mode, p.states()) {
                    r = r.with_aux("tv_lower_bound", tv.value);
                }
                r
            } else {
                let e = load_ensemble(p)?;
                let m = collision_probability(CollisionSource::Ensemble(&e), mode, p.states())?;
                ExperimentReport::info("collision", format!("m={},n={}", e.m(), e.n()), m.value)
                    .with_mode(mode)
                    .with_aux("entropies", e.entropies())
            }
        }
        Analysis::Lipschitz => {
            let f = p.forest()?;
            let mode = p.mode()?;
            let mu = p.need(&p.mu, "mu")?;
            let profile = query_profile(&f, mu, mode, p.states())?;
            let check = check_lipschitz(&profile, mu, p.delta.unwrap_or(0.0));
            ExperimentReport::info("lipschitz", forest_label(p), check.max_expected)
                .with_mode(mode)
                .with_aux("check", &check)
                .with_aux("expected_counts", &profile.expected_counts)
                .with_aux("tail", &profile.tail)
        }
        Analysis::Neighborhood => {
            let set = load_set(p)?;
            let k = p.radius()?;
            let nb = neighborhood(&set, k, p.set_budget())?;
            let cube = (set.alphabet() as f64).powi(set.arity() as i32);
            ExperimentReport::info("neighborhood", format!("k={k},size={}", set.len()), nb.len() as f64)
                .with_aux("density", nb.len() as f64 / cube)
        }
    };
    finish(p, &[report])?;
    Ok(Outcome::Success)
}

pub fn enforce(p: &Params) -> Run {
    let f = p.forest()?;
    let mu = p.need(&p.mu, "mu")?;
    let seed = p.seed()?;
    let t = enforce_avg_lipschitz(&f, mu, p.eps()?, seed)?;
    if let Some(path) = &p.out {
        write_atomic(path, format::to_json(&t.terminal).as_bytes())?;
    }
    println!(
        "{}",
        json!({
            "success": t.success,
            "depth_budget": t.depth_budget,
            "steps": t.steps,
            "seed": seed,
        })
    );
    Ok(Outcome::Success)
}

pub fn couple(p: &Params) -> Run {
    let f = p.forest()?;
    let tree = tree_of(p, &f)?;
    let seed = p.seed()?;
    let sample = couple_sample(&tree, f.s(), seed)?;
    let stats = coupling_stats(&tree, f.s())?;
    println!(
        "{}",
        json!({ "x": sample.x, "y": sample.y, "dist": sample.dist, "stats": stats, "seed": seed })
    );
    Ok(Outcome::Success)
}

fn depth_reduction_report(p: &Params) -> Result<ExperimentReport, Failure> {
    let f = p.forest()?;
    let r = depth_reduction_step(&f, p.need(&p.alpha, "alpha")?, p.seed()?, p.mode()?, p.states())?;
    if let (Some(path), Some(g)) = (&p.out, &r.pruned) {
        write_atomic(path, format::to_json(g).as_bytes())?;
    }
    Ok(r.report)
}

fn dichotomy_report(p: &Params) -> Result<ExperimentReport, Failure> {
    let f = p.forest()?;
    let buckets = buckets_of(p, &f)?;
    Ok(bucketed_dichotomy_experiment(&f, &buckets, p.need(&p.k, "k")?, p.seed()?, p.states())?)
}

pub fn depth_reduce(p: &Params) -> Run {
    finish(p, &[depth_reduction_report(p)?])
}

pub fn dichotomy(p: &Params) -> Run {
    finish(p, &[dichotomy_report(p)?])
}

pub fn verify(p: &Params, lemma: &str) -> Run {
    let reports = match lemma {
        "depth-reduction" => vec![depth_reduction_report(p)?],
        "dichotomy" => vec![dichotomy_report(p)?],
        _ => {
            let family = Family::from_name(lemma).ok_or_else(|| {
                let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
                Failure::new(
                    "unknown-lemma",
                    format!("unknown lemma {lemma:?}; known: {}, depth-reduction, dichotomy", known.join(", ")),
                )
            })?;
            verify_family(p, family)?
        }
    };
    finish(p, &reports)
}

fn verify_family(p: &Params, family: Family) -> Result<Vec<ExperimentReport>, Failure> {
    use Family::*;
    let budget = p.states();
    let reports = match family {
        AtLeastTwo => vec![verify_at_least_two(&p.need(&p.q, "q")?, p.need(&p.alpha, "alpha")?)?],
        LightMass => vec![verify_light_mass(&p.need(&p.p, "p")?, p.need(&p.c, "c")?)?],
        Harper => vec![verify_harper(&load_set(p)?, p.radius()?, budget)?],
        PowerBound => vec![verify_power_bound(p.steps.unwrap_or(1000))],
        RatioBound => vec![verify_ratio_bound(p.n.unwrap_or(1000), p.s.unwrap_or(20), p.seed()?)],
        CollisionEnsemble => vec![collision_ensemble_report(
            &load_ensemble(p)?,
            p.trials_or(DEFAULT_TRIALS),
            p.seed.unwrap_or(0),
        )?],
        _ if p.forest.is_none() => generated(p, family)?,
        _ => forest_family(p, family, &p.forest()?)?,
    };
    Ok(reports)
}

/// The corpus instance of `family` for `--seed`.
fn generated(p: &Params, family: Family) -> Result<Vec<ExperimentReport>, Failure> {
    let spec = CorpusSpec {
        family,
        seed: p.seed()?,
        count: 1,
        trials: p.trials,
    };
    Ok(run_corpus(&spec, p.states())?)
}

fn forest_family(p: &Params, family: Family, f: &DecisionForest) -> Result<Vec<ExperimentReport>, Failure> {
    use Family::*;
    let budget = p.states();
    let eps = p.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec());
    let reports = match family {
        Containment => vec![containment_set(&output_distribution(f, budget)?, p.need(&p.k, "k")?)?.1],
        MixtureBound => vec![verify_mixture_bound(&output_distribution(f, budget)?)],
        ChainBound => vec![verify_chain_bound(f, &buckets_of(p, f)?, budget)?],
        EntropyDeviation => match p.cell {
            Some(c) => vec![verify_entropy_deviation(f, c, budget)?],
            None => (0..f.s())
                .map(|c| verify_entropy_deviation(f, c, budget))
                .collect::<Result<_, _>>()?,
        },
        SecondMomentTail => vec![verify_second_moment_tail(f, &eps, budget)?],
        AverageToTail => vec![verify_avg_to_tail(f, &eps, budget)?],
        Coupling => vec![couple_report(&tree_of(p, f)?, f.s(), p.calib_coupling_c.unwrap_or(2.0))?],
        CollisionTv => vec![collision_tv_report(f, budget)?],
        Enforcement => vec![verify_enforcement(f, p.need(&p.mu, "mu")?, p.eps()?, p.trials_or(1000), p.seed()?)?],
        LipschitzAfterConditioning => {
            let sampler = AssignmentSampler::Cells(p.need(&p.cells, "cells")?);
            vec![verify_lipschitz_after_conditioning(
                f,
                p.need(&p.mu, "mu")?,
                p.need(&p.delta, "delta")?,
                &sampler,
                p.trials_or(10_000),
                p.seed()?,
                budget,
            )?]
        }
        AtLeastTwo | LightMass | Harper | PowerBound | RatioBound | CollisionEnsemble => {
            unreachable!("handled without a forest")
        }
    };
    let label = forest_label(p);
    Ok(reports
        .into_iter()
        .map(|mut r| {
            r.instance_id = format!("{label}/{}", r.instance_id);
            r
        })
        .collect())
}

pub fn sweep(p: &Params, config: &str) -> Run {
    let corpora = if config == "standard" {
        standard_corpora()
    } else {
        let text = read(config.as_ref())?;
        let c: CorpusConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::new("config", format!("{config}: {e}")))?;
        c.corpora
    };
    let mut all = Vec::new();
    for spec in &corpora {
        let reports = run_corpus(spec, p.states())?;
        let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
        println!(
            "{}",
            json!({
                "family": spec.family,
                "seed": spec.seed,
                "instances": spec.count,
                "reports": reports.len(),
                "pass": count(Status::Pass),
                "fail": count(Status::Fail),
                "precondition_violated": count(Status::PreconditionViolated),
                "info": count(Status::Info),
            })
        );
        for r in reports.iter().filter(|r| r.status.is_failure()) {
            eprintln!("{}", r.summary());
        }
        all.extend(reports);
    }
    if let Some(path) = &p.out {
        let lines: String = all.iter().map(|r| r.to_json() + "\n").collect();
        write_atomic(path, lines.as_bytes())?;
    }
    append_ledger(&p.ledger_path(), &all, p.fresh)?;
    if all.iter().any(|r| r.status.is_failure()) {
        Ok(Outcome::Failed)
    } else {
        Ok(Outcome::Success)
    }
}
