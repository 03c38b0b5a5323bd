//! Brute-force reference solvers and random instance generators.
//!
//! Everything in this module is written straight from a defining property,
//! shares no logic with the production solvers, and enumerates without mercy.
//! The test suites use these as ground truth on small instances; production
//! code must never call them. In particular:
//!
//! * scoring goes through [`score_selection`], the member-by-member
//!   recomputation, not through the cached sums on [`Selection`];
//! * dominance is a literal double loop over the definition, not the
//!   incremental front maintenance the analysis module uses;
//! * the convex front comes from sweeping every distinct weight cone, not
//!   from hull geometry.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    is_fair, score_selection, AttributeSchema, FairnessSpec, ItemId, ItemRecord, ObjectiveSpec,
    Population, Selection, Theta,
};
use crate::scalar::Scalar;

fn every_selection(
    population: &Population,
    objective: &ObjectiveSpec,
    k: usize,
) -> Result<Vec<Selection>> {
    let ids: Vec<ItemId> = population.items().iter().map(|r| r.id.clone()).collect();
    ids.into_iter()
        .combinations(k)
        .map(|combo| Selection::new(population, objective, combo))
        .collect()
}

/// All utility-maximal k-subsets at θ, by trying every subset.
pub fn exhaustive_top_k(
    population: &Population,
    objective: &ObjectiveSpec,
    theta: &Theta,
    k: usize,
) -> Result<Vec<Selection>> {
    let mut best: Option<Scalar> = None;
    let mut winners = Vec::new();
    for sel in every_selection(population, objective, k)? {
        let score = score_selection(population, &sel, objective, theta)?;
        match &best {
            Some(b) if score < *b => {}
            Some(b) if score == *b => winners.push(sel),
            _ => {
                best = Some(score);
                winners = vec![sel];
            }
        }
    }
    winners.sort();
    Ok(winners)
}

/// All utility-maximal fair k-subsets at θ; empty when nothing is fair.
pub fn exhaustive_fair_top_k(
    population: &Population,
    objective: &ObjectiveSpec,
    theta: &Theta,
    k: usize,
    fairness: &FairnessSpec,
) -> Result<Vec<Selection>> {
    let mut best: Option<Scalar> = None;
    let mut winners = Vec::new();
    for sel in every_selection(population, objective, k)? {
        if !is_fair(population, &sel, fairness)? {
            continue;
        }
        let score = score_selection(population, &sel, objective, theta)?;
        match &best {
            Some(b) if score < *b => {}
            Some(b) if score == *b => winners.push(sel),
            _ => {
                best = Some(score);
                winners = vec![sel];
            }
        }
    }
    winners.sort();
    Ok(winners)
}

fn weakly_dominates(a: &[Scalar], b: &[Scalar]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

fn has_strict_component(a: &[Scalar], b: &[Scalar]) -> bool {
    a.iter().zip(b).any(|(x, y)| x > y)
}

/// Selections no other selection dominates (≥ everywhere, > somewhere).
pub fn exhaustive_pareto(selections: &[Selection]) -> Vec<Selection> {
    let mut out: Vec<Selection> = selections
        .iter()
        .filter(|s| {
            !selections.iter().any(|other| {
                weakly_dominates(other.utility_vector(), s.utility_vector())
                    && has_strict_component(other.utility_vector(), s.utility_vector())
            })
        })
        .cloned()
        .collect();
    out.sort();
    out
}

/// Selections no other selection strictly dominates (> everywhere).
pub fn exhaustive_weak_pareto(selections: &[Selection]) -> Vec<Selection> {
    let mut out: Vec<Selection> = selections
        .iter()
        .filter(|s| {
            !selections.iter().any(|other| {
                other
                    .utility_vector()
                    .iter()
                    .zip(s.utility_vector())
                    .all(|(x, y)| x > y)
            })
        })
        .cloned()
        .collect();
    out.sort();
    out
}

/// Selections maximizing `w₁x + w₂y` for some strictly positive weights, by
/// sweeping one probe per weight cone.
///
/// With weights normalized to `(t, 1−t)`, the argmax correspondence over
/// `t ∈ (0, 1)` changes only at parameters where two points tie. Probing each
/// tie parameter and one interior point of every cell between them therefore
/// observes every argmax that any strictly positive weighting produces.
pub fn exhaustive_convex_pareto_2d(selections: &[Selection]) -> Result<Vec<Selection>> {
    if selections.iter().any(|s| s.utility_vector().len() != 2) {
        return Err(Error::Argument(
            "the 2-d convex front sweep needs exactly two sub-utilities".into(),
        ));
    }
    if selections.is_empty() {
        return Ok(Vec::new());
    }
    let zero = Scalar::zero();
    let one = Scalar::one();
    let mut ties: Vec<Scalar> = Vec::new();
    for i in 0..selections.len() {
        for j in (i + 1)..selections.len() {
            let a = selections[i].utility_vector();
            let b = selections[j].utility_vector();
            let dx = &a[0] - &b[0];
            let dy = &a[1] - &b[1];
            let denom = &dx - &dy;
            if denom.is_zero() {
                continue;
            }
            let t = -&dy / &denom;
            if t > zero && t < one {
                ties.push(t);
            }
        }
    }
    ties.sort();
    ties.dedup();
    let mut probes: Vec<Scalar> = Vec::new();
    if ties.is_empty() {
        probes.push(Scalar::ratio(1, 2));
    } else {
        probes.push(&ties[0] / &Scalar::integer(2));
        for pair in ties.windows(2) {
            probes.push(Scalar::midpoint(&pair[0], &pair[1]));
        }
        probes.push(Scalar::midpoint(ties.last().expect("nonempty"), &one));
        probes.extend(ties.iter().cloned());
    }
    let mut chosen: BTreeSet<usize> = BTreeSet::new();
    for t in probes {
        let complement = &one - &t;
        let values: Vec<Scalar> = selections
            .iter()
            .map(|s| {
                let v = s.utility_vector();
                &t * &v[0] + &complement * &v[1]
            })
            .collect();
        let best = values.iter().max().expect("nonempty").clone();
        for (i, v) in values.iter().enumerate() {
            if *v == best {
                chosen.insert(i);
            }
        }
    }
    let mut out: Vec<Selection> = chosen.into_iter().map(|i| selections[i].clone()).collect();
    out.sort();
    Ok(out)
}

/// Random small instance for property tests: 2 to `max_items` items over two
/// attributes with rational values, occasional non-unit divisors, and two
/// group labels.
pub fn random_instance(rng: &mut impl Rng, max_items: usize) -> (Population, ObjectiveSpec) {
    let n = rng.gen_range(2..=max_items.max(2));
    let divisor = [1, 2, 10][rng.gen_range(0..3)];
    let schema = AttributeSchema::new(vec!["x".into(), "y".into()])
        .and_then(|s| s.with_divisor("x", Scalar::integer(divisor)))
        .expect("generated schema is valid");
    let denominators = [1, 2, 4, 5];
    let mut items = Vec::with_capacity(n);
    for i in 0..n {
        let mut value = || {
            Scalar::ratio(
                rng.gen_range(-60..=60),
                denominators[rng.gen_range(0..denominators.len())],
            )
        };
        let values = vec![value(), value()];
        let group = if rng.gen_bool(0.5) { "g" } else { "h" };
        items.push(ItemRecord::new(format!("i{i:02}"), None, group, values));
    }
    let population = Population::new(schema, items).expect("generated population is valid");
    let objective = ObjectiveSpec::TwoAttributeMixture { first: "x".into(), second: "y".into() };
    (population, objective)
}

/// Random exact θ in [0, 1] with denominator 100.
pub fn random_theta(rng: &mut impl Rng) -> Scalar {
    Scalar::ratio(rng.gen_range(0..=100), 100)
}
