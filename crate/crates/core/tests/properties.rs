//! Randomized cross-checks: the fast paths against brute force, and the
//! algebraic invariances the solvers must respect.

use fairopt_core::discrete::{
    all_selections, enumerate_optimal_set, fairest_optimal, quota_constrained_optimum, top_k,
    Certificate, FairestOptions,
};
use fairopt_core::model::{fairness_score, score_selection, FairnessSpec, Theta, ThetaDomain};
use fairopt_core::oracle;
use fairopt_core::pareto::{convex_pareto_front, pareto_front, weak_pareto_front};
use fairopt_core::uncertain::{audit_completion, fairest_completion, Completion};
use fairopt_core::{fixtures, Error, Population, Scalar, Selection};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seeded(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream)
}

fn ids_of(selections: &[Selection]) -> Vec<Vec<String>> {
    selections.iter().map(|s| s.id_strings()).collect()
}

#[test]
fn top_k_agrees_with_brute_force() {
    let mut rng = seeded(11);
    for round in 0..150 {
        let (pop, obj) = oracle::random_instance(&mut rng, 8);
        let k = rng.gen_range(1..=pop.len());
        let theta = Theta::scalar(oracle::random_theta(&mut rng));
        let fast = top_k(&pop, &obj, &theta, k).unwrap();
        let slow = oracle::exhaustive_top_k(&pop, &obj, &theta, k).unwrap();
        assert_eq!(fast, slow, "round {round}, k={k}");
    }
}

#[test]
fn quota_solver_agrees_with_the_fair_brute_force() {
    let mut rng = seeded(12);
    let mut infeasible_seen = 0;
    for round in 0..150 {
        let (pop, obj) = oracle::random_instance(&mut rng, 8);
        let k = rng.gen_range(1..=pop.len());
        let theta = Theta::scalar(oracle::random_theta(&mut rng));
        let labels: Vec<String> = pop.group_labels().into_iter().collect();
        let quota_label = labels[rng.gen_range(0..labels.len())].clone();
        let share = Scalar::ratio(rng.gen_range(0..=4), 4);
        let fairness = FairnessSpec::mismatch(labels[0].clone(), labels[labels.len() - 1].clone())
            .with_quota(quota_label, share);
        let slow = oracle::exhaustive_fair_top_k(&pop, &obj, &theta, k, &fairness).unwrap();
        match quota_constrained_optimum(&pop, &obj, &theta, k, &fairness) {
            Ok(winners) => assert_eq!(winners, slow, "round {round}"),
            Err(Error::Infeasible(_)) => {
                assert!(slow.is_empty(), "round {round}: solver said infeasible, oracle found {slow:?}");
                infeasible_seen += 1;
            }
            Err(other) => panic!("round {round}: unexpected error {other}"),
        }
    }
    assert!(infeasible_seen > 0, "the sweep never exercised an infeasible quota");
}

#[test]
fn the_optimal_family_covers_every_probe() {
    let mut rng = seeded(13);
    for _ in 0..40 {
        let (pop, obj) = oracle::random_instance(&mut rng, 7);
        let k = rng.gen_range(1..=pop.len());
        let a = rng.gen_range(0..=99);
        let b = rng.gen_range((a + 1)..=100);
        let lo = Scalar::ratio(a, 100);
        let hi = Scalar::ratio(b, 100);
        let domain = ThetaDomain::interval(lo.clone(), hi.clone()).unwrap();
        let family = enumerate_optimal_set(&pop, &obj, &domain, k).unwrap();
        assert!(family.exact);
        for _ in 0..15 {
            let t = &lo + &(&(&hi - &lo) * &Scalar::ratio(rng.gen_range(0..=1000), 1000));
            let theta = Theta::scalar(t.clone());
            for optimal in oracle::exhaustive_top_k(&pop, &obj, &theta, k).unwrap() {
                let entry = family
                    .entries
                    .iter()
                    .find(|e| e.selection == optimal)
                    .unwrap_or_else(|| panic!("{optimal} is optimal at θ={t} but not enumerated"));
                match &entry.certificate {
                    Certificate::Regions(regions) => assert!(
                        regions.iter().any(|r| r.contains(&t)),
                        "{optimal} is optimal at θ={t} outside its certified regions"
                    ),
                    Certificate::Witnesses(_) => {
                        panic!("exact enumeration must certify with regions")
                    }
                }
            }
        }
    }
}

#[test]
fn widening_the_domain_never_drops_a_member() {
    let mut rng = seeded(14);
    for _ in 0..40 {
        let (pop, obj) = oracle::random_instance(&mut rng, 7);
        let k = rng.gen_range(1..=pop.len());
        let a = rng.gen_range(10..=45);
        let b = rng.gen_range(55..=90);
        let inner = ThetaDomain::interval(Scalar::ratio(a, 100), Scalar::ratio(b, 100)).unwrap();
        let outer = ThetaDomain::interval(
            Scalar::ratio(rng.gen_range(0..=a), 100),
            Scalar::ratio(rng.gen_range(b..=100), 100),
        )
        .unwrap();
        let small = enumerate_optimal_set(&pop, &obj, &inner, k).unwrap();
        let large = enumerate_optimal_set(&pop, &obj, &outer, k).unwrap();
        for sel in small.selections() {
            assert!(large.contains(&sel), "{sel} vanished when the domain widened");
        }
    }
}

#[test]
fn frontier_computations_agree_with_their_definitions() {
    let mut rng = seeded(15);
    for round in 0..60 {
        let (pop, obj) = oracle::random_instance(&mut rng, 7);
        let k = rng.gen_range(1..=pop.len());
        let all = all_selections(&pop, &obj, k).unwrap();
        let strong = pareto_front(&all);
        let weak = weak_pareto_front(&all);
        let convex = convex_pareto_front(&all).unwrap();
        assert_eq!(strong, oracle::exhaustive_pareto(&all), "round {round}");
        assert_eq!(weak, oracle::exhaustive_weak_pareto(&all), "round {round}");
        assert_eq!(convex, oracle::exhaustive_convex_pareto_2d(&all).unwrap(), "round {round}");
        for s in &convex {
            assert!(strong.contains(s), "round {round}: convex member {s} is off the front");
        }
        for s in &strong {
            assert!(weak.contains(s), "round {round}: front member {s} is off the weak front");
        }
    }
}

#[test]
fn the_family_stays_on_the_convex_front_for_interior_domains() {
    let mut rng = seeded(16);
    for _ in 0..40 {
        let (pop, obj) = oracle::random_instance(&mut rng, 7);
        let k = rng.gen_range(1..=pop.len());
        let domain = ThetaDomain::interval(
            Scalar::ratio(rng.gen_range(1..=45), 100),
            Scalar::ratio(rng.gen_range(55..=99), 100),
        )
        .unwrap();
        let family = enumerate_optimal_set(&pop, &obj, &domain, k).unwrap();
        let convex = convex_pareto_front(&all_selections(&pop, &obj, k).unwrap()).unwrap();
        for sel in family.selections() {
            assert!(
                convex.contains(&sel),
                "{sel} is θ-optimal with strictly positive weights but off the convex front"
            );
        }
    }
}

#[test]
fn scaling_every_value_preserves_the_family_and_its_regions() {
    let mut rng = seeded(17);
    for _ in 0..30 {
        let (pop, obj) = oracle::random_instance(&mut rng, 7);
        let k = rng.gen_range(1..=pop.len());
        let domain = ThetaDomain::full_interval();
        let family = enumerate_optimal_set(&pop, &obj, &domain, k).unwrap();
        for factor in [Scalar::integer(3), Scalar::ratio(1, 7)] {
            let scaled_items = pop
                .items()
                .iter()
                .cloned()
                .map(|mut item| {
                    item.values = item.values.iter().map(|v| v * &factor).collect();
                    item
                })
                .collect();
            let scaled = Population::new(pop.schema().clone(), scaled_items).unwrap();
            let scaled_family = enumerate_optimal_set(&scaled, &obj, &domain, k).unwrap();
            assert_eq!(ids_of(&family.selections()), ids_of(&scaled_family.selections()));
            for (ours, theirs) in family.entries.iter().zip(&scaled_family.entries) {
                assert_eq!(
                    format!("{:?}", ours.certificate),
                    format!("{:?}", theirs.certificate),
                    "scaling must not move the certified regions"
                );
            }
        }
    }
}

#[test]
fn shifting_an_attribute_uniformly_preserves_the_optima() {
    let mut rng = seeded(18);
    for _ in 0..30 {
        let (pop, obj) = oracle::random_instance(&mut rng, 7);
        let k = rng.gen_range(1..=pop.len());
        let attribute = rng.gen_range(0..2);
        let shift = Scalar::ratio(rng.gen_range(-40..=40), 3);
        let shifted_items = pop
            .items()
            .iter()
            .cloned()
            .map(|mut item| {
                item.values[attribute] = &item.values[attribute] + &shift;
                item
            })
            .collect();
        let shifted = Population::new(pop.schema().clone(), shifted_items).unwrap();
        for _ in 0..10 {
            let theta = Theta::scalar(oracle::random_theta(&mut rng));
            assert_eq!(
                ids_of(&top_k(&pop, &obj, &theta, k).unwrap()),
                ids_of(&top_k(&shifted, &obj, &theta, k).unwrap()),
            );
        }
        let domain = ThetaDomain::full_interval();
        assert_eq!(
            ids_of(&enumerate_optimal_set(&pop, &obj, &domain, k).unwrap().selections()),
            ids_of(&enumerate_optimal_set(&shifted, &obj, &domain, k).unwrap().selections()),
        );
    }
}

#[test]
fn selection_scores_decompose_over_the_cached_utility_vector() {
    let mut rng = seeded(19);
    for _ in 0..80 {
        let (pop, obj) = oracle::random_instance(&mut rng, 8);
        let k = rng.gen_range(1..=pop.len());
        let ids: Vec<_> = pop.items().iter().map(|i| i.id.clone()).collect();
        let chosen = ids.choose_multiple(&mut rng, k).cloned().collect::<Vec<_>>();
        let sel = Selection::new(&pop, &obj, chosen).unwrap();
        let theta = Theta::scalar(oracle::random_theta(&mut rng));
        let weights = obj.weights(&theta).unwrap();
        let dot: Scalar = weights.iter().zip(sel.utility_vector()).map(|(w, v)| w * v).sum();
        assert_eq!(sel.score(&obj, &theta).unwrap(), dot);
        assert_eq!(score_selection(&pop, &sel, &obj, &theta).unwrap(), dot);
    }
}

#[test]
fn the_fairest_pick_is_maximal_and_certified() {
    let mut rng = seeded(20);
    let mut rounds_with_two_groups = 0;
    for _ in 0..40 {
        let (pop, obj) = oracle::random_instance(&mut rng, 7);
        let labels: Vec<String> = pop.group_labels().into_iter().collect();
        if labels.len() < 2 {
            continue;
        }
        rounds_with_two_groups += 1;
        let fairness = FairnessSpec::mismatch(labels[0].clone(), labels[1].clone());
        let k = rng.gen_range(1..=pop.len());
        let domain = ThetaDomain::full_interval();
        let family = enumerate_optimal_set(&pop, &obj, &domain, k).unwrap();
        let result = fairest_optimal(&pop, &family, &fairness, &FairestOptions::default()).unwrap();
        for entry in &family.entries {
            let f = fairness_score(&pop, &entry.selection, &fairness).unwrap();
            assert!(f <= result.fairness, "{} is fairer than the declared winner", entry.selection);
        }
        assert_eq!(result.ties[0], result.winner.selection);
        let optima = oracle::exhaustive_top_k(&pop, &obj, &result.theta_star, k).unwrap();
        assert!(
            optima.contains(&result.winner.selection),
            "the winner is not actually optimal at its θ*"
        );
    }
    assert!(rounds_with_two_groups >= 20);
}

#[test]
fn endpoint_search_dominates_random_interior_completions() {
    let ipop = fixtures::students_with_intervals().unwrap();
    let obj = fixtures::students_objective();
    let fairness = fixtures::mismatch_fairness();
    let theta = Theta::scalar(Scalar::ratio(1, 2));
    let best = fairest_completion(&ipop, &obj, &theta, 2, &fairness).unwrap();
    let cells = ipop.open_cells();
    let mut rng = seeded(21);
    for _ in 0..60 {
        let mut values: Vec<Vec<Scalar>> = ipop
            .records()
            .iter()
            .map(|r| r.values.iter().map(|iv| iv.lo().clone()).collect())
            .collect();
        for &(r, a) in &cells {
            let iv = &ipop.records()[r].values[a];
            let t = Scalar::ratio(rng.gen_range(0..=64), 64);
            values[r][a] = iv.lo() + &(&t * &(iv.hi() - iv.lo()));
        }
        let completion = Completion::new(values);
        let audit = audit_completion(&ipop, &completion).unwrap();
        for p in &audit.positions {
            assert!(p.position >= Scalar::zero() && p.position <= Scalar::one());
        }
        let pop = ipop.complete(&completion).unwrap();
        let best_here = top_k(&pop, &obj, &theta, 2)
            .unwrap()
            .iter()
            .map(|s| fairness_score(&pop, s, &fairness).unwrap())
            .max()
            .unwrap();
        assert!(
            best_here <= best.fairness,
            "an interior completion reached fairness {best_here}, above the endpoint search's {}",
            best.fairness
        );
    }
}

mod scalar_properties {
    use fairopt_core::Scalar;
    use proptest::prelude::*;

    fn rational() -> impl Strategy<Value = Scalar> {
        (-2000i64..=2000, 1i64..=64).prop_map(|(n, d)| Scalar::ratio(n, d))
    }

    proptest! {
        #[test]
        fn addition_is_commutative_associative_and_exact(
            a in rational(), b in rational(), c in rational()
        ) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert!((&a + &b).is_exact());
        }

        #[test]
        fn multiplication_distributes_over_addition(
            a in rational(), b in rational(), c in rational()
        ) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn display_and_parse_round_trip(a in rational()) {
            let parsed: Scalar = a.to_string().parse().unwrap();
            prop_assert_eq!(parsed, a);
        }

        #[test]
        fn order_is_translation_invariant(a in rational(), b in rational(), c in rational()) {
            prop_assert_eq!(a <= b, &a + &c <= &b + &c);
        }

        #[test]
        fn midpoints_lie_between_their_endpoints(a in rational(), b in rational()) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let mid = Scalar::midpoint(&lo, &hi);
            prop_assert!(lo <= mid && mid <= hi);
        }
    }
}
