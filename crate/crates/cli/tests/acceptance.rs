//! Acceptance gate: one test per release criterion, so the test listing
//! doubles as the pass/fail sheet. Every numeric claim here is asserted at
//! its stated tolerance; the discrete pipeline is checked exactly, the
//! floating-point ascent at explicit epsilons.
//!
//! Criteria 1 through 10 drive the library; criterion 11 runs the installed
//! binary end to end.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use fairopt_core::continuous::{
    alternating_ascent, fairness_gradient, finite_difference_audit, quadratic_toy,
    simplex_relaxation, AscentConfig, Termination,
};
use fairopt_core::discrete::{
    all_selections, change_points, enumerate_optimal_set, fairest_optimal,
    quota_constrained_optimum, regret, top_k, Certificate, FairestOptions,
};
use fairopt_core::fixtures::{
    mismatch_fairness, quota_fairness, students, students_objective, students_with_intervals,
};
use fairopt_core::model::{score_item, FairnessSpec, Theta, ThetaDomain};
use fairopt_core::oracle::{
    exhaustive_convex_pareto_2d, exhaustive_fair_top_k, exhaustive_pareto, exhaustive_top_k,
    exhaustive_weak_pareto, random_instance, random_theta,
};
use fairopt_core::pareto::{convex_pareto_front, front_report, pareto_front, weak_pareto_front};
use fairopt_core::uncertain::{
    fairest_completion, Completion, IntervalPopulation, IntervalRecord, IntervalValue,
};
use fairopt_core::{Error, Scalar, Selection};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

fn theta(n: i64, d: i64) -> Theta {
    Theta::scalar(ratio(n, d))
}

fn ids(selections: &[Selection]) -> BTreeSet<Vec<String>> {
    selections.iter().map(|s| s.id_strings()).collect()
}

fn id_set(groups: &[&[&str]]) -> BTreeSet<Vec<String>> {
    groups
        .iter()
        .map(|g| g.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn default_options() -> FairestOptions {
    FairestOptions { prefer_theta_near: None }
}

// ==== criterion 1: the per-student score table is reproduced exactly ====

#[test]
fn criterion_01_score_table_is_exact() {
    let population = students();
    let objective = students_objective();
    // (θ numerator, θ denominator, scores for A B E I M Z as tenths)
    let table = [
        (1, 2, [100, 110, 100, 100, 80, 110]),
        (7, 20, [100, 98, 85, 97, 83, 101]),
        (1, 5, [100, 86, 70, 94, 86, 92]),
    ];
    for (num, den, expected) in table {
        let theta = theta(num, den);
        for (item, tenths) in population.items().iter().zip(expected) {
            let score = score_item(population.schema(), item, &objective, &theta)
                .expect("score evaluates");
            assert_eq!(
                score,
                ratio(tenths, 10),
                "score of {} at theta {num}/{den}",
                item.id
            );
            assert!(score.is_exact(), "fixture scores must stay rational");
        }
    }
}

// ==== criterion 2: reference optimum and the quota baseline ====

#[test]
fn criterion_02_reference_optimum_and_quota_regret() {
    let population = students();
    let objective = students_objective();
    let half = theta(1, 2);

    let optima = top_k(&population, &objective, &half, 2).expect("top-2");
    assert_eq!(ids(&optima), id_set(&[&["B", "Z"]]));
    assert_eq!(optima[0].score(&objective, &half).unwrap(), Scalar::integer(22));

    let report = regret(&population, &objective, &half, 2, &quota_fairness(ratio(3, 10)))
        .expect("quota baseline");
    assert_eq!(report.unconstrained_utility, Scalar::integer(22));
    assert_eq!(report.constrained_utility, Scalar::integer(21));
    assert_eq!(report.regret, Scalar::integer(1));
    assert_eq!(
        ids(&report.constrained),
        id_set(&[
            &["A", "B"],
            &["A", "Z"],
            &["B", "E"],
            &["B", "I"],
            &["E", "Z"],
            &["I", "Z"],
        ]),
        "six selections tie at 21 under the 30% quota"
    );
}

// ==== criterion 3: the optimal family over [1/3, 2/3] and its fairest member ====

#[test]
fn criterion_03_family_change_point_and_fairest_member() {
    let population = students();
    let objective = students_objective();
    let domain = ThetaDomain::interval(ratio(1, 3), ratio(2, 3)).expect("domain");

    let family = enumerate_optimal_set(&population, &objective, &domain, 2).expect("family");
    assert!(family.exact);
    assert_eq!(ids(&family.selections()), id_set(&[&["A", "Z"], &["B", "Z"]]));

    let regions: Vec<(String, Vec<(Scalar, Scalar)>)> = family
        .entries
        .iter()
        .map(|e| {
            let Certificate::Regions(regions) = &e.certificate else {
                panic!("exact enumeration certifies with regions");
            };
            (
                e.selection.to_string(),
                regions.iter().map(|r| (r.lo.clone(), r.hi.clone())).collect(),
            )
        })
        .collect();
    assert_eq!(
        regions,
        vec![
            ("{A, Z}".to_string(), vec![(ratio(1, 3), ratio(3, 8))]),
            ("{B, Z}".to_string(), vec![(ratio(3, 8), ratio(2, 3))]),
        ]
    );

    let points = change_points(&population, &objective, &domain, 2).expect("change points");
    assert_eq!(points, vec![ratio(3, 8)]);

    let fairest = fairest_optimal(&population, &family, &mismatch_fairness(), &default_options())
        .expect("fairest member");
    assert_eq!(fairest.winner.selection.id_strings(), vec!["A", "Z"]);
    assert!(fairest.fairness.is_zero(), "one man and one woman mismatch 0");
    assert_eq!(ids(&fairest.ties), id_set(&[&["A", "Z"]]));
    assert_eq!(fairest.theta_star.as_scalar().unwrap(), &ratio(17, 48));

    // The winning region covers the working estimate θ = 0.35.
    let Certificate::Regions(winner_regions) = &fairest.winner.certificate else {
        panic!("winner carries regions");
    };
    assert!(winner_regions.iter().any(|r| r.contains(&ratio(7, 20))));
}

// ==== criterion 4: the gender mix flips with theta exactly as claimed ====

#[test]
fn criterion_04_group_mix_by_theta_region() {
    let population = students();
    let objective = students_objective();
    // Probes: one interior point per claimed region of [0, 1].
    #[allow(clippy::type_complexity)]
    let cases: [(i64, i64, &[&str], &[(&str, usize)]); 5] = [
        (1, 10, &["A", "I"], &[("f", 2)]),
        (1, 5, &["A", "I"], &[("f", 2)]),
        (3, 10, &["A", "Z"], &[("f", 1), ("m", 1)]),
        (1, 2, &["B", "Z"], &[("m", 2)]),
        (7, 10, &["B", "Z"], &[("m", 2)]),
    ];
    for (num, den, expected_ids, expected_mix) in cases {
        let optima = top_k(&population, &objective, &theta(num, den), 2).expect("top-2");
        assert_eq!(optima.len(), 1, "theta {num}/{den} is not a crossing point");
        assert_eq!(optima[0].id_strings(), expected_ids.to_vec());
        let counts = optima[0].group_counts();
        assert_eq!(counts.len(), expected_mix.len(), "mix at theta {num}/{den}");
        for (group, count) in expected_mix {
            assert_eq!(counts.get(*group), Some(count), "{group} at theta {num}/{den}");
        }
    }
}

// ==== criterion 5: the frontier chain, every inclusion strict ====

#[test]
fn criterion_05_frontier_chain_is_exact_and_strict() {
    let population = students();
    let objective = students_objective();
    let domain = ThetaDomain::interval(ratio(1, 3), ratio(2, 3)).expect("domain");
    let report = front_report(&population, &objective, &domain, 2, &mismatch_fairness())
        .expect("front report");

    assert_eq!(report.space.len(), 15);
    assert_eq!(
        ids(&report.weak_front),
        id_set(&[
            &["A", "B"],
            &["A", "I"],
            &["A", "M"],
            &["A", "Z"],
            &["B", "E"],
            &["B", "I"],
            &["B", "Z"],
            &["E", "Z"],
            &["I", "Z"],
        ])
    );
    assert_eq!(
        ids(&report.front),
        id_set(&[
            &["A", "B"],
            &["A", "I"],
            &["A", "Z"],
            &["B", "E"],
            &["B", "I"],
            &["B", "Z"],
            &["I", "Z"],
        ])
    );
    assert_eq!(
        ids(&report.convex_front),
        id_set(&[&["A", "I"], &["A", "Z"], &["B", "E"], &["B", "Z"]])
    );
    assert_eq!(ids(&report.optimal_family), id_set(&[&["A", "Z"], &["B", "Z"]]));
    assert_eq!(ids(&report.fairest), id_set(&[&["A", "Z"]]));

    assert_eq!(report.links.len(), 5);
    for link in &report.links {
        assert!(link.holds, "{} within {}", link.from, link.to);
        assert!(link.strict, "{} strictly within {}", link.from, link.to);
    }
}

// ==== criterion 6: singleton frontiers, including the convexity gap ====

#[test]
fn criterion_06_singleton_frontiers() {
    let population = students();
    let objective = students_objective();
    let singles = all_selections(&population, &objective, 1).expect("singletons");

    assert_eq!(
        ids(&pareto_front(&singles)),
        id_set(&[&["A"], &["B"], &["I"], &["Z"]])
    );
    assert_eq!(
        ids(&weak_pareto_front(&singles)),
        id_set(&[&["A"], &["B"], &["E"], &["I"], &["Z"]])
    );
    let convex = convex_pareto_front(&singles).expect("convex front");
    assert_eq!(ids(&convex), id_set(&[&["A"], &["B"], &["Z"]]));
    assert!(
        !convex.iter().any(|s| s.id_strings() == vec!["I"]),
        "Isa sits strictly inside the convex hull"
    );
}

// ==== criterion 7: the fast solvers agree with brute force on 200 instances ====

#[test]
fn criterion_07_solvers_match_brute_force_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut infeasible_seen = 0usize;
    for round in 0..200 {
        let (population, objective) = random_instance(&mut rng, 10);
        let k = 1 + (round % population.len().min(3));
        let theta = Theta::scalar(random_theta(&mut rng));

        let fast = top_k(&population, &objective, &theta, k).expect("top-k");
        let slow = exhaustive_top_k(&population, &objective, &theta, k).expect("oracle top-k");
        assert_eq!(ids(&fast), ids(&slow), "round {round}: top-k mismatch");

        let labels: Vec<String> = population.group_labels().into_iter().collect();
        let label = labels[round % labels.len()].clone();
        let spec = FairnessSpec::with_quota(
            FairnessSpec::mismatch(labels[0].clone(), labels[labels.len() - 1].clone()),
            label,
            ratio((round % 5) as i64, 4),
        );
        let fair_slow =
            exhaustive_fair_top_k(&population, &objective, &theta, k, &spec).expect("oracle");
        match quota_constrained_optimum(&population, &objective, &theta, k, &spec) {
            Ok(fair_fast) => {
                assert!(!fair_slow.is_empty(), "round {round}: oracle disagrees on feasibility");
                assert_eq!(ids(&fair_fast), ids(&fair_slow), "round {round}: quota mismatch");
            }
            Err(Error::Infeasible(_)) => {
                assert!(fair_slow.is_empty(), "round {round}: solver wrongly infeasible");
                infeasible_seen += 1;
            }
            Err(other) => panic!("round {round}: unexpected error {other}"),
        }

        let space = all_selections(&population, &objective, k).expect("space");
        assert_eq!(
            ids(&pareto_front(&space)),
            ids(&exhaustive_pareto(&space)),
            "round {round}: front mismatch"
        );
        assert_eq!(
            ids(&weak_pareto_front(&space)),
            ids(&exhaustive_weak_pareto(&space)),
            "round {round}: weak front mismatch"
        );
        assert_eq!(
            ids(&convex_pareto_front(&space).expect("convex")),
            ids(&exhaustive_convex_pareto_2d(&space).expect("oracle convex")),
            "round {round}: convex front mismatch"
        );
    }
    assert!(infeasible_seen > 0, "the quota draw never exercised infeasibility");
}

// ==== criterion 8: the analytic fairness gradient survives its audits ====

#[test]
fn criterion_08_gradient_audit_and_singular_refusal() {
    let toy = quadratic_toy();
    for i in 0..10 {
        let t = 0.05 + 0.1 * i as f64;
        let solution = toy.problem.exact_inner(&[t]).expect("inner optimum");
        let grad = fairness_gradient(&toy.problem, &[t], &solution).expect("gradient");
        assert_eq!(grad.len(), 1);
        assert!(
            (grad[0] - (2.0 * t - 1.0)).abs() < 1e-12,
            "analytic gradient at theta {t} was {}",
            grad[0]
        );
        let audit = finite_difference_audit(&toy.problem, &[t], 1e-5).expect("audit");
        assert!(
            audit.max_absolute_deviation < 1e-6,
            "finite differences diverge at theta {t}: {}",
            audit.max_absolute_deviation
        );
    }

    let relaxed = simplex_relaxation();
    let err = fairness_gradient(&relaxed.problem, &[0.5], &relaxed.initial_solution)
        .expect_err("a linear utility has no usable curvature");
    assert!(matches!(err, Error::SingularHessian { .. }), "got {err}");

    let trace = alternating_ascent(
        &relaxed.problem,
        &AscentConfig::default(),
        &relaxed.initial_theta,
        &relaxed.initial_solution,
    )
    .expect("the refusal still reports a trace");
    assert_eq!(trace.termination, Termination::SingularHessian);
}

// ==== criterion 9: widening the domain never lowers the best fairness ====

#[test]
fn criterion_09_best_fairness_is_monotone_in_the_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for round in 0..50 {
        let (population, objective) = random_instance(&mut rng, 8);
        let k = 1 + (round % population.len().min(2));
        let mut cuts = [
            random_theta(&mut rng),
            random_theta(&mut rng),
            random_theta(&mut rng),
            random_theta(&mut rng),
        ];
        cuts.sort_by(|a, b| a.cmp_value(b));
        let [outer_lo, inner_lo, inner_hi, outer_hi] = cuts;

        let labels: Vec<String> = population.group_labels().into_iter().collect();
        let spec =
            FairnessSpec::mismatch(labels[0].clone(), labels[labels.len() - 1].clone());

        let best = |lo: &Scalar, hi: &Scalar| {
            let domain = ThetaDomain::interval(lo.clone(), hi.clone()).expect("domain");
            let family =
                enumerate_optimal_set(&population, &objective, &domain, k).expect("family");
            fairest_optimal(&population, &family, &spec, &default_options())
                .expect("fairest")
                .fairness
        };
        let inner = best(&inner_lo, &inner_hi);
        let outer = best(&outer_lo, &outer_hi);
        assert!(
            outer.cmp_value(&inner) != std::cmp::Ordering::Less,
            "round {round}: fairness fell from {inner} to {outer} as the domain widened"
        );
    }
}

// ==== criterion 10: the interval search finds slack, degenerate data does not ====

#[test]
fn criterion_10_interval_search_and_degenerate_equivalence() {
    let objective = students_objective();
    let fairness = mismatch_fairness();
    let half = theta(1, 2);

    let uncertain = students_with_intervals().expect("interval fixture");
    let result =
        fairest_completion(&uncertain, &objective, &half, 2, &fairness).expect("search");
    assert_eq!(result.completions_evaluated, 4, "two open cells, both endpoints each");
    assert_eq!(result.selection.id_strings(), vec!["E", "Z"]);
    assert!(result.fairness.is_zero(), "the search reaches mismatch 0");
    assert!(
        result.audit.asymmetry.cmp_value(&Scalar::zero()) == std::cmp::Ordering::Greater,
        "the chosen endpoints favor one group: asymmetry {}",
        result.audit.asymmetry
    );

    // Degenerate intervals collapse to the ordinary solver's answer.
    let population = students();
    let schema = population.schema().clone();
    let records = population
        .items()
        .iter()
        .map(|item| {
            IntervalRecord::new(
                item.id.as_str(),
                item.display_name.as_deref(),
                item.group.clone(),
                item.values.iter().cloned().map(IntervalValue::exact).collect(),
            )
        })
        .collect();
    let degenerate = IntervalPopulation::new(schema, records).expect("degenerate population");
    assert!(degenerate.open_cells().is_empty());
    let collapsed =
        fairest_completion(&degenerate, &objective, &half, 2, &fairness).expect("search");
    assert_eq!(collapsed.completions_evaluated, 1);
    assert!(collapsed.audit.asymmetry.is_zero());
    assert_eq!(
        collapsed.completion,
        Completion::new(population.items().iter().map(|i| i.values.clone()).collect()),
        "the only completion is the data itself"
    );

    let ordinary = top_k(&population, &objective, &half, 2).expect("top-2");
    assert_eq!(ordinary.len(), 1);
    assert_eq!(collapsed.selection.id_strings(), ordinary[0].id_strings());
    assert_eq!(
        collapsed.fairness,
        fairopt_core::model::fairness_score(&population, &ordinary[0], &fairness).expect("score"),
    );
}

// ==== criterion 11: repeated binary runs are byte-identical ====

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root")
        .to_path_buf()
}

fn run_binary(args: &[&str]) -> (Vec<u8>, Option<i32>) {
    let output = Command::new(env!("CARGO_BIN_EXE_fairopt"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs");
    (output.stdout, output.status.code())
}

#[test]
fn criterion_11_repeated_runs_are_byte_identical() {
    let cases: [&[&str]; 4] = [
        &["solve", "--config", "data/students.toml"],
        &["pareto", "--config", "data/students.toml", "--format", "csv"],
        &[
            "audit",
            "--config",
            "data/students.toml",
            "--data",
            "data/students_intervals.csv",
            "--theta",
            "1/2",
        ],
        &["ascent", "--problem", "quadratic-toy", "--exact-inner", "--format", "summary"],
    ];
    for args in cases {
        let (first, code_first) = run_binary(args);
        let (second, code_second) = run_binary(args);
        assert_eq!(code_first, Some(0), "fairopt {args:?} failed");
        assert_eq!(code_first, code_second);
        assert!(!first.is_empty(), "fairopt {args:?} wrote nothing");
        assert_eq!(first, second, "fairopt {args:?} is not reproducible");
    }

    // The sampled path (a box domain) must also be seed-stable.
    let sampled: [&str; 12] = [
        "solve",
        "--config",
        "data/students.toml",
        "--theta-lo",
        "1/3",
        "--theta-hi",
        "2/3",
        "--samples",
        "50",
        "--seed",
        "7",
        "--format",
    ];
    let mut args: Vec<&str> = sampled.to_vec();
    args.push("json");
    let (first, code) = run_binary(&args);
    let (second, _) = run_binary(&args);
    assert_eq!(code, Some(0));
    assert_eq!(first, second, "seeded sampling is not reproducible");
}
