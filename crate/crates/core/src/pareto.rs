//! Dominance structure of the selection space.
//!
//! Each selection occupies a point in utility space, its vector of
//! per-sub-utility sums. Three nested fronts are computed over those points:
//!
//! * the **weak front**: nothing is strictly better in *every* coordinate;
//! * the **front**: nothing is at least as good everywhere and strictly
//!   better somewhere;
//! * the **convex front**: maximizers of some strictly positive weighting of
//!   the coordinates, i.e. the selections a linear mixture objective can ever
//!   prefer.
//!
//! With two sub-utilities the convex front is computed exactly: points on the
//! front have strictly decreasing y as x increases, their concave majorant is
//! found with one monotone scan, and the convex front is precisely the set of
//! front points lying *on* that chain. Collinear points interior to a chain
//! segment tie the argmax at the segment's weight and belong to the front, so
//! membership is "on the chain", not "is a vertex". Coincident points are
//! argmax ties too and are all kept.
//!
//! For three or more sub-utilities the convex front is explored by sweeping
//! seeded random positive weightings; that variant only ever under-reports
//! and is flagged as approximate.
//!
//! [`front_report`] stacks everything into the inclusion chain
//!
//! ```text
//! fairest ⊆ θ-optimal family ⊆ convex front ⊆ front ⊆ weak front ⊆ all
//! ```
//!
//! and records, per link, whether it held and whether it was strict. The
//! second link can genuinely fail when Θ touches 0 or 1: a selection optimal
//! only at a degenerate mixture weight need not be on the convex front. The
//! report states what the data does rather than what theory promises.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discrete::{
    all_selections, enumerate_optimal_set, fairest_optimal, FairestOptions, FairestResult,
    OptimalSet,
};
use crate::error::{Error, Result};
use crate::model::{FairnessSpec, ObjectiveSpec, Population, Selection, ThetaDomain};
use crate::scalar::Scalar;

/// `a` is at least as good everywhere and strictly better somewhere.
pub fn dominates(a: &Selection, b: &Selection) -> bool {
    let (va, vb) = (a.utility_vector(), b.utility_vector());
    assert_eq!(va.len(), vb.len(), "selections live in the same utility space");
    va.iter().zip(vb).all(|(x, y)| x >= y) && va.iter().zip(vb).any(|(x, y)| x > y)
}

/// `a` is strictly better in every coordinate.
pub fn strictly_dominates(a: &Selection, b: &Selection) -> bool {
    let (va, vb) = (a.utility_vector(), b.utility_vector());
    assert_eq!(va.len(), vb.len(), "selections live in the same utility space");
    va.iter().zip(vb).all(|(x, y)| x > y)
}

/// Selections not dominated by any other, ordered by ids.
pub fn pareto_front(selections: &[Selection]) -> Vec<Selection> {
    let mut front: Vec<Selection> = Vec::new();
    for s in selections {
        if front.iter().any(|f| dominates(f, s)) {
            continue;
        }
        front.retain(|f| !dominates(s, f));
        front.push(s.clone());
    }
    front.sort();
    front
}

/// Selections not strictly dominated by any other, ordered by ids.
pub fn weak_pareto_front(selections: &[Selection]) -> Vec<Selection> {
    let mut out: Vec<Selection> = selections
        .iter()
        .filter(|s| !selections.iter().any(|other| strictly_dominates(other, s)))
        .cloned()
        .collect();
    out.sort();
    out
}

/// 2-d cross product of `o→a` with `o→b`; positive means `b` lies left of
/// the ray through `a`.
fn cross(o: &[Scalar], a: &[Scalar], b: &[Scalar]) -> Scalar {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Exact convex front for two sub-utilities, ordered by ids.
pub fn convex_pareto_front(selections: &[Selection]) -> Result<Vec<Selection>> {
    if selections.iter().any(|s| s.utility_vector().len() != 2) {
        return Err(Error::Argument(
            "the exact convex front needs exactly two sub-utilities; \
             use the sampled variant for more"
                .into(),
        ));
    }
    let front = pareto_front(selections);
    if front.is_empty() {
        return Ok(Vec::new());
    }
    // Distinct utility points of the front, x ascending. Distinctness makes y
    // strictly descending: equal x with unequal y cannot both be undominated.
    let mut points: Vec<Vec<Scalar>> = front.iter().map(|s| s.utility_vector().to_vec()).collect();
    points.sort_by(|a, b| a[0].cmp(&b[0]).then_with(|| a[1].cmp(&b[1])));
    points.dedup_by(|a, b| a[0] == b[0] && a[1] == b[1]);
    // Concave majorant of the staircase: keep only strict right turns.
    let mut chain: Vec<Vec<Scalar>> = Vec::new();
    for p in points {
        while chain.len() >= 2
            && cross(&chain[chain.len() - 2], &chain[chain.len() - 1], &p) >= Scalar::zero()
        {
            chain.pop();
        }
        chain.push(p);
    }
    let on_chain = |v: &[Scalar]| -> bool {
        if chain.len() == 1 {
            return v[0] == chain[0][0] && v[1] == chain[0][1];
        }
        chain.windows(2).any(|seg| {
            v[0] >= seg[0][0] && v[0] <= seg[1][0] && cross(&seg[0], &seg[1], v).is_zero()
        })
    };
    Ok(front.into_iter().filter(|s| on_chain(s.utility_vector())).collect())
}

/// Approximate convex front for any number of sub-utilities: the union of
/// argmax ties over `weight_samples` seeded strictly positive weightings.
/// Never reports a selection outside the true convex front, but may miss
/// members whose weight cone no sample hits.
pub fn convex_pareto_front_sampled(
    selections: &[Selection],
    weight_samples: usize,
    seed: u64,
) -> Result<Vec<Selection>> {
    if weight_samples == 0 {
        return Err(Error::Argument("weight sample count must be at least 1".into()));
    }
    let Some(first) = selections.first() else {
        return Ok(Vec::new());
    };
    let dim = first.utility_vector().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<Selection> = Vec::new();
    for _ in 0..weight_samples {
        let weights: Vec<Scalar> = (0..dim)
            .map(|_| Scalar::ratio(rng.gen_range(1..=1_000_000), 1_000_000))
            .collect();
        let value = |s: &Selection| -> Scalar {
            weights.iter().zip(s.utility_vector()).map(|(w, u)| w * u).sum()
        };
        let best = selections.iter().map(value).max().expect("nonempty");
        for s in selections {
            if value(s) == best && !chosen.contains(s) {
                chosen.push(s.clone());
            }
        }
    }
    chosen.sort();
    Ok(chosen)
}

/// One inclusion of the chain, as observed on the data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainLink {
    pub from: &'static str,
    pub to: &'static str,
    pub holds: bool,
    pub strict: bool,
}

/// The full dominance picture of one instance.
#[derive(Clone, Debug)]
pub struct FrontReport {
    /// Every selection of size k.
    pub space: Vec<Selection>,
    pub weak_front: Vec<Selection>,
    pub front: Vec<Selection>,
    pub convex_front: Vec<Selection>,
    /// Selections optimal somewhere in Θ.
    pub optimal_family: Vec<Selection>,
    /// Fairness-maximal members of the family.
    pub fairest: Vec<Selection>,
    pub fairest_detail: FairestResult,
    pub links: Vec<ChainLink>,
}

fn is_subset(inner: &[Selection], outer: &[Selection]) -> bool {
    inner.iter().all(|s| outer.binary_search(s).is_ok())
}

fn link(from: &'static str, inner: &[Selection], to: &'static str, outer: &[Selection]) -> ChainLink {
    let holds = is_subset(inner, outer);
    ChainLink { from, to, holds, strict: holds && inner.len() < outer.len() }
}

/// Computes every front plus the θ-optimal family and stacks them into the
/// inclusion chain. Scalar mixtures only; the family is enumerated exactly.
pub fn front_report(
    population: &Population,
    objective: &ObjectiveSpec,
    domain: &ThetaDomain,
    k: usize,
    fairness: &FairnessSpec,
) -> Result<FrontReport> {
    let space = all_selections(population, objective, k)?;
    let weak_front = weak_pareto_front(&space);
    let front = pareto_front(&space);
    let convex_front = convex_pareto_front(&space)?;
    let optimal: OptimalSet = enumerate_optimal_set(population, objective, domain, k)?;
    let optimal_family: Vec<Selection> = {
        let mut v = optimal.selections();
        v.sort();
        v
    };
    let fairest_detail = fairest_optimal(population, &optimal, fairness, &FairestOptions::default())?;
    let fairest = {
        let mut v = fairest_detail.ties.clone();
        v.sort();
        v
    };
    let links = vec![
        link("fairest", &fairest, "theta-optimal-family", &optimal_family),
        link("theta-optimal-family", &optimal_family, "convex-front", &convex_front),
        link("convex-front", &convex_front, "front", &front),
        link("front", &front, "weak-front", &weak_front),
        link("weak-front", &weak_front, "all-selections", &space),
    ];
    Ok(FrontReport {
        space,
        weak_front,
        front,
        convex_front,
        optimal_family,
        fairest,
        fairest_detail,
        links,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{AttributeSchema, ItemId, ItemRecord};
    use crate::oracle;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    fn fixture() -> (Population, ObjectiveSpec) {
        (fixtures::students(), fixtures::students_objective())
    }

    fn pairs(pop: &Population, obj: &ObjectiveSpec) -> Vec<Selection> {
        all_selections(pop, obj, 2).unwrap()
    }

    fn id_sets(sels: &[Selection]) -> Vec<String> {
        sels.iter().map(|s| s.id_strings().join("")).collect()
    }

    #[test]
    fn utility_points_are_the_attribute_sums() {
        let (pop, obj) = fixture();
        let find = |ids: [&str; 2]| {
            Selection::new(&pop, &obj, ids.iter().map(|i| ItemId::from(*i))).unwrap()
        };
        assert_eq!(find(["B", "E"]).utility_vector(), &[s("30"), s("12")]);
        assert_eq!(find(["A", "M"]).utility_vector(), &[s("17"), s("19")]);
        assert_eq!(find(["A", "B"]).utility_vector(), &[s("25"), s("17")]);
        assert_eq!(find(["I", "Z"]).utility_vector(), &[s("25"), s("17")]);
    }

    #[test]
    fn front_of_the_fixture_has_seven_members() {
        let (pop, obj) = fixture();
        let front = pareto_front(&pairs(&pop, &obj));
        assert_eq!(id_sets(&front), vec!["AB", "AI", "AZ", "BE", "BI", "BZ", "IZ"]);
    }

    #[test]
    fn weak_front_adds_the_two_edge_maximizers() {
        let (pop, obj) = fixture();
        let weak = weak_pareto_front(&pairs(&pop, &obj));
        // {A,M} at (17, 19) ties the best grade sum, and nothing tops
        // {E,Z} at (29, 13) in both coordinates at once; neither is
        // strictly beaten everywhere, so both join the weak front.
        assert_eq!(
            id_sets(&weak),
            vec!["AB", "AI", "AM", "AZ", "BE", "BI", "BZ", "EZ", "IZ"]
        );
    }

    #[test]
    fn convex_front_keeps_only_the_chain() {
        let (pop, obj) = fixture();
        let convex = convex_pareto_front(&pairs(&pop, &obj)).unwrap();
        assert_eq!(id_sets(&convex), vec!["AI", "AZ", "BE", "BZ"]);
    }

    #[test]
    fn singleton_fronts_match_the_hand_computation() {
        let (pop, obj) = fixture();
        let singles = all_selections(&pop, &obj, 1).unwrap();
        assert_eq!(id_sets(&pareto_front(&singles)), vec!["A", "B", "I", "Z"]);
        assert_eq!(id_sets(&weak_pareto_front(&singles)), vec!["A", "B", "E", "I", "Z"]);
        // Isa sits strictly below the segment from Amy to Zac, so the convex
        // front skips her even though she is undominated.
        assert_eq!(id_sets(&convex_pareto_front(&singles).unwrap()), vec!["A", "B", "Z"]);
    }

    #[test]
    fn fronts_agree_with_the_definitional_oracles() {
        let (pop, obj) = fixture();
        for k in 1..=5 {
            let space = all_selections(&pop, &obj, k).unwrap();
            assert_eq!(pareto_front(&space), oracle::exhaustive_pareto(&space), "front k={k}");
            assert_eq!(
                weak_pareto_front(&space),
                oracle::exhaustive_weak_pareto(&space),
                "weak front k={k}"
            );
            assert_eq!(
                convex_pareto_front(&space).unwrap(),
                oracle::exhaustive_convex_pareto_2d(&space).unwrap(),
                "convex front k={k}"
            );
        }
    }

    #[test]
    fn coincident_points_survive_together() {
        let (pop, obj) = fixture();
        let front = pareto_front(&pairs(&pop, &obj));
        // {A,B} and {I,Z} share the point (25, 17); domination requires a
        // strict coordinate, so neither removes the other.
        assert!(id_sets(&front).contains(&"AB".to_string()));
        assert!(id_sets(&front).contains(&"IZ".to_string()));
    }

    #[test]
    fn collinear_points_on_the_chain_are_argmax_ties() {
        let schema = AttributeSchema::new(vec!["x".into(), "y".into()]).unwrap();
        let items = vec![
            ItemRecord::new("a", None, "g", vec![s("0"), s("2")]),
            ItemRecord::new("b", None, "g", vec![s("1"), s("1")]),
            ItemRecord::new("c", None, "g", vec![s("2"), s("0")]),
        ];
        let pop = Population::new(schema, items).unwrap();
        let obj = ObjectiveSpec::TwoAttributeMixture { first: "x".into(), second: "y".into() };
        let singles = all_selections(&pop, &obj, 1).unwrap();
        // "b" lies in the middle of the segment; equal weights tie all three.
        assert_eq!(id_sets(&convex_pareto_front(&singles).unwrap()), vec!["a", "b", "c"]);
        assert_eq!(
            convex_pareto_front(&singles).unwrap(),
            oracle::exhaustive_convex_pareto_2d(&singles).unwrap()
        );
    }

    #[test]
    fn incomparable_points_are_both_on_the_front() {
        let schema = AttributeSchema::new(vec!["x".into(), "y".into()]).unwrap();
        let items = vec![
            ItemRecord::new("p", None, "g", vec![s("3"), s("0")]),
            ItemRecord::new("q", None, "g", vec![s("0"), s("3")]),
        ];
        let pop = Population::new(schema, items).unwrap();
        let obj = ObjectiveSpec::TwoAttributeMixture { first: "x".into(), second: "y".into() };
        let singles = all_selections(&pop, &obj, 1).unwrap();
        assert_eq!(pareto_front(&singles).len(), 2);
    }

    #[test]
    fn sampled_convex_front_matches_the_exact_one_in_two_dimensions() {
        let (pop, obj) = fixture();
        let space = pairs(&pop, &obj);
        let exact = convex_pareto_front(&space).unwrap();
        let sampled = convex_pareto_front_sampled(&space, 200, 1).unwrap();
        assert_eq!(sampled, exact);
    }

    #[test]
    fn sampled_convex_front_stays_inside_the_front_in_three_dimensions() {
        let schema =
            AttributeSchema::new(vec!["x".into(), "y".into(), "z".into()]).unwrap();
        let items = vec![
            ItemRecord::new("a", None, "g", vec![s("5"), s("1"), s("1")]),
            ItemRecord::new("b", None, "g", vec![s("1"), s("5"), s("1")]),
            ItemRecord::new("c", None, "g", vec![s("1"), s("1"), s("5")]),
            ItemRecord::new("d", None, "g", vec![s("3"), s("3"), s("3")]),
            ItemRecord::new("e", None, "g", vec![s("1"), s("1"), s("1")]),
        ];
        let pop = Population::new(schema, items).unwrap();
        let obj = ObjectiveSpec::LinearMixture {
            attributes: vec!["x".into(), "y".into(), "z".into()],
        };
        let singles = all_selections(&pop, &obj, 1).unwrap();
        let sampled = convex_pareto_front_sampled(&singles, 100, 3).unwrap();
        let front = pareto_front(&singles);
        assert!(sampled.iter().all(|s| front.contains(s)));
        assert!(!sampled.iter().any(|s| s.id_strings() == vec!["e"]));
    }

    #[test]
    fn chain_on_the_wide_domain_holds_with_every_link_strict() {
        let (pop, obj) = fixture();
        let domain = ThetaDomain::interval(s("0.01"), s("0.99")).unwrap();
        let report =
            front_report(&pop, &obj, &domain, 2, &fixtures::mismatch_fairness()).unwrap();
        assert_eq!(id_sets(&report.fairest), vec!["AZ", "BE"]);
        assert_eq!(id_sets(&report.optimal_family), vec!["AI", "AZ", "BE", "BZ"]);
        assert_eq!(id_sets(&report.convex_front), vec!["AI", "AZ", "BE", "BZ"]);
        assert_eq!(report.front.len(), 7);
        assert_eq!(report.weak_front.len(), 9);
        assert_eq!(report.space.len(), 15);
        for l in &report.links {
            assert!(l.holds, "{} ⊆ {} should hold", l.from, l.to);
        }
        // The family equals the convex front here, so that link is not strict.
        let strict: Vec<bool> = report.links.iter().map(|l| l.strict).collect();
        assert_eq!(strict, vec![true, false, true, true, true]);
    }

    #[test]
    fn chain_on_the_narrow_domain_is_strict_at_the_family_link() {
        let (pop, obj) = fixture();
        let domain = ThetaDomain::interval(s("1/3"), s("2/3")).unwrap();
        let report =
            front_report(&pop, &obj, &domain, 2, &fixtures::mismatch_fairness()).unwrap();
        assert_eq!(id_sets(&report.fairest), vec!["AZ"]);
        assert_eq!(id_sets(&report.optimal_family), vec!["AZ", "BZ"]);
        assert!(report.links.iter().all(|l| l.holds));
        assert!(report.links.iter().all(|l| l.strict));
    }

    #[test]
    fn degenerate_chain_collapses_without_strictness() {
        let (pop, obj) = fixture();
        let report = front_report(
            &pop,
            &obj,
            &ThetaDomain::full_interval(),
            6,
            &fixtures::mismatch_fairness(),
        )
        .unwrap();
        assert_eq!(report.space.len(), 1);
        for l in &report.links {
            assert!(l.holds);
            assert!(!l.strict);
        }
    }

    #[test]
    fn every_front_member_is_certified_and_every_outsider_is_beaten() {
        let (pop, obj) = fixture();
        let space = pairs(&pop, &obj);
        let front = pareto_front(&space);
        for s in &space {
            let inside = front.contains(s);
            let beaten = space.iter().any(|o| dominates(o, s));
            assert_eq!(inside, !beaten, "{s}");
        }
    }

    #[test]
    fn exact_convex_front_rejects_higher_dimensions() {
        let schema3 =
            AttributeSchema::new(vec!["x".into(), "y".into(), "z".into()]).unwrap();
        let items = vec![ItemRecord::new("a", None, "g", vec![s("1"), s("2"), s("3")])];
        let pop3 = Population::new(schema3, items).unwrap();
        let obj3 = ObjectiveSpec::LinearMixture {
            attributes: vec!["x".into(), "y".into(), "z".into()],
        };
        let singles3 = all_selections(&pop3, &obj3, 1).unwrap();
        assert!(matches!(convex_pareto_front(&singles3), Err(Error::Argument(_))));
    }
}
