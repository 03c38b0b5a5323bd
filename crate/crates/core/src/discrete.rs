//! Exact solvers for selecting k of n items under the parametrized objective.
//!
//! # Why breakpoints are enough
//!
//! For the scalar mixture every item's score is an affine function of θ:
//!
//! ```text
//! score_i(θ) = intercept_i + θ·slope_i
//! ```
//!
//! The ranking of items can therefore only change where two score lines
//! cross. Between consecutive crossings the ranking is constant, so the set
//! of optimal k-subsets is constant there too. Enumerating all pairwise
//! crossings inside Θ, evaluating the top-k at one interior point of each
//! cell and at every breakpoint (where ties produce several optimal subsets)
//! yields the complete family `S*_Θ = { s*_θ : θ ∈ Θ }` with exact rational
//! region boundaries.
//!
//! Scores are continuous in θ, so a subset optimal on an open cell is still
//! (weakly) optimal at the cell's endpoints; certifying regions are closed
//! and adjacent regions share their boundary point.
//!
//! For vector-valued θ (general linear mixtures) there is no 1-D sweep; a
//! seeded deterministic sample of Θ gives a subset of `S*_Θ` flagged as
//! approximate, with each selection certified by the parameter point that
//! produced it.
//!
//! Everything returns *all* ties, ordered by item ids, so repeated runs are
//! byte-for-byte reproducible.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    fairness_score, is_fair, FairnessSpec, ItemId, ObjectiveSpec, Population, Selection, Theta,
    ThetaDomain,
};
use crate::scalar::Scalar;

/// Cap on exhaustive subset enumeration; beyond this the solvers refuse
/// rather than stall.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

fn validate_k(population: &Population, k: usize) -> Result<()> {
    if k == 0 || k > population.len() {
        return Err(Error::Argument(format!(
            "k must satisfy 1 ≤ k ≤ {} (population size), got {k}",
            population.len()
        )));
    }
    Ok(())
}

/// Every k-subset of the population, ordered by ids.
///
/// This is the raw solution space `S`; callers that only need optima should
/// prefer [`top_k`], which avoids materializing it.
pub fn all_selections(
    population: &Population,
    objective: &ObjectiveSpec,
    k: usize,
) -> Result<Vec<Selection>> {
    validate_k(population, k)?;
    let count = binomial(population.len(), k);
    if count > ENUMERATION_LIMIT {
        return Err(Error::Complexity {
            what: "candidate selections",
            actual: count.min(usize::MAX as u128) as usize,
            limit: ENUMERATION_LIMIT as usize,
        });
    }
    let mut ids: Vec<ItemId> = population.items().iter().map(|r| r.id.clone()).collect();
    ids.sort();
    let mut out = Vec::with_capacity(count as usize);
    for combo in ids.into_iter().combinations(k) {
        out.push(Selection::new(population, objective, combo)?);
    }
    out.sort();
    Ok(out)
}

/// All optimal k-subsets at a fixed θ, ordered by ids.
///
/// Ties are genuine outputs, not an error: at a crossing point several
/// subsets share the maximal utility and every one of them is returned.
pub fn top_k(
    population: &Population,
    objective: &ObjectiveSpec,
    theta: &Theta,
    k: usize,
) -> Result<Vec<Selection>> {
    validate_k(population, k)?;
    let mut scored: Vec<(ItemId, Scalar)> = Vec::with_capacity(population.len());
    for item in population.items() {
        let score = crate::model::score_item(population.schema(), item, objective, theta)?;
        scored.push((item.id.clone(), score));
    }
    // Sort by score descending, id ascending; only the threshold matters.
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let threshold = scored[k - 1].1.clone();
    let above: Vec<ItemId> = scored
        .iter()
        .filter(|(_, s)| *s > threshold)
        .map(|(id, _)| id.clone())
        .collect();
    let tied: Vec<ItemId> = scored
        .iter()
        .filter(|(_, s)| *s == threshold)
        .map(|(id, _)| id.clone())
        .collect();
    let need = k - above.len();
    let mut out = Vec::new();
    for fill in tied.into_iter().combinations(need) {
        let ids = above.iter().cloned().chain(fill);
        out.push(Selection::new(population, objective, ids)?);
    }
    out.sort();
    Ok(out)
}

/// All utility-maximal k-subsets among those passing the hard fairness
/// predicate, ordered by ids. Errors with [`Error::Infeasible`] when no
/// subset is fair.
pub fn quota_constrained_optimum(
    population: &Population,
    objective: &ObjectiveSpec,
    theta: &Theta,
    k: usize,
    fairness: &FairnessSpec,
) -> Result<Vec<Selection>> {
    fairness.validate(population)?;
    let mut best: Option<Scalar> = None;
    let mut winners: Vec<Selection> = Vec::new();
    for sel in all_selections(population, objective, k)? {
        if !is_fair(population, &sel, fairness)? {
            continue;
        }
        let score = sel.score(objective, theta)?;
        match &best {
            Some(b) if score < *b => {}
            Some(b) if score == *b => winners.push(sel),
            _ => {
                best = Some(score);
                winners = vec![sel];
            }
        }
    }
    if winners.is_empty() {
        return Err(Error::Infeasible(format!(
            "no selection of size {k} satisfies the fairness predicate"
        )));
    }
    winners.sort();
    Ok(winners)
}

/// Price of imposing the hard predicate at a fixed θ.
#[derive(Clone, Debug)]
pub struct RegretReport {
    pub theta: Theta,
    /// All unconstrained optima.
    pub unconstrained: Vec<Selection>,
    pub unconstrained_utility: Scalar,
    /// All optima among fair selections.
    pub constrained: Vec<Selection>,
    pub constrained_utility: Scalar,
    /// `unconstrained_utility − constrained_utility`; never negative.
    pub regret: Scalar,
}

/// Computes utilities with and without the hard predicate and their gap.
pub fn regret(
    population: &Population,
    objective: &ObjectiveSpec,
    theta: &Theta,
    k: usize,
    fairness: &FairnessSpec,
) -> Result<RegretReport> {
    let unconstrained = top_k(population, objective, theta, k)?;
    let unconstrained_utility = unconstrained[0].score(objective, theta)?;
    let constrained = quota_constrained_optimum(population, objective, theta, k, fairness)?;
    let constrained_utility = constrained[0].score(objective, theta)?;
    let regret = &unconstrained_utility - &constrained_utility;
    Ok(RegretReport {
        theta: theta.clone(),
        unconstrained,
        unconstrained_utility,
        constrained,
        constrained_utility,
        regret,
    })
}

/// Per-item affine score lines `(intercept, slope)` for the scalar mixture,
/// in population order.
fn score_lines(
    population: &Population,
    objective: &ObjectiveSpec,
) -> Result<Vec<(ItemId, Scalar, Scalar)>> {
    if !matches!(objective, ObjectiveSpec::TwoAttributeMixture { .. }) {
        return Err(Error::Parameter(
            "exact θ-sweep needs the scalar two-attribute mixture; \
             use sampling for vector-valued θ"
                .into(),
        ));
    }
    let mut lines = Vec::with_capacity(population.len());
    for item in population.items() {
        let subs = objective.sub_utilities(population.schema(), item)?;
        let intercept = subs[1].clone();
        let slope = &subs[0] - &subs[1];
        lines.push((item.id.clone(), intercept, slope));
    }
    Ok(lines)
}

/// All θ in Θ where two items' score lines cross, sorted ascending and
/// deduplicated. Parallel lines (equal slopes) never cross; crossings
/// outside Θ are dropped.
pub fn crossing_points(
    population: &Population,
    objective: &ObjectiveSpec,
    domain: &ThetaDomain,
) -> Result<Vec<Scalar>> {
    let (lo, hi) = domain.as_interval()?;
    let lines = score_lines(population, objective)?;
    let mut crossings = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (_, bi, mi) = &lines[i];
            let (_, bj, mj) = &lines[j];
            let denom = mi - mj;
            if denom.is_zero() {
                continue;
            }
            let t = (bj - bi) / denom;
            if t >= *lo && t <= *hi {
                crossings.push(t);
            }
        }
    }
    crossings.sort();
    crossings.dedup();
    Ok(crossings)
}

/// A closed subinterval of Θ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaInterval {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl ThetaInterval {
    fn new(lo: Scalar, hi: Scalar) -> Self {
        debug_assert!(lo <= hi);
        ThetaInterval { lo, hi }
    }

    fn point(t: Scalar) -> Self {
        ThetaInterval { lo: t.clone(), hi: t }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Scalar {
        Scalar::midpoint(&self.lo, &self.hi)
    }

    pub fn contains(&self, t: &Scalar) -> bool {
        self.lo <= *t && *t <= self.hi
    }

    /// Smallest distance from `t` to this interval; zero when inside.
    pub fn distance_to(&self, t: &Scalar) -> Scalar {
        if self.contains(t) {
            Scalar::zero()
        } else if *t < self.lo {
            &self.lo - t
        } else {
            t - &self.hi
        }
    }

    /// Nearest point of the interval to `t`.
    pub fn clamp(&self, t: &Scalar) -> Scalar {
        if *t < self.lo {
            self.lo.clone()
        } else if *t > self.hi {
            self.hi.clone()
        } else {
            t.clone()
        }
    }
}

impl fmt::Display for ThetaInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{{{}}}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Proof that a selection is θ-optimal: either exact closed regions of the
/// scalar domain, or the sampled parameter points that produced it.
#[derive(Clone, Debug)]
pub enum Certificate {
    Regions(Vec<ThetaInterval>),
    Witnesses(Vec<Theta>),
}

impl Certificate {
    /// A parameter point at which the selection is optimal: the midpoint of
    /// the first region, or the first witness.
    pub fn representative(&self) -> Theta {
        match self {
            Certificate::Regions(regions) => Theta::scalar(regions[0].midpoint()),
            Certificate::Witnesses(points) => points[0].clone(),
        }
    }
}

/// One member of `S*_Θ` with its optimality certificate.
#[derive(Clone, Debug)]
pub struct OptimalSetEntry {
    pub selection: Selection,
    pub certificate: Certificate,
    /// Midpoint of the first region (or first witness).
    pub representative: Theta,
    /// `U_θ(selection)` at the representative θ.
    pub utility_at_representative: Scalar,
}

/// The family of selections optimal somewhere in Θ.
#[derive(Clone, Debug)]
pub struct OptimalSet {
    pub entries: Vec<OptimalSetEntry>,
    /// True for the exhaustive 1-D sweep; false for sampled enumeration,
    /// which may miss selections optimal only on unvisited slivers of Θ.
    pub exact: bool,
}

impl OptimalSet {
    pub fn selections(&self) -> Vec<Selection> {
        self.entries.iter().map(|e| e.selection.clone()).collect()
    }

    pub fn contains(&self, selection: &Selection) -> bool {
        self.entries.iter().any(|e| e.selection == *selection)
    }
}

fn merge_regions(mut regions: Vec<ThetaInterval>) -> Vec<ThetaInterval> {
    regions.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
    let mut merged: Vec<ThetaInterval> = Vec::new();
    for r in regions {
        match merged.last_mut() {
            Some(last) if r.lo <= last.hi => {
                if r.hi > last.hi {
                    last.hi = r.hi;
                }
            }
            _ => merged.push(r),
        }
    }
    merged
}

/// Breakpoint partition of Θ: sorted boundary points including both ends.
fn partition(
    population: &Population,
    objective: &ObjectiveSpec,
    domain: &ThetaDomain,
) -> Result<Vec<Scalar>> {
    let (lo, hi) = domain.as_interval()?;
    let mut points = crossing_points(population, objective, domain)?;
    points.insert(0, lo.clone());
    points.push(hi.clone());
    points.sort();
    points.dedup();
    Ok(points)
}

/// Exhaustive `S*_Θ` for the scalar mixture: every selection optimal at some
/// θ ∈ Θ, each with the full union of its certifying closed regions,
/// deduplicated and ordered by (first region, ids).
pub fn enumerate_optimal_set(
    population: &Population,
    objective: &ObjectiveSpec,
    domain: &ThetaDomain,
    k: usize,
) -> Result<OptimalSet> {
    validate_k(population, k)?;
    let points = partition(population, objective, domain)?;
    let mut found: BTreeMap<Vec<ItemId>, (Selection, Vec<ThetaInterval>)> = BTreeMap::new();
    let mut record = |sel: Selection, region: ThetaInterval| {
        let key = sel.ids().to_vec();
        found.entry(key).or_insert_with(|| (sel, Vec::new())).1.push(region);
    };
    // Interior of each cell: one probe decides the whole cell. The cell's
    // optima stay weakly optimal at its endpoints by continuity, so the
    // certifying region is closed.
    for pair in points.windows(2) {
        let mid = Scalar::midpoint(&pair[0], &pair[1]);
        for sel in top_k(population, objective, &Theta::scalar(mid), k)? {
            record(sel, ThetaInterval::new(pair[0].clone(), pair[1].clone()));
        }
    }
    // Breakpoints and endpoints: ties live exactly here.
    for t in &points {
        for sel in top_k(population, objective, &Theta::scalar(t.clone()), k)? {
            record(sel, ThetaInterval::point(t.clone()));
        }
    }
    let mut entries: Vec<OptimalSetEntry> = found
        .into_values()
        .map(|(selection, regions)| {
            let certificate = Certificate::Regions(merge_regions(regions));
            let representative = certificate.representative();
            let utility_at_representative = selection.score(objective, &representative)?;
            Ok(OptimalSetEntry { selection, certificate, representative, utility_at_representative })
        })
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| {
        let (ra, rb) = (region_start(a), region_start(b));
        ra.cmp(rb).then_with(|| a.selection.cmp(&b.selection))
    });
    Ok(OptimalSet { entries, exact: true })
}

fn region_start(entry: &OptimalSetEntry) -> &Scalar {
    match &entry.certificate {
        Certificate::Regions(r) => &r[0].lo,
        Certificate::Witnesses(_) => unreachable!("exact entries carry regions"),
    }
}

/// Breakpoints strictly inside Θ where the *set* of optimal selections on
/// the two adjacent cells differs. Crossings between items far from the
/// top-k leave no trace here.
pub fn change_points(
    population: &Population,
    objective: &ObjectiveSpec,
    domain: &ThetaDomain,
    k: usize,
) -> Result<Vec<Scalar>> {
    validate_k(population, k)?;
    let points = partition(population, objective, domain)?;
    if points.len() < 3 {
        return Ok(Vec::new());
    }
    let cell_optima = |a: &Scalar, b: &Scalar| -> Result<Vec<Selection>> {
        let mid = Scalar::midpoint(a, b);
        top_k(population, objective, &Theta::scalar(mid), k)
    };
    let mut out = Vec::new();
    for i in 1..points.len() - 1 {
        let left = cell_optima(&points[i - 1], &points[i])?;
        let right = cell_optima(&points[i], &points[i + 1])?;
        if left != right {
            out.push(points[i].clone());
        }
    }
    Ok(out)
}

/// Seeded sample of Θ for vector-valued θ. Box domains are covered by an
/// axis grid with one uniform draw inside each cell; hull domains by the
/// vertices themselves, the centroid, then random convex combinations. All
/// randomness is rational, so scoring stays exact, and the same seed always
/// yields the same report.
pub fn sample_optimal_set(
    population: &Population,
    objective: &ObjectiveSpec,
    domain: &ThetaDomain,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<OptimalSet> {
    validate_k(population, k)?;
    if samples == 0 {
        return Err(Error::Argument("sample count must be at least 1".into()));
    }
    if domain.dimension() != objective.theta_dimension() {
        return Err(Error::Parameter(format!(
            "domain dimension {} does not match objective θ dimension {}",
            domain.dimension(),
            objective.theta_dimension()
        )));
    }
    let points: Vec<Theta> = match domain {
        ThetaDomain::Interval { .. } => {
            return Err(Error::Parameter(
                "scalar θ domains are enumerated exactly; sampling is for vector θ".into(),
            ))
        }
        ThetaDomain::Box { lower, upper } => box_sample(lower, upper, samples, seed),
        ThetaDomain::Hull { vertices } => hull_sample(vertices, samples, seed),
    };
    let mut found: BTreeMap<Vec<ItemId>, (Selection, Vec<Theta>)> = BTreeMap::new();
    for theta in points {
        for sel in top_k(population, objective, &theta, k)? {
            let key = sel.ids().to_vec();
            found
                .entry(key)
                .or_insert_with(|| (sel, Vec::new()))
                .1
                .push(theta.clone());
        }
    }
    let mut entries: Vec<OptimalSetEntry> = found
        .into_values()
        .map(|(selection, witnesses)| {
            let certificate = Certificate::Witnesses(witnesses);
            let representative = certificate.representative();
            let utility_at_representative = selection.score(objective, &representative)?;
            Ok(OptimalSetEntry { selection, certificate, representative, utility_at_representative })
        })
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| a.selection.cmp(&b.selection));
    Ok(OptimalSet { entries, exact: false })
}

/// Uniform rational in [0, 1) with 32 bits of resolution.
fn unit_rational(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::ratio(rng.next_u32() as i64, 1i64 << 32)
}

fn box_sample(lower: &[Scalar], upper: &[Scalar], samples: usize, seed: u64) -> Vec<Theta> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = lower.len();
    // Smallest per-axis grid whose cell count reaches the sample budget.
    let mut cells_per_axis = 1usize;
    while (cells_per_axis as u128).pow(m as u32) < samples as u128 {
        cells_per_axis += 1;
    }
    let axis_cells: Vec<Vec<usize>> = vec![(0..cells_per_axis).collect(); m];
    let mut out = Vec::with_capacity(samples);
    for cell in axis_cells.into_iter().multi_cartesian_product() {
        if out.len() == samples {
            break;
        }
        let components = cell
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(&c, (lo, hi))| {
                let frac =
                    (Scalar::from(c) + unit_rational(&mut rng)) / Scalar::from(cells_per_axis);
                lo + &(&frac * &(hi - lo))
            })
            .collect();
        out.push(Theta::point(components));
    }
    out
}

fn hull_sample(vertices: &[Vec<Scalar>], samples: usize, seed: u64) -> Vec<Theta> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    // Extreme points first: they witness the boundary optima no random
    // mixture is guaranteed to hit.
    for v in vertices.iter().take(samples) {
        out.push(Theta::point(v.clone()));
    }
    if out.len() < samples && vertices.len() > 1 {
        let n = Scalar::from(vertices.len());
        let centroid = (0..vertices[0].len())
            .map(|j| vertices.iter().map(|v| &v[j]).sum::<Scalar>() / n.clone())
            .collect();
        out.push(Theta::point(centroid));
    }
    while out.len() < samples {
        let mut weights: Vec<Scalar> = (0..vertices.len()).map(|_| unit_rational(&mut rng)).collect();
        let total: Scalar = weights.iter().sum();
        if total.is_zero() {
            weights = vec![Scalar::one(); vertices.len()];
        }
        let total: Scalar = weights.iter().sum();
        let components = (0..vertices[0].len())
            .map(|j| {
                weights
                    .iter()
                    .zip(vertices)
                    .map(|(w, v)| w * &v[j])
                    .sum::<Scalar>()
                    / total.clone()
            })
            .collect();
        out.push(Theta::point(components));
    }
    out
}

/// Options for [`fairest_optimal`].
#[derive(Clone, Debug, Default)]
pub struct FairestOptions {
    /// Secondary tie-break: among equally fair entries prefer the one whose
    /// certificate lies nearest this θ, and report the nearest certified
    /// point as θ*. Off by default; scalar domains only.
    pub prefer_theta_near: Option<Scalar>,
}

/// The fairness-maximizing member(s) of an optimal set.
#[derive(Clone, Debug)]
pub struct FairestResult {
    pub winner: OptimalSetEntry,
    /// Every entry achieving the maximal fairness, in enumeration order.
    pub ties: Vec<Selection>,
    pub fairness: Scalar,
    /// A θ at which the winner is optimal.
    pub theta_star: Theta,
    /// Whether the underlying optimal set was exhaustive.
    pub exact: bool,
}

/// Maximizes the soft fairness score over an optimal set.
///
/// The winner is the first maximally fair entry in enumeration order
/// (regions ascending, then ids); `ties` lists all of them. θ* defaults to
/// the winner's representative point.
pub fn fairest_optimal(
    population: &Population,
    optimal: &OptimalSet,
    fairness: &FairnessSpec,
    options: &FairestOptions,
) -> Result<FairestResult> {
    if optimal.entries.is_empty() {
        return Err(Error::Argument("optimal set has no entries".into()));
    }
    let scores: Vec<Scalar> = optimal
        .entries
        .iter()
        .map(|e| fairness_score(population, &e.selection, fairness))
        .collect::<Result<_>>()?;
    let best = scores.iter().max().expect("nonempty").clone();
    let candidates: Vec<&OptimalSetEntry> = optimal
        .entries
        .iter()
        .zip(&scores)
        .filter(|(_, s)| **s == best)
        .map(|(e, _)| e)
        .collect();
    let winner = match &options.prefer_theta_near {
        None => candidates[0],
        Some(target) => candidates
            .iter()
            .copied()
            .min_by_key(|e| certificate_distance(&e.certificate, target))
            .expect("nonempty"),
    };
    let theta_star = match &options.prefer_theta_near {
        None => winner.representative.clone(),
        Some(target) => nearest_certified_point(&winner.certificate, target),
    };
    Ok(FairestResult {
        winner: (*winner).clone(),
        ties: candidates.iter().map(|e| e.selection.clone()).collect(),
        fairness: best,
        theta_star,
        exact: optimal.exact,
    })
}

fn certificate_distance(certificate: &Certificate, target: &Scalar) -> Scalar {
    match certificate {
        Certificate::Regions(regions) => regions
            .iter()
            .map(|r| r.distance_to(target))
            .min()
            .expect("certificates are nonempty"),
        Certificate::Witnesses(points) => points
            .iter()
            .filter_map(|p| p.as_scalar().ok())
            .map(|s| (s - target).abs())
            .min()
            .unwrap_or_else(Scalar::zero),
    }
}

fn nearest_certified_point(certificate: &Certificate, target: &Scalar) -> Theta {
    match certificate {
        Certificate::Regions(regions) => {
            let nearest = regions
                .iter()
                .min_by_key(|r| r.distance_to(target))
                .expect("certificates are nonempty");
            Theta::scalar(nearest.clamp(target))
        }
        Certificate::Witnesses(points) => points
            .iter()
            .min_by_key(|p| {
                p.as_scalar()
                    .map(|s| (s - target).abs())
                    .unwrap_or_else(|_| Scalar::zero())
            })
            .expect("certificates are nonempty")
            .clone(),
    }
}
