//! Domain model: items, parametrized utilities, selections, fairness.
//!
//! The primary objective is not a single function but a family indexed by a
//! parameter θ. Two kinds are supported:
//!
//! ```text
//! two-attribute mixture (θ scalar in [0,1], attributes a, b rescaled by
//! schema divisors d_a, d_b):
//!     U_θ(item) = θ · a/d_a + (1−θ) · b/d_b
//!
//! general linear mixture (θ a strictly positive vector of length m):
//!     U_θ(item) = Σ_j θ_j · attr_j/d_j
//! ```
//!
//! A selection of k items scores the sum of its members' scores, so every
//! selection is described exactly by its vector of per-sub-utility sums; that
//! vector is cached at construction and doubles as the point in utility space
//! used by the dominance analyses.
//!
//! Fairness is secondary and deliberately simple: a soft score
//! `F(A) = −|#group₁ − #group₂|` (generalized to more groups as
//! −(max count − min count)) and an optional hard quota "share of label ≥ q".
//! Higher F is fairer; the maximum is 0.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; solvers evaluate these types concurrently without locks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Opaque item identifier. Ordering is lexicographic and is the tie-break
/// order used everywhere a deterministic listing is promised.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub String);

impl ItemId {
    pub fn new(id: impl Into<String>) -> Self {
        ItemId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        ItemId(s.to_string())
    }
}

/// Named numeric attributes plus the positive divisor used to rescale each
/// one. Divisors live here, with the data, so "IQ on a 10-point scale" is a
/// property of the dataset rather than of any particular objective.
#[derive(Clone, Debug)]
pub struct AttributeSchema {
    names: Vec<String>,
    divisors: Vec<Scalar>,
}

impl AttributeSchema {
    pub fn new(names: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::Schema(format!("duplicate attribute '{n}'")));
            }
        }
        let divisors = vec![Scalar::one(); names.len()];
        Ok(AttributeSchema { names, divisors })
    }

    /// Sets the rescaling divisor for one attribute. Divisors must be
    /// strictly positive.
    pub fn with_divisor(mut self, name: &str, divisor: Scalar) -> Result<Self> {
        if divisor <= Scalar::zero() {
            return Err(Error::Argument(format!(
                "divisor for '{name}' must be positive, got {divisor}"
            )));
        }
        let idx = self
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("unknown attribute '{name}'")))?;
        self.divisors[idx] = divisor;
        Ok(self)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn divisors(&self) -> &[Scalar] {
        &self.divisors
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One row of the dataset: an id, an optional display name, a group label,
/// and one value per schema attribute.
#[derive(Clone, Debug)]
pub struct ItemRecord {
    pub id: ItemId,
    pub display_name: Option<String>,
    pub group: String,
    pub values: Vec<Scalar>,
}

impl ItemRecord {
    pub fn new(
        id: impl Into<String>,
        display_name: Option<&str>,
        group: impl Into<String>,
        values: Vec<Scalar>,
    ) -> Self {
        ItemRecord {
            id: ItemId::new(id),
            display_name: display_name.map(str::to_string),
            group: group.into(),
            values,
        }
    }
}

/// The full roster. Item order is preserved from construction but all
/// solver output is ordered by id, never by row position.
#[derive(Clone, Debug)]
pub struct Population {
    schema: AttributeSchema,
    items: Vec<ItemRecord>,
    index: BTreeMap<ItemId, usize>,
}

impl Population {
    pub fn new(schema: AttributeSchema, items: Vec<ItemRecord>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, item) in items.iter().enumerate() {
            if item.values.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "item '{}' has {} attribute values, schema has {}",
                    item.id,
                    item.values.len(),
                    schema.len()
                )));
            }
            if index.insert(item.id.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate item id '{}'", item.id)));
            }
        }
        Ok(Population { schema, items, index })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn items(&self) -> &[ItemRecord] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &ItemId) -> Option<&ItemRecord> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    /// All group labels present, sorted.
    pub fn group_labels(&self) -> BTreeSet<String> {
        self.items.iter().map(|r| r.group.clone()).collect()
    }
}

/// A parameter point. One component for the scalar mixture, m components for
/// the general linear mixture.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Theta(Vec<Scalar>);

impl Theta {
    pub fn scalar(value: Scalar) -> Self {
        Theta(vec![value])
    }

    pub fn point(components: Vec<Scalar>) -> Self {
        Theta(components)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Scalar] {
        &self.0
    }

    /// The sole component of a 1-dimensional point.
    pub fn as_scalar(&self) -> Result<&Scalar> {
        match self.0.as_slice() {
            [s] => Ok(s),
            _ => Err(Error::Parameter(format!(
                "expected scalar θ, got dimension {}",
                self.0.len()
            ))),
        }
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [s] => write!(f, "{s}"),
            many => {
                write!(f, "(")?;
                for (i, s) in many.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl From<Scalar> for Theta {
    fn from(s: Scalar) -> Self {
        Theta::scalar(s)
    }
}

/// Where θ is allowed to live.
#[derive(Clone, Debug)]
pub enum ThetaDomain {
    /// Closed `[lo, hi] ⊆ [0, 1]` for the scalar mixture.
    Interval { lo: Scalar, hi: Scalar },
    /// Axis-aligned box with strictly positive bounds, dimension ≥ 2.
    Box { lower: Vec<Scalar>, upper: Vec<Scalar> },
    /// Convex hull of finitely many strictly positive vertices, dimension ≥ 2.
    Hull { vertices: Vec<Vec<Scalar>> },
}

impl ThetaDomain {
    pub fn interval(lo: Scalar, hi: Scalar) -> Result<Self> {
        if lo < Scalar::zero() || hi > Scalar::one() || lo > hi {
            return Err(Error::Parameter(format!(
                "interval [{lo}, {hi}] must satisfy 0 ≤ lo ≤ hi ≤ 1"
            )));
        }
        Ok(ThetaDomain::Interval { lo, hi })
    }

    pub fn full_interval() -> Self {
        ThetaDomain::Interval { lo: Scalar::zero(), hi: Scalar::one() }
    }

    pub fn boxed(lower: Vec<Scalar>, upper: Vec<Scalar>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Parameter(format!(
                "box bounds disagree in dimension: {} vs {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.len() < 2 {
            return Err(Error::Parameter(
                "box domain needs dimension ≥ 2; use an interval for scalar θ".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if *lo <= Scalar::zero() {
                return Err(Error::Parameter(format!(
                    "box lower bound {lo} must be strictly positive"
                )));
            }
            if lo > hi {
                return Err(Error::Parameter(format!("box bound {lo} exceeds {hi}")));
            }
        }
        Ok(ThetaDomain::Box { lower, upper })
    }

    pub fn hull(vertices: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = match vertices.first() {
            Some(v) => v.len(),
            None => return Err(Error::Parameter("hull domain needs at least one vertex".into())),
        };
        if dim < 2 {
            return Err(Error::Parameter(
                "hull domain needs dimension ≥ 2; use an interval for scalar θ".into(),
            ));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::Parameter(format!(
                    "hull vertices disagree in dimension: {} vs {dim}",
                    v.len()
                )));
            }
            for c in v {
                if *c <= Scalar::zero() {
                    return Err(Error::Parameter(format!(
                        "hull vertex component {c} must be strictly positive"
                    )));
                }
            }
        }
        Ok(ThetaDomain::Hull { vertices })
    }

    pub fn dimension(&self) -> usize {
        match self {
            ThetaDomain::Interval { .. } => 1,
            ThetaDomain::Box { lower, .. } => lower.len(),
            ThetaDomain::Hull { vertices } => vertices[0].len(),
        }
    }

    /// Interval bounds, when this is the scalar domain.
    pub fn as_interval(&self) -> Result<(&Scalar, &Scalar)> {
        match self {
            ThetaDomain::Interval { lo, hi } => Ok((lo, hi)),
            _ => Err(Error::Parameter(format!(
                "operation needs a scalar θ interval, got a dimension-{} domain",
                self.dimension()
            ))),
        }
    }
}

/// The parametrized objective family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjectiveSpec {
    /// `U_θ = θ·first/d₁ + (1−θ)·second/d₂`, θ scalar.
    TwoAttributeMixture { first: String, second: String },
    /// `U_θ = Σ_j θ_j·attr_j/d_j`, θ a vector as long as `attributes`.
    LinearMixture { attributes: Vec<String> },
}

impl ObjectiveSpec {
    /// Dimension of θ.
    pub fn theta_dimension(&self) -> usize {
        match self {
            ObjectiveSpec::TwoAttributeMixture { .. } => 1,
            ObjectiveSpec::LinearMixture { attributes } => attributes.len(),
        }
    }

    /// Number of sub-utilities, i.e. the dimension of utility space.
    pub fn utility_dimension(&self) -> usize {
        match self {
            ObjectiveSpec::TwoAttributeMixture { .. } => 2,
            ObjectiveSpec::LinearMixture { attributes } => attributes.len(),
        }
    }

    /// Attribute names in sub-utility order.
    pub fn attribute_names(&self) -> Vec<&str> {
        match self {
            ObjectiveSpec::TwoAttributeMixture { first, second } => {
                vec![first.as_str(), second.as_str()]
            }
            ObjectiveSpec::LinearMixture { attributes } => {
                attributes.iter().map(String::as_str).collect()
            }
        }
    }

    /// Schema indices of the referenced attributes.
    pub fn resolve(&self, schema: &AttributeSchema) -> Result<Vec<usize>> {
        self.attribute_names()
            .iter()
            .map(|name| {
                schema
                    .index_of(name)
                    .ok_or_else(|| Error::Schema(format!("objective references unknown attribute '{name}'")))
            })
            .collect()
    }

    /// Human-readable label per sub-utility, e.g. `IQ/10`.
    pub fn sub_utility_labels(&self, schema: &AttributeSchema) -> Result<Vec<String>> {
        let indices = self.resolve(schema)?;
        Ok(indices
            .iter()
            .map(|&i| {
                let d = &schema.divisors()[i];
                if *d == Scalar::one() {
                    schema.names()[i].clone()
                } else {
                    format!("{}/{}", schema.names()[i], d)
                }
            })
            .collect())
    }

    /// Mixture weights at θ: `(θ, 1−θ)` for the scalar kind, the components
    /// themselves for the vector kind.
    pub fn weights(&self, theta: &Theta) -> Result<Vec<Scalar>> {
        if theta.dimension() != self.theta_dimension() {
            return Err(Error::Parameter(format!(
                "θ has dimension {}, objective expects {}",
                theta.dimension(),
                self.theta_dimension()
            )));
        }
        match self {
            ObjectiveSpec::TwoAttributeMixture { .. } => {
                let t = theta.components()[0].clone();
                let complement = Scalar::one() - &t;
                Ok(vec![t, complement])
            }
            ObjectiveSpec::LinearMixture { .. } => Ok(theta.components().to_vec()),
        }
    }

    /// Per-item sub-utility vector `(attr_j / d_j)_j`.
    pub fn sub_utilities(&self, schema: &AttributeSchema, item: &ItemRecord) -> Result<Vec<Scalar>> {
        let indices = self.resolve(schema)?;
        Ok(indices
            .iter()
            .map(|&i| &item.values[i] / &schema.divisors()[i])
            .collect())
    }
}

/// Score of a single item under `U_θ`.
pub fn score_item(
    schema: &AttributeSchema,
    item: &ItemRecord,
    objective: &ObjectiveSpec,
    theta: &Theta,
) -> Result<Scalar> {
    let weights = objective.weights(theta)?;
    let subs = objective.sub_utilities(schema, item)?;
    Ok(weights.iter().zip(&subs).map(|(w, u)| w * u).sum())
}

/// A chosen subset of items. Ids are kept sorted; the per-sub-utility sums
/// and group counts are cached at construction and must always equal what a
/// recomputation from the population gives.
#[derive(Clone, Debug)]
pub struct Selection {
    ids: Vec<ItemId>,
    utility_vector: Vec<Scalar>,
    group_counts: BTreeMap<String, usize>,
}

impl Selection {
    pub fn new(
        population: &Population,
        objective: &ObjectiveSpec,
        ids: impl IntoIterator<Item = ItemId>,
    ) -> Result<Self> {
        let mut sorted: Vec<ItemId> = ids.into_iter().collect();
        sorted.sort();
        if sorted.is_empty() {
            return Err(Error::Argument("selection must contain at least one item".into()));
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("selection contains a duplicate item id".into()));
        }
        let mut utility_vector = vec![Scalar::zero(); objective.utility_dimension()];
        let mut group_counts: BTreeMap<String, usize> = BTreeMap::new();
        for id in &sorted {
            let item = population
                .get(id)
                .ok_or_else(|| Error::Schema(format!("unknown item id '{id}'")))?;
            let subs = objective.sub_utilities(population.schema(), item)?;
            for (acc, u) in utility_vector.iter_mut().zip(subs) {
                *acc = &*acc + &u;
            }
            *group_counts.entry(item.group.clone()).or_insert(0) += 1;
        }
        Ok(Selection { ids: sorted, utility_vector, group_counts })
    }

    pub fn ids(&self) -> &[ItemId] {
        &self.ids
    }

    pub fn k(&self) -> usize {
        self.ids.len()
    }

    pub fn contains(&self, id: &ItemId) -> bool {
        self.ids.binary_search(id).is_ok()
    }

    /// Cached per-sub-utility sums; the point this selection occupies in
    /// utility space.
    pub fn utility_vector(&self) -> &[Scalar] {
        &self.utility_vector
    }

    pub fn group_counts(&self) -> &BTreeMap<String, usize> {
        &self.group_counts
    }

    /// `U_θ` of the whole selection, from the cached sums.
    pub fn score(&self, objective: &ObjectiveSpec, theta: &Theta) -> Result<Scalar> {
        let weights = objective.weights(theta)?;
        if weights.len() != self.utility_vector.len() {
            return Err(Error::Parameter(format!(
                "selection caches {} sub-utilities, objective has {}",
                self.utility_vector.len(),
                weights.len()
            )));
        }
        Ok(weights.iter().zip(&self.utility_vector).map(|(w, u)| w * u).sum())
    }

    /// Ids as plain strings, for reporting.
    pub fn id_strings(&self) -> Vec<String> {
        self.ids.iter().map(|id| id.0.clone()).collect()
    }
}

impl PartialEq for Selection {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
    }
}

impl Eq for Selection {}

impl PartialOrd for Selection {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Selection {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.ids.cmp(&other.ids)
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.ids.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

/// Score of a selection recomputed member by member. Used as the independent
/// route against the cached [`Selection::score`]; the two must agree exactly.
pub fn score_selection(
    population: &Population,
    selection: &Selection,
    objective: &ObjectiveSpec,
    theta: &Theta,
) -> Result<Scalar> {
    let mut total = Scalar::zero();
    for id in selection.ids() {
        let item = population
            .get(id)
            .ok_or_else(|| Error::Schema(format!("unknown item id '{id}'")))?;
        total = total + score_item(population.schema(), item, objective, theta)?;
    }
    Ok(total)
}

/// Soft fairness score: higher is fairer, maximum 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SoftFairness {
    /// `−|#g₁ − #g₂|` for a designated pair, or `−(max − min)` over all
    /// population groups when no pair is designated.
    Mismatch { groups: Option<(String, String)> },
}

/// Hard fairness predicate.
#[derive(Clone, Debug, PartialEq)]
pub enum HardFairness {
    /// Share of `label` in the selection must be at least `min_share`.
    Quota { label: String, min_share: Scalar },
}

/// Soft score and/or hard predicate. Either half may be absent.
#[derive(Clone, Debug, Default)]
pub struct FairnessSpec {
    pub soft: Option<SoftFairness>,
    pub hard: Option<HardFairness>,
}

impl FairnessSpec {
    pub fn mismatch(g1: impl Into<String>, g2: impl Into<String>) -> Self {
        FairnessSpec {
            soft: Some(SoftFairness::Mismatch { groups: Some((g1.into(), g2.into())) }),
            hard: None,
        }
    }

    pub fn mismatch_all_groups() -> Self {
        FairnessSpec { soft: Some(SoftFairness::Mismatch { groups: None }), hard: None }
    }

    pub fn with_quota(mut self, label: impl Into<String>, min_share: Scalar) -> Self {
        self.hard = Some(HardFairness::Quota { label: label.into(), min_share });
        self
    }

    /// Checks that designated labels occur in the population and the quota
    /// share is a proportion.
    pub fn validate(&self, population: &Population) -> Result<()> {
        let labels = population.group_labels();
        if let Some(SoftFairness::Mismatch { groups: Some((g1, g2)) }) = &self.soft {
            for g in [g1, g2] {
                if !labels.contains(g) {
                    return Err(Error::Schema(format!(
                        "fairness group '{g}' does not occur in the population"
                    )));
                }
            }
        }
        if let Some(HardFairness::Quota { label, min_share }) = &self.hard {
            if *min_share < Scalar::zero() || *min_share > Scalar::one() {
                return Err(Error::Argument(format!(
                    "quota share must lie in [0, 1], got {min_share}"
                )));
            }
            if !labels.contains(label) {
                return Err(Error::Schema(format!(
                    "quota label '{label}' does not occur in the population"
                )));
            }
        }
        Ok(())
    }
}

/// Soft fairness score of a selection. Errors if no soft score is configured.
pub fn fairness_score(
    population: &Population,
    selection: &Selection,
    fairness: &FairnessSpec,
) -> Result<Scalar> {
    let soft = fairness
        .soft
        .as_ref()
        .ok_or_else(|| Error::Argument("no soft fairness score configured".into()))?;
    fairness.validate(population)?;
    match soft {
        SoftFairness::Mismatch { groups: Some((g1, g2)) } => {
            let c1 = *selection.group_counts().get(g1).unwrap_or(&0) as i64;
            let c2 = *selection.group_counts().get(g2).unwrap_or(&0) as i64;
            Ok(Scalar::integer(-(c1 - c2).abs()))
        }
        SoftFairness::Mismatch { groups: None } => {
            let counts: Vec<i64> = population
                .group_labels()
                .iter()
                .map(|g| *selection.group_counts().get(g).unwrap_or(&0) as i64)
                .collect();
            let max = counts.iter().copied().max().unwrap_or(0);
            let min = counts.iter().copied().min().unwrap_or(0);
            Ok(Scalar::integer(-(max - min)))
        }
    }
}

/// Hard fairness predicate. A spec with no hard predicate accepts everything.
pub fn is_fair(
    population: &Population,
    selection: &Selection,
    fairness: &FairnessSpec,
) -> Result<bool> {
    fairness.validate(population)?;
    match &fairness.hard {
        None => Ok(true),
        Some(HardFairness::Quota { label, min_share }) => {
            let count = *selection.group_counts().get(label).unwrap_or(&0);
            let share = Scalar::from(count) / Scalar::from(selection.k());
            Ok(share >= *min_share)
        }
    }
}
