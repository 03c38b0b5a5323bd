//! Interval-valued data: picking the completion whose optimum is fairest.
//!
//! When some measurements are only known up to an interval, every choice of a
//! value per blurred cell (a *completion*) induces its own optimal selection.
//! Among all completions this module finds one maximizing the soft fairness
//! of the induced optimum, searching only interval endpoints.
//!
//! # Why endpoints suffice
//!
//! Mixture weights are required to be nonnegative and divisors are positive,
//! so every selection's utility is monotone nondecreasing in each of its
//! members' attribute values and independent of everyone else's. Take any
//! completion `P` and the fairest selection `s` among its optima. Push every
//! member of `s` to the top of its intervals and every other item to the
//! bottom: `s`'s utility weakly rises while all competing selections weakly
//! fall, so `s` stays optimal at the resulting endpoint completion and the
//! fairness value achieved there is at least `F(s)`. The maximum over
//! endpoint completions therefore equals the maximum over all completions,
//! and enumerating the `2^slots` endpoint patterns is exhaustive.
//!
//! The guard on nonnegative weights is what that argument needs; a negative
//! weight flips the monotonicity and the search refuses rather than guess.
//!
//! # Determinism
//!
//! Completions are enumerated in lexicographic order over the non-degenerate
//! cells in data order, low endpoint before high. Per completion the induced
//! selection is the fairest optimum, ties broken toward the smallest id set;
//! across completions a strictly fairer result replaces the incumbent, so
//! equal results keep the lexicographically first completion.
//!
//! # The audit
//!
//! Choosing imputed values to flatter a fairness score is a decision made
//! after looking at the data, and it can smuggle in bias of its own. The
//! audit reports, for every cell, where the chosen value sits inside its
//! interval on a 0-to-1 scale (pinned cells count as neutral 1/2), plus the
//! per-group means of those positions and the spread between groups. A large
//! spread means one group was systematically imputed high and another low,
//! and the result deserves suspicion.

use std::collections::BTreeMap;

use crate::discrete::top_k;
use crate::error::{Error, Result};
use crate::model::{
    fairness_score, AttributeSchema, FairnessSpec, ItemId, ItemRecord, ObjectiveSpec, Population,
    Selection, Theta,
};
use crate::scalar::Scalar;

/// Cap on non-degenerate cells; the endpoint search enumerates 2^cells
/// completions.
pub const ENDPOINT_ENUMERATION_LIMIT: usize = 20;

/// Caveat attached to every completion-search report.
pub const IMPUTATION_CAVEAT: &str = "Imputed values were chosen, after seeing the data, to make \
the induced optimum look as fair as possible. Treat the reported fairness as an upper bound and \
review where each imputed value landed in its interval before acting on the result.";

/// A closed interval `[lo, hi]` a measurement is known to lie in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalValue {
    lo: Scalar,
    hi: Scalar,
}

impl IntervalValue {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self> {
        if lo > hi {
            return Err(Error::Argument(format!(
                "interval bounds out of order: {lo} > {hi}"
            )));
        }
        Ok(IntervalValue { lo, hi })
    }

    /// Exactly known value.
    pub fn exact(value: Scalar) -> Self {
        IntervalValue { lo: value.clone(), hi: value }
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, value: &Scalar) -> bool {
        self.lo <= *value && *value <= self.hi
    }

    /// Relative position of `value` inside the interval, 0 at `lo`, 1 at
    /// `hi`; a degenerate interval positions everything at 1/2.
    pub fn position(&self, value: &Scalar) -> Scalar {
        if self.is_degenerate() {
            Scalar::ratio(1, 2)
        } else {
            (value - &self.lo) / (&self.hi - &self.lo)
        }
    }
}

/// One roster row whose measurements may be intervals.
#[derive(Clone, Debug)]
pub struct IntervalRecord {
    pub id: ItemId,
    pub display_name: Option<String>,
    pub group: String,
    pub values: Vec<IntervalValue>,
}

impl IntervalRecord {
    pub fn new(
        id: impl Into<String>,
        display_name: Option<&str>,
        group: impl Into<String>,
        values: Vec<IntervalValue>,
    ) -> Self {
        IntervalRecord {
            id: ItemId::new(id),
            display_name: display_name.map(str::to_string),
            group: group.into(),
            values,
        }
    }
}

/// A roster with interval-valued measurements.
#[derive(Clone, Debug)]
pub struct IntervalPopulation {
    schema: AttributeSchema,
    records: Vec<IntervalRecord>,
}

impl IntervalPopulation {
    pub fn new(schema: AttributeSchema, records: Vec<IntervalRecord>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for r in &records {
            if r.values.len() != schema.len() {
                return Err(Error::Schema(format!(
                    "item '{}' has {} interval values, schema has {}",
                    r.id,
                    r.values.len(),
                    schema.len()
                )));
            }
            if !seen.insert(r.id.clone()) {
                return Err(Error::Schema(format!("duplicate item id '{}'", r.id)));
            }
        }
        Ok(IntervalPopulation { schema, records })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn records(&self) -> &[IntervalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Non-degenerate cells in data order, as (record, attribute) indices.
    pub fn open_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for (r, record) in self.records.iter().enumerate() {
            for (a, value) in record.values.iter().enumerate() {
                if !value.is_degenerate() {
                    cells.push((r, a));
                }
            }
        }
        cells
    }

    /// Materializes a completion into an ordinary population, after checking
    /// it is consistent with the intervals.
    pub fn complete(&self, completion: &Completion) -> Result<Population> {
        self.validate_completion(completion)?;
        let items = self
            .records
            .iter()
            .zip(completion.values())
            .map(|(record, values)| ItemRecord {
                id: record.id.clone(),
                display_name: record.display_name.clone(),
                group: record.group.clone(),
                values: values.clone(),
            })
            .collect();
        Population::new(self.schema.clone(), items)
    }

    fn validate_completion(&self, completion: &Completion) -> Result<()> {
        if completion.values().len() != self.records.len() {
            return Err(Error::Consistency(format!(
                "completion has {} rows, data has {}",
                completion.values().len(),
                self.records.len()
            )));
        }
        for (record, row) in self.records.iter().zip(completion.values()) {
            if row.len() != record.values.len() {
                return Err(Error::Consistency(format!(
                    "completion row for '{}' has {} values, expected {}",
                    record.id,
                    row.len(),
                    record.values.len()
                )));
            }
            for (a, (interval, value)) in record.values.iter().zip(row).enumerate() {
                if !interval.contains(value) {
                    return Err(Error::Consistency(format!(
                        "value {value} for '{}' attribute '{}' lies outside [{}, {}]",
                        record.id,
                        self.schema.names()[a],
                        interval.lo(),
                        interval.hi()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One concrete value per cell of an interval population.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    values: Vec<Vec<Scalar>>,
}

impl Completion {
    pub fn new(values: Vec<Vec<Scalar>>) -> Self {
        Completion { values }
    }

    pub fn values(&self) -> &[Vec<Scalar>] {
        &self.values
    }

    pub fn value(&self, record: usize, attribute: usize) -> &Scalar {
        &self.values[record][attribute]
    }
}

/// Where one imputed value landed inside its interval.
#[derive(Clone, Debug)]
pub struct AuditPosition {
    pub id: ItemId,
    pub attribute: String,
    pub group: String,
    pub value: Scalar,
    pub lo: Scalar,
    pub hi: Scalar,
    /// 0 at the low endpoint, 1 at the high endpoint, 1/2 when pinned.
    pub position: Scalar,
    pub degenerate: bool,
}

/// Position summary of a completion, per cell and per group.
#[derive(Clone, Debug)]
pub struct ImputationAudit {
    /// One entry per cell, data order.
    pub positions: Vec<AuditPosition>,
    /// Mean position per group label.
    pub group_mean_positions: BTreeMap<String, Scalar>,
    /// Largest minus smallest group mean; 0 with fewer than two groups.
    pub asymmetry: Scalar,
}

fn audit_of(population: &IntervalPopulation, completion: &Completion) -> ImputationAudit {
    let mut positions = Vec::new();
    let mut sums: BTreeMap<String, (Scalar, usize)> = BTreeMap::new();
    for (record, row) in population.records().iter().zip(completion.values()) {
        for (a, (interval, value)) in record.values.iter().zip(row).enumerate() {
            let position = interval.position(value);
            let entry = sums
                .entry(record.group.clone())
                .or_insert_with(|| (Scalar::zero(), 0));
            entry.0 = &entry.0 + &position;
            entry.1 += 1;
            positions.push(AuditPosition {
                id: record.id.clone(),
                attribute: population.schema().names()[a].clone(),
                group: record.group.clone(),
                value: value.clone(),
                lo: interval.lo().clone(),
                hi: interval.hi().clone(),
                position,
                degenerate: interval.is_degenerate(),
            });
        }
    }
    let group_mean_positions: BTreeMap<String, Scalar> = sums
        .into_iter()
        .map(|(g, (sum, count))| (g, sum / Scalar::from(count)))
        .collect();
    let asymmetry = match (
        group_mean_positions.values().max(),
        group_mean_positions.values().min(),
    ) {
        (Some(max), Some(min)) if group_mean_positions.len() > 1 => max - min,
        _ => Scalar::zero(),
    };
    ImputationAudit { positions, group_mean_positions, asymmetry }
}

/// Positions a completion against its intervals. Errors with
/// [`Error::Consistency`] if any value falls outside its interval.
pub fn audit_completion(
    population: &IntervalPopulation,
    completion: &Completion,
) -> Result<ImputationAudit> {
    population.validate_completion(completion)?;
    Ok(audit_of(population, completion))
}

/// Outcome of the endpoint completion search.
#[derive(Clone, Debug)]
pub struct CompletionSearchResult {
    /// The winning completion.
    pub completion: Completion,
    /// The data under the winning completion.
    pub population: Population,
    /// The fairest optimum induced by the winning completion.
    pub selection: Selection,
    /// Its soft fairness score.
    pub fairness: Scalar,
    pub audit: ImputationAudit,
    /// How many endpoint completions were evaluated (2^cells).
    pub completions_evaluated: usize,
}

/// Searches endpoint completions for the one whose induced optimum is
/// fairest. See the module documentation for why endpoints are exhaustive
/// and what the audit is for.
pub fn fairest_completion(
    population: &IntervalPopulation,
    objective: &ObjectiveSpec,
    theta: &Theta,
    k: usize,
    fairness: &FairnessSpec,
) -> Result<CompletionSearchResult> {
    let weights = objective.weights(theta)?;
    if let Some(w) = weights.iter().find(|w| **w < Scalar::zero()) {
        return Err(Error::Argument(format!(
            "endpoint completion search needs monotone utilities; \
             mixture weight {w} is negative"
        )));
    }
    let cells = population.open_cells();
    if cells.len() > ENDPOINT_ENUMERATION_LIMIT {
        return Err(Error::Complexity {
            what: "non-degenerate intervals",
            actual: cells.len(),
            limit: ENDPOINT_ENUMERATION_LIMIT,
        });
    }
    let total = 1usize << cells.len();
    let base: Vec<Vec<Scalar>> = population
        .records()
        .iter()
        .map(|r| r.values.iter().map(|v| v.lo().clone()).collect())
        .collect();
    let mut best: Option<(Scalar, Completion, Population, Selection)> = None;
    for code in 0..total {
        let mut values = base.clone();
        for (bit, &(r, a)) in cells.iter().enumerate() {
            // The first cell is the most significant bit, so increasing codes
            // walk the completions in lexicographic order, low before high.
            if code >> (cells.len() - 1 - bit) & 1 == 1 {
                values[r][a] = population.records()[r].values[a].hi().clone();
            }
        }
        let completion = Completion::new(values);
        let completed = population.complete(&completion)?;
        let optima = top_k(&completed, objective, theta, k)?;
        let scores: Vec<Scalar> = optima
            .iter()
            .map(|s| fairness_score(&completed, s, fairness))
            .collect::<Result<_>>()?;
        let best_score = scores.iter().max().expect("top_k is nonempty").clone();
        let first = scores.iter().position(|f| *f == best_score).expect("just found");
        let fairest = optima[first].clone();
        if best.as_ref().is_none_or(|(incumbent, ..)| best_score > *incumbent) {
            best = Some((best_score, completion, completed, fairest));
        }
    }
    let (fairness_value, completion, population_completed, selection) =
        best.expect("at least the all-low completion is evaluated");
    let audit = audit_of(population, &completion);
    Ok(CompletionSearchResult {
        completion,
        population: population_completed,
        selection,
        fairness: fairness_value,
        audit,
        completions_evaluated: total,
    })
}
