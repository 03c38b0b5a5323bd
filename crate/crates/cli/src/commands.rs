//! The six commands, each a pure function from resolved settings to report
//! bytes plus an exit code.
//!
//! - `solve`: optima at a reference θ, the optimal family over Θ with its
//!   certified regions, the quota baseline when one is configured, and the
//!   fairest family member.
//! - `sweep`: per-item scores and the optima at every grid θ.
//! - `pareto`: the frontier sections and the inclusion chain between them.
//! - `compare`: the quota baseline's regret against the no-regret path.
//! - `ascent`: alternating fairness ascent on a registered smooth problem.
//! - `audit`: endpoint completion search plus the imputation audit for
//!   interval-valued data.

use std::collections::BTreeMap;

use fairopt_core::continuous::{
    alternating_ascent, by_name, finite_difference_audit, problem_names, AscentConfig,
    GradientAudit, Termination, TraceStep,
};
use fairopt_core::discrete::{
    change_points, enumerate_optimal_set, fairest_optimal, regret, sample_optimal_set, top_k,
    Certificate, FairestOptions, FairestResult, OptimalSet,
};
use fairopt_core::model::{
    fairness_score, score_item, FairnessSpec, HardFairness, ObjectiveSpec, Theta, ThetaDomain,
};
use fairopt_core::pareto::front_report;
use fairopt_core::uncertain::{fairest_completion, ImputationAudit, IMPUTATION_CAVEAT};
use fairopt_core::{Error, Population, Result, Scalar, Selection};
use serde::Serialize;

use crate::config::Settings;
use crate::ingest;
use crate::report::{dec, frac, id_cell, Render, RunReport, Table};

/// Default sample budget for box/hull θ-domains.
const DEFAULT_SAMPLES: usize = 200;
/// Default seed; every sampling path is seeded so reruns are identical.
const DEFAULT_SEED: u64 = 0;
/// Longest trace echoed into an ascent report; longer runs are strided.
const TRACE_ROWS: usize = 200;

pub struct CommandOutput {
    pub bytes: Vec<u8>,
    pub exit_code: i32,
}

fn emit<P: Render>(settings: &Settings, command: &str, payload: P) -> Result<CommandOutput> {
    let report = RunReport::new(settings.echo(command), payload);
    Ok(CommandOutput { bytes: report.emit(settings.format)?, exit_code: 0 })
}

// ==== shared echoes ====

#[derive(Clone, Serialize)]
pub struct SelectionEcho {
    pub ids: Vec<String>,
    pub members: String,
    pub utility_vector: Vec<Scalar>,
    pub group_counts: BTreeMap<String, usize>,
    pub fairness: Option<Scalar>,
}

fn selection_echo(
    population: &Population,
    selection: &Selection,
    fairness: Option<&FairnessSpec>,
) -> Result<SelectionEcho> {
    let score = match fairness {
        Some(spec) if spec.soft.is_some() => Some(fairness_score(population, selection, spec)?),
        _ => None,
    };
    Ok(SelectionEcho {
        ids: selection.id_strings(),
        members: selection.to_string(),
        utility_vector: selection.utility_vector().to_vec(),
        group_counts: selection.group_counts().clone(),
        fairness: score,
    })
}

fn selection_echoes(
    population: &Population,
    selections: &[Selection],
    fairness: Option<&FairnessSpec>,
) -> Result<Vec<SelectionEcho>> {
    selections.iter().map(|s| selection_echo(population, s, fairness)).collect()
}

#[derive(Clone, Serialize)]
pub struct RegionEcho {
    pub lo: Scalar,
    pub hi: Scalar,
}

#[derive(Serialize)]
pub struct FamilyMemberEcho {
    pub selection: SelectionEcho,
    /// Exact mode: closed θ-regions where this member is optimal.
    pub regions: Option<Vec<RegionEcho>>,
    /// Sampled mode: the θ points that produced it.
    pub witnesses: Option<Vec<Vec<Scalar>>>,
    pub representative: Vec<Scalar>,
    pub utility_at_representative: Scalar,
}

#[derive(Serialize)]
pub struct FamilyEcho {
    /// Exhaustive enumeration (scalar θ) or seeded sampling (vector θ).
    pub exact: bool,
    pub members: Vec<FamilyMemberEcho>,
    /// Interior θ values where the optimal set changes; exact mode only.
    pub change_points: Option<Vec<Scalar>>,
}

fn family_echo(
    population: &Population,
    family: &OptimalSet,
    fairness: Option<&FairnessSpec>,
    change_points: Option<Vec<Scalar>>,
) -> Result<FamilyEcho> {
    let members = family
        .entries
        .iter()
        .map(|entry| {
            let (regions, witnesses) = match &entry.certificate {
                Certificate::Regions(regions) => (
                    Some(
                        regions
                            .iter()
                            .map(|r| RegionEcho { lo: r.lo.clone(), hi: r.hi.clone() })
                            .collect(),
                    ),
                    None,
                ),
                Certificate::Witnesses(points) => (
                    None,
                    Some(points.iter().map(|t| t.components().to_vec()).collect()),
                ),
            };
            Ok(FamilyMemberEcho {
                selection: selection_echo(population, &entry.selection, fairness)?,
                regions,
                witnesses,
                representative: entry.representative.components().to_vec(),
                utility_at_representative: entry.utility_at_representative.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyEcho { exact: family.exact, members, change_points })
}

#[derive(Serialize)]
pub struct FairestEcho {
    pub winner: SelectionEcho,
    /// Every maximally fair family member, in family order.
    pub ties: Vec<Vec<String>>,
    pub fairness: Scalar,
    pub theta_star: Vec<Scalar>,
    pub exact: bool,
}

fn fairest_echo(
    population: &Population,
    result: &FairestResult,
    fairness: &FairnessSpec,
) -> Result<FairestEcho> {
    Ok(FairestEcho {
        winner: selection_echo(population, &result.winner.selection, Some(fairness))?,
        ties: result.ties.iter().map(|s| s.id_strings()).collect(),
        fairness: result.fairness.clone(),
        theta_star: result.theta_star.components().to_vec(),
        exact: result.exact,
    })
}

fn group_cell(counts: &BTreeMap<String, usize>) -> String {
    counts.iter().map(|(g, c)| format!("{g}={c}")).collect::<Vec<_>>().join(" ")
}

fn region_cell(regions: &Option<Vec<RegionEcho>>) -> String {
    match regions {
        Some(regions) => regions
            .iter()
            .map(|r| format!("{}..{}", frac(&r.lo), frac(&r.hi)))
            .collect::<Vec<_>>()
            .join(";"),
        None => String::new(),
    }
}

fn point_cell(components: &[Scalar]) -> String {
    components.iter().map(frac).collect::<Vec<_>>().join(";")
}

fn fairness_cell(f: &Option<Scalar>) -> String {
    f.as_ref().map(frac).unwrap_or_default()
}

fn selection_table(name: &'static str, echoes: &[SelectionEcho]) -> Table {
    Table {
        name,
        header: vec!["ids", "utility_vector", "fairness", "groups"],
        rows: echoes
            .iter()
            .map(|e| {
                vec![
                    id_cell(&e.ids),
                    point_cell(&e.utility_vector),
                    fairness_cell(&e.fairness),
                    group_cell(&e.group_counts),
                ]
            })
            .collect(),
    }
}

fn family_tables(family: &FamilyEcho) -> Vec<Table> {
    let mut tables = vec![Table {
        name: "optimal-family",
        header: vec!["ids", "regions", "witnesses", "representative", "utility", "fairness"],
        rows: family
            .members
            .iter()
            .map(|m| {
                vec![
                    id_cell(&m.selection.ids),
                    region_cell(&m.regions),
                    m.witnesses
                        .as_ref()
                        .map(|ws| ws.iter().map(|w| point_cell(w)).collect::<Vec<_>>().join(" "))
                        .unwrap_or_default(),
                    point_cell(&m.representative),
                    frac(&m.utility_at_representative),
                    fairness_cell(&m.selection.fairness),
                ]
            })
            .collect(),
    }];
    if let Some(points) = &family.change_points {
        tables.push(Table {
            name: "change-points",
            header: vec!["theta"],
            rows: points.iter().map(|p| vec![frac(p)]).collect(),
        });
    }
    tables
}

fn fairest_table(fairest: &FairestEcho) -> Table {
    let mut rows = vec![vec![
        "winner".to_string(),
        id_cell(&fairest.winner.ids),
        frac(&fairest.fairness),
        point_cell(&fairest.theta_star),
    ]];
    for tie in &fairest.ties {
        if *tie != fairest.winner.ids {
            rows.push(vec!["tie".to_string(), id_cell(tie), frac(&fairest.fairness), String::new()]);
        }
    }
    Table { name: "fairest", header: vec!["role", "ids", "fairness", "theta_star"], rows }
}

fn members_list(selections: &[SelectionEcho]) -> String {
    selections.iter().map(|e| e.members.as_str()).collect::<Vec<_>>().join(", ")
}

/// Enumerates the family exactly over scalar domains, or by seeded sampling
/// over vector domains.
fn optimal_family(
    population: &Population,
    objective: &ObjectiveSpec,
    domain: &ThetaDomain,
    k: usize,
    settings: &Settings,
) -> Result<(OptimalSet, Option<Vec<Scalar>>)> {
    match domain {
        ThetaDomain::Interval { .. } => {
            let family = enumerate_optimal_set(population, objective, domain, k)?;
            let points = change_points(population, objective, domain, k)?;
            Ok((family, Some(points)))
        }
        _ => {
            let samples = settings.samples.unwrap_or(DEFAULT_SAMPLES);
            let seed = settings.seed.unwrap_or(DEFAULT_SEED);
            let family = sample_optimal_set(population, objective, domain, k, samples, seed)?;
            Ok((family, None))
        }
    }
}

// ==== solve ====

#[derive(Serialize)]
pub struct QuotaEcho {
    pub label: String,
    pub min_share: Scalar,
    pub optima: Vec<SelectionEcho>,
    pub utility: Scalar,
    pub regret: Scalar,
}

#[derive(Serialize)]
pub struct SolvePayload {
    pub k: usize,
    pub reference_theta: Scalar,
    pub optima_at_reference: Vec<SelectionEcho>,
    pub utility_at_reference: Scalar,
    pub quota: Option<QuotaEcho>,
    pub family: FamilyEcho,
    pub fairest: Option<FairestEcho>,
}

impl Render for SolvePayload {
    fn tables(&self) -> Vec<Table> {
        let mut tables = vec![selection_table("optima-at-reference", &self.optima_at_reference)];
        if let Some(quota) = &self.quota {
            let mut table = selection_table("quota-baseline", &quota.optima);
            table.name = "quota-baseline";
            tables.push(table);
        }
        tables.extend(family_tables(&self.family));
        if let Some(fairest) = &self.fairest {
            tables.push(fairest_table(fairest));
        }
        tables
    }

    fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "at theta = {}: best utility {} by {}",
            dec(&self.reference_theta),
            dec(&self.utility_at_reference),
            members_list(&self.optima_at_reference),
        )];
        if let Some(quota) = &self.quota {
            lines.push(format!(
                "quota (>= {} '{}'): utility {}, regret {}, {} tied optima",
                dec(&quota.min_share),
                quota.label,
                dec(&quota.utility),
                dec(&quota.regret),
                quota.optima.len(),
            ));
        }
        lines.push(format!(
            "optimal family over the domain: {} member(s){}",
            self.family.members.len(),
            if self.family.exact { "" } else { " (sampled)" },
        ));
        for member in &self.family.members {
            lines.push(format!(
                "  {} optimal at {}",
                member.selection.members,
                match &member.regions {
                    Some(regions) => regions
                        .iter()
                        .map(|r| if r.lo == r.hi {
                            format!("theta = {}", dec(&r.lo))
                        } else {
                            format!("theta in [{}, {}]", dec(&r.lo), dec(&r.hi))
                        })
                        .collect::<Vec<_>>()
                        .join(" and "),
                    None => format!(
                        "{} sampled theta point(s)",
                        member.witnesses.as_ref().map_or(0, Vec::len)
                    ),
                },
            ));
        }
        if let Some(fairest) = &self.fairest {
            lines.push(format!(
                "fairest family member: {} (fairness {}, optimal at theta* = {})",
                fairest.winner.members,
                dec(&fairest.fairness),
                point_cell(&fairest.theta_star),
            ));
        }
        lines
    }
}

pub fn solve(settings: &Settings) -> Result<CommandOutput> {
    let population = ingest::load_population(
        settings.require_data()?,
        settings.group_column.as_deref(),
        &settings.divisors,
    )?;
    let objective = settings.objective(population.schema())?;
    let k = settings.require_k()?;
    let fairness = settings.fairness()?;
    let domain = settings.domain()?;
    let reference = settings.reference_theta()?;
    let theta = Theta::scalar(reference.clone());

    let optima = top_k(&population, &objective, &theta, k)?;
    let utility = optima[0].score(&objective, &theta)?;
    let quota = match &fairness {
        Some(spec @ FairnessSpec { hard: Some(HardFairness::Quota { label, min_share }), .. }) => {
            let baseline = regret(&population, &objective, &theta, k, spec)?;
            Some(QuotaEcho {
                label: label.clone(),
                min_share: min_share.clone(),
                optima: selection_echoes(&population, &baseline.constrained, fairness.as_ref())?,
                utility: baseline.constrained_utility,
                regret: baseline.regret,
            })
        }
        _ => None,
    };
    let (family, points) = optimal_family(&population, &objective, &domain, k, settings)?;
    let fairest = match &fairness {
        Some(spec) if spec.soft.is_some() => {
            let options = FairestOptions { prefer_theta_near: settings.prefer_theta.clone() };
            let result = fairest_optimal(&population, &family, spec, &options)?;
            Some(fairest_echo(&population, &result, spec)?)
        }
        _ => None,
    };
    let payload = SolvePayload {
        k,
        reference_theta: reference,
        optima_at_reference: selection_echoes(&population, &optima, fairness.as_ref())?,
        utility_at_reference: utility,
        quota,
        family: family_echo(&population, &family, fairness.as_ref(), points)?,
        fairest,
    };
    emit(settings, "solve", payload)
}

// ==== sweep ====

#[derive(Serialize)]
pub struct ItemScoreEcho {
    pub id: String,
    pub name: Option<String>,
    pub group: String,
    pub score: Scalar,
}

#[derive(Serialize)]
pub struct SweepPointEcho {
    pub theta: Scalar,
    pub scores: Vec<ItemScoreEcho>,
    pub optima: Vec<SelectionEcho>,
    pub utility: Scalar,
}

#[derive(Serialize)]
pub struct SweepPayload {
    pub k: usize,
    pub grid: Vec<Scalar>,
    pub points: Vec<SweepPointEcho>,
}

impl Render for SweepPayload {
    fn tables(&self) -> Vec<Table> {
        vec![
            Table {
                name: "scores",
                header: vec!["theta", "id", "name", "group", "score"],
                rows: self
                    .points
                    .iter()
                    .flat_map(|p| {
                        p.scores.iter().map(|s| {
                            vec![
                                frac(&p.theta),
                                s.id.clone(),
                                s.name.clone().unwrap_or_default(),
                                s.group.clone(),
                                frac(&s.score),
                            ]
                        })
                    })
                    .collect(),
            },
            Table {
                name: "optima",
                header: vec!["theta", "ids", "utility", "fairness"],
                rows: self
                    .points
                    .iter()
                    .flat_map(|p| {
                        p.optima.iter().map(|e| {
                            vec![
                                frac(&p.theta),
                                id_cell(&e.ids),
                                frac(&p.utility),
                                fairness_cell(&e.fairness),
                            ]
                        })
                    })
                    .collect(),
            },
        ]
    }

    fn summary_lines(&self) -> Vec<String> {
        self.points
            .iter()
            .map(|p| {
                format!(
                    "theta = {}: best {} (utility {}); scores {}",
                    dec(&p.theta),
                    members_list(&p.optima),
                    dec(&p.utility),
                    p.scores
                        .iter()
                        .map(|s| format!("{}={}", s.id, dec(&s.score)))
                        .collect::<Vec<_>>()
                        .join(" "),
                )
            })
            .collect()
    }
}

pub fn sweep(settings: &Settings) -> Result<CommandOutput> {
    let population = ingest::load_population(
        settings.require_data()?,
        settings.group_column.as_deref(),
        &settings.divisors,
    )?;
    let objective = settings.objective(population.schema())?;
    let k = settings.require_k()?;
    let fairness = settings.fairness()?;
    let grid = settings.sweep_grid()?;
    let mut points = Vec::with_capacity(grid.len());
    for value in &grid {
        let theta = Theta::scalar(value.clone());
        let scores = population
            .items()
            .iter()
            .map(|item| {
                Ok(ItemScoreEcho {
                    id: item.id.as_str().to_string(),
                    name: item.display_name.clone(),
                    group: item.group.clone(),
                    score: score_item(population.schema(), item, &objective, &theta)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let optima = top_k(&population, &objective, &theta, k)?;
        let utility = optima[0].score(&objective, &theta)?;
        points.push(SweepPointEcho {
            theta: value.clone(),
            scores,
            optima: selection_echoes(&population, &optima, fairness.as_ref())?,
            utility,
        });
    }
    emit(settings, "sweep", SweepPayload { k, grid, points })
}

// ==== pareto ====

#[derive(Serialize)]
pub struct SectionsEcho {
    pub fairest: Vec<SelectionEcho>,
    #[serde(rename = "theta-optimal-family")]
    pub theta_optimal_family: Vec<SelectionEcho>,
    #[serde(rename = "convex-front")]
    pub convex_front: Vec<SelectionEcho>,
    pub front: Vec<SelectionEcho>,
    #[serde(rename = "weak-front")]
    pub weak_front: Vec<SelectionEcho>,
}

#[derive(Serialize)]
pub struct LinkEcho {
    pub from: String,
    pub to: String,
    pub holds: bool,
    pub strict: bool,
}

#[derive(Serialize)]
pub struct ParetoPayload {
    pub k: usize,
    pub space_size: usize,
    pub sections: SectionsEcho,
    pub links: Vec<LinkEcho>,
    pub fairest_detail: FairestEcho,
}

impl Render for ParetoPayload {
    fn tables(&self) -> Vec<Table> {
        vec![
            selection_table("fairest", &self.sections.fairest),
            selection_table("theta-optimal-family", &self.sections.theta_optimal_family),
            selection_table("convex-front", &self.sections.convex_front),
            selection_table("front", &self.sections.front),
            selection_table("weak-front", &self.sections.weak_front),
            Table {
                name: "chain",
                header: vec!["from", "to", "holds", "strict"],
                rows: self
                    .links
                    .iter()
                    .map(|l| {
                        vec![
                            l.from.clone(),
                            l.to.clone(),
                            l.holds.to_string(),
                            l.strict.to_string(),
                        ]
                    })
                    .collect(),
            },
        ]
    }

    fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("selection space: {} subsets of size {}", self.space_size, self.k),
            format!("fairest: {}", members_list(&self.sections.fairest)),
            format!(
                "theta-optimal family: {}",
                members_list(&self.sections.theta_optimal_family)
            ),
            format!("convex front: {}", members_list(&self.sections.convex_front)),
            format!("front: {}", members_list(&self.sections.front)),
            format!("weak front: {}", members_list(&self.sections.weak_front)),
        ];
        for link in &self.links {
            lines.push(format!(
                "{} is a {} subset of {} ({})",
                link.from,
                if link.strict { "strict" } else { "non-strict" },
                link.to,
                if link.holds { "holds" } else { "VIOLATED" },
            ));
        }
        lines
    }
}

pub fn pareto(settings: &Settings) -> Result<CommandOutput> {
    let population = ingest::load_population(
        settings.require_data()?,
        settings.group_column.as_deref(),
        &settings.divisors,
    )?;
    let objective = settings.objective(population.schema())?;
    let k = settings.require_k()?;
    let fairness = settings.require_fairness()?;
    if fairness.soft.is_none() {
        return Err(Error::Parameter(
            "pareto needs a soft fairness score ([fairness].groups or all_groups)".into(),
        ));
    }
    let domain = settings.domain()?;
    let report = front_report(&population, &objective, &domain, k, &fairness)?;
    let payload = ParetoPayload {
        k,
        space_size: report.space.len(),
        sections: SectionsEcho {
            fairest: selection_echoes(&population, &report.fairest, Some(&fairness))?,
            theta_optimal_family: selection_echoes(
                &population,
                &report.optimal_family,
                Some(&fairness),
            )?,
            convex_front: selection_echoes(&population, &report.convex_front, Some(&fairness))?,
            front: selection_echoes(&population, &report.front, Some(&fairness))?,
            weak_front: selection_echoes(&population, &report.weak_front, Some(&fairness))?,
        },
        links: report
            .links
            .iter()
            .map(|l| LinkEcho {
                from: l.from.to_string(),
                to: l.to.to_string(),
                holds: l.holds,
                strict: l.strict,
            })
            .collect(),
        fairest_detail: fairest_echo(&population, &report.fairest_detail, &fairness)?,
    };
    emit(settings, "pareto", payload)
}

// ==== compare ====

#[derive(Serialize)]
pub struct BranchEcho {
    pub optima: Vec<SelectionEcho>,
    pub utility: Scalar,
}

#[derive(Serialize)]
pub struct NoRegretEcho {
    pub winner: SelectionEcho,
    pub ties: Vec<Vec<String>>,
    pub fairness: Scalar,
    pub theta_star: Vec<Scalar>,
    pub utility_at_theta_star: Scalar,
    pub best_utility_at_theta_star: Scalar,
    /// Always zero when the family is enumerated exactly: the winner is
    /// optimal at its own θ*. Computed, not asserted.
    pub regret_at_theta_star: Scalar,
    pub utility_at_reference: Scalar,
}

#[derive(Serialize)]
pub struct ComparePayload {
    pub k: usize,
    pub reference_theta: Scalar,
    pub unconstrained: BranchEcho,
    pub quota_baseline: QuotaEcho,
    pub no_regret: NoRegretEcho,
}

impl Render for ComparePayload {
    fn tables(&self) -> Vec<Table> {
        vec![
            selection_table("unconstrained", &self.unconstrained.optima),
            selection_table("quota-baseline", &self.quota_baseline.optima),
            Table {
                name: "paths",
                header: vec!["path", "selection", "utility", "regret", "fairness", "theta"],
                rows: vec![
                    vec![
                        "unconstrained".into(),
                        id_cell(&self.unconstrained.optima[0].ids),
                        frac(&self.unconstrained.utility),
                        "0".into(),
                        fairness_cell(&self.unconstrained.optima[0].fairness),
                        frac(&self.reference_theta),
                    ],
                    vec![
                        "quota".into(),
                        id_cell(&self.quota_baseline.optima[0].ids),
                        frac(&self.quota_baseline.utility),
                        frac(&self.quota_baseline.regret),
                        fairness_cell(&self.quota_baseline.optima[0].fairness),
                        frac(&self.reference_theta),
                    ],
                    vec![
                        "no-regret".into(),
                        id_cell(&self.no_regret.winner.ids),
                        frac(&self.no_regret.utility_at_theta_star),
                        frac(&self.no_regret.regret_at_theta_star),
                        frac(&self.no_regret.fairness),
                        point_cell(&self.no_regret.theta_star),
                    ],
                ],
            },
        ]
    }

    fn summary_lines(&self) -> Vec<String> {
        vec![
            format!(
                "unconstrained at theta = {}: {} with utility {}",
                dec(&self.reference_theta),
                members_list(&self.unconstrained.optima),
                dec(&self.unconstrained.utility),
            ),
            format!(
                "quota baseline (>= {} '{}'): utility {}, regret {} against the unconstrained optimum",
                dec(&self.quota_baseline.min_share),
                self.quota_baseline.label,
                dec(&self.quota_baseline.utility),
                dec(&self.quota_baseline.regret),
            ),
            format!(
                "no-regret path: {} is exactly optimal at theta* = {} (regret {}), fairness {}",
                self.no_regret.winner.members,
                point_cell(&self.no_regret.theta_star),
                dec(&self.no_regret.regret_at_theta_star),
                dec(&self.no_regret.fairness),
            ),
            format!(
                "for context, the no-regret pick scores {} at the reference theta",
                dec(&self.no_regret.utility_at_reference),
            ),
        ]
    }
}

pub fn compare(settings: &Settings) -> Result<CommandOutput> {
    let population = ingest::load_population(
        settings.require_data()?,
        settings.group_column.as_deref(),
        &settings.divisors,
    )?;
    let objective = settings.objective(population.schema())?;
    let k = settings.require_k()?;
    let fairness = settings.require_fairness()?;
    let (label, min_share) = match &fairness.hard {
        Some(HardFairness::Quota { label, min_share }) => (label.clone(), min_share.clone()),
        None => {
            return Err(Error::Parameter(
                "compare needs a quota baseline (quota_label and quota_share)".into(),
            ))
        }
    };
    if fairness.soft.is_none() {
        return Err(Error::Parameter(
            "compare needs a soft fairness score ([fairness].groups or all_groups)".into(),
        ));
    }
    let domain = settings.domain()?;
    let reference = settings.reference_theta()?;
    let theta = Theta::scalar(reference.clone());

    let baseline = regret(&population, &objective, &theta, k, &fairness)?;
    let (family, _) = optimal_family(&population, &objective, &domain, k, settings)?;
    let options = FairestOptions { prefer_theta_near: settings.prefer_theta.clone() };
    let fairest = fairest_optimal(&population, &family, &fairness, &options)?;
    let theta_star = fairest.theta_star.clone();
    let winner_at_star = fairest.winner.selection.score(&objective, &theta_star)?;
    let best_at_star = top_k(&population, &objective, &theta_star, k)?[0]
        .score(&objective, &theta_star)?;
    let winner_at_reference = fairest.winner.selection.score(&objective, &theta)?;

    let payload = ComparePayload {
        k,
        reference_theta: reference,
        unconstrained: BranchEcho {
            optima: selection_echoes(&population, &baseline.unconstrained, Some(&fairness))?,
            utility: baseline.unconstrained_utility.clone(),
        },
        quota_baseline: QuotaEcho {
            label,
            min_share,
            optima: selection_echoes(&population, &baseline.constrained, Some(&fairness))?,
            utility: baseline.constrained_utility.clone(),
            regret: baseline.regret.clone(),
        },
        no_regret: NoRegretEcho {
            winner: selection_echo(&population, &fairest.winner.selection, Some(&fairness))?,
            ties: fairest.ties.iter().map(|s| s.id_strings()).collect(),
            fairness: fairest.fairness.clone(),
            theta_star: theta_star.components().to_vec(),
            utility_at_theta_star: winner_at_star.clone(),
            best_utility_at_theta_star: best_at_star.clone(),
            regret_at_theta_star: &best_at_star - &winner_at_star,
            utility_at_reference: winner_at_reference,
        },
    };
    emit(settings, "compare", payload)
}

// ==== ascent ====

#[derive(Serialize)]
pub struct StepEcho {
    pub iteration: usize,
    pub theta: Vec<f64>,
    pub solution: Vec<f64>,
    pub utility: f64,
    pub fairness: f64,
    pub solution_step: f64,
    pub theta_step: f64,
}

impl From<&TraceStep> for StepEcho {
    fn from(step: &TraceStep) -> Self {
        StepEcho {
            iteration: step.iteration,
            theta: step.theta.clone(),
            solution: step.solution.clone(),
            utility: step.utility,
            fairness: step.fairness,
            solution_step: step.solution_step,
            theta_step: step.theta_step,
        }
    }
}

#[derive(Serialize)]
pub struct GradientAuditEcho {
    pub theta: Vec<f64>,
    pub analytic: Vec<f64>,
    pub finite_difference: Vec<f64>,
    pub max_absolute_deviation: f64,
    pub epsilon: f64,
}

impl From<&GradientAudit> for GradientAuditEcho {
    fn from(audit: &GradientAudit) -> Self {
        GradientAuditEcho {
            theta: audit.theta.clone(),
            analytic: audit.analytic.clone(),
            finite_difference: audit.finite_difference.clone(),
            max_absolute_deviation: audit.max_absolute_deviation,
            epsilon: audit.epsilon,
        }
    }
}

#[derive(Serialize)]
pub struct AscentPayload {
    pub problem: String,
    pub description: String,
    pub termination: String,
    pub condition: Option<f64>,
    pub iterations: usize,
    pub initial: StepEcho,
    #[serde(rename = "final")]
    pub final_state: StepEcho,
    /// Strided to at most ~200 rows; always keeps the first and last steps.
    pub trace: Vec<StepEcho>,
    pub gradient_audit: Option<GradientAuditEcho>,
}

impl Render for AscentPayload {
    fn tables(&self) -> Vec<Table> {
        let step_row = |s: &StepEcho| {
            vec![
                s.iteration.to_string(),
                s.theta.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
                s.solution.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
                s.utility.to_string(),
                s.fairness.to_string(),
                s.solution_step.to_string(),
                s.theta_step.to_string(),
            ]
        };
        let mut tables = vec![
            Table {
                name: "outcome",
                header: vec!["problem", "termination", "iterations", "condition"],
                rows: vec![vec![
                    self.problem.clone(),
                    self.termination.clone(),
                    self.iterations.to_string(),
                    self.condition.map(|c| c.to_string()).unwrap_or_default(),
                ]],
            },
            Table {
                name: "trace",
                header: vec![
                    "iteration",
                    "theta",
                    "solution",
                    "utility",
                    "fairness",
                    "solution_step",
                    "theta_step",
                ],
                rows: self.trace.iter().map(step_row).collect(),
            },
        ];
        if let Some(audit) = &self.gradient_audit {
            tables.push(Table {
                name: "gradient-audit",
                header: vec!["component", "analytic", "finite_difference", "epsilon"],
                rows: audit
                    .analytic
                    .iter()
                    .zip(&audit.finite_difference)
                    .enumerate()
                    .map(|(i, (a, f))| {
                        vec![i.to_string(), a.to_string(), f.to_string(), audit.epsilon.to_string()]
                    })
                    .collect(),
            });
        }
        tables
    }

    fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("problem: {} ({})", self.problem, self.description),
            format!(
                "termination: {} after {} iteration(s){}",
                self.termination,
                self.iterations,
                self.condition
                    .map(|c| format!(" (condition estimate {c:.3e})"))
                    .unwrap_or_default(),
            ),
            format!(
                "final theta {:?}, fairness {:.6}, utility {:.6}",
                self.final_state.theta, self.final_state.fairness, self.final_state.utility,
            ),
        ];
        if let Some(audit) = &self.gradient_audit {
            lines.push(format!(
                "gradient audit at epsilon {}: max deviation {:.3e}",
                audit.epsilon, audit.max_absolute_deviation,
            ));
        }
        lines
    }
}

pub fn ascent(settings: &Settings) -> Result<CommandOutput> {
    let name = settings.ascent.problem.as_deref().ok_or_else(|| {
        Error::Parameter(format!(
            "no problem named (--problem or [ascent].problem); available: {}",
            problem_names().join(", ")
        ))
    })?;
    let registered = by_name(name).ok_or_else(|| {
        Error::Parameter(format!(
            "unknown problem '{name}'; available: {}",
            problem_names().join(", ")
        ))
    })?;
    let mut config = AscentConfig::default();
    if let Some(alpha) = settings.ascent.alpha {
        config.alpha = alpha;
    }
    if let Some(beta) = settings.ascent.beta {
        config.beta = beta;
    }
    if let Some(max_iterations) = settings.ascent.max_iterations {
        config.max_iterations = max_iterations;
    }
    if let Some(tolerance) = settings.ascent.tolerance {
        config.tolerance = tolerance;
    }
    config.use_exact_inner = settings.ascent.exact_inner;
    let theta0 = settings.ascent.theta0.clone().unwrap_or(registered.initial_theta);
    let s0 = settings.ascent.s0.clone().unwrap_or(registered.initial_solution);

    let gradient_audit = match settings.ascent.epsilon {
        Some(epsilon) => {
            Some((&finite_difference_audit(&registered.problem, &theta0, epsilon)?).into())
        }
        None => None,
    };
    let trace = alternating_ascent(&registered.problem, &config, &theta0, &s0)?;
    let termination = match trace.termination {
        Termination::Converged => "converged",
        Termination::IterationCap => "iteration-cap",
        Termination::SingularHessian => "singular-hessian",
    };
    let stride = trace.steps.len().div_ceil(TRACE_ROWS).max(1);
    let echoed: Vec<StepEcho> = trace
        .steps
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == trace.steps.len() - 1)
        .map(|(_, s)| s.into())
        .collect();
    let payload = AscentPayload {
        problem: registered.name.to_string(),
        description: registered.description.to_string(),
        termination: termination.to_string(),
        condition: trace.condition,
        iterations: trace.final_step().iteration,
        initial: trace.steps.first().expect("trace has an initial state").into(),
        final_state: trace.final_step().into(),
        trace: echoed,
        gradient_audit,
    };
    let mut output = emit(settings, "ascent", payload)?;
    if trace.termination == Termination::SingularHessian {
        // The report is complete and explains the refusal; the exit code
        // makes the refusal visible to scripts.
        output.exit_code = 5;
    }
    Ok(output)
}

// ==== audit ====

#[derive(Serialize)]
pub struct OpenCellEcho {
    pub id: String,
    pub attribute: String,
    pub lo: Scalar,
    pub hi: Scalar,
}

#[derive(Serialize)]
pub struct ChosenValueEcho {
    pub id: String,
    pub attribute: String,
    pub value: Scalar,
    pub position: Scalar,
}

#[derive(Serialize)]
pub struct PositionEcho {
    pub id: String,
    pub attribute: String,
    pub group: String,
    pub value: Scalar,
    pub lo: Scalar,
    pub hi: Scalar,
    pub position: Scalar,
    pub degenerate: bool,
}

#[derive(Serialize)]
pub struct ImputationEcho {
    pub positions: Vec<PositionEcho>,
    pub group_mean_positions: BTreeMap<String, Scalar>,
    pub asymmetry: Scalar,
}

fn imputation_echo(audit: &ImputationAudit) -> ImputationEcho {
    ImputationEcho {
        positions: audit
            .positions
            .iter()
            .map(|p| PositionEcho {
                id: p.id.as_str().to_string(),
                attribute: p.attribute.clone(),
                group: p.group.clone(),
                value: p.value.clone(),
                lo: p.lo.clone(),
                hi: p.hi.clone(),
                position: p.position.clone(),
                degenerate: p.degenerate,
            })
            .collect(),
        group_mean_positions: audit.group_mean_positions.clone(),
        asymmetry: audit.asymmetry.clone(),
    }
}

#[derive(Serialize)]
pub struct AuditPayload {
    pub caveat: String,
    pub theta: Scalar,
    pub k: usize,
    pub open_cells: Vec<OpenCellEcho>,
    pub completions_evaluated: usize,
    pub winner: SelectionEcho,
    pub chosen_values: Vec<ChosenValueEcho>,
    pub audit: ImputationEcho,
}

impl Render for AuditPayload {
    fn tables(&self) -> Vec<Table> {
        vec![
            Table {
                name: "open-cells",
                header: vec!["id", "attribute", "lo", "hi"],
                rows: self
                    .open_cells
                    .iter()
                    .map(|c| {
                        vec![c.id.clone(), c.attribute.clone(), frac(&c.lo), frac(&c.hi)]
                    })
                    .collect(),
            },
            Table {
                name: "chosen-completion",
                header: vec!["id", "attribute", "value", "position"],
                rows: self
                    .chosen_values
                    .iter()
                    .map(|c| {
                        vec![c.id.clone(), c.attribute.clone(), frac(&c.value), frac(&c.position)]
                    })
                    .collect(),
            },
            Table {
                name: "winner",
                header: vec!["ids", "fairness", "completions_evaluated"],
                rows: vec![vec![
                    id_cell(&self.winner.ids),
                    fairness_cell(&self.winner.fairness),
                    self.completions_evaluated.to_string(),
                ]],
            },
            Table {
                name: "positions",
                header: vec!["id", "attribute", "group", "value", "lo", "hi", "position"],
                rows: self
                    .audit
                    .positions
                    .iter()
                    .map(|p| {
                        vec![
                            p.id.clone(),
                            p.attribute.clone(),
                            p.group.clone(),
                            frac(&p.value),
                            frac(&p.lo),
                            frac(&p.hi),
                            frac(&p.position),
                        ]
                    })
                    .collect(),
            },
            Table {
                name: "group-means",
                header: vec!["group", "mean_position"],
                rows: self
                    .audit
                    .group_mean_positions
                    .iter()
                    .map(|(g, m)| vec![g.clone(), frac(m)])
                    .collect(),
            },
        ]
    }

    fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!(
                "searched {} endpoint completion(s) over {} open cell(s) at theta = {}",
                self.completions_evaluated,
                self.open_cells.len(),
                dec(&self.theta),
            ),
            format!(
                "fairest completion selects {} (fairness {})",
                self.winner.members,
                fairness_cell(&self.winner.fairness),
            ),
        ];
        for (group, mean) in &self.audit.group_mean_positions {
            lines.push(format!("mean imputed position for '{group}': {}", dec(mean)));
        }
        lines.push(format!("imputation asymmetry: {}", dec(&self.audit.asymmetry)));
        lines.push(format!("caveat: {}", self.caveat));
        lines
    }
}

pub fn audit(settings: &Settings) -> Result<CommandOutput> {
    let population = ingest::load_interval_population(
        settings.require_data()?,
        settings.group_column.as_deref(),
        &settings.divisors,
    )?;
    let objective = settings.objective(population.schema())?;
    let k = settings.require_k()?;
    let fairness = settings.require_fairness()?;
    if fairness.soft.is_none() {
        return Err(Error::Parameter(
            "audit needs a soft fairness score ([fairness].groups or all_groups)".into(),
        ));
    }
    let reference = settings.reference_theta()?;
    let theta = Theta::scalar(reference.clone());
    let result = fairest_completion(&population, &objective, &theta, k, &fairness)?;

    let names = population.schema().names();
    let open_cells = population
        .open_cells()
        .into_iter()
        .map(|(r, a)| {
            let record = &population.records()[r];
            let interval = &record.values[a];
            OpenCellEcho {
                id: record.id.as_str().to_string(),
                attribute: names[a].clone(),
                lo: interval.lo().clone(),
                hi: interval.hi().clone(),
            }
        })
        .collect::<Vec<_>>();
    let chosen_values = population
        .open_cells()
        .into_iter()
        .map(|(r, a)| {
            let record = &population.records()[r];
            let interval = &record.values[a];
            let value = result.completion.value(r, a).clone();
            ChosenValueEcho {
                id: record.id.as_str().to_string(),
                attribute: names[a].clone(),
                position: interval.position(&value),
                value,
            }
        })
        .collect::<Vec<_>>();
    let winner = selection_echo(&result.population, &result.selection, Some(&fairness))?;
    let payload = AuditPayload {
        caveat: IMPUTATION_CAVEAT.to_string(),
        theta: reference,
        k,
        open_cells,
        completions_evaluated: result.completions_evaluated,
        winner,
        chosen_values,
        audit: imputation_echo(&result.audit),
    };
    emit(settings, "audit", payload)
}
