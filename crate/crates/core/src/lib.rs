//! Fair selection without paying for it in utility.
//!
//! When a scoring rule has a disputed trade-off weight θ, each admissible θ
//! yields its own optimal selection, and the collection of these optima,
//! `S*_Θ = { s*(θ) : θ ∈ Θ }`, is the defensible frontier: any member is the
//! best possible choice under *some* weighting everyone has agreed to
//! entertain. A secondary criterion, such as balance between groups, can
//! then be maximized over that frontier; whatever it picks is optimal for a
//! defensible θ, so the fairness comes free of regret about the primary
//! objective.
//!
//! The crate provides that pipeline end to end:
//!
//! - [`scalar`]: arithmetic that stays in exact rationals whenever the
//!   inputs allow and says so ([`Scalar::is_exact`]), with one explicit
//!   float escape hatch.
//! - [`model`]: populations of scored items, mixture objectives over their
//!   attributes, k-subset selections, and fairness criteria (a soft group
//!   balance score plus optional hard quotas).
//! - [`discrete`]: exact top-k solving with all ties, regret of a
//!   constrained pick, and enumeration of the whole optimal family over a
//!   θ-interval via utility crossing points, each member certified by the
//!   closed θ-regions where it wins; sampling fallbacks for boxes and
//!   polytopes of higher-dimensional θ; the fairest-member pick.
//! - [`pareto`]: strong, weak, and convex Pareto frontiers of the induced
//!   utility vectors, with the inclusion chain between them and the optimal
//!   family checked rather than assumed.
//! - [`uncertain`]: interval-valued attributes, the endpoint completion
//!   search for the fairness-maximizing consistent dataset, and an audit
//!   quantifying how asymmetrically an imputation treats the groups.
//! - [`continuous`]: smooth relaxations, the implicit fairness gradient
//!   through the inner optimum, projected alternating ascent, and a
//!   finite-difference audit of the closed form.
//! - [`fixtures`]: the six-student admission roster used as the worked
//!   example throughout the docs and tests.
//! - [`oracle`]: deliberately brute-force reference implementations that the
//!   fast paths are tested against.
//!
//! # Example
//!
//! Two of six students are admitted by a mixture of IQ and grade whose
//! weight is only known to lie in [1/3, 2/3]. The optimal family has two
//! members; one of them balances the genders perfectly, and choosing it
//! costs nothing defensible:
//!
//! ```
//! use fairopt_core::discrete::{enumerate_optimal_set, fairest_optimal, FairestOptions};
//! use fairopt_core::model::ThetaDomain;
//! use fairopt_core::{fixtures, Scalar};
//!
//! let population = fixtures::students();
//! let objective = fixtures::students_objective();
//! let fairness = fixtures::mismatch_fairness();
//! let domain = ThetaDomain::interval(Scalar::ratio(1, 3), Scalar::ratio(2, 3)).unwrap();
//!
//! let family = enumerate_optimal_set(&population, &objective, &domain, 2).unwrap();
//! let members: Vec<String> = family.entries.iter().map(|e| e.selection.to_string()).collect();
//! assert_eq!(members, ["{A, Z}", "{B, Z}"]);
//!
//! let fairest =
//!     fairest_optimal(&population, &family, &fairness, &FairestOptions::default()).unwrap();
//! assert_eq!(fairest.winner.selection.to_string(), "{A, Z}");
//! assert!(fairest.fairness.is_zero(), "one female, one male: perfectly balanced");
//! ```
//!
//! Everything downstream of parsing is deterministic, including the sampling
//! paths (explicit seeds) and all iteration orders, so identical inputs
//! produce byte-identical reports.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod oracle;
pub mod pareto;
pub mod scalar;
pub mod uncertain;

pub use error::{Error, Result};
pub use model::{
    AttributeSchema, FairnessSpec, ItemId, ItemRecord, ObjectiveSpec, Population, Selection,
    Theta, ThetaDomain,
};
pub use scalar::Scalar;
