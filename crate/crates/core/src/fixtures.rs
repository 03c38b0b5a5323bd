//! The worked example shipped with the crate: a six-student admission
//! roster scored on IQ (divisor 10) and school grade.
//!
//! Small enough to verify by hand, rich enough to exercise every solver:
//! ties, crossing points, an unfair unconstrained optimum, and a fairer
//! alternative that is still optimal for some θ.

use crate::error::Result;
use crate::model::{AttributeSchema, FairnessSpec, ItemRecord, ObjectiveSpec, Population};
use crate::scalar::Scalar;
use crate::uncertain::{IntervalPopulation, IntervalRecord, IntervalValue};

fn n(text: &str) -> Scalar {
    text.parse().expect("fixture literals parse")
}

/// Six students: id, name, IQ, grade, gender.
pub fn students() -> Population {
    let schema = AttributeSchema::new(vec!["IQ".into(), "grade".into()])
        .and_then(|s| s.with_divisor("IQ", n("10")))
        .expect("fixture schema is valid");
    let rows = [
        ("A", "Amy", "100", "10", "f"),
        ("B", "Bob", "150", "7", "m"),
        ("E", "Eve", "150", "5", "f"),
        ("I", "Isa", "110", "9", "f"),
        ("M", "Max", "70", "9", "m"),
        ("Z", "Zac", "140", "8", "m"),
    ];
    let items = rows
        .iter()
        .map(|(id, name, iq, grade, gender)| {
            ItemRecord::new(*id, Some(name), *gender, vec![n(iq), n(grade)])
        })
        .collect();
    Population::new(schema, items).expect("fixture population is valid")
}

/// The scalar mixture `θ·IQ/10 + (1−θ)·grade`.
pub fn students_objective() -> ObjectiveSpec {
    ObjectiveSpec::TwoAttributeMixture { first: "IQ".into(), second: "grade".into() }
}

/// Gender mismatch, no hard predicate.
pub fn mismatch_fairness() -> FairnessSpec {
    FairnessSpec::mismatch("m", "f")
}

/// Gender mismatch plus a minimum-share quota for women.
pub fn quota_fairness(min_share: Scalar) -> FairnessSpec {
    FairnessSpec::mismatch("m", "f").with_quota("f", min_share)
}

/// The same roster with two measurements blurred to intervals: Bob's IQ is
/// only known to lie in [140, 160] and Eve's grade in [5, 7].
pub fn students_with_intervals() -> Result<IntervalPopulation> {
    let schema = AttributeSchema::new(vec!["IQ".into(), "grade".into()])
        .and_then(|s| s.with_divisor("IQ", n("10")))?;
    #[allow(clippy::type_complexity)]
    let rows: [(&str, &str, &str, (&str, &str), (&str, &str)); 6] = [
        ("A", "Amy", "f", ("100", "100"), ("10", "10")),
        ("B", "Bob", "m", ("140", "160"), ("7", "7")),
        ("E", "Eve", "f", ("150", "150"), ("5", "7")),
        ("I", "Isa", "f", ("110", "110"), ("9", "9")),
        ("M", "Max", "m", ("70", "70"), ("9", "9")),
        ("Z", "Zac", "m", ("140", "140"), ("8", "8")),
    ];
    let mut records = Vec::new();
    for (id, name, gender, iq, grade) in rows {
        records.push(IntervalRecord::new(
            id,
            Some(name),
            gender,
            vec![
                IntervalValue::new(n(iq.0), n(iq.1))?,
                IntervalValue::new(n(grade.0), n(grade.1))?,
            ],
        ));
    }
    IntervalPopulation::new(schema, records)
}
