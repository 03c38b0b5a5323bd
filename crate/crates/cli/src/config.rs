//! Run configuration: a TOML file, flag overrides on top, and the resolved
//! settings commands actually consume.
//!
//! Numeric parameters in the file are strings ("1/3", "0.35") rather than
//! TOML floats: a float literal cannot say exactly one third, and the whole
//! point of the exact pipeline is that it never starts from a rounded θ.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fairopt_core::model::{AttributeSchema, FairnessSpec, ObjectiveSpec, ThetaDomain};
use fairopt_core::{Error, Result, Scalar};
use serde::{Deserialize, Serialize};

/// Raw shape of the `--config` TOML file. Every entry is optional; command
/// line flags override file entries field by field.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<DataSection>,
    pub objective: Option<ObjectiveSection>,
    pub selection: Option<SelectionSection>,
    pub theta: Option<ThetaSection>,
    pub fairness: Option<FairnessSection>,
    pub sampling: Option<SamplingSection>,
    pub sweep: Option<SweepSection>,
    pub ascent: Option<AscentSection>,
    pub report: Option<ReportSection>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<String>,
    /// Column holding the group label; inferred (sole categorical column)
    /// when absent.
    pub group_column: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSection {
    /// Attribute columns entering the mixture, in weight order. Two names
    /// give the scalar-θ mixture θ·first + (1−θ)·second; more give the
    /// vector mixture.
    pub attributes: Option<Vec<String>>,
    /// Per-attribute divisors applied before mixing, e.g. IQ = "10".
    pub divisors: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    pub k: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSection {
    /// Reference point for single-θ solves and comparisons.
    pub value: Option<String>,
    pub lo: Option<String>,
    pub hi: Option<String>,
    /// Axis-aligned box for vector θ (componentwise bounds).
    pub box_lower: Option<Vec<String>>,
    pub box_upper: Option<Vec<String>>,
    /// Convex hull vertices for vector θ.
    pub hull: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FairnessSection {
    /// The two group labels whose count difference defines the soft score.
    pub groups: Option<Vec<String>>,
    /// Score the spread across all groups instead of a designated pair.
    pub all_groups: Option<bool>,
    pub quota_label: Option<String>,
    pub quota_share: Option<String>,
    /// Break fairness ties toward the optimal-family entry certified
    /// nearest this θ.
    pub prefer_theta: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit θ grid; overrides lo/hi subdivision.
    pub grid: Option<Vec<String>>,
    /// Number of evenly spaced grid points between lo and hi.
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AscentSection {
    pub problem: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub exact_inner: Option<bool>,
    /// Central-difference ε; when set, a gradient audit is attached.
    pub epsilon: Option<f64>,
    pub theta0: Option<Vec<f64>>,
    pub s0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub format: Option<String>,
    pub out: Option<String>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Parameter(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| Error::Parameter(format!("config {}: {e}", path.display())))
    }
}

/// Output format of a report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Structured report, rationals as exact `p/q` strings.
    #[default]
    Json,
    /// One named table per result section.
    Csv,
    /// Human-readable digest, rationals as decimals.
    Summary,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Summary => "summary",
        }
    }

    fn parse(raw: &str) -> Result<Self> {
        match raw {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "summary" => Ok(Format::Summary),
            other => Err(Error::Parameter(format!(
                "unknown report format '{other}' (expected json, csv, or summary)"
            ))),
        }
    }
}

/// Ascent parameters after merging (None = library default).
#[derive(Clone, Debug, Default)]
pub struct AscentSettings {
    pub problem: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub exact_inner: bool,
    pub epsilon: Option<f64>,
    pub theta0: Option<Vec<f64>>,
    pub s0: Option<Vec<f64>>,
}

/// Everything a command needs, already parsed and merged.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub data: Option<PathBuf>,
    pub group_column: Option<String>,
    pub attributes: Option<Vec<String>>,
    pub divisors: BTreeMap<String, Scalar>,
    pub k: Option<usize>,
    pub theta_value: Option<Scalar>,
    pub theta_lo: Option<Scalar>,
    pub theta_hi: Option<Scalar>,
    pub box_lower: Option<Vec<Scalar>>,
    pub box_upper: Option<Vec<Scalar>>,
    pub hull: Option<Vec<Vec<Scalar>>>,
    pub groups: Option<Vec<String>>,
    pub all_groups: bool,
    pub quota_label: Option<String>,
    pub quota_share: Option<Scalar>,
    pub prefer_theta: Option<Scalar>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub grid: Option<Vec<Scalar>>,
    pub steps: Option<usize>,
    pub ascent: AscentSettings,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn parse_scalar(field: &str, raw: &str) -> Result<Scalar> {
    raw.parse::<Scalar>()
        .map_err(|e| Error::Parameter(format!("{field}: {e}")))
}

fn parse_scalar_list(field: &str, raw: &[String]) -> Result<Vec<Scalar>> {
    raw.iter().map(|s| parse_scalar(field, s)).collect()
}

impl Settings {
    /// Folds a config file into defaults; flags are folded in afterwards by
    /// the command layer (flags win).
    pub fn from_file(file: FileConfig) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(data) = file.data {
            s.data = data.path.map(PathBuf::from);
            s.group_column = data.group_column;
        }
        if let Some(objective) = file.objective {
            s.attributes = objective.attributes;
            for (name, raw) in objective.divisors.unwrap_or_default() {
                let d = parse_scalar(&format!("objective.divisors.{name}"), &raw)?;
                s.divisors.insert(name, d);
            }
        }
        if let Some(selection) = file.selection {
            s.k = selection.k;
        }
        if let Some(theta) = file.theta {
            s.theta_value = theta.value.map(|v| parse_scalar("theta.value", &v)).transpose()?;
            s.theta_lo = theta.lo.map(|v| parse_scalar("theta.lo", &v)).transpose()?;
            s.theta_hi = theta.hi.map(|v| parse_scalar("theta.hi", &v)).transpose()?;
            s.box_lower = theta
                .box_lower
                .map(|v| parse_scalar_list("theta.box_lower", &v))
                .transpose()?;
            s.box_upper = theta
                .box_upper
                .map(|v| parse_scalar_list("theta.box_upper", &v))
                .transpose()?;
            s.hull = theta
                .hull
                .map(|vs| {
                    vs.iter()
                        .map(|v| parse_scalar_list("theta.hull", v))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
        }
        if let Some(fairness) = file.fairness {
            s.groups = fairness.groups;
            s.all_groups = fairness.all_groups.unwrap_or(false);
            s.quota_label = fairness.quota_label;
            s.quota_share = fairness
                .quota_share
                .map(|v| parse_scalar("fairness.quota_share", &v))
                .transpose()?;
            s.prefer_theta = fairness
                .prefer_theta
                .map(|v| parse_scalar("fairness.prefer_theta", &v))
                .transpose()?;
        }
        if let Some(sampling) = file.sampling {
            s.samples = sampling.samples;
            s.seed = sampling.seed;
        }
        if let Some(sweep) = file.sweep {
            s.grid = sweep.grid.map(|g| parse_scalar_list("sweep.grid", &g)).transpose()?;
            s.steps = sweep.steps;
        }
        if let Some(ascent) = file.ascent {
            s.ascent = AscentSettings {
                problem: ascent.problem,
                alpha: ascent.alpha,
                beta: ascent.beta,
                max_iterations: ascent.max_iterations,
                tolerance: ascent.tolerance,
                exact_inner: ascent.exact_inner.unwrap_or(false),
                epsilon: ascent.epsilon,
                theta0: ascent.theta0,
                s0: ascent.s0,
            };
        }
        if let Some(report) = file.report {
            if let Some(f) = report.format {
                s.format = Format::parse(&f)?;
            }
            s.out = report.out.map(PathBuf::from);
        }
        Ok(s)
    }

    pub fn require_data(&self) -> Result<&PathBuf> {
        self.data
            .as_ref()
            .ok_or_else(|| Error::Parameter("no dataset given (--data or [data].path)".into()))
    }

    pub fn require_k(&self) -> Result<usize> {
        self.k.ok_or_else(|| Error::Parameter("no k given (--k or [selection].k)".into()))
    }

    /// The θ-domain: hull and box take precedence for vector problems, then
    /// the [lo, hi] interval, then a degenerate interval at the point value.
    pub fn domain(&self) -> Result<ThetaDomain> {
        if let Some(vertices) = &self.hull {
            return ThetaDomain::hull(vertices.clone());
        }
        match (&self.box_lower, &self.box_upper) {
            (Some(lower), Some(upper)) => {
                return ThetaDomain::boxed(lower.clone(), upper.clone());
            }
            (None, None) => {}
            _ => {
                return Err(Error::Parameter(
                    "theta.box_lower and theta.box_upper must be given together".into(),
                ))
            }
        }
        match (&self.theta_lo, &self.theta_hi) {
            (Some(lo), Some(hi)) => ThetaDomain::interval(lo.clone(), hi.clone()),
            (None, None) => match &self.theta_value {
                Some(v) => ThetaDomain::interval(v.clone(), v.clone()),
                None => Err(Error::Parameter(
                    "no θ domain given (--theta, or --theta-lo with --theta-hi)".into(),
                )),
            },
            _ => Err(Error::Parameter(
                "--theta-lo and --theta-hi must be given together".into(),
            )),
        }
    }

    /// Reference θ for single-point evaluations: the explicit value if any,
    /// otherwise the midpoint of the interval.
    pub fn reference_theta(&self) -> Result<Scalar> {
        if let Some(v) = &self.theta_value {
            return Ok(v.clone());
        }
        match (&self.theta_lo, &self.theta_hi) {
            (Some(lo), Some(hi)) => Ok(Scalar::midpoint(lo, hi)),
            _ => Err(Error::Parameter(
                "no reference θ (--theta, or --theta-lo with --theta-hi)".into(),
            )),
        }
    }

    /// The soft/hard fairness spec, if any of it is configured.
    pub fn fairness(&self) -> Result<Option<FairnessSpec>> {
        let soft = if self.all_groups {
            Some(FairnessSpec::mismatch_all_groups())
        } else if let Some(groups) = &self.groups {
            if groups.len() != 2 {
                return Err(Error::Parameter(format!(
                    "fairness.groups needs exactly two labels, got {}",
                    groups.len()
                )));
            }
            Some(FairnessSpec::mismatch(groups[0].clone(), groups[1].clone()))
        } else {
            None
        };
        let spec = match (&self.quota_label, &self.quota_share) {
            (Some(label), Some(share)) => {
                Some(soft.unwrap_or_default().with_quota(label.clone(), share.clone()))
            }
            (None, None) => soft,
            _ => {
                return Err(Error::Parameter(
                    "quota_label and quota_share must be given together".into(),
                ))
            }
        };
        Ok(spec)
    }

    pub fn require_fairness(&self) -> Result<FairnessSpec> {
        self.fairness()?.ok_or_else(|| {
            Error::Parameter(
                "this command needs a fairness spec ([fairness].groups or --groups)".into(),
            )
        })
    }

    /// The objective over the named attributes, defaulting to the schema's
    /// attributes when it has exactly two.
    pub fn objective(&self, schema: &AttributeSchema) -> Result<ObjectiveSpec> {
        let names: Vec<String> = match &self.attributes {
            Some(names) => names.clone(),
            None if schema.len() == 2 => schema.names().to_vec(),
            None => {
                return Err(Error::Parameter(format!(
                    "the dataset has {} numeric attributes; name the mixture's \
                     attributes in [objective].attributes",
                    schema.len()
                )))
            }
        };
        let spec = match names.len() {
            0 | 1 => {
                return Err(Error::Parameter(
                    "the objective needs at least two attributes".into(),
                ))
            }
            2 => ObjectiveSpec::TwoAttributeMixture {
                first: names[0].clone(),
                second: names[1].clone(),
            },
            _ => ObjectiveSpec::LinearMixture { attributes: names },
        };
        spec.resolve(schema)?;
        Ok(spec)
    }

    /// Grid for `sweep`: the explicit list, or `steps` evenly spaced exact
    /// points across [lo, hi].
    pub fn sweep_grid(&self) -> Result<Vec<Scalar>> {
        if let Some(grid) = &self.grid {
            if grid.is_empty() {
                return Err(Error::Parameter("sweep grid is empty".into()));
            }
            return Ok(grid.clone());
        }
        let (lo, hi) = match (&self.theta_lo, &self.theta_hi) {
            (Some(lo), Some(hi)) => (lo.clone(), hi.clone()),
            _ => match &self.theta_value {
                Some(v) => return Ok(vec![v.clone()]),
                None => {
                    return Err(Error::Parameter(
                        "sweep needs --grid, --theta, or --theta-lo with --theta-hi".into(),
                    ))
                }
            },
        };
        let steps = self.steps.unwrap_or(11);
        if steps < 2 {
            return Err(Error::Parameter("sweep needs at least 2 steps".into()));
        }
        let span = &hi - &lo;
        Ok((0..steps)
            .map(|i| &lo + &(&span * &Scalar::ratio(i as i64, (steps - 1) as i64)))
            .collect())
    }

    /// The resolved settings, echoed into every report so a run is
    /// reproducible from its own output.
    pub fn echo(&self, command: &str) -> ConfigEcho {
        ConfigEcho {
            command: command.to_string(),
            data: self.data.as_ref().map(|p| p.display().to_string()),
            group_column: self.group_column.clone(),
            attributes: self.attributes.clone(),
            divisors: self.divisors.clone(),
            k: self.k,
            theta_value: self.theta_value.clone(),
            theta_lo: self.theta_lo.clone(),
            theta_hi: self.theta_hi.clone(),
            box_lower: self.box_lower.clone(),
            box_upper: self.box_upper.clone(),
            hull: self.hull.clone(),
            groups: self.groups.clone(),
            all_groups: self.all_groups,
            quota_label: self.quota_label.clone(),
            quota_share: self.quota_share.clone(),
            prefer_theta: self.prefer_theta.clone(),
            samples: self.samples,
            seed: self.seed,
            grid: self.grid.clone(),
            steps: self.steps,
            problem: self.ascent.problem.clone(),
            alpha: self.ascent.alpha,
            beta: self.ascent.beta,
            max_iterations: self.ascent.max_iterations,
            tolerance: self.ascent.tolerance,
            exact_inner: self.ascent.exact_inner,
            epsilon: self.ascent.epsilon,
            format: self.format.name().to_string(),
        }
    }
}

/// The effective configuration as echoed in reports: flags already merged,
/// scalars exact.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub data: Option<String>,
    pub group_column: Option<String>,
    pub attributes: Option<Vec<String>>,
    pub divisors: BTreeMap<String, Scalar>,
    pub k: Option<usize>,
    pub theta_value: Option<Scalar>,
    pub theta_lo: Option<Scalar>,
    pub theta_hi: Option<Scalar>,
    pub box_lower: Option<Vec<Scalar>>,
    pub box_upper: Option<Vec<Scalar>>,
    pub hull: Option<Vec<Vec<Scalar>>>,
    pub groups: Option<Vec<String>>,
    pub all_groups: bool,
    pub quota_label: Option<String>,
    pub quota_share: Option<Scalar>,
    pub prefer_theta: Option<Scalar>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub grid: Option<Vec<Scalar>>,
    pub steps: Option<usize>,
    pub problem: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub exact_inner: bool,
    pub epsilon: Option<f64>,
    pub format: String,
}
