//! Experiment configuration files.
//!
//! One TOML file describes the system, the sets and functions a command
//! needs, and optional run settings. Every field error is reported with its
//! dotted path, e.g. `system.masses`.

use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::exact::{parse_rational, ExtValue};
use crate::group::{Group, GroupElement};
use crate::system::{
    FiniteSystem, Interval, PointSet, SampledKind, SampledSet, SampledSystem, Turn,
    GOLDEN_CONJUGATE,
};

/// A config error pinned to a field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for FieldError {}

pub(crate) fn field_err(field: impl Into<String>, message: impl fmt::Display) -> FieldError {
    FieldError {
        field: field.into(),
        message: message.to_string(),
    }
}

type Result<T> = std::result::Result<T, FieldError>;

/// An integer or a string such as `"1/3"`, `"0.25"` or `"inf"`.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    fn text(&self) -> String {
        match self {
            Number::Int(n) => n.to_string(),
            Number::Text(s) => s.clone(),
        }
    }

    pub fn rational(&self, field: &str) -> Result<BigRational> {
        parse_rational(&self.text()).map_err(|e| field_err(field, e))
    }

    pub fn ext_value(&self, field: &str) -> Result<ExtValue> {
        self.text().parse().map_err(|e| field_err(field, e))
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must agree with the subcommand when present.
    pub command: Option<String>,
    pub system: Option<SystemSpec>,
    pub target: Option<SetSpec>,
    pub function: Option<FunctionSpec>,
    pub allocation: Option<AllocationSpec>,
    pub hitting_set: Option<HittingSetSpec>,
    pub relation: Option<RelationSpec>,
    pub generator: Option<GeneratorSpec>,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Finite {
        #[serde(default = "default_group")]
        group: String,
        /// Shorthand for `Z` acting on `0..cycle` by `x -> x + 1`.
        cycle: Option<usize>,
        generators: Option<Vec<Vec<usize>>>,
        /// Uniform when omitted.
        masses: Option<Vec<Number>>,
    },
    Rotation {
        /// Decimal or fraction; the golden-ratio conjugate when omitted.
        alpha: Option<String>,
        seed: Option<u64>,
    },
    Torus {
        alpha: Vec<String>,
        seed: Option<u64>,
    },
    Odometer {
        depth: u32,
        seed: Option<u64>,
    },
    Cyclic {
        n: u64,
        seed: Option<u64>,
    },
}

fn default_group() -> String {
    "Z".into()
}

/// Exactly one field must be set.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub points: Option<Vec<usize>>,
    pub interval: Option<[Number; 2]>,
    #[serde(rename = "box")]
    pub box_sides: Option<Vec<[Number; 2]>>,
    /// Leading odometer digits, least significant first.
    pub cylinder: Option<Vec<u8>>,
    pub residues: Option<Vec<u64>>,
    pub all: Option<bool>,
}

/// Exactly one field must be set. Defaults to the constant 1.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub constant: Option<Number>,
    /// One value per point of a finite system.
    pub table: Option<Vec<Number>>,
    /// Points of a finite system where the function is 1.
    pub indicator: Option<Vec<usize>>,
    /// A set of a sampled system where the function is 1.
    pub indicator_set: Option<SetSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Greedy,
    Forward,
    Table,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationSpec {
    pub strategy: StrategyName,
    /// Group coordinates per point for `table`; `[]` marks a null point.
    pub table: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HittingSetSpec {
    pub vectors: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRule {
    Identity,
    FirstReturn,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    /// With `classes`, an explicit relation; otherwise the orbit relation of
    /// the system is used.
    pub masses: Option<Vec<Number>>,
    pub classes: Option<Vec<usize>>,
    pub tau: Option<Vec<usize>>,
    pub tau_rule: Option<TauRule>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    /// Explicit disjoint targets; a sweep-out partition is built otherwise.
    pub targets: Option<Vec<Vec<usize>>>,
    /// The sets `E_n`, one per target; all empty when omitted.
    pub sets: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub budget: Option<u64>,
    pub epsilon: Option<Number>,
    pub n_max: Option<usize>,
    pub radius: Option<i64>,
    pub point: Option<usize>,
    pub tail_n_max: Option<usize>,
    /// Also index shapes in the list of all finite subsets of the group.
    pub universal_shapes: Option<bool>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn system_spec(&self) -> Result<&SystemSpec> {
        self.system
            .as_ref()
            .ok_or_else(|| field_err("system", "missing section"))
    }
}

/// A resolved system.
#[derive(Clone, Debug)]
pub enum BuiltSystem {
    Finite(FiniteSystem),
    Sampled(SampledSystem),
}

fn parse_turn(text: &str, field: &str) -> Result<Turn> {
    if text.contains('/') {
        let r = parse_rational(text).map_err(|e| field_err(field, e))?;
        Ok(Turn::from_rational(&r))
    } else {
        Turn::from_decimal(text).map_err(|e| field_err(field, e))
    }
}

impl SystemSpec {
    pub fn config_seed(&self) -> Option<u64> {
        match self {
            SystemSpec::Finite { .. } => None,
            SystemSpec::Rotation { seed, .. }
            | SystemSpec::Torus { seed, .. }
            | SystemSpec::Odometer { seed, .. }
            | SystemSpec::Cyclic { seed, .. } => *seed,
        }
    }

    pub fn build(&self, seed: u64) -> Result<BuiltSystem> {
        match self {
            SystemSpec::Finite {
                group,
                cycle,
                generators,
                masses,
            } => {
                let group: Group = group.parse().map_err(|e| field_err("system.group", e))?;
                let generators = match (cycle, generators) {
                    (Some(n), None) => {
                        if *n == 0 {
                            return Err(field_err("system.cycle", "must be positive"));
                        }
                        vec![(0..*n).map(|x| (x + 1) % n).collect()]
                    }
                    (None, Some(g)) => g.clone(),
                    _ => {
                        return Err(field_err(
                            "system.generators",
                            "give exactly one of `cycle` and `generators`",
                        ))
                    }
                };
                let n_points = generators.first().map(Vec::len).unwrap_or(0);
                let masses = match masses {
                    Some(ms) => ms
                        .iter()
                        .enumerate()
                        .map(|(i, m)| m.rational(&format!("system.masses[{i}]")))
                        .collect::<Result<Vec<_>>>()?,
                    None if n_points == 0 => {
                        return Err(field_err("system.generators", "no points"));
                    }
                    None => vec![BigRational::new(1.into(), (n_points as i64).into()); n_points],
                };
                let field = match masses.len() == n_points {
                    true => "system.generators",
                    false => "system.masses",
                };
                FiniteSystem::new(group, masses, generators)
                    .map(BuiltSystem::Finite)
                    .map_err(|e| {
                        let field = match e {
                            crate::system::SystemError::MassSum(_)
                            | crate::system::SystemError::NegativeMass(_)
                            | crate::system::SystemError::Empty => "system.masses",
                            crate::system::SystemError::Group(_) => "system.group",
                            _ => field,
                        };
                        field_err(field, e)
                    })
            }
            SystemSpec::Rotation { alpha, .. } => {
                let alpha =
                    parse_turn(alpha.as_deref().unwrap_or(GOLDEN_CONJUGATE), "system.alpha")?;
                sampled(SampledKind::Rotation { alpha }, seed)
            }
            SystemSpec::Torus { alpha, .. } => {
                let alpha = alpha
                    .iter()
                    .enumerate()
                    .map(|(i, a)| parse_turn(a, &format!("system.alpha[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                sampled(SampledKind::Torus { alpha }, seed)
            }
            SystemSpec::Odometer { depth, .. } => {
                sampled(SampledKind::Odometer { depth: *depth }, seed)
            }
            SystemSpec::Cyclic { n, .. } => sampled(SampledKind::Cyclic { n: *n }, seed),
        }
    }
}

fn sampled(kind: SampledKind, seed: u64) -> Result<BuiltSystem> {
    SampledSystem::new(kind, seed)
        .map(BuiltSystem::Sampled)
        .map_err(|e| field_err("system", e))
}

fn interval(pair: &[Number; 2], field: &str) -> Result<Interval> {
    let lo = pair[0].rational(&format!("{field}[0]"))?;
    let hi = pair[1].rational(&format!("{field}[1]"))?;
    Interval::new(lo, hi).map_err(|e| field_err(field, e))
}

impl SetSpec {
    fn count(&self) -> usize {
        [
            self.points.is_some(),
            self.interval.is_some(),
            self.box_sides.is_some(),
            self.cylinder.is_some(),
            self.residues.is_some(),
            self.all == Some(true),
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }

    fn check_one(&self, field: &str) -> Result<()> {
        match self.count() {
            1 => Ok(()),
            0 => Err(field_err(field, "no set given")),
            _ => Err(field_err(field, "more than one set given")),
        }
    }

    pub fn finite(&self, fs: &FiniteSystem, field: &str) -> Result<PointSet> {
        self.check_one(field)?;
        if self.all == Some(true) {
            return Ok(PointSet::full(fs.n_points()));
        }
        let points = self
            .points
            .as_ref()
            .ok_or_else(|| field_err(field, "finite systems take `points` or `all`"))?;
        point_set(fs, points, &format!("{field}.points"))
    }

    pub fn sampled(&self, field: &str) -> Result<SampledSet> {
        self.check_one(field)?;
        if self.all == Some(true) {
            return Ok(SampledSet::Everything);
        }
        if let Some(pair) = &self.interval {
            return Ok(SampledSet::Interval(interval(
                pair,
                &format!("{field}.interval"),
            )?));
        }
        if let Some(sides) = &self.box_sides {
            let sides = sides
                .iter()
                .enumerate()
                .map(|(i, p)| interval(p, &format!("{field}.box[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            return Ok(SampledSet::Box(sides));
        }
        if let Some(digits) = &self.cylinder {
            if let Some(i) = digits.iter().position(|&d| d > 1) {
                return Err(field_err(
                    format!("{field}.cylinder[{i}]"),
                    "digits are 0 or 1",
                ));
            }
            return Ok(SampledSet::Cylinder(
                digits.iter().map(|&d| d == 1).collect(),
            ));
        }
        if let Some(members) = &self.residues {
            return Ok(SampledSet::Residues {
                n: 0,
                members: members.clone(),
            });
        }
        Err(field_err(
            format!("{field}.points"),
            "sampled systems do not take point lists",
        ))
    }
}

pub(crate) fn point_set(fs: &FiniteSystem, points: &[usize], field: &str) -> Result<PointSet> {
    PointSet::from_points(fs.n_points(), points.iter().copied()).map_err(|e| field_err(field, e))
}

/// Fills in the modulus of residue sets from the system.
pub(crate) fn bind_sampled_set(
    set: SampledSet,
    ss: &SampledSystem,
    field: &str,
) -> Result<SampledSet> {
    let set = match (set, ss.kind()) {
        (SampledSet::Residues { members, .. }, SampledKind::Cyclic { n }) => {
            SampledSet::Residues { n: *n, members }
        }
        (other, _) => other,
    };
    ss.check_set(&set).map_err(|e| field_err(field, e))?;
    Ok(set)
}

impl FunctionSpec {
    fn count(&self) -> usize {
        [
            self.constant.is_some(),
            self.table.is_some(),
            self.indicator.is_some(),
            self.indicator_set.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }

    fn check_one(&self) -> Result<()> {
        match self.count() {
            1 => Ok(()),
            0 => Err(field_err("function", "no function given")),
            _ => Err(field_err("function", "more than one function given")),
        }
    }

    /// Values on `n` points.
    pub fn finite(&self, n: usize) -> Result<Vec<ExtValue>> {
        self.check_one()?;
        if let Some(c) = &self.constant {
            return Ok(vec![c.ext_value("function.constant")?; n]);
        }
        if let Some(table) = &self.table {
            if table.len() != n {
                return Err(field_err(
                    "function.table",
                    format!("{} values for {n} points", table.len()),
                ));
            }
            return table
                .iter()
                .enumerate()
                .map(|(i, v)| v.ext_value(&format!("function.table[{i}]")))
                .collect();
        }
        if let Some(points) = &self.indicator {
            let set = PointSet::from_points(n, points.iter().copied())
                .map_err(|e| field_err("function.indicator", e))?;
            return Ok((0..n)
                .map(|x| {
                    if set.contains(x) {
                        ExtValue::one()
                    } else {
                        ExtValue::zero()
                    }
                })
                .collect());
        }
        Err(field_err(
            "function.indicator_set",
            "finite systems take `indicator`",
        ))
    }

    pub fn sampled(&self, ss: &SampledSystem) -> Result<SampledFunction> {
        self.check_one()?;
        if let Some(c) = &self.constant {
            let v = c.ext_value("function.constant")?;
            let value = match v.finite() {
                Some(r) => r.to_f64().unwrap_or(f64::NAN),
                None => f64::INFINITY,
            };
            return Ok(SampledFunction::Constant(value));
        }
        if let Some(set) = &self.indicator_set {
            let set = set.sampled("function.indicator_set")?;
            return Ok(SampledFunction::Indicator(bind_sampled_set(
                set,
                ss,
                "function.indicator_set",
            )?));
        }
        Err(field_err(
            "function",
            "sampled systems take `constant` or `indicator_set`",
        ))
    }
}

/// An integrand on a sampled system.
#[derive(Clone, Debug)]
pub enum SampledFunction {
    Constant(f64),
    Indicator(SampledSet),
}

impl SampledFunction {
    pub fn eval(&self, p: &crate::system::SampledPoint) -> f64 {
        use crate::system::Region;
        match self {
            SampledFunction::Constant(c) => *c,
            SampledFunction::Indicator(set) => f64::from(u8::from(set.contains(p))),
        }
    }

    /// Exact `integral f dmu`.
    pub fn integral(&self) -> f64 {
        match self {
            SampledFunction::Constant(c) => *c,
            SampledFunction::Indicator(set) => set.measure().to_f64().unwrap_or(f64::NAN),
        }
    }
}

pub(crate) fn table_element(
    group: &Group,
    coords: &[i64],
    field: &str,
) -> Result<Option<GroupElement>> {
    if coords.is_empty() {
        return Ok(None);
    }
    group
        .element(coords)
        .map(Some)
        .map_err(|e| field_err(field, e))
}
