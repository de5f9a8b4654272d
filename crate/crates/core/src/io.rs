//! JSON and CSV formats.
//!
//! Measure: `{"dim": d, "atoms": [{"x": [..], "w": w}, ..]}` where `w` is
//! written as an exact decimal or `"p/q"` string and read from either a
//! string or a JSON number.
//!
//! Family: `{"mE": total, "params": [{"lambda": id, "m": mass, "mu": measure,
//! "nu": measure}], "p": exponent}`.
//!
//! Plan: `{"value": v, "entries": [{"i": i, "j": j, "m": m}, ..]}` plus the
//! exact value and the arithmetic used.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize, Serializer};

use crate::coupling::CouplingReport;
use crate::dyadic::ApproxReport;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::measure::{DiscreteMeasure, Param, ParamFamily, Point};
use crate::ot::{Arithmetic, EdgeSet, TransportPlan};

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&exact::format(r))
}

/// A number given either as a JSON number or as an exact string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberText {
    Number(f64),
    Text(String),
}

impl NumberText {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            NumberText::Number(x) => exact::from_f64(*x),
            NumberText::Text(s) => exact::parse(s),
        }
    }

    pub fn exact(r: &Rational) -> Self {
        NumberText::Text(exact::format(r))
    }
}

/// Parameter label given as a string or an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl Label {
    fn into_string(self) -> String {
        match self {
            Label::Int(i) => i.to_string(),
            Label::Text(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub x: Vec<f64>,
    pub w: NumberText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    pub dim: usize,
    pub atoms: Vec<AtomJson>,
}

impl MeasureJson {
    pub fn from_measure(m: &DiscreteMeasure) -> Self {
        MeasureJson {
            dim: m.dim(),
            atoms: m
                .atoms()
                .iter()
                .map(|a| AtomJson { x: a.point.coords().to_vec(), w: NumberText::exact(&a.weight) })
                .collect(),
        }
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        let mut points = Vec::with_capacity(self.atoms.len());
        let mut weights = Vec::with_capacity(self.atoms.len());
        for (index, a) in self.atoms.iter().enumerate() {
            if a.x.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: a.x.len() });
            }
            points.push(Point::new(a.x.clone())?);
            let w = a.w.to_rational()?;
            if w < Rational::zero() {
                return Err(Error::InvalidWeight { index, value: exact::to_f64(&w) });
            }
            weights.push(w);
        }
        DiscreteMeasure::from_exact(points, weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamJson {
    pub lambda: Label,
    pub m: NumberText,
    pub mu: MeasureJson,
    pub nu: MeasureJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    #[serde(rename = "mE")]
    pub m_e: NumberText,
    pub params: Vec<ParamJson>,
    pub p: f64,
}

impl FamilyJson {
    pub fn from_family(f: &ParamFamily) -> Self {
        FamilyJson {
            m_e: NumberText::exact(&f.total_mass()),
            params: f
                .params()
                .iter()
                .map(|p| ParamJson {
                    lambda: Label::Text(p.label.clone()),
                    m: NumberText::exact(&p.mass),
                    mu: MeasureJson::from_measure(&p.source),
                    nu: MeasureJson::from_measure(&p.target),
                })
                .collect(),
            p: f.cost_exponent(),
        }
    }

    /// Validates and converts; the recorded `mE` must match the masses
    /// (exactly for string masses, to 1e-12 relative otherwise).
    pub fn to_family(&self) -> Result<ParamFamily> {
        let params = self
            .params
            .iter()
            .map(|p| {
                Ok(Param {
                    label: p.lambda.clone().into_string(),
                    mass: p.m.to_rational()?,
                    source: p.mu.to_measure()?,
                    target: p.nu.to_measure()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let family = ParamFamily::new(params, self.p)?;
        let recorded = self.m_e.to_rational()?;
        let total = family.total_mass();
        let all_text = matches!(self.m_e, NumberText::Text(_)) && self.params.iter().all(|p| matches!(p.m, NumberText::Text(_)));
        let ok = if all_text {
            recorded == total
        } else {
            let (a, b) = (exact::to_f64(&recorded), exact::to_f64(&total));
            (a - b).abs() <= 1e-12 * b.abs().max(1.0)
        };
        if !ok {
            return Err(Error::InvalidFamily(format!(
                "mE is {} but masses sum to {}",
                exact::format(&recorded),
                exact::format(&total)
            )));
        }
        Ok(family)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntryJson {
    pub i: usize,
    pub j: usize,
    pub m: NumberText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanJson {
    pub value: f64,
    pub value_exact: String,
    pub arithmetic: Arithmetic,
    pub entries: Vec<PlanEntryJson>,
}

impl PlanJson {
    pub fn from_plan(plan: &TransportPlan) -> Self {
        let mass = |m: &Rational| match plan.arithmetic() {
            Arithmetic::Rational => NumberText::exact(m),
            Arithmetic::Float => NumberText::Number(exact::to_f64(m)),
        };
        PlanJson {
            value: plan.value_f64(),
            value_exact: exact::format(plan.value()),
            arithmetic: plan.arithmetic(),
            entries: plan.entries().iter().map(|e| PlanEntryJson { i: e.source, j: e.target, m: mass(&e.mass) }).collect(),
        }
    }
}

fn read_relative(path: &str, base: Option<&Path>) -> Result<String> {
    let path = match base {
        Some(dir) => dir.join(path),
        None => Path::new(path).to_path_buf(),
    };
    std::fs::read_to_string(&path).map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))
}

/// A measure given inline or as a path to a measure file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSource {
    Inline(MeasureJson),
    File(String),
}

impl MeasureSource {
    /// Relative paths resolve against `base` when given.
    pub fn load(&self, base: Option<&Path>) -> Result<DiscreteMeasure> {
        match self {
            MeasureSource::Inline(m) => m.to_measure(),
            MeasureSource::File(p) => measure_from_str(&read_relative(p, base)?),
        }
    }
}

/// A family given inline or as a path to a family file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySource {
    Inline(FamilyJson),
    File(String),
}

impl FamilySource {
    pub fn load(&self, base: Option<&Path>) -> Result<ParamFamily> {
        match self {
            FamilySource::Inline(f) => f.to_family(),
            FamilySource::File(p) => family_from_str(&read_relative(p, base)?),
        }
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn measure_to_string(m: &DiscreteMeasure) -> String {
    to_json_pretty(&MeasureJson::from_measure(m))
}

pub fn measure_from_str(s: &str) -> Result<DiscreteMeasure> {
    let parsed: MeasureJson = serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    parsed.to_measure()
}

pub fn family_from_str(s: &str) -> Result<ParamFamily> {
    let parsed: FamilyJson = serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    parsed.to_family()
}

pub fn edges_to_string(edges: &EdgeSet) -> String {
    to_json_pretty(edges)
}

/// Columns `k,k2,gap,bound,pass`.
pub fn cauchy_csv(report: &ApproxReport) -> String {
    let mut out = String::from("k,k2,gap,bound,pass\n");
    for g in &report.gaps {
        let _ = writeln!(out, "{},{},{},{},{}", g.k, g.k2, g.gap, g.bound, g.pass);
    }
    out
}

/// Columns `k,error,bound,pass,nonincreasing`.
pub fn approx_csv(report: &ApproxReport) -> String {
    let mut out = String::from("k,error,bound,pass,nonincreasing\n");
    for e in &report.errors {
        let _ = writeln!(out, "{},{},{},{},{}", e.k, e.error, e.bound, e.pass, e.nonincreasing);
    }
    out
}

/// Columns `quantity,estimate,stderr,bound,pass`; empty cells where a
/// column does not apply.
pub fn coupling_csv(report: &CouplingReport) -> String {
    let mut out = String::from("quantity,estimate,stderr,bound,pass\n");
    for row in report.rows() {
        let bound = row.bound.map(|b| b.to_string()).unwrap_or_default();
        let pass = row.pass.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", row.quantity, row.estimate, row.stderr, bound, pass);
    }
    out
}
