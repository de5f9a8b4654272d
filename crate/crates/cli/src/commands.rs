use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mtransport_core::coupling::{run_experiment, ExperimentJson};
use mtransport_core::dyadic::{approx_report, FamilyAnalysis, TransportOptions};
use mtransport_core::io::{
    approx_csv, cauchy_csv, coupling_csv, to_json_pretty, FamilyJson, FamilySource, MeasureJson, MeasureSource,
    NumberText, PlanJson,
};
use mtransport_core::ot::analyze;
use mtransport_core::{exact, generate_family, sample_cloud, CostSpec, DistributionSpec, EdgeSet, Error, FamilySpec};

use crate::Options;

/// Why a command stopped, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid configuration (exit 2).
    Config(String),
    /// A valid configuration describing an instance the solvers reject (exit 3).
    Instance(String),
    /// A checked bound failed (exit 4).
    Assertion(String),
    /// Artifacts could not be written (exit 1).
    Output(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Output(_) => 1,
            Failure::Config(_) => 2,
            Failure::Instance(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config: {m}"),
            Failure::Instance(m) => write!(f, "instance: {m}"),
            Failure::Assertion(m) => write!(f, "check failed: {m}"),
            Failure::Output(m) => write!(f, "output: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BruteForce(_)
            | Error::MonotonePrecondition(_)
            | Error::PivotLimit(_)
            | Error::NonUniqueInstance(_)
            | Error::NonUniqueStep(_)
            | Error::CellOverflow(_)
            | Error::UncoveredAtom(_)
            | Error::NotAnAtom(_)
            | Error::LevelNotBuilt(_)
            | Error::InvalidPlan(_) => Failure::Instance(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

/// Parses the config file; relative paths inside it resolve against its
/// directory.
fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, &Path), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok((parsed, path.parent().unwrap_or(Path::new("."))))
}

fn write(out: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Output(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Output(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairConfig {
    mu: MeasureSource,
    nu: MeasureSource,
    p: f64,
}

pub fn solve(opts: &Options) -> Result<(), Failure> {
    let (cfg, base): (PairConfig, _) = read_config(&opts.config)?;
    let (mu, nu) = (cfg.mu.load(Some(base))?, cfg.nu.load(Some(base))?);
    let face = analyze(&mu, &nu, &CostSpec::new(cfg.p)?, opts.arithmetic)?;
    let plan = &face.plan;
    if opts.format.json() {
        write(&opts.out, "plan.json", &to_json_pretty(&PlanJson::from_plan(plan)))?;
    }
    if opts.format.csv() {
        let mut csv = String::from("i,j,mass\n");
        for e in plan.entries() {
            let _ = writeln!(csv, "{},{},{}", e.source, e.target, exact::format(&e.mass));
        }
        write(&opts.out, "plan.csv", &csv)?;
    }
    println!(
        "value={} unique={} map={}",
        exact::format(plan.value()),
        face.is_unique(),
        plan.target_indices().is_some()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct PsiArtifact<'a> {
    edges: &'a EdgeSet,
    unique: bool,
    /// Target index of each source atom when the optimum is a unique map.
    map: Option<Vec<usize>>,
}

pub fn psi(opts: &Options) -> Result<(), Failure> {
    let (cfg, base): (PairConfig, _) = read_config(&opts.config)?;
    let (mu, nu) = (cfg.mu.load(Some(base))?, cfg.nu.load(Some(base))?);
    let face = analyze(&mu, &nu, &CostSpec::new(cfg.p)?, opts.arithmetic)?;
    let unique = face.is_unique();
    if opts.format.json() {
        let artifact = PsiArtifact { edges: &face.support_union, unique, map: face.map_indices() };
        write(&opts.out, "psi.json", &to_json_pretty(&artifact))?;
    }
    if opts.format.csv() {
        let mut csv = String::from("i,j\n");
        for (i, j) in face.support_union.iter() {
            let _ = writeln!(csv, "{i},{j}");
        }
        write(&opts.out, "psi.csv", &csv)?;
    }
    println!("edges={} unique={unique}", face.support_union.len());
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DyadicConfig {
    family: FamilySource,
    #[serde(rename = "K")]
    max_level: u32,
}

pub fn dyadic(opts: &Options) -> Result<(), Failure> {
    let (cfg, base): (DyadicConfig, _) = read_config(&opts.config)?;
    let family = cfg.family.load(Some(base))?;
    let options = TransportOptions { arithmetic: opts.arithmetic, allow_nonunique: opts.allow_nonunique };
    let analysis = FamilyAnalysis::new(family, options)?;
    let report = approx_report(&analysis, cfg.max_level)?;
    if opts.format.json() {
        write(&opts.out, "dyadic.json", &to_json_pretty(&report))?;
    }
    if opts.format.csv() {
        write(&opts.out, "cauchy.csv", &cauchy_csv(&report))?;
        write(&opts.out, "approx.csv", &approx_csv(&report))?;
    }
    let nonincreasing = report.errors.iter().all(|e| e.nonincreasing);
    println!(
        "levels=0..{} bounds_hold={} error_nonincreasing={nonincreasing} nonunique={:?}",
        cfg.max_level,
        report.bounds_hold(),
        report.nonunique
    );
    if !report.bounds_hold() {
        return Err(Failure::Assertion("a pushforward, Cauchy or approximation bound was violated".into()));
    }
    Ok(())
}

pub fn couple(opts: &Options) -> Result<(), Failure> {
    let (cfg, base): (ExperimentJson, _) = read_config(&opts.config)?;
    let config = cfg.to_config(Some(base))?;
    let report = run_experiment(&config, opts.arithmetic)?;
    if opts.format.json() {
        write(&opts.out, "coupling.json", &to_json_pretty(&report))?;
    }
    if opts.format.csv() {
        write(&opts.out, "coupling.csv", &coupling_csv(&report))?;
    }
    println!(
        "lhs_sup={} lhs_terminal={} rhs={} bounds_hold={} literal_bound_held={} all_checks_pass={}",
        report.lhs_sup.mean,
        report.lhs_terminal.mean,
        report.rhs.mean,
        report.bounds_hold(),
        report.literal_bound_held,
        report.hard_pass()
    );
    if !report.bounds_hold() {
        return Err(Failure::Assertion("the terminal or Doob bound failed beyond 3 standard errors".into()));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum GenConfig {
    /// `n` equal-weight draws from `dist`.
    Measure { dist: DistributionSpec, n: usize, seed: u64 },
    /// A random family (see [`FamilySpec`]).
    Family {
        dist: DistributionSpec,
        params: usize,
        atoms: usize,
        #[serde(rename = "mE")]
        total_mass: NumberText,
        p: f64,
        seed: u64,
    },
}

pub fn gen(opts: &Options) -> Result<(), Failure> {
    let (cfg, _): (GenConfig, _) = read_config(&opts.config)?;
    match cfg {
        GenConfig::Measure { dist, n, seed } => {
            let m = sample_cloud(&dist, n, seed)?;
            write(&opts.out, "measure.json", &to_json_pretty(&MeasureJson::from_measure(&m)))?;
            println!("atoms={}", m.len());
        }
        GenConfig::Family { dist, params, atoms, total_mass, p, seed } => {
            let spec = FamilySpec { params, atoms, dist, total_mass: total_mass.to_rational()?, cost_exponent: p, seed };
            let family = generate_family(&spec)?;
            write(&opts.out, "family.json", &to_json_pretty(&FamilyJson::from_family(&family)))?;
            println!("params={} mE={}", family.params().len(), exact::format(&family.total_mass()));
        }
    }
    Ok(())
}
