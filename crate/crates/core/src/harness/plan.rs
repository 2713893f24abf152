use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::HarnessError;
use crate::detect::SbdConfig;
use crate::io::formulas::{
    grover_marked_spec, grover_spec, grover_step_spec, marked_phase_spec, phase_flip_spec, phase_oracle_spec,
    purity_spec, qft_spec, qpe_spec, reverse_spec, swap_spec,
};
use crate::io::{IOMark, ProgramSpec, VarKind};
use crate::mutate::{MutationConfig, MutationType};
use crate::partition::{
    CaseRule, Criterion, Double, DoubleKind, PartitionSpec, QuantumClass, SampleConfig, ScaleBucket, Strategy,
    ThetaRule,
};
use crate::program::Program;

/// First line of every plan file.
pub const PLAN_HEADER: &str = "qprobe-plan v1";

/// Unbounded buckets without an explicit representative use this value
/// (or their lower bound, if larger).
pub const DEFAULT_REPRESENTATIVE: i64 = 6;

/// Where the program under test comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProgramSource {
    Benchmark(String),
    /// Source files, resolved against the plan's directory.
    Files(Vec<PathBuf>),
}

/// How one variable is partitioned, before doubles are resolved against
/// the program.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionEntry {
    Buckets(Vec<ScaleBucket>),
    Criterion {
        criterion: Criterion,
        size: Option<String>,
    },
    Classes(Vec<QuantumClass>),
    /// Double names as written (`phase-oracle`, `fixed:Sub`, ...) and the
    /// size variable.
    Doubles {
        names: Vec<String>,
        size: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MutationPlan {
    pub subroutines: Vec<String>,
    pub config: MutationConfig,
}

/// A unit test plan for one subroutine.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPlan {
    pub source: ProgramSource,
    pub target: String,
    pub mark: IOMark,
    /// `builtin`, `identity`, `reference:<Sub>` or a named formula.
    pub spec: String,
    pub partitions: Vec<(String, PartitionEntry)>,
    pub strategy: Strategy,
    pub base: Option<Vec<usize>>,
    pub sample: SampleConfig,
    pub seed: u64,
    pub sbd: SbdConfig,
    pub qra_repeats: usize,
    pub mutation: Option<MutationPlan>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    plan: RawHeader,
    #[serde(default)]
    partition: BTreeMap<String, RawPartition>,
    detect: Option<RawDetect>,
    mutation: Option<RawMutation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeader {
    benchmark: Option<String>,
    program: Option<Vec<String>>,
    target: String,
    mark: String,
    spec: Option<String>,
    strategy: Option<String>,
    base: Option<Vec<usize>>,
    seed: Option<u64>,
    cases: Option<toml::Value>,
    scale: Option<String>,
    theta: Option<toml::Value>,
    qra_repeats: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    buckets: Option<Vec<String>>,
    criterion: Option<String>,
    classes: Option<Vec<String>>,
    doubles: Option<Vec<String>>,
    size: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetect {
    sbd_repetitions: Option<usize>,
    sbd_tolerance: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMutation {
    subroutines: Vec<String>,
    types: Option<Vec<String>>,
    caps: Option<BTreeMap<String, usize>>,
    seed: Option<u64>,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Plan(msg.into())
}

/// Parses a bucket: `4`, `2..5`, `2..5:3`, `>=3` or `>=3:6`.
pub fn parse_bucket(text: &str) -> Result<ScaleBucket, HarnessError> {
    let int = |s: &str| s.trim().parse::<i64>().map_err(|_| bad(format!("bad bucket `{text}`")));
    let (range, rep) = match text.split_once(':') {
        Some((r, rep)) => (r.trim(), Some(int(rep)?)),
        None => (text.trim(), None),
    };
    let outside = || bad(format!("bucket `{text}` has a representative outside it"));
    let bucket = if let Some(lo) = range.strip_prefix(">=") {
        let lo = int(lo)?;
        let rep = rep.unwrap_or(DEFAULT_REPRESENTATIVE.max(lo));
        if rep < lo {
            return Err(outside());
        }
        ScaleBucket::at_least(lo, rep)
    } else if let Some((lo, hi)) = range.split_once("..") {
        let (lo, hi) = (int(lo)?, int(hi)?);
        if hi < lo {
            return Err(bad(format!("bucket `{text}` is empty")));
        }
        let rep = rep.unwrap_or(lo);
        if !(lo..=hi).contains(&rep) {
            return Err(outside());
        }
        ScaleBucket { lo, hi: Some(hi), rep }
    } else {
        let v = int(range)?;
        if rep.is_some_and(|r| r != v) {
            return Err(outside());
        }
        ScaleBucket::exactly(v)
    };
    Ok(bucket)
}

fn parse_criterion(s: &str) -> Result<Criterion, HarnessError> {
    match s {
        "CSP" => Ok(Criterion::Csp),
        "CSMP" => Ok(Criterion::Csmp),
        _ => Err(bad(format!("unknown criterion `{s}` (expected CSP or CSMP)"))),
    }
}

impl TestPlan {
    /// Parses plan text. Relative program paths are kept as written; see
    /// [`TestPlan::load`] for file-relative resolution.
    pub fn parse(text: &str) -> Result<TestPlan, HarnessError> {
        let mut lines = text.lines();
        let header = lines.by_ref().map(str::trim).find(|l| !l.is_empty()).unwrap_or_default();
        if header != PLAN_HEADER {
            return Err(bad(format!("plan must start with `{PLAN_HEADER}`, found `{header}`")));
        }
        let body: String = lines.collect::<Vec<_>>().join("\n");
        let raw: RawPlan = toml::from_str(&body).map_err(|e| bad(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Reads a plan file, resolving program paths against its directory.
    pub fn load(path: &Path) -> Result<TestPlan, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let mut plan = Self::parse(&text)?;
        if let ProgramSource::Files(files) = &mut plan.source {
            let dir = path.parent().unwrap_or(Path::new("."));
            for f in files.iter_mut().filter(|f| f.is_relative()) {
                *f = dir.join(&*f);
            }
        }
        Ok(plan)
    }

    fn from_raw(raw: RawPlan) -> Result<TestPlan, HarnessError> {
        let h = raw.plan;
        let source = match (h.benchmark, h.program) {
            (Some(b), None) => ProgramSource::Benchmark(b),
            (None, Some(files)) if !files.is_empty() => {
                ProgramSource::Files(files.into_iter().map(PathBuf::from).collect())
            }
            _ => return Err(bad("[plan] needs exactly one of `benchmark` or `program`")),
        };
        let mark = IOMark::parse(&h.mark)?;
        if mark.subroutine != h.target {
            return Err(bad(format!("mark is for `{}` but the target is `{}`", mark.subroutine, h.target)));
        }
        let strategy: Strategy = h.strategy.as_deref().unwrap_or("ACoC").parse().map_err(bad)?;
        let cases = match h.cases {
            None => CaseRule::TwoNSquared(h.scale.clone()),
            Some(toml::Value::String(s)) if s == "2n^2" => CaseRule::TwoNSquared(h.scale.clone()),
            Some(toml::Value::Integer(k)) if k >= 1 => CaseRule::Fixed(k as usize),
            Some(other) => return Err(bad(format!("`cases` must be \"2n^2\" or a positive integer, got {other}"))),
        };
        let theta = match h.theta {
            None => ThetaRule::Fixed(0.0),
            Some(toml::Value::Float(t)) => ThetaRule::Fixed(t),
            Some(toml::Value::Integer(t)) => ThetaRule::Fixed(t as f64),
            Some(toml::Value::String(s)) if s == "random" => ThetaRule::Random,
            Some(other) => return Err(bad(format!("`theta` must be a number or \"random\", got {other}"))),
        };

        if let Some(unknown) = raw.partition.keys().find(|k| mark.input(k).is_none()) {
            return Err(bad(format!("[partition.{unknown}] names no input of `{}`", mark.subroutine)));
        }
        let mut partitions = Vec::new();
        for var in &mark.inputs {
            let p = raw
                .partition
                .get(&var.name)
                .ok_or_else(|| bad(format!("no [partition.{}] for input `{}`", var.name, var.name)))?;
            partitions.push((var.name.clone(), Self::partition_entry(&var.name, p)?));
        }

        let detect = raw.detect.unwrap_or(RawDetect { sbd_repetitions: None, sbd_tolerance: None });
        let d = SbdConfig::default();
        let sbd = SbdConfig::new(
            detect.sbd_tolerance.unwrap_or(d.tolerance),
            detect.sbd_repetitions.unwrap_or(d.repetitions),
        )
        .map_err(bad)?;
        let seed = h.seed.unwrap_or(42);
        let mutation = raw.mutation.map(|m| Self::mutation(m, seed)).transpose()?;
        let qra_repeats = h.qra_repeats.unwrap_or(1);
        if qra_repeats == 0 {
            return Err(bad("qra_repeats must be at least 1"));
        }
        Ok(TestPlan {
            source,
            target: h.target,
            mark,
            spec: h.spec.unwrap_or_else(|| "builtin".into()),
            partitions,
            strategy,
            base: h.base,
            sample: SampleConfig { cases, theta },
            seed,
            sbd,
            qra_repeats,
            mutation,
        })
    }

    fn partition_entry(var: &str, p: &RawPartition) -> Result<PartitionEntry, HarnessError> {
        let given = [p.buckets.is_some(), p.criterion.is_some(), p.classes.is_some(), p.doubles.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(bad(format!("[partition.{var}] needs exactly one of buckets, criterion, classes, doubles")));
        }
        if let Some(bs) = &p.buckets {
            return Ok(PartitionEntry::Buckets(bs.iter().map(|b| parse_bucket(b)).collect::<Result<_, _>>()?));
        }
        if let Some(c) = &p.criterion {
            return Ok(PartitionEntry::Criterion { criterion: parse_criterion(c)?, size: p.size.clone() });
        }
        if let Some(cs) = &p.classes {
            let classes = cs
                .iter()
                .map(|c| QuantumClass::from_label(c).ok_or_else(|| bad(format!("unknown class `{c}` for `{var}`"))))
                .collect::<Result<_, _>>()?;
            return Ok(PartitionEntry::Classes(classes));
        }
        let names = p.doubles.clone().unwrap_or_default();
        Ok(PartitionEntry::Doubles { names, size: p.size.clone() })
    }

    fn mutation(m: RawMutation, plan_seed: u64) -> Result<MutationPlan, HarnessError> {
        let types = match m.types {
            Some(ts) => ts.iter().map(|t| t.parse::<MutationType>().map_err(bad)).collect::<Result<_, _>>()?,
            None => MutationType::ALL.to_vec(),
        };
        let caps = match m.caps {
            Some(cs) => cs
                .into_iter()
                .map(|(t, c)| Ok((t.parse::<MutationType>().map_err(bad)?, c)))
                .collect::<Result<_, HarnessError>>()?,
            None => MutationConfig::default().caps,
        };
        if m.subroutines.is_empty() {
            return Err(bad("[mutation] needs at least one subroutine"));
        }
        Ok(MutationPlan {
            subroutines: m.subroutines,
            config: MutationConfig { types, caps, seed: m.seed.unwrap_or(plan_seed) },
        })
    }

    /// Partition specs with doubles resolved against `program`.
    pub fn partition_specs(&self, program: &Program) -> Result<Vec<(String, PartitionSpec)>, HarnessError> {
        self.partitions
            .iter()
            .map(|(var, entry)| {
                let spec = match entry {
                    PartitionEntry::Buckets(bs) => PartitionSpec::Buckets(bs.clone()),
                    PartitionEntry::Criterion { criterion, size } => {
                        PartitionSpec::Criterion { criterion: *criterion, size: size.clone() }
                    }
                    PartitionEntry::Classes(cs) => PartitionSpec::Classes(cs.clone()),
                    PartitionEntry::Doubles { names, size } => {
                        let doubles = names
                            .iter()
                            .map(|n| Ok((n.clone(), resolve_double(n, size.as_deref(), program)?)))
                            .collect::<Result<_, HarnessError>>()?;
                        PartitionSpec::Doubles(doubles)
                    }
                };
                Ok((var.clone(), spec))
            })
            .collect()
    }

    /// Checks that the plan fits `program` without simulating anything.
    pub fn validate_against(&self, program: &Program) -> Result<(), HarnessError> {
        let sub = program.subroutine(&self.target)?;
        self.mark.check_against(sub)?;
        for (var, entry) in &self.partitions {
            let kind = self.mark.input(var).map(|v| v.kind);
            let fits = matches!(
                (kind, entry),
                (Some(VarKind::Classical), PartitionEntry::Buckets(_))
                    | (Some(VarKind::Quantum), PartitionEntry::Criterion { .. } | PartitionEntry::Classes(_))
                    | (Some(VarKind::Subroutine), PartitionEntry::Criterion { .. } | PartitionEntry::Doubles { .. })
            );
            if !fits {
                return Err(bad(format!("partition of `{var}` does not fit its kind")));
            }
        }
        if let Some(m) = &self.mutation {
            for s in &m.subroutines {
                program.subroutine(s)?;
            }
        }
        Ok(())
    }
}

fn resolve_double(name: &str, size: Option<&str>, program: &Program) -> Result<Double, HarnessError> {
    if let Some(sub) = name.strip_prefix("fixed:") {
        return Ok(Double::new(DoubleKind::Fixed(program.subroutine(sub)?.clone()), size.unwrap_or("")));
    }
    let size = size.ok_or_else(|| bad(format!("double `{name}` needs a `size` variable")))?;
    let kind = match name {
        "pure-C" => DoubleKind::PureClassical,
        "pure-S" => DoubleKind::PureSuperposition,
        "mixed" => DoubleKind::MixedPair,
        "phase-oracle" => DoubleKind::PhaseOracle,
        _ => match name.strip_prefix("phase-power:") {
            Some(bits) => DoubleKind::PhasePower { bits: bits.to_string() },
            None => return Err(bad(format!("unknown double `{name}`"))),
        },
    };
    Ok(Double::new(kind, size))
}

fn parse_list(args: &str) -> Result<Vec<u64>, HarnessError> {
    args.split(',').map(|a| a.trim().parse::<u64>().map_err(|_| bad(format!("bad value list `{args}`")))).collect()
}

/// Resolves a named spec. `builtin` is handled by the caller.
pub fn named_spec(name: &str, program: &Program, target: &str) -> Result<ProgramSpec, HarnessError> {
    let (head, rest) = name.split_once(':').unwrap_or((name, ""));
    let args: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let want = |k: usize| {
        if args.len() == k {
            Ok(())
        } else {
            Err(bad(format!("spec `{head}` takes {k} argument(s), got `{name}`")))
        }
    };
    let spec = match head {
        "identity" => want(0).map(|_| ProgramSpec::Identity)?,
        "qft" => want(0).map(|_| qft_spec())?,
        "reverse" => want(0).map(|_| reverse_spec())?,
        "swap" => want(0).map(|_| swap_spec())?,
        "phase-flip" => want(0).map(|_| phase_flip_spec())?,
        "grover" => want(1).map(|_| grover_spec(args[0]))?,
        "grover-step" => want(1).map(|_| grover_step_spec(args[0]))?,
        "phase-oracle" => want(1).map(|_| phase_oracle_spec(args[0]))?,
        "marks" => want(1).and_then(|_| parse_list(args[0])).map(marked_phase_spec)?,
        "grover-marks" => want(1).and_then(|_| parse_list(args[0])).map(grover_marked_spec)?,
        "qpe" => want(2).map(|_| qpe_spec(args[0], args[1]))?,
        "purity" => want(3).map(|_| purity_spec(args[0], args[1], args[2]))?,
        "reference" => {
            want(1)?;
            let mut reference = program.subroutine(args[0])?.clone();
            let base = program.subroutine(target)?;
            if reference.params != base.params {
                return Err(bad(format!("reference `{}` does not match the signature of `{target}`", args[0])));
            }
            reference.name = target.to_string();
            let mut trusted = program.clone();
            trusted.insert_subroutine(reference);
            ProgramSpec::ReferenceProgram(trusted)
        }
        _ => return Err(bad(format!("unknown spec `{name}`"))),
    };
    Ok(spec)
}
