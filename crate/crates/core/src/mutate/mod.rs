//! Mutation testing: single-site faults of four types (gates, subroutine
//! calls, classical values, measurements), analysis of which faults a
//! suite catches, and brute-force checks on the survivors.

mod analysis;
mod ops;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub use analysis::{
    classify_survivors, run_mutation_analysis, AnalysisError, MutantResult, MutationReport, SurvivorClass,
    SurvivorReport, TestSuite,
};

use crate::program::{Program, ProgramError, StmtPath};
use crate::sim::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MutationType {
    Gm,
    Sm,
    Cm,
    Mm,
}

impl MutationType {
    pub const ALL: [MutationType; 4] = [MutationType::Gm, MutationType::Sm, MutationType::Cm, MutationType::Mm];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for MutationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutationType::Gm => "GM",
            MutationType::Sm => "SM",
            MutationType::Cm => "CM",
            MutationType::Mm => "MM",
        })
    }
}

impl FromStr for MutationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "GM" => Ok(MutationType::Gm),
            "SM" => Ok(MutationType::Sm),
            "CM" => Ok(MutationType::Cm),
            "MM" => Ok(MutationType::Mm),
            _ => Err(format!("unknown mutation type `{s}`")),
        }
    }
}

/// Where and how a mutant differs from its base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationDescriptor {
    pub mtype: MutationType,
    /// Edit kind, e.g. `delete-gate` or `loop-bound`.
    pub operation: String,
    pub sub: String,
    pub path: StmtPath,
    /// Human-readable payload of the edit.
    pub detail: String,
}

impl fmt::Display for MutationDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} in {} at {}: {}", self.mtype, self.operation, self.sub, self.path, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct Mutant {
    /// Stable id like `QFT:GM-03`.
    pub id: String,
    pub descriptor: MutationDescriptor,
    pub mutated: Program,
}

/// Which mutation types to generate and how many of each to keep.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationConfig {
    pub types: Vec<MutationType>,
    /// Per-type cap for each mutated subroutine; missing types are uncapped.
    pub caps: BTreeMap<MutationType, usize>,
    pub seed: u64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            types: MutationType::ALL.to_vec(),
            caps: MutationType::ALL.iter().map(|&t| (t, 6)).collect(),
            seed: 42,
        }
    }
}

/// All statically valid mutants of `sub`, capped per type by seeded
/// sampling. Equivalent to [`enumerate_mutants_with`] accepting everything.
pub fn enumerate_mutants(program: &Program, sub: &str, config: &MutationConfig) -> Result<Vec<Mutant>, ProgramError> {
    enumerate_mutants_with(program, sub, config, |_| true)
}

/// Like [`enumerate_mutants`], with `viable` as an extra gate (for
/// example a dry run) applied before a mutant counts against its cap.
pub fn enumerate_mutants_with<F>(
    program: &Program,
    sub: &str,
    config: &MutationConfig,
    viable: F,
) -> Result<Vec<Mutant>, ProgramError>
where
    F: Fn(&Program) -> bool,
{
    let base = program.subroutine(sub)?;
    let base_text = base.to_string();
    let candidates = ops::Generator::new(program, base).run(&config.types);

    let mut by_type: BTreeMap<MutationType, Vec<ops::Candidate>> = BTreeMap::new();
    for c in candidates {
        by_type.entry(c.mtype).or_default().push(c);
    }
    let root = RandomStream::new(config.seed).derive_named(sub);
    let mut out = Vec::new();
    for (mtype, mut list) in by_type {
        let mut rng = root.derive(mtype.index() as u64);
        rng.shuffle(&mut list);
        let cap = config.caps.get(&mtype).copied().unwrap_or(usize::MAX);
        let mut seen = BTreeSet::new();
        let mut kept = 0;
        for c in list {
            if kept == cap {
                break;
            }
            let text = c.sub.to_string() + &c.extra.as_ref().map(ToString::to_string).unwrap_or_default();
            if text == base_text || !seen.insert(text) {
                continue;
            }
            let mut mutated = program.clone();
            if let Some(extra) = &c.extra {
                mutated.insert_subroutine(extra.clone());
            }
            mutated.insert_subroutine(c.sub.clone());
            if mutated.validate().is_err() || !viable(&mutated) {
                continue;
            }
            out.push(Mutant {
                id: format!("{sub}:{mtype}-{kept:02}"),
                descriptor: MutationDescriptor {
                    mtype,
                    operation: c.operation.to_string(),
                    sub: sub.to_string(),
                    path: c.path,
                    detail: c.detail,
                },
                mutated,
            });
            kept += 1;
        }
    }
    Ok(out)
}
