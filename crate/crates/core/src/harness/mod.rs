//! Test plans, the shipped benchmarks, the suite runner, integration
//! testing and reports.

mod benchmarks;
mod integration;
mod plan;
mod report;
mod suite;

pub use benchmarks::{
    benchmark, builtin_benchmarks, builtin_integrations, integration, BenchmarkEntry, IntegrationEntry,
};
pub use integration::{integration_path, run_integration, IntegrationOptions, IntegrationOutcome, LevelResult};
pub use plan::{
    named_spec, parse_bucket, MutationPlan, PartitionEntry, ProgramSource, TestPlan, DEFAULT_REPRESENTATIVE,
    PLAN_HEADER,
};
pub use report::{emit_report, rate, Format, Report};
pub use suite::{FrameResult, Suite, SuiteConfig, SuiteResults};

use crate::io::{MarkError, ProgramSpec, SpecError};
use crate::mutate::{
    classify_survivors, enumerate_mutants_with, run_mutation_analysis, AnalysisError, Mutant, MutationReport,
    SurvivorReport,
};
use crate::partition::{combine, partition_variable, EquivalenceClass, PartitionError};
use crate::program::{parse_sources, Program, ProgramError};

/// Largest size used when comparing survivors with the base program.
pub const COMPARE_N_MAX: usize = 5;

/// Harness failures, tagged by the stage that raised them.
#[derive(Debug, Clone, thiserror::Error)]
pub enum HarnessError {
    #[error("plan: {0}")]
    Plan(String),
    #[error("partition: {0}")]
    Partition(#[from] PartitionError),
    #[error("spec: {0}")]
    Spec(#[from] SpecError),
    #[error("program: {0}")]
    Program(#[from] ProgramError),
    #[error("mark: {0}")]
    Mark(#[from] MarkError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("io: {0}")]
    Io(String),
}

/// The program a plan names, with its entry set to the plan's target.
pub fn load_program(plan: &TestPlan) -> Result<Program, HarnessError> {
    let program = match &plan.source {
        ProgramSource::Benchmark(name) => {
            if let Some(b) = benchmark(name) {
                b.program()?
            } else if let Some(i) = integration(name) {
                i.program()?
            } else {
                return Err(HarnessError::Plan(format!("unknown benchmark `{name}`")));
            }
        }
        ProgramSource::Files(files) => {
            let texts = files
                .iter()
                .map(|f| std::fs::read_to_string(f).map_err(|e| HarnessError::Io(format!("{}: {e}", f.display()))))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            parse_sources(&refs)?
        }
    };
    Ok(program.with_entry(&plan.target)?)
}

/// The spec a plan asks for. `builtin` takes the spec of the plan's
/// benchmark.
pub fn resolve_spec(plan: &TestPlan, program: &Program) -> Result<ProgramSpec, HarnessError> {
    if plan.spec == "builtin" {
        return match &plan.source {
            ProgramSource::Benchmark(name) => benchmark(name)
                .map(|b| b.spec())
                .ok_or_else(|| HarnessError::Plan(format!("`{name}` has no builtin spec; name one in the plan"))),
            ProgramSource::Files(_) => Err(HarnessError::Plan("plans over program files must name a spec".into())),
        };
    }
    named_spec(&plan.spec, program, &plan.target)
}

/// Partitions, combines, samples and plans detection for every case.
pub fn build_suite(plan: &TestPlan, program: &Program) -> Result<Suite, HarnessError> {
    plan.validate_against(program)?;
    let spec = resolve_spec(plan, program)?;
    let specs = plan.partition_specs(program)?;
    let classes: Vec<Vec<EquivalenceClass>> = plan
        .mark
        .inputs
        .iter()
        .zip(&specs)
        .map(|(var, (_, spec))| partition_variable(var, spec, true))
        .collect::<Result<_, _>>()?;
    let frames = if classes.is_empty() { Vec::new() } else { combine(&classes, plan.strategy, plan.base.as_deref())? };
    let config = SuiteConfig { sbd: plan.sbd, qra_repeats: plan.qra_repeats, seed: plan.seed };
    Suite::build(&plan.target, program, &plan.mark, spec, frames, &plan.sample, config)
}

/// Runs a unit plan against `program`.
pub fn run_plan(plan: &TestPlan, program: &Program, jobs: usize) -> Result<SuiteResults, HarnessError> {
    build_suite(plan, program)?.run(program, jobs)
}

/// Everything a mutation run produces.
pub struct MutationOutcome {
    pub report: MutationReport,
    pub survivors: Vec<SurvivorReport>,
    pub mutants: Vec<Mutant>,
}

impl MutationOutcome {
    /// Survivors not shown equivalent to the base program.
    pub fn non_equivalent_survivors(&self) -> usize {
        self.survivors.iter().filter(|s| s.class != crate::mutate::SurvivorClass::Equivalent).count()
    }
}

/// Mutants for the plan's `[mutation]` block. Mutants that crash on the
/// first case of every frame are dropped as stillborn.
pub fn plan_mutants(plan: &TestPlan, program: &Program, suite: &Suite) -> Result<Vec<Mutant>, HarnessError> {
    let m = plan.mutation.as_ref().ok_or_else(|| HarnessError::Plan("plan has no [mutation] block".into()))?;
    let mut out = Vec::new();
    for sub in &m.subroutines {
        out.extend(enumerate_mutants_with(program, sub, &m.config, |p| suite.dry_run(p))?);
    }
    Ok(out)
}

/// Builds the suite, generates mutants, runs them and classifies the
/// survivors.
pub fn run_mutation(plan: &TestPlan, program: &Program, jobs: usize) -> Result<MutationOutcome, HarnessError> {
    let suite = build_suite(plan, program)?;
    let mutants = plan_mutants(plan, program, &suite)?;
    let mut report = run_mutation_analysis(&suite, program, &mutants, jobs)?;
    report.program = match &plan.source {
        ProgramSource::Benchmark(name) if benchmark(name).is_some() => name.clone(),
        _ => plan.target.clone(),
    };
    let survivors = classify_survivors(&report, program, &mutants, &suite, COMPARE_N_MAX);
    Ok(MutationOutcome { report, survivors, mutants })
}

#[cfg(test)]
mod tests;
