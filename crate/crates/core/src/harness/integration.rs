use std::collections::BTreeMap;

use super::plan::TestPlan;
use super::suite::SuiteResults;
use super::{run_plan, HarnessError};
use crate::program::{Program, SubroutineDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegrationOptions {
    /// Keep going after a level with failing cases.
    pub continue_on_failure: bool,
    pub jobs: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions { continue_on_failure: false, jobs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub sub: String,
    pub results: SuiteResults,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOutcome {
    /// Subroutines on the integration path, callees first.
    pub order: Vec<String>,
    pub levels: Vec<LevelResult>,
    /// The first level with a non-passing case, if the run stopped there.
    pub stopped_at: Option<String>,
}

impl IntegrationOutcome {
    pub fn all_pass(&self) -> bool {
        self.stopped_at.is_none() && self.levels.iter().all(|l| l.results.all_pass())
    }
}

/// Subroutines reachable from the entry, callees first, leaving out oracle
/// slots and anything replaced by a double.
pub fn integration_path(
    program: &Program,
    doubles: &BTreeMap<String, SubroutineDef>,
) -> Result<Vec<String>, HarnessError> {
    let reachable = program.dependency_graph().reachable(program.entry());
    Ok(program
        .integration_order()?
        .into_iter()
        .filter(|s| reachable.contains(s) && program.has_subroutine(s) && !doubles.contains_key(s))
        .collect())
}

/// Runs one unit plan per subroutine in bottom-up order. Each level runs
/// on the program with every real subroutine below it already in place,
/// so the entry's level tests the fully integrated program.
pub fn run_integration(
    program: &Program,
    plans: &[TestPlan],
    doubles: &BTreeMap<String, SubroutineDef>,
    options: IntegrationOptions,
) -> Result<IntegrationOutcome, HarnessError> {
    let mut integrated = program.clone();
    for (name, def) in doubles {
        integrated = integrated.substitute(name, def)?;
    }
    let order = integration_path(&integrated, doubles)?;
    let by_target: BTreeMap<&str, &TestPlan> = plans.iter().map(|p| (p.target.as_str(), p)).collect();
    if let Some(missing) = order.iter().find(|s| !by_target.contains_key(s.as_str())) {
        return Err(HarnessError::Plan(format!("no plan for `{missing}` on the integration path")));
    }
    let mut levels = Vec::new();
    let mut stopped_at = None;
    for sub in &order {
        let plan = by_target[sub.as_str()];
        let results = run_plan(plan, &integrated.with_entry(sub)?, options.jobs)?;
        let pass = results.all_pass();
        levels.push(LevelResult { sub: sub.clone(), results });
        if !pass && !options.continue_on_failure {
            stopped_at = Some(sub.clone());
            break;
        }
    }
    Ok(IntegrationOutcome { order, levels, stopped_at })
}
