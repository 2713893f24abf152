use super::plan::TestPlan;
use super::HarnessError;
use crate::io::formulas::{grover_spec, phase_flip_spec, purity_spec, qft_spec, qpe_spec, reverse_spec, swap_spec};
use crate::io::{IOMark, ProgramSpec};
use crate::program::{parse_sources, Program};

pub(crate) const QFT_SRC: &str = include_str!("assets/qft.qpl");
pub(crate) const INVQFT_SRC: &str = include_str!("assets/invqft.qpl");
pub(crate) const MULTISWAP_SRC: &str = include_str!("assets/multiswap.qpl");
pub(crate) const PURITY_SRC: &str = include_str!("assets/purity.qpl");
pub(crate) const PHASEFLIP_SRC: &str = include_str!("assets/phaseflip.qpl");
pub(crate) const GROVER_SRC: &str = include_str!("assets/grover.qpl");
pub(crate) const QPE_SRC: &str = include_str!("assets/qpe.qpl");
pub(crate) const MEMSEARCH_SRC: &str = include_str!("assets/memsearch.qpl");

/// A shipped program with its IO mark, spec and default plan.
#[derive(Clone)]
pub struct BenchmarkEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub sources: Vec<&'static str>,
    pub target: &'static str,
    pub mark: &'static str,
    pub plan_text: &'static str,
    spec: fn() -> ProgramSpec,
}

impl BenchmarkEntry {
    /// The program with its entry set to the target.
    pub fn program(&self) -> Result<Program, HarnessError> {
        Ok(parse_sources(&self.sources)?.with_entry(self.target)?)
    }

    pub fn mark(&self) -> IOMark {
        IOMark::parse(self.mark).expect("shipped marks parse")
    }

    pub fn spec(&self) -> ProgramSpec {
        (self.spec)()
    }

    pub fn plan(&self) -> Result<TestPlan, HarnessError> {
        TestPlan::parse(self.plan_text)
    }
}

/// A shipped multi-subroutine program with one unit plan per subroutine
/// on its integration path.
#[derive(Clone)]
pub struct IntegrationEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub sources: Vec<&'static str>,
    pub plan_texts: Vec<&'static str>,
}

impl IntegrationEntry {
    pub fn program(&self) -> Result<Program, HarnessError> {
        Ok(parse_sources(&self.sources)?)
    }

    pub fn plans(&self) -> Result<Vec<TestPlan>, HarnessError> {
        self.plan_texts.iter().map(|t| TestPlan::parse(t)).collect()
    }
}

fn identity() -> ProgramSpec {
    ProgramSpec::Identity
}

pub fn builtin_benchmarks() -> Vec<BenchmarkEntry> {
    vec![
        BenchmarkEntry {
            name: "Reverse",
            description: "reverse qubit order: |j1...jn> -> |jn...j1>",
            sources: vec![QFT_SRC],
            target: "Reverse",
            mark: "Reverse : (n, *qs*) -> (*qs'*)",
            plan_text: include_str!("../../plans/reverse.plan"),
            spec: reverse_spec,
        },
        BenchmarkEntry {
            name: "MultiSWAP",
            description: "exchange two registers: |a>|b> -> |b>|a>",
            sources: vec![MULTISWAP_SRC],
            target: "MultiSWAP",
            mark: "MultiSWAP : (n, *qs1*, *qs2*) -> (*qs1'*, *qs2'*)",
            plan_text: include_str!("../../plans/multiswap.plan"),
            spec: swap_spec,
        },
        BenchmarkEntry {
            name: "QFT",
            description: "quantum Fourier transform",
            sources: vec![QFT_SRC],
            target: "QFT",
            mark: "QFT : (n, *qs*) -> (*qs'*)",
            plan_text: include_str!("../../plans/qft.plan"),
            spec: qft_spec,
        },
        BenchmarkEntry {
            name: "invQFT",
            description: "hand-written inverse QFT, checked by QFT(InvQFT(x)) = x",
            sources: vec![QFT_SRC, INVQFT_SRC],
            target: "QFTInvCheck",
            mark: "QFTInvCheck : (n, *qs*) -> (*qs'*)",
            plan_text: include_str!("../../plans/invqft.plan"),
            spec: identity,
        },
        BenchmarkEntry {
            name: "Purity",
            description: "swap-test purity: isPure = 1 iff the generated state is pure",
            sources: vec![MULTISWAP_SRC, PURITY_SRC],
            target: "Purity",
            mark: "Purity : (n, t, _GenRho_) -> (isPure')",
            plan_text: include_str!("../../plans/purity.plan"),
            spec: || purity_spec("isPure", "GenRho", "t"),
        },
        BenchmarkEntry {
            name: "PhaseFlip",
            description: "|x> -> -|x> for x > 0, |0> -> |0>",
            sources: vec![PHASEFLIP_SRC],
            target: "PhaseFlip",
            mark: "PhaseFlip : (n, *qs*) -> (*qs'*)",
            plan_text: include_str!("../../plans/phaseflip.plan"),
            spec: phase_flip_spec,
        },
        BenchmarkEntry {
            name: "Grover",
            description: "Grover search from |0>, oracle replaced by phase-oracle doubles",
            sources: vec![PHASEFLIP_SRC, GROVER_SRC],
            target: "Grover",
            mark: "Grover : (n, _OracleK_) -> (*qs'*)",
            plan_text: include_str!("../../plans/grover.plan"),
            spec: || grover_spec("OracleK"),
        },
        BenchmarkEntry {
            name: "QPE",
            description: "phase estimation with exact-phase Upower doubles",
            sources: vec![QFT_SRC, QPE_SRC],
            target: "QPE",
            mark: "QPE : (Nclock, Ntarget, _Upower_, *target*) -> (*clock'*)",
            plan_text: include_str!("../../plans/qpe.plan"),
            spec: || qpe_spec("Nclock", "Upower"),
        },
    ]
}

pub fn builtin_integrations() -> Vec<IntegrationEntry> {
    vec![IntegrationEntry {
        name: "memsearch",
        description: "Grover search for a fixed key, integrated bottom-up",
        sources: vec![PHASEFLIP_SRC, MEMSEARCH_SRC],
        plan_texts: vec![
            include_str!("../../plans/memsearch/po.plan"),
            include_str!("../../plans/memsearch/phaseflip.plan"),
            include_str!("../../plans/memsearch/gs.plan"),
            include_str!("../../plans/memsearch/memsearch.plan"),
        ],
    }]
}

pub fn benchmark(name: &str) -> Option<BenchmarkEntry> {
    builtin_benchmarks().into_iter().find(|b| b.name.eq_ignore_ascii_case(name))
}

pub fn integration(name: &str) -> Option<IntegrationEntry> {
    builtin_integrations().into_iter().find(|b| b.name.eq_ignore_ascii_case(name))
}
