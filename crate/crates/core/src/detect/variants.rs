//! Identity relations between a subroutine and its inverse, power and
//! controlled variants, each checked as an identity on random inputs.

use super::{identity_on_inputs, random_inputs, Status, Verdict};
use crate::program::{parse_subroutine, Invocation, ParamKind, Program, ProgramError, SubroutineDef};
use crate::sim::RandomStream;

/// The variants of one subroutine. Missing entries skip their relations.
#[derive(Debug, Clone, Default)]
pub struct VariantSet {
    pub inverse: Option<SubroutineDef>,
    pub controlled: Option<SubroutineDef>,
    pub power: Option<SubroutineDef>,
}

impl VariantSet {
    /// Inverse, controlled and power variants derived from `name`'s body.
    pub fn derived(program: &Program, name: &str) -> Result<Self, ProgramError> {
        Ok(VariantSet {
            inverse: Some(program.derive_inverse(name)?),
            controlled: Some(program.derive_controlled(name)?),
            power: Some(program.derive_power(name)?),
        })
    }
}

/// Knobs for [`test_variants`].
#[derive(Debug, Clone)]
pub struct VariantConfig {
    pub k_values: Vec<i64>,
    pub num_inputs: usize,
    /// Width of the control register handed to the controlled variant.
    pub controls: usize,
}

impl Default for VariantConfig {
    fn default() -> Self {
        VariantConfig { k_values: (-3..=3).collect(), num_inputs: 20, controls: 2 }
    }
}

/// Outcome of one relation; `verdict` is `None` when it was skipped.
#[derive(Debug, Clone)]
pub struct RelationResult {
    pub relation: String,
    pub verdict: Option<Verdict>,
    pub note: String,
}

impl RelationResult {
    pub fn status(&self) -> Option<Status> {
        self.verdict.as_ref().map(|v| v.status)
    }

    fn skipped(relation: &str, missing: &str) -> Self {
        RelationResult { relation: relation.to_string(), verdict: None, note: format!("skipped: no {missing} variant") }
    }
}

struct Shape {
    params: String,
    cargs: Vec<String>,
    qargs: String,
}

fn shape(p: &SubroutineDef) -> Shape {
    Shape {
        params: p.params.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "),
        cargs: p.classical_params().map(|q| q.name.clone()).collect(),
        qargs: p
            .params
            .iter()
            .filter(|q| matches!(q.kind, ParamKind::Qubits(_)))
            .map(|q| q.name.clone())
            .collect::<Vec<_>>()
            .join(", "),
    }
}

fn call(callee: &str, cargs: &[String], extra: Option<i64>, qargs: &str) -> String {
    let mut args = cargs.to_vec();
    if let Some(k) = extra {
        args.push(k.to_string());
    }
    format!("call {callee}({})({qargs});", args.join(", "))
}

struct Runner<'a> {
    program: Program,
    inv: &'a Invocation,
    data_width: usize,
    config: &'a VariantConfig,
}

impl Runner<'_> {
    /// Checks that `body` (over the data qubits, optionally behind a
    /// control register) is the identity on random inputs with the
    /// control register, if any, starting at zero.
    fn identity(&self, relation: &str, name: &str, header: &str, body: &str, rng: &mut RandomStream) -> RelationResult {
        let seed = rng.seed();
        let src = format!("sub {name}({header}) {{\n{body}\n}}");
        let verdict = match parse_subroutine(&src) {
            Ok(def) => {
                let mut program = self.program.clone();
                program.insert_subroutine(def);
                let mut inv = self.inv.clone();
                inv.sub = name.to_string();
                let inputs = random_inputs(self.data_width, self.config.num_inputs, rng);
                identity_on_inputs(&program, &inv, &inputs, rng)
            }
            Err(e) => Verdict::inconclusive(format!("composite: {e}"), seed),
        };
        RelationResult { relation: relation.to_string(), verdict: Some(verdict), note: String::new() }
    }
}

/// Checks the identity relations of subroutine `p` (invoked via `inv`,
/// whose `sub` names `p`):
/// P then InvP; PowP(k) then InvP k times (P |k| times for k < 0);
/// CtrlP then InvP under all-one controls; CtrlP alone under controls
/// with a zero bit.
pub fn test_variants(
    program: &Program,
    inv: &Invocation,
    variants: &VariantSet,
    config: &VariantConfig,
    rng: &mut RandomStream,
) -> Result<Vec<RelationResult>, ProgramError> {
    let p = program.subroutine(&inv.sub)?.clone();
    let data_width = program.qubit_layout(inv)?.width();
    let mut base = program.clone();
    for v in [&variants.inverse, &variants.controlled, &variants.power].into_iter().flatten() {
        base.insert_subroutine(v.clone());
    }
    let runner = Runner { program: base, inv, data_width, config };
    let s = shape(&p);
    let mut out = Vec::new();

    let Some(inverse) = &variants.inverse else {
        out.push(RelationResult::skipped("inverse", "inverse"));
        out.push(RelationResult::skipped("power", "inverse"));
        out.push(RelationResult::skipped("controlled", "inverse"));
        return Ok(out);
    };
    let undo = call(&inverse.name, &s.cargs, None, &s.qargs);
    let body = format!("{}\n{undo}", call(&p.name, &s.cargs, None, &s.qargs));
    out.push(runner.identity("inverse", "VariantInverse", &s.params, &body, &mut rng.derive(0)));

    match &variants.power {
        None => out.push(RelationResult::skipped("power", "power")),
        Some(pow) => {
            for (i, &k) in config.k_values.iter().enumerate() {
                let step = if k > 0 { undo.clone() } else { call(&p.name, &s.cargs, None, &s.qargs) };
                let mut body = call(&pow.name, &s.cargs, Some(k), &s.qargs);
                for _ in 0..k.unsigned_abs() {
                    body.push('\n');
                    body.push_str(&step);
                }
                let relation = format!("power({k})");
                out.push(runner.identity(&relation, "VariantPower", &s.params, &body, &mut rng.derive(1 + i as u64)));
            }
        }
    }

    match &variants.controlled {
        None => out.push(RelationResult::skipped("controlled", "controlled")),
        Some(ctl) => {
            let m = config.controls.max(1);
            let header = format!("qubits VariantCtl[{m}], {}", s.params);
            let qargs = if s.qargs.is_empty() { "VariantCtl".to_string() } else { format!("VariantCtl, {}", s.qargs) };
            let controlled = call(&ctl.name, &s.cargs, None, &qargs);
            let flips = |pattern: u64| -> String {
                (0..m)
                    .filter(|&q| (pattern >> (m - 1 - q)) & 1 == 1)
                    .map(|q| format!("X VariantCtl[{q}];"))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            let all = (1u64 << m) - 1;
            let body = format!("{}\n{controlled}\n{undo}\n{}", flips(all), flips(all));
            out.push(runner.identity("controlled(all-one)", "VariantCtlOn", &header, &body, &mut rng.derive(100)));
            let mut verdicts = Vec::new();
            for pattern in 0..all {
                let body = format!("{}\n{controlled}\n{}", flips(pattern), flips(pattern));
                let r = runner.identity("", "VariantCtlOff", &header, &body, &mut rng.derive(101 + pattern));
                verdicts.extend(r.verdict);
            }
            out.push(RelationResult {
                relation: "controlled(zero-bit)".into(),
                verdict: Some(Verdict::combine(verdicts, rng.seed())),
                note: String::new(),
            });
        }
    }
    Ok(out)
}
