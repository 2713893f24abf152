use std::fmt::Write;
use std::str::FromStr;

use super::integration::IntegrationOutcome;
use super::suite::SuiteResults;
use crate::detect::Status;
use crate::mutate::{MutationReport, MutationType, SurvivorReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Space-aligned columns for terminals.
    Table,
    /// Tab-separated, one header row.
    Tsv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(Format::Table),
            "tsv" => Ok(Format::Tsv),
            _ => Err(format!("unknown format `{s}` (expected table or tsv)")),
        }
    }
}

/// What to report on.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Suites(&'a [SuiteResults]),
    /// `timing` adds a run-time column; leave it off for reproducible bytes.
    Mutations {
        reports: &'a [MutationReport],
        timing: bool,
    },
    Survivors(&'a [SurvivorReport]),
    Integration(&'a IntegrationOutcome),
}

/// `num / den` as 4-decimal fixed point; `0.0000` when `den` is 0.
pub fn rate(num: usize, den: usize) -> String {
    let r = if den == 0 { 0.0 } else { num as f64 / den as f64 };
    format!("{r:.4}")
}

fn render(header: Vec<String>, rows: Vec<Vec<String>>, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Tsv => {
            for row in std::iter::once(&header).chain(&rows) {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        Format::Table => {
            let widths: Vec<usize> = (0..header.len())
                .map(|c| std::iter::once(&header).chain(&rows).map(|r| r[c].chars().count()).max().unwrap_or(0))
                .collect();
            for row in std::iter::once(&header).chain(&rows) {
                let cells: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
                let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            }
        }
    }
    out
}

fn strings(cells: &[&str]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

fn suite_rows(results: &[SuiteResults]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = strings(&["program", "frame", "cases", "pass", "fail", "inconclusive", "pass_rate"]);
    let mut rows = Vec::new();
    for r in results {
        for f in &r.frames {
            let (p, x, i) = (f.count(Status::Pass), f.count(Status::Fail), f.count(Status::Inconclusive));
            let n = f.verdicts.len();
            rows.push(vec![
                r.program.clone(),
                f.label.clone(),
                n.to_string(),
                p.to_string(),
                x.to_string(),
                i.to_string(),
                rate(p, n),
            ]);
        }
        let (p, x, i, n) = (r.count(Status::Pass), r.count(Status::Fail), r.count(Status::Inconclusive), r.cases());
        rows.push(vec![
            r.program.clone(),
            "*".into(),
            n.to_string(),
            p.to_string(),
            x.to_string(),
            i.to_string(),
            rate(p, n),
        ]);
    }
    (header, rows)
}

fn mutation_rows(reports: &[MutationReport], timing: bool) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = strings(&["program", "frame", "cases"]);
    header.extend(MutationType::ALL.iter().map(|t| format!("trig_{t}")));
    header.extend(strings(&["triggers", "rate"]));
    header.extend(MutationType::ALL.iter().map(|t| format!("kill_{t}")));
    header.push("mutants".into());
    if timing {
        header.push("time_s".into());
    }
    let mut rows = Vec::new();
    for r in reports {
        let mutants = r.results.len();
        for (f, label) in r.frames.iter().enumerate() {
            let cases = r.cases[f];
            let mut row = vec![r.program.clone(), label.clone(), cases.to_string()];
            row.extend(MutationType::ALL.iter().map(|&t| r.triggers(f, Some(t)).to_string()));
            let triggers = r.triggers(f, None);
            row.push(triggers.to_string());
            row.push(rate(triggers, cases * mutants));
            row.extend(
                MutationType::ALL.iter().map(|&t| {
                    r.results.iter().filter(|m| m.descriptor.mtype == t && m.killed_in(f)).count().to_string()
                }),
            );
            row.push(mutants.to_string());
            if timing {
                row.push(String::new());
            }
            rows.push(row);
        }
        let cases: usize = r.cases.iter().sum();
        let mut row = vec![r.program.clone(), "*".into(), cases.to_string()];
        let per_frame = |t: Option<MutationType>| (0..r.frames.len()).map(|f| r.triggers(f, t)).sum::<usize>();
        row.extend(MutationType::ALL.iter().map(|&t| per_frame(Some(t)).to_string()));
        let triggers = per_frame(None);
        row.push(triggers.to_string());
        row.push(rate(triggers, cases * mutants));
        row.extend(MutationType::ALL.iter().map(|&t| r.per_type(t).1.to_string()));
        row.push(mutants.to_string());
        if timing {
            row.push(r.elapsed.map_or(String::new(), |d| format!("{:.3}", d.as_secs_f64())));
        }
        rows.push(row);
    }
    (header, rows)
}

fn survivor_rows(survivors: &[SurvivorReport]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = strings(&["mutant", "class", "evidence"]);
    let rows = survivors
        .iter()
        .map(|s| {
            let evidence = match &s.class {
                crate::mutate::SurvivorClass::Equivalent => String::new(),
                crate::mutate::SurvivorClass::Undetected { witness } => witness.clone(),
                crate::mutate::SurvivorClass::Unverified { reason } => reason.clone(),
            };
            vec![s.id.clone(), s.class.label().to_string(), evidence]
        })
        .collect();
    (header, rows)
}

fn integration_rows(outcome: &IntegrationOutcome) -> (Vec<String>, Vec<Vec<String>>) {
    let header = strings(&["level", "subroutine", "cases", "pass", "fail", "inconclusive", "status"]);
    let rows = outcome
        .order
        .iter()
        .enumerate()
        .map(|(i, sub)| {
            let level = (i + 1).to_string();
            match outcome.levels.iter().find(|l| &l.sub == sub) {
                Some(l) => {
                    let r = &l.results;
                    let status = if r.all_pass() { "pass" } else { "fail" };
                    vec![
                        level,
                        sub.clone(),
                        r.cases().to_string(),
                        r.count(Status::Pass).to_string(),
                        r.count(Status::Fail).to_string(),
                        r.count(Status::Inconclusive).to_string(),
                        status.into(),
                    ]
                }
                None => vec![level, sub.clone(), "0".into(), "0".into(), "0".into(), "0".into(), "not-run".into()],
            }
        })
        .collect();
    (header, rows)
}

/// Renders results as a table or TSV. The same input always gives the
/// same bytes; an empty input gives the header alone.
pub fn emit_report(report: Report<'_>, format: Format) -> String {
    let (header, rows) = match report {
        Report::Suites(r) => suite_rows(r),
        Report::Mutations { reports, timing } => mutation_rows(reports, timing),
        Report::Survivors(s) => survivor_rows(s),
        Report::Integration(o) => integration_rows(o),
    };
    render(header, rows, format)
}
