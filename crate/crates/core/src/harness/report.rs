//! Side-by-side comparison of a generic and a dynamic run.

use std::fmt::Write as _;

use serde::Serialize;

use super::run::{RunResult, StepRecord};

pub const CSV_HEADER: &str = "step,mode,op,p,d,m,k,trailed_cells,augment_visits,filter_visits,wall_ns,consistent";

#[derive(Serialize)]
struct CsvRow<'a> {
    step: usize,
    mode: &'a str,
    op: &'a str,
    p: usize,
    d: usize,
    m: usize,
    k: usize,
    trailed_cells: u64,
    augment_visits: u64,
    filter_visits: u64,
    wall_ns: u64,
    consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSummary {
    /// Geometric mean of generic/dynamic over paired ADD rows.
    pub trailed_cells: f64,
    pub augment_visits: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub csv: String,
    pub summary: Option<RatioSummary>,
}

/// Zero counters are clamped to one so the ratios stay finite.
fn geometric_mean_ratio(pairs: &[(u64, u64)]) -> f64 {
    let log_sum: f64 = pairs
        .iter()
        .map(|&(g, d)| (g.max(1) as f64).ln() - (d.max(1) as f64).ln())
        .sum();
    (log_sum / pairs.len() as f64).exp()
}

pub fn ratio_summary(generic: &RunResult, dynamic: &RunResult) -> Option<RatioSummary> {
    let rows: Vec<(&StepRecord, &StepRecord)> = generic.add_rows().zip(dynamic.add_rows()).collect();
    if rows.is_empty() {
        return None;
    }
    let trailed: Vec<(u64, u64)> = rows.iter().map(|(g, d)| (g.trailed_cells, d.trailed_cells)).collect();
    let visits: Vec<(u64, u64)> = rows.iter().map(|(g, d)| (g.augment_visits, d.augment_visits)).collect();
    Some(RatioSummary {
        trailed_cells: geometric_mean_ratio(&trailed),
        augment_visits: geometric_mean_ratio(&visits),
        pairs: rows.len(),
    })
}

pub fn to_csv(runs: &[&RunResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut wrote = false;
    for run in runs {
        for r in &run.steps {
            w.serialize(CsvRow {
                step: r.step,
                mode: run.mode.as_str(),
                op: r.op,
                p: r.p,
                d: r.d,
                m: r.m,
                k: r.k,
                trailed_cells: r.trailed_cells,
                augment_visits: r.augment_visits,
                filter_visits: r.filter_visits,
                wall_ns: r.wall_ns,
                consistent: r.consistent,
            })
            .expect("writing to memory");
            wrote = true;
        }
    }
    let bytes = w.into_inner().expect("writing to memory");
    let mut out = String::from_utf8(bytes).expect("csv output is UTF-8");
    if !wrote {
        out = format!("{CSV_HEADER}\n");
    }
    out
}

fn table(runs: &[&RunResult]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<8} {:>5} {:>4} {:>4} {:>3} {:>13} {:>14} {:>13} {:>11}",
        "mode", "step", "p", "d", "k", "trailed_cells", "augment_visits", "filter_visits", "wall_ns"
    )
    .unwrap();
    for run in runs {
        for r in run.add_rows() {
            writeln!(
                out,
                "{:<8} {:>5} {:>4} {:>4} {:>3} {:>13} {:>14} {:>13} {:>11}",
                run.mode.as_str(),
                r.step,
                r.p,
                r.d,
                r.k,
                r.trailed_cells,
                r.augment_visits,
                r.filter_visits,
                r.wall_ns
            )
            .unwrap();
        }
    }
    out
}

/// Report over any subset of modes; the summary needs both.
pub fn report_runs(runs: &[&RunResult]) -> Report {
    let mut text = table(runs);
    let summary = match runs {
        [a, b] => ratio_summary(a, b),
        _ => None,
    };
    if let Some(s) = summary {
        writeln!(
            text,
            "geomean generic/dynamic over {} ADDs: trailed_cells {:.3}, augment_visits {:.3}",
            s.pairs, s.trailed_cells, s.augment_visits
        )
        .unwrap();
    }
    Report {
        text,
        csv: to_csv(runs),
        summary,
    }
}

pub fn report(generic: &RunResult, dynamic: &RunResult) -> Report {
    report_runs(&[generic, dynamic])
}
