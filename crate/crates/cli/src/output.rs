//! Report, summary, and histogram formatting.
//!
//! Replication CSV schema (one row per replication):
//! `replication,kind,seed,termination_step,budget_flag,ess,ratio_stat,unique_nodes,acceptance_rate,covered,est_1..est_p,se_wallclock`
//! Optional fields are left empty. `se_wallclock` (elapsed seconds) is the
//! only column that varies between reruns of the same seeds.

use std::fmt::Write as _;

use netsample::replicate::{SummaryStat, SummaryTable};
use netsample::stopping::TerminationReport;
use netsample::walk::WalkKind;

pub fn replication_csv_header(p: usize) -> String {
    let mut header = String::from(
        "replication,kind,seed,termination_step,budget_flag,ess,ratio_stat,unique_nodes,acceptance_rate,covered",
    );
    for j in 1..=p {
        let _ = write!(header, ",est_{j}");
    }
    header.push_str(",se_wallclock");
    header
}

fn opt_float(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn replication_csv_row(index: usize, report: &TerminationReport) -> String {
    let mut row = format!(
        "{},{},{},{},{},{},{},{},{},{}",
        index,
        report.kind,
        report.seed,
        report.termination_step,
        report.budget_terminated as u8,
        opt_float(report.ess),
        opt_float(report.ratio_statistic),
        report.unique_nodes,
        opt_float(report.acceptance_rate),
        report.covered.map(|c| (c as u8).to_string()).unwrap_or_default(),
    );
    for est in &report.estimates {
        let _ = write!(row, ",{est}");
    }
    let _ = write!(row, ",{:.3}", report.wallclock_secs);
    row
}

/// Human-readable single-run report.
pub fn report_text(report: &TerminationReport, names: &[String], start_label: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "walk {}  seed {}  start {}", report.kind, report.seed, start_label);
    let _ = writeln!(
        out,
        "termination_step {} ({})",
        report.termination_step,
        if report.budget_terminated { "budget" } else { "rule" }
    );
    let _ = writeln!(out, "ess {}", opt_display(report.ess, "{:.2}"));
    let _ = writeln!(out, "ratio_stat {}", opt_display(report.ratio_statistic, "{:.6}"));
    let _ = writeln!(out, "unique_nodes {}", report.unique_nodes);
    if let Some(rate) = report.acceptance_rate {
        let _ = writeln!(out, "acceptance_rate {rate:.4}");
    }
    let _ = writeln!(out, "batches {} x {}", report.batch_count, report.batch_size);
    let _ = writeln!(out, "estimates:");
    for (name, est) in names.iter().zip(&report.estimates) {
        let _ = writeln!(out, "  {name} {est:.6}");
    }
    if let Some(covered) = report.covered {
        let _ = writeln!(out, "covered {}", if covered { "yes" } else { "no" });
    }
    let _ = writeln!(out, "wallclock {:.3} s", report.wallclock_secs);
    out
}

fn opt_display(x: Option<f64>, _fmt: &str) -> String {
    match x {
        Some(v) => format!("{v:.6}"),
        None => "-".into(),
    }
}

fn stat_cell(stat: &SummaryStat) -> String {
    if stat.count == 0 || stat.mean.is_nan() {
        return "-".into();
    }
    if stat.se.is_nan() {
        return format!("{:.4} (-)", stat.mean);
    }
    format!("{:.4} ({:.4})", stat.mean, stat.se)
}

/// Paper-style text table: one `mean (se)` cell per quantity.
pub fn summary_text(table: &SummaryTable, names: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "== {} : {} replications ({} budget-terminated, {} failed) ==",
        table.kind, table.replications, table.budget_terminated, table.failures
    );
    for (name, stat) in names.iter().zip(&table.estimates) {
        let _ = writeln!(out, "  {:<24} {}", name, stat_cell(stat));
    }
    let _ = writeln!(out, "  {:<24} {}", "termination_step", stat_cell(&table.termination_step));
    let _ = writeln!(out, "  {:<24} {}", "ess", stat_cell(&table.ess));
    let _ = writeln!(out, "  {:<24} {}", "unique_nodes", stat_cell(&table.unique_nodes));
    let _ = writeln!(out, "  {:<24} {}", "ratio_stat", stat_cell(&table.ratio_statistic));
    if let Some(stat) = &table.acceptance_rate {
        let _ = writeln!(out, "  {:<24} {}", "acceptance_rate", stat_cell(stat));
    }
    if let Some(stat) = &table.coverage {
        let _ = writeln!(out, "  {:<24} {}", "coverage", stat_cell(stat));
    }
    out
}

pub const SUMMARY_CSV_HEADER: &str = "kind,quantity,mean,se,count";

pub fn summary_csv_rows(table: &SummaryTable, names: &[String]) -> Vec<String> {
    let mut rows = Vec::new();
    let mut push = |quantity: &str, stat: &SummaryStat| {
        rows.push(format!(
            "{},{},{},{},{}",
            table.kind, quantity, stat.mean, stat.se, stat.count
        ));
    };
    for (name, stat) in names.iter().zip(&table.estimates) {
        push(&format!("est:{name}"), stat);
    }
    push("termination_step", &table.termination_step);
    push("ess", &table.ess);
    push("unique_nodes", &table.unique_nodes);
    push("ratio_stat", &table.ratio_statistic);
    if let Some(stat) = &table.acceptance_rate {
        push("acceptance_rate", stat);
    }
    if let Some(stat) = &table.coverage {
        push("coverage", stat);
    }
    rows
}

pub const HISTOGRAM_CSV_HEADER: &str = "kind,feature,bin,lo,hi,count";

/// Equal-width bin counts of one estimate component across replications.
pub fn histogram_rows(
    kind: WalkKind,
    feature: &str,
    values: &[f64],
    bins: usize,
) -> Vec<String> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![format!("{kind},{feature},0,{lo},{hi},{}", values.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let ix = (((v - lo) / width) as usize).min(bins - 1);
        counts[ix] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(b, c)| {
            let bin_lo = lo + b as f64 * width;
            let bin_hi = if b + 1 == bins { hi } else { lo + (b + 1) as f64 * width };
            format!("{kind},{feature},{b},{bin_lo},{bin_hi},{c}")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(p: usize) -> TerminationReport {
        TerminationReport {
            kind: WalkKind::Srw,
            seed: 5,
            start: 0,
            termination_step: 12_000,
            budget_terminated: false,
            estimates: vec![2.5; p],
            ess: Some(8000.25),
            ratio_statistic: Some(0.049),
            unique_nodes: 321,
            acceptance_rate: None,
            covered: Some(true),
            batch_count: 109,
            batch_size: 109,
            wallclock_secs: 0.5,
        }
    }

    #[test]
    fn csv_schema_is_stable() {
        assert_eq!(
            replication_csv_header(2),
            "replication,kind,seed,termination_step,budget_flag,ess,ratio_stat,unique_nodes,acceptance_rate,covered,est_1,est_2,se_wallclock"
        );
        let row = replication_csv_row(3, &report(2));
        assert_eq!(row, "3,srw,5,12000,0,8000.25,0.049,321,,1,2.5,2.5,0.500");
        // Field count matches the header.
        assert_eq!(row.split(',').count(), replication_csv_header(2).split(',').count());
    }

    #[test]
    fn histogram_bins_cover_all_values() {
        let values = [1.0, 1.5, 2.0, 2.5, 3.0];
        let rows = histogram_rows(WalkKind::Mh, "degree", &values, 4);
        assert_eq!(rows.len(), 4);
        let total: usize = rows
            .iter()
            .map(|r| r.rsplit(',').next().unwrap().parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, values.len());

        let constant = [2.0, 2.0];
        let rows = histogram_rows(WalkKind::Mh, "degree", &constant, 4);
        assert_eq!(rows.len(), 1);
    }
}
