//! Result serialisation: raw per-seed CSV, a markdown summary table and a
//! per-horizon ratio file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::Learner;
use super::run::ResultRow;
use crate::error::{Error, Result};
use crate::evaluation::mean_sd;
use crate::weighting::WeightScheme;

pub const RESULTS_HEADER: &str =
    "scheme,setting,horizon,seed,pehe,theta_hat,n_guarded,n_negative_rho,train_loss_final,val_loss_final";

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.learner, r.setting, r.horizon, r.seed, r.pehe, r.theta_hat, r.n_guarded, r.n_negative_rho, r.train_loss_final, r.val_loss_final
        );
    }
    s
}

fn settings_of(rows: &[ResultRow]) -> Vec<String> {
    let mut v: Vec<String> = rows.iter().map(|r| r.setting.clone()).collect();
    v.sort();
    v.dedup();
    v
}

/// Per-seed PEHE averaged over horizons, for one learner and setting.
pub fn seed_averages(rows: &[ResultRow], learner: Learner, setting: &str) -> Vec<f64> {
    let mut by_seed: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.learner == learner && r.setting == setting) {
        by_seed.entry(r.seed).or_default().push(r.pehe);
    }
    by_seed.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect()
}

/// Learners as rows, settings as columns; cells are `mean ± sd` of the
/// per-seed horizon-averaged PEHE in units of 1e-4.
pub fn summary_markdown(rows: &[ResultRow]) -> String {
    let settings = settings_of(rows);
    let mut learners: Vec<Learner> = rows.iter().map(|r| r.learner).collect();
    learners.sort();
    learners.dedup();
    let mut s = String::new();
    s.push_str("PEHE (mean squared error of the estimated effect) x 1e-4, averaged over horizons; ");
    s.push_str("mean ± population standard deviation across seeds.\n\n");
    let _ = writeln!(s, "| learner | {} |", settings.join(" | "));
    let _ = writeln!(s, "|---|{}", "---|".repeat(settings.len()));
    for l in learners {
        let cells: Vec<String> = settings
            .iter()
            .map(|st| {
                let v = seed_averages(rows, l, st);
                if v.is_empty() {
                    return "-".to_string();
                }
                let (m, sd) = mean_sd(&v);
                format!("{:.2} ± {:.2}", m * 1e4, sd * 1e4)
            })
            .collect();
        let _ = writeln!(s, "| {} | {} |", l, cells.join(" | "));
    }
    s
}

/// Mean PEHE over seeds of each learner divided by that of the unweighted
/// learner, one line per horizon and one column per `setting:learner`.
pub fn ratio_csv(rows: &[ResultRow]) -> String {
    let base = Learner::Weighted(WeightScheme::None);
    let mut horizons: Vec<usize> = rows.iter().map(|r| r.horizon).collect();
    horizons.sort();
    horizons.dedup();
    let mut mean: BTreeMap<(String, Learner, usize), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = mean.entry((r.setting.clone(), r.learner, r.horizon)).or_insert((0.0, 0));
        e.0 += r.pehe;
        e.1 += 1;
    }
    let mut cols: Vec<(String, Learner)> = mean.keys().filter(|k| k.1 != base).map(|k| (k.0.clone(), k.1)).collect();
    cols.dedup();
    cols.retain(|(st, _)| mean.keys().any(|k| &k.0 == st && k.1 == base));
    let avg = |k: &(String, Learner, usize)| mean.get(k).map(|(s, n)| s / *n as f64);

    let mut s = String::from("horizon");
    for (st, l) in &cols {
        let _ = write!(s, ",{st}:{l}");
    }
    s.push('\n');
    for h in horizons {
        let _ = write!(s, "{h}");
        for (st, l) in &cols {
            let v = match (avg(&(st.clone(), *l, h)), avg(&(st.clone(), base, h))) {
                (Some(t), Some(b)) if b != 0.0 => t / b,
                _ => f64::NAN,
            };
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub ratios: PathBuf,
}

pub fn emit_report(rows: &[ResultRow], out_dir: &Path) -> Result<ReportFiles> {
    if rows.is_empty() {
        return Err(Error::Empty("results"));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = ReportFiles {
        results: out_dir.join("results.csv"),
        summary: out_dir.join("summary.md"),
        ratios: out_dir.join("ratios.csv"),
    };
    for (path, body) in [
        (&files.results, results_csv(rows)),
        (&files.summary, summary_markdown(rows)),
        (&files.ratios, ratio_csv(rows)),
    ] {
        std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(l: Learner, setting: &str, h: usize, seed: u64, pehe: f64) -> ResultRow {
        ResultRow {
            learner: l,
            setting: setting.into(),
            horizon: h,
            seed,
            pehe,
            theta_hat: 0.0,
            n_guarded: 0,
            n_negative_rho: 0,
            train_loss_final: 0.0,
            val_loss_final: 0.0,
        }
    }

    const NONE: Learner = Learner::Weighted(WeightScheme::None);
    const C: Learner = Learner::Weighted(WeightScheme::C);

    #[test]
    fn single_cell_has_zero_sd() {
        let md = summary_markdown(&[row(NONE, "full", 0, 1, 5e-4)]);
        assert!(md.contains("| none | 5.00 ± 0.00 |"), "{md}");
        assert_eq!(md.lines().filter(|l| l.starts_with("| none")).count(), 1);
    }

    #[test]
    fn two_seeds_give_two_plus_minus_one() {
        let md = summary_markdown(&[row(NONE, "full", 0, 1, 1e-4), row(NONE, "full", 0, 2, 3e-4)]);
        assert!(md.contains("2.00 ± 1.00"), "{md}");
        assert!(md.contains("population standard deviation"));
    }

    #[test]
    fn ratio_file_has_one_line_per_horizon() {
        let mut rows = Vec::new();
        for h in 0..4 {
            rows.push(row(NONE, "low_censoring", h, 1, 2e-4));
            rows.push(row(C, "low_censoring", h, 1, 1e-4));
        }
        let csv = ratio_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "horizon,low_censoring:c");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,0.5");
    }

    #[test]
    fn results_csv_header_matches_schema() {
        let csv = results_csv(&[row(C, "full", 2, 7, 1e-4)]);
        assert_eq!(csv.lines().next().unwrap(), RESULTS_HEADER);
        assert!(csv.lines().nth(1).unwrap().starts_with("c,full,2,7,"));
    }
}
