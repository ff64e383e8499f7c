use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use super::{io_cause, AtStage, Cause, Manifest, ReportFormat, Result, RunDir, Stage};
use crate::metrics::{divergence_percentage, EquityReport, Ism, Position};

/// Mean scores of one group of candidate networks. Perfect-strategy ISMs
/// are counted but left out of the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMean {
    pub key: u32,
    pub networks: usize,
    pub perfect: usize,
    pub mean_ism: Option<f64>,
    pub mean_norm_ep: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Group `(key, ism, norm_ep)` triples by key, in key order.
pub fn group_means(scores: &[(u32, Ism, Option<f64>)]) -> Vec<GroupMean> {
    let mut groups: BTreeMap<u32, Vec<(Ism, Option<f64>)>> = BTreeMap::new();
    for &(k, ism, ep) in scores {
        groups.entry(k).or_default().push((ism, ep));
    }
    groups
        .into_iter()
        .map(|(key, v)| {
            let isms: Vec<f64> = v.iter().filter_map(|(i, _)| i.value()).collect();
            let eps: Vec<f64> = v.iter().filter_map(|(_, e)| *e).collect();
            GroupMean {
                key,
                networks: v.len(),
                perfect: v.iter().filter(|(i, _)| i.is_perfect()).count(),
                mean_ism: mean(&isms),
                mean_norm_ep: mean(&eps),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let path = self.dir.join(name);
        let err = |e: csv::Error| io_cause(&path, e);
        let mut w = csv::Writer::from_path(&path).map_err(err).at(Stage::Report)?;
        w.write_record(header).map_err(err).at(Stage::Report)?;
        for r in rows {
            w.write_record(&r).map_err(err).at(Stage::Report)?;
        }
        w.flush().map_err(|e| io_cause(&path, e)).at(Stage::Report)?;
        self.written.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| io_cause(&path, e)).at(Stage::Report)?;
        self.written.push(path);
        Ok(())
    }
}

fn curve_rows(r: &EquityReport) -> Vec<Vec<String>> {
    (0..r.len())
        .map(|i| {
            vec![
                r.months.get(i).map(|m| m.to_string()).unwrap_or_default(),
                match r.positions[i] {
                    Position::Long => "long".into(),
                    Position::Short => "short".into(),
                },
                r.returns[i].to_string(),
                r.eq[i].to_string(),
                r.pe[i].to_string(),
            ]
        })
        .collect()
}

fn group_rows(groups: &[GroupMean]) -> Vec<Vec<String>> {
    groups
        .iter()
        .map(|g| {
            vec![
                g.key.to_string(),
                g.networks.to_string(),
                g.perfect.to_string(),
                opt(g.mean_ism),
                opt(g.mean_norm_ep),
            ]
        })
        .collect()
}

fn group_table(out: &mut String, title: &str, key: &str, groups: &[GroupMean]) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{key:>8} {:>8} {:>8} {:>12} {:>12}", "networks", "perfect", "mean ISM", "mean normEP");
    for g in groups {
        let _ = writeln!(
            out,
            "{:>8} {:>8} {:>8} {:>12} {:>12}",
            g.key,
            g.networks,
            g.perfect,
            g.mean_ism.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
            g.mean_norm_ep.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()),
        );
    }
    let _ = writeln!(out);
}

/// Write divergence, curve and grouped-score reports under `reports/`.
/// Every figure is recomputed from the manifest's stored test predictions.
pub fn report(manifest: &Manifest, run: &RunDir) -> Result<Vec<PathBuf>> {
    manifest.check_complete().at(Stage::Report)?;
    let dir = run.join("reports");
    std::fs::create_dir_all(dir.join("curves"))
        .map_err(|e| io_cause(&dir, e))
        .at(Stage::Report)?;
    let formats = &manifest.config.report.formats;
    let mut w = Writer {
        dir,
        written: Vec::new(),
    };

    let members = manifest.member_entries().at(Stage::Report)?;
    let dates = &manifest.master.test.months;
    let mut votes = Vec::with_capacity(members.len());
    for m in &members {
        let positions = dates
            .iter()
            .map(|d| {
                let i = m.test.months.binary_search(d).map_err(|_| {
                    Cause::IncompleteManifest(format!("{} has no forecast for {d}", m.label))
                })?;
                Ok(Position::from_forecast(m.test.forecast[i], m.test.previous[i]))
            })
            .collect::<std::result::Result<Vec<_>, Cause>>()
            .at(Stage::Report)?;
        votes.push(positions);
    }
    let long_pct = divergence_percentage(&votes).at(Stage::Report)?;

    let mut scores = Vec::with_capacity(manifest.candidates.len());
    for c in &manifest.candidates {
        let e = c.test.evaluate().at(Stage::Report)?;
        scores.push((c.base_set_id as u32, c.lag, e.ism, e.norm_ep()));
    }
    let by_set = group_means(&scores.iter().map(|s| (s.0, s.2, s.3)).collect::<Vec<_>>());
    let by_lag = group_means(&scores.iter().map(|s| (s.1, s.2, s.3)).collect::<Vec<_>>());
    let master = manifest.master.test.evaluate().at(Stage::Report)?;

    if formats.contains(&ReportFormat::Csv) {
        let rows = dates
            .iter()
            .zip(&long_pct)
            .enumerate()
            .map(|(t, (d, pct))| {
                let up = votes.iter().filter(|v| v[t] == Position::Long).count();
                vec![d.to_string(), up.to_string(), votes.len().to_string(), pct.to_string()]
            })
            .collect();
        w.csv("divergence.csv", &["date", "members_long", "members", "long_pct"], rows)?;

        let curve_header = ["date", "position", "return", "eq", "pe"];
        for m in &members {
            let e = m.test.evaluate().at(Stage::Report)?;
            w.csv(&format!("curves/{}.csv", m.label), &curve_header, curve_rows(&e.report))?;
        }
        w.csv("curves/master.csv", &curve_header, curve_rows(&master.report))?;

        let header = ["group", "networks", "perfect", "mean_ism", "mean_norm_ep"];
        let mut header_set = header;
        header_set[0] = "base_set";
        w.csv("base_sets.csv", &header_set, group_rows(&by_set))?;
        let mut header_lag = header;
        header_lag[0] = "lag";
        w.csv("lags.csv", &header_lag, group_rows(&by_lag))?;
    }

    if formats.contains(&ReportFormat::Text) {
        let mut out = String::new();
        let _ = writeln!(out, "run {}  config {}", manifest.created_at, manifest.config_hash);
        let _ = writeln!(out, "frame {} to {}\n", manifest.frame_start, manifest.frame_end);
        let _ = writeln!(
            out,
            "master: ISM {}  normEP {}  over {} test months\n",
            master.ism,
            master.norm_ep().map(|v| format!("{v:.2}%")).unwrap_or_else(|| "-".into()),
            dates.len()
        );
        let _ = writeln!(out, "members");
        for (rank, m) in members.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>3}  {}  ISM {:>10}  normEP {:>7}",
                rank + 1,
                m.label,
                m.ism.to_string(),
                m.norm_ep.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()),
            );
        }
        let _ = writeln!(out);
        group_table(&mut out, "by base set", "set", &by_set);
        group_table(&mut out, "by lag", "lag", &by_lag);
        w.text("summary.txt", &out)?;
    }
    Ok(w.written)
}
