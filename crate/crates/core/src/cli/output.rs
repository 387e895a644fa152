//! CSV traces, summaries and comparison reports.
//!
//! Every CSV file starts with a `# leach-sim <kind> v1` comment line followed
//! by the header row. Floats are written in Rust's shortest round-trip form.

use std::fmt::Write as _;

use crate::election::ElectionMode;
use crate::engine::RoundRecord;
use crate::metrics::{ComparisonReport, Metric, RunResult, RunSummary};

pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_HEADER: [&str; 7] = [
    "round",
    "alive",
    "total_energy_j",
    "ch_count",
    "packets_to_bs_cum",
    "packets_to_ch_cum",
    "est_avg_energy_j",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "mode",
    "seed",
    "first_death_round",
    "last_death_round",
    "instability_rounds",
    "censored",
    "packets_to_bs",
    "packets_to_ch",
    "mean_ch_per_round",
    "rounds_simulated",
];

pub const COMPARISON_HEADER: [&str; 6] = ["group", "metric", "mean", "std_dev", "min", "max"];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Field { line: u64, message: String },
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
}

fn version_line(kind: &str) -> String {
    format!("# leach-sim {kind} v{SCHEMA_VERSION}\n")
}

fn write_table<const N: usize>(kind: &str, header: [&str; N], rows: Vec<[String; N]>) -> Vec<u8> {
    let mut out = version_line(kind).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        // Writing into a Vec cannot fail.
        w.write_record(header).expect("in-memory csv");
        for row in rows {
            w.write_record(&row).expect("in-memory csv");
        }
        w.flush().expect("in-memory csv");
    }
    out
}

pub fn trace_csv(records: &[RoundRecord]) -> Vec<u8> {
    let rows = records
        .iter()
        .map(|r| {
            [
                r.round.to_string(),
                r.alive.to_string(),
                r.total_residual_energy.to_string(),
                r.ch_count.to_string(),
                r.packets_to_bs.to_string(),
                r.packets_to_ch.to_string(),
                r.estimated_avg_energy.to_string(),
            ]
        })
        .collect();
    write_table("trace", TRACE_HEADER, rows)
}

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn summary_row(mode: ElectionMode, seed: u64, s: &RunSummary) -> [String; 10] {
    [
        mode.to_string(),
        seed.to_string(),
        opt(s.first_death_round),
        s.last_death_round.to_string(),
        opt(s.instability_rounds),
        s.censored.to_string(),
        s.total_packets_to_bs.to_string(),
        s.total_packets_to_ch.to_string(),
        s.mean_ch_per_round.to_string(),
        s.rounds_simulated.to_string(),
    ]
}

pub fn summary_csv(results: &[RunResult]) -> Vec<u8> {
    let rows = results
        .iter()
        .map(|r| summary_row(r.mode, r.seed, &r.summary))
        .collect();
    write_table("summary", SUMMARY_HEADER, rows)
}

/// Per-mode statistics and the paired-delta statistics, one row per metric.
pub fn comparison_csv(report: &ComparisonReport) -> Vec<u8> {
    let mut rows = Vec::new();
    let groups = [
        ("classic", &report.classic.stats),
        ("adaptive", &report.adaptive.stats),
        ("delta", &report.delta_stats),
    ];
    for (group, stats) in groups {
        for (metric, s) in stats.iter() {
            rows.push([
                group.to_string(),
                metric.to_string(),
                s.mean.to_string(),
                s.std_dev.to_string(),
                s.min.to_string(),
                s.max.to_string(),
            ]);
        }
    }
    write_table("comparison", COMPARISON_HEADER, rows)
}

/// One row per seed with `adaptive - classic` for every metric.
pub fn paired_deltas_csv(report: &ComparisonReport) -> Vec<u8> {
    let mut out = version_line("paired_deltas").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["seed".to_string()];
        header.extend(Metric::ALL.iter().map(|m| m.name().to_string()));
        w.write_record(&header).expect("in-memory csv");
        for (seed, row) in report.seeds.iter().zip(&report.paired_deltas) {
            let mut rec = vec![seed.to_string()];
            rec.extend(row.iter().map(|(_, v)| v.to_string()));
            w.write_record(&rec).expect("in-memory csv");
        }
        w.flush().expect("in-memory csv");
    }
    out
}

/// Human-readable digest of a comparison.
pub fn digest(report: &ComparisonReport, title: &str) -> String {
    let mut s = String::new();
    let n = report.seeds.len();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(
        s,
        "seeds: {n} ({}), topology: {}, config: {}",
        seed_range(&report.seeds),
        if report.shared_topology {
            "shared"
        } else {
            "independent"
        },
        report.fingerprint
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<20} {:>14} {:>14} {:>14} {:>10}",
        "metric", "classic", "adaptive", "mean delta", "delta > 0"
    );
    for metric in [
        Metric::StabilityPeriod,
        Metric::Lifetime,
        Metric::InstabilityPeriod,
        Metric::PacketsToBs,
        Metric::PacketsToCh,
        Metric::MeanChPerRound,
    ] {
        let c = report.classic.stat(metric);
        let a = report.adaptive.stat(metric);
        let d = report.delta_stat(metric);
        let positive = report.deltas(metric).iter().filter(|v| **v > 0.0).count();
        let _ = writeln!(
            s,
            "{:<20} {:>14.2} {:>14.2} {:>+14.2} {:>6}/{}",
            metric.name(),
            c.mean,
            a.mean,
            d.mean,
            positive,
            n
        );
    }
    let censored = report
        .classic
        .summaries
        .iter()
        .chain(&report.adaptive.summaries)
        .filter(|s| s.censored)
        .count();
    if censored > 0 {
        let _ = writeln!(
            s,
            "\nwarning: {censored} run(s) hit max_rounds; lifetimes are lower bounds"
        );
    }
    s
}

fn seed_range(seeds: &[u64]) -> String {
    let contiguous = seeds.windows(2).all(|w| w[1] == w[0].wrapping_add(1));
    match (seeds.first(), seeds.last()) {
        (Some(a), Some(b)) if contiguous && seeds.len() > 2 => format!("{a}..={b}"),
        _ => seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
    }
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, CsvError>
where
    T::Err: std::fmt::Display,
{
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    let raw = rec.get(i).ok_or_else(|| CsvError::Field {
        line,
        message: format!("missing column {i}"),
    })?;
    raw.parse().map_err(|e: T::Err| CsvError::Field {
        line,
        message: format!("column {i} `{raw}`: {e}"),
    })
}

fn opt_field(rec: &csv::StringRecord, i: usize) -> Result<Option<u64>, CsvError> {
    match rec.get(i) {
        Some("") => Ok(None),
        _ => field(rec, i).map(Some),
    }
}

fn check_header(r: &mut csv::Reader<&[u8]>, want: &[&str]) -> Result<(), CsvError> {
    let got = r.headers()?;
    if got.iter().ne(want.iter().copied()) {
        return Err(CsvError::Header(got.iter().map(String::from).collect()));
    }
    Ok(())
}

pub fn read_trace_csv(bytes: &[u8]) -> Result<Vec<RoundRecord>, CsvError> {
    let mut r = reader(bytes);
    check_header(&mut r, &TRACE_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(RoundRecord {
                round: field(&rec, 0)?,
                alive: field(&rec, 1)?,
                total_residual_energy: field(&rec, 2)?,
                ch_count: field(&rec, 3)?,
                packets_to_bs: field(&rec, 4)?,
                packets_to_ch: field(&rec, 5)?,
                estimated_avg_energy: field(&rec, 6)?,
            })
        })
        .collect()
}

/// Rows of a summary file: mode, seed and the summary.
pub fn read_summary_csv(bytes: &[u8]) -> Result<Vec<(ElectionMode, u64, RunSummary)>, CsvError> {
    let mut r = reader(bytes);
    check_header(&mut r, &SUMMARY_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            let mode: ElectionMode = field(&rec, 0)?;
            Ok((
                mode,
                field(&rec, 1)?,
                RunSummary {
                    first_death_round: opt_field(&rec, 2)?,
                    last_death_round: field(&rec, 3)?,
                    instability_rounds: opt_field(&rec, 4)?,
                    censored: field(&rec, 5)?,
                    total_packets_to_bs: field(&rec, 6)?,
                    total_packets_to_ch: field(&rec, 7)?,
                    mean_ch_per_round: field(&rec, 8)?,
                    rounds_simulated: field(&rec, 9)?,
                },
            ))
        })
        .collect()
}
