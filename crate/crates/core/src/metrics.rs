//! Run summaries and multi-seed protocol comparison.

use std::fmt;

use rayon::prelude::*;

use crate::election::ElectionMode;
use crate::engine::{run, RoundRecord, SimConfig};
use crate::topology::Node;

/// Per-run performance figures. All times are in rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Round of the first death; `None` if every node survived the run.
    pub first_death_round: Option<u64>,
    /// Round in which the last node died, or `rounds_simulated` when the
    /// run hit the round cap (see `censored`).
    pub last_death_round: u64,
    /// `last_death_round - first_death_round` when a node died.
    pub instability_rounds: Option<u64>,
    pub total_packets_to_bs: u64,
    pub total_packets_to_ch: u64,
    pub mean_ch_per_round: f64,
    pub rounds_simulated: u64,
    /// Nodes were still alive when the run stopped.
    pub censored: bool,
}

impl RunSummary {
    /// Stability period; a censored run without deaths reports its length.
    pub fn stability_period(&self) -> u64 {
        self.first_death_round.unwrap_or(self.rounds_simulated)
    }

    pub fn lifetime(&self) -> u64 {
        self.last_death_round
    }

    pub fn instability_period(&self) -> u64 {
        self.instability_rounds.unwrap_or(0)
    }
}

/// Reduce one run's records. `initial_nodes` is the deployed node count.
///
/// Panics on an empty record list.
pub fn summarize(records: &[RoundRecord], initial_nodes: usize) -> RunSummary {
    let last = records.last().expect("summarize needs at least one record");
    let first_death_round = records.iter().find(|r| r.alive < initial_nodes).map(|r| r.round);
    let all_dead = records.iter().find(|r| r.alive == 0).map(|r| r.round);
    let rounds_simulated = records.len() as u64;
    let censored = all_dead.is_none();
    let last_death_round = all_dead.unwrap_or(rounds_simulated);

    let live: Vec<&RoundRecord> = records.iter().filter(|r| r.alive > 0).collect();
    let mean_ch_per_round = if live.is_empty() {
        0.0
    } else {
        live.iter().map(|r| r.ch_count as f64).sum::<f64>() / live.len() as f64
    };

    RunSummary {
        first_death_round,
        last_death_round,
        instability_rounds: first_death_round.map(|f| last_death_round - f),
        total_packets_to_bs: last.packets_to_bs,
        total_packets_to_ch: last.packets_to_ch,
        mean_ch_per_round,
        rounds_simulated,
        censored,
    }
}

/// Scalar views of a [`RunSummary`] that get aggregated across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    StabilityPeriod,
    Lifetime,
    InstabilityPeriod,
    PacketsToBs,
    PacketsToCh,
    MeanChPerRound,
    RoundsSimulated,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::StabilityPeriod,
        Metric::Lifetime,
        Metric::InstabilityPeriod,
        Metric::PacketsToBs,
        Metric::PacketsToCh,
        Metric::MeanChPerRound,
        Metric::RoundsSimulated,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::StabilityPeriod => "stability_period",
            Metric::Lifetime => "lifetime",
            Metric::InstabilityPeriod => "instability_period",
            Metric::PacketsToBs => "packets_to_bs",
            Metric::PacketsToCh => "packets_to_ch",
            Metric::MeanChPerRound => "mean_ch_per_round",
            Metric::RoundsSimulated => "rounds_simulated",
        }
    }

    pub fn value(&self, s: &RunSummary) -> f64 {
        match self {
            Metric::StabilityPeriod => s.stability_period() as f64,
            Metric::Lifetime => s.lifetime() as f64,
            Metric::InstabilityPeriod => s.instability_period() as f64,
            Metric::PacketsToBs => s.total_packets_to_bs as f64,
            Metric::PacketsToCh => s.total_packets_to_ch as f64,
            Metric::MeanChPerRound => s.mean_ch_per_round,
            Metric::RoundsSimulated => s.rounds_simulated as f64,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "no values to aggregate");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_dev: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// One completed run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub mode: ElectionMode,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    pub summary: RunSummary,
}

/// Run every config, at most `jobs` at a time. Results keep input order.
pub fn run_batch(configs: &[SimConfig], jobs: usize) -> Vec<RunResult> {
    let one = |cfg: &SimConfig| {
        let records = run(cfg);
        let summary = summarize(&records, cfg.field.n);
        RunResult {
            mode: cfg.mode,
            seed: cfg.seed,
            records,
            summary,
        }
    };
    if jobs <= 1 {
        return configs.iter().map(one).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| configs.par_iter().map(one).collect()),
        Err(_) => configs.iter().map(one).collect(),
    }
}

/// Seed used for the adaptive run of a pair when topologies are not shared.
pub fn independent_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub mode: ElectionMode,
    pub summaries: Vec<RunSummary>,
    pub stats: Vec<(Metric, Stats)>,
}

impl ModeReport {
    fn new(mode: ElectionMode, summaries: Vec<RunSummary>) -> Self {
        let stats = Metric::ALL
            .iter()
            .map(|m| {
                let values: Vec<f64> = summaries.iter().map(|s| m.value(s)).collect();
                (*m, Stats::of(&values))
            })
            .collect();
        Self {
            mode,
            summaries,
            stats,
        }
    }

    pub fn stat(&self, metric: Metric) -> Stats {
        self.stats
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|(_, s)| *s)
            .expect("every metric is aggregated")
    }
}

/// Classic vs adaptive over a seed list.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub seeds: Vec<u64>,
    pub shared_topology: bool,
    pub fingerprint: String,
    pub classic: ModeReport,
    pub adaptive: ModeReport,
    /// Per seed, per metric: adaptive minus classic.
    pub paired_deltas: Vec<Vec<(Metric, f64)>>,
    pub delta_stats: Vec<(Metric, Stats)>,
}

impl ComparisonReport {
    pub fn delta_stat(&self, metric: Metric) -> Stats {
        self.delta_stats
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|(_, s)| *s)
            .expect("every metric is aggregated")
    }

    pub fn deltas(&self, metric: Metric) -> Vec<f64> {
        self.paired_deltas
            .iter()
            .map(|row| row.iter().find(|(m, _)| *m == metric).map(|(_, v)| *v).unwrap())
            .collect()
    }

    pub fn mode(&self, mode: ElectionMode) -> &ModeReport {
        match mode {
            ElectionMode::Classic => &self.classic,
            ElectionMode::Adaptive => &self.adaptive,
        }
    }
}

/// Stable digest of every config field except mode and seed.
pub fn config_fingerprint(config: &SimConfig) -> String {
    let mut c = config.clone();
    c.mode = ElectionMode::Classic;
    c.seed = 0;
    // FNV-1a, 64 bit
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in format!("{c:?}").bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// The config each (mode, seed) pair runs with, classic first then adaptive.
pub fn comparison_configs(config: &SimConfig, seeds: &[u64], shared_topology: bool) -> Vec<SimConfig> {
    let mut out = Vec::with_capacity(seeds.len() * 2);
    for mode in ElectionMode::ALL {
        for &seed in seeds {
            let seed = if mode == ElectionMode::Adaptive && !shared_topology {
                independent_seed(seed)
            } else {
                seed
            };
            out.push(SimConfig {
                mode,
                seed,
                ..config.clone()
            });
        }
    }
    out
}

/// Build the report from the results of [`comparison_configs`].
pub fn comparison_from_results(
    config: &SimConfig,
    seeds: &[u64],
    shared_topology: bool,
    results: &[RunResult],
) -> ComparisonReport {
    assert_eq!(
        results.len(),
        seeds.len() * 2,
        "one classic and one adaptive run per seed"
    );
    let (classic, adaptive) = results.split_at(seeds.len());
    let classic: Vec<RunSummary> = classic.iter().map(|r| r.summary.clone()).collect();
    let adaptive: Vec<RunSummary> = adaptive.iter().map(|r| r.summary.clone()).collect();

    let paired_deltas: Vec<Vec<(Metric, f64)>> = classic
        .iter()
        .zip(&adaptive)
        .map(|(c, a)| {
            Metric::ALL
                .iter()
                .map(|m| (*m, m.value(a) - m.value(c)))
                .collect()
        })
        .collect();
    let delta_stats = Metric::ALL
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let v: Vec<f64> = paired_deltas.iter().map(|row| row[i].1).collect();
            (*m, Stats::of(&v))
        })
        .collect();

    ComparisonReport {
        seeds: seeds.to_vec(),
        shared_topology,
        fingerprint: config_fingerprint(config),
        classic: ModeReport::new(ElectionMode::Classic, classic),
        adaptive: ModeReport::new(ElectionMode::Adaptive, adaptive),
        paired_deltas,
        delta_stats,
    }
}

/// Run both modes on every seed and aggregate. Panics on an empty seed list.
pub fn compare(config: &SimConfig, seeds: &[u64], shared_topology: bool, jobs: usize) -> ComparisonReport {
    assert!(!seeds.is_empty(), "compare needs at least one seed");
    let configs = comparison_configs(config, seeds, shared_topology);
    let results = run_batch(&configs, jobs);
    comparison_from_results(config, seeds, shared_topology, &results)
}

/// Node positions a run starts from, for checking topology sharing.
pub fn initial_topology(config: &SimConfig) -> Vec<Node> {
    crate::topology::deploy(&config.field, config.e0, config.seed)
}
