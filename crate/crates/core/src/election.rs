//! Cluster-head election.
//!
//! Classic LEACH elects an eligible node when a uniform draw falls below the
//! rotating threshold `T(s)`. The adaptive policy adds an energy gate for
//! nodes whose own distance to the base station is within the radio
//! crossover distance: such a node must also hold more than the estimated
//! average network energy, and the estimate must still be positive. Nodes
//! farther than the crossover fall back to the classic rule.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::engine::SimConfig;
use crate::topology::{distance, Node, Point, Role};

/// Multiplier of `side / 2` giving the expected cluster-head to base-station
/// distance used by the round-energy estimate.
pub const EXPECTED_BS_DISTANCE_FACTOR: f64 = 0.765;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElectionMode {
    Classic,
    Adaptive,
}

impl ElectionMode {
    pub const ALL: [ElectionMode; 2] = [ElectionMode::Classic, ElectionMode::Adaptive];

    pub fn as_str(&self) -> &'static str {
        match self {
            ElectionMode::Classic => "classic",
            ElectionMode::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for ElectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classic" | "leach" => Ok(ElectionMode::Classic),
            "adaptive" | "enhanced" => Ok(ElectionMode::Adaptive),
            other => Err(format!(
                "unknown election mode `{other}` (expected classic or adaptive)"
            )),
        }
    }
}

/// Rounds per epoch, `round(1 / popt)`, never less than one.
pub fn epoch_length(popt: f64) -> u64 {
    ((1.0 / popt).round() as u64).max(1)
}

/// Election threshold `T(s)` for round `round`. Zero for ineligible nodes.
pub fn leach_threshold(popt: f64, round: u64, eligible: bool) -> f64 {
    debug_assert!(popt > 0.0 && popt < 1.0, "popt out of (0, 1): {popt}");
    if !eligible {
        return 0.0;
    }
    let phase = (round % epoch_length(popt)) as f64;
    let denom = 1.0 - popt * phase;
    // round(1/p) <= 1/p + 1/2, so p * (epoch - 1) <= 1 - p/2 < 1.
    assert!(denom > 0.0, "threshold denominator must stay positive");
    popt / denom
}

/// A-priori network energy spent per round:
/// `L (2 N E_elec + N E_DA + k eps_mp d_bs^4 + N eps_fs d_ch^2)`
/// with `k = N popt` expected cluster heads and expected-value distances
/// `d_bs = 0.765 side / 2`, `d_ch = side / sqrt(2 pi k)`.
pub fn expected_round_energy(config: &SimConfig) -> f64 {
    let radio = &config.radio;
    let bits = config.message_bits as f64;
    let n = config.field.n as f64;
    let k = expected_cluster_count(config);
    let d_bs = expected_bs_distance(config.field.side);
    let d_ch = expected_ch_distance(config.field.side, k);
    bits * (2.0 * n * radio.e_elec
        + n * radio.e_da
        + k * radio.eps_mp * d_bs.powi(4)
        + n * radio.eps_fs * d_ch * d_ch)
}

pub fn expected_cluster_count(config: &SimConfig) -> f64 {
    config.field.n as f64 * config.popt
}

pub fn expected_bs_distance(side: f64) -> f64 {
    EXPECTED_BS_DISTANCE_FACTOR * side / 2.0
}

pub fn expected_ch_distance(side: f64, clusters: f64) -> f64 {
    side / (2.0 * PI * clusters).sqrt()
}

/// Running estimate of the network's residual energy.
///
/// The total starts at `N E_0` and drops by the expected round energy once
/// per round; `r_max = E_total / E_round` is the round at which it hits zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEstimator {
    pub e_total_initial: f64,
    pub e_total_remaining: f64,
    pub r_max: f64,
    pub e_round: f64,
    pub current_round: u64,
    /// Low-order bits lost by the running subtraction (Kahan compensation).
    compensation: f64,
}

impl EnergyEstimator {
    pub fn new(config: &SimConfig) -> Self {
        Self::from_parts(config.field.n as f64 * config.e0, expected_round_energy(config))
    }

    pub fn from_parts(e_total: f64, e_round: f64) -> Self {
        assert!(e_round > 0.0, "round energy must be positive");
        Self {
            e_total_initial: e_total,
            e_total_remaining: e_total,
            r_max: e_total / e_round,
            e_round,
            current_round: 0,
            compensation: 0.0,
        }
    }

    /// Average energy per node at the current round, from the running total.
    pub fn average(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.e_total_remaining.max(0.0) / n as f64
    }

    /// Closed form `E_total (1 - r / r_max) / n`, clamped at zero.
    pub fn closed_form_average(&self, round: f64, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        (self.e_total_initial * (1.0 - round / self.r_max)).max(0.0) / n as f64
    }

    /// Move to the next round.
    pub fn advance(&mut self) {
        self.current_round += 1;
        if self.e_total_remaining <= 0.0 {
            return;
        }
        // Compensated so thousands of decrements stay within a few ulps.
        let y = -self.e_round - self.compensation;
        let t = self.e_total_remaining + y;
        self.compensation = (t - self.e_total_remaining) - y;
        self.e_total_remaining = t.max(0.0);
    }
}

pub fn estimated_average_energy(estimator: &EnergyEstimator, n: usize) -> f64 {
    estimator.average(n)
}

/// Fixed inputs of one election.
#[derive(Debug, Clone, Copy)]
pub struct ElectionParams {
    pub mode: ElectionMode,
    pub popt: f64,
    pub bs: Point,
    /// Crossover distance deciding whether the base station counts as inside.
    pub d_th: f64,
}

/// Run one election over `nodes` (ordered by id) and return the elected ids.
///
/// Every alive eligible node consumes exactly one draw, in id order, whatever
/// the mode and whether or not the energy gate passes. Winners become cluster
/// heads with `g_counter = epoch - 1`; alive ineligible nodes count down.
/// The first round of every epoch makes all nodes eligible again.
pub fn elect<R: Rng + ?Sized>(
    nodes: &mut [Node],
    round: u64,
    params: &ElectionParams,
    avg_energy: f64,
    rng: &mut R,
) -> Vec<usize> {
    let epoch = epoch_length(params.popt);
    let threshold = leach_threshold(params.popt, round, true);
    let new_epoch = round.is_multiple_of(epoch);
    let mut elected = Vec::new();
    for node in nodes.iter_mut().filter(|n| n.alive) {
        if new_epoch {
            node.g_counter = 0;
        }
        if !node.is_eligible() {
            node.g_counter -= 1;
            continue;
        }
        let u: f64 = rng.random();
        let wins = u < threshold
            && match params.mode {
                ElectionMode::Classic => true,
                ElectionMode::Adaptive => {
                    if distance(node.pos, params.bs) <= params.d_th {
                        avg_energy > 0.0 && node.energy > avg_energy
                    } else {
                        true
                    }
                }
            };
        if wins {
            node.role = Role::ClusterHead;
            node.g_counter = (epoch - 1) as u32;
            elected.push(node.id);
        }
    }
    elected
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{deploy, FieldSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn threshold_examples() {
        assert!((leach_threshold(0.05, 0, true) - 0.05).abs() < 1e-15);
        assert!((leach_threshold(0.05, 19, true) - 1.0).abs() < 1e-12);
        assert!((leach_threshold(0.05, 39, true) - 1.0).abs() < 1e-12);
        assert_eq!(leach_threshold(0.05, 7, false), 0.0);
        assert_eq!(leach_threshold(0.3, 2, false), 0.0);
    }

    #[test]
    fn threshold_denominator_positive_for_any_popt() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            for r in 0..epoch_length(p) {
                assert!(leach_threshold(p, r, true) > 0.0);
            }
        }
    }

    #[test]
    fn round_energy_low_power_radio() {
        let mut cfg = SimConfig::default();
        cfg.radio.e_elec = 5e-9;
        assert!((expected_cluster_count(&cfg) - 5.0).abs() < 1e-12);
        assert!((expected_bs_distance(100.0) - 38.25).abs() < 1e-12);
        assert!((expected_ch_distance(100.0, 5.0) - 17.841_241_161_527_71).abs() < 1e-9);
        // Term-by-term evaluation done independently before the build.
        let e = expected_round_energy(&cfg);
        assert!((e - 0.007_328_893_893_586_724).abs() < 1e-9 * e, "{e}");
    }

    #[test]
    fn round_energy_default_radio() {
        let e = expected_round_energy(&SimConfig::default());
        assert!((e - 0.043_328_893_893_586_726).abs() < 1e-9 * e, "{e}");
    }

    #[test]
    fn round_energy_electronics_only() {
        let mut cfg = SimConfig::default();
        cfg.radio.eps_fs = 0.0;
        cfg.radio.eps_mp = 0.0;
        cfg.radio.e_da = 0.0;
        let want = 4000.0 * 2.0 * 100.0 * 50e-9;
        assert!((expected_round_energy(&cfg) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn round_energy_linear_in_bits() {
        let mut cfg = SimConfig::default();
        let one = expected_round_energy(&cfg);
        cfg.message_bits *= 2;
        assert!((expected_round_energy(&cfg) - 2.0 * one).abs() < 1e-15);
    }

    #[test]
    fn estimator_examples() {
        let cfg = SimConfig::default();
        let est = EnergyEstimator::new(&cfg);
        assert!((estimated_average_energy(&est, 100) - 0.5).abs() < 1e-15);
        assert!((est.r_max - 1_153.964_375_891_919_4).abs() < 1e-6);
        assert_eq!(est.closed_form_average(est.r_max, 100), 0.0);
        assert!((est.closed_form_average(est.r_max / 2.0, 100) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn estimator_iterative_matches_closed_form() {
        let cfg = SimConfig::default();
        let mut est = EnergyEstimator::new(&cfg);
        let mut round = 0u64;
        while est.e_total_remaining > 0.0 {
            let closed = est.closed_form_average(round as f64, 100);
            let iter = est.average(100);
            if closed > 0.0 {
                assert!(
                    (iter - closed).abs() <= 1e-9 * closed,
                    "round {round}: {iter} vs {closed}"
                );
            }
            est.advance();
            round += 1;
        }
        assert_eq!(est.average(100), 0.0);
        assert_eq!(round, est.r_max.ceil() as u64);
    }

    fn params(mode: ElectionMode, bs: Point) -> ElectionParams {
        ElectionParams {
            mode,
            popt: 0.05,
            bs,
            d_th: crate::radio::RadioParams::reference().distance_threshold(),
        }
    }

    #[test]
    fn ineligible_nodes_never_elected() {
        let mut nodes = deploy(&FieldSpec::default(), 0.5, 1);
        for n in &mut nodes {
            n.g_counter = 5;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = params(ElectionMode::Classic, Point::new(50.0, 50.0));
        assert!(elect(&mut nodes, 19, &p, 0.5, &mut rng).is_empty());
        assert!(nodes.iter().all(|n| n.g_counter == 4));
    }

    #[test]
    fn epoch_end_elects_every_eligible_node() {
        let mut nodes = deploy(&FieldSpec::default(), 0.5, 1);
        nodes[3].g_counter = 2;
        nodes[9].alive = false;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = params(ElectionMode::Classic, Point::new(50.0, 50.0));
        let chs = elect(&mut nodes, 39, &p, 0.5, &mut rng);
        assert_eq!(chs.len(), 98);
        assert!(!chs.contains(&3) && !chs.contains(&9));
        assert!(chs.iter().all(|&id| nodes[id].g_counter == 19));
    }

    #[test]
    fn adaptive_inside_gate_blocks_low_energy() {
        let mut nodes = deploy(&FieldSpec::default(), 0.5, 1);
        for n in nodes.iter_mut().filter(|n| n.id % 2 == 0) {
            n.energy = 0.1;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = params(ElectionMode::Adaptive, Point::new(50.0, 50.0));
        // T = 1 at epoch end: only the gate can refuse.
        let chs = elect(&mut nodes, 19, &p, 0.3, &mut rng);
        assert_eq!(chs.len(), 50);
        assert!(chs.iter().all(|id| id % 2 == 1));
        // Non-positive estimate elects nobody inside.
        let mut fresh = deploy(&FieldSpec::default(), 0.5, 1);
        assert!(elect(&mut fresh, 19, &p, 0.0, &mut rng).is_empty());
    }

    #[test]
    fn adaptive_mixes_modes_per_node() {
        // BS at (140, 50): nodes to the east are within d_th, western ones are not.
        let bs = Point::new(140.0, 50.0);
        let mut nodes = deploy(&FieldSpec::default(), 0.5, 3);
        for n in &mut nodes {
            n.energy = 0.1;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = params(ElectionMode::Adaptive, bs);
        let chs = elect(&mut nodes, 19, &p, 0.3, &mut rng);
        let far: Vec<usize> = nodes
            .iter()
            .filter(|n| distance(n.pos, bs) > p.d_th)
            .map(|n| n.id)
            .collect();
        assert!(!far.is_empty() && far.len() < 100);
        assert_eq!(chs, far);
    }

    #[test]
    fn adaptive_far_bs_equals_classic() {
        let bs = Point::new(400.0, 400.0);
        for seed in 0..5 {
            let mut a = deploy(&FieldSpec::default(), 0.5, seed);
            let mut b = a.clone();
            let mut ra = ChaCha8Rng::seed_from_u64(seed);
            let mut rb = ChaCha8Rng::seed_from_u64(seed);
            for round in 0..60 {
                for n in a.iter_mut().chain(b.iter_mut()) {
                    n.role = Role::Normal;
                }
                let ca = elect(&mut a, round, &params(ElectionMode::Classic, bs), 0.5, &mut ra);
                let cb = elect(&mut b, round, &params(ElectionMode::Adaptive, bs), 1e9, &mut rb);
                assert_eq!(ca, cb);
            }
        }
    }

    #[test]
    fn epoch_rotation_and_mean_count() {
        // 500 epochs of 20 rounds = 10,000 elections at full energy.
        let mut nodes = deploy(&FieldSpec::default(), 0.5, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = params(ElectionMode::Classic, Point::new(50.0, 50.0));
        let mut total = 0usize;
        for epoch in 0..500u64 {
            let mut times = [0u32; 100];
            for r in 0..20 {
                let chs = elect(&mut nodes, epoch * 20 + r, &p, 0.5, &mut rng);
                total += chs.len();
                for id in chs {
                    times[id] += 1;
                }
            }
            assert!(times.iter().all(|&t| t == 1), "epoch {epoch}: {times:?}");
        }
        let mean = total as f64 / 10_000.0;
        assert!((mean - 5.0).abs() <= 0.75, "{mean}");
    }

    #[test]
    fn mode_parse() {
        assert_eq!("Classic".parse::<ElectionMode>(), Ok(ElectionMode::Classic));
        assert_eq!("adaptive".parse::<ElectionMode>(), Ok(ElectionMode::Adaptive));
        assert!("both".parse::<ElectionMode>().is_err());
    }
}
