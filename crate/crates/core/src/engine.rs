//! Round-by-round simulation of one network.
//!
//! Each round runs election, cluster formation and one steady-state frame in
//! which every alive node sends exactly one message. Energy is debited first;
//! nodes whose residual reaches zero are clamped and marked dead at the end
//! of the round.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::election::{elect, ElectionMode, ElectionParams, EnergyEstimator};
use crate::radio::RadioParams;
use crate::topology::{deploy, distance, nearest_cluster_head, FieldSpec, Node, Point, Role};

pub(crate) const ELECTION_STREAM: u64 = 1;

/// Full parameterization of one run. `Default` is the reference setup:
/// 100 nodes on a 100 m square, BS at the center, 0.5 J per node,
/// `popt = 0.05`, 4000-bit messages, [`RadioParams::reference`] radio.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub field: FieldSpec,
    pub radio: RadioParams,
    /// Initial energy per node, J.
    pub e0: f64,
    pub popt: f64,
    pub message_bits: u64,
    pub max_rounds: u64,
    pub mode: ElectionMode,
    pub seed: u64,
    /// Divide the estimated total by the alive count instead of `N`.
    pub n_divisor_tracks_deaths: bool,
    /// A node that cannot afford its last message still sends it (and the
    /// packet is counted). When off, the node sends nothing and is drained.
    pub count_final_packet: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            field: FieldSpec::default(),
            radio: RadioParams::reference(),
            e0: 0.5,
            popt: 0.05,
            message_bits: 4000,
            max_rounds: 50_000,
            mode: ElectionMode::Classic,
            seed: 1,
            n_divisor_tracks_deaths: false,
            count_final_packet: true,
        }
    }
}

/// A violated configuration invariant, keyed by its config-file path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl SimConfig {
    /// Every violated invariant; empty when the config is runnable.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut push = |field: &str, message: String| {
            out.push(ConfigIssue {
                field: field.to_string(),
                message,
            })
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;

        if !positive(self.field.side) {
            push("field.side", format!("must be > 0, got {}", self.field.side));
        }
        if self.field.n == 0 {
            push("field.n", "must be >= 1".into());
        }
        if !self.field.bs.is_finite() {
            push("field.bs", "coordinates must be finite".into());
        }
        for (key, v) in [
            ("radio.E_elec", self.radio.e_elec),
            ("radio.eps_fs", self.radio.eps_fs),
            ("radio.eps_mp", self.radio.eps_mp),
            ("radio.E_DA", self.radio.e_da),
        ] {
            if !positive(v) {
                push(key, format!("must be > 0, got {v}"));
            }
        }
        if let Some(d) = self.radio.threshold_override {
            if !positive(d) {
                push("radio.d_o", format!("must be > 0, got {d}"));
            }
        }
        if !positive(self.e0) {
            push("protocol.E_0", format!("must be > 0, got {}", self.e0));
        }
        if !(self.popt > 0.0 && self.popt < 1.0) {
            push("protocol.P_opt", format!("must lie in (0, 1), got {}", self.popt));
        }
        if self.message_bits == 0 {
            push("protocol.K", "must be >= 1 bit".into());
        }
        if self.max_rounds == 0 {
            push("protocol.max_rounds", "must be >= 1".into());
        }
        out
    }
}

/// Observables at the end of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub alive: usize,
    pub total_residual_energy: f64,
    pub ch_count: usize,
    pub packets_to_bs: u64,
    pub packets_to_ch: u64,
    /// Estimate used by this round's election.
    pub estimated_avg_energy: f64,
}

/// Where a node sends its message this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uplink {
    ClusterHead,
    Member(usize),
    /// No cluster head exists this round; send straight to the base station.
    Direct,
    Inactive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Indexed by node id.
    pub links: Vec<Uplink>,
}

impl Assignment {
    pub fn member_count(&self, ch: usize) -> usize {
        self.links.iter().filter(|l| **l == Uplink::Member(ch)).count()
    }
}

/// Attach every alive normal node to its nearest cluster head. With no
/// cluster heads every alive node goes direct to the base station.
pub fn form_clusters(nodes: &mut [Node], chs: &[usize]) -> Assignment {
    let heads: Vec<Node> = chs.iter().map(|&id| nodes[id].clone()).collect();
    let links = nodes
        .iter_mut()
        .map(|node| {
            if !node.alive {
                node.cluster_of = None;
                return Uplink::Inactive;
            }
            if node.is_cluster_head() {
                node.cluster_of = Some(node.id);
                return Uplink::ClusterHead;
            }
            match nearest_cluster_head(node.pos, &heads) {
                Some(ch) => {
                    node.cluster_of = Some(ch);
                    Uplink::Member(ch)
                }
                None => {
                    node.cluster_of = None;
                    Uplink::Direct
                }
            }
        })
        .collect();
    Assignment { links }
}

/// Energy charged to one node in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Debit {
    pub node: usize,
    /// What the radio model asks for.
    pub cost: f64,
    /// What was actually removed from the battery (after clamping).
    pub applied: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameResult {
    pub debits: Vec<Debit>,
    pub packets_to_bs: u64,
    pub packets_to_ch: u64,
    pub deaths: Vec<usize>,
}

/// One data frame: members send to their heads, heads aggregate and forward,
/// direct nodes send to the base station. Debits are applied and exhausted
/// nodes are marked dead.
pub fn steady_state(
    nodes: &mut [Node],
    assignment: &Assignment,
    radio: &RadioParams,
    bs: Point,
    message_bits: u64,
    count_final_packet: bool,
) -> FrameResult {
    let mut frame = FrameResult::default();
    let positions: Vec<Point> = nodes.iter().map(|n| n.pos).collect();
    let mut members = vec![0u64; nodes.len()];
    for link in &assignment.links {
        if let Uplink::Member(ch) = link {
            members[*ch] += 1;
        }
    }

    for node in nodes.iter_mut() {
        let link = assignment.links[node.id];
        let (cost, to_bs) = match link {
            Uplink::Inactive => continue,
            Uplink::ClusterHead => {
                let d = distance(node.pos, bs);
                (
                    radio.ch_round_unchecked(message_bits, members[node.id] + 1, d),
                    true,
                )
            }
            Uplink::Member(ch) => (
                radio.tx_unchecked(message_bits, distance(node.pos, positions[ch])),
                false,
            ),
            Uplink::Direct => (radio.tx_unchecked(message_bits, distance(node.pos, bs)), true),
        };
        debug_assert!(node.alive);

        let sends = count_final_packet || cost <= node.energy;
        let applied = if cost >= node.energy || !sends {
            node.energy
        } else {
            cost
        };
        node.energy -= applied;
        if sends {
            if to_bs {
                frame.packets_to_bs += 1;
            } else {
                frame.packets_to_ch += 1;
            }
        }
        frame.debits.push(Debit {
            node: node.id,
            cost,
            applied,
        });
    }

    for node in nodes.iter_mut().filter(|n| n.alive) {
        if node.energy <= 0.0 {
            node.energy = 0.0;
            node.alive = false;
            node.role = Role::Normal;
            frame.deaths.push(node.id);
        }
    }
    frame
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub record: RoundRecord,
    pub cluster_heads: Vec<usize>,
    pub assignment: Assignment,
    pub frame: FrameResult,
}

/// A run in progress. [`run`] drives it to completion; tests step it.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    nodes: Vec<Node>,
    estimator: EnergyEstimator,
    election: ElectionParams,
    rng: ChaCha8Rng,
    round: u64,
    packets_to_bs: u64,
    packets_to_ch: u64,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Self {
        let nodes = deploy(&config.field, config.e0, config.seed);
        Self::with_nodes(config, nodes)
    }

    /// Start from an explicit deployment instead of the seeded one.
    pub fn with_nodes(config: &SimConfig, nodes: Vec<Node>) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(ELECTION_STREAM);
        Self {
            config: config.clone(),
            estimator: EnergyEstimator::new(config),
            election: ElectionParams {
                mode: config.mode,
                popt: config.popt,
                bs: config.field.bs,
                d_th: config.radio.distance_threshold(),
            },
            nodes,
            rng,
            round: 0,
            packets_to_bs: 0,
            packets_to_ch: 0,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn estimator(&self) -> &EnergyEstimator {
        &self.estimator
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn alive(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn total_energy(&self) -> f64 {
        self.nodes.iter().map(|n| n.energy).sum()
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.max_rounds || self.alive() == 0
    }

    pub fn step(&mut self) -> RoundOutcome {
        for node in &mut self.nodes {
            node.role = Role::Normal;
            node.cluster_of = None;
        }
        let divisor = if self.config.n_divisor_tracks_deaths {
            self.alive()
        } else {
            self.config.field.n
        };
        let avg = self.estimator.average(divisor);

        let chs = elect(&mut self.nodes, self.round, &self.election, avg, &mut self.rng);
        let assignment = form_clusters(&mut self.nodes, &chs);
        let frame = steady_state(
            &mut self.nodes,
            &assignment,
            &self.config.radio,
            self.config.field.bs,
            self.config.message_bits,
            self.config.count_final_packet,
        );
        self.packets_to_bs += frame.packets_to_bs;
        self.packets_to_ch += frame.packets_to_ch;

        let record = RoundRecord {
            round: self.round,
            alive: self.alive(),
            total_residual_energy: self.total_energy(),
            ch_count: chs.len(),
            packets_to_bs: self.packets_to_bs,
            packets_to_ch: self.packets_to_ch,
            estimated_avg_energy: avg,
        };
        self.estimator.advance();
        self.round += 1;
        RoundOutcome {
            record,
            cluster_heads: chs,
            assignment,
            frame,
        }
    }
}

/// Simulate until every node is dead or `max_rounds` is reached.
pub fn run(config: &SimConfig) -> Vec<RoundRecord> {
    let mut sim = Simulation::new(config);
    let mut records = Vec::new();
    while !sim.is_finished() {
        records.push(sim.step().record);
    }
    records
}
