//! Field geometry, node deployment and distance queries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream index of the deployment RNG. Election uses a different stream of
/// the same seed so the two never share draws.
pub(crate) const DEPLOY_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance.
pub fn distance(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Square deployment area `[0, side]^2` with `n` nodes and a base station
/// anywhere in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub side: f64,
    pub bs: Point,
    pub n: usize,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            side: 100.0,
            bs: Point::new(50.0, 50.0),
            n: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Normal,
    ClusterHead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub pos: Point,
    /// Residual energy in joules.
    pub energy: f64,
    /// Rounds left before the node may be elected again; 0 means eligible.
    pub g_counter: u32,
    pub alive: bool,
    pub role: Role,
    pub cluster_of: Option<usize>,
}

impl Node {
    pub fn new(id: usize, pos: Point, energy: f64) -> Self {
        Self {
            id,
            pos,
            energy,
            g_counter: 0,
            alive: energy > 0.0,
            role: Role::Normal,
            cluster_of: None,
        }
    }

    pub fn is_eligible(&self) -> bool {
        self.g_counter == 0
    }

    pub fn is_cluster_head(&self) -> bool {
        self.role == Role::ClusterHead
    }
}

/// Scatter `field.n` nodes uniformly over the field, each with `e0` joules.
pub fn deploy(field: &FieldSpec, e0: f64, seed: u64) -> Vec<Node> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DEPLOY_STREAM);
    (0..field.n)
        .map(|id| {
            let x = rng.random::<f64>() * field.side;
            let y = rng.random::<f64>() * field.side;
            Node::new(id, Point::new(x, y), e0)
        })
        .collect()
}

/// Id of the cluster head closest to `pos`; ties go to the lowest id.
/// `None` when there are no cluster heads.
pub fn nearest_cluster_head<'a, I>(pos: Point, chs: I) -> Option<usize>
where
    I: IntoIterator<Item = &'a Node>,
{
    let mut best: Option<(f64, usize)> = None;
    for ch in chs {
        let d = distance(pos, ch.pos);
        best = match best {
            Some((bd, bid)) if bd < d || (bd == d && bid < ch.id) => Some((bd, bid)),
            _ => Some((d, ch.id)),
        };
    }
    best.map(|(_, id)| id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        let a = Point::new(3.5, -2.0);
        assert_eq!(distance(a, a), 0.0);
        assert_eq!(distance(Point::new(30.0, 40.0), Point::new(0.0, 0.0)), 50.0);
        // 70 * sqrt(2)
        let d = distance(Point::new(50.0, 50.0), Point::new(120.0, 120.0));
        assert!((d - 98.994_949_366_116_65).abs() < 1e-9);
    }

    #[test]
    fn deploy_single_node() {
        let field = FieldSpec {
            n: 1,
            ..FieldSpec::default()
        };
        let nodes = deploy(&field, 0.5, 7);
        assert_eq!(nodes.len(), 1);
        let n = &nodes[0];
        assert!((0.0..=100.0).contains(&n.pos.x) && (0.0..=100.0).contains(&n.pos.y));
        assert_eq!(n.energy, 0.5);
        assert_eq!(n.g_counter, 0);
        assert!(n.alive);
    }

    #[test]
    fn deploy_is_deterministic() {
        let field = FieldSpec::default();
        assert_eq!(deploy(&field, 0.5, 42), deploy(&field, 0.5, 42));
        assert_ne!(deploy(&field, 0.5, 42), deploy(&field, 0.5, 43));
    }

    #[test]
    fn deploy_mean_is_field_center() {
        let field = FieldSpec::default();
        let (mut sx, mut sy, mut count) = (0.0, 0.0, 0.0);
        for seed in 0..1000 {
            for node in deploy(&field, 0.5, seed) {
                sx += node.pos.x;
                sy += node.pos.y;
                count += 1.0;
            }
        }
        assert!((sx / count - 50.0).abs() < 2.0);
        assert!((sy / count - 50.0).abs() < 2.0);
    }

    #[test]
    fn nearest_examples() {
        let ch = |id, x, y| Node::new(id, Point::new(x, y), 1.0);
        let single = [ch(4, 90.0, 90.0)];
        assert_eq!(nearest_cluster_head(Point::new(0.0, 0.0), &single), Some(4));

        let tied = [ch(7, 10.0, 0.0), ch(3, -10.0, 0.0)];
        assert_eq!(nearest_cluster_head(Point::new(0.0, 0.0), &tied), Some(3));

        assert_eq!(nearest_cluster_head(Point::new(0.0, 0.0), &[]), None);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let field = FieldSpec::default();
        for seed in 0..20 {
            let nodes = deploy(&field, 0.5, seed);
            let chs: Vec<Node> = deploy(&FieldSpec { n: 5, ..field }, 0.5, seed + 1000)
                .into_iter()
                .enumerate()
                .map(|(i, mut n)| {
                    n.id = 100 + i;
                    n
                })
                .collect();
            for node in &nodes {
                let mut best = (f64::INFINITY, usize::MAX);
                for c in &chs {
                    let d = distance(node.pos, c.pos);
                    if d < best.0 {
                        best = (d, c.id);
                    }
                }
                assert_eq!(nearest_cluster_head(node.pos, &chs), Some(best.1));
            }
        }
    }

    fn point() -> impl Strategy<Value = Point> {
        (-1e3..1e3f64, -1e3..1e3f64).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in point(), b in point(), c in point()) {
            prop_assert_eq!(distance(a, b), distance(b, a));
            prop_assert!(distance(a, b) >= 0.0);
            prop_assert_eq!(distance(a, b) == 0.0, a == b);
            prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
        }

        #[test]
        fn deploy_respects_bounds(seed in any::<u64>(), side in 1.0..500.0f64, n in 1usize..200) {
            let field = FieldSpec { side, bs: Point::new(0.0, 0.0), n };
            let nodes = deploy(&field, 0.5, seed);
            prop_assert_eq!(nodes.len(), n);
            for node in nodes {
                prop_assert!(node.pos.x >= 0.0 && node.pos.x <= side);
                prop_assert!(node.pos.y >= 0.0 && node.pos.y <= side);
            }
        }

        #[test]
        fn nearest_is_a_member(p in point(), pts in prop::collection::vec(point(), 1..20)) {
            let chs: Vec<Node> = pts.iter().enumerate().map(|(i, q)| Node::new(i * 3, *q, 1.0)).collect();
            let id = nearest_cluster_head(p, &chs).unwrap();
            prop_assert!(chs.iter().any(|c| c.id == id));
        }
    }
}
