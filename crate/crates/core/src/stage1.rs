//! Stage one: compact placement with a B*-tree floorplan representation
//! annealed under a normalized wirelength/area cost.
//!
//! A B*-tree encodes a left-bottom-compacted floorplan: packing places the
//! root at the origin, a node's left child immediately to its right, and a
//! node's right child above it at the same x, with every block dropped onto
//! the skyline of previously placed blocks. Simulated annealing explores the
//! tree space with rotate / relocate / swap moves and returns the cheapest
//! legal arrangement, translated to the middle of the interposer so stage
//! two has room to work in every direction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Chiplet, Placement, LEGAL_EPS};
use crate::netlist::{hpwl, Net};
use crate::norm::MinMax;

/// One node of a [`BStarTree`]; `chiplet` is the payload, children are node
/// indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BStarNode {
    pub chiplet: usize,
    pub rotated: bool,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

/// A binary tree over all chiplets encoding a compacted floorplan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BStarTree {
    pub nodes: Vec<BStarNode>,
    pub root: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PackError {
    /// The packed bounding box does not fit the interposer.
    Overflow { width: f64, height: f64, interposer_size: f64 },
}

impl std::fmt::Display for PackError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            PackError::Overflow { width, height, interposer_size } => write!(
                f,
                "packed floorplan spans {width:.3} x {height:.3} mm, exceeding the {interposer_size} mm interposer"
            ),
        }
    }
}

impl std::error::Error for PackError {}

impl BStarTree {
    /// Left-child chain over the given chiplet order: packs to a single row.
    pub fn chain(order: &[usize]) -> Self {
        assert!(!order.is_empty(), "a tree needs at least one node");
        let n = order.len();
        let mut nodes: Vec<BStarNode> = (0..n)
            .map(|chiplet| BStarNode { chiplet, rotated: false, left: None, right: None })
            .collect();
        for pair in order.windows(2) {
            nodes[pair[0]].left = Some(pair[1]);
        }
        BStarTree { nodes, root: order[0] }
    }

    /// Chain over a uniformly shuffled chiplet order.
    pub fn random_chain(n: usize, rng: &mut impl Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        BStarTree::chain(&order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether every node is reachable from the root exactly once.
    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.root];
        let mut count = 0;
        while let Some(i) = stack.pop() {
            if i >= self.len() || seen[i] {
                return false;
            }
            seen[i] = true;
            count += 1;
            stack.extend(self.nodes[i].left);
            stack.extend(self.nodes[i].right);
        }
        count == self.len()
    }

    /// Place every chiplet per the tree structure, anchored at the origin.
    /// The result may overhang an undersized interposer; [`BStarTree::pack`]
    /// adds the bounds check.
    fn layout(&self, chiplets: &[Chiplet], interposer_size: f64) -> Placement {
        assert_eq!(chiplets.len(), self.len(), "one node per chiplet");
        let n = self.len();
        let mut placed_chiplets = chiplets.to_vec();
        let mut centers = vec![(0.0, 0.0); n];
        // Footprints already placed, for skyline queries.
        let mut skyline: Vec<(f64, f64, f64)> = Vec::with_capacity(n); // (x_min, x_max, y_max)

        // Preorder walk; children carry their fixed x. The left child goes
        // right after the parent's right edge, the right child stacks at the
        // parent's own x.
        let mut stack = vec![(self.root, 0.0f64)];
        while let Some((i, x)) = stack.pop() {
            let node = self.nodes[i];
            let mut chiplet = chiplets[node.chiplet];
            chiplet.rotated = node.rotated;
            let (w, h) = chiplet.effective_dims();
            let y = skyline
                .iter()
                .filter(|&&(sx_min, sx_max, _)| sx_min < x + w - LEGAL_EPS && x < sx_max - LEGAL_EPS)
                .map(|&(_, _, sy_max)| sy_max)
                .fold(0.0f64, f64::max);
            skyline.push((x, x + w, y + h));
            placed_chiplets[node.chiplet] = chiplet;
            centers[node.chiplet] = (x + w / 2.0, y + h / 2.0);
            // Right child is pushed first so the left subtree unwinds first.
            if let Some(r) = node.right {
                stack.push((r, x));
            }
            if let Some(l) = node.left {
                stack.push((l, x + w));
            }
        }
        Placement::new(placed_chiplets, centers, interposer_size)
    }

    /// Pack the tree onto an interposer of the given size.
    ///
    /// The packing itself is always overlap-free; the only failure mode is a
    /// bounding box larger than the interposer.
    pub fn pack(&self, chiplets: &[Chiplet], interposer_size: f64) -> Result<Placement, PackError> {
        let placement = self.layout(chiplets, interposer_size);
        let bb = placement.bounding_box();
        if bb.x_max > interposer_size + LEGAL_EPS || bb.y_max > interposer_size + LEGAL_EPS {
            return Err(PackError::Overflow {
                width: bb.x_max,
                height: bb.y_max,
                interposer_size,
            });
        }
        Ok(placement)
    }

    /// Apply one random structural move — rotate a node, relocate a node, or
    /// swap two payloads — and return the perturbed tree.
    pub fn perturb(&self, rng: &mut impl Rng) -> BStarTree {
        let mut tree = self.clone();
        let n = tree.len();
        if n < 2 {
            // Only rotation is meaningful on a single node.
            tree.nodes[tree.root].rotated ^= true;
            return tree;
        }
        match rng.random_range(0..3u8) {
            0 => {
                let i = rng.random_range(0..n);
                tree.nodes[i].rotated ^= true;
            }
            1 => tree.relocate(rng),
            _ => {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let (ci, ri) = (tree.nodes[i].chiplet, tree.nodes[i].rotated);
                tree.nodes[i].chiplet = tree.nodes[j].chiplet;
                tree.nodes[i].rotated = tree.nodes[j].rotated;
                tree.nodes[j].chiplet = ci;
                tree.nodes[j].rotated = ri;
            }
        }
        debug_assert!(tree.is_valid());
        tree
    }

    /// Delete-and-reinsert: bubble a random node's payload down to a leaf,
    /// detach that leaf, and splice it back under a random surviving node.
    fn relocate(&mut self, rng: &mut impl Rng) {
        let n = self.len();
        let mut s = rng.random_range(0..n);
        loop {
            let node = self.nodes[s];
            let child = match (node.left, node.right) {
                (Some(l), Some(r)) => {
                    if rng.random::<bool>() {
                        l
                    } else {
                        r
                    }
                }
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => break,
            };
            let (cs, rs) = (self.nodes[s].chiplet, self.nodes[s].rotated);
            self.nodes[s].chiplet = self.nodes[child].chiplet;
            self.nodes[s].rotated = self.nodes[child].rotated;
            self.nodes[child].chiplet = cs;
            self.nodes[child].rotated = rs;
            s = child;
        }
        // Detach the leaf from its parent (s cannot be the root: n >= 2 and
        // the bubble-down always ends below the root or at a non-root leaf).
        let parent = (0..n)
            .find(|&p| self.nodes[p].left == Some(s) || self.nodes[p].right == Some(s))
            .expect("a non-root leaf has a parent");
        if self.nodes[parent].left == Some(s) {
            self.nodes[parent].left = None;
        } else {
            self.nodes[parent].right = None;
        }
        // Reinsert under a random remaining node, pushing that node's child
        // down one level on a random side of s.
        let mut target = rng.random_range(0..n - 1);
        if target >= s {
            target += 1;
        }
        let as_left = rng.random::<bool>();
        let displaced = if as_left {
            self.nodes[target].left.replace(s)
        } else {
            self.nodes[target].right.replace(s)
        };
        if rng.random::<bool>() {
            self.nodes[s].left = displaced;
            self.nodes[s].right = None;
        } else {
            self.nodes[s].left = None;
            self.nodes[s].right = displaced;
        }
    }
}

/// Stage-one annealing schedule. These are free parameters (they only shape
/// the search, not the cost definition), sized for sub-minute runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageOneConfig {
    pub initial_temperature: f64,
    pub decay: f64,
    pub moves_per_level: usize,
    pub min_temperature: f64,
}

impl Default for StageOneConfig {
    fn default() -> Self {
        StageOneConfig {
            initial_temperature: 1.0,
            decay: 0.95,
            moves_per_level: 200,
            min_temperature: 1e-4,
        }
    }
}

/// Normalized stage-one cost: equal-weighted wirelength and bounding-box
/// area, each scaled against the extremes seen so far in the run.
pub fn stage_one_cost(wirelength: f64, area: f64, l_extremes: &MinMax, a_extremes: &MinMax) -> f64 {
    0.5 * l_extremes.normalized(wirelength) + 0.5 * a_extremes.normalized(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOneError {
    /// The annealer never packed a floorplan that fits the interposer.
    Infeasible,
}

impl std::fmt::Display for StageOneError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            StageOneError::Infeasible => {
                write!(f, "no legal packing found within the stage-one schedule")
            }
        }
    }
}

impl std::error::Error for StageOneError {}

/// What stage one evaluated and what it kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOneReport {
    /// Wirelength, area and legality of every evaluated packing, in order;
    /// entry 0 is the initial random chain.
    pub evaluated: Vec<(f64, f64, bool)>,
    pub levels: usize,
    /// Wirelength and area of the returned placement.
    pub best: (f64, f64),
    /// Cost of the returned placement under the end-of-run extremes.
    pub best_cost: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub a_min: f64,
    pub a_max: f64,
}

impl StageOneReport {
    /// Cost of an evaluated entry under the end-of-run extremes.
    pub fn final_cost(&self, wirelength: f64, area: f64) -> f64 {
        let mut l = MinMax::new();
        l.update(self.l_min);
        l.update(self.l_max);
        let mut a = MinMax::new();
        a.update(self.a_min);
        a.update(self.a_max);
        stage_one_cost(wirelength, area, &l, &a)
    }
}

/// Anneal B*-trees from a random chain and return the cheapest legal
/// placement, centered on the interposer.
///
/// Every perturbed tree is evaluated and annealed through — including
/// packings that overhang the interposer, which keeps the walk connected
/// when wide initial chains cannot reach a legal shape in one move — but
/// only legal packings are eligible to be returned. Costs use running
/// extremes, so the winner is chosen by re-scoring all legal candidates
/// against the end-of-run extremes.
pub fn run_stage_one(
    chiplets: &[Chiplet],
    nets: &[Net],
    interposer_size: f64,
    config: &StageOneConfig,
    seed: u64,
) -> Result<(Placement, StageOneReport), StageOneError> {
    assert!(!chiplets.is_empty(), "stage one needs at least one chiplet");
    for (i, c) in chiplets.iter().enumerate() {
        assert_eq!(c.id, i, "chiplets must be passed in id order");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = BStarTree::random_chain(chiplets.len(), &mut rng);

    let mut l_extremes = MinMax::new();
    let mut a_extremes = MinMax::new();
    let mut evaluated: Vec<(f64, f64, bool)> = Vec::new();
    // Pareto front of legal packings by (wirelength, area); the final-cost
    // minimizer always lies on it because the cost is increasing in both.
    let mut front: Vec<(f64, f64, Placement)> = Vec::new();

    let consider = |placement: Placement,
                        l_extremes: &mut MinMax,
                        a_extremes: &mut MinMax,
                        evaluated: &mut Vec<(f64, f64, bool)>,
                        front: &mut Vec<(f64, f64, Placement)>|
     -> (f64, f64) {
        let bb = placement.bounding_box();
        let legal = bb.x_max <= interposer_size + LEGAL_EPS && bb.y_max <= interposer_size + LEGAL_EPS;
        let wirelength = hpwl(&placement, nets);
        let area = bb.area();
        l_extremes.update(wirelength);
        a_extremes.update(area);
        evaluated.push((wirelength, area, legal));
        if legal {
            let dominated = front.iter().any(|&(fl, fa, _)| fl <= wirelength && fa <= area);
            if !dominated {
                front.retain(|&(fl, fa, _)| !(wirelength <= fl && area <= fa));
                front.push((wirelength, area, placement));
            }
        }
        (wirelength, area)
    };

    let initial = tree.layout(chiplets, interposer_size);
    let (mut cur_l, mut cur_a) =
        consider(initial, &mut l_extremes, &mut a_extremes, &mut evaluated, &mut front);

    let mut temperature = config.initial_temperature;
    let mut levels = 0;
    while temperature > config.min_temperature {
        levels += 1;
        for _ in 0..config.moves_per_level {
            let candidate = tree.perturb(&mut rng);
            let layout = candidate.layout(chiplets, interposer_size);
            let (cand_l, cand_a) =
                consider(layout, &mut l_extremes, &mut a_extremes, &mut evaluated, &mut front);
            let delta = stage_one_cost(cand_l, cand_a, &l_extremes, &a_extremes)
                - stage_one_cost(cur_l, cur_a, &l_extremes, &a_extremes);
            if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
                tree = candidate;
                cur_l = cand_l;
                cur_a = cand_a;
            }
        }
        temperature *= config.decay;
    }

    if front.is_empty() {
        return Err(StageOneError::Infeasible);
    }
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, &(l, a, _)) in front.iter().enumerate() {
        let cost = stage_one_cost(l, a, &l_extremes, &a_extremes);
        if cost < best_cost {
            best_cost = cost;
            best = i;
        }
    }
    let (best_l, best_a, winner) = front.swap_remove(best);

    // Translate the compact block to the middle of the interposer.
    let bb = winner.bounding_box();
    let dx = interposer_size / 2.0 - (bb.x_min + bb.x_max) / 2.0;
    let dy = interposer_size / 2.0 - (bb.y_min + bb.y_max) / 2.0;
    let mut centered = winner;
    for c in &mut centered.centers {
        c.0 += dx;
        c.1 += dy;
    }

    let report = StageOneReport {
        evaluated,
        levels,
        best: (best_l, best_a),
        best_cost,
        l_min: l_extremes.min().unwrap(),
        l_max: l_extremes.max().unwrap(),
        a_min: a_extremes.min().unwrap(),
        a_max: a_extremes.max().unwrap(),
    };
    Ok((centered, report))
}
