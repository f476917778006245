//! The tree-cut tester: `k` sampled subgraphs, one bridge detection each,
//! and the threshold decision on the per-edge counts.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::graph::{VertexId, VertexSide, WeightedMultigraph};
use crate::rng::Seed;
use crate::sim::{RoundStats, Simulator};
use crate::tree::{aggregate, AggValue, BfsTree, BridgeFinder, PreparedTree, MAX_LANES};

use super::schedule::EpsilonSchedule;
use super::DriverError;

/// Fixed-point precision of the per-edge presence probability.
const PROB_BITS: u32 = 32;

/// Per-edge presence probabilities `1 − 2^(−w/κ)` in fixed point.
#[derive(Clone, Debug)]
pub struct LaneSampler {
    fixed: Vec<u64>,
}

impl LaneSampler {
    pub fn new(g: &WeightedMultigraph, kappa: f64) -> Self {
        let fixed = g
            .edges()
            .iter()
            .map(|e| {
                let p = 1.0 - (-(e.w as f64) / kappa).exp2();
                (p * (1u64 << PROB_BITS) as f64).round() as u64
            })
            .collect();
        LaneSampler { fixed }
    }

    /// Draws `lanes` independent samples at once. Edge record `e` gets bit
    /// `l` of `out[e]` set when at least one of its `w(e)` unit copies
    /// survives in lane `l`.
    pub fn sample(&self, lanes: usize, rng: &mut ChaCha8Rng, out: &mut Vec<u64>) {
        let keep = if lanes >= 64 { u64::MAX } else { (1u64 << lanes) - 1 };
        out.clear();
        out.extend(self.fixed.iter().map(|&fixed| {
            if fixed >= 1 << PROB_BITS {
                return keep;
            }
            // Each lane compares a uniform fraction with `fixed`, most
            // significant bit first; a lane is settled at its first differing
            // bit and `open` holds the lanes still tied.
            let (mut m, mut open) = (0u64, keep);
            for j in (0..PROB_BITS).rev() {
                if open == 0 {
                    break;
                }
                let r = rng.next_u64();
                if (fixed >> j) & 1 == 1 {
                    m |= open & !r;
                    open &= r;
                } else {
                    open &= !r;
                }
            }
            m
        }));
    }
}

/// One-off [`LaneSampler::sample`].
pub fn sample_lane_masks(g: &WeightedMultigraph, kappa: f64, lanes: usize, rng: &mut ChaCha8Rng, out: &mut Vec<u64>) {
    LaneSampler::new(g, kappa).sample(lanes, rng, out);
}

/// A tree edge whose count passed the threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeCut {
    pub parent: VertexId,
    pub child: VertexId,
    pub side: VertexSide,
    /// Trials in which the edge was not a bridge.
    pub y_sum: u64,
}

#[derive(Clone, Debug)]
pub struct TestOutcome {
    pub cut: Option<TreeCut>,
    /// Trials run before the decision.
    pub trials: u64,
    pub stats: RoundStats,
}

/// Reusable state for testing many trees of one graph.
pub struct Tester {
    finder: BridgeFinder<MAX_LANES>,
    masks: Vec<u64>,
    counts: Vec<u64>,
    /// Stop as soon as every count exceeds the threshold.
    pub early_exit: bool,
}

impl Tester {
    pub fn new(n: usize) -> Self {
        Tester { finder: BridgeFinder::new(n), masks: Vec::new(), counts: vec![0; n], early_exit: true }
    }

    /// Per-vertex counts `Σ Y` of the tree edge above each vertex after the
    /// last [`run`](Self::run). Zero at the root.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `Test(T, κ)` on the graph behind `sim`. Returns the tree edge with the
    /// smallest count, ties to the smallest `pre` of the child, if that
    /// count is at most `θ`.
    #[allow(clippy::too_many_arguments)]
    pub fn run(
        &mut self,
        sim: &mut Simulator<'_>,
        bfs: &BfsTree,
        prep: &PreparedTree,
        g: &WeightedMultigraph,
        kappa: f64,
        sched: &EpsilonSchedule,
        seed: Seed,
    ) -> Result<TestOutcome, DriverError> {
        if kappa.is_nan() || kappa < 1.0 {
            return Err(DriverError::InvalidKappa(kappa));
        }
        let n = g.n();
        let tree = prep.tree();
        let threshold = sched.threshold_count();
        let mut rng = seed.rng();
        let mut stats = RoundStats::default();
        self.counts.clear();
        self.counts.resize(n, 0);
        let sampler = LaneSampler::new(g, kappa);
        let mut trials = 0u64;
        while trials < sched.k {
            let lanes = (sched.k - trials).min(MAX_LANES as u64) as usize;
            sampler.sample(lanes, &mut rng, &mut self.masks);
            let s = self.finder.run(sim, bfs, prep, &self.masks)?;
            // The lanes are separate instances run back to back.
            let s =
                RoundStats { rounds: s.rounds * lanes as u64, total_messages: s.total_messages * lanes as u64, ..s };
            stats.record("lowhigh", &s);
            let keep = if lanes >= 64 { u64::MAX } else { (1u64 << lanes) - 1 };
            for v in 0..n as VertexId {
                if tree.parent(v).is_some() {
                    let not_bridge = !self.finder.bridge_lanes(prep, v) & keep;
                    self.counts[v as usize] += u64::from(not_bridge.count_ones());
                }
            }
            trials += lanes as u64;
            if self.early_exit && trials < sched.k {
                let (open, s) = self.any_at_most(sim, bfs, prep, threshold)?;
                stats.record("exit-check", &s);
                if !open {
                    return Ok(TestOutcome { cut: None, trials, stats });
                }
            }
        }

        let (open, s) = self.any_at_most(sim, bfs, prep, threshold)?;
        stats.record("select", &s);
        if !open {
            return Ok(TestOutcome { cut: None, trials, stats });
        }
        // Smallest count by binary search on the threshold.
        let (mut lo, mut hi) = (0u64, threshold);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let (open, s) = self.any_at_most(sim, bfs, prep, mid)?;
            stats.record("select", &s);
            if open {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let best = lo;
        let values: Vec<AggValue> = (0..n as VertexId)
            .map(|v| {
                if tree.parent(v).is_some() && self.counts[v as usize] == best {
                    AggValue::some(u64::from(prep.pre()[v as usize]), u64::from(prep.size()[v as usize] - 1))
                } else {
                    AggValue::NONE
                }
            })
            .collect();
        let span = n as u64 - 1;
        let (win, s) = aggregate(sim, bfs, &values, span, span)?;
        stats.record("select", &s);
        // Every vertex learned the winning range and places itself.
        let (first, last) = (win.a as u32, (win.a + win.b) as u32);
        let mask: Vec<bool> = prep.pre().iter().map(|&p| p >= first && p <= last).collect();
        let child = prep.pre().iter().position(|&p| p == first).expect("winner exists") as VertexId;
        let parent = tree.parent(child).expect("winner is not the root");
        let side = VertexSide::from_mask(mask).expect("proper subtree");
        Ok(TestOutcome { cut: Some(TreeCut { parent, child, side, y_sum: best }), trials, stats })
    }

    /// Whether some tree edge has a count of at most `bound`, as learned by
    /// every vertex through a one-bit aggregate.
    fn any_at_most(
        &self,
        sim: &mut Simulator<'_>,
        bfs: &BfsTree,
        prep: &PreparedTree,
        bound: u64,
    ) -> Result<(bool, RoundStats), DriverError> {
        let tree = prep.tree();
        let values: Vec<AggValue> = (0..self.counts.len() as VertexId)
            .map(|v| AggValue::flag(tree.parent(v).is_some() && self.counts[v as usize] <= bound))
            .collect();
        let (agg, s) = aggregate(sim, bfs, &values, 0, 0)?;
        Ok((agg.present, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn lane_masks_follow_the_presence_law() {
        let g = WeightedMultigraph::new(3, vec![Edge::new(0, 1, 1), Edge::new(1, 2, 3), Edge::new(0, 2, 6)]).unwrap();
        let mut rng = Seed(3).rng();
        let mut out = Vec::new();
        let mut hits = [0u64; 3];
        let batches = 4000;
        for _ in 0..batches {
            sample_lane_masks(&g, 3.0, 64, &mut rng, &mut out);
            for (h, m) in hits.iter_mut().zip(&out) {
                *h += u64::from(m.count_ones());
            }
        }
        for (e, &h) in g.edges().iter().zip(&hits) {
            let want = 1.0 - (-(e.w as f64) / 3.0).exp2();
            let got = h as f64 / (64 * batches) as f64;
            assert!((got - want).abs() < 0.01, "w = {}: {got} vs {want}", e.w);
        }
    }

    #[test]
    fn partial_batches_leave_high_lanes_empty() {
        let edges = (0..7).map(|v| Edge::new(v, v + 1, 50)).collect();
        let g = WeightedMultigraph::new(8, edges).unwrap();
        let mut out = Vec::new();
        sample_lane_masks(&g, 1.0, 5, &mut Seed(1).rng(), &mut out);
        assert_eq!(out, vec![0b11111; 7]);
    }
}
