use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution};

use super::{GraphError, WeightedMultigraph};
use crate::rng::Seed;

/// A random subgraph of `base` that keeps each unit parallel edge
/// independently with probability `p`.
#[derive(Clone, Debug)]
pub struct SampledSubgraph<'g> {
    base: &'g WeightedMultigraph,
    multiplicity: Vec<u64>,
    p: f64,
    seed: Seed,
}

impl<'g> SampledSubgraph<'g> {
    /// A subgraph with explicit multiplicities, for tests and oracles.
    pub fn from_multiplicities(base: &'g WeightedMultigraph, multiplicity: Vec<u64>) -> Result<Self, GraphError> {
        if multiplicity.len() != base.m() {
            return Err(GraphError::InvalidSide(format!(
                "expected {} multiplicities, got {}",
                base.m(),
                multiplicity.len()
            )));
        }
        for (e, &k) in base.edges().iter().zip(&multiplicity) {
            if k > e.w {
                return Err(GraphError::WeightOutOfRange { u: e.u, v: e.v, w: k, max: e.w });
            }
        }
        Ok(SampledSubgraph { base, multiplicity, p: f64::NAN, seed: Seed(0) })
    }

    /// The empty subgraph of `base`.
    pub fn empty(base: &'g WeightedMultigraph) -> Self {
        SampledSubgraph { base, multiplicity: vec![0; base.m()], p: 0.0, seed: Seed(0) }
    }

    pub fn base(&self) -> &'g WeightedMultigraph {
        self.base
    }

    /// Multiplicity per edge record of `base`, in `base.edges()` order.
    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicity
    }

    pub fn multiplicity(&self, edge: usize) -> u64 {
        self.multiplicity[edge]
    }

    pub fn total(&self) -> u64 {
        self.multiplicity.iter().sum()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    /// Whether every vertex is reachable through edges of positive multiplicity.
    pub fn is_connected(&self) -> bool {
        let n = self.base.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut parts = n;
        for (e, &k) in self.base.edges().iter().zip(&self.multiplicity) {
            if k > 0 {
                let (a, b) = (find(&mut parent, e.u as usize), find(&mut parent, e.v as usize));
                if a != b {
                    parent[a] = b;
                    parts -= 1;
                }
            }
        }
        parts == 1
    }
}

/// Draws `Binomial(w, p)`.
pub fn binomial<R: Rng + ?Sized>(rng: &mut R, w: u64, p: f64) -> u64 {
    if p >= 1.0 {
        return w;
    }
    if p <= 0.0 || w == 0 {
        return 0;
    }
    if w <= 64 {
        // Bernoulli trials against a 64-bit threshold.
        let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
        return (0..w).filter(|_| rng.next_u64() < threshold).count() as u64;
    }
    Binomial::new(w, p).expect("p in (0,1)").sample(rng)
}

/// Fills `out` with one `Binomial(w(e), p)` draw per edge of `g`.
pub fn sample_multiplicities<R: RngCore>(g: &WeightedMultigraph, p: f64, rng: &mut R, out: &mut Vec<u64>) {
    out.clear();
    if p >= 1.0 {
        out.extend(g.edges().iter().map(|e| e.w));
        return;
    }
    let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
    out.extend(g.edges().iter().map(|e| {
        if e.w == 1 {
            u64::from(rng.next_u64() < threshold)
        } else {
            binomial(rng, e.w, p)
        }
    }));
}

/// Samples every unit edge of `g` independently with probability `p`.
pub fn sample_subgraph(g: &WeightedMultigraph, p: f64, seed: Seed) -> Result<SampledSubgraph<'_>, GraphError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = seed.stream("sample").rng();
    let mut multiplicity = Vec::with_capacity(g.m());
    sample_multiplicities(g, p, &mut rng, &mut multiplicity);
    Ok(SampledSubgraph { base: g, multiplicity, p, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Edge, GraphModel};

    fn k3() -> WeightedMultigraph {
        WeightedMultigraph::new(3, vec![Edge::new(0, 1, 1), Edge::new(1, 2, 1), Edge::new(0, 2, 1)]).unwrap()
    }

    fn fifty_edges() -> WeightedMultigraph {
        let model = GraphModel::RandomConnected { n: 20, extra_edges: 31, max_edge_weight: 9 };
        let g = generate(&model, Seed(5)).unwrap().graph;
        assert_eq!(g.m(), 50);
        g
    }

    #[test]
    fn certainty_keeps_everything() {
        let g = fifty_edges();
        let s = sample_subgraph(&g, 1.0, Seed(3)).unwrap();
        assert!(s.multiplicities().iter().zip(g.edges()).all(|(&k, e)| k == e.w));
        assert_eq!(s.total(), g.m_multi());
    }

    #[test]
    fn rejects_bad_probability() {
        let g = k3();
        for p in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(sample_subgraph(&g, p, Seed(0)), Err(GraphError::InvalidProbability(_))));
        }
    }

    #[test]
    fn replayable() {
        let g = k3();
        let a = sample_subgraph(&g, 0.5, Seed(42)).unwrap();
        let b = sample_subgraph(&g, 0.5, Seed(42)).unwrap();
        assert_eq!(a.multiplicities(), b.multiplicities());
    }

    #[test]
    fn unit_edge_keep_rate() {
        let g = WeightedMultigraph::new(2, vec![Edge::new(0, 1, 1)]).unwrap();
        let trials = 100_000u64;
        let kept: u64 = (0..trials).map(|s| sample_subgraph(&g, 0.5, Seed(s)).unwrap().total()).sum();
        let rate = kept as f64 / trials as f64;
        assert!((rate - 0.5).abs() <= 0.01, "keep rate {rate}");
    }

    #[test]
    fn mean_sampled_weight_and_bounds() {
        let g = fifty_edges();
        let m = g.m_multi();
        for p in [0.1, 0.5, 0.9] {
            let trials = 10_000u64;
            let mut sum = 0u64;
            for s in 0..trials {
                let t = sample_subgraph(&g, p, Seed(s)).unwrap().total();
                assert!(t < m);
                sum += t;
            }
            let mean = sum as f64 / trials as f64;
            let expect = p * m as f64;
            assert!((mean - expect).abs() <= 0.01 * expect, "p={p} mean={mean} expected={expect}");
        }
    }

    #[test]
    fn binomial_large_weights() {
        let mut rng = Seed(9).rng();
        let n = 20_000;
        let mean = (0..n).map(|_| binomial(&mut rng, 1000, 0.3)).sum::<u64>() as f64 / n as f64;
        assert!((mean - 300.0).abs() < 1.0, "{mean}");
        assert_eq!(binomial(&mut rng, 17, 1.0), 17);
    }
}
