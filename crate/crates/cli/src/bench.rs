use congest_mincut::graph::{generate, sample_subgraph, GraphModel, InternalModel};
use congest_mincut::mst::{distributed_mst, EdgeLoad};
use congest_mincut::sim::{Simulator, Topology};
use congest_mincut::tree::{build_bfs, compute_low_high, find_bridges, prepare_tree};
use congest_mincut::{NetworkConfig, Seed};

use crate::report::{BenchReport, BenchRow, SCHEMA_VERSION};
use crate::{write_json, BenchArgs, Failure, Family};

fn model(family: Family, n: usize) -> Result<GraphModel, Failure> {
    Ok(match family {
        Family::Cliquepath => {
            let k = (n as f64).sqrt().floor().max(1.0) as usize;
            GraphModel::CliquePath { k, len: n.div_ceil(k) }
        }
        Family::Planted => {
            if n < 10 {
                return Err(Failure::usage("planted sizes start at 10"));
            }
            GraphModel::PlantedCut { n_a: n / 2, n_b: n - n / 2, internal: InternalModel::Clique, crossing: 3 }
        }
        Family::Random => GraphModel::RandomConnected { n, extra_edges: 2 * n, max_edge_weight: 1 },
    })
}

/// One row per size and seed: the MST of the unloaded graph is labelled,
/// then tested against a half-density sample.
pub fn run(a: &BenchArgs) -> Result<(), Failure> {
    if a.sizes.is_empty() || a.seeds == 0 {
        return Err(Failure::usage("bench needs at least one size and one seed"));
    }
    let mut rows = Vec::new();
    for &n in &a.sizes {
        let model = model(a.family, n)?;
        for seed in 0..a.seeds {
            let g = generate(&model, Seed(seed))?.graph;
            let topo = Topology::new(&g);
            let mut config = NetworkConfig::for_n(g.n());
            config.seed = Seed(seed);
            let mut sim = Simulator::new(&topo, config)?;
            let (bfs, _) = build_bfs(&mut sim)?;
            let weights: Vec<u64> = g.edges().iter().map(|e| e.w).collect();
            let (tree, _, mst) =
                distributed_mst(&mut sim, &bfs, &EdgeLoad::new(&weights)).map_err(|e| Failure::usage(e.to_string()))?;
            let prep = prepare_tree(&mut sim, &bfs, &tree).map_err(|e| Failure::usage(e.to_string()))?;
            let sample = sample_subgraph(&g, 0.5, Seed(seed).stream("bench"))?;
            let (_, lh) =
                compute_low_high(&mut sim, &bfs, &prep, &sample).map_err(|e| Failure::usage(e.to_string()))?;
            let (_, br) = find_bridges(&mut sim, &bfs, &prep, &sample).map_err(|e| Failure::usage(e.to_string()))?;
            let s = prep.stats();
            rows.push(BenchRow {
                family: format!("{:?}", a.family).to_lowercase(),
                n: g.n(),
                diameter: g.diameter(),
                sqrt_n: (g.n() as f64).sqrt(),
                seed,
                fragments: prep.decomposition().count(),
                decompose: s.phase("decompose"),
                preorder: s.phase_prefix("preorder/"),
                lowhigh: lh.rounds,
                bridges: br.rounds,
                max_bits: [mst.max_bits_per_edge_round, s.max_bits_per_edge_round, lh.max_bits_per_edge_round]
                    .into_iter()
                    .max()
                    .unwrap_or(0),
                budget: config.bits_per_message,
            });
        }
    }
    match &a.json {
        Some(path) => write_json(path, &BenchReport { schema_version: SCHEMA_VERSION, rows })?,
        None => {
            println!(
                "{:>6} {:>4} {:>6} {:>4} {:>5} {:>9} {:>8} {:>7} {:>7}",
                "n", "D", "sqrt", "seed", "frags", "decompose", "preorder", "lowhigh", "bridges"
            );
            for r in &rows {
                println!(
                    "{:>6} {:>4} {:>6.2} {:>4} {:>5} {:>9} {:>8} {:>7} {:>7}",
                    r.n, r.diameter, r.sqrt_n, r.seed, r.fragments, r.decompose, r.preorder, r.lowhigh, r.bridges
                );
            }
        }
    }
    Ok(())
}
