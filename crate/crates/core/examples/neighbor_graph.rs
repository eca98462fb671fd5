//! Build the k-nearest-neighbour graph over target points and evaluate the
//! smoothness penalty it induces for a freshly initialised model.
//!
//! Run with `cargo run --example neighbor_graph -- [k]`.

use dtcae::objective::neighbor_loss;
use dtcae::{build_neighbor_graph, generate_synthetic, split_target, Matrix, Result, SynthSpec, TrainConfig};

fn main() -> Result<()> {
    let k = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let spec = SynthSpec { points: vec![20, 20, 12], ..SynthSpec::default() };
    let ds = generate_synthetic(&spec, 1)?;
    let ds = ds.with_target_roles(&split_target(ds.target().points.len(), 1)?)?;
    let data = ds.training_set()?;

    // Points are compared through the mean of their instance columns.
    let columns: Vec<&Matrix> = data.target().iter().map(|p| &p.x).collect();
    let graph = build_neighbor_graph(&columns, k)?;
    println!("{} target training points, k = {k}, {} undirected edges", graph.len(), graph.edge_count());
    for i in 0..graph.len() {
        let label = data.target()[i].label.map_or("-".to_string(), |c| c.to_string());
        println!("  point {i:>2} (label {label}): neighbours {:?}", graph.neighbors(i));
    }

    let params = TrainConfig::default().init_params(&data)?;
    println!("smoothness penalty at initialisation: {:.6}", neighbor_loss(&params, &data, &graph)?);
    Ok(())
}
