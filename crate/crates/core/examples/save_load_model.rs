//! Train briefly, save the model as JSON, load it back and confirm that the
//! reloaded parameters and predictions are identical.
//!
//! Run with `cargo run --release --example save_load_model`.

use dtcae::trainer::predictions;
use dtcae::{
    build_neighbor_graph, generate_synthetic, load_model, save_model, split_target, train, Matrix, Result, Role,
    SynthSpec, TrainConfig,
};

fn main() -> Result<()> {
    let ds = generate_synthetic(&SynthSpec::default(), 3)?;
    let ds = ds.with_target_roles(&split_target(ds.target().points.len(), 3)?)?;
    let data = ds.training_set()?;
    let columns: Vec<&Matrix> = data.target().iter().map(|p| &p.x).collect();
    let graph = build_neighbor_graph(&columns, 5)?;
    let config = TrainConfig { max_iters: 20, ..TrainConfig::default() };
    let outcome = train(&data, &graph, &config)?;

    let dir = std::env::temp_dir().join(format!("dtcae-model-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("model.json");
    save_model(&outcome.params, &path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    let loaded = load_model(&path)?;
    println!("{} parameters, {size} bytes on disk", loaded.param_count());
    println!("parameters identical after reload: {}", loaded == outcome.params);

    let test = ds.target_points(Role::Test);
    let before = predictions(&outcome.params, &test, ds.target_index())?;
    let after = predictions(&loaded, &test, ds.target_index())?;
    println!("test predictions identical: {} ({:?}...)", before == after, &after[..6.min(after.len())]);
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
