//! Generate the standard synthetic dataset, split the target domain into
//! labelled, unlabelled and test points, and round-trip it through a file.
//!
//! Run with `cargo run --example synth_and_inspect -- [seed]`.

use dtcae::dataset::SplitCounts;
use dtcae::{generate_synthetic, load_dataset, save_dataset, split_target, Result, SynthSpec};

fn main() -> Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let spec = SynthSpec::default();
    let ds = generate_synthetic(&spec, seed)?;

    println!("d = {}, A = {}, Y = {}", ds.input_dim(), ds.attrs(), ds.classes());
    for dom in ds.domains() {
        let mut per_class = vec![0usize; ds.classes()];
        for p in &dom.points {
            per_class[p.label.expect("generated points are labelled")] += 1;
        }
        let lens: Vec<usize> = dom.points.iter().map(|p| p.x.cols()).collect();
        println!(
            "{:>7}: {} points, labels per class {:?}, lengths {}..={}",
            dom.id,
            dom.points.len(),
            per_class,
            lens.iter().min().unwrap(),
            lens.iter().max().unwrap()
        );
    }

    let roles = split_target(ds.target().points.len(), seed)?;
    let counts = SplitCounts::of(&roles);
    println!(
        "target split: {} test, {} labelled, {} unlabelled",
        counts.test, counts.labeled, counts.unlabeled
    );
    let ds = ds.with_target_roles(&roles)?;
    let train = ds.training_set()?;
    println!(
        "training view: {} target points, {} with labels",
        train.target().len(),
        train.labeled_target_count()
    );

    let dir = std::env::temp_dir().join(format!("dtcae-synth-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("synthetic.json");
    save_dataset(&ds, &path)?;
    let back = load_dataset(&path)?;
    println!("saved to {} and reloaded: identical = {}", path.display(), back == ds);
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
