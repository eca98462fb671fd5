//! Compare the analytic sub-gradient with central finite differences on
//! random instances whose pre-activations stay clear of every kink.
//!
//! Run with `cargo run --release --example gradient_check -- [instances]`.

use dtcae::gradcheck::{run_suite, GradCheckSpec};
use dtcae::Result;

fn main() -> Result<()> {
    let instances = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let spec = GradCheckSpec::default();
    let report = run_suite(&spec, instances, 0)?;
    print!("{report}");
    println!(
        "{instances} instances, worst relative error {:.3e}, tolerance {:.0e}: {}",
        report.max_error(),
        spec.tolerance,
        if report.passed(spec.tolerance) { "pass" } else { "FAIL" }
    );
    report.ensure(spec.tolerance)
}
