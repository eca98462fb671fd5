//! A single convolutional encoder: forward pass with max-over-time pooling,
//! the recorded argmax positions, and the backward pass for one upstream
//! gradient.
//!
//! Run with `cargo run --example conv_encoder`.

use dtcae::{ConvBlock, Matrix, Result};

fn main() -> Result<()> {
    // Two filters over 2-row inputs with a window of 2 columns.
    let weights = vec![
        1.0, 0.0, // filter 0, row 0
        0.0, 1.0, // filter 0, row 1
        -1.0, -1.0, // filter 1, row 0
        0.5, 0.5, // filter 1, row 1
    ];
    let conv = ConvBlock::from_parts(2, 2, 2, weights, vec![0.0, 0.1])?;

    let x = Matrix::from_rows(&[vec![1.0, -2.0, 3.0, 0.5], vec![0.0, 1.0, 1.0, -1.0]])?;
    let (out, trace) = conv.forward(&x)?;
    println!("input is {}x{}, {} window positions", x.rows(), x.cols(), conv.positions(x.cols()));
    for j in 0..conv.filters() {
        let pre: Vec<String> = (0..trace.pre_activation.cols())
            .map(|k| format!("{:6.2}", trace.pre_activation[(j, k)]))
            .collect();
        println!("filter {j}: pre-activations [{}] -> pooled {:.2} at position {}", pre.join(","), out[j], trace.argmax[j]);
    }

    // A sequence shorter than the window is right-padded with zeros.
    let short = Matrix::from_rows(&[vec![2.0], vec![1.0]])?;
    let (short_out, _) = conv.forward(&short)?;
    println!("length-1 input pools to {short_out:?}");

    // Gradient of  0.5 * ||out||^2  with respect to every parameter.
    let grad = conv.backward(&trace, &out)?;
    println!("d/d bias   = {:?}", grad.bias);
    println!("d/d weight = {:?}", grad.weights);
    println!("d/d input  =");
    for r in 0..grad.input.rows() {
        println!("  {:?}", grad.input.row(r));
    }
    Ok(())
}
