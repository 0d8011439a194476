//! The reduced-precision exponential: 10 explicit mantissa bits around
//! every `exp`, and how far it lands from the f64 value.
//!
//!     cargo run --release --example reduced_precision

use olive_sim::precision::{round_reduced_precision, Arith, F32ApproxExp, F32, F64};

fn main() {
    for x in [
        1.0f32,
        1.0 + 2f32.powi(-11),
        1.0 + 3.0 * 2f32.powi(-12),
        0.1,
        3.7152,
        -61.25,
    ] {
        println!("{x:>14.9} -> {:>14.9}", round_reduced_precision(x));
    }
    println!("\n     x   rel. error f32   rel. error approx-exp");
    for x in [-14.6f64, -5.0, -1.0, -0.01, 0.5, 3.0, 8.0] {
        let exact = F64::exp(x);
        let f32_err = (F32::exp(x as f32) as f64 - exact).abs() / exact;
        let approx_err = (F32ApproxExp::exp(x as f32) as f64 - exact).abs() / exact;
        println!("{x:>6} {f32_err:>16.3e} {approx_err:>22.3e}");
    }
}
