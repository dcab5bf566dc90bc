//! Shortest round-trip float formatting for text outputs.

/// Plain decimal for moderate magnitudes, scientific otherwise; both forms
/// parse back to the identical `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
