use crate::error::{Error, Result};

use super::BoxBounds;

/// Euclidean projection onto the probability simplex `{x : sum(x) = 1, x >= 0}`
/// by sorting and thresholding.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    project_simplex_in_place(&mut out)?;
    Ok(out)
}

pub fn project_simplex_in_place(v: &mut [f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector onto the simplex"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite entry in simplex projection input"));
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut threshold = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - threshold).max(0.0);
    }
    Ok(())
}

/// Componentwise clamp onto `[l, u]`.
pub fn project_box(v: &[f64], bounds: &BoxBounds) -> Vec<f64> {
    let mut out = v.to_vec();
    project_box_in_place(&mut out, bounds);
    out
}

pub fn project_box_in_place(v: &mut [f64], bounds: &BoxBounds) {
    assert_eq!(v.len(), bounds.len(), "box dimension mismatch");
    for ((x, &l), &u) in v.iter_mut().zip(bounds.lower()).zip(bounds.upper()) {
        *x = x.clamp(l, u);
    }
}

/// Proximal map of `kappa * ||.||_1`: `sign(v) * max(|v| - kappa, 0)`.
pub fn soft_threshold(v: &[f64], kappa: f64) -> Vec<f64> {
    debug_assert!(kappa >= 0.0);
    v.iter()
        .map(|&x| x.signum() * (x.abs() - kappa).max(0.0))
        .map(|x| if x == 0.0 { 0.0 } else { x })
        .collect()
}
