use crate::error::{ensure, Result};

/// `dim D = 4r(n − r) − 2` for the traceless representing set of rank-≤r states.
pub fn representing_dimension(n: usize, r: usize) -> Result<usize> {
    ensure!(n >= 2, "dimension must be at least 2, got {n}");
    ensure!(r >= 1 && 2 * r <= n, "rank must lie in 1..={}, got {r}", n / 2);
    Ok(4 * r * (n - r) - 2)
}

/// Smallest `m ≥ n` with `k(m − 1) ≥ 4r(n − r) − 1`.
pub fn threshold_outcomes(n: usize, r: usize, k: usize) -> Result<usize> {
    ensure!(k >= 1, "need at least one POVM");
    let need = representing_dimension(n, r)? + 1;
    Ok((1 + need.div_ceil(k)).max(n))
}

/// Smallest `k` with `k(m − 1) ≥ 4r(n − r) − 1`.
pub fn threshold_settings(n: usize, r: usize, m: usize) -> Result<usize> {
    ensure!(m >= n, "rank-one POVMs on C^{n} need m >= n outcomes, got {m}");
    let need = representing_dimension(n, r)? + 1;
    Ok(need.div_ceil(m - 1))
}

/// Smallest frame size `m` exceeding `dim D = 4r(n − r) − 1` for the sphere variant.
pub fn frame_threshold(n: usize, r: usize) -> Result<usize> {
    Ok(representing_dimension(n, r)? + 2)
}

/// Smallest number of observables `m > dim D`.
pub fn local_observable_threshold(n: usize, r: usize) -> Result<usize> {
    Ok(representing_dimension(n, r)? + 1)
}
