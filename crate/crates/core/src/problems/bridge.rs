//! Brownian-bridge path construction in bisection order, so the low-index
//! Gaussian inputs determine the low-frequency motion of the path.

use std::collections::VecDeque;

/// Builds `B(T/d), B(2T/d), ..., B(T)` for one Brownian-motion instance from
/// `d` standard normals.
///
/// The endpoint `B(T)` is set first from `z[0]`; midpoints then follow in
/// level (van der Corput) order, each conditioned on its bracketing pair.
/// For non-power-of-two `d` the finest level fills left to right, consuming
/// the remaining normals in index order.
pub fn brownian_bridge_path(t_final: f64, d: usize, z: &[f64]) -> Vec<f64> {
    assert!(d >= 1);
    assert_eq!(z.len(), d, "need exactly d normal inputs");
    let dt = t_final / d as f64;
    // values[k] = B(k * T / d); index 0 pinned at zero
    let mut values = vec![0.0; d + 1];
    values[d] = t_final.sqrt() * z[0];
    let mut next = 1;
    let mut queue = VecDeque::from([(0usize, d)]);
    while let Some((lo, hi)) = queue.pop_front() {
        if hi - lo < 2 {
            continue;
        }
        let mid = (lo + hi) / 2;
        let (a, b) = ((mid - lo) as f64, (hi - mid) as f64);
        let mean = values[lo] + a / (a + b) * (values[hi] - values[lo]);
        let sd = (a * b / (a + b) * dt).sqrt();
        values[mid] = mean + sd * z[next];
        next += 1;
        queue.push_back((lo, mid));
        queue.push_back((mid, hi));
    }
    debug_assert_eq!(next, d);
    values.remove(0);
    values
}
