//! Junction flow allocation.
//!
//! A first-order node model in the style of Tampère et al.: incoming flows
//! obey FIFO with respect to their turning ratios, and scarce receiving
//! capacity is shared in proportion to incoming link capacities. A pure
//! diverge reduces to the demand-proportional FIFO diverge and a pure merge
//! to the capacity-proportional merge.

/// Computes the flow released by each incoming link.
///
/// `ratios[i][j]` is the share of incoming `i` bound for outgoing `j`; rows
/// with positive sending flow sum to one. `receiving[j]` may be infinite.
/// Returns `None` if the allocation fails to settle.
pub fn node_flows(sending: &[f64], priority: &[f64], ratios: &[Vec<f64>], receiving: &[f64]) -> Option<Vec<f64>> {
    let n_in = sending.len();
    let n_out = receiving.len();
    let mut flow = vec![0.0f64; n_in];
    let mut open: Vec<bool> = sending.iter().map(|&s| s > 0.0).collect();
    let mut remaining = receiving.to_vec();

    for _ in 0..=n_in {
        if !open.iter().any(|&o| o) {
            return flow.iter().all(|f| f.is_finite()).then_some(flow);
        }
        // most restrictive outgoing link
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n_out {
            if !remaining[j].is_finite() {
                continue;
            }
            let weight: f64 = (0..n_in).filter(|&i| open[i]).map(|i| priority[i] * ratios[i][j]).sum();
            if weight <= 0.0 {
                continue;
            }
            let a = remaining[j].max(0.0) / weight;
            if best.is_none_or(|(_, b)| a < b) {
                best = Some((j, a));
            }
        }
        let Some((j, a)) = best else {
            for i in 0..n_in {
                if open[i] {
                    flow[i] = sending[i];
                    open[i] = false;
                }
            }
            continue;
        };
        let competing: Vec<usize> = (0..n_in).filter(|&i| open[i] && ratios[i][j] > 0.0).collect();
        let unconstrained: Vec<usize> = competing.iter().copied().filter(|&i| sending[i] <= a * priority[i]).collect();
        let settled = if unconstrained.is_empty() {
            for &i in &competing {
                flow[i] = a * priority[i];
            }
            competing
        } else {
            for &i in &unconstrained {
                flow[i] = sending[i];
            }
            unconstrained
        };
        for &i in &settled {
            open[i] = false;
            for (r, ratio) in remaining.iter_mut().zip(&ratios[i]) {
                *r -= ratio * flow[i];
            }
        }
    }
    None
}
