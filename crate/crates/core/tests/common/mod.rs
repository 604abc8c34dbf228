//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::Rng;
use vmsdta::dnl::DnlResult;
use vmsdta::network::{GridSpec, OdPair};
use vmsdta::scenario::{corridor, CorridorSpec};
use vmsdta::{DepartureProfile, Scenario};

pub const VF: f64 = 12.5;

/// Corridor with a narrow middle link and dt = 1 s.
pub fn bottleneck_corridor(n_links: usize, bottleneck_cap: f64) -> Scenario {
    let mut links = vec![(500.0, 0.5); n_links];
    links[n_links / 2].1 = bottleneck_cap;
    let spec =
        CorridorSpec { links, grid: GridSpec { t0: 0.0, tf: 2400.0, dt: 1.0 }, demand: 0.0, desired_arrival: 2000.0 };
    corridor(&spec).validate().expect("corridor validates")
}

/// Random piecewise-constant departure rates over `[0, 1200)` made of a few pulses.
pub fn random_rates(rng: &mut impl Rng, n_bins: usize) -> Vec<f64> {
    let mut rates = vec![0.0; n_bins];
    for _ in 0..rng.gen_range(1..=4) {
        let start = rng.gen_range(0..1000);
        let len = rng.gen_range(20..300);
        let rate = rng.gen_range(0.05..0.7);
        for r in rates.iter_mut().skip(start).take(len) {
            *r += rate;
        }
    }
    rates
}

/// Scalar point-queue model of a corridor: a server of rate `min(C_i, C_{i+1})`
/// at every node (the origin serves at `C_1`, the sink at `C_n`) separated by
/// free-flow travel. Integrated with a fine fixed step.
pub struct PointQueueOracle {
    step: f64,
    /// cumulative departures and final exits, sampled every `step`
    departures: Vec<f64>,
    exits: Vec<f64>,
}

impl PointQueueOracle {
    pub fn new(lengths: &[f64], capacities: &[f64], rates: &[f64], dt: f64, horizon: f64) -> Self {
        let step = 0.02;
        let sub = (dt / step).round() as usize;
        let n = (horizon / step).round() as usize + 1;
        let mut departures = vec![0.0; n];
        for i in 1..n {
            let bin = (i - 1) / sub;
            departures[i] = departures[i - 1] + rates.get(bin).copied().unwrap_or(0.0) * step;
        }
        let mut servers = vec![capacities[0]];
        for w in capacities.windows(2) {
            servers.push(w[0].min(w[1]));
        }
        servers.push(capacities[capacities.len() - 1]);

        let mut arrivals = departures.clone();
        let mut out = Vec::new();
        for (s, &rate) in servers.iter().enumerate() {
            out = vec![0.0; n];
            for i in 1..n {
                out[i] = arrivals[i].min(out[i - 1] + rate * step);
            }
            if s < lengths.len() {
                let lag = (lengths[s] / VF / step).round() as usize;
                arrivals = (0..n).map(|i| if i >= lag { out[i - lag] } else { 0.0 }).collect();
            }
        }
        PointQueueOracle { step, departures, exits: out }
    }

    /// Travel time of the vehicle departing at `t`, or `None` if it has not
    /// arrived by the horizon.
    pub fn travel_time(&self, t: f64) -> Option<f64> {
        let level = interp(&self.departures, self.step, t);
        let j = self.exits.partition_point(|&v| v < level - 1e-12);
        if j >= self.exits.len() {
            return None;
        }
        if j == 0 {
            return None;
        }
        let a = self.exits[j - 1];
        let b = self.exits[j];
        let frac = if b > a { (level - a) / (b - a) } else { 1.0 };
        let exit = (j as f64 - 1.0 + frac) * self.step;
        Some(exit - t)
    }
}

fn interp(v: &[f64], step: f64, t: f64) -> f64 {
    let x = t / step;
    if x <= 0.0 {
        return v[0];
    }
    if x >= (v.len() - 1) as f64 {
        return v[v.len() - 1];
    }
    let i = (x.floor() as usize).min(v.len() - 2);
    let f = x - i as f64;
    v[i] + f * (v[i + 1] - v[i])
}

/// Vehicles departed minus vehicles arrived, on links and in origin queues.
pub fn conservation_error(result: &DnlResult) -> f64 {
    (result.total_departed() - result.total_arrived() - result.residual()).abs()
}

/// Checks FIFO on every link: exit times are nondecreasing in entry time and
/// strictly increasing wherever vehicles enter. Returns the first violation.
pub fn fifo_violation(result: &DnlResult) -> Option<String> {
    let grid = *result.grid();
    for (l, rec) in result.links().iter().enumerate() {
        if !rec.upstream.is_nondecreasing() || !rec.downstream.is_nondecreasing() {
            return Some(format!("link {} has a decreasing cumulative curve", rec.id));
        }
        let up = rec.upstream.values();
        let mut prev = result.exit_time(l, grid.time(0)).value;
        for k in 1..=grid.n_bins() {
            let mu = result.exit_time(l, grid.time(k)).value;
            let entered = up[k] > up[k - 1] + 1e-12;
            if mu < prev - 1e-9 || (entered && mu <= prev) {
                return Some(format!("link {} exit time not increasing at bin {k}: {prev} -> {mu}", rec.id));
            }
            prev = mu;
        }
    }
    None
}

/// Exact projection of `c` onto `{x >= 0, Σx·dt = q}` by enumerating supports.
pub fn projection_oracle(c: &[f64], q: f64, dt: f64) -> Vec<f64> {
    let n = c.len();
    assert!(n <= 16);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let eta = (q / dt - support.iter().map(|&i| c[i]).sum::<f64>()) / support.len() as f64;
        let mut x = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            x[i] = c[i] + eta;
            if x[i] < -1e-12 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let obj: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, x));
        }
    }
    best.expect("some support is feasible when q > 0").1.into_iter().map(|v| v.max(0.0)).collect()
}

/// Per-O-D demand error of a profile.
pub fn demand_error(h: &DepartureProfile, od: &OdPair) -> f64 {
    (h.od_volume(od) - od.demand).abs()
}

/// Link exit time recomputed from the raw cumulative curves.
pub fn oracle_exit_time(result: &DnlResult, link: usize, t: f64) -> f64 {
    let rec = result.link(link);
    let grid = result.grid();
    let (up, down) = (rec.upstream.values(), rec.downstream.values());
    let level = interp(up, grid.dt(), t - grid.t0());
    let last = *down.last().unwrap();
    let s = if level > last + 1e-9 {
        grid.tf() + (level - last) / rec.capacity
    } else {
        let j = down.partition_point(|&v| v < level);
        if j == 0 {
            grid.t0()
        } else {
            let (a, b) = (down[j - 1], down[j]);
            grid.time(j - 1) + if b > a { (level - a) / (b - a) } else { 1.0 } * grid.dt()
        }
    };
    s.max(t + rec.free_flow_time)
}

/// Time to traverse `links` in order for a driver entering the first at `t`,
/// composed from [`oracle_exit_time`].
pub fn oracle_traversal(result: &DnlResult, links: &[usize], t: f64) -> f64 {
    links.iter().fold(t, |now, &l| oracle_exit_time(result, l, now)) - t
}

/// Per-bin mean traversal time of `paths` from their second link on (the
/// diversion node of the single-sign fixtures), sampled at bin midpoints.
pub fn set_times(s: &Scenario, result: &DnlResult, paths: &[usize]) -> Vec<f64> {
    (0..s.grid.n_bins())
        .map(|k| {
            let t = s.grid.midpoint(k);
            paths.iter().map(|&p| oracle_traversal(result, &s.paths[p].links[1..], t)).sum::<f64>() / paths.len() as f64
        })
        .collect()
}

/// Logit on the perceived saving, written out in full.
pub fn oracle_logit(beta: f64, x: f64) -> f64 {
    (beta * x).exp() / ((-beta * x).exp() + (beta * x).exp())
}
