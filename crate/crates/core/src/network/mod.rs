//! Road network, paths, demand and the within-day time grid.
//!
//! Everything here is immutable once a [`Scenario`] has been validated. Cross
//! references between entities are plain indices into the owning vectors;
//! string ids are kept for reporting and file output.

mod io;
mod vms;

pub use io::{
    load_scenario, DemandRow, RawId, RawJunction, RawLink, RawNetwork, RawNode, RawPath, RawSign, ScenarioFiles,
    ScenarioInputs, ToleranceRow,
};
pub use vms::{paths_through_vms, VmsPartition};

use serde::{Deserialize, Serialize};

use crate::scenario::RunConfig;

/// Uniform discretisation of the commuting period `[t0, tf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct TimeGrid {
    t0: f64,
    tf: f64,
    dt: f64,
    n_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
}

impl TryFrom<GridSpec> for TimeGrid {
    type Error = String;

    fn try_from(s: GridSpec) -> Result<Self, String> {
        TimeGrid::new(s.t0, s.tf, s.dt)
    }
}

impl From<TimeGrid> for GridSpec {
    fn from(g: TimeGrid) -> Self {
        GridSpec { t0: g.t0, tf: g.tf, dt: g.dt }
    }
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, dt: f64) -> Result<Self, String> {
        if !(t0.is_finite() && tf.is_finite() && dt.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if tf <= t0 {
            return Err(format!("tf ({tf}) must exceed t0 ({t0})"));
        }
        if dt <= 0.0 {
            return Err(format!("dt ({dt}) must be positive"));
        }
        let span = tf - t0;
        let n = (span / dt).round();
        if n < 1.0 || (n * dt - span).abs() > 1e-9 * span.max(1.0) {
            return Err(format!("horizon length {span} is not an integer multiple of dt {dt}"));
        }
        Ok(TimeGrid { t0, tf, dt, n_bins: n as usize })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Boundary time of index `k` (`0..=n_bins`).
    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_bins {
            self.tf
        } else {
            self.t0 + k as f64 * self.dt
        }
    }

    /// Representative time of bin `k`.
    pub fn midpoint(&self, k: usize) -> f64 {
        self.t0 + (k as f64 + 0.5) * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.tf - self.t0
    }

    /// Length of the overlap between bin `k` and `[a, b)`.
    pub fn overlap(&self, k: usize, a: f64, b: f64) -> f64 {
        let lo = self.time(k).max(a);
        let hi = self.time(k + 1).min(b);
        (hi - lo).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
}

/// A directed road segment with triangular fundamental diagram parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: String,
    pub from: usize,
    pub to: usize,
    /// meters
    pub length: f64,
    /// m/s
    pub free_flow_speed: f64,
    /// veh/s
    pub capacity: f64,
    /// veh/m
    pub jam_density: f64,
    /// m/s
    pub backward_wave_speed: f64,
}

impl Link {
    pub fn free_flow_time(&self) -> f64 {
        self.length / self.free_flow_speed
    }

    pub fn backward_wave_time(&self) -> f64 {
        self.length / self.backward_wave_speed
    }

    /// Maximum flow the triangular diagram admits: `vf * w * kjam / (vf + w)`.
    pub fn max_flow(&self) -> f64 {
        let (vf, w) = (self.free_flow_speed, self.backward_wave_speed);
        vf * w * self.jam_density / (vf + w)
    }

    pub fn storage(&self) -> f64 {
        self.jam_density * self.length
    }
}

/// A node with at least one incoming and one outgoing link.
#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub node: usize,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub junctions: Vec<Junction>,
}

impl Network {
    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().enumerate().filter(move |(_, l)| l.from == node).map(|(i, _)| i)
    }

    pub fn incoming(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().enumerate().filter(move |(_, l)| l.to == node).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub id: String,
    pub od: usize,
    pub links: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdPair {
    pub id: String,
    pub origin: usize,
    pub destination: usize,
    /// Q_ij, vehicles
    pub demand: f64,
    /// T_A, seconds
    pub desired_arrival: f64,
    pub paths: Vec<usize>,
    /// Indifference band per path, aligned with `paths`.
    pub tolerances: Vec<f64>,
}

impl OdPair {
    pub fn tolerance_of(&self, path: usize) -> f64 {
        let pos = self.paths.iter().position(|&p| p == path).expect("path belongs to O-D");
        self.tolerances[pos]
    }

    pub fn min_tolerance(&self) -> f64 {
        self.tolerances.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Union of disjoint half-open intervals during which a sign is on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActiveSet {
    intervals: Vec<(f64, f64)>,
}

impl ActiveSet {
    /// Builds a set from intervals, sorting them. Overlap and emptiness are
    /// checked by validation, not here.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        ActiveSet { intervals }
    }

    pub fn always(grid: &TimeGrid) -> Self {
        ActiveSet { intervals: vec![(grid.t0(), grid.tf())] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| t >= a && t < b)
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| (b - a).max(0.0)).sum()
    }

    /// Overlap of bin `k` with the set.
    pub fn bin_overlap(&self, grid: &TimeGrid, k: usize) -> f64 {
        self.intervals.iter().map(|&(a, b)| grid.overlap(k, a, b)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmsSign {
    pub id: String,
    pub host_link: usize,
    pub junction: usize,
    /// discouraged downstream link
    pub from_link: usize,
    /// recommended downstream link
    pub to_link: usize,
    pub active: ActiveSet,
}

/// Piecewise-constant path departure rates (veh/s), one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct DepartureProfile {
    dt: f64,
    rates: Vec<Vec<f64>>,
}

impl DepartureProfile {
    pub fn zeros(n_paths: usize, grid: &TimeGrid) -> Self {
        DepartureProfile { dt: grid.dt(), rates: vec![vec![0.0; grid.n_bins()]; n_paths] }
    }

    pub fn from_rates(rates: Vec<Vec<f64>>, grid: &TimeGrid) -> Self {
        DepartureProfile { dt: grid.dt(), rates }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_paths(&self) -> usize {
        self.rates.len()
    }

    pub fn path(&self, p: usize) -> &[f64] {
        &self.rates[p]
    }

    pub fn path_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.rates[p]
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    /// Vehicles departing on path `p` over the horizon.
    pub fn path_volume(&self, p: usize) -> f64 {
        self.rates[p].iter().sum::<f64>() * self.dt
    }

    pub fn od_volume(&self, od: &OdPair) -> f64 {
        od.paths.iter().map(|&p| self.path_volume(p)).sum()
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.rates.len()).map(|p| self.path_volume(p)).sum()
    }

    /// Discretised L² norm over all paths.
    pub fn l2_norm(&self) -> f64 {
        (self.rates.iter().flatten().map(|r| r * r).sum::<f64>() * self.dt).sqrt()
    }
}

/// A fully validated scenario: network, paths, demand, signs and run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: Network,
    pub paths: Vec<Path>,
    pub ods: Vec<OdPair>,
    pub signs: Vec<VmsSign>,
    pub grid: TimeGrid,
    pub config: RunConfig,
    /// Every (O-D, sign) partition with at least one path through the sign.
    pub partitions: Vec<VmsPartition>,
    /// Non-fatal findings such as out-of-range parameters or paths passing several signs.
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn affected_partitions(&self) -> impl Iterator<Item = &VmsPartition> {
        self.partitions.iter().filter(|p| p.is_affected())
    }

    pub fn total_demand(&self) -> f64 {
        self.ods.iter().map(|o| o.demand).sum()
    }

    /// Nodes visited by a path, from origin to destination.
    pub fn path_nodes(&self, p: usize) -> Vec<usize> {
        path_nodes(&self.network, &self.paths[p])
    }
}

pub(crate) fn path_nodes(network: &Network, path: &Path) -> Vec<usize> {
    let mut nodes = Vec::with_capacity(path.links.len() + 1);
    if let Some(&first) = path.links.first() {
        nodes.push(network.links[first].from);
    }
    nodes.extend(path.links.iter().map(|&l| network.links[l].to));
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_requires_integer_bins() {
        assert!(TimeGrid::new(0.0, 100.0, 3.0).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 1.0).is_err());
        assert!(TimeGrid::new(0.0, 10.0, -1.0).is_err());
        let g = TimeGrid::new(0.0, 3600.0, 10.0).unwrap();
        assert_eq!(g.n_bins(), 360);
        assert_eq!(g.time(360), 3600.0);
        assert_eq!(g.midpoint(0), 5.0);
    }

    #[test]
    fn active_set_overlap() {
        let g = TimeGrid::new(0.0, 10.0, 1.0).unwrap();
        let omega = ActiveSet::new(vec![(5.5, 7.0), (0.0, 1.0)]);
        assert_eq!(omega.measure(), 2.5);
        assert_eq!(omega.bin_overlap(&g, 5), 0.5);
        assert_eq!(omega.bin_overlap(&g, 6), 1.0);
        assert!(omega.contains(0.0));
        assert!(!omega.contains(7.0));
    }

    #[test]
    fn triangular_max_flow() {
        let l = Link {
            id: "1".into(),
            from: 0,
            to: 1,
            length: 500.0,
            free_flow_speed: 12.5,
            capacity: 0.5,
            jam_density: 0.15,
            backward_wave_speed: 5.0,
        };
        assert!((l.max_flow() - 12.5 * 5.0 * 0.15 / 17.5).abs() < 1e-12);
        assert_eq!(l.free_flow_time(), 40.0);
    }
}
