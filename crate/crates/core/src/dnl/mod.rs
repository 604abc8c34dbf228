//! Within-day dynamic network loading.
//!
//! Links follow the link transmission model on a triangular fundamental
//! diagram: each link keeps upstream and downstream cumulative counts, and
//! sending/receiving flows come from Newell's three-detector construction.
//! Vehicles are tracked per path label so that turning ratios at every
//! junction follow from the path composition of the flow leaving a link.
//! Signs revise those ratios before junction allocation, relabelling
//! diverted vehicles onto the recommended paths of their O-D.
//!
//! Departures enter their first link through an unbounded origin queue.

mod curve;
mod node;
mod turning;

pub use curve::{receiving_flow, sending_flow, CumulativeCurve};
pub use node::node_flows;
pub use turning::{revise_turning_ratios, LinkTurning, Target, TurningRatios};

use std::collections::BTreeMap;

use log::warn;

use crate::error::{DnlError, ParamError};
use crate::network::{path_nodes, DepartureProfile, Scenario, TimeGrid};

/// Compliance rate per (O-D index, sign index). Missing pairs comply at zero.
pub type ComplianceRates = BTreeMap<(usize, usize), f64>;

/// A time evaluated from the loading, flagged when it relied on the
/// post-horizon extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eval {
    pub value: f64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRecord {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub free_flow_time: f64,
    pub capacity: f64,
    pub upstream: CumulativeCurve,
    pub downstream: CumulativeCurve,
}

/// Cumulative departures into, and entries out of, the origin queue feeding a link.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginRecord {
    pub departed: CumulativeCurve,
    pub entered: CumulativeCurve,
}

#[derive(Debug, Clone, PartialEq)]
struct PathRecord {
    id: String,
    links: Vec<usize>,
    nodes: Vec<usize>,
}

/// Output of one network loading. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct DnlResult {
    grid: TimeGrid,
    links: Vec<LinkRecord>,
    origins: Vec<Option<OriginRecord>>,
    paths: Vec<PathRecord>,
    node_ids: Vec<String>,
    travel_times: Vec<Vec<f64>>,
    extrapolated_times: usize,
    turning: TurningRatios,
    total_departed: f64,
    total_arrived: f64,
    warnings: Vec<String>,
}

impl DnlResult {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn link(&self, link: usize) -> &LinkRecord {
        &self.links[link]
    }

    pub fn links(&self) -> &[LinkRecord] {
        &self.links
    }

    pub fn origin(&self, link: usize) -> Option<&OriginRecord> {
        self.origins[link].as_ref()
    }

    pub fn turning_ratios(&self) -> &TurningRatios {
        &self.turning
    }

    /// Vehicles entering `link` during `bin`.
    pub fn link_inflow(&self, link: usize, bin: usize) -> f64 {
        let v = self.links[link].upstream.values();
        v[bin + 1] - v[bin]
    }

    /// Vehicles leaving `link` during `bin`.
    pub fn link_outflow(&self, link: usize, bin: usize) -> f64 {
        let v = self.links[link].downstream.values();
        v[bin + 1] - v[bin]
    }

    pub fn total_departed(&self) -> f64 {
        self.total_departed
    }

    pub fn total_arrived(&self) -> f64 {
        self.total_arrived
    }

    /// Vehicles still on links or in origin queues at `tf`.
    pub fn residual(&self) -> f64 {
        let on_links: f64 = self.links.iter().map(|l| l.upstream.last() - l.downstream.last()).sum();
        let queued: f64 = self.origins.iter().flatten().map(|o| o.departed.last() - o.entered.last()).sum();
        on_links + queued
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Number of tabulated path travel times that needed extrapolation past `tf`.
    pub fn extrapolated_count(&self) -> usize {
        self.extrapolated_times
    }

    /// Path travel times `D_p` for departures at each bin midpoint.
    pub fn travel_times(&self, path: usize) -> &[f64] {
        &self.travel_times[path]
    }

    /// Link exit time `μ_a(t)` for a vehicle entering at `t`.
    ///
    /// Found by inverting the downstream curve at the upstream level. Levels
    /// not reached by `tf` are extrapolated as a queue discharging at capacity.
    pub fn exit_time(&self, link: usize, t: f64) -> Eval {
        let rec = &self.links[link];
        let level = rec.upstream.at(t);
        let out_last = rec.downstream.last();
        let (s, tail) = if level <= out_last + 1e-9 {
            (rec.downstream.inverse(level.min(out_last)).expect("level within range"), false)
        } else {
            (self.grid.tf() + (level - out_last) / rec.capacity, true)
        };
        Eval { value: s.max(t + rec.free_flow_time), extrapolated: tail || t > self.grid.tf() }
    }

    /// Time a vehicle departing at `t` actually enters `link` from its origin queue.
    pub fn origin_exit(&self, link: usize, t: f64) -> Eval {
        let Some(o) = &self.origins[link] else {
            return Eval { value: t, extrapolated: t > self.grid.tf() };
        };
        let level = o.departed.at(t);
        let in_last = o.entered.last();
        let (s, tail) = if level <= in_last + 1e-9 {
            (o.entered.inverse(level.min(in_last)).expect("level within range"), false)
        } else {
            (self.grid.tf() + (level - in_last) / self.links[link].capacity, true)
        };
        Eval { value: s.max(t), extrapolated: tail || t > self.grid.tf() }
    }

    fn compose(&self, links: &[usize], t: f64) -> Eval {
        let mut now = Eval { value: t, extrapolated: false };
        for &l in links {
            let e = self.exit_time(l, now.value);
            now = Eval { value: e.value, extrapolated: now.extrapolated || e.extrapolated };
        }
        now
    }

    /// Travel time `D_p(t)` of a driver departing at `t`, origin queueing included.
    pub fn path_travel_time(&self, path: usize, t: f64) -> Eval {
        let p = &self.paths[path];
        let start = self.origin_exit(p.links[0], t);
        let end = self.compose(&p.links, start.value);
        Eval { value: end.value - t, extrapolated: start.extrapolated || end.extrapolated }
    }

    /// Traversal time from `node` to the end of `path` for a driver leaving
    /// `node` at `t`.
    pub fn partial_traversal_time(&self, path: usize, node: usize, t: f64) -> Result<Eval, DnlError> {
        let p = &self.paths[path];
        let pos = p
            .nodes
            .iter()
            .position(|&n| n == node)
            .ok_or_else(|| DnlError::NodeNotOnPath { node: self.node_ids[node].clone(), path: p.id.clone() })?;
        let end = self.compose(&p.links[pos..], t);
        Ok(Eval { value: end.value - t, extrapolated: end.extrapolated })
    }
}

/// Static bookkeeping shared by every step of one loading.
struct Layout {
    /// Path labels that may travel on each link.
    labels: Vec<Vec<usize>>,
    /// `slot[link][path]`: position of the path among the link's labels.
    slot: Vec<Vec<Option<usize>>>,
    /// Next target of each label on each link.
    next: Vec<Vec<Target>>,
    /// Paths starting on each link.
    origin_paths: Vec<Vec<usize>>,
    /// Per node: incoming links, links fed by an origin queue, and outgoing targets.
    node_in: Vec<Vec<usize>>,
    node_origin: Vec<Vec<usize>>,
    node_out: Vec<Vec<Target>>,
    /// Outgoing targets of each link's downstream node.
    link_targets: Vec<Vec<Target>>,
    diversions: Vec<Vec<Diversion>>,
}

/// One affected O-D pair's diversion on a sign's host link.
#[derive(Clone)]
struct Diversion {
    cr: f64,
    sign: usize,
    nf_slots: Vec<usize>,
    f_slots: Vec<usize>,
}

impl Layout {
    fn build(scenario: &Scenario, rates: &ComplianceRates) -> Result<Self, DnlError> {
        let net = &scenario.network;
        let n_links = net.links.len();
        let n_nodes = net.nodes.len();
        let n_paths = scenario.paths.len();

        let mut labels = vec![Vec::new(); n_links];
        let mut slot = vec![vec![None; n_paths]; n_links];
        let mut origin_paths = vec![Vec::new(); n_links];
        for (p, path) in scenario.paths.iter().enumerate() {
            origin_paths[path.links[0]].push(p);
            for &l in &path.links {
                slot[l][p] = Some(labels[l].len());
                labels[l].push(p);
            }
        }
        let next: Vec<Vec<Target>> = (0..n_links)
            .map(|l| {
                labels[l]
                    .iter()
                    .map(|&p| {
                        let links = &scenario.paths[p].links;
                        let i = links.iter().position(|&x| x == l).expect("label on link");
                        links.get(i + 1).map_or(Target::Sink, |&n| Target::Link(n))
                    })
                    .collect()
            })
            .collect();

        let mut node_in = vec![Vec::new(); n_nodes];
        let mut node_origin = vec![Vec::new(); n_nodes];
        let mut node_out = vec![Vec::new(); n_nodes];
        for (l, link) in net.links.iter().enumerate() {
            node_in[link.to].push(l);
            node_out[link.from].push(Target::Link(l));
            if !origin_paths[l].is_empty() {
                node_origin[link.from].push(l);
            }
        }
        for (l, link) in net.links.iter().enumerate() {
            if next[l].contains(&Target::Sink) && !node_out[link.to].contains(&Target::Sink) {
                node_out[link.to].push(Target::Sink);
            }
        }
        let link_targets = net.links.iter().map(|link| node_out[link.to].clone()).collect();

        let mut diversions = vec![Vec::new(); n_links];
        for part in scenario.affected_partitions() {
            let cr = rates.get(&(part.od, part.sign)).copied().unwrap_or(0.0);
            if !(0.0..=1.0).contains(&cr) {
                return Err(ParamError::ComplianceRate(cr).into());
            }
            let host = scenario.signs[part.sign].host_link;
            let slots =
                |ps: &[usize]| ps.iter().map(|&p| slot[host][p].expect("partition path uses host link")).collect();
            diversions[host].push(Diversion {
                cr,
                sign: part.sign,
                nf_slots: slots(&part.not_follow),
                f_slots: slots(&part.follow),
            });
        }

        Ok(Layout { labels, slot, next, origin_paths, node_in, node_origin, node_out, link_targets, diversions })
    }
}

/// Loads `profile` onto the network for one day with the given compliance rates.
pub fn run_dnl(
    scenario: &Scenario,
    profile: &DepartureProfile,
    rates: &ComplianceRates,
) -> Result<DnlResult, DnlError> {
    let grid = scenario.grid;
    let net = &scenario.network;
    let (t0, dt, n_bins) = (grid.t0(), grid.dt(), grid.n_bins());

    if profile.n_paths() != scenario.paths.len() {
        return Err(DnlError::ProfileShape {
            path: "<all>".into(),
            expected: scenario.paths.len(),
            found: profile.n_paths(),
        });
    }
    for (p, path) in scenario.paths.iter().enumerate() {
        let rates = profile.path(p);
        if rates.len() != n_bins {
            return Err(DnlError::ProfileShape { path: path.id.clone(), expected: n_bins, found: rates.len() });
        }
        if let Some(bin) = rates.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(DnlError::NegativeRate { path: path.id.clone(), bin });
        }
    }

    let layout = Layout::build(scenario, rates)?;
    let n_links = net.links.len();

    let mut up: Vec<CumulativeCurve> = (0..n_links).map(|_| CumulativeCurve::new(t0, dt)).collect();
    let mut down = up.clone();
    let mut up_label: Vec<Vec<CumulativeCurve>> =
        layout.labels.iter().map(|ls| ls.iter().map(|_| CumulativeCurve::new(t0, dt)).collect()).collect();
    let mut down_label: Vec<Vec<f64>> = layout.labels.iter().map(|ls| vec![0.0; ls.len()]).collect();

    let mut departed: Vec<f64> = vec![0.0; scenario.paths.len()];
    let mut entered: Vec<f64> = vec![0.0; scenario.paths.len()];
    let mut origin_dep: Vec<Option<CumulativeCurve>> =
        layout.origin_paths.iter().map(|ps| (!ps.is_empty()).then(|| CumulativeCurve::new(t0, dt))).collect();
    let mut origin_ent = origin_dep.clone();

    let mut turning: Vec<LinkTurning> = (0..n_links)
        .map(|l| LinkTurning { link: l, targets: layout.link_targets[l].clone(), ratios: Vec::with_capacity(n_bins) })
        .collect();
    let mut previous_ratios: Vec<Vec<f64>> = (0..n_links).map(|l| initial_ratios(&layout, l)).collect();

    let mut arrived = 0.0;
    let mut sending = vec![0.0; n_links];
    let mut receiving = vec![0.0; n_links];
    let mut packets: Vec<Vec<f64>> = layout.labels.iter().map(|ls| vec![0.0; ls.len()]).collect();
    let mut routed: Vec<Vec<f64>> = packets.clone();
    let mut inflow: Vec<Vec<f64>> = packets.clone();

    for k in 0..n_bins {
        let t_next = grid.time(k + 1);
        let t_mid = grid.midpoint(k);

        for (l, link) in net.links.iter().enumerate() {
            sending[l] = sending_flow(link, &up[l], &down[l], t_next, dt);
            receiving[l] = receiving_flow(link, &up[l], &down[l], t_next, dt);
            compose_packet(sending[l], &up[l], &down[l], &up_label[l], &down_label[l], &mut packets[l]);
            routed[l].copy_from_slice(&packets[l]);
            if sending[l] > 0.0 {
                for Diversion { cr, sign, nf_slots, f_slots } in &layout.diversions[l] {
                    let omega = &scenario.signs[*sign].active;
                    for &nf in nf_slots {
                        let share = routed[l][nf] / sending[l];
                        let (keep, moved) = revise_turning_ratios(share.min(1.0), 0.0, *cr, t_mid, omega)?;
                        routed[l][nf] = keep * sending[l];
                        for &f in f_slots {
                            routed[l][f] += moved * sending[l] / f_slots.len() as f64;
                        }
                    }
                }
            }
            inflow[l].iter_mut().for_each(|x| *x = 0.0);
        }

        for n in 0..net.nodes.len() {
            let ins = &layout.node_in[n];
            let origins = &layout.node_origin[n];
            let outs = &layout.node_out[n];
            if (ins.is_empty() && origins.is_empty()) || outs.is_empty() {
                continue;
            }
            let n_in = ins.len() + origins.len();
            let mut s = Vec::with_capacity(n_in);
            let mut prio = Vec::with_capacity(n_in);
            let mut ratios = Vec::with_capacity(n_in);
            for &l in ins {
                s.push(sending[l]);
                prio.push(net.links[l].capacity);
                let mut row = vec![0.0; outs.len()];
                if sending[l] > 0.0 {
                    for (slot, target) in layout.next[l].iter().enumerate() {
                        let j = outs.iter().position(|t| t == target).expect("target leaves node");
                        row[j] += routed[l][slot] / sending[l];
                    }
                }
                ratios.push(row);
            }
            let mut origin_packets = Vec::with_capacity(origins.len());
            for &a in origins {
                let pk: Vec<f64> = layout.origin_paths[a]
                    .iter()
                    .map(|&p| (departed[p] + profile.path(p)[k] * dt - entered[p]).max(0.0))
                    .collect();
                s.push(pk.iter().sum());
                prio.push(net.links[a].capacity);
                let j = outs.iter().position(|t| *t == Target::Link(a)).expect("origin feeds outgoing link");
                let mut row = vec![0.0; outs.len()];
                row[j] = 1.0;
                ratios.push(row);
                origin_packets.push(pk);
            }
            let supply: Vec<f64> = outs
                .iter()
                .map(|t| match t {
                    Target::Link(j) => receiving[*j],
                    Target::Sink => f64::INFINITY,
                })
                .collect();

            let nonconvergent = || DnlError::JunctionNonconvergent { node: net.nodes[n].id.clone(), bin: k };
            let y = node_flows(&s, &prio, &ratios, &supply).ok_or_else(nonconvergent)?;
            for (j, &r) in supply.iter().enumerate() {
                let used: f64 = (0..n_in).map(|i| ratios[i][j] * y[i]).sum();
                if used > r * (1.0 + 1e-9) + 1e-12 {
                    return Err(nonconvergent());
                }
            }

            for (i, &l) in ins.iter().enumerate() {
                let frac = if s[i] > 0.0 { (y[i] / s[i]).min(1.0) } else { 0.0 };
                for slot in 0..layout.labels[l].len() {
                    down_label[l][slot] += packets[l][slot] * frac;
                    let amount = routed[l][slot] * frac;
                    if amount == 0.0 {
                        continue;
                    }
                    let path = layout.labels[l][slot];
                    match layout.next[l][slot] {
                        Target::Link(j) => {
                            let js = layout.slot[j][path].expect("next link carries label");
                            inflow[j][js] += amount;
                        }
                        Target::Sink => arrived += amount,
                    }
                }
                let v = down[l].last() + y[i];
                down[l].push(v);
                record_ratios(&mut turning[l], &mut previous_ratios[l], &layout, l, &routed[l], sending[l]);
            }
            for (o, &a) in origins.iter().enumerate() {
                let i = ins.len() + o;
                let frac = if s[i] > 0.0 { (y[i] / s[i]).min(1.0) } else { 0.0 };
                for (pi, &p) in layout.origin_paths[a].iter().enumerate() {
                    let moved = origin_packets[o][pi] * frac;
                    departed[p] += profile.path(p)[k] * dt;
                    entered[p] += moved;
                    let slot = layout.slot[a][p].expect("path starts on link");
                    inflow[a][slot] += moved;
                }
                let dep_total: f64 = layout.origin_paths[a].iter().map(|&p| departed[p]).sum();
                let ent_total: f64 = layout.origin_paths[a].iter().map(|&p| entered[p]).sum();
                origin_dep[a].as_mut().expect("origin").push(dep_total);
                origin_ent[a].as_mut().expect("origin").push(ent_total);
            }
        }

        for l in 0..n_links {
            // links whose downstream node had nothing to do still advance
            if down[l].values().len() < k + 2 {
                let v = down[l].last();
                down[l].push(v);
                record_ratios(&mut turning[l], &mut previous_ratios[l], &layout, l, &routed[l], 0.0);
            }
            let total: f64 = inflow[l].iter().sum();
            let v = up[l].last() + total;
            up[l].push(v);
            for (slot, curve) in up_label[l].iter_mut().enumerate() {
                let v = curve.last() + inflow[l][slot];
                curve.push(v);
            }
        }
    }

    let links: Vec<LinkRecord> = net
        .links
        .iter()
        .enumerate()
        .map(|(l, link)| LinkRecord {
            id: link.id.clone(),
            from: link.from,
            to: link.to,
            free_flow_time: link.free_flow_time(),
            capacity: link.capacity,
            upstream: up[l].clone(),
            downstream: down[l].clone(),
        })
        .collect();
    let origins = origin_dep
        .into_iter()
        .zip(origin_ent)
        .map(|(d, e)| d.zip(e).map(|(departed, entered)| OriginRecord { departed, entered }))
        .collect();
    let paths = scenario
        .paths
        .iter()
        .map(|p| PathRecord { id: p.id.clone(), links: p.links.clone(), nodes: path_nodes(net, p) })
        .collect();

    let mut result = DnlResult {
        grid,
        links,
        origins,
        paths,
        node_ids: net.nodes.iter().map(|n| n.id.clone()).collect(),
        travel_times: Vec::new(),
        extrapolated_times: 0,
        turning: TurningRatios { per_link: turning },
        total_departed: departed.iter().sum(),
        total_arrived: arrived,
        warnings: Vec::new(),
    };

    let mut extrapolated = 0;
    result.travel_times = (0..scenario.paths.len())
        .map(|p| {
            (0..n_bins)
                .map(|k| {
                    let e = result.path_travel_time(p, grid.midpoint(k));
                    extrapolated += e.extrapolated as usize;
                    e.value
                })
                .collect()
        })
        .collect();
    result.extrapolated_times = extrapolated;

    let residual = result.residual();
    let limit = scenario.config.residual_tolerance * scenario.total_demand();
    if residual > limit + 1e-9 {
        let msg = format!("{residual:.3} vehicles remain in the network at tf (limit {limit:.3})");
        warn!("{msg}");
        result.warnings.push(msg);
    }
    if extrapolated > 0 {
        result.warnings.push(format!("{extrapolated} path travel times extrapolated beyond tf"));
    }
    Ok(result)
}

/// Path composition of the next `sending` vehicles to leave a link, by FIFO
/// position in the upstream curve.
fn compose_packet(
    sending: f64,
    up: &CumulativeCurve,
    down: &CumulativeCurve,
    up_label: &[CumulativeCurve],
    down_label: &[f64],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|x| *x = 0.0);
    if sending <= 0.0 || out.is_empty() {
        return;
    }
    let level = down.last() + sending;
    let t_in = up.inverse(level).unwrap_or_else(|| up.end_time());
    let mut total = 0.0;
    for (slot, x) in out.iter_mut().enumerate() {
        *x = (up_label[slot].at(t_in) - down_label[slot]).max(0.0);
        total += *x;
    }
    if total <= 0.0 {
        // fall back to everything still on the link
        for (slot, x) in out.iter_mut().enumerate() {
            *x = (up_label[slot].last() - down_label[slot]).max(0.0);
            total += *x;
        }
    }
    if total > 0.0 {
        let scale = sending / total;
        out.iter_mut().for_each(|x| *x *= scale);
    }
}

fn initial_ratios(layout: &Layout, link: usize) -> Vec<f64> {
    let targets = &layout.link_targets[link];
    let mut row = vec![0.0; targets.len()];
    if targets.is_empty() {
        return row;
    }
    let next = &layout.next[link];
    if next.is_empty() {
        row.iter_mut().for_each(|x| *x = 1.0 / targets.len() as f64);
    } else {
        for t in next {
            let j = targets.iter().position(|x| x == t).expect("target");
            row[j] += 1.0 / next.len() as f64;
        }
    }
    row
}

fn record_ratios(
    turn: &mut LinkTurning,
    previous: &mut Vec<f64>,
    layout: &Layout,
    link: usize,
    routed: &[f64],
    sending: f64,
) {
    if sending > 0.0 {
        let mut row = vec![0.0; turn.targets.len()];
        for (slot, target) in layout.next[link].iter().enumerate() {
            let j = turn.targets.iter().position(|t| t == target).expect("target");
            row[j] += routed[slot] / sending;
        }
        *previous = row;
    }
    turn.ratios.push(previous.clone());
}
