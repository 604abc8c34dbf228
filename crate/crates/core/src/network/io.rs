//! On-disk scenario formats and the validating loader.
//!
//! JSON for the network, paths, signs and run configuration; CSV for demand
//! and path tolerances. The `Raw*` types mirror the files one to one and are
//! also what fixtures build and what [`ScenarioInputs::write_to`] emits, so a
//! loaded scenario can be written back out and reloaded unchanged.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use super::{paths_through_vms, ActiveSet, Junction, Link, Network, Node, OdPair, Path, Scenario, TimeGrid, VmsSign};
use crate::error::{Issue, LoadError};
use crate::scenario::RunConfig;

/// Entity id that may be written as a JSON string or integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct RawId(pub String);

impl<'de> Deserialize<'de> for RawId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            S(String),
            I(i64),
        }
        Ok(match Either::deserialize(d)? {
            Either::S(s) => RawId(s),
            Either::I(i) => RawId(i.to_string()),
        })
    }
}

impl From<&str> for RawId {
    fn from(s: &str) -> Self {
        RawId(s.to_string())
    }
}

impl std::fmt::Display for RawId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNode {
    pub id: RawId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLink {
    pub id: RawId,
    pub from: RawId,
    pub to: RawId,
    pub length_m: f64,
    pub vf_mps: f64,
    pub cap_vps: f64,
    pub kjam_vpm: f64,
    pub w_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawJunction {
    pub node: RawId,
    pub incoming: Vec<RawId>,
    pub outgoing: Vec<RawId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNetwork {
    pub links: Vec<RawLink>,
    pub nodes: Vec<RawNode>,
    #[serde(default)]
    pub junctions: Vec<RawJunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPath {
    pub id: RawId,
    pub od: RawId,
    pub links: Vec<RawId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRow {
    pub od_id: String,
    pub origin: String,
    pub destination: String,
    #[serde(rename = "Q")]
    pub demand: f64,
    #[serde(rename = "T_A")]
    pub desired_arrival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRow {
    pub od_id: String,
    pub path_id: String,
    pub epsilon_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSign {
    pub id: RawId,
    pub host_link: RawId,
    pub junction: RawId,
    pub from_link: RawId,
    pub to_link: RawId,
    pub omega: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SignFile {
    One(RawSign),
    Many(Vec<RawSign>),
}

/// Locations of the scenario files. Tolerances and signs are optional.
#[derive(Debug, Clone)]
pub struct ScenarioFiles {
    pub network: PathBuf,
    pub paths: PathBuf,
    pub demand: PathBuf,
    pub tolerances: Option<PathBuf>,
    pub vms: Option<PathBuf>,
    pub config: PathBuf,
}

impl ScenarioFiles {
    /// The conventional file names inside one directory, as written by
    /// [`ScenarioInputs::write_to`].
    pub fn in_dir(dir: impl AsRef<FsPath>) -> Self {
        let dir = dir.as_ref();
        let opt = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        ScenarioFiles {
            network: dir.join("network.json"),
            paths: dir.join("paths.json"),
            demand: dir.join("demand.csv"),
            tolerances: opt("tolerances.csv"),
            vms: opt("vms.json"),
            config: dir.join("config.json"),
        }
    }
}

/// Unvalidated scenario content, exactly as it appears in the files.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInputs {
    pub network: RawNetwork,
    pub paths: Vec<RawPath>,
    pub demand: Vec<DemandRow>,
    pub tolerances: Vec<ToleranceRow>,
    pub signs: Vec<RawSign>,
    pub config: RunConfig,
}

fn read(path: &FsPath) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &FsPath) -> Result<T, LoadError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| LoadError::Schema { path: path.to_path_buf(), message: e.to_string() })
}

fn parse_csv<T: for<'de> Deserialize<'de>>(path: &FsPath) -> Result<Vec<T>, LoadError> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| LoadError::Schema { path: path.to_path_buf(), message: e.to_string() })
}

/// Reads and validates every scenario file.
pub fn load_scenario(files: &ScenarioFiles) -> Result<Scenario, LoadError> {
    ScenarioInputs::read(files)?.validate()
}

impl ScenarioInputs {
    pub fn read(files: &ScenarioFiles) -> Result<Self, LoadError> {
        let network = parse_json(&files.network)?;
        let paths = parse_json(&files.paths)?;
        let demand = parse_csv(&files.demand)?;
        let tolerances = match &files.tolerances {
            Some(p) => parse_csv(p)?,
            None => Vec::new(),
        };
        let signs = match &files.vms {
            Some(p) => match parse_json::<SignFile>(p)? {
                SignFile::One(s) => vec![s],
                SignFile::Many(v) => v,
            },
            None => Vec::new(),
        };
        let config = parse_json(&files.config)?;
        Ok(ScenarioInputs { network, paths, demand, tolerances, signs, config })
    }

    /// Writes the conventional file set into `dir` (created if needed).
    pub fn write_to(&self, dir: impl AsRef<FsPath>) -> std::io::Result<ScenarioFiles> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let json = |name: &str, value: &dyn erased::Json| -> std::io::Result<()> {
            fs::write(dir.join(name), value.to_pretty()?)
        };
        json("network.json", &self.network)?;
        json("paths.json", &self.paths)?;
        json("config.json", &self.config)?;
        if !self.signs.is_empty() {
            json("vms.json", &self.signs)?;
        }
        write_csv(&dir.join("demand.csv"), &self.demand)?;
        if !self.tolerances.is_empty() {
            write_csv(&dir.join("tolerances.csv"), &self.tolerances)?;
        }
        Ok(ScenarioFiles::in_dir(dir))
    }

    /// Checks every invariant and builds the indexed object graph. All
    /// problems found are reported together.
    pub fn validate(self) -> Result<Scenario, LoadError> {
        let mut issues = Vec::new();
        let mut warnings = Vec::new();

        let grid = match TimeGrid::new(self.config.grid.t0, self.config.grid.tf, self.config.grid.dt) {
            Ok(g) => Some(g),
            Err(e) => {
                issues.push(Issue::new("config.grid", e));
                None
            }
        };
        let (cfg_issues, cfg_warnings) = self.config.check();
        issues.extend(cfg_issues);
        warnings.extend(cfg_warnings);

        let network = build_network(&self.network, grid.as_ref(), &mut issues);
        let ods = build_ods(&self.demand, &network, grid.as_ref(), &mut issues);
        let paths = build_paths(&self.paths, &network, &ods, &mut issues);
        let ods = attach_paths(ods, &paths, &self.tolerances, self.config.default_epsilon, &mut issues);
        let signs = build_signs(&self.signs, &network, grid.as_ref(), &mut issues);

        if let Some(window) = self.config.initial_profile.window {
            for od in &ods {
                if window[1] > od.desired_arrival + 1e-9 {
                    issues.push(Issue::new(
                        format!("od {}", od.id),
                        format!("initial departure window ends at {} after T_A = {}", window[1], od.desired_arrival),
                    ));
                }
            }
        }

        if !issues.is_empty() {
            return Err(LoadError::Invalid(issues));
        }
        let grid = grid.expect("grid validated");

        let mut partitions = Vec::new();
        for (s, sign) in signs.iter().enumerate() {
            let parts = paths_through_vms(s, sign, &paths, &ods);
            if !parts.iter().any(|p| p.is_affected()) {
                warnings.push(format!("sign {} affects no O-D pair", sign.id));
            }
            partitions.extend(parts);
        }
        let mut signs_per_path: HashMap<usize, HashSet<usize>> = HashMap::new();
        for part in partitions.iter().filter(|p| p.is_affected()) {
            for &p in part.follow.iter().chain(&part.not_follow) {
                signs_per_path.entry(p).or_default().insert(part.sign);
            }
        }
        let mut multi: Vec<_> = signs_per_path.into_iter().filter(|(_, s)| s.len() > 1).map(|(p, _)| p).collect();
        multi.sort_unstable();
        for p in multi {
            warnings.push(format!("path {} passes more than one VMS; sign interactions are not modelled", paths[p].id));
        }

        Ok(Scenario { network, paths, ods, signs, grid, config: self.config, partitions, warnings })
    }
}

impl Scenario {
    /// The raw form of this scenario; writing it out and loading it again
    /// reproduces an identical scenario.
    pub fn to_inputs(&self) -> ScenarioInputs {
        let net = &self.network;
        let lid = |l: usize| RawId(net.links[l].id.clone());
        let nid = |n: usize| RawId(net.nodes[n].id.clone());
        let network = RawNetwork {
            links: net
                .links
                .iter()
                .map(|l| RawLink {
                    id: RawId(l.id.clone()),
                    from: nid(l.from),
                    to: nid(l.to),
                    length_m: l.length,
                    vf_mps: l.free_flow_speed,
                    cap_vps: l.capacity,
                    kjam_vpm: l.jam_density,
                    w_mps: l.backward_wave_speed,
                })
                .collect(),
            nodes: net.nodes.iter().map(|n| RawNode { id: RawId(n.id.clone()) }).collect(),
            junctions: net
                .junctions
                .iter()
                .map(|j| RawJunction {
                    node: nid(j.node),
                    incoming: j.incoming.iter().map(|&l| lid(l)).collect(),
                    outgoing: j.outgoing.iter().map(|&l| lid(l)).collect(),
                })
                .collect(),
        };
        let paths = self
            .paths
            .iter()
            .map(|p| RawPath {
                id: RawId(p.id.clone()),
                od: RawId(self.ods[p.od].id.clone()),
                links: p.links.iter().map(|&l| lid(l)).collect(),
            })
            .collect();
        let demand = self
            .ods
            .iter()
            .map(|o| DemandRow {
                od_id: o.id.clone(),
                origin: net.nodes[o.origin].id.clone(),
                destination: net.nodes[o.destination].id.clone(),
                demand: o.demand,
                desired_arrival: o.desired_arrival,
            })
            .collect();
        let tolerances = self
            .ods
            .iter()
            .flat_map(|o| {
                o.paths.iter().zip(&o.tolerances).map(|(&p, &e)| ToleranceRow {
                    od_id: o.id.clone(),
                    path_id: self.paths[p].id.clone(),
                    epsilon_s: e,
                })
            })
            .collect();
        let signs = self
            .signs
            .iter()
            .map(|s| RawSign {
                id: RawId(s.id.clone()),
                host_link: lid(s.host_link),
                junction: nid(s.junction),
                from_link: lid(s.from_link),
                to_link: lid(s.to_link),
                omega: s.active.intervals().iter().map(|&(a, b)| [a, b]).collect(),
            })
            .collect();
        ScenarioInputs { network, paths, demand, tolerances, signs, config: self.config.clone() }
    }
}

mod erased {
    pub trait Json {
        fn to_pretty(&self) -> std::io::Result<String>;
    }

    impl<T: serde::Serialize> Json for T {
        fn to_pretty(&self) -> std::io::Result<String> {
            serde_json::to_string_pretty(self).map_err(std::io::Error::other)
        }
    }
}

fn write_csv<T: Serialize>(path: &FsPath, rows: &[T]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::other)?;
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    w.flush()
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn build_network(raw: &RawNetwork, grid: Option<&TimeGrid>, issues: &mut Vec<Issue>) -> Network {
    let mut nodes = Vec::new();
    let mut node_ids = HashMap::new();
    for n in &raw.nodes {
        if node_ids.insert(n.id.0.clone(), nodes.len()).is_some() {
            issues.push(Issue::new(format!("node {}", n.id), "duplicate node id"));
        }
        nodes.push(Node { id: n.id.0.clone() });
    }

    let mut links = Vec::new();
    let mut link_ids = HashSet::new();
    for l in &raw.links {
        let entity = format!("link {}", l.id);
        if !link_ids.insert(l.id.0.clone()) {
            issues.push(Issue::new(&entity, "duplicate link id"));
        }
        let from = node_ids.get(&l.from.0).copied();
        let to = node_ids.get(&l.to.0).copied();
        if from.is_none() {
            issues.push(Issue::new(&entity, format!("unknown from node {}", l.from)));
        }
        if to.is_none() {
            issues.push(Issue::new(&entity, format!("unknown to node {}", l.to)));
        }
        if from.is_some() && from == to {
            issues.push(Issue::new(&entity, "self loop"));
        }
        let fields = [
            ("length_m", l.length_m),
            ("vf_mps", l.vf_mps),
            ("cap_vps", l.cap_vps),
            ("kjam_vpm", l.kjam_vpm),
            ("w_mps", l.w_mps),
        ];
        let mut physical_ok = true;
        for (name, v) in fields {
            if !positive(v) {
                issues.push(Issue::new(&entity, format!("{name} must be strictly positive, got {v}")));
                physical_ok = false;
            }
        }
        let link = Link {
            id: l.id.0.clone(),
            from: from.unwrap_or(0),
            to: to.unwrap_or(0),
            length: l.length_m,
            free_flow_speed: l.vf_mps,
            capacity: l.cap_vps,
            jam_density: l.kjam_vpm,
            backward_wave_speed: l.w_mps,
        };
        if physical_ok {
            if link.backward_wave_speed > link.free_flow_speed {
                issues.push(Issue::new(&entity, "backward wave speed exceeds free-flow speed"));
            }
            if link.capacity > link.max_flow() * (1.0 + 1e-12) {
                issues.push(Issue::new(
                    &entity,
                    format!("capacity {} exceeds the triangular diagram maximum {:.6}", link.capacity, link.max_flow()),
                ));
            }
            if let Some(g) = grid {
                if g.dt() > link.free_flow_time() + 1e-9 {
                    issues.push(Issue::new(
                        &entity,
                        format!("free-flow time {} is shorter than the time step {}", link.free_flow_time(), g.dt()),
                    ));
                }
            }
        }
        links.push(link);
    }

    let mut network = Network { nodes, links, junctions: Vec::new() };
    for n in 0..network.nodes.len() {
        let incoming: Vec<usize> = network.incoming(n).collect();
        let outgoing: Vec<usize> = network.outgoing(n).collect();
        if !incoming.is_empty() && !outgoing.is_empty() {
            network.junctions.push(Junction { node: n, incoming, outgoing });
        }
    }

    // Declared junctions must agree with the topology implied by the links.
    for j in &raw.junctions {
        let entity = format!("junction {}", j.node);
        let Some(&node) = node_ids.get(&j.node.0) else {
            issues.push(Issue::new(entity, "unknown node"));
            continue;
        };
        let resolve = |ids: &[RawId], issues: &mut Vec<Issue>| -> HashSet<usize> {
            ids.iter()
                .filter_map(|id| {
                    let idx = network.link_index(&id.0);
                    if idx.is_none() {
                        issues.push(Issue::new(format!("junction {}", j.node), format!("unknown link {id}")));
                    }
                    idx
                })
                .collect()
        };
        let inc = resolve(&j.incoming, issues);
        let out = resolve(&j.outgoing, issues);
        if inc.is_empty() || out.is_empty() {
            issues.push(Issue::new(&entity, "needs at least one incoming and one outgoing link"));
            continue;
        }
        let derived_in: HashSet<usize> = network.incoming(node).collect();
        let derived_out: HashSet<usize> = network.outgoing(node).collect();
        if inc != derived_in || out != derived_out {
            issues.push(Issue::new(&entity, "link lists disagree with link endpoints"));
        }
    }
    network
}

fn build_ods(rows: &[DemandRow], network: &Network, grid: Option<&TimeGrid>, issues: &mut Vec<Issue>) -> Vec<OdPair> {
    let mut seen = HashSet::new();
    rows.iter()
        .map(|r| {
            let entity = format!("od {}", r.od_id);
            if !seen.insert(r.od_id.clone()) {
                issues.push(Issue::new(&entity, "duplicate O-D id"));
            }
            let origin = network.node_index(&r.origin);
            let destination = network.node_index(&r.destination);
            if origin.is_none() {
                issues.push(Issue::new(&entity, format!("unknown origin node {}", r.origin)));
            }
            if destination.is_none() {
                issues.push(Issue::new(&entity, format!("unknown destination node {}", r.destination)));
            }
            if !(r.demand.is_finite() && r.demand >= 0.0) {
                issues.push(Issue::new(&entity, format!("demand Q must be nonnegative, got {}", r.demand)));
            }
            if let Some(g) = grid {
                if !(r.desired_arrival < g.tf()) {
                    issues.push(Issue::new(
                        &entity,
                        format!("desired arrival T_A = {} must be before tf = {}", r.desired_arrival, g.tf()),
                    ));
                }
            }
            OdPair {
                id: r.od_id.clone(),
                origin: origin.unwrap_or(0),
                destination: destination.unwrap_or(0),
                demand: r.demand,
                desired_arrival: r.desired_arrival,
                paths: Vec::new(),
                tolerances: Vec::new(),
            }
        })
        .collect()
}

fn build_paths(raw: &[RawPath], network: &Network, ods: &[OdPair], issues: &mut Vec<Issue>) -> Vec<Path> {
    let mut seen = HashSet::new();
    let mut paths = Vec::new();
    for p in raw {
        let entity = format!("path {}", p.id);
        if !seen.insert(p.id.0.clone()) {
            issues.push(Issue::new(&entity, "duplicate path id"));
        }
        let Some(od) = ods.iter().position(|o| o.id == p.od.0) else {
            issues.push(Issue::new(&entity, format!("unknown O-D {}", p.od)));
            continue;
        };
        if p.links.is_empty() {
            issues.push(Issue::new(&entity, "path has no links"));
            continue;
        }
        let mut links = Vec::with_capacity(p.links.len());
        for id in &p.links {
            match network.link_index(&id.0) {
                Some(l) => links.push(l),
                None => issues.push(Issue::new(&entity, format!("unknown link {id}"))),
            }
        }
        if links.len() != p.links.len() {
            continue;
        }
        let mut ok = true;
        for w in links.windows(2) {
            if network.links[w[0]].to != network.links[w[1]].from {
                issues.push(Issue::new(
                    &entity,
                    format!(
                        "consecutive links {} and {} do not share a node",
                        network.links[w[0]].id, network.links[w[1]].id
                    ),
                ));
                ok = false;
            }
        }
        let distinct: HashSet<_> = links.iter().collect();
        if distinct.len() != links.len() {
            issues.push(Issue::new(&entity, "path repeats a link"));
            ok = false;
        }
        let o = &ods[od];
        if network.links[links[0]].from != o.origin {
            issues.push(Issue::new(&entity, format!("first link does not leave origin of O-D {}", o.id)));
            ok = false;
        }
        if network.links[*links.last().unwrap()].to != o.destination {
            issues.push(Issue::new(&entity, format!("last link does not enter destination of O-D {}", o.id)));
            ok = false;
        }
        if ok {
            paths.push(Path { id: p.id.0.clone(), od, links });
        }
    }
    paths
}

fn attach_paths(
    mut ods: Vec<OdPair>,
    paths: &[Path],
    tolerances: &[ToleranceRow],
    default_epsilon: f64,
    issues: &mut Vec<Issue>,
) -> Vec<OdPair> {
    for (i, p) in paths.iter().enumerate() {
        ods[p.od].paths.push(i);
    }
    let mut table: HashMap<(&str, &str), f64> = HashMap::new();
    for row in tolerances {
        let entity = format!("tolerance {}/{}", row.od_id, row.path_id);
        if !(row.epsilon_s.is_finite() && row.epsilon_s >= 0.0) {
            issues.push(Issue::new(&entity, format!("epsilon must be nonnegative, got {}", row.epsilon_s)));
        }
        let known = ods.iter().any(|o| o.id == row.od_id && o.paths.iter().any(|&p| paths[p].id == row.path_id));
        if !known {
            issues.push(Issue::new(&entity, "no such path in this O-D"));
        }
        if table.insert((row.od_id.as_str(), row.path_id.as_str()), row.epsilon_s).is_some() {
            issues.push(Issue::new(&entity, "duplicate tolerance row"));
        }
    }
    for od in &mut ods {
        if od.paths.is_empty() {
            issues.push(Issue::new(format!("od {}", od.id), "O-D has no paths"));
        }
        od.tolerances = od
            .paths
            .iter()
            .map(|&p| match table.get(&(od.id.as_str(), paths[p].id.as_str())) {
                Some(&e) => e,
                None if tolerances.is_empty() => default_epsilon,
                None => {
                    issues.push(Issue::new(
                        format!("od {}", od.id),
                        format!("path {} missing from tolerance table", paths[p].id),
                    ));
                    default_epsilon
                }
            })
            .collect();
    }
    ods
}

fn build_signs(raw: &[RawSign], network: &Network, grid: Option<&TimeGrid>, issues: &mut Vec<Issue>) -> Vec<VmsSign> {
    let mut seen = HashSet::new();
    let mut signs = Vec::new();
    for s in raw {
        let entity = format!("vms {}", s.id);
        if !seen.insert(s.id.0.clone()) {
            issues.push(Issue::new(&entity, "duplicate sign id"));
        }
        let link = |id: &RawId, role: &str, issues: &mut Vec<Issue>| {
            let l = network.link_index(&id.0);
            if l.is_none() {
                issues.push(Issue::new(&entity, format!("unknown {role} {id}")));
            }
            l
        };
        let host = link(&s.host_link, "host_link", issues);
        let from = link(&s.from_link, "from_link", issues);
        let to = link(&s.to_link, "to_link", issues);
        let junction = network.node_index(&s.junction.0);
        if junction.is_none() {
            issues.push(Issue::new(&entity, format!("unknown junction {}", s.junction)));
        }
        let (Some(host), Some(from), Some(to), Some(junction)) = (host, from, to, junction) else {
            continue;
        };
        let mut ok = true;
        if from == to {
            issues.push(Issue::new(&entity, "from_link and to_link coincide"));
            ok = false;
        }
        if network.links[host].to != junction {
            issues.push(Issue::new(&entity, "host link does not end at the junction"));
            ok = false;
        }
        for (l, role) in [(from, "from_link"), (to, "to_link")] {
            if network.links[l].from != junction {
                issues.push(Issue::new(&entity, format!("{role} is not an outgoing link of the junction")));
                ok = false;
            }
        }
        let mut intervals: Vec<(f64, f64)> = s.omega.iter().map(|&[a, b]| (a, b)).collect();
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if !(a < b) {
                issues.push(Issue::new(&entity, format!("empty or reversed interval [{a}, {b})")));
                ok = false;
            }
            if let Some(g) = grid {
                if a < g.t0() || b > g.tf() {
                    issues.push(Issue::new(&entity, format!("interval [{a}, {b}) leaves the horizon")));
                    ok = false;
                }
            }
        }
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            issues.push(Issue::new(&entity, "active intervals overlap"));
            ok = false;
        }
        let active = ActiveSet::new(intervals);
        if active.measure() <= 0.0 {
            issues.push(Issue::new(&entity, "active set is empty"));
            ok = false;
        }
        if ok {
            signs.push(VmsSign { id: s.id.0.clone(), host_link: host, junction, from_link: from, to_link: to, active });
        }
    }
    signs
}
