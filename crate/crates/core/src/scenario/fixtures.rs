//! Built-in scenarios. Link parameters are synthetic.

use super::RunConfig;
use crate::network::{
    DemandRow, GridSpec, RawId, RawLink, RawNetwork, RawNode, RawPath, RawSign, ScenarioInputs, ToleranceRow,
};

fn link(id: &str, from: &str, to: &str, length: f64, cap: f64) -> RawLink {
    RawLink {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        length_m: length,
        vf_mps: 12.5,
        cap_vps: cap,
        kjam_vpm: 0.15,
        w_mps: 5.0,
    }
}

fn path(id: &str, od: &str, links: &[&str]) -> RawPath {
    RawPath { id: id.into(), od: od.into(), links: links.iter().map(|&l| RawId::from(l)).collect() }
}

/// The seven-link, three-path network with one sign on link 1.
///
/// Link 2 is narrowed and link 5 is a bottleneck, so the original corridor
/// via c queues and the sign recommends the bypass via link 3. A bottleneck
/// at link 2 alone would queue on link 1, ahead of the diverge, and delay
/// both branches alike.
pub fn fig1() -> ScenarioInputs {
    let nodes = ["a", "b", "c", "d", "e", "f"].iter().map(|&n| RawNode { id: n.into() }).collect();
    let links = vec![
        link("1", "a", "b", 500.0, 0.5),
        link("2", "b", "c", 500.0, 0.3),
        link("3", "b", "d", 500.0, 0.5),
        link("4", "c", "d", 500.0, 0.5),
        link("5", "c", "e", 500.0, 0.02),
        link("6", "d", "e", 500.0, 0.5),
        link("7", "e", "f", 500.0, 0.5),
    ];
    let paths = vec![
        path("p1", "od1", &["1", "2", "5", "7"]),
        path("p2", "od1", &["1", "2", "4", "6", "7"]),
        path("p3", "od1", &["1", "3", "6", "7"]),
    ];
    let demand = vec![DemandRow {
        od_id: "od1".into(),
        origin: "a".into(),
        destination: "f".into(),
        demand: 200.0,
        desired_arrival: 2100.0,
    }];
    let tolerances = ["p1", "p2", "p3"]
        .iter()
        .map(|&p| ToleranceRow { od_id: "od1".into(), path_id: p.into(), epsilon_s: 120.0 })
        .collect();
    let sign = RawSign {
        id: "vms1".into(),
        host_link: "1".into(),
        junction: "b".into(),
        from_link: "2".into(),
        to_link: "3".into(),
        omega: vec![[600.0, 2400.0]],
    };
    let mut config = RunConfig::new(GridSpec { t0: 0.0, tf: 3600.0, dt: 10.0 });
    config.initial_profile.window = Some([1200.0, 2100.0]);
    // the default step overshoots on this network's cost scale
    config.solver.lambda = 1e-3;
    ScenarioInputs {
        network: RawNetwork { links, nodes, junctions: Vec::new() },
        paths,
        demand,
        tolerances,
        signs: vec![sign],
        config,
    }
}

/// A single-path corridor of up to a few links in series.
#[derive(Debug, Clone, PartialEq)]
pub struct CorridorSpec {
    /// (length m, capacity veh/s) per link, upstream first
    pub links: Vec<(f64, f64)>,
    pub grid: GridSpec,
    pub demand: f64,
    pub desired_arrival: f64,
}

impl Default for CorridorSpec {
    fn default() -> Self {
        CorridorSpec {
            links: vec![(500.0, 0.5), (500.0, 0.25), (500.0, 0.5)],
            grid: GridSpec { t0: 0.0, tf: 1800.0, dt: 1.0 },
            demand: 300.0,
            desired_arrival: 1200.0,
        }
    }
}

/// Nodes `n0..nN`, links `l1..lN`, one O-D and one path.
pub fn corridor(spec: &CorridorSpec) -> ScenarioInputs {
    let n = spec.links.len();
    let nodes = (0..=n).map(|i| RawNode { id: RawId(format!("n{i}")) }).collect();
    let links = spec
        .links
        .iter()
        .enumerate()
        .map(|(i, &(len, cap))| link(&format!("l{}", i + 1), &format!("n{i}"), &format!("n{}", i + 1), len, cap))
        .collect();
    let ids: Vec<String> = (1..=n).map(|i| format!("l{i}")).collect();
    let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
    ScenarioInputs {
        network: RawNetwork { links, nodes, junctions: Vec::new() },
        paths: vec![path("p", "od", &ids)],
        demand: vec![DemandRow {
            od_id: "od".into(),
            origin: "n0".into(),
            destination: format!("n{n}"),
            demand: spec.demand,
            desired_arrival: spec.desired_arrival,
        }],
        tolerances: Vec::new(),
        signs: Vec::new(),
        config: RunConfig::new(spec.grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_topology() {
        let s = fig1().validate().unwrap();
        assert_eq!(s.network.links.len(), 7);
        assert_eq!(s.paths.len(), 3);
        assert_eq!(s.ods.len(), 1);
        assert_eq!(s.affected_partitions().count(), 1);
        let part = s.affected_partitions().next().unwrap();
        assert_eq!(part.follow, vec![2]);
        assert_eq!(part.not_follow, vec![0, 1]);
    }

    #[test]
    fn corridor_validates() {
        let s = corridor(&CorridorSpec::default()).validate().unwrap();
        assert_eq!(s.paths[0].links, vec![0, 1, 2]);
        assert!(s.signs.is_empty());
    }
}
