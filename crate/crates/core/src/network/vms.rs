use super::{OdPair, Path, VmsSign};

/// Split of one O-D's paths at a sign's diversion junction.
#[derive(Debug, Clone, PartialEq)]
pub struct VmsPartition {
    pub sign: usize,
    pub od: usize,
    /// Paths continuing from the host link onto the recommended link.
    pub follow: Vec<usize>,
    /// Paths continuing from the host link onto the discouraged link.
    pub not_follow: Vec<usize>,
}

impl VmsPartition {
    /// Diversion is possible only when both alternatives exist.
    pub fn is_affected(&self) -> bool {
        !self.follow.is_empty() && !self.not_follow.is_empty()
    }
}

fn uses_turn(path: &Path, host: usize, next: usize) -> bool {
    path.links.windows(2).any(|w| w[0] == host && w[1] == next)
}

/// Classifies every O-D's paths against `sign`. O-Ds with no path turning
/// from the host link onto either alternative are omitted; O-Ds that have
/// only one of the two sets are returned but report `is_affected() == false`.
pub fn paths_through_vms(sign_index: usize, sign: &VmsSign, paths: &[Path], ods: &[OdPair]) -> Vec<VmsPartition> {
    ods.iter()
        .enumerate()
        .filter_map(|(od_index, od)| {
            let follow: Vec<usize> =
                od.paths.iter().copied().filter(|&p| uses_turn(&paths[p], sign.host_link, sign.to_link)).collect();
            let not_follow: Vec<usize> =
                od.paths.iter().copied().filter(|&p| uses_turn(&paths[p], sign.host_link, sign.from_link)).collect();
            if follow.is_empty() && not_follow.is_empty() {
                None
            } else {
                Some(VmsPartition { sign: sign_index, od: od_index, follow, not_follow })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ActiveSet;

    fn path(id: &str, links: &[usize]) -> Path {
        Path { id: id.into(), od: 0, links: links.to_vec() }
    }

    fn od(paths: Vec<usize>) -> OdPair {
        let n = paths.len();
        OdPair {
            id: "od".into(),
            origin: 0,
            destination: 5,
            demand: 1.0,
            desired_arrival: 10.0,
            paths,
            tolerances: vec![0.0; n],
        }
    }

    // Link indices follow the figure numbering minus one: link 1 -> 0, ...
    fn sign() -> VmsSign {
        VmsSign { id: "s".into(), host_link: 0, junction: 1, from_link: 1, to_link: 2, active: ActiveSet::default() }
    }

    #[test]
    fn figure_one_partition() {
        let paths = vec![path("p1", &[0, 1, 4, 6]), path("p2", &[0, 1, 3, 5, 6]), path("p3", &[0, 2, 5, 6])];
        let parts = paths_through_vms(0, &sign(), &paths, &[od(vec![0, 1, 2])]);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].follow, vec![2]);
        assert_eq!(parts[0].not_follow, vec![0, 1]);
        assert!(parts[0].is_affected());
    }

    #[test]
    fn od_not_touching_host_is_omitted() {
        let paths = vec![path("q", &[3, 5, 6])];
        assert!(paths_through_vms(0, &sign(), &paths, &[od(vec![0])]).is_empty());
    }

    #[test]
    fn od_only_on_recommended_link_is_unaffected() {
        let paths = vec![path("a", &[0, 2, 5]), path("b", &[0, 2, 5, 6])];
        let parts = paths_through_vms(0, &sign(), &paths, &[od(vec![0, 1])]);
        assert_eq!(parts.len(), 1);
        assert!(!parts[0].is_affected());
        assert!(parts[0].not_follow.is_empty());
    }
}
