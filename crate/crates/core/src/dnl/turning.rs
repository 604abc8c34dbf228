use crate::error::ParamError;
use crate::network::ActiveSet;

/// Applies VMS diversion to a pair of turning ratios at a junction.
///
/// While the sign is on, a share `cr` of the flow bound for the discouraged
/// link moves to the recommended link. The pair's sum is preserved; with
/// `alpha_from + alpha_to == 1` the revised pair sums to exactly one.
pub fn revise_turning_ratios(
    alpha_from: f64,
    alpha_to: f64,
    cr: f64,
    t: f64,
    omega: &ActiveSet,
) -> Result<(f64, f64), ParamError> {
    if !(0.0..=1.0).contains(&cr) {
        return Err(ParamError::ComplianceRate(cr));
    }
    if !(alpha_from >= 0.0 && alpha_to >= 0.0 && alpha_from + alpha_to <= 1.0 + 1e-12) {
        return Err(ParamError::Ratios(alpha_from, alpha_to));
    }
    if cr == 0.0 || !omega.contains(t) {
        return Ok((alpha_from, alpha_to));
    }
    let from = alpha_from - cr * alpha_from;
    let to = (alpha_from + alpha_to) - from;
    Ok((from, to))
}

/// Where flow leaving a link goes next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Link(usize),
    /// The path ends at the link's downstream node.
    Sink,
}

/// Realised (VMS-revised) turning ratios at one link's downstream end.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTurning {
    pub link: usize,
    pub targets: Vec<Target>,
    /// `ratios[bin][target]`
    pub ratios: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurningRatios {
    pub(crate) per_link: Vec<LinkTurning>,
}

impl TurningRatios {
    pub fn link(&self, link: usize) -> &LinkTurning {
        &self.per_link[link]
    }

    pub fn iter(&self) -> impl Iterator<Item = &LinkTurning> {
        self.per_link.iter()
    }

    /// Ratio from `link` to `target` in `bin`; zero for an unknown target.
    pub fn ratio(&self, link: usize, target: Target, bin: usize) -> f64 {
        let lt = &self.per_link[link];
        lt.targets.iter().position(|&t| t == target).map_or(0.0, |j| lt.ratios[bin][j])
    }
}
