use crate::network::Link;

/// Piecewise-linear cumulative vehicle count sampled at bin boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeCurve {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl CumulativeCurve {
    /// A curve holding only its initial value, zero at `t0`.
    pub fn new(t0: f64, dt: f64) -> Self {
        CumulativeCurve { t0, dt, values: vec![0.0] }
    }

    pub fn from_values(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "a cumulative curve needs its initial value");
        CumulativeCurve { t0, dt, values }
    }

    pub fn push(&mut self, v: f64) {
        self.values.push(v);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }

    /// Time of the last recorded boundary.
    pub fn end_time(&self) -> f64 {
        self.t0 + (self.values.len() - 1) as f64 * self.dt
    }

    /// Value at `t`, held constant outside the recorded range.
    pub fn at(&self, t: f64) -> f64 {
        if t <= self.t0 {
            return self.values[0];
        }
        let x = (t - self.t0) / self.dt;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.last();
        }
        let frac = x - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Earliest time at which the curve reaches `level`, or `None` if it
    /// never does within the recorded range.
    pub fn inverse(&self, level: f64) -> Option<f64> {
        if level <= self.values[0] {
            return Some(self.t0);
        }
        let j = self.values.partition_point(|&v| v < level);
        if j == self.values.len() {
            return None;
        }
        let (a, b) = (self.values[j - 1], self.values[j]);
        let frac = if b > a { (level - a) / (b - a) } else { 1.0 };
        Some(self.t0 + ((j - 1) as f64 + frac) * self.dt)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Vehicles the link can release during the step ending at `t_next`:
/// `min(C·dt, N_up(t_next − L/vf) − N_down(t))`.
pub fn sending_flow(link: &Link, up: &CumulativeCurve, down: &CumulativeCurve, t_next: f64, dt: f64) -> f64 {
    let demand = up.at(t_next - link.free_flow_time()) - down.last();
    (link.capacity * dt).min(demand).max(0.0)
}

/// Vehicles the link can admit during the step ending at `t_next`:
/// `min(C·dt, N_down(t_next − L/w) + kjam·L − N_up(t))`.
pub fn receiving_flow(link: &Link, up: &CumulativeCurve, down: &CumulativeCurve, t_next: f64, dt: f64) -> f64 {
    let supply = down.at(t_next - link.backward_wave_time()) + link.storage() - up.last();
    (link.capacity * dt).min(supply).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link() -> Link {
        Link {
            id: "a".into(),
            from: 0,
            to: 1,
            length: 100.0,
            free_flow_speed: 10.0,
            capacity: 0.5,
            jam_density: 0.2,
            backward_wave_speed: 5.0,
        }
    }

    #[test]
    fn interpolation_and_inverse() {
        let c = CumulativeCurve::from_values(0.0, 2.0, vec![0.0, 2.0, 2.0, 6.0]);
        assert_eq!(c.at(-1.0), 0.0);
        assert_eq!(c.at(1.0), 1.0);
        assert_eq!(c.at(3.0), 2.0);
        assert_eq!(c.at(5.0), 4.0);
        assert_eq!(c.at(100.0), 6.0);
        assert_eq!(c.inverse(0.0), Some(0.0));
        assert_eq!(c.inverse(1.0), Some(1.0));
        // plateau: earliest time the level is reached
        assert_eq!(c.inverse(2.0), Some(2.0));
        assert_eq!(c.inverse(4.0), Some(5.0));
        assert_eq!(c.inverse(6.5), None);
    }

    #[test]
    fn free_flow_sending() {
        let l = link(); // 10 s free flow
        let up = CumulativeCurve::from_values(0.0, 1.0, (0..=20).map(|k| 0.2 * k as f64).collect());
        let mut down = CumulativeCurve::new(0.0, 1.0);
        for k in 1..=10 {
            let s = sending_flow(&l, &up, &down, k as f64, 1.0);
            down.push(down.last() + s);
        }
        assert_eq!(down.last(), 0.0);
        let s = sending_flow(&l, &up, &down, 11.0, 1.0);
        assert!((s - 0.2).abs() < 1e-12);
    }

    #[test]
    fn jam_full_link_admits_nothing() {
        let l = link(); // storage 20 veh, backward wave time 20 s
                        // 30 in, 10 out, nobody has left for the last 20 s
        let up = CumulativeCurve::from_values(0.0, 1.0, (0..=40).map(|k| 0.75 * k as f64).collect());
        let down = CumulativeCurve::from_values(0.0, 1.0, (0..=40).map(|k| (0.5 * k as f64).min(10.0)).collect());
        assert_eq!(up.last() - down.last(), l.storage());
        assert_eq!(receiving_flow(&l, &up, &down, 41.0, 1.0), 0.0);
    }

    #[test]
    fn receiving_capped_by_capacity() {
        let l = link();
        let up = CumulativeCurve::new(0.0, 1.0);
        let down = CumulativeCurve::new(0.0, 1.0);
        assert_eq!(receiving_flow(&l, &up, &down, 1.0, 1.0), 0.5);
    }
}
