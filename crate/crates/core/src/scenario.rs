//! Synthetic test beds: random geometric graphs, band-limited test signals,
//! link-removal perturbations, and a radio-cartography scenario where
//! distributed access points estimate the spatial power map of intermittent
//! transmitters.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSignal};
use crate::noise;
use crate::sets::FrequencySet;
use crate::spectrum::Spectrum;

/// Side length of the square operating region.
pub const REGION_SIDE: f64 = 1.0;

/// Near-field clamp for the inverse-square law, as a fraction of the region
/// side: distances below this floor are treated as the floor, keeping the
/// field bounded when a transmitter sits on top of a sensor.
pub const NEAR_FIELD_CLAMP_FRACTION: f64 = 0.01;

/// Radius search used by [`CartographyScenario::generate`]: smallest radius
/// on this grid giving a connected graph with mean degree in
/// [`DEGREE_RANGE`].
const RADIUS_GRID_STEP: f64 = 0.002;
const RADIUS_GRID_MAX: f64 = 1.5;

/// Acceptable mean-degree window for generated geometric graphs.
pub const DEGREE_RANGE: (f64, f64) = (4.0, 8.0);

/// A transmitter: planar position and positive power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimaryUser {
    /// Position in the unit operating region.
    pub pos: [f64; 2],
    /// Transmit power in watts.
    pub power: f64,
}

/// One interval of the activity schedule: transmitters in `active` are on
/// for iterations `from..to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub from: usize,
    pub to: usize,
    pub active: Vec<usize>,
}

/// Serialisable description of a cartography scenario. Sensor positions are
/// derived from `seed`, so the file stays small and the scenario
/// reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_raps: usize,
    pub pu: Vec<PrimaryUser>,
    pub radius: f64,
    pub noise_var: f64,
    pub schedule: Vec<ScheduleEntry>,
}

/// A fully resolved cartography scenario: sensor (RAP) positions, the
/// proximity graph rule, transmitter schedule and detector noise.
#[derive(Clone, Debug, PartialEq)]
pub struct CartographyScenario {
    config: ScenarioConfig,
    positions: Vec<[f64; 2]>,
}

impl CartographyScenario {
    /// Validates a config and derives the sensor positions from its seed.
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        if config.n_raps == 0 {
            return Err(Error::InvalidConfig("scenario needs at least one sensor".into()));
        }
        if !(config.radius.is_finite() && config.radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "connection radius must be positive, got {}",
                config.radius
            )));
        }
        if !(config.noise_var.is_finite() && config.noise_var >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise variance must be nonnegative, got {}",
                config.noise_var
            )));
        }
        for (i, pu) in config.pu.iter().enumerate() {
            if !(pu.power.is_finite() && pu.power > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "transmitter {i} power must be positive, got {}",
                    pu.power
                )));
            }
            if !pu.pos.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "transmitter {i} position is not finite"
                )));
            }
        }
        if config.schedule.is_empty() {
            return Err(Error::InvalidConfig("schedule must not be empty".into()));
        }
        let mut cursor = 0usize;
        for (k, e) in config.schedule.iter().enumerate() {
            if e.from != cursor || e.to <= e.from {
                return Err(Error::InvalidConfig(format!(
                    "schedule entry {k} ([{}, {})) does not partition the horizon",
                    e.from, e.to
                )));
            }
            for &id in &e.active {
                if id >= config.pu.len() {
                    return Err(Error::IndexOutOfRange {
                        index: id,
                        size: config.pu.len(),
                    });
                }
            }
            cursor = e.to;
        }
        let positions = sensor_positions(config.seed, config.n_raps);
        Ok(Self { config, positions })
    }

    /// Builds a scenario, choosing the connection radius automatically: the
    /// smallest grid radius whose proximity graph is connected with mean
    /// degree in [`DEGREE_RANGE`]. The chosen radius ends up in the config, so
    /// saving and reloading reproduces the same graph.
    pub fn generate(
        seed: u64,
        n_raps: usize,
        pu: Vec<PrimaryUser>,
        noise_var: f64,
        schedule: Vec<ScheduleEntry>,
    ) -> Result<Self> {
        if n_raps == 0 {
            return Err(Error::InvalidConfig("scenario needs at least one sensor".into()));
        }
        let positions = sensor_positions(seed, n_raps);
        let radius = connection_radius(&positions)?;
        Self::from_config(ScenarioConfig {
            seed,
            n_raps,
            pu,
            radius,
            noise_var,
            schedule,
        })
    }

    /// The underlying config.
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Sensor positions, derived from the config seed.
    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    /// Proximity graph of the sensors.
    pub fn graph(&self) -> Graph {
        geometric_graph(&self.positions, self.config.radius)
    }

    /// True power field when the transmitters in `active` are on.
    pub fn field(&self, active: &[usize]) -> Result<GraphSignal> {
        for &id in active {
            if id >= self.config.pu.len() {
                return Err(Error::IndexOutOfRange {
                    index: id,
                    size: self.config.pu.len(),
                });
            }
        }
        Ok(pathloss_field(
            &self.positions,
            &self.config.pu,
            active,
            NEAR_FIELD_CLAMP_FRACTION * REGION_SIDE,
        ))
    }

    /// Transmitters active at iteration `n`.
    pub fn active_at(&self, n: usize) -> Result<&[usize]> {
        self.config
            .schedule
            .iter()
            .find(|e| n >= e.from && n < e.to)
            .map(|e| e.active.as_slice())
            .ok_or_else(|| {
                Error::InvalidConfig(format!("iteration {n} is outside the schedule horizon"))
            })
    }

    /// One past the last scheduled iteration.
    pub fn horizon(&self) -> usize {
        self.config.schedule.last().map(|e| e.to).unwrap_or(0)
    }

    /// Per-sensor noise variance vector.
    pub fn noise_vector(&self) -> DVector<f64> {
        DVector::from_element(self.config.n_raps, self.config.noise_var)
    }

    /// Serialises the config as JSON.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.config).expect("scenario serialisation")
    }

    /// Parses and validates a config from JSON.
    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_config(serde_json::from_str(s)?)
    }

    /// Writes the config to `path`.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    /// Reads a config from `path`.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Seeded uniform positions in the unit operating region.
pub fn random_positions(seed: u64, n: usize) -> Vec<[f64; 2]> {
    let coords = noise::uniform_vector(seed, 2 * n, 0.0, REGION_SIDE);
    (0..n).map(|i| [coords[2 * i], coords[2 * i + 1]]).collect()
}

fn sensor_positions(seed: u64, n: usize) -> Vec<[f64; 2]> {
    random_positions(seed, n)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Smallest grid radius whose proximity graph on `positions` is connected
/// with mean degree in [`DEGREE_RANGE`].
pub fn connection_radius(positions: &[[f64; 2]]) -> Result<f64> {
    let n = positions.len();
    if n == 1 {
        return Ok(RADIUS_GRID_STEP);
    }
    let mut r = RADIUS_GRID_STEP;
    while r <= RADIUS_GRID_MAX {
        let g = geometric_graph(positions, r);
        let mean_degree = 2.0 * g.edges().len() as f64 / n as f64;
        if mean_degree > DEGREE_RANGE.1 {
            break;
        }
        if mean_degree >= DEGREE_RANGE.0 && g.is_connected() {
            return Ok(r);
        }
        r += RADIUS_GRID_STEP;
    }
    Err(Error::InvalidConfig(
        "no connection radius gives a connected graph with mean degree in range".into(),
    ))
}

/// Proximity graph: unit-weight edge between every pair at Euclidean
/// distance at most `radius`.
pub fn geometric_graph(positions: &[[f64; 2]], radius: f64) -> Graph {
    let n = positions.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(positions[i], positions[j]) <= radius {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("construction is valid")
}

/// Free-space power field: value at sensor `i` is the sum over active
/// transmitters of `power / max(d, d_min)²`.
pub fn pathloss_field(
    positions: &[[f64; 2]],
    pus: &[PrimaryUser],
    active: &[usize],
    d_min: f64,
) -> GraphSignal {
    let mut x = DVector::zeros(positions.len());
    for (i, &p) in positions.iter().enumerate() {
        for &id in active {
            let pu = &pus[id];
            let d = dist(p, pu.pos).max(d_min);
            x[i] += pu.power / (d * d);
        }
    }
    GraphSignal::new(x)
}

/// How to fill the band coefficients of a test signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffRule {
    /// Every selected frequency gets coefficient one.
    Unit,
    /// Independent standard-normal coefficients from the given seed.
    Seeded { seed: u64 },
}

/// Exactly band-limited test signal `U_F s_F` with coefficients per `rule`.
pub fn bandlimited_test_signal(
    spectrum: &Spectrum,
    freq: &FrequencySet,
    rule: CoeffRule,
) -> Result<GraphSignal> {
    if freq.is_empty() {
        return Err(Error::InvalidConfig(
            "test signal needs a nonempty frequency set".into(),
        ));
    }
    if let Some(&max) = freq.indices().last() {
        if max >= spectrum.n() {
            return Err(Error::IndexOutOfRange {
                index: max,
                size: spectrum.n(),
            });
        }
    }
    let coeffs = match rule {
        CoeffRule::Unit => vec![1.0; freq.len()],
        CoeffRule::Seeded { seed } => noise::normal_vector(seed, freq.len()),
    };
    let sub = spectrum.sub_basis(freq.indices());
    Ok(GraphSignal::new(sub * DVector::from_vec(coeffs)))
}

/// Copy of `g` with the edge `(i, j)` removed.
pub fn remove_link(g: &Graph, i: usize, j: usize) -> Result<Graph> {
    let n = g.n_nodes();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, size: n });
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, size: n });
    }
    if i == j || g.weight(i, j) == 0.0 {
        return Err(Error::NoSuchEdge { i, j });
    }
    let mut w = g.weights().clone();
    w[(i, j)] = 0.0;
    w[(j, i)] = 0.0;
    Graph::from_weights(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn geometric_graph_extremes() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(geometric_graph(&pts, 1e-9).edges().len(), 0);
        assert_eq!(geometric_graph(&pts, 2.0).edges().len(), 3);
    }

    #[test]
    fn collinear_points_make_a_path() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let g = geometric_graph(&pts, 1.5);
        assert_eq!(g.edges(), vec![(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn pathloss_examples() {
        let pts = [[0.0, 0.0], [2.0, 0.0]];
        let pus = vec![PrimaryUser {
            pos: [0.0, 0.0],
            power: 1.0,
        }];
        let none = pathloss_field(&pts, &pus, &[], 0.01);
        assert_eq!(none.as_vector(), &DVector::zeros(2));
        let x = pathloss_field(&pts, &pus, &[0], 0.01);
        assert_abs_diff_eq!(x[1], 0.25, epsilon = 1e-15); // distance 2
        assert_abs_diff_eq!(x[0], 1.0 / (0.01f64 * 0.01), epsilon = 1e-9); // clamped
    }

    #[test]
    fn pathloss_is_nonnegative_and_additive() {
        let pts = sensor_positions(5, 20);
        let pus = vec![
            PrimaryUser {
                pos: [0.3, 0.3],
                power: 1.0,
            },
            PrimaryUser {
                pos: [0.8, 0.6],
                power: 0.5,
            },
        ];
        let both = pathloss_field(&pts, &pus, &[0, 1], 0.01);
        let a = pathloss_field(&pts, &pus, &[0], 0.01);
        let b = pathloss_field(&pts, &pus, &[1], 0.01);
        for i in 0..20 {
            assert!(a[i] >= 0.0 && b[i] >= 0.0);
            assert_abs_diff_eq!(both[i], a[i] + b[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn test_signal_constant_on_single_zero_frequency() {
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])
            .unwrap();
        let spectrum = Spectrum::decompose(&g).unwrap();
        let x = bandlimited_test_signal(&spectrum, &FrequencySet::lowest(1, 4).unwrap(), CoeffRule::Unit)
            .unwrap();
        for i in 1..4 {
            assert_abs_diff_eq!(x[i], x[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn test_signal_has_unit_band_coefficients() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)])
            .unwrap();
        let spectrum = Spectrum::decompose(&g).unwrap();
        let f = FrequencySet::lowest(3, 5).unwrap();
        let x = bandlimited_test_signal(&spectrum, &f, CoeffRule::Unit).unwrap();
        let coeffs = spectrum.gft(&x).unwrap();
        for i in 0..5 {
            let expect = if i < 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(coeffs[i], expect, epsilon = 1e-10);
        }
        // exactly band-limited: projection is a fixed point
        let band = crate::operators::BandLimiter::new(&spectrum, f).unwrap();
        let proj = band.apply(&x).unwrap();
        assert!((proj.as_vector() - x.as_vector()).amax() < 1e-12);
        // seeded variant reproducible
        let a = bandlimited_test_signal(&spectrum, &FrequencySet::lowest(2, 5).unwrap(), CoeffRule::Seeded { seed: 4 })
            .unwrap();
        let b = bandlimited_test_signal(&spectrum, &FrequencySet::lowest(2, 5).unwrap(), CoeffRule::Seeded { seed: 4 })
            .unwrap();
        assert_eq!(a, b);
        assert!(bandlimited_test_signal(&spectrum, &FrequencySet::new(vec![], 5).unwrap(), CoeffRule::Unit).is_err());
    }

    #[test]
    fn remove_link_round_trip() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        let cut = remove_link(&g, 1, 0).unwrap();
        assert_eq!(cut.weight(0, 1), 0.0);
        assert!(matches!(
            remove_link(&g, 0, 2),
            Err(Error::NoSuchEdge { i: 0, j: 2 })
        ));
        // re-adding restores the original exactly
        let restored = Graph::from_edges(3, &{
            let mut e = cut.edges();
            e.push((0, 1, 1.0));
            e
        })
        .unwrap();
        assert_eq!(restored, g);
        // two-node graph becomes empty
        let g2 = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(remove_link(&g2, 0, 1).unwrap().edges().len(), 0);
    }

    #[test]
    fn scenario_round_trip_and_validation() {
        let sc = CartographyScenario::generate(
            11,
            30,
            vec![PrimaryUser {
                pos: [0.5, 0.5],
                power: 1.0,
            }],
            1e-4,
            vec![
                ScheduleEntry {
                    from: 0,
                    to: 10,
                    active: vec![0],
                },
                ScheduleEntry {
                    from: 10,
                    to: 20,
                    active: vec![],
                },
            ],
        )
        .unwrap();
        let back = CartographyScenario::from_json_str(&sc.to_json_string()).unwrap();
        assert_eq!(&sc, &back);
        assert_eq!(sc.horizon(), 20);
        assert_eq!(sc.active_at(9).unwrap(), &[0]);
        assert_eq!(sc.active_at(10).unwrap(), &[] as &[usize]);
        assert!(sc.active_at(20).is_err());
        let g = sc.graph();
        assert!(g.is_connected());
        let mean_degree = 2.0 * g.edges().len() as f64 / 30.0;
        assert!((DEGREE_RANGE.0..=DEGREE_RANGE.1).contains(&mean_degree));

        // gap in the schedule is rejected
        let mut bad = sc.config().clone();
        bad.schedule[1].from = 12;
        assert!(CartographyScenario::from_config(bad).is_err());
        // bad transmitter id is rejected
        let mut bad = sc.config().clone();
        bad.schedule[0].active = vec![3];
        assert!(CartographyScenario::from_config(bad).is_err());
    }
}
