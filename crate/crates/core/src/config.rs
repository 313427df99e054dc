//! Scenario configuration: one JSON document per scenario, schema validation,
//! defaults, and conversion into the domain types.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approx::{ModelSetting, Scaling};
use crate::capacity::CapacityOptions;
use crate::ctmc::{BuildOptions, DEFAULT_CHOICE_RATE, DEFAULT_STATE_CAP, DEFAULT_WAITING_SLOTS};
use crate::error::{Error, Result};
use crate::junction::{
    ConflictMatrix, HeadwayTable, Junction, Route, ServiceSpec, TrafficClass, TrafficSpec,
    TrainType,
};
use crate::sim::SimConfig;
use crate::steady::SolveOptions;

pub const STATE_CAP_ENV: &str = "JUNCTIONQ_STATE_CAP";

fn default_t_u() -> f64 {
    60.0
}
fn default_arrival_cv() -> f64 {
    0.8
}
fn default_m() -> u32 {
    DEFAULT_WAITING_SLOTS
}
fn default_choice_rate() -> f64 {
    DEFAULT_CHOICE_RATE
}
fn default_state_cap() -> usize {
    DEFAULT_STATE_CAP
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_sweeps() -> usize {
    1_000_000
}
fn default_lower() -> f64 {
    1.0
}
fn default_upper() -> f64 {
    40.0
}
fn default_brent_tol() -> f64 {
    1e-3
}
fn default_p_main_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}
fn default_n_grid() -> Vec<f64> {
    (1..=10).map(|i| 4.0 * i as f64).collect()
}
fn default_horizon() -> f64 {
    1200.0
}
fn default_replications() -> u32 {
    100
}
fn default_seed() -> u64 {
    1
}
fn default_sample_interval() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteConfig {
    pub name: String,
    pub origin: String,
    pub destination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTypeConfig {
    pub name: String,
    pub class: TrafficClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadwayEntry {
    /// (route, train type) of the preceding train.
    pub from: (String, String),
    /// (route, train type) of the following train.
    pub to: (String, String),
    pub minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ServiceConfig {
    /// Service times derived from the headway table.
    Headways { entries: Vec<HeadwayEntry> },
    /// Fixed service rates (1/min) and variation coefficients per route.
    Direct {
        rates: BTreeMap<String, f64>,
        cvs: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionConfig {
    pub routes: Vec<RouteConfig>,
    /// Undirected conflicting route pairs by name; self-conflicts are implied.
    pub conflicts: Vec<(String, String)>,
    pub train_types: Vec<TrainTypeConfig>,
    pub service: ServiceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixEntry {
    #[serde(rename = "type")]
    pub train_type: String,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    #[serde(default = "default_t_u")]
    pub t_u: f64,
    pub p_main: f64,
    pub main_routes: Vec<String>,
    pub branch_routes: Vec<String>,
    pub main_mix: Vec<MixEntry>,
    pub branch_mix: Vec<MixEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default = "default_choice_rate")]
    pub choice_rate: f64,
    pub setting: ModelSetting,
    pub scaling: Scaling,
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            m: default_m(),
            choice_rate: default_choice_rate(),
            setting: ModelSetting::PhPh,
            scaling: Scaling::None,
            state_cap: default_state_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: default_tol(),
            max_sweeps: default_max_sweeps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityConfig {
    #[serde(default = "default_lower")]
    pub lower: f64,
    #[serde(default = "default_upper")]
    pub upper: f64,
    #[serde(default = "default_brent_tol")]
    pub xtol: f64,
    #[serde(default = "default_brent_tol")]
    pub rtol: f64,
    /// Extra sign-structure probe points before the search (0 = off).
    #[serde(default)]
    pub probe_grid: usize,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            lower: default_lower(),
            upper: default_upper(),
            xtol: default_brent_tol(),
            rtol: default_brent_tol(),
            probe_grid: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SweepConfig {
    #[serde(default = "default_p_main_grid")]
    pub p_main: Vec<f64>,
    #[serde(default = "default_n_grid")]
    pub n_totals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default)]
    pub queue_cap: Option<u32>,
    #[serde(default)]
    pub warmup: f64,
    /// Emit per-minute queue-length traces per replication.
    #[serde(default)]
    pub emit_trace: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            horizon: default_horizon(),
            replications: default_replications(),
            seed: default_seed(),
            sample_interval: default_sample_interval(),
            queue_cap: None,
            warmup: 0.0,
            emit_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub junction: JunctionConfig,
    pub traffic: TrafficConfig,
    #[serde(default = "default_arrival_cv")]
    pub arrival_cv: f64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub capacity: CapacityConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

impl ScenarioConfig {
    fn route_id(&self, name: &str) -> Result<usize> {
        self.junction
            .routes
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::Config(format!("unknown route '{name}'")))
    }

    fn type_id(&self, name: &str) -> Result<usize> {
        self.junction
            .train_types
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::Config(format!("unknown train type '{name}'")))
    }

    /// Full schema validation; called by [`load_config`] and the built-ins.
    pub fn validate(&self) -> Result<()> {
        let k = self.junction.routes.len();
        if k == 0 {
            return Err(Error::Config("at least one route is required".into()));
        }
        for i in 0..k {
            for j in i + 1..k {
                if self.junction.routes[i].name == self.junction.routes[j].name {
                    return Err(Error::Config(format!(
                        "duplicate route name '{}'",
                        self.junction.routes[i].name
                    )));
                }
            }
        }
        for (a, b) in &self.junction.conflicts {
            self.route_id(a)?;
            self.route_id(b)?;
        }
        if !(0.0..=1.0).contains(&self.traffic.p_main) {
            return Err(Error::Config(format!(
                "p_main must lie in [0, 1], got {}",
                self.traffic.p_main
            )));
        }
        for name in self.traffic.main_routes.iter().chain(&self.traffic.branch_routes) {
            self.route_id(name)?;
        }
        for mix in [&self.traffic.main_mix, &self.traffic.branch_mix] {
            for e in mix {
                self.type_id(&e.train_type)?;
                if !(0.0..=1.0).contains(&e.share) {
                    return Err(Error::Config(format!(
                        "mix share {} for '{}' out of [0, 1]",
                        e.share, e.train_type
                    )));
                }
            }
        }
        if self.model.setting == ModelSetting::PhPh && self.model.scaling != Scaling::None {
            return Err(Error::Config(
                "a fully phase-type model is not combined with a scaling formula".into(),
            ));
        }
        if !(self.arrival_cv > 0.0 && self.arrival_cv <= 1.0) {
            return Err(Error::Config(format!(
                "arrival_cv must lie in (0, 1], got {}",
                self.arrival_cv
            )));
        }
        match &self.junction.service {
            ServiceConfig::Direct { rates, cvs } => {
                for r in &self.junction.routes {
                    if !rates.contains_key(&r.name) || !cvs.contains_key(&r.name) {
                        return Err(Error::Config(format!(
                            "direct service spec missing route '{}'",
                            r.name
                        )));
                    }
                }
            }
            ServiceConfig::Headways { entries } => {
                for e in entries {
                    self.route_id(&e.from.0)?;
                    self.type_id(&e.from.1)?;
                    self.route_id(&e.to.0)?;
                    self.type_id(&e.to.1)?;
                    if !(e.minutes > 0.0) {
                        return Err(Error::Config(format!(
                            "headway {:?} -> {:?} must be positive",
                            e.from, e.to
                        )));
                    }
                }
                self.check_headway_coverage(entries)?;
            }
        }
        Ok(())
    }

    /// Every ordered conflicting pair with demand on both sides needs an entry.
    fn check_headway_coverage(&self, entries: &[HeadwayEntry]) -> Result<()> {
        let junction = self.junction_unchecked()?;
        let have: std::collections::HashSet<((usize, usize), (usize, usize))> = entries
            .iter()
            .map(|e| {
                Ok((
                    (self.route_id(&e.from.0)?, self.type_id(&e.from.1)?),
                    (self.route_id(&e.to.0)?, self.type_id(&e.to.1)?),
                ))
            })
            .collect::<Result<_>>()?;
        // demanded (route, type) combinations from the line mixes
        let mut demanded: Vec<(usize, usize)> = Vec::new();
        for (routes, mix) in [
            (&self.traffic.main_routes, &self.traffic.main_mix),
            (&self.traffic.branch_routes, &self.traffic.branch_mix),
        ] {
            for rn in routes {
                let r = self.route_id(rn)?;
                for e in mix {
                    if e.share > 0.0 {
                        demanded.push((r, self.type_id(&e.train_type)?));
                    }
                }
            }
        }
        let mut missing = Vec::new();
        for &(r, t) in &demanded {
            for &(rp, tp) in &demanded {
                if junction.conflicts.conflicts(r, rp) && !have.contains(&((r, t), (rp, tp))) {
                    missing.push(format!(
                        "({},{})->({},{})",
                        self.junction.routes[r].name,
                        self.junction.train_types[t].name,
                        self.junction.routes[rp].name,
                        self.junction.train_types[tp].name,
                    ));
                }
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            missing.sort();
            Err(Error::MissingHeadways { pairs: missing })
        }
    }

    fn junction_unchecked(&self) -> Result<Junction> {
        let routes: Vec<Route> = self
            .junction
            .routes
            .iter()
            .enumerate()
            .map(|(id, r)| Route {
                id,
                name: r.name.clone(),
                origin: r.origin.clone(),
                destination: r.destination.clone(),
            })
            .collect();
        let train_types: Vec<TrainType> = self
            .junction
            .train_types
            .iter()
            .enumerate()
            .map(|(id, t)| TrainType {
                id,
                name: t.name.clone(),
                class: t.class,
            })
            .collect();
        let pairs: Vec<(usize, usize)> = self
            .junction
            .conflicts
            .iter()
            .map(|(a, b)| Ok((self.route_id(a)?, self.route_id(b)?)))
            .collect::<Result<_>>()?;
        let conflicts = ConflictMatrix::from_pairs(routes.len(), &pairs)?;
        let service = match &self.junction.service {
            ServiceConfig::Headways { entries } => {
                let mut table = HeadwayTable::new();
                for e in entries {
                    table.insert(
                        (self.route_id(&e.from.0)?, self.type_id(&e.from.1)?),
                        (self.route_id(&e.to.0)?, self.type_id(&e.to.1)?),
                        e.minutes,
                    )?;
                }
                ServiceSpec::Headways(table)
            }
            ServiceConfig::Direct { rates, cvs } => {
                let mut rate_vec = vec![0.0; routes.len()];
                let mut cv_vec = vec![1.0; routes.len()];
                for r in &routes {
                    rate_vec[r.id] = *rates
                        .get(&r.name)
                        .ok_or_else(|| Error::Config(format!("missing service rate for '{}'", r.name)))?;
                    cv_vec[r.id] = *cvs
                        .get(&r.name)
                        .ok_or_else(|| Error::Config(format!("missing service cv for '{}'", r.name)))?;
                }
                ServiceSpec::Direct { rates: rate_vec, cvs: cv_vec }
            }
        };
        Ok(Junction {
            routes,
            train_types,
            conflicts,
            service,
        })
    }

    pub fn junction(&self) -> Result<Junction> {
        self.validate()?;
        self.junction_unchecked()
    }

    pub fn traffic_spec(&self, n_total: f64) -> Result<TrafficSpec> {
        let to_ids = |names: &[String]| -> Result<Vec<usize>> {
            names.iter().map(|n| self.route_id(n)).collect()
        };
        let to_mix = |mix: &[MixEntry]| -> Result<Vec<(usize, f64)>> {
            mix.iter()
                .map(|e| Ok((self.type_id(&e.train_type)?, e.share)))
                .collect()
        };
        Ok(TrafficSpec {
            n_total,
            t_u: self.traffic.t_u,
            p_main: self.traffic.p_main,
            main_routes: to_ids(&self.traffic.main_routes)?,
            branch_routes: to_ids(&self.traffic.branch_routes)?,
            main_mix: to_mix(&self.traffic.main_mix)?,
            branch_mix: to_mix(&self.traffic.branch_mix)?,
        })
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            m: self.model.m,
            choice_rate: self.model.choice_rate,
            state_cap: self.model.state_cap,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.solver.tol,
            max_sweeps: self.solver.max_sweeps,
            ..Default::default()
        }
    }

    pub fn capacity_options(&self) -> CapacityOptions {
        CapacityOptions {
            lower: self.capacity.lower,
            upper: self.capacity.upper,
            xtol: self.capacity.xtol,
            rtol: self.capacity.rtol,
            max_iter: 100,
            probe_grid: self.capacity.probe_grid,
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            horizon: self.simulation.horizon,
            replications: self.simulation.replications,
            seed: self.simulation.seed,
            sample_interval: self.simulation.sample_interval,
            queue_cap: self.simulation.queue_cap,
            warmup: self.simulation.warmup,
            parallel: cfg!(feature = "parallel"),
        }
    }

    /// Hash of the canonical serialized form; stamped into every output file.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        let mut hex = String::with_capacity(12);
        for b in &digest[..6] {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}

/// Reads, parses and validates a scenario file, applying defaults and the
/// `JUNCTIONQ_STATE_CAP` override.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut config: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Ok(cap) = std::env::var(STATE_CAP_ENV) {
        config.model.state_cap = cap
            .parse()
            .map_err(|_| Error::Config(format!("{STATE_CAP_ENV} must be an integer, got '{cap}'")))?;
    }
    config.validate()?;
    Ok(config)
}

/// The two scenarios studied in the reference experiments, constructed
/// programmatically; the bundled JSON files mirror these exactly.
pub mod builtin {
    use super::*;

    fn route(name: &str, origin: &str, destination: &str) -> RouteConfig {
        RouteConfig {
            name: name.into(),
            origin: origin.into(),
            destination: destination.into(),
        }
    }

    fn mix(entries: &[(&str, f64)]) -> Vec<MixEntry> {
        entries
            .iter()
            .map(|&(t, s)| MixEntry {
                train_type: t.into(),
                share: s,
            })
            .collect()
    }

    /// Mixed-traffic case study: passenger main line, freight branch line,
    /// four train types, full headway table.
    pub fn case_study() -> ScenarioConfig {
        let h: &[((&str, &str), (&str, &str), f64)] = &[
            (("r1", "s"), ("r1", "s"), 2.5),
            (("r1", "s"), ("r1", "r"), 5.5),
            (("r1", "s"), ("r2", "lf"), 5.0),
            (("r1", "s"), ("r2", "rf"), 5.0),
            (("r1", "r"), ("r1", "s"), 3.0),
            (("r1", "r"), ("r1", "r"), 2.0),
            (("r1", "r"), ("r2", "lf"), 3.0),
            (("r1", "r"), ("r2", "rf"), 3.0),
            (("r3", "s"), ("r3", "s"), 2.5),
            (("r3", "s"), ("r3", "r"), 5.5),
            (("r3", "s"), ("r2", "lf"), 1.5),
            (("r3", "s"), ("r2", "rf"), 1.5),
            (("r3", "s"), ("r4", "lf"), 5.0),
            (("r3", "s"), ("r4", "rf"), 5.0),
            (("r3", "r"), ("r3", "s"), 3.0),
            (("r3", "r"), ("r3", "r"), 2.0),
            (("r3", "r"), ("r2", "lf"), 1.5),
            (("r3", "r"), ("r2", "rf"), 1.5),
            (("r3", "r"), ("r4", "lf"), 3.0),
            (("r3", "r"), ("r4", "rf"), 3.0),
            (("r2", "lf"), ("r1", "s"), 3.5),
            (("r2", "lf"), ("r1", "r"), 5.5),
            (("r2", "lf"), ("r3", "s"), 3.0),
            (("r2", "lf"), ("r3", "r"), 2.0),
            (("r2", "lf"), ("r2", "lf"), 3.0),
            (("r2", "lf"), ("r2", "rf"), 6.0),
            (("r2", "rf"), ("r1", "s"), 8.0),
            (("r2", "rf"), ("r1", "r"), 8.5),
            (("r2", "rf"), ("r3", "s"), 2.5),
            (("r2", "rf"), ("r3", "r"), 2.5),
            (("r2", "rf"), ("r2", "lf"), 7.0),
            (("r2", "rf"), ("r2", "rf"), 4.0),
            (("r4", "lf"), ("r3", "s"), 3.5),
            (("r4", "lf"), ("r3", "r"), 5.5),
            (("r4", "lf"), ("r4", "lf"), 3.0),
            (("r4", "lf"), ("r4", "rf"), 6.0),
            (("r4", "rf"), ("r3", "s"), 8.0),
            (("r4", "rf"), ("r3", "r"), 8.5),
            (("r4", "rf"), ("r4", "lf"), 7.0),
            (("r4", "rf"), ("r4", "rf"), 4.0),
        ];
        let entries = h
            .iter()
            .map(|&((fr, ft), (tr, tt), m)| HeadwayEntry {
                from: (fr.into(), ft.into()),
                to: (tr.into(), tt.into()),
                minutes: m,
            })
            .collect();
        ScenarioConfig {
            name: "case-study".into(),
            junction: JunctionConfig {
                routes: vec![
                    route("r1", "A", "B"),
                    route("r2", "A", "C"),
                    route("r3", "B", "A"),
                    route("r4", "C", "A"),
                ],
                conflicts: vec![
                    ("r1".into(), "r2".into()),
                    ("r2".into(), "r3".into()),
                    ("r3".into(), "r4".into()),
                ],
                train_types: vec![
                    TrainTypeConfig { name: "s".into(), class: TrafficClass::Passenger },
                    TrainTypeConfig { name: "r".into(), class: TrafficClass::Passenger },
                    TrainTypeConfig { name: "lf".into(), class: TrafficClass::Freight },
                    TrainTypeConfig { name: "rf".into(), class: TrafficClass::Freight },
                ],
                service: ServiceConfig::Headways { entries },
            },
            traffic: TrafficConfig {
                t_u: 60.0,
                p_main: 0.5,
                main_routes: vec!["r1".into(), "r3".into()],
                branch_routes: vec!["r2".into(), "r4".into()],
                main_mix: mix(&[("s", 0.5), ("r", 0.5)]),
                branch_mix: mix(&[("lf", 0.5), ("rf", 0.5)]),
            },
            arrival_cv: 0.8,
            model: ModelConfig::default(),
            solver: SolverConfig::default(),
            capacity: CapacityConfig::default(),
            sweep: SweepConfig {
                p_main: default_p_main_grid(),
                n_totals: default_n_grid(),
            },
            simulation: SimulationConfig::default(),
        }
    }

    /// Symmetric passenger-only junction with fixed service rates 0.3/min and
    /// assumed variation coefficients (arrival 0.8, service 0.3).
    pub fn validation() -> ScenarioConfig {
        let rate_map: BTreeMap<String, f64> =
            ["r1", "r2", "r3", "r4"].iter().map(|&r| (r.to_string(), 0.3)).collect();
        let cv_map: BTreeMap<String, f64> =
            ["r1", "r2", "r3", "r4"].iter().map(|&r| (r.to_string(), 0.3)).collect();
        ScenarioConfig {
            name: "validation".into(),
            junction: JunctionConfig {
                routes: vec![
                    route("r1", "A", "B"),
                    route("r2", "A", "C"),
                    route("r3", "B", "A"),
                    route("r4", "C", "A"),
                ],
                conflicts: vec![
                    ("r1".into(), "r2".into()),
                    ("r2".into(), "r3".into()),
                    ("r3".into(), "r4".into()),
                ],
                train_types: vec![TrainTypeConfig {
                    name: "pax".into(),
                    class: TrafficClass::Passenger,
                }],
                service: ServiceConfig::Direct {
                    rates: rate_map,
                    cvs: cv_map,
                },
            },
            traffic: TrafficConfig {
                t_u: 60.0,
                p_main: 0.5,
                main_routes: vec!["r1".into(), "r3".into()],
                branch_routes: vec!["r2".into(), "r4".into()],
                main_mix: mix(&[("pax", 1.0)]),
                branch_mix: mix(&[("pax", 1.0)]),
            },
            arrival_cv: 0.8,
            model: ModelConfig {
                setting: ModelSetting::MM,
                scaling: Scaling::None,
                ..Default::default()
            },
            solver: SolverConfig::default(),
            capacity: CapacityConfig::default(),
            sweep: SweepConfig {
                p_main: default_p_main_grid(),
                n_totals: default_n_grid(),
            },
            simulation: SimulationConfig::default(),
        }
    }

    /// Validation junction with an explicit constant headway table instead of
    /// direct rates; used by tests of the degenerate weighting.
    pub fn validation_with_headways() -> ScenarioConfig {
        let mut cfg = validation();
        let routes = ["r1", "r2", "r3", "r4"];
        let mut entries = Vec::new();
        for (i, &a) in routes.iter().enumerate() {
            for (j, &b) in routes.iter().enumerate() {
                let conflicting = i == j || matches!((i, j), (0, 1) | (1, 0) | (1, 2) | (2, 1) | (2, 3) | (3, 2));
                if conflicting {
                    entries.push(HeadwayEntry {
                        from: (a.into(), "pax".into()),
                        to: (b.into(), "pax".into()),
                        minutes: 10.0 / 3.0,
                    });
                }
            }
        }
        cfg.junction.service = ServiceConfig::Headways { entries };
        cfg
    }
}
