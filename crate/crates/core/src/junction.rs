//! Infrastructure and demand types plus the deterministic traffic arithmetic:
//! train-count distribution, headway weighting, service times and rates,
//! variation coefficients, occupancy and quality thresholds.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficClass {
    Passenger,
    Freight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainType {
    pub id: usize,
    pub name: String,
    pub class: TrafficClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub id: usize,
    pub name: String,
    pub origin: String,
    pub destination: String,
}

/// Symmetric boolean conflict relation over routes. The diagonal is always
/// true: a route conflicts with itself (one train per route track), and the
/// service-time weighting of a route includes its own follow-on headways.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictMatrix {
    k: usize,
    entries: Vec<bool>,
}

impl ConflictMatrix {
    /// Builds the matrix from undirected conflicting pairs; the diagonal is set
    /// unconditionally.
    pub fn from_pairs(k: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut entries = vec![false; k * k];
        for i in 0..k {
            entries[i * k + i] = true;
        }
        for &(i, j) in pairs {
            if i >= k || j >= k {
                return Err(Error::invalid(format!(
                    "conflict pair ({i}, {j}) out of range for {k} routes"
                )));
            }
            entries[i * k + j] = true;
            entries[j * k + i] = true;
        }
        Ok(ConflictMatrix { k, entries })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.k + j]
    }

    /// Routes conflicting with `r`, including `r` itself.
    pub fn conflict_set(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(move |&j| self.conflicts(r, j))
    }
}

/// Minimum headway in minutes for the ordered sequence: a train of
/// `(to.0, to.1)` starting service after a train of `(from.0, from.1)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeadwayTable {
    map: HashMap<((usize, usize), (usize, usize)), f64>,
}

impl HeadwayTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, from: (usize, usize), to: (usize, usize), minutes: f64) -> Result<()> {
        if !(minutes > 0.0) {
            return Err(Error::invalid(format!(
                "headway for {from:?} -> {to:?} must be positive, got {minutes}"
            )));
        }
        self.map.insert((from, to), minutes);
        Ok(())
    }

    pub fn get(&self, from: (usize, usize), to: (usize, usize)) -> Option<f64> {
        self.map.get(&(from, to)).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// How per-route service times and variation coefficients are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum ServiceSpec {
    /// Derive from the headway table via the sequence-weighted average.
    Headways(HeadwayTable),
    /// Fixed per-route service rates (1/min) and variation coefficients,
    /// bypassing the headway weighting (used when rates are assumed directly).
    Direct { rates: Vec<f64>, cvs: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Junction {
    pub routes: Vec<Route>,
    pub train_types: Vec<TrainType>,
    pub conflicts: ConflictMatrix,
    pub service: ServiceSpec,
}

impl Junction {
    pub fn route_count(&self) -> usize {
        self.routes.len()
    }
}

/// Demand side: total train count over the horizon plus the share parameters
/// that define the request distribution over (route, train type) pairs.
///
/// The main-line share splits `n_total` between the two lines; within a line
/// the count is divided equally by direction and then by the line's train-type
/// mix.
#[derive(Debug, Clone)]
pub struct TrafficSpec {
    pub n_total: f64,
    /// Time horizon in minutes.
    pub t_u: f64,
    pub p_main: f64,
    pub main_routes: Vec<usize>,
    pub branch_routes: Vec<usize>,
    /// (train type id, share) for main-line routes; shares sum to 1.
    pub main_mix: Vec<(usize, f64)>,
    /// (train type id, share) for branch-line routes; shares sum to 1.
    pub branch_mix: Vec<(usize, f64)>,
}

impl TrafficSpec {
    pub fn with_n_total(&self, n_total: f64) -> TrafficSpec {
        TrafficSpec {
            n_total,
            ..self.clone()
        }
    }

    pub fn with_p_main(&self, p_main: f64) -> TrafficSpec {
        TrafficSpec {
            p_main,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_main) {
            return Err(Error::invalid(format!(
                "p_main must lie in [0, 1], got {}",
                self.p_main
            )));
        }
        if !(self.n_total >= 0.0) {
            return Err(Error::invalid(format!(
                "n_total must be non-negative, got {}",
                self.n_total
            )));
        }
        if !(self.t_u > 0.0) {
            return Err(Error::invalid(format!(
                "time horizon must be positive, got {}",
                self.t_u
            )));
        }
        for (label, mix) in [("main", &self.main_mix), ("branch", &self.branch_mix)] {
            let sum: f64 = mix.iter().map(|&(_, s)| s).sum();
            if mix.iter().any(|&(_, s)| !(0.0..=1.0).contains(&s)) {
                return Err(Error::invalid(format!(
                    "{label} mix shares must lie in [0, 1]"
                )));
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "{label} mix shares must sum to 1, got {sum}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-(route, train type) request counts. Counts are real-valued: the
/// capacity search evaluates fractional totals.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainCounts {
    /// `per[route][train_type]`
    pub per: Vec<Vec<f64>>,
}

impl TrainCounts {
    pub fn route_total(&self, route: usize) -> f64 {
        self.per[route].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.per.iter().flatten().sum()
    }

    pub fn get(&self, route: usize, train_type: usize) -> f64 {
        self.per[route][train_type]
    }
}

/// Distributes `spec.n_total` over (route, train type) pairs: the request
/// distribution function evaluated at the spec's total.
pub fn derive_train_counts(junction: &Junction, spec: &TrafficSpec) -> Result<TrainCounts> {
    spec.validate()?;
    let k = junction.route_count();
    let nt = junction.train_types.len();
    let mut per = vec![vec![0.0; nt]; k];
    for (routes, mix, share) in [
        (&spec.main_routes, &spec.main_mix, spec.p_main),
        (&spec.branch_routes, &spec.branch_mix, 1.0 - spec.p_main),
    ] {
        if routes.is_empty() {
            continue;
        }
        let per_route = share * spec.n_total / routes.len() as f64;
        for &r in routes {
            if r >= k {
                return Err(Error::invalid(format!("route id {r} out of range")));
            }
            for &(t, s) in mix.iter() {
                if t >= nt {
                    return Err(Error::invalid(format!("train type id {t} out of range")));
                }
                per[r][t] += per_route * s;
            }
        }
    }
    Ok(TrainCounts { per })
}

/// Quality threshold for the expected queue length, decreasing in the
/// passenger share of the route's operating program.
pub fn queue_limit(p_pt: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_pt) {
        return Err(Error::invalid(format!(
            "passenger share must lie in [0, 1], got {p_pt}"
        )));
    }
    Ok(0.479 * (-1.3 * p_pt).exp())
}

/// Sequence-count-weighted average minimum headway for the ordered route pair
/// (r, r'): a train on r' following a train on r.
pub fn pair_headway(
    junction: &Junction,
    table: &HeadwayTable,
    counts: &TrainCounts,
    r: usize,
    rp: usize,
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, &n_rt) in counts.per[r].iter().enumerate() {
        if n_rt <= 0.0 {
            continue;
        }
        for (tp, &n_rptp) in counts.per[rp].iter().enumerate() {
            if n_rptp <= 0.0 {
                continue;
            }
            let h = table.get((r, t), (rp, tp)).ok_or_else(|| {
                Error::Config(format!(
                    "missing headway ({}, {}) -> ({}, {})",
                    junction.routes[r].name,
                    junction.train_types[t].name,
                    junction.routes[rp].name,
                    junction.train_types[tp].name,
                ))
            })?;
            let w = n_rt * n_rptp;
            num += w * h;
            den += w;
        }
    }
    if den <= 0.0 {
        return Err(Error::UndefinedPair {
            from: junction.routes[r].name.clone(),
            to: junction.routes[rp].name.clone(),
        });
    }
    Ok(num / den)
}

/// First two moments of the discrete headway distribution seen by route `r`:
/// atoms are the headways of all conflicting follow-on sequences, weighted by
/// the same sequence probabilities that define the service time.
fn headway_moments(
    junction: &Junction,
    table: &HeadwayTable,
    counts: &TrainCounts,
    r: usize,
) -> Result<(f64, f64)> {
    let n_r = counts.route_total(r);
    let n_conflict: f64 = junction
        .conflicts
        .conflict_set(r)
        .map(|rp| counts.route_total(rp))
        .sum();
    if n_conflict <= 0.0 || n_r <= 0.0 {
        return Err(Error::NoDemand {
            route: junction.routes[r].name.clone(),
        });
    }
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for rp in junction.conflicts.conflict_set(r) {
        let n_rp = counts.route_total(rp);
        if n_rp <= 0.0 {
            continue;
        }
        for (t, &n_rt) in counts.per[r].iter().enumerate() {
            if n_rt <= 0.0 {
                continue;
            }
            for (tp, &n_rptp) in counts.per[rp].iter().enumerate() {
                if n_rptp <= 0.0 {
                    continue;
                }
                let h = table.get((r, t), (rp, tp)).ok_or_else(|| {
                    Error::Config(format!(
                        "missing headway ({}, {}) -> ({}, {})",
                        junction.routes[r].name,
                        junction.train_types[t].name,
                        junction.routes[rp].name,
                        junction.train_types[tp].name,
                    ))
                })?;
                let p = (n_rp / n_conflict) * (n_rt / n_r) * (n_rptp / n_rp);
                m1 += p * h;
                m2 += p * h * h;
            }
        }
    }
    Ok((m1, m2))
}

/// Average service time of route `r`: the conflicting-demand-weighted mean of
/// the pairwise average headways, with `r` itself in the conflict set.
pub fn service_time(
    junction: &Junction,
    table: &HeadwayTable,
    counts: &TrainCounts,
    r: usize,
) -> Result<f64> {
    headway_moments(junction, table, counts, r).map(|(m1, _)| m1)
}

/// Coefficient of variation of the service process of route `r` under the
/// same sequence weighting as [`service_time`].
pub fn service_cv(
    junction: &Junction,
    table: &HeadwayTable,
    counts: &TrainCounts,
    r: usize,
) -> Result<f64> {
    let (m1, m2) = headway_moments(junction, table, counts, r)?;
    let var = (m2 - m1 * m1).max(0.0);
    Ok(var.sqrt() / m1)
}

/// All derived per-route quantities needed to build and judge a model.
#[derive(Debug, Clone)]
pub struct RouteLoad {
    pub route: usize,
    /// Trains per horizon.
    pub n_r: f64,
    /// Trains per minute.
    pub lambda: f64,
    /// Service time, minutes.
    pub b: f64,
    /// Service rate, 1/min.
    pub mu: f64,
    /// Occupation ratio lambda/mu.
    pub rho: f64,
    /// Variation coefficient of the service process.
    pub v_s: f64,
    /// Variation coefficient of the arrival process (scenario parameter).
    pub v_a: f64,
    /// Passenger share of the route's operating program.
    pub p_pt: f64,
    /// Queue-length threshold for sufficient quality.
    pub l_limit: f64,
}

/// Assembles the per-route loads for every route with positive demand share.
/// Zero-share routes are excluded: they carry no arrival process and are
/// dropped from the analysis entirely.
///
/// Service statistics are computed from the unit-total request distribution
/// (the weights are scale-invariant), so they stay defined as `n_total -> 0`.
pub fn route_loads(junction: &Junction, spec: &TrafficSpec, v_a: f64) -> Result<Vec<RouteLoad>> {
    if !(v_a > 0.0) {
        return Err(Error::invalid(format!(
            "arrival variation coefficient must be positive, got {v_a}"
        )));
    }
    let counts = derive_train_counts(junction, spec)?;
    let unit = derive_train_counts(junction, &spec.with_n_total(1.0))?;
    let mut loads = Vec::new();
    for r in 0..junction.route_count() {
        if unit.route_total(r) <= 0.0 {
            continue;
        }
        let (b, v_s) = match &junction.service {
            ServiceSpec::Headways(table) => {
                let (m1, m2) = headway_moments(junction, table, &unit, r)?;
                let var = (m2 - m1 * m1).max(0.0);
                (m1, var.sqrt() / m1)
            }
            ServiceSpec::Direct { rates, cvs } => {
                let rate = rates[r];
                if !(rate > 0.0) {
                    return Err(Error::invalid(format!(
                        "service rate for route {} must be positive",
                        junction.routes[r].name
                    )));
                }
                (1.0 / rate, cvs[r])
            }
        };
        let p_pt: f64 = unit.per[r]
            .iter()
            .enumerate()
            .filter(|&(t, _)| junction.train_types[t].class == TrafficClass::Passenger)
            .map(|(_, &n)| n)
            .sum::<f64>()
            / unit.route_total(r);
        let n_r = counts.route_total(r);
        let lambda = n_r / spec.t_u;
        let mu = 1.0 / b;
        loads.push(RouteLoad {
            route: r,
            n_r,
            lambda,
            b,
            mu,
            rho: lambda / mu,
            v_s,
            v_a,
            p_pt,
            l_limit: queue_limit(p_pt)?,
        });
    }
    Ok(loads)
}
