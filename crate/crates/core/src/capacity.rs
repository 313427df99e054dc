//! Quality factors, the root function phi, Brent's method, and the
//! end-to-end capacity determination.
//!
//! For a candidate total train count the whole pipeline runs inside the root
//! function: derive per-route counts and thresholds, weight headways into
//! service times and variation coefficients, fit phase-type parameters, build
//! and solve the chain, scale queue lengths if requested, and return
//! `qf_max - 1`. Brent's method then locates the train count where the worst
//! route sits exactly at its threshold.

use std::collections::HashMap;

use crate::approx::{hertel_factor, kingman_factor, select_formula_cvs, ModelSetting, Scaling, ScalingContext};
use crate::ctmc::{build_model, BuildOptions, ModeledRoute};
use crate::error::{Error, Result};
use crate::junction::{route_loads, Junction, TrafficSpec};
use crate::phase::fit_hypoexp;
use crate::steady::{stationary, SolveOptions};

/// Elementwise ratio of queue lengths to their thresholds.
pub fn quality_factors(lengths: &[f64], limits: &[f64]) -> Result<Vec<f64>> {
    if lengths.len() != limits.len() {
        return Err(Error::invalid("lengths and limits differ in size"));
    }
    limits
        .iter()
        .zip(lengths)
        .map(|(&limit, &l)| {
            if !(limit > 0.0) {
                return Err(Error::invalid(format!(
                    "queue-length limit must be positive, got {limit}"
                )));
            }
            Ok(l / limit)
        })
        .collect()
}

/// Scenario inputs shared by every phi evaluation of a capacity search.
#[derive(Debug, Clone)]
pub struct ScenarioParams<'a> {
    pub junction: &'a Junction,
    /// Template; `n_total` is substituted per evaluation.
    pub traffic: &'a TrafficSpec,
    pub setting: ModelSetting,
    pub scaling: Scaling,
    /// Variation coefficient assumed for the arrival process.
    pub v_a: f64,
    pub build: BuildOptions,
    pub solve: SolveOptions,
}

#[derive(Debug, Clone)]
pub struct RouteEval {
    pub route: usize,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub v_s: f64,
    /// Queue length from the chain.
    pub l_raw: f64,
    /// After the scaling factor, if any.
    pub l_scaled: f64,
    pub l_limit: f64,
    pub qf: f64,
}

#[derive(Debug, Clone)]
pub struct PhiEval {
    pub n_total: f64,
    pub phi: f64,
    pub per_route: Vec<RouteEval>,
    pub states: usize,
    pub transitions: usize,
    pub solver_iterations: usize,
}

/// Previous solution carried across evaluations; reused as the iteration seed
/// whenever the freshly built model enumerates identical state keys.
#[derive(Debug, Default)]
pub struct WarmCache {
    keys: Vec<u64>,
    pi: Vec<f64>,
}

/// Runs the full inner pipeline for one total train count.
pub fn evaluate_phi(
    params: &ScenarioParams,
    n_total: f64,
    cache: &mut Option<WarmCache>,
) -> Result<PhiEval> {
    evaluate_phi_inner(params, n_total, cache).map_err(|e| e.at_n(n_total))
}

fn evaluate_phi_inner(
    params: &ScenarioParams,
    n_total: f64,
    cache: &mut Option<WarmCache>,
) -> Result<PhiEval> {
    if !(n_total >= 0.0) {
        return Err(Error::invalid(format!("n_total must be non-negative, got {n_total}")));
    }
    let spec = params.traffic.with_n_total(n_total);
    let loads = route_loads(params.junction, &spec, params.v_a)?;
    let active: Vec<_> = loads.iter().filter(|l| l.lambda > 0.0).collect();
    if active.is_empty() {
        // empty system: every quality factor is zero
        return Ok(PhiEval {
            n_total,
            phi: -1.0,
            per_route: Vec::new(),
            states: 0,
            transitions: 0,
            solver_iterations: 0,
        });
    }

    let mut modeled = Vec::with_capacity(active.len());
    for load in &active {
        let arrival_cv = if params.setting.arrival_is_phase_type() { params.v_a } else { 1.0 };
        let service_cv = if params.setting.service_is_phase_type() { load.v_s } else { 1.0 };
        modeled.push(ModeledRoute {
            route: load.route,
            arrival: fit_hypoexp(1.0 / load.lambda, arrival_cv)?,
            service: fit_hypoexp(load.b, service_cv)?,
        });
    }

    let model = build_model(&params.junction.conflicts, &modeled, &params.build)?;
    let warm = cache
        .as_ref()
        .filter(|c| c.keys == model.state_keys())
        .map(|c| c.pi.as_slice());
    let dist = stationary(&model, &params.solve, warm)?;

    let mut per_route = Vec::with_capacity(active.len());
    for (i, load) in active.iter().enumerate() {
        let l_raw = crate::steady::expected_queue_length(&dist, &model, i);
        let l_scaled = match (params.scaling, select_formula_cvs(params.setting, params.v_a, load.v_s)) {
            (Scaling::None, _) | (_, None) => l_raw,
            (Scaling::Kingman, Some((va, vb))) => l_raw * kingman_factor(va, vb),
            (Scaling::Hertel, Some((va, vb))) => {
                l_raw
                    * hertel_factor(&ScalingContext {
                        v_a: va,
                        v_b: vb,
                        rho: load.rho,
                    })?
            }
        };
        per_route.push(RouteEval {
            route: load.route,
            lambda: load.lambda,
            mu: load.mu,
            rho: load.rho,
            v_s: load.v_s,
            l_raw,
            l_scaled,
            l_limit: load.l_limit,
            qf: l_scaled / load.l_limit,
        });
    }
    let phi = per_route.iter().map(|r| r.qf).fold(f64::NEG_INFINITY, f64::max) - 1.0;

    *cache = Some(WarmCache {
        keys: model.state_keys().to_vec(),
        pi: dist.pi,
    });

    Ok(PhiEval {
        n_total,
        phi,
        per_route,
        states: model.state_count(),
        transitions: model.transition_count(),
        solver_iterations: dist.iterations,
    })
}

/// Convenience wrapper returning only the root-function value.
pub fn phi(params: &ScenarioParams, n_total: f64) -> Result<f64> {
    evaluate_phi(params, n_total, &mut None).map(|e| e.phi)
}

#[derive(Debug, Clone)]
pub struct BrentResult {
    pub root: f64,
    pub f_root: f64,
    /// Interior iterations of the bracketing loop.
    pub iterations: usize,
    /// Function evaluations, including the two bracket endpoints.
    pub evaluations: usize,
}

/// Brent's bracketing method: inverse-quadratic and secant steps with
/// bisection safeguards, converging to bracket width `xtol + rtol * |root|`.
pub fn brent_root<F>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    rtol: f64,
    max_iter: usize,
) -> Result<BrentResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::invalid(format!("invalid bracket [{a}, {b}]")));
    }
    let mut evaluations = 0usize;
    let mut eval = |x: f64, f: &mut F| -> Result<f64> {
        evaluations += 1;
        f(x)
    };
    let mut xpre = a;
    let mut xcur = b;
    let mut fpre = eval(xpre, &mut f)?;
    let mut fcur = eval(xcur, &mut f)?;
    if fpre == 0.0 {
        return Ok(BrentResult { root: xpre, f_root: 0.0, iterations: 0, evaluations });
    }
    if fcur == 0.0 {
        return Ok(BrentResult { root: xcur, f_root: 0.0, iterations: 0, evaluations });
    }
    if fpre * fcur > 0.0 {
        return Err(Error::NoSignChange { a, b, fa: fpre, fb: fcur });
    }

    let (mut xblk, mut fblk) = (0.0f64, 0.0f64);
    let (mut spre, mut scur) = (0.0f64, 0.0f64);
    for iter in 0..max_iter {
        if fpre * fcur < 0.0 {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }
        let delta = (xtol + rtol * xcur.abs()) / 2.0;
        let sbis = (xblk - xcur) / 2.0;
        if fcur == 0.0 || sbis.abs() < delta {
            return Ok(BrentResult { root: xcur, f_root: fcur, iterations: iter, evaluations });
        }
        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                // secant
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                // extrapolated inverse quadratic
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }
        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = eval(xcur, &mut f)?;
    }
    Err(Error::RootSearchDidNotConverge {
        a: xpre.min(xblk),
        b: xpre.max(xblk),
        max_iter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Bracketed,
    /// phi stayed negative up to the upper bound: the junction is not
    /// saturated inside the search range.
    AboveUpperBound,
    /// phi is already positive at the lower bound.
    BelowLowerBound,
}

#[derive(Debug, Clone)]
pub struct CapacityOptions {
    pub lower: f64,
    pub upper: f64,
    pub xtol: f64,
    pub rtol: f64,
    pub max_iter: usize,
    /// Debug mode: evaluate phi on this many extra grid points first and
    /// reject brackets whose sign structure is not a single crossing. Zero
    /// disables the probe (the root search assumes monotone phi).
    pub probe_grid: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            lower: 1.0,
            upper: 40.0,
            xtol: 1e-3,
            rtol: 1e-3,
            max_iter: 100,
            probe_grid: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub n_max: f64,
    pub converged: bool,
    pub status: BoundStatus,
    /// Junction route id with the largest quality factor at `n_max`.
    pub bottleneck: usize,
    /// Per modelled route at `n_max`.
    pub route_evals: Vec<RouteEval>,
    /// Every phi evaluation in order.
    pub trace: Vec<(f64, f64)>,
    pub brent_iterations: usize,
    /// Distinct phi evaluations, including both bracket endpoints.
    pub evaluations: usize,
}

/// Largest total train count inside `[lower, upper]` whose worst route still
/// meets its queue-length threshold.
pub fn find_capacity(params: &ScenarioParams, opts: &CapacityOptions) -> Result<CapacityResult> {
    if !(opts.lower > 0.0 && opts.lower < opts.upper) {
        return Err(Error::invalid(format!(
            "capacity bounds must satisfy 0 < lower < upper, got [{}, {}]",
            opts.lower, opts.upper
        )));
    }
    let mut upper = opts.upper;
    if params.scaling == Scaling::Hertel {
        // Hertel's factor needs rho < 1 on every route; cap the bracket just
        // below the smallest saturating train count
        let unit = route_loads(params.junction, &params.traffic.with_n_total(1.0), params.v_a)?;
        let n_sat = unit
            .iter()
            .filter(|l| l.n_r > 0.0)
            .map(|l| l.mu * params.traffic.t_u / l.n_r)
            .fold(f64::INFINITY, f64::min);
        if n_sat.is_finite() && 0.999 * n_sat < upper {
            upper = 0.999 * n_sat;
            if upper <= opts.lower {
                return Err(Error::invalid(format!(
                    "saturation bound {upper:.3} below lower bracket {}",
                    opts.lower
                )));
            }
        }
    }

    let mut cache: Option<WarmCache> = None;
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut outcomes: HashMap<u64, PhiEval> = HashMap::new();
    let mut evaluations = 0usize;

    let eval_memo = |n: f64, cache: &mut Option<WarmCache>, trace: &mut Vec<(f64, f64)>, outcomes: &mut HashMap<u64, PhiEval>, evaluations: &mut usize| -> Result<f64> {
        if let Some(e) = outcomes.get(&n.to_bits()) {
            return Ok(e.phi);
        }
        let e = evaluate_phi(params, n, cache)?;
        *evaluations += 1;
        trace.push((n, e.phi));
        let phi = e.phi;
        outcomes.insert(n.to_bits(), e);
        Ok(phi)
    };

    let f_lower = eval_memo(opts.lower, &mut cache, &mut trace, &mut outcomes, &mut evaluations)?;
    let finish = |n_max: f64, status: BoundStatus, converged: bool, trace: Vec<(f64, f64)>, outcomes: &mut HashMap<u64, PhiEval>, evaluations: usize, brent_iterations: usize| -> Result<CapacityResult> {
        let eval = outcomes
            .remove(&n_max.to_bits())
            .ok_or_else(|| Error::invalid("missing evaluation at returned root"))?;
        let bottleneck = eval
            .per_route
            .iter()
            .max_by(|a, b| a.qf.total_cmp(&b.qf))
            .map(|r| r.route)
            .unwrap_or(0);
        Ok(CapacityResult {
            n_max,
            converged,
            status,
            bottleneck,
            route_evals: eval.per_route,
            trace,
            brent_iterations,
            evaluations,
        })
    };

    if f_lower > 0.0 {
        return finish(opts.lower, BoundStatus::BelowLowerBound, false, trace, &mut outcomes, evaluations, 0);
    }
    let f_upper = eval_memo(upper, &mut cache, &mut trace, &mut outcomes, &mut evaluations)?;
    if f_upper < 0.0 {
        return finish(upper, BoundStatus::AboveUpperBound, false, trace, &mut outcomes, evaluations, 0);
    }

    if opts.probe_grid > 0 {
        let mut last = f_lower;
        let mut crossings = 0usize;
        for i in 1..=opts.probe_grid {
            let n = opts.lower + (upper - opts.lower) * i as f64 / (opts.probe_grid + 1) as f64;
            let f = eval_memo(n, &mut cache, &mut trace, &mut outcomes, &mut evaluations)?;
            if last <= 0.0 && f > 0.0 || last > 0.0 && f <= 0.0 {
                crossings += 1;
            }
            last = f;
        }
        if (last > 0.0) != (f_upper > 0.0) {
            crossings += 1;
        }
        if crossings != 1 {
            return Err(Error::invalid(format!(
                "phi changes sign {crossings} times on the probe grid; expected a single crossing"
            )));
        }
    }

    let result = brent_root(
        |n| eval_memo(n, &mut cache, &mut trace, &mut outcomes, &mut evaluations),
        opts.lower,
        upper,
        opts.xtol,
        opts.rtol,
        opts.max_iter,
    )?;
    finish(
        result.root,
        BoundStatus::Bracketed,
        true,
        trace,
        &mut outcomes,
        evaluations,
        result.iterations,
    )
}
