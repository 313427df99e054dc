//! State-space enumeration and generator assembly for the junction chain.
//!
//! Each modelled route contributes a tuple (q, s, p_A, p_S): waiting requests,
//! service flag, arrival phase and service phase. States violating the
//! conflict restriction (two conflicting routes serving) are never generated,
//! idle routes carry the canonical service phase 1, and only states reachable
//! from the all-empty state are materialized.
//!
//! Transitions per route, from state u:
//!   * arrival phase advance at the phase's rate while p_A is not final;
//!   * at the final arrival phase: start service if the route and its whole
//!     conflict set are idle, otherwise enqueue (or discard when the queue is
//!     full); the arrival phase resets either way;
//!   * service phase advance while serving; completion resets s and p_S;
//!   * choice: an idle, conflict-free route with waiting requests starts one
//!     at the artificial rate M.
//!
//! States are packed into 64-bit keys with per-route bit fields, so a
//! ten-million-state model costs one `u64` per state plus the sparse
//! incoming-edge structure used by the stationary solver.

use std::io::Write;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::junction::ConflictMatrix;
use crate::phase::PhaseTypeSpec;

pub const DEFAULT_CHOICE_RATE: f64 = 600.0;
pub const DEFAULT_WAITING_SLOTS: u32 = 5;
pub const DEFAULT_STATE_CAP: usize = 20_000_000;

/// One route of the chain: junction route id plus fitted arrival and service
/// processes with absolute rates.
#[derive(Debug, Clone)]
pub struct ModeledRoute {
    pub route: usize,
    pub arrival: PhaseTypeSpec,
    pub service: PhaseTypeSpec,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Waiting slots per route.
    pub m: u32,
    /// Artificial rate of choice transitions, 1/min.
    pub choice_rate: f64,
    /// Enumeration aborts once this many states have been discovered.
    pub state_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            m: DEFAULT_WAITING_SLOTS,
            choice_rate: DEFAULT_CHOICE_RATE,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// Decoded per-route state tuple. Phases are 1-based; `p_s` is 1 while idle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteState {
    pub q: u32,
    pub s: bool,
    pub p_a: u32,
    pub p_s: u32,
}

#[derive(Debug, Clone, Copy)]
struct Field {
    q_shift: u32,
    q_bits: u32,
    s_shift: u32,
    pa_shift: u32,
    pa_bits: u32,
    ps_shift: u32,
    ps_bits: u32,
}

fn bits_for(max_value: u32) -> u32 {
    32 - max_value.leading_zeros()
}

#[derive(Debug, Clone)]
struct StateCodec {
    fields: Vec<Field>,
}

impl StateCodec {
    fn new(m: u32, routes: &[ModeledRoute]) -> Result<Self> {
        let mut fields = Vec::with_capacity(routes.len());
        let mut shift = 0u32;
        for r in routes {
            let q_bits = bits_for(m);
            let pa_bits = bits_for(r.arrival.k - 1);
            let ps_bits = bits_for(r.service.k - 1);
            fields.push(Field {
                q_shift: shift,
                q_bits,
                s_shift: shift + q_bits,
                pa_shift: shift + q_bits + 1,
                pa_bits,
                ps_shift: shift + q_bits + 1 + pa_bits,
                ps_bits,
            });
            shift += q_bits + 1 + pa_bits + ps_bits;
        }
        if shift > 64 {
            return Err(Error::invalid(format!(
                "state tuple needs {shift} bits; at most 64 supported"
            )));
        }
        Ok(StateCodec { fields })
    }

    #[inline]
    fn get(key: u64, shift: u32, bits: u32) -> u32 {
        ((key >> shift) & ((1u64 << bits) - 1)) as u32
    }

    #[inline]
    fn set(key: u64, shift: u32, bits: u32, value: u32) -> u64 {
        let mask = ((1u64 << bits) - 1) << shift;
        (key & !mask) | ((u64::from(value)) << shift)
    }

    #[inline]
    fn q(&self, key: u64, i: usize) -> u32 {
        let f = self.fields[i];
        Self::get(key, f.q_shift, f.q_bits)
    }

    #[inline]
    fn s(&self, key: u64, i: usize) -> bool {
        (key >> self.fields[i].s_shift) & 1 == 1
    }

    /// Arrival phase, 0-based.
    #[inline]
    fn pa(&self, key: u64, i: usize) -> u32 {
        let f = self.fields[i];
        if f.pa_bits == 0 { 0 } else { Self::get(key, f.pa_shift, f.pa_bits) }
    }

    /// Service phase, 0-based.
    #[inline]
    fn ps(&self, key: u64, i: usize) -> u32 {
        let f = self.fields[i];
        if f.ps_bits == 0 { 0 } else { Self::get(key, f.ps_shift, f.ps_bits) }
    }

    #[inline]
    fn with_q(&self, key: u64, i: usize, v: u32) -> u64 {
        let f = self.fields[i];
        Self::set(key, f.q_shift, f.q_bits, v)
    }

    #[inline]
    fn with_s(&self, key: u64, i: usize, v: bool) -> u64 {
        let f = self.fields[i];
        (key & !(1u64 << f.s_shift)) | ((v as u64) << f.s_shift)
    }

    #[inline]
    fn with_pa(&self, key: u64, i: usize, v: u32) -> u64 {
        let f = self.fields[i];
        if f.pa_bits == 0 { key } else { Self::set(key, f.pa_shift, f.pa_bits, v) }
    }

    #[inline]
    fn with_ps(&self, key: u64, i: usize, v: u32) -> u64 {
        let f = self.fields[i];
        if f.ps_bits == 0 { key } else { Self::set(key, f.ps_shift, f.ps_bits, v) }
    }
}

/// The assembled chain: reachable states, incoming-edge sparse structure and
/// per-route queue rewards.
#[derive(Debug, Clone)]
pub struct CtmcModel {
    routes: Vec<ModeledRoute>,
    codec: StateCodec,
    pub m: u32,
    pub choice_rate: f64,
    /// Packed keys in discovery (breadth-first) order; index 0 is all-empty.
    states: Vec<u64>,
    /// Incoming edges grouped by destination.
    in_ptr: Vec<usize>,
    in_src: Vec<u32>,
    in_rate: Vec<f64>,
    /// Total outgoing rate per state.
    exit: Vec<f64>,
}

impl CtmcModel {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.in_src.len()
    }

    pub fn modeled_routes(&self) -> &[ModeledRoute] {
        &self.routes
    }

    /// Packed state keys; equality of two models' key vectors implies an
    /// identical enumeration (same structure, same indexing).
    pub fn state_keys(&self) -> &[u64] {
        &self.states
    }

    /// Queue length of modelled route `i` in state `u`.
    #[inline]
    pub fn queue_len(&self, u: usize, i: usize) -> u32 {
        self.codec.q(self.states[u], i)
    }

    /// Per-state queue reward vector of modelled route `i`.
    pub fn queue_reward(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(move |&key| f64::from(self.codec.q(key, i)))
    }

    pub fn decode(&self, u: usize) -> Vec<RouteState> {
        let key = self.states[u];
        (0..self.routes.len())
            .map(|i| RouteState {
                q: self.codec.q(key, i),
                s: self.codec.s(key, i),
                p_a: self.codec.pa(key, i) + 1,
                p_s: self.codec.ps(key, i) + 1,
            })
            .collect()
    }

    /// All transitions as (src, dst, rate), grouped by destination.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.state_count()).flat_map(move |dst| {
            (self.in_ptr[dst]..self.in_ptr[dst + 1]).map(move |k| (self.in_src[k], dst as u32, self.in_rate[k]))
        })
    }

    pub(crate) fn in_csr(&self) -> (&[usize], &[u32], &[f64], &[f64]) {
        (&self.in_ptr, &self.in_src, &self.in_rate, &self.exit)
    }

    pub fn exit_rate(&self, u: usize) -> f64 {
        self.exit[u]
    }

    /// Plain edge list, one `src dst rate` line per transition (sorted by
    /// source), plus the state table written separately.
    pub fn export_edge_list(&self, w: &mut impl Write) -> Result<()> {
        let mut edges: Vec<(u32, u32, f64)> = self.edges().collect();
        edges.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        writeln!(w, "{} {}", self.state_count(), self.transition_count())?;
        for (s, d, r) in edges {
            writeln!(w, "{s} {d} {r:.12e}")?;
        }
        Ok(())
    }

    /// State table: index followed by per-route `q s p_a p_s` tuples.
    pub fn export_state_table(&self, w: &mut impl Write) -> Result<()> {
        for u in 0..self.state_count() {
            let mut line = String::with_capacity(16 + 8 * self.routes.len());
            line.push_str(&u.to_string());
            for rs in self.decode(u) {
                line.push_str(&format!(" {} {} {} {}", rs.q, u8::from(rs.s), rs.p_a, rs.p_s));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Best-effort export in PRISM-style module syntax for cross-checking.
    pub fn export_prism(&self, names: &[String], conflicts: &ConflictMatrix, w: &mut impl Write) -> Result<()> {
        writeln!(w, "ctmc")?;
        writeln!(w, "const double M = {};", self.choice_rate)?;
        for (i, mr) in self.routes.iter().enumerate() {
            let name = &names[mr.route];
            let free: Vec<String> = (0..self.routes.len())
                .filter(|&j| j != i && conflicts.conflicts(mr.route, self.routes[j].route))
                .map(|j| format!("(s_{} = 0)", names[self.routes[j].route]))
                .collect();
            let free_guard = if free.is_empty() { "true".to_string() } else { free.join(" & ") };
            let (ka, kas) = (mr.arrival.k, mr.arrival.k_star);
            let (ks, kss) = (mr.service.k, mr.service.k_star);
            writeln!(w, "\nmodule route_{name}")?;
            writeln!(w, "  q_{name} : [0..{}] init 0;", self.m)?;
            writeln!(w, "  s_{name} : [0..1] init 0;")?;
            writeln!(w, "  pa_{name} : [1..{ka}] init 1;")?;
            writeln!(w, "  ps_{name} : [1..{ks}] init 1;")?;
            for p in 1..ka {
                let rate = if p <= kas { mr.arrival.rate_a } else { mr.arrival.rate_b };
                writeln!(w, "  [] (pa_{name} = {p}) -> {rate}: (pa_{name}' = {});", p + 1)?;
            }
            let fin = mr.arrival.rate(ka);
            writeln!(w, "  [] (pa_{name} = {ka}) & (s_{name} = 0) & {free_guard} -> {fin}: (s_{name}' = 1) & (pa_{name}' = 1);")?;
            writeln!(w, "  [] (pa_{name} = {ka}) & !((s_{name} = 0) & {free_guard}) & (q_{name} < {}) -> {fin}: (q_{name}' = q_{name} + 1) & (pa_{name}' = 1);", self.m)?;
            if ka > 1 {
                writeln!(w, "  [] (pa_{name} = {ka}) & !((s_{name} = 0) & {free_guard}) & (q_{name} = {}) -> {fin}: (pa_{name}' = 1);", self.m)?;
            }
            for p in 1..ks {
                let rate = if p <= kss { mr.service.rate_a } else { mr.service.rate_b };
                writeln!(w, "  [] (s_{name} = 1) & (ps_{name} = {p}) -> {rate}: (ps_{name}' = {});", p + 1)?;
            }
            writeln!(w, "  [] (s_{name} = 1) & (ps_{name} = {ks}) -> {}: (s_{name}' = 0) & (ps_{name}' = 1);", mr.service.rate(ks))?;
            writeln!(w, "  [] (q_{name} > 0) & (s_{name} = 0) & {free_guard} -> M: (q_{name}' = q_{name} - 1) & (s_{name}' = 1);")?;
            writeln!(w, "endmodule")?;
        }
        for (i, mr) in self.routes.iter().enumerate() {
            writeln!(w, "\nrewards \"queue_{}\"", names[mr.route])?;
            writeln!(w, "  true : q_{};", names[self.routes[i].route])?;
            writeln!(w, "endrewards")?;
        }
        Ok(())
    }
}

/// Enumerates the reachable conflict-feasible states and assembles the sparse
/// generator in one breadth-first pass.
pub fn build_model(
    conflicts: &ConflictMatrix,
    modeled: &[ModeledRoute],
    opts: &BuildOptions,
) -> Result<CtmcModel> {
    if modeled.is_empty() {
        return Err(Error::invalid("no routes with positive demand to model"));
    }
    for mr in modeled {
        if !(mr.arrival.rate_a > 0.0 && mr.arrival.rate_b > 0.0 && mr.service.rate_a > 0.0 && mr.service.rate_b > 0.0)
        {
            return Err(Error::invalid(format!(
                "route {} has a non-positive transition rate",
                mr.route
            )));
        }
    }
    if !(opts.choice_rate > 0.0) {
        return Err(Error::invalid("choice rate must be positive"));
    }
    let codec = StateCodec::new(opts.m, modeled)?;
    let n_routes = modeled.len();

    // bitmask of the s-flags of conflicting routes (self excluded): the route
    // may start service iff key & mask == 0 and its own s is 0
    let conflict_mask: Vec<u64> = (0..n_routes)
        .map(|i| {
            let mut mask = 0u64;
            for (j, f) in codec.fields.iter().enumerate() {
                if j != i && conflicts.conflicts(modeled[i].route, modeled[j].route) {
                    mask |= 1u64 << f.s_shift;
                }
            }
            mask
        })
        .collect();

    let mut index: FxHashMap<u64, u32> =
        FxHashMap::with_capacity_and_hasher(1024, Default::default());
    let mut states: Vec<u64> = Vec::new();
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    index.insert(0, 0);
    states.push(0);

    let mut next = 0usize;
    while next < states.len() {
        let key = states[next];
        let u = next as u32;
        next += 1;
        for i in 0..n_routes {
            let mr = &modeled[i];
            let q = codec.q(key, i);
            let s = codec.s(key, i);
            let pa = codec.pa(key, i); // 0-based
            let free = !s && key & conflict_mask[i] == 0;

            let emit = |edges: &mut Vec<(u32, u32, f64)>,
                            index: &mut FxHashMap<u64, u32>,
                            states: &mut Vec<u64>,
                            dst_key: u64,
                            rate: f64|
             -> Result<()> {
                let v = match index.get(&dst_key) {
                    Some(&v) => v,
                    None => {
                        if states.len() >= opts.state_cap {
                            return Err(Error::StateSpaceTooLarge {
                                states: states.len() + 1,
                                cap: opts.state_cap,
                            });
                        }
                        let v = states.len() as u32;
                        index.insert(dst_key, v);
                        states.push(dst_key);
                        v
                    }
                };
                edges.push((u, v, rate));
                Ok(())
            };

            // arrival process
            if pa + 1 < mr.arrival.k {
                let rate = mr.arrival.rate(pa + 1);
                emit(&mut edges, &mut index, &mut states, codec.with_pa(key, i, pa + 1), rate)?;
            } else {
                let rate = mr.arrival.rate(mr.arrival.k);
                let reset = codec.with_pa(key, i, 0);
                if free {
                    emit(&mut edges, &mut index, &mut states, codec.with_s(reset, i, true), rate)?;
                } else if q < opts.m {
                    emit(&mut edges, &mut index, &mut states, codec.with_q(reset, i, q + 1), rate)?;
                } else if reset != key {
                    // full queue: the request is discarded, the phase resets
                    emit(&mut edges, &mut index, &mut states, reset, rate)?;
                }
            }

            // service process
            if s {
                let ps = codec.ps(key, i);
                if ps + 1 < mr.service.k {
                    let rate = mr.service.rate(ps + 1);
                    emit(&mut edges, &mut index, &mut states, codec.with_ps(key, i, ps + 1), rate)?;
                } else {
                    let rate = mr.service.rate(mr.service.k);
                    let done = codec.with_s(codec.with_ps(key, i, 0), i, false);
                    emit(&mut edges, &mut index, &mut states, done, rate)?;
                }
            }

            // choice
            if q > 0 && free {
                let dst = codec.with_s(codec.with_q(key, i, q - 1), i, true);
                emit(&mut edges, &mut index, &mut states, dst, opts.choice_rate)?;
            }
        }
    }
    drop(index);

    let n = states.len();
    let nnz = edges.len();
    let mut exit = vec![0.0f64; n];
    let mut counts = vec![0usize; n + 1];
    for &(src, dst, rate) in &edges {
        exit[src as usize] += rate;
        counts[dst as usize + 1] += 1;
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let in_ptr = counts;
    let mut cursor = in_ptr.clone();
    let mut in_src = vec![0u32; nnz];
    let mut in_rate = vec![0.0f64; nnz];
    for &(src, dst, rate) in &edges {
        let pos = cursor[dst as usize];
        in_src[pos] = src;
        in_rate[pos] = rate;
        cursor[dst as usize] = pos + 1;
    }

    Ok(CtmcModel {
        routes: modeled.to_vec(),
        codec,
        m: opts.m,
        choice_rate: opts.choice_rate,
        states,
        in_ptr,
        in_src,
        in_rate,
        exit,
    })
}

/// Reachable conflict-feasible states only; thin wrapper over [`build_model`].
pub fn enumerate_states(
    conflicts: &ConflictMatrix,
    modeled: &[ModeledRoute],
    opts: &BuildOptions,
) -> Result<Vec<u64>> {
    build_model(conflicts, modeled, opts).map(|m| m.states)
}
