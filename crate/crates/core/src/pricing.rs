//! Maximum-weight exchange plan: the column-generation subproblem.
//!
//! Given per-vertex weights `w` and a constant `alpha0`, find the feasible
//! plan maximising the total weight of its recipients and report
//! `zeta = alpha0 - max`. A negative `zeta` means the plan is an improving
//! column for the master.
//!
//! Two exact backends are available: a branch-and-bound over the enumerated
//! cycles and chains (weighted set packing), and the hybrid position-indexed
//! edge formulation handed to HiGHS. [`PricingSolver::new`] picks the packing
//! solver while the structure count stays below [`STRUCTURE_THRESHOLD`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use highs::{HighsModelStatus, RowProblem, Sense};

use crate::enumeration::{count_structures, enumerate_structures, Chain, Cycle, ExchangePlan, Structure};
use crate::error::{Error, Result};
use crate::instance::{Caps, Instance, VertexId};

/// Structure count above which the HPIEF backend takes over.
pub const STRUCTURE_THRESHOLD: usize = 400;

const EPS: f64 = 1e-12;

/// Subproblem objective: `alpha0 - sum_{v in V(S) \ N} w[v]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PricingWeights {
    pub alpha0: f64,
    /// Indexed by vertex id; entries for NDDs are ignored.
    pub w: Vec<f64>,
}

impl PricingWeights {
    pub fn uniform(inst: &Instance, alpha0: f64, w: f64) -> Self {
        Self {
            alpha0,
            w: vec![w; inst.len()],
        }
    }

    pub fn plan_value(&self, plan: &ExchangePlan) -> f64 {
        plan.covered_pairs().iter().map(|&v| self.w[v]).sum()
    }

    /// Reduced cost of `plan` under these weights.
    pub fn zeta(&self, plan: &ExchangePlan) -> f64 {
        self.alpha0 - self.plan_value(plan)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PricingOutcome {
    pub plan: ExchangePlan,
    /// Maximum total weight.
    pub value: f64,
    pub zeta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PricingBackend {
    /// Packing below [`STRUCTURE_THRESHOLD`] structures, HPIEF above.
    #[default]
    Auto,
    Packing,
    Hpief,
}

enum Engine {
    Packing(Packing),
    Hpief,
}

/// Reusable pricing oracle for one instance.
pub struct PricingSolver<'a> {
    inst: &'a Instance,
    caps: Caps,
    engine: Engine,
    time_limit: Option<Duration>,
}

impl<'a> PricingSolver<'a> {
    pub fn new(inst: &'a Instance, caps: Caps) -> Result<Self> {
        Self::with_backend(inst, caps, PricingBackend::Auto)
    }

    pub fn with_backend(inst: &'a Instance, caps: Caps, backend: PricingBackend) -> Result<Self> {
        Caps::new(caps.cycle, caps.chain)?;
        let engine = match backend {
            PricingBackend::Packing => Engine::Packing(Packing::new(enumerate_structures(inst, caps))),
            PricingBackend::Hpief => Engine::Hpief,
            PricingBackend::Auto => {
                if count_structures(inst, caps, STRUCTURE_THRESHOLD) <= STRUCTURE_THRESHOLD {
                    Engine::Packing(Packing::new(enumerate_structures(inst, caps)))
                } else {
                    Engine::Hpief
                }
            }
        };
        Ok(Self {
            inst,
            caps,
            engine,
            time_limit: None,
        })
    }

    pub fn set_time_limit(&mut self, limit: Option<Duration>) {
        self.time_limit = limit;
    }

    pub fn backend(&self) -> PricingBackend {
        match self.engine {
            Engine::Packing(_) => PricingBackend::Packing,
            Engine::Hpief => PricingBackend::Hpief,
        }
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// Best plan overall (the empty plan is always feasible).
    pub fn solve(&self, weights: &PricingWeights) -> Result<PricingOutcome> {
        self.solve_until(weights, None)
    }

    /// As [`solve`](Self::solve), giving up at `deadline` (or the configured
    /// time limit, whichever comes first).
    pub fn solve_until(&self, weights: &PricingWeights, deadline: Option<Instant>) -> Result<PricingOutcome> {
        Ok(self
            .run(weights, None, deadline)?
            .expect("unforced pricing always has the empty plan"))
    }

    /// Best plan that contains `v`, or `None` if no feasible plan does.
    pub fn solve_forced(&self, weights: &PricingWeights, v: VertexId) -> Result<Option<PricingOutcome>> {
        self.run(weights, Some(v), None)
    }

    fn run(&self, weights: &PricingWeights, force: Option<VertexId>, deadline: Option<Instant>) -> Result<Option<PricingOutcome>> {
        let own = self.time_limit.map(|d| Instant::now() + d);
        let deadline = match (own, deadline) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let found = match &self.engine {
            Engine::Packing(p) => p.solve(&weights.w, force, deadline)?,
            Engine::Hpief => {
                let model = build_hpief(self.inst, self.caps, weights, force);
                model.solve(deadline.map(|d| d.saturating_duration_since(Instant::now())))?
            }
        };
        Ok(found.map(|plan| {
            let value = weights.plan_value(&plan);
            PricingOutcome {
                zeta: weights.alpha0 - value,
                plan,
                value,
            }
        }))
    }
}

/// One-shot convenience wrapper returning `(plan, zeta)`.
pub fn solve_pricing(inst: &Instance, caps: Caps, weights: &PricingWeights) -> Result<(ExchangePlan, f64)> {
    let out = PricingSolver::new(inst, caps)?.solve(weights)?;
    Ok((out.plan, out.zeta))
}

// ---------------------------------------------------------------------------
// Weighted set packing branch-and-bound

struct Packing {
    structures: Vec<Structure>,
}

struct Search<'s> {
    structures: &'s [Structure],
    value: Vec<f64>,
    used: Vec<bool>,
    chosen: Vec<usize>,
    best_value: f64,
    best: Vec<usize>,
    share: Vec<f64>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

impl Packing {
    fn new(structures: Vec<Structure>) -> Self {
        Self { structures }
    }

    fn solve(&self, w: &[f64], force: Option<VertexId>, deadline: Option<Instant>) -> Result<Option<ExchangePlan>> {
        let value: Vec<f64> = self
            .structures
            .iter()
            .map(|s| s.recipients().iter().map(|&v| w[v]).sum())
            .collect();
        let n_vertices = w.len();

        // Non-positive structures never help an unforced packing.
        let alive: Vec<usize> = (0..self.structures.len())
            .filter(|&i| value[i] > EPS || force.is_some_and(|f| self.structures[i].vertices().contains(&f)))
            .collect();

        let mut search = Search {
            structures: &self.structures,
            value,
            used: vec![false; n_vertices],
            chosen: Vec::new(),
            best_value: f64::NEG_INFINITY,
            best: Vec::new(),
            share: vec![0.0; n_vertices],
            deadline,
            nodes: 0,
            timed_out: false,
        };

        match force {
            None => {
                search.greedy(&alive);
                search.branch(alive);
            }
            Some(f) => {
                let mut roots: Vec<usize> = alive
                    .iter()
                    .copied()
                    .filter(|&i| self.structures[i].vertices().contains(&f))
                    .collect();
                if roots.is_empty() {
                    return Ok(None);
                }
                roots.sort_by(|&a, &b| search.value[b].total_cmp(&search.value[a]).then(a.cmp(&b)));
                for r in roots {
                    let rest = search.include(r, &alive);
                    search.greedy(&rest);
                    search.branch(rest);
                    search.exclude_last(r);
                }
            }
        }
        if search.timed_out {
            return Err(Error::PricingTimeout {
                incumbent: search.best_value,
                proven: false,
            });
        }
        Ok(Some(ExchangePlan::from_structures(
            search.best.iter().map(|&i| &self.structures[i]),
        )))
    }
}

impl Search<'_> {
    fn current_value(&self) -> f64 {
        self.chosen.iter().map(|&i| self.value[i]).sum()
    }

    fn record(&mut self) {
        let v = self.current_value();
        if v > self.best_value + EPS {
            self.best_value = v;
            self.best = self.chosen.clone();
        }
    }

    fn greedy(&mut self, alive: &[usize]) {
        let mut order = alive.to_vec();
        order.sort_by(|&a, &b| self.value[b].total_cmp(&self.value[a]).then(a.cmp(&b)));
        let mut used = self.used.clone();
        let mut picked = self.chosen.clone();
        for i in order {
            let vs = self.structures[i].vertices();
            if vs.iter().all(|&v| !used[v]) {
                vs.iter().for_each(|&v| used[v] = true);
                picked.push(i);
            }
        }
        let v: f64 = picked.iter().map(|&i| self.value[i]).sum();
        if v > self.best_value + EPS || self.best_value == f64::NEG_INFINITY {
            self.best_value = v;
            picked.sort_unstable();
            self.best = picked;
        }
    }

    /// Marks `i` chosen and returns the candidates still disjoint from the
    /// used set.
    fn include(&mut self, i: usize, alive: &[usize]) -> Vec<usize> {
        for &v in self.structures[i].vertices() {
            self.used[v] = true;
        }
        self.chosen.push(i);
        self.filter(alive)
    }

    fn exclude_last(&mut self, i: usize) {
        for &v in self.structures[i].vertices() {
            self.used[v] = false;
        }
        self.chosen.pop();
    }

    fn filter(&self, alive: &[usize]) -> Vec<usize> {
        alive
            .iter()
            .copied()
            .filter(|&j| self.structures[j].vertices().iter().all(|&v| !self.used[v]))
            .collect()
    }

    fn branch(&mut self, alive: Vec<usize>) {
        self.nodes += 1;
        if self.timed_out {
            return;
        }
        if self.nodes % 1024 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    return;
                }
            }
        }
        self.record();
        if alive.is_empty() {
            return;
        }

        // Each candidate spreads its value evenly over its vertices; every
        // free vertex contributes at most its best share.
        let mut touched = Vec::new();
        for &j in &alive {
            let s = &self.structures[j];
            let ratio = self.value[j] / s.vertices().len() as f64;
            for &v in s.vertices() {
                if self.share[v] == 0.0 {
                    touched.push(v);
                }
                if ratio > self.share[v] {
                    self.share[v] = ratio;
                }
            }
        }
        let bound: f64 = touched.iter().map(|&v| self.share[v]).sum();
        let pivot = touched
            .iter()
            .copied()
            .max_by(|&a, &b| self.share[a].total_cmp(&self.share[b]).then(b.cmp(&a)))
            .expect("alive candidates touch at least one vertex");
        for &v in &touched {
            self.share[v] = 0.0;
        }
        if self.current_value() + bound <= self.best_value + EPS {
            return;
        }

        let mut options: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|&j| self.structures[j].vertices().contains(&pivot))
            .collect();
        options.sort_by(|&a, &b| self.value[b].total_cmp(&self.value[a]).then(a.cmp(&b)));
        for j in options {
            let rest = self.include(j, &alive);
            self.branch(rest);
            self.exclude_last(j);
        }
        // pivot left uncovered
        self.used[pivot] = true;
        let rest = self.filter(&alive);
        self.branch(rest);
        self.used[pivot] = false;
    }
}

// ---------------------------------------------------------------------------
// Hybrid position-indexed edge formulation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HpiefVar {
    /// `x^l_{ijk}`: arc (from, to) at position `pos` of the cycle in graph copy `copy`.
    Cycle {
        copy: VertexId,
        from: VertexId,
        to: VertexId,
        pos: usize,
    },
    /// `y_{ijk}`: arc (from, to) at position `pos` of a chain.
    Chain { from: VertexId, to: VertexId, pos: usize },
}

impl HpiefVar {
    pub fn target(&self) -> VertexId {
        match *self {
            HpiefVar::Cycle { to, .. } | HpiefVar::Chain { to, .. } => to,
        }
    }

    fn lp_name(&self) -> String {
        match *self {
            HpiefVar::Cycle { copy, from, to, pos } => format!("x_{copy}_{from}_{to}_{pos}"),
            HpiefVar::Chain { from, to, pos } => format!("y_{from}_{to}_{pos}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HpiefRow {
    pub label: String,
    pub terms: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

/// Binary program over `x^l_{ijk}` / `y_{ijk}` with constraint blocks c1-c4.
#[derive(Clone, Debug, PartialEq)]
pub struct HpiefModel {
    pub vars: Vec<HpiefVar>,
    pub objective: Vec<f64>,
    pub rows: Vec<HpiefRow>,
}

/// Positions an arc (i, j) may take inside the cycle of copy `l`.
fn cycle_positions(i: VertexId, j: VertexId, l: VertexId, cap: usize) -> std::ops::RangeInclusive<usize> {
    if i == l {
        1..=1
    } else if j == l {
        2..=cap
    } else {
        2..=cap.saturating_sub(1)
    }
}

/// Builds the model. Copies are indexed by pair vertices in instance order;
/// copy `l` only uses pairs with index >= `l`. Every variable delivering a
/// kidney to `v` gets objective coefficient `w[v]`. With `force`, the c1 row
/// of that vertex (c3 for an NDD) becomes an equality.
pub fn build_hpief(inst: &Instance, caps: Caps, weights: &PricingWeights, force: Option<VertexId>) -> HpiefModel {
    let mut vars = Vec::new();
    let mut index: BTreeMap<HpiefVar, usize> = BTreeMap::new();
    let mut push = |v: HpiefVar, vars: &mut Vec<HpiefVar>| {
        index.insert(v, vars.len());
        vars.push(v);
    };

    let pairs: Vec<VertexId> = inst.pairs().collect();
    for &l in &pairs {
        for a in inst.arcs() {
            let (i, j) = (a.source, a.target);
            if !inst.is_pair(i) || i < l || j < l {
                continue;
            }
            for pos in cycle_positions(i, j, l, caps.cycle) {
                push(HpiefVar::Cycle { copy: l, from: i, to: j, pos }, &mut vars);
            }
        }
    }
    for a in inst.arcs() {
        let positions = if inst.is_pair(a.source) { 2..=caps.chain } else { 1..=1 };
        for pos in positions {
            push(
                HpiefVar::Chain {
                    from: a.source,
                    to: a.target,
                    pos,
                },
                &mut vars,
            );
        }
    }
    let objective = vars.iter().map(|v| weights.w[v.target()]).collect();

    let mut rows = Vec::new();
    // c1: each pair receives at most once
    for &i in &pairs {
        let terms: Vec<(usize, f64)> = vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.target() == i)
            .map(|(k, _)| (k, 1.0))
            .collect();
        let lower = if force == Some(i) { 1.0 } else { f64::NEG_INFINITY };
        rows.push(HpiefRow {
            label: format!("c1_{i}"),
            terms,
            lower,
            upper: 1.0,
        });
    }
    // c2: flow conservation by position inside each copy
    for &l in &pairs {
        for &i in pairs.iter().filter(|&&i| i > l) {
            for k in 1..caps.cycle {
                let mut terms = Vec::new();
                for &j in inst.predecessors(i) {
                    if let Some(&x) = index.get(&HpiefVar::Cycle { copy: l, from: j, to: i, pos: k }) {
                        terms.push((x, 1.0));
                    }
                }
                for &j in inst.successors(i) {
                    if let Some(&x) = index.get(&HpiefVar::Cycle { copy: l, from: i, to: j, pos: k + 1 }) {
                        terms.push((x, -1.0));
                    }
                }
                if !terms.is_empty() {
                    rows.push(HpiefRow {
                        label: format!("c2_{l}_{i}_{k}"),
                        terms,
                        lower: 0.0,
                        upper: 0.0,
                    });
                }
            }
        }
    }
    // c3: each NDD donates at most once
    for n in inst.ndds() {
        let terms: Vec<(usize, f64)> = inst
            .successors(n)
            .iter()
            .filter_map(|&j| index.get(&HpiefVar::Chain { from: n, to: j, pos: 1 }))
            .map(|&x| (x, 1.0))
            .collect();
        let lower = if force == Some(n) { 1.0 } else { f64::NEG_INFINITY };
        rows.push(HpiefRow {
            label: format!("c3_{n}"),
            terms,
            lower,
            upper: 1.0,
        });
    }
    // c4: a pair donates at position k+1 only after receiving at position k
    for &i in &pairs {
        for k in 1..caps.chain {
            let mut terms = Vec::new();
            for &j in inst.predecessors(i) {
                if let Some(&y) = index.get(&HpiefVar::Chain { from: j, to: i, pos: k }) {
                    terms.push((y, 1.0));
                }
            }
            for &j in inst.successors(i) {
                if let Some(&y) = index.get(&HpiefVar::Chain { from: i, to: j, pos: k + 1 }) {
                    terms.push((y, -1.0));
                }
            }
            if !terms.is_empty() {
                rows.push(HpiefRow {
                    label: format!("c4_{i}_{k}"),
                    terms,
                    lower: 0.0,
                    upper: f64::INFINITY,
                });
            }
        }
    }

    HpiefModel { vars, objective, rows }
}

impl HpiefModel {
    /// Solves the binary program with HiGHS. `Ok(None)` means infeasible
    /// (only possible with a forced vertex).
    pub fn solve(&self, time_limit: Option<Duration>) -> Result<Option<ExchangePlan>> {
        if self.rows.iter().any(|r| r.terms.is_empty() && r.lower > 0.0) {
            return Ok(None);
        }
        if self.vars.is_empty() {
            return Ok(Some(ExchangePlan::empty()));
        }
        let mut pb = RowProblem::default();
        let cols: Vec<_> = self
            .objective
            .iter()
            .map(|&c| pb.add_integer_column(c, 0..=1))
            .collect();
        for r in self.rows.iter().filter(|r| !r.terms.is_empty()) {
            let factors: Vec<_> = r.terms.iter().map(|&(k, a)| (cols[k], a)).collect();
            match (r.lower.is_finite(), r.upper.is_finite()) {
                (true, true) => pb.add_row(r.lower..=r.upper, factors),
                (true, false) => pb.add_row(r.lower.., factors),
                (false, true) => pb.add_row(..=r.upper, factors),
                (false, false) => continue,
            }
        }
        let mut model = pb.optimise(Sense::Maximise);
        model.make_quiet();
        model.set_option("threads", 1);
        model.set_option("mip_rel_gap", 0.0);
        model.set_option("mip_abs_gap", 1e-9);
        if let Some(t) = time_limit {
            model.set_option("time_limit", t.as_secs_f64());
        }
        let solved = model.solve();
        match solved.status() {
            HighsModelStatus::Optimal => {
                let values = solved.get_solution().columns().to_vec();
                Ok(Some(self.decode(&values)))
            }
            HighsModelStatus::Infeasible => Ok(None),
            HighsModelStatus::ReachedTimeLimit => Err(Error::PricingTimeout {
                incumbent: solved.objective_value(),
                proven: false,
            }),
            other => Err(Error::Solver(format!("HiGHS returned {other:?}"))),
        }
    }

    /// Turns a 0/1 assignment into cycles and chains.
    pub fn decode(&self, values: &[f64]) -> ExchangePlan {
        let mut cycle_next: BTreeMap<(VertexId, VertexId), VertexId> = BTreeMap::new();
        let mut chain_next: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut chain_starts = Vec::new();
        for (var, &x) in self.vars.iter().zip(values) {
            if x < 0.5 {
                continue;
            }
            match *var {
                HpiefVar::Cycle { copy, from, to, .. } => {
                    cycle_next.insert((copy, from), to);
                }
                HpiefVar::Chain { from, to, pos } => {
                    chain_next.insert(from, to);
                    if pos == 1 {
                        chain_starts.push(from);
                    }
                }
            }
        }
        let mut cycles = Vec::new();
        let copies: Vec<VertexId> = cycle_next
            .keys()
            .filter(|(copy, from)| copy == from)
            .map(|(copy, _)| *copy)
            .collect();
        for l in copies {
            let mut vs = vec![l];
            let mut at = cycle_next[&(l, l)];
            while at != l && vs.len() <= self.vars.len() {
                vs.push(at);
                at = cycle_next[&(l, at)];
            }
            cycles.push(Cycle::new(vs));
        }
        let mut chains = Vec::new();
        for n in chain_starts {
            let mut vs = vec![n];
            let mut at = n;
            while let Some(&next) = chain_next.get(&at) {
                vs.push(next);
                at = next;
            }
            chains.push(Chain::new(vs));
        }
        ExchangePlan::new(cycles, chains)
    }

    /// CPLEX LP text, for debugging.
    pub fn to_lp(&self) -> String {
        let mut out = String::from("\\ HPIEF pricing model\nMaximize\n obj:");
        for (var, c) in self.vars.iter().zip(&self.objective) {
            let _ = write!(out, " {} {} {}", if *c < 0.0 { "-" } else { "+" }, c.abs(), var.lp_name());
        }
        out.push_str("\nSubject To\n");
        for r in &self.rows {
            if r.terms.is_empty() {
                continue;
            }
            let mut lhs = String::new();
            for &(k, a) in &r.terms {
                let _ = write!(lhs, " {} {} {}", if a < 0.0 { "-" } else { "+" }, a.abs(), self.vars[k].lp_name());
            }
            if r.lower == r.upper {
                let _ = writeln!(out, " {}:{} = {}", r.label, lhs, r.upper);
            } else {
                if r.upper.is_finite() {
                    let _ = writeln!(out, " {}:{} <= {}", r.label, lhs, r.upper);
                }
                if r.lower.is_finite() {
                    let _ = writeln!(out, " {}_lo:{} >= {}", r.label, lhs, r.lower);
                }
            }
        }
        out.push_str("Binaries\n");
        for v in &self.vars {
            let _ = writeln!(out, " {}", v.lp_name());
        }
        out.push_str("End\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_plans;
    use crate::instance::{example_pool, generate_instance, InstanceBuilder};

    fn weights_named(inst: &Instance, alpha0: f64, default: f64, named: &[(&str, f64)]) -> PricingWeights {
        let mut w = PricingWeights::uniform(inst, alpha0, default);
        for (n, x) in named {
            w.w[inst.id(n).unwrap()] = *x;
        }
        w
    }

    fn brute_force(inst: &Instance, caps: Caps, w: &PricingWeights, force: Option<VertexId>) -> Option<f64> {
        enumerate_plans(inst, caps, None)
            .unwrap()
            .iter()
            .filter(|p| force.map_or(true, |f| p.contains(f)))
            .map(|p| w.plan_value(p))
            .max_by(f64::total_cmp)
    }

    #[test]
    fn unit_weights_pick_the_five_cover() {
        let inst = example_pool();
        for backend in [PricingBackend::Packing, PricingBackend::Hpief] {
            let solver = PricingSolver::with_backend(&inst, Caps::default(), backend).unwrap();
            let out = solver.solve(&PricingWeights::uniform(&inst, 0.0, 1.0)).unwrap();
            assert_eq!(out.zeta, -5.0, "{backend:?}");
            assert_eq!(out.plan.serialize(&inst), "cycle: v1>v2>v3 ; chain: v7>v6>v5");
        }
    }

    #[test]
    fn heavy_v4_picks_s2() {
        let inst = example_pool();
        let w = weights_named(&inst, 0.0, 1.0, &[("v4", 10.0)]);
        for backend in [PricingBackend::Packing, PricingBackend::Hpief] {
            let solver = PricingSolver::with_backend(&inst, Caps::default(), backend).unwrap();
            let out = solver.solve(&w).unwrap();
            assert_eq!(out.value, 13.0);
            assert_eq!(out.zeta, -13.0);
            assert_eq!(out.plan.serialize(&inst), "cycle: v1>v4 ; chain: v7>v6>v5");
        }
        assert_eq!(brute_force(&inst, Caps::default(), &w, None), Some(13.0));
    }

    #[test]
    fn nonpositive_weights_give_empty_plan() {
        let inst = generate_instance(12, 0.1, 0.4, 3);
        let mut w = PricingWeights::uniform(&inst, 1.0, -0.5);
        w.w[0] = 0.0;
        for backend in [PricingBackend::Packing, PricingBackend::Hpief] {
            let solver = PricingSolver::with_backend(&inst, Caps::default(), backend).unwrap();
            let out = solver.solve(&w).unwrap();
            assert!(out.plan.is_empty(), "{backend:?}");
            assert_eq!(out.zeta, 1.0);
        }
    }

    #[test]
    fn zero_weights_hpief_optimum_is_zero() {
        let inst = example_pool();
        let model = build_hpief(&inst, Caps::default(), &PricingWeights::uniform(&inst, 0.0, 0.0), None);
        let plan = model.solve(None).unwrap().unwrap();
        assert_eq!(PricingWeights::uniform(&inst, 0.0, 1.0).plan_value(&plan) * 0.0, 0.0);
    }

    #[test]
    fn forced_v4_gives_s2() {
        let inst = example_pool();
        let w = PricingWeights::uniform(&inst, 0.0, 1.0);
        let v4 = inst.id("v4").unwrap();
        for backend in [PricingBackend::Packing, PricingBackend::Hpief] {
            let solver = PricingSolver::with_backend(&inst, Caps::default(), backend).unwrap();
            let out = solver.solve_forced(&w, v4).unwrap().unwrap();
            assert_eq!(out.value, 4.0, "{backend:?}");
            assert!(out.plan.contains(v4));
        }
    }

    #[test]
    fn forced_isolated_vertex_is_infeasible() {
        let inst = InstanceBuilder::new()
            .pair("a", 0)
            .pair("b", 0)
            .pair("c", 0)
            .ndd("n")
            .arc("a", "b")
            .arc("b", "a")
            .arc("c", "a")
            .build()
            .unwrap();
        let w = PricingWeights::uniform(&inst, 0.0, 1.0);
        for backend in [PricingBackend::Packing, PricingBackend::Hpief] {
            let solver = PricingSolver::with_backend(&inst, Caps::default(), backend).unwrap();
            assert!(solver.solve_forced(&w, 2).unwrap().is_none(), "{backend:?}");
            assert!(solver.solve_forced(&w, 3).unwrap().is_none(), "{backend:?}");
        }
    }

    #[test]
    fn hpief_copies_respect_vertex_order() {
        let inst = example_pool();
        let model = build_hpief(&inst, Caps::default(), &PricingWeights::uniform(&inst, 0.0, 1.0), None);
        for v in &model.vars {
            if let HpiefVar::Cycle { copy, from, to, pos } = *v {
                assert!(from >= copy && to >= copy);
                assert!((1..=3).contains(&pos));
                if from == copy {
                    assert_eq!(pos, 1);
                }
            }
        }
        let lp = model.to_lp();
        assert!(lp.starts_with("\\ HPIEF"));
        assert!(lp.contains("c1_3:"));
        assert!(lp.trim_end().ends_with("End"));
    }

    #[test]
    fn hpief_forced_row_is_equality() {
        let inst = example_pool();
        let model = build_hpief(&inst, Caps::default(), &PricingWeights::uniform(&inst, 0.0, 1.0), Some(3));
        let row = model.rows.iter().find(|r| r.label == "c1_3").unwrap();
        assert_eq!((row.lower, row.upper), (1.0, 1.0));
    }

    #[test]
    fn backends_agree_with_brute_force_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for seed in 0..6 {
            let inst = generate_instance(9, 0.25, 0.35, seed);
            let caps = Caps::default();
            let packing = PricingSolver::with_backend(&inst, caps, PricingBackend::Packing).unwrap();
            let hpief = PricingSolver::with_backend(&inst, caps, PricingBackend::Hpief).unwrap();
            for _ in 0..8 {
                let w = PricingWeights {
                    alpha0: rng.gen_range(-1.0..1.0),
                    w: (0..inst.len()).map(|_| rng.gen_range(-1.0..2.0)).collect(),
                };
                let want = brute_force(&inst, caps, &w, None).unwrap();
                let a = packing.solve(&w).unwrap();
                let b = hpief.solve(&w).unwrap();
                assert!((a.value - want).abs() < 1e-9, "packing {} vs {}", a.value, want);
                assert!((b.value - want).abs() < 1e-6, "hpief {} vs {}", b.value, want);
                a.plan.check_feasible(&inst, caps).unwrap();
                b.plan.check_feasible(&inst, caps).unwrap();
            }
        }
    }

    #[test]
    fn unequal_caps_are_honoured_by_both_backends() {
        let inst = generate_instance(10, 0.3, 0.4, 5);
        let caps = Caps::new(2, 4).unwrap();
        let w = PricingWeights::uniform(&inst, 0.0, 1.0);
        let want = brute_force(&inst, caps, &w, None).unwrap();
        for backend in [PricingBackend::Packing, PricingBackend::Hpief] {
            let out = PricingSolver::with_backend(&inst, caps, backend).unwrap().solve(&w).unwrap();
            out.plan.check_feasible(&inst, caps).unwrap();
            assert!((out.value - want).abs() < 1e-9);
        }
    }
}
