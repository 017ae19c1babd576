//! Column generation: alternate between the restricted master and the
//! pricing problem until no plan has a negative reduced cost.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conic::{AutoBackend, ConicBackend, ConicSolution, SolveStatus, SolverSettings};
use crate::enumeration::{enumerate_plans, extend_to_maximal, ExchangePlan};
use crate::error::{Error, Result};
use crate::instance::{hard_to_match_set, preprocess, Caps, Instance, VertexId, DEFAULT_PRA_THRESHOLD};
use crate::metrics::{build_report, lottery_objective, SchemeReport};
use crate::pricing::{PricingBackend, PricingSolver, PricingWeights};
use crate::schemes::{
    build_master, floor_slack, master_axes, nash_reference, pricing_weights, FairnessConcept, MasterGoal, MasterSpec,
    RefPoint, SchemeKind,
};

/// Probabilities at or below this are dropped from a lottery.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ColGenParams {
    pub tol_price: f64,
    pub solver_tol: f64,
    pub max_iters: usize,
    pub time_limit_s: f64,
    pub warm_columns: Vec<ExchangePlan>,
    /// Extend every generated column to a maximal plan.
    pub maximal_only: bool,
    pub pricing_backend: PricingBackend,
    pub pra_threshold: u8,
    /// Multiplies the fairness axis of the master.
    pub f2_scale: f64,
}

impl Default for ColGenParams {
    fn default() -> Self {
        Self {
            tol_price: 1e-6,
            solver_tol: 1e-8,
            max_iters: 10_000,
            time_limit_s: 3600.0,
            warm_columns: Vec::new(),
            maximal_only: false,
            pricing_backend: PricingBackend::Auto,
            pra_threshold: DEFAULT_PRA_THRESHOLD,
            f2_scale: 1.0,
        }
    }
}

impl ColGenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_price > 0.0 && self.solver_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.time_limit_s > 0.0) {
            return Err(Error::Config("time limit must be positive".into()));
        }
        if !(self.f2_scale > 0.0) {
            return Err(Error::Config("fairness scale must be positive".into()));
        }
        Ok(())
    }
}

/// A probability distribution over exchange plans.
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery {
    /// `(plan, serialized plan, probability)`, sorted by the serialized form.
    entries: Vec<(ExchangePlan, String, f64)>,
    /// `delta_v` for every pair in `P'`.
    pub vertex_probability: BTreeMap<VertexId, f64>,
}

impl Lottery {
    /// Clips negative weights, drops entries at or below
    /// [`SUPPORT_THRESHOLD`], merges duplicates and renormalises.
    pub fn new(inst: &Instance, weighted: impl IntoIterator<Item = (ExchangePlan, f64)>, pairs: &[VertexId]) -> Self {
        let mut merged: BTreeMap<String, (ExchangePlan, f64)> = BTreeMap::new();
        for (plan, p) in weighted {
            let p = p.max(0.0);
            if p <= SUPPORT_THRESHOLD {
                continue;
            }
            let key = plan.serialize(inst);
            merged.entry(key).or_insert((plan, 0.0)).1 += p;
        }
        let total: f64 = merged.values().map(|e| e.1).sum();
        let entries: Vec<(ExchangePlan, String, f64)> = merged
            .into_iter()
            .map(|(k, (plan, p))| (plan, k, p / total))
            .collect();
        let vertex_probability = pairs
            .iter()
            .map(|&v| {
                let d = entries.iter().filter(|e| e.0.contains(v)).map(|e| e.2).sum();
                (v, d)
            })
            .collect();
        Self {
            entries,
            vertex_probability,
        }
    }

    pub fn degenerate(inst: &Instance, plan: ExchangePlan, pairs: &[VertexId]) -> Self {
        Self::new(inst, [(plan, 1.0)], pairs)
    }

    pub fn support(&self) -> impl Iterator<Item = (&ExchangePlan, f64)> {
        self.entries.iter().map(|e| (&e.0, e.2))
    }

    pub fn labelled_support(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|e| (e.1.as_str(), e.2))
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn probability_of(&self, plan: &ExchangePlan) -> f64 {
        self.entries.iter().filter(|e| &e.0 == plan).map(|e| e.2).sum()
    }

    pub fn delta(&self, v: VertexId) -> f64 {
        self.vertex_probability.get(&v).copied().unwrap_or(0.0)
    }

    pub fn expected_transplants(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.0.n_transplants() as f64).sum()
    }
}

/// Draws one plan; see [`sample_plans`].
pub fn sample_plan(lottery: &Lottery, seed: u64) -> ExchangePlan {
    sample_plans(lottery, seed, 1).pop().expect("one draw")
}

/// Inverse-CDF sampling over the support in serialized-plan order.
pub fn sample_plans(lottery: &Lottery, seed: u64, draws: usize) -> Vec<ExchangePlan> {
    let probs: Vec<f64> = lottery.entries.iter().map(|e| e.2).collect();
    sample_indices(&probs, seed, draws)
        .into_iter()
        .map(|k| lottery.entries.get(k).map(|e| e.0.clone()).unwrap_or_else(ExchangePlan::empty))
        .collect()
}

/// Indices drawn from `probs` by inverse CDF on a seeded ChaCha8 stream.
pub fn sample_indices(probs: &[f64], seed: u64, draws: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = probs.iter().sum();
    (0..draws)
        .map(|_| {
            let u: f64 = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            for (k, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return k;
                }
            }
            probs.len().saturating_sub(1)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationLog {
    pub iter: usize,
    pub cols: usize,
    pub zeta: f64,
    pub master_obj: f64,
    pub t_master: f64,
    pub t_price: f64,
}

impl fmt::Display for IterationLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={} cols={} zeta={:.6e} master_obj={:.9} t_master={:.3} t_price={:.3}",
            self.iter, self.cols, self.zeta, self.master_obj, self.t_master, self.t_price
        )
    }
}

#[derive(Clone, Debug)]
pub struct ColGenOutcome {
    pub spec: MasterSpec,
    pub columns: Vec<ExchangePlan>,
    /// Column weights of the final master, aligned with `columns`.
    pub delta: Vec<f64>,
    pub solution: ConicSolution,
    pub objective: f64,
    pub iterations: Vec<IterationLog>,
    pub converged: bool,
    pub final_zeta: f64,
    pub seconds: f64,
}

impl ColGenOutcome {
    pub fn lottery(&self, inst: &Instance) -> Lottery {
        Lottery::new(
            inst,
            self.columns.iter().cloned().zip(self.delta.iter().copied()),
            &self.spec.pairs,
        )
    }

    /// `(f1, f2)` as seen by the master.
    pub fn axes(&self) -> (f64, Option<f64>) {
        master_axes(&self.spec, &self.solution)
    }
}

fn solve_master(
    inst: &Instance,
    columns: &[ExchangePlan],
    spec: &MasterSpec,
    tol: f64,
    deadline: Instant,
) -> Result<ConicSolution> {
    let master = build_master(inst, columns, spec)?;
    let backend = AutoBackend::default();
    let mut settings = SolverSettings {
        tol,
        time_limit: Some(deadline.saturating_duration_since(Instant::now()).as_secs_f64()),
        ..SolverSettings::default()
    };
    let mut sol = backend.solve(&master.problem, &settings)?;
    if sol.status == SolveStatus::NumericalLimit {
        // one retry at a looser tolerance before giving up
        settings.tol = (tol * 100.0).min(1e-6);
        let retry = backend.solve(&master.problem, &settings)?;
        if retry.status != SolveStatus::NumericalLimit {
            sol = retry;
        }
    }
    Ok(sol)
}

/// Runs column generation for one master specification from `warm` columns.
pub fn column_generation(
    inst: &Instance,
    pricer: &PricingSolver<'_>,
    spec: &MasterSpec,
    warm: &[ExchangePlan],
    params: &ColGenParams,
    deadline: Instant,
) -> Result<ColGenOutcome> {
    let start = Instant::now();
    let caps = pricer.caps();
    let mut columns: Vec<ExchangePlan> = Vec::new();
    let mut seen: HashSet<ExchangePlan> = HashSet::new();
    let mut push = |plan: ExchangePlan, columns: &mut Vec<ExchangePlan>| {
        let plan = if params.maximal_only { extend_to_maximal(&plan, inst, caps) } else { plan };
        if seen.insert(plan.clone()) {
            columns.push(plan);
            true
        } else {
            false
        }
    };
    for plan in warm {
        push(plan.clone(), &mut columns);
    }
    if columns.is_empty() {
        push(ExchangePlan::empty(), &mut columns);
    }

    let mut iterations = Vec::new();
    let mut converged = false;
    let mut final_zeta = f64::NEG_INFINITY;
    let mut tol = params.solver_tol;
    let mut iter = 0;
    // last converged solution at the working tolerance, kept while polishing
    let mut coarse: Option<ConicSolution> = None;
    let solution = loop {
        iter += 1;
        let t0 = Instant::now();
        let sol = solve_master(inst, &columns, spec, tol, deadline)?;
        let t_master = t0.elapsed().as_secs_f64();
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Err(Error::MasterInfeasible(format!(
                    "{} columns, concept {}, goal {:?}",
                    columns.len(),
                    spec.concept,
                    spec.goal
                )))
            }
            _ if coarse.is_some() => {
                log::debug!("polishing ended with {}; keeping the working solution", sol.backend_status);
                converged = true;
                break coarse.take().expect("checked");
            }
            _ if Instant::now() >= deadline => break sol,
            _ => {
                return Err(Error::Solver(format!(
                    "master ended with {} (primal residual {:.2e}, stationarity {:.2e}, gap {:.2e})",
                    sol.backend_status, sol.residuals.primal, sol.residuals.stationarity, sol.residuals.gap
                )))
            }
        }

        let weights = pricing_weights(inst, spec, &sol)?;
        let t1 = Instant::now();
        let priced = match pricer.solve_until(&weights, Some(deadline)) {
            Ok(out) => out,
            Err(Error::PricingTimeout { .. }) => break coarse.take().unwrap_or(sol),
            Err(e) => return Err(e),
        };
        let t_price = t1.elapsed().as_secs_f64();
        let log = IterationLog {
            iter,
            cols: columns.len(),
            zeta: priced.zeta,
            master_obj: sol.objective,
            t_master,
            t_price,
        };
        log::info!("{log}");
        iterations.push(log);
        final_zeta = priced.zeta;

        if priced.zeta >= -params.tol_price {
            if tol <= POLISH_TOL || Instant::now() >= deadline {
                converged = true;
                break sol;
            }
            // optima of the nonlinear masters are flat, so the weights are only
            // accurate to about the square root of the tolerance; re-solve tightly
            tol = POLISH_TOL;
            coarse = Some(sol);
            continue;
        }
        if !push(priced.plan.clone(), &mut columns) {
            if params.maximal_only {
                log::warn!("maximal extension of the priced column is already present; stopping");
                converged = true;
                break sol;
            }
            if tol > POLISH_TOL {
                // the duals may just be too coarse; tighten and retry
                tol = (tol * 1e-2).max(POLISH_TOL);
                continue;
            }
            return Err(Error::Stall { zeta: priced.zeta });
        }
        coarse = None;
        tol = params.solver_tol;
        if iter >= params.max_iters || Instant::now() >= deadline {
            let sol = solve_master(inst, &columns, spec, tol, deadline)?;
            if sol.status != SolveStatus::Optimal {
                return Err(Error::Solver(format!("final master ended with {}", sol.backend_status)));
            }
            break sol;
        }
    };

    let delta: Vec<f64> = (0..columns.len())
        .map(|k| solution.value(&crate::schemes::delta_name(k)).unwrap_or(0.0))
        .collect();
    Ok(ColGenOutcome {
        spec: spec.clone(),
        objective: solution.objective,
        columns,
        delta,
        solution,
        iterations,
        converged,
        final_zeta,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Solves the master over every feasible plan (small instances only).
pub fn full_master(inst: &Instance, caps: Caps, spec: &MasterSpec, plan_limit: usize, tol: f64) -> Result<ColGenOutcome> {
    let start = Instant::now();
    let columns = enumerate_plans(inst, caps, Some(plan_limit))?;
    let deadline = Instant::now() + Duration::from_secs(3600);
    let solution = solve_master(inst, &columns, spec, tol, deadline)?;
    let converged = solution.status == SolveStatus::Optimal;
    if !converged && !(solution.status == SolveStatus::NumericalLimit && solution.backend_status == "AlmostSolved") {
        return Err(Error::Solver(format!("full master ended with {}", solution.backend_status)));
    }
    let mut best = outcome_of(spec, columns, solution, start);

    // polish: re-solve on the support, which is far better conditioned
    let support: Vec<ExchangePlan> = best
        .columns
        .iter()
        .zip(&best.delta)
        .filter(|(_, &d)| d > POLISH_THRESHOLD)
        .map(|(c, _)| c.clone())
        .collect();
    if !support.is_empty() && support.len() < best.columns.len() {
        let first = solve_master(inst, &support, spec, tol, deadline)?;
        let polished = polish(inst, &support, spec, first, deadline)?;
        if polished.status == SolveStatus::Optimal {
            let polished = outcome_of(spec, support, polished, start);
            let value = |o: &ColGenOutcome| lottery_objective(spec, &o.lottery(inst));
            if !best.converged || value(&polished) >= value(&best) {
                best = polished;
            }
        }
    }
    if !best.converged {
        log::warn!("full master is only almost solved; its lottery is approximate");
    }
    best.seconds = start.elapsed().as_secs_f64();
    Ok(best)
}

const POLISH_THRESHOLD: f64 = 1e-8;
const POLISH_TOL: f64 = 1e-12;

/// Re-solves a master at the polishing tolerance, keeping `sol` if that fails.
fn polish(inst: &Instance, columns: &[ExchangePlan], spec: &MasterSpec, sol: ConicSolution, deadline: Instant) -> Result<ConicSolution> {
    if sol.status != SolveStatus::Optimal || Instant::now() >= deadline {
        return Ok(sol);
    }
    let tight = solve_master(inst, columns, spec, POLISH_TOL, deadline)?;
    let slack = 1e-7 * (1.0 + sol.objective.abs());
    if tight.status == SolveStatus::Optimal && tight.objective >= sol.objective - slack {
        Ok(tight)
    } else {
        Ok(sol)
    }
}

fn outcome_of(spec: &MasterSpec, columns: Vec<ExchangePlan>, solution: ConicSolution, start: Instant) -> ColGenOutcome {
    let delta = (0..columns.len())
        .map(|k| solution.value(&crate::schemes::delta_name(k)).unwrap_or(0.0))
        .collect();
    ColGenOutcome {
        spec: spec.clone(),
        objective: solution.objective,
        converged: solution.status == SolveStatus::Optimal,
        columns,
        delta,
        solution,
        iterations: Vec::new(),
        final_zeta: 0.0,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// A preprocessed instance with everything shared across schemes.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// Instance restricted to matchable vertices.
    pub instance: Instance,
    pub caps: Caps,
    pub removed: Vec<String>,
    /// Matchable pairs `P'`.
    pub pairs: Vec<VertexId>,
    /// Hard-to-match pairs `P_H`.
    pub hard: BTreeSet<VertexId>,
    /// One forced-inclusion plan per pair plus the utilitarian optimum.
    pub seeds: Vec<ExchangePlan>,
    pub utilitarian: ExchangePlan,
    /// Maximum number of transplants.
    pub i1: f64,
    /// `|P|` and NDD count of the original instance.
    pub original_pairs: usize,
    pub original_ndds: usize,
}

pub fn prepare(inst: &Instance, caps: Caps, pra_threshold: u8) -> Result<Prepared> {
    let pre = preprocess(inst, caps)?;
    let instance = pre.instance;
    let pairs: Vec<VertexId> = instance.pairs().collect();
    let all: BTreeSet<VertexId> = (0..instance.len()).collect();
    let hard = hard_to_match_set(&instance, pra_threshold, &all);
    let pricer = PricingSolver::new(&instance, caps)?;
    let best = pricer.solve(&PricingWeights::uniform(&instance, 0.0, 1.0))?;
    let mut seeds = pre.seed_plans;
    if !seeds.contains(&best.plan) {
        seeds.push(best.plan.clone());
    }
    Ok(Prepared {
        caps,
        removed: pre.removed,
        pairs,
        hard,
        seeds,
        utilitarian: best.plan,
        i1: best.value,
        original_pairs: inst.n_pairs(),
        original_ndds: inst.n_ndds(),
        instance,
    })
}

impl Prepared {
    pub fn spec(&self, concept: FairnessConcept, goal: MasterGoal, reference: RefPoint, f2_scale: f64) -> Result<MasterSpec> {
        let mut s = MasterSpec::new(concept, goal, reference, self.hard.clone(), self.pairs.clone())?;
        s.f2_scale = f2_scale;
        Ok(s)
    }

    fn pricer(&self, params: &ColGenParams) -> Result<PricingSolver<'_>> {
        PricingSolver::with_backend(&self.instance, self.caps, params.pricing_backend)
    }
}

fn merge_columns(pool: &mut Vec<ExchangePlan>, more: &[ExchangePlan]) {
    let have: HashSet<ExchangePlan> = pool.iter().cloned().collect();
    pool.extend(more.iter().filter(|p| !have.contains(*p)).cloned());
}

/// Ideal and reference points for `concept`, plus every column generated
/// along the way.
///
/// `i2` maximises the fairness axis alone; `d1` maximises transplants with
/// the fairness axis held at `i2`; `i1` is the maximum number of transplants;
/// `d2` maximises fairness with transplants held at `i1` (for Nash the closed
/// form `-|P'| ln |P'|`). Floors carry a relative slack of `1e-7`, and the
/// reference point is moved down by the same slack.
pub fn compute_reference_point(
    prep: &Prepared,
    concept: FairnessConcept,
    params: &ColGenParams,
    deadline: Instant,
) -> Result<(RefPoint, Vec<ExchangePlan>)> {
    if concept == FairnessConcept::Utilitarian {
        return Ok((
            RefPoint {
                d: (prep.i1, 0.0),
                i: (prep.i1, 0.0),
            },
            prep.seeds.clone(),
        ));
    }
    let inst = &prep.instance;
    let pricer = prep.pricer(params)?;
    let mut pool = prep.seeds.clone();
    merge_columns(&mut pool, &params.warm_columns);
    let zero = RefPoint::default();

    let run = |goal: MasterGoal, pool: &[ExchangePlan]| -> Result<ColGenOutcome> {
        let spec = prep.spec(concept, goal, zero, 1.0)?;
        column_generation(inst, &pricer, &spec, pool, params, deadline)
    };

    let best_f2 = run(MasterGoal::Scheme(SchemeKind::Single), &pool)?;
    let i2 = best_f2.axes().1.expect("fairness axis");
    merge_columns(&mut pool, &best_f2.columns);

    let d1_run = run(MasterGoal::MaxF1 { f2_floor: Some(i2 - floor_slack(i2)) }, &pool)?;
    let d1 = d1_run.axes().0;
    merge_columns(&mut pool, &d1_run.columns);

    let i1 = prep.i1;
    let d2 = if concept == FairnessConcept::Nash {
        nash_reference(prep.pairs.len())
    } else {
        let d2_run = run(MasterGoal::MaxF2 { f1_floor: Some(i1 - floor_slack(i1)) }, &pool)?;
        merge_columns(&mut pool, &d2_run.columns);
        d2_run.axes().1.expect("fairness axis")
    };
    // pushed out by the floor slack so the probe lotteries stay feasible for NSWP
    let d2 = if concept == FairnessConcept::Nash { d2 } else { d2.min(i2) - floor_slack(i2) };
    let reference = RefPoint {
        d: (d1.min(i1) - floor_slack(i1), d2),
        i: (i1, i2),
    };
    Ok((reference, pool))
}

/// Everything produced by one scheme run.
#[derive(Clone, Debug)]
pub struct SchemeRun {
    pub concept: FairnessConcept,
    pub kind: SchemeKind,
    pub reference: RefPoint,
    pub outcome: ColGenOutcome,
    pub lottery: Lottery,
    pub report: SchemeReport,
}

/// Final column generation for `(concept, kind)` given a reference point.
pub fn solve_scheme(
    prep: &Prepared,
    concept: FairnessConcept,
    kind: SchemeKind,
    reference: RefPoint,
    warm: &[ExchangePlan],
    params: &ColGenParams,
    deadline: Instant,
) -> Result<SchemeRun> {
    let spec = prep.spec(concept, MasterGoal::Scheme(kind), reference, params.f2_scale)?;
    let pricer = prep.pricer(params)?;
    let mut pool = prep.seeds.clone();
    merge_columns(&mut pool, warm);
    merge_columns(&mut pool, &params.warm_columns);
    let outcome = column_generation(&prep.instance, &pricer, &spec, &pool, params, deadline)?;
    let lottery = if concept == FairnessConcept::Utilitarian && outcome.objective >= prep.i1 - 1e-6 {
        // the interior point spreads mass over the optimal face; report the vertex
        Lottery::degenerate(&prep.instance, prep.utilitarian.clone(), &prep.pairs)
    } else {
        outcome.lottery(&prep.instance)
    };
    let kind = match spec.goal {
        MasterGoal::Scheme(k) => k,
        _ => SchemeKind::Single,
    };
    let report = build_report(prep, concept, kind, &reference, &outcome, &lottery);
    Ok(SchemeRun {
        concept,
        kind,
        reference,
        outcome,
        lottery,
        report,
    })
}

/// Preprocess, compute the reference point, run column generation and
/// evaluate the resulting lottery.
pub fn run_scheme(
    inst: &Instance,
    caps: Caps,
    concept: FairnessConcept,
    kind: SchemeKind,
    params: &ColGenParams,
) -> Result<SchemeRun> {
    params.validate()?;
    let deadline = Instant::now() + Duration::from_secs_f64(params.time_limit_s);
    let prep = prepare(inst, caps, params.pra_threshold)?;
    let (reference, pool) = compute_reference_point(&prep, concept, params, deadline)?;
    solve_scheme(&prep, concept, kind, reference, &pool, params, deadline)
}

pub fn run_colgen(
    inst: &Instance,
    caps: Caps,
    concept: FairnessConcept,
    kind: SchemeKind,
    params: &ColGenParams,
) -> Result<(Lottery, SchemeReport)> {
    let run = run_scheme(inst, caps, concept, kind, params)?;
    Ok((run.lottery, run.report))
}
