//! Master programs for every fairness concept and scheme, the reference
//! point, and the translation of master duals into pricing weights.
//!
//! Every master shares the column block `delta[k] >= 0` (label `lambda`) and
//! `sum delta = 1` (label `alpha0`). The remaining rows, all written as
//! `lhs - rhs`:
//!
//! ```text
//! alpha1       y1 - sum |V(S)∩P| delta + d1 = 0        (y1 - 1 = 0 for Single)
//! alpha2  IF   y2 + T + d2 = 0
//!         Ari  y2 - sum |V(S)∩P_H| delta + d2 = 0
//!         R/N  y2 - T + d2 = 0
//! alpha3  IF   |P'| z - sum |V(S)∩P| delta = 0
//! beta[v] IF   z_v - sum_{S∋v} delta + z = 0
//!         R/N  z_v - sum_{S∋v} delta = 0
//! gamma[v] R   z_v - T >= 0
//! eta     IF/N sum t_v - T = 0
//! w[v]    IF   (t_v, z_v) ∈ Q^2
//!         N    (z_v, 1, t_v) ∈ K_exp
//! u       NSWP (y1, y2, r) ∈ Q_r^3
//! ```
//!
//! With the dual convention of [`crate::conic`] the implied multiplier of a
//! column is `lambda_S = -alpha0 + sum_{v ∈ V(S)∩P} (alpha1 + ...)`, so the
//! pricing problem receives `alpha0' = -alpha0` and `w[v] = -(alpha1 + ...)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::conic::{Cone, ConicProblem, ConicSolution, Row, Sense};
use crate::enumeration::ExchangePlan;
use crate::error::{Error, Result};
use crate::instance::{Instance, VertexId};
use crate::pricing::PricingWeights;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FairnessConcept {
    /// Individual fairness: minimise the L1 deviation from the mean selection probability.
    IndividualFairness,
    Rawls,
    Aristotle,
    Nash,
    Utilitarian,
}

impl FairnessConcept {
    pub const ALL: [FairnessConcept; 5] = [
        FairnessConcept::IndividualFairness,
        FairnessConcept::Rawls,
        FairnessConcept::Aristotle,
        FairnessConcept::Nash,
        FairnessConcept::Utilitarian,
    ];

    pub const FAIR: [FairnessConcept; 4] = [
        FairnessConcept::IndividualFairness,
        FairnessConcept::Rawls,
        FairnessConcept::Aristotle,
        FairnessConcept::Nash,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            FairnessConcept::IndividualFairness => "if",
            FairnessConcept::Rawls => "rawls",
            FairnessConcept::Aristotle => "aristotle",
            FairnessConcept::Nash => "nash",
            FairnessConcept::Utilitarian => "utilitarian",
        }
    }
}

impl fmt::Display for FairnessConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FairnessConcept {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FairnessConcept::ALL
            .into_iter()
            .find(|c| c.tag() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown fairness concept `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeKind {
    Single,
    /// `None` picks the weights from the reference point when the master is built.
    Swp { lambda: Option<(f64, f64)> },
    Nswp,
}

impl SchemeKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SchemeKind::Single => "single",
            SchemeKind::Swp { .. } => "swp",
            SchemeKind::Nswp => "nswp",
        }
    }

    pub fn swp_default() -> Self {
        SchemeKind::Swp { lambda: None }
    }
}

/// SWP weights `(1/(i1 - d1), 1/(i2 - d2))`, with 1 for an axis whose range
/// is below `1e-5 (1 + |i|)`.
pub fn default_swp_weights(reference: &RefPoint) -> (f64, f64) {
    let (c1, c2) = collapsed_axes(reference);
    let w = |collapsed: bool, hi: f64, lo: f64| if collapsed { 1.0 } else { 1.0 / (hi - lo) };
    (w(c1, reference.i.0, reference.d.0), w(c2, reference.i.1, reference.d.1))
}

/// Axes whose range `i - d` is below `1e-5 (1 + |i|)`. A collapsed axis
/// means the ideal point is attainable up to that range.
pub fn collapsed_axes(reference: &RefPoint) -> (bool, bool) {
    let c = |hi: f64, lo: f64| hi - lo <= 1e-5 * (1.0 + hi.abs());
    (c(reference.i.0, reference.d.0), c(reference.i.1, reference.d.1))
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Reference point `d` and ideal point `i`, as `(f1, f2)` pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RefPoint {
    pub d: (f64, f64),
    pub i: (f64, f64),
}

/// What the master maximises.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MasterGoal {
    Scheme(SchemeKind),
    /// `max y1`, optionally with `f2 >= floor`.
    MaxF1 { f2_floor: Option<f64> },
    /// `max y2`, optionally with `f1 >= floor`.
    MaxF2 { f1_floor: Option<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasterSpec {
    pub concept: FairnessConcept,
    pub goal: MasterGoal,
    pub reference: RefPoint,
    /// Hard-to-match pairs `P_H`.
    pub hard: BTreeSet<VertexId>,
    /// Matchable pairs `P'`.
    pub pairs: Vec<VertexId>,
    /// Multiplies the `y2` definition (fairness expression and `d2`).
    pub f2_scale: f64,
}

impl MasterSpec {
    pub fn new(
        concept: FairnessConcept,
        goal: MasterGoal,
        reference: RefPoint,
        hard: BTreeSet<VertexId>,
        pairs: Vec<VertexId>,
    ) -> Result<Self> {
        let goal = match (concept, goal) {
            (FairnessConcept::Utilitarian, MasterGoal::Scheme(SchemeKind::Single)) => MasterGoal::MaxF1 { f2_floor: None },
            (FairnessConcept::Utilitarian, MasterGoal::Scheme(k)) => {
                return Err(Error::Config(format!("utilitarian is only valid as a single-objective scheme, not {k}")))
            }
            (FairnessConcept::Utilitarian, MasterGoal::MaxF2 { .. }) | (FairnessConcept::Utilitarian, MasterGoal::MaxF1 { f2_floor: Some(_) }) => {
                return Err(Error::Config("utilitarian has no fairness axis".into()))
            }
            (_, MasterGoal::Scheme(SchemeKind::Swp { lambda })) => {
                let lambda = lambda.unwrap_or_else(|| default_swp_weights(&reference));
                if !(lambda.0 > 0.0 && lambda.1 > 0.0) || !lambda.0.is_finite() || !lambda.1.is_finite() {
                    return Err(Error::Config(format!("SWP weights must be positive, got {lambda:?}")));
                }
                MasterGoal::Scheme(SchemeKind::Swp { lambda: Some(lambda) })
            }
            // the product is nearly flat along a collapsed axis; optimise the
            // other axis over the collapsed face instead
            (_, MasterGoal::Scheme(SchemeKind::Nswp)) => match collapsed_axes(&reference) {
                (true, _) => MasterGoal::MaxF2 { f1_floor: Some(reference.d.0) },
                (false, true) => MasterGoal::MaxF1 { f2_floor: Some(reference.d.1) },
                _ => goal,
            },
            (_, g) => g,
        };
        Ok(Self {
            concept,
            goal,
            reference,
            hard,
            pairs,
            f2_scale: 1.0,
        })
    }

    /// Whether the `alpha1` row carries column coefficients.
    pub fn alpha1_has_columns(&self) -> bool {
        self.goal != MasterGoal::Scheme(SchemeKind::Single)
    }

    fn has_f2(&self) -> bool {
        self.concept != FairnessConcept::Utilitarian
    }

    /// Reference point used in the `y` rows (zero for single objectives and probes).
    fn offsets(&self) -> (f64, f64) {
        match self.goal {
            MasterGoal::Scheme(SchemeKind::Nswp) | MasterGoal::Scheme(SchemeKind::Swp { .. }) => self.reference.d,
            _ => (0.0, 0.0),
        }
    }
}

/// A built master plus the variable index of every column.
#[derive(Clone, Debug)]
pub struct Master {
    pub problem: ConicProblem,
    pub columns: Vec<usize>,
}

pub fn delta_name(k: usize) -> String {
    format!("delta[{k}]")
}

fn vlabel(prefix: &str, inst: &Instance, v: VertexId) -> String {
    format!("{prefix}[{}]", inst.name(v))
}

/// Builds the restricted master over `columns`.
pub fn build_master(inst: &Instance, columns: &[ExchangePlan], spec: &MasterSpec) -> Result<Master> {
    if columns.is_empty() {
        return Err(Error::Config("master needs at least one column".into()));
    }
    let concept = spec.concept;
    let pairs = &spec.pairs;
    let pair_set: BTreeSet<VertexId> = pairs.iter().copied().collect();
    let covered: Vec<Vec<VertexId>> = columns.iter().map(ExchangePlan::covered_pairs).collect();

    if concept == FairnessConcept::Nash && spec.has_f2() {
        for &v in pairs {
            if !covered.iter().any(|c| c.contains(&v)) {
                return Err(Error::Coverage(inst.name(v).to_string()));
            }
        }
    }

    let mut p = ConicProblem::new(Sense::Maximize);
    let delta: Vec<usize> = (0..columns.len()).map(|k| p.add_var(delta_name(k))).collect();
    let y1 = p.add_var("y1");
    let (d1, d2) = spec.offsets();
    let c = spec.f2_scale;

    p.add_block(
        "lambda",
        Cone::nonnegative(columns.len()),
        delta.iter().map(|&j| Row::new(vec![(j, 1.0)], 0.0)).collect(),
    );
    p.add_block(
        "alpha0",
        Cone::zero(1),
        vec![Row::new(delta.iter().map(|&j| (j, 1.0)).collect(), -1.0)],
    );
    let alpha1 = if spec.alpha1_has_columns() {
        let mut terms = vec![(y1, 1.0)];
        terms.extend(
            delta
                .iter()
                .zip(&covered)
                .filter(|(_, cv)| !cv.is_empty())
                .map(|(&j, cv)| (j, -(cv.len() as f64))),
        );
        Row::new(terms, d1)
    } else {
        Row::new(vec![(y1, 1.0)], -1.0)
    };
    p.add_block("alpha1", Cone::zero(1), vec![alpha1]);

    let mut y2 = None;
    if spec.has_f2() {
        let y2v = p.add_var("y2");
        y2 = Some(y2v);
        let needs_t = concept != FairnessConcept::Aristotle;
        let t_big = needs_t.then(|| p.add_var("T"));
        let z = (concept == FairnessConcept::IndividualFairness).then(|| p.add_var("z"));
        let z_v: Vec<usize> = if needs_t {
            pairs.iter().map(|&v| p.add_var(vlabel("z", inst, v))).collect()
        } else {
            Vec::new()
        };
        let t_v: Vec<usize> = if matches!(concept, FairnessConcept::IndividualFairness | FairnessConcept::Nash) {
            pairs.iter().map(|&v| p.add_var(vlabel("t", inst, v))).collect()
        } else {
            Vec::new()
        };

        let alpha2 = match concept {
            FairnessConcept::IndividualFairness => Row::new(vec![(y2v, 1.0), (t_big.unwrap(), c)], c * d2),
            FairnessConcept::Aristotle => {
                let mut terms = vec![(y2v, 1.0)];
                for (&j, cv) in delta.iter().zip(&covered) {
                    let h = cv.iter().filter(|v| spec.hard.contains(v)).count();
                    if h > 0 {
                        terms.push((j, -c * h as f64));
                    }
                }
                Row::new(terms, c * d2)
            }
            FairnessConcept::Rawls | FairnessConcept::Nash => Row::new(vec![(y2v, 1.0), (t_big.unwrap(), -c)], c * d2),
            FairnessConcept::Utilitarian => unreachable!(),
        };
        p.add_block("alpha2", Cone::zero(1), vec![alpha2]);

        if let Some(z) = z {
            let mut terms = vec![(z, pairs.len() as f64)];
            terms.extend(
                delta
                    .iter()
                    .zip(&covered)
                    .map(|(&j, cv)| (j, -(cv.iter().filter(|v| pair_set.contains(v)).count() as f64)))
                    .filter(|&(_, a)| a != 0.0),
            );
            p.add_block("alpha3", Cone::zero(1), vec![Row::new(terms, 0.0)]);
        }

        if needs_t {
            for (k, &v) in pairs.iter().enumerate() {
                let mut terms = vec![(z_v[k], 1.0)];
                for (&j, cv) in delta.iter().zip(&covered) {
                    if cv.contains(&v) {
                        terms.push((j, -1.0));
                    }
                }
                if let Some(z) = z {
                    terms.push((z, 1.0));
                }
                p.add_block(vlabel("beta", inst, v), Cone::zero(1), vec![Row::new(terms, 0.0)]);
            }
        }
        if pairs.is_empty() {
            // nothing to be fair about: pin the otherwise free auxiliaries
            let rows: Vec<Row> = t_big.iter().chain(z.iter()).map(|&j| Row::new(vec![(j, 1.0)], 0.0)).collect();
            if !rows.is_empty() {
                let n = rows.len();
                p.add_block("empty", Cone::zero(n), rows);
            }
        }
        if concept == FairnessConcept::Rawls {
            let t_big = t_big.unwrap();
            for (k, &v) in pairs.iter().enumerate() {
                p.add_block(
                    vlabel("gamma", inst, v),
                    Cone::nonnegative(1),
                    vec![Row::new(vec![(z_v[k], 1.0), (t_big, -1.0)], 0.0)],
                );
            }
        }
        if !t_v.is_empty() {
            let mut terms: Vec<(usize, f64)> = t_v.iter().map(|&t| (t, 1.0)).collect();
            terms.push((t_big.unwrap(), -1.0));
            p.add_block("eta", Cone::zero(1), vec![Row::new(terms, 0.0)]);
            for (k, &v) in pairs.iter().enumerate() {
                let (cone, rows) = if concept == FairnessConcept::IndividualFairness {
                    (
                        Cone::soc(2),
                        vec![Row::new(vec![(t_v[k], 1.0)], 0.0), Row::new(vec![(z_v[k], 1.0)], 0.0)],
                    )
                } else {
                    (
                        Cone::exp(),
                        vec![
                            Row::new(vec![(z_v[k], 1.0)], 0.0),
                            Row::new(vec![], 1.0),
                            Row::new(vec![(t_v[k], 1.0)], 0.0),
                        ],
                    )
                };
                p.add_block(vlabel("w", inst, v), cone, rows);
            }
        }
    }

    match spec.goal {
        MasterGoal::Scheme(SchemeKind::Nswp) => {
            let y2 = y2.expect("NSWP needs a fairness axis");
            let r = p.add_var("r");
            p.set_objective(r, 1.0);
            p.add_block(
                "u",
                Cone::rotated_soc(3),
                vec![
                    Row::new(vec![(y1, 1.0)], 0.0),
                    Row::new(vec![(y2, 1.0)], 0.0),
                    Row::new(vec![(r, 1.0)], 0.0),
                ],
            );
        }
        MasterGoal::Scheme(SchemeKind::Swp { lambda }) => {
            let lambda = lambda.expect("weights are resolved in MasterSpec::new");
            p.set_objective(y1, lambda.0);
            p.set_objective(y2.expect("SWP needs a fairness axis"), lambda.1);
        }
        MasterGoal::Scheme(SchemeKind::Single) => {
            p.set_objective(y2.expect("single fairness scheme needs a fairness axis"), 1.0);
        }
        MasterGoal::MaxF1 { f2_floor } => {
            p.set_objective(y1, 1.0);
            if let Some(f) = f2_floor {
                let y2 = y2.expect("f2 floor needs a fairness axis");
                p.add_block("floor", Cone::nonnegative(1), vec![Row::new(vec![(y2, 1.0)], -c * f)]);
            }
        }
        MasterGoal::MaxF2 { f1_floor } => {
            p.set_objective(y2.expect("MaxF2 needs a fairness axis"), 1.0);
            if let Some(f) = f1_floor {
                p.add_block("floor", Cone::nonnegative(1), vec![Row::new(vec![(y1, 1.0)], -f)]);
            }
        }
    }

    Ok(Master { problem: p, columns: delta })
}

/// Pricing weights from the duals of a solved master.
pub fn pricing_weights(inst: &Instance, spec: &MasterSpec, sol: &ConicSolution) -> Result<PricingWeights> {
    let alpha0 = sol.dual1("alpha0")?;
    let alpha1 = if spec.alpha1_has_columns() { sol.dual1("alpha1")? } else { 0.0 };
    let mut w = vec![0.0; inst.len()];
    for v in inst.pairs() {
        w[v] = -alpha1;
    }
    let c = spec.f2_scale;
    match spec.concept {
        FairnessConcept::IndividualFairness => {
            let alpha3 = sol.dual1("alpha3")?;
            for &v in &spec.pairs {
                w[v] -= alpha3 + sol.dual1(&vlabel("beta", inst, v))?;
            }
        }
        FairnessConcept::Rawls | FairnessConcept::Nash => {
            for &v in &spec.pairs {
                w[v] -= sol.dual1(&vlabel("beta", inst, v))?;
            }
        }
        FairnessConcept::Aristotle => {
            let alpha2 = sol.dual1("alpha2")?;
            for &v in &spec.hard {
                w[v] -= c * alpha2;
            }
        }
        FairnessConcept::Utilitarian => {}
    }
    Ok(PricingWeights { alpha0: -alpha0, w })
}

/// Objective values `(f1, f2)` read back from a solved master.
pub fn master_axes(spec: &MasterSpec, sol: &ConicSolution) -> (f64, Option<f64>) {
    let (d1, d2) = spec.offsets();
    let f1 = sol.value("y1").unwrap_or(f64::NAN) + if spec.alpha1_has_columns() { d1 } else { 0.0 };
    let f2 = sol.value("y2").map(|y| y / spec.f2_scale + d2);
    (f1, f2)
}

/// Closed-form Nash reference value `-|P'| ln |P'|`.
pub fn nash_reference(n_pairs: usize) -> f64 {
    if n_pairs == 0 {
        0.0
    } else {
        let n = n_pairs as f64;
        -n * n.ln()
    }
}

/// Relative slack used when a computed optimum becomes a floor constraint.
pub fn floor_slack(value: f64) -> f64 {
    1e-7 * (1.0 + value.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve_conic, ConeKind};
    use crate::enumeration::enumerate_plans;
    use crate::instance::{example_pool, Caps};
    use approx::assert_abs_diff_eq;

    const SPREAD: RefPoint = RefPoint { d: (0.0, 0.0), i: (5.0, 1.0) };

    fn spec(inst: &Instance, concept: FairnessConcept, goal: MasterGoal, reference: RefPoint) -> MasterSpec {
        let hard: BTreeSet<VertexId> = inst.id("v4").into_iter().collect();
        MasterSpec::new(concept, goal, reference, hard, inst.pairs().collect()).unwrap()
    }

    fn two_columns(inst: &Instance) -> Vec<ExchangePlan> {
        vec![
            ExchangePlan::parse("cycle: v1>v2>v3 ; chain: v7>v6>v5", inst, Caps::default()).unwrap(),
            ExchangePlan::parse("cycle: v1>v4 ; chain: v7>v6>v5", inst, Caps::default()).unwrap(),
        ]
    }

    #[test]
    fn concept_tags_round_trip() {
        for c in FairnessConcept::ALL {
            assert_eq!(c.tag().parse::<FairnessConcept>().unwrap(), c);
        }
        assert!("lexmin".parse::<FairnessConcept>().is_err());
    }

    #[test]
    fn utilitarian_rejects_bi_objective_schemes() {
        let inst = example_pool();
        let r = MasterSpec::new(
            FairnessConcept::Utilitarian,
            MasterGoal::Scheme(SchemeKind::Nswp),
            RefPoint::default(),
            BTreeSet::new(),
            inst.pairs().collect(),
        );
        assert!(r.is_err());
        let bad = MasterSpec::new(
            FairnessConcept::Rawls,
            MasterGoal::Scheme(SchemeKind::Swp { lambda: Some((1.0, 0.0)) }),
            RefPoint::default(),
            BTreeSet::new(),
            vec![],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn column_coefficients_reconstruct_plans() {
        let inst = example_pool();
        let cols = two_columns(&inst);
        let s = spec(&inst, FairnessConcept::IndividualFairness, MasterGoal::Scheme(SchemeKind::Nswp), SPREAD);
        let m = build_master(&inst, &cols, &s).unwrap();
        let p = &m.problem;
        let coef = |label: &str, j: usize| -> f64 {
            p.block(label).unwrap().rows[0]
                .terms
                .iter()
                .filter(|t| t.0 == j)
                .map(|t| t.1)
                .sum()
        };
        for (k, plan) in cols.iter().enumerate() {
            let j = m.columns[k];
            assert_eq!(coef("alpha0", j), 1.0);
            assert_eq!(coef("alpha1", j), -(plan.n_transplants() as f64));
            assert_eq!(coef("alpha3", j), -(plan.n_transplants() as f64));
            for v in inst.pairs() {
                let want = if plan.contains(v) { -1.0 } else { 0.0 };
                assert_eq!(coef(&format!("beta[{}]", inst.name(v)), j), want);
            }
        }
    }

    #[test]
    fn block_counts_per_concept() {
        let inst = example_pool();
        let cols = two_columns(&inst);
        let count = |p: &ConicProblem, k: ConeKind| p.blocks.iter().filter(|b| b.cone.kind == k).count();
        let ari = build_master(&inst, &cols, &spec(&inst, FairnessConcept::Aristotle, MasterGoal::Scheme(SchemeKind::Nswp), SPREAD)).unwrap();
        assert_eq!(count(&ari.problem, ConeKind::RotatedSoc), 1);
        assert_eq!(count(&ari.problem, ConeKind::Soc), 0);
        let nash = build_master(&inst, &enumerate_plans(&inst, Caps::default(), None).unwrap(), &spec(&inst, FairnessConcept::Nash, MasterGoal::Scheme(SchemeKind::Single), RefPoint::default())).unwrap();
        assert_eq!(count(&nash.problem, ConeKind::Exp), 6);
        assert_eq!(count(&nash.problem, ConeKind::RotatedSoc), 0);
        let swp = build_master(&inst, &cols, &spec(&inst, FairnessConcept::Rawls, MasterGoal::Scheme(SchemeKind::Swp { lambda: Some((1.0, 2.0)) }), RefPoint::default())).unwrap();
        assert!(swp.problem.block("u").is_none());
        assert_eq!(count(&swp.problem, ConeKind::Nonnegative), 1 + 6);
    }

    #[test]
    fn nash_master_requires_coverage() {
        let inst = example_pool();
        let cols = two_columns(&inst);
        let cols = vec![cols[0].clone()];
        let err = build_master(&inst, &cols, &spec(&inst, FairnessConcept::Nash, MasterGoal::Scheme(SchemeKind::Single), RefPoint::default())).unwrap_err();
        assert!(matches!(err, Error::Coverage(ref v) if v == "v4"));
    }

    #[test]
    fn single_if_with_only_empty_plan() {
        let inst = example_pool();
        let s = spec(&inst, FairnessConcept::IndividualFairness, MasterGoal::Scheme(SchemeKind::Single), RefPoint::default());
        let m = build_master(&inst, &[ExchangePlan::empty()], &s).unwrap();
        let sol = solve_conic(&m.problem, 1e-9).unwrap();
        assert!(sol.is_optimal());
        assert_abs_diff_eq!(sol.value("y2").unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.value("delta[0]").unwrap(), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn single_utilitarian_duals_price_to_zero() {
        let inst = example_pool();
        let s = spec(&inst, FairnessConcept::Utilitarian, MasterGoal::Scheme(SchemeKind::Single), RefPoint::default());
        let cols = two_columns(&inst);
        let m = build_master(&inst, &cols, &s).unwrap();
        let sol = solve_conic(&m.problem, 1e-9).unwrap();
        assert_abs_diff_eq!(sol.objective, 5.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.dual1("alpha1").unwrap(), -1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.dual1("alpha0").unwrap(), -5.0, epsilon = 1e-6);
        let w = pricing_weights(&inst, &s, &sol).unwrap();
        assert_abs_diff_eq!(w.alpha0, 5.0, epsilon = 1e-6);
        assert_abs_diff_eq!(w.zeta(&cols[0]), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(w.zeta(&cols[1]), 1.0, epsilon = 1e-6);
    }

    /// The implied column multiplier `alpha0' - sum w` equals the returned
    /// `lambda_S`, for every concept and scheme.
    #[test]
    fn pricing_weights_match_lambda_duals() {
        let inst = example_pool();
        let cols = enumerate_plans(&inst, Caps::default(), None).unwrap();
        let reference = RefPoint { d: (3.0, -12.0), i: (5.0, 0.0) };
        for concept in FairnessConcept::FAIR {
            let reference = match concept {
                FairnessConcept::IndividualFairness => RefPoint { d: (3.0, -3.0), i: (5.0, 0.0) },
                FairnessConcept::Rawls | FairnessConcept::Aristotle => RefPoint { d: (3.0, 0.0), i: (5.0, 1.0) },
                _ => reference,
            };
            for kind in [SchemeKind::Single, SchemeKind::Swp { lambda: Some((0.5, 2.0)) }, SchemeKind::Nswp] {
                let s = spec(&inst, concept, MasterGoal::Scheme(kind), reference);
                let m = build_master(&inst, &cols, &s).unwrap();
                let sol = solve_conic(&m.problem, 1e-9).unwrap();
                assert!(sol.is_optimal(), "{concept} {kind}: {}", sol.backend_status);
                let w = pricing_weights(&inst, &s, &sol).unwrap();
                let lambda = sol.dual("lambda").unwrap();
                for (k, plan) in cols.iter().enumerate() {
                    assert_abs_diff_eq!(w.zeta(plan), lambda[k], epsilon = 1e-5);
                    assert!(lambda[k] > -1e-7);
                }
            }
        }
    }

    /// Closed-form dual relations on two-column toys.
    #[test]
    fn dual_relations_on_toys() {
        let inst = example_pool();
        let cols = two_columns(&inst);
        let v = |name: &str| inst.id(name).unwrap();
        let reference = RefPoint { d: (4.0, 0.0), i: (5.0, 0.5) };

        // L1: (alpha1, alpha2, 1) + u = 0, (eta, beta_v) + w_v = 0, alpha2 - eta = 0,
        // sum beta_v + |P'| alpha3 = 0
        let s = spec(&inst, FairnessConcept::IndividualFairness, MasterGoal::Scheme(SchemeKind::Nswp), RefPoint { d: (4.0, -3.0), i: (5.0, 0.0) });
        let sol = solve_conic(&build_master(&inst, &cols, &s).unwrap().problem, 1e-9).unwrap();
        let u = sol.dual("u").unwrap();
        assert_abs_diff_eq!(sol.dual1("alpha1").unwrap() + u[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.dual1("alpha2").unwrap() + u[1], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(1.0 + u[2], 0.0, epsilon = 1e-6);
        assert!(Cone::rotated_soc(3).dual_contains(u, 1e-7));
        let eta = sol.dual1("eta").unwrap();
        assert_abs_diff_eq!(sol.dual1("alpha2").unwrap() - eta, 0.0, epsilon = 1e-6);
        let mut sum_beta = 0.0;
        for p in inst.pairs() {
            let beta = sol.dual1(&format!("beta[{}]", inst.name(p))).unwrap();
            let w = sol.dual(&format!("w[{}]", inst.name(p))).unwrap();
            assert_abs_diff_eq!(eta + w[0], 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(beta + w[1], 0.0, epsilon = 1e-6);
            assert!(Cone::soc(2).dual_contains(w, 1e-7));
            sum_beta += beta;
        }
        assert_abs_diff_eq!(sum_beta + 6.0 * sol.dual1("alpha3").unwrap(), 0.0, epsilon = 1e-6);

        // Rawls: beta_v + gamma_v = 0, gamma_v >= 0, -alpha2 - sum gamma = 0
        let s = spec(&inst, FairnessConcept::Rawls, MasterGoal::Scheme(SchemeKind::Nswp), reference);
        let sol = solve_conic(&build_master(&inst, &cols, &s).unwrap().problem, 1e-9).unwrap();
        let mut sum_gamma = 0.0;
        for p in inst.pairs() {
            let beta = sol.dual1(&format!("beta[{}]", inst.name(p))).unwrap();
            let gamma = sol.dual1(&format!("gamma[{}]", inst.name(p))).unwrap();
            assert_abs_diff_eq!(beta + gamma, 0.0, epsilon = 1e-6);
            assert!(gamma > -1e-8);
            sum_gamma += gamma;
        }
        assert_abs_diff_eq!(-sol.dual1("alpha2").unwrap() - sum_gamma, 0.0, epsilon = 1e-6);
        // dual objective -alpha0 + alpha1 d1 + alpha2 d2 equals the primal optimum
        let dual_obj = -sol.dual1("alpha0").unwrap() + sol.dual1("alpha1").unwrap() * 4.0;
        assert_abs_diff_eq!(dual_obj, sol.objective, epsilon = 1e-6);

        // Aristotle: implied lambda_S = -alpha0 + sum (alpha1 + alpha2 [v ∈ P_H])
        let s = spec(&inst, FairnessConcept::Aristotle, MasterGoal::Scheme(SchemeKind::Nswp), RefPoint { d: (4.0, 0.0), i: (5.0, 1.0) });
        let sol = solve_conic(&build_master(&inst, &cols, &s).unwrap().problem, 1e-9).unwrap();
        let (a0, a1, a2) = (sol.dual1("alpha0").unwrap(), sol.dual1("alpha1").unwrap(), sol.dual1("alpha2").unwrap());
        let lambda = sol.dual("lambda").unwrap();
        for (k, plan) in cols.iter().enumerate() {
            let hard = usize::from(plan.contains(v("v4"))) as f64;
            let implied = -a0 + plan.n_transplants() as f64 * a1 + hard * a2;
            assert_abs_diff_eq!(implied, lambda[k], epsilon = 1e-6);
        }

        // Nash: (beta_v, eta) + ((w_v)_1, (w_v)_3) = 0, -alpha2 - eta = 0, w_v ∈ K_exp*
        let s = spec(&inst, FairnessConcept::Nash, MasterGoal::Scheme(SchemeKind::Nswp), RefPoint { d: (4.0, -10.0), i: (5.0, -2.0) });
        let sol = solve_conic(&build_master(&inst, &cols, &s).unwrap().problem, 1e-9).unwrap();
        let eta = sol.dual1("eta").unwrap();
        assert_abs_diff_eq!(-sol.dual1("alpha2").unwrap() - eta, 0.0, epsilon = 1e-6);
        let mut sum_w2 = 0.0;
        for p in inst.pairs() {
            let beta = sol.dual1(&format!("beta[{}]", inst.name(p))).unwrap();
            let w = sol.dual(&format!("w[{}]", inst.name(p))).unwrap();
            assert_abs_diff_eq!(beta + w[0], 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(eta + w[2], 0.0, epsilon = 1e-6);
            assert!(Cone::exp().dual_contains(w, 1e-6), "{w:?}");
            sum_w2 += w[1];
        }
        let dual_obj = -sol.dual1("alpha0").unwrap() + 4.0 * sol.dual1("alpha1").unwrap() - 10.0 * sol.dual1("alpha2").unwrap() + sum_w2;
        assert_abs_diff_eq!(dual_obj, sol.objective, epsilon = 1e-5);
    }

    #[test]
    fn aristotle_weights_follow_hard_set() {
        // alpha1 = 1, alpha2 = 2 in the printed convention; ours negates them.
        let inst = example_pool();
        let s = spec(&inst, FairnessConcept::Aristotle, MasterGoal::Scheme(SchemeKind::Nswp), SPREAD);
        let m = build_master(&inst, &two_columns(&inst), &s).unwrap();
        let mut sol = solve_conic(&m.problem, 1e-8).unwrap();
        sol.duals.insert("alpha0".into(), vec![0.0]);
        sol.duals.insert("alpha1".into(), vec![-1.0]);
        sol.duals.insert("alpha2".into(), vec![-2.0]);
        let w = pricing_weights(&inst, &s, &sol).unwrap();
        assert_eq!(w.w[inst.id("v4").unwrap()], 3.0);
        assert_eq!(w.w[inst.id("v1").unwrap()], 1.0);
        assert_eq!(w.w[inst.id("v7").unwrap()], 0.0);
    }

    #[test]
    fn missing_dual_is_a_wiring_error() {
        let inst = example_pool();
        let s = spec(&inst, FairnessConcept::IndividualFairness, MasterGoal::Scheme(SchemeKind::Nswp), SPREAD);
        let m = build_master(&inst, &two_columns(&inst), &s).unwrap();
        let mut sol = solve_conic(&m.problem, 1e-8).unwrap();
        sol.duals.remove("alpha3");
        assert!(matches!(pricing_weights(&inst, &s, &sol), Err(Error::Wiring(ref l)) if l == "alpha3"));
    }

    #[test]
    fn nash_reference_for_six_pairs() {
        assert_abs_diff_eq!(nash_reference(6), -10.750556815368331, epsilon = 1e-12);
    }

    #[test]
    fn swp_default_weights() {
        let r = RefPoint { d: (4.5, 0.0), i: (5.0, 0.5) };
        assert_eq!(default_swp_weights(&r), (2.0, 2.0));
        let flat = RefPoint { d: (5.0, 0.0), i: (5.0, 0.5) };
        assert_eq!(default_swp_weights(&flat), (1.0, 2.0));
        let inst = example_pool();
        let s = spec(&inst, FairnessConcept::Rawls, MasterGoal::Scheme(SchemeKind::swp_default()), r);
        assert_eq!(s.goal, MasterGoal::Scheme(SchemeKind::Swp { lambda: Some((2.0, 2.0)) }));
    }

    #[test]
    fn nswp_on_a_collapsed_axis_becomes_a_probe() {
        let inst = example_pool();
        let flat1 = RefPoint { d: (5.0, 0.0), i: (5.0, 0.5) };
        let s = spec(&inst, FairnessConcept::Rawls, MasterGoal::Scheme(SchemeKind::Nswp), flat1);
        assert_eq!(s.goal, MasterGoal::MaxF2 { f1_floor: Some(5.0) });
        let flat2 = RefPoint { d: (4.5, 0.5), i: (5.0, 0.5) };
        let s = spec(&inst, FairnessConcept::Rawls, MasterGoal::Scheme(SchemeKind::Nswp), flat2);
        assert_eq!(s.goal, MasterGoal::MaxF1 { f2_floor: Some(0.5) });
        let s = spec(&inst, FairnessConcept::Rawls, MasterGoal::Scheme(SchemeKind::Nswp), SPREAD);
        assert_eq!(s.goal, MasterGoal::Scheme(SchemeKind::Nswp));
    }
}
