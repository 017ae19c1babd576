//! Conic programs in the form `max/min c'x  s.t.  A x + b ∈ K`, where `K` is a
//! product of labelled cone blocks, plus the solver boundary.
//!
//! # Dual convention
//!
//! For `max c'x s.t. A x + b ∈ K` the returned duals `y` satisfy
//!
//! ```text
//! c + A'y = 0,    y ∈ K*,    dual objective = min b'y
//! ```
//!
//! so an equality row written as `lhs - rhs = 0` carries the multiplier that
//! appears in front of `lhs - rhs` in the Lagrangian `c'x + y'(Ax + b)`. For a
//! minimisation the objective is negated internally and the same relation
//! holds with `-c`.
//!
//! # Cones
//!
//! | kind         | membership                                          |
//! |--------------|-----------------------------------------------------|
//! | `Zero`       | `x = 0`                                             |
//! | `Nonnegative`| `x >= 0`                                            |
//! | `Soc`        | `x1 >= ||(x2, ..., xn)||`                           |
//! | `RotatedSoc` | `2 x1 x2 >= x3^2 + ... + xn^2`, `x1, x2 >= 0`      |
//! | `Exp`        | `x1 >= x2 exp(x3 / x2)`, `x2 > 0` (and closure)     |
//! | `DualExp`    | `y1 >= -y3 exp(y2 / y3 - 1)`, `y1 > 0`, `y3 < 0` (closure) |
//!
//! The Clarabel backend has no rotated cone and orders the exponential cone
//! the other way round, so blocks are passed through an invertible linear map
//! `L` before solving and the duals are mapped back with `L'`:
//!
//! * rotated SOC: `((x1 + x2)/√2, (x1 - x2)/√2, x3, ...)` into a plain SOC;
//! * exp: `(x3, x2, x1)`;
//! * dual exp: `(x3 - x2, -x3, x1)` into the primal exp cone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeKind {
    Zero,
    Nonnegative,
    Soc,
    RotatedSoc,
    Exp,
    DualExp,
}

impl ConeKind {
    pub fn cbf_name(self) -> &'static str {
        match self {
            ConeKind::Zero => "L=",
            ConeKind::Nonnegative => "L+",
            ConeKind::Soc => "Q",
            ConeKind::RotatedSoc => "QR",
            ConeKind::Exp => "EXP",
            ConeKind::DualExp => "EXP*",
        }
    }

    fn from_cbf(name: &str) -> Option<Self> {
        Some(match name {
            "L=" => ConeKind::Zero,
            "L+" => ConeKind::Nonnegative,
            "Q" => ConeKind::Soc,
            "QR" => ConeKind::RotatedSoc,
            "EXP" => ConeKind::Exp,
            "EXP*" => ConeKind::DualExp,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cone {
    pub kind: ConeKind,
    pub dim: usize,
}

impl Cone {
    pub fn new(kind: ConeKind, dim: usize) -> Result<Self> {
        let ok = match kind {
            ConeKind::Zero | ConeKind::Nonnegative => dim >= 1,
            ConeKind::Soc => dim >= 2,
            ConeKind::RotatedSoc => dim >= 3,
            ConeKind::Exp | ConeKind::DualExp => dim == 3,
        };
        if ok {
            Ok(Self { kind, dim })
        } else {
            Err(Error::Config(format!("invalid dimension {dim} for cone {kind:?}")))
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(ConeKind::Zero, dim).expect("zero cone dimension")
    }

    pub fn nonnegative(dim: usize) -> Self {
        Self::new(ConeKind::Nonnegative, dim).expect("nonnegative cone dimension")
    }

    pub fn soc(dim: usize) -> Self {
        Self::new(ConeKind::Soc, dim).expect("second-order cone dimension")
    }

    pub fn rotated_soc(dim: usize) -> Self {
        Self::new(ConeKind::RotatedSoc, dim).expect("rotated cone dimension")
    }

    pub fn exp() -> Self {
        Self { kind: ConeKind::Exp, dim: 3 }
    }

    pub fn dual_exp() -> Self {
        Self { kind: ConeKind::DualExp, dim: 3 }
    }

    /// Membership test with absolute slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match self.kind {
            ConeKind::Zero => x.iter().all(|v| v.abs() <= tol),
            ConeKind::Nonnegative => x.iter().all(|&v| v >= -tol),
            ConeKind::Soc => x[0] + tol >= norm(&x[1..]),
            ConeKind::RotatedSoc => {
                let rest: f64 = x[2..].iter().map(|v| v * v).sum();
                x[0] >= -tol && x[1] >= -tol && 2.0 * x[0].max(0.0) * x[1].max(0.0) + tol >= rest
            }
            ConeKind::Exp => exp_contains(x[0], x[1], x[2], tol),
            ConeKind::DualExp => dual_exp_contains(x[0], x[1], x[2], tol),
        }
    }

    /// The dual cone (all supported cones except `Zero` and the exponential
    /// pair are self-dual).
    pub fn dual(&self) -> Cone {
        let kind = match self.kind {
            ConeKind::Zero => return Cone { kind: ConeKind::Zero, dim: self.dim },
            ConeKind::Exp => ConeKind::DualExp,
            ConeKind::DualExp => ConeKind::Exp,
            k => k,
        };
        Cone { kind, dim: self.dim }
    }

    /// Membership of `y` in the dual cone (`Zero`'s dual is the whole space).
    pub fn dual_contains(&self, y: &[f64], tol: f64) -> bool {
        match self.kind {
            ConeKind::Zero => true,
            _ => self.dual().contains(y, tol),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn exp_contains(x1: f64, x2: f64, x3: f64, tol: f64) -> bool {
    if x2 > tol {
        x1 + tol >= x2 * (x3 / x2).exp()
    } else {
        x2 >= -tol && x1 >= -tol && x3 <= tol
    }
}

fn dual_exp_contains(y1: f64, y2: f64, y3: f64, tol: f64) -> bool {
    if y3 < -tol {
        y1 + tol >= -y3 * (y2 / y3 - 1.0).exp()
    } else {
        y3 <= tol && y1 >= -tol && y2 >= -tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// One row `terms · x + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Row {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        Self { terms, constant }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>() + self.constant
    }

    fn combine(parts: &[(f64, &Row)]) -> Row {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut constant = 0.0;
        for &(k, row) in parts {
            if k == 0.0 {
                continue;
            }
            for &(j, a) in &row.terms {
                *acc.entry(j).or_insert(0.0) += k * a;
            }
            constant += k * row.constant;
        }
        Row {
            terms: acc.into_iter().filter(|&(_, a)| a != 0.0).collect(),
            constant,
        }
    }
}

/// A labelled constraint block `rows ∈ cone`.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub label: String,
    pub cone: Cone,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub names: Vec<String>,
    pub blocks: Vec<Block>,
    index: BTreeMap<String, usize>,
}

impl Default for ConicProblem {
    fn default() -> Self {
        Self::new(Sense::Maximize)
    }
}

impl ConicProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            objective: Vec::new(),
            names: Vec::new(),
            blocks: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    /// Registers a variable; names must be unique.
    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        assert!(!self.index.contains_key(&name), "duplicate variable {name}");
        let j = self.names.len();
        self.index.insert(name.clone(), j);
        self.names.push(name);
        self.objective.push(0.0);
        j
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn add_block(&mut self, label: impl Into<String>, cone: Cone, rows: Vec<Row>) {
        assert_eq!(cone.dim, rows.len(), "block dimension mismatch");
        self.blocks.push(Block {
            label: label.into(),
            cone,
            rows,
        });
    }

    pub fn block(&self, label: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.label == label)
    }

    pub fn remove_block(&mut self, label: &str) -> Option<Block> {
        let k = self.blocks.iter().position(|b| b.label == label)?;
        Some(self.blocks.remove(k))
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.objective.len() != n {
            return Err(Error::Config("objective length differs from variable count".into()));
        }
        for b in &self.blocks {
            Cone::new(b.cone.kind, b.cone.dim)?;
            if b.rows.len() != b.cone.dim {
                return Err(Error::Config(format!("block {} has {} rows for dim {}", b.label, b.rows.len(), b.cone.dim)));
            }
            for r in &b.rows {
                if let Some(&(j, _)) = r.terms.iter().find(|&&(j, _)| j >= n) {
                    return Err(Error::Config(format!("block {} references unregistered column {j}", b.label)));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Independent residual check of a primal/dual pair.
    pub fn residuals(&self, x: &[f64], duals: &BTreeMap<String, Vec<f64>>) -> Residuals {
        let mut primal: f64 = 0.0;
        let mut dual_cone: f64 = 0.0;
        let mut grad = self.objective.clone();
        if self.sense == Sense::Minimize {
            grad.iter_mut().for_each(|c| *c = -*c);
        }
        let mut b_y = 0.0;
        for b in &self.blocks {
            let s: Vec<f64> = b.rows.iter().map(|r| r.eval(x)).collect();
            primal = primal.max(cone_violation(&b.cone, &s, false));
            if let Some(y) = duals.get(&b.label) {
                dual_cone = dual_cone.max(cone_violation(&b.cone, y, true));
                for (r, &yi) in b.rows.iter().zip(y) {
                    for &(j, a) in &r.terms {
                        grad[j] += a * yi;
                    }
                    b_y += r.constant * yi;
                }
            }
        }
        let stationarity = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let mut obj = self.objective_value(x);
        if self.sense == Sense::Minimize {
            obj = -obj;
        }
        Residuals {
            primal,
            dual_cone,
            stationarity,
            gap: (obj - b_y).abs(),
        }
    }
}

/// Smallest slack needed for membership, found by bisection on `tol`.
fn cone_violation(cone: &Cone, v: &[f64], dual: bool) -> f64 {
    let test = |t: f64| if dual { cone.dual_contains(v, t) } else { cone.contains(v, t) };
    if test(0.0) {
        return 0.0;
    }
    let mut hi = 1e-12;
    while !test(hi) {
        hi *= 10.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 10.0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if test(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// Largest cone violation of `A x + b`.
    pub primal: f64,
    /// Largest dual-cone violation of `y`.
    pub dual_cone: f64,
    /// `|| c + A'y ||_inf`.
    pub stationarity: f64,
    /// `|c'x - b'y|`, equal to the complementarity `|y's|` when stationarity holds.
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalLimit,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    names: BTreeMap<String, usize>,
    /// Dual vector per block label, in the original (unlowered) coordinates.
    pub duals: BTreeMap<String, Vec<f64>>,
    pub residuals: Residuals,
    pub backend_status: String,
    pub iterations: u32,
    pub seconds: f64,
}

impl ConicSolution {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names.get(name).map(|&j| self.x[j])
    }

    pub fn dual(&self, label: &str) -> Option<&[f64]> {
        self.duals.get(label).map(Vec::as_slice)
    }

    /// Single-entry dual, or a wiring error if the block is missing.
    pub fn dual1(&self, label: &str) -> Result<f64> {
        self.dual(label)
            .and_then(|d| d.first().copied())
            .ok_or_else(|| Error::Wiring(label.to_string()))
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub time_limit: Option<f64>,
    pub max_iter: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            time_limit: None,
            max_iter: 500,
        }
    }
}

/// Anything able to solve a [`ConicProblem`] over the six supported cones.
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution>;
}

/// Interior-point backend built on Clarabel.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClarabelBackend {
    pub verbose: bool,
}

/// Linear map applied to a block before it reaches Clarabel, as a dense
/// `dim x dim` matrix (row-major), or `None` for the identity.
fn lowering(cone: &Cone) -> (SupportedConeT<f64>, Option<Vec<Vec<f64>>>) {
    let d = cone.dim;
    match cone.kind {
        ConeKind::Zero => (SupportedConeT::ZeroConeT(d), None),
        ConeKind::Nonnegative => (SupportedConeT::NonnegativeConeT(d), None),
        ConeKind::Soc => (SupportedConeT::SecondOrderConeT(d), None),
        ConeKind::RotatedSoc => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut l = vec![vec![0.0; d]; d];
            l[0][0] = h;
            l[0][1] = h;
            l[1][0] = h;
            l[1][1] = -h;
            for (i, row) in l.iter_mut().enumerate().skip(2) {
                row[i] = 1.0;
            }
            (SupportedConeT::SecondOrderConeT(d), Some(l))
        }
        ConeKind::Exp => (
            SupportedConeT::ExponentialConeT(),
            Some(vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]),
        ),
        ConeKind::DualExp => (
            SupportedConeT::ExponentialConeT(),
            Some(vec![vec![0.0, -1.0, 1.0], vec![0.0, 0.0, -1.0], vec![1.0, 0.0, 0.0]]),
        ),
    }
}

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
        problem.validate()?;
        let start = Instant::now();
        let n = problem.n_vars();
        let sign = if problem.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let q: Vec<f64> = problem.objective.iter().map(|c| sign * c).collect();

        let (mut ri, mut ci, mut vals, mut b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut cones = Vec::with_capacity(problem.blocks.len());
        let mut maps = Vec::with_capacity(problem.blocks.len());
        for block in &problem.blocks {
            let (cone, map) = lowering(&block.cone);
            let lowered: Vec<Row> = match &map {
                None => block.rows.clone(),
                Some(l) => l
                    .iter()
                    .map(|coef| {
                        let parts: Vec<(f64, &Row)> = coef.iter().copied().zip(&block.rows).collect();
                        Row::combine(&parts)
                    })
                    .collect(),
            };
            for row in lowered {
                let i = b.len();
                for (j, a) in row.terms {
                    ri.push(i);
                    ci.push(j);
                    vals.push(-a);
                }
                b.push(row.constant);
            }
            cones.push(cone);
            maps.push(map);
        }
        let m = b.len();
        let a = CscMatrix::new_from_triplets(m, n, ri, ci, vals);
        let p = CscMatrix::zeros((n, n));

        if n == 0 && m == 0 {
            return Ok(ConicSolution {
                status: SolveStatus::Optimal,
                objective: 0.0,
                x: Vec::new(),
                names: BTreeMap::new(),
                duals: BTreeMap::new(),
                residuals: Residuals::default(),
                backend_status: "Solved".into(),
                iterations: 0,
                seconds: 0.0,
            });
        }

        // default settings first, then shorter steps, then no equilibration
        let mut out = None;
        for variant in 0..3 {
            let mut builder = DefaultSettingsBuilder::default();
            builder
                .verbose(self.verbose)
                .tol_gap_abs(settings.tol)
                .tol_gap_rel(settings.tol)
                .tol_feas(settings.tol)
                .max_iter(settings.max_iter)
                .presolve_enable(false);
            match variant {
                1 => {
                    builder.max_step_fraction(0.9);
                }
                2 => {
                    builder.equilibrate_enable(false);
                }
                _ => {}
            }
            if let Some(t) = settings.time_limit {
                let left = t - start.elapsed().as_secs_f64();
                if variant > 0 && left <= 0.0 {
                    break;
                }
                builder.time_limit(left.max(1e-3));
            }
            let clarabel_settings = builder.build().map_err(|e| Error::Solver(e.to_string()))?;
            let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, clarabel_settings)
                .map_err(|e| Error::Solver(format!("{e:?}")))?;
            solver.solve();
            let sol = self.extract(problem, &maps, &solver.solution, start);
            let done = sol.status != SolveStatus::NumericalLimit
                || matches!(solver.solution.status, SolverStatus::MaxTime);
            out = Some(sol);
            if done {
                break;
            }
            log::debug!("clarabel variant {variant} ended with {:?}; retrying", solver.solution.status);
        }
        Ok(out.expect("at least one attempt"))
    }
}

impl ClarabelBackend {
    fn extract(
        &self,
        problem: &ConicProblem,
        maps: &[Option<Vec<Vec<f64>>>],
        sol: &clarabel::solver::DefaultSolution<f64>,
        start: Instant,
    ) -> ConicSolution {
        let mut duals = BTreeMap::new();
        let mut offset = 0;
        for (block, map) in problem.blocks.iter().zip(maps) {
            let d = block.cone.dim;
            let z = &sol.z[offset..offset + d];
            let y = match map {
                None => z.to_vec(),
                Some(l) => (0..d).map(|j| (0..d).map(|i| l[i][j] * z[i]).sum()).collect(),
            };
            duals.insert(block.label.clone(), y);
            offset += d;
        }
        let x = sol.x.clone();
        let residuals = problem.residuals(&x, &duals);
        let objective = problem.objective_value(&x);

        let status = match sol.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => {
                let scale = 1.0 + objective.abs();
                let loose = 1e-6 * scale;
                if residuals.gap <= loose && residuals.primal <= loose && residuals.stationarity <= loose {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::NumericalLimit
                }
            }
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
            _ => SolveStatus::NumericalLimit,
        };
        ConicSolution {
            status,
            objective,
            x,
            names: problem.index.clone(),
            duals,
            residuals,
            backend_status: format!("{:?}", sol.status),
            iterations: sol.iterations,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Simplex backend built on HiGHS, for problems whose blocks are all zero,
/// nonnegative or 2-dimensional second-order cones.
#[derive(Clone, Copy, Debug, Default)]
pub struct HighsLpBackend;

impl HighsLpBackend {
    pub fn accepts(problem: &ConicProblem) -> bool {
        problem.blocks.iter().all(|b| match b.cone.kind {
            ConeKind::Zero | ConeKind::Nonnegative => true,
            ConeKind::Soc => b.cone.dim == 2,
            _ => false,
        })
    }
}

impl ConicBackend for HighsLpBackend {
    fn name(&self) -> &'static str {
        "highs-lp"
    }

    fn solve(&self, problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
        problem.validate()?;
        if !Self::accepts(problem) {
            return Err(Error::Config("problem has non-polyhedral cones".into()));
        }
        let start = Instant::now();
        let mut pb = highs::RowProblem::default();
        let cols: Vec<_> = problem.objective.iter().map(|&c| pb.add_column::<f64, _>(c, ..)).collect();
        let factors = |row: &Row| -> Vec<(highs::Col, f64)> { row.terms.iter().map(|&(j, a)| (cols[j], a)).collect() };
        for block in &problem.blocks {
            match block.cone.kind {
                ConeKind::Zero => {
                    for r in &block.rows {
                        pb.add_row(-r.constant..=-r.constant, factors(r));
                    }
                }
                ConeKind::Nonnegative => {
                    for r in &block.rows {
                        pb.add_row(-r.constant.., factors(r));
                    }
                }
                _ => {
                    // t >= |z| as t - z >= 0 and t + z >= 0
                    let (t, z) = (&block.rows[0], &block.rows[1]);
                    let minus = Row::combine(&[(1.0, t), (-1.0, z)]);
                    let plus = Row::combine(&[(1.0, t), (1.0, z)]);
                    pb.add_row(-minus.constant.., factors(&minus));
                    pb.add_row(-plus.constant.., factors(&plus));
                }
            }
        }
        let sense = match problem.sense {
            Sense::Maximize => highs::Sense::Maximise,
            Sense::Minimize => highs::Sense::Minimise,
        };
        let mut model = pb.optimise(sense);
        model.make_quiet();
        model.set_option("threads", 1);
        model.set_option("solver", "simplex");
        let feas = settings.tol.clamp(1e-10, 1e-7);
        model.set_option("primal_feasibility_tolerance", feas);
        model.set_option("dual_feasibility_tolerance", feas);
        if let Some(t) = settings.time_limit {
            model.set_option("time_limit", t.max(1e-3));
        }
        let solved = model.solve();
        let model_status = solved.status();
        let status = match model_status {
            highs::HighsModelStatus::Optimal => SolveStatus::Optimal,
            highs::HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            highs::HighsModelStatus::Unbounded => SolveStatus::Unbounded,
            _ => SolveStatus::NumericalLimit,
        };
        let solution = solved.get_solution();
        let x = solution.columns().to_vec();
        // HiGHS reports c = A'pi; our convention is c + A'y = 0 for max
        let flip = if problem.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let pi: Vec<f64> = solution.dual_rows().iter().map(|v| flip * v).collect();
        let mut duals = BTreeMap::new();
        let mut k = 0;
        for block in &problem.blocks {
            let y = match block.cone.kind {
                ConeKind::Soc => {
                    let (m1, m2) = (pi[k].max(0.0), pi[k + 1].max(0.0));
                    k += 2;
                    vec![m1 + m2, m2 - m1]
                }
                ConeKind::Nonnegative => {
                    let y = pi[k..k + block.cone.dim].iter().map(|v| v.max(0.0)).collect();
                    k += block.cone.dim;
                    y
                }
                _ => {
                    let y = pi[k..k + block.cone.dim].to_vec();
                    k += block.cone.dim;
                    y
                }
            };
            duals.insert(block.label.clone(), y);
        }
        let residuals = problem.residuals(&x, &duals);
        let objective = problem.objective_value(&x);
        Ok(ConicSolution {
            status,
            objective,
            x,
            names: problem.index.clone(),
            duals,
            residuals,
            backend_status: format!("{model_status:?}"),
            iterations: 0,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

/// HiGHS simplex for polyhedral problems, Clarabel otherwise or when the
/// simplex run does not end cleanly.
#[derive(Clone, Copy, Debug, Default)]
pub struct AutoBackend {
    pub clarabel: ClarabelBackend,
}

impl ConicBackend for AutoBackend {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn solve(&self, problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
        if HighsLpBackend::accepts(problem) {
            let sol = HighsLpBackend.solve(problem, settings)?;
            if sol.status != SolveStatus::NumericalLimit {
                return Ok(sol);
            }
            log::debug!("simplex ended with {}; falling back to clarabel", sol.backend_status);
        }
        self.clarabel.solve(problem, settings)
    }
}

/// Solves with the reference backend at tolerance `tol`.
pub fn solve_conic(p: &ConicProblem, tol: f64) -> Result<ConicSolution> {
    ClarabelBackend::default().solve(
        p,
        &SolverSettings {
            tol,
            ..SolverSettings::default()
        },
    )
}

// ---------------------------------------------------------------------------
// Conic Benchmark Format

/// Conic Benchmark Format (version 3) text. Variable names and block labels
/// travel in `#` comment lines so that [`import_problem`] restores them.
pub fn export_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    out.push_str("VER\n3\n\n");
    let _ = writeln!(
        out,
        "OBJSENSE\n{}\n",
        if p.sense == Sense::Maximize { "MAX" } else { "MIN" }
    );
    if p.n_vars() == 0 && p.blocks.is_empty() {
        return out;
    }
    for (j, name) in p.names.iter().enumerate() {
        let _ = writeln!(out, "# var {j} {name}");
    }
    let _ = writeln!(out, "VAR\n{} {}", p.n_vars(), usize::from(p.n_vars() > 0));
    if p.n_vars() > 0 {
        let _ = writeln!(out, "F {}", p.n_vars());
    }
    out.push('\n');

    for (k, b) in p.blocks.iter().enumerate() {
        let _ = writeln!(out, "# block {k} {}", b.label);
    }
    let _ = writeln!(out, "CON\n{} {}", p.n_rows(), p.blocks.len());
    for b in &p.blocks {
        let _ = writeln!(out, "{} {}", b.cone.kind.cbf_name(), b.cone.dim);
    }
    out.push('\n');

    let obj: Vec<(usize, f64)> = p
        .objective
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, c)| c != 0.0)
        .collect();
    if !obj.is_empty() {
        let _ = writeln!(out, "OBJACOORD\n{}", obj.len());
        for (j, c) in obj {
            let _ = writeln!(out, "{j} {c}");
        }
        out.push('\n');
    }

    let mut acoord = Vec::new();
    let mut bcoord = Vec::new();
    let mut i = 0;
    for b in &p.blocks {
        for r in &b.rows {
            for &(j, a) in &r.terms {
                if a != 0.0 {
                    acoord.push((i, j, a));
                }
            }
            if r.constant != 0.0 {
                bcoord.push((i, r.constant));
            }
            i += 1;
        }
    }
    if !acoord.is_empty() {
        let _ = writeln!(out, "ACOORD\n{}", acoord.len());
        for (i, j, a) in acoord {
            let _ = writeln!(out, "{i} {j} {a}");
        }
        out.push('\n');
    }
    if !bcoord.is_empty() {
        let _ = writeln!(out, "BCOORD\n{}", bcoord.len());
        for (i, c) in bcoord {
            let _ = writeln!(out, "{i} {c}");
        }
        out.push('\n');
    }
    out
}

/// Parses text produced by [`export_problem`] (or any CBF file restricted to
/// free variables and the six supported cones).
pub fn import_problem(text: &str) -> Result<ConicProblem> {
    let mut var_names: BTreeMap<usize, String> = BTreeMap::new();
    let mut block_labels: BTreeMap<usize, String> = BTreeMap::new();
    let mut lines = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let parts: Vec<&str> = comment.trim().splitn(3, ' ').collect();
            if parts.len() == 3 {
                if let Ok(k) = parts[1].parse::<usize>() {
                    match parts[0] {
                        "var" => {
                            var_names.insert(k, parts[2].to_string());
                        }
                        "block" => {
                            block_labels.insert(k, parts[2].to_string());
                        }
                        _ => {}
                    }
                }
            }
            continue;
        }
        if !line.is_empty() {
            lines.push((no + 1, line));
        }
    }

    let err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let mut it = lines.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| err(0, &format!("unexpected end of input, expected {what}")));
    fn nums<T: std::str::FromStr>(line: usize, s: &str) -> Result<Vec<T>> {
        s.split_whitespace()
            .map(|t| {
                t.parse::<T>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number `{t}`"),
                })
            })
            .collect()
    }

    let mut sense = Sense::Minimize;
    let mut n_vars = 0;
    let mut cones: Vec<Cone> = Vec::new();
    let mut objective: BTreeMap<usize, f64> = BTreeMap::new();
    let mut acoord: Vec<(usize, usize, f64)> = Vec::new();
    let mut bcoord: BTreeMap<usize, f64> = BTreeMap::new();

    while let Ok((no, key)) = next("section") {
        match key {
            "VER" => {
                let (no, v) = next("version")?;
                if v != "3" {
                    return Err(err(no, "only version 3 is supported"));
                }
            }
            "OBJSENSE" => {
                let (no, v) = next("sense")?;
                sense = match v {
                    "MAX" => Sense::Maximize,
                    "MIN" => Sense::Minimize,
                    _ => return Err(err(no, "sense must be MAX or MIN")),
                };
            }
            "VAR" => {
                let (no, v) = next("VAR header")?;
                let h: Vec<usize> = nums(no, v)?;
                if h.len() != 2 {
                    return Err(err(no, "VAR header needs two integers"));
                }
                n_vars = h[0];
                for _ in 0..h[1] {
                    let (no, v) = next("variable cone")?;
                    if !v.starts_with("F ") {
                        return Err(err(no, "only free variables are supported"));
                    }
                }
            }
            "CON" => {
                let (no, v) = next("CON header")?;
                let h: Vec<usize> = nums(no, v)?;
                if h.len() != 2 {
                    return Err(err(no, "CON header needs two integers"));
                }
                for _ in 0..h[1] {
                    let (no, v) = next("cone")?;
                    let mut parts = v.split_whitespace();
                    let kind = parts
                        .next()
                        .and_then(ConeKind::from_cbf)
                        .ok_or_else(|| err(no, "unsupported cone"))?;
                    let dim: usize = parts
                        .next()
                        .and_then(|d| d.parse().ok())
                        .ok_or_else(|| err(no, "bad cone dimension"))?;
                    cones.push(Cone::new(kind, dim)?);
                }
                if cones.iter().map(|c| c.dim).sum::<usize>() != h[0] {
                    return Err(err(no, "cone dimensions do not add up to the row count"));
                }
            }
            "OBJACOORD" | "BCOORD" => {
                let (no, v) = next("entry count")?;
                let count: usize = v.parse().map_err(|_| err(no, "bad entry count"))?;
                for _ in 0..count {
                    let (no, v) = next("entry")?;
                    let mut parts = v.split_whitespace();
                    let idx: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(no, "bad index"))?;
                    let val: f64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(no, "bad value"))?;
                    if key == "OBJACOORD" {
                        objective.insert(idx, val);
                    } else {
                        bcoord.insert(idx, val);
                    }
                }
            }
            "ACOORD" => {
                let (no, v) = next("entry count")?;
                let count: usize = v.parse().map_err(|_| err(no, "bad entry count"))?;
                for _ in 0..count {
                    let (no, v) = next("entry")?;
                    let mut parts = v.split_whitespace();
                    let i: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(no, "bad row"))?;
                    let j: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(no, "bad column"))?;
                    let a: f64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(no, "bad value"))?;
                    acoord.push((i, j, a));
                }
            }
            "OBJBCOORD" => {
                let (no, v) = next("objective constant")?;
                let c: f64 = v.parse().map_err(|_| err(no, "bad constant"))?;
                if c != 0.0 {
                    return Err(err(no, "objective constants are not supported"));
                }
            }
            _ => return Err(err(no, &format!("unsupported section {key}"))),
        }
    }

    let mut p = ConicProblem::new(sense);
    for j in 0..n_vars {
        p.add_var(var_names.remove(&j).unwrap_or_else(|| format!("x{j}")));
    }
    for (j, c) in objective {
        if j >= n_vars {
            return Err(err(0, "objective index out of range"));
        }
        p.objective[j] = c;
    }
    let n_rows: usize = cones.iter().map(|c| c.dim).sum();
    let mut rows: Vec<Row> = vec![Row::default(); n_rows];
    for (i, j, a) in acoord {
        if i >= n_rows || j >= n_vars {
            return Err(err(0, "coefficient index out of range"));
        }
        rows[i].terms.push((j, a));
    }
    for (i, c) in bcoord {
        if i >= n_rows {
            return Err(err(0, "constant index out of range"));
        }
        rows[i].constant = c;
    }
    let mut rows = rows.into_iter();
    for (k, cone) in cones.into_iter().enumerate() {
        let block_rows: Vec<Row> = rows.by_ref().take(cone.dim).collect();
        let label = block_labels.remove(&k).unwrap_or_else(|| format!("block{k}"));
        p.add_block(label, cone, block_rows);
    }
    Ok(p)
}
