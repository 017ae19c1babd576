//! Evaluation of lotteries and the per-run report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::colgen::{ColGenOutcome, Lottery, Prepared};
use crate::error::{Error, Result};
use crate::instance::VertexId;
use crate::schemes::{FairnessConcept, MasterGoal, MasterSpec, RefPoint, SchemeKind};

/// Price of fairness: relative loss of expected transplants against `u_star`.
pub fn pof(lottery: &Lottery, u_star: f64) -> Result<f64> {
    if u_star == 0.0 {
        return Err(Error::UndefinedPof);
    }
    Ok((u_star - lottery.expected_transplants()) / u_star)
}

/// Value of `concept` on the selection probabilities of `lottery`.
///
/// Larger is fairer for every concept. Nash returns `-inf` when some pair has
/// probability zero.
pub fn fairness_value(concept: FairnessConcept, lottery: &Lottery, hard: &[VertexId], pairs: &[VertexId]) -> f64 {
    let deltas: Vec<f64> = pairs.iter().map(|&v| lottery.delta(v)).collect();
    match concept {
        FairnessConcept::IndividualFairness => {
            if deltas.is_empty() {
                return 0.0;
            }
            let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
            -deltas.iter().map(|d| (d - mean).abs()).sum::<f64>()
        }
        FairnessConcept::Rawls => {
            if deltas.is_empty() {
                0.0
            } else {
                deltas.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
        FairnessConcept::Aristotle => hard.iter().map(|&v| lottery.delta(v)).sum(),
        FairnessConcept::Nash => {
            if deltas.iter().any(|&d| d <= 0.0) {
                f64::NEG_INFINITY
            } else {
                deltas.iter().map(|d| d.ln()).sum()
            }
        }
        FairnessConcept::Utilitarian => lottery.expected_transplants(),
    }
}

/// Master objective of `lottery`, evaluated from its marginals rather than
/// read off a solver. Negative axes count as zero in the NSWP area.
pub fn lottery_objective(spec: &MasterSpec, lottery: &Lottery) -> f64 {
    let hard: Vec<VertexId> = spec.hard.iter().copied().collect();
    let f1 = lottery.expected_transplants();
    let f2 = || fairness_value(spec.concept, lottery, &hard, &spec.pairs);
    let (d1, d2) = spec.reference.d;
    let y2 = || spec.f2_scale * (f2() - d2);
    match spec.goal {
        MasterGoal::Scheme(SchemeKind::Nswp) => (2.0 * (f1 - d1).max(0.0) * y2().max(0.0)).sqrt(),
        MasterGoal::Scheme(SchemeKind::Swp { lambda }) => {
            let (l1, l2) = lambda.unwrap_or((1.0, 1.0));
            l1 * (f1 - d1) + l2 * y2()
        }
        MasterGoal::Scheme(SchemeKind::Single) => spec.f2_scale * f2(),
        MasterGoal::MaxF1 { .. } => f1,
        MasterGoal::MaxF2 { .. } => spec.f2_scale * f2(),
    }
}

/// Smallest number of transplants among support plans, relative to `u_star`.
pub fn min_support_fraction(lottery: &Lottery, u_star: f64) -> Result<f64> {
    if u_star == 0.0 {
        return Err(Error::UndefinedPof);
    }
    let min = lottery
        .support()
        .map(|(p, _)| p.n_transplants())
        .min()
        .ok_or_else(|| Error::Config("empty lottery".into()))?;
    Ok(min as f64 / u_star)
}

/// Euclidean distances of `sol` to the ideal and reference points, both
/// divided by the ideal-reference distance.
pub fn relative_distances(sol: (f64, f64), ideal: (f64, f64), reference: (f64, f64)) -> Result<(f64, f64)> {
    let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    let scale = dist(ideal, reference);
    if !(scale > 1e-12) || !scale.is_finite() {
        return Err(Error::DegenerateFront);
    }
    Ok((dist(sol, ideal) / scale, dist(sol, reference) / scale))
}

/// Mean and sample standard deviation over the finite values.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64, usize)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return None;
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let var = if finite.len() > 1 {
        finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt(), finite.len()))
}

/// One solved `(instance, concept, kind)` run.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeReport {
    pub instance: String,
    pub n_pairs: usize,
    pub ndd_percent: f64,
    pub concept: FairnessConcept,
    pub kind: SchemeKind,
    /// Expected transplants of the lottery.
    pub f1: f64,
    /// Fairness value of the lottery; absent for utilitarian runs.
    pub f2: Option<f64>,
    /// `(f1 - d1)(f2 - d2)`.
    pub area: Option<f64>,
    pub pof: Option<f64>,
    pub dist_ideal: Option<f64>,
    pub dist_ref: Option<f64>,
    pub support_size: usize,
    pub min_support_fraction: Option<f64>,
    pub reference: RefPoint,
    /// Master variables `y1`, `y2`, `r` when present.
    pub master_y1: Option<f64>,
    pub master_y2: Option<f64>,
    pub master_r: Option<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub zeta_trace: Vec<f64>,
    pub final_zeta: f64,
    pub converged: bool,
    pub seconds: f64,
    pub oracle_gap: Option<f64>,
    pub removed: Vec<String>,
    /// `delta_v` per pair name.
    pub delta: Vec<(String, f64)>,
    /// `(probability, serialized plan)`.
    pub support: Vec<(f64, String)>,
}

pub const CSV_HEADER: &str =
    "instance,pairs,ndd_percent,concept,kind,f1,f2,pof,min_support_fraction,support_size,dist_ideal,dist_ref,iters,seconds,converged";

pub fn build_report(
    prep: &Prepared,
    concept: FairnessConcept,
    kind: SchemeKind,
    reference: &RefPoint,
    outcome: &ColGenOutcome,
    lottery: &Lottery,
) -> SchemeReport {
    let inst = &prep.instance;
    let hard: Vec<VertexId> = prep.hard.iter().copied().collect();
    let f1 = lottery.expected_transplants();
    let f2 = (concept != FairnessConcept::Utilitarian).then(|| fairness_value(concept, lottery, &hard, &prep.pairs));
    let area = f2.map(|f2| (f1 - reference.d.0) * (f2 - reference.d.1));
    let (dist_ideal, dist_ref) = match f2 {
        Some(f2) if f2.is_finite() => match relative_distances((f1, f2), reference.i, reference.d) {
            Ok((a, b)) => (Some(a), Some(b)),
            Err(_) => (None, None),
        },
        _ => (None, None),
    };
    let total = prep.original_pairs + prep.original_ndds;
    SchemeReport {
        instance: String::new(),
        n_pairs: prep.original_pairs,
        ndd_percent: if total == 0 { 0.0 } else { 100.0 * prep.original_ndds as f64 / total as f64 },
        concept,
        kind,
        f1,
        f2,
        area,
        pof: pof(lottery, prep.i1).ok(),
        dist_ideal,
        dist_ref,
        support_size: lottery.support_size(),
        min_support_fraction: min_support_fraction(lottery, prep.i1).ok(),
        reference: *reference,
        master_y1: outcome.solution.value("y1"),
        master_y2: outcome.solution.value("y2"),
        master_r: outcome.solution.value("r"),
        objective: outcome.objective,
        iterations: outcome.iterations.len(),
        zeta_trace: outcome.iterations.iter().map(|l| l.zeta).collect(),
        final_zeta: outcome.final_zeta,
        converged: outcome.converged,
        seconds: outcome.seconds,
        oracle_gap: None,
        removed: prep.removed.clone(),
        delta: prep
            .pairs
            .iter()
            .map(|&v| (inst.name(v).to_string(), lottery.delta(v)))
            .collect(),
        support: lottery.labelled_support().map(|(l, p)| (p, l.to_string())).collect(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".into())
}

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(",")
}

impl SchemeReport {
    /// Key/value text; `plan = p ; ...` lines list the support.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("instance", self.instance.clone());
        kv("pairs", self.n_pairs.to_string());
        kv("ndd_percent", self.ndd_percent.to_string());
        kv("concept", self.concept.to_string());
        kv("kind", self.kind.tag().to_string());
        if let SchemeKind::Swp { lambda: Some((a, b)) } = self.kind {
            kv("swp_weights", format!("{a},{b}"));
        }
        kv("f1", self.f1.to_string());
        kv("f2", opt(self.f2));
        kv("area", opt(self.area));
        kv("pof", opt(self.pof));
        kv("dist_ideal", opt(self.dist_ideal));
        kv("dist_ref", opt(self.dist_ref));
        kv("support_size", self.support_size.to_string());
        kv("min_support_fraction", opt(self.min_support_fraction));
        kv("ideal", format!("{},{}", self.reference.i.0, self.reference.i.1));
        kv("reference", format!("{},{}", self.reference.d.0, self.reference.d.1));
        kv("y1", opt(self.master_y1));
        kv("y2", opt(self.master_y2));
        kv("r", opt(self.master_r));
        kv("objective", self.objective.to_string());
        kv("iterations", self.iterations.to_string());
        kv("zeta_trace", join(self.zeta_trace.iter().map(|z| z.to_string())));
        kv("final_zeta", self.final_zeta.to_string());
        kv("converged", self.converged.to_string());
        kv("seconds", self.seconds.to_string());
        kv("oracle_gap", opt(self.oracle_gap));
        kv("removed", self.removed.join(","));
        for (name, d) in &self.delta {
            kv(&format!("delta[{name}]"), d.to_string());
        }
        for (p, label) in &self.support {
            kv("plan", format!("{p} ; {label}"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        let mut delta = Vec::new();
        let mut support = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "plan" {
                let (p, label) = v.split_once(';').ok_or_else(|| err("expected `plan = p ; plan`"))?;
                let p: f64 = p.trim().parse().map_err(|_| err("bad probability"))?;
                support.push((p, label.trim().to_string()));
            } else if let Some(name) = k.strip_prefix("delta[").and_then(|r| r.strip_suffix(']')) {
                delta.push((name.to_string(), v.parse().map_err(|_| err("bad probability"))?));
            } else {
                map.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| {
            map.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Config(format!("report lacks `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Config(format!("report field `{k}` is not a number")))
        };
        let onum = |k: &str| -> Result<Option<f64>> {
            match get(k)? {
                "none" => Ok(None),
                v => v
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("report field `{k}` is not a number"))),
            }
        };
        let count = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::Config(format!("report field `{k}` is not a count")))
        };
        let point = |k: &str| -> Result<(f64, f64)> {
            let v = get(k)?;
            let bad = || Error::Config(format!("report field `{k}` is not a pair"));
            let (a, b) = v.split_once(',').ok_or_else(bad)?;
            Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
        };
        let kind = match get("kind")? {
            "single" => SchemeKind::Single,
            "nswp" => SchemeKind::Nswp,
            "swp" => SchemeKind::Swp {
                lambda: map.contains_key("swp_weights").then(|| point("swp_weights")).transpose()?,
            },
            other => return Err(Error::Config(format!("unknown kind `{other}`"))),
        };
        let list = |k: &str| -> Vec<String> {
            map.get(k)
                .map(|v| v.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect())
                .unwrap_or_default()
        };
        Ok(Self {
            instance: get("instance").unwrap_or("").to_string(),
            n_pairs: count("pairs")?,
            ndd_percent: num("ndd_percent")?,
            concept: get("concept")?.parse()?,
            kind,
            f1: num("f1")?,
            f2: onum("f2")?,
            area: onum("area")?,
            pof: onum("pof")?,
            dist_ideal: onum("dist_ideal")?,
            dist_ref: onum("dist_ref")?,
            support_size: count("support_size")?,
            min_support_fraction: onum("min_support_fraction")?,
            reference: RefPoint {
                i: point("ideal")?,
                d: point("reference")?,
            },
            master_y1: onum("y1")?,
            master_y2: onum("y2")?,
            master_r: onum("r")?,
            objective: num("objective")?,
            iterations: count("iterations")?,
            zeta_trace: list("zeta_trace")
                .iter()
                .map(|z| z.parse().map_err(|_| Error::Config("bad zeta trace".into())))
                .collect::<Result<_>>()?,
            final_zeta: num("final_zeta")?,
            converged: get("converged")? == "true",
            seconds: num("seconds")?,
            oracle_gap: onum("oracle_gap")?,
            removed: list("removed"),
            delta,
            support,
        })
    }

    pub fn csv_row(&self) -> String {
        let o = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let id = if self.instance.contains([',', '"']) {
            format!("\"{}\"", self.instance.replace('"', "\"\""))
        } else {
            self.instance.clone()
        };
        format!(
            "{id},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n_pairs,
            self.ndd_percent,
            self.concept,
            self.kind.tag(),
            self.f1,
            o(self.f2),
            o(self.pof),
            o(self.min_support_fraction),
            self.support_size,
            o(self.dist_ideal),
            o(self.dist_ref),
            self.iterations,
            self.seconds,
            self.converged
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::ExchangePlan;
    use crate::instance::{example_pool, Caps, Instance};
    use approx::assert_abs_diff_eq;

    fn lottery(inst: &Instance, plans: &[(&str, f64)]) -> Lottery {
        let pairs: Vec<VertexId> = inst.pairs().collect();
        Lottery::new(
            inst,
            plans
                .iter()
                .map(|(t, p)| (ExchangePlan::parse(t, inst, Caps::default()).unwrap(), *p)),
            &pairs,
        )
    }

    fn rawls_lottery(inst: &Instance) -> Lottery {
        lottery(
            inst,
            &[("cycle: v1>v2>v3 ; chain: v7>v6>v5", 0.5), ("cycle: v1>v4 ; chain: v7>v6>v5", 0.5)],
        )
    }

    #[test]
    fn pof_examples() {
        let inst = example_pool();
        let s2 = lottery(&inst, &[("cycle: v1>v4 ; chain: v7>v6>v5", 1.0)]);
        assert_abs_diff_eq!(pof(&s2, 5.0).unwrap(), 0.2, epsilon = 1e-12);
        let s1 = lottery(&inst, &[("cycle: v1>v2>v3 ; chain: v7>v6>v5", 1.0)]);
        assert_eq!(pof(&s1, 5.0).unwrap(), 0.0);
        assert_abs_diff_eq!(pof(&rawls_lottery(&inst), 5.0).unwrap(), 0.1, epsilon = 1e-12);
        assert!(matches!(pof(&s1, 0.0), Err(Error::UndefinedPof)));
    }

    #[test]
    fn fairness_values_on_half_half() {
        let inst = example_pool();
        let pairs: Vec<VertexId> = inst.pairs().collect();
        let l = rawls_lottery(&inst);
        let f = |c| fairness_value(c, &l, &[pairs[3]], &pairs);
        assert_abs_diff_eq!(f(FairnessConcept::IndividualFairness), -1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f(FairnessConcept::Rawls), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f(FairnessConcept::Aristotle), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f(FairnessConcept::Nash), 3.0 * 0.5f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(f(FairnessConcept::Utilitarian), 4.5, epsilon = 1e-12);
    }

    #[test]
    fn uniform_probabilities_are_individually_fair() {
        let inst = example_pool();
        let pairs: Vec<VertexId> = inst.pairs().collect();
        let l = lottery(&inst, &[("empty", 1.0)]);
        assert_eq!(fairness_value(FairnessConcept::IndividualFairness, &l, &[], &pairs), 0.0);
        assert_eq!(fairness_value(FairnessConcept::Nash, &l, &[], &pairs), f64::NEG_INFINITY);
    }

    #[test]
    fn min_support_examples() {
        let inst = example_pool();
        assert_abs_diff_eq!(min_support_fraction(&rawls_lottery(&inst), 5.0).unwrap(), 0.8);
        let s1 = lottery(&inst, &[("cycle: v1>v2>v3 ; chain: v7>v6>v5", 1.0)]);
        assert_eq!(min_support_fraction(&s1, 5.0).unwrap(), 1.0);
        let with_empty = lottery(&inst, &[("empty", 0.5), ("cycle: v1>v4", 0.5)]);
        assert_eq!(min_support_fraction(&with_empty, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_examples() {
        let ideal = (5.0, 0.5);
        let reference = (4.0, 0.0);
        assert_eq!(relative_distances(ideal, ideal, reference).unwrap(), (0.0, 1.0));
        assert_eq!(relative_distances(reference, ideal, reference).unwrap(), (1.0, 0.0));
        let (a, b) = relative_distances((4.5, 0.25), ideal, reference).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-12);
        assert!(matches!(relative_distances(ideal, ideal, ideal), Err(Error::DegenerateFront)));
    }

    #[test]
    fn mean_std_skips_infinities() {
        let (m, s, n) = mean_std(&[1.0, f64::NEG_INFINITY, 3.0]).unwrap();
        assert_eq!((m, n), (2.0, 2));
        assert_abs_diff_eq!(s, 2f64.sqrt(), epsilon = 1e-12);
        assert!(mean_std(&[f64::NEG_INFINITY]).is_none());
    }

    fn sample_report() -> SchemeReport {
        SchemeReport {
            instance: "example".into(),
            n_pairs: 6,
            ndd_percent: 100.0 / 7.0,
            concept: FairnessConcept::Nash,
            kind: SchemeKind::Swp { lambda: Some((1.0, 0.25)) },
            f1: 4.5,
            f2: Some(f64::NEG_INFINITY),
            area: None,
            pof: Some(0.1),
            dist_ideal: None,
            dist_ref: None,
            support_size: 2,
            min_support_fraction: Some(0.8),
            reference: RefPoint {
                d: (4.0, -10.75),
                i: (5.0, -2.5),
            },
            master_y1: Some(0.5),
            master_y2: None,
            master_r: Some(1.0),
            objective: 1.0,
            iterations: 2,
            zeta_trace: vec![-1.5, 0.0],
            final_zeta: 0.0,
            converged: true,
            seconds: 0.25,
            oracle_gap: Some(1e-9),
            removed: vec!["x".into(), "y".into()],
            delta: vec![("v1".into(), 1.0), ("v4".into(), 0.5)],
            support: vec![(0.5, "cycle: v1>v2>v3".into()), (0.5, "empty".into())],
        }
    }

    #[test]
    fn report_round_trip() {
        let r = sample_report();
        let text = r.to_text();
        assert!(text.contains("f2 = -inf\n"));
        assert!(text.contains("plan = 0.5 ; cycle: v1>v2>v3\n"));
        assert_eq!(SchemeReport::parse(&text).unwrap(), r);
    }

    #[test]
    fn csv_row_matches_header() {
        let r = sample_report();
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("example,6,"));
        assert!(row.ends_with(",2,0.25,true"));
    }

    #[test]
    fn report_parse_errors() {
        assert!(SchemeReport::parse("garbage").is_err());
        assert!(SchemeReport::parse("kind = single\n").is_err());
    }
}
