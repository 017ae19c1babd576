//! Capped cycles and chains, exchange plans, and exhaustive plan enumeration.
//!
//! All listings are deterministic: cycles are stored in canonical rotation
//! (smallest vertex index first) and every list is sorted lexicographically
//! by vertex index sequence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::{Caps, Instance, VertexId};

/// Directed cycle over pairs, canonical rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    vertices: Vec<VertexId>,
}

impl Cycle {
    /// Rotates `vertices` so the smallest index comes first.
    pub fn new(mut vertices: Vec<VertexId>) -> Self {
        if let Some(pos) = vertices
            .iter()
            .enumerate()
            .min_by_key(|(_, v)| **v)
            .map(|(i, _)| i)
        {
            vertices.rotate_left(pos);
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Simple path starting at an NDD; `vertices[0]` is the NDD.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    vertices: Vec<VertexId>,
}

impl Chain {
    pub fn new(vertices: Vec<VertexId>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Number of pairs (the NDD does not count).
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ndd(&self) -> VertexId {
        self.vertices[0]
    }
}

/// A cycle or a chain: the building block packed into exchange plans.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Structure {
    Cycle(Cycle),
    Chain(Chain),
}

impl Structure {
    pub fn vertices(&self) -> &[VertexId] {
        match self {
            Structure::Cycle(c) => c.vertices(),
            Structure::Chain(c) => c.vertices(),
        }
    }

    /// Pair vertices that receive a kidney.
    pub fn recipients(&self) -> &[VertexId] {
        match self {
            Structure::Cycle(c) => c.vertices(),
            Structure::Chain(c) => &c.vertices()[1..],
        }
    }

    fn write(&self, inst: &Instance, out: &mut String) {
        let (tag, vs) = match self {
            Structure::Cycle(c) => ("cycle", c.vertices()),
            Structure::Chain(c) => ("chain", c.vertices()),
        };
        out.push_str(tag);
        out.push_str(": ");
        for (k, v) in vs.iter().enumerate() {
            if k > 0 {
                out.push('>');
            }
            out.push_str(inst.name(*v));
        }
    }
}

/// A vertex-disjoint collection of cycles and chains (one column of the
/// master problem). The empty plan is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExchangePlan {
    cycles: Vec<Cycle>,
    chains: Vec<Chain>,
}

impl ExchangePlan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut cycles: Vec<Cycle>, mut chains: Vec<Chain>) -> Self {
        cycles.sort();
        chains.sort();
        Self { cycles, chains }
    }

    pub fn from_structures<'a>(items: impl IntoIterator<Item = &'a Structure>) -> Self {
        let mut cycles = Vec::new();
        let mut chains = Vec::new();
        for s in items {
            match s {
                Structure::Cycle(c) => cycles.push(c.clone()),
                Structure::Chain(c) => chains.push(c.clone()),
            }
        }
        Self::new(cycles, chains)
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty() && self.chains.is_empty()
    }

    pub fn structures(&self) -> impl Iterator<Item = Structure> + '_ {
        self.cycles
            .iter()
            .cloned()
            .map(Structure::Cycle)
            .chain(self.chains.iter().cloned().map(Structure::Chain))
    }

    /// V(S): every vertex in the plan, sorted.
    pub fn covered(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .cycles
            .iter()
            .flat_map(|c| c.vertices().iter().copied())
            .chain(self.chains.iter().flat_map(|c| c.vertices().iter().copied()))
            .collect();
        out.sort_unstable();
        out
    }

    /// V(S) \ N: pairs receiving a kidney, sorted.
    pub fn covered_pairs(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .cycles
            .iter()
            .flat_map(|c| c.vertices().iter().copied())
            .chain(self.chains.iter().flat_map(|c| c.vertices()[1..].iter().copied()))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn n_transplants(&self) -> usize {
        self.cycles.iter().map(Cycle::len).sum::<usize>()
            + self.chains.iter().map(Chain::len).sum::<usize>()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.cycles.iter().any(|c| c.vertices().contains(&v))
            || self.chains.iter().any(|c| c.vertices().contains(&v))
    }

    /// One-line form: `cycle: v1>v2>v3 ; chain: v7>v6>v5`, or `empty`.
    pub fn serialize(&self, inst: &Instance) -> String {
        if self.is_empty() {
            return "empty".to_string();
        }
        let mut out = String::new();
        for (k, s) in self.structures().enumerate() {
            if k > 0 {
                out.push_str(" ; ");
            }
            s.write(inst, &mut out);
        }
        out
    }

    /// Multi-line form, one structure per line.
    pub fn serialize_lines(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for s in self.structures() {
            s.write(inst, &mut out);
            out.push('\n');
        }
        out
    }

    /// Inverse of [`ExchangePlan::serialize`]; checks feasibility.
    pub fn parse(text: &str, inst: &Instance, caps: Caps) -> Result<Self> {
        let text = text.trim();
        if text == "empty" || text.is_empty() {
            return Ok(Self::empty());
        }
        let mut cycles = Vec::new();
        let mut chains = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (tag, body) = part
                .split_once(':')
                .ok_or_else(|| Error::Validation(format!("bad structure {part:?}")))?;
            let vs = body
                .trim()
                .split('>')
                .map(|name| {
                    inst.id(name.trim())
                        .ok_or_else(|| Error::Validation(format!("unknown vertex {name:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            match tag.trim() {
                "cycle" => cycles.push(Cycle::new(vs)),
                "chain" => chains.push(Chain::new(vs)),
                other => return Err(Error::Validation(format!("unknown structure {other:?}"))),
            }
        }
        let plan = Self::new(cycles, chains);
        plan.check_feasible(inst, caps)?;
        Ok(plan)
    }

    pub fn check_feasible(&self, inst: &Instance, caps: Caps) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        for c in &self.cycles {
            let vs = c.vertices();
            if vs.len() < 2 || vs.len() > caps.cycle {
                return bad(format!("cycle of length {} violates cap {}", vs.len(), caps.cycle));
            }
            for k in 0..vs.len() {
                let (s, t) = (vs[k], vs[(k + 1) % vs.len()]);
                if !inst.is_pair(s) || !inst.has_arc(s, t) {
                    return bad(format!("cycle uses missing arc {}->{}", inst.name(s), inst.name(t)));
                }
            }
        }
        for c in &self.chains {
            let vs = c.vertices();
            if c.len() < 1 || c.len() > caps.chain || inst.is_pair(vs[0]) {
                return bad("chain must start at an NDD and respect the chain cap".into());
            }
            for w in vs.windows(2) {
                if !inst.has_arc(w[0], w[1]) {
                    return bad(format!("chain uses missing arc {}->{}", inst.name(w[0]), inst.name(w[1])));
                }
            }
        }
        let covered = self.covered();
        if covered.windows(2).any(|w| w[0] == w[1]) {
            return bad("structures overlap".into());
        }
        Ok(())
    }

    /// Re-expresses the plan on another instance sharing vertex names.
    pub fn remap(&self, from: &Instance, to: &Instance) -> ExchangePlan {
        let map = |vs: &[VertexId]| -> Vec<VertexId> {
            vs.iter()
                .map(|&v| to.id(from.name(v)).expect("vertex present in target instance"))
                .collect()
        };
        ExchangePlan::new(
            self.cycles.iter().map(|c| Cycle::new(map(c.vertices()))).collect(),
            self.chains.iter().map(|c| Chain::new(map(c.vertices()))).collect(),
        )
    }
}

/// Every simple cycle of 2..=K pairs, once each, canonical and sorted.
pub fn enumerate_cycles(inst: &Instance, caps: Caps) -> Vec<Cycle> {
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(caps.cycle);
    let mut on_path = vec![false; inst.len()];
    for start in inst.pairs() {
        path.push(start);
        on_path[start] = true;
        extend_cycle(inst, caps.cycle, start, &mut path, &mut on_path, &mut out);
        on_path[start] = false;
        path.pop();
    }
    out.sort();
    out
}

fn extend_cycle(
    inst: &Instance,
    cap: usize,
    start: VertexId,
    path: &mut Vec<VertexId>,
    on_path: &mut [bool],
    out: &mut Vec<Cycle>,
) {
    let last = *path.last().expect("path is never empty");
    for &next in inst.successors(last) {
        if next == start && path.len() >= 2 {
            out.push(Cycle {
                vertices: path.clone(),
            });
        } else if next > start && !on_path[next] && path.len() < cap {
            path.push(next);
            on_path[next] = true;
            extend_cycle(inst, cap, start, path, on_path, out);
            on_path[next] = false;
            path.pop();
        }
    }
}

/// Every chain of 1..=K' pairs starting at an NDD, sorted.
pub fn enumerate_chains(inst: &Instance, caps: Caps) -> Vec<Chain> {
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(caps.chain + 1);
    let mut on_path = vec![false; inst.len()];
    for ndd in inst.ndds() {
        path.push(ndd);
        on_path[ndd] = true;
        extend_chain(inst, caps.chain, &mut path, &mut on_path, &mut out);
        on_path[ndd] = false;
        path.pop();
    }
    out.sort();
    out
}

fn extend_chain(
    inst: &Instance,
    cap: usize,
    path: &mut Vec<VertexId>,
    on_path: &mut [bool],
    out: &mut Vec<Chain>,
) {
    if path.len() > cap {
        return;
    }
    let last = *path.last().expect("path is never empty");
    for &next in inst.successors(last) {
        if on_path[next] {
            continue;
        }
        path.push(next);
        on_path[next] = true;
        out.push(Chain {
            vertices: path.clone(),
        });
        extend_chain(inst, cap, path, on_path, out);
        on_path[next] = false;
        path.pop();
    }
}

/// Cycles followed by chains.
pub fn enumerate_structures(inst: &Instance, caps: Caps) -> Vec<Structure> {
    enumerate_cycles(inst, caps)
        .into_iter()
        .map(Structure::Cycle)
        .chain(enumerate_chains(inst, caps).into_iter().map(Structure::Chain))
        .collect()
}

/// Counts structures, stopping early once `limit` is exceeded.
pub fn count_structures(inst: &Instance, caps: Caps, limit: usize) -> usize {
    struct Counter {
        seen: usize,
        limit: usize,
    }
    fn walk(
        inst: &Instance,
        path: &mut Vec<VertexId>,
        on_path: &mut [bool],
        cap: usize,
        start: Option<VertexId>,
        c: &mut Counter,
    ) {
        if c.seen > c.limit {
            return;
        }
        let last = *path.last().unwrap();
        for &next in inst.successors(last) {
            match start {
                Some(s) if next == s && path.len() >= 2 => c.seen += 1,
                Some(s) if next > s && !on_path[next] && path.len() < cap => {
                    path.push(next);
                    on_path[next] = true;
                    walk(inst, path, on_path, cap, start, c);
                    on_path[next] = false;
                    path.pop();
                }
                None if !on_path[next] && path.len() <= cap => {
                    c.seen += 1;
                    path.push(next);
                    on_path[next] = true;
                    walk(inst, path, on_path, cap, start, c);
                    on_path[next] = false;
                    path.pop();
                }
                _ => {}
            }
        }
    }
    let mut counter = Counter { seen: 0, limit };
    let mut on_path = vec![false; inst.len()];
    for v in 0..inst.len() {
        let (cap, start) = if inst.is_pair(v) {
            (caps.cycle, Some(v))
        } else {
            (caps.chain, None)
        };
        let mut path = vec![v];
        on_path[v] = true;
        walk(inst, &mut path, &mut on_path, cap, start, &mut counter);
        on_path[v] = false;
    }
    counter.seen
}

/// All feasible plans (F_G), including the empty plan. Exponential: guarded
/// by `limit`.
pub fn enumerate_plans(inst: &Instance, caps: Caps, limit: Option<usize>) -> Result<Vec<ExchangePlan>> {
    let structures = enumerate_structures(inst, caps);
    let limit = limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    let mut used = vec![false; inst.len()];
    let mut chosen = Vec::new();
    pack_all(&structures, 0, &mut used, &mut chosen, &mut out, limit)?;
    Ok(out)
}

fn pack_all(
    structures: &[Structure],
    from: usize,
    used: &mut [bool],
    chosen: &mut Vec<usize>,
    out: &mut Vec<ExchangePlan>,
    limit: usize,
) -> Result<()> {
    if out.len() >= limit {
        return Err(Error::Blowup { limit });
    }
    out.push(ExchangePlan::from_structures(chosen.iter().map(|&i| &structures[i])));
    for j in from..structures.len() {
        let vs = structures[j].vertices();
        if vs.iter().any(|&v| used[v]) {
            continue;
        }
        vs.iter().for_each(|&v| used[v] = true);
        chosen.push(j);
        pack_all(structures, j + 1, used, chosen, out, limit)?;
        chosen.pop();
        vs.iter().for_each(|&v| used[v] = false);
    }
    Ok(())
}

/// True iff no feasible plan strictly contains `plan`: no cycle or chain fits
/// in the uncovered vertices and no chain can be extended by one more pair.
pub fn is_maximal(plan: &ExchangePlan, inst: &Instance, caps: Caps) -> bool {
    let mut used = vec![false; inst.len()];
    for v in plan.covered() {
        used[v] = true;
    }
    let disjoint_fits = enumerate_structures(inst, caps)
        .iter()
        .any(|s| s.vertices().iter().all(|&v| !used[v]));
    if disjoint_fits {
        return false;
    }
    !plan.chains().iter().any(|c| {
        c.len() < caps.chain
            && inst
                .successors(*c.vertices().last().unwrap())
                .iter()
                .any(|&w| !used[w])
    })
}

/// Extends `plan` greedily to a maximal plan: first longer chains, then
/// disjoint structures in listing order.
pub fn extend_to_maximal(plan: &ExchangePlan, inst: &Instance, caps: Caps) -> ExchangePlan {
    let mut used = vec![false; inst.len()];
    for v in plan.covered() {
        used[v] = true;
    }
    let mut chains: Vec<Chain> = plan.chains().to_vec();
    for chain in chains.iter_mut() {
        while chain.len() < caps.chain {
            let last = *chain.vertices.last().unwrap();
            match inst.successors(last).iter().find(|&&w| !used[w]) {
                Some(&w) => {
                    used[w] = true;
                    chain.vertices.push(w);
                }
                None => break,
            }
        }
    }
    let mut cycles: Vec<Cycle> = plan.cycles().to_vec();
    for s in enumerate_structures(inst, caps) {
        if s.vertices().iter().all(|&v| !used[v]) {
            s.vertices().iter().for_each(|&v| used[v] = true);
            match s {
                Structure::Cycle(c) => cycles.push(c),
                Structure::Chain(c) => chains.push(c),
            }
        }
    }
    let extended = ExchangePlan::new(cycles, chains);
    if is_maximal(&extended, inst, caps) {
        extended
    } else {
        extend_to_maximal(&extended, inst, caps)
    }
}

/// Utility of each pair under `plan`: the weight of the arc delivering to it,
/// 0 for pairs left out. With unit weights this is the membership indicator.
pub fn plan_utilities(plan: &ExchangePlan, inst: &Instance) -> BTreeMap<VertexId, f64> {
    let mut out: BTreeMap<VertexId, f64> = inst.pairs().map(|v| (v, 0.0)).collect();
    for c in plan.cycles() {
        let vs = c.vertices();
        for k in 0..vs.len() {
            let (s, t) = (vs[(k + vs.len() - 1) % vs.len()], vs[k]);
            out.insert(t, inst.arc_weight(s, t).unwrap_or(0.0));
        }
    }
    for c in plan.chains() {
        for w in c.vertices().windows(2) {
            out.insert(w[1], inst.arc_weight(w[0], w[1]).unwrap_or(0.0));
        }
    }
    out
}

/// Vertex set touched by any plan in the list.
pub fn union_of_plans(plans: &[ExchangePlan]) -> BTreeSet<VertexId> {
    plans.iter().flat_map(|p| p.covered()).collect()
}

/// Writes a plan list as text, one plan per line.
pub fn format_plans(plans: &[ExchangePlan], inst: &Instance) -> String {
    let mut out = String::new();
    for p in plans {
        let _ = writeln!(out, "{}", p.serialize(inst));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{example_pool, generate_instance, InstanceBuilder};

    fn names(inst: &Instance, vs: &[VertexId]) -> Vec<String> {
        vs.iter().map(|&v| inst.name(v).to_string()).collect()
    }

    fn plan(inst: &Instance, text: &str) -> ExchangePlan {
        ExchangePlan::parse(text, inst, Caps::default()).unwrap()
    }

    #[test]
    fn example_pool_cycles() {
        let inst = example_pool();
        let cycles = enumerate_cycles(&inst, Caps::default());
        let got: Vec<_> = cycles.iter().map(|c| names(&inst, c.vertices())).collect();
        assert_eq!(got, vec![vec!["v1", "v2", "v3"], vec!["v1", "v4"]]);
    }

    #[test]
    fn no_arcs_no_cycles() {
        let inst = InstanceBuilder::new().pair("a", 0).pair("b", 0).build().unwrap();
        assert!(enumerate_cycles(&inst, Caps::default()).is_empty());
        assert_eq!(enumerate_plans(&inst, Caps::default(), None).unwrap(), vec![ExchangePlan::empty()]);
    }

    #[test]
    fn complete_digraph_two_cycles() {
        let mut b = InstanceBuilder::new();
        for i in 0..4 {
            b = b.pair(&format!("p{i}"), 0);
        }
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    b = b.arc(&format!("p{i}"), &format!("p{j}"));
                }
            }
        }
        let inst = b.build().unwrap();
        assert_eq!(enumerate_cycles(&inst, Caps::new(2, 1).unwrap()).len(), 6);
        // 6 two-cycles + 2 * C(4,3) three-cycles
        assert_eq!(enumerate_cycles(&inst, Caps::new(3, 1).unwrap()).len(), 14);
    }

    #[test]
    fn example_pool_chains() {
        let inst = example_pool();
        let got: Vec<_> = enumerate_chains(&inst, Caps::default())
            .iter()
            .map(|c| names(&inst, c.vertices()))
            .collect();
        assert_eq!(got, vec![vec!["v7", "v6"], vec!["v7", "v6", "v5"]]);

        let short: Vec<_> = enumerate_chains(&inst, Caps::new(3, 1).unwrap())
            .iter()
            .map(|c| names(&inst, c.vertices()))
            .collect();
        assert_eq!(short, vec![vec!["v7", "v6"]]);
    }

    #[test]
    fn no_ndds_no_chains() {
        let inst = InstanceBuilder::new().pair("a", 0).pair("b", 0).arc("a", "b").build().unwrap();
        assert!(enumerate_chains(&inst, Caps::default()).is_empty());
    }

    #[test]
    fn example_pool_plan_count() {
        let inst = example_pool();
        let plans = enumerate_plans(&inst, Caps::default(), None).unwrap();
        assert_eq!(plans.len(), 9);
        assert!(plans.contains(&ExchangePlan::empty()));
        let unique: BTreeSet<_> = plans.iter().collect();
        assert_eq!(unique.len(), 9);
    }

    #[test]
    fn single_two_cycle_has_two_plans() {
        let inst = InstanceBuilder::new().pair("a", 0).pair("b", 0).arc("a", "b").arc("b", "a").build().unwrap();
        assert_eq!(enumerate_plans(&inst, Caps::default(), None).unwrap().len(), 2);
    }

    #[test]
    fn plan_limit_triggers_blowup() {
        let inst = example_pool();
        assert!(matches!(
            enumerate_plans(&inst, Caps::default(), Some(5)),
            Err(Error::Blowup { limit: 5 })
        ));
    }

    #[test]
    fn structure_count_matches_listing() {
        for seed in 0..10 {
            let inst = generate_instance(10, 0.2, 0.35, seed);
            let caps = Caps::default();
            let n = enumerate_structures(&inst, caps).len();
            assert_eq!(count_structures(&inst, caps, usize::MAX), n);
        }
    }

    #[test]
    fn maximality() {
        let inst = example_pool();
        let caps = Caps::default();
        assert!(is_maximal(&plan(&inst, "cycle: v1>v2>v3 ; chain: v7>v6>v5"), &inst, caps));
        assert!(!is_maximal(&ExchangePlan::empty(), &inst, caps));
        assert!(!is_maximal(&plan(&inst, "chain: v7>v6"), &inst, caps));
        // the chain can still grow to v5
        assert!(!is_maximal(&plan(&inst, "cycle: v1>v2>v3 ; chain: v7>v6"), &inst, caps));
        let grown = extend_to_maximal(&plan(&inst, "chain: v7>v6"), &inst, caps);
        assert!(is_maximal(&grown, &inst, caps));
        assert_eq!(grown.n_transplants(), 5);
    }

    #[test]
    fn utilities_of_s1_and_s2() {
        let inst = example_pool();
        let s1 = plan(&inst, "cycle: v1>v2>v3 ; chain: v7>v6>v5");
        let u = plan_utilities(&s1, &inst);
        let ones: Vec<_> = u.iter().filter(|(_, &x)| x == 1.0).map(|(&v, _)| inst.name(v)).collect();
        assert_eq!(ones, vec!["v1", "v2", "v3", "v5", "v6"]);
        assert_eq!(u[&inst.id("v4").unwrap()], 0.0);

        let s2 = plan(&inst, "cycle: v4>v1 ; chain: v7>v6>v5");
        let u = plan_utilities(&s2, &inst);
        assert_eq!(u.values().sum::<f64>(), 4.0);
        assert_eq!(u[&inst.id("v2").unwrap()], 0.0);

        assert!(plan_utilities(&ExchangePlan::empty(), &inst).values().all(|&x| x == 0.0));
    }

    #[test]
    fn weighted_utilities_use_delivering_arc() {
        let inst = InstanceBuilder::new()
            .pair("a", 0)
            .pair("b", 0)
            .weighted_arc("a", "b", 2.5)
            .weighted_arc("b", "a", 0.5)
            .build()
            .unwrap();
        let p = plan(&inst, "cycle: b>a");
        let u = plan_utilities(&p, &inst);
        assert_eq!(u[&1], 2.5);
        assert_eq!(u[&0], 0.5);
    }

    #[test]
    fn serialization_round_trip_and_canonical_rotation() {
        let inst = example_pool();
        let p = plan(&inst, "chain: v7>v6>v5 ; cycle: v3>v1>v2");
        assert_eq!(p.serialize(&inst), "cycle: v1>v2>v3 ; chain: v7>v6>v5");
        assert_eq!(p.serialize_lines(&inst), "cycle: v1>v2>v3\nchain: v7>v6>v5\n");
        assert_eq!(ExchangePlan::parse(&p.serialize(&inst), &inst, Caps::default()).unwrap(), p);
        assert!(ExchangePlan::parse("cycle: v1>v2>v3 ; cycle: v1>v4", &inst, Caps::default()).is_err());
        assert!(ExchangePlan::parse("cycle: v1>v3", &inst, Caps::default()).is_err());
    }
}
