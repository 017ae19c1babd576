//! Kidney-exchange instances: the compatibility graph, its file formats, a
//! seeded generator, and the matchability preprocessing that every scheme
//! runs before building a master problem.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enumeration::{enumerate_structures, ExchangePlan};
use crate::error::{Error, Result};

/// Index of a vertex inside its [`Instance`].
pub type VertexId = usize;

/// Default PRA threshold (inclusive) for the hard-to-match group.
pub const DEFAULT_PRA_THRESHOLD: u8 = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    /// Incompatible patient-donor pair with the patient's PRA in percent.
    Pair { pra: u8 },
    /// Non-directed (altruistic) donor.
    Ndd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn is_pair(&self) -> bool {
        matches!(self.kind, VertexKind::Pair { .. })
    }

    pub fn pra(&self) -> Option<u8> {
        match self.kind {
            VertexKind::Pair { pra } => Some(pra),
            VertexKind::Ndd => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub source: VertexId,
    pub target: VertexId,
    pub weight: f64,
}

/// Cycle and chain length limits, both counted in pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Caps {
    pub cycle: usize,
    pub chain: usize,
}

impl Caps {
    pub fn new(cycle: usize, chain: usize) -> Result<Self> {
        if cycle < 2 || chain < 1 {
            return Err(Error::InvalidCaps { cycle, chain });
        }
        Ok(Self { cycle, chain })
    }
}

impl Default for Caps {
    fn default() -> Self {
        Self { cycle: 3, chain: 3 }
    }
}

/// A validated compatibility graph. Immutable once built.
#[derive(Clone, Debug)]
pub struct Instance {
    vertices: Vec<Vertex>,
    arcs: Vec<Arc>,
    by_name: HashMap<String, VertexId>,
    successors: Vec<Vec<VertexId>>,
    predecessors: Vec<Vec<VertexId>>,
    arc_lookup: HashMap<(VertexId, VertexId), usize>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.arcs == other.arcs
    }
}

impl Instance {
    /// Builds and validates an instance. Arcs are kept in the given order.
    pub fn new(vertices: Vec<Vertex>, arcs: Vec<Arc>) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(vertices.len());
        for (id, v) in vertices.iter().enumerate() {
            if v.name.is_empty() || v.name.contains(char::is_whitespace) {
                return Err(Error::Validation(format!("bad vertex name {:?}", v.name)));
            }
            if let VertexKind::Pair { pra } = v.kind {
                if pra > 100 {
                    return Err(Error::Validation(format!(
                        "pair {} has PRA {} outside [0,100]",
                        v.name, pra
                    )));
                }
            }
            if by_name.insert(v.name.clone(), id).is_some() {
                return Err(Error::Validation(format!("duplicate vertex id {}", v.name)));
            }
        }

        let n = vertices.len();
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        let mut arc_lookup = HashMap::with_capacity(arcs.len());
        for (k, a) in arcs.iter().enumerate() {
            if a.source >= n || a.target >= n {
                return Err(Error::Validation(format!(
                    "arc {}->{} references an unknown vertex",
                    a.source, a.target
                )));
            }
            let (s, t) = (&vertices[a.source].name, &vertices[a.target].name);
            if a.source == a.target {
                return Err(Error::Validation(format!("self-loop on {s}")));
            }
            if !vertices[a.target].is_pair() {
                return Err(Error::Validation(format!("arc {s}->{t} points into NDD {t}")));
            }
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(Error::Validation(format!("arc {s}->{t} has weight {}", a.weight)));
            }
            if arc_lookup.insert((a.source, a.target), k).is_some() {
                return Err(Error::Validation(format!("duplicate arc {s}->{t}")));
            }
            successors[a.source].push(a.target);
            predecessors[a.target].push(a.source);
        }
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_unstable();
        }

        Ok(Self {
            vertices,
            arcs,
            by_name,
            successors,
            predecessors,
            arc_lookup,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: VertexId) -> &str {
        &self.vertices[id].name
    }

    pub fn is_pair(&self, id: VertexId) -> bool {
        self.vertices[id].is_pair()
    }

    /// Pair vertices in instance order.
    pub fn pairs(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).filter(|&v| self.is_pair(v))
    }

    /// NDD vertices in instance order.
    pub fn ndds(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).filter(|&v| !self.is_pair(v))
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs().count()
    }

    pub fn n_ndds(&self) -> usize {
        self.len() - self.n_pairs()
    }

    /// Sorted successor list.
    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.successors[v]
    }

    /// Sorted predecessor list.
    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        &self.predecessors[v]
    }

    pub fn has_arc(&self, source: VertexId, target: VertexId) -> bool {
        self.arc_lookup.contains_key(&(source, target))
    }

    pub fn arc_weight(&self, source: VertexId, target: VertexId) -> Option<f64> {
        self.arc_lookup
            .get(&(source, target))
            .map(|&k| self.arcs[k].weight)
    }

    /// Sub-instance induced by `keep`, preserving vertex and arc order.
    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> Instance {
        let mut remap = vec![usize::MAX; self.len()];
        let mut vertices = Vec::with_capacity(keep.len());
        for (old, v) in self.vertices.iter().enumerate() {
            if keep.contains(&old) {
                remap[old] = vertices.len();
                vertices.push(v.clone());
            }
        }
        let arcs = self
            .arcs
            .iter()
            .filter(|a| keep.contains(&a.source) && keep.contains(&a.target))
            .map(|a| Arc {
                source: remap[a.source],
                target: remap[a.target],
                weight: a.weight,
            })
            .collect();
        Instance::new(vertices, arcs).expect("restriction of a valid instance is valid")
    }

    /// Serializes to the native line format. `parse_instance` reads it back
    /// to an identical instance.
    pub fn to_native(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "kep {} {} {}",
            self.n_pairs(),
            self.n_ndds(),
            self.arcs.len()
        );
        for v in &self.vertices {
            match v.kind {
                VertexKind::Pair { pra } => {
                    let _ = writeln!(out, "pair {} {}", v.name, pra);
                }
                VertexKind::Ndd => {
                    let _ = writeln!(out, "ndd {}", v.name);
                }
            }
        }
        for a in &self.arcs {
            let _ = writeln!(
                out,
                "arc {} {} {}",
                self.vertices[a.source].name, self.vertices[a.target].name, a.weight
            );
        }
        out
    }
}

/// Convenience builder addressing vertices by name.
#[derive(Default, Debug, Clone)]
pub struct InstanceBuilder {
    vertices: Vec<Vertex>,
    arcs: Vec<(String, String, f64)>,
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pair(mut self, name: &str, pra: u8) -> Self {
        self.vertices.push(Vertex {
            name: name.to_string(),
            kind: VertexKind::Pair { pra },
        });
        self
    }

    pub fn ndd(mut self, name: &str) -> Self {
        self.vertices.push(Vertex {
            name: name.to_string(),
            kind: VertexKind::Ndd,
        });
        self
    }

    pub fn arc(self, source: &str, target: &str) -> Self {
        self.weighted_arc(source, target, 1.0)
    }

    pub fn weighted_arc(mut self, source: &str, target: &str, weight: f64) -> Self {
        self.arcs.push((source.to_string(), target.to_string(), weight));
        self
    }

    pub fn build(self) -> Result<Instance> {
        let index: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (s, t, w) in &self.arcs {
            let (Some(&source), Some(&target)) = (index.get(s.as_str()), index.get(t.as_str()))
            else {
                return Err(Error::Validation(format!("arc {s}->{t} references an unknown vertex")));
            };
            arcs.push(Arc {
                source,
                target,
                weight: *w,
            });
        }
        Instance::new(self.vertices, arcs)
    }
}

/// The example graph used throughout the test-suite: pairs v1..v6, NDD v7.
pub fn example_pool() -> Instance {
    InstanceBuilder::new()
        .pair("v1", 0)
        .pair("v2", 0)
        .pair("v3", 0)
        .pair("v4", 0)
        .pair("v5", 0)
        .pair("v6", 0)
        .ndd("v7")
        .arc("v1", "v2")
        .arc("v2", "v3")
        .arc("v3", "v1")
        .arc("v7", "v6")
        .arc("v6", "v5")
        .arc("v4", "v1")
        .arc("v1", "v4")
        .build()
        .expect("example pool is valid")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the native format:
///
/// ```text
/// kep <n_pairs> <n_ndds> <n_arcs>
/// pair <id> <pra>
/// ndd <id>
/// arc <src> <dst> <weight>
/// ```
///
/// `#` starts a comment; blank lines are ignored.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut vertices = Vec::new();
    let mut raw_arcs = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "kep" => {
                if header.is_some() {
                    return Err(parse_err(line_no, "duplicate header"));
                }
                if fields.len() != 4 {
                    return Err(parse_err(line_no, "header needs `kep <n_pairs> <n_ndds> <n_arcs>`"));
                }
                let count = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(line_no, format!("bad count {s:?}")))
                };
                header = Some((count(fields[1])?, count(fields[2])?, count(fields[3])?));
            }
            _ if header.is_none() => {
                return Err(parse_err(line_no, "expected `kep` header first"));
            }
            "pair" => {
                if fields.len() != 3 {
                    return Err(parse_err(line_no, "pair line needs `pair <id> <pra>`"));
                }
                let pra: u8 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad PRA {:?}", fields[2])))?;
                if pra > 100 {
                    return Err(Error::Validation(format!(
                        "pair {} has PRA {} outside [0,100]",
                        fields[1], pra
                    )));
                }
                vertices.push(Vertex {
                    name: fields[1].to_string(),
                    kind: VertexKind::Pair { pra },
                });
            }
            "ndd" => {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "ndd line needs `ndd <id>`"));
                }
                vertices.push(Vertex {
                    name: fields[1].to_string(),
                    kind: VertexKind::Ndd,
                });
            }
            "arc" => {
                if fields.len() != 4 && fields.len() != 3 {
                    return Err(parse_err(line_no, "arc line needs `arc <src> <dst> <weight>`"));
                }
                let weight = match fields.get(3) {
                    Some(w) => w
                        .parse::<f64>()
                        .map_err(|_| parse_err(line_no, format!("bad weight {w:?}")))?,
                    None => 1.0,
                };
                raw_arcs.push((line_no, fields[1].to_string(), fields[2].to_string(), weight));
            }
            other => return Err(parse_err(line_no, format!("unknown record {other:?}"))),
        }
    }

    let Some((n_pairs, n_ndds, n_arcs)) = header else {
        return Err(parse_err(0, "missing `kep` header"));
    };
    let found_pairs = vertices.iter().filter(|v| v.is_pair()).count();
    if found_pairs != n_pairs || vertices.len() - found_pairs != n_ndds || raw_arcs.len() != n_arcs {
        return Err(parse_err(
            1,
            format!(
                "header announces {n_pairs} pairs, {n_ndds} NDDs, {n_arcs} arcs; file has {}, {}, {}",
                found_pairs,
                vertices.len() - found_pairs,
                raw_arcs.len()
            ),
        ));
    }

    let mut index = HashMap::new();
    for (i, v) in vertices.iter().enumerate() {
        if index.insert(v.name.clone(), i).is_some() {
            return Err(Error::Validation(format!("duplicate vertex id {}", v.name)));
        }
    }
    let mut arcs = Vec::with_capacity(raw_arcs.len());
    for (line_no, s, t, weight) in raw_arcs {
        let source = *index
            .get(&s)
            .ok_or_else(|| parse_err(line_no, format!("unknown vertex {s}")))?;
        let target = *index
            .get(&t)
            .ok_or_else(|| parse_err(line_no, format!("unknown vertex {t}")))?;
        arcs.push(Arc {
            source,
            target,
            weight,
        });
    }
    Instance::new(vertices, arcs)
}

/// Best-effort reader for PrefLib-style kidney files (`.wmd`).
///
/// Vertices come from `# ALTERNATIVE NAME <k>: <label>` comments (labels
/// containing "altruist" or "ndd" become NDDs) or, in the legacy layout, from
/// `<k>,<label>` lines after a `<n_vertices>,<n_edges>` header. Edge lines are
/// `<src>,<dst>,<weight>`. Arcs into NDDs (PrefLib's chain-termination edges)
/// are dropped. PRA is not part of the format and defaults to 0; an optional
/// `# PRA <k>: <percent>` comment overrides it.
pub fn parse_preflib(text: &str) -> Result<Instance> {
    let mut labels: Vec<(usize, String)> = Vec::new();
    let mut pra: HashMap<usize, u8> = HashMap::new();
    let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut legacy_vertices: Option<usize> = None;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("ALTERNATIVE NAME") {
                let (id, label) = rest
                    .split_once(':')
                    .ok_or_else(|| parse_err(line_no, "malformed ALTERNATIVE NAME"))?;
                let id = id
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, "bad alternative index"))?;
                labels.push((id, label.trim().to_string()));
            } else if let Some(rest) = comment.strip_prefix("PRA") {
                if let Some((id, p)) = rest.split_once(':') {
                    let id = id.trim().parse().map_err(|_| parse_err(line_no, "bad PRA index"))?;
                    let p = p.trim().parse().map_err(|_| parse_err(line_no, "bad PRA value"))?;
                    pra.insert(id, p);
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad index {s:?}")))
        };
        match fields.len() {
            2 if legacy_vertices.is_none() && labels.is_empty() && edges.is_empty() => {
                legacy_vertices = Some(num(fields[0])?);
            }
            2 => {
                // legacy vertex line or unweighted edge
                if let (Some(n), Ok(id)) = (legacy_vertices, fields[0].parse::<usize>()) {
                    if fields[1].parse::<usize>().is_err() && labels.len() < n {
                        labels.push((id, fields[1].to_string()));
                        continue;
                    }
                }
                edges.push((line_no, num(fields[0])?, num(fields[1])?, 1.0));
            }
            3 => {
                let w = fields[2]
                    .parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("bad weight {:?}", fields[2])))?;
                edges.push((line_no, num(fields[0])?, num(fields[1])?, w));
            }
            _ => return Err(parse_err(line_no, "unrecognised line")),
        }
    }

    if labels.is_empty() {
        if let Some(n) = legacy_vertices {
            labels = (1..=n).map(|i| (i, format!("Pair {i}"))).collect();
        }
    }
    labels.sort_by_key(|(id, _)| *id);
    let mut index = HashMap::new();
    let mut vertices = Vec::with_capacity(labels.len());
    for (id, label) in &labels {
        let lower = label.to_ascii_lowercase();
        let kind = if lower.contains("altruist") || lower.contains("ndd") {
            VertexKind::Ndd
        } else {
            VertexKind::Pair {
                pra: pra.get(id).copied().unwrap_or(0),
            }
        };
        index.insert(*id, vertices.len());
        vertices.push(Vertex {
            name: format!("v{id}"),
            kind,
        });
    }
    let mut arcs = Vec::new();
    for (line_no, s, t, weight) in edges {
        let source = *index
            .get(&s)
            .ok_or_else(|| parse_err(line_no, format!("unknown vertex {s}")))?;
        let target = *index
            .get(&t)
            .ok_or_else(|| parse_err(line_no, format!("unknown vertex {t}")))?;
        if source == target || !vertices[target].is_pair() {
            continue;
        }
        arcs.push(Arc {
            source,
            target,
            weight,
        });
    }
    Instance::new(vertices, arcs)
}

/// Discrete PRA distribution: `(probability, pra)` buckets.
#[derive(Clone, Debug, PartialEq)]
pub struct PraDistribution {
    pub buckets: Vec<(f64, u8)>,
}

impl PraDistribution {
    /// Three-bucket low/medium/high split used by Saidman-style generators.
    pub fn three_bucket() -> Self {
        Self {
            buckets: vec![(0.7019, 5), (0.2, 45), (0.0981, 90)],
        }
    }

    pub fn constant(pra: u8) -> Self {
        Self {
            buckets: vec![(1.0, pra)],
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> u8 {
        let total: f64 = self.buckets.iter().map(|b| b.0).sum();
        let mut u = rng.gen::<f64>() * total;
        for &(p, pra) in &self.buckets {
            if u < p {
                return pra;
            }
            u -= p;
        }
        self.buckets.last().map_or(0, |b| b.1)
    }
}

impl Default for PraDistribution {
    fn default() -> Self {
        Self::three_bucket()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorParams {
    pub n_pairs: usize,
    pub ndd_fraction: f64,
    pub density: f64,
    pub seed: u64,
    pub pra: PraDistribution,
}

/// Random instance with the default three-bucket PRA distribution.
pub fn generate_instance(n_pairs: usize, ndd_fraction: f64, density: f64, seed: u64) -> Instance {
    generate_instance_with(&GeneratorParams {
        n_pairs,
        ndd_fraction,
        density,
        seed,
        pra: PraDistribution::default(),
    })
}

/// Pairs are `v1..vn`, followed by `round(ndd_fraction * n)` NDDs. Each
/// ordered pair (i, j) with j a pair gets an arc with probability
/// `density * (1 - pra_j / 100)`.
pub fn generate_instance_with(params: &GeneratorParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_pairs;
    let n_ndds = (params.ndd_fraction.clamp(0.0, 1.0) * n as f64).round() as usize;

    let mut vertices = Vec::with_capacity(n + n_ndds);
    for i in 0..n {
        vertices.push(Vertex {
            name: format!("v{}", i + 1),
            kind: VertexKind::Pair {
                pra: params.pra.draw(&mut rng),
            },
        });
    }
    for i in 0..n_ndds {
        vertices.push(Vertex {
            name: format!("v{}", n + i + 1),
            kind: VertexKind::Ndd,
        });
    }

    let density = params.density.clamp(0.0, 1.0);
    let mut arcs = Vec::new();
    for source in 0..vertices.len() {
        for target in 0..n {
            if source == target {
                continue;
            }
            let pra = vertices[target].pra().unwrap_or(0) as f64;
            let p = density * (1.0 - pra / 100.0);
            if rng.gen::<f64>() < p {
                arcs.push(Arc {
                    source,
                    target,
                    weight: 1.0,
                });
            }
        }
    }
    Instance::new(vertices, arcs).expect("generator output is valid")
}

/// Matchable vertices together with one forced-inclusion plan per vertex.
#[derive(Clone, Debug)]
pub struct Matchability {
    pub vertices: BTreeSet<VertexId>,
    /// `(vertex, plan containing it)` for every matchable vertex.
    pub certificates: Vec<(VertexId, ExchangePlan)>,
}

/// Vertices covered by at least one non-empty feasible plan.
pub fn matchable_vertices(inst: &Instance, caps: Caps) -> Result<BTreeSet<VertexId>> {
    Ok(matchability(inst, caps)?.vertices)
}

/// A vertex is matchable iff some cycle or chain covers it. Its certificate
/// is the largest such structure, greedily packed with larger-first others.
pub fn matchability(inst: &Instance, caps: Caps) -> Result<Matchability> {
    Caps::new(caps.cycle, caps.chain)?;
    let mut structures = enumerate_structures(inst, caps);
    structures.sort_by_key(|s| std::cmp::Reverse(s.recipients().len()));
    let mut vertices = BTreeSet::new();
    let mut certificates = Vec::new();
    for v in 0..inst.len() {
        let Some(root) = structures.iter().position(|s| s.vertices().contains(&v)) else {
            continue;
        };
        let mut used = vec![false; inst.len()];
        let mut picked = Vec::new();
        for s in std::iter::once(&structures[root]).chain(&structures) {
            if s.vertices().iter().all(|&u| !used[u]) {
                s.vertices().iter().for_each(|&u| used[u] = true);
                picked.push(s);
            }
        }
        vertices.insert(v);
        certificates.push((v, ExchangePlan::from_structures(picked)));
    }
    Ok(Matchability {
        vertices,
        certificates,
    })
}

/// Pairs in `matchable` whose PRA is at least `threshold` (inclusive).
pub fn hard_to_match_set(
    inst: &Instance,
    threshold: u8,
    matchable: &BTreeSet<VertexId>,
) -> BTreeSet<VertexId> {
    inst.pairs()
        .filter(|v| matchable.contains(v))
        .filter(|&v| inst.vertex(v).pra().is_some_and(|p| p >= threshold))
        .collect()
}

/// Instance with unmatchable vertices removed, plus seed columns.
#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub instance: Instance,
    /// Names of the vertices that were dropped.
    pub removed: Vec<String>,
    /// One forced-inclusion plan per remaining pair, expressed on `instance`.
    pub seed_plans: Vec<ExchangePlan>,
}

pub fn preprocess(inst: &Instance, caps: Caps) -> Result<Preprocessed> {
    let m = matchability(inst, caps)?;
    let removed = (0..inst.len())
        .filter(|v| !m.vertices.contains(v))
        .map(|v| inst.name(v).to_string())
        .collect();
    let instance = inst.restrict(&m.vertices);
    let mut seed_plans: Vec<ExchangePlan> = Vec::new();
    for (v, plan) in &m.certificates {
        if !inst.is_pair(*v) {
            continue;
        }
        let mapped = plan.remap(inst, &instance);
        if !seed_plans.contains(&mapped) {
            seed_plans.push(mapped);
        }
    }
    Ok(Preprocessed {
        instance,
        removed,
        seed_plans,
    })
}
