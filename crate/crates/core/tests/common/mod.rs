//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::time::{Duration, Instant};

use kepfair::colgen::{compute_reference_point, solve_scheme, ColGenParams, Prepared, SchemeRun};
use kepfair::enumeration::{count_structures, enumerate_plans, ExchangePlan};
use kepfair::instance::{generate_instance, Caps, Instance};
use kepfair::schemes::{FairnessConcept, SchemeKind};
use kepfair::Result;

pub fn plan(inst: &Instance, text: &str) -> ExchangePlan {
    ExchangePlan::parse(text, inst, Caps::default()).unwrap()
}

/// Every valid scheme kind for `concept`.
pub fn all_schemes(concept: FairnessConcept) -> Vec<SchemeKind> {
    if concept == FairnessConcept::Utilitarian {
        vec![SchemeKind::Single]
    } else {
        vec![SchemeKind::Single, SchemeKind::swp_default(), SchemeKind::Nswp]
    }
}

/// The example pool followed by `n` generated instances with at most 12 vertices and
/// a plan count small enough for the full-column master.
pub fn oracle_instances(n: usize) -> Vec<(String, Instance)> {
    let mut out = vec![("example".to_string(), kepfair::instance::example_pool())];
    let mut seed = 0u64;
    while out.len() < n + 1 {
        seed += 1;
        let pairs = 5 + (seed % 6) as usize;
        let inst = generate_instance(pairs, 0.15, 0.3, seed);
        if inst.len() > 12 || count_structures(&inst, Caps::default(), 200) >= 200 {
            continue;
        }
        match enumerate_plans(&inst, Caps::default(), Some(5000)) {
            Ok(p) if p.len() > 1 => out.push((format!("gen{seed}"), inst)),
            _ => {}
        }
    }
    out
}

/// Reference point followed by the scheme itself.
pub fn solve(prep: &Prepared, concept: FairnessConcept, kind: SchemeKind) -> Result<SchemeRun> {
    solve_with(prep, concept, kind, &ColGenParams::default())
}

pub fn solve_with(prep: &Prepared, concept: FairnessConcept, kind: SchemeKind, params: &ColGenParams) -> Result<SchemeRun> {
    let deadline = Instant::now() + Duration::from_secs(600);
    let (reference, pool) = compute_reference_point(prep, concept, params, deadline)?;
    solve_scheme(prep, concept, kind, reference, &pool, params, deadline)
}
