//! Pairwise, k-wise, and global consistency deciders; the
//! running-intersection chase on acyclic schemas; the path-of-length-3
//! reduction from transportation problems; and the Tseitin-style
//! counterexample generator for cyclic schemas.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypergraph::{
    AcyclicityCertificate, AcyclicityVerdict, CoreKind, Hypergraph, SafeDeletionStep,
};
use crate::joins::{has_witnessing_join, verify_witness, witness_join_auto, JoinOutcome};
use crate::krelation::{
    inner_consistent, tuple_from_values, AttributeSet, KRelation, Tuple,
};
use crate::monoid::{MonoidHandle, Value};
use crate::transport::{SolveOutcome, TransportInstance, TransportSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Pairwise,
    KWise(usize),
    Global,
}

#[derive(Debug, Clone)]
pub enum Reason {
    /// The marginals on the common attributes differ.
    InnerInconsistency { common: Vec<String> },
    /// Inner consistent, but the block transportation instance for this
    /// shared tuple has no solution.
    TransportInfeasible { block: String },
    /// An exhaustive witness search refuted every candidate.
    ExhaustiveExhausted { detail: String },
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::InnerInconsistency { .. } => "inner-inconsistency",
            Reason::TransportInfeasible { .. } => "transport-infeasible",
            Reason::ExhaustiveExhausted { .. } => "exhaustive-exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    /// Every checked subset has a verified witness.
    Consistent {
        witnesses: Vec<(Vec<usize>, KRelation)>,
    },
    Inconsistent {
        failing: Vec<usize>,
        reason: Reason,
    },
    /// No declared capability yields a decision procedure. Distinct from
    /// inconsistent by design.
    Undecidable { detail: String },
    BudgetExceeded,
}

#[derive(Debug, Clone)]
pub struct ConsistencyVerdict {
    pub level: Level,
    pub outcome: Outcome,
    /// Solver/join routes actually used, for report auditability.
    pub methods: Vec<String>,
}

fn note_method(methods: &mut Vec<String>, name: &str) {
    if !methods.iter().any(|m| m == name) {
        methods.push(name.to_string());
    }
}

/// Decides the consistency of two relations: inner consistency first (it
/// is necessary), then a witnessing join / per-block transportation solve
/// chosen by capability.
pub fn check_pair(r: &KRelation, s: &KRelation, budget: u64) -> Result<ConsistencyVerdict> {
    let mut methods = Vec::new();
    let outcome = check_pair_outcome(r, s, budget, &mut methods)?;
    Ok(ConsistencyVerdict {
        level: Level::Pairwise,
        outcome,
        methods,
    })
}

fn check_pair_outcome(
    r: &KRelation,
    s: &KRelation,
    budget: u64,
    methods: &mut Vec<String>,
) -> Result<Outcome> {
    if r.monoid != s.monoid {
        return Err(Error::MonoidMismatch);
    }
    let check = inner_consistent(r, s)?;
    if !check.consistent {
        return Ok(Outcome::Inconsistent {
            failing: vec![0, 1],
            reason: Reason::InnerInconsistency {
                common: check.common,
            },
        });
    }
    match witness_join_auto(r, s, budget) {
        Ok((JoinOutcome::Witness(w), method)) => {
            note_method(methods, method.name());
            debug_assert!(verify_witness(&w, &[r, s]).unwrap_or(false));
            Ok(Outcome::Consistent {
                witnesses: vec![(vec![0, 1], w)],
            })
        }
        Ok((JoinOutcome::Infeasible { block, common }, method)) => {
            note_method(methods, method.name());
            let (shared_attrs, _) = r.attrs.project(&common)?;
            Ok(Outcome::Inconsistent {
                failing: vec![0, 1],
                reason: Reason::TransportInfeasible {
                    block: block.display(&shared_attrs),
                },
            })
        }
        Ok((JoinOutcome::BudgetExceeded, _)) => Ok(Outcome::BudgetExceeded),
        Err(Error::CapabilityMissing { monoid, capability }) => Ok(Outcome::Undecidable {
            detail: format!("{monoid}: {capability}"),
        }),
        Err(e) => Err(e),
    }
}

fn combinations(m: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..q).collect();
    if q == 0 || q > m {
        return out;
    }
    loop {
        out.push(idx.clone());
        // advance the lexicographically next combination
        let mut i = q;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - q {
                break;
            }
        }
        if idx[i] == i + m - q {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..q {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Decides k-wise consistency: every subset of size at most k must have a
/// witness. Size-2 subsets go through `check_pair`; larger subsets are
/// decided by the chase on acyclic sub-schemas when the monoid has the
/// transportation property, and otherwise by exhaustive witness search
/// over the candidate support.
pub fn check_kwise(
    relations: &[KRelation],
    k: usize,
    budget: u64,
) -> Result<ConsistencyVerdict> {
    let m = relations.len();
    if k < 1 || k > m {
        return Err(Error::InvalidParams(format!(
            "k must be between 1 and the number of relations ({m}), got {k}"
        )));
    }
    for r in relations {
        if r.monoid != relations[0].monoid {
            return Err(Error::MonoidMismatch);
        }
    }
    let level = if k == m { Level::Global } else { Level::KWise(k) };
    let mut methods = Vec::new();
    let mut witnesses: Vec<(Vec<usize>, KRelation)> = Vec::new();

    for (i, r) in relations.iter().enumerate() {
        witnesses.push((vec![i], r.clone()));
    }
    if k >= 2 {
        for pair in combinations(m, 2) {
            let (i, j) = (pair[0], pair[1]);
            match check_pair_outcome(&relations[i], &relations[j], budget, &mut methods)? {
                Outcome::Consistent { witnesses: ws } => {
                    for (_, w) in ws {
                        witnesses.push((vec![i, j], w));
                    }
                }
                Outcome::Inconsistent { reason, .. } => {
                    return Ok(ConsistencyVerdict {
                        level,
                        outcome: Outcome::Inconsistent {
                            failing: vec![i, j],
                            reason,
                        },
                        methods,
                    })
                }
                Outcome::Undecidable { detail } => {
                    return Ok(ConsistencyVerdict {
                        level,
                        outcome: Outcome::Undecidable { detail },
                        methods,
                    })
                }
                Outcome::BudgetExceeded => {
                    return Ok(ConsistencyVerdict {
                        level,
                        outcome: Outcome::BudgetExceeded,
                        methods,
                    })
                }
            }
        }
    }
    for q in 3..=k {
        for subset in combinations(m, q) {
            let rels: Vec<&KRelation> = subset.iter().map(|&i| &relations[i]).collect();
            match decide_global(&rels, budget, &mut methods)? {
                GlobalOutcome::Witness(w) => witnesses.push((subset.clone(), w)),
                GlobalOutcome::Inconsistent(reason) => {
                    return Ok(ConsistencyVerdict {
                        level,
                        outcome: Outcome::Inconsistent {
                            failing: subset,
                            reason,
                        },
                        methods,
                    })
                }
                GlobalOutcome::Undecidable(detail) => {
                    return Ok(ConsistencyVerdict {
                        level,
                        outcome: Outcome::Undecidable { detail },
                        methods,
                    })
                }
                GlobalOutcome::BudgetExceeded => {
                    return Ok(ConsistencyVerdict {
                        level,
                        outcome: Outcome::BudgetExceeded,
                        methods,
                    })
                }
            }
        }
    }
    Ok(ConsistencyVerdict {
        level,
        outcome: Outcome::Consistent { witnesses },
        methods,
    })
}

pub fn check_global(relations: &[KRelation], budget: u64) -> Result<ConsistencyVerdict> {
    check_kwise(relations, relations.len(), budget)
}

enum GlobalOutcome {
    Witness(KRelation),
    Inconsistent(Reason),
    Undecidable(String),
    BudgetExceeded,
}

/// The schema hypergraph of a collection: vertices are the attribute
/// names, edges the attribute sets.
pub fn schema_of(relations: &[&KRelation]) -> Result<Hypergraph> {
    let mut vertices: Vec<String> = Vec::new();
    for r in relations {
        for a in r.attrs.names() {
            if !vertices.contains(a) {
                vertices.push(a.clone());
            }
        }
    }
    let edges: Vec<Vec<String>> = relations.iter().map(|r| r.attrs.names().to_vec()).collect();
    Hypergraph::new(vertices, edges)
}

/// Joint witness search for three or more relations; assumes all pairs
/// were already found consistent.
fn decide_global(
    rels: &[&KRelation],
    budget: u64,
    methods: &mut Vec<String>,
) -> Result<GlobalOutcome> {
    let monoid = rels[0].monoid.clone();
    let nonempty = rels.iter().filter(|r| !r.is_empty()).count();
    if nonempty == 0 {
        let mut union = rels[0].attrs.clone();
        for r in &rels[1..] {
            union = union.union(&r.attrs)?;
        }
        return Ok(GlobalOutcome::Witness(KRelation::empty(monoid, union)));
    }
    if nonempty < rels.len() {
        // an empty relation forces an empty witness, impossible beside a
        // non-empty one
        return Ok(GlobalOutcome::Inconsistent(Reason::InnerInconsistency {
            common: Vec::new(),
        }));
    }

    // candidate support: tuples over the union whose projections all lie
    // in the respective supports (the relational join of the supports)
    let mut union_attrs = rels[0].attrs.clone();
    for r in &rels[1..] {
        union_attrs = union_attrs.union(&r.attrs)?;
    }
    let mut candidates: Vec<Tuple> = rels[0].support();
    let mut cur_attrs = rels[0].attrs.clone();
    for r in &rels[1..] {
        let next_attrs = cur_attrs.union(&r.attrs)?;
        let common = cur_attrs.common_names(&r.attrs);
        let (_, cur_pos) = cur_attrs.project(&common)?;
        let (_, r_pos) = r.attrs.project(&common)?;
        let mut by_shared: BTreeMap<Tuple, Vec<&Tuple>> = BTreeMap::new();
        for t in r.rows().map(|(t, _)| t) {
            by_shared.entry(t.project(&r_pos)).or_default().push(t);
        }
        let mut next: BTreeSet<Tuple> = BTreeSet::new();
        for t in &candidates {
            if let Some(matches) = by_shared.get(&t.project(&cur_pos)) {
                for st in matches {
                    next.insert(crate::krelation::merge_tuples(
                        &cur_attrs, t, &r.attrs, st, &next_attrs,
                    ));
                    if next.len() as u64 > budget {
                        return Ok(GlobalOutcome::BudgetExceeded);
                    }
                }
            }
        }
        candidates = next.into_iter().collect();
        cur_attrs = next_attrs;
        if candidates.is_empty() {
            break;
        }
    }
    if candidates.is_empty() {
        // no tuple satisfies all support projections at once: the
        // mod-d-style certificate that refutes every witness outright
        return Ok(GlobalOutcome::Inconsistent(Reason::ExhaustiveExhausted {
            detail: "candidate support is empty while the relations are non-empty".into(),
        }));
    }

    // acyclic schema + transportation property: chase instead of searching
    let schema = schema_of(rels)?;
    let cert = schema.check_acyclic();
    if matches!(cert.verdict, AcyclicityVerdict::Acyclic { .. })
        && monoid.has_transportation_property()
        && has_witnessing_join(&monoid)
    {
        let owned: Vec<KRelation> = rels.iter().map(|r| (*r).clone()).collect();
        let w = chase_acyclic(&owned, &cert, budget)?;
        note_method(methods, "chase");
        return Ok(GlobalOutcome::Witness(w));
    }

    if monoid.caps.finite {
        note_method(methods, "exhaustive");
        return exhaustive_global(rels, &union_attrs, candidates, budget);
    }
    Ok(GlobalOutcome::Undecidable(format!(
        "monoid {} is infinite and has no applicable global decision procedure on this schema",
        monoid.name
    )))
}

/// Backtracking witness search over the candidate support of a finite
/// monoid. Candidates take values in enumeration order (zero first);
/// pruning keeps every per-tuple marginal reachable.
fn exhaustive_global(
    rels: &[&KRelation],
    union_attrs: &AttributeSet,
    candidates: Vec<Tuple>,
    budget: u64,
) -> Result<GlobalOutcome> {
    let monoid = rels[0].monoid.clone();
    let elems = monoid.enumerate()?;
    let k = elems.len();
    if k > 128 {
        return Err(Error::InvalidParams(format!(
            "finite monoid {} has {k} elements; exhaustive search supports at most 128",
            monoid.name
        )));
    }
    let index_of = |v: &Value| -> Result<usize> {
        elems
            .iter()
            .position(|e| e == v)
            .ok_or_else(|| Error::Internal("annotation missing from enumeration".into()))
    };
    let mut add = vec![vec![0usize; k]; k];
    for i in 0..k {
        for j in 0..k {
            add[i][j] = index_of(&monoid.add(&elems[i], &elems[j]))?;
        }
    }
    let zero = index_of(&monoid.zero())?;

    // constraint groups: one per (relation, support tuple)
    struct Group {
        members: Vec<usize>,
        target: usize,
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut member_groups: Vec<Vec<usize>> = vec![Vec::new(); candidates.len()];
    for r in rels {
        let (_, pos) = union_attrs.project(r.attrs.names())?;
        let mut by_proj: BTreeMap<Tuple, Vec<usize>> = BTreeMap::new();
        for (ci, cand) in candidates.iter().enumerate() {
            by_proj.entry(cand.project(&pos)).or_default().push(ci);
        }
        for (t, v) in r.rows() {
            let members = by_proj.remove(t).unwrap_or_default();
            if members.is_empty() {
                // a support tuple no candidate projects to: unwitnessable
                return Ok(GlobalOutcome::Inconsistent(Reason::ExhaustiveExhausted {
                    detail: format!(
                        "support tuple {} of a relation has no candidate extension",
                        t.display(&r.attrs)
                    ),
                }));
            }
            let gid = groups.len();
            for &ci in &members {
                member_groups[ci].push(gid);
            }
            groups.push(Group {
                members,
                target: index_of(v)?,
            });
        }
        // candidates projecting outside the support would break the
        // marginal; they must sum to zero, i.e. all be zero (positivity)
        for (t, members) in by_proj {
            let gid = groups.len();
            for &ci in &members {
                member_groups[ci].push(gid);
            }
            groups.push(Group { members, target: zero });
            let _ = t;
        }
    }

    let max_group = groups.iter().map(|g| g.members.len()).max().unwrap_or(0);
    let mut back: BTreeMap<usize, Vec<u128>> = BTreeMap::new();
    for g in &groups {
        back.entry(g.target).or_insert_with(|| {
            let mut layers = vec![0u128; max_group + 1];
            layers[0] = 1u128 << g.target;
            for step in 1..=max_group {
                let mut mask = 0u128;
                for s in 0..k {
                    if (0..k).any(|e| layers[step - 1] & (1u128 << add[s][e]) != 0) {
                        mask |= 1u128 << s;
                    }
                }
                layers[step] = mask;
            }
            layers
        });
    }
    let reachable =
        |target: usize, partial: usize, steps: usize| back[&target][steps] & (1u128 << partial) != 0;

    let n = candidates.len();
    let mut assign = vec![zero; n];
    let mut choice = vec![0usize; n];
    let mut gsum: Vec<usize> = groups.iter().map(|_| zero).collect();
    let mut gleft: Vec<usize> = groups.iter().map(|g| g.members.len()).collect();
    let mut nodes: u64 = 0;
    let mut at = 0usize;
    loop {
        if at == n {
            let rows: Vec<(Tuple, Value)> = candidates
                .iter()
                .cloned()
                .zip(assign.iter().map(|&e| elems[e].clone()))
                .collect();
            let w = KRelation::accumulate(monoid.clone(), union_attrs.clone(), rows);
            debug_assert!(verify_witness(&w, rels).unwrap_or(false));
            return Ok(GlobalOutcome::Witness(w));
        }
        let mut advanced = false;
        while choice[at] < k {
            let e = choice[at];
            nodes += 1;
            if nodes > budget {
                return Ok(GlobalOutcome::BudgetExceeded);
            }
            let ok = member_groups[at].iter().all(|&gid| {
                let s = add[gsum[gid]][e];
                reachable(groups[gid].target, s, gleft[gid] - 1)
            });
            if ok {
                assign[at] = e;
                for &gid in &member_groups[at] {
                    gsum[gid] = add[gsum[gid]][e];
                    gleft[gid] -= 1;
                }
                choice[at] += 1;
                at += 1;
                if at < n {
                    choice[at] = 0;
                }
                advanced = true;
                break;
            }
            choice[at] += 1;
        }
        if !advanced {
            if at == 0 {
                return Ok(GlobalOutcome::Inconsistent(Reason::ExhaustiveExhausted {
                    detail: format!("all assignments over {n} candidate tuples refuted"),
                }));
            }
            at -= 1;
            let e = assign[at];
            for &gid in &member_groups[at] {
                gleft[gid] += 1;
                // undo the running sum by recomputing from scratch for the
                // group (groups are small)
                let gi = &groups[gid];
                let mut s = zero;
                for &ci in &gi.members {
                    if ci < at {
                        s = add[s][assign[ci]];
                    }
                }
                gsum[gid] = s;
            }
            let _ = e;
        }
    }
}

/// The running-intersection chase: T_1 = R_1, T_i = T_{i-1} joined with
/// R_i by the monoid's witnessing join, following the certificate's
/// listing. The result witnesses the global consistency of the inputs.
pub fn chase_acyclic(
    relations: &[KRelation],
    cert: &AcyclicityCertificate,
    budget: u64,
) -> Result<KRelation> {
    if relations.is_empty() {
        return Err(Error::InvalidParams("no relations to chase".into()));
    }
    let monoid = relations[0].monoid.clone();
    if relations.len() > 1 && !has_witnessing_join(&monoid) {
        return Err(Error::CapabilityMissing {
            monoid: monoid.name.clone(),
            capability: "witnessing join for the chase".into(),
        });
    }
    let listing = match &cert.verdict {
        AcyclicityVerdict::Acyclic { listing, .. } => listing,
        AcyclicityVerdict::Cyclic { .. } => {
            return Err(Error::InvalidHypergraph(
                "chase requires an acyclic certificate".into(),
            ))
        }
    };
    let schema: Hypergraph = {
        let refs: Vec<&KRelation> = relations.iter().collect();
        schema_of(&refs)?
    };
    // map each relation to its schema edge, then order by listing position
    let edge_sets: Vec<BTreeSet<String>> = schema
        .edges_named()
        .into_iter()
        .map(|e| e.into_iter().collect())
        .collect();
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(relations.len());
    for (ri, r) in relations.iter().enumerate() {
        let set: BTreeSet<String> = r.attrs.names().iter().cloned().collect();
        let edge = edge_sets
            .iter()
            .position(|e| *e == set)
            .ok_or_else(|| Error::Internal("relation attrs not in schema".into()))?;
        let pos = listing
            .iter()
            .position(|&l| l == edge)
            .ok_or_else(|| Error::InvalidHypergraph("listing does not cover the schema".into()))?;
        order.push((pos, ri));
    }
    order.sort();

    let mut t = relations[order[0].1].clone();
    for &(_, ri) in &order[1..] {
        match witness_join_auto(&t, &relations[ri], budget)? {
            (JoinOutcome::Witness(w), _) => t = w,
            (JoinOutcome::Infeasible { block, common }, _) => {
                let (shared_attrs, _) = t.attrs.project(&common)?;
                return Err(Error::ComponentInfeasible(format!(
                    "chase step hit an infeasible block at {}",
                    block.display(&shared_attrs)
                )));
            }
            (JoinOutcome::BudgetExceeded, _) => {
                return Err(Error::ComponentInfeasible("chase step exceeded budget".into()))
            }
        }
    }
    for r in relations {
        if &t.marginal(r.attrs.names())? != r {
            return Err(Error::InnerInconsistent(
                "chase result does not reproduce an input relation; the inputs were not pairwise consistent"
                    .into(),
            ));
        }
    }
    Ok(t)
}

/// Decides a transportation instance by reducing to global consistency on
/// the path schema AB, BC, CD, as in the equivalence proof: the witness
/// values at (u_i, 0, 0, v_j) form the solution matrix.
pub fn transport_via_p3(inst: &TransportInstance, budget: u64) -> Result<SolveOutcome> {
    let monoid = inst.monoid.clone();
    if !crate::transport::is_balanced(inst) {
        return Ok(SolveOutcome::Unbalanced);
    }
    let total = monoid.sum(&inst.b);
    if monoid.is_zero(&total) {
        return Ok(SolveOutcome::Solved(TransportSolution {
            d: vec![vec![monoid.zero(); inst.cols()]; inst.rows()],
        }));
    }
    let m = inst.rows();
    let n = inst.cols();
    let mut ad_values: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
    ad_values.extend((1..=n).map(|j| format!("v{j}")));
    let ad = Arc::new(ad_values);
    let bits = Arc::new(vec!["0".to_string(), "1".to_string()]);

    let ab = AttributeSet::new(vec![
        ("A".to_string(), ad.clone()),
        ("B".to_string(), bits.clone()),
    ])?;
    let bc = AttributeSet::new(vec![
        ("B".to_string(), bits.clone()),
        ("C".to_string(), bits.clone()),
    ])?;
    let cd = AttributeSet::new(vec![
        ("C".to_string(), bits.clone()),
        ("D".to_string(), ad.clone()),
    ])?;

    let tup = |attrs: &AttributeSet, vals: &[(&str, String)]| -> Result<Tuple> {
        let map: BTreeMap<String, String> = vals
            .iter()
            .map(|(a, v)| (a.to_string(), v.clone()))
            .collect();
        tuple_from_values(attrs, &map)
    };

    let mut r_rows = Vec::new();
    let mut t_rows = Vec::new();
    for (i, bv) in inst.b.iter().enumerate() {
        let u = format!("u{}", i + 1);
        r_rows.push((tup(&ab, &[("A", u.clone()), ("B", "0".into())])?, bv.clone()));
        t_rows.push((tup(&cd, &[("C", "1".into()), ("D", u)])?, bv.clone()));
    }
    for (j, cv) in inst.c.iter().enumerate() {
        let v = format!("v{}", j + 1);
        r_rows.push((tup(&ab, &[("A", v.clone()), ("B", "1".into())])?, cv.clone()));
        t_rows.push((tup(&cd, &[("C", "0".into()), ("D", v)])?, cv.clone()));
    }
    let r = KRelation::new(monoid.clone(), ab, r_rows)?;
    let s = KRelation::new(
        monoid.clone(),
        bc.clone(),
        vec![
            (tup(&bc, &[("B", "0".into()), ("C", "0".into())])?, total.clone()),
            (tup(&bc, &[("B", "1".into()), ("C", "1".into())])?, total.clone()),
        ],
    )?;
    let t = KRelation::new(monoid.clone(), cd, t_rows)?;

    let rels = vec![r, s, t];
    let verdict = check_kwise(&rels, 3, budget)?;
    match verdict.outcome {
        Outcome::Consistent { witnesses } => {
            let w = witnesses
                .iter()
                .find(|(subset, _)| subset.len() == 3)
                .map(|(_, w)| w)
                .ok_or_else(|| Error::Internal("global witness missing".into()))?;
            let mut d = vec![vec![monoid.zero(); n]; m];
            for (i, row) in d.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    let t = tup(
                        &w.attrs,
                        &[
                            ("A", format!("u{}", i + 1)),
                            ("B", "0".into()),
                            ("C", "0".into()),
                            ("D", format!("v{}", j + 1)),
                        ],
                    )?;
                    *cell = w.annotation(&t);
                }
            }
            let sol = TransportSolution { d };
            if !crate::transport::verify_solution(inst, &sol) {
                return Err(Error::Internal(
                    "witness extraction produced an invalid transport solution".into(),
                ));
            }
            Ok(SolveOutcome::Solved(sol))
        }
        Outcome::Inconsistent { .. } => Ok(SolveOutcome::Infeasible),
        Outcome::BudgetExceeded => Ok(SolveOutcome::BudgetExceeded),
        Outcome::Undecidable { detail } => Err(Error::CapabilityMissing {
            monoid: monoid.name.clone(),
            capability: format!("global consistency on the path schema: {detail}"),
        }),
    }
}

/// Output of the counterexample generator: relations over the input
/// hypergraph's edges (in edge order), plus the core data that produced
/// them.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub relations: Vec<KRelation>,
    pub core: CoreKind,
    pub core_size: usize,
    pub w: Vec<String>,
    pub deletions: Vec<SafeDeletionStep>,
    /// annotation value a = d^k · c used on the core
    pub annotation: Value,
    pub uniform_k: u32,
    pub regular_d: u64,
}

/// Builds a pairwise consistent but globally inconsistent collection over
/// a cyclic hypergraph: mod-d congruence relations on the extracted
/// C_n/H_n core, pulled back along the safe-deletion script.
pub fn generate_counterexample(
    h: &Hypergraph,
    monoid: &MonoidHandle,
    c: &Value,
) -> Result<Counterexample> {
    monoid.validate(c)?;
    if monoid.is_zero(c) {
        return Err(Error::InvalidParams("element c must be non-zero".into()));
    }
    let cert = h.check_acyclic();
    let (core_kind, core_size, w, deletions) = match cert.verdict {
        AcyclicityVerdict::Cyclic {
            core,
            n,
            w,
            deletions,
        } => (core, n, w, deletions),
        AcyclicityVerdict::Acyclic { .. } => {
            return Err(Error::InvalidHypergraph(
                "counterexamples exist only over cyclic hypergraphs".into(),
            ))
        }
    };

    // forward states of the script; the last one is the core R(H[W])
    let states = forward_states(h, &deletions)?;
    let core = states.last().expect("nonempty").clone();
    if !core.is_named_core(core_kind, core_size) {
        return Err(Error::Internal("extracted core is not C_n/H_n".into()));
    }

    let (k, d) = uniform_regular(&core)?;
    let a = monoid.n_times(c, (d as u64).pow(k));
    let domain = Arc::new((0..d).map(|i| i.to_string()).collect::<Vec<_>>());
    let core_rels = tseitin_relations(&core, monoid, &a, &domain)?;
    let relations = invert_script(&states, &deletions, core_rels, &domain)?;
    Ok(Counterexample {
        relations,
        core: core_kind,
        core_size,
        w,
        deletions,
        annotation: a,
        uniform_k: k,
        regular_d: d as u64,
    })
}

/// The hypergraph states a safe-deletion script passes through, starting
/// at `h` and ending at the reduced induced core.
pub(crate) fn forward_states(h: &Hypergraph, steps: &[SafeDeletionStep]) -> Result<Vec<Hypergraph>> {
    let mut states = vec![h.clone()];
    for step in steps {
        let next = states
            .last()
            .expect("nonempty")
            .replay(std::slice::from_ref(step))?;
        states.push(next);
    }
    Ok(states)
}

/// (k, d) of a k-uniform d-regular hypergraph.
pub(crate) fn uniform_regular(h: &Hypergraph) -> Result<(u32, usize)> {
    let edges = h.edges_named();
    let k = edges.first().map(|e| e.len()).unwrap_or(0);
    if k == 0 || edges.iter().any(|e| e.len() != k) {
        return Err(Error::InvalidHypergraph("core is not uniform".into()));
    }
    let mut degrees = BTreeMap::new();
    for e in &edges {
        for v in e {
            *degrees.entry(v.clone()).or_insert(0usize) += 1;
        }
    }
    let d = *degrees.values().next().expect("nonempty");
    if degrees.values().any(|&x| x != d) || d < 2 {
        return Err(Error::InvalidHypergraph("core is not d-regular with d >= 2".into()));
    }
    Ok((k as u32, d))
}

/// The congruence relations of the counterexample: every edge holds all
/// tuples with coordinate sum ≡ 0 (mod d) at annotation `a`, except the
/// last edge which holds the tuples with sum ≡ 1 (mod d).
pub(crate) fn tseitin_relations(
    core: &Hypergraph,
    monoid: &MonoidHandle,
    a: &Value,
    domain: &Arc<Vec<String>>,
) -> Result<Vec<KRelation>> {
    let d = domain.len() as u64;
    let m = core.edge_count();
    let mut out = Vec::with_capacity(m);
    for idx in 0..m {
        let residue = if idx == m - 1 { 1 } else { 0 };
        let names = core.edge_names(idx);
        let attrs = AttributeSet::new(
            names
                .iter()
                .map(|n| (n.clone(), domain.clone()))
                .collect(),
        )?;
        let mut rows = Vec::new();
        for t in attrs.all_tuples() {
            let sum: u64 = t.0.iter().map(|&x| x as u64).sum();
            if sum % d == residue {
                rows.push((t, a.clone()));
            }
        }
        out.push(KRelation::new(monoid.clone(), attrs, rows)?);
    }
    Ok(out)
}

/// Walks the safe-deletion script backwards, building relations for each
/// upstairs hypergraph from the downstairs collection: a deleted covered
/// edge takes the marginal of its cover; a deleted vertex is reinstated at
/// the default value (first domain element) with zero elsewhere.
pub(crate) fn invert_script(
    states: &[Hypergraph],
    steps: &[SafeDeletionStep],
    core_rels: Vec<KRelation>,
    domain: &Arc<Vec<String>>,
) -> Result<Vec<KRelation>> {
    let mut rels = core_rels;
    for (i, step) in steps.iter().enumerate().rev() {
        let up = &states[i];
        let down = &states[i + 1];
        rels = invert_step(up, down, step, &rels, domain)?;
    }
    Ok(rels)
}

fn edge_index_by_set(h: &Hypergraph, set: &BTreeSet<String>) -> Result<usize> {
    for i in 0..h.edge_count() {
        let e: BTreeSet<String> = h.edge_names(i).into_iter().collect();
        if e == *set {
            return Ok(i);
        }
    }
    Err(Error::Internal("edge not found in script state".into()))
}

fn invert_step(
    up: &Hypergraph,
    down: &Hypergraph,
    step: &SafeDeletionStep,
    down_rels: &[KRelation],
    domain: &Arc<Vec<String>>,
) -> Result<Vec<KRelation>> {
    let monoid = down_rels
        .first()
        .map(|r| r.monoid.clone())
        .ok_or_else(|| Error::Internal("empty downstairs collection".into()))?;
    let default_value = domain
        .first()
        .ok_or_else(|| Error::Internal("empty domain".into()))?
        .clone();
    let mut out = Vec::with_capacity(up.edge_count());
    match step {
        SafeDeletionStep::CoveredEdge { edge, covering } => {
            let edge_set: BTreeSet<String> = edge.iter().cloned().collect();
            let cover_set: BTreeSet<String> = covering.iter().cloned().collect();
            let cover_idx = edge_index_by_set(down, &cover_set)?;
            for i in 0..up.edge_count() {
                let set: BTreeSet<String> = up.edge_names(i).into_iter().collect();
                if set == edge_set {
                    let names: Vec<String> = edge_set.iter().cloned().collect();
                    out.push(down_rels[cover_idx].marginal(&names)?);
                } else {
                    out.push(down_rels[edge_index_by_set(down, &set)?].clone());
                }
            }
        }
        SafeDeletionStep::Vertex { vertex } => {
            for i in 0..up.edge_count() {
                let names = up.edge_names(i);
                if !names.contains(vertex) {
                    let set: BTreeSet<String> = names.into_iter().collect();
                    out.push(down_rels[edge_index_by_set(down, &set)?].clone());
                    continue;
                }
                let reduced: BTreeSet<String> =
                    names.iter().filter(|n| *n != vertex).cloned().collect();
                let attrs = AttributeSet::new(
                    names.iter().map(|n| (n.clone(), domain.clone())).collect(),
                )?;
                if reduced.is_empty() {
                    // the edge was exactly {vertex}: a single default-valued
                    // tuple carrying the collection's common total
                    let total = down_rels[0].total();
                    let map: BTreeMap<String, String> =
                        [(vertex.clone(), default_value.clone())].into();
                    let t = tuple_from_values(&attrs, &map)?;
                    out.push(KRelation::new(monoid.clone(), attrs, vec![(t, total)])?);
                    continue;
                }
                let src = &down_rels[edge_index_by_set(down, &reduced)?];
                let mut rows = Vec::new();
                for (t, v) in src.rows() {
                    let mut map: BTreeMap<String, String> = src
                        .attrs
                        .names()
                        .iter()
                        .enumerate()
                        .map(|(pos, n)| {
                            (
                                n.clone(),
                                src.attrs.domain_at(pos)[t.0[pos] as usize].clone(),
                            )
                        })
                        .collect();
                    map.insert(vertex.clone(), default_value.clone());
                    rows.push((tuple_from_values(&attrs, &map)?, v.clone()));
                }
                out.push(KRelation::new(monoid.clone(), attrs, rows)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        n2_inner_consistent_pair, path3_pairwise_witnesses, path3_relations,
        r1_inner_consistent_pair,
    };
    use crate::hypergraph::{make_named, NamedKind};
    use crate::monoid::Monoid;
    use crate::transport::DEFAULT_BUDGET;

    #[test]
    fn prop37_pairs_are_consistent() {
        let (r1, r2, r3) = path3_relations();
        for (a, b) in [(&r1, &r2), (&r2, &r3), (&r1, &r3)] {
            let verdict = check_pair(a, b, DEFAULT_BUDGET).unwrap();
            match verdict.outcome {
                Outcome::Consistent { witnesses } => {
                    let (_, w) = &witnesses[0];
                    assert!(verify_witness(w, &[a, b]).unwrap());
                }
                other => panic!("expected consistent, got {other:?}"),
            }
        }
    }

    #[test]
    fn paper_witnesses_check_out() {
        let (r1, r2, r3) = path3_relations();
        let (r12, r23, r13) = path3_pairwise_witnesses();
        assert!(verify_witness(&r12, &[&r1, &r2]).unwrap());
        assert!(verify_witness(&r23, &[&r2, &r3]).unwrap());
        assert!(verify_witness(&r13, &[&r1, &r3]).unwrap());
    }

    #[test]
    fn sec56_pair_is_transport_infeasible() {
        let (r, s) = n2_inner_consistent_pair();
        let verdict = check_pair(&r, &s, DEFAULT_BUDGET).unwrap();
        match verdict.outcome {
            Outcome::Inconsistent { reason, .. } => {
                assert_eq!(reason.code(), "transport-infeasible");
            }
            other => panic!("expected transport-infeasible, got {other:?}"),
        }
    }

    #[test]
    fn empty_marginal_mismatch_is_inner_inconsistency() {
        let n = Monoid::naturals();
        let a = crate::fixtures::attrs(&[("A", &["x"])]);
        let b = crate::fixtures::attrs(&[("B", &["y"])]);
        let r = crate::fixtures::rel(&n, &a, &[(&[("A", "x")], Value::nat(2))]);
        let s = crate::fixtures::rel(&n, &b, &[(&[("B", "y")], Value::nat(3))]);
        let verdict = check_pair(&r, &s, DEFAULT_BUDGET).unwrap();
        match verdict.outcome {
            Outcome::Inconsistent { reason, .. } => {
                assert_eq!(reason.code(), "inner-inconsistency");
            }
            other => panic!("expected inner inconsistency, got {other:?}"),
        }
    }

    #[test]
    fn prop37_triple_pairwise_but_not_global() {
        let (r1, r2, r3) = path3_relations();
        let rels = vec![r1, r2, r3];
        let verdict = check_kwise(&rels, 2, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Consistent { .. }));

        let verdict = check_kwise(&rels, 3, DEFAULT_BUDGET).unwrap();
        match verdict.outcome {
            Outcome::Inconsistent { failing, reason } => {
                assert_eq!(failing, vec![0, 1, 2]);
                assert_eq!(reason.code(), "exhaustive-exhausted");
            }
            other => panic!("expected global inconsistency, got {other:?}"),
        }
    }

    #[test]
    fn single_relation_is_consistent_at_k1() {
        let (r1, _, _) = path3_relations();
        let verdict = check_kwise(&[r1.clone()], 1, DEFAULT_BUDGET).unwrap();
        match verdict.outcome {
            Outcome::Consistent { witnesses } => {
                assert_eq!(witnesses.len(), 1);
                assert_eq!(witnesses[0].1, r1);
            }
            other => panic!("expected consistent, got {other:?}"),
        }
    }

    #[test]
    fn r1_pair_is_undecidable_here() {
        let (r, s) = r1_inner_consistent_pair();
        let verdict = check_pair(&r, &s, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Undecidable { .. }));
    }

    #[test]
    fn chase_on_booleans_matches_relational_join() {
        use crate::fixtures::{attrs, rel};
        let b = Monoid::boolean();
        let ab = attrs(&[("A", &["a1", "a2"]), ("B", &["b1", "b2"])]);
        let bc = attrs(&[("B", &["b1", "b2"]), ("C", &["c1"])]);
        let r = rel(
            &b,
            &ab,
            &[
                (&[("A", "a1"), ("B", "b1")], Value::nat(1)),
                (&[("A", "a2"), ("B", "b2")], Value::nat(1)),
            ],
        );
        let s = rel(
            &b,
            &bc,
            &[
                (&[("B", "b1"), ("C", "c1")], Value::nat(1)),
                (&[("B", "b2"), ("C", "c1")], Value::nat(1)),
            ],
        );
        let rels = vec![r.clone(), s.clone()];
        let refs: Vec<&KRelation> = rels.iter().collect();
        let schema = schema_of(&refs).unwrap();
        let cert = schema.check_acyclic();
        let t = chase_acyclic(&rels, &cert, DEFAULT_BUDGET).unwrap();
        let joined = crate::joins::standard_join(&r, &s).unwrap();
        assert_eq!(t, joined);
    }

    #[test]
    fn chase_single_relation_is_identity() {
        let (r1, _, _) = path3_relations();
        let rels = vec![r1.clone()];
        let refs: Vec<&KRelation> = rels.iter().collect();
        let cert = schema_of(&refs).unwrap().check_acyclic();
        assert_eq!(chase_acyclic(&rels, &cert, DEFAULT_BUDGET).unwrap(), r1);
    }

    #[test]
    fn p3_reduction_agrees_on_the_paper_instances() {
        let n2 = Monoid::truncated_naturals(2).unwrap();
        let inst = TransportInstance::new(
            n2,
            vec![Value::nat(1), Value::nat(1), Value::nat(1)],
            vec![Value::nat(2), Value::nat(2)],
        )
        .unwrap();
        assert_eq!(
            transport_via_p3(&inst, DEFAULT_BUDGET).unwrap(),
            SolveOutcome::Infeasible
        );

        let b = Monoid::boolean();
        let inst = TransportInstance::new(
            b.clone(),
            vec![Value::nat(1), Value::nat(0), Value::nat(1)],
            vec![Value::nat(1), Value::nat(1)],
        )
        .unwrap();
        match transport_via_p3(&inst, DEFAULT_BUDGET).unwrap() {
            SolveOutcome::Solved(sol) => {
                assert!(crate::transport::verify_solution(&inst, &sol));
            }
            other => panic!("expected a solution, got {other:?}"),
        }

        // zero totals give the all-zero matrix
        let inst = TransportInstance::new(
            b.clone(),
            vec![Value::nat(0), Value::nat(0)],
            vec![Value::nat(0)],
        )
        .unwrap();
        match transport_via_p3(&inst, DEFAULT_BUDGET).unwrap() {
            SolveOutcome::Solved(sol) => {
                assert!(sol.d.iter().flatten().all(|v| *v == Value::nat(0)));
            }
            other => panic!("expected the zero matrix, got {other:?}"),
        }
    }

    #[test]
    fn counterexample_on_c3_over_boolean() {
        let c3 = make_named(NamedKind::Cycle, 3).unwrap();
        let b = Monoid::boolean();
        let cx = generate_counterexample(&c3, &b, &Value::nat(1)).unwrap();
        assert_eq!(cx.relations.len(), 3);
        assert_eq!(cx.regular_d, 2);
        assert_eq!(cx.uniform_k, 2);
        // parity relations on {0,1}^2: edges 1,2 even, edge 3 odd
        for rel in &cx.relations {
            assert_eq!(rel.support_size(), 2);
        }
        let verdict = check_kwise(&cx.relations, 2, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Consistent { .. }));
        let verdict = check_global(&cx.relations, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Inconsistent { .. }));
    }

    #[test]
    fn counterexample_on_c3_over_n2_uses_truncated_annotation() {
        let c3 = make_named(NamedKind::Cycle, 3).unwrap();
        let n2 = Monoid::truncated_naturals(2).unwrap();
        let cx = generate_counterexample(&c3, &n2, &Value::nat(1)).unwrap();
        // a = 2^2 · 1 truncates to 2
        assert_eq!(cx.annotation, Value::nat(2));
        let verdict = check_kwise(&cx.relations, 2, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Consistent { .. }));
        let verdict = check_global(&cx.relations, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Inconsistent { .. }));
    }

    #[test]
    fn counterexample_on_c4_over_naturals_uses_parity_certificate() {
        let c4 = make_named(NamedKind::Cycle, 4).unwrap();
        let n = Monoid::naturals();
        let cx = generate_counterexample(&c4, &n, &Value::nat(1)).unwrap();
        assert_eq!(cx.annotation, Value::nat(4));
        let verdict = check_kwise(&cx.relations, 2, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Consistent { .. }));
        let verdict = check_global(&cx.relations, DEFAULT_BUDGET).unwrap();
        match verdict.outcome {
            Outcome::Inconsistent { reason, .. } => {
                assert_eq!(reason.code(), "exhaustive-exhausted");
                match reason {
                    Reason::ExhaustiveExhausted { detail } => {
                        assert!(detail.contains("candidate support is empty"));
                    }
                    _ => unreachable!(),
                }
            }
            other => panic!("expected inconsistent, got {other:?}"),
        }
    }

    #[test]
    fn counterexample_rejects_acyclic_schemas() {
        let p3 = make_named(NamedKind::Path, 3).unwrap();
        let b = Monoid::boolean();
        assert!(generate_counterexample(&p3, &b, &Value::nat(1)).is_err());
    }
}
