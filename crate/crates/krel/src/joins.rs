//! Witness-producing joins: the standard semiring join, the Vorob'ev
//! semifield join, northwest corner joins, the component-wise join for
//! powers, and the exhaustive finite-monoid join — plus witness
//! verification and the capability dispatcher the chase uses.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::krelation::{inner_consistent, merge_tuples, AttributeSet, KRelation, Tuple};
use crate::monoid::{Monoid, MonoidHandle, Value};
use crate::transport::{
    solve_exhaustive, solve_northwest, SolveOutcome, TransportInstance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinMethod {
    Standard,
    Vorobev,
    Northwest,
    Componentwise,
    Exhaustive,
}

impl JoinMethod {
    pub fn name(&self) -> &'static str {
        match self {
            JoinMethod::Standard => "standard",
            JoinMethod::Vorobev => "vorobev",
            JoinMethod::Northwest => "northwest",
            JoinMethod::Componentwise => "componentwise",
            JoinMethod::Exhaustive => "exhaustive",
        }
    }

    pub fn parse(s: &str) -> Result<JoinMethod> {
        match s {
            "standard" => Ok(JoinMethod::Standard),
            "vorobev" => Ok(JoinMethod::Vorobev),
            "northwest" => Ok(JoinMethod::Northwest),
            "componentwise" => Ok(JoinMethod::Componentwise),
            "exhaustive" => Ok(JoinMethod::Exhaustive),
            other => Err(Error::Parse(format!("unknown join method `{other}`"))),
        }
    }
}

/// Outcome of a witness-producing join that can fail for monoid reasons
/// (exhaustive blocks) rather than precondition reasons.
#[derive(Debug, Clone)]
pub enum JoinOutcome {
    Witness(KRelation),
    /// Inner consistent, but some block transportation instance has no
    /// solution; carries the shared tuple of the failing block.
    Infeasible { block: Tuple, common: Vec<String> },
    BudgetExceeded,
}

fn same_monoid(r: &KRelation, s: &KRelation) -> Result<MonoidHandle> {
    if r.monoid != s.monoid {
        return Err(Error::MonoidMismatch);
    }
    Ok(r.monoid.clone())
}

/// W(t) = R(t[X]) × S(t[Y]); drops zero products. Witnesses consistency
/// exactly on additively absorptive, multiplicatively idempotent semirings.
pub fn standard_join(r: &KRelation, s: &KRelation) -> Result<KRelation> {
    let monoid = same_monoid(r, s)?;
    if monoid.caps.semiring.is_none() {
        return Err(Error::CapabilityMissing {
            monoid: monoid.name.clone(),
            capability: "semiring".into(),
        });
    }
    let union = r.attrs.union(&s.attrs)?;
    let common = r.attrs.common_names(&s.attrs);
    let (_, r_pos) = r.attrs.project(&common)?;
    let (_, s_pos) = s.attrs.project(&common)?;

    let mut by_shared: BTreeMap<Tuple, Vec<(&Tuple, &Value)>> = BTreeMap::new();
    for (t, v) in s.rows() {
        by_shared.entry(t.project(&s_pos)).or_default().push((t, v));
    }
    let mut out = Vec::new();
    for (rt, rv) in r.rows() {
        if let Some(matches) = by_shared.get(&rt.project(&r_pos)) {
            for (st, sv) in matches {
                let merged = merge_tuples(&r.attrs, rt, &s.attrs, st, &union);
                out.push((merged, monoid.multiply(rv, sv)?));
            }
        }
    }
    Ok(KRelation::accumulate(monoid, union, out))
}

/// W(t) = R(t[X]) × S(t[Y]) / R(t[X∩Y]) over a semifield; requires inner
/// consistency.
pub fn vorobev_join(r: &KRelation, s: &KRelation) -> Result<KRelation> {
    let monoid = same_monoid(r, s)?;
    if !monoid.caps.semifield {
        return Err(Error::CapabilityMissing {
            monoid: monoid.name.clone(),
            capability: "semifield".into(),
        });
    }
    let check = inner_consistent(r, s)?;
    if !check.consistent {
        return Err(Error::InnerInconsistent(check.common.join(",")));
    }
    let union = r.attrs.union(&s.attrs)?;
    let (_, r_pos) = r.attrs.project(&check.common)?;
    let (_, s_pos) = s.attrs.project(&check.common)?;
    let shared = check.left_marginal;

    let mut by_shared: BTreeMap<Tuple, Vec<(&Tuple, &Value)>> = BTreeMap::new();
    for (t, v) in s.rows() {
        by_shared.entry(t.project(&s_pos)).or_default().push((t, v));
    }
    let mut out = Vec::new();
    for (rt, rv) in r.rows() {
        let z = rt.project(&r_pos);
        let denom = shared.annotation(&z);
        if monoid.is_zero(&denom) {
            continue;
        }
        if let Some(matches) = by_shared.get(&z) {
            for (st, sv) in matches {
                let merged = merge_tuples(&r.attrs, rt, &s.attrs, st, &union);
                let num = monoid.multiply(rv, sv)?;
                out.push((merged, monoid.divide(&num, &denom)?));
            }
        }
    }
    Ok(KRelation::accumulate(monoid, union, out))
}

/// The per-shared-tuple block decomposition behind Theorem 4.2 (1)⇒(2):
/// for each tuple in the common-marginal support, the extensions in R form
/// the row margins and the extensions in S the column margins.
pub(crate) struct Block<'a> {
    pub shared: Tuple,
    pub rows: Vec<(&'a Tuple, Value)>,
    pub cols: Vec<(&'a Tuple, Value)>,
}

pub(crate) fn blocks<'a>(
    r: &'a KRelation,
    s: &'a KRelation,
    common: &[String],
) -> Result<Vec<Block<'a>>> {
    let (_, r_pos) = r.attrs.project(common)?;
    let (_, s_pos) = s.attrs.project(common)?;
    let mut map: BTreeMap<Tuple, (Vec<(&Tuple, Value)>, Vec<(&Tuple, Value)>)> = BTreeMap::new();
    for (t, v) in r.rows() {
        map.entry(t.project(&r_pos)).or_default().0.push((t, v.clone()));
    }
    for (t, v) in s.rows() {
        map.entry(t.project(&s_pos)).or_default().1.push((t, v.clone()));
    }
    Ok(map
        .into_iter()
        .map(|(shared, (rows, cols))| Block { shared, rows, cols })
        .collect())
}

fn assemble_blocks(
    monoid: MonoidHandle,
    union: AttributeSet,
    r: &KRelation,
    s: &KRelation,
    solved: Vec<(Block<'_>, Vec<Vec<Value>>)>,
) -> KRelation {
    let mut out = Vec::new();
    for (block, matrix) in solved {
        for (i, (rt, _)) in block.rows.iter().enumerate() {
            for (j, (st, _)) in block.cols.iter().enumerate() {
                let v = matrix[i][j].clone();
                if !monoid.is_zero(&v) {
                    out.push((merge_tuples(&r.attrs, rt, &s.attrs, st, &union), v));
                }
            }
        }
    }
    KRelation::accumulate(monoid, union, out)
}

/// Northwest corner join: one balanced block instance per shared tuple,
/// each solved by the NW recursion; the matrices assemble into a sparse
/// witness with |W'| ≤ |R'| + |S'|.
pub fn northwest_join(r: &KRelation, s: &KRelation) -> Result<KRelation> {
    let monoid = same_monoid(r, s)?;
    if !(monoid.caps.preorder
        && monoid.caps.weakly_cancellative
        && monoid.caps.totally_preordered)
    {
        return Err(Error::CapabilityMissing {
            monoid: monoid.name.clone(),
            capability: "northwest (weakly cancellative + totally preordered)".into(),
        });
    }
    let check = inner_consistent(r, s)?;
    if !check.consistent {
        return Err(Error::InnerInconsistent(check.common.join(",")));
    }
    let union = r.attrs.union(&s.attrs)?;
    let mut solved = Vec::new();
    for block in blocks(r, s, &check.common)? {
        let inst = TransportInstance::new(
            monoid.clone(),
            block.rows.iter().map(|(_, v)| v.clone()).collect(),
            block.cols.iter().map(|(_, v)| v.clone()).collect(),
        )?;
        let sol = solve_northwest(&inst)?;
        solved.push((block, sol.d));
    }
    Ok(assemble_blocks(monoid, union, r, s, solved))
}

/// Component-wise join: encode the power-monoid relations as base-monoid
/// relations with a fresh index attribute, join there, decode.
pub fn componentwise_join(r: &KRelation, s: &KRelation) -> Result<KRelation> {
    let monoid = same_monoid(r, s)?;
    let power = monoid.caps.power.clone().ok_or_else(|| Error::CapabilityMissing {
        monoid: monoid.name.clone(),
        capability: "power-structure".into(),
    })?;
    let check = inner_consistent(r, s)?;
    if !check.consistent {
        return Err(Error::InnerInconsistent(check.common.join(",")));
    }
    let base = power.base;

    // index attribute: a name no real attribute uses
    let mut index_attr = "#component".to_string();
    while r.attrs.position(&index_attr).is_some() || s.attrs.position(&index_attr).is_some() {
        index_attr.push('#');
    }
    let mut keys: Vec<String> = Vec::new();
    for (_, v) in r.rows().chain(s.rows()) {
        keys.extend(monoid.components(v)?.into_keys());
    }
    keys.sort();
    keys.dedup();
    if keys.is_empty() {
        // both relations are empty or all-zero; the empty relation works
        return Ok(KRelation::empty(monoid.clone(), r.attrs.union(&s.attrs)?));
    }
    let key_domain = std::sync::Arc::new(keys);

    let encode = |rel: &KRelation| -> Result<KRelation> {
        let mut pairs: Vec<(String, std::sync::Arc<Vec<String>>)> = rel
            .attrs
            .names()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), rel.attrs.domain_at(i).clone()))
            .collect();
        pairs.push((index_attr.clone(), key_domain.clone()));
        let attrs = AttributeSet::new(pairs)?;
        let positions: Vec<usize> = rel
            .attrs
            .names()
            .iter()
            .map(|n| attrs.position(n).expect("present"))
            .collect();
        let index_pos = attrs.position(&index_attr).expect("present");
        let mut rows = Vec::new();
        for (t, v) in rel.rows() {
            for (key, comp) in monoid.components(v)? {
                let ki = key_domain.iter().position(|k| *k == key).expect("collected") as u32;
                let mut vals = vec![0u32; attrs.len()];
                for (ri, &pos) in positions.iter().enumerate() {
                    vals[pos] = t.0[ri];
                }
                vals[index_pos] = ki;
                rows.push((Tuple(vals), comp));
            }
        }
        KRelation::new(base.clone(), attrs, rows)
    };

    let r0 = encode(r)?;
    let s0 = encode(s)?;
    let w0 = match base_witness_join(&r0, &s0)? {
        JoinOutcome::Witness(w) => w,
        JoinOutcome::Infeasible { .. } => {
            return Err(Error::ComponentInfeasible(
                "base join found an infeasible component block".into(),
            ))
        }
        JoinOutcome::BudgetExceeded => {
            return Err(Error::ComponentInfeasible("base join exceeded budget".into()))
        }
    };

    // decode: group the joined base relation by the non-index attributes
    let union = r.attrs.union(&s.attrs)?;
    let non_index: Vec<String> = union.names().to_vec();
    let (_, keep_pos) = w0.attrs.project(&non_index)?;
    let index_pos = w0.attrs.position(&index_attr).expect("present");
    let mut grouped: BTreeMap<Tuple, BTreeMap<String, Value>> = BTreeMap::new();
    for (t, v) in w0.rows() {
        let key = key_domain[t.0[index_pos] as usize].clone();
        let entry = grouped.entry(t.project(&keep_pos)).or_default();
        // components at distinct keys never collide
        entry.insert(key, v.clone());
    }
    let mut rows = Vec::new();
    for (t, comps) in grouped {
        rows.push((t, monoid.from_components(comps)?));
    }
    Ok(KRelation::accumulate(monoid, union, rows))
}

/// Base-method selection for the component-wise join: NW if the base has
/// the capability, else the canonical joins, else exhaustive-finite.
fn base_witness_join(r: &KRelation, s: &KRelation) -> Result<JoinOutcome> {
    let m = &r.monoid;
    if m.caps.preorder && m.caps.weakly_cancellative && m.caps.totally_preordered {
        return Ok(JoinOutcome::Witness(northwest_join(r, s)?));
    }
    if m.caps.lattice() {
        return Ok(JoinOutcome::Witness(standard_join(r, s)?));
    }
    if m.caps.semifield {
        return Ok(JoinOutcome::Witness(vorobev_join(r, s)?));
    }
    if m.caps.finite {
        return exhaustive_join(r, s, crate::transport::DEFAULT_BUDGET);
    }
    Err(Error::CapabilityMissing {
        monoid: m.name.clone(),
        capability: "no witnessing join applies to the base monoid".into(),
    })
}

/// Finite-monoid witnessing join: per-block exhaustive transportation
/// solving. Unlike the other joins this can discover that inner-consistent
/// relations are nonetheless inconsistent.
pub fn exhaustive_join(r: &KRelation, s: &KRelation, budget: u64) -> Result<JoinOutcome> {
    let monoid = same_monoid(r, s)?;
    if !monoid.caps.finite {
        return Err(Error::InfiniteMonoid(monoid.name.clone()));
    }
    let check = inner_consistent(r, s)?;
    if !check.consistent {
        return Err(Error::InnerInconsistent(check.common.join(",")));
    }
    let union = r.attrs.union(&s.attrs)?;
    let mut solved = Vec::new();
    for block in blocks(r, s, &check.common)? {
        let inst = TransportInstance::new(
            monoid.clone(),
            block.rows.iter().map(|(_, v)| v.clone()).collect(),
            block.cols.iter().map(|(_, v)| v.clone()).collect(),
        )?;
        match solve_exhaustive(&inst, budget)? {
            SolveOutcome::Solved(sol) => solved.push((block, sol.d)),
            SolveOutcome::Infeasible | SolveOutcome::Unbalanced => {
                return Ok(JoinOutcome::Infeasible {
                    block: block.shared,
                    common: check.common,
                })
            }
            SolveOutcome::BudgetExceeded => return Ok(JoinOutcome::BudgetExceeded),
        }
    }
    Ok(JoinOutcome::Witness(assemble_blocks(monoid, union, r, s, solved)))
}

/// Applies the requested join method.
pub fn join_with_method(
    r: &KRelation,
    s: &KRelation,
    method: JoinMethod,
    budget: u64,
) -> Result<JoinOutcome> {
    match method {
        JoinMethod::Standard => Ok(JoinOutcome::Witness(standard_join(r, s)?)),
        JoinMethod::Vorobev => Ok(JoinOutcome::Witness(vorobev_join(r, s)?)),
        JoinMethod::Northwest => Ok(JoinOutcome::Witness(northwest_join(r, s)?)),
        JoinMethod::Componentwise => Ok(JoinOutcome::Witness(componentwise_join(r, s)?)),
        JoinMethod::Exhaustive => exhaustive_join(r, s, budget),
    }
}

/// Picks the monoid's witnessing join by capability: canonical joins
/// first (lattice standard, then Vorob'ev), then northwest, then
/// component-wise, then exhaustive on finite monoids.
pub fn witness_join_auto(
    r: &KRelation,
    s: &KRelation,
    budget: u64,
) -> Result<(JoinOutcome, JoinMethod)> {
    let m = same_monoid(r, s)?;
    if m.caps.lattice() {
        return Ok((
            JoinOutcome::Witness(standard_join_checked(r, s)?),
            JoinMethod::Standard,
        ));
    }
    if m.caps.semifield {
        return Ok((JoinOutcome::Witness(vorobev_join(r, s)?), JoinMethod::Vorobev));
    }
    if m.caps.preorder && m.caps.weakly_cancellative && m.caps.totally_preordered {
        return Ok((
            JoinOutcome::Witness(northwest_join(r, s)?),
            JoinMethod::Northwest,
        ));
    }
    if m.caps.power.is_some() {
        return Ok((
            JoinOutcome::Witness(componentwise_join(r, s)?),
            JoinMethod::Componentwise,
        ));
    }
    if m.caps.finite {
        return Ok((exhaustive_join(r, s, budget)?, JoinMethod::Exhaustive));
    }
    Err(Error::CapabilityMissing {
        monoid: m.name.clone(),
        capability: "no witnessing join applies".into(),
    })
}

/// Standard join preceded by the inner-consistency check, for dispatch
/// contexts that promise a witness.
fn standard_join_checked(r: &KRelation, s: &KRelation) -> Result<KRelation> {
    let check = inner_consistent(r, s)?;
    if !check.consistent {
        return Err(Error::InnerInconsistent(check.common.join(",")));
    }
    standard_join(r, s)
}

/// True iff marginal(W, attrs(R_i)) = R_i for every part, with attrs(W)
/// equal to the union of the part attributes.
pub fn verify_witness(w: &KRelation, parts: &[&KRelation]) -> Result<bool> {
    let mut union = match parts.first() {
        Some(p) => p.attrs.clone(),
        None => return Err(Error::AttributeMismatch("no parts given".into())),
    };
    for p in &parts[1..] {
        union = union.union(&p.attrs)?;
    }
    if union != w.attrs {
        return Err(Error::AttributeMismatch(
            "witness attributes are not the union of the part attributes".into(),
        ));
    }
    for p in parts {
        if *w.monoid != *p.monoid {
            return Err(Error::MonoidMismatch);
        }
        if &w.marginal(p.attrs.names())? != *p {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The sparsity report line the CLI prints for every join.
pub fn sparsity_report(w: &KRelation, r: &KRelation, s: &KRelation) -> String {
    format!(
        "support: |W'|={}, bound=|R'|+|S'|={}",
        w.support_size(),
        r.support_size() + s.support_size()
    )
}

/// Convenience for `Monoid`-level dispatch decisions.
pub fn has_witnessing_join(m: &Monoid) -> bool {
    m.caps.lattice()
        || m.caps.semifield
        || (m.caps.preorder && m.caps.weakly_cancellative && m.caps.totally_preordered)
        || m.caps
            .power
            .as_ref()
            .map_or(false, |p| has_witnessing_join(&p.base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{attrs, n_standard_join_counterexample, path3_relations, rel, tup};
    use crate::monoid::Monoid;
    use crate::transport::DEFAULT_BUDGET;

    #[test]
    fn boolean_standard_join_is_relational_join() {
        let b = Monoid::boolean();
        let ab = attrs(&[("A", &["a1", "a2"]), ("B", &["b1", "b2"])]);
        let bc = attrs(&[("B", &["b1", "b2"]), ("C", &["c1", "c2"])]);
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
                (&[("B", "b1"), ("C", "c2")], Value::nat(1)),
            ],
        );
        let w = standard_join(&r, &s).unwrap();
        let rendered: Vec<String> = w.support().iter().map(|t| t.display(&w.attrs)).collect();
        assert_eq!(
            rendered,
            vec!["(A=a1,B=b1,C=c1)", "(A=a1,B=b1,C=c2)"],
            "exactly the tuples of the relational join"
        );
    }

    #[test]
    fn n_standard_join_is_not_a_witness() {
        let (r, s) = n_standard_join_counterexample();
        let w = standard_join(&r, &s).unwrap();
        assert_eq!(w.support_size(), 4, "all four ABC tuples appear");
        assert!(w.rows().all(|(_, v)| *v == Value::nat(1)));
        assert!(!verify_witness(&w, &[&r, &s]).unwrap());
    }

    #[test]
    fn fuzzy_standard_join_takes_minima() {
        let fz = Monoid::fuzzy();
        let ab = attrs(&[("A", &["a"]), ("B", &["b"])]);
        let bc = attrs(&[("B", &["b"]), ("C", &["c"])]);
        let r = rel(&fz, &ab, &[(&[("A", "a"), ("B", "b")], Value::rat(1, 2))]);
        let s = rel(&fz, &bc, &[(&[("B", "b"), ("C", "c")], Value::rat(1, 4))]);
        let w = standard_join(&r, &s).unwrap();
        let t = tup(&w.attrs, &[("A", "a"), ("B", "b"), ("C", "c")]);
        assert_eq!(w.annotation(&t), Value::rat(1, 4));

        // an inner-consistent fuzzy pair is witnessed by its standard join
        let r2 = rel(&fz, &ab, &[(&[("A", "a"), ("B", "b")], Value::rat(1, 2))]);
        let s2 = rel(&fz, &bc, &[(&[("B", "b"), ("C", "c")], Value::rat(1, 2))]);
        let w2 = standard_join(&r2, &s2).unwrap();
        assert!(verify_witness(&w2, &[&r2, &s2]).unwrap());
    }

    #[test]
    fn vorobev_join_on_rationals() {
        let q = Monoid::rationals();
        let ab = attrs(&[("A", &["a1", "a2"]), ("B", &["b"])]);
        let bc = attrs(&[("B", &["b"]), ("C", &["c1", "c2"])]);
        let r = rel(
            &q,
            &ab,
            &[
                (&[("A", "a1"), ("B", "b")], Value::rat(1, 2)),
                (&[("A", "a2"), ("B", "b")], Value::rat(1, 2)),
            ],
        );
        let s = rel(
            &q,
            &bc,
            &[
                (&[("B", "b"), ("C", "c1")], Value::rat(1, 4)),
                (&[("B", "b"), ("C", "c2")], Value::rat(3, 4)),
            ],
        );
        let w = vorobev_join(&r, &s).unwrap();
        let expect = [
            (("a1", "c1"), Value::rat(1, 8)),
            (("a1", "c2"), Value::rat(3, 8)),
            (("a2", "c1"), Value::rat(1, 8)),
            (("a2", "c2"), Value::rat(3, 8)),
        ];
        for ((a, c), v) in expect {
            let t = tup(&w.attrs, &[("A", a), ("B", "b"), ("C", c)]);
            assert_eq!(w.annotation(&t), v);
        }
        assert!(verify_witness(&w, &[&r, &s]).unwrap());
    }

    #[test]
    fn vorobev_identity_on_shared_single_tuple() {
        // p·p/p = p when both relations are the same single tuple
        let q = Monoid::rationals();
        let ab = attrs(&[("A", &["a"]), ("B", &["b"])]);
        let r = rel(&q, &ab, &[(&[("A", "a"), ("B", "b")], Value::rat(2, 3))]);
        let w = vorobev_join(&r, &r).unwrap();
        assert_eq!(w, r);
    }

    #[test]
    fn vorobev_requires_inner_consistency() {
        let q = Monoid::rationals();
        let ab = attrs(&[("A", &["a"]), ("B", &["b"])]);
        let bc = attrs(&[("B", &["b"]), ("C", &["c"])]);
        let r = rel(&q, &ab, &[(&[("A", "a"), ("B", "b")], Value::rat(1, 2))]);
        let s = rel(&q, &bc, &[(&[("B", "b"), ("C", "c")], Value::rat(1, 3))]);
        assert!(matches!(
            vorobev_join(&r, &s),
            Err(Error::InnerInconsistent(_))
        ));
    }

    #[test]
    fn northwest_join_blocks() {
        let n = Monoid::naturals();
        let ab = attrs(&[("A", &["a1", "a2"]), ("B", &["b"])]);
        let bc = attrs(&[("B", &["b"]), ("C", &["c1", "c2"])]);
        let r = rel(
            &n,
            &ab,
            &[
                (&[("A", "a1"), ("B", "b")], Value::nat(3)),
                (&[("A", "a2"), ("B", "b")], Value::nat(2)),
            ],
        );
        let s = rel(
            &n,
            &bc,
            &[
                (&[("B", "b"), ("C", "c1")], Value::nat(1)),
                (&[("B", "b"), ("C", "c2")], Value::nat(4)),
            ],
        );
        let w = northwest_join(&r, &s).unwrap();
        assert_eq!(w.support_size(), 3);
        let expect = [
            (("a1", "c1"), 1u64),
            (("a1", "c2"), 2),
            (("a2", "c2"), 2),
        ];
        for ((a, c), v) in expect {
            let t = tup(&w.attrs, &[("A", a), ("B", "b"), ("C", c)]);
            assert_eq!(w.annotation(&t), Value::nat(v));
        }
        assert!(verify_witness(&w, &[&r, &s]).unwrap());
        assert!(w.support_size() <= r.support_size() + s.support_size());
    }

    #[test]
    fn northwest_join_single_block_single_cell() {
        let n = Monoid::naturals();
        let ab = attrs(&[("A", &["a"]), ("B", &["b"])]);
        let bc = attrs(&[("B", &["b"]), ("C", &["c"])]);
        let r = rel(&n, &ab, &[(&[("A", "a"), ("B", "b")], Value::nat(5))]);
        let s = rel(&n, &bc, &[(&[("B", "b"), ("C", "c")], Value::nat(5))]);
        let w = northwest_join(&r, &s).unwrap();
        assert_eq!(w.support_size(), 1);
        assert!(verify_witness(&w, &[&r, &s]).unwrap());
    }

    #[test]
    fn componentwise_join_on_free_relations() {
        let free = Monoid::free(None);
        let ab = attrs(&[("A", &["a1", "a2"]), ("B", &["b"])]);
        let bc = attrs(&[("B", &["b"]), ("C", &["c1", "c2"])]);
        let r = rel(
            &free,
            &ab,
            &[
                (&[("A", "a1"), ("B", "b")], Value::free([("x", 1), ("y", 1)])),
                (&[("A", "a2"), ("B", "b")], Value::free([("x", 1)])),
            ],
        );
        let s = rel(
            &free,
            &bc,
            &[
                (&[("B", "b"), ("C", "c1")], Value::free([("x", 1)])),
                (&[("B", "b"), ("C", "c2")], Value::free([("x", 1), ("y", 1)])),
            ],
        );
        let w = componentwise_join(&r, &s).unwrap();
        assert!(verify_witness(&w, &[&r, &s]).unwrap());
    }

    #[test]
    fn componentwise_join_single_component_matches_base_join() {
        // |I| = 1 embedding of N into its power: the witness decodes to the
        // base join of the projections
        let free = Monoid::free(None);
        let n = Monoid::naturals();
        let ab = attrs(&[("A", &["a1", "a2"]), ("B", &["b"])]);
        let bc = attrs(&[("B", &["b"]), ("C", &["c1", "c2"])]);
        let embed = |v: u64| Value::free([("x", v)]);
        let r = rel(
            &free,
            &ab,
            &[
                (&[("A", "a1"), ("B", "b")], embed(3)),
                (&[("A", "a2"), ("B", "b")], embed(2)),
            ],
        );
        let s = rel(
            &free,
            &bc,
            &[
                (&[("B", "b"), ("C", "c1")], embed(1)),
                (&[("B", "b"), ("C", "c2")], embed(4)),
            ],
        );
        let w = componentwise_join(&r, &s).unwrap();
        let rn = rel(
            &n,
            &ab,
            &[
                (&[("A", "a1"), ("B", "b")], Value::nat(3)),
                (&[("A", "a2"), ("B", "b")], Value::nat(2)),
            ],
        );
        let sn = rel(
            &n,
            &bc,
            &[
                (&[("B", "b"), ("C", "c1")], Value::nat(1)),
                (&[("B", "b"), ("C", "c2")], Value::nat(4)),
            ],
        );
        let wn = northwest_join(&rn, &sn).unwrap();
        assert_eq!(w.support(), wn.support());
        for (t, v) in w.rows() {
            let n_val = match v {
                Value::Map(m) => m.get("x").cloned().unwrap(),
                _ => panic!("free annotation"),
            };
            assert_eq!(n_val, wn.annotation(t));
        }
    }

    #[test]
    fn componentwise_join_on_empty_common_components() {
        // disjoint index keys with zero common marginals on the shared
        // attribute set: only possible when the common marginal is empty
        let free = Monoid::free(None);
        let ab = attrs(&[("A", &["a"]), ("B", &["b1", "b2"])]);
        let bc = attrs(&[("B", &["b1", "b2"]), ("C", &["c"])]);
        let r = rel(&free, &ab, &[(&[("A", "a"), ("B", "b1")], Value::free([("x", 1)]))]);
        let s = rel(&free, &bc, &[(&[("B", "b2"), ("C", "c")], Value::free([("y", 1)]))]);
        // common marginal on B differs (b1 vs b2): not inner consistent
        assert!(matches!(
            componentwise_join(&r, &s),
            Err(Error::InnerInconsistent(_))
        ));
    }

    #[test]
    fn verify_witness_accepts_paper_witness_and_self() {
        let (r1, r2, _) = path3_relations();
        let (r12, _, _) = crate::fixtures::path3_pairwise_witnesses();
        assert!(verify_witness(&r12, &[&r1, &r2]).unwrap());
        assert!(verify_witness(&r1, &[&r1]).unwrap());
    }

    #[test]
    fn exhaustive_join_reports_the_failing_block() {
        let (r, s) = crate::fixtures::n2_inner_consistent_pair();
        match exhaustive_join(&r, &s, DEFAULT_BUDGET).unwrap() {
            JoinOutcome::Infeasible { common, .. } => assert_eq!(common, vec!["C".to_string()]),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn join_methods_gate_on_capabilities() {
        let (r1, r2, _) = path3_relations();
        assert!(matches!(
            standard_join(&r1, &r2),
            Err(Error::CapabilityMissing { .. })
        ));
        assert!(matches!(
            vorobev_join(&r1, &r2),
            Err(Error::CapabilityMissing { .. })
        ));
        assert!(matches!(
            northwest_join(&r1, &r2),
            Err(Error::CapabilityMissing { .. })
        ));
    }
}
