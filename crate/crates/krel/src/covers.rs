//! Covers (surjective monoid homomorphisms), lifts of relations, the free
//! cover, absoluteness of global consistency, and the local-to-global
//! pipeline up to the free cover on acyclic schemas.

use std::sync::Arc;

use crate::consistency::{
    check_pair, chase_acyclic, forward_states, generate_counterexample, tseitin_relations,
    uniform_regular, Counterexample, Outcome,
};
use crate::error::{Error, Result};
use crate::hypergraph::{AcyclicityCertificate, Hypergraph};
use crate::joins::verify_witness;
use crate::krelation::KRelation;
use crate::literal::{canonical_name, parse_name};
use crate::monoid::{Monoid, MonoidHandle, MonoidKind, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum CoverKind {
    Identity,
    /// h : F(K⁺) ↠ K, generators named by the canonical rendering of the
    /// non-zero elements of K; h evaluates linear forms in K.
    Free,
    /// h : N ↠ N_cap by truncation (a retraction).
    Truncation { cap: u64 },
    /// An explicit finite map between finite monoids, checked exhaustively
    /// for the homomorphism property and surjectivity at construction.
    FiniteMap { table: Vec<(Value, Value)> },
}

/// A cover of `downstairs` by `upstairs`: a surjective homomorphism
/// `map`, with a preimage chooser witnessing surjectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub upstairs: MonoidHandle,
    pub downstairs: MonoidHandle,
    pub kind: CoverKind,
}

impl Cover {
    pub fn identity(m: MonoidHandle) -> Cover {
        Cover {
            upstairs: m.clone(),
            downstairs: m,
            kind: CoverKind::Identity,
        }
    }

    /// The free cover of `m`: upstairs is the free commutative monoid on
    /// the (lazily named) non-zero elements of `m`, and the map evaluates
    /// each linear form in `m`.
    pub fn free(m: MonoidHandle) -> Cover {
        Cover {
            upstairs: Monoid::free(None),
            downstairs: m,
            kind: CoverKind::Free,
        }
    }

    /// The truncation cover N ↠ N_cap.
    pub fn truncation(cap: u64) -> Result<Cover> {
        Ok(Cover {
            upstairs: Monoid::naturals(),
            downstairs: Monoid::truncated_naturals(cap)?,
            kind: CoverKind::Truncation { cap },
        })
    }

    /// A user-supplied cover between finite monoids, given as element
    /// pairs. The homomorphism property and surjectivity are checked
    /// exhaustively.
    pub fn finite_map(
        upstairs: MonoidHandle,
        downstairs: MonoidHandle,
        table: Vec<(Value, Value)>,
    ) -> Result<Cover> {
        if !upstairs.caps.finite || !downstairs.caps.finite {
            return Err(Error::InvalidCover(
                "finite-map covers need finite monoids on both sides".into(),
            ));
        }
        let lookup = |v: &Value| -> Result<Value> {
            table
                .iter()
                .find(|(a, _)| a == v)
                .map(|(_, b)| b.clone())
                .ok_or_else(|| Error::InvalidCover(format!("map is not total: missing {v:?}")))
        };
        for v in upstairs.enumerate()? {
            upstairs.validate(&v)?;
            downstairs.validate(&lookup(&v)?)?;
        }
        if lookup(&upstairs.zero())? != downstairs.zero() {
            return Err(Error::InvalidCover("map does not send 0 to 0".into()));
        }
        let elems = upstairs.enumerate()?;
        for a in &elems {
            for b in &elems {
                let lhs = lookup(&upstairs.add(a, b))?;
                let rhs = downstairs.add(&lookup(a)?, &lookup(b)?);
                if lhs != rhs {
                    return Err(Error::InvalidCover(format!(
                        "map is not a homomorphism at {a:?} + {b:?}"
                    )));
                }
            }
        }
        for w in downstairs.enumerate()? {
            if !elems.iter().any(|v| lookup(v).map(|x| x == w).unwrap_or(false)) {
                return Err(Error::InvalidCover(format!("map is not surjective: {w:?} missed")));
            }
        }
        Ok(Cover {
            upstairs,
            downstairs,
            kind: CoverKind::FiniteMap { table },
        })
    }

    /// Applies the covering homomorphism.
    pub fn map(&self, v: &Value) -> Result<Value> {
        self.upstairs.validate(v)?;
        match &self.kind {
            CoverKind::Identity => Ok(v.clone()),
            CoverKind::Free => {
                let coeffs = match v {
                    Value::Map(m) => m,
                    _ => unreachable!("validated free element"),
                };
                let mut acc = self.downstairs.zero();
                for (gen, coeff) in coeffs {
                    let elem = parse_name(&self.downstairs, gen)?;
                    if self.downstairs.is_zero(&elem) {
                        return Err(Error::InvalidCover(format!(
                            "generator `{gen}` names the zero element"
                        )));
                    }
                    let n = match coeff {
                        Value::Nat(n) => u64::try_from(n).map_err(|_| {
                            Error::InvalidCover("coefficient too large to evaluate".into())
                        })?,
                        _ => unreachable!("validated free coefficient"),
                    };
                    acc = self.downstairs.add(&acc, &self.downstairs.n_times(&elem, n));
                }
                Ok(acc)
            }
            CoverKind::Truncation { cap } => match v {
                Value::Nat(n) => {
                    let cap = num_bigint::BigUint::from(*cap);
                    Ok(Value::Nat(n.min(&cap).clone()))
                }
                _ => unreachable!("validated natural"),
            },
            CoverKind::FiniteMap { table } => table
                .iter()
                .find(|(a, _)| a == v)
                .map(|(_, b)| b.clone())
                .ok_or_else(|| Error::InvalidCover("map is not total".into())),
        }
    }

    /// A chosen preimage of `v`, witnessing surjectivity. For free covers:
    /// the generator named after `v`.
    pub fn preimage(&self, v: &Value) -> Result<Value> {
        self.downstairs.validate(v)?;
        match &self.kind {
            CoverKind::Identity => Ok(v.clone()),
            CoverKind::Free => {
                if self.downstairs.is_zero(v) {
                    return Ok(self.upstairs.zero());
                }
                Ok(Value::free([(canonical_name(&self.downstairs, v), 1u64)]))
            }
            CoverKind::Truncation { .. } => Ok(v.clone()),
            CoverKind::FiniteMap { table } => table
                .iter()
                .find(|(_, b)| b == v)
                .map(|(a, _)| a.clone())
                .ok_or_else(|| Error::InvalidCover("no preimage in the table".into())),
        }
    }

    /// All preimages of `v` within a finite bound, for the bounded lift
    /// search. Free covers are rejected: their lift space is infinite and
    /// searching it is out of scope.
    pub fn preimages_bounded(&self, v: &Value, bound: u64) -> Result<Vec<Value>> {
        self.downstairs.validate(v)?;
        match &self.kind {
            CoverKind::Identity => Ok(vec![v.clone()]),
            CoverKind::Truncation { cap } => match v {
                Value::Nat(n) => {
                    let n = u64::try_from(n).map_err(|_| {
                        Error::InvalidCover("truncation value out of range".into())
                    })?;
                    if n < *cap {
                        Ok(vec![Value::nat(n)])
                    } else {
                        Ok((*cap..=bound.max(*cap)).map(Value::nat).collect())
                    }
                }
                _ => unreachable!("validated natural"),
            },
            CoverKind::FiniteMap { table } => Ok(table
                .iter()
                .filter(|(_, b)| b == v)
                .map(|(a, _)| a.clone())
                .collect()),
            CoverKind::Free => Err(Error::InvalidCover(
                "free covers have an infinite lift space; bounded search is not defined".into(),
            )),
        }
    }

    /// True when the cover restricts to the identity on the downstairs
    /// universe (so direct lifts are possible).
    pub fn is_retraction(&self) -> bool {
        matches!(
            self.kind,
            CoverKind::Identity | CoverKind::Truncation { .. }
        )
    }
}

/// A relation over K together with a lift over K*: h ∘ lifted = base.
#[derive(Debug, Clone)]
pub struct LiftedRelation {
    pub base: KRelation,
    pub lifted: KRelation,
    pub cover: Cover,
}

impl LiftedRelation {
    /// Verifies h ∘ lifted = base tuplewise before accepting the pair.
    pub fn new(base: KRelation, lifted: KRelation, cover: Cover) -> Result<LiftedRelation> {
        if base.monoid != cover.downstairs || lifted.monoid != cover.upstairs {
            return Err(Error::InvalidCover(
                "lift/base monoids do not match the cover".into(),
            ));
        }
        if base.attrs != lifted.attrs {
            return Err(Error::AttributeMismatch(
                "lift and base have different attributes".into(),
            ));
        }
        for (t, v) in lifted.rows() {
            if cover.map(v)? != base.annotation(t) {
                return Err(Error::InvalidCover(format!(
                    "h(lift({})) differs from the base annotation",
                    t.display(&lifted.attrs)
                )));
            }
        }
        for (t, v) in base.rows() {
            if lifted.get(t).is_none() && !base.monoid.is_zero(v) {
                return Err(Error::InvalidCover(format!(
                    "base tuple {} has no lifted annotation",
                    t.display(&base.attrs)
                )));
            }
        }
        Ok(LiftedRelation { base, lifted, cover })
    }
}

/// The canonical lift: generator lifts for free covers, direct lifts for
/// retractions.
pub fn canonical_lift(r: &KRelation, cover: &Cover) -> Result<LiftedRelation> {
    if r.monoid != cover.downstairs {
        return Err(Error::InvalidCover("relation monoid does not match the cover".into()));
    }
    let lifted = match &cover.kind {
        CoverKind::Free => r.map_annotations(cover.upstairs.clone(), |v| cover.preimage(v))?,
        _ if cover.is_retraction() => {
            r.map_annotations(cover.upstairs.clone(), |v| Ok(v.clone()))?
        }
        _ => {
            return Err(Error::InvalidCover(
                "canonical lifts exist only for free covers and retractions".into(),
            ))
        }
    };
    LiftedRelation::new(r.clone(), lifted, cover.clone())
}

/// Composes annotations with the covering map, dropping zeros.
pub fn push_down(w: &KRelation, cover: &Cover) -> Result<KRelation> {
    if w.monoid != cover.upstairs {
        return Err(Error::InvalidCover("relation monoid does not match the cover".into()));
    }
    w.map_annotations(cover.downstairs.clone(), |v| cover.map(v))
}

/// Absoluteness, the (1)⇒(2) direction: lift a global witness, take its
/// marginals as the lifts of the parts, and return the upstairs witness.
pub fn lift_global_witness(
    w: &KRelation,
    parts: &[KRelation],
    cover: &Cover,
) -> Result<(Vec<LiftedRelation>, KRelation)> {
    let refs: Vec<&KRelation> = parts.iter().collect();
    if !verify_witness(w, &refs)? {
        return Err(Error::InvalidRelation(
            "the given relation does not witness the parts' consistency".into(),
        ));
    }
    let w_star = canonical_lift(w, cover)?.lifted;
    let mut lifts = Vec::with_capacity(parts.len());
    for part in parts {
        let lifted = w_star.marginal(part.attrs.names())?;
        lifts.push(LiftedRelation::new(part.clone(), lifted, cover.clone())?);
    }
    Ok((lifts, w_star))
}

/// The local-to-global pipeline up to the free cover: check the lifts
/// pairwise consistent upstairs, chase them there (the free monoid has the
/// transportation property), and push the witness down.
pub fn chase_up_to_free_cover(
    lifts: &[LiftedRelation],
    cert: &AcyclicityCertificate,
    budget: u64,
) -> Result<KRelation> {
    if lifts.is_empty() {
        return Err(Error::InvalidParams("no lifts to chase".into()));
    }
    let cover = &lifts[0].cover;
    for l in lifts {
        if l.cover != *cover {
            return Err(Error::InvalidCover("lifts use different covers".into()));
        }
    }
    let upstairs: Vec<KRelation> = lifts.iter().map(|l| l.lifted.clone()).collect();
    for i in 0..upstairs.len() {
        for j in (i + 1)..upstairs.len() {
            let verdict = check_pair(&upstairs[i], &upstairs[j], budget)?;
            if !matches!(verdict.outcome, Outcome::Consistent { .. }) {
                return Err(Error::InnerInconsistent(format!(
                    "lifts {i} and {j} are not consistent upstairs"
                )));
            }
        }
    }
    let w_star = chase_acyclic(&upstairs, cert, budget)?;
    let w = push_down(&w_star, cover)?;
    let bases: Vec<&KRelation> = lifts.iter().map(|l| &l.base).collect();
    if !verify_witness(&w, &bases)? {
        return Err(Error::Internal(
            "pushed-down chase result does not witness the base relations".into(),
        ));
    }
    Ok(w)
}

/// Counterexample relations together with lifts that stay pairwise
/// consistent up to the given cover.
#[derive(Debug)]
pub struct CoverCounterexample {
    pub counterexample: Counterexample,
    pub lifts: Vec<LiftedRelation>,
    pub annotation_upstairs: Value,
}

/// Tseitin relations over a cyclic schema, annotated a = d^k·c downstairs
/// and a* = d^k·c* upstairs: pairwise consistent up to the cover, not
/// globally consistent downstairs.
pub fn generate_cover_counterexample(
    h: &Hypergraph,
    monoid: &MonoidHandle,
    c: &Value,
    cover: &Cover,
) -> Result<CoverCounterexample> {
    if cover.downstairs != *monoid {
        return Err(Error::InvalidCover("cover does not cover the given monoid".into()));
    }
    let cx = generate_counterexample(h, monoid, c)?;
    let c_star = cover.preimage(c)?;
    if cover.upstairs.is_zero(&c_star) {
        return Err(Error::InvalidCover("preimage of a non-zero element is zero".into()));
    }
    let states = forward_states(h, &cx.deletions)?;
    let core = states.last().expect("script ends at the core");
    let (k, d) = uniform_regular(core)?;
    let a_star = cover.upstairs.n_times(&c_star, (d as u64).pow(k));
    let domain = Arc::new((0..d).map(|i| i.to_string()).collect::<Vec<_>>());
    let core_lifts = tseitin_relations(core, &cover.upstairs, &a_star, &domain)?;
    let lifted = crate::consistency::invert_script(&states, &cx.deletions, core_lifts, &domain)?;
    let mut lifts = Vec::with_capacity(lifted.len());
    for (base, lift) in cx.relations.iter().cloned().zip(lifted) {
        lifts.push(LiftedRelation::new(base, lift, cover.clone())?);
    }
    Ok(CoverCounterexample {
        counterexample: cx,
        lifts,
        annotation_upstairs: a_star,
    })
}

/// Bounded exhaustive search for pairwise-consistent lifts: every support
/// tuple may take any preimage of its annotation up to `bound`. Returns
/// the first consistent family, or None after refuting all combinations.
pub fn search_pairwise_consistent_lifts(
    relations: &[KRelation],
    cover: &Cover,
    bound: u64,
    budget: u64,
) -> Result<Option<Vec<KRelation>>> {
    for r in relations {
        if r.monoid != cover.downstairs {
            return Err(Error::InvalidCover("relation monoid does not match the cover".into()));
        }
    }
    // per relation, per support tuple: the candidate upstairs annotations
    let mut slots: Vec<(usize, crate::krelation::Tuple, Vec<Value>)> = Vec::new();
    for (ri, r) in relations.iter().enumerate() {
        for (t, v) in r.rows() {
            let options = cover.preimages_bounded(v, bound)?;
            if options.is_empty() {
                return Ok(None);
            }
            slots.push((ri, t.clone(), options));
        }
    }
    let mut choice = vec![0usize; slots.len()];
    let mut nodes: u64 = 0;
    loop {
        nodes += 1;
        if nodes > budget {
            return Err(Error::ComponentInfeasible("lift search exceeded budget".into()));
        }
        // materialize the lifts for this combination
        let mut rows: Vec<Vec<(crate::krelation::Tuple, Value)>> =
            vec![Vec::new(); relations.len()];
        for (si, (ri, t, options)) in slots.iter().enumerate() {
            rows[*ri].push((t.clone(), options[choice[si]].clone()));
        }
        let lifts: Result<Vec<KRelation>> = relations
            .iter()
            .zip(rows)
            .map(|(r, rws)| KRelation::new(cover.upstairs.clone(), r.attrs.clone(), rws))
            .collect();
        let lifts = lifts?;
        let mut all_consistent = true;
        'pairs: for i in 0..lifts.len() {
            for j in (i + 1)..lifts.len() {
                let verdict = check_pair(&lifts[i], &lifts[j], budget)?;
                if !matches!(verdict.outcome, Outcome::Consistent { .. }) {
                    all_consistent = false;
                    break 'pairs;
                }
            }
        }
        if all_consistent {
            return Ok(Some(lifts));
        }
        // odometer step
        let mut at = slots.len();
        loop {
            if at == 0 {
                return Ok(None);
            }
            at -= 1;
            choice[at] += 1;
            if choice[at] < slots[at].2.len() {
                break;
            }
            choice[at] = 0;
        }
    }
}

/// Parses a cover descriptor: {"kind": "identity"|"free"|"truncation"|
/// "finite-map", ...} against the downstairs monoid.
pub fn cover_from_json(desc: &serde_json::Value, downstairs: MonoidHandle) -> Result<Cover> {
    let kind = desc
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Parse("cover descriptor needs a `kind`".into()))?;
    match kind {
        "identity" => Ok(Cover::identity(downstairs)),
        "free" => Ok(Cover::free(downstairs)),
        "truncation" => {
            let cap = match &downstairs.kind {
                MonoidKind::TruncatedNaturals { cap } => *cap,
                _ => {
                    return Err(Error::InvalidCover(
                        "truncation covers target truncated-naturals monoids".into(),
                    ))
                }
            };
            Cover::truncation(cap)
        }
        "finite-map" => {
            let upstairs = crate::monoid::monoid_from_json(desc.get("upstairs").ok_or_else(
                || Error::Parse("finite-map cover needs an `upstairs` monoid".into()),
            )?)?;
            let pairs = desc
                .get("map")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::Parse("finite-map cover needs a `map` array".into()))?;
            let mut table = Vec::with_capacity(pairs.len());
            for p in pairs {
                let pair = p
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::Parse("map entries are [up, down] pairs".into()))?;
                table.push((
                    crate::literal::parse_element(&upstairs, &pair[0])?,
                    crate::literal::parse_element(&downstairs, &pair[1])?,
                ));
            }
            Cover::finite_map(upstairs, downstairs, table)
        }
        other => Err(Error::Parse(format!("unknown cover kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::{check_global, check_kwise};
    use crate::fixtures::path3_relations;
    use crate::hypergraph::{make_named, NamedKind};
    use crate::krelation::inner_consistent;
    use crate::monoid::Monoid;
    use crate::transport::DEFAULT_BUDGET;

    #[test]
    fn free_cover_evaluates_linear_forms() {
        let n2 = Monoid::truncated_naturals(2).unwrap();
        let cover = Cover::free(n2.clone());
        // x1 + x1 evaluates to 1 ⊕ 1 = 2
        let two_x1 = Value::free([("1", 2u64)]);
        assert_eq!(cover.map(&two_x1).unwrap(), Value::nat(2));
        assert_eq!(cover.map(&cover.upstairs.zero()).unwrap(), n2.zero());
        // preimage of a non-zero element is its named generator
        assert_eq!(cover.preimage(&Value::nat(2)).unwrap(), Value::free([("2", 1u64)]));
    }

    #[test]
    fn canonical_lift_round_trips() {
        let (_, r2, _) = path3_relations();
        let cover = Cover::free(r2.monoid.clone());
        let lift = canonical_lift(&r2, &cover).unwrap();
        // value-2 tuples lift to the generator named "2"
        for (_, v) in lift.lifted.rows() {
            assert_eq!(*v, Value::free([("2", 1u64)]));
        }
        assert_eq!(push_down(&lift.lifted, &cover).unwrap(), r2);

        let empty = KRelation::empty(r2.monoid.clone(), r2.attrs.clone());
        let lift = canonical_lift(&empty, &cover).unwrap();
        assert!(lift.lifted.is_empty());
    }

    #[test]
    fn direct_lifts_of_r2_r3_are_not_inner_consistent_upstairs() {
        let (_, r2, r3) = path3_relations();
        let cover = Cover::free(r2.monoid.clone());
        let l2 = canonical_lift(&r2, &cover).unwrap().lifted;
        let l3 = canonical_lift(&r3, &cover).unwrap().lifted;
        // R2*[C](c1) = x_2, but R3*[C](c1) = 3·x_1
        let check = inner_consistent(&l2, &l3).unwrap();
        assert!(!check.consistent);
    }

    #[test]
    fn push_down_commutes_with_marginals() {
        let (_, r2, _) = path3_relations();
        let cover = Cover::free(r2.monoid.clone());
        let lifted = canonical_lift(&r2, &cover).unwrap().lifted;
        let down_then_marg = push_down(&lifted, &cover)
            .unwrap()
            .marginal(&["C".to_string()])
            .unwrap();
        let marg_then_down = push_down(&lifted.marginal(&["C".to_string()]).unwrap(), &cover).unwrap();
        assert_eq!(down_then_marg, marg_then_down);
    }

    #[test]
    fn witness_lifts_are_consistent_upstairs() {
        let (_, r2, r3) = path3_relations();
        let (_, r23, _) = crate::fixtures::path3_pairwise_witnesses();
        let cover = Cover::free(r2.monoid.clone());
        let parts = vec![r2.clone(), r3.clone()];
        let (lifts, w_star) = lift_global_witness(&r23, &parts, &cover).unwrap();
        assert_eq!(lifts.len(), 2);
        let upstairs: Vec<&KRelation> = lifts.iter().map(|l| &l.lifted).collect();
        assert!(verify_witness(&w_star, &upstairs).unwrap());
        let verdict = check_pair(&lifts[0].lifted, &lifts[1].lifted, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Consistent { .. }));
    }

    #[test]
    fn chase_up_to_free_cover_witnesses_the_bases() {
        let (_, r2, r3) = path3_relations();
        let (_, r23, _) = crate::fixtures::path3_pairwise_witnesses();
        let cover = Cover::free(r2.monoid.clone());
        let parts = vec![r2.clone(), r3.clone()];
        let (lifts, _) = lift_global_witness(&r23, &parts, &cover).unwrap();
        let refs: Vec<&KRelation> = parts.iter().collect();
        let cert = crate::consistency::schema_of(&refs).unwrap().check_acyclic();
        let w = chase_up_to_free_cover(&lifts, &cert, DEFAULT_BUDGET).unwrap();
        assert!(verify_witness(&w, &refs).unwrap());
    }

    #[test]
    fn identity_cover_is_a_fixed_point() {
        let (r1, _, _) = path3_relations();
        let cover = Cover::identity(r1.monoid.clone());
        let lift = canonical_lift(&r1, &cover).unwrap();
        assert_eq!(lift.lifted, r1);
        assert_eq!(push_down(&r1, &cover).unwrap(), r1);
    }

    #[test]
    fn cover_counterexample_on_c3_over_n2() {
        let c3 = make_named(NamedKind::Cycle, 3).unwrap();
        let n2 = Monoid::truncated_naturals(2).unwrap();
        let cover = Cover::free(n2.clone());
        let out = generate_cover_counterexample(&c3, &n2, &Value::nat(1), &cover).unwrap();
        // a* = 4·x_1 upstairs, a = 2 downstairs
        assert_eq!(out.annotation_upstairs, Value::free([("1", 4u64)]));
        assert_eq!(out.counterexample.annotation, Value::nat(2));
        // lifts are pairwise consistent upstairs
        let upstairs: Vec<KRelation> = out.lifts.iter().map(|l| l.lifted.clone()).collect();
        let verdict = check_kwise(&upstairs, 2, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Consistent { .. }));
        // the base collection stays globally inconsistent
        let verdict = check_global(&out.counterexample.relations, DEFAULT_BUDGET).unwrap();
        assert!(matches!(verdict.outcome, Outcome::Inconsistent { .. }));
    }

    #[test]
    fn prop37_admits_no_bounded_n_lifts() {
        // Example: under the truncation cover N ↠ N2, the path3 triple has
        // no pairwise-consistent lifts with annotations bounded by 4
        let (r1, r2, r3) = path3_relations();
        let cover = Cover::truncation(2).unwrap();
        let rels = vec![r1, r2, r3];
        let found = search_pairwise_consistent_lifts(&rels, &cover, 4, DEFAULT_BUDGET).unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn consistent_pairs_do_admit_bounded_lifts() {
        // sanity check on the search itself: a single relation always lifts
        let (r1, _, _) = path3_relations();
        let cover = Cover::truncation(2).unwrap();
        let found = search_pairwise_consistent_lifts(&[r1], &cover, 4, DEFAULT_BUDGET).unwrap();
        assert!(found.is_some());
    }

    #[test]
    fn finite_map_cover_validation() {
        let b = Monoid::boolean();
        let n2 = Monoid::truncated_naturals(2).unwrap();
        // N2 ↠ B by 0↦0, 1↦1, 2↦1 is a surjective homomorphism
        let cover = Cover::finite_map(
            n2.clone(),
            b.clone(),
            vec![
                (Value::nat(0), Value::nat(0)),
                (Value::nat(1), Value::nat(1)),
                (Value::nat(2), Value::nat(1)),
            ],
        )
        .unwrap();
        assert_eq!(cover.map(&Value::nat(2)).unwrap(), Value::nat(1));
        assert_eq!(cover.preimage(&Value::nat(1)).unwrap(), Value::nat(1));
        // 0↦1 is not a homomorphism
        assert!(Cover::finite_map(
            n2,
            b,
            vec![
                (Value::nat(0), Value::nat(1)),
                (Value::nat(1), Value::nat(1)),
                (Value::nat(2), Value::nat(1)),
            ],
        )
        .is_err());
    }
}
