//! Attributes, tuples, and finite-support K-relations with marginals,
//! supports, and inner-consistency testing.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::monoid::{MonoidHandle, Value};

/// An ordered set of attributes with explicit finite domains. Attributes
/// are kept sorted by name; tuples compare lexicographically by attribute
/// name and then by domain-list position, which fixes the deterministic
/// tuple order used everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSet {
    attrs: Vec<String>,
    domains: Vec<Arc<Vec<String>>>,
}

impl AttributeSet {
    pub fn new(mut pairs: Vec<(String, Arc<Vec<String>>)>) -> Result<AttributeSet> {
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::AttributeMismatch(format!(
                    "duplicate attribute `{}`",
                    w[0].0
                )));
            }
        }
        for (name, domain) in &pairs {
            if domain.is_empty() {
                return Err(Error::AttributeMismatch(format!(
                    "attribute `{name}` has an empty domain"
                )));
            }
        }
        let (attrs, domains) = pairs.into_iter().unzip();
        Ok(AttributeSet { attrs, domains })
    }

    pub fn empty() -> AttributeSet {
        AttributeSet {
            attrs: Vec::new(),
            domains: Vec::new(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.attrs
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn position(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr)
    }

    pub fn domain(&self, attr: &str) -> Option<&Arc<Vec<String>>> {
        self.position(attr).map(|i| &self.domains[i])
    }

    pub fn domain_at(&self, i: usize) -> &Arc<Vec<String>> {
        &self.domains[i]
    }

    pub fn contains_all(&self, names: &[String]) -> bool {
        names.iter().all(|n| self.position(n).is_some())
    }

    /// Sub-attribute-set on `names`, plus the positions of those attributes
    /// in `self` (in the sub-set's sorted order).
    pub fn project(&self, names: &[String]) -> Result<(AttributeSet, Vec<usize>)> {
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        sorted.dedup();
        let mut positions = Vec::with_capacity(sorted.len());
        for name in &sorted {
            match self.position(name) {
                Some(i) => positions.push(i),
                None => {
                    return Err(Error::AttributeMismatch(format!(
                        "`{name}` is not an attribute of this relation"
                    )))
                }
            }
        }
        let sub = AttributeSet {
            attrs: positions.iter().map(|&i| self.attrs[i].clone()).collect(),
            domains: positions.iter().map(|&i| self.domains[i].clone()).collect(),
        };
        Ok((sub, positions))
    }

    /// Union of two attribute sets; shared attributes must agree on their
    /// domains.
    pub fn union(&self, other: &AttributeSet) -> Result<AttributeSet> {
        let mut pairs: BTreeMap<String, Arc<Vec<String>>> = BTreeMap::new();
        for (a, d) in self.attrs.iter().zip(&self.domains) {
            pairs.insert(a.clone(), d.clone());
        }
        for (a, d) in other.attrs.iter().zip(&other.domains) {
            match pairs.get(a) {
                Some(existing) if **existing != **d => {
                    return Err(Error::AttributeMismatch(format!(
                        "attribute `{a}` has conflicting domains"
                    )))
                }
                _ => {
                    pairs.insert(a.clone(), d.clone());
                }
            }
        }
        let (attrs, domains) = pairs.into_iter().unzip();
        Ok(AttributeSet { attrs, domains })
    }

    pub fn common_names(&self, other: &AttributeSet) -> Vec<String> {
        self.attrs
            .iter()
            .filter(|a| other.position(a).is_some())
            .cloned()
            .collect()
    }

    /// All tuples over this attribute set, in deterministic order.
    pub fn all_tuples(&self) -> Vec<Tuple> {
        let mut out = vec![Tuple(Vec::new())];
        for domain in &self.domains {
            let mut next = Vec::with_capacity(out.len() * domain.len());
            for t in &out {
                for i in 0..domain.len() {
                    let mut vals = t.0.clone();
                    vals.push(i as u32);
                    next.push(Tuple(vals));
                }
            }
            out = next;
        }
        out
    }
}

/// A tuple over an AttributeSet, stored as domain-list positions parallel
/// to the sorted attribute names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple(pub Vec<u32>);

impl Tuple {
    pub fn project(&self, positions: &[usize]) -> Tuple {
        Tuple(positions.iter().map(|&i| self.0[i]).collect())
    }

    pub fn value<'a>(&self, attrs: &'a AttributeSet, attr: &str) -> Option<&'a str> {
        let i = attrs.position(attr)?;
        attrs.domain_at(i).get(self.0[i] as usize).map(|s| s.as_str())
    }

    pub fn display(&self, attrs: &AttributeSet) -> String {
        let parts: Vec<String> = attrs
            .names()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                format!("{}={}", a, attrs.domain_at(i)[self.0[i] as usize])
            })
            .collect();
        format!("({})", parts.join(","))
    }
}

/// Builds a tuple from attribute-name/value pairs.
pub fn tuple_from_values(attrs: &AttributeSet, values: &BTreeMap<String, String>) -> Result<Tuple> {
    if values.len() != attrs.len() {
        return Err(Error::InvalidRelation(format!(
            "tuple has {} values but the relation has {} attributes",
            values.len(),
            attrs.len()
        )));
    }
    let mut indices = Vec::with_capacity(attrs.len());
    for (i, name) in attrs.names().iter().enumerate() {
        let value = values.get(name).ok_or_else(|| {
            Error::InvalidRelation(format!("tuple is missing attribute `{name}`"))
        })?;
        let pos = attrs.domain_at(i).iter().position(|v| v == value).ok_or_else(|| {
            Error::InvalidRelation(format!(
                "value `{value}` is not in the domain of `{name}`"
            ))
        })?;
        indices.push(pos as u32);
    }
    Ok(Tuple(indices))
}

/// A finitely supported K-relation: only non-zero annotations are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct KRelation {
    pub monoid: MonoidHandle,
    pub attrs: AttributeSet,
    rows: BTreeMap<Tuple, Value>,
}

impl KRelation {
    pub fn empty(monoid: MonoidHandle, attrs: AttributeSet) -> KRelation {
        KRelation {
            monoid,
            attrs,
            rows: BTreeMap::new(),
        }
    }

    /// Strict constructor: zero annotations are dropped, duplicate tuples
    /// are an error.
    pub fn new(
        monoid: MonoidHandle,
        attrs: AttributeSet,
        rows: Vec<(Tuple, Value)>,
    ) -> Result<KRelation> {
        let mut map = BTreeMap::new();
        for (t, v) in rows {
            if t.0.len() != attrs.len() {
                return Err(Error::InvalidRelation("tuple arity mismatch".into()));
            }
            for (i, &ix) in t.0.iter().enumerate() {
                if ix as usize >= attrs.domain_at(i).len() {
                    return Err(Error::InvalidRelation("tuple value outside its domain".into()));
                }
            }
            monoid.validate(&v)?;
            if monoid.is_zero(&v) {
                continue;
            }
            if map.insert(t.clone(), v).is_some() {
                return Err(Error::InvalidRelation(format!(
                    "duplicate tuple {}",
                    t.display(&attrs)
                )));
            }
        }
        Ok(KRelation {
            monoid,
            attrs,
            rows: map,
        })
    }

    /// Accumulating constructor: annotations for equal tuples are summed in
    /// the monoid. Used by marginals, joins, and push-downs.
    pub fn accumulate<I: IntoIterator<Item = (Tuple, Value)>>(
        monoid: MonoidHandle,
        attrs: AttributeSet,
        rows: I,
    ) -> KRelation {
        let mut map: BTreeMap<Tuple, Value> = BTreeMap::new();
        for (t, v) in rows {
            if monoid.is_zero(&v) {
                continue;
            }
            match map.remove(&t) {
                None => {
                    map.insert(t, v);
                }
                Some(existing) => {
                    let sum = monoid.add(&existing, &v);
                    if !monoid.is_zero(&sum) {
                        map.insert(t, sum);
                    }
                }
            }
        }
        KRelation {
            monoid,
            attrs,
            rows: map,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Tuple, &Value)> {
        self.rows.iter()
    }

    pub fn get(&self, t: &Tuple) -> Option<&Value> {
        self.rows.get(t)
    }

    /// Annotation of `t`, zero when outside the support.
    pub fn annotation(&self, t: &Tuple) -> Value {
        self.rows.get(t).cloned().unwrap_or_else(|| self.monoid.zero())
    }

    pub fn support_size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Supp(R): the stored tuple keys, in deterministic order.
    pub fn support(&self) -> Vec<Tuple> {
        self.rows.keys().cloned().collect()
    }

    /// The marginal R[Y]: sums annotations over support tuples that agree
    /// on Y. Zero-valued results are omitted.
    pub fn marginal(&self, names: &[String]) -> Result<KRelation> {
        let (sub, positions) = self.attrs.project(names)?;
        Ok(KRelation::accumulate(
            self.monoid.clone(),
            sub,
            self.rows
                .iter()
                .map(|(t, v)| (t.project(&positions), v.clone())),
        ))
    }

    /// Sum of all annotations (the marginal on the empty attribute set).
    pub fn total(&self) -> Value {
        self.monoid.sum(self.rows.values())
    }

    /// Applies `f` to every annotation, dropping zeros.
    pub fn map_annotations<F>(&self, monoid: MonoidHandle, mut f: F) -> Result<KRelation>
    where
        F: FnMut(&Value) -> Result<Value>,
    {
        let mut out = Vec::with_capacity(self.rows.len());
        for (t, v) in &self.rows {
            out.push((t.clone(), f(v)?));
        }
        Ok(KRelation::accumulate(monoid, self.attrs.clone(), out))
    }
}

/// Result of the inner-consistency test: the two marginals on the common
/// attributes, and whether they agree.
#[derive(Debug, Clone)]
pub struct InnerCheck {
    pub consistent: bool,
    pub common: Vec<String>,
    pub left_marginal: KRelation,
    pub right_marginal: KRelation,
}

/// Tests R[X∩Y] = S[X∩Y].
pub fn inner_consistent(r: &KRelation, s: &KRelation) -> Result<InnerCheck> {
    if r.monoid != s.monoid {
        return Err(Error::MonoidMismatch);
    }
    let common = r.attrs.common_names(&s.attrs);
    let left = r.marginal(&common)?;
    let right = s.marginal(&common)?;
    Ok(InnerCheck {
        consistent: left == right,
        common,
        left_marginal: left,
        right_marginal: right,
    })
}

/// Merges an X-tuple and a Y-tuple that agree on X∩Y into an XY-tuple.
/// `union_attrs` must be the union attribute set of the two relations.
pub fn merge_tuples(
    left_attrs: &AttributeSet,
    left: &Tuple,
    right_attrs: &AttributeSet,
    right: &Tuple,
    union_attrs: &AttributeSet,
) -> Tuple {
    let mut vals = Vec::with_capacity(union_attrs.len());
    for name in union_attrs.names() {
        if let Some(i) = left_attrs.position(name) {
            vals.push(left.0[i]);
        } else {
            let i = right_attrs.position(name).expect("attr from the union");
            vals.push(right.0[i]);
        }
    }
    Tuple(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{attrs, path3_relations, tup};
    use crate::monoid::Monoid;

    #[test]
    fn marginal_of_path3_r3_on_c() {
        // c1 gets 1+1+1 truncated to 2, c2 gets 2
        let (_, _, r3) = path3_relations();
        let m = r3.marginal(&["C".to_string()]).unwrap();
        assert_eq!(m.support_size(), 2);
        let c = tup(&m.attrs, &[("C", "c1")]);
        assert_eq!(m.annotation(&c), Value::nat(2));
        let c2 = tup(&m.attrs, &[("C", "c2")]);
        assert_eq!(m.annotation(&c2), Value::nat(2));
    }

    #[test]
    fn marginal_on_all_attrs_is_identity() {
        let (r1, _, _) = path3_relations();
        let names = r1.attrs.names().to_vec();
        assert_eq!(r1.marginal(&names).unwrap(), r1);
    }

    #[test]
    fn marginal_direct_sum() {
        let n = Monoid::naturals();
        let ab = attrs(&[("A", &["a1", "a2"]), ("B", &["b"])]);
        let r = KRelation::new(
            n,
            ab.clone(),
            vec![
                (tup(&ab, &[("A", "a1"), ("B", "b")]), Value::nat(3)),
                (tup(&ab, &[("A", "a2"), ("B", "b")]), Value::nat(2)),
            ],
        )
        .unwrap();
        let m = r.marginal(&["B".to_string()]).unwrap();
        assert_eq!(m.annotation(&tup(&m.attrs, &[("B", "b")])), Value::nat(5));
    }

    #[test]
    fn support_matches_prop37_r1() {
        let (r1, _, _) = path3_relations();
        let support = r1.support();
        assert_eq!(support.len(), 3);
        let rendered: Vec<String> = support.iter().map(|t| t.display(&r1.attrs)).collect();
        assert_eq!(
            rendered,
            vec!["(A=a1,B=b1)", "(A=a2,B=b1)", "(A=a3,B=b2)"]
        );
    }

    #[test]
    fn marginal_not_subset_rejected() {
        let (r1, _, _) = path3_relations();
        assert!(r1.marginal(&["Z".to_string()]).is_err());
    }

    #[test]
    fn inner_consistency_of_sec56_pair() {
        let (r, s) = crate::fixtures::n2_inner_consistent_pair();
        let check = inner_consistent(&r, &s).unwrap();
        assert!(check.consistent, "both marginals give c -> 2");

        // the prose variant S(b1,c)=1, S(b2,c)=2 is inner consistent too
        let n2 = Monoid::truncated_naturals(2).unwrap();
        let bc = attrs(&[("B", &["b1", "b2"]), ("C", &["c"])]);
        let s2 = crate::fixtures::rel(
            &n2,
            &bc,
            &[
                (&[("B", "b1"), ("C", "c")], Value::nat(1)),
                (&[("B", "b2"), ("C", "c")], Value::nat(2)),
            ],
        );
        assert!(inner_consistent(&r, &s2).unwrap().consistent);
    }

    #[test]
    fn inner_consistency_on_disjoint_attrs_compares_totals() {
        let n = Monoid::naturals();
        let a = attrs(&[("A", &["x", "y"])]);
        let b = attrs(&[("B", &["u"])]);
        let r = KRelation::new(
            n.clone(),
            a.clone(),
            vec![
                (tup(&a, &[("A", "x")]), Value::nat(2)),
                (tup(&a, &[("A", "y")]), Value::nat(3)),
            ],
        )
        .unwrap();
        let s = KRelation::new(n, b.clone(), vec![(tup(&b, &[("B", "u")]), Value::nat(5))]).unwrap();
        assert!(inner_consistent(&r, &s).unwrap().consistent);
    }

    #[test]
    fn monoid_mismatch_rejected() {
        let (r1, _, _) = path3_relations();
        let n = Monoid::naturals();
        let a = attrs(&[("A", &["a1"])]);
        let s = KRelation::new(n, a.clone(), vec![(tup(&a, &[("A", "a1")]), Value::nat(1))]).unwrap();
        assert!(matches!(
            inner_consistent(&r1, &s),
            Err(Error::MonoidMismatch)
        ));
    }

    #[test]
    fn duplicate_tuples_rejected_zeroes_dropped() {
        let n = Monoid::naturals();
        let a = attrs(&[("A", &["x"])]);
        let t = tup(&a, &[("A", "x")]);
        assert!(KRelation::new(
            n.clone(),
            a.clone(),
            vec![(t.clone(), Value::nat(1)), (t.clone(), Value::nat(2))]
        )
        .is_err());
        let r = KRelation::new(n, a.clone(), vec![(t, Value::nat(0))]).unwrap();
        assert!(r.is_empty());
    }
}
