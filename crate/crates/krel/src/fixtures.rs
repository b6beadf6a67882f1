//! Canonical instances that recur across the test surface: the
//! path-of-length-3 triple over N2, the inner-consistent-but-inconsistent
//! pairs, and the two-tuple join counterexample over N.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::krelation::{tuple_from_values, AttributeSet, KRelation, Tuple};
use crate::monoid::{Monoid, MonoidHandle, Value};

pub fn attrs(names_domains: &[(&str, &[&str])]) -> AttributeSet {
    AttributeSet::new(
        names_domains
            .iter()
            .map(|(n, d)| {
                (
                    n.to_string(),
                    Arc::new(d.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
                )
            })
            .collect(),
    )
    .expect("fixture attribute sets are well-formed")
}

pub fn tup(attrs: &AttributeSet, vals: &[(&str, &str)]) -> Tuple {
    let map: BTreeMap<String, String> = vals
        .iter()
        .map(|(a, v)| (a.to_string(), v.to_string()))
        .collect();
    tuple_from_values(attrs, &map).expect("fixture tuples are well-formed")
}

pub fn rel(
    monoid: &MonoidHandle,
    attrs: &AttributeSet,
    rows: &[(&[(&str, &str)], Value)],
) -> KRelation {
    KRelation::new(
        monoid.clone(),
        attrs.clone(),
        rows.iter()
            .map(|(vals, v)| (tup(attrs, vals), v.clone()))
            .collect(),
    )
    .expect("fixture relations are well-formed")
}

/// The three N2-relations R1(AB), R2(BC), R3(CD) that are pairwise
/// consistent but not globally consistent on the path schema AB, BC, CD.
pub fn path3_relations() -> (KRelation, KRelation, KRelation) {
    let n2 = Monoid::truncated_naturals(2).expect("cap 2");
    let ab = attrs(&[("A", &["a1", "a2", "a3"]), ("B", &["b1", "b2"])]);
    let bc = attrs(&[("B", &["b1", "b2"]), ("C", &["c1", "c2"])]);
    let cd = attrs(&[("C", &["c1", "c2"]), ("D", &["d1", "d2", "d3", "d4"])]);
    let r1 = rel(
        &n2,
        &ab,
        &[
            (&[("A", "a1"), ("B", "b1")], Value::nat(1)),
            (&[("A", "a2"), ("B", "b1")], Value::nat(1)),
            (&[("A", "a3"), ("B", "b2")], Value::nat(2)),
        ],
    );
    let r2 = rel(
        &n2,
        &bc,
        &[
            (&[("B", "b1"), ("C", "c1")], Value::nat(2)),
            (&[("B", "b2"), ("C", "c2")], Value::nat(2)),
        ],
    );
    let r3 = rel(
        &n2,
        &cd,
        &[
            (&[("C", "c1"), ("D", "d1")], Value::nat(1)),
            (&[("C", "c1"), ("D", "d2")], Value::nat(1)),
            (&[("C", "c1"), ("D", "d3")], Value::nat(1)),
            (&[("C", "c2"), ("D", "d4")], Value::nat(2)),
        ],
    );
    (r1, r2, r3)
}

/// The pairwise witnesses R12(ABC), R23(BCD), R13(ABCD) for the path3
/// triple.
pub fn path3_pairwise_witnesses() -> (KRelation, KRelation, KRelation) {
    let n2 = Monoid::truncated_naturals(2).expect("cap 2");
    let abc = attrs(&[
        ("A", &["a1", "a2", "a3"]),
        ("B", &["b1", "b2"]),
        ("C", &["c1", "c2"]),
    ]);
    let bcd = attrs(&[
        ("B", &["b1", "b2"]),
        ("C", &["c1", "c2"]),
        ("D", &["d1", "d2", "d3", "d4"]),
    ]);
    let abcd = attrs(&[
        ("A", &["a1", "a2", "a3"]),
        ("B", &["b1", "b2"]),
        ("C", &["c1", "c2"]),
        ("D", &["d1", "d2", "d3", "d4"]),
    ]);
    let r12 = rel(
        &n2,
        &abc,
        &[
            (&[("A", "a1"), ("B", "b1"), ("C", "c1")], Value::nat(1)),
            (&[("A", "a2"), ("B", "b1"), ("C", "c1")], Value::nat(1)),
            (&[("A", "a3"), ("B", "b2"), ("C", "c2")], Value::nat(2)),
        ],
    );
    let r23 = rel(
        &n2,
        &bcd,
        &[
            (&[("B", "b1"), ("C", "c1"), ("D", "d1")], Value::nat(1)),
            (&[("B", "b1"), ("C", "c1"), ("D", "d2")], Value::nat(1)),
            (&[("B", "b1"), ("C", "c1"), ("D", "d3")], Value::nat(1)),
            (&[("B", "b2"), ("C", "c2"), ("D", "d4")], Value::nat(2)),
        ],
    );
    let r13 = rel(
        &n2,
        &abcd,
        &[
            (
                &[("A", "a1"), ("B", "b1"), ("C", "c1"), ("D", "d1")],
                Value::nat(1),
            ),
            (
                &[("A", "a2"), ("B", "b1"), ("C", "c1"), ("D", "d2")],
                Value::nat(1),
            ),
            (
                &[("A", "a3"), ("B", "b2"), ("C", "c1"), ("D", "d3")],
                Value::nat(1),
            ),
            (
                &[("A", "a3"), ("B", "b2"), ("C", "c2"), ("D", "d4")],
                Value::nat(2),
            ),
        ],
    );
    (r12, r23, r13)
}

/// The inner-consistent N2 pair R(AC), S(BC) that is not consistent:
/// R(a_i,c)=1 for i=1..3 and S(b_j,c)=2 for j=1,2, giving the infeasible
/// block system with rows (1,1,1) and columns (2,2).
pub fn n2_inner_consistent_pair() -> (KRelation, KRelation) {
    let n2 = Monoid::truncated_naturals(2).expect("cap 2");
    let ac = attrs(&[("A", &["a1", "a2", "a3"]), ("C", &["c"])]);
    let bc = attrs(&[("B", &["b1", "b2"]), ("C", &["c"])]);
    let r = rel(
        &n2,
        &ac,
        &[
            (&[("A", "a1"), ("C", "c")], Value::nat(1)),
            (&[("A", "a2"), ("C", "c")], Value::nat(1)),
            (&[("A", "a3"), ("C", "c")], Value::nat(1)),
        ],
    );
    let s = rel(
        &n2,
        &bc,
        &[
            (&[("B", "b1"), ("C", "c")], Value::nat(2)),
            (&[("B", "b2"), ("C", "c")], Value::nat(2)),
        ],
    );
    (r, s)
}

/// The inner-consistent R1 pair that is not consistent: R(a_i,c)=1 for
/// i=1..3 and S(b_j,c)=3/2 for j=1,2 (totals 3 on both sides).
pub fn r1_inner_consistent_pair() -> (KRelation, KRelation) {
    let r1m = Monoid::gap_rationals();
    let ac = attrs(&[("A", &["a1", "a2", "a3"]), ("C", &["c"])]);
    let bc = attrs(&[("B", &["b1", "b2"]), ("C", &["c"])]);
    let one = Value::rat(1, 1);
    let r = rel(
        &r1m,
        &ac,
        &[
            (&[("A", "a1"), ("C", "c")], one.clone()),
            (&[("A", "a2"), ("C", "c")], one.clone()),
            (&[("A", "a3"), ("C", "c")], one),
        ],
    );
    let s = rel(
        &r1m,
        &bc,
        &[
            (&[("B", "b1"), ("C", "c")], Value::rat(3, 2)),
            (&[("B", "b2"), ("C", "c")], Value::rat(3, 2)),
        ],
    );
    (r, s)
}

/// The two-tuple N-relations whose standard join fails to witness their
/// consistency: R(AB) = {(1,2):1,(2,2):1}, S(BC) = {(2,1):1,(2,2):1}.
pub fn n_standard_join_counterexample() -> (KRelation, KRelation) {
    let n = Monoid::naturals();
    let ab = attrs(&[("A", &["1", "2"]), ("B", &["2"])]);
    let bc = attrs(&[("B", &["2"]), ("C", &["1", "2"])]);
    let r = rel(
        &n,
        &ab,
        &[
            (&[("A", "1"), ("B", "2")], Value::nat(1)),
            (&[("A", "2"), ("B", "2")], Value::nat(1)),
        ],
    );
    let s = rel(
        &n,
        &bc,
        &[
            (&[("B", "2"), ("C", "1")], Value::nat(1)),
            (&[("B", "2"), ("C", "2")], Value::nat(1)),
        ],
    );
    (r, s)
}
