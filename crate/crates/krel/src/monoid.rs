//! Positive commutative monoids: element values, the capability system,
//! and the builtin catalog.
//!
//! A monoid here is a value-semantic handle carrying its addition rule and a
//! declared capability record. All arithmetic is exact: naturals are big
//! integers, "reals" are realized over the rationals, and every element is
//! canonicalized on construction (reduced fractions, no stored zero
//! components), so structural equality is semantic equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// An element of some monoid. Which variants are meaningful depends on the
/// monoid kind; `Monoid::validate` is the gatekeeper.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    /// Non-negative integer (naturals, truncated naturals, chains, tables
    /// indexed by number).
    Nat(BigUint),
    /// Non-negative rational (Q>=0, the gap monoid R1, fuzzy [0,1]).
    Rat(BigRational),
    /// Finite set over a string universe (powerset monoids).
    Set(BTreeSet<String>),
    /// Named element of a user-supplied finite addition table.
    Sym(String),
    /// Finite-support map: free-monoid elements (name -> Nat coefficient)
    /// and power-monoid elements (key -> base element).
    Map(BTreeMap<String, Value>),
}

impl Value {
    pub fn nat(n: u64) -> Value {
        Value::Nat(BigUint::from(n))
    }

    pub fn rat(num: i64, den: i64) -> Value {
        Value::Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn set<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Value {
        Value::Set(items.into_iter().map(Into::into).collect())
    }

    /// Free-monoid element from (generator, coefficient) pairs.
    pub fn free<I: IntoIterator<Item = (S, u64)>, S: Into<String>>(items: I) -> Value {
        Value::Map(
            items
                .into_iter()
                .filter(|(_, c)| *c != 0)
                .map(|(g, c)| (g.into(), Value::nat(c)))
                .collect(),
        )
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Value) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        use Value::*;
        fn rank(v: &Value) -> u8 {
            match v {
                Nat(_) => 0,
                Rat(_) => 1,
                Set(_) => 2,
                Sym(_) => 3,
                Map(_) => 4,
            }
        }
        match (self, other) {
            (Nat(a), Nat(b)) => a.cmp(b),
            (Rat(a), Rat(b)) => a.cmp(b),
            (Set(a), Set(b)) => a.cmp(b),
            (Sym(a), Sym(b)) => a.cmp(b),
            (Map(a), Map(b)) => a.cmp(b),
            (a, b) => rank(a).cmp(&rank(b)).then(Ordering::Equal),
        }
    }
}

/// Semiring expansion: a commutative multiplication with unit `one`.
/// `lattice` declares the expansion additively absorptive and
/// multiplicatively idempotent (a bounded distributive lattice), which is
/// exactly when the standard join witnesses consistency.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiringCap {
    pub one: Value,
    pub lattice: bool,
}

/// Power-structure capability: the monoid is a finite-support power of
/// `base`, with `keys` constraining the index set when declared.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCap {
    pub base: MonoidHandle,
    pub keys: Option<BTreeSet<String>>,
}

/// Declared capability record. Flags are catalog declarations, never
/// inferred from samples: weak cancellativity and total preorderedness are
/// global statements a sampler cannot certify.
#[derive(Debug, Clone, PartialEq)]
pub struct Capabilities {
    pub finite: bool,
    pub preorder: bool,
    pub cancellative: bool,
    pub weakly_cancellative: bool,
    pub totally_preordered: bool,
    pub semiring: Option<SemiringCap>,
    pub semifield: bool,
    pub power: Option<PowerCap>,
}

impl Capabilities {
    fn none() -> Capabilities {
        Capabilities {
            finite: false,
            preorder: true,
            cancellative: false,
            weakly_cancellative: false,
            totally_preordered: false,
            semiring: None,
            semifield: false,
            power: None,
        }
    }

    pub fn lattice(&self) -> bool {
        self.semiring.as_ref().map_or(false, |s| s.lattice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonoidKind {
    /// B = ({0,1}, or, 0).
    Boolean,
    /// N = (Z>=0, +, 0).
    Naturals,
    /// Naturals with addition truncated to `cap`; cap = 2 is the paper's N2.
    TruncatedNaturals { cap: u64 },
    /// M2 = ({0,1,2}, +', 0) with 1+'1=2, 1+'2=2+'1=1, 2+'2=2.
    M2,
    /// Q>=0 = (Q>=0, +, 0).
    RationalsNonneg,
    /// R1 = ({0} U [1, inf), +, 0), realized over the rationals.
    GapRationals,
    /// Integer chain ({0..max}, max, 0), a bounded distributive lattice.
    BoundedOrder { max: u64 },
    /// Fuzzy chain ([0,1] cap Q, max, 0) with min as multiplication.
    Fuzzy,
    /// (P(universe), union, {}), isomorphic to B^universe.
    PowerSet { universe: Vec<String> },
    /// P_k = ({0..k+1}, +, 0): 0 neutral, k+1 absorbing, i+i=i,
    /// i+j = k+1 for distinct i,j in [k].
    TruncatedPowerset { k: u64 },
    /// User-supplied finite monoid: named elements, elements[0] is zero,
    /// table[i][j] is the index of elements[i] + elements[j].
    FiniteTable {
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        weakly_cancellative: bool,
        totally_preordered: bool,
    },
    /// Free commutative monoid on generator names (None = open set,
    /// generators created lazily). Isomorphic to N[X]_1 = N^X_fin.
    Free { generators: Option<BTreeSet<String>> },
    /// Finite-support power of `base` over string keys.
    Power {
        base: MonoidHandle,
        keys: Option<BTreeSet<String>>,
    },
}

/// A monoid instance: display name, addition rule, capability record.
#[derive(Debug)]
pub struct Monoid {
    pub name: String,
    pub kind: MonoidKind,
    pub caps: Capabilities,
}

impl PartialEq for Monoid {
    fn eq(&self, other: &Monoid) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Display for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

pub type MonoidHandle = Arc<Monoid>;

fn big2() -> BigUint {
    BigUint::from(2u32)
}

impl Monoid {
    fn with_caps(name: &str, kind: MonoidKind, caps: Capabilities) -> MonoidHandle {
        Arc::new(Monoid {
            name: name.to_string(),
            kind,
            caps,
        })
    }

    pub fn boolean() -> MonoidHandle {
        Monoid::with_caps(
            "B",
            MonoidKind::Boolean,
            Capabilities {
                finite: true,
                weakly_cancellative: true,
                totally_preordered: true,
                semiring: Some(SemiringCap {
                    one: Value::nat(1),
                    lattice: true,
                }),
                ..Capabilities::none()
            },
        )
    }

    pub fn naturals() -> MonoidHandle {
        Monoid::with_caps(
            "N",
            MonoidKind::Naturals,
            Capabilities {
                cancellative: true,
                weakly_cancellative: true,
                totally_preordered: true,
                semiring: Some(SemiringCap {
                    one: Value::nat(1),
                    lattice: false,
                }),
                ..Capabilities::none()
            },
        )
    }

    /// N2 and its generalizations: addition rounded down to `cap`.
    pub fn truncated_naturals(cap: u64) -> Result<MonoidHandle> {
        if cap < 1 {
            return Err(Error::InvalidParams("truncation cap must be >= 1".into()));
        }
        let name = if cap == 2 {
            "N2".to_string()
        } else {
            format!("N{cap}")
        };
        Ok(Monoid::with_caps(
            &name,
            MonoidKind::TruncatedNaturals { cap },
            Capabilities {
                finite: true,
                // cap = 1 is isomorphic to B; cap >= 2 violates weak
                // cancellativity (cap + 1 = cap + cap).
                weakly_cancellative: cap == 1,
                totally_preordered: true,
                ..Capabilities::none()
            },
        ))
    }

    pub fn m2() -> MonoidHandle {
        Monoid::with_caps(
            "M2",
            MonoidKind::M2,
            Capabilities {
                finite: true,
                weakly_cancellative: true,
                totally_preordered: true,
                ..Capabilities::none()
            },
        )
    }

    pub fn rationals() -> MonoidHandle {
        Monoid::with_caps(
            "Q>=0",
            MonoidKind::RationalsNonneg,
            Capabilities {
                cancellative: true,
                weakly_cancellative: true,
                totally_preordered: true,
                semiring: Some(SemiringCap {
                    one: Value::Rat(BigRational::one()),
                    lattice: false,
                }),
                semifield: true,
                ..Capabilities::none()
            },
        )
    }

    pub fn gap_rationals() -> MonoidHandle {
        Monoid::with_caps(
            "R1",
            MonoidKind::GapRationals,
            Capabilities {
                cancellative: true,
                weakly_cancellative: true,
                // elements strictly between 1 and 2 are incomparable
                totally_preordered: false,
                ..Capabilities::none()
            },
        )
    }

    pub fn bounded_order(max: u64) -> Result<MonoidHandle> {
        if max < 1 {
            return Err(Error::InvalidParams(
                "bounded-order max must be >= 1".into(),
            ));
        }
        Ok(Monoid::with_caps(
            &format!("V{max}"),
            MonoidKind::BoundedOrder { max },
            Capabilities {
                finite: true,
                weakly_cancellative: max == 1,
                totally_preordered: true,
                semiring: Some(SemiringCap {
                    one: Value::nat(max),
                    lattice: true,
                }),
                ..Capabilities::none()
            },
        ))
    }

    pub fn fuzzy() -> MonoidHandle {
        Monoid::with_caps(
            "fuzzy",
            MonoidKind::Fuzzy,
            Capabilities {
                totally_preordered: true,
                semiring: Some(SemiringCap {
                    one: Value::Rat(BigRational::one()),
                    lattice: true,
                }),
                ..Capabilities::none()
            },
        )
    }

    pub fn powerset<I: IntoIterator<Item = S>, S: Into<String>>(universe: I) -> Result<MonoidHandle> {
        let universe: Vec<String> = universe.into_iter().map(Into::into).collect();
        let dedup: BTreeSet<&String> = universe.iter().collect();
        if universe.is_empty() {
            return Err(Error::InvalidParams("powerset universe must be non-empty".into()));
        }
        if dedup.len() != universe.len() {
            return Err(Error::InvalidParams("powerset universe has duplicates".into()));
        }
        let keys: BTreeSet<String> = universe.iter().cloned().collect();
        let one = Value::Set(keys.clone());
        Ok(Monoid::with_caps(
            &format!("P({})", universe.join(",")),
            MonoidKind::PowerSet { universe },
            Capabilities {
                finite: true,
                weakly_cancellative: keys.len() == 1,
                totally_preordered: keys.len() == 1,
                semiring: Some(SemiringCap { one, lattice: true }),
                power: Some(PowerCap {
                    base: Monoid::boolean(),
                    keys: Some(keys),
                }),
                ..Capabilities::none()
            },
        ))
    }

    pub fn truncated_powerset(k: u64) -> Result<MonoidHandle> {
        Ok(Monoid::with_caps(
            &format!("P_{k}"),
            MonoidKind::TruncatedPowerset { k },
            Capabilities {
                finite: true,
                weakly_cancellative: k == 0,
                totally_preordered: k <= 1,
                ..Capabilities::none()
            },
        ))
    }

    /// User-supplied finite monoid. `elements[0]` is the neutral element.
    /// The monoid axioms and the declared flags are checked exhaustively.
    pub fn finite_table(
        name: &str,
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        weakly_cancellative: bool,
        totally_preordered: bool,
    ) -> Result<MonoidHandle> {
        let n = elements.len();
        if n < 2 {
            return Err(Error::InvalidParams(
                "finite-table monoid needs at least 2 elements".into(),
            ));
        }
        if elements.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidParams("duplicate element names".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParams("addition table must be n x n".into()));
        }
        for row in &table {
            for &e in row {
                if e >= n {
                    return Err(Error::InvalidParams("table entry out of range".into()));
                }
            }
        }
        // exhaustive axiom checks
        for i in 0..n {
            if table[0][i] != i || table[i][0] != i {
                return Err(Error::InvalidParams(format!(
                    "element {} is not neutral",
                    elements[0]
                )));
            }
            for j in 0..n {
                if table[i][j] != table[j][i] {
                    return Err(Error::InvalidParams("addition is not commutative".into()));
                }
                if table[i][j] == 0 && (i != 0 || j != 0) {
                    return Err(Error::InvalidParams("monoid is not positive".into()));
                }
                for k in 0..n {
                    if table[table[i][j]][k] != table[i][table[j][k]] {
                        return Err(Error::InvalidParams("addition is not associative".into()));
                    }
                }
            }
        }
        if weakly_cancellative {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if table[a][b] == table[a][c] && b != c && b != 0 && c != 0 {
                            return Err(Error::InvalidParams(
                                "declared weakly cancellative but the table is not".into(),
                            ));
                        }
                    }
                }
            }
        }
        if totally_preordered {
            for b in 0..n {
                for c in 0..n {
                    let bc = (0..n).any(|a| table[b][a] == c);
                    let cb = (0..n).any(|a| table[c][a] == b);
                    if !bc && !cb {
                        return Err(Error::InvalidParams(
                            "declared totally preordered but the table is not".into(),
                        ));
                    }
                }
            }
        }
        Ok(Monoid::with_caps(
            name,
            MonoidKind::FiniteTable {
                elements,
                table,
                weakly_cancellative,
                totally_preordered,
            },
            Capabilities {
                finite: true,
                weakly_cancellative,
                totally_preordered,
                ..Capabilities::none()
            },
        ))
    }

    /// Free commutative monoid. `None` leaves the generator set open
    /// (generators are whatever names occur), which is how free covers of
    /// infinite monoids stay finitary.
    pub fn free(generators: Option<BTreeSet<String>>) -> MonoidHandle {
        let name = match &generators {
            Some(g) => format!(
                "free({})",
                g.iter().cloned().collect::<Vec<_>>().join(",")
            ),
            None => "free(*)".to_string(),
        };
        let keys = generators.clone();
        Monoid::with_caps(
            &name,
            MonoidKind::Free { generators },
            Capabilities {
                cancellative: true,
                weakly_cancellative: true,
                power: Some(PowerCap {
                    base: Monoid::naturals(),
                    keys,
                }),
                ..Capabilities::none()
            },
        )
    }

    pub fn power(base: MonoidHandle, keys: Option<BTreeSet<String>>) -> Result<MonoidHandle> {
        let name = match &keys {
            Some(k) => format!(
                "{}^({})",
                base.name,
                k.iter().cloned().collect::<Vec<_>>().join(",")
            ),
            None => format!("{}^(*)", base.name),
        };
        let caps = Capabilities {
            // a power is cancellative iff the base is; weak cancellativity
            // alone does not survive the product construction
            cancellative: base.caps.cancellative,
            weakly_cancellative: base.caps.cancellative,
            power: Some(PowerCap {
                base: base.clone(),
                keys: keys.clone(),
            }),
            ..Capabilities::none()
        };
        Ok(Monoid::with_caps(&name, MonoidKind::Power { base, keys }, caps))
    }

    /// Catalog constructor driving the instance-file "monoid" descriptor.
    pub fn make_builtin(name: &str, params: &serde_json::Value) -> Result<MonoidHandle> {
        let get_u64 = |key: &str| -> Result<u64> {
            params
                .get(key)
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::InvalidParams(format!("missing or invalid `{key}`")))
        };
        match name {
            "B" | "bool" | "boolean" => Ok(Monoid::boolean()),
            "N" | "naturals" => Ok(Monoid::naturals()),
            "N2" => Monoid::truncated_naturals(2),
            "truncated-naturals" => Monoid::truncated_naturals(get_u64("cap")?),
            "M2" => Ok(Monoid::m2()),
            "Q" | "Q>=0" | "rationals" => Ok(Monoid::rationals()),
            "R1" | "gap-rationals" => Ok(Monoid::gap_rationals()),
            "V" | "bounded-order" => Monoid::bounded_order(get_u64("max")?),
            "fuzzy" => Ok(Monoid::fuzzy()),
            "P" | "powerset" => {
                let universe = params
                    .get("universe")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::InvalidParams("missing `universe`".into()))?
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| Error::InvalidParams("universe items must be strings".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Monoid::powerset(universe)
            }
            "Pk" | "truncated-powerset" => Monoid::truncated_powerset(get_u64("k")?),
            "finite-table" => {
                let elements = params
                    .get("elements")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::InvalidParams("missing `elements`".into()))?
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| Error::InvalidParams("elements must be strings".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let table = params
                    .get("table")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::InvalidParams("missing `table`".into()))?
                    .iter()
                    .map(|row| {
                        row.as_array()
                            .ok_or_else(|| Error::InvalidParams("table rows must be arrays".into()))?
                            .iter()
                            .map(|e| {
                                e.as_u64()
                                    .map(|x| x as usize)
                                    .ok_or_else(|| Error::InvalidParams("table entries must be indices".into()))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let wc = params
                    .get("weakly-cancellative")
                    .and_then(|v| v.as_bool())
                    .unwrap_or(false);
                let tp = params
                    .get("totally-preordered")
                    .and_then(|v| v.as_bool())
                    .unwrap_or(false);
                let display = params
                    .get("name")
                    .and_then(|v| v.as_str())
                    .unwrap_or("finite-table");
                Monoid::finite_table(display, elements, table, wc, tp)
            }
            "free" => {
                let generators = match params.get("generators") {
                    None | Some(serde_json::Value::Null) => None,
                    Some(serde_json::Value::Array(items)) => Some(
                        items
                            .iter()
                            .map(|v| {
                                v.as_str()
                                    .map(str::to_string)
                                    .ok_or_else(|| Error::InvalidParams("generators must be strings".into()))
                            })
                            .collect::<Result<BTreeSet<_>>>()?,
                    ),
                    Some(_) => return Err(Error::InvalidParams("`generators` must be an array".into())),
                };
                Ok(Monoid::free(generators))
            }
            "power" => {
                let base_desc = params
                    .get("base")
                    .ok_or_else(|| Error::InvalidParams("missing `base`".into()))?;
                let base = crate::monoid::monoid_from_json(base_desc)?;
                let keys = match params.get("index") {
                    None | Some(serde_json::Value::Null) => None,
                    Some(serde_json::Value::Array(items)) => Some(
                        items
                            .iter()
                            .map(|v| {
                                v.as_str()
                                    .map(str::to_string)
                                    .ok_or_else(|| Error::InvalidParams("index keys must be strings".into()))
                            })
                            .collect::<Result<BTreeSet<_>>>()?,
                    ),
                    Some(_) => return Err(Error::InvalidParams("`index` must be an array".into())),
                };
                Monoid::power(base, keys)
            }
            other => Err(Error::UnknownMonoid(other.to_string())),
        }
    }

    pub fn zero(&self) -> Value {
        match &self.kind {
            MonoidKind::Boolean
            | MonoidKind::Naturals
            | MonoidKind::TruncatedNaturals { .. }
            | MonoidKind::M2
            | MonoidKind::BoundedOrder { .. }
            | MonoidKind::TruncatedPowerset { .. } => Value::Nat(BigUint::zero()),
            MonoidKind::RationalsNonneg | MonoidKind::GapRationals | MonoidKind::Fuzzy => {
                Value::Rat(BigRational::zero())
            }
            MonoidKind::PowerSet { .. } => Value::Set(BTreeSet::new()),
            MonoidKind::FiniteTable { elements, .. } => Value::Sym(elements[0].clone()),
            MonoidKind::Free { .. } | MonoidKind::Power { .. } => Value::Map(BTreeMap::new()),
        }
    }

    pub fn is_zero(&self, v: &Value) -> bool {
        *v == self.zero()
    }

    fn bad<T>(&self, detail: impl Into<String>) -> Result<T> {
        Err(Error::InvalidElement {
            monoid: self.name.clone(),
            detail: detail.into(),
        })
    }

    /// Checks that `v` is an element of this monoid's universe, in
    /// canonical form.
    pub fn validate(&self, v: &Value) -> Result<()> {
        match (&self.kind, v) {
            (MonoidKind::Boolean, Value::Nat(n)) => {
                if *n > BigUint::one() {
                    return self.bad("boolean values are 0 or 1");
                }
            }
            (MonoidKind::Naturals, Value::Nat(_)) => {}
            (MonoidKind::TruncatedNaturals { cap }, Value::Nat(n)) => {
                if *n > BigUint::from(*cap) {
                    return self.bad(format!("value exceeds cap {cap}"));
                }
            }
            (MonoidKind::M2, Value::Nat(n)) => {
                if *n > big2() {
                    return self.bad("M2 values are 0, 1, 2");
                }
            }
            (MonoidKind::RationalsNonneg, Value::Rat(q)) => {
                if q < &BigRational::zero() {
                    return self.bad("negative rational");
                }
            }
            (MonoidKind::GapRationals, Value::Rat(q)) => {
                if !(q.is_zero() || *q >= BigRational::one()) {
                    return self.bad("R1 values are 0 or >= 1");
                }
            }
            (MonoidKind::BoundedOrder { max }, Value::Nat(n)) => {
                if *n > BigUint::from(*max) {
                    return self.bad(format!("value exceeds max {max}"));
                }
            }
            (MonoidKind::Fuzzy, Value::Rat(q)) => {
                if *q < BigRational::zero() || *q > BigRational::one() {
                    return self.bad("fuzzy values are in [0,1]");
                }
            }
            (MonoidKind::PowerSet { universe }, Value::Set(s)) => {
                for item in s {
                    if !universe.contains(item) {
                        return self.bad(format!("`{item}` is not in the universe"));
                    }
                }
            }
            (MonoidKind::TruncatedPowerset { k }, Value::Nat(n)) => {
                if *n > BigUint::from(k + 1) {
                    return self.bad(format!("P_{k} values are 0..{}", k + 1));
                }
            }
            (MonoidKind::FiniteTable { elements, .. }, Value::Sym(name)) => {
                if !elements.contains(name) {
                    return self.bad(format!("`{name}` is not a table element"));
                }
            }
            (MonoidKind::Free { generators }, Value::Map(m)) => {
                for (g, c) in m {
                    if let Some(gens) = generators {
                        if !gens.contains(g) {
                            return self.bad(format!("`{g}` is not a declared generator"));
                        }
                    }
                    match c {
                        Value::Nat(n) if !n.is_zero() => {}
                        Value::Nat(_) => return self.bad("stored zero coefficient"),
                        _ => return self.bad("free coefficients must be naturals"),
                    }
                }
            }
            (MonoidKind::Power { base, keys }, Value::Map(m)) => {
                for (key, comp) in m {
                    if let Some(ks) = keys {
                        if !ks.contains(key) {
                            return self.bad(format!("`{key}` is not a declared index key"));
                        }
                    }
                    base.validate(comp)?;
                    if base.is_zero(comp) {
                        return self.bad("stored zero component");
                    }
                }
            }
            _ => return self.bad("wrong element representation for this monoid"),
        }
        Ok(())
    }

    /// Monoid addition. Inputs are assumed validated.
    pub fn add(&self, p: &Value, q: &Value) -> Value {
        match (&self.kind, p, q) {
            (MonoidKind::Boolean, Value::Nat(a), Value::Nat(b)) => Value::Nat(a.max(b).clone()),
            (MonoidKind::Naturals, Value::Nat(a), Value::Nat(b)) => Value::Nat(a + b),
            (MonoidKind::TruncatedNaturals { cap }, Value::Nat(a), Value::Nat(b)) => {
                let cap = BigUint::from(*cap);
                Value::Nat((a + b).min(cap))
            }
            (MonoidKind::M2, Value::Nat(a), Value::Nat(b)) => {
                const TABLE: [[u8; 3]; 3] = [[0, 1, 2], [1, 2, 1], [2, 1, 2]];
                let (i, j) = (nat_to_usize(a), nat_to_usize(b));
                Value::nat(TABLE[i][j] as u64)
            }
            (MonoidKind::RationalsNonneg, Value::Rat(a), Value::Rat(b))
            | (MonoidKind::GapRationals, Value::Rat(a), Value::Rat(b)) => Value::Rat(a + b),
            (MonoidKind::BoundedOrder { .. }, Value::Nat(a), Value::Nat(b)) => {
                Value::Nat(a.max(b).clone())
            }
            (MonoidKind::Fuzzy, Value::Rat(a), Value::Rat(b)) => Value::Rat(a.max(b).clone()),
            (MonoidKind::PowerSet { .. }, Value::Set(a), Value::Set(b)) => {
                Value::Set(a.union(b).cloned().collect())
            }
            (MonoidKind::TruncatedPowerset { k }, Value::Nat(a), Value::Nat(b)) => {
                let top = BigUint::from(k + 1);
                if a.is_zero() {
                    Value::Nat(b.clone())
                } else if b.is_zero() {
                    Value::Nat(a.clone())
                } else if *a == top || *b == top {
                    Value::Nat(top)
                } else if a == b {
                    Value::Nat(a.clone())
                } else {
                    Value::Nat(top)
                }
            }
            (MonoidKind::FiniteTable { elements, table, .. }, Value::Sym(a), Value::Sym(b)) => {
                let i = elements.iter().position(|e| e == a).expect("validated");
                let j = elements.iter().position(|e| e == b).expect("validated");
                Value::Sym(elements[table[i][j]].clone())
            }
            (MonoidKind::Free { .. }, Value::Map(a), Value::Map(b)) => {
                let mut out = a.clone();
                for (g, c) in b {
                    let cb = expect_nat(c);
                    out.entry(g.clone())
                        .and_modify(|cur| *cur = Value::Nat(expect_nat(cur) + cb))
                        .or_insert_with(|| c.clone());
                }
                Value::Map(out)
            }
            (MonoidKind::Power { base, .. }, Value::Map(a), Value::Map(b)) => {
                let mut out = a.clone();
                for (key, comp) in b {
                    match out.remove(key) {
                        None => {
                            out.insert(key.clone(), comp.clone());
                        }
                        Some(existing) => {
                            let sum = base.add(&existing, comp);
                            if !base.is_zero(&sum) {
                                out.insert(key.clone(), sum);
                            }
                        }
                    }
                }
                Value::Map(out)
            }
            _ => panic!("add on unvalidated elements"),
        }
    }

    /// n-fold sum of `v` (binary doubling).
    pub fn n_times(&self, v: &Value, n: u64) -> Value {
        let mut acc = self.zero();
        let mut pow = v.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &pow);
            }
            n >>= 1;
            if n > 0 {
                pow = self.add(&pow, &pow);
            }
        }
        acc
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Value>>(&self, items: I) -> Value {
        items
            .into_iter()
            .fold(self.zero(), |acc, v| self.add(&acc, v))
    }

    /// Decides b ⊑ c in the canonical preorder and returns a witness `a`
    /// with b + a = c when one exists. Finite monoids scan the addition
    /// table in enumeration order (zero first), so ties resolve
    /// deterministically.
    pub fn try_subtract(&self, b: &Value, c: &Value) -> Result<Option<Value>> {
        if !self.caps.preorder {
            return Err(Error::CapabilityMissing {
                monoid: self.name.clone(),
                capability: "preorder".into(),
            });
        }
        match (&self.kind, b, c) {
            (MonoidKind::Naturals, Value::Nat(x), Value::Nat(y)) => {
                Ok(if x <= y { Some(Value::Nat(y - x)) } else { None })
            }
            (MonoidKind::RationalsNonneg, Value::Rat(x), Value::Rat(y)) => {
                Ok(if x <= y { Some(Value::Rat(y - x)) } else { None })
            }
            (MonoidKind::GapRationals, Value::Rat(x), Value::Rat(y)) => {
                let d = y - x;
                Ok(if d.is_zero() || d >= BigRational::one() {
                    Some(Value::Rat(d))
                } else {
                    None
                })
            }
            (MonoidKind::Fuzzy, Value::Rat(x), Value::Rat(y)) => Ok(if x == y {
                Some(Value::Rat(BigRational::zero()))
            } else if x < y {
                Some(Value::Rat(y.clone()))
            } else {
                None
            }),
            (MonoidKind::Free { .. }, Value::Map(_), Value::Map(_))
            | (MonoidKind::Power { .. }, Value::Map(_), Value::Map(_)) => {
                self.try_subtract_componentwise(b, c)
            }
            _ if self.caps.finite => {
                for a in self.enumerate()? {
                    if self.add(b, &a) == *c {
                        return Ok(Some(a));
                    }
                }
                Ok(None)
            }
            _ => Err(Error::CapabilityMissing {
                monoid: self.name.clone(),
                capability: "preorder".into(),
            }),
        }
    }

    fn try_subtract_componentwise(&self, b: &Value, c: &Value) -> Result<Option<Value>> {
        let base = &self
            .caps
            .power
            .as_ref()
            .expect("free/power monoids carry a power capability")
            .base;
        let (bm, cm) = match (b, c) {
            (Value::Map(bm), Value::Map(cm)) => (bm, cm),
            _ => unreachable!("validated"),
        };
        let mut out = BTreeMap::new();
        for (key, bv) in bm {
            let cv = cm.get(key).cloned().unwrap_or_else(|| base.zero());
            match base.try_subtract(bv, &cv)? {
                Some(a) if !base.is_zero(&a) => {
                    out.insert(key.clone(), a);
                }
                Some(_) => {}
                None => return Ok(None),
            }
        }
        for (key, cv) in cm {
            if !bm.contains_key(key) {
                out.insert(key.clone(), cv.clone());
            }
        }
        Ok(Some(Value::Map(out)))
    }

    /// Enumerates all elements of a finite monoid, zero first.
    pub fn enumerate(&self) -> Result<Vec<Value>> {
        match &self.kind {
            MonoidKind::Boolean => Ok(vec![Value::nat(0), Value::nat(1)]),
            MonoidKind::TruncatedNaturals { cap } => Ok((0..=*cap).map(Value::nat).collect()),
            MonoidKind::M2 => Ok((0..=2).map(Value::nat).collect()),
            MonoidKind::BoundedOrder { max } => Ok((0..=*max).map(Value::nat).collect()),
            MonoidKind::TruncatedPowerset { k } => Ok((0..=k + 1).map(Value::nat).collect()),
            MonoidKind::PowerSet { universe } => {
                if universe.len() > 20 {
                    return Err(Error::InvalidParams(
                        "powerset universe too large to enumerate".into(),
                    ));
                }
                let n = universe.len();
                let mut out = Vec::with_capacity(1 << n);
                for mask in 0u32..(1 << n) {
                    let set: BTreeSet<String> = (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| universe[i].clone())
                        .collect();
                    out.push(Value::Set(set));
                }
                Ok(out)
            }
            MonoidKind::FiniteTable { elements, .. } => {
                Ok(elements.iter().map(|e| Value::Sym(e.clone())).collect())
            }
            _ => Err(Error::InfiniteMonoid(self.name.clone())),
        }
    }

    /// Semiring multiplication.
    pub fn multiply(&self, p: &Value, q: &Value) -> Result<Value> {
        if self.caps.semiring.is_none() {
            return Err(Error::CapabilityMissing {
                monoid: self.name.clone(),
                capability: "semiring".into(),
            });
        }
        Ok(match (&self.kind, p, q) {
            (MonoidKind::Boolean, Value::Nat(a), Value::Nat(b)) => Value::Nat(a.min(b).clone()),
            (MonoidKind::Naturals, Value::Nat(a), Value::Nat(b)) => Value::Nat(a * b),
            (MonoidKind::RationalsNonneg, Value::Rat(a), Value::Rat(b)) => Value::Rat(a * b),
            (MonoidKind::BoundedOrder { .. }, Value::Nat(a), Value::Nat(b)) => {
                Value::Nat(a.min(b).clone())
            }
            (MonoidKind::Fuzzy, Value::Rat(a), Value::Rat(b)) => Value::Rat(a.min(b).clone()),
            (MonoidKind::PowerSet { .. }, Value::Set(a), Value::Set(b)) => {
                Value::Set(a.intersection(b).cloned().collect())
            }
            _ => panic!("multiply on unvalidated elements"),
        })
    }

    /// Semifield division p / q with q != 0.
    pub fn divide(&self, p: &Value, q: &Value) -> Result<Value> {
        if !self.caps.semifield {
            return Err(Error::CapabilityMissing {
                monoid: self.name.clone(),
                capability: "semifield".into(),
            });
        }
        match (&self.kind, p, q) {
            (MonoidKind::RationalsNonneg, Value::Rat(a), Value::Rat(b)) => {
                if b.is_zero() {
                    Err(Error::InvalidElement {
                        monoid: self.name.clone(),
                        detail: "division by zero".into(),
                    })
                } else {
                    Ok(Value::Rat(a / b))
                }
            }
            _ => Err(Error::CapabilityMissing {
                monoid: self.name.clone(),
                capability: "semifield".into(),
            }),
        }
    }

    /// Splits a power/free element into its base-monoid components.
    pub fn components(&self, v: &Value) -> Result<BTreeMap<String, Value>> {
        let power = self.caps.power.as_ref().ok_or_else(|| Error::CapabilityMissing {
            monoid: self.name.clone(),
            capability: "power-structure".into(),
        })?;
        Ok(match (v, &self.kind) {
            (Value::Map(m), _) => m.clone(),
            (Value::Set(s), MonoidKind::PowerSet { .. }) => s
                .iter()
                .map(|item| (item.clone(), Value::nat(1)))
                .collect(),
            _ => {
                let _ = power;
                return self.bad("element has no component decomposition");
            }
        })
    }

    /// Rebuilds a monoid element from base components, dropping zeros.
    pub fn from_components(&self, comps: BTreeMap<String, Value>) -> Result<Value> {
        let power = self.caps.power.as_ref().ok_or_else(|| Error::CapabilityMissing {
            monoid: self.name.clone(),
            capability: "power-structure".into(),
        })?;
        let base = &power.base;
        let nonzero: BTreeMap<String, Value> = comps
            .into_iter()
            .filter(|(_, c)| !base.is_zero(c))
            .collect();
        let v = match &self.kind {
            MonoidKind::PowerSet { .. } => Value::Set(nonzero.into_keys().collect()),
            _ => Value::Map(nonzero),
        };
        self.validate(&v)?;
        Ok(v)
    }

    /// Derived predicate: does the capability record entail the
    /// transportation property? Never a primitive flag.
    pub fn has_transportation_property(&self) -> bool {
        if self.caps.lattice() || self.caps.semifield {
            return true;
        }
        if self.caps.preorder && self.caps.weakly_cancellative && self.caps.totally_preordered {
            return true;
        }
        if let Some(power) = &self.caps.power {
            return power.base.has_transportation_property();
        }
        false
    }
}

fn nat_to_usize(n: &BigUint) -> usize {
    use num_traits::ToPrimitive;
    n.to_usize().expect("small finite-monoid value")
}

fn expect_nat(v: &Value) -> &BigUint {
    match v {
        Value::Nat(n) => n,
        _ => panic!("validated free coefficient"),
    }
}

pub fn monoid_from_json(desc: &serde_json::Value) -> Result<MonoidHandle> {
    match desc {
        serde_json::Value::String(name) => Monoid::make_builtin(name, &serde_json::Value::Null),
        serde_json::Value::Object(map) => {
            let name = map
                .get("name")
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::Parse("monoid descriptor needs a `name`".into()))?;
            Monoid::make_builtin(name, desc)
        }
        _ => Err(Error::Parse("monoid descriptor must be a string or object".into())),
    }
}

/// Renders a monoid descriptor that `monoid_from_json` parses back to an
/// equal monoid.
pub fn monoid_to_json(m: &Monoid) -> serde_json::Value {
    use serde_json::json;
    match &m.kind {
        MonoidKind::Boolean => json!({"name": "B"}),
        MonoidKind::Naturals => json!({"name": "N"}),
        MonoidKind::TruncatedNaturals { cap } if *cap == 2 => json!({"name": "N2"}),
        MonoidKind::TruncatedNaturals { cap } => json!({"name": "truncated-naturals", "cap": cap}),
        MonoidKind::M2 => json!({"name": "M2"}),
        MonoidKind::RationalsNonneg => json!({"name": "Q"}),
        MonoidKind::GapRationals => json!({"name": "R1"}),
        MonoidKind::BoundedOrder { max } => json!({"name": "bounded-order", "max": max}),
        MonoidKind::Fuzzy => json!({"name": "fuzzy"}),
        MonoidKind::PowerSet { universe } => json!({"name": "powerset", "universe": universe}),
        MonoidKind::TruncatedPowerset { k } => json!({"name": "truncated-powerset", "k": k}),
        MonoidKind::FiniteTable {
            elements,
            table,
            weakly_cancellative,
            totally_preordered,
        } => json!({
            "name": "finite-table",
            "elements": elements,
            "table": table,
            "weakly-cancellative": weakly_cancellative,
            "totally-preordered": totally_preordered,
        }),
        MonoidKind::Free { generators } => match generators {
            Some(g) => json!({"name": "free", "generators": g.iter().collect::<Vec<_>>()}),
            None => json!({"name": "free"}),
        },
        MonoidKind::Power { base, keys } => {
            let mut obj = serde_json::Map::new();
            obj.insert("name".into(), "power".into());
            obj.insert("base".into(), monoid_to_json(base));
            if let Some(ks) = keys {
                obj.insert(
                    "index".into(),
                    serde_json::Value::Array(
                        ks.iter().map(|k| serde_json::Value::String(k.clone())).collect(),
                    ),
                );
            }
            serde_json::Value::Object(obj)
        }
    }
}
