//! Balanced transportation instances over a monoid and their solvers:
//! Northwest Corner recursion, exhaustive finite-monoid backtracking,
//! component-wise solving for powers, plus the direct lattice/semifield
//! constructions used by the capability dispatcher.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::monoid::{MonoidHandle, Value};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct TransportInstance {
    pub monoid: MonoidHandle,
    pub b: Vec<Value>,
    pub c: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub d: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Solved(TransportSolution),
    Infeasible,
    Unbalanced,
    BudgetExceeded,
}

/// Which route produced a solution; embedded in CLI reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Lattice,
    Semifield,
    Northwest,
    Componentwise,
    Exhaustive,
}

impl SolverMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SolverMethod::Lattice => "lattice",
            SolverMethod::Semifield => "semifield",
            SolverMethod::Northwest => "northwest",
            SolverMethod::Componentwise => "componentwise",
            SolverMethod::Exhaustive => "exhaustive",
        }
    }
}

impl TransportInstance {
    pub fn new(monoid: MonoidHandle, b: Vec<Value>, c: Vec<Value>) -> Result<TransportInstance> {
        if b.is_empty() || c.is_empty() {
            return Err(Error::InvalidParams(
                "transport instance needs at least one row and one column".into(),
            ));
        }
        for v in b.iter().chain(&c) {
            monoid.validate(v)?;
        }
        Ok(TransportInstance { monoid, b, c })
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }
}

/// Total supply equals total demand.
pub fn is_balanced(inst: &TransportInstance) -> bool {
    inst.monoid.sum(&inst.b) == inst.monoid.sum(&inst.c)
}

/// Checks that `sol` satisfies every row and column equation of `inst`.
pub fn verify_solution(inst: &TransportInstance, sol: &TransportSolution) -> bool {
    let m = &inst.monoid;
    if sol.d.len() != inst.rows() || sol.d.iter().any(|r| r.len() != inst.cols()) {
        return false;
    }
    for (i, row) in sol.d.iter().enumerate() {
        if m.sum(row) != inst.b[i] {
            return false;
        }
    }
    for j in 0..inst.cols() {
        if m.sum(sol.d.iter().map(|r| &r[j])) != inst.c[j] {
            return false;
        }
    }
    true
}

fn zero_matrix(inst: &TransportInstance) -> Vec<Vec<Value>> {
    vec![vec![inst.monoid.zero(); inst.cols()]; inst.rows()]
}

/// Northwest Corner recursion for weakly cancellative, totally canonically
/// preordered monoids. Zero margins are eliminated up front; then each step
/// prefers the equality branch, then b1 ⊑ c1, then c1 ⊑ b1.
pub fn solve_northwest(inst: &TransportInstance) -> Result<TransportSolution> {
    let m = &inst.monoid;
    if !(m.caps.preorder && m.caps.weakly_cancellative && m.caps.totally_preordered) {
        return Err(Error::CapabilityMissing {
            monoid: m.name.clone(),
            capability: "northwest (weakly cancellative + totally preordered)".into(),
        });
    }
    if !is_balanced(inst) {
        return Err(Error::Unbalanced);
    }
    let mut d = zero_matrix(inst);
    let mut rows: Vec<(usize, Value)> = inst
        .b
        .iter()
        .enumerate()
        .filter(|(_, v)| !m.is_zero(v))
        .map(|(i, v)| (i, v.clone()))
        .collect();
    let mut cols: Vec<(usize, Value)> = inst
        .c
        .iter()
        .enumerate()
        .filter(|(_, v)| !m.is_zero(v))
        .map(|(j, v)| (j, v.clone()))
        .collect();
    rows.reverse();
    cols.reverse();

    while rows.len() > 1 && cols.len() > 1 {
        let (i, bv) = rows.last().cloned().expect("nonempty");
        let (j, cv) = cols.last().cloned().expect("nonempty");
        if bv == cv {
            d[i][j] = bv;
            rows.pop();
            cols.pop();
        } else if let Some(a) = m.try_subtract(&bv, &cv)? {
            // b1 + a = c1 with a != 0: row eliminated, c1 becomes a
            d[i][j] = bv;
            rows.pop();
            cols.last_mut().expect("nonempty").1 = a;
        } else if let Some(a) = m.try_subtract(&cv, &bv)? {
            d[i][j] = cv;
            cols.pop();
            rows.last_mut().expect("nonempty").1 = a;
        } else {
            return Err(Error::Internal(format!(
                "monoid {} declared totally preordered but two margins are incomparable",
                m.name
            )));
        }
    }
    if rows.len() == 1 {
        let (i, _) = *rows.last().expect("nonempty");
        for (j, cv) in cols.into_iter().rev() {
            d[i][j] = cv;
        }
    } else if cols.len() == 1 {
        let (j, _) = *cols.last().expect("nonempty");
        for (i, bv) in rows.into_iter().rev() {
            d[i][j] = bv;
        }
    }
    let sol = TransportSolution { d };
    if !verify_solution(inst, &sol) {
        return Err(Error::Internal(
            "northwest recursion produced an invalid solution".into(),
        ));
    }
    Ok(sol)
}

/// Bounded distributive lattices solve balanced instances with the meet:
/// x_ij = b_i × c_j (the standard-join construction).
pub fn solve_lattice(inst: &TransportInstance) -> Result<TransportSolution> {
    let m = &inst.monoid;
    if !m.caps.lattice() {
        return Err(Error::CapabilityMissing {
            monoid: m.name.clone(),
            capability: "lattice semiring".into(),
        });
    }
    if !is_balanced(inst) {
        return Err(Error::Unbalanced);
    }
    let mut d = zero_matrix(inst);
    for i in 0..inst.rows() {
        for j in 0..inst.cols() {
            d[i][j] = m.multiply(&inst.b[i], &inst.c[j])?;
        }
    }
    let sol = TransportSolution { d };
    if !verify_solution(inst, &sol) {
        return Err(Error::Internal("lattice meet solution failed to verify".into()));
    }
    Ok(sol)
}

/// Semifields scale: x_ij = b_i × c_j / total (all-zero when total = 0).
pub fn solve_semifield(inst: &TransportInstance) -> Result<TransportSolution> {
    let m = &inst.monoid;
    if !m.caps.semifield {
        return Err(Error::CapabilityMissing {
            monoid: m.name.clone(),
            capability: "semifield".into(),
        });
    }
    if !is_balanced(inst) {
        return Err(Error::Unbalanced);
    }
    let total = m.sum(&inst.b);
    let mut d = zero_matrix(inst);
    if !m.is_zero(&total) {
        for i in 0..inst.rows() {
            for j in 0..inst.cols() {
                let prod = m.multiply(&inst.b[i], &inst.c[j])?;
                d[i][j] = m.divide(&prod, &total)?;
            }
        }
    }
    let sol = TransportSolution { d };
    if !verify_solution(inst, &sol) {
        return Err(Error::Internal("semifield scaling failed to verify".into()));
    }
    Ok(sol)
}

/// Backtracking over matrix cells in row-major order for finite monoids.
/// Candidates follow enumeration order (zero first), so the first solution
/// found is deterministic and biased toward sparsity. Pruning checks that
/// each partial row/column sum can still reach its target with the
/// remaining number of cells.
pub fn solve_exhaustive(inst: &TransportInstance, budget: u64) -> Result<SolveOutcome> {
    let m = &inst.monoid;
    if !m.caps.finite {
        return Err(Error::InfiniteMonoid(m.name.clone()));
    }
    if !is_balanced(inst) {
        return Ok(SolveOutcome::Unbalanced);
    }
    let elems = m.enumerate()?;
    let k = elems.len();
    if k > 128 {
        return Err(Error::InvalidParams(format!(
            "finite monoid {} has {} elements; exhaustive solver supports at most 128",
            m.name, k
        )));
    }
    let index_of = |v: &Value| -> Result<usize> {
        elems
            .iter()
            .position(|e| e == v)
            .ok_or_else(|| Error::Internal("margin value missing from enumeration".into()))
    };
    let mut add = vec![vec![0usize; k]; k];
    for i in 0..k {
        for j in 0..k {
            add[i][j] = index_of(&m.add(&elems[i], &elems[j]))?;
        }
    }
    let nrows = inst.rows();
    let ncols = inst.cols();
    let b_idx: Vec<usize> = inst.b.iter().map(&index_of).collect::<Result<_>>()?;
    let c_idx: Vec<usize> = inst.c.iter().map(&index_of).collect::<Result<_>>()?;

    // back[t][steps] = bitmask of partial sums that can still reach target t
    // by adding exactly `steps` more elements
    let max_steps = nrows.max(ncols);
    let mut back: BTreeMap<usize, Vec<u128>> = BTreeMap::new();
    for &t in b_idx.iter().chain(&c_idx) {
        back.entry(t).or_insert_with(|| {
            let mut layers = vec![0u128; max_steps + 1];
            layers[0] = 1u128 << t;
            for step in 1..=max_steps {
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
    let reachable = |target: usize, partial: usize, steps: usize| -> bool {
        back[&target][steps] & (1u128 << partial) != 0
    };

    let zero = index_of(&m.zero())?;
    let mut grid = vec![vec![0usize; ncols]; nrows];
    let mut row_sum = vec![zero; nrows];
    let mut col_sum = vec![zero; ncols];
    let mut nodes: u64 = 0;

    // iterative backtracking over cells in row-major order
    let total_cells = nrows * ncols;
    let mut cell = 0usize;
    let mut choice = vec![0usize; total_cells];
    loop {
        if cell == total_cells {
            let d = grid
                .iter()
                .map(|row| row.iter().map(|&e| elems[e].clone()).collect())
                .collect();
            let sol = TransportSolution { d };
            debug_assert!(verify_solution(inst, &sol));
            return Ok(SolveOutcome::Solved(sol));
        }
        let (i, j) = (cell / ncols, cell % ncols);
        let mut advanced = false;
        while choice[cell] < k {
            let e = choice[cell];
            nodes += 1;
            if nodes > budget {
                return Ok(SolveOutcome::BudgetExceeded);
            }
            let nr = add[row_sum[i]][e];
            let nc = add[col_sum[j]][e];
            if reachable(b_idx[i], nr, ncols - 1 - j) && reachable(c_idx[j], nc, nrows - 1 - i) {
                grid[i][j] = e;
                row_sum[i] = nr;
                col_sum[j] = nc;
                choice[cell] += 1;
                cell += 1;
                if cell < total_cells {
                    choice[cell] = 0;
                }
                advanced = true;
                break;
            }
            choice[cell] += 1;
        }
        if !advanced {
            if cell == 0 {
                return Ok(SolveOutcome::Infeasible);
            }
            cell -= 1;
            let (pi, pj) = (cell / ncols, cell % ncols);
            let e = grid[pi][pj];
            // undo: recompute the sums without the last element
            row_sum[pi] = recompute(&add, zero, &grid[pi][..pj]);
            col_sum[pj] = recompute_col(&add, zero, &grid, pj, pi);
            let _ = e;
        }
    }
}

fn recompute(add: &[Vec<usize>], zero: usize, prefix: &[usize]) -> usize {
    prefix.iter().fold(zero, |acc, &e| add[acc][e])
}

fn recompute_col(add: &[Vec<usize>], zero: usize, grid: &[Vec<usize>], col: usize, upto: usize) -> usize {
    (0..upto).fold(zero, |acc, i| add[acc][grid[i][col]])
}

/// Solves a power-monoid instance component by component and assembles the
/// matrix of finite-support maps.
pub fn solve_componentwise(inst: &TransportInstance, budget: u64) -> Result<TransportSolution> {
    let m = &inst.monoid;
    let power = m.caps.power.clone().ok_or_else(|| Error::CapabilityMissing {
        monoid: m.name.clone(),
        capability: "power-structure".into(),
    })?;
    if !is_balanced(inst) {
        return Err(Error::Unbalanced);
    }
    let base = power.base;
    let mut keys: Vec<String> = Vec::new();
    let mut b_comp: Vec<BTreeMap<String, Value>> = Vec::with_capacity(inst.rows());
    let mut c_comp: Vec<BTreeMap<String, Value>> = Vec::with_capacity(inst.cols());
    for v in &inst.b {
        let comps = m.components(v)?;
        keys.extend(comps.keys().cloned());
        b_comp.push(comps);
    }
    for v in &inst.c {
        let comps = m.components(v)?;
        keys.extend(comps.keys().cloned());
        c_comp.push(comps);
    }
    keys.sort();
    keys.dedup();

    let mut comp_matrices: Vec<(String, TransportSolution)> = Vec::with_capacity(keys.len());
    for key in &keys {
        let b: Vec<Value> = b_comp
            .iter()
            .map(|c| c.get(key).cloned().unwrap_or_else(|| base.zero()))
            .collect();
        let c: Vec<Value> = c_comp
            .iter()
            .map(|c| c.get(key).cloned().unwrap_or_else(|| base.zero()))
            .collect();
        let sub = TransportInstance::new(base.clone(), b, c)?;
        match solve_auto(&sub, budget)? {
            (SolveOutcome::Solved(sol), _) => comp_matrices.push((key.clone(), sol)),
            (SolveOutcome::Infeasible, _) | (SolveOutcome::Unbalanced, _) => {
                return Err(Error::ComponentInfeasible(format!(
                    "component `{key}` has no solution in {}",
                    base.name
                )))
            }
            (SolveOutcome::BudgetExceeded, _) => {
                return Err(Error::ComponentInfeasible(format!(
                    "component `{key}` exceeded the solver budget"
                )))
            }
        }
    }

    let mut d = zero_matrix(inst);
    for i in 0..inst.rows() {
        for j in 0..inst.cols() {
            let mut comps = BTreeMap::new();
            for (key, sol) in &comp_matrices {
                let v = &sol.d[i][j];
                if !base.is_zero(v) {
                    comps.insert(key.clone(), v.clone());
                }
            }
            d[i][j] = m.from_components(comps)?;
        }
    }
    let sol = TransportSolution { d };
    if !verify_solution(inst, &sol) {
        return Err(Error::Internal("componentwise assembly failed to verify".into()));
    }
    Ok(sol)
}

/// Capability dispatch: lattice meet, then semifield scaling, then the
/// Northwest Corner method, then component-wise solving, then exhaustive
/// search on finite monoids. `Err(CapabilityMissing)` means undecidable
/// with this monoid's declared capabilities.
pub fn solve_auto(inst: &TransportInstance, budget: u64) -> Result<(SolveOutcome, SolverMethod)> {
    let m = &inst.monoid;
    if !is_balanced(inst) {
        return Ok((SolveOutcome::Unbalanced, SolverMethod::Exhaustive));
    }
    if m.caps.lattice() {
        return Ok((
            SolveOutcome::Solved(solve_lattice(inst)?),
            SolverMethod::Lattice,
        ));
    }
    if m.caps.semifield {
        return Ok((
            SolveOutcome::Solved(solve_semifield(inst)?),
            SolverMethod::Semifield,
        ));
    }
    if m.caps.preorder && m.caps.weakly_cancellative && m.caps.totally_preordered {
        return Ok((
            SolveOutcome::Solved(solve_northwest(inst)?),
            SolverMethod::Northwest,
        ));
    }
    if m.caps.power.is_some() {
        return Ok((
            SolveOutcome::Solved(solve_componentwise(inst, budget)?),
            SolverMethod::Componentwise,
        ));
    }
    if m.caps.finite {
        return Ok((solve_exhaustive(inst, budget)?, SolverMethod::Exhaustive));
    }
    Err(Error::CapabilityMissing {
        monoid: m.name.clone(),
        capability: "no transportation solver applies".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::Monoid;

    fn nat_inst(monoid: MonoidHandle, b: &[u64], c: &[u64]) -> TransportInstance {
        TransportInstance::new(
            monoid,
            b.iter().map(|&x| Value::nat(x)).collect(),
            c.iter().map(|&x| Value::nat(x)).collect(),
        )
        .unwrap()
    }

    fn nats(sol: &TransportSolution) -> Vec<Vec<u64>> {
        sol.d
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        Value::Nat(n) => u64::try_from(n).unwrap(),
                        _ => panic!("nat expected"),
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn balance_checks() {
        let n = Monoid::naturals();
        assert!(is_balanced(&nat_inst(n.clone(), &[3, 2], &[1, 4])));
        assert!(!is_balanced(&nat_inst(n, &[1], &[1, 1])));
        let n2 = Monoid::truncated_naturals(2).unwrap();
        // 1+1+1 = 2 = 2+2 in N2
        assert!(is_balanced(&nat_inst(n2, &[1, 1, 1], &[2, 2])));
    }

    #[test]
    fn northwest_hand_example() {
        // hand-run of the recursion: c1 ⊑ b1 eliminates the column,
        // then the single remaining column takes the row margins
        let n = Monoid::naturals();
        let sol = solve_northwest(&nat_inst(n, &[3, 2], &[1, 4])).unwrap();
        assert_eq!(nats(&sol), vec![vec![1, 2], vec![0, 2]]);
    }

    #[test]
    fn northwest_base_cases() {
        let n = Monoid::naturals();
        let sol = solve_northwest(&nat_inst(n.clone(), &[5], &[5])).unwrap();
        assert_eq!(nats(&sol), vec![vec![5]]);
        let sol = solve_northwest(&nat_inst(n.clone(), &[1, 1], &[2])).unwrap();
        assert_eq!(nats(&sol), vec![vec![1], vec![1]]);
        assert!(matches!(
            solve_northwest(&nat_inst(n, &[1], &[2])),
            Err(Error::Unbalanced)
        ));
    }

    #[test]
    fn northwest_rejects_missing_capability() {
        let n2 = Monoid::truncated_naturals(2).unwrap();
        assert!(matches!(
            solve_northwest(&nat_inst(n2, &[1, 1], &[2])),
            Err(Error::CapabilityMissing { .. })
        ));
    }

    #[test]
    fn exhaustive_finds_sec_5_6_infeasible() {
        let n2 = Monoid::truncated_naturals(2).unwrap();
        let out = solve_exhaustive(&nat_inst(n2, &[1, 1, 1], &[2, 2]), DEFAULT_BUDGET).unwrap();
        assert_eq!(out, SolveOutcome::Infeasible);
    }

    #[test]
    fn exhaustive_first_solution_is_deterministic() {
        // independently hand-derived first solution in row-major,
        // zero-first order for B: b=(1,0,1), c=(1,1)
        let b = Monoid::boolean();
        let out = solve_exhaustive(&nat_inst(b, &[1, 0, 1], &[1, 1]), DEFAULT_BUDGET).unwrap();
        match out {
            SolveOutcome::Solved(sol) => {
                assert_eq!(nats(&sol), vec![vec![0, 1], vec![0, 0], vec![1, 0]]);
            }
            other => panic!("expected a solution, got {other:?}"),
        }
    }

    #[test]
    fn exhaustive_single_column_n2() {
        let n2 = Monoid::truncated_naturals(2).unwrap();
        let out = solve_exhaustive(&nat_inst(n2, &[1, 1], &[2]), DEFAULT_BUDGET).unwrap();
        match out {
            SolveOutcome::Solved(sol) => assert_eq!(nats(&sol), vec![vec![1], vec![1]]),
            other => panic!("expected a solution, got {other:?}"),
        }
    }

    #[test]
    fn exhaustive_rejects_infinite() {
        let n = Monoid::naturals();
        assert!(matches!(
            solve_exhaustive(&nat_inst(n, &[1], &[1]), DEFAULT_BUDGET),
            Err(Error::InfiniteMonoid(_))
        ));
    }

    #[test]
    fn lattice_route_matches_paper_matrix() {
        let b = Monoid::boolean();
        let (out, method) = solve_auto(&nat_inst(b, &[1, 0, 1], &[1, 1]), DEFAULT_BUDGET).unwrap();
        assert_eq!(method, SolverMethod::Lattice);
        match out {
            SolveOutcome::Solved(sol) => {
                assert_eq!(nats(&sol), vec![vec![1, 1], vec![0, 0], vec![1, 1]]);
            }
            other => panic!("expected a solution, got {other:?}"),
        }
    }

    #[test]
    fn componentwise_free_monoid() {
        // free{x,y}: b=(x+y, x), c=(x, x+y)
        let free = Monoid::free(None);
        let xy = Value::free([("x", 1), ("y", 1)]);
        let x = Value::free([("x", 1)]);
        let inst = TransportInstance::new(
            free.clone(),
            vec![xy.clone(), x.clone()],
            vec![x.clone(), xy.clone()],
        )
        .unwrap();
        let sol = solve_componentwise(&inst, DEFAULT_BUDGET).unwrap();
        let y = Value::free([("y", 1)]);
        let zero = free.zero();
        assert_eq!(sol.d, vec![vec![x.clone(), y], vec![zero, x]]);
    }

    #[test]
    fn componentwise_single_row_and_zeros() {
        let free = Monoid::free(None);
        let x2 = Value::free([("x", 2)]);
        let x = Value::free([("x", 1)]);
        let inst = TransportInstance::new(free.clone(), vec![x2], vec![x.clone(), x.clone()]).unwrap();
        let sol = solve_componentwise(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(sol.d, vec![vec![x.clone(), x]]);

        let pb = Monoid::power(Monoid::boolean(), None).unwrap();
        let zero = pb.zero();
        let inst = TransportInstance::new(pb, vec![zero.clone(), zero.clone()], vec![zero.clone(), zero.clone()])
            .unwrap();
        let sol = solve_componentwise(&inst, DEFAULT_BUDGET).unwrap();
        assert!(sol.d.iter().flatten().all(|v| *v == zero));
    }

    #[test]
    fn m2_northwest_agrees_with_exhaustive_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m2 = Monoid::m2();
        let mut checked = 0;
        for _ in 0..400 {
            let m = rng.random_range(1..=3);
            let n = rng.random_range(1..=3);
            let b: Vec<u64> = (0..m).map(|_| rng.random_range(0..=2)).collect();
            let c: Vec<u64> = (0..n).map(|_| rng.random_range(0..=2)).collect();
            let inst = nat_inst(m2.clone(), &b, &c);
            if !is_balanced(&inst) {
                continue;
            }
            checked += 1;
            let nw = solve_northwest(&inst).unwrap();
            assert!(verify_solution(&inst, &nw));
            match solve_exhaustive(&inst, DEFAULT_BUDGET).unwrap() {
                SolveOutcome::Solved(ex) => assert!(verify_solution(&inst, &ex)),
                other => panic!("balanced M2 instance must be solvable, got {other:?}"),
            }
        }
        assert!(checked > 50, "sampled enough balanced instances");
    }
}
