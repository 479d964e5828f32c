//! Integer partitions and the valley diagrams S(λ) indexing residue subspaces.

use std::fmt;

use crate::error::{Error, Result};

/// Weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::domain("a partition needs at least one positive part"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// m_k for k = 1..=λ_1; index 0 holds m_1.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.0[0]];
        for &p in &self.0 {
            m[p - 1] += 1;
        }
        m
    }

    /// ∏_k m_k!.
    pub fn multiplicity_factorial(&self) -> u128 {
        self.multiplicities().iter().map(|&m| factorial(m)).product()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

pub(crate) fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All partitions of n in reverse lexicographic order.
pub fn partitions_of(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=max.min(rest)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    Ok(out)
}

/// A monomial q^qexp · z_var^vpow; with no variable it is the constant q^qexp.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub qexp: i32,
    pub var: Option<usize>,
    pub vpow: i8,
}

impl Monomial {
    pub fn var(label: usize) -> Self {
        Self { qexp: 0, var: Some(label), vpow: 1 }
    }

    pub fn constant(qexp: i32) -> Self {
        Self { qexp, var: None, vpow: 0 }
    }

    /// The monomial with z_label replaced by `target`.
    pub fn substitute(self, label: usize, target: Monomial) -> Monomial {
        if self.var != Some(label) {
            return self;
        }
        if self.vpow > 0 {
            Monomial { qexp: self.qexp + target.qexp, var: target.var, vpow: target.vpow }
        } else {
            Monomial { qexp: self.qexp - target.qexp, var: target.var, vpow: -target.vpow }
        }
    }

    pub fn is_raw(&self, label: usize) -> bool {
        *self == Monomial::var(label)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.var, self.vpow) {
            (None, _) => write!(f, "q^{}", self.qexp),
            (Some(v), 1) => write!(f, "q^{}·z{}", self.qexp, v),
            (Some(v), _) => write!(f, "q^{}/z{}", self.qexp, v),
        }
    }
}

/// One row: labels left to right, strictly decreasing to the pivot and increasing after it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Row {
    labels: Vec<usize>,
    pivot: usize,
}

impl Row {
    pub fn new(labels: Vec<usize>, pivot: usize) -> Result<Self> {
        let ok = pivot < labels.len()
            && labels[..=pivot].windows(2).all(|w| w[0] > w[1])
            && labels[pivot..].windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(Self { labels, pivot })
        } else {
            Err(Error::domain(format!("row {labels:?} is not a valley with pivot {pivot}")))
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn pivot_index(&self) -> usize {
        self.pivot
    }

    pub fn pivot_label(&self) -> usize {
        self.labels[self.pivot]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// One residue substitution z_label ↦ target, with target in a not-yet-consumed variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub label: usize,
    pub target: Monomial,
}

/// Element of S(λ).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    rows: Vec<Row>,
    n: usize,
}

impl Diagram {
    pub fn new(rows: Vec<Row>) -> Result<Self> {
        let mut seen: Vec<usize> = rows.iter().flat_map(|r| r.labels.iter().copied()).collect();
        seen.sort_unstable();
        let n = seen.len();
        if seen != (1..=n).collect::<Vec<_>>() {
            return Err(Error::domain("diagram labels must be exactly 1..n"));
        }
        if rows.windows(2).any(|w| w[0].len() < w[1].len()) {
            return Err(Error::domain("rows must be ordered by weakly decreasing length"));
        }
        Ok(Self { rows, n })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn partition(&self) -> Partition {
        Partition(self.rows.iter().map(Row::len).collect())
    }

    /// Pivot labels in row order; these index the free variables.
    pub fn free_vars(&self) -> Vec<usize> {
        self.rows.iter().map(Row::pivot_label).collect()
    }

    pub fn arrow_count(&self) -> usize {
        self.n - self.rows.len()
    }

    /// One representative per unordered row set: equal-length rows appear by increasing pivot.
    pub fn is_canonical(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[0].len() != w[1].len() || w[0].pivot_label() < w[1].pivot_label())
    }

    /// Residue order: each row's left arm outside-in, then its right arm outside-in.
    pub fn steps(&self) -> Vec<Step> {
        let mut steps = Vec::with_capacity(self.arrow_count());
        for row in &self.rows {
            let l = &row.labels;
            for i in 0..row.pivot {
                steps.push(Step { label: l[i], target: Monomial { qexp: 1, ..Monomial::var(l[i + 1]) } });
            }
            for i in (row.pivot + 1..l.len()).rev() {
                let inner = l[i - 1];
                let target = if i == row.pivot + 1 {
                    Monomial { qexp: 0, var: Some(inner), vpow: -1 }
                } else {
                    Monomial { qexp: 1, var: Some(inner), vpow: 1 }
                };
                steps.push(Step { label: l[i], target });
            }
        }
        steps
    }

    pub fn substitution_map(&self) -> SubstitutionMap {
        let mut map = vec![Monomial::constant(0); self.n];
        for row in &self.rows {
            let m = row.pivot_label();
            for (i, &lab) in row.labels.iter().enumerate() {
                map[lab - 1] = if i <= row.pivot {
                    Monomial { qexp: (row.pivot - i) as i32, var: Some(m), vpow: 1 }
                } else {
                    Monomial { qexp: (i - row.pivot - 1) as i32, var: Some(m), vpow: -1 }
                };
            }
        }
        SubstitutionMap { map, free_vars: self.free_vars() }
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, row) in self.rows.iter().enumerate() {
            if r > 0 {
                write!(f, " | ")?;
            }
            for (i, lab) in row.labels.iter().enumerate() {
                if i > 0 {
                    let arrow = if i <= row.pivot {
                        "→⁺"
                    } else if i == row.pivot + 1 {
                        "←⁻"
                    } else {
                        "←⁺"
                    };
                    write!(f, "{arrow}")?;
                }
                write!(f, "{lab}")?;
            }
        }
        Ok(())
    }
}

/// Final image of every variable in terms of the free pivots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionMap {
    map: Vec<Monomial>,
    free_vars: Vec<usize>,
}

impl SubstitutionMap {
    pub fn image(&self, label: usize) -> Monomial {
        self.map[label - 1]
    }

    pub fn images(&self) -> &[Monomial] {
        &self.map
    }

    pub fn free_vars(&self) -> &[usize] {
        &self.free_vars
    }
}

pub fn substitution_map(d: &Diagram) -> SubstitutionMap {
    d.substitution_map()
}

/// n!/∏λ_i! · ∏ 2^{λ_i−1}.
pub fn count_diagrams(lambda: &Partition) -> u128 {
    let denom: u128 = lambda.0.iter().map(|&p| factorial(p)).product();
    let arms: u128 = lambda.0.iter().map(|&p| 1u128 << (p - 1)).product();
    factorial(lambda.n()) / denom * arms
}

/// Every diagram of shape λ once, in canonical order (row sets lexicographic, then arm bitmasks).
pub fn enumerate_diagrams(lambda: &Partition) -> Vec<Diagram> {
    let n = lambda.n();
    let mut out = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    assign_rows(&lambda.0, (1..=n).collect(), &mut rows, &mut |sets| {
        expand_arms(sets, 0, &mut Vec::new(), &mut out, n);
    });
    out
}

fn assign_rows(sizes: &[usize], remaining: Vec<usize>, acc: &mut Vec<Vec<usize>>, emit: &mut dyn FnMut(&[Vec<usize>])) {
    let Some((&size, rest)) = sizes.split_first() else {
        emit(acc);
        return;
    };
    for combo in combinations(&remaining, size) {
        let left: Vec<usize> = remaining.iter().copied().filter(|x| !combo.contains(x)).collect();
        acc.push(combo);
        assign_rows(rest, left, acc, emit);
        acc.pop();
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn expand_arms(sets: &[Vec<usize>], idx: usize, rows: &mut Vec<Row>, out: &mut Vec<Diagram>, n: usize) {
    if idx == sets.len() {
        out.push(Diagram { rows: rows.clone(), n });
        return;
    }
    let set = &sets[idx];
    let pivot = set[0];
    let others = &set[1..];
    for mask in 0u32..(1u32 << others.len()) {
        let mut left: Vec<usize> = Vec::new();
        let mut right: Vec<usize> = Vec::new();
        for (b, &lab) in others.iter().enumerate() {
            if mask & (1 << b) != 0 {
                left.push(lab);
            } else {
                right.push(lab);
            }
        }
        left.reverse();
        let p = left.len();
        let labels: Vec<usize> = left.into_iter().chain(std::iter::once(pivot)).chain(right).collect();
        rows.push(Row { labels, pivot: p });
        expand_arms(sets, idx + 1, rows, out, n);
        rows.pop();
    }
}
