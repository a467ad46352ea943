//! Content-aware codebook learning: adjacency counting over
//! (carrier, message) pairs and maximum-weight perfect matching.

use crate::error::{Error, Result};
use crate::lattice::{neighbor, CosetTable, LatticeSpec};
use crate::message::Message;
use crate::real::Real;

/// Largest codebook the learner accepts. Dense `α^N × α^N` counting and the
/// assignment solve stop being practical beyond this.
pub const MAX_LEARNABLE_COSETS: usize = 1024;

/// A permutation of coset indices; `map(i)` is the coset used for message `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            if v >= n {
                return Err(Error::InvalidPermutation(format!("entry {v} out of range 0..{n}")));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("duplicate entry {v}")));
            }
            seen[v] = true;
        }
        Ok(Self(values))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn map(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Index `i` with `map(i) == j`; the permutation is bijective so this
    /// always exists.
    pub fn position_of(&self, j: usize) -> usize {
        self.0.iter().position(|&v| v == j).expect("bijection")
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0usize; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Co-occurrence counts: `row j` = nearest-coset index of the carrier,
/// `column i` = message index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("adjacency matrix size"));
        }
        if n > MAX_LEARNABLE_COSETS {
            return Err(Error::CodebookTooLarge { size: n, max: MAX_LEARNABLE_COSETS });
        }
        Ok(Self { n, counts: vec![0; n * n] })
    }

    /// Builds directly from `(nearest_coset, message_index)` pairs.
    pub fn from_index_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut w = Self::new(n)?;
        for &(j, i) in pairs {
            if j >= n || i >= n {
                return Err(Error::CosetIndexOutOfRange { index: j.max(i), count: n });
            }
            w.record(j, i);
        }
        Ok(w)
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::NonSquareMatrix);
        }
        let mut w = Self::new(n)?;
        for (j, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                w.counts[j * n + i] = v;
            }
        }
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> u64 {
        self.counts[j * self.n + i]
    }

    #[inline]
    pub fn record(&mut self, j: usize, i: usize) {
        self.counts[j * self.n + i] += 1;
    }

    /// Total number of observed pairs.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Elementwise sum; building from concatenated streams equals merging
    /// per-stream matrices.
    pub fn merged(&self, other: &AdjacencyMatrix) -> Result<AdjacencyMatrix> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n, right: other.n });
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(AdjacencyMatrix { n: self.n, counts })
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|j| self.counts[j * self.n..(j + 1) * self.n].to_vec())
            .collect()
    }
}

/// A learned labeling: the permutation, the matching weight it achieves, and
/// the adjacency matrix it came from.
#[derive(Debug, Clone)]
pub struct CodebookAssignment {
    pub gamma: Permutation,
    pub total_weight: u64,
    pub source: AdjacencyMatrix,
}

/// Counts `(Neighbor(s_k), index(m_k))` co-occurrences over paired slices.
pub fn build_adjacency<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    carriers: &[Vec<T>],
    messages: &[Message],
) -> Result<AdjacencyMatrix> {
    if carriers.len() != messages.len() {
        return Err(Error::LengthMismatch { left: carriers.len(), right: messages.len() });
    }
    let mut w = AdjacencyMatrix::new(table.len())?;
    for (s, m) in carriers.iter().zip(messages) {
        let j = neighbor(spec, table, s)?;
        let i = table.index_of(m)?;
        w.record(j, i);
    }
    Ok(w)
}

/// Solves the maximum-weight perfect matching over `W`.
///
/// Runs an `O(n³)` augmenting-path assignment solve on the negated weights,
/// then refines the result to the lexicographically smallest permutation
/// among the optima using the optimal dual's tight edges.
pub fn max_weight_matching(w: &AdjacencyMatrix) -> CodebookAssignment {
    let n = w.n();
    let max_entry = (0..n)
        .flat_map(|j| (0..n).map(move |i| (j, i)))
        .map(|(j, i)| w.get(j, i))
        .max()
        .unwrap_or(0);
    // invert the sign (shifted to stay nonnegative) to phrase as minimization
    let cost = |r: usize, c: usize| -> i64 { (max_entry - w.get(r, c)) as i64 };

    let (assignment, u, v) = hungarian_min(n, &cost);
    let tight: Vec<Vec<usize>> = (0..n)
        .map(|col| {
            (0..n)
                .filter(|&row| cost(row, col) - u[row] - v[col] == 0)
                .collect()
        })
        .collect();
    let gamma = lex_smallest_on_tight(&tight, assignment);

    let total_weight = (0..n).map(|i| w.get(gamma[i], i)).sum();
    CodebookAssignment {
        gamma: Permutation(gamma),
        total_weight,
        source: w.clone(),
    }
}

/// Potential-based assignment solve (cost minimization).
///
/// Returns `(col -> row, row potentials u, column potentials v)` with the
/// complementary-slackness property `cost - u - v >= 0`, tight on matched
/// edges. Integer arithmetic throughout, so tightness tests are exact.
fn hungarian_min(n: usize, cost: &dyn Fn(usize, usize) -> i64) -> (Vec<usize>, Vec<i64>, Vec<i64>) {
    const INF: i64 = i64::MAX / 4;
    // 1-based helper arrays; p[0] hosts the row currently being inserted
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[col] = row (1-based)
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        p[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[j - 1] = p[j] - 1;
    }
    // v[0] carries the insertion bookkeeping; 0-based duals for rows/cols
    let u0: Vec<i64> = (1..=n).map(|i| u[i]).collect();
    let v0: Vec<i64> = (1..=n).map(|j| v[j]).collect();
    (assignment, u0, v0)
}

/// Every optimal matching lies inside the tight-edge graph of an optimal
/// dual, and every perfect matching of that graph is optimal. Walk the
/// columns in order and greedily fix the smallest row that still leaves the
/// remainder perfectly matchable.
fn lex_smallest_on_tight(tight: &[Vec<usize>], initial: Vec<usize>) -> Vec<usize> {
    let n = tight.len();
    let mut match_col: Vec<usize> = initial; // col -> row
    let mut match_row = vec![usize::MAX; n]; // row -> col
    for (c, &r) in match_col.iter().enumerate() {
        match_row[r] = c;
    }

    for col in 0..n {
        let current = match_col[col];
        for &cand in &tight[col] {
            if cand >= current {
                break;
            }
            // try to reroute the column currently holding `cand`
            // through rows not yet fixed, keeping columns < col untouched
            let displaced = match_row[cand];
            if displaced < col {
                continue; // row already fixed to an earlier column
            }
            // provisionally take `cand` for `col`, freeing `current`
            match_row[match_col[col]] = usize::MAX;
            match_col[col] = cand;
            match_row[cand] = col;
            match_col[displaced] = usize::MAX;
            let mut visited = vec![false; n];
            visited[cand] = true;
            if augment(tight, col, displaced, &mut match_col, &mut match_row, &mut visited) {
                break;
            }
            // revert
            match_col[displaced] = cand;
            match_row[cand] = displaced;
            match_col[col] = current;
            match_row[current] = col;
        }
    }
    match_col
}

/// Kuhn-style augmenting search: find a free row for `col`, never touching
/// columns at or before `fixed_upto`.
fn augment(
    tight: &[Vec<usize>],
    fixed_upto: usize,
    col: usize,
    match_col: &mut Vec<usize>,
    match_row: &mut Vec<usize>,
    visited: &mut Vec<bool>,
) -> bool {
    for &r in &tight[col] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        let owner = match_row[r];
        if owner == usize::MAX
            || (owner > fixed_upto && augment(tight, fixed_upto, owner, match_col, match_row, visited))
        {
            match_col[col] = r;
            match_row[r] = col;
            return true;
        }
    }
    false
}

/// Exhaustive matching search; the independent oracle for
/// [`max_weight_matching`]. Permutations are visited in lexicographic order
/// and replaced only on strict improvement, so ties resolve to the smallest.
pub fn brute_force_matching(w: &AdjacencyMatrix) -> Result<CodebookAssignment> {
    let n = w.n();
    if n > 8 {
        return Err(Error::CodebookTooLarge { size: n, max: 8 });
    }
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut used = vec![false; n];
    let mut cur = Vec::with_capacity(n);
    fn recurse(
        w: &AdjacencyMatrix,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        acc: u64,
        best: &mut Option<(u64, Vec<usize>)>,
    ) {
        let n = w.n();
        if cur.len() == n {
            if best.as_ref().is_none_or(|(bw, _)| acc > *bw) {
                *best = Some((acc, cur.clone()));
            }
            return;
        }
        let col = cur.len();
        for row in 0..n {
            if used[row] {
                continue;
            }
            used[row] = true;
            cur.push(row);
            recurse(w, used, cur, acc + w.get(row, col), best);
            cur.pop();
            used[row] = false;
        }
    }
    recurse(w, &mut used, &mut cur, 0, &mut best);
    let (total_weight, gamma) = best.expect("n >= 1");
    Ok(CodebookAssignment {
        gamma: Permutation(gamma),
        total_weight,
        source: w.clone(),
    })
}

/// Empirical stay-in-place probability `Σ_i W[γ(i), i] / Σ W`.
pub fn empirical_p1(w: &AdjacencyMatrix, gamma: &Permutation) -> Result<f64> {
    if gamma.len() != w.n() {
        return Err(Error::LengthMismatch { left: gamma.len(), right: w.n() });
    }
    let total = w.total();
    if total == 0 {
        return Err(Error::EmptyInput("adjacency matrix has no observations"));
    }
    let matched: u64 = (0..w.n()).map(|i| w.get(gamma.map(i), i)).sum();
    Ok(matched as f64 / total as f64)
}

/// Convenience: adjacency counting plus matching in one call.
pub fn learn_assignment<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    carriers: &[Vec<T>],
    messages: &[Message],
) -> Result<CodebookAssignment> {
    let w = build_adjacency(spec, table, carriers, messages)?;
    Ok(max_weight_matching(&w))
}
