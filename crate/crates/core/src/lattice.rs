//! Integer lattices, Hermite normal forms and l1 systoles.

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

pub type IntMatrix = Vec<Vec<i64>>;

/// Full-rank integer basis; rows generate the lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBasis {
    pub dim: usize,
    pub rows: IntMatrix,
}

/// Upper triangular with positive diagonal and `0 <= m[i][j] < m[j][j]` for `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HermiteForm {
    pub matrix: IntMatrix,
    pub det: u64,
}

impl LatticeBasis {
    pub fn new(rows: IntMatrix) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Dimension("empty basis".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("basis must be square".into()));
        }
        let b = Self { dim, rows };
        if determinant(&b.rows) == 0 {
            return Err(Error::Singular);
        }
        Ok(b)
    }

    #[must_use]
    pub fn diagonal(entries: &[i64]) -> Self {
        let dim = entries.len();
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { entries[i] } else { 0 }).collect())
            .collect();
        Self::new(rows).expect("nonzero diagonal")
    }

    #[must_use]
    pub fn scaled_identity(dim: usize, l: i64) -> Self {
        Self::diagonal(&vec![l; dim])
    }

    #[must_use]
    pub fn hnf(&self) -> HermiteForm {
        hnf(self)
    }

    #[must_use]
    pub fn det(&self) -> u64 {
        determinant(&self.rows).unsigned_abs() as u64
    }
}

impl FromStr for LatticeBasis {
    type Err = Error;

    /// Rows separated by `;`, entries by `,` or whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .split(';')
            .filter(|r| !r.trim().is_empty())
            .map(|r| {
                r.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("{t}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        LatticeBasis::new(rows)
    }
}

impl HermiteForm {
    #[must_use]
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    #[must_use]
    pub fn diag(&self) -> Vec<i64> {
        (0..self.dim()).map(|i| self.matrix[i][i]).collect()
    }

    #[must_use]
    pub fn basis(&self) -> LatticeBasis {
        LatticeBasis { dim: self.dim(), rows: self.matrix.clone() }
    }

    /// Number of 2D slices when sliced along the first coordinate.
    #[must_use]
    pub fn n_slice(&self) -> i64 {
        self.matrix[0][0]
    }

    /// Canonical coset representative of `x` modulo the lattice: `0 <= x_i < m[i][i]`.
    #[must_use]
    pub fn reduce(&self, x: &[i64]) -> Vec<i64> {
        let mut x = x.to_vec();
        for i in 0..self.dim() {
            let d = self.matrix[i][i];
            let q = x[i].div_euclid(d);
            if q != 0 {
                for (xj, mj) in x.iter_mut().zip(&self.matrix[i]).skip(i) {
                    *xj -= q * mj;
                }
            }
        }
        x
    }

    #[must_use]
    pub fn contains(&self, x: &[i64]) -> bool {
        self.reduce(x).iter().all(|&v| v == 0)
    }

    /// Mixed-radix index of a canonical representative, first coordinate most significant.
    #[must_use]
    pub fn vertex_index(&self, rep: &[i64]) -> usize {
        let mut idx = 0usize;
        for (i, &x) in rep.iter().enumerate() {
            idx = idx * self.matrix[i][i] as usize + x as usize;
        }
        idx
    }

    #[must_use]
    pub fn vertex_from_index(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut x = vec![0; d];
        for i in (0..d).rev() {
            let r = self.matrix[i][i] as usize;
            x[i] = (idx % r) as i64;
            idx /= r;
        }
        x
    }
}

fn determinant(m: &IntMatrix) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| i128::from(x)).collect()).collect();
    let mut det: i128 = 1;
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (c..n).filter(|&r| a[r][c] != 0).collect();
            if nz.is_empty() {
                return 0;
            }
            let p = *nz.iter().min_by_key(|&&r| a[r][c].abs()).unwrap();
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            let mut done = true;
            for r in c + 1..n {
                if a[r][c] != 0 {
                    let q = a[r][c] / a[c][c];
                    for k in c..n {
                        a[r][k] -= q * a[c][k];
                    }
                    if a[r][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        det *= a[c][c];
    }
    det
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 { (-a, -1, 0) } else { (a, 1, 0) }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Row-style Hermite normal form.
#[must_use]
pub fn hnf(basis: &LatticeBasis) -> HermiteForm {
    let n = basis.dim;
    let mut a: Vec<Vec<i128>> =
        basis.rows.iter().map(|r| r.iter().map(|&x| i128::from(x)).collect()).collect();
    for c in 0..n {
        for r in c + 1..n {
            if a[r][c] == 0 {
                continue;
            }
            let (x, y) = (a[c][c], a[r][c]);
            let (g, s, t) = ext_gcd(x, y);
            let (u, v) = (-y / g, x / g);
            for k in 0..n {
                let (p, q) = (a[c][k], a[r][k]);
                a[c][k] = s * p + t * q;
                a[r][k] = u * p + v * q;
            }
        }
        assert!(a[c][c] != 0, "singular basis");
        if a[c][c] < 0 {
            for k in 0..n {
                a[c][k] = -a[c][k];
            }
        }
    }
    for j in 0..n {
        let d = a[j][j];
        for i in 0..j {
            let q = a[i][j].div_euclid(d);
            if q != 0 {
                for k in j..n {
                    a[i][k] -= q * a[j][k];
                }
            }
        }
    }
    let det = (0..n).map(|i| a[i][i]).product::<i128>();
    HermiteForm {
        matrix: a.iter().map(|r| r.iter().map(|&x| i64::try_from(x).expect("hnf overflow")).collect()).collect(),
        det: u64::try_from(det).expect("det overflow"),
    }
}

/// Depth-first enumeration of lattice vectors `u * H` with bounded l1 norm.
struct ShortVectors<'a> {
    h: &'a IntMatrix,
    dim: usize,
    zero_coord: Option<usize>,
}

impl ShortVectors<'_> {
    /// Calls `visit` on every nonzero vector with norm `<= bound`; `visit` returns the new bound.
    /// Vectors are produced up to sign. Returns `false` if `visit` asked to stop (bound < 0).
    fn run(&self, bound: i64, visit: &mut dyn FnMut(&[i64], i64) -> i64) {
        let mut acc = vec![0i64; self.dim];
        let mut v = vec![0i64; self.dim];
        let mut bound = bound;
        self.level(0, 0, false, &mut acc, &mut v, &mut bound, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn level(
        &self,
        j: usize,
        norm: i64,
        nonzero: bool,
        acc: &mut Vec<i64>,
        v: &mut Vec<i64>,
        bound: &mut i64,
        visit: &mut dyn FnMut(&[i64], i64) -> i64,
    ) -> bool {
        if j == self.dim {
            if nonzero {
                *bound = visit(v, norm);
                return *bound >= 0;
            }
            return true;
        }
        let d = self.h[j][j];
        let c = acc[j];
        let rem = *bound - norm;
        if rem < 0 {
            return true;
        }
        // u ranges over |c + u d| <= rem; before any nonzero choice only u >= 0 (sign symmetry).
        let lo = if nonzero { (-rem - c).div_euclid(d) + i64::from((-rem - c).rem_euclid(d) != 0) } else { 0.max((-rem - c).div_euclid(d) + i64::from((-rem - c).rem_euclid(d) != 0)) };
        let hi = (rem - c).div_euclid(d);
        for u in lo..=hi {
            let x = c + u * d;
            if self.zero_coord == Some(j) && x != 0 {
                continue;
            }
            let nn = norm + x.abs();
            if nn > *bound {
                continue;
            }
            if u != 0 {
                for l in j + 1..self.dim {
                    acc[l] += u * self.h[j][l];
                }
            }
            v[j] = x;
            let cont = self.level(j + 1, nn, nonzero || u != 0, acc, v, bound, visit);
            if u != 0 {
                for l in j + 1..self.dim {
                    acc[l] -= u * self.h[j][l];
                }
            }
            if !cont {
                return false;
            }
        }
        true
    }
}

/// Minimum l1 norm over nonzero lattice vectors together with a witness.
///
/// `bound` limits the search; by default the smallest row norm of the HNF is used,
/// which is always attained.
#[must_use]
pub fn l1_systole(basis: &LatticeBasis, bound: Option<i64>) -> Option<(i64, Vec<i64>)> {
    let h = hnf(basis);
    systole_of_hnf(&h.matrix, None, bound)
}

fn l1(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).sum()
}

fn systole_of_hnf(h: &IntMatrix, zero_coord: Option<usize>, bound: Option<i64>) -> Option<(i64, Vec<i64>)> {
    let dim = h.len();
    let default = h
        .iter()
        .filter(|r| zero_coord.is_none_or(|z| r[z] == 0))
        .map(|r| l1(r))
        .min()
        .unwrap_or(i64::MAX / 4);
    let start = bound.unwrap_or(default);
    let mut best: Option<(i64, Vec<i64>)> = None;
    let sv = ShortVectors { h, dim, zero_coord };
    sv.run(start, &mut |v, norm| {
        let better = match &best {
            None => true,
            Some((b, w)) => norm < *b || (norm == *b && canonical_sign(v) < *w),
        };
        if better {
            best = Some((norm, canonical_sign(v)));
        }
        norm
    });
    best
}

fn canonical_sign(v: &[i64]) -> Vec<i64> {
    let neg = v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0);
    v.iter().map(|&x| if neg { -x } else { x }).collect()
}

/// True if some nonzero lattice vector has l1 norm `<= bound`.
#[must_use]
pub fn has_vector_within(h: &IntMatrix, bound: i64) -> bool {
    let mut found = false;
    ShortVectors { h, dim: h.len(), zero_coord: None }.run(bound, &mut |_, _| {
        found = true;
        -1
    });
    found
}

/// Minimum l1 norm over nonzero lattice vectors lying in the hyperplane `x_dir = 0`.
#[must_use]
pub fn hyperplane_systole(basis: &LatticeBasis, dir: usize) -> Option<(i64, Vec<i64>)> {
    assert!(dir < basis.dim, "direction out of range");
    let h = hnf(basis);
    // det * e_j lies in the lattice for every j.
    let fallback = h.det as i64;
    systole_of_hnf(&h.matrix, Some(dir), Some(fallback))
}

/// The sublattice `{v : v_dir = 0}` written in the remaining coordinates.
#[must_use]
pub fn cut_lattice(basis: &LatticeBasis, dir: usize) -> LatticeBasis {
    let d = basis.dim;
    assert!(d >= 2 && dir < d);
    let order: Vec<usize> = std::iter::once(dir).chain((0..d).filter(|&i| i != dir)).collect();
    let permuted: IntMatrix = basis.rows.iter().map(|r| order.iter().map(|&i| r[i]).collect()).collect();
    let h = hnf(&LatticeBasis { dim: d, rows: permuted });
    let rows: IntMatrix = h.matrix[1..].iter().map(|r| r[1..].to_vec()).collect();
    LatticeBasis::new(rows).expect("cut lattice is full rank")
}

/// Double one HNF row and renormalize.
#[must_use]
pub fn merge_for_surgery(h: &HermiteForm, row: usize) -> HermiteForm {
    assert!(row < h.dim(), "row out of range");
    let mut rows = h.matrix.clone();
    for x in &mut rows[row] {
        *x *= 2;
    }
    hnf(&LatticeBasis { dim: h.dim(), rows })
}

/// Rows of the `t`-fold tensor power of `[[1, 1], [1, -1]]`.
#[must_use]
pub fn hadamard_lattice(t: u32) -> LatticeBasis {
    let mut m: IntMatrix = vec![vec![1]];
    for _ in 0..t {
        let n = m.len();
        let mut next = vec![vec![0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = m[i][j];
                next[i][j + n] = m[i][j];
                next[i + n][j] = m[i][j];
                next[i + n][j + n] = -m[i][j];
            }
        }
        m = next;
    }
    LatticeBasis::new(m).expect("hadamard matrices are invertible")
}

/// Orthogonal matrix `matrix / denom` preserving the lattice: `hnf(W M) = hnf(W)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeAutomorphism {
    pub matrix: IntMatrix,
    pub denom: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

impl LatticeAutomorphism {
    #[must_use]
    pub fn new(matrix: IntMatrix, denom: i64) -> Self {
        assert!(denom != 0);
        let g = matrix.iter().flatten().fold(denom, |g, &x| gcd(g, x));
        let s = if denom < 0 { -g } else { g };
        Self { matrix: matrix.iter().map(|r| r.iter().map(|x| x / s).collect()).collect(), denom: denom / s }
    }

    #[must_use]
    pub fn identity(d: usize) -> Self {
        Self::new((0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect(), 1)
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    #[must_use]
    pub fn is_integral(&self) -> bool {
        self.denom == 1
    }

    /// `x * matrix`, not yet divided by `denom`.
    #[must_use]
    pub fn apply_scaled(&self, x: &[i64]) -> Vec<i64> {
        let d = x.len();
        (0..d).map(|j| (0..d).map(|i| x[i] * self.matrix[i][j]).sum()).collect()
    }

    /// `x * M` if it is integral.
    #[must_use]
    pub fn apply(&self, x: &[i64]) -> Option<Vec<i64>> {
        let y = self.apply_scaled(x);
        y.iter().all(|v| v % self.denom == 0).then(|| y.iter().map(|v| v / self.denom).collect())
    }

    #[must_use]
    pub fn compose(&self, other: &Self) -> Self {
        let d = self.dim();
        let matrix = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum()).collect())
            .collect();
        Self::new(matrix, self.denom * other.denom)
    }

    #[must_use]
    pub fn is_orthogonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| {
                let dot: i64 = (0..d).map(|k| self.matrix[i][k] * self.matrix[j][k]).sum();
                dot == if i == j { self.denom * self.denom } else { 0 }
            })
        })
    }
}

/// All signed permutation matrices of size `d`.
#[must_use]
pub fn signed_permutations(d: usize) -> Vec<IntMatrix> {
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &perms {
            for i in 0..d {
                if !p.contains(&i) {
                    let mut q = p.clone();
                    q.push(i);
                    next.push(q);
                }
            }
        }
        perms = next;
    }
    let mut out = Vec::new();
    for p in &perms {
        for signs in 0..(1u32 << d) {
            let mut m = vec![vec![0i64; d]; d];
            for (i, &pi) in p.iter().enumerate() {
                m[i][pi] = if signs >> i & 1 == 1 { -1 } else { 1 };
            }
            out.push(m);
        }
    }
    out.sort();
    out
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lattice vectors with squared Euclidean norm exactly `norm2`.
fn vectors_of_norm(h: &HermiteForm, norm2: i64) -> Vec<Vec<i64>> {
    let d = h.dim();
    let r = (norm2 as f64).sqrt().floor() as i64 + 1;
    let mut out = Vec::new();
    let mut x = vec![-r; d];
    loop {
        if dot(&x, &x) == norm2 && h.contains(&x) {
            out.push(x.clone());
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            x[i] += 1;
            if x[i] <= r {
                break;
            }
            x[i] = -r;
            i += 1;
        }
    }
}

/// Orthogonal maps of `R^D` preserving the lattice.
///
/// Images of the basis vectors are assigned depth first among lattice vectors of equal
/// length, keeping the Gram matrix; an assignment is kept if it generates the lattice.
#[must_use]
pub fn lattice_automorphisms(basis: &LatticeBasis) -> Vec<LatticeAutomorphism> {
    let d = basis.dim;
    let h = hnf(basis);
    let w = &basis.rows;
    let gram: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| dot(&w[i], &w[j])).collect()).collect();
    let candidates: Vec<Vec<Vec<i64>>> = (0..d).map(|i| vectors_of_norm(&h, gram[i][i])).collect();
    let det_w = determinant(w);
    let adj = adjugate(w);
    let mut out = Vec::new();
    let mut images: Vec<Vec<i64>> = Vec::new();
    assign(0, &gram, &candidates, &mut images, &mut |imgs| {
        if determinant(&imgs.to_vec()).abs() != det_w.abs() {
            return;
        }
        // M = W^{-1} W' = adj(W) W' / det(W)
        let m: IntMatrix = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| adj[i][k] * imgs[k][j]).sum()).collect())
            .collect();
        out.push(LatticeAutomorphism::new(m, i64::try_from(det_w).expect("det fits")));
    });
    out.sort();
    out.dedup();
    out
}

fn assign(
    i: usize,
    gram: &[Vec<i64>],
    candidates: &[Vec<Vec<i64>>],
    images: &mut Vec<Vec<i64>>,
    emit: &mut dyn FnMut(&[Vec<i64>]),
) {
    if i == gram.len() {
        emit(images);
        return;
    }
    for c in &candidates[i] {
        if (0..i).all(|j| dot(c, &images[j]) == gram[i][j]) {
            images.push(c.clone());
            assign(i + 1, gram, candidates, images, emit);
            images.pop();
        }
    }
}

fn adjugate(m: &IntMatrix) -> IntMatrix {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let mut adj = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: IntMatrix = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[i][j] = sign * i64::try_from(determinant(&minor)).expect("minor fits");
        }
    }
    adj
}

/// Signed permutation matrices preserving the lattice.
#[must_use]
pub fn integral_automorphisms(basis: &LatticeBasis) -> Vec<LatticeAutomorphism> {
    let target = hnf(basis);
    signed_permutations(basis.dim)
        .into_iter()
        .map(|m| LatticeAutomorphism::new(m, 1))
        .filter(|a| {
            let rows = basis.rows.iter().map(|r| a.apply_scaled(r)).collect();
            hnf(&LatticeBasis { dim: basis.dim, rows }) == target
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_det: u64,
    pub max_nodes: u64,
    pub max_witnesses: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_det: 4096, max_nodes: 2_000_000_000, max_witnesses: 64 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult {
    pub dim: usize,
    pub systole: i64,
    pub min_slices: i64,
    pub det: u64,
    /// Lexicographically smallest witnesses, capped by the budget.
    pub witnesses: Vec<HermiteForm>,
    pub witness_count: u64,
    pub nodes: u64,
}

/// Ordered factorizations of `n` into `d` positive factors, first factor at least `min_first`.
fn diagonal_tuples(n: u64, d: usize, min_first: u64) -> Vec<Vec<u64>> {
    fn go(n: u64, d: usize, out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>, min_first: u64) {
        if d == 1 {
            if cur.is_empty() && n < min_first {
                return;
            }
            cur.push(n);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for f in 1..=n {
            if n % f == 0 && (!cur.is_empty() || f >= min_first) {
                cur.push(f);
                go(n / f, d - 1, out, cur, min_first);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, d, &mut out, &mut Vec::new(), min_first);
    out
}

struct TupleSearch<'a> {
    d: usize,
    s: i64,
    diag: &'a [u64],
    nodes: &'a AtomicU64,
    max_nodes: u64,
    abort: &'a AtomicBool,
}

impl TupleSearch<'_> {
    /// Fill rows `r..d` bottom-up; every partial lattice must have systole `>= s`.
    fn fill(&self, r: usize, m: &mut IntMatrix, out: &mut Vec<IntMatrix>, count: &mut u64, cap: usize) {
        if self.abort.load(Ordering::Relaxed) {
            return;
        }
        if r == 0 {
            // Systole exactly s: all shorter vectors were excluded row by row.
            if has_vector_within(m, self.s) {
                *count += 1;
                if out.len() < cap {
                    out.push(m.clone());
                }
            }
            return;
        }
        let row = r - 1;
        let diag = self.diag[row] as i64;
        m[row] = vec![0; self.d];
        m[row][row] = diag;
        let free: Vec<usize> = (row + 1..self.d).collect();
        let total: u64 = free.iter().map(|&j| self.diag[j]).product();
        for code in 0..total {
            let n = self.nodes.fetch_add(1, Ordering::Relaxed);
            if n >= self.max_nodes {
                self.abort.store(true, Ordering::Relaxed);
                return;
            }
            let mut c = code;
            for &j in free.iter().rev() {
                let dj = self.diag[j];
                m[row][j] = (c % dj) as i64;
                c /= dj;
            }
            if l1(&m[row]) < self.s {
                continue;
            }
            if self.new_row_has_short(row, m) {
                continue;
            }
            self.fill(row, m, out, count, cap);
        }
    }

    /// Does a vector of norm `< s` use the new top row of the partial lattice?
    fn new_row_has_short(&self, row: usize, m: &IntMatrix) -> bool {
        let sub: IntMatrix = m[row..].iter().map(|r| r[row..].to_vec()).collect();
        let d = sub.len();
        let bound = self.s - 1;
        let dd = sub[0][0];
        // u_0 >= 1 by sign symmetry; |u_0 * dd| <= bound.
        let max_u = bound / dd;
        for u0 in 1..=max_u {
            let mut acc: Vec<i64> = sub[0].iter().map(|&x| u0 * x).collect();
            let first = acc[0].abs();
            let mut found = false;
            let sv = ShortVectorsTail { h: &sub, dim: d };
            sv.level(1, first, &mut acc, bound, &mut found);
            if found {
                return true;
            }
        }
        false
    }
}

struct ShortVectorsTail<'a> {
    h: &'a IntMatrix,
    dim: usize,
}

impl ShortVectorsTail<'_> {
    fn level(&self, j: usize, norm: i64, acc: &mut Vec<i64>, bound: i64, found: &mut bool) {
        if *found {
            return;
        }
        if j == self.dim {
            *found = true;
            return;
        }
        let d = self.h[j][j];
        let c = acc[j];
        let rem = bound - norm;
        let lo = (-rem - c).div_euclid(d) + i64::from((-rem - c).rem_euclid(d) != 0);
        let hi = (rem - c).div_euclid(d);
        for u in lo..=hi {
            let x = c + u * d;
            for l in j + 1..self.dim {
                acc[l] += u * self.h[j][l];
            }
            self.level(j + 1, norm + x.abs(), acc, bound, found);
            for l in j + 1..self.dim {
                acc[l] -= u * self.h[j][l];
            }
            if *found {
                return;
            }
        }
    }
}

/// Exhaustive minimum determinant over HNFs with l1 systole `s` and `m[0][0] >= min_slices`.
///
/// Determinants are scanned in increasing order, so the first one admitting a witness is
/// the minimum. Returns `Error::Budget` if `max_det` or `max_nodes` is reached first.
pub fn search_min_det(dim: usize, s: i64, min_slices: i64, budget: SearchBudget) -> Result<SearchResult> {
    if dim == 0 || s < 1 {
        return Err(Error::Invalid("dimension and systole must be positive".into()));
    }
    let nodes = AtomicU64::new(0);
    let abort = AtomicBool::new(false);
    let min_first = min_slices.max(1) as u64;
    for det in 1..=budget.max_det {
        let tuples: Vec<Vec<u64>> = diagonal_tuples(det, dim, min_first)
            .into_iter()
            .filter(|t| t[dim - 1] as i64 >= s)
            .collect();
        let mut found: Vec<(Vec<IntMatrix>, u64)> = tuples
            .par_iter()
            .map(|diag| {
                let ts = TupleSearch { d: dim, s, diag, nodes: &nodes, max_nodes: budget.max_nodes, abort: &abort };
                let mut m = vec![vec![0i64; dim]; dim];
                let mut out = Vec::new();
                let mut count = 0;
                ts.fill(dim, &mut m, &mut out, &mut count, usize::MAX);
                (out, count)
            })
            .collect();
        if abort.load(Ordering::Relaxed) {
            return Err(Error::Budget { nodes: nodes.load(Ordering::Relaxed), det });
        }
        let count: u64 = found.iter().map(|f| f.1).sum();
        if count > 0 {
            let mut all: Vec<IntMatrix> = found.drain(..).flat_map(|f| f.0).collect();
            all.sort();
            all.truncate(budget.max_witnesses);
            return Ok(SearchResult {
                dim,
                systole: s,
                min_slices,
                det,
                witnesses: all.into_iter().map(|matrix| HermiteForm { matrix, det }).collect(),
                witness_count: count,
                nodes: nodes.load(Ordering::Relaxed),
            });
        }
    }
    Err(Error::Budget { nodes: nodes.load(Ordering::Relaxed), det: budget.max_det })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(rows: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn hnf_rotated_square() {
        let h = hnf(&b(&[&[2, 2], &[-2, 2]]));
        assert_eq!(h.matrix, vec![vec![2, 2], vec![0, 4]]);
        assert_eq!(h.det, 8);
    }

    #[test]
    fn hnf_hadamard() {
        let h = hadamard_lattice(2).hnf();
        assert_eq!(h.matrix, vec![vec![1, 1, 1, 1], vec![0, 2, 0, 2], vec![0, 0, 2, 2], vec![0, 0, 0, 4]]);
        assert_eq!(h.det, 16);
    }

    #[test]
    fn systoles() {
        assert_eq!(l1_systole(&b(&[&[1, 0, 4], &[0, 1, 5], &[0, 0, 7]]), None).unwrap().0, 3);
        let d4 = b(&[&[1, 0, 0, 1], &[0, 1, 0, 1], &[0, 0, 1, 1], &[0, 0, 0, 2]]);
        assert_eq!(l1_systole(&d4, None).unwrap().0, 2);
        assert_eq!(hyperplane_systole(&d4, 0).unwrap().0, 2);
    }

    #[test]
    fn reduce_is_canonical() {
        let h = b(&[&[1, 0, 4], &[0, 1, 5], &[0, 0, 7]]).hnf();
        assert_eq!(h.reduce(&[1, 0, 4]), vec![0, 0, 0]);
        assert_eq!(h.reduce(&[1, 1, 1]), vec![0, 0, 6]);
        for idx in 0..7 {
            assert_eq!(h.vertex_index(&h.vertex_from_index(idx)), idx);
        }
    }

    #[test]
    fn merge_doubles_det() {
        let h = b(&[&[1, 0, 0, 7], &[0, 1, 0, 5], &[0, 0, 1, 3], &[0, 0, 0, 16]]).hnf();
        let m = merge_for_surgery(&h, 1);
        assert_eq!(m.matrix[1], vec![0, 2, 0, 10]);
        assert_eq!(m.det, 32);
    }

    #[test]
    fn small_searches() {
        let r = search_min_det(3, 3, 1, SearchBudget::default()).unwrap();
        assert_eq!(r.det, 7);
        assert!(r.witnesses.iter().all(|w| l1_systole(&w.basis(), None).unwrap().0 == 3));
        assert_eq!(search_min_det(4, 3, 1, SearchBudget::default()).unwrap().det, 9);
        assert_eq!(search_min_det(3, 5, 2, SearchBudget::default()).unwrap().det, 30);
    }

    #[test]
    fn budget_is_reported() {
        let tight = SearchBudget { max_det: 5, ..SearchBudget::default() };
        assert!(matches!(search_min_det(3, 3, 1, tight), Err(Error::Budget { .. })));
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(lattice_automorphisms(&b(&[&[5]])).len(), 2);
        assert_eq!(lattice_automorphisms(&LatticeBasis::scaled_identity(2, 3)).len(), 8);
        let had = lattice_automorphisms(&hadamard_lattice(2));
        assert_eq!(had.len(), 384);
        assert!(had.iter().all(LatticeAutomorphism::is_orthogonal));
        let integral: Vec<_> = had.iter().filter(|a| a.is_integral()).cloned().collect();
        assert_eq!(integral, integral_automorphisms(&hadamard_lattice(2)));
    }

    #[test]
    fn parse_inline() {
        let l: LatticeBasis = "1,0,4;0,1,5;0,0,7".parse().unwrap();
        assert_eq!(l.det(), 7);
        assert!("1,2;2,4".parse::<LatticeBasis>().is_err());
    }
}
