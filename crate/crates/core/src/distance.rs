//! Minimum-weight logical operators by syndrome-pruned enumeration.

use crate::code::{LogicalBasis, PauliType, StabilizerCode};
use crate::complex::TorusComplex;
use crate::error::{Error, Result};
use crate::gf2::{symplectic_gram, BitMatrix, BitVec, IncrementalBasis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

/// Elementary error mechanisms: each flips a set of detectors and a set of logical classes.
///
/// Mechanisms are grouped; at most one mechanism per group enters a pattern, and groups are
/// contiguous in index order.
#[derive(Clone, Debug)]
pub struct FaultTable {
    pub detectors: usize,
    syndromes: Vec<BitVec>,
    classes: Vec<u64>,
    next_start: Vec<usize>,
    costs: Vec<u32>,
}

impl FaultTable {
    /// One mechanism per column of `detectors` with the given class bits.
    #[must_use]
    pub fn new(columns: Vec<BitVec>, classes: Vec<u64>) -> Self {
        let n = columns.len();
        Self::grouped(columns, classes, (1..=n).collect())
    }

    #[must_use]
    pub fn grouped(columns: Vec<BitVec>, classes: Vec<u64>, next_start: Vec<usize>) -> Self {
        assert_eq!(columns.len(), classes.len());
        assert_eq!(columns.len(), next_start.len());
        let detectors = columns.first().map_or(0, BitVec::len);
        let costs = vec![1; columns.len()];
        Self { detectors, syndromes: columns, classes, next_start, costs }
    }

    /// Per-mechanism costs; the search then minimizes total cost instead of count.
    #[must_use]
    pub fn with_costs(mut self, costs: Vec<u32>) -> Self {
        assert_eq!(costs.len(), self.syndromes.len());
        assert!(costs.iter().all(|&c| c > 0), "costs must be positive");
        self.costs = costs;
        self
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.syndromes.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.syndromes.is_empty()
    }

    #[must_use]
    pub fn syndrome(&self, i: usize) -> &BitVec {
        &self.syndromes[i]
    }

    #[must_use]
    pub fn class(&self, i: usize) -> u64 {
        self.classes[i]
    }

    #[must_use]
    pub fn cost(&self, i: usize) -> u32 {
        self.costs[i]
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_nodes: u64,
    pub max_witnesses: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self { max_nodes: 50_000_000_000, max_witnesses: 4096 }
    }
}

/// Result of an iterative-deepening search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Smallest weight with an undetected nontrivial pattern, if any up to `w_max`.
    pub weight: Option<usize>,
    pub w_max: usize,
    /// Sorted patterns of that weight (capped).
    pub witnesses: Vec<Vec<usize>>,
    pub witness_count: u64,
    pub nodes: u64,
}

struct Engine<'a, const W: usize> {
    table: &'a FaultTable,
    syn: Vec<[u64; W]>,
    max_flip: u32,
    min_cost: u32,
    max_cost: u32,
    by_syndrome: HashMap<[u64; W], Vec<usize>>,
    nodes: &'a AtomicU64,
    max_nodes: u64,
    abort: &'a AtomicBool,
}

#[inline]
fn xor<const W: usize>(a: &[u64; W], b: &[u64; W]) -> [u64; W] {
    std::array::from_fn(|i| a[i] ^ b[i])
}

#[inline]
fn popcount<const W: usize>(a: &[u64; W]) -> u32 {
    a.iter().map(|w| w.count_ones()).sum()
}

impl<'a, const W: usize> Engine<'a, W> {
    fn new(table: &'a FaultTable, nodes: &'a AtomicU64, max_nodes: u64, abort: &'a AtomicBool) -> Self {
        let syn: Vec<[u64; W]> = table
            .syndromes
            .iter()
            .map(|s| std::array::from_fn(|i| s.words().get(i).copied().unwrap_or(0)))
            .collect();
        let max_flip = syn.iter().map(popcount).max().unwrap_or(0);
        let min_cost = table.costs.iter().copied().min().unwrap_or(1);
        let max_cost = table.costs.iter().copied().max().unwrap_or(1);
        let mut by_syndrome: HashMap<[u64; W], Vec<usize>> = HashMap::new();
        for (i, s) in syn.iter().enumerate() {
            by_syndrome.entry(*s).or_default().push(i);
        }
        Self { table, syn, max_flip, min_cost, max_cost, by_syndrome, nodes, max_nodes, abort }
    }

    /// Largest syndrome weight that `left` more cost units can still cancel.
    fn bound(&self, left: u32) -> u32 {
        self.max_flip * (left / self.min_cost)
    }

    fn run_from(&self, first: usize, weight: u32, found: &mut Vec<Vec<usize>>) {
        let cost = self.table.costs[first];
        if cost > weight {
            return;
        }
        let chosen = vec![first];
        let s = self.syn[first];
        let c = self.table.classes[first];
        if cost == weight {
            if s.iter().all(|&w| w == 0) && c != 0 {
                found.push(chosen);
            }
            return;
        }
        if popcount(&s) > self.bound(weight - cost) {
            return;
        }
        let mut chosen = chosen;
        let mut local = 0u64;
        self.rec(weight - cost, self.table.next_start[first], s, c, &mut chosen, found, &mut local);
        self.nodes.fetch_add(local, Ordering::Relaxed);
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        &self,
        left: u32,
        start: usize,
        s: [u64; W],
        c: u64,
        chosen: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
        local: &mut u64,
    ) {
        *local += 1;
        if *local & 0xFFFFF == 0 {
            let total = self.nodes.fetch_add(*local, Ordering::Relaxed) + *local;
            *local = 0;
            if total > self.max_nodes {
                self.abort.store(true, Ordering::Relaxed);
            }
        }
        if self.abort.load(Ordering::Relaxed) {
            return;
        }
        // Complete with a single mechanism of exactly the remaining cost.
        if left <= self.max_cost {
            if let Some(list) = self.by_syndrome.get(&s) {
                for &q in list {
                    if q >= start && self.table.costs[q] == left && c ^ self.table.classes[q] != 0 {
                        let mut p = chosen.clone();
                        p.push(q);
                        found.push(p);
                    }
                }
            }
        }
        if left <= self.min_cost {
            return;
        }
        for q in start..self.syn.len() {
            let cost = self.table.costs[q];
            if cost >= left {
                continue;
            }
            let s2 = xor(&s, &self.syn[q]);
            if popcount(&s2) > self.bound(left - cost) {
                continue;
            }
            chosen.push(q);
            self.rec(left - cost, self.table.next_start[q], s2, c ^ self.table.classes[q], chosen, found, local);
            chosen.pop();
        }
    }
}

fn search_words<const W: usize>(
    table: &FaultTable,
    w_max: usize,
    starts: &[usize],
    limits: SearchLimits,
) -> Result<SearchOutcome> {
    let nodes = AtomicU64::new(0);
    let abort = AtomicBool::new(false);
    let engine = Engine::<W>::new(table, &nodes, limits.max_nodes, &abort);
    for w in 1..=w_max {
        let mut found: Vec<Vec<usize>> = starts
            .par_iter()
            .flat_map_iter(|&f| {
                let mut out = Vec::new();
                engine.run_from(f, w as u32, &mut out);
                out
            })
            .collect();
        if abort.load(Ordering::Relaxed) || nodes.load(Ordering::Relaxed) > limits.max_nodes {
            return Err(Error::Budget { nodes: nodes.load(Ordering::Relaxed), det: w as u64 });
        }
        if !found.is_empty() {
            found.sort();
            let count = found.len() as u64;
            found.truncate(limits.max_witnesses);
            return Ok(SearchOutcome {
                weight: Some(w),
                w_max,
                witnesses: found,
                witness_count: count,
                nodes: nodes.load(Ordering::Relaxed),
            });
        }
    }
    Ok(SearchOutcome { weight: None, w_max, witnesses: Vec::new(), witness_count: 0, nodes: nodes.load(Ordering::Relaxed) })
}

/// Cheapest set of mechanisms with zero syndrome and nonzero class, by iterative deepening on
/// total cost (the count, for unit costs).
///
/// Only patterns whose smallest element lies in `starts` are enumerated.
pub fn search(table: &FaultTable, w_max: usize, starts: &[usize], limits: SearchLimits) -> Result<SearchOutcome> {
    macro_rules! dispatch {
        ($($w:literal)*) => {
            match table.detectors.div_ceil(64).max(1) {
                $($w => search_words::<$w>(table, w_max, starts, limits),)*
                _ => Err(Error::Invalid(format!("{} detectors exceed the supported 2048", table.detectors))),
            }
        };
    }
    dispatch!(1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19 20 21 22 23 24 25 26 27 28 29 30 31 32)
}

/// Bit mask of which representatives have odd overlap with `support`.
#[must_use]
pub fn class_bits(support: &BitVec, reps: &[BitVec]) -> u64 {
    reps.iter().enumerate().fold(0, |acc, (i, r)| if support.dot(r) { acc | 1 << i } else { acc })
}

fn columns(h: &BitMatrix) -> Vec<BitVec> {
    h.transpose().rows().to_vec()
}

/// Fault table for single-qubit errors of the given type on a CSS code, with class bits
/// measured against `reps` (opposite-type logical supports).
#[must_use]
pub fn css_table(code: &StabilizerCode, kind: PauliType, reps: &[BitVec]) -> FaultTable {
    assert!(reps.len() <= 64, "at most 64 logical representatives");
    let detect = code.checks_of(kind.other());
    let cols = columns(detect);
    let classes = (0..code.n).map(|q| class_bits(&BitVec::unit(code.n, q), reps)).collect();
    FaultTable::new(cols, classes)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceReport {
    /// Type of the logical operators searched for.
    pub kind: PauliType,
    pub n: usize,
    pub k: usize,
    pub weight: Option<usize>,
    pub w_max: usize,
    pub witnesses: Vec<Vec<usize>>,
    pub witness_count: u64,
    pub nodes: u64,
    /// With translation symmetry, witnesses are one representative per orbit.
    pub translation_orbit: Option<usize>,
}

/// Minimum weight of a nontrivial logical of type `kind`, searching weights up to `w_max`.
///
/// With `orbit = Some(det)` on a torus code, patterns are enumerated up to translation: qubit
/// `s * det + v` is cell `(v, subset s)`, so every orbit has a member whose smallest qubit is
/// some `s * det`.
pub fn min_weight_logical(
    code: &StabilizerCode,
    kind: PauliType,
    w_max: usize,
    orbit: Option<usize>,
    reps: Option<&[BitVec]>,
    limits: SearchLimits,
) -> Result<DistanceReport> {
    if code.css.is_none() {
        return Err(Error::Invalid("typed search needs a CSS code".into()));
    }
    let basis;
    let reps = match reps {
        Some(r) => r.to_vec(),
        None => {
            basis = code.logical_basis();
            match kind {
                PauliType::Z => basis.x_supports(),
                PauliType::X => basis.z_supports(),
            }
        }
    };
    let table = css_table(code, kind, &reps);
    let starts: Vec<usize> = match orbit {
        Some(det) => {
            if det == 0 || code.n % det != 0 {
                return Err(Error::Invalid("orbit size must divide n".into()));
            }
            (0..code.n).step_by(det).collect()
        }
        None => (0..code.n).collect(),
    };
    let out = search(&table, w_max, &starts, limits)?;
    Ok(DistanceReport {
        kind,
        n: code.n,
        k: code.num_logical(),
        weight: out.weight,
        w_max,
        witnesses: out.witnesses,
        witness_count: out.witness_count,
        nodes: out.nodes,
        translation_orbit: orbit,
    })
}

/// Distance of an arbitrary stabilizer code, `None` if above `w_max`.
pub fn code_distance(code: &StabilizerCode, w_max: usize, limits: SearchLimits) -> Result<Option<usize>> {
    if code.css.is_some() {
        let z = min_weight_logical(code, PauliType::Z, w_max, None, None, limits)?.weight;
        let x = min_weight_logical(code, PauliType::X, w_max, None, None, limits)?.weight;
        return Ok(match (x, z) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        });
    }
    let n = code.n;
    let l = code.logical_basis();
    assert!(2 * l.k <= 64, "at most 32 logical qubits");
    // Mechanisms 3q, 3q + 1, 3q + 2 are X, Y, Z on qubit q.
    let mut cols = Vec::with_capacity(3 * n);
    let mut classes = Vec::with_capacity(3 * n);
    let mut next = Vec::with_capacity(3 * n);
    let form = code.form();
    let checks_j = form.apply_rows(&code.checks);
    let l_j = form.apply_rows(&l.matrix);
    for q in 0..n {
        for (x, z) in [(true, false), (true, true), (false, true)] {
            let mut v = BitVec::zeros(2 * n);
            v.set(q, x);
            v.set(n + q, z);
            cols.push(checks_j.mul_vec(&v));
            let bits = l_j.mul_vec(&v);
            classes.push(bits.iter_ones().fold(0u64, |a, i| a | 1 << i));
            next.push(3 * q + 3);
        }
    }
    let table = FaultTable::grouped(cols, classes, next);
    let starts: Vec<usize> = (0..3 * n).collect();
    Ok(search(&table, w_max, &starts, limits)?.weight)
}

/// Sums of all 2-cells with direction set `{i, j}`, one per pair; logical representatives of
/// both types for a 4D (2,2) code with odd determinant.
pub fn logical_representatives_22(tc: &TorusComplex) -> Result<Vec<BitVec>> {
    if tc.dim() != 4 {
        return Err(Error::Invalid("needs a 4D complex".into()));
    }
    if tc.det() % 2 == 0 {
        return Err(Error::Invalid("plaquette sums are trivial for even determinant".into()));
    }
    let det = tc.det();
    let n = tc.complex.num_cells(2);
    Ok((0..tc.subsets(2).len()).map(|s| BitVec::from_indices(n, s * det..(s + 1) * det)).collect())
}

/// Expand orbit representatives under a permutation group, deduplicated and sorted.
#[must_use]
pub fn expand_orbits(reps: &[Vec<usize>], group: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut all = BTreeSet::new();
    for r in reps {
        for g in group {
            let mut img: Vec<usize> = r.iter().map(|&q| g[q]).collect();
            img.sort_unstable();
            all.insert(img);
        }
    }
    all.into_iter().collect()
}

/// What remains if every minimum-weight logical is treated as a gauge operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubsystemReport {
    pub weight_z: Option<usize>,
    pub weight_x: Option<usize>,
    pub z_representatives: usize,
    pub x_representatives: usize,
    pub z_classes: usize,
    pub x_classes: usize,
    /// Every minimum-weight Z representative commutes with every minimum-weight X one.
    pub all_commute: bool,
    pub gauge_qubits: usize,
    pub gauged_stabilizers: usize,
    pub remaining_logical: usize,
    /// Lower bound on the dressed distance, if logical qubits remain.
    pub subsystem_distance_at_least: Option<usize>,
}

fn class_vector(support: &BitVec, kind: PauliType, l: &LogicalBasis) -> BitVec {
    // Coordinates in (X-bar | Z-bar) order.
    let k = l.k;
    let mut v = BitVec::zeros(2 * k);
    match kind {
        PauliType::Z => {
            for (i, x) in l.x_supports().iter().enumerate() {
                if support.dot(x) {
                    v.set(k + i, true);
                }
            }
        }
        PauliType::X => {
            for (i, z) in l.z_supports().iter().enumerate() {
                if support.dot(z) {
                    v.set(i, true);
                }
            }
        }
    }
    v
}

/// Gauge all minimum-weight logicals (up to `w_max`) and report the surviving logical qubits.
///
/// `group` lists qubit permutations used to expand orbit representatives found with the
/// translation trick (`orbit`); pass the identity alone when no symmetry is used.
pub fn subsystem_probe(
    code: &StabilizerCode,
    w_max: usize,
    orbit: Option<usize>,
    group: &[Vec<usize>],
    limits: SearchLimits,
) -> Result<SubsystemReport> {
    let l = code.logical_basis();
    let limits = SearchLimits { max_witnesses: usize::MAX, ..limits };
    let zr = min_weight_logical(code, PauliType::Z, w_max, orbit, None, limits)?;
    let xr = min_weight_logical(code, PauliType::X, w_max, orbit, None, limits)?;
    let z_all = expand_orbits(&zr.witnesses, group);
    let x_all = expand_orbits(&xr.witnesses, group);
    let to_vec = |p: &Vec<usize>| BitVec::from_indices(code.n, p.iter().copied());
    let zs: Vec<BitVec> = z_all.iter().map(to_vec).collect();
    let xs: Vec<BitVec> = x_all.iter().map(to_vec).collect();
    let all_commute = zs.iter().all(|z| xs.iter().all(|x| !z.dot(x)));
    let zc: BTreeSet<BitVec> = zs.iter().map(|z| class_vector(z, PauliType::Z, &l)).collect();
    let xc: BTreeSet<BitVec> = xs.iter().map(|x| class_vector(x, PauliType::X, &l)).collect();
    let mut span = IncrementalBasis::new();
    let mut gens = Vec::new();
    for v in zc.iter().chain(&xc) {
        if span.insert(v) {
            gens.push(v.clone());
        }
    }
    let dim = gens.len();
    let (gauge, radical) = if dim == 0 {
        (0, 0)
    } else {
        let m = BitMatrix::from_rows(2 * l.k, gens);
        let r = symplectic_gram(&m, &m).rank();
        (r / 2, dim - r)
    };
    let remaining = l.k - gauge - radical;
    let w = zr.weight.into_iter().chain(xr.weight).min();
    Ok(SubsystemReport {
        weight_z: zr.weight,
        weight_x: xr.weight,
        z_representatives: zs.len(),
        x_representatives: xs.len(),
        z_classes: zc.len(),
        x_classes: xc.len(),
        all_commute,
        gauge_qubits: gauge,
        gauged_stabilizers: radical,
        remaining_logical: remaining,
        subsystem_distance_at_least: if remaining > 0 { w.map(|w| w + 1) } else { None },
    })
}
