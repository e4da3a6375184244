//! Space-group symmetries of torus codes and the logical gates they induce.

use crate::code::{is_symplectic, logical_action_in, permutation_matrix, LogicalBasis, StabilizerCode};
use crate::complex::{css_from_complex, torus_complex, TorusComplex};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec, Reducer};
use crate::lattice::{lattice_automorphisms, IntMatrix, LatticeAutomorphism, LatticeBasis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

/// Cell midpoints of a torus code: qubits on `q`-cells, X-checks on `q-1`, Z-checks on `q+1`.
///
/// Coordinates are doubled so that every midpoint is integral.
#[derive(Clone, Debug)]
pub struct Crystal {
    pub torus: TorusComplex,
    pub q: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Qubit,
    XCheck,
    ZCheck,
}

impl Crystal {
    #[must_use]
    pub fn new(torus: TorusComplex, q: usize) -> Self {
        assert!(q > 0 && q < torus.dim());
        Self { torus, q }
    }

    #[must_use]
    pub fn degree(&self, role: Role) -> usize {
        match role {
            Role::Qubit => self.q,
            Role::XCheck => self.q - 1,
            Role::ZCheck => self.q + 1,
        }
    }

    #[must_use]
    pub fn coords(&self, role: Role) -> Vec<Vec<i64>> {
        let k = self.degree(role);
        (0..self.torus.complex.num_cells(k)).map(|i| self.torus.doubled_coords(k, i)).collect()
    }
}

/// `r -> r m + b` with `m = matrix / denom` and `b = shift / (2 denom)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceGroupElement {
    pub m: LatticeAutomorphism,
    pub shift: Vec<i64>,
}

impl SpaceGroupElement {
    #[must_use]
    pub fn identity(d: usize) -> Self {
        Self { m: LatticeAutomorphism::identity(d), shift: vec![0; d] }
    }

    /// Image of a doubled coordinate, if it is again a doubled coordinate.
    #[must_use]
    pub fn apply_doubled(&self, y: &[i64]) -> Option<Vec<i64>> {
        let den = self.m.denom;
        let v = self.m.apply_scaled(y);
        v.iter()
            .zip(&self.shift)
            .map(|(a, b)| {
                let s = a + b;
                (s % den == 0).then_some(s / den)
            })
            .collect()
    }

    /// Shift as `(numerators, denominator)` in lowest terms.
    #[must_use]
    pub fn b(&self) -> (Vec<i64>, i64) {
        let mut den = 2 * self.m.denom;
        let mut num = self.shift.clone();
        let g = num.iter().fold(den, |g, &x| gcd(g, x));
        if g > 1 {
            num.iter_mut().for_each(|x| *x /= g);
            den /= g;
        }
        (num, den)
    }

    /// `self` followed by `other`.
    #[must_use]
    pub fn then(&self, other: &Self) -> Self {
        let m = self.m.compose(&other.m);
        // b M' + b', over the common denominator 2 den den'.
        let bm = other.m.apply_scaled(&self.shift);
        let raw: Vec<i64> = bm.iter().zip(&other.shift).map(|(a, c)| a + c * self.m.denom).collect();
        let scale = self.m.denom * other.m.denom / m.denom;
        Self { shift: raw.iter().map(|x| x / scale).collect(), m }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MappingRule {
    /// Checks map to checks of the same type.
    Preserve,
    /// X-checks and Z-checks are exchanged.
    Exchange,
}

/// A space-group element together with the permutations it induces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrystalSymmetry {
    pub element: SpaceGroupElement,
    pub rule: MappingRule,
    pub qubits: Vec<usize>,
    pub xchecks: Vec<usize>,
    pub zchecks: Vec<usize>,
}

impl CrystalSymmetry {
    #[must_use]
    pub fn is_involution(&self) -> bool {
        self.qubits.iter().enumerate().all(|(i, &j)| self.qubits[j] == i)
    }
}

fn induced(crystal: &Crystal, g: &SpaceGroupElement, from: Role, to: Role) -> Option<Vec<usize>> {
    let target = crystal.degree(to);
    let mut seen = vec![false; crystal.torus.complex.num_cells(target)];
    crystal
        .coords(from)
        .iter()
        .map(|y| {
            let img = g.apply_doubled(y)?;
            let (k, idx) = crystal.torus.cell_at_doubled(&img);
            if k != target || std::mem::replace(&mut seen[idx], true) {
                return None;
            }
            Some(idx)
        })
        .collect()
}

/// Check a candidate element and return its induced permutations.
#[must_use]
pub fn check_element(crystal: &Crystal, g: &SpaceGroupElement, rule: MappingRule) -> Option<CrystalSymmetry> {
    let (xt, zt) = match rule {
        MappingRule::Preserve => (Role::XCheck, Role::ZCheck),
        MappingRule::Exchange => (Role::ZCheck, Role::XCheck),
    };
    let qubits = induced(crystal, g, Role::Qubit, Role::Qubit)?;
    let xchecks = induced(crystal, g, Role::XCheck, xt)?;
    let zchecks = induced(crystal, g, Role::ZCheck, zt)?;
    Some(CrystalSymmetry { element: g.clone(), rule, qubits, xchecks, zchecks })
}

/// All space-group elements built from `autos` that satisfy `rule`, one per induced permutation.
///
/// Shifts come from `b = r_k - r_0 M` over qubit coordinates `r_k`.
#[must_use]
pub fn find_space_group(crystal: &Crystal, autos: &[LatticeAutomorphism], rule: MappingRule) -> Vec<CrystalSymmetry> {
    let qubits = crystal.coords(Role::Qubit);
    let r0 = &qubits[0];
    let found: Vec<CrystalSymmetry> = autos
        .par_iter()
        .flat_map_iter(|m| {
            let r0m = m.apply_scaled(r0);
            qubits
                .iter()
                .filter_map(|rk| {
                    let shift = rk.iter().zip(&r0m).map(|(a, b)| a * m.denom - b).collect();
                    check_element(crystal, &SpaceGroupElement { m: m.clone(), shift }, rule)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut unique: BTreeMap<(Vec<usize>, Vec<usize>, Vec<usize>), CrystalSymmetry> = BTreeMap::new();
    for s in found {
        unique.entry((s.qubits.clone(), s.xchecks.clone(), s.zchecks.clone())).or_insert(s);
    }
    unique.into_values().collect()
}

/// `block_diag(P, P)` for a qubit permutation.
pub fn permutation_symmetry_matrix(s: &CrystalSymmetry) -> Result<BitMatrix> {
    if s.rule != MappingRule::Preserve {
        return Err(Error::NotSymmetry("element exchanges check types".into()));
    }
    Ok(block_gate(&s.qubits, GateKind::Permutation))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    Permutation,
    HadamardType,
    PhaseType,
}

fn block_gate(perm: &[usize], kind: GateKind) -> BitMatrix {
    let n = perm.len();
    if kind == GateKind::Permutation {
        return permutation_matrix(perm);
    }
    let p = BitMatrix::from_rows(n, perm.iter().map(|&j| BitVec::unit(n, j)).collect());
    let z = BitMatrix::zeros(n, n);
    let i = BitMatrix::identity(n);
    match kind {
        GateKind::Permutation => unreachable!(),
        GateKind::HadamardType => z.hstack(&p).vstack(&p.hstack(&z)),
        GateKind::PhaseType => i.hstack(&p).vstack(&z.hstack(&i)),
    }
}

/// `[[0, D], [D, 0]]` for a ZX duality `D`.
pub fn hadamard_type(code: &StabilizerCode, s: &CrystalSymmetry) -> Result<BitMatrix> {
    hadamard_type_in(code, &code.stabilizer_reducer(), s)
}

fn hadamard_type_in(code: &StabilizerCode, red: &Reducer, s: &CrystalSymmetry) -> Result<BitMatrix> {
    if s.rule != MappingRule::Exchange {
        return Err(Error::NotSymmetry("element preserves check types".into()));
    }
    let u = block_gate(&s.qubits, GateKind::HadamardType);
    if !code.is_symmetry_in(red, &u) {
        return Err(Error::NotSymmetry("duality does not exchange the check spans".into()));
    }
    Ok(u)
}

/// `[[I, D], [0, I]]` for an involutive ZX duality `D`.
pub fn phase_type(code: &StabilizerCode, s: &CrystalSymmetry) -> Result<BitMatrix> {
    phase_type_in(code, &code.stabilizer_reducer(), s)
}

fn phase_type_in(code: &StabilizerCode, red: &Reducer, s: &CrystalSymmetry) -> Result<BitMatrix> {
    if s.rule != MappingRule::Exchange {
        return Err(Error::NotSymmetry("element preserves check types".into()));
    }
    if !s.is_involution() {
        return Err(Error::NotSymplectic);
    }
    let u = block_gate(&s.qubits, GateKind::PhaseType);
    if !code.is_symmetry_in(red, &u) {
        return Err(Error::NotSymmetry("X-checks do not map into Z-checks".into()));
    }
    Ok(u)
}

/// Emitted gate record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gate {
    #[serde(rename = "type")]
    pub kind: GateKind,
    pub space_group: SpaceGroupRecord,
    pub symplectic_matrix: BitMatrix,
    pub logical_action: BitMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceGroupRecord {
    pub m: IntMatrix,
    pub m_denom: i64,
    pub b: Vec<i64>,
    pub b_denom: i64,
}

impl From<&SpaceGroupElement> for SpaceGroupRecord {
    fn from(g: &SpaceGroupElement) -> Self {
        let (b, b_denom) = g.b();
        Self { m: g.m.matrix.clone(), m_denom: g.m.denom, b, b_denom }
    }
}

/// All crystalline gates of a torus code, with their logical actions in basis `l`.
pub fn crystalline_gates(
    code: &StabilizerCode,
    crystal: &Crystal,
    autos: &[LatticeAutomorphism],
    l: &LogicalBasis,
) -> Result<Vec<Gate>> {
    let red = code.stabilizer_reducer();
    let mut todo: Vec<(CrystalSymmetry, GateKind)> = Vec::new();
    for s in find_space_group(crystal, autos, MappingRule::Preserve) {
        todo.push((s, GateKind::Permutation));
    }
    for s in find_space_group(crystal, autos, MappingRule::Exchange) {
        if s.is_involution() {
            todo.push((s.clone(), GateKind::PhaseType));
        }
        todo.push((s, GateKind::HadamardType));
    }
    todo.par_iter()
        .map(|(s, kind)| {
            let u = match kind {
                GateKind::Permutation => permutation_symmetry_matrix(s)?,
                GateKind::HadamardType => hadamard_type_in(code, &red, s)?,
                GateKind::PhaseType => phase_type_in(code, &red, s)?,
            };
            // logical_action_in re-verifies symplecticity and the symmetry.
            let action = logical_action_in(code, &red, l, &u)?;
            Ok(Gate { kind: *kind, space_group: (&s.element).into(), symplectic_matrix: u, logical_action: action })
        })
        .collect()
}

/// Distinct logical actions, in first-seen order.
#[must_use]
pub fn distinct_actions<'a>(actions: impl IntoIterator<Item = &'a BitMatrix>) -> Vec<BitMatrix> {
    let mut seen = HashSet::new();
    actions.into_iter().filter(|a| seen.insert((*a).clone())).cloned().collect()
}

/// Greedy generating subset: each kept action lies outside the group generated by `seed` and the
/// earlier kept actions.
#[must_use]
pub fn independent_actions(seed: &[BitMatrix], actions: &[BitMatrix]) -> Vec<BitMatrix> {
    let Some(first) = seed.first().or(actions.first()) else { return Vec::new() };
    let mut chain = StabChain::new(first.num_rows());
    for g in seed {
        chain.add_generator(Mat::from_bit_matrix(g));
    }
    let mut kept = Vec::new();
    for a in actions {
        let m = Mat::from_bit_matrix(a);
        if !chain.contains(&m) {
            kept.push(a.clone());
            chain.add_generator(m);
        }
    }
    kept
}

/// Square F2 matrix with at most 64 columns; rows act on row vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Mat {
    dim: usize,
    rows: Vec<u64>,
}

impl Mat {
    fn identity(dim: usize) -> Self {
        Self { dim, rows: (0..dim).map(|i| 1 << i).collect() }
    }

    fn from_bit_matrix(m: &BitMatrix) -> Self {
        assert!(m.num_cols() <= 64 && m.num_rows() == m.num_cols());
        let rows = m.rows().iter().map(|r| r.words().first().copied().unwrap_or(0)).collect();
        Self { dim: m.num_rows(), rows }
    }

    fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r == 1 << i)
    }

    fn apply(&self, mut v: u64) -> u64 {
        let mut out = 0;
        while v != 0 {
            let i = v.trailing_zeros() as usize;
            out ^= self.rows[i];
            v &= v - 1;
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        Self { dim: self.dim, rows: self.rows.iter().map(|&r| other.apply(r)).collect() }
    }

    fn inverse(&self) -> Self {
        let n = self.dim;
        let mut a = self.rows.clone();
        let mut inv: Vec<u64> = (0..n).map(|i| 1 << i).collect();
        for c in 0..n {
            let p = (c..n).find(|&r| a[r] >> c & 1 == 1).expect("invertible matrix");
            a.swap(c, p);
            inv.swap(c, p);
            for r in 0..n {
                if r != c && a[r] >> c & 1 == 1 {
                    a[r] ^= a[c];
                    inv[r] ^= inv[c];
                }
            }
        }
        Self { dim: n, rows: inv }
    }
}

struct Level {
    base: u64,
    /// Orbit point -> (u, u^-1) with `base * u = point`; entries are never replaced.
    transversal: HashMap<u64, (Mat, Mat)>,
    order: Vec<u64>,
    pending: Vec<(u64, usize)>,
    /// Orbit points before this index are closed under the current generators.
    scanned: usize,
}

/// Stabilizer chain for a matrix group acting on nonzero vectors.
struct StabChain {
    dim: usize,
    levels: Vec<Level>,
    gens: Vec<Mat>,
    /// Index of the first base point each strong generator moves.
    gen_level: Vec<usize>,
}

impl StabChain {
    fn new(dim: usize) -> Self {
        Self { dim, levels: Vec::new(), gens: Vec::new(), gen_level: Vec::new() }
    }

    fn sift(&self, g: &Mat, from: usize) -> (Mat, usize) {
        let mut h = g.clone();
        for (j, lv) in self.levels.iter().enumerate().skip(from) {
            let img = h.apply(lv.base);
            match lv.transversal.get(&img) {
                Some((_, inv)) => h = h.mul(inv),
                None => return (h, j),
            }
        }
        (h, self.levels.len())
    }

    fn contains(&self, g: &Mat) -> bool {
        self.sift(g, 0).0.is_identity()
    }

    fn add_strong(&mut self, h: Mat, j: usize) {
        if j == self.levels.len() {
            let base = (0..self.dim).map(|b| 1u64 << b).find(|&e| h.apply(e) != e).expect("nontrivial element");
            let mut transversal = HashMap::new();
            transversal.insert(base, (Mat::identity(self.dim), Mat::identity(self.dim)));
            self.levels.push(Level { base, transversal, order: vec![base], pending: Vec::new(), scanned: 0 });
        }
        let id = self.gens.len();
        self.gens.push(h);
        self.gen_level.push(j);
        for lv in &mut self.levels[..=j] {
            lv.pending.extend(lv.order.iter().map(|&p| (p, id)));
            lv.scanned = 0;
        }
    }

    fn add_generator(&mut self, g: Mat) {
        let (h, j) = self.sift(&g, 0);
        if h.is_identity() {
            return;
        }
        self.add_strong(h, j);
        let mut i = self.levels.len() - 1;
        loop {
            self.close_orbit(i);
            match self.levels[i].pending.pop() {
                Some((p, s)) => {
                    let lv = &self.levels[i];
                    let img = self.gens[s].apply(p);
                    let schreier = lv.transversal[&p].0.mul(&self.gens[s]).mul(&lv.transversal[&img].1);
                    let (h, j) = self.sift(&schreier, i + 1);
                    if !h.is_identity() {
                        self.add_strong(h, j);
                        i = j;
                    }
                }
                None if i == 0 => break,
                None => i -= 1,
            }
        }
    }

    fn close_orbit(&mut self, i: usize) {
        let ids: Vec<usize> = (0..self.gens.len()).filter(|&s| self.gen_level[s] >= i).collect();
        let lv = &mut self.levels[i];
        let mut k = lv.scanned;
        while k < lv.order.len() {
            let p = lv.order[k];
            for &s in &ids {
                let img = self.gens[s].apply(p);
                if !lv.transversal.contains_key(&img) {
                    let u = lv.transversal[&p].0.mul(&self.gens[s]);
                    let inv = u.inverse();
                    lv.transversal.insert(img, (u, inv));
                    lv.order.push(img);
                    lv.pending.extend(ids.iter().map(|&t| (img, t)));
                }
            }
            k += 1;
        }
        lv.scanned = k;
    }

    fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.order.len() as u128).product()
    }
}

/// Order of the group generated by invertible F2 matrices of size at most 64.
pub fn group_order(generators: &[BitMatrix]) -> Result<u128> {
    let Some(first) = generators.first() else { return Ok(1) };
    let dim = first.num_rows();
    if dim > 64 {
        return Err(Error::Invalid("matrices larger than 64 are unsupported".into()));
    }
    let mut chain = StabChain::new(dim);
    for g in generators {
        if g.num_rows() != dim || g.num_cols() != dim {
            return Err(Error::Dimension("generators differ in size".into()));
        }
        if g.rank() != dim {
            return Err(Error::Singular);
        }
        chain.add_generator(Mat::from_bit_matrix(g));
    }
    Ok(chain.order())
}

/// Summary of the crystalline gates of a torus code.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub n: usize,
    pub k: usize,
    pub automorphisms: usize,
    pub integral_automorphisms: usize,
    pub permutation_gates: usize,
    pub hadamard_gates: usize,
    pub phase_gates: usize,
    pub distinct_permutation_actions: usize,
    pub distinct_hadamard_actions: usize,
    pub distinct_phase_actions: usize,
    /// F2 rank of the off-diagonal blocks `A` of phase-type actions `[[I, A], [0, I]]`.
    pub phase_rank: usize,
    pub permutation_group_order: u128,
    pub group_order: u128,
    /// Every gate is symplectic and maps the stabilizer group onto itself.
    pub all_verified: bool,
}

/// Enumerate all crystalline gates of the code on the `q`-cells of the torus and summarize.
pub fn symmetry_report(lattice: &LatticeBasis, q: usize) -> Result<SymmetryReport> {
    let tc = torus_complex(lattice);
    let code = css_from_complex(&tc.complex, q)?;
    let l = code.logical_basis();
    let autos = lattice_automorphisms(lattice);
    let integral = autos.iter().filter(|a| a.is_integral()).count();
    let crystal = Crystal::new(tc, q);
    let gates = crystalline_gates(&code, &crystal, &autos, &l)?;
    let red = code.stabilizer_reducer();
    let all_verified = gates.par_iter().all(|g| is_symplectic(&g.symplectic_matrix) && code.is_symmetry_in(&red, &g.symplectic_matrix));
    let of = |kind: GateKind| distinct_actions(gates.iter().filter(|g| g.kind == kind).map(|g| &g.logical_action));
    let perms = of(GateKind::Permutation);
    let hads = of(GateKind::HadamardType);
    let phases = of(GateKind::PhaseType);
    let k = l.k;
    let blocks: Vec<BitVec> = phases
        .iter()
        .map(|m| BitVec::from_indices(k * k, (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).filter(|&(i, j)| m.get(i, k + j)).map(|(i, j)| i * k + j)))
        .collect();
    let phase_rank = if blocks.is_empty() { 0 } else { BitMatrix::from_rows(k * k, blocks).rank() };
    let all: Vec<BitMatrix> = perms.iter().chain(&hads).chain(&phases).cloned().collect();
    Ok(SymmetryReport {
        n: code.n,
        k,
        automorphisms: autos.len(),
        integral_automorphisms: integral,
        permutation_gates: gates.iter().filter(|g| g.kind == GateKind::Permutation).count(),
        hadamard_gates: gates.iter().filter(|g| g.kind == GateKind::HadamardType).count(),
        phase_gates: gates.iter().filter(|g| g.kind == GateKind::PhaseType).count(),
        distinct_permutation_actions: perms.len(),
        distinct_hadamard_actions: hads.len(),
        distinct_phase_actions: phases.len(),
        phase_rank,
        permutation_group_order: if perms.is_empty() { 1 } else { group_order(&perms)? },
        group_order: if all.is_empty() { 1 } else { group_order(&all)? },
        all_verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{css_from_complex, torus_complex};
    use crate::lattice::{lattice_automorphisms, LatticeBasis};

    fn toric(n: i64) -> (StabilizerCode, Crystal, Vec<LatticeAutomorphism>) {
        let b = LatticeBasis::diagonal(&[n, n]);
        let tc = torus_complex(&b);
        let code = css_from_complex(&tc.complex, 1).unwrap();
        (code, Crystal::new(tc, 1), lattice_automorphisms(&b))
    }

    #[test]
    fn identity_and_half_shift() {
        let (_, crystal, autos) = toric(3);
        let pres = find_space_group(&crystal, &autos, MappingRule::Preserve);
        assert!(pres.iter().any(|s| s.element.m.is_integral() && s.qubits.iter().enumerate().all(|(i, &j)| i == j)));
        // 8 point-group elements times 9 translations.
        assert_eq!(pres.len(), 72);
        let ex = find_space_group(&crystal, &autos, MappingRule::Exchange);
        let id = LatticeAutomorphism::identity(2);
        assert!(ex.iter().any(|s| s.element.m == id && s.element.b() == (vec![1, 1], 2)));
    }

    #[test]
    fn matrix_order_small() {
        let s = BitMatrix::from_dense(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(group_order(&[s.clone()]).unwrap(), 2);
        let h = BitMatrix::from_dense(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(group_order(&[s, h]).unwrap(), 6);
        assert_eq!(group_order(&[]).unwrap(), 1);
    }

    #[test]
    fn composition_matches_permutations() {
        let (_, crystal, autos) = toric(3);
        let pres = find_space_group(&crystal, &autos, MappingRule::Preserve);
        let ex = find_space_group(&crystal, &autos, MappingRule::Exchange);
        for a in pres.iter().take(10) {
            for b in ex.iter().take(10) {
                let g = a.element.then(&b.element);
                let c = check_element(&crystal, &g, MappingRule::Exchange).unwrap();
                let expect: Vec<usize> = a.qubits.iter().map(|&q| b.qubits[q]).collect();
                assert_eq!(c.qubits, expect);
            }
        }
    }
}
