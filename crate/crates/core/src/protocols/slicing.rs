//! Slicing a 3D code into entangled 2D codes.

use super::tableau::{PauliOp, StabilizerState};
use crate::code::{x_pauli, z_pauli, LogicalBasis, StabilizerCode};
use crate::complex::{css_from_complex, slice_lattice, torus_complex, twisted_product, CellMap, ChainComplex, TorusComplex};
use crate::distance::{search, FaultTable, SearchLimits};
use crate::error::{Error, Result};
use crate::gf2::{symplectic_product, BitMatrix, BitVec, IncrementalBasis};
use crate::lattice::LatticeBasis;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The 3D code together with its decomposition into slices `x_1 = c`.
#[derive(Clone, Debug)]
pub struct SliceSetup {
    pub torus: TorusComplex,
    pub code: StabilizerCode,
    pub n_slice: usize,
    pub slice_torus: TorusComplex,
    pub slice_code: StabilizerCode,
    pub slice_logicals: LogicalBasis,
    /// `qubit_maps[c][e]`: 3D edge of edge `e` of slice `c`.
    pub qubit_maps: Vec<Vec<usize>>,
    /// Edges along direction 1, measured out in X.
    pub measured: Vec<usize>,
}

impl SliceSetup {
    /// Number of logical qubits per slice.
    #[must_use]
    pub fn k_slice(&self) -> usize {
        self.slice_logicals.k
    }

    fn lift(&self, c: usize, support: &BitVec) -> BitVec {
        BitVec::from_indices(self.code.n, support.iter_ones().map(|e| self.qubit_maps[c][e]))
    }

    /// Z support of logical `a` of slice `c`, on 3D edges.
    #[must_use]
    pub fn z_logical(&self, c: usize, a: usize) -> BitVec {
        self.lift(c, &self.slice_logicals.z_supports()[a])
    }

    #[must_use]
    pub fn x_logical(&self, c: usize, a: usize) -> BitVec {
        self.lift(c, &self.slice_logicals.x_supports()[a])
    }

    /// Rows `X_{c,a}` then `Z_{c,a}` in the order `c * k + a`.
    #[must_use]
    pub fn logical_matrix(&self) -> BitMatrix {
        let k = self.k_slice();
        let mut rows = Vec::new();
        for c in 0..self.n_slice {
            for a in 0..k {
                rows.push(x_pauli(&self.x_logical(c, a)));
            }
        }
        for c in 0..self.n_slice {
            for a in 0..k {
                rows.push(z_pauli(&self.z_logical(c, a)));
            }
        }
        BitMatrix::from_rows(2 * self.code.n, rows)
    }
}

/// Build the 3D toric code (qubits on edges) and its slices.
pub fn slice_setup(basis: &LatticeBasis) -> Result<SliceSetup> {
    if basis.dim != 3 {
        return Err(Error::Invalid("slicing needs a 3D lattice".into()));
    }
    let torus = torus_complex(basis);
    let code = css_from_complex(&torus.complex, 1)?;
    let n_slice = torus.hnf.n_slice() as usize;
    let slice_torus = torus_complex(&slice_lattice(&torus.hnf));
    let slice_code = css_from_complex(&slice_torus.complex, 1)?;
    let slice_logicals = slice_code.logical_basis();
    let qubit_maps = (0..n_slice)
        .map(|c| {
            (0..slice_code.n)
                .map(|e| {
                    let (y, s) = slice_torus.cell(1, e);
                    torus.cell_index(&[c as i64, y[0], y[1]], &[s[0] + 1])
                })
                .collect()
        })
        .collect::<Vec<Vec<usize>>>();
    let measured: Vec<usize> = (0..code.n).filter(|&e| torus.cell(1, e).1 == [0]).collect();
    let mut seen = BitVec::zeros(code.n);
    for e in qubit_maps.iter().flatten().chain(&measured) {
        if seen.get(*e) {
            return Err(Error::Mismatch("slice qubits overlap".into()));
        }
        seen.set(*e, true);
    }
    if seen.weight() != code.n {
        return Err(Error::Mismatch("slices and measured edges do not cover all qubits".into()));
    }
    Ok(SliceSetup { torus, code, n_slice, slice_torus, slice_code, slice_logicals, qubit_maps, measured })
}

/// Element of the logical stabilizer group: coefficients over `logical_matrix` rows and the sign
/// of the corresponding Hermitian Pauli.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedLogical {
    pub coefficients: BitVec,
    pub negative: bool,
}

/// Transcript of one run of the slicing protocol.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceReport {
    pub n: usize,
    pub n_slice: usize,
    pub k_slice: usize,
    pub seed: u64,
    pub z_outcomes: Vec<bool>,
    /// Z outcomes satisfy every relation among the Z checks.
    pub outcomes_consistent: bool,
    pub correction: Vec<usize>,
    /// Every Z check reads `+1` after the correction.
    pub checks_fixed: bool,
    pub x_outcomes: Vec<bool>,
    /// Every check of every slice code has a definite value.
    pub slice_checks_definite: bool,
    pub logical_group: Vec<SignedLogical>,
    /// Span equals `ghz_logical_group` (two Bell pairs for two slices).
    pub matches_expected: bool,
}

/// Stabilizers `Z_{c,a} Z_{c+1,a}` and `prod_c X_{c,a}` in logical coordinates.
#[must_use]
pub fn ghz_logical_group(n_slice: usize, k: usize) -> BitMatrix {
    let kk = n_slice * k;
    let mut rows = Vec::new();
    for a in 0..k {
        rows.push(BitVec::from_indices(2 * kk, (0..n_slice).map(|c| c * k + a)));
        for c in 0..n_slice.saturating_sub(1) {
            rows.push(BitVec::from_indices(2 * kk, [kk + c * k + a, kk + (c + 1) * k + a]));
        }
    }
    BitMatrix::from_rows(2 * kk, rows)
}

fn row_combination(m: &BitMatrix, c: &BitVec) -> BitVec {
    let mut v = BitVec::zeros(m.num_cols());
    for i in c.iter_ones() {
        v.xor_assign(m.row(i));
    }
    v
}

/// Run the slicing protocol on `|+>^n`: measure Z checks, correct, measure direction-1 edges in X,
/// and read off the logical stabilizer group of the slices.
pub fn slice_protocol(basis: &LatticeBasis, seed: u64) -> Result<SliceReport> {
    let setup = slice_setup(basis)?;
    let n = setup.code.n;
    let hz = setup.code.checks_of(crate::code::PauliType::Z).clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = StabilizerState::plus(n);
    let mut z_outcomes = Vec::with_capacity(hz.num_rows());
    for r in hz.rows() {
        let m = state.measure(&PauliOp::hermitian(z_pauli(r), false), &mut rng);
        z_outcomes.push(m.negative);
    }
    let s = BitVec::from_indices(z_outcomes.len(), (0..z_outcomes.len()).filter(|&i| z_outcomes[i]));
    let relations = hz.transpose().kernel();
    let outcomes_consistent = relations.rows().iter().all(|r| !r.dot(&s));
    let x = hz.transpose().solve_left(&s).ok_or_else(|| Error::Mismatch("Z outcomes have no correction".into()))?;
    state.apply_pauli(&x_pauli(&x));
    let checks_fixed = hz.rows().iter().all(|r| state.expectation(&PauliOp::hermitian(z_pauli(r), false)) == Some(false));
    let mut x_outcomes = Vec::with_capacity(setup.measured.len());
    for &e in &setup.measured {
        let m = state.measure(&PauliOp::hermitian(x_pauli(&BitVec::unit(n, e)), false), &mut rng);
        x_outcomes.push(m.negative);
    }
    let sc = setup.slice_code.css.as_ref().expect("CSS slice");
    let mut slice_checks_definite = true;
    for c in 0..setup.n_slice {
        for r in sc.hx.rows() {
            slice_checks_definite &= state.expectation(&PauliOp::hermitian(x_pauli(&setup.lift(c, r)), false)).is_some();
        }
        for r in sc.hz.rows() {
            slice_checks_definite &= state.expectation(&PauliOp::hermitian(z_pauli(&setup.lift(c, r)), false)).is_some();
        }
    }
    let lm = setup.logical_matrix();
    let mut g = BitMatrix::zeros(lm.num_rows(), n);
    for (i, l) in lm.rows().iter().enumerate() {
        for (j, st) in state.stabilizers.iter().enumerate() {
            g.set(i, j, symplectic_product(l, &st.v));
        }
    }
    let kernel = g.transpose().kernel();
    let mut logical_group = Vec::new();
    for c in kernel.rows() {
        let op = PauliOp::hermitian(row_combination(&lm, c), false);
        let negative = state.expectation(&op).ok_or_else(|| Error::Mismatch("logical has no definite value".into()))?;
        logical_group.push(SignedLogical { coefficients: c.clone(), negative });
    }
    let found = BitMatrix::from_rows(lm.num_rows(), logical_group.iter().map(|l| l.coefficients.clone()).collect());
    let matches_expected = found.row_span_equal(&ghz_logical_group(setup.n_slice, setup.k_slice()));
    Ok(SliceReport {
        n,
        n_slice: setup.n_slice,
        k_slice: setup.k_slice(),
        seed,
        z_outcomes,
        outcomes_consistent,
        correction: x.iter_ones().collect(),
        checks_fixed,
        x_outcomes,
        slice_checks_definite,
        logical_group,
        matches_expected,
    })
}

fn push_forward(map: &CellMap, k: usize, v: &BitVec) -> BitVec {
    BitVec::from_indices(v.len(), v.iter_ones().map(|c| map.perms[k][c]))
}

/// Logical stabilizer group of the sliced state, read off from the twisted product
/// `circle x D` with the 2D code on the 1-cells of `D`.
///
/// Generators: `Z_u^a Z_w^a` for each circle edge `(u, w)` and `prod_v X_v^a`, in the coordinates
/// of `ghz_logical_group`. Twists must act trivially on homology; the caller asserts this with
/// `trivial_on_homology` and it is checked.
pub fn twisted_slice_logicals(
    circle_len: usize,
    d: &ChainComplex,
    twists: &[(CellMap, CellMap)],
    trivial_on_homology: bool,
) -> Result<BitMatrix> {
    if !trivial_on_homology {
        return Err(Error::Invalid("twists acting nontrivially on homology are not supported".into()));
    }
    let dcode = css_from_complex(d, 1)?;
    let l = dcode.logical_basis();
    let k = l.k;
    let zs = l.z_supports();
    let xs = l.x_supports();
    let dz = d.boundary(2);
    let dx = d.boundary(1).transpose();
    for (a, b) in twists {
        for t in [a, b] {
            for z in &zs {
                if !dz.in_row_span(&push_forward(t, 1, z).xor(z)) {
                    return Err(Error::Mismatch("twist moves a cycle to another class".into()));
                }
            }
            for x in &xs {
                if !dx.in_row_span(&push_forward(t, 1, x).xor(x)) {
                    return Err(Error::Mismatch("twist moves a cocycle to another class".into()));
                }
            }
        }
    }
    let tp = twisted_product(circle_len, d, twists)?;
    let code = css_from_complex(&tp.complex, 1)?;
    let p = code.css.as_ref().expect("CSS");
    let n = code.n;
    let kk = circle_len * k;
    let lift = |v: usize, s: &BitVec| BitVec::from_indices(n, s.iter_ones().map(|c| tp.vertex_cell(1, v, c)));
    let mut rows = Vec::new();
    for a in 0..k {
        // prod_v X_v^a, made coclosed by edge (x) vertex cells.
        let mut x = BitVec::zeros(n);
        for v in 0..circle_len {
            x.xor_assign(&lift(v, &xs[a]));
        }
        let extra: Vec<usize> =
            (0..circle_len).flat_map(|e| (0..d.num_cells(0)).map(move |c| (e, c))).map(|(e, c)| tp.edge_cell(1, e, c)).collect();
        let target = p.hz.mul_vec(&x);
        if p.hz.select_columns(&extra).transpose().solve_left(&target).is_none() {
            return Err(Error::Mismatch("X logical product cannot be made coclosed".into()));
        }
        rows.push(BitVec::from_indices(2 * kk, (0..circle_len).map(|v| v * k + a)));
        for e in 0..circle_len {
            let w = (e + 1) % circle_len;
            if w == e {
                continue;
            }
            let z = lift(e, &zs[a]).xor(&lift(w, &zs[a]));
            if !p.hz.in_row_span(&z) {
                return Err(Error::Mismatch("Z logical pair is not a boundary".into()));
            }
            rows.push(BitVec::from_indices(2 * kk, [kk + e * k + a, kk + w * k + a]));
        }
    }
    Ok(BitMatrix::from_rows(2 * kk, rows))
}

/// Flux errors (flipped Z-check outcomes) and qubit errors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultConfig {
    pub flux_errors: Vec<usize>,
    pub qubit_x_errors: Vec<usize>,
    pub qubit_z_errors: Vec<usize>,
}

impl FaultConfig {
    /// `e_f + 2 e_X`, twice the effective weight.
    #[must_use]
    pub fn half_units(&self) -> usize {
        self.flux_errors.len() + 2 * self.qubit_x_errors.len()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EffectiveDistanceReport {
    /// Minimum of `e_f + 2 e_X` over undetected logical errors, if at most `w_max_half`.
    pub min_half_units: Option<usize>,
    pub w_max_half: usize,
    pub witness: Option<FaultConfig>,
    /// Minimum number of flux errors alone.
    pub flux_only: Option<usize>,
    pub sharp_witness: Option<FaultConfig>,
    pub nodes: u64,
}

/// Undetected logical errors of the slicing protocol built from flux errors (cost 1) and X
/// errors on slice qubits (cost 2).
///
/// Detectors: every relation among Z-check outcomes and every slice plaquette. Classes: the
/// signs of `Z_c^a Z_{c+1}^a`.
pub fn effective_distance_bell(basis: &LatticeBasis, w_max_half: usize, limits: SearchLimits) -> Result<EffectiveDistanceReport> {
    let setup = slice_setup(basis)?;
    if setup.n_slice < 2 {
        return Err(Error::Invalid("needs at least two slices".into()));
    }
    let tc = &setup.torus;
    let det = tc.det();
    let hz = setup.code.checks_of(crate::code::PauliType::Z);
    let n_plaq = hz.num_rows();
    // Relations: cube boundaries, completed to the full left kernel.
    let mut rel = IncrementalBasis::new();
    let mut relations = Vec::new();
    for r in tc.complex.boundary(3).rows().iter().chain(hz.transpose().kernel().rows()) {
        if rel.insert(r) {
            relations.push(r.clone());
        }
    }
    let slice_plaq: Vec<usize> = (0..n_plaq).filter(|&p| !tc.cell(2, p).1.contains(&0)).collect();
    let n_det = relations.len() + slice_plaq.len();
    let k = setup.k_slice();
    let mut targets = Vec::new();
    let mut sigmas = Vec::new();
    for c in 0..setup.n_slice - 1 {
        for a in 0..k {
            let t = setup.z_logical(c, a).xor(&setup.z_logical(c + 1, a));
            let s = hz.solve_left(&t).ok_or_else(|| Error::Mismatch("logical pair is not a product of Z checks".into()))?;
            targets.push(t);
            sigmas.push(s);
        }
    }
    if targets.len() > 64 {
        return Err(Error::Invalid("too many logical classes".into()));
    }
    let mut columns = Vec::new();
    let mut classes = Vec::new();
    let mut costs = Vec::new();
    let mut labels = Vec::new();
    for p in 0..n_plaq {
        let mut col = BitVec::zeros(n_det);
        for (i, r) in relations.iter().enumerate() {
            col.set(i, r.get(p));
        }
        if let Ok(j) = slice_plaq.binary_search(&p) {
            col.set(relations.len() + j, true);
        }
        columns.push(col);
        classes.push(sigmas.iter().enumerate().fold(0u64, |acc, (i, s)| if s.get(p) { acc | 1 << i } else { acc }));
        costs.push(1);
        labels.push((true, p));
    }
    let flux_count = columns.len();
    debug_assert_eq!(setup.measured, (0..det).collect::<Vec<_>>());
    // Slice edges in 3D index order: directions 2 and 3 occupy contiguous blocks of `det`.
    let hz_t = hz.transpose();
    for e in det..3 * det {
        let mut col = BitVec::zeros(n_det);
        for (j, &p) in slice_plaq.iter().enumerate() {
            col.set(relations.len() + j, hz_t.row(e).get(p));
        }
        columns.push(col);
        classes.push(targets.iter().enumerate().fold(0u64, |acc, (i, t)| if t.get(e) { acc | 1 << i } else { acc }));
        costs.push(2);
        labels.push((false, e));
    }
    // Translations within a slice act on contiguous blocks of det / n_slice mechanisms.
    let block = det / setup.n_slice;
    let starts: Vec<usize> = (0..columns.len()).step_by(block).collect();
    let table = FaultTable::new(columns.clone(), classes.clone()).with_costs(costs);
    let out = search(&table, w_max_half, &starts, limits)?;
    let to_config = |w: &[usize]| {
        let mut f = FaultConfig::default();
        for &i in w {
            let (flux, idx) = labels[i];
            if flux {
                f.flux_errors.push(idx);
            } else {
                f.qubit_x_errors.push(idx);
            }
        }
        f
    };
    let flux_table = FaultTable::new(columns[..flux_count].to_vec(), classes[..flux_count].to_vec());
    let flux_starts: Vec<usize> = (0..flux_count).step_by(block).collect();
    let flux = search(&flux_table, w_max_half, &flux_starts, limits)?;
    Ok(EffectiveDistanceReport {
        min_half_units: out.weight,
        w_max_half,
        witness: out.witnesses.first().map(|w| to_config(w)),
        flux_only: flux.weight,
        sharp_witness: flux.witnesses.first().map(|w| to_config(w)),
        nodes: out.nodes + flux.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::slice_twists;

    fn lat(rows: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_slice_is_plus_state() {
        let r = slice_protocol(&lat(&[&[1, 0, 0], &[0, 3, 0], &[0, 0, 3]]), 1).unwrap();
        assert_eq!(r.n_slice, 1);
        assert!(r.matches_expected && r.checks_fixed && r.outcomes_consistent);
    }

    #[test]
    fn two_slices_untwisted() {
        let b = lat(&[&[2, 0, 0], &[0, 3, 0], &[0, 0, 3]]);
        let r = slice_protocol(&b, 5).unwrap();
        assert!(r.matches_expected && r.slice_checks_definite);
        let s = slice_setup(&b).unwrap();
        let tw = slice_twists(&s.torus.hnf, &s.slice_torus);
        let alg = twisted_slice_logicals(2, &s.slice_torus.complex, &tw, true).unwrap();
        assert!(alg.row_span_equal(&ghz_logical_group(2, 2)));
    }

    #[test]
    fn unsupported_twist_flag() {
        let b = lat(&[&[2, 0, 0], &[0, 3, 0], &[0, 0, 3]]);
        let s = slice_setup(&b).unwrap();
        let tw = slice_twists(&s.torus.hnf, &s.slice_torus);
        assert!(twisted_slice_logicals(2, &s.slice_torus.complex, &tw, false).is_err());
    }
}
