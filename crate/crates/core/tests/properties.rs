use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotcode::code::{PauliType, StabilizerCode};
use rotcode::complex::{binomial, css_from_complex, slice_lattice, slice_twists, torus_complex, twisted_product};
use rotcode::distance::{code_distance, min_weight_logical, SearchLimits};
use rotcode::gf2::{symplectic_gram, BitMatrix, BitVec};
use rotcode::injection::{css_injection_sets_ordered, noncss_injection_sets_ordered, validate_sets, InjectionSets};
use rotcode::lattice::{hadamard_lattice, hnf, l1_systole, LatticeBasis};
use rotcode::protocols::{random_state, Basis, PauliOp};
use rotcode::symmetry::group_order;
use std::collections::HashSet;

/// Lattice in Hermite normal form with determinant at most `max_det` and first diagonal entry at
/// least `min_first`.
fn hnf_lattice(dims: std::ops::RangeInclusive<usize>, max_det: i64, min_first: i64) -> impl Strategy<Value = LatticeBasis> {
    dims.prop_flat_map(|d| (Just(d), prop::collection::vec(0i64..1000, d)))
        .prop_map(move |(d, raw)| {
            let mut diag = Vec::with_capacity(d);
            let mut room = max_det;
            for (i, r) in raw.iter().enumerate() {
                let lo = if i == 0 { min_first } else { 1 };
                let v = lo + r % (room - lo + 1).max(1);
                diag.push(v.min(room));
                room /= diag[i];
            }
            diag
        })
        .prop_flat_map(|diag| {
            let d = diag.len();
            let cells: Vec<_> = (0..d * d).map(|idx| (0..diag[idx % d]).boxed()).collect();
            (Just(diag), cells)
        })
        .prop_map(|(diag, free)| {
            let d = diag.len();
            let rows = (0..d)
                .map(|i| (0..d).map(|j| if j == i { diag[i] } else if j > i { free[i * d + j] } else { 0 }).collect())
                .collect();
            LatticeBasis::new(rows).unwrap()
        })
}

fn int_matrix(d: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-5i64..=5, d), d)
}

/// Elementary row operations `(i, j, c)`: add `c` times row `j` to row `i`, or negate row `i` when `i == j`.
fn unimodular(d: usize) -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::vec((0..d, 0..d, -3i64..=3), 0..16)
}

fn apply_ops(m: &mut [Vec<i64>], ops: &[(usize, usize, i64)]) {
    for &(i, j, c) in ops {
        if i == j {
            m[i].iter_mut().for_each(|x| *x = -*x);
        } else {
            let rj = m[j].clone();
            m[i].iter_mut().zip(rj).for_each(|(a, b)| *a += c * b);
        }
    }
}

fn brute_force_weight(code: &StabilizerCode, kind: PauliType, w_max: usize) -> Option<usize> {
    let detect = code.checks_of(kind.other());
    let same = code.checks_of(kind);
    let n = code.n;
    for w in 1..=w_max {
        let mut idx: Vec<usize> = (0..w).collect();
        loop {
            let v = BitVec::from_indices(n, idx.iter().copied());
            if detect.mul_vec(&v).is_zero() && !same.in_row_span(&v) {
                return Some(w);
            }
            let Some(p) = (0..w).rev().find(|&p| idx[p] < n - w + p) else { break };
            idx[p] += 1;
            for q in p + 1..w {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    None
}

/// Stabilizers commuting with every prepared single-qubit Pauli, restricted to `u`.
fn gu_restriction(code: &StabilizerCode, sets: &InjectionSets) -> BitMatrix {
    let n = code.n;
    let prepared: Vec<BitVec> = sets
        .bases()
        .iter()
        .enumerate()
        .filter_map(|(q, b)| {
            b.map(|b| {
                let (x, z) = b.bits();
                let mut v = BitVec::zeros(2 * n);
                v.set(q, x);
                v.set(n + q, z);
                v
            })
        })
        .collect();
    let p = BitMatrix::from_rows(2 * n, prepared);
    let combos = symplectic_gram(&p, &code.checks).kernel();
    let cols: Vec<usize> = sets.u.iter().copied().chain(sets.u.iter().map(|q| n + q)).collect();
    let rows = combos
        .rows()
        .iter()
        .map(|c| {
            let mut s = BitVec::zeros(2 * n);
            for i in c.iter_ones() {
                s.xor_assign(code.checks.row(i));
            }
            s.select(&cols)
        })
        .collect();
    BitMatrix::from_rows(cols.len(), rows)
}

fn small_codes() -> Vec<StabilizerCode> {
    let mut out = Vec::new();
    for (rows, q) in [("3,0;0,3", 1), ("1,2;0,5", 1), ("1,0,2;0,1,3;0,0,7", 1), ("1,0,2;0,1,3;0,0,7", 2), ("2,0,0;0,2,0;0,0,2", 2)] {
        out.push(css_from_complex(&torus_complex(&rows.parse().unwrap()).complex, q).unwrap());
    }
    out.push(StabilizerCode::from_pauli_strings(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).unwrap());
    out
}

fn random_invertible(d: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(prop::collection::vec(0u8..2, d), d)
        .prop_map(|rows| BitMatrix::from_dense(&rows))
        .prop_filter("singular", move |m| m.rank() == d)
}

fn closure_size(gens: &[BitMatrix]) -> usize {
    let d = gens[0].num_rows();
    let id = BitMatrix::identity(d);
    let mut seen: HashSet<Vec<Vec<u8>>> = HashSet::from([id.to_dense()]);
    let mut frontier = vec![id];
    while let Some(m) = frontier.pop() {
        for g in gens {
            let next = m.mul(g);
            if seen.insert(next.to_dense()) {
                frontier.push(next);
            }
        }
    }
    seen.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hnf_unimodular_invariance(d in 3usize..=4, m in int_matrix(4), ops in unimodular(4)) {
        let b: Vec<Vec<i64>> = m[..d].iter().map(|r| r[..d].to_vec()).collect();
        let Ok(basis) = LatticeBasis::new(b.clone()) else { return Ok(()) };
        let ops: Vec<_> = ops.into_iter().filter(|&(i, j, _)| i < d && j < d).collect();
        let mut moved = b;
        apply_ops(&mut moved, &ops);
        let h = hnf(&basis);
        prop_assert_eq!(&h, &hnf(&LatticeBasis::new(moved).unwrap()));
        for i in 0..d {
            prop_assert!(h.matrix[i][i] > 0);
            for j in 0..d {
                if j < i {
                    prop_assert_eq!(h.matrix[i][j], 0);
                } else if j > i {
                    prop_assert!((0..h.matrix[j][j]).contains(&h.matrix[i][j]));
                }
            }
        }
        prop_assert!(basis.rows.iter().all(|r| h.contains(r)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_squares_to_zero(b in hnf_lattice(2..=4, 12, 1)) {
        let tc = torus_complex(&b);
        prop_assert!(tc.complex.is_complex());
        prop_assert_eq!(tc.complex.euler_characteristic(), 0);
        for k in 0..=b.dim {
            prop_assert_eq!(tc.complex.betti(k), binomial(b.dim, k));
        }
    }

    #[test]
    fn twisted_product_is_complex(b in hnf_lattice(3..=3, 24, 2)) {
        let h = b.hnf();
        let slice = torus_complex(&slice_lattice(&h));
        let tp = twisted_product(h.n_slice() as usize, &slice.complex, &slice_twists(&h, &slice)).unwrap();
        prop_assert!(tp.complex.is_complex());
        let full = torus_complex(&b);
        prop_assert_eq!(tp.complex.counts(), full.complex.counts());
    }

    #[test]
    fn distance_matches_brute_force(b in hnf_lattice(2..=4, 12, 1), q in 1usize..4) {
        prop_assume!(q < b.dim);
        let tc = torus_complex(&b);
        let code = css_from_complex(&tc.complex, q).unwrap();
        prop_assume!(code.n <= 24);
        for kind in [PauliType::Z, PauliType::X] {
            let fast = min_weight_logical(&code, kind, 4, None, None, SearchLimits::default()).unwrap().weight;
            prop_assert_eq!(fast, brute_force_weight(&code, kind, 4));
            let orbit = min_weight_logical(&code, kind, 4, Some(tc.det()), None, SearchLimits::default()).unwrap().weight;
            prop_assert_eq!(orbit, fast);
        }
    }

    #[test]
    fn z_distance_is_systole(b in hnf_lattice(2..=3, 16, 1)) {
        let code = css_from_complex(&torus_complex(&b).complex, 1).unwrap();
        let s = l1_systole(&b, None).unwrap().0 as usize;
        let w = min_weight_logical(&code, PauliType::Z, s, None, None, SearchLimits::default()).unwrap().weight;
        prop_assert_eq!(w, Some(s));
    }

    #[test]
    fn singleton_bound(b in hnf_lattice(2..=3, 10, 1), q in 1usize..3) {
        prop_assume!(q < b.dim);
        let code = css_from_complex(&torus_complex(&b).complex, q).unwrap();
        if let Some(d) = code_distance(&code, 6, SearchLimits::default()).unwrap() {
            prop_assert!(2 * (d - 1) <= code.n - code.num_logical());
        }
    }

    #[test]
    fn greedy_order_invariance(which in 0usize..6, seed in any::<u64>()) {
        let code = &small_codes()[which];
        let mut order: Vec<usize> = (0..code.n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let mut all = vec![noncss_injection_sets_ordered(code, &order).unwrap()];
        if code.css.is_some() {
            all.push(css_injection_sets_ordered(code, &order).unwrap());
        }
        for sets in &all {
            prop_assert_eq!(sets.u.len(), code.num_logical());
            prop_assert!(validate_sets(code, sets).is_ok());
            prop_assert_eq!(gu_restriction(code, sets).rank(), 0);
        }
    }

    #[test]
    fn group_order_matches_closure(d in 2usize..=4, gens in prop::collection::vec(random_invertible(4), 1..3)) {
        let gens: Vec<BitMatrix> = gens
            .iter()
            .map(|g| g.select_rows(&(0..d).collect::<Vec<_>>()).select_columns(&(0..d).collect::<Vec<_>>()))
            .filter(|g| g.rank() == d)
            .collect();
        prop_assume!(!gens.is_empty());
        prop_assert_eq!(group_order(&gens).unwrap(), closure_size(&gens) as u128);
    }

    #[test]
    fn tableau_measurement(n in 1usize..8, seed in any::<u64>(), bits in prop::collection::vec(0u8..2, 16)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = random_state(n, &mut rng);
        prop_assert!(st.is_valid());
        for g in st.stabilizers.clone() {
            prop_assert_eq!(st.expectation(&g), Some(false));
        }
        let v = BitVec::from_bits(&bits[..2 * n]);
        prop_assume!(!v.is_zero());
        let p = PauliOp::hermitian(v, false);
        let before = st.expectation(&p);
        let m = st.measure(&p, &mut rng);
        prop_assert_eq!(m.deterministic, before.is_some());
        if let Some(neg) = before {
            prop_assert_eq!(m.negative, neg);
        }
        prop_assert!(st.is_valid());
        prop_assert_eq!(st.expectation(&p), Some(m.negative));
        let again = st.measure(&p, &mut rng);
        prop_assert!(again.deterministic && again.negative == m.negative);
    }

    #[test]
    fn product_state_bases(bases in prop::collection::vec(0usize..3, 1..8)) {
        let bs: Vec<Basis> = bases.iter().map(|&b| [Basis::X, Basis::Y, Basis::Z][b]).collect();
        let st = rotcode::protocols::StabilizerState::product(&bs);
        let n = bs.len();
        for (q, b) in bs.iter().enumerate() {
            let (x, z) = b.bits();
            let mut v = BitVec::zeros(2 * n);
            v.set(q, x);
            v.set(n + q, z);
            prop_assert_eq!(st.expectation(&PauliOp::hermitian(v, false)), Some(false));
        }
    }
}

#[test]
fn hadamard_systole() {
    for t in 0..=3u32 {
        assert_eq!(l1_systole(&hadamard_lattice(t), None).map(|(s, _)| s), Some(1 << t));
    }
}
