//! State injection: partitions of the qubits into prepared sets and the injection site.

use crate::code::{PauliType, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{symplectic_gram, symplectic_product, BitMatrix, BitVec};
use crate::protocols::tableau::{Basis, PauliOp, StabilizerState};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// `s_x` prepared in `|+>`, `s_y` in `|+i>`, `s_z` in `|0>`; `u` carries the injected state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionSets {
    pub n: usize,
    pub s_x: Vec<usize>,
    pub s_y: Vec<usize>,
    pub s_z: Vec<usize>,
    pub u: Vec<usize>,
    /// Built with X- and Z-type conditions rather than standard ones.
    pub css: bool,
}

impl InjectionSets {
    /// Preparation basis of every qubit, `None` on `u`.
    #[must_use]
    pub fn bases(&self) -> Vec<Option<Basis>> {
        let mut b = vec![None; self.n];
        for (set, basis) in [(&self.s_x, Basis::X), (&self.s_y, Basis::Y), (&self.s_z, Basis::Z)] {
            for &q in set {
                b[q] = Some(basis);
            }
        }
        b
    }

    fn prepared(&self) -> Vec<(usize, Basis)> {
        self.bases().into_iter().enumerate().filter_map(|(q, b)| b.map(|b| (q, b))).collect()
    }
}

fn single(n: usize, q: usize, b: Basis) -> BitVec {
    let (x, z) = b.bits();
    let mut v = BitVec::zeros(2 * n);
    v.set(q, x);
    v.set(n + q, z);
    v
}

/// True iff no nontrivial logical lies in the span of the given single-qubit Paulis.
fn no_logical_in(code: &StabilizerCode, ops: &[(usize, Basis)]) -> bool {
    if ops.is_empty() {
        return true;
    }
    let v = BitMatrix::from_rows(2 * code.n, ops.iter().map(|&(q, b)| single(code.n, q, b)).collect());
    let s = ops.len();
    let commuting = s - symplectic_gram(&v, &code.checks).rank();
    let in_stabilizers = s + code.checks.rank() - v.vstack(&code.checks).rank();
    commuting == in_stabilizers
}

/// True iff no nontrivial logical of type `kind` is supported on `subset`.
#[must_use]
pub fn cleaning_test(code: &StabilizerCode, subset: &[usize], kind: PauliType) -> bool {
    let b = match kind {
        PauliType::X => Basis::X,
        PauliType::Z => Basis::Z,
    };
    no_logical_in(code, &subset.iter().map(|&q| (q, b)).collect::<Vec<_>>())
}

/// True iff no nontrivial standard logical (factor in `{I, W_q}` on each prepared qubit) is
/// supported on the prepared sets.
#[must_use]
pub fn standard_cleaning_test(code: &StabilizerCode, sets: &InjectionSets) -> bool {
    no_logical_in(code, &sets.prepared())
}

/// Greedy partition for a CSS code, visiting qubits in `order` and trying `S_Z` before `S_X`.
pub fn css_injection_sets_ordered(code: &StabilizerCode, order: &[usize]) -> Result<InjectionSets> {
    if code.css.is_none() {
        return Err(Error::Invalid("CSS construction needs a CSS code".into()));
    }
    let k = code.num_logical();
    let mut s_x = Vec::new();
    let mut s_z = Vec::new();
    let mut moved = vec![false; code.n];
    let mut remaining = code.n;
    for &q in order {
        if remaining == k {
            break;
        }
        s_z.push(q);
        if cleaning_test(code, &s_z, PauliType::Z) {
            moved[q] = true;
            remaining -= 1;
            continue;
        }
        s_z.pop();
        s_x.push(q);
        if cleaning_test(code, &s_x, PauliType::X) {
            moved[q] = true;
            remaining -= 1;
            continue;
        }
        s_x.pop();
    }
    s_x.sort_unstable();
    s_z.sort_unstable();
    let u = (0..code.n).filter(|&q| !moved[q]).collect();
    let sets = InjectionSets { n: code.n, s_x, s_y: Vec::new(), s_z, u, css: true };
    validate_sets(code, &sets)?;
    Ok(sets)
}

/// Greedy partition for a CSS code in ascending qubit order.
pub fn css_injection_sets(code: &StabilizerCode) -> Result<InjectionSets> {
    css_injection_sets_ordered(code, &(0..code.n).collect::<Vec<_>>())
}

/// Greedy partition for any stabilizer code, visiting qubits in `order` and trying `S_Z`,
/// `S_X`, `S_Y` in turn.
pub fn noncss_injection_sets_ordered(code: &StabilizerCode, order: &[usize]) -> Result<InjectionSets> {
    let k = code.num_logical();
    let mut prepared: Vec<(usize, Basis)> = Vec::new();
    for &q in order {
        if code.n - prepared.len() == k {
            break;
        }
        for b in [Basis::Z, Basis::X, Basis::Y] {
            prepared.push((q, b));
            if no_logical_in(code, &prepared) {
                break;
            }
            prepared.pop();
        }
    }
    let mut sets = InjectionSets { n: code.n, s_x: Vec::new(), s_y: Vec::new(), s_z: Vec::new(), u: Vec::new(), css: false };
    let mut moved = vec![false; code.n];
    for &(q, b) in &prepared {
        moved[q] = true;
        match b {
            Basis::X => sets.s_x.push(q),
            Basis::Y => sets.s_y.push(q),
            Basis::Z => sets.s_z.push(q),
        }
    }
    sets.s_x.sort_unstable();
    sets.s_y.sort_unstable();
    sets.s_z.sort_unstable();
    sets.u = (0..code.n).filter(|&q| !moved[q]).collect();
    validate_sets(code, &sets)?;
    Ok(sets)
}

pub fn noncss_injection_sets(code: &StabilizerCode) -> Result<InjectionSets> {
    noncss_injection_sets_ordered(code, &(0..code.n).collect::<Vec<_>>())
}

/// Check the partition, the size of `u` and the cleaning conditions.
pub fn validate_sets(code: &StabilizerCode, sets: &InjectionSets) -> Result<()> {
    let mut seen = vec![false; code.n];
    for &q in sets.s_x.iter().chain(&sets.s_y).chain(&sets.s_z).chain(&sets.u) {
        if q >= code.n || seen[q] {
            return Err(Error::Invalid("sets do not partition the qubits".into()));
        }
        seen[q] = true;
    }
    if seen.iter().any(|s| !s) || sets.n != code.n {
        return Err(Error::Invalid("sets do not cover the qubits".into()));
    }
    if sets.u.len() != code.num_logical() {
        return Err(Error::Mismatch(format!("|U| = {} but k = {}", sets.u.len(), code.num_logical())));
    }
    let ok = if sets.css {
        sets.s_y.is_empty() && cleaning_test(code, &sets.s_x, PauliType::X) && cleaning_test(code, &sets.s_z, PauliType::Z)
    } else {
        standard_cleaning_test(code, sets)
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Mismatch("a nontrivial logical is supported on the prepared qubits".into()))
    }
}

/// Logical pair for the injection site `qubit`, as `(x | z)` rows of length `2n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedLogicalPair {
    pub qubit: usize,
    pub x_logical: BitVec,
    pub z_logical: BitVec,
}

/// Complete `X_q` (or `Z_q`) with a combination of the given single-qubit Paulis to commute with
/// every check.
fn complete(code: &StabilizerCode, seed: &BitVec, ops: &[(usize, Basis)]) -> Option<BitVec> {
    let form = code.form();
    let target = code.checks.mul_vec(&form.apply(seed));
    let mut out = seed.clone();
    if ops.is_empty() {
        return target.is_zero().then_some(out);
    }
    let v = BitMatrix::from_rows(2 * code.n, ops.iter().map(|&(q, b)| single(code.n, q, b)).collect());
    let c = symplectic_gram(&v, &code.checks).solve_left(&target)?;
    for i in c.iter_ones() {
        out.xor_assign(v.row(i));
    }
    Some(out)
}

/// One pair per qubit of `u`, restricting to `X_q` and `Z_q` on `u`.
pub fn injected_logical_pairs(code: &StabilizerCode, sets: &InjectionSets) -> Result<Vec<InjectedLogicalPair>> {
    validate_sets(code, sets)?;
    let n = code.n;
    let (x_ops, z_ops): (Vec<(usize, Basis)>, Vec<(usize, Basis)>) = if sets.css {
        (sets.s_x.iter().map(|&q| (q, Basis::X)).collect(), sets.s_z.iter().map(|&q| (q, Basis::Z)).collect())
    } else {
        (sets.prepared(), sets.prepared())
    };
    let mut pairs = Vec::with_capacity(sets.u.len());
    for &q in &sets.u {
        let x = complete(code, &single(n, q, Basis::X), &x_ops).ok_or_else(|| Error::Mismatch(format!("no X logical for qubit {q}")))?;
        let z = complete(code, &single(n, q, Basis::Z), &z_ops).ok_or_else(|| Error::Mismatch(format!("no Z logical for qubit {q}")))?;
        pairs.push(InjectedLogicalPair { qubit: q, x_logical: x, z_logical: z });
    }
    for (i, a) in pairs.iter().enumerate() {
        for (j, b) in pairs.iter().enumerate() {
            let ok = symplectic_product(&a.x_logical, &b.z_logical) == (i == j)
                && !symplectic_product(&a.x_logical, &b.x_logical)
                && !symplectic_product(&a.z_logical, &b.z_logical);
            if !ok {
                return Err(Error::Mismatch("injected logicals are not a symplectic basis".into()));
            }
        }
    }
    Ok(pairs)
}

/// Measurement basis of each prepared qubit for unencoding; `None` on `u`.
#[must_use]
pub fn unencoding_bases(sets: &InjectionSets) -> Vec<Option<Basis>> {
    sets.bases()
}

/// Image of a Pauli on the `k` injection qubits under `X_i -> X~_{u_i}`, `Z_i -> Z~_{u_i}`.
#[must_use]
pub fn logical_image(pairs: &[InjectedLogicalPair], p: &PauliOp) -> PauliOp {
    let k = pairs.len();
    let n = pairs.first().map_or(0, |pr| pr.x_logical.len() / 2);
    let mut acc = PauliOp { v: BitVec::zeros(2 * n), phase: p.phase };
    for (i, pr) in pairs.iter().enumerate() {
        if p.v.get(i) {
            acc = acc.mul(&PauliOp::hermitian(pr.x_logical.clone(), false));
        }
    }
    for (i, pr) in pairs.iter().enumerate() {
        if p.v.get(k + i) {
            acc = acc.mul(&PauliOp::hermitian(pr.z_logical.clone(), false));
        }
    }
    acc
}

/// Prepare the prepared sets, place `psi` on `u` and measure every check.
pub fn encode<R: Rng>(code: &StabilizerCode, sets: &InjectionSets, psi: &StabilizerState, rng: &mut R) -> StabilizerState {
    let bases: Vec<Basis> = sets.bases().into_iter().map(|b| b.unwrap_or(Basis::Z)).collect();
    let mut state = StabilizerState::product(&bases).embed(&sets.u, psi);
    for r in code.checks.rows() {
        state.measure(&PauliOp::hermitian(r.clone(), false), rng);
    }
    state
}

/// Measure the prepared sets in their bases and undo the resulting Pauli frame on `u`.
///
/// Returns the frame as an `(x | z)` vector on all qubits.
pub fn unencode<R: Rng>(state: &mut StabilizerState, sets: &InjectionSets, pairs: &[InjectedLogicalPair], rng: &mut R) -> BitVec {
    let n = state.n;
    let mut negative = vec![false; n];
    for (q, b) in sets.prepared() {
        negative[q] = state.measure(&PauliOp::hermitian(single(n, q, b), false), rng).negative;
    }
    // Outcomes on `u` stay false, so only prepared factors contribute.
    let parity = |v: &BitVec| (0..n).filter(|&q| negative[q] && (v.get(q) || v.get(n + q))).count() % 2 == 1;
    let mut frame = BitVec::zeros(2 * n);
    for pr in pairs {
        if parity(&pr.x_logical) {
            frame.flip(n + pr.qubit);
        }
        if parity(&pr.z_logical) {
            frame.flip(pr.qubit);
        }
    }
    state.apply_pauli(&frame);
    frame
}

/// Outcome of repeated encode/unencode runs on random states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub trials: usize,
    /// Encoded state carries every stabilizer of the input under the logical map.
    pub encoded_exact: usize,
    /// After unencoding and frame correction, `u` holds the input state.
    pub decoded_exact: usize,
}

/// Encode random stabilizer states on `u`, check the logical state, unencode and compare.
pub fn round_trip<R: Rng>(code: &StabilizerCode, sets: &InjectionSets, trials: usize, rng: &mut R) -> Result<RoundTrip> {
    let pairs = injected_logical_pairs(code, sets)?;
    let k = sets.u.len();
    let mut out = RoundTrip { trials, encoded_exact: 0, decoded_exact: 0 };
    for _ in 0..trials {
        let psi = crate::protocols::tableau::random_state(k, rng);
        let mut st = encode(code, sets, &psi, rng);
        if psi.stabilizers.iter().all(|g| st.expectation(&logical_image(&pairs, g)) == Some(false)) {
            out.encoded_exact += 1;
        }
        unencode(&mut st, sets, &pairs, rng);
        let back = StabilizerState::zero(code.n).embed(&sets.u, &psi);
        if sets.u.iter().all(|&q| st.expectation(&back.stabilizers[q]) == Some(false)) {
            out.decoded_exact += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{css_from_complex, torus_complex};
    use crate::lattice::LatticeBasis;
    use crate::protocols::tableau::random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toric(d: &[i64]) -> StabilizerCode {
        css_from_complex(&torus_complex(&LatticeBasis::diagonal(d)).complex, 1).unwrap()
    }

    #[test]
    fn trivial_cleaning() {
        let c = toric(&[3, 3]);
        assert!(cleaning_test(&c, &[], PauliType::X));
        let all: Vec<usize> = (0..c.n).collect();
        assert!(!cleaning_test(&c, &all, PauliType::Z));
        assert!(cleaning_test(&c, &[4], PauliType::X) && cleaning_test(&c, &[4], PauliType::Z));
    }

    #[test]
    fn toric_sets() {
        let c = toric(&[3, 3]);
        let s = css_injection_sets(&c).unwrap();
        assert_eq!(s.u.len(), 2);
        assert_eq!(s.s_x.len() + s.s_z.len(), 16);
        assert!(s.s_x.len().min(s.s_z.len()) >= 2);
        assert_eq!(injected_logical_pairs(&c, &s).unwrap().len(), 2);
    }

    #[test]
    fn five_qubit_round_trip() {
        let c = StabilizerCode::from_pauli_strings(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).unwrap();
        let s = noncss_injection_sets(&c).unwrap();
        assert_eq!(s.u.len(), 1);
        let pairs = injected_logical_pairs(&c, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let psi = random_state(1, &mut rng);
            let mut st = encode(&c, &s, &psi, &mut rng);
            for g in &psi.stabilizers {
                assert_eq!(st.expectation(&logical_image(&pairs, g)), Some(false));
            }
            unencode(&mut st, &s, &pairs, &mut rng);
            let back = StabilizerState::zero(c.n).embed(&s.u, &psi);
            assert_eq!(st.expectation(&back.stabilizers[s.u[0]]), Some(false));
        }
    }

    #[test]
    fn toric_round_trip() {
        let c = toric(&[3, 3]);
        let s = css_injection_sets(&c).unwrap();
        let r = round_trip(&c, &s, 30, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!((r.encoded_exact, r.decoded_exact), (30, 30));
    }

    #[test]
    fn no_checks_keeps_everything() {
        let c = StabilizerCode::css(BitMatrix::zeros(0, 4), BitMatrix::zeros(0, 4)).unwrap();
        let s = css_injection_sets(&c).unwrap();
        assert_eq!(s.u, vec![0, 1, 2, 3]);
    }
}
