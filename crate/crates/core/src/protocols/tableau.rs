//! Stabilizer states with destabilizers and Z4 phases.

use crate::gf2::{symplectic_product, BitVec};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// `i^phase X^x Z^z` on `n` qubits, with `v = (x | z)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliOp {
    pub v: BitVec,
    pub phase: u8,
}

fn xz_overlap(v: &BitVec) -> usize {
    let n = v.len() / 2;
    v.slice(0, n).and(&v.slice(n, n)).weight()
}

impl PauliOp {
    /// The Hermitian operator `(+/-) i^{|x & z|} X^x Z^z`, i.e. a tensor product of `I, X, Y, Z`.
    #[must_use]
    pub fn hermitian(v: BitVec, negative: bool) -> Self {
        let phase = ((xz_overlap(&v) + if negative { 2 } else { 0 }) % 4) as u8;
        Self { v, phase }
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        Self { v: BitVec::zeros(2 * n), phase: 0 }
    }

    #[must_use]
    pub fn num_qubits(&self) -> usize {
        self.v.len() / 2
    }

    /// `Some(true)` for `-P`, `Some(false)` for `+P`, `None` if not Hermitian.
    #[must_use]
    pub fn sign(&self) -> Option<bool> {
        let d = (4 + self.phase as usize - xz_overlap(&self.v) % 4) % 4;
        match d {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }

    /// Operator product `self * other`.
    #[must_use]
    pub fn mul(&self, other: &PauliOp) -> PauliOp {
        let n = self.num_qubits();
        // Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
        let swap = self.v.slice(n, n).dot(&other.v.slice(0, n));
        let phase = (self.phase + other.phase + if swap { 2 } else { 0 }) % 4;
        PauliOp { v: self.v.xor(&other.v), phase }
    }

    #[must_use]
    pub fn commutes(&self, other: &PauliOp) -> bool {
        !symplectic_product(&self.v, &other.v)
    }

    fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }
}

/// Outcome of a Pauli measurement: `negative` means eigenvalue `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub negative: bool,
    pub deterministic: bool,
}

/// Pure stabilizer state: `stabilizers[i]` and `destabilizers[i]` anticommute, all other
/// pairs commute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerState {
    pub n: usize,
    pub stabilizers: Vec<PauliOp>,
    pub destabilizers: Vec<PauliOp>,
}

fn single(n: usize, q: usize, x: bool, z: bool) -> BitVec {
    let mut v = BitVec::zeros(2 * n);
    v.set(q, x);
    v.set(n + q, z);
    v
}

/// Single-qubit basis states `|0>`, `|+>` and `|+i>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    /// `(x, z)` bits of the Pauli measured in this basis.
    #[must_use]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Basis::X => (true, false),
            Basis::Y => (true, true),
            Basis::Z => (false, true),
        }
    }
}

impl StabilizerState {
    /// `|0...0>`.
    #[must_use]
    pub fn zero(n: usize) -> Self {
        Self::product(&vec![Basis::Z; n])
    }

    /// `|+...+>`.
    #[must_use]
    pub fn plus(n: usize) -> Self {
        Self::product(&vec![Basis::X; n])
    }

    /// Product of `+1` eigenstates of the given single-qubit Paulis.
    #[must_use]
    pub fn product(bases: &[Basis]) -> Self {
        let n = bases.len();
        let mut stabilizers = Vec::with_capacity(n);
        let mut destabilizers = Vec::with_capacity(n);
        for (q, b) in bases.iter().enumerate() {
            let (x, z) = b.bits();
            stabilizers.push(PauliOp::hermitian(single(n, q, x, z), false));
            // Z anticommutes with X and Y; X anticommutes with Z.
            let d = if *b == Basis::Z { single(n, q, true, false) } else { single(n, q, false, true) };
            destabilizers.push(PauliOp::hermitian(d, false));
        }
        Self { n, stabilizers, destabilizers }
    }

    /// Place `inner` on the qubits `positions` of this state, which must currently be a
    /// product state on those positions with the destabilizer structure of `product`.
    ///
    /// Rows `positions[i]` are replaced by the embedded rows of `inner`.
    #[must_use]
    pub fn embed(mut self, positions: &[usize], inner: &StabilizerState) -> Self {
        assert_eq!(positions.len(), inner.n);
        let lift = |p: &PauliOp| -> PauliOp {
            let mut v = BitVec::zeros(2 * self.n);
            for (i, &q) in positions.iter().enumerate() {
                v.set(q, p.v.get(i));
                v.set(self.n + q, p.v.get(inner.n + i));
            }
            PauliOp { v, phase: p.phase }
        };
        let stab: Vec<PauliOp> = inner.stabilizers.iter().map(lift).collect();
        let dest: Vec<PauliOp> = inner.destabilizers.iter().map(lift).collect();
        for (i, &q) in positions.iter().enumerate() {
            self.stabilizers[q] = stab[i].clone();
            self.destabilizers[q] = dest[i].clone();
        }
        self
    }

    /// Measure a Hermitian Pauli, drawing random outcomes from `rng`.
    pub fn measure<R: Rng>(&mut self, p: &PauliOp, rng: &mut R) -> Measurement {
        self.measure_with(p, || rng.gen::<bool>())
    }

    /// Measure a Hermitian Pauli, reporting `negative` whenever the outcome is random.
    pub fn measure_forced(&mut self, p: &PauliOp, negative: bool) -> Measurement {
        self.measure_with(p, || negative)
    }

    fn measure_with(&mut self, p: &PauliOp, choose: impl FnOnce() -> bool) -> Measurement {
        assert_eq!(p.num_qubits(), self.n, "operator length");
        let negative_p = p.sign().expect("measured operator must be Hermitian");
        let anti: Vec<usize> = (0..self.n).filter(|&i| !self.stabilizers[i].commutes(p)).collect();
        if let Some(&first) = anti.first() {
            let pivot = self.stabilizers[first].clone();
            for &i in &anti[1..] {
                self.stabilizers[i] = self.stabilizers[i].mul(&pivot);
            }
            for i in 0..self.n {
                if i != first && !self.destabilizers[i].commutes(p) {
                    self.destabilizers[i] = self.destabilizers[i].mul(&pivot);
                }
            }
            let negative = choose();
            self.destabilizers[first] = pivot;
            let mut q = PauliOp::hermitian(p.v.clone(), negative_p);
            if negative {
                q.negate();
            }
            self.stabilizers[first] = q;
            return Measurement { negative, deterministic: false };
        }
        let negative = self.expectation(p).expect("commuting operator has a definite value");
        Measurement { negative, deterministic: true }
    }

    /// `Some(negative)` if `p` or `-p` stabilizes the state, `None` if the outcome is random.
    #[must_use]
    pub fn expectation(&self, p: &PauliOp) -> Option<bool> {
        if self.stabilizers.iter().any(|s| !s.commutes(p)) {
            return None;
        }
        let mut acc = PauliOp::identity(self.n);
        for i in 0..self.n {
            if !self.destabilizers[i].commutes(p) {
                acc = acc.mul(&self.stabilizers[i]);
            }
        }
        debug_assert_eq!(acc.v, p.v);
        let rel = (4 + acc.phase - p.phase) % 4;
        Some(rel == 2)
    }

    /// Conjugate by a Pauli: flips the sign of every anticommuting row.
    pub fn apply_pauli(&mut self, v: &BitVec) {
        let p = PauliOp { v: v.clone(), phase: 0 };
        for s in self.stabilizers.iter_mut().chain(self.destabilizers.iter_mut()) {
            if !s.commutes(&p) {
                s.negate();
            }
        }
    }

    /// Check the commutation structure of the tableau.
    #[must_use]
    pub fn is_valid(&self) -> bool {
        (0..self.n).all(|i| {
            self.stabilizers[i].sign().is_some()
                && (0..self.n).all(|j| {
                    self.stabilizers[i].commutes(&self.stabilizers[j])
                        && (self.stabilizers[i].commutes(&self.destabilizers[j]) == (i != j))
                })
        })
    }

    /// Expectation of each operator, as in [`Self::expectation`].
    #[must_use]
    pub fn signs_of(&self, ops: &[PauliOp]) -> Vec<Option<bool>> {
        ops.iter().map(|p| self.expectation(p)).collect()
    }
}

/// Random stabilizer state on `n` qubits: random Pauli measurements on `|0...0>` with random
/// outcomes.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StabilizerState {
    let mut s = StabilizerState::zero(n);
    for _ in 0..4 * n + 4 {
        let mut v = BitVec::zeros(2 * n);
        for i in 0..2 * n {
            v.set(i, rng.gen::<bool>());
        }
        if v.is_zero() {
            continue;
        }
        let p = PauliOp::hermitian(v, false);
        s.measure(&p, rng);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::parse_pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op(s: &str, negative: bool) -> PauliOp {
        PauliOp::hermitian(parse_pauli(s, s.len()).unwrap(), negative)
    }

    #[test]
    fn plus_state_x_is_deterministic() {
        let mut s = StabilizerState::plus(3);
        let m = s.measure_forced(&op("XII", false), false);
        assert_eq!(m, Measurement { negative: false, deterministic: true });
    }

    #[test]
    fn repeated_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut s = StabilizerState::plus(2);
            let a = s.measure(&op("ZI", false), &mut rng);
            let b = s.measure(&op("ZI", false), &mut rng);
            assert!(!a.deterministic && b.deterministic);
            assert_eq!(a.negative, b.negative);
            assert!(s.is_valid());
        }
    }

    #[test]
    fn bell_pair_signs() {
        let mut s = StabilizerState::zero(2);
        s.measure_forced(&op("XX", false), false);
        assert_eq!(s.expectation(&op("ZZ", false)), Some(false));
        assert_eq!(s.expectation(&op("XX", false)), Some(false));
        assert_eq!(s.expectation(&op("YY", false)), Some(true));
        assert_eq!(s.expectation(&op("ZI", false)), None);
        s.apply_pauli(&parse_pauli("XI", 2).unwrap());
        assert_eq!(s.expectation(&op("ZZ", false)), Some(true));
    }

    #[test]
    fn y_eigenstate() {
        let s = StabilizerState::product(&[Basis::Y]);
        assert_eq!(s.expectation(&op("Y", false)), Some(false));
        assert!(s.is_valid());
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..6 {
            assert!(random_state(n, &mut rng).is_valid());
        }
    }
}
