//! Plaquette syndrome extraction with one ancilla per Z check.

use crate::code::{PauliType, StabilizerCode};
use crate::complex::TorusComplex;
use crate::distance::{class_bits, search, FaultTable, SearchLimits};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Qubits `0..n_data` are data, `n_data + p` is the ancilla of plaquette `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    PreparePlus(usize),
    Cz { data: usize, ancilla: usize },
    MeasureX(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Circuit {
    pub n_data: usize,
    pub n_ancilla: usize,
    pub ops: Vec<Op>,
    /// `(sign, direction)` of each CZ round, directions from 0.
    pub rounds: Vec<(i8, usize)>,
    /// Index in `ops` where each round starts, plus the index after the last round.
    pub round_starts: Vec<usize>,
}

/// `(+1, -1, +2, -2, ...)`.
#[must_use]
pub fn starfish_order(dim: usize) -> Vec<(i8, usize)> {
    (0..dim).flat_map(|d| [(1, d), (-1, d)]).collect()
}

/// `(+1, +2, -1, -2, +3, -3)`: plaquettes in the 12 plane pick up L-shaped hooks.
#[must_use]
pub fn adversarial_order() -> Vec<(i8, usize)> {
    vec![(1, 0), (1, 1), (-1, 0), (-1, 1), (1, 2), (-1, 2)]
}

/// CZ rounds between plaquette ancillas and data edges; round `(s, d)` couples each plaquette
/// containing direction `d` to its edge displaced by `-s e_d / 2` from the plaquette centre.
pub fn starfish_circuit(tc: &TorusComplex, order: &[(i8, usize)]) -> Result<Circuit> {
    let n_data = tc.complex.num_cells(1);
    let n_ancilla = tc.complex.num_cells(2);
    let mut ops: Vec<Op> = (0..n_ancilla).map(|p| Op::PreparePlus(n_data + p)).collect();
    let mut round_starts = Vec::new();
    for &(sign, dir) in order {
        if dir >= tc.dim() || sign.abs() != 1 {
            return Err(Error::Invalid(format!("bad round ({sign}, {dir})")));
        }
        round_starts.push(ops.len());
        for p in 0..n_ancilla {
            let (_, s) = tc.cell(2, p);
            if !s.contains(&dir) {
                continue;
            }
            let mut y = tc.doubled_coords(2, p);
            y[dir] -= i64::from(sign);
            let (k, e) = tc.cell_at_doubled(&y);
            debug_assert_eq!(k, 1);
            ops.push(Op::Cz { data: e, ancilla: n_data + p });
        }
    }
    round_starts.push(ops.len());
    ops.extend((0..n_ancilla).map(|p| Op::MeasureX(n_data + p)));
    Ok(Circuit { n_data, n_ancilla, ops, rounds: order.to_vec(), round_starts })
}

/// Effect of a fault: Z error left on the data and flipped ancilla outcomes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Effect {
    data_z: BitVec,
    flips: BitVec,
}

impl Circuit {
    fn total(&self) -> usize {
        self.n_data + self.n_ancilla
    }

    /// Propagate Pauli `(x | z)` on all qubits inserted just before `ops[start]`.
    fn propagate(&self, start: usize, mut x: BitVec, mut z: BitVec) -> Effect {
        let mut flips = BitVec::zeros(self.n_ancilla);
        for op in &self.ops[start..] {
            match *op {
                Op::PreparePlus(a) => {
                    x.set(a, false);
                    z.set(a, false);
                }
                Op::Cz { data, ancilla } => {
                    if x.get(ancilla) {
                        z.flip(data);
                    }
                    if x.get(data) {
                        z.flip(ancilla);
                    }
                }
                Op::MeasureX(a) => {
                    if z.get(a) {
                        flips.flip(a - self.n_data);
                    }
                }
            }
        }
        Effect { data_z: z.slice(0, self.n_data), flips }
    }

    /// Positions in `ops` of the CZs acting on `ancilla`, in order.
    fn cz_positions(&self, ancilla: usize) -> Vec<usize> {
        self.ops.iter().enumerate().filter(|(_, op)| matches!(op, Op::Cz { ancilla: a, .. } if *a == ancilla)).map(|(i, _)| i).collect()
    }

    /// Fault locations: data Z, ancilla X after preparation and after each CZ, and ancilla Z
    /// just before measurement.
    fn fault_effects(&self) -> Vec<Effect> {
        let t = self.total();
        let first_cz = self.n_ancilla;
        let mut out = Vec::new();
        for q in 0..self.n_data {
            out.push(self.propagate(first_cz, BitVec::zeros(t), BitVec::unit(t, q)));
        }
        for p in 0..self.n_ancilla {
            let a = self.n_data + p;
            let mut locations = vec![first_cz];
            locations.extend(self.cz_positions(a).into_iter().map(|i| i + 1));
            for loc in locations {
                out.push(self.propagate(loc, BitVec::unit(t, a), BitVec::zeros(t)));
            }
            let measure = self.ops.len() - self.n_ancilla;
            out.push(self.propagate(measure, BitVec::zeros(t), BitVec::unit(t, a)));
        }
        out
    }
}

/// One row of the single-ancilla-fault table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookRow {
    /// Number of CZs on the ancilla before the X fault.
    pub after: usize,
    pub data_support: Vec<usize>,
    pub weight: usize,
    /// Weight up to multiplication by the plaquette itself.
    pub reduced_weight: usize,
    pub vertex_violations: usize,
    pub flips_outcome: bool,
}

/// Data errors from an X fault on the ancilla of plaquette `p` after each number of its CZs.
pub fn hook_propagation(circuit: &Circuit, code: &StabilizerCode, p: usize) -> Result<Vec<HookRow>> {
    if p >= circuit.n_ancilla {
        return Err(Error::Invalid("plaquette out of range".into()));
    }
    let hx = code.checks_of(PauliType::X);
    let a = circuit.n_data + p;
    let t = circuit.total();
    let mut locations = vec![circuit.n_ancilla];
    locations.extend(circuit.cz_positions(a).into_iter().map(|i| i + 1));
    Ok(locations
        .into_iter()
        .enumerate()
        .map(|(after, loc)| {
            let e = circuit.propagate(loc, BitVec::unit(t, a), BitVec::zeros(t));
            let weight = e.data_z.weight();
            let plaq = code.checks_of(PauliType::Z).row(p).weight();
            HookRow {
                after,
                data_support: e.data_z.iter_ones().collect(),
                weight,
                reduced_weight: weight.min(plaq - weight),
                vertex_violations: hx.mul_vec(&e.data_z).weight(),
                flips_outcome: e.flips.get(p),
            }
        })
        .collect())
}

/// Fewest circuit faults giving an undetected logical Z error, `None` if above `w_max`.
///
/// Detectors: the final vertex X checks on the data and the relations among plaquette outcomes.
pub fn circuit_distance(circuit: &Circuit, code: &StabilizerCode, w_max: usize, limits: SearchLimits) -> Result<Option<usize>> {
    if code.n != circuit.n_data {
        return Err(Error::Dimension("circuit and code disagree on data qubits".into()));
    }
    let hx = code.checks_of(PauliType::X);
    let hz = code.checks_of(PauliType::Z);
    if hz.num_rows() != circuit.n_ancilla {
        return Err(Error::Dimension("one ancilla per Z check expected".into()));
    }
    let relations: BitMatrix = hz.transpose().kernel();
    let reps = code.logical_basis().x_supports();
    let mut seen = HashSet::new();
    let mut columns = Vec::new();
    let mut classes = Vec::new();
    for e in circuit.fault_effects() {
        let syn = hx.mul_vec(&e.data_z).concat(&relations.mul_vec(&e.flips));
        let class = class_bits(&e.data_z, &reps);
        if syn.is_zero() && class == 0 {
            continue;
        }
        if seen.insert((syn.clone(), class)) {
            columns.push(syn);
            classes.push(class);
        }
    }
    if w_max == 0 || columns.is_empty() {
        return Ok(None);
    }
    let starts: Vec<usize> = (0..columns.len()).collect();
    let table = FaultTable::new(columns, classes);
    Ok(search(&table, w_max, &starts, limits)?.weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{css_from_complex, torus_complex};
    use crate::lattice::LatticeBasis;

    #[test]
    fn every_ancilla_in_four_rounds() {
        let tc = torus_complex(&LatticeBasis::diagonal(&[3, 3, 3]));
        let c = starfish_circuit(&tc, &starfish_order(3)).unwrap();
        for p in 0..c.n_ancilla {
            assert_eq!(c.cz_positions(c.n_data + p).len(), 4);
        }
        assert_eq!(c.rounds.len(), 6);
    }

    #[test]
    fn hook_weights() {
        let tc = torus_complex(&LatticeBasis::diagonal(&[3, 3, 3]));
        let code = css_from_complex(&tc.complex, 1).unwrap();
        let c = starfish_circuit(&tc, &starfish_order(3)).unwrap();
        let rows = hook_propagation(&c, &code, 0).unwrap();
        let w: Vec<usize> = rows.iter().map(|r| r.weight).collect();
        assert_eq!(w, vec![4, 3, 2, 1, 0]);
        assert_eq!(rows[2].vertex_violations, 4);
        assert_eq!(rows[1].reduced_weight, 1);
    }
}
