//! Lattice surgery between two toric-code blocks and the boundary distance of the interface.

use crate::code::{PauliType, StabilizerCode};
use crate::complex::{css_from_complex, torus_complex, ChainComplex};
use crate::distance::{min_weight_logical, SearchLimits};
use crate::error::{Error, Result};
use crate::gf2::{symplectic_gram, BitMatrix, BitVec};
use crate::lattice::{cut_lattice, hnf, hyperplane_systole, merge_for_surgery, LatticeBasis};
use serde::{Deserialize, Serialize};

/// CSS code on the q-cells of `c`, allowing `q = 0` and `q = top` (no X or no Z checks).
pub fn css_at_degree(c: &ChainComplex, q: usize) -> Result<StabilizerCode> {
    if q > c.top() {
        return Err(Error::Invalid(format!("degree {q} above top {}", c.top())));
    }
    if q > 0 && q < c.top() {
        return css_from_complex(c, q);
    }
    let n = c.num_cells(q);
    let hx = if q == 0 { BitMatrix::zeros(0, n) } else { c.boundary(q).transpose() };
    let hz = if q == c.top() { BitMatrix::zeros(0, n) } else { c.boundary(q + 1).clone() };
    StabilizerCode::css(hx, hz)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurgeryReport {
    pub row: usize,
    pub n_block: usize,
    pub k_block: usize,
    pub n_merged: usize,
    pub k_merged: usize,
    /// Products of two-block logicals lying in the merged stabilizer group, as coefficients over
    /// `(X_1, X_2, Z_1, Z_2)` logical rows with `k_block` entries each.
    pub measured_products: Vec<BitVec>,
    /// Each measured product uses the same logical on both blocks.
    pub products_paired: bool,
    /// Dimension of two-block logicals, up to block checks, commuting with the merged checks,
    /// modulo merged stabilizers.
    pub surviving: usize,
}

/// Merge two copies of the code on `lattice` along HNF row `row`.
///
/// Block 1 occupies the canonical cells of the original torus, block 2 the same cells shifted by
/// the row vector. Measured products are the two-block logicals in the span of the block checks
/// and the merged checks.
pub fn surgery_measure(lattice: &LatticeBasis, q: usize, row: usize) -> Result<SurgeryReport> {
    if row >= lattice.dim {
        return Err(Error::Invalid(format!("row {row} out of range")));
    }
    let tc = torus_complex(lattice);
    let block = css_from_complex(&tc.complex, q)?;
    let merged_h = merge_for_surgery(&tc.hnf, row);
    let mtc = torus_complex(&merged_h.basis());
    let merged = css_from_complex(&mtc.complex, q)?;
    let n = block.n;
    if merged.n != 2 * n {
        return Err(Error::Mismatch("merged torus does not hold two blocks".into()));
    }
    let v = &tc.hnf.matrix[row];
    let mut phi = vec![vec![0usize; n]; 2];
    let mut seen = BitVec::zeros(2 * n);
    for (b, map) in phi.iter_mut().enumerate() {
        for (c, slot) in map.iter_mut().enumerate() {
            let (p, s) = tc.cell(q, c);
            let x: Vec<i64> = p.iter().zip(v).map(|(a, d)| a + b as i64 * d).collect();
            let m = mtc.cell_index(&x, &s);
            if seen.get(m) {
                return Err(Error::Mismatch("block embedding is not injective".into()));
            }
            seen.set(m, true);
            *slot = m;
        }
    }
    let embed = |b: usize, pauli: &BitVec| -> BitVec {
        let mut out = BitVec::zeros(4 * n);
        for i in pauli.iter_ones() {
            if i < n {
                out.set(phi[b][i], true);
            } else {
                out.set(2 * n + phi[b][i - n], true);
            }
        }
        out
    };
    let l = block.logical_basis();
    let k = l.k;
    let mut lrows = Vec::with_capacity(4 * k);
    for kind in 0..2 {
        for b in 0..2 {
            for a in 0..k {
                let r = if kind == 0 { l.x(a) } else { l.z(a) };
                lrows.push(embed(b, r));
            }
        }
    }
    let lmat = BitMatrix::from_rows(4 * n, lrows);
    let mut stack = lmat.clone();
    for b in 0..2 {
        for r in block.checks.rows() {
            stack.push_row(embed(b, r));
        }
    }
    stack = stack.vstack(&merged.checks);
    let kernel = stack.transpose().kernel();
    let projected = BitMatrix::from_rows(4 * k, kernel.rows().iter().map(|c| c.slice(0, 4 * k)).collect()).row_basis();
    let measured_products: Vec<BitVec> = projected.rows().to_vec();
    let products_paired = measured_products.iter().all(|c| {
        (0..2).all(|kind| c.slice(2 * k * kind, k) == c.slice(2 * k * kind + k, k))
    });
    // Two-block logicals, dressed by block checks, that commute with the merged checks.
    let dressed = stack.select_rows(&(0..stack.num_rows() - merged.checks.num_rows()).collect::<Vec<_>>());
    let comm = symplectic_gram(&dressed, &merged.checks).transpose().kernel();
    let mut span = merged.checks.clone();
    for c in comm.rows() {
        let mut w = BitVec::zeros(4 * n);
        for i in c.iter_ones() {
            w.xor_assign(dressed.row(i));
        }
        span.push_row(w);
    }
    let surviving = span.rank() - merged.checks.rank();
    Ok(SurgeryReport {
        row,
        n_block: n,
        k_block: k,
        n_merged: merged.n,
        k_merged: merged.num_logical(),
        measured_products,
        products_paired,
        surviving,
    })
}

/// Fewest faulty check outcomes on the surgery interface giving an undetected logical error:
/// twice the minimum weight of a nontrivial cycle (Z) or cocycle (X) on the cut hyperplane.
///
/// The cut hyperplane `x_row = 0` is taken in the merged lattice.
pub fn boundary_distance(lattice: &LatticeBasis, q: usize, row: usize, kind: PauliType, w_max: usize, limits: SearchLimits) -> Result<Option<usize>> {
    if lattice.dim < 2 || row >= lattice.dim || q == 0 || q >= lattice.dim {
        return Err(Error::Invalid("need dim >= 2, a valid row and 0 < q < dim".into()));
    }
    let merged = merge_for_surgery(&hnf(lattice), row).basis();
    let cut = torus_complex(&cut_lattice(&merged, row));
    let (degree, search_kind) = match kind {
        PauliType::Z => (q - 1, PauliType::Z),
        PauliType::X => (q, PauliType::X),
    };
    let code = css_at_degree(&cut.complex, degree)?;
    if code.num_logical() == 0 {
        return Err(Error::Mismatch("cut hyperplane has no homology in this degree".into()));
    }
    let orbit = Some(cut.det());
    let r = min_weight_logical(&code, search_kind, w_max, orbit, None, limits)?;
    Ok(r.weight.map(|w| 2 * w))
}

/// `2 * hyperplane_systole` of the merged lattice along `row`.
#[must_use]
pub fn boundary_distance_from_systole(lattice: &LatticeBasis, row: usize) -> Option<i64> {
    let merged = merge_for_surgery(&hnf(lattice), row).basis();
    hyperplane_systole(&merged, row).map(|(s, _)| 2 * s)
}
