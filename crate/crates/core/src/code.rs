//! Stabilizer codes in symplectic form.

use crate::error::{Error, Result};
use crate::gf2::{symplectic_gram, BitMatrix, BitVec, IncrementalBasis, Reducer, SymplecticForm};
use serde::{Deserialize, Serialize};

/// Pauli operators as rows `(x | z)` of length `2n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerCode {
    pub n: usize,
    /// Independent and dependent check rows, `m x 2n`.
    pub checks: BitMatrix,
    pub css: Option<CssParts>,
}

/// X-type checks `hx` and Z-type checks `hz`, each `m x n` supports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CssParts {
    pub hx: BitMatrix,
    pub hz: BitMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliType {
    X,
    Z,
}

impl PauliType {
    #[must_use]
    pub fn other(self) -> Self {
        match self {
            PauliType::X => PauliType::Z,
            PauliType::Z => PauliType::X,
        }
    }
}

/// `2k x 2n` matrix: k logical X rows then k logical Z rows with `L J L^T = J`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalBasis {
    pub k: usize,
    pub matrix: BitMatrix,
}

impl LogicalBasis {
    #[must_use]
    pub fn x(&self, i: usize) -> &BitVec {
        self.matrix.row(i)
    }

    #[must_use]
    pub fn z(&self, i: usize) -> &BitVec {
        self.matrix.row(self.k + i)
    }

    /// Supports of the X-type rows (CSS bases only).
    #[must_use]
    pub fn x_supports(&self) -> Vec<BitVec> {
        let n = self.matrix.num_cols() / 2;
        (0..self.k).map(|i| self.x(i).slice(0, n)).collect()
    }

    /// Supports of the Z-type rows (CSS bases only).
    #[must_use]
    pub fn z_supports(&self) -> Vec<BitVec> {
        let n = self.matrix.num_cols() / 2;
        (0..self.k).map(|i| self.z(i).slice(n, n)).collect()
    }
}

#[must_use]
pub fn x_pauli(support: &BitVec) -> BitVec {
    support.concat(&BitVec::zeros(support.len()))
}

#[must_use]
pub fn z_pauli(support: &BitVec) -> BitVec {
    BitVec::zeros(support.len()).concat(support)
}

impl StabilizerCode {
    /// CSS code from X-check and Z-check supports.
    pub fn css(hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        if hx.num_cols() != hz.num_cols() {
            return Err(Error::Dimension("hx and hz act on different qubit counts".into()));
        }
        let n = hx.num_cols();
        let prod = hx.mul(&hz.transpose());
        for (i, r) in prod.rows().iter().enumerate() {
            if let Some(j) = r.first_one() {
                return Err(Error::NonCommuting(i, hx.num_rows() + j));
            }
        }
        let zeros_x = BitMatrix::zeros(hx.num_rows(), n);
        let zeros_z = BitMatrix::zeros(hz.num_rows(), n);
        let checks = hx.hstack(&zeros_x).vstack(&zeros_z.hstack(&hz));
        Ok(Self { n, checks, css: Some(CssParts { hx, hz }) })
    }

    /// General stabilizer code from `(x | z)` rows.
    pub fn from_checks(checks: BitMatrix) -> Result<Self> {
        if checks.num_cols() % 2 != 0 {
            return Err(Error::Dimension("check rows must have even length".into()));
        }
        let g = symplectic_gram(&checks, &checks);
        for (i, r) in g.rows().iter().enumerate() {
            if let Some(j) = r.first_one() {
                return Err(Error::NonCommuting(i, j));
            }
        }
        Ok(Self { n: checks.num_cols() / 2, checks, css: None })
    }

    /// Checks given as Pauli strings such as `"XZZXI"`.
    pub fn from_pauli_strings(rows: &[&str]) -> Result<Self> {
        let n = rows.first().map_or(0, |r| r.len());
        let mut m = BitMatrix::zeros(0, 2 * n);
        for r in rows {
            m.push_row(parse_pauli(r, n)?);
        }
        Self::from_checks(m)
    }

    /// Exchange the roles of X and Z.
    #[must_use]
    pub fn dual(&self) -> Self {
        match &self.css {
            Some(p) => Self::css(p.hz.clone(), p.hx.clone()).expect("dual of a valid code"),
            None => {
                let form = SymplecticForm::new(self.n);
                Self { n: self.n, checks: form.apply_rows(&self.checks), css: None }
            }
        }
    }

    #[must_use]
    pub fn form(&self) -> SymplecticForm {
        SymplecticForm::new(self.n)
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.checks.rank()
    }

    #[must_use]
    pub fn num_logical(&self) -> usize {
        self.n - self.rank()
    }

    /// Checks of the given type, as supports (CSS only).
    #[must_use]
    pub fn checks_of(&self, t: PauliType) -> &BitMatrix {
        let p = self.css.as_ref().expect("CSS code");
        match t {
            PauliType::X => &p.hx,
            PauliType::Z => &p.hz,
        }
    }

    /// Does `v` commute with every check?
    #[must_use]
    pub fn commutes_with_checks(&self, v: &BitVec) -> bool {
        let vj = self.form().apply(v);
        self.checks.mul_vec(&vj).is_zero()
    }

    #[must_use]
    pub fn is_stabilizer(&self, v: &BitVec) -> bool {
        self.checks.in_row_span(v)
    }

    /// Deterministic symplectic basis of logical operators; pure X and Z rows for CSS codes.
    #[must_use]
    pub fn logical_basis(&self) -> LogicalBasis {
        match &self.css {
            Some(p) => css_logical_basis(self.n, &p.hx, &p.hz),
            None => general_logical_basis(self),
        }
    }

    /// Symplectic `U` mapping the stabilizer group onto itself.
    #[must_use]
    pub fn is_symmetry(&self, u: &BitMatrix) -> bool {
        if u.num_rows() != 2 * self.n || u.num_cols() != 2 * self.n || !is_symplectic(u) {
            return false;
        }
        self.checks.mul(u).row_span_equal(&self.checks)
    }

    /// Reducer onto the stabilizer row space, for repeated membership tests.
    #[must_use]
    pub fn stabilizer_reducer(&self) -> Reducer {
        Reducer::new(&self.checks)
    }

    /// `is_symmetry` against a precomputed stabilizer reducer.
    #[must_use]
    pub fn is_symmetry_in(&self, red: &Reducer, u: &BitMatrix) -> bool {
        u.num_rows() == 2 * self.n
            && u.num_cols() == 2 * self.n
            && is_symplectic(u)
            && self.checks.mul(u).rows().iter().all(|r| red.reduce(r).is_zero())
    }
}

/// Parse a Pauli string over `IXYZ` into `(x | z)` form.
pub fn parse_pauli(s: &str, n: usize) -> Result<BitVec> {
    if s.len() != n {
        return Err(Error::Parse(format!("expected {n} Paulis in {s}")));
    }
    let mut v = BitVec::zeros(2 * n);
    for (i, c) in s.chars().enumerate() {
        match c {
            'I' | '_' => {}
            'X' => v.set(i, true),
            'Z' => v.set(n + i, true),
            'Y' => {
                v.set(i, true);
                v.set(n + i, true);
            }
            _ => return Err(Error::Parse(format!("bad Pauli letter {c}"))),
        }
    }
    Ok(v)
}

#[must_use]
pub fn pauli_string(v: &BitVec) -> String {
    let n = v.len() / 2;
    (0..n)
        .map(|i| match (v.get(i), v.get(n + i)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        })
        .collect()
}

#[must_use]
pub fn is_symplectic(u: &BitMatrix) -> bool {
    let n2 = u.num_rows();
    if n2 % 2 != 0 || u.num_cols() != n2 {
        return false;
    }
    symplectic_gram(u, u) == SymplecticForm::new(n2 / 2).matrix()
}

/// Representatives of `ker(h_other) / rowspan(h_same)`.
fn quotient_reps(same: &BitMatrix, other: &BitMatrix) -> Vec<BitVec> {
    let mut basis = IncrementalBasis::from_matrix(same);
    let mut reps = Vec::new();
    for v in other.kernel().rows() {
        if basis.insert(v) {
            reps.push(v.clone());
        }
    }
    reps
}

fn css_logical_basis(n: usize, hx: &BitMatrix, hz: &BitMatrix) -> LogicalBasis {
    let mut xs = quotient_reps(hx, hz);
    let mut zs = quotient_reps(hz, hx);
    let k = xs.len();
    assert_eq!(k, zs.len(), "logical X and Z counts differ");
    for i in 0..k {
        let j = (i..k).find(|&j| xs[i].dot(&zs[j])).expect("pairing is nondegenerate");
        zs.swap(i, j);
        for l in i + 1..k {
            if xs[l].dot(&zs[i]) {
                let xi = xs[i].clone();
                xs[l].xor_assign(&xi);
            }
            if xs[i].dot(&zs[l]) {
                let zi = zs[i].clone();
                zs[l].xor_assign(&zi);
            }
        }
    }
    let rows = xs.iter().map(x_pauli).chain(zs.iter().map(z_pauli)).collect();
    LogicalBasis { k, matrix: BitMatrix::from_rows(2 * n, rows) }
}

fn general_logical_basis(code: &StabilizerCode) -> LogicalBasis {
    let n = code.n;
    let form = code.form();
    let normalizer = form.apply_rows(&code.checks).kernel();
    let mut basis = IncrementalBasis::from_matrix(&code.checks);
    let mut w: Vec<BitVec> = Vec::new();
    for v in normalizer.rows() {
        if basis.insert(v) {
            w.push(v.clone());
        }
    }
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    while !w.is_empty() {
        let a = w.remove(0);
        let j = w.iter().position(|b| form.product(&a, b)).expect("symplectic complement is nondegenerate");
        let b = w.remove(j);
        for v in &mut w {
            let pa = form.product(v, &a);
            let pb = form.product(v, &b);
            if pb {
                v.xor_assign(&a);
            }
            if pa {
                v.xor_assign(&b);
            }
        }
        xs.push(a);
        zs.push(b);
    }
    let k = xs.len();
    LogicalBasis { k, matrix: BitMatrix::from_rows(2 * n, xs.into_iter().chain(zs).collect()) }
}

/// Logical action `M` with `L U = M L` modulo stabilizers: `M = L U J L^T J`.
pub fn logical_action(code: &StabilizerCode, l: &LogicalBasis, u: &BitMatrix) -> Result<BitMatrix> {
    logical_action_in(code, &code.stabilizer_reducer(), l, u)
}

/// `logical_action` against a precomputed stabilizer reducer.
pub fn logical_action_in(code: &StabilizerCode, red: &Reducer, l: &LogicalBasis, u: &BitMatrix) -> Result<BitMatrix> {
    if !code.is_symmetry_in(red, u) {
        return Err(Error::NotSymmetry("operator does not preserve the stabilizer group".into()));
    }
    let lu = l.matrix.mul(u);
    let g = symplectic_gram(&lu, &l.matrix);
    let m = SymplecticForm::new(l.k).apply_rows(&g);
    // Residual L U - M L must be a stabilizer.
    let ml = m.mul(&l.matrix);
    for (a, b) in lu.rows().iter().zip(ml.rows()) {
        if !red.reduce(&a.xor(b)).is_zero() {
            return Err(Error::Mismatch("logical action residual is not a stabilizer".into()));
        }
    }
    if !is_symplectic(&m) {
        return Err(Error::Mismatch("logical action is not symplectic".into()));
    }
    Ok(m)
}

/// `block_diag(P, P)` for the qubit permutation `i -> perm[i]`.
#[must_use]
pub fn permutation_matrix(perm: &[usize]) -> BitMatrix {
    let n = perm.len();
    let rows = (0..2 * n).map(|r| BitVec::unit(2 * n, if r < n { perm[r] } else { n + perm[r - n] })).collect();
    BitMatrix::from_rows(2 * n, rows)
}

/// Sparse matrix in alist format (columns first).
#[must_use]
pub fn to_alist(m: &BitMatrix) -> String {
    let t = m.transpose();
    let col_w: Vec<usize> = t.rows().iter().map(BitVec::weight).collect();
    let row_w: Vec<usize> = m.rows().iter().map(BitVec::weight).collect();
    let mut s = format!("{} {}\n", m.num_cols(), m.num_rows());
    s += &format!("{} {}\n", col_w.iter().max().unwrap_or(&0), row_w.iter().max().unwrap_or(&0));
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    s += &format!("{}\n{}\n", join(&col_w), join(&row_w));
    for r in t.rows() {
        s += &join(&r.iter_ones().map(|i| i + 1).collect::<Vec<_>>());
        s.push('\n');
    }
    for r in m.rows() {
        s += &join(&r.iter_ones().map(|i| i + 1).collect::<Vec<_>>());
        s.push('\n');
    }
    s
}

pub fn from_alist(s: &str) -> Result<BitMatrix> {
    let mut nums = s.split_whitespace().map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("alist: {e}"))));
    let mut next = || nums.next().unwrap_or_else(|| Err(Error::Parse("alist: truncated".into())));
    let (cols, rows) = (next()?, next()?);
    let (_, _) = (next()?, next()?);
    let col_w: Vec<usize> = (0..cols).map(|_| next()).collect::<Result<_>>()?;
    let row_w: Vec<usize> = (0..rows).map(|_| next()).collect::<Result<_>>()?;
    let mut m = BitMatrix::zeros(rows, cols);
    for (c, &w) in col_w.iter().enumerate() {
        for _ in 0..w {
            let r = next()?;
            if r == 0 || r > rows {
                return Err(Error::Parse("alist: row index out of range".into()));
            }
            m.set(r - 1, c, true);
        }
    }
    let mut check = BitMatrix::zeros(rows, cols);
    for (r, &w) in row_w.iter().enumerate() {
        for _ in 0..w {
            let c = next()?;
            if c == 0 || c > cols {
                return Err(Error::Parse("alist: column index out of range".into()));
            }
            check.set(r, c - 1, true);
        }
    }
    if check != m {
        return Err(Error::Parse("alist: row and column lists disagree".into()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{css_from_complex, torus_complex};
    use crate::lattice::LatticeBasis;

    fn toric2(l: i64) -> StabilizerCode {
        css_from_complex(&torus_complex(&LatticeBasis::scaled_identity(2, l)).complex, 1).unwrap()
    }

    #[test]
    fn toric_parameters() {
        let c = toric2(3);
        assert_eq!((c.n, c.num_logical()), (18, 2));
        let c3 = css_from_complex(&torus_complex(&LatticeBasis::scaled_identity(3, 2)).complex, 1).unwrap();
        assert_eq!((c3.n, c3.num_logical()), (24, 3));
    }

    #[test]
    fn logical_basis_is_symplectic() {
        for code in [toric2(3), StabilizerCode::from_pauli_strings(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).unwrap()] {
            let l = code.logical_basis();
            assert_eq!(l.k, code.num_logical());
            assert_eq!(symplectic_gram(&l.matrix, &l.matrix), SymplecticForm::new(l.k).matrix());
            assert!(symplectic_gram(&code.checks, &l.matrix).is_zero());
        }
    }

    #[test]
    fn noncommuting_rejected() {
        assert!(StabilizerCode::from_pauli_strings(&["XI", "ZI"]).is_err());
    }

    #[test]
    fn identity_acts_trivially() {
        let code = toric2(2);
        let l = code.logical_basis();
        let m = logical_action(&code, &l, &BitMatrix::identity(2 * code.n)).unwrap();
        assert_eq!(m, BitMatrix::identity(2 * l.k));
    }

    #[test]
    fn alist_roundtrip() {
        let code = toric2(3);
        let hx = code.checks_of(PauliType::X);
        assert_eq!(&from_alist(&to_alist(hx)).unwrap(), hx);
    }

    #[test]
    fn json_roundtrip() {
        let code = toric2(2);
        let s = serde_json::to_string(&code).unwrap();
        let back: StabilizerCode = serde_json::from_str(&s).unwrap();
        assert_eq!(back, code);
    }
}
