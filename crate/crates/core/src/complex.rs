//! Cubic torus complexes, twisted products and the 24-cell honeycomb.

use crate::code::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::lattice::{hnf, HermiteForm, LatticeBasis};
use std::collections::BTreeMap;

/// F2 chain complex; `boundary(k)` has one row per k-cell holding its boundary.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    counts: Vec<usize>,
    boundaries: Vec<BitMatrix>,
}

impl ChainComplex {
    /// `boundaries[k - 1]` is the `N_k x N_{k-1}` matrix of `d_k`.
    pub fn new(counts: Vec<usize>, boundaries: Vec<BitMatrix>) -> Result<Self> {
        if counts.is_empty() || boundaries.len() + 1 != counts.len() {
            return Err(Error::Dimension("need one boundary map per positive degree".into()));
        }
        for (k, b) in boundaries.iter().enumerate() {
            if b.num_rows() != counts[k + 1] || b.num_cols() != counts[k] {
                return Err(Error::Dimension(format!("boundary {} has wrong shape", k + 1)));
            }
        }
        let c = Self { counts, boundaries };
        if !c.is_complex() {
            return Err(Error::Mismatch("boundary of boundary is nonzero".into()));
        }
        Ok(c)
    }

    #[must_use]
    pub fn top(&self) -> usize {
        self.counts.len() - 1
    }

    #[must_use]
    pub fn num_cells(&self, k: usize) -> usize {
        self.counts[k]
    }

    #[must_use]
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `d_k` for `1 <= k <= top`.
    #[must_use]
    pub fn boundary(&self, k: usize) -> &BitMatrix {
        assert!(k >= 1 && k <= self.top(), "degree {k} has no boundary map");
        &self.boundaries[k - 1]
    }

    #[must_use]
    pub fn is_complex(&self) -> bool {
        (2..=self.top()).all(|k| self.boundaries[k - 1].mul(&self.boundaries[k - 2]).is_zero())
    }

    #[must_use]
    pub fn betti(&self, k: usize) -> usize {
        let rank_out = if k >= 1 { self.boundary(k).rank() } else { 0 };
        let rank_in = if k < self.top() { self.boundary(k + 1).rank() } else { 0 };
        self.counts[k] - rank_out - rank_in
    }

    #[must_use]
    pub fn euler_characteristic(&self) -> i64 {
        self.counts.iter().enumerate().map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) }).sum()
    }

    /// Does the cell map commute with the boundary?
    #[must_use]
    pub fn is_automorphism(&self, map: &CellMap) -> bool {
        if map.perms.len() != self.counts.len() {
            return false;
        }
        for (k, p) in map.perms.iter().enumerate() {
            if p.len() != self.counts[k] {
                return false;
            }
            let mut seen = vec![false; p.len()];
            for &x in p {
                if x >= p.len() || seen[x] {
                    return false;
                }
                seen[x] = true;
            }
        }
        (1..=self.top()).all(|k| {
            let b = self.boundary(k);
            (0..self.counts[k]).all(|c| b.row(map.perms[k][c]) == &b.row(c).permute(&map.perms[k - 1]))
        })
    }
}

/// Permutation of the cells in every degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMap {
    pub perms: Vec<Vec<usize>>,
}

impl CellMap {
    #[must_use]
    pub fn identity(counts: &[usize]) -> Self {
        Self { perms: counts.iter().map(|&n| (0..n).collect()).collect() }
    }
}

/// Size-`k` subsets of `0..d` in lexicographic order.
#[must_use]
pub fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            go(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, d, k, &mut Vec::new(), &mut out);
    out
}

#[must_use]
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Cubic cellulation of `Z^D / L`; a cell is a vertex plus a set of directions.
///
/// A k-cell has index `subset_index * det + vertex_index`.
#[derive(Clone, Debug)]
pub struct TorusComplex {
    pub hnf: HermiteForm,
    pub complex: ChainComplex,
    subsets: Vec<Vec<Vec<usize>>>,
}

impl TorusComplex {
    #[must_use]
    pub fn dim(&self) -> usize {
        self.hnf.dim()
    }

    #[must_use]
    pub fn det(&self) -> usize {
        self.hnf.det as usize
    }

    #[must_use]
    pub fn subsets(&self, k: usize) -> &[Vec<usize>] {
        &self.subsets[k]
    }

    #[must_use]
    pub fn subset_index(&self, subset: &[usize]) -> usize {
        self.subsets[subset.len()].iter().position(|s| s == subset).expect("valid subset")
    }

    #[must_use]
    pub fn cell_index(&self, vertex: &[i64], subset: &[usize]) -> usize {
        let rep = self.hnf.reduce(vertex);
        self.subset_index(subset) * self.det() + self.hnf.vertex_index(&rep)
    }

    /// Canonical vertex and direction set of a k-cell.
    #[must_use]
    pub fn cell(&self, k: usize, idx: usize) -> (Vec<i64>, Vec<usize>) {
        let det = self.det();
        (self.hnf.vertex_from_index(idx % det), self.subsets[k][idx / det].clone())
    }

    /// Doubled midpoint `2p + sum_{i in S} e_i` of a cell.
    #[must_use]
    pub fn doubled_coords(&self, k: usize, idx: usize) -> Vec<i64> {
        let (p, s) = self.cell(k, idx);
        let mut y: Vec<i64> = p.iter().map(|x| 2 * x).collect();
        for i in s {
            y[i] += 1;
        }
        y
    }

    /// Cell with the given doubled midpoint, reduced modulo the lattice.
    #[must_use]
    pub fn cell_at_doubled(&self, y: &[i64]) -> (usize, usize) {
        let subset: Vec<usize> = (0..y.len()).filter(|&i| y[i].rem_euclid(2) == 1).collect();
        let p: Vec<i64> = y.iter().map(|v| v.div_euclid(2)).collect();
        let k = subset.len();
        (k, self.cell_index(&p, &subset))
    }

    /// Cell permutations induced by translating by the vertex `t`.
    #[must_use]
    pub fn translation(&self, t: &[i64]) -> CellMap {
        let perms = (0..=self.dim())
            .map(|k| {
                (0..self.complex.num_cells(k))
                    .map(|c| {
                        let (p, s) = self.cell(k, c);
                        let q: Vec<i64> = p.iter().zip(t).map(|(a, b)| a + b).collect();
                        self.cell_index(&q, &s)
                    })
                    .collect()
            })
            .collect();
        CellMap { perms }
    }

    /// Qubit permutations for all `det` translations, on cells of degree `k`.
    #[must_use]
    pub fn translation_group(&self, k: usize) -> Vec<Vec<usize>> {
        (0..self.det())
            .map(|v| {
                let t = self.hnf.vertex_from_index(v);
                (0..self.complex.num_cells(k))
                    .map(|c| {
                        let (p, s) = self.cell(k, c);
                        let q: Vec<i64> = p.iter().zip(&t).map(|(a, b)| a + b).collect();
                        self.cell_index(&q, &s)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Cubic cellulation of the torus `R^D / L`.
#[must_use]
pub fn torus_complex(basis: &LatticeBasis) -> TorusComplex {
    let h = hnf(basis);
    let d = h.dim();
    let det = h.det as usize;
    let subsets: Vec<Vec<Vec<usize>>> = (0..=d).map(|k| subsets(d, k)).collect();
    let counts: Vec<usize> = (0..=d).map(|k| subsets[k].len() * det).collect();
    let mut tc = TorusComplex {
        hnf: h,
        complex: ChainComplex { counts: counts.clone(), boundaries: Vec::new() },
        subsets,
    };
    let mut boundaries = Vec::with_capacity(d);
    for k in 1..=d {
        let mut m = BitMatrix::zeros(counts[k], counts[k - 1]);
        for c in 0..counts[k] {
            let (p, s) = tc.cell(k, c);
            for (pos, &i) in s.iter().enumerate() {
                let mut face = s.clone();
                face.remove(pos);
                let a = tc.cell_index(&p, &face);
                let mut q = p.clone();
                q[i] += 1;
                let b = tc.cell_index(&q, &face);
                m.row_mut(c).flip(a);
                m.row_mut(c).flip(b);
            }
        }
        boundaries.push(m);
    }
    tc.complex = ChainComplex::new(counts, boundaries).expect("cubic torus is a chain complex");
    tc
}

/// CSS code with qubits on q-cells, X checks on (q-1)-cells and Z checks on (q+1)-cells.
pub fn css_from_complex(c: &ChainComplex, q: usize) -> Result<StabilizerCode> {
    if q == 0 || q >= c.top() {
        return Err(Error::Invalid(format!("qubit degree {q} needs 0 < q < {}", c.top())));
    }
    StabilizerCode::css(c.boundary(q).transpose(), c.boundary(q + 1).clone())
}

/// Product of a circle of length `n` with `d`, with boundaries deformed by cell automorphisms.
#[derive(Clone, Debug)]
pub struct TwistedProduct {
    pub complex: ChainComplex,
    pub circle_len: usize,
    d_counts: Vec<usize>,
}

impl TwistedProduct {
    /// Index of `vertex (x) cell` in degree `k` where `cell` has degree `k`.
    #[must_use]
    pub fn vertex_cell(&self, k: usize, vertex: usize, cell: usize) -> usize {
        vertex * self.d_counts[k] + cell
    }

    /// Index of `edge (x) cell` in degree `k` where `cell` has degree `k - 1`.
    #[must_use]
    pub fn edge_cell(&self, k: usize, edge: usize, cell: usize) -> usize {
        let base = if k < self.d_counts.len() { self.circle_len * self.d_counts[k] } else { 0 };
        base + edge * self.d_counts[k - 1] + cell
    }
}

/// Edge `j` of the circle runs from vertex `j` to vertex `j + 1 mod n`.
/// `twists[j]` gives the automorphisms applied at the start and end vertices of edge `j`.
pub fn twisted_product(circle_len: usize, d: &ChainComplex, twists: &[(CellMap, CellMap)]) -> Result<TwistedProduct> {
    if circle_len == 0 || twists.len() != circle_len {
        return Err(Error::Invalid("need one twist pair per circle edge".into()));
    }
    for (a, b) in twists {
        if !d.is_automorphism(a) || !d.is_automorphism(b) {
            return Err(Error::Invalid("twist is not an automorphism".into()));
        }
    }
    let top = d.top() + 1;
    let dc = d.counts().to_vec();
    let n = circle_len;
    let counts: Vec<usize> = (0..=top)
        .map(|k| {
            let a = if k <= d.top() { n * dc[k] } else { 0 };
            let b = if k >= 1 { n * dc[k - 1] } else { 0 };
            a + b
        })
        .collect();
    let tp = TwistedProduct { complex: ChainComplex { counts: counts.clone(), boundaries: Vec::new() }, circle_len: n, d_counts: dc.clone() };
    let mut boundaries = Vec::new();
    for k in 1..=top {
        let mut m = BitMatrix::zeros(counts[k], counts[k - 1]);
        if k <= d.top() {
            let bd = d.boundary(k);
            for v in 0..n {
                for c in 0..dc[k] {
                    let row = tp.vertex_cell(k, v, c);
                    for f in bd.row(c).iter_ones() {
                        m.row_mut(row).flip(tp.vertex_cell(k - 1, v, f));
                    }
                }
            }
        }
        for e in 0..n {
            let (start, end) = (e, (e + 1) % n);
            for c in 0..dc[k - 1] {
                let row = tp.edge_cell(k, e, c);
                if k >= 2 {
                    for f in d.boundary(k - 1).row(c).iter_ones() {
                        m.row_mut(row).flip(tp.edge_cell(k - 1, e, f));
                    }
                }
                m.row_mut(row).flip(tp.vertex_cell(k - 1, start, twists[e].0.perms[k - 1][c]));
                m.row_mut(row).flip(tp.vertex_cell(k - 1, end, twists[e].1.perms[k - 1][c]));
            }
        }
        boundaries.push(m);
    }
    let complex = ChainComplex::new(counts, boundaries)?;
    Ok(TwistedProduct { complex, ..tp })
}

/// Twists that make the circle-times-slice product reproduce a 3D torus sliced along x_1.
///
/// The wrap-around edge carries the translation by minus the off-diagonal part of the first HNF row.
#[must_use]
pub fn slice_twists(h: &HermiteForm, slice: &TorusComplex) -> Vec<(CellMap, CellMap)> {
    let n = h.n_slice() as usize;
    let id = CellMap::identity(slice.complex.counts());
    let shift: Vec<i64> = h.matrix[0][1..].iter().map(|x| -x).collect();
    (0..n)
        .map(|e| if e + 1 == n { (id.clone(), slice.translation(&shift)) } else { (id.clone(), id.clone()) })
        .collect()
}

/// Lower-right block of an HNF: the lattice seen by one slice `x_1 = const`.
#[must_use]
pub fn slice_lattice(h: &HermiteForm) -> LatticeBasis {
    let rows = h.matrix[1..].iter().map(|r| r[1..].to_vec()).collect();
    LatticeBasis::new(rows).expect("HNF block is full rank")
}

/// One axis of an octahedron: the apex triangles on either side and the equator square.
#[derive(Clone, Debug)]
pub struct OctahedronAxis {
    pub apex_triangles: [Vec<usize>; 2],
    pub equator_edges: Vec<usize>,
}

/// The 24-cell honeycomb modulo a sublattice, with octahedron geometry kept for subdivision.
#[derive(Clone, Debug)]
pub struct Honeycomb {
    pub complex: ChainComplex,
    /// Number of 24-cells.
    pub cells: usize,
    /// Three axes per octahedron, in canonical order.
    pub axes: Vec<Vec<OctahedronAxis>>,
}

const D4_TO_CENTERS: [[i64; 4]; 4] = [[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]];

fn dist2(a: &[i64; 4], b: &[i64; 4]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Faces of the 24-cell centred at the origin with vertices at permutations of `(+-1, +-1, 0, 0)`.
struct Cell24 {
    vertices: Vec<[i64; 4]>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    octahedra: Vec<Vec<usize>>,
}

impl Cell24 {
    fn new() -> Self {
        let mut vertices = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                for si in [1, -1] {
                    for sj in [1, -1] {
                        let mut v = [0; 4];
                        v[i] = si;
                        v[j] = sj;
                        vertices.push(v);
                    }
                }
            }
        }
        vertices.sort();
        let n = vertices.len();
        let adj = |a: usize, b: usize| dist2(&vertices[a], &vertices[b]) == 2;
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if adj(a, b) {
                    edges.push([a, b]);
                    for c in b + 1..n {
                        if adj(a, c) && adj(b, c) {
                            triangles.push([a, b, c]);
                        }
                    }
                }
            }
        }
        let mut normals: Vec<[i64; 4]> = Vec::new();
        for i in 0..4 {
            for s in [2, -2] {
                let mut v = [0; 4];
                v[i] = s;
                normals.push(v);
            }
        }
        for bits in 0..16 {
            normals.push(std::array::from_fn(|i| if bits >> i & 1 == 1 { -1 } else { 1 }));
        }
        let octahedra = normals
            .iter()
            .map(|nrm| (0..n).filter(|&v| vertices[v].iter().zip(nrm).map(|(a, b)| a * b).sum::<i64>() == 2).collect())
            .collect();
        Self { vertices, edges, triangles, octahedra }
    }
}

/// 24-cell honeycomb modulo the sublattice spanned by `rows`, given in D4 coordinates
/// (integer vectors with even coordinate sum).
pub fn honeycomb_24cell(rows: &[Vec<i64>]) -> Result<Honeycomb> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(Error::Dimension("sublattice must be 4 x 4".into()));
    }
    if rows.iter().any(|r| r.iter().sum::<i64>().rem_euclid(2) != 0) {
        return Err(Error::InvalidLattice("sublattice is not contained in D4".into()));
    }
    let mapped: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| (0..4).map(|j| (0..4).map(|i| r[i] * D4_TO_CENTERS[i][j]).sum()).collect())
        .collect();
    LatticeBasis::new(mapped.clone())?;
    // Centre lattice: all-even or all-odd integer vectors.
    let centre_basis: [[i64; 4]; 4] = [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [1, 1, 1, 1]];
    // Coordinates of the sublattice rows in the centre basis.
    let coeffs: Vec<Vec<i64>> = mapped
        .iter()
        .map(|r| {
            let c3 = r[3];
            let c0 = (r[0] - c3) / 2;
            let c1 = (r[1] - c3) / 2;
            let c2 = (r[2] - c3) / 2;
            vec![c0, c1, c2, c3]
        })
        .collect();
    let coset = hnf(&LatticeBasis::new(coeffs)?);
    let ncells = coset.det as usize;
    let centres: Vec<[i64; 4]> = (0..ncells)
        .map(|i| {
            let x = coset.vertex_from_index(i);
            std::array::from_fn(|j| (0..4).map(|k| x[k] * centre_basis[k][j]).sum())
        })
        .collect();
    let scaled = hnf(&LatticeBasis::new(mapped.iter().map(|r| r.iter().map(|x| 6 * x).collect()).collect())?);
    let key = |pts: &[[i64; 4]], c: &[i64; 4]| -> Vec<i64> {
        let m = pts.len() as i64;
        let y: Vec<i64> = (0..4).map(|j| 6 * c[j] + pts.iter().map(|p| p[j]).sum::<i64>() * 6 / m).collect();
        scaled.reduce(&y)
    };
    let cell = Cell24::new();
    let vs = |ids: &[usize]| -> Vec<[i64; 4]> { ids.iter().map(|&i| cell.vertices[i]).collect() };

    // Per degree: key -> boundary keys, recorded from the first copy seen.
    let mut faces: Vec<BTreeMap<Vec<i64>, Vec<Vec<i64>>>> = vec![BTreeMap::new(); 5];
    let mut axes_by_key: BTreeMap<Vec<i64>, Vec<(Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<Vec<i64>>)>> = BTreeMap::new();
    for c in &centres {
        for v in 0..cell.vertices.len() {
            faces[0].entry(key(&vs(&[v]), c)).or_default();
        }
        for e in &cell.edges {
            let k = key(&vs(e), c);
            faces[1].entry(k).or_insert_with(|| e.iter().map(|&v| key(&vs(&[v]), c)).collect());
        }
        for t in &cell.triangles {
            let k = key(&vs(t), c);
            faces[2].entry(k).or_insert_with(|| {
                [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]].iter().map(|e| key(&vs(e), c)).collect()
            });
        }
        for o in &cell.octahedra {
            let k = key(&vs(o), c);
            if faces[3].contains_key(&k) {
                continue;
            }
            let tris: Vec<&[usize; 3]> = cell.triangles.iter().filter(|t| t.iter().all(|v| o.contains(v))).collect();
            faces[3].insert(k.clone(), tris.iter().map(|t| key(&vs(&t[..]), c)).collect());
            // Opposite vertex pairs give the three axes.
            let mut axes = Vec::new();
            for (ai, &a) in o.iter().enumerate() {
                for &b in &o[ai + 1..] {
                    if dist2(&cell.vertices[a], &cell.vertices[b]) == 4 {
                        let mut dir: Vec<i64> = (0..4).map(|j| cell.vertices[a][j] - cell.vertices[b][j]).collect();
                        let (mut a, mut b) = (a, b);
                        if dir.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
                            dir.iter_mut().for_each(|x| *x = -*x);
                            std::mem::swap(&mut a, &mut b);
                        }
                        let lead = dir.iter().position(|&x| x != 0).unwrap_or(0);
                        axes.push((lead, dir, a, b));
                    }
                }
            }
            axes.sort();
            let info = axes
                .iter()
                .map(|(_, _, a, b)| {
                    let side = |apex: usize| -> Vec<Vec<i64>> {
                        tris.iter().filter(|t| t.contains(&apex)).map(|t| key(&vs(&t[..]), c)).collect()
                    };
                    let equator: Vec<Vec<i64>> = cell
                        .edges
                        .iter()
                        .filter(|e| e.iter().all(|v| o.contains(v) && v != a && v != b))
                        .map(|e| key(&vs(e), c))
                        .collect();
                    (side(*a), side(*b), equator)
                })
                .collect();
            axes_by_key.insert(k, info);
        }
        let all: Vec<usize> = (0..cell.vertices.len()).collect();
        let k4 = key(&vs(&all), c);
        faces[4].entry(k4).or_insert_with(|| cell.octahedra.iter().map(|o| key(&vs(o), c)).collect());
    }
    let index: Vec<BTreeMap<Vec<i64>, usize>> =
        faces.iter().map(|m| m.keys().enumerate().map(|(i, k)| (k.clone(), i)).collect()).collect();
    let counts: Vec<usize> = faces.iter().map(BTreeMap::len).collect();
    let mut boundaries = Vec::new();
    for k in 1..=4 {
        let mut m = BitMatrix::zeros(counts[k], counts[k - 1]);
        for (r, (_, bd)) in faces[k].iter().enumerate() {
            for f in bd {
                m.row_mut(r).flip(index[k - 1][f]);
            }
        }
        boundaries.push(m);
    }
    let axes = axes_by_key
        .values()
        .map(|info| {
            info.iter()
                .map(|(a, b, eq)| OctahedronAxis {
                    apex_triangles: [a.iter().map(|t| index[2][t]).collect(), b.iter().map(|t| index[2][t]).collect()],
                    equator_edges: eq.iter().map(|e| index[1][e]).collect(),
                })
                .collect()
        })
        .collect();
    Ok(Honeycomb { complex: ChainComplex::new(counts, boundaries)?, cells: ncells, axes })
}

/// Split every octahedron into two square pyramids along the chosen axis.
///
/// New 2-cells: triangles, then one square per octahedron. New 3-cells: pyramids `2o, 2o + 1`.
pub fn subdivide_octahedra(h: &Honeycomb, apex_choice: &[usize]) -> Result<ChainComplex> {
    let c = &h.complex;
    let n_oct = c.num_cells(3);
    if apex_choice.len() != n_oct || apex_choice.iter().any(|&a| a >= 3) {
        return Err(Error::Invalid("one axis index in 0..3 per octahedron".into()));
    }
    let n_tri = c.num_cells(2);
    let counts = vec![c.num_cells(0), c.num_cells(1), n_tri + n_oct, 2 * n_oct, c.num_cells(4)];
    let mut d2 = BitMatrix::zeros(counts[2], counts[1]);
    for t in 0..n_tri {
        *d2.row_mut(t) = c.boundary(2).row(t).clone();
    }
    let mut d3 = BitMatrix::zeros(counts[3], counts[2]);
    for o in 0..n_oct {
        let axis = &h.axes[o][apex_choice[o]];
        for &e in &axis.equator_edges {
            d2.row_mut(n_tri + o).flip(e);
        }
        for side in 0..2 {
            let row = d3.row_mut(2 * o + side);
            for &t in &axis.apex_triangles[side] {
                row.flip(t);
            }
            row.flip(n_tri + o);
        }
    }
    let mut d4 = BitMatrix::zeros(counts[4], counts[3]);
    for cell in 0..counts[4] {
        for o in c.boundary(4).row(cell).iter_ones() {
            d4.row_mut(cell).flip(2 * o);
            d4.row_mut(cell).flip(2 * o + 1);
        }
    }
    ChainComplex::new(counts, vec![c.boundary(1).clone(), d2, d3, d4])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::hadamard_lattice;

    #[test]
    fn det7_counts() {
        let tc = torus_complex(&"1,0,4;0,1,5;0,0,7".parse().unwrap());
        assert_eq!(tc.complex.counts(), &[7, 21, 21, 7]);
        assert_eq!(tc.complex.euler_characteristic(), 0);
        for k in 0..=3 {
            assert_eq!(tc.complex.betti(k), binomial(3, k));
        }
    }

    #[test]
    fn hadamard_counts() {
        let tc = torus_complex(&hadamard_lattice(2));
        assert_eq!(tc.complex.num_cells(2), 96);
        let code = css_from_complex(&tc.complex, 2).unwrap();
        assert_eq!(code.num_logical(), 6);
    }

    #[test]
    fn doubled_coords_roundtrip() {
        let tc = torus_complex(&hadamard_lattice(2));
        for k in 0..=4 {
            for c in 0..tc.complex.num_cells(k) {
                assert_eq!(tc.cell_at_doubled(&tc.doubled_coords(k, c)), (k, c));
            }
        }
    }

    #[test]
    fn twisted_product_matches_torus() {
        let h = LatticeBasis::new(vec![vec![2, 0, 4], vec![0, 1, 3], vec![0, 0, 5]]).unwrap().hnf();
        let full = torus_complex(&h.basis());
        let slice = torus_complex(&slice_lattice(&h));
        let tp = twisted_product(2, &slice.complex, &slice_twists(&h, &slice)).unwrap();
        assert_eq!(tp.complex.counts(), full.complex.counts());
        // Explicit bijection: cells without direction 0 sit over circle vertices.
        let map = |k: usize, c: usize| -> usize {
            let (p, s) = full.cell(k, c);
            let x0 = p[0] as usize;
            let ps = p[1..].to_vec();
            if s.first() == Some(&0) {
                let rest: Vec<usize> = s[1..].iter().map(|i| i - 1).collect();
                tp.edge_cell(k, x0, slice.cell_index(&ps, &rest))
            } else {
                let rest: Vec<usize> = s.iter().map(|i| i - 1).collect();
                tp.vertex_cell(k, x0, slice.cell_index(&ps, &rest))
            }
        };
        for k in 1..=3 {
            let perm_lo: Vec<usize> = (0..full.complex.num_cells(k - 1)).map(|c| map(k - 1, c)).collect();
            for c in 0..full.complex.num_cells(k) {
                let image = full.complex.boundary(k).row(c).permute(&perm_lo);
                assert_eq!(&image, tp.complex.boundary(k).row(map(k, c)));
            }
        }
    }

    #[test]
    fn honeycomb_per_cell_counts() {
        let d4 = vec![vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![0, 0, 0, 2]];
        let h = honeycomb_24cell(&d4).unwrap();
        assert_eq!(h.cells, 1);
        assert_eq!(h.complex.counts(), &[3, 24, 32, 12, 1]);
        assert_eq!(h.complex.euler_characteristic(), 0);
        let doubled: Vec<Vec<i64>> = d4.iter().map(|r| r.iter().map(|x| 2 * x).collect()).collect();
        let h2 = honeycomb_24cell(&doubled).unwrap();
        assert_eq!(h2.cells, 16);
        assert_eq!(h2.complex.counts(), &[48, 384, 512, 192, 16]);
        assert!(honeycomb_24cell(&[vec![1, 0, 0, 0], vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![0, 0, 0, 2]]).is_err());
    }
}
