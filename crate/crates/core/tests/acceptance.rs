//! End-to-end checks, one PASS/FAIL line per criterion.
//!
//! Everything runs by default; `ROTCODE_SKIP_LONG=1` drops the long rows (systole 7 searches, the
//! distance-5 effective distance).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotcode::code::{PauliType, StabilizerCode};
use rotcode::complex::{
    css_from_complex, honeycomb_24cell, slice_lattice, slice_twists, subdivide_octahedra, torus_complex, twisted_product,
    ChainComplex,
};
use rotcode::distance::{code_distance, min_weight_logical, subsystem_probe, SearchLimits};
use rotcode::gf2::{BitMatrix, BitVec};
use rotcode::injection::{
    cleaning_test, css_injection_sets, noncss_injection_sets, round_trip, standard_cleaning_test, validate_sets,
    InjectionSets,
};
use rotcode::lattice::{hadamard_lattice, hnf, l1_systole, search_min_det, LatticeBasis, SearchBudget};
use rotcode::protocols::{
    boundary_distance, boundary_distance_from_systole, circuit_distance, effective_distance_bell, ghz_logical_group,
    hook_propagation, slice_protocol, slice_setup, starfish_circuit, starfish_order, surgery_measure,
    twisted_slice_logicals,
};
use rotcode::symmetry::symmetry_report;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

fn long_enabled() -> bool {
    std::env::var("ROTCODE_SKIP_LONG").map_or(true, |v| v.is_empty() || v == "0")
}

fn lat(s: &str) -> LatticeBasis {
    s.parse().expect("lattice literal")
}

fn min_det(dim: usize, s: i64, slices: i64) -> std::result::Result<u64, String> {
    search_min_det(dim, s, slices, SearchBudget::default()).map(|r| r.det).map_err(|e| e.to_string())
}

fn det_table(dim: usize, slices: i64, rows: &[(i64, u64)]) -> Check {
    let mut got = Vec::new();
    for &(s, want) in rows {
        let d = min_det(dim, s, slices)?;
        ensure!(d == want, "systole {s}: det {d}, expected {want}");
        got.push(format!("{s}:{d}"));
    }
    Ok(got.join(" "))
}

fn table_1() -> Check {
    let mut rows = vec![(2, 2), (3, 7), (4, 12), (5, 27), (6, 38)];
    if long_enabled() {
        rows.push((7, 70));
    }
    det_table(3, 1, &rows)
}

fn table_2() -> Check {
    let mut rows = vec![(2, 4), (3, 10), (4, 16), (5, 30), (6, 44)];
    if long_enabled() {
        rows.push((7, 72));
    }
    det_table(3, 2, &rows)
}

fn table_3() -> Check {
    let mut rows = vec![(2, 2), (3, 9), (4, 16)];
    if long_enabled() {
        rows.push((5, 45));
    }
    let plain = det_table(4, 1, &rows)?;
    let mut sliceable = vec![(3, 14), (4, 24)];
    if long_enabled() {
        sliceable.push((5, 54));
    }
    let sl = det_table(4, 2, &sliceable)?;
    Ok(format!("{plain} | sliceable {sl}"))
}

fn hadamard_code() -> Check {
    let tc = torus_complex(&hadamard_lattice(2));
    let code = css_from_complex(&tc.complex, 2).map_err(|e| e.to_string())?;
    let hx = code.checks_of(PauliType::X).num_rows();
    let hz = code.checks_of(PauliType::Z).num_rows();
    ensure!(code.n == 96 && code.num_logical() == 6, "n={} k={}", code.n, code.num_logical());
    ensure!(hx == 64 && hz == 64, "{hx} X checks, {hz} Z checks");
    for kind in [PauliType::Z, PauliType::X] {
        let r = min_weight_logical(&code, kind, 8, Some(tc.det()), None, SearchLimits::default()).map_err(|e| e.to_string())?;
        ensure!(r.weight == Some(8), "{kind:?} weight {:?}", r.weight);
    }
    Ok("n=96 k=6 checks 64+64, weight 8 on both sides".into())
}

fn subsystem() -> Check {
    let tc = torus_complex(&lat("1,0,0,7;0,1,0,5;0,0,1,3;0,0,0,16"));
    let code = css_from_complex(&tc.complex, 2).map_err(|e| e.to_string())?;
    let group = tc.translation_group(2);
    let r = subsystem_probe(&code, 8, Some(tc.det()), &group, SearchLimits::default()).map_err(|e| e.to_string())?;
    ensure!(r.weight_z == Some(8) && r.weight_x == Some(8), "weights {:?} {:?}", r.weight_z, r.weight_x);
    ensure!(r.all_commute, "minimal X and Z logicals anticommute");
    ensure!(r.z_representatives == 8, "{} weight-8 Z representatives", r.z_representatives);
    ensure!(r.z_classes == 1, "{} Z classes", r.z_classes);
    let d = r.subsystem_distance_at_least;
    ensure!(d.is_some_and(|d| d >= 9), "subsystem distance bound {d:?}");
    Ok(format!(
        "distance 8, {} Z reps in {} class, {} X reps, gauge {}, remaining k {}, subsystem distance >= {}",
        r.z_representatives,
        r.z_classes,
        r.x_representatives,
        r.gauge_qubits,
        r.remaining_logical,
        d.unwrap_or(0)
    ))
}

fn slicing_case(rows: &str, seed: u64) -> Check {
    let b = lat(rows);
    let r = slice_protocol(&b, seed).map_err(|e| e.to_string())?;
    ensure!(r.outcomes_consistent && r.checks_fixed && r.slice_checks_definite, "{rows}: protocol invariants");
    ensure!(r.matches_expected, "{rows}: logical group differs from GHZ group");
    let s = slice_setup(&b).map_err(|e| e.to_string())?;
    let tw = slice_twists(&s.torus.hnf, &s.slice_torus);
    let alg = twisted_slice_logicals(s.n_slice, &s.slice_torus.complex, &tw, true).map_err(|e| e.to_string())?;
    let sim = BitMatrix::from_rows(alg.num_cols(), r.logical_group.iter().map(|g| g.coefficients.clone()).collect());
    ensure!(alg.row_span_equal(&sim), "{rows}: algebraic and simulated groups differ");
    ensure!(alg.row_span_equal(&ghz_logical_group(s.n_slice, s.k_slice())), "{rows}: algebraic group");
    ensure!(r.logical_group.iter().all(|g| !g.negative), "{rows}: negative logical sign");
    Ok(format!("{rows}: {} slices, group rank {}", r.n_slice, sim.rank()))
}

fn slicing() -> Check {
    let a = slicing_case("2,0,4;0,1,3;0,0,5", 11)?;
    let b = slicing_case("3,0,2;0,1,4;0,0,7", 12)?;
    Ok(format!("{a}; {b}"))
}

fn effective_distance() -> Check {
    let r = effective_distance_bell(&lat("2,0,4;0,1,3;0,0,5"), 6, SearchLimits::default()).map_err(|e| e.to_string())?;
    ensure!(r.min_half_units == Some(6), "d=3 instance: {:?} half units", r.min_half_units);
    let sharp = r.sharp_witness.as_ref().ok_or("no sharp witness")?;
    ensure!(sharp.half_units() == 6 && sharp.qubit_x_errors.is_empty(), "sharp witness {sharp:?}");
    let mut msg = format!("d=3: min e_f/2 + e_X = 3, sharp flux-only witness {:?}", sharp.flux_errors);
    if long_enabled() {
        let r5 = effective_distance_bell(&lat("2,0,12;0,1,8;0,0,13"), 10, SearchLimits::default()).map_err(|e| e.to_string())?;
        ensure!(r5.min_half_units == Some(10), "d=5 instance: {:?} half units", r5.min_half_units);
        msg.push_str("; d=5: 5");
    } else {
        msg.push_str("; d=5 skipped");
    }
    Ok(msg)
}

fn starfish() -> Check {
    let tc = torus_complex(&lat("1,0,2;0,1,3;0,0,7"));
    let code = css_from_complex(&tc.complex, 1).map_err(|e| e.to_string())?;
    let c = starfish_circuit(&tc, &starfish_order(3)).map_err(|e| e.to_string())?;
    let d = circuit_distance(&c, &code, 4, SearchLimits::default()).map_err(|e| e.to_string())?;
    ensure!(d == Some(3), "circuit distance {d:?}");
    for p in 0..c.n_ancilla {
        let rows = hook_propagation(&c, &code, p).map_err(|e| e.to_string())?;
        let w: Vec<usize> = rows.iter().map(|r| r.weight).collect();
        ensure!(w == [4, 3, 2, 1, 0], "plaquette {p}: hook weights {w:?}");
        ensure!(rows[2].vertex_violations == 4, "plaquette {p}: weight-2 hook violates {}", rows[2].vertex_violations);
    }
    Ok("circuit distance 3, weight-2 hook violates 4 vertices on every plaquette".into())
}

fn symmetry() -> Check {
    let r = symmetry_report(&hadamard_lattice(2), 2).map_err(|e| e.to_string())?;
    ensure!(r.automorphisms == 384, "{} automorphisms", r.automorphisms);
    ensure!(r.distinct_permutation_actions == 24, "{} distinct permutation actions", r.distinct_permutation_actions);
    ensure!(r.all_verified, "a gate failed the symmetry or symplectic check");
    ensure!(r.group_order == 1_132_462_080, "group order {}", r.group_order);
    Ok(format!(
        "384 automorphisms, 24 distinct permutation actions, {} H-type and {} S-type gates verified, order 1132462080",
        r.hadamard_gates, r.phase_gates
    ))
}

fn surgery() -> Check {
    let h = hadamard_lattice(2);
    for row in 0..4 {
        let r = surgery_measure(&h, 2, row).map_err(|e| e.to_string())?;
        ensure!(r.measured_products.len() == 6, "row {row}: {} products", r.measured_products.len());
        ensure!(r.products_paired, "row {row}: unpaired product");
    }
    let mut got = Vec::new();
    for l in [2i64, 3, 4] {
        let b = LatticeBasis::scaled_identity(4, l);
        let want = 2 * l as usize;
        for kind in [PauliType::Z, PauliType::X] {
            let d = boundary_distance(&b, 2, 0, kind, 8, SearchLimits::default()).map_err(|e| e.to_string())?;
            ensure!(d == Some(want), "L={l} {kind:?}: {d:?}");
        }
        ensure!(boundary_distance_from_systole(&b, 0) == Some(2 * l), "L={l}: systole cross-check");
        got.push(format!("L={l}:{want}"));
    }
    Ok(format!("6 paired products on each row; boundary {}", got.join(" ")))
}

fn injection_case(name: &str, code: &StabilizerCode, sets: &InjectionSets, rng: &mut ChaCha8Rng) -> Check {
    validate_sets(code, sets).map_err(|e| format!("{name}: {e}"))?;
    ensure!(sets.u.len() == code.num_logical(), "{name}: |U| = {}", sets.u.len());
    if sets.css {
        ensure!(cleaning_test(code, &sets.s_x, PauliType::X), "{name}: S_X fails X cleaning");
        ensure!(cleaning_test(code, &sets.s_z, PauliType::Z), "{name}: S_Z fails Z cleaning");
    } else {
        ensure!(standard_cleaning_test(code, sets), "{name}: standard cleaning");
    }
    let d = code_distance(code, 8, SearchLimits::default()).map_err(|e| e.to_string())?.ok_or(format!("{name}: distance > 8"))?;
    let (n, k) = (code.n, code.num_logical());
    ensure!(2 * (d - 1) <= n - k, "{name}: Singleton fails with d={d}");
    let rt = round_trip(code, sets, 100, rng).map_err(|e| e.to_string())?;
    ensure!(rt.encoded_exact == 100 && rt.decoded_exact == 100, "{name}: round trip {rt:?}");
    Ok(format!("{name} [[{n},{k},{d}]]"))
}

fn injection() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = Vec::new();
    for (name, rows, q) in [
        ("2D 3x3", "3,0;0,3", 1),
        ("2D det-5", "1,2;0,5", 1),
        ("3D det-7 q=1", "1,0,2;0,1,3;0,0,7", 1),
        ("3D det-7 q=2", "1,0,2;0,1,3;0,0,7", 2),
        ("3D 2x2x2", "2,0,0;0,2,0;0,0,2", 1),
    ] {
        let code = css_from_complex(&torus_complex(&lat(rows)).complex, q).map_err(|e| e.to_string())?;
        let sets = css_injection_sets(&code).map_err(|e| e.to_string())?;
        done.push(injection_case(name, &code, &sets, &mut rng)?);
        let std_sets = noncss_injection_sets(&code).map_err(|e| e.to_string())?;
        injection_case(name, &code, &std_sets, &mut rng)?;
    }
    let five = StabilizerCode::from_pauli_strings(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]).map_err(|e| e.to_string())?;
    let sets = noncss_injection_sets(&five).map_err(|e| e.to_string())?;
    done.push(injection_case("five-qubit", &five, &sets, &mut rng)?);
    Ok(done.join(", "))
}

fn cell24() -> Check {
    let d4 = vec![vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![0, 0, 0, 2]];
    let h = honeycomb_24cell(&d4).map_err(|e| e.to_string())?;
    // One 24-cell per lattice vertex.
    let per_vertex = |h: &rotcode::complex::Honeycomb| -> Vec<usize> { (1..4).map(|k| h.complex.num_cells(k) / h.cells).collect() };
    ensure!(h.cells == 1 && per_vertex(&h) == [24, 32, 12], "counts {:?}", h.complex.counts());
    let doubled: Vec<Vec<i64>> = d4.iter().map(|r| r.iter().map(|x| 2 * x).collect()).collect();
    let h16 = honeycomb_24cell(&doubled).map_err(|e| e.to_string())?;
    ensure!(h16.cells == 16 && per_vertex(&h16) == [24, 32, 12], "doubled counts {:?}", h16.complex.counts());
    // Octahedra carry X checks, edges Z checks.
    let code = css_from_complex(&h.complex, 2).map_err(|e| e.to_string())?.dual();
    ensure!(code.n == 32, "{} qubits", code.n);
    let wx = min_weight_logical(&code, PauliType::X, 8, None, None, SearchLimits::default()).map_err(|e| e.to_string())?.weight;
    let wz = min_weight_logical(&code, PauliType::Z, 8, None, None, SearchLimits::default()).map_err(|e| e.to_string())?.weight;
    ensure!(wx == Some(6) && wz == Some(2), "X weight {wx:?}, Z weight {wz:?}");
    let n_oct = h.complex.num_cells(3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for choice in [vec![0; n_oct], vec![1; n_oct], vec![2; n_oct], (0..n_oct).map(|_| rng.gen_range(0..3)).collect()] {
        let sub = subdivide_octahedra(&h, &choice).map_err(|e| e.to_string())?;
        ensure!(sub.is_complex(), "subdivision is not a complex");
        ensure!(sub.boundary(3).rows().iter().all(|r| r.weight() == 5), "pyramid check weight other than 5");
        ensure!(sub.num_cells(3) == 2 * n_oct, "pyramid count");
    }
    Ok("per vertex 24 edges, 32 triangles, 12 octahedra; 32 qubits, X weight 6, Z weight 2; pyramids weight 5".into())
}

fn complexes() -> Vec<ChainComplex> {
    let mut out = Vec::new();
    for rows in ["3,0;0,3", "1,2;0,5", "1,0,2;0,1,3;0,0,7", "2,0,4;0,1,3;0,0,5", "1,0,0,7;0,1,0,5;0,0,1,3;0,0,0,16"] {
        out.push(torus_complex(&lat(rows)).complex);
    }
    out.push(torus_complex(&hadamard_lattice(2)).complex);
    let h = lat("2,0,12;0,1,8;0,0,13").hnf();
    let slice = torus_complex(&slice_lattice(&h));
    out.push(twisted_product(2, &slice.complex, &slice_twists(&h, &slice)).expect("twisted product").complex);
    let hc = honeycomb_24cell(&[vec![2, 0, 0, 2], vec![0, 2, 0, 2], vec![0, 0, 2, 2], vec![0, 0, 0, 4]]).expect("honeycomb");
    out.push(subdivide_octahedra(&hc, &vec![1; hc.complex.num_cells(3)]).expect("subdivision"));
    out.push(hc.complex);
    out
}

/// Minimum weight of a nontrivial logical of type `kind` by enumerating subsets.
fn naive_css_weight(code: &StabilizerCode, kind: PauliType, w_max: usize) -> Option<usize> {
    let detect = code.checks_of(kind.other());
    let same = code.checks_of(kind);
    let n = code.n;
    fn rec(n: usize, w: usize, start: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if chosen.len() == w {
            return f(chosen);
        }
        for i in start..n {
            chosen.push(i);
            if rec(n, w, i + 1, chosen, f) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    (1..=w_max).find(|&w| {
        rec(n, w, 0, &mut Vec::new(), &mut |s| {
            let v = BitVec::from_indices(n, s.iter().copied());
            detect.mul_vec(&v).is_zero() && !same.in_row_span(&v)
        })
    })
}

fn random_unimodular(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..12 {
        let i = rng.gen_range(0..d);
        let j = rng.gen_range(0..d);
        if i == j {
            u[i].iter_mut().for_each(|x| *x = -*x);
        } else {
            let c = rng.gen_range(-2..=2);
            let rj = u[j].clone();
            u[i].iter_mut().zip(rj).for_each(|(a, b)| *a += c * b);
        }
    }
    u
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter().map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect()).collect()
}

fn properties() -> Check {
    let cs = complexes();
    ensure!(cs.iter().all(ChainComplex::is_complex), "boundary squares to nonzero");
    let mut codes: Vec<(String, StabilizerCode)> = Vec::new();
    for (rows, qs) in [
        ("2,0;0,2", vec![1]),
        ("3,0;0,3", vec![1]),
        ("1,2;0,5", vec![1]),
        ("1,3;0,10", vec![1]),
        ("1,0,2;0,1,3;0,0,7", vec![1, 2]),
        ("2,0,0;0,2,0;0,0,2", vec![1, 2]),
        ("1,0,0,1;0,1,0,1;0,0,1,1;0,0,0,2", vec![1, 2, 3]),
        ("1,0,0,1;0,1,0,1;0,0,1,2;0,0,0,3", vec![1, 3]),
    ] {
        let tc = torus_complex(&lat(rows));
        for q in qs {
            let code = css_from_complex(&tc.complex, q).map_err(|e| e.to_string())?;
            if code.n <= 24 {
                codes.push((format!("{rows} q={q}"), code));
            }
        }
    }
    let d_hex = honeycomb_24cell(&[vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![0, 0, 0, 2]]).map_err(|e| e.to_string())?;
    let tri = css_from_complex(&d_hex.complex, 1).map_err(|e| e.to_string())?;
    codes.push(("24-cell edges".into(), tri));
    for (name, code) in &codes {
        for kind in [PauliType::Z, PauliType::X] {
            let fast = min_weight_logical(code, kind, 4, None, None, SearchLimits::default()).map_err(|e| e.to_string())?.weight;
            let slow = naive_css_weight(code, kind, 4);
            ensure!(fast == slow, "{name} {kind:?}: engine {fast:?}, brute force {slow:?}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut tested = 0;
    while tested < 1000 {
        let d = if tested % 2 == 0 { 3 } else { 4 };
        let b: Vec<Vec<i64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(-4..=4)).collect()).collect();
        let Ok(basis) = LatticeBasis::new(b.clone()) else { continue };
        let moved = LatticeBasis::new(mat_mul(&random_unimodular(d, &mut rng), &b)).map_err(|e| e.to_string())?;
        ensure!(hnf(&basis) == hnf(&moved), "hnf differs for {b:?}");
        tested += 1;
    }
    for t in 0..=3u32 {
        let s = l1_systole(&hadamard_lattice(t), None).map(|(s, _)| s);
        ensure!(s == Some(1 << t), "Hadamard t={t}: systole {s:?}");
    }
    Ok(format!("{} complexes, {} codes vs brute force, 1000 hnf cases, Hadamard t<=3", cs.len(), codes.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("minimal determinants 3D", table_1),
        ("minimal determinants 3D, two slices", table_2),
        ("minimal determinants 4D and sliceable 4D", table_3),
        ("Hadamard code parameters", hadamard_code),
        ("subsystem distance of the det-16 code", subsystem),
        ("slicing logical groups", slicing),
        ("effective distance", effective_distance),
        ("starfish circuit distance", starfish),
        ("crystalline symmetries", symmetry),
        ("lattice surgery", surgery),
        ("state injection", injection),
        ("24-cell honeycomb", cell24),
        ("property suites", properties),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = std::time::Instant::now();
        match f() {
            Ok(msg) => println!("criterion {:2} PASS  {name}: {msg} ({:.1}s)", i + 1, t.elapsed().as_secs_f64()),
            Err(msg) => {
                println!("criterion {:2} FAIL  {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
