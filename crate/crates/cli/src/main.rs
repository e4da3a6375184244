use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotcode::code::{pauli_string, PauliType, StabilizerCode};
use rotcode::complex::{css_from_complex, slice_twists, torus_complex};
use rotcode::distance::{code_distance, min_weight_logical, SearchLimits};
use rotcode::gf2::BitMatrix;
use rotcode::injection::{css_injection_sets, injected_logical_pairs, noncss_injection_sets, round_trip, unencoding_bases};
use rotcode::lattice::{hnf, search_min_det, LatticeBasis, SearchBudget};
use rotcode::protocols::{
    adversarial_order, boundary_distance, boundary_distance_from_systole, circuit_distance, effective_distance_bell,
    hook_propagation, slice_protocol, slice_setup, starfish_circuit, starfish_order, surgery_measure, twisted_slice_logicals,
    Basis,
};
use rotcode::symmetry::symmetry_report;
use rotcode::Error;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

const SCHEMA: &str = "rotcode/1";

#[derive(Parser)]
#[command(name = "rotcode", version, about = "Toric codes on twisted cubic tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Seed for simulations.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Include long-running rows in `tables`.
    #[arg(long, global = true)]
    long: bool,
    /// Node budget for exhaustive searches.
    #[arg(long, global = true)]
    max_nodes: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    X,
    Z,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Order {
    Starfish,
    Adversarial,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Table {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    Shallow,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum determinant for a given l1 systole.
    Search {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        systole: i64,
        #[arg(long, default_value_t = 1)]
        slices: i64,
        #[arg(long, default_value_t = 4096)]
        max_det: u64,
    },
    /// Minimum-weight logical operators.
    Distance {
        /// Lattice rows "r1;r2;..." or a JSON file of rows.
        #[arg(long, conflicts_with = "paulis")]
        lattice: Option<String>,
        /// Comma-separated check strings for a general stabilizer code.
        #[arg(long)]
        paulis: Option<String>,
        /// Qubit cell degree (default: half the dimension, rounded down).
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, value_enum, default_value_t = Side::Both)]
        side: Side,
        #[arg(long, default_value_t = 8)]
        w_max: usize,
    },
    /// Slice a 3D code into 2D codes and report the logical state.
    Slice {
        #[arg(long)]
        lattice: String,
        /// Also search for the effective distance of Bell-pair generation.
        #[arg(long)]
        effective: bool,
        /// Cost bound in half-units (flux error 1, qubit error 2).
        #[arg(long, default_value_t = 6)]
        w_max_half: usize,
    },
    /// State-injection sets and encode/unencode round trips.
    Inject {
        #[arg(long, conflicts_with = "paulis")]
        lattice: Option<String>,
        #[arg(long)]
        paulis: Option<String>,
        #[arg(long)]
        degree: Option<usize>,
        /// Use the standard-operator construction even for CSS codes.
        #[arg(long)]
        noncss: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Merge two blocks along an HNF row.
    Surgery {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 16)]
        w_max: usize,
    },
    /// Crystalline logical gates.
    Symmetry {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Circuit distance of plaquette syndrome extraction in 3D.
    Starfish {
        #[arg(long)]
        lattice: String,
        #[arg(long, value_enum, default_value_t = Order::Starfish)]
        order: Order,
        #[arg(long, default_value_t = 4)]
        w_max: usize,
    },
    /// Reproduce a table of minimal determinants or effective distances.
    Tables {
        #[arg(value_enum)]
        which: Table,
    },
}

/// Error carrying the exit code.
struct Failure {
    code: u8,
    incomplete: bool,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } => 2,
            Error::Mismatch(_) => 3,
            _ => 1,
        };
        Failure { code, incomplete: code == 2, message: e.to_string() }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure { code: 1, incomplete: false, message }
    }
}

/// Command output: a JSON result, optional CSV rows and a pass flag.
struct Output {
    result: Value,
    rows: Vec<Value>,
    pass: bool,
}

impl Output {
    fn new(result: impl Serialize) -> Self {
        Self { result: serde_json::to_value(result).expect("serializable"), rows: Vec::new(), pass: true }
    }
}

fn parse_lattice(s: &str) -> Result<LatticeBasis, Failure> {
    if std::path::Path::new(s).is_file() {
        let text = std::fs::read_to_string(s).map_err(|e| format!("{s}: {e}"))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| format!("{s}: {e}"))?;
        let rows = v.get("rows").unwrap_or(&v);
        let rows: Vec<Vec<i64>> = serde_json::from_value(rows.clone()).map_err(|e| format!("{s}: {e}"))?;
        return Ok(LatticeBasis::new(rows)?);
    }
    Ok(s.parse()?)
}

fn parse_code(lattice: Option<&str>, paulis: Option<&str>, degree: Option<usize>) -> Result<(StabilizerCode, Option<usize>), Failure> {
    match (lattice, paulis) {
        (Some(l), _) => {
            let b = parse_lattice(l)?;
            let tc = torus_complex(&b);
            let q = degree.unwrap_or((b.dim / 2).max(1));
            Ok((css_from_complex(&tc.complex, q)?, Some(tc.det())))
        }
        (None, Some(p)) => {
            let rows: Vec<&str> = p.split(',').map(str::trim).filter(|r| !r.is_empty()).collect();
            Ok((StabilizerCode::from_pauli_strings(&rows)?, None))
        }
        (None, None) => Err("need --lattice or --paulis".to_string().into()),
    }
}

fn limits(g: &Global) -> SearchLimits {
    let mut l = SearchLimits::default();
    if let Some(m) = g.max_nodes {
        l.max_nodes = m;
    }
    l
}

fn cmd_search(g: &Global, dim: usize, systole: i64, slices: i64, max_det: u64) -> Result<Output, Failure> {
    let mut budget = SearchBudget { max_det, ..SearchBudget::default() };
    if let Some(m) = g.max_nodes {
        budget.max_nodes = m;
    }
    let r = search_min_det(dim, systole, slices, budget)?;
    let ratio = r.det as f64 / (systole as f64).powi(dim as i32);
    let rows = r.witnesses.iter().map(|w| json!({"systole": systole, "det": r.det, "ratio": ratio, "hnf": w.matrix})).collect();
    let mut out = Output::new(json!({
        "dim": dim, "systole": systole, "min_slices": slices, "det": r.det, "ratio": ratio,
        "witness_count": r.witness_count, "witnesses": r.witnesses.iter().map(|w| &w.matrix).collect::<Vec<_>>(), "nodes": r.nodes,
    }));
    out.rows = rows;
    Ok(out)
}

fn cmd_distance(g: &Global, lattice: Option<&str>, paulis: Option<&str>, degree: Option<usize>, side: Side, w_max: usize) -> Result<Output, Failure> {
    let (code, det) = parse_code(lattice, paulis, degree)?;
    if code.css.is_none() {
        let d = code_distance(&code, w_max, limits(g))?;
        return Ok(Output::new(json!({"n": code.n, "k": code.num_logical(), "distance": d, "w_max": w_max})));
    }
    let kinds: &[PauliType] = match side {
        Side::X => &[PauliType::X],
        Side::Z => &[PauliType::Z],
        Side::Both => &[PauliType::Z, PauliType::X],
    };
    let mut reports = Vec::new();
    for &kind in kinds {
        reports.push(min_weight_logical(&code, kind, w_max, det, None, limits(g))?);
    }
    let rows = reports
        .iter()
        .map(|r| {
            let weight = r.weight.map_or_else(|| json!(format!("> {}", r.w_max)), |w| json!(w));
            json!({"kind": r.kind, "n": r.n, "k": r.k, "weight": weight, "w_max": r.w_max})
        })
        .collect();
    let mut out = Output::new(json!({"n": code.n, "k": code.num_logical(), "reports": reports}));
    out.rows = rows;
    Ok(out)
}

fn cmd_slice(g: &Global, lattice: &str, effective: bool, w_max_half: usize) -> Result<Output, Failure> {
    let b = parse_lattice(lattice)?;
    let report = slice_protocol(&b, g.seed)?;
    let setup = slice_setup(&b)?;
    let twists = slice_twists(&setup.torus.hnf, &setup.slice_torus);
    let algebraic = twisted_slice_logicals(setup.n_slice, &setup.slice_torus.complex, &twists, true)?;
    let simulated = BitMatrix::from_rows(algebraic.num_cols(), report.logical_group.iter().map(|l| l.coefficients.clone()).collect());
    let agree = algebraic.row_span_equal(&simulated);
    let pass = agree && report.matches_expected && report.checks_fixed && report.outcomes_consistent;
    let eff = if effective { Some(effective_distance_bell(&b, w_max_half, limits(g))?) } else { None };
    let mut out = Output::new(json!({
        "n_slice": report.n_slice,
        "matches_expected": report.matches_expected,
        "algebraic_agrees": agree,
        "effective_distance_half_units": eff.as_ref().and_then(|e| e.min_half_units),
        "transcript": report,
        "effective": eff,
    }));
    out.pass = pass;
    Ok(out)
}

fn cmd_inject(g: &Global, lattice: Option<&str>, paulis: Option<&str>, degree: Option<usize>, noncss: bool, trials: usize) -> Result<Output, Failure> {
    let (code, _) = parse_code(lattice, paulis, degree)?;
    let sets = if noncss || code.css.is_none() { noncss_injection_sets(&code)? } else { css_injection_sets(&code)? };
    let pairs = injected_logical_pairs(&code, &sets)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let rt = round_trip(&code, &sets, trials, &mut rng)?;
    let recipe: String = unencoding_bases(&sets)
        .iter()
        .map(|b| match b {
            Some(Basis::X) => '+',
            Some(Basis::Y) => 'i',
            Some(Basis::Z) => '0',
            None => 'U',
        })
        .collect();
    let mut out = Output::new(json!({
        "n": code.n, "k": code.num_logical(),
        "u": sets.u.len(), "s_x": sets.s_x.len(), "s_y": sets.s_y.len(), "s_z": sets.s_z.len(),
        "recipe": recipe,
        "sets": sets,
        "pairs": pairs.iter().map(|p| json!({"qubit": p.qubit, "x": pauli_string(&p.x_logical), "z": pauli_string(&p.z_logical)})).collect::<Vec<_>>(),
        "round_trip": rt,
    }));
    out.pass = rt.encoded_exact == trials && rt.decoded_exact == trials;
    Ok(out)
}

fn cmd_surgery(g: &Global, lattice: &str, row: usize, degree: Option<usize>, w_max: usize) -> Result<Output, Failure> {
    let b = parse_lattice(lattice)?;
    let q = degree.unwrap_or((b.dim / 2).max(1));
    let r = surgery_measure(&b, q, row)?;
    let bz = boundary_distance(&b, q, row, PauliType::Z, w_max, limits(g))?;
    let bx = boundary_distance(&b, q, row, PauliType::X, w_max, limits(g))?;
    let sys = boundary_distance_from_systole(&b, row);
    let mut out = Output::new(json!({
        "measured": r.measured_products.len(),
        "surviving_pairs": r.surviving / 2,
        "k_merged": r.k_merged,
        "boundary_distance_z": bz,
        "boundary_distance_x": bx,
        "twice_hyperplane_systole": sys,
        "report": r,
    }));
    out.pass = r.products_paired && r.surviving == 2 * r.k_merged && bz.map(|v| v as i64) == sys && bx.map(|v| v as i64) == sys;
    Ok(out)
}

fn cmd_symmetry(lattice: &str, degree: Option<usize>) -> Result<Output, Failure> {
    let b = parse_lattice(lattice)?;
    let q = degree.unwrap_or((b.dim / 2).max(1));
    let r = symmetry_report(&b, q)?;
    let pass = r.all_verified;
    let mut out = Output::new(r);
    out.pass = pass;
    Ok(out)
}

fn cmd_starfish(g: &Global, lattice: &str, order: Order, w_max: usize) -> Result<Output, Failure> {
    let b = parse_lattice(lattice)?;
    if b.dim != 3 {
        return Err("starfish needs a 3D lattice".to_string().into());
    }
    let tc = torus_complex(&b);
    let code = css_from_complex(&tc.complex, 1)?;
    let rounds = match order {
        Order::Starfish => starfish_order(3),
        Order::Adversarial => adversarial_order(),
    };
    let circuit = starfish_circuit(&tc, &rounds)?;
    let d = min_weight_logical(&code, PauliType::Z, w_max, Some(tc.det()), None, limits(g))?;
    let cd = circuit_distance(&circuit, &code, w_max, limits(g))?;
    let hooks = hook_propagation(&circuit, &code, 0)?;
    let mut out = Output::new(json!({
        "rounds": rounds.iter().map(|(s, d)| format!("{}{}", if *s > 0 { '+' } else { '-' }, d + 1)).collect::<Vec<_>>(),
        "code_distance_z": d.weight,
        "circuit_distance": cd,
        "hooks": hooks,
    }));
    out.rows = hooks.iter().map(|h| serde_json::to_value(h).expect("serializable")).collect();
    Ok(out)
}

struct Expect {
    key: i64,
    expected: u64,
    long: bool,
}

fn cmd_tables(g: &Global, which: Table) -> Result<Output, Failure> {
    let e = |key, expected, long| Expect { key, expected, long };
    let (dim, slices, rows): (usize, i64, Vec<Expect>) = match which {
        Table::One => (3, 1, vec![e(2, 2, false), e(3, 7, false), e(4, 12, false), e(5, 27, false), e(6, 38, false), e(7, 70, true)]),
        Table::Two => (3, 2, vec![e(2, 4, false), e(3, 10, false), e(4, 16, false), e(5, 30, false), e(6, 44, false), e(7, 72, true)]),
        Table::Three => (4, 1, vec![e(2, 2, false), e(3, 9, false), e(4, 16, false), e(5, 45, true)]),
        Table::Four => (4, 2, vec![e(3, 14, false), e(4, 24, false), e(5, 54, true)]),
        Table::Shallow => return shallow_table(g),
    };
    let mut budget = SearchBudget::default();
    if let Some(m) = g.max_nodes {
        budget.max_nodes = m;
    }
    let mut out_rows = Vec::new();
    let mut pass = true;
    for r in rows.iter().filter(|r| g.long || !r.long) {
        let res = search_min_det(dim, r.key, slices, budget)?;
        let ok = res.det == r.expected;
        pass &= ok;
        out_rows.push(json!({
            "systole": r.key, "expected": r.expected, "det": res.det,
            "ratio": res.det as f64 / (r.key as f64).powi(dim as i32),
            "pass": ok, "witness": res.witnesses.first().map(|w| &w.matrix),
        }));
    }
    let mut out = Output::new(json!({"dim": dim, "min_slices": slices, "rows": out_rows}));
    out.rows = out_rows;
    out.pass = pass;
    Ok(out)
}

fn shallow_table(g: &Global) -> Result<Output, Failure> {
    let cases: [(&str, usize, bool); 2] = [("2,0,4;0,1,3;0,0,5", 3, false), ("2,0,12;0,1,8;0,0,13", 5, true)];
    let mut rows = Vec::new();
    let mut pass = true;
    for (lat, d, long) in cases {
        if long && !g.long {
            continue;
        }
        let b: LatticeBasis = lat.parse()?;
        let r = effective_distance_bell(&b, 2 * d, limits(g))?;
        let ok = r.min_half_units == Some(2 * d) && r.flux_only == Some(2 * d);
        pass &= ok;
        rows.push(json!({
            "effective_distance": d, "hnf": hnf(&b).matrix, "min_half_units": r.min_half_units,
            "flux_only": r.flux_only, "pass": ok,
        }));
    }
    let mut out = Output::new(json!({"rows": rows}));
    out.rows = rows;
    out.pass = pass;
    Ok(out)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_csv(buf: &mut String, rows: &[Value]) {
    let Some(Value::Object(first)) = rows.first() else { return };
    let keys: Vec<&String> = first.keys().collect();
    let _ = writeln!(buf, "{}", keys.iter().map(|k| csv_escape(k)).collect::<Vec<_>>().join(","));
    for r in rows {
        let _ = writeln!(buf, "{}", keys.iter().map(|k| csv_escape(&scalar_text(&r[k.as_str()]))).collect::<Vec<_>>().join(","));
    }
}

fn render(format: Format, command: &str, out: &Output) -> String {
    let mut buf = String::new();
    match format {
        Format::Json => {
            let doc = json!({"schema": SCHEMA, "command": command, "incomplete": false, "pass": out.pass, "result": out.result});
            let _ = writeln!(buf, "{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        Format::Csv => {
            if out.rows.is_empty() {
                let scalars: serde_json::Map<String, Value> = match &out.result {
                    Value::Object(m) => m.iter().filter(|(_, v)| !v.is_object() && !v.is_array()).map(|(k, v)| (k.clone(), v.clone())).collect(),
                    _ => serde_json::Map::new(),
                };
                write_csv(&mut buf, &[Value::Object(scalars)]);
            } else {
                write_csv(&mut buf, &out.rows);
            }
        }
        Format::Text => {
            if let Value::Object(m) = &out.result {
                for (k, v) in m {
                    if !v.is_object() && !(v.is_array() && !out.rows.is_empty()) {
                        let _ = writeln!(buf, "{k}: {}", scalar_text(v));
                    }
                }
            }
            for r in &out.rows {
                if let Value::Object(m) = r {
                    let _ = writeln!(buf, "{}", m.iter().map(|(k, v)| format!("{k}={}", scalar_text(v))).collect::<Vec<_>>().join(" "));
                }
            }
            let _ = writeln!(buf, "{}", if out.pass { "PASS" } else { "FAIL" });
        }
    }
    buf
}

fn write_stdout(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|()| out.flush());
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Search { .. } => "search",
        Command::Distance { .. } => "distance",
        Command::Slice { .. } => "slice",
        Command::Inject { .. } => "inject",
        Command::Surgery { .. } => "surgery",
        Command::Symmetry { .. } => "symmetry",
        Command::Starfish { .. } => "starfish",
        Command::Tables { .. } => "tables",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    if let Some(t) = g.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Search { dim, systole, slices, max_det } => cmd_search(g, *dim, *systole, *slices, *max_det),
        Command::Distance { lattice, paulis, degree, side, w_max } => {
            cmd_distance(g, lattice.as_deref(), paulis.as_deref(), *degree, *side, *w_max)
        }
        Command::Slice { lattice, effective, w_max_half } => cmd_slice(g, lattice, *effective, *w_max_half),
        Command::Inject { lattice, paulis, degree, noncss, trials } => {
            cmd_inject(g, lattice.as_deref(), paulis.as_deref(), *degree, *noncss, *trials)
        }
        Command::Surgery { lattice, row, degree, w_max } => cmd_surgery(g, lattice, *row, *degree, *w_max),
        Command::Symmetry { lattice, degree } => cmd_symmetry(lattice, *degree),
        Command::Starfish { lattice, order, w_max } => cmd_starfish(g, lattice, *order, *w_max),
        Command::Tables { which } => cmd_tables(g, *which),
    };
    let command = name(&cli.command);
    match result {
        Ok(out) => {
            write_stdout(&render(g.format, command, &out));
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(f) => {
            if g.format == Format::Json {
                let doc = json!({"schema": SCHEMA, "command": command, "incomplete": f.incomplete, "error": f.message});
                write_stdout(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable")));
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
