//! Command-line front end: validates filter systems, tabulates induced
//! measures, emits CDF/packet/plot data, runs reconstruction sweeps, and
//! replays the built-in demonstration systems end to end.
//!
//! Exit codes: 0 success, 1 assertion/validation failure, 2 usage or
//! parse errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cuntz_measures::cuntz::Word;
use cuntz_measures::error::Error;
use cuntz_measures::filterbank::{self, FilterSystem};
use cuntz_measures::laurent::{self, LaurentPoly};
use cuntz_measures::measures::{self, Engine};
use cuntz_measures::nadic::is_cantor_word;
use cuntz_measures::packets::{self, PacketIndex};
use cuntz_measures::pyramid;
use cuntz_measures::{Monomial, DEFAULT_TOL};

#[derive(Parser)]
#[command(name = "cuntz-measures", version, about = "Filter banks, their Cuntz representations, and the measures they induce on N-adic intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the quadrature (unitarity) condition of a filter system.
    Validate {
        #[command(flatten)]
        filters: FilterSource,
        /// Defect tolerance for passing.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Tabulate the induced measure on all level-k cells.
    Measure {
        #[command(flatten)]
        filters: FilterSource,
        /// Vector: `p=<int>` for the Fourier basis vector e_p, or a path to a
        /// coefficient JSON file (list of [degree, re, im] triples).
        #[arg(long, default_value = "p=0")]
        vector: String,
        /// Partition level k (N^k cells).
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value_t = EngineArg::Operator)]
        engine: EngineArg,
        /// Cross-check tolerance when --engine both.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the cumulative distribution of the induced measure.
    Cdf {
        #[command(flatten)]
        filters: FilterSource,
        #[arg(long, default_value = "p=0")]
        vector: String,
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Packet utilities: coefficient-identity sweeps and packet dumps (dyadic
    /// exact case).
    Packets {
        /// Run the coefficient-identity sweep over all words up to this level.
        #[arg(long)]
        sweep: Option<u32>,
        /// Dump the packet step function with this index value as CSV.
        #[arg(long)]
        dump: Option<u64>,
        /// Digit length for --dump.
        #[arg(long, default_value_t = 3)]
        k: u32,
        /// |j| bound for the sweep.
        #[arg(long, default_value_t = 8)]
        jmax: i64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Analyze and resynthesize a signal through a depth-k subband tree.
    Reconstruct {
        #[command(flatten)]
        filters: FilterSource,
        /// Signal JSON path (object mapping index to [re, im]); a seeded
        /// random signal is used when omitted.
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        depth: u32,
        /// RNG seed for the random signal.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the subband tree as nested JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run one of the built-in end-to-end demonstrations.
    Demo {
        #[arg(value_enum)]
        which: DemoName,
        /// Deepest partition level exercised.
        #[arg(long, default_value_t = 6)]
        level: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FilterSource {
    /// Built-in system: haar, cantor3, daubechies4, permutative<N>.
    #[arg(long)]
    builtin: Option<String>,
    /// Filter-spec JSON path: {"N": n, "filters": [[[deg,re,im],...], ...]}.
    #[arg(long)]
    filter_json: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Operator,
    Spectral,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemoName {
    Haar,
    Cantor,
    Permutative,
}

/// Failures that should exit 1 (assertion/validation) vs 2 (usage/parse/IO).
enum Failure {
    Check(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_filters(source: &FilterSource) -> Result<FilterSystem, Failure> {
    if let Some(name) = &source.builtin {
        return match name.as_str() {
            "haar" => Ok(filterbank::haar()),
            "cantor3" => Ok(filterbank::cantor3()),
            "daubechies4" | "db4" => Ok(filterbank::daubechies4()),
            other => {
                if let Some(n) = other.strip_prefix("permutative") {
                    let n: usize = n
                        .parse()
                        .map_err(|_| Failure::Usage(format!("unknown builtin `{other}`")))?;
                    filterbank::permutative_shift(n).map_err(Failure::from)
                } else {
                    Err(Failure::Usage(format!("unknown builtin `{other}`")))
                }
            }
        };
    }
    let path = source
        .filter_json
        .as_ref()
        .ok_or_else(|| Failure::Usage("missing filter source".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(e.to_string()))
}

/// Parses `p=<int>` or a coefficient JSON path; returns the vector and a
/// normalization warning flag.
fn load_vector(spec: &str) -> Result<LaurentPoly, Failure> {
    if let Some(p) = spec.strip_prefix("p=") {
        let p: i64 = p
            .parse()
            .map_err(|_| Failure::Usage(format!("bad basis index in `{spec}`")))?;
        return Ok(LaurentPoly::basis(p));
    }
    let text = fs::read_to_string(spec).map_err(|e| Failure::Usage(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn load_signal(path: &PathBuf) -> Result<LaurentPoly, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(e.to_string()))?;
    let map: std::collections::BTreeMap<String, (f64, f64)> =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut terms = Vec::with_capacity(map.len());
    for (key, (re, im)) in map {
        let k: i64 = key
            .parse()
            .map_err(|_| Failure::Usage(format!("bad signal index `{key}`")))?;
        terms.push((k, Complex64::new(re, im)));
    }
    Ok(LaurentPoly::from_terms(terms))
}

fn emit(text: String, output: &Option<PathBuf>) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(e.to_string())),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { filters, tol } => {
            let fs = load_filters(&filters)?;
            let report = fs.validate(tol)?;
            println!(
                "N = {}, isometry defect = {:.3e}, completeness defect = {:.3e}, tol = {:.1e}",
                fs.n(),
                report.max_isometry_defect,
                report.max_completeness_defect,
                report.tol
            );
            if report.passed {
                println!("PASS");
                Ok(())
            } else {
                Err(Failure::Check("unitarity condition violated".into()))
            }
        }

        Command::Measure {
            filters,
            vector,
            level,
            engine,
            tol,
            format,
            output,
        } => {
            let fs = load_filters(&filters)?;
            let f = normalized_vector(&vector)?;
            if let EngineArg::Both = engine {
                let op = measures::measure_table(&fs, &f, level, Engine::Operator)?;
                let sp = measures::measure_table(&fs, &f, level, Engine::Spectral)?;
                let worst = op
                    .values()
                    .iter()
                    .zip(sp.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                eprintln!("engine cross-check: max |operator - spectral| = {worst:.3e}");
                let text = render_both_tables(&op, &sp, worst, format)?;
                emit(text, &output)?;
                if worst > tol {
                    return Err(Failure::Check(format!(
                        "engine disagreement {worst:.3e} exceeds tol {tol:.1e}"
                    )));
                }
                return Ok(());
            }
            let table = match engine {
                EngineArg::Operator => measures::measure_table(&fs, &f, level, Engine::Operator)?,
                _ => measures::measure_table(&fs, &f, level, Engine::Spectral)?,
            };
            eprintln!(
                "total mass = {:.12}, max level-{level} density = {:.6}",
                table.total(),
                table.max_density()
            );
            let text = render_table(&table, format)?;
            emit(text, &output)
        }

        Command::Cdf {
            filters,
            vector,
            level,
            format,
            output,
        } => {
            let fs = load_filters(&filters)?;
            let f = normalized_vector(&vector)?;
            let table = measures::measure_table(&fs, &f, level, Engine::Operator)?;
            let text = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    table.write_cdf_csv(&mut buf)?;
                    String::from_utf8(buf).expect("csv is utf-8")
                }
                Format::Json => {
                    let mut cum = 0.0;
                    let rows: Vec<serde_json::Value> = table
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(idx, v)| {
                            cum += v;
                            let denom = (table.n() as u64).pow(table.level());
                            serde_json::json!({
                                "right": format!("{}/{}", idx as u64 + 1, denom),
                                "cumulative": cum,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&rows).map_err(Error::from)? + "\n"
                }
            };
            emit(text, &output)
        }

        Command::Packets {
            sweep,
            dump,
            k,
            jmax,
            tol,
            output,
        } => {
            if let Some(level) = sweep {
                let mut worst = 0.0f64;
                let mut basis_worst = 0.0f64;
                let fs = filterbank::haar();
                for kk in 0..=level {
                    for idx in 0..(1u64 << kk) {
                        let a = Word::from_index(2, kk, idx)?;
                        for p in 0..(1i64 << kk) {
                            for j in -jmax..=jmax {
                                worst = worst.max(packets::check_lemma_com3(&a, p, j)?.defect);
                            }
                            let via_packets = packets::mu_p_via_packets(p, &a)?;
                            let via_basis = measures::mu_basis(&fs, p, &a)?;
                            basis_worst = basis_worst.max((via_packets - via_basis).abs());
                        }
                    }
                }
                println!("coefficient-identity sweep k <= {level}: max defect = {worst:.3e}");
                println!("packet-vs-basis measure sweep: max defect = {basis_worst:.3e}");
                if worst > tol || basis_worst > 10.0 * tol {
                    return Err(Failure::Check("packet identity sweep failed".into()));
                }
                return Ok(());
            }
            if let Some(value) = dump {
                let packet = packets::haar_packet(&PacketIndex::from_value(2, k, value)?)?;
                let mut buf = Vec::new();
                packet.write_csv(&mut buf)?;
                return emit(String::from_utf8(buf).expect("csv is utf-8"), &output);
            }
            Err(Failure::Usage("pass --sweep <k> or --dump <n>".into()))
        }

        Command::Reconstruct {
            filters,
            signal,
            depth,
            seed,
            tol,
            output,
        } => {
            let fs = load_filters(&filters)?;
            let xi = match &signal {
                Some(path) => load_signal(path)?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    laurent::random(&mut rng, 32, 16)
                }
            };
            let leaves = pyramid::analyze_tree(&fs, &xi, depth)?;
            let back = pyramid::synthesize_tree(&fs, &leaves, depth)?;
            let defect = back.sub(&xi).norm();
            println!("depth-{depth} reconstruction defect = {defect:.3e}");
            if let Some(path) = output {
                let tree = subband_tree_json(&fs, &xi, depth)?;
                fs::write(&path, serde_json::to_string_pretty(&tree).map_err(Error::from)? + "\n")
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            if defect <= tol {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "reconstruction defect {defect:.3e} exceeds tol {tol:.1e}"
                )))
            }
        }

        Command::Demo { which, level, seed } => match which {
            DemoName::Haar => demo_haar(level, seed),
            DemoName::Cantor => demo_cantor(level),
            DemoName::Permutative => demo_permutative(level),
        },
    }
}

fn normalized_vector(spec: &str) -> Result<LaurentPoly, Failure> {
    let f = load_vector(spec)?;
    if f.is_zero() {
        return Err(Failure::Usage("vector is zero".into()));
    }
    let norm = f.norm();
    if (norm - 1.0).abs() > 1e-12 {
        eprintln!("warning: vector norm {norm:.6} != 1; normalizing");
        Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
    } else {
        Ok(f)
    }
}

fn render_table(table: &measures::MeasureTable, format: Format) -> Result<String, Failure> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
        Format::Json => {
            Ok(serde_json::to_string_pretty(table).map_err(Error::from)? + "\n")
        }
    }
}

/// Both engines side by side, plus the cross-check defect.
fn render_both_tables(
    op: &measures::MeasureTable,
    sp: &measures::MeasureTable,
    worst: f64,
    format: Format,
) -> Result<String, Failure> {
    match format {
        Format::Csv => {
            let mut text = String::from("digits,left,operator,spectral\n");
            for (idx, (a, b)) in op.values().iter().zip(sp.values()).enumerate() {
                let word = Word::from_index(op.n(), op.level(), idx as u64)?;
                let cell = cuntz_measures::nadic::NadicInterval::from_word(word)?;
                text.push_str(&format!(
                    "{},{},{a},{b}\n",
                    cell.word().display(),
                    cell.fraction_strings().0
                ));
            }
            Ok(text)
        }
        Format::Json => {
            let v = serde_json::json!({
                "operator": op,
                "spectral": sp,
                "max_cross_defect": worst,
            });
            Ok(serde_json::to_string_pretty(&v).map_err(Error::from)? + "\n")
        }
    }
}

fn subband_tree_json(
    fs: &FilterSystem,
    signal: &LaurentPoly,
    depth: u32,
) -> Result<serde_json::Value, Failure> {
    fn signal_json(s: &LaurentPoly) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = s
            .terms()
            .map(|(k, c)| (k.to_string(), serde_json::json!([c.re, c.im])))
            .collect();
        serde_json::Value::Object(map)
    }
    if depth == 0 {
        return Ok(signal_json(signal));
    }
    let bands = pyramid::analyze(fs, signal)?;
    let children = bands
        .iter()
        .map(|b| subband_tree_json(fs, b, depth - 1))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(serde_json::json!({ "bands": children }))
}

struct DemoRun {
    failed: bool,
}

impl DemoRun {
    fn new() -> Self {
        Self { failed: false }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("  ok   {name}: {detail}");
        } else {
            println!("  FAIL {name}: {detail}");
            self.failed = true;
        }
    }

    fn finish(self, title: &str) -> Result<(), Failure> {
        if self.failed {
            Err(Failure::Check(format!("{title} demo failed")))
        } else {
            println!("{title}: all checks passed");
            Ok(())
        }
    }
}

fn demo_haar(level: u32, seed: u64) -> Result<(), Failure> {
    println!("Haar system: Lebesgue measure on [0,1)");
    let fs = filterbank::haar();
    let mut run = DemoRun::new();

    let report = fs.validate(1e-12)?;
    run.check(
        "validate",
        report.passed,
        format!("max defect {:.3e}", report.max_isometry_defect.max(report.max_completeness_defect)),
    );

    let e0 = LaurentPoly::basis(0);
    let eigen = measures::eigen_detect(&fs, &e0, 1e-10)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let lambda_ok = eigen.is_eigen
        && (eigen.lambdas[0] - Complex64::new(r, 0.0)).norm() < 1e-12
        && (eigen.lambdas[1] - Complex64::new(r, 0.0)).norm() < 1e-12;
    run.check(
        "joint eigenvector",
        lambda_ok,
        format!("lambda = ({:.4}, {:.4})", eigen.lambdas[0].re, eigen.lambdas[1].re),
    );

    for k in 1..=level {
        let table = measures::measure_table(&fs, &e0, k, Engine::Operator)?;
        let want = 0.5f64.powi(k as i32);
        let worst = table
            .values()
            .iter()
            .map(|v| (v - want).abs())
            .fold(0.0f64, f64::max);
        run.check(
            &format!("uniform cells k={k}"),
            worst <= 1e-10,
            format!("max |mu - 2^-{k}| = {worst:.3e}"),
        );
    }

    run.check(
        "product measure",
        measures::check_product(&fs, &e0, level.min(6), 1e-9)?,
        "p = (1/2, 1/2)".into(),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi = laurent::random(&mut rng, 32, 16);
    let defect = pyramid::reconstruction_defect(&fs, &xi, 5)?;
    run.check(
        "perfect reconstruction",
        defect <= 1e-10,
        format!("depth-5 defect {defect:.3e}"),
    );

    let intertwine = pyramid::intertwining_defect(&xi)?;
    run.check(
        "scaling intertwining",
        intertwine <= 1e-12,
        format!("defect {intertwine:.3e}"),
    );

    run.finish("haar")
}

fn demo_cantor(level: u32) -> Result<(), Failure> {
    println!("Cantor system: middle-third Cantor measure");
    let fs = filterbank::cantor3();
    let mut run = DemoRun::new();

    let report = fs.validate(1e-12)?;
    run.check("validate", report.passed, format!("max defect {:.3e}", report.max_isometry_defect));

    let e0 = LaurentPoly::basis(0);
    let eigen = measures::eigen_detect(&fs, &e0, 1e-10)?;
    run.check(
        "joint eigenvector",
        eigen.is_eigen && eigen.lambdas[1].norm() < 1e-12,
        format!(
            "lambda = ({:.4}, {:.4}, {:.4})",
            eigen.lambdas[0].re, eigen.lambdas[1].re, eigen.lambdas[2].re
        ),
    );

    // self-similarity: mu(J_k(a)) = 1/2 mu(J_{k-1}(tail)) when a_1 in {0,2},
    // zero when a_1 = 1 — the exact two-branch subdivision of the measure
    let mut previous = measures::measure_table(&fs, &e0, 0, Engine::Operator)?;
    for k in 1..=level {
        let table = measures::measure_table(&fs, &e0, k, Engine::Operator)?;
        let mut worst = 0.0f64;
        for idx in 0..table.values().len() as u64 {
            let a = Word::from_index(3, k, idx)?;
            let value = table.values()[idx as usize];
            let tail = Word::new(3, a.digits()[1..].to_vec())?;
            let want = match a.digits()[0] {
                1 => 0.0,
                _ => 0.5 * previous.value(&tail)?,
            };
            worst = worst.max((value - want).abs());
        }
        run.check(
            &format!("self-similarity k={k}"),
            worst <= 1e-10,
            format!("max defect {worst:.3e}"),
        );
        previous = table;
    }

    // support pattern at a fixed level
    let k = level.min(4);
    let table = measures::measure_table(&fs, &e0, k, Engine::Operator)?;
    let mut pattern_ok = true;
    for idx in 0..table.values().len() as u64 {
        let a = Word::from_index(3, k, idx)?;
        let v = table.values()[idx as usize];
        let want = if is_cantor_word(&a) { 0.5f64.powi(k as i32) } else { 0.0 };
        if (v - want).abs() > 1e-10 {
            pattern_ok = false;
        }
    }
    run.check(
        "support on {0,2}^k",
        pattern_ok,
        format!("2^{k} cells of mass 2^-{k}"),
    );

    run.finish("cantor")
}

fn demo_permutative(level: u32) -> Result<(), Failure> {
    println!("Permutative shift system: Dirac mass at 0");
    let fs = filterbank::permutative_shift(2)?;
    let mut run = DemoRun::new();

    let report = fs.validate(1e-12)?;
    run.check("validate", report.passed, format!("max defect {:.3e}", report.max_isometry_defect));

    let e0 = LaurentPoly::basis(0);
    let eigen = measures::eigen_detect(&fs, &e0, 1e-10)?;
    run.check(
        "joint eigenvector",
        eigen.is_eigen
            && (eigen.lambdas[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12
            && eigen.lambdas[1].norm() < 1e-12,
        format!("lambda = ({:.4}, {:.4})", eigen.lambdas[0].re, eigen.lambdas[1].re),
    );

    for k in 1..=level {
        let table = measures::measure_table(&fs, &e0, k, Engine::Operator)?;
        let at_zero = (table.values()[0] - 1.0).abs() <= 1e-12;
        let elsewhere = table.values()[1..].iter().all(|&v| v <= 1e-12);
        run.check(
            &format!("dirac cell k={k}"),
            at_zero && elsewhere,
            format!("mass at word 0^{k}: {:.12}", table.values()[0]),
        );
    }

    run.check(
        "product measure",
        measures::check_product(&fs, &e0, level.min(6), 1e-9)?,
        "p = (1, 0)".into(),
    );

    // state invariance on a small family of monomials
    let mut invariance_ok = true;
    for left in 0..2u64 {
        for right in 0..2u64 {
            let m = Monomial::new(
                Word::from_index(2, 1, left)?,
                Word::from_index(2, 1, right)?,
                Complex64::new(1.0, 0.0),
            )?;
            if !measures::check_state_invariance(&fs, &e0, &m, 1e-10)? {
                invariance_ok = false;
            }
        }
    }
    run.check("state invariance", invariance_ok, "length-1 monomials".into());

    run.finish("permutative")
}
