//! Command-line front end for the polymul engines: correctness
//! verification against the schoolbook oracle, operation-count
//! benchmarking with CSV emission, and field metadata tables.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polymul::algos::{
    char2_params, ck_params, ck_threshold, direct_dft_params, direct_dft_pick_base, dispatch,
    explain_plan, mul_auto, mul_cantor_kaltofen, mul_direct_dft_with_base, mul_naive,
    mul_schonhage_char2, mul_schonhage_strassen, Algorithm, Poly, RECURSION_CUTOFF,
};
use polymul::fields::{Field, FieldElement};
use polymul::ledger::{CostLedger, CostReport};
use polymul::meta;

#[derive(Parser, Debug)]
#[command(
    name = "polymul",
    about = "Exact polynomial multiplication engines with instrumented operation counts",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check every applicable engine against schoolbook multiplication.
    Verify(VerifyArgs),
    /// Emit one CSV row of operation counts per (engine, field, degree).
    Bench(BenchArgs),
    /// Print extension degrees, totients, DFT suitability and
    /// order-sequence candidates for a field.
    Meta(MetaArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Naive,
    Dft,
    Ss,
    Schonhage2,
    Ck,
    Auto,
}

impl EngineArg {
    pub fn all() -> [EngineArg; 6] {
        [
            EngineArg::Naive,
            EngineArg::Dft,
            EngineArg::Ss,
            EngineArg::Schonhage2,
            EngineArg::Ck,
            EngineArg::Auto,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EngineArg::Naive => "naive",
            EngineArg::Dft => "dft",
            EngineArg::Ss => "ss",
            EngineArg::Schonhage2 => "schonhage2",
            EngineArg::Ck => "ck",
            EngineArg::Auto => "auto",
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Field spec: fp:<p>, fq:<p>^<m>, or q.
    #[arg(long)]
    pub field: String,
    /// Engine to verify (default: all engines).
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    /// Degrees: a comma list (4,8,100) or an inclusive range (1..64).
    #[arg(long, default_value = "1..32")]
    pub degrees: String,
    /// Random instances per cell.
    #[arg(long, default_value_t = 10)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the decomposition each engine would use.
    #[arg(long)]
    pub explain_plan: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub field: String,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long, default_value = "16,64,256")]
    pub degrees: String,
    /// Instances per cell; operation counts are size-driven, so every
    /// instance must produce the same ledger (checked).
    #[arg(long, default_value_t = 1)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub explain_plan: bool,
}

#[derive(Args, Debug)]
pub struct MetaArgs {
    #[arg(long)]
    pub field: String,
    /// Orders to tabulate: comma list or inclusive range.
    #[arg(long, default_value = "1..16")]
    pub n: String,
    /// Largest order-sequence entry to propose.
    #[arg(long, default_value_t = 100_000)]
    pub n_max: u64,
}

pub fn parse_field(spec: &str) -> Result<Field> {
    if spec == "q" {
        return Ok(Field::rationals());
    }
    if let Some(p) = spec.strip_prefix("fp:") {
        let p: u64 = p.parse().context("invalid prime in field spec")?;
        return Field::prime(p).map_err(|e| anyhow::anyhow!("{}", e));
    }
    if let Some(rest) = spec.strip_prefix("fq:") {
        let (p, m) = rest
            .split_once('^')
            .context("extension field spec is fq:<p>^<m>")?;
        let p: u64 = p.parse().context("invalid prime in field spec")?;
        let m: u32 = m.parse().context("invalid degree in field spec")?;
        return Field::extension(p, m).map_err(|e| anyhow::anyhow!("{}", e));
    }
    bail!("field spec must be fp:<p>, fq:<p>^<m>, or q (got {:?})", spec)
}

pub fn parse_degrees(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.parse().context("invalid range start")?;
        let b: u64 = b.parse().context("invalid range end")?;
        if a < 1 || b < a {
            bail!("degree range must be 1 ≤ a ≤ b");
        }
        return Ok((a..=b).collect());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let d: u64 = part.trim().parse().context("invalid degree")?;
        if d < 1 {
            bail!("degrees must be at least 1");
        }
        out.push(d);
    }
    Ok(out)
}

/// Deterministic per-cell RNG: one instance stream per (seed, field, n,
/// trial), shared by all engines so their outputs are comparable.
fn cell_rng(seed: u64, field: &Field, n: u64, trial: u64) -> ChaCha8Rng {
    let mut h = DefaultHasher::new();
    field.to_string().hash(&mut h);
    n.hash(&mut h);
    trial.hash(&mut h);
    ChaCha8Rng::seed_from_u64(seed ^ h.finish())
}

fn sample_poly(field: &Field, n: usize, rng: &mut ChaCha8Rng) -> Poly {
    if *field == Field::rationals() {
        let coeffs: Vec<FieldElement> = (0..n)
            .map(|_| {
                let num = rng.gen_range(-99i64..=99);
                let den = loop {
                    let d = rng.gen_range(-99i64..=99);
                    if d != 0 {
                        break d;
                    }
                };
                field.rational(num, den).unwrap()
            })
            .collect();
        Poly::new(field.clone(), coeffs)
    } else {
        Poly::random(field, n, rng)
    }
}

/// Transform length an engine pads to at this degree (the N column).
fn padded_len(engine: EngineArg, field: &Field, n: u64) -> u64 {
    match engine {
        EngineArg::Naive => n,
        EngineArg::Dft => direct_dft_pick_base(field, n)
            .map(|s| direct_dft_params(n, s).transform_len)
            .unwrap_or(0),
        EngineArg::Ss => {
            if n < RECURSION_CUTOFF {
                n
            } else {
                polymul::algos::ss_params(n).padded_len
            }
        }
        EngineArg::Schonhage2 => {
            if n < RECURSION_CUTOFF {
                n
            } else {
                char2_params(n).base_len
            }
        }
        EngineArg::Ck => {
            let s = if field.characteristic() == 2 { 3 } else { 2 };
            if n < ck_threshold(s) {
                n
            } else {
                ck_params(n, s).dim
            }
        }
        EngineArg::Auto => {
            let choice = dispatch(field, n);
            match choice.algorithm {
                Algorithm::Naive => n,
                Algorithm::DirectDft => direct_dft_params(n, choice.s).transform_len,
                Algorithm::SchonhageStrassen => polymul::algos::ss_params(n).padded_len,
                Algorithm::SchonhageChar2 => char2_params(n).base_len,
                Algorithm::CantorKaltofen => ck_params(n, choice.s).dim,
            }
        }
    }
}

/// Run one engine; `Ok(None)` means the engine's preconditions are not
/// met for this field (a skip, not a failure).
fn run_engine(
    engine: EngineArg,
    a: &Poly,
    b: &Poly,
    ledger: &mut CostLedger,
) -> Result<Option<Poly>> {
    use polymul::algos::AlgoError;
    let handle = |r: std::result::Result<Poly, AlgoError>| -> Result<Option<Poly>> {
        match r {
            Ok(p) => Ok(Some(p)),
            Err(
                AlgoError::NoSuitableRoot { .. }
                | AlgoError::CharacteristicTwoRequired
                | AlgoError::CharacteristicTwoUnsupported
                | AlgoError::CharacteristicDividesBase { .. },
            ) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    match engine {
        EngineArg::Naive => Ok(Some(mul_naive(a, b, ledger))),
        EngineArg::Dft => {
            let n = a.len().max(b.len()) as u64;
            match direct_dft_pick_base(a.field(), n) {
                Some(s) => handle(mul_direct_dft_with_base(a, b, s, ledger)),
                None => Ok(None),
            }
        }
        EngineArg::Ss => handle(mul_schonhage_strassen(a, b, ledger)),
        EngineArg::Schonhage2 => handle(mul_schonhage_char2(a, b, ledger)),
        EngineArg::Ck => {
            let s = if a.field().characteristic() == 2 { 3 } else { 2 };
            handle(mul_cantor_kaltofen(a, b, s, ledger))
        }
        EngineArg::Auto => handle(mul_auto(a, b, ledger)),
    }
}

fn engine_algorithm(engine: EngineArg, field: &Field, n: u64) -> Algorithm {
    match engine {
        EngineArg::Naive => Algorithm::Naive,
        EngineArg::Dft => Algorithm::DirectDft,
        EngineArg::Ss => Algorithm::SchonhageStrassen,
        EngineArg::Schonhage2 => Algorithm::SchonhageChar2,
        EngineArg::Ck => Algorithm::CantorKaltofen,
        EngineArg::Auto => dispatch(field, n).algorithm,
    }
}

/// `verify`: exit code 0 when every run matched the oracle, 1 otherwise.
pub fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let field = parse_field(&args.field)?;
    let degrees = parse_degrees(&args.degrees)?;
    if args.trials < 1 {
        bail!("trials must be at least 1");
    }
    let engines: Vec<EngineArg> = match args.engine {
        Some(e) => vec![e],
        None => EngineArg::all().to_vec(),
    };
    let mut mismatches = 0u64;
    let mut ran: Vec<EngineArg> = Vec::new();
    let mut skipped: Vec<EngineArg> = Vec::new();
    for &engine in &engines {
        for &n in &degrees {
            if args.explain_plan {
                let s = if engine == EngineArg::Ck {
                    if field.characteristic() == 2 {
                        3
                    } else {
                        2
                    }
                } else {
                    direct_dft_pick_base(&field, n).unwrap_or(2)
                };
                writeln!(out, "# plan for engine={} n={}", engine.as_str(), n)?;
                write!(out, "{}", explain_plan(&field, n, engine_algorithm(engine, &field, n), s))?;
            }
            let mut matched = 0u32;
            let mut cell_skipped = false;
            for trial in 0..args.trials {
                let mut rng = cell_rng(args.seed, &field, n, trial as u64);
                let a = sample_poly(&field, n as usize, &mut rng);
                let b = sample_poly(&field, n as usize, &mut rng);
                let expect = mul_naive(&a, &b, &mut CostLedger::new());
                match run_engine(engine, &a, &b, &mut CostLedger::new())? {
                    Some(got) => {
                        if got == expect {
                            matched += 1;
                        } else {
                            mismatches += 1;
                        }
                    }
                    None => {
                        cell_skipped = true;
                        break;
                    }
                }
            }
            if cell_skipped {
                writeln!(
                    out,
                    "skip engine={} field={} n={} (engine preconditions not met)",
                    engine.as_str(),
                    field,
                    n
                )?;
                if !skipped.contains(&engine) {
                    skipped.push(engine);
                }
            } else {
                writeln!(
                    out,
                    "ok engine={} field={} n={} trials={} matched={}",
                    engine.as_str(),
                    field,
                    n,
                    args.trials,
                    matched
                )?;
                if !ran.contains(&engine) {
                    ran.push(engine);
                }
            }
        }
    }
    // coverage: every requested engine either ran somewhere or was skipped
    for &engine in &engines {
        assert!(
            ran.contains(&engine) || skipped.contains(&engine),
            "engine {} neither ran nor skipped",
            engine.as_str()
        );
    }
    if mismatches > 0 {
        writeln!(out, "{} mismatches", mismatches)?;
        Ok(1)
    } else {
        writeln!(out, "all engines agree with the schoolbook oracle")?;
        Ok(0)
    }
}

/// `bench`: CSV rows sorted by (engine, field, n); deterministic for a
/// fixed seed.
pub fn run_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let field = parse_field(&args.field)?;
    let degrees = parse_degrees(&args.degrees)?;
    if args.trials < 1 {
        bail!("trials must be at least 1");
    }
    let engines: Vec<EngineArg> = match args.engine {
        Some(e) => vec![e],
        None => EngineArg::all().to_vec(),
    };
    let mut rows: Vec<(String, String)> = Vec::new(); // (sort key, row)
    for &engine in &engines {
        for &n in &degrees {
            if args.explain_plan {
                writeln!(out, "# plan for engine={} n={}", engine.as_str(), n)?;
                let s = if field.characteristic() == 2 { 3 } else { 2 };
                write!(out, "{}", explain_plan(&field, n, engine_algorithm(engine, &field, n), s))?;
            }
            let mut report: Option<CostReport> = None;
            let mut skipped = false;
            for trial in 0..args.trials {
                let mut rng = cell_rng(args.seed, &field, n, trial as u64);
                let a = sample_poly(&field, n as usize, &mut rng);
                let b = sample_poly(&field, n as usize, &mut rng);
                let mut ledger = CostLedger::new();
                match run_engine(engine, &a, &b, &mut ledger)? {
                    Some(_) => {
                        let r = ledger.report(n);
                        if let Some(prev) = &report {
                            // straight-line engines: identical counts per instance
                            assert_eq!(prev.total, r.total, "op counts varied across trials");
                        }
                        report = Some(r);
                    }
                    None => {
                        skipped = true;
                        break;
                    }
                }
            }
            let key = format!("{}|{}|{:010}", engine.as_str(), field, n);
            let row = if skipped {
                format!("skipped,{},{},{},,,,,,,", engine.as_str(), field, n)
            } else {
                let r = report.expect("at least one trial ran");
                format!(
                    "ok,{}",
                    r.csv_row(engine.as_str(), &field.to_string(), padded_len(engine, &field, n))
                )
            };
            rows.push((key, row));
        }
    }
    rows.sort();
    let mut csv = String::new();
    csv.push_str("status,");
    csv.push_str(CostReport::csv_header());
    csv.push('\n');
    for (_, row) in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => {
            write!(out, "{}", csv)?;
        }
    }
    Ok(0)
}

/// `meta`: totient / extension-degree / suitability table plus
/// order-sequence candidates.
pub fn run_meta(args: &MetaArgs, out: &mut dyn Write) -> Result<i32> {
    let field = parse_field(&args.field)?;
    let orders = parse_degrees(&args.n)?;
    writeln!(out, "field {}", field)?;
    writeln!(
        out,
        "{:>8} {:>10} {:>8} {:>12} {:>10}  plan",
        "n", "phi(n)", "f_k(n)", "dft_ops<=", "c"
    )?;
    for &n in &orders {
        let phi = meta::totient(n);
        let f = match meta::degree_function(&field, n) {
            Ok(d) => d.to_string(),
            Err(_) => "undefined".to_string(),
        };
        let (ops, c, shape) = match meta::certify_suitable(&field, n, 2.0) {
            Ok((_, plan)) => {
                let c = meta::implied_constant(&plan)
                    .map(|c| format!("{:.3}", c))
                    .unwrap_or_default();
                (
                    plan.predicted_ops.to_string(),
                    c,
                    plan.render().lines().next().unwrap_or("").to_string(),
                )
            }
            Err(_) => ("-".into(), String::new(), "no root in this field".into()),
        };
        writeln!(out, "{:>8} {:>10} {:>8} {:>12} {:>10}  {}", n, phi, f, ops, c, shape)?;
    }
    writeln!(out)?;
    for cand in meta::propose_order_sequences(&field, args.n_max) {
        writeln!(out, "order-sequence candidate: {}", cand.label)?;
        match cand.verify() {
            Ok(()) => writeln!(
                out,
                "  chain verified; measured sparseness {}",
                cand.measured_sparseness()
                    .map(|s| format!("{:.2}", s))
                    .unwrap_or_else(|| "n/a".into())
            )?,
            Err(e) => writeln!(out, "  chain check failed: {}", e)?,
        }
        for entry in &cand.entries {
            writeln!(
                out,
                "  n = {:>10} = {:>6} x {:>8}  f_k = {:>6}  c = {}",
                entry.n,
                entry.ext_degree,
                entry.dft_order,
                entry
                    .f_value
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "-".into()),
                entry
                    .suitability_c
                    .map(|c| format!("{:.3}", c))
                    .unwrap_or_else(|| "-".into()),
            )?;
        }
    }
    Ok(0)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Verify(args) => run_verify(args, out),
        Command::Bench(args) => run_bench(args, out),
        Command::Meta(args) => run_meta(args, out),
    }
}
