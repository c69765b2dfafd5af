use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use weyl_core::bicyclic::{
    checked_mul, embedding_check, f1_eval, f2_cocycle_partners, f2_eval, idempotent_collapse, lemma5_check,
    verify_f2_window, BicyclicElement, BicyclicF1, BicyclicF2, CollapseRelation,
};
use weyl_core::certify::{
    certify, distality_probe, parse_pairs, parse_shifts, recover_f1, verify_certificate, DistalityCertificate,
    F1Recovery, SampledFunction, DEFAULT_TOLERANCE,
};
use weyl_core::ergodic::{birkhoff_average, equidistribution_report, parse_checkpoints};
use weyl_core::ring::{certify_ring, Character, RingPolynomial, RingSpec};
use weyl_core::selftest::{selftest, SelftestConfig, DEFAULT_SEED};
use weyl_core::semigroup::{
    character_span_dimension, characters, idempotent_fixed_check, solve_f1, solve_fk_with_limit, FiniteSemigroup,
    DEFAULT_DEPTH_LIMIT,
};
use weyl_core::torus::{resolve_literals, PhaseLiteral};
use weyl_core::{Mode, PhasePolynomial, TorusPoint};

/// Certify, verify and probe Weyl-type distal functions.
#[derive(Parser)]
#[command(name = "weyl", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "WEYL_THREADS")]
    threads: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CsvOrJson {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Certificate chain for a phase polynomial.
    Certify {
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        /// Convert an exact polynomial to float before certifying.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Check a certificate against sampled values.
    Verify {
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        source: SampleSource,
        #[arg(long, default_value = "-10..10", allow_hyphen_values = true)]
        shifts: String,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Recover `λⁿλ₁` from samples or reject.
    RecoverF1 {
        #[command(flatten)]
        source: SampleSource,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Finite-window separation of translate pairs.
    ProbeDistal {
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        /// Pairs `a:b`, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        pairs: String,
        #[arg(long, default_value_t = 64)]
        shift_range: i64,
        #[arg(long, default_value_t = 16)]
        truncation: i64,
    },
    /// Bicyclic monoid arithmetic and its F₁/F₂ families.
    #[command(subcommand)]
    Bicyclic(BicyclicCmd),
    /// Finite semigroups given by multiplication tables.
    #[command(subcommand)]
    Finsgp(FinsgpCmd),
    /// Polynomial characters on products of cyclic rings.
    #[command(subcommand)]
    Ring(RingCmd),
    /// Birkhoff averages of e(p(n)).
    Avg {
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long)]
        n: String,
        #[arg(long, default_value = "")]
        checkpoints: String,
        #[arg(long, value_enum, default_value = "csv")]
        out: CsvOrJson,
    },
    /// Histogram and discrepancy of frac(p(n)).
    Equidist {
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        #[arg(long, default_value = "")]
        checkpoints: String,
    },
    /// Bundled invariant suite.
    Selftest {
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: TextOrJson,
    },
}

#[derive(Args)]
struct SampleSource {
    /// Sampled function JSON.
    #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
    samples: Option<PathBuf>,
    /// Sample this polynomial instead.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: Option<String>,
    #[arg(long, default_value_t = 100)]
    half_width: i64,
}

impl SampleSource {
    fn load(&self) -> Result<SampledFunction> {
        match (&self.samples, &self.coeffs) {
            (Some(path), _) => Ok(serde_json::from_str(&read(path)?).context("malformed samples")?),
            (None, Some(c)) => {
                if !(0..=1 << 20).contains(&self.half_width) {
                    bail!("half width must be in 0..=2^20");
                }
                Ok(SampledFunction::from_polynomial(&PhasePolynomial::parse(c)?, self.half_width))
            }
            (None, None) => bail!("either --samples or --coeffs is required"),
        }
    }
}

#[derive(Subcommand)]
enum BicyclicCmd {
    /// `qᵐ¹pⁿ¹ · qᵐ²pⁿ²`.
    Mul { m1: u64, n1: u64, m2: u64, n2: u64 },
    EvalF1 {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
        m: u64,
        n: u64,
    },
    EvalF2 {
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
        m: u64,
        n: u64,
    },
    /// Cocycle identities on `m, n ≤ W`; a fixed battery when no phases are given.
    VerifyF2 {
        #[arg(long, default_value_t = 20)]
        window: u64,
        #[arg(long, requires_all = ["mu", "nu"])]
        lambda: Option<String>,
        #[arg(long, requires_all = ["lambda", "nu"])]
        mu: Option<String>,
        #[arg(long, requires_all = ["lambda", "mu"])]
        nu: Option<String>,
    },
    /// F₁ on a window after imposing p²=p or q²=q.
    Collapse {
        #[arg(long, default_value = "p")]
        relation: String,
        #[arg(long, default_value_t = 6)]
        window: u64,
    },
}

#[derive(Subcommand)]
enum FinsgpCmd {
    SolveF1 { table: PathBuf },
    CheckIdempotents { table: PathBuf },
    Fk {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
        limit: usize,
        table: PathBuf,
    },
    Characters { table: PathBuf },
}

#[derive(Subcommand)]
enum RingCmd {
    Certify {
        /// Cyclic factors, e.g. `12` or `4,6`.
        #[arg(long)]
        moduli: String,
        /// Character weights, `a` or `a:b`.
        #[arg(long = "char")]
        character: String,
        /// Coefficients `c₀,c₁,…`; entries `a` or `a:b`.
        #[arg(long)]
        poly: String,
    },
}

/// What a subcommand produced: the text to emit and whether its check held.
struct Outcome {
    text: String,
    pass: bool,
}

impl Outcome {
    fn json(v: &impl Serialize, pass: bool) -> Result<Self> {
        Ok(Outcome {
            text: serde_json::to_string(v)? + "\n",
            pass,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_table(path: &Path) -> Result<FiniteSemigroup> {
    Ok(FiniteSemigroup::parse(&read(path)?)?)
}

/// Phases given together must share a mode.
fn phases<const N: usize>(raw: [&str; N]) -> Result<[TorusPoint; N]> {
    let lits = raw.iter().map(|s| s.parse::<PhaseLiteral>()).collect::<weyl_core::Result<Vec<_>>>()?;
    let points = resolve_literals(lits)?;
    Ok(points.try_into().expect("one point per literal"))
}

fn count(s: &str) -> Result<u64> {
    let v = parse_checkpoints(s)?;
    match v.as_slice() {
        [n] => Ok(*n),
        _ => bail!("expected a single count, got {s:?}"),
    }
}

fn checkpoints(s: &str) -> Result<Vec<u64>> {
    if s.trim().is_empty() {
        Ok(Vec::new())
    } else {
        Ok(parse_checkpoints(s)?)
    }
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(T::to_string).collect()
}

fn f2_battery() -> Vec<[&'static str; 3]> {
    vec![
        ["1/3", "1/5", "2/7"],
        ["0", "1/2", "1/2"],
        ["5/12", "7/9", "1/11"],
        ["0.1", "0.7071067811865476", "0.6180339887498949"],
    ]
}

fn f2_report(f: &BicyclicF2, window: u64) -> Value {
    let (fp, fq) = f2_cocycle_partners(f);
    let report = verify_f2_window(f, window);
    let lemma5 = lemma5_check(&fp) && lemma5_check(&fq);
    json!({
        "lambda": f.lambda(),
        "mu": f.mu(),
        "nu": f.nu(),
        "f_p": {"mu": fp.mu(), "nu": fp.nu()},
        "f_q": {"mu": fq.mu(), "nu": fq.nu()},
        "partners_lemma5": lemma5,
        "report": report,
    })
}

fn run_bicyclic(cmd: BicyclicCmd) -> Result<Outcome> {
    match cmd {
        BicyclicCmd::Mul { m1, n1, m2, n2 } => {
            let (a, b) = (BicyclicElement::new(m1, n1), BicyclicElement::new(m2, n2));
            let ab = checked_mul(a, b).context("product exponent exceeds 2^64 - 1")?;
            Outcome::json(&ab, true)
        }
        BicyclicCmd::EvalF1 { mu, nu, m, n } => {
            let [mu, nu] = phases([&mu, &nu])?;
            let f = BicyclicF1::new(mu, nu)?;
            let x = BicyclicElement::new(m, n);
            Outcome::json(
                &json!({"element": x, "value": f1_eval(&f, x), "lemma5": lemma5_check(&f)}),
                true,
            )
        }
        BicyclicCmd::EvalF2 { lambda, mu, nu, m, n } => {
            let [l, mu, nu] = phases([&lambda, &mu, &nu])?;
            let f = BicyclicF2::new(l, mu, nu)?;
            let x = BicyclicElement::new(m, n);
            Outcome::json(&json!({"element": x, "value": f2_eval(&f, x)}), true)
        }
        BicyclicCmd::VerifyF2 { window, lambda, mu, nu } => {
            if window == 0 || window > 1 << 12 {
                bail!("window must be in 1..=4096");
            }
            let triples: Vec<[String; 3]> = match (lambda, mu, nu) {
                (Some(l), Some(m), Some(n)) => vec![[l, m, n]],
                _ => f2_battery().into_iter().map(|t| t.map(String::from)).collect(),
            };
            let mut results = Vec::new();
            let mut pass = true;
            for [l, m, n] in &triples {
                let [l, m, n] = phases([l, m, n])?;
                let f = BicyclicF2::new(l, m.clone(), n.clone())?;
                let mut entry = f2_report(&f, window);
                let f1 = BicyclicF1::new(m, n)?;
                let embedded = embedding_check(&f1, window);
                entry["embedding"] = json!(embedded);
                pass &= embedded
                    && entry["partners_lemma5"].as_bool() == Some(true)
                    && entry["report"]["pass"].as_bool() == Some(true);
                results.push(entry);
            }
            Outcome::json(&json!({"window": window, "pass": pass, "cases": results}), pass)
        }
        BicyclicCmd::Collapse { relation, window } => {
            let relation: CollapseRelation = relation.parse()?;
            if window > 64 {
                bail!("collapse window must be at most 64");
            }
            Outcome::json(&idempotent_collapse(relation, window)?, true)
        }
    }
}

fn run_finsgp(cmd: FinsgpCmd) -> Result<Outcome> {
    match cmd {
        FinsgpCmd::SolveF1 { table } => {
            let s = load_table(&table)?;
            let sol = solve_f1(&s);
            Outcome::json(
                &json!({
                    "size": s.size(),
                    "labels": s.labels(),
                    "dimension": sol.dimension(),
                    "torsion_orders": strings(&sol.torsion_orders()),
                    "constants_only": sol.is_constants_only(),
                    "solution": sol,
                }),
                true,
            )
        }
        FinsgpCmd::CheckIdempotents { table } => {
            let s = load_table(&table)?;
            let report = idempotent_fixed_check(&s, &solve_f1(&s));
            let pass = report.pass;
            Outcome::json(&report, pass)
        }
        FinsgpCmd::Fk { k, limit, table } => {
            let s = load_table(&table)?;
            let fam = solve_fk_with_limit(&s, k, limit)?;
            let pass = fam.nesting.iter().all(|&b| b);
            Outcome::json(
                &json!({
                    "dimension": fam.family.dimension(),
                    "torsion_orders": strings(&fam.family.torsion_orders()),
                    "family": fam,
                }),
                pass,
            )
        }
        FinsgpCmd::Characters { table } => {
            let s = load_table(&table)?;
            let chars: Vec<Vec<String>> = characters(&s)?.iter().map(|c| strings(c)).collect();
            let dim = character_span_dimension(&s)?;
            Outcome::json(&json!({"count": chars.len(), "span_dimension": dim, "characters": chars}), true)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Certify { coeffs, mode } => {
            let mut p = PhasePolynomial::parse(&coeffs)?;
            match (mode.map(Mode::from), p.mode()) {
                (Some(Mode::Float), Mode::Exact) => p = p.to_float(),
                (Some(Mode::Exact), Mode::Float) => bail!("decimal coefficients cannot be certified in exact mode"),
                _ => {}
            }
            Outcome::json(&certify(&p), true)
        }
        Command::Verify { cert, source, shifts, tol } => {
            if tol.is_nan() || tol <= 0.0 {
                bail!("tolerance must be positive");
            }
            let cert: DistalityCertificate = serde_json::from_str(&read(&cert)?).context("malformed certificate")?;
            let f = source.load()?;
            let report = verify_certificate(&f, &cert, &parse_shifts(&shifts)?, tol)?;
            let pass = report.pass;
            Outcome::json(&report, pass)
        }
        Command::RecoverF1 { source, tol } => {
            if tol.is_nan() || tol <= 0.0 {
                bail!("tolerance must be positive");
            }
            let r = recover_f1(&source.load()?, tol)?;
            let pass = matches!(r, F1Recovery::Accepted { .. });
            Outcome::json(&r, pass)
        }
        Command::ProbeDistal {
            coeffs,
            pairs,
            shift_range,
            truncation,
        } => {
            let p = PhasePolynomial::parse(&coeffs)?;
            let report = distality_probe(&p, &parse_pairs(&pairs)?, shift_range, truncation)?;
            let pass = report.min_delta > 0.0;
            Outcome::json(&report, pass)
        }
        Command::Bicyclic(cmd) => run_bicyclic(cmd),
        Command::Finsgp(cmd) => run_finsgp(cmd),
        Command::Ring(RingCmd::Certify { moduli, character, poly }) => {
            let ring = RingSpec::parse(&moduli)?;
            let chi = Character::parse(&ring, &character)?;
            let q = RingPolynomial::parse(&ring, &poly)?;
            let cert = certify_ring(&ring, &chi, &q);
            let pass = cert.replay.pass;
            Outcome::json(&cert, pass)
        }
        Command::Avg {
            coeffs,
            n,
            checkpoints: cps,
            out,
        } => {
            let p = PhasePolynomial::parse(&coeffs)?;
            let series = birkhoff_average(&p, count(&n)?, &checkpoints(&cps)?)?;
            match out {
                CsvOrJson::Csv => Ok(Outcome {
                    text: series.to_csv(),
                    pass: true,
                }),
                CsvOrJson::Json => Outcome::json(&series, true),
            }
        }
        Command::Equidist {
            coeffs,
            n,
            bins,
            checkpoints: cps,
        } => {
            let p = PhasePolynomial::parse(&coeffs)?;
            Outcome::json(&equidistribution_report(&p, count(&n)?, bins, &checkpoints(&cps)?)?, true)
        }
        Command::Selftest { mode, seed, format } => {
            let report = selftest(&SelftestConfig {
                mode: mode.into(),
                seed,
            });
            if let Some(bad) = report.first_failure() {
                eprintln!(
                    "first failure: {}::{} {}",
                    bad.module,
                    bad.name,
                    serde_json::to_string(&bad.counterexample)?
                );
            }
            match format {
                TextOrJson::Text => Ok(Outcome {
                    text: report.to_text(),
                    pass: report.pass,
                }),
                TextOrJson::Json => Outcome::json(&report, report.pass),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<bool> {
        if let Some(t) = cli.threads {
            if t == 0 {
                bail!("--threads must be at least 1");
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .context("cannot configure thread pool")?;
        }
        let outcome = run(cli.command)?;
        match &cli.output {
            Some(path) => fs::write(path, &outcome.text).with_context(|| format!("cannot write {}", path.display()))?,
            None => std::io::stdout().write_all(outcome.text.as_bytes())?,
        }
        Ok(outcome.pass)
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
