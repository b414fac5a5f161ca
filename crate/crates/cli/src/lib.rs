//! `rtf` command-line driver. Parsing and validation happen here; the
//! numerical work lives in `rtf_local`. Data goes to `--out` or stdout,
//! diagnostics to stderr.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use rtf_local::arith::gcd;
use rtf_local::characters::{dual_char_sum_g, gauss_sum, DirichletCharacter, LocalCharacter};
use rtf_local::charspec::parse_character_spec;
use rtf_local::global::{
    default_character, dual_kernel_eval, small_cell_local_eval, stability_threshold_scan, SmallCellValue,
};
use rtf_local::grid::derived_grid;
use rtf_local::lfunc::{ingest_newforms, second_moment, MomentOptions, NewformData};
use rtf_local::orbital::{eval_orbital, valuations, LocalPlaceData, OrbitalValue};
use rtf_local::padic::parse_rational;
use rtf_local::report::{emit, moment_csv, rows_csv, stability_csv, to_sorted_json};
use rtf_local::{CyclotomicSum, Error, ValuedRational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "rtf", version, about = "Local orbital integrals, character sums and twisted L-value moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for scans (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format (each command has its own default)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the local orbital integral at one t
    OrbitalEval(OrbitalEvalArgs),
    /// Evaluate the local orbital integral over the derived t grid
    OrbitalScan(OrbitalScanArgs),
    /// Support size and finite part of the regular orbital integral for a range of levels M
    StabilityScan(StabilityArgs),
    /// Gauss sum and the dual character sums G(m)
    Charsum(CharsumArgs),
    /// Small-cell local integral for a range of e_p(x)
    Smallcell(SmallcellArgs),
    /// Dual kernel for a range of e_p(x)
    Dualkernel(DualArgs),
    /// Second moment of twisted central values from a coefficient file
    Moment(MomentArgs),
}

#[derive(Args, Debug)]
struct PlaceArgs {
    #[arg(long)]
    p: u64,
    /// Conductor exponent; checked against the character when given
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    m: u32,
    /// Character spec, e.g. "p:3,n:1,g:1,u:1/3" or "kronecker:-4"
    #[arg(long, default_value = "trivial")]
    chi: String,
    /// Central character spec (unit part must be trivial for the ramified evaluator)
    #[arg(long)]
    omega: Option<String>,
}

#[derive(Args, Debug)]
struct OrbitalEvalArgs {
    #[command(flatten)]
    place: PlaceArgs,
    /// Invariant t as a/b
    #[arg(long, allow_hyphen_values = true)]
    t: String,
}

#[derive(Args, Debug)]
struct OrbitalScanArgs {
    #[command(flatten)]
    place: PlaceArgs,
    /// Smallest m (default: --m)
    #[arg(long)]
    m_min: Option<u32>,
    /// Largest m (default: --m)
    #[arg(long)]
    m_max: Option<u32>,
    /// Number of grid points
    #[arg(long, default_value_t = 200)]
    count: usize,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[arg(long)]
    q: Option<u64>,
    /// Character spec (default: the real primitive character of conductor q)
    #[arg(long)]
    chi: Option<String>,
    #[arg(long, default_value_t = 1)]
    m_min: u64,
    #[arg(long)]
    m_max: u64,
    /// Bound on |u| as a/b
    #[arg(long, default_value = "1")]
    umax: String,
}

#[derive(Args, Debug)]
struct CharsumArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    chi: String,
    #[arg(long, allow_hyphen_values = true)]
    m_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    m_max: Option<i64>,
}

#[derive(Args, Debug)]
struct SmallcellArgs {
    #[command(flatten)]
    place: PlaceArgs,
    /// Spectral parameter s > 0 as a/b
    #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
    s: String,
    #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
    ex_min: i64,
    #[arg(long, default_value_t = 4, allow_hyphen_values = true)]
    ex_max: i64,
}

#[derive(Args, Debug)]
struct DualArgs {
    #[command(flatten)]
    place: PlaceArgs,
    #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
    ex_min: i64,
    #[arg(long, default_value_t = 4, allow_hyphen_values = true)]
    ex_max: i64,
}

#[derive(Args, Debug)]
struct MomentArgs {
    /// JSON-lines file of newform coefficients
    #[arg(long, default_value = "data/newforms_demo.jsonl")]
    coeffs: PathBuf,
    /// Twisting character spec (default: from --q, else trivial)
    #[arg(long)]
    chi: Option<String>,
    /// Use the real primitive character of conductor q
    #[arg(long)]
    q: Option<u64>,
    /// Only forms of this level
    #[arg(long)]
    level: Option<u64>,
    /// Only forms of this weight
    #[arg(long)]
    weight: Option<u32>,
    /// Truncation of the approximate functional equation
    #[arg(long)]
    terms: Option<usize>,
    /// Discrepancy tolerance for flagging entries
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::OrbitalEval(_) => "orbital-eval",
            Command::OrbitalScan(_) => "orbital-scan",
            Command::StabilityScan(_) => "stability-scan",
            Command::Charsum(_) => "charsum",
            Command::Smallcell(_) => "smallcell",
            Command::Dualkernel(_) => "dualkernel",
            Command::Moment(_) => "moment",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::OrbitalEval(_) | Command::Charsum(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    let result = match cli.threads {
        Some(0) => Err(config("--threads must be positive")),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(config(format!("cannot start {k} workers: {e}"))),
        },
        None => dispatch(&cli),
    };
    let content = match result {
        Ok(c) => c,
        Err(CliError::Config(msg)) => {
            eprintln!("rtf {name}: configuration error: {msg}");
            eprintln!("run `rtf {name} --help` for usage");
            return EXIT_CONFIG;
        }
        Err(CliError::Core(e)) => return report_core(name, &e),
    };
    match emit(&content, cli.out.as_deref()) {
        Ok(()) => EXIT_OK,
        Err(e) => report_core(name, &e),
    }
}

fn report_core(name: &str, e: &Error) -> i32 {
    match e {
        Error::Io(_) => {
            eprintln!("rtf {name}: {e}");
            EXIT_IO
        }
        e if e.is_config() => {
            eprintln!("rtf {name}: configuration error: {e}");
            EXIT_CONFIG
        }
        e => {
            eprintln!("rtf {name}: domain error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<String> {
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    match &cli.command {
        Command::OrbitalEval(a) => orbital_eval(a, format),
        Command::OrbitalScan(a) => orbital_scan(a, format),
        Command::StabilityScan(a) => stability(a, format),
        Command::Charsum(a) => charsum(a, format),
        Command::Smallcell(a) => smallcell(a, format),
        Command::Dualkernel(a) => dualkernel(a, format),
        Command::Moment(a) => moment(a, format),
    }
}

fn rational(flag: &str, s: &str) -> CliResult<ValuedRational> {
    parse_rational(s).map_err(|e| config(format!("--{flag} {s:?}: {e}")))
}

fn local_character(spec: &str, p: u64) -> CliResult<LocalCharacter> {
    Ok(parse_character_spec(spec)?.local(p)?)
}

fn check_n(n: Option<u32>, chi: &LocalCharacter) -> CliResult<()> {
    match n {
        Some(n) if n != chi.unit.n() => Err(config(format!(
            "--n {n} does not match the character, whose conductor exponent is {}",
            chi.unit.n()
        ))),
        _ => Ok(()),
    }
}

fn place_with_m(a: &PlaceArgs, m: u32) -> CliResult<LocalPlaceData> {
    let chi = local_character(&a.chi, a.p)?;
    check_n(a.n, &chi)?;
    let omega = a.omega.as_deref().map(|s| local_character(s, a.p)).transpose()?;
    Ok(LocalPlaceData::new(a.p, m, chi, omega)?)
}

/// Approximate value plus the exact element of Q(ζ_L).
fn cyc_json(c: &CyclotomicSum) -> Value {
    let zero = c.is_zero();
    let (re, im) = if zero { (0.0, 0.0) } else { c.to_complex() };
    json!({
        "zero": zero,
        "re": re,
        "im": im,
        "exact": {
            "order": c.order(),
            "coeffs": c.coeffs().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "scalar": c.scalar().to_string(),
        },
    })
}

fn orbital_json(t: &ValuedRational, v: &OrbitalValue) -> Value {
    let trace: Vec<Value> = v
        .branch_trace
        .iter()
        .map(|b| {
            json!({
                "k": b.k,
                "r1": b.r1,
                "r2": b.r2,
                "branch": b.branch.to_string(),
                "partial": cyc_json(&b.partial),
            })
        })
        .collect();
    json!({
        "t": t.to_string(),
        "value": cyc_json(&v.value),
        "support_hit": v.support_hit,
        "branch_trace": trace,
    })
}

fn json_out(v: &Value) -> CliResult<String> {
    Ok(to_sorted_json(v)?)
}

fn orbital_eval(a: &OrbitalEvalArgs, format: Format) -> CliResult<String> {
    let place = place_with_m(&a.place, a.place.m)?;
    let t = rational("t", &a.t)?;
    let v = eval_orbital(&place, &t)?;
    match format {
        Format::Json => json_out(&orbital_json(&t, &v)),
        Format::Csv => {
            let (re, im) = v.value.to_complex();
            Ok(rows_csv(
                &["p", "n", "m", "t", "value_re", "value_im", "support_hit"],
                &[(place.p, place.n, place.m, t.to_string(), re, im, v.support_hit)],
            )?)
        }
    }
}

fn orbital_scan(a: &OrbitalScanArgs, format: Format) -> CliResult<String> {
    let lo = a.m_min.unwrap_or(a.place.m);
    let hi = a.m_max.unwrap_or(a.place.m.max(lo));
    if lo > hi {
        return Err(config(format!("--m-min {lo} exceeds --m-max {hi}")));
    }
    if a.count == 0 {
        return Err(config("--count must be positive"));
    }
    let places = (lo..=hi).map(|m| place_with_m(&a.place, m)).collect::<CliResult<Vec<_>>>()?;
    let ts = derived_grid(a.place.p, places[0].n, a.count);
    let jobs: Vec<(&LocalPlaceData, &ValuedRational)> = places.iter().flat_map(|pl| ts.iter().map(move |t| (pl, t))).collect();
    let values = jobs
        .par_iter()
        .map(|(pl, t)| eval_orbital(pl, t))
        .collect::<rtf_local::Result<Vec<_>>>()?;
    match format {
        Format::Csv => {
            let rows: Vec<_> = jobs
                .iter()
                .zip(&values)
                .map(|((pl, t), v)| {
                    let (e_t, e1) = valuations(pl.p, t);
                    let (re, im) = v.value.to_complex();
                    (pl.p, pl.n, pl.m, t.to_string(), e_t, e1, re, im, v.support_hit, pl.predicted_support(t))
                })
                .collect();
            Ok(rows_csv(
                &["p", "n", "m", "t", "e_t", "e_1mt", "value_re", "value_im", "support_hit", "predicted_support"],
                &rows,
            )?)
        }
        Format::Json => {
            let rows: Vec<Value> = jobs
                .iter()
                .zip(&values)
                .map(|((pl, t), v)| {
                    let mut o = orbital_json(t, v);
                    o["p"] = json!(pl.p);
                    o["n"] = json!(pl.n);
                    o["m"] = json!(pl.m);
                    o["predicted_support"] = json!(pl.predicted_support(t));
                    o
                })
                .collect();
            json_out(&Value::Array(rows))
        }
    }
}

fn dirichlet(spec: &str) -> CliResult<DirichletCharacter> {
    Ok(parse_character_spec(spec)?.dirichlet()?)
}

fn stability(a: &StabilityArgs, format: Format) -> CliResult<String> {
    let chi = match (&a.chi, a.q) {
        (Some(s), q) => {
            let c = dirichlet(s)?;
            if q.is_some_and(|q| q != c.modulus()) {
                return Err(config(format!("--q {} disagrees with the character modulus {}", q.unwrap_or(0), c.modulus())));
            }
            c
        }
        (None, Some(q)) => default_character(q)?,
        (None, None) => return Err(config("give --q or --chi")),
    };
    if a.m_min == 0 || a.m_min > a.m_max {
        return Err(config(format!("need 1 <= --m-min <= --m-max, got {}..{}", a.m_min, a.m_max)));
    }
    let u_max = rational("umax", &a.umax)?;
    if !(u_max.as_big() > &BigRational::from_integer(0.into())) {
        return Err(config("--umax must be positive"));
    }
    let report = stability_threshold_scan(&chi, a.m_min..=a.m_max, &u_max)?;
    match format {
        Format::Csv => Ok(stability_csv(&report)?),
        Format::Json => Ok(to_sorted_json(&report)?),
    }
}

fn charsum(a: &CharsumArgs, format: Format) -> CliResult<String> {
    let chi = local_character(&a.chi, a.p)?;
    check_n(a.n, &chi)?;
    let place = LocalPlaceData::new(a.p, 0, chi, None)?;
    let n = place.n as i64;
    let (lo, hi) = (a.m_min.unwrap_or(0), a.m_max.unwrap_or(2 * n + 1));
    if lo > hi {
        return Err(config(format!("--m-min {lo} exceeds --m-max {hi}")));
    }
    let gs: Vec<(i64, CyclotomicSum)> = (lo..=hi).map(|m| (m, dual_char_sum_g(&place, m))).collect();
    match format {
        Format::Csv => {
            let rows: Vec<_> = gs
                .iter()
                .map(|(m, g)| {
                    let (re, im) = g.to_complex();
                    (*m, re, im, g.abs())
                })
                .collect();
            Ok(rows_csv(&["m", "G_re", "G_im", "G_abs"], &rows)?)
        }
        Format::Json => {
            let tau = if n >= 1 {
                let g = gauss_sum(&place.chi.unit)?;
                let norm = g.mul(&g.conj());
                json!({ "value": cyc_json(&g), "abs2": cyc_json(&norm) })
            } else {
                Value::Null
            };
            let g: Vec<Value> = gs.iter().map(|(m, g)| json!({ "m": m, "value": cyc_json(g) })).collect();
            json_out(&json!({ "p": a.p, "n": n, "gauss_sum": tau, "G": g }))
        }
    }
}

fn ex_range(lo: i64, hi: i64) -> CliResult<std::ops::RangeInclusive<i64>> {
    if lo > hi {
        return Err(config(format!("--ex-min {lo} exceeds --ex-max {hi}")));
    }
    Ok(lo..=hi)
}

fn smallcell(a: &SmallcellArgs, format: Format) -> CliResult<String> {
    let place = place_with_m(&a.place, a.place.m)?;
    let s = rational("s", &a.s)?;
    let values = ex_range(a.ex_min, a.ex_max)?
        .map(|e| Ok((e, small_cell_local_eval(&place, e, s.as_big())?)))
        .collect::<CliResult<Vec<(i64, SmallCellValue)>>>()?;
    match format {
        Format::Csv => {
            let rows: Vec<_> = values
                .iter()
                .map(|(e, v)| {
                    let (re, im) = v.to_complex();
                    (*e, s.to_string(), re, im, v.exponent.to_string())
                })
                .collect();
            Ok(rows_csv(&["e_x", "s", "value_re", "value_im", "p_exponent"], &rows)?)
        }
        Format::Json => {
            let rows: Vec<Value> = values
                .iter()
                .map(|(e, v)| {
                    let (re, im) = v.to_complex();
                    json!({ "e_x": e, "re": re, "im": im, "coeff": cyc_json(&v.coeff), "p_exponent": v.exponent.to_string() })
                })
                .collect();
            json_out(&json!({ "p": place.p, "n": place.n, "m": place.m, "s": s.to_string(), "rows": rows }))
        }
    }
}

fn dualkernel(a: &DualArgs, format: Format) -> CliResult<String> {
    let place = place_with_m(&a.place, a.place.m)?;
    let values = ex_range(a.ex_min, a.ex_max)?
        .map(|e| Ok((e, dual_kernel_eval(&place, e)?)))
        .collect::<CliResult<Vec<_>>>()?;
    match format {
        Format::Csv => {
            let rows: Vec<_> = values
                .iter()
                .map(|(e, v)| {
                    let (re, im) = v.to_complex();
                    (*e, re, im)
                })
                .collect();
            Ok(rows_csv(&["e_x", "value_re", "value_im"], &rows)?)
        }
        Format::Json => {
            let rows: Vec<Value> = values.iter().map(|(e, v)| json!({ "e_x": e, "value": cyc_json(v) })).collect();
            json_out(&json!({ "p": place.p, "n": place.n, "m": place.m, "rows": rows }))
        }
    }
}

fn moment(a: &MomentArgs, format: Format) -> CliResult<String> {
    let chi = match (&a.chi, a.q) {
        (Some(s), None) => dirichlet(s)?,
        (None, Some(q)) => default_character(q)?,
        (None, None) => DirichletCharacter::trivial(),
        (Some(_), Some(_)) => return Err(config("give at most one of --chi and --q")),
    };
    if !(a.tol > 0.0) {
        return Err(config("--tol must be positive"));
    }
    if a.terms == Some(0) {
        return Err(config("--terms must be positive"));
    }
    let forms = ingest_newforms(&a.coeffs)?;
    let mut families: BTreeMap<(u64, u32), Vec<NewformData>> = BTreeMap::new();
    for f in forms {
        if a.level.is_some_and(|l| l != f.level) || a.weight.is_some_and(|k| k != f.weight) {
            continue;
        }
        families.entry((f.level, f.weight)).or_default().push(f);
    }
    let q = chi.modulus();
    let opts = MomentOptions {
        terms: a.terms,
        tol: a.tol,
        ..MomentOptions::default()
    };
    let mut reports = vec![];
    for ((level, k), fs) in &families {
        if gcd(*level, q) != 1 {
            eprintln!("rtf moment: skipping level {level} weight {k}, not coprime to q = {q}");
            continue;
        }
        let r = second_moment(fs, &chi, &opts)?;
        if r.flagged {
            eprintln!("rtf moment: level {level} weight {k}: an entry exceeds the discrepancy tolerance {}", a.tol);
        }
        reports.push(r);
    }
    match format {
        Format::Csv => Ok(moment_csv(&reports)?),
        Format::Json => Ok(to_sorted_json(&reports)?),
    }
}
