//! `chaitin` — command-line driver for the ensemble library.
//!
//! Exit codes: 0 success, 1 verification failure, 2 domain error,
//! 3 resource bound, 4 unreachable tolerance.  Errors print exactly one
//! machine-parsable line to stderr: `error code=N kind=SLUG: message`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use chaitin_ensemble::bits::BitString;
use chaitin_ensemble::codec;
use chaitin_ensemble::machine::builtin::{counting_machine_spec, expander_machine};
use chaitin_ensemble::machine::{
    run_traced, run_with_work, MachineSpec, RunOutcome, TraceStep, DEFAULT_STEP_LIMIT,
};
use chaitin_ensemble::numerics::Epsilon;
use chaitin_ensemble::partition::{
    brute, partition_asymptotic, partition_exact, PartitionError, PartitionResult,
};
use chaitin_ensemble::prefix::{
    decay_estimate, generation_stats, kraft_partial_sum, CodeFamily, DecayModel, PrefixError,
};
use chaitin_ensemble::thermo::{avg_length_asymptotic, thermo_point};

const LN_2: f64 = std::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------------

/// A terminal failure, carrying the process exit code.
enum Fail {
    /// Bad input: unparsable values, out-of-range parameters, malformed
    /// tables or config files.
    Domain(String),
    /// The request exceeds a hard implementation bound.
    Resource(String),
    /// The requested accuracy cannot be certified.
    Tolerance(String),
    /// `verify` found failing checks.
    Verify(usize),
}

impl Fail {
    fn code(&self) -> i32 {
        match self {
            Fail::Verify(_) => 1,
            Fail::Domain(_) => 2,
            Fail::Resource(_) => 3,
            Fail::Tolerance(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Fail::Verify(_) => "verify",
            Fail::Domain(_) => "domain",
            Fail::Resource(_) => "resource-bound",
            Fail::Tolerance(_) => "tolerance-unreachable",
        }
    }

    fn message(&self) -> String {
        match self {
            Fail::Verify(n) => format!("{n} check(s) failed"),
            Fail::Domain(m) | Fail::Resource(m) | Fail::Tolerance(m) => m.clone(),
        }
    }
}

impl From<PartitionError> for Fail {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::ToleranceUnreachable { .. } => Fail::Tolerance(e.to_string()),
            PartitionError::ExponentTooLarge { .. } => Fail::Resource(e.to_string()),
            PartitionError::LiteralOutOfRange { .. } | PartitionError::InvalidTolerance { .. } => {
                Fail::Domain(e.to_string())
            }
        }
    }
}

impl From<codec::CodecError> for Fail {
    fn from(e: codec::CodecError) -> Self {
        match e {
            codec::CodecError::EnumerationBound { .. } => Fail::Resource(e.to_string()),
            codec::CodecError::InsufficientBits { .. } => Fail::Domain(e.to_string()),
        }
    }
}

impl From<PrefixError> for Fail {
    fn from(e: PrefixError) -> Self {
        match e {
            PrefixError::EnumerationBound { .. } => Fail::Resource(e.to_string()),
            PrefixError::SeriesTruncation { .. } => Fail::Tolerance(e.to_string()),
            PrefixError::DegenerateFit { .. } => Fail::Domain(e.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "chaitin",
    about = "Ensemble of self-delimiting counting programs: simulate, encode, measure",
    version
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Config file with `key = value` lines (keys: tol, step_limit).
    /// Command-line flags override file values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Asymptotic,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    /// The counting code (the machine's own program set).
    Counting,
    /// Run-terminated code: a run of `order` ones ends the word.
    Fibonacci,
    /// Depth-calibrated run-terminated code with power-law masses.
    GeneralizedFibonacci,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuiltinArg {
    /// The program-reading counting machine.
    Counting,
    /// The unary expander (ignores the program tape).
    Expander,
}

#[derive(Args)]
struct EpsArgs {
    /// Inverse-temperature offset above the critical point, as a decimal.
    #[arg(long, value_name = "X", conflicts_with_all = ["eps_pow2", "eps_pow2_range"])]
    eps: Option<f64>,
    /// Offset exactly 2^-E (decimal exponent, any size).
    #[arg(long, value_name = "E", conflicts_with = "eps_pow2_range")]
    eps_pow2: Option<BigUint>,
    /// Grid of offsets 2^-j for j = A, A+S, ..., <= B.
    #[arg(long, value_name = "A:B:S")]
    eps_pow2_range: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a value as its self-delimiting code word.
    Encode {
        /// The value, in decimal (any size).
        n: String,
    },
    /// Decode the leading code word of a bit string.
    Decode {
        /// Bits, e.g. 1110011010; trailing bits beyond the word are ignored.
        bits: String,
    },
    /// List every code word up to a length.
    Enumerate {
        /// Maximum word length in bits (hard cap 30).
        #[arg(long, value_name = "L")]
        max_len: u32,
    },
    /// Level-by-level census of a prefix-free code tree.
    PrefixStats {
        #[arg(long, value_enum, value_name = "FAMILY")]
        family: FamilyArg,
        /// Terminator run length for the fibonacci family.
        #[arg(long, default_value_t = 2, value_name = "K")]
        order: u32,
        /// Deepest level to report.
        #[arg(long, value_name = "L")]
        max_level: u32,
        /// Also fit the decay of the word masses over LMIN:LMAX
        /// (plain format only).
        #[arg(long, value_name = "LMIN:LMAX")]
        decay: Option<String>,
    },
    /// Normalization sum of the program ensemble near the critical point.
    Partition {
        #[command(flatten)]
        eps: EpsArgs,
        /// Certified absolute error budget (default 1e-9).
        #[arg(long, value_name = "T")]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
    },
    /// Free energy, mean program length, and heat capacity.
    Thermo {
        #[command(flatten)]
        eps: EpsArgs,
    },
    /// Run a two-tape machine on a program.
    ///
    /// Positional arguments: TABLE PROGRAM (a table file and the program
    /// bits), or just PROGRAM together with --builtin.
    Simulate {
        /// TABLE PROGRAM, or PROGRAM with --builtin.
        args: Vec<String>,
        /// Use a built-in machine instead of a table file.
        #[arg(long, value_enum, value_name = "NAME")]
        builtin: Option<BuiltinArg>,
        /// Pre-load the work tape with these bits (head at the first).
        #[arg(long, value_name = "BITS")]
        work: Option<String>,
        /// Step budget (default 10000000).
        #[arg(long, value_name = "N")]
        step_limit: Option<u64>,
        /// Print every step.
        #[arg(long)]
        trace: bool,
    },
    /// Cross-module consistency suite; exits nonzero on any failure.
    Verify,
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

#[derive(Default)]
struct FileConfig {
    tol: Option<f64>,
    step_limit: Option<u64>,
}

fn load_config(path: &PathBuf) -> Result<FileConfig, Fail> {
    let text = fs::read_to_string(path)
        .map_err(|e| Fail::Domain(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Fail::Domain(format!(
                "config line {}: expected `key = value`, found {line:?}",
                idx + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "tol" => {
                cfg.tol = Some(value.parse().map_err(|_| {
                    Fail::Domain(format!("config line {}: bad tol {value:?}", idx + 1))
                })?)
            }
            "step_limit" => {
                cfg.step_limit = Some(value.parse().map_err(|_| {
                    Fail::Domain(format!("config line {}: bad step_limit {value:?}", idx + 1))
                })?)
            }
            other => {
                return Err(Fail::Domain(format!(
                    "config line {}: unknown key {other:?}",
                    idx + 1
                )))
            }
        }
    }
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// Epsilon handling
// ---------------------------------------------------------------------------

/// One grid point: how the offset was given and its library form.
struct EpsPoint {
    eps: Epsilon,
    /// `Some(j)` when given as 2^-j.
    pow2: Option<BigUint>,
}

impl EpsPoint {
    fn beta(&self) -> f64 {
        LN_2 + self.eps.to_f64()
    }

    /// Plain-text rendering of the offset itself.
    fn label(&self) -> String {
        match &self.pow2 {
            Some(j) => format!("2^-{j}"),
            None => match self.eps {
                Epsilon::Literal(x) => format!("{x}"),
                _ => unreachable!("literal points carry literals"),
            },
        }
    }

    /// CSV cell for the first column.
    fn csv_cell(&self) -> String {
        match &self.pow2 {
            Some(j) => j.to_string(),
            None => self.label(),
        }
    }

    fn json_key_value(&self) -> (&'static str, serde_json::Value) {
        match &self.pow2 {
            Some(j) => ("eps_pow2", json!(j.to_string())),
            None => ("eps", json!(self.eps.to_f64())),
        }
    }
}

fn eps_points(args: &EpsArgs) -> Result<Vec<EpsPoint>, Fail> {
    let given = [
        args.eps.is_some(),
        args.eps_pow2.is_some(),
        args.eps_pow2_range.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if given != 1 {
        return Err(Fail::Domain(
            "give exactly one of --eps, --eps-pow2, --eps-pow2-range".into(),
        ));
    }
    if let Some(x) = args.eps {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Fail::Domain(format!("--eps must be a finite offset >= 0, got {x}")));
        }
        return Ok(vec![EpsPoint { eps: Epsilon::Literal(x), pow2: None }]);
    }
    if let Some(j) = &args.eps_pow2 {
        return Ok(vec![EpsPoint {
            eps: Epsilon::DyadicNeg(j.clone()),
            pow2: Some(j.clone()),
        }]);
    }
    let spec = args.eps_pow2_range.as_ref().unwrap();
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, s] = parts.as_slice() else {
        return Err(Fail::Domain(format!("--eps-pow2-range wants A:B:S, got {spec:?}")));
    };
    let parse = |t: &str| {
        t.parse::<u64>()
            .map_err(|_| Fail::Domain(format!("--eps-pow2-range: bad integer {t:?}")))
    };
    let (a, b, s) = (parse(a)?, parse(b)?, parse(s)?);
    if s == 0 || b < a {
        return Err(Fail::Domain(format!(
            "--eps-pow2-range needs A <= B and S >= 1, got {a}:{b}:{s}"
        )));
    }
    Ok((a..=b)
        .step_by(s as usize)
        .map(|j| EpsPoint { eps: Epsilon::pow2_neg(j), pow2: Some(BigUint::from(j)) })
        .collect())
}

// ---------------------------------------------------------------------------
// Subcommand bodies (each returns the full stdout text)
// ---------------------------------------------------------------------------

fn cmd_encode(n: &str, format: Format) -> Result<String, Fail> {
    let n = BigUint::from_str(n)
        .map_err(|_| Fail::Domain(format!("encode wants a decimal value, got {n:?}")))?;
    let word = codec::encode(&n);
    Ok(match format {
        Format::Plain => format!("{}\n", word.bits),
        Format::Csv => format!("n,bits,length\n{},{},{}\n", word.n, word.bits, word.length),
        Format::Json => format!(
            "{}\n",
            json!({
                "n": word.n.to_string(),
                "bits": word.bits.to_string(),
                "length": word.length,
                "chain": word.chain,
            })
        ),
    })
}

fn cmd_decode(bits: &str, format: Format) -> Result<String, Fail> {
    let bits: BitString = bits
        .parse()
        .map_err(|e| Fail::Domain(format!("decode wants a 0/1 string: {e}")))?;
    let d = codec::decode(&bits).map_err(Fail::from)?;
    Ok(match format {
        Format::Plain => format!("n = {}\nconsumed = {}\n", d.n, d.consumed),
        Format::Csv => format!("n,consumed\n{},{}\n", d.n, d.consumed),
        Format::Json => {
            format!("{}\n", json!({ "n": d.n.to_string(), "consumed": d.consumed }))
        }
    })
}

fn cmd_enumerate(max_len: u32, format: Format) -> Result<String, Fail> {
    let words = codec::enumerate_programs(max_len).map_err(Fail::from)?;
    let mut out = String::new();
    match format {
        Format::Plain => {
            for (bits, n) in &words {
                writeln!(out, "{bits} {n}").unwrap();
            }
        }
        Format::Csv => {
            out.push_str("bits,n\n");
            for (bits, n) in &words {
                writeln!(out, "{bits},{n}").unwrap();
            }
        }
        Format::Json => {
            let rows: Vec<_> = words
                .iter()
                .map(|(bits, n)| json!({ "bits": bits.to_string(), "n": n.to_string() }))
                .collect();
            writeln!(out, "{}", json!(rows)).unwrap();
        }
    }
    Ok(out)
}

fn family_of(arg: FamilyArg, order: u32) -> Result<CodeFamily, Fail> {
    Ok(match arg {
        FamilyArg::Counting => CodeFamily::Counting,
        FamilyArg::Fibonacci => {
            if order < 2 {
                return Err(Fail::Domain(format!(
                    "fibonacci order must be at least 2, got {order}"
                )));
            }
            CodeFamily::Fibonacci { order }
        }
        FamilyArg::GeneralizedFibonacci => CodeFamily::GeneralizedFibonacci,
    })
}

fn cmd_prefix_stats(
    family: FamilyArg,
    order: u32,
    max_level: u32,
    decay: Option<&str>,
    format: Format,
) -> Result<String, Fail> {
    if max_level == 0 {
        return Err(Fail::Domain("--max-level must be at least 1".into()));
    }
    let family = family_of(family, order)?;
    // One level deeper so every row gets its completed word mass
    // (sum of P up to l, which equals Q at l+1).
    let stats = generation_stats(&family, max_level + 1).map_err(Fail::from)?;
    let mut out = String::new();
    match format {
        Format::Plain => {
            for s in &stats[..max_level as usize] {
                let kraft = &stats[s.level as usize].q_l;
                writeln!(
                    out,
                    "l={} n_red={} m_black={} w_white={} P_l={} Q_l={} kraft_partial={}",
                    s.level, s.n_red, s.m_black, s.w_white, s.p_l, s.q_l, kraft
                )
                .unwrap();
            }
            if let Some(window) = decay {
                let (lmin, lmax) = window
                    .split_once(':')
                    .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
                    .ok_or_else(|| {
                        Fail::Domain(format!("--decay wants LMIN:LMAX, got {window:?}"))
                    })?;
                if lmin < 8 || lmax <= lmin {
                    return Err(Fail::Domain(format!(
                        "--decay window needs 8 <= LMIN < LMAX, got {lmin}:{lmax}"
                    )));
                }
                let fit = decay_estimate(&family, lmin, lmax).map_err(Fail::from)?;
                match fit.model {
                    DecayModel::Exponential => {
                        writeln!(out, "decay_model = exponential").unwrap();
                        writeln!(out, "rate = {}", fit.rate_or_alpha).unwrap();
                    }
                    DecayModel::PowerLaw => {
                        writeln!(out, "decay_model = power-law").unwrap();
                        writeln!(out, "alpha = {}", fit.rate_or_alpha).unwrap();
                    }
                }
            }
        }
        Format::Csv | Format::Json => {
            if decay.is_some() {
                return Err(Fail::Domain("--decay is a plain-format report".into()));
            }
            if format == Format::Csv {
                out.push_str("l,n_red,m_black,w_white,P_l,Q_l,kraft_partial\n");
                for s in &stats[..max_level as usize] {
                    let kraft = stats[s.level as usize].q_l.to_f64();
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        s.level,
                        s.n_red,
                        s.m_black,
                        s.w_white,
                        s.p_l.to_f64(),
                        s.q_l.to_f64(),
                        kraft
                    )
                    .unwrap();
                }
            } else {
                let rows: Vec<_> = stats[..max_level as usize]
                    .iter()
                    .map(|s| {
                        json!({
                            "l": s.level,
                            "n_red": s.n_red.to_string(),
                            "m_black": s.m_black.to_string(),
                            "w_white": s.w_white.to_string(),
                            "P_l": s.p_l.to_f64(),
                            "Q_l": s.q_l.to_f64(),
                            "kraft_partial": stats[s.level as usize].q_l.to_f64(),
                        })
                    })
                    .collect();
                writeln!(out, "{}", json!(rows)).unwrap();
            }
        }
    }
    Ok(out)
}

/// Partition results for one grid point.
struct PartitionRow {
    point: EpsPoint,
    exact: Option<PartitionResult>,
    asym: Option<f64>,
}

fn cmd_partition(
    eps: &EpsArgs,
    tol: f64,
    method: MethodArg,
    format: Format,
) -> Result<String, Fail> {
    let points = eps_points(eps)?;
    let mut rows = Vec::with_capacity(points.len());
    for point in points {
        let exact = if method != MethodArg::Asymptotic {
            Some(partition_exact(&point.eps, tol).map_err(Fail::from)?)
        } else {
            None
        };
        let asym = if method != MethodArg::Exact {
            Some(partition_asymptotic(&point.eps))
        } else {
            None
        };
        rows.push(PartitionRow { point, exact, asym });
    }

    let mut out = String::new();
    match format {
        Format::Plain => {
            for (i, row) in rows.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                writeln!(out, "eps = {}", row.point.label()).unwrap();
                writeln!(out, "beta = {}", row.point.beta()).unwrap();
                if let Some(r) = &row.exact {
                    writeln!(out, "z_exact = {}", r.total).unwrap();
                    writeln!(out, "one_minus_z_exact = {}", r.one_minus_total).unwrap();
                    writeln!(out, "k_max_used = {}", r.k_max_used).unwrap();
                    writeln!(out, "truncation_bound = {}", r.truncation_bound).unwrap();
                    writeln!(out, "method = {}", method_name(r)).unwrap();
                }
                if let Some(z) = row.asym {
                    writeln!(out, "z_asymptotic = {z}").unwrap();
                    writeln!(out, "one_minus_z_asym = {}", 1.0 - z).unwrap();
                }
            }
        }
        Format::Csv => {
            let eps_col = if rows.first().is_some_and(|r| r.point.pow2.is_some()) {
                "eps_pow2"
            } else {
                "eps"
            };
            writeln!(
                out,
                "{eps_col},beta,z_exact,z_asymptotic,one_minus_z_exact,one_minus_z_asym,\
                 k_max_used,truncation_bound"
            )
            .unwrap();
            for row in &rows {
                let (ze, de, km, tb) = match &row.exact {
                    Some(r) => (
                        r.total.to_string(),
                        r.one_minus_total.to_string(),
                        r.k_max_used.to_string(),
                        r.truncation_bound.to_string(),
                    ),
                    None => Default::default(),
                };
                let (za, da) = match row.asym {
                    Some(z) => (z.to_string(), (1.0 - z).to_string()),
                    None => Default::default(),
                };
                writeln!(
                    out,
                    "{},{},{ze},{za},{de},{da},{km},{tb}",
                    row.point.csv_cell(),
                    row.point.beta()
                )
                .unwrap();
            }
        }
        Format::Json => {
            let objs: Vec<_> = rows
                .iter()
                .map(|row| {
                    let (key, value) = row.point.json_key_value();
                    let mut obj = serde_json::Map::new();
                    obj.insert(key.into(), value);
                    obj.insert("beta".into(), json!(row.point.beta()));
                    if let Some(r) = &row.exact {
                        obj.insert("z_exact".into(), json!(r.total));
                        obj.insert("one_minus_z_exact".into(), json!(r.one_minus_total));
                        obj.insert("k_max_used".into(), json!(r.k_max_used));
                        obj.insert("truncation_bound".into(), json!(r.truncation_bound));
                        obj.insert("method".into(), json!(method_name(r)));
                    }
                    if let Some(z) = row.asym {
                        obj.insert("z_asymptotic".into(), json!(z));
                        obj.insert("one_minus_z_asym".into(), json!(1.0 - z));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            writeln!(out, "{}", json!(objs)).unwrap();
        }
    }
    Ok(out)
}

fn method_name(r: &PartitionResult) -> &'static str {
    use chaitin_ensemble::partition::Method;
    match r.method {
        Method::Exact => "exact",
        Method::Hybrid => "hybrid",
        Method::A5Approx => "integral",
        Method::Asymptotic => "asymptotic",
    }
}

fn cmd_thermo(eps: &EpsArgs, format: Format) -> Result<String, Fail> {
    let points = eps_points(eps)?;
    let mut rows = Vec::with_capacity(points.len());
    for point in points {
        let x = point.eps.to_f64();
        if x <= 0.0 {
            return Err(Fail::Domain(format!(
                "thermo needs an offset representable as a positive float, got {}",
                point.label()
            )));
        }
        let t = thermo_point(x);
        let asym = avg_length_asymptotic(&point.eps);
        rows.push((point, t, asym));
    }
    let mut out = String::new();
    match format {
        Format::Plain => {
            for (i, (point, t, asym)) in rows.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                writeln!(out, "eps = {}", point.label()).unwrap();
                writeln!(out, "beta = {}", t.beta).unwrap();
                writeln!(out, "z = {}", t.z).unwrap();
                writeln!(out, "free_energy = {}", t.free_energy).unwrap();
                writeln!(out, "avg_length = {}", t.avg_length).unwrap();
                writeln!(out, "heat_capacity = {}", t.heat_capacity).unwrap();
                writeln!(out, "avg_length_asym = {asym}").unwrap();
            }
        }
        Format::Csv => {
            let eps_col = if rows.first().is_some_and(|(p, ..)| p.pow2.is_some()) {
                "eps_pow2"
            } else {
                "eps"
            };
            writeln!(out, "{eps_col},beta,z,F,avg_length,heat_capacity,avg_length_asym")
                .unwrap();
            for (point, t, asym) in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{asym}",
                    point.csv_cell(),
                    t.beta,
                    t.z,
                    t.free_energy,
                    t.avg_length,
                    t.heat_capacity
                )
                .unwrap();
            }
        }
        Format::Json => {
            let objs: Vec<_> = rows
                .iter()
                .map(|(point, t, asym)| {
                    let (key, value) = point.json_key_value();
                    let mut obj = serde_json::Map::new();
                    obj.insert(key.into(), value);
                    obj.insert("beta".into(), json!(t.beta));
                    obj.insert("z".into(), json!(t.z));
                    obj.insert("free_energy".into(), json!(t.free_energy));
                    obj.insert("avg_length".into(), json!(t.avg_length));
                    obj.insert("heat_capacity".into(), json!(t.heat_capacity));
                    obj.insert("avg_length_asym".into(), json!(asym));
                    serde_json::Value::Object(obj)
                })
                .collect();
            writeln!(out, "{}", json!(objs)).unwrap();
        }
    }
    Ok(out)
}

fn outcome_fields(outcome: &RunOutcome) -> Vec<(&'static str, String)> {
    match outcome {
        RunOutcome::Halted { output, program_bits_read, steps } => vec![
            ("outcome", "halted".into()),
            ("output", output.to_string()),
            ("program_bits_read", program_bits_read.to_string()),
            ("steps", steps.to_string()),
        ],
        RunOutcome::ProgramExhausted { bits_available } => vec![
            ("outcome", "program-exhausted".into()),
            ("bits_available", bits_available.to_string()),
        ],
        RunOutcome::StepLimitExceeded { steps } => vec![
            ("outcome", "step-limit-exceeded".into()),
            ("steps", steps.to_string()),
        ],
        RunOutcome::InvalidWrite { step, position } => vec![
            ("outcome", "invalid-write".into()),
            ("step", step.to_string()),
            ("position", position.to_string()),
        ],
    }
}

fn trace_line(t: &TraceStep) -> String {
    format!(
        "trace step={} state={} work_pos={} prog_pos={} read_work={} read_prog={} \
         wrote={} moved={} advanced={}",
        t.step, t.state, t.work_pos, t.prog_pos, t.read_work, t.read_prog, t.wrote, t.moved,
        t.advanced
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    args: &[String],
    builtin: Option<BuiltinArg>,
    work: Option<&str>,
    step_limit: u64,
    trace: bool,
    format: Format,
) -> Result<String, Fail> {
    let (spec, program_text) = match builtin {
        Some(which) => {
            let [program] = args else {
                return Err(Fail::Domain(
                    "with --builtin, simulate wants exactly one positional: PROGRAM".into(),
                ));
            };
            let spec = match which {
                BuiltinArg::Counting => counting_machine_spec(),
                BuiltinArg::Expander => expander_machine(),
            };
            (spec, program.as_str())
        }
        None => {
            let [table, program] = args else {
                return Err(Fail::Domain(
                    "simulate wants TABLE PROGRAM, or PROGRAM with --builtin".into(),
                ));
            };
            let text = fs::read_to_string(table)
                .map_err(|e| Fail::Domain(format!("cannot read table {table}: {e}")))?;
            let spec: MachineSpec = text
                .parse()
                .map_err(|e| Fail::Domain(format!("table {table}: {e}")))?;
            (spec, program.as_str())
        }
    };
    let program: BitString = program_text
        .parse()
        .map_err(|e| Fail::Domain(format!("program must be a 0/1 string: {e}")))?;
    let work_bits = match work {
        Some(w) => Some(
            w.parse::<BitString>()
                .map_err(|e| Fail::Domain(format!("--work must be a 0/1 string: {e}")))?,
        ),
        None => None,
    };

    let (outcome, steps) = if trace {
        let (outcome, steps) = run_traced(&spec, work_bits.as_ref(), &program, step_limit);
        (outcome, Some(steps))
    } else {
        match &work_bits {
            Some(w) => (run_with_work(&spec, w, &program, step_limit), None),
            None => (
                chaitin_ensemble::machine::run(&spec, &program, step_limit),
                None,
            ),
        }
    };

    let mut out = String::new();
    match format {
        Format::Plain => {
            if let Some(steps) = &steps {
                for t in steps {
                    writeln!(out, "{}", trace_line(t)).unwrap();
                }
            }
            for (key, value) in outcome_fields(&outcome) {
                writeln!(out, "{key} = {value}").unwrap();
            }
        }
        Format::Csv => {
            if trace {
                return Err(Fail::Domain("--trace is a plain/json report".into()));
            }
            let fields = outcome_fields(&outcome);
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            writeln!(out, "{}", header.join(",")).unwrap();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        Format::Json => {
            let mut obj = serde_json::Map::new();
            for (key, value) in outcome_fields(&outcome) {
                // Numbers stay numbers where they parse; names stay strings.
                let v = value
                    .parse::<i64>()
                    .map(|n| json!(n))
                    .unwrap_or_else(|_| json!(value));
                obj.insert(key.into(), v);
            }
            if let Some(steps) = &steps {
                let lines: Vec<_> = steps
                    .iter()
                    .map(|t| {
                        json!({
                            "step": t.step,
                            "state": t.state,
                            "work_pos": t.work_pos,
                            "prog_pos": t.prog_pos,
                            "read_work": t.read_work.to_string(),
                            "read_prog": t.read_prog.to_string(),
                            "wrote": t.wrote.to_string(),
                            "moved": t.moved.to_string(),
                            "advanced": t.advanced,
                        })
                    })
                    .collect();
                obj.insert("trace".into(), json!(lines));
            }
            writeln!(out, "{}", serde_json::Value::Object(obj)).unwrap();
        }
    }

    // A blown step budget is a resource failure; every other outcome is a
    // legitimate simulation result.  The report still goes to stdout —
    // stderr carries only the one-line error.
    if let RunOutcome::StepLimitExceeded { steps } = outcome {
        print!("{out}");
        return Err(Fail::Resource(format!("step budget {steps} exhausted")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// verify: cross-module consistency
// ---------------------------------------------------------------------------

fn cmd_verify() -> Result<String, Fail> {
    let mut out = String::new();
    let mut failures = 0usize;
    let mut check = |name: &str, result: Result<String, String>| match result {
        Ok(detail) => writeln!(out, "ok   {name}: {detail}").unwrap(),
        Err(detail) => {
            failures += 1;
            writeln!(out, "FAIL {name}: {detail}").unwrap();
        }
    };

    check("codec-round-trip", {
        let mut bad = 0;
        for n in 0u64..=5000 {
            let n = BigUint::from(n);
            let w = codec::encode(&n);
            match codec::decode(&w.bits) {
                Ok(d) if d.n == n && d.consumed == w.bits.len() => {}
                _ => bad += 1,
            }
        }
        if bad == 0 {
            Ok("values 0..=5000 survive encode/decode".into())
        } else {
            Err(format!("{bad} values break the round trip"))
        }
    });

    check("machine-decoder-agreement", {
        let spec = counting_machine_spec();
        let mut bad = 0;
        for len in 0..=11u32 {
            for v in 0u64..1 << len {
                let program =
                    BitString::from_bits((0..len).rev().map(|i| v >> i & 1 == 1));
                let outcome =
                    chaitin_ensemble::machine::run(&spec, &program, DEFAULT_STEP_LIMIT);
                let agree = match codec::decode(&program) {
                    Ok(d) => matches!(
                        &outcome,
                        RunOutcome::Halted { output, program_bits_read, .. }
                            if BigUint::from(output.len()) == d.n
                                && *program_bits_read == d.consumed
                                && output.iter().all(|b| b)
                    ),
                    Err(_) => {
                        outcome
                            == RunOutcome::ProgramExhausted { bits_available: program.len() }
                    }
                };
                if !agree {
                    bad += 1;
                }
            }
        }
        if bad == 0 {
            Ok("all programs to 11 bits agree".into())
        } else {
            Err(format!("{bad} programs disagree"))
        }
    });

    check("census-identities", {
        let families = [
            CodeFamily::Counting,
            CodeFamily::Fibonacci { order: 2 },
            CodeFamily::Fibonacci { order: 3 },
            CodeFamily::GeneralizedFibonacci,
        ];
        let mut bad = 0;
        for family in &families {
            match generation_stats(family, 15) {
                Ok(stats) => {
                    for s in &stats[..14] {
                        if &s.n_red + &s.m_black + &s.w_white != BigUint::from(1u32) << s.level
                        {
                            bad += 1;
                        }
                    }
                    for pair in stats.windows(2) {
                        if pair[0].p_l != &pair[1].q_l - &pair[0].q_l {
                            bad += 1;
                        }
                    }
                }
                Err(_) => bad += 1,
            }
        }
        let kraft_ok = kraft_partial_sum(&CodeFamily::Counting, 13)
            .map(|k| k == chaitin_ensemble::Dyadic::new(BigUint::from(31u32), 5))
            .unwrap_or(false);
        if !kraft_ok {
            bad += 1;
        }
        if bad == 0 {
            Ok("colour counts tile and word masses telescope for 4 families".into())
        } else {
            Err(format!("{bad} identity violations"))
        }
    });

    check("partition-vs-direct-sum", {
        let mut worst: f64 = 0.0;
        for eps in [1.0, 0.5, 0.1] {
            match partition_exact(&Epsilon::Literal(eps), 1e-12) {
                Ok(r) => {
                    let direct = brute::partition_value(eps);
                    worst = worst.max((r.total - direct).abs() / direct);
                }
                Err(e) => return Err(Fail::from(e)),
            }
        }
        if worst <= 1e-10 {
            Ok(format!("worst relative gap {worst:.3e}"))
        } else {
            Err(format!("worst relative gap {worst:.3e} exceeds 1e-10"))
        }
    });

    check("critical-point-layers", {
        match partition_exact(&Epsilon::Literal(0.0), 1e-6) {
            Ok(r) => {
                let limits = [7.0 / 8.0, 1.0 / 16.0];
                let mut bad = 0;
                for (k, limit) in limits.iter().enumerate() {
                    if (r.per_k[k].1.to_f64() - limit).abs() > 1e-9 {
                        bad += 1;
                    }
                }
                for k in 2..=6usize {
                    if (r.per_k[k].1.to_f64() - 2f64.powi(-(k as i32 + 3))).abs() > 1e-9 {
                        bad += 1;
                    }
                }
                if bad == 0 && (r.total - 1.0).abs() <= 1e-6 {
                    Ok(format!("total {} at the critical point", r.total))
                } else {
                    Err(format!("{bad} layers off their limits, total {}", r.total))
                }
            }
            Err(e) => return Err(Fail::from(e)),
        }
    });

    check("asymptotic-band", {
        let d200 = 1.0 - partition_asymptotic(&Epsilon::pow2_neg(200));
        let d65536 = 1.0 - partition_asymptotic(&Epsilon::pow2_neg(65536));
        if (d200 - 0.0076).abs() <= 0.0005 && (d65536 - 0.0058).abs() <= 0.0003 {
            Ok(format!("1-Z = {d200:.6} at 2^-200, {d65536:.6} at 2^-65536"))
        } else {
            Err(format!("1-Z = {d200:.6} at 2^-200, {d65536:.6} at 2^-65536"))
        }
    });

    if failures > 0 {
        print!("{out}");
        return Err(Fail::Verify(failures));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

fn dispatch(cli: &Cli) -> Result<String, Fail> {
    let cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    match &cli.cmd {
        Cmd::Encode { n } => cmd_encode(n, cli.format),
        Cmd::Decode { bits } => cmd_decode(bits, cli.format),
        Cmd::Enumerate { max_len } => cmd_enumerate(*max_len, cli.format),
        Cmd::PrefixStats { family, order, max_level, decay } => {
            cmd_prefix_stats(*family, *order, *max_level, decay.as_deref(), cli.format)
        }
        Cmd::Partition { eps, tol, method } => {
            let tol = tol.or(cfg.tol).unwrap_or(1e-9);
            cmd_partition(eps, tol, *method, cli.format)
        }
        Cmd::Thermo { eps } => cmd_thermo(eps, cli.format),
        Cmd::Simulate { args, builtin, work, step_limit, trace } => {
            let step_limit = step_limit.or(cfg.step_limit).unwrap_or(DEFAULT_STEP_LIMIT);
            cmd_simulate(args, *builtin, work.as_deref(), step_limit, *trace, cli.format)
        }
        Cmd::Verify => cmd_verify(),
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => print!("{out}"),
        Err(fail) => {
            eprintln!("error code={} kind={}: {}", fail.code(), fail.kind(), fail.message());
            std::process::exit(fail.code());
        }
    }
}
