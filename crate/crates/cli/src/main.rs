use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use starflux::acceptance::{self, AcceptanceOptions};
use starflux::config::{parse_int_list, parse_rational_list, EngineConfig, OutputFormat};
use starflux::dynamics::{exp_derivation, Derivation};
use starflux::equivalence::{check_flux_invariance, EquivalenceOperator};
use starflux::fedosov::FedosovProduct;
use starflux::flux::{gamma_generators, rotation_report, LoopDescriptor};
use starflux::formal::Rational;
use starflux::star::{check_associativity, star_table, Moyal, StarProduct};
use starflux::torus::{class_to_json, fun_from_json, fun_to_json, mode_box, random_fun, rat_from_json, rat_to_json, TorusFun};
use starflux::Error;

#[derive(Parser)]
#[command(name = "starflux", version, about = "Exact star products, automorphism flows and flux on the symplectic torus")]
struct Cli {
    #[command(flatten)]
    engine: Engine,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Engine {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    config: Option<String>,
    /// truncation order K
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    dmax: Option<usize>,
    /// Ω coefficients C1,C2,… (rationals such as 1/2)
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, global = true)]
    probe_bound: Option<i64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    format: Option<String>,
    /// shorthand for --format json
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Which {
    Moyal,
    Fedosov,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Associator of seeded random triples
    AssociativityCheck {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        max_mode: i64,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        product: Which,
    },
    /// C_r(e_m, e_n) for the given mode pairs, written "m1,m2:n1,n2;…"
    StarTable {
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        pairs: String,
        #[arg(long, value_enum, default_value_t = Which::Fedosov)]
        product: Which,
    },
    /// Fedosov product with flat connection and Ω = 0 against the Moyal formula
    FedosovVsMoyal {
        /// mode bound |m|∞
        #[arg(long, default_value_t = 2)]
        modes: i64,
    },
    /// Deformed flux of the rotation loop along v
    FluxRotation {
        #[arg(long, allow_hyphen_values = true)]
        v: String,
    },
    /// Flux group generators for each Ω in a sweep file
    GammaTable {
        #[arg(long)]
        omega_sweep: String,
    },
    /// Action of exp((1/ν)[H, ·]) on probes e_m
    HeisenbergDemo {
        /// H as function JSON, inline or a file path
        #[arg(long = "H")]
        h: String,
    },
    /// Deformed flux before and after an equivalence T
    EquivCheck {
        /// equivalence operator JSON file
        #[arg(long = "T")]
        t: String,
        #[arg(long = "loop", allow_hyphen_values = true)]
        loop_v: String,
        #[arg(long, value_enum, default_value_t = Which::Fedosov)]
        base: Which,
    },
    /// Acceptance criteria 1 to 11
    Acceptance {
        /// comma-separated criterion numbers
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

struct Report {
    json: Value,
    text: String,
    passed: bool,
}

fn engine_config(e: &Engine) -> Result<EngineConfig, Failure> {
    let mut c = match &e.config {
        Some(path) => {
            let s = fs::read_to_string(path).map_err(|err| Failure::Usage(format!("cannot read {path}: {err}")))?;
            let v: Value = serde_json::from_str(&s).map_err(|err| Failure::Usage(format!("{path}: {err}")))?;
            EngineConfig::from_json(&v)?
        }
        None => EngineConfig::default(),
    };
    if let Some(k) = e.k {
        c.order = k;
    }
    if e.dmax.is_some() {
        c.dmax = e.dmax;
    }
    if let Some(o) = &e.omega {
        c.omega = parse_rational_list(o)?;
    }
    if let Some(p) = e.probe_bound {
        c.probe_bound = p;
    }
    if let Some(s) = e.seed {
        c.seed = s;
    }
    if let Some(f) = &e.format {
        c.format = OutputFormat::parse(f)?;
    }
    if e.json {
        c.format = OutputFormat::Json;
    }
    c.validate()?;
    Ok(c)
}

fn products(c: &EngineConfig, which: Which) -> Result<Vec<Box<dyn StarProduct>>, Failure> {
    let mut out: Vec<Box<dyn StarProduct>> = Vec::new();
    if which != Which::Fedosov {
        out.push(Box::new(Moyal::new(c.dim, c.order)));
    }
    if which != Which::Moyal {
        out.push(Box::new(c.fedosov_product()?));
    }
    Ok(out)
}

fn mode(s: &str, dim: usize) -> Result<Vec<i64>, Failure> {
    let m = parse_int_list(s)?;
    if m.len() != dim {
        return Err(Failure::Usage(format!("mode {s} does not have {dim} entries")));
    }
    Ok(m)
}

fn read_json(arg: &str) -> Result<Value, Failure> {
    let text = if arg.trim_start().starts_with(['{', '[']) {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
}

fn associativity_check(c: &EngineConfig, count: usize, max_mode: i64, which: Which) -> Result<Report, Failure> {
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut passed = true;
    for p in products(c, which)? {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let mut failures = 0;
        for _ in 0..count {
            let f = random_fun(&mut rng, c.dim, c.order, max_mode, 3, false);
            let g = random_fun(&mut rng, c.dim, c.order, max_mode, 3, false);
            let h = random_fun(&mut rng, c.dim, c.order, max_mode, 3, false);
            if !check_associativity(p.as_ref(), &f, &g, &h).is_zero() {
                failures += 1;
            }
        }
        passed &= failures == 0;
        text.push_str(&format!("{}: {failures} of {count} triples with nonzero associator\n", p.name()));
        rows.push(json!({"product": p.name(), "triples": count, "failures": failures}));
    }
    Ok(Report { json: json!({"truncation": c.order, "seed": c.seed, "results": rows, "passed": passed}), text, passed })
}

fn star_table_cmd(c: &EngineConfig, pairs: &str, which: Which) -> Result<Report, Failure> {
    let which = if which == Which::Both { Which::Fedosov } else { which };
    let mut list = Vec::new();
    for item in pairs.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (m, n) = item.split_once(':').ok_or_else(|| Failure::Usage(format!("pair {item} is not m:n")))?;
        list.push((mode(m, c.dim)?, mode(n, c.dim)?));
    }
    let p = products(c, which)?.remove(0);
    let table = star_table(p.as_ref(), &list);
    let mut rows = Vec::new();
    let mut text = String::new();
    for ((m, n), cs) in list.iter().zip(&table) {
        rows.push(json!({"m": m, "n": n, "cochains": cs.iter().map(fun_to_json).collect::<Vec<_>>()}));
        for (r, f) in cs.iter().enumerate() {
            text.push_str(&format!("C_{r}({m:?}, {n:?}) = {f}\n"));
        }
    }
    Ok(Report { json: json!({"product": p.name(), "truncation": c.order, "table": rows}), text, passed: true })
}

fn fedosov_vs_moyal(c: &EngineConfig, bound: i64) -> Result<Report, Failure> {
    let flat = EngineConfig { omega: vec![], christoffel: Default::default(), probe_bound: bound, ..c.clone() };
    let fed = flat.fedosov_product()?;
    let moy = Moyal::new(c.dim, c.order);
    let mut nonzero = Vec::new();
    let mut pairs = 0;
    for m in mode_box(c.dim, bound) {
        for n in mode_box(c.dim, bound) {
            let (em, en) = (TorusFun::exp_mode(&m, c.order), TorusFun::exp_mode(&n, c.order));
            let r = fed.star(&em, &en).sub(&moy.star(&em, &en));
            pairs += 1;
            if !r.is_zero() {
                nonzero.push(json!({"m": m, "n": n, "residual": fun_to_json(&r)}));
            }
        }
    }
    let passed = nonzero.is_empty();
    let text = format!("{pairs} mode pairs with |m|∞ ≤ {bound} through ν^{}: {} nonzero residuals\n", c.order, nonzero.len());
    Ok(Report {
        json: json!({"truncation": c.order, "dmax": flat.dmax(), "bound": bound, "pairs": pairs, "nonzero": nonzero, "passed": passed}),
        text,
        passed,
    })
}

fn flux_rotation(c: &EngineConfig, v: &str) -> Result<Report, Failure> {
    let p = c.fedosov_product()?;
    let l = LoopDescriptor::new(mode(v, c.dim)?);
    let r = rotation_report(&p, &l)?;
    let passed = r["match"] == json!(true);
    let text = format!(
        "loop v = {v}\nclassical:   {}\ndeformed:    {}\nclosed form: {}\nmatch: {passed}\n",
        l.classical_flux(c.order),
        starflux::flux::flux_def_of_loop(&p, &l)?,
        starflux::flux::flux_def_closed_form(p.data(), &l)?,
    );
    Ok(Report { json: r, text, passed })
}

fn sweep_entries(v: &Value) -> Result<Vec<Vec<Rational>>, Failure> {
    let list = v.get("omegas").unwrap_or(v).as_array().ok_or_else(|| Failure::Usage("sweep must be a list of Ω lists".into()))?;
    list.iter()
        .map(|o| {
            let o = o.get("omega").unwrap_or(o);
            let a = o.as_array().ok_or_else(|| Failure::Usage(format!("Ω entry {o} is not a list")))?;
            a.iter().map(|x| rat_from_json(x).map_err(Failure::from)).collect()
        })
        .collect()
}

fn gamma_table(c: &EngineConfig, sweep: &str) -> Result<Report, Failure> {
    let omegas = sweep_entries(&read_json(sweep)?)?;
    let mut csv = String::from("omega,generator");
    for j in 0..c.dim {
        csv.push_str(&format!(",period_{}", j + 1));
    }
    csv.push('\n');
    let mut rows = Vec::new();
    for om in omegas {
        let cfg = EngineConfig { omega: om.clone(), ..c.clone() };
        let gens = gamma_generators(&cfg.fedosov_product()?)?;
        let label: Vec<String> = om.iter().map(ToString::to_string).collect();
        for (j, g) in gens.iter().enumerate() {
            csv.push_str(&format!("{},{}", label.join(";"), j + 1));
            for s in &g.periods {
                csv.push_str(&format!(",{s}"));
            }
            csv.push('\n');
        }
        rows.push(json!({
            "omega": om.iter().map(rat_to_json).collect::<Vec<_>>(),
            "generators": gens.iter().map(class_to_json).collect::<Vec<_>>(),
        }));
    }
    Ok(Report { json: json!({"truncation": c.order, "rows": rows}), text: csv, passed: true })
}

fn heisenberg_demo(c: &EngineConfig, h: &str) -> Result<Report, Failure> {
    let h = fun_from_json(&read_json(h)?)?.with_order(c.order);
    if h.dim() != c.dim {
        return Err(Failure::Usage(format!("H lives on a torus of dimension {}", h.dim())));
    }
    let p: FedosovProduct = c.fedosov_product()?;
    let a = exp_derivation(&p, &Derivation::quasi_inner(&h))?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for m in mode_box(c.dim, c.probe_bound) {
        let img = a.apply(&p, &TorusFun::exp_mode(&m, c.order));
        text.push_str(&format!("A1(e{m:?}) = {img}\n"));
        rows.push(json!({"m": m, "image": fun_to_json(&img)}));
    }
    Ok(Report { json: json!({"truncation": c.order, "H": fun_to_json(&h), "probes": rows}), text, passed: true })
}

fn equiv_check(c: &EngineConfig, t: &str, loop_v: &str, which: Which) -> Result<Report, Failure> {
    let t = EquivalenceOperator::from_json(&read_json(t)?)?;
    let c = EngineConfig { order: t.order(), ..c.clone() };
    c.validate()?;
    let l = LoopDescriptor::new(mode(loop_v, c.dim)?);
    let base: Arc<dyn StarProduct> = match which {
        Which::Moyal => Arc::new(Moyal::new(c.dim, c.order)),
        _ => Arc::new(c.fedosov_product()?),
    };
    let name = base.name();
    let (before, after) = check_flux_invariance(base, &t, &l, c.probe_bound.max(1))?;
    let passed = before == after;
    Ok(Report {
        json: json!({"base": name, "loop": l.v(), "before": class_to_json(&before), "after": class_to_json(&after), "equal": passed}),
        text: format!("base {name}, loop {loop_v}\nflux:             {before}\ntransported flux: {after}\nequal: {passed}\n"),
        passed,
    })
}

fn acceptance_cmd(c: &EngineConfig, k: Option<usize>, only: &Option<String>, sequential: bool) -> Result<Report, Failure> {
    let only = match only {
        Some(s) => parse_int_list(s)?.into_iter().map(|i| i as u8).collect(),
        None => vec![],
    };
    let opts = AcceptanceOptions { order: k, seed: c.seed, only, parallel: !sequential };
    let results = acceptance::run(&opts);
    let text: String = results.iter().map(|r| r.line() + "\n").collect();
    let json = acceptance::report_json(&results);
    let passed = results.iter().all(|r| r.passed);
    Ok(Report { json, text, passed })
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let e = &cli.engine;
    let c = engine_config(e)?;
    match &cli.command {
        Command::AssociativityCheck { count, max_mode, product } => associativity_check(&c, *count, *max_mode, *product),
        Command::StarTable { pairs, product } => star_table_cmd(&c, pairs, *product),
        Command::FedosovVsMoyal { modes } => fedosov_vs_moyal(&c, *modes),
        Command::FluxRotation { v } => flux_rotation(&c, v),
        Command::GammaTable { omega_sweep } => gamma_table(&c, omega_sweep),
        Command::HeisenbergDemo { h } => heisenberg_demo(&c, h),
        Command::EquivCheck { t, loop_v, base } => equiv_check(&c, t, loop_v, *base),
        Command::Acceptance { only, sequential } => acceptance_cmd(&c, e.k, only, *sequential),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(f) => f,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(r) => {
            let mut out = std::io::stdout().lock();
            let fmt = engine_config(&cli.engine).map(|c| c.format).unwrap_or(OutputFormat::Text);
            match fmt {
                OutputFormat::Json => writeln!(out, "{}", r.json),
                _ => write!(out, "{}", r.text),
            }
            .ok();
            if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(2)
        }
    }
}
