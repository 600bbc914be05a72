use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use corona_tst::beta::{linear_deviation, BetaParams};
use corona_tst::corona::{corona_decompose, verify_tree_densities, CoronaParams, PoleMode};
use corona_tst::cubes::{CubeId, CubeLattice};
use corona_tst::domains::{parse_pairs, DomainSpec};
use corona_tst::geometry::{Ball, Point};
use corona_tst::green_dev::{compare_green_beta, DeviationParams};
use corona_tst::harmonic::{log_integral, wos_measure, Domain, Pole, Target, WosConfig};
use corona_tst::suite::{domain_lattice, run_suite, Suite, SuiteConfig, DEFAULT_SEED};
use corona_tst::{Error, Result};

const SEED_ENV: &str = "CORONA_TST_SEED";

#[derive(Parser, Debug)]
#[command(name = "corona-tst", version, about = "Corona decompositions, β-numbers and harmonic measure on sampled boundaries")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Random walkers per estimate.
    #[arg(long, global = true)]
    walkers: Option<usize>,
    /// Base seed; the CORONA_TST_SEED environment variable takes precedence.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Absorption shell width of the walks.
    #[arg(long, global = true)]
    shell: Option<f64>,
    /// Re-insertion radius for exterior domains.
    #[arg(long, global = true)]
    far_field_radius: Option<f64>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

impl Global {
    fn seed(&self) -> Result<u64> {
        match std::env::var(SEED_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| Error::InvalidInput(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
            Err(_) => Ok(self.seed.unwrap_or(DEFAULT_SEED)),
        }
    }

    fn wos(&self, domain: &dyn Domain, default_walkers: usize) -> Result<WosConfig> {
        let mut cfg = WosConfig::for_domain(domain, self.walkers.unwrap_or(default_walkers), self.seed()?);
        if let Some(s) = self.shell {
            cfg.shell = s;
        }
        if let Some(r) = self.far_field_radius {
            cfg.far_field_radius = Some(r);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn to_json(&self) -> Result<Value> {
        Ok(json!({
            "threads": self.threads,
            "walkers": self.walkers,
            "seed": self.seed()?,
            "seed_from_env": std::env::var(SEED_ENV).is_ok(),
            "shell": self.shell,
            "far_field_radius": self.far_field_radius,
            "version": env!("CARGO_PKG_VERSION"),
        }))
    }
}

/// Domain given as `KIND key=value ...` or as the path of a spec file.
#[derive(Args, Debug, Clone)]
struct DomainArg {
    #[arg(long, num_args = 1.., required = true, value_name = "KIND|FILE [KEY=VALUE]...")]
    domain: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct LatticeArgs {
    /// Sampling resolution of the boundary.
    #[arg(long)]
    h: Option<f64>,
    /// Deepest lattice level.
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct BetaArgs {
    #[arg(long, default_value_t = 3.0)]
    m: f64,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 60)]
    budget: usize,
}

impl BetaArgs {
    fn params(&self, default_c0: f64) -> BetaParams {
        BetaParams { m: self.m, c0: self.c0.unwrap_or(default_c0), p: self.p, budget: self.budget, ..BetaParams::default() }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a domain spec file.
    GenDomain {
        #[arg(long)]
        kind: String,
        /// KEY=VALUE parameters of the generator.
        #[arg(long, num_args = 0..)]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the cube lattice of a domain boundary.
    Cubes {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of sample-to-cube membership per level.
        #[arg(long)]
        members: Option<PathBuf>,
    },
    /// Per-cube β-numbers and the linear deviation, as CSV.
    Beta {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[command(flatten)]
        beta: BetaArgs,
        /// Root cube as LEVEL:INDEX.
        #[arg(long, default_value = "0:0")]
        root: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON; defaults to OUT with a .json extension.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Harmonic measure of boundary balls by walk on spheres.
    Wos {
        #[command(flatten)]
        domain: DomainArg,
        /// `inf` or comma-separated coordinates.
        #[arg(long)]
        pole: String,
        /// Boundary ball as comma-separated centre coordinates followed by the radius.
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corona decomposition with optional density verification.
    Corona {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value = "0:0")]
        root: String,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 20.0)]
        a: f64,
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        /// Pairs re-estimated by the verification pass; 0 skips it.
        #[arg(long, default_value_t = 0)]
        verify: usize,
        /// `per-tree`, `inf` or comma-separated coordinates.
        #[arg(long, default_value = "per-tree")]
        pole_mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Logarithmic integral of the harmonic density; `j=A..B` ranges expand.
    Loginteg {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value = "inf")]
        pole: String,
        /// Levels below the root; defaults to the lattice bottom.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        inflation: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green-function deviation integral against the boundary deviation.
    GreenDev {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        pole: String,
        #[arg(long, default_value_t = 0.1)]
        excluded: f64,
        #[arg(long, default_value_t = 1.0 / 128.0)]
        min_side: f64,
        #[arg(long, default_value_t = 4.0)]
        inflation: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Reduced sizes for a smoke run.
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Thread counts compared by the determinism criterion.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 4, 8])]
        thread_counts: Vec<usize>,
        /// Directory for per-criterion JSON artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Done {
    Ok,
    AcceptanceFailed,
}

fn parse_floats(what: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("cannot parse {what} {s:?}"))))
        .collect()
}

fn parse_pole(s: &str) -> Result<Pole> {
    if s.eq_ignore_ascii_case("inf") {
        Ok(Pole::AtInfinity)
    } else {
        Ok(Pole::Point(parse_floats("pole", s)?))
    }
}

fn parse_cube(s: &str) -> Result<CubeId> {
    let bad = || Error::InvalidInput(format!("cube {s:?} must be LEVEL:INDEX"));
    let (l, i) = s.split_once(':').ok_or_else(bad)?;
    Ok(CubeId::new(l.trim().parse().map_err(|_| bad())?, i.trim().parse().map_err(|_| bad())?))
}

fn read_spec(path: &Path) -> Result<DomainSpec> {
    let v: Value = serde_json::from_reader(File::open(path)?)?;
    let inner = v.get("domain").cloned().unwrap_or(v);
    Ok(serde_json::from_value(inner)?)
}

/// All specs named by a domain argument; integer ranges `A..B` expand.
fn domain_specs(arg: &DomainArg) -> Result<Vec<DomainSpec>> {
    let (head, rest) = arg.domain.split_first().ok_or_else(|| Error::InvalidInput("empty --domain".into()))?;
    let path = Path::new(head);
    if rest.is_empty() && (path.extension().is_some_and(|e| e == "json") || path.is_file()) {
        return Ok(vec![read_spec(path)?]);
    }
    let mut variants: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (k, v) in parse_pairs(rest)? {
        let values: Vec<String> = match v.split_once("..") {
            Some((a, b)) => {
                let bad = || Error::InvalidInput(format!("bad range {k}={v}"));
                let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                (a..=b).map(|x| x.to_string()).collect()
            }
            None => vec![v],
        };
        variants = variants
            .into_iter()
            .flat_map(|base| values.iter().map(|x| [base.clone(), vec![(k.clone(), x.clone())]].concat()).collect::<Vec<_>>())
            .collect();
    }
    variants.iter().map(|p| DomainSpec::from_params(head, p)).collect()
}

fn single_spec(arg: &DomainArg) -> Result<DomainSpec> {
    let mut specs = domain_specs(arg)?;
    if specs.len() != 1 {
        return Err(Error::InvalidInput("this command takes a single domain; ranges are not allowed".into()));
    }
    Ok(specs.remove(0))
}

fn lattice_for(spec: &DomainSpec, domain: &dyn Domain, args: &LatticeArgs) -> Result<(CubeLattice, Value)> {
    domain_lattice(spec, domain, args.h, args.k_max)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(out: &Option<PathBuf>, doc: &Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Done> {
    let g = &cli.global;
    let config = g.to_json()?;
    match &cli.command {
        Command::GenDomain { kind, params, out } => {
            let mut pairs = parse_pairs(params)?;
            if kind == "batakis" {
                if !pairs.iter().any(|(k, _)| k == "seed") {
                    pairs.push(("seed".into(), g.seed()?.to_string()));
                }
                if let (Some(w), false) = (g.walkers, pairs.iter().any(|(k, _)| k == "walkers")) {
                    pairs.push(("walkers".into(), w.to_string()));
                }
            }
            let spec = DomainSpec::from_params(kind, &pairs)?.generate()?;
            emit(out, &json!({"config": config, "domain": spec}))?;
        }
        Command::Cubes { domain, lattice, out, members } => {
            let spec = single_spec(domain)?;
            let dom = spec.build()?;
            let (lat, info) = lattice_for(&spec, dom.as_ref(), lattice)?;
            if let Some(m) = members {
                lat.write_members(io::BufWriter::new(File::create(m)?))?;
            }
            emit(out, &json!({"config": config, "domain": spec, "lattice_config": info, "lattice": lat.to_json()}))?;
        }
        Command::Beta { domain, lattice, beta, root, out, summary } => {
            let spec = single_spec(domain)?;
            let dom = spec.build()?;
            let (lat, info) = lattice_for(&spec, dom.as_ref(), lattice)?;
            let params = beta.params(if spec.is_cantor().is_some() { 3.0 } else { BetaParams::default().c0 });
            let report = linear_deviation(&lat, parse_cube(root)?, &params)?;
            report.write_csv(sink(out)?)?;
            let doc = json!({"config": config, "domain": spec, "lattice_config": info, "summary": report.summary_json()});
            match (summary, out) {
                (Some(s), _) => emit(&Some(s.clone()), &doc)?,
                (None, Some(o)) => emit(&Some(o.with_extension("json")), &doc)?,
                (None, None) => eprintln!("{}", serde_json::to_string(&doc)?),
            }
        }
        Command::Wos { domain, pole, targets, out } => {
            let spec = single_spec(domain)?;
            let dom = spec.build()?;
            let cfg = g.wos(dom.as_ref(), 10_000)?;
            let targets = targets
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let mut v = parse_floats("target", t)?;
                    let r = v.pop().filter(|_| v.len() == dom.dim()).ok_or_else(|| Error::InvalidInput(format!("target {t:?} needs {} coordinates and a radius", dom.dim())))?;
                    Ok(Target::ball(format!("t{k}"), Ball::new(Point::new(v)?, r)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let est = wos_measure(dom.as_ref(), &parse_pole(pole)?, &targets, &cfg)?;
            emit(out, &json!({"config": config, "wos": cfg, "domain": spec, "estimate": est}))?;
        }
        Command::Corona { domain, lattice, root, epsilon, a, tau, verify, pole_mode, out } => {
            let spec = single_spec(domain)?;
            let dom = spec.build()?;
            let (lat, info) = lattice_for(&spec, dom.as_ref(), lattice)?;
            let params = CoronaParams { epsilon: *epsilon, a: *a, tau: *tau, ..CoronaParams::default() };
            let beta = BetaParams { c0: params.m, ..BetaParams::default() };
            let root = parse_cube(root)?;
            let records = corona_tst::beta::beta_table(&lat, root, &beta);
            let cfg = g.wos(dom.as_ref(), 10_000)?;
            let mut res = corona_decompose(dom.as_ref(), &lat, &records, root, &params, &cfg)?;
            if *verify > 0 {
                let mode = match pole_mode.as_str() {
                    "per-tree" => PoleMode::PerTree,
                    other => PoleMode::Fixed(parse_pole(other)?),
                };
                res.verification = Some(verify_tree_densities(&res, dom.as_ref(), &lat, &mode, *verify, &cfg)?);
            }
            emit(out, &json!({"config": config, "wos": cfg, "domain": spec, "lattice_config": info, "corona": res.to_json()}))?;
        }
        Command::Loginteg { domain, lattice, pole, depth, inflation, out } => {
            let pole = parse_pole(pole)?;
            let mut rows = Vec::new();
            println!("{:<40} {:>12} {:>8} {:>10}", "domain", "value", "bottom", "floored");
            for spec in domain_specs(domain)? {
                let dom = spec.build()?;
                let (lat, info) = lattice_for(&spec, dom.as_ref(), lattice)?;
                let cfg = g.wos(dom.as_ref(), 100_000)?;
                let root = CubeId::new(0, 0);
                let li = log_integral(dom.as_ref(), &lat, root, &pole, depth.unwrap_or(lat.max_level()), *inflation, &cfg)?;
                println!("{:<40} {:>12.6} {:>8} {:>10.4}", serde_json::to_string(&spec)?, li.value, li.bottom_level, li.floored_fraction);
                rows.push(json!({"domain": spec, "lattice_config": info, "wos": cfg, "result": li}));
            }
            if out.is_some() {
                emit(out, &json!({"config": config, "pole": pole, "rows": rows}))?;
            }
        }
        Command::GreenDev { domain, lattice, pole, excluded, min_side, inflation, out } => {
            let spec = single_spec(domain)?;
            let dom = spec.build()?;
            let (lat, info) = lattice_for(&spec, dom.as_ref(), lattice)?;
            let pole = parse_floats("pole", pole)?;
            let cfg = g.wos(dom.as_ref(), 1_000)?;
            let params = DeviationParams { inflation: *inflation, min_side: *min_side };
            let report = compare_green_beta(dom.as_ref(), &lat, &pole, *excluded, &params, &BetaParams::default(), &cfg)?;
            emit(out, &json!({"config": config, "wos": cfg, "domain": spec, "lattice_config": info, "pole": pole, "report": report}))?;
        }
        Command::Verify { suite, quick, only, thread_counts, out } => {
            let suite: Suite = suite.parse()?;
            let sc = SuiteConfig { seed: g.seed()?, quick: *quick, only: only.clone(), thread_counts: thread_counts.clone() };
            let report = run_suite(suite, &sc, |o| println!("{}", o.line()));
            let passed = report.outcomes.iter().filter(|o| o.passed).count();
            println!("{passed}/{} passed", report.outcomes.len());
            if let Some(dir) = out {
                report.write_artifacts(dir)?;
            }
            if !report.passed() {
                return Ok(Done::AcceptanceFailed);
            }
        }
    }
    Ok(Done::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::AcceptanceFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
