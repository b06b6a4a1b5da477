use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use cgbounds::certificate::{gallery_certificate, DualCertificate, Num, PotentialTag, SolutionConcept, GALLERY};
use cgbounds::dynamics::{one_round_walk, TieBreak};
use cgbounds::format::{AnyGame, GameDoc, Sidecar};
use cgbounds::gallery::{generate, GenParams, GENERATORS};
use cgbounds::lp::solve_lp;
use cgbounds::metrics::{exact_apx_one_round, exact_poa_pos, optimum, ratio, MetricsReport, DEFAULT_PROFILE_CAP, DEFAULT_WALK_CAP};
use cgbounds::primal::{build_primal_lp, strong_duality_check};
use cgbounds::report::{figure1, figure2, number_json, BoundReport};
use cgbounds::scalar::{format_rational, parse_rational, Scalar};
use cgbounds::search::{outcome_gamma, search_dual, SearchBox, SearchBudget};
use cgbounds::verify::{verify_dual_certificate, Status, Verdict, VerifyOptions, DEFAULT_SWEEP_BOUND};
use cgbounds::{BigRational, Error, Game, Social};

const EXIT_REFUTED: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "cgbounds", version, about = "Bounds, certificates and exact metrics for weighted congestion games")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Largest number of profiles an exhaustive run may visit.
    #[arg(long, global = true, env = "CGBOUNDS_CAP", default_value_t = DEFAULT_PROFILE_CAP)]
    cap: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SocialArg {
    Sum,
    Max,
}

impl From<SocialArg> for Social {
    fn from(s: SocialArg) -> Self {
        match s {
            SocialArg::Sum => Social::Sum,
            SocialArg::Max => Social::Max,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Exhaustive PoA and PoS.
    Exact,
    /// Exhaustive worst one-round walk.
    Walk,
    /// Verify a gallery certificate, and compare it with LP(K, O) when a sidecar is given.
    Dual,
    /// Print LP(K, O) for the sidecar's profiles and its optimum.
    Lp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tie {
    Lowest,
    Highest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Figure1,
    Figure2,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a game given as JSON.
    Analyze {
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value = "0")]
        eps: String,
        #[arg(long, value_enum, default_value_t = SocialArg::Sum)]
        social: SocialArg,
        /// Gallery certificate id (dual mode).
        #[arg(long)]
        certificate: Option<String>,
        /// Concept for lp mode, as a gallery certificate id.
        #[arg(long)]
        concept: Option<String>,
        /// Sidecar with the profiles K and O.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SWEEP_BOUND)]
        bound: u64,
    },
    /// Run one round of best responses from the empty profile.
    Walk {
        game: PathBuf,
        /// Comma-separated player order, default 0,1,...
        #[arg(long)]
        order: Option<String>,
        #[arg(long, value_enum, default_value_t = Tie::Lowest)]
        tie: Tie,
    },
    /// Verify a dual certificate from the gallery or a JSON file.
    DualVerify {
        /// Gallery id; see `--list`.
        id: Option<String>,
        #[arg(long, conflicts_with = "id")]
        file: Option<PathBuf>,
        #[arg(long, default_value = "0")]
        eps: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SWEEP_BOUND)]
        bound: u64,
        #[arg(long)]
        list: bool,
    },
    /// Search for uniform dual multipliers that minimize the certified bound.
    DualSearch {
        /// eps-poa-unweighted, eps-poa-weighted, eps-pos-potential or one-round-walk.
        concept: String,
        #[arg(long, default_value = "0")]
        eps: String,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Potential for eps-pos-potential.
        #[arg(long)]
        potential: Option<String>,
        #[arg(long)]
        weighted: bool,
    },
    /// Emit a lower-bound instance as a game JSON plus a sidecar.
    Generate {
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        t: u64,
        #[arg(long, default_value_t = 1)]
        y: u64,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 2)]
        n1: u64,
        #[arg(long, default_value_t = 1)]
        n2: u64,
        #[arg(long, default_value = "1/1000")]
        pad: String,
        /// Write `<out>.json` and `<out>.sidecar.json` instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a bound table.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        /// Comma-separated ε values for figure1.
        #[arg(long, default_value = "0,0.5,1")]
        eps_grid: String,
        #[arg(long, default_value_t = DEFAULT_SWEEP_BOUND)]
        bound: u64,
    },
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.downcast_ref::<Error>() {
            Some(Error::CapExceeded { .. }) => EXIT_CAP,
            Some(Error::Unknown { .. }) => EXIT_USAGE,
            _ => 1,
        };
        Failure { code, err }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Analyze { game, mode, eps, social, certificate, concept, sidecar, bound } => {
            let doc = read_game(game)?;
            let eps = parse_rational(eps)?;
            let sidecar = sidecar.as_deref().map(read_sidecar).transpose()?;
            let args = AnalyzeArgs {
                mode: *mode,
                eps,
                social: (*social).into(),
                certificate: certificate.as_deref(),
                concept: concept.as_deref(),
                sidecar: sidecar.as_ref(),
                bound: *bound,
                cap: cli.cap,
                format: cli.format,
            };
            match doc.to_any()? {
                AnyGame::Exact(g) => analyze(&g, &args),
                AnyGame::Float(g) => analyze(&g, &args),
            }
        }
        Command::Walk { game, order, tie } => {
            let doc = read_game(game)?;
            let tie = match tie {
                Tie::Lowest => TieBreak::LowestIndex,
                Tie::Highest => TieBreak::HighestIndex,
            };
            match doc.to_any()? {
                AnyGame::Exact(g) => walk(&g, order.as_deref(), tie, cli),
                AnyGame::Float(g) => walk(&g, order.as_deref(), tie, cli),
            }
        }
        Command::DualVerify { id, file, eps, n, bound, list } => {
            if *list {
                for e in GALLERY {
                    println!("{:<14} {}", e.id, e.summary);
                }
                return Ok(0);
            }
            let cert = match (id, file) {
                (Some(id), None) => gallery_certificate(id, &parse_rational(eps)?, *n)?,
                (None, Some(path)) => DualCertificate::from_json(&read(path)?)?,
                _ => bail_usage("give a gallery id or --file")?,
            };
            let verdict = verify_dual_certificate(&cert, &VerifyOptions { bound: *bound, ..Default::default() })?;
            print_verdict(&cert, &verdict, cli.format);
            Ok(exit_for(verdict.status))
        }
        Command::DualSearch { concept, eps, degree, potential, weighted } => {
            let mut params = json!({"eps": format_rational(&parse_rational(eps)?), "d": degree, "weighted": weighted});
            if let Some(p) = potential {
                params["potential"] = json!(p);
                if *degree == 1 && PotentialTag::parse(p)?.degree() != 1 {
                    params["d"] = json!(PotentialTag::parse(p)?.degree());
                }
            }
            let concept = SolutionConcept::from_json(concept, &params)?;
            let out = search_dual(&concept, &SearchBox::default_for(&concept), &SearchBudget::default())?;
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.to_json())?),
                _ => {
                    println!("concept      {}", concept.name());
                    println!("gamma        {} ({:.9})", out.certificate.gamma, outcome_gamma(&out));
                    for (name, v) in out.certificate.duals.values() {
                        println!("{name:<12} {v}");
                    }
                    println!("float gamma  {:.9}", out.float_gamma);
                    println!("status       {}", out.verdict.status.as_str());
                    if out.unproven_below {
                        println!("budget exhausted before a proven certificate was found");
                    }
                }
            }
            Ok(if out.proven() { 0 } else { exit_for(out.verdict.status) })
        }
        Command::Generate { name, n, t, y, degree, n1, n2, pad, out } => {
            if !GENERATORS.contains(&name.as_str()) {
                return Err(Failure {
                    code: EXIT_USAGE,
                    err: anyhow::anyhow!("unknown generator `{name}`; choose one of {}", GENERATORS.join(", ")),
                });
            }
            let params = GenParams { n: *n, t: *t, y: *y, d: *degree, n1: *n1, n2: *n2, pad: parse_rational(pad)? };
            let inst = generate(name, &params)?;
            let sidecar = inst.sidecar();
            match out {
                Some(prefix) => {
                    let game_path = with_suffix(prefix, ".json");
                    let side_path = with_suffix(prefix, ".sidecar.json");
                    fs::write(&game_path, inst.doc.to_json())
                        .with_context(|| format!("writing {}", game_path.display()))?;
                    fs::write(&side_path, serde_json::to_string_pretty(&sidecar)?)
                        .with_context(|| format!("writing {}", side_path.display()))?;
                    println!("{}\n{}", game_path.display(), side_path.display());
                }
                None => {
                    let doc: Json = serde_json::to_value(&inst.doc)?;
                    println!("{}", serde_json::to_string_pretty(&json!({"game": doc, "sidecar": sidecar}))?);
                }
            }
            Ok(0)
        }
        Command::Reproduce { target, eps_grid, bound } => {
            let opts = VerifyOptions { bound: *bound, ..Default::default() };
            let report = match target {
                Target::Figure1 => {
                    let grid = eps_grid.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?;
                    figure1(&grid, &opts)?
                }
                Target::Figure2 => figure2(&opts)?,
            };
            print_report(&report, cli.format);
            Ok(if report.all_certified_proven() { 0 } else { EXIT_REFUTED })
        }
    }
}

fn bail_usage<T>(msg: &str) -> Result<T, Failure> {
    Err(Failure { code: EXIT_USAGE, err: anyhow::anyhow!("{msg}") })
}

fn exit_for(status: Status) -> u8 {
    match status {
        Status::Proven => 0,
        Status::Refuted => EXIT_REFUTED,
        Status::Unproven => 1,
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_game(path: &Path) -> anyhow::Result<GameDoc> {
    GameDoc::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_sidecar(path: &Path) -> anyhow::Result<Sidecar> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

struct AnalyzeArgs<'a> {
    mode: Mode,
    eps: BigRational,
    social: Social,
    certificate: Option<&'a str>,
    concept: Option<&'a str>,
    sidecar: Option<&'a Sidecar>,
    bound: u64,
    cap: u128,
    format: Format,
}

fn analyze<T: Scalar>(g: &Game<T>, a: &AnalyzeArgs) -> Result<u8, Failure> {
    match a.mode {
        Mode::Exact => {
            let eps = T::from_rational(&a.eps);
            let report = match exact_poa_pos(g, &eps, a.social, a.cap) {
                Err(Error::EmptyEquilibriumSet) => {
                    println!("{}", json!({"error": "empty equilibrium set"}));
                    return Ok(1);
                }
                r => r?,
            };
            print_metrics(&report, a.format);
            Ok(0)
        }
        Mode::Walk => {
            let report = exact_apx_one_round(g, a.social, a.cap, DEFAULT_WALK_CAP)?;
            print_metrics(&report, a.format);
            Ok(0)
        }
        Mode::Dual => {
            let Some(id) = a.certificate else {
                return bail_usage("dual mode needs --certificate <gallery id>");
            };
            let cert = gallery_certificate(id, &a.eps, g.players())?;
            let verdict = verify_dual_certificate(&cert, &VerifyOptions { bound: a.bound, ..Default::default() })?;
            let duality = match a.sidecar {
                Some(s) => {
                    let (k, o) = s.profiles();
                    Some(strong_duality_check(g, &k, &o, &cert)?)
                }
                None => None,
            };
            match a.format {
                Format::Json => {
                    let mut out = json!({"certificate": cert.to_json(), "verdict": verdict.to_json()});
                    if let Some(d) = &duality {
                        out["duality"] = d.to_json();
                    }
                    println!("{}", serde_json::to_string_pretty(&out)?);
                }
                _ => {
                    print_verdict(&cert, &verdict, a.format);
                    if let Some(d) = &duality {
                        let primal = d.primal.as_ref().map_or("none".to_string(), |p| p.to_string());
                        println!("LP(K,O)      {primal} ({:?})", d.status);
                        println!("weak duality {}", d.weak_duality);
                        println!("tight        {}", d.tight);
                    }
                }
            }
            Ok(exit_for(verdict.status))
        }
        Mode::Lp => {
            let Some(s) = a.sidecar else {
                return bail_usage("lp mode needs --sidecar");
            };
            let concept = match a.concept.or(a.certificate) {
                Some(id) => gallery_certificate(id, &a.eps, g.players())?.concept,
                None => SolutionConcept::EpsPoaUnweighted { eps: Num::Exact(a.eps.clone()), d: g.degree().max(1) },
            };
            let (k, o) = s.profiles();
            let lp = build_primal_lp(g, &k, &o, &concept)?;
            let sol = solve_lp(&lp);
            match a.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "lp": lp.to_text(),
                        "status": format!("{:?}", sol.status).to_lowercase(),
                        "value": sol.value.as_ref().map(number_json),
                        "x": sol.x.iter().map(number_json).collect::<Vec<_>>(),
                    }))?
                ),
                _ => {
                    print!("{}", lp.to_text());
                    let value = sol.value.as_ref().map_or("none".to_string(), |v| v.to_string());
                    println!("optimum: {value} ({:?})", sol.status);
                }
            }
            Ok(0)
        }
    }
}

fn walk<T: Scalar>(g: &Game<T>, order: Option<&str>, tie: TieBreak, cli: &Cli) -> Result<u8, Failure> {
    let ordering: Vec<usize> = match order {
        Some(text) => text
            .split(',')
            .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad player index `{p}`")))
            .collect::<anyhow::Result<_>>()?,
        None => (0..g.players()).collect(),
    };
    let trace = one_round_walk(g, &ordering, tie)?;
    let sum = cgbounds::game::social_sum(g, &trace.profile);
    let opt = optimum(g, Social::Sum, cli.cap)?;
    let r = ratio(&sum, &opt.value)?;
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "steps": trace.to_json(),
                "profile": trace.profile.indices(),
                "sum": number_json(&sum),
                "optimum": number_json(&opt.value),
                "ratio": number_json(&r),
            }))?
        ),
        _ => {
            for s in &trace.steps {
                println!("player {} -> strategy {} (cost {})", s.player, s.strategy, s.cost);
            }
            println!("SUM = {sum}, optimum = {}, ratio = {r}", opt.value);
        }
    }
    Ok(0)
}

fn print_metrics<T: Scalar>(r: &MetricsReport<T>, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&r.to_json()).expect("json")),
        Format::Csv => println!("{}\n{}", MetricsReport::<T>::CSV_HEADER, r.csv_row()),
        Format::Table => {
            let show = |v: &Option<T>| v.as_ref().map_or("-".to_string(), |v| v.to_string());
            println!("optimum      {} at {:?}", r.optimum.value, r.optimum.profile.indices().unwrap_or_default());
            println!("equilibria   {}", r.equilibrium_count);
            println!("PoA          {}", show(&r.poa));
            println!("PoS          {}", show(&r.pos));
            println!("Apx          {}", show(&r.apx));
            if let Some(o) = &r.apx_ordering {
                println!("walk order   {o:?}");
            }
        }
    }
}

fn print_verdict(cert: &DualCertificate, v: &Verdict, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&v.to_json()).expect("json")),
        Format::Csv => {
            let tight: Vec<String> = v.tight().iter().map(|(k, o)| format!("({k},{o})")).collect();
            println!("concept,gamma,status,tight_pairs");
            println!("{},{},{},\"{}\"", cert.concept.name(), cert.gamma, v.status.as_str(), tight.join(" "));
        }
        Format::Table => {
            println!("concept      {}", cert.concept.name());
            println!("gamma        {}", cert.gamma);
            println!("status       {}", v.status.as_str());
            for f in &v.families {
                println!("family       {} >= 0  [{}]", f.body, f.label);
                println!("  status     {}", f.status.as_str());
                if !f.tight.is_empty() {
                    let shown: Vec<String> = f.tight.iter().take(12).map(|(k, o)| format!("({k},{o})")).collect();
                    println!("  tight      {}", shown.join(" "));
                }
                if !f.tight_rays.is_empty() {
                    let rays: Vec<String> = f.tight_rays.iter().map(|s| format!("K = {s:.9} O")).collect();
                    println!("  rays       {}", rays.join(", "));
                }
                if let Some(w) = f.witness {
                    println!("  witness    (K, O) = ({}, {}) value {}", w.k, w.o, w.value);
                }
                if let Some(a) = &f.assumption {
                    println!("  assumes    {a}");
                }
                if let Some(n) = &f.note {
                    println!("  note       {n}");
                }
            }
            for n in &v.notes {
                println!("note         {n}");
            }
        }
    }
}

fn print_report(r: &BoundReport, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&r.to_json()).expect("json")),
        Format::Csv => print!("{}", r.to_csv()),
        Format::Table => print!("{}", r.to_table()),
    }
}
