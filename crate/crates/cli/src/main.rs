//! `nsbox` command-line tool.

mod table1;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use nsbox::bell::{self, ic_verdict, GyniWeights};
use nsbox::boxes::{builtin, parse_box_unchecked, AnyBox, Box2, Box3};
use nsbox::membership::{membership, Model};
use nsbox::wiring::{apply_wiring, search_max, Bipartition, Functional, Wiring};
use nsbox::Rational;

#[derive(Parser)]
#[command(
    name = "nsbox",
    version,
    about = "Exact tools for tripartite no-signalling boxes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check positivity, normalization and no-signalling.
    Validate {
        /// Box file, or `builtin:<name>`.
        path: String,
    },
    /// Evaluate a functional on a box.
    Eval {
        path: String,
        #[arg(long, value_enum)]
        functional: EvalFunctional,
        /// GYNI weight file; defaults to the even-parity weights.
        #[arg(long)]
        q: Option<PathBuf>,
    },
    /// Apply a wiring to a tripartite box.
    Wire {
        path: String,
        /// e.g. `bp=A|BC order=B,C alpha=2 beta=15 gamma=102`.
        #[arg(long)]
        wiring: String,
        /// Write the effective box here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize over every wiring of a tripartite box.
    Search {
        path: String,
        /// Search one functional only.
        #[arg(long, value_enum)]
        functional: Option<SearchFunctional>,
    },
    /// Decide membership in a model and write the certificate.
    Membership {
        path: String,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Required for `tobl`, e.g. `A|BC`.
        #[arg(long)]
        bipartition: Option<String>,
        /// Certificate path; defaults to `<input>.<model>.cert`.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Table of wirings and CHSH/Uffink values per extremal class.
    Table1 {
        /// Directory of `classNN.box` files.
        #[arg(long)]
        boxes: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFunctional {
    Chsh,
    ChshMax,
    Uffink,
    UffinkMax,
    K,
    Gyni,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchFunctional {
    ChshMax,
    UffinkMax,
}

impl From<SearchFunctional> for Functional {
    fn from(f: SearchFunctional) -> Self {
        match f {
            SearchFunctional::ChshMax => Functional::ChshMax,
            SearchFunctional::UffinkMax => Functional::UffinkMax,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Local,
    Ns,
    Tobl,
}

/// Exit 1 for domain failures, 2 for bad input.
pub(crate) enum Failure {
    Domain(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<nsbox::Error> for Failure {
    fn from(e: nsbox::Error) -> Self {
        match e {
            nsbox::Error::InvalidBox(_)
            | nsbox::Error::NegativeWeight(_)
            | nsbox::Error::WeightSum(_)
            | nsbox::Error::Contradiction(..) => Failure::Domain(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

pub(crate) type CmdResult<T = ()> = Result<T, Failure>;

pub(crate) fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn read(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Usage)
}

/// Parses without validating; `builtin:<name>` selects a shipped box.
fn load_unchecked(path: &str) -> CmdResult<AnyBox> {
    if let Some(name) = path.strip_prefix("builtin:") {
        return Ok(builtin(name)?);
    }
    let text = read(Path::new(path))?;
    parse_box_unchecked(&text)
        .with_context(|| format!("in {path}"))
        .map_err(Failure::Usage)
}

pub(crate) fn load(path: &str) -> CmdResult<AnyBox> {
    let b = load_unchecked(path)?;
    let report = b.validate();
    if !report.is_valid() {
        return Err(Failure::Domain(anyhow!("{path}: invalid box\n{report}")));
    }
    Ok(b)
}

fn need3(b: AnyBox, what: &str) -> CmdResult<Box3> {
    match b {
        AnyBox::Three(b) => Ok(b),
        AnyBox::Two(_) => Err(usage(format!("{what} needs a tripartite box"))),
    }
}

fn need2(b: AnyBox, what: &str) -> CmdResult<Box2> {
    match b {
        AnyBox::Two(b) => Ok(b),
        AnyBox::Three(_) => Err(usage(format!("{what} needs a bipartite box"))),
    }
}

pub(crate) fn summary(chsh_max: &Rational, uffink_max: &Rational) -> String {
    format!(
        "chsh_max = {chsh_max}, uffink_max = {uffink_max}, {}",
        ic_verdict(chsh_max, uffink_max)
    )
}

fn validate(path: &str) -> CmdResult {
    let b = load_unchecked(path)?;
    let report = b.validate();
    if report.is_valid() {
        println!("valid box{}", b.parties());
        Ok(())
    } else {
        println!("invalid\n{report}");
        Err(Failure::Domain(anyhow!("{path}: invalid box")))
    }
}

fn eval(path: &str, functional: EvalFunctional, q: Option<PathBuf>) -> CmdResult {
    let b = load(path)?;
    match functional {
        EvalFunctional::Chsh => println!("{}", bell::chsh(&need2(b, "chsh")?)),
        EvalFunctional::ChshMax => println!("{}", bell::chsh_max(&need2(b, "chsh-max")?)),
        EvalFunctional::Uffink => println!("{}", bell::uffink(&need2(b, "uffink")?)),
        EvalFunctional::UffinkMax => println!("{}", bell::uffink_max(&need2(b, "uffink-max")?)),
        EvalFunctional::K => println!("{}", bell::k_value(&need3(b, "k")?)),
        EvalFunctional::Gyni => {
            let b = need3(b, "gyni")?;
            let weights = match q {
                Some(p) => GyniWeights::parse(&read(&p)?).map_err(|e| {
                    Failure::Usage(anyhow::Error::from(e).context(format!("in {}", p.display())))
                })?,
                None => GyniWeights::even_parity(),
            };
            let r = bell::gyni(&b, &weights);
            println!("value = {}", r.value);
            println!("bound = {}", r.bound);
            println!(
                "{}",
                if r.violated() {
                    "violated"
                } else {
                    "no violation"
                }
            );
        }
    }
    Ok(())
}

fn wire(path: &str, wiring: &str, out: Option<PathBuf>) -> CmdResult {
    let b = need3(load(path)?, "wire")?;
    let w: Wiring = wiring.parse()?;
    let eff = apply_wiring(&b, &w)?;
    let text = AnyBox::Two(eff.clone()).to_string();
    match out {
        Some(p) => fs::write(&p, &text)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(Failure::Domain)?,
        None => print!("{text}"),
    }
    println!(
        "{}",
        summary(&bell::chsh_max(&eff), &bell::uffink_max(&eff))
    );
    Ok(())
}

fn search(path: &str, functional: Option<SearchFunctional>) -> CmdResult {
    let b = need3(load(path)?, "search")?;
    match functional {
        Some(f) => {
            let f = Functional::from(f);
            let (w, v) = search_max(&b, f)?;
            println!("wiring = {w}");
            println!("{f} = {v}");
        }
        None => {
            let (wc, c) = search_max(&b, Functional::ChshMax)?;
            let (wu, u) = search_max(&b, Functional::UffinkMax)?;
            println!("chsh_max wiring = {wc}");
            println!("uffink_max wiring = {wu}");
            println!("{}", summary(&c, &u));
        }
    }
    Ok(())
}

fn membership_cmd(
    path: &str,
    model: ModelArg,
    bipartition: Option<String>,
    certificate: Option<PathBuf>,
) -> CmdResult {
    let (model, tag) = match (model, bipartition) {
        (ModelArg::Local, _) => (Model::Local, "local".to_string()),
        (ModelArg::Ns, _) => (Model::NoSignalling, "ns".to_string()),
        (ModelArg::Tobl, None) => return Err(usage("--model tobl requires --bipartition")),
        (ModelArg::Tobl, Some(s)) => {
            let bp: Bipartition = s.parse()?;
            (Model::Tobl(bp), format!("tobl-{}", bp.solo().letter()))
        }
    };
    // The ns verdict is the validation result, so invalid boxes are answers.
    let b = match model {
        Model::NoSignalling => load_unchecked(path)?,
        _ => load(path)?,
    };
    let cert = membership(&b, model).map_err(|e| match e {
        nsbox::Error::InvalidBox(_) => usage(e.to_string()),
        other => other.into(),
    })?;
    let cert_path = certificate.unwrap_or_else(|| {
        let base = path.strip_prefix("builtin:").unwrap_or(path);
        PathBuf::from(format!("{base}.{tag}.cert"))
    });
    fs::write(&cert_path, cert.to_string())
        .with_context(|| format!("cannot write {}", cert_path.display()))
        .map_err(Failure::Domain)?;
    println!(
        "{}",
        if cert.is_feasible() {
            "feasible"
        } else {
            "infeasible"
        }
    );
    println!("certificate = {}", cert_path.display());
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Validate { path } => validate(&path),
        Command::Eval {
            path,
            functional,
            q,
        } => eval(&path, functional, q),
        Command::Wire { path, wiring, out } => wire(&path, &wiring, out),
        Command::Search { path, functional } => search(&path, functional),
        Command::Membership {
            path,
            model,
            bipartition,
            certificate,
        } => membership_cmd(&path, model, bipartition, certificate),
        Command::Table1 { boxes } => table1::run(&boxes),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
