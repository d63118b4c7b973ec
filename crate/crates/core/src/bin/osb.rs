use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orderstat_bounds::campaign::{self, CampaignOptions, FamilySpec};
use orderstat_bounds::config::{self, Layer, OutputFormat, Settings};
use orderstat_bounds::corpus::{Corpus, CorpusSpec};
use orderstat_bounds::error::Error;
use orderstat_bounds::matrix::Matrix;
use orderstat_bounds::report::{certificate_to_json, ReportSet};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;

/// Exact and Monte Carlo verification of order-statistic averages over
/// random map families.
#[derive(Parser)]
#[command(name = "osb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-sided bound on averaged order statistics.
    VerifyMain(Common),
    /// Two-sided estimate of the averaged l_p norm of paths.
    VerifyLp(Common),
    /// Hitting-probability, anti-concentration and averaging checks.
    Lemmas(Common),
    /// Certify uniform marginals and compute the pair constant C_G.
    FamilyCheck(Common),
    /// Draw seeded maps from a family.
    Sample(SampleArgs),
    /// Corpus tools.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Write the seeded matrix corpus as JSON.
    Gen(GenArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// sym, map, sym:n, map:n:N or file:PATH; repeat or comma-separate.
    #[arg(long, value_delimiter = ',')]
    family: Vec<String>,
    /// Single matrix (CSV or JSON) instead of a corpus.
    #[arg(long, conflicts_with = "corpus")]
    matrix: Option<PathBuf>,
    /// Corpus JSON; the built-in default corpus when absent.
    #[arg(long)]
    corpus: Option<String>,
    /// Inclusive ell range, e.g. 1..3.
    #[arg(long)]
    ell: Option<String>,
    /// Comma-separated p values for verify-lp.
    #[arg(long)]
    p: Option<String>,
    /// Samples per estimate when a family exceeds the enumeration cap.
    #[arg(long)]
    mc_samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    enum_cap: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// Print pass/fail counts and worst margins to stderr.
    #[arg(long)]
    summary: bool,
    /// key = value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Skip the Orlicz-norm and extreme-point checks in verify-main.
    #[arg(long)]
    no_orlicz: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    /// Number of maps to draw.
    #[arg(long, default_value_t = 10)]
    count: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: Option<String>,
    /// Largest row count n.
    #[arg(long, default_value_t = 5)]
    max_n: usize,
    /// Largest column count N.
    #[arg(long, default_value_t = 5)]
    max_cols: usize,
    #[arg(long, default_value_t = 50)]
    uniform: usize,
    #[arg(long, default_value_t = 10)]
    integer: usize,
    #[arg(long, default_value_t = 10)]
    sparse: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn settings(common: &Common) -> Result<Settings, Error> {
    let mut cli = Layer::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            cli.insert(k.to_string(), v);
        }
    };
    put("seed", common.seed.clone());
    put("enum_cap", common.enum_cap.clone());
    put("mc_samples", common.mc_samples.clone());
    put("format", common.format.clone());
    put("ell", common.ell.clone());
    put("p", common.p.clone());
    put("corpus", common.corpus.clone());
    put("family", (!common.family.is_empty()).then(|| common.family.join(",")));
    let env = config::env_layer(|k| std::env::var(k).ok());
    let file_path = common.config.clone().or_else(|| std::env::var_os("OSB_CONFIG").map(PathBuf::from));
    let file = match file_path {
        Some(p) => config::load_config(p)?,
        None => Layer::new(),
    };
    Settings::resolve(&[&cli, &env, &file])
}

fn options(s: &Settings, common: &Common) -> CampaignOptions {
    CampaignOptions {
        ell: s.ell,
        p: s.p.clone(),
        mc_samples: s.mc_samples,
        seed: s.seed,
        enum_cap: s.enum_cap,
        orlicz: !common.no_orlicz,
    }
}

fn load_corpus(s: &Settings, common: &Common) -> Result<Corpus, Error> {
    if let Some(path) = &common.matrix {
        let id = path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
        return Ok(Corpus::single(id, Matrix::load(path)?));
    }
    match &s.corpus {
        Some(path) => Corpus::load(path),
        None => Ok(CorpusSpec::default_desk().with_seed(s.seed).generate()),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_reports(set: &ReportSet, s: &Settings, common: &Common) -> Result<u8, Error> {
    let text = match s.format {
        OutputFormat::Json => set.to_json(),
        OutputFormat::Csv => set.to_csv(),
    };
    emit(&text, common.out.as_ref())?;
    if common.summary {
        eprint!("{}", set.summary_text());
    }
    Ok(if set.all_passed() { 0 } else { EXIT_FAIL })
}

fn run_campaign(
    common: &Common,
    f: fn(&Corpus, &[FamilySpec], &CampaignOptions) -> orderstat_bounds::error::Result<ReportSet>,
) -> Result<u8, Error> {
    let s = settings(common)?;
    let specs = campaign::parse_families(&s.family)?;
    let corpus = load_corpus(&s, common)?;
    let set = f(&corpus, &specs, &options(&s, common))?;
    emit_reports(&set, &s, common)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::VerifyMain(c) => run_campaign(&c, campaign::run_verify_main),
        Command::VerifyLp(c) => run_campaign(&c, campaign::run_verify_lp),
        Command::Lemmas(c) => run_campaign(&c, campaign::run_lemmas),
        Command::FamilyCheck(c) => {
            let s = settings(&c)?;
            let specs = campaign::parse_families(&s.family)?;
            let mut out = String::new();
            let mut uniform = true;
            for spec in &specs {
                let cert = campaign::run_family_check(spec, s.enum_cap)?;
                uniform &= cert.marginals_uniform;
                out.push_str(&certificate_to_json(&cert));
                out.push('\n');
            }
            emit(&out, c.out.as_ref())?;
            Ok(if uniform { 0 } else { EXIT_HYPOTHESIS })
        }
        Command::Sample(a) => {
            let s = settings(&a.common)?;
            let specs = campaign::parse_families(&s.family)?;
            let [spec] = specs.as_slice() else {
                return Err(Error::Parse("sample needs exactly one --family".into()));
            };
            let fam = spec.standalone(s.enum_cap)?;
            let maps = fam.sample(s.seed, a.count)?;
            let body: Vec<String> = maps
                .iter()
                .map(|g| {
                    let one: Vec<String> = g.iter().map(|j| (j + 1).to_string()).collect();
                    format!("[{}]", one.join(","))
                })
                .collect();
            let text = format!(
                "{{\"family\":\"{}\",\"maps\":[{}],\"seed\":{}}}\n",
                fam.descriptor(),
                body.join(","),
                s.seed
            );
            emit(&text, a.common.out.as_ref())?;
            Ok(0)
        }
        Command::Corpus { command: CorpusCommand::Gen(g) } => {
            let common = Common { seed: g.seed.clone(), config: g.config.clone(), ..Common::default() };
            let s = settings(&common)?;
            let spec = CorpusSpec::grid(g.max_n, g.max_cols, g.uniform, g.integer, g.sparse, s.seed);
            emit(&spec.generate().to_json(), g.out.as_ref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Error::Hypothesis { family, deviation, certificate }) => {
            eprintln!("osb: {family} does not have uniform marginals (worst deviation {deviation:e})");
            println!("{}", certificate_to_json(&certificate));
            ExitCode::from(EXIT_HYPOTHESIS)
        }
        Err(e) => {
            eprintln!("osb: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
