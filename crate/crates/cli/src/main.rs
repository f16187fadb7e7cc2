mod report;
mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use permudiag::fillings::{calibrate_families, count_fillings_jobs, default_anchors, ConventionTable, FamilyName};
use permudiag::matcount::{count_matrices, M_poly_theorem, PrimeField, DEFAULT_BUDGET};
use permudiag::diagram::sw_diagram;
use permudiag::{parse, Error, Permutation};
use serde::Serialize;

use report::{Count, SurveyRow};
use suites::{Suite, SuiteArgs, SuiteError};

const EXIT_FAIL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_REFUSED: u8 = 3;

/// Per-count budget used by `survey` when `--budget` is not given.
const SURVEY_BUDGET: u128 = 1_000_000;

#[derive(Parser, Debug)]
#[command(name = "permudiag", version, about = "Permutation diagrams, Bruhat intervals, fillings and matrix counts")]
struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cap on estimated search nodes for a single matrix count
    #[arg(long, global = true)]
    budget: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagrams, statistics and counts for one permutation
    Info {
        w: String,
        #[arg(long)]
        json: bool,
    },
    /// Run an exhaustive verification suite
    Verify {
        suite: Suite,
        #[arg(long)]
        n: Option<usize>,
        /// Primes, comma separated or repeated
        #[arg(long = "p", value_delimiter = ',')]
        primes: Vec<u32>,
        /// Allow the slow size bounds
        #[arg(long)]
        long: bool,
        /// Print the full report as JSON
        #[arg(long)]
        json: bool,
        /// Write the full JSON report here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One row per permutation of size n, in lexicographic order
    Survey {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to the extension of --out, else json
        #[arg(long)]
        format: Option<Format>,
        /// Primes for the matrix columns
        #[arg(long = "p", value_delimiter = ',', default_value = "2")]
        primes: Vec<u32>,
    },
    /// Count matrices supported off O_w
    Matcount {
        w: String,
        #[arg(long = "p", value_delimiter = ',', default_value = "2")]
        primes: Vec<u32>,
        /// Target rank (defaults to n)
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Count restricted fillings of E_w
    Fillings {
        w: String,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Recompute the filling convention table from its anchors
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failure carrying its exit code and message.
struct Exit(u8, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotAPermutation(_)
            | Error::NotPrime(_)
            | Error::InvalidBoard(_)
            | Error::ConventionFile(_)
            | Error::IndexOutOfRange { .. } => EXIT_PARSE,
            Error::SearchTooLarge { .. } | Error::BoardTooLarge { .. } | Error::SizeBound { .. } => EXIT_REFUSED,
            _ => EXIT_FAIL,
        };
        Exit(code, e.to_string())
    }
}

impl From<io::Error> for Exit {
    fn from(e: io::Error) -> Self {
        Exit(EXIT_FAIL, format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn perm(text: &str) -> Result<Permutation, Exit> {
    Ok(parse(text)?)
}

fn fields(primes: &[u32]) -> Result<Vec<PrimeField>, Exit> {
    Ok(primes.iter().map(|&p| PrimeField::new(p)).collect::<Result<_, _>>()?)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Exit> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Exit(EXIT_FAIL, e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Exit> {
    let mut out = BufWriter::new(File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Exit> {
    let table = || -> Result<ConventionTable, Exit> { Ok(ConventionTable::load()?) };
    match cli.command {
        Command::Info { w, json } => {
            let rep = report::info(&perm(&w)?)?;
            if json {
                print_json(&rep)
            } else {
                print!("{}", report::render_info(&rep));
                Ok(())
            }
        }
        Command::Verify { suite, n, primes, long, json, out } => {
            let args = SuiteArgs { n, primes, long, budget: cli.budget.unwrap_or(DEFAULT_BUDGET) };
            let rep = match suites::run(suite, &args, &table()?) {
                Ok(rep) => rep,
                Err(SuiteError::Refused(r)) => return Err(Exit(EXIT_REFUSED, r.0)),
                Err(SuiteError::Lib(e)) => return Err(e.into()),
            };
            if let Some(path) = &out {
                write_file(path, |w| {
                    serde_json::to_writer_pretty(&mut *w, &rep)?;
                    w.write_all(b"\n")
                })?;
            }
            if json {
                print_json(&rep)?;
            } else {
                print!("{}", rep.summary());
            }
            if rep.passed() {
                Ok(())
            } else {
                Err(Exit(EXIT_FAIL, format!("{} failed {} of {} checks", suite.id(), rep.failures, rep.checked)))
            }
        }
        Command::Survey { n, out, format, primes } => {
            let fs = fields(&primes)?;
            let rows = report::survey(n, &table()?, &fs, cli.budget.unwrap_or(SURVEY_BUDGET))?;
            let format = format.unwrap_or(match out.as_ref().and_then(|p| p.extension()) {
                Some(ext) if ext == "csv" => Format::Csv,
                _ => Format::Json,
            });
            let emit = |w: &mut dyn Write| match format {
                Format::Json => report::write_json(&rows, w),
                Format::Csv => report::write_csv(&rows, &fs, w),
            };
            match &out {
                Some(path) => write_file(path, emit)?,
                None => emit(&mut io::stdout().lock())?,
            }
            let bad: Vec<&SurveyRow> = rows.iter().filter(|r| !r.consistent()).collect();
            if bad.is_empty() {
                Ok(())
            } else {
                Err(Exit(EXIT_FAIL, format!("inconsistent rows: {}", bad.iter().map(|r| r.w.to_string()).collect::<Vec<_>>().join(" "))))
            }
        }
        Command::Matcount { w, primes, rank, json } => {
            let w = perm(&w)?;
            let n = w.len();
            let rank = rank.unwrap_or(n);
            let budget = cli.budget.unwrap_or(DEFAULT_BUDGET);
            #[derive(Serialize)]
            struct Row {
                p: u32,
                rank: usize,
                count: u128,
                normalized: Option<u128>,
                theorem: Option<Count>,
            }
            let theorem = M_poly_theorem(&w).ok();
            let mut rows = Vec::new();
            for f in fields(&primes)? {
                let count = count_matrices(n, &sw_diagram(&w), f, rank, budget)?;
                let div = (f.p() as u128 - 1).pow(rank as u32);
                let normalized = (count % div == 0).then(|| count / div);
                let theorem = (rank == n).then(|| match &theorem {
                    Some(m) => Count::Value(m.eval(f.p() as i128) as u128),
                    None => Count::Skipped,
                });
                rows.push(Row { p: f.p(), rank, count, normalized, theorem });
            }
            if json {
                return print_json(&rows);
            }
            if let Some(m) = &theorem {
                println!("M_{w}(q) = {m}");
            }
            for r in rows {
                let norm = r.normalized.map_or("-".to_string(), |v| v.to_string());
                let th = r.theorem.map_or("-".to_string(), |v| v.to_string());
                println!("p={} rank={} count={} normalized={norm} theorem={th}", r.p, r.rank, r.count);
            }
            Ok(())
        }
        Command::Fillings { w, family, json } => {
            let w = perm(&w)?;
            let table = table()?;
            let families = match family {
                Some(name) => vec![name.parse::<FamilyName>()?],
                None => FamilyName::ALL.to_vec(),
            };
            let jobs = cli.jobs.unwrap_or_else(rayon::current_num_threads);
            #[derive(Serialize)]
            struct Row {
                family: &'static str,
                count: u64,
                gf: Vec<i64>,
            }
            let mut rows = Vec::new();
            for fam in families {
                let c = count_fillings_jobs(&w, table.patterns(fam), jobs)?;
                rows.push(Row { family: fam.slug(), count: c.count, gf: c.gf.coeffs().to_vec() });
            }
            if json {
                return print_json(&rows);
            }
            for r in rows {
                println!("{:<18}{:>10}  {:?}", r.family, r.count, r.gf);
            }
            Ok(())
        }
        Command::Calibrate { out } => {
            let found = calibrate_families(&default_anchors())?;
            let text = found.to_json_pretty();
            match &out {
                Some(path) => write_file(path, |w| w.write_all(text.as_bytes()))?,
                None => print!("{text}"),
            }
            let active = table()?;
            eprintln!("{}", found.describe());
            if found != active {
                return Err(Exit(EXIT_FAIL, "calibrated table differs from the active convention table".into()));
            }
            Ok(())
        }
    }
}
