//! Argument parsing and dispatch.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::commands;
use crate::error::{RunError, EXIT_ASSERTION, EXIT_OK, EXIT_USAGE};
use crate::params::{parse_config, Params};
use crate::report::{Format, Report};

/// Exact experiments with diagonal cubic forms over F_q(t).
///
/// Every subcommand reads its parameters from flags, from a `key=value`
/// config file (`--config`), or from built-in defaults, in that order.
#[derive(Parser, Debug)]
#[command(name = "ffcubes", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// Base field: a prime power, `q=<int>` or `p=<int>,h=<int>,mod=<poly in g>`.
    #[arg(long, global = true, visible_alias = "q")]
    pub field: Option<String>,
    /// Largest number of tuples or vectors a single enumeration may visit.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Worker threads (0 = one per core). Never changes any value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Emit CSV.
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Emit JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Re-evaluate integrals one digit deeper and check every truncation (0 = off).
    #[arg(long = "paranoid-depth", global = true)]
    pub paranoid_depth: Option<u32>,
    /// Seed for sampled families.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Config file of `key=value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the output here instead of stdout; the manifest goes next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Manifest path (default: `<out>.manifest.json`, or stderr without `--out`).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[arg(long = "inject-fault", global = true, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Point counts N(B) of F(x) = 0 with |x| < q^B.
    Count {
        /// Coefficients F_1,...,F_n (default 1,1,1,1).
        #[arg(long)]
        form: Option<String>,
        #[arg(long = "b-min")]
        b_min: Option<u32>,
        /// Largest B (default 2).
        #[arg(long = "b-max")]
        b_max: Option<u32>,
        /// `full` or `annulus` (default full).
        #[arg(long)]
        weight: Option<String>,
        /// `mitm` or `exhaustive` (default mitm).
        #[arg(long)]
        method: Option<String>,
    },
    /// Davenport's M(P): x1^3+x2^3+x3^3 = x4^3+x5^3+x6^3 with |x| < q^B.
    Msum {
        /// Largest B (default 4).
        #[arg(long = "b-max")]
        b_max: Option<u32>,
        /// Cross-check meet-in-the-middle exhaustively up to this B (default 2).
        #[arg(long = "cross-check")]
        cross_check: Option<u32>,
    },
    /// R_n(P) against the truncated major-arc prediction.
    Waring {
        /// Number of cubes (default 7).
        #[arg(long)]
        n: Option<usize>,
        /// Target polynomial (default t^4+t).
        #[arg(long = "P")]
        p: Option<String>,
        /// Largest singular-series level (default B).
        #[arg(long = "Y")]
        y: Option<u32>,
        /// Deepest singular-integral level (default: deepest within budget, at most 3B+1).
        #[arg(long = "sigma-k")]
        sigma_k: Option<i64>,
    },
    /// Both sides of the delta-method identity and its N0 + E1 + E2 split.
    DeltaVerify {
        /// Coefficients (default 1,1).
        #[arg(long)]
        form: Option<String>,
        /// Scaling polynomial (default t^2).
        #[arg(long = "P")]
        p: Option<String>,
        /// Farey level Q (default ceil(3 deg P / 2)).
        #[arg(long = "Q")]
        q_log: Option<i64>,
        /// Sum E1 term by term instead of as the remainder.
        #[arg(long = "direct-e1")]
        direct_e1: bool,
    },
    /// Nonzero zeros of the dual form in the box deg c_i <= C.
    DualCount {
        /// Coefficients (default 1,1,1,1).
        #[arg(long)]
        form: Option<String>,
        /// C (default 1).
        #[arg(long = "c-deg")]
        c_deg: Option<u32>,
    },
    /// Exponential-sum bound audits and closed-form checks.
    Audit {
        /// hua, prime-power, deligne, square-modulus, weyl or sr-check (default hua).
        #[arg(long)]
        family: Option<String>,
        #[arg(long = "max-deg")]
        max_deg: Option<usize>,
        #[arg(long = "max-k")]
        max_k: Option<u32>,
        #[arg(long)]
        form: Option<String>,
        #[arg(long)]
        deg: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Weyl-sum length B for the weyl family (default 2).
        #[arg(long)]
        b: Option<u32>,
        /// Digit depth of the weyl grid (default 2B+1).
        #[arg(long)]
        depth: Option<u32>,
    },
    /// The Dirichlet dissection of T, and arc classification of a point.
    Dissect {
        /// Level Q (default 2).
        #[arg(long = "Q")]
        q_log: Option<i64>,
        /// Classify this point, e.g. `t^-1+t^-3`.
        #[arg(long)]
        alpha: Option<String>,
        /// Waring B for the classification (default Q).
        #[arg(long)]
        b: Option<u32>,
    },
    /// n = 4: N(B) split into points on rational lines and the rest.
    Lines {
        /// Coefficients (default 1,1,1,1).
        #[arg(long)]
        form: Option<String>,
        /// Largest B (default 2).
        #[arg(long = "b-max")]
        b_max: Option<u32>,
    },
    /// n = 4: the special-solution transform, per modulus and theta cell.
    SpecialVerify {
        /// Coefficients (default 1,1,1,1).
        #[arg(long)]
        form: Option<String>,
        /// Scaling polynomial (default t).
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long = "Q")]
        q_log: Option<i64>,
        /// Comma-separated monic moduli (default 1,t,t^2,t^2+t).
        #[arg(long)]
        moduli: Option<String>,
        /// Which parametrization of the special solutions to use (default 0).
        #[arg(long)]
        setup: Option<usize>,
    },
}

fn long_names(cmd: &clap::Command) -> BTreeMap<String, String> {
    cmd.get_arguments()
        .filter_map(|a| {
            a.get_long()
                .map(|l| (a.get_id().as_str().to_string(), l.to_string()))
        })
        .collect()
}

/// Flags given on the command line, keyed by their long names.
fn cli_pairs(m: &ArgMatches, names: &BTreeMap<String, String>, out: &mut BTreeMap<String, String>) {
    for id in m.ids() {
        let id = id.as_str();
        if m.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        let (Some(key), Ok(Some(vals))) = (names.get(id), m.try_get_raw(id)) else {
            continue;
        };
        let v: Vec<String> = vals.map(|x| x.to_string_lossy().into_owned()).collect();
        out.insert(key.clone(), v.join(","));
    }
}

pub(crate) struct Ctx {
    pub params: Params,
    pub fault: Option<String>,
}

impl Ctx {
    pub fn budget(&self) -> Result<u64, RunError> {
        self.params.get("budget", 50_000_000u64)
    }

    pub fn paranoid(&self) -> Result<bool, RunError> {
        Ok(self.params.get("paranoid-depth", 0u32)? > 0)
    }
}

/// Parses `args`, runs the subcommand and writes its output; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&matches, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(
    matches: &ArgMatches,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, RunError> {
    let cli = Cli::from_arg_matches(matches).map_err(|e| RunError::Usage(e.to_string()))?;
    let root = Cli::command();
    let (sub_name, sub_m) = matches.subcommand().expect("subcommand is required");
    let sub_cmd = root.find_subcommand(sub_name).expect("known subcommand");
    let mut names = long_names(&root);
    names.extend(long_names(sub_cmd));
    let known: BTreeSet<String> = names.values().cloned().collect();
    let mut pairs = BTreeMap::new();
    cli_pairs(matches, &names, &mut pairs);
    cli_pairs(sub_m, &names, &mut pairs);
    pairs.remove("csv");
    pairs.remove("json");
    let file = match &cli.global.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    let params = Params::new(file, pairs, &known)?;
    let format = if cli.global.json {
        Format::Json
    } else if cli.global.csv {
        Format::Csv
    } else {
        Format::Text
    };
    let threads = params.get("threads", 0usize)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunError::Usage(format!("thread pool: {e}")))?;
    let ctx = Ctx {
        params,
        fault: cli.global.inject_fault.clone(),
    };
    let report: Report = pool.install(|| commands::dispatch(sub_name, &ctx))?;

    let output = report
        .render(format)
        .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    let manifest = report.manifest(&ctx.params.resolved(), format, &output);
    let manifest_text = serde_json::to_string_pretty(&manifest).expect("json") + "\n";
    match &cli.global.out {
        Some(path) => {
            std::fs::write(path, &output)?;
            let mpath = cli.global.manifest.clone().unwrap_or_else(|| {
                let mut p = path.clone().into_os_string();
                p.push(".manifest.json");
                PathBuf::from(p)
            });
            std::fs::write(mpath, manifest_text)?;
        }
        None => {
            stdout.write_all(output.as_bytes())?;
            match &cli.global.manifest {
                Some(p) => std::fs::write(p, manifest_text)?,
                None => writeln!(
                    stderr,
                    "manifest: {}",
                    serde_json::to_string(&manifest).expect("json")
                )?,
            }
        }
    }
    if let Some(f) = &report.failure {
        writeln!(
            stderr,
            "assertion failed: {}\nwitness: {}",
            f.message, f.witness
        )?;
        return Ok(EXIT_ASSERTION);
    }
    Ok(EXIT_OK)
}
