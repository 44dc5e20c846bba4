use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opext_cli::generate::{default_dims, generate};
use opext_cli::json::{
    to_canonical_string, Failure, InstanceFile, Kind, ResultFile, Status, ToleranceOverrides,
};
use opext_cli::run::{run_instance, RunOptions};
use opext_cli::verify::verify;
use opext_core::parrott::Endpoint;

#[derive(Parser)]
#[command(
    name = "opext",
    version,
    about = "Extremal extensions of partial operators and functionals"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_psd: Option<f64>,
    #[arg(long, global = true)]
    tol_herm: Option<f64>,
    #[arg(long, global = true)]
    tol_eq: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Which Parrott completion to return.
    #[arg(long, global = true, value_enum)]
    endpoint: Option<EndpointArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EndpointArg {
    Min,
    Max,
    Mid,
}

impl From<EndpointArg> for Endpoint {
    fn from(e: EndpointArg) -> Self {
        match e {
            EndpointArg::Min => Endpoint::Min,
            EndpointArg::Max => Endpoint::Max,
            EndpointArg::Mid => Endpoint::Mid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Kvn,
    SaExt,
    Parrott,
    StrongParrott,
    FunctionalExt,
    CstarCheck,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Kvn => Kind::Kvn,
            KindArg::SaExt => Kind::SaExt,
            KindArg::Parrott => Kind::Parrott,
            KindArg::StrongParrott => Kind::StrongParrott,
            KindArg::FunctionalExt => Kind::FunctionalExt,
            KindArg::CstarCheck => Kind::CstarCheck,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Krein-von Neumann extension of a partial positive operator.
    Kvn { input: String },
    /// Extremal A-bounded extensions of a symmetric partial operator.
    SaExt { input: String },
    /// Parrott-type completion of two partial operators.
    Parrott { input: String },
    /// Contraction X with X S1 = S2 and T2 X = T1.
    StrongParrott { input: String },
    /// Extremal f-bounded extensions of a functional on a left ideal.
    FunctionalExt { input: String },
    /// Extendibility test for a functional on a left ideal.
    CstarCheck { input: String },
    /// Run an instance of whatever kind the file declares.
    Run { input: String },
    /// Print a random instance file with a known solution.
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
    },
    /// Check every invariant on a batch of random instances.
    Verify {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_input(input: &str) -> Result<InstanceFile, Failure> {
    let text = if input == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::invalid("Unreadable", format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(input)
            .map_err(|e| Failure::invalid("Unreadable", format!("{input}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::invalid("ParseError", format!("{input}: {e}")))
}

fn run_file(input: &str, expected: Option<Kind>, opts: &RunOptions) -> ResultFile {
    match read_input(input) {
        Ok(file) => run_instance(&file, expected, opts),
        Err(f) => ResultFile::failure(expected, &f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let tolerances = ToleranceOverrides {
        rank: g.tol_rank,
        psd: g.tol_psd,
        herm: g.tol_herm,
        eq: g.tol_eq,
    };
    let opts = RunOptions {
        tolerances,
        seed: g.seed,
        endpoint: g.endpoint.map(Endpoint::from),
    };
    let out = g.out.as_deref();

    let (text, code) = match cli.command {
        Command::Kvn { input } => result(run_file(&input, Some(Kind::Kvn), &opts)),
        Command::SaExt { input } => result(run_file(&input, Some(Kind::SaExt), &opts)),
        Command::Parrott { input } => result(run_file(&input, Some(Kind::Parrott), &opts)),
        Command::StrongParrott { input } => {
            result(run_file(&input, Some(Kind::StrongParrott), &opts))
        }
        Command::FunctionalExt { input } => {
            result(run_file(&input, Some(Kind::FunctionalExt), &opts))
        }
        Command::CstarCheck { input } => result(run_file(&input, Some(Kind::CstarCheck), &opts)),
        Command::Run { input } => result(run_file(&input, None, &opts)),
        Command::Gen { kind, n, dims } => {
            let kind = Kind::from(kind);
            let dims = dims.unwrap_or_else(|| default_dims(kind, n));
            match generate(kind, &dims, g.seed.unwrap_or(0)) {
                Ok(file) => (to_canonical_string(&file), 0),
                Err(e) => {
                    let mut failure = Failure::from(e);
                    failure.status = Status::InvalidInput;
                    result(ResultFile::failure(Some(kind), &failure))
                }
            }
        }
        Command::Verify { kind, count, dims } => match tolerances.resolve() {
            Ok(tol) => {
                let report = verify(
                    kind.into(),
                    count,
                    g.seed.unwrap_or(0),
                    dims.as_deref(),
                    &tol,
                );
                let code = if report.failed == 0 { 0 } else { 3 };
                (to_canonical_string(&report), code)
            }
            Err(e) => result(ResultFile::failure(Some(kind.into()), &Failure::from(e))),
        },
    };

    if let Err(e) = emit(out, &text) {
        eprintln!("opext: cannot write result: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

fn result(file: ResultFile) -> (String, u8) {
    let code = file.status.exit_code() as u8;
    (to_canonical_string(&file), code)
}
