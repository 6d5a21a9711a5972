use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stabred::pipeline::{
    cmd_basechange, cmd_dot, cmd_enumerate, cmd_invariants, cmd_local_node, cmd_local_split,
    cmd_local_witness, cmd_numerology, cmd_reduce, cmd_stabilize, cmd_validate, CliError,
    OutputOptions,
};

/// Stable reduction of degenerating curve families on exact dual-graph
/// models.
#[derive(Parser)]
#[command(name = "stabred", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the resulting fiber file here
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    output: Option<PathBuf>,
    /// Write the move trace here
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Write Graphviz DOT of the result here
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
}

impl From<&OutputArgs> for OutputOptions {
    fn from(args: &OutputArgs) -> Self {
        OutputOptions {
            output: args.output.clone(),
            trace: args.trace.clone(),
            dot: args.dot.clone(),
        }
    }
}

#[derive(Args)]
struct DescentArgs {
    /// Base-change exponent (default: lcm of the multiplicities)
    #[arg(long = "N", value_name = "K")]
    n: Option<u64>,
    /// Explicit descent file instead of searching
    #[arg(long, value_name = "FILE", conflicts_with = "n")]
    descent: Option<PathBuf>,
    /// Cap on descent candidates kept by the search
    #[arg(long, value_name = "K", default_value_t = 4)]
    max_results: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check a fiber file; exit 0 iff it is a usable configuration
    Validate { file: PathBuf },
    /// Print intersection numbers, dualizing degrees, and the node list
    Invariants { file: PathBuf },
    /// Apply the base change t -> t^N, producing a reduced fiber
    Basechange {
        file: PathBuf,
        #[command(flatten)]
        descent: DescentArgs,
        #[command(flatten)]
        outputs: OutputArgs,
    },
    /// Contract unstable rational components of a reduced fiber
    Stabilize {
        file: PathBuf,
        #[command(flatten)]
        outputs: OutputArgs,
    },
    /// Full pipeline: validate, base change, stabilize, audit
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        descent: DescentArgs,
        #[command(flatten)]
        outputs: OutputArgs,
    },
    /// Closed-form quantities of a genus-g curve
    Numerology {
        #[arg(long, value_name = "G")]
        genus: String,
        /// Also print the Hilbert polynomial value at this twist
        #[arg(long, value_name = "N")]
        hilbert: Option<String>,
    },
    /// List every stable dual graph of the given genus
    Enumerate {
        #[arg(long, value_name = "G")]
        genus: u64,
        #[arg(long, value_name = "V")]
        max_vertices: usize,
    },
    /// Emit Graphviz DOT for a fiber file
    Dot {
        file: PathBuf,
        #[arg(short = 'o', long = "output", value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Local models of the base change at a point
    Local {
        #[command(subcommand)]
        op: LocalOp,
    },
}

#[derive(Subcommand)]
enum LocalOp {
    /// Node of branch multiplicities (a, b) under t -> t^N
    Node { a: u64, b: u64, n: u64 },
    /// Smooth point of a multiplicity-a component under t -> t^N
    Split { a: u64, n: u64 },
    /// Injectivity of the normalization map for branch multiplicities (a, b)
    Witness { a: u64, b: u64 },
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Invariants { file } => cmd_invariants(&file),
        Command::Basechange {
            file,
            descent,
            outputs,
        } => cmd_basechange(
            &file,
            descent.n,
            descent.descent.as_deref(),
            descent.max_results,
            &OutputOptions::from(&outputs),
        ),
        Command::Stabilize { file, outputs } => {
            cmd_stabilize(&file, &OutputOptions::from(&outputs))
        }
        Command::Reduce {
            file,
            descent,
            outputs,
        } => cmd_reduce(
            &file,
            descent.n,
            descent.descent.as_deref(),
            descent.max_results,
            &OutputOptions::from(&outputs),
        ),
        Command::Numerology { genus, hilbert } => cmd_numerology(&genus, hilbert.as_deref()),
        Command::Enumerate {
            genus,
            max_vertices,
        } => cmd_enumerate(genus, max_vertices),
        Command::Dot { file, output } => cmd_dot(&file, output.as_deref()),
        Command::Local { op } => match op {
            LocalOp::Node { a, b, n } => cmd_local_node(a, b, n),
            LocalOp::Split { a, n } => cmd_local_split(a, n),
            LocalOp::Witness { a, b } => cmd_local_witness(a, b),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
