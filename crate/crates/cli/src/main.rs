use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tqc_cli::{cmd_decompose, cmd_sim, cmd_synth, cmd_verify, parse_template, DEFAULT_VERIFY_TOL};

#[derive(Parser)]
#[command(name = "tqc", version, about = "Qutrit and qudit circuit synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TemplateArg {
    Eq4,
    Eq5,
    Qudit,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a one-qudit unitary into two-level rotations.
    Decompose {
        matrix_file: PathBuf,
        #[arg(long, value_enum, default_value = "eq5")]
        template: TemplateArg,
        /// Write the circuit here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a circuit against a matrix up to global phase.
    Verify {
        circuit_file: PathBuf,
        matrix_file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
        tol: f64,
    },
    /// Build a named construction, check it, and write it out.
    Synth {
        name: String,
        #[arg(allow_negative_numbers = true)]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the definitional target matrix.
        #[arg(long)]
        target_out: Option<PathBuf>,
    },
    /// Run a circuit on a basis ket such as `|12>`.
    Sim { circuit_file: PathBuf, ket: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Decompose {
            matrix_file,
            template,
            out,
        } => {
            let name = match template {
                TemplateArg::Eq4 => "eq4",
                TemplateArg::Eq5 => "eq5",
                TemplateArg::Qudit => "qudit",
            };
            let t = parse_template(name).expect("clap restricts the values");
            cmd_decompose(&matrix_file, t, out.as_deref())
        }
        Command::Verify {
            circuit_file,
            matrix_file,
            tol,
        } => cmd_verify(&circuit_file, &matrix_file, tol),
        Command::Synth {
            name,
            params,
            out,
            target_out,
        } => cmd_synth(&name, &params, out.as_deref(), target_out.as_deref()),
        Command::Sim { circuit_file, ket } => cmd_sim(&circuit_file, &ket),
    };
    print!("{}", outcome.render());
    ExitCode::from(outcome.exit_code as u8)
}
