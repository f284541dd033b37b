use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use planopt_cli::{run, write_output, Cli, CliError, Command, EXIT_IO, EXIT_USER};

fn serve(addr: Option<&str>) -> Result<(), CliError> {
    let mut config = planopt_service::Config::from_env().map_err(CliError::User)?;
    if let Some(a) = addr {
        config.addr = a.parse().map_err(|_| CliError::User(format!("--addr: cannot parse {a:?}")))?;
    }
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    runtime
        .block_on(planopt_service::serve(config))
        .map_err(|e| CliError::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USER } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Serve { addr } => serve(addr.as_deref()).map(|_| None),
        command => run(command).map(Some),
    };
    let output = match result {
        Ok(Some(o)) => o,
        Ok(None) => return ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    for w in &output.warnings {
        eprintln!("{w}");
    }
    let mut stdout = std::io::stdout().lock();
    let written = match (&output.document, &output.out) {
        (Some(doc), Some(path)) => {
            if let Err(e) = write_output(path, doc) {
                eprintln!("error: {}", e.message());
                return ExitCode::from(e.exit_code());
            }
            stdout.write_all(output.report.as_bytes())
        }
        (Some(doc), None) => {
            let _ = std::io::stderr().write_all(output.report.as_bytes());
            stdout.write_all(doc.as_bytes())
        }
        (None, _) => stdout.write_all(output.report.as_bytes()),
    };
    match written.and_then(|_| stdout.flush()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
