use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use derivkit_cli::args::Args;
use derivkit_cli::CliError;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match real_main(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("derivkit: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}

fn real_main(args: &Args) -> Result<u8> {
    Ok(derivkit_cli::run(args)?)
}
