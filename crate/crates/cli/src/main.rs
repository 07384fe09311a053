//! `eopm` command-line tool.
//!
//! Exit codes: 0 pass, 1 a verification check failed, 2 invalid
//! configuration, 3 numerical failure, 4 approximation used out of domain.

mod cli;
mod commands;
mod failure;
mod table;

use std::process::ExitCode;

use commands::Verdict;

fn main() -> ExitCode {
    let args: Vec<String> = match std::env::args_os().map(|a| a.into_string()).collect() {
        Ok(args) => args,
        Err(bad) => {
            eprintln!("eopm: argument is not valid UTF-8: {bad:?}");
            return ExitCode::from(2);
        }
    };
    let parsed = match cli::parse(args) {
        Ok(parsed) => parsed,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let threads = parsed.command.common().threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(err) => {
            eprintln!("eopm: cannot start worker threads: {err}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| commands::run(&parsed.command)) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::CheckFailed) => ExitCode::from(1),
        Err(failure) => {
            eprintln!("eopm: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
