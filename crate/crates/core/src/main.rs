use std::io::{self, Write};
use std::process::ExitCode;

use pcakit::Error;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = pcakit::cli::run(std::env::args_os(), &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                // clap has already rendered a complete message
                Error::Usage(msg) if msg.starts_with("error:") => eprint!("{msg}"),
                _ => eprintln!("pcakit: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
