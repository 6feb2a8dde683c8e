use std::process::ExitCode;

use clap::Parser;

use dirac_stab::error::Error;
use dirac_stab_cli::args::Args;
use dirac_stab_cli::{error_json, run, write_error};

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(t) = args.threads {
        dirac_stab::exec::configure_threads(t);
    }
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => return fail(&e, None, None),
    };
    let hash = cfg.hash();
    match run(&cfg) {
        Ok(outcome) => {
            for f in outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e, Some(&cfg.output), Some(&hash)),
    }
}

fn fail(err: &Error, dir: Option<&std::path::Path>, hash: Option<&str>) -> ExitCode {
    eprint!("{}", error_json(err, hash));
    if let Some(d) = dir {
        write_error(d, err, hash);
    }
    match err {
        Error::ConfigInvalid { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}
