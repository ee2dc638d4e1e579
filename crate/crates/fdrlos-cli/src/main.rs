use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

mod plot;
mod records;
mod run;
mod settings;
mod values;

use records::Record;
use settings::{Cli, Command, Settings};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

/// A request the program cannot act on, as opposed to a numerical failure.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn execute(cmd: &Command) -> Result<(Vec<Record>, Settings)> {
    let s = Settings::resolve(cmd.flags()).map_err(|e| Usage(format!("{e:#}")))?;
    let mut records = match cmd {
        Command::Point(_) => run::point(&s)?,
        Command::Sweep(_) => run::sweep(&s)?,
        Command::Grid(_) => run::grid(&s)?,
        Command::Errors(_) => run::errors(&s)?,
        Command::Table1(_) => run::table1(&s)?,
        Command::Validate(_) => run::validate(&s)?,
    };
    records::sort(&mut records);
    match &s.output {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            records::write(&records, s.format, BufWriter::new(f))?;
        }
        None => records::write(&records, s.format, io::stdout().lock())?,
    }
    if let (Some(script), Some(data)) = (&s.plot_script, &s.output) {
        std::fs::write(script, plot::script(cmd, data))
            .with_context(|| format!("cannot create {}", script.display()))?;
    }
    Ok((records, s))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match execute(&cli.command) {
        Ok((records, _)) => {
            let failed = records.iter().filter(|r| r.failed()).count();
            let mismatched = records.iter().filter(|r| r.mismatch()).count();
            // grid cells may fail individually without failing the run
            let tolerate = matches!(cli.command, Command::Grid(_));
            if failed > 0 {
                eprintln!("{}: {failed} record(s) failed numerically", cli.command.name());
            }
            if mismatched > 0 {
                eprintln!("{}: {mismatched} record(s) outside tolerance", cli.command.name());
            }
            if failed > 0 && !tolerate {
                ExitCode::from(EXIT_NUMERIC)
            } else if mismatched > 0 {
                ExitCode::from(EXIT_MISMATCH)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_NUMERIC)
            }
        }
    }
}
