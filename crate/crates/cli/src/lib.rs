//! The `cliox` command-line client.
//!
//! Every portal route has a subcommand. Output is human-readable by default
//! and a single JSON document with `--json`. Exit status is 0 on success,
//! 1 on a domain or connection error and 2 on a usage error.

pub mod client;
pub mod commands;
pub mod demo;
pub mod error;
pub mod profile;
pub mod summary;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use crate::client::Client;
use crate::commands::{AuditCommand, Cli, Command, Context, CorpusCommand, IdentityCommand, Output};
pub use crate::error::CliError;

fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let ctx = Context { client: Client::new(&cli.api)?, profile: cli.profile.clone() };
    match &cli.command {
        Command::Identity(IdentityCommand::Create { roles }) => commands::identity_create(&ctx, roles),
        Command::Identity(IdentityCommand::Show) => commands::identity_show(&ctx),
        Command::Faucet { amount } => commands::faucet(&ctx, *amount),
        Command::Publish(a) => commands::publish(&ctx, a),
        Command::Search { query, asset_type, max_price, tag } => {
            commands::search(&ctx, query, asset_type.as_deref(), *max_price, tag.as_deref())
        }
        Command::Show { did } => commands::show(&ctx, did),
        Command::Retire { did } => commands::retire(&ctx, did),
        Command::Consent { did } => commands::consent(&ctx, did),
        Command::Buy { dataset, algorithm, hours, accept_licenses } => {
            commands::buy(&ctx, dataset, algorithm, *hours, *accept_licenses)
        }
        Command::Run(a) => commands::run(&ctx, a),
        Command::Status { job } => commands::status(&ctx, job),
        Command::Result { job, out } => commands::result(&ctx, job, out.as_deref()),
        Command::Events { since } => commands::events(&ctx, *since),
        Command::Audit(AuditCommand::Verify) => commands::audit_verify(&ctx),
        Command::Audit(AuditCommand::List { page }) => commands::audit_list(&ctx, *page),
        Command::Corpus(CorpusCommand::Ingest { dir }) => commands::corpus_ingest(dir),
        Command::Governance => commands::governance(&ctx),
        Command::Demo(a) => demo::demo(&ctx, a),
    }
}

/// Parse `args`, run the command and print its output. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return 2;
        }
    };
    if let Ok(api) = std::env::var("CLIOX_API") {
        cli.api = api;
    }
    if let Ok(profile) = std::env::var("CLIOX_PROFILE") {
        cli.profile = profile;
    }
    match dispatch(&cli) {
        Ok((doc, text)) => {
            let _ = if cli.json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).unwrap_or_default())
            } else {
                writeln!(stdout, "{text}")
            };
            0
        }
        Err(e) => {
            if cli.json {
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&e.to_json()).unwrap_or_default());
            }
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(stderr, "run `cliox --help` for usage");
            }
            e.exit_code()
        }
    }
}
