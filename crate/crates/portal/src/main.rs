use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cliox_portal::{serve, state_from_config, PortalConfig};

/// Clio-X portal API server.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override the configured bind address.
    #[arg(long)]
    bind: Option<SocketAddr>,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt().with_target(false).init();
    let args = Args::parse();
    let mut config = match args.config.as_deref().map(PortalConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(bind) = args.bind {
        config.bind = bind;
    }
    let bind = config.bind;
    let state = match state_from_config(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("startup failed: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("cannot bind {bind}: {e}");
            return ExitCode::FAILURE;
        }
    };
    tracing::info!(%bind, "portal listening");
    match serve(state, listener).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("server error: {e}");
            ExitCode::FAILURE
        }
    }
}
