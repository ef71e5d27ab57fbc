use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;

use ichd_core::knowledge::KnowledgeBase;
use ichd_core::questionnaire::Questionnaire;

#[derive(Debug, Parser)]
#[command(name = "ichd-server", about = "Stateless headache questionnaire service")]
struct Args {
    /// Port to listen on.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Knowledge-base directory; the built-in knowledge base when omitted.
    #[arg(long)]
    kb_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let kb = match &args.kb_dir {
        Some(dir) => KnowledgeBase::load_dir(dir)
            .with_context(|| format!("loading knowledge base from {}", dir.display()))?,
        None => KnowledgeBase::shipped(),
    };
    for w in kb.warnings() {
        eprintln!("warning: {w}");
    }
    let q = Arc::new(Questionnaire::new(kb)?);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .context("invalid host or port")?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("listening on {}", listener.local_addr()?);
    ichd_service::serve(q, listener).await?;
    Ok(())
}
