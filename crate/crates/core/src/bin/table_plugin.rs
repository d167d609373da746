//! A fill/embed plugin answering from a static table.
//!
//! ```text
//! semsketch-table-plugin [--table table.json] [--embed-dim N]
//! ```
//!
//! `--table` enables `fill` (JSON `{"templates": {template: [{lemma, score}]}}`),
//! `--embed-dim` enables `embed` with hashed character counts.

use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use semsketch::fill::plugin::serve;
use semsketch::fill::{CharBagEmbedder, Embedder, FillModel, FillTable, TableFillModel};

#[derive(Parser)]
#[command(about = "Serve fill/embed requests from a static table over stdin/stdout")]
struct Args {
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    embed_dim: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let fill = match &args.table {
        None => None,
        Some(path) => {
            let parsed = std::fs::read_to_string(path)
                .map_err(|e| e.to_string())
                .and_then(|s| FillTable::parse(&s).map_err(|e| e.to_string()));
            match parsed {
                Ok(table) => Some(TableFillModel::new(table)),
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
    };
    let embed = args.embed_dim.map(|dim| CharBagEmbedder { dim });
    let stdin = io::stdin().lock();
    let stdout = io::stdout().lock();
    match serve(
        BufReader::new(stdin),
        stdout,
        fill.as_ref().map(|m| m as &dyn FillModel),
        embed.as_ref().map(|e| e as &dyn Embedder),
    ) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
