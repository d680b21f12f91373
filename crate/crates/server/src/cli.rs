use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use shortlist_core::bundled;
use shortlist_core::comparative::DEFAULT_BUCKET_CAP;
use shortlist_core::experiment::{find_task, load_tasks, read_trials_jsonl, SurveyResponse};
use shortlist_core::generator::generate_catalog;
use shortlist_core::reference::reproduce;
use shortlist_core::report::{
    build_report, likert_csv, score_all, scores_csv, usability_csv, VariantCatalogs,
};
use shortlist_core::{correct_answer_set, load_catalog_path, Catalog, TaskSpec};

use crate::api::{app, AppConfig, AppState};

#[derive(Debug, Parser)]
#[command(
    name = "shortlist",
    version,
    about = "Progressive product shortlisting engine"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve {
        /// Catalog files; the first serves the typical arm, the second the
        /// visualization arm. Defaults to the bundled catalogs.
        #[arg(long = "catalog")]
        catalogs: Vec<PathBuf>,
        /// Generate both catalogs from this seed (and seed + 1) instead.
        #[arg(long, conflicts_with = "catalogs")]
        seed: Option<u64>,
        #[arg(long)]
        tasks: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = DEFAULT_BUCKET_CAP)]
        bucket_cap: usize,
        /// Append finished trials to this JSON-lines file.
        #[arg(long)]
        trial_log: Option<PathBuf>,
        /// Directory served under /assets.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Write a synthetic smartphone catalog as JSON.
    GenCatalog {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = bundled::CATALOG_SIZE)]
        count: usize,
        #[arg(long)]
        variant: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the correct answer set of a task, one product id per line.
    Oracle {
        #[arg(long)]
        task: String,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
    /// Score a trial log and print one CSV row per trial.
    Score {
        #[arg(long)]
        logs: PathBuf,
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the usability report from trial logs and surveys.
    Analyze {
        #[arg(long, required_unless_present = "reference")]
        logs: Option<PathBuf>,
        /// JSON array of survey responses.
        #[arg(long)]
        surveys: Option<PathBuf>,
        #[command(flatten)]
        study: StudyArgs,
        /// Report path; CSV tables are written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Re-derive the published study figures instead of reading logs.
        #[arg(long)]
        reference: bool,
    },
}

#[derive(Debug, clap::Args)]
pub struct StudyArgs {
    #[arg(long)]
    pub typical_catalog: Option<PathBuf>,
    #[arg(long)]
    pub visualization_catalog: Option<PathBuf>,
    #[arg(long)]
    pub tasks: Option<PathBuf>,
}

impl StudyArgs {
    fn load(&self) -> anyhow::Result<(Catalog, Catalog, Vec<TaskSpec>)> {
        let typical = match &self.typical_catalog {
            Some(p) => read_catalog(p)?,
            None => bundled::baseline_catalog(),
        };
        let visualization = match &self.visualization_catalog {
            Some(p) => read_catalog(p)?,
            None => bundled::visualization_catalog(),
        };
        Ok((typical, visualization, read_tasks(self.tasks.as_deref())?))
    }
}

fn read_catalog(path: &Path) -> anyhow::Result<Catalog> {
    load_catalog_path(path).with_context(|| format!("loading catalog {}", path.display()))
}

fn read_tasks(path: Option<&Path>) -> anyhow::Result<Vec<TaskSpec>> {
    match path {
        None => Ok(bundled::tasks()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(load_tasks(&text)?)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Serve {
            catalogs,
            seed,
            tasks,
            host,
            port,
            bucket_cap,
            trial_log,
            assets,
        } => {
            let catalogs = match (catalogs.is_empty(), seed) {
                (false, _) => catalogs
                    .iter()
                    .map(|p| read_catalog(p))
                    .collect::<anyhow::Result<_>>()?,
                (true, Some(s)) => vec![
                    generate_catalog(s, bundled::CATALOG_SIZE, bundled::BASELINE_TAG),
                    generate_catalog(s + 1, bundled::CATALOG_SIZE, bundled::VISUALIZATION_TAG),
                ],
                (true, None) => vec![
                    bundled::baseline_catalog(),
                    bundled::visualization_catalog(),
                ],
            };
            let state = AppState::new(AppConfig {
                catalogs,
                tasks: read_tasks(tasks.as_deref())?,
                bucket_cap,
                trial_log,
                asset_dir: assets,
            })?;
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .context("bad listen address")?;
            serve(state, addr)
        }
        Command::GenCatalog {
            seed,
            count,
            variant,
            out,
        } => {
            if count == 0 {
                bail!("count must be positive");
            }
            let catalog = generate_catalog(seed, count, &variant);
            emit(out.as_deref(), &(catalog.to_json() + "\n"))
        }
        Command::Oracle {
            task,
            catalog,
            tasks,
        } => {
            let catalog = read_catalog(&catalog)?;
            let tasks = read_tasks(tasks.as_deref())?;
            let answers = correct_answer_set(&catalog, find_task(&tasks, &task)?)?;
            let mut text = String::new();
            for id in answers {
                text.push_str(&id);
                text.push('\n');
            }
            emit(None, &text)
        }
        Command::Score { logs, study, out } => {
            let (typical, visualization, tasks) = study.load()?;
            let trials = read_trials_jsonl(
                &fs::read_to_string(&logs).with_context(|| logs.display().to_string())?,
            )?;
            let scored = score_all(
                &tasks,
                VariantCatalogs {
                    typical: &typical,
                    visualization: &visualization,
                },
                &trials,
            )?;
            emit(out.as_deref(), &scores_csv(&scored))
        }
        Command::Analyze {
            logs,
            surveys,
            study,
            out,
            reference,
        } => {
            if reference {
                let r = reproduce()?;
                return emit(Some(&out), &(serde_json::to_string_pretty(&r)? + "\n"));
            }
            let logs = logs.expect("clap requires --logs without --reference");
            let (typical, visualization, tasks) = study.load()?;
            let trials = read_trials_jsonl(
                &fs::read_to_string(&logs).with_context(|| logs.display().to_string())?,
            )?;
            let surveys: Vec<SurveyResponse> = match &surveys {
                Some(p) => serde_json::from_str(
                    &fs::read_to_string(p).with_context(|| p.display().to_string())?,
                )?,
                None => Vec::new(),
            };
            for s in &surveys {
                s.validate()?;
            }
            let scored = score_all(
                &tasks,
                VariantCatalogs {
                    typical: &typical,
                    visualization: &visualization,
                },
                &trials,
            )?;
            let report = build_report(&tasks, &scored, &surveys)?;
            emit(Some(&out), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            let dir = out
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            emit(Some(&dir.join("usability.csv")), &usability_csv(&report))?;
            emit(Some(&dir.join("scores.csv")), &scores_csv(&scored))?;
            if !report.satisfaction.is_empty() {
                emit(
                    Some(&dir.join("likert.csv")),
                    &likert_csv(&report.satisfaction),
                )?;
            }
            Ok(())
        }
    }
}

fn serve(state: AppState, addr: SocketAddr) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!("listening on {}", listener.local_addr()?);
        axum::serve(listener, app(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
