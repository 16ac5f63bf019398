use std::fs::File;
use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use justify_core::engine::GroundAtom;
use justify_core::explain::{to_dot, Explainer, DEFAULT_MAX_GRAPHS};
use justify_core::engine::AssumptionSet;
use justify_core::npp_kb::{build_kb, load_kb_dir, write_kb_dir, KbConfig};
use justify_core::replay::{
    ingest_actions, ingest_sensors, replay, replay_concurrent, schedule, write_outputs, AttemptedAction,
    SensorSample, Session, DEFAULT_STEP,
};
use justify_core::rulelang::Program;
use justify_core::scenario::{check_fixtures, default_fixture_dir, synthesize_tmi2, write_fixtures, EVENTS};
use justify_service::{
    run_diagnosis_process, run_explanation_process, AppState, DiagnosisOptions, Endpoint, ExplanationOptions,
    SessionBackend, DEFAULT_PORT, PORT_ENV,
};

#[derive(Parser)]
#[command(name = "justify", version, about = "Stream diagnosis over a plant knowledge base, with explanation graphs")]
struct Cli {
    /// Print the knowledge-base configuration (defaults, or --config) and exit.
    #[arg(long)]
    show_config: bool,
    /// Configuration file of key=value lines, used with --show-config.
    #[arg(long, value_name = "FILE", requires = "show_config")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Replay sensor and action streams and write one document per window.
    Replay {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Evaluate windows in parallel (same result as sequential).
        #[arg(long)]
        concurrent: bool,
    },
    /// Print the explanation graphs of one atom in one window.
    Explain {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        atom: String,
        /// End of the window the atom is explained in.
        #[arg(long)]
        window: i64,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        /// Print only the graph with this index (canonical order).
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_GRAPHS)]
        max_graphs: usize,
    },
    /// Serve the HTTP API over a live replay.
    Serve {
        #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[command(flatten)]
        input: Input,
        /// Delay between window evaluations, so the session stays live.
        #[arg(long, default_value_t = 250, value_name = "MS")]
        pace_ms: u64,
    },
    /// Run the explanation process on a local socket for one diagnosis peer.
    ExplainServer {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: SocketAddr,
        #[command(flatten)]
        input: Input,
        /// Extra latency before each request is handled.
        #[arg(long, default_value_t = 0, value_name = "MS")]
        worker_delay_ms: u64,
    },
    /// Run the diagnosis process, sending explain requests to a peer.
    Diagnose {
        /// Explanation process address; omitted means diagnosis only.
        #[arg(long)]
        connect: Option<SocketAddr>,
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Write the received explain responses here, one per line.
        #[arg(long, value_name = "FILE")]
        transcript: Option<PathBuf>,
    },
    /// Write the synthetic TMI-2 fixture directory.
    SynthTmi2 {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Verify the shipped fixtures and replay them against the pinned outputs.
    CheckFixtures {
        #[arg(long, value_name = "DIR")]
        dir: Option<PathBuf>,
    },
    /// Write the rule files of the knowledge base.
    WriteKb {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Doc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Tmi2,
}

/// Where the rules, parameters and streams come from.
#[derive(Args)]
struct Input {
    /// Directory of *.kb rule files; the embedded knowledge base otherwise.
    #[arg(long, value_name = "DIR")]
    rules: Option<PathBuf>,
    /// key=value configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Shorthand for action_execution_time_range=600.
    #[arg(long, conflicts_with = "config")]
    short_suppression: bool,
    #[arg(long, value_name = "CSV", requires = "actions")]
    sensors: Option<PathBuf>,
    #[arg(long, value_name = "CSV", requires = "sensors")]
    actions: Option<PathBuf>,
    /// Synthesize the streams instead of reading CSV files.
    #[arg(long, value_enum, conflicts_with = "sensors")]
    scenario: Option<Scenario>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: i64,
    /// Last second replayed; defaults to the last time in the streams.
    #[arg(long)]
    horizon: Option<i64>,
}

struct Loaded {
    cfg: KbConfig,
    kb: Program,
    sensors: Vec<SensorSample>,
    actions: Vec<AttemptedAction>,
    step: i64,
    horizon: i64,
}

impl Loaded {
    fn session(&self) -> Result<Session> {
        Ok(Session::new(self.kb.clone(), &self.sensors, self.actions.clone(), self.step, self.horizon)?)
    }
}

fn read_config(path: Option<&Path>) -> Result<KbConfig> {
    let Some(p) = path else { return Ok(KbConfig::default()) };
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    let cfg: KbConfig = text.parse().with_context(|| format!("parsing {}", p.display()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn open(p: &Path) -> Result<File> {
    File::open(p).with_context(|| format!("opening {}", p.display()))
}

impl Input {
    fn load(&self) -> Result<Loaded> {
        let cfg = if self.short_suppression { KbConfig::short_suppression() } else { read_config(self.config.as_deref())? };
        let kb = match &self.rules {
            Some(dir) => load_kb_dir(dir, &cfg).with_context(|| format!("loading rules from {}", dir.display()))?,
            None => build_kb(&cfg),
        };
        let (sensors, actions) = match (&self.sensors, &self.actions) {
            (Some(s), Some(a)) => (
                ingest_sensors(open(s)?).with_context(|| s.display().to_string())?,
                ingest_actions(open(a)?).with_context(|| a.display().to_string())?,
            ),
            _ => match self.scenario {
                Some(Scenario::Tmi2) | None => synthesize_tmi2(&cfg)?,
            },
        };
        let last = sensors.iter().map(|s| s.time).chain(actions.iter().map(|a| a.time)).max().unwrap_or(0);
        Ok(Loaded { cfg, kb, sensors, actions, step: self.step, horizon: self.horizon.unwrap_or(last) })
    }
}

fn cmd_replay(input: &Input, out: &Path, concurrent: bool) -> Result<()> {
    let l = input.load()?;
    let started = Instant::now();
    let outs = if concurrent {
        replay_concurrent(&l.kb, &l.sensors, &l.actions, l.step, l.horizon)?
    } else {
        replay(&l.kb, &l.sensors, &l.actions, l.step, l.horizon)?
    };
    write_outputs(out, &outs, l.step, l.horizon)?;
    eprintln!("{} windows written to {} in {:.2?}", outs.len(), out.display(), started.elapsed());
    Ok(())
}

fn cmd_explain(
    input: &Input,
    atom: &str,
    window: i64,
    format: Format,
    index: Option<usize>,
    max_graphs: usize,
) -> Result<()> {
    let atom: GroundAtom = atom.parse().map_err(|e| anyhow::anyhow!("cannot parse atom `{atom}`: {e}"))?;
    let l = input.load()?;
    if !schedule(l.step, l.horizon)?.iter().any(|&(_, hi)| hi == window) {
        bail!("no window ends at {window} (step {}, horizon {})", l.step, l.horizon);
    }
    let mut s = l.session()?;
    while s.outputs().last().is_none_or(|o| o.window_end < window) {
        s.advance()?;
    }
    let ev = s.evaluation(window)?;
    let ex = Explainer::new(&ev.program, &ev.answer_set, &AssumptionSet::default())?.explain(&atom, max_graphs)?;
    if ex.truncated {
        eprintln!("more than {max_graphs} graphs exist; output truncated");
    }
    let graphs: Vec<_> = match index {
        Some(i) => vec![ex.graphs.get(i).with_context(|| format!("only {} graphs", ex.graphs.len()))?],
        None => ex.graphs.iter().collect(),
    };
    match format {
        Format::Dot => graphs.iter().for_each(|g| print!("{}", to_dot(g))),
        Format::Doc => {
            let doc = json!({
                "atom": atom.to_string(),
                "window_end": window,
                "truncated": ex.truncated,
                "graphs": graphs.iter().map(|g| g.to_document()).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(())
}

fn cmd_serve(port: u16, input: &Input, pace: Duration) -> Result<()> {
    let l = input.load()?;
    let state = AppState::new(l.session()?, l.cfg.clone(), EVENTS.to_vec());
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .with_context(|| format!("binding port {port}"))?;
        log::info!("serving on http://{}", listener.local_addr()?);
        eprintln!("serving on http://{}", listener.local_addr()?);
        let driver = justify_service::spawn_driver(state.clone(), pace);
        tokio::select! {
            r = justify_service::serve(listener, state) => r?,
            _ = tokio::signal::ctrl_c() => {}
        }
        driver.abort();
        Ok(())
    })
}

fn cmd_explain_server(listen: SocketAddr, input: &Input, delay: Duration) -> Result<()> {
    let l = input.load()?;
    let listener = TcpListener::bind(listen).with_context(|| format!("binding {listen}"))?;
    eprintln!("explanation process listening on {}", listener.local_addr()?);
    let stats = run_explanation_process(listener, SessionBackend::new(l.session()?), &ExplanationOptions {
        worker_delay: delay,
    })?;
    eprintln!(
        "received {} requests, answered {}, max queue depth {}",
        stats.received, stats.answered, stats.max_queue_depth
    );
    Ok(())
}

fn cmd_diagnose(connect: Option<SocketAddr>, input: &Input, out: Option<PathBuf>, transcript: Option<&Path>) -> Result<()> {
    let l = input.load()?;
    let endpoint = connect.map_or(Endpoint::DiagnosisOnly, Endpoint::Connect);
    let opts = DiagnosisOptions { out_dir: out, ..DiagnosisOptions::default() };
    let rep = run_diagnosis_process(l.session()?, &endpoint, &opts)?;
    if let Some(p) = transcript {
        let body: String = rep.responses.iter().map(justify_service::encode_line).collect();
        std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    eprintln!(
        "{} windows in {:.2?}; {} requests sent, {} responses{}",
        rep.outputs.len(),
        rep.diagnosis_time,
        rep.requests_sent.len(),
        rep.responses.len(),
        if rep.degraded { " (diagnosis only)" } else { "" }
    );
    Ok(())
}

fn cmd_check_fixtures(dir: Option<PathBuf>) -> Result<bool> {
    let dir = dir.unwrap_or_else(default_fixture_dir);
    let r = check_fixtures(&dir).with_context(|| format!("checking {}", dir.display()))?;
    for f in &r.failures {
        eprintln!("FAIL {f}");
    }
    eprintln!("{} files checked, {} windows replayed, {} failures", r.checked_files, r.windows, r.failures.len());
    Ok(r.ok())
}

fn run(cli: Cli) -> Result<bool> {
    if cli.show_config {
        print!("{}", read_config(cli.config.as_deref())?);
        return Ok(true);
    }
    let Some(command) = cli.command else {
        bail!("no subcommand given; see --help");
    };
    match command {
        Command::Replay { input, out, concurrent } => cmd_replay(&input, &out, concurrent)?,
        Command::Explain { input, atom, window, format, index, max_graphs } => {
            cmd_explain(&input, &atom, window, format, index, max_graphs)?
        }
        Command::Serve { port, input, pace_ms } => cmd_serve(port, &input, Duration::from_millis(pace_ms))?,
        Command::ExplainServer { listen, input, worker_delay_ms } => {
            cmd_explain_server(listen, &input, Duration::from_millis(worker_delay_ms))?
        }
        Command::Diagnose { connect, input, out, transcript } => {
            cmd_diagnose(connect, &input, out, transcript.as_deref())?
        }
        Command::SynthTmi2 { out } => {
            write_fixtures(&out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("fixtures written to {}", out.display());
        }
        Command::CheckFixtures { dir } => return cmd_check_fixtures(dir),
        Command::WriteKb { out } => {
            write_kb_dir(&out).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
