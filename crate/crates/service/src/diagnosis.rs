//! The diagnosis process: replays windows and sends one explain request per
//! window without waiting for the answer.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{Shutdown, SocketAddr, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use justify_core::replay::{write_manifest, write_window, DiagnosisOutput, Session};

use crate::protocol::{encode_line, ExplainRequest, ExplainResponse};
use crate::ServiceError;

#[derive(Clone, Debug)]
pub enum Endpoint {
    /// Connect to an explanation process at this address.
    Connect(SocketAddr),
    /// Run without an explanation peer.
    DiagnosisOnly,
}

#[derive(Clone, Debug)]
pub struct DiagnosisOptions {
    /// Connection attempts after the first.
    pub retries: u32,
    /// Delay before the first retry; doubled on each further retry.
    pub backoff: Duration,
    /// Persist window documents and the session manifest here.
    pub out_dir: Option<PathBuf>,
}

impl Default for DiagnosisOptions {
    fn default() -> Self {
        DiagnosisOptions { retries: 4, backoff: Duration::from_millis(50), out_dir: None }
    }
}

#[derive(Debug)]
pub struct DiagnosisReport {
    pub outputs: Vec<DiagnosisOutput>,
    /// Ids of the requests handed to the peer, in sending order.
    pub requests_sent: Vec<u64>,
    /// Responses in arrival order.
    pub responses: Vec<ExplainResponse>,
    /// True when no explanation peer was reached or it went away.
    pub degraded: bool,
    /// Time spent replaying, excluding the final wait for responses.
    pub diagnosis_time: Duration,
}

fn connect(addr: SocketAddr, opts: &DiagnosisOptions) -> Option<TcpStream> {
    let mut delay = opts.backoff;
    for attempt in 0..=opts.retries {
        match TcpStream::connect(addr) {
            Ok(s) => return Some(s),
            Err(e) => {
                log::warn!("explanation peer {addr}: attempt {} failed: {e}", attempt + 1);
                if attempt < opts.retries {
                    thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
    }
    log::warn!("explanation peer {addr} unreachable; continuing in diagnosis-only mode");
    None
}

struct Peer {
    requests: mpsc::Sender<ExplainRequest>,
    writer: JoinHandle<Vec<u64>>,
    reader: JoinHandle<Vec<ExplainResponse>>,
    failed: Arc<AtomicBool>,
}

fn start_peer(stream: TcpStream) -> io::Result<Peer> {
    let failed = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel::<ExplainRequest>();
    let write_half = stream.try_clone()?;
    let wf = failed.clone();
    let writer = thread::Builder::new().name("diagnosis-writer".into()).spawn(move || {
        let mut out = BufWriter::new(&write_half);
        let mut sent = Vec::new();
        for req in rx {
            if wf.load(Ordering::SeqCst) {
                continue;
            }
            match out.write_all(encode_line(&req).as_bytes()).and_then(|_| out.flush()) {
                Ok(()) => sent.push(req.id),
                Err(e) => {
                    log::warn!("explanation peer went away: {e}; continuing in diagnosis-only mode");
                    wf.store(true, Ordering::SeqCst);
                }
            }
        }
        let _ = write_half.shutdown(Shutdown::Write);
        sent
    })?;
    let reader = thread::Builder::new().name("diagnosis-reader".into()).spawn(move || {
        let mut got = Vec::new();
        for line in BufReader::new(stream).lines() {
            match line.map_err(|e| e.to_string()).and_then(|l| {
                serde_json::from_str::<ExplainResponse>(&l).map_err(|e| e.to_string())
            }) {
                Ok(r) => got.push(r),
                Err(e) => {
                    log::warn!("unreadable explain response: {e}");
                    break;
                }
            }
        }
        got
    })?;
    Ok(Peer { requests: tx, writer, reader, failed })
}

/// Runs `session` to its end. Each evaluated window is persisted (when
/// `out_dir` is set) and requested from the peer; responses are collected
/// once all windows are done.
pub fn run_diagnosis_process(
    mut session: Session,
    endpoint: &Endpoint,
    opts: &DiagnosisOptions,
) -> Result<DiagnosisReport, ServiceError> {
    let mut peer = match endpoint {
        Endpoint::Connect(addr) => connect(*addr, opts).map(start_peer).transpose()?,
        Endpoint::DiagnosisOnly => None,
    };
    let mut degraded = peer.is_none();
    if let Some(dir) = &opts.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| ServiceError::io(dir, e))?;
    }
    let started = Instant::now();
    let mut next_id = 1u64;
    while let Some(out) = session.advance()? {
        if let Some(dir) = &opts.out_dir {
            write_window(dir, out)?;
        }
        if let Some(p) = &peer {
            let req = ExplainRequest { id: next_id, window_end: out.window_end, atoms: Vec::new(), max_graphs: None };
            next_id += 1;
            if p.requests.send(req).is_err() {
                degraded = true;
            }
        }
    }
    if let Some(dir) = &opts.out_dir {
        write_manifest(dir, &session.manifest())?;
    }
    let diagnosis_time = started.elapsed();

    let (requests_sent, responses) = match peer.take() {
        Some(p) => {
            drop(p.requests);
            let sent = p.writer.join().expect("writer thread does not panic");
            let got = p.reader.join().expect("reader thread does not panic");
            degraded |= p.failed.load(Ordering::SeqCst) || got.len() < sent.len();
            (sent, got)
        }
        None => (Vec::new(), Vec::new()),
    };
    Ok(DiagnosisReport {
        outputs: session.outputs().to_vec(),
        requests_sent,
        responses,
        degraded,
        diagnosis_time,
    })
}
