//! The explanation process: a receiver that queues requests and a worker
//! that answers them in arrival order.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use crate::backend::ExplainBackend;
use crate::protocol::{decode_request, encode_line, ExplainRequest, ExplainResponse};

#[derive(Clone, Debug, Default)]
pub struct ExplanationOptions {
    /// Sleep before each request is handled; used to inject worker latency.
    pub worker_delay: Duration,
}

/// Number of requests received but not yet answered, and the maximum seen.
#[derive(Clone, Debug, Default)]
pub struct QueueDepth {
    current: Arc<AtomicUsize>,
    max: Arc<AtomicUsize>,
}

impl QueueDepth {
    pub fn current(&self) -> usize {
        self.current.load(Ordering::SeqCst)
    }

    pub fn max(&self) -> usize {
        self.max.load(Ordering::SeqCst)
    }

    fn push(&self) {
        let d = self.current.fetch_add(1, Ordering::SeqCst) + 1;
        self.max.fetch_max(d, Ordering::SeqCst);
    }

    fn pop(&self) {
        self.current.fetch_sub(1, Ordering::SeqCst);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExplanationStats {
    pub received: usize,
    pub answered: usize,
    pub max_queue_depth: usize,
}

enum Job {
    Request(ExplainRequest),
    Malformed { id: u64, error: String },
}

/// Serves one peer until it closes its sending side and every queued
/// request has been answered.
pub fn serve_peer<B: ExplainBackend>(
    stream: TcpStream,
    backend: &mut B,
    opts: &ExplanationOptions,
    depth: &QueueDepth,
) -> io::Result<ExplanationStats> {
    let (tx, rx) = mpsc::channel::<Job>();
    let reader = BufReader::new(stream.try_clone()?);
    let receiver_depth = depth.clone();
    let receiver = thread::Builder::new().name("explain-receiver".into()).spawn(move || {
        let mut received = 0usize;
        for line in reader.lines() {
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    log::warn!("explanation receiver: {e}");
                    break;
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let job = match decode_request(&line) {
                Ok(r) => Job::Request(r),
                Err((id, error)) => Job::Malformed { id, error },
            };
            received += 1;
            receiver_depth.push();
            if tx.send(job).is_err() {
                break;
            }
        }
        received
    })?;

    let mut out = BufWriter::new(stream.try_clone()?);
    let mut answered = 0usize;
    let mut peer_gone = false;
    for job in rx {
        depth.pop();
        if peer_gone {
            continue;
        }
        if !opts.worker_delay.is_zero() {
            thread::sleep(opts.worker_delay);
        }
        let resp = match &job {
            Job::Request(r) => backend.respond(r),
            Job::Malformed { id, error } => ExplainResponse::failure(*id, None, error.clone()),
        };
        let sent = out.write_all(encode_line(&resp).as_bytes()).and_then(|_| out.flush());
        match sent {
            Ok(()) => answered += 1,
            Err(e) => {
                log::warn!("explanation worker: peer stopped reading: {e}");
                peer_gone = true;
            }
        }
    }
    let received = receiver.join().expect("receiver thread does not panic");
    let _ = stream.shutdown(Shutdown::Both);
    Ok(ExplanationStats { received, answered, max_queue_depth: depth.max() })
}

/// Accepts a single diagnosis peer on `listener` and serves it to the end.
pub fn run_explanation_process<B: ExplainBackend>(
    listener: TcpListener,
    mut backend: B,
    opts: &ExplanationOptions,
) -> io::Result<ExplanationStats> {
    let (stream, peer) = listener.accept()?;
    log::info!("explanation process: serving {peer}");
    serve_peer(stream, &mut backend, opts, &QueueDepth::default())
}

/// An explanation process running on a thread of this process, listening
/// on an ephemeral local port.
pub struct LocalExplainer {
    pub addr: SocketAddr,
    pub depth: QueueDepth,
    handle: JoinHandle<io::Result<ExplanationStats>>,
}

impl LocalExplainer {
    pub fn join(self) -> io::Result<ExplanationStats> {
        self.handle.join().expect("explanation thread does not panic")
    }
}

pub fn spawn_local<B: ExplainBackend + 'static>(
    mut backend: B,
    opts: ExplanationOptions,
) -> io::Result<LocalExplainer> {
    let listener = TcpListener::bind(("127.0.0.1", 0))?;
    let addr = listener.local_addr()?;
    let depth = QueueDepth::default();
    let d = depth.clone();
    let handle = thread::Builder::new().name("explain-worker".into()).spawn(move || {
        let (stream, _) = listener.accept()?;
        serve_peer(stream, &mut backend, &opts, &d)
    })?;
    Ok(LocalExplainer { addr, depth, handle })
}
