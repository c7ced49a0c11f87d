//! The deliberator thread: sole owner of the executive.
//!
//! Commands arrive over a channel and are handed to the executive's own
//! queue, so they are applied at the start of the next tick. After each tick
//! the new events and a fresh [`Snapshot`] are published for readers.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use benthic::executive::{Command, CommandResult, Event, Executive, ExecutiveError};
use tokio::sync::{mpsc, oneshot, watch};

use crate::snapshot::Snapshot;

const IDLE_POLL: Duration = Duration::from_millis(20);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunnerConfig {
    /// Sim seconds per wall second; zero runs as fast as possible.
    pub speed: f64,
    /// Sim time at which ticking stops.
    pub until: f64,
    /// Stop ticking once no goal is open and nothing is in flight.
    pub stop_when_quiescent: bool,
    /// Keep applying commands after ticking stops, until shut down.
    pub linger: bool,
}

pub(crate) struct Request {
    pub command: Command,
    pub reply: oneshot::Sender<CommandResult>,
}

/// Everything a reader or a client needs; cheap to clone.
#[derive(Clone)]
pub struct Handle {
    pub(crate) commands: mpsc::UnboundedSender<Request>,
    pub(crate) snapshots: watch::Receiver<Arc<Snapshot>>,
    pub(crate) events: Arc<RwLock<Vec<Event>>>,
    stop: Arc<AtomicBool>,
}

impl Handle {
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshots.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Arc<Snapshot>> {
        self.snapshots.clone()
    }

    /// Events with `seq >= since`, at most `limit` of them.
    pub fn events_since(&self, since: u64, limit: usize) -> Vec<Event> {
        let events = self.events.read().expect("event feed lock");
        let start = events.partition_point(|e| e.seq < since);
        events[start..].iter().take(limit).cloned().collect()
    }

    /// Submits a command and waits for the deliberator to apply it.
    pub async fn submit(&self, command: Command) -> Result<CommandResult, RunnerGone> {
        let (reply, rx) = oneshot::channel();
        self.commands.send(Request { command, reply }).map_err(|_| RunnerGone)?;
        rx.await.map_err(|_| RunnerGone)
    }

    /// Asks the deliberator thread to finish after its current tick.
    pub fn shutdown(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("the deliberator has stopped")]
pub struct RunnerGone;

/// Starts the deliberator thread. Joining it yields the executive back.
pub fn spawn(exec: Executive, config: RunnerConfig) -> (Handle, JoinHandle<Result<Executive, ExecutiveError>>) {
    let (tx, rx) = mpsc::unbounded_channel();
    let (snap_tx, snap_rx) = watch::channel(Arc::new(Snapshot::capture(&exec)));
    let events = Arc::new(RwLock::new(exec.events().to_vec()));
    let stop = Arc::new(AtomicBool::new(false));
    let handle = Handle {
        commands: tx,
        snapshots: snap_rx,
        events: events.clone(),
        stop: stop.clone(),
    };
    let join = thread::Builder::new()
        .name("deliberator".into())
        .spawn(move || run(exec, config, rx, snap_tx, events, stop))
        .expect("spawn deliberator thread");
    (handle, join)
}

fn run(
    mut exec: Executive,
    config: RunnerConfig,
    mut commands: mpsc::UnboundedReceiver<Request>,
    snapshots: watch::Sender<Arc<Snapshot>>,
    events: Arc<RwLock<Vec<Event>>>,
    stop: Arc<AtomicBool>,
) -> Result<Executive, ExecutiveError> {
    let started = Instant::now();
    let t0 = exec.now();
    let mut published = exec.events().len();
    loop {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let ticking = exec.now() < config.until && !(config.stop_when_quiescent && exec.is_quiescent());
        while let Ok(req) = commands.try_recv() {
            if ticking {
                let reply = req.reply;
                exec.enqueue(
                    req.command,
                    Some(Box::new(move |r| {
                        let _ = reply.send(r);
                    })),
                );
            } else {
                let _ = req.reply.send(exec.execute(req.command));
            }
        }
        if ticking {
            exec.tick()?;
        } else if !config.linger {
            break;
        }
        if exec.events().len() > published {
            events
                .write()
                .expect("event feed lock")
                .extend_from_slice(&exec.events()[published..]);
            published = exec.events().len();
            snapshots.send_replace(Arc::new(Snapshot::capture(&exec)));
        }
        if !ticking {
            thread::sleep(IDLE_POLL);
        } else if config.speed > 0.0 {
            let due = started + Duration::from_secs_f64((exec.now() - t0) / config.speed);
            if let Some(wait) = due.checked_duration_since(Instant::now()) {
                thread::sleep(wait);
            }
        }
    }
    Ok(exec)
}
