use std::fs::File;
use std::io::BufWriter;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Duration;

use axum::extract::ws::{CloseFrame, Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use forage_core::config::{PilotKind, SessionConfig};
use forage_core::session::{PilotDriver, Session, TrialInfo, TrialResult};
use forage_core::telemetry::{EventRecord, LogHeader, LogWriter};
use forage_core::world::Contact;
use futures::{SinkExt, StreamExt};
use log::{info, warn};
use tokio::net::TcpListener;
use tokio::sync::mpsc::unbounded_channel;

use crate::driver::LiveDriver;
use crate::protocol::{ClientMessage, Command, Phase, ServerMessage};
use crate::LiveError;

const HEARTBEAT: Duration = Duration::from_secs(5);
/// Close code for a policy violation (RFC 6455).
const CLOSE_POLICY: u16 = 1008;

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub port: u16,
    /// Where the session's JSONL log is written.
    pub log_path: PathBuf,
    /// Wall-clock speed-up; 1.0 is real time.
    pub speed: f64,
}

struct AppState {
    config: SessionConfig,
    options: ServeOptions,
    busy: AtomicBool,
}

/// Binds the listener and returns its address with the serving future.
pub async fn bind(
    mut config: SessionConfig,
    options: ServeOptions,
) -> Result<(SocketAddr, impl std::future::Future<Output = std::io::Result<()>>), LiveError> {
    config.pilot.kind = PilotKind::Live;
    config.validate()?;
    let listener = TcpListener::bind(("0.0.0.0", options.port)).await?;
    let addr = listener.local_addr()?;
    let state = Arc::new(AppState {
        config,
        options,
        busy: AtomicBool::new(false),
    });
    let app = Router::new()
        .route("/ws", get(upgrade))
        .route("/", get(|| async { "forage live service: connect a pilot at /ws\n" }))
        .with_state(state);
    Ok((addr, async move { axum::serve(listener, app).await }))
}

/// Runs the service until the process is stopped.
pub async fn serve(config: SessionConfig, options: ServeOptions) -> Result<(), LiveError> {
    let (addr, server) = bind(config, options).await?;
    info!("listening on ws://{addr}/ws");
    server.await?;
    Ok(())
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| handle_socket(socket, state))
}

async fn handle_socket(mut socket: WebSocket, state: Arc<AppState>) {
    if state.busy.swap(true, Ordering::SeqCst) {
        warn!("rejecting second pilot connection");
        let _ = socket
            .send(Message::Close(Some(CloseFrame {
                code: CLOSE_POLICY,
                reason: Utf8Bytes::from_static("a pilot is already connected; one pilot per session"),
            })))
            .await;
        return;
    }
    run_connection(socket, &state).await;
    state.busy.store(false, Ordering::SeqCst);
}

async fn run_connection(socket: WebSocket, state: &Arc<AppState>) {
    let (mut sink, mut stream) = socket.split();
    let (out_tx, mut out_rx) = unbounded_channel::<ServerMessage>();
    let (contact_tx, contact_rx) = mpsc::channel::<Contact>();
    let disconnected = Arc::new(AtomicBool::new(false));

    let _ = out_tx.send(ServerMessage::TrialPhase {
        phase: Phase::Waiting,
        trial: 0,
    });

    // outbound frames plus heartbeat
    let writer = tokio::spawn(async move {
        let mut heartbeat = tokio::time::interval(HEARTBEAT);
        heartbeat.tick().await;
        loop {
            tokio::select! {
                message = out_rx.recv() => {
                    let Some(message) = message else { break };
                    let text = serde_json::to_string(&message).expect("messages serialize");
                    if sink.send(Message::Text(text.into())).await.is_err() {
                        break;
                    }
                }
                _ = heartbeat.tick() => {
                    if sink.send(Message::Ping(Default::default())).await.is_err() {
                        break;
                    }
                }
            }
        }
        let _ = sink.send(Message::Close(None)).await;
    });

    let mut session: Option<tokio::task::JoinHandle<()>> = None;
    let mut driver_parts = Some((out_tx, contact_rx));
    while let Some(frame) = stream.next().await {
        let text = match frame {
            Ok(Message::Text(text)) => text,
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        let message: ClientMessage = match serde_json::from_str(text.as_str()) {
            Ok(m) => m,
            Err(e) => {
                warn!("ignoring malformed client frame: {e}");
                continue;
            }
        };
        match message {
            ClientMessage::Contact { slot, hand } => {
                let _ = contact_tx.send(Contact { slot, hand });
            }
            ClientMessage::Control { command: Command::Start } => {
                if let Some((out_tx, contact_rx)) = driver_parts.take() {
                    let state = Arc::clone(state);
                    let disconnected = Arc::clone(&disconnected);
                    session = Some(tokio::task::spawn_blocking(move || {
                        let driver = LiveDriver::new(
                            out_tx,
                            contact_rx,
                            Arc::clone(&disconnected),
                            state.config.tick_rate,
                            state.options.speed,
                        );
                        if let Err(e) = run_session(&state.config, &state.options.log_path, driver) {
                            warn!("session failed: {e}");
                        }
                    }));
                }
            }
            ClientMessage::Control { command: Command::Abort } => break,
        }
    }
    disconnected.store(true, Ordering::SeqCst);
    drop(driver_parts);
    if let Some(session) = session {
        let _ = session.await;
    }
    let _ = writer.await;
}

/// Wraps the live driver so each finished trial is appended to the log as
/// soon as it ends.
struct LoggingDriver<D: PilotDriver> {
    inner: D,
    writer: LogWriter<BufWriter<File>>,
    error: Option<forage_core::Error>,
}

impl<D: PilotDriver> PilotDriver for LoggingDriver<D> {
    fn begin_trial(&mut self, info: &TrialInfo) {
        self.inner.begin_trial(info);
    }

    fn poll(
        &mut self,
        obs: &forage_core::pilot::PilotObservation,
    ) -> Result<Vec<Contact>, forage_core::session::DriverError> {
        self.inner.poll(obs)
    }

    fn observe(&mut self, records: &[EventRecord]) {
        self.inner.observe(records);
    }

    fn end_trial(&mut self, result: &TrialResult) {
        let written = self
            .writer
            .append_all(&result.records)
            .and_then(|_| self.writer.flush());
        if let Err(e) = written {
            self.error.get_or_insert(e);
        }
        self.inner.end_trial(result);
    }

    fn on_break(&mut self, seconds: f64) {
        self.inner.on_break(seconds);
    }
}

fn run_session(config: &SessionConfig, log_path: &PathBuf, driver: LiveDriver) -> Result<(), forage_core::Error> {
    let file = BufWriter::new(File::create(log_path)?);
    let mut driver = LoggingDriver {
        inner: driver,
        writer: LogWriter::new(file, &LogHeader::new(config))?,
        error: None,
    };
    driver.writer.flush()?;
    let block = Session::new(config.clone())?.run_block(&mut driver);
    info!(
        "session finished: {} trial(s), score {}, aborted {}",
        block.trials.len(),
        block.scores().total(),
        block.aborted()
    );
    match driver.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
