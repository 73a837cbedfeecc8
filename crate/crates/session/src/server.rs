//! Websocket front end and the fixed-rate loop task.

use crate::{InboundMessage, OutboundMessage, Session, SessionError};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use darboux_assist::sim::{RouteKind, DEFAULT_DT};
use darboux_assist::AssistConfig;
use futures::{SinkExt, StreamExt};
use std::future::Future;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tokio::time::MissedTickBehavior;

/// Frames buffered per client before state frames start being dropped.
const EGRESS_CAPACITY: usize = 64;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub config: AssistConfig,
    pub route: RouteKind,
    pub log_dir: PathBuf,
    /// Wall-clock period of the loop. Simulated time always advances by
    /// the fixed step regardless.
    pub tick_period: Duration,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            config: AssistConfig::default(),
            route: RouteKind::FigureEight,
            log_dir: PathBuf::from("."),
            tick_period: Duration::from_secs_f64(DEFAULT_DT),
        }
    }
}

enum Event {
    Attach(mpsc::Sender<OutboundMessage>),
    Detach,
    Inbound(InboundMessage),
    Shutdown,
}

#[derive(Clone)]
struct AppState {
    events: mpsc::UnboundedSender<Event>,
    busy: Arc<AtomicBool>,
}

/// Binds `bind` and serves until Ctrl-C.
pub async fn serve(bind: &str, opts: ServeOptions) -> Result<(), SessionError> {
    let listener = TcpListener::bind(bind).await?;
    log::info!("listening on ws://{}/ws", listener.local_addr()?);
    serve_on(listener, opts, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}

/// Serves on an already bound listener until `shutdown` resolves, then
/// closes any open recording.
pub async fn serve_on<F>(listener: TcpListener, opts: ServeOptions, shutdown: F) -> Result<(), SessionError>
where
    F: Future<Output = ()> + Send + 'static,
{
    let session = Session::new(opts.config, opts.route, opts.log_dir)?;
    let (events, rx) = mpsc::unbounded_channel();
    let loop_task = tokio::spawn(run_loop(session, rx, opts.tick_period));
    let app = Router::new().route("/ws", get(upgrade)).with_state(AppState {
        events: events.clone(),
        busy: Arc::new(AtomicBool::new(false)),
    });
    let served = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    let _ = events.send(Event::Shutdown);
    let closed = loop_task.await.expect("session loop panicked");
    served?;
    closed
}

async fn run_loop(
    mut session: Session,
    mut events: mpsc::UnboundedReceiver<Event>,
    period: Duration,
) -> Result<(), SessionError> {
    let mut interval = tokio::time::interval(period);
    interval.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let mut client: Option<mpsc::Sender<OutboundMessage>> = None;
    loop {
        interval.tick().await;
        loop {
            let event = match events.try_recv() {
                Ok(e) => e,
                Err(mpsc::error::TryRecvError::Empty) => break,
                Err(mpsc::error::TryRecvError::Disconnected) => return session.close(),
            };
            match event {
                Event::Attach(tx) => {
                    let _ = tx.try_send(session.config_ack());
                    client = Some(tx);
                }
                Event::Detach => {
                    client = None;
                    if let Err(e) = session.disconnect() {
                        log::error!("closing recording: {e}");
                    }
                }
                Event::Inbound(msg) => {
                    if let (Some(reply), Some(tx)) = (session.handle(msg), &client) {
                        let _ = tx.try_send(reply);
                    }
                }
                Event::Shutdown => return session.close(),
            }
        }
        let frame = session.tick();
        if let Some(tx) = &client {
            if let Err(mpsc::error::TrySendError::Full(_)) = tx.try_send(frame) {
                log::debug!("client is slow, dropped state frame");
            }
        }
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(app): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, app))
}

async fn client(socket: WebSocket, app: AppState) {
    let (mut sink, mut stream) = socket.split();
    if app.busy.swap(true, Ordering::SeqCst) {
        let busy = OutboundMessage::error("busy", "another client is connected");
        let _ = sink.send(text(&busy)).await;
        let _ = sink.send(Message::Close(None)).await;
        return;
    }

    let (out_tx, mut out_rx) = mpsc::channel::<OutboundMessage>(EGRESS_CAPACITY);
    let writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            if sink.send(text(&msg)).await.is_err() {
                break;
            }
        }
        sink
    });
    let _ = app.events.send(Event::Attach(out_tx.clone()));

    while let Some(frame) = stream.next().await {
        let body = match frame {
            Ok(Message::Text(t)) => t,
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(Message::Ping(_)) | Ok(Message::Pong(_)) => continue,
            Ok(Message::Binary(_)) => {
                let _ = out_tx.send(OutboundMessage::error("bad_message", "binary frames are not accepted")).await;
                break;
            }
        };
        match serde_json::from_str::<InboundMessage>(body.as_str()) {
            Ok(msg) => {
                let _ = app.events.send(Event::Inbound(msg));
            }
            Err(e) => {
                log::warn!("malformed message: {e}");
                let _ = out_tx.send(OutboundMessage::error("bad_message", e.to_string())).await;
                break;
            }
        }
    }

    let _ = app.events.send(Event::Detach);
    drop(out_tx);
    // The writer ends once the loop has dropped its sender too.
    if let Ok(mut sink) = writer.await {
        let _ = sink.send(Message::Close(None)).await;
    }
    app.busy.store(false, Ordering::SeqCst);
}

fn text(msg: &OutboundMessage) -> Message {
    Message::Text(serde_json::to_string(msg).expect("outbound messages serialize").into())
}
