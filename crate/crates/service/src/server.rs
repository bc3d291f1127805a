//! WebSocket transport.

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, watch};
use viewsphere::{SessionConfig, SessionReport};

use crate::connection::Connection;
use crate::protocol::ServerMessage;
use crate::store::ReportStore;

#[derive(Clone)]
struct Shared {
    defaults: SessionConfig,
    store: Arc<ReportStore>,
    shutdown: watch::Receiver<bool>,
    // held by every live socket task; the server waits for all clones to drop
    alive: mpsc::Sender<()>,
}

/// Serves the live protocol on `/ws` (and `/`) until `shutdown` resolves.
///
/// On shutdown every open session receives its report, the report is
/// persisted, and the call returns once all connection tasks have finished.
pub async fn serve(
    listener: TcpListener,
    defaults: SessionConfig,
    store: Arc<ReportStore>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    let (stop_tx, stop_rx) = watch::channel(false);
    let (alive_tx, mut alive_rx) = mpsc::channel::<()>(1);
    let shared = Shared {
        defaults,
        store,
        shutdown: stop_rx,
        alive: alive_tx,
    };
    let app = Router::new()
        .route("/", get(upgrade))
        .route("/ws", get(upgrade))
        .with_state(shared);

    let signal = async move {
        shutdown.await;
        let _ = stop_tx.send(true);
    };
    // the router (and its Shared clone) is dropped when serve returns
    axum::serve(listener, app)
        .with_graceful_shutdown(signal)
        .await?;
    while alive_rx.recv().await.is_some() {}
    Ok(())
}

pub async fn bind(addr: SocketAddr) -> io::Result<TcpListener> {
    TcpListener::bind(addr).await
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Shared>) -> Response {
    ws.on_upgrade(move |socket| run(socket, shared))
}

async fn run(mut socket: WebSocket, shared: Shared) {
    let Shared {
        defaults,
        store,
        mut shutdown,
        alive,
    } = shared;
    let mut conn = Connection::new(defaults);
    let mut closing = *shutdown.borrow();
    while !closing {
        tokio::select! {
            biased;
            _ = shutdown.changed() => {
                closing = true;
                if let Some(report) = conn.report() {
                    let msg = ServerMessage::Report { report };
                    let _ = socket.send(Message::Text(msg.to_json().into())).await;
                }
            }
            frame = socket.recv() => {
                let step = match frame {
                    Some(Ok(Message::Text(text))) => conn.handle_text(text.as_str()),
                    Some(Ok(Message::Binary(_))) => conn.handle_binary(),
                    Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                };
                if socket.send(Message::Text(step.reply.to_json().into())).await.is_err() {
                    break;
                }
                closing = step.close;
            }
        }
    }
    if let Some(report) = conn.report() {
        persist(&store, report).await;
    }
    let _ = socket.send(Message::Close(None)).await;
    drop(alive);
}

async fn persist(store: &Arc<ReportStore>, report: SessionReport) {
    let store = Arc::clone(store);
    let result = tokio::task::spawn_blocking(move || store.persist(&report)).await;
    match result {
        Ok(Ok(path)) => tracing::info!(path = %path.display(), "session report persisted"),
        Ok(Err(e)) => tracing::error!(error = %e, "failed to persist session report"),
        Err(e) => tracing::error!(error = %e, "persist task failed"),
    }
}
