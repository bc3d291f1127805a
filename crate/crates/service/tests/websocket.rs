use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};
use viewsphere::io::SampleRecord;
use viewsphere::synth::{generate, Pattern, SynthParams};
use viewsphere::{ConfigOverrides, ImuSample, Session, SessionConfig, SessionReport};
use viewsphere_service::protocol::{ClientMessage, ErrorCode, ServerMessage};
use viewsphere_service::{serve, ReportStore};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

struct Server {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
    store: Arc<ReportStore>,
}

impl Server {
    async fn start(dir: &Path) -> Server {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let store = Arc::new(ReportStore::open(dir).unwrap());
        let (tx, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(serve(
            listener,
            SessionConfig::default(),
            Arc::clone(&store),
            async {
                let _ = rx.await;
            },
        ));
        Server {
            addr,
            stop: Some(tx),
            task,
            store,
        }
    }

    async fn connect(&self) -> Ws {
        connect_async(format!("ws://{}/ws", self.addr)).await.unwrap().0
    }

    async fn shutdown(mut self) -> Arc<ReportStore> {
        self.stop.take().unwrap().send(()).unwrap();
        tokio::time::timeout(Duration::from_secs(10), self.task)
            .await
            .expect("server stops")
            .unwrap()
            .unwrap();
        self.store
    }

    async fn wait_for_reports(&self, n: usize) -> Vec<String> {
        let deadline = Instant::now() + Duration::from_secs(10);
        loop {
            let files = self.store.list().unwrap();
            if files.len() >= n {
                return files
                    .iter()
                    .map(|p| std::fs::read_to_string(p).unwrap())
                    .collect();
            }
            assert!(Instant::now() < deadline, "reports not persisted");
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
    }
}

async fn send(ws: &mut Ws, msg: &ClientMessage) {
    ws.send(Message::text(msg.to_json())).await.unwrap();
}

async fn recv(ws: &mut Ws) -> ServerMessage {
    loop {
        match ws.next().await.expect("stream open").expect("frame") {
            Message::Text(t) => return ServerMessage::parse(t.as_str()).unwrap(),
            Message::Ping(_) | Message::Pong(_) => continue,
            other => panic!("unexpected frame {other:?}"),
        }
    }
}

async fn hello(ws: &mut Ws, overrides: ConfigOverrides) {
    send(ws, &ClientMessage::Hello(overrides)).await;
    assert!(matches!(recv(ws).await, ServerMessage::Ready { .. }));
}

async fn stream(ws: &mut Ws, samples: &[ImuSample]) -> f64 {
    let mut pct = 0.0;
    for s in samples {
        send(ws, &ClientMessage::Sample(SampleRecord::from(s))).await;
        match recv(ws).await {
            ServerMessage::State(st) => {
                assert_eq!(st.t_ms, s.t_ms);
                pct = st.coverage_pct;
            }
            other => panic!("expected state, got {other:?}"),
        }
    }
    pct
}

fn direct_report(samples: &[ImuSample]) -> SessionReport {
    let mut s = Session::new(SessionConfig::default()).unwrap();
    for x in samples {
        s.ingest(x).unwrap();
    }
    s.finalize()
}

fn orbit() -> Vec<ImuSample> {
    generate(&SynthParams {
        duration_s: 10.0,
        ..Default::default()
    })
    .unwrap()
    .samples
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn finalize_returns_and_persists_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(dir.path()).await;
    let samples = orbit();
    let mut ws = server.connect().await;
    hello(&mut ws, ConfigOverrides::default()).await;
    stream(&mut ws, &samples).await;
    send(&mut ws, &ClientMessage::Finalize).await;
    let ServerMessage::Report { report } = recv(&mut ws).await else {
        panic!()
    };
    let expected = direct_report(&samples).to_json();
    assert_eq!(report.to_json(), expected);
    let saved = server.wait_for_reports(1).await;
    assert_eq!(saved, vec![expected]);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn abrupt_disconnect_persists_report() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(dir.path()).await;
    let samples = orbit();
    {
        let mut ws = server.connect().await;
        hello(&mut ws, ConfigOverrides::default()).await;
        stream(&mut ws, &samples[..120]).await;
        // dropped without a close handshake
    }
    let saved = server.wait_for_reports(1).await;
    assert_eq!(saved[0], direct_report(&samples[..120]).to_json());
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn protocol_error_then_close() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(dir.path()).await;
    let mut ws = server.connect().await;
    send(&mut ws, &ClientMessage::Finalize).await;
    let ServerMessage::Error { code, .. } = recv(&mut ws).await else {
        panic!()
    };
    assert_eq!(code, ErrorCode::BadOrder);
    let next = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.unwrap();
    assert!(matches!(next, None | Some(Ok(Message::Close(_))) | Some(Err(_))));
    // nothing to persist without a session
    let store = server.shutdown().await;
    assert!(store.list().unwrap().is_empty());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_clients_get_independent_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(dir.path()).await;
    let samples = orbit();
    let mut a = server.connect().await;
    let mut b = server.connect().await;
    hello(&mut a, ConfigOverrides::default()).await;
    hello(
        &mut b,
        ConfigOverrides {
            grid_theta: Some(72),
            ..Default::default()
        },
    )
    .await;
    // interleave the two streams
    for chunk in samples.chunks(25) {
        stream(&mut a, chunk).await;
        stream(&mut b, &chunk[..chunk.len() / 2]).await;
    }
    send(&mut a, &ClientMessage::Finalize).await;
    send(&mut b, &ClientMessage::Finalize).await;
    let (ServerMessage::Report { report: ra }, ServerMessage::Report { report: rb }) =
        (recv(&mut a).await, recv(&mut b).await)
    else {
        panic!()
    };
    assert_eq!(ra.to_json(), direct_report(&samples).to_json());
    assert_eq!(ra.config.grid_theta, 36);
    assert_eq!(rb.config.grid_theta, 72);
    assert!(rb.sample_count < ra.sample_count);
    server.wait_for_reports(2).await;
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn shutdown_flushes_active_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(dir.path()).await;
    let samples = orbit();
    let mut ws = server.connect().await;
    hello(&mut ws, ConfigOverrides::default()).await;
    stream(&mut ws, &samples[..200]).await;
    let client = tokio::spawn(async move {
        let msg = recv(&mut ws).await;
        let _ = ws.next().await;
        msg
    });
    let store = server.shutdown().await;
    let files = store.list().unwrap();
    assert_eq!(files.len(), 1);
    let expected = direct_report(&samples[..200]).to_json();
    assert_eq!(std::fs::read_to_string(&files[0]).unwrap(), expected);
    let ServerMessage::Report { report } = client.await.unwrap() else {
        panic!()
    };
    assert_eq!(report.to_json(), expected);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn restarted_store_does_not_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    for round in 1..=2 {
        let server = Server::start(dir.path()).await;
        let mut ws = server.connect().await;
        hello(&mut ws, ConfigOverrides::default()).await;
        send(&mut ws, &ClientMessage::Finalize).await;
        recv(&mut ws).await;
        server.wait_for_reports(round).await;
        server.shutdown().await;
    }
    let names: Vec<_> = ReportStore::open(dir.path())
        .unwrap()
        .list()
        .unwrap()
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["session-000001.json", "session-000002.json"]);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn sixteen_sessions_at_one_hundred_hertz() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(dir.path()).await;
    let samples = generate(&SynthParams {
        pattern: Pattern::RandomWalk,
        rate_hz: 100.0,
        duration_s: 2.0,
        settle_ms: 400,
        ..Default::default()
    })
    .unwrap()
    .samples;
    let mut clients = Vec::new();
    for _ in 0..16 {
        let mut ws = server.connect().await;
        let samples = samples.clone();
        clients.push(tokio::spawn(async move {
            hello(&mut ws, ConfigOverrides::default()).await;
            let mut tick = tokio::time::interval(Duration::from_millis(10));
            let mut worst = Duration::ZERO;
            for s in &samples {
                tick.tick().await;
                let sent = Instant::now();
                stream(&mut ws, std::slice::from_ref(s)).await;
                worst = worst.max(sent.elapsed());
            }
            send(&mut ws, &ClientMessage::Finalize).await;
            let ServerMessage::Report { report } = recv(&mut ws).await else {
                panic!()
            };
            (report, worst)
        }));
    }
    let expected = direct_report(&samples).to_json();
    for c in clients {
        let (report, worst) = c.await.unwrap();
        assert_eq!(report.to_json(), expected);
        assert!(worst < Duration::from_millis(500), "slow reply: {worst:?}");
    }
    server.wait_for_reports(16).await;
    server.shutdown().await;
}
