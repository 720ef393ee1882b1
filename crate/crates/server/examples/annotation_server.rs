//! Serves the annotation API on an ephemeral port, drives one task over
//! plain HTTP/1.1, then shuts down.
//!
//! Pass an address (e.g. `127.0.0.1:8080`) to keep it running instead.
use gso::annotation::{AnnotationStore, StoreConfig};
use gso::ontology::{fixture_lexicon, SynsetForest};
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::Arc;

fn request(addr: SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut s = TcpStream::connect(addr)?;
    write!(
        s,
        "{method} {path} HTTP/1.1\r\nhost: {addr}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut out = String::new();
    s.read_to_string(&mut out)?;
    let status = out.lines().next().unwrap_or_default().to_string();
    let body = out.split_once("\r\n\r\n").map(|(_, b)| b).unwrap_or_default();
    Ok(format!("{status}\n  {}", body.trim()))
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = Arc::new(SynsetForest::build(fixture_lexicon())?.propagate_scores()?);
    let store = Arc::new(AnnotationStore::in_memory(forest, StoreConfig { required_workers: 1, ..Default::default() }));

    if let Some(addr) = std::env::args().nth(1) {
        gso_server::serve(addr.parse()?, store).await?;
        return Ok(());
    }

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let app = gso_server::router(store);
    let server = tokio::spawn(async move { axum::serve(listener, app).await });

    let calls = [
        ("POST", "/tasks", r#"{"gif_id":"gif-1","gif_uri":"https://media.example/gif-1.gif"}"#),
        ("POST", "/workers", r#"{"worker_id":"ann-1"}"#),
        ("GET", "/tasks/next?worker=ann-1", ""),
        ("GET", "/synsets?q=lo&pos=adjective", ""),
        (
            "POST",
            "/annotations",
            r#"{"worker_id":"ann-1","gif_id":"gif-1","sequence":[{"modifier":"lovely.a.01","noun":"girl.n.01"}],"judgment":"positive"}"#,
        ),
        ("GET", "/gifs/gif-1/consolidated", ""),
        ("GET", "/export", ""),
        ("GET", "/stats", ""),
    ];
    for (method, path, body) in calls {
        let reply = tokio::task::spawn_blocking(move || request(addr, method, path, body)).await??;
        println!("{method} {path}\n  {reply}\n");
    }
    server.abort();
    Ok(())
}
