//! Front ends for `joliet-core`: the `joliet` command line and the HTTP
//! service behind the playground.
//!
//! Both go through [`Service`], so `joliet <cmd> --json` prints exactly
//! the body the corresponding HTTP endpoint returns.

pub mod cli;

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use joliet_core::service::{Endpoint, Reply, Service};
use tower_http::services::ServeDir;

fn json_response(reply: Reply) -> Response {
    let status = StatusCode::from_u16(reply.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        Body::from(reply.body),
    )
        .into_response()
}

fn endpoint(which: Endpoint) -> axum::routing::MethodRouter<Arc<Service>> {
    post(
        move |State(svc): State<Arc<Service>>, body: String| async move {
            // Runs are bounded by the step budget but still CPU work.
            let reply = tokio::task::spawn_blocking(move || svc.dispatch(which, &body))
                .await
                .expect("handler does not panic");
            json_response(reply)
        },
    )
}

/// Routes: `POST /hover`, `/desugar`, `/run`, `/tokenize`, `GET /health`,
/// and the playground's static files when a directory is given.
pub fn router(service: Arc<Service>, playground: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/hover", endpoint(Endpoint::Hover))
        .route("/desugar", endpoint(Endpoint::Desugar))
        .route("/run", endpoint(Endpoint::Run))
        .route("/tokenize", endpoint(Endpoint::Tokenize))
        .route(
            "/health",
            get(|| async {
                json_response(Reply {
                    status: 200,
                    body: r#"{"status":"ok"}"#.into(),
                })
            }),
        )
        .with_state(service);
    match playground {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(
    addr: SocketAddr,
    service: Arc<Service>,
    playground: Option<&Path>,
) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("joliet: listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(service, playground)).await?;
    Ok(())
}
