//! HTTP routes. Reads come from the latest snapshot; writes go through the
//! deliberator's command queue and answer 202 once it has been applied.

use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use benthic::acoustic::AcousticCommand;
use benthic::executive::{Command, CommandError, CommandResult};
use benthic::planner::{GoalSource, Priority};
use benthic::values::ConcreteValue;
use serde::Deserialize;
use serde_json::json;

use crate::runner::Handle;

const DEFAULT_EVENT_LIMIT: usize = 1000;
const REPLY_TIMEOUT: Duration = Duration::from_secs(30);

pub fn router(handle: Handle) -> Router {
    Router::new()
        .route("/state", get(state))
        .route("/plan", get(plan))
        .route("/beliefs", get(beliefs))
        .route("/bindings", get(bindings).post(bind))
        .route("/behaviors", get(behaviors))
        .route("/assessments", get(assessments))
        .route("/events", get(events))
        .route("/goals", post(inject_goal))
        .route("/plans/{goal_id}/override", post(override_plan))
        .route("/commands/abort", post(abort))
        .route("/acoustic/send", post(acoustic_send))
        .route("/telemetry", get(telemetry))
        .with_state(handle)
}

async fn state(State(h): State<Handle>) -> Response {
    Json(&h.snapshot().state).into_response()
}

async fn plan(State(h): State<Handle>) -> Response {
    Json(&h.snapshot().plan).into_response()
}

async fn beliefs(State(h): State<Handle>) -> Response {
    Json(&h.snapshot().stores.beliefs).into_response()
}

async fn bindings(State(h): State<Handle>) -> Response {
    Json(&h.snapshot().stores.bindings).into_response()
}

async fn behaviors(State(h): State<Handle>) -> Response {
    Json(&h.snapshot().stores.behaviors).into_response()
}

async fn assessments(State(h): State<Handle>) -> Response {
    Json(&h.snapshot().stores.assessments).into_response()
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    #[serde(default)]
    since: u64,
    limit: Option<usize>,
}

async fn events(State(h): State<Handle>, Query(q): Query<EventsQuery>) -> Response {
    Json(h.events_since(q.since, q.limit.unwrap_or(DEFAULT_EVENT_LIMIT))).into_response()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GoalBody {
    condition: String,
    #[serde(default = "operator")]
    priority: Priority,
}

fn operator() -> Priority {
    Priority::Operator
}

async fn inject_goal(State(h): State<Handle>, body: Result<Json<GoalBody>, JsonRejection>) -> Response {
    let body = match body {
        Ok(Json(b)) => b,
        Err(e) => return malformed(e),
    };
    submit(
        &h,
        Command::InjectGoal {
            condition: body.condition,
            priority: body.priority,
            source: GoalSource::Operator,
        },
    )
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideBody {
    steps: Vec<String>,
}

async fn override_plan(
    State(h): State<Handle>,
    Path(goal_id): Path<u64>,
    body: Result<Json<OverrideBody>, JsonRejection>,
) -> Response {
    let body = match body {
        Ok(Json(b)) => b,
        Err(e) => return malformed(e),
    };
    submit(&h, Command::OverridePlan { goal_id, steps: body.steps }).await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BindBody {
    symbol: String,
    value: ConcreteValue,
}

async fn bind(State(h): State<Handle>, body: Result<Json<BindBody>, JsonRejection>) -> Response {
    let body = match body {
        Ok(Json(b)) => b,
        Err(e) => return malformed(e),
    };
    submit(
        &h,
        Command::Bind {
            symbol: body.symbol,
            value: body.value,
        },
    )
    .await
}

async fn abort(State(h): State<Handle>) -> Response {
    submit(&h, Command::Abort).await
}

async fn acoustic_send(State(h): State<Handle>, body: Result<Json<AcousticCommand>, JsonRejection>) -> Response {
    let command = match body {
        Ok(Json(c)) => c,
        Err(e) => return malformed(e),
    };
    submit(&h, Command::AcousticSend { command }).await
}

fn malformed(e: JsonRejection) -> Response {
    (e.status(), Json(json!({ "error": "malformed_request", "detail": e.body_text() }))).into_response()
}

async fn submit(h: &Handle, command: Command) -> Response {
    match tokio::time::timeout(REPLY_TIMEOUT, h.submit(command)).await {
        Ok(Ok(result)) => reply(result),
        Ok(Err(gone)) => (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "error": gone.to_string() }))).into_response(),
        Err(_) => (
            StatusCode::GATEWAY_TIMEOUT,
            Json(json!({ "error": "command not applied in time" })),
        )
            .into_response(),
    }
}

fn reply(result: CommandResult) -> Response {
    match result {
        Ok(r) => (StatusCode::ACCEPTED, Json(r)).into_response(),
        Err(e) => (status_of(&e), Json(e)).into_response(),
    }
}

fn status_of(e: &CommandError) -> StatusCode {
    match e {
        CommandError::MalformedGoal(_) => StatusCode::BAD_REQUEST,
        CommandError::UnknownGoal(_) | CommandError::UnknownBehavior(_) => StatusCode::NOT_FOUND,
        CommandError::InvalidPlan(_) | CommandError::InvalidBinding(_) | CommandError::InvalidBehavior(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        CommandError::Link(_) => StatusCode::SERVICE_UNAVAILABLE,
    }
}

async fn telemetry(State(h): State<Handle>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| push_snapshots(h, socket))
}

async fn push_snapshots(h: Handle, mut socket: WebSocket) {
    let mut rx = h.subscribe();
    loop {
        let text = {
            let snap = rx.borrow_and_update();
            serde_json::to_string(&snap.state).expect("state views serialize")
        };
        if socket.send(Message::Text(text.into())).await.is_err() {
            return;
        }
        if rx.changed().await.is_err() {
            let _ = socket.send(Message::Close(None)).await;
            return;
        }
    }
}
