//! Stateless HTTP interface: every request carries the full answer history
//! and the response is computed from scratch.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ichd_core::engine::TruthValue;
use ichd_core::questionnaire::{
    AnswerRecord, NextStep, Questionnaire, QuestionnaireError, RecordError, WireValue,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NextRequest {
    pub answers: Vec<AnswerRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunStatus {
    InProgress,
    Completed,
    Stuck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DiagnosisState {
    Compatible,
    NotCompatible,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosisEntry {
    pub id: String,
    pub name: String,
    pub state: DiagnosisState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreView {
    pub d_yes: usize,
    pub d_no: usize,
    pub score: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionView {
    pub subject: String,
    pub value: WireValue,
    pub topic: String,
    pub text: String,
    pub score: ScoreView,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuestionCount {
    pub answered: usize,
    pub candidates_remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NextResponse {
    pub status: RunStatus,
    pub diagnoses: Vec<DiagnosisEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_question: Option<QuestionView>,
    pub question_count: QuestionCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub id: String,
    pub name: String,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Health {
    pub status: String,
    pub kb_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conflicts: Vec<AnswerRecord>,
}

/// An error response with its status code.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn bad_request(error: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                error: error.into(),
                message: message.into(),
                conflicts: Vec::new(),
            },
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ErrorBody {
                error: "internal".into(),
                message: message.into(),
                conflicts: Vec::new(),
            },
        }
    }
}

impl From<RecordError> for ApiError {
    fn from(e: RecordError) -> Self {
        let kind = match e {
            RecordError::UnknownTopic { .. } => "unknownTopic",
            RecordError::UnknownQuestion { .. } => "unknownQuestion",
            RecordError::Duplicate { .. } => "duplicateAnswer",
        };
        ApiError::bad_request(kind, e.to_string())
    }
}

impl From<QuestionnaireError> for ApiError {
    fn from(e: QuestionnaireError) -> Self {
        match &e {
            QuestionnaireError::Inconsistent { answers, .. } => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: ErrorBody {
                    error: "inconsistentHistory".into(),
                    message: e.to_string(),
                    conflicts: answers.iter().map(AnswerRecord::of).collect(),
                },
            },
            QuestionnaireError::UnknownQuestion(_) => ApiError::bad_request("unknownQuestion", e.to_string()),
            QuestionnaireError::Duplicate(_) => ApiError::bad_request("duplicateAnswer", e.to_string()),
            QuestionnaireError::Engine(_) => ApiError::internal(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Computes the response for a request body.
pub fn respond(q: &Questionnaire, body: &[u8]) -> Result<NextResponse, ApiError> {
    let request: NextRequest = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request("malformedBody", e.to_string()))?;
    let history = q.history_of(&request.answers)?;
    let assessment = q.assess(&history)?;
    let kb = q.kb();
    let diagnoses = kb
        .diagnoses()
        .map(|n| DiagnosisEntry {
            id: n.id.clone(),
            name: n.name.clone(),
            state: match assessment.status.state_of(&n.id) {
                TruthValue::True => DiagnosisState::Compatible,
                TruthValue::StrongFalse => DiagnosisState::NotCompatible,
                TruthValue::Unknown => DiagnosisState::Undetermined,
            },
        })
        .collect();
    let (status, next_question) = match assessment.next {
        NextStep::Completed => (RunStatus::Completed, None),
        NextStep::Stuck => (RunStatus::Stuck, None),
        NextStep::Ask(s) => (
            RunStatus::InProgress,
            Some(QuestionView {
                subject: s.question.subject.plain(),
                value: WireValue::of(&s.question.value),
                topic: s.question.topic.name().to_string(),
                text: kb.question_text(&s.question),
                score: ScoreView {
                    d_yes: s.d_yes,
                    d_no: s.d_no,
                    score: s.score,
                },
            }),
        ),
    };
    Ok(NextResponse {
        status,
        diagnoses,
        next_question,
        question_count: QuestionCount {
            answered: history.len(),
            candidates_remaining: assessment.candidates.len(),
        },
    })
}

pub fn taxonomy(q: &Questionnaire) -> Vec<TaxonomyEntry> {
    let kb = q.kb();
    kb.diagnoses()
        .map(|n| TaxonomyEntry {
            id: n.id.clone(),
            name: n.name.clone(),
            parent: n.parent.clone().filter(|p| !kb.is_asserted(p)),
        })
        .collect()
}

/// Machine-readable protocol description.
pub fn protocol() -> Value {
    json!({
        "version": "v1",
        "endpoints": [
            {
                "method": "POST",
                "path": "/api/v1/next",
                "request": {"answers": [{"subject": "string", "value": "string or integer", "topic": "string", "answer": "boolean"}]},
                "response": {
                    "status": ["IN_PROGRESS", "COMPLETED", "STUCK"],
                    "diagnoses": [{"id": "string", "name": "string", "state": ["compatible", "notCompatible", "undetermined"]}],
                    "nextQuestion": {"subject": "string", "value": "string or integer", "topic": "string", "text": "string", "score": {"dYes": "integer", "dNo": "integer", "score": "integer"}},
                    "questionCount": {"answered": "integer", "candidatesRemaining": "integer"}
                },
                "errors": {
                    "400": ["malformedBody", "unknownTopic", "unknownQuestion", "duplicateAnswer"],
                    "422": ["inconsistentHistory"]
                }
            },
            {"method": "GET", "path": "/api/v1/diagnoses", "response": [{"id": "string", "name": "string", "parent": "string or null"}]},
            {"method": "GET", "path": "/api/v1/health", "response": {"status": "ok", "kbVersion": "string"}},
            {"method": "GET", "path": "/api/v1/spec", "response": "this document"}
        ],
        "topics": ["symptom", "attribute", "duration", "durationAtMost", "frequency", "frequencyAtMost", "attacks", "attacksAtMost", "exam", "reportedCriterion"]
    })
}

async fn next(State(q): State<Arc<Questionnaire>>, body: Bytes) -> Result<Json<NextResponse>, ApiError> {
    tokio::task::spawn_blocking(move || respond(&q, &body))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map(Json)
}

async fn diagnoses(State(q): State<Arc<Questionnaire>>) -> Json<Vec<TaxonomyEntry>> {
    Json(taxonomy(&q))
}

async fn health(State(q): State<Arc<Questionnaire>>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        kb_version: q.kb().version().to_string(),
    })
}

async fn spec() -> impl IntoResponse {
    ([(header::CACHE_CONTROL, "no-store")], Json(protocol()))
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        body: ErrorBody {
            error: "notFound".into(),
            message: "no such endpoint".into(),
            conflicts: Vec::new(),
        },
    }
}

pub fn router(q: Arc<Questionnaire>) -> Router {
    Router::new()
        .route("/api/v1/next", post(next))
        .route("/api/v1/diagnoses", get(diagnoses))
        .route("/api/v1/health", get(health))
        .route("/api/v1/spec", get(spec))
        .fallback(not_found)
        .with_state(q)
}

/// Serves requests accepted on `listener`.
pub async fn serve(q: Arc<Questionnaire>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(q)).await
}
