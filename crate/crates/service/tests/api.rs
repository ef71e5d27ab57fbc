use std::sync::{Arc, OnceLock};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use serde_json::{json, Value};
use tower::ServiceExt;

use ichd_core::questionnaire::Questionnaire;
use ichd_service::{router, ErrorBody, NextResponse, RunStatus, TaxonomyEntry};

fn questionnaire() -> Arc<Questionnaire> {
    static Q: OnceLock<Arc<Questionnaire>> = OnceLock::new();
    Q.get_or_init(|| Arc::new(Questionnaire::shipped())).clone()
}

async fn call(method: &str, path: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let request = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let response = router(questionnaire()).oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, bytes.to_vec())
}

async fn next(answers: Value) -> (StatusCode, Vec<u8>) {
    call("POST", "/api/v1/next", Some(json!({ "answers": answers }).to_string())).await
}

#[tokio::test]
async fn empty_history_is_in_progress() {
    let (status, body) = next(json!([])).await;
    assert_eq!(status, StatusCode::OK);
    let r: NextResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!(r.status, RunStatus::InProgress);
    assert!(r.diagnoses.iter().all(|d| d.state == ichd_service::DiagnosisState::Undetermined));
    let q = r.next_question.unwrap();
    assert_eq!((q.subject.as_str(), q.topic.as_str()), ("s4", "symptom"));
    assert_eq!(q.text, "Does the patient experience headache?");
    assert_eq!(r.question_count.answered, 0);
}

#[tokio::test]
async fn denying_headache_completes() {
    let (status, body) = next(json!([
        {"subject": "s4", "value": "headache", "topic": "symptom", "answer": false}
    ]))
    .await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["status"], "COMPLETED");
    assert!(v.get("nextQuestion").is_none());
    assert!(v["diagnoses"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| d["state"] == "notCompatible"));
}

#[tokio::test]
async fn numeric_values_accept_numbers_and_strings() {
    let base = json!({"subject": "s4", "value": "headache", "topic": "symptom", "answer": true});
    let a = next(json!([base, {"subject": "headache", "value": 240, "topic": "duration", "answer": true}])).await;
    let b = next(json!([base, {"subject": "headache", "value": "240", "topic": "duration", "answer": true}])).await;
    assert_eq!(a.0, StatusCode::OK);
    assert_eq!(a, b);
}

#[tokio::test]
async fn client_errors_are_400() {
    let (status, _) = call("POST", "/api/v1/next", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = next(json!([{"subject": "s4", "value": "headache", "topic": "mood", "answer": true}])).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let e: ErrorBody = serde_json::from_slice(&body).unwrap();
    assert_eq!(e.error, "unknownTopic");
    let dup = json!({"subject": "s4", "value": "headache", "topic": "symptom", "answer": true});
    let (status, body) = next(json!([dup, dup])).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let e: ErrorBody = serde_json::from_slice(&body).unwrap();
    assert_eq!(e.error, "duplicateAnswer");
}

#[tokio::test]
async fn contradictory_history_is_422() {
    let (status, body) = next(json!([
        {"subject": "s4", "value": "headache", "topic": "symptom", "answer": true},
        {"subject": "headache", "value": "loc1", "topic": "attribute", "answer": true},
        {"subject": "headache", "value": "loc2", "topic": "attribute", "answer": true}
    ]))
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let e: ErrorBody = serde_json::from_slice(&body).unwrap();
    let values: Vec<String> = e.conflicts.iter().map(|c| c.value.plain()).collect();
    assert_eq!(values, vec!["loc1", "loc2"]);
}

#[tokio::test]
async fn diagnoses_exclude_root() {
    let (status, body) = call("GET", "/api/v1/diagnoses", None).await;
    assert_eq!(status, StatusCode::OK);
    let list: Vec<TaxonomyEntry> = serde_json::from_slice(&body).unwrap();
    assert_eq!(list.len(), questionnaire().kb().diagnosis_count());
    assert!(list.iter().all(|d| d.id != "d.root"));
    let d11 = list.iter().find(|d| d.id == "d.1.1").unwrap();
    assert_eq!(d11.name, "migraine without aura");
    assert_eq!(d11.parent.as_deref(), Some("d.1"));
    assert_eq!(list.iter().find(|d| d.id == "d.1").unwrap().parent, None);
}

#[tokio::test]
async fn health_and_spec() {
    let (status, body) = call("GET", "/api/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v, json!({"status": "ok", "kbVersion": "1.0.0"}));
    let (status, body) = call("GET", "/api/v1/spec", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["endpoints"][0]["path"], "/api/v1/next");
    let (status, _) = call("GET", "/api/v1/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
