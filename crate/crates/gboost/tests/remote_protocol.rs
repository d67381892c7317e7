//! Remote client behavior against a scripted stub server: passthrough,
//! validation, clamping, retry policy, and auth header propagation.

mod common;

use std::time::Duration;

use common::{StubResponse, StubServer};
use gboost::backends::{RemoteModelClient, RemotePRMClient};
use gboost::core::{ActionKind, Query, ReasoningStep, TokenId, Vocabulary};
use gboost::error::GBoostError;
use gboost::policy::GenerationBackend;
use gboost::reward::RewardModel;

fn vocab(n: usize) -> Vocabulary {
    Vocabulary::new(n, TokenId(0), vec![]).unwrap()
}

fn client(url: &str, vocab_size: usize, retries: u32) -> RemoteModelClient {
    RemoteModelClient::new(
        url,
        "test-model",
        vocab(vocab_size),
        Duration::from_secs(5),
        retries,
        None,
    )
    .with_backoff_base(Duration::from_millis(1))
}

fn step(tokens: &[u32]) -> ReasoningStep {
    ReasoningStep {
        token_ids: tokens.iter().map(|&t| TokenId(t)).collect(),
        log_prob: -1.0,
        action: ActionKind::Private,
        is_terminal: false,
    }
}

#[test]
fn logits_passthrough() {
    let server = StubServer::start(vec![StubResponse::ok(r#"{"logits":[0.1,-0.2,3.5]}"#)]);
    let c = client(&server.base_url, 3, 0);
    let z = c.next_logits(&[TokenId(1), TokenId(2), TokenId(3)]).unwrap();
    assert_eq!(z.0, vec![0.1, -0.2, 3.5]);
    let reqs = server.requests();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].path, "/v1/logits");
    assert_eq!(reqs[0].body, r#"{"model":"test-model","token_ids":[1,2,3]}"#);
}

#[test]
fn wrong_length_is_protocol_error() {
    let server = StubServer::start(vec![StubResponse::ok(r#"{"logits":[0.1,0.2]}"#)]);
    let c = client(&server.base_url, 3, 0);
    let err = c.next_logits(&[TokenId(1)]).unwrap_err();
    match err {
        GBoostError::Protocol(msg) => {
            assert!(msg.contains('2') && msg.contains('3'), "{msg}");
        }
        other => panic!("expected protocol error, got {other}"),
    }
}

#[test]
fn retry_then_success_is_recorded() {
    let server = StubServer::start(vec![
        StubResponse::error(500, "overloaded", "try again"),
        StubResponse::error(503, "busy", "try again"),
        StubResponse::ok(r#"{"logits":[1.0,2.0]}"#),
    ]);
    let c = client(&server.base_url, 2, 3);
    let z = c.next_logits(&[TokenId(1)]).unwrap();
    assert_eq!(z.0, vec![1.0, 2.0]);
    let log = c.retry_log();
    assert_eq!(log.len(), 2);
    assert_eq!(log[0].attempt, 1);
    assert_eq!(log[1].attempt, 2);
    assert!(log[0].reason.contains("500"));
}

#[test]
fn client_error_is_permanent() {
    let server = StubServer::start(vec![StubResponse::error(400, "bad_request", "no such model")]);
    let c = client(&server.base_url, 2, 3);
    let err = c.next_logits(&[TokenId(1)]).unwrap_err();
    assert!(matches!(err, GBoostError::Request { status: 400, .. }));
    // no retries happened
    assert_eq!(server.requests().len(), 1);
    assert!(c.retry_log().is_empty());
}

#[test]
fn retries_exhausted_is_transport_error() {
    let server = StubServer::start(vec![StubResponse::error(500, "down", "down")]);
    let c = client(&server.base_url, 2, 2);
    let err = c.next_logits(&[TokenId(1)]).unwrap_err();
    assert!(matches!(err, GBoostError::Transport { attempts: 3, .. }));
    assert_eq!(c.retry_log().len(), 2);
}

#[test]
fn reward_passthrough_and_clamp() {
    let server = StubServer::start(vec![
        StubResponse::ok(r#"{"score":0.85}"#),
        StubResponse::ok(r#"{"score":-0.2}"#),
        StubResponse::ok(r#"{"score":1.37}"#),
    ]);
    let prm = RemotePRMClient::new(&server.base_url, Duration::from_secs(5), 0, None);
    let q = Query::new(vec![TokenId(7)]).unwrap().with_text("what is 2+2");
    let steps = [step(&[5, 6])];

    let r = prm.score(&q, &steps).unwrap();
    assert_eq!(r.value, 0.85);

    let r = prm.score(&q, &steps).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(r.raw, Some(-0.2));

    let r = prm.score(&q, &steps).unwrap();
    assert_eq!(r.value, 1.0);
    assert_eq!(r.raw, Some(1.37));

    let reqs = server.requests();
    assert_eq!(reqs[0].path, "/v1/reward");
    assert_eq!(reqs[0].body, r#"{"question":"what is 2+2","steps":["5 6"]}"#);
}

#[test]
fn malformed_body_is_protocol_error() {
    let server = StubServer::start(vec![StubResponse::ok(r#"{"scor"#)]);
    let prm = RemotePRMClient::new(&server.base_url, Duration::from_secs(5), 0, None);
    let q = Query::new(vec![TokenId(7)]).unwrap();
    let err = prm.score(&q, &[step(&[5])]).unwrap_err();
    assert!(matches!(err, GBoostError::Protocol(_)));
}

#[test]
fn bearer_token_sent_when_configured() {
    let server = StubServer::start(vec![StubResponse::ok(r#"{"logits":[0.0,0.0]}"#)]);
    let c = RemoteModelClient::new(
        &server.base_url,
        "m",
        vocab(2),
        Duration::from_secs(5),
        0,
        Some("sekrit".to_string()),
    );
    c.next_logits(&[TokenId(1)]).unwrap();
    let reqs = server.requests();
    assert_eq!(reqs[0].auth.as_deref(), Some("Bearer sekrit"));
}

#[test]
fn empty_context_rejected_locally() {
    let server = StubServer::start(vec![StubResponse::ok(r#"{"logits":[0.0,0.0]}"#)]);
    let c = client(&server.base_url, 2, 0);
    assert!(c.next_logits(&[]).is_err());
    assert!(server.requests().is_empty());
}
