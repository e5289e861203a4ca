use std::time::{Duration, Instant};

use derivkit_cli::client::{query_model, Client, ClientError, EndpointConfig};
use derivkit_cli::mock::{MockServer, Reply};

fn client(server: &MockServer) -> Client {
    let cfg = EndpointConfig {
        retry_backoff_ms: 1,
        ..EndpointConfig::new(server.url(), "test-model")
    };
    Client::with_token(cfg, "t0ken")
}

#[test]
fn echo_returns_the_prompt() {
    let server = MockServer::start(vec![]).unwrap();
    assert_eq!(client(&server).complete("Given $x = y$").unwrap(), "Given $x = y$");
    let reqs = server.requests();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].method, "POST");
    assert_eq!(reqs[0].path, "/v1/chat/completions");
    assert_eq!(reqs[0].header("authorization"), Some("Bearer t0ken"));
}

#[test]
fn request_body_carries_zero_temperature() {
    let server = MockServer::start(vec![]).unwrap();
    client(&server).complete("p").unwrap();
    let body = server.requests()[0].json().unwrap();
    assert_eq!(body["temperature"].as_f64(), Some(0.0));
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["messages"], serde_json::json!([{"role": "user", "content": "p"}]));
}

#[test]
fn one_retry_after_a_server_error() {
    let server = MockServer::start(vec![Reply::Status(500), Reply::Echo]).unwrap();
    assert_eq!(client(&server).complete("again").unwrap(), "again");
    assert_eq!(server.requests().len(), 2);
}

#[test]
fn retries_are_bounded() {
    let server = MockServer::start(vec![Reply::Status(502); 5]).unwrap();
    let err = client(&server).complete("x").unwrap_err();
    assert!(matches!(err, ClientError::Http { status: 502, .. }), "{err}");
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let server = MockServer::start(vec![Reply::Status(400)]).unwrap();
    assert!(matches!(client(&server).complete("x"), Err(ClientError::Http { status: 400, .. })));
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn auth_failure_is_distinct() {
    for status in [401, 403] {
        let server = MockServer::start(vec![Reply::Status(status)]).unwrap();
        let err = client(&server).complete("x").unwrap_err();
        assert!(matches!(err, ClientError::Auth(s) if s == status));
        assert_eq!(err.kind(), "auth");
        assert_eq!(server.requests().len(), 1);
    }
}

#[test]
fn timeout_is_distinct() {
    let server = MockServer::start(vec![Reply::Delay(Duration::from_secs(3))]).unwrap();
    let cfg = EndpointConfig {
        timeout_secs: 0.3,
        ..EndpointConfig::new(server.url(), "m")
    };
    let t = Instant::now();
    let err = Client::with_token(cfg, "t").complete("x").unwrap_err();
    assert!(matches!(err, ClientError::Timeout), "{err}");
    assert_eq!(err.kind(), "timeout");
    assert!(t.elapsed() < Duration::from_secs(2));
}

#[test]
fn malformed_response_is_distinct() {
    for body in ["{\"choices\": []}", "not json"] {
        let server = MockServer::start(vec![Reply::Raw(body.into())]).unwrap();
        let err = client(&server).complete("x").unwrap_err();
        assert!(matches!(err, ClientError::Malformed(_)), "{err}");
    }
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let url = {
        let server = MockServer::start(vec![]).unwrap();
        server.url()
    };
    let cfg = EndpointConfig {
        timeout_secs: 2.0,
        ..EndpointConfig::new(url, "m")
    };
    let err = Client::with_token(cfg, "t").complete("x").unwrap_err();
    assert!(matches!(err, ClientError::Transport(_)), "{err}");
}

#[test]
fn missing_token_is_reported() {
    let cfg = EndpointConfig {
        token_env: "DERIVKIT_TEST_UNSET_TOKEN_VARIABLE".into(),
        ..EndpointConfig::new("http://127.0.0.1:9/v1", "m")
    };
    let err = query_model(&cfg, "x").unwrap_err();
    assert!(matches!(err, ClientError::MissingToken(ref v) if v == "DERIVKIT_TEST_UNSET_TOKEN_VARIABLE"));
}
