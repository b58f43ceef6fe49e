//! JSON over HTTP for one immutable model.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{RawQuery, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use polyexplain_core::explain::{explain_why_with, WhyNotOptions, WhyOptions};
use polyexplain_core::marching::{MarchBudget, DEFAULT_MAX_SIGNATURES};
use polyexplain_core::render::{render_why, render_why_not, Style};
use polyexplain_core::{explain_why_not, Error, Network};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::commands::predict;
use crate::regions::{regions_around, DEFAULT_MAX_REGIONS, DEFAULT_REGION_BUDGET};

type Shared = Arc<Network>;

pub fn router(net: Shared) -> Router {
    Router::new()
        .route("/model", get(model_info))
        .route("/predict", post(predict_handler))
        .route("/explain/why", post(why_handler))
        .route("/explain/whynot", post(whynot_handler))
        .route("/regions", post(regions_handler))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "unknown route").into_response() })
        .method_not_allowed_fallback(|| async {
            ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route").into_response()
        })
        .layer(CorsLayer::permissive())
        .with_state(net)
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub request_id: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), request_id: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn with_id(mut self, id: Option<u64>) -> Self {
        self.request_id = id;
        self
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::DimensionMismatch { .. } => Self::new(StatusCode::BAD_REQUEST, "wrong_arity", message),
            Error::InvalidClass { .. } => Self::new(StatusCode::BAD_REQUEST, "invalid_class", message),
            Error::DistanceOutOfRange { .. } | Error::Parse(_) => Self::bad_request(message),
            Error::VertexCap { .. } => Self::new(StatusCode::BAD_REQUEST, "vertex_cap", message),
            Error::FactualClass(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "factual_class", message),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

/// A response body with the caller's request id merged in.
#[derive(Serialize)]
struct Echo<T: Serialize> {
    #[serde(skip_serializing_if = "Option::is_none")]
    request_id: Option<u64>,
    #[serde(flatten)]
    body: T,
}

fn reply<T: Serialize>(status: StatusCode, id: Option<u64>, body: T) -> Response {
    (status, Json(Echo { request_id: id, body })).into_response()
}

/// Parses a body in two steps so the request id survives a schema error.
fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<(Option<u64>, T), ApiError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}")))?;
    if !value.is_object() {
        return Err(ApiError::bad_request("request body must be a JSON object"));
    }
    let id = match value.get("request_id") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| ApiError::bad_request("request_id must be a non-negative integer"))?),
    };
    let req = serde_json::from_value(value).map_err(|e| ApiError::bad_request(e.to_string()).with_id(id))?;
    Ok((id, req))
}

fn check_arity(net: &Network, x: &[f64], id: Option<u64>) -> Result<(), ApiError> {
    if x.len() != net.input_dim() {
        return Err(ApiError::from(Error::DimensionMismatch { expected: net.input_dim(), got: x.len() }).with_id(id));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ApiError::bad_request("input must be finite").with_id(id));
    }
    Ok(())
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T: Send + 'static>(id: Option<u64>, f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(|e| ApiError::from(e).with_id(id)),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()).with_id(id)),
    }
}

fn unwrap(r: Result<Response, ApiError>) -> Response {
    r.unwrap_or_else(IntoResponse::into_response)
}

#[derive(Debug, Serialize)]
pub struct ModelInfo {
    pub input_dim: usize,
    pub bounds: Vec<[f64; 2]>,
    pub class_names: Option<Vec<String>>,
    pub layer_widths: Vec<usize>,
    pub output_activation: &'static str,
}

async fn model_info(State(net): State<Shared>, RawQuery(query): RawQuery) -> Response {
    let mut id = None;
    for pair in query.as_deref().unwrap_or("").split('&') {
        if let Some(v) = pair.strip_prefix("request_id=") {
            match v.parse() {
                Ok(n) => id = Some(n),
                Err(_) => return ApiError::bad_request("request_id must be a non-negative integer").into_response(),
            }
        }
    }
    let info = ModelInfo {
        input_dim: net.input_dim(),
        bounds: net.input_bounds().iter().map(|b| [b.lo, b.hi]).collect(),
        class_names: net.class_names().map(<[String]>::to_vec),
        layer_widths: net.layer_widths(),
        output_activation: net.output_activation().as_str(),
    };
    reply(StatusCode::OK, id, info)
}

#[derive(Debug, Deserialize)]
struct PredictReq {
    input: Vec<f64>,
}

async fn predict_handler(State(net): State<Shared>, body: Bytes) -> Response {
    unwrap(
        async {
            let (id, req): (_, PredictReq) = parse(&body)?;
            check_arity(&net, &req.input, id)?;
            let p = predict(&net, &req.input).map_err(|e| ApiError::from(e).with_id(id))?;
            Ok(reply(StatusCode::OK, id, p))
        }
        .await,
    )
}

#[derive(Debug, Deserialize)]
struct WhyReq {
    input: Vec<f64>,
    #[serde(default)]
    vrep: bool,
}

/// An explanation plus its plain-text rendering.
#[derive(Serialize)]
struct Rendered<T: Serialize> {
    #[serde(flatten)]
    explanation: T,
    text: String,
}

async fn why_handler(State(net): State<Shared>, body: Bytes) -> Response {
    unwrap(
        async {
            let (id, req): (_, WhyReq) = parse(&body)?;
            check_arity(&net, &req.input, id)?;
            let out = blocking(id, move || {
                let e = explain_why_with(&net, &req.input, &WhyOptions { vrep: req.vrep, ..WhyOptions::default() })?;
                let text = render_why(&e, Style::Text)?;
                Ok(Rendered { explanation: e, text })
            })
            .await?;
            Ok(reply(StatusCode::OK, id, out))
        }
        .await,
    )
}

#[derive(Debug, Deserialize)]
struct WhyNotReq {
    input: Vec<f64>,
    counterfactual_class: usize,
    max_distance: Option<usize>,
    budget: Option<u64>,
    #[serde(default)]
    vrep: bool,
}

async fn whynot_handler(State(net): State<Shared>, body: Bytes) -> Response {
    unwrap(async {
        let (id, req): (_, WhyNotReq) = parse(&body)?;
        check_arity(&net, &req.input, id)?;
        let out = blocking(id, move || {
            let opts = WhyNotOptions {
                budget: MarchBudget {
                    max_signatures: req.budget.unwrap_or(DEFAULT_MAX_SIGNATURES),
                    max_distance: req.max_distance,
                    parallel: false,
                },
                vrep: req.vrep,
                vertex_dim_cap: None,
            };
            let e = explain_why_not(&net, &req.input, req.counterfactual_class, &opts)?;
            let text = render_why_not(&e, Style::Text)?;
            Ok(Rendered { explanation: e, text })
        })
        .await?;
        if out.explanation.is_unreachable() {
            let body = json!({
                "code": "class_unreachable",
                "message": format!("no region where class {} wins was found within the search budget", out.explanation.counterfactual_class),
                "explanation": out,
            });
            return Ok(reply(StatusCode::SERVICE_UNAVAILABLE, id, body));
        }
        Ok(reply(StatusCode::OK, id, out))
    }
    .await)
}

#[derive(Debug, Deserialize)]
struct RegionsReq {
    center: Vec<f64>,
    max_regions: Option<usize>,
    budget: Option<u64>,
}

async fn regions_handler(State(net): State<Shared>, body: Bytes) -> Response {
    unwrap(
        async {
            let (id, req): (_, RegionsReq) = parse(&body)?;
            if net.input_dim() != 2 {
                return Err(ApiError::new(StatusCode::BAD_REQUEST, "not_planar", "regions are only available for 2-D models").with_id(id));
            }
            check_arity(&net, &req.center, id)?;
            let max_regions = req.max_regions.unwrap_or(DEFAULT_MAX_REGIONS);
            let budget = req.budget.unwrap_or(DEFAULT_REGION_BUDGET);
            let map = blocking(id, move || regions_around(&net, &req.center, max_regions, budget)).await?;
            Ok(reply(StatusCode::OK, id, map))
        }
        .await,
    )
}
