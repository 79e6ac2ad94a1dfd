//! HTTP JSON API over the permanence models.
//!
//! | method | path                      | body / query                                   |
//! |--------|---------------------------|------------------------------------------------|
//! | POST   | `/api/v1/evaluate`        | `{scenario, npv, gen, divers, clamp?}`, `?trace=true` adds the aggregate set |
//! | GET    | `/api/v1/surface`         | `scenario=`, `fix=VAR:VAL`, `steps=` (default 21, max 201), optional `x=`/`y=` |
//! | GET    | `/api/v1/model/{scenario}`| variables, rules and the consequent table      |
//! | GET    | `/api/v1/health`          |                                                |
//!
//! Every non-2xx response carries an [`ApiError`] body.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use permadss_core::calibration::sweep_axes;
use permadss_core::permanence::{rule_table, RuleTable, INPUTS};
use permadss_core::surface::{DEFAULT_STEPS, SweepError};
use permadss_core::{
    export_grid, sweep, ExportFormat, FuzzyRule, InferenceError, LinguisticVariable, ModelError,
    Operators, PermanenceInput, PermanenceModels, Scenario,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

/// Largest `steps` a surface request may ask for.
pub const MAX_STEPS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    OutOfRange,
    BadScenario,
    BadRequest,
    NoRuleFired,
}

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: ErrorCode,
    pub message: String,
    /// Request field at fault, if any.
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code,
            message: message.into(),
            field: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, ErrorCode::BadRequest, message)
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    fn bad_scenario(status: StatusCode, name: &str) -> Self {
        let e = ModelError::UnknownScenario(name.to_string());
        Self::new(status, ErrorCode::BadScenario, e.to_string()).with_field("scenario")
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        let message = e.to_string();
        match e {
            ModelError::OutOfRange { field, .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::OutOfRange, message).with_field(field)
            }
            ModelError::UnknownScenario(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::BadScenario, message).with_field("scenario")
            }
            ModelError::Inference(InferenceError::NoRuleFired) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::NoRuleFired, message)
            }
            ModelError::Inference(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::BadRequest, message)
            }
            ModelError::Io { .. } | ModelError::Parse { .. } | ModelError::Shape { .. } => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::BadRequest, message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRequest {
    pub scenario: Scenario,
    pub npv: f64,
    pub gen: f64,
    pub divers: f64,
    #[serde(default)]
    pub clamp: bool,
}

impl EvaluateRequest {
    pub fn input(&self) -> PermanenceInput {
        PermanenceInput::new(self.npv, self.gen, self.divers)
    }

    /// Parses a JSON body, reporting the first offending field.
    pub fn from_json(body: &[u8]) -> Result<Self, ApiError> {
        let value: Value = serde_json::from_slice(body)
            .map_err(|e| ApiError::bad_request(format!("malformed JSON body: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| ApiError::bad_request("request body must be a JSON object"))?;
        if let Some(key) = obj
            .keys()
            .find(|k| !["scenario", "npv", "gen", "divers", "clamp"].contains(&k.as_str()))
        {
            return Err(ApiError::bad_request(format!("unknown field `{key}`")).with_field(key.clone()));
        }
        let scenario = match obj.get("scenario") {
            Some(Value::String(s)) => s
                .parse::<Scenario>()
                .map_err(|_| ApiError::bad_scenario(StatusCode::UNPROCESSABLE_ENTITY, s))?,
            Some(_) => return Err(ApiError::bad_request("`scenario` must be a string").with_field("scenario")),
            None => return Err(ApiError::bad_request("missing field `scenario`").with_field("scenario")),
        };
        let clamp = match obj.get("clamp") {
            None | Some(Value::Null) => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => return Err(ApiError::bad_request("`clamp` must be a boolean").with_field("clamp")),
        };
        Ok(Self {
            scenario,
            npv: number(obj, "npv")?,
            gen: number(obj, "gen")?,
            divers: number(obj, "divers")?,
            clamp,
        })
    }
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64, ApiError> {
    match obj.get(key) {
        Some(v) => v
            .as_f64()
            .ok_or_else(|| ApiError::bad_request(format!("`{key}` must be a number")).with_field(key)),
        None => Err(ApiError::bad_request(format!("missing field `{key}`")).with_field(key)),
    }
}

/// One rule with positive firing strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiredRule {
    /// 1-based position in the scenario's rule list.
    pub rule: usize,
    pub strength: f64,
    pub text: String,
    pub consequent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub scenario: Scenario,
    /// Inputs actually evaluated (after clamping, when requested).
    pub input: PermanenceInput,
    pub clamped: bool,
    pub incentive: f64,
    pub firing: Vec<FiredRule>,
    /// `[x, membership]` samples of the aggregated output set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Vec<[f64; 2]>>,
}

/// Shared by the HTTP handler and the CLI's `eval --json`.
pub fn evaluate(
    models: &PermanenceModels,
    req: &EvaluateRequest,
    trace: bool,
) -> Result<EvaluateResponse, ApiError> {
    let requested = req.input();
    let input = if req.clamp {
        models.clamp(req.scenario, requested)
    } else {
        requested
    };
    let result = models.evaluate(req.scenario, input)?;
    let rules = models.system(req.scenario).rules();
    let firing = result
        .firing
        .iter()
        .zip(rules)
        .enumerate()
        .filter(|(_, (&s, _))| s > 0.0)
        .map(|(i, (&strength, rule))| FiredRule {
            rule: i + 1,
            strength,
            text: rule.to_string(),
            consequent: rule.consequent.label.clone(),
        })
        .collect();
    Ok(EvaluateResponse {
        scenario: req.scenario,
        input,
        clamped: input != requested,
        incentive: result.output,
        firing,
        aggregate: trace.then(|| result.aggregate.iter().map(|&(x, m)| [x, m]).collect()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDescription {
    pub scenario: Scenario,
    pub name: String,
    pub inputs: Vec<LinguisticVariable>,
    pub output: LinguisticVariable,
    pub operators: Operators,
    pub resolution: usize,
    pub rules: Vec<FuzzyRule>,
    /// Output label numbers indexed `[npv][gen][divers]`.
    pub rule_table: Option<RuleTable>,
}

pub fn describe_model(models: &PermanenceModels, scenario: Scenario) -> ModelDescription {
    let fis = models.system(scenario);
    ModelDescription {
        scenario,
        name: fis.name().to_string(),
        inputs: fis.inputs().to_vec(),
        output: fis.output().clone(),
        operators: fis.operators(),
        resolution: fis.resolution(),
        rules: fis.rules().to_vec(),
        rule_table: rule_table(fis).ok(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub models: Vec<Scenario>,
}

/// A parsed `/surface` query.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceQuery {
    pub scenario: Scenario,
    pub fixed: (String, f64),
    pub x: String,
    pub y: String,
    pub steps: usize,
}

impl SurfaceQuery {
    pub fn parse(query: &str) -> Result<Self, ApiError> {
        let mut scenario = None;
        let mut fixes = Vec::new();
        let mut steps = None;
        let mut x = None;
        let mut y = None;
        for (key, value) in form_urlencoded::parse(query.as_bytes()) {
            let slot = match key.as_ref() {
                "scenario" => &mut scenario,
                "steps" => &mut steps,
                "x" => &mut x,
                "y" => &mut y,
                "fix" => {
                    fixes.push(value.into_owned());
                    continue;
                }
                other => {
                    return Err(ApiError::bad_request(format!("unknown query parameter `{other}`"))
                        .with_field(other))
                }
            };
            if slot.replace(value.into_owned()).is_some() {
                return Err(ApiError::bad_request(format!("`{key}` given more than once")).with_field(key));
            }
        }
        let scenario = scenario
            .ok_or_else(|| ApiError::bad_request("missing `scenario`").with_field("scenario"))?;
        let scenario = scenario
            .parse()
            .map_err(|_| ApiError::bad_scenario(StatusCode::UNPROCESSABLE_ENTITY, &scenario))?;
        let fix = match fixes.as_slice() {
            [one] => one,
            [] => return Err(ApiError::bad_request("missing `fix=VAR:VALUE`").with_field("fix")),
            _ => {
                return Err(ApiError::bad_request("exactly one fixed variable is allowed").with_field("fix"))
            }
        };
        let fixed = parse_fix(fix, ':').map_err(|m| ApiError::bad_request(m).with_field("fix"))?;
        let steps = match steps {
            None => DEFAULT_STEPS,
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| ApiError::bad_request(format!("`steps` must be an integer, got `{s}`")).with_field("steps"))?,
        };
        if steps > MAX_STEPS {
            return Err(ApiError::bad_request(format!("`steps` is capped at {MAX_STEPS}, got {steps}"))
                .with_field("steps"));
        }
        if steps < 2 {
            return Err(ApiError::bad_request(format!("`steps` must be at least 2, got {steps}")).with_field("steps"));
        }
        let (x, y) = resolve_axes(&fixed.0, x, y);
        Ok(Self {
            scenario,
            fixed,
            x,
            y,
            steps,
        })
    }
}

/// Splits `VAR<sep>VALUE`; the value may use exponent notation.
pub fn parse_fix(text: &str, sep: char) -> Result<(String, f64), String> {
    let (var, value) = text
        .split_once(sep)
        .ok_or_else(|| format!("expected VAR{sep}VALUE, got `{text}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{value}` is not finite"));
    }
    Ok((var.trim().to_string(), value))
}

/// Default sweep axes for `fixed`, letting either be overridden. Unknown or
/// repeated names are left for the sweep to reject.
pub fn resolve_axes(fixed: &str, x: Option<String>, y: Option<String>) -> (String, String) {
    let defaults = INPUTS
        .contains(&fixed)
        .then(|| sweep_axes(fixed))
        .map(|(a, b)| (a.to_string(), b.to_string()));
    let others = |taken: &str| {
        INPUTS
            .iter()
            .find(|v| **v != fixed && **v != taken)
            .map_or_else(String::new, |v| v.to_string())
    };
    match (x, y, defaults) {
        (Some(x), Some(y), _) => (x, y),
        (Some(x), None, _) => {
            let y = others(&x);
            (x, y)
        }
        (None, Some(y), _) => (others(&y), y),
        (None, None, Some(d)) => d,
        (None, None, None) => (INPUTS[1].to_string(), INPUTS[2].to_string()),
    }
}

impl From<SweepError> for ApiError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Inference(inner) => ModelError::from(inner).into(),
            SweepError::TooFewSteps(_) => ApiError::bad_request(e.to_string()).with_field("steps"),
            SweepError::UnknownVariable(_) | SweepError::DuplicateVariable(_) | SweepError::InputCount(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::BadRequest, e.to_string())
                    .with_field("fix")
            }
        }
    }
}

/// Runs a parsed surface query and returns the JSON export bytes.
pub fn surface_json(models: &PermanenceModels, q: &SurfaceQuery) -> Result<Vec<u8>, ApiError> {
    let fis = models.system(q.scenario);
    let grid = sweep(fis, (&q.fixed.0, q.fixed.1), &q.x, &q.y, q.steps).map_err(|e| {
        let mut err = ApiError::from(e);
        if err.code == ErrorCode::OutOfRange {
            err.field = Some("fix".to_string());
        }
        err
    })?;
    Ok(export_grid(&grid, ExportFormat::Json))
}

type Shared = Arc<PermanenceModels>;

async fn handle_evaluate(
    State(models): State<Shared>,
    RawQuery(query): RawQuery,
    body: Bytes,
) -> Result<Json<EvaluateResponse>, ApiError> {
    let mut trace = false;
    for (key, value) in form_urlencoded::parse(query.unwrap_or_default().as_bytes()) {
        match (key.as_ref(), value.as_ref()) {
            ("trace", "true" | "1") => trace = true,
            ("trace", "false" | "0") => trace = false,
            ("trace", other) => {
                return Err(ApiError::bad_request(format!("`trace` must be true or false, got `{other}`"))
                    .with_field("trace"))
            }
            (other, _) => {
                return Err(ApiError::bad_request(format!("unknown query parameter `{other}`")).with_field(other))
            }
        }
    }
    let req = EvaluateRequest::from_json(&body)?;
    evaluate(&models, &req, trace).map(Json)
}

async fn handle_surface(State(models): State<Shared>, RawQuery(query): RawQuery) -> Result<Response, ApiError> {
    let q = SurfaceQuery::parse(&query.unwrap_or_default())?;
    let body = tokio::task::spawn_blocking(move || surface_json(&models, &q))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::BadRequest, e.to_string()))??;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn handle_model(
    State(models): State<Shared>,
    Path(scenario): Path<String>,
) -> Result<Json<ModelDescription>, ApiError> {
    let scenario = scenario
        .parse()
        .map_err(|_| ApiError::bad_scenario(StatusCode::NOT_FOUND, &scenario))?;
    Ok(Json(describe_model(&models, scenario)))
}

async fn handle_health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        models: Scenario::ALL.to_vec(),
    })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, ErrorCode::BadRequest, "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, ErrorCode::BadRequest, "method not allowed")
}

/// The API routes, plus static files from `static_dir` at `/` when given.
pub fn router(models: Arc<PermanenceModels>, static_dir: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/api/v1/evaluate", post(handle_evaluate))
        .route("/api/v1/surface", get(handle_surface))
        .route("/api/v1/model/{scenario}", get(handle_model))
        .route("/api/v1/health", get(handle_health))
        .route("/api/{*rest}", any(not_found))
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(models);
    let app = match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    };
    app.layer(CorsLayer::permissive())
}

/// Serves `app` until Ctrl-C.
pub async fn serve(listener: TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
