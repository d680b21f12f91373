use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as JsonValue};
use shortlist_core::clock::{Clock, SystemClock, Timestamp};
use shortlist_core::comparative::{comparable_attributes, dominant_set, BucketChange};
use shortlist_core::experiment::{find_task, score_trial, InterfaceVariant};
use shortlist_core::report::{build_report, score_all, ScoredTrial, VariantCatalogs};
use shortlist_core::session::Session;
use shortlist_core::wheel::selected_attributes;
use shortlist_core::{
    build_chart, comparison_table, product_detail, scatter_projection, Catalog, Error, FilterSpec,
    SessionContext, SessionStore, Stage, TaskSpec, TrialLog,
};
use tower_http::services::ServeDir;

/// JSON error body: `{code, message, details}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub details: JsonValue,
}

impl ApiError {
    fn conflict(code: &str, message: String) -> Self {
        ApiError {
            status: StatusCode::CONFLICT,
            code: code.to_string(),
            message,
            details: JsonValue::Null,
        }
    }
}

pub fn status_for(err: &Error) -> StatusCode {
    match err {
        Error::UnknownSession(_)
        | Error::UnknownProduct(_)
        | Error::UnknownVariant(_)
        | Error::UnknownTask(_)
        | Error::UnknownTrial(_) => StatusCode::NOT_FOUND,
        Error::IllegalTransition { .. }
        | Error::NotInBucket(_)
        | Error::WrongStage(_)
        | Error::BucketFull(_)
        | Error::NotInFilteredSet(_)
        | Error::EmptyBucket
        | Error::IncompleteTrial(_) => StatusCode::CONFLICT,
        Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn details_for(err: &Error) -> JsonValue {
    match err {
        Error::SchemaViolation {
            product,
            attribute,
            reason,
        } => json!({ "product": product, "attribute": attribute, "reason": reason }),
        Error::UnknownLabel { attribute, label } => {
            json!({ "attribute": attribute, "label": label })
        }
        Error::InvalidClause { attribute, reason } => {
            json!({ "attribute": attribute, "reason": reason })
        }
        Error::MissingValue { product, attribute } => {
            json!({ "product": product, "attribute": attribute })
        }
        Error::IllegalTransition { from, to } => json!({ "from": from, "to": to }),
        Error::BucketFull(cap) => json!({ "cap": cap }),
        Error::NotInBucket(id) | Error::NotInFilteredSet(id) | Error::UnknownProduct(id) => {
            json!({ "product_id": id })
        }
        _ => JsonValue::Null,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        ApiError {
            status: status_for(&err),
            code: err.code().to_string(),
            message: err.to_string(),
            details: details_for(&err),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "details": self.details });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppConfig {
    /// The first catalog serves the typical arm; the second, when present,
    /// the visualization arm.
    pub catalogs: Vec<Catalog>,
    pub tasks: Vec<TaskSpec>,
    pub bucket_cap: usize,
    pub trial_log: Option<PathBuf>,
    pub asset_dir: Option<PathBuf>,
}

pub struct AppState {
    contexts: Vec<SessionContext>,
    sessions: SessionStore,
    tasks: Vec<TaskSpec>,
    trials: Mutex<Vec<TrialLog>>,
    trial_log: Option<PathBuf>,
    asset_dir: Option<PathBuf>,
    clock: Arc<dyn Clock>,
}

impl AppState {
    pub fn new(config: AppConfig) -> Result<Self, Error> {
        Self::with_clock(config, Arc::new(SystemClock))
    }

    pub fn with_clock(config: AppConfig, clock: Arc<dyn Clock>) -> Result<Self, Error> {
        if config.catalogs.is_empty() {
            return Err(Error::MalformedInput(
                "at least one catalog is required".into(),
            ));
        }
        if config.bucket_cap == 0 {
            return Err(Error::MalformedInput("bucket cap must be positive".into()));
        }
        let contexts = config
            .catalogs
            .into_iter()
            .map(|c| SessionContext::new(Arc::new(c), config.bucket_cap))
            .collect();
        Ok(AppState {
            contexts,
            sessions: SessionStore::new(),
            tasks: config.tasks,
            trials: Mutex::new(Vec::new()),
            trial_log: config.trial_log,
            asset_dir: config.asset_dir,
            clock,
        })
    }

    fn now(&self) -> Timestamp {
        self.clock.now_ms()
    }

    fn context(&self, variant: Option<&str>) -> Result<&SessionContext, Error> {
        match variant {
            None => Ok(&self.contexts[0]),
            Some(v) => self
                .contexts
                .iter()
                .find(|c| c.catalog.variant_tag() == v)
                .ok_or_else(|| Error::UnknownVariant(v.to_string())),
        }
    }

    fn arm_context(&self, arm: InterfaceVariant) -> &SessionContext {
        match arm {
            InterfaceVariant::Typical => &self.contexts[0],
            InterfaceVariant::Visualization => self.contexts.get(1).unwrap_or(&self.contexts[0]),
        }
    }

    fn catalogs(&self) -> VariantCatalogs<'_> {
        VariantCatalogs {
            typical: &self.arm_context(InterfaceVariant::Typical).catalog,
            visualization: &self.arm_context(InterfaceVariant::Visualization).catalog,
        }
    }

    /// Run `f` on a session together with the context of its catalog.
    fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session, &SessionContext) -> Result<T, Error>,
    ) -> Result<T, Error> {
        self.sessions.with_session(id, |s| {
            let ctx = self.context(Some(&s.catalog_variant))?;
            f(s, ctx)
        })
    }
}

pub type SharedState = Arc<AppState>;

pub fn app(state: AppState) -> Router {
    let assets = state.asset_dir.clone();
    let mut router = Router::new()
        .route("/catalog/schema", get(schema))
        .route("/wheel", get(wheel))
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session))
        .route("/session/{id}/events", get(session_events))
        .route("/session/{id}/filter", post(filter))
        .route("/session/{id}/scatter", get(scatter))
        .route("/session/{id}/bucket", post(bucket))
        .route("/session/{id}/comparison", get(comparison))
        .route("/session/{id}/comparison-table", get(table))
        .route("/session/{id}/advance", post(advance))
        .route("/session/{id}/decide", post(decide))
        .route("/product/{id}", get(product))
        .route("/trial/start", post(trial_start))
        .route("/trial/finish", post(trial_finish))
        .route("/report", get(report));
    if let Some(dir) = assets {
        router = router.nest_service("/assets", ServeDir::new(dir));
    }
    router.with_state(Arc::new(state))
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T, Error> {
    let text = if body.trim().is_empty() { "{}" } else { body };
    serde_json::from_str(text).map_err(|e| Error::MalformedInput(e.to_string()))
}

fn param<'q>(q: &'q HashMap<String, String>, key: &str) -> Result<&'q str, Error> {
    q.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::MalformedInput(format!("missing query parameter `{key}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub catalog_variant: String,
    pub stage: Stage,
    pub selected_nodes: Vec<String>,
    pub filter_spec: FilterSpec,
    pub filtered_count: usize,
    pub bucket: Vec<String>,
    pub bucket_cap: usize,
    pub final_choice: Option<String>,
    pub event_count: usize,
}

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        SessionView {
            id: s.id.clone(),
            catalog_variant: s.catalog_variant.clone(),
            stage: s.stage,
            selected_nodes: s.wheel_state.selected.iter().cloned().collect(),
            filter_spec: s.filter_spec.clone(),
            filtered_count: s.filtered.len(),
            bucket: s.bucket.items().to_vec(),
            bucket_cap: s.bucket.cap(),
            final_choice: s.final_choice.clone(),
            event_count: s.events.len(),
        }
    }
}

async fn schema(
    State(st): State<SharedState>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<JsonValue>> {
    let ctx = st.context(q.get("variant").map(String::as_str))?;
    Ok(Json(json!({
        "variant_tag": ctx.catalog.variant_tag(),
        "product_count": ctx.catalog.len(),
        "schema": ctx.catalog.schema(),
    })))
}

async fn wheel(
    State(st): State<SharedState>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<JsonValue>> {
    let ctx = st.context(q.get("variant").map(String::as_str))?;
    Ok(Json(
        serde_json::to_value(ctx.wheel.root()).expect("wheel serializes"),
    ))
}

#[derive(Deserialize)]
struct CreateSession {
    variant: Option<String>,
}

async fn create_session(
    State(st): State<SharedState>,
    body: String,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let ts = st.now();
    let req: CreateSession = parse(&body)?;
    let ctx = st.context(req.variant.as_deref())?;
    let session = st.sessions.create(ctx, ts);
    Ok((StatusCode::CREATED, Json(SessionView::from(&session))))
}

async fn get_session(
    State(st): State<SharedState>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionView>> {
    Ok(Json(SessionView::from(&st.sessions.snapshot(&id)?)))
}

async fn session_events(
    State(st): State<SharedState>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let text = st.sessions.snapshot(&id)?.events_jsonl();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

#[derive(Deserialize)]
struct FilterRequest {
    spec: Option<FilterSpec>,
    selected: Option<Vec<String>>,
    toggle: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FilterResponse {
    pub product_ids: Vec<String>,
    pub count: usize,
    pub filter_spec: FilterSpec,
    pub selected_nodes: Vec<String>,
}

async fn filter(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<FilterResponse>> {
    let ts = st.now();
    let req: FilterRequest = parse(&body)?;
    let given = [
        req.spec.is_some(),
        req.selected.is_some(),
        req.toggle.is_some(),
    ];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(Error::MalformedInput(
            "give exactly one of `spec`, `selected` or `toggle`".into(),
        )
        .into());
    }
    let resp = st.with_session(&id, |s, ctx| {
        if let Some(spec) = req.spec {
            s.set_filter(ctx, spec, ts)?;
        } else if let Some(nodes) = req.selected {
            s.select_nodes(ctx, nodes, ts)?;
        } else if let Some(node) = req.toggle {
            s.toggle_node(ctx, &node, ts)?;
        }
        Ok(FilterResponse {
            count: s.filtered.len(),
            product_ids: s.filtered.clone(),
            filter_spec: s.filter_spec.clone(),
            selected_nodes: s.wheel_state.selected.iter().cloned().collect(),
        })
    })?;
    Ok(Json(resp))
}

async fn scatter(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<JsonValue>> {
    let x = param(&q, "x")?.to_string();
    let y = param(&q, "y")?.to_string();
    let value = st.with_session(&id, |s, ctx| {
        let projection = scatter_projection(&ctx.catalog, &s.filtered, s.bucket.items(), &x, &y)?;
        let dominant = dominant_set(&ctx.catalog, &s.filtered, &[x.clone(), y.clone()])?;
        let mut v = serde_json::to_value(projection).expect("projection serializes");
        v["dominant"] = json!(dominant);
        Ok(v)
    })?;
    Ok(Json(value))
}

#[derive(Deserialize)]
struct ProductRequest {
    product_id: String,
}

async fn bucket(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<JsonValue>> {
    let ts = st.now();
    let req: ProductRequest = parse(&body)?;
    let value = st.with_session(&id, |s, ctx| {
        let change: BucketChange = s.toggle_bucket(ctx, &req.product_id, ts)?;
        Ok(json!({ "change": change, "bucket": s.bucket.items() }))
    })?;
    Ok(Json(value))
}

/// Comparable attributes picked on the wheel, else every comparable
/// attribute that all bucket products carry.
fn default_chart_attrs(s: &Session, ctx: &SessionContext) -> Vec<String> {
    let comparable = comparable_attributes(&ctx.catalog);
    let picked: Vec<String> = selected_attributes(&ctx.wheel, &s.wheel_state)
        .into_iter()
        .filter(|a| comparable.contains(a))
        .collect();
    if !picked.is_empty() {
        return picked;
    }
    comparable
        .into_iter()
        .filter(|a| {
            s.bucket.items().iter().all(|p| {
                ctx.catalog
                    .product(p)
                    .is_ok_and(|p| p.values.contains_key(a))
            })
        })
        .collect()
}

async fn comparison(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<JsonValue>> {
    let value = st.with_session(&id, |s, ctx| {
        let attrs: Vec<String> = match q.get("attrs") {
            Some(list) => list
                .split(',')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(String::from)
                .collect(),
            None => default_chart_attrs(s, ctx),
        };
        let chart = build_chart(&ctx.catalog, s.bucket.items(), &attrs)?;
        Ok(serde_json::to_value(chart).expect("chart serializes"))
    })?;
    Ok(Json(value))
}

async fn table(
    State(st): State<SharedState>,
    Path(id): Path<String>,
) -> ApiResult<Json<JsonValue>> {
    let value = st.with_session(&id, |s, ctx| {
        let t = comparison_table(&ctx.catalog, s.bucket.items())?;
        Ok(serde_json::to_value(t).expect("table serializes"))
    })?;
    Ok(Json(value))
}

#[derive(Deserialize)]
struct AdvanceRequest {
    stage: Stage,
}

async fn advance(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<SessionView>> {
    let ts = st.now();
    let req: AdvanceRequest = parse(&body)?;
    let view = st.with_session(&id, |s, ctx| {
        s.advance(ctx, req.stage, ts)?;
        Ok(SessionView::from(&*s))
    })?;
    Ok(Json(view))
}

async fn decide(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<SessionView>> {
    let ts = st.now();
    let req: ProductRequest = parse(&body)?;
    let view = st.with_session(&id, |s, ctx| {
        s.decide(ctx, &req.product_id, ts)?;
        Ok(SessionView::from(&*s))
    })?;
    Ok(Json(view))
}

async fn product(
    State(st): State<SharedState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<JsonValue>> {
    let candidates: Vec<&SessionContext> = match q.get("variant") {
        Some(v) => vec![st.context(Some(v))?],
        None => st.contexts.iter().collect(),
    };
    for ctx in candidates {
        if ctx.catalog.product(&id).is_ok() {
            let detail = product_detail(&ctx.catalog, &id)?;
            let mut v = serde_json::to_value(detail).expect("detail serializes");
            v["variant_tag"] = json!(ctx.catalog.variant_tag());
            return Ok(Json(v));
        }
    }
    Err(Error::UnknownProduct(id).into())
}

#[derive(Deserialize)]
struct TrialStart {
    participant_id: String,
    interface_variant: InterfaceVariant,
    task_id: String,
    session_id: Option<String>,
}

async fn trial_start(
    State(st): State<SharedState>,
    body: String,
) -> ApiResult<(StatusCode, Json<JsonValue>)> {
    let ts = st.now();
    let req: TrialStart = parse(&body)?;
    find_task(&st.tasks, &req.task_id)?;
    if let Some(sid) = &req.session_id {
        st.sessions.get(sid)?;
    }
    let mut trials = st.trials.lock().expect("trial book poisoned");
    trials.push(TrialLog {
        participant_id: req.participant_id,
        interface_variant: req.interface_variant,
        task_id: req.task_id,
        start_ts: ts,
        end_ts: None,
        answer: None,
        abandoned: false,
        session_id: req.session_id,
    });
    let trial_id = format!("t{:06}", trials.len());
    Ok((
        StatusCode::CREATED,
        Json(json!({ "trial_id": trial_id, "start_ts": ts })),
    ))
}

#[derive(Deserialize)]
struct TrialFinish {
    trial_id: String,
    answer: Option<String>,
    #[serde(default)]
    abandoned: bool,
}

fn trial_index(id: &str, len: usize) -> Result<usize, Error> {
    id.strip_prefix('t')
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|n| (1..=len).contains(n))
        .map(|n| n - 1)
        .ok_or_else(|| Error::UnknownTrial(id.to_string()))
}

async fn trial_finish(State(st): State<SharedState>, body: String) -> ApiResult<Json<ScoredTrial>> {
    let ts = st.now();
    let req: TrialFinish = parse(&body)?;
    let mut trials = st.trials.lock().expect("trial book poisoned");
    let idx = trial_index(&req.trial_id, trials.len())?;
    if trials[idx].end_ts.is_some() {
        return Err(ApiError::conflict(
            "TRIAL_FINISHED",
            format!("trial `{}` is already finished", req.trial_id),
        ));
    }
    let mut trial = trials[idx].clone();
    // Without an explicit answer the linked session's final choice counts.
    let answer = match (&req.answer, &trial.session_id) {
        (Some(a), _) => Some(a.clone()),
        (None, Some(sid)) => st.sessions.snapshot(sid)?.final_choice,
        (None, None) => None,
    };
    trial.end_ts = Some(ts.max(trial.start_ts));
    trial.answer = answer;
    trial.abandoned = req.abandoned;
    let task = find_task(&st.tasks, &trial.task_id)?;
    let score = score_trial(
        &st.arm_context(trial.interface_variant).catalog,
        task,
        &trial,
    )?;
    if let Some(path) = &st.trial_log {
        let line = serde_json::to_string(&trial).expect("trial serializes");
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(Error::from)?;
        writeln!(f, "{line}").map_err(Error::from)?;
    }
    trials[idx] = trial.clone();
    Ok(Json(ScoredTrial {
        trial,
        correct: score.correct,
        duration_s: score.duration_s,
    }))
}

async fn report(State(st): State<SharedState>) -> ApiResult<Json<JsonValue>> {
    let finished: Vec<TrialLog> = st
        .trials
        .lock()
        .expect("trial book poisoned")
        .iter()
        .filter(|t| t.end_ts.is_some())
        .cloned()
        .collect();
    let scored = score_all(&st.tasks, st.catalogs(), &finished)?;
    let report = build_report(&st.tasks, &scored, &[])?;
    Ok(Json(
        serde_json::to_value(report).expect("report serializes"),
    ))
}
