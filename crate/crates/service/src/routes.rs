use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use rws_core::io::{export_csv, merge_schedules};
use rws_core::{
    expand_to_week_matrix, generate_with, memory_guard, resolve_method, solve_with, total_combination_count,
    weekend_off_count, AssignmentMatrix, BooleanShiftArray, Cell, Diagnostics, GenerateError, GenerationMode,
    GenerationRequest, MemoryGuardDecision, ScheduleParams, ShiftType, SolveError, SolveMethod, SolveRequest,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::state::{AppState, Job, JobState, Phase1Job, Session, SolveJob};

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/config", get(config))
        .route("/phase1/jobs", post(start_phase1))
        .route("/phase1/jobs/:id", get(phase1_status))
        .route("/phase1/jobs/:id/cancel", post(cancel_phase1))
        .route("/phase1/jobs/:id/combinations", get(list_combinations))
        .route("/phase2/sessions", post(open_phase2))
        .route("/phase2/sessions/:id", get(session_view))
        .route("/phase2/sessions/:id/cells", put(set_cell))
        .route("/phase2/sessions/:id/solve", post(find_solutions).get(solve_status))
        .route("/phase2/sessions/:id/solve/cancel", post(cancel_solve))
        .route("/phase2/sessions/:id/solutions", get(list_solutions))
        .route("/phase2/sessions/:id/selection", put(select_solution))
        .route("/phase2/sessions/:id/export", get(export_session))
        .route("/export", post(export_merge))
        .with_state(state)
}

#[derive(Debug, Serialize)]
struct ConfigView {
    memory_threshold: u64,
    fast_limit: usize,
    shift_catalog: Vec<ShiftType>,
}

async fn config(State(state): Shared) -> Json<ConfigView> {
    let c = &state.config;
    Json(ConfigView {
        memory_threshold: c.memory_threshold,
        fast_limit: c.fast_limit,
        shift_catalog: c.catalog(c.shift_catalog.len(), 8.0),
    })
}

// ---- phase 1 ----

#[derive(Debug, Deserialize)]
pub struct StartPhase1 {
    pub params: ScheduleParams,
    /// Size of the default catalog used when `params.shift_catalog` is empty.
    #[serde(default)]
    pub shift_types: Option<usize>,
    pub mode: GenerationMode,
    #[serde(default)]
    pub fast_limit: Option<usize>,
    #[serde(default)]
    pub cluster_free_days: bool,
}

#[derive(Debug, Serialize)]
pub struct Phase1Status {
    pub id: u64,
    pub state: JobState,
    pub progress: f64,
    pub combinations_examined: String,
    pub total_combinations: String,
    pub solutions_found: Option<usize>,
    pub elapsed: Option<f64>,
    pub truncated: Option<bool>,
    pub request: GenerationRequest,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

async fn start_phase1(State(state): Shared, Json(body): Json<StartPhase1>) -> ApiResult<impl IntoResponse> {
    let mut params = body.params;
    if params.shift_catalog.is_empty() {
        let count = body.shift_types.ok_or_else(|| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "INVALID_PARAMS",
                "give either params.shift_catalog or shift_types",
            )
        })?;
        params.shift_catalog = state.config.catalog(count, params.shift_length);
    }
    let request = GenerationRequest {
        params,
        mode: body.mode,
        fast_limit: body.fast_limit.unwrap_or(state.config.fast_limit),
        cluster_free_days: body.cluster_free_days,
    };
    request.validate()?;

    let entry = Arc::new(Phase1Job {
        id: state.next_id(),
        request,
        job: Job::new(),
    });
    state.insert_job(entry.clone());
    tracing::info!(job = entry.id, mode = ?entry.request.mode, "phase-1 job started");
    let worker = entry.clone();
    tokio::task::spawn_blocking(move || {
        match generate_with(&worker.request, &worker.job.control) {
            Ok(result) => {
                tracing::info!(job = worker.id, found = result.solutions_found, "phase-1 job done");
                worker.job.finish(result)
            }
            Err(GenerateError::Cancelled(partial)) => worker.job.cancelled(*partial),
            Err(e) => worker.job.fail(e.into()),
        }
    });
    Ok((StatusCode::ACCEPTED, Json(phase1_status_of(&entry)?)))
}

fn phase1_status_of(entry: &Phase1Job) -> ApiResult<Phase1Status> {
    let params = &entry.request.params;
    let k = rws_core::derive_total_shifts(params)?;
    let total = total_combination_count(params.slots() as u64, k as u64)?;
    let output = entry.job.output();
    Ok(Phase1Status {
        id: entry.id,
        state: entry.job.state(),
        progress: entry.job.progress(),
        combinations_examined: output
            .as_ref()
            .map(|r| r.combinations_examined.to_string())
            .unwrap_or_else(|| entry.job.control.examined().to_string()),
        total_combinations: total.to_string(),
        solutions_found: output.as_ref().map(|r| r.solutions_found),
        elapsed: output.as_ref().map(|r| r.elapsed),
        truncated: output.as_ref().map(|r| r.truncated),
        request: entry.request.clone(),
        error: entry.job.error().map(|e| e.to_string()),
    })
}

async fn phase1_status(State(state): Shared, Path(id): Path<u64>) -> ApiResult<Json<Phase1Status>> {
    let entry = state.job(id)?;
    Ok(Json(phase1_status_of(&entry)?))
}

async fn cancel_phase1(State(state): Shared, Path(id): Path<u64>) -> ApiResult<Json<Phase1Status>> {
    let entry = state.job(id)?;
    entry.job.control.cancel();
    Ok(Json(phase1_status_of(&entry)?))
}

#[derive(Debug, Deserialize)]
pub struct Page {
    #[serde(default)]
    pub offset: usize,
    #[serde(default = "default_limit")]
    pub limit: usize,
}

fn default_limit() -> usize {
    50
}

#[derive(Debug, Serialize)]
pub struct CombinationItem {
    pub index: usize,
    pub array: BooleanShiftArray,
    /// Weeks as rows, seven days each.
    pub matrix: Vec<Vec<bool>>,
    pub column_sums: Vec<usize>,
    pub weekend_off_count: usize,
}

#[derive(Debug, Serialize)]
pub struct PageOf<T> {
    pub total: usize,
    pub offset: usize,
    pub items: Vec<T>,
}

async fn list_combinations(
    State(state): Shared,
    Path(id): Path<u64>,
    Query(page): Query<Page>,
) -> ApiResult<Json<PageOf<CombinationItem>>> {
    let entry = state.job(id)?;
    let result = entry.job.finished()?;
    let params = &entry.request.params;
    let items = result
        .arrays
        .iter()
        .enumerate()
        .skip(page.offset)
        .take(page.limit)
        .map(|(index, array)| {
            let m = expand_to_week_matrix(array, params)?;
            Ok(CombinationItem {
                index,
                array: array.clone(),
                matrix: (0..m.weeks()).map(|r| m.row(r).to_vec()).collect(),
                column_sums: m.column_sums().to_vec(),
                weekend_off_count: weekend_off_count(array, params)?,
            })
        })
        .collect::<ApiResult<Vec<_>>>()?;
    Ok(Json(PageOf {
        total: result.arrays.len(),
        offset: page.offset,
        items,
    }))
}

// ---- phase 2 ----

#[derive(Debug, Deserialize)]
pub struct OpenPhase2 {
    pub job_id: u64,
    pub combination_index: usize,
}

#[derive(Debug, Serialize)]
pub struct SessionView<'a> {
    pub id: u64,
    pub job_id: u64,
    pub combination_index: usize,
    pub params: &'a ScheduleParams,
    pub matrix: &'a AssignmentMatrix,
    pub diagnostics: &'a Diagnostics,
    pub selected_solution: Option<usize>,
}

fn view(s: &Session) -> SessionView<'_> {
    SessionView {
        id: s.id,
        job_id: s.job_id,
        combination_index: s.combination_index,
        params: &s.params,
        matrix: &s.matrix,
        diagnostics: &s.diagnostics,
        selected_solution: s.selected_solution,
    }
}

async fn open_phase2(State(state): Shared, Json(body): Json<OpenPhase2>) -> ApiResult<impl IntoResponse> {
    let entry = state.job(body.job_id)?;
    let result = entry.job.finished()?;
    let array = result.arrays.get(body.combination_index).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "NOT_FOUND",
            format!("job {} has no combination {}", body.job_id, body.combination_index),
        )
    })?;
    let params = entry.request.params.clone();
    let matrix = AssignmentMatrix::from_origin(array.clone(), &params)?;
    let diagnostics = rws_core::validate_assignment(&matrix, &params)?;
    let session = Session {
        id: state.next_id(),
        job_id: body.job_id,
        combination_index: body.combination_index,
        params,
        matrix,
        diagnostics,
        solve: None,
        selected_solution: None,
    };
    let handle = state.insert_session(session);
    let s = handle.read().unwrap();
    Ok((StatusCode::CREATED, Json(serde_json::to_value(view(&s)).expect("session serializes"))))
}

async fn session_view(State(state): Shared, Path(id): Path<u64>) -> ApiResult<Json<serde_json::Value>> {
    let handle = state.session(id)?;
    let s = handle.read().unwrap();
    Ok(Json(serde_json::to_value(view(&s)).expect("session serializes")))
}

#[derive(Debug, Deserialize)]
pub struct SetCell {
    pub row: usize,
    pub column: usize,
    /// A shift index; `null` (free) is rejected.
    pub shift: Cell,
}

async fn set_cell(
    State(state): Shared,
    Path(id): Path<u64>,
    Json(body): Json<SetCell>,
) -> ApiResult<Json<Diagnostics>> {
    let Cell::Shift(shift) = body.shift else {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "FREE_FORBIDDEN",
            "working days cannot be made free in phase 2",
        ));
    };
    let handle = state.session(id)?;
    let mut s = handle.write().unwrap();
    let mut matrix = s.matrix.clone();
    matrix.set(body.row, body.column, shift, s.params.n_shift_types())?;
    s.replace_matrix(matrix)?;
    Ok(Json(s.diagnostics.clone()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct FindSolutions {
    pub method: SolveMethod,
    pub confirm_memory: bool,
    /// `[row, column]` cells kept at their current value.
    pub pinned: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize)]
pub struct SolveStatus {
    pub state: JobState,
    pub progress: f64,
    pub requested_method: SolveMethod,
    pub method: SolveMethod,
    pub candidates_examined: String,
    pub solutions_found: Option<usize>,
    pub truncated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<MemoryGuardDecision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn solve_status_of(solve: &SolveJob, decision: Option<MemoryGuardDecision>) -> SolveStatus {
    let output = solve.job.output();
    SolveStatus {
        state: solve.job.state(),
        progress: solve.job.progress(),
        requested_method: solve.requested,
        method: solve.method,
        candidates_examined: output
            .as_ref()
            .map(|s| s.candidates_examined.to_string())
            .unwrap_or_else(|| solve.job.control.examined().to_string()),
        solutions_found: output.as_ref().map(|s| s.solutions.len()),
        truncated: output.as_ref().map(|s| s.truncated),
        decision,
        error: solve.job.error().map(|e| e.to_string()),
    }
}

async fn find_solutions(
    State(state): Shared,
    Path(id): Path<u64>,
    body: Option<Json<FindSolutions>>,
) -> ApiResult<impl IntoResponse> {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let handle = state.session(id)?;
    let mut s = handle.write().unwrap();
    if let Some(prev) = &s.solve {
        if prev.job.state() == JobState::Running {
            return Err(ApiError::new(StatusCode::CONFLICT, "BUSY", "a solve is already running"));
        }
    }
    let mut request = SolveRequest::new(s.matrix.clone(), s.params.clone()).with_method(body.method);
    request.pinned = body.pinned.into_iter().collect();
    request.confirm_memory = body.confirm_memory;
    request.memory_threshold = state.config.memory_threshold;
    let method = resolve_method(&request)?;
    let decision = memory_guard(&s.params, request.open_cells().len(), request.memory_threshold);

    let job = Job::new();
    let worker = job.clone();
    tokio::task::spawn_blocking(move || match solve_with(&request, &worker.control) {
        Ok(set) => worker.finish(set),
        Err(SolveError::Cancelled(partial)) => worker.cancelled(*partial),
        Err(e) => worker.fail(e.into()),
    });
    let solve = SolveJob {
        requested: body.method,
        method,
        job,
    };
    let status = solve_status_of(&solve, Some(decision));
    s.solve = Some(solve);
    s.selected_solution = None;
    tracing::info!(session = id, ?method, "solve started");
    Ok((StatusCode::ACCEPTED, Json(status)))
}

async fn solve_status(State(state): Shared, Path(id): Path<u64>) -> ApiResult<Json<SolveStatus>> {
    let handle = state.session(id)?;
    let s = handle.read().unwrap();
    let solve = s
        .solve
        .as_ref()
        .ok_or_else(|| ApiError::not_ready("no solve has been started in this session"))?;
    Ok(Json(solve_status_of(solve, None)))
}

async fn cancel_solve(State(state): Shared, Path(id): Path<u64>) -> ApiResult<Json<SolveStatus>> {
    let handle = state.session(id)?;
    let s = handle.read().unwrap();
    let solve = s
        .solve
        .as_ref()
        .ok_or_else(|| ApiError::not_ready("no solve has been started in this session"))?;
    solve.job.control.cancel();
    Ok(Json(solve_status_of(solve, None)))
}

#[derive(Debug, Serialize)]
pub struct SolutionItem {
    pub index: usize,
    pub matrix: AssignmentMatrix,
}

async fn list_solutions(
    State(state): Shared,
    Path(id): Path<u64>,
    Query(page): Query<Page>,
) -> ApiResult<Json<PageOf<SolutionItem>>> {
    let set = state.session(id)?.read().unwrap().solutions()?;
    let items = set
        .solutions
        .iter()
        .enumerate()
        .skip(page.offset)
        .take(page.limit)
        .map(|(index, m)| SolutionItem {
            index,
            matrix: m.clone(),
        })
        .collect();
    Ok(Json(PageOf {
        total: set.solutions.len(),
        offset: page.offset,
        items,
    }))
}

#[derive(Debug, Deserialize)]
pub struct Select {
    pub index: usize,
}

fn pick(set: &rws_core::SolutionSet, index: usize) -> ApiResult<&AssignmentMatrix> {
    set.solutions.get(index).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "NOT_FOUND",
            format!("solution {index} of {} does not exist", set.solutions.len()),
        )
    })
}

async fn select_solution(
    State(state): Shared,
    Path(id): Path<u64>,
    Json(body): Json<Select>,
) -> ApiResult<Json<serde_json::Value>> {
    let handle = state.session(id)?;
    let mut s = handle.write().unwrap();
    let set = s.solutions()?;
    s.replace_matrix(pick(&set, body.index)?.clone())?;
    s.selected_solution = Some(body.index);
    Ok(Json(serde_json::to_value(view(&s)).expect("session serializes")))
}

#[derive(Debug, Deserialize)]
pub struct ExportQuery {
    pub solution: Option<usize>,
}

fn csv(body: String) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body)
}

/// The matrix a session exports: a solution by index, else the current grid.
fn export_source(state: &AppState, id: u64, solution: Option<usize>) -> ApiResult<(AssignmentMatrix, ScheduleParams)> {
    let handle = state.session(id)?;
    let s = handle.read().unwrap();
    let matrix = match solution {
        Some(i) => {
            let set = s.solutions()?;
            pick(&set, i)?.clone()
        }
        None => s.matrix.clone(),
    };
    Ok((matrix, s.params.clone()))
}

async fn export_session(
    State(state): Shared,
    Path(id): Path<u64>,
    Query(q): Query<ExportQuery>,
) -> ApiResult<impl IntoResponse> {
    let (matrix, params) = export_source(&state, id, q.solution)?;
    Ok(csv(export_csv(&matrix, &params)?))
}

#[derive(Debug, Deserialize)]
pub struct MergeMember {
    pub session: u64,
    #[serde(default)]
    pub solution: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct Merge {
    pub members: Vec<MergeMember>,
}

async fn export_merge(State(state): Shared, Json(body): Json<Merge>) -> ApiResult<impl IntoResponse> {
    let sources = body
        .members
        .iter()
        .map(|m| export_source(&state, m.session, m.solution))
        .collect::<ApiResult<Vec<_>>>()?;
    let members: Vec<_> = sources.iter().map(|(m, p)| (m, p)).collect();
    Ok(csv(merge_schedules(&members)?))
}
