//! In-memory jobs and planning sessions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use rws_core::{
    validate_assignment, AssignmentMatrix, Diagnostics, GenerationRequest, GenerationResult, JobControl,
    ScheduleParams, SolutionSet, SolveMethod,
};
use serde::Serialize;

use crate::config::Config;
use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum JobState {
    Running,
    Done,
    Cancelled,
    Failed,
}

#[derive(Debug, Clone)]
enum Outcome<T> {
    Running,
    Done(Arc<T>),
    Cancelled(Arc<T>),
    Failed(ApiError),
}

/// A background computation with a cancel handle.
#[derive(Debug)]
pub struct Job<T> {
    pub control: Arc<JobControl>,
    outcome: RwLock<Outcome<T>>,
}

impl<T> Job<T> {
    pub fn new() -> Arc<Self> {
        Arc::new(Self {
            control: JobControl::new(),
            outcome: RwLock::new(Outcome::Running),
        })
    }

    pub fn state(&self) -> JobState {
        match *self.outcome.read().unwrap() {
            Outcome::Running => JobState::Running,
            Outcome::Done(_) => JobState::Done,
            Outcome::Cancelled(_) => JobState::Cancelled,
            Outcome::Failed(_) => JobState::Failed,
        }
    }

    /// Final or partial output, if any.
    pub fn output(&self) -> Option<Arc<T>> {
        match &*self.outcome.read().unwrap() {
            Outcome::Done(v) | Outcome::Cancelled(v) => Some(v.clone()),
            _ => None,
        }
    }

    /// Output of a job that ran to completion.
    pub fn finished(&self) -> Result<Arc<T>, ApiError> {
        match &*self.outcome.read().unwrap() {
            Outcome::Done(v) => Ok(v.clone()),
            Outcome::Failed(e) => Err(e.clone()),
            other => Err(ApiError::not_ready(format!(
                "job is {}",
                match other {
                    Outcome::Running => "still running",
                    _ => "cancelled",
                }
            ))),
        }
    }

    pub fn error(&self) -> Option<ApiError> {
        match &*self.outcome.read().unwrap() {
            Outcome::Failed(e) => Some(e.clone()),
            _ => None,
        }
    }

    pub fn progress(&self) -> f64 {
        match self.state() {
            JobState::Done => 1.0,
            _ => self.control.progress(),
        }
    }

    pub fn finish(&self, value: T) {
        *self.outcome.write().unwrap() = Outcome::Done(Arc::new(value));
    }

    pub fn cancelled(&self, partial: T) {
        *self.outcome.write().unwrap() = Outcome::Cancelled(Arc::new(partial));
    }

    pub fn fail(&self, err: ApiError) {
        *self.outcome.write().unwrap() = Outcome::Failed(err);
    }
}

#[derive(Debug)]
pub struct Phase1Job {
    pub id: u64,
    pub request: GenerationRequest,
    pub job: Arc<Job<GenerationResult>>,
}

#[derive(Debug)]
pub struct SolveJob {
    pub requested: SolveMethod,
    pub method: SolveMethod,
    pub job: Arc<Job<SolutionSet>>,
}

#[derive(Debug)]
pub struct Session {
    pub id: u64,
    pub job_id: u64,
    pub combination_index: usize,
    pub params: ScheduleParams,
    pub matrix: AssignmentMatrix,
    pub diagnostics: Diagnostics,
    pub solve: Option<SolveJob>,
    pub selected_solution: Option<usize>,
}

impl Session {
    /// Replaces the current matrix and recomputes diagnostics.
    pub fn replace_matrix(&mut self, matrix: AssignmentMatrix) -> Result<(), ApiError> {
        self.diagnostics = validate_assignment(&matrix, &self.params)?;
        self.matrix = matrix;
        Ok(())
    }

    pub fn solutions(&self) -> Result<Arc<SolutionSet>, ApiError> {
        match &self.solve {
            Some(s) => s.job.finished(),
            None => Err(ApiError::not_ready("no solve has been started in this session")),
        }
    }
}

pub struct AppState {
    pub config: Config,
    next_id: AtomicU64,
    jobs: RwLock<HashMap<u64, Arc<Phase1Job>>>,
    sessions: RwLock<HashMap<u64, Arc<RwLock<Session>>>>,
}

impl AppState {
    pub fn new(config: Config) -> Arc<Self> {
        Arc::new(Self {
            config,
            next_id: AtomicU64::new(1),
            jobs: RwLock::default(),
            sessions: RwLock::default(),
        })
    }

    pub fn next_id(&self) -> u64 {
        self.next_id.fetch_add(1, Ordering::Relaxed)
    }

    pub fn insert_job(&self, job: Arc<Phase1Job>) {
        self.jobs.write().unwrap().insert(job.id, job);
    }

    pub fn job(&self, id: u64) -> Result<Arc<Phase1Job>, ApiError> {
        self.jobs
            .read()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("job", id))
    }

    pub fn insert_session(&self, session: Session) -> Arc<RwLock<Session>> {
        let id = session.id;
        let handle = Arc::new(RwLock::new(session));
        self.sessions.write().unwrap().insert(id, handle.clone());
        handle
    }

    pub fn session(&self, id: u64) -> Result<Arc<RwLock<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }
}
