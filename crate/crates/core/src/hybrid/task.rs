//! Running an optimization on a worker thread.

use std::sync::{Arc, Mutex, PoisonError};
use std::thread::JoinHandle;

use super::{optimize, HybridError, ObjectiveFunction, Optimizer, ResultsBuffer};

type Job = JoinHandle<Result<ResultsBuffer, HybridError>>;

/// Join token for a launched optimization. Can be synchronized once.
#[derive(Debug)]
pub struct Handle {
    job: Mutex<Option<Job>>,
}

impl Handle {
    pub fn is_finished(&self) -> bool {
        self.job.lock().unwrap_or_else(PoisonError::into_inner).as_ref().is_none_or(|j| j.is_finished())
    }

    /// Blocks until the optimization finishes.
    pub fn sync(&self) -> Result<ResultsBuffer, HybridError> {
        let job = self.job.lock().unwrap_or_else(PoisonError::into_inner).take().ok_or(HybridError::DoubleSync)?;
        job.join().unwrap_or_else(|_| Err(HybridError::ObjectiveEvaluation("optimization worker panicked".into())))
    }
}

/// Starts `optimize(optimizer, objective)` on its own thread and returns immediately.
pub fn task_initiate(objective: Arc<ObjectiveFunction>, optimizer: Arc<dyn Optimizer>) -> Handle {
    let job = std::thread::spawn(move || optimize(optimizer.as_ref(), &objective));
    Handle { job: Mutex::new(Some(job)) }
}

pub fn sync(handle: &Handle) -> Result<ResultsBuffer, HybridError> {
    handle.sync()
}
