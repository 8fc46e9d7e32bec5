//! First-order update rules over flat parameter slices.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// How the step size evolves over iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant,
    /// Decays linearly from the base step size to zero at `horizon` steps.
    LinearDecay {
        horizon: u64,
    },
}

impl StepSchedule {
    fn factor(self, iteration: u64) -> f64 {
        match self {
            StepSchedule::Constant => 1.0,
            StepSchedule::LinearDecay { horizon } => {
                if horizon == 0 {
                    0.0
                } else {
                    (1.0 - iteration as f64 / horizon as f64).max(0.0)
                }
            }
        }
    }
}

/// RMSProp state: `acc <- decay * acc + (1 - decay) * g^2`,
/// `x <- x - lr * g / (sqrt(acc) + epsilon)`.
///
/// The accumulator starts at 1, not 0. Starting from 0 makes the first steps
/// about `lr / sqrt(1 - decay)`, several times the nominal step size.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub step_size: f64,
    pub decay: f64,
    pub epsilon: f64,
    pub schedule: StepSchedule,
    accumulator: Vec<f64>,
    iteration: u64,
}

impl OptimizerState {
    /// RMSProp with decay 0.95 and epsilon 1e-4.
    ///
    /// Once the gradient has vanished the accumulator decays towards zero and
    /// the effective step `lr / (sqrt(acc) + epsilon)` grows without bound, so
    /// a tiny epsilon turns rounding noise at a converged point into bursts of
    /// full-size steps. 1e-4 keeps the converged state stable.
    pub fn rmsprop(step_size: f64) -> Result<Self> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("step size must be positive, got {step_size}")));
        }
        Ok(Self {
            step_size,
            decay: 0.95,
            epsilon: 1e-4,
            schedule: StepSchedule::Constant,
            accumulator: Vec::new(),
            iteration: 0,
        })
    }

    pub fn with_schedule(mut self, schedule: StepSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn accumulator(&self) -> &[f64] {
        &self.accumulator
    }

    /// Current effective step size.
    pub fn current_step_size(&self) -> f64 {
        self.step_size * self.schedule.factor(self.iteration)
    }

    /// Applies one descent step to `params`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        if self.accumulator.len() != params.len() {
            self.accumulator = vec![1.0; params.len()];
        }
        let lr = self.current_step_size();
        for ((x, &g), acc) in params.iter_mut().zip(grad).zip(self.accumulator.iter_mut()) {
            *acc = self.decay * *acc + (1.0 - self.decay) * g * g;
            *x -= lr * g / (libm::sqrt(*acc) + self.epsilon);
        }
        self.iteration += 1;
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    iteration: u64,
}

impl AdamState {
    pub fn new(step_size: f64) -> Self {
        Self { step_size, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, first: Vec::new(), second: Vec::new(), iteration: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        if self.first.len() != params.len() {
            self.first = vec![0.0; params.len()];
            self.second = vec![0.0; params.len()];
        }
        self.iteration += 1;
        let t = self.iteration as i32;
        let c1 = 1.0 - libm::pow(self.beta1, t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, t as f64);
        for i in 0..params.len() {
            let g = grad[i];
            self.first[i] = self.beta1 * self.first[i] + (1.0 - self.beta1) * g;
            self.second[i] = self.beta2 * self.second[i] + (1.0 - self.beta2) * g * g;
            let m = self.first[i] / c1;
            let v = self.second[i] / c2;
            params[i] -= self.step_size * m / (libm::sqrt(v) + self.epsilon);
        }
    }
}
