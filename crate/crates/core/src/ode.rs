//! Fixed-step classical Runge-Kutta integration of autonomous vector fields.

use crate::error::{invalid, Error, Result};
use crate::State;

/// `du/dt = field(u)` over `duration` (negative runs backward), split into
/// `substeps` equal RK4 steps.
#[derive(Clone, Copy)]
pub struct FieldFlowProblem<F> {
    pub field: F,
    pub duration: f64,
    pub substeps: usize,
}

impl<F> FieldFlowProblem<F>
where
    F: Fn(State) -> [f64; 2],
{
    pub fn new(field: F, duration: f64, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(invalid("substeps", "must be at least 1"));
        }
        Ok(Self {
            field,
            duration,
            substeps,
        })
    }

    pub fn solve(&self, x: State) -> Result<State> {
        rk4_flow(&self.field, self.duration, self.substeps, x)
    }
}

#[inline]
fn axpy(x: State, h: f64, k: [f64; 2]) -> State {
    [x[0] + h * k[0], x[1] + h * k[1]]
}

#[inline]
fn eval<F: Fn(State) -> [f64; 2]>(field: &F, x: State) -> Result<[f64; 2]> {
    let k = field(x);
    if k[0].is_finite() && k[1].is_finite() {
        Ok(k)
    } else {
        Err(Error::NonFiniteField(x))
    }
}

/// Classical four-stage RK4 applied `substeps` times.
pub fn rk4_flow<F>(field: &F, duration: f64, substeps: usize, x: State) -> Result<State>
where
    F: Fn(State) -> [f64; 2],
{
    if duration == 0.0 {
        return Ok(x);
    }
    let substeps = substeps.max(1);
    let h = duration / substeps as f64;
    let mut y = x;
    for _ in 0..substeps {
        let k1 = eval(field, y)?;
        let k2 = eval(field, axpy(y, 0.5 * h, k1))?;
        let k3 = eval(field, axpy(y, 0.5 * h, k2))?;
        let k4 = eval(field, axpy(y, h, k3))?;
        y = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    Ok(y)
}
