//! Derivative-free optimizers over a box: COBYLA, Powell and dual annealing.
//!
//! All three drive an [`Objective`], which owns the evaluation counter, checks
//! every requested point against the bounds and remembers the incumbent.

mod cobyla;
mod dual_annealing;
mod powell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cobyla::minimize_cobyla;
pub use dual_annealing::minimize_dual_annealing;
pub use powell::minimize_powell;

type ObjectiveFn<'a> = Box<dyn FnMut(&[f64]) -> Result<f64> + 'a>;

/// A box-bounded scalar function with exact evaluation bookkeeping.
pub struct Objective<'a> {
    bounds: Vec<(f64, f64)>,
    func: ObjectiveFn<'a>,
    eval_count: usize,
    best: Option<(Vec<f64>, f64)>,
    incumbents: Vec<f64>,
}

impl<'a> Objective<'a> {
    pub fn new<F>(bounds: Vec<(f64, f64)>, func: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<f64> + 'a,
    {
        if bounds.is_empty() {
            return Err(Error::config("objective needs at least one dimension"));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config(format!("bad bounds for dimension {i}: [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            bounds,
            func: Box::new(func),
            eval_count: 0,
            best: None,
            incumbents: Vec::new(),
        })
    }

    pub fn arity(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn eval_count(&self) -> usize {
        self.eval_count
    }

    /// Best point and value seen so far.
    pub fn incumbent(&self) -> Option<(&[f64], f64)> {
        self.best.as_ref().map(|(x, v)| (x.as_slice(), *v))
    }

    /// Incumbent value after every evaluation, in order.
    pub fn incumbent_trace(&self) -> &[f64] {
        &self.incumbents
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.arity() && x.iter().zip(&self.bounds).all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }

    /// Evaluate once. Points outside the bounds are rejected with an internal
    /// error: the optimizers must never request them.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Internal(format!("evaluation outside bounds at {x:?}")));
        }
        self.eval_count += 1;
        let v = (self.func)(x)?;
        let improved = match &self.best {
            None => !v.is_nan(),
            Some((_, b)) => v < *b,
        };
        if improved {
            self.best = Some((x.to_vec(), v));
        }
        self.incumbents.push(self.best.as_ref().map_or(f64::NAN, |b| b.1));
        Ok(v)
    }

    pub(crate) fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(lo, hi);
        }
    }
}

impl std::fmt::Debug for Objective<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objective")
            .field("bounds", &self.bounds)
            .field("eval_count", &self.eval_count)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// evaluations spent by this call
    pub nfev: usize,
    pub termination: Termination,
    /// outer iterations: trust-region steps, direction cycles or annealing steps
    pub iterations: usize,
}

/// Why an optimizer loop stopped early.
pub(crate) enum Halt {
    Budget,
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Fail(e)
    }
}

pub(crate) type Step<T> = std::result::Result<T, Halt>;

/// Evaluation budget of one optimizer call on a shared objective.
pub(crate) struct Budget {
    start: usize,
    limit: usize,
}

impl Budget {
    pub(crate) fn new(obj: &Objective, maxfev: usize) -> Result<Self> {
        if maxfev < obj.arity() + 2 {
            return Err(Error::Budget(format!(
                "maxfev = {maxfev} is below arity + 2 = {}",
                obj.arity() + 2
            )));
        }
        Ok(Self {
            start: obj.eval_count(),
            limit: obj.eval_count() + maxfev,
        })
    }

    pub(crate) fn remaining(&self, obj: &Objective) -> usize {
        self.limit.saturating_sub(obj.eval_count())
    }

    pub(crate) fn used(&self, obj: &Objective) -> usize {
        obj.eval_count() - self.start
    }

    pub(crate) fn eval(&self, obj: &mut Objective, x: &[f64]) -> Step<f64> {
        if obj.eval_count() >= self.limit {
            return Err(Halt::Budget);
        }
        Ok(obj.evaluate(x)?)
    }
}

/// Build the result of one call from the objective's incumbent.
pub(crate) fn finish(obj: &Objective, budget: &Budget, outcome: Step<()>, iterations: usize) -> Result<OptResult> {
    let termination = match outcome {
        Ok(()) => Termination::Converged,
        Err(Halt::Budget) => Termination::BudgetExhausted,
        Err(Halt::Fail(e)) => return Err(e),
    };
    let (x, v) = obj
        .incumbent()
        .ok_or_else(|| Error::Internal("optimizer finished without a finite evaluation".into()))?;
    Ok(OptResult {
        best_x: x.to_vec(),
        best_value: v,
        nfev: budget.used(obj),
        termination,
        iterations,
    })
}

pub(crate) fn check_start(obj: &Objective, x0: &[f64]) -> Result<()> {
    if x0.len() != obj.arity() {
        return Err(Error::usage(format!(
            "start point has {} components, objective has {}",
            x0.len(),
            obj.arity()
        )));
    }
    if !obj.contains(x0) {
        return Err(Error::usage(format!("start point {x0:?} lies outside the bounds")));
    }
    Ok(())
}

pub const DEFAULT_COBYLA_RHO_BEG: f64 = 0.5;
pub const DEFAULT_COBYLA_RHO_END: f64 = 1e-4;
pub const DEFAULT_COBYLA_MAXFEV: usize = 1000;
pub const DEFAULT_POWELL_XTOL: f64 = 1e-4;
pub const DEFAULT_POWELL_FTOL: f64 = 1e-4;
pub const DEFAULT_POWELL_MAXFEV: usize = 2000;
pub const DEFAULT_DA_QV: f64 = 2.62;
pub const DEFAULT_DA_QA: f64 = -5.0;
pub const DEFAULT_DA_T0: f64 = 5230.0;
pub const DEFAULT_DA_MAXFEV: usize = 2000;

fn d_rho_beg() -> f64 {
    DEFAULT_COBYLA_RHO_BEG
}
fn d_rho_end() -> f64 {
    DEFAULT_COBYLA_RHO_END
}
fn d_cobyla_maxfev() -> usize {
    DEFAULT_COBYLA_MAXFEV
}
fn d_xtol() -> f64 {
    DEFAULT_POWELL_XTOL
}
fn d_ftol() -> f64 {
    DEFAULT_POWELL_FTOL
}
fn d_powell_maxfev() -> usize {
    DEFAULT_POWELL_MAXFEV
}
fn d_qv() -> f64 {
    DEFAULT_DA_QV
}
fn d_qa() -> f64 {
    DEFAULT_DA_QA
}
fn d_t0() -> f64 {
    DEFAULT_DA_T0
}
fn d_da_maxfev() -> usize {
    DEFAULT_DA_MAXFEV
}
fn d_true() -> bool {
    true
}

/// Optimizer block of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerSpec {
    Cobyla {
        #[serde(default = "d_rho_beg")]
        rho_beg: f64,
        #[serde(default = "d_rho_end")]
        rho_end: f64,
        #[serde(default = "d_cobyla_maxfev")]
        maxfev: usize,
    },
    Powell {
        #[serde(default = "d_xtol")]
        xtol: f64,
        #[serde(default = "d_ftol")]
        ftol: f64,
        #[serde(default = "d_powell_maxfev")]
        maxfev: usize,
    },
    DualAnnealing {
        #[serde(default = "d_qv")]
        q_v: f64,
        #[serde(default = "d_qa")]
        q_a: f64,
        #[serde(default = "d_t0")]
        t0: f64,
        #[serde(default = "d_da_maxfev")]
        maxfev: usize,
        #[serde(default = "d_true")]
        local_polish: bool,
    },
}

impl OptimizerSpec {
    pub fn cobyla() -> Self {
        OptimizerSpec::Cobyla {
            rho_beg: DEFAULT_COBYLA_RHO_BEG,
            rho_end: DEFAULT_COBYLA_RHO_END,
            maxfev: DEFAULT_COBYLA_MAXFEV,
        }
    }

    pub fn powell() -> Self {
        OptimizerSpec::Powell {
            xtol: DEFAULT_POWELL_XTOL,
            ftol: DEFAULT_POWELL_FTOL,
            maxfev: DEFAULT_POWELL_MAXFEV,
        }
    }

    pub fn dual_annealing() -> Self {
        OptimizerSpec::DualAnnealing {
            q_v: DEFAULT_DA_QV,
            q_a: DEFAULT_DA_QA,
            t0: DEFAULT_DA_T0,
            maxfev: DEFAULT_DA_MAXFEV,
            local_polish: true,
        }
    }

    /// COBYLA, Powell, dual annealing with default hyperparameters.
    pub fn standard_set() -> Vec<Self> {
        vec![Self::cobyla(), Self::powell(), Self::dual_annealing()]
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerSpec::Cobyla { .. } => "cobyla",
            OptimizerSpec::Powell { .. } => "powell",
            OptimizerSpec::DualAnnealing { .. } => "dual_annealing",
        }
    }

    pub fn maxfev(&self) -> usize {
        match self {
            OptimizerSpec::Cobyla { maxfev, .. }
            | OptimizerSpec::Powell { maxfev, .. }
            | OptimizerSpec::DualAnnealing { maxfev, .. } => *maxfev,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OptimizerSpec::Cobyla { rho_beg, rho_end, .. } => {
                if !(0.0 < rho_end && rho_end < rho_beg) {
                    return Err(Error::config("cobyla needs 0 < rho_end < rho_beg"));
                }
            }
            OptimizerSpec::Powell { xtol, ftol, .. } => {
                if !(xtol > 0.0 && ftol > 0.0) {
                    return Err(Error::config("powell needs positive xtol and ftol"));
                }
            }
            OptimizerSpec::DualAnnealing { q_v, q_a, t0, .. } => {
                if !(1.0 < q_v && q_v < 3.0) {
                    return Err(Error::config("dual annealing needs 1 < q_v < 3"));
                }
                if !(q_a < 1.0) {
                    return Err(Error::config("dual annealing needs q_a < 1"));
                }
                if !(t0 > 0.0) {
                    return Err(Error::config("dual annealing needs t0 > 0"));
                }
            }
        }
        Ok(())
    }

    /// Run on `obj` from `x0`; `seed` only matters for dual annealing.
    pub fn run(&self, obj: &mut Objective, x0: &[f64], seed: u64) -> Result<OptResult> {
        self.validate()?;
        match *self {
            OptimizerSpec::Cobyla {
                rho_beg,
                rho_end,
                maxfev,
            } => minimize_cobyla(obj, x0, rho_beg, rho_end, maxfev),
            OptimizerSpec::Powell { xtol, ftol, maxfev } => minimize_powell(obj, x0, xtol, ftol, maxfev),
            OptimizerSpec::DualAnnealing {
                q_v,
                q_a,
                t0,
                maxfev,
                local_polish,
            } => minimize_dual_annealing(obj, Some(x0), seed, maxfev, q_v, q_a, t0, local_polish),
        }
    }
}
