//! Dual annealing: generalized simulated annealing with a Tsallis visiting
//! distribution, local searches on improvement, and restarts when the
//! temperature has decayed.

use statrs::function::gamma::ln_gamma;

use super::{finish, minimize_powell, Budget, Objective, OptResult, Step};
use crate::error::{Error, Result};
use crate::rng::RngStream;

const MAXITER: usize = 1000;
const RESTART_TEMPERATURE_RATIO: f64 = 2e-5;
const TAIL_LIMIT: f64 = 1e8;
const MIN_VISIT_BOUND: f64 = 1e-10;
const NOT_IMPROVED_MAX: usize = 1000;
const LOCAL_XTOL: f64 = 1e-4;
const LOCAL_FTOL: f64 = 1e-4;

/// Minimize over the objective's bounds. `x0` seeds the first state; without
/// it the start is drawn uniformly from the box. With `local_polish` a Powell
/// search runs from every new best point found by a Markov chain and once
/// more on the final incumbent, all inside the same `maxfev` budget.
#[allow(clippy::too_many_arguments)]
pub fn minimize_dual_annealing(
    obj: &mut Objective,
    x0: Option<&[f64]>,
    seed: u64,
    maxfev: usize,
    q_v: f64,
    q_a: f64,
    t0: f64,
    local_polish: bool,
) -> Result<OptResult> {
    if let Some(x0) = x0 {
        super::check_start(obj, x0)?;
    }
    if !(1.0 < q_v && q_v < 3.0) {
        return Err(Error::config(format!("q_v must lie in (1, 3), got {q_v}")));
    }
    if !(q_a < 1.0) || !(t0 > 0.0) {
        return Err(Error::config(format!("need q_a < 1 and t0 > 0, got {q_a} and {t0}")));
    }
    let budget = Budget::new(obj, maxfev)?;
    let mut da = Annealer {
        visit: Visiting::new(q_v),
        q_a,
        t0,
        rng: RngStream::new(seed),
        local_polish,
        lower: obj.bounds().iter().map(|b| b.0).collect(),
        range: obj.bounds().iter().map(|b| b.1 - b.0).collect(),
    };
    let mut iterations = 0;
    let outcome = da.run(obj, &budget, x0, &mut iterations);
    let outcome = match outcome {
        Ok(()) if local_polish => da.polish(obj, &budget),
        other => other,
    };
    finish(obj, &budget, outcome, iterations)
}

/// Tsallis (q_v) visiting distribution.
struct Visiting {
    q_v: f64,
    factor4_p: f64,
    factor6: f64,
}

impl Visiting {
    fn new(q_v: f64) -> Self {
        let factor2 = ((4.0 - q_v) * (q_v - 1.0).ln()).exp();
        let factor3 = ((2.0 - q_v) * 2f64.ln() / (q_v - 1.0)).exp();
        let factor4_p = std::f64::consts::PI.sqrt() * factor2 / (factor3 * (3.0 - q_v));
        let factor5 = 1.0 / (q_v - 1.0) - 0.5;
        let d1 = 2.0 - factor5;
        let pi = std::f64::consts::PI;
        let factor6 = pi * (1.0 - factor5) / (pi * (1.0 - factor5)).sin() / ln_gamma(d1).exp();
        Self {
            q_v,
            factor4_p,
            factor6,
        }
    }

    /// One heavy-tailed step length at `temperature`.
    fn sample(&self, temperature: f64, rng: &mut RngStream) -> f64 {
        let (x, y) = (rng.standard_normal(), rng.standard_normal());
        let q = self.q_v;
        let factor1 = (temperature.ln() / (q - 1.0)).exp();
        let factor4 = self.factor4_p * factor1;
        let x = x * (-(q - 1.0) * (self.factor6 / factor4).ln() / (3.0 - q)).exp();
        let den = ((q - 1.0) * y.abs().ln() / (3.0 - q)).exp();
        x / den
    }
}

struct State {
    x: Vec<f64>,
    e: f64,
}

struct Annealer {
    visit: Visiting,
    q_a: f64,
    t0: f64,
    rng: RngStream,
    local_polish: bool,
    lower: Vec<f64>,
    range: Vec<f64>,
}

impl Annealer {
    fn random_point(&mut self) -> Vec<f64> {
        (0..self.lower.len())
            .map(|i| self.lower[i] + self.range[i] * self.rng.uniform())
            .collect()
    }

    /// Wrap coordinate `i` back into its interval.
    fn wrap(&self, i: usize, v: f64) -> f64 {
        if self.range[i] == 0.0 {
            return self.lower[i];
        }
        let a = v - self.lower[i];
        let b = a % self.range[i] + self.range[i];
        let mut w = b % self.range[i] + self.lower[i];
        if (w - self.lower[i]).abs() < MIN_VISIT_BOUND {
            w += MIN_VISIT_BOUND;
        }
        w.clamp(self.lower[i], self.lower[i] + self.range[i])
    }

    fn truncate(&mut self, v: f64) -> f64 {
        if v > TAIL_LIMIT {
            TAIL_LIMIT * self.rng.uniform()
        } else if v < -TAIL_LIMIT {
            -TAIL_LIMIT * self.rng.uniform()
        } else {
            v
        }
    }

    /// Candidate for chain step `j`: all coordinates for `j < dim`, else only
    /// coordinate `j − dim`.
    fn visiting(&mut self, x: &[f64], j: usize, temperature: f64) -> Vec<f64> {
        let dim = x.len();
        let mut out = x.to_vec();
        if j < dim {
            let visits: Vec<f64> = (0..dim)
                .map(|_| self.visit.sample(temperature, &mut self.rng))
                .collect();
            let (upper, lower) = (self.rng.uniform(), self.rng.uniform());
            for (i, v) in visits.into_iter().enumerate() {
                let v = if v > TAIL_LIMIT {
                    TAIL_LIMIT * upper
                } else if v < -TAIL_LIMIT {
                    -TAIL_LIMIT * lower
                } else {
                    v
                };
                out[i] = self.wrap(i, x[i] + v);
            }
        } else {
            let i = j - dim;
            let v = self.visit.sample(temperature, &mut self.rng);
            let v = self.truncate(v);
            out[i] = self.wrap(i, x[i] + v);
        }
        out
    }

    fn reset(&mut self, obj: &mut Objective, budget: &Budget, x0: Option<&[f64]>) -> Step<State> {
        let x = match x0 {
            Some(x0) => x0.to_vec(),
            None => self.random_point(),
        };
        let e = budget.eval(obj, &x)?;
        Ok(State { x, e })
    }

    fn local_search(&mut self, obj: &mut Objective, budget: &Budget, from: &[f64]) -> Step<Option<State>> {
        let remaining = budget.remaining(obj);
        if remaining < obj.arity() + 2 {
            return Err(super::Halt::Budget);
        }
        let r = minimize_powell(obj, from, LOCAL_XTOL, LOCAL_FTOL, remaining)?;
        let found = Some(State {
            x: r.best_x,
            e: r.best_value,
        });
        match r.termination {
            super::Termination::BudgetExhausted => Err(super::Halt::Budget),
            super::Termination::Converged => Ok(found),
        }
    }

    fn polish(&mut self, obj: &mut Objective, budget: &Budget) -> Step<()> {
        let Some((x, _)) = obj.incumbent() else { return Ok(()) };
        let x = x.to_vec();
        if budget.remaining(obj) < obj.arity() + 2 {
            return Ok(());
        }
        self.local_search(obj, budget, &x).map(|_| ())
    }

    fn run(&mut self, obj: &mut Objective, budget: &Budget, x0: Option<&[f64]>, iterations: &mut usize) -> Step<()> {
        let dim = obj.arity();
        let mut current = self.reset(obj, budget, x0)?;
        let mut best = State {
            x: current.x.clone(),
            e: current.e,
        };
        let t1 = ((self.visit.q_v - 1.0) * 2f64.ln()).exp() - 1.0;
        let mut not_improved = 0usize;
        let mut total_iter = 0usize;
        loop {
            let mut restarted = false;
            for i in 0..MAXITER {
                let s = i as f64 + 2.0;
                let t2 = ((self.visit.q_v - 1.0) * s.ln()).exp() - 1.0;
                let temperature = self.t0 * t1 / t2;
                if total_iter >= MAXITER {
                    return Ok(());
                }
                total_iter += 1;
                *iterations = total_iter;
                if temperature < RESTART_TEMPERATURE_RATIO * self.t0 {
                    current = self.reset(obj, budget, None)?;
                    restarted = true;
                    break;
                }
                let temperature_step = temperature / (i as f64 + 1.0);
                let mut improved = total_iter == 1;
                for j in 0..2 * dim {
                    let cand = self.visiting(&current.x, j, temperature);
                    let e = budget.eval(obj, &cand)?;
                    if e < current.e {
                        current = State { x: cand, e };
                        if e < best.e {
                            best = State {
                                x: current.x.clone(),
                                e,
                            };
                            improved = true;
                            not_improved = 0;
                        }
                    } else {
                        let r = self.rng.uniform();
                        let p = 1.0 - (1.0 - self.q_a) * (e - current.e) / temperature_step;
                        let accept = if p <= 0.0 {
                            0.0
                        } else {
                            (p.ln() / (1.0 - self.q_a)).exp()
                        };
                        if r <= accept {
                            current = State { x: cand, e };
                        }
                    }
                    not_improved += 1;
                }
                if !self.local_polish {
                    continue;
                }
                if improved {
                    if let Some(found) = self.local_search(obj, budget, &best.x.clone())? {
                        if found.e < best.e {
                            not_improved = 0;
                            best = State {
                                x: found.x.clone(),
                                e: found.e,
                            };
                            current = found;
                        }
                    }
                }
                if not_improved >= NOT_IMPROVED_MAX {
                    not_improved = 0;
                    if let Some(found) = self.local_search(obj, budget, &current.x.clone())? {
                        if found.e < best.e {
                            best = State {
                                x: found.x.clone(),
                                e: found.e,
                            };
                        }
                        current = found;
                    }
                }
            }
            if !restarted {
                return Ok(());
            }
        }
    }
}
