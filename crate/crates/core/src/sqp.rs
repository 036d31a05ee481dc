//! Box-constrained quasi-Newton minimizer.
//!
//! Projected BFGS on the inverse Hessian with an active set: variables pinned at a bound
//! with the gradient pushing outward are frozen for the step, the search direction is
//! built on the free variables, and every trial point is projected back into the box
//! before the objective sees it. Backtracking enforces the Armijo condition and a
//! non-increasing objective. Without curvature information (first step, or after a
//! reset) a fully accepted step is doubled while the objective keeps falling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::JointLimit;

pub const DEFAULT_MAX_ITERS: usize = 200;

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;
const MAX_EXPANSIONS: usize = 30;
const STALL_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptStatus {
    ToleranceReached,
    Stalled,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Accepted steps.
    pub iterations: usize,
    pub status: OptStatus,
    pub evaluations: usize,
    /// Objective at the start point and after every accepted step.
    pub history: Vec<f64>,
}

/// Objective with analytic gradient over a box.
pub struct OptProblem<'a> {
    pub x0: Vec<f64>,
    pub bounds: Vec<JointLimit>,
    pub objective: &'a dyn Fn(&[f64], &mut [f64]) -> f64,
}

struct Evaluator<'a> {
    objective: &'a dyn Fn(&[f64], &mut [f64]) -> f64,
    count: usize,
}

impl Evaluator<'_> {
    fn eval(&mut self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let mut g = DVector::zeros(x.len());
        let f = (self.objective)(x.as_slice(), g.as_mut_slice());
        self.count += 1;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObjective {
                x: x.as_slice().to_vec(),
            });
        }
        Ok((f, g))
    }
}

fn project(x: &mut DVector<f64>, bounds: &[JointLimit]) {
    for (v, b) in x.iter_mut().zip(bounds) {
        *v = v.clamp(b.lo, b.hi);
    }
}

enum Trial {
    Accepted(DVector<f64>, f64, DVector<f64>),
    Rejected,
    /// The projected step is zero.
    NoMove,
}

fn try_step(
    ev: &mut Evaluator<'_>,
    x: &DVector<f64>,
    f: f64,
    g: &DVector<f64>,
    d: &DVector<f64>,
    t: f64,
    bounds: &[JointLimit],
) -> Result<Trial> {
    let mut xt = x + d * t;
    project(&mut xt, bounds);
    let step = &xt - x;
    if step.amax() == 0.0 {
        return Ok(Trial::NoMove);
    }
    let (ft, gt) = ev.eval(&xt)?;
    Ok(if ft <= f + ARMIJO_C * g.dot(&step) && ft <= f {
        Trial::Accepted(xt, ft, gt)
    } else {
        Trial::Rejected
    })
}

fn active_set(x: &DVector<f64>, g: &DVector<f64>, bounds: &[JointLimit]) -> Vec<bool> {
    x.iter()
        .zip(g.iter())
        .zip(bounds)
        .map(|((&xi, &gi), b)| (xi <= b.lo && gi > 0.0) || (xi >= b.hi && gi < 0.0))
        .collect()
}

/// Minimizes the problem until `f ≤ stop_value`, a stall, or `max_iters` accepted steps.
///
/// Returns an error when the objective or its gradient is non-finite at an evaluated
/// point, or when `x0` lies outside the box.
pub fn minimize(problem: &OptProblem<'_>, stop_value: f64, max_iters: usize) -> Result<OptResult> {
    let n = problem.x0.len();
    if problem.bounds.len() != n {
        return Err(Error::InvalidInput(format!(
            "optimizer has {n} variables but {} bounds",
            problem.bounds.len()
        )));
    }
    if !(stop_value > 0.0) {
        return Err(Error::InvalidInput(format!(
            "stop value must be positive, got {stop_value}"
        )));
    }
    if !problem.x0.iter().zip(&problem.bounds).all(|(x, b)| b.contains(*x)) {
        return Err(Error::InvalidInput(format!(
            "start point {:?} lies outside the bounds",
            problem.x0
        )));
    }

    let bounds = &problem.bounds;
    let mut ev = Evaluator {
        objective: problem.objective,
        count: 0,
    };
    let mut x = DVector::from_column_slice(&problem.x0);
    let (mut f, mut g) = ev.eval(&x)?;
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut scaled = false;
    let mut iterations = 0;

    let mut history = vec![f];

    let finish = |x: &DVector<f64>, f, iterations, status, evaluations, history| OptResult {
        x: x.as_slice().to_vec(),
        f,
        iterations,
        status,
        evaluations,
        history,
    };

    if f <= stop_value {
        return Ok(finish(&x, f, 0, OptStatus::ToleranceReached, ev.count, history));
    }

    loop {
        if iterations >= max_iters {
            return Ok(finish(&x, f, iterations, OptStatus::IterationCap, ev.count, history));
        }

        let active = active_set(&x, &g, bounds);
        let mut pg = g.clone();
        for (v, &a) in pg.iter_mut().zip(&active) {
            if a {
                *v = 0.0;
            }
        }
        if pg.norm() < STALL_NORM {
            return Ok(finish(&x, f, iterations, OptStatus::Stalled, ev.count, history));
        }

        // Quasi-Newton step restricted to the free variables.
        let mut h_free = h.clone();
        for (i, &a) in active.iter().enumerate() {
            if a {
                h_free.row_mut(i).fill(0.0);
                h_free.column_mut(i).fill(0.0);
            }
        }
        let mut d = -(&h_free * &pg);
        if g.dot(&d) >= 0.0 {
            h = DMatrix::identity(n, n);
            scaled = false;
            d = -pg.clone();
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            match try_step(&mut ev, &x, f, &g, &d, t, bounds)? {
                Trial::Accepted(xt, ft, gt) => {
                    accepted = Some((xt, ft, gt));
                    break;
                }
                Trial::Rejected => t *= SHRINK,
                Trial::NoMove => break,
            }
        }
        // Without curvature information the unit step has no natural scale; keep
        // doubling a fully accepted steepest-descent step while it still pays off.
        if !scaled && t == 1.0 {
            for _ in 0..MAX_EXPANSIONS {
                let Some((_, fa, _)) = &accepted else { break };
                t /= SHRINK;
                match try_step(&mut ev, &x, f, &g, &d, t, bounds)? {
                    Trial::Accepted(xt, ft, gt) if ft < *fa => accepted = Some((xt, ft, gt)),
                    _ => break,
                }
            }
        }
        let Some((xt, ft, gt)) = accepted else {
            return Ok(finish(&x, f, iterations, OptStatus::Stalled, ev.count, history));
        };

        let s = &xt - &x;
        let y = &gt - &g;
        x = xt;
        f = ft;
        g = gt;
        iterations += 1;
        history.push(f);

        if f <= stop_value {
            return Ok(finish(
                &x,
                f,
                iterations,
                OptStatus::ToleranceReached,
                ev.count,
                history,
            ));
        }
        if s.norm() < STALL_NORM {
            return Ok(finish(&x, f, iterations, OptStatus::Stalled, ev.count, history));
        }

        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
            if !scaled {
                h = DMatrix::identity(n, n) * (sy / y.dot(&y));
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H⁺ = H − ρ(H y sᵀ + s yᵀ H) + (ρ² yᵀHy + ρ) s sᵀ
            h -= (&hy * s.transpose() + &s * hy.transpose()) * rho;
            h += &s * s.transpose() * (rho * rho * yhy + rho);
        } else {
            h = DMatrix::identity(n, n);
            scaled = false;
        }
    }
}
