//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The search direction comes from the usual two-loop recursion over the last
//! `memory` curvature pairs. Step lengths are found by bracketing and cubic
//! interpolation (zoom), falling back to bisection when the interpolant is
//! degenerate or lands too close to a bracket end.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::objective::ObjectiveEval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchOptions {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Objective evaluations allowed per line search.
    pub max_steps: usize,
}

impl Default for LineSearchOptions {
    fn default() -> Self {
        Self { c1: 1e-4, c2: 0.9, max_steps: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimOptions {
    pub memory: usize,
    /// Stop when `|f_prev - f| / max(|f_prev|, |f|, 1) < ftol`.
    pub ftol: f64,
    /// Stop when the largest absolute gradient entry is below `gtol`.
    pub gtol: f64,
    pub max_iters: usize,
    pub line_search: LineSearchOptions,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self { memory: 10, ftol: 1e-8, gtol: 1e-8, max_iters: 10_000, line_search: LineSearchOptions::default() }
    }
}

impl OptimOptions {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        if !(0.0 < ls.c1 && ls.c1 < ls.c2 && ls.c2 < 1.0) {
            return arg_err(format!("line search needs 0 < c1 < c2 < 1, got c1={} c2={}", ls.c1, ls.c2));
        }
        if self.memory == 0 || ls.max_steps == 0 {
            return arg_err("memory and line-search steps must be at least 1");
        }
        if !(self.ftol >= 0.0) || !(self.gtol >= 0.0) {
            return arg_err("tolerances must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Ftol,
    Gtol,
    MaxIters,
    /// The line search exhausted its budget; the best point seen is returned.
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimReport {
    #[serde(skip)]
    pub x0: Vec<f64>,
    #[serde(skip)]
    pub x_final: Vec<f64>,
    pub f_initial: f64,
    pub f_final: f64,
    pub iterations: usize,
    pub converged_by: StopReason,
    pub function_evals: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Point {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    /// directional derivative along the search direction
    slope: f64,
}

struct Evaluator<'a, F> {
    objective: &'a mut F,
    evals: usize,
}

impl<F> Evaluator<'_, F>
where
    F: FnMut(&[f64]) -> Result<ObjectiveEval>,
{
    fn eval(&mut self, x: &[f64]) -> Result<ObjectiveEval> {
        self.evals += 1;
        (self.objective)(x)
    }

    fn eval_along(&mut self, x: &[f64], dir: &[f64], alpha: f64) -> Result<Point> {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + alpha * di).collect();
        let e = self.eval(&trial)?;
        let (f, slope) = if e.value.is_finite() && e.gradient.iter().all(|g| g.is_finite()) {
            (e.value, dot(&e.gradient, dir))
        } else {
            (f64::INFINITY, f64::NAN)
        };
        Ok(Point { alpha, f, g: e.gradient, slope })
    }
}

/// Minimizer of the cubic matching values and slopes at `a` and `b`, or the
/// midpoint when that is undefined or outside the safeguarded interval.
fn cubic_step(a: &Point, b: &Point) -> f64 {
    let (lo, hi) = if a.alpha < b.alpha { (a.alpha, b.alpha) } else { (b.alpha, a.alpha) };
    let width = hi - lo;
    let mid = 0.5 * (lo + hi);
    if !(a.f.is_finite() && b.f.is_finite() && a.slope.is_finite() && b.slope.is_finite()) {
        return mid;
    }
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    if t.is_finite() && t > lo + 0.1 * width && t < hi - 0.1 * width {
        t
    } else {
        mid
    }
}

enum Search {
    Found(Point),
    /// Budget exhausted; carries the best sufficient-decrease point, if any.
    Failed(Option<Point>),
}

fn strong_wolfe<F>(
    ev: &mut Evaluator<'_, F>,
    x: &[f64],
    dir: &[f64],
    f0: f64,
    slope0: f64,
    alpha0: f64,
    ls: &LineSearchOptions,
) -> Result<Search>
where
    F: FnMut(&[f64]) -> Result<ObjectiveEval>,
{
    let armijo = |p: &Point| p.f <= f0 + ls.c1 * p.alpha * slope0;
    let curvature = |p: &Point| p.slope.abs() <= -ls.c2 * slope0;
    let mut best: Option<Point> = None;
    let keep_best = |p: &Point, best: &mut Option<Point>| {
        if armijo(p) && p.f < best.as_ref().map_or(f0, |b| b.f) {
            *best = Some(Point { alpha: p.alpha, f: p.f, g: p.g.clone(), slope: p.slope });
        }
    };

    let mut steps = 0;
    let mut prev = Point { alpha: 0.0, f: f0, g: Vec::new(), slope: slope0 };
    let mut alpha = alpha0;
    let (mut lo, mut hi);
    loop {
        let p = ev.eval_along(x, dir, alpha)?;
        steps += 1;
        keep_best(&p, &mut best);
        if !armijo(&p) || (steps > 1 && p.f >= prev.f) {
            lo = prev;
            hi = p;
            break;
        }
        if curvature(&p) {
            return Ok(Search::Found(p));
        }
        if p.slope >= 0.0 {
            lo = p;
            hi = prev;
            break;
        }
        if steps >= ls.max_steps {
            return Ok(Search::Failed(best));
        }
        alpha = 2.0 * p.alpha;
        prev = p;
    }

    // zoom: lo satisfies sufficient decrease and has the lower value
    while steps < ls.max_steps {
        let alpha = cubic_step(&lo, &hi);
        if (hi.alpha - lo.alpha).abs() <= 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
        let p = ev.eval_along(x, dir, alpha)?;
        steps += 1;
        keep_best(&p, &mut best);
        if !armijo(&p) || p.f >= lo.f {
            hi = p;
        } else {
            if curvature(&p) {
                return Ok(Search::Found(p));
            }
            if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = p;
        }
    }
    Ok(Search::Failed(best))
}

/// Minimizes `objective` from `x0`.
///
/// Accepted iterates never increase the objective. Errors if the objective is
/// not finite at `x0` or if the objective itself returns an error.
pub fn minimize<F>(mut objective: F, x0: &[f64], opts: &OptimOptions) -> Result<OptimReport>
where
    F: FnMut(&[f64]) -> Result<ObjectiveEval>,
{
    opts.validate()?;
    let mut ev = Evaluator { objective: &mut objective, evals: 0 };
    let start = ev.eval(x0)?;
    if !start.value.is_finite() || start.gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("objective at x0 is {}", start.value)));
    }
    if start.gradient.len() != x0.len() {
        return Err(Error::Dimension(format!(
            "gradient has {} entries for {} parameters",
            start.gradient.len(),
            x0.len()
        )));
    }

    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = start.value;
    let mut g = start.gradient;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut reason = StopReason::MaxIters;
    let mut iterations = 0;

    if max_abs(&g) < opts.gtol {
        reason = StopReason::Gtol;
    } else {
        while iterations < opts.max_iters {
            // two-loop recursion
            let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
            let mut alphas = Vec::with_capacity(history.len());
            for (s, y, rho) in history.iter().rev() {
                let a = rho * dot(s, &q);
                for (qi, yi) in q.iter_mut().zip(y) {
                    *qi -= a * yi;
                }
                alphas.push(a);
            }
            if let Some((s, y, _)) = history.back() {
                let scale = dot(s, y) / dot(y, y);
                q.iter_mut().for_each(|v| *v *= scale);
            }
            for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &q);
                for (qi, si) in q.iter_mut().zip(s) {
                    *qi += (a - b) * si;
                }
            }
            let mut dir = q;
            let mut slope = dot(&g, &dir);
            if !(slope < 0.0) {
                history.clear();
                dir = g.iter().map(|v| -v).collect();
                slope = -dot(&g, &g);
            }
            let alpha0 = if history.is_empty() { (1.0 / norm(&dir)).min(1.0) } else { 1.0 };

            iterations += 1;
            let found = match strong_wolfe(&mut ev, &x, &dir, f, slope, alpha0, &opts.line_search)? {
                Search::Found(p) => Some((p, false)),
                Search::Failed(best) => best.map(|p| (p, true)),
            };
            let Some((p, failed)) = found else {
                reason = StopReason::LineSearchFailed;
                break;
            };

            let s: Vec<f64> = dir.iter().map(|d| p.alpha * d).collect();
            let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
            for (xi, si) in x.iter_mut().zip(&s) {
                *xi += si;
            }
            let f_prev = f;
            f = p.f;
            g = p.g;

            if failed {
                reason = StopReason::LineSearchFailed;
                break;
            }
            let sy = dot(&s, &y);
            if sy > 1e-10 * norm(&s) * norm(&y) {
                if history.len() == opts.memory {
                    history.pop_front();
                }
                history.push_back((s, y, 1.0 / sy));
            }
            if (f_prev - f).abs() / f_prev.abs().max(f.abs()).max(1.0) < opts.ftol {
                reason = StopReason::Ftol;
                break;
            }
            if max_abs(&g) < opts.gtol {
                reason = StopReason::Gtol;
                break;
            }
        }
    }
    debug_assert_eq!(x.len(), n);

    Ok(OptimReport {
        x0: x0.to_vec(),
        x_final: x,
        f_initial: start.value,
        f_final: f,
        iterations,
        converged_by: reason,
        function_evals: ev.evals,
    })
}
