//! Power allocation under a stage-1 reliability cap.
//!
//! Minimizes the stage-2 union bound over `α1` subject to
//! `per_stage1(α1) <= ε`. The objective is not assumed convex: a dense grid
//! scan locates candidate basins, each of which is refined by golden-section
//! search, and basins that touch the constraint boundary are also polished by
//! bisection onto the boundary.

use rayon::prelude::*;

use crate::analytic::{per_stage1, per_stage2_bound};
use crate::error::{config, Result};
use crate::model::SystemConfig;

/// Distance kept from the endpoints `α1 ∈ {0, 1}`.
pub const ALPHA_MARGIN: f64 = 1e-4;
/// Intervals in the global scan.
pub const GRID_INTERVALS: usize = 2000;
/// Grid basins refined locally, best first.
const REFINED_BASINS: usize = 4;
const BOUNDARY_BISECTIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptProblem {
    /// Everything but `α1`, which is the decision variable.
    pub base_cfg: SystemConfig,
    /// Cap on the stage-1 PER, in (0, 1]. `1` makes the constraint vacuous.
    pub epsilon: f64,
    /// Final bracket width of the local refinement, in (0, 0.1].
    pub search_tolerance: f64,
}

impl OptProblem {
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;

    pub fn new(base_cfg: SystemConfig, epsilon: f64) -> Result<Self> {
        Self::with_tolerance(base_cfg, epsilon, Self::DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(base_cfg: SystemConfig, epsilon: f64, search_tolerance: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(config(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if !(search_tolerance > 0.0 && search_tolerance <= 0.1) {
            return Err(config(format!("search_tolerance must lie in (0, 0.1], got {search_tolerance}")));
        }
        Ok(Self { base_cfg, epsilon, search_tolerance })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub alpha_star: f64,
    /// Union bound on the stage-2 PER at `alpha_star`, clamped to [0, 1].
    pub objective: f64,
    /// Stage-1 PER at `alpha_star`.
    pub constraint_value: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    alpha: f64,
    per1: f64,
    bound: f64,
}

struct Evaluator<'a> {
    problem: &'a OptProblem,
}

impl Evaluator<'_> {
    fn eval(&self, alpha: f64) -> Point {
        let cfg = self
            .problem
            .base_cfg
            .with_alpha1(alpha)
            .expect("alpha inside the search interval is always valid");
        let bound = per_stage2_bound(&cfg);
        Point { alpha, per1: per_stage1(&cfg).total, bound: bound.raw }
    }

    fn feasible(&self, p: &Point) -> bool {
        p.per1 <= self.problem.epsilon
    }

    /// Objective with infeasible points mapped to +inf.
    fn penalized(&self, p: &Point) -> f64 {
        if self.feasible(p) {
            p.bound
        } else {
            f64::INFINITY
        }
    }
}

fn grid_alpha(i: usize) -> f64 {
    ALPHA_MARGIN + (1.0 - 2.0 * ALPHA_MARGIN) * i as f64 / GRID_INTERVALS as f64
}

/// Golden-section search of `f` on `[lo, hi]` down to a bracket of width
/// `tol`, returning every point evaluated.
fn golden_section(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> (f64, Point)) -> Vec<Point> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut seen = Vec::new();
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, p1) = f(x1);
    let (mut f2, p2) = f(x2);
    seen.extend([p1, p2]);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            let (v, p) = f(x1);
            f1 = v;
            seen.push(p);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            let (v, p) = f(x2);
            f2 = v;
            seen.push(p);
        }
    }
    seen
}

/// Bisects between an infeasible and a feasible point and returns the
/// feasible end of the final bracket.
fn polish_boundary(ev: &Evaluator, infeasible: f64, feasible: Point) -> Point {
    let mut bad = infeasible;
    let mut good = feasible;
    for _ in 0..BOUNDARY_BISECTIONS {
        let mid = 0.5 * (bad + good.alpha);
        if mid == bad || mid == good.alpha {
            break;
        }
        let p = ev.eval(mid);
        if ev.feasible(&p) {
            good = p;
        } else {
            bad = mid;
        }
    }
    good
}

fn better(a: &Point, b: &Point) -> bool {
    a.bound < b.bound || (a.bound == b.bound && a.alpha < b.alpha)
}

/// Solves the constrained power-allocation problem.
///
/// When no grid point meets the cap the result is flagged infeasible and
/// `alpha_star` minimizes the stage-1 PER instead.
pub fn solve_p1(problem: &OptProblem) -> OptResult {
    let ev = Evaluator { problem };
    let grid: Vec<Point> = (0..=GRID_INTERVALS).into_par_iter().map(|i| ev.eval(grid_alpha(i))).collect();
    let tol = 0.5 * problem.search_tolerance;
    let bracket = |i: usize| (grid[i.saturating_sub(1)].alpha, grid[(i + 1).min(GRID_INTERVALS)].alpha);

    if !grid.iter().any(|p| ev.feasible(p)) {
        let (i, _) = grid
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.per1.total_cmp(&b.1.per1))
            .expect("grid is non-empty");
        let (lo, hi) = bracket(i);
        let best = golden_section(lo, hi, tol, |a| {
            let p = ev.eval(a);
            (p.per1, p)
        })
        .into_iter()
        .chain([grid[i]])
        .min_by(|a, b| a.per1.total_cmp(&b.per1))
        .expect("at least one point");
        return finish(best, false);
    }

    let value = |i: usize| ev.penalized(&grid[i]);
    let mut basins: Vec<usize> = (0..=GRID_INTERVALS)
        .filter(|&i| {
            let v = value(i);
            v.is_finite()
                && (i == 0 || v <= value(i - 1))
                && (i == GRID_INTERVALS || v <= value(i + 1))
        })
        .collect();
    basins.sort_by(|&a, &b| value(a).total_cmp(&value(b)));
    basins.truncate(REFINED_BASINS);

    let refined: Vec<Point> = basins
        .par_iter()
        .flat_map_iter(|&i| {
            let (lo, hi) = bracket(i);
            let mut pts = golden_section(lo, hi, tol, |a| {
                let p = ev.eval(a);
                (ev.penalized(&p), p)
            });
            pts.push(grid[i]);
            for j in [i.wrapping_sub(1), i + 1] {
                if j <= GRID_INTERVALS && !ev.feasible(&grid[j]) {
                    pts.push(polish_boundary(&ev, grid[j].alpha, grid[i]));
                }
            }
            pts
        })
        .collect();

    let best = refined
        .into_iter()
        .filter(|p| ev.feasible(p))
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("every basin contributes its feasible grid point");
    finish(best, true)
}

fn finish(p: Point, feasible: bool) -> OptResult {
    OptResult {
        alpha_star: p.alpha,
        objective: p.bound.clamp(0.0, 1.0),
        constraint_value: p.per1,
        feasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MobilityProfile;

    fn base(n: u32, snr: f64, gth: f64) -> SystemConfig {
        let m = MobilityProfile::from_doppler(162.0).unwrap();
        SystemConfig::new(n, 0.5, snr, gth, 1e-3, m, m).unwrap()
    }

    #[test]
    fn problem_validation() {
        let c = base(2, 1000.0, 1.0);
        assert!(OptProblem::new(c, 0.0).is_err());
        assert!(OptProblem::new(c, 1.5).is_err());
        assert!(OptProblem::new(c, 1.0).is_ok());
        assert!(OptProblem::with_tolerance(c, 0.1, 0.2).is_err());
        assert!(OptProblem::with_tolerance(c, 0.1, 0.0).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let dummy = Point { alpha: 0.0, per1: 0.0, bound: 0.0 };
        let pts = golden_section(0.0, 1.0, 1e-8, |x| ((x - 0.3141).powi(2), Point { alpha: x, ..dummy }));
        let best = pts.iter().min_by(|a, b| (a.alpha - 0.3141).abs().total_cmp(&(b.alpha - 0.3141).abs())).unwrap();
        assert!((best.alpha - 0.3141).abs() < 1e-8);
    }

    #[test]
    fn vacuous_cap_matches_unconstrained_scan() {
        let p = OptProblem::new(base(2, 1000.0, 1.0), 1.0).unwrap();
        let r = solve_p1(&p);
        assert!(r.feasible);
        let ev = Evaluator { problem: &p };
        let grid_best = (0..=GRID_INTERVALS)
            .map(|i| ev.eval(grid_alpha(i)))
            .min_by(|a, b| a.bound.total_cmp(&b.bound))
            .unwrap();
        assert!(r.objective <= grid_best.bound.min(1.0));
        assert!((r.alpha_star - grid_best.alpha).abs() <= 1.0 / GRID_INTERVALS as f64);
    }

    #[test]
    fn unreachable_cap_is_infeasible() {
        let p = OptProblem::new(base(1, 10.0, 5.0), 1e-9).unwrap();
        let r = solve_p1(&p);
        assert!(!r.feasible);
        assert!(r.constraint_value > 1e-9);
    }

    #[test]
    fn binding_cap_lands_on_boundary() {
        let c = base(2, 1000.0, 1.0);
        let free = solve_p1(&OptProblem::new(c, 1.0).unwrap());
        // Tighten the cap just below the stage-1 PER at the free optimum.
        let eps = free.constraint_value * 0.5;
        let r = solve_p1(&OptProblem::new(c, eps).unwrap());
        assert!(r.feasible);
        assert!(r.constraint_value <= eps);
        assert!(r.constraint_value > eps * 0.999, "{} vs {eps}", r.constraint_value);
        assert!(r.objective >= free.objective);
    }
}
