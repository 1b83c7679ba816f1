//! Derivative-free minimization by linear approximations on a simplex, in
//! the style of Powell's COBYLA restricted to the unconstrained case.
//!
//! The simplex holds `n + 1` points. Each iteration interpolates a linear
//! model through them and either steps a distance `rho` down the model
//! gradient from the best vertex, or repairs a degenerate simplex. `rho`
//! halves whenever a step fails on an acceptable simplex and the search ends
//! when it would drop below `rho_end` or the evaluation budget runs out.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CobylaOptions {
    pub rho_begin: f64,
    pub rho_end: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    /// Objective value of every evaluation, in order.
    pub trace: Vec<f64>,
}

// acceptability thresholds, as multiples of rho
const FACE_MIN: f64 = 0.25;
const EDGE_MAX: f64 = 2.1;
// length of a geometry-repair step, as a multiple of rho
const REPAIR: f64 = 0.5;
// ratio of actual to predicted decrease below which a step counts as failed
const POOR: f64 = 0.1;

struct Search<'a, F> {
    f: &'a mut F,
    budget: usize,
    trace: Vec<f64>,
    best: (Vec<f64>, f64),
}

impl<F: FnMut(&[f64]) -> Result<f64>> Search<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.trace.len() >= self.budget {
            return Ok(None);
        }
        let v = (self.f)(x)?;
        self.trace.push(v);
        // NaN never replaces a finite best
        if v < self.best.1 || self.best.1.is_nan() {
            self.best = (x.to_vec(), v);
        }
        Ok(Some(v))
    }
}

pub fn minimize<F>(mut f: F, x0: &[f64], opts: &CobylaOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut s = Search {
        f: &mut f,
        budget: opts.max_evals.max(1),
        trace: Vec::new(),
        best: (x0.to_vec(), f64::NAN),
    };
    let finish = |s: Search<'_, F>| Minimum {
        x: s.best.0,
        f: s.best.1,
        evaluations: s.trace.len(),
        trace: s.trace,
    };

    let mut rho = opts.rho_begin;
    let rho_end = opts.rho_end.min(rho);
    let Some(f0) = s.eval(x0)? else {
        return Ok(finish(s));
    };
    if n == 0 {
        return Ok(finish(s));
    }
    let mut pts = vec![x0.to_vec()];
    let mut vals = vec![f0];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += rho;
        let Some(v) = s.eval(&x)? else {
            return Ok(finish(s));
        };
        pts.push(x);
        vals.push(v);
    }

    let mut poor_step = false;
    loop {
        let p = argmin(&vals);
        let others: Vec<usize> = (0..=n).filter(|&j| j != p).collect();
        // rows of `edges` are vertex offsets from the pivot
        let edges: Vec<Vec<f64>> = others
            .iter()
            .map(|&j| pts[j].iter().zip(&pts[p]).map(|(a, b)| a - b).collect())
            .collect();
        let Some(inv) = invert(&edges) else {
            // collapsed simplex: rebuild around the pivot
            let base = pts[p].clone();
            let fb = vals[p];
            pts = vec![base.clone()];
            vals = vec![fb];
            for i in 0..n {
                let mut x = base.clone();
                x[i] += rho;
                let Some(v) = s.eval(&x)? else {
                    return Ok(finish(s));
                };
                pts.push(x);
                vals.push(v);
            }
            continue;
        };
        // model gradient: edges * g = df, so g = inv * df
        let df: Vec<f64> = others.iter().map(|&j| vals[j] - vals[p]).collect();
        let g: Vec<f64> = (0..n).map(|r| (0..n).map(|c| inv[r][c] * df[c]).sum()).collect();
        // column c of inv is normal to the face opposite vertex others[c]
        let col_norm = |c: usize| math::sqrt((0..n).map(|r| inv[r][c] * inv[r][c]).sum());

        let mut worst = None;
        let mut worst_len = EDGE_MAX * rho;
        for (c, e) in edges.iter().enumerate() {
            let len = norm(e);
            if len > worst_len {
                worst_len = len;
                worst = Some(c);
            }
        }
        if worst.is_none() {
            let mut min_face = FACE_MIN * rho;
            for c in 0..n {
                let face = 1.0 / col_norm(c);
                if face < min_face {
                    min_face = face;
                    worst = Some(c);
                }
            }
        }

        if let Some(c) = worst {
            let cn = col_norm(c);
            let mut dir: Vec<f64> = (0..n).map(|r| inv[r][c] / cn).collect();
            if dot(&dir, &g) > 0.0 {
                dir.iter_mut().for_each(|v| *v = -*v);
            }
            let x: Vec<f64> = pts[p].iter().zip(&dir).map(|(a, d)| a + REPAIR * rho * d).collect();
            let Some(v) = s.eval(&x)? else {
                return Ok(finish(s));
            };
            let j = others[c];
            pts[j] = x;
            vals[j] = v;
            continue;
        }

        // a poor step only shrinks rho once the simplex is acceptable again
        if poor_step {
            poor_step = false;
            if rho <= rho_end {
                return Ok(finish(s));
            }
            rho = if rho * 0.5 <= 1.5 * rho_end { rho_end } else { rho * 0.5 };
            continue;
        }

        let gn = norm(&g);
        poor_step = gn == 0.0 || !gn.is_finite();
        if !poor_step {
            let d: Vec<f64> = g.iter().map(|v| -rho * v / gn).collect();
            let x: Vec<f64> = pts[p].iter().zip(&d).map(|(a, b)| a + b).collect();
            let Some(v) = s.eval(&x)? else {
                return Ok(finish(s));
            };
            let predicted = rho * gn;
            poor_step = !((vals[p] - v) >= POOR * predicted);
            // swap out the vertex whose removal keeps the most volume
            let mut pick = 0;
            let mut score = f64::NEG_INFINITY;
            for c in 0..n {
                let sigma = (0..n).map(|k| inv[k][c]).zip(&d).map(|(a, b)| a * b).sum::<f64>().abs();
                let far = (norm(&edges[c]) / rho).max(1.0);
                if sigma * far > score {
                    score = sigma * far;
                    pick = c;
                }
            }
            let j = others[pick];
            pts[j] = x;
            vals[j] = v;
        }
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] || v[best].is_nan() {
            best = i;
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Gauss-Jordan inverse with partial pivoting. `None` for a numerically
/// singular matrix.
fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..n {
            if r != col {
                let factor = a[r][col];
                if factor != 0.0 {
                    for k in 0..n {
                        a[r][k] -= factor * a[col][k];
                        inv[r][k] -= factor * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(max_evals: usize) -> CobylaOptions {
        CobylaOptions {
            rho_begin: 0.5,
            rho_end: 1e-6,
            max_evals,
        }
    }

    #[test]
    fn inverse_of_small_matrix() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let inv = invert(&m).unwrap();
        let expect = [[0.6, -0.2], [-0.2, 0.4]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((inv[r][c] - expect[r][c]).abs() < 1e-12);
            }
        }
        assert!(invert(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }

    #[test]
    fn minimizes_a_shifted_quadratic() {
        let target = [1.0, -2.0, 0.5, 3.0];
        let r = minimize(
            |x| Ok(x.iter().zip(&target).enumerate().map(|(i, (a, b))| (i + 1) as f64 * (a - b) * (a - b)).sum()),
            &[0.0; 4],
            &opts(2000),
        )
        .unwrap();
        for (a, b) in r.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-4, "{:?}", r.x);
        }
        assert_eq!(r.trace.len(), r.evaluations);
    }

    #[test]
    fn makes_progress_on_rosenbrock() {
        let r = minimize(
            |x| {
                let (a, b) = (1.0 - x[0], x[1] - x[0] * x[0]);
                Ok(a * a + 100.0 * b * b)
            },
            &[-1.2, 1.0],
            &opts(4000),
        )
        .unwrap();
        // starts at 24.2; linear-model methods crawl along the valley
        assert!(r.f < 0.5, "f = {} after {}", r.f, r.evaluations);
    }

    #[test]
    fn respects_budget_and_reports_best_seen() {
        let mut calls = 0;
        let r = minimize(
            |x| {
                calls += 1;
                Ok(math::cos(3.0 * x[0]) + x[1] * x[1])
            },
            &[0.3, 0.7],
            &opts(25),
        )
        .unwrap();
        assert_eq!(calls, 25);
        assert_eq!(r.evaluations, 25);
        let min = r.trace.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(r.f, min);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| Ok(math::sin(x[0]) * math::cos(x[1]) + 0.1 * x[2] * x[2]);
        let a = minimize(f, &[0.1, 0.2, 0.3], &opts(300)).unwrap();
        let b = minimize(f, &[0.1, 0.2, 0.3], &opts(300)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stops_at_rho_end() {
        let r = minimize(
            |x| Ok(x[0].abs()),
            &[0.0],
            &CobylaOptions {
                rho_begin: 0.6,
                rho_end: 1e-3,
                max_evals: 10_000,
            },
        )
        .unwrap();
        assert!(r.evaluations < 100);
        assert_eq!(r.f, 0.0);
    }
}
