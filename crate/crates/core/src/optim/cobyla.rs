//! COBYLA for box constraints: linear interpolation on an n+1 point simplex,
//! trust-region steps, and a trust radius shrinking from `rho_beg` to
//! `rho_end`.
//!
//! The bound constraints are linear, so their linear models are exact; the
//! trust-region subproblem minimizes the objective model over the ball
//! intersected with the box and every evaluated point is feasible.

use super::{check_start, finish, Budget, Objective, OptResult, Step};
use crate::error::{Error, Result};

const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

pub fn minimize_cobyla(
    obj: &mut Objective,
    x0: &[f64],
    rho_beg: f64,
    rho_end: f64,
    maxfev: usize,
) -> Result<OptResult> {
    check_start(obj, x0)?;
    if !(0.0 < rho_end && rho_end < rho_beg) {
        return Err(Error::config(format!(
            "cobyla needs 0 < rho_end < rho_beg, got {rho_end} and {rho_beg}"
        )));
    }
    if let Some(i) = obj.bounds().iter().position(|&(lo, hi)| lo == hi) {
        return Err(Error::config(format!("dimension {i} has zero width; mask it instead")));
    }
    let budget = Budget::new(obj, maxfev)?;
    let mut iterations = 0;
    let outcome = run(obj, &budget, x0, rho_beg, rho_end, &mut iterations);
    finish(obj, &budget, outcome, iterations)
}

struct Simplex {
    x: Vec<Vec<f64>>,
    f: Vec<f64>,
    best: usize,
}

/// Geometry of the simplex relative to its best vertex.
struct Frame {
    /// vertex index of each row
    others: Vec<usize>,
    /// rows of E^{-T}: barycentric coordinate r of y is w[r]·(y − x_best)
    w: Vec<Vec<f64>>,
    /// model gradient
    g: Vec<f64>,
    vsig: Vec<f64>,
    veta: Vec<f64>,
}

impl Simplex {
    fn frame(&self) -> Option<Frame> {
        let n = self.x.len() - 1;
        let xb = &self.x[self.best];
        let others: Vec<usize> = (0..=n).filter(|&j| j != self.best).collect();
        let e: Vec<Vec<f64>> = others
            .iter()
            .map(|&j| self.x[j].iter().zip(xb).map(|(a, b)| a - b).collect())
            .collect();
        let inv = invert(&e)?;
        let df: Vec<f64> = others.iter().map(|&j| self.f[j] - self.f[self.best]).collect();
        let g = (0..n).map(|i| (0..n).map(|r| inv[i][r] * df[r]).sum()).collect();
        let w: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|i| inv[i][r]).collect()).collect();
        let vsig = w.iter().map(|row| 1.0 / norm(row)).collect();
        let veta = e.iter().map(|row| norm(row)).collect();
        Some(Frame {
            others,
            w,
            g,
            vsig,
            veta,
        })
    }

    fn set(&mut self, j: usize, x: Vec<f64>, f: f64) {
        self.x[j] = x;
        self.f[j] = f;
        if f < self.f[self.best] {
            self.best = j;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gauss-Jordan inverse with partial pivoting; `None` if (nearly) singular.
fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if !(a[p][c].abs() > 1e-14 * scale) {
            return None;
        }
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..n {
            if r != c {
                let k = a[r][c];
                if k != 0.0 {
                    for j in 0..n {
                        a[r][j] -= k * a[c][j];
                        inv[r][j] -= k * inv[c][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// argmin g·d over ‖d‖ ≤ rho and x + d inside the box: d = clip(−t·g) for
/// the t at which the norm reaches rho, or the fully clipped step.
fn trust_step(obj: &Objective, x: &[f64], g: &[f64], rho: f64) -> Vec<f64> {
    let clip = |t: f64| -> Vec<f64> {
        x.iter()
            .zip(g)
            .zip(obj.bounds())
            .map(|((&xi, &gi), &(lo, hi))| (-t * gi).clamp(lo - xi, hi - xi))
            .collect()
    };
    let gn = norm(g);
    if !(gn > 0.0) {
        return vec![0.0; x.len()];
    }
    let full = clip(f64::INFINITY);
    if norm(&full) <= rho {
        return full;
    }
    let (mut lo, mut hi) = (0.0, rho / gn);
    while norm(&clip(hi)) < rho {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if norm(&clip(mid)) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    clip(lo)
}

fn initial_simplex(obj: &mut Objective, budget: &Budget, x0: &[f64], rho: f64) -> Step<Simplex> {
    let n = x0.len();
    let mut x = vec![x0.to_vec()];
    let mut f = vec![budget.eval(obj, x0)?];
    for i in 0..n {
        let (lo, hi) = obj.bounds()[i];
        let step = if x0[i] + rho <= hi {
            rho
        } else if x0[i] - rho >= lo {
            -rho
        } else if hi - x0[i] >= x0[i] - lo {
            hi - x0[i]
        } else {
            lo - x0[i]
        };
        let mut v = x0.to_vec();
        v[i] += step;
        obj.clamp(&mut v);
        f.push(budget.eval(obj, &v)?);
        x.push(v);
    }
    let best = (0..=n).fold(0, |b, j| if f[j] < f[b] { j } else { b });
    Ok(Simplex { x, f, best })
}

fn run(
    obj: &mut Objective,
    budget: &Budget,
    x0: &[f64],
    rho_beg: f64,
    rho_end: f64,
    iterations: &mut usize,
) -> Step<()> {
    let mut rho = rho_beg;
    let mut sim = initial_simplex(obj, budget, x0, rho)?;
    loop {
        *iterations += 1;
        let Some(fr) = sim.frame() else {
            // degenerate simplex: rebuild it around the best vertex
            let xb = sim.x[sim.best].clone();
            sim = initial_simplex(obj, budget, &xb, rho)?;
            continue;
        };
        let xb = sim.x[sim.best].clone();
        let fb = sim.f[sim.best];
        let d = trust_step(obj, &xb, &fr.g, rho);
        let mut good = false;
        if norm(&d) >= 0.5 * rho {
            let mut y: Vec<f64> = xb.iter().zip(&d).map(|(a, b)| a + b).collect();
            obj.clamp(&mut y);
            let fy = budget.eval(obj, &y)?;
            let pred = -dot(&fr.g, &d);
            let actual = fb - fy;
            replace_vertex(&mut sim, &fr, &xb, y, fy, rho);
            good = pred > 0.0 && actual > 0.1 * pred;
        }
        if good {
            continue;
        }
        // poor or short step: repair the geometry, else shrink the radius
        let Some(fr) = sim.frame() else { continue };
        let far = argmax(&fr.veta).filter(|&r| fr.veta[r] > BETA * rho);
        let flat = argmin(&fr.vsig).filter(|&r| fr.vsig[r] < ALPHA * rho);
        if let Some(r) = far.or(flat) {
            if improve_vertex(obj, budget, &mut sim, &fr, r, rho)? {
                continue;
            }
        }
        if rho <= rho_end {
            return Ok(());
        }
        rho *= 0.5;
        if rho <= 1.5 * rho_end {
            rho = rho_end;
        }
    }
}

fn argmax(v: &[f64]) -> Option<usize> {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]))
}

fn argmin(v: &[f64]) -> Option<usize> {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b]))
}

/// Put the trust-region point `y` into the simplex, dropping the vertex whose
/// replacement keeps the simplex best conditioned (COBYLA's rule).
fn replace_vertex(sim: &mut Simplex, fr: &Frame, xb: &[f64], y: Vec<f64>, fy: f64, rho: f64) {
    let improved = fy < sim.f[sim.best];
    let dy: Vec<f64> = y.iter().zip(xb).map(|(a, b)| a - b).collect();
    let mut ratio = if improved { 0.0 } else { 1.0 };
    let mut jdrop = None;
    let mut sigbar = Vec::with_capacity(fr.w.len());
    for (r, row) in fr.w.iter().enumerate() {
        let t = dot(row, &dy).abs();
        if t > ratio {
            jdrop = Some(r);
            ratio = t;
        }
        sigbar.push(t * fr.vsig[r]);
    }
    let mut edgmax = DELTA * rho;
    let mut far = None;
    for r in 0..fr.w.len() {
        if sigbar[r] >= ALPHA * rho || sigbar[r] >= fr.vsig[r] {
            let dist = if improved {
                let v = &sim.x[fr.others[r]];
                v.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            } else {
                fr.veta[r]
            };
            if dist > edgmax {
                far = Some(r);
                edgmax = dist;
            }
        }
    }
    if let Some(r) = far.or(jdrop) {
        sim.set(fr.others[r], y, fy);
    }
}

/// Replace vertex row `r` by a point at distance GAMMA·rho from the best
/// vertex along the normal of the opposite face. Returns false if the box
/// leaves no room for such a point.
fn improve_vertex(
    obj: &mut Objective,
    budget: &Budget,
    sim: &mut Simplex,
    fr: &Frame,
    r: usize,
    rho: f64,
) -> Step<bool> {
    let xb = sim.x[sim.best].clone();
    let scale = GAMMA * rho * fr.vsig[r];
    let mut dx: Vec<f64> = fr.w[r].iter().map(|v| scale * v).collect();
    if dot(&fr.g, &dx) > 0.0 {
        dx.iter_mut().for_each(|v| *v = -*v);
    }
    let plus: Vec<f64> = xb.iter().zip(&dx).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = xb.iter().zip(&dx).map(|(a, b)| a - b).collect();
    let mut y = if obj.contains(&plus) {
        plus
    } else if obj.contains(&minus) {
        minus
    } else {
        plus
    };
    obj.clamp(&mut y);
    if y == xb || sim.x.contains(&y) {
        return Ok(false);
    }
    let fy = budget.eval(obj, &y)?;
    sim.set(fr.others[r], y, fy);
    Ok(true)
}
