//! Powell's conjugate-direction method with bounded Brent line searches.

use super::{check_start, finish, Budget, Objective, OptResult, Step};
use crate::error::Result;

/// Minimize from `x0`. Each cycle line-minimizes along every direction of
/// the set (initially the coordinate axes), then tries the extrapolated
/// cycle direction and, when Powell's test accepts it, swaps it in for the
/// direction of largest decrease. Stops when a cycle improves the value by
/// less than `ftol·(|f| + ftol)`.
pub fn minimize_powell(obj: &mut Objective, x0: &[f64], xtol: f64, ftol: f64, maxfev: usize) -> Result<OptResult> {
    check_start(obj, x0)?;
    let budget = Budget::new(obj, maxfev)?;
    let mut iterations = 0;
    let outcome = run(obj, &budget, x0, xtol, ftol, &mut iterations);
    finish(obj, &budget, outcome, iterations)
}

fn run(obj: &mut Objective, budget: &Budget, x0: &[f64], xtol: f64, ftol: f64, iterations: &mut usize) -> Step<()> {
    let n = x0.len();
    let mut direc: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut x = x0.to_vec();
    let mut fval = budget.eval(obj, &x)?;
    let mut x1 = x.clone();
    loop {
        let fx = fval;
        let mut bigind = 0;
        let mut delta = 0.0;
        for (i, d) in direc.iter().enumerate() {
            let before = fval;
            let (f, xn, _) = line_search(obj, budget, &x, d, fval, xtol)?;
            fval = f;
            x = xn;
            if before - fval > delta {
                delta = before - fval;
                bigind = i;
            }
        }
        *iterations += 1;
        if fx - fval < ftol * (fval.abs() + ftol) {
            return Ok(());
        }
        let dir: Vec<f64> = x.iter().zip(&x1).map(|(a, b)| a - b).collect();
        x1.clone_from(&x);
        let (_, lmax) = line_bounds(obj, &x, &dir);
        let step = lmax.min(1.0);
        let mut x2: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
        obj.clamp(&mut x2);
        let fx2 = budget.eval(obj, &x2)?;
        if fx > fx2 {
            let mut t = 2.0 * (fx + fx2 - 2.0 * fval);
            let temp = fx - fval - delta;
            t *= temp * temp;
            let temp = fx - fx2;
            t -= delta * temp * temp;
            if t < 0.0 {
                let (f, xn, moved) = line_search(obj, budget, &x, &dir, fval, xtol)?;
                fval = f;
                x = xn;
                if moved.iter().any(|&v| v != 0.0) {
                    direc[bigind] = direc[n - 1].clone();
                    direc[n - 1] = moved;
                }
            }
        }
    }
}

/// Parameter range `[lmin, lmax]` keeping `x + l·d` inside the bounds.
fn line_bounds(obj: &Objective, x: &[f64], d: &[f64]) -> (f64, f64) {
    let (mut lmin, mut lmax) = (f64::NEG_INFINITY, f64::INFINITY);
    for ((&xi, &di), &(lo, hi)) in x.iter().zip(d).zip(obj.bounds()) {
        if di > 0.0 {
            lmin = lmin.max((lo - xi) / di);
            lmax = lmax.min((hi - xi) / di);
        } else if di < 0.0 {
            lmin = lmin.max((hi - xi) / di);
            lmax = lmax.min((lo - xi) / di);
        }
    }
    if lmin > lmax {
        (0.0, 0.0)
    } else {
        (lmin, lmax)
    }
}

/// Minimize along `d` from `x`. Returns the new value, point, and the step
/// actually taken; a worse line minimum leaves the point unchanged.
fn line_search(
    obj: &mut Objective,
    budget: &Budget,
    x: &[f64],
    d: &[f64],
    fval: f64,
    xtol: f64,
) -> Step<(f64, Vec<f64>, Vec<f64>)> {
    let zero = vec![0.0; d.len()];
    if d.iter().all(|&v| v == 0.0) {
        return Ok((fval, x.to_vec(), zero));
    }
    let (lmin, lmax) = line_bounds(obj, x, d);
    if !(lmax > lmin) {
        return Ok((fval, x.to_vec(), zero));
    }
    let point = |obj: &Objective, alpha: f64| {
        let mut p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        obj.clamp(&mut p);
        p
    };
    let (alpha, f) = fminbound(
        |alpha| {
            let p = point(obj, alpha);
            budget.eval(obj, &p)
        },
        lmin,
        lmax,
        xtol,
    )?;
    if f < fval {
        let p = point(obj, alpha);
        let step = p.iter().zip(x).map(|(a, b)| a - b).collect();
        Ok((f, p, step))
    } else {
        Ok((fval, x.to_vec(), zero))
    }
}

/// Brent's bounded scalar minimizer (golden section with parabolic steps).
pub(crate) fn fminbound<F>(mut func: F, a0: f64, b0: f64, xatol: f64) -> Step<(f64, f64)>
where
    F: FnMut(f64) -> Step<f64>,
{
    const MAXITER: usize = 500;
    let sqrt_eps = f64::EPSILON.sqrt();
    let golden_mean = 0.5 * (3.0 - 5f64.sqrt());
    let (mut a, mut b) = (a0, b0);
    let mut fulc = a + golden_mean * (b - a);
    let mut nfc = fulc;
    let mut xf = fulc;
    let (mut rat, mut e) = (0.0f64, 0.0f64);
    let mut fx = func(xf)?;
    let (mut ffulc, mut fnfc) = (fx, fx);
    let mut xm = 0.5 * (a + b);
    let mut tol1 = sqrt_eps * xf.abs() + xatol / 3.0;
    let mut tol2 = 2.0 * tol1;
    let close = |u: f64, v: f64| (u - v).abs() <= 1e-8 + 1e-5 * v.abs();
    let mut num = 1;
    while (xf - xm).abs() > tol2 - 0.5 * (b - a) {
        let mut golden = true;
        if e.abs() > tol1 {
            golden = false;
            let mut r = (xf - nfc) * (fx - ffulc);
            let mut q = (xf - fulc) * (fx - fnfc);
            let mut p = (xf - fulc) * q - (xf - nfc) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = rat;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - xf) && p < q * (b - xf) {
                rat = p / q;
                let x = xf + rat;
                if (x - a) < tol2 || (b - x) < tol2 {
                    let si = if xm - xf >= 0.0 { 1.0 } else { -1.0 };
                    rat = tol1 * si;
                }
            } else {
                golden = true;
            }
        }
        if golden {
            e = if xf >= xm { a - xf } else { b - xf };
            rat = golden_mean * e;
        }
        let si = if rat >= 0.0 { 1.0 } else { -1.0 };
        let x = (xf + si * rat.abs().max(tol1)).clamp(a0, b0);
        let fu = func(x)?;
        num += 1;
        if fu <= fx {
            if x >= xf {
                a = xf;
            } else {
                b = xf;
            }
            fulc = nfc;
            ffulc = fnfc;
            nfc = xf;
            fnfc = fx;
            xf = x;
            fx = fu;
        } else {
            if x < xf {
                a = x;
            } else {
                b = x;
            }
            if fu <= fnfc || close(nfc, xf) {
                fulc = nfc;
                ffulc = fnfc;
                nfc = x;
                fnfc = fu;
            } else if fu <= ffulc || close(fulc, xf) || close(fulc, nfc) {
                fulc = x;
                ffulc = fu;
            }
        }
        xm = 0.5 * (a + b);
        tol1 = sqrt_eps * xf.abs() + xatol / 3.0;
        tol2 = 2.0 * tol1;
        if num >= MAXITER {
            break;
        }
    }
    Ok((xf, fx))
}
