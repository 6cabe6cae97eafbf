//! Independent oracles shared by the integration suites. Each suite
//! compiles its own copy and uses a subset, so unused-item lints are off.
#![allow(dead_code)]
//!
//! The QP oracle solves box-and-equality quadratic programs by brute-force
//! enumeration of active sets, and the MCC oracle evaluates the confusion
//! correlation in integer arithmetic. Neither shares code with the library
//! paths they check.

use ocslab_core::nalgebra::{DMatrix, DVector};
use ocslab_core::rng::SplitMix64;

/// Minimizes `0.5 z'Qz + c'z` subject to `Az = b`, `l <= z <= u` by trying
/// every assignment of variables to {lower, free, upper}. For each active
/// set the equality-constrained reduced KKT system is solved directly and
/// the candidate is kept when it is primal and dual feasible. Strict
/// convexity makes the best feasible candidate the global minimum.
///
/// Exponential in `n`; intended for `n <= 8`.
pub fn active_set_minimum(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    const FEAS_TOL: f64 = 1e-9;
    let n = c.len();
    let p = b.len();
    let mut best: Option<(DVector<f64>, f64)> = None;

    // state digit per variable: 0 lower, 1 free, 2 upper.
    let states = 3usize.pow(n as u32);
    for code in 0..states {
        let mut digits = Vec::with_capacity(n);
        let mut rem = code;
        for _ in 0..n {
            digits.push(rem % 3);
            rem /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| digits[i] == 1).collect();
        let nf = free.len();

        let mut z = DVector::zeros(n);
        for i in 0..n {
            z[i] = match digits[i] {
                0 => lower[i],
                2 => upper[i],
                _ => 0.0,
            };
        }

        // Solve [Qff Af'; Af 0] [zf; y] = [-(cf + Qfx zx); b - Ax zx].
        let dim = nf + p;
        let mut kkt = DMatrix::zeros(dim, dim);
        let mut rhs = DVector::zeros(dim);
        let mut y = DVector::zeros(p);
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                kkt[(r, s)] = q[(i, j)];
            }
            for k in 0..p {
                kkt[(r, nf + k)] = a[(k, i)];
                kkt[(nf + k, r)] = a[(k, i)];
            }
            let mut fixed_part = 0.0;
            for j in 0..n {
                if digits[j] != 1 {
                    fixed_part += q[(i, j)] * z[j];
                }
            }
            rhs[r] = -(c[i] + fixed_part);
        }
        for k in 0..p {
            let mut fixed_part = 0.0;
            for j in 0..n {
                if digits[j] != 1 {
                    fixed_part += a[(k, j)] * z[j];
                }
            }
            rhs[nf + k] = b[k] - fixed_part;
        }
        if dim > 0 {
            let sol = match kkt.lu().solve(&rhs) {
                Some(s) => s,
                None => continue,
            };
            for (r, &i) in free.iter().enumerate() {
                z[i] = sol[r];
            }
            for k in 0..p {
                y[k] = sol[nf + k];
            }
        }

        // Primal feasibility of the free block and the equality rows.
        let mut ok = true;
        for &i in &free {
            if z[i] < lower[i] - FEAS_TOL || z[i] > upper[i] + FEAS_TOL {
                ok = false;
                break;
            }
        }
        if ok && p > 0 {
            let res = a * &z - b;
            if res.amax() > FEAS_TOL * (1.0 + b.amax()) {
                ok = false;
            }
        }
        // Dual feasibility: the reduced gradient must push into the bound.
        if ok {
            let grad = q * &z + c + a.transpose() * &y;
            for i in 0..n {
                let g = grad[i];
                let bad = match digits[i] {
                    0 => g < -FEAS_TOL,
                    2 => g > FEAS_TOL,
                    _ => false,
                };
                if bad {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let objective = 0.5 * (q * &z).dot(&z) + c.dot(&z);
        match &best {
            Some((_, best_obj)) if *best_obj <= objective => {}
            _ => best = Some((z, objective)),
        }
    }
    best
}

/// A random strictly convex QP with a guaranteed-feasible box/equality mix.
pub struct RandomQp {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

pub fn random_qp(rng: &mut SplitMix64, n: usize, p: usize) -> RandomQp {
    let m = DMatrix::from_fn(n, n, |_, _| rng.next_f64() * 2.0 - 1.0);
    let mut q = &m * m.transpose();
    for i in 0..n {
        q[(i, i)] += 0.5 + rng.next_f64();
    }
    let c = DVector::from_fn(n, |_, _| rng.next_f64() * 4.0 - 2.0);
    let lower = DVector::from_fn(n, |_, _| rng.next_f64() * 2.0 - 2.0);
    let upper = DVector::from_fn(n, |i, _| lower[i] + 0.2 + rng.next_f64() * 2.0);
    let a = DMatrix::from_fn(p, n, |_, _| rng.next_f64() * 2.0 - 1.0);
    // Feasibility by construction: pass b through an interior point.
    let z0 = DVector::from_fn(n, |i, _| {
        let t = 0.2 + 0.6 * rng.next_f64();
        lower[i] + t * (upper[i] - lower[i])
    });
    let b = &a * z0;
    RandomQp {
        q,
        c,
        a,
        b,
        lower,
        upper,
    }
}

/// Matthews correlation from a confusion tuple, evaluated independently:
/// integer numerator and an exact `u128` factor product, divided in one
/// floating step. Returns `(0.0, false)` when a marginal is empty.
pub fn mcc_oracle(tp: u64, fp: u64, tn: u64, fn_: u64) -> (f64, bool) {
    let factors = [
        tp as u128 + fp as u128,
        tp as u128 + fn_ as u128,
        tn as u128 + fp as u128,
        tn as u128 + fn_ as u128,
    ];
    if factors.contains(&0) {
        return (0.0, false);
    }
    let numerator = tp as i128 * tn as i128 - fp as i128 * fn_ as i128;
    let product = factors[0] * factors[1] * factors[2] * factors[3];
    ((numerator as f64) / (product as f64).sqrt(), true)
}
