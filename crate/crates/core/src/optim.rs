//! Small unconstrained minimizers for low-dimensional problems.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Stop once `‖r‖²` falls below this.
    pub cost_tol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 200, fd_step: 1e-6, cost_tol: 1e-28 }
    }
}

fn sq_norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian(f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], rows: usize, h: f64) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(rows, x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        for i in 0..rows {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

/// Levenberg–Marquardt on `‖f(x)‖²`. Returns the best point and its cost.
pub fn levenberg_marquardt(f: impl Fn(&[f64]) -> Vec<f64>, x0: Vec<f64>, opts: LmOptions) -> (Vec<f64>, f64) {
    let mut x = x0;
    let mut r = f(&x);
    let mut cost = sq_norm(&r);
    let mut lambda = 1e-3;
    for _ in 0..opts.max_iter {
        if cost <= opts.cost_tol {
            break;
        }
        let j = jacobian(&f, &x, r.len(), opts.fd_step);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = f(&trial);
            let ct = sq_norm(&rt);
            if ct < cost {
                let small = step.norm() <= 1e-15 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
                x = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 3.0).max(1e-12);
                improved = !small;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost)
}

/// Nelder–Mead simplex search. Returns the best vertex and its value.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: Vec<f64>, step: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), f(&x0)));
    for k in 0..n {
        let mut v = x0.clone();
        v[k] += step;
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let mut evals = n + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= 1e-16 * simplex[0].1.abs().max(1e-300) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let refl = lerp(&centroid, &worst.0, -1.0);
        let fr = f(&refl);
        evals += 1;
        if fr < simplex[0].1 {
            let exp = lerp(&centroid, &worst.0, -2.0);
            let fe = f(&exp);
            evals += 1;
            simplex[n] = if fe < fr { (exp, fe) } else { (refl, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (refl, fr);
        } else {
            let (toward, ft) = if fr < worst.1 { (refl, fr) } else { (worst.0.clone(), worst.1) };
            let con = lerp(&centroid, &toward, 0.5);
            let fc = f(&con);
            evals += 1;
            if fc < ft {
                simplex[n] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for vert in simplex.iter_mut().skip(1) {
                    vert.0 = lerp(&best, &vert.0, 0.5);
                    vert.1 = f(&vert.0);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
