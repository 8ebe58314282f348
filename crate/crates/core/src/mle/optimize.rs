//! Minimization for the 16-parameter likelihood surface.

use crate::num::Real;

/// Stopping thresholds shared by the simplex search and the refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule<T> {
    /// Stop when the objective spread (or change) drops below this.
    pub ftol: T,
    /// Stop when the parameter spread (or step) drops below this.
    pub xtol: T,
    pub max_evals: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    ObjectiveTolerance,
    ParameterTolerance,
    EvaluationBudget,
}

impl StopReason {
    pub fn converged(self) -> bool {
        !matches!(self, StopReason::EvaluationBudget)
    }
}

#[derive(Clone, Debug)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub f: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub reason: StopReason,
}

struct Counted<'a, T, F: FnMut(&[T]) -> T> {
    f: &'a mut F,
    evals: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T: Real, F: FnMut(&[T]) -> T> Counted<'_, T, F> {
    fn call(&mut self, x: &[T]) -> T {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    }
}

/// Nelder-Mead with dimension-adaptive coefficients (Gao & Han), restarted
/// from the best vertex until a restart no longer improves the objective by
/// more than `ftol`.
pub fn nelder_mead<T: Real, F: FnMut(&[T]) -> T>(x0: &[T], step: T, rule: StopRule<T>, mut f: F) -> Minimum<T> {
    let mut counted = Counted {
        f: &mut f,
        evals: 0,
        _t: std::marker::PhantomData,
    };
    let mut best_x = x0.to_vec();
    let mut best_f = counted.call(&best_x);
    let mut iterations = 0;
    let mut reason;
    loop {
        let start_f = best_f;
        let run = simplex_run(&best_x, step, rule, &mut counted);
        iterations += run.iterations;
        reason = run.reason;
        if run.f <= best_f {
            best_f = run.f;
            best_x = run.x;
        }
        if !reason.converged() || start_f - best_f <= rule.ftol {
            break;
        }
    }
    Minimum {
        x: best_x,
        f: best_f,
        iterations,
        evaluations: counted.evals,
        reason,
    }
}

fn simplex_run<T: Real, F: FnMut(&[T]) -> T>(
    x0: &[T],
    step: T,
    rule: StopRule<T>,
    f: &mut Counted<'_, T, F>,
) -> Minimum<T> {
    let n = x0.len();
    let nf = T::lit(n as f64);
    let alpha = T::one();
    let gamma = T::one() + T::lit(2.0) / nf;
    let rho = T::lit(0.75) - T::one() / (T::lit(2.0) * nf);
    let sigma = T::one() - T::one() / nf;

    let mut verts: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    verts.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = v[i] + step;
        verts.push(v);
    }
    let mut vals: Vec<T> = verts.iter().map(|v| f.call(v)).collect();
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![T::zero(); n];
    let mut iterations = 0;

    let reason = loop {
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];

        let spread = vals[worst] - vals[best];
        if spread <= rule.ftol {
            break StopReason::ObjectiveTolerance;
        }
        let diameter = verts
            .iter()
            .flat_map(|v| v.iter().zip(&verts[best]).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        if diameter <= rule.xtol {
            break StopReason::ParameterTolerance;
        }
        if f.evals >= rule.max_evals {
            break StopReason::EvaluationBudget;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = T::zero());
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&verts[idx]) {
                *c = *c + *x;
            }
        }
        centroid.iter_mut().for_each(|c| *c = *c / nf);

        let along = |t: T, from: &[T]| -> Vec<T> {
            centroid.iter().zip(from).map(|(c, w)| *c + t * (*c - *w)).collect()
        };
        let xr = along(alpha, &verts[worst]);
        let fr = f.call(&xr);

        if fr < vals[best] {
            let xe = along(alpha * gamma, &verts[worst]);
            let fe = f.call(&xe);
            if fe < fr {
                verts[worst] = xe;
                vals[worst] = fe;
            } else {
                verts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            verts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        // contraction: outside if the reflection beat the worst vertex
        let (xc, fc_accept) = if fr < vals[worst] {
            let xc = along(alpha * rho, &verts[worst]);
            (xc, fr)
        } else {
            let xc = along(-rho, &verts[worst]);
            (xc, vals[worst])
        };
        let fc = f.call(&xc);
        if fc <= fc_accept {
            verts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let anchor = verts[best].clone();
        for &idx in &order[1..] {
            for (x, a) in verts[idx].iter_mut().zip(&anchor) {
                *x = *a + sigma * (*x - *a);
            }
            vals[idx] = f.call(&verts[idx]);
        }
    };

    let best = (0..=n)
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    Minimum {
        x: verts.swap_remove(best),
        f: vals[best],
        iterations,
        evaluations: f.evals,
        reason,
    }
}

/// Fourth-order central differences.
fn gradient<T: Real, F: FnMut(&[T]) -> T>(x: &[T], f: &mut Counted<'_, T, F>) -> Vec<T> {
    let h0 = T::epsilon().powf(T::lit(0.2));
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = h0 * x[i].abs().max(T::one());
            let mut at = |d: T| {
                xp[i] = x[i] + d;
                let v = f.call(&xp);
                xp[i] = x[i];
                v
            };
            let near = at(h) - at(-h);
            let far = at(T::lit(2.0) * h) - at(T::lit(-2.0) * h);
            (T::lit(8.0) * near - far) / (T::lit(12.0) * h)
        })
        .collect()
}

fn hessian<T: Real, F: FnMut(&[T]) -> T>(x: &[T], fx: T, f: &mut Counted<'_, T, F>) -> Vec<Vec<T>> {
    let n = x.len();
    let h: Vec<T> = x.iter().map(|v| T::epsilon().sqrt().sqrt() * v.abs().max(T::one())).collect();
    let mut xp = x.to_vec();
    let mut m = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        xp[i] = x[i] + h[i];
        let fp = f.call(&xp);
        xp[i] = x[i] - h[i];
        let fm = f.call(&xp);
        xp[i] = x[i];
        m[i][i] = (fp - T::lit(2.0) * fx + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: T, sj: T| {
                xp[i] = x[i] + si * h[i];
                xp[j] = x[j] + sj * h[j];
                let v = f.call(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let one = T::one();
            let v = (corner(one, one) - corner(one, -one) - corner(-one, one) + corner(-one, -one))
                / (T::lit(4.0) * h[i] * h[j]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Solves `(a + mu I) x = b` by Cholesky; `None` unless the shifted matrix is
/// positive definite.
fn solve_shifted<T: Real>(a: &[Vec<T>], mu: T, b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j] + if i == j { mu } else { T::zero() };
            for k in 0..j {
                sum = sum - l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > T::zero()) {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let s = (0..i).fold(b[i], |s, k| s - l[i][k] * y[k]);
        y[i] = s / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s = (i + 1..n).fold(y[i], |s, k| s - l[k][i] * x[k]);
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// Damped Newton iteration (Levenberg shift on the Hessian) with central
/// finite-difference derivatives. Stops once an accepted step is shorter than
/// `xtol` or gains less than `ftol`, or when no shift yields a decrease.
pub fn newton_refine<T: Real, F: FnMut(&[T]) -> T>(x0: &[T], rule: StopRule<T>, mut f: F) -> Minimum<T> {
    let mut counted = Counted {
        f: &mut f,
        evals: 0,
        _t: std::marker::PhantomData,
    };
    let mut x = x0.to_vec();
    let mut fx = counted.call(&x);
    let mut mu = T::zero();
    let mut iterations = 0;

    let reason = 'outer: loop {
        if counted.evals >= rule.max_evals {
            break StopReason::EvaluationBudget;
        }
        iterations += 1;
        let g = gradient(&x, &mut counted);
        let hess = hessian(&x, fx, &mut counted);
        let scale = (0..x.len()).fold(T::zero(), |m, i| m.max(hess[i][i].abs())).max(T::min_positive_value());
        mu = mu.max(T::lit(1e-12) * scale);
        let neg_g: Vec<T> = g.iter().map(|v| -*v).collect();
        loop {
            if mu > T::lit(1e12) * scale {
                break 'outer StopReason::ObjectiveTolerance;
            }
            if counted.evals >= rule.max_evals {
                break 'outer StopReason::EvaluationBudget;
            }
            let Some(step) = solve_shifted(&hess, mu, &neg_g) else {
                mu = mu * T::lit(10.0);
                continue;
            };
            let cand: Vec<T> = x.iter().zip(&step).map(|(a, d)| *a + *d).collect();
            let fc = counted.call(&cand);
            if fc < fx {
                let len = step.iter().fold(T::zero(), |m, v| m.max(v.abs()));
                let gain = fx - fc;
                x = cand;
                fx = fc;
                mu = mu * T::lit(0.1);
                if len <= rule.xtol {
                    break 'outer StopReason::ParameterTolerance;
                }
                if gain <= rule.ftol {
                    break 'outer StopReason::ObjectiveTolerance;
                }
                break;
            }
            mu = mu * T::lit(10.0);
        }
    };

    Minimum {
        x,
        f: fx,
        iterations,
        evaluations: counted.evals,
        reason,
    }
}
