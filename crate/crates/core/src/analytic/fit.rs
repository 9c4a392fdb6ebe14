//! Three-moment fitting of an `alpha`-scaled noncentral chi-square.
//!
//! For `Y = X / alpha`, `X ~ chi'^2(v, lambda)` and `s = v + lambda`:
//!
//! ```text
//! E[Y]   = s / alpha
//! E[Y^2] = (s^2 + 2s + 2 lambda) / alpha^2
//! E[Y^3] = (s^3 + 6s^2 + 6 lambda s + 8s + 16 lambda) / alpha^3
//! ```
//!
//! Eliminating `s` and `lambda` leaves a quadratic in `alpha`, which in terms
//! of the cumulants of the target reads `-k3 a^2 + 8 k2 a - 8 k1 = 0`.

use super::{AnalyticError, Ncx2Fit, RicianMoments};

/// Largest objective for which `ncx2_fit_numeric` reports convergence.
pub const NUMERIC_TOLERANCE: f64 = 1e-16;

/// Relative tolerance at which a slightly negative `lambda` from the closed
/// form is treated as rounding noise around zero.
const LAMBDA_SNAP: f64 = 1e-9;

const LOG_BOUNDS: (f64, f64) = (-60.0, 60.0);

impl Ncx2Fit {
    /// Raw moments `E[Y], E[Y^2], E[Y^3]` of the fitted distribution.
    pub fn moments(&self) -> RicianMoments {
        let (v, l, a) = (self.dof_v, self.noncentrality_lambda, self.scale_alpha);
        let s = v + l;
        RicianMoments {
            m1: s / a,
            m2: (s * s + 2.0 * s + 2.0 * l) / (a * a),
            m3: (s * s * s + 6.0 * s * s + 6.0 * l * s + 8.0 * s + 16.0 * l) / (a * a * a),
        }
    }

    /// Largest relative deviation of the fitted moments from `target`.
    pub fn max_relative_residual(&self, target: &RicianMoments) -> f64 {
        let m = self.moments();
        [
            (m.m1 - target.m1) / target.m1,
            (m.m2 - target.m2) / target.m2,
            (m.m3 - target.m3) / target.m3,
        ]
        .iter()
        .fold(0.0f64, |acc, r| acc.max(r.abs()))
    }

    fn is_valid(&self) -> bool {
        self.dof_v > 0.0
            && self.noncentrality_lambda >= 0.0
            && self.scale_alpha > 0.0
            && self.dof_v.is_finite()
            && self.noncentrality_lambda.is_finite()
            && self.scale_alpha.is_finite()
    }
}

impl RicianMoments {
    /// `(k1, k2, k3)`: mean, variance and third central moment.
    pub fn cumulants(&self) -> (f64, f64, f64) {
        let k1 = self.m1;
        let k2 = self.m2 - k1 * k1;
        let k3 = self.m3 - 3.0 * k1 * self.m2 + 2.0 * k1 * k1 * k1;
        (k1, k2, k3)
    }

    fn check(&self) -> Result<(), AnalyticError> {
        let ok = [self.m1, self.m2, self.m3]
            .iter()
            .all(|m| m.is_finite() && *m > 0.0);
        if ok {
            Ok(())
        } else {
            Err(AnalyticError::Domain(format!("invalid moments {self:?}")))
        }
    }
}

fn params_for_alpha(m: &RicianMoments, alpha: f64) -> Ncx2Fit {
    let (k1, k2, _) = m.cumulants();
    let mut lambda = 0.5 * alpha * (alpha * k2 - 2.0 * k1);
    let s = alpha * k1;
    if lambda < 0.0 && lambda.abs() <= LAMBDA_SNAP * s {
        lambda = 0.0;
    }
    Ncx2Fit {
        dof_v: s - lambda,
        noncentrality_lambda: lambda,
        scale_alpha: alpha,
    }
}

/// Closed-form method-of-moments fit.
///
/// Both roots of the quadratic are tried; the ones giving `alpha > 0`,
/// `v > 0`, `lambda >= 0` are kept and the one with the smaller moment
/// residual wins (ties go to the larger `alpha`).
pub fn ncx2_fit_moments(m: &RicianMoments) -> Result<Ncx2Fit, AnalyticError> {
    m.check()?;
    let (k1, k2, k3) = m.cumulants();
    let infeasible = || AnalyticError::InfeasibleFit { moments: *m };
    if !(k2 > 0.0) {
        return Err(infeasible());
    }
    // -k3 a^2 + 8 k2 a - 8 k1 = 0
    let (qa, qb, qc) = (-k3, 8.0 * k2, -8.0 * k1);
    let mut roots = Vec::with_capacity(2);
    if qa.abs() <= 1e-15 * qb.abs() / k1.max(f64::MIN_POSITIVE) * k2 {
        roots.push(-qc / qb);
    } else {
        let mut disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            // A double root can come out marginally negative.
            if disc.abs() <= 1e-12 * qb * qb {
                disc = 0.0;
            } else {
                return Err(infeasible());
            }
        }
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        roots.push(q / qa);
        if q != 0.0 {
            roots.push(qc / q);
        }
    }

    let mut best: Option<(Ncx2Fit, f64)> = None;
    for alpha in roots {
        if !(alpha > 0.0 && alpha.is_finite()) {
            continue;
        }
        let fit = params_for_alpha(m, alpha);
        if !fit.is_valid() {
            continue;
        }
        let res = fit.max_relative_residual(m);
        let better = match &best {
            None => true,
            Some((b, bres)) => {
                res < *bres * (1.0 - 1e-9) || (res <= *bres * (1.0 + 1e-9) && alpha > b.scale_alpha)
            }
        };
        if better {
            best = Some((fit, res));
        }
    }
    best.map(|(f, _)| f).ok_or_else(infeasible)
}

/// Result of the numeric moment fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericFit {
    pub fit: Ncx2Fit,
    /// `sum_k ((fitted m_k - m_k) / m_k)^2` at `fit`.
    pub objective: f64,
    /// `objective < NUMERIC_TOLERANCE`.
    pub converged: bool,
}

fn residuals(m: &RicianMoments, x: &[f64; 3]) -> [f64; 3] {
    let fit = Ncx2Fit {
        dof_v: x[0].exp(),
        noncentrality_lambda: x[1].exp(),
        scale_alpha: x[2].exp(),
    };
    let f = fit.moments();
    [
        (f.m1 - m.m1) / m.m1,
        (f.m2 - m.m2) / m.m2,
        (f.m3 - m.m3) / m.m3,
    ]
}

fn objective(m: &RicianMoments, x: &[f64; 3]) -> f64 {
    let r = residuals(m, x);
    let v = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Jacobian of the residuals with respect to `(ln v, ln lambda, ln alpha)`.
fn jacobian(m: &RicianMoments, x: &[f64; 3]) -> [[f64; 3]; 3] {
    let (v, l, a) = (x[0].exp(), x[1].exp(), x[2].exp());
    let s = v + l;
    let (a2, a3) = (a * a, a * a * a);
    let e1 = s / a;
    let e2 = (s * s + 2.0 * s + 2.0 * l) / a2;
    let e3 = (s * s * s + 6.0 * s * s + 6.0 * l * s + 8.0 * s + 16.0 * l) / a3;
    let d1 = [1.0 / a, 1.0 / a, -e1 / a];
    let d2 = [(2.0 * s + 2.0) / a2, (2.0 * s + 4.0) / a2, -2.0 * e2 / a];
    let d3 = [
        (3.0 * s * s + 12.0 * s + 6.0 * l + 8.0) / a3,
        (3.0 * s * s + 18.0 * s + 6.0 * l + 24.0) / a3,
        -3.0 * e3 / a,
    ];
    let scale = [v, l, a];
    let mut j = [[0.0; 3]; 3];
    for c in 0..3 {
        j[0][c] = d1[c] * scale[c] / m.m1;
        j[1][c] = d2[c] * scale[c] / m.m2;
        j[2][c] = d3[c] * scale[c] / m.m3;
    }
    j
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = a;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

fn clamp_log(x: &mut [f64; 3], central: bool) {
    for (i, v) in x.iter_mut().enumerate() {
        *v = if central && i == 1 {
            f64::NEG_INFINITY
        } else {
            v.clamp(LOG_BOUNDS.0, LOG_BOUNDS.1)
        };
    }
}

/// Levenberg-Marquardt on the log-parameters. With `central` set, lambda is
/// pinned to zero and only `(v, alpha)` move.
fn levenberg_marquardt(m: &RicianMoments, start: [f64; 3], central: bool) -> ([f64; 3], f64) {
    let mut x = start;
    clamp_log(&mut x, central);
    let mut f = objective(m, &x);
    let mut mu = 1e-3;
    for _ in 0..500 {
        if f < 1e-30 {
            break;
        }
        let r = residuals(m, &x);
        let j = jacobian(m, &x);
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] = (0..3).map(|k| j[k][a] * j[k][b]).sum();
            }
            jtr[a] = (0..3).map(|k| j[k][a] * r[k]).sum();
        }
        if central {
            jtj[1] = [0.0, 1.0, 0.0];
            jtj[0][1] = 0.0;
            jtj[2][1] = 0.0;
            jtr[1] = 0.0;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for d in 0..3 {
                damped[d][d] += mu * jtj[d][d].max(1e-300);
            }
            let Some(step) = solve3(damped, [-jtr[0], -jtr[1], -jtr[2]]) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = [x[0] + step[0], x[1] + step[1], x[2] + step[2]];
            clamp_log(&mut trial, central);
            let ft = objective(m, &trial);
            if ft < f {
                let rel_gain = (f - ft) / f;
                x = trial;
                f = ft;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                if rel_gain < 1e-14 {
                    return (x, f);
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, f)
}

/// Starting points on the curve matching `m1` and `m2` exactly for a given
/// `lambda`: `k2 a^2 - 2 m1 a - 2 lambda = 0`.
fn start_for_lambda(m: &RicianMoments, lambda: f64) -> Option<[f64; 3]> {
    let (k1, k2, _) = m.cumulants();
    if !(k2 > 0.0) {
        return None;
    }
    let alpha = (2.0 * k1 + (4.0 * k1 * k1 + 8.0 * k2 * lambda).sqrt()) / (2.0 * k2);
    let v = alpha * k1 - lambda;
    (v > 0.0 && alpha > 0.0).then(|| [v.ln(), lambda.ln(), alpha.ln()])
}

/// Numeric least-squares moment fit in log-parameter space. Always returns
/// the best point found; `converged` tells whether it meets the tolerance.
pub fn ncx2_fit_numeric(
    m: &RicianMoments,
    initial: Option<Ncx2Fit>,
) -> Result<NumericFit, AnalyticError> {
    m.check()?;
    // Work on moments normalized to unit mean so the search does not depend
    // on the power scale; alpha is rescaled at the end.
    let unit = m.m1;
    let m = &RicianMoments {
        m1: 1.0,
        m2: m.m2 / (unit * unit),
        m3: m.m3 / (unit * unit * unit),
    };
    let as_start = |f: Ncx2Fit| {
        [
            f.dof_v.ln(),
            f.noncentrality_lambda.max(1e-20).ln(),
            (f.scale_alpha * unit).ln(),
        ]
    };
    let mut starts: Vec<[f64; 3]> = Vec::new();
    if let Some(init) = initial.filter(Ncx2Fit::is_valid) {
        starts.push(as_start(init));
    }
    if let Ok(closed) = ncx2_fit_moments(m) {
        starts.push([
            closed.dof_v.ln(),
            closed.noncentrality_lambda.max(1e-20).ln(),
            closed.scale_alpha.ln(),
        ]);
    }
    let (k1, k2, _) = m.cumulants();
    if k2 > 0.0 {
        let scale = k1 * k1 / k2;
        for lambda in [1e-6, 1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1e3, 1e4] {
            if let Some(s) = start_for_lambda(m, lambda * scale.max(1.0)) {
                starts.push(s);
            }
            if let Some(s) = start_for_lambda(m, lambda) {
                starts.push(s);
            }
        }
    }
    if starts.is_empty() {
        starts.push([0.0, 0.0, 0.0]);
    }

    let mut best = ([0.0; 3], f64::INFINITY);
    for s in &starts {
        let (x, f) = levenberg_marquardt(m, *s, false);
        if f < best.1 {
            best = (x, f);
        }
    }
    // The optimum of moments outside the family sits on the lambda = 0
    // boundary, where log-lambda drifts without bound; solve it directly.
    let boundary = starts
        .iter()
        .map(|s| levenberg_marquardt(m, *s, true))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((x, f)) = boundary {
        if f <= best.1 * (1.0 + 1e-9) {
            best = (x, f);
        }
    }
    let (x, f) = best;
    let fit = Ncx2Fit {
        dof_v: x[0].exp(),
        noncentrality_lambda: x[1].exp(),
        scale_alpha: x[2].exp() / unit,
    };
    Ok(NumericFit {
        fit,
        objective: f,
        converged: f < NUMERIC_TOLERANCE,
    })
}
