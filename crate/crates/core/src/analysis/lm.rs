//! Damped least squares (Levenberg–Marquardt) for the handful of 3–4
//! parameter profile fits used by the analysis routines. Analytic Jacobians
//! are supplied by the callers; a finite-difference fallback is provided.
//! Deterministic: fixed iteration cap (500) and relative step tolerance
//! 1e-10, no randomness.

pub(crate) const MAX_ITERATIONS: usize = 500;
pub(crate) const STEP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct LmFit {
    pub params: Vec<f64>,
    /// (JᵀJ)⁻¹·s² at the solution, s² = SSR/(n−p).
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize ||r(p)||². `residuals` fills a length-n vector; `jacobian`
/// fills row-major n×p, with central finite differences as the fallback
/// when no analytic form is supplied.
pub(crate) fn minimize(
    initial: &[f64],
    n_residuals: usize,
    residuals: &dyn Fn(&[f64], &mut [f64]),
    analytic_jacobian: Option<&dyn Fn(&[f64], &mut [f64])>,
) -> LmFit {
    let p = initial.len();
    let mut params = initial.to_vec();
    let mut r = vec![0.0; n_residuals];
    let mut r_trial = vec![0.0; n_residuals];
    let mut jac = vec![0.0; n_residuals * p];
    let jacobian = |params: &[f64], out: &mut [f64]| match analytic_jacobian {
        Some(j) => j(params, out),
        None => finite_difference_jacobian(params, n_residuals, residuals, out),
    };

    residuals(&params, &mut r);
    let mut ssr: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        jacobian(&params, &mut jac);

        // Normal equations: (JᵀJ + λ·diag(JᵀJ))·δ = −Jᵀr.
        let mut ata = vec![0.0; p * p];
        let mut atr = vec![0.0; p];
        for i in 0..n_residuals {
            for a in 0..p {
                let ja = jac[i * p + a];
                atr[a] += ja * r[i];
                for b in a..p {
                    ata[a * p + b] += ja * jac[i * p + b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                ata[a * p + b] = ata[b * p + a];
            }
        }

        let mut accepted = false;
        for _ in 0..16 {
            let mut damped = ata.clone();
            for a in 0..p {
                let d = ata[a * p + a];
                damped[a * p + a] = d + lambda * d.max(1e-30);
            }
            let rhs: Vec<f64> = atr.iter().map(|v| -v).collect();
            let Some(delta) = solve(&damped, &rhs, p) else {
                lambda = (lambda * 10.0).min(1e12);
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&delta).map(|(x, d)| x + d).collect();
            residuals(&trial, &mut r_trial);
            let ssr_trial: f64 = r_trial.iter().map(|v| v * v).sum();
            if ssr_trial.is_finite() && ssr_trial <= ssr {
                let max_rel_step = delta
                    .iter()
                    .zip(&params)
                    .map(|(d, x)| d.abs() / x.abs().max(1e-12))
                    .fold(0.0, f64::max);
                // Parameters pinned at zero never satisfy the relative step
                // criterion; a stalled objective is the backstop.
                if ssr - ssr_trial <= 1e-14 * ssr {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                params = trial;
                std::mem::swap(&mut r, &mut r_trial);
                ssr = ssr_trial;
                lambda = (lambda / 3.0).max(1e-14);
                accepted = true;
                if max_rel_step <= STEP_TOLERANCE || stalled >= 3 {
                    converged = true;
                }
                break;
            }
            lambda = (lambda * 3.0).min(1e12);
        }
        if converged || !accepted {
            // No downhill step at maximal damping means a (local) minimum
            // to working precision.
            converged = converged || !accepted;
            break;
        }
    }

    // Heteroscedasticity-consistent (sandwich) covariance at the solution:
    // (JᵀJ)⁻¹·(Σᵢ rᵢ²·JᵢJᵢᵀ)·(JᵀJ)⁻¹·n/(n−p). Reduces to the classical
    // s²(JᵀJ)⁻¹ for uniform noise but stays honest when residual scales
    // vary across the data, as they do for multiplicative noise.
    jacobian(&params, &mut jac);
    let mut ata = vec![0.0; p * p];
    let mut meat = vec![0.0; p * p];
    for i in 0..n_residuals {
        let r2 = r[i] * r[i];
        for a in 0..p {
            for b in 0..p {
                let jj = jac[i * p + a] * jac[i * p + b];
                ata[a * p + b] += jj;
                meat[a * p + b] += r2 * jj;
            }
        }
    }
    let dof_scale = n_residuals as f64 / n_residuals.saturating_sub(p).max(1) as f64;
    let covariance = match invert(&ata, p) {
        Some(inv) => {
            let mut cov = vec![vec![0.0; p]; p];
            for a in 0..p {
                for b in 0..p {
                    let mut acc = 0.0;
                    for u in 0..p {
                        for v in 0..p {
                            acc += inv[a * p + u] * meat[u * p + v] * inv[v * p + b];
                        }
                    }
                    cov[a][b] = acc * dof_scale;
                }
            }
            cov
        }
        None => vec![vec![f64::NAN; p]; p],
    };

    LmFit { params, covariance, residual_norm: ssr.sqrt(), iterations, converged }
}

/// Central finite differences, relative step √ε.
pub(crate) fn finite_difference_jacobian(
    params: &[f64],
    n_residuals: usize,
    residuals: &dyn Fn(&[f64], &mut [f64]),
    out: &mut [f64],
) {
    let p = params.len();
    let mut plus = vec![0.0; n_residuals];
    let mut minus = vec![0.0; n_residuals];
    let mut work = params.to_vec();
    for a in 0..p {
        let h = 1e-7 * params[a].abs().max(1e-7);
        work[a] = params[a] + h;
        residuals(&work, &mut plus);
        work[a] = params[a] - h;
        residuals(&work, &mut minus);
        work[a] = params[a];
        for i in 0..n_residuals {
            out[i * p + a] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` on singularity.
fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if m[row * n + col].abs() > m[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if m[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        let diag = m[col * n + col];
        for row in col + 1..n {
            let f = m[row * n + col] / diag;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc -= m[col * n + k] * x[k];
        }
        x[col] = acc / m[col * n + col];
    }
    Some(x)
}

fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut out = vec![0.0; n * n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve(a, &e, n)?;
        for row in 0..n {
            out[row * n + col] = x[row];
        }
    }
    Some(out)
}
