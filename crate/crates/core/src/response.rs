//! Derivative operator, response series, and stability/response rate fits.
//!
//! The derivative of the fiber transfer operator in the parameter acts as
//! 𝓛̂φ = 𝓛(Jφ + Vφ) with J, V built from the map's ε- and x-derivatives at
//! ε = 0. The response of the equivariant density is the series
//! ĥ = Σ_n 𝓛ⁿ_{σ^{−n}ω} 𝓛̂_{σ^{−(n+1)}ω} h_{σ^{−(n+1)}ω}, summed here to a
//! finite depth with a geometric tail estimate. Rate fits compare density
//! differences, difference quotients and operator perturbations against
//! powers of ε on dyadic grids.

use crate::density::{equivariant_density, linear_fit, DensityResult, PullbackStart};
use crate::error::{Error, Result};
use crate::fourier::{default_quadrature, FourierFunction};
use crate::maps::{DrivingOrbit, ParamCircleMap};
use crate::transfer::{apply_forward, assemble, TransferCache, TransferMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Truncated response series at one fiber.
#[derive(Debug, Clone)]
pub struct ResponseResult {
    pub h_hat: FourierFunction,
    /// Number of series terms actually summed (n = 0..depth−1).
    pub series_depth: usize,
    /// ‖last term‖·ρ/(1−ρ) from the supplied decay rate, ρ = e^{−λ}.
    pub tail_estimate: f64,
    /// ∫ φ ĥ dm for the configured observable, when one was given.
    pub observable_response: Option<f64>,
}

/// Log-log least-squares fit of errors against |ε|.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub eps_list: Vec<f64>,
    pub errors: Vec<f64>,
    pub fitted_exponent: f64,
    pub fitted_prefactor: f64,
    pub r_squared: f64,
    /// True when the errors were all ≈ 0 and no fit was possible (exact case).
    pub degenerate: bool,
}

fn fit_rates(eps_list: &[f64], errors: &[f64]) -> RateFit {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&e, &err) in eps_list.iter().zip(errors) {
        if err > 1e-300 {
            xs.push(e.abs().ln());
            ys.push(err.ln());
        }
    }
    if xs.len() < 3 {
        return RateFit {
            eps_list: eps_list.to_vec(),
            errors: errors.to_vec(),
            fitted_exponent: 0.0,
            fitted_prefactor: 0.0,
            r_squared: 1.0,
            degenerate: true,
        };
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    RateFit {
        eps_list: eps_list.to_vec(),
        errors: errors.to_vec(),
        fitted_exponent: slope,
        fitted_prefactor: intercept.exp(),
        r_squared: r2,
        degenerate: false,
    }
}

fn validate_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.len() < 3 {
        return Err(Error::Invalid("eps grid needs at least 3 points".into()));
    }
    for w in eps_list.windows(2) {
        if w[1].abs() >= w[0].abs() {
            return Err(Error::Invalid(
                "eps grid must be strictly decreasing in magnitude".into(),
            ));
        }
    }
    if eps_list.iter().any(|&e| e == 0.0) {
        return Err(Error::Invalid("eps grid must not contain 0".into()));
    }
    Ok(())
}

/// 𝓛̂φ = 𝓛(J_{ω,0}φ + V_{ω,0}φ) with
/// J = −(∂_ε∂_x T)/T' + T''·(∂_ε T)/(T')² and V(φ) = −φ'·(∂_ε T)/T',
/// all at ε = 0, evaluated pointwise on the quadrature grid, projected, and
/// pushed through the unperturbed fiber matrix. The output mean is forced to
/// zero (it vanishes analytically).
pub fn derivative_operator(
    map: &ParamCircleMap,
    a0: &TransferMatrix,
    phi: &FourierFunction,
    modes: usize,
    quad: usize,
) -> Result<FourierFunction> {
    let q = quad.max(default_quadrature(modes));
    let phi_d = phi.derivative(1);
    let bracket = |x: f64| -> f64 {
        let tp = map.x_derivative(1, 0.0, x);
        let tpp = map.x_derivative(2, 0.0, x);
        let de = map.eps_derivative(0.0, x);
        let dedx = map.mixed_derivative(0.0, x);
        let j = -dedx / tp + tpp * de / (tp * tp);
        j * phi.evaluate(x) - phi_d.evaluate(x) * de / tp
    };
    let inner = FourierFunction::project_fn(modes, q, bracket)?;
    let mut out = a0.apply(&inner)?;
    out.set_mean(0.0);
    Ok(out)
}

/// Closed form 𝓛̂φ = −(𝓛(φ)·S)' for composed perturbations T_ε = D_ε ∘ T with
/// D_ε(y) = y + ε·S(y); the cross-check route for `derivative_operator`.
pub fn derivative_operator_composed(
    a0: &TransferMatrix,
    s: &FourierFunction,
    phi: &FourierFunction,
) -> Result<FourierFunction> {
    let pushed = a0.apply(phi)?;
    let mut out = pushed.product(s)?.derivative(1).scale(-1.0);
    out.set_mean(0.0);
    Ok(out)
}

/// Densities at ε = 0 for every fiber in [lo, hi], keyed by fiber index.
#[allow(clippy::too_many_arguments)]
pub fn pullback_densities(
    orbit: &DrivingOrbit,
    eps: f64,
    fibers: std::ops::RangeInclusive<i64>,
    tol: f64,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
) -> Result<HashMap<i64, DensityResult>> {
    let mut out = HashMap::new();
    for fiber in fibers {
        let d = equivariant_density(
            orbit,
            eps,
            fiber,
            1,
            tol,
            modes,
            quad,
            cache,
            &PullbackStart::One,
        )?;
        out.insert(fiber, d);
    }
    Ok(out)
}

/// Partial sum Σ_{n=0}^{N−1} 𝓛ⁿ_{σ^{−n}ω} 𝓛̂_{σ^{−(n+1)}ω} h_{σ^{−(n+1)}ω} at
/// `fiber`. With `max_terms = None` the sum stops when a term drops below
/// 1e-12 in W^{1,1}. `lambda_hat` feeds the geometric tail estimate.
#[allow(clippy::too_many_arguments)]
pub fn response_series(
    orbit: &DrivingOrbit,
    fiber: i64,
    max_terms: Option<usize>,
    densities: &HashMap<i64, DensityResult>,
    lambda_hat: f64,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
    observable: Option<&FourierFunction>,
) -> Result<ResponseResult> {
    let q = quad.max(default_quadrature(modes));
    let (lo, _) = orbit.bounds();
    let cap = max_terms.unwrap_or(usize::MAX);
    let mut sum = FourierFunction::zero(modes);
    let mut last_norm = 0.0;
    let mut n = 0usize;
    while n < cap {
        let idx = fiber - (n as i64 + 1);
        if idx < lo {
            if max_terms.is_some() {
                return Err(Error::WindowExceeded {
                    lo,
                    hi: orbit.bounds().1,
                    need_lo: idx,
                    need_hi: idx,
                });
            }
            break;
        }
        let h = densities.get(&idx).ok_or(Error::NonConverged {
            fiber: idx,
            defect: f64::NAN,
            tol: f64::NAN,
            depth: 0,
        })?;
        if !h.converged {
            return Err(Error::NonConverged {
                fiber: idx,
                defect: h.cauchy_defect,
                tol: f64::NAN,
                depth: h.pullback_depth,
            });
        }
        let map = orbit.fiber(idx)?;
        let a_idx = cache.fiber_matrix(orbit, idx, 0.0, modes, q)?;
        let kick = derivative_operator(map, &a_idx, &h.h, modes, q)?;
        let term = apply_forward(orbit, 0.0, n, idx + 1, &kick, q, cache)?;
        sum = sum.add(&term)?;
        last_norm = term.sobolev_norm(1, q);
        n += 1;
        if max_terms.is_none() && last_norm < 1e-12 && n >= 3 {
            break;
        }
    }
    sum.set_mean(0.0);
    let rho = (-lambda_hat).exp();
    let tail = if rho < 1.0 {
        last_norm * rho / (1.0 - rho)
    } else {
        f64::INFINITY
    };
    let obs = observable.map(|phi| phi.inner(&sum));
    Ok(ResponseResult {
        h_hat: sum,
        series_depth: n,
        tail_estimate: tail,
        observable_response: obs,
    })
}

/// Koopman-form observable response Σ_n ∫ φ∘Tⁿ_{σ^{−n}ω} · 𝓛̂h dm, with the
/// n-fold composition evaluated pointwise; the independent route against
/// ∫ φ ĥ dm.
#[allow(clippy::too_many_arguments)]
pub fn koopman_observable_response(
    orbit: &DrivingOrbit,
    fiber: i64,
    terms: usize,
    densities: &HashMap<i64, DensityResult>,
    phi: &FourierFunction,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
) -> Result<f64> {
    let q = quad.max(default_quadrature(modes));
    let mut total = 0.0;
    for n in 0..terms {
        let idx = fiber - (n as i64 + 1);
        let h = densities.get(&idx).ok_or(Error::NonConverged {
            fiber: idx,
            defect: f64::NAN,
            tol: f64::NAN,
            depth: 0,
        })?;
        let map = orbit.fiber(idx)?;
        let a_idx = cache.fiber_matrix(orbit, idx, 0.0, modes, q)?;
        let kick = derivative_operator(map, &a_idx, &h.h, modes, q)?;
        // ∫ φ(Tⁿ x) · kick(x) dm by quadrature, maps composed pointwise
        let mut acc = 0.0;
        for i in 0..q {
            let x = i as f64 / q as f64;
            let mut y = x;
            for step in 0..n {
                let m = orbit.fiber(idx + 1 + step as i64)?;
                y = m.value(0.0, y);
            }
            acc += phi.evaluate(y) * kick.evaluate(x);
        }
        total += acc / q as f64;
    }
    Ok(total)
}

/// ‖h_{ω,ε} − h_{ω,0}‖_{W^{ℓ,1}} against |ε| on a dyadic grid; the quenched
/// statistical-stability rate.
#[allow(clippy::too_many_arguments)]
pub fn stability_rate(
    orbit: &DrivingOrbit,
    fiber: i64,
    eps_list: &[f64],
    ell: u32,
    tol: f64,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
) -> Result<RateFit> {
    validate_eps_list(eps_list)?;
    let q = quad.max(default_quadrature(modes));
    let h0 = density_checked(orbit, 0.0, fiber, tol, modes, q, cache)?;
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let h = density_checked(orbit, eps, fiber, tol, modes, q, cache)?;
        errors.push(h.h.sub(&h0.h)?.sobolev_norm(ell, q));
    }
    Ok(fit_rates(eps_list, &errors))
}

fn density_checked(
    orbit: &DrivingOrbit,
    eps: f64,
    fiber: i64,
    tol: f64,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
) -> Result<DensityResult> {
    let d = equivariant_density(
        orbit,
        eps,
        fiber,
        1,
        tol,
        modes,
        quad,
        cache,
        &PullbackStart::One,
    )?;
    if !d.converged {
        return Err(Error::NonConverged {
            fiber,
            defect: d.cauchy_defect,
            tol,
            depth: d.pullback_depth,
        });
    }
    Ok(d)
}

/// Everything the linear-response validation measures at one fiber.
#[derive(Debug, Clone)]
pub struct ResponseValidation {
    /// ‖(h_ε − h₀)/ε − ĥ‖_{W^{1,1}} against |ε|.
    pub fit: RateFit,
    pub response: ResponseResult,
    /// ∂_ε ∫φ h_ε at 0 by central difference at the smallest ε.
    pub observable_fd: Option<f64>,
    /// ∫ φ ĥ dm.
    pub observable_series: Option<f64>,
}

/// Compares difference quotients of the density against the response series.
#[allow(clippy::too_many_arguments)]
pub fn response_validation(
    orbit: &DrivingOrbit,
    fiber: i64,
    eps_list: &[f64],
    tol: f64,
    series_terms: Option<usize>,
    lambda_hat: f64,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
    phi: Option<&FourierFunction>,
) -> Result<ResponseValidation> {
    validate_eps_list(eps_list)?;
    let q = quad.max(default_quadrature(modes));
    let (lo, _) = orbit.bounds();
    let depth_budget = series_terms.unwrap_or(((fiber - lo) as usize).saturating_sub(1).min(60));
    let densities = pullback_densities(
        orbit,
        0.0,
        (fiber - depth_budget as i64 - 1)..=fiber,
        tol,
        modes,
        q,
        cache,
    )?;
    let response = response_series(
        orbit,
        fiber,
        Some(depth_budget),
        &densities,
        lambda_hat,
        modes,
        q,
        cache,
        phi,
    )?;
    let h0 = density_checked(orbit, 0.0, fiber, tol, modes, q, cache)?;
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let h = density_checked(orbit, eps, fiber, tol, modes, q, cache)?;
        let quotient = h.h.sub(&h0.h)?.scale(1.0 / eps);
        errors.push(quotient.sub(&response.h_hat)?.sobolev_norm(1, q));
    }
    let fit = fit_rates(eps_list, &errors);
    let observable_fd = match phi {
        Some(phi) => {
            let eps_min = eps_list[eps_list.len() - 1];
            let hp = density_checked(orbit, eps_min, fiber, tol, modes, q, cache)?;
            let hm = density_checked(orbit, -eps_min, fiber, tol, modes, q, cache)?;
            Some((phi.inner(&hp.h) - phi.inner(&hm.h)) / (2.0 * eps_min))
        }
        None => None,
    };
    let observable_series = response.observable_response;
    Ok(ResponseValidation {
        fit,
        response,
        observable_fd,
        observable_series,
    })
}

/// max over random unit-W^{ℓ+1,1} f of ‖(𝓛_ε − 𝓛₀)f‖_{W^{ℓ,1}}, fitted
/// against |ε|: the one-step operator-perturbation smallness.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_norms(
    map: &ParamCircleMap,
    eps_list: &[f64],
    ell: u32,
    trials: usize,
    modes: usize,
    quad: usize,
    seed: u64,
) -> Result<RateFit> {
    validate_eps_list(eps_list)?;
    let q = quad.max(default_quadrature(modes));
    let a0 = assemble(map, 0.0, modes, q);
    // fixed test set across ε so the fit is clean
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tests: Vec<FourierFunction> = (0..trials.max(1))
        .map(|_| FourierFunction::random_unit(modes, ell + 1, q, false, &mut rng))
        .collect();
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ae = assemble(map, eps, modes, q);
        let mut worst = 0.0f64;
        for f in &tests {
            let diff = ae.apply(f)?.sub(&a0.apply(f)?)?;
            worst = worst.max(diff.sobolev_norm(ell, q));
        }
        errors.push(worst);
    }
    Ok(fit_rates(eps_list, &errors))
}

/// ‖(𝓛_ε − 𝓛₀)φ/ε − 𝓛̂φ‖_{W^{j,1}} against |ε|: the first-order Taylor
/// accuracy of the derivative operator.
#[allow(clippy::too_many_arguments)]
pub fn operator_taylor_check(
    map: &ParamCircleMap,
    phi: &FourierFunction,
    eps_list: &[f64],
    j: u32,
    modes: usize,
    quad: usize,
) -> Result<RateFit> {
    validate_eps_list(eps_list)?;
    let q = quad.max(default_quadrature(modes));
    let a0 = assemble(map, 0.0, modes, q);
    let hat = derivative_operator(map, &a0, phi, modes, q)?;
    let base = a0.apply(phi)?;
    let mut errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ae = assemble(map, eps, modes, q);
        let quotient = ae.apply(phi)?.sub(&base)?.scale(1.0 / eps);
        errors.push(quotient.sub(&hat)?.sobolev_norm(j, q));
    }
    Ok(fit_rates(eps_list, &errors))
}

/// Dyadic grid ε₀·2^{−first}, …, ε₀·2^{−last}.
pub fn dyadic_eps_grid(eps0: f64, first: u32, last: u32) -> Vec<f64> {
    (first..=last).map(|k| eps0 * 0.5f64.powi(k as i32)).collect()
}
