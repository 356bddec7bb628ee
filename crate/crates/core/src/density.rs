//! Equivariant densities by pullback, decay rates and orbit diagnostics.
//!
//! The density at a fiber is the limit of 𝓛ⁿ applied to the constant 1
//! starting n steps in the past; convergence is geometric once mean-zero
//! decay kicks in. Decay rates, backward boundedness, temperedness of
//! per-fiber series and the top Lyapunov exponent of the operator cocycle are
//! all measured from the same cached fiber matrices.

use crate::error::{Error, Result};
use crate::fourier::{default_quadrature, FourierFunction};
use crate::maps::DrivingOrbit;
use crate::transfer::{apply_forward, compose_forward, operator_norm_estimate, TransferCache};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pullback result at one fiber.
#[derive(Debug, Clone)]
pub struct DensityResult {
    pub h: FourierFunction,
    pub fiber_index: i64,
    pub eps: f64,
    /// Depth n at which the iteration stopped.
    pub pullback_depth: usize,
    /// ‖h_n − h_{n−1}‖_{W^{1,1}} at the final depth.
    pub cauchy_defect: f64,
    /// Defect history, one entry per depth ≥ 1.
    pub defects: Vec<f64>,
    /// Max over the trajectory of ‖𝓛ⁿ1‖_{W^{ℓ,1}} at the checked level.
    pub trajectory_bound: f64,
    pub converged: bool,
}

impl DensityResult {
    /// Positivity surrogate: min of h on the default evaluation grid.
    pub fn min_value(&self, quad: usize) -> f64 {
        self.h
            .sample(quad.max(default_quadrature(self.h.modes())))
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Initial condition for the pullback iteration.
#[derive(Debug, Clone)]
pub enum PullbackStart {
    One,
    /// Any positive density with mean one.
    Custom(FourierFunction),
}

/// Iterates h_n = 𝓛ⁿ_{σ^{−n}ω} h₀ until the W^{1,1} Cauchy defect drops below
/// `tol` or the backward window is exhausted (then flagged, not an error).
/// The mean is renormalized to one at every step.
#[allow(clippy::too_many_arguments)]
pub fn equivariant_density(
    orbit: &DrivingOrbit,
    eps: f64,
    fiber: i64,
    ell_check: u32,
    tol: f64,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
    start: &PullbackStart,
) -> Result<DensityResult> {
    let q = quad.max(default_quadrature(modes));
    let (lo, _hi) = orbit.bounds();
    let max_depth = (fiber - lo).max(0) as usize;
    if max_depth == 0 {
        return Err(Error::WindowExceeded {
            lo,
            hi: orbit.bounds().1,
            need_lo: fiber - 1,
            need_hi: fiber,
        });
    }
    let h0 = match start {
        PullbackStart::One => FourierFunction::constant(modes, 1.0),
        PullbackStart::Custom(f) => {
            let mut f = f.resize(modes);
            let m = f.mean();
            if m.abs() < 1e-14 {
                return Err(Error::Invalid("custom start must have nonzero mean".into()));
            }
            f = f.scale(1.0 / m);
            f
        }
    };

    let mut prev = h0.clone();
    let mut defects = Vec::new();
    let mut bound = h0.sobolev_norm(ell_check, q);
    let mut converged = false;
    let mut depth = 0usize;
    let mut defect = f64::INFINITY;
    for d in 1..=max_depth {
        let mut h = h0.clone();
        for i in (fiber - d as i64)..fiber {
            let a = cache.fiber_matrix(orbit, i, eps, modes, q)?;
            h = a.apply(&h)?;
            let m = h.mean();
            if m.abs() > 1e-14 {
                h = h.scale(1.0 / m);
            }
        }
        bound = bound.max(h.sobolev_norm(ell_check, q));
        defect = h.sub(&prev)?.sobolev_norm(1, q);
        defects.push(defect);
        prev = h;
        depth = d;
        if defect < tol {
            converged = true;
            break;
        }
    }
    Ok(DensityResult {
        h: prev,
        fiber_index: fiber,
        eps,
        pullback_depth: depth,
        cauchy_defect: defect,
        defects,
        trajectory_bound: bound,
        converged,
    })
}

/// ‖𝓛_{fiber,ε} h_prev − h_next‖_{W^{1,1}} for consecutive fibers.
#[allow(clippy::too_many_arguments)]
pub fn equivariance_residual(
    orbit: &DrivingOrbit,
    eps: f64,
    fiber: i64,
    h_prev: &DensityResult,
    h_next: &DensityResult,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
) -> Result<f64> {
    let q = quad.max(default_quadrature(modes));
    let a = cache.fiber_matrix(orbit, fiber, eps, modes, q)?;
    let pushed = a.apply(&h_prev.h)?;
    Ok(pushed.sub(&h_next.h)?.sobolev_norm(1, q))
}

/// Least-squares line through (xs, ys); returns (slope, intercept, r²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return (0.0, my, 1.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Fitted decay of ‖𝓛ⁿ f‖_{W^{ℓ,1}} over mean-zero test functions.
#[derive(Debug, Clone)]
pub struct DecayReport {
    /// Fitted slope of log‖𝓛ⁿf‖ per test function.
    pub rates: Vec<f64>,
    /// −(max slope): a conservative decay rate; positive means decay.
    pub lambda_hat: f64,
    /// Prefactor of the slowest test.
    pub k_hat: f64,
    /// R² of the slowest test's fit.
    pub r_squared: f64,
}

/// Forward compositions from `fiber`; log-linear fit over the second half of
/// n ≤ n_max. Requires n_max ≥ 8 so the fit uses at least 5 points.
#[allow(clippy::too_many_arguments)]
pub fn decay_rate(
    orbit: &DrivingOrbit,
    eps: f64,
    fiber: i64,
    ell: u32,
    n_max: usize,
    tests: usize,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
    seed: u64,
) -> Result<DecayReport> {
    assert!(n_max >= 8, "fit needs at least 5 points in [n_max/2, n_max]");
    let q = quad.max(default_quadrature(modes));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rates = Vec::with_capacity(tests);
    let mut worst = f64::NEG_INFINITY;
    let mut k_hat = 0.0;
    let mut r2_worst = 1.0;
    for _ in 0..tests.max(1) {
        let f = FourierFunction::random_unit(modes, ell, q, true, &mut rng);
        let mut g = f.clone();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for n in 0..=n_max {
            if n > 0 {
                let a = cache.fiber_matrix(orbit, fiber + n as i64 - 1, eps, modes, q)?;
                g = a.apply(&g)?;
            }
            if n >= n_max / 2 {
                let norm = g.sobolev_norm(ell, q);
                if norm > 1e-250 {
                    xs.push(n as f64);
                    ys.push(norm.ln());
                }
            }
        }
        if xs.len() < 2 {
            // total annihilation inside the fit window: treat as fast decay
            rates.push(f64::NEG_INFINITY);
            continue;
        }
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        rates.push(slope);
        if slope > worst {
            worst = slope;
            k_hat = intercept.exp();
            r2_worst = r2;
        }
    }
    Ok(DecayReport {
        rates,
        lambda_hat: -worst,
        k_hat,
        r_squared: r2_worst,
    })
}

/// ‖𝓛ⁿ_{σ^{−n}ω} f‖_{W^{ℓ,1}} for n = 0..n_max; the max is the D_ℓ surrogate.
#[allow(clippy::too_many_arguments)]
pub fn backward_boundedness(
    orbit: &DrivingOrbit,
    eps: f64,
    fiber: i64,
    ell: u32,
    n_max: usize,
    f: &FourierFunction,
    quad: usize,
    cache: &TransferCache,
) -> Result<Vec<f64>> {
    let q = quad.max(default_quadrature(f.modes()));
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let g = apply_forward(orbit, eps, n, fiber - n as i64, f, q, cache)?;
        out.push(g.sobolev_norm(ell, q));
    }
    Ok(out)
}

/// Finite-window temperedness check of a positive series indexed −N..N.
#[derive(Debug, Clone, Copy)]
pub struct TemperednessReport {
    /// K_a = max over the window of series(n)·e^{−a|n|}.
    pub k_a: f64,
    /// Max of |log series(n)|/(1+|n|) declines across the last dyadic windows.
    pub sublinear_ok: bool,
}

pub fn temperedness_diagnostic(series: &[f64], a: f64) -> Result<TemperednessReport> {
    assert!(a > 0.0);
    assert!(series.len() % 2 == 1, "series must be indexed −N..N");
    for (i, &v) in series.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveSeries { index: i, value: v });
        }
    }
    let n = (series.len() / 2) as i64;
    let at = |k: i64| series[(k + n) as usize];
    let mut k_a = 0.0f64;
    for m in -n..=n {
        k_a = k_a.max(at(m) * (-a * m.abs() as f64).exp());
    }
    // dyadic windows w = 1, 2, 4, ..., N
    let mut windows = Vec::new();
    let mut w = 1i64;
    while w <= n.max(1) {
        let mut mx = 0.0f64;
        for m in -w.min(n)..=w.min(n) {
            mx = mx.max(at(m).ln().abs() / (1.0 + m.abs() as f64));
        }
        windows.push(mx);
        if w == n {
            break;
        }
        w = (2 * w).min(n);
    }
    let sublinear_ok = if windows.len() < 2 {
        true
    } else {
        let last = windows[windows.len() - 1];
        let prev = windows[windows.len() - 2];
        let first_half_min = windows[..windows.len() / 2 + 1]
            .iter()
            .fold(f64::INFINITY, |acc, &v| acc.min(v));
        last <= prev + 1e-9 && last <= first_half_min + 1e-9
    };
    Ok(TemperednessReport { k_a, sublinear_ok })
}

/// Fitted slope of (1/n)·log of the operator-norm estimate of 𝓛ⁿ; zero for
/// transfer-operator cocycles.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_top(
    orbit: &DrivingOrbit,
    eps: f64,
    ell: u32,
    n_max: usize,
    trials: usize,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
    seed: u64,
) -> Result<f64> {
    assert!(n_max >= 8);
    let q = quad.max(default_quadrature(modes));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in (n_max / 2)..=n_max {
        let comp = compose_forward(orbit, eps, n, 0, modes, q, cache)?;
        // same seed for every n so the test set is fixed along the fit
        let est = operator_norm_estimate(&comp, ell, trials, q, seed);
        if est > 1e-250 {
            xs.push(n as f64);
            ys.push(est.ln());
        }
    }
    if xs.len() < 2 {
        return Ok(f64::NEG_INFINITY);
    }
    let (slope, _, _) = linear_fit(&xs, &ys);
    Ok(slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{base_registry, builtin_family, sample_orbit, OrbitLaw};
    use std::collections::BTreeMap;

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn doubling_orbit(window: i64) -> DrivingOrbit {
        let reg = base_registry();
        let law = OrbitLaw::Fixed { sequence: vec!["doubling".into()] };
        sample_orbit(&law, &reg, 1, window).unwrap()
    }

    #[test]
    fn doubling_density_is_lebesgue() {
        let orbit = doubling_orbit(8);
        let cache = TransferCache::new();
        let r = equivariant_density(
            &orbit,
            0.0,
            0,
            1,
            1e-9,
            16,
            0,
            &cache,
            &PullbackStart::One,
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.pullback_depth, 1);
        assert!(r.cauchy_defect <= 1e-12);
        assert!((r.h.mean() - 1.0).abs() < 1e-12);
        let one = FourierFunction::constant(16, 1.0);
        assert!(r.h.sub(&one).unwrap().sobolev_norm(1, 264) < 1e-12);
    }

    #[test]
    fn linear_family_keeps_lebesgue_for_all_eps() {
        // pure βx maps preserve Lebesgue measure at every ε when D = 0
        let mut reg = base_registry();
        reg.insert(
            "b3".into(),
            builtin_family("linear_eps2", &params(&[("beta", 3.0), ("d_amp", 0.0)])).unwrap(),
        );
        let law = OrbitLaw::Fixed { sequence: vec!["b3".into()] };
        let orbit = sample_orbit(&law, &reg, 1, 8).unwrap();
        let cache = TransferCache::new();
        for &eps in &[0.0, 0.2, -0.3] {
            let r = equivariant_density(&orbit, eps, 0, 1, 1e-10, 16, 0, &cache, &PullbackStart::One)
                .unwrap();
            assert!(r.converged);
            let one = FourierFunction::constant(16, 1.0);
            assert!(r.h.sub(&one).unwrap().sobolev_norm(1, 264) < 1e-10);
        }
    }

    fn nonlinear_orbit(window: i64) -> DrivingOrbit {
        let mut reg = base_registry();
        reg.insert(
            "main".into(),
            builtin_family(
                "additive",
                &params(&[("degree", 2.0), ("sin1", 0.05), ("d_sin1", 1.0), ("eps0", 0.2)]),
            )
            .unwrap(),
        );
        let law = OrbitLaw::Fixed { sequence: vec!["main".into()] };
        sample_orbit(&law, &reg, 1, window).unwrap()
    }

    #[test]
    fn nonlinear_density_converges_and_is_positive() {
        let orbit = nonlinear_orbit(80);
        let cache = TransferCache::new();
        let r = equivariant_density(&orbit, 0.0, 0, 1, 1e-9, 32, 0, &cache, &PullbackStart::One)
            .unwrap();
        assert!(r.converged, "defect {}", r.cauchy_defect);
        assert!((r.h.mean() - 1.0).abs() <= 1e-10);
        assert!(r.min_value(0) > -1e-6);
        assert!(r.h.sobolev_norm(1, 0) <= r.trajectory_bound + 1e-9);
    }

    #[test]
    fn uniqueness_surrogate_two_starts_agree() {
        let orbit = nonlinear_orbit(80);
        let cache = TransferCache::new();
        let tol = 1e-9;
        let a = equivariant_density(&orbit, 0.05, 0, 1, tol, 32, 0, &cache, &PullbackStart::One)
            .unwrap();
        let start = FourierFunction::constant(32, 1.0)
            .add(&FourierFunction::harmonic(32, 1, 0.4, 0.0))
            .unwrap()
            .add(&FourierFunction::harmonic(32, 3, 0.0, 0.2))
            .unwrap();
        let b = equivariant_density(
            &orbit,
            0.05,
            0,
            1,
            tol,
            32,
            0,
            &cache,
            &PullbackStart::Custom(start),
        )
        .unwrap();
        assert!(a.converged && b.converged);
        let diff = a.h.sub(&b.h).unwrap().sobolev_norm(1, 0);
        assert!(diff <= 10.0 * tol, "starts disagree by {diff}");
    }

    #[test]
    fn pullback_defect_decays_geometrically() {
        let orbit = nonlinear_orbit(60);
        let cache = TransferCache::new();
        let r = equivariant_density(&orbit, 0.0, 0, 1, 1e-12, 32, 0, &cache, &PullbackStart::One)
            .unwrap();
        let d = &r.defects;
        assert!(d.len() >= 6);
        // after the transient, consecutive defects contract
        for w in d.windows(2).skip(2) {
            if w[0] > 1e-13 && w[1] > 1e-14 {
                assert!(w[1] / w[0] < 0.75, "ratio {} too slow", w[1] / w[0]);
            }
        }
    }

    #[test]
    fn equivariance_residual_small_for_converged_densities() {
        let orbit = nonlinear_orbit(80);
        let cache = TransferCache::new();
        let tol = 1e-8;
        let h0 = equivariant_density(&orbit, 0.05, 0, 1, tol, 32, 0, &cache, &PullbackStart::One)
            .unwrap();
        let h1 = equivariant_density(&orbit, 0.05, 1, 1, tol, 32, 0, &cache, &PullbackStart::One)
            .unwrap();
        let resid =
            equivariance_residual(&orbit, 0.05, 0, &h0, &h1, 32, 0, &cache).unwrap();
        assert!(resid <= 10.0 * tol, "residual {resid}");
    }

    #[test]
    fn beta_family_equivariance_exact() {
        let orbit = doubling_orbit(8);
        let cache = TransferCache::new();
        let h0 = equivariant_density(&orbit, 0.0, 0, 1, 1e-10, 16, 0, &cache, &PullbackStart::One)
            .unwrap();
        let h1 = equivariant_density(&orbit, 0.0, 1, 1, 1e-10, 16, 0, &cache, &PullbackStart::One)
            .unwrap();
        let resid = equivariance_residual(&orbit, 0.0, 0, &h0, &h1, 16, 0, &cache).unwrap();
        assert!(resid <= 1e-10);
    }

    #[test]
    fn window_exhaustion_is_flagged() {
        let orbit = nonlinear_orbit(3);
        let cache = TransferCache::new();
        let r = equivariant_density(&orbit, 0.0, 0, 1, 1e-13, 32, 0, &cache, &PullbackStart::One)
            .unwrap();
        assert!(!r.converged);
        assert_eq!(r.pullback_depth, 3);
    }

    #[test]
    fn decay_rate_identity_orbit_is_zero() {
        let reg = base_registry();
        let law = OrbitLaw::Fixed { sequence: vec!["identity".into()] };
        let orbit = sample_orbit(&law, &reg, 1, 16).unwrap();
        let cache = TransferCache::new();
        let rep = decay_rate(&orbit, 0.0, 0, 1, 12, 4, 12, 0, &cache, 3).unwrap();
        assert!(rep.lambda_hat.abs() < 1e-6, "lambda_hat {}", rep.lambda_hat);
    }

    #[test]
    fn decay_rate_mode_halving_oracle() {
        // ‖e_k‖_{W^{1,1}} = (2/π)(1 + 2πk): per-step slopes for f = cos(2π·16x)
        let orbit = doubling_orbit(16);
        let cache = TransferCache::new();
        let q = default_quadrature(32);
        let f = FourierFunction::harmonic(32, 16, 1.0, 0.0);
        let mut norms = Vec::new();
        let mut g = f.clone();
        for n in 0..=3usize {
            if n > 0 {
                let a = cache.fiber_matrix(&orbit, n as i64 - 1, 0.0, 32, q).unwrap();
                g = a.apply(&g).unwrap();
            }
            norms.push(g.sobolev_norm(1, q));
        }
        for (n, w) in norms.windows(2).enumerate() {
            let k = 16.0 / 2f64.powi(n as i32);
            let oracle = (2.0 / std::f64::consts::PI) * (1.0 + std::f64::consts::TAU * k);
            // rectangle-rule L¹ quadrature is first order; only per-mille
            // agreement with the closed form is meaningful
            assert!(
                (w[0] - oracle).abs() / oracle < 2e-3,
                "norm {} vs oracle {oracle} at n={n}",
                w[0]
            );
            let slope = (w[1] / w[0]).ln();
            assert!(slope <= -(2.0f64.ln()) + 0.05, "slope {slope} at step {n}");
        }
    }

    #[test]
    fn decay_rate_mixed_orbit_positive_below_log2() {
        let reg = base_registry();
        let law = OrbitLaw::Iid {
            alphabet: vec!["doubling".into(), "identity".into()],
            probs: vec![0.5, 0.5],
        };
        let orbit = sample_orbit(&law, &reg, 41, 40).unwrap();
        let cache = TransferCache::new();
        let rep = decay_rate(&orbit, 0.0, 0, 1, 24, 6, 24, 0, &cache, 9).unwrap();
        assert!(rep.lambda_hat > 0.0, "lambda_hat {}", rep.lambda_hat);
        assert!(rep.lambda_hat < 2.0f64.ln() + 0.1);
    }

    #[test]
    fn backward_bounded_constant_on_linear_family() {
        let orbit = doubling_orbit(24);
        let cache = TransferCache::new();
        let f = FourierFunction::constant(16, 1.0);
        let seq = backward_boundedness(&orbit, 0.0, 0, 1, 16, &f, 0, &cache).unwrap();
        for v in &seq {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_bounded_doubling_unit_function() {
        let orbit = doubling_orbit(24);
        let cache = TransferCache::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = FourierFunction::random_unit(16, 1, 264, false, &mut rng);
        let seq = backward_boundedness(&orbit, 0.0, 0, 1, 20, &f, 0, &cache).unwrap();
        let max = seq.iter().fold(0.0f64, |a, &v| a.max(v));
        assert!(max <= 1.0 + f.sobolev_norm(1, 264) + 1e-9);
        // no growth trend
        let quarter = &seq[seq.len() - seq.len() / 4..];
        let lastq_mean = quarter.iter().sum::<f64>() / quarter.len() as f64;
        let first_half_max = seq[..seq.len() / 2].iter().fold(0.0f64, |a, &v| a.max(v));
        assert!(lastq_mean <= 2.0 * first_half_max);
    }

    #[test]
    fn backward_identity_orbit_constant_norms() {
        let reg = base_registry();
        let law = OrbitLaw::Fixed { sequence: vec!["identity".into()] };
        let orbit = sample_orbit(&law, &reg, 1, 16).unwrap();
        let cache = TransferCache::new();
        let f = FourierFunction::harmonic(12, 2, 0.5, 0.5);
        let norm = f.sobolev_norm(1, 200);
        let seq = backward_boundedness(&orbit, 0.0, 0, 1, 12, &f, 0, &cache).unwrap();
        for v in &seq {
            assert!((v - norm).abs() < 1e-10);
        }
    }

    #[test]
    fn temperedness_examples() {
        let constant = vec![2.5; 33];
        let rep = temperedness_diagnostic(&constant, 1.0).unwrap();
        assert!((rep.k_a - 2.5).abs() < 1e-12);
        assert!(rep.sublinear_ok);

        // series(n) = e^{0.5|n|} with a = 1: K_a attained at n = 0
        let n = 16i64;
        let exp_series: Vec<f64> =
            (-n..=n).map(|m| (0.5 * m.abs() as f64).exp()).collect();
        let rep = temperedness_diagnostic(&exp_series, 1.0).unwrap();
        assert!((rep.k_a - 1.0).abs() < 1e-12);
        assert!(!rep.sublinear_ok);

        // bounded i.i.d.-like series is tempered
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        use rand::Rng;
        let iid: Vec<f64> = (0..65).map(|_| 0.5 + rng.gen::<f64>() * 4.0).collect();
        let rep = temperedness_diagnostic(&iid, 0.5).unwrap();
        assert!(rep.sublinear_ok);

        assert!(matches!(
            temperedness_diagnostic(&[1.0, -2.0, 1.0], 1.0),
            Err(Error::NonPositiveSeries { .. })
        ));
    }

    #[test]
    fn lyapunov_top_zero_for_doubling() {
        let orbit = doubling_orbit(24);
        let cache = TransferCache::new();
        let exp = lyapunov_top(&orbit, 0.0, 0, 16, 32, 12, 0, &cache, 11).unwrap();
        assert!(exp.abs() < 1e-3, "exponent {exp}");
    }

    #[test]
    fn lyapunov_top_zero_for_identity() {
        let reg = base_registry();
        let law = OrbitLaw::Fixed { sequence: vec!["identity".into()] };
        let orbit = sample_orbit(&law, &reg, 1, 24).unwrap();
        let cache = TransferCache::new();
        let exp = lyapunov_top(&orbit, 0.0, 1, 12, 16, 12, 0, &cache, 1).unwrap();
        assert!(exp.abs() < 1e-12);
    }

    #[test]
    fn lyapunov_top_zero_for_mixed_orbit() {
        let reg = base_registry();
        let law = OrbitLaw::Iid {
            alphabet: vec!["doubling".into(), "identity".into()],
            probs: vec![0.5, 0.5],
        };
        let orbit = sample_orbit(&law, &reg, 77, 24).unwrap();
        let cache = TransferCache::new();
        let exp = lyapunov_top(&orbit, 0.0, 1, 16, 32, 16, 0, &cache, 4).unwrap();
        assert!(exp.abs() < 5e-3, "exponent {exp}");
    }
}
