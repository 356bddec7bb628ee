//! Heavy-tailed suspension driving: finite quenched response on every sample,
//! divergent annealed average.
//!
//! The base is a suspension over a full shift on {1, 2, …} with symbol law
//! ∝ n^{−(2+δ)} and roof h(ω) = ω₀. The fiber map is the identity below the
//! roof and the doubling map at the top, so the covering time of [0, 1/2]
//! starting at height i is exactly ω₀ − i, a heavy-tailed random variable
//! with infinite mean for δ ≤ 1. The observable ψ is a smooth zero-mean bump
//! supported in an arc I with I ∩ ½I = ∅; on top of the support condition the
//! construction zeroes the truncated dyadic autocorrelations Σ_j c_{2^k j}c̄_j
//! so that every correlation past the first doubling vanishes at the working
//! truncation, which the support condition alone only guarantees for one
//! doubling step.

use crate::error::{Error, Result};
use crate::fourier::FourierFunction;
use crate::maps::base_registry;
use crate::transfer::{assemble, TransferMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Σ_{i≥a} i^{−s} to ~1e-14 via a partial sum and an Euler–Maclaurin tail.
pub fn hurwitz_tail(s: f64, a: u64) -> f64 {
    assert!(s > 1.0 && a >= 1);
    let cut = a + 256;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in a..cut {
        // Kahan summation
        let y = (i as f64).powf(-s) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let x = cut as f64;
    let tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s / 12.0 * x.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * x.powf(-s - 3.0);
    sum + tail
}

/// ζ(s) for s > 1.
pub fn zeta(s: f64) -> f64 {
    hurwitz_tail(s, 1)
}

/// One ℙ-sample of the suspension: shift symbol ω₀ (the roof value) and the
/// height 0 ≤ i < ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuspensionState {
    pub omega0: u64,
    pub height: u64,
}

impl SuspensionState {
    /// Covering time of [0, 1/2] from this state: ω₀ − i.
    pub fn n_c(&self) -> u64 {
        self.omega0 - self.height
    }
}

/// Inverse-CDF tables for the suspension laws at one δ.
pub struct SuspensionSampler {
    pub delta: f64,
    /// ζ(1+δ): size-biased normalization (also ∫h dℚ / Z).
    pub zeta_1d: f64,
    /// ζ(2+δ): symbol-law normalization 1/Z.
    pub zeta_2d: f64,
    /// CDF of the size-biased roof law P(ω₀ = n) ∝ n^{−(1+δ)}.
    size_biased_cdf: Vec<f64>,
    /// CDF of the shift symbol law ℚ(ω₀ = n) ∝ n^{−(2+δ)}.
    symbol_cdf: Vec<f64>,
}

const CDF_LEN: usize = 1 << 17;

impl SuspensionSampler {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::BadDelta(delta));
        }
        let zeta_1d = zeta(1.0 + delta);
        let zeta_2d = zeta(2.0 + delta);
        let build = |s: f64, z: f64| -> Vec<f64> {
            let mut cdf = Vec::with_capacity(CDF_LEN);
            let mut sum = 0.0f64;
            let mut comp = 0.0f64;
            for n in 1..=CDF_LEN as u64 {
                let y = (n as f64).powf(-s) / z - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
                cdf.push(sum);
            }
            cdf
        };
        Ok(SuspensionSampler {
            delta,
            zeta_1d,
            zeta_2d,
            size_biased_cdf: build(1.0 + delta, zeta_1d),
            symbol_cdf: build(2.0 + delta, zeta_2d),
        })
    }

    fn invert(cdf: &[f64], tail_exponent: f64, norm: f64, u: f64) -> u64 {
        let idx = cdf.partition_point(|&c| c < u);
        if idx < cdf.len() {
            return idx as u64 + 1;
        }
        // Pareto tail: P(X > n) ≈ n^{−α}/(α·norm) with α = tail_exponent
        let alpha = tail_exponent;
        let n = (alpha * norm * (1.0 - u)).powf(-1.0 / alpha);
        (n.ceil() as u64).clamp(cdf.len() as u64 + 1, 1 << 50)
    }

    /// Size-biased roof draw: P(ω₀ = n) = n^{−(1+δ)}/ζ(1+δ).
    pub fn sample_roof(&self, rng: &mut impl Rng) -> u64 {
        Self::invert(&self.size_biased_cdf, self.delta, self.zeta_1d, rng.gen())
    }

    /// Shift symbol draw: ℚ(ω₀ = n) = n^{−(2+δ)}/ζ(2+δ).
    pub fn sample_symbol(&self, rng: &mut impl Rng) -> u64 {
        Self::invert(&self.symbol_cdf, 1.0 + self.delta, self.zeta_2d, rng.gen())
    }

    /// One stationary state: roof size-biased, height uniform below it.
    pub fn sample_state(&self, rng: &mut impl Rng) -> SuspensionState {
        let omega0 = self.sample_roof(rng);
        let height = rng.gen_range(0..omega0);
        SuspensionState { omega0, height }
    }
}

/// i.i.d. draws from ℙ, reproducible per (seed, index).
pub fn sample_suspension(seed: u64, delta: f64, count: usize) -> Result<Vec<SuspensionState>> {
    let sampler = SuspensionSampler::new(delta)?;
    Ok((0..count as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            sampler.sample_state(&mut rng)
        })
        .collect())
}

/// P(n_c = n) exactly: ζ(1+δ)^{−1} Σ_{i≥n} i^{−(2+δ)}.
pub fn tail_prob_exact(delta: f64, n: u64) -> f64 {
    hurwitz_tail(2.0 + delta, n) / zeta(1.0 + delta)
}

/// P(n_c > j) exactly: ζ(1+δ)^{−1} [H(1+δ, j+1) − j·H(2+δ, j+1)].
pub fn survival_exact(delta: f64, j: u64) -> f64 {
    (hurwitz_tail(1.0 + delta, j + 1) - j as f64 * hurwitz_tail(2.0 + delta, j + 1))
        / zeta(1.0 + delta)
}

/// E[min(n_c, cap)] exactly, as Σ_{j<cap} P(n_c > j).
pub fn truncated_mean_exact(delta: f64, cap: u64) -> f64 {
    // backward recursion H(s, a) = H(s, a+1) + a^{−s} makes this O(cap)
    let z1 = zeta(1.0 + delta);
    let mut h1 = hurwitz_tail(1.0 + delta, cap + 1);
    let mut h2 = hurwitz_tail(2.0 + delta, cap + 1);
    let mut total = 0.0;
    for j in (0..cap).rev() {
        let a = (j + 1) as f64;
        h1 += a.powf(-(1.0 + delta));
        h2 += a.powf(-(2.0 + delta));
        total += (h1 - j as f64 * h2) / z1;
    }
    total
}

/// The appendix observable: a zero-mean, unit-L² smooth bump supported in an
/// arc I with I ∩ ½I = ∅, truncated to M modes, with all dyadic pairings
/// Σ_j c_{2^k j} c̄_j (2^k ≤ M) removed by an I-supported correction.
#[derive(Debug, Clone)]
pub struct PsiObservable {
    pub profile: FourierFunction,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct PsiDiagnostics {
    pub mean: f64,
    pub l2_sq: f64,
    /// (1/P) Σ_{x ∉ I} |ψ(x)|: leaked mass after truncation.
    pub spill_l1: f64,
    /// ∫ ψ·(ψ∘T₀^k) dm for k = 1.., from the Fourier pairing.
    pub dyadic_correlations: Vec<f64>,
}

fn dyadic_pairing(coeffs: &[Complex64], modes: usize, k: u32) -> f64 {
    let m = modes as isize;
    let step = 1isize << k;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in -m..=m {
        if j == 0 {
            continue;
        }
        let jj = step * j;
        if jj.abs() <= m {
            acc += coeffs[(jj + m) as usize] * coeffs[(j + m) as usize].conj();
        }
    }
    acc.re
}

impl PsiObservable {
    pub fn diagnostics(&self, grid: usize) -> PsiDiagnostics {
        let p = grid.max(8192);
        let (a, b) = self.interval;
        let samples = self.profile.sample(p);
        let mut spill = 0.0;
        for (i, v) in samples.iter().enumerate() {
            let x = i as f64 / p as f64;
            if !(x >= a && x <= b) {
                spill += v.abs();
            }
        }
        spill /= p as f64;
        let m = self.profile.modes();
        let mut corrs = Vec::new();
        let mut k = 1u32;
        while (1usize << k) <= m {
            corrs.push(dyadic_pairing(self.profile.coeffs(), m, k));
            k += 1;
        }
        PsiDiagnostics {
            mean: self.profile.mean(),
            l2_sq: self.profile.l2_norm().powi(2),
            spill_l1: spill,
            dyadic_correlations: corrs,
        }
    }
}

fn project_grid(samples: &[f64], modes: usize) -> Result<Vec<Complex64>> {
    let f = FourierFunction::project(samples, modes)?;
    Ok(f.coeffs().to_vec())
}

/// Builds ψ for the arc I = (a, b): bump profile t·e^{−6/(1−t²)}, de-meaned
/// and corrected inside I by a Gauss–Newton solve so that the truncated
/// dyadic pairings and the mean vanish, then normalized to ∫ψ² = 1.
pub fn make_psi(interval: (f64, f64), modes: usize) -> Result<PsiObservable> {
    let (a, b) = interval;
    if !(a > 0.0 && b < 1.0 && a < b) {
        return Err(Error::BadInterval(a, b));
    }
    if b / 2.0 > a {
        return Err(Error::PsiInterval(format!(
            "I = ({a}, {b}) intersects ½I = ({}, {})",
            a / 2.0,
            b / 2.0
        )));
    }
    if modes < 4 {
        return Err(Error::Invalid("observable needs at least 4 modes".into()));
    }
    let center = 0.5 * (a + b);
    let halfw = 0.5 * (b - a);
    let p_grid = 1usize << 14;
    let window = |t: f64| -> f64 {
        if t.abs() < 1.0 {
            (-6.0 / (1.0 - t * t)).exp()
        } else {
            0.0
        }
    };
    let grid_t: Vec<f64> = (0..p_grid)
        .map(|i| (i as f64 / p_grid as f64 - center) / halfw)
        .collect();

    // base: odd profile, exactly zero-mean up to quadrature, unit L²
    let mut base: Vec<f64> = grid_t.iter().map(|&t| t * window(t)).collect();
    let mean = base.iter().sum::<f64>() / p_grid as f64;
    base.iter_mut().for_each(|v| *v -= mean);
    let l2 = (base.iter().map(|v| v * v).sum::<f64>() / p_grid as f64).sqrt();
    base.iter_mut().for_each(|v| *v /= l2);

    let n_basis = 9usize;
    let basis: Vec<Vec<f64>> = (0..n_basis)
        .map(|m| {
            grid_t
                .iter()
                .map(|&t| window(t) * (PI * (m as f64 + 1.0) * (t + 1.0) / 2.0).sin())
                .collect()
        })
        .collect();

    let c_base = project_grid(&base, modes)?;
    let c_basis: Vec<Vec<Complex64>> = basis
        .iter()
        .map(|f| project_grid(f, modes))
        .collect::<Result<_>>()?;

    let mut k_levels = Vec::new();
    let mut k = 1u32;
    while (1usize << k) <= modes {
        k_levels.push(k);
        k += 1;
    }
    let n_con = k_levels.len() + 1;

    let combine = |alpha: &[f64]| -> Vec<Complex64> {
        let mut c = c_base.clone();
        for (am, cm) in alpha.iter().zip(&c_basis) {
            for (ci, &cmi) in c.iter_mut().zip(cm) {
                *ci += am * cmi;
            }
        }
        c
    };
    let pair = |ca: &[Complex64], cb: &[Complex64], k: u32| -> f64 {
        let m = modes as isize;
        let step = 1isize << k;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -m..=m {
            if j == 0 {
                continue;
            }
            let jj = step * j;
            if jj.abs() <= m {
                acc += ca[(jj + m) as usize] * cb[(j + m) as usize].conj();
            }
        }
        acc.re
    };

    let mut alpha = vec![0.0f64; n_basis];
    let mut converged = false;
    for _ in 0..60 {
        let c = combine(&alpha);
        let mut g = Vec::with_capacity(n_con);
        for &k in &k_levels {
            g.push(pair(&c, &c, k));
        }
        g.push(c[modes].re);
        let resid = g.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if resid < 1e-12 {
            converged = true;
            break;
        }
        // analytic Jacobian of the quadratic constraints
        let mut jac = DMatrix::zeros(n_con, n_basis);
        for (col, cm) in c_basis.iter().enumerate() {
            for (row, &k) in k_levels.iter().enumerate() {
                jac[(row, col)] = pair(cm, &c, k) + pair(&c, cm, k);
            }
            jac[(n_con - 1, col)] = cm[modes].re;
        }
        // least-norm step: dα = Jᵀ (J Jᵀ)⁻¹ (−g)
        let jt = jac.transpose();
        let jjt = &jac * &jt;
        let rhs = nalgebra::DVector::from_vec(g.iter().map(|v| -v).collect::<Vec<_>>());
        let sol = jjt
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Invalid("observable correction system is singular".into()))?;
        let dal = jt * sol;
        for (am, d) in alpha.iter_mut().zip(dal.iter()) {
            *am += d;
        }
    }
    if !converged {
        return Err(Error::Invalid(
            "dyadic-orthogonality correction did not converge".into(),
        ));
    }

    let c = combine(&alpha);
    let mut psi = FourierFunction::from_coeffs(modes, c)?;
    psi.set_mean(0.0);
    let l2 = psi.l2_norm();
    let psi = psi.scale(1.0 / l2);
    Ok(PsiObservable {
        profile: psi,
        interval,
    })
}

/// Closed-form quenched response value: the covering time ω₀ − i.
pub fn quenched_closed_form(state: &SuspensionState) -> f64 {
    state.n_c() as f64
}

#[derive(Debug, Clone, Copy)]
pub struct QuenchedValue {
    pub value: f64,
    /// True when the requested truncation fell short of the covering time.
    pub truncated: bool,
}

/// Operator route: Σ_{n<n_terms} ∫ ψ·(ψ∘Tⁿ) dm with the forward fiber
/// sequence realized from the state (identities below the roof, the doubling
/// map at the roof, then fresh symbol blocks drawn from the shift law) and
/// each correlation computed through the assembled fiber matrices.
pub fn quenched_operator(
    state: &SuspensionState,
    psi: &PsiObservable,
    sampler: &SuspensionSampler,
    n_terms: usize,
    seed: u64,
    quad: usize,
) -> Result<QuenchedValue> {
    let modes = psi.profile.modes();
    let reg = base_registry();
    let doubling = assemble(reg.get("doubling").unwrap(), 0.0, modes, quad);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roof = state.omega0;
    let mut height = state.height;
    let mut v = psi.profile.clone();
    let mut total = 0.0;
    for _n in 0..n_terms {
        total += psi.profile.inner(&v);
        // advance one fiber: identity below the roof, doubling at the top
        if height == roof - 1 {
            v = doubling.apply(&v)?;
            roof = sampler.sample_symbol(&mut rng);
            height = 0;
        } else {
            height += 1;
        }
    }
    Ok(QuenchedValue {
        value: total,
        truncated: (n_terms as u64) < state.n_c(),
    })
}

/// One row of the divergence table.
#[derive(Debug, Clone, Copy)]
pub struct DivergenceRow {
    pub sample_size: usize,
    pub cap: u64,
    pub truncated_mean: f64,
    pub fitted_slope: f64,
    pub max_sample: u64,
}

#[derive(Debug, Clone)]
pub struct DivergenceTable {
    pub rows: Vec<DivergenceRow>,
    /// Log-log slope of the truncated mean against the cap at the largest
    /// sample size.
    pub fitted_slope: f64,
    pub r_squared: f64,
    pub delta: f64,
}

/// Empirical divergence of the annealed mean: size sweep at the largest cap
/// plus a cap sweep at the largest size, with a log-log slope fit expected
/// near 1−δ.
pub fn annealed_divergence_experiment(
    seed: u64,
    delta: f64,
    sample_sizes: &[usize],
    caps: &[u64],
) -> Result<DivergenceTable> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta(delta));
    }
    if sample_sizes.is_empty() || caps.is_empty() {
        return Err(Error::Invalid("need at least one sample size and cap".into()));
    }
    if sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("sample sizes must be increasing".into()));
    }
    let sampler = SuspensionSampler::new(delta)?;
    let s_max = *sample_sizes.last().unwrap();
    // per-index streams: deterministic and independent of the thread count
    let values: Vec<u64> = (0..s_max as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            sampler.sample_state(&mut rng).n_c()
        })
        .collect();

    let cap_max = *caps.iter().max().unwrap();
    let mut rows = Vec::new();
    for &s in sample_sizes {
        let slice = &values[..s];
        let mean = slice.iter().map(|&v| v.min(cap_max) as f64).sum::<f64>() / s as f64;
        rows.push(DivergenceRow {
            sample_size: s,
            cap: cap_max,
            truncated_mean: mean,
            fitted_slope: 0.0,
            max_sample: slice.iter().copied().max().unwrap_or(0),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let max_all = values.iter().copied().max().unwrap_or(0);
    let mut cap_rows = Vec::new();
    for &cap in caps {
        let mean = values.iter().map(|&v| v.min(cap) as f64).sum::<f64>() / s_max as f64;
        xs.push((cap as f64).ln());
        ys.push(mean.ln());
        cap_rows.push(DivergenceRow {
            sample_size: s_max,
            cap,
            truncated_mean: mean,
            fitted_slope: 0.0,
            max_sample: max_all,
        });
    }
    let (slope, _, r2) = crate::density::linear_fit(&xs, &ys);
    for r in cap_rows.iter_mut().chain(rows.iter_mut()) {
        r.fitted_slope = slope;
    }
    rows.extend(cap_rows);
    Ok(DivergenceTable {
        rows,
        fitted_slope: slope,
        r_squared: r2,
        delta,
    })
}

/// Compares a logarithmic and a power-law model for the truncated means; the
/// δ = 1 boundary case grows like log(cap).
pub fn log_model_beats_power(caps: &[u64], means: &[f64]) -> bool {
    let xs_log: Vec<f64> = caps.iter().map(|&c| (c as f64).ln()).collect();
    // linear in log cap: mean ≈ a + b·log(cap)
    let (_, _, r2_log) = crate::density::linear_fit(&xs_log, means);
    // power law: log mean ≈ a + b·log(cap)
    let ys_pow: Vec<f64> = means.iter().map(|&m| m.ln()).collect();
    let (_, _, r2_pow) = crate::density::linear_fit(&xs_log, &ys_pow);
    r2_log > r2_pow
}

/// The doubling matrix fixes constants: h ≡ 1 is equivariant on this cocycle.
pub fn lebesgue_equivariance_residual(modes: usize, quad: usize) -> Result<(f64, f64)> {
    let reg = base_registry();
    let one = FourierFunction::constant(modes, 1.0);
    let id = TransferMatrix::identity(modes);
    let doubling = assemble(reg.get("doubling").unwrap(), 0.0, modes, quad);
    let r_id = id.apply(&one)?.sub(&one)?.sobolev_norm(1, quad);
    let r_d = doubling.apply(&one)?.sub(&one)?.sobolev_norm(1, quad);
    Ok((r_id, r_d))
}
