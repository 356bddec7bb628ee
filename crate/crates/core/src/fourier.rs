//! Truncated Fourier representation of real functions on the circle.
//!
//! A [`FourierFunction`] stores coefficients c_k of e^{2πikx} for |k| ≤ M and
//! enforces Hermitian symmetry c_{−k} = conj(c_k), so every instance is a real
//! trigonometric polynomial. Calculus (spectral derivatives), W^{ℓ,1} Sobolev
//! norms via uniform-grid quadrature of |f^{(j)}|, and projection from grid
//! samples live here.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// Symmetry tolerance accepted at construction.
const HERMITIAN_TOL: f64 = 1e-10;

/// Default quadrature size for L¹-type norms: 8·(2M+1).
pub fn default_quadrature(modes: usize) -> usize {
    8 * (2 * modes + 1)
}

/// A real-valued function on 𝕊¹ stored as Fourier coefficients c_k, |k| ≤ M.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierFunction {
    modes: usize,
    /// Index i holds the coefficient of e^{2πi(i−M)x}; length 2M+1.
    coeffs: Vec<Complex64>,
}

impl FourierFunction {
    /// Builds from a full coefficient slice (index i ↔ mode i−M), symmetrizing
    /// c_k ← (c_k + conj(c_{−k}))/2. Asymmetry beyond 1e-10 is an error.
    pub fn from_coeffs(modes: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * modes + 1 {
            return Err(Error::ModeMismatch {
                left: coeffs.len(),
                right: 2 * modes + 1,
            });
        }
        let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let mut asym = 0.0f64;
        let mut out = coeffs.clone();
        let m = modes as isize;
        for k in 0..=m {
            let ip = (m + k) as usize;
            let im = (m - k) as usize;
            let sym = 0.5 * (coeffs[ip] + coeffs[im].conj());
            asym = asym.max((coeffs[ip] - sym).norm());
            out[ip] = sym;
            out[im] = sym.conj();
        }
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NotReal {
                asymmetry: asym / scale,
                tol: HERMITIAN_TOL,
            });
        }
        Ok(Self { modes, coeffs: out })
    }

    pub fn zero(modes: usize) -> Self {
        Self {
            modes,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * modes + 1],
        }
    }

    pub fn constant(modes: usize, value: f64) -> Self {
        let mut f = Self::zero(modes);
        f.coeffs[modes] = Complex64::new(value, 0.0);
        f
    }

    /// a·cos(2πkx) + b·sin(2πkx).
    pub fn harmonic(modes: usize, k: usize, cos_amp: f64, sin_amp: f64) -> Self {
        assert!(k >= 1 && k <= modes, "harmonic index out of range");
        let mut f = Self::zero(modes);
        let c = Complex64::new(0.5 * cos_amp, -0.5 * sin_amp);
        f.coeffs[modes + k] = c;
        f.coeffs[modes - k] = c.conj();
        f
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Coefficient of e^{2πikx}; zero outside the stored band.
    pub fn coeff(&self, k: isize) -> Complex64 {
        let m = self.modes as isize;
        if k.abs() > m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + m) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// ∫ f dm = c_0 (real by symmetry).
    pub fn mean(&self) -> f64 {
        self.coeffs[self.modes].re
    }

    /// Forces ∫ f dm to the given value.
    pub fn set_mean(&mut self, value: f64) {
        self.coeffs[self.modes] = Complex64::new(value, 0.0);
    }

    /// L² norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let mut acc = self.coeffs[self.modes].re;
        let w = Complex64::from_polar(1.0, TAU * x);
        let mut wk = w;
        for k in 1..=self.modes {
            acc += 2.0 * (self.coeffs[self.modes + k] * wk).re;
            wk *= w;
        }
        acc
    }

    /// Values on the uniform grid x_q = q/p.
    pub fn sample(&self, p: usize) -> Vec<f64> {
        let m = self.modes;
        let mut out = vec![0.0; p];
        for (q, v) in out.iter_mut().enumerate() {
            *v = self.evaluate(q as f64 / p as f64);
        }
        // evaluate() drifts ~M·eps via the rotation recurrence; fine at M ≤ few hundred
        let _ = m;
        out
    }

    /// Discrete-Fourier interpolant of uniform-grid samples truncated to |k| ≤ M.
    /// Exact for trigonometric polynomials of degree ≤ M when P ≥ 2M+1.
    pub fn project(samples: &[f64], modes: usize) -> Result<Self> {
        let p = samples.len();
        if p < 2 * modes + 1 {
            return Err(Error::Aliasing { samples: p, modes });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * modes + 1];
        for (q, &s) in samples.iter().enumerate() {
            let w = Complex64::from_polar(1.0, -TAU * q as f64 / p as f64);
            // run k = 0..M and mirror; renormalize the rotation every 64 steps
            let mut wk = Complex64::new(1.0, 0.0);
            for k in 0..=modes {
                coeffs[modes + k] += s * wk;
                if k < modes {
                    wk *= w;
                    if (k + 1) % 64 == 0 {
                        wk = Complex64::from_polar(1.0, -TAU * q as f64 * (k + 1) as f64 / p as f64);
                    }
                }
            }
        }
        let inv = 1.0 / p as f64;
        for k in 0..=modes {
            coeffs[modes + k] *= inv;
            coeffs[modes - k] = coeffs[modes + k].conj();
        }
        Self::from_coeffs(modes, coeffs)
    }

    /// Projects a closure by sampling it on a default oversampled grid.
    pub fn project_fn(modes: usize, quad: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let p = quad.max(2 * modes + 1);
        let samples: Vec<f64> = (0..p).map(|q| f(q as f64 / p as f64)).collect();
        Self::project(&samples, modes)
    }

    /// j-th spectral derivative: c_k ← (2πik)^j c_k.
    pub fn derivative(&self, j: u32) -> Self {
        let mut out = self.clone();
        let m = self.modes as isize;
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = i as isize - m;
            let factor = Complex64::new(0.0, TAU * k as f64).powu(j);
            *c *= factor;
        }
        out
    }

    /// W^{ℓ,1} norm: Σ_{j≤ℓ} (1/Q) Σ_q |f^{(j)}(x_q)| on the uniform Q-grid.
    pub fn sobolev_norm(&self, ell: u32, quad: usize) -> f64 {
        let q = quad.max(2 * self.modes + 1);
        let mut total = 0.0;
        let mut d = self.clone();
        for j in 0..=ell {
            if j > 0 {
                d = d.derivative(1);
            }
            total += d.sample(q).iter().map(|v| v.abs()).sum::<f64>() / q as f64;
        }
        total
    }

    /// L¹ norm (W^{0,1}).
    pub fn l1_norm(&self, quad: usize) -> f64 {
        self.sobolev_norm(0, quad)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch {
                left: self.modes,
                right: other.modes,
            });
        }
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product, projected back to the larger band with 3/2
    /// oversampling against aliasing.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let m = self.modes.max(other.modes);
        let p = 3 * (2 * m + 1);
        let a = self.sample(p);
        let b = other.sample(p);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self::project(&prod, m)
    }

    /// ∫ f·g dm via Parseval.
    pub fn inner(&self, other: &Self) -> f64 {
        let m = self.modes.min(other.modes) as isize;
        let mut acc = 0.0;
        for k in -m..=m {
            acc += (self.coeff(k) * other.coeff(k).conj()).re;
        }
        acc
    }

    /// Truncates or zero-pads to a new mode count.
    pub fn resize(&self, modes: usize) -> Self {
        let mut out = Self::zero(modes);
        let m = modes.min(self.modes) as isize;
        for k in -m..=m {
            let i = (k + modes as isize) as usize;
            out.coeffs[i] = self.coeff(k);
        }
        out
    }

    /// Random function with smoothly decaying spectrum, normalized to unit
    /// W^{ℓ,1} norm; mean-zero when `mean_zero` is set.
    pub fn random_unit(
        modes: usize,
        ell: u32,
        quad: usize,
        mean_zero: bool,
        rng: &mut impl Rng,
    ) -> Self {
        let mut f = Self::zero(modes);
        for k in 1..=modes {
            let decay = 1.0 / (1.0 + k as f64).powi(ell as i32 + 1);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay;
            f.coeffs[modes + k] = c;
            f.coeffs[modes - k] = c.conj();
        }
        if !mean_zero {
            f.coeffs[modes] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        }
        let n = f.sobolev_norm(ell, quad);
        if n > 0.0 {
            f = f.scale(1.0 / n);
        }
        f
    }
}
