//! Fourier–Galerkin discretization of fiber transfer operators.
//!
//! The matrix of 𝓛 on e_k(x) = e^{2πikx}, |k| ≤ M, is assembled through the
//! Koopman adjoint quadrature A[k,j] = (1/Q) Σ_q e^{2πij x_q} e^{−2πik T(x_q)}
//! on a uniform Q-grid, the discrete counterpart of ⟨𝓛 e_j, e_k⟩ =
//! ⟨e_j, e_{−k}∘T⟩. No inverse branches are needed, the identity fiber is
//! legal, and the assembly is spectrally accurate for analytic maps.
//! Compositions along an orbit multiply matrices left-to-right in time order
//! and are cached per (fiber, ε, M, Q).

use crate::error::{Error, Result};
use crate::fourier::FourierFunction;
use crate::maps::{DrivingOrbit, ParamCircleMap};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

const TAU: f64 = 2.0 * PI;

/// Galerkin matrix of one fiber's transfer operator.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    modes: usize,
    a: DMatrix<Complex64>,
    map_id: String,
}

impl TransferMatrix {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn map_id(&self) -> &str {
        &self.map_id
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn identity(modes: usize) -> Self {
        let n = 2 * modes + 1;
        TransferMatrix {
            modes,
            a: DMatrix::identity(n, n),
            map_id: "identity".to_string(),
        }
    }

    /// Matrix–vector product in coefficient space, Hermitian-symmetrized.
    pub fn apply(&self, f: &FourierFunction) -> Result<FourierFunction> {
        if f.modes() != self.modes {
            return Err(Error::ModeMismatch {
                left: f.modes(),
                right: self.modes,
            });
        }
        let v = DVector::from_column_slice(f.coeffs());
        let out = &self.a * v;
        FourierFunction::from_coeffs(self.modes, out.as_slice().to_vec())
    }

    /// Left-multiplies by a later fiber: self ← other · self.
    pub fn compose_after(&mut self, later: &TransferMatrix) {
        self.a = &later.a * &self.a;
        self.map_id = format!("{} ∘ {}", later.map_id, self.map_id);
    }
}

/// Assembles the Galerkin matrix of the transfer operator of T(ε, ·).
///
/// Q is clamped to at least 4M+4. Non-expanding maps are legal (the identity
/// fiber is needed by the suspension cocycle).
pub fn assemble(map: &ParamCircleMap, eps: f64, modes: usize, quad: usize) -> TransferMatrix {
    let q = quad.max(4 * modes + 4);
    let n = 2 * modes + 1;
    let m = modes as isize;
    // E_x[q, j] = e^{2πi j x_q},  E_T[q, k] = e^{2πi k T(x_q)}
    let mut e_x = DMatrix::zeros(q, n);
    let mut e_t = DMatrix::zeros(q, n);
    for row in 0..q {
        let x = row as f64 / q as f64;
        let tx = map.value(eps, x);
        for col in 0..n {
            let k = col as isize - m;
            e_x[(row, col)] = Complex64::from_polar(1.0, TAU * k as f64 * x);
            e_t[(row, col)] = Complex64::from_polar(1.0, TAU * k as f64 * tx);
        }
    }
    let a = (e_t.adjoint() * e_x) / Complex64::new(q as f64, 0.0);
    TransferMatrix {
        modes,
        a,
        map_id: format!("{}@eps={eps}", map.name()),
    }
}

/// Cache of per-(fiber, ε, M, Q) matrices; concurrent insertions are
/// idempotent (same key always assembles the same matrix).
#[derive(Default)]
pub struct TransferCache {
    inner: Mutex<HashMap<(i64, u64, usize, usize), Arc<TransferMatrix>>>,
}

impl TransferCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fiber_matrix(
        &self,
        orbit: &DrivingOrbit,
        fiber: i64,
        eps: f64,
        modes: usize,
        quad: usize,
    ) -> Result<Arc<TransferMatrix>> {
        let key = (fiber, eps.to_bits(), modes, quad);
        if let Some(hit) = self.inner.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let map = orbit.fiber(fiber)?;
        let mat = Arc::new(assemble(map, eps, modes, quad));
        let mut guard = self.inner.lock().unwrap();
        Ok(guard.entry(key).or_insert(mat).clone())
    }
}

/// Product 𝓛ⁿ starting at `start`: A_{start+n−1} ⋯ A_{start}; n = 0 gives the
/// identity.
pub fn compose_forward(
    orbit: &DrivingOrbit,
    eps: f64,
    n: usize,
    start: i64,
    modes: usize,
    quad: usize,
    cache: &TransferCache,
) -> Result<TransferMatrix> {
    let mut acc = TransferMatrix::identity(modes);
    for i in 0..n {
        let a = cache.fiber_matrix(orbit, start + i as i64, eps, modes, quad)?;
        acc.compose_after(&a);
    }
    Ok(acc)
}

/// Applies the n-step composition to a function without forming the product
/// matrix.
pub fn apply_forward(
    orbit: &DrivingOrbit,
    eps: f64,
    n: usize,
    start: i64,
    f: &FourierFunction,
    quad: usize,
    cache: &TransferCache,
) -> Result<FourierFunction> {
    let mut g = f.clone();
    for i in 0..n {
        let a = cache.fiber_matrix(orbit, start + i as i64, eps, f.modes(), quad)?;
        g = a.apply(&g)?;
    }
    Ok(g)
}

/// Lower bound on the W^{ℓ,1} operator norm: max of ‖Af‖ over seeded random
/// unit-norm test functions.
pub fn operator_norm_estimate(
    a: &TransferMatrix,
    ell: u32,
    trials: usize,
    quad: usize,
    seed: u64,
) -> f64 {
    let trials = trials.max(16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let f = FourierFunction::random_unit(a.modes(), ell, quad, false, &mut rng);
        if let Ok(g) = a.apply(&f) {
            best = best.max(g.sobolev_norm(ell, quad));
        }
    }
    best
}

/// |⟨Af, φ⟩ − ⟨f, φ∘T⟩|: the quadrature duality defect of an assembled matrix.
pub fn duality_residual(
    map: &ParamCircleMap,
    a: &TransferMatrix,
    eps: f64,
    f: &FourierFunction,
    phi: &FourierFunction,
    quad: usize,
) -> Result<f64> {
    let lhs = a.apply(f)?.inner(phi);
    let q = quad.max(8 * (2 * a.modes() + 1));
    let mut rhs = 0.0;
    for i in 0..q {
        let x = i as f64 / q as f64;
        rhs += f.evaluate(x) * phi.evaluate(map.value(eps, x));
    }
    rhs /= q as f64;
    Ok((lhs - rhs).abs())
}
