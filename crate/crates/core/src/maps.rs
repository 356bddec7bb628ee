//! Parameterized expanding circle maps and random driving orbits.
//!
//! A [`ParamCircleMap`] is a family T(ε,·) of degree-d circle maps given
//! through a lift and closed-form derivative callables in x and ε. Every
//! construction cross-checks the callables against central finite differences
//! and verifies lift periodicity, so transcription errors in a derivative
//! formula fail fast.
//!
//! A [`DrivingOrbit`] is a finite two-sided window of fiber maps sampled from
//! a driving law (fixed periodic, i.i.d., or Markov), reproducible from a
//! seed. Diagnostics: per-fiber minimal slopes λ_{ω,ε} with the mean of
//! log λ certifying expansion on average, and covering times of arcs.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

const TAU: f64 = 2.0 * PI;

type MapFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A C^r family (ε, x) ↦ T(ε, x) of circle maps with closed-form derivatives.
pub struct ParamCircleMap {
    name: String,
    degree: u32,
    smoothness_order: u32,
    eps_range: (f64, f64),
    lift: MapFn,
    dx: [MapFn; 4],
    de: MapFn,
    dee: MapFn,
    dedx: MapFn,
}

impl std::fmt::Debug for ParamCircleMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParamCircleMap")
            .field("name", &self.name)
            .field("degree", &self.degree)
            .field("eps_range", &self.eps_range)
            .finish()
    }
}

#[allow(clippy::too_many_arguments)]
fn map_from_closures(
    name: impl Into<String>,
    degree: u32,
    smoothness_order: u32,
    eps_range: (f64, f64),
    lift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    dx1: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    dx2: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    dx3: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    dx4: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    de: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    dee: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    dedx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> Result<ParamCircleMap> {
    let map = ParamCircleMap {
        name: name.into(),
        degree,
        smoothness_order,
        eps_range,
        lift: Arc::new(lift),
        dx: [
            Arc::new(dx1),
            Arc::new(dx2),
            Arc::new(dx3),
            Arc::new(dx4),
        ],
        de: Arc::new(de),
        dee: Arc::new(dee),
        dedx: Arc::new(dedx),
    };
    map.validate()?;
    Ok(map)
}

impl ParamCircleMap {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn smoothness_order(&self) -> u32 {
        self.smoothness_order
    }

    pub fn eps_range(&self) -> (f64, f64) {
        self.eps_range
    }

    /// Lift value T(ε, x) with lift(ε, x+1) = lift(ε, x) + degree.
    pub fn lift(&self, eps: f64, x: f64) -> f64 {
        (self.lift)(eps, x)
    }

    /// T(ε, x) reduced mod 1.
    pub fn value(&self, eps: f64, x: f64) -> f64 {
        self.lift(eps, x).rem_euclid(1.0)
    }

    /// ∂ₓ^order T for order in 1..=4.
    pub fn x_derivative(&self, order: u32, eps: f64, x: f64) -> f64 {
        assert!(
            (1..=4).contains(&order),
            "x-derivative order {order} out of range"
        );
        (self.dx[(order - 1) as usize])(eps, x)
    }

    pub fn eps_derivative(&self, eps: f64, x: f64) -> f64 {
        (self.de)(eps, x)
    }

    pub fn eps2_derivative(&self, eps: f64, x: f64) -> f64 {
        (self.dee)(eps, x)
    }

    pub fn mixed_derivative(&self, eps: f64, x: f64) -> f64 {
        (self.dedx)(eps, x)
    }

    /// min over x of T'(ε, ·): coarse grid plus golden-section refinement on
    /// the minimizing cell, to 1e-10 in x.
    pub fn min_slope(&self, eps: f64, grid: usize) -> f64 {
        let g = grid.max(256);
        let mut best_i = 0usize;
        let mut best = f64::INFINITY;
        for i in 0..g {
            let v = self.x_derivative(1, eps, i as f64 / g as f64);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let a = (best_i as f64 - 1.0) / g as f64;
        let b = (best_i as f64 + 1.0) / g as f64;
        let refined = golden_min(|x| self.x_derivative(1, eps, x), a, b, 1e-10);
        refined.min(best)
    }

    /// C^r-norm surrogate: sup over a grid of all stored derivatives.
    pub fn cr_norm_surrogate(&self, eps: f64, grid: usize) -> f64 {
        let g = grid.max(256);
        let mut k = 0.0f64;
        for i in 0..g {
            let x = i as f64 / g as f64;
            for order in 1..=4 {
                k = k.max(self.x_derivative(order, eps, x).abs());
            }
            k = k.max(self.eps_derivative(eps, x).abs());
            k = k.max(self.eps2_derivative(eps, x).abs());
            k = k.max(self.mixed_derivative(eps, x).abs());
        }
        k.max(1.0)
    }

    /// Construction-time checks: lift periodicity, finite-difference agreement
    /// of every derivative callable, and min |T'| > 0 across the ε-range.
    fn validate(&self) -> Result<()> {
        let name = self.name.clone();
        let fail = |reason: String| Error::MapValidation {
            name: name.clone(),
            reason,
        };
        let (elo, ehi) = self.eps_range;
        if !(elo < ehi && elo <= 0.0 && 0.0 <= ehi) {
            return Err(fail(format!("eps range ({elo}, {ehi}) must contain 0")));
        }

        // periodicity of the lift
        for i in 0..64 {
            let x = i as f64 / 64.0;
            for &eps in &[elo, 0.0, ehi] {
                let resid = (self.lift(eps, x + 1.0) - self.lift(eps, x)) - self.degree as f64;
                if resid.abs() > 1e-10 {
                    return Err(fail(format!(
                        "lift periodicity residual {resid:.3e} at (eps={eps}, x={x})"
                    )));
                }
            }
        }

        // derivative callables vs central differences at random points
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
        let h = 1e-5;
        let margin = 2.0 * h;
        for _ in 0..64 {
            let x: f64 = rng.gen();
            let eps = if ehi - elo > 2.0 * margin {
                rng.gen_range(elo + margin..ehi - margin)
            } else {
                0.0
            };
            let checks: [(&str, f64, f64); 7] = [
                (
                    "dx",
                    self.x_derivative(1, eps, x),
                    central(|y| self.lift(eps, y), x, h),
                ),
                (
                    "dxx",
                    self.x_derivative(2, eps, x),
                    central(|y| self.x_derivative(1, eps, y), x, h),
                ),
                (
                    "dxxx",
                    self.x_derivative(3, eps, x),
                    central(|y| self.x_derivative(2, eps, y), x, h),
                ),
                (
                    "dx4",
                    self.x_derivative(4, eps, x),
                    central(|y| self.x_derivative(3, eps, y), x, h),
                ),
                (
                    "de",
                    self.eps_derivative(eps, x),
                    central(|e| self.lift(e, x), eps, h),
                ),
                (
                    "dee",
                    self.eps2_derivative(eps, x),
                    central(|e| self.eps_derivative(e, x), eps, h),
                ),
                (
                    "dedx",
                    self.mixed_derivative(eps, x),
                    central(|e| self.x_derivative(1, e, x), eps, h),
                ),
            ];
            for (label, analytic, fd) in checks {
                let scale = analytic.abs().max(1.0);
                if (analytic - fd).abs() > 1e-6 * scale {
                    return Err(fail(format!(
                        "{label} disagrees with finite differences at (eps={eps:.4}, x={x:.4}): \
                         analytic {analytic:.8e} vs fd {fd:.8e}"
                    )));
                }
            }
        }

        // local diffeomorphism across the admissible ε-range
        for &eps in &[elo, 0.5 * elo, 0.0, 0.5 * ehi, ehi] {
            let lam = self.min_slope(eps, 512);
            if lam <= 1e-8 {
                return Err(fail(format!(
                    "min |T'| = {lam:.3e} at eps = {eps} (not a local diffeomorphism)"
                )));
            }
        }
        Ok(())
    }
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Golden-section minimization on [a, b] to the given x-tolerance.
fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// Builds one of the built-in families.
///
/// * `identity` — T(ε,x) = x.
/// * `additive` — T(ε,x) = kx + Σ_j (sin_j·sin + cos_j·cos)(2πjx) + ε·d(x)
///   with d from `d_sin1`, `d_cos1`, `d_sin2`, `d_cos2`; admissible |ε| ≤ eps0.
/// * `linear_eps2` — T(ε,x) = βx + ε²·d_amp·sin(2πβx), the ε²-perturbed
///   linear family.
/// * `doubling_composed` — T(ε,x) = D_ε(dx) with D_ε(y) = y − ε·amp·sin(2πfy)/(2πf),
///   i.e. the composition of a degree-d linear map with the flow of −∫ψ for
///   ψ = amp·cos(2πfy).
pub fn builtin_family(name: &str, params: &BTreeMap<String, f64>) -> Result<Arc<ParamCircleMap>> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    let bad = |reason: String| Error::BadMapParams {
        family: name.to_string(),
        reason,
    };
    let map = match name {
        "identity" => map_from_closures(
            "identity",
            1,
            4,
            (-1.0, 1.0),
            |_, x| x,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )?,
        "additive" => {
            let k = get("degree", 2.0);
            if k < 1.0 || k.fract() != 0.0 {
                return Err(bad(format!("degree {k} must be a positive integer")));
            }
            let eps0 = get("eps0", 0.5);
            if eps0 <= 0.0 {
                return Err(bad("eps0 must be positive".into()));
            }
            let base = [get("sin1", 0.0), get("cos1", 0.0), get("sin2", 0.0), get("cos2", 0.0)];
            let pert = [
                get("d_sin1", 0.0),
                get("d_cos1", 0.0),
                get("d_sin2", 0.0),
                get("d_cos2", 0.0),
            ];
            // reject parameters with λ = min T' − ε₀·max|d'| ≤ 0 up front
            let lam_base = k - TAU * (base[0].abs() + base[1].abs())
                - 2.0 * TAU * (base[2].abs() + base[3].abs());
            let dmax = TAU * (pert[0].abs() + pert[1].abs())
                + 2.0 * TAU * (pert[2].abs() + pert[3].abs());
            if lam_base - eps0 * dmax <= 0.0 {
                return Err(bad(format!(
                    "λ − ε₀·max|d'| = {:.4} ≤ 0: not expanding on the ε-range",
                    lam_base - eps0 * dmax
                )));
            }
            let trig = move |x: f64, c: &[f64; 4], order: u32| -> f64 {
                // order-th derivative of c0 sin(2πx)+c1 cos(2πx)+c2 sin(4πx)+c3 cos(4πx)
                let mut acc = 0.0;
                for (j, w) in [(1.0f64, [c[0], c[1]]), (2.0, [c[2], c[3]])] {
                    let om = TAU * j;
                    let (s, co) = (om * x).sin_cos();
                    let (fs, fc) = match order % 4 {
                        0 => (s, co),
                        1 => (co, -s),
                        2 => (-s, -co),
                        _ => (-co, s),
                    };
                    acc += om.powi(order as i32) * (w[0] * fs + w[1] * fc);
                }
                acc
            };
            map_from_closures(
                format!("additive-{k}"),
                k as u32,
                4,
                (-eps0, eps0),
                move |e, x| k * x + trig(x, &base, 0) + e * trig(x, &pert, 0),
                move |e, x| k + trig(x, &base, 1) + e * trig(x, &pert, 1),
                move |e, x| trig(x, &base, 2) + e * trig(x, &pert, 2),
                move |e, x| trig(x, &base, 3) + e * trig(x, &pert, 3),
                move |e, x| trig(x, &base, 4) + e * trig(x, &pert, 4),
                move |_, x| trig(x, &pert, 0),
                |_, _| 0.0,
                move |_, x| trig(x, &pert, 1),
            )?
        }
        "linear_eps2" => {
            let beta = get("beta", 2.0);
            if beta < 1.0 || beta.fract() != 0.0 {
                return Err(bad(format!("beta {beta} must be a positive integer")));
            }
            let amp = get("d_amp", 0.0);
            let eps0 = get("eps0", 0.5);
            let om = TAU * beta;
            if beta - eps0 * eps0 * amp.abs() * om * beta <= 0.0 {
                return Err(bad("perturbation destroys expansion on the ε-range".into()));
            }
            map_from_closures(
                format!("linear-eps2-{beta}"),
                beta as u32,
                4,
                (-eps0, eps0),
                move |e, x| beta * x + e * e * amp * (om * x).sin(),
                move |e, x| beta + e * e * amp * om * beta * (om * x).cos(),
                move |e, x| -e * e * amp * om.powi(2) * beta * beta * (om * x).sin(),
                move |e, x| -e * e * amp * om.powi(3) * beta.powi(3) * (om * x).cos(),
                move |e, x| e * e * amp * om.powi(4) * beta.powi(4) * (om * x).sin(),
                move |e, x| 2.0 * e * amp * (om * x).sin(),
                move |_, x| 2.0 * amp * (om * x).sin(),
                move |e, x| 2.0 * e * amp * om * beta * (om * x).cos(),
            )?
        }
        "doubling_composed" => {
            let d = get("degree", 2.0);
            if d < 1.0 || d.fract() != 0.0 {
                return Err(bad(format!("degree {d} must be a positive integer")));
            }
            let amp = get("amp", 1.0);
            let freq = get("freq", 1.0);
            if freq < 1.0 || freq.fract() != 0.0 {
                return Err(bad(format!("freq {freq} must be a positive integer")));
            }
            let eps0 = get("eps0", 0.5);
            if eps0 * amp.abs() >= 1.0 {
                return Err(bad("|ε·amp| must stay below 1 for D_ε to be a diffeomorphism".into()));
            }
            let om = TAU * freq;
            // T(ε,x) = d·x − (ε·amp/ω)·sin(ω d x), ω = 2π·freq
            map_from_closures(
                format!("doubling-composed-{d}"),
                d as u32,
                4,
                (-eps0, eps0),
                move |e, x| d * x - e * amp / om * (om * d * x).sin(),
                move |e, x| d * (1.0 - e * amp * (om * d * x).cos()),
                move |e, x| e * amp * om * d * d * (om * d * x).sin(),
                move |e, x| e * amp * om * om * d.powi(3) * (om * d * x).cos(),
                move |e, x| -e * amp * om.powi(3) * d.powi(4) * (om * d * x).sin(),
                move |_, x| -amp / om * (om * d * x).sin(),
                |_, _| 0.0,
                move |_, x| -amp * d * (om * d * x).cos(),
            )?
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    Ok(Arc::new(map))
}

/// Named map registry resolved by orbit assignments and CLI configs.
pub type MapRegistry = BTreeMap<String, Arc<ParamCircleMap>>;

/// Registry with the convenience entries `doubling` (unperturbed degree-2
/// linear map) and `identity`.
pub fn base_registry() -> MapRegistry {
    let mut reg = MapRegistry::new();
    let mut p = BTreeMap::new();
    p.insert("degree".to_string(), 2.0);
    p.insert("amp".to_string(), 0.0);
    reg.insert(
        "doubling".to_string(),
        builtin_family("doubling_composed", &p).expect("doubling map is valid"),
    );
    reg.insert(
        "identity".to_string(),
        builtin_family("identity", &BTreeMap::new()).expect("identity map is valid"),
    );
    reg
}

/// Driving law for orbit sampling.
#[derive(Debug, Clone)]
pub enum OrbitLaw {
    /// Deterministic periodic assignment.
    Fixed { sequence: Vec<String> },
    /// Independent draws from a probability vector over an alphabet.
    Iid { alphabet: Vec<String>, probs: Vec<f64> },
    /// Markov chain over an alphabet; the window is sampled left to right
    /// starting from `start`.
    Markov {
        alphabet: Vec<String>,
        transition: Vec<Vec<f64>>,
        start: Vec<f64>,
    },
}

impl OrbitLaw {
    pub fn family_tag(&self) -> &'static str {
        match self {
            OrbitLaw::Fixed { .. } => "fixed",
            OrbitLaw::Iid { .. } => "iid",
            OrbitLaw::Markov { .. } => "markov",
        }
    }
}

/// A two-sided window of fiber maps: indices n ∈ [lo, hi].
#[derive(Debug, Clone)]
pub struct DrivingOrbit {
    lo: i64,
    hi: i64,
    fibers: Vec<Arc<ParamCircleMap>>,
    seed: u64,
    family: String,
}

impl DrivingOrbit {
    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn contains(&self, lo: i64, hi: i64) -> bool {
        self.lo <= lo && hi <= self.hi
    }

    pub fn fiber(&self, n: i64) -> Result<&Arc<ParamCircleMap>> {
        if n < self.lo || n > self.hi {
            return Err(Error::WindowExceeded {
                lo: self.lo,
                hi: self.hi,
                need_lo: n,
                need_hi: n,
            });
        }
        Ok(&self.fibers[(n - self.lo) as usize])
    }

    /// The shifted orbit σ^k ω: fiber(n) of the result equals fiber(n+k) here.
    pub fn shift(&self, k: i64) -> DrivingOrbit {
        DrivingOrbit {
            lo: self.lo - k,
            hi: self.hi - k,
            fibers: self.fibers.clone(),
            seed: self.seed,
            family: self.family.clone(),
        }
    }

    /// Builds an orbit directly from a fiber list centered so indices run in
    /// [-(len-1)/2, len/2]; mostly for tests and the suspension cocycle.
    pub fn from_fibers(fibers: Vec<Arc<ParamCircleMap>>, lo: i64, tag: &str) -> Self {
        let hi = lo + fibers.len() as i64 - 1;
        DrivingOrbit {
            lo,
            hi,
            fibers,
            seed: 0,
            family: tag.to_string(),
        }
    }
}

fn check_stochastic_vector(p: &[f64]) -> Result<()> {
    if p.iter().any(|&v| v < 0.0) {
        return Err(Error::BadProbabilities {
            sum: f64::NAN,
        });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::BadProbabilities { sum });
    }
    Ok(())
}

fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Samples a two-sided window ω ↦ (T_{σⁿω})_{|n|≤N}; a deterministic function
/// of (seed, N, law).
pub fn sample_orbit(
    law: &OrbitLaw,
    registry: &MapRegistry,
    seed: u64,
    n_window: i64,
) -> Result<DrivingOrbit> {
    let resolve = |tag: &String| -> Result<Arc<ParamCircleMap>> {
        registry
            .get(tag)
            .cloned()
            .ok_or_else(|| Error::UnknownFamily(tag.clone()))
    };
    let lo = -n_window;
    let hi = n_window;
    let len = (2 * n_window + 1) as usize;
    let fibers: Vec<Arc<ParamCircleMap>> = match law {
        OrbitLaw::Fixed { sequence } => {
            if sequence.is_empty() {
                return Err(Error::Invalid("fixed law needs a nonempty sequence".into()));
            }
            let maps: Vec<_> = sequence.iter().map(resolve).collect::<Result<_>>()?;
            (lo..=hi)
                .map(|n| maps[n.rem_euclid(sequence.len() as i64) as usize].clone())
                .collect()
        }
        OrbitLaw::Iid { alphabet, probs } => {
            if alphabet.len() != probs.len() {
                return Err(Error::Invalid("alphabet/probs length mismatch".into()));
            }
            check_stochastic_vector(probs)?;
            let maps: Vec<_> = alphabet.iter().map(resolve).collect::<Result<_>>()?;
            (lo..=hi)
                .map(|n| {
                    // per-index stream so fiber(n) does not depend on N
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(n as u64);
                    let u: f64 = rng.gen();
                    maps[pick(probs, u)].clone()
                })
                .collect()
        }
        OrbitLaw::Markov {
            alphabet,
            transition,
            start,
        } => {
            if alphabet.len() != transition.len() || alphabet.len() != start.len() {
                return Err(Error::Invalid("alphabet/transition/start size mismatch".into()));
            }
            check_stochastic_vector(start)?;
            for (row, t) in transition.iter().enumerate() {
                if t.len() != alphabet.len() {
                    return Err(Error::Invalid(format!("transition row {row} has wrong length")));
                }
                let sum: f64 = t.iter().sum();
                if t.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::BadTransitionMatrix { row, sum });
                }
            }
            let maps: Vec<_> = alphabet.iter().map(resolve).collect::<Result<_>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = pick(start, rng.gen());
            let mut out = Vec::with_capacity(len);
            out.push(maps[state].clone());
            for _ in 1..len {
                state = pick(&transition[state], rng.gen());
                out.push(maps[state].clone());
            }
            out
        }
    };
    Ok(DrivingOrbit {
        lo,
        hi,
        fibers,
        seed,
        family: law.family_tag().to_string(),
    })
}

/// Per-fiber expansion diagnostics over an orbit window.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    /// min |T'(ε, ·)| per fiber, indexed from the window's lower bound.
    pub lambda_min_per_fiber: Vec<f64>,
    /// Arithmetic mean of log λ over the window.
    pub mean_log_lambda: f64,
    /// C^r-norm surrogates per fiber.
    pub k_per_fiber: Vec<f64>,
    /// mean_log_lambda > 0.
    pub expanding: bool,
}

pub fn expansion_report(orbit: &DrivingOrbit, eps: f64, grid: usize) -> Result<ExpansionReport> {
    let grid = grid.max(256);
    let (lo, hi) = orbit.bounds();
    let mut lambda = Vec::with_capacity((hi - lo + 1) as usize);
    let mut ks = Vec::with_capacity(lambda.capacity());
    for n in lo..=hi {
        let map = orbit.fiber(n)?;
        let lam = map.min_slope(eps, grid);
        if lam <= 1e-8 {
            return Err(Error::DegenerateMap { fiber: n, lambda: lam });
        }
        lambda.push(lam);
        ks.push(map.cr_norm_surrogate(eps, grid));
    }
    let mean_log = lambda.iter().map(|l| l.ln()).sum::<f64>() / lambda.len() as f64;
    Ok(ExpansionReport {
        lambda_min_per_fiber: lambda,
        mean_log_lambda: mean_log,
        k_per_fiber: ks,
        expanding: mean_log > 0.0,
    })
}

/// Covering time of an arc: the least n with T^n(J) ⊇ 𝕊¹, computed by pushing
/// lifted endpoints forward from fiber `start`.
#[derive(Debug, Clone, Copy)]
pub struct CoveringResult {
    pub n_c: usize,
    /// False when the cap was reached before the image covered the circle.
    pub covered: bool,
}

pub fn covering_time(
    orbit: &DrivingOrbit,
    eps: f64,
    arc: (f64, f64),
    start: i64,
    n_max: usize,
) -> Result<CoveringResult> {
    let (a, b) = arc;
    if !(b > a && b - a <= 1.0) {
        return Err(Error::BadInterval(a, b));
    }
    // float slack so arcs assembled from rounded endpoints still count
    const FULL: f64 = 1.0 - 1e-9;
    let mut lo = a;
    let mut hi = b;
    for n in 0..n_max {
        if hi - lo >= FULL {
            return Ok(CoveringResult { n_c: n, covered: true });
        }
        let map = orbit.fiber(start + n as i64)?;
        // monotone lift: image of [lo, hi] is [T(lo), T(hi)]
        let new_lo = map.lift(eps, lo);
        let new_hi = map.lift(eps, hi);
        lo = new_lo;
        hi = new_hi;
    }
    if hi - lo >= FULL {
        return Ok(CoveringResult { n_c: n_max, covered: true });
    }
    Ok(CoveringResult { n_c: n_max, covered: false })
}
