//! Multivariate formal polynomials in x₁, x₂, … with integer coefficients.
//!
//! These encode the G_{ℓ,j} polynomials that express the ℓ-th derivative of a
//! transfer-operator image through derivatives of the underlying map: the
//! indeterminate x_i stands for the i-th derivative T^{(i)}, and the formal
//! derivative is the linear Leibniz extension of x_j ↦ x_{j+1}.

use std::collections::BTreeMap;
use std::fmt;

/// Monomial exponents over x₁..x_n, trailing zeros trimmed.
type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalPolynomial {
    /// Canonical form: no zero coefficients, monomials keyed in BTreeMap order.
    terms: BTreeMap<Monomial, i64>,
}

/// Which recursion builds the G family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GVariant {
    /// Coefficient (1−2ℓ) on the x₂-term, as printed.
    Paper,
    /// Coefficient −(2ℓ+1), from the quotient rule.
    Corrected,
}

impl GVariant {
    fn x2_coefficient(self, ell: u32) -> i64 {
        match self {
            GVariant::Paper => 1 - 2 * ell as i64,
            GVariant::Corrected => -(2 * ell as i64 + 1),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            GVariant::Paper => "paper",
            GVariant::Corrected => "corrected",
        }
    }
}

impl FormalPolynomial {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(Vec::new(), c);
        }
        Self { terms }
    }

    /// The indeterminate x_j (1-indexed).
    pub fn var(j: usize) -> Self {
        assert!(j >= 1);
        let mut mono = vec![0u32; j];
        mono[j - 1] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(mono, 1);
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, mono: Monomial, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let mono = trim(mono);
        let entry = self.terms.entry(mono.clone()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&mono);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.insert(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: i64) -> Self {
        if c == 0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, &v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let n = ma.len().max(mb.len());
                let mut m = vec![0u32; n];
                for (i, x) in m.iter_mut().enumerate() {
                    *x = ma.get(i).copied().unwrap_or(0) + mb.get(i).copied().unwrap_or(0);
                }
                out.insert(m, ca * cb);
            }
        }
        out
    }

    /// Formal derivative: (x_j)' = x_{j+1} extended by linearity and Leibniz.
    pub fn formal_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (mono, &coeff) in &self.terms {
            for (i, &e) in mono.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut m = mono.clone();
                if m.len() < i + 2 {
                    m.resize(i + 2, 0);
                }
                m[i] -= 1;
                m[i + 1] += 1;
                out.insert(m, coeff * e as i64);
            }
        }
        out
    }

    /// Evaluates at x_i = args[i-1]; missing arguments default to 0.
    pub fn eval(&self, args: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(mono, &c)| {
                let mut v = c as f64;
                for (i, &e) in mono.iter().enumerate() {
                    if e > 0 {
                        v *= args.get(i).copied().unwrap_or(0.0).powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Evaluates the nonnegative majorant: coefficients replaced by |c|.
    /// A valid bound for |P(x)| whenever the arguments are nonnegative.
    pub fn eval_abs(&self, args: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(mono, &c)| {
                let mut v = c.unsigned_abs() as f64;
                for (i, &e) in mono.iter().enumerate() {
                    if e > 0 {
                        v *= args.get(i).copied().unwrap_or(0.0).powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Highest indeterminate index that occurs.
    pub fn max_var(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }
}

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

impl fmt::Display for FormalPolynomial {
    /// Deterministic term order (monomial BTreeMap order), e.g. `-x2^2 + x1*x3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, &c) in &self.terms {
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            let mag = c.unsigned_abs();
            let factors: Vec<String> = mono
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// The family G_{ℓ,j}, j = 0..ℓ, built by the recursion
/// G_{ℓ+1,0} = c_ℓ·x₂·G_{ℓ,0} + x₁·G_{ℓ,0}',
/// G_{ℓ+1,k} = c_ℓ·x₂·G_{ℓ,k} + x₁·(G_{ℓ,k}' + G_{ℓ,k−1}),
/// G_{ℓ+1,ℓ+1} = x₁^{ℓ+1},
/// where c_ℓ is the variant's x₂-coefficient and G_{0,0} = 1.
pub fn g_polynomials(ell: u32, variant: GVariant) -> Vec<FormalPolynomial> {
    let mut row = vec![FormalPolynomial::constant(1)];
    let x1 = FormalPolynomial::var(1);
    let x2 = FormalPolynomial::var(2);
    for l in 0..ell {
        let c = variant.x2_coefficient(l);
        let mut next = Vec::with_capacity(l as usize + 2);
        for k in 0..=(l as usize + 1) {
            let p = if k == l as usize + 1 {
                // x1^{l+1}
                let mut p = FormalPolynomial::constant(1);
                for _ in 0..=l {
                    p = p.mul(&x1);
                }
                p
            } else if k == 0 {
                x2.mul(&row[0])
                    .scale(c)
                    .add(&x1.mul(&row[0].formal_derivative()))
            } else {
                x2.mul(&row[k])
                    .scale(c)
                    .add(&x1.mul(&row[k].formal_derivative().add(&row[k - 1])))
            };
            next.push(p);
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn derivative_base_cases() {
        assert!(FormalPolynomial::constant(1).formal_derivative().is_zero());
        let x3 = FormalPolynomial::var(3).formal_derivative();
        assert_eq!(x3, FormalPolynomial::var(4));
    }

    #[test]
    fn derivative_printed_example() {
        // (-x2^2 + x1 x3)' = -x2 x3 + x1 x4
        let x = |j| FormalPolynomial::var(j);
        let p = x(2).mul(&x(2)).scale(-1).add(&x(1).mul(&x(3)));
        let d = p.formal_derivative();
        let expect = x(2).mul(&x(3)).scale(-1).add(&x(1).mul(&x(4)));
        assert_eq!(d, expect);
        assert_eq!(d.to_string(), "-x2*x3 + x1*x4");
    }

    #[test]
    fn g_top_coefficient_is_power_of_x1() {
        for variant in [GVariant::Paper, GVariant::Corrected] {
            for ell in 1..=4u32 {
                let g = g_polynomials(ell, variant);
                assert_eq!(g.len(), ell as usize + 1);
                let mut x1p = FormalPolynomial::constant(1);
                for _ in 0..ell {
                    x1p = x1p.mul(&FormalPolynomial::var(1));
                }
                assert_eq!(g[ell as usize], x1p);
            }
        }
    }

    #[test]
    fn g_level_one() {
        let paper = g_polynomials(1, GVariant::Paper);
        assert_eq!(paper[0], FormalPolynomial::var(2));
        assert_eq!(paper[1], FormalPolynomial::var(1));
        let corr = g_polynomials(1, GVariant::Corrected);
        assert_eq!(corr[0], FormalPolynomial::var(2).scale(-1));
    }

    #[test]
    fn g_level_two_corrected_golden() {
        // frozen from the quotient-rule oracle: the variant that passes the
        // transfer-derivative identity check in ly::verify_crim_identity
        let g = g_polynomials(2, GVariant::Corrected);
        assert_eq!(g[0].to_string(), "3*x2^2 - x1*x3");
        assert_eq!(g[1].to_string(), "-3*x1*x2");
        assert_eq!(g[2].to_string(), "x1^2");
        let g3 = g_polynomials(3, GVariant::Corrected);
        assert_eq!(g3[0].to_string(), "-15*x2^3 + 10*x1*x2*x3 - x1^2*x4");
        assert_eq!(g3[1].to_string(), "15*x1*x2^2 - 4*x1^2*x3");
        assert_eq!(g3[2].to_string(), "-6*x1^2*x2");
    }

    #[test]
    fn g_affine_degeneration() {
        // with x_i = 0 for i ≥ 2, G_{ℓ,j} = 0 for j < ℓ and (x1)^ℓ at j = ℓ
        for variant in [GVariant::Paper, GVariant::Corrected] {
            let g = g_polynomials(3, variant);
            let args = [2.0, 0.0, 0.0, 0.0];
            for (j, p) in g.iter().enumerate() {
                let v = p.eval(&args);
                if j < 3 {
                    assert_eq!(v, 0.0);
                } else {
                    assert_eq!(v, 8.0);
                }
            }
        }
    }

    fn arb_poly() -> impl Strategy<Value = FormalPolynomial> {
        proptest::collection::vec((proptest::collection::vec(0u32..3, 0..3), -4i64..5), 0..4)
            .prop_map(|terms| {
                let mut p = FormalPolynomial::zero();
                for (mono, c) in terms {
                    p = p.add(&{
                        let mut q = FormalPolynomial::constant(c);
                        for (i, &e) in mono.iter().enumerate() {
                            for _ in 0..e {
                                q = q.mul(&FormalPolynomial::var(i + 1));
                            }
                        }
                        q
                    });
                }
                p
            })
    }

    proptest! {
        #[test]
        fn leibniz_rule(p in arb_poly(), q in arb_poly()) {
            let lhs = p.mul(&q).formal_derivative();
            let rhs = p.formal_derivative().mul(&q).add(&p.mul(&q.formal_derivative()));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn derivative_additive(p in arb_poly(), q in arb_poly()) {
            let lhs = p.add(&q).formal_derivative();
            let rhs = p.formal_derivative().add(&q.formal_derivative());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
