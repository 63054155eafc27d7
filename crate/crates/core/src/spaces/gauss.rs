//! Gauss rules from the symmetric tridiagonal Jacobi matrix of the weight.
//!
//! Nodes are the eigenvalues, isolated by Sturm-count bisection; weights are
//! Christoffel numbers `μ0 / Σ_k q_k(x)²` with the orthonormal polynomials `q_k`.

use rug::Float;

use crate::error::{Error, Result};
use crate::weights::gamma::{gamma_float, ln_gamma};

/// Nodes and weights of an `n`-point rule for some weight function.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

pub(crate) fn ln_gamma_f64(x: f64) -> f64 {
    ln_gamma(&Float::with_val(80, x), 80)
        .map(|b| b.value.to_f64())
        .unwrap_or(f64::NAN)
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let o2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if i == 0 { 0.0 } else { o2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if sturm_count(diag, off, m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn rule(diag: Vec<f64>, off: Vec<f64>, ln_mu0: f64) -> GaussRule {
    let nodes = eigenvalues(&diag, &off);
    let n = diag.len();
    let weights = nodes
        .iter()
        .map(|&x| {
            // q_0 = 1, scaled by 1/sqrt(μ0) at the end
            let mut prev = 0.0;
            let mut cur = 1.0;
            let mut s = 1.0;
            let mut scale = 0.0f64;
            for k in 0..n - 1 {
                let next =
                    ((x - diag[k]) * cur - if k > 0 { off[k - 1] * prev } else { 0.0 }) / off[k];
                prev = cur;
                cur = next;
                s += cur * cur;
                if s > 1e200 {
                    s *= 1e-200;
                    prev *= 1e-100;
                    cur *= 1e-100;
                    scale += 200.0 * std::f64::consts::LN_10;
                }
            }
            (ln_mu0 - s.ln() - scale).exp()
        })
        .collect();
    GaussRule { nodes, weights }
}

/// `n`-point rule for `(1-x)^α (1+x)^β` on `[-1, 1]`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if n == 0 || !(alpha > -1.0) || !(beta > -1.0) {
        return Err(Error::Quadrature(format!(
            "Gauss-Jacobi needs n >= 1 and exponents > -1, got n={n} α={alpha} β={beta}"
        )));
    }
    let (a, b) = (alpha, beta);
    let diag = (0..n)
        .map(|k| {
            let k = k as f64;
            let s = 2.0 * k + a + b;
            if k == 0.0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            }
        })
        .collect();
    let off = (1..n)
        .map(|k| {
            let k = k as f64;
            let s = 2.0 * k + a + b;
            let num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
            let den = s * s * (s + 1.0) * (s - 1.0);
            // k = 1 with a + b = -1 gives 0/0 in the general formula
            if den == 0.0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))).sqrt()
            } else {
                (num / den).sqrt()
            }
        })
        .collect();
    let ln_mu0 =
        (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma_f64(a + 1.0) + ln_gamma_f64(b + 1.0)
            - ln_gamma_f64(a + b + 2.0);
    Ok(rule(diag, off, ln_mu0))
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// `n`-point rule for `x^α e^{-x}` on `[0, ∞)`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<GaussRule> {
    if n == 0 || !(alpha > -1.0) {
        return Err(Error::Quadrature(format!(
            "Gauss-Laguerre needs n >= 1 and α > -1, got n={n} α={alpha}"
        )));
    }
    let diag = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let off = (1..n)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    Ok(rule(diag, off, ln_gamma_f64(alpha + 1.0)))
}

/// Rule from the moments `μ_0..μ_{2n-1}` of a positive weight (Chebyshev's
/// algorithm). The map from moments to recurrence coefficients is badly
/// conditioned, so the moments must carry far more bits than the result.
pub fn gauss_from_moments(moments: &[Float]) -> Result<GaussRule> {
    let n = moments.len() / 2;
    if n == 0 {
        return Err(Error::Quadrature("need at least two moments".into()));
    }
    let bits = moments[0].prec();
    let zero = Float::with_val(bits, 0);
    let mut prev: Vec<Float> = vec![zero.clone(); 2 * n];
    let mut cur: Vec<Float> = moments[..2 * n].to_vec();
    let mut alpha = vec![Float::with_val(bits, &cur[1] / &cur[0])];
    let mut beta = vec![cur[0].clone()];
    for k in 1..n {
        let mut next = vec![zero.clone(); 2 * n];
        for l in k..2 * n - k {
            let mut v = Float::with_val(
                bits,
                &cur[l + 1] - Float::with_val(bits, &alpha[k - 1] * &cur[l]),
            );
            v -= Float::with_val(bits, &beta[k - 1] * &prev[l]);
            next[l] = v;
        }
        if !(next[k] > 0) {
            return Err(Error::Quadrature(format!(
                "moment matrix lost positivity at order {k} with {bits} bits"
            )));
        }
        alpha.push(
            Float::with_val(bits, &next[k + 1] / &next[k])
                - Float::with_val(bits, &cur[k] / &cur[k - 1]),
        );
        beta.push(Float::with_val(bits, &next[k] / &cur[k - 1]));
        prev = std::mem::replace(&mut cur, next);
    }
    let diag = alpha.iter().map(Float::to_f64).collect();
    let off = beta[1..].iter().map(|b| b.to_f64().sqrt()).collect();
    Ok(rule(diag, off, beta[0].to_f64().ln()))
}

/// `n`-point rule for `r e^{-r^β}` on `[0, ∞)`, exact for polynomials in `r`
/// of degree `2n - 1` whatever the value of `β`.
pub fn gauss_stretched(n: usize, beta: f64) -> Result<GaussRule> {
    if n == 0 || !(beta > 0.0) {
        return Err(Error::Quadrature(format!(
            "need n >= 1 and beta > 0, got n={n} beta={beta}"
        )));
    }
    let bits = 128 + 24 * n as u32 + (8.0 * n as f64 / beta) as u32;
    let b = Float::with_val(bits, beta);
    let moments = (0..2 * n)
        .map(|k| {
            let s = Float::with_val(bits, (k as u32 + 2) as f64) / &b;
            gamma_float(&s, bits).map(|g| g / &b)
        })
        .collect::<Result<Vec<_>>>()?;
    gauss_from_moments(&moments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_three_points() {
        let r = gauss_legendre(3).unwrap();
        let x = (0.6f64).sqrt();
        assert!(
            (r.nodes[0] + x).abs() < 1e-15
                && r.nodes[1].abs() < 1e-15
                && (r.nodes[2] - x).abs() < 1e-15
        );
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((r.weights[0] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_jacobi_moments() {
        // ∫ (1-x)^α (1+x)^β x^k dx against the Beta-function moments of t = (1+x)/2
        let (a, b) = (0.5, -0.3);
        let r = gauss_jacobi(5, a, b).unwrap();
        for k in 0..10 {
            let got = r.integrate(|x| ((1.0 + x) / 2.0).powi(k));
            let ln = (a + b + 1.0) * std::f64::consts::LN_2
                + ln_gamma_f64(a + 1.0)
                + ln_gamma_f64(b + 1.0 + k as f64)
                - ln_gamma_f64(a + b + 2.0 + k as f64);
            assert!((got / ln.exp() - 1.0).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn laguerre_moments() {
        let r = gauss_laguerre(12, 0.0).unwrap();
        for k in 0..24 {
            let exact = ln_gamma_f64(k as f64 + 1.0).exp();
            assert!(
                (r.integrate(|x| x.powi(k)) / exact - 1.0).abs() < 1e-12,
                "k={k}"
            );
        }
        let r = gauss_laguerre(8, -0.5).unwrap();
        assert!((r.integrate(|x| x) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn moments_reproduce_laguerre() {
        let bits = 512;
        let m: Vec<Float> = (0..16u32)
            .map(|k| Float::with_val(bits, Float::factorial(k)))
            .collect();
        let a = gauss_from_moments(&m).unwrap();
        let b = gauss_laguerre(8, 0.0).unwrap();
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            assert!((x - y).abs() < 1e-12 * y.max(1.0), "{x} vs {y}");
        }
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x / y - 1.0).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn stretched_rule_moments() {
        // ∫ r^{k+1} e^{-r^β} dr = Γ((k+2)/β)/β
        for beta in [3.0, 0.7, 2.5] {
            let n = 20;
            let r = gauss_stretched(n, beta).unwrap();
            for k in 0..2 * n as i32 {
                let exact = Float::with_val(64, (k as f64 + 2.0) / beta)
                    .gamma()
                    .to_f64()
                    / beta;
                let got = r.integrate(|x| x.powi(k));
                assert!(
                    (got / exact - 1.0).abs() < 1e-11,
                    "beta={beta} k={k}: {got} vs {exact}"
                );
            }
        }
    }
}
