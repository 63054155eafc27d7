//! Function-space layer: basis functions, product quadrature for the disk and
//! plane measures, inner products, the disk adjoint pair and the
//! reproducing kernel of the generalized spaces.
//!
//! Both measures are normalized to total mass one:
//! the disk uses `(2ν-1)/π (1-|z|²)^{2ν-2} dA` and the plane uses
//! `β/(2π Γ(2/β)) e^{-|z|^β} dA` (for `β = 2`, `e^{-|z|²} dA / π`).

pub mod gauss;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::eigenvector_hp;
use crate::precision::Precision;
use crate::weights::{make_weights, SpaceKind, SpaceSpec};
use gauss::ln_gamma_f64;
pub use gauss::{
    gauss_from_moments, gauss_jacobi, gauss_laguerre, gauss_legendre, gauss_stretched, GaussRule,
};

/// A function that can be sampled on the quadrature grid.
pub trait SpaceFunction {
    fn eval(&self, z: Complex64) -> Complex64;
    /// Polynomial degree, `None` for non-polynomial functions.
    fn degree(&self) -> Option<usize>;
}

/// `Σ c_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn monomial(n: usize, c: f64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(c, 0.0);
        Polynomial { coeffs }
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs: Vec<_> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        if coeffs.is_empty() {
            return Polynomial {
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        Polynomial { coeffs }
    }

    /// Multiply by `c z^k`.
    pub fn shift(&self, k: usize, c: Complex64) -> Polynomial {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        coeffs.extend(self.coeffs.iter().map(|x| x * c));
        Polynomial { coeffs }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or_default();
        Polynomial {
            coeffs: (0..n)
                .map(|i| get(&self.coeffs, i) + get(&other.coeffs, i))
                .collect(),
        }
    }
}

impl SpaceFunction for Polynomial {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    fn degree(&self) -> Option<usize> {
        Some(
            self.coeffs
                .iter()
                .rposition(|c| *c != Complex64::new(0.0, 0.0))
                .unwrap_or(0),
        )
    }
}

/// Wraps a closure as a non-polynomial function.
pub struct Sampled<F>(pub F);

impl<F: Fn(Complex64) -> Complex64> SpaceFunction for Sampled<F> {
    fn eval(&self, z: Complex64) -> Complex64 {
        (self.0)(z)
    }

    fn degree(&self) -> Option<usize> {
        None
    }
}

fn a_of(beta: f64) -> f64 {
    2.0 / beta
}

/// `ln [m_n]! = ln Γ(a(n+1)) - ln Γ(a)`.
fn ln_mfact(n: u64, a: f64) -> f64 {
    ln_gamma_f64(a * (n as f64 + 1.0)) - ln_gamma_f64(a)
}

/// `ln((2ν)_n / n!)`.
fn ln_disk_coeff(n: u64, nu: f64) -> f64 {
    ln_gamma_f64(2.0 * nu + n as f64) - ln_gamma_f64(2.0 * nu) - ln_gamma_f64(n as f64 + 1.0)
}

/// The `n`-th orthonormal basis function of a space.
#[derive(Clone, Debug)]
pub struct BasisFunction {
    pub space: SpaceSpec,
    pub n: u64,
    coeff: Option<f64>,
}

impl BasisFunction {
    pub fn new(space: &SpaceSpec, n: u64) -> Self {
        let coeff = Self::coeff_of(space, n);
        BasisFunction {
            space: space.clone(),
            n,
            coeff,
        }
    }

    /// Scalar `c_n` with `e_n(z) = c_n zⁿ`, for the polynomial bases.
    pub fn monomial_coeff(&self) -> Option<f64> {
        self.coeff
    }

    fn coeff_of(space: &SpaceSpec, n: u64) -> Option<f64> {
        match &space.kind {
            SpaceKind::ClassicBargmann => Some((-0.5 * ln_gamma_f64(n as f64 + 1.0)).exp()),
            SpaceKind::GeneralizedBargmann { beta } => {
                Some((-0.5 * ln_mfact(n, a_of(beta.to_f64()))).exp())
            }
            SpaceKind::PoincareDisk { nu } => Some((0.5 * ln_disk_coeff(n, nu.to_f64())).exp()),
            SpaceKind::ThetaFockBargmann { .. } => None,
        }
    }

    pub fn try_eval(&self, z: Complex64) -> Result<Complex64> {
        match &self.space.kind {
            SpaceKind::ThetaFockBargmann { nu, alpha } => {
                basis_eval_theta(self.n, alpha.to_f64(), nu.to_f64(), z)
            }
            _ => Ok(z.powu(self.n as u32) * self.monomial_coeff().unwrap()),
        }
    }

    pub fn as_polynomial(&self) -> Option<Polynomial> {
        self.monomial_coeff()
            .map(|c| Polynomial::monomial(self.n as usize, c))
    }
}

impl SpaceFunction for BasisFunction {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.try_eval(z)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn degree(&self) -> Option<usize> {
        self.monomial_coeff().map(|_| self.n as usize)
    }
}

/// `e_n^{α,ν}(z) = (2ν/π)^{1/4} exp(ν z²/2 - π²(n+α)²/ν + 2iπ(n+α)z)`.
pub fn basis_eval_theta(n: u64, alpha: f64, nu: f64, z: Complex64) -> Result<Complex64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be > 0, got {nu}")));
    }
    let k = n as f64 + alpha;
    let e = nu / 2.0 * z * z - PI * PI * k * k / nu + Complex64::new(0.0, 2.0 * PI * k) * z;
    if e.re > 700.0 {
        return Err(Error::Range(format!(
            "theta basis e_{n} overflows at z = {z} (exponent {:.1})",
            e.re
        )));
    }
    Ok((2.0 * nu / PI).powf(0.25) * e.exp())
}

/// Pointwise check of `e^{2iπz} e_n = K_n e_{n+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplicationCheck {
    pub n: u64,
    /// `ln K_n = π²(2n+2α+1)/ν`.
    pub ln_constant: f64,
    pub max_rel_residual: f64,
}

pub fn theta_multiplication_check(
    n: u64,
    alpha: f64,
    nu: f64,
    samples: &[Complex64],
) -> Result<MultiplicationCheck> {
    let ln_k = PI * PI * (2.0 * n as f64 + 2.0 * alpha + 1.0) / nu;
    let mut worst = 0.0f64;
    for &z in samples {
        let lhs = (Complex64::new(0.0, 2.0 * PI) * z).exp() * basis_eval_theta(n, alpha, nu, z)?;
        // compare in log-scaled form so K_n may exceed the f64 range
        let rhs = basis_eval_theta(n + 1, alpha, nu, z)?;
        let ratio = lhs / rhs;
        let rel = (ratio.ln() - ln_k).norm();
        worst = worst.max(rel);
    }
    Ok(MultiplicationCheck {
        n,
        ln_constant: ln_k,
        max_rel_residual: worst,
    })
}

/// Measure carried by a product rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum QuadDomain {
    Disk {
        nu: f64,
    },
    /// Whole plane via Gauss–Laguerre in `t = r^β`.
    Plane {
        beta: f64,
    },
    /// Plane truncated at `|z| <= radius`, composite rule in `t`.
    PlaneCutoff {
        beta: f64,
        radius: f64,
    },
}

/// Radial × angular product rule for a normalized measure.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub domain: QuadDomain,
    /// `z^j conj(z)^k` is integrated exactly for `j + k <= order` (uncut rules).
    pub order: usize,
    pub radial: usize,
    pub angular: usize,
    pub points: Vec<(Complex64, f64)>,
    refined: OnceLock<Box<QuadratureRule>>,
}

impl QuadratureRule {
    fn sizes(order: usize, exact: bool) -> (usize, usize) {
        let radial = if exact {
            order / 4 + 1
        } else {
            (order / 2 + 8).max(24)
        };
        (radial, order + 1)
    }

    fn product(domain: QuadDomain, order: usize, radial: &[(f64, f64)], angular: usize) -> Self {
        let mut points = Vec::with_capacity(radial.len() * angular);
        for j in 0..angular {
            let th = 2.0 * PI * j as f64 / angular as f64;
            let e = Complex64::from_polar(1.0, th);
            for &(r, w) in radial {
                points.push((e * r, w / angular as f64));
            }
        }
        QuadratureRule {
            domain,
            order,
            radial: radial.len(),
            angular,
            points,
            refined: OnceLock::new(),
        }
    }

    /// Rule for `(2ν-1)/π (1-|z|²)^{2ν-2} dA`: Gauss–Jacobi in `t = r²`.
    pub fn disk(nu: f64, order: usize) -> Result<Self> {
        if !(nu > 0.5) {
            return Err(Error::InvalidParameter(format!(
                "disk measure needs nu > 1/2, got {nu}"
            )));
        }
        let (nr, na) = Self::sizes(order, true);
        Self::disk_sized(nu, order, nr, na)
    }

    fn disk_sized(nu: f64, order: usize, nr: usize, na: usize) -> Result<Self> {
        let c = 2.0 * nu - 2.0;
        let g = gauss_jacobi(nr, c, 0.0)?;
        let scale = (2.0 * nu - 1.0) * (-(2.0 * nu - 1.0) * std::f64::consts::LN_2).exp();
        let radial: Vec<_> = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(x, w)| (((1.0 + x) / 2.0).sqrt(), w * scale))
            .collect();
        Ok(Self::product(QuadDomain::Disk { nu }, order, &radial, na))
    }

    /// Rule for `β/(2πΓ(a)) e^{-|z|^β} dA`, `a = 2/β`: Gauss–Laguerre with
    /// exponent `a - 1` in `t = r^β` when `a` is an integer, otherwise a Gauss
    /// rule for `r e^{-r^β} dr` built from its moments.
    pub fn plane(beta: f64, order: usize) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        // |z|^{2k} is t^{ak} in t = r^β, so integer a needs a·order/4 Laguerre nodes.
        let nr = if Self::exact_plane(beta) {
            (a_of(beta).round() as usize * order).div_ceil(4) + 1
        } else {
            order / 2 + 1
        };
        let na = order + 1;
        Self::plane_sized(beta, order, nr, na)
    }

    fn exact_plane(beta: f64) -> bool {
        let a = a_of(beta);
        (a - a.round()).abs() < 1e-12
    }

    fn plane_sized(beta: f64, order: usize, nr: usize, na: usize) -> Result<Self> {
        let a = a_of(beta);
        let lg = ln_gamma_f64(a);
        let radial: Vec<_> = if Self::exact_plane(beta) {
            let g = gauss_laguerre(nr, a - 1.0)?;
            g.nodes
                .iter()
                .zip(&g.weights)
                .map(|(t, w)| (t.powf(1.0 / beta), (w.ln() - lg).exp()))
                .collect()
        } else {
            let g = gauss_stretched(nr, beta)?;
            g.nodes
                .iter()
                .zip(&g.weights)
                .map(|(r, w)| (*r, (w.ln() + beta.ln() - lg).exp()))
                .collect()
        };
        Ok(Self::product(
            QuadDomain::Plane { beta },
            order,
            &radial,
            na,
        ))
    }

    /// Plane measure restricted to `|z| <= radius`: Gauss–Jacobi on the
    /// first panel of `t ∈ [0, radius^β]` (absorbing `t^{a-1}`) and
    /// Gauss–Legendre on unit-width panels after it.
    pub fn plane_cutoff(beta: f64, radius: f64, order: usize) -> Result<Self> {
        if !(beta > 0.0) || !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need beta > 0 and radius > 0, got {beta}, {radius}"
            )));
        }
        let (nr, na) = Self::sizes(order, false);
        Self::cutoff_sized(beta, radius, order, nr, na)
    }

    fn cutoff_sized(beta: f64, radius: f64, order: usize, nr: usize, na: usize) -> Result<Self> {
        let a = a_of(beta);
        let tmax = radius.powf(beta);
        let panels = (tmax.ceil() as usize).clamp(1, 400);
        let h = tmax / panels as f64;
        let lg = ln_gamma_f64(a);
        let mut radial = Vec::new();
        let first = gauss_jacobi(nr, 0.0, a - 1.0)?;
        for (x, w) in first.nodes.iter().zip(&first.weights) {
            let t = h * (1.0 + x) / 2.0;
            // (1+x)^{a-1} dx = (2/h)^{a} t^{a-1} dt
            let wt = w * (h / 2.0).powf(a) * (-t).exp() / lg.exp();
            radial.push((t.powf(1.0 / beta), wt));
        }
        let leg = gauss_legendre(nr)?;
        for k in 1..panels {
            let t0 = k as f64 * h;
            for (x, w) in leg.nodes.iter().zip(&leg.weights) {
                let t = t0 + h * (1.0 + x) / 2.0;
                let wt = w * h / 2.0 * ((a - 1.0) * t.ln() - t - lg).exp();
                radial.push((t.powf(1.0 / beta), wt));
            }
        }
        Ok(Self::product(
            QuadDomain::PlaneCutoff { beta, radius },
            order,
            &radial,
            na,
        ))
    }

    /// Same measure with more nodes, for error estimates.
    pub fn refined(&self) -> &QuadratureRule {
        self.refined.get_or_init(|| {
            let (nr, na) = (self.radial + self.radial / 2 + 4, self.angular + 8);
            let r = match self.domain {
                QuadDomain::Disk { nu } => Self::disk_sized(nu, self.order, nr, na),
                QuadDomain::Plane { beta } => Self::plane_sized(beta, self.order, nr, na),
                QuadDomain::PlaneCutoff { beta, radius } => {
                    let per_panel = self.radial / (radius.powf(beta).ceil() as usize).clamp(1, 400);
                    Self::cutoff_sized(beta, radius, self.order, per_panel + 4, na)
                }
            };
            Box::new(r.expect("refinement of a valid rule"))
        })
    }

    /// Mass of `|z|^degree` outside the cutoff, `Γ(a(1+d/2), R^β)/Γ(a)`; zero for uncut rules.
    pub fn truncation_bound(&self, degree: usize) -> f64 {
        match self.domain {
            QuadDomain::PlaneCutoff { beta, radius } => {
                let a = a_of(beta);
                let s = Float::with_val(64, a * (1.0 + degree as f64 / 2.0));
                let t = Float::with_val(64, radius.powf(beta));
                let upper = s.gamma_inc(&t).to_f64();
                upper / ln_gamma_f64(a).exp()
            }
            _ => 0.0,
        }
    }

    /// `Σ w F(z)` over the rule.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.points.iter().map(|(z, w)| f(*z) * *w).sum()
    }

    fn matches(&self, space: &SpaceSpec) -> Result<()> {
        let ok = match (&space.kind, &self.domain) {
            (SpaceKind::PoincareDisk { nu }, QuadDomain::Disk { nu: r }) => {
                (nu.to_f64() - r).abs() < 1e-12
            }
            (
                SpaceKind::ClassicBargmann,
                QuadDomain::Plane { beta } | QuadDomain::PlaneCutoff { beta, .. },
            ) => (beta - 2.0).abs() < 1e-12,
            (
                SpaceKind::GeneralizedBargmann { beta },
                QuadDomain::Plane { beta: b } | QuadDomain::PlaneCutoff { beta: b, .. },
            ) => (beta.to_f64() - b).abs() < 1e-12,
            (SpaceKind::ThetaFockBargmann { .. }, _) => {
                return Err(Error::Config(
                    "inner products on theta spaces are not implemented".into(),
                ))
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Quadrature(format!(
                "rule {:?} does not carry the measure of {space}",
                self.domain
            )))
        }
    }
}

/// A quadrature value with its error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Integral {
    pub value: Complex64,
    /// Difference against the refined rule.
    pub error_estimate: f64,
    /// Outside-cutoff mass of `|z|^{deg f + deg g}`, for cut rules and polynomial arguments.
    pub truncation: Option<f64>,
}

/// `⟨f, g⟩ = ∫ f conj(g) dμ` for the normalized measure of `space`.
pub fn inner_product(
    space: &SpaceSpec,
    f: &dyn SpaceFunction,
    g: &dyn SpaceFunction,
    rule: &QuadratureRule,
) -> Result<Integral> {
    rule.matches(space)?;
    let deg = f.degree().zip(g.degree()).map(|(a, b)| a + b);
    if let Some(d) = deg {
        if d > rule.order {
            return Err(Error::Quadrature(format!(
                "rule of order {} cannot integrate degree {d}",
                rule.order
            )));
        }
    }
    let q = |r: &QuadratureRule| r.integrate(|z| f.eval(z) * g.eval(z).conj());
    let value = q(rule);
    let error_estimate = (value - q(rule.refined())).norm();
    let truncation = match rule.domain {
        QuadDomain::PlaneCutoff { .. } => deg.map(|d| rule.truncation_bound(d)),
        _ => None,
    };
    Ok(Integral {
        value,
        error_estimate,
        truncation,
    })
}

/// Disk inner product in the un-normalized form `(2π/(2ν-1)) ⟨f, g⟩_D`,
/// the convention of the closed-form monomial norms.
pub fn raw_inner_product_disk(
    nu: f64,
    f: &dyn SpaceFunction,
    g: &dyn SpaceFunction,
    rule: &QuadratureRule,
) -> Result<Integral> {
    let space = SpaceSpec::disk(&format!("{nu}"), 0)?;
    let mut r = inner_product(&space, f, g, rule)?;
    let k = 2.0 * PI / (2.0 * nu - 1.0);
    r.value *= k;
    r.error_estimate *= k;
    Ok(r)
}

/// `‖zⁿ‖² = 2π/(2ν-1) · Γ(2ν) n! / Γ(2ν+n)` in the raw disk form.
pub fn monomial_norm_disk(n: u64, nu: f64) -> Result<f64> {
    if !(nu > 0.5) {
        return Err(Error::InvalidParameter(format!(
            "nu must be > 1/2, got {nu}"
        )));
    }
    Ok(2.0 * PI / (2.0 * nu - 1.0) * (-ln_disk_coeff(n, nu)).exp())
}

/// `A = d/dz` and `A* = z² d/dz + 2ν z`.
pub fn disk_adjoint(f: &Polynomial, nu: f64) -> Polynomial {
    f.derivative()
        .shift(2, Complex64::new(1.0, 0.0))
        .add(&f.shift(1, Complex64::new(2.0 * nu, 0.0)))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AdjointCheck {
    pub n: u64,
    pub m: u64,
    /// `⟨A zⁿ, zᵐ⟩`
    pub lhs: Complex64,
    /// `⟨zⁿ, A* zᵐ⟩`
    pub rhs: Complex64,
    pub residual: f64,
}

pub fn adjoint_check_disk(n: u64, m: u64, nu: f64, rule: &QuadratureRule) -> Result<AdjointCheck> {
    if rule.order < (n + m + 2) as usize {
        return Err(Error::Quadrature(format!(
            "adjoint check needs order >= {}, rule has {}",
            n + m + 2,
            rule.order
        )));
    }
    let space = SpaceSpec::disk(&format!("{nu}"), 0)?;
    let zn = Polynomial::monomial(n as usize, 1.0);
    let zm = Polynomial::monomial(m as usize, 1.0);
    let lhs = inner_product(&space, &zn.derivative(), &zm, rule)?.value;
    let rhs = inner_product(&space, &zn, &disk_adjoint(&zm, nu), rule)?.value;
    Ok(AdjointCheck {
        n,
        m,
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// `⟨A* P_n, P_{n+1}⟩_D` by quadrature; equals `ω_n = √((n+1)(2ν+n))`.
pub fn disk_shift_weight(n: u64, nu: f64, rule: &QuadratureRule) -> Result<f64> {
    let space = SpaceSpec::disk(&format!("{nu}"), 0)?;
    let pn = BasisFunction::new(&space, n).as_polynomial().unwrap();
    let pn1 = BasisFunction::new(&space, n + 1);
    Ok(inner_product(&space, &disk_adjoint(&pn, nu), &pn1, rule)?
        .value
        .re)
}

/// Partial sum of the reproducing kernel `e(z, λ) = Σ zⁿ conj(λ)ⁿ / [m_n]!`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelValue {
    pub value: Complex64,
    /// Bound on the omitted terms.
    pub tail_bound: f64,
    pub terms: usize,
}

pub fn kernel_eval(
    beta: f64,
    z: Complex64,
    lambda: Complex64,
    n_terms: usize,
    tol: f64,
) -> Result<KernelValue> {
    if !(beta > 0.0) || n_terms == 0 {
        return Err(Error::InvalidParameter(format!(
            "need beta > 0 and at least one term, got {beta}, {n_terms}"
        )));
    }
    kernel_sum(&kernel_moments(beta, n_terms), z, lambda, tol)
}

/// `m_1..=m_{n_terms+1}`, `m_n = Γ(a(n+1))/Γ(an)`.
fn kernel_moments(beta: f64, n_terms: usize) -> Vec<f64> {
    let a = a_of(beta);
    let lg: Vec<f64> = (1..=n_terms as u64 + 2)
        .map(|n| ln_gamma_f64(a * n as f64))
        .collect();
    lg.windows(2).map(|w| (w[1] - w[0]).exp()).collect()
}

fn kernel_sum(m: &[f64], z: Complex64, lambda: Complex64, tol: f64) -> Result<KernelValue> {
    let n_terms = m.len() - 1;
    let x = z * lambda.conj();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for mn in &m[..n_terms - 1] {
        term = term * x / mn;
        sum += term;
    }
    // next term, then ratios |x|/m_k that only shrink
    let next = term.norm() * x.norm() / m[n_terms - 1];
    let r = x.norm() / m[n_terms];
    let tail_bound = if r < 1.0 {
        next / (1.0 - r)
    } else {
        f64::INFINITY
    };
    if tail_bound > tol * sum.norm().max(1.0) {
        return Err(Error::Truncation {
            step: n_terms,
            reason: format!("kernel tail bound {tail_bound:.3e} exceeds tolerance {tol:.1e}"),
        });
    }
    Ok(KernelValue {
        value: sum,
        tail_bound,
        terms: n_terms,
    })
}

/// `∫ φ(λ) e(z, λ) dμ(λ)` for `φ = e_n` of the generalized space; reproduces `e_n(z)`.
pub fn reproduce_basis(
    beta: f64,
    n: u64,
    z: Complex64,
    rule: &QuadratureRule,
    n_terms: usize,
) -> Result<Complex64> {
    let space = SpaceSpec::generalized(&format!("{beta}"), 0)?;
    rule.matches(&space)?;
    let phi = BasisFunction::new(&space, n);
    let m = kernel_moments(beta, n_terms);
    let mut v = Complex64::new(0.0, 0.0);
    for (l, w) in &rule.points {
        let k = kernel_sum(&m, z, *l, 1e-12)?;
        v += phi.eval(*l) * k.value * *w;
    }
    Ok(v)
}

/// Coherent-state norm `‖φ_λ‖² = e^{|λ|²}` for the classic `p = 0` eigenvector of `H_0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoherentNorm {
    pub computed: f64,
    pub expected: f64,
    pub tail_bound: f64,
}

pub fn coherent_norm_check(
    lambda: Complex64,
    dim: usize,
    precision: Precision,
) -> Result<CoherentNorm> {
    let seq = make_weights(&SpaceSpec::classic(0), precision)?;
    let lam = rug::Complex::with_val(precision.bits(), (lambda.re, lambda.im));
    let e = eigenvector_hp(&seq, &lam, dim)?;
    let tail_bound = e
        .state
        .tail_bound
        .as_ref()
        .map(|t| t.to_f64())
        .unwrap_or(f64::INFINITY);
    Ok(CoherentNorm {
        computed: e.state.norm_sq().to_f64(),
        expected: lambda.norm_sqr().exp(),
        tail_bound,
    })
}

/// `nx × ny` grid over `[x0, x1] × [y0, y1]`.
pub fn grid(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Vec<Complex64> {
    let step = |r: [f64; 2], n: usize, i: usize| {
        if n < 2 {
            r[0]
        } else {
            r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
        }
    };
    (0..ny)
        .flat_map(|j| (0..nx).map(move |i| Complex64::new(step(x, nx, i), step(y, ny, j))))
        .collect()
}

/// Write samples as `x,y,re,im`.
pub fn write_samples<W: Write>(f: &dyn SpaceFunction, points: &[Complex64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "re", "im"])?;
    for z in points {
        let v = f.eval(*z);
        w.write_record([
            z.re.to_string(),
            z.im.to_string(),
            v.re.to_string(),
            v.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_raw_constant() {
        let rule = QuadratureRule::disk(1.0, 4).unwrap();
        let one = Polynomial::monomial(0, 1.0);
        let v = raw_inner_product_disk(1.0, &one, &one, &rule).unwrap();
        assert!((v.value.re - 2.0 * PI).abs() < 1e-13);
        assert!((monomial_norm_disk(1, 1.0).unwrap() - PI).abs() < 1e-13);
    }

    #[test]
    fn disk_orthonormal_basis() {
        let space = SpaceSpec::disk("3/2", 0).unwrap();
        let rule = QuadratureRule::disk(1.5, 24).unwrap();
        for n in 0..12 {
            for m in 0..12 {
                let v = inner_product(
                    &space,
                    &BasisFunction::new(&space, n),
                    &BasisFunction::new(&space, m),
                    &rule,
                )
                .unwrap()
                .value;
                let e = if n == m { 1.0 } else { 0.0 };
                assert!((v - e).norm() < 1e-12, "{n} {m} {v}");
            }
        }
    }

    #[test]
    fn classic_orthonormal_e5() {
        let space = SpaceSpec::classic(0);
        let rule = QuadratureRule::plane(2.0, 12).unwrap();
        let e5 = BasisFunction::new(&space, 5);
        let v = inner_product(&space, &e5, &e5, &rule).unwrap();
        assert!((v.value.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn generalized_basis_orthonormal() {
        for beta in ["3", "1/2", "5/2"] {
            let space = SpaceSpec::generalized(beta, 0).unwrap();
            let rule = QuadratureRule::plane(space_beta(&space), 16).unwrap();
            for n in 0..=8 {
                for m in 0..=8 {
                    let v = inner_product(
                        &space,
                        &BasisFunction::new(&space, n),
                        &BasisFunction::new(&space, m),
                        &rule,
                    )
                    .unwrap()
                    .value;
                    let e = if n == m { 1.0 } else { 0.0 };
                    assert!((v - e).norm() < 1e-10, "beta={beta} n={n} m={m}: {v}");
                }
            }
        }
    }

    fn space_beta(s: &SpaceSpec) -> f64 {
        match &s.kind {
            SpaceKind::GeneralizedBargmann { beta } => beta.to_f64(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn order_guard() {
        let space = SpaceSpec::classic(0);
        let rule = QuadratureRule::plane(2.0, 8).unwrap();
        let e5 = BasisFunction::new(&space, 5);
        assert!(matches!(
            inner_product(&space, &e5, &e5, &rule),
            Err(Error::Quadrature(_))
        ));
        let theta = SpaceSpec::theta("1", "0", 0).unwrap();
        assert!(matches!(
            inner_product(&theta, &e5, &e5, &rule),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn adjoint_pair_and_weight() {
        let rule = QuadratureRule::disk(1.5, 24).unwrap();
        let c = adjoint_check_disk(1, 0, 1.5, &rule).unwrap();
        assert!(c.residual < 1e-12 && c.lhs.norm() > 0.1);
        for n in 0..8 {
            let w = disk_shift_weight(n, 1.5, &rule).unwrap();
            assert!((w - ((n as f64 + 1.0) * (n as f64 + 3.0)).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_classic_closed_form() {
        let z = Complex64::new(1.2, -0.7);
        let l = Complex64::new(-0.4, 1.9);
        let k = kernel_eval(2.0, z, l, 60, 1e-12).unwrap();
        assert!((k.value - (z * l.conj()).exp()).norm() < 1e-12);
        assert_eq!(
            kernel_eval(1.0, Complex64::new(0.0, 0.0), l, 5, 1e-12)
                .unwrap()
                .value,
            Complex64::new(1.0, 0.0)
        );
        assert!(matches!(
            kernel_eval(2.0, z * 5.0, l * 5.0, 10, 1e-12),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn theta_basis_and_multiplication() {
        let v = basis_eval_theta(0, 0.0, 2.0, Complex64::new(0.0, 0.0)).unwrap();
        assert!((v.re - (4.0 / PI).powf(0.25)).abs() < 1e-15);
        let zs: Vec<_> = (0..5)
            .map(|k| Complex64::new(0.1 * k as f64, 0.05 * k as f64 - 0.1))
            .collect();
        let c = theta_multiplication_check(3, 0.25, 2.0, &zs).unwrap();
        assert!(c.max_rel_residual < 1e-10);
        assert!(matches!(
            basis_eval_theta(0, 0.0, 1.0, Complex64::new(40.0, 0.0)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn cutoff_rule_mass() {
        let rule = QuadratureRule::plane_cutoff(1.0, 6.0, 20).unwrap();
        let total = rule.integrate(|_| Complex64::new(1.0, 0.0)).re;
        assert!(
            (total + rule.truncation_bound(0) - 1.0).abs() < 1e-12,
            "{total}"
        );
    }

    #[test]
    fn samples_csv_header() {
        let mut buf = Vec::new();
        let f = Polynomial::monomial(1, 1.0);
        write_samples(&f, &grid([0.0, 1.0], [0.0, 1.0], 2, 2), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,y,re,im\n0,0,0,0\n1,0,1,0"));
    }

    #[test]
    fn kernel_reproduces_e2() {
        let z = Complex64::new(0.6, -0.3);
        for beta in [2.0, 1.0] {
            let rule = QuadratureRule::plane_cutoff(beta, 30f64.powf(1.0 / beta), 60).unwrap();
            let got = reproduce_basis(beta, 2, z, &rule, 60).unwrap();
            let space = SpaceSpec::generalized(&format!("{beta}"), 0).unwrap();
            let want = BasisFunction::new(&space, 2).eval(z);
            assert!((got - want).norm() < 1e-6, "beta={beta} {got} {want}");
        }
    }
}
