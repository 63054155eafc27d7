//! Truncated models of `H_p`, `H_p*` and `H_p + H_p*`, and iteration with a
//! tracked trusted window.
//!
//! Coordinate `i` of a truncation of dimension `N` is the basis vector with
//! natural index `offset + i`. The band entry `band[i]` couples coordinates
//! `i` and `i + 1`.

pub mod appendix;
pub mod eigen;

use std::io::Write;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{fmt_float, Precision};
use crate::recurrence::JacobiWeights;

pub use appendix::{
    approximate_by_periodic, block_identity, periodic_point_hp, periodic_point_hp_exact,
    s_operator_decay, ApproximationReport, BlockIdentity, ExactVector, PeriodicHp, SDecay,
};
pub use eigen::{
    eigenvector_hp, eigenvector_sum, periodic_point_sum, EigenHp, EigenSum, PeriodicSum, Rotation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `H_p`: coordinate `i + 1` maps to `band[i]` times coordinate `i`.
    BackwardShift,
    /// `H_p*`: coordinate `i` maps to `band[i]` times coordinate `i + 1`.
    ForwardShift,
    /// `H_p + H_p*`: symmetric tridiagonal with zero diagonal.
    JacobiSum,
}

impl OperatorKind {
    pub fn transpose(self) -> OperatorKind {
        match self {
            OperatorKind::BackwardShift => OperatorKind::ForwardShift,
            OperatorKind::ForwardShift => OperatorKind::BackwardShift,
            OperatorKind::JacobiSum => OperatorKind::JacobiSum,
        }
    }
}

/// A banded `N × N` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    pub kind: OperatorKind,
    pub dim: usize,
    pub offset: i64,
    pub band: Vec<Float>,
    pub label: String,
    pub precision: Precision,
}

/// Assemble the truncation of dimension `dim`; the first coordinate is the
/// first basis vector of the domain (`P_p` for weights of shift order `p`).
pub fn build_operator(
    kind: OperatorKind,
    weights: &JacobiWeights,
    dim: usize,
) -> Result<TruncatedOperator> {
    let p = weights.sequence().map(|s| s.p() as usize).unwrap_or(0);
    let min = (p + 2).max(2);
    if dim < min {
        return Err(Error::Dimension(format!(
            "truncation needs N >= {min}, got {dim}"
        )));
    }
    let bits = weights.precision().bits();
    Ok(TruncatedOperator {
        kind,
        dim,
        offset: weights.index_offset() + 1,
        band: weights.tabulate(dim - 1, bits)?,
        label: weights.label(),
        precision: weights.precision(),
    })
}

impl TruncatedOperator {
    pub fn bits(&self) -> u32 {
        self.precision.bits()
    }

    /// Entry `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> Float {
        let b = self.bits();
        let up = col == row + 1;
        let down = row == col + 1;
        match self.kind {
            OperatorKind::BackwardShift if up => self.band[row].clone(),
            OperatorKind::ForwardShift if down => self.band[col].clone(),
            OperatorKind::JacobiSum if up => self.band[row].clone(),
            OperatorKind::JacobiSum if down => self.band[col].clone(),
            _ => Float::with_val(b, 0),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Float>> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.entry(r, c)).collect())
            .collect()
    }

    pub fn transpose(&self) -> TruncatedOperator {
        TruncatedOperator {
            kind: self.kind.transpose(),
            ..self.clone()
        }
    }

    /// Matrix-vector product at the operator precision plus guard bits.
    pub fn apply(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        self.apply_bits(v, self.bits() + Precision::GUARD_BITS)
    }

    pub fn apply_bits(&self, v: &[Complex], bits: u32) -> Result<Vec<Complex>> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!(
                "vector of length {} applied to operator of dimension {}",
                v.len(),
                self.dim
            )));
        }
        let n = self.dim;
        let mut out = vec![Complex::with_val(bits, 0); n];
        match self.kind {
            OperatorKind::BackwardShift => {
                for i in 0..n - 1 {
                    out[i] = Complex::with_val(bits, &v[i + 1] * &self.band[i]);
                }
            }
            OperatorKind::ForwardShift => {
                for i in 0..n - 1 {
                    out[i + 1] = Complex::with_val(bits, &v[i] * &self.band[i]);
                }
            }
            OperatorKind::JacobiSum => {
                for i in 0..n - 1 {
                    out[i] += Complex::with_val(bits, &v[i + 1] * &self.band[i]);
                    out[i + 1] += Complex::with_val(bits, &v[i] * &self.band[i]);
                }
            }
        }
        Ok(out)
    }

    /// The next trusted window after one application.
    pub fn step_window(&self, w: Window, last_is_zero: bool) -> Window {
        match self.kind {
            OperatorKind::BackwardShift => {
                if w.exact_tail {
                    w
                } else {
                    Window {
                        trusted: w.trusted.saturating_sub(1),
                        exact_tail: false,
                    }
                }
            }
            OperatorKind::ForwardShift => Window {
                trusted: (w.trusted + 1).min(self.dim),
                exact_tail: w.exact_tail && last_is_zero,
            },
            OperatorKind::JacobiSum => {
                if w.exact_tail {
                    Window {
                        trusted: w.trusted,
                        exact_tail: last_is_zero,
                    }
                } else {
                    Window {
                        trusted: w.trusted.saturating_sub(1),
                        exact_tail: false,
                    }
                }
            }
        }
    }

    /// Banded-matrix JSON: kind, dimension, index offset and the band.
    pub fn to_json(&self) -> serde_json::Value {
        let d = self.precision.print_digits();
        serde_json::json!({
            "kind": self.kind,
            "dim": self.dim,
            "index_offset": self.offset,
            "diagonal": match self.kind {
                OperatorKind::BackwardShift => "super",
                OperatorKind::ForwardShift => "sub",
                OperatorKind::JacobiSum => "super_and_sub",
            },
            "band": self.band.iter().map(|x| fmt_float(x, d)).collect::<Vec<_>>(),
            "weights": self.label,
            "precision_bits": self.bits(),
        })
    }
}

/// Coordinates `0..trusted` agree with the infinite operator; `exact_tail`
/// means the truncated vector is known to vanish beyond the truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub trusted: usize,
    pub exact_tail: bool,
}

/// Coefficients over a truncated basis.
#[derive(Clone, Debug)]
pub struct VectorState {
    /// Natural index of the first coefficient.
    pub offset: i64,
    pub coeffs: Vec<Complex>,
    /// Bound on `Σ |a_n|²` over the discarded coefficients, when known.
    pub tail_bound: Option<Float>,
    /// The represented vector has no coefficients beyond the truncation.
    pub finitely_supported: bool,
}

impl VectorState {
    pub fn finite(offset: i64, coeffs: Vec<Complex>) -> Self {
        VectorState {
            offset,
            coeffs,
            tail_bound: None,
            finitely_supported: true,
        }
    }

    /// Basis vector with natural index `k` in a truncation of length `dim`.
    pub fn basis(offset: i64, dim: usize, k: i64, bits: u32) -> Result<Self> {
        let i = k - offset;
        if i < 0 || i as usize >= dim {
            return Err(Error::Range(format!(
                "index {k} outside [{offset}, {})",
                offset + dim as i64
            )));
        }
        let mut c = vec![Complex::with_val(bits, 0); dim];
        c[i as usize] = Complex::with_val(bits, 1);
        Ok(VectorState::finite(offset, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of the basis vector with natural index `k`, zero outside.
    pub fn coeff(&self, k: i64) -> Option<&Complex> {
        let i = k - self.offset;
        (i >= 0).then(|| self.coeffs.get(i as usize)).flatten()
    }

    pub fn norm_sq(&self) -> Float {
        norm_sq(&self.coeffs)
    }

    pub fn norm(&self) -> Float {
        self.norm_sq().sqrt()
    }

    pub fn window(&self) -> Window {
        Window {
            trusted: self.coeffs.len(),
            exact_tail: self.finitely_supported,
        }
    }
}

pub(crate) fn norm_sq(v: &[Complex]) -> Float {
    let bits = v.first().map(|z| z.prec().0).unwrap_or(64);
    let mut s = Float::with_val(bits, 0);
    for z in v {
        s += Float::with_val(bits, z.norm_ref());
    }
    s
}

/// One iterate of an orbit.
#[derive(Clone, Debug)]
pub struct OrbitStep {
    pub step: usize,
    /// Norm over the trusted window.
    pub norm: Float,
    /// `‖A^k v - λ^k v‖` over the trusted window, when a reference eigenvalue is given.
    pub residual: Option<Float>,
    pub window: Window,
    pub vector: Vec<Complex>,
}

/// Iterates `v, Av, ..., A^steps v` with their trusted windows.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub steps: Vec<OrbitStep>,
    pub offset: i64,
}

/// Iterate `op` on `v`. With `eigenvalue = Some(λ)` the residual against
/// `λ^k v` is recorded. Fails once the trusted window is empty.
pub fn orbit(
    op: &TruncatedOperator,
    v: &VectorState,
    steps: usize,
    eigenvalue: Option<&Complex>,
) -> Result<Orbit> {
    if v.len() != op.dim {
        return Err(Error::Dimension(format!(
            "vector length {} != operator dimension {}",
            v.len(),
            op.dim
        )));
    }
    let bits = v
        .coeffs
        .first()
        .map(|z| z.prec().0)
        .unwrap_or(op.bits())
        .max(op.bits());
    let window_norm = |x: &[Complex], w: Window| norm_sq(&x[..w.trusted]).sqrt();
    let mut cur = v.coeffs.clone();
    let mut win = v.window();
    let mut lam_pow = Complex::with_val(bits, 1);
    let resid = |x: &[Complex], w: Window, lp: &Complex| -> Float {
        let d: Vec<Complex> = x[..w.trusted]
            .iter()
            .zip(&v.coeffs)
            .map(|(a, b)| Complex::with_val(bits, a - Complex::with_val(bits, b * lp)))
            .collect();
        norm_sq(&d).sqrt()
    };
    let mut out = vec![OrbitStep {
        step: 0,
        norm: window_norm(&cur, win),
        residual: eigenvalue.map(|_| resid(&cur, win, &lam_pow)),
        window: win,
        vector: cur.clone(),
    }];
    for step in 1..=steps {
        let last_zero = cur.last().is_some_and(|z| z.is_zero());
        cur = op.apply_bits(&cur, bits)?;
        win = op.step_window(win, last_zero);
        if win.trusted == 0 {
            return Err(Error::Truncation {
                step,
                reason: format!("trusted window is empty in dimension {}", op.dim),
            });
        }
        if let Some(l) = eigenvalue {
            lam_pow *= l;
        }
        out.push(OrbitStep {
            step,
            norm: window_norm(&cur, win),
            residual: eigenvalue.map(|_| resid(&cur, win, &lam_pow)),
            window: win,
            vector: cur.clone(),
        });
    }
    Ok(Orbit {
        steps: out,
        offset: v.offset,
    })
}

impl Orbit {
    /// Write `step,norm,residual,trusted_window`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "norm", "residual", "trusted_window"])?;
        for s in &self.steps {
            w.write_record([
                s.step.to_string(),
                fmt_float(&s.norm, 20),
                s.residual
                    .as_ref()
                    .map(|r| fmt_float(r, 20))
                    .unwrap_or_default(),
                s.window.trusted.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
