//! Scenario files: a space, a task with its parameters, and an output directory.

use std::path::{Path, PathBuf};

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};
use shiftlab::operators::{OperatorKind, Rotation};
use shiftlab::recurrence::{polar_lambda, GammaChoice, Hypothesis};
use shiftlab::{Error, Precision, RealParam, Result, SpaceSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    pub space: SpaceSpec,
    pub task: Task,
    /// Significant decimal digits; defaults to `SHIFTLAB_DIGITS` or 50.
    #[serde(default)]
    pub digits: Option<u32>,
    /// Output directory, relative to the scenario file.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// A complex parameter: `{"re": "0.5", "im": "-1"}` or `{"r": "2", "turn": "1/8"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexParam {
    Cartesian {
        re: RealParam,
        #[serde(default = "zero")]
        im: RealParam,
    },
    Polar {
        r: RealParam,
        turn: RationalParam,
    },
}

fn zero() -> RealParam {
    RealParam::rational(0)
}

impl ComplexParam {
    pub fn real(x: RealParam) -> Self {
        ComplexParam::Cartesian { re: x, im: zero() }
    }

    pub fn to_complex(&self, bits: u32) -> Complex {
        match self {
            ComplexParam::Cartesian { re, im } => {
                Complex::with_val(bits, (re.to_float(bits), im.to_float(bits)))
            }
            ComplexParam::Polar { r, turn } => polar_lambda(&r.to_float(bits), &turn.0, bits),
        }
    }

    pub fn abs(&self, bits: u32) -> Float {
        Float::with_val(bits, self.to_complex(bits).abs_ref())
    }
}

impl std::fmt::Display for ComplexParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComplexParam::Cartesian { re, im } => write!(f, "{re}+{im}i"),
            ComplexParam::Polar { r, turn } => write!(f, "{r}*e^(2pi i {})", turn.0),
        }
    }
}

/// An exact rational written as `"p/q"` or an integer.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalParam(pub Rational);

impl std::str::FromStr for RationalParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let q = match s.split_once('/') {
            Some((a, b)) => {
                let a: rug::Integer = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad rational {s:?}")))?;
                let b: rug::Integer = b
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad rational {s:?}")))?;
                if b == 0 {
                    return Err(Error::Config(format!("zero denominator in {s:?}")));
                }
                Rational::from((a, b))
            }
            None => Rational::from(
                s.parse::<rug::Integer>()
                    .map_err(|_| Error::Config(format!("bad rational {s:?}")))?,
            ),
        };
        Ok(RationalParam(q))
    }
}

impl Serialize for RationalParam {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalParam {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::I(i) => Ok(RationalParam(Rational::from(i))),
        }
    }
}

/// `|λ|` values on circles and phases (in turns) around each.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub radii: Vec<RealParam>,
    pub turns: Vec<RationalParam>,
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<ComplexParam> {
        let mut out = Vec::new();
        for r in &self.radii {
            for t in &self.turns {
                out.push(ComplexParam::Polar {
                    r: r.clone(),
                    turn: t.clone(),
                });
            }
        }
        out
    }
}

/// Initial vector of an orbit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartVector {
    /// Basis vector with natural index `k`.
    Basis { k: i64 },
    /// Eigenvector of `H_p + H_p*` from the recurrence.
    EigenSum { lambda: ComplexParam },
    /// Eigenvector of `H_p`.
    EigenHp { lambda: ComplexParam },
}

fn default_hypotheses() -> Vec<Hypothesis> {
    vec![Hypothesis::Hyp1, Hypothesis::Hyp2, Hypothesis::Hyp3]
}

fn default_gamma() -> GammaChoice {
    GammaChoice::SqrtNLogN
}

fn default_lambda_abs() -> Vec<RealParam> {
    vec![RealParam::rational(1)]
}

fn one() -> Vec<ComplexParam> {
    Vec::new()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    /// Tabulate `ω_{n,p}` and check it against the composition rule.
    Weights {
        #[serde(default)]
        n_min: Option<u64>,
        n_max: u64,
    },
    /// Hypothesis certificates.
    Certify {
        #[serde(default = "default_hypotheses")]
        hypotheses: Vec<Hypothesis>,
        #[serde(default = "default_gamma")]
        gamma: GammaChoice,
        #[serde(default = "default_lambda_abs")]
        lambda_abs: Vec<RealParam>,
        /// Hyp1 partial sums up to this Jacobi index.
        #[serde(default)]
        hyp1_n_max: Option<u64>,
        /// Hyp2 range in Jacobi indices.
        #[serde(default)]
        hyp2_range: Option<[u64; 2]>,
        /// Hyp3 and (3.11)-type ranges in Jacobi indices.
        #[serde(default)]
        hyp3_range: Option<[u64; 2]>,
        /// Indices verified past the closed-form theta threshold.
        #[serde(default)]
        theta_extra: Option<u64>,
    },
    /// Solve the recurrence and certify the ℓ² tail.
    Recurrence {
        lambda: ComplexParam,
        n: usize,
        #[serde(default)]
        gamma: Option<GammaChoice>,
    },
    /// Eigenvectors of `H_p + H_p*` at `n` and `2n` on a λ grid.
    Eigensum {
        grid: LambdaGrid,
        n: usize,
        #[serde(default = "default_gamma")]
        gamma: GammaChoice,
    },
    Orbit {
        operator: OperatorKind,
        start: StartVector,
        dim: usize,
        steps: usize,
    },
    /// Periodic point `Σ a_m φ_{δ_m}` of `H_p + H_p*`.
    PeriodicSum {
        roots: Vec<Rotation>,
        #[serde(default = "one")]
        amplitudes: Vec<ComplexParam>,
        n: usize,
        #[serde(default)]
        gamma: Option<GammaChoice>,
    },
    /// Periodic point `φ_{s,N}` of `H_p` and the block identities.
    PeriodicHp {
        s: u64,
        period: u64,
        n_trunc: u64,
        #[serde(default)]
        blocks: Option<u64>,
    },
    /// Approximate `Σ a_s P_s` (starting at `s = p`) by a periodic point of `H_p`.
    Approximate {
        coefficients: Vec<ComplexParam>,
        epsilons: Vec<f64>,
        #[serde(default)]
        n_max: Option<u64>,
    },
    /// Function-space checks by quadrature.
    Quadrature {
        #[serde(default)]
        n_max: Option<u64>,
        #[serde(default)]
        order: Option<usize>,
        #[serde(default)]
        cutoff: Option<f64>,
        /// Basis function sampled to `samples.csv` on `[-1, 1]²`.
        #[serde(default)]
        sample_index: Option<u64>,
    },
    /// Weight and moment asymptotics.
    Asymptotics { probes: Vec<u64> },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Weights { .. } => "weights",
            Task::Certify { .. } => "certify",
            Task::Recurrence { .. } => "recurrence",
            Task::Eigensum { .. } => "eigensum",
            Task::Orbit { .. } => "orbit",
            Task::PeriodicSum { .. } => "periodic_sum",
            Task::PeriodicHp { .. } => "periodic_hp",
            Task::Approximate { .. } => "approximate",
            Task::Quadrature { .. } => "quadrature",
            Task::Asymptotics { .. } => "asymptotics",
        }
    }
}

impl Scenario {
    /// Parse with the JSON path and position of the first offending field.
    pub fn parse(text: &str, origin: &str) -> Result<Scenario> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!(
                "{origin}:{}:{}: at `{path}`: {inner}",
                inner.line(),
                inner.column()
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Scenario::parse(&text, &path.display().to_string())
    }

    pub fn precision(&self) -> Result<Precision> {
        match self.digits {
            Some(d) => Precision::from_digits(d),
            None => Precision::from_env(),
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!(
                "{}-{}-p{}",
                self.task.name(),
                self.space.kind_name(),
                self.space.p
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_certify_scenario() {
        let s = Scenario::parse(
            r#"{"space": {"kind": "classic_bargmann", "p": 1},
                "task": {"type": "certify", "lambda_abs": ["1", "2"]}}"#,
            "t",
        )
        .unwrap();
        assert_eq!(s.task.name(), "certify");
        assert_eq!(s.label(), "certify-classic_bargmann-p1");
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = Scenario::parse(
            "{\"space\": {\"kind\": \"classic_bargmann\"},\n \"task\": {\"type\": \"recurrence\", \"lambda\": {\"re\": \"x\"}, \"n\": 5}}",
            "s.json",
        )
        .unwrap_err()
        .to_string();
        assert!(e.contains("s.json:2:"), "{e}");
        assert!(e.contains("task"), "{e}");
        let e = Scenario::parse(
            r#"{"space": {"kind": "hyperbolic"}, "task": {"type": "weights", "n_max": 3}}"#,
            "s",
        )
        .unwrap_err()
        .to_string();
        assert!(e.contains("`space"), "{e}");
    }

    #[test]
    fn complex_params() {
        let c: ComplexParam = serde_json::from_str(r#"{"r": "2", "turn": "1/4"}"#).unwrap();
        let z = c.to_complex(64);
        assert!(z.real().to_f64().abs() < 1e-15 && (z.imag().to_f64() - 2.0).abs() < 1e-15);
        let c: ComplexParam = serde_json::from_str(r#"{"re": "1/2"}"#).unwrap();
        assert_eq!(c.to_complex(64), Complex::with_val(64, 0.5));
    }
}
