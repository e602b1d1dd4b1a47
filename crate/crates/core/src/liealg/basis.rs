use num_traits::{One, Signed, Zero};

use super::double::{DoubleAlgebra, LieAlgebra};
use crate::linalg::{invert, Matrix};
use crate::report::{CheckOutcome, Residual};
use crate::scalars::{GaussianRational as GR, ParamBinding, Rational, ScalarError, ScalarExpr};
use crate::syntax::{self, RawExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BasisChangeError {
    #[error("change of basis is singular")]
    Singular,
    #[error("bracket [{0}] has an irrational coefficient in the new basis")]
    IrrationalBracket(String),
    #[error("row '{row}': {msg}")]
    BadRow { row: String, msg: String },
}

/// One new generator, `sqrt(radical) · Σ body_i e_i` with `radical ∈ ℚ⁺`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisRow {
    pub radical: Rational,
    pub body: Vec<GR>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisChange {
    pub labels: Vec<String>,
    pub rows: Vec<BasisRow>,
}

#[derive(Debug, Clone)]
pub struct BasisChangeReport {
    /// Pass iff the new basis has the canonical pairing matrix.
    pub pairing: CheckOutcome,
    pub transformed: Result<DoubleAlgebra, BasisChangeError>,
}

pub(crate) fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

#[derive(Debug, Clone)]
enum Lin {
    Scalar(Rational, GR),
    Vector(Rational, Vec<GR>),
}

fn normalize(sq: Rational, v: GR) -> (Rational, GR) {
    match rational_sqrt(&sq) {
        Some(r) => (Rational::one(), v.scale(&r)),
        None => (sq, v),
    }
}

fn lower(raw: &RawExpr, labels: &[String], binding: &ParamBinding) -> Result<Lin, String> {
    if let Ok(s) = ScalarExpr::from_raw(raw) {
        return match s.eval(binding) {
            Ok(v) => Ok(Lin::Scalar(Rational::one(), v)),
            Err(ScalarError::UndeclaredRadical(_)) => lower_structural(raw, labels, binding),
            Err(e) => Err(e.to_string()),
        };
    }
    lower_structural(raw, labels, binding)
}

fn lower_structural(raw: &RawExpr, labels: &[String], binding: &ParamBinding) -> Result<Lin, String> {
    let d = labels.len();
    match raw {
        RawExpr::Ident(name) => {
            let i = labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| format!("unknown generator '{name}'"))?;
            let mut v = vec![GR::zero(); d];
            v[i] = GR::one();
            Ok(Lin::Vector(Rational::one(), v))
        }
        RawExpr::Call(name, args) if name == "sqrt" && args.len() == 1 => {
            let q = ScalarExpr::from_raw(&args[0])
                .map_err(|e| e.to_string())?
                .eval(binding)
                .map_err(|e| e.to_string())?;
            if !q.is_real() || !q.re().is_positive() {
                return Err(format!("sqrt of {q} is not a positive rational"));
            }
            let (sq, v) = normalize(q.re().clone(), GR::one());
            Ok(Lin::Scalar(sq, v))
        }
        RawExpr::Neg(a) => Ok(match lower(a, labels, binding)? {
            Lin::Scalar(q, v) => Lin::Scalar(q, -v),
            Lin::Vector(q, v) => Lin::Vector(q, v.iter().map(|c| -c).collect()),
        }),
        RawExpr::Add(a, b) | RawExpr::Sub(a, b) => {
            let sign = if matches!(raw, RawExpr::Sub(..)) {
                -GR::one()
            } else {
                GR::one()
            };
            match (lower(a, labels, binding)?, lower(b, labels, binding)?) {
                (Lin::Vector(qa, va), Lin::Vector(qb, vb)) => {
                    if qa != qb && !(va.iter().all(Zero::is_zero) || vb.iter().all(Zero::is_zero)) {
                        return Err("sum mixes different radicals".into());
                    }
                    Ok(Lin::Vector(
                        qa,
                        va.iter().zip(&vb).map(|(x, y)| x + &(y * &sign)).collect(),
                    ))
                }
                (Lin::Scalar(..), _) | (_, Lin::Scalar(..)) => Err("constant term in a linear form".into()),
            }
        }
        RawExpr::Mul(a, b) => match (lower(a, labels, binding)?, lower(b, labels, binding)?) {
            (Lin::Scalar(qa, s), Lin::Vector(qb, v)) | (Lin::Vector(qb, v), Lin::Scalar(qa, s)) => {
                let (q, unit) = normalize(&qa * &qb, GR::one());
                Ok(Lin::Vector(q, v.iter().map(|c| &(c * &s) * &unit).collect()))
            }
            (Lin::Scalar(qa, a), Lin::Scalar(qb, b)) => {
                let (q, v) = normalize(&qa * &qb, a * b);
                Ok(Lin::Scalar(q, v))
            }
            _ => Err("product of two generators in a linear form".into()),
        },
        RawExpr::Div(a, b) => match (lower(a, labels, binding)?, lower(b, labels, binding)?) {
            (num, Lin::Scalar(qb, s)) => {
                let inv = s.inv().map_err(|e| e.to_string())?;
                // 1/sqrt(q) = sqrt(q)/q
                let inv = inv.scale(&qb.recip());
                match num {
                    Lin::Vector(qa, v) => {
                        let (q, unit) = normalize(&qa * &qb, GR::one());
                        Ok(Lin::Vector(q, v.iter().map(|c| &(c * &inv) * &unit).collect()))
                    }
                    Lin::Scalar(qa, a) => {
                        let (q, v) = normalize(&qa * &qb, a * inv);
                        Ok(Lin::Scalar(q, v))
                    }
                }
            }
            _ => Err("division by a generator".into()),
        },
        _ => Err(format!("unsupported term {raw:?}")),
    }
}

/// Parses a linear combination of the given generators, allowing one overall
/// square root of a positive rational.
pub fn linear_form(src: &str, labels: &[String], binding: &ParamBinding) -> Result<BasisRow, BasisChangeError> {
    let bad = |msg: String| BasisChangeError::BadRow {
        row: src.to_string(),
        msg,
    };
    let raw = syntax::parse(src).map_err(|e| bad(e.to_string()))?;
    match lower(&raw, labels, binding).map_err(bad)? {
        Lin::Vector(radical, body) => Ok(BasisRow { radical, body }),
        Lin::Scalar(..) => Err(bad("constant row".into())),
    }
}

impl BasisChange {
    pub fn identity(labels: &[String]) -> Self {
        let d = labels.len();
        BasisChange {
            labels: labels.to_vec(),
            rows: (0..d)
                .map(|i| BasisRow {
                    radical: Rational::one(),
                    body: (0..d).map(|j| if i == j { GR::one() } else { GR::zero() }).collect(),
                })
                .collect(),
        }
    }

    /// Rows are written over the generators of `old`.
    pub fn parse(
        new_labels: &[String],
        rows: &[String],
        old: &LieAlgebra,
        binding: &ParamBinding,
    ) -> Result<Self, BasisChangeError> {
        let rows = rows
            .iter()
            .map(|r| linear_form(r, old.labels(), binding))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BasisChange {
            labels: new_labels.to_vec(),
            rows,
        })
    }

    fn body_matrix(&self) -> Matrix {
        self.rows.iter().map(|r| r.body.clone()).collect()
    }

    pub fn apply(&self, d: &DoubleAlgebra) -> Result<BasisChangeReport, BasisChangeError> {
        let dim = d.dim();
        let b = self.body_matrix();
        let binv = invert(&b).ok_or(BasisChangeError::Singular)?;
        let p = d.pairing();
        let n = d.half_dim();

        let mut residuals = Vec::new();
        for a in 0..dim {
            for c in 0..dim {
                let mut body = GR::zero();
                for i in 0..dim {
                    for j in 0..dim {
                        if !p[i][j].is_zero() {
                            body += &(&(&b[a][i] * &b[c][j]) * &p[i][j]);
                        }
                    }
                }
                let want = if (a < n && c == a + n) || (a >= n && c + n == a) {
                    GR::one()
                } else {
                    GR::zero()
                };
                let loc = format!("<{},{}>", self.labels[a], self.labels[c]);
                let q = &self.rows[a].radical * &self.rows[c].radical;
                match rational_sqrt(&q) {
                    Some(s) => {
                        let got = body.scale(&s);
                        if got != want {
                            residuals.push(Residual::new(loc, 0, "", &got - &want));
                        }
                    }
                    None if body.is_zero() && want.is_zero() => {}
                    None => residuals.push(Residual::new(loc, 0, format!("sqrt({q})"), body)),
                }
            }
        }
        let pairing = CheckOutcome::from_residuals(residuals);

        let transformed = self.transform_brackets(d, &b, &binv).map(|alg| {
            let pairing_matrix = if pairing.pass {
                d.pairing().clone()
            } else {
                // pairing in the new basis where rational
                (0..dim)
                    .map(|a| {
                        (0..dim)
                            .map(|c| {
                                let q = &self.rows[a].radical * &self.rows[c].radical;
                                let mut body = GR::zero();
                                for i in 0..dim {
                                    for j in 0..dim {
                                        body += &(&(&b[a][i] * &b[c][j]) * &p[i][j]);
                                    }
                                }
                                rational_sqrt(&q).map_or_else(GR::zero, |s| body.scale(&s))
                            })
                            .collect()
                    })
                    .collect()
            };
            DoubleAlgebra::from_parts(n, alg, pairing_matrix)
        });
        Ok(BasisChangeReport { pairing, transformed })
    }

    fn transform_brackets(&self, d: &DoubleAlgebra, b: &Matrix, binv: &Matrix) -> Result<LieAlgebra, BasisChangeError> {
        let dim = d.dim();
        let mut err = None;
        let alg = LieAlgebra::from_fn(self.labels.clone(), |a, c| {
            let v = d.algebra().bracket_vec(&b[a], &b[c]);
            let mut out = vec![GR::zero(); dim];
            for (e, o) in out.iter_mut().enumerate() {
                let mut body = GR::zero();
                for (k, vk) in v.iter().enumerate() {
                    if !vk.is_zero() {
                        body += &(vk * &binv[k][e]);
                    }
                }
                if body.is_zero() {
                    continue;
                }
                let q = &(&self.rows[a].radical * &self.rows[c].radical) / &self.rows[e].radical;
                match rational_sqrt(&q) {
                    Some(s) => *o = body.scale(&s),
                    None => {
                        err.get_or_insert_with(|| {
                            BasisChangeError::IrrationalBracket(format!("{},{}", self.labels[a], self.labels[c]))
                        });
                    }
                }
            }
            out
        });
        match err {
            Some(e) => Err(e),
            None => Ok(alg),
        }
    }
}
