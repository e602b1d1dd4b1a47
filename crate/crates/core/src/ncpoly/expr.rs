use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::poly::WordTensor;
use crate::scalars::{GaussianRational as GR, ParamBinding, ScalarError, ScalarExpr};
use crate::syntax::{self, RawExpr, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("bad series atom: {0}")]
    BadAtom(String),
    #[error("'{0}' is not a linear combination of generators")]
    NotLinear(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("cannot multiply a rank-{0} tensor by a rank-{1} tensor")]
    RankMismatch(usize, usize),
    #[error("negative power of z survives in the expansion ({0})")]
    Irregular(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    Exp,
    Cosh,
    Sinh,
    Cos,
    Sin,
    /// sinh(a z t)/z
    Sinhc,
    /// sin(a z t)/z
    Sinc,
    /// cosh(√w z t)
    CoshSqrt,
    /// sinh(√w z t)/√w
    SinhcSqrt,
}

impl AtomKind {
    pub const ALL: [AtomKind; 9] = [
        AtomKind::Exp,
        AtomKind::Cosh,
        AtomKind::Sinh,
        AtomKind::Cos,
        AtomKind::Sin,
        AtomKind::Sinhc,
        AtomKind::Sinc,
        AtomKind::CoshSqrt,
        AtomKind::SinhcSqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AtomKind::Exp => "exp",
            AtomKind::Cosh => "cosh",
            AtomKind::Sinh => "sinh",
            AtomKind::Cos => "cos",
            AtomKind::Sin => "sin",
            AtomKind::Sinhc => "sinhc",
            AtomKind::Sinc => "sinc",
            AtomKind::CoshSqrt => "cosh_sqrt",
            AtomKind::SinhcSqrt => "sinhc_sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<AtomKind> {
        AtomKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Lowest z-order present in the expansion.
    pub fn min_order(self) -> i32 {
        match self {
            AtomKind::Sinh | AtomKind::Sin | AtomKind::SinhcSqrt => 1,
            _ => 0,
        }
    }

    /// Coefficient factor, z-order and argument power of the d-th series term,
    /// or `None` if the power does not occur. `p` is the scale a (or the
    /// square parameter w for the `_sqrt` kinds).
    fn series_term(self, d: u32, p: &GR) -> Option<(i32, GR)> {
        let even = d.is_multiple_of(2);
        let alternating = if (d / 2).is_multiple_of(2) {
            GR::one()
        } else {
            -GR::one()
        };
        let a_pow = || p.pow(d as i32).expect("nonnegative power");
        let fact = factorial(d);
        let over_fact = |v: GR| v.scale(&fact.recip());
        match self {
            AtomKind::Exp => Some((d as i32, over_fact(a_pow()))),
            AtomKind::Cosh if even => Some((d as i32, over_fact(a_pow()))),
            AtomKind::Sinh if !even => Some((d as i32, over_fact(a_pow()))),
            AtomKind::Cos if even => Some((d as i32, over_fact(&a_pow() * &alternating))),
            AtomKind::Sin if !even => Some((d as i32, over_fact(&a_pow() * &alternating))),
            AtomKind::Sinhc if !even => Some((d as i32 - 1, over_fact(a_pow()))),
            AtomKind::Sinc if !even => Some((d as i32 - 1, over_fact(&a_pow() * &alternating))),
            AtomKind::CoshSqrt if even => Some((d as i32, over_fact(p.pow((d / 2) as i32).unwrap()))),
            AtomKind::SinhcSqrt if !even => Some((d as i32, over_fact(p.pow((d / 2) as i32).unwrap()))),
            _ => None,
        }
    }
}

fn factorial(d: u32) -> crate::scalars::Rational {
    let mut f = crate::scalars::Rational::one();
    for i in 2..=d {
        f *= crate::scalars::Rational::from_integer(i.into());
    }
    f
}

/// A series in z times a linear combination of pairwise commuting generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesAtom {
    pub kind: AtomKind,
    pub param: ScalarExpr,
    pub arg: Vec<(usize, ScalarExpr)>,
}

impl SeriesAtom {
    /// Maclaurin truncation as commutative words (sorted letters).
    pub fn expand(&self, binding: &ParamBinding, max_order: i32) -> Result<WordTensor, ExprError> {
        let p = self.param.eval(binding)?;
        let mut lin: BTreeMap<u8, GR> = BTreeMap::new();
        for (g, c) in &self.arg {
            let v = c.eval(binding)?;
            let e = lin.entry(*g as u8).or_insert_with(GR::zero);
            *e += &v;
        }
        lin.retain(|_, v| !v.is_zero());
        let mut out = WordTensor::zero(1);
        let mut power: BTreeMap<Vec<u8>, GR> = BTreeMap::new();
        power.insert(Vec::new(), GR::one());
        let mut d = 0u32;
        loop {
            let lowest = d as i32 - 1;
            if lowest > max_order {
                break;
            }
            if let Some((k, coef)) = self.kind.series_term(d, &p) {
                if k <= max_order && !coef.is_zero() {
                    for (w, c) in &power {
                        out.add_term(k, vec![w.clone()], &(&coef * c));
                    }
                }
            }
            if lin.is_empty() {
                // T = 0: only the constant term can survive
                if d > 0 {
                    break;
                }
            }
            let mut next: BTreeMap<Vec<u8>, GR> = BTreeMap::new();
            for (w, c) in &power {
                for (g, cg) in &lin {
                    let mut nw = w.clone();
                    let pos = nw.partition_point(|x| x <= g);
                    nw.insert(pos, *g);
                    let e = next.entry(nw).or_insert_with(GR::zero);
                    *e += &(c * cg);
                }
            }
            next.retain(|_, v| !v.is_zero());
            power = next;
            d += 1;
        }
        Ok(out)
    }

    pub fn generators(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.arg.iter().map(|(g, _)| *g).collect();
        g.sort();
        g.dedup();
        g
    }
}

/// Expression tree for brackets and coproducts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprTree {
    Scalar(ScalarExpr),
    /// z^k
    Z(i32),
    Gen(usize),
    Atom(SeriesAtom),
    Sum(Vec<ExprTree>),
    /// Ordered product.
    Product(Vec<ExprTree>),
    Tensor(Vec<ExprTree>),
    /// Full symmetrization of every word of the inner expression.
    Sym(Box<ExprTree>),
}

fn fold_scalar(s: ScalarExpr) -> ScalarExpr {
    if s.params().is_empty() && !format!("{s}").contains("sqrt") {
        if let Ok(v) = s.eval(&ParamBinding::default()) {
            return ScalarExpr::Num(v);
        }
    }
    s
}

impl ExprTree {
    pub fn parse(src: &str, labels: &[String]) -> Result<ExprTree, ExprError> {
        ExprTree::from_raw(&syntax::parse(src)?, labels)
    }

    pub fn from_raw(raw: &RawExpr, labels: &[String]) -> Result<ExprTree, ExprError> {
        if let Ok(s) = ScalarExpr::from_raw(raw) {
            return Ok(ExprTree::Scalar(fold_scalar(s)));
        }
        Ok(match raw {
            RawExpr::Int(_) => unreachable!("integers are scalars"),
            RawExpr::Ident(name) => {
                if name == "z" {
                    ExprTree::Z(1)
                } else if let Some(g) = labels.iter().position(|l| l == name) {
                    ExprTree::Gen(g)
                } else {
                    return Err(ExprError::UnknownIdentifier(name.clone()));
                }
            }
            RawExpr::Call(name, args) => {
                if name == "Sym" || name == "sym" {
                    if args.len() != 1 {
                        return Err(ExprError::Unsupported("Sym takes one argument".into()));
                    }
                    ExprTree::Sym(Box::new(ExprTree::from_raw(&args[0], labels)?))
                } else if let Some(kind) = AtomKind::from_name(name) {
                    let (param, arg) = match args.as_slice() {
                        [t] => (ScalarExpr::int(1), t),
                        [p, t] => (fold_scalar(ScalarExpr::from_raw(p)?), t),
                        _ => return Err(ExprError::BadAtom(format!("{name} takes (param; argument)"))),
                    };
                    ExprTree::Atom(SeriesAtom {
                        kind,
                        param,
                        arg: lower_linear(arg, labels)?,
                    })
                } else {
                    return Err(ExprError::UnknownIdentifier(format!("{name}(..)")));
                }
            }
            RawExpr::Neg(a) => ExprTree::Product(vec![
                ExprTree::Scalar(ScalarExpr::int(-1)),
                ExprTree::from_raw(a, labels)?,
            ]),
            RawExpr::Add(a, b) => {
                let mut v = Vec::new();
                push_flat(&mut v, ExprTree::from_raw(a, labels)?, |t| {
                    matches!(t, ExprTree::Sum(_))
                });
                push_flat(&mut v, ExprTree::from_raw(b, labels)?, |t| {
                    matches!(t, ExprTree::Sum(_))
                });
                ExprTree::Sum(v)
            }
            RawExpr::Sub(a, b) => {
                let mut v = Vec::new();
                push_flat(&mut v, ExprTree::from_raw(a, labels)?, |t| {
                    matches!(t, ExprTree::Sum(_))
                });
                v.push(ExprTree::Product(vec![
                    ExprTree::Scalar(ScalarExpr::int(-1)),
                    ExprTree::from_raw(b, labels)?,
                ]));
                ExprTree::Sum(v)
            }
            RawExpr::Mul(a, b) => {
                let mut v = Vec::new();
                push_flat(&mut v, ExprTree::from_raw(a, labels)?, |t| {
                    matches!(t, ExprTree::Product(_))
                });
                push_flat(&mut v, ExprTree::from_raw(b, labels)?, |t| {
                    matches!(t, ExprTree::Product(_))
                });
                ExprTree::Product(v)
            }
            RawExpr::Div(a, b) => {
                let den = match ExprTree::from_raw(b, labels)? {
                    ExprTree::Scalar(s) => ExprTree::Scalar(fold_scalar(ScalarExpr::Inv(Box::new(s)))),
                    ExprTree::Z(k) => ExprTree::Z(-k),
                    _ => return Err(ExprError::Unsupported("division by a non-scalar".into())),
                };
                let mut v = Vec::new();
                push_flat(&mut v, ExprTree::from_raw(a, labels)?, |t| {
                    matches!(t, ExprTree::Product(_))
                });
                v.push(den);
                ExprTree::Product(v)
            }
            RawExpr::Pow(a, e) => {
                let k = e
                    .as_integer()
                    .and_then(|k| i32::try_from(k).ok())
                    .ok_or_else(|| ExprError::Unsupported("non-integer exponent".into()))?;
                match ExprTree::from_raw(a, labels)? {
                    ExprTree::Z(j) => ExprTree::Z(j * k),
                    base if k >= 0 => {
                        if k == 0 {
                            ExprTree::Scalar(ScalarExpr::int(1))
                        } else {
                            ExprTree::Product(vec![base; k as usize])
                        }
                    }
                    _ => return Err(ExprError::Unsupported("negative power of a non-scalar".into())),
                }
            }
            RawExpr::Tensor(a, b) => {
                let mut v = Vec::new();
                push_flat(&mut v, ExprTree::from_raw(a, labels)?, |t| {
                    matches!(t, ExprTree::Tensor(_))
                });
                v.push(ExprTree::from_raw(b, labels)?);
                ExprTree::Tensor(v)
            }
        })
    }

    /// Lower bound on the z-order of every term.
    pub fn min_order(&self) -> i32 {
        match self {
            ExprTree::Scalar(_) | ExprTree::Gen(_) => 0,
            ExprTree::Z(k) => *k,
            ExprTree::Atom(a) => a.kind.min_order(),
            ExprTree::Sum(v) => v.iter().map(ExprTree::min_order).min().unwrap_or(0),
            ExprTree::Product(v) | ExprTree::Tensor(v) => v.iter().map(ExprTree::min_order).sum(),
            ExprTree::Sym(a) => a.min_order(),
        }
    }

    /// Tensor rank of the value (1 for ordinary polynomials).
    pub fn rank(&self) -> usize {
        match self {
            ExprTree::Tensor(v) => v.iter().map(ExprTree::rank).sum(),
            ExprTree::Sum(v) | ExprTree::Product(v) => v.iter().map(ExprTree::rank).max().unwrap_or(1),
            _ => 1,
        }
    }

    pub fn atoms(&self) -> Vec<&SeriesAtom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a SeriesAtom>) {
        match self {
            ExprTree::Atom(a) => out.push(a),
            ExprTree::Sum(v) | ExprTree::Product(v) | ExprTree::Tensor(v) => {
                v.iter().for_each(|t| t.collect_atoms(out))
            }
            ExprTree::Sym(a) => a.collect_atoms(out),
            _ => {}
        }
    }

    /// Evaluates in the free algebra, keeping z-orders ≤ `max_order`.
    pub fn eval_words(&self, binding: &ParamBinding, max_order: i32) -> Result<WordTensor, ExprError> {
        Ok(match self {
            ExprTree::Scalar(s) => {
                if max_order < 0 {
                    WordTensor::zero(1)
                } else {
                    WordTensor::scalar(0, s.eval(binding)?)
                }
            }
            ExprTree::Z(k) => {
                if *k > max_order {
                    WordTensor::zero(1)
                } else {
                    WordTensor::scalar(*k, GR::one())
                }
            }
            ExprTree::Gen(g) => {
                if max_order < 0 {
                    WordTensor::zero(1)
                } else {
                    WordTensor::word(vec![*g as u8])
                }
            }
            ExprTree::Atom(a) => a.expand(binding, max_order)?,
            ExprTree::Sum(v) => {
                let mut acc = WordTensor::zero(self.rank());
                for t in v {
                    let val = t.eval_words(binding, max_order)?;
                    if val.rank() != acc.rank() && !val.is_zero() {
                        return Err(ExprError::RankMismatch(acc.rank(), val.rank()));
                    }
                    acc.add_assign(&val);
                }
                acc
            }
            ExprTree::Product(v) | ExprTree::Tensor(v) => {
                let tensor = matches!(self, ExprTree::Tensor(_));
                let mins: Vec<i32> = v.iter().map(ExprTree::min_order).collect();
                let total: i32 = mins.iter().sum();
                let mut acc = WordTensor::scalar(0, GR::one());
                let mut first = true;
                for (i, t) in v.iter().enumerate() {
                    let own = max_order - (total - mins[i]);
                    let val = t.eval_words(binding, own)?;
                    let rest: i32 = mins[i + 1..].iter().sum();
                    let keep = max_order - rest;
                    acc = if tensor && !first {
                        tensor_words(&acc, &val, keep)
                    } else {
                        mul_words(&acc, &val, keep)?
                    };
                    first = false;
                }
                acc
            }
            ExprTree::Sym(inner) => {
                let val = inner.eval_words(binding, max_order)?;
                if val.rank() != 1 {
                    return Err(ExprError::Unsupported("Sym of a tensor".into()));
                }
                let mut out = WordTensor::zero(1);
                for (k, legs, c) in val.terms() {
                    let perms = distinct_permutations(&legs[0]);
                    let share = c.scale(&crate::scalars::Rational::new(1.into(), (perms.len() as i64).into()));
                    for p in perms {
                        out.add_term(k, vec![p], &share);
                    }
                }
                out
            }
        })
    }
}

fn push_flat(v: &mut Vec<ExprTree>, t: ExprTree, same: impl Fn(&ExprTree) -> bool) {
    if same(&t) {
        match t {
            ExprTree::Sum(inner) | ExprTree::Product(inner) | ExprTree::Tensor(inner) => v.extend(inner),
            _ => unreachable!(),
        }
    } else {
        v.push(t);
    }
}

fn lower_linear(raw: &RawExpr, labels: &[String]) -> Result<Vec<(usize, ScalarExpr)>, ExprError> {
    let not_linear = || ExprError::NotLinear(format!("{raw:?}"));
    let scale = |v: Vec<(usize, ScalarExpr)>, s: ScalarExpr| -> Vec<(usize, ScalarExpr)> {
        v.into_iter()
            .map(|(g, c)| (g, fold_scalar(ScalarExpr::Mul(Box::new(s.clone()), Box::new(c)))))
            .collect()
    };
    Ok(match raw {
        RawExpr::Ident(name) => {
            let g = labels.iter().position(|l| l == name).ok_or_else(not_linear)?;
            vec![(g, ScalarExpr::int(1))]
        }
        RawExpr::Neg(a) => scale(lower_linear(a, labels)?, ScalarExpr::int(-1)),
        RawExpr::Add(a, b) => {
            let mut v = lower_linear(a, labels)?;
            v.extend(lower_linear(b, labels)?);
            v
        }
        RawExpr::Sub(a, b) => {
            let mut v = lower_linear(a, labels)?;
            v.extend(scale(lower_linear(b, labels)?, ScalarExpr::int(-1)));
            v
        }
        RawExpr::Mul(a, b) => match (ScalarExpr::from_raw(a), ScalarExpr::from_raw(b)) {
            (Ok(s), Err(_)) => scale(lower_linear(b, labels)?, s),
            (Err(_), Ok(s)) => scale(lower_linear(a, labels)?, s),
            _ => return Err(not_linear()),
        },
        RawExpr::Div(a, b) => {
            let s = ScalarExpr::from_raw(b).map_err(|_| not_linear())?;
            scale(lower_linear(a, labels)?, ScalarExpr::Inv(Box::new(s)))
        }
        _ => return Err(not_linear()),
    })
}

pub(crate) fn mul_words(a: &WordTensor, b: &WordTensor, max_order: i32) -> Result<WordTensor, ExprError> {
    let rank = match (a.rank(), b.rank()) {
        (1, r) if a.is_scalar_like() => r,
        (r, 1) if b.is_scalar_like() => r,
        (ra, rb) if ra == rb => ra,
        (ra, rb) => {
            if a.is_zero() || b.is_zero() {
                ra.max(rb)
            } else {
                return Err(ExprError::RankMismatch(ra, rb));
            }
        }
    };
    let mut out = WordTensor::zero(rank);
    for (ka, la, ca) in a.terms() {
        for (kb, lb, cb) in b.terms() {
            let k = ka + kb;
            if k > max_order {
                continue;
            }
            let legs: Vec<Vec<u8>> = if la.len() == lb.len() {
                la.iter()
                    .zip(lb)
                    .map(|(x, y)| {
                        let mut w = x.clone();
                        w.extend_from_slice(y);
                        w
                    })
                    .collect()
            } else if la.len() == 1 {
                lb.clone()
            } else {
                la.clone()
            };
            out.add_term(k, legs, &(ca * cb));
        }
    }
    Ok(out)
}

fn tensor_words(a: &WordTensor, b: &WordTensor, max_order: i32) -> WordTensor {
    let mut out = WordTensor::zero(a.rank() + b.rank());
    for (ka, la, ca) in a.terms() {
        for (kb, lb, cb) in b.terms() {
            let k = ka + kb;
            if k > max_order {
                continue;
            }
            let mut legs = la.clone();
            legs.extend(lb.iter().cloned());
            out.add_term(k, legs, &(ca * cb));
        }
    }
    out
}

/// Distinct rearrangements of a word, in lexicographic order.
pub fn distinct_permutations(word: &[u8]) -> Vec<Vec<u8>> {
    let mut w = word.to_vec();
    w.sort();
    let mut out = vec![w.clone()];
    // next_permutation
    loop {
        let n = w.len();
        if n < 2 {
            break;
        }
        let Some(i) = (0..n - 1).rev().find(|&i| w[i] < w[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| w[j] > w[i]).unwrap();
        w.swap(i, j);
        w[i + 1..].reverse();
        out.push(w.clone());
    }
    out
}

fn fmt_scalar_factor(s: &ScalarExpr) -> String {
    let text = s.to_string();
    let simple = text.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '/');
    if simple {
        text
    } else {
        format!("({text})")
    }
}

pub(crate) fn format_linear_arg(arg: &[(usize, ScalarExpr)], labels: &[String]) -> String {
    let mut s = String::new();
    for (g, c) in arg {
        if !s.is_empty() {
            s.push_str(" + ");
        }
        if *c == ScalarExpr::int(1) {
            s.push_str(&labels[*g]);
        } else {
            s.push_str(&format!("{}*{}", fmt_scalar_factor(c), labels[*g]));
        }
    }
    s
}

/// Display with generator labels; the output reparses to an equivalent tree.
pub struct Labeled<'a>(pub &'a ExprTree, pub &'a [String]);

impl fmt::Display for Labeled<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = self.1;
        let wrap = |t: &ExprTree| -> String {
            let inner = Labeled(t, labels).to_string();
            if matches!(t, ExprTree::Sum(_) | ExprTree::Tensor(_)) {
                format!("({inner})")
            } else {
                inner
            }
        };
        match self.0 {
            ExprTree::Scalar(s) => f.write_str(&fmt_scalar_factor(s)),
            ExprTree::Z(1) => f.write_str("z"),
            ExprTree::Z(k) => write!(f, "z^{k}"),
            ExprTree::Gen(g) => f.write_str(&labels[*g]),
            ExprTree::Atom(a) => write!(
                f,
                "{}({}; {})",
                a.kind.name(),
                a.param,
                format_linear_arg(&a.arg, labels)
            ),
            ExprTree::Sum(v) => {
                let parts: Vec<String> = v.iter().map(|t| Labeled(t, labels).to_string()).collect();
                f.write_str(&parts.join(" + "))
            }
            ExprTree::Product(v) => {
                let parts: Vec<String> = v.iter().map(wrap).collect();
                f.write_str(&parts.join("*"))
            }
            ExprTree::Tensor(v) => {
                let parts: Vec<String> = v.iter().map(wrap).collect();
                f.write_str(&parts.join(" o "))
            }
            ExprTree::Sym(a) => write!(f, "Sym({})", Labeled(a, labels)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Vec<String> {
        ["x0", "x1", "X0", "X1"].iter().map(|s| s.to_string()).collect()
    }

    fn q(n: i64, d: i64) -> GR {
        GR::from_frac(n, d)
    }

    #[test]
    fn exp_series() {
        let t = ExprTree::parse("exp(1; X0)", &labels()).unwrap();
        let w = t.eval_words(&ParamBinding::default(), 2).unwrap();
        let mut want = WordTensor::zero(1);
        want.add_term(0, vec![vec![]], &q(1, 1));
        want.add_term(1, vec![vec![2]], &q(1, 1));
        want.add_term(2, vec![vec![2, 2]], &q(1, 2));
        assert_eq!(w, want);
    }

    #[test]
    fn sinhc_series() {
        let t = ExprTree::parse("sinhc(1; X0)", &labels()).unwrap();
        let w = t.eval_words(&ParamBinding::default(), 3).unwrap();
        let mut want = WordTensor::zero(1);
        want.add_term(0, vec![vec![2]], &q(1, 1));
        want.add_term(2, vec![vec![2, 2, 2]], &q(1, 6));
        assert_eq!(w, want);
    }

    #[test]
    fn cosh_sqrt_with_negative_square_is_cos() {
        let t = ExprTree::parse("cosh_sqrt(-1; x1)", &labels()).unwrap();
        let w = t.eval_words(&ParamBinding::default(), 2).unwrap();
        let mut want = WordTensor::zero(1);
        want.add_term(0, vec![vec![]], &q(1, 1));
        want.add_term(2, vec![vec![1, 1]], &q(-1, 2));
        assert_eq!(w, want);
        let c = ExprTree::parse("cos(1; x1)", &labels()).unwrap();
        assert_eq!(c.eval_words(&ParamBinding::default(), 2).unwrap(), want);
    }

    #[test]
    fn two_z_scaled_sinhc() {
        // omega/2 * sinhc(2; X0) at omega = 1 is X0 + (2/3) z^2 X0^3
        let b = ParamBinding::parse_assignments("omega=1").unwrap();
        let t = ExprTree::parse("omega/2*sinhc(2; X0)", &labels()).unwrap();
        let w = t.eval_words(&b, 2).unwrap();
        let mut want = WordTensor::zero(1);
        want.add_term(0, vec![vec![2]], &q(1, 1));
        want.add_term(2, vec![vec![2, 2, 2]], &q(2, 3));
        assert_eq!(w, want);
    }

    #[test]
    fn inverse_z_cancels_against_odd_series() {
        let b = ParamBinding::parse_assignments("omega=-1").unwrap();
        let t = ExprTree::parse("z^-1*sinhc_sqrt(omega; x1)", &labels()).unwrap();
        let w = t.eval_words(&b, 2).unwrap();
        assert_eq!(w.min_order(), Some(0));
        let mut want = WordTensor::zero(1);
        want.add_term(0, vec![vec![1]], &q(1, 1));
        want.add_term(2, vec![vec![1, 1, 1]], &q(-1, 6));
        assert_eq!(w, want);
    }

    #[test]
    fn commutative_argument_expansion() {
        let b = ParamBinding::parse_assignments("lambda=2").unwrap();
        let t = ExprTree::parse("exp(1; -lambda*x0 + X0)", &labels()).unwrap();
        let w = t.eval_words(&b, 2).unwrap();
        // (X0 - 2 x0)^2 / 2 = 2 x0^2 - 2 x0 X0 + X0^2/2 with sorted letters
        let get = |word: Vec<u8>| w.terms.get(&(2, vec![word])).cloned().unwrap_or_else(GR::zero);
        assert_eq!(get(vec![0, 0]), q(2, 1));
        assert_eq!(get(vec![0, 2]), q(-2, 1));
        assert_eq!(get(vec![2, 2]), q(1, 2));
    }

    #[test]
    fn tensor_trees() {
        let t = ExprTree::parse("exp(-1; x1) o x0 + x0 o exp(1; x1) - z*(x1 o x0 - x0 o x1)", &labels()).unwrap();
        assert_eq!(t.rank(), 2);
        let w = t.eval_words(&ParamBinding::default(), 1).unwrap();
        assert_eq!(w.rank(), 2);
        // z-order 1: -x1⊗x0 + x0⊗x1 - x1⊗x0 + x0⊗x1
        let c = w.terms.get(&(1, vec![vec![0], vec![1]])).cloned();
        assert_eq!(c, Some(q(2, 1)));
    }

    #[test]
    fn sym_averages_permutations() {
        let t = ExprTree::parse("Sym(x1*X0)", &labels()).unwrap();
        let w = t.eval_words(&ParamBinding::default(), 0).unwrap();
        assert_eq!(w.terms.get(&(0, vec![vec![1, 2]])), Some(&q(1, 2)));
        assert_eq!(w.terms.get(&(0, vec![vec![2, 1]])), Some(&q(1, 2)));
        let single = ExprTree::parse("Sym(x0)", &labels()).unwrap();
        assert_eq!(
            single.eval_words(&ParamBinding::default(), 0).unwrap(),
            WordTensor::word(vec![0])
        );
    }

    #[test]
    fn distinct_permutation_counts() {
        assert_eq!(distinct_permutations(&[1, 0, 0]).len(), 3);
        assert_eq!(distinct_permutations(&[3, 2, 1, 0]).len(), 24);
        assert_eq!(distinct_permutations(&[]).len(), 1);
    }

    #[test]
    fn display_reparses() {
        let b = ParamBinding::parse_assignments("lambda=3/4,rho=2,omega=-1").unwrap();
        for src in [
            "-cosh(1; X0)*x0 - cosh(1; x1)*X1",
            "(1+rho)*x1*cosh(rho; X0) - rho*X1",
            "exp(-lambda; x0) o x1 + x1 o exp(lambda; x0)",
            "z*(x1 o x0 - x0 o x1)",
            "omega*z^-1*sinhc_sqrt(omega; x1)*cosh(1; X0)",
            "-omega*Sym(x1*cosh(1; X0))",
        ] {
            let t = ExprTree::parse(src, &labels()).unwrap();
            let shown = Labeled(&t, &labels()).to_string();
            let again = ExprTree::parse(&shown, &labels()).unwrap();
            assert_eq!(
                t.eval_words(&b, 4).unwrap(),
                again.eval_words(&b, 4).unwrap(),
                "{src} => {shown}"
            );
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(
            ExprTree::parse("y7", &labels()),
            Err(ExprError::UnknownIdentifier(_))
        ));
        assert!(matches!(
            ExprTree::parse("exp(1; x0*x1)", &labels()),
            Err(ExprError::NotLinear(_))
        ));
        assert!(ExprTree::parse("x0/x1", &labels()).is_err());
    }
}
