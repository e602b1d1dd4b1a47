//! Exact coefficient arithmetic over the Gaussian rationals ℚ(i) and
//! instantiation of symbolic coefficients under a parameter binding.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{self, RawExpr, SyntaxError};

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unbound parameter {0}")]
    Unbound(Param),
    #[error("no value declared for sqrt({0})")]
    UndeclaredRadical(String),
    #[error("declared sqrt({radicand}) = {value}, but {value}^2 = {square} differs from {radicand} = {expected}")]
    RadicalMismatch {
        radicand: String,
        value: String,
        square: String,
        expected: String,
    },
    #[error("'{0}' is not a scalar")]
    NotScalar(String),
    #[error("exponent in '{0}' must be an integer literal")]
    BadExponent(String),
    #[error("omega must be 1, -1 or 0, got {0}")]
    BadOmega(String),
    #[error("malformed binding '{0}' (expected name=value or sqrt(expr)=value)")]
    BadAssignment(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// An element `re + i·im` of ℚ(i), always in reduced form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    re: Rational,
    im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussianRational {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        Self::real(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn i() -> Self {
        GaussianRational {
            re: Rational::zero(),
            im: Rational::one(),
        }
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// |a|² = re² + im².
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_real() {
            return Ok(Self::real(self.re.recip()));
        }
        let n = self.norm_sqr();
        Ok(GaussianRational {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: i32) -> Result<Self, ScalarError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = GaussianRational::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GaussianRational {
            re: &self.re * r,
            im: if self.im.is_zero() {
                Rational::zero()
            } else {
                &self.im * r
            },
        }
    }

    /// Parses a numeric literal such as `3/4`, `-2`, `i*1/2` or `1/2+i*3`.
    pub fn parse(src: &str) -> Result<Self, ScalarError> {
        let raw = syntax::parse(src)?;
        let expr = ScalarExpr::from_raw(&raw)?;
        expr.eval(&ParamBinding::default())
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational {
            re: Rational::zero(),
            im: Rational::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::real(Rational::one())
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        let im = if self.im.is_zero() && rhs.im.is_zero() {
            Rational::zero()
        } else {
            &self.im + &rhs.im
        };
        GaussianRational {
            re: &self.re + &rhs.re,
            im,
        }
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        let im = if self.im.is_zero() && rhs.im.is_zero() {
            Rational::zero()
        } else {
            &self.im - &rhs.im
        };
        GaussianRational {
            re: &self.re - &rhs.re,
            im,
        }
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        match (self.im.is_zero(), rhs.im.is_zero()) {
            (true, true) => GaussianRational::real(&self.re * &rhs.re),
            (true, false) => GaussianRational {
                re: &self.re * &rhs.re,
                im: &self.re * &rhs.im,
            },
            (false, true) => GaussianRational {
                re: &self.re * &rhs.re,
                im: &self.im * &rhs.re,
            },
            (false, false) => GaussianRational {
                re: &self.re * &rhs.re - &self.im * &rhs.im,
                im: &self.re * &rhs.im + &self.im * &rhs.re,
            },
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: GaussianRational) -> GaussianRational {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: &GaussianRational) -> GaussianRational {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        if !rhs.im.is_zero() {
            self.im += &rhs.im;
        }
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, rhs: &GaussianRational) {
        self.re -= &rhs.re;
        if !rhs.im.is_zero() {
            self.im -= &rhs.im;
        }
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, rhs: &GaussianRational) {
        if self.im.is_zero() && rhs.im.is_zero() {
            self.re *= &rhs.re;
        } else {
            *self = &*self * rhs;
        }
    }
}

impl Sum for GaussianRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut acc = GaussianRational::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_rational(&self.re, f);
        }
        if !self.re.is_zero() {
            fmt_rational(&self.re, f)?;
            f.write_str(if self.im.is_negative() { "-" } else { "+" })?;
        } else if self.im.is_negative() {
            f.write_str("-")?;
        }
        let mag = self.im.abs();
        if mag.is_one() {
            f.write_str("i")
        } else {
            f.write_str("i*")?;
            fmt_rational(&mag, f)
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for GaussianRational {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GaussianRational::parse(s)
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        GaussianRational::from_int(n)
    }
}

impl Serialize for GaussianRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GaussianRational::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Deformation-independent parameters appearing in catalog coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Lambda,
    Rho,
    Mu,
    Omega,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::Lambda, Param::Rho, Param::Mu, Param::Omega];

    pub fn name(self) -> &'static str {
        match self {
            Param::Lambda => "lambda",
            Param::Rho => "rho",
            Param::Mu => "mu",
            Param::Omega => "omega",
        }
    }

    pub fn from_name(s: &str) -> Option<Param> {
        match s {
            "lambda" | "λ" => Some(Param::Lambda),
            "rho" | "ρ" => Some(Param::Rho),
            "mu" | "μ" => Some(Param::Mu),
            "omega" | "ω" => Some(Param::Omega),
            _ => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A coefficient that may mention parameters and declared radicals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScalarExpr {
    Num(GaussianRational),
    Param(Param),
    Sqrt(Box<ScalarExpr>),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
    Inv(Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, i32),
}

impl ScalarExpr {
    pub fn num(v: GaussianRational) -> Self {
        ScalarExpr::Num(v)
    }

    pub fn int(n: i64) -> Self {
        ScalarExpr::Num(GaussianRational::from_int(n))
    }

    pub fn parse(src: &str) -> Result<Self, ScalarError> {
        ScalarExpr::from_raw(&syntax::parse(src)?)
    }

    /// Lowers a raw syntax tree; fails on any non-scalar identifier.
    pub fn from_raw(raw: &RawExpr) -> Result<Self, ScalarError> {
        Ok(match raw {
            RawExpr::Int(n) => ScalarExpr::Num(GaussianRational::real(Rational::from_integer(n.clone()))),
            RawExpr::Ident(name) => {
                if name == "i" {
                    ScalarExpr::Num(GaussianRational::i())
                } else if let Some(p) = Param::from_name(name) {
                    ScalarExpr::Param(p)
                } else {
                    return Err(ScalarError::NotScalar(name.clone()));
                }
            }
            RawExpr::Call(name, args) if name == "sqrt" && args.len() == 1 => {
                ScalarExpr::Sqrt(Box::new(ScalarExpr::from_raw(&args[0])?))
            }
            RawExpr::Call(name, _) => return Err(ScalarError::NotScalar(format!("{name}(..)"))),
            RawExpr::Neg(a) => ScalarExpr::Neg(Box::new(ScalarExpr::from_raw(a)?)),
            RawExpr::Add(a, b) => {
                ScalarExpr::Add(Box::new(ScalarExpr::from_raw(a)?), Box::new(ScalarExpr::from_raw(b)?))
            }
            RawExpr::Sub(a, b) => ScalarExpr::Add(
                Box::new(ScalarExpr::from_raw(a)?),
                Box::new(ScalarExpr::Neg(Box::new(ScalarExpr::from_raw(b)?))),
            ),
            RawExpr::Mul(a, b) => {
                ScalarExpr::Mul(Box::new(ScalarExpr::from_raw(a)?), Box::new(ScalarExpr::from_raw(b)?))
            }
            RawExpr::Div(a, b) => ScalarExpr::Mul(
                Box::new(ScalarExpr::from_raw(a)?),
                Box::new(ScalarExpr::Inv(Box::new(ScalarExpr::from_raw(b)?))),
            ),
            RawExpr::Pow(a, e) => {
                let k = e
                    .as_integer()
                    .and_then(|k| i32::try_from(k).ok())
                    .ok_or_else(|| ScalarError::BadExponent(format!("{raw:?}")))?;
                ScalarExpr::Pow(Box::new(ScalarExpr::from_raw(a)?), k)
            }
            RawExpr::Tensor(..) => return Err(ScalarError::NotScalar("tensor product".into())),
        })
    }

    /// Parameters mentioned anywhere in the expression, radicands included.
    pub fn params(&self) -> Vec<Param> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<Param>) {
        match self {
            ScalarExpr::Num(_) => {}
            ScalarExpr::Param(p) => out.push(*p),
            ScalarExpr::Sqrt(a) | ScalarExpr::Neg(a) | ScalarExpr::Inv(a) | ScalarExpr::Pow(a, _) => {
                a.collect_params(out)
            }
            ScalarExpr::Add(a, b) | ScalarExpr::Mul(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    pub fn eval(&self, binding: &ParamBinding) -> Result<GaussianRational, ScalarError> {
        Ok(match self {
            ScalarExpr::Num(v) => v.clone(),
            ScalarExpr::Param(p) => binding.get(*p).cloned().ok_or(ScalarError::Unbound(*p))?,
            ScalarExpr::Sqrt(radicand) => binding.radical(radicand)?,
            ScalarExpr::Add(a, b) => a.eval(binding)? + b.eval(binding)?,
            ScalarExpr::Mul(a, b) => a.eval(binding)? * b.eval(binding)?,
            ScalarExpr::Neg(a) => -a.eval(binding)?,
            ScalarExpr::Inv(a) => a.eval(binding)?.inv()?,
            ScalarExpr::Pow(a, k) => a.eval(binding)?.pow(*k)?,
        })
    }

    fn prec(&self) -> u8 {
        match self {
            ScalarExpr::Add(..) => 1,
            ScalarExpr::Mul(..) | ScalarExpr::Inv(_) => 2,
            ScalarExpr::Neg(_) => 3,
            ScalarExpr::Pow(..) => 4,
            ScalarExpr::Num(v) => {
                if !v.is_real() && !v.re().is_zero() {
                    1
                } else if v.re().is_negative() || v.im().is_negative() {
                    3
                } else if !v.re().is_integer() || !v.im().is_zero() {
                    2
                } else {
                    5
                }
            }
            ScalarExpr::Param(_) | ScalarExpr::Sqrt(_) => 5,
        }
    }

    fn fmt_at(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.fmt_at(0, f)?;
            return f.write_str(")");
        }
        match self {
            ScalarExpr::Num(v) => write!(f, "{v}"),
            ScalarExpr::Param(p) => write!(f, "{p}"),
            ScalarExpr::Sqrt(a) => {
                f.write_str("sqrt(")?;
                a.fmt_at(0, f)?;
                f.write_str(")")
            }
            ScalarExpr::Add(a, b) => {
                a.fmt_at(1, f)?;
                if let ScalarExpr::Neg(inner) = b.as_ref() {
                    f.write_str("-")?;
                    inner.fmt_at(2, f)
                } else {
                    f.write_str("+")?;
                    b.fmt_at(2, f)
                }
            }
            ScalarExpr::Mul(a, b) => {
                a.fmt_at(2, f)?;
                if let ScalarExpr::Inv(d) = b.as_ref() {
                    f.write_str("/")?;
                    d.fmt_at(3, f)
                } else {
                    f.write_str("*")?;
                    b.fmt_at(3, f)
                }
            }
            ScalarExpr::Inv(a) => {
                f.write_str("1/")?;
                a.fmt_at(3, f)
            }
            ScalarExpr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(3, f)
            }
            ScalarExpr::Pow(a, k) => {
                a.fmt_at(5, f)?;
                write!(f, "^{k}")
            }
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(0, f)
    }
}

/// Numeric values for the parameters plus declared square roots.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamBinding {
    values: BTreeMap<Param, GaussianRational>,
    radicals: Vec<(ScalarExpr, GaussianRational)>,
}

impl ParamBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: Param, v: GaussianRational) -> Self {
        self.set(p, v);
        self
    }

    /// Declares `sqrt(radicand) = value`; the value is checked at evaluation time.
    pub fn with_radical(mut self, radicand: ScalarExpr, v: GaussianRational) -> Self {
        self.set_radical(radicand, v);
        self
    }

    pub fn set(&mut self, p: Param, v: GaussianRational) {
        self.values.insert(p, v);
    }

    pub fn set_radical(&mut self, radicand: ScalarExpr, v: GaussianRational) {
        if let Some(slot) = self.radicals.iter_mut().find(|(r, _)| *r == radicand) {
            slot.1 = v;
        } else {
            self.radicals.push((radicand, v));
        }
    }

    pub fn get(&self, p: Param) -> Option<&GaussianRational> {
        self.values.get(&p)
    }

    pub fn values(&self) -> &BTreeMap<Param, GaussianRational> {
        &self.values
    }

    pub fn radicals(&self) -> &[(ScalarExpr, GaussianRational)] {
        &self.radicals
    }

    pub fn remove(&mut self, p: Param) {
        self.values.remove(&p);
    }

    fn radical(&self, radicand: &ScalarExpr) -> Result<GaussianRational, ScalarError> {
        let (_, v) = self
            .radicals
            .iter()
            .find(|(r, _)| r == radicand)
            .ok_or_else(|| ScalarError::UndeclaredRadical(radicand.to_string()))?;
        let expected = radicand.eval(self)?;
        let square = v * v;
        if square != expected {
            return Err(ScalarError::RadicalMismatch {
                radicand: radicand.to_string(),
                value: v.to_string(),
                square: square.to_string(),
                expected: expected.to_string(),
            });
        }
        Ok(v.clone())
    }

    /// Checks ω ∈ {1, −1, 0} and every declared radical against its radicand.
    pub fn validate(&self) -> Result<(), ScalarError> {
        if let Some(w) = self.values.get(&Param::Omega) {
            let ok = [0, 1, -1].iter().any(|k| *w == GaussianRational::from_int(*k));
            if !ok {
                return Err(ScalarError::BadOmega(w.to_string()));
            }
        }
        for (r, _) in &self.radicals {
            // a radical over unbound parameters is simply unused
            match self.radical(r) {
                Ok(_) | Err(ScalarError::Unbound(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    /// Fills in every parameter and radical missing here from `defaults`.
    pub fn completed_from(&self, defaults: &ParamBinding) -> ParamBinding {
        let mut out = defaults.clone();
        // radicals of the defaults may no longer match overridden parameters
        let overridden: Vec<Param> = self.values.keys().copied().collect();
        out.radicals.retain(|(r, _)| {
            !r.params().iter().any(|p| overridden.contains(p)) || self.radicals.iter().any(|(mine, _)| mine == r)
        });
        for (p, v) in &self.values {
            out.values.insert(*p, v.clone());
        }
        for (r, v) in &self.radicals {
            out.set_radical(r.clone(), v.clone());
        }
        out
    }

    /// Parses a comma-separated list such as `lambda=3/4, sqrt(1+lambda^2)=5/4`.
    pub fn parse_assignments(src: &str) -> Result<ParamBinding, ScalarError> {
        let mut b = ParamBinding::new();
        b.apply_assignments(src)?;
        Ok(b)
    }

    pub fn apply_assignments(&mut self, src: &str) -> Result<(), ScalarError> {
        for part in split_top_level(src) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (lhs, rhs) = part
                .split_once('=')
                .ok_or_else(|| ScalarError::BadAssignment(part.to_string()))?;
            let value = GaussianRational::parse(rhs.trim())?;
            let lhs = syntax::parse(lhs.trim())?;
            match &lhs {
                RawExpr::Ident(name) => {
                    let p = Param::from_name(name).ok_or_else(|| ScalarError::BadAssignment(part.to_string()))?;
                    self.set(p, value);
                }
                RawExpr::Call(name, args) if name == "sqrt" && args.len() == 1 => {
                    self.set_radical(ScalarExpr::from_raw(&args[0])?, value);
                }
                _ => return Err(ScalarError::BadAssignment(part.to_string())),
            }
        }
        Ok(())
    }

    /// Compact label, e.g. `lambda=3/4,omega=-1,sqrt(omega)=i`.
    pub fn label(&self) -> String {
        let mut parts: Vec<String> = self.values.iter().map(|(p, v)| format!("{p}={v}")).collect();
        for (r, v) in &self.radicals {
            parts.push(format!("sqrt({r})={v}"));
        }
        parts.join(",")
    }

    /// Restriction to the given parameters and the radicals expressible in them.
    pub fn restricted_to(&self, params: &[Param]) -> ParamBinding {
        ParamBinding {
            values: self
                .values
                .iter()
                .filter(|(p, _)| params.contains(p))
                .map(|(p, v)| (*p, v.clone()))
                .collect(),
            radicals: self
                .radicals
                .iter()
                .filter(|(r, _)| r.params().iter().all(|p| params.contains(p)))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for ParamBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn split_top_level(src: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in src.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' | ';' if depth == 0 => {
                out.push(&src[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&src[start..]);
    out
}
