use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::scalars::GaussianRational as GR;

pub const MAX_GENERATORS: usize = 8;

/// Exponent vector over the fixed generator order; the normal-ordered word
/// `e_0^{a_0} e_1^{a_1} …`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial([u8; MAX_GENERATORS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn generator(g: usize) -> Self {
        let mut m = Monomial::default();
        m.0[g] = 1;
        m
    }

    /// Sorts the letters of `word`.
    pub fn from_letters(word: &[u8]) -> Self {
        let mut m = Monomial::default();
        for &g in word {
            m.0[g as usize] += 1;
        }
        m
    }

    pub fn exponent(&self, g: usize) -> u8 {
        self.0[g]
    }

    pub fn exponents(&self) -> &[u8; MAX_GENERATORS] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Largest generator present.
    pub fn last(&self) -> Option<usize> {
        (0..MAX_GENERATORS).rev().find(|&g| self.0[g] > 0)
    }

    pub fn first(&self) -> Option<usize> {
        (0..MAX_GENERATORS).find(|&g| self.0[g] > 0)
    }

    pub fn without(&self, g: usize) -> Monomial {
        let mut m = *self;
        m.0[g] -= 1;
        m
    }

    pub fn with(&self, g: usize) -> Monomial {
        let mut m = *self;
        m.0[g] += 1;
        m
    }

    pub fn letters(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for g in 0..MAX_GENERATORS {
            for _ in 0..self.0[g] {
                out.push(g as u8);
            }
        }
        out
    }

    pub fn format(&self, labels: &[String]) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (g, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(labels[g].clone()),
                _ => parts.push(format!("{}^{e}", labels[g])),
            }
        }
        parts.join("*")
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..MAX_GENERATORS).map(|g| format!("e{g}")).collect();
        f.write_str(&self.format(&labels))
    }
}

/// Truncated polynomial Σ c·z^k·m over normal-ordered monomials.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct NCPoly {
    terms: BTreeMap<(u32, Monomial), GR>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly::default()
    }

    pub fn one() -> Self {
        Self::term(0, Monomial::one(), GR::one())
    }

    pub fn constant(c: GR) -> Self {
        Self::term(0, Monomial::one(), c)
    }

    pub fn generator(g: usize) -> Self {
        Self::term(0, Monomial::generator(g), GR::one())
    }

    pub fn term(k: u32, m: Monomial, c: GR) -> Self {
        let mut p = NCPoly::zero();
        p.add_term(k, m, &c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: u32, m: Monomial, c: &GR) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((k, m)) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Monomial, &GR)> {
        self.terms.iter().map(|((k, m), c)| (*k, m, c))
    }

    pub fn coefficient(&self, k: u32, m: &Monomial) -> GR {
        self.terms.get(&(k, *m)).cloned().unwrap_or_else(GR::zero)
    }

    /// `self += s·z^shift·other`, dropping orders above `max_order`.
    pub fn add_scaled(&mut self, other: &NCPoly, s: &GR, shift: u32, max_order: u32) {
        if s.is_zero() {
            return;
        }
        for ((k, m), c) in &other.terms {
            if k + shift <= max_order {
                if s.is_one() {
                    self.add_term(k + shift, *m, c);
                } else {
                    self.add_term(k + shift, *m, &(c * s));
                }
            }
        }
    }

    pub fn add(&self, other: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for ((k, m), c) in &other.terms {
            out.add_term(*k, *m, c);
        }
        out
    }

    pub fn sub(&self, other: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for ((k, m), c) in &other.terms {
            out.add_term(*k, *m, &-c);
        }
        out
    }

    pub fn scale(&self, s: &GR) -> NCPoly {
        let mut out = NCPoly::zero();
        for ((k, m), c) in &self.terms {
            out.add_term(*k, *m, &(c * s));
        }
        out
    }

    pub fn truncated(&self, max_order: u32) -> NCPoly {
        NCPoly {
            terms: self
                .terms
                .iter()
                .filter(|((k, _), _)| *k <= max_order)
                .map(|(key, c)| (*key, c.clone()))
                .collect(),
        }
    }

    /// Part of z-order exactly `k`, as a z⁰ polynomial.
    pub fn order(&self, k: u32) -> NCPoly {
        NCPoly {
            terms: self
                .terms
                .iter()
                .filter(|((kk, _), _)| *kk == k)
                .map(|((_, m), c)| ((0, *m), c.clone()))
                .collect(),
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|(_, m)| m.degree()).max().unwrap_or(0)
    }

    /// z ↦ −z.
    pub fn negate_z(&self) -> NCPoly {
        NCPoly {
            terms: self
                .terms
                .iter()
                .map(|((k, m), c)| ((*k, *m), if k % 2 == 1 { -c } else { c.clone() }))
                .collect(),
        }
    }

    pub fn format(&self, labels: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((k, m), c)| {
                let z = match k {
                    0 => String::new(),
                    1 => "z*".to_string(),
                    _ => format!("z^{k}*"),
                };
                format!("({c})*{z}{}", m.format(labels))
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..MAX_GENERATORS).map(|g| format!("e{g}")).collect();
        f.write_str(&self.format(&labels))
    }
}

/// Element of the R-th tensor power of the free algebra with z-orders that may
/// be transiently negative; rank 1 is an ordinary word polynomial.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct WordTensor {
    pub(crate) rank: usize,
    pub(crate) terms: BTreeMap<(i32, Vec<Vec<u8>>), GR>,
}

impl WordTensor {
    pub fn zero(rank: usize) -> Self {
        WordTensor {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(k: i32, c: GR) -> Self {
        let mut t = WordTensor::zero(1);
        t.add_term(k, vec![Vec::new()], &c);
        t
    }

    pub fn word(word: Vec<u8>) -> Self {
        let mut t = WordTensor::zero(1);
        t.add_term(0, vec![word], &GR::one());
        t
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn add_term(&mut self, k: i32, legs: Vec<Vec<u8>>, c: &GR) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((k, legs)) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Vec<Vec<u8>>, &GR)> {
        self.terms.iter().map(|((k, l), c)| (*k, l, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True if every leg word is empty (a Laurent polynomial in z alone).
    pub fn is_scalar_like(&self) -> bool {
        self.rank == 1 && self.terms.keys().all(|(_, legs)| legs[0].is_empty())
    }

    pub fn add_assign(&mut self, other: &WordTensor) {
        for ((k, l), c) in &other.terms {
            self.add_term(*k, l.clone(), c);
        }
    }

    pub fn scale(&self, s: &GR) -> WordTensor {
        let mut out = WordTensor::zero(self.rank);
        for ((k, l), c) in &self.terms {
            out.add_term(*k, l.clone(), &(c * s));
        }
        out
    }

    pub fn truncated(mut self, max_order: i32) -> WordTensor {
        self.terms.retain(|(k, _), _| *k <= max_order);
        self
    }

    pub fn min_order(&self) -> Option<i32> {
        self.terms.keys().map(|(k, _)| *k).min()
    }
}
