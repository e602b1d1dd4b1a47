use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::ncpoly::{Monomial, NCPoly, MAX_GENERATORS};
use crate::scalars::GaussianRational as GR;

/// Truncated element of the R-th tensor power, Σ c·z^k·m_1⊗…⊗m_R with every
/// leg normal-ordered.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct TensorPoly {
    rank: usize,
    terms: BTreeMap<(u32, Vec<Monomial>), GR>,
}

impl TensorPoly {
    pub fn zero(rank: usize) -> Self {
        TensorPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    /// 1⊗…⊗1.
    pub fn one(rank: usize) -> Self {
        let mut t = TensorPoly::zero(rank);
        t.add_term(0, vec![Monomial::one(); rank], &GR::one());
        t
    }

    /// g⊗1 + 1⊗g.
    pub fn primitive(g: usize) -> Self {
        let mut t = TensorPoly::zero(2);
        t.add_term(0, vec![Monomial::generator(g), Monomial::one()], &GR::one());
        t.add_term(0, vec![Monomial::one(), Monomial::generator(g)], &GR::one());
        t
    }

    /// p⊗1 + 1⊗p.
    pub fn primitive_of(p: &NCPoly) -> Self {
        let mut t = TensorPoly::zero(2);
        for (k, m, c) in p.terms() {
            t.add_term(k, vec![*m, Monomial::one()], c);
            t.add_term(k, vec![Monomial::one(), *m], c);
        }
        t
    }

    /// Leg-wise tensor product of polynomials, truncated at `max_order`.
    pub fn from_legs(legs: &[&NCPoly], max_order: u32) -> Self {
        let mut acc: Vec<(u32, Vec<Monomial>, GR)> = vec![(0, Vec::new(), GR::one())];
        for leg in legs {
            let mut next = Vec::new();
            for (k, ms, c) in &acc {
                for (k2, m, c2) in leg.terms() {
                    if k + k2 <= max_order {
                        let mut ms = ms.clone();
                        ms.push(*m);
                        next.push((k + k2, ms, c * c2));
                    }
                }
            }
            acc = next;
        }
        let mut t = TensorPoly::zero(legs.len());
        for (k, ms, c) in acc {
            t.add_term(k, ms, &c);
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn add_term(&mut self, k: u32, legs: Vec<Monomial>, c: &GR) {
        debug_assert_eq!(legs.len(), self.rank);
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

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Vec<Monomial>, &GR)> {
        self.terms.iter().map(|((k, l), c)| (*k, l, c))
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

    /// `self += s·z^shift·other`, dropping orders above `max_order`.
    pub fn add_scaled(&mut self, other: &TensorPoly, s: &GR, shift: u32, max_order: u32) {
        for ((k, l), c) in &other.terms {
            if k + shift <= max_order {
                self.add_term(k + shift, l.clone(), &(c * s));
            }
        }
    }

    pub fn sub(&self, other: &TensorPoly) -> TensorPoly {
        let mut out = self.clone();
        out.add_scaled(other, &-GR::one(), 0, u32::MAX);
        out
    }

    pub fn truncated(&self, max_order: u32) -> TensorPoly {
        let mut out = TensorPoly::zero(self.rank);
        out.add_scaled(self, &GR::one(), 0, max_order);
        out
    }

    /// Part of z-order exactly `k`, shifted to z⁰.
    pub fn order(&self, k: u32) -> TensorPoly {
        let mut out = TensorPoly::zero(self.rank);
        for ((kk, l), c) in &self.terms {
            if *kk == k {
                out.add_term(0, l.clone(), c);
            }
        }
        out
    }

    /// Reverses the legs.
    pub fn flip(&self) -> TensorPoly {
        let mut out = TensorPoly::zero(self.rank);
        for ((k, l), c) in &self.terms {
            let mut l = l.clone();
            l.reverse();
            out.add_term(*k, l, c);
        }
        out
    }

    /// z ↦ −z.
    pub fn negate_z(&self) -> TensorPoly {
        let mut out = TensorPoly::zero(self.rank);
        for ((k, l), c) in &self.terms {
            out.add_term(*k, l.clone(), &if k % 2 == 1 { -c } else { c.clone() });
        }
        out
    }

    pub fn format_term(legs: &[Monomial], labels: &[String]) -> String {
        legs.iter().map(|m| m.format(labels)).collect::<Vec<_>>().join("⊗")
    }

    pub fn format(&self, labels: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|((k, l), c)| {
                let z = match k {
                    0 => String::new(),
                    1 => "z*".into(),
                    _ => format!("z^{k}*"),
                };
                format!("({c})*{z}{}", Self::format_term(l, labels))
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for TensorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..MAX_GENERATORS).map(|g| format!("e{g}")).collect();
        f.write_str(&self.format(&labels))
    }
}
