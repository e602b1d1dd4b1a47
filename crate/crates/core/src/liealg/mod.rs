//! Lie bialgebras given by structure tensors, their Drinfel'd doubles and the
//! classical-level identities: Jacobi, cocycle, pairing invariance, r-matrix,
//! Casimir, cocommutator and Schouten bracket.

mod basis;
mod double;
mod selfdual;

pub use basis::{linear_form, BasisChange, BasisChangeError, BasisChangeReport, BasisRow};
pub use double::{
    build_double, canonical_structures, check_ad_invariant, check_casimir, check_cocommutator, check_double_jacobi,
    check_omega_invariance, check_pairing_invariance, cocommutator_from_r, default_labels, schouten_bracket,
    CanonicalStructures, DoubleAlgebra, DoubleRejection, LieAlgebra, TensorElement,
};
pub use selfdual::{check_bialgebra_morphism, find_self_duality};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::report::{CheckOutcome, Residual};
use crate::scalars::GaussianRational as GR;

/// Three-index array `t(i,j,k)`, antisymmetric in `(i,j)`.
///
/// Stores f^{ij}_k of `[x^i,x^j] = f^{ij}_k x^k` as `t(i,j,k)` and
/// c^k_{ij} of `δ(x^k) = c^k_{ij} x^i⊗x^j` as `t(i,j,k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureTensor {
    n: usize,
    data: Vec<GR>,
}

impl StructureTensor {
    pub fn zero(n: usize) -> Self {
        StructureTensor {
            n,
            data: vec![GR::zero(); n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &GR {
        &self.data[self.idx(i, j, k)]
    }

    /// Sets `t(i,j,k) = v` and `t(j,i,k) = -v`.
    pub fn set_skew(&mut self, i: usize, j: usize, k: usize, v: GR) {
        let a = self.idx(i, j, k);
        let b = self.idx(j, i, k);
        self.data[b] = -&v;
        self.data[a] = v;
    }

    /// Raw write without the antisymmetric partner (used to build broken test inputs).
    pub fn set_raw(&mut self, i: usize, j: usize, k: usize, v: GR) {
        let a = self.idx(i, j, k);
        self.data[a] = v;
    }

    pub fn is_skew(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| *self.get(i, j, k) == -self.get(j, i, k))))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Nonzero components with `i < j`.
    pub fn triples(&self) -> Vec<(usize, usize, usize, GR)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    if !v.is_zero() {
                        out.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> TensorJson {
        TensorJson {
            dim: self.n,
            triples: self.triples(),
        }
    }

    pub fn from_json(j: &TensorJson) -> Self {
        let mut t = StructureTensor::zero(j.dim);
        for (i, k, l, v) in &j.triples {
            t.set_skew(*i, *k, *l, v.clone());
        }
        t
    }
}

/// Serialized form `{dim, triples: [[i,j,k,"p/q"],...]}` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorJson {
    pub dim: usize,
    pub triples: Vec<(usize, usize, usize, GR)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieBialgebra {
    pub f: StructureTensor,
    pub c: StructureTensor,
}

impl LieBialgebra {
    pub fn new(f: StructureTensor, c: StructureTensor) -> Self {
        assert_eq!(f.dim(), c.dim(), "f and c must have the same dimension");
        LieBialgebra { f, c }
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// The dual bialgebra (g*, η): brackets and cobrackets swap roles.
    pub fn dualize(&self) -> LieBialgebra {
        LieBialgebra {
            f: self.c.clone(),
            c: self.f.clone(),
        }
    }
}

fn triple_label(prefix: &str, i: usize, j: usize, l: usize) -> String {
    format!("({prefix}{i},{prefix}{j},{prefix}{l})")
}

/// Jacobiator of the bracket `[e_i,e_j] = t(i,j,k) e_k` on every triple `i<j<l`.
pub fn check_jacobi(t: &StructureTensor, prefix: &str) -> CheckOutcome {
    let n = t.dim();
    let mut residuals = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                for m in 0..n {
                    let mut acc = GR::zero();
                    for k in 0..n {
                        acc += &(t.get(i, j, k) * t.get(k, l, m));
                        acc += &(t.get(j, l, k) * t.get(k, i, m));
                        acc += &(t.get(l, i, k) * t.get(k, j, m));
                    }
                    if !acc.is_zero() {
                        residuals.push(Residual::new(
                            triple_label(prefix, i, j, l),
                            0,
                            format!("{prefix}{m}"),
                            acc,
                        ));
                    }
                }
            }
        }
    }
    CheckOutcome::from_residuals(residuals)
}

/// 1-cocycle compatibility between f and c:
/// f^{ab}_k c^k_{ij} = f^{ak}_i c^b_{kj} + f^{kb}_i c^a_{kj} + f^{ak}_j c^b_{ik} + f^{kb}_j c^a_{ik}.
pub fn check_cocycle(b: &LieBialgebra) -> CheckOutcome {
    let n = b.dim();
    let (f, c) = (&b.f, &b.c);
    let mut residuals = Vec::new();
    for a in 0..n {
        for bb in a + 1..n {
            for i in 0..n {
                for j in i + 1..n {
                    let mut acc = GR::zero();
                    for k in 0..n {
                        acc += &(f.get(a, bb, k) * c.get(i, j, k));
                        acc -= &(f.get(a, k, i) * c.get(k, j, bb));
                        acc -= &(f.get(k, bb, i) * c.get(k, j, a));
                        acc -= &(f.get(a, k, j) * c.get(i, k, bb));
                        acc -= &(f.get(k, bb, j) * c.get(i, k, a));
                    }
                    if !acc.is_zero() {
                        residuals.push(Residual::new(format!("cocycle(a={a},b={bb},i={i},j={j})"), 0, "", acc));
                    }
                }
            }
        }
    }
    CheckOutcome::from_residuals(residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    pub(crate) fn r31() -> StructureTensor {
        let mut f = StructureTensor::zero(3);
        f.set_skew(0, 1, 1, GR::one());
        f.set_skew(0, 2, 2, GR::one());
        f
    }

    fn jacobiator_oracle(t: &StructureTensor, i: usize, j: usize, l: usize) -> Vec<GR> {
        // literal [[e_i,e_j],e_l] + [[e_j,e_l],e_i] + [[e_l,e_i],e_j] on coefficient vectors
        let n = t.dim();
        let br = |u: &[GR], v: &[GR]| -> Vec<GR> {
            let mut out = vec![GR::zero(); n];
            for a in 0..n {
                for b in 0..n {
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += &(&(&u[a] * &v[b]) * t.get(a, b, k));
                    }
                }
            }
            out
        };
        let e = |i: usize| -> Vec<GR> { (0..n).map(|k| if k == i { GR::one() } else { GR::zero() }).collect() };
        let mut s = br(&br(&e(i), &e(j)), &e(l));
        for (o, v) in s.iter_mut().zip(br(&br(&e(j), &e(l)), &e(i))) {
            *o += &v;
        }
        for (o, v) in s.iter_mut().zip(br(&br(&e(l), &e(i)), &e(j))) {
            *o += &v;
        }
        s
    }

    #[test]
    fn r31_satisfies_jacobi() {
        assert!(check_jacobi(&r31(), "x").pass);
        assert!(check_jacobi(&StructureTensor::zero(3), "x").pass);
    }

    #[test]
    fn perturbed_r31_fails_at_the_only_triple() {
        let mut f = r31();
        f.set_skew(1, 2, 0, GR::one());
        let out = check_jacobi(&f, "x");
        assert!(!out.pass);
        assert_eq!(out.locations(), vec!["(x0,x1,x2)"]);
        let oracle = jacobiator_oracle(&f, 0, 1, 2);
        assert!(oracle.iter().any(|v| !v.is_zero()));
        for r in &out.residuals {
            let m: usize = r.term[1..].parse().unwrap();
            assert_eq!(r.coefficient, oracle[m]);
        }
    }

    #[test]
    fn cocycle_trivial_when_c_vanishes() {
        let b = LieBialgebra::new(r31(), StructureTensor::zero(3));
        assert!(check_cocycle(&b).pass);
    }

    #[test]
    fn dualize_is_involutive() {
        let mut c = StructureTensor::zero(3);
        c.set_skew(1, 2, 0, GR::one());
        let b = LieBialgebra::new(r31(), c);
        assert_eq!(b.dualize().dualize(), b);
        assert_eq!(b.dualize().f, b.c);
    }

    #[test]
    fn json_round_trip() {
        let f = r31();
        let j = serde_json::to_string(&f.to_json()).unwrap();
        assert_eq!(j, r#"{"dim":3,"triples":[[0,1,1,"1"],[0,2,2,"1"]]}"#);
        let back: TensorJson = serde_json::from_str(&j).unwrap();
        assert_eq!(StructureTensor::from_json(&back), f);
    }
}
