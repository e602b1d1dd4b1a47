use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{check_cocycle, check_jacobi, LieBialgebra, StructureTensor};
use crate::linalg::Matrix;
use crate::report::{CheckOutcome, Residual};
use crate::scalars::GaussianRational as GR;

/// A finite-dimensional Lie algebra with a sparse bracket table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    labels: Vec<String>,
    table: Vec<Vec<(usize, GR)>>,
}

impl LieAlgebra {
    /// Builds from a dense bracket function; only `a < b` is queried.
    pub fn from_fn(labels: Vec<String>, mut bracket: impl FnMut(usize, usize) -> Vec<GR>) -> Self {
        let d = labels.len();
        let mut table = vec![Vec::new(); d * d];
        for a in 0..d {
            for b in a + 1..d {
                let v = bracket(a, b);
                let fwd: Vec<(usize, GR)> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (k, c.clone()))
                    .collect();
                table[b * d + a] = fwd.iter().map(|(k, c)| (*k, -c)).collect();
                table[a * d + b] = fwd;
            }
        }
        LieAlgebra { labels, table }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn bracket(&self, a: usize, b: usize) -> &[(usize, GR)] {
        &self.table[a * self.dim() + b]
    }

    pub fn bracket_dense(&self, a: usize, b: usize) -> Vec<GR> {
        let mut v = vec![GR::zero(); self.dim()];
        for (k, c) in self.bracket(a, b) {
            v[*k] = c.clone();
        }
        v
    }

    /// Renders a linear combination such as `x1 - 3/4*X0`.
    pub fn format_linear(&self, v: &[(usize, GR)]) -> String {
        format_combination(v.iter().map(|(k, c)| (self.labels[*k].as_str(), c)))
    }

    /// Bracket of arbitrary linear combinations.
    pub fn bracket_vec(&self, u: &[GR], v: &[GR]) -> Vec<GR> {
        let mut out = vec![GR::zero(); self.dim()];
        for (a, ua) in u.iter().enumerate() {
            if ua.is_zero() {
                continue;
            }
            for (b, vb) in v.iter().enumerate() {
                if vb.is_zero() {
                    continue;
                }
                let s = ua * vb;
                for (k, c) in self.bracket(a, b) {
                    out[*k] += &(&s * c);
                }
            }
        }
        out
    }
}

pub(crate) fn format_combination<'a>(terms: impl Iterator<Item = (&'a str, &'a GR)>) -> String {
    let mut s = String::new();
    for (label, c) in terms {
        let coef = c.to_string();
        let (neg, mag) = match coef.strip_prefix('-') {
            Some(rest) if c.is_real() || c.re().is_zero() => (true, rest.to_string()),
            _ => (false, coef),
        };
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let needs_parens = mag.contains('+') || mag.contains('-');
        if mag == "1" && !label.is_empty() {
            s.push_str(label);
        } else if label.is_empty() {
            s.push_str(&mag);
        } else if needs_parens {
            s.push_str(&format!("({mag})*{label}"));
        } else {
            s.push_str(&format!("{mag}*{label}"));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// The double g ⊕ g* with generators x^0..x^{n-1}, X_0..X_{n-1} (indices
/// `i` and `n+i`) and its invariant pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleAlgebra {
    n: usize,
    algebra: LieAlgebra,
    pairing: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot build the double: {axiom} fails ({} residual terms)", outcome.residuals.len())]
pub struct DoubleRejection {
    pub axiom: &'static str,
    pub outcome: CheckOutcome,
}

pub fn default_labels(n: usize, lower: &str, upper: &str) -> Vec<String> {
    (0..n)
        .map(|i| format!("{lower}{i}"))
        .chain((0..n).map(|i| format!("{upper}{i}")))
        .collect()
}

fn canonical_pairing(n: usize) -> Matrix {
    let mut p = vec![vec![GR::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        p[i][n + i] = GR::one();
        p[n + i][i] = GR::one();
    }
    p
}

impl DoubleAlgebra {
    /// Double built directly from the crossed-bracket formula, without checking
    /// the bialgebra axioms first.
    pub fn from_bialgebra_unchecked(b: &LieBialgebra) -> Self {
        let n = b.dim();
        let (f, c) = (&b.f, &b.c);
        let algebra = LieAlgebra::from_fn(default_labels(n, "x", "X"), |a, bb| {
            let mut v = vec![GR::zero(); 2 * n];
            if bb < n {
                for k in 0..n {
                    v[k] = f.get(a, bb, k).clone();
                }
            } else if a >= n {
                for k in 0..n {
                    v[n + k] = c.get(a - n, bb - n, k).clone();
                }
            } else {
                // [x^i, X_j] = c^i_{jk} x^k - f^{ik}_j X_k
                let (i, j) = (a, bb - n);
                for k in 0..n {
                    v[k] = c.get(j, k, i).clone();
                    v[n + k] = -f.get(i, k, j);
                }
            }
            v
        });
        DoubleAlgebra {
            n,
            algebra,
            pairing: canonical_pairing(n),
        }
    }

    pub fn from_parts(n: usize, algebra: LieAlgebra, pairing: Matrix) -> Self {
        assert_eq!(algebra.dim(), 2 * n);
        DoubleAlgebra { n, algebra, pairing }
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn pairing(&self) -> &Matrix {
        &self.pairing
    }

    pub fn label(&self, i: usize) -> &str {
        self.algebra.label(i)
    }

    pub fn bracket(&self, a: usize, b: usize) -> &[(usize, GR)] {
        self.algebra.bracket(a, b)
    }

    /// The bialgebra read off the two isotropic sectors.
    pub fn sectors(&self) -> LieBialgebra {
        let n = self.n;
        let mut f = StructureTensor::zero(n);
        let mut c = StructureTensor::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                for (k, v) in self.bracket(i, j) {
                    if *k < n {
                        f.set_skew(i, j, *k, v.clone());
                    }
                }
                for (k, v) in self.bracket(n + i, n + j) {
                    if *k >= n {
                        c.set_skew(i, j, k - n, v.clone());
                    }
                }
            }
        }
        LieBialgebra::new(f, c)
    }
}

/// Checks the bialgebra axioms, then assembles the double.
pub fn build_double(b: &LieBialgebra) -> Result<DoubleAlgebra, DoubleRejection> {
    let steps: [(&'static str, CheckOutcome); 3] = [
        ("Jacobi identity of g", check_jacobi(&b.f, "x")),
        ("Jacobi identity of g*", check_jacobi(&b.c, "X")),
        ("cocycle condition", check_cocycle(b)),
    ];
    for (axiom, outcome) in steps {
        if !outcome.pass {
            return Err(DoubleRejection { axiom, outcome });
        }
    }
    Ok(DoubleAlgebra::from_bialgebra_unchecked(b))
}

/// Full Jacobi identity on all generator triples of the double.
pub fn check_double_jacobi(alg: &LieAlgebra) -> CheckOutcome {
    let d = alg.dim();
    let mut residuals = Vec::new();
    let mut acc = vec![GR::zero(); d];
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                acc.iter_mut().for_each(|v| *v = GR::zero());
                for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
                    for (k, v) in alg.bracket(p, q) {
                        for (m, w) in alg.bracket(*k, r) {
                            acc[*m] += &(v * w);
                        }
                    }
                }
                for (m, v) in acc.iter().enumerate() {
                    if !v.is_zero() {
                        let loc = format!("({},{},{})", alg.label(a), alg.label(b), alg.label(c));
                        residuals.push(Residual::new(loc, 0, alg.label(m), v.clone()));
                    }
                }
            }
        }
    }
    CheckOutcome::from_residuals(residuals)
}

/// ⟨[a,b],c⟩ + ⟨b,[a,c]⟩ = 0 for all generator triples.
pub fn check_pairing_invariance(d: &DoubleAlgebra) -> CheckOutcome {
    let dim = d.dim();
    let p = d.pairing();
    let mut residuals = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let mut acc = GR::zero();
                for (k, v) in d.bracket(a, b) {
                    acc += &(v * &p[*k][c]);
                }
                for (k, v) in d.bracket(a, c) {
                    acc += &(v * &p[b][*k]);
                }
                if !acc.is_zero() {
                    let loc = format!("<[{a},{b}],{c}>", a = d.label(a), b = d.label(b), c = d.label(c));
                    residuals.push(Residual::new(loc, 0, "", acc));
                }
            }
        }
    }
    CheckOutcome::from_residuals(residuals)
}

/// Finitely supported element of the k-th tensor power of the double, also
/// used for length-k words in the free algebra.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensorElement {
    rank: usize,
    terms: BTreeMap<Vec<usize>, GR>,
}

impl TensorElement {
    pub fn zero(rank: usize) -> Self {
        TensorElement {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn add_term(&mut self, idx: Vec<usize>, c: &GR) {
        debug_assert_eq!(idx.len(), self.rank);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
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

    pub fn get(&self, idx: &[usize]) -> GR {
        self.terms.get(idx).cloned().unwrap_or_else(GR::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &GR)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &TensorElement) -> TensorElement {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v);
        }
        out
    }

    pub fn scale(&self, s: &GR) -> TensorElement {
        let mut out = TensorElement::zero(self.rank);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), &(v * s));
        }
        out
    }

    pub fn sub(&self, other: &TensorElement) -> TensorElement {
        self.add(&other.scale(&-GR::one()))
    }

    /// Leg permutation for rank 2.
    pub fn transpose(&self) -> TensorElement {
        let mut out = TensorElement::zero(self.rank);
        for (k, v) in &self.terms {
            let mut t = k.clone();
            t.reverse();
            out.add_term(t, v);
        }
        out
    }

    pub fn format(&self, alg: &LieAlgebra) -> String {
        let labels: Vec<(String, GR)> = self
            .terms
            .iter()
            .map(|(k, v)| (k.iter().map(|&i| alg.label(i)).collect::<Vec<_>>().join("⊗"), v.clone()))
            .collect();
        format_combination(labels.iter().map(|(l, v)| (l.as_str(), v)))
    }

    /// `[Y⊗1⊗…+…+1⊗…⊗Y, t]`, i.e. the adjoint action on every leg.
    pub fn ad(&self, alg: &LieAlgebra, y: usize) -> TensorElement {
        let mut out = TensorElement::zero(self.rank);
        for (idx, v) in &self.terms {
            for leg in 0..self.rank {
                for (k, c) in alg.bracket(y, idx[leg]) {
                    let mut t = idx.clone();
                    t[leg] = *k;
                    out.add_term(t, &(v * c));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalStructures {
    pub r: TensorElement,
    pub r_skew: TensorElement,
    pub omega: TensorElement,
    /// Σ(x^i X_i + X_i x^i) as length-2 words.
    pub casimir: TensorElement,
}

/// r = Σ x^i⊗X_i, Ω = Σ(x^i⊗X_i + X_i⊗x^i), r̃ = r − ½Ω and the quadratic Casimir.
pub fn canonical_structures(d: &DoubleAlgebra) -> CanonicalStructures {
    let n = d.half_dim();
    let mut r = TensorElement::zero(2);
    let mut omega = TensorElement::zero(2);
    for i in 0..n {
        r.add_term(vec![i, n + i], &GR::one());
        omega.add_term(vec![i, n + i], &GR::one());
        omega.add_term(vec![n + i, i], &GR::one());
    }
    let r_skew = r.sub(&omega.scale(&GR::from_frac(1, 2)));
    let casimir = omega.clone();
    CanonicalStructures {
        r,
        r_skew,
        omega,
        casimir,
    }
}

/// [[ρ,ρ]] = [ρ12,ρ13] + [ρ12,ρ23] + [ρ13,ρ23].
pub fn schouten_bracket(alg: &LieAlgebra, rho: &TensorElement) -> TensorElement {
    assert_eq!(rho.rank(), 2);
    let mut out = TensorElement::zero(3);
    for (ab, u) in rho.terms() {
        for (cd, v) in rho.terms() {
            let (a, b, c, e) = (ab[0], ab[1], cd[0], cd[1]);
            let uv = u * v;
            for (k, w) in alg.bracket(a, c) {
                out.add_term(vec![*k, b, e], &(&uv * w));
            }
            for (k, w) in alg.bracket(b, c) {
                out.add_term(vec![a, *k, e], &(&uv * w));
            }
            for (k, w) in alg.bracket(b, e) {
                out.add_term(vec![a, c, *k], &(&uv * w));
            }
        }
    }
    out
}

/// δ(Y) = [Y⊗1 + 1⊗Y, r] for every generator Y.
pub fn cocommutator_from_r(alg: &LieAlgebra, r: &TensorElement) -> Vec<TensorElement> {
    (0..alg.dim()).map(|y| r.ad(alg, y)).collect()
}

/// Compares δ_DD with δ(x^i) = c^i_{jk} x^j⊗x^k and δ(X_i) = −f^{jk}_i X_j⊗X_k.
pub fn check_cocommutator(b: &LieBialgebra, d: &DoubleAlgebra) -> CheckOutcome {
    let n = b.dim();
    let cs = canonical_structures(d);
    let delta = cocommutator_from_r(d.algebra(), &cs.r);
    let mut residuals = Vec::new();
    for (y, got) in delta.iter().enumerate() {
        let mut expected = TensorElement::zero(2);
        for j in 0..n {
            for k in 0..n {
                if y < n {
                    expected.add_term(vec![j, k], b.c.get(j, k, y));
                } else {
                    expected.add_term(vec![n + j, n + k], &-b.f.get(j, k, y - n));
                }
            }
        }
        for (idx, v) in got.sub(&expected).terms() {
            let term = format!("{}⊗{}", d.label(idx[0]), d.label(idx[1]));
            residuals.push(Residual::new(format!("δ({})", d.label(y)), 0, term, v.clone()));
        }
    }
    CheckOutcome::from_residuals(residuals)
}

/// ad_Y(t) = 0 for every generator Y.
pub fn check_ad_invariant(alg: &LieAlgebra, t: &TensorElement, name: &str) -> CheckOutcome {
    let mut residuals = Vec::new();
    for y in 0..alg.dim() {
        for (idx, v) in t.ad(alg, y).terms() {
            let term = idx.iter().map(|&i| alg.label(i)).collect::<Vec<_>>().join("⊗");
            residuals.push(Residual::new(format!("[{},{name}]", alg.label(y)), 0, term, v.clone()));
        }
    }
    CheckOutcome::from_residuals(residuals)
}

pub fn check_omega_invariance(d: &DoubleAlgebra) -> CheckOutcome {
    check_ad_invariant(d.algebra(), &canonical_structures(d).omega, "Ω")
}

/// [Y, C] = 0 in the free algebra, expanding commutators by the Leibniz rule.
pub fn check_casimir(d: &DoubleAlgebra) -> CheckOutcome {
    let alg = d.algebra();
    let c = canonical_structures(d).casimir;
    let mut residuals = Vec::new();
    for y in 0..alg.dim() {
        // [Y, ab] = [Y,a] b + a [Y,b]
        let mut acc = TensorElement::zero(2);
        for (w, v) in c.terms() {
            for (k, s) in alg.bracket(y, w[0]) {
                acc.add_term(vec![*k, w[1]], &(v * s));
            }
            for (k, s) in alg.bracket(y, w[1]) {
                acc.add_term(vec![w[0], *k], &(v * s));
            }
        }
        for (w, v) in acc.terms() {
            residuals.push(Residual::new(
                format!("[{},C]", alg.label(y)),
                0,
                format!("{}{}", alg.label(w[0]), alg.label(w[1])),
                v.clone(),
            ));
        }
    }
    CheckOutcome::from_residuals(residuals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> LieBialgebra {
        // [x0,x1] = x1, [X0,X1] = X0
        let mut f = StructureTensor::zero(2);
        f.set_skew(0, 1, 1, GR::one());
        let mut c = StructureTensor::zero(2);
        c.set_skew(0, 1, 0, GR::one());
        LieBialgebra::new(f, c)
    }

    fn gl2(lambda: GR) -> LieBialgebra {
        let mut f = StructureTensor::zero(2);
        f.set_skew(0, 1, 1, GR::one());
        let mut c = StructureTensor::zero(2);
        c.set_skew(0, 1, 1, lambda);
        LieBialgebra::new(f, c)
    }

    fn dense_schouten(alg: &LieAlgebra, rho: &TensorElement) -> TensorElement {
        let d = alg.dim();
        let mut out = TensorElement::zero(3);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let uv = &rho.get(&[a, b]) * &rho.get(&[c, e]);
                        for k in 0..d {
                            let t1 = &uv * &alg.bracket_dense(a, c)[k];
                            out.add_term(vec![k, b, e], &t1);
                            let t2 = &uv * &alg.bracket_dense(b, c)[k];
                            out.add_term(vec![a, k, e], &t2);
                            let t3 = &uv * &alg.bracket_dense(b, e)[k];
                            out.add_term(vec![a, c, k], &t3);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn crossed_bracket_from_cobracket() {
        let d = build_double(&b2()).unwrap();
        // [x0, X0] = x1
        assert_eq!(d.algebra().format_linear(d.bracket(0, 2)), "x1");
        assert_eq!(d.algebra().format_linear(d.bracket(0, 3)), "-x0 - X1");
        assert!(check_double_jacobi(d.algebra()).pass);
        assert!(check_pairing_invariance(&d).pass);
    }

    #[test]
    fn abelian_double() {
        let b = LieBialgebra::new(StructureTensor::zero(2), StructureTensor::zero(2));
        let d = build_double(&b).unwrap();
        for a in 0..4 {
            for c in 0..4 {
                assert!(d.bracket(a, c).is_empty());
            }
        }
        let cs = canonical_structures(&d);
        assert!(cocommutator_from_r(d.algebra(), &cs.r)
            .iter()
            .all(TensorElement::is_zero));
    }

    #[test]
    fn r_matrix_components() {
        let d = build_double(&b2()).unwrap();
        let cs = canonical_structures(&d);
        assert_eq!(cs.r.nnz(), 2);
        assert!(cs.r.terms().all(|(_, v)| v.is_one()));
        assert!(cs.r_skew.add(&cs.r_skew.transpose()).is_zero());
        assert_eq!(cs.r.sub(&cs.r_skew), cs.omega.scale(&GR::from_frac(1, 2)));
    }

    #[test]
    fn classical_yang_baxter_for_b2() {
        let d = build_double(&b2()).unwrap();
        let cs = canonical_structures(&d);
        let s = schouten_bracket(d.algebra(), &cs.r);
        assert!(s.is_zero());
        assert_eq!(dense_schouten(d.algebra(), &cs.r), s);
        assert!(schouten_bracket(d.algebra(), &TensorElement::zero(2)).is_zero());
    }

    #[test]
    fn modified_yang_baxter_for_gl2() {
        let d = build_double(&gl2(GR::one())).unwrap();
        let cs = canonical_structures(&d);
        let s = schouten_bracket(d.algebra(), &cs.r_skew);
        assert!(!s.is_zero());
        assert_eq!(dense_schouten(d.algebra(), &cs.r_skew), s);
        assert!(check_ad_invariant(d.algebra(), &s, "[[r̃,r̃]]").pass);
    }

    #[test]
    fn cocommutator_of_b2_double() {
        let b = b2();
        let d = build_double(&b).unwrap();
        let cs = canonical_structures(&d);
        let delta = cocommutator_from_r(d.algebra(), &cs.r);
        // δ(X1) = X1⊗X0 − X0⊗X1
        let mut want = TensorElement::zero(2);
        want.add_term(vec![3, 2], &GR::one());
        want.add_term(vec![2, 3], &-GR::one());
        assert_eq!(delta[3], want);
        assert!(check_cocommutator(&b, &d).pass);
    }

    #[test]
    fn cocommutator_of_gl2_double() {
        let d = build_double(&gl2(GR::one())).unwrap();
        let cs = canonical_structures(&d);
        let delta = cocommutator_from_r(d.algebra(), &cs.r);
        // δ(x1) = x0⊗x1 − x1⊗x0
        let mut want = TensorElement::zero(2);
        want.add_term(vec![0, 1], &GR::one());
        want.add_term(vec![1, 0], &-GR::one());
        assert_eq!(delta[1], want);
    }

    #[test]
    fn casimir_detects_flipped_bracket() {
        let d = build_double(&b2()).unwrap();
        assert!(check_casimir(&d).pass);
        assert!(check_omega_invariance(&d).pass);
        let alg = d.algebra();
        let broken = LieAlgebra::from_fn(alg.labels().to_vec(), |a, b| {
            let mut v = alg.bracket_dense(a, b);
            if (a, b) == (0, 3) {
                v.iter_mut().for_each(|c| *c = -&*c);
            }
            v
        });
        let bd = DoubleAlgebra::from_parts(2, broken, d.pairing().clone());
        assert!(!check_casimir(&bd).pass);
    }

    #[test]
    fn rejection_names_the_axiom() {
        let mut f = StructureTensor::zero(3);
        f.set_skew(0, 1, 1, GR::one());
        f.set_skew(0, 2, 2, GR::one());
        f.set_skew(1, 2, 0, GR::one());
        let err = build_double(&LieBialgebra::new(f, StructureTensor::zero(3))).unwrap_err();
        assert_eq!(err.axiom, "Jacobi identity of g");
    }
}
