use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_traits::{One, Zero};
use rand::Rng;

use super::expr::{ExprError, ExprTree};
use super::poly::{Monomial, NCPoly, WordTensor, MAX_GENERATORS};
use super::spec::DeformationSpec;
use crate::report::{CheckOutcome, Residual};
use crate::scalars::{GaussianRational as GR, ParamBinding};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("{location}: {source}")]
    Expr { location: String, source: ExprError },
    #[error("deformation is not admissible ({} offending terms)", .0.residuals.len())]
    Inadmissible(Box<CheckOutcome>),
    #[error("straightening exceeded its step bound {0}")]
    StepBound(u32),
    #[error("{0} generators exceed the supported maximum")]
    TooManyGenerators(usize),
    #[error("{location}: expected a rank-{expected} expression")]
    Rank { location: String, expected: usize },
}

type Bracket = Vec<(u32, Vec<u8>, GR)>;

/// Normal-ordering engine for one deformation at one parameter binding and
/// truncation order.
///
/// Words are straightened by inserting generators one at a time into
/// normal-ordered monomials, using `h g = g h - [g,h]` for `h > g` with the
/// bracket right-hand sides taken as raw (unordered) words.
pub struct Engine {
    labels: Vec<String>,
    order: u32,
    binding: ParamBinding,
    raw: Vec<Option<Rc<Bracket>>>,
    gen_memo: RefCell<HashMap<(Monomial, u8, u32), Rc<NCPoly>>>,
    mono_memo: RefCell<HashMap<(Monomial, Monomial, u32), Rc<NCPoly>>>,
    max_depth: Cell<u32>,
}

fn words_to_bracket(w: &WordTensor) -> Bracket {
    w.terms()
        .map(|(k, legs, c)| (k.max(0) as u32, legs[0].clone(), c.clone()))
        .collect()
}

/// Checks the weight bound of every bracket (degree ≤ k+1 at z^k), of every
/// coproduct (total degree ≤ k+1 at z^k), the absence of negative z-powers and
/// that each series atom's argument consists of mutually commuting generators.
pub fn admissibility_check(spec: &DeformationSpec, binding: &ParamBinding, order: u32) -> CheckOutcome {
    let n = order as i32;
    let mut residuals = Vec::new();
    let mut notes = Vec::new();
    let labels = &spec.labels;
    let fmt_word = |w: &[u8]| -> String {
        if w.is_empty() {
            "1".into()
        } else {
            w.iter()
                .map(|&g| labels[g as usize].as_str())
                .collect::<Vec<_>>()
                .join("*")
        }
    };
    let mut raw: BTreeMap<(usize, usize), WordTensor> = BTreeMap::new();
    for (&(a, b), tree) in &spec.brackets {
        let loc = spec.bracket_location(a, b);
        match tree.eval_words(binding, n) {
            Ok(w) if w.rank() == 1 => {
                for (k, legs, c) in w.terms() {
                    if k < 0 || legs[0].len() as i32 > k + 1 {
                        residuals.push(Residual::new(
                            loc.clone(),
                            k.max(0) as u32,
                            fmt_word(&legs[0]),
                            c.clone(),
                        ));
                    }
                }
                raw.insert((a, b), w);
            }
            Ok(_) => notes.push(format!("{loc}: right-hand side is a tensor")),
            Err(e) => notes.push(format!("{loc}: {e}")),
        }
    }
    for (&g, tree) in &spec.coproducts {
        let loc = spec.coproduct_location(g);
        match tree.eval_words(binding, n) {
            Ok(w) if w.rank() == 2 => {
                for (k, legs, c) in w.terms() {
                    let deg: usize = legs.iter().map(Vec::len).sum();
                    if k < 0 || deg as i32 > k + 1 {
                        let term = format!("{}⊗{}", fmt_word(&legs[0]), fmt_word(&legs[1]));
                        residuals.push(Residual::new(loc.clone(), k.max(0) as u32, term, c.clone()));
                    }
                }
            }
            Ok(w) if w.is_zero() => notes.push(format!("{loc}: coproduct vanishes")),
            Ok(_) => notes.push(format!("{loc}: coproduct is not a rank-2 tensor")),
            Err(e) => notes.push(format!("{loc}: {e}")),
        }
    }
    let trees = spec
        .brackets
        .iter()
        .map(|(&(a, b), t)| (spec.bracket_location(a, b), t))
        .chain(spec.coproducts.iter().map(|(&g, t)| (spec.coproduct_location(g), t)));
    for (loc, tree) in trees {
        for atom in tree.atoms() {
            let gens = atom.generators();
            for (i, &a) in gens.iter().enumerate() {
                for &b in &gens[i + 1..] {
                    if let Some(w) = raw.get(&(a, b)) {
                        if !w.is_zero() {
                            notes.push(format!(
                                "{loc}: series argument mixes non-commuting {} and {}",
                                labels[a], labels[b]
                            ));
                        }
                    }
                }
            }
        }
    }
    let mut out = CheckOutcome::from_residuals(residuals);
    if !notes.is_empty() {
        out.pass = false;
        out.notes.extend(notes);
    }
    out
}

impl Engine {
    /// Builds the engine after verifying admissibility.
    pub fn new(spec: &DeformationSpec, binding: &ParamBinding, order: u32) -> Result<Engine, EngineError> {
        let d = spec.dim();
        if d > MAX_GENERATORS {
            return Err(EngineError::TooManyGenerators(d));
        }
        let adm = admissibility_check(spec, binding, order);
        if !adm.pass {
            return Err(EngineError::Inadmissible(Box::new(adm)));
        }
        let mut raw = vec![None; d * d];
        for (&(a, b), tree) in &spec.brackets {
            let w = tree
                .eval_words(binding, order as i32)
                .map_err(|source| EngineError::Expr {
                    location: spec.bracket_location(a, b),
                    source,
                })?;
            raw[a * d + b] = Some(Rc::new(words_to_bracket(&w)));
        }
        Ok(Engine {
            labels: spec.labels.clone(),
            order,
            binding: binding.clone(),
            raw,
            gen_memo: RefCell::new(HashMap::new()),
            mono_memo: RefCell::new(HashMap::new()),
            max_depth: Cell::new(0),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn binding(&self) -> &ParamBinding {
        &self.binding
    }

    /// Deepest recursion seen relative to the remaining step budget; stays
    /// below the bound 2N + degree + 1 by the weight argument.
    pub fn max_depth(&self) -> u32 {
        self.max_depth.get()
    }

    /// Raw right-hand side of `[a,b]` for `a < b`.
    fn raw_bracket(&self, a: usize, b: usize) -> Option<&Rc<Bracket>> {
        self.raw[a * self.dim() + b].as_ref()
    }

    fn note_depth(&self, bound: u32, fuel: u32) {
        let used = bound - fuel;
        if used > self.max_depth.get() {
            self.max_depth.set(used);
        }
    }

    /// `m · g` normal-ordered, keeping z-orders ≤ `budget`.
    fn mul_mono_gen(&self, m: Monomial, g: u8, budget: u32, bound: u32, fuel: u32) -> Result<Rc<NCPoly>, EngineError> {
        if fuel == 0 {
            return Err(EngineError::StepBound(bound));
        }
        self.note_depth(bound, fuel);
        if let Some(hit) = self.gen_memo.borrow().get(&(m, g, budget)) {
            return Ok(hit.clone());
        }
        let result = match m.last() {
            None => NCPoly::term(0, Monomial::generator(g as usize), GR::one()),
            Some(h) if h <= g as usize => NCPoly::term(0, m.with(g as usize), GR::one()),
            Some(h) => {
                // u h g = (u g) h − u [g,h]
                let u = m.without(h);
                let mut out = NCPoly::zero();
                let ug = self.mul_mono_gen(u, g, budget, bound, fuel - 1)?;
                for (k, mm, c) in ug.terms() {
                    let part = self.mul_mono_gen(*mm, h as u8, budget - k, bound, fuel - 1)?;
                    out.add_scaled(&part, c, k, budget);
                }
                if let Some(br) = self.raw_bracket(g as usize, h) {
                    for (k, word, c) in br.iter() {
                        if *k > budget {
                            continue;
                        }
                        let part = self.mul_mono_word(u, word, budget - k, bound, fuel - 1)?;
                        out.add_scaled(&part, &-c, *k, budget);
                    }
                }
                out
            }
        };
        let rc = Rc::new(result);
        self.gen_memo.borrow_mut().insert((m, g, budget), rc.clone());
        Ok(rc)
    }

    fn mul_poly_gen(&self, p: &NCPoly, g: u8, budget: u32, bound: u32, fuel: u32) -> Result<NCPoly, EngineError> {
        let mut out = NCPoly::zero();
        for (k, m, c) in p.terms() {
            if k > budget {
                continue;
            }
            let part = self.mul_mono_gen(*m, g, budget - k, bound, fuel)?;
            out.add_scaled(&part, c, k, budget);
        }
        Ok(out)
    }

    fn mul_mono_word(
        &self,
        m: Monomial,
        word: &[u8],
        budget: u32,
        bound: u32,
        fuel: u32,
    ) -> Result<NCPoly, EngineError> {
        let mut p = NCPoly::term(0, m, GR::one());
        for &g in word {
            p = self.mul_poly_gen(&p, g, budget, bound, fuel)?;
        }
        Ok(p)
    }

    fn step_bound(budget: u32, degree: u32) -> u32 {
        2 * budget + degree + 1
    }

    /// Normal form of a word, keeping z-orders ≤ `budget`.
    pub fn straighten_word(&self, word: &[u8], budget: u32) -> Result<NCPoly, EngineError> {
        let bound = Self::step_bound(budget, word.len() as u32);
        self.mul_mono_word(Monomial::one(), word, budget, bound, bound)
    }

    /// Product of two normal-ordered monomials.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial, budget: u32) -> Result<Rc<NCPoly>, EngineError> {
        if b.is_one() {
            return Ok(Rc::new(NCPoly::term(0, *a, GR::one())));
        }
        if let Some(hit) = self.mono_memo.borrow().get(&(*a, *b, budget)) {
            return Ok(hit.clone());
        }
        let bound = Self::step_bound(budget, a.degree() + b.degree());
        let p = Rc::new(self.mul_mono_word(*a, &b.letters(), budget, bound, bound)?);
        self.mono_memo.borrow_mut().insert((*a, *b, budget), p.clone());
        Ok(p)
    }

    /// Product of normal-ordered polynomials, truncated at the engine order.
    pub fn mul(&self, p: &NCPoly, q: &NCPoly) -> Result<NCPoly, EngineError> {
        self.mul_to(p, q, self.order)
    }

    pub fn mul_to(&self, p: &NCPoly, q: &NCPoly, budget: u32) -> Result<NCPoly, EngineError> {
        let mut out = NCPoly::zero();
        for (k1, m1, c1) in p.terms() {
            if k1 > budget {
                continue;
            }
            for (k2, m2, c2) in q.terms() {
                let k = k1 + k2;
                if k > budget {
                    continue;
                }
                let prod = self.mul_monomials(m1, m2, budget - k)?;
                out.add_scaled(&prod, &(c1 * c2), k, budget);
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, p: &NCPoly, q: &NCPoly) -> Result<NCPoly, EngineError> {
        Ok(self.mul(p, q)?.sub(&self.mul(q, p)?))
    }

    /// Straightens a rank-1 word polynomial; negative z-powers are an error.
    pub fn straighten(&self, w: &WordTensor) -> Result<NCPoly, EngineError> {
        let mut out = NCPoly::zero();
        for (k, legs, c) in w.terms() {
            if k < 0 {
                return Err(EngineError::Expr {
                    location: "expression".into(),
                    source: ExprError::Irregular(format!("z^{k}")),
                });
            }
            let k = k as u32;
            if k > self.order {
                continue;
            }
            let p = self.straighten_word(&legs[0], self.order - k)?;
            out.add_scaled(&p, c, k, self.order);
        }
        Ok(out)
    }

    /// Evaluates a rank-1 expression tree to its normal form.
    pub fn eval(&self, tree: &ExprTree) -> Result<NCPoly, EngineError> {
        let err = |source| EngineError::Expr {
            location: "expression".into(),
            source,
        };
        let w = tree.eval_words(&self.binding, self.order as i32).map_err(err)?;
        if w.rank() != 1 {
            return Err(EngineError::Rank {
                location: "expression".into(),
                expected: 1,
            });
        }
        self.straighten(&w)
    }

    pub fn parse_eval(&self, src: &str) -> Result<NCPoly, EngineError> {
        let tree = ExprTree::parse(src, &self.labels).map_err(|source| EngineError::Expr {
            location: src.to_string(),
            source,
        })?;
        self.eval(&tree)
    }

    /// (1/n!) Σ over permutations of `word`, normal-ordered.
    pub fn symmetrize(&self, word: &[u8]) -> Result<NCPoly, EngineError> {
        let perms = super::expr::distinct_permutations(word);
        let share = GR::from_frac(1, perms.len() as i64);
        let mut out = NCPoly::zero();
        for p in perms {
            let s = self.straighten_word(&p, self.order)?;
            out.add_scaled(&s, &share, 0, self.order);
        }
        Ok(out)
    }

    /// Normal form computed by rewriting a uniformly random adjacent inversion
    /// at every step; independent of the insertion algorithm and its memo.
    pub fn straighten_random<R: Rng>(&self, word: &[u8], budget: u32, rng: &mut R) -> NCPoly {
        let mut pending: BTreeMap<(u32, Vec<u8>), GR> = BTreeMap::new();
        pending.insert((0, word.to_vec()), GR::one());
        let mut out = NCPoly::zero();
        while !pending.is_empty() {
            let pick = rng.gen_range(0..pending.len());
            let key = pending.keys().nth(pick).cloned().unwrap();
            let c = pending.remove(&key).unwrap();
            let (z, w) = key;
            let inversions: Vec<usize> = (0..w.len().saturating_sub(1)).filter(|&i| w[i] > w[i + 1]).collect();
            if inversions.is_empty() {
                out.add_term(z, Monomial::from_letters(&w), &c);
                continue;
            }
            let i = inversions[rng.gen_range(0..inversions.len())];
            let (h, g) = (w[i], w[i + 1]);
            let mut push = |k: u32, nw: Vec<u8>, v: GR| {
                if v.is_zero() {
                    return;
                }
                let e = pending.entry((k, nw)).or_insert_with(GR::zero);
                *e += &v;
                if e.is_zero() {
                    pending.retain(|_, x| !x.is_zero());
                }
            };
            let mut swapped = w.clone();
            swapped.swap(i, i + 1);
            push(z, swapped, c.clone());
            if let Some(br) = self.raw_bracket(g as usize, h as usize) {
                for (k, bw, bc) in br.iter() {
                    if z + k > budget {
                        continue;
                    }
                    let mut nw = w[..i].to_vec();
                    nw.extend_from_slice(bw);
                    nw.extend_from_slice(&w[i + 2..]);
                    push(z + k, nw, -(&c * bc));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn labels() -> Vec<String> {
        ["x0", "x1", "X0", "X1"].iter().map(|s| s.to_string()).collect()
    }

    /// Quantum b2 ⊕ R² double with its deformed brackets.
    fn std_spec() -> DeformationSpec {
        let mut s = DeformationSpec::new(labels());
        for (k, v) in [
            ("[x0,x1]", "sinhc(1;x1)"),
            ("[X0,X1]", "sinhc(1;X0)"),
            ("[x0,X0]", "sinhc(1;x1)"),
            ("[x1,X0]", "0"),
            ("[x0,X1]", "-cosh(1;X0)*x0 - cosh(1;x1)*X1"),
            ("[x1,X1]", "sinhc(1;X0)"),
        ] {
            s.set_bracket(k, v).unwrap();
        }
        s.set_coproduct("x0", "exp(-1;x1) o x0 + x0 o exp(1;x1)").unwrap();
        s.set_coproduct("X1", "exp(-1;X0) o X1 + X1 o exp(1;X0)").unwrap();
        s
    }

    fn poly(e: &Engine, src: &str) -> NCPoly {
        e.parse_eval(src).unwrap()
    }

    #[test]
    fn ordered_word_is_fixed() {
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 3).unwrap();
        let p = e.straighten_word(&[0, 3], 3).unwrap();
        assert_eq!(p, NCPoly::term(0, Monomial::from_letters(&[0, 3]), GR::one()));
    }

    #[test]
    fn one_swap_at_order_zero() {
        // X1 x0 = x0 X1 - [x0,X1] = x0 X1 + x0 + X1
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 0).unwrap();
        assert_eq!(e.straighten_word(&[3, 0], 0).unwrap(), poly(&e, "x0*X1 + x0 + X1"));
    }

    #[test]
    fn one_swap_at_order_one() {
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 1).unwrap();
        assert_eq!(e.straighten_word(&[2, 0], 1).unwrap(), poly(&e, "x0*X0 - x1"));
    }

    #[test]
    fn commutator_reproduces_sinhc() {
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 3).unwrap();
        let c = e.commutator(&NCPoly::generator(0), &NCPoly::generator(1)).unwrap();
        assert_eq!(c, poly(&e, "x1 + z^2*x1^3/6"));
        assert!(e
            .commutator(&NCPoly::generator(0), &NCPoly::generator(0))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn central_element() {
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 4).unwrap();
        let c = poly(&e, "x1 - X0");
        for g in 0..4 {
            assert!(
                e.commutator(&c, &NCPoly::generator(g)).unwrap().is_zero(),
                "generator {g}"
            );
        }
    }

    #[test]
    fn cosh_times_generator() {
        // cosh(zX0)·x0 = x0 + z²/2 (X0² x0) straightened
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 2).unwrap();
        let got = poly(&e, "cosh(1;X0)*x0");
        let x0x0 = e.straighten_word(&[2, 2, 0], 0).unwrap();
        let mut want = NCPoly::generator(0);
        want.add_scaled(&x0x0, &GR::from_frac(1, 2), 2, 2);
        assert_eq!(got, want);
        // X0² x0 at z⁰: x0 X0² − 2 x1 X0 (since [x0,X0] = x1, [x1,X0] = 0)
        assert_eq!(x0x0, poly(&e, "x0*X0^2 - 2*x1*X0").truncated(0));
    }

    #[test]
    fn inadmissible_bracket_is_rejected() {
        let mut s = DeformationSpec::new(labels());
        s.set_bracket("[x0,x1]", "x0*x1").unwrap();
        let out = admissibility_check(&s, &ParamBinding::default(), 2);
        assert!(!out.pass);
        assert_eq!(out.locations(), vec!["[x0,x1]"]);
        assert!(matches!(
            Engine::new(&s, &ParamBinding::default(), 2),
            Err(EngineError::Inadmissible(_))
        ));
    }

    #[test]
    fn noncommuting_series_argument_is_rejected() {
        let mut s = std_spec();
        s.coproducts.clear();
        s.set_coproduct("x1", "exp(1; x0 + x1) o x1 + x1 o 1").unwrap();
        assert!(!admissibility_check(&s, &ParamBinding::default(), 2).pass);
    }

    #[test]
    fn random_strategy_agrees() {
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 4).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for word in [vec![3u8, 2, 1, 0], vec![3, 3, 0, 0], vec![2, 0, 3, 1, 0]] {
            let a = e.straighten_word(&word, 4).unwrap();
            for _ in 0..3 {
                assert_eq!(e.straighten_random(&word, 4, &mut rng), a);
            }
        }
    }

    #[test]
    fn depth_stays_within_bound() {
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 4).unwrap();
        e.straighten_word(&[3, 3, 2, 2, 1, 0], 4).unwrap();
        assert!(e.max_depth() <= 2 * 4 + 6 + 1);
    }

    #[test]
    fn symmetrize_two_letters() {
        let e = Engine::new(&std_spec(), &ParamBinding::default(), 2).unwrap();
        let s = e.symmetrize(&[1, 2]).unwrap();
        let half = GR::from_frac(1, 2);
        let mut want = e.straighten_word(&[1, 2], 2).unwrap().scale(&half);
        want = want.add(&e.straighten_word(&[2, 1], 2).unwrap().scale(&half));
        assert_eq!(s, want);
        assert_eq!(e.symmetrize(&[0]).unwrap(), NCPoly::generator(0));
    }
}
