use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use num_traits::One;

use super::{straighten_tensor, HopfAlgebra, TensorPoly};
use crate::liealg::{canonical_structures, cocommutator_from_r, DoubleAlgebra};
use crate::ncpoly::{DeformationSpec, EngineError, ExprTree, Monomial, NCPoly};
use crate::report::{CheckOutcome, Residual};
use crate::scalars::{GaussianRational as GR, ParamBinding};

fn tensor_residuals(diff: &TensorPoly, location: &str, labels: &[String], out: &mut Vec<Residual>) {
    for (k, legs, c) in diff.terms() {
        out.push(Residual::new(
            location,
            k,
            TensorPoly::format_term(legs, labels),
            c.clone(),
        ));
    }
}

fn poly_residuals(diff: &NCPoly, location: &str, labels: &[String], out: &mut Vec<Residual>) {
    for (k, m, c) in diff.terms() {
        out.push(Residual::new(location, k, m.format(labels), c.clone()));
    }
}

fn engine_failure(e: EngineError) -> CheckOutcome {
    CheckOutcome::failed(e.to_string())
}

/// (Δ⊗id)Δ(g) = (id⊗Δ)Δ(g) for every generator.
pub fn check_coassociativity(h: &HopfAlgebra) -> CheckOutcome {
    let run = || -> Result<CheckOutcome, EngineError> {
        let n = h.order();
        let mut residuals = Vec::new();
        for g in 0..h.labels().len() {
            let d = h.coproduct(g);
            let left = d.expand_leg(0, n, |m, b| h.delta_monomial(m, b))?;
            let right = d.expand_leg(1, n, |m, b| h.delta_monomial(m, b))?;
            let loc = format!("Δ({})", h.labels()[g]);
            tensor_residuals(&left.sub(&right), &loc, h.labels(), &mut residuals);
        }
        Ok(CheckOutcome::from_residuals(residuals))
    };
    run().unwrap_or_else(engine_failure)
}

/// Δ([a,b]) = [Δa, Δb] for every generator pair.
pub fn check_homomorphism(h: &HopfAlgebra) -> CheckOutcome {
    let run = || -> Result<CheckOutcome, EngineError> {
        let d = h.labels().len();
        let mut residuals = Vec::new();
        for a in 0..d {
            for b in a + 1..d {
                let lhs = h.extend_coproduct(&h.bracket(a, b)?)?;
                let rhs = h.tensor_commutator(h.coproduct(a), h.coproduct(b))?;
                let loc = format!("[{},{}]", h.labels()[a], h.labels()[b]);
                tensor_residuals(&lhs.sub(&rhs), &loc, h.labels(), &mut residuals);
            }
        }
        Ok(CheckOutcome::from_residuals(residuals))
    };
    run().unwrap_or_else(engine_failure)
}

/// The z⁰ part of every bracket equals the classical double bracket and the
/// z⁰ part of every coproduct is primitive.
pub fn check_classical_limit(h: &HopfAlgebra, double: &DoubleAlgebra) -> CheckOutcome {
    let d = h.labels().len();
    if double.dim() != d {
        return CheckOutcome::failed(format!(
            "classical double has {} generators, deformation has {d}",
            double.dim()
        ));
    }
    let run = || -> Result<CheckOutcome, EngineError> {
        let mut residuals = Vec::new();
        for a in 0..d {
            for b in a + 1..d {
                let got = h.bracket(a, b)?.order(0);
                let mut want = NCPoly::zero();
                for (k, v) in double.bracket(a, b) {
                    want.add_term(0, Monomial::generator(*k), v);
                }
                let loc = format!("[{},{}]", h.labels()[a], h.labels()[b]);
                poly_residuals(&got.sub(&want), &loc, h.labels(), &mut residuals);
            }
        }
        for g in 0..d {
            let diff = h.coproduct(g).order(0).sub(&TensorPoly::primitive(g));
            let loc = format!("Δ({})", h.labels()[g]);
            tensor_residuals(&diff, &loc, h.labels(), &mut residuals);
        }
        Ok(CheckOutcome::from_residuals(residuals))
    };
    run().unwrap_or_else(engine_failure)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstOrder {
    /// Global sign with z¹ Δ = ε δ_DD; `None` when δ_DD vanishes identically.
    pub epsilon: Option<i8>,
    pub outcome: CheckOutcome,
}

/// Compares the z¹ part of every coproduct with ε·δ_DD for one global sign ε,
/// chosen to minimize the number of mismatching generators.
pub fn check_first_order(h: &HopfAlgebra, double: &DoubleAlgebra) -> FirstOrder {
    let d = h.labels().len();
    if double.dim() != d {
        return FirstOrder {
            epsilon: None,
            outcome: CheckOutcome::failed("dimension mismatch with the classical double"),
        };
    }
    let r = canonical_structures(double).r;
    let delta = cocommutator_from_r(double.algebra(), &r);
    let as_tensor = |g: usize, sign: &GR| {
        let mut t = TensorPoly::zero(2);
        for (idx, v) in delta[g].terms() {
            t.add_term(
                0,
                vec![Monomial::generator(idx[0]), Monomial::generator(idx[1])],
                &(v * sign),
            );
        }
        t
    };
    let trivial = delta.iter().all(|t| t.is_zero());
    let attempt = |sign: i8| {
        let s = GR::from_int(sign as i64);
        let mut residuals = Vec::new();
        for g in 0..d {
            let diff = h.coproduct(g).order(1).sub(&as_tensor(g, &s));
            let mut rs = Vec::new();
            tensor_residuals(&diff, &format!("Δ({})", h.labels()[g]), h.labels(), &mut rs);
            for r in &mut rs {
                r.z_order = 1;
            }
            residuals.extend(rs);
        }
        CheckOutcome::from_residuals(residuals)
    };
    let plus = attempt(1);
    let minus = attempt(-1);
    let (epsilon, mut outcome) = if minus.locations().len() < plus.locations().len() {
        (-1, minus)
    } else {
        (1, plus)
    };
    if trivial {
        outcome = outcome.with_note("δ_DD vanishes; the sign is undetermined");
        return FirstOrder { epsilon: None, outcome };
    }
    FirstOrder {
        epsilon: Some(epsilon),
        outcome,
    }
}

/// flip∘Δ_z(g) = Δ_{−z}(g) for every generator.
pub fn check_generalized_cocommutativity(h: &HopfAlgebra) -> CheckOutcome {
    let mut residuals = Vec::new();
    for g in 0..h.labels().len() {
        let d = h.coproduct(g);
        let diff = d.flip().sub(&d.negate_z());
        tensor_residuals(&diff, &format!("Δ({})", h.labels()[g]), h.labels(), &mut residuals);
    }
    CheckOutcome::from_residuals(residuals)
}

/// (ε⊗id)Δ(g) = g = (id⊗ε)Δ(g) with ε vanishing on generators.
pub fn check_counit(h: &HopfAlgebra) -> CheckOutcome {
    let mut residuals = Vec::new();
    for g in 0..h.labels().len() {
        let d = h.coproduct(g);
        for (side, name) in [(0usize, "(ε⊗id)"), (1, "(id⊗ε)")] {
            let mut got = NCPoly::zero();
            for (k, legs, c) in d.terms() {
                if legs[side].is_one() {
                    got.add_term(k, legs[1 - side], c);
                }
            }
            let diff = got.sub(&NCPoly::generator(g));
            poly_residuals(
                &diff,
                &format!("{name}Δ({})", h.labels()[g]),
                h.labels(),
                &mut residuals,
            );
        }
    }
    CheckOutcome::from_residuals(residuals)
}

#[derive(Debug, Clone)]
pub struct Antipode {
    /// S(g) for every generator, truncated at the algebra's order.
    pub images: Vec<NCPoly>,
    pub outcome: CheckOutcome,
}

struct AntipodeMap<'a> {
    h: &'a HopfAlgebra,
    images: &'a [NCPoly],
    memo: HashMap<(Monomial, u32), Rc<NCPoly>>,
}

impl AntipodeMap<'_> {
    /// S(l_1⋯l_r) = S(l_r)⋯S(l_1).
    fn monomial(&mut self, m: &Monomial, budget: u32) -> Result<Rc<NCPoly>, EngineError> {
        if let Some(hit) = self.memo.get(&(*m, budget)) {
            return Ok(hit.clone());
        }
        let value = match m.last() {
            None => NCPoly::one(),
            Some(h) => {
                let tail = self.monomial(&m.without(h), budget)?;
                let head = self.images[h].truncated(budget);
                self.h.engine().mul_to(&head, &tail, budget)?
            }
        };
        let rc = Rc::new(value);
        self.memo.insert((*m, budget), rc.clone());
        Ok(rc)
    }

    fn poly(&mut self, p: &NCPoly, budget: u32) -> Result<NCPoly, EngineError> {
        let mut out = NCPoly::zero();
        for (k, m, c) in p.terms() {
            if k <= budget {
                let s = self.monomial(m, budget - k)?;
                out.add_scaled(&s, c, k, budget);
            }
        }
        Ok(out)
    }

    /// m(S⊗id)Δ(g) (`side` 0) or m(id⊗S)Δ(g) (`side` 1), truncated at `budget`.
    fn convolve(&mut self, d: &TensorPoly, side: usize, budget: u32) -> Result<NCPoly, EngineError> {
        let engine = self.h.engine();
        let mut out = NCPoly::zero();
        for (k, legs, c) in d.terms() {
            if k > budget {
                continue;
            }
            let rem = budget - k;
            let s = self.monomial(&legs[side], rem)?;
            let other = NCPoly::term(0, legs[1 - side], GR::one());
            let prod = if side == 0 {
                engine.mul_to(&s, &other, rem)?
            } else {
                engine.mul_to(&other, &s, rem)?
            };
            out.add_scaled(&prod, c, k, budget);
        }
        Ok(out)
    }
}

/// Solves m(S⊗id)Δ(g) = 0 order by order in z, then verifies the right
/// antipode axiom and that S reverses every bracket relation.
pub fn solve_antipode(h: &HopfAlgebra) -> Antipode {
    let d = h.labels().len();
    let n = h.order();
    let mut images: Vec<NCPoly> = (0..d).map(|g| NCPoly::generator(g).scale(&-GR::one())).collect();
    for g in 0..d {
        if h.coproduct(g).order(0) != TensorPoly::primitive(g) {
            return Antipode {
                images,
                outcome: CheckOutcome::failed(format!(
                    "Δ({}) is not primitive at z⁰; the order-by-order system is not triangular",
                    h.labels()[g]
                )),
            };
        }
    }
    let run = |images: &mut Vec<NCPoly>| -> Result<CheckOutcome, EngineError> {
        for k in 1..=n {
            let mut map = AntipodeMap {
                h,
                images,
                memo: HashMap::new(),
            };
            let mut updates = Vec::with_capacity(d);
            for g in 0..d {
                updates.push(map.convolve(h.coproduct(g), 0, k)?.order(k));
            }
            for (g, u) in updates.into_iter().enumerate() {
                images[g].add_scaled(&u, &-GR::one(), k, n);
            }
        }
        let mut map = AntipodeMap {
            h,
            images,
            memo: HashMap::new(),
        };
        let mut residuals = Vec::new();
        let labels = h.labels();
        for g in 0..d {
            for (side, name) in [(0usize, "m(S⊗id)"), (1, "m(id⊗S)")] {
                let r = map.convolve(h.coproduct(g), side, n)?;
                poly_residuals(&r, &format!("{name}Δ({})", labels[g]), labels, &mut residuals);
            }
        }
        let engine = h.engine();
        for a in 0..d {
            for b in a + 1..d {
                let lhs = map.poly(&h.bracket(a, b)?, n)?;
                let rhs = engine.commutator(&map.images[b], &map.images[a])?;
                poly_residuals(
                    &lhs.sub(&rhs),
                    &format!("S([{},{}])", labels[a], labels[b]),
                    labels,
                    &mut residuals,
                );
            }
        }
        Ok(CheckOutcome::from_residuals(residuals))
    };
    let outcome = run(&mut images).unwrap_or_else(engine_failure);
    Antipode { images, outcome }
}

/// [element, g] = 0 for every generator and, if requested,
/// Δ(element) = element⊗1 + 1⊗element.
pub fn check_central(h: &HopfAlgebra, element: &NCPoly, primitive: bool) -> CheckOutcome {
    let run = || -> Result<CheckOutcome, EngineError> {
        let labels = h.labels();
        let mut residuals = Vec::new();
        for g in 0..labels.len() {
            let c = h.engine().commutator(element, &NCPoly::generator(g))?;
            poly_residuals(&c, &format!("[C,{}]", labels[g]), labels, &mut residuals);
        }
        if primitive {
            let diff = h.extend_coproduct(element)?.sub(&TensorPoly::primitive_of(element));
            tensor_residuals(&diff, "Δ(C)", labels, &mut residuals);
        }
        Ok(CheckOutcome::from_residuals(residuals))
    };
    run().unwrap_or_else(engine_failure)
}

/// The quadratic Casimir Σ(x^i X_i + X_i x^i) of the classical double commutes
/// with every generator at z⁰.
pub fn check_casimir_z0(h: &HopfAlgebra, double: &DoubleAlgebra) -> CheckOutcome {
    let n = double.half_dim();
    if double.dim() != h.labels().len() {
        return CheckOutcome::failed("dimension mismatch with the classical double");
    }
    let run = || -> Result<CheckOutcome, EngineError> {
        let e = h.engine();
        let mut c = NCPoly::zero();
        for i in 0..n {
            let (a, b) = (NCPoly::generator(i), NCPoly::generator(n + i));
            c = c.add(&e.mul(&a, &b)?).add(&e.mul(&b, &a)?);
        }
        let mut residuals = Vec::new();
        for g in 0..double.dim() {
            let comm = e.commutator(&c, &NCPoly::generator(g))?.order(0);
            poly_residuals(&comm, &format!("[C,{}]", h.labels()[g]), h.labels(), &mut residuals);
        }
        Ok(CheckOutcome::from_residuals(residuals))
    };
    run().unwrap_or_else(engine_failure)
}

/// `lhs = rhs` in normal form.
pub fn check_identity(h: &HopfAlgebra, lhs: &NCPoly, rhs: &ExprTree, location: &str) -> CheckOutcome {
    match h.eval(rhs) {
        Ok(r) => {
            let mut residuals = Vec::new();
            poly_residuals(&lhs.sub(&r), location, h.labels(), &mut residuals);
            CheckOutcome::from_residuals(residuals)
        }
        Err(e) => engine_failure(e),
    }
}

/// Instantiates `from` at `binding` and compares every bracket and coproduct,
/// in normal form under `to`'s relations, with the corresponding entry of `to`.
pub fn check_limit_contraction(from: &DeformationSpec, binding: &ParamBinding, to: &HopfAlgebra) -> CheckOutcome {
    let labels = to.labels();
    if from.labels != labels {
        return CheckOutcome::failed("generator labels differ");
    }
    let n = to.order();
    let engine = to.engine();
    let run = || -> Result<CheckOutcome, EngineError> {
        let mut residuals = Vec::new();
        let keys: BTreeSet<(usize, usize)> = from.brackets.keys().chain(to.spec().brackets.keys()).copied().collect();
        for (a, b) in keys {
            let loc = from.bracket_location(a, b);
            let got = match from.brackets.get(&(a, b)) {
                Some(tree) => {
                    let w = tree.eval_words(binding, n as i32).map_err(|source| EngineError::Expr {
                        location: loc.clone(),
                        source,
                    })?;
                    engine.straighten(&w)?
                }
                None => NCPoly::zero(),
            };
            poly_residuals(&got.sub(&to.bracket(a, b)?), &loc, labels, &mut residuals);
        }
        for g in 0..labels.len() {
            let loc = from.coproduct_location(g);
            let got = match from.coproducts.get(&g) {
                Some(tree) => {
                    let w = tree.eval_words(binding, n as i32).map_err(|source| EngineError::Expr {
                        location: loc.clone(),
                        source,
                    })?;
                    straighten_tensor(engine, &w, n, &loc)?
                }
                None => TensorPoly::primitive(g),
            };
            tensor_residuals(&got.sub(to.coproduct(g)), &loc, labels, &mut residuals);
        }
        Ok(CheckOutcome::from_residuals(residuals))
    };
    run().unwrap_or_else(engine_failure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{build_double, LieBialgebra, StructureTensor};

    fn labels() -> Vec<String> {
        ["x0", "x1", "X0", "X1"].iter().map(|s| s.to_string()).collect()
    }

    fn std_spec() -> DeformationSpec {
        let mut s = DeformationSpec::new(labels());
        for (k, v) in [
            ("[x0,x1]", "sinhc(1;x1)"),
            ("[X0,X1]", "sinhc(1;X0)"),
            ("[x0,X0]", "sinhc(1;x1)"),
            ("[x0,X1]", "-cosh(1;X0)*x0 - cosh(1;x1)*X1"),
            ("[x1,X1]", "sinhc(1;X0)"),
        ] {
            s.set_bracket(k, v).unwrap();
        }
        s.set_coproduct("x0", "exp(-1;x1) o x0 + x0 o exp(1;x1)").unwrap();
        s.set_coproduct("X1", "exp(-1;X0) o X1 + X1 o exp(1;X0)").unwrap();
        s
    }

    fn std_double() -> DoubleAlgebra {
        let mut f = StructureTensor::zero(2);
        f.set_skew(0, 1, 1, GR::one());
        let mut c = StructureTensor::zero(2);
        c.set_skew(0, 1, 0, GR::one());
        build_double(&LieBialgebra::new(f, c)).unwrap()
    }

    fn hopf(order: u32) -> HopfAlgebra {
        HopfAlgebra::new(&std_spec(), &ParamBinding::default(), order).unwrap()
    }

    #[test]
    fn std_double_passes_every_check() {
        let h = hopf(4);
        let d = std_double();
        assert!(check_coassociativity(&h).pass);
        let hom = check_homomorphism(&h);
        assert!(hom.pass, "{:?}", hom.residuals);
        assert!(check_classical_limit(&h, &d).pass);
        let fo = check_first_order(&h, &d);
        assert!(fo.outcome.pass, "{:?}", fo.outcome);
        assert_eq!(fo.epsilon, Some(1));
        assert!(check_generalized_cocommutativity(&h).pass);
        assert!(check_counit(&h).pass);
        let s = solve_antipode(&h);
        assert!(s.outcome.pass, "{:?}", s.outcome);
        assert_eq!(s.images[1], NCPoly::generator(1).scale(&-GR::one()));
    }

    #[test]
    fn antipode_of_x0_conjugates() {
        // S(x0) = −e^{z x1} x0 e^{−z x1}
        let h = hopf(3);
        let s = solve_antipode(&h);
        let want = h.engine().parse_eval("-exp(1;x1)*x0*exp(-1;x1)").unwrap();
        assert_eq!(s.images[0], want);
    }

    #[test]
    fn primitive_extension() {
        let h = hopf(2);
        assert_eq!(h.extend_coproduct(&NCPoly::one()).unwrap(), TensorPoly::one(2));
        let p = h.engine().parse_eval("x1*X0").unwrap();
        let got = h.extend_coproduct(&p).unwrap();
        let want = h.mul(h.coproduct(1), h.coproduct(2), 2).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn broken_bracket_is_caught() {
        let mut s = std_spec();
        s.brackets.remove(&(0, 1));
        s.set_bracket("[x0,x1]", "x1").unwrap();
        let h = HopfAlgebra::new(&s, &ParamBinding::default(), 3).unwrap();
        let out = check_homomorphism(&h);
        assert!(!out.pass);
        assert!(out.locations().contains(&"[x0,x1]"));
        assert!(check_classical_limit(&h, &std_double()).pass);
    }

    #[test]
    fn first_order_picks_global_sign() {
        let mut s = std_spec();
        s.coproducts.clear();
        s.set_coproduct("x0", "exp(1;x1) o x0 + x0 o exp(-1;x1)").unwrap();
        s.set_coproduct("X1", "exp(1;X0) o X1 + X1 o exp(-1;X0)").unwrap();
        let h = HopfAlgebra::new(&s, &ParamBinding::default(), 2).unwrap();
        let fo = check_first_order(&h, &std_double());
        assert_eq!(fo.epsilon, Some(-1));
        assert!(fo.outcome.pass);
    }

    #[test]
    fn central_and_contraction() {
        let h = hopf(4);
        let c = h.engine().parse_eval("x1 - X0").unwrap();
        assert!(check_central(&h, &c, true).pass);
        assert!(check_central(&h, &NCPoly::one(), false).pass);
        assert!(!check_central(&h, &NCPoly::generator(0), false).pass);
        assert!(check_limit_contraction(&std_spec(), &ParamBinding::default(), &h).pass);
    }

    #[test]
    fn counit_detects_bad_leg() {
        let mut s = std_spec();
        s.coproducts.clear();
        s.set_coproduct("x1", "2*x1 o 1 + 1 o x1").unwrap();
        let h = HopfAlgebra::new(&s, &ParamBinding::default(), 1).unwrap();
        assert_eq!(check_counit(&h).locations(), vec!["(id⊗ε)Δ(x1)"]);
    }
}
