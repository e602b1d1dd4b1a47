//! Tensor powers over the normal-ordered algebra and the Hopf-level checks:
//! coassociativity, homomorphism, classical limit, first-order duality,
//! generalized cocommutativity, counit, antipode, centrality and contraction.

mod checks;
mod tensor;

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_traits::One;

pub use checks::{
    check_casimir_z0, check_central, check_classical_limit, check_coassociativity, check_counit, check_first_order,
    check_generalized_cocommutativity, check_homomorphism, check_identity, check_limit_contraction, solve_antipode,
    Antipode, FirstOrder,
};
pub use tensor::TensorPoly;

use crate::ncpoly::{DeformationSpec, Engine, EngineError, ExprTree, Monomial, NCPoly, WordTensor};
use crate::scalars::{GaussianRational as GR, ParamBinding};

/// A deformation at one binding and truncation order, with generator
/// coproducts in normal form and a memo of coproducts of monomials.
pub struct HopfAlgebra {
    spec: DeformationSpec,
    engine: Engine,
    coproducts: Vec<TensorPoly>,
    delta_memo: RefCell<HashMap<(Monomial, u32), Rc<TensorPoly>>>,
}

impl HopfAlgebra {
    pub fn new(spec: &DeformationSpec, binding: &ParamBinding, order: u32) -> Result<Self, EngineError> {
        let engine = Engine::new(spec, binding, order)?;
        let mut coproducts: Vec<TensorPoly> = (0..spec.dim()).map(TensorPoly::primitive).collect();
        for (&g, tree) in &spec.coproducts {
            let loc = spec.coproduct_location(g);
            let w = tree
                .eval_words(binding, order as i32)
                .map_err(|source| EngineError::Expr {
                    location: loc.clone(),
                    source,
                })?;
            coproducts[g] = straighten_tensor(&engine, &w, order, &loc)?;
        }
        Ok(HopfAlgebra {
            spec: spec.clone(),
            engine,
            coproducts,
            delta_memo: RefCell::new(HashMap::new()),
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn spec(&self) -> &DeformationSpec {
        &self.spec
    }

    pub fn order(&self) -> u32 {
        self.engine.order()
    }

    pub fn labels(&self) -> &[String] {
        self.engine.labels()
    }

    pub fn coproduct(&self, g: usize) -> &TensorPoly {
        &self.coproducts[g]
    }

    /// Normal form of the bracket right-hand side `[a,b]`, zero if absent.
    pub fn bracket(&self, a: usize, b: usize) -> Result<NCPoly, EngineError> {
        let (lo, hi, sign) = if a < b { (a, b, GR::one()) } else { (b, a, -GR::one()) };
        match self.spec.brackets.get(&(lo, hi)) {
            Some(tree) => Ok(self.engine.eval(tree)?.scale(&sign)),
            None => Ok(NCPoly::zero()),
        }
    }

    pub fn eval(&self, tree: &ExprTree) -> Result<NCPoly, EngineError> {
        self.engine.eval(tree)
    }

    /// Leg-wise product (a⊗b)(c⊗d) = ac⊗bd, truncated at `budget`.
    pub fn mul(&self, a: &TensorPoly, b: &TensorPoly, budget: u32) -> Result<TensorPoly, EngineError> {
        assert_eq!(a.rank(), b.rank());
        let mut out = TensorPoly::zero(a.rank());
        for (k1, l1, c1) in a.terms() {
            for (k2, l2, c2) in b.terms() {
                let k = k1 + k2;
                if k > budget {
                    continue;
                }
                let rem = budget - k;
                let legs: Vec<Rc<NCPoly>> = l1
                    .iter()
                    .zip(l2)
                    .map(|(x, y)| self.engine.mul_monomials(x, y, rem))
                    .collect::<Result<_, _>>()?;
                let refs: Vec<&NCPoly> = legs.iter().map(|p| p.as_ref()).collect();
                let prod = TensorPoly::from_legs(&refs, rem);
                out.add_scaled(&prod, &(c1 * c2), k, budget);
            }
        }
        Ok(out)
    }

    /// Δ of a normal-ordered monomial as the ordered product of generator
    /// coproducts.
    pub fn delta_monomial(&self, m: &Monomial, budget: u32) -> Result<Rc<TensorPoly>, EngineError> {
        if let Some(hit) = self.delta_memo.borrow().get(&(*m, budget)) {
            return Ok(hit.clone());
        }
        let value = match m.last() {
            None => TensorPoly::one(2),
            Some(h) => {
                let head = self.delta_monomial(&m.without(h), budget)?;
                self.mul(&head, &self.coproducts[h].truncated(budget), budget)?
            }
        };
        let rc = Rc::new(value);
        self.delta_memo.borrow_mut().insert((*m, budget), rc.clone());
        Ok(rc)
    }

    /// Multiplicative, linear extension of Δ.
    pub fn extend_coproduct(&self, p: &NCPoly) -> Result<TensorPoly, EngineError> {
        let n = self.order();
        let mut out = TensorPoly::zero(2);
        for (k, m, c) in p.terms() {
            if k > n {
                continue;
            }
            let d = self.delta_monomial(m, n - k)?;
            out.add_scaled(&d, c, k, n);
        }
        Ok(out)
    }

    /// [Δa, Δb] in the tensor square.
    pub fn tensor_commutator(&self, a: &TensorPoly, b: &TensorPoly) -> Result<TensorPoly, EngineError> {
        let n = self.order();
        Ok(self.mul(a, b, n)?.sub(&self.mul(b, a, n)?))
    }
}

fn straighten_tensor(engine: &Engine, w: &WordTensor, order: u32, location: &str) -> Result<TensorPoly, EngineError> {
    if w.is_zero() {
        return Ok(TensorPoly::zero(2));
    }
    if w.rank() != 2 {
        return Err(EngineError::Rank {
            location: location.to_string(),
            expected: 2,
        });
    }
    let mut out = TensorPoly::zero(2);
    for (k, legs, c) in w.terms() {
        if k < 0 {
            return Err(EngineError::Expr {
                location: location.to_string(),
                source: crate::ncpoly::ExprError::Irregular(format!("z^{k}")),
            });
        }
        let k = k as u32;
        if k > order {
            continue;
        }
        let rem = order - k;
        let polys: Vec<NCPoly> = legs
            .iter()
            .map(|leg| engine.straighten_word(leg, rem))
            .collect::<Result<_, _>>()?;
        let refs: Vec<&NCPoly> = polys.iter().collect();
        out.add_scaled(&TensorPoly::from_legs(&refs, rem), c, k, order);
    }
    Ok(out)
}

impl TensorPoly {
    /// Applies a linear map to one leg of a rank-2 element, producing rank 3.
    pub(crate) fn expand_leg(
        &self,
        leg: usize,
        order: u32,
        mut f: impl FnMut(&Monomial, u32) -> Result<Rc<TensorPoly>, EngineError>,
    ) -> Result<TensorPoly, EngineError> {
        let mut out = TensorPoly::zero(self.rank() + 1);
        for (k, legs, c) in self.terms() {
            let image = f(&legs[leg], order - k)?;
            for (k2, sub, c2) in image.terms() {
                let mut l = legs[..leg].to_vec();
                l.extend_from_slice(sub);
                l.extend_from_slice(&legs[leg + 1..]);
                if k + k2 <= order {
                    out.add_term(k + k2, l, &(c * c2));
                }
            }
        }
        Ok(out)
    }
}
