use itertools::Itertools;
use num_traits::Zero;

use super::LieBialgebra;
use crate::linalg::{invert, Matrix};
use crate::report::{CheckOutcome, Residual};
use crate::scalars::GaussianRational as GR;

/// Checks that `e_a ↦ Σ_b m[a][b] e'_b` is a bialgebra morphism from `from`
/// to `to`: it intertwines both the brackets and the cobrackets.
pub fn check_bialgebra_morphism(from: &LieBialgebra, to: &LieBialgebra, m: &Matrix) -> CheckOutcome {
    let n = from.dim();
    if invert(m).is_none() {
        return CheckOutcome::failed("candidate map is singular");
    }
    let mut residuals = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let v = bracket_defect(from, to, m, a, b);
            for (l, c) in v.into_iter().enumerate() {
                if !c.is_zero() {
                    residuals.push(Residual::new(format!("φ([e{a},e{b}])"), 0, format!("e'{l}"), c));
                }
            }
        }
    }
    for k in 0..n {
        let v = cobracket_defect(from, to, m, k);
        for ((p, q), c) in v {
            residuals.push(Residual::new(format!("(φ⊗φ)δ(e{k})"), 0, format!("e'{p}⊗e'{q}"), c));
        }
    }
    CheckOutcome::from_residuals(residuals)
}

fn bracket_defect(from: &LieBialgebra, to: &LieBialgebra, m: &Matrix, a: usize, b: usize) -> Vec<GR> {
    let n = from.dim();
    let mut out = vec![GR::zero(); n];
    for k in 0..n {
        let f = from.f.get(a, b, k);
        if f.is_zero() {
            continue;
        }
        for (l, o) in out.iter_mut().enumerate() {
            *o += &(f * &m[k][l]);
        }
    }
    for i in 0..n {
        if m[a][i].is_zero() {
            continue;
        }
        for j in 0..n {
            let s = &m[a][i] * &m[b][j];
            if s.is_zero() {
                continue;
            }
            for (l, o) in out.iter_mut().enumerate() {
                *o -= &(&s * to.f.get(i, j, l));
            }
        }
    }
    out
}

fn cobracket_defect(from: &LieBialgebra, to: &LieBialgebra, m: &Matrix, k: usize) -> Vec<((usize, usize), GR)> {
    let n = from.dim();
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let mut acc = GR::zero();
            for i in 0..n {
                for j in 0..n {
                    let c = from.c.get(i, j, k);
                    if !c.is_zero() {
                        acc += &(&(c * &m[i][p]) * &m[j][q]);
                    }
                }
            }
            for l in 0..n {
                acc -= &(&m[k][l] * to.c.get(p, q, l));
            }
            if !acc.is_zero() {
                out.push(((p, q), acc));
            }
        }
    }
    out
}

fn is_morphism(from: &LieBialgebra, to: &LieBialgebra, m: &Matrix) -> bool {
    let n = from.dim();
    for a in 0..n {
        for b in a + 1..n {
            if bracket_defect(from, to, m, a, b).iter().any(|c| !c.is_zero()) {
                return false;
            }
        }
    }
    (0..n).all(|k| cobracket_defect(from, to, m, k).is_empty())
}

/// Searches scaled permutations `e_a ↦ s_a e'_{σ(a)}`, with every `s_a` drawn
/// from `scales`, for an isomorphism of `b` onto its dual.
pub fn find_self_duality(b: &LieBialgebra, scales: &[GR]) -> Option<Matrix> {
    let n = b.dim();
    let dual = b.dualize();
    for perm in (0..n).permutations(n) {
        for choice in (0..n).map(|_| scales.iter()).multi_cartesian_product() {
            let mut m = vec![vec![GR::zero(); n]; n];
            for a in 0..n {
                m[a][perm[a]] = choice[a].clone();
            }
            if is_morphism(b, &dual, &m) {
                return Some(m);
            }
        }
    }
    None
}
