//! Strict polynomial functors as weight-graded Schur-algebra modules.

pub mod apply;
pub mod eval;
pub mod expr;
pub mod module;
pub mod natmap;

pub use apply::{apply, apply_in};
pub use eval::{compositions, eval, eval_homogeneous, weight_space, words_of_content, Caps};
pub use expr::{Expr, ParseError, Variance, GRAMMAR_VERSION};
pub use module::{op_target, BlockShift, OpId, OpKind, Weight, WeightedModule};
pub use natmap::{nat_map, NatMap};

use std::collections::BTreeMap;

/// Degree-indexed homogeneous pieces of an evaluation.
pub type GradedModule = BTreeMap<u16, WeightedModule>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FqCtx, Mat};
    use std::sync::Arc;

    fn gf2() -> Arc<FqCtx> {
        FqCtx::new(2, 1).unwrap()
    }

    fn ev(s: &str, n: usize, f: &Arc<FqCtx>) -> Arc<WeightedModule> {
        eval(&Expr::parse(s).unwrap(), n, f, &Caps::default()).unwrap()
    }

    #[test]
    fn eval_dims_examples() {
        let f = gf2();
        let ten2 = ev("ten(2)", 2, &f);
        assert_eq!(ten2.dim(), 4);
        let ws: Vec<(Weight, usize)> =
            ten2.blocks.iter().map(|(w, d)| (w.clone(), *d)).collect();
        assert_eq!(ws, vec![(vec![0, 2], 1), (vec![1, 1], 2), (vec![2, 0], 1)]);
        assert_eq!(ev("div(2)", 2, &f).dim(), 3);
        assert_eq!(ev("sym(2)", 2, &f).dim(), 3);
        assert_eq!(ev("ext(2)", 2, &f).dim(), 1);
        assert_eq!(ev("ext(2)", 4, &f).dim(), 6);
    }

    #[test]
    fn eval_dimension_formulas() {
        let f = gf2();
        let f3 = FqCtx::new(3, 1).unwrap();
        for (n, d) in [(2usize, 2u32), (3, 2), (2, 3), (4, 2)] {
            let binom = |a: usize, b: usize| -> usize {
                (0..b).fold(1usize, |acc, t| acc * (a - t) / (t + 1))
            };
            for fld in [&f, &f3] {
                assert_eq!(ev(&format!("sym({d})"), n, fld).dim(), binom(n + d as usize - 1, d as usize));
                assert_eq!(ev(&format!("div({d})"), n, fld).dim(), binom(n + d as usize - 1, d as usize));
                assert_eq!(ev(&format!("ext({d})"), n, fld).dim(), binom(n, d as usize));
                assert_eq!(ev(&format!("ten({d})"), n, fld).dim(), n.pow(d));
                // Twist preserves dimension
                assert_eq!(ev(&format!("twist(sym({d}),1)"), n, fld).dim(), ev(&format!("sym({d})"), n, fld).dim());
            }
        }
    }

    #[test]
    fn twist_id_frobenius_subobject() {
        // eval(Twist(Id,1), 2) over GF(2): dim 2, weights (2,0), (0,2)
        let f = gf2();
        let m = ev("twist(id,1)", 2, &f);
        assert_eq!(m.dim(), 2);
        let ws: Vec<Weight> = m.blocks.keys().cloned().collect();
        assert_eq!(ws, vec![vec![0, 2], vec![2, 0]]);
        assert_eq!(m.block_dim(&vec![1, 1]), 0);
    }

    #[test]
    fn degenerate_rank_zero() {
        let f = gf2();
        assert_eq!(ev("sym(2)", 0, &f).dim(), 0);
        assert_eq!(ev("sym(0)", 0, &f).dim(), 1);
        assert_eq!(ev("sym(0)+sym(2)", 0, &f).dim(), 1);
    }

    #[test]
    fn divided_power_relations_hold() {
        let f = gf2();
        let f3 = FqCtx::new(3, 1).unwrap();
        for fld in [&f, &f3] {
            for e in ["ten(2)", "sym(3)", "div(3)", "ext(2)", "div(2)*div(1)", "twist(id,1)", "sym(2)@sym(2)"] {
                let m = ev(e, 2, fld);
                assert!(m.verify_divided_power_relations(), "relations fail for {e} over GF({})", fld.q());
            }
        }
    }

    #[test]
    fn apply_sym2_char2_expansion() {
        // f = [[1,1],[0,1]]: x ↦ x, y ↦ x + y; S²(f): y² ↦ x² + y² over GF(2)
        let f = gf2();
        let mat = Mat::from_rows(&f, &[vec![1, 1], vec![0, 1]]);
        let s2 = apply(&Expr::parse("sym(2)").unwrap(), &mat, &Caps::default()).unwrap();
        // canonical basis order of sym(2) at n=2: (0,2)=y², (1,1)=xy, (2,0)=x²
        let y2_col = s2.col(0);
        assert_eq!(y2_col, vec![1, 0, 1]);
    }

    #[test]
    fn apply_twist_entrywise_power_gf4() {
        let f4 = FqCtx::new(2, 2).unwrap();
        let g = f4.generator();
        let m = Mat::from_rows(&f4, &[vec![g]]);
        let t = apply(&Expr::parse("twist(id,1)").unwrap(), &m, &Caps::default()).unwrap();
        assert_eq!(t.get(0, 0), f4.mul(g, g));
    }

    #[test]
    fn apply_ext2_is_determinant_at_rank2() {
        let f3 = FqCtx::new(3, 1).unwrap();
        let mut st = 11u64;
        let mut lcg = move || {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((st >> 33) % 3) as u32
        };
        for _ in 0..10 {
            let m = Mat::from_fn(&f3, 2, 2, |_, _| lcg());
            let e2 = apply(&Expr::parse("ext(2)").unwrap(), &m, &Caps::default()).unwrap();
            let det = f3.sub(f3.mul(m.get(0, 0), m.get(1, 1)), f3.mul(m.get(0, 1), m.get(1, 0)));
            assert_eq!(e2.rows, 1);
            assert_eq!(e2.get(0, 0), det);
        }
    }

    #[test]
    fn apply_is_functorial() {
        // apply(E, f·g) = apply(E, f)·apply(E, g), random pairs
        let f = gf2();
        let f3 = FqCtx::new(3, 1).unwrap();
        let mut st = 23u64;
        for fld in [&f, &f3] {
            let q = fld.q() as u64;
            let mut lcg = move || {
                st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((st >> 33) % q) as u32
            };
            for e in ["sym(2)", "div(2)", "ext(2)", "ten(2)", "twist(id,1)", "div(1)*sym(2)", "sym(2)+ext(2)", "mtwist(id,1,2)", "sym(2)@sym(2)"] {
                let expr = Expr::parse(e).unwrap();
                for _ in 0..100 {
                    let g = Mat::from_fn(fld, 2, 2, |_, _| lcg());
                    let h = Mat::from_fn(fld, 2, 2, |_, _| lcg());
                    let lhs = apply(&expr, &g.mul(&h), &Caps::default()).unwrap();
                    let rhs = apply(&expr, &g, &Caps::default())
                        .unwrap()
                        .mul(&apply(&expr, &h, &Caps::default()).unwrap());
                    assert_eq!(lhs, rhs, "functoriality fails for {e} over GF({})", fld.q());
                }
                let id = Mat::identity(fld, 2);
                let aid = apply(&expr, &id, &Caps::default()).unwrap();
                assert_eq!(aid, Mat::identity(fld, aid.rows), "identity fails for {e}");
            }
        }
    }

    #[test]
    fn multitwist_matches_expanded_sum() {
        // mtwist(E, a, s) = E ∘ (I^(0) ⊕ I^(a) ⊕ … ): definitional equality of
        // evaluations, checked against a hand-expanded expression for E = sym(2)
        let f = gf2();
        let m = ev("mtwist(sym(2),1,2)", 2, &f);
        // S²(V ⊕ V^(1)) = S²V ⊕ V⊗V^(1) ⊕ S²(V^(1))
        let expanded = ev("sym(2)+id*twist(id,1)+twist(sym(2),1)", 2, &f);
        assert_eq!(m.dim(), expanded.dim());
        assert_eq!(m.blocks, expanded.blocks);
        let degs: Vec<u16> = m.degrees();
        assert_eq!(degs, vec![2, 3, 4]);
    }

    #[test]
    fn weight_space_examples() {
        let f = gf2();
        assert_eq!(ev("sym(2)", 2, &f).block_dim(&vec![1, 1]), 1);
        assert_eq!(ev("ten(2)", 2, &f).block_dim(&vec![1, 1]), 2);
        assert_eq!(ev("twist(id,1)", 2, &f).block_dim(&vec![1, 1]), 0);
        // dimensions sum to dim M over all μ (trivially by construction)
        let m = ev("div(2)*div(1)", 2, &f);
        let total: usize = m.blocks.values().sum();
        assert_eq!(total, m.dim());
    }

    #[test]
    fn kuhn_dual_examples() {
        let f = gf2();
        let sym2 = ev("sym(2)", 2, &f);
        let dual = sym2.kuhn_dual();
        let div2 = ev("div(2)", 2, &f);
        // same weight dimensions, with weight reversed under the
        // order-reversing relabeling (Weyl symmetry makes both readings agree)
        for (w, d) in &dual.blocks {
            let rev: Weight = w.iter().rev().cloned().collect();
            assert_eq!(sym2.block_dim(&rev), *d);
        }
        assert_eq!(dual.blocks, div2.blocks);
        // dual of dual has the original operator matrices
        let dd = dual.kuhn_dual();
        for (op, shift) in &sym2.ops {
            for (w, m) in &shift.blocks {
                assert_eq!(dd.op_block(*op, w), Some(m));
            }
        }
        // Ten is self-dual on the nose at the level of weights
        let t = ev("ten(2)", 3, &f);
        assert_eq!(t.kuhn_dual().blocks, t.blocks);
    }

    #[test]
    fn natmap_examples() {
        use natmap::NatCtx;
        let f = gf2();
        let caps = Caps::default();
        // Div(2) ↪ Ten(2) at n = 2: x^{(2)} ↦ x⊗x, (xy) ↦ x⊗y + y⊗x
        let incl = nat_map("div_to_ten", &NatCtx { degrees: vec![2], expr: None }, 2, &f, &caps).unwrap();
        assert!(incl.certified);
        // canonical div basis order: (0,2), (1,1), (2,0); ten: [22],[12,21],[11]
        assert_eq!(incl.matrix.col(1), vec![0, 1, 1, 0]);
        assert_eq!(incl.matrix.col(2), vec![0, 0, 0, 1]);
        // Ten(2) ↠ Sym(2) ∘ (Div(2) ↪ Ten(2)) kills the (1,1) generator in char 2
        let proj = nat_map("ten_to_sym", &NatCtx { degrees: vec![2], expr: None }, 2, &f, &caps).unwrap();
        assert!(proj.certified);
        let comp = proj.matrix.mul(&incl.matrix);
        assert_eq!(comp.rank(), 2);
        // skew sum at s = 1 is the identity
        let sum1 = nat_map(
            "skew_sum",
            &NatCtx { degrees: vec![1, 1], expr: Some(Expr::Sym(2)) },
            2,
            &f,
            &caps,
        )
        .unwrap();
        assert!(sum1.certified);
        assert_eq!(sum1.matrix, Mat::identity(&f, 3));
        // frobenius power inclusion is a certified module map
        let frob = nat_map("frob_incl", &NatCtx { degrees: vec![1], expr: None }, 2, &f, &caps).unwrap();
        assert!(frob.certified);
        assert_eq!(frob.matrix.rank(), 2);
        let frob_full = nat_map("frob_incl_full", &NatCtx { degrees: vec![2], expr: None }, 2, &f, &caps).unwrap();
        assert!(frob_full.certified);
        // unknown names are rejected
        assert_eq!(
            nat_map("no_such_map", &NatCtx::default(), 2, &f, &caps).unwrap_err().code(),
            "E_UNKNOWN_NAME"
        );
    }

    #[test]
    fn natmap_mult_comult_certified() {
        let f3 = FqCtx::new(3, 1).unwrap();
        let caps = Caps::default();
        for name in ["sym_mult", "sym_comult", "div_mult", "div_comult"] {
            let nm = nat_map(
                name,
                &natmap::NatCtx { degrees: vec![2, 1], expr: None },
                2,
                &f3,
                &caps,
            )
            .unwrap();
            assert!(nm.certified, "{name} not a module map over GF(3)");
        }
        // skew maps over GF(4) with a = r = 2 twists
        let f4 = FqCtx::new(2, 2).unwrap();
        for name in ["skew_sum", "skew_diag"] {
            let nm = nat_map(
                name,
                &natmap::NatCtx { degrees: vec![2, 2], expr: Some(Expr::Id) },
                2,
                &f4,
                &caps,
            )
            .unwrap();
            assert!(nm.certified, "{name} not F_q-natural over GF(4)");
        }
        let iso = nat_map(
            "skew_iso",
            &natmap::NatCtx { degrees: vec![2], expr: Some(Expr::Sym(2)) },
            2,
            &f4,
            &caps,
        )
        .unwrap();
        assert!(iso.certified);
    }

    #[test]
    fn eval_memo_returns_same_arc() {
        let f = gf2();
        let a = ev("div(2)*div(2)", 3, &f);
        let b = ev("div(2) * div(2)", 3, &f);
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn degree_cap_enforced() {
        let f = gf2();
        let e = Expr::parse("twist(id,4)").unwrap();
        let err = eval(&e, 2, &f, &Caps::default()).unwrap_err();
        assert_eq!(err.code(), "E_DEGREE_CAP");
    }

    #[test]
    fn contravariant_not_materialized() {
        let f = gf2();
        let e = Expr::parse("cdual(div(2))").unwrap();
        let err = eval(&e, 2, &f, &Caps::default()).unwrap_err();
        assert_eq!(err.code(), "E_CONTRAVARIANT");
    }
}
