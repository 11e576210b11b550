use spfh::compare::{gen_comp_map, strong_phi};
use spfh::polyfun::{Caps, Expr};
use std::time::Instant;

fn main() {
    let caps = Caps::default();
    let gf2 = spfh::field::FqCtx::new(2, 1).unwrap();
    let gf4 = spfh::field::FqCtx::new(2, 2).unwrap();
    let pool = ["id", "sym(2)", "ext(2)", "div(2)"];
    let t0 = Instant::now();
    for f in pool {
        for g in pool {
            let rep = gen_comp_map(&Expr::parse(f).unwrap(), &Expr::parse(g).unwrap(), &gf2, 2, 3, 0, true, &caps).unwrap();
            let row = &rep.rows[0];
            println!("c5 ({f},{g}): src {} tgt {} rank {} {} stable={:?}", row.source_dim, row.target_dim, row.rank, row.verdict, row.stable);
            assert!(row.matches_theorem);
        }
    }
    println!("criterion5 sweep done [{:?}]", t0.elapsed());
    let t1 = Instant::now();
    let pool6 = ["sym(2)", "div(2)", "ext(2)"];
    for (i, f) in pool6.iter().enumerate() {
        for g in pool6 {
            let stab = i == 0 && g == "sym(2)";
            let rep = strong_phi(&Expr::parse(f).unwrap(), &Expr::parse(g).unwrap(), &gf4, 2 + usize::from(stab), 0, stab, &caps).unwrap();
            let row = &rep.rows[0];
            println!("c6 ({f},{g}): src {} tgt {} {} stable={:?}", row.source_dim, row.target_dim, row.verdict, row.stable);
            assert!(row.matches_theorem, "q=4 strong map must be iso");
        }
    }
    println!("criterion6 sweep done [{:?}]", t1.elapsed());
    let t2 = Instant::now();
    let rep = gen_comp_map(&Expr::Id, &Expr::Id, &gf2, 2, 4, 3, true, &caps).unwrap();
    for row in &rep.rows {
        println!("c7 deg {}: src {} tgt {} rank {} {} stable={:?}", row.degree, row.source_dim, row.target_dim, row.rank, row.verdict, row.stable);
    }
    println!("criterion7 gen_comp done [{:?}]", t2.elapsed());
}
