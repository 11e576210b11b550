use spfh::generic::{generic_ext, twist_map};
use spfh::polyfun::{Caps, Expr};
use std::time::Instant;

fn main() {
    let f = spfh::field::FqCtx::new(2, 1).unwrap();
    let caps = Caps::default();
    let t0 = Instant::now();
    let rep = twist_map(&Expr::Id, &Expr::Id, 1, 3, &f, &caps).unwrap();
    println!("criterion2 twist_map r=1 deg 0..3: {:?} [{:?}]",
        rep.degrees.iter().map(|d| (d.source_dim, d.target_dim, d.rank, d.injective, d.iso)).collect::<Vec<_>>(),
        t0.elapsed());
    let t1 = Instant::now();
    for g in ["sym(2)", "div(2)"] {
        let e = spfh::homalg::ext(
            &Expr::parse("twist(id,2)").unwrap(),
            &Expr::parse(&format!("twist({g},1)")).unwrap(),
            3, Some(4), &f, spfh::homalg::CoverPolicy::LexDesc, &caps).unwrap();
        println!("criterion3 Ext(Id^(2), {g}^(1)) 0..3 = {:?} [{:?}]", e.dims, t1.elapsed());
    }
    let t2 = Instant::now();
    match generic_ext(&Expr::Id, &Expr::Id, 3, &f, &caps) {
        Ok((dims, cert)) => println!("criterion7 gen side: {:?} cert r={} status {:?} [{:?}]", dims.dims, cert.r, cert.status, t2.elapsed()),
        Err(e) => println!("gen ERR: {e} [{:?}]", t2.elapsed()),
    }
}
