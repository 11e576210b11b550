use spfh::homalg::{resolve, CoverPolicy};
use spfh::polyfun::{eval, Caps, Expr};
use std::time::Instant;

fn main() {
    let f = spfh::field::FqCtx::new(2, 1).unwrap();
    let caps = Caps::default();
    let t0 = Instant::now();
    let m = eval(&Expr::parse("twist(id,3)").unwrap(), 8, &f, &caps).unwrap();
    println!("eval I^(3)(k^8): dim {} [{:?}]", m.dim(), t0.elapsed());
    let t1 = Instant::now();
    let lam = vec![8u16, 0, 0, 0, 0, 0, 0, 0];
    let g8 = eval(&Expr::gamma_lambda(&lam), 8, &f, &caps).unwrap();
    println!("eval Γ^(8)(k^8): dim {} blocks {} [{:?}]", g8.dim(), g8.blocks.len(), t1.elapsed());
    let t2 = Instant::now();
    let lam2 = vec![7u16, 1, 0, 0, 0, 0, 0, 0];
    let g71 = eval(&Expr::gamma_lambda(&lam2), 8, &f, &caps).unwrap();
    println!("eval Γ^(7,1)(k^8): dim {} blocks {} [{:?}]", g71.dim(), g71.blocks.len(), t2.elapsed());
    let t3 = Instant::now();
    let res = resolve(&m, 3, CoverPolicy::LexDesc, &caps);
    match res {
        Ok(r) => {
            for (i, s) in r.steps.iter().enumerate() {
                println!("P_{i}: {} summands dim {} [{:?}]", s.proj.lambdas.len(), s.proj.dim(), t3.elapsed());
            }
        }
        Err(e) => println!("ERR {e}"),
    }
}
