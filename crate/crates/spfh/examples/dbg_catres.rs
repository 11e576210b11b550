use spfh::fqcat::{cat_resolve, restrict_functor, TruncCat};
use spfh::polyfun::{Caps, Expr};
use std::time::Instant;

fn main() {
    let f = spfh::field::FqCtx::new(2, 1).unwrap();
    let caps = Caps::default();
    let nmax = 4usize;
    let cat = TruncCat::new(&f, nmax).unwrap();
    let id = restrict_functor(&cat, &Expr::Id, &caps).unwrap();
    let t0 = Instant::now();
    match cat_resolve(&id, 2, &caps) {
        Ok(res) => {
            for (i, s) in res.steps.iter().enumerate() {
                println!("P_{i}: js = {:?}, dims = {:?} [{:?}]", s.js,
                    (0..=nmax).map(|m| s.proj.dim(m)).collect::<Vec<_>>(), t0.elapsed());
            }
        }
        Err(e) => println!("ERR {e}"),
    }
}
