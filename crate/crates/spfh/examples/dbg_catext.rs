use spfh::fqcat::{cat_ext, restrict_functor, TruncCat};
use spfh::polyfun::{Caps, Expr};
use std::time::Instant;

fn main() {
    let f = spfh::field::FqCtx::new(2, 1).unwrap();
    let caps = Caps::default();
    for nmax in [3usize, 4] {
        let t0 = Instant::now();
        let cat = TruncCat::new(&f, nmax).unwrap();
        let id = restrict_functor(&cat, &Expr::Id, &caps).unwrap();
        match cat_ext(&id, &id, 3, &caps) {
            Ok(e) => println!("N={nmax}: dims {:?} in {:?}", e.dims, t0.elapsed()),
            Err(e) => println!("N={nmax}: ERR {e} after {:?}", t0.elapsed()),
        }
    }
}
