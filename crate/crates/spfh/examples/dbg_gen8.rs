use spfh::generic::generic_ext;
use spfh::polyfun::{Caps, Expr};
use std::time::Instant;

fn main() {
    let f = spfh::field::FqCtx::new(2, 1).unwrap();
    let caps = Caps::default();
    let t = Instant::now();
    match generic_ext(&Expr::parse("twist(id,1)").unwrap(), &Expr::parse("twist(id,1)").unwrap(), 3, &f, &caps) {
        Ok((dims, cert)) => println!("Ext_gen(I1,I1) 0..3 = {:?} cert r={} bound={} {:?} [{:?}]",
            dims.dims, cert.r, cert.bound, cert.status, t.elapsed()),
        Err(e) => println!("ERR {e} [{:?}]", t.elapsed()),
    }
}
