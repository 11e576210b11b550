fn main() { println!("spfh"); }
