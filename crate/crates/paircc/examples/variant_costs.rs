//! Static sub-operation counts of every cataloged extension formula.

use paircc::field::{variants, OpKind};

fn main() -> anyhow::Result<()> {
    println!("{:<4} {:<4} {:<12} {:>3} {:>3} {:>3} {:>3}", "ext", "op", "variant", "M", "S", "A", "B");
    for ext in [2, 3] {
        for kind in [OpKind::Mul, OpKind::Sqr] {
            for &v in variants::catalog(ext, kind) {
                let c = variants::cost(ext, kind, v)?;
                println!("{ext:<4} {kind:<4} {:<12} {:>3} {:>3} {:>3} {:>3}", v.name(), c.m, c.s, c.a, c.b);
            }
        }
    }
    Ok(())
}
