#![no_main]

use libfuzzer_sys::fuzz_target;
use steklov::expr::Expr;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(e) = Expr::parse(src) {
        // printing and reparsing must give the same tree
        let again = Expr::parse(&e.to_string()).expect("display output reparses");
        assert_eq!(again, e);
        let _ = e.eval(&[0.5, 1.25]);
    }
});
