#![no_main]

use libfuzzer_sys::fuzz_target;
use limitscout::expr::{EvalResult, Expression};

// first byte picks the arity, the rest is the expression
fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else { return };
    let Ok(src) = std::str::from_utf8(rest) else { return };
    let arity = 1 + (head % 4) as usize;
    let Ok(e) = Expression::parse(src, arity) else { return };
    let printed = e.to_string();
    let back = Expression::parse(&printed, arity).expect("printed form must reparse");
    for p in [[0.0; 4], [1.0, -2.0, 0.5, 3.0], [-1e-3, 1e3, -7.0, 0.0], [1e300, -1e-300, 2.0, -2.0]] {
        let a = e.evaluate(&p[..arity]).unwrap();
        let b = back.evaluate(&p[..arity]).unwrap();
        if let EvalResult::Defined(v) = a {
            assert!(v.is_finite());
            assert_eq!(b, EvalResult::Defined(v));
        } else {
            assert_eq!(b, EvalResult::Undefined);
        }
    }
});
