#![no_main]

use libfuzzer_sys::fuzz_target;
use limitscout::geometry::Center;
use limitscout::paths::{check_descent, point_at};
use limitscout::witness::read_path_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(path) = read_path_spec(text) else { return };
    let dim = path.dim().unwrap_or(2);
    let Ok(center) = Center::origin(dim) else { return };
    let _ = check_descent(&path, &center);
    for r in [1.0, 0.5, 1e-3, 1e-9] {
        if let Ok(p) = point_at(&path, &center, r) {
            assert_eq!(p.len(), dim);
        }
    }
});
