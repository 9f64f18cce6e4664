#![no_main]

use libfuzzer_sys::fuzz_target;
use limitscout::witness::{read_interval_nest, write_interval_nest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(nest) = read_interval_nest(text) else { return };
    for (k, iv) in nest.intervals.iter().enumerate() {
        assert_eq!(iv.depth as usize, k + 1);
        assert!(iv.contains(nest.phi0));
    }
    let written = write_interval_nest(&nest).unwrap();
    assert_eq!(read_interval_nest(&written).unwrap(), nest);
});
