#![no_main]

use libfuzzer_sys::fuzz_target;
use limitscout::witness::{read_polyline_report, write_polyline_report};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(report) = read_polyline_report(text) else { return };
    let written = write_polyline_report(&report).unwrap();
    assert_eq!(read_polyline_report(&written).unwrap(), report);
});
