#![no_main]

use libfuzzer_sys::fuzz_target;
use limitscout::witness::{read_samples_csv, write_samples_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(samples) = read_samples_csv(text) else { return };
    if samples.is_empty() {
        return;
    }
    let written = write_samples_csv(&samples).expect("parsed samples must serialize");
    assert_eq!(read_samples_csv(&written).unwrap(), samples);
});
