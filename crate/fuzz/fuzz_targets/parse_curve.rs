#![no_main]

use libfuzzer_sys::fuzz_target;

// The curve dump format validates segment counts, dimensions, and finiteness;
// arbitrary bytes must never panic the parser.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = geodesic_energy::curve::PointSequence::from_json(text);
    }
});
