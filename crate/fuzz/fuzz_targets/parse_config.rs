#![no_main]

use libfuzzer_sys::fuzz_target;

// Config parsing and validation must reject any input gracefully: no panics,
// no unwraps on attacker-controlled JSON.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = geodesic_energy::config::parse_config(text) {
            let _ = config.build();
        }
    }
});
