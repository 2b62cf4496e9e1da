#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let _ = geodesic_energy::config::parse_n_list(data);
});
