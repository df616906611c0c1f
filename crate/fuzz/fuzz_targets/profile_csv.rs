#![no_main]

use libfuzzer_sys::fuzz_target;
use signorini_core::functionals::FrequencyProfile;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = FrequencyProfile::from_csv(text) {
            let _ = p.to_csv();
        }
    }
});
