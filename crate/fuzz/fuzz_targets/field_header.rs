#![no_main]

use libfuzzer_sys::fuzz_target;
use signorini_core::io::parse_header;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(h) = parse_header(text) {
            let _ = h.grid();
        }
    }
});
