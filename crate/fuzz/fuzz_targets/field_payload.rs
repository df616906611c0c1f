#![no_main]

use libfuzzer_sys::fuzz_target;
use signorini_core::io::decode_field;

// first line is the header, the rest is the payload
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == b'\n').unwrap_or(data.len());
    let (head, rest) = data.split_at(split);
    let payload = rest.get(1..).unwrap_or(&[]);
    if let Ok(header) = std::str::from_utf8(head) {
        let _ = decode_field(header, payload);
    }
});
