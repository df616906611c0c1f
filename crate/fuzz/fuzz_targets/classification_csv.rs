#![no_main]

use libfuzzer_sys::fuzz_target;
use signorini_core::freeboundary::{classifications_from_csv, classifications_to_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = classifications_from_csv(text) {
            if let Some(dim) = rows.first().map(|r| r.point.len()) {
                if rows.iter().all(|r| r.point.len() == dim) {
                    let _ = classifications_to_csv(dim, &rows);
                }
            }
        }
    }
});
