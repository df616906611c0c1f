#![no_main]

use libfuzzer_sys::fuzz_target;
use signorini_core::exact::ExactSolution;

fuzz_target!(|data: &[u8]| {
    if let Ok(name) = std::str::from_utf8(data) {
        for dim in [2, 3] {
            if let Ok(sol) = ExactSolution::parse(name, dim) {
                let _ = sol.evaluate(&vec![0.25; dim]);
                let _ = ExactSolution::parse(&sol.to_string(), dim);
            }
        }
    }
});
