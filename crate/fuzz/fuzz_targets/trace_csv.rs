#![no_main]

use libfuzzer_sys::fuzz_target;
use tilefetch::trace::{parse_trace, Category, TraceMeta};

fuzz_target!(|data: &[u8]| {
    let _ = parse_trace(data, TraceMeta::new("fuzz", "fuzz", Category::Misc));
});
