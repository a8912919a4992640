#![no_main]

use libfuzzer_sys::fuzz_target;
use tilefetch::trace::TraceMeta;

fuzz_target!(|data: &[u8]| {
    let _ = TraceMeta::from_json(data);
});
