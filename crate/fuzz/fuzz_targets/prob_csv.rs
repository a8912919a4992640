#![no_main]

use libfuzzer_sys::fuzz_target;
use tilefetch::ProbVector;

fuzz_target!(|data: &[u8]| {
    let _ = ProbVector::from_csv_reader(data);
});
