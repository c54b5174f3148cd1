#![no_main]

use libfuzzer_sys::fuzz_target;
use pipeflow::scenario::parse_scenario;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(sc) = parse_scenario(text) {
            let _ = sc.steps();
            let _ = sc.settle_band();
            let again = parse_scenario(&sc.to_json()).expect("serialised scenario reparses");
            assert_eq!(again, sc);
        }
    }
});
