#![no_main]

use bbm_core::io::{parse_domain, parse_dt, parse_list, parse_number, parse_positive, parse_waves};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_number(s) {
        assert!(v.is_finite());
    }
    let _ = parse_positive(s);
    if let Ok(dt) = parse_dt(s) {
        assert!(dt.resolve(1.0) > 0.0);
    }
    if let Ok((a, b)) = parse_domain(s) {
        assert!(a < b);
    }
    if let Ok(l) = parse_list(s) {
        assert!(l.iter().all(|v| *v > 0.0));
    }
    let _ = parse_waves(s);
});
