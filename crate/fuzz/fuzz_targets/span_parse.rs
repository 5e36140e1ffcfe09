#![no_main]

use libfuzzer_sys::fuzz_target;
use sqzsim_core::table::Span;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(span) = text.parse::<Span>() {
        let values = span.values();
        assert_eq!(values.len(), span.points);
        assert_eq!(values[0], span.start);
        assert_eq!(values[values.len() - 1], span.stop);
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
