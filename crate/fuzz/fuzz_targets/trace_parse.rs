#![no_main]

use libfuzzer_sys::fuzz_target;
use sqzsim_core::control::ReadoutMode;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(modes) = ReadoutMode::parse_list(text) {
        assert!(!modes.is_empty() && modes.len() <= 4);
        let joined: Vec<String> = modes.iter().map(ToString::to_string).collect();
        assert_eq!(ReadoutMode::parse_list(&joined.join(",")).unwrap(), modes);
    }
});
