//! Coefficient table decoder: no panics, and a decoded table written back
//! out decodes to the same modes.

#![no_main]

use std::fmt::Write as _;

use bloch_cli::potential::decode_coefficients;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(modes) = decode_coefficients(text) else {
        return;
    };
    let mut table = String::new();
    for (n, c) in &modes {
        let _ = writeln!(table, "{} {} {:?} {:?}", n[0], n[1], c.re, c.im);
    }
    assert_eq!(decode_coefficients(&table).expect("re-encoded table decodes"), modes);
});
