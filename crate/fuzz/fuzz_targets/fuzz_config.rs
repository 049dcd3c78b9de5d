//! Config parser: arbitrary text must be rejected cleanly, and anything
//! accepted must survive a serialize/parse round trip unchanged.

#![no_main]

use bloch_cli::config::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = parse_config(text) else {
        return;
    };
    let _ = config.grid_size();
    let _ = config.build_lattice();
    let again = toml::to_string(&config).expect("accepted config serializes");
    let reparsed = parse_config(&again).expect("serialized config parses");
    assert_eq!(config, reparsed);
});
