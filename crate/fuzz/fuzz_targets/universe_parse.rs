#![no_main]

use libfuzzer_sys::fuzz_target;

use fibra_core::universe::Universe;

// Parsing must never panic, and anything that parses must emit a stable
// canonical form: emit, reload, and emit again byte-identically.
fuzz_target!(|data: &[u8]| {
    if let Ok(universe) = Universe::from_json_slice(data) {
        let canonical = universe.to_canonical_json();
        let reloaded = Universe::from_json_str(&canonical)
            .expect("canonical emission must reload");
        assert_eq!(reloaded.to_canonical_json(), canonical);
        assert_eq!(reloaded.doc(), universe.doc());
    }
});
