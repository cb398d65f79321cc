#![no_main]

use energylab::parse;
use energylab::radial::{RadialMeasure, RadialProfile};
use energylab::weights::Weight;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(value) = parse::parse_spec(text) {
        // Formatting a parsed spec must parse back to the same value.
        let again = parse::parse_spec(&parse::format_spec(&value)).expect("formatted spec parses");
        assert_eq!(again, value);
    }
    let _ = parse::decode::<RadialProfile>(text);
    let _ = parse::decode::<Weight>(text);
    let _ = parse::parse_measure(text, 2);
    let _ = parse::decode::<RadialMeasure>(text);
});
