#![no_main]

use hcct::Fraction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(value) = text.parse::<Fraction>() else { return };
    assert!(value <= Fraction::ONE);
    let again: Fraction = value.to_string().parse().expect("display form must parse");
    assert_eq!(again, value);
});
