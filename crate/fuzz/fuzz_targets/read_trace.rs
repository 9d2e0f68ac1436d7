#![no_main]

use hcct::{read_trace, write_trace, Fraction, HcctBuilder};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(trace) = read_trace(data) else { return };
    let mut text = Vec::new();
    write_trace(&trace, &mut text).unwrap();
    let again = read_trace(&text[..]).expect("written trace must parse");
    assert_eq!(again.call_count(), trace.call_count());

    let mut builder = HcctBuilder::new(Fraction::new(1, 8).unwrap()).unwrap();
    builder.run(&trace).unwrap();
    builder.check_invariants().unwrap();
});
