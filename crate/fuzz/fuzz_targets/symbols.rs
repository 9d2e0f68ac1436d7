#![no_main]

use hcct::SymbolTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = SymbolTable::read(data) else { return };
    let mut text = Vec::new();
    table.write(&mut text).unwrap();
    let again = SymbolTable::read(&text[..]).expect("written table must parse");
    assert_eq!(again.len(), table.len());
});
