#![no_main]

use hcct::export::{read_json_lines, write_json_lines};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(tree) = read_json_lines(data) else { return };
    let mut text = Vec::new();
    write_json_lines(&tree, &mut text).unwrap();
    let again = read_json_lines(&text[..]).expect("written dump must parse");
    let mut second = Vec::new();
    write_json_lines(&again, &mut second).unwrap();
    assert_eq!(text, second);
});
