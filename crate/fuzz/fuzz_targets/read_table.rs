#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = bbm_core::io::read_table(data) {
        // whatever parses must survive a write/read cycle
        let mut buf = Vec::new();
        bbm_core::io::write_table(&t, &mut buf).unwrap();
        let back = bbm_core::io::read_table(buf.as_slice()).unwrap();
        assert_eq!(back.header, t.header);
        assert_eq!(back.rows.len(), t.rows.len());
    }
});
