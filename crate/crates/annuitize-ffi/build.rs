//! Regenerates `include/annuitize.h` from the crate's public C ABI.

use std::path::PathBuf;

fn main() {
    let dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("set by cargo"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(dir.join("cbindgen.toml")).expect("valid cbindgen.toml");
    match cbindgen::Builder::new().with_crate(&dir).with_config(config).generate() {
        Ok(bindings) => {
            bindings.write_to_file(dir.join("include/annuitize.h"));
        }
        // Keep building from the checked-in header if the source cannot be parsed.
        Err(e) => println!("cargo:warning=header not regenerated: {e}"),
    }
}
