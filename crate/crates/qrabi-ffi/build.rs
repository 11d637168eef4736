//! Regenerates include/qrabi.h from the public extern "C" surface.

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("manifest dir"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml parses");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation succeeds");

    let out_dir = PathBuf::from(env::var("OUT_DIR").expect("out dir"));
    bindings.write_to_file(out_dir.join("qrabi.h"));

    // Keep the committed header current; a read-only checkout is not an
    // error, the OUT_DIR copy is authoritative for such builds.
    let committed = crate_dir.join("include").join("qrabi.h");
    let fresh = std::fs::read(out_dir.join("qrabi.h")).expect("generated header readable");
    if std::fs::read(&committed).ok().as_deref() != Some(fresh.as_slice()) {
        let _ = std::fs::create_dir_all(committed.parent().expect("include dir"));
        if std::fs::write(&committed, &fresh).is_err() {
            println!(
                "cargo:warning=could not refresh {}; see OUT_DIR for the generated header",
                committed.display()
            );
        }
    }
}
