//! Compiles and runs a small C program against the generated header and
//! the static library.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    // tests/../deps/<test binary> -> profile dir holding the static library
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libczspace_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "czspace.h"

int main(void) {
    CzWeight *w = NULL;
    if (cz_weight_parse("t^0.7 * L1^-1", &w) != CZ_STATUS_OK) return 1;
    double lo = 0, hi = 0;
    if (cz_weight_indices(w, &lo, &hi) != CZ_STATUS_OK || lo != 0.7) return 2;
    if (cz_weight_parse("bogus", &w) != CZ_STATUS_PARSE || cz_last_error() == NULL) return 3;
    double v[257];
    for (int i = 0; i < 257; i++) v[i] = 2.0 * i / 256.0;
    CzSignal *s = NULL;
    if (cz_signal_new_1d(0.0, 1.0 / 256.0, v, 257, &s) != CZ_STATUS_OK) return 4;
    double x = 0.5, c[2], res;
    if (cz_best_poly(s, &x, 1, 0.25, INFINITY, 1, c, 2, &res) != CZ_STATUS_OK) return 5;
    if (fabs(c[0] - 1.0) > 1e-9 || fabs(c[1] - 2.0) > 1e-9) return 6;
    cz_signal_free(s);
    cz_weight_free(w);
    printf("ok %s\n", cz_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
