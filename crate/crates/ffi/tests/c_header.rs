//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "async_heat.h"

int main(void) {
    double u[100], out[100];
    HeatBoundary bc = { HEAT_BOUNDARY_KIND_DIRICHLET, 1.0, 0.0 };
    HeatParams params = { 0.5, 0.01, 0.1, 0 };
    HeatDelay delay = { 5, HEAT_DELAY_LAW_UNIFORM, 0, 0.5, 7 };
    HeatSimulation *sim = NULL;
    char msg[128];

    if (heat_cosine_init(100, u, 100) != HEAT_STATUS_OK) return 1;
    if (heat_impose_boundary(u, 100, bc) != HEAT_STATUS_OK) return 2;
    if (heat_simulation_new(u, 100, params, bc, 1, delay, &sim) != HEAT_STATUS_OK) return 3;
    if (heat_simulation_step(sim, 20000) != HEAT_STATUS_OK) return 4;
    if (heat_simulation_state(sim, out, 100) != HEAT_STATUS_OK) return 5;
    heat_simulation_free(sim);
    for (int i = 0; i < 100; i++) {
        if (fabs(out[i] - (1.0 - i / 99.0)) > 1e-2) return 6;
    }
    if (heat_simulation_state(NULL, out, 100) != HEAT_STATUS_NULL_POINTER) return 7;
    if (heat_last_error(msg, sizeof msg) == 0) return 8;
    printf("ok %s\n", msg);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libasync_heat_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());

    let work = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("c_header");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    let bin = work.join("main");
    std::fs::write(&src, PROGRAM).unwrap();

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap_or_else(|e| panic!("could not run {cc}: {e}"));
    assert!(status.success(), "C compilation failed");

    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {}", out.status);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
