use std::path::Path;
use std::process::Command;

const PROBE: &str = r#"
#include "colombeau.h"
#include <stdio.h>

int main(void) {
    ColombeauEnv *env = NULL;
    ColombeauEstimate est;
    if (colombeau_env_new(NULL, &env) != COLOMBEAU_STATUS_OK) {
        fprintf(stderr, "%s\n", colombeau_last_error());
        return 1;
    }
    if (colombeau_valuation(env, "eps^2", &est) != COLOMBEAU_STATUS_OK || est.kind != COLOMBEAU_DECAY_KIND_ORDER) {
        return 1;
    }
    char *ids = NULL;
    colombeau_check_ids(&ids);
    colombeau_string_free(ids);
    colombeau_env_free(env);
    return 0;
}
"#;

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("colombeau.h").exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, PROBE).unwrap();
    let status = match Command::new("cc").arg("-std=c99").arg("-Wall").arg("-Werror").arg("-fsyntax-only").arg("-I").arg(&include).arg(&src).status() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("skipping: no C compiler ({e})");
            return;
        }
    };
    assert!(status.success());
}
