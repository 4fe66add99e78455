use std::path::PathBuf;
use std::process::Command;

#[test]
fn generated_header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/multimode_opo.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "mmo_scenario_default",
        "mmo_spectrum_values",
        "mmo_last_error_message",
        "MMO_STATUS_PANIC",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let src = tempfile::Builder::new().suffix(".c").tempfile().unwrap();
    std::fs::write(
        src.path(),
        "#include \"multimode_opo.h\"\n\
         int main(void) {\n\
           MmoScenario *sc = NULL;\n\
           MmoCavityFigures f;\n\
           if (mmo_scenario_default(&sc) != MMO_STATUS_OK) return 1;\n\
           if (mmo_cavity_figures(sc, &f) != MMO_STATUS_OK) return 1;\n\
           mmo_scenario_free(sc);\n\
           return f.finesse > 0.0 ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(src.path())
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
}
