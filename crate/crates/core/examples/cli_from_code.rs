//! Drives the command-line entry points from code: learn a hierarchy from a
//! CSV, run a bundled config, rerun it from its manifest, and merge the traces.
//!
//! cargo run --release --example cli_from_code

use cofine::cli::run;

fn main() {
    let root = env!("CARGO_MANIFEST_DIR");
    let out = std::env::temp_dir().join("cofine-cli-example");
    let out = out.to_str().unwrap();

    let code =
        run(["cofine", "learn-u", &format!("{root}/configs/toy_profiles.csv"), "--k", "1", "--out", &format!("{out}/hierarchy")]);
    println!("learn-u exited {code}");

    let code = run([
        "cofine",
        "simulate",
        &format!("{root}/configs/k_sweep.toml"),
        "--trials",
        "2",
        "--horizon",
        "300",
        "--out",
        &format!("{out}/first"),
    ]);
    println!("simulate exited {code}");
    let code = run(["cofine", "simulate", &format!("{out}/first/manifest.toml"), "--out", &format!("{out}/again")]);
    println!("rerun exited {code}");

    let a = std::fs::read(format!("{out}/first/summary.csv")).unwrap();
    let b = std::fs::read(format!("{out}/again/summary.csv")).unwrap();
    println!("rerun identical: {}", a == b);

    let code = run(["cofine", "report", &format!("{out}/first/traces_k_5.csv"), "--out", &format!("{out}/report")]);
    println!("report exited {code}");
}
