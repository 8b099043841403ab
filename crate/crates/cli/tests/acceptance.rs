//! CLI determinism criterion: identical CSV bytes across repeated runs and
//! across worker counts for the reference configuration. Prints one line on
//! stderr like the library suite.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

const REFERENCE: [&str; 10] = [
    "--mass", "1", "--lambda", "1", "--gamma", "0.25", "--rho", "0.5", "--beta", "1",
];

fn run(args: &[&str], workers: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_coupled-bec"))
        .args(args)
        .args(REFERENCE)
        .args(["--workers", workers, "--format", "csv"])
        .output()
        .expect("spawn coupled-bec");
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn determinism() -> Result<String, String> {
    let commands: [&[&str]; 7] = [
        &["phase-diagram"],
        &[
            "phase-diagram",
            "--sweep",
            "rho",
            "--from",
            "0.05",
            "--to",
            "1",
            "--steps",
            "32",
        ],
        &["occupations"],
        &["fluctuations"],
        &["dynamics"],
        &["converge"],
        &["converge", "--quantity", "var-n-tot"],
    ];
    let mut bytes = 0;
    for args in commands {
        let first = run(args, "1");
        let again = run(args, "1");
        let wide = run(args, "4");
        if first != again {
            return Err(format!("{args:?}: two runs with 1 worker differ"));
        }
        if first != wide {
            return Err(format!("{args:?}: 1 and 4 workers differ"));
        }
        bytes += first.len();
    }
    Ok(format!(
        "{} commands, {bytes} bytes compared",
        commands.len()
    ))
}

#[test]
fn acceptance_suite() {
    let start = Instant::now();
    let outcome = determinism();
    let secs = start.elapsed().as_secs_f64();
    let line = match &outcome {
        Ok(detail) if secs < 60.0 => {
            format!("criterion 9 CLI determinism: PASS ({secs:.2}s) {detail}")
        }
        Ok(detail) => {
            format!("criterion 9 CLI determinism: FAIL ({secs:.2}s, over 1 min) {detail}")
        }
        Err(reason) => format!("criterion 9 CLI determinism: FAIL ({secs:.2}s) {reason}"),
    };
    writeln!(std::io::stderr(), "{line}").unwrap();
    assert!(line.contains("PASS"), "{line}");
}
