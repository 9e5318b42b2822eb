//! Drive the command-line front end in-process and validate its JSON report.

use condsym::cli::{run, validate};

fn main() {
    let out = run(["verify", "--entry", "thm2.iv", "--params", "lam=1, lam0=0, lam2=-1", "--json"]);
    print!("{}", out.stdout);
    let report: serde_json::Value = serde_json::from_str(&out.stdout).expect("report is JSON");
    match validate(&report) {
        Ok(()) => println!("valid report-v1, exit code {}", out.code),
        Err(errs) => println!("invalid: {errs:?}"),
    }
}
