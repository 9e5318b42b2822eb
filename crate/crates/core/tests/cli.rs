use condsym::cli::{run, validate, Output};
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    run(args.iter().copied())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut v: Vec<&str> = args.to_vec();
    v.push("--json");
    let out = cli(&v);
    let report: Value = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout));
    if let Err(errs) = validate(&report) {
        panic!("{args:?}: {errs:?}");
    }
    assert_eq!(report["exit_code"], out.code.to_string());
    (out.code, report)
}

#[test]
fn verify_entry() {
    let (code, r) = json(&["verify", "--entry", "thm1.i", "--params", "m=1,lam=1,lam1=1,lam2=1,lam3=0"]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "ConditionalSymmetry");
    assert!(r["assumptions"].as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn constraint_violation_exits_2() {
    let out = cli(&["verify", "--entry", "thm1.i", "--params", "m=1,lam=1,lam1=1,lam2=0,lam3=0"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("lam2"), "{}", out.stderr);
    let (_, r) = json(&["verify", "--entry", "thm1.i", "--params", "m=1,lam=1,lam1=1,lam2=0,lam3=0"]);
    assert_eq!(r["error"]["kind"], "ConstraintViolation");
}

#[test]
fn heat_equation_time_translation() {
    let out = cli(&["verify", "--equation", "Vxx = Vt", "--operator", "Q = Dt"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("LieSymmetry"));
}

#[test]
fn not_a_symmetry_prints_witness() {
    let out = cli(&["verify", "--equation", "Vxx = Vt + V^2", "--operator", "Q = Dt + DV"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("witness"), "{}", out.stdout);
    let (_, r) = json(&["verify", "--equation", "Vxx = Vt + V^2", "--operator", "Q = Dt + DV"]);
    assert_eq!(r["status"], "NotASymmetry");
    assert!(r["payload"]["operators"][0]["witness"].is_string());
}

#[test]
fn parse_errors_exit_2() {
    assert_eq!(cli(&["verify", "--equation", "Vxx = Vt +", "--operator", "Q = Dt"]).code, 2);
    assert_eq!(cli(&["verify", "--equation", "Vxx = Vt"]).code, 2);
    assert_eq!(cli(&["detsys", "--family", "bogus"]).code, 2);
    assert_eq!(cli(&["frobnicate"]).code, 2);
    assert_eq!(cli(&["--help"]).code, 0);
}

#[test]
fn detsys_power_plain() {
    let (code, r) = json(&["detsys", "--family", "power-plain"]);
    assert_eq!(code, 0);
    let eqs = r["payload"]["equations"].as_array().unwrap();
    assert_eq!(eqs.len(), 4);
    assert_eq!(eqs[0], "xi_VV = 0");
    let text = cli(&["detsys", "--family", "exp-convective"]).stdout;
    assert!(text.contains("exp(V)"), "{text}");
}

#[test]
fn numcheck_system() {
    let (code, r) = json(&["numcheck", "--system", "ode10", "--candidate", "h=6*x^(-2)", "--params", "lam=0,lam2=0"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["status"], "Pass");
    let (code, _) = json(&["numcheck", "--system", "sys9", "--candidate", "f=0;g=0;h=1", "--params", "lam1=0,lam2=2"]);
    assert_eq!(code, 0);
}

#[test]
fn numcheck_gate_failure_names_metric() {
    let out = cli(&["numcheck", "--system", "ode10", "--candidate", "h=5*x^(-2)", "--params", "lam=0,lam2=0"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("FAILED: extrapolated residual"), "{}", out.stdout);
}

#[test]
fn numcheck_unknown_system() {
    let (code, r) = json(&["numcheck", "--system", "sys99", "--candidate", "h=1"]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["kind"], "UnknownSystem");
}

#[test]
fn numcheck_entry_small_grid() {
    let (code, r) = json(&[
        "numcheck",
        "--entry",
        "thm2.iv",
        "--params",
        "lam=1,lam0=0,lam2=-1",
        "--profile",
        "1,0.1",
        "--grid",
        "61",
        "--tol",
        "1e-3",
    ]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["payload"]["levels"].as_array().unwrap().len(), 3);
}

#[test]
fn catalog_list_and_show() {
    let (code, r) = json(&["catalog", "list"]);
    assert_eq!(code, 0);
    assert!(r["payload"]["entries"].as_array().unwrap().len() >= 14);

    let (_, r) = json(&["catalog", "show", "thm2.ii"]);
    let notes = r["payload"]["notes"].as_str().unwrap();
    assert!(notes.contains("9/lam^2"), "{notes}");
    assert!(r["payload"]["provenance"].as_str().unwrap().contains("(52*)"));

    let (_, r) = json(&["catalog", "show", "app.murray"]);
    assert_eq!(r["payload"]["cross_refs"][0], "thm2.iv");

    assert_eq!(cli(&["catalog", "show", "nope"]).code, 2);
}

#[test]
fn catalog_verify_all() {
    let (code, r) = json(&["catalog", "verify-all"]);
    assert_eq!(code, 0, "{r}");
    let ids: Vec<&str> =
        r["payload"]["entries"].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn equiv_operators() {
    let (code, r) = json(&["equiv", "--operator", "Q = Dt + V*DV", "--operator", "Q = 3*Dt + 3*V*DV"]);
    assert_eq!(code, 0);
    assert_eq!(r["payload"]["multiplier"], "3");
    let (code, _) = json(&["equiv", "--operator", "Q = Dt + V*DV", "--operator", "Q = Dt + 2*V*DV"]);
    assert_eq!(code, 1);
    assert_eq!(cli(&["equiv", "--operator", "Q = Dt"]).code, 2);
}

#[test]
fn equiv_transform() {
    let (code, r) = json(&[
        "equiv",
        "--entry",
        "thm2.iv",
        "--params",
        "lam=1,lam0=0,lam2=-1",
        "--transform",
        "galilean",
        "--arg",
        "2",
    ]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["payload"]["operators"][0]["status"], "ConditionalSymmetry");
}

#[test]
fn json_is_stable_apart_from_timing() {
    let args = ["verify", "--entry", "thm2.v.quadratic", "--params", "lam=1,lam3=-2/9"];
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing");
        serde_json::to_string(&v).unwrap()
    };
    let (_, a) = json(&args);
    let (_, b) = json(&args);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn rationals_stay_exact() {
    let (_, r) = json(&[
        "equiv",
        "--entry",
        "thm2.v.quadratic",
        "--params",
        "lam=1,lam3=-2/9,lam0=1,lam1=1",
        "--transform",
        "depress-cubic",
    ]);
    assert_eq!(r["payload"]["params"]["lam3"], "-2/9");
}
