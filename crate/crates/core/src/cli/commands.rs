use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use super::report::{count, expr, float, rational};
use super::{CatalogAction, CatalogArgs, Command, DetsysArgs, EquivArgs, FamilyArg, NumcheckArgs, Outcome, VerifyArgs};
use crate::catalog::{self, apply_equivalence, builtin, instantiate, CatalogEntry, Equivalence};
use crate::error::{Error, Result};
use crate::invariance::{
    equivalent_up_to_multiplier, generate_determining_system, verify, EvolutionPDE, Family, RawOperator, Status,
    SymmetryOperator, Verdict,
};
use crate::numerics::{invariant_flow_check, ode_constraint_check, FlowCheckOptions, Grid1D};
use crate::parser::{parse_bindings, parse_equation, parse_operator, parse_operator_raw, parse_params};
use crate::symexpr::render::plain;
use crate::symexpr::{normalize, substitute, Assumptions, Bindings, Equation, Expr, Param, Rational, SymbolKey};

pub(crate) fn dispatch(c: &Command) -> Result<Outcome> {
    match c {
        Command::Verify(a) => cmd_verify(a),
        Command::Detsys(a) => cmd_detsys(a),
        Command::Numcheck(a) => cmd_numcheck(a),
        Command::Catalog(a) => cmd_catalog(a),
        Command::Equiv(a) => cmd_equiv(a),
    }
}

fn bindings(text: &str) -> Result<Bindings> {
    Ok(parse_bindings(text)?.into_iter().collect())
}

fn param_bindings(params: &BTreeMap<String, Rational>) -> Result<Bindings> {
    params.iter().map(|(k, v)| Ok((SymbolKey::Param(Param::new(k)?), Expr::Const(v.clone())))).collect()
}

fn bind_pde(pde: &EvolutionPDE, b: &Bindings) -> Result<EvolutionPDE> {
    if b.is_empty() {
        return Ok(pde.clone());
    }
    EvolutionPDE::new(substitute(&pde.f0, b)?, substitute(&pde.f1, b)?, substitute(&pde.f2, b)?)
}

fn bind_op(op: &SymmetryOperator, b: &Bindings) -> Result<SymmetryOperator> {
    if b.is_empty() {
        return Ok(op.clone());
    }
    SymmetryOperator::with_dep(substitute(&op.xi, b)?, substitute(&op.eta, b)?, op.dep)
}

fn eq_text(e: &Equation) -> String {
    format!("{} = {}", plain(&e.lhs), plain(&e.rhs))
}

/// `Vxx = F0*Vt + F1*Vx + F2` with vanishing terms dropped.
fn pde_text(pde: &EvolutionPDE) -> String {
    let tidy = |e: &Expr| normalize(e).unwrap_or_else(|_| e.clone());
    let mut rhs = String::new();
    for (coeff, d) in [(&pde.f0, Some("Vt")), (&pde.f1, Some("Vx")), (&pde.f2, None)] {
        let c = tidy(coeff);
        let piece = match d {
            Some(d) => term(&c, d),
            None if c.is_zero() => String::new(),
            None => match plain(&c).strip_prefix('-') {
                Some(rest) => format!(" - {rest}"),
                _ => format!(" + {}", plain(&c)),
            },
        };
        rhs.push_str(&piece);
    }
    let rhs = rhs.strip_prefix(" + ").map(str::to_string).unwrap_or_else(|| match rhs.strip_prefix(" - ") {
        Some(r) => format!("-{r}"),
        None if rhs.is_empty() => "0".into(),
        None => rhs,
    });
    format!("Vxx = {rhs}")
}

fn term(coeff: &Expr, d: &str) -> String {
    if coeff.is_zero() {
        return String::new();
    }
    if let Expr::Sum(_) = coeff {
        return format!(" + ({})*{d}", plain(coeff));
    }
    let text = plain(coeff);
    let (sign, mag) = match text.strip_prefix('-') {
        Some(rest) => (" - ", rest.to_string()),
        None => (" + ", text),
    };
    if mag == "1" {
        format!("{sign}{d}")
    } else {
        format!("{sign}{mag}*{d}")
    }
}

pub(crate) fn op_text(op: &SymmetryOperator) -> String {
    format!("Q = Dt{}{}", term(&op.xi, "Dx"), term(&op.eta, &format!("D{}", op.dep.name())))
}

fn status_json(s: Status) -> Value {
    json!(s.as_str())
}

fn assumption_list(a: &Assumptions) -> Vec<String> {
    let s = a.to_string();
    let s = s.trim_start_matches('{').trim_end_matches('}');
    s.split(", ").filter(|x| !x.is_empty()).map(str::to_string).collect()
}

fn verdict_json(label: &Option<String>, op: &SymmetryOperator, v: &Verdict) -> Value {
    json!({
        "label": label,
        "operator": op_text(op),
        "status": status_json(v.status),
        "witness": v.witness.as_ref().map(expr),
        "witness_vx_degree": v.witness_degree.map(count),
        "lie_multiplier": v.multiplier.as_ref().map(expr),
        "checked_points": count(v.checked_points),
    })
}

fn overall(statuses: &[Status]) -> Status {
    if statuses.contains(&Status::NotASymmetry) {
        Status::NotASymmetry
    } else if statuses.iter().all(|s| *s == Status::LieSymmetry) {
        Status::LieSymmetry
    } else {
        Status::ConditionalSymmetry
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let params = parse_params(&a.params)?;
    let candidate = a.candidate.as_deref().map(bindings).transpose()?;
    let (pde, ops, ass, entry) = match (&a.equation, &a.entry) {
        (Some(eq), _) => {
            let pde = parse_equation(eq)?;
            let text = a.operator.as_deref().ok_or_else(|| Error::Malformed("--operator is required".into()))?;
            let op = parse_operator(text)?.in_v(&pde)?;
            let b = param_bindings(&params)?;
            let pde = bind_pde(&pde, &b)?;
            let ass = pde.default_assumptions();
            (pde, vec![(None, bind_op(&op, &b)?)], ass, None)
        }
        (None, Some(id)) => {
            let inst = instantiate(id, &params, candidate.as_ref())?;
            let ops = match &a.operator {
                Some(text) => vec![(None, bind_op(&parse_operator(text)?.in_v(&inst.pde)?, &inst.bindings)?)],
                None => inst.operators.iter().map(|o| (o.label.clone(), o.operator.clone())).collect(),
            };
            (inst.pde, ops, inst.assumptions, Some(inst.id))
        }
        (None, None) => return Err(Error::Malformed("give --equation or --entry".into())),
    };
    let mut assumptions = assumption_list(&ass);
    if let Some(id) = &entry {
        // Entry constraints were checked when the parameters were bound.
        for c in &builtin().entry(id)?.constraints {
            let c = c.to_string();
            if !assumptions.contains(&c) {
                assumptions.push(c);
            }
        }
    }
    let mut text = format!("equation: {}\n", pde_text(&pde));
    let mut results = Vec::new();
    let mut statuses = Vec::new();
    for (label, op) in &ops {
        let v = verify(&pde, op, &ass)?;
        let prefix = label.as_ref().map(|l| format!("[{l}] ")).unwrap_or_default();
        let _ = writeln!(text, "{prefix}{}: {}", op_text(op), v.status.as_str());
        if let (Some(w), Some(k)) = (&v.witness, v.witness_degree) {
            let _ = writeln!(text, "  witness (coefficient of Vx^{k}): {}", plain(w));
        }
        if let Some(m) = &v.multiplier {
            let _ = writeln!(text, "  Lie symmetry after multiplying by {}", plain(m));
        }
        statuses.push(v.status);
        results.push(verdict_json(label, op, &v));
    }
    let status = overall(&statuses);
    let _ = writeln!(text, "status: {}", status.as_str());
    Ok(Outcome {
        status: status.as_str().into(),
        code: if status == Status::NotASymmetry { 1 } else { 0 },
        text,
        payload: json!({
            "entry": entry,
            "equation": pde_text(&pde),
            "operators": results,
        }),
        assumptions,
    })
}

fn family(f: FamilyArg) -> Family {
    match f {
        FamilyArg::PowerPlain => Family::PowerPlain,
        FamilyArg::PowerConvective => Family::PowerConvective,
        FamilyArg::ExpPlain => Family::ExpPlain,
        FamilyArg::ExpConvective => Family::ExpConvective,
    }
}

fn cmd_detsys(a: &DetsysArgs) -> Result<Outcome> {
    let fam = family(a.family);
    let pde = fam.pde();
    let sys = generate_determining_system(&pde, &SymmetryOperator::formal())?;
    let eqs: Vec<String> = sys.equations.iter().map(|e| format!("{} = 0", plain(e))).collect();
    let unknowns: Vec<String> = sys.unknowns.iter().map(|u| u.to_string()).collect();
    let mut text = format!("family: {fam}\nequation: {}\nunknowns: {}\n", pde_text(&pde), unknowns.join(", "));
    for (i, e) in eqs.iter().enumerate() {
        let _ = writeln!(text, "({}) {e}", i + 1);
    }
    Ok(Outcome {
        status: "Ok".into(),
        code: 0,
        text,
        payload: json!({
            "family": fam.name(),
            "equation": pde_text(&pde),
            "unknowns": unknowns,
            "equations": eqs,
            "merges": sys.merges,
        }),
        assumptions: assumption_list(&sys.assumptions),
    })
}

fn pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let bad = || Error::Malformed(format!("{what} must be `a,b`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn in_band(r: Option<&f64>) -> bool {
    r.is_some_and(|r| (3.0..=5.0).contains(r))
}

fn cmd_numcheck(a: &NumcheckArgs) -> Result<Outcome> {
    let params = parse_params(&a.params)?;
    if let Some(sys) = &a.system {
        let cand = bindings(a.candidate.as_deref().unwrap_or_default())?;
        let (x0, x1) = pair(a.interval.as_deref().unwrap_or("1,2"), "--interval")?;
        let grid = Grid1D::new(x0, x1, a.grid.unwrap_or(1001))?;
        let tol = a.tol.unwrap_or(1e-6);
        let c = ode_constraint_check(sys, &params, &cand, &grid, a.time)?;
        let exact = c.max_residual <= 1e-10;
        let mut failures = Vec::new();
        if c.extrapolated_residual > tol {
            failures.push(format!("extrapolated residual {:.3e} > {tol:e}", c.extrapolated_residual));
        }
        if !exact && !in_band(c.refinement_ratio.as_ref()) {
            failures.push(format!("refinement ratio {:.4} outside [3, 5]", c.refinement_ratio.unwrap_or(f64::NAN)));
        }
        let mut text = format!("system: {sys}\ngrid: {} points on [{x0}, {x1}], t = {}\n", grid.n, a.time);
        let _ = writeln!(text, "max residual: {:.3e}", c.max_residual);
        for (i, r) in c.per_equation.iter().enumerate() {
            let _ = writeln!(text, "  equation {}: {r:.3e}", i + 1);
        }
        let _ = writeln!(text, "refined residual: {:.3e}", c.refined_residual);
        match c.refinement_ratio {
            Some(r) => {
                let _ = writeln!(text, "refinement ratio: {r:.4}");
            }
            None => text.push_str("refinement ratio: n/a (rounding level)\n"),
        }
        let _ = writeln!(text, "extrapolated residual: {:.3e}", c.extrapolated_residual);
        return Ok(gate(
            text,
            failures,
            json!({
                "system": sys,
                "grid": {"x0": float(x0), "x1": float(x1), "n": count(grid.n)},
                "time": float(a.time),
                "max_residual": float(c.max_residual),
                "per_equation": c.per_equation.iter().map(|r| float(*r)).collect::<Vec<_>>(),
                "refined_residual": float(c.refined_residual),
                "refinement_ratio": c.refinement_ratio.map(float),
                "extrapolated_residual": float(c.extrapolated_residual),
                "tolerance": float(tol),
            }),
        ));
    }
    let id = a.entry.as_deref().ok_or_else(|| Error::Malformed("give --entry or --system".into()))?;
    let (x0, x1) = pair(a.interval.as_deref().unwrap_or("0,1"), "--interval")?;
    let (p0, p1) = pair(&a.profile, "--profile")?;
    let mut opts = FlowCheckOptions::new(Grid1D::new(x0, x1, a.grid.unwrap_or(201))?, a.t_end);
    opts.profile = [p0, p1];
    let tol = a.tol.unwrap_or(1e-4);
    let r = invariant_flow_check(id, &params, &opts)?;
    let mut failures = Vec::new();
    if r.max_flow_deviation > tol {
        failures.push(format!("flow deviation {:.3e} > {tol:e}", r.max_flow_deviation));
    }
    if r.max_pde_residual > tol {
        failures.push(format!("PDE residual {:.3e} > {tol:e}", r.max_pde_residual));
    }
    if !r.passes(tol) && failures.is_empty() {
        failures.push(format!(
            "refinement ratios {:?} / {:?} not in [3, 5]",
            r.refinement_ratios.last(),
            r.residual_ratios.last()
        ));
    }
    let mut text = format!("entry: {id}\ninterval: [{x0}, {x1}], t in [0, {}]\n", a.t_end);
    for l in &r.levels {
        let _ = writeln!(
            text,
            "N = {:>5}  steps = {:>7}  deviation = {:.3e}  residual = {:.3e}",
            l.n, l.steps, l.max_flow_deviation, l.max_pde_residual
        );
    }
    let _ = writeln!(text, "deviation ratios: {}", ratios(&r.refinement_ratios));
    let _ = writeln!(text, "residual ratios: {}", ratios(&r.residual_ratios));
    let levels: Vec<Value> = r
        .levels
        .iter()
        .map(|l| {
            json!({
                "n": count(l.n),
                "steps": count(l.steps),
                "max_flow_deviation": float(l.max_flow_deviation),
                "max_pde_residual": float(l.max_pde_residual),
            })
        })
        .collect();
    Ok(gate(
        text,
        failures,
        json!({
            "entry": id,
            "interval": [float(x0), float(x1)],
            "t_end": float(a.t_end),
            "profile": [float(p0), float(p1)],
            "levels": levels,
            "max_flow_deviation": float(r.max_flow_deviation),
            "max_pde_residual": float(r.max_pde_residual),
            "refinement_ratios": r.refinement_ratios.iter().map(|x| float(*x)).collect::<Vec<_>>(),
            "residual_ratios": r.residual_ratios.iter().map(|x| float(*x)).collect::<Vec<_>>(),
            "tolerance": float(tol),
        }),
    ))
}

fn ratios(r: &[f64]) -> String {
    r.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn gate(mut text: String, failures: Vec<String>, mut payload: Value) -> Outcome {
    let pass = failures.is_empty();
    for f in &failures {
        let _ = writeln!(text, "FAILED: {f}");
    }
    text.push_str(if pass { "result: pass\n" } else { "result: fail\n" });
    payload["failures"] = json!(failures);
    Outcome {
        status: if pass { "Pass" } else { "Fail" }.into(),
        code: if pass { 0 } else { 1 },
        text,
        payload,
        assumptions: vec![],
    }
}

fn cmd_catalog(a: &CatalogArgs) -> Result<Outcome> {
    match &a.action {
        CatalogAction::List => {
            let mut text = String::new();
            let mut rows = Vec::new();
            for s in catalog::list_entries() {
                let kind = match (&s.alias_of, s.status) {
                    (Some(t), _) => format!("alias of {t}"),
                    (None, Some(st)) => st.as_str().to_string(),
                    (None, None) => "-".into(),
                };
                let _ = writeln!(text, "{:<24} {:<28} {}", s.id, kind, s.title);
                rows.push(json!({
                    "id": s.id,
                    "title": s.title,
                    "status": s.status.map(status_json),
                    "system": s.system,
                    "alias_of": s.alias_of,
                }));
            }
            let _ = writeln!(text, "{} entries", rows.len());
            Ok(Outcome { status: "Ok".into(), code: 0, text, payload: json!({"entries": rows}), assumptions: vec![] })
        }
        CatalogAction::Show { id } => show(builtin().entry(id)?),
        CatalogAction::VerifyAll => verify_all(),
    }
}

fn show(e: &CatalogEntry) -> Result<Outcome> {
    let mut text = format!("{}: {}\n", e.id, e.title);
    if let Some(t) = &e.alias_of {
        let _ = writeln!(text, "alias of: {t}");
    }
    let line = |text: &mut String, k: &str, v: String| {
        if !v.is_empty() {
            let _ = writeln!(text, "{k}: {v}");
        }
    };
    line(&mut text, "parameters", e.params.join(", "));
    let derived: Vec<String> = e.derived.iter().map(|(k, v)| format!("{k} = {}", plain(v))).collect();
    line(&mut text, "derived", derived.join(", "));
    let fixed: Vec<String> = e.fixed.iter().map(|(k, v)| format!("{k} = {}", plain(&Expr::Const(v.clone())))).collect();
    line(&mut text, "fixed", fixed.join(", "));
    let constraints: Vec<String> = e.constraints.iter().map(|c| c.to_string()).collect();
    line(&mut text, "constraints", constraints.join(", "));
    if let Some(r) = &e.roots {
        line(&mut text, "roots", format!("{} with {} = 0", r.name, r.poly.text));
    }
    line(&mut text, "equation", e.u_equation.as_ref().map(|t| t.text.clone()).unwrap_or_default());
    for o in &e.u_operators {
        line(&mut text, "operator", o.text.clone());
    }
    line(&mut text, "canonical form", e.v_equation.as_ref().map(|t| t.text.clone()).unwrap_or_default());
    for o in &e.v_operators {
        line(&mut text, "canonical operator", o.text.clone());
    }
    line(&mut text, "constraint system", e.system.clone().unwrap_or_default());
    line(&mut text, "status", e.status.map(|s| s.as_str().to_string()).unwrap_or_default());
    line(&mut text, "fixtures", e.fixtures.len().to_string());
    line(&mut text, "see also", e.cross_refs.join(", "));
    line(&mut text, "notes", e.notes.clone());
    line(&mut text, "provenance", e.provenance.clone());
    let payload = json!({
        "id": e.id,
        "title": e.title,
        "alias_of": e.alias_of,
        "params": e.params,
        "derived": derived,
        "fixed": fixed,
        "constraints": constraints,
        "u_equation": e.u_equation.as_ref().map(|t| t.text.clone()),
        "u_operators": e.u_operators.iter().map(|t| t.text.clone()).collect::<Vec<_>>(),
        "v_equation": e.v_equation.as_ref().map(|t| t.text.clone()),
        "v_operators": e.v_operators.iter().map(|t| t.text.clone()).collect::<Vec<_>>(),
        "system": e.system,
        "status": e.status.map(status_json),
        "fixtures": e.fixtures.iter().map(|f| json!({
            "params": f.params_text,
            "candidate": f.candidate_text,
            "status": f.status.map(status_json),
        })).collect::<Vec<_>>(),
        "cross_refs": e.cross_refs,
        "notes": e.notes,
        "provenance": e.provenance,
    });
    Ok(Outcome { status: "Ok".into(), code: 0, text, payload, assumptions: vec![] })
}

/// Fixture and mutation outcomes of one entry.
#[derive(Debug, Default)]
pub struct EntryCheck {
    pub id: String,
    pub fixtures: usize,
    pub mutations: usize,
    pub failures: Vec<String>,
}

/// Verify every fixture of `e` with its expected status and reject every
/// mutation at every fixture.
pub fn check_entry(e: &CatalogEntry) -> EntryCheck {
    let mut out = EntryCheck { id: e.id.clone(), ..Default::default() };
    for fx in &e.fixtures {
        let inst = match instantiate(&e.id, &fx.params, fx.candidate.as_ref()) {
            Ok(i) => i,
            Err(err) => {
                out.failures.push(format!("[{}] {err}", fx.params_text));
                continue;
            }
        };
        let want = inst.expected_at(fx);
        out.fixtures += 1;
        for o in &inst.operators {
            match verify(&inst.pde, &o.operator, &inst.assumptions) {
                Ok(v) if v.status == want => {}
                Ok(v) => out.failures.push(format!(
                    "[{}] {}: {} instead of {}",
                    fx.params_text,
                    op_text(&o.operator),
                    v.status.as_str(),
                    want.as_str()
                )),
                Err(err) => out.failures.push(format!("[{}] {err}", fx.params_text)),
            }
        }
        for m in &inst.mutants {
            out.mutations += 1;
            match verify(&inst.pde, m, &inst.assumptions) {
                Ok(v) if v.status == Status::NotASymmetry && v.witness.is_some() => {}
                Ok(v) => out.failures.push(format!(
                    "[{}] mutation {} gives {}",
                    fx.params_text,
                    op_text(m),
                    v.status.as_str()
                )),
                Err(err) => out.failures.push(format!("[{}] mutation: {err}", fx.params_text)),
            }
        }
    }
    out
}

/// `check_entry` over every non-alias entry, fanned out over threads and
/// reported in id order.
pub fn check_all() -> Vec<EntryCheck> {
    let mut entries: Vec<&CatalogEntry> = builtin().entries().iter().filter(|e| !e.is_alias()).collect();
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(entries.len()).max(1);
    let mut results: Vec<Option<EntryCheck>> = (0..entries.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let entries = &entries;
                s.spawn(move || {
                    (w..entries.len()).step_by(workers).map(|i| (i, check_entry(entries[i]))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("verification thread panicked") {
                results[i] = Some(r);
            }
        }
    });
    results.into_iter().map(|r| r.expect("every entry checked")).collect()
}

fn verify_all() -> Result<Outcome> {
    let checks = check_all();
    let mut text = String::new();
    let mut rows = Vec::new();
    for c in &checks {
        let verdict = if c.failures.is_empty() { "ok" } else { "FAIL" };
        let _ = writeln!(text, "{:<24} {verdict:<4} fixtures {:>2}  mutations {:>2}", c.id, c.fixtures, c.mutations);
        for f in &c.failures {
            let _ = writeln!(text, "    {f}");
        }
        rows.push(json!({
            "id": c.id,
            "fixtures": count(c.fixtures),
            "mutations": count(c.mutations),
            "failures": c.failures,
        }));
    }
    let failed = checks.iter().filter(|c| !c.failures.is_empty()).count();
    let _ = writeln!(text, "{} entries, {failed} failed", checks.len());
    Ok(Outcome {
        status: if failed == 0 { "Pass" } else { "Fail" }.into(),
        code: if failed == 0 { 0 } else { 1 },
        text,
        payload: json!({"entries": rows}),
        assumptions: vec![],
    })
}

fn raw(text: &str) -> Result<RawOperator> {
    let (tau, xi, eta, dep) = parse_operator_raw(text)?;
    Ok(RawOperator::new(tau, xi, eta, dep))
}

fn cmd_equiv(a: &EquivArgs) -> Result<Outcome> {
    if let Some(id) = &a.entry {
        return transform(a, id);
    }
    let [o1, o2] = a.operators.as_slice() else {
        return Err(Error::Malformed("equiv needs exactly two --operator values, or --entry with --transform".into()));
    };
    let (r1, r2) = (raw(o1)?, raw(o2)?);
    let m = equivalent_up_to_multiplier(&r1, &r2)?;
    let text = match &m {
        Some(m) => format!("equivalent: second = M * first with M = {}\n", plain(m)),
        None => "not equivalent up to a multiplier\n".to_string(),
    };
    Ok(Outcome {
        status: if m.is_some() { "Pass" } else { "Fail" }.into(),
        code: if m.is_some() { 0 } else { 1 },
        text,
        payload: json!({"first": o1, "second": o2, "multiplier": m.as_ref().map(expr)}),
        assumptions: vec![],
    })
}

fn transform(a: &EquivArgs, id: &str) -> Result<Outcome> {
    let name = a.transform.as_deref().ok_or_else(|| Error::Malformed("--transform is required".into()))?;
    let t = Equivalence::parse(name, a.arg.as_deref())?;
    let params = parse_params(&a.params)?;
    let candidate = a.candidate.as_deref().map(bindings).transpose()?;
    let inst = instantiate(id, &params, candidate.as_ref())?;
    let tr = apply_equivalence(id, &params, candidate.as_ref(), &t)?;
    let ass = tr.pde.default_assumptions();
    let mut text = format!("{id} under {}\nequation: {}\n", t.id(), eq_text(&tr.equation));
    let mut rows = Vec::new();
    let mut preserved = true;
    for ((orig, op), written) in inst.operators.iter().zip(&tr.operators).zip(&tr.written) {
        let before = verify(&inst.pde, &orig.operator, &inst.assumptions)?.status;
        let after = verify(&tr.pde, op, &ass)?.status;
        // The lambda-zero transform moves to another parameter point, where
        // the status can change legitimately; it only has to stay a symmetry.
        let ok = match t {
            Equivalence::LambdaZero => after != Status::NotASymmetry,
            _ => after == before,
        };
        preserved &= ok;
        let _ = writeln!(text, "{}: {} (was {})", op_text(written), after.as_str(), before.as_str());
        rows.push(json!({
            "operator": op_text(written),
            "canonical": op_text(op),
            "status": status_json(after),
            "original_status": status_json(before),
        }));
    }
    for (k, v) in &tr.params {
        let _ = writeln!(text, "  {k} = {}", plain(&Expr::Const(v.clone())));
    }
    let params_json: serde_json::Map<String, Value> = tr.params.iter().map(|(k, v)| (k.clone(), rational(v))).collect();
    Ok(Outcome {
        status: if preserved { "Pass" } else { "Fail" }.into(),
        code: if preserved { 0 } else { 1 },
        text,
        payload: json!({
            "entry": id,
            "transform": t.id(),
            "equation": eq_text(&tr.equation),
            "operators": rows,
            "params": params_json,
        }),
        assumptions: assumption_list(&ass),
    })
}
