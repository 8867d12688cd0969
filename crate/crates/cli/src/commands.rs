//! One function per subcommand. Reports go to stdout, diagnostics to
//! stderr.

use std::path::PathBuf;

use serde_json::{json, Value};

use characteristica::canonical::{
    build_map, cross_validate, inverse_condition_report, matches_equation, reduce_all, reduce_chain_rule, reduce_compact,
    reduce_compact_invariant, reduce_inverse_map, CanonicalForm, TransitionMap,
};
use characteristica::chars::{char_odes, solve_invariant, verify_invariant, CharacteristicOde, Family, Provenance};
use characteristica::corpus::{load_corpus, run_fixture, Fixture};
use characteristica::factor::{commutator_report, factor_principal, parabolic_lambda_residue, FactorPair, MapForms};
use characteristica::pde::{classify as classify_pde, lambdas, Kind, Pde2};
use characteristica::plot::{build_plot, PlotOptions, Seeds};
use characteristica::solutions::{certify, dalembert, pull_back, residual, solve_canonical, GeneralSolution, Probe};
use characteristica::{Expr, Oracle, Region};

use crate::input::{expr, oracle, resolve, resolve_with, usage, Input};
use crate::{Common, Failure, MapArgs, Outcome};

fn check(e: impl std::fmt::Display) -> Failure {
    Failure::Check(e.to_string())
}

fn emit(json: bool, value: &Value, text: &str) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
    } else {
        print!("{text}");
    }
}

fn header(command: &str, inp: &Input) -> Value {
    json!({
        "command": command,
        "pde": inp.text,
        "vars": inp.vars.names(),
        "region": inp.bounds,
        "fixture": inp.fixture.as_ref().map(|f| f.id.clone()),
    })
}

fn with(mut head: Value, body: Value) -> Value {
    if let (Value::Object(h), Value::Object(b)) = (&mut head, body) {
        h.extend(b);
    }
    head
}

struct Setup {
    inp: Input,
    cfg: Oracle,
    p: Pde2,
}

fn setup(c: &Common) -> Result<Setup, Failure> {
    let inp = resolve(c)?;
    let cfg = oracle(c.seed, c.tol)?;
    let p = inp.pde()?;
    Ok(Setup { inp, cfg, p })
}

pub fn classify(c: &Common) -> Outcome {
    let s = setup(c)?;
    let cls = classify_pde(&s.p, &s.inp.region, &s.cfg).map_err(check)?;
    let ev = &cls.evidence;
    let v = with(
        header("classify", &s.inp),
        json!({
            "kind": cls.kind.name(),
            "discriminant": cls.discriminant.pretty(),
            "evidence": ev,
        }),
    );
    let text = format!(
        "{}\ndiscriminant: {}\nsamples: {} (+{} -{} 0:{})\n",
        cls.kind.name(),
        cls.discriminant.pretty(),
        ev.samples,
        ev.positive,
        ev.negative,
        ev.zero
    );
    emit(c.json, &v, &text);
    Ok(true)
}

fn factor_pair(s: &Setup) -> Result<FactorPair, Failure> {
    factor_principal(&s.p, &s.inp.region, &s.cfg).map_err(check)
}

pub fn factor(c: &Common) -> Outcome {
    let s = setup(c)?;
    let lp = lambdas(&s.p, &s.inp.region, &s.cfg).map_err(check)?;
    let pair = factor_pair(&s)?;
    let v = with(
        header("factor", &s.inp),
        json!({
            "kind": lp.kind.name(),
            "lambda_plus": lp.plus.as_ref().map(Expr::pretty),
            "lambda_minus": lp.minus.as_ref().map(Expr::pretty),
            "axis": lp.axis,
            "degenerate": lp.degenerate,
            "plus": pair.plus.text(),
            "minus": pair.minus.text(),
            "lead": pair.lead.pretty(),
        }),
    );
    let show = |e: &Option<Expr>| e.as_ref().map_or("-".to_string(), Expr::pretty);
    let text = format!(
        "{}\nLambda+ = {}\nLambda- = {}\nL+ = {}\nL- = {}\nlead = {}\n",
        lp.kind.name(),
        show(&lp.plus),
        show(&lp.minus),
        pair.plus.text(),
        pair.minus.text(),
        pair.lead.pretty()
    );
    emit(c.json, &v, &text);
    Ok(true)
}

pub fn conditions(c: &Common, m: &MapArgs) -> Outcome {
    let s = setup(c)?;
    let pair = factor_pair(&s)?;
    let (r, cfg) = (&s.inp.region, &s.cfg);
    let mut body = json!({ "kind": pair.kind.name() });
    let mut text = format!("{}\n", pair.kind.name());
    let phi = s.inp.phi(m)?.map(|x| x.0);
    let psi = s.inp.psi(m)?.map(|x| x.0);
    match pair.kind {
        Kind::Hyperbolic => {
            let forms = match (&phi, &psi) {
                (Some(phi), Some(psi)) => Some(MapForms { phi, psi }),
                _ => None,
            };
            let rep = commutator_report(&s.p, &pair, forms, r, cfg).map_err(check)?;
            text += &format!(
                "r- = {}\nr+ = {}\ncommutes: {}\nresidue-free minus: {}\nresidue-free plus: {}\n",
                rep.r_minus.pretty(),
                rep.r_plus.pretty(),
                rep.commutes,
                rep.residue_free_minus,
                rep.residue_free_plus
            );
            body["factors"] = serde_json::to_value(&rep).expect("serializes");
        }
        Kind::Parabolic => {
            let res = parabolic_lambda_residue(&pair.plus).unwrap_or_else(Expr::zero).simplify();
            let zero = characteristica::expr::equiv_zero(&res, r, cfg).map_err(check)? || res.is_zero();
            text += &format!("L[Lambda] = {}\nresidue zero: {zero}\n", res.pretty());
            body["factors"] = json!({ "lambda_residue": res.pretty(), "lambda_residue_zero": zero });
        }
        k => return Err(check(format!("{} equations have no real factors", k.name()))),
    }
    let mut ok = true;
    body["inverse"] = Value::Null;
    if let (Some(phi), Some(inv)) = (&phi, s.inp.inverse(m)?) {
        let map = build_map(&s.p, &pair, phi, psi.as_ref(), Some(inv), r, cfg).map_err(check)?;
        let rep = inverse_condition_report(&map, pair.kind, Some((&s.p, &pair)), r, cfg).map_err(check)?;
        if rep.agrees_with_factors == Some(false) {
            ok = false;
            eprintln!("inverse-map verdicts disagree with the factor verdicts");
        }
        for w in &rep.witnesses {
            text += &format!("{} = {} ({})\n", w.name, w.expr.pretty(), if w.vanishes { "zero" } else { "nonzero" });
        }
        body["inverse"] = serde_json::to_value(&rep).expect("serializes");
    }
    emit(c.json, &with(header("conditions", &s.inp), body), &text);
    Ok(ok)
}

struct Found {
    family: Family,
    phi: Option<Expr>,
    provenance: Option<Provenance>,
    verified: bool,
}

/// Flag, else catalog, else fixture; with `stored_first` the fixture comes
/// before the catalog so a stored inverse still undoes the map.
fn invariants_of(s: &Setup, pair: &FactorPair, m: &MapArgs, stored_first: bool) -> Result<Vec<Found>, Failure> {
    let (r, cfg) = (&s.inp.region, &s.cfg);
    let mut out = Vec::new();
    for ode in char_odes(pair) {
        let given = match ode.family {
            Family::Minus => s.inp.psi(m)?,
            _ => s.inp.phi(m)?,
        };
        let (phi, prov) = match given {
            Some((e, true)) => (Some(e), Some(Provenance::UserSupplied)),
            Some((e, false)) if stored_first => (Some(e), Some(Provenance::Fixture)),
            stored => match solve_invariant(&ode, r, cfg) {
                Some(inv) => (Some(inv.phi), Some(inv.provenance)),
                None => match stored {
                    Some((e, _)) => (Some(e), Some(Provenance::Fixture)),
                    None => (None, None),
                },
            },
        };
        let verified = match &phi {
            Some(e) => verify_invariant(&ode.op(), e, r, cfg).map_err(check)?,
            None => false,
        };
        out.push(Found {
            family: ode.family,
            phi,
            provenance: prov,
            verified,
        });
    }
    Ok(out)
}

pub fn invariants(c: &Common, m: &MapArgs) -> Outcome {
    let s = setup(c)?;
    let pair = factor_pair(&s)?;
    let found = invariants_of(&s, &pair, m, false)?;
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for f in &found {
        let phi = f.phi.as_ref().map(Expr::pretty);
        ok &= f.phi.is_none() || f.verified;
        text += &format!(
            "{}: {} [{}{}]\n",
            f.family.name(),
            phi.as_deref().unwrap_or("not found"),
            f.provenance.map_or("none".into(), |p| serde_json::to_value(p).unwrap().as_str().unwrap().to_string()),
            if f.verified { ", verified" } else { "" }
        );
        rows.push(json!({
            "family": f.family.name(),
            "phi_text": phi,
            "provenance": f.provenance,
            "verified": f.verified,
        }));
    }
    emit(c.json, &with(header("invariants", &s.inp), json!({ "invariants": rows })), &text);
    Ok(ok)
}

fn transition_map(s: &Setup, pair: &FactorPair, m: &MapArgs) -> Result<TransitionMap, Failure> {
    let found = invariants_of(s, pair, m, true)?;
    let pick = |fam: Family| found.iter().find(|f| f.family == fam).and_then(|f| f.phi.clone());
    let phi = pick(if pair.kind == Kind::Parabolic { Family::Parabolic } else { Family::Plus })
        .ok_or_else(|| check("no invariant for the first family; pass --phi"))?;
    let psi = match pair.kind {
        Kind::Parabolic => s.inp.psi(m)?.map(|x| x.0),
        _ => Some(pick(Family::Minus).ok_or_else(|| check("no invariant for the second family; pass --psi"))?),
    };
    build_map(&s.p, pair, &phi, psi.as_ref(), s.inp.inverse(m)?, &s.inp.region, &s.cfg).map_err(check)
}

fn form_json(f: &CanonicalForm) -> Value {
    let mut v = serde_json::to_value(f).expect("serializes");
    v["text"] = json!(f.to_string());
    v
}

pub fn reduce(c: &Common, m: &MapArgs, method: &str) -> Outcome {
    let s = setup(c)?;
    let pair = factor_pair(&s)?;
    let map = transition_map(&s, &pair, m)?;
    let (p, r, cfg) = (&s.p, &s.inp.region, &s.cfg);
    let forms = match method {
        "all" => reduce_all(p, &pair, &map, r, cfg),
        "compact" => reduce_compact(p, &pair, &map, r, cfg).map(|f| vec![f]),
        "compact-invariant" => reduce_compact_invariant(p, &pair, &map, r, cfg).map(|f| vec![f]),
        "chain" => reduce_chain_rule(p, &map, pair.kind, r, cfg).map(|f| vec![f]),
        "inverse" => reduce_inverse_map(p, &pair, &map, r, cfg).map(|f| vec![f]),
        other => return Err(usage(format!("unknown method {other:?}"))),
    }
    .map_err(check)?;
    let agree = cross_validate(&forms, r, cfg).map_err(check)?;
    let mut text = format!("xi = {}\neta = {}\n", map.phi.pretty(), map.psi.pretty());
    for f in &forms {
        text += &format!("{}: {}\n", f.method.name(), f);
    }
    text += &format!("methods agree: {agree}\n");
    let expected = match s.inp.fixture.as_ref().and_then(|f| f.canonical.as_ref()) {
        Some(t) => Some(matches_equation(&forms[0], &map, t, r, cfg).map_err(check)?),
        None => None,
    };
    if let Some(e) = expected {
        text += &format!("matches fixture: {e}\n");
    }
    let body = json!({
        "matches_fixture": expected,
        "phi": map.phi.pretty(),
        "psi": map.psi.pretty(),
        "inverse": map.inverse.as_ref().map(|(a, b)| [a.pretty(), b.pretty()]),
        "forms": forms.iter().map(form_json).collect::<Vec<_>>(),
        "agree": agree,
    });
    emit(c.json, &with(header("reduce", &s.inp), body), &text);
    Ok(agree && expected != Some(false))
}

/// d'Alembert for constant coefficients, else reduce and look the
/// canonical form up in the catalog.
fn find_solution(s: &Setup, m: &MapArgs) -> Result<Option<GeneralSolution>, Failure> {
    let (r, cfg) = (&s.inp.region, &s.cfg);
    if let Ok(sol) = dalembert(&s.p, r, cfg) {
        return Ok(Some(sol));
    }
    let pair = factor_pair(s)?;
    let map = transition_map(s, &pair, m)?;
    let forms = reduce_all(&s.p, &pair, &map, r, cfg).map_err(check)?;
    let mut form = forms[0].clone();
    if let Some(text) = s.inp.fixture.as_ref().and_then(|f| f.canonical.as_ref()) {
        if map.inverse.is_some() {
            form.adopt_rendering(&map, text, r, cfg).map_err(check)?;
        }
    }
    Ok(solve_canonical(&form, r, cfg).map_err(check)?.map(|sol| pull_back(&sol, &map)))
}

fn certification(p: &Pde2, sol: &GeneralSolution, r: &Region, cfg: &Oracle) -> Result<(bool, Value, String), Failure> {
    let probes: &[Probe] = if sol.slots.is_empty() { &Probe::ALL[..1] } else { &Probe::ALL };
    let reps = certify(p, sol, probes, r, cfg, 3).map_err(check)?;
    let pass = reps.iter().all(|x| x.pass && x.fd.pass);
    let mut text = String::new();
    for x in &reps {
        text += &format!(
            "  {}: max residual {:.3e}, fd {:.3e} ({})\n",
            x.instantiation.as_deref().unwrap_or("-"),
            x.max_residual,
            x.fd.max_residual,
            if x.pass && x.fd.pass { "pass" } else { "FAIL" }
        );
    }
    Ok((pass, serde_json::to_value(&reps).expect("serializes"), text))
}

pub fn solve(c: &Common, m: &MapArgs) -> Outcome {
    let s = setup(c)?;
    let Some(sol) = find_solution(&s, m)? else {
        emit(c.json, &with(header("solve", &s.inp), json!({ "solution": null })), "no catalog entry matches\n");
        eprintln!("no closed-form solution in the catalog");
        return Ok(false);
    };
    let (pass, reps, lines) = certification(&s.p, &sol, &s.inp.region, &s.cfg)?;
    let body = json!({
        "solution": sol.text(),
        "rule": sol.rule,
        "certified": pass,
        "reports": reps,
    });
    let text = format!("u = {}\nrule: {}\n{lines}", sol.text(), sol.rule);
    emit(c.json, &with(header("solve", &s.inp), body), &text);
    Ok(pass)
}

pub fn verify(c: &Common, candidate: Option<&str>) -> Outcome {
    let s = setup(c)?;
    let (r, cfg) = (&s.inp.region, &s.cfg);
    let (pass, body, text) = match candidate {
        Some(t) => {
            let u = expr(t, &s.inp.vars)?;
            let rep = residual(&s.p, &u, r, cfg).map_err(check)?;
            let pass = rep.pass && rep.fd.pass;
            let text = format!(
                "u = {}\nmax residual {:.3e} over {} samples, fd {:.3e}\n{}\n",
                u.pretty(),
                rep.max_residual,
                rep.survivors,
                rep.fd.max_residual,
                if pass { "pass" } else { "FAIL" }
            );
            (pass, json!({ "solution": u.pretty(), "pass": pass, "reports": [rep] }), text)
        }
        None => {
            let fx = s.inp.fixture.as_ref().ok_or_else(|| usage("--solution is required without --fixture"))?;
            let tpl = fx
                .solution_template()
                .map_err(check)?
                .ok_or_else(|| check(format!("fixture {} has no solution", fx.id)))?;
            let (pass, reps, lines) = certification(&s.p, &tpl, r, cfg)?;
            let text = format!("u = {}\n{lines}", tpl.text());
            (pass, json!({ "solution": tpl.text(), "pass": pass, "reports": reps }), text)
        }
    };
    emit(c.json, &with(header("verify", &s.inp), body), &text);
    Ok(pass)
}

pub fn corpus(id: Option<&str>, list: bool, seed: Option<u64>, tol: Option<f64>, json_out: bool) -> Outcome {
    let all = load_corpus().map_err(check)?;
    let chosen: Vec<&Fixture> = match id {
        Some(id) => vec![all.iter().find(|f| f.id == id).ok_or_else(|| usage(format!("no fixture {id:?}")))?],
        None => all.iter().collect(),
    };
    if list {
        let rows: Vec<Value> = chosen
            .iter()
            .map(|f| json!({ "id": f.id, "pde": f.pde, "kind": f.classification, "notes": f.notes }))
            .collect();
        let text: String = chosen.iter().map(|f| format!("{:<12} {:<11} {}\n", f.id, f.classification, f.pde)).collect();
        emit(json_out, &json!({ "command": "corpus", "fixtures": rows }), &text);
        return Ok(true);
    }
    let cfg = oracle(seed, tol)?;
    let reports: Vec<_> = chosen.iter().map(|f| run_fixture(f, &cfg)).collect();
    let mut text = String::new();
    for rep in &reports {
        let pass = rep.pass();
        text += &format!(
            "{:<12} {} ({} checks, {:.2}s)\n",
            rep.id,
            if pass { "pass" } else { "FAIL" },
            rep.checks.len(),
            rep.seconds
        );
        for c in rep.failures() {
            text += &format!("  {}: {}\n", c.name, c.detail);
        }
    }
    let pass = reports.iter().all(|r| r.pass());
    emit(json_out, &json!({ "command": "corpus", "pass": pass, "reports": reports }), &text);
    Ok(pass)
}

pub struct PlotArgs {
    pub op: Option<String>,
    pub family: String,
    pub phi: Option<String>,
    pub seeds: String,
    pub count: usize,
    pub step: f64,
    pub panel: u32,
    pub svg: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Splits on commas outside parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn parse_seeds(s: &str, count: usize) -> Result<Seeds, Failure> {
    match s {
        "grid" => Ok(Seeds::Grid(count)),
        "line" => Ok(Seeds::Line(count)),
        pts => pts
            .split(';')
            .map(|p| {
                let v: Vec<f64> = p.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().ok()?;
                (v.len() == 2).then(|| (v[0], v[1]))
            })
            .collect::<Option<Vec<_>>>()
            .map(Seeds::Points)
            .ok_or_else(|| usage(format!("--seeds expects grid, line or x,y;x,y, got {s:?}"))),
    }
}

pub fn plot(c: &Common, a: &PlotArgs) -> Outcome {
    let cfg = oracle(c.seed, c.tol)?;
    let (inp, ode, stored_phi) = match &a.op {
        Some(op) => {
            if c.pde.is_some() || c.fixture.is_some() {
                return Err(usage("--op replaces the equation input"));
            }
            let mut c = c.clone();
            c.pde = Some("u_xx = 0".into());
            let inp = resolve_with(&c, [-2.0, 2.0, -2.0, 2.0])?;
            let [al, be] = <[&str; 2]>::try_from(split_top(op)).map_err(|_| usage("--op expects \"alpha,beta\""))?;
            let ode = CharacteristicOde {
                vars: inp.vars.clone(),
                family: Family::Field,
                alpha: expr(al, &inp.vars)?,
                beta: expr(be, &inp.vars)?,
                rhs: None,
            };
            (inp, ode, None)
        }
        None => {
            let inp = resolve(c)?;
            let p = inp.pde()?;
            let pair = factor_principal(&p, &inp.region, &cfg).map_err(check)?;
            let odes = char_odes(&pair);
            let want = match a.family.as_str() {
                "plus" => 0,
                "minus" => 1,
                f => return Err(usage(format!("unknown family {f:?}"))),
            };
            let ode = odes.get(want).cloned().ok_or_else(|| usage("a parabolic equation has one family"))?;
            let stored = inp.fixture.as_ref().and_then(|f| if want == 0 { f.phi.clone() } else { f.psi.clone() });
            let phi = match stored {
                Some(t) => Some(expr(&t, &inp.vars)?),
                None => solve_invariant(&ode, &inp.region, &cfg).map(|i| i.phi),
            };
            (inp, ode, phi)
        }
    };
    let phi = match &a.phi {
        Some(t) => Some(expr(t, &inp.vars)?),
        None => stored_phi,
    };
    if !(a.step > 0.0) {
        return Err(usage("--step must be positive"));
    }
    let opts = PlotOptions {
        seeds: parse_seeds(&a.seeds, a.count)?,
        h: a.step,
        panel: a.panel,
        ..PlotOptions::default()
    };
    let plot = build_plot(&ode, phi.as_ref(), &inp.region, &opts).map_err(|e| usage(e.to_string()))?;
    let svg = plot.svg(a.panel);
    let write = |path: &PathBuf, body: &str| std::fs::write(path, body).map_err(|e| check(format!("{}: {e}", path.display())));
    if let Some(p) = &a.svg {
        write(p, &svg)?;
    }
    if let Some(p) = &a.csv {
        write(p, &plot.csv())?;
    }
    if c.json {
        emit(true, &json!({ "command": "plot", "field": [ode.alpha.pretty(), ode.beta.pretty()], "plot": plot }), "");
    } else if a.svg.is_none() && a.csv.is_none() {
        print!("{svg}");
    }
    Ok(true)
}
