//! Worked-example fixtures shipped in `data/corpus.json` and the
//! end-to-end pipeline that replays them.
//!
//! Each entry carries the equation text, variable names, a sampling
//! rectangle `[x0, x1, y0, y1]` with optional extra guard expressions, and
//! the expected results: classification, slopes, axis, invariants, an
//! optional inverse map, canonical form text in `(xi, eta)`, condition
//! booleans, residue texts, and a solution template in source variables.
//! Null fields are not checked.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{build_map, cross_validate, inverse_condition_report, matches_equation, reduce_all, TransitionMap};
use crate::chars::{char_odes, invariant_equivalent, solve_invariant, verify_invariant};
use crate::expr::{equiv, parse_expr, Expr, OracleConfig, SampleRegion, VarPair};
use crate::factor::{commutator_report, factor_principal, parabolic_lambda_residue, FactorPair};
use crate::pde::{classify, lambdas, vanishes, Axis, Kind, Pde2};
use crate::scalar::Scalar;
use crate::solutions::{certify, pull_back, solve_canonical, FunctionSlot, GeneralSolution, Probe};

const DATA: &str = include_str!("../data/corpus.json");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus data is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("fixture {id}: {msg}")]
    Fixture { id: String, msg: String },
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
pub struct ExpectedConditions {
    pub commutes: Option<bool>,
    pub residue_free_minus: Option<bool>,
    pub residue_free_plus: Option<bool>,
    pub lambda_residue_zero: Option<bool>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct SlotSpec {
    pub multiplier: String,
    pub argument: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct SolutionSpec {
    pub particular: String,
    pub slots: Vec<SlotSpec>,
}

/// One worked example as stored on disk.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub id: String,
    pub notes: String,
    pub vars: [String; 2],
    pub pde: String,
    pub region: [f64; 4],
    #[serde(default)]
    pub guards: Vec<String>,
    pub classification: String,
    pub lambda_plus: Option<String>,
    #[serde(default)]
    pub lambda_minus: Option<String>,
    pub axis: Option<String>,
    #[serde(default)]
    pub degenerate: bool,
    pub phi: Option<String>,
    pub psi: Option<String>,
    #[serde(default)]
    pub inverse: Option<[String; 2]>,
    pub canonical: Option<String>,
    #[serde(default)]
    pub conditions: ExpectedConditions,
    #[serde(default)]
    pub residues: Option<[String; 2]>,
    #[serde(default)]
    pub principal_on_invariants: Option<[String; 2]>,
    pub solution: Option<SolutionSpec>,
    #[serde(default)]
    pub solvable: bool,
}

impl Fixture {
    pub fn var_pair(&self) -> VarPair {
        VarPair::new(&self.vars[0], &self.vars[1])
    }

    fn err(&self, msg: impl Into<String>) -> CorpusError {
        CorpusError::Fixture {
            id: self.id.clone(),
            msg: msg.into(),
        }
    }

    fn source(&self, text: &str) -> Result<Expr, CorpusError> {
        parse_expr(text, &self.var_pair()).map_err(|e| self.err(format!("{text:?}: {e}")))
    }

    fn target(&self, text: &str) -> Result<Expr, CorpusError> {
        parse_expr(text, &VarPair::target()).map_err(|e| self.err(format!("{text:?}: {e}")))
    }

    pub fn parse_pde(&self) -> Result<Pde2, CorpusError> {
        Pde2::parse(&self.pde, &self.var_pair()).map_err(|e| self.err(e.to_string()))
    }

    pub fn kind(&self) -> Result<Kind, CorpusError> {
        Kind::from_name(&self.classification).ok_or_else(|| self.err(format!("unknown kind {:?}", self.classification)))
    }

    pub fn expected_axis(&self) -> Result<Option<Axis>, CorpusError> {
        match self.axis.as_deref() {
            None => Ok(None),
            Some("x") => Ok(Some(Axis::X)),
            Some("y") => Ok(Some(Axis::Y)),
            Some(other) => Err(self.err(format!("unknown axis {other:?}"))),
        }
    }

    pub fn sample_region<T: Scalar>(&self) -> Result<SampleRegion<T>, CorpusError> {
        let [x0, x1, y0, y1] = self.region.map(T::of);
        let guards = self.guards.iter().map(|g| self.source(g)).collect::<Result<Vec<_>, _>>()?;
        Ok(SampleRegion::new(self.var_pair(), (x0, x1), (y0, y1))
            .map_err(|e| self.err(e.to_string()))?
            .with_guards(guards))
    }

    pub fn phi_expr(&self) -> Result<Option<Expr>, CorpusError> {
        self.phi.as_deref().map(|s| self.source(s)).transpose()
    }

    pub fn psi_expr(&self) -> Result<Option<Expr>, CorpusError> {
        self.psi.as_deref().map(|s| self.source(s)).transpose()
    }

    pub fn inverse_exprs(&self) -> Result<Option<(Expr, Expr)>, CorpusError> {
        match &self.inverse {
            None => Ok(None),
            Some([p, q]) => Ok(Some((self.target(p)?, self.target(q)?))),
        }
    }

    /// The stored template; a missing argument is a constant slot.
    pub fn solution_template(&self) -> Result<Option<GeneralSolution>, CorpusError> {
        let Some(spec) = &self.solution else {
            return Ok(None);
        };
        let names = ["F", "G"];
        let slots = spec
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(FunctionSlot {
                    name: if s.argument.is_some() { names[i.min(1)] } else { "K" },
                    multiplier: self.source(&s.multiplier)?,
                    argument: s.argument.as_deref().map(|a| self.source(a)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>, CorpusError>>()?;
        Ok(Some(GeneralSolution::new(
            self.var_pair(),
            self.source(&spec.particular)?,
            slots,
            "fixture",
        )))
    }

    /// Every text field parses.
    fn check_syntax(&self) -> Result<(), CorpusError> {
        self.parse_pde()?;
        self.kind()?;
        self.expected_axis()?;
        self.sample_region::<f64>()?;
        for t in [&self.lambda_plus, &self.lambda_minus, &self.phi, &self.psi].into_iter().flatten() {
            self.source(t)?;
        }
        for t in self.residues.iter().chain(&self.principal_on_invariants).flatten() {
            self.source(t)?;
        }
        self.inverse_exprs()?;
        if let Some(c) = &self.canonical {
            Pde2::parse_with(c, &VarPair::target(), "U").map_err(|e| self.err(format!("canonical: {e}")))?;
        }
        self.solution_template()?;
        Ok(())
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<Fixture>, CorpusError> {
    let fixtures: Vec<Fixture> = serde_json::from_str(text)?;
    for f in &fixtures {
        f.check_syntax()?;
    }
    Ok(fixtures)
}

/// The bundled fixtures, syntax-checked.
pub fn load_corpus() -> Result<Vec<Fixture>, CorpusError> {
    parse_corpus(DATA)
}

pub fn fixture(id: &str) -> Result<Option<Fixture>, CorpusError> {
    Ok(load_corpus()?.into_iter().find(|f| f.id == id))
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub id: String,
    pub checks: Vec<Check>,
    /// Wall time; left out of serialized reports to keep them reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl FixtureReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Log(Vec<Check>);

impl Log {
    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> bool {
        self.0.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
        pass
    }

    /// Records an error as a failed check and yields `None`.
    fn ok<V, E: std::fmt::Display>(&mut self, name: &str, r: Result<V, E>) -> Option<V> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(name, false, e.to_string());
                None
            }
        }
    }

    fn verdict<E: std::fmt::Display>(&mut self, name: &str, r: Result<bool, E>, detail: impl Into<String>) -> bool {
        match r {
            Ok(b) => self.push(name, b, detail),
            Err(e) => self.push(name, false, e.to_string()),
        }
    }
}

/// Probe pairs used when certifying fixture templates.
pub const FIXTURE_PROBES: [Probe; 3] = Probe::ALL;

/// Replays one fixture through classify, factor, conditions, invariants,
/// every reduction method, the solver and residual certification.
pub fn run_fixture<T: Scalar>(fx: &Fixture, cfg: &OracleConfig<T>) -> FixtureReport {
    let start = Instant::now();
    let mut log = Log(Vec::new());
    run_into(fx, cfg, &mut log);
    FixtureReport {
        id: fx.id.clone(),
        checks: log.0,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn run_into<T: Scalar>(fx: &Fixture, cfg: &OracleConfig<T>, log: &mut Log) {
    let Some(p) = log.ok("parse", fx.parse_pde()) else { return };
    let Some(region) = log.ok("region", fx.sample_region::<T>()) else { return };
    let Some(kind) = log.ok("parse", fx.kind()) else { return };
    let src = |t: &str| fx.source(t);

    let Some(cls) = log.ok("classification", classify(&p, &region, cfg)) else { return };
    log.push("classification", cls.kind == kind, format!("got {}", cls.kind.name()));
    if !matches!(kind, Kind::Hyperbolic | Kind::Parabolic) {
        return;
    }

    let Some(lp) = log.ok("lambdas", lambdas(&p, &region, cfg)) else { return };
    for (name, want, got) in [("lambda_plus", &fx.lambda_plus, &lp.plus), ("lambda_minus", &fx.lambda_minus, &lp.minus)] {
        let Some(want) = want else { continue };
        let Some(got) = got else {
            log.push(name, false, "no slope computed");
            continue;
        };
        let Some(w) = log.ok(name, src(want)) else { continue };
        log.verdict(name, equiv(got, &w, &region, cfg), format!("got {}", got.pretty()));
    }
    if let Some(Some(axis)) = log.ok("axis", fx.expected_axis()) {
        log.push("axis", lp.axis == axis, format!("got {:?}", lp.axis));
    }
    log.push("degenerate", lp.degenerate == fx.degenerate, format!("got {}", lp.degenerate));

    let Some(pair) = log.ok("factor", factor_principal(&p, &region, cfg)) else { return };
    factor_checks(fx, &p, &pair, &region, cfg, log);

    let (Some(phi), psi) = (
        log.ok("invariants", fx.phi_expr()).flatten(),
        log.ok("invariants", fx.psi_expr()).flatten(),
    ) else {
        return;
    };
    invariant_checks(&pair, &phi, psi.as_ref(), &region, cfg, log);
    if let Some([want_phi, want_psi]) = &fx.principal_on_invariants {
        for (name, inv, want) in [("principal_phi", &phi, want_phi), ("principal_psi", psi.as_ref().unwrap_or(&phi), want_psi)] {
            if let Some(w) = log.ok(name, src(want)) {
                log.verdict(name, equiv(&p.principal(inv), &w, &region, cfg), "");
            }
        }
    }

    let Some(inverse) = log.ok("map", fx.inverse_exprs()) else { return };
    let Some(map) = log.ok("map", build_map(&p, &pair, &phi, psi.as_ref(), inverse, &region, cfg)) else {
        return;
    };
    log.push("map", true, "validated");
    if map.inverse.is_some() {
        inverse_checks(fx, &p, &pair, &map, &region, cfg, log);
    }

    let Some(forms) = log.ok("reduce", reduce_all(&p, &pair, &map, &region, cfg)) else { return };
    let names: Vec<_> = forms.iter().map(|f| f.method.name()).collect();
    log.verdict("cross_validate", cross_validate(&forms, &region, cfg), names.join(","));
    if let Some(text) = &fx.canonical {
        for f in &forms {
            let name = format!("canonical:{}", f.method.name());
            log.verdict(&name, matches_equation(f, &map, text, &region, cfg), f.to_string());
        }
    }

    let mut form = forms[0].clone();
    if let Some(text) = &fx.canonical {
        if map.inverse.is_some() {
            let _ = form.adopt_rendering(&map, text, &region, cfg);
        }
    }
    match solve_canonical(&form, &region, cfg) {
        Err(e) => {
            log.push("solve", false, e.to_string());
        }
        Ok(None) => {
            log.push("solve", !fx.solvable, "no catalog entry");
        }
        Ok(Some(sol)) => {
            let back = pull_back(&sol, &map);
            let ok = fx.solvable && certified(&p, &back, &region, cfg, log, "solve_certified");
            log.push("solve", ok, back.text());
        }
    }

    if let Some(Some(tpl)) = log.ok("solution", fx.solution_template()) {
        certified(&p, &tpl, &region, cfg, log, "solution_certified");
    }
}

fn certified<T: Scalar>(
    p: &Pde2,
    sol: &GeneralSolution,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
    log: &mut Log,
    name: &str,
) -> bool {
    let probes: &[Probe] = if sol.slots.is_empty() { &FIXTURE_PROBES[..1] } else { &FIXTURE_PROBES };
    let Some(reports) = log.ok(name, certify(p, sol, probes, region, cfg, 3)) else {
        return false;
    };
    let worst = reports.iter().map(|r| r.max_residual.as_f64()).fold(0.0, f64::max);
    let ok = reports.iter().all(|r| r.pass && r.fd.pass);
    log.push(name, ok, format!("{} max residual {worst:.3e}", sol.text()))
}

fn factor_checks<T: Scalar>(
    fx: &Fixture,
    p: &Pde2,
    pair: &FactorPair,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
    log: &mut Log,
) {
    let vars = fx.var_pair();
    let probe = (vars.xe().powi(2) * vars.ye() + Expr::sin(vars.ye()) * Expr::exp(vars.xe())).simplify();
    log.verdict(
        "factor_identity",
        vanishes(&(pair.principal(&probe) - p.principal(&probe)), region, cfg),
        "",
    );
    let want = &fx.conditions;
    match pair.kind {
        Kind::Hyperbolic => {
            let Some(rep) = log.ok("conditions", commutator_report(p, pair, None, region, cfg)) else { return };
            for (name, w, got) in [
                ("commutes", want.commutes, rep.commutes),
                ("residue_free_minus", want.residue_free_minus, rep.residue_free_minus),
                ("residue_free_plus", want.residue_free_plus, rep.residue_free_plus),
            ] {
                if let Some(w) = w {
                    log.push(name, w == got, format!("got {got}"));
                }
            }
            if let Some([rm, rp]) = &fx.residues {
                for (name, want, got) in [("r_minus", rm, &rep.r_minus), ("r_plus", rp, &rep.r_plus)] {
                    if let Some(w) = log.ok(name, fx.source(want)) {
                        log.verdict(name, equiv(got, &w, region, cfg), format!("got {}", got.pretty()));
                    }
                }
            }
        }
        _ => {
            if let Some(w) = want.lambda_residue_zero {
                let res = parabolic_lambda_residue(&pair.plus).unwrap_or_else(Expr::zero);
                match vanishes(&res, region, cfg) {
                    Ok(got) => log.push("lambda_residue_zero", got == w, format!("L[Lambda] = {}", res.pretty())),
                    Err(e) => log.push("lambda_residue_zero", false, e.to_string()),
                };
            }
        }
    }
}

fn invariant_checks<T: Scalar>(
    pair: &FactorPair,
    phi: &Expr,
    psi: Option<&Expr>,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
    log: &mut Log,
) {
    log.verdict("phi_invariant", verify_invariant(&pair.plus, phi, region, cfg), phi.pretty());
    if pair.kind == Kind::Hyperbolic {
        if let Some(psi) = psi {
            log.verdict("psi_invariant", verify_invariant(&pair.minus, psi, region, cfg), psi.pretty());
        }
    }
    // a catalog hit must describe the same curves as the stored invariant
    for ode in char_odes(pair) {
        let Some(inv) = solve_invariant(&ode, region, cfg) else { continue };
        let stored = match ode.family {
            crate::chars::Family::Minus => psi,
            _ => Some(phi),
        };
        if let Some(s) = stored {
            let name = format!("catalog_{}", ode.family.name());
            log.verdict(&name, invariant_equivalent(&inv.phi, s, region, cfg), inv.phi.pretty());
        }
    }
}

fn inverse_checks<T: Scalar>(
    fx: &Fixture,
    p: &Pde2,
    pair: &FactorPair,
    map: &TransitionMap,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
    log: &mut Log,
) {
    let Some(rep) = log.ok("inverse_conditions", inverse_condition_report(map, pair.kind, Some((p, pair)), region, cfg)) else {
        return;
    };
    if let Some(agree) = rep.agrees_with_factors {
        log.push("inverse_twins", agree, "");
    }
    let want = &fx.conditions;
    for (name, w, got) in [
        ("inverse_commutes", want.commutes, rep.commutes),
        ("inverse_residue_free_minus", want.residue_free_minus, rep.residue_free_minus),
        ("inverse_residue_free_plus", want.residue_free_plus, rep.residue_free_plus),
        ("inverse_lambda_residue_zero", want.lambda_residue_zero, rep.lambda_residue_zero),
    ] {
        if let (Some(w), Some(g)) = (w, got) {
            log.push(name, w == g, format!("got {g}"));
        }
    }
    if let Some(g) = rep.psi_identity {
        log.push("inverse_psi_identity", g, "");
    }
}
