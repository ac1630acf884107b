//! One function per subcommand. Each returns a JSON report plus any
//! failed consistency checks; the caller maps those to exit code 2.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use robustfin_core::arbitrage::{
    detect_1pa, detect_class_s, detect_int_arbitrage, detect_local, detect_oa, detect_quasi_sure, detect_sa, detect_usa,
    detect_weak_and_classical, lemma_relations_check, verify_verdict, ArbitrageVerdict,
};
use robustfin_core::efficient_set::{aggregate, omega_star_oracle, verify_scheme, LimitPoint, SweepOrder};
use robustfin_core::exactlp::{check_certificate, LinearProgram, LpOutcome};
use robustfin_core::fixtures;
use robustfin_core::market::{is_martingale_measure, Market, PathSet};
use robustfin_core::oneperiod_poly::{
    price as poly_price, price_on_efficient_set, sa_check, sa_to_usa, strictly_positive_on_cell, supermartingale_exists, usa_check,
    usa_check_no_short, wflvr_check_compact, AffinePiece, PolyMarket, PolyWitness,
};
use robustfin_core::priors::{class_s_equivalence, ftap_quasi_sure, quasi_sure_support, robust_dmw, PriorSet};
use robustfin_core::random::{self, MarketParams};
use robustfin_core::superhedge::{
    backward_induction, capital_check, divergence_probe_ex32, duality_chain, extension_report, price_pathwise, price_quasisure, verify_result,
    Claim,
};
use robustfin_core::{ExtRat, Rat};

use crate::load::{lib, CliError};
use crate::ScopeSel;

pub struct Report {
    pub value: Value,
    pub problems: Vec<String>,
}

fn val<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn resolve_scope(m: &Market, sel: ScopeSel, priors: Option<&PriorSet>) -> Result<PathSet, CliError> {
    match sel {
        ScopeSel::Omega => Ok(m.all_paths()),
        ScopeSel::OmegaStar => Ok(omega_star_oracle(m, &m.all_paths()).map_err(lib)?.retained),
        ScopeSel::QuasiSure => {
            let p = priors.ok_or_else(|| CliError::Input("--scope quasi-sure requires --priors".into()))?;
            Ok(quasi_sure_support(p, m).paths)
        }
    }
}

fn check_verdict(m: &Market, v: &ArbitrageVerdict, problems: &mut Vec<String>) {
    for f in verify_verdict(m, v) {
        problems.push(format!("{:?}: {f}", v.notion));
    }
}

pub fn arbitrage(m: &Market, sel: ScopeSel, priors: Option<&PriorSet>, class_sets: Option<&[PathSet]>) -> Result<Report, CliError> {
    let scope = resolve_scope(m, sel, priors)?;
    let mut problems = Vec::new();
    let mut out = serde_json::Map::new();
    out.insert("command".into(), json!("arbitrage"));
    out.insert("scope".into(), val(&m.ids(&scope)));
    let mut verdicts = Vec::new();
    if !scope.is_empty() {
        for v in [detect_1pa(m, &scope), detect_oa(m, &scope), detect_sa(m, &scope), detect_usa(m, &scope)] {
            let v = v.map_err(lib)?;
            check_verdict(m, &v, &mut problems);
            verdicts.push(v);
        }
        if let Some(cs) = class_sets {
            let r = detect_class_s(m, &scope, cs).map_err(lib)?;
            for v in &r.per_set {
                check_verdict(m, v, &mut problems);
            }
            out.insert("class_s".into(), val(&r));
        }
    }
    if let Some(p) = priors {
        for v in [detect_quasi_sure(m, p), detect_int_arbitrage(m, p)] {
            let v = v.map_err(lib)?;
            check_verdict(m, &v, &mut problems);
            verdicts.push(v);
        }
        let wc = detect_weak_and_classical(m, p).map_err(lib)?;
        check_verdict(m, &wc.weak, &mut problems);
        // A classical arbitrage is witnessed row by row, one strategy per product.
        if wc.classical.present {
            for row in &wc.table {
                check_verdict(m, &row.verdict, &mut problems);
            }
        } else {
            check_verdict(m, &wc.classical, &mut problems);
        }
        out.insert("weak_classical".into(), val(&wc));
        let qs = quasi_sure_support(p, m);
        let mut local = Vec::new();
        for (t, nodes) in qs.node_support.iter().enumerate() {
            for &node in nodes.keys() {
                let v = detect_local(m, p, t, node).map_err(lib)?;
                check_verdict(m, &v, &mut problems);
                local.push(v);
            }
        }
        out.insert("local".into(), val(&local));
        let rel = lemma_relations_check(m, p, class_sets.unwrap_or(&[])).map_err(lib)?;
        problems.extend(rel.violations.iter().cloned());
        out.insert("relations".into(), val(&rel));
    }
    let present: serde_json::Map<String, Value> = verdicts.iter().map(|v| (val(&v.notion).as_str().unwrap_or("?").to_string(), json!(v.present))).collect();
    out.insert("present".into(), Value::Object(present));
    out.insert("verdicts".into(), val(&verdicts));
    Ok(Report { value: Value::Object(out), problems })
}

pub fn efficient_set(m: &Market, sel: ScopeSel, priors: Option<&PriorSet>) -> Result<Report, CliError> {
    let base = match sel {
        ScopeSel::OmegaStar => ScopeSel::Omega,
        s => s,
    };
    let scope = resolve_scope(m, base, priors)?;
    let mut problems = Vec::new();
    let oracle = omega_star_oracle(m, &scope).map_err(lib)?;
    if let Some(q) = &oracle.witness {
        if !is_martingale_measure(m, q, &oracle.retained).map_err(lib)?.holds {
            problems.push("witness is not a calibrated martingale measure".into());
        }
    }
    let mut out = json!({
        "command": "efficient-set",
        "scope": m.ids(&scope),
        "omega_star": m.ids(&oracle.retained),
        "removed": oracle.removed.iter().map(|(w, r)| json!({"path": m.path_id(*w), "reason": val(r)})).collect::<Vec<_>>(),
        "witness": val(&oracle.witness),
    });
    if m.num_options() == 0 {
        let agg = aggregate(m, &scope, &[], SweepOrder::Forward).map_err(lib)?;
        if agg.retained != oracle.retained {
            problems.push("separator aggregation disagrees with the max-support LP".into());
        }
        out["aggregation"] = val(&agg);
    } else {
        let rep = verify_scheme(m, &scope).map_err(lib)?;
        if !rep.agree {
            problems.push("partition scheme disagrees with the max-support LP".into());
        }
        problems.extend(rep.structural_failures.iter().cloned());
        out["scheme"] = val(&rep.scheme);
    }
    Ok(Report { value: out, problems })
}

pub fn ftap(m: &Market, p: &PriorSet, class_sets: Option<&[PathSet]>) -> Result<Report, CliError> {
    let mut reports = vec![ftap_quasi_sure(m, p).map_err(lib)?, robust_dmw(m, p).map_err(lib)?];
    if let Some(cs) = class_sets {
        reports.push(class_s_equivalence(m, p, cs).map_err(lib)?);
    }
    let problems: Vec<String> = reports.iter().filter(|r| !r.all_equivalent).map(|r| format!("{}: statements disagree", r.theorem)).collect();
    let value = json!({
        "command": "ftap",
        "all_equivalent": problems.is_empty(),
        "reports": val(&reports),
    });
    Ok(Report { value, problems })
}

fn sel_name(sel: ScopeSel) -> &'static str {
    match sel {
        ScopeSel::Omega => "omega",
        ScopeSel::OmegaStar => "omega-star",
        ScopeSel::QuasiSure => "quasi-sure",
    }
}

pub fn price(m: &Market, sel: ScopeSel, priors: Option<&PriorSet>, claim: &Claim) -> Result<Report, CliError> {
    let mut problems = Vec::new();
    let mut out = json!({"command": "price", "claim": claim.name, "scope": sel_name(sel)});
    if let (ScopeSel::QuasiSure, Some(p)) = (sel, priors) {
        let qs = price_quasisure(m, p, &claim.g).map_err(lib)?;
        problems.extend(verify_result(m, &claim.g, &qs.result));
        out["price"] = val(&qs.result.price);
        out["result"] = val(&qs);
        return Ok(Report { value: out, problems });
    }
    let scope = resolve_scope(m, sel, priors)?;
    if scope.is_empty() {
        out["price"] = val(&ExtRat::NegInf);
        out["note"] = json!("empty scope");
        return Ok(Report { value: out, problems });
    }
    let r = price_pathwise(m, &scope, &claim.g).map_err(lib)?;
    problems.extend(verify_result(m, &claim.g, &r));
    if sel == ScopeSel::OmegaStar && m.num_options() == 0 {
        let bi = backward_induction(m, &scope, &claim.g).map_err(lib)?;
        if bi.root != r.price {
            problems.push(format!("backward induction gives {} but the global LP gives {}", bi.root, r.price));
        }
        out["backward_induction"] = val(&bi);
    }
    out["price"] = val(&r.price);
    out["result"] = val(&r);
    Ok(Report { value: out, problems })
}

pub fn duality(m: &Market, p: &PriorSet, claim: &Claim) -> Result<Report, CliError> {
    let ch = duality_chain(m, p, &claim.g).map_err(lib)?;
    let mut problems = Vec::new();
    if ch.applicable && !ch.all_equal {
        problems.push("duality chain values differ".into());
    }
    if ch.converse_equal == Some(false) {
        problems.push("converse chain values differ".into());
    }
    let value = json!({"command": "duality-chain", "claim": claim.name, "chain": val(&ch)});
    Ok(Report { value, problems })
}

pub fn extension(m: &Market, sel: ScopeSel, priors: Option<&PriorSet>, claim: &Claim, limits: &[LimitPoint]) -> Result<Report, CliError> {
    let mut scope = resolve_scope(m, sel, priors)?;
    // Limit points are closure points, not scenarios.
    for l in limits {
        scope.remove(&l.path);
    }
    let rep = extension_report(m, &scope, &claim.g, limits).map_err(lib)?;
    let mut problems = Vec::new();
    if rep.efficient_nodes_ok && rep.assumption_3_4_ok && rep.assumption_3_6_ok && !rep.extension_holds {
        problems.push(format!("assumptions hold but {} differs from {}", rep.price_on_omega, rep.price_on_omega_star));
    }
    let value = json!({"command": "extension", "claim": claim.name, "scope": sel_name(sel), "report": val(&rep)});
    Ok(Report { value, problems })
}

pub fn poly(pm: &PolyMarket, claim: Option<(&str, &[AffinePiece])>) -> Result<Report, CliError> {
    let mut problems = Vec::new();
    let sa = sa_check(pm).map_err(lib)?;
    let usa = usa_check(pm).map_err(lib)?;
    let usa_ns = usa_check_no_short(pm).map_err(lib)?;
    if usa.present && !sa.present {
        problems.push("USA present without SA".into());
    }
    let mut out = json!({
        "command": "poly",
        "compact": pm.is_compact(),
        "closed": pm.all_closed(),
        "SA": val(&sa),
        "USA": val(&usa),
        "USA_no_short": val(&usa_ns),
    });
    if let Some(PolyWitness::Strategy(s)) = &sa.witness {
        if !(0..pm.cells.len()).all(|c| strictly_positive_on_cell(pm, s, c)) {
            problems.push("SA witness is not strictly positive on every cell".into());
        }
        if pm.all_closed() {
            let u = sa_to_usa(pm, s).map_err(lib)?;
            out["sa_to_usa"] = val(&u);
        }
    }
    // Supermartingale measures live on closure vertices, so only compact cells qualify.
    if pm.is_compact() {
        let sm = supermartingale_exists(pm).map_err(lib)?;
        if usa_ns.present == sm.present {
            problems.push("no-short USA and supermartingale measure agree".into());
        }
        out["SM_exists"] = val(&sm);
        out["WFLVR"] = val(&wflvr_check_compact(pm).map_err(lib)?);
    }
    if let Some((name, g)) = claim {
        let pr = poly_price(pm, g).map_err(lib)?;
        out["claim"] = json!(name);
        out["price"] = val(&pr.price);
        out["price_result"] = val(&pr);
        if sa.present {
            out["price_on_efficient_set"] = val(&price_on_efficient_set(pm, g).map_err(lib)?);
        }
    }
    Ok(Report { value: out, problems })
}

fn take(problems: &mut Vec<String>, r: Report) -> Value {
    problems.extend(r.problems);
    r.value
}

pub const EXAMPLES: &[&str] = &["binom", "ex31", "ex32", "ex35", "gap", "inta", "sausa"];

pub fn example(name: &str) -> Result<Report, CliError> {
    let mut problems = Vec::new();
    let value = match name {
        "gap" => {
            let m = fixtures::gap();
            let c = fixtures::gap_zero_indicator();
            let p12 = fixtures::gap_12_priors(&m);
            json!({
                "pathwise": take(&mut problems, price(&m, ScopeSel::Omega, None, &c)?),
                "quasi_sure": take(&mut problems, price(&m, ScopeSel::QuasiSure, Some(&p12), &c)?),
                "efficient_set": take(&mut problems, efficient_set(&m, ScopeSel::Omega, None)?),
            })
        }
        "binom" => {
            let m = fixtures::binom();
            let p = fixtures::binom_omega_priors(&m);
            let fair = fixtures::binom_with_fair_call();
            let pf = fixtures::binom_omega_priors(&fair);
            json!({
                "ftap": take(&mut problems, ftap(&m, &p, None)?),
                "call_price": take(&mut problems, price(&m, ScopeSel::Omega, None, &fixtures::binom_call())?),
                "with_fair_call": take(&mut problems, arbitrage(&fair, ScopeSel::Omega, Some(&pf), None)?),
            })
        }
        "inta" => {
            let m = fixtures::inta();
            let p = fixtures::inta_priors(&m);
            json!({"arbitrage": take(&mut problems, arbitrage(&m, ScopeSel::Omega, Some(&p), None)?)})
        }
        "ex35" => {
            let m = fixtures::ex35();
            let scope = fixtures::ex35_scope(&m);
            let limits = fixtures::ex35_limit_points(&m);
            let c = fixtures::ex35_claim(&m);
            let rep = extension_report(&m, &scope, &c.g, &limits).map_err(lib)?;
            let mut closure = scope.clone();
            closure.extend(limits.iter().map(|l| l.path));
            let capital = Rat::frac(1, 2);
            let (feasible, cert) = capital_check(&m, &closure, &c.g, &capital).map_err(lib)?;
            if feasible {
                problems.push("capital 1/2 superhedges on the closure".into());
            }
            json!({
                "assumption_3_6_ok": rep.assumption_3_6_ok,
                "separators": val(&rep.nodes.first().map(|n| n.separators.clone()).unwrap_or_default()),
                "price_on_omega_star": val(&rep.price_on_omega_star),
                "capital_check": {"capital": val(&capital), "feasible": feasible, "certificate": val(&cert)},
                "extension": val(&rep),
            })
        }
        "ex31" => {
            let pm = fixtures::ex31();
            let one = vec![AffinePiece { a: vec![Rat::zero()], b: Rat::one() }];
            json!({"poly": take(&mut problems, poly(&pm, Some(("one", &one)))?)})
        }
        "sausa" => json!({"poly": take(&mut problems, poly(&fixtures::sausa(), None)?)}),
        "ex32" => {
            let probes: Vec<Value> = [4u64, 25, 100, 400]
                .iter()
                .map(|&n| Ok(json!({"n": n, "min_h1": val(&divergence_probe_ex32(n).map_err(lib)?)})))
                .collect::<Result<_, CliError>>()?;
            json!({"probes": probes})
        }
        other => return Err(CliError::Input(format!("unknown example `{other}`; expected one of {}", EXAMPLES.join(", ")))),
    };
    let mut value = value;
    value["example"] = json!(name);
    Ok(Report { value, problems })
}

/// Re-checks every embedded `{lp, outcome}` pair by arithmetic alone.
pub fn verify(report: &Value) -> Report {
    fn walk(v: &Value, path: &str, checked: &mut usize, failed: &mut Vec<Value>) {
        match v {
            Value::Object(map) => {
                if let (Some(lp), Some(out)) = (map.get("lp"), map.get("outcome")) {
                    *checked += 1;
                    let parsed: Result<(LinearProgram, LpOutcome), _> =
                        serde_json::from_value(lp.clone()).and_then(|lp| Ok((lp, serde_json::from_value(out.clone())?)));
                    match parsed {
                        Ok((lp, out)) => {
                            let rep = check_certificate(&lp, &out);
                            if !rep.passed {
                                failed.push(json!({"at": path, "failures": rep.failures}));
                            }
                        }
                        Err(e) => failed.push(json!({"at": path, "failures": [format!("unreadable certificate: {e}")]})),
                    }
                }
                for (k, x) in map {
                    walk(x, &format!("{path}/{k}"), checked, failed);
                }
            }
            Value::Array(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(x, &format!("{path}/{i}"), checked, failed);
                }
            }
            _ => {}
        }
    }
    let (mut checked, mut failed) = (0, Vec::new());
    walk(report, "", &mut checked, &mut failed);
    let problems = failed.iter().map(|f| format!("certificate at {} fails", f["at"].as_str().unwrap_or(""))).collect();
    Report { value: json!({"command": "verify", "checked": checked, "failed": failed}), problems }
}

/// Seeded consistency sweep over random markets, priors and claims.
pub fn random_suite(seed: u64, count: usize) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut problems = Vec::new();
    let (mut arbitrage_free, mut chains) = (0, 0);
    for i in 0..count {
        let m = random::market(&mut rng, &MarketParams::default());
        let p = random::priors(&mut rng, &m);
        let g = random::claim(&mut rng, &m);
        let sch = verify_scheme(&m, &m.all_paths()).map_err(lib)?;
        if !sch.agree || !sch.structural_failures.is_empty() {
            problems.push(format!("instance {i}: efficient-set constructions disagree"));
        }
        for r in [ftap_quasi_sure(&m, &p).map_err(lib)?, robust_dmw(&m, &p).map_err(lib)?] {
            if !r.all_equivalent {
                problems.push(format!("instance {i}: {} statements disagree", r.theorem));
            }
        }
        let ch = duality_chain(&m, &p, &g).map_err(lib)?;
        if ch.applicable {
            arbitrage_free += 1;
            chains += usize::from(ch.converse.is_some());
            if !ch.all_equal || ch.converse_equal == Some(false) {
                problems.push(format!("instance {i}: duality chain values differ"));
            }
        }
    }
    let value = json!({
        "command": "random",
        "seed": seed,
        "instances": count,
        "no_quasi_sure_arbitrage": arbitrage_free,
        "converse_chains": chains,
        "violations": problems,
    });
    Ok(Report { value, problems })
}
