mod common;

use derivkit::expr::{SymbolTable, GREEK_POOL};
use derivkit::ops::{replay, Derivation};
use derivkit::perturb::{perturb_record, perturb_records, PerturbError, PerturbSettings};
use derivkit::prompt::{estimate_tokens, prompt_for_record};
use derivkit::record::{DerivationRecord, PerturbationKind as K};

/// For each name, the sides of the equations it appears on; sorted.
fn signatures(d: &Derivation) -> Vec<Vec<(usize, u8)>> {
    let mut out: Vec<Vec<(usize, u8)>> = d
        .used_names()
        .iter()
        .map(|n| {
            let mut sig = Vec::new();
            for (i, s) in d.steps.iter().enumerate() {
                let sides = [&s.equation.lhs, &s.equation.rhs];
                for (k, e) in sides.into_iter().enumerate() {
                    if e.free_symbols().contains(n) {
                        sig.push((i, k as u8));
                    }
                }
                if s.operand.as_ref().is_some_and(|o| o.free_symbols().contains(n)) {
                    sig.push((i, 2));
                }
            }
            sig
        })
        .collect();
    out.sort();
    out
}

fn setup() -> (Vec<DerivationRecord>, SymbolTable, PerturbSettings) {
    (common::records(31, 300), SymbolTable::default(), PerturbSettings::default())
}

#[test]
fn exchange_twice_restores_the_record() {
    let (recs, t, s) = setup();
    for r in &recs {
        let once = perturb_record(K::EE, r, &t, &s).unwrap();
        assert_eq!(once.perturbation, Some(K::EE));
        assert_eq!(once.static_id, Some(r.id));
        for (a, b) in once.steps.iter().zip(&r.steps) {
            let (l, rhs) = b.latex.split_once(" = ").unwrap();
            assert_eq!(a.latex, format!("{rhs} = {l}"));
        }
        let twice = perturb_record(K::EE, &once, &t, &s).unwrap();
        assert_eq!(serde_json::to_string(&twice).unwrap(), serde_json::to_string(r).unwrap());
    }
}

#[test]
fn renaming_is_an_injective_map_into_the_pool() {
    let (recs, t, s) = setup();
    let mut ok = 0;
    for r in &recs {
        let v = match perturb_record(K::VR, r, &t, &s) {
            Ok(v) => v,
            Err(PerturbError::TooManySymbols { .. } | PerturbError::TokenLimit { .. }) => continue,
            Err(e) => panic!("record {}: {e}", r.id),
        };
        ok += 1;
        let d = r.to_derivation(&t).unwrap();
        let p = v.to_derivation(&t).unwrap();
        let before = d.used_names();
        let after = p.used_names();
        assert_eq!(before.len(), after.len(), "record {}", r.id);
        assert!(after.len() <= 11);
        assert!(after.iter().all(|n| GREEK_POOL.contains(&n.as_str())));
        // An injective renaming preserves where each name occurs, so the
        // occurrence signatures of the two name sets must agree.
        assert_eq!(signatures(&d), signatures(&p), "record {}", r.id);
        for (a, b) in d.steps.iter().zip(&p.steps) {
            assert_eq!(a.op, b.op);
            assert_eq!(a.parents, b.parents);
            assert_eq!(a.equation.lhs.shape(), b.equation.lhs.shape());
            assert_eq!(a.equation.rhs.shape(), b.equation.rhs.shape());
        }
        assert!(replay(&p).valid, "record {}", r.id);
    }
    assert!(ok >= 290, "only {ok} records renamed");
}

#[test]
fn step_removal_only_drops_clauses() {
    let (recs, t, s) = setup();
    let mut ok = 0;
    for r in &recs {
        let base = prompt_for_record(r, &t).unwrap().unwrap();
        match perturb_record(K::SR, r, &t, &s) {
            Ok(sr) => {
                ok += 1;
                let p = prompt_for_record(&sr, &t).unwrap().unwrap();
                assert!(!p.prompt.contains("then derive"));
                assert!(base.prompt.contains("then derive"));
                assert!(estimate_tokens(&p.prompt) < estimate_tokens(&base.prompt));
                assert_eq!(p.target, base.target);
                assert_eq!(p.perturbation, Some(K::SR));
                assert_eq!(p.static_id, r.id);
            }
            Err(PerturbError::NoIntermediates) => assert!(!base.prompt.contains("then derive")),
            Err(e) => panic!("record {}: {e}", r.id),
        }
    }
    assert!(ok > 100);
}

#[test]
fn alternative_goal_changes_only_the_last_step() {
    let (recs, t, s) = setup();
    let out = perturb_records(K::AG, &recs, &t, &s);
    let mut ok = 0;
    for (r, a) in recs.iter().zip(out) {
        let a = match a {
            Ok(a) => a,
            Err(PerturbError::Exhausted { .. }) => continue,
            Err(e) => panic!("record {}: {e}", r.id),
        };
        ok += 1;
        let n = r.steps.len();
        assert_eq!(a.steps.len(), n);
        for (x, y) in a.steps[..n - 1].iter().zip(&r.steps[..n - 1]) {
            assert_eq!(x.latex, y.latex);
            assert_eq!(x.op, y.op);
            assert_eq!(x.parents, y.parents);
        }
        assert_ne!(a.steps[n - 1].latex, r.steps[n - 1].latex);
        assert!(replay(&a.to_derivation(&t).unwrap()).valid, "record {}", r.id);
    }
    assert!(ok >= 295, "only {ok} goals replaced");
}

#[test]
fn perturbing_twice_is_rejected() {
    let (recs, t, s) = setup();
    let v = perturb_record(K::AG, &recs[0], &t, &s).unwrap();
    assert!(matches!(perturb_record(K::VR, &v, &t, &s), Err(PerturbError::AlreadyPerturbed(K::AG))));
}

#[test]
fn perturbation_is_deterministic() {
    let (recs, t, s) = setup();
    for k in [K::VR, K::AG] {
        let a: Vec<_> = perturb_records(k, &recs[..40], &t, &s).into_iter().filter_map(Result::ok).collect();
        let b: Vec<_> = perturb_records(k, &recs[..40], &t, &s).into_iter().filter_map(Result::ok).collect();
        assert_eq!(a, b);
        let other = PerturbSettings { seed: 1, ..s.clone() };
        let c: Vec<_> = perturb_records(k, &recs[..40], &t, &other).into_iter().filter_map(Result::ok).collect();
        assert_ne!(a, c);
    }
}
