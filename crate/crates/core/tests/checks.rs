use concmeter_core::concentration::empirical_median;
use concmeter_core::normspace::containment_lambda;
use concmeter_core::transport::pi_map;
use concmeter_core::verify::{CheckConfig, Verdict, CHECK_IDS};
use concmeter_core::{sample, MeasureSpec, NormSpec};

fn minimal(id: &str) -> String {
    let body = match id {
        "prop_dec" => {
            r#""measure":{"family":"gaussian","dim":4},"source_metric":{"kind":"lp","p":2,"dim":4},
               "map":{"map":"projection","coords":[0,1]},"target_metric":{"kind":"lp","p":2,"dim":2},
               "lip":1,"profile":{"name":"gaussian"},"eps":[0.5,1]"#
        }
        "thm_main" => {
            r#""measure":{"family":"haar_sphere","dim":8},"k":{"kind":"lp","p":2,"dim":8},
               "l":{"kind":"lp","p":1,"dim":8},"eps":{"from":1,"to":8,"count":8}"#
        }
        "inclusion_lemma" => {
            r#""measure":{"family":"uniform_ball","p":2,"dim":8},"k":{"kind":"lp","p":2,"dim":8},
               "l":{"kind":"lp","p":1,"dim":8},"eps":0.5,"probes":2000"#
        }
        "ledoux_lemma" => {
            r#""measure":{"family":"haar_sphere","dim":8},"metric":{"kind":"lp","p":2,"dim":8},"pairs":50"#
        }
        "cor_farlinf" => r#""n":4,"eps":[0.2,0.6]"#,
        "thm_farlinf" => {
            r#""measure":{"family":"uniform_ball","p":"inf","dim":4},"norm":{"kind":"lp","p":"inf","dim":4},
               "functionals":{"kind":"coordinates"},"d":1,"eps":[0.2,0.5]"#
        }
        "thm_main1" => r#""p":2,"n":8,"eps":{"from":0.5,"to":20,"count":10,"log":true},"rate_fit":null"#,
        "median_law" => r#""n":4,"p":1"#,
        "median_sandwich" => {
            r#""measure":{"family":"gaussian","dim":4},"k":{"kind":"lp","p":2,"dim":4},"l":{"kind":"lp","p":1,"dim":4}"#
        }
        "pi_lipschitz" => {
            r#""measure":{"family":"gaussian","dim":4},"k":{"kind":"lp","p":2,"dim":4},"l":{"kind":"lp","p":1,"dim":4},"pairs":2000"#
        }
        other => panic!("no example for {other}"),
    };
    format!(r#"{{"check":"{id}","samples":4000,"seed":11,{body}}}"#)
}

#[test]
fn every_check_parses_runs_and_round_trips() {
    for id in CHECK_IDS {
        let cfg: CheckConfig = serde_json::from_str(&minimal(id)).unwrap_or_else(|e| panic!("{id}: {e}"));
        assert_eq!(cfg.id(), *id);
        let again: CheckConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg, "{id}");
        let first = cfg.run().unwrap_or_else(|e| panic!("{id}: {e}"));
        let second = again.run().unwrap();
        assert_eq!(first.to_json(), second.to_json(), "{id} is not deterministic");
        assert_ne!(first.verdict, Verdict::Fail, "{id}: {}", first.to_json());
        assert_eq!(first.inputs, serde_json::to_value(&cfg).unwrap());
    }
}

#[test]
fn unknown_keys_are_rejected_inside_checks() {
    let bad = minimal("median_law").replace(r#""p":1"#, r#""p":1,"tol":0.1"#);
    assert!(serde_json::from_str::<CheckConfig>(&bad).is_err());
}

#[test]
fn precondition_bookkeeping_matches_checked_count() {
    for id in ["thm_main", "thm_main1", "cor_farlinf", "prop_dec"] {
        let r: CheckConfig = serde_json::from_str(&minimal(id)).unwrap();
        let r = r.run().unwrap();
        let satisfied = r.precondition_satisfied.iter().filter(|&&b| b).count();
        assert_eq!(satisfied, r.violations.checked, "{id}");
        for column in r.grid.values() {
            assert_eq!(column.len(), r.precondition_satisfied.len(), "{id}");
        }
    }
}

#[test]
fn larger_prefactor_never_turns_pass_into_fail() {
    let base = minimal("thm_main");
    let r0 = serde_json::from_str::<CheckConfig>(&base).unwrap().run().unwrap();
    for c in [2.0, 8.0] {
        let cfg = base.replace(r#""eps""#, &format!(r#""profile":{{"name":"sphere","C":{c}}},"eps""#));
        let r = serde_json::from_str::<CheckConfig>(&cfg).unwrap().run().unwrap();
        if r0.verdict == Verdict::Pass {
            assert_ne!(r.verdict, Verdict::Fail);
        }
        // A larger constant only shrinks the set where the hypothesis holds.
        for (a, b) in r.precondition_satisfied.iter().zip(&r0.precondition_satisfied) {
            assert!(!a || *b);
        }
    }
}

#[test]
fn collinear_and_identical_probes_respect_the_chain() {
    let n = 16;
    let k = NormSpec::l2(n);
    let c = containment_lambda(&k, &NormSpec::l1(n)).unwrap();
    let l = c.normalize(&NormSpec::l1(n)).unwrap();
    let batch = sample(&MeasureSpec::uniform_ball(k.clone()).unwrap(), 20_000, 3).unwrap();
    let pts = batch.points();
    let mk = empirical_median(&pts.map_rows(|x| k.norm(x))).unwrap().value;
    let ml = empirical_median(&pts.map_rows(|x| l.norm(x))).unwrap().value;
    let delta = 0.5 / (7.0 * mk);
    let mut seen = 0;
    for y in pts.rows() {
        let (ny, nl) = (k.norm(y), l.norm(y));
        if (ny - mk).abs() >= delta * mk || (nl - ml).abs() >= delta * ml {
            continue;
        }
        seen += 1;
        let py = pi_map(&k, &l, y);
        assert_eq!(pi_map(&k, &l, y), py);
        for sign in [1.0, -1.0] {
            let f = 1.0 + sign * delta * ml / (c.lambda * ny);
            let x: Vec<f64> = y.iter().map(|v| v * f).collect();
            let px = pi_map(&k, &l, &x);
            let d: Vec<f64> = px.iter().zip(&py).map(|(a, b)| a - b).collect();
            assert!(l.norm(&d) <= 7.0 * delta * mk * (1.0 + 1e-12));
        }
    }
    assert!(seen > 1000, "{seen}");
}
