mod support;

use std::collections::BTreeMap;

use proptest::prelude::*;

use msc_tools::cmsc::{Action, CMsc, MsgId, ProcessId, Universe};
use msc_tools::emso::ast::*;
use msc_tools::emso::{
    bounded_models, evaluate, evaluate_limited, evaluate_with, parse_formula, print_formula, Assignment, EvalError,
    EvalLimits,
};
use support::*;

fn two_way() -> CMsc {
    complete_pq(4)
        .into_iter()
        .find(|m| {
            m.len() == 4
                && (0..m.processes().len()).all(|pi| {
                    let c = m.chain(pi);
                    m.action(c.start).is_send() && m.action(c.start + 1).is_receive()
                })
        })
        .unwrap()
}

#[test]
fn phi_holds_on_the_two_way_exchange() {
    assert!(evaluate(&phi(), &two_way()).unwrap());
    assert!(!evaluate(&phi(), &fig1()["M6"]).unwrap());
}

#[test]
fn finite_sentence_holds_on_m4() {
    let mut ctx = msc_tools::closure::ClosureContext::new(&pq(), &ab());
    let fin = msc_tools::closure::finite_sentence(&mut ctx);
    assert!(evaluate(&fin, &fig1()["M4"]).unwrap());
    assert!(evaluate(&fin, &fig1()["M6"]).unwrap());
}

#[test]
fn free_variable_assignment() {
    let m4 = &fig1()["M4"];
    let (x, y) = (var("x"), var("y"));
    let s = m4.find_event("s").unwrap();
    let r = m4.find_event("r").unwrap();
    let sigma = Assignment::new().with(&x, s).with(&y, r);
    assert!(evaluate_with(&msg(&x, &y), m4, &sigma).unwrap());
    assert!(!evaluate_with(&msg(&y, &x), m4, &sigma).unwrap());
    assert!(matches!(
        evaluate_with(&msg(&x, &var("z")), m4, &sigma),
        Err(EvalError::Unbound(_))
    ));
}

#[test]
fn order_is_antisymmetric_everywhere() {
    let (x, y) = (var("x"), var("y"));
    let body = and(vec![le(&x, &y), le(&y, &x), not(eq(&x, &y))]);
    for m in Universe::new(&pq(), &ab(), 3).enumerate() {
        for i in 0..m.len() {
            for j in 0..m.len() {
                let sigma = Assignment::new().with(&x, i).with(&y, j);
                assert!(!evaluate_with(&body, &m, &sigma).unwrap());
            }
        }
    }
}

#[test]
fn maximal_events_bound_all_of_m4() {
    // every event lies below one of two events, with W taken as everything
    let m4 = &fig1()["M4"];
    let (x1, x2, y) = (var("x1"), var("x2"), var("y"));
    let w = set_var("W");
    let psi = exists(
        &x1,
        exists(&x2, forall(&y, iff(member(&y, &w), or(vec![le(&y, &x1), le(&y, &x2)])))),
    );
    let sigma = Assignment::new().with_set(&w, 0..m4.len());
    assert!(evaluate_with(&psi, m4, &sigma).unwrap());
}

#[test]
fn characteristic_sentence_models() {
    let f = fig1();
    let mut ctx = msc_tools::closure::ClosureContext::new(&pq(), &ab());
    let phi2 = msc_tools::closure::formula_for_cmsc(&f["M2"], &mut ctx);
    let u = Universe::new(&pq(), &[MsgId::new("a")], 2);
    let models = bounded_models(&phi2, &u, EvalLimits::default()).unwrap();
    assert_eq!(keys(&models), canon([&f["M2"]]));
    let fin = msc_tools::closure::finite_sentence(&mut ctx);
    let all = bounded_models(&fin, &u, EvalLimits::default()).unwrap();
    assert_eq!(keys(&all), canon(&u.enumerate()));
}

#[test]
fn limits_are_enforced() {
    let limits = EvalLimits {
        max_events: 1,
        ..EvalLimits::default()
    };
    assert!(matches!(
        evaluate_limited(&phi(), &fig1()["M4"], limits),
        Err(EvalError::TooManyEvents { .. })
    ));
    let sets = EmsoFormula::new(vec![set_var("A"), set_var("B")], tt());
    let limits = EvalLimits {
        max_set_vars: 1,
        ..EvalLimits::default()
    };
    assert!(matches!(
        evaluate_limited(&sets, &fig1()["M4"], limits),
        Err(EvalError::TooManySetVars { .. })
    ));
}

#[test]
fn text_round_trip_of_phi() {
    let text = print_formula(&phi());
    let again = parse_formula(&text).unwrap();
    assert_eq!(print_formula(&again), text);
    assert!(parse_formula("(and (le x").is_err());
}

// ------------------------------------------------------ random formulas

fn atom_strategy() -> impl Strategy<Value = Formula> {
    let v = prop_oneof![Just(var("x")), Just(var("y"))];
    let p = prop_oneof![Just(ProcessId::new("p")), Just(ProcessId::new("q"))];
    let m = prop_oneof![Just(MsgId::new("a")), Just(MsgId::new("b"))];
    let a = prop_oneof![
        Just("p!q"), Just("p?q"), Just("q!p"), Just("q?p")
    ]
    .prop_map(|s| s.parse::<Action>().unwrap());
    prop_oneof![
        (v.clone(), v.clone()).prop_map(|(a, b)| le(&a, &b)),
        (v.clone(), v.clone()).prop_map(|(a, b)| le_proc(&a, &b)),
        (v.clone(), v.clone()).prop_map(|(a, b)| lt_proc(&a, &b)),
        (v.clone(), v.clone()).prop_map(|(a, b)| next(&a, &b)),
        (v.clone(), v.clone()).prop_map(|(a, b)| msg(&a, &b)),
        (v.clone(), v.clone()).prop_map(|(a, b)| eq(&a, &b)),
        (v.clone(), a).prop_map(|(x, a)| act(&x, &a)),
        (v.clone(), p).prop_map(|(x, p)| on_proc(&x, &p)),
        (v.clone(), m).prop_map(|(x, m)| lbl(&x, &m)),
        (v.clone(), prop_oneof![Just(set_var("X")), Just(set_var("Z"))]).prop_map(|(x, s)| member(&x, &s)),
    ]
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    atom_strategy().prop_recursive(4, 24, 3, |inner| {
        let v = prop_oneof![Just(var("x")), Just(var("y"))];
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(and),
            prop::collection::vec(inner.clone(), 0..3).prop_map(or),
            inner.clone().prop_map(not),
            (v.clone(), inner.clone()).prop_map(|(x, f)| exists(&x, f)),
            (v, inner).prop_map(|(x, f)| forall(&x, f)),
        ]
    })
}

fn sentence(body: Formula) -> EmsoFormula {
    EmsoFormula::new(vec![set_var("X"), set_var("Z")], exists(&var("x"), forall(&var("y"), body)))
}

fn models() -> Vec<CMsc> {
    Universe::new(&pq(), &ab(), 3).enumerate()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn evaluator_agrees_with_reference(body in formula_strategy(), pick in 0usize..338) {
        let all = models();
        let m = &all[pick % all.len()];
        let phi = sentence(body);
        prop_assert_eq!(evaluate(&phi, m).unwrap(), naive_eval(&phi, m));
    }

    #[test]
    fn free_variables_agree_with_reference(body in formula_strategy(), pick in 0usize..338, xi in 0usize..3, yi in 0usize..3, bits in 0u64..64) {
        let all = models();
        let m = &all[pick % all.len()];
        let (x, y) = (var("x"), var("y"));
        let n = m.len();
        let sx: Vec<usize> = (0..n).filter(|e| bits >> e & 1 == 1).collect();
        let sz: Vec<usize> = (0..n).filter(|e| bits >> (e + 3) & 1 == 1).collect();
        let sigma = Assignment::new()
            .with(&x, xi % n)
            .with(&y, yi % n)
            .with_set(&set_var("X"), sx.clone())
            .with_set(&set_var("Z"), sz.clone());
        let fo = BTreeMap::from([(x, xi % n), (y, yi % n)]);
        let sets = BTreeMap::from([(set_var("X"), sx.into_iter().collect()), (set_var("Z"), sz.into_iter().collect())]);
        prop_assert_eq!(evaluate_with(&body, m, &sigma).unwrap(), naive_holds(m, &body, &fo, &sets));
    }

    #[test]
    fn negation_flips_sentences(body in formula_strategy(), pick in 0usize..338, bits in 0u64..64) {
        let all = models();
        let m = &all[pick % all.len()];
        let closed = forall(&var("x"), exists(&var("y"), body));
        let sigma = Assignment::new()
            .with_set(&set_var("X"), (0..m.len()).filter(|e| bits >> e & 1 == 1))
            .with_set(&set_var("Z"), (0..m.len()).filter(|e| bits >> (e + 3) & 1 == 1));
        let pos = evaluate_with(&closed, m, &sigma).unwrap();
        prop_assert_eq!(evaluate_with(&not(closed), m, &sigma).unwrap(), !pos);
    }

    #[test]
    fn printed_formulas_parse_back(body in formula_strategy()) {
        let phi = sentence(body);
        let text = print_formula(&phi);
        let again = parse_formula(&text).unwrap();
        prop_assert_eq!(print_formula(&again), text);
    }
}
