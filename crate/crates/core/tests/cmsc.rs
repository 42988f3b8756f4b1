mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use msc_tools::cmsc::{Action, CMsc, Condition, Event, MsgId, ProcessId, RawCmsc, Universe};
use support::*;

fn procs(names: &[&str]) -> Vec<ProcessId> {
    names.iter().map(|p| ProcessId::new(p)).collect()
}

fn ev(id: &str, a: &str, m: Option<&str>) -> Event {
    Event::new(id, a.parse::<Action>().unwrap(), m.map(MsgId::new))
}

#[test]
fn m1_is_valid_with_one_unmatched_event() {
    let m1 = &fig1()["M1"];
    let unm: Vec<&str> = m1.unmatched().map(|i| m1.event(i).id.as_str()).collect();
    assert_eq!(unm, ["e2"]);
}

#[test]
fn single_unmatched_send_is_valid() {
    let m = raw_single("p!q", "a");
    assert_eq!(m.len(), 1);
    assert!(!m.is_msc());
}

#[test]
fn missing_label_on_unmatched_event() {
    let mut raw = fig1()["M1"].to_raw();
    for e in raw.events.iter_mut() {
        e.message = None;
    }
    let err = raw.validate().unwrap_err();
    assert_eq!(err.condition(), Condition::MessageDomain);
    assert!(err.to_string().contains("dom(μ) ≠ unm(M)"), "{err}");
}

#[test]
fn msc_predicate() {
    let f = fig1();
    assert!(f["M4"].is_msc());
    assert!(f["M6"].is_msc());
    assert!(!f["M2"].is_msc());
}

#[test]
fn connectivity_of_the_examples() {
    let f = fig1();
    for name in ["M1", "M2", "M3", "M4", "M6"] {
        assert!(f[name].connected(), "{name}");
    }
    assert!(!f["M5"].connected());
    assert!(f["M5"].weakly_connected());
    assert!(f["M4"].weakly_connected());
}

#[test]
fn one_process_is_connected() {
    let raw = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        vec![ev("x", "p!q", Some("a")), ev("y", "p?q", Some("b")), ev("z", "p!q", Some("a"))],
        vec![],
    );
    assert!(raw.validate().unwrap().connected());
}

#[test]
fn two_messages_are_connected() {
    assert!(fig1()["M6"].connected());
}

#[test]
fn independent_sends_are_not_weakly_connected() {
    let raw = RawCmsc::from_lines(
        procs(&["p", "q", "r", "s"]),
        ab(),
        vec![ev("x", "p!q", Some("a")), ev("y", "r!s", Some("a"))],
        vec![],
    );
    let m = raw.validate().unwrap();
    assert!(!m.weakly_connected());
    assert!(!m.connected());
}

#[test]
fn communication_graphs() {
    let f = fig1();
    let g = f["M4"].communication_graph();
    assert_eq!(g.nodes, procs(&["p", "q"]).into_iter().collect());
    assert_eq!(g.edges.len(), 1);
    let g5 = f["M5"].communication_graph();
    assert_eq!(g5.edges, g.edges);
}

#[test]
fn single_process_graph_has_no_edges() {
    let raw = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        vec![ev("x", "p!q", Some("a")), ev("y", "p!q", Some("a"))],
        vec![],
    );
    let g = raw.validate().unwrap().communication_graph();
    let edges_on_p = g.edges.iter().all(|(a, b)| a.as_str() == "p" || b.as_str() == "p");
    assert!(edges_on_p);
}

#[test]
fn canonical_identifies_isomorphic_copies() {
    let f = fig1();
    let copy = RawCmsc::from_lines(
        procs(&["q", "p"]),
        vec![MsgId::new("a")],
        vec![ev("b", "q?p", None), ev("a", "p!q", None)],
        vec![("a".into(), "b".into())],
    )
    .validate()
    .unwrap();
    assert_eq!(copy.canonical(), f["M4"].canonical());
    assert!(copy.isomorphic(&f["M4"]));
    assert_ne!(f["M4"].canonical(), f["M5"].canonical());
}

#[test]
fn linearization_counts() {
    let f = fig1();
    assert_eq!(f["M4"].linearizations(100).unwrap().len(), 1);
    assert_eq!(f["M6"].linearizations(100).unwrap().len(), 2);
    let chain = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        (0..4).map(|i| ev(&format!("x{i}"), "p!q", Some("a"))).collect(),
        vec![],
    )
    .validate()
    .unwrap();
    assert_eq!(chain.linearizations(100).unwrap().len(), 1);
}

#[test]
fn linearization_cap_reports_partial_result() {
    let raw = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        vec![ev("x", "p!q", Some("a")), ev("y", "p!q", Some("a")), ev("u", "q!p", Some("b")), ev("v", "q!p", Some("b"))],
        vec![],
    );
    let m = raw.validate().unwrap();
    assert_eq!(m.linearizations(100).unwrap().len(), 6);
    let err = m.linearizations(3).unwrap_err();
    assert_eq!(err.cap, 3);
}

#[test]
fn structural_errors() {
    let empty = RawCmsc::from_lines(procs(&["p", "q"]), ab(), vec![], vec![]);
    assert_eq!(empty.validate().unwrap_err().condition(), Condition::Structure);
    let undeclared = RawCmsc::from_lines(procs(&["p"]), ab(), vec![ev("x", "p!q", Some("a"))], vec![]);
    assert_eq!(undeclared.validate().unwrap_err().condition(), Condition::Structure);
    let selfchan = RawCmsc::from_lines(procs(&["p", "q"]), ab(), vec![ev("x", "p!p", Some("a"))], vec![]);
    assert_eq!(selfchan.validate().unwrap_err().condition(), Condition::Structure);
    let dangling = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        vec![ev("x", "p!q", None)],
        vec![("x".into(), "nowhere".into())],
    );
    assert_eq!(dangling.validate().unwrap_err().condition(), Condition::Structure);
}

#[test]
fn chain_errors() {
    let mut raw = fig1()["M4"].to_raw();
    raw.chains.retain(|(p, _)| p.as_str() == "p");
    assert_eq!(raw.validate().unwrap_err().condition(), Condition::ChainOrder);
    let mut twice = fig1()["M4"].to_raw();
    let first = twice.chains[0].1[0].clone();
    twice.chains[0].1.push(first);
    assert_eq!(twice.validate().unwrap_err().condition(), Condition::ChainOrder);
}

#[test]
fn fifo_and_cycle_and_tail_errors() {
    let crossed = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        vec![ev("s1", "p!q", None), ev("s2", "p!q", None), ev("r1", "q?p", None), ev("r2", "q?p", None)],
        vec![("s1".into(), "r2".into()), ("s2".into(), "r1".into())],
    );
    assert_eq!(crossed.validate().unwrap_err().condition(), Condition::Fifo);

    let cycle = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        vec![ev("r", "p?q", None), ev("s", "p!q", None), ev("r2", "q?p", None), ev("s2", "q!p", None)],
        vec![("s".into(), "r2".into()), ("s2".into(), "r".into())],
    );
    assert_eq!(cycle.validate().unwrap_err().condition(), Condition::PartialOrder);

    // an unmatched send ahead of a matched one on the same channel
    let tail = RawCmsc::from_lines(
        procs(&["p", "q"]),
        ab(),
        vec![ev("u", "p!q", Some("a")), ev("s", "p!q", None), ev("r", "q?p", None)],
        vec![("s".into(), "r".into())],
    );
    assert_eq!(tail.validate().unwrap_err().condition(), Condition::Tail);
}

#[test]
fn universe_matches_naive_enumeration() {
    for n in 1..=4 {
        let fast = canon(&Universe::new(&pq(), &ab(), n).enumerate());
        assert_eq!(fast, naive_universe(n), "n = {n}");
    }
}

#[test]
fn universe_counts() {
    let counts: Vec<usize> = (1..=4).map(|n| Universe::new(&pq(), &ab(), n).enumerate().len()).collect();
    assert_eq!(counts, [8, 58, 338, 1807]);
    let all = Universe::new(&pq(), &ab(), 4).enumerate();
    let complete = Universe::new(&pq(), &ab(), 4).complete().enumerate();
    assert!(complete.iter().all(CMsc::is_msc));
    assert_eq!(canon(&complete), canon(all.iter().filter(|m| m.is_msc())));
}

fn order_is_consistent(m: &CMsc) -> bool {
    let order = order_of(m);
    (0..m.len()).all(|i| (0..m.len()).all(|j| m.leq(i, j) == order[i].contains(&j)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn validator_names_the_first_violated_condition(seed in any::<u64>()) {
        let raw = random_candidate(&mut ChaCha8Rng::seed_from_u64(seed));
        let expected = raw_violations(&raw);
        match raw.validate() {
            Ok(m) => {
                prop_assert!(expected.is_empty(), "accepted but {:?}", expected);
                prop_assert!(order_is_consistent(&m));
            }
            Err(e) => prop_assert_eq!(Some(e.condition()), expected.first().copied()),
        }
    }

    #[test]
    fn connected_implies_weakly_connected(seed in any::<u64>()) {
        if let Ok(m) = random_candidate(&mut ChaCha8Rng::seed_from_u64(seed)).validate() {
            prop_assert_eq!(m.connected(), event_graph_connected(&m));
            prop_assert!(!m.connected() || m.weakly_connected());
        }
    }

    #[test]
    fn canonical_round_trips(seed in any::<u64>()) {
        if let Ok(m) = random_candidate(&mut ChaCha8Rng::seed_from_u64(seed)).validate() {
            let back = m.canonical().to_raw().validate().unwrap();
            prop_assert_eq!(back.canonical(), m.canonical());
            prop_assert_eq!(m.to_raw().validate().unwrap().canonical(), m.canonical());
            prop_assert_eq!(m.canonical().event_count(), m.len());
        }
    }

    #[test]
    fn linearizations_respect_the_order(seed in any::<u64>()) {
        if let Ok(m) = random_candidate(&mut ChaCha8Rng::seed_from_u64(seed)).validate() {
            let lins = m.linearizations(10_000).unwrap();
            prop_assert!(!lins.is_empty());
            let distinct: BTreeSet<&Vec<usize>> = lins.iter().collect();
            prop_assert_eq!(distinct.len(), lins.len());
            for lin in &lins {
                let mut sorted = lin.clone();
                sorted.sort_unstable();
                prop_assert_eq!(sorted, (0..m.len()).collect::<Vec<_>>());
                for (a, &i) in lin.iter().enumerate() {
                    for &j in &lin[a + 1..] {
                        prop_assert!(!m.lt(j, i));
                    }
                }
            }
        }
    }
}
