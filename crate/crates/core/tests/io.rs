mod support;

use msc_tools::cmsc::Condition;
use msc_tools::io::{self, emit, parse, render_cfm, render_cmsc, render_hmsc, IoError};
use support::*;

fn golden(name: &str) -> String {
    std::fs::read_to_string(corpus_path("golden").join(name)).unwrap()
}

#[test]
fn fig1_parses_to_six_cmscs() {
    let f = fig1();
    let names: Vec<&str> = f.keys().map(String::as_str).collect();
    assert_eq!(names, ["M1", "M2", "M3", "M4", "M5", "M6"]);
    assert_eq!(f.values().map(|m| m.len()).collect::<Vec<_>>(), [3, 1, 1, 2, 2, 4]);
}

#[test]
fn documents_round_trip() {
    for file in ["fig1.cmsc", "fig2.hmsc", "fig3.cfm", "phi.emso", "pcp-solvable.pcp", "tm-halt.tm", "cm-incdec.cm"] {
        let doc = corpus(file);
        let text = emit(&doc);
        let again = parse(&text).unwrap_or_else(|e| panic!("{file}: {e}\n{text}"));
        assert_eq!(emit(&again), text, "{file}");
        assert_eq!(again.blocks.len(), doc.blocks.len() + extra_labels(&doc), "{file}");
    }
}

/// Labels imported with `use` are written out as blocks of their own.
fn extra_labels(doc: &io::Document) -> usize {
    let inline = doc.cmscs().count();
    let needed: std::collections::BTreeSet<&str> =
        doc.hmscs().flat_map(|(_, h)| h.labels.iter().map(|(n, _)| n.as_str())).collect();
    needed.len().saturating_sub(inline)
}

#[test]
fn fig2_round_trip_keeps_the_language() {
    let h = fig2();
    let again = parse(&emit(&corpus("fig2.hmsc"))).unwrap();
    let h2 = again.hmsc(Some("H")).unwrap();
    let lang = |h: &msc_tools::hmsc::Hmsc| keys(&msc_tools::hmsc::bounded_language(h, 6, 6).mscs);
    assert_eq!(lang(&h), lang(h2));
}

#[test]
fn match_between_sends() {
    let text = "cmsc Bad\nprocesses p q\nmessages a\nevent x p!q\nevent y p!q\nmatch x y\n";
    let err = parse(text).unwrap_err();
    let IoError::Validation { source, .. } = &err else { panic!("{err}") };
    assert_eq!(source.condition(), Condition::MatchKind);
    assert!(err.to_string().contains("condition (i)"), "{err}");
}

#[test]
fn syntax_errors_carry_lines() {
    let err = parse("cmsc A\nprocesses p q\nevent x p!!q\n").unwrap_err();
    assert!(matches!(err, IoError::Syntax { line: 3, .. }), "{err:?}");
    let err = parse("hmsc H\nstate 1 initial\ntrans 1 1 @Nope\n").unwrap_err();
    assert!(matches!(err, IoError::Unresolved { .. }), "{err:?}");
    assert!(matches!(parse("bogus\n").unwrap_err(), IoError::Syntax { line: 1, .. }));
}

#[test]
fn golden_renders() {
    assert_eq!(render_cmsc("M1", &fig1()["M1"]), golden("fig1-M1.dot"));
    assert_eq!(render_hmsc("H", &fig2()), golden("fig2.dot"));
    assert_eq!(render_cfm("A", &fig3()), golden("fig3.dot"));
}

#[test]
fn rendering_is_stable() {
    let a = render_hmsc("H", &fig2());
    let b = render_hmsc("H", &corpus("fig2.hmsc").hmsc(None).unwrap().clone());
    assert_eq!(a, b);
}
