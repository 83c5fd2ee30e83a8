//! Browser bindings: run a session, test one conjecture, list the first
//! values of a type. Everything returns plain text for the page to show.

use std::collections::BTreeMap;

use sedan_core::session::{process_source, MapLoader, Session, SessionOptions};
use sedan_core::term::parse_term;
use sedan_core::testgen::top_level_test;
use sedan_core::value::Symbol;
use wasm_bindgen::prelude::*;

const CORPUS: [(&str, &str); 6] = [
    ("base-rules.lisp", include_str!("../../../corpus/base-rules.lisp")),
    ("triangle-rules.lisp", include_str!("../../../corpus/triangle-rules.lisp")),
    ("triangle.lisp", include_str!("../../../corpus/triangle.lisp")),
    ("rev.lisp", include_str!("../../../corpus/rev.lisp")),
    ("inequality.lisp", include_str!("../../../corpus/inequality.lisp")),
    ("gen-backtrack.lisp", include_str!("../../../corpus/gen-backtrack.lisp")),
];

fn loader() -> MapLoader {
    MapLoader(CORPUS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<BTreeMap<_, _>>())
}

/// Source text of a bundled example, or an empty string.
#[wasm_bindgen]
pub fn example(name: &str) -> String {
    CORPUS.iter().find(|(k, _)| *k == name).map(|(_, v)| v.to_string()).unwrap_or_default()
}

#[wasm_bindgen]
pub fn example_names() -> String {
    CORPUS.iter().map(|(k, _)| *k).collect::<Vec<_>>().join("\n")
}

fn options(seed: u32, backtrack: bool) -> SessionOptions {
    SessionOptions { seed: Some(seed.into()), backtrack, ..Default::default() }
}

/// Runs every form of `source`; bundled files can be included by name.
#[wasm_bindgen]
pub fn run_session(source: &str, seed: u32, backtrack: bool) -> String {
    process_source("input.lisp", source, &options(seed, backtrack), &loader()).render_text()
}

/// Same as `run_session`, as the structured report.
#[wasm_bindgen]
pub fn run_session_json(source: &str, seed: u32, backtrack: bool) -> String {
    process_source("input.lisp", source, &options(seed, backtrack), &loader()).render_json()
}

fn admit<'a>(defs: &str, seed: u32, l: &'a MapLoader) -> Result<Session<'a>, String> {
    let mut s = Session::new(options(seed, true), l);
    s.run_source("definitions", defs).map_err(|e| e.to_string())?;
    Ok(s)
}

/// Admits `defs`, then tests `conjecture` at the top level.
#[wasm_bindgen]
pub fn test_conjecture(defs: &str, conjecture: &str, trials: u32, seed: u32) -> String {
    let l = loader();
    let s = match admit(defs, seed, &l) {
        Ok(s) => s,
        Err(e) => return format!("Error: {e}\n"),
    };
    let form = match parse_term(conjecture) {
        Ok(t) => t,
        Err(e) => return format!("Error: {}: {}\n", e.pos, e.message),
    };
    if let Err(e) = s.world.check_term(&form, &Symbol::new("test?"), None, None) {
        return format!("Error: {e}\n");
    }
    let mut cfg = s.world.settings().testing.clone();
    cfg.trials = trials.max(1) as usize;
    top_level_test(&form, &cfg, &s.world).render()
}

/// Admits `defs`, then lists values `start..start+count` of type `name`
/// next to their indices.
#[wasm_bindgen]
pub fn enumerate_type(defs: &str, name: &str, start: u32, count: u32) -> String {
    let l = loader();
    let s = match admit(defs, 24, &l) {
        Ok(s) => s,
        Err(e) => return format!("Error: {e}\n"),
    };
    let ty = Symbol::new(name.trim());
    let mut out = String::new();
    for i in u64::from(start)..u64::from(start) + u64::from(count.min(1000)) {
        match s.world.enumerate(&ty, i) {
            Ok(v) => out.push_str(&format!("{i:>6}  {v}\n")),
            Err(e) => return format!("Error: {e}\n"),
        }
    }
    out
}
