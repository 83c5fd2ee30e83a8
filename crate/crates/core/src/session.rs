//! Sequential processing of source files: admit definitions, run tests
//! and proof attempts, collect per-form outcomes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::datadef::Distribution;
use crate::error::{AdmitError, SessionError, SyntaxError};
use crate::forms::{parse_form, Form, FormKind, TestingOption};
use crate::sexp::read_prefix;
use crate::testgen::{derive_seed, top_level_test, TestMode, TestReport};
use crate::value::Symbol;
use crate::waterfall::{run_waterfall, ProofResult, ProofStatus, WaterfallConfig};
use crate::world::World;

/// Settings fixed from outside the source; they win over `set-testing`.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub mode: Option<TestMode>,
    pub dist: Option<Distribution>,
    pub backtrack: bool,
    pub rewrite_depth: Option<usize>,
    /// `None` keeps the per-form default: fixed seeds for `thm`, derived
    /// seeds for `test?`.
    pub deterministic: Option<bool>,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions {
            seed: None,
            trials: None,
            mode: None,
            dist: None,
            backtrack: true,
            rewrite_depth: None,
            deterministic: None,
        }
    }
}

/// Resolves `include` paths.
pub trait Loader {
    /// Returns the resolved name and text of `path`, relative to `from`.
    fn load(&self, from: &str, path: &str) -> Result<(String, String), String>;
}

pub struct FsLoader;

impl Loader for FsLoader {
    fn load(&self, from: &str, path: &str) -> Result<(String, String), String> {
        let full = Path::new(from).parent().unwrap_or(Path::new("")).join(path);
        let name = full.to_string_lossy().into_owned();
        std::fs::read_to_string(&full).map(|t| (name, t)).map_err(|e| e.to_string())
    }
}

/// In-memory files keyed by name; paths resolve relative to nothing.
#[derive(Clone, Debug, Default)]
pub struct MapLoader(pub BTreeMap<String, String>);

impl Loader for MapLoader {
    fn load(&self, _from: &str, path: &str) -> Result<(String, String), String> {
        let key = path.trim_start_matches("./");
        self.0.get(key).map(|t| (key.to_string(), t.clone())).ok_or_else(|| "no such file".to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormStatus {
    Admitted,
    Proved,
    FailedWithCheckpoints,
    Falsified,
    /// A test that found no counterexample.
    Passed,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormResult {
    pub index: usize,
    pub source: String,
    pub line: usize,
    pub col: usize,
    pub head: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    pub status: FormStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<TestReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proof: Option<ProofResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionOutcome {
    pub source: String,
    pub seed: u64,
    pub backtrack: bool,
    pub forms: Vec<FormResult>,
    pub exit_code: i32,
    #[serde(skip)]
    pub error: Option<SessionError>,
}

impl SessionOutcome {
    pub fn falsified(&self) -> usize {
        self.forms.iter().filter(|f| f.status == FormStatus::Falsified).count()
    }
}

pub struct Session<'a> {
    pub world: World,
    options: SessionOptions,
    loader: &'a dyn Loader,
    deterministic: Option<bool>,
    forms: Vec<FormResult>,
    loading: Vec<String>,
}

enum Flow {
    Continue,
    Stop(SessionError),
}

impl<'a> Session<'a> {
    pub fn new(options: SessionOptions, loader: &'a dyn Loader) -> Self {
        let mut s = Session {
            world: World::new(),
            deterministic: options.deterministic,
            options,
            loader,
            forms: Vec::new(),
            loading: Vec::new(),
        };
        s.pin_options();
        s
    }

    fn pin_options(&mut self) {
        let o = self.options.clone();
        let st = self.world.settings_mut();
        if let Some(v) = o.seed {
            st.testing.seed = v;
        }
        if let Some(v) = o.trials {
            st.testing.trials = v;
        }
        if let Some(v) = o.mode {
            st.testing.mode = v;
        }
        if let Some(v) = o.dist {
            st.testing.dist = v;
        }
        if let Some(v) = o.rewrite_depth {
            st.rewrite_depth = v;
        }
        if o.deterministic.is_some() {
            self.deterministic = o.deterministic;
        }
    }

    fn set_testing(&mut self, opts: &[TestingOption]) {
        let st = self.world.settings_mut();
        for o in opts {
            match *o {
                TestingOption::Trials(n) => st.testing.trials = n,
                TestingOption::Mode(m) => st.testing.mode = m,
                TestingOption::Distribution(d) => st.testing.dist = d,
                TestingOption::UniformBound(b) => st.testing.uniform_bound = b,
                TestingOption::ExhaustiveBound(b) => st.testing.exhaustive_bound = b,
                TestingOption::SubtypeEvidence(n) => st.subtype_evidence = n,
                TestingOption::Seed(s) => st.testing.seed = s,
                TestingOption::Deterministic(d) => self.deterministic = Some(d),
            }
        }
        self.pin_options();
    }

    /// Processes every form of `text`, stopping at the first error.
    pub fn run_source(&mut self, name: &str, text: &str) -> Result<(), SessionError> {
        let (sexps, syntax) = read_prefix(text);
        for s in &sexps {
            let index = self.forms.len() + 1;
            let form = match parse_form(s) {
                Ok(f) => f,
                Err(error) => return Err(self.syntax_error(name, index, error, s.head())),
            };
            if let Flow::Stop(e) = self.run_form(name, index, &form) {
                return Err(e);
            }
        }
        match syntax {
            Some(error) => Err(self.syntax_error(name, self.forms.len() + 1, error, None)),
            None => Ok(()),
        }
    }

    fn syntax_error(&mut self, name: &str, index: usize, error: SyntaxError, head: Option<&str>) -> SessionError {
        let e = SessionError::Syntax { source_name: name.to_string(), index, error: error.clone() };
        self.forms.push(FormResult {
            index,
            source: name.to_string(),
            line: error.pos.line,
            col: error.pos.col,
            head: head.unwrap_or("").to_string(),
            name: None,
            formula: None,
            status: FormStatus::Error,
            seed: None,
            test: None,
            proof: None,
            error: Some(e.to_string()),
        });
        e
    }

    fn result(&self, name: &str, index: usize, form: &Form, status: FormStatus) -> FormResult {
        FormResult {
            index,
            source: name.to_string(),
            line: form.pos().line,
            col: form.pos().col,
            head: form.head().to_string(),
            name: form.name(),
            formula: None,
            status,
            seed: None,
            test: None,
            proof: None,
            error: None,
        }
    }

    fn admit(&mut self, name: &str, index: usize, form: &Form, r: Result<(), AdmitError>) -> Flow {
        match r {
            Ok(()) => {
                let res = self.result(name, index, form, FormStatus::Admitted);
                self.forms.push(res);
                Flow::Continue
            }
            Err(error) => {
                let e = SessionError::Admit { source_name: name.to_string(), index, pos: form.pos(), error };
                let mut res = self.result(name, index, form, FormStatus::Error);
                res.error = Some(e.to_string());
                self.forms.push(res);
                Flow::Stop(e)
            }
        }
    }

    fn form_seed(&self, index: usize, default_deterministic: bool) -> (u64, bool) {
        let seed = self.world.settings().testing.seed;
        if self.deterministic.unwrap_or(default_deterministic) {
            (seed, true)
        } else {
            (derive_seed(seed, index as u64), false)
        }
    }

    fn run_form(&mut self, name: &str, index: usize, form: &Form) -> Flow {
        let context = Symbol::new(form.head());
        match &form.kind {
            FormKind::Defun { name: f, formals, body } => {
                let r = self.world.define_function(f.clone(), formals.clone(), body.clone());
                self.admit(name, index, form, r)
            }
            FormKind::Defdata(group) => {
                let r = self.world.define_types(group.clone());
                self.admit(name, index, form, r)
            }
            FormKind::DefdataSubtype { sub, sup, trust } => {
                let r = self.world.add_subtype_edge(sub, sup, *trust);
                self.admit(name, index, form, r)
            }
            FormKind::Defrule { name: rule, formula, enabled } => {
                let r = self.world.add_rule(rule.clone(), formula, *enabled);
                self.admit(name, index, form, r)
            }
            FormKind::SetTesting(opts) => {
                self.set_testing(opts);
                self.admit(name, index, form, Ok(()))
            }
            FormKind::Include(path) => {
                let loaded = self.loader.load(name, path);
                let (full, text) = match loaded {
                    Ok(x) if self.loading.contains(&x.0) => {
                        return self.include_error(name, index, form, path, "include cycle".to_string())
                    }
                    Ok(x) => x,
                    Err(message) => return self.include_error(name, index, form, path, message),
                };
                let res = self.result(name, index, form, FormStatus::Admitted);
                self.forms.push(res);
                self.loading.push(full.clone());
                let r = self.run_source(&full, &text);
                self.loading.pop();
                match r {
                    Ok(()) => Flow::Continue,
                    Err(e) => Flow::Stop(e),
                }
            }
            FormKind::Test { formula } => {
                if let Err(e) = self.world.check_term(formula, &context, None, None) {
                    return self.admit(name, index, form, Err(e));
                }
                let (seed, _) = self.form_seed(index, false);
                let mut cfg = self.world.settings().testing.clone();
                cfg.seed = seed;
                let report = top_level_test(formula, &cfg, &self.world);
                let status = if report.falsified() { FormStatus::Falsified } else { FormStatus::Passed };
                let mut res = self.result(name, index, form, status);
                res.formula = form.source.list().and_then(|l| l.get(1)).map(|f| f.to_string());
                res.seed = Some(seed);
                res.test = Some(report);
                self.forms.push(res);
                Flow::Continue
            }
            FormKind::Thm { formula, hints } => {
                if let Err(e) = self.world.check_term(formula, &context, None, None) {
                    return self.admit(name, index, form, Err(e));
                }
                let (seed, fixed) = self.form_seed(index, true);
                let mut cfg = WaterfallConfig::from_world(&self.world);
                cfg.backtrack = self.options.backtrack;
                cfg.testing.seed = seed;
                cfg.testing.deterministic = fixed;
                let proof = run_waterfall(formula, &self.world, hints, &cfg);
                let status = match proof.status {
                    ProofStatus::Proved => FormStatus::Proved,
                    ProofStatus::Failed if proof.falsified() => FormStatus::Falsified,
                    ProofStatus::Failed => FormStatus::FailedWithCheckpoints,
                };
                let mut res = self.result(name, index, form, status);
                res.formula = form.source.list().and_then(|l| l.get(1)).map(|f| f.to_string());
                res.seed = Some(seed);
                res.proof = Some(proof);
                self.forms.push(res);
                Flow::Continue
            }
        }
    }

    fn include_error(&mut self, name: &str, index: usize, form: &Form, path: &str, message: String) -> Flow {
        let e = SessionError::Io {
            source_name: name.to_string(),
            index,
            pos: form.pos(),
            path: path.to_string(),
            message,
        };
        let mut res = self.result(name, index, form, FormStatus::Error);
        res.error = Some(e.to_string());
        self.forms.push(res);
        Flow::Stop(e)
    }

    pub fn finish(self, source: &str, error: Option<SessionError>) -> SessionOutcome {
        let errored = self.forms.iter().any(|f| f.status == FormStatus::Error);
        let falsified = self.forms.iter().any(|f| f.status == FormStatus::Falsified);
        SessionOutcome {
            source: source.to_string(),
            seed: self.world.settings().testing.seed,
            backtrack: self.options.backtrack,
            forms: self.forms,
            exit_code: if errored { 2 } else if falsified { 1 } else { 0 },
            error,
        }
    }
}

/// Processes one source text in a fresh world.
pub fn process_source(name: &str, text: &str, options: &SessionOptions, loader: &dyn Loader) -> SessionOutcome {
    let mut s = Session::new(options.clone(), loader);
    let r = s.run_source(name, text);
    s.finish(name, r.err())
}

pub fn process_file(path: &Path, options: &SessionOptions) -> SessionOutcome {
    let name = path.to_string_lossy().into_owned();
    match std::fs::read_to_string(path) {
        Ok(text) => process_source(&name, &text, options, &FsLoader),
        Err(e) => {
            let s = Session::new(options.clone(), &FsLoader);
            let err = SessionError::Io {
                source_name: name.clone(),
                index: 0,
                pos: Default::default(),
                path: name.clone(),
                message: e.to_string(),
            };
            let mut out = s.finish(&name, None);
            out.exit_code = 2;
            out.error = Some(err);
            out
        }
    }
}

impl SessionOutcome {
    /// Human-readable report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for f in &self.forms {
            let at = format!("{}:{}", f.source, f.line);
            match f.status {
                FormStatus::Admitted => {
                    let what = f.name.as_deref().map(|n| format!(" {n}")).unwrap_or_default();
                    writeln!(out, "[{}] {at}: {}{what} admitted.", f.index, f.head).unwrap();
                }
                FormStatus::Error => {
                    writeln!(out, "[{}] Error: {}", f.index, f.error.as_deref().unwrap_or("")).unwrap();
                }
                _ => {
                    let formula = f.formula.as_deref().unwrap_or("");
                    writeln!(out, "\n[{}] {at}: ({} {formula})\n", f.index, f.head).unwrap();
                    if let Some(t) = &f.test {
                        out.push_str(&t.render());
                    }
                    if let Some(p) = &f.proof {
                        out.push_str(&p.render());
                    }
                    out.push('\n');
                }
            }
        }
        if let Some(SessionError::Io { index: 0, .. }) = &self.error {
            writeln!(out, "Error: {}", self.error.as_ref().unwrap()).unwrap();
        }
        let n = self.forms.len();
        let errors = self.forms.iter().filter(|f| f.status == FormStatus::Error).count();
        writeln!(
            out,
            "Processed {n} form{}: {} falsified, {errors} error{}.",
            if n == 1 { "" } else { "s" },
            self.falsified(),
            if errors == 1 { "" } else { "s" }
        )
        .unwrap();
        out
    }

    /// Machine-readable report.
    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> SessionOutcome {
        process_source("t.lisp", src, &SessionOptions::default(), &MapLoader::default())
    }

    const REV: &str = "(defun rev (x) (if (endp x) nil (append (rev (cdr x)) (list (car x)))))";

    #[test]
    fn untyped_rev_is_falsified() {
        let o = run(&format!("{REV}\n(test? (equal (rev (rev x)) x))"));
        assert_eq!(o.forms[1].status, FormStatus::Falsified);
        assert_eq!(o.exit_code, 1);
        assert!(o.render_text().contains("We falsified the conjecture. Here are counterexamples:"));
    }

    #[test]
    fn empty_session() {
        let o = run("");
        assert_eq!(o.exit_code, 0);
        assert!(o.forms.is_empty());
        assert!(o.render_json().contains("\"forms\": []"));
    }

    #[test]
    fn undefined_function_stops_the_session() {
        let o = run("(defun f (x) (g x))\n(test? (equal x x))");
        assert_eq!(o.forms.len(), 1);
        assert_eq!(o.exit_code, 2);
        let msg = o.forms[0].error.as_deref().unwrap();
        assert!(msg.contains('g') && msg.contains("form 1"), "{msg}");
    }

    #[test]
    fn syntax_error_names_the_form() {
        let o = run("(set-testing :trials 5)\n(test? (equal x x)");
        assert_eq!(o.forms.len(), 2);
        assert_eq!(o.forms[1].status, FormStatus::Error);
        assert!(o.forms[1].error.as_deref().unwrap().contains("form 2"));
    }

    #[test]
    fn includes_resolve_through_the_loader() {
        let mut files = BTreeMap::new();
        files.insert("rev.lisp".to_string(), REV.to_string());
        let l = MapLoader(files);
        let o = process_source(
            "main.lisp",
            "(include \"rev.lisp\")\n(test? (implies (true-listp x) (equal (rev (rev x)) x)))",
            &SessionOptions::default(),
            &l,
        );
        assert_eq!(o.exit_code, 0, "{}", o.render_text());
        assert_eq!(o.forms[1].source, "rev.lisp");
        assert_eq!(o.forms[2].status, FormStatus::Passed);
        let o = process_source("main.lisp", "(include \"nope.lisp\")", &SessionOptions::default(), &l);
        assert_eq!(o.exit_code, 2);
    }

    #[test]
    fn pinned_options_beat_set_testing() {
        let opts = SessionOptions { trials: Some(7), ..Default::default() };
        let o = process_source("t.lisp", "(set-testing :trials 50)\n(test? (natp x))", &opts, &MapLoader::default());
        assert_eq!(o.forms[1].test.as_ref().unwrap().trials, 7);
    }

    #[test]
    fn test_seeds_differ_by_form_but_repeat_by_run() {
        let src = "(test? (natp x))\n(test? (natp x))";
        let a = run(src);
        let b = run(src);
        assert_ne!(a.forms[0].seed, a.forms[1].seed);
        assert_eq!(a.render_json(), b.render_json());
        let o = run("(thm (natp x))");
        assert_eq!(o.forms[0].seed, Some(crate::testgen::DEFAULT_SEED));
    }
}
