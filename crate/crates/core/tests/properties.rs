use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use sedan_core::datadef::encoding::{pair, unpair};
use sedan_core::eval::{evaluate, Binding, Prim};
use sedan_core::hints::{fold_override_hints, testing_override, HintSettings, OverrideHint, Process};
use sedan_core::session::{MapLoader, Session, SessionOptions};
use sedan_core::term::{parse_term, Term};
use sedan_core::testgen::{extract_restrictions, run_trials, Conjecture, TestConfig};
use sedan_core::value::{Symbol, Value};
use sedan_core::waterfall::clausify;
use sedan_core::world::World;

fn arb_value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![
        (-1000i64..1000).prop_map(Value::int),
        (-50i64..50, 1i64..20).prop_map(|(n, d)| Value::rat(n, d)),
        prop::sample::select(vec!["t", "nil", "red", "foo-bar", "x1"]).prop_map(Value::sym),
        "[a-z \"\\\\]{0,6}".prop_map(|s| Value::string(&s)),
        prop::sample::select(vec!['a', 'Z', '0', ' ']).prop_map(Value::Char),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| Value::cons(a, b)))
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y", "z1"]).prop_map(Term::var),
        arb_value().prop_map(Term::Quote),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        (prop::sample::select(vec!["foo", "bar", "baz-1"]), prop::collection::vec(inner, 0..3))
            .prop_map(|(f, args)| Term::app(f, args))
    })
}

fn arb_bool_formula() -> impl Strategy<Value = Term> {
    let leaf = prop::sample::select(vec!["p", "q", "r"]).prop_map(Term::var);
    leaf.prop_recursive(4, 20, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("and", vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("or", vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("implies", vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("equal", vec![a, b])),
            (inner.clone(), inner.clone(), inner).prop_map(|(a, b, c)| Term::app("if", vec![a, b, c])),
        ]
    })
}

fn rat(v: &Value) -> BigRational {
    v.as_rational().cloned().expect("numeric result")
}

fn eval_str(src: &str, b: &Binding) -> Value {
    evaluate(&parse_term(src).unwrap(), b, &World::new()).unwrap()
}

fn num_binding(a: (i64, i64), c: (i64, i64)) -> Binding {
    [(Symbol::new("a"), Value::rat(a.0, a.1)), (Symbol::new("b"), Value::rat(c.0, c.1))].into_iter().collect()
}

const TYPES: &str = "
(defdata loi (listof integer))
(defdata rgb (enum '(red green blue)))
(defdata triple (list pos pos pos))
(defdata tree (oneof 'leaf (node (val . integer) (left . tree) (right . tree))))
(defdata (expr (oneof integer symbol (cons 'neg expr) (list 'plus expr-list)))
         (expr-list (listof expr)))
(defdata small-set (set rgb))
(defdata point (record (x . integer) (y . rational)))
(defdata maybe-nat (oneof nat nil))
";

fn typed_world() -> World {
    let files = MapLoader::default();
    let mut s = Session::new(SessionOptions::default(), &files);
    s.run_source("types.lisp", TYPES).unwrap();
    s.world
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn term_print_parse_round_trip(t in arb_term()) {
        let printed = t.to_string();
        prop_assert_eq!(parse_term(&printed).unwrap(), t, "{}", printed);
    }

    #[test]
    fn rational_arithmetic_matches_integer_oracle(
        an in -10_000i64..10_000, ad in 1i64..500, cn in -10_000i64..10_000, cd in 1i64..500,
    ) {
        let b = num_binding((an, ad), (cn, cd));
        let (an, ad, cn, cd) = (an as i128, ad as i128, cn as i128, cd as i128);
        let big = |n: i128, d: i128| BigRational::new(BigInt::from(n), BigInt::from(d));
        prop_assert_eq!(rat(&eval_str("(+ a b)", &b)), big(an * cd + cn * ad, ad * cd));
        prop_assert_eq!(rat(&eval_str("(* a b)", &b)), big(an * cn, ad * cd));
        prop_assert_eq!(rat(&eval_str("(- a b)", &b)), big(an * cd - cn * ad, ad * cd));
        prop_assert_eq!(eval_str("(< a b)", &b).is_true(), an * cd < cn * ad);
        if cn != 0 {
            prop_assert_eq!(rat(&eval_str("(/ a b)", &b)), big(an * cd, ad * cn));
        }
        let r = rat(&eval_str("(+ a b)", &b));
        prop_assert!(r.denom() > &BigInt::from(0));
        prop_assert_eq!(num_integer::Integer::gcd(r.numer(), r.denom()), BigInt::from(1));
    }

    #[test]
    fn builtins_are_total(p in prop::sample::select(Prim::ALL.to_vec()), args in prop::collection::vec(arb_value(), 3)) {
        if !p.is_control() {
            let _ = p.apply(&args[..p.arity()]);
        }
    }

    #[test]
    fn cantor_pairing_inverts(n in 0u64..(1 << 40)) {
        let (i, j) = unpair(n);
        prop_assert_eq!(pair(i, j), u128::from(n));
    }

    #[test]
    fn clausify_preserves_truth(f in arb_bool_formula()) {
        let clauses = clausify(&f);
        let world = World::new();
        for bits in 0..8u8 {
            let b: Binding = ["p", "q", "r"]
                .iter()
                .enumerate()
                .map(|(i, v)| (Symbol::new(v), Value::bool(bits >> i & 1 == 1)))
                .collect();
            let expected = evaluate(&f, &b, &world).unwrap().is_true();
            let got = clauses
                .iter()
                .all(|c| c.iter().any(|l| evaluate(l, &b, &world).unwrap().is_true()));
            prop_assert_eq!(got, expected, "{} under {:?}", f, b);
        }
    }

    #[test]
    fn override_folding_keeps_user_do_not(
        do_not in prop::collection::btree_set(prop::sample::select(Process::ALL.to_vec()), 0..3),
        trials in prop::option::of(1usize..500),
        extra in prop::collection::btree_set(prop::sample::select(Process::ALL.to_vec()), 0..3),
    ) {
        let user = HintSettings { do_not: do_not.clone(), trials, ..Default::default() };
        let more = extra.clone();
        let overrides = vec![
            testing_override(),
            OverrideHint::new("more", move |mut s| { s.do_not.extend(more.iter().copied()); s }),
        ];
        let out = fold_override_hints(user, &overrides);
        prop_assert!(out.do_not.is_superset(&do_not));
        prop_assert!(out.do_not.is_superset(&extra));
        prop_assert_eq!(out.trials, trials);
        prop_assert!(out.backtrack.is_some() && out.replace);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumerators_are_sound(n in 0u64..1_000_000) {
        let world = typed_world();
        for e in world.types().entries() {
            let v = world.enumerate(&e.name, n).unwrap();
            prop_assert!(world.recognize(&e.name, &v).unwrap(), "{} {} -> {}", e.name, n, v);
        }
    }

    #[test]
    fn testing_is_deterministic_and_accounted(seed in any::<u64>(), trials in 1usize..200) {
        let world = typed_world();
        let form = parse_term("(implies (and (loip x) (natp n)) (< (len x) (+ n 3)))").unwrap();
        let conj = Conjecture::from_term(&form);
        let alist = extract_restrictions(&conj, &world);
        let cfg = TestConfig { seed, trials, ..Default::default() };
        let a = run_trials(&conj, &alist, &cfg, &world);
        let b = run_trials(&conj, &alist, &cfg, &world);
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert_eq!(a.trials, trials);
        prop_assert_eq!(a.unique_counterexamples + a.unique_witnesses, a.unique_satisfied);
        prop_assert_eq!(a.counterexample_trials + a.witness_trials, a.satisfied);
        for cx in &a.counterexamples {
            prop_assert_eq!(conj.check(cx, &world).unwrap(), Some(false));
        }
        for w in &a.witnesses {
            prop_assert_eq!(conj.check(w, &world).unwrap(), Some(true));
        }
    }
}

#[test]
fn finite_types_are_periodic() {
    let world = typed_world();
    for name in ["rgb", "boolean"] {
        let ty = Symbol::new(name);
        let extent = world.types().get(&ty).unwrap().extent(&world).unwrap();
        let k = extent.len() as u64;
        let seen: BTreeSet<String> = (0..k).map(|n| world.enumerate(&ty, n).unwrap().to_string()).collect();
        assert_eq!(seen.len() as u64, k);
        for n in 0..5 * k {
            assert_eq!(world.enumerate(&ty, n).unwrap(), world.enumerate(&ty, n + k).unwrap());
        }
    }
}
