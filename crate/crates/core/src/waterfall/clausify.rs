//! Clause normal form: propositional connectives at the top of a literal
//! are spliced or split, and embedded `if` terms are lifted into cases.

use crate::term::Term;

enum Step {
    Drop,
    True,
    Keep(Term),
    Splice(Vec<Term>),
    Split(Vec<Term>, Vec<Term>),
}

fn not(t: &Term) -> Term {
    Term::not(t.clone())
}

/// The literal that contradicts `t`.
pub fn complement(t: &Term) -> Term {
    match t.negated() {
        Some(x) => x.clone(),
        None => not(t),
    }
}

fn first_if(t: &Term) -> Option<&Term> {
    t.subterms().into_iter().find(|s| s.call_of("if").is_some())
}

/// `L[(if p q r)]` becomes `(if p L[q] L[r])`.
fn lift_if(lit: &Term) -> Option<Term> {
    let ite = first_if(lit)?;
    let [p, q, r] = ite.call_of("if")? else { return None };
    Some(Term::app("if", vec![p.clone(), lit.replace(ite, q), lit.replace(ite, r)]))
}

fn step(lit: Term) -> Step {
    if let Term::Quote(v) = &lit {
        return if v.is_nil() { Step::Drop } else { Step::True };
    }
    if let Some(x) = lit.negated() {
        if let Term::Quote(v) = x {
            return if v.is_nil() { Step::True } else { Step::Drop };
        }
        if let Some(y) = x.negated() {
            return Step::Splice(vec![y.clone()]);
        }
        if let Some([a, b]) = x.call_of("and") {
            return Step::Splice(vec![not(a), not(b)]);
        }
        if let Some([a, b]) = x.call_of("or") {
            return Step::Split(vec![not(a)], vec![not(b)]);
        }
        if let Some([a, b]) = x.call_of("implies") {
            return Step::Split(vec![a.clone()], vec![not(b)]);
        }
        if let Some([p, q, r]) = x.call_of("if") {
            return Step::Split(vec![not(p), not(q)], vec![p.clone(), not(r)]);
        }
    } else {
        if let Some([a, b]) = lit.call_of("and") {
            return Step::Split(vec![a.clone()], vec![b.clone()]);
        }
        if let Some([a, b]) = lit.call_of("or") {
            return Step::Splice(vec![a.clone(), b.clone()]);
        }
        if let Some([a, b]) = lit.call_of("implies") {
            return Step::Splice(vec![not(a), b.clone()]);
        }
        if let Some([p, q, r]) = lit.call_of("if") {
            return Step::Split(vec![not(p), q.clone()], vec![p.clone(), r.clone()]);
        }
    }
    match lift_if(&lit) {
        Some(l) => Step::Splice(vec![l]),
        None => Step::Keep(lit),
    }
}

/// Normalizes a clause into an equivalent conjunction of clauses. Duplicate
/// literals are dropped; tautologies (a true literal or a complementary
/// pair) vanish from the result, so an empty result means proved.
pub fn normalize(lits: &[Term]) -> Vec<Vec<Term>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<Term>, Vec<Term>)> = vec![(Vec::new(), lits.iter().rev().cloned().collect())];
    while let Some((mut done, mut todo)) = stack.pop() {
        let mut taut = false;
        while let Some(lit) = todo.pop() {
            match step(lit) {
                Step::Drop => {}
                Step::True => {
                    taut = true;
                    break;
                }
                Step::Keep(l) => {
                    if done.contains(&complement(&l)) {
                        taut = true;
                        break;
                    }
                    if !done.contains(&l) {
                        done.push(l);
                    }
                }
                Step::Splice(ls) => todo.extend(ls.into_iter().rev()),
                Step::Split(a, b) => {
                    let mut other = todo.clone();
                    other.extend(b.into_iter().rev());
                    stack.push((done.clone(), other));
                    todo.extend(a.into_iter().rev());
                }
            }
        }
        if !taut {
            out.push(done);
        }
    }
    out
}

pub fn clausify(formula: &Term) -> Vec<Vec<Term>> {
    normalize(std::slice::from_ref(formula))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, Binding};
    use crate::term::parse_term;
    use crate::value::{Symbol, Value};
    use crate::world::World;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn show(cs: &[Vec<Term>]) -> Vec<String> {
        cs.iter()
            .map(|c| c.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" | "))
            .collect()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(show(&clausify(&t("(implies h c)"))), ["(not h) | c"]);
        assert_eq!(clausify(&t("(implies h (and a b))")).len(), 2);
        assert_eq!(show(&clausify(&t("(if p q r)"))), ["(not p) | q", "p | r"]);
        assert!(clausify(&t("(or p (not p))")).is_empty());
        assert_eq!(clausify(&t("nil")), vec![Vec::<Term>::new()]);
    }

    #[test]
    fn embedded_if_is_lifted() {
        let cs = clausify(&t("(not (equal \"isosceles\" (if p \"equilateral\" \"isosceles\")))"));
        assert_eq!(
            show(&cs),
            ["(not p) | (not (equal \"isosceles\" \"equilateral\"))", "p | (not (equal \"isosceles\" \"isosceles\"))"]
        );
    }

    /// Truth-table oracle: the conjunction of clauses agrees with the
    /// formula on every assignment of booleans to p, q, r.
    fn equivalent(src: &str) {
        let w = World::new();
        let f = t(src);
        let cs = clausify(&f);
        for bits in 0..8u8 {
            let b: Binding = ["p", "q", "r"]
                .iter()
                .enumerate()
                .map(|(i, n)| (Symbol::new(n), Value::bool(bits & (1 << i) != 0)))
                .collect();
            let lhs = evaluate(&f, &b, &w).unwrap().is_true();
            let rhs = cs
                .iter()
                .all(|c| c.iter().any(|l| evaluate(l, &b, &w).unwrap().is_true()));
            assert_eq!(lhs, rhs, "{src} at {b}");
        }
    }

    #[test]
    fn truth_table_corpus() {
        for src in [
            "(implies p q)",
            "(if p q r)",
            "(not (if p q r))",
            "(and (or p q) (implies q r))",
            "(implies (and p q) (or r (not p)))",
            "(equal p (if q r p))",
            "(not (and p (not (or q r))))",
            "(if (if p q r) (not q) (and p r))",
            "(implies (implies p q) (implies (not q) (not p)))",
            "(equal (not p) (if q nil t))",
            "(or (and p q) (and (not p) r))",
            "(not (implies p (and q r)))",
            "nil",
            "t",
        ] {
            equivalent(src);
        }
    }
}
