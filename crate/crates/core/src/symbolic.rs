//! Grounded symbolic state language: symbols, atoms, literals, conjunctions,
//! parameterized templates and closed-world entailment.
//!
//! Canonical text grammar, shared by mission files, the event log and the
//! service API:
//!
//! ```text
//! literal  := ["!"] ident "(" [term ("," term)*] ")"
//! term     := ident | "?" ident            (variables only in templates)
//! ident    := [a-z][a-z0-9_]*              (at most 64 characters)
//! conj     := literal (("&" | "∧") literal)*
//! ```
//!
//! Whitespace is insignificant between tokens.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MAX_SYMBOL_LEN: usize = 64;
pub const MAX_ARITY: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("predicate `{predicate}` has arity {expected}, found {found}")]
    Arity {
        predicate: Symbol,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable {0}")]
    UnboundVariable(Var),
    #[error("invalid symbol `{0}`")]
    InvalidSymbol(String),
    #[error("atom {0} appears with both polarities")]
    Contradiction(Atom),
    #[error("template {0} contains a variable where a ground atom is required")]
    NotGround(String),
}

fn interner() -> &'static Mutex<HashSet<Arc<str>>> {
    static INTERNER: OnceLock<Mutex<HashSet<Arc<str>>>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

fn is_ident(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && name.len() <= MAX_SYMBOL_LEN
}

/// Interned lowercase identifier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Result<Self, SymbolicError> {
        if !is_ident(name) {
            return Err(SymbolicError::InvalidSymbol(name.to_string()));
        }
        let mut table = interner().lock().expect("symbol interner poisoned");
        if let Some(existing) = table.get(name) {
            return Ok(Symbol(existing.clone()));
        }
        let interned: Arc<str> = Arc::from(name);
        table.insert(interned.clone());
        Ok(Symbol(interned))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Shorthand for literal symbols known to be valid; panics otherwise.
pub fn sym(name: &str) -> Symbol {
    Symbol::new(name).unwrap_or_else(|e| panic!("{e}"))
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Symbol {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Symbol::new(s.trim())
    }
}

/// Variable slot in a behavior template, printed as `?name`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Symbol);

impl Var {
    pub fn new(name: &str) -> Result<Self, SymbolicError> {
        Symbol::new(name.strip_prefix('?').unwrap_or(name)).map(Var)
    }

    pub fn name(&self) -> &Symbol {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl FromStr for Var {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.strip_prefix('?') {
            Some(rest) => Var::new(rest),
            None => Err(SymbolicError::InvalidSymbol(s.to_string())),
        }
    }
}

pub type Substitution = BTreeMap<Var, Symbol>;

/// Set of ground atoms believed true; everything absent is false.
pub type State = BTreeSet<Atom>;

/// Ground atom `pred(a,b)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Symbol>,
}

impl Atom {
    pub fn new(predicate: Symbol, args: Vec<Symbol>) -> Self {
        debug_assert!(args.len() <= MAX_ARITY);
        Atom { predicate, args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn pos(self) -> Literal {
        Literal::new(self, true)
    }

    pub fn neg(self) -> Literal {
        Literal::new(self, false)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Atom {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lit: Literal = s.parse()?;
        if !lit.positive {
            return Err(SymbolicError::Syntax {
                column: s.find('!').unwrap_or(0),
                message: "negation not allowed in an atom".into(),
            });
        }
        Ok(lit.atom)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: Atom, positive: bool) -> Self {
        Literal { atom, positive }
    }

    pub fn holds_in(&self, state: &State) -> bool {
        state.contains(&self.atom) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Literal {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negated, template) = Parser::new(s).literal_only()?;
        Ok(Literal::new(template.to_ground()?, !negated))
    }
}

/// Set of literals with no atom at both polarities.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conjunction(BTreeSet<Literal>);

impl Conjunction {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, SymbolicError> {
        let set: BTreeSet<Literal> = literals.into_iter().collect();
        for lit in &set {
            if lit.positive && set.contains(&Literal::new(lit.atom.clone(), false)) {
                return Err(SymbolicError::Contradiction(lit.atom.clone()));
            }
        }
        Ok(Conjunction(set))
    }

    pub fn empty() -> Self {
        Conjunction::default()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter().map(|l| &l.atom)
    }

    /// Literals not satisfied by `state`, in canonical order.
    pub fn unsatisfied<'a>(&'a self, state: &'a State) -> impl Iterator<Item = &'a Literal> {
        self.0.iter().filter(move |l| !l.holds_in(state))
    }

    pub fn with(&self, extra: impl IntoIterator<Item = Literal>) -> Result<Self, SymbolicError> {
        Conjunction::new(self.0.iter().cloned().chain(extra))
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for Conjunction {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser::new(s);
        let mut literals = Vec::new();
        parser.skip_ws();
        if parser.at_end() {
            return Ok(Conjunction::empty());
        }
        loop {
            let (negated, template) = parser.literal()?;
            literals.push(Literal::new(template.to_ground()?, !negated));
            parser.skip_ws();
            if parser.at_end() {
                break;
            }
            parser.expect_conj()?;
        }
        Conjunction::new(literals)
    }
}

impl FromIterator<Literal> for Result<Conjunction, SymbolicError> {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Conjunction::new(iter)
    }
}

/// Template argument: a constant or a variable slot.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Symbol),
    Var(Var),
}

impl Term {
    pub fn resolve(&self, subst: &Substitution) -> Result<Symbol, SymbolicError> {
        match self {
            Term::Const(s) => Ok(s.clone()),
            Term::Var(v) => subst
                .get(v)
                .cloned()
                .ok_or_else(|| SymbolicError::UnboundVariable(v.clone())),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) => write!(f, "{s}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Term {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('?') {
            s.parse().map(Term::Var)
        } else {
            Symbol::new(s).map(Term::Const)
        }
    }
}

/// Parameterized atom `pred(?x, const)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamAtom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl ParamAtom {
    pub fn new(predicate: Symbol, args: Vec<Term>) -> Self {
        ParamAtom { predicate, args }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(|t| match t {
            Term::Const(s) => Some(s),
            Term::Var(_) => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.vars().next().is_none()
    }

    fn to_ground(&self) -> Result<Atom, SymbolicError> {
        if !self.is_ground() {
            return Err(SymbolicError::NotGround(self.to_string()));
        }
        ground(self, &Substitution::new())
    }
}

impl From<&Atom> for ParamAtom {
    fn from(atom: &Atom) -> Self {
        ParamAtom {
            predicate: atom.predicate.clone(),
            args: atom.args.iter().cloned().map(Term::Const).collect(),
        }
    }
}

impl fmt::Display for ParamAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for ParamAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ParamAtom {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negated, template) = Parser::new(s).literal_only()?;
        if negated {
            return Err(SymbolicError::Syntax {
                column: s.find('!').unwrap_or(0),
                message: "negation not allowed here".into(),
            });
        }
        Ok(template)
    }
}

/// Parameterized literal used in behavior preconditions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamLiteral {
    pub atom: ParamAtom,
    pub positive: bool,
}

impl ParamLiteral {
    pub fn ground(&self, subst: &Substitution) -> Result<Literal, SymbolicError> {
        Ok(Literal::new(ground(&self.atom, subst)?, self.positive))
    }
}

impl fmt::Display for ParamLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("!")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Debug for ParamLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ParamLiteral {
    type Err = SymbolicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negated, atom) = Parser::new(s).literal_only()?;
        Ok(ParamLiteral {
            atom,
            positive: !negated,
        })
    }
}

/// Substitutes every variable of `template`.
pub fn ground(template: &ParamAtom, subst: &Substitution) -> Result<Atom, SymbolicError> {
    let args = template
        .args
        .iter()
        .map(|t| t.resolve(subst))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(template.predicate.clone(), args))
}

/// Closed-world entailment: positive atoms present, negative atoms absent.
pub fn entails(state: &State, condition: &Conjunction) -> bool {
    condition.literals().all(|l| l.holds_in(state))
}

/// Fixed arity per predicate, learned on first sight.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateTable {
    arities: BTreeMap<Symbol, usize>,
}

impl PredicateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn arity(&self, predicate: &Symbol) -> Option<usize> {
        self.arities.get(predicate).copied()
    }

    pub fn check(&mut self, predicate: &Symbol, arity: usize) -> Result<(), SymbolicError> {
        match self.arities.get(predicate) {
            Some(&expected) if expected != arity => Err(SymbolicError::Arity {
                predicate: predicate.clone(),
                expected,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(predicate.clone(), arity);
                Ok(())
            }
        }
    }

    pub fn register(&mut self, atom: &Atom) -> Result<(), SymbolicError> {
        self.check(&atom.predicate, atom.arity())
    }

    pub fn parse_literal(&mut self, text: &str) -> Result<Literal, SymbolicError> {
        let literal: Literal = text.parse()?;
        self.register(&literal.atom)?;
        Ok(literal)
    }

    pub fn parse_conjunction(&mut self, text: &str) -> Result<Conjunction, SymbolicError> {
        let conj: Conjunction = text.parse()?;
        for atom in conj.atoms() {
            self.register(atom)?;
        }
        Ok(conj)
    }
}

pub fn parse_literal(text: &str, table: &mut PredicateTable) -> Result<Literal, SymbolicError> {
    table.parse_literal(text)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
            _src: src,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SymbolicError> {
        Err(SymbolicError::Syntax {
            column: self.pos,
            message: message.into(),
        })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SymbolicError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.err(format!("expected `{c}`, found `{found}`")),
                None => self.err(format!("expected `{c}`, found end of input")),
            }
        }
    }

    fn expect_conj(&mut self) -> Result<(), SymbolicError> {
        if self.eat('&') || self.eat('∧') {
            Ok(())
        } else {
            self.err("expected `&` between literals")
        }
    }

    fn ident(&mut self) -> Result<Symbol, SymbolicError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.peek() {
                Some(c) => self.err(format!("expected identifier, found `{c}`")),
                None => self.err("expected identifier, found end of input"),
            };
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        Symbol::new(&text).map_err(|_| SymbolicError::Syntax {
            column: start,
            message: format!("invalid identifier `{text}`"),
        })
    }

    fn term(&mut self) -> Result<Term, SymbolicError> {
        if self.eat('?') {
            Ok(Term::Var(Var(self.ident()?)))
        } else {
            Ok(Term::Const(self.ident()?))
        }
    }

    fn literal(&mut self) -> Result<(bool, ParamAtom), SymbolicError> {
        let negated = self.eat('!');
        let predicate = self.ident()?;
        self.expect('(')?;
        let mut args = Vec::new();
        if !self.eat(')') {
            loop {
                if args.len() == MAX_ARITY {
                    return self.err(format!("more than {MAX_ARITY} arguments"));
                }
                args.push(self.term()?);
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
        }
        Ok((negated, ParamAtom::new(predicate, args)))
    }

    fn literal_only(&mut self) -> Result<(bool, ParamAtom), SymbolicError> {
        let out = self.literal()?;
        self.skip_ws();
        if !self.at_end() {
            return self.err("trailing input");
        }
        Ok(out)
    }
}

macro_rules! text_serde {
    ($($ty:ty),*) => {$(
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

text_serde!(Symbol, Var, Atom, Literal, Conjunction, Term, ParamAtom, ParamLiteral);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(atoms: &[&str]) -> State {
        atoms.iter().map(|a| a.parse().unwrap()).collect()
    }

    #[test]
    fn parses_paper_goal_atom() {
        let mut table = PredicateTable::new();
        let lit = parse_literal("did_survey(zone_a)", &mut table).unwrap();
        assert!(lit.positive);
        assert_eq!(lit.atom.predicate, sym("did_survey"));
        assert_eq!(lit.atom.args, vec![sym("zone_a")]);
        assert_eq!(lit.to_string(), "did_survey(zone_a)");
    }

    #[test]
    fn parses_negation() {
        let lit: Literal = "!calibrated(magnetometer)".parse().unwrap();
        assert!(!lit.positive);
        assert_eq!(lit.to_string(), "!calibrated(magnetometer)");
    }

    #[test]
    fn arity_is_fixed_after_first_registration() {
        let mut table = PredicateTable::new();
        table.parse_literal("at_depth(surface)").unwrap();
        let err = table.parse_literal("at_depth()").unwrap_err();
        assert_eq!(
            err,
            SymbolicError::Arity {
                predicate: sym("at_depth"),
                expected: 1,
                found: 0
            }
        );
    }

    #[test]
    fn syntax_errors_carry_column() {
        match "did_survey(".parse::<Literal>() {
            Err(SymbolicError::Syntax { column, .. }) => assert_eq!(column, 11),
            other => panic!("{other:?}"),
        }
        match "did_survey(zone_a".parse::<Literal>() {
            Err(SymbolicError::Syntax { column, .. }) => assert_eq!(column, 17),
            other => panic!("{other:?}"),
        }
        match "Bad(x)".parse::<Literal>() {
            Err(SymbolicError::Syntax { column, .. }) => assert_eq!(column, 0),
            other => panic!("{other:?}"),
        }
        assert!("p(a,b,c,d,e)".parse::<Literal>().is_err());
        assert!("p(?x)".parse::<Literal>().is_err());
    }

    #[test]
    fn whitespace_is_insignificant() {
        let lit: Literal = "  ! at ( wp_1 ,  wp_2 ) ".parse().unwrap();
        assert_eq!(lit.to_string(), "!at(wp_1,wp_2)");
    }

    #[test]
    fn conjunction_parsing_and_contradiction() {
        let c: Conjunction = "did_survey(zone_a) ∧ at_depth(surface)".parse().unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.to_string(), "at_depth(surface) & did_survey(zone_a)");
        let dup: Conjunction = "p() & p()".parse().unwrap();
        assert_eq!(dup.len(), 1);
        assert!(matches!(
            "p(a) & !p(a)".parse::<Conjunction>(),
            Err(SymbolicError::Contradiction(_))
        ));
        assert!("".parse::<Conjunction>().unwrap().is_empty());
    }

    #[test]
    fn ground_substitutes_variables() {
        let t: ParamAtom = "at(?wp)".parse().unwrap();
        let mut s = Substitution::new();
        s.insert(Var::new("wp").unwrap(), sym("wp_1"));
        assert_eq!(ground(&t, &s).unwrap().to_string(), "at(wp_1)");

        let t: ParamAtom = "did_survey(?z)".parse().unwrap();
        let mut s = Substitution::new();
        s.insert(Var::new("z").unwrap(), sym("zone_a"));
        assert_eq!(ground(&t, &s).unwrap().to_string(), "did_survey(zone_a)");
    }

    #[test]
    fn ground_reports_missing_slot() {
        let t: ParamAtom = "at(?wp)".parse().unwrap();
        assert_eq!(
            ground(&t, &Substitution::new()),
            Err(SymbolicError::UnboundVariable(Var::new("wp").unwrap()))
        );
    }

    #[test]
    fn entailment_examples() {
        let goal: Conjunction = "at_depth(surface)".parse().unwrap();
        assert!(entails(&state(&["at_depth(surface)"]), &goal));

        let neg: Conjunction = "!weights_dropped(descent)".parse().unwrap();
        assert!(entails(&State::new(), &neg));

        let cond: Conjunction = "calibrated(magnetometer) & at_depth(operating)".parse().unwrap();
        // hand truth table over the two atoms
        let table = [
            (vec![], false),
            (vec!["calibrated(magnetometer)"], false),
            (vec!["at_depth(operating)"], false),
            (vec!["calibrated(magnetometer)", "at_depth(operating)"], true),
        ];
        for (atoms, expected) in table {
            assert_eq!(entails(&state(&atoms), &cond), expected, "{atoms:?}");
        }
    }

    #[test]
    fn symbol_validation() {
        assert!(Symbol::new("zone_a").is_ok());
        assert!(Symbol::new("").is_err());
        assert!(Symbol::new("1abc").is_err());
        assert!(Symbol::new("Abc").is_err());
        assert!(Symbol::new(&"a".repeat(64)).is_ok());
        assert!(Symbol::new(&"a".repeat(65)).is_err());
    }

    fn ident_strategy() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_]{0,10}"
    }

    fn literal_strategy() -> impl Strategy<Value = Literal> {
        (
            any::<bool>(),
            ident_strategy(),
            prop::collection::vec(ident_strategy(), 0..=4),
        )
            .prop_map(|(pos, p, args)| {
                Literal::new(Atom::new(sym(&p), args.iter().map(|a| sym(a)).collect()), pos)
            })
    }

    proptest! {
        #[test]
        fn literal_text_round_trips(lit in literal_strategy()) {
            let text = lit.to_string();
            let back: Literal = text.parse().unwrap();
            prop_assert_eq!(&back, &lit);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn entailment_is_monotone_in_positive_literals(
            cond in prop::collection::vec(literal_strategy().prop_map(|l| l.atom), 0..4),
            base in prop::collection::vec(literal_strategy().prop_map(|l| l.atom), 0..6),
            extra in prop::collection::vec(literal_strategy().prop_map(|l| l.atom), 0..6),
        ) {
            let cond = Conjunction::new(cond.into_iter().map(Atom::pos)).unwrap();
            let small: State = base.iter().cloned().collect();
            let big: State = base.into_iter().chain(extra).collect();
            if entails(&small, &cond) {
                prop_assert!(entails(&big, &cond));
            }
        }

        #[test]
        fn grounding_a_ground_atom_is_identity(lit in literal_strategy(), var in ident_strategy(), val in ident_strategy()) {
            let template = ParamAtom::from(&lit.atom);
            let mut s = Substitution::new();
            s.insert(Var::new(&var).unwrap(), sym(&val));
            prop_assert_eq!(ground(&template, &s).unwrap(), lit.atom);
        }
    }
}
