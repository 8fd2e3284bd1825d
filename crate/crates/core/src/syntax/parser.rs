use super::lexer::{lex, Tok, Token};
use super::{
    Assignment, Atom, AutomatonDecl, BenchDirective, EdgeDecl, Expr, LocationDecl, ModelFile, ParseError, Pos,
    BENCH_COMMANDS,
};
use crate::model::DiscreteVar;
use crate::poly::Cmp;
use crate::rational::Rational;

const KEYWORDS: [&str; 22] = [
    "clocks", "parameters", "data", "discrete", "actions", "synchronize", "automaton", "init", "final", "private",
    "urgent", "location", "invariant", "when", "sync", "do", "goto", "true", "bench", "with", "budget", "or",
];

pub(crate) fn parse(text: &str) -> Result<ModelFile, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, at: 0 };
    p.file()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn pos(&self) -> Pos {
        let t = &self.tokens[self.at];
        Pos { line: t.line, col: t.col }
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.at].tok.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.pos(), message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        let hit = self.peek() == t;
        if hit {
            self.bump();
        }
        hit
    }

    fn expect(&mut self, t: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => Err(self.error(format!("`{s}` is a reserved word"))),
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut names = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?);
        }
        self.expect(Tok::Semi, "`;`")?;
        Ok(names)
    }

    fn number(&mut self) -> Result<Rational, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Number(s) => s.parse().map_err(|_| ParseError::at(pos, format!("malformed rational `{s}`"))),
            other => Err(ParseError::at(pos, format!("expected a number, found {}", other.describe()))),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let pos = self.pos();
        let neg = self.eat(&Tok::Minus);
        let v = self.number()?;
        let v = if neg { -v } else { v };
        if !v.is_integer() {
            return Err(ParseError::at(pos, format!("expected an integer, found `{v}`")));
        }
        i64::try_from(v.numer().clone()).map_err(|_| ParseError::at(pos, "integer out of range"))
    }

    fn file(&mut self) -> Result<ModelFile, ParseError> {
        let mut m = ModelFile::default();
        loop {
            if *self.peek() == Tok::Eof {
                return Ok(m);
            }
            if self.eat_kw("clocks") {
                m.clocks.extend(self.ident_list()?);
            } else if self.eat_kw("parameters") {
                m.parameters.extend(self.ident_list()?);
            } else if self.eat_kw("data") {
                self.expect_kw("parameters")?;
                m.data_parameters.extend(self.ident_list()?);
            } else if self.eat_kw("discrete") {
                m.discretes.push(self.discrete()?);
            } else if self.eat_kw("actions") {
                m.actions.extend(self.ident_list()?);
            } else if self.eat_kw("synchronize") {
                m.synchronize.extend(self.ident_list()?);
            } else if self.is_kw("automaton") {
                m.automata.push(self.automaton()?);
            } else if self.is_kw("bench") {
                m.benches.push(self.bench()?);
            } else {
                return Err(self.unexpected("a declaration"));
            }
        }
    }

    fn discrete(&mut self) -> Result<DiscreteVar, ParseError> {
        let name = self.ident()?;
        self.expect(Tok::Colon, "`:`")?;
        let lo = self.integer()?;
        self.expect(Tok::DotDot, "`..`")?;
        let hi = self.integer()?;
        let init = if self.eat(&Tok::Eq) { self.integer()? } else { lo };
        self.expect(Tok::Semi, "`;`")?;
        Ok(DiscreteVar { name, lo, hi, init })
    }

    fn automaton(&mut self) -> Result<AutomatonDecl, ParseError> {
        let pos = self.pos();
        self.expect_kw("automaton")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut locations = Vec::new();
        while !self.eat(&Tok::RBrace) {
            locations.push(self.location()?);
        }
        Ok(AutomatonDecl { name, locations, pos })
    }

    fn location(&mut self) -> Result<LocationDecl, ParseError> {
        let mut loc = LocationDecl { pos: self.pos(), ..Default::default() };
        loop {
            if self.eat_kw("init") {
                loc.init = true;
            } else if self.eat_kw("final") {
                loc.is_final = true;
            } else if self.eat_kw("private") {
                loc.private = true;
            } else if self.eat_kw("urgent") {
                loc.urgent = true;
            } else {
                break;
            }
        }
        self.expect_kw("location")?;
        loc.pos = self.pos();
        loc.name = self.ident()?;
        if self.eat_kw("invariant") {
            loc.invariant = self.guard()?;
        }
        if self.eat(&Tok::LBrace) {
            while !self.eat(&Tok::RBrace) {
                loc.edges.push(self.edge()?);
            }
        } else {
            self.expect(Tok::Semi, "`;` or `{`")?;
        }
        Ok(loc)
    }

    fn edge(&mut self) -> Result<EdgeDecl, ParseError> {
        let guard = if self.eat_kw("when") { self.guard()? } else { Vec::new() };
        let sync = if self.eat_kw("sync") {
            let pos = self.pos();
            Some((self.ident()?, pos))
        } else {
            None
        };
        let mut assignments = Vec::new();
        if self.eat_kw("do") {
            loop {
                let pos = self.pos();
                let target = self.ident()?;
                self.expect(Tok::Assign, "`:=`")?;
                let value = self.integer()?;
                assignments.push(Assignment { target, value, pos });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect_kw("goto")?;
        let pos = self.pos();
        let target = self.ident()?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(EdgeDecl { guard, sync, assignments, target, pos })
    }

    fn guard(&mut self) -> Result<Vec<Atom>, ParseError> {
        if self.eat_kw("true") {
            self.no_disjunction()?;
            return Ok(Vec::new());
        }
        let mut atoms = self.chain()?;
        while self.eat(&Tok::And) {
            atoms.extend(self.chain()?);
        }
        self.no_disjunction()?;
        Ok(atoms)
    }

    fn no_disjunction(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Or || self.is_kw("or") {
            return Err(self.error("non-conjunctive guard: only `&&` may combine constraints"));
        }
        Ok(())
    }

    /// `e1 cmp e2 [cmp e3]`, the chained form giving two atoms.
    fn chain(&mut self) -> Result<Vec<Atom>, ParseError> {
        let pos = self.pos();
        let first = self.expr()?;
        let cmp = self.cmp()?;
        let second = self.expr()?;
        let mut atoms = vec![Atom { lhs: first, cmp, rhs: second.clone(), pos }];
        if let Ok(cmp2) = self.cmp() {
            let third = self.expr()?;
            atoms.push(Atom { lhs: second, cmp: cmp2, rhs: third, pos });
        }
        Ok(atoms)
    }

    fn cmp(&mut self) -> Result<Cmp, ParseError> {
        let c = match self.peek() {
            Tok::Lt => Cmp::Lt,
            Tok::Le => Cmp::Le,
            Tok::Eq => Cmp::Eq,
            Tok::Ge => Cmp::Ge,
            Tok::Gt => Cmp::Gt,
            _ => return Err(self.unexpected("a comparison")),
        };
        self.bump();
        Ok(c)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = Expr::default();
        let mut sign = Rational::one();
        if self.eat(&Tok::Minus) {
            sign = -sign;
        }
        loop {
            let t = self.term()?;
            e.add(&t, &sign);
            if self.eat(&Tok::Plus) {
                sign = Rational::one();
            } else if self.eat(&Tok::Minus) {
                sign = -Rational::one();
            } else {
                return Ok(e);
            }
        }
    }

    /// Product of factors, at most one of them non-constant.
    fn term(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let mut acc = self.factor()?;
        while self.eat(&Tok::Star) {
            let next = self.factor()?;
            acc = if acc.terms.is_empty() {
                next.scale(&acc.constant)
            } else if next.terms.is_empty() {
                acc.scale(&next.constant)
            } else {
                return Err(ParseError::at(pos, "non-linear term"));
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Number(_) => {
                let c = self.number()?;
                // `2 x` is read as `2*x`.
                if let Tok::Ident(s) = self.peek() {
                    if !KEYWORDS.contains(&s.as_str()) {
                        let name = self.ident()?;
                        return Ok(Expr { terms: vec![(name, c)], constant: Rational::zero() });
                    }
                }
                Ok(Expr { terms: Vec::new(), constant: c })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                Ok(Expr { terms: vec![(name, Rational::one())], constant: Rational::zero() })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Minus => {
                self.bump();
                Ok(self.factor()?.scale(&-Rational::one()))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn bench(&mut self) -> Result<BenchDirective, ParseError> {
        let pos = self.pos();
        self.expect_kw("bench")?;
        let cpos = self.pos();
        let mut command = String::new();
        // Commands may contain dashes, e.g. `full-opacity`.
        loop {
            match self.bump() {
                Tok::Ident(s) => command.push_str(&s),
                other => return Err(ParseError::at(cpos, format!("expected a command, found {}", other.describe()))),
            }
            if !self.eat(&Tok::Minus) {
                break;
            }
            command.push('-');
        }
        if !BENCH_COMMANDS.contains(&command.as_str()) {
            return Err(ParseError::at(cpos, format!("unknown bench command `{command}`")));
        }
        let mut valuation = Vec::new();
        if self.eat_kw("with") {
            loop {
                let name = self.ident()?;
                self.expect(Tok::Eq, "`=`")?;
                let neg = self.eat(&Tok::Minus);
                let v = self.number()?;
                valuation.push((name, if neg { -v } else { v }));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let budget = if self.eat_kw("budget") {
            let bpos = self.pos();
            let b = self.integer()?;
            Some(usize::try_from(b).ok().filter(|&b| b > 0).ok_or_else(|| ParseError::at(bpos, "budget must be positive"))?)
        } else {
            None
        };
        self.expect(Tok::Semi, "`;`")?;
        Ok(BenchDirective { command, valuation, budget, pos })
    }
}
