use std::fmt;

use crate::fuzzy::{
    make_gaussian, make_triangular, Direction, Label, LinguisticVariable, MembershipFunction,
    Universe, ValueKind,
};

use super::{
    validate, Action, ActionValue, Atom, CommandClass, FuzzyRule, ObjectDecl, RuleBase,
    RulebookError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found {}",
            self.line,
            self.col,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Colon,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            let col = line[..i].chars().count() + 1;
            let punct = match c {
                ':' => Some(Tok::Colon),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(tok) = punct {
                out.push(Token {
                    tok,
                    line: ln + 1,
                    col,
                });
                chars.next();
            } else if c.is_whitespace() {
                chars.next();
            } else {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || matches!(c, ':' | '(' | ')') {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                out.push(Token {
                    tok: Tok::Word(word),
                    line: ln + 1,
                    col,
                });
            }
        }
    }
    out
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn describe(t: Option<&Token>) -> String {
    match t.map(|t| &t.tok) {
        None => "end of input".into(),
        Some(Tok::Word(w)) => format!("`{w}`"),
        Some(Tok::Colon) => "`:`".into(),
        Some(Tok::LParen) => "`(`".into(),
        Some(Tok::RParen) => "`)`".into(),
    }
}

fn is_ident(w: &str) -> bool {
    !w.is_empty() && w.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Word(w)) => Some(w),
            _ => None,
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (line, col) = match self.peek() {
            Some(t) => (t.line, t.col),
            None => self
                .toks
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        };
        ParseError {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: describe(self.peek()),
        }
    }

    fn error_here(&self, at: usize, expected: &str, found: String) -> ParseError {
        let t = &self.toks[at];
        ParseError {
            line: t.line,
            col: t.col,
            expected: vec![expected.to_string()],
            found,
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.peek_word() == Some(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn punct(&mut self, p: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().map(|t| &t.tok) == Some(&p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek_word() {
            Some(w) if is_ident(w) && !is_keyword(w) => {
                let w = w.to_string();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek_word() {
            Some(w) if !is_keyword(w) => {
                let w = w.to_string();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek_word().and_then(|w| w.parse::<f64>().ok()) {
            Some(x) if x.is_finite() => {
                self.pos += 1;
                Ok(x)
            }
            _ => Err(self.error(&["number"])),
        }
    }

    fn document(&mut self) -> Result<RuleBase, ParseError> {
        let mut rb = RuleBase {
            variables: Vec::new(),
            objects: Vec::new(),
            rules: Vec::new(),
        };
        while let Some(w) = self.peek_word().map(str::to_owned) {
            match w.as_str() {
                "VAR" => rb.variables.push(self.var_decl()?),
                "OBJECT" => rb.objects.push(self.obj_decl()?),
                "RULE" => rb.rules.push(self.rule()?),
                _ => return Err(self.error(&["`VAR`", "`OBJECT`", "`RULE`"])),
            }
        }
        if self.peek().is_some() {
            return Err(self.error(&["`VAR`", "`OBJECT`", "`RULE`"]));
        }
        Ok(rb)
    }

    fn var_decl(&mut self) -> Result<LinguisticVariable, ParseError> {
        self.keyword("VAR")?;
        let name = self.name("variable name")?;
        let direction = match self.peek_word() {
            Some("input") => Direction::Input,
            Some("output") => Direction::Output,
            _ => return Err(self.error(&["`input`", "`output`"])),
        };
        self.pos += 1;
        let kind = match self.peek_word() {
            Some("linguistic") => ValueKind::Linguistic,
            Some("boolean") => ValueKind::Boolean,
            Some("integer") => ValueKind::Integer,
            _ => return Err(self.error(&["`linguistic`", "`boolean`", "`integer`"])),
        };
        self.pos += 1;
        let unit = self.word("unit")?;
        self.keyword("RANGE")?;
        let range_at = self.pos;
        let (lo, hi) = (self.number()?, self.number()?);
        let universe = Universe::new(lo, hi, unit)
            .map_err(|e| self.error_here(range_at, "valid range", e.to_string()))?;
        let mut labels = Vec::new();
        while self.peek_word() == Some("LABEL") {
            labels.push(self.label_decl()?);
        }
        if labels.is_empty() {
            return Err(self.error(&["`LABEL`"]));
        }
        // label invariants are reported by `validate`, which can name the variable
        Ok(LinguisticVariable {
            name,
            direction,
            kind,
            universe,
            labels,
        })
    }

    fn label_decl(&mut self) -> Result<Label, ParseError> {
        self.keyword("LABEL")?;
        let name = self.name("label name")?;
        let at = self.pos;
        let mf = match self.peek_word() {
            Some("GAUSS") => {
                self.pos += 1;
                let (lo, hi) = (self.number()?, self.number()?);
                make_gaussian(lo, hi)
            }
            Some("TRI") => {
                self.pos += 1;
                let (a, b, c) = (self.number()?, self.number()?, self.number()?);
                make_triangular(a, b, c)
            }
            Some("SINGLETON") => {
                self.pos += 1;
                Ok(MembershipFunction::Singleton {
                    value: self.number()?,
                })
            }
            _ => return Err(self.error(&["`GAUSS`", "`TRI`", "`SINGLETON`"])),
        }
        .map_err(|e| self.error_here(at, "valid membership function", e.to_string()))?;
        Ok(Label { name, mf })
    }

    fn obj_decl(&mut self) -> Result<ObjectDecl, ParseError> {
        self.keyword("OBJECT")?;
        let name = self.name("object name")?;
        self.keyword("AT")?;
        let (x, y) = (self.number()?, self.number()?);
        Ok(ObjectDecl { name, x, y })
    }

    fn rule(&mut self) -> Result<FuzzyRule, ParseError> {
        self.keyword("RULE")?;
        let id = match self.peek_word().and_then(|w| w.parse::<u32>().ok()) {
            Some(id) if id > 0 => id,
            _ => return Err(self.error(&["positive rule id"])),
        };
        self.pos += 1;
        self.punct(Tok::Colon, "`:`")?;
        self.keyword("IF")?;
        let mut antecedent = vec![self.atom()?];
        while self.peek_word() == Some("AND") {
            self.pos += 1;
            antecedent.push(self.atom()?);
        }
        self.keyword("THEN")?;
        let mut consequent = vec![self.action()?];
        while self.peek_word() == Some("AND") {
            self.pos += 1;
            consequent.push(self.action()?);
        }
        self.keyword("CLASS")?;
        let class = self
            .peek_word()
            .and_then(CommandClass::parse)
            .ok_or_else(|| {
                self.error(&[
                    "`reminder`",
                    "`alert`",
                    "`launch`",
                    "`disable`",
                    "`automatic`",
                ])
            })?;
        self.pos += 1;
        Ok(FuzzyRule {
            id,
            part: None,
            antecedent,
            consequent,
            class,
        })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let variable = self.name("variable name")?;
        let object = if self.peek().map(|t| &t.tok) == Some(&Tok::LParen) {
            self.pos += 1;
            let o = self.name("object name")?;
            self.punct(Tok::RParen, "`)`")?;
            Some(o)
        } else {
            None
        };
        self.keyword("IS")?;
        let label = self.name("label")?;
        Ok(Atom {
            variable,
            object,
            label,
        })
    }

    fn action(&mut self) -> Result<Action, ParseError> {
        let variable = self.name("output variable")?;
        self.keyword("IS")?;
        let raw = self.name("label or integer")?;
        let value = match raw.parse::<i64>() {
            Ok(i) => ActionValue::Int(i),
            Err(_) => ActionValue::Label(raw),
        };
        Ok(Action { variable, value })
    }
}

fn is_keyword(w: &str) -> bool {
    matches!(
        w,
        "VAR"
            | "LABEL"
            | "OBJECT"
            | "RULE"
            | "IF"
            | "THEN"
            | "AND"
            | "IS"
            | "CLASS"
            | "RANGE"
            | "AT"
            | "GAUSS"
            | "TRI"
            | "SINGLETON"
    )
}

/// Parses rulebook text without semantic checks.
pub fn parse_unchecked(text: &str) -> Result<RuleBase, ParseError> {
    Parser {
        toks: lex(text),
        pos: 0,
    }
    .document()
}

/// Parses and validates a rulebook.
pub fn parse_rulebook(text: &str) -> Result<RuleBase, RulebookError> {
    let rb = parse_unchecked(text)?;
    let diags = validate(&rb);
    if diags.is_empty() {
        Ok(rb)
    } else {
        Err(RulebookError::Invalid(diags))
    }
}
