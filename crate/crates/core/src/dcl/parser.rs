//! Hand-rolled lexer and recursive-descent parser for constraint files.
//!
//! Grammar (whitespace-insensitive between tokens, `%` comments to end of line):
//!
//! ```text
//! file        := (module_decl | constraint)*
//! module_decl := "module" NAME ":" pattern ("," pattern)*
//! constraint  := [LABEL ":"] clause
//! clause      := "only" NAME "can-" KIND NAME_LIST
//!              | NAME "can-" KIND "-only" NAME_LIST
//!              | NAME "cannot-" KIND NAME_LIST
//!              | NAME "must-" KIND NAME_LIST
//! NAME_LIST   := NAME ("," NAME)*
//! ```

use crate::facts::DependencyKind;

use super::{Constraint, ConstraintSet, DclError, Modality, ModuleDef, Pattern};

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Word(String),
    Colon,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: u32,
    column: u32,
}

impl Token {
    fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::Colon => "`:`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '$' | '.' | '*' | '-')
}

fn lex(text: &str) -> Result<Vec<Token>, DclError> {
    let mut tokens = Vec::new();
    let mut line = 1u32;
    let mut column = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            ':' => {
                tokens.push(Token { kind: TokenKind::Colon, line, column });
                chars.next();
                column += 1;
            }
            ',' => {
                tokens.push(Token { kind: TokenKind::Comma, line, column });
                chars.next();
                column += 1;
            }
            c if is_word_char(c) => {
                let start_col = column;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_word_char(c) {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    column += 1;
                }
                tokens.push(Token { kind: TokenKind::Word(word), line, column: start_col });
            }
            other => {
                return Err(DclError::Parse {
                    line,
                    column,
                    expected: "a name, `:`, `,`, or `%` comment".to_string(),
                    found: format!("`{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_line: u32,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek2(&self) -> Option<&Token> {
        self.tokens.get(self.pos + 1)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> DclError {
        match self.peek() {
            Some(t) => DclError::Parse {
                line: t.line,
                column: t.column,
                expected: expected.to_string(),
                found: t.describe(),
            },
            None => DclError::Parse {
                line: self.end_line,
                column: 1,
                expected: expected.to_string(),
                found: "end of input".to_string(),
            },
        }
    }

    fn expect_word(&mut self, expected: &str) -> Result<(String, u32, u32), DclError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Word(_), .. }) => {
                let t = self.next().unwrap();
                let TokenKind::Word(w) = t.kind else { unreachable!() };
                Ok((w, t.line, t.column))
            }
            _ => Err(self.error_here(expected)),
        }
    }

    fn expect_colon(&mut self) -> Result<(), DclError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Colon, .. }) => {
                self.next();
                Ok(())
            }
            _ => Err(self.error_here("`:`")),
        }
    }

    fn name_list(&mut self, what: &str) -> Result<Vec<String>, DclError> {
        let mut names = vec![self.expect_word(what)?.0];
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Comma)) {
            self.next();
            names.push(self.expect_word(what)?.0);
        }
        Ok(names)
    }
}

/// Splits a constraint keyword of the form `can-KIND`, `can-KIND-only`,
/// `cannot-KIND` or `must-KIND`.
fn split_keyword(word: &str) -> Option<(Modality, &str)> {
    if let Some(rest) = word.strip_prefix("cannot-") {
        return Some((Modality::Cannot, rest));
    }
    if let Some(rest) = word.strip_prefix("must-") {
        return Some((Modality::Must, rest));
    }
    if let Some(rest) = word.strip_prefix("can-") {
        if let Some(kind) = rest.strip_suffix("-only") {
            return Some((Modality::CanOnly, kind));
        }
        return Some((Modality::OnlyCan, rest)); // caller distinguishes `only` prefix form
    }
    None
}

fn parse_kind(word: &str, line: u32, column: u32) -> Result<DependencyKind, DclError> {
    DependencyKind::from_keyword(word).ok_or(DclError::UnknownKind {
        line,
        column,
        word: word.to_string(),
    })
}

/// Parses a constraint file into a [`ConstraintSet`].
pub fn parse_dcl(text: &str) -> Result<ConstraintSet, DclError> {
    let tokens = lex(text)?;
    let end_line = text.lines().count().max(1) as u32;
    let mut p = Parser { tokens, pos: 0, end_line };
    let mut cs = ConstraintSet::default();
    let mut constraint_no = 0u32;

    while p.peek().is_some() {
        let is_module = matches!(p.peek().map(|t| &t.kind), Some(TokenKind::Word(w)) if w == "module");
        if is_module {
            p.next();
            let (name, line, column) = p.expect_word("a module name")?;
            if cs.module(&name).is_some() {
                return Err(DclError::Parse {
                    line,
                    column,
                    expected: "a unique module name".to_string(),
                    found: format!("duplicate definition of `{name}`"),
                });
            }
            p.expect_colon()?;
            let patterns = p.name_list("a type-name pattern")?.iter().map(|s| Pattern::parse(s)).collect();
            cs.modules.push(ModuleDef::new(name, patterns));
            continue;
        }

        constraint_no += 1;
        // LABEL ':' lookahead; clause words are never followed by a colon.
        let label = if matches!(p.peek().map(|t| &t.kind), Some(TokenKind::Word(_)))
            && matches!(p.peek2().map(|t| &t.kind), Some(TokenKind::Colon))
        {
            let (label, _, _) = p.expect_word("a label")?;
            p.expect_colon()?;
            Some(label)
        } else {
            None
        };
        let id = label.unwrap_or_else(|| format!("C{constraint_no}"));

        let (first, first_line, first_col) = p.expect_word("a module name or `only`")?;
        let constraint = if first == "only" {
            let (origin, ..) = p.expect_word("a module name")?;
            let (kw, kw_line, kw_col) = p.expect_word("`can-KIND`")?;
            let Some(rest) = kw.strip_prefix("can-") else {
                return Err(DclError::Parse {
                    line: kw_line,
                    column: kw_col,
                    expected: "`can-KIND`".to_string(),
                    found: format!("`{kw}`"),
                });
            };
            if rest.ends_with("-only") {
                return Err(DclError::Parse {
                    line: kw_line,
                    column: kw_col,
                    expected: "`can-KIND` (no `-only` in the `only ...` form)".to_string(),
                    found: format!("`{kw}`"),
                });
            }
            let kind = parse_kind(rest, kw_line, kw_col + 4)?;
            let targets = p.name_list("a target module name")?;
            Constraint { id, modality: Modality::OnlyCan, kind, origin, targets }
        } else {
            if split_keyword(&first).is_some() {
                return Err(DclError::Parse {
                    line: first_line,
                    column: first_col,
                    expected: "an origin module name before the constraint keyword".to_string(),
                    found: format!("`{first}`"),
                });
            }
            let (kw, kw_line, kw_col) = p.expect_word("`can-KIND-only`, `cannot-KIND` or `must-KIND`")?;
            let Some((modality, kind_word)) = split_keyword(&kw) else {
                return Err(DclError::Parse {
                    line: kw_line,
                    column: kw_col,
                    expected: "`can-KIND-only`, `cannot-KIND` or `must-KIND`".to_string(),
                    found: format!("`{kw}`"),
                });
            };
            if modality == Modality::OnlyCan {
                // Bare `A can-KIND B` has no meaning: the privilege form needs
                // `only` and the restriction form needs `-only`.
                return Err(DclError::Parse {
                    line: kw_line,
                    column: kw_col,
                    expected: "`can-KIND-only` (or the `only A can-KIND B` form)".to_string(),
                    found: format!("`{kw}`"),
                });
            }
            let offset = kw.len() - kind_word.len() - if modality == Modality::CanOnly { 5 } else { 0 };
            let kind = parse_kind(kind_word, kw_line, kw_col + offset as u32)?;
            let targets = p.name_list("a target module name")?;
            if modality == Modality::Must && targets.len() != 1 {
                return Err(DclError::Parse {
                    line: kw_line,
                    column: kw_col,
                    expected: "exactly one target for a `must` constraint".to_string(),
                    found: format!("{} targets", targets.len()),
                });
            }
            Constraint { id, modality, kind, origin: first, targets }
        };
        cs.constraints.push(constraint);
    }
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcl::print_dcl;

    #[test]
    fn parses_the_four_modalities() {
        let cs = parse_dcl(
            "only Factory can-create DAO\n\
             Util can-depend-only JavaAPI\n\
             View cannot-access Model\n\
             DTO must-implement Serializable\n",
        )
        .unwrap();
        assert_eq!(cs.constraints.len(), 4);

        let c = &cs.constraints[0];
        assert_eq!((c.modality, c.kind), (Modality::OnlyCan, DependencyKind::Create));
        assert_eq!(c.origin, "Factory");
        assert_eq!(c.targets, vec!["DAO".to_string()]);

        let c = &cs.constraints[1];
        assert_eq!((c.modality, c.kind), (Modality::CanOnly, DependencyKind::Depend));
        assert_eq!((c.origin.as_str(), c.targets[0].as_str()), ("Util", "JavaAPI"));

        let c = &cs.constraints[2];
        assert_eq!((c.modality, c.kind), (Modality::Cannot, DependencyKind::Access));

        let c = &cs.constraints[3];
        assert_eq!((c.modality, c.kind), (Modality::Must, DependencyKind::Implement));
        assert_eq!(c.id, "C4");
    }

    #[test]
    fn parses_labels_multi_targets_and_builtin_origin() {
        let cs = parse_dcl("TC9: $system cannot-create Controller, DataSource\n").unwrap();
        let c = &cs.constraints[0];
        assert_eq!(c.id, "TC9");
        assert_eq!(c.origin, "$system");
        assert_eq!(c.targets, vec!["Controller".to_string(), "DataSource".to_string()]);
    }

    #[test]
    fn parses_module_definitions_and_comments() {
        let cs = parse_dcl(
            "% architecture modules\n\
             module DAO: com.app.dao.**, com.app.legacy.OldDAO\n\
             module Web: com.app.web.*\n",
        )
        .unwrap();
        assert_eq!(cs.modules.len(), 2);
        assert_eq!(cs.modules[0].patterns.len(), 2);
        assert_eq!(cs.modules[0].patterns[0], Pattern::Subtree("com.app.dao".into()));
        assert_eq!(cs.modules[0].patterns[1], Pattern::Exact("com.app.legacy.OldDAO".into()));
        assert_eq!(cs.modules[1].patterns[0], Pattern::Segment("com.app.web".into()));
    }

    #[test]
    fn empty_input_is_an_empty_set() {
        let cs = parse_dcl("").unwrap();
        assert!(cs.modules.is_empty() && cs.constraints.is_empty());
    }

    #[test]
    fn unknown_kind_is_reported_with_position() {
        let err = parse_dcl("View cannot-torment Model\n").unwrap_err();
        match err {
            DclError::UnknownKind { word, line, .. } => {
                assert_eq!(word, "torment");
                assert_eq!(line, 1);
            }
            other => panic!("expected UnknownKind, got {other}"),
        }
    }

    #[test]
    fn parse_errors_carry_position_and_expectation() {
        let err = parse_dcl("module A\nB cannot-access C\n").unwrap_err();
        match err {
            DclError::Parse { line, expected, .. } => {
                assert_eq!(line, 2);
                assert!(expected.contains("`:`"));
            }
            other => panic!("expected Parse, got {other}"),
        }
        assert!(parse_dcl("A cannot-access\n").is_err());
        assert!(parse_dcl("only A torment B\n").is_err());
        assert!(parse_dcl("A must-implement B, C\n").is_err());
        assert!(parse_dcl("(\n").is_err());
    }

    #[test]
    fn print_then_parse_round_trips() {
        let text = "module DAO: com.app.dao.**\n\
                    TC5: only Base can-create DAO\n\
                    Util can-depend-only JavaAPI\n";
        let cs = parse_dcl(text).unwrap();
        let printed = print_dcl(&cs);
        let reparsed = parse_dcl(&printed).unwrap();
        assert_eq!(cs, reparsed);
    }
}
