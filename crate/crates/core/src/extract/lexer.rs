//! Tokenizer for the bounded source subset.

use super::ExtractError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Eq,
    At,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.tok {
            Tok::Ident(w) => format!("`{w}`"),
            Tok::IntLit => "an integer literal".into(),
            Tok::FloatLit => "a floating-point literal".into(),
            Tok::StrLit => "a string literal".into(),
            Tok::CharLit => "a character literal".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::At => "`@`".into(),
        }
    }
}

pub fn lex(file: &str, text: &str) -> Result<Vec<Token>, ExtractError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut column = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let span = Span { line, column };
        match c {
            c if c.is_whitespace() => {
                bump!();
            }
            '/' => {
                bump!();
                match chars.peek() {
                    Some('/') => {
                        while let Some(&c) = chars.peek() {
                            if c == '\n' {
                                break;
                            }
                            bump!();
                        }
                    }
                    Some('*') => {
                        bump!();
                        let mut closed = false;
                        while let Some(c) = bump!() {
                            if c == '*' && chars.peek() == Some(&'/') {
                                bump!();
                                closed = true;
                                break;
                            }
                        }
                        if !closed {
                            return Err(err(file, span, "unterminated block comment"));
                        }
                    }
                    _ => return Err(err(file, span, "stray `/` (division is not in the subset)")),
                }
            }
            c if c.is_alphabetic() || c == '_' || c == '$' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '$' {
                        word.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Ident(word), span });
            }
            c if c.is_ascii_digit() => {
                let mut is_float = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '_' {
                        bump!();
                    } else if c == '.' {
                        // Lookahead: `1.5` is a float, `x.y` handled elsewhere.
                        let mut clone = chars.clone();
                        clone.next();
                        if clone.peek().is_some_and(|d| d.is_ascii_digit()) {
                            is_float = true;
                            bump!();
                        } else {
                            break;
                        }
                    } else if matches!(c, 'L' | 'l' | 'f' | 'F' | 'd' | 'D') {
                        if matches!(c, 'f' | 'F' | 'd' | 'D') {
                            is_float = true;
                        }
                        bump!();
                        break;
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: if is_float { Tok::FloatLit } else { Tok::IntLit }, span });
            }
            '"' => {
                bump!();
                let mut closed = false;
                while let Some(c) = bump!() {
                    match c {
                        '\\' => {
                            bump!();
                        }
                        '"' => {
                            closed = true;
                            break;
                        }
                        _ => {}
                    }
                }
                if !closed {
                    return Err(err(file, span, "unterminated string literal"));
                }
                out.push(Token { tok: Tok::StrLit, span });
            }
            '\'' => {
                bump!();
                let mut closed = false;
                while let Some(c) = bump!() {
                    match c {
                        '\\' => {
                            bump!();
                        }
                        '\'' => {
                            closed = true;
                            break;
                        }
                        _ => {}
                    }
                }
                if !closed {
                    return Err(err(file, span, "unterminated character literal"));
                }
                out.push(Token { tok: Tok::CharLit, span });
            }
            _ => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '=' => Tok::Eq,
                    '@' => Tok::At,
                    other => {
                        return Err(err(file, span, &format!("unsupported character `{other}`")))
                    }
                };
                bump!();
                out.push(Token { tok, span });
            }
        }
    }
    Ok(out)
}

fn err(file: &str, span: Span, message: &str) -> ExtractError {
    ExtractError::Parse {
        file: file.to_string(),
        line: span.line,
        column: span.column,
        message: message.to_string(),
    }
}
