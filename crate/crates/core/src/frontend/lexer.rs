use super::FrontendError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Punct,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punct, text)
    }

    pub fn is_ident(&self, text: &str) -> bool {
        self.is(TokenKind::Ident, text)
    }
}

// Longest first.
const PUNCTS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "**", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
    "*=", "/=", "%=", "|=", "&=", "^=", "<<", ">>", "=>", "->", ":=", "{", "}", "(", ")", "[", "]",
    ";", ",", ".", "?", ":", "=", "+", "-", "*", "/", "%", "!", "~", "<", ">", "&", "|", "^", "@",
];

const UNITS: &[&str] = &[
    "wei", "gwei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks",
    "years",
];

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c))
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        _src: src,
    };
    let mut tokens = Vec::new();
    loop {
        skip_trivia(&mut cur)?;
        let (line, col) = (cur.line, cur.col);
        let Some(c) = cur.peek(0) else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                line,
                col,
                end_line: line,
                end_col: col,
            });
            return Ok(tokens);
        };
        let (kind, text) = if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let mut s = String::new();
            while let Some(c) = cur.peek(0) {
                if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            // hex"..." and unicode"..." literals
            if (s == "hex" || s == "unicode") && matches!(cur.peek(0), Some('"') | Some('\'')) {
                let body = lex_string(&mut cur)?;
                (TokenKind::Str, format!("{s}{body}"))
            } else {
                (TokenKind::Ident, s)
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek(1).is_some_and(|d| d.is_ascii_digit())) {
            (TokenKind::Number, lex_number(&mut cur))
        } else if c == '"' || c == '\'' {
            (TokenKind::Str, lex_string(&mut cur)?)
        } else if let Some(p) = PUNCTS.iter().find(|p| cur.starts_with(p)) {
            for _ in 0..p.chars().count() {
                cur.bump();
            }
            (TokenKind::Punct, (*p).to_string())
        } else {
            return Err(FrontendError::syntax(line, col, format!("unexpected character `{c}`")));
        };
        tokens.push(Token {
            kind,
            text,
            line,
            col,
            end_line: cur.line,
            end_col: cur.col,
        });
    }
}

fn skip_trivia(cur: &mut Cursor<'_>) -> Result<(), FrontendError> {
    loop {
        match cur.peek(0) {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek(1) == Some('/') => {
                while let Some(c) = cur.peek(0) {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            Some('/') if cur.peek(1) == Some('*') => {
                let (line, col) = (cur.line, cur.col);
                cur.bump();
                cur.bump();
                loop {
                    if cur.starts_with("*/") {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    if cur.bump().is_none() {
                        return Err(FrontendError::syntax(line, col, "unterminated block comment"));
                    }
                }
            }
            _ => return Ok(()),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> String {
    let mut s = String::new();
    if cur.starts_with("0x") || cur.starts_with("0X") {
        s.push(cur.bump().unwrap());
        s.push(cur.bump().unwrap());
        while let Some(c) = cur.peek(0) {
            if c.is_ascii_hexdigit() || c == '_' {
                s.push(c);
                cur.bump();
            } else {
                break;
            }
        }
        return s;
    }
    while let Some(c) = cur.peek(0) {
        let exponent_sign = (c == '-' || c == '+') && s.ends_with(['e', 'E']);
        if c.is_ascii_digit() || c == '_' || c == '.' || c == 'e' || c == 'E' || exponent_sign {
            // `1.foo` is a member access on a literal, not a decimal point
            if c == '.' && !cur.peek(1).is_some_and(|d| d.is_ascii_digit()) {
                break;
            }
            s.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    s
}

fn lex_string(cur: &mut Cursor<'_>) -> Result<String, FrontendError> {
    let (line, col) = (cur.line, cur.col);
    let quote = cur.bump().unwrap();
    let mut s = String::new();
    s.push(quote);
    loop {
        match cur.bump() {
            None | Some('\n') => {
                return Err(FrontendError::syntax(line, col, "unterminated string literal"));
            }
            Some('\\') => {
                s.push('\\');
                if let Some(c) = cur.bump() {
                    s.push(c);
                }
            }
            Some(c) if c == quote => {
                s.push(c);
                return Ok(s);
            }
            Some(c) => s.push(c),
        }
    }
}

pub fn is_unit(word: &str) -> bool {
    UNITS.contains(&word)
}
