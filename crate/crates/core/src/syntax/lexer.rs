use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    Semi,
    Comma,
    Colon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Assign,
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    And,
    Or,
    DotDot,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Assign => ":=",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Eq => "=",
            Tok::And => "&&",
            Tok::Or => "||",
            Tok::DotDot => "..",
            Tok::Ident(_) | Tok::Number(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let peek = |i: usize| chars.get(i).copied();
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && peek(i + 1) == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let begin = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while peek(i).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                i += 1;
            }
            while peek(i) == Some('\'') {
                i += 1;
            }
            Tok::Ident(chars[begin..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '.' && peek(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while peek(i).is_some_and(|c| c.is_ascii_digit()) {
                i += 1;
            }
            if peek(i) == Some('.') && peek(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                while peek(i).is_some_and(|c| c.is_ascii_digit()) {
                    i += 1;
                }
            }
            if peek(i) == Some('/') && peek(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                while peek(i).is_some_and(|c| c.is_ascii_digit()) {
                    i += 1;
                }
            }
            // Trailing letters or dots make the literal malformed, e.g. `1e3`, `1.2.3`.
            while peek(i).is_some_and(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_')
                && !(peek(i) == Some('.') && peek(i + 1) == Some('.'))
            {
                i += 1;
            }
            Tok::Number(chars[begin..i].iter().collect())
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let (tok, len) = match two.as_str() {
                ":=" => (Tok::Assign, 2),
                "<=" => (Tok::Le, 2),
                ">=" => (Tok::Ge, 2),
                "==" => (Tok::Eq, 2),
                "&&" => (Tok::And, 2),
                "||" => (Tok::Or, 2),
                ".." => (Tok::DotDot, 2),
                _ => match c {
                    ';' => (Tok::Semi, 1),
                    ',' => (Tok::Comma, 1),
                    ':' => (Tok::Colon, 1),
                    '{' => (Tok::LBrace, 1),
                    '}' => (Tok::RBrace, 1),
                    '(' => (Tok::LParen, 1),
                    ')' => (Tok::RParen, 1),
                    '+' => (Tok::Plus, 1),
                    '-' => (Tok::Minus, 1),
                    '*' => (Tok::Star, 1),
                    '<' => (Tok::Lt, 1),
                    '>' => (Tok::Gt, 1),
                    '=' => (Tok::Eq, 1),
                    _ => return Err(ParseError::new(line, col, format!("unexpected character `{c}`"))),
                },
            };
            i += len;
            tok
        };
        col += i - begin;
        out.push(Token { tok, line: start_line, col: start_col });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
