use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    DotDot,
    If,
    Not,
    Plus,
    Minus,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(s) => format!("variable `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::If => "`:-`".into(),
            Tok::Not => "`not`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    push(Tok::DotDot, 2, &mut i, &mut col)
                } else {
                    push(Tok::Dot, 1, &mut i, &mut col)
                }
            }
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    push(Tok::If, 2, &mut i, &mut col)
                } else {
                    return Err(ParseError::syntax(tl, tc, "expected `:-`"));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Le, 2, &mut i, &mut col)
                } else {
                    push(Tok::Lt, 1, &mut i, &mut col)
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Ge, 2, &mut i, &mut col)
                } else {
                    push(Tok::Gt, 1, &mut i, &mut col)
                }
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    push(Tok::Ne, 2, &mut i, &mut col)
                } else {
                    return Err(ParseError::syntax(tl, tc, "expected `!=`"));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                let n = text
                    .parse::<i64>()
                    .map_err(|_| ParseError::syntax(tl, tc, "integer literal out of range"))?;
                out.push(Token {
                    tok: Tok::Int(n),
                    line: tl,
                    col: tc,
                });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c.is_ascii_uppercase() {
                    Tok::Var(text)
                } else if text == "not" {
                    Tok::Not
                } else {
                    Tok::Ident(text)
                };
                out.push(Token {
                    tok,
                    line: tl,
                    col: tc,
                });
            }
            other => {
                return Err(ParseError::syntax(
                    tl,
                    tc,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(out)
}
