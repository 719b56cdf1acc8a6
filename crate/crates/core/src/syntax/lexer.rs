use super::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Text of a `//@` comment, trimmed.
    Contract(String),
    Class,
    Extends,
    Return,
    New,
    InstanceOf,
    This,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Contract(_) => "contract comment".to_owned(),
            TokenKind::Class => "`class`".to_owned(),
            TokenKind::Extends => "`extends`".to_owned(),
            TokenKind::Return => "`return`".to_owned(),
            TokenKind::New => "`new`".to_owned(),
            TokenKind::InstanceOf => "`instanceof`".to_owned(),
            TokenKind::This => "`this`".to_owned(),
            TokenKind::LBrace => "`{`".to_owned(),
            TokenKind::RBrace => "`}`".to_owned(),
            TokenKind::LParen => "`(`".to_owned(),
            TokenKind::RParen => "`)`".to_owned(),
            TokenKind::Semi => "`;`".to_owned(),
            TokenKind::Comma => "`,`".to_owned(),
            TokenKind::Dot => "`.`".to_owned(),
            TokenKind::Eof => "end of input".to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut chars = source.char_indices().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    while let Some(&(start, c)) = chars.peek() {
        let (tok_line, tok_col) = (line, col);
        let mut push = |kind| {
            tokens.push(Token {
                kind,
                line: tok_line,
                col: tok_col,
            })
        };

        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '/' {
            chars.next();
            col += 1;
            if chars.peek().map(|&(_, n)| n) != Some('/') {
                return Err(SyntaxError::Parse {
                    line: tok_line,
                    col: tok_col,
                    message: "unexpected character `/`".to_owned(),
                });
            }
            let mut text = String::new();
            while let Some(&(_, n)) = chars.peek() {
                if n == '\n' {
                    break;
                }
                text.push(n);
                chars.next();
                col += 1;
            }
            // `text` still starts with the second slash.
            if let Some(contract) = text[1..].strip_prefix('@') {
                push(TokenKind::Contract(contract.trim().to_owned()));
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, n)) = chars.peek() {
                if n.is_alphanumeric() || n == '_' {
                    end = i + n.len_utf8();
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let word = &source[start..end];
            push(match word {
                "class" => TokenKind::Class,
                "extends" => TokenKind::Extends,
                "return" => TokenKind::Return,
                "new" => TokenKind::New,
                "instanceof" => TokenKind::InstanceOf,
                "this" => TokenKind::This,
                _ => TokenKind::Ident(word.to_owned()),
            });
            continue;
        }
        let kind = match c {
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            ';' => TokenKind::Semi,
            ',' => TokenKind::Comma,
            '.' => TokenKind::Dot,
            other => {
                return Err(SyntaxError::Parse {
                    line,
                    col,
                    message: format!("unexpected character `{}`", other.escape_debug()),
                })
            }
        };
        push(kind);
        chars.next();
        col += 1;
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line,
        col,
    });
    Ok(tokens)
}
