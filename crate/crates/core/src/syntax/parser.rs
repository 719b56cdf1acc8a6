use super::ast::{ClassDecl, ClassName, Expr, FieldDecl, Label, MethodDecl, Param, VarName};
use super::error::SyntaxError;
use super::lexer::{tokenize, Token, TokenKind};
use super::program::Program;

/// Nesting bound for expressions; deeper input is reported, not recursed into.
const MAX_DEPTH: usize = 256;

/// Parses and resolves a MiniOO program.
pub fn parse_program(source: &str) -> Result<Program, SyntaxError> {
    let (classes, main) = parse_unresolved(source)?;
    Program::new(classes, main)
}

/// Parses without name resolution. Useful for inspecting malformed programs.
pub fn parse_unresolved(source: &str) -> Result<(Vec<ClassDecl>, Option<Expr>), SyntaxError> {
    let mut parser = Parser::new(tokenize(source)?);
    parser.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        // Contracts only mean something directly in front of a class header.
        let mut kept: Vec<Token> = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if let TokenKind::Contract(_) = tok.kind {
                let next = tokens[i + 1..]
                    .iter()
                    .find(|t| !matches!(t.kind, TokenKind::Contract(_)));
                if !matches!(next.map(|t| &t.kind), Some(TokenKind::Class)) {
                    continue;
                }
            }
            kept.push(tok.clone());
        }
        Parser {
            tokens: kept,
            pos: 0,
            depth: 0,
        }
    }

    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        let tok = &self.tokens[self.pos];
        Err(SyntaxError::Parse {
            line: tok.line,
            col: tok.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), SyntaxError> {
        if *self.peek() == kind {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected {}, found {}",
                kind.describe(),
                self.peek().describe()
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    fn program(&mut self) -> Result<(Vec<ClassDecl>, Option<Expr>), SyntaxError> {
        let mut classes = Vec::new();
        while matches!(self.peek(), TokenKind::Class | TokenKind::Contract(_)) {
            classes.push(self.class_decl()?);
        }
        let main = if *self.peek() == TokenKind::Eof {
            None
        } else {
            Some(self.expr()?)
        };
        if *self.peek() != TokenKind::Eof {
            return self.error(format!(
                "expected end of input, found {}",
                self.peek().describe()
            ));
        }
        Ok((classes, main))
    }

    fn class_decl(&mut self) -> Result<ClassDecl, SyntaxError> {
        let mut contracts = Vec::new();
        while let TokenKind::Contract(text) = self.peek().clone() {
            contracts.push(text);
            self.bump();
        }
        self.expect(TokenKind::Class)?;
        let name = self.ident("class name")?;
        let super_name = if *self.peek() == TokenKind::Extends {
            self.bump();
            self.ident("superclass name")?
        } else {
            super::ast::OBJECT.to_owned()
        };
        let mut decl = ClassDecl::new(&name, &super_name);
        decl.contracts = contracts;
        self.expect(TokenKind::LBrace)?;
        while *self.peek() != TokenKind::RBrace {
            let ty = ClassName::new(self.ident("member type")?);
            let label = Label::new(self.ident("member name")?);
            match self.peek() {
                TokenKind::Semi => {
                    self.bump();
                    decl.fields.push(FieldDecl { name: label, ty });
                }
                TokenKind::LParen => {
                    self.bump();
                    let params = self.params()?;
                    self.expect(TokenKind::LBrace)?;
                    self.expect(TokenKind::Return)?;
                    let body = self.expr()?;
                    self.expect(TokenKind::Semi)?;
                    self.expect(TokenKind::RBrace)?;
                    decl.methods.push(MethodDecl {
                        name: label,
                        params,
                        ret: ty,
                        body,
                    });
                }
                other => {
                    return self.error(format!(
                        "expected `;` or `(` after member name, found {}",
                        other.describe()
                    ))
                }
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(decl)
    }

    /// Parameter list after the opening parenthesis, consuming the closing one.
    fn params(&mut self) -> Result<Vec<Param>, SyntaxError> {
        let mut params = Vec::new();
        if *self.peek() == TokenKind::RParen {
            self.bump();
            return Ok(params);
        }
        loop {
            let ty = ClassName::new(self.ident("parameter type")?);
            let name = VarName::new(self.ident("parameter name")?);
            params.push(Param { name, ty });
            match self.peek() {
                TokenKind::Comma => {
                    self.bump();
                }
                TokenKind::RParen => {
                    self.bump();
                    return Ok(params);
                }
                other => {
                    return self.error(format!(
                        "expected `,` or `)` in parameter list, found {}",
                        other.describe()
                    ))
                }
            }
        }
    }

    /// Argument list after the opening parenthesis, consuming the closing one.
    fn args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        let mut args = Vec::new();
        if *self.peek() == TokenKind::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                TokenKind::Comma => {
                    self.bump();
                }
                TokenKind::RParen => {
                    self.bump();
                    return Ok(args);
                }
                other => {
                    return self.error(format!(
                        "expected `,` or `)` in argument list, found {}",
                        other.describe()
                    ))
                }
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        if self.depth >= MAX_DEPTH {
            return self.error("expression nested too deeply");
        }
        self.depth += 1;
        let result = self.postfix();
        self.depth -= 1;
        result
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut expr = self.primary()?;
        let entry_depth = self.depth;
        let result = loop {
            if self.depth >= MAX_DEPTH {
                break self.error("expression nested too deeply");
            }
            match self.peek() {
                TokenKind::Dot => {
                    self.bump();
                    let label = match self.ident("member name") {
                        Ok(name) => Label::new(name),
                        Err(e) => break Err(e),
                    };
                    if *self.peek() == TokenKind::LParen {
                        self.bump();
                        let args = match self.args() {
                            Ok(args) => args,
                            Err(e) => break Err(e),
                        };
                        expr = Expr::Invoke(Box::new(expr), label, args);
                    } else {
                        expr = Expr::FieldGet(Box::new(expr), label);
                    }
                }
                TokenKind::InstanceOf => {
                    self.bump();
                    let class = match self.ident("class name") {
                        Ok(name) => ClassName::new(name),
                        Err(e) => break Err(e),
                    };
                    expr = Expr::InstanceOf(Box::new(expr), class);
                }
                _ => break Ok(expr),
            }
            // Each postfix operator adds a level to the tree.
            self.depth += 1;
        };
        self.depth = entry_depth;
        result
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            TokenKind::This => {
                self.bump();
                Ok(Expr::This)
            }
            TokenKind::Ident(name) => {
                self.bump();
                Ok(Expr::Var(VarName::new(name)))
            }
            TokenKind::New => {
                self.bump();
                let class = ClassName::new(self.ident("class name")?);
                self.expect(TokenKind::LParen)?;
                let args = self.args()?;
                Ok(Expr::New(class, args))
            }
            TokenKind::LParen => {
                if self.at_cast() {
                    self.bump();
                    let class = ClassName::new(self.ident("class name")?);
                    self.expect(TokenKind::RParen)?;
                    let inner = self.expr()?;
                    Ok(Expr::Cast(class, Box::new(inner)))
                } else {
                    self.bump();
                    let inner = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(inner)
                }
            }
            other => self.error(format!("expected expression, found {}", other.describe())),
        }
    }

    /// `( IDENT )` followed by something that can start an expression.
    fn at_cast(&self) -> bool {
        matches!(self.peek_at(1), TokenKind::Ident(_))
            && *self.peek_at(2) == TokenKind::RParen
            && matches!(
                self.peek_at(3),
                TokenKind::This | TokenKind::Ident(_) | TokenKind::New | TokenKind::LParen
            )
    }
}
