//! Recursive-descent parser for the bounded source subset: one type per file,
//! no generics, no lambdas, no nested types, no operator expressions.

use super::ast::*;
use super::lexer::{lex, Span, Tok, Token};
use super::ExtractError;

const MODIFIERS: [&str; 6] = ["public", "private", "protected", "static", "final", "abstract"];

pub fn parse_unit(file: &str, text: &str) -> Result<CompilationUnit, ExtractError> {
    let tokens = lex(file, text)?;
    let mut p = Parser { file, tokens, pos: 0 };
    let unit = p.compilation_unit()?;
    if p.pos < p.tokens.len() {
        return Err(p.err_here("end of file (one type declaration per file)"));
    }
    Ok(unit)
}

struct Parser<'a> {
    file: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + offset).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or_else(|| self.tokens.last().map(|t| t.span).unwrap_or(Span { line: 1, column: 1 }))
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> ExtractError {
        let (span, found) = match self.tokens.get(self.pos) {
            Some(t) => (t.span, t.describe()),
            None => (self.span(), "end of file".to_string()),
        };
        ExtractError::Parse {
            file: self.file.to_string(),
            line: span.line,
            column: span.column,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn eat(&mut self, tok: Tok, expected: &str) -> Result<Span, ExtractError> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().unwrap().span)
        } else {
            Err(self.err_here(expected))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == kw)
    }

    fn ident(&mut self, expected: &str) -> Result<(String, Span), ExtractError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.bump().unwrap();
                let Tok::Ident(w) = t.tok else { unreachable!() };
                Ok((w, t.span))
            }
            _ => Err(self.err_here(expected)),
        }
    }

    /// `a` or `a.b.c`.
    fn qname(&mut self) -> Result<(String, Span), ExtractError> {
        let (mut name, span) = self.ident("a name")?;
        while self.peek() == Some(&Tok::Dot) {
            self.bump();
            let (part, _) = self.ident("a name segment after `.`")?;
            name.push('.');
            name.push_str(&part);
        }
        Ok((name, span))
    }

    fn compilation_unit(&mut self) -> Result<CompilationUnit, ExtractError> {
        let package = if self.at_keyword("package") {
            self.bump();
            let (name, _) = self.qname()?;
            self.eat(Tok::Semi, "`;` after package declaration")?;
            Some(name)
        } else {
            None
        };
        let mut imports = Vec::new();
        while self.at_keyword("import") {
            self.bump();
            let (name, _) = self.qname()?;
            self.eat(Tok::Semi, "`;` after import")?;
            imports.push(name);
        }
        let ty = self.type_decl()?;
        Ok(CompilationUnit { package, imports, ty })
    }

    fn annotations(&mut self) -> Result<Vec<AnnotationUse>, ExtractError> {
        let mut out = Vec::new();
        while self.peek() == Some(&Tok::At) {
            // `@interface` introduces a type declaration, not an annotation use.
            if matches!(self.peek_at(1), Some(Tok::Ident(w)) if w == "interface") {
                break;
            }
            let span = self.bump().unwrap().span;
            let (name, _) = self.qname()?;
            // Annotation arguments are tolerated syntactically but carry no facts.
            if self.peek() == Some(&Tok::LParen) {
                self.skip_balanced_parens()?;
            }
            out.push(AnnotationUse { name, span });
        }
        Ok(out)
    }

    fn skip_balanced_parens(&mut self) -> Result<(), ExtractError> {
        self.eat(Tok::LParen, "`(`")?;
        let mut depth = 1u32;
        while depth > 0 {
            match self.bump().map(|t| t.tok) {
                Some(Tok::LParen) => depth += 1,
                Some(Tok::RParen) => depth -= 1,
                Some(_) => {}
                None => return Err(self.err_here("`)`")),
            }
        }
        Ok(())
    }

    /// Returns `is_static` from a run of modifier keywords.
    fn modifiers(&mut self) -> bool {
        let mut is_static = false;
        while let Some(Tok::Ident(w)) = self.peek() {
            if !MODIFIERS.contains(&w.as_str()) {
                break;
            }
            if w == "static" {
                is_static = true;
            }
            self.bump();
        }
        is_static
    }

    fn type_decl(&mut self) -> Result<TypeDecl, ExtractError> {
        let annotations = self.annotations()?;
        self.modifiers();
        let kind = if self.at_keyword("class") {
            self.bump();
            TypeDeclKind::Class
        } else if self.at_keyword("interface") {
            self.bump();
            TypeDeclKind::Interface
        } else if self.peek() == Some(&Tok::At)
            && matches!(self.peek_at(1), Some(Tok::Ident(w)) if w == "interface")
        {
            self.bump();
            self.bump();
            TypeDeclKind::Annotation
        } else {
            return Err(self.err_here("`class`, `interface` or `@interface`"));
        };
        let (name, span) = self.ident("a type name")?;
        let mut extends = Vec::new();
        let mut implements = Vec::new();
        if self.at_keyword("extends") {
            self.bump();
            loop {
                let (n, s) = self.qname()?;
                extends.push((n, s));
                if kind == TypeDeclKind::Interface && self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    continue;
                }
                break;
            }
        }
        if self.at_keyword("implements") {
            if kind != TypeDeclKind::Class {
                return Err(self.err_here("`{` (only classes implement interfaces)"));
            }
            self.bump();
            loop {
                let (n, s) = self.qname()?;
                implements.push((n, s));
                if self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    continue;
                }
                break;
            }
        }
        self.eat(Tok::LBrace, "`{` opening the type body")?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            if self.peek().is_none() {
                return Err(self.err_here("`}` closing the type body"));
            }
            self.member(&name, &mut fields, &mut methods)?;
        }
        self.eat(Tok::RBrace, "`}`")?;
        Ok(TypeDecl { annotations, kind, name, extends, implements, fields, methods, span })
    }

    fn member(
        &mut self,
        type_name: &str,
        fields: &mut Vec<FieldDecl>,
        methods: &mut Vec<MethodDecl>,
    ) -> Result<(), ExtractError> {
        let annotations = self.annotations()?;
        let is_static = self.modifiers();

        if self.at_keyword("void") {
            self.bump();
            let (name, _) = self.ident("a method name")?;
            methods.push(self.method_rest(annotations, is_static, None, name)?);
            return Ok(());
        }

        // Constructor: `TypeName (` with no preceding return type.
        if self.at_keyword(type_name) && self.peek_at(1) == Some(&Tok::LParen) {
            self.bump();
            methods.push(self.method_rest(annotations, is_static, None, "<init>".to_string())?);
            return Ok(());
        }

        let (ty, ty_span) = self.qname()?;
        let (name, _) = self.ident("a member name")?;
        match self.peek() {
            Some(Tok::LParen) => {
                let m = self.method_rest(annotations, is_static, Some(ty), name)?;
                methods.push(m);
                Ok(())
            }
            Some(Tok::Eq) => {
                self.bump();
                let init = self.expr()?;
                self.eat(Tok::Semi, "`;` after field initializer")?;
                fields.push(FieldDecl { annotations, is_static, ty, name, init: Some(init), span: ty_span });
                Ok(())
            }
            Some(Tok::Semi) => {
                self.bump();
                fields.push(FieldDecl { annotations, is_static, ty, name, init: None, span: ty_span });
                Ok(())
            }
            _ => Err(self.err_here("`(`, `=` or `;` after a member name")),
        }
    }

    fn method_rest(
        &mut self,
        annotations: Vec<AnnotationUse>,
        is_static: bool,
        return_type: Option<String>,
        name: String,
    ) -> Result<MethodDecl, ExtractError> {
        self.eat(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let (ty, _) = self.qname()?;
                let (pname, _) = self.ident("a parameter name")?;
                params.push(Param { ty, name: pname });
                if self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    continue;
                }
                break;
            }
        }
        self.eat(Tok::RParen, "`)` closing the parameter list")?;
        let mut throws = Vec::new();
        if self.at_keyword("throws") {
            self.bump();
            loop {
                let (n, s) = self.qname()?;
                throws.push((n, s));
                if self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    continue;
                }
                break;
            }
        }
        let body = match self.peek() {
            Some(Tok::Semi) => {
                self.bump();
                None
            }
            Some(Tok::LBrace) => Some(self.block()?),
            _ => return Err(self.err_here("`{` or `;`")),
        };
        Ok(MethodDecl { annotations, is_static, return_type, name, params, throws, body })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ExtractError> {
        self.eat(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            if self.peek().is_none() {
                return Err(self.err_here("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        self.eat(Tok::RBrace, "`}`")?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, ExtractError> {
        if self.at_keyword("try") {
            self.bump();
            let body = self.block()?;
            let mut catches = Vec::new();
            while self.at_keyword("catch") {
                self.bump();
                self.eat(Tok::LParen, "`(`")?;
                let (ty, span) = self.qname()?;
                let (name, _) = self.ident("an exception variable name")?;
                self.eat(Tok::RParen, "`)`")?;
                let body = self.block()?;
                catches.push(CatchClause { ty, name, span, body });
            }
            let finally = if self.at_keyword("finally") {
                self.bump();
                Some(self.block()?)
            } else {
                None
            };
            if catches.is_empty() && finally.is_none() {
                return Err(self.err_here("`catch` or `finally`"));
            }
            return Ok(Stmt::Try { body, catches, finally });
        }
        if self.at_keyword("return") {
            self.bump();
            if self.peek() == Some(&Tok::Semi) {
                self.bump();
                return Ok(Stmt::Return(None));
            }
            let e = self.expr()?;
            self.eat(Tok::Semi, "`;` after return value")?;
            return Ok(Stmt::Return(Some(e)));
        }
        if self.at_keyword("throw") {
            self.bump();
            let e = self.expr()?;
            self.eat(Tok::Semi, "`;` after throw")?;
            return Ok(Stmt::Throw(e));
        }

        // Local declaration: IDENT(.IDENT)* IDENT ...  — two consecutive
        // identifiers distinguish it from an expression statement.
        if matches!(self.peek(), Some(Tok::Ident(w)) if !is_expression_keyword(w)) {
            let mut i = 1;
            while self.peek_at(i) == Some(&Tok::Dot)
                && matches!(self.peek_at(i + 1), Some(Tok::Ident(_)))
            {
                i += 2;
            }
            if matches!(self.peek_at(i), Some(Tok::Ident(_))) {
                let (ty, span) = self.qname()?;
                let (name, _) = self.ident("a variable name")?;
                let init = match self.peek() {
                    Some(Tok::Eq) => {
                        self.bump();
                        Some(self.expr()?)
                    }
                    _ => None,
                };
                self.eat(Tok::Semi, "`;` after local declaration")?;
                return Ok(Stmt::Local { ty, name, init, span });
            }
        }

        let e = self.expr()?;
        if self.peek() == Some(&Tok::Eq) {
            self.bump();
            let value = self.expr()?;
            self.eat(Tok::Semi, "`;` after assignment")?;
            return Ok(Stmt::Assign { target: e, value });
        }
        self.eat(Tok::Semi, "`;` after expression statement")?;
        Ok(Stmt::Expr(e))
    }

    fn expr(&mut self) -> Result<Expr, ExtractError> {
        let primary = self.primary()?;
        self.postfix(primary)
    }

    fn primary(&mut self) -> Result<Expr, ExtractError> {
        let span = self.span();
        match self.peek() {
            Some(Tok::IntLit) => {
                self.bump();
                Ok(Expr::Literal(LiteralKind::Int, span))
            }
            Some(Tok::FloatLit) => {
                self.bump();
                Ok(Expr::Literal(LiteralKind::Float, span))
            }
            Some(Tok::StrLit) => {
                self.bump();
                Ok(Expr::Literal(LiteralKind::Str, span))
            }
            Some(Tok::CharLit) => {
                self.bump();
                Ok(Expr::Literal(LiteralKind::Char, span))
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.eat(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(w)) => match w.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::Literal(LiteralKind::Bool, span))
                }
                "null" => {
                    self.bump();
                    Ok(Expr::Literal(LiteralKind::Null, span))
                }
                "this" => {
                    self.bump();
                    Ok(Expr::This(span))
                }
                "new" => {
                    self.bump();
                    let (ty, _) = self.qname()?;
                    self.eat(Tok::LParen, "`(` after `new T`")?;
                    let args = self.args()?;
                    Ok(Expr::New { ty, args, span })
                }
                _ => {
                    // Dotted name; a trailing `(` turns the last segment into
                    // a call on the preceding receiver.
                    let mut parts = vec![self.ident("a name")?.0];
                    loop {
                        if self.peek() == Some(&Tok::Dot)
                            && matches!(self.peek_at(1), Some(Tok::Ident(_)))
                        {
                            self.bump();
                            parts.push(self.ident("a name segment")?.0);
                            continue;
                        }
                        break;
                    }
                    if self.peek() == Some(&Tok::LParen) {
                        self.bump();
                        let args = self.args()?;
                        let name = parts.pop().unwrap();
                        let target = if parts.is_empty() {
                            None
                        } else {
                            Some(Box::new(Expr::Name { parts, span }))
                        };
                        Ok(Expr::Call { target, name, args, span })
                    } else {
                        Ok(Expr::Name { parts, span })
                    }
                }
            },
            _ => Err(self.err_here("an expression")),
        }
    }

    fn postfix(&mut self, mut expr: Expr) -> Result<Expr, ExtractError> {
        // Chained links after a call or creation: `.name` or `.name(args)`.
        while self.peek() == Some(&Tok::Dot) {
            if matches!(&expr, Expr::Name { .. }) {
                // Dotted names were consumed greedily in primary(); a dot here
                // follows a literal-like position and is unsupported.
                break;
            }
            let span = self.span();
            self.bump();
            let (name, _) = self.ident("a member name after `.`")?;
            if self.peek() == Some(&Tok::LParen) {
                self.bump();
                let args = self.args()?;
                expr = Expr::Call { target: Some(Box::new(expr)), name, args, span };
            } else {
                expr = Expr::FieldOf { target: Box::new(expr), name, span };
            }
        }
        Ok(expr)
    }

    fn args(&mut self) -> Result<Vec<Expr>, ExtractError> {
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    continue;
                }
                break;
            }
        }
        self.eat(Tok::RParen, "`)` closing the argument list")?;
        Ok(args)
    }
}

fn is_expression_keyword(w: &str) -> bool {
    matches!(w, "new" | "this" | "true" | "false" | "null" | "return" | "throw" | "try")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_class() {
        let unit = parse_unit(
            "C.java",
            "package p;\nimport q.D;\npublic class C extends B implements I, J {\n  D field;\n  static int N = 3;\n  C() {}\n  void m(D d) throws q.E { d.go(); }\n}\n",
        )
        .unwrap();
        assert_eq!(unit.package.as_deref(), Some("p"));
        assert_eq!(unit.imports, vec!["q.D".to_string()]);
        assert_eq!(unit.ty.name, "C");
        assert_eq!(unit.ty.extends.len(), 1);
        assert_eq!(unit.ty.implements.len(), 2);
        assert_eq!(unit.ty.fields.len(), 2);
        assert_eq!(unit.ty.methods.len(), 2);
        assert_eq!(unit.ty.methods[0].name, "<init>");
        assert_eq!(unit.ty.methods[1].throws[0].0, "q.E");
    }

    #[test]
    fn parses_annotation_declaration_and_uses() {
        let unit = parse_unit(
            "A.java",
            "package p;\n@Deprecated\n@Target(ElementType.TYPE)\npublic @interface A { String value(); }\n",
        )
        .unwrap();
        assert_eq!(unit.ty.kind, TypeDeclKind::Annotation);
        assert_eq!(unit.ty.annotations.len(), 2);
        assert_eq!(unit.ty.annotations[1].name, "Target");
        assert_eq!(unit.ty.methods.len(), 1);
    }

    #[test]
    fn parses_bodies_with_locals_calls_and_try() {
        let unit = parse_unit(
            "C.java",
            r#"class C {
  void run() {
    D d = new D("x", 2);
    d.save(d.load());
    Helper.log(d);
    try { d.flush(); } catch (AppError e) { e.report(); } finally { d.close(); }
    this.x = d.f;
    return;
  }
}"#,
        )
        .unwrap();
        let body = unit.ty.methods[0].body.as_ref().unwrap();
        assert_eq!(body.len(), 6);
        assert!(matches!(&body[0], Stmt::Local { ty, name, init: Some(Expr::New { .. }), .. } if ty == "D" && name == "d"));
        assert!(matches!(&body[3], Stmt::Try { catches, finally: Some(_), .. } if catches.len() == 1));
        assert!(matches!(&body[4], Stmt::Assign { .. }));
    }

    #[test]
    fn rejects_out_of_subset_syntax_with_position() {
        let err = parse_unit("C.java", "class C { void m() { if (x) {} } }").unwrap_err();
        match err {
            ExtractError::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 1);
            }
            other => panic!("expected Parse, got {other:?}"),
        }
        assert!(parse_unit("C.java", "class C { int x = 1 + 2; }").is_err());
        assert!(parse_unit("C.java", "class C").is_err());
    }
}
