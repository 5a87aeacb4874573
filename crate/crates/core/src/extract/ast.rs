//! Syntax tree for the bounded source subset.

pub use super::lexer::Span;

#[derive(Debug, Clone)]
pub struct CompilationUnit {
    pub package: Option<String>,
    pub imports: Vec<String>,
    pub ty: TypeDecl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeDeclKind {
    Class,
    Interface,
    Annotation,
}

#[derive(Debug, Clone)]
pub struct AnnotationUse {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct TypeDecl {
    pub annotations: Vec<AnnotationUse>,
    pub kind: TypeDeclKind,
    pub name: String,
    pub extends: Vec<(String, Span)>,
    pub implements: Vec<(String, Span)>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct FieldDecl {
    pub annotations: Vec<AnnotationUse>,
    pub is_static: bool,
    pub ty: String,
    pub name: String,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub annotations: Vec<AnnotationUse>,
    pub is_static: bool,
    /// `None` for void and constructors.
    pub return_type: Option<String>,
    pub name: String,
    pub params: Vec<Param>,
    pub throws: Vec<(String, Span)>,
    /// `None` for bodyless declarations (interface and annotation members).
    pub body: Option<Vec<Stmt>>,
}

#[derive(Debug, Clone)]
pub struct CatchClause {
    pub ty: String,
    pub name: String,
    pub span: Span,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Local { ty: String, name: String, init: Option<Expr>, span: Span },
    Expr(Expr),
    Assign { target: Expr, value: Expr },
    Return(Option<Expr>),
    Throw(Expr),
    Try { body: Vec<Stmt>, catches: Vec<CatchClause>, finally: Option<Vec<Stmt>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralKind {
    Int,
    Float,
    Str,
    Char,
    Bool,
    Null,
}

#[derive(Debug, Clone)]
#[allow(dead_code)] // spans are kept on every node for diagnostics
pub enum Expr {
    Literal(LiteralKind, Span),
    /// Dotted name without calls: `x`, `x.f`, `pkg.Type.CONST`.
    Name { parts: Vec<String>, span: Span },
    This(Span),
    New { ty: String, args: Vec<Expr>, span: Span },
    /// `target.name(args)`; `target == None` means a bare self-call.
    Call { target: Option<Box<Expr>>, name: String, args: Vec<Expr>, span: Span },
    /// `target.name` where target is itself a call or creation result.
    FieldOf { target: Box<Expr>, name: String, span: Span },
}
