//! Recursive-descent parser for the supported Solidity subset.
//!
//! Targets the 0.4.x/0.5.x surface syntax (`call.value(x)()`, `throw`,
//! same-name constructors) while accepting the common 0.6+ forms
//! (`constructor`, `fallback`, `receive`, `call{value: x}("")`). Anything
//! outside the subset becomes an `Unsupported` leaf instead of an error.

use super::ast::{NodeKind, Span, TreeNode};
use super::lexer::{is_unit, tokenize, Token, TokenKind};
use super::FrontendError;

type PResult<T> = Result<T, FrontendError>;

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const ASSIGN_OPS: &[&str] = &[
    "=", "|=", "^=", "&=", "<<=", ">>=", ">>>=", "+=", "-=", "*=", "/=", "%=",
];

// Binary precedence levels, loosest first.
const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["|"],
    &["^"],
    &["&"],
    &["<<", ">>", ">>>"],
    &["+", "-"],
    &["*", "/", "%"],
];

const STORAGE_LOCATIONS: &[&str] = &["memory", "storage", "calldata"];

const STATE_VAR_MODIFIERS: &[&str] = &[
    "public",
    "private",
    "internal",
    "external",
    "constant",
    "immutable",
    "override",
    "transient",
];

pub fn is_elementary_type(word: &str) -> bool {
    fn sized(word: &str, prefix: &str) -> bool {
        word.strip_prefix(prefix)
            .is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit()))
    }
    fn fixed(word: &str, prefix: &str) -> bool {
        word.strip_prefix(prefix).is_some_and(|rest| {
            rest.is_empty()
                || rest
                    .split_once('x')
                    .is_some_and(|(m, n)| !m.is_empty() && !n.is_empty() && (m.to_string() + n).chars().all(|c| c.is_ascii_digit()))
        })
    }
    matches!(word, "bool" | "address" | "string" | "byte" | "var")
        || sized(word, "uint")
        || sized(word, "int")
        || sized(word, "bytes")
        || fixed(word, "ufixed")
        || fixed(word, "fixed")
}

impl Parser {
    pub fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            tokens: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, ahead: usize) -> &Token {
        &self.tokens[(self.pos + ahead).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let tok = self.peek().clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if self.peek().is_ident(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error_here(&self, expected: &str) -> FrontendError {
        let tok = self.peek();
        let found = if tok.kind == TokenKind::Eof {
            "end of file".to_string()
        } else {
            format!("`{}`", tok.text)
        };
        FrontendError::syntax(tok.line, tok.col, format!("expected {expected}, found {found}"))
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.error_here(&format!("`{p}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<Token> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.bump())
        } else {
            Err(self.error_here("identifier"))
        }
    }

    /// Span from `start` to the end of the last consumed token.
    fn span_from(&self, start: &Token) -> Span {
        let last = if self.pos == 0 {
            start
        } else {
            &self.tokens[self.pos - 1]
        };
        Span::new(start.line, start.col, last.end_line, last.end_col)
    }

    /// Skips a construct outside the subset: up to and including a `;` at
    /// nesting depth zero, or through a brace block opened at depth zero.
    fn skip_unsupported(&mut self, start: &Token, label: String) -> PResult<TreeNode> {
        let mut depth = 0usize;
        loop {
            let tok = self.peek().clone();
            match tok.kind {
                TokenKind::Eof => {
                    return Err(FrontendError::syntax(
                        start.line,
                        start.col,
                        format!("unterminated `{label}`"),
                    ))
                }
                TokenKind::Punct => match tok.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" => depth = depth.saturating_sub(1),
                    "}" => {
                        if depth == 0 {
                            // closing brace of the enclosing scope
                            break;
                        }
                        depth -= 1;
                        if depth == 0 {
                            self.bump();
                            // `try ... {} catch {}` and `else` chains continue
                            if self.peek().is_ident("catch") {
                                continue;
                            }
                            break;
                        }
                    }
                    ";" if depth == 0 => {
                        self.bump();
                        break;
                    }
                    _ => {}
                },
                _ => {}
            }
            self.bump();
        }
        Ok(TreeNode::new(
            NodeKind::Unsupported,
            Some(label),
            self.span_from(start),
        ))
    }

    pub fn parse_source_unit(&mut self) -> PResult<TreeNode> {
        let first = self.peek().clone();
        let mut items = Vec::new();
        while !self.at_eof() {
            let tok = self.peek().clone();
            if tok.is_ident("pragma") {
                self.skip_unsupported(&tok, "pragma".into())?;
            } else if tok.is_ident("contract") || (tok.is_ident("abstract") && self.peek_at(1).is_ident("contract")) {
                items.push(self.parse_contract()?);
            } else if tok.is_punct(";") {
                self.bump();
            } else if tok.kind == TokenKind::Ident {
                let label = match self.peek_at(1) {
                    t if t.kind == TokenKind::Ident => format!("{} {}", tok.text, t.text),
                    _ => tok.text.clone(),
                };
                items.push(self.skip_unsupported(&tok, label)?);
            } else {
                return Err(self.error_here("a top-level declaration"));
            }
        }
        let span = Span::new(first.line.min(1), 1, self.peek().line, self.peek().col);
        Ok(TreeNode::new(NodeKind::SourceUnit, None, span).with_children(items))
    }

    fn parse_contract(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        self.eat_ident("abstract");
        self.bump(); // `contract`
        let name = self.expect_ident()?.text;
        if self.eat_ident("is") {
            // inheritance lists are not resolved
            while !self.peek().is_punct("{") {
                if self.at_eof() {
                    return Err(self.error_here("`{`"));
                }
                if self.peek().is_punct("(") {
                    self.skip_parens()?;
                } else {
                    self.bump();
                }
            }
        }
        self.expect_punct("{")?;
        let mut members = Vec::new();
        while !self.peek().is_punct("}") {
            if self.at_eof() {
                return Err(self.error_here("`}`"));
            }
            if let Some(member) = self.parse_contract_member(&name)? {
                members.push(member);
            }
        }
        self.bump();
        Ok(TreeNode::new(NodeKind::ContractDefinition, Some(name), self.span_from(&start)).with_children(members))
    }

    fn skip_parens(&mut self) -> PResult<()> {
        let open = self.expect_punct("(")?;
        let mut depth = 1;
        while depth > 0 {
            let tok = self.bump();
            match tok.kind {
                TokenKind::Eof => {
                    return Err(FrontendError::syntax(open.line, open.col, "unclosed `(`"));
                }
                TokenKind::Punct if tok.text == "(" => depth += 1,
                TokenKind::Punct if tok.text == ")" => depth -= 1,
                _ => {}
            }
        }
        Ok(())
    }

    fn parse_contract_member(&mut self, _contract: &str) -> PResult<Option<TreeNode>> {
        let tok = self.peek().clone();
        if tok.is_punct(";") {
            self.bump();
            return Ok(None);
        }
        if tok.is_ident("function") {
            return self.parse_function().map(Some);
        }
        if (tok.is_ident("constructor") || tok.is_ident("fallback") || tok.is_ident("receive"))
            && self.peek_at(1).is_punct("(")
        {
            return self.parse_function().map(Some);
        }
        if ["modifier", "event", "struct", "enum", "using", "error"]
            .iter()
            .any(|w| tok.is_ident(w))
        {
            let label = match self.peek_at(1) {
                t if t.kind == TokenKind::Ident => format!("{} {}", tok.text, t.text),
                _ => tok.text.clone(),
            };
            return self.skip_unsupported(&tok, label).map(Some);
        }
        self.parse_state_variable().map(Some)
    }

    fn parse_state_variable(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        let ty = self.parse_type_name()?;
        while let Some(word) = STATE_VAR_MODIFIERS.iter().find(|w| self.peek().is_ident(w)) {
            let _ = word;
            self.bump();
            if self.peek().is_punct("(") {
                self.skip_parens()?;
            }
        }
        let name = self.expect_ident()?.text;
        let mut children = vec![ty];
        if self.eat_punct("=") {
            children.push(self.parse_expression()?);
        }
        self.expect_punct(";")?;
        Ok(TreeNode::new(NodeKind::VariableDeclaration, Some(name), self.span_from(&start)).with_children(children))
    }

    fn parse_function(&mut self) -> PResult<TreeNode> {
        let start = self.bump();
        let name = if start.is_ident("function") {
            if self.peek().kind == TokenKind::Ident {
                Some(self.bump().text)
            } else {
                None
            }
        } else if start.is_ident("fallback") {
            // keyword fallback, same shape as the unnamed 0.4 form
            None
        } else {
            Some(start.text.clone())
        };
        let params = self.parse_parameter_list(NodeKind::Parameters)?;
        let mut returns = None;
        let mut body = None;
        loop {
            let tok = self.peek().clone();
            if tok.is_ident("returns") {
                self.bump();
                returns = Some(self.parse_parameter_list(NodeKind::ReturnParameters)?);
            } else if tok.is_punct("{") {
                body = Some(self.parse_block()?);
                break;
            } else if tok.is_punct(";") {
                self.bump();
                break;
            } else if tok.kind == TokenKind::Ident {
                // visibility, mutability, modifier invocations
                self.bump();
                while self.eat_punct(".") {
                    self.expect_ident()?;
                }
                if self.peek().is_punct("(") {
                    self.skip_parens()?;
                }
            } else {
                return Err(self.error_here("function body or `;`"));
            }
        }
        let returns = returns.unwrap_or_else(|| {
            let at = self.span_from(&start);
            TreeNode::new(
                NodeKind::ReturnParameters,
                None,
                Span::new(at.end_line, at.end_col, at.end_line, at.end_col),
            )
        });
        let mut children = vec![params, returns];
        children.extend(body);
        Ok(TreeNode::new(NodeKind::FunctionDefinition, name, self.span_from(&start)).with_children(children))
    }

    fn parse_parameter_list(&mut self, kind: NodeKind) -> PResult<TreeNode> {
        let start = self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let pstart = self.peek().clone();
                let ty = self.parse_type_name()?;
                let mut name = None;
                while self.peek().kind == TokenKind::Ident {
                    let word = self.bump().text;
                    if !(STORAGE_LOCATIONS.contains(&word.as_str()) || word == "indexed") {
                        name = Some(word);
                    }
                }
                params.push(
                    TreeNode::new(NodeKind::VariableDeclaration, name, self.span_from(&pstart)).with_children(vec![ty]),
                );
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(TreeNode::new(kind, None, self.span_from(&start)).with_children(params))
    }

    fn parse_type_name(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        let mut ty = if start.is_ident("mapping") {
            self.bump();
            self.expect_punct("(")?;
            let key = self.parse_type_name()?;
            // named mapping keys (0.8.18+)
            if self.peek().kind == TokenKind::Ident {
                self.bump();
            }
            self.expect_punct("=>")?;
            let value = self.parse_type_name()?;
            if self.peek().kind == TokenKind::Ident {
                self.bump();
            }
            self.expect_punct(")")?;
            TreeNode::new(NodeKind::Mapping, Some("mapping".into()), self.span_from(&start))
                .with_children(vec![key, value])
        } else if start.kind == TokenKind::Ident && is_elementary_type(&start.text) {
            self.bump();
            let mut text = start.text.clone();
            if text == "address" && self.eat_ident("payable") {
                text = "address".into();
            }
            TreeNode::new(NodeKind::ElementaryTypeName, Some(text), self.span_from(&start))
        } else if start.kind == TokenKind::Ident && start.text != "function" {
            self.bump();
            let mut text = start.text.clone();
            while self.peek().is_punct(".") && self.peek_at(1).kind == TokenKind::Ident {
                self.bump();
                text.push('.');
                text.push_str(&self.bump().text);
            }
            TreeNode::new(NodeKind::UserDefinedTypeName, Some(text), self.span_from(&start))
        } else {
            return Err(self.error_here("type name"));
        };
        while self.peek().is_punct("[") {
            self.bump();
            if !self.peek().is_punct("]") {
                // array length is not represented
                self.parse_expression()?;
            }
            self.expect_punct("]")?;
            ty = TreeNode::new(NodeKind::ArrayTypeName, Some("[]".into()), self.span_from(&start)).with_children(vec![ty]);
        }
        Ok(ty)
    }

    fn parse_block(&mut self) -> PResult<TreeNode> {
        let start = self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.peek().is_punct("}") {
            if self.at_eof() {
                return Err(FrontendError::syntax(start.line, start.col, "unclosed `{`"));
            }
            stmts.push(self.parse_statement()?);
        }
        self.bump();
        Ok(TreeNode::new(NodeKind::Block, None, self.span_from(&start)).with_children(stmts))
    }

    fn parse_statement(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        if start.is_punct("{") {
            return self.parse_block();
        }
        if start.kind == TokenKind::Ident {
            match start.text.as_str() {
                "if" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.parse_expression()?;
                    self.expect_punct(")")?;
                    let then = self.parse_statement()?;
                    let mut children = vec![cond, then];
                    if self.eat_ident("else") {
                        children.push(self.parse_statement()?);
                    }
                    return Ok(TreeNode::new(NodeKind::IfStatement, None, self.span_from(&start)).with_children(children));
                }
                "while" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.parse_expression()?;
                    self.expect_punct(")")?;
                    let body = self.parse_statement()?;
                    return Ok(TreeNode::new(NodeKind::WhileStatement, None, self.span_from(&start))
                        .with_children(vec![cond, body]));
                }
                "do" => {
                    self.bump();
                    let body = self.parse_statement()?;
                    if !self.eat_ident("while") {
                        return Err(self.error_here("`while`"));
                    }
                    self.expect_punct("(")?;
                    let cond = self.parse_expression()?;
                    self.expect_punct(")")?;
                    self.expect_punct(";")?;
                    return Ok(TreeNode::new(NodeKind::DoWhileStatement, None, self.span_from(&start))
                        .with_children(vec![cond, body]));
                }
                "for" => return self.parse_for(),
                "return" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.peek().is_punct(";") {
                        children.push(self.parse_expression()?);
                    }
                    self.expect_punct(";")?;
                    return Ok(TreeNode::new(NodeKind::Return, None, self.span_from(&start)).with_children(children));
                }
                "break" | "continue" | "throw" => {
                    self.bump();
                    self.expect_punct(";")?;
                    let kind = match start.text.as_str() {
                        "break" => NodeKind::Break,
                        "continue" => NodeKind::Continue,
                        _ => NodeKind::Throw,
                    };
                    return Ok(TreeNode::new(kind, None, self.span_from(&start)));
                }
                "emit" => {
                    self.bump();
                    let call = self.parse_expression()?;
                    self.expect_punct(";")?;
                    return Ok(TreeNode::new(NodeKind::EmitStatement, None, self.span_from(&start))
                        .with_children(vec![call]));
                }
                "assembly" | "unchecked" | "try" => {
                    return self.skip_unsupported(&start, start.text.clone());
                }
                _ => {}
            }
        }
        if let Some(decl) = self.try_variable_declaration()? {
            self.expect_punct(";")?;
            return Ok(decl);
        }
        let expr = self.parse_expression()?;
        self.expect_punct(";")?;
        Ok(TreeNode::new(NodeKind::ExpressionStatement, None, self.span_from(&start)).with_children(vec![expr]))
    }

    fn parse_for(&mut self) -> PResult<TreeNode> {
        let start = self.bump();
        self.expect_punct("(")?;
        let mut children = Vec::new();
        let mut parts = Vec::new();
        if !self.eat_punct(";") {
            let init_start = self.peek().clone();
            let init = match self.try_variable_declaration()? {
                Some(decl) => decl,
                None => {
                    let e = self.parse_expression()?;
                    TreeNode::new(NodeKind::ExpressionStatement, None, self.span_from(&init_start)).with_children(vec![e])
                }
            };
            self.expect_punct(";")?;
            children.push(init);
            parts.push("init");
        }
        if !self.eat_punct(";") {
            children.push(self.parse_expression()?);
            self.expect_punct(";")?;
            parts.push("cond");
        }
        if !self.peek().is_punct(")") {
            let upd_start = self.peek().clone();
            let e = self.parse_expression()?;
            children.push(
                TreeNode::new(NodeKind::ExpressionStatement, None, self.span_from(&upd_start)).with_children(vec![e]),
            );
            parts.push("update");
        }
        self.expect_punct(")")?;
        children.push(self.parse_statement()?);
        parts.push("body");
        // which header slots are present, so children can be told apart
        Ok(TreeNode::new(NodeKind::ForStatement, Some(parts.join(" ")), self.span_from(&start)).with_children(children))
    }

    /// Parses `T [loc] name [= init]` or `(T a, , T b) = init` when the
    /// upcoming tokens form a declaration; otherwise restores the position.
    fn try_variable_declaration(&mut self) -> PResult<Option<TreeNode>> {
        let save = self.pos;
        let start = self.peek().clone();
        if start.is_punct("(") {
            self.bump();
            let mut decls = Vec::new();
            loop {
                if self.peek().is_punct(",") {
                    self.bump();
                    continue;
                }
                if self.peek().is_punct(")") {
                    self.bump();
                    break;
                }
                match self.try_single_declaration() {
                    Some(d) => decls.push(d),
                    None => {
                        self.pos = save;
                        return Ok(None);
                    }
                }
                if !self.peek().is_punct(",") && !self.peek().is_punct(")") {
                    self.pos = save;
                    return Ok(None);
                }
            }
            if decls.is_empty() || !self.peek().is_punct("=") {
                self.pos = save;
                return Ok(None);
            }
            self.bump();
            decls.push(self.parse_expression()?);
            return Ok(Some(
                TreeNode::new(NodeKind::VariableDeclarationStatement, None, self.span_from(&start)).with_children(decls),
            ));
        }
        let Some(decl) = self.try_single_declaration() else {
            self.pos = save;
            return Ok(None);
        };
        let mut children = vec![decl];
        if self.eat_punct("=") {
            children.push(self.parse_expression()?);
        }
        Ok(Some(
            TreeNode::new(NodeKind::VariableDeclarationStatement, None, self.span_from(&start)).with_children(children),
        ))
    }

    fn try_single_declaration(&mut self) -> Option<TreeNode> {
        let save = self.pos;
        let start = self.peek().clone();
        if start.kind != TokenKind::Ident {
            return None;
        }
        let Ok(ty) = self.parse_type_name() else {
            self.pos = save;
            return None;
        };
        while STORAGE_LOCATIONS.iter().any(|w| self.peek().is_ident(w)) {
            self.bump();
        }
        if self.peek().kind != TokenKind::Ident {
            self.pos = save;
            return None;
        }
        let name = self.bump().text;
        Some(TreeNode::new(NodeKind::VariableDeclaration, Some(name), self.span_from(&start)).with_children(vec![ty]))
    }

    pub fn parse_expression(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        let lhs = self.parse_conditional()?;
        if let Some(op) = ASSIGN_OPS.iter().find(|op| self.peek().is_punct(op)) {
            let op = op.to_string();
            self.bump();
            let rhs = self.parse_expression()?;
            return Ok(TreeNode::new(NodeKind::Assignment, Some(op), self.span_from(&start)).with_children(vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn parse_conditional(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        let cond = self.parse_binary(0)?;
        if self.eat_punct("?") {
            let yes = self.parse_expression()?;
            self.expect_punct(":")?;
            let no = self.parse_expression()?;
            return Ok(TreeNode::new(NodeKind::Conditional, None, self.span_from(&start)).with_children(vec![cond, yes, no]));
        }
        Ok(cond)
    }

    fn parse_binary(&mut self, level: usize) -> PResult<TreeNode> {
        if level == BINARY_LEVELS.len() {
            return self.parse_power();
        }
        let start = self.peek().clone();
        let mut lhs = self.parse_binary(level + 1)?;
        while let Some(op) = BINARY_LEVELS[level].iter().find(|op| self.peek().is_punct(op)) {
            let op = op.to_string();
            self.bump();
            let rhs = self.parse_binary(level + 1)?;
            lhs = TreeNode::new(NodeKind::BinaryOperation, Some(op), self.span_from(&start)).with_children(vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn parse_power(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        let base = self.parse_unary()?;
        if self.eat_punct("**") {
            let exp = self.parse_power()?;
            return Ok(TreeNode::new(NodeKind::BinaryOperation, Some("**".into()), self.span_from(&start))
                .with_children(vec![base, exp]));
        }
        Ok(base)
    }

    fn parse_unary(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        let prefix = ["!", "~", "-", "+", "++", "--"]
            .iter()
            .find(|op| start.is_punct(op))
            .map(|op| op.to_string())
            .or_else(|| start.is_ident("delete").then(|| "delete".to_string()));
        if let Some(op) = prefix {
            self.bump();
            let operand = self.parse_unary()?;
            return Ok(TreeNode::new(NodeKind::UnaryOperation, Some(op), self.span_from(&start)).with_children(vec![operand]));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        let mut expr = self.parse_primary()?;
        loop {
            let tok = self.peek().clone();
            if tok.is_punct(".") {
                self.bump();
                let member = self.expect_ident()?.text;
                expr = TreeNode::new(NodeKind::MemberAccess, Some(member), self.span_from(&start)).with_children(vec![expr]);
            } else if tok.is_punct("[") {
                self.bump();
                let mut children = vec![expr];
                if !self.peek().is_punct("]") {
                    children.push(self.parse_expression()?);
                }
                self.expect_punct("]")?;
                expr = TreeNode::new(NodeKind::IndexAccess, None, self.span_from(&start)).with_children(children);
            } else if tok.is_punct("(") {
                let args = self.parse_call_arguments()?;
                let is_require = expr.kind == NodeKind::Identifier && expr.text.as_deref() == Some("require");
                expr = if is_require {
                    TreeNode::new(NodeKind::Require, Some("require".into()), self.span_from(&start)).with_children(args)
                } else {
                    let mut children = vec![expr];
                    children.extend(args);
                    TreeNode::new(NodeKind::FunctionCall, None, self.span_from(&start)).with_children(children)
                };
            } else if tok.is_punct("{")
                && self.peek_at(1).kind == TokenKind::Ident
                && self.peek_at(2).is_punct(":")
            {
                // `f{value: v, gas: g}` becomes `f.value(v).gas(g)`
                self.bump();
                loop {
                    let opt = self.expect_ident()?.text;
                    self.expect_punct(":")?;
                    let value = self.parse_expression()?;
                    let member = TreeNode::new(NodeKind::MemberAccess, Some(opt), self.span_from(&start)).with_children(vec![expr]);
                    expr = TreeNode::new(NodeKind::FunctionCall, None, self.span_from(&start)).with_children(vec![member, value]);
                    if self.eat_punct("}") {
                        break;
                    }
                    self.expect_punct(",")?;
                }
            } else if tok.is_punct("++") || tok.is_punct("--") {
                self.bump();
                expr = TreeNode::new(NodeKind::UnaryOperation, Some(tok.text.clone()), self.span_from(&start))
                    .with_children(vec![expr]);
            } else {
                return Ok(expr);
            }
        }
    }

    fn parse_call_arguments(&mut self) -> PResult<Vec<TreeNode>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        if self.peek().is_punct("{") {
            // named arguments
            self.bump();
            while !self.eat_punct("}") {
                self.expect_ident()?;
                self.expect_punct(":")?;
                args.push(self.parse_expression()?);
                if !self.peek().is_punct("}") {
                    self.expect_punct(",")?;
                }
            }
            self.expect_punct(")")?;
            return Ok(args);
        }
        loop {
            args.push(self.parse_expression()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }

    fn parse_primary(&mut self) -> PResult<TreeNode> {
        let start = self.peek().clone();
        match start.kind {
            TokenKind::Number => {
                self.bump();
                let mut text = start.text.clone();
                if self.peek().kind == TokenKind::Ident && is_unit(&self.peek().text) {
                    text.push(' ');
                    text.push_str(&self.bump().text);
                }
                Ok(TreeNode::new(NodeKind::Literal, Some(text), self.span_from(&start)))
            }
            TokenKind::Str => {
                self.bump();
                let mut text = start.text.clone();
                // adjacent string literals concatenate
                while self.peek().kind == TokenKind::Str {
                    text.push(' ');
                    text.push_str(&self.bump().text);
                }
                Ok(TreeNode::new(NodeKind::Literal, Some(text), self.span_from(&start)))
            }
            TokenKind::Ident => {
                if start.text == "true" || start.text == "false" {
                    self.bump();
                    return Ok(TreeNode::new(NodeKind::Literal, Some(start.text.clone()), self.span_from(&start)));
                }
                if start.text == "new" {
                    self.bump();
                    let ty = self.parse_type_name()?;
                    let text = type_text(&ty);
                    return Ok(TreeNode::new(NodeKind::NewExpression, Some(text), self.span_from(&start)));
                }
                if start.text == "payable" && self.peek_at(1).is_punct("(") {
                    self.bump();
                    return Ok(TreeNode::new(NodeKind::Identifier, Some("payable".into()), self.span_from(&start)));
                }
                if is_elementary_type(&start.text) && self.peek_at(1).is_punct("[") {
                    // `uint[](n)` style type expressions
                    let ty = self.parse_type_name()?;
                    return Ok(TreeNode::new(NodeKind::Identifier, Some(type_text(&ty)), self.span_from(&start)));
                }
                self.bump();
                Ok(TreeNode::new(NodeKind::Identifier, Some(start.text.clone()), self.span_from(&start)))
            }
            TokenKind::Punct if start.text == "(" || start.text == "[" => {
                self.bump();
                let close = if start.text == "(" { ")" } else { "]" };
                let mut items = Vec::new();
                let mut saw_comma = false;
                loop {
                    if self.eat_punct(close) {
                        break;
                    }
                    if self.eat_punct(",") {
                        saw_comma = true;
                        continue;
                    }
                    items.push(self.parse_expression()?);
                    if !self.peek().is_punct(close) {
                        self.expect_punct(",")?;
                        saw_comma = true;
                    }
                }
                if start.text == "(" && items.len() == 1 && !saw_comma {
                    return Ok(items.pop().unwrap());
                }
                Ok(TreeNode::new(NodeKind::TupleExpression, None, self.span_from(&start)).with_children(items))
            }
            _ => Err(self.error_here("expression")),
        }
    }
}

/// Surface text of a parsed type name, e.g. `uint8`, `mapping`, `uint[]`.
fn type_text(ty: &TreeNode) -> String {
    match ty.kind {
        NodeKind::ArrayTypeName => format!("{}[]", type_text(&ty.children[0])),
        _ => ty.text.clone().unwrap_or_default(),
    }
}
