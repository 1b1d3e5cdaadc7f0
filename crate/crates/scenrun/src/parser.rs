//! Recursive-descent parser producing the AST of a scenario file.
//!
//! Grammar (INDENT/DEDENT come from the lexer):
//!
//!   file        := import* decl*
//!   import      := "import" dotted_name NEWLINE
//!   decl        := scenario | actor_decl | struct_decl | action_decl
//!   scenario    := "scenario" IDENT ":" block
//!   block       := NEWLINE INDENT member+ DEDENT
//!   member      := field | do_dir
//!   field       := IDENT ":" dotted_name ["=" expr] NEWLINE
//!   do_dir      := "do" composition
//!   composition := ("serial"|"parallel") ":" bblock
//!   bblock      := NEWLINE INDENT behavior+ DEDENT
//!   behavior    := [IDENT ":"] (composition | invocation | wait_st | emit_st)
//!   invocation  := dotted_name "(" [arg ("," arg)*] ")" [with_blk] NEWLINE
//!   arg         := [IDENT ":"] expr
//!   with_blk    := "with" ":" NEWLINE INDENT keep+ DEDENT
//!   keep        := "keep" "(" "it" "." IDENT ("=="|"in") expr ")" NEWLINE
//!   wait_st     := "wait" expr NEWLINE
//!   emit_st     := "emit" IDENT NEWLINE
//!   expr        := literal | list | invocation_expr | dotted_name

use crate::ast::{AstKind, AstNode};
use crate::diagnostics::Diagnostic;
use crate::lexer::{Token, TokenKind};
use crate::span::SourceSpan;

pub fn parse(tokens: &[Token]) -> Result<AstNode, Vec<Diagnostic>> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        errors: Vec::new(),
    };
    let file = parser.parse_file();
    if parser.errors.is_empty() {
        Ok(file)
    } else {
        Err(parser.errors)
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    errors: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .expect("token stream ends with EOF")
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset)
    }

    fn bump(&mut self) -> &Token {
        let tok = self
            .tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .expect("token stream ends with EOF");
        if self.pos < self.tokens.len().saturating_sub(1) {
            self.pos += 1;
        }
        tok
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn at_keyword(&self, kw: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Keyword && t.text == kw
    }

    fn at_op(&self, op: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Operator && t.text == op
    }

    fn error_here(&mut self, message: impl Into<String>) {
        let span = self.peek().span.clone();
        self.errors.push(Diagnostic::new(span, message));
    }

    fn expect_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.bump();
            true
        } else {
            self.error_here(format!("expected '{op}', found '{}'", describe(self.peek())));
            false
        }
    }

    fn expect_newline(&mut self) -> bool {
        if self.at_kind(TokenKind::Newline) {
            self.bump();
            true
        } else {
            self.error_here(format!(
                "expected end of line, found '{}'",
                describe(self.peek())
            ));
            self.recover_to_line_end();
            false
        }
    }

    fn expect_identifier(&mut self, what: &str) -> Option<String> {
        if self.at_kind(TokenKind::Identifier) {
            Some(self.bump().text.clone())
        } else {
            self.error_here(format!("expected {what}, found '{}'", describe(self.peek())));
            None
        }
    }

    /// Skip tokens until just past the next NEWLINE, stopping early at a
    /// DEDENT or EOF so block structure is preserved.
    fn recover_to_line_end(&mut self) {
        loop {
            match self.peek().kind {
                TokenKind::Eof | TokenKind::Dedent => return,
                TokenKind::Newline => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    /// Skip a whole indented block (INDENT already consumed by caller is not
    /// assumed; skips until depth returns to the current level).
    fn skip_block_if_present(&mut self) {
        if !self.at_kind(TokenKind::Indent) {
            return;
        }
        let mut depth = 0usize;
        loop {
            match self.peek().kind {
                TokenKind::Eof => return,
                TokenKind::Indent => {
                    depth += 1;
                    self.bump();
                }
                TokenKind::Dedent => {
                    self.bump();
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn dotted_name(&mut self) -> Option<(String, SourceSpan)> {
        let span = self.peek().span.clone();
        let mut name = self.expect_identifier("a name")?;
        while self.at_op(".") {
            self.bump();
            let part = self.expect_identifier("a name after '.'")?;
            name.push('.');
            name.push_str(&part);
        }
        Some((name, span))
    }

    fn parse_file(&mut self) -> AstNode {
        let span = self.peek().span.clone();
        let mut file = AstNode::new(AstKind::File, span);
        while self.at_keyword("import") {
            if let Some(import) = self.parse_import() {
                file.children.push(import);
            }
        }
        loop {
            match self.peek() {
                t if t.kind == TokenKind::Eof => break,
                t if t.kind == TokenKind::Keyword && t.text == "scenario" => {
                    if let Some(decl) = self.parse_scenario() {
                        file.children.push(decl);
                    }
                }
                t if t.kind == TokenKind::Keyword
                    && matches!(t.text.as_str(), "actor" | "struct" | "action") =>
                {
                    if let Some(decl) = self.parse_type_decl() {
                        file.children.push(decl);
                    }
                }
                t if t.kind == TokenKind::Keyword && t.text == "import" => {
                    self.error_here("imports must precede declarations");
                    self.parse_import();
                }
                t if t.kind == TokenKind::Dedent || t.kind == TokenKind::Indent => {
                    // stray block token at top level; consume to guarantee progress
                    self.error_here("statement outside any scenario or declaration");
                    self.bump();
                }
                _ => {
                    self.error_here("statement outside any scenario or declaration");
                    self.recover_to_line_end();
                    self.skip_block_if_present();
                }
            }
        }
        file
    }

    fn parse_import(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // import
        let (name, _) = self.dotted_name().or_else(|| {
            self.recover_to_line_end();
            None
        })?;
        let mut node = AstNode::new(AstKind::Import, span);
        node.set_attr("name", name);
        self.expect_newline();
        Some(node)
    }

    fn parse_scenario(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // scenario
        let name = self.expect_identifier("scenario name").or_else(|| {
            self.recover_to_line_end();
            self.skip_block_if_present();
            None
        })?;
        let mut node = AstNode::new(AstKind::ScenarioDecl, span);
        node.set_attr("name", name);
        if !self.expect_op(":") {
            self.recover_to_line_end();
            self.skip_block_if_present();
            return Some(node);
        }
        if !self.expect_newline() {
            return Some(node);
        }
        if !self.at_kind(TokenKind::Indent) {
            self.error_here("expected an indented scenario body");
            return Some(node);
        }
        self.bump(); // INDENT
        let mut saw_do = false;
        while !self.at_kind(TokenKind::Dedent) && !self.at_kind(TokenKind::Eof) {
            if self.at_keyword("do") {
                if saw_do {
                    self.error_here("'do' directive appears more than once in this scenario");
                }
                saw_do = true;
                if let Some(do_dir) = self.parse_do_directive() {
                    node.children.push(do_dir);
                }
            } else if self.at_kind(TokenKind::Identifier) {
                if let Some(field) = self.parse_field() {
                    node.children.push(field);
                }
            } else {
                self.error_here(format!(
                    "expected a field or 'do' directive, found '{}'",
                    describe(self.peek())
                ));
                self.recover_to_line_end();
                self.skip_block_if_present();
            }
        }
        if self.at_kind(TokenKind::Dedent) {
            self.bump();
        }
        Some(node)
    }

    fn parse_field(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        let name = self.expect_identifier("field name")?;
        if !self.expect_op(":") {
            self.recover_to_line_end();
            return None;
        }
        let (ty, _) = self.dotted_name().or_else(|| {
            self.recover_to_line_end();
            None
        })?;
        let mut node = AstNode::new(AstKind::FieldDecl, span);
        node.set_attr("name", name);
        node.set_attr("type", ty);
        if self.at_op("=") {
            self.bump();
            if let Some(default) = self.parse_expr() {
                node.children.push(default);
            } else {
                self.recover_to_line_end();
                return Some(node);
            }
        }
        self.expect_newline();
        Some(node)
    }

    fn parse_do_directive(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // do
        let mut node = AstNode::new(AstKind::DoDirective, span);
        if self.at_keyword("serial") || self.at_keyword("parallel") {
            if let Some(comp) = self.parse_composition(None) {
                node.children.push(comp);
            }
        } else {
            self.error_here("expected 'serial' or 'parallel' after 'do'");
            self.recover_to_line_end();
            self.skip_block_if_present();
        }
        Some(node)
    }

    fn parse_composition(&mut self, label: Option<String>) -> Option<AstNode> {
        let span = self.peek().span.clone();
        let operator = self.bump().text.clone(); // serial | parallel
        let mut node = AstNode::new(AstKind::Composition, span);
        node.set_attr("operator", operator);
        if let Some(label) = label {
            node.set_attr("label", label);
        }
        if !self.expect_op(":") {
            self.recover_to_line_end();
            self.skip_block_if_present();
            return Some(node);
        }
        if !self.expect_newline() {
            self.skip_block_if_present();
            return Some(node);
        }
        if !self.at_kind(TokenKind::Indent) {
            self.error_here("expected an indented behavior block");
            return Some(node);
        }
        self.bump(); // INDENT
        while !self.at_kind(TokenKind::Dedent) && !self.at_kind(TokenKind::Eof) {
            if let Some(behavior) = self.parse_behavior() {
                node.children.push(behavior);
            }
        }
        if self.at_kind(TokenKind::Dedent) {
            self.bump();
        }
        Some(node)
    }

    fn parse_behavior(&mut self) -> Option<AstNode> {
        // `name: serial:` style labels — an identifier directly followed by
        // a colon that does not start an invocation
        let label = if self.at_kind(TokenKind::Identifier)
            && self.peek_at(1).map(|t| t.text == ":").unwrap_or(false)
        {
            let label = self.bump().text.clone();
            self.bump(); // :
            Some(label)
        } else {
            None
        };
        if self.at_keyword("serial") || self.at_keyword("parallel") {
            self.parse_composition(label)
        } else if self.at_keyword("wait") {
            self.parse_wait(label)
        } else if self.at_keyword("emit") {
            self.parse_emit(label)
        } else if self.at_kind(TokenKind::Identifier) {
            self.parse_invocation_statement(label)
        } else {
            self.error_here(format!(
                "expected a behavior (serial, parallel, wait, emit or an action call), found '{}'",
                describe(self.peek())
            ));
            self.recover_to_line_end();
            self.skip_block_if_present();
            None
        }
    }

    fn parse_wait(&mut self, label: Option<String>) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // wait
        let mut node = AstNode::new(AstKind::WaitStatement, span);
        if let Some(label) = label {
            node.set_attr("label", label);
        }
        match self.parse_expr() {
            Some(expr) => node.children.push(expr),
            None => {
                self.recover_to_line_end();
                return Some(node);
            }
        }
        self.expect_newline();
        Some(node)
    }

    fn parse_emit(&mut self, label: Option<String>) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // emit
        let mut node = AstNode::new(AstKind::EmitStatement, span);
        if let Some(label) = label {
            node.set_attr("label", label);
        }
        match self.expect_identifier("event name") {
            Some(name) => node.set_attr("name", name),
            None => {
                self.recover_to_line_end();
                return Some(node);
            }
        }
        self.expect_newline();
        Some(node)
    }

    fn parse_invocation_statement(&mut self, label: Option<String>) -> Option<AstNode> {
        let mut node = self.parse_invocation_call()?;
        if let Some(label) = label {
            node.set_attr("label", label);
        }
        if self.at_keyword("with") {
            if let Some(with_block) = self.parse_with_block() {
                node.children.push(with_block);
            }
        } else {
            self.expect_newline();
        }
        Some(node)
    }

    /// Parses `dotted_name "(" args ")"` without trailing newline handling.
    fn parse_invocation_call(&mut self) -> Option<AstNode> {
        let (name, span) = self.dotted_name().or_else(|| {
            self.recover_to_line_end();
            None
        })?;
        let mut node = AstNode::new(AstKind::Invocation, span);
        node.set_attr("name", name);
        if !self.expect_op("(") {
            self.recover_to_line_end();
            return None;
        }
        if !self.at_op(")") {
            loop {
                match self.parse_argument() {
                    Some(arg) => node.children.push(arg),
                    None => {
                        self.recover_to_line_end();
                        return Some(node);
                    }
                }
                if self.at_op(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if !self.expect_op(")") {
            self.recover_to_line_end();
        }
        Some(node)
    }

    fn parse_argument(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        let mut node = AstNode::new(AstKind::NamedArgument, span);
        if self.at_kind(TokenKind::Identifier)
            && self.peek_at(1).map(|t| t.text == ":").unwrap_or(false)
        {
            let name = self.bump().text.clone();
            self.bump(); // :
            node.set_attr("name", name);
        }
        let expr = self.parse_expr()?;
        node.children.push(expr);
        Some(node)
    }

    fn parse_with_block(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // with
        let mut node = AstNode::new(AstKind::WithBlock, span);
        if !self.expect_op(":") || !self.expect_newline() {
            self.skip_block_if_present();
            return Some(node);
        }
        if !self.at_kind(TokenKind::Indent) {
            self.error_here("expected an indented block of keep constraints");
            return Some(node);
        }
        self.bump(); // INDENT
        while !self.at_kind(TokenKind::Dedent) && !self.at_kind(TokenKind::Eof) {
            if self.at_keyword("keep") {
                if let Some(keep) = self.parse_keep() {
                    node.children.push(keep);
                }
            } else {
                self.error_here(format!(
                    "expected 'keep', found '{}'",
                    describe(self.peek())
                ));
                self.recover_to_line_end();
            }
        }
        if self.at_kind(TokenKind::Dedent) {
            self.bump();
        }
        Some(node)
    }

    fn parse_keep(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // keep
        let mut node = AstNode::new(AstKind::KeepConstraint, span);
        let ok = (|| {
            if !self.expect_op("(") {
                return false;
            }
            if !self.at_keyword("it") {
                self.error_here("expected 'it' inside keep(...)");
                return false;
            }
            self.bump();
            if !self.expect_op(".") {
                return false;
            }
            let name = match self.expect_identifier("parameter name") {
                Some(n) => n,
                None => return false,
            };
            node.set_attr("name", name);
            let relation = if self.at_op("==") {
                "=="
            } else if self.at_keyword("in") {
                "in"
            } else {
                self.error_here("expected '==' or 'in' in keep constraint");
                return false;
            };
            self.bump();
            node.set_attr("relation", relation);
            match self.parse_expr() {
                Some(expr) => node.children.push(expr),
                None => return false,
            }
            self.expect_op(")")
        })();
        if !ok {
            self.recover_to_line_end();
            return Some(node);
        }
        self.expect_newline();
        Some(node)
    }

    fn parse_expr(&mut self) -> Option<AstNode> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Number | TokenKind::PhysicalLiteral => {
                self.bump();
                let mut node = AstNode::new(AstKind::Literal, tok.span.clone());
                node.set_attr("type", "number");
                node.set_attr("value", tok.number_text());
                if let Some(unit) = &tok.unit {
                    node.set_attr("unit", unit.clone());
                }
                Some(node)
            }
            TokenKind::Str => {
                self.bump();
                let mut node = AstNode::new(AstKind::Literal, tok.span.clone());
                node.set_attr("type", "string");
                node.set_attr("value", tok.string_value());
                Some(node)
            }
            TokenKind::Operator if tok.text == "[" => self.parse_list(),
            TokenKind::Identifier => {
                // invocation-expression or a plain dotted reference
                let (name, span) = self.dotted_name()?;
                if self.at_op("(") {
                    let mut node = AstNode::new(AstKind::Invocation, span);
                    node.set_attr("name", name);
                    self.bump(); // (
                    if !self.at_op(")") {
                        loop {
                            let arg = self.parse_argument()?;
                            node.children.push(arg);
                            if self.at_op(",") {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    if !self.expect_op(")") {
                        return None;
                    }
                    Some(node)
                } else {
                    let mut node = AstNode::new(AstKind::MemberRef, span);
                    node.set_attr("name", name);
                    Some(node)
                }
            }
            _ => {
                self.error_here(format!(
                    "expected an expression, found '{}'",
                    describe(&tok)
                ));
                None
            }
        }
    }

    fn parse_list(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        self.bump(); // [
        let mut node = AstNode::new(AstKind::ListLiteral, span);
        if !self.at_op("]") {
            loop {
                let item = self.parse_expr()?;
                node.children.push(item);
                if self.at_op(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if !self.expect_op("]") {
            return None;
        }
        Some(node)
    }

    fn parse_type_decl(&mut self) -> Option<AstNode> {
        let span = self.peek().span.clone();
        let kw = self.bump().text.clone();
        let kind = match kw.as_str() {
            "actor" => AstKind::ActorDecl,
            "struct" => AstKind::StructDecl,
            _ => AstKind::ActionDecl,
        };
        let mut node = AstNode::new(kind, span);
        let (name, _) = self.dotted_name().or_else(|| {
            self.recover_to_line_end();
            self.skip_block_if_present();
            None
        })?;
        node.set_attr("name", name);
        if self.at_keyword("inherits") {
            self.bump();
            if let Some((base, _)) = self.dotted_name() {
                node.set_attr("inherits", base);
            } else {
                self.recover_to_line_end();
                return Some(node);
            }
        }
        if self.at_kind(TokenKind::Newline) {
            // declaration without a body
            self.bump();
            return Some(node);
        }
        if !self.expect_op(":") || !self.expect_newline() {
            self.skip_block_if_present();
            return Some(node);
        }
        if !self.at_kind(TokenKind::Indent) {
            self.error_here("expected an indented declaration body");
            return Some(node);
        }
        self.bump(); // INDENT
        while !self.at_kind(TokenKind::Dedent) && !self.at_kind(TokenKind::Eof) {
            if self.at_kind(TokenKind::Identifier) {
                if let Some(field) = self.parse_field() {
                    node.children.push(field);
                }
            } else {
                self.error_here(format!(
                    "expected a field declaration, found '{}'",
                    describe(self.peek())
                ));
                self.recover_to_line_end();
                self.skip_block_if_present();
            }
        }
        if self.at_kind(TokenKind::Dedent) {
            self.bump();
        }
        Some(node)
    }
}

fn describe(tok: &Token) -> String {
    match tok.kind {
        TokenKind::Eof => "end of file".to_string(),
        TokenKind::Newline => "end of line".to_string(),
        TokenKind::Indent => "indent".to_string(),
        TokenKind::Dedent => "dedent".to_string(),
        _ => tok.text.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn parse_src(src: &str) -> AstNode {
        let tokens = tokenize(src, "t.osc").expect("lexes");
        parse(&tokens).expect("parses")
    }

    #[test]
    fn minimal_scenario() {
        let file = parse_src("scenario s:\n    do serial:\n        emit end\n");
        assert_eq!(file.kind, AstKind::File);
        let scenario = &file.children[0];
        assert_eq!(scenario.kind, AstKind::ScenarioDecl);
        assert_eq!(scenario.attr("name"), Some("s"));
        let do_dir = &scenario.children[0];
        assert_eq!(do_dir.kind, AstKind::DoDirective);
        let comp = &do_dir.children[0];
        assert_eq!(comp.attr("operator"), Some("serial"));
        assert_eq!(comp.children[0].kind, AstKind::EmitStatement);
        assert_eq!(comp.children[0].attr("name"), Some("end"));
    }

    #[test]
    fn labeled_serial_branch() {
        let src = "scenario s:\n    do parallel:\n        serial:\n            emit end\n        time_out: serial:\n            wait elapsed(60s)\n            emit fail\n";
        let file = parse_src(src);
        let comp = &file.children[0].children[0].children[0];
        assert_eq!(comp.attr("operator"), Some("parallel"));
        assert_eq!(comp.children.len(), 2);
        assert_eq!(comp.children[0].attr("label"), None);
        assert_eq!(comp.children[1].attr("label"), Some("time_out"));
        let wait = &comp.children[1].children[0];
        assert_eq!(wait.kind, AstKind::WaitStatement);
        let elapsed = &wait.children[0];
        assert_eq!(elapsed.kind, AstKind::Invocation);
        assert_eq!(elapsed.attr("name"), Some("elapsed"));
    }

    #[test]
    fn with_block_keep_in_list() {
        let src = "scenario s:\n    do serial:\n        set_node_parameter(node_name: 'n') with:\n            keep(it.parameter_value in ['0.0', '0.1'])\n";
        let file = parse_src(src);
        let call = &file.children[0].children[0].children[0].children[0];
        assert_eq!(call.kind, AstKind::Invocation);
        let with_block = call.children_of(AstKind::WithBlock).next().unwrap();
        let keep = &with_block.children[0];
        assert_eq!(keep.attr("name"), Some("parameter_value"));
        assert_eq!(keep.attr("relation"), Some("in"));
        assert_eq!(keep.children[0].kind, AstKind::ListLiteral);
        assert_eq!(keep.children[0].children.len(), 2);
    }

    #[test]
    fn keep_eq_constraint() {
        let src = "scenario s:\n    do serial:\n        set_node_parameter() with:\n            keep(it.node_name == 'laserscan_modification')\n";
        let file = parse_src(src);
        let call = &file.children[0].children[0].children[0].children[0];
        let keep = &call.children_of(AstKind::WithBlock).next().unwrap().children[0];
        assert_eq!(keep.attr("relation"), Some("=="));
    }

    #[test]
    fn duplicate_do_rejected() {
        let src = "scenario s:\n    do serial:\n        emit end\n    do serial:\n        emit fail\n";
        let tokens = tokenize(src, "t.osc").unwrap();
        let err = parse(&tokens).unwrap_err();
        assert!(err.iter().any(|e| e.message.contains("more than once")));
    }

    #[test]
    fn statement_outside_declaration() {
        let tokens = tokenize("emit end\n", "t.osc").unwrap();
        let err = parse(&tokens).unwrap_err();
        assert!(err
            .iter()
            .any(|e| e.message.contains("outside any scenario")));
    }

    #[test]
    fn action_declaration_with_defaults() {
        let src = "action robot.nav_to_pose:\n    goal: pose_3d\n    tolerance: length = 0.3m\n";
        let file = parse_src(src);
        let action = &file.children[0];
        assert_eq!(action.kind, AstKind::ActionDecl);
        assert_eq!(action.attr("name"), Some("robot.nav_to_pose"));
        assert_eq!(action.children.len(), 2);
        assert_eq!(action.children[1].children.len(), 1);
    }

    #[test]
    fn pretty_print_round_trip() {
        let src = "import osc.robotics\nscenario nav:\n    robot: differential_drive_robot\n    do parallel:\n        serial:\n            robot.nav_to_pose(goal: pose_3d(position_3d(x: 3.0m, y: -3.0m)))\n            emit end\n        time_out: serial:\n            wait elapsed(60s)\n            emit fail\n";
        let ast = parse_src(src);
        let printed = ast.to_source();
        let reparsed = parse_src(&printed);
        assert!(ast.structurally_equal(&reparsed), "round-trip mismatch:\n{printed}");
    }

    #[test]
    fn unexpected_token_lists_expectation() {
        let tokens = tokenize("scenario s\n    do serial:\n        emit end\n", "t.osc").unwrap();
        let err = parse(&tokens).unwrap_err();
        assert!(err.iter().any(|e| e.message.contains("expected ':'")));
    }

    #[test]
    fn stray_dedent_at_top_level_terminates() {
        // recovery after a line that opens indentation but never closes it
        // must still consume the synthesized DEDENT tokens
        let tokens = tokenize("\n        \n        serialelapsedkeep[", "t.osc").unwrap();
        let err = parse(&tokens).unwrap_err();
        assert!(!err.is_empty());
    }
}
