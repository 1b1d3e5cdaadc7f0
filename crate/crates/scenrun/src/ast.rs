//! Lossless AST for the scenario language, plus a pretty-printer.

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AstKind {
    File,
    Import,
    ScenarioDecl,
    StructDecl,
    ActorDecl,
    ActionDecl,
    FieldDecl,
    DoDirective,
    Composition,
    Invocation,
    NamedArgument,
    WaitStatement,
    EmitStatement,
    KeepConstraint,
    WithBlock,
    Literal,
    ListLiteral,
    MemberRef,
}

/// One AST node. Attributes hold kind-specific strings such as `name`,
/// `label`, `operator` (serial/parallel), `relation` (== / in), `type`,
/// `value` and `unit`.
#[derive(Debug, Clone, PartialEq)]
pub struct AstNode {
    pub kind: AstKind,
    pub children: Vec<AstNode>,
    pub attrs: Vec<(String, String)>,
    pub span: SourceSpan,
}

impl AstNode {
    pub fn new(kind: AstKind, span: SourceSpan) -> Self {
        Self {
            kind,
            children: Vec::new(),
            attrs: Vec::new(),
            span,
        }
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set_attr(&mut self, key: &str, value: impl Into<String>) {
        self.attrs.push((key.to_string(), value.into()));
    }

    pub fn children_of(&self, kind: AstKind) -> impl Iterator<Item = &AstNode> {
        self.children.iter().filter(move |c| c.kind == kind)
    }

    /// Structural equality ignoring spans.
    pub fn structurally_equal(&self, other: &AstNode) -> bool {
        self.kind == other.kind
            && self.attrs == other.attrs
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.structurally_equal(b))
    }

    /// Re-serialize the AST to scenario source text. Re-parsing the output
    /// yields a structurally identical tree.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        let pad = "    ".repeat(indent);
        match self.kind {
            AstKind::File => {
                for child in &self.children {
                    child.write(out, indent);
                }
            }
            AstKind::Import => {
                out.push_str(&format!("{pad}import {}\n", self.attr("name").unwrap_or("")));
            }
            AstKind::ScenarioDecl => {
                out.push_str(&format!(
                    "{pad}scenario {}:\n",
                    self.attr("name").unwrap_or("")
                ));
                for child in &self.children {
                    child.write(out, indent + 1);
                }
            }
            AstKind::StructDecl | AstKind::ActorDecl | AstKind::ActionDecl => {
                let kw = match self.kind {
                    AstKind::StructDecl => "struct",
                    AstKind::ActorDecl => "actor",
                    _ => "action",
                };
                let name = self.attr("name").unwrap_or("");
                let inherits = self
                    .attr("inherits")
                    .map(|b| format!(" inherits {b}"))
                    .unwrap_or_default();
                if self.children.is_empty() {
                    out.push_str(&format!("{pad}{kw} {name}{inherits}\n"));
                } else {
                    out.push_str(&format!("{pad}{kw} {name}{inherits}:\n"));
                    for child in &self.children {
                        child.write(out, indent + 1);
                    }
                }
            }
            AstKind::FieldDecl => {
                let name = self.attr("name").unwrap_or("");
                let ty = self.attr("type").unwrap_or("");
                match self.children.first() {
                    Some(default) => out.push_str(&format!(
                        "{pad}{name}: {ty} = {}\n",
                        default.to_expr_source()
                    )),
                    None => out.push_str(&format!("{pad}{name}: {ty}\n")),
                }
            }
            AstKind::DoDirective => {
                out.push_str(&format!("{pad}do "));
                if let Some(comp) = self.children.first() {
                    comp.write_composition_head(out, indent);
                }
            }
            AstKind::Composition => {
                out.push_str(&pad);
                if let Some(label) = self.attr("label") {
                    out.push_str(&format!("{label}: "));
                }
                self.write_composition_head(out, indent);
            }
            AstKind::Invocation => {
                out.push_str(&pad);
                if let Some(label) = self.attr("label") {
                    out.push_str(&format!("{label}: "));
                }
                out.push_str(&self.invocation_call_source());
                let with_block = self.children_of(AstKind::WithBlock).next();
                match with_block {
                    Some(wb) => {
                        out.push_str(" with:\n");
                        for keep in &wb.children {
                            keep.write(out, indent + 1);
                        }
                    }
                    None => out.push('\n'),
                }
            }
            AstKind::WaitStatement => {
                let label = self
                    .attr("label")
                    .map(|l| format!("{l}: "))
                    .unwrap_or_default();
                let expr = self
                    .children
                    .first()
                    .map(|e| e.to_expr_source())
                    .unwrap_or_default();
                out.push_str(&format!("{pad}{label}wait {expr}\n"));
            }
            AstKind::EmitStatement => {
                let label = self
                    .attr("label")
                    .map(|l| format!("{l}: "))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{pad}{label}emit {}\n",
                    self.attr("name").unwrap_or("")
                ));
            }
            AstKind::KeepConstraint => {
                let name = self.attr("name").unwrap_or("");
                let rel = self.attr("relation").unwrap_or("==");
                let expr = self
                    .children
                    .first()
                    .map(|e| e.to_expr_source())
                    .unwrap_or_default();
                out.push_str(&format!("{pad}keep(it.{name} {rel} {expr})\n"));
            }
            // expression kinds are rendered via to_expr_source
            AstKind::NamedArgument
            | AstKind::WithBlock
            | AstKind::Literal
            | AstKind::ListLiteral
            | AstKind::MemberRef => {
                out.push_str(&pad);
                out.push_str(&self.to_expr_source());
                out.push('\n');
            }
        }
    }

    fn write_composition_head(&self, out: &mut String, indent: usize) {
        out.push_str(&format!("{}:\n", self.attr("operator").unwrap_or("serial")));
        for child in &self.children {
            child.write(out, indent + 1);
        }
    }

    fn invocation_call_source(&self) -> String {
        let name = self.attr("name").unwrap_or("");
        let args: Vec<String> = self
            .children_of(AstKind::NamedArgument)
            .map(|arg| {
                let expr = arg
                    .children
                    .first()
                    .map(|e| e.to_expr_source())
                    .unwrap_or_default();
                match arg.attr("name") {
                    Some(n) => format!("{n}: {expr}"),
                    None => expr,
                }
            })
            .collect();
        format!("{name}({})", args.join(", "))
    }

    /// Render an expression node inline.
    pub fn to_expr_source(&self) -> String {
        match self.kind {
            AstKind::Literal => {
                let value = self.attr("value").unwrap_or("");
                match self.attr("type") {
                    Some("string") => format!("'{value}'"),
                    _ => format!("{value}{}", self.attr("unit").unwrap_or("")),
                }
            }
            AstKind::ListLiteral => {
                let items: Vec<String> = self.children.iter().map(|c| c.to_expr_source()).collect();
                format!("[{}]", items.join(", "))
            }
            AstKind::Invocation => self.invocation_call_source(),
            AstKind::MemberRef => self.attr("name").unwrap_or("").to_string(),
            _ => String::new(),
        }
    }
}
