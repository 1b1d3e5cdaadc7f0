//! Error reporting shared by the lexer, parser and model builder.

use crate::span::SourceSpan;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Render diagnostics as `file:line:col: message` followed by the offending
/// source line with a caret marker.
pub fn render_diagnostics(errors: &[Diagnostic], source: &str) -> String {
    let mut out = String::new();
    let lines: Vec<&str> = source.lines().collect();
    for err in errors {
        out.push_str(&format!("{}: {}\n", err.span, err.message));
        if let Some(line) = lines.get(err.span.line as usize - 1) {
            out.push_str(line);
            out.push('\n');
            let pad = " ".repeat(err.span.column.saturating_sub(1) as usize);
            let marker = "^".repeat((err.span.length.max(1)) as usize);
            out.push_str(&pad);
            out.push_str(&marker);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_error_list_renders_empty() {
        assert_eq!(render_diagnostics(&[], "scenario s:\n"), "");
    }

    #[test]
    fn renders_location_and_caret() {
        let errs = vec![Diagnostic::new(
            SourceSpan::new("f.osc", 3, 5, 2),
            "unexpected token",
        )];
        let src = "a\nb\nxxxxYYzz\n";
        let text = render_diagnostics(&errs, src);
        assert!(text.contains("3:5:"));
        assert!(text.contains("xxxxYYzz"));
        assert!(text.contains("    ^^"));
    }
}
