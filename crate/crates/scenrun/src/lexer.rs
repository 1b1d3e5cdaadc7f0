//! Indentation-aware tokenizer for scenario source files.
//!
//! Indentation is turned into INDENT/DEDENT tokens using a stack of column
//! widths, as in Python. Newlines inside parentheses or brackets are treated
//! as plain whitespace so invocations may span several lines. Every token
//! records the whitespace and comments preceding it (`leading`), so that
//! concatenating `leading + text` over the whole token stream reproduces the
//! source byte for byte.

use crate::diagnostics::Diagnostic;
use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Number,
    PhysicalLiteral,
    Str,
    Operator,
    Indent,
    Dedent,
    Newline,
    Eof,
}

pub const KEYWORDS: &[&str] = &[
    "import", "scenario", "actor", "action", "struct", "do", "serial", "parallel", "wait", "emit",
    "with", "keep", "in", "it", "inherits",
];

pub const UNITS: &[&str] = &["m", "cm", "s", "ms", "rad", "deg", "percent"];

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Raw source text of the token (quotes included for strings, unit
    /// suffix included for physical literals). Empty for INDENT/DEDENT/EOF.
    pub text: String,
    /// Unit suffix of a PHYSICAL_LITERAL, e.g. "cm".
    pub unit: Option<String>,
    /// Whitespace and comments between the previous token and this one.
    pub leading: String,
    pub span: SourceSpan,
}

impl Token {
    /// Numeric part of a NUMBER or PHYSICAL_LITERAL token.
    pub fn number_text(&self) -> &str {
        match &self.unit {
            Some(u) => &self.text[..self.text.len() - u.len()],
            None => &self.text,
        }
    }

    /// Contents of a string token without the surrounding quotes.
    pub fn string_value(&self) -> &str {
        let t = &self.text;
        if t.len() >= 2 {
            &t[1..t.len() - 1]
        } else {
            ""
        }
    }
}

pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut lexer = Lexer::new(source, file);
    lexer.run();
    if lexer.errors.is_empty() {
        Ok(lexer.tokens)
    } else {
        Err(lexer.errors)
    }
}

struct Lexer<'a> {
    file: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    indent_stack: Vec<u32>,
    bracket_depth: usize,
    trivia: String,
    tokens: Vec<Token>,
    errors: Vec<Diagnostic>,
    at_line_start: bool,
    saw_tab_error: bool,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str, file: &'a str) -> Self {
        Self {
            file,
            chars: source.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            indent_stack: vec![1],
            bracket_depth: 0,
            trivia: String::new(),
            tokens: Vec::new(),
            errors: Vec::new(),
            at_line_start: true,
            saw_tab_error: false,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_here(&self, length: u32) -> SourceSpan {
        SourceSpan::new(self.file, self.line, self.col, length)
    }

    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.errors.push(Diagnostic::new(span, message));
    }

    fn push(&mut self, kind: TokenKind, text: String, unit: Option<String>, span: SourceSpan) {
        let leading = std::mem::take(&mut self.trivia);
        self.tokens.push(Token {
            kind,
            text,
            unit,
            leading,
            span,
        });
    }

    fn push_marker(&mut self, kind: TokenKind) {
        let span = self.span_here(0);
        self.push(kind, String::new(), None, span);
    }

    fn run(&mut self) {
        loop {
            if self.at_line_start && self.bracket_depth == 0 {
                if !self.handle_line_start() {
                    break;
                }
            }
            match self.peek() {
                None => break,
                Some(c) => self.lex_token(c),
            }
        }
        // A final line without a trailing newline still ends in a NEWLINE
        // token; it carries empty text so source reconstruction stays exact.
        if !self.at_line_start {
            self.push_marker(TokenKind::Newline);
            self.at_line_start = true;
        }
        // Close any open blocks before EOF so INDENT/DEDENT stay balanced.
        while self.indent_stack.len() > 1 {
            self.indent_stack.pop();
            self.push_marker(TokenKind::Dedent);
        }
        self.push_marker(TokenKind::Eof);
    }

    /// Consume indentation at the start of a logical line and emit
    /// INDENT/DEDENT tokens. Returns false when the input is exhausted.
    fn handle_line_start(&mut self) -> bool {
        loop {
            let mut width = 0u32;
            let mut probe = self.pos;
            let mut tab_span = None;
            while let Some(&c) = self.chars.get(probe) {
                if c == ' ' {
                    width += 1;
                    probe += 1;
                } else if c == '\t' {
                    tab_span = Some(SourceSpan::new(self.file, self.line, width + 1, 1));
                    width += 1;
                    probe += 1;
                } else {
                    break;
                }
            }
            match self.chars.get(probe) {
                None => {
                    // trailing whitespace before EOF
                    while self.pos < probe {
                        let c = self.bump().unwrap();
                        self.trivia.push(c);
                    }
                    return false;
                }
                Some('\n') | Some('\r') | Some('#') => {
                    // blank or comment-only line: no tokens produced
                    while self.pos < probe {
                        let c = self.bump().unwrap();
                        self.trivia.push(c);
                    }
                    while let Some(c) = self.peek() {
                        let done = c == '\n';
                        let c = self.bump().unwrap();
                        self.trivia.push(c);
                        if done {
                            break;
                        }
                    }
                    if self.peek().is_none() {
                        return false;
                    }
                    continue;
                }
                Some(_) => {
                    if let Some(span) = tab_span {
                        if !self.saw_tab_error {
                            self.error(
                                span,
                                "tab character in indentation; indent with spaces only",
                            );
                            self.saw_tab_error = true;
                        }
                    }
                    while self.pos < probe {
                        let c = self.bump().unwrap();
                        self.trivia.push(c);
                    }
                    let column = width + 1;
                    let top = *self.indent_stack.last().unwrap();
                    if column > top {
                        self.indent_stack.push(column);
                        self.push_marker(TokenKind::Indent);
                    } else if column < top {
                        while *self.indent_stack.last().unwrap() > column {
                            self.indent_stack.pop();
                            self.push_marker(TokenKind::Dedent);
                        }
                        if *self.indent_stack.last().unwrap() != column {
                            let span = SourceSpan::new(self.file, self.line, column, 1);
                            self.error(
                                span,
                                format!(
                                    "inconsistent dedent: column {column} matches no open indentation level"
                                ),
                            );
                            // recover by opening a level at the bad column
                            self.indent_stack.push(column);
                        }
                    }
                    self.at_line_start = false;
                    return true;
                }
            }
        }
    }

    fn lex_token(&mut self, c: char) {
        match c {
            ' ' => {
                self.bump();
                self.trivia.push(' ');
            }
            '\t' => {
                let span = self.span_here(1);
                self.error(span, "tab character outside indentation");
                self.bump();
                self.trivia.push('\t');
            }
            '\r' => {
                self.bump();
                self.trivia.push('\r');
            }
            '\n' => {
                if self.bracket_depth > 0 {
                    self.bump();
                    self.trivia.push('\n');
                    // indentation of continuation lines is plain whitespace
                    while matches!(self.peek(), Some(' ') | Some('\t')) {
                        let c = self.bump().unwrap();
                        self.trivia.push(c);
                    }
                } else {
                    let span = self.span_here(1);
                    self.bump();
                    self.push(TokenKind::Newline, "\n".to_string(), None, span);
                    self.at_line_start = true;
                }
            }
            '#' => {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                    self.trivia.push(c);
                }
            }
            '\'' | '"' => self.lex_string(c),
            '0'..='9' => self.lex_number(false),
            '-' if matches!(self.peek_at(1), Some('0'..='9')) => self.lex_number(true),
            c if c.is_alphabetic() || c == '_' => self.lex_word(),
            '(' | '[' => {
                self.bracket_depth += 1;
                let span = self.span_here(1);
                self.bump();
                self.push(TokenKind::Operator, c.to_string(), None, span);
            }
            ')' | ']' => {
                self.bracket_depth = self.bracket_depth.saturating_sub(1);
                let span = self.span_here(1);
                self.bump();
                self.push(TokenKind::Operator, c.to_string(), None, span);
            }
            ',' | ':' | '.' => {
                let span = self.span_here(1);
                self.bump();
                self.push(TokenKind::Operator, c.to_string(), None, span);
            }
            '=' => {
                if self.peek_at(1) == Some('=') {
                    let span = self.span_here(2);
                    self.bump();
                    self.bump();
                    self.push(TokenKind::Operator, "==".to_string(), None, span);
                } else {
                    let span = self.span_here(1);
                    self.bump();
                    self.push(TokenKind::Operator, "=".to_string(), None, span);
                }
            }
            other => {
                let span = self.span_here(1);
                self.error(span, format!("unknown character '{other}'"));
                self.bump();
                self.trivia.push(other);
            }
        }
    }

    fn lex_string(&mut self, quote: char) {
        let span_start = self.span_here(0);
        let mut text = String::new();
        text.push(self.bump().unwrap());
        let mut terminated = false;
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
            text.push(c);
            if c == quote {
                terminated = true;
                break;
            }
        }
        let mut span = span_start;
        span.length = text.chars().count() as u32;
        if !terminated {
            self.error(span.clone(), "unterminated string literal");
            text.push(quote); // recover with a synthetic closing quote
        }
        self.push(TokenKind::Str, text, None, span);
    }

    fn lex_number(&mut self, negative: bool) {
        let span_start = self.span_here(0);
        let mut text = String::new();
        if negative {
            text.push(self.bump().unwrap());
        }
        while matches!(self.peek(), Some('0'..='9')) {
            text.push(self.bump().unwrap());
        }
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some('0'..='9')) {
            text.push(self.bump().unwrap());
            while matches!(self.peek(), Some('0'..='9')) {
                text.push(self.bump().unwrap());
            }
        }
        // a trailing identifier run that names a unit makes this a physical literal
        let mut suffix = String::new();
        let mut probe = 0usize;
        while let Some(c) = self.peek_at(probe) {
            if c.is_alphabetic() || c == '_' {
                suffix.push(c);
                probe += 1;
            } else {
                break;
            }
        }
        let unit = if !suffix.is_empty() && UNITS.contains(&suffix.as_str()) {
            for _ in 0..suffix.len() {
                text.push(self.bump().unwrap());
            }
            Some(suffix)
        } else {
            None
        };
        let mut span = span_start;
        span.length = text.chars().count() as u32;
        let kind = if unit.is_some() {
            TokenKind::PhysicalLiteral
        } else {
            TokenKind::Number
        };
        self.push(kind, text, unit, span);
    }

    fn lex_word(&mut self) {
        let span_start = self.span_here(0);
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let mut span = span_start;
        span.length = text.chars().count() as u32;
        let kind = if KEYWORDS.contains(&text.as_str()) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        self.push(kind, text, None, span);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(tokens: &[Token]) -> Vec<TokenKind> {
        tokens.iter().map(|t| t.kind).collect()
    }

    #[test]
    fn empty_input_is_just_eof() {
        let tokens = tokenize("", "t.osc").unwrap();
        assert_eq!(kinds(&tokens), vec![TokenKind::Eof]);
    }

    #[test]
    fn wait_elapsed_line() {
        let tokens = tokenize("wait elapsed(60s)", "t.osc").unwrap();
        let texts: Vec<(&TokenKind, &str)> =
            tokens.iter().map(|t| (&t.kind, t.text.as_str())).collect();
        assert_eq!(
            texts,
            vec![
                (&TokenKind::Keyword, "wait"),
                (&TokenKind::Identifier, "elapsed"),
                (&TokenKind::Operator, "("),
                (&TokenKind::PhysicalLiteral, "60s"),
                (&TokenKind::Operator, ")"),
                (&TokenKind::Newline, ""),
                (&TokenKind::Eof, ""),
            ]
        );
        assert_eq!(tokens[3].unit.as_deref(), Some("s"));
        assert_eq!(tokens[3].number_text(), "60");
    }

    #[test]
    fn wait_line_with_newline() {
        let tokens = tokenize("wait elapsed(60s)\n", "t.osc").unwrap();
        assert_eq!(
            kinds(&tokens),
            vec![
                TokenKind::Keyword,
                TokenKind::Identifier,
                TokenKind::Operator,
                TokenKind::PhysicalLiteral,
                TokenKind::Operator,
                TokenKind::Newline,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn indent_dedent_balanced_and_concat_roundtrip() {
        let src = "scenario s:\n    do serial:\n        emit end\n\n# done\n";
        let tokens = tokenize(src, "t.osc").unwrap();
        let indents = tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Indent)
            .count();
        let dedents = tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Dedent)
            .count();
        assert_eq!(indents, dedents);
        let rebuilt: String = tokens
            .iter()
            .map(|t| format!("{}{}", t.leading, t.text))
            .collect();
        assert_eq!(rebuilt, src);
    }

    #[test]
    fn newlines_inside_brackets_do_not_break_lines() {
        let src = "spawn(\n    pose: 1.0m,\n    model: 'box')\n";
        let tokens = tokenize(src, "t.osc").unwrap();
        assert_eq!(
            tokens
                .iter()
                .filter(|t| t.kind == TokenKind::Newline)
                .count(),
            1
        );
        assert!(!tokens.iter().any(|t| t.kind == TokenKind::Indent));
    }

    #[test]
    fn tabs_rejected() {
        let err = tokenize("scenario s:\n\temit end\n", "t.osc").unwrap_err();
        assert!(err[0].message.contains("tab"));
        assert!(err[0].message.contains("indent"));
    }

    #[test]
    fn inconsistent_dedent_reported() {
        let src = "scenario s:\n        emit a\n    emit b\n";
        let err = tokenize(src, "t.osc").unwrap_err();
        assert!(err.iter().any(|e| e.message.contains("inconsistent dedent")));
    }

    #[test]
    fn unterminated_string_reported_with_location() {
        let err = tokenize("emit 'oops\n", "t.osc").unwrap_err();
        assert_eq!(err[0].span.line, 1);
        assert_eq!(err[0].span.column, 6);
        assert!(err[0].message.contains("unterminated"));
    }

    #[test]
    fn multiple_errors_collected() {
        let err = tokenize("emit $\nemit %\n", "t.osc").unwrap_err();
        assert_eq!(err.len(), 2);
    }

    #[test]
    fn negative_physical_literal() {
        let tokens = tokenize("x: -3.0m\n", "t.osc").unwrap();
        let lit = tokens
            .iter()
            .find(|t| t.kind == TokenKind::PhysicalLiteral)
            .unwrap();
        assert_eq!(lit.text, "-3.0m");
        assert_eq!(lit.number_text(), "-3.0");
    }

    #[test]
    fn percent_unit_lexes_as_one_token() {
        let tokens = tokenize("keep(it.p == 10percent)\n", "t.osc").unwrap();
        let lit = tokens
            .iter()
            .find(|t| t.kind == TokenKind::PhysicalLiteral)
            .unwrap();
        assert_eq!(lit.unit.as_deref(), Some("percent"));
    }
}
