//! Lexical scanner for Java-like source.
//!
//! The scanner understands string, char and text-block literals and both
//! comment styles, so braces inside them never disturb brace balancing.
//! Comments are dropped; every other token keeps its line and column.

use std::collections::HashSet;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum TokenKind {
    Ident,
    Keyword,
    Literal,
    Annotation,
    Operator,
    Separator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Zero-based line of the first character.
    pub line: usize,
    /// Byte offset of the token within its line.
    pub col: usize,
    /// Byte offset of the token within the whole input.
    pub offset: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text && matches!(self.kind, TokenKind::Separator | TokenKind::Operator)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == text
    }

    /// Tokens that survive into comparison sequences: identifiers,
    /// keywords, literals and the statement terminator. Operators and all
    /// other punctuation are ignored when code is compared.
    pub fn is_comparable(&self) -> bool {
        match self.kind {
            TokenKind::Ident | TokenKind::Keyword | TokenKind::Literal => true,
            TokenKind::Separator => self.text == ";",
            TokenKind::Annotation | TokenKind::Operator => false,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while", "true", "false", "null",
];

pub const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double",
];

pub fn is_keyword(word: &str) -> bool {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| KEYWORDS.iter().copied().collect())
        .contains(word)
}

pub fn is_primitive(word: &str) -> bool {
    PRIMITIVES.contains(&word)
}

// Longest first so that greedy matching picks `>>>=` over `>`.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", "=", ">", "<", "!", "~", "?",
    ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

const SEPARATORS: &[u8] = b"(){}[];,.@";

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Scan `src` into tokens. Unterminated literals and comments run to the
/// end of input rather than failing; brace balancing is checked later.
pub fn tokenize(src: &str) -> Vec<Token> {
    Lexer::new(src).run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 0, line_start: 0, out: Vec::new() }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: usize, line_start: usize) {
        self.out.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            line,
            col: start - line_start,
            offset: start,
        });
    }

    fn run(mut self) -> Vec<Token> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            let line = self.line;
            let line_start = self.line_start;
            if c.is_whitespace() {
                self.bump();
            } else if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c == '/' && self.peek_at(1) == Some('*') {
                self.bump();
                self.bump();
                while let Some(c) = self.bump() {
                    if c == '*' && self.peek() == Some('/') {
                        self.bump();
                        break;
                    }
                }
            } else if c == '"' {
                if self.src[self.pos..].starts_with("\"\"\"") {
                    self.text_block();
                } else {
                    self.quoted('"');
                }
                self.push(TokenKind::Literal, start, line, line_start);
            } else if c == '\'' {
                self.quoted('\'');
                self.push(TokenKind::Literal, start, line, line_start);
            } else if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
                self.number(start);
                self.push(TokenKind::Literal, start, line, line_start);
            } else if is_ident_start(c) {
                while self.peek().is_some_and(is_ident_part) {
                    self.bump();
                }
                let kind = if is_keyword(&self.src[start..self.pos]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Ident
                };
                self.push(kind, start, line, line_start);
            } else if c == '@' && self.peek_at(1).is_some_and(is_ident_start) && !self.src[self.pos + 1..].starts_with("interface") {
                self.bump();
                // Qualified annotation names: @java.lang.Override
                loop {
                    while self.peek().is_some_and(is_ident_part) {
                        self.bump();
                    }
                    if self.peek() == Some('.') && self.peek_at(1).is_some_and(is_ident_start) {
                        self.bump();
                        continue;
                    }
                    break;
                }
                self.push(TokenKind::Annotation, start, line, line_start);
            } else if let Some(op) = OPERATORS.iter().find(|op| self.src[self.pos..].starts_with(**op)) {
                for _ in 0..op.len() {
                    self.bump();
                }
                self.push(TokenKind::Operator, start, line, line_start);
            } else if c.is_ascii() && SEPARATORS.contains(&(c as u8)) {
                self.bump();
                self.push(TokenKind::Separator, start, line, line_start);
            } else {
                // Stray character (e.g. `#` or a non-ASCII symbol); keep it visible.
                self.bump();
                self.push(TokenKind::Operator, start, line, line_start);
            }
        }
        self.out
    }

    fn quoted(&mut self, quote: char) {
        self.bump();
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
            if c == '\\' {
                self.bump();
            } else if c == quote {
                break;
            }
        }
    }

    fn text_block(&mut self) {
        for _ in 0..3 {
            self.bump();
        }
        while self.peek().is_some() {
            if self.src[self.pos..].starts_with("\"\"\"") {
                for _ in 0..3 {
                    self.bump();
                }
                return;
            }
            if self.bump() == Some('\\') {
                self.bump();
            }
        }
    }

    fn number(&mut self, start: usize) {
        let hex = self.src[start..].starts_with("0x") || self.src[start..].starts_with("0X");
        while let Some(c) = self.peek() {
            let exponent_sign = (c == '+' || c == '-')
                && matches!(self.src[..self.pos].chars().last(), Some('e' | 'E' | 'p' | 'P'))
                && (!hex || matches!(self.src[..self.pos].chars().last(), Some('p' | 'P')));
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' || exponent_sign {
                if c == '.' && !self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                    // `1.` followed by a method call or field is not part of the number.
                    if self.peek_at(1).is_some_and(is_ident_start) {
                        break;
                    }
                }
                self.bump();
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn drops_both_comment_styles() {
        let toks = texts("a /* { */ b // }\n/** doc { */ c");
        assert_eq!(toks, ["a", "b", "c"]);
    }

    #[test]
    fn braces_inside_literals_are_not_separators() {
        let toks = tokenize(r#"x = "{ \" }" + '{' + '\''; }"#);
        let braces: Vec<_> = toks.iter().filter(|t| t.is("}") || t.is("{")).collect();
        assert_eq!(braces.len(), 1);
        assert_eq!(toks[2].kind, TokenKind::Literal);
        assert_eq!(toks[2].text, r#""{ \" }""#);
    }

    #[test]
    fn operators_are_greedy() {
        assert_eq!(texts("a != b && !c"), ["a", "!=", "b", "&&", "!", "c"]);
        assert_eq!(texts("x >>>= 2"), ["x", ">>>=", "2"]);
    }

    #[test]
    fn keywords_and_annotations() {
        let toks = tokenize("@Override public boolean equals(Object o)");
        assert_eq!(toks[0].kind, TokenKind::Annotation);
        assert_eq!(toks[0].text, "@Override");
        assert!(toks[1].is_keyword("public"));
        assert_eq!(toks[3].kind, TokenKind::Ident);
    }

    #[test]
    fn lines_and_columns() {
        let toks = tokenize("a\n  bb\n\n c");
        let pos: Vec<_> = toks.iter().map(|t| (t.line, t.col)).collect();
        assert_eq!(pos, [(0, 0), (1, 2), (3, 1)]);
    }

    #[test]
    fn numbers_and_member_access() {
        assert_eq!(texts("1.5e-3f + 0x1F"), ["1.5e-3f", "+", "0x1F"]);
        assert_eq!(texts("this.collator"), ["this", ".", "collator"]);
    }

    #[test]
    fn text_block_spans_lines() {
        let toks = tokenize("s = \"\"\"\n  { }\n  \"\"\"; t");
        assert_eq!(toks.len(), 5);
        assert_eq!(toks[4].line, 2);
    }
}
