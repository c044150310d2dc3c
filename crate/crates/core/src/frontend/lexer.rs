use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{FrontendError, Pos};

const MAX_INCLUDE_DEPTH: usize = 16;

/// Headers whose contents are provided natively (the standard kernel library).
const BUILTIN_HEADERS: &[&str] = &["qft.hpp", "qcor_hybrid.hpp", "qcor.hpp"];

const SYMBOLS: &[&str] = &[
    "::", "->", "<=", ">=", "==", "!=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "<<", ">>", "{", "}", "(",
    ")", "[", "]", ";", ",", ".", ":", "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "?", "~",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

impl Token {
    pub fn is_sym(&self, s: &str) -> bool {
        matches!(&self.tok, Tok::Sym(t) if *t == s)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_ident(&self, s: &str) -> bool {
        self.ident() == Some(s)
    }

    pub fn describe(&self) -> String {
        match &self.tok {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(i) => format!("'{i}'"),
            Tok::Real(r) => format!("'{r}'"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Sym(s) => format!("'{s}'"),
        }
    }
}

/// Tokenizes `source`, splicing `#include "file"` directives relative to `base_dir`.
pub fn tokenize(source: &str, file: &str, base_dir: Option<&Path>) -> Result<Vec<Token>, FrontendError> {
    let mut out = Vec::new();
    Lexer::new(source, file, base_dir.map(Path::to_path_buf), 0).run(&mut out)?;
    Ok(out)
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
    file: Arc<str>,
    base_dir: Option<PathBuf>,
    depth: usize,
}

impl Lexer {
    fn new(source: &str, file: &str, base_dir: Option<PathBuf>, depth: usize) -> Self {
        Self { chars: source.chars().collect(), i: 0, line: 1, col: 1, file: file.into(), base_dir, depth }
    }

    fn pos(&self) -> Pos {
        Pos { file: self.file.clone(), line: self.line, col: self.col }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.i + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> FrontendError {
        FrontendError::Syntax { pos, message: message.into() }
    }

    fn run(&mut self, out: &mut Vec<Token>) -> Result<(), FrontendError> {
        while let Some(c) = self.peek(0) {
            let pos = self.pos();
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '/' if self.peek(1) == Some('/') => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '/' if self.peek(1) == Some('*') => {
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => return Err(self.error(pos, "unterminated block comment")),
                            Some('*') if self.peek(0) == Some('/') => {
                                self.bump();
                                break;
                            }
                            _ => {}
                        }
                    }
                }
                '#' => self.directive(out)?,
                '"' => {
                    let s = self.string(pos.clone())?;
                    out.push(Token { tok: Tok::Str(s), pos });
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                    let tok = self.number(pos.clone())?;
                    out.push(Token { tok, pos });
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut s = String::new();
                    while let Some(c) = self.peek(0).filter(|c| c.is_alphanumeric() || *c == '_') {
                        s.push(c);
                        self.bump();
                    }
                    out.push(Token { tok: Tok::Ident(s), pos });
                }
                _ => {
                    let sym = SYMBOLS
                        .iter()
                        .find(|s| s.chars().enumerate().all(|(k, ch)| self.peek(k) == Some(ch)))
                        .ok_or_else(|| self.error(pos.clone(), format!("unexpected character '{c}'")))?;
                    for _ in 0..sym.chars().count() {
                        self.bump();
                    }
                    out.push(Token { tok: Tok::Sym(sym), pos });
                }
            }
        }
        Ok(())
    }

    fn string(&mut self, pos: Pos) -> Result<String, FrontendError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error(pos, "unterminated string literal")),
                Some('"') => return Ok(s),
                Some('\\') => match self.bump() {
                    Some(c) => s.push(c),
                    None => return Err(self.error(pos, "unterminated string literal")),
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self, pos: Pos) -> Result<Tok, FrontendError> {
        let mut s = String::new();
        let mut real = false;
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() {
                s.push(c);
            } else if c == '.' && !real {
                real = true;
                s.push(c);
            } else if (c == 'e' || c == 'E')
                && (self.peek(1).is_some_and(|d| d.is_ascii_digit())
                    || (matches!(self.peek(1), Some('+' | '-')) && self.peek(2).is_some_and(|d| d.is_ascii_digit())))
            {
                real = true;
                s.push(c);
                self.bump();
                s.push(self.peek(0).expect("checked above"));
            } else {
                break;
            }
            self.bump();
        }
        // Swallow C++ literal suffixes.
        while self.peek(0).is_some_and(|c| matches!(c, 'f' | 'F' | 'l' | 'L' | 'u' | 'U')) {
            self.bump();
        }
        if real {
            s.parse().map(Tok::Real).map_err(|_| self.error(pos, format!("invalid number '{s}'")))
        } else {
            s.parse().map(Tok::Int).map_err(|_| self.error(pos, format!("integer '{s}' out of range")))
        }
    }

    /// `#include "file"` splices tokens; any other directive is skipped to end of line.
    fn directive(&mut self, out: &mut Vec<Token>) -> Result<(), FrontendError> {
        let pos = self.pos();
        self.bump();
        while self.peek(0).is_some_and(|c| c == ' ' || c == '\t') {
            self.bump();
        }
        let mut word = String::new();
        while let Some(c) = self.peek(0).filter(|c| c.is_alphabetic()) {
            word.push(c);
            self.bump();
        }
        if word != "include" {
            while self.peek(0).is_some_and(|c| c != '\n') {
                self.bump();
            }
            return Ok(());
        }
        while self.peek(0).is_some_and(|c| c == ' ' || c == '\t') {
            self.bump();
        }
        let target = match self.peek(0) {
            Some('"') => self.string(pos.clone())?,
            Some('<') => {
                self.bump();
                let mut s = String::new();
                while let Some(c) = self.bump() {
                    if c == '>' {
                        break;
                    }
                    if c == '\n' {
                        return Err(self.error(pos, "unterminated include path"));
                    }
                    s.push(c);
                }
                s
            }
            _ => return Err(self.error(pos, "expected include path")),
        };
        if BUILTIN_HEADERS.contains(&target.as_str()) {
            return Ok(());
        }
        if self.depth >= MAX_INCLUDE_DEPTH {
            return Err(FrontendError::Include { pos, path: target, message: "include nesting too deep".into() });
        }
        let path = match &self.base_dir {
            Some(dir) => dir.join(&target),
            None => PathBuf::from(&target),
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| FrontendError::Include { pos: pos.clone(), path: target.clone(), message: e.to_string() })?;
        let base = path.parent().map(Path::to_path_buf);
        Lexer::new(&text, &path.display().to_string(), base, self.depth + 1).run(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s, "t", None).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("H(q[0]); x += .5e1; // c\n a::b"),
            vec![
                Tok::Ident("H".into()),
                Tok::Sym("("),
                Tok::Ident("q".into()),
                Tok::Sym("["),
                Tok::Int(0),
                Tok::Sym("]"),
                Tok::Sym(")"),
                Tok::Sym(";"),
                Tok::Ident("x".into()),
                Tok::Sym("+="),
                Tok::Real(5.0),
                Tok::Sym(";"),
                Tok::Ident("a".into()),
                Tok::Sym("::"),
                Tok::Ident("b".into()),
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let t = tokenize("a\n  b /* x\n y */ c", "f", None).unwrap();
        assert_eq!((t[1].pos.line, t[1].pos.col), (2, 3));
        assert_eq!((t[2].pos.line, t[2].pos.col), (3, 7));
    }

    #[test]
    fn errors_carry_position() {
        match tokenize("a\n @", "f", None) {
            Err(FrontendError::Syntax { pos, .. }) => assert_eq!((pos.line, pos.col), (2, 2)),
            other => panic!("{other:?}"),
        }
        assert!(tokenize("\"open", "f", None).is_err());
        assert!(tokenize("/* open", "f", None).is_err());
        assert!(tokenize("99999999999999999999", "f", None).is_err());
    }

    #[test]
    fn include_splices_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("inc.qasm"), "h q[0];\n").unwrap();
        let t = tokenize("a;\n#include \"inc.qasm\"\nb", "main", Some(dir.path())).unwrap();
        let names: Vec<_> = t.iter().filter_map(|t| t.ident()).collect();
        assert_eq!(names, vec!["a", "h", "q", "b"]);
        assert!(t[2].pos.file.ends_with("inc.qasm"));
        assert!(matches!(tokenize("#include \"missing.qasm\"", "m", Some(dir.path())), Err(FrontendError::Include { .. })));
        assert!(tokenize("#include \"qft.hpp\"\n#pragma once", "m", None).unwrap().is_empty());
    }
}
