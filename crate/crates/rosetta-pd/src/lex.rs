//! Whitespace tokenizer shared by the LEF and DEF readers.

use rosetta_pd_core::num::Decimal;
use rosetta_pd_core::Dbu;

use crate::error::FormatError;

#[derive(Clone, Copy, Debug)]
pub struct Token<'a> {
    pub text: &'a str,
    pub line: usize,
    pub col: usize,
    /// Came from a double-quoted string; `text` excludes the quotes.
    pub quoted: bool,
}

/// Splits on whitespace, drops `#` comments, keeps quoted strings whole and
/// peels a trailing `;` off a word.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c == b'#' {
                break;
            }
            if c == b'"' {
                let end = line[i + 1..].find('"').map_or(bytes.len(), |k| i + 1 + k);
                out.push(Token { text: &line[i + 1..end], line: ln + 1, col: i + 1, quoted: true });
                i = end + 1;
                continue;
            }
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            let word = &line[start..i];
            if word.len() > 1 && word.ends_with(';') {
                out.push(Token { text: &word[..word.len() - 1], line: ln + 1, col: start + 1, quoted: false });
                out.push(Token { text: ";", line: ln + 1, col: i, quoted: false });
            } else {
                out.push(Token { text: word, line: ln + 1, col: start + 1, quoted: false });
            }
        }
    }
    out
}

pub struct Cursor<'a> {
    pub file: String,
    toks: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(file: &str, text: &'a str) -> Self {
        Cursor { file: file.into(), toks: tokenize(text), pos: 0 }
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).map(|t| t.text)
    }

    pub fn peek_is(&self, kw: &str) -> bool {
        self.toks.get(self.pos).is_some_and(|t| !t.quoted && t.text == kw)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn error(&self, msg: impl Into<String>) -> FormatError {
        let (line, col) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        };
        FormatError::syntax(&self.file, line, col, msg)
    }

    pub fn next(&mut self, what: &str) -> Result<&'a str, FormatError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.text)
            }
            None => Err(self.error(format!("unexpected end of file, expected {what}"))),
        }
    }

    pub fn expect(&mut self, kw: &str) -> Result<(), FormatError> {
        if self.peek_is(kw) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.peek().unwrap_or("end of file");
            Err(self.error(format!("expected `{kw}`, found `{found}`")))
        }
    }

    pub fn eat(&mut self, kw: &str) -> bool {
        if self.peek_is(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Consumes through the next `;`.
    pub fn skip_statement(&mut self) -> Result<(), FormatError> {
        loop {
            if self.next("`;`")? == ";" {
                return Ok(());
            }
        }
    }

    /// Consumes through `END <name>`.
    pub fn skip_block(&mut self, name: &str) -> Result<(), FormatError> {
        loop {
            let t = self.next(&format!("END {name}"))?;
            if t == "END" && self.peek() == Some(name) {
                self.pos += 1;
                return Ok(());
            }
        }
    }

    pub fn decimal(&mut self, what: &str) -> Result<Decimal, FormatError> {
        let t = self.next(what)?;
        t.parse().map_err(|_| {
            self.pos -= 1;
            self.error(format!("bad number `{t}` for {what}"))
        })
    }

    /// A micron value converted to DBU at `units` per micron.
    pub fn microns(&mut self, units: u32, what: &str) -> Result<Dbu, FormatError> {
        Ok(self.decimal(what)?.scaled(units as i64).0)
    }

    /// A plain DBU value; fractional values are rounded.
    pub fn dbu(&mut self, what: &str) -> Result<Dbu, FormatError> {
        Ok(self.decimal(what)?.scaled(1).0)
    }

    pub fn uint(&mut self, what: &str) -> Result<u64, FormatError> {
        let t = self.next(what)?;
        t.parse().map_err(|_| {
            self.pos -= 1;
            self.error(format!("bad integer `{t}` for {what}"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotes_comments_and_semicolons() {
        let t = tokenize("BUSBITCHARS \"[]\" ; # x\n  SIZE 1 BY 2;\n");
        let texts: Vec<&str> = t.iter().map(|t| t.text).collect();
        assert_eq!(texts, ["BUSBITCHARS", "[]", ";", "SIZE", "1", "BY", "2", ";"]);
        assert!(t[1].quoted);
        assert_eq!((t[3].line, t[3].col), (2, 3));
    }
}
