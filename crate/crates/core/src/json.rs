//! Order-preserving JSON model with a comment-tolerant reader and a strict,
//! deterministic writer.
//!
//! The reader accepts standard JSON plus `//` and `/* */` comments and
//! trailing commas in arrays and objects. Comments are dropped. The writer
//! always emits strict JSON in insertion order.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::ordmap::OrderedMap;

pub type JsonObject = OrderedMap<String, JsonDoc>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at line {line}, column {col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A JSON number kept as its source lexeme so re-serialization is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonNumber(String);

impl JsonNumber {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<i64> for JsonNumber {
    fn from(n: i64) -> Self {
        JsonNumber(n.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JsonDoc {
    Null,
    Bool(bool),
    Number(JsonNumber),
    String(String),
    Array(Vec<JsonDoc>),
    Object(JsonObject),
}

impl JsonDoc {
    pub fn object<K: Into<String>>(entries: impl IntoIterator<Item = (K, JsonDoc)>) -> JsonDoc {
        JsonDoc::Object(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn string_array<S: AsRef<str>>(items: impl IntoIterator<Item = S>) -> JsonDoc {
        JsonDoc::Array(items.into_iter().map(|s| JsonDoc::from(s.as_ref())).collect())
    }

    pub fn as_object(&self) -> Option<&JsonObject> {
        match self {
            JsonDoc::Object(o) => Some(o),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&Vec<JsonDoc>> {
        match self {
            JsonDoc::Array(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            JsonDoc::String(s) => Some(s),
            _ => None,
        }
    }

    /// Object member lookup; `None` for non-objects.
    pub fn get(&self, key: &str) -> Option<&JsonDoc> {
        self.as_object().and_then(|o| o.get(key))
    }

    /// Pretty-prints with `indent` spaces per level, LF line endings and a
    /// trailing newline.
    pub fn to_pretty(&self, indent: usize) -> String {
        let mut out = String::new();
        write_value(&mut out, self, indent, 0);
        out.push('\n');
        out
    }

    /// Single-line strict JSON.
    pub fn to_compact(&self) -> String {
        let mut out = String::new();
        write_compact(&mut out, self);
        out
    }
}

impl From<&str> for JsonDoc {
    fn from(s: &str) -> Self {
        JsonDoc::String(s.to_string())
    }
}

impl From<String> for JsonDoc {
    fn from(s: String) -> Self {
        JsonDoc::String(s)
    }
}

impl From<bool> for JsonDoc {
    fn from(b: bool) -> Self {
        JsonDoc::Bool(b)
    }
}

impl From<i64> for JsonDoc {
    fn from(n: i64) -> Self {
        JsonDoc::Number(n.into())
    }
}

impl From<Vec<JsonDoc>> for JsonDoc {
    fn from(v: Vec<JsonDoc>) -> Self {
        JsonDoc::Array(v)
    }
}

impl<T: Into<JsonDoc>> From<Option<T>> for JsonDoc {
    fn from(v: Option<T>) -> Self {
        v.map_or(JsonDoc::Null, Into::into)
    }
}

fn write_indent(out: &mut String, indent: usize, level: usize) {
    for _ in 0..indent * level {
        out.push(' ');
    }
}

fn write_value(out: &mut String, v: &JsonDoc, indent: usize, level: usize) {
    match v {
        JsonDoc::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                write_indent(out, indent, level + 1);
                write_value(out, item, indent, level + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            write_indent(out, indent, level);
            out.push(']');
        }
        JsonDoc::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                write_indent(out, indent, level + 1);
                write_string(out, k);
                out.push_str(": ");
                write_value(out, item, indent, level + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            write_indent(out, indent, level);
            out.push('}');
        }
        scalar => write_compact(out, scalar),
    }
}

fn write_compact(out: &mut String, v: &JsonDoc) {
    match v {
        JsonDoc::Null => out.push_str("null"),
        JsonDoc::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        JsonDoc::Number(n) => out.push_str(&n.0),
        JsonDoc::String(s) => write_string(out, s),
        JsonDoc::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_compact(out, item);
            }
            out.push(']');
        }
        JsonDoc::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_string(out, k);
                out.push(':');
                write_compact(out, item);
            }
            out.push('}');
        }
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{08}' => out.push_str("\\b"),
            '\u{0c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Parses JSON with comments and trailing commas.
pub fn parse_jsonc(text: &str) -> Result<JsonDoc, SyntaxError> {
    let mut p = Parser {
        src: text.as_bytes(),
        text,
        pos: 0,
    };
    if text.starts_with('\u{feff}') {
        p.pos = 3;
    }
    p.skip_trivia()?;
    let value = p.value(0)?;
    p.skip_trivia()?;
    if p.pos < p.src.len() {
        return Err(p.error("trailing content after document"));
    }
    Ok(value)
}

/// `true` when `text` holds nothing but whitespace and comments.
pub fn is_blank_jsonc(text: &str) -> bool {
    let mut p = Parser {
        src: text.as_bytes(),
        text,
        pos: 0,
    };
    if text.starts_with('\u{feff}') {
        p.pos = 3;
    }
    p.skip_trivia().is_ok() && p.pos == p.src.len()
}

const MAX_DEPTH: usize = 512;

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> SyntaxError {
        let consumed = &self.text[..self.pos.min(self.text.len())];
        let line = consumed.matches('\n').count() + 1;
        let line_start = consumed.rfind('\n').map_or(0, |i| i + 1);
        let col = consumed[line_start..].chars().count() + 1;
        SyntaxError {
            line,
            col,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) -> Result<(), SyntaxError> {
        loop {
            match self.peek() {
                Some(b' ' | b'\t' | b'\n' | b'\r') => self.pos += 1,
                Some(b'/') => match self.src.get(self.pos + 1) {
                    Some(b'/') => {
                        while let Some(b) = self.peek() {
                            if b == b'\n' {
                                break;
                            }
                            self.pos += 1;
                        }
                    }
                    Some(b'*') => {
                        let start = self.pos;
                        self.pos += 2;
                        loop {
                            match self.peek() {
                                None => {
                                    self.pos = start;
                                    return Err(self.error("unterminated block comment"));
                                }
                                Some(b'*') if self.src.get(self.pos + 1) == Some(&b'/') => {
                                    self.pos += 2;
                                    break;
                                }
                                Some(_) => self.pos += 1,
                            }
                        }
                    }
                    _ => return Err(self.error("unexpected `/`")),
                },
                _ => return Ok(()),
            }
        }
    }

    fn expect(&mut self, b: u8, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn value(&mut self, depth: usize) -> Result<JsonDoc, SyntaxError> {
        if depth > MAX_DEPTH {
            return Err(self.error("nesting too deep"));
        }
        match self.peek() {
            Some(b'{') => self.object(depth),
            Some(b'[') => self.array(depth),
            Some(b'"') => Ok(JsonDoc::String(self.string()?)),
            Some(b't') => self.keyword("true", JsonDoc::Bool(true)),
            Some(b'f') => self.keyword("false", JsonDoc::Bool(false)),
            Some(b'n') => self.keyword("null", JsonDoc::Null),
            Some(b'-' | b'0'..=b'9') => self.number(),
            Some(b'\'') => Err(self.error("single-quoted strings are not allowed")),
            Some(_) => Err(self.error("expected a value")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn keyword(&mut self, word: &str, v: JsonDoc) -> Result<JsonDoc, SyntaxError> {
        if self.src[self.pos..].starts_with(word.as_bytes()) {
            self.pos += word.len();
            Ok(v)
        } else {
            Err(self.error("invalid literal"))
        }
    }

    fn object(&mut self, depth: usize) -> Result<JsonDoc, SyntaxError> {
        self.pos += 1;
        let mut map = JsonObject::new();
        self.skip_trivia()?;
        if self.peek() == Some(b'}') {
            self.pos += 1;
            return Ok(JsonDoc::Object(map));
        }
        loop {
            if self.peek() != Some(b'"') {
                return Err(self.error("expected a string key"));
            }
            let key = self.string()?;
            self.skip_trivia()?;
            self.expect(b':', "expected `:` after key")?;
            self.skip_trivia()?;
            let v = self.value(depth + 1)?;
            map.insert(key, v);
            self.skip_trivia()?;
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    self.skip_trivia()?;
                    if self.peek() == Some(b'}') {
                        self.pos += 1;
                        return Ok(JsonDoc::Object(map));
                    }
                }
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(JsonDoc::Object(map));
                }
                _ => return Err(self.error("expected `,` or `}`")),
            }
        }
    }

    fn array(&mut self, depth: usize) -> Result<JsonDoc, SyntaxError> {
        self.pos += 1;
        let mut items = Vec::new();
        self.skip_trivia()?;
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(JsonDoc::Array(items));
        }
        loop {
            items.push(self.value(depth + 1)?);
            self.skip_trivia()?;
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    self.skip_trivia()?;
                    if self.peek() == Some(b']') {
                        self.pos += 1;
                        return Ok(JsonDoc::Array(items));
                    }
                }
                Some(b']') => {
                    self.pos += 1;
                    return Ok(JsonDoc::Array(items));
                }
                _ => return Err(self.error("expected `,` or `]`")),
            }
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<JsonDoc, SyntaxError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        match self.peek() {
            Some(b'0') => self.pos += 1,
            Some(b'1'..=b'9') => {
                self.digits();
            }
            _ => return Err(self.error("invalid number")),
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            if self.digits() == 0 {
                return Err(self.error("expected digits after `.`"));
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(self.error("expected exponent digits"));
            }
        }
        Ok(JsonDoc::Number(JsonNumber(self.text[start..self.pos].to_string())))
    }

    fn hex4(&mut self) -> Result<u32, SyntaxError> {
        let Some(chunk) = self.src.get(self.pos..self.pos + 4) else {
            return Err(self.error("truncated \\u escape"));
        };
        let mut v = 0u32;
        for &b in chunk {
            let d = (b as char).to_digit(16).ok_or_else(|| self.error("invalid \\u escape"))?;
            v = v * 16 + d;
        }
        self.pos += 4;
        Ok(v)
    }

    fn string(&mut self) -> Result<String, SyntaxError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            let run_start = self.pos;
            while let Some(b) = self.peek() {
                if b == b'"' || b == b'\\' || b < 0x20 {
                    break;
                }
                self.pos += 1;
            }
            out.push_str(&self.text[run_start..self.pos]);
            match self.peek() {
                None => return Err(self.error("unterminated string")),
                Some(b'"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let esc = self.peek().ok_or_else(|| self.error("unterminated string"))?;
                    self.pos += 1;
                    match esc {
                        b'"' => out.push('"'),
                        b'\\' => out.push('\\'),
                        b'/' => out.push('/'),
                        b'b' => out.push('\u{08}'),
                        b'f' => out.push('\u{0c}'),
                        b'n' => out.push('\n'),
                        b'r' => out.push('\r'),
                        b't' => out.push('\t'),
                        b'u' => {
                            let hi = self.hex4()?;
                            let cp = if (0xD800..0xDC00).contains(&hi) {
                                if !self.src[self.pos..].starts_with(b"\\u") {
                                    return Err(self.error("unpaired surrogate"));
                                }
                                self.pos += 2;
                                let lo = self.hex4()?;
                                if !(0xDC00..0xE000).contains(&lo) {
                                    return Err(self.error("unpaired surrogate"));
                                }
                                0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                            } else if (0xDC00..0xE000).contains(&hi) {
                                return Err(self.error("unpaired surrogate"));
                            } else {
                                hi
                            };
                            out.push(char::from_u32(cp).ok_or_else(|| self.error("invalid code point"))?);
                        }
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("invalid escape"));
                        }
                    }
                }
                Some(_) => return Err(self.error("control character in string")),
            }
        }
    }
}
