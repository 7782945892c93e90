//! The `<action>` grammar agents answer in.
//!
//! Accepted statements inside the last `<action>...</action>` block:
//! `Action: system.op(k=v, ...)`, `Action: finish()` and `Answer: X`.
//! Values are quoted strings, integers, floats, booleans, `None`, and nested
//! `{...}` / `[...]` literals.

use std::fmt::{self, Write as _};

use thiserror::Error;

pub const ACTION_OPEN: &str = "<action>";
pub const ACTION_CLOSE: &str = "</action>";

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
    List(Vec<ArgValue>),
    Map(Vec<(String, ArgValue)>),
}

impl ArgValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            ArgValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn get(&self, key: &str) -> Option<&ArgValue> {
        match self {
            ArgValue::Map(m) => m.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            ArgValue::Str(s) => Value::String(s.clone()),
            ArgValue::Int(i) => Value::from(*i),
            ArgValue::Float(f) => serde_json::Number::from_f64(*f).map_or(Value::Null, Value::Number),
            ArgValue::Bool(b) => Value::Bool(*b),
            ArgValue::Null => Value::Null,
            ArgValue::List(l) => Value::Array(l.iter().map(ArgValue::to_json).collect()),
            ArgValue::Map(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> ArgValue {
        use serde_json::Value;
        match v {
            Value::Null => ArgValue::Null,
            Value::Bool(b) => ArgValue::Bool(*b),
            Value::Number(n) => n.as_i64().map(ArgValue::Int).unwrap_or_else(|| ArgValue::Float(n.as_f64().unwrap_or(0.0))),
            Value::String(s) => ArgValue::Str(s.clone()),
            Value::Array(a) => ArgValue::List(a.iter().map(ArgValue::from_json).collect()),
            Value::Object(o) => ArgValue::Map(o.iter().map(|(k, v)| (k.clone(), ArgValue::from_json(v))).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentAction {
    ToolCall { tool: String, args: Vec<(String, ArgValue)> },
    Answer(char),
    Finish,
}

impl AgentAction {
    pub fn call(tool: &str, args: Vec<(&str, ArgValue)>) -> Self {
        AgentAction::ToolCall {
            tool: tool.to_string(),
            args: args.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// The system prefix of a tool call, e.g. `calendar` for `calendar.add_event`.
    pub fn system(&self) -> Option<&str> {
        match self {
            AgentAction::ToolCall { tool, .. } => Some(tool.split('.').next().unwrap_or(tool)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(
        "Invalid action format. Wrap your action in <action></action> tags, for example \
         <action>Action: tool_name(param1=\"value1\")</action>, <action>Answer: B</action> \
         or <action>Action: finish()</action>."
    )]
    NoActionBlock,
    #[error("Execute only ONE action per response. Found more than one statement inside the <action> block.")]
    MultipleActions,
    #[error("Invalid action format: {0}")]
    Statement(String),
    #[error("Could not parse parameter `{param}`: {reason}")]
    Argument { param: String, reason: String },
}

/// Extracts the content of the last complete `<action>` block.
pub fn last_action_block(text: &str) -> Option<&str> {
    let mut search_end = text.len();
    loop {
        let close = text[..search_end].rfind(ACTION_CLOSE)?;
        if let Some(open) = text[..close].rfind(ACTION_OPEN) {
            return Some(&text[open + ACTION_OPEN.len()..close]);
        }
        search_end = close;
    }
}

pub fn parse_action(text: &str) -> Result<AgentAction, ParseError> {
    let block = last_action_block(text).ok_or(ParseError::NoActionBlock)?.trim();
    let mut p = Cursor::new(block);
    let action = if p.eat_keyword("Answer:") {
        p.skip_ws();
        let bracketed = p.eat('[');
        let letter = p.next().filter(char::is_ascii_alphabetic).ok_or_else(|| {
            ParseError::Statement("`Answer:` must be followed by a single letter".into())
        })?;
        if bracketed && !p.eat(']') {
            return Err(ParseError::Statement("unclosed `[` after `Answer:`".into()));
        }
        if p.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            return Err(ParseError::Statement("`Answer:` must be followed by a single letter".into()));
        }
        AgentAction::Answer(letter.to_ascii_uppercase())
    } else if p.eat_keyword("Action:") {
        p.skip_ws();
        let tool = p.dotted_name().ok_or_else(|| ParseError::Statement("expected a tool name after `Action:`".into()))?;
        p.skip_ws();
        if !p.eat('(') {
            return Err(ParseError::Statement(format!("expected `(` after `{tool}`")));
        }
        let args = p.arguments()?;
        if tool == "finish" {
            if !args.is_empty() {
                return Err(ParseError::Statement("finish() takes no arguments".into()));
            }
            AgentAction::Finish
        } else {
            AgentAction::ToolCall { tool, args }
        }
    } else {
        return Err(ParseError::Statement(
            "the action must start with `Action:` or `Answer:`".into(),
        ));
    };
    p.skip_ws();
    let rest = p.rest();
    if rest.is_empty() {
        Ok(action)
    } else if rest.starts_with("Action:") || rest.starts_with("Answer:") {
        Err(ParseError::MultipleActions)
    } else {
        Err(ParseError::Statement(format!("unexpected trailing text `{}`", rest.chars().take(40).collect::<String>())))
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.rest().starts_with(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.next();
        }
    }

    fn ident(&mut self) -> Option<String> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.next();
        }
        Some(self.src[start..self.pos].to_string())
    }

    fn dotted_name(&mut self) -> Option<String> {
        let mut name = self.ident()?;
        while self.peek() == Some('.') {
            let save = self.pos;
            self.next();
            match self.ident() {
                Some(part) => {
                    name.push('.');
                    name.push_str(&part);
                }
                None => {
                    self.pos = save;
                    break;
                }
            }
        }
        Some(name)
    }

    /// Parses `k=v, ...)` after the opening parenthesis.
    fn arguments(&mut self) -> Result<Vec<(String, ArgValue)>, ParseError> {
        let mut args: Vec<(String, ArgValue)> = Vec::new();
        loop {
            self.skip_ws();
            if self.eat(')') {
                return Ok(args);
            }
            let key = self
                .ident()
                .ok_or_else(|| ParseError::Statement(format!("expected a parameter name at `{}`", snippet(self.rest()))))?;
            self.skip_ws();
            if !self.eat('=') {
                return Err(ParseError::Argument {
                    param: key,
                    reason: "expected `=` after the parameter name".into(),
                });
            }
            self.skip_ws();
            let value = self.value().map_err(|reason| ParseError::Argument {
                param: key.clone(),
                reason,
            })?;
            if args.iter().any(|(k, _)| *k == key) {
                return Err(ParseError::Argument {
                    param: key,
                    reason: "given more than once".into(),
                });
            }
            args.push((key, value));
            self.skip_ws();
            if self.eat(',') {
                continue;
            }
            if self.eat(')') {
                return Ok(args);
            }
            return Err(ParseError::Statement(format!("expected `,` or `)` at `{}`", snippet(self.rest()))));
        }
    }

    fn value(&mut self) -> Result<ArgValue, String> {
        match self.peek() {
            Some(q @ ('"' | '\'')) => {
                self.next();
                self.string_body(q).map(ArgValue::Str)
            }
            Some('{') => {
                self.next();
                let mut entries: Vec<(String, ArgValue)> = Vec::new();
                loop {
                    self.skip_ws();
                    if self.eat('}') {
                        return Ok(ArgValue::Map(entries));
                    }
                    let key = match self.peek() {
                        Some(q @ ('"' | '\'')) => {
                            self.next();
                            self.string_body(q)?
                        }
                        _ => self.ident().ok_or_else(|| format!("expected a mapping key at `{}`", snippet(self.rest())))?,
                    };
                    self.skip_ws();
                    if !self.eat(':') {
                        return Err(format!("expected `:` after mapping key `{key}`"));
                    }
                    self.skip_ws();
                    let v = self.value()?;
                    if entries.iter().any(|(k, _)| *k == key) {
                        return Err(format!("duplicate mapping key `{key}`"));
                    }
                    entries.push((key, v));
                    self.skip_ws();
                    if !self.eat(',') {
                        self.skip_ws();
                        if self.eat('}') {
                            return Ok(ArgValue::Map(entries));
                        }
                        return Err(format!("expected `,` or `}}` at `{}`", snippet(self.rest())));
                    }
                }
            }
            Some('[') => {
                self.next();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.eat(']') {
                        return Ok(ArgValue::List(items));
                    }
                    items.push(self.value()?);
                    self.skip_ws();
                    if !self.eat(',') {
                        self.skip_ws();
                        if self.eat(']') {
                            return Ok(ArgValue::List(items));
                        }
                        return Err(format!("expected `,` or `]` at `{}`", snippet(self.rest())));
                    }
                }
            }
            Some(c) if c == '-' || c == '+' || c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let word = self.ident().unwrap_or_default();
                match word.as_str() {
                    "True" | "true" => Ok(ArgValue::Bool(true)),
                    "False" | "false" => Ok(ArgValue::Bool(false)),
                    "None" | "null" => Ok(ArgValue::Null),
                    _ => Err(format!("unquoted value `{word}`; strings must be quoted")),
                }
            }
            Some(c) => Err(format!("unexpected `{c}`")),
            None => Err("missing value".into()),
        }
    }

    fn string_body(&mut self, quote: char) -> Result<String, String> {
        let mut out = String::new();
        loop {
            match self.next() {
                None => return Err("unterminated string".into()),
                Some(c) if c == quote => return Ok(out),
                Some('\\') => match self.next() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some('0') => out.push('\0'),
                    Some('\\') => out.push('\\'),
                    Some('"') => out.push('"'),
                    Some('\'') => out.push('\''),
                    Some('u') => {
                        let hex: String = (0..4).filter_map(|_| self.next()).collect();
                        let ch = u32::from_str_radix(&hex, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| format!("invalid escape `\\u{hex}`"))?;
                        out.push(ch);
                    }
                    Some(other) => {
                        out.push('\\');
                        out.push(other);
                    }
                    None => return Err("unterminated string".into()),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn number(&mut self) -> Result<ArgValue, String> {
        let start = self.pos;
        if self.peek() == Some('-') || self.peek() == Some('+') {
            self.next();
        }
        let mut is_float = false;
        while let Some(c) = self.peek() {
            match c {
                '0'..='9' => {}
                '.' | 'e' | 'E' => is_float = true,
                '+' | '-' if matches!(self.src[..self.pos].chars().last(), Some('e' | 'E')) => {}
                _ => break,
            }
            self.next();
        }
        let text = &self.src[start..self.pos];
        if is_float {
            text.parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .map(ArgValue::Float)
                .ok_or_else(|| format!("invalid number `{text}`"))
        } else {
            text.parse::<i64>().map(ArgValue::Int).map_err(|_| format!("invalid number `{text}`"))
        }
    }
}

fn snippet(s: &str) -> String {
    s.chars().take(24).collect()
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_value(out: &mut String, v: &ArgValue) {
    match v {
        ArgValue::Str(s) => write_string(out, s),
        ArgValue::Int(i) => {
            let _ = write!(out, "{i}");
        }
        ArgValue::Float(f) => {
            let _ = write!(out, "{f:?}");
        }
        ArgValue::Bool(b) => out.push_str(if *b { "True" } else { "False" }),
        ArgValue::Null => out.push_str("None"),
        ArgValue::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, item);
            }
            out.push(']');
        }
        ArgValue::Map(entries) => {
            out.push('{');
            for (i, (k, item)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_string(out, k);
                out.push_str(": ");
                write_value(out, item);
            }
            out.push('}');
        }
    }
}

impl fmt::Display for ArgValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_value(&mut s, self);
        f.write_str(&s)
    }
}

/// The statement without the surrounding tags.
pub fn render_statement(action: &AgentAction) -> String {
    match action {
        AgentAction::Finish => "Action: finish()".to_string(),
        AgentAction::Answer(c) => format!("Answer: {c}"),
        AgentAction::ToolCall { tool, args } => {
            let mut out = format!("Action: {tool}(");
            for (i, (k, v)) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(k);
                out.push('=');
                write_value(&mut out, v);
            }
            out.push(')');
            out
        }
    }
}

pub fn render_action(action: &AgentAction) -> String {
    format!("{ACTION_OPEN}{}{ACTION_CLOSE}", render_statement(action))
}
