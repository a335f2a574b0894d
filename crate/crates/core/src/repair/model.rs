//! Model clients: the OpenAI-compatible HTTP client and the offline
//! deterministic mock.
//!
//! The mock answers each query for a marked line with the next candidate
//! from a deterministic stream of single-token edits (operator flips, sign
//! toggles, constant nudges, variable swaps). It doubles as a search-based
//! repair baseline and keeps CI fully offline.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

use crate::lang::lexer::{lex_line, Token, TokenKind};
use crate::lang::{has_marker, Program};

use super::prompt::{strip_marker, Prompt};

/// Environment variables consulted for the API key, in order.
pub const API_KEY_VARS: [&str; 2] = ["VERIPATCH_API_KEY", "OPENAI_API_KEY"];

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("model endpoint unavailable: {0}")]
    Unavailable(String),
    #[error("no API key: set {0} (or {1})")]
    MissingApiKey(&'static str, &'static str),
    #[error("malformed model response: {0}")]
    Protocol(String),
}

pub trait ModelClient: Send + Sync {
    fn complete(&self, prompt: &Prompt) -> Result<String, ModelError>;
    fn name(&self) -> &str;
}

/// Candidate replacement lines for one statement line, in deterministic
/// order: operator-pair flips (`/` yields both `*` and `%`), unary sign
/// toggles (drop an existing minus, then negate each atom), constant
/// adjustments (`c+1`, `c-1`, `-c`), then swaps of two distinct variables.
pub fn line_candidates(text: &str) -> Vec<String> {
    let clean = strip_marker(text);
    let clean = clean.trim();
    let Ok(tokens) = lex_line(clean, 1) else {
        return Vec::new();
    };
    // Only edit to the right of `:=`, `return`, or a guard keyword.
    let region_start = tokens
        .iter()
        .position(|t| {
            matches!(
                t.kind,
                TokenKind::Assign | TokenKind::KwReturn | TokenKind::KwIf | TokenKind::KwWhile
            )
        })
        .map(|i| i + 1)
        .unwrap_or(0);

    let mut candidates: Vec<String> = Vec::new();
    let mut push = |cand: String| {
        let cand = cand.trim().to_string();
        if cand != clean && !candidates.contains(&cand) {
            candidates.push(cand);
        }
    };

    let splice = |col: u32, len: u32, new: &str| -> String {
        let chars: Vec<char> = clean.chars().collect();
        let start = col as usize - 1;
        let end = (start + len as usize).min(chars.len());
        let mut out: String = chars[..start].iter().collect();
        out.push_str(new);
        out.extend(chars[end..].iter());
        out
    };

    let binary_minus = |i: usize, tokens: &[Token]| -> bool {
        i > 0
            && matches!(
                tokens[i - 1].kind,
                TokenKind::Int(_) | TokenKind::Ident(_) | TokenKind::RParen
            )
    };

    // 1. Operator-pair flips.
    for (i, t) in tokens.iter().enumerate().skip(region_start) {
        let flips: &[&str] = match t.kind {
            TokenKind::Plus => &["-"],
            TokenKind::Minus if binary_minus(i, &tokens) => &["+"],
            TokenKind::Star => &["/"],
            TokenKind::Slash => &["*", "%"],
            TokenKind::Percent => &["/"],
            _ => continue,
        };
        for f in flips {
            push(splice(t.span.col, t.span.len, f));
        }
    }
    // 2. Sign toggles: drop a unary minus, then negate each atom.
    for (i, t) in tokens.iter().enumerate().skip(region_start) {
        if t.kind == TokenKind::Minus && !binary_minus(i, &tokens) {
            push(splice(t.span.col, t.span.len, ""));
        }
    }
    for t in tokens.iter().skip(region_start) {
        if matches!(t.kind, TokenKind::Ident(_) | TokenKind::Int(_)) {
            let original: String = clean
                .chars()
                .skip(t.span.col as usize - 1)
                .take(t.span.len as usize)
                .collect();
            push(splice(t.span.col, t.span.len, &format!("-{original}")));
        }
    }
    // 3. Constant adjustments.
    for t in tokens.iter().skip(region_start) {
        if let TokenKind::Int(v) = t.kind {
            for new in [v + 1, v - 1, -v] {
                if new != v {
                    push(splice(t.span.col, t.span.len, &new.to_string()));
                }
            }
        }
    }
    // 4. Two-variable swaps.
    let idents: Vec<&Token> = tokens
        .iter()
        .skip(region_start)
        .filter(|t| matches!(t.kind, TokenKind::Ident(_)))
        .collect();
    for i in 0..idents.len() {
        for j in i + 1..idents.len() {
            let (TokenKind::Ident(a), TokenKind::Ident(b)) = (&idents[i].kind, &idents[j].kind)
            else {
                continue;
            };
            if a == b {
                continue;
            }
            // Right-to-left so the earlier column stays valid.
            let step = splice(idents[j].span.col, idents[j].span.len, a);
            let chars: Vec<char> = step.chars().collect();
            let start = idents[i].span.col as usize - 1;
            let end = start + idents[i].span.len as usize;
            let mut out: String = chars[..start].iter().collect();
            out.push_str(b);
            out.extend(chars[end.min(chars.len())..].iter());
            push(out);
        }
    }
    candidates
}

/// Deterministic candidate stream for a program line (the mock's brain).
pub fn mock_model(p: &Program, line: u32) -> Vec<String> {
    match p.line_text(line) {
        Some(text) => line_candidates(text),
        None => Vec::new(),
    }
}

/// Offline stand-in for a chat model. Each `complete` call for a given
/// marked line yields the next candidate of [`line_candidates`]; an
/// exhausted stream answers with an empty string (which the sanitizer
/// rejects, consuming the attempt).
#[derive(Default)]
pub struct MockModel {
    cursors: Mutex<HashMap<String, usize>>,
}

impl MockModel {
    pub fn new() -> Self {
        Self::default()
    }
}

impl ModelClient for MockModel {
    fn complete(&self, prompt: &Prompt) -> Result<String, ModelError> {
        let marked = prompt
            .user
            .lines()
            .find(|l| has_marker(l))
            .ok_or_else(|| ModelError::Protocol("prompt has no marked line".into()))?;
        let key = strip_marker(marked).trim().to_string();
        let candidates = line_candidates(&key);
        let mut cursors = self.cursors.lock().expect("mock cursor lock");
        let cursor = cursors.entry(key).or_insert(0);
        let answer = candidates.get(*cursor).cloned().unwrap_or_default();
        *cursor += 1;
        Ok(answer)
    }

    fn name(&self) -> &str {
        "mock"
    }
}

/// A scripted model for tests: answers a fixed sequence, then repeats the
/// last entry.
pub struct ScriptedModel {
    pub answers: Vec<String>,
    cursor: Mutex<usize>,
}

impl ScriptedModel {
    pub fn new<S: Into<String>>(answers: Vec<S>) -> Self {
        ScriptedModel {
            answers: answers.into_iter().map(Into::into).collect(),
            cursor: Mutex::new(0),
        }
    }
}

impl ModelClient for ScriptedModel {
    fn complete(&self, _prompt: &Prompt) -> Result<String, ModelError> {
        let mut cursor = self.cursor.lock().expect("scripted cursor lock");
        let idx = (*cursor).min(self.answers.len().saturating_sub(1));
        *cursor += 1;
        self.answers
            .get(idx)
            .cloned()
            .ok_or_else(|| ModelError::Protocol("script is empty".into()))
    }

    fn name(&self) -> &str {
        "scripted"
    }
}

/// OpenAI-compatible chat-completions client.
///
/// POSTs `{model, messages, max_tokens, temperature}` to
/// `<base_url>/chat/completions` and reads `choices[0].message.content`.
/// The API key comes from the environment only; it never appears in logs,
/// transcripts, or flags.
pub struct HttpModelClient {
    agent: ureq::Agent,
    base_url: String,
    model: String,
    api_key: String,
}

impl HttpModelClient {
    pub fn new(base_url: &str, model: &str, api_key: String) -> Self {
        HttpModelClient {
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(60))
                .build(),
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key,
        }
    }

    /// Fail-fast constructor: errors before any request when no key is set.
    pub fn from_env(base_url: &str, model: &str) -> Result<Self, ModelError> {
        let key = API_KEY_VARS
            .iter()
            .find_map(|var| std::env::var(var).ok().filter(|v| !v.is_empty()))
            .ok_or(ModelError::MissingApiKey(API_KEY_VARS[0], API_KEY_VARS[1]))?;
        Ok(Self::new(base_url, model, key))
    }
}

impl ModelClient for HttpModelClient {
    fn complete(&self, prompt: &Prompt) -> Result<String, ModelError> {
        let url = format!("{}/chat/completions", self.base_url);
        let body = serde_json::json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "max_tokens": prompt.max_tokens,
            "temperature": prompt.temperature,
        });
        let response = self
            .agent
            .post(&url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| ModelError::Unavailable(e.to_string()))?;
        let json: serde_json::Value = response
            .into_json()
            .map_err(|e| ModelError::Protocol(e.to_string()))?;
        json["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                ModelError::Protocol(format!("missing choices[0].message.content in {json}"))
            })
    }

    fn name(&self) -> &str {
        &self.model
    }
}
