//! Chat prompt construction.
//!
//! The prompt has a fixed system role (software expert for formal methods,
//! told to return only the fixed line) and a user message holding the
//! enclosing method's source with the target line marked `//buggy line`,
//! terminated by the literal ask `\nfixed line: \n`.

use serde::{Deserialize, Serialize};

use crate::lang::{has_marker, Program, MARKER_COMMENT};

use super::RepairError;

pub const DEFAULT_MAX_TOKENS: u32 = 30;
pub const DEFAULT_TEMPERATURE: f64 = 0.2;

pub const SYSTEM_PROMPT: &str = "You are a software expert specializing in formal methods \
using the Dafny programming language. You receive the following program where a verifier \
error message indicates an issue. The error is due to a buggy line, which is marked with \
the comment '//buggy line'. Your task is to correct the buggy line to ensure the program \
verifies successfully. Do not include explanations. Return only fixed line. Here is the code: ";

pub const PROMPT_SUFFIX: &str = "\nfixed line: \n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
    pub max_tokens: u32,
    pub temperature: f64,
}

/// Build the prompt for one suspicious line with default sampling settings.
pub fn build_prompt(p: &Program, line: u32) -> Result<Prompt, RepairError> {
    build_prompt_with(p, line, DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE, None)
}

/// Full-control variant. `avoid` carries a previously failed candidate,
/// appended as a "do not repeat" instruction on retry attempts (the ask
/// suffix stays last either way).
pub fn build_prompt_with(
    p: &Program,
    line: u32,
    max_tokens: u32,
    temperature: f64,
    avoid: Option<&str>,
) -> Result<Prompt, RepairError> {
    let method = p.method_at(line).ok_or(RepairError::LineNotFound(line))?;
    let mut lines: Vec<String> = Vec::new();
    for n in method.start_line..=method.end_line {
        let text = p.line_text(n).unwrap_or_default();
        let text = if n == line {
            if has_marker(text) {
                text.to_string()
            } else {
                format!("{} {}", text.trim_end(), MARKER_COMMENT)
            }
        } else if has_marker(text) {
            // Context minimization: only the target line carries a marker.
            strip_marker(text)
        } else {
            text.to_string()
        };
        lines.push(text);
    }
    let mut user = lines.join("\n");
    if let Some(previous) = avoid {
        user.push_str(&format!("\nDo not repeat: {previous}"));
    }
    user.push_str(PROMPT_SUFFIX);
    Ok(Prompt {
        system: SYSTEM_PROMPT.to_string(),
        user,
        max_tokens,
        temperature,
    })
}

pub(crate) fn strip_marker(text: &str) -> String {
    match text.rfind("//") {
        Some(idx) if text[idx + 2..].trim() == "buggy line" => text[..idx].trim_end().to_string(),
        _ => text.to_string(),
    }
}
