//! Response sanitization.
//!
//! Models wrap answers in code fences, language tags, quotes, labels, or
//! prose. The sanitizer strips the wrapping and returns the first line that
//! looks like a statement; responses with no code line are rejected.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Rejection {
    #[error("empty response")]
    EmptyResponse,
    #[error("no statement-like content in response")]
    NoStatementContent,
}

/// Extract a candidate replacement line from a raw model response.
pub fn sanitize_response(raw: &str) -> Result<String, Rejection> {
    if raw.trim().is_empty() {
        return Err(Rejection::EmptyResponse);
    }
    let body = extract_fenced(raw).unwrap_or_else(|| raw.to_string());
    for line in body.lines() {
        let mut line = line.trim();
        // Leading label, e.g. "fixed line: return -x;"
        let lowered = line.to_lowercase();
        for label in ["fixed line:", "fixed line", "answer:", "fix:"] {
            if lowered.starts_with(label) {
                line = line[label.len()..].trim_start();
                break;
            }
        }
        let line = strip_wrapping_quotes(line);
        if line.is_empty() {
            continue;
        }
        if let Some(candidate) = as_statement_like(line) {
            return Ok(candidate);
        }
    }
    Err(Rejection::NoStatementContent)
}

/// Contents of the first ``` fence, with a single-word language tag dropped.
fn extract_fenced(raw: &str) -> Option<String> {
    let start = raw.find("```")?;
    let after = &raw[start + 3..];
    let end = after.find("```").unwrap_or(after.len());
    let mut block = &after[..end];
    // A language annotation is either glued to the fence ("```c\n") or the
    // whole first line ("```\ndafny\n...").
    if let Some(newline) = block.find('\n') {
        let first = block[..newline].trim();
        if !first.is_empty() && first.len() <= 10 && first.chars().all(char::is_alphanumeric) {
            block = &block[newline + 1..];
        }
    }
    Some(block.to_string())
}

fn strip_wrapping_quotes(line: &str) -> &str {
    let line = line.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('`', '`')] {
        if line.len() >= 2 && line.starts_with(open) && line.ends_with(close) {
            return line[1..line.len() - 1].trim();
        }
    }
    line
}

/// A line counts as a statement when it assigns or starts with a statement
/// keyword. Anything after the first `;` is dropped (models like to add
/// trailing commentary).
fn as_statement_like(line: &str) -> Option<String> {
    let keyword_start = ["return", "var ", "if ", "if(", "while ", "while("]
        .iter()
        .any(|kw| line.starts_with(kw));
    let head = match line.find(';') {
        Some(idx) => line[..=idx].trim(),
        None => line,
    };
    if keyword_start || head.contains(":=") {
        return Some(head.to_string());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_code_fences_with_language_tags() {
        assert_eq!(
            sanitize_response("```c\nreturn -x;\n```").unwrap(),
            "return -x;"
        );
        assert_eq!(
            sanitize_response("```dafny\nres := a + b;\n```").unwrap(),
            "res := a + b;"
        );
        assert_eq!(sanitize_response("```\nreturn -x;\n```").unwrap(), "return -x;");
    }

    #[test]
    fn bare_line_passes_through() {
        assert_eq!(sanitize_response("return -x;").unwrap(), "return -x;");
    }

    #[test]
    fn explanation_only_is_rejected() {
        let raw = "The issue is that the else branch keeps the sign; you should negate x.";
        assert_eq!(
            sanitize_response(raw),
            Err(Rejection::NoStatementContent)
        );
    }

    #[test]
    fn empty_is_rejected() {
        assert_eq!(sanitize_response(""), Err(Rejection::EmptyResponse));
        assert_eq!(sanitize_response("  \n \t"), Err(Rejection::EmptyResponse));
    }

    #[test]
    fn labels_and_quotes_are_stripped() {
        assert_eq!(
            sanitize_response("fixed line: return -x;").unwrap(),
            "return -x;"
        );
        assert_eq!(sanitize_response("\"return -x;\"").unwrap(), "return -x;");
        assert_eq!(sanitize_response("`res := a + b;`").unwrap(), "res := a + b;");
    }

    #[test]
    fn first_code_line_wins_over_prose() {
        let raw = "Sure! The corrected line is:\nreturn -x;\nThis negates x.";
        assert_eq!(sanitize_response(raw).unwrap(), "return -x;");
    }

    #[test]
    fn trailing_commentary_after_semicolon_is_dropped() {
        assert_eq!(
            sanitize_response("return -x; // negate to satisfy the contract").unwrap(),
            "return -x;"
        );
        assert_eq!(
            sanitize_response("return -x; this fixes it").unwrap(),
            "return -x;"
        );
    }

    #[test]
    fn assignment_without_keyword_is_accepted() {
        assert_eq!(sanitize_response("s := s + 1;").unwrap(), "s := s + 1;");
        assert_eq!(sanitize_response("s := s + 1").unwrap(), "s := s + 1");
    }
}
