//! Small shared helpers: stable hashing, retry backoff and response-line
//! cleanup.

use std::time::Duration;

use sha2::{Digest, Sha256};

/// Exponential backoff: 400 ms doubling per attempt, capped at 5 s.
pub(crate) fn backoff_delay(attempt: u32) -> Duration {
    let millis = 200u64.saturating_mul(1 << attempt.min(5));
    Duration::from_millis(millis.min(5_000))
}

/// Stable 64-bit hash over length-prefixed byte parts, via SHA-256.
///
/// Used wherever a derived seed or tag must be identical across runs and
/// platforms; `std`'s hasher makes no such guarantee.
pub(crate) fn hash64(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Full SHA-256 of a byte string as lowercase hex.
pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Strips a leading list marker (`1.`, `23)`, `-`, `*`) plus surrounding
/// whitespace, returning the remainder if a marker was present.
pub(crate) fn strip_list_marker(line: &str) -> Option<&str> {
    let s = line.trim_start();
    let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
    let rest = if digits > 0 {
        let after = &s[digits..];
        after.strip_prefix('.').or_else(|| after.strip_prefix(')'))?
    } else {
        s.strip_prefix('-').or_else(|| s.strip_prefix('*'))?
    };
    Some(rest.trim_start())
}

/// Strips one layer of surrounding matching quotes, if present.
pub(crate) fn strip_matching_quotes(s: &str) -> &str {
    let t = s.trim();
    for quote in ['"', '\''] {
        if t.len() >= 2 && t.starts_with(quote) && t.ends_with(quote) {
            return &t[1..t.len() - 1];
        }
    }
    t
}
