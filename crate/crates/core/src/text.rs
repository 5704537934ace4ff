//! Text normalization shared by ingestion and the native metrics.

use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

/// Canonical composed form (NFC) of `s`.
pub fn nfc(s: &str) -> String {
    match is_nfc_quick(s.chars()) {
        IsNormalized::Yes => s.to_owned(),
        _ => s.nfc().collect(),
    }
}

/// Whitespace tokens of an already-normalized string.
pub fn whitespace_tokens(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composes_decomposed_portuguese() {
        // "café" with a combining acute accent
        let decomposed = "cafe\u{0301}";
        assert_eq!(nfc(decomposed), "café");
        assert_eq!(nfc("café"), "café");
    }
}
