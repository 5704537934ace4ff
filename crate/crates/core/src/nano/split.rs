/// Rule-based sentence splitter.
///
/// ASCII `.`, `!`, `?` end a sentence when followed by whitespace or the end of
/// text; the full-width `。`, `！`, `？` always do. Runs of closing marks stay
/// attached to their sentence. Abbreviations are not special-cased.
pub fn split_sentences(document: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = document.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let boundary = match c {
            '。' | '！' | '？' => true,
            '.' | '!' | '?' => chars.peek().is_none_or(|(_, n)| n.is_whitespace() || is_terminal(*n) || is_closer(*n)),
            _ => false,
        };
        if !boundary {
            continue;
        }
        // keep "?!" or "。」" style runs together
        let mut end = i + c.len_utf8();
        while let Some(&(j, n)) = chars.peek() {
            if !(is_terminal(n) || is_closer(n)) {
                break;
            }
            if matches!(n, '.' | '!' | '?') {
                if let Some(after) = document[j + n.len_utf8()..].chars().next() {
                    if !(after.is_whitespace() || is_terminal(after) || is_closer(after)) {
                        break;
                    }
                }
            }
            end = j + n.len_utf8();
            chars.next();
        }
        push(&mut out, &document[start..end]);
        start = end;
    }
    push(&mut out, &document[start..]);
    out
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '。' | '！' | '？')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | '」' | '』' | '”' | '’' | '）')
}

fn push(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_owned());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_marks() {
        assert_eq!(split_sentences("A. B!"), ["A.", "B!"]);
        assert_eq!(split_sentences("Really?! Yes."), ["Really?!", "Yes."]);
        assert_eq!(split_sentences("Pi is 3.14 today."), ["Pi is 3.14 today."]);
        assert_eq!(split_sentences("He said \"go.\" Then left."), ["He said \"go.\"", "Then left."]);
    }

    #[test]
    fn full_width_marks() {
        assert_eq!(split_sentences("你好。再见。"), ["你好。", "再见。"]);
        assert_eq!(split_sentences("他说「好。」然后走了！"), ["他说「好。」", "然后走了！"]);
    }

    #[test]
    fn no_terminal_mark() {
        assert_eq!(split_sentences("no punctuation here"), ["no punctuation here"]);
        assert!(split_sentences("   ").is_empty());
        assert!(split_sentences("").is_empty());
    }
}
