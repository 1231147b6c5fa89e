use crate::extraction::{AnswerLetter, McqItem};

const INSTRUCTION: &str = "Generate a JSON response with:\n{\n  \"reasoning\": \"<reasoning>\",\n  \"answer\": \"A/B/C/D\"\n}";

/// Renders the evaluation prompt: scenario, question and lettered options in
/// tagged blocks, then the JSON answer instruction. No trailing newline.
pub fn format_prompt(item: &McqItem) -> String {
    let options = AnswerLetter::ALL
        .iter()
        .zip(item.options.iter())
        .map(|(letter, text)| format!("{letter}) {text}"))
        .collect::<Vec<_>>()
        .join("\n");
    format!(
        "<scenario>\n{}\n</scenario>\n\n<question>\n{}\n</question>\n\n<options>\n{}\n</options>\n\n{}",
        item.scenario, item.question, options, INSTRUCTION
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::Category;
    use crate::golden::item;

    #[test]
    fn deterministic_and_anchored() {
        let mut it = item(Category::EmotionalCues, 0);
        it.options[1] = "Relief (mostly) and guilt)".into();
        let a = format_prompt(&it);
        assert_eq!(a, format_prompt(&it));
        let labels: Vec<&str> = a
            .lines()
            .filter(|l| l.len() > 2 && l.as_bytes()[1] == b')' && "ABCD".contains(&l[..1]))
            .collect();
        assert_eq!(labels.len(), 4);
        assert_eq!(labels[1], "B) Relief (mostly) and guilt)");
        assert!(a.ends_with('}'));
    }
}
