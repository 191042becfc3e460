//! The translation instruction:
//!
//! ```text
//! Translate this from {S} to {T}:
//! {S}: {src}
//! {T}:{tgt}
//! ```
//!
//! The inference form stops after the final colon; the training form
//! appends the target directly, with no separator.

use std::collections::BTreeMap;

use crate::corpus::{Direction, LanguageTag};
use crate::error::{Error, Result};

const LEAD: &str = "Translate this from ";

/// Display names from the language registry, e.g. `zhs` to
/// "Chinese (Simplified)".
pub fn default_display_names() -> BTreeMap<LanguageTag, String> {
    LanguageTag::all()
        .map(|l| (l, l.name().to_string()))
        .collect()
}

fn name_of(names: &BTreeMap<LanguageTag, String>, lang: LanguageTag) -> Result<&str> {
    names
        .get(&lang)
        .map(String::as_str)
        .ok_or_else(|| Error::Config(format!("no display name for `{lang}`")))
}

pub fn format_instruction(
    d: Direction,
    src: &str,
    tgt: Option<&str>,
    names: &BTreeMap<LanguageTag, String>,
) -> Result<String> {
    let s = name_of(names, d.src())?;
    let t = name_of(names, d.tgt())?;
    let mut out = format!("{LEAD}{s} to {t}:\n{s}: {src}\n{t}:");
    if let Some(tgt) = tgt {
        out.push_str(tgt);
    }
    Ok(out)
}

/// Recovers direction and source from an inference-form prompt.
pub fn parse_instruction(
    prompt: &str,
    names: &BTreeMap<LanguageTag, String>,
) -> Result<(Direction, String)> {
    let bad = || Error::Data("text is not an instruction prompt".into());
    let rest = prompt.strip_prefix(LEAD).ok_or_else(bad)?;
    let (header, body) = rest.split_once(":\n").ok_or_else(bad)?;
    let by_name: BTreeMap<&str, LanguageTag> =
        names.iter().map(|(&l, n)| (n.as_str(), l)).collect();
    // A name could itself contain " to "; try every split.
    for (i, _) in header.match_indices(" to ") {
        let (s, t) = (&header[..i], &header[i + 4..]);
        let (Some(&src), Some(&tgt)) = (by_name.get(s), by_name.get(t)) else {
            continue;
        };
        let Some(text) = body
            .strip_prefix(&format!("{s}: "))
            .and_then(|b| b.strip_suffix(&format!("\n{t}:")))
        else {
            continue;
        };
        return Ok((Direction::new(src, tgt)?, text.to_string()));
    }
    Err(bad())
}

/// Splits a training-form string into its inference prompt and completion,
/// given the direction and source it was built from.
pub fn split_completion<'a>(
    text: &'a str,
    d: Direction,
    src: &str,
    names: &BTreeMap<LanguageTag, String>,
) -> Result<(&'a str, &'a str)> {
    let prompt = format_instruction(d, src, None, names)?;
    if text.starts_with(&prompt) {
        Ok(text.split_at(prompt.len()))
    } else {
        Err(Error::Data(
            "text does not start with the expected prompt".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Direction {
        s.parse().unwrap()
    }

    #[test]
    fn inference_form() {
        let p = format_instruction(d("en->de"), "hello", None, &default_display_names()).unwrap();
        assert_eq!(
            p,
            "Translate this from English to German:\nEnglish: hello\nGerman:"
        );
    }

    #[test]
    fn training_form_appends_without_space() {
        let names = default_display_names();
        let p = format_instruction(d("en->de"), "hello", Some("hallo"), &names).unwrap();
        assert_eq!(
            p,
            "Translate this from English to German:\nEnglish: hello\nGerman:hallo"
        );
        let (prompt, completion) = split_completion(&p, d("en->de"), "hello", &names).unwrap();
        assert_eq!(
            prompt,
            format_instruction(d("en->de"), "hello", None, &names).unwrap()
        );
        assert_eq!(completion, "hallo");
    }

    #[test]
    fn registry_names_with_parentheses() {
        let p = format_instruction(d("zhs->zht"), "你好", None, &default_display_names()).unwrap();
        assert!(
            p.starts_with("Translate this from Chinese (Simplified) to Chinese (Traditional):\n")
        );
    }

    #[test]
    fn missing_name_is_an_error() {
        let names = BTreeMap::from([(LanguageTag::english(), "English".to_string())]);
        assert!(format_instruction(d("en->de"), "x", None, &names).is_err());
    }

    #[test]
    fn parse_rejects_other_text() {
        let names = default_display_names();
        assert!(parse_instruction("hello", &names).is_err());
        assert!(parse_instruction(
            "Translate this from English to German:\nEnglish: x\nGerman:y",
            &names
        )
        .is_err());
    }

    #[test]
    fn names_containing_the_separator() {
        let mut names = default_display_names();
        names.insert(LanguageTag::english(), "Back to Basics".into());
        let p = format_instruction(d("en->fr"), "a", None, &names).unwrap();
        assert_eq!(
            parse_instruction(&p, &names).unwrap(),
            (d("en->fr"), "a".to_string())
        );
    }

    proptest! {
        #[test]
        fn inference_form_parses_back(
            a in 0usize..46, b in 0usize..46, src in "(?s).{0,40}"
        ) {
            prop_assume!(a != b);
            let langs: Vec<LanguageTag> = LanguageTag::all().collect();
            let dir = Direction::new(langs[a], langs[b]).unwrap();
            let names = default_display_names();
            let p = format_instruction(dir, &src, None, &names).unwrap();
            prop_assert_eq!(parse_instruction(&p, &names).unwrap(), (dir, src));
        }
    }
}
