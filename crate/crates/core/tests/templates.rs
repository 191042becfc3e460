use mtforge::corpus::Direction;
use mtforge::eval::{build_icl_prompt, parse_icl_prompt};
use mtforge::sft::{default_display_names, format_instruction, parse_instruction};

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!(
        "{}/tests/golden/{name}",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

fn d(s: &str) -> Direction {
    s.parse().unwrap()
}

#[test]
fn instruction_inference_form() {
    let names = default_display_names();
    let p = format_instruction(d("en->de"), "The weather is nice today.", None, &names).unwrap();
    assert_eq!(p, golden("instruction_en_de.txt"));
    let p = format_instruction(d("kk->en"), "Сәлем әлем", None, &names).unwrap();
    assert_eq!(p, golden("instruction_kk_en.txt"));
    assert_eq!(
        parse_instruction(&p, &names).unwrap(),
        (d("kk->en"), "Сәлем әлем".to_string())
    );
}

#[test]
fn instruction_training_form() {
    let p = format_instruction(
        d("zhs->zht"),
        "我们明天见。",
        Some("我們明天見。"),
        &default_display_names(),
    )
    .unwrap();
    assert_eq!(p, golden("instruction_zhs_zht_train.txt"));
}

#[test]
fn icl_eight_shots() {
    let ex = pairs(&[
        ("Hello", "Hallo"),
        ("Thank you", "Danke"),
        ("Good morning", "Guten Morgen"),
        ("See you soon", "Bis bald"),
        ("One", "Eins"),
        ("Two", "Zwei"),
        ("Yes", "Ja"),
        ("No", "Nein"),
    ]);
    let p = build_icl_prompt(&ex, "Good night", 8).unwrap();
    assert_eq!(p.rendered, golden("icl_8shot.txt"));
    assert!(p.rendered.ends_with('='));
}

#[test]
fn icl_escaping() {
    let ex = pairs(&[
        ("x=y", "x=y"),
        ("line one\nline two", "Zeile eins\nZeile zwei"),
    ]);
    let p = build_icl_prompt(&ex, "a=b", 2).unwrap();
    assert_eq!(p.rendered, golden("icl_escaped.txt"));
    assert_eq!(
        parse_icl_prompt(&p.rendered).unwrap(),
        (ex, "a=b".to_string())
    );
}
