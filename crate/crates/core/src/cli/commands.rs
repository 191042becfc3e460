use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::config::{canonical, require_path, PromptStyle, RunConfig};
use super::Command;
use crate::cleaning::{run_pipeline, train_langid, EmbeddingProvider, VectorFileEmbedder};
use crate::corpus::{
    collect, parse_parallel_stream, Direction, LanguageTag, ParallelFormat, SentencePair,
};
use crate::error::{Error, Result};
use crate::eval::{
    aggregate, build_icl_prompt, ingest_scores, sample_exemplar_indices, spbleu, DirectionGroup,
    ScoreRow,
};
use crate::pfms::{
    budget_from_billions, compare_plans, infer_availability, plan_mix, pretrain_setup,
    published_tables, Availability,
};
use crate::sft::{build_sft, default_display_names, format_instruction, sample_sft, CandidateSet};
use crate::tokenization::{corpus_efficiency, efficiency_table, VocabTokenizer};

pub(super) fn dispatch(cmd: &Command, cfg: &mut RunConfig, out: &Path) -> Result<()> {
    match cmd {
        Command::Tokstats { .. } => tokstats(cfg, out),
        Command::Clean { .. } => clean(cfg, out),
        Command::PlanMix { .. } => plan_mix_cmd(cfg, out),
        Command::BuildSft { .. } => build_sft_cmd(cfg, out),
        Command::Score { .. } => score(cfg, out),
        Command::Aggregate { .. } => aggregate_cmd(cfg, out),
        Command::Prompt { .. } => prompt(cfg, out),
    }
}

pub(super) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(path, &s)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(&r)?);
        s.push('\n');
    }
    write_file(path, &s)
}

fn remove_stale(path: &Path) -> Result<()> {
    match std::fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(Error::io(path, e)),
        _ => Ok(()),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(f)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))
}

/// `<code>.txt` files of a directory, keyed by language.
fn read_lang_dir(dir: &Path) -> Result<BTreeMap<LanguageTag, Vec<String>>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        out.insert(LanguageTag::parse(stem)?, read_lines(&path)?);
    }
    Ok(out)
}

fn read_pairs(path: &Path) -> Result<Vec<SentencePair>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let (pairs, rejected) = collect(parse_parallel_stream(
        BufReader::new(f),
        ParallelFormat::from_path(path),
    ))?;
    if let Some(r) = rejected.first() {
        return Err(Error::Data(format!(
            "{} line {}: {} {}",
            path.display(),
            r.line,
            r.reason,
            r.detail
        )));
    }
    Ok(pairs)
}

fn tokstats(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let c = &mut cfg.tokstats;
    if c.vocabs.is_empty() {
        return Err(Error::Config("no --vocab given".into()));
    }
    c.vocabs = c
        .vocabs
        .iter()
        .map(|p| canonical(p))
        .collect::<Result<_>>()?;
    let dir = require_path(&c.corpus, "corpus directory (--in)")?;
    c.corpus = Some(dir.clone());

    let toks: Vec<VocabTokenizer> = c
        .vocabs
        .iter()
        .map(|p| VocabTokenizer::from_vocab_file(p))
        .collect::<Result<_>>()?;
    let mut aligned = read_lang_dir(&dir)?;
    let english = aligned
        .remove(&LanguageTag::english())
        .ok_or_else(|| Error::Config(format!("{} has no en.txt", dir.display())))?;
    let reports = toks
        .iter()
        .map(|t| corpus_efficiency(t, &aligned, &english))
        .collect::<Result<Vec<_>>>()?;
    let table = efficiency_table(&reports)?;
    write_json(
        &out.join("tokstats.json"),
        &json!({ "reports": reports, "table": table }),
    )?;
    write_file(&out.join("tokstats.txt"), &table.render_text())
}

fn clean(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let c = &mut cfg.clean;
    let input = require_path(&c.input, "input corpus (--in)")?;
    c.input = Some(input.clone());
    let profiles = match &c.langid_samples {
        Some(dir) => {
            let dir = canonical(dir)?;
            let samples = read_lang_dir(&dir)?;
            c.langid_samples = Some(dir);
            train_langid(&samples, c.langid_profile_size)?
        }
        None => Vec::new(),
    };
    let embedder = match &c.embeddings {
        Some(p) => {
            let p = canonical(p)?;
            let e = VectorFileEmbedder::from_file(&p)?;
            c.embeddings = Some(p);
            Some(e)
        }
        None => None,
    };

    let f = File::open(&input).map_err(|e| Error::io(&input, e))?;
    let (pairs, rejected) = collect(parse_parallel_stream(
        BufReader::new(f),
        ParallelFormat::from_path(&input),
    ))?;
    if pairs.is_empty() {
        return Err(Error::Data(format!(
            "{} holds no valid sentence pairs",
            input.display()
        )));
    }
    let res = run_pipeline(
        pairs,
        &c.thresholds,
        &profiles,
        embedder.as_ref().map(|e| e as &dyn EmbeddingProvider),
    )?;

    write_jsonl(&out.join("clean.jsonl"), &res.kept)?;
    let quarantine = out.join("quarantine.jsonl");
    if res.quarantine.is_empty() {
        remove_stale(&quarantine)?;
    } else {
        write_jsonl(&quarantine, &res.quarantine)?;
    }
    let errored = out.join("errored.jsonl");
    if res.errored.is_empty() {
        remove_stale(&errored)?;
    } else {
        write_jsonl(
            &errored,
            res.errored
                .iter()
                .map(|(p, m)| json!({ "pair": p, "error": m })),
        )?;
    }
    let rejected_path = out.join("rejected.jsonl");
    if rejected.is_empty() {
        remove_stale(&rejected_path)?;
    } else {
        write_jsonl(&rejected_path, &rejected)?;
    }
    log::info!("kept {} of {}", res.stats.kept(), res.stats.total);
    write_json(
        &out.join("clean_stats.json"),
        &json!({ "stats": res.stats, "ingest_rejected": rejected.len() }),
    )
}

fn plan_mix_cmd(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let c = &mut cfg.pfms;
    let billions = c
        .budget_billions
        .ok_or_else(|| Error::Config("no budget given (--n)".into()))?;
    let n = budget_from_billions(billions)?;
    let availability: BTreeMap<LanguageTag, Availability> = match &c.availability {
        Some(p) => {
            let p = canonical(p)?;
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            let list: Vec<Availability> = serde_json::from_str(&text)
                .map_err(|e| Error::Data(format!("{}: {e}", p.display())))?;
            c.availability = Some(p);
            let mut map = BTreeMap::new();
            for a in list {
                a.validate()?;
                if map.insert(a.lang, a).is_some() {
                    return Err(Error::Data(format!(
                        "availability lists `{}` twice",
                        a.lang
                    )));
                }
            }
            map
        }
        None => {
            let inferred = infer_availability(&published_tables())?;
            for w in &inferred.warnings {
                log::warn!("{w}");
            }
            write_json(&out.join("availability.json"), &inferred)?;
            inferred.availability
        }
    };
    let mut plan = plan_mix(n, &availability)?;
    plan.training_meta = Some(pretrain_setup());
    write_json(&out.join("plan.json"), &plan)?;
    write_file(&out.join("plan.txt"), &plan.render_text())?;
    let comparison = out.join("comparison.json");
    match published_tables().into_iter().find(|t| t.budget_n == n) {
        Some(published) => write_json(&comparison, &compare_plans(&published, &plan)?),
        None => remove_stale(&comparison),
    }
}

fn build_sft_cmd(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let c = &mut cfg.sft;
    let input = require_path(&c.input, "candidate file (--in)")?;
    c.input = Some(input.clone());
    let mut sets = Vec::new();
    for (i, line) in read_lines(&input)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let s: CandidateSet = serde_json::from_str(line)
            .map_err(|e| Error::Data(format!("{} line {}: {e}", input.display(), i + 1)))?;
        sets.push(s);
    }
    let built = build_sft(&sets, &c.policy, &default_display_names())?;
    for (i, msg) in &built.errored {
        log::warn!("candidate set {i}: {msg}");
    }
    write_jsonl(&out.join("sft.jsonl"), &built.records)?;
    write_json(
        &out.join("sft_report.json"),
        &json!({
            "report": built.report,
            "total": built.total(),
            "kept": built.records.len(),
            "below_threshold": built.below_threshold,
            "errored": built.errored,
        }),
    )?;
    write_file(&out.join("sft_report.txt"), &built.report.render_text())?;
    for (size, subset) in
        c.sample_sizes
            .iter()
            .zip(sample_sft(&built.records, &c.sample_sizes, cfg.seed)?)
    {
        write_jsonl(&out.join(format!("sft_sample_{size}.jsonl")), &subset)?;
    }
    Ok(())
}

fn score(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let c = &mut cfg.score;
    let hyp = require_path(&c.hyp, "hypothesis file (--hyp)")?;
    let reference = require_path(&c.reference, "reference file (--ref)")?;
    let vocab = require_path(&c.vocab, "vocab (--vocab)")?;
    (c.hyp, c.reference, c.vocab) = (
        Some(hyp.clone()),
        Some(reference.clone()),
        Some(vocab.clone()),
    );
    if c.system.is_some() != c.direction.is_some() {
        return Err(Error::Config("--system and --direction go together".into()));
    }
    let tok = VocabTokenizer::from_vocab_file(&vocab)?;
    let bleu = spbleu(&read_lines(&hyp)?, &read_lines(&reference)?, &tok)?;
    write_json(&out.join("bleu.json"), &bleu)?;
    let rows = out.join("scores.jsonl");
    match (&c.system, c.direction) {
        (Some(system), Some(direction)) => write_jsonl(
            &rows,
            [ScoreRow {
                system: system.clone(),
                direction,
                metric: "spbleu".into(),
                value: bleu.score,
            }],
        ),
        _ => remove_stale(&rows),
    }
}

fn aggregate_cmd(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let c = &mut cfg.eval;
    if c.inputs.is_empty() {
        return Err(Error::Config("no score files given (--in)".into()));
    }
    c.inputs = c
        .inputs
        .iter()
        .map(|p| canonical(p))
        .collect::<Result<_>>()?;
    let matrix = ingest_scores(&c.inputs)?;
    let systems = if c.systems.is_empty() {
        matrix.systems()
    } else {
        c.systems.clone()
    };
    let groups = c.groups.clone().unwrap_or_else(DirectionGroup::defaults);
    let table = aggregate(&matrix, &groups, &systems, &c.metrics)?;
    write_json(&out.join("aggregate.json"), &table)?;
    write_file(&out.join("aggregate.txt"), &table.render_text())
}

fn prompt(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let seed = cfg.seed;
    let c = &mut cfg.prompt;
    let input = require_path(&c.input, "query file (--in)")?;
    c.input = Some(input.clone());
    let dev: Vec<SentencePair> = match c.style {
        PromptStyle::Icl => {
            let p = require_path(&c.dev, "exemplar pool (--dev)")?;
            c.dev = Some(p.clone());
            read_pairs(&p)?
        }
        PromptStyle::Instruction => Vec::new(),
    };
    let mut pools: BTreeMap<Direction, Vec<(String, String)>> = BTreeMap::new();
    for p in dev {
        pools
            .entry(p.direction())
            .or_default()
            .push((p.src_text, p.tgt_text));
    }
    let names = default_display_names();
    let mut exemplars: BTreeMap<Direction, Vec<(String, String)>> = BTreeMap::new();
    let mut rows = Vec::new();
    for q in read_pairs(&input)? {
        let d = q.direction();
        let prompt = match c.style {
            PromptStyle::Instruction => format_instruction(d, &q.src_text, None, &names)?,
            PromptStyle::Icl => {
                if let Entry::Vacant(slot) = exemplars.entry(d) {
                    let pool = pools.get(&d).map(Vec::as_slice).unwrap_or_default();
                    if pool.len() < c.shots {
                        return Err(Error::Data(format!(
                            "exemplar pool for {d} has {} pairs, {} needed",
                            pool.len(),
                            c.shots
                        )));
                    }
                    let picked = sample_exemplar_indices(pool.len(), c.shots, seed)?
                        .into_iter()
                        .map(|i| pool[i].clone())
                        .collect();
                    slot.insert(picked);
                }
                build_icl_prompt(&exemplars[&d], &q.src_text, c.shots)?.rendered
            }
        };
        rows.push(json!({ "direction": d, "prompt": prompt }));
    }
    write_jsonl(&out.join("prompts.jsonl"), rows)
}
