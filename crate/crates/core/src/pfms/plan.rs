use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::LanguageTag;
use crate::error::{Error, Result};

/// Tokens per "billion" in budget arguments.
pub const BILLION: u64 = 1_000_000_000;

/// Converts a budget in billions of tokens to raw tokens.
pub fn budget_from_billions(n: f64) -> Result<u64> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Config(format!(
            "budget must be a positive number of billions, got {n}"
        )));
    }
    Ok((n * BILLION as f64).round() as u64)
}

/// One of the three corpus pools a language draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    Mono,
    EnCentric,
    ZhCentric,
}

impl Pool {
    pub const ALL: [Pool; 3] = [Pool::Mono, Pool::EnCentric, Pool::ZhCentric];

    pub fn as_str(self) -> &'static str {
        match self {
            Pool::Mono => "mono",
            Pool::EnCentric => "en_centric",
            Pool::ZhCentric => "zh_centric",
        }
    }

    /// Whether `lang` has this pool at all. English has no English-centric
    /// pool and Simplified Chinese no Chinese-centric one.
    pub fn exists_for(self, lang: LanguageTag) -> bool {
        match self {
            Pool::Mono => true,
            Pool::EnCentric => lang != LanguageTag::english(),
            Pool::ZhCentric => lang != LanguageTag::chinese_simplified(),
        }
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pool::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown pool `{s}`")))
    }
}

/// Tokens each pool of a language can supply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Availability {
    pub lang: LanguageTag,
    pub mono_tokens: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub en_par_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zh_par_tokens: Option<u64>,
}

impl Availability {
    /// Availability with the pools that `lang` cannot have left out.
    pub fn new(lang: LanguageTag, mono: u64, en: u64, zh: u64) -> Self {
        Availability {
            lang,
            mono_tokens: mono,
            en_par_tokens: Pool::EnCentric.exists_for(lang).then_some(en),
            zh_par_tokens: Pool::ZhCentric.exists_for(lang).then_some(zh),
        }
    }

    pub fn get(&self, pool: Pool) -> Option<u64> {
        match pool {
            Pool::Mono => Some(self.mono_tokens),
            Pool::EnCentric => self.en_par_tokens,
            Pool::ZhCentric => self.zh_par_tokens,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lang == LanguageTag::english() && self.en_par_tokens.is_some() {
            return Err(Error::Config(
                "English cannot have an English-centric pool".into(),
            ));
        }
        if self.lang == LanguageTag::chinese_simplified() && self.zh_par_tokens.is_some() {
            return Err(Error::Config(
                "Simplified Chinese cannot have a Chinese-centric pool".into(),
            ));
        }
        Ok(())
    }
}

/// Planned tokens per pool for one language. Serialized with the column
/// names of the allocation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub lang: LanguageTag,
    pub budget_n: u64,
    #[serde(rename = "mono")]
    pub mono_alloc: u64,
    #[serde(
        rename = "en_centric",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub en_par_alloc: Option<u64>,
    #[serde(
        rename = "zh_centric",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub zh_par_alloc: Option<u64>,
}

impl Allocation {
    pub fn get(&self, pool: Pool) -> Option<u64> {
        match pool {
            Pool::Mono => Some(self.mono_alloc),
            Pool::EnCentric => self.en_par_alloc,
            Pool::ZhCentric => self.zh_par_alloc,
        }
    }

    pub fn parallel(&self) -> u64 {
        self.en_par_alloc.unwrap_or(0) + self.zh_par_alloc.unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.mono_alloc + self.parallel()
    }
}

/// Parallel first, then monolingual for the shortfall, plus a monolingual
/// add-on of `n / 10`.
///
/// Non-pivot languages target half of `n` from the Chinese-centric pool, let
/// the English-centric pool fill the rest (it also takes the odd token), and
/// give the Chinese-centric pool a second chance at whatever English could
/// not cover. A pivot language has a single parallel pool, which takes up to
/// `n`.
pub fn plan_language(n: u64, a: &Availability) -> Allocation {
    let (en, zh) = match (a.en_par_tokens, a.zh_par_tokens) {
        (Some(en_avail), Some(zh_avail)) => {
            let zh0 = zh_avail.min(n / 2);
            let en = en_avail.min(n - zh0);
            let zh = zh_avail.min(n - en);
            (Some(en), Some(zh))
        }
        (Some(en_avail), None) => (Some(en_avail.min(n)), None),
        (None, Some(zh_avail)) => (None, Some(zh_avail.min(n))),
        (None, None) => (None, None),
    };
    let shortfall = n - en.unwrap_or(0) - zh.unwrap_or(0);
    Allocation {
        lang: a.lang,
        budget_n: n,
        mono_alloc: a.mono_tokens.min(n / 10 + shortfall),
        en_par_alloc: en,
        zh_par_alloc: zh,
    }
}

/// Allocations for every registry language at one budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixPlan {
    pub budget_n: u64,
    pub allocations: BTreeMap<LanguageTag, Allocation>,
    /// Training hyperparameters carried along untouched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_meta: Option<BTreeMap<String, String>>,
}

impl MixPlan {
    pub fn total_tokens(&self) -> u64 {
        self.allocations.values().map(Allocation::total).sum()
    }

    pub fn pool_total(&self, pool: Pool) -> u64 {
        self.allocations.values().filter_map(|a| a.get(pool)).sum()
    }

    /// Aligned text table: Language | Monolingual | English-centric |
    /// Chinese-centric, with "-" for pools a language does not have.
    pub fn render_text(&self) -> String {
        let cell = |v: Option<u64>| v.map(group_thousands).unwrap_or_else(|| "-".into());
        let mut rows = vec![[
            "Language".to_string(),
            "Monolingual".to_string(),
            "English-centric".to_string(),
            "Chinese-centric".to_string(),
        ]];
        for a in self.allocations.values() {
            rows.push([
                a.lang.code().to_string(),
                cell(Some(a.mono_alloc)),
                cell(a.en_par_alloc),
                cell(a.zh_par_alloc),
            ]);
        }
        rows.push([
            "Total".into(),
            cell(Some(self.pool_total(Pool::Mono))),
            cell(Some(self.pool_total(Pool::EnCentric))),
            cell(Some(self.pool_total(Pool::ZhCentric))),
        ]);
        let widths: Vec<usize> = (0..4)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &rows {
            let line = format!(
                "{:<w0$} | {:>w1$} | {:>w2$} | {:>w3$}",
                r[0],
                r[1],
                r[2],
                r[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

fn group_thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Runs [`plan_language`] for every registry language.
pub fn plan_mix(n: u64, avail: &BTreeMap<LanguageTag, Availability>) -> Result<MixPlan> {
    if let Some(missing) = LanguageTag::all().find(|l| !avail.contains_key(l)) {
        return Err(Error::Config(format!(
            "no availability for language `{missing}`"
        )));
    }
    let mut allocations = BTreeMap::new();
    for (&lang, a) in avail {
        if a.lang != lang {
            return Err(Error::Config(format!(
                "availability keyed `{lang}` describes `{}`",
                a.lang
            )));
        }
        a.validate()?;
        allocations.insert(lang, plan_language(n, a));
    }
    Ok(MixPlan {
        budget_n: n,
        allocations,
        training_meta: None,
    })
}
