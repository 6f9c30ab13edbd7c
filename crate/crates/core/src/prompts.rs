//! Golden prompt texts used to generate the review corpora, shipped as
//! byte-exact assets so any generator can hash-check its copies, plus the
//! template fills that turn one review record into prompt messages.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::corpus::ReviewRecord;
use crate::digest::sha256_hex;

pub const USER_CENTRIC_SYSTEM: &str = include_str!("../assets/prompts/user_centric_system.txt");
pub const USER_CENTRIC_USER: &str = include_str!("../assets/prompts/user_centric_user.txt");
pub const PLATFORM_NEUTRAL_SYSTEM: &str =
    include_str!("../assets/prompts/platform_neutral_system.txt");
pub const PLATFORM_ENCOURAGING_SYSTEM: &str =
    include_str!("../assets/prompts/platform_encouraging_system.txt");
pub const PLATFORM_CONSTRUCTIVE_SYSTEM: &str =
    include_str!("../assets/prompts/platform_constructive_system.txt");
pub const PLATFORM_CRITICAL_SYSTEM: &str =
    include_str!("../assets/prompts/platform_critical_system.txt");
pub const SHA256SUMS: &str = include_str!("../assets/prompts/SHA256SUMS");

/// Keys of the platform-centric user message, in emission order.
pub const PLATFORM_KEYS: [&str; 7] = [
    "Score",
    "Location",
    "Name",
    "Link",
    "Date_stayed_in_hotel",
    "Date_review",
    "Class",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    UserCentric,
    PlatformNeutral,
    Encouraging,
    Constructive,
    Critical,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::UserCentric,
        Scenario::PlatformNeutral,
        Scenario::Encouraging,
        Scenario::Constructive,
        Scenario::Critical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::UserCentric => "user_centric",
            Scenario::PlatformNeutral => "platform_neutral",
            Scenario::Encouraging => "encouraging",
            Scenario::Constructive => "constructive",
            Scenario::Critical => "critical",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub scenario: Scenario,
    pub system_message: String,
    /// Bracketed placeholders for the user-centric scenario; the
    /// platform scenarios send a JSON object instead.
    pub user_message_template: Option<String>,
}

pub fn bundle(scenario: Scenario) -> PromptBundle {
    let system = match scenario {
        Scenario::UserCentric => USER_CENTRIC_SYSTEM,
        Scenario::PlatformNeutral => PLATFORM_NEUTRAL_SYSTEM,
        Scenario::Encouraging => PLATFORM_ENCOURAGING_SYSTEM,
        Scenario::Constructive => PLATFORM_CONSTRUCTIVE_SYSTEM,
        Scenario::Critical => PLATFORM_CRITICAL_SYSTEM,
    };
    PromptBundle {
        scenario,
        system_message: system.to_string(),
        user_message_template: (scenario == Scenario::UserCentric)
            .then(|| USER_CENTRIC_USER.to_string()),
    }
}

/// Asset file name to SHA-256 of its bytes.
pub fn asset_digests() -> BTreeMap<&'static str, String> {
    [
        ("user_centric_system.txt", USER_CENTRIC_SYSTEM),
        ("user_centric_user.txt", USER_CENTRIC_USER),
        ("platform_neutral_system.txt", PLATFORM_NEUTRAL_SYSTEM),
        (
            "platform_encouraging_system.txt",
            PLATFORM_ENCOURAGING_SYSTEM,
        ),
        (
            "platform_constructive_system.txt",
            PLATFORM_CONSTRUCTIVE_SYSTEM,
        ),
        ("platform_critical_system.txt", PLATFORM_CRITICAL_SYSTEM),
    ]
    .into_iter()
    .map(|(name, text)| (name, sha256_hex(text.as_bytes())))
    .collect()
}

/// Aspect ratings as `name: score` pairs joined by commas.
fn detail_ratings(r: &ReviewRecord) -> String {
    r.aspect_ratings
        .iter()
        .map(|(k, v)| format!("{k}: {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Fill the user-centric template. Needs the original review text.
pub fn fill_user_centric(r: &ReviewRecord) -> Option<String> {
    let text = r.text.as_deref()?;
    Some(
        USER_CENTRIC_USER
            .replace("[hotel-name]", &r.hotel.name)
            .replace("[overall-ratings]", &r.overall_rating.to_string())
            .replace("[details-ratings]", &detail_ratings(r))
            .replace("[user-review-text]", text),
    )
}

/// JSON user message for the platform scenarios. Dates are rendered as
/// month and year, the class as an integer when it is whole.
pub fn platform_user_message(r: &ReviewRecord) -> Value {
    let mut score = Map::new();
    for (k, v) in &r.aspect_ratings {
        score.insert(k.clone(), json!(v));
    }
    score.insert("overall".into(), json!(r.overall_rating));
    let stayed = r
        .stay_date
        .map(|ym| {
            chrono::NaiveDate::from_ymd_opt(ym.year, ym.month, 1)
                .map(|d| d.format("%B %Y").to_string())
                .unwrap_or_default()
        })
        .unwrap_or_default();
    let class = if r.hotel.class.fract() == 0.0 {
        json!(r.hotel.class as i64)
    } else {
        json!(r.hotel.class)
    };
    let mut msg = Map::new();
    msg.insert("Score".into(), Value::Object(score));
    msg.insert(
        "Location".into(),
        json!({"region": r.hotel.region, "locality": r.hotel.locality}),
    );
    msg.insert("Name".into(), json!(r.hotel.name));
    msg.insert(
        "Link".into(),
        json!(r.hotel.link.clone().unwrap_or_default()),
    );
    msg.insert("Date_stayed_in_hotel".into(), json!(stayed));
    msg.insert(
        "Date_review".into(),
        json!(r.review_date.format("%B %Y").to_string()),
    );
    msg.insert("Class".into(), class);
    Value::Object(msg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::record;
    use crate::corpus::YearMonth;

    #[test]
    fn checked_in_sums_match() {
        let digests = asset_digests();
        let mut seen = 0;
        for line in SHA256SUMS.lines() {
            let (sum, name) = line.split_once("  ").unwrap();
            assert_eq!(digests[name], sum, "{name}");
            seen += 1;
        }
        assert_eq!(seen, digests.len());
    }

    #[test]
    fn tone_variants_differ_only_in_instruction() {
        let neutral =
            "Using these parameters, you will generate a review and return the review text.";
        assert!(PLATFORM_NEUTRAL_SYSTEM.contains(neutral));
        assert!(PLATFORM_ENCOURAGING_SYSTEM.contains("warm and enthusiastic review"));
        assert!(PLATFORM_CONSTRUCTIVE_SYSTEM.contains("balanced and constructive tone"));
        assert!(PLATFORM_CRITICAL_SYSTEM.contains("direct and dissatisfied tone"));
        for s in [
            PLATFORM_ENCOURAGING_SYSTEM,
            PLATFORM_CONSTRUCTIVE_SYSTEM,
            PLATFORM_CRITICAL_SYSTEM,
        ] {
            let (head, _) = s.split_once("Using these parameters").unwrap();
            let (n_head, _) = PLATFORM_NEUTRAL_SYSTEM
                .split_once("Using these parameters")
                .unwrap();
            assert_eq!(head, n_head);
            assert!(s.ends_with("Length should be average review length for hotels."));
        }
        assert!(bundle(Scenario::Critical).user_message_template.is_none());
    }

    #[test]
    fn user_centric_fill() {
        let mut r = record(1, "u", "h", 5, "2012-07-02");
        r.aspect_ratings.insert("service".into(), 5);
        r.aspect_ratings.insert("cleanliness".into(), 4);
        let msg = fill_user_centric(&r).unwrap();
        assert!(msg.contains("overall rating of 5 out of 5"));
        assert!(msg.contains("criteria: cleanliness: 4, service: 5."));
        assert!(msg.ends_with("Draft: review 1"));
        assert!(!msg.contains('['));
        r.text = None;
        assert!(fill_user_centric(&r).is_none());
    }

    #[test]
    fn platform_message_keys() {
        let mut r = record(1, "u", "h", 5, "2012-07-02");
        r.stay_date = Some(YearMonth {
            year: 2012,
            month: 6,
        });
        r.hotel.class = 4.0;
        let v = platform_user_message(&r);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = PLATFORM_KEYS.to_vec();
        expected.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(v["Date_stayed_in_hotel"], "June 2012");
        assert_eq!(v["Date_review"], "July 2012");
        assert_eq!(v["Class"], 4);
        assert_eq!(v["Score"]["overall"], 5);
        let text = serde_json::to_string(&v).unwrap();
        assert!(serde_json::from_str::<Value>(&text).is_ok());
    }
}
