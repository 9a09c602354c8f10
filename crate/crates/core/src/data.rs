//! Drug-consumption survey records and predictor matrices.
//!
//! Each respondent carries 12 pre-quantified psycho-social reals and 19
//! ordinal usage classes `CL0..CL6`. Usage is binarized with the decade rule:
//! `CL0` (never used) and `CL1` (used over a decade ago) are non-users, every
//! later class is a user.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Matrix, Result};

pub const PSYCHOSOCIAL_COUNT: usize = 12;
pub const DRUG_COUNT: usize = 19;

/// The 19 substances of the survey, in data-file column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Drug {
    Alcohol,
    Amphetamines,
    AmylNitrite,
    Benzodiazepines,
    Caffeine,
    Cannabis,
    Chocolate,
    Cocaine,
    Crack,
    Ecstasy,
    Heroin,
    Ketamine,
    LegalHighs,
    Lsd,
    Methadone,
    Mushrooms,
    Nicotine,
    /// Fictitious control substance used to detect over-claiming.
    Semer,
    Vsa,
}

impl Drug {
    /// Data-file column order.
    pub const ALL: [Drug; DRUG_COUNT] = [
        Drug::Alcohol,
        Drug::Amphetamines,
        Drug::AmylNitrite,
        Drug::Benzodiazepines,
        Drug::Caffeine,
        Drug::Cannabis,
        Drug::Chocolate,
        Drug::Cocaine,
        Drug::Crack,
        Drug::Ecstasy,
        Drug::Heroin,
        Drug::Ketamine,
        Drug::LegalHighs,
        Drug::Lsd,
        Drug::Methadone,
        Drug::Mushrooms,
        Drug::Nicotine,
        Drug::Semer,
        Drug::Vsa,
    ];

    /// Reporting order used by the user-count table and the predictor
    /// layout. Semer is last; it has no user-count row.
    pub const REPORT_ORDER: [Drug; DRUG_COUNT] = [
        Drug::Alcohol,
        Drug::Amphetamines,
        Drug::AmylNitrite,
        Drug::Benzodiazepines,
        Drug::Cannabis,
        Drug::Chocolate,
        Drug::Cocaine,
        Drug::Caffeine,
        Drug::Crack,
        Drug::Ecstasy,
        Drug::Heroin,
        Drug::Ketamine,
        Drug::LegalHighs,
        Drug::Lsd,
        Drug::Methadone,
        Drug::Mushrooms,
        Drug::Nicotine,
        Drug::Vsa,
        Drug::Semer,
    ];

    /// Column index in the data file's drug block.
    pub fn file_index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Drug::Alcohol => "Alcohol",
            Drug::Amphetamines => "Amphetamines",
            Drug::AmylNitrite => "Amyl Nitrite",
            Drug::Benzodiazepines => "Benzodiazepines",
            Drug::Caffeine => "Caffeine",
            Drug::Cannabis => "Cannabis",
            Drug::Chocolate => "Chocolate",
            Drug::Cocaine => "Cocaine",
            Drug::Crack => "Crack",
            Drug::Ecstasy => "Ecstasy",
            Drug::Heroin => "Heroin",
            Drug::Ketamine => "Ketamine",
            Drug::LegalHighs => "Legal Highs",
            Drug::Lsd => "LSD",
            Drug::Methadone => "Methadone",
            Drug::Mushrooms => "Mushrooms",
            Drug::Nicotine => "Nicotine",
            Drug::Semer => "Semer",
            Drug::Vsa => "VSA",
        }
    }

    /// Lower-case identifier accepted by [`FromStr`] and used in configs.
    pub fn ident(self) -> &'static str {
        match self {
            Drug::Alcohol => "alcohol",
            Drug::Amphetamines => "amphetamines",
            Drug::AmylNitrite => "amyl_nitrite",
            Drug::Benzodiazepines => "benzodiazepines",
            Drug::Caffeine => "caffeine",
            Drug::Cannabis => "cannabis",
            Drug::Chocolate => "chocolate",
            Drug::Cocaine => "cocaine",
            Drug::Crack => "crack",
            Drug::Ecstasy => "ecstasy",
            Drug::Heroin => "heroin",
            Drug::Ketamine => "ketamine",
            Drug::LegalHighs => "legal_highs",
            Drug::Lsd => "lsd",
            Drug::Methadone => "methadone",
            Drug::Mushrooms => "mushrooms",
            Drug::Nicotine => "nicotine",
            Drug::Semer => "semer",
            Drug::Vsa => "vsa",
        }
    }
}

impl fmt::Display for Drug {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Drug {
    type Err = Error;

    /// Accepts identifiers, display names and the short column names of the
    /// original data dictionary (`coke`, `meth`, `legalh`, ...), ignoring case.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        let drug = match key.as_str() {
            "alcohol" => Drug::Alcohol,
            "amphetamines" | "amphet" | "amphetamine" => Drug::Amphetamines,
            "amylnitrite" | "amyl" => Drug::AmylNitrite,
            "benzodiazepines" | "benzos" | "benzo" | "benzodiazepine" => Drug::Benzodiazepines,
            "caffeine" | "caff" => Drug::Caffeine,
            "cannabis" => Drug::Cannabis,
            "chocolate" | "choc" => Drug::Chocolate,
            "cocaine" | "coke" => Drug::Cocaine,
            "crack" => Drug::Crack,
            "ecstasy" => Drug::Ecstasy,
            "heroin" => Drug::Heroin,
            "ketamine" => Drug::Ketamine,
            "legalhighs" | "legalh" => Drug::LegalHighs,
            "lsd" => Drug::Lsd,
            "methadone" | "meth" => Drug::Methadone,
            "mushrooms" | "mmushrooms" | "magicmushrooms" => Drug::Mushrooms,
            "nicotine" => Drug::Nicotine,
            "semer" | "semeron" => Drug::Semer,
            "vsa" => Drug::Vsa,
            _ => return Err(Error::UnknownDrug(s.to_string())),
        };
        Ok(drug)
    }
}

/// Psycho-social attributes, in data-file column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attribute {
    Age,
    Gender,
    Education,
    Country,
    Ethnicity,
    Neuroticism,
    Extraversion,
    Openness,
    Agreeableness,
    Conscientiousness,
    Impulsivity,
    SensationSeeking,
}

impl Attribute {
    pub const ALL: [Attribute; PSYCHOSOCIAL_COUNT] = [
        Attribute::Age,
        Attribute::Gender,
        Attribute::Education,
        Attribute::Country,
        Attribute::Ethnicity,
        Attribute::Neuroticism,
        Attribute::Extraversion,
        Attribute::Openness,
        Attribute::Agreeableness,
        Attribute::Conscientiousness,
        Attribute::Impulsivity,
        Attribute::SensationSeeking,
    ];

    /// Predictor layout order (demographics, then personality scores).
    pub const REPORT_ORDER: [Attribute; PSYCHOSOCIAL_COUNT] = [
        Attribute::Age,
        Attribute::Gender,
        Attribute::Education,
        Attribute::Country,
        Attribute::Ethnicity,
        Attribute::Agreeableness,
        Attribute::Neuroticism,
        Attribute::Extraversion,
        Attribute::Openness,
        Attribute::Conscientiousness,
        Attribute::Impulsivity,
        Attribute::SensationSeeking,
    ];

    pub fn file_index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Age => "Age",
            Attribute::Gender => "Gender",
            Attribute::Education => "Education",
            Attribute::Country => "Country",
            Attribute::Ethnicity => "Ethnicity",
            Attribute::Neuroticism => "Neuroticism",
            Attribute::Extraversion => "Extraversion",
            Attribute::Openness => "Openness",
            Attribute::Agreeableness => "Agreeableness",
            Attribute::Conscientiousness => "Conscientiousness",
            Attribute::Impulsivity => "Impulsivity",
            Attribute::SensationSeeking => "Sensation Seeking",
        }
    }
}

/// Ordinal usage class `CL0..CL6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UsageClass(u8);

impl UsageClass {
    pub const NEVER_USED: UsageClass = UsageClass(0);

    pub fn new(level: u8) -> Option<Self> {
        (level <= 6).then_some(UsageClass(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }

    /// Decade-based binarization: `CL2` and above is a user.
    pub fn binarize(self) -> UserFlag {
        binarize_usage(self)
    }
}

impl FromStr for UsageClass {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        let s = s.trim();
        let digits = s.strip_prefix("CL").ok_or(())?;
        if digits.len() != 1 {
            return Err(());
        }
        let level = digits.parse::<u8>().map_err(|_| ())?;
        UsageClass::new(level).ok_or(())
    }
}

impl fmt::Display for UsageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CL{}", self.0)
    }
}

/// Binary class label. `User` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum UserFlag {
    NonUser,
    User,
}

impl UserFlag {
    #[inline]
    pub fn is_user(self) -> bool {
        matches!(self, UserFlag::User)
    }

    /// `+1` for users, `-1` for non-users.
    #[inline]
    pub fn sign(self) -> f64 {
        if self.is_user() {
            1.0
        } else {
            -1.0
        }
    }
}

impl From<bool> for UserFlag {
    fn from(user: bool) -> Self {
        if user {
            UserFlag::User
        } else {
            UserFlag::NonUser
        }
    }
}

pub fn binarize_usage(class: UsageClass) -> UserFlag {
    UserFlag::from(class.level() >= 2)
}

/// One survey respondent.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: u32,
    /// File column order, see [`Attribute::ALL`].
    pub psychosocial: [f64; PSYCHOSOCIAL_COUNT],
    /// File column order, see [`Drug::ALL`].
    pub drugs: [UsageClass; DRUG_COUNT],
}

impl Record {
    pub fn usage(&self, drug: Drug) -> UsageClass {
        self.drugs[drug.file_index()]
    }

    pub fn attribute(&self, attr: Attribute) -> f64 {
        self.psychosocial[attr.file_index()]
    }
}

/// Number and share of users of one drug.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserCount {
    pub drug: Drug,
    pub users: usize,
    pub total: usize,
}

impl UserCount {
    /// Percentage of users in `[0, 100]`; zero for an empty table.
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.users as f64 / self.total as f64
        }
    }
}

/// Users per drug under the decade rule, for the 18 real substances in
/// reporting order (Semer excluded).
pub fn user_counts(records: &[Record]) -> Vec<UserCount> {
    Drug::REPORT_ORDER
        .iter()
        .filter(|&&d| d != Drug::Semer)
        .map(|&drug| UserCount {
            drug,
            users: records.iter().filter(|r| r.usage(drug).binarize().is_user()).count(),
            total: records.len(),
        })
        .collect()
}

/// How predictor drug columns are encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DrugEncoding {
    /// Decade-based 0/1 user indicator.
    #[default]
    Binary,
    /// Raw class level 0..6.
    Ordinal,
}

/// Design matrix for one target drug.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub x: Matrix,
    pub y: Vec<UserFlag>,
    pub target: Drug,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, x: Matrix, y: Vec<UserFlag>, target: Drug) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.rows(),
                right: y.len(),
            });
        }
        if x.cols() != feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                found: x.cols(),
            });
        }
        Ok(Self {
            feature_names,
            x,
            y,
            target,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|f| f.is_user()).count()
    }
}

/// Predictor columns for `target`: the 18 other drugs in reporting order
/// followed by the 12 psycho-social attributes.
pub fn feature_layout(target: Drug) -> (Vec<Drug>, [Attribute; PSYCHOSOCIAL_COUNT]) {
    let drugs = Drug::REPORT_ORDER.iter().copied().filter(|&d| d != target).collect();
    (drugs, Attribute::REPORT_ORDER)
}

/// Column names of [`feature_layout`].
pub fn feature_names(target: Drug) -> Vec<String> {
    let (drugs, attrs) = feature_layout(target);
    drugs
        .iter()
        .map(|d| d.name().to_string())
        .chain(attrs.iter().map(|a| a.name().to_string()))
        .collect()
}

pub fn build_matrix(records: &[Record], target: Drug, encoding: DrugEncoding) -> Dataset {
    let (drugs, attrs) = feature_layout(target);
    let feature_names = feature_names(target);
    let cols = feature_names.len();

    let mut data = Vec::with_capacity(records.len() * cols);
    let mut y = Vec::with_capacity(records.len());
    for r in records {
        for &d in &drugs {
            let class = r.usage(d);
            data.push(match encoding {
                DrugEncoding::Binary => f64::from(u8::from(class.binarize().is_user())),
                DrugEncoding::Ordinal => f64::from(class.level()),
            });
        }
        data.extend(attrs.iter().map(|&a| r.attribute(a)));
        y.push(r.usage(target).binarize());
    }
    Dataset {
        feature_names,
        x: Matrix::new(records.len(), cols, data).expect("row width fixed by layout"),
        y,
        target,
    }
}
