//! Published user counts for the 1885-respondent survey file, used by
//! `ingest --expect-table1`.

use gasvm_core::data::{Drug, UserCount};

/// Drug, users, percent (two decimals).
pub const EXPECTED: [(Drug, usize, f64); 18] = [
    (Drug::Alcohol, 1817, 96.39),
    (Drug::Amphetamines, 679, 36.02),
    (Drug::AmylNitrite, 370, 19.63),
    (Drug::Benzodiazepines, 769, 40.80),
    (Drug::Cannabis, 1265, 67.11),
    (Drug::Chocolate, 1850, 98.14),
    (Drug::Cocaine, 687, 36.45),
    (Drug::Caffeine, 1848, 98.04),
    (Drug::Crack, 191, 10.13),
    (Drug::Ecstasy, 751, 39.84),
    (Drug::Heroin, 212, 11.25),
    (Drug::Ketamine, 350, 18.57),
    (Drug::LegalHighs, 762, 40.42),
    (Drug::Lsd, 557, 29.55),
    (Drug::Methadone, 417, 22.12),
    (Drug::Mushrooms, 694, 36.82),
    (Drug::Nicotine, 1264, 67.06),
    (Drug::Vsa, 230, 12.20),
];

pub const EXPECTED_TOTAL: usize = 1885;

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub drug: Drug,
    pub expected: (usize, f64),
    pub found: (usize, f64),
}

/// Percent rounded half away from zero to two decimals, as printed.
pub fn round_percent(p: f64) -> f64 {
    (p * 100.0).round() / 100.0
}

/// Rows that disagree with the published counts. A wrong total shows up as
/// percentage mismatches.
pub fn compare(counts: &[UserCount]) -> Vec<Mismatch> {
    EXPECTED
        .iter()
        .filter_map(|&(drug, users, percent)| {
            let found = counts
                .iter()
                .find(|c| c.drug == drug)
                .map(|c| (c.users, round_percent(c.percent())))
                .unwrap_or((0, 0.0));
            (found.0 != users || found.1 != percent).then_some(Mismatch {
                drug,
                expected: (users, percent),
                found,
            })
        })
        .collect()
}
