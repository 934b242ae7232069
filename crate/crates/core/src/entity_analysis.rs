//! Entity-count and relatedness contingency tables for refuted vs supported
//! claims, and Pearson's chi-squared test on 2×2 tables.

use serde::{Deserialize, Serialize};

use crate::claim_gen::EntityLinker;
use crate::claims::{Claim, Label};
use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::scalar::Scalar;

/// Critical values of χ²(1).
pub const CHI2_1_CRITICAL_P01: f64 = 6.635;
pub const CHI2_1_CRITICAL_P10: f64 = 2.706;

/// Rows are condition / not-condition; columns are Refuted / Supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub cells: [[u64; 2]; 2],
}

impl ContingencyTable2x2 {
    pub fn new(cells: [[u64; 2]; 2]) -> Self {
        ContingencyTable2x2 { cells }
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> [u64; 2] {
        [self.cells[0][0] + self.cells[0][1], self.cells[1][0] + self.cells[1][1]]
    }

    pub fn column_totals(&self) -> [u64; 2] {
        [self.cells[0][0] + self.cells[1][0], self.cells[0][1] + self.cells[1][1]]
    }

    fn add(&mut self, row: usize, label: Label) {
        match label {
            Label::Refuted => self.cells[row][0] += 1,
            Label::Supported => self.cells[row][1] += 1,
            Label::NotEnoughInfo => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquared<T> {
    pub statistic: T,
    pub degrees_of_freedom: u32,
    pub yates_corrected: bool,
}

impl<T: Scalar> ChiSquared<T> {
    pub fn significant_at_01(&self) -> bool {
        self.statistic.as_f64() > CHI2_1_CRITICAL_P01
    }

    pub fn significant_at_10(&self) -> bool {
        self.statistic.as_f64() > CHI2_1_CRITICAL_P10
    }
}

/// Pearson's χ² with optional Yates continuity correction.
pub fn chi_squared<T: Scalar>(table: &ContingencyTable2x2, yates: bool) -> Result<ChiSquared<T>> {
    let rows = table.row_totals();
    let cols = table.column_totals();
    if rows.contains(&0) || cols.contains(&0) {
        return Err(Error::DegenerateTable);
    }
    let n = T::of(table.total() as f64);
    let c = if yates { T::of(0.5) } else { T::zero() };
    let mut statistic = T::zero();
    for (i, row) in table.cells.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = T::of(rows[i] as f64) * T::of(cols[j] as f64) / n;
            let deviation = ((T::of(observed as f64) - expected).abs() - c).max(T::zero());
            statistic = statistic + deviation * deviation / expected;
        }
    }
    Ok(ChiSquared {
        statistic,
        degrees_of_freedom: 1,
        yates_corrected: yates,
    })
}

pub fn directly_related(e1: &str, e2: &str, kb: &KnowledgeBase) -> Result<bool> {
    kb.directly_related(e1, e2)
}

/// Rows: ≤1 linked entity, ≥2 linked entities.
pub fn entity_count_table<L: EntityLinker>(claims: &[Claim], linker: &L) -> ContingencyTable2x2 {
    let mut table = ContingencyTable2x2::default();
    for c in claims.iter().filter(|c| c.label.is_verifiable()) {
        let row = usize::from(linker.link(&c.text).len() >= 2);
        table.add(row, c.label);
    }
    table
}

/// Rows: directly related, not directly related. Only claims with two or
/// more mentions count; one related pair is enough.
pub fn relatedness_table<L: EntityLinker>(
    claims: &[Claim],
    kb: &KnowledgeBase,
    linker: &L,
) -> Result<ContingencyTable2x2> {
    let mut table = ContingencyTable2x2::default();
    for c in claims.iter().filter(|c| c.label.is_verifiable()) {
        let mentions = linker.link(&c.text);
        if mentions.len() < 2 {
            continue;
        }
        let mut related = false;
        'pairs: for (i, a) in mentions.iter().enumerate() {
            for b in &mentions[i + 1..] {
                if kb.directly_related(&a.entity_id, &b.entity_id)? {
                    related = true;
                    break 'pairs;
                }
            }
        }
        table.add(usize::from(!related), c.label);
    }
    Ok(table)
}

/// Both tables with corrected and uncorrected statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityAnalysis {
    pub entity_count: TableReport,
    pub relatedness: TableReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: [String; 2],
    pub columns: [String; 2],
    pub table: ContingencyTable2x2,
    /// Absent when a marginal is zero.
    pub chi2_uncorrected: Option<f64>,
    pub chi2_yates: Option<f64>,
    pub significant_p01: Option<bool>,
    pub significant_p10: Option<bool>,
}

impl TableReport {
    pub fn new(rows: [&str; 2], table: ContingencyTable2x2) -> Self {
        let plain = chi_squared::<f64>(&table, false).ok();
        let yates = chi_squared::<f64>(&table, true).ok();
        TableReport {
            rows: rows.map(str::to_string),
            columns: ["REFUTES".into(), "SUPPORTS".into()],
            table,
            chi2_uncorrected: plain.map(|r| r.statistic),
            chi2_yates: yates.map(|r| r.statistic),
            significant_p01: yates.map(|r| r.significant_at_01()),
            significant_p10: yates.map(|r| r.significant_at_10()),
        }
    }
}

pub fn analyze<L: EntityLinker>(claims: &[Claim], kb: &KnowledgeBase, linker: &L) -> Result<EntityAnalysis> {
    Ok(EntityAnalysis {
        entity_count: TableReport::new(["<=1 entity", ">=2 entities"], entity_count_table(claims, linker)),
        relatedness: TableReport::new(
            ["Directly Related", "Not Directly Related"],
            relatedness_table(claims, kb, linker)?,
        ),
    })
}
