//! Time-partitioned transaction logs and taxonomy-aware support counting.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{Item, Itemset, Taxonomy, TaxonomyError};

#[derive(Debug, Error)]
pub enum TransactionError {
    #[error("transaction file is empty")]
    Empty,
    #[error("line 1: header must start with `date`")]
    MissingDateColumn,
    #[error("line 1: missing attribute column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: malformed date `{value}` (expected YYYY-MM-DD)")]
    MalformedDate { line: usize, value: String },
    #[error("line {line}: empty value for `{attribute}`")]
    EmptyValue { line: usize, attribute: String },
    #[error("line {line}: {source}")]
    Csv {
        line: usize,
        #[source]
        source: csv::Error,
    },
    #[error("no transactions between periods `{before}` and `{after}`")]
    MissingPeriod { before: String, after: String },
    #[error("line {line}: {source}")]
    Domain {
        line: usize,
        #[source]
        source: TaxonomyError,
    },
    #[error("unknown granularity `{0}` (expected day, month or year)")]
    UnknownGranularity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    #[default]
    Month,
    Year,
}

impl Granularity {
    /// Period label for a date: `YYYY-MM-DD`, `YYYY-MM` or `YYYY`.
    pub fn period_key(self, date: NaiveDate) -> String {
        match self {
            Granularity::Day => date.format("%Y-%m-%d").to_string(),
            Granularity::Month => format!("{:04}-{:02}", date.year(), date.month()),
            Granularity::Year => format!("{:04}", date.year()),
        }
    }

    fn period_start(self, date: NaiveDate) -> NaiveDate {
        match self {
            Granularity::Day => date,
            Granularity::Month => date.with_day(1).expect("day 1 exists"),
            Granularity::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1).expect("jan 1 exists"),
        }
    }

    fn next_start(self, start: NaiveDate) -> NaiveDate {
        match self {
            Granularity::Day => start.succ_opt().expect("date in range"),
            Granularity::Month => start.checked_add_months(chrono::Months::new(1)).expect("date in range"),
            Granularity::Year => start
                .checked_add_months(chrono::Months::new(12))
                .expect("date in range"),
        }
    }
}

impl FromStr for Granularity {
    type Err = TransactionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "day" => Ok(Granularity::Day),
            "month" => Ok(Granularity::Month),
            "year" => Ok(Granularity::Year),
            _ => Err(TransactionError::UnknownGranularity(s.to_string())),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Day => "day",
            Granularity::Month => "month",
            Granularity::Year => "year",
        })
    }
}

/// One purchase: a date plus one leaf item per schema attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub date: NaiveDate,
    pub items: Itemset,
    /// 1-based line in the source file, 0 when built in memory.
    pub line: usize,
}

impl Transaction {
    pub fn new(date: NaiveDate, items: Itemset) -> Self {
        Transaction { date, items, line: 0 }
    }

    /// True when every item of `itemset` is matched by a descendant-or-self
    /// leaf of this transaction.
    pub fn matches(&self, itemset: &Itemset, tax: &Taxonomy) -> bool {
        itemset.items().iter().all(|g| {
            self.items
                .get(&g.attribute)
                .is_some_and(|leaf| tax.is_descendant_or_self(leaf, g).unwrap_or(false))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimePeriodDataset {
    pub period_id: String,
    pub transactions: Vec<Transaction>,
}

impl TimePeriodDataset {
    pub fn new(period_id: impl Into<String>, transactions: Vec<Transaction>) -> Self {
        TimePeriodDataset {
            period_id: period_id.into(),
            transactions,
        }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Absolute support by a full scan.
    pub fn support(&self, itemset: &Itemset, tax: &Taxonomy) -> usize {
        self.transactions.iter().filter(|t| t.matches(itemset, tax)).count()
    }
}

/// Absolute support: transactions matching every item, taxonomy-aware.
pub fn support(itemset: &Itemset, dataset: &TimePeriodDataset, tax: &Taxonomy) -> usize {
    dataset.support(itemset, tax)
}

pub fn is_frequent(itemset: &Itemset, dataset: &TimePeriodDataset, tax: &Taxonomy, min_sup: usize) -> bool {
    support(itemset, dataset, tax) >= min_sup
}

/// Consecutive periods in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodSequence {
    pub granularity: Granularity,
    pub schema: Vec<String>,
    pub periods: Vec<TimePeriodDataset>,
}

impl PeriodSequence {
    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn latest(&self) -> Option<&TimePeriodDataset> {
        self.periods.last()
    }

    pub fn transaction_count(&self) -> usize {
        self.periods.iter().map(TimePeriodDataset::len).sum()
    }

    pub fn transactions(&self) -> impl Iterator<Item = &Transaction> {
        self.periods.iter().flat_map(|p| p.transactions.iter())
    }

    /// Registers every observed value as a leaf of its attribute. Values of
    /// attributes that carry a hierarchy must already be leaves of it.
    pub fn register_domain(&self, tax: &mut Taxonomy) -> Result<(), TransactionError> {
        for t in self.transactions() {
            for item in t.items.items() {
                tax.register_leaf(&item.attribute, &item.value)
                    .map_err(|source| TransactionError::Domain { line: t.line, source })?;
            }
        }
        Ok(())
    }
}

/// Parses a transaction CSV (`date,<attr1>,<attr2>,...`) and groups rows by
/// period. An empty `schema` takes every non-date column.
pub fn load_periods(
    source: &str,
    schema: &[String],
    granularity: Granularity,
) -> Result<PeriodSequence, TransactionError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source.as_bytes());
    let headers = reader
        .headers()
        .map_err(|source| TransactionError::Csv { line: 1, source })?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(TransactionError::Empty);
    }
    if &headers[0] != "date" {
        return Err(TransactionError::MissingDateColumn);
    }

    let schema: Vec<String> = if schema.is_empty() {
        headers.iter().skip(1).map(str::to_string).collect()
    } else {
        schema.to_vec()
    };
    let mut columns = Vec::with_capacity(schema.len());
    for attribute in &schema {
        let idx = headers
            .iter()
            .position(|h| h == attribute)
            .ok_or_else(|| TransactionError::MissingColumn(attribute.clone()))?;
        columns.push((attribute.clone(), idx));
    }

    let mut grouped: BTreeMap<NaiveDate, (String, Vec<Transaction>)> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|source| TransactionError::Csv {
            line: source.position().map_or(0, |p| p.line() as usize),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let raw_date = record.get(0).unwrap_or_default();
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| TransactionError::MalformedDate {
            line,
            value: raw_date.to_string(),
        })?;
        let mut items = Vec::with_capacity(columns.len());
        for (attribute, idx) in &columns {
            let value = record.get(*idx).unwrap_or_default();
            if value.is_empty() {
                return Err(TransactionError::EmptyValue {
                    line,
                    attribute: attribute.clone(),
                });
            }
            items.push(Item::leaf(attribute.clone(), value));
        }
        let items = Itemset::new(items).expect("schema attributes are distinct");
        let start = granularity.period_start(date);
        grouped
            .entry(start)
            .or_insert_with(|| (granularity.period_key(date), Vec::new()))
            .1
            .push(Transaction { date, items, line });
    }
    if grouped.is_empty() {
        return Err(TransactionError::Empty);
    }

    let starts: Vec<NaiveDate> = grouped.keys().copied().collect();
    for pair in starts.windows(2) {
        if granularity.next_start(pair[0]) != pair[1] {
            return Err(TransactionError::MissingPeriod {
                before: granularity.period_key(pair[0]),
                after: granularity.period_key(pair[1]),
            });
        }
    }

    let periods = grouped
        .into_values()
        .map(|(period_id, transactions)| TimePeriodDataset {
            period_id,
            transactions,
        })
        .collect();
    Ok(PeriodSequence {
        granularity,
        schema,
        periods,
    })
}

/// Vertical tid-bitset index over one period: each taxonomy node maps to
/// the set of transactions containing it or one of its descendants.
/// Support of an itemset is the popcount of the AND of its items' bitsets.
#[derive(Debug, Clone)]
pub struct SupportIndex {
    len: usize,
    tidsets: HashMap<Item, Vec<u64>>,
}

impl SupportIndex {
    pub fn build(dataset: &TimePeriodDataset, tax: &Taxonomy) -> Self {
        let len = dataset.len();
        let words = len.div_ceil(64).max(1);
        let mut tidsets: HashMap<Item, Vec<u64>> = HashMap::new();
        for (tid, t) in dataset.transactions.iter().enumerate() {
            for leaf in t.items.items() {
                let ancestors = tax.ancestors(leaf).unwrap_or_default();
                for node in std::iter::once(leaf.clone()).chain(ancestors) {
                    let bits = tidsets.entry(node).or_insert_with(|| vec![0; words]);
                    bits[tid / 64] |= 1 << (tid % 64);
                }
            }
        }
        // Flag values come from the taxonomy so lookups by `tax.item` hit.
        let tidsets = tidsets
            .into_iter()
            .map(|(mut item, bits)| {
                if let Ok(known) = tax.item(&item.attribute, &item.value) {
                    item.is_generalized = known.is_generalized;
                }
                (item, bits)
            })
            .collect();
        SupportIndex { len, tidsets }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn support(&self, itemset: &Itemset) -> usize {
        let mut acc: Option<Vec<u64>> = None;
        for item in itemset.items() {
            let Some(bits) = self.tidsets.get(item) else {
                return 0;
            };
            match acc.as_mut() {
                None => acc = Some(bits.clone()),
                Some(acc) => acc.iter_mut().zip(bits).for_each(|(a, b)| *a &= b),
            }
        }
        match acc {
            None => self.len,
            Some(bits) => bits.iter().map(|w| w.count_ones() as usize).sum(),
        }
    }

    /// Items present (directly or through a descendant) in some transaction.
    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.tidsets.keys()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOG: &str = "date,Profession,Budget,Outfit\n\
        2012-10-01,Engineer,2500,T-shirt\n\
        2012-10-06,Businessman,2800,T-shirt\n\
        2012-10-08,Teacher,5800,Jacket\n\
        2012-10-20,Teacher,5800,Jacket\n\
        2012-10-23,Doctor,5200,Jacket\n\
        2012-11-03,Engineer,2500,T-shirt\n\
        2012-11-09,Engineer,2500,T-shirt\n\
        2012-11-15,Teacher,5800,Jacket\n\
        2012-11-28,Doctor,5200,Jacket\n\
        2012-11-29,Businessman,2800,Jacket\n";

    const TAX: &str = "attribute,child,parent\n\
        Budget,2500,Medium\nBudget,2800,Medium\nBudget,5200,High\nBudget,5800,High\n";

    fn fixture() -> (PeriodSequence, Taxonomy) {
        let periods = load_periods(LOG, &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::parse(TAX, Some(&periods.schema)).unwrap();
        periods.register_domain(&mut tax).unwrap();
        (periods, tax)
    }

    fn items(tax: &Taxonomy, spec: &[(&str, &str)]) -> Itemset {
        Itemset::new(spec.iter().map(|(a, v)| tax.item(a, v).unwrap())).unwrap()
    }

    #[test]
    fn groups_by_month() {
        let (periods, _) = fixture();
        assert_eq!(periods.len(), 2);
        assert_eq!(periods.periods[0].period_id, "2012-10");
        assert_eq!(periods.periods[1].period_id, "2012-11");
        assert_eq!(periods.periods[0].len(), 5);
        assert_eq!(periods.periods[1].len(), 5);
        assert_eq!(periods.schema, ["Profession", "Budget", "Outfit"]);
        // input order kept inside a period
        assert_eq!(periods.periods[0].transactions[2].line, 4);
    }

    #[test]
    fn single_row_and_three_months() {
        let one = load_periods("date,Outfit\n2013-01-05,Jacket\n", &[], Granularity::Month).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.periods[0].len(), 1);

        let three = load_periods(
            "date,Outfit\n2013-03-02,Jacket\n2013-01-05,Jacket\n2013-02-07,T-shirt\n",
            &[],
            Granularity::Month,
        )
        .unwrap();
        let ids: Vec<_> = three.periods.iter().map(|p| p.period_id.as_str()).collect();
        assert_eq!(ids, ["2013-01", "2013-02", "2013-03"]);
    }

    #[test]
    fn year_and_day_keys() {
        let d = NaiveDate::from_ymd_opt(2012, 10, 1).unwrap();
        assert_eq!(Granularity::Year.period_key(d), "2012");
        assert_eq!(Granularity::Day.period_key(d), "2012-10-01");
        assert_eq!("MONTH".parse::<Granularity>().unwrap(), Granularity::Month);
        assert!("week".parse::<Granularity>().is_err());
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_periods("", &[], Granularity::Month),
            Err(TransactionError::Empty)
        ));
        assert!(matches!(
            load_periods("date,Outfit\n", &[], Granularity::Month),
            Err(TransactionError::Empty)
        ));
        assert!(matches!(
            load_periods("date,Outfit\n2012-13-01,Jacket\n", &[], Granularity::Month),
            Err(TransactionError::MalformedDate { line: 2, .. })
        ));
        assert!(matches!(
            load_periods("date,Outfit\n2012-10-01,Jacket\n", &["Budget".into()], Granularity::Month),
            Err(TransactionError::MissingColumn(c)) if c == "Budget"
        ));
        assert!(matches!(
            load_periods(
                "date,Outfit\n2012-10-01,Jacket\n2012-12-01,Jacket\n",
                &[],
                Granularity::Month
            ),
            Err(TransactionError::MissingPeriod { .. })
        ));
    }

    #[test]
    fn unknown_budget_value_is_rejected() {
        let periods = load_periods("date,Budget\n2012-10-01,3100\n", &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::parse(TAX, Some(&periods.schema)).unwrap();
        assert!(matches!(
            periods.register_domain(&mut tax),
            Err(TransactionError::Domain { line: 2, .. })
        ));
    }

    #[test]
    fn supports_from_the_sales_tables() {
        let (periods, tax) = fixture();
        let (d1, d2) = (&periods.periods[0], &periods.periods[1]);
        type Case<'a> = (&'a [(&'a str, &'a str)], usize, usize);
        let cases: &[Case] = &[
            (&[("Budget", "Medium")], 2, 3),
            (&[("Budget", "High")], 3, 2),
            (&[("Outfit", "T-shirt"), ("Budget", "Medium")], 2, 2),
            (&[("Outfit", "Jacket"), ("Budget", "High")], 3, 2),
            (&[("Budget", "2500")], 1, 2),
            (&[("Outfit", "Jacket"), ("Budget", "5800")], 2, 1),
            (&[], 5, 5),
        ];
        for (spec, s1, s2) in cases {
            let set = items(&tax, spec);
            assert_eq!(support(&set, d1, &tax), *s1, "{set} on D1");
            assert_eq!(support(&set, d2, &tax), *s2, "{set} on D2");
            assert_eq!(SupportIndex::build(d1, &tax).support(&set), *s1);
            assert_eq!(SupportIndex::build(d2, &tax).support(&set), *s2);
        }
    }

    #[test]
    fn frequency_threshold() {
        let (periods, tax) = fixture();
        let s5800 = items(&tax, &[("Budget", "5800")]);
        assert!(is_frequent(&s5800, &periods.periods[0], &tax, 2));
        assert!(!is_frequent(&s5800, &periods.periods[1], &tax, 2));
        assert!(is_frequent(&s5800, &periods.periods[1], &tax, 1));
    }

    #[test]
    fn index_handles_more_than_64_transactions() {
        let mut csv = String::from("date,Outfit\n");
        for i in 0..130 {
            let v = if i % 3 == 0 { "Jacket" } else { "T-shirt" };
            csv.push_str(&format!("2012-10-{:02},{v}\n", i % 28 + 1));
        }
        let periods = load_periods(&csv, &[], Granularity::Month).unwrap();
        let mut tax = Taxonomy::default();
        periods.register_domain(&mut tax).unwrap();
        let index = SupportIndex::build(&periods.periods[0], &tax);
        let jacket = items(&tax, &[("Outfit", "Jacket")]);
        assert_eq!(index.support(&jacket), 44);
        assert_eq!(index.support(&Itemset::empty()), 130);
    }
}
