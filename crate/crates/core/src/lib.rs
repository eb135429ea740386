//! Outfit recommendation from purchase history and body measurements.
//!
//! The crate has three halves:
//!
//! - mining: [`taxonomy`], [`transactions`], [`gim`] and [`higen`] find
//!   frequent generalized itemsets per period and track how they climb or
//!   descend the taxonomy from one period to the next;
//! - [`vision`]: integral images, Haar features, a sliding-window cascade
//!   detector and silhouette-based measurement estimation;
//! - [`recommender`]: size matching against sizing tables, pattern scoring
//!   and catalog ranking.

pub mod gim;
pub mod higen;
pub mod recommender;
pub mod taxonomy;
pub mod transactions;
pub mod vision;

pub use gim::{mine_frequent, FrequentItemset, MinerConfig, MiningMode};
pub use higen::{extract_higens, render_higen, Higen, HigenNode, Relation, RenderOptions};
pub use taxonomy::{load_taxonomy, DisplayOrder, Item, Itemset, Taxonomy};
pub use transactions::{load_periods, support, Granularity, PeriodSequence, TimePeriodDataset};
