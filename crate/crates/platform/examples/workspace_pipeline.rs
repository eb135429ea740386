//! Ingest the example inputs into a scratch workspace, mine, re-ingest.

use rsos::Workspace;
use rsos_core::gim::MinerConfig;
use rsos_core::transactions::Granularity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/example");
    let tmp = tempfile::tempdir()?;
    let ws = Workspace::new(tmp.path());

    println!("{}\n", ws.ingest(&data, Granularity::Month)?);
    let snap = ws.snapshot_mine(&MinerConfig::default())?;
    println!(
        "mined {} frequent itemsets over {:?}",
        snap.frequent.len(),
        snap.periods
    );
    print!("{}", snap.higen_report(true));

    let again = ws.ingest(&data, Granularity::Month)?;
    println!("after re-ingesting the same files the snapshot is {}", again.snapshot);
    let manifest = ws.manifest()?;
    for (file, digest) in &manifest.digests {
        println!("  {file:<32} {}", &digest[..12]);
    }
    Ok(())
}
