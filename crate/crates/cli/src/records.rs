use std::path::Path;

use spinnet::GaRunRecord;

use crate::error::CliResult;
use crate::output::{render_csv, write_file, Provenance, Table};

pub const AGGREGATE_FILE: &str = "aggregate.csv";

pub fn record_file_name(record: &GaRunRecord) -> String {
    format!(
        "ga_n{}_h{}_seed{}.json",
        record.config.n, record.config.physics.h, record.seed
    )
}

pub fn aggregate_table(records: &[GaRunRecord]) -> Table {
    let mut t = Table::new(&["N", "first_hit_generation", "best_dn", "best_qfi"]);
    for r in records {
        t.push(vec![
            r.config.n.into(),
            r.summary.first_hit_generation.into(),
            r.summary.best_dn.into(),
            r.summary.best_qfi.into(),
        ]);
    }
    t
}

/// One JSON file per run plus `aggregate.csv` in `dir`.
pub fn export_records(records: &[GaRunRecord], dir: &Path) -> CliResult<()> {
    for r in records {
        write_file(&dir.join(record_file_name(r)), &(r.to_json() + "\n"))?;
    }
    let seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
    let prov = Provenance::new("export-records", None, &serde_json::json!({ "seeds": seeds }));
    write_file(&dir.join(AGGREGATE_FILE), &render_csv(&aggregate_table(records), &prov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::csv_body;
    use spinnet::{evolve, GaConfig};

    #[test]
    fn empty_list_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        export_records(&[], dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(AGGREGATE_FILE)).unwrap();
        assert_eq!(csv_body(&text), "N,first_hit_generation,best_dn,best_qfi\n");
    }

    #[test]
    fn single_spin_run() {
        let mut cfg = GaConfig::new(1, 3);
        cfg.population = 4;
        cfg.generations = 2;
        let rec = evolve(&cfg).unwrap();
        assert_eq!(rec.summary.first_hit_generation, 0);
        let dir = tempfile::tempdir().unwrap();
        export_records(std::slice::from_ref(&rec), dir.path()).unwrap();
        assert!(dir.path().join(record_file_name(&rec)).exists());
        let text = std::fs::read_to_string(dir.path().join(AGGREGATE_FILE)).unwrap();
        let body = csv_body(&text);
        let row: Vec<&str> = body.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "1");
        assert_eq!(row[1], "0");
        assert!((row[2].parse::<f64>().unwrap() - 0.05 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unwritable_dir_is_io_error() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let err = export_records(&[], &f.path().join("sub")).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
