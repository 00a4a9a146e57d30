//! CSV and JSON writers for the analysis pipelines.
//!
//! CSV bodies contain only reproducible fields (no wall times or
//! timestamps), use LF line endings, and always start with a header, so two
//! runs with the same seed produce byte-identical files regardless of
//! worker count.

use std::fmt::Write as _;

use super::{BerRecord, RunManifest, SimConfig};
use crate::analysis::{AberEstimate, CapacityRecord, ComplexityReport};

pub const BER_CSV_HEADER: &str =
    "system,selection,detector,M,n_R,n_S,N,snr_db,trials,bit_errors,ber,ci_lo,ci_hi,seed";
pub const ABER_CSV_HEADER: &str =
    "system,selection,detector,M,n_R,n_S,N,snr_db,realizations,aber,seed";
pub const CAPACITY_CSV_HEADER: &str =
    "system,selection,M,n_R,n_S,N,snr_db,realizations,bits_per_use,std_error,seed";
pub const COMPLEXITY_CSV_HEADER: &str = "system,detector,M,n_R,n_S,N,rm";

fn ber_row(out: &mut String, cfg: &SimConfig, r: &BerRecord) {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        cfg.system,
        cfg.selection,
        cfg.detector,
        cfg.m,
        cfg.n_r,
        cfg.n_s,
        cfg.n_ris,
        r.snr_db,
        r.trials,
        r.bit_errors,
        r.ber,
        r.ci_lo,
        r.ci_hi,
        cfg.seed
    )
    .expect("string write");
}

/// CSV for any number of sweeps, one row per (run, grid point).
pub fn ber_csv<'a>(manifests: impl IntoIterator<Item = &'a RunManifest>) -> String {
    let mut out = String::from(BER_CSV_HEADER);
    out.push('\n');
    for m in manifests {
        for r in &m.records {
            ber_row(&mut out, &m.config, r);
        }
    }
    out
}

pub fn aber_csv(cfg: &SimConfig, estimates: &[AberEstimate]) -> String {
    let mut out = String::from(ABER_CSV_HEADER);
    out.push('\n');
    for e in estimates {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cfg.system,
            cfg.selection,
            cfg.detector,
            cfg.m,
            cfg.n_r,
            cfg.n_s,
            cfg.n_ris,
            e.snr_db,
            e.channel_realizations,
            e.value,
            cfg.seed
        )
        .expect("string write");
    }
    out
}

pub fn capacity_csv(cfg: &SimConfig, records: &[CapacityRecord]) -> String {
    let mut out = String::from(CAPACITY_CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            cfg.system,
            cfg.selection,
            cfg.m,
            cfg.n_r,
            cfg.n_s,
            cfg.n_ris,
            r.snr_db,
            r.realizations,
            r.bits_per_use,
            r.std_error,
            cfg.seed
        )
        .expect("string write");
    }
    out
}

pub fn complexity_csv(reports: &[ComplexityReport]) -> String {
    let mut out = String::from(COMPLEXITY_CSV_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.system,
            r.detector,
            r.params.m,
            r.params.n_r,
            r.params.n_s,
            r.params.n_ris,
            r.rm_count
        )
        .expect("string write");
    }
    out
}

/// Human-readable complexity table for the terminal.
pub fn complexity_text(reports: &[ComplexityReport]) -> String {
    let mut out = String::new();
    writeln!(out, "{:<14} {:<8} {:>16}", "system", "detector", "RMs").expect("string write");
    for r in reports {
        writeln!(
            out,
            "{:<14} {:<8} {:>16}",
            r.system.to_string(),
            r.detector,
            r.rm_count
        )
        .expect("string write");
    }
    out
}

/// Pretty JSON for one or more sweep manifests.
pub fn manifests_json(manifests: &[RunManifest]) -> String {
    if manifests.len() == 1 {
        serde_json::to_string_pretty(&manifests[0]).expect("manifest serialization")
    } else {
        serde_json::to_string_pretty(manifests).expect("manifest serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_headers_are_stable() {
        assert!(BER_CSV_HEADER.starts_with("system,"));
        assert_eq!(BER_CSV_HEADER.split(',').count(), 14);
        assert_eq!(ABER_CSV_HEADER.split(',').count(), 11);
        assert_eq!(CAPACITY_CSV_HEADER.split(',').count(), 11);
    }

    #[test]
    fn ber_rows_follow_the_header() {
        let cfg = SimConfig::ris_rsm(4, 2, 8);
        let manifest = RunManifest {
            config: cfg,
            seed: 0,
            version: "test".into(),
            timestamp: "now".into(),
            records: vec![BerRecord {
                snr_db: -10.0,
                trials: 1000,
                bit_errors: 30,
                ber: 0.01,
                ci_lo: 0.007,
                ci_hi: 0.014,
                wall_time_s: 0.1,
            }],
        };
        let csv = ber_csv([&manifest]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(BER_CSV_HEADER));
        let row = lines.next().unwrap();
        assert_eq!(
            row,
            "ris-rsm,none,ml,4,2,2,8,-10,1000,30,0.01,0.007,0.014,0"
        );
        assert_eq!(lines.next(), None);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }
}
