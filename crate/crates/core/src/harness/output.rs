use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{HarnessError, SimulationConfig, SweepResult};

pub const CSV_HEADER: &str = "snr_db,frames,bit_errors,frame_errors,ber,fer,mean_iters,seconds";

/// Plain decimal with 12 significant digits, never scientific notation.
pub fn format_decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// The CSV text [`write_csv`] writes.
pub fn csv_string(result: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        let row = [
            format_decimal(p.snr_db),
            p.frames.to_string(),
            p.bit_errors.to_string(),
            p.frame_errors.to_string(),
            format_decimal(p.ber),
            format_decimal(p.fer),
            format_decimal(p.mean_iters),
            format_decimal(p.seconds),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<(), HarnessError> {
    fs::write(path, csv_string(result)).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Rows of a CSV written by [`write_csv`], as numbers.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err("unexpected header".into());
    }
    lines
        .map(|l| l.split(',').map(|f| f.parse::<f64>().map_err(|e| format!("'{f}': {e}"))).collect())
        .collect()
}

/// SHA-256 of the JSON form of the configuration.
pub fn config_hash(config: &SimulationConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the resolved configuration, its hash and the seeds next to a
/// result file.
pub fn write_sidecar(config: &SimulationConfig, result: &SweepResult, path: &Path) -> Result<(), HarnessError> {
    let doc = serde_json::json!({
        "config": config,
        "config_hash": result.config_hash,
        "master_seed": result.master_seed,
        "code_seed": config.code.seed,
    });
    let text = serde_json::to_string_pretty(&doc).expect("json");
    fs::write(path, text + "\n").map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::PointResult;

    #[test]
    fn decimals_never_use_exponents() {
        assert_eq!(format_decimal(0.0), "0");
        assert_eq!(format_decimal(1.5), "1.5");
        assert_eq!(format_decimal(-3.0), "-3");
        assert_eq!(format_decimal(1.25e-7), "0.000000125");
        assert_eq!(format_decimal(1.0 / 3.0), "0.333333333333");
        assert!(!format_decimal(1e-12).contains('e'));
    }

    #[test]
    fn csv_round_trip() {
        let p = PointResult { snr_db: 2.5, frames: 100, bit_errors: 7, frame_errors: 3, ber: 7e-5, fer: 0.03, mean_iters: 12.25, seconds: 0.0 };
        let r = SweepResult { config_hash: "x".into(), master_seed: 1, points: vec![p] };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&r, &path).unwrap();
        let rows = parse_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(rows, vec![vec![2.5, 100.0, 7.0, 3.0, 7e-5, 0.03, 12.25, 0.0]]);
        let empty = SweepResult { points: vec![], ..r };
        write_csv(&empty, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let r = SweepResult { config_hash: String::new(), master_seed: 0, points: vec![] };
        let err = write_csv(&r, Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
        assert_eq!(err.exit_code(), 1);
    }
}
