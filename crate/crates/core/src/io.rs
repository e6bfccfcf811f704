//! CSV ingestion and output writing.
//!
//! Formats are plain comma-separated text with fixed headers; none of the
//! fields ever contain commas or quotes. Computed outputs are formatted to
//! 6 significant digits so byte-identical golden files are portable;
//! re-emitted input data ([`write_links`]) uses shortest exact f64
//! formatting so a load/write/load round trip is lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::angular::{AngularScan, EmpiricalCdf, ScanMeta};
use crate::error::{Error, Result};
use crate::fit::{FitResult, LinkRecord, Scenario};
use crate::netsim::{PercentileRow, StreetGrid, UeResult};

/// Significant digits used for every computed CSV field.
pub const OUTPUT_SIG_DIGITS: usize = 6;

pub const LINKS_HEADER: &str = "street_id,scenario,distance_m,path_gain_db,corner_distance_m";
pub const SCAN_HEADER: &str = "angle_deg,power_mw";

/// Format with a fixed number of significant digits (`%.*g` style):
/// plain decimal inside a sane exponent range, scientific outside it.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        format!("{:.*e}", sig - 1, x)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    }
}

/// Shorthand for the crate-wide output precision.
pub fn fmt6(x: f64) -> String {
    fmt_sig(x, OUTPUT_SIG_DIGITS)
}

/// Load report for one link CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub path: String,
    pub total_rows: usize,
    pub accepted: usize,
    /// (1-based line number, reason) for every rejected row.
    pub rejected: Vec<(usize, String)>,
    pub per_scenario: BTreeMap<String, usize>,
}

/// Read a link CSV. Malformed rows are rejected with line numbers rather
/// than silently dropped; a missing header or more than 10% rejected rows
/// is a hard error.
pub fn load_links(path: impl AsRef<Path>) -> Result<(Vec<LinkRecord>, DatasetManifest)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == LINKS_HEADER => {}
        other => {
            return Err(Error::data(format!(
                "{}: missing header '{LINKS_HEADER}' (got '{}')",
                path.display(),
                other.map(|(_, h)| h).unwrap_or("")
            )))
        }
    }
    let mut manifest = DatasetManifest {
        path: path.display().to_string(),
        ..DatasetManifest::default()
    };
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        manifest.total_rows += 1;
        match parse_link_row(line) {
            Ok(record) => {
                *manifest
                    .per_scenario
                    .entry(record.scenario.as_str().to_string())
                    .or_insert(0) += 1;
                manifest.accepted += 1;
                records.push(record);
            }
            Err(e) => manifest.rejected.push((lineno, e.to_string())),
        }
    }
    if manifest.rejected.len() * 10 > manifest.total_rows {
        return Err(Error::data(format!(
            "{}: {} of {} rows rejected (over 10%); first: line {}: {}",
            path.display(),
            manifest.rejected.len(),
            manifest.total_rows,
            manifest.rejected[0].0,
            manifest.rejected[0].1
        )));
    }
    Ok((records, manifest))
}

fn parse_link_row(line: &str) -> Result<LinkRecord> {
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != 5 {
        return Err(Error::data(format!(
            "expected 5 fields, got {}",
            parts.len()
        )));
    }
    let street_id = parts[0].trim().to_string();
    if street_id.is_empty() {
        return Err(Error::data("empty street_id"));
    }
    let scenario = Scenario::parse(parts[1].trim())?;
    let distance: f64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::data(format!("bad distance_m '{}'", parts[2])))?;
    let path_gain: f64 = parts[3]
        .trim()
        .parse()
        .map_err(|_| Error::data(format!("bad path_gain_db '{}'", parts[3])))?;
    let corner = parts[4].trim();
    let corner_distance_m = if corner.is_empty() {
        None
    } else {
        Some(
            corner
                .parse()
                .map_err(|_| Error::data(format!("bad corner_distance_m '{corner}'")))?,
        )
    };
    let record = LinkRecord {
        street_id,
        scenario,
        unwrapped_distance_m: distance,
        path_gain_db: path_gain,
        corner_distance_m,
    };
    record.validate()?;
    Ok(record)
}

/// Write records back out in the input schema with exact (shortest
/// round-trip) float formatting.
pub fn write_links(path: impl AsRef<Path>, records: &[LinkRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str(LINKS_HEADER);
    out.push('\n');
    for r in records {
        let corner = r
            .corner_distance_m
            .map(|c| c.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{corner}",
            r.street_id,
            r.scenario.as_str(),
            r.unwrapped_distance_m,
            r.path_gain_db
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Read a scan CSV (`angle_deg,power_mw`). Metadata comes from an optional
/// `<path>.meta` sidecar with `tx_power_dbm`, `tx_gain_dbi`, and
/// `rx_elev_gain_dbi` keys; absent keys default to zero.
pub fn load_scan(path: impl AsRef<Path>) -> Result<AngularScan> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SCAN_HEADER => {}
        other => {
            return Err(Error::data(format!(
                "{}: missing header '{SCAN_HEADER}' (got '{}')",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut angles = Vec::new();
    let mut powers = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::data(format!(
                "{}: line {}: expected 2 fields",
                path.display(),
                i + 2
            )));
        }
        let a: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::data(format!("{}: line {}: bad angle", path.display(), i + 2)))?;
        let p: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::data(format!("{}: line {}: bad power", path.display(), i + 2)))?;
        angles.push(a);
        powers.push(p);
    }
    let meta = load_scan_meta(&format!("{}.meta", path.display()))?;
    AngularScan::new(angles, powers, meta)
}

fn load_scan_meta(path: &str) -> Result<ScanMeta> {
    let mut meta = ScanMeta::default();
    let Ok(text) = std::fs::read_to_string(path) else {
        return Ok(meta);
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::data(format!(
                "{path}: line {}: expected 'key = value'",
                i + 1
            )));
        };
        let value: f64 = v.trim().parse().map_err(|_| {
            Error::data(format!("{path}: line {}: bad number '{}'", i + 1, v.trim()))
        })?;
        match k.trim() {
            "tx_power_dbm" => meta.tx_power_dbm = value,
            "tx_gain_dbi" => meta.tx_gain_dbi = value,
            "rx_elev_gain_dbi" => meta.rx_elev_gain_dbi = value,
            other => return Err(Error::data(format!("{path}: unknown meta key '{other}'"))),
        }
    }
    Ok(meta)
}

pub fn write_scan(path: impl AsRef<Path>, scan: &AngularScan) -> Result<()> {
    let mut out = String::new();
    out.push_str(SCAN_HEADER);
    out.push('\n');
    for (a, p) in scan.angles_deg().iter().zip(scan.power_mw()) {
        let _ = writeln!(out, "{},{}", fmt6(*a), fmt6(*p));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// CDF CSV: `value_db,prob,band_lo,band_hi`.
pub fn write_cdf(path: impl AsRef<Path>, cdf: &EmpiricalCdf) -> Result<()> {
    let mut out = String::from("value_db,prob,band_lo,band_hi\n");
    for i in 0..cdf.values.len() {
        let (lo, hi) = cdf.band(i);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt6(cdf.values[i]),
            fmt6(cdf.probs[i]),
            fmt6(lo),
            fmt6(hi)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Fit report CSV: `param,value,ci90_lo,ci90_hi`, then an `rmse_db` row.
pub fn write_fit_report(path: impl AsRef<Path>, fit: &FitResult) -> Result<()> {
    let mut out = String::from("param,value,ci90_lo,ci90_hi\n");
    for p in &fit.params {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.name,
            fmt6(p.value),
            fmt6(p.value - p.ci90_half),
            fmt6(p.value + p.ci90_half)
        );
    }
    let _ = writeln!(out, "rmse_db,{},,", fmt6(fit.rmse_db));
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_residuals(path: impl AsRef<Path>, residuals: &[f64]) -> Result<()> {
    let mut out = String::from("residual_db\n");
    for r in residuals {
        let _ = writeln!(out, "{}", fmt6(*r));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Coverage map CSV:
/// `x_m,y_m,serving_cell,snr_db,sinr_db,rate_bps,route_class`.
pub fn write_map(path: impl AsRef<Path>, grid: &StreetGrid, results: &[UeResult]) -> Result<()> {
    let mut out = String::from("x_m,y_m,serving_cell,snr_db,sinr_db,rate_bps,route_class\n");
    for r in results {
        let cell = match r.serving_cell {
            Some(i) => {
                let c = &grid.cells[i];
                format!(
                    "{}-{}-{}",
                    fmt6(c.site_x_m),
                    fmt6(c.site_y_m),
                    c.facing.as_str()
                )
            }
            None => "none".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{cell},{},{},{},{}",
            fmt6(r.x_m),
            fmt6(r.y_m),
            fmt6(r.snr_db),
            fmt6(r.sinr_db),
            fmt6(r.rate_bps),
            r.route_class.as_str()
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Percentile report CSV:
/// `percentile,snr_db,sinr_db,rate_bps,snr_sinr_gap_db`.
pub fn write_percentiles(path: impl AsRef<Path>, rows: &[PercentileRow]) -> Result<()> {
    let mut out = String::from("percentile,snr_db,sinr_db,rate_bps,snr_sinr_gap_db\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt6(r.percentile),
            fmt6(r.snr_db),
            fmt6(r.sinr_db),
            fmt6(r.rate_bps),
            fmt6(r.snr_sinr_gap_db)
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Ray-trace sweep CSV: `range_m,path_gain_db,n_rays`.
pub fn write_raytrace(path: impl AsRef<Path>, rows: &[(f64, f64, usize)]) -> Result<()> {
    let mut out = String::from("range_m,path_gain_db,n_rays\n");
    for (range, gain, n) in rows {
        let _ = writeln!(out, "{},{},{n}", fmt6(*range), fmt6(*gain));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_sig_cases() {
        assert_eq!(fmt_sig(-106.2, 6), "-106.200");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(12.5, 6), "12.5000");
        assert_eq!(fmt_sig(3.5e8, 6), "3.50000e8");
        assert_eq!(fmt_sig(0.0000123, 6), "1.23000e-5");
        assert_eq!(fmt_sig(f64::NEG_INFINITY, 6), "-inf");
        assert_eq!(fmt_sig(123456.0, 6), "123456");
        assert_eq!(fmt_sig(1234567.0, 6), "1.23457e6");
    }

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("canyoncov-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn links_round_trip() {
        let path = tmp("links.csv");
        std::fs::write(
            &path,
            "street_id,scenario,distance_m,path_gain_db,corner_distance_m\n\
             w11,roof-edge,120.5,-110.25,\n\
             w11,around-corner,294,-138.2,244\n\
             7av,lamppost,60,-95.1,\n",
        )
        .unwrap();
        let (records, manifest) = load_links(&path).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(manifest.accepted, 3);
        assert_eq!(manifest.rejected.len(), 0);
        assert_eq!(manifest.per_scenario["roof-edge"], 1);

        let out = tmp("links-out.csv");
        write_links(&out, &records).unwrap();
        let (again, m2) = load_links(&out).unwrap();
        assert_eq!(records, again);
        assert_eq!(m2.accepted, 3);
    }

    #[test]
    fn links_rejection_policy() {
        let path = tmp("links-bad.csv");
        // 1 bad row in 12 stays under the 10% hard-fail threshold... it is
        // 8.3%, accepted with a logged rejection.
        let mut text =
            String::from("street_id,scenario,distance_m,path_gain_db,corner_distance_m\n");
        for i in 0..11 {
            text.push_str(&format!("s,roof-edge,{},-100,\n", 20 + i));
        }
        text.push_str("s,roof-edge,0.5,-100,\n");
        std::fs::write(&path, text).unwrap();
        let (records, manifest) = load_links(&path).unwrap();
        assert_eq!(records.len(), 11);
        assert_eq!(manifest.rejected.len(), 1);
        assert_eq!(manifest.rejected[0].0, 13);
        assert_eq!(
            manifest.accepted + manifest.rejected.len(),
            manifest.total_rows
        );

        // Missing corner distance on an around-corner row is rejected with
        // a reason.
        let path2 = tmp("links-bad2.csv");
        std::fs::write(
            &path2,
            "street_id,scenario,distance_m,path_gain_db,corner_distance_m\n\
             s,roof-edge,50,-90,\n\
             s,roof-edge,60,-92,\n\
             s,roof-edge,70,-94,\n\
             s,roof-edge,80,-96,\n\
             s,roof-edge,90,-98,\n\
             s,roof-edge,100,-99,\n\
             s,roof-edge,110,-100,\n\
             s,roof-edge,120,-101,\n\
             s,roof-edge,130,-102,\n\
             s,around-corner,294,-138,\n",
        )
        .unwrap();
        let (recs, manifest) = load_links(&path2).unwrap();
        assert_eq!(recs.len(), 9);
        assert!(manifest.rejected[0].1.contains("corner_distance_m"));

        // Over 10% rejected is a hard error.
        let path3 = tmp("links-bad3.csv");
        std::fs::write(
            &path3,
            "street_id,scenario,distance_m,path_gain_db,corner_distance_m\n\
             s,roof-edge,0.2,-90,\n\
             s,roof-edge,60,-92,\n",
        )
        .unwrap();
        assert!(load_links(&path3).is_err());

        // Missing header is a hard error.
        let path4 = tmp("links-bad4.csv");
        std::fs::write(&path4, "a,b,c\n").unwrap();
        assert!(load_links(&path4).is_err());
    }

    #[test]
    fn scan_with_sidecar_meta() {
        let path = tmp("scan.csv");
        let mut text = String::from("angle_deg,power_mw\n");
        for i in 0..144 {
            text.push_str(&format!("{},{}\n", i as f64 * 2.5, 1.0 + i as f64 * 0.001));
        }
        std::fs::write(&path, &text).unwrap();
        std::fs::write(
            format!("{}.meta", path.display()),
            "tx_power_dbm = 22\ntx_gain_dbi = 2\nrx_elev_gain_dbi = 10\n",
        )
        .unwrap();
        let scan = load_scan(&path).unwrap();
        assert_eq!(scan.power_mw().len(), 144);
        assert_eq!(scan.meta.tx_power_dbm, 22.0);
        assert_eq!(scan.meta.rx_elev_gain_dbi, 10.0);
    }
}
