//! Archive fetcher: idempotent HTTPS download of daily station files into a
//! local cache laid out as `<station>/<year>/<file>`. Files land via a
//! temp-write-then-rename so an interrupted download never corrupts the
//! cache, and cached non-empty files are skipped.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ingest::{day_file_name, StationInfo};

pub const ARCHIVE_BASE_URL: &str = "https://gml.noaa.gov/aftp/data/radiation/surfrad";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Outcome of one fetch invocation; failures are per-file, never fatal.
#[derive(Debug, Default)]
pub struct FetchReport {
    pub downloaded: Vec<PathBuf>,
    pub skipped: Vec<PathBuf>,
    /// (url, error message) for every file that could not be retrieved.
    pub failed: Vec<(String, String)>,
}

fn days_in_year(year: i32) -> u32 {
    if chrono::NaiveDate::from_yo_opt(year, 366).is_some() {
        366
    } else {
        365
    }
}

pub fn archive_url(station: &StationInfo, year: i32, jday: u32) -> String {
    format!(
        "{ARCHIVE_BASE_URL}/{}/{}/{}",
        station.archive_dir,
        year,
        day_file_name(station, year, jday)
    )
}

/// Cache path for one daily file.
pub fn cache_path(cache_root: &Path, station: &StationInfo, year: i32, jday: u32) -> PathBuf {
    cache_root
        .join(station.id)
        .join(year.to_string())
        .join(day_file_name(station, year, jday))
}

/// Fetch all daily files for the given stations and years through an
/// injectable transport (`get(url)` returns the body). Already-cached
/// non-empty files are skipped.
pub fn fetch_with<G>(
    get: G,
    stations: &[&StationInfo],
    years: &[i32],
    cache_root: &Path,
) -> Result<FetchReport, FetchError>
where
    G: Fn(&str) -> Result<Vec<u8>, String>,
{
    let mut report = FetchReport::default();
    for station in stations {
        for &year in years {
            let dir = cache_root.join(station.id).join(year.to_string());
            std::fs::create_dir_all(&dir).map_err(|source| FetchError::Io {
                path: dir.clone(),
                source,
            })?;
            for jday in 1..=days_in_year(year) {
                let path = cache_path(cache_root, station, year, jday);
                if path.metadata().map(|m| m.len() > 0).unwrap_or(false) {
                    report.skipped.push(path);
                    continue;
                }
                let url = archive_url(station, year, jday);
                match get(&url) {
                    Ok(body) => {
                        let tmp = path.with_extension("dat.part");
                        std::fs::write(&tmp, &body).map_err(|source| FetchError::Io {
                            path: tmp.clone(),
                            source,
                        })?;
                        std::fs::rename(&tmp, &path).map_err(|source| FetchError::Io {
                            path: path.clone(),
                            source,
                        })?;
                        report.downloaded.push(path);
                    }
                    Err(msg) => report.failed.push((url, msg)),
                }
            }
        }
    }
    Ok(report)
}

/// Fetch over HTTPS from the public archive.
pub fn fetch(
    stations: &[&StationInfo],
    years: &[i32],
    cache_root: &Path,
) -> Result<FetchReport, FetchError> {
    let client = reqwest::blocking::Client::builder()
        .timeout(std::time::Duration::from_secs(60))
        .build()
        .expect("client construction cannot fail with static options");
    fetch_with(
        |url| {
            let resp = client.get(url).send().map_err(|e| e.to_string())?;
            if !resp.status().is_success() {
                return Err(format!("HTTP {}", resp.status()));
            }
            resp.bytes().map(|b| b.to_vec()).map_err(|e| e.to_string())
        },
        stations,
        years,
        cache_root,
    )
}
