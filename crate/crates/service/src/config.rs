use std::net::SocketAddr;

use clap::Parser;
use rws_core::phase2::DEFAULT_MEMORY_THRESHOLD;
use rws_core::ShiftType;

#[derive(Debug, Clone, Parser)]
#[command(name = "rws-service", about = "HTTP/JSON planning service for rotational schedules")]
pub struct Config {
    /// Address to listen on.
    #[arg(long, env = "RWS_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,

    /// Cartesian table size above which a solve needs confirmation, in bytes.
    #[arg(long, env = "RWS_MEMORY_THRESHOLD", default_value_t = DEFAULT_MEMORY_THRESHOLD)]
    pub memory_threshold: u64,

    /// Arrays kept by a FAST generation when the request names no limit.
    #[arg(long, env = "RWS_FAST_LIMIT", default_value_t = 100)]
    pub fast_limit: usize,

    /// Default shift catalog as LABEL@START_HOUR entries.
    #[arg(
        long,
        env = "RWS_SHIFT_CATALOG",
        default_value = "D@6,E@14,N@22",
        value_parser = parse_catalog_entry,
        value_delimiter = ','
    )]
    pub shift_catalog: Vec<(String, f64)>,
}

impl Default for Config {
    fn default() -> Self {
        Config::parse_from(["rws-service"])
    }
}

impl Config {
    /// The first `count` default shift types, each `duration` hours long.
    /// Entries beyond the configured list fall back to the core defaults.
    pub fn catalog(&self, count: usize, duration: f64) -> Vec<ShiftType> {
        let mut catalog = ShiftType::default_catalog(count, duration);
        for (shift, (label, start)) in catalog.iter_mut().zip(&self.shift_catalog) {
            shift.label = label.clone();
            shift.start_hour = *start;
        }
        catalog
    }
}

fn parse_catalog_entry(entry: &str) -> Result<(String, f64), String> {
    let (label, start) = entry
        .split_once('@')
        .ok_or_else(|| format!("expected LABEL@HOUR, got {entry:?}"))?;
    let start: f64 = start.trim().parse().map_err(|e| format!("bad start hour in {entry:?}: {e}"))?;
    if label.trim().is_empty() || !(0.0..24.0).contains(&start) {
        return Err(format!("bad catalog entry {entry:?}"));
    }
    Ok((label.trim().to_owned(), start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_core_catalog() {
        let config = Config::default();
        assert_eq!(config.memory_threshold, 1_000_000_000);
        assert_eq!(config.fast_limit, 100);
        assert_eq!(config.catalog(3, 8.0), ShiftType::default_catalog(3, 8.0));
    }

    #[test]
    fn catalog_flag_overrides_labels() {
        let config = Config::parse_from(["rws-service", "--shift-catalog", "F@7,S@15"]);
        let catalog = config.catalog(3, 8.0);
        assert_eq!(catalog[0], ShiftType::new("F", 7.0, 8.0));
        assert_eq!(catalog[1], ShiftType::new("S", 15.0, 8.0));
        assert_eq!(catalog[2].label, "N");
        assert!(parse_catalog_entry("X").is_err());
        assert!(parse_catalog_entry("X@25").is_err());
    }
}
