use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_TIMEOUT_SECS: u64 = 120;

#[derive(Debug, Clone)]
pub struct Config {
    pub addr: SocketAddr,
    /// Solves allowed to run at once; further requests wait.
    pub max_concurrency: usize,
    pub timeout: Duration,
    /// Directory of `*.json` instances; the embedded samples when unset.
    pub samples_dir: Option<PathBuf>,
    /// Built UI bundle served under `/`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            addr: DEFAULT_ADDR.parse().expect("valid default address"),
            max_concurrency: std::thread::available_parallelism().map_or(1, |n| n.get()),
            timeout: Duration::from_secs(DEFAULT_TIMEOUT_SECS),
            samples_dir: None,
            ui_dir: None,
        }
    }
}

fn parse<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("{name}: cannot parse {value:?}"))
}

impl Config {
    /// Reads `PLANOPT_ADDR`, `PLANOPT_MAX_CONCURRENCY`, `PLANOPT_TIMEOUT_SECS`,
    /// `PLANOPT_SAMPLES_DIR` and `PLANOPT_UI_DIR` through `lookup`.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let mut c = Self::default();
        if let Some(v) = lookup("PLANOPT_ADDR") {
            c.addr = parse("PLANOPT_ADDR", &v)?;
        }
        if let Some(v) = lookup("PLANOPT_MAX_CONCURRENCY") {
            c.max_concurrency = parse("PLANOPT_MAX_CONCURRENCY", &v)?;
            if c.max_concurrency == 0 {
                return Err("PLANOPT_MAX_CONCURRENCY must be at least 1".into());
            }
        }
        if let Some(v) = lookup("PLANOPT_TIMEOUT_SECS") {
            c.timeout = Duration::from_secs_f64(parse::<f64>("PLANOPT_TIMEOUT_SECS", &v).and_then(|s| {
                if s.is_finite() && s >= 0.0 {
                    Ok(s)
                } else {
                    Err(format!("PLANOPT_TIMEOUT_SECS: {s} is not a duration"))
                }
            })?);
        }
        c.samples_dir = lookup("PLANOPT_SAMPLES_DIR").map(PathBuf::from);
        c.ui_dir = lookup("PLANOPT_UI_DIR").map(PathBuf::from);
        Ok(c)
    }

    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok().filter(|v| !v.is_empty()))
    }
}
