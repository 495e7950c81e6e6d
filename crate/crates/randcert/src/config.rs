use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use randcert_core::bounds::BoundModel;
use randcert_core::npa::Level;
use randcert_core::quantum::{max_hardy, MAX_CL};
use randcert_core::WitnessKind;

use crate::error::{CliError, CliResult};

/// Seed used whenever `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RANDCERT_OUT_DIR";

/// Half a unit in the fourth decimal: a 4-decimal value this close to the
/// quantum maximum may be the rounded maximum.
pub const PRINTED_SLACK: f64 = 5e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessArg {
    Chsh,
    Hardy,
    Cl,
}

impl From<WitnessArg> for WitnessKind {
    fn from(w: WitnessArg) -> Self {
        match w {
            WitnessArg::Chsh => WitnessKind::Chsh,
            WitnessArg::Hardy => WitnessKind::Hardy,
            WitnessArg::Cl => WitnessKind::Cl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    L0,
    L1,
    L1ab,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::L0 => Level::L0,
            LevelArg::L1 => Level::L1,
            LevelArg::L1ab => Level::L1ab,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ns,
    QCase1Varying,
    QCase2Fixed,
    QCase2Varying,
    QCase3Fixed,
    QCase3Varying,
    HardyConvex,
    ClConvex,
}

impl From<ModelArg> for BoundModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ns => BoundModel::Ns,
            ModelArg::QCase1Varying => BoundModel::QCase1Varying,
            ModelArg::QCase2Fixed => BoundModel::QCase2Fixed,
            ModelArg::QCase2Varying => BoundModel::QCase2Varying,
            ModelArg::QCase3Fixed => BoundModel::QCase3Fixed,
            ModelArg::QCase3Varying => BoundModel::QCase3Varying,
            ModelArg::HardyConvex => BoundModel::HardyConvex,
            ModelArg::ClConvex => BoundModel::ClConvex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `lo:hi:n`, `n` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, n: usize) -> CliResult<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(CliError::Config(format!("range ends must be finite, got {lo}:{hi}")));
        }
        if lo >= hi {
            return Err(CliError::Config(format!("range needs lo < hi, got {lo}:{hi}")));
        }
        if n < 2 {
            return Err(CliError::Config(format!("range needs at least 2 points, got {n}")));
        }
        Ok(Range { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }

    /// Same spacing with the first point dropped: `n` points in `(lo, hi]`.
    pub fn open_points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / self.n as f64;
        (1..=self.n)
            .map(|i| if i == self.n { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

impl FromStr for Range {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!("expected lo:hi:n, got {s:?}")));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad number {t:?} in range {s:?}")))
        };
        let n = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("bad point count {:?} in range {s:?}", parts[2])))?;
        Range::new(num(parts[0])?, num(parts[1])?, n)
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

/// Largest quantum value of a witness.
pub fn quantum_max(kind: WitnessKind) -> f64 {
    match kind {
        WitnessKind::Chsh => randcert_core::bounds::TSIRELSON,
        WitnessKind::Hardy => max_hardy(),
        WitnessKind::Cl => MAX_CL,
    }
}

/// A value above the quantum maximum by less than a rounding unit becomes the
/// maximum; other values pass through.
pub fn snap_overshoot(kind: WitnessKind, v: f64) -> f64 {
    let m = quantum_max(kind);
    if v > m && v - m <= PRINTED_SLACK {
        m
    } else {
        v
    }
}

/// Reads a 4-decimal reference value that is the rounded quantum maximum as
/// the maximum itself.
pub fn resolve_printed(kind: WitnessKind, v: f64) -> f64 {
    let m = quantum_max(kind);
    if (v - m).abs() <= PRINTED_SLACK {
        m
    } else {
        v
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// Overrides the per-witness default start counts.
    pub starts: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            starts: None,
            format: Format::Csv,
            out: None,
        }
    }
}

impl RunConfig {
    /// Where a command writes: `--out` if given, else `<default>.<ext>` in the
    /// directory from the environment, else stdout (`None`).
    pub fn output_path(&self, default_stem: &str) -> Option<PathBuf> {
        if let Some(p) = &self.out {
            return Some(p.clone());
        }
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{default_stem}.{}", self.format.extension())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: Range = "2:2.5:6".parse().unwrap();
        for (p, want) in r.points().iter().zip([2.0, 2.1, 2.2, 2.3, 2.4, 2.5]) {
            assert!((p - want).abs() < 1e-15);
        }
        assert_eq!(r.open_points().len(), 6);
        assert_eq!(*r.open_points().last().unwrap(), 2.5);
        for bad in ["2:2.5", "2:1:4", "0:1:1", "nan:1:3", "0:inf:3", "a:1:3", "0:1:x"] {
            assert!(matches!(bad.parse::<Range>(), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn printed_values_snap_to_the_maximum() {
        assert_eq!(resolve_printed(WitnessKind::Hardy, 0.0902), max_hardy());
        assert_eq!(resolve_printed(WitnessKind::Cl, 0.1078), MAX_CL);
        assert_eq!(resolve_printed(WitnessKind::Hardy, 0.0903), 0.0903);
        assert_eq!(resolve_printed(WitnessKind::Hardy, 0.05), 0.05);
        assert_eq!(snap_overshoot(WitnessKind::Hardy, 0.0902), max_hardy());
        assert_eq!(snap_overshoot(WitnessKind::Cl, 0.1078), 0.1078);
    }
}
