//! Flag and config-file handling. Precedence: flags, then the JSON config file,
//! then built-in defaults.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use fraclab_core::experiments::{default_s_grid, standard_family, ExperimentKind, SweepConfig, DEFAULT_SEED};
use fraclab_core::filterbank::default_band_range;
use fraclab_core::{Descriptor, GridSpec};

/// Options shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct Options {
    /// JSON file with any of the flag names as keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Test function, e.g. `gaussian`, `bump:radius=3`, `random:seed=7`, or `family`
    #[arg(long)]
    pub desc: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Points per axis (power of two)
    #[arg(long)]
    pub n: Option<usize>,
    /// Period of the torus
    #[arg(long = "L")]
    pub period: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Lattice cutoff radius (default 3L/8)
    #[arg(long)]
    pub zcut: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub jmin: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub jmax: Option<i32>,
    /// Comma-separated, strictly increasing s values in (0, 1)
    #[arg(long, value_delimiter = ',')]
    pub sgrid: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub outdir: Option<PathBuf>,
    /// Filename stamp (default: current UTC time)
    #[arg(long)]
    pub stamp: Option<String>,
    /// Lower order of the sandwich bound
    #[arg(long)]
    pub r: Option<f64>,
    /// Upper order of the sandwich bound
    #[arg(long)]
    pub t: Option<f64>,
    /// Lower end of the r range for fracbbm
    #[arg(long)]
    pub theta: Option<f64>,
    /// Ratio (1 - r̄)/(1 - s) for the reverse Sobolev bound
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum GridList {
    List(Vec<f64>),
    Text(String),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    desc: Option<String>,
    s: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
    n: Option<usize>,
    #[serde(rename = "L")]
    period: Option<f64>,
    dim: Option<usize>,
    zcut: Option<f64>,
    jmin: Option<i32>,
    jmax: Option<i32>,
    sgrid: Option<GridList>,
    seed: Option<u64>,
    outdir: Option<PathBuf>,
    stamp: Option<String>,
    r: Option<f64>,
    t: Option<f64>,
    theta: Option<f64>,
    lambda: Option<f64>,
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub desc: String,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub period: f64,
    pub dim: usize,
    pub zcut: f64,
    pub jmin: i32,
    pub jmax: i32,
    pub sgrid: Vec<f64>,
    pub seed: u64,
    pub outdir: PathBuf,
    pub stamp: String,
    pub r: f64,
    pub t: f64,
    pub theta: f64,
    pub lambda: f64,
    #[serde(skip)]
    pub verbose: u8,
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad s value '{t}'")))
        .collect()
}

impl Settings {
    pub fn resolve(opts: &Options) -> Result<Self, String> {
        let file = match &opts.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let sgrid = match (&opts.sgrid, &file.sgrid) {
            (Some(v), _) => v.clone(),
            (None, Some(GridList::List(v))) => v.clone(),
            (None, Some(GridList::Text(t))) => parse_list(t)?,
            (None, None) => default_s_grid(),
        };
        let dim = opts.dim.or(file.dim).unwrap_or(1);
        let n = opts.n.or(file.n).unwrap_or(4096);
        let period = opts.period.or(file.period).unwrap_or(40.0);
        let grid = GridSpec::new(dim, n, period).map_err(|e| e.to_string())?;
        let (jmin_default, jmax_default) = default_band_range(&grid);
        Ok(Self {
            desc: opts.desc.clone().or(file.desc).unwrap_or_else(|| "gaussian".into()),
            s: opts.s.or(file.s).unwrap_or(0.5),
            p: opts.p.or(file.p).unwrap_or(2.0),
            q: opts.q.or(file.q).unwrap_or(2.0),
            n,
            period,
            dim,
            zcut: opts.zcut.or(file.zcut).unwrap_or(0.375 * period),
            jmin: opts.jmin.or(file.jmin).unwrap_or(jmin_default),
            jmax: opts.jmax.or(file.jmax).unwrap_or(jmax_default),
            sgrid,
            seed: opts.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            outdir: opts.outdir.clone().or(file.outdir).unwrap_or_else(|| PathBuf::from(".")),
            stamp: opts
                .stamp
                .clone()
                .or(file.stamp)
                .unwrap_or_else(|| chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string()),
            r: opts.r.or(file.r).unwrap_or(0.0),
            t: opts.t.or(file.t).unwrap_or(1.0),
            theta: opts.theta.or(file.theta).unwrap_or(0.2),
            lambda: opts.lambda.or(file.lambda).unwrap_or(2.0),
            verbose: opts.verbose,
        })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.dim, self.n, self.period).expect("validated in resolve")
    }

    /// The test functions named by `desc`. A bare `random` takes its seed from `--seed`.
    pub fn descriptors(&self) -> Result<Vec<Descriptor>, fraclab_core::Error> {
        if self.desc.trim() == "family" {
            return Ok(standard_family(self.seed));
        }
        let mut d: Descriptor = self.desc.parse()?;
        if let Descriptor::RandomBandlimited { seed, .. } = &mut d {
            if !self.desc.contains("seed=") {
                *seed = self.seed;
            }
        }
        Ok(vec![d])
    }

    pub fn sweep(&self, kind: ExperimentKind, descriptor: Descriptor) -> SweepConfig {
        let mut cfg = SweepConfig::new(kind, descriptor, self.grid(), self.p);
        cfg.s_grid = self.sgrid.clone();
        cfg.z_cut = self.zcut;
        cfg.j_min = self.jmin;
        cfg.j_max = self.jmax;
        cfg.lambda = self.lambda;
        cfg.seed = self.seed;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let s = Settings::resolve(&Options::default()).unwrap();
        assert_eq!((s.n, s.period, s.dim, s.zcut, s.seed), (4096, 40.0, 1, 15.0, DEFAULT_SEED));
        assert_eq!((s.jmin, s.jmax), (-3, 7));
        assert_eq!(s.sgrid.len(), 21);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"p": 3, "n": 1024, "sgrid": "0.2,0.4", "L": 20}"#).unwrap();
        let opts = Options { config: Some(path.clone()), p: Some(1.5), ..Default::default() };
        let s = Settings::resolve(&opts).unwrap();
        assert_eq!(s.p, 1.5);
        assert_eq!(s.n, 1024);
        assert_eq!(s.sgrid, vec![0.2, 0.4]);
        assert_eq!(s.zcut, 7.5);
        fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        assert!(Settings::resolve(&Options { config: Some(path), ..Default::default() }).is_err());
    }

    #[test]
    fn bare_random_takes_seed() {
        let opts = Options { desc: Some("random".into()), seed: Some(9), ..Default::default() };
        let d = Settings::resolve(&opts).unwrap().descriptors().unwrap();
        assert_eq!(d, vec![Descriptor::random(9)]);
        let opts = Options { desc: Some("random:seed=3".into()), seed: Some(9), ..Default::default() };
        let d = Settings::resolve(&opts).unwrap().descriptors().unwrap();
        assert_eq!(d, vec![Descriptor::random(3)]);
    }
}
