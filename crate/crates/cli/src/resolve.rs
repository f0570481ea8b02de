//! Flag/config merging and the translation of name-based options into
//! domain objects. All validation happens here, before any computation.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

use qwrecur_core::coin::CoinSpec;
use qwrecur_core::{
    direct_memory_needed, fourier_coin, grover_coin, grover_family_coin, named_state,
    tensor_hadamard_coin, unbiased_coin_1d, CoinOperator, CoinState, ProductWalk, DEFAULT_MEM_CAP,
};

use crate::CommonArgs;

/// Optional keys mirroring the long flags; flags override file values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    coin: Option<String>,
    state: Option<String>,
    t_max: Option<u64>,
    engine: Option<String>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(alias = "N")]
    resolution: Option<usize>,
    terms: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    #[serde(alias = "d")]
    dimension: Option<usize>,
    a: Option<f64>,
    phi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Auto,
    Direct,
    Product,
}

#[derive(Debug)]
pub struct Settings {
    pub coin_name: Option<String>,
    pub state_name: Option<String>,
    pub t_max: u64,
    pub engine: Engine,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub resolution: usize,
    pub terms: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub dimension: Option<usize>,
    pub a: f64,
    pub phi: f64,
    pub mem_cap: Option<u64>,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file: ConfigFile = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("invalid config {}", path.display()))?
            }
            None => ConfigFile::default(),
        };
        let engine = match args
            .engine
            .clone()
            .or(file.engine)
            .unwrap_or_else(|| "auto".into())
            .as_str()
        {
            "auto" => Engine::Auto,
            "direct" => Engine::Direct,
            "product" => Engine::Product,
            other => bail!("unknown engine {other:?} (expected auto, direct or product)"),
        };
        let mem_cap = match std::env::var("QWRECUR_MEM_CAP_BYTES") {
            Ok(v) => Some(
                v.parse::<u64>()
                    .map_err(|_| anyhow!("QWRECUR_MEM_CAP_BYTES must be an integer, got {v:?}"))?,
            ),
            Err(_) => None,
        };
        Ok(Settings {
            coin_name: args.coin.clone().or(file.coin),
            state_name: args.state.clone().or(file.state),
            t_max: args.t_max.or(file.t_max).unwrap_or(1000),
            engine,
            out_dir: args.out_dir.clone().or(file.out_dir).unwrap_or_else(|| "out".into()),
            seed: args.seed.or(file.seed).unwrap_or(0),
            resolution: args.n.or(file.resolution).unwrap_or(256),
            terms: args.terms.or(file.terms),
            alpha: args.alpha.or(file.alpha).unwrap_or(0.0),
            beta: args.beta.or(file.beta).unwrap_or(0.0),
            dimension: args.d.or(file.dimension),
            a: args.a.or(file.a).unwrap_or(0.5),
            phi: args.phi.or(file.phi).unwrap_or(-std::f64::consts::FRAC_PI_4),
            mem_cap,
        })
    }

    fn dimension_for(&self, what: &str) -> Result<usize> {
        self.dimension.ok_or_else(|| anyhow!("{what} needs -d <dimension>"))
    }

    /// The coin plus, when a coin file embeds one, its initial state.
    pub fn coin(&self) -> Result<(CoinOperator, Option<CoinState>)> {
        let name = self
            .coin_name
            .as_deref()
            .ok_or_else(|| anyhow!("no coin given (--coin or config)"))?;
        match name {
            "hadamard1d" => Ok((unbiased_coin_1d(self.alpha, self.beta), None)),
            "grover" => Ok((grover_coin(), None)),
            "fourier" => Ok((fourier_coin(), None)),
            "tensor-hadamard" => {
                Ok((tensor_hadamard_coin(self.dimension_for("tensor-hadamard")?), None))
            }
            "grover-family" => Ok((grover_family_coin(self.dimension_for("grover-family")?)?, None)),
            path => {
                let spec: CoinSpec = qwrecur_core::io::read_json(std::path::Path::new(path))
                    .with_context(|| format!("cannot load coin file {path}"))?;
                Ok(spec.into_coin()?)
            }
        }
    }

    /// Resolve the initial state against a coin; `embedded` comes from a coin
    /// file and is used when no --state was given.
    pub fn state(&self, coin: &CoinOperator, embedded: Option<CoinState>) -> Result<CoinState> {
        let c = coin.c();
        let name = match &self.state_name {
            Some(n) => n.as_str(),
            None => {
                if let Some(s) = embedded {
                    if s.c() != c {
                        bail!("embedded state has {} components, coin needs {c}", s.c());
                    }
                    return Ok(s);
                }
                return default_state(coin);
            }
        };
        let state = match name {
            "psi_F" => named_state("psi_F", Some((self.a, self.phi)))?,
            "psi_S" | "psi_G" => named_state(name, None)?,
            "random" => random_state(c, self.seed),
            _ => match name.strip_prefix('e').and_then(|s| s.parse::<usize>().ok()) {
                Some(i) if 1 <= i && i <= c => CoinState::basis(c, i),
                _ => bail!("unknown state {name:?} (expected psi_S, psi_G, psi_F, e1..e{c} or random)"),
            },
        };
        if state.c() != c {
            bail!("state {} has {} components, coin needs {c}", state.label, state.c());
        }
        Ok(state)
    }

    /// Pick an engine: direct whenever the amplitude field fits the cap
    /// (d <= 3), product for tensor-structured walks beyond it. Never
    /// silently approximates: anything else is an explanatory error.
    pub fn pick_engine(&self, coin: &CoinOperator) -> Result<Engine> {
        let fits = coin.d() <= 3
            && direct_memory_needed(coin.c(), coin.d(), self.t_max)
                <= self.mem_cap.unwrap_or(DEFAULT_MEM_CAP) as u128;
        match self.engine {
            Engine::Direct | Engine::Product => Ok(self.engine),
            Engine::Auto => {
                if fits {
                    Ok(Engine::Direct)
                } else if self.is_tensor_hadamard(coin) {
                    Ok(Engine::Product)
                } else {
                    bail!(
                        "walk does not fit the direct engine (d = {}, t_max = {}) and the coin \
                         is not tensor-structured; use --coin tensor-hadamard or raise \
                         QWRECUR_MEM_CAP_BYTES",
                        coin.d(),
                        self.t_max
                    )
                }
            }
        }
    }

    pub fn is_tensor_hadamard(&self, coin: &CoinOperator) -> bool {
        self.coin_name.as_deref() == Some("tensor-hadamard")
            || coin.label.starts_with("tensor-hadamard-")
    }

    /// Block decomposition for the product engine. Only coins and states
    /// that factor per axis are accepted; everything else must use the
    /// direct engine.
    pub fn product_walk(&self, coin: &CoinOperator) -> Result<ProductWalk> {
        let d = coin.d();
        let block_coin = if self.is_tensor_hadamard(coin) {
            qwrecur_core::hadamard_coin()
        } else if d == 1 {
            coin.clone()
        } else {
            bail!(
                "product engine needs a tensor-structured coin for d = {d}; \
                 use --coin tensor-hadamard or the direct engine"
            )
        };
        let states: Vec<CoinState> = match self.state_name.as_deref() {
            None => (0..d).map(|_| sym_1d()).collect(),
            Some("random") => {
                let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
                (0..d).map(|_| random_state_from(2, &mut rng)).collect()
            }
            Some(name) => match name.strip_prefix('e').and_then(|s| s.parse::<usize>().ok()) {
                // basis states factor bitwise, MSB first
                Some(i) if 1 <= i && i <= (1 << d) => (0..d)
                    .map(|axis| CoinState::basis(2, ((i - 1) >> (d - 1 - axis) & 1) + 1))
                    .collect(),
                _ => return Err(qwrecur_core::Error::NonProductState.into()),
            },
        };
        Ok(ProductWalk::new(
            states.into_iter().map(|s| (block_coin.clone(), s)).collect(),
        )?)
    }
}

/// (1, i)/sqrt(2): the symmetric 1-D initial state.
fn sym_1d() -> CoinState {
    CoinState::new(
        vec![
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
        ],
        "sym1d",
    )
    .expect("unit norm")
}

fn default_state(coin: &CoinOperator) -> Result<CoinState> {
    match coin.c() {
        2 => Ok(sym_1d()),
        4 => Ok(named_state("psi_S", None)?),
        c => bail!("no default state for c = {c}; pass --state"),
    }
}

fn random_state_from(c: usize, rng: &mut ChaCha20Rng) -> CoinState {
    // complex gaussian entries, normalized: Haar-uniform on the sphere
    let mut amps: Vec<Complex64> = (0..c)
        .map(|_| {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let th = std::f64::consts::TAU * u2;
            Complex64::new(r * th.cos(), r * th.sin())
        })
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amps {
        *z /= norm;
    }
    CoinState::new(amps, "random").expect("normalized")
}

pub fn random_state(c: usize, seed: u64) -> CoinState {
    random_state_from(c, &mut ChaCha20Rng::seed_from_u64(seed))
}
