//! Coin operators, displacement sets and named initial coin states.
//!
//! A walk on Z^d with the standard topology uses c = 2^d displacement vectors
//! with all entries +-1 and a c x c unitary coin whose entries all have modulus
//! 1/sqrt(c) (an unbiased coin). Everything downstream assumes the fixed binary
//! displacement order e_1 = (1,..,1) .. e_c = (-1,..,-1), most significant
//! coordinate first; this makes the Fourier-picture diagonal D(k) of a tensor
//! coin factor as a Kronecker product with no index permutation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementSet {
    pub d: usize,
    pub vectors: Vec<Vec<i64>>,
}

impl DisplacementSet {
    /// The standard set: all 2^d sign vectors, +1 before -1, MSB first.
    pub fn standard(d: usize) -> Self {
        let c = 1usize << d;
        let vectors = (0..c)
            .map(|i| {
                (0..d)
                    .map(|j| 1 - 2 * ((i >> (d - 1 - j)) & 1) as i64)
                    .collect()
            })
            .collect();
        DisplacementSet { d, vectors }
    }

    /// Kronecker-ordered concatenation for tensor-product coins.
    pub fn product(factors: &[&DisplacementSet]) -> Self {
        let mut out = DisplacementSet { d: 0, vectors: vec![vec![]] };
        for f in factors {
            let mut vectors = Vec::with_capacity(out.vectors.len() * f.vectors.len());
            for a in &out.vectors {
                for b in &f.vectors {
                    let mut v = a.clone();
                    v.extend_from_slice(b);
                    vectors.push(v);
                }
            }
            out = DisplacementSet { d: out.d + f.d, vectors };
        }
        out
    }

    pub fn c(&self) -> usize {
        self.vectors.len()
    }

    pub fn sum_is_zero(&self) -> bool {
        (0..self.d).all(|j| self.vectors.iter().map(|v| v[j]).sum::<i64>() == 0)
    }

    /// e_i . k for all i.
    pub fn dots(&self, k: &[f64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|e| e.iter().zip(k).map(|(&ei, &ki)| ei as f64 * ki).sum())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CoinOperator {
    pub matrix: DMatrix<Complex64>,
    pub displacements: DisplacementSet,
    pub label: String,
}

impl CoinOperator {
    /// Validating constructor for user-supplied coins.
    pub fn new(matrix: DMatrix<Complex64>, displacements: DisplacementSet, label: impl Into<String>) -> Result<Self> {
        let c = displacements.c();
        if matrix.nrows() != c || matrix.ncols() != c {
            return Err(Error::DimensionMismatch(format!(
                "coin is {}x{} but displacement set has {} vectors",
                matrix.nrows(),
                matrix.ncols(),
                c
            )));
        }
        if !displacements.sum_is_zero() {
            return Err(Error::DisplacementSum);
        }
        let coin = CoinOperator { matrix, displacements, label: label.into() };
        let (ok, bias_dev, unit_dev) = validate_unbiased(&coin);
        if unit_dev > UNITARITY_TOL {
            return Err(Error::NotUnitary { dev: unit_dev });
        }
        if !ok {
            return Err(Error::Biased { dev: bias_dev });
        }
        Ok(coin)
    }

    pub fn c(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn d(&self) -> usize {
        self.displacements.d
    }
}

/// The general unbiased 2x2 coin C(alpha, beta) = (1/sqrt2) [[e^{ia}, e^{-ib}], [e^{ib}, -e^{-ia}]].
pub fn unbiased_coin_1d(alpha: f64, beta: f64) -> CoinOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ea = Complex64::from_polar(s, alpha);
    let eb = Complex64::from_polar(s, beta);
    let matrix = DMatrix::from_row_slice(2, 2, &[ea, eb.conj(), eb, -ea.conj()]);
    CoinOperator {
        matrix,
        displacements: DisplacementSet::standard(1),
        label: format!("C({alpha},{beta})"),
    }
}

pub fn hadamard_coin() -> CoinOperator {
    let mut c = unbiased_coin_1d(0.0, 0.0);
    c.label = "hadamard".into();
    c
}

/// The 4x4 Grover diffusion coin G = (1/2)(J - 2I).
pub fn grover_coin() -> CoinOperator {
    let mut m = DMatrix::from_element(4, 4, Complex64::new(0.5, 0.0));
    for i in 0..4 {
        m[(i, i)] = Complex64::new(-0.5, 0.0);
    }
    CoinOperator { matrix: m, displacements: DisplacementSet::standard(2), label: "grover".into() }
}

/// The 4x4 discrete Fourier coin F = (1/2) [i^{jk}].
pub fn fourier_coin() -> CoinOperator {
    let i = Complex64::new(0.0, 1.0);
    let m = DMatrix::from_fn(4, 4, |j, k| i.powu((j * k) as u32).scale(0.5));
    CoinOperator { matrix: m, displacements: DisplacementSet::standard(2), label: "fourier".into() }
}

/// Kronecker product of coins; displacements concatenate in matching order.
pub fn tensor_coin(factors: &[CoinOperator]) -> CoinOperator {
    assert!(!factors.is_empty(), "tensor_coin needs at least one factor");
    let mut matrix = factors[0].matrix.clone();
    for f in &factors[1..] {
        matrix = matrix.kronecker(&f.matrix);
    }
    let disp: Vec<&DisplacementSet> = factors.iter().map(|f| &f.displacements).collect();
    let label = factors.iter().map(|f| f.label.as_str()).collect::<Vec<_>>().join("\u{2297}");
    CoinOperator { matrix, displacements: DisplacementSet::product(&disp), label }
}

/// d-fold tensor power of the Hadamard coin.
pub fn tensor_hadamard_coin(d: usize) -> CoinOperator {
    let h = hadamard_coin();
    let mut c = tensor_coin(&vec![h; d]);
    c.label = format!("tensor-hadamard-{d}d");
    c
}

/// G^(d): tensor powers of the Grover coin, padded with Hadamard for odd d.
pub fn grover_family_coin(d: usize) -> Result<CoinOperator> {
    if d < 2 {
        return Err(Error::GroverFamilyDimension(d));
    }
    let mut factors = vec![grover_coin(); d / 2];
    if d % 2 == 1 {
        factors.push(hadamard_coin());
    }
    let mut c = tensor_coin(&factors);
    c.label = format!("grover-family-{d}d");
    Ok(c)
}

/// Checks |C_ij| = 1/sqrt(c) and unitarity; returns (verdict, bias dev, unitarity dev).
pub fn validate_unbiased(coin: &CoinOperator) -> (bool, f64, f64) {
    let c = coin.c();
    let target = 1.0 / (c as f64).sqrt();
    let bias_dev = coin
        .matrix
        .iter()
        .map(|z| (z.norm() - target).abs())
        .fold(0.0f64, f64::max);
    let prod = coin.matrix.adjoint() * &coin.matrix;
    let unit_dev = (0..c)
        .flat_map(|i| (0..c).map(move |j| (i, j)))
        .map(|(i, j)| (prod[(i, j)] - if i == j { Complex64::ONE } else { Complex64::ZERO }).norm())
        .fold(0.0f64, f64::max);
    (bias_dev <= UNITARITY_TOL && unit_dev <= UNITARITY_TOL, bias_dev, unit_dev)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoinState {
    pub amplitudes: Vec<Complex64>,
    pub label: String,
}

impl CoinState {
    pub fn new(amplitudes: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let dev = (norm - 1.0).abs();
        if dev > UNITARITY_TOL {
            return Err(Error::NotNormalized { dev });
        }
        Ok(CoinState { amplitudes, label: label.into() })
    }

    /// Basis state e_i (1-based to match component numbering).
    pub fn basis(c: usize, i: usize) -> Self {
        let mut amplitudes = vec![Complex64::ZERO; c];
        amplitudes[i - 1] = Complex64::ONE;
        CoinState { amplitudes, label: format!("e{i}") }
    }

    pub fn c(&self) -> usize {
        self.amplitudes.len()
    }

    /// Tensor product of block states.
    pub fn product(blocks: &[&CoinState]) -> Self {
        let mut amplitudes = vec![Complex64::ONE];
        for b in blocks {
            let mut next = Vec::with_capacity(amplitudes.len() * b.amplitudes.len());
            for &x in &amplitudes {
                for &y in &b.amplitudes {
                    next.push(x * y);
                }
            }
            amplitudes = next;
        }
        let label = blocks.iter().map(|b| b.label.as_str()).collect::<Vec<_>>().join("\u{2297}");
        CoinState { amplitudes, label }
    }
}

/// psi_S = (1/2)(1, i, i, -1): the generic Grover state with a central spike.
pub fn psi_s() -> CoinState {
    let i = Complex64::new(0.0, 1.0);
    CoinState {
        amplitudes: vec![
            Complex64::new(0.5, 0.0),
            i.scale(0.5),
            i.scale(0.5),
            Complex64::new(-0.5, 0.0),
        ],
        label: "psi_S".into(),
    }
}

/// psi_G = (1/2)(1, -1, -1, 1): the unique state orthogonal to both Grover flat bands.
pub fn psi_g() -> CoinState {
    CoinState {
        amplitudes: vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ],
        label: "psi_G".into(),
    }
}

/// psi_F(a, phi) = (a, b, a, -b) with b = sqrt(1/2 - a^2) e^{i phi}; the
/// two-parameter family orthogonal to the Fourier walk's saddle-line bands.
pub fn psi_f(a: f64, phi: f64) -> Result<CoinState> {
    let half = 0.5 - a * a;
    if !(0.0..=std::f64::consts::FRAC_1_SQRT_2).contains(&a) || half < -1e-15 {
        return Err(Error::AmplitudeOutOfRange(a));
    }
    let b = Complex64::from_polar(half.max(0.0).sqrt(), phi);
    Ok(CoinState {
        amplitudes: vec![Complex64::new(a, 0.0), b, Complex64::new(a, 0.0), -b],
        label: format!("psi_F({a},{phi})"),
    })
}

/// Named initial states; psi_F takes its (a, phi) parameters.
pub fn named_state(name: &str, params: Option<(f64, f64)>) -> Result<CoinState> {
    match name {
        "psi_S" => Ok(psi_s()),
        "psi_G" => Ok(psi_g()),
        "psi_F" => {
            let (a, phi) = params.unwrap_or((0.5, -std::f64::consts::FRAC_PI_4));
            psi_f(a, phi)
        }
        other => Err(Error::UnknownState(other.into())),
    }
}

/// Serialized form of a coin plus an optional initial state.
#[derive(Debug, Serialize, Deserialize)]
pub struct CoinSpec {
    pub label: String,
    pub c: usize,
    pub d: usize,
    /// Row-major [re, im] pairs.
    pub matrix: Vec<[f64; 2]>,
    pub displacements: Vec<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<[f64; 2]>>,
}

impl CoinSpec {
    pub fn from_coin(coin: &CoinOperator, state: Option<&CoinState>) -> Self {
        let c = coin.c();
        let matrix = (0..c)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| [coin.matrix[(i, j)].re, coin.matrix[(i, j)].im])
            .collect();
        CoinSpec {
            label: coin.label.clone(),
            c,
            d: coin.d(),
            matrix,
            displacements: coin.displacements.vectors.clone(),
            state: state.map(|s| s.amplitudes.iter().map(|z| [z.re, z.im]).collect()),
        }
    }

    pub fn into_coin(self) -> Result<(CoinOperator, Option<CoinState>)> {
        if self.matrix.len() != self.c * self.c {
            return Err(Error::BadCoinSpec(format!(
                "matrix has {} entries, expected {}",
                self.matrix.len(),
                self.c * self.c
            )));
        }
        if self.displacements.len() != self.c || self.displacements.iter().any(|v| v.len() != self.d) {
            return Err(Error::BadCoinSpec("displacement list does not match (c, d)".into()));
        }
        let matrix = DMatrix::from_fn(self.c, self.c, |i, j| {
            let [re, im] = self.matrix[i * self.c + j];
            Complex64::new(re, im)
        });
        let disp = DisplacementSet { d: self.d, vectors: self.displacements };
        let coin = CoinOperator::new(matrix, disp, self.label)?;
        let state = match self.state {
            Some(amps) => {
                if amps.len() != self.c {
                    return Err(Error::BadCoinSpec("state length does not match c".into()));
                }
                Some(CoinState::new(
                    amps.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                    "from-file",
                )?)
            }
            None => None,
        };
        Ok((coin, state))
    }
}
