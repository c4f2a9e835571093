//! Seeded construction of sensing matrices, sparse truths, noisy observations and
//! synthetic DOAS dictionaries. Every output is a pure function of its spec and seed.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MatrixKind {
    /// Columns `cos(2π w j / F)/√m` with one uniform `w ∈ [0,1]^m`; larger `F` means
    /// more coherent columns.
    OversampledDct { f: f64 },
    /// Rows i.i.d. `N(0, Σ)` with unit variances and constant correlation.
    CorrelatedGaussian { corr: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: MatrixKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn dct(m: usize, n: usize, f: f64, seed: u64) -> Self {
        Self {
            kind: MatrixKind::OversampledDct { f },
            m,
            n,
            seed,
        }
    }

    pub fn gaussian(m: usize, n: usize, corr: f64, seed: u64) -> Self {
        Self {
            kind: MatrixKind::CorrelatedGaussian { corr },
            m,
            n,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(invalid("m/n", "dimensions must be positive"));
        }
        match self.kind {
            MatrixKind::OversampledDct { f } if !(f.is_finite() && f > 0.0) => {
                Err(invalid("F", format!("must be positive, got {f}")))
            }
            MatrixKind::CorrelatedGaussian { corr } if !(corr > 0.0 && corr < 1.0) => {
                Err(invalid("corr", format!("must lie in (0, 1), got {corr}")))
            }
            _ => Ok(()),
        }
    }
}

pub fn gen_matrix(spec: &GeneratorSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let mut rng = rng_from_seed(spec.seed);
    Ok(match spec.kind {
        MatrixKind::OversampledDct { f } => {
            let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let scale = 1.0 / (m as f64).sqrt();
            DMatrix::from_fn(m, n, |i, j| {
                scale * (2.0 * std::f64::consts::PI * w[i] * (j + 1) as f64 / f).cos()
            })
        }
        MatrixKind::CorrelatedGaussian { corr } => {
            // Σ^{1/2} = c₁I + c₂J in closed form
            let c1 = (1.0 - corr).sqrt();
            let c2 = ((1.0 - corr + n as f64 * corr).sqrt() - c1) / n as f64;
            let mut a = DMatrix::zeros(m, n);
            let mut g = vec![0.0; n];
            for i in 0..m {
                for v in g.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let shared = c2 * g.iter().sum::<f64>();
                for j in 0..n {
                    a[(i, j)] = c1 * g[j] + shared;
                }
            }
            a
        }
    })
}

/// `s`-sparse nonnegative vector: uniform random support, `|N(0,1)|` values.
pub fn gen_truth(n: usize, s: usize, seed: u64) -> Result<DVector<f64>> {
    if s == 0 || s > n {
        return Err(invalid(
            "s",
            format!("need 1 ≤ s ≤ n, got s = {s}, n = {n}"),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut x = DVector::zeros(n);
    let mut support = sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    for i in support {
        let mut v: f64 = 0.0;
        while v == 0.0 {
            v = rng.sample::<f64, _>(StandardNormal).abs();
        }
        x[i] = v;
    }
    Ok(x)
}

/// `b + σ·N(0, I)`; `σ = 0` returns `b` unchanged.
pub fn add_noise(b: &DVector<f64>, sigma: f64, seed: u64) -> Result<DVector<f64>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid(
            "sigma",
            format!("must be nonnegative, got {sigma}"),
        ));
    }
    if sigma == 0.0 {
        return Ok(b.clone());
    }
    let mut rng = rng_from_seed(seed);
    Ok(b.map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal)))
}

/// Mutual coherence `max_{i≠j} |aᵢᵀaⱼ| / (‖aᵢ‖‖aⱼ‖)`.
pub fn mutual_coherence(a: &DMatrix<f64>) -> f64 {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let gram = a.tr_mul(a);
    let n = a.ncols();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = norms[i] * norms[j];
            if d > 0.0 {
                best = best.max(gram[(i, j)].abs() / d);
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// DOAS

/// Index of the undeformed stretch `p = 0` on the `p_k = −1.01 + 0.01k` grid.
pub const DOAS_P_CENTER: i64 = 101;
/// Index of the undeformed shift `q = 0` on the `q_ℓ = −1.1 + 0.1ℓ` grid.
pub const DOAS_Q_CENTER: i64 = 11;

/// Mean coefficient magnitude per gas.
pub const DOAS_MEANS: [f64; 3] = [1.0, 0.1, 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoasSpec {
    pub gases: usize,
    pub samples: usize,
    pub k: usize,
    pub l: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for DoasSpec {
    fn default() -> Self {
        Self {
            gases: 3,
            samples: 1024,
            k: 21,
            l: 21,
            noise_std: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DoasInstance {
    pub dictionary: DMatrix<f64>,
    pub truth: DVector<f64>,
    pub observation: DVector<f64>,
    /// `(gas, p, q)` for every dictionary column.
    pub deformations: Vec<(usize, f64, f64)>,
    pub base_spectra: Vec<DVector<f64>>,
}

/// Stretch `p_k = −1.01 + 0.01k`.
pub fn doas_p(k: i64) -> f64 {
    -1.01 + 0.01 * k as f64
}

/// Shift `q_ℓ = −1.1 + 0.1ℓ`.
pub fn doas_q(l: i64) -> f64 {
    -1.1 + 0.1 * l as f64
}

/// Grid indices used for a block of `count` deformations centered on `center`.
pub fn centered_indices(center: i64, count: usize) -> Vec<i64> {
    let start = center - (count as i64 - 1) / 2;
    (0..count as i64).map(|i| start + i).collect()
}

/// Gaussian bumps `(center, width, height)` of the first three reference spectra,
/// with center and width as fractions of the wavelength window.
const REFERENCE_BUMPS: [&[(f64, f64, f64)]; 3] = [
    &[
        (0.12, 0.0010, 1.00),
        (0.27, 0.0007, 0.65),
        (0.41, 0.0013, 0.80),
        (0.58, 0.0006, 0.45),
        (0.73, 0.0015, 0.55),
    ],
    &[
        (0.08, 0.0005, 0.50),
        (0.19, 0.0009, 0.90),
        (0.33, 0.0006, 0.70),
        (0.47, 0.0011, 1.00),
        (0.62, 0.0005, 0.40),
        (0.81, 0.0008, 0.75),
    ],
    &[
        (0.05, 0.0020, 0.70),
        (0.22, 0.0015, 1.00),
        (0.36, 0.0007, 0.35),
        (0.52, 0.0018, 0.85),
        (0.67, 0.0010, 0.60),
        (0.79, 0.0014, 0.50),
        (0.91, 0.0009, 0.45),
        (0.97, 0.0006, 0.30),
    ],
];

fn reference_bumps(gas: usize) -> Vec<(f64, f64, f64)> {
    if let Some(b) = REFERENCE_BUMPS.get(gas) {
        return b.to_vec();
    }
    let mut rng = rng_from_seed(derive_seed(0xD0A5, gas as u64));
    let count = rng.random_range(4..=8);
    (0..count)
        .map(|_| {
            (
                rng.random_range(0.05..0.95),
                rng.random_range(0.0005..0.002),
                rng.random_range(0.3..1.0),
            )
        })
        .collect()
}

/// Wavelength coordinate of sample `i`, in samples, measured from the window center.
fn wavelength(i: usize, samples: usize) -> f64 {
    i as f64 - 0.5 * (samples as f64 - 1.0)
}

/// Reference spectrum of `gas`, sampled on the detector grid.
pub fn base_spectrum(gas: usize, samples: usize) -> DVector<f64> {
    let bumps = reference_bumps(gas);
    let span = samples as f64;
    DVector::from_fn(samples, |i, _| {
        let u = i as f64 / span;
        bumps
            .iter()
            .map(|&(c, w, h)| h * (-0.5 * ((u - c) / w).powi(2)).exp())
            .sum()
    })
}

/// Linear interpolation of `spectrum` at fractional sample position `pos`, clamped to
/// the end values outside the window.
fn interpolate(spectrum: &DVector<f64>, pos: f64) -> f64 {
    let last = spectrum.len() - 1;
    if pos <= 0.0 {
        return spectrum[0];
    }
    if pos >= last as f64 {
        return spectrum[last];
    }
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    spectrum[lo] * (1.0 - frac) + spectrum[(lo + 1).min(last)] * frac
}

/// `spectrum` resampled at the deformed wavelengths `λ + pλ + q`.
pub fn deform(spectrum: &DVector<f64>, p: f64, q: f64) -> DVector<f64> {
    let samples = spectrum.len();
    let offset = 0.5 * (samples as f64 - 1.0);
    DVector::from_fn(samples, |i, _| {
        let lambda = wavelength(i, samples);
        interpolate(spectrum, lambda + p * lambda + q + offset)
    })
}

pub fn gen_doas(spec: &DoasSpec) -> Result<DoasInstance> {
    if spec.gases == 0 || spec.samples < 2 || spec.k == 0 || spec.l == 0 {
        return Err(invalid(
            "doas spec",
            "gases, k, l ≥ 1 and samples ≥ 2 required",
        ));
    }
    if !(spec.noise_std.is_finite() && spec.noise_std >= 0.0) {
        return Err(invalid("noise_std", "must be nonnegative"));
    }
    let per_gas = spec.k * spec.l;
    let ks = centered_indices(DOAS_P_CENTER, spec.k);
    let ls = centered_indices(DOAS_Q_CENTER, spec.l);
    let base: Vec<DVector<f64>> = (0..spec.gases)
        .map(|g| base_spectrum(g, spec.samples))
        .collect();

    let mut columns = Vec::with_capacity(spec.gases * per_gas);
    let mut deformations = Vec::with_capacity(spec.gases * per_gas);
    for (g, spectrum) in base.iter().enumerate() {
        for &k in &ks {
            for &l in &ls {
                let (p, q) = (doas_p(k), doas_q(l));
                let mut col = deform(spectrum, p, q);
                let norm = col.norm();
                if norm > 0.0 {
                    col /= norm;
                }
                columns.push(col);
                deformations.push((g, p, q));
            }
        }
    }
    let dictionary = DMatrix::from_columns(&columns);

    let mut rng = rng_from_seed(derive_seed(spec.seed, 1));
    let mut truth = DVector::zeros(dictionary.ncols());
    for g in 0..spec.gases {
        let mean = DOAS_MEANS.get(g).copied().unwrap_or(1.0);
        let pick = rng.random_range(0..per_gas);
        truth[g * per_gas + pick] = mean * rng.random_range(0.75..1.25);
    }
    let clean = &dictionary * &truth;
    let observation = add_noise(&clean, spec.noise_std, derive_seed(spec.seed, 2))?;
    Ok(DoasInstance {
        dictionary,
        truth,
        observation,
        deformations,
        base_spectra: base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_entries_bounded() {
        let a = gen_matrix(&GeneratorSpec::dct(16, 40, 10.0, 3)).unwrap();
        let bound = 1.0 / 4.0;
        assert!(a.iter().all(|v| v.abs() <= bound + 1e-15));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(gen_matrix(&GeneratorSpec::dct(4, 8, 0.0, 1)).is_err());
        assert!(gen_matrix(&GeneratorSpec::gaussian(4, 8, 1.0, 1)).is_err());
        assert!(gen_matrix(&GeneratorSpec::gaussian(4, 8, 0.0, 1)).is_err());
        assert!(gen_truth(5, 6, 1).is_err());
        assert!(gen_truth(5, 0, 1).is_err());
    }

    #[test]
    fn truth_support_and_values() {
        let x = gen_truth(50, 7, 11).unwrap();
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 7);
        assert!(x.iter().all(|v| *v >= 0.0));
        let dense = gen_truth(6, 6, 2).unwrap();
        assert!(dense.iter().all(|v| *v > 0.0));
        assert_eq!(gen_truth(50, 7, 11).unwrap(), x);
    }

    #[test]
    fn noise_identity_and_seed_dependence() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(add_noise(&b, 0.0, 5).unwrap(), b);
        assert_ne!(
            add_noise(&b, 0.1, 5).unwrap(),
            add_noise(&b, 0.1, 6).unwrap()
        );
    }

    #[test]
    fn doas_grid_arithmetic() {
        assert!(doas_p(DOAS_P_CENTER).abs() < 1e-12);
        assert!(doas_q(DOAS_Q_CENTER).abs() < 1e-12);
        assert!((doas_q(12) - 0.1).abs() < 1e-12);
        assert_eq!(centered_indices(11, 21), (1..=21).collect::<Vec<_>>());
        assert_eq!(centered_indices(101, 21).first(), Some(&91));
    }

    #[test]
    fn deformation_is_pure_shift_at_zero_stretch() {
        let s = base_spectrum(0, 64);
        let shifted = deform(&s, 0.0, 1.0);
        for i in 0..63 {
            assert!((shifted[i] - s[i + 1]).abs() < 1e-14);
        }
        assert!((deform(&s, 0.0, 0.0) - &s).norm() < 1e-14);
    }
}
