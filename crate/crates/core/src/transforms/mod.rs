//! Label-preserving image transforms: the surrogate corruptions used for
//! training and the corrective action library the policy chooses from.
//!
//! Specs have a text form, `name(param=value,...)`, e.g.
//! `clahe(tiles=2,limit=1)`. Parameters without a value fall back to the
//! registry default; parameter-free transforms print as a bare name.

mod clahe;
mod filters;
mod wavelet;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::image::{Image, SampleSet};
use crate::rng::{mix, rng};
use crate::{Error, Result};

pub use clahe::clahe_plane;
pub use filters::{bilateral_plane, gaussian_plane, median_plane};
pub use wavelet::{wavelet_denoise_plane, Shrink};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Corruption,
    Correction,
    Identity,
}

struct ParamDef {
    name: &'static str,
    default: Option<f64>,
    integer: bool,
    min: f64,
    min_exclusive: bool,
    max: f64,
}

const fn real(name: &'static str, default: Option<f64>, min: f64, min_exclusive: bool, max: f64) -> ParamDef {
    ParamDef {
        name,
        default,
        integer: false,
        min,
        min_exclusive,
        max,
    }
}

const fn int(name: &'static str, default: Option<f64>, min: f64, max: f64) -> ParamDef {
    ParamDef {
        name,
        default,
        integer: true,
        min,
        min_exclusive: false,
        max,
    }
}

struct TransformDef {
    name: &'static str,
    kind: TransformKind,
    params: &'static [ParamDef],
}

const REGISTRY: &[TransformDef] = &[
    TransformDef {
        name: "identity",
        kind: TransformKind::Identity,
        params: &[],
    },
    TransformDef {
        name: "uniform_noise",
        kind: TransformKind::Corruption,
        params: &[real("b", None, 0.0, false, 2.0)],
    },
    TransformDef {
        name: "median_blur",
        kind: TransformKind::Corruption,
        params: &[int("k", None, 1.0, 31.0)],
    },
    TransformDef {
        name: "gamma",
        kind: TransformKind::Corruption,
        params: &[real("gamma", None, 0.0, true, 10.0)],
    },
    TransformDef {
        name: "sigmoid",
        kind: TransformKind::Corruption,
        params: &[
            real("cutoff", Some(0.5), 0.0, false, 1.0),
            real("gain", None, 0.0, true, 100.0),
        ],
    },
    TransformDef {
        name: "gaussian_noise",
        kind: TransformKind::Corruption,
        params: &[real("sigma", None, 0.0, false, 2.0)],
    },
    TransformDef {
        name: "impulse_noise",
        kind: TransformKind::Corruption,
        params: &[real("amount", None, 0.0, false, 1.0)],
    },
    TransformDef {
        name: "gaussian_blur",
        kind: TransformKind::Corruption,
        params: &[real("sigma", None, 0.0, true, 10.0)],
    },
    TransformDef {
        name: "gaussian_denoise",
        kind: TransformKind::Correction,
        params: &[real("sigma", Some(0.6), 0.0, true, 10.0)],
    },
    TransformDef {
        name: "bilateral",
        kind: TransformKind::Correction,
        params: &[
            int("radius", Some(2.0), 1.0, 10.0),
            real("sigma_s", Some(2.0), 0.0, true, 100.0),
            real("sigma_r", Some(0.1), 0.0, true, 10.0),
        ],
    },
    TransformDef {
        name: "wavelet_bayes",
        kind: TransformKind::Correction,
        params: &[],
    },
    TransformDef {
        name: "wavelet_visu",
        kind: TransformKind::Correction,
        params: &[],
    },
    TransformDef {
        name: "clahe",
        kind: TransformKind::Correction,
        params: &[int("tiles", None, 1.0, 64.0), real("limit", None, 0.0, true, 256.0)],
    },
];

fn lookup(name: &str) -> Result<&'static TransformDef> {
    REGISTRY
        .iter()
        .find(|d| d.name == name)
        .ok_or_else(|| Error::UnknownTransform(name.to_string()))
}

/// Names of every registered transform.
pub fn registered_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|d| d.name)
}

/// A validated, named transform with its parameters in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    name: String,
    kind: TransformKind,
    params: Vec<(String, f64)>,
    severity: Option<u8>,
}

impl TransformSpec {
    pub fn new(name: &str, params: &[(&str, f64)]) -> Result<Self> {
        let def = lookup(name)?;
        let invalid = |reason: String| Error::InvalidParam {
            transform: name.to_string(),
            reason,
        };
        for (i, (p, _)) in params.iter().enumerate() {
            if !def.params.iter().any(|d| d.name == *p) {
                return Err(invalid(alloc::format!("unknown parameter `{p}`")));
            }
            if params[..i].iter().any(|(q, _)| q == p) {
                return Err(invalid(alloc::format!("duplicate parameter `{p}`")));
            }
        }
        let mut resolved = Vec::with_capacity(def.params.len());
        for d in def.params {
            let value = params
                .iter()
                .find(|(p, _)| *p == d.name)
                .map(|(_, v)| *v)
                .or(d.default)
                .ok_or_else(|| invalid(alloc::format!("missing parameter `{}`", d.name)))?;
            let low_ok = if d.min_exclusive { value > d.min } else { value >= d.min };
            if !value.is_finite() || !low_ok || value > d.max {
                return Err(invalid(alloc::format!(
                    "`{}` = {value} outside {}{}, {}]",
                    d.name,
                    if d.min_exclusive { "(" } else { "[" },
                    d.min,
                    d.max
                )));
            }
            if d.integer && value.fract() != 0.0 {
                return Err(invalid(alloc::format!("`{}` must be an integer", d.name)));
            }
            resolved.push((d.name.to_string(), value));
        }
        Ok(Self {
            name: name.to_string(),
            kind: def.kind,
            params: resolved,
            severity: None,
        })
    }

    pub fn identity() -> Self {
        Self::new("identity", &[]).expect("identity is registered")
    }

    /// Parses `name`, `name()` or `name(p=v,...)`; whitespace is ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let syntax = || Error::Syntax(text.to_string());
        let (name, body) = match compact.find('(') {
            None => (compact.as_str(), ""),
            Some(open) => {
                let rest = compact[open + 1..].strip_suffix(')').ok_or_else(syntax)?;
                (&compact[..open], rest)
            }
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(syntax());
        }
        let mut params = Vec::new();
        if !body.is_empty() {
            for item in body.split(',') {
                let (k, v) = item.split_once('=').ok_or_else(syntax)?;
                let v: f64 = v.parse().map_err(|_| syntax())?;
                if k.is_empty() {
                    return Err(syntax());
                }
                params.push((k, v));
            }
        }
        Self::new(name, &params)
    }

    pub fn with_severity(mut self, severity: u8) -> Self {
        self.severity = Some(severity);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(p, _)| p == name).map(|(_, v)| *v)
    }

    pub fn severity(&self) -> Option<u8> {
        self.severity
    }

    pub fn is_identity(&self) -> bool {
        self.kind == TransformKind::Identity
    }

    fn op(&self) -> Op {
        let p = |n: &str| self.param(n).expect("validated at construction");
        match self.name.as_str() {
            "identity" => Op::Identity,
            "uniform_noise" => Op::UniformNoise { b: p("b") },
            "median_blur" => Op::Median { k: p("k") as usize },
            "gamma" => Op::Gamma { gamma: p("gamma") },
            "sigmoid" => Op::Sigmoid {
                cutoff: p("cutoff"),
                gain: p("gain"),
            },
            "gaussian_noise" => Op::GaussianNoise { sigma: p("sigma") },
            "impulse_noise" => Op::Impulse { amount: p("amount") },
            "gaussian_denoise" | "gaussian_blur" => Op::Gaussian { sigma: p("sigma") },
            "bilateral" => Op::Bilateral {
                radius: p("radius") as usize,
                sigma_s: p("sigma_s"),
                sigma_r: p("sigma_r"),
            },
            "wavelet_bayes" => Op::Wavelet(Shrink::Bayes),
            "wavelet_visu" => Op::Wavelet(Shrink::Visu),
            "clahe" => Op::Clahe {
                tiles: p("tiles") as usize,
                limit: p("limit"),
            },
            other => unreachable!("`{other}` passed registry validation"),
        }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            f.write_str("(")?;
            for (i, (k, v)) in self.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{k}={v}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for TransformSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Identity,
    UniformNoise { b: f64 },
    GaussianNoise { sigma: f64 },
    Impulse { amount: f64 },
    Median { k: usize },
    Gamma { gamma: f64 },
    Sigmoid { cutoff: f64, gain: f64 },
    Gaussian { sigma: f64 },
    Bilateral { radius: usize, sigma_s: f64, sigma_r: f64 },
    Wavelet(Shrink),
    Clahe { tiles: usize, limit: f64 },
}

impl Op {
    fn apply(self, img: &Image, seed: u64) -> Image {
        let (w, h) = (img.width(), img.height());
        let per_plane = |f: &dyn Fn(&[f64]) -> Vec<f64>| {
            let planes: Vec<Vec<f64>> = (0..img.channels()).map(|c| f(&img.plane(c))).collect();
            img.from_planes_like(&planes)
        };
        match self {
            Op::Identity => img.clone(),
            Op::UniformNoise { b } => {
                let mut r = rng(seed);
                img.map_clipped(|v| v + r.random_range(-b..=b))
            }
            Op::GaussianNoise { sigma } => {
                let mut r = rng(seed);
                img.map_clipped(|v| v + sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut r))
            }
            Op::Impulse { amount } => {
                // Salt and pepper: each value is replaced with probability
                // `amount`, by 0 or 1 with equal odds.
                let mut r = rng(seed);
                img.map_clipped(|v| {
                    if r.random::<f64>() < amount {
                        if r.random::<bool>() {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        v
                    }
                })
            }
            Op::Gamma { gamma } => img.map_clipped(|v| v.powf(gamma)),
            Op::Sigmoid { cutoff, gain } => img.map_clipped(|v| 1.0 / (1.0 + (gain * (cutoff - v)).exp())),
            Op::Median { k } => per_plane(&|p| median_plane(p, w, h, k)),
            Op::Gaussian { sigma } => per_plane(&|p| gaussian_plane(p, w, h, sigma)),
            Op::Bilateral {
                radius,
                sigma_s,
                sigma_r,
            } => per_plane(&|p| bilateral_plane(p, w, h, radius, sigma_s, sigma_r)),
            Op::Wavelet(rule) => per_plane(&|p| wavelet_denoise_plane(p, w, h, rule)),
            Op::Clahe { tiles, limit } => per_plane(&|p| clahe_plane(p, w, h, tiles, limit)),
        }
    }
}

/// Applies `spec` to every image. Image `i` uses the sub-seed `mix(seed, i)`,
/// so results do not depend on evaluation order. Labels pass through.
pub fn apply(spec: &TransformSpec, batch: &SampleSet, seed: u64) -> Result<SampleSet> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if spec.is_identity() {
        return Ok(batch.clone());
    }
    let op = spec.op();
    let images = batch
        .images()
        .iter()
        .enumerate()
        .map(|(i, img)| op.apply(img, mix(seed, i as u64)))
        .collect();
    batch.with_images(images)
}

/// Ordered transforms, applied first to last, bounded by a horizon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformSequence {
    steps: Vec<TransformSpec>,
}

impl TransformSequence {
    pub fn new(steps: Vec<TransformSpec>) -> Self {
        Self { steps }
    }

    pub fn with_horizon(steps: Vec<TransformSpec>, horizon: usize) -> Result<Self> {
        if steps.len() > horizon {
            return Err(Error::HorizonExceeded {
                len: steps.len(),
                horizon,
            });
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[TransformSpec] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: TransformSpec) {
        self.steps.push(step);
    }
}

/// Left fold of [`apply`] over the steps; every step sees the same seed.
pub fn compose(seq: &TransformSequence, batch: &SampleSet, seed: u64) -> Result<SampleSet> {
    seq.steps()
        .iter()
        .try_fold(batch.clone(), |acc, step| apply(step, &acc, seed))
}

/// The six surrogate corruption families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SurrogateFamily {
    UniformNoise,
    MedianBlur,
    GammaA,
    GammaB,
    SigmoidA,
    SigmoidB,
}

impl SurrogateFamily {
    pub const ALL: [SurrogateFamily; 6] = [
        SurrogateFamily::UniformNoise,
        SurrogateFamily::MedianBlur,
        SurrogateFamily::GammaA,
        SurrogateFamily::GammaB,
        SurrogateFamily::SigmoidA,
        SurrogateFamily::SigmoidB,
    ];

    /// Families the policy is trained against.
    pub const POLICY_TRAINING: [SurrogateFamily; 2] = [SurrogateFamily::UniformNoise, SurrogateFamily::GammaA];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateFamily::UniformNoise => "uniform_noise",
            SurrogateFamily::MedianBlur => "median_blur",
            SurrogateFamily::GammaA => "gamma_a",
            SurrogateFamily::GammaB => "gamma_b",
            SurrogateFamily::SigmoidA => "sigmoid_a",
            SurrogateFamily::SigmoidB => "sigmoid_b",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// State-vector component the family is calibrated on
    /// (0 brightness, 1 std, 2 entropy).
    pub fn calibration_index(self) -> usize {
        match self {
            SurrogateFamily::UniformNoise | SurrogateFamily::MedianBlur => 2,
            SurrogateFamily::GammaA | SurrogateFamily::GammaB => 0,
            SurrogateFamily::SigmoidA | SurrogateFamily::SigmoidB => 1,
        }
    }

    /// The family's transform at severity 1..=5.
    pub fn spec(self, severity: u8) -> Result<TransformSpec> {
        if !(1..=5).contains(&severity) {
            return Err(Error::InvalidArgument(alloc::format!("severity {severity} not in 1..=5")));
        }
        let s = usize::from(severity - 1);
        let spec = match self {
            SurrogateFamily::UniformNoise => {
                TransformSpec::new("uniform_noise", &[("b", [0.14, 0.22, 0.32, 0.40, 0.90][s])])
            }
            SurrogateFamily::MedianBlur => TransformSpec::new("median_blur", &[("k", [2.0, 3.0, 4.0, 5.0, 6.0][s])]),
            SurrogateFamily::GammaA => TransformSpec::new("gamma", &[("gamma", [1.4, 1.7, 2.0, 2.5, 3.0][s])]),
            SurrogateFamily::GammaB => TransformSpec::new("gamma", &[("gamma", [0.9, 0.8, 0.7, 0.6, 0.5][s])]),
            SurrogateFamily::SigmoidA => {
                TransformSpec::new("sigmoid", &[("cutoff", 0.5), ("gain", [7.0, 8.0, 9.0, 10.0, 11.0][s])])
            }
            SurrogateFamily::SigmoidB => {
                TransformSpec::new("sigmoid", &[("cutoff", 0.5), ("gain", [7.0, 6.0, 5.0, 4.0, 3.0][s])])
            }
        }?;
        Ok(spec.with_severity(severity))
    }

    pub fn ladder(self) -> Vec<TransformSpec> {
        (1..=5).map(|s| self.spec(s).expect("severity in range")).collect()
    }
}

/// Known surrogate profiles.
pub const PROFILES: &[&str] = &["paper-imagenet"];

/// All `(family, severity)` cells of a profile, family-major.
pub fn surrogate_cells(profile: &str) -> Result<Vec<(SurrogateFamily, TransformSpec)>> {
    if !PROFILES.contains(&profile) {
        return Err(Error::UnknownProfile(profile.to_string()));
    }
    Ok(SurrogateFamily::ALL
        .into_iter()
        .flat_map(|f| f.ladder().into_iter().map(move |s| (f, s)))
        .collect())
}

/// The 6 × 5 surrogate corruption specs of a profile.
pub fn surrogate_suite(profile: &str) -> Result<Vec<TransformSpec>> {
    Ok(surrogate_cells(profile)?.into_iter().map(|(_, s)| s).collect())
}

/// The eight corrective actions. Identity is last.
pub fn action_library() -> Vec<TransformSpec> {
    [
        "gaussian_denoise(sigma=0.6)",
        "bilateral(radius=2,sigma_s=2,sigma_r=0.1)",
        "wavelet_bayes",
        "wavelet_visu",
        "clahe(tiles=2,limit=1)",
        "clahe(tiles=2,limit=2)",
        "clahe(tiles=6,limit=1)",
        "identity",
    ]
    .into_iter()
    .map(|s| TransformSpec::parse(s).expect("library specs are valid"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synth_dataset;
    use alloc::vec;

    fn single(v: &[f64], w: usize, h: usize) -> SampleSet {
        SampleSet::unlabeled(vec![Image::new(w, h, 1, v.to_vec()).unwrap()]).unwrap()
    }

    #[test]
    fn grammar_round_trip() {
        for text in ["clahe(tiles=2,limit=1)", "uniform_noise(b=0.9)", "identity", "wavelet_bayes"] {
            assert_eq!(TransformSpec::parse(text).unwrap().to_string(), text);
        }
        let b = TransformSpec::parse("bilateral()").unwrap();
        assert_eq!(b.to_string(), "bilateral(radius=2,sigma_s=2,sigma_r=0.1)");
        assert_eq!(TransformSpec::parse(" gamma( gamma = 2 ) ").unwrap().param("gamma"), Some(2.0));
    }

    #[test]
    fn grammar_errors() {
        assert!(matches!(TransformSpec::parse("fog(x=1)"), Err(Error::UnknownTransform(_))));
        assert!(matches!(TransformSpec::parse("gamma(gamma=-1)"), Err(Error::InvalidParam { .. })));
        assert!(matches!(TransformSpec::parse("median_blur(k=2.5)"), Err(Error::InvalidParam { .. })));
        assert!(matches!(TransformSpec::parse("gamma(g=1)"), Err(Error::InvalidParam { .. })));
        assert!(matches!(TransformSpec::parse("gamma"), Err(Error::InvalidParam { .. })));
        assert!(matches!(TransformSpec::parse("gamma(gamma=1"), Err(Error::Syntax(_))));
        assert!(matches!(TransformSpec::parse("gamma(gamma)"), Err(Error::Syntax(_))));
        assert!(matches!(TransformSpec::parse("identity(x=1)"), Err(Error::InvalidParam { .. })));
    }

    #[test]
    fn pointwise_examples() {
        let gamma = TransformSpec::parse("gamma(gamma=2.0)").unwrap();
        let out = apply(&gamma, &single(&[0.25], 1, 1), 0).unwrap();
        assert!((out.images()[0].data()[0] - 0.0625).abs() < 1e-15);

        let sig = TransformSpec::parse("sigmoid(cutoff=0.5,gain=10)").unwrap();
        let out = apply(&sig, &single(&[0.5], 1, 1), 0).unwrap();
        assert!((out.images()[0].data()[0] - 0.5).abs() < 1e-15);

        let seq = TransformSequence::new(vec![gamma, TransformSpec::parse("gamma(gamma=0.5)").unwrap()]);
        let out = compose(&seq, &single(&[0.25], 1, 1), 0).unwrap();
        assert!((out.images()[0].data()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn median_removes_isolated_spike() {
        let mut v = vec![0.0; 25];
        v[12] = 1.0;
        let m = TransformSpec::parse("median_blur(k=3)").unwrap();
        let out = apply(&m, &single(&v, 5, 5), 0).unwrap();
        assert!(out.images()[0].data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn uniform_noise_mean_is_unbiased() {
        let img = Image::filled(100, 100, 1, 0.5).unwrap();
        let spec = TransformSpec::parse("uniform_noise(b=0.9)").unwrap();
        let out = apply(&spec, &SampleSet::unlabeled(vec![img]).unwrap(), 42).unwrap();
        let d = out.images()[0].data();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
        assert!(d.iter().any(|&x| x == 0.0) && d.iter().any(|&x| x == 1.0));
    }

    #[test]
    fn noise_is_seeded_per_image() {
        let set = synth_dataset(4, 16, 2, 1).unwrap();
        let spec = TransformSpec::parse("uniform_noise(b=0.3)").unwrap();
        assert_eq!(apply(&spec, &set, 9).unwrap(), apply(&spec, &set, 9).unwrap());
        assert_ne!(apply(&spec, &set, 9).unwrap(), apply(&spec, &set, 10).unwrap());
        // The image at index 1 sees the same noise wherever it is evaluated from.
        let whole = apply(&spec, &set, 9).unwrap();
        let first_two = apply(&spec, &set.slice(0, 2), 9).unwrap();
        assert_eq!(whole.images()[1], first_two.images()[1]);
    }

    #[test]
    fn suite_matches_published_ladders() {
        let suite = surrogate_suite("paper-imagenet").unwrap();
        assert_eq!(suite.len(), 30);
        assert_eq!(suite[4].param("b"), Some(0.90));
        assert_eq!(SurrogateFamily::GammaA.spec(1).unwrap().param("gamma"), Some(1.4));
        assert_eq!(SurrogateFamily::SigmoidB.spec(5).unwrap().param("gain"), Some(3.0));
        assert!(matches!(surrogate_suite("cifar"), Err(Error::UnknownProfile(_))));
        let set = synth_dataset(2, 16, 2, 0).unwrap();
        for spec in &suite {
            assert!(spec.severity().is_some());
            apply(spec, &set, 0).unwrap();
        }
    }

    #[test]
    fn action_library_contents() {
        let lib = action_library();
        assert_eq!(lib.len(), 8);
        let clahe: Vec<(f64, f64)> = lib
            .iter()
            .filter(|s| s.name() == "clahe")
            .map(|s| (s.param("tiles").unwrap(), s.param("limit").unwrap()))
            .collect();
        assert_eq!(clahe, vec![(2.0, 1.0), (2.0, 2.0), (6.0, 1.0)]);
        assert!(lib.last().unwrap().is_identity());
        let set = synth_dataset(3, 16, 2, 4).unwrap();
        assert_eq!(apply(lib.last().unwrap(), &set, 1).unwrap(), set);
    }

    #[test]
    fn wavelet_denoisers_fix_zero_image() {
        let zero = SampleSet::unlabeled(vec![Image::filled(9, 7, 1, 0.0).unwrap()]).unwrap();
        for name in ["wavelet_bayes", "wavelet_visu"] {
            let spec = TransformSpec::parse(name).unwrap();
            assert_eq!(apply(&spec, &zero, 0).unwrap(), zero);
        }
    }

    #[test]
    fn empty_batch_rejected() {
        assert_eq!(apply(&TransformSpec::identity(), &SampleSet::default(), 0), Err(Error::EmptyBatch));
    }

    #[test]
    fn horizon_enforced() {
        let steps = vec![TransformSpec::identity(); 3];
        assert!(TransformSequence::with_horizon(steps.clone(), 3).is_ok());
        assert!(matches!(
            TransformSequence::with_horizon(steps, 2),
            Err(Error::HorizonExceeded { len: 3, horizon: 2 })
        ));
    }

    fn arb_set() -> impl proptest::strategy::Strategy<Value = SampleSet> {
        use proptest::prelude::*;
        (1u64..1000, 1usize..3).prop_map(|(seed, n)| {
            let base = synth_dataset(n, 16, 4, seed).unwrap();
            // Mix in an RGB variant half the time.
            if seed % 2 == 0 {
                let rgb = base
                    .images()
                    .iter()
                    .map(|im| {
                        let d = im.data().iter().flat_map(|&v| [v, v * 0.5, 1.0 - v]).collect();
                        Image::new(16, 16, 3, d).unwrap()
                    })
                    .collect();
                base.with_images(rgb).unwrap()
            } else {
                base
            }
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn every_transform_stays_in_range_and_keeps_labels(set in arb_set(), seed in 0u64..100) {
            let mut specs = surrogate_suite("paper-imagenet").unwrap();
            specs.extend(action_library());
            for spec in &specs {
                let out = apply(spec, &set, seed).unwrap();
                proptest::prop_assert_eq!(out.labels(), set.labels());
                proptest::prop_assert_eq!(out.shape(), set.shape());
                for img in out.images() {
                    proptest::prop_assert!(img.data().iter().all(|v| (0.0..=1.0).contains(v)));
                }
            }
        }

        #[test]
        fn compose_folds_left(set in arb_set(), seed in 0u64..100, a in 0usize..8, b in 0usize..8, c in 0usize..8) {
            let lib = action_library();
            let ab = TransformSequence::new(vec![lib[a].clone(), lib[b].clone()]);
            let direct = apply(&lib[b], &apply(&lib[a], &set, seed).unwrap(), seed).unwrap();
            proptest::prop_assert_eq!(compose(&ab, &set, seed).unwrap(), direct.clone());
            let abc = TransformSequence::new(vec![lib[a].clone(), lib[b].clone(), lib[c].clone()]);
            let nested = compose(&TransformSequence::new(vec![lib[c].clone()]), &direct, seed).unwrap();
            proptest::prop_assert_eq!(compose(&abc, &set, seed).unwrap(), nested);
        }
    }
}
