//! Clean draws from the Gaussian linear model and epsilon-contamination.

use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{validation, Result};
use crate::linalg::top_eigenpair;
use crate::lowdeg::LowDegInstance;
use crate::model::{dot, Covariance, Dataset, LinearModelSpec};
use crate::rng::Seed;
use crate::sq::SqInstanceSpec;

/// `n` i.i.d. rows `x ~ N(0, Sigma)`, `y = <x, beta> + eta`, `eta ~ N(0, sigma^2)`.
pub fn sample_clean(model: &LinearModelSpec, n: usize, seed: Seed) -> Result<Dataset> {
    if n == 0 {
        return Err(validation("n must be >= 1"));
    }
    let d = model.dim();
    let width = d + 1;
    let noise_sd = model.noise_var.sqrt();
    let mut rng = seed.rng();
    let mut rows = vec![0.0; n * width];
    for row in rows.chunks_mut(width) {
        model.covariance.sample_into(&mut rng, &mut row[..d]);
        let eta: f64 = rng.sample(StandardNormal);
        row[d] = dot(&row[..d], model.beta.as_slice()) + noise_sd * eta;
    }
    Dataset::new(d, rows, seed.0)
}

/// Adversary kinds selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    None,
    HuberMixture,
    TargetedLabels,
    LowdegGaussian,
    SqInstance,
}

impl FromStr for AdversaryKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AdversaryKind::None),
            "huber_mixture" | "huber" => Ok(AdversaryKind::HuberMixture),
            "targeted_labels" | "targeted" => Ok(AdversaryKind::TargetedLabels),
            "lowdeg_gaussian" | "lowdeg" => Ok(AdversaryKind::LowdegGaussian),
            "sq_instance" | "sq" => Ok(AdversaryKind::SqInstance),
            other => Err(validation(format!("unknown adversary kind '{other}'"))),
        }
    }
}

/// Adversary together with its parameters.
#[derive(Debug, Clone)]
pub enum Adversary {
    None,
    /// Replace rows by `x ~ N(0, covariance)` with the constant label `label`.
    HuberMixture { covariance: Covariance, label: f64 },
    /// Shift the labels of the `floor(eps n)` highest-leverage rows along the
    /// top sample-covariance direction. `scale = None` picks the default
    /// `10 sigma sqrt(n) / (eps n)` clipped to `[10, 1000]`.
    TargetedLabels { scale: Option<f64>, noise_sd: f64 },
    /// Replace rows by draws from the corrupting Gaussian of a low-degree instance.
    LowdegGaussian(Box<LowDegInstance>),
    /// Replace rows by draws from the corrupting part of the SQ joint instance.
    SqInstance(Box<SqInstanceSpec>),
}

impl Adversary {
    pub fn kind(&self) -> AdversaryKind {
        match self {
            Adversary::None => AdversaryKind::None,
            Adversary::HuberMixture { .. } => AdversaryKind::HuberMixture,
            Adversary::TargetedLabels { .. } => AdversaryKind::TargetedLabels,
            Adversary::LowdegGaussian(_) => AdversaryKind::LowdegGaussian,
            Adversary::SqInstance(_) => AdversaryKind::SqInstance,
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            Adversary::HuberMixture { covariance, .. } => Some(covariance.dim()),
            Adversary::LowdegGaussian(inst) => Some(inst.d),
            Adversary::SqInstance(spec) => Some(spec.d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContaminationSpec {
    pub eps: f64,
    pub adversary: Adversary,
}

impl ContaminationSpec {
    pub fn new(eps: f64, adversary: Adversary) -> Result<Self> {
        if !(0.0..0.5).contains(&eps) {
            return Err(validation(format!("eps = {eps} outside [0, 0.5)")));
        }
        if let Adversary::TargetedLabels { scale, noise_sd } = &adversary {
            if scale.is_some_and(|s| !(s.is_finite() && s > 0.0)) || !(*noise_sd >= 0.0) {
                return Err(validation("targeted scale must be positive and noise sd nonnegative"));
            }
        }
        Ok(Self { eps, adversary })
    }

    /// Label-shift scale for the targeted attack at sample size `n`.
    pub fn targeted_scale(&self, n: usize) -> Option<f64> {
        match self.adversary {
            Adversary::TargetedLabels { scale: Some(s), .. } => Some(s),
            Adversary::TargetedLabels { scale: None, noise_sd } => {
                let nf = n as f64;
                Some((10.0 * noise_sd * nf.sqrt() / (self.eps * nf)).clamp(10.0, 1e3))
            }
            _ => None,
        }
    }
}

/// Contaminated data plus the indices of altered rows.
#[derive(Debug, Clone)]
pub struct Contaminated {
    pub data: Dataset,
    pub corrupted: Vec<usize>,
}

pub fn contaminate(clean: &Dataset, spec: &ContaminationSpec, seed: Seed) -> Result<Dataset> {
    Ok(contaminate_tracked(clean, spec, seed)?.data)
}

/// Apply the adversary. Untouched rows are copied bitwise.
pub fn contaminate_tracked(clean: &Dataset, spec: &ContaminationSpec, seed: Seed) -> Result<Contaminated> {
    if spec.eps == 0.0 || matches!(spec.adversary, Adversary::None) {
        return Ok(Contaminated { data: clean.clone(), corrupted: Vec::new() });
    }
    if let Some(d) = spec.adversary.dim() {
        if d != clean.dim() {
            return Err(validation(format!(
                "adversary dimension {d} does not match data dimension {}",
                clean.dim()
            )));
        }
    }
    let mut data = clean.clone();
    let mut rng = seed.rng();
    let mut corrupted = Vec::new();
    let d = clean.dim();
    match &spec.adversary {
        Adversary::None => unreachable!(),
        Adversary::TargetedLabels { .. } => {
            let n = clean.n();
            let m = (spec.eps * n as f64).floor() as usize;
            let scale = spec.targeted_scale(n).expect("targeted kind");
            let u = top_eigenpair(&clean.covariate_second_moment(), 1e-10, 10_000).vector;
            let proj: Vec<f64> = (0..n).map(|i| dot(clean.x(i), u.as_slice())).collect();
            let mut order: Vec<usize> = (0..n).collect();
            // Highest leverage first; ties broken by index for determinism.
            order.sort_by(|&a, &b| proj[b].abs().total_cmp(&proj[a].abs()).then(a.cmp(&b)));
            corrupted = order[..m].to_vec();
            corrupted.sort_unstable();
            for &i in &corrupted {
                data.row_mut(i)[d] += scale * proj[i];
            }
        }
        adv => {
            for i in 0..clean.n() {
                if rng.random::<f64>() >= spec.eps {
                    continue;
                }
                corrupted.push(i);
                let row = data.row_mut(i);
                match adv {
                    Adversary::HuberMixture { covariance, label } => {
                        covariance.sample_into(&mut rng, &mut row[..d]);
                        row[d] = *label;
                    }
                    Adversary::LowdegGaussian(inst) => inst.sample_corrupt_row(&mut rng, row),
                    Adversary::SqInstance(sq) => sq.sample_noise_row(&mut rng, row)?,
                    Adversary::None | Adversary::TargetedLabels { .. } => unreachable!(),
                }
            }
        }
    }
    Ok(Contaminated { data, corrupted })
}
