//! Local frequency oracles: generalized randomized response (GRR), optimized
//! local hashing (OLH), padding-and-sampling (PS) and its frequency oracle
//! (PSFO).
//!
//! All estimates are real-valued counts and may be negative; clamping is left
//! to the caller.

use rand::Rng;
use rayon::prelude::*;

use crate::encoding::EncodedValue;
use crate::error::{Error, Result};

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")))
    }
}

/// Perturbation probabilities of GRR over a domain of `domain_size` values.
///
/// `p = e^eps / (e^eps + d - 1)` is the probability of reporting the true
/// value and `q = 1 / (e^eps + d - 1)` the probability of each other value.
/// An infinite epsilon gives the noiseless mechanism `p = 1, q = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrrParams {
    pub epsilon: f64,
    pub domain_size: u64,
    pub p: f64,
    pub q: f64,
}

impl GrrParams {
    pub fn new(epsilon: f64, domain_size: u64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if domain_size == 0 {
            return Err(Error::Empty("GRR domain"));
        }
        let (p, q) = if epsilon.is_infinite() {
            (1.0, 0.0)
        } else {
            let e = epsilon.exp();
            let denom = e + domain_size as f64 - 1.0;
            (e / denom, 1.0 / denom)
        };
        // d = 1 has no "other" value; p is 1 either way.
        let q = if domain_size == 1 { 0.0 } else { q };
        Ok(GrrParams {
            epsilon,
            domain_size,
            p,
            q,
        })
    }

    /// `Pr[output = o | input = x]`.
    pub fn output_probability(&self, x: u64, o: u64) -> f64 {
        if x == o {
            self.p
        } else {
            self.q
        }
    }

    /// Variance of a GRR count estimate for a value nobody holds.
    pub fn variance(&self, n: usize) -> f64 {
        grr_variance(n, self.domain_size, self.epsilon)
    }
}

/// `n (d - 2 + e^eps) / (e^eps - 1)^2`.
pub fn grr_variance(n: usize, d: u64, epsilon: f64) -> f64 {
    let e = epsilon.exp();
    n as f64 * (d as f64 - 2.0 + e) / ((e - 1.0) * (e - 1.0))
}

/// Reports `x` with probability `p`, otherwise a uniformly random other value.
pub fn grr_perturb<R: Rng + ?Sized>(x: u64, params: &GrrParams, rng: &mut R) -> Result<u64> {
    let d = params.domain_size;
    if x >= d {
        return Err(Error::OutOfDomain {
            value: x as usize,
            size: d as usize,
        });
    }
    if d == 1 || rng.random::<f64>() < params.p {
        return Ok(x);
    }
    let other = rng.random_range(0..d - 1);
    Ok(if other >= x { other + 1 } else { other })
}

/// Unbiased per-value counts `(count(v) - n q) / (p - q)`; they sum to `n`.
pub fn grr_aggregate(reports: &[u64], params: &GrrParams) -> Result<Vec<f64>> {
    if reports.is_empty() {
        return Err(Error::Empty("GRR reports"));
    }
    let d = params.domain_size as usize;
    let mut counts = vec![0u64; d];
    for &r in reports {
        if r as usize >= d {
            return Err(Error::OutOfDomain {
                value: r as usize,
                size: d,
            });
        }
        counts[r as usize] += 1;
    }
    let n = reports.len() as f64;
    if d == 1 {
        return Ok(vec![n]);
    }
    let scale = params.p - params.q;
    Ok(counts
        .into_iter()
        .map(|c| (c as f64 - n * params.q) / scale)
        .collect())
}

/// The full `Pr[output | input]` table of GRR, rows indexed by input.
pub fn grr_probability_table(params: &GrrParams) -> Vec<Vec<f64>> {
    let d = params.domain_size;
    (0..d)
        .map(|x| (0..d).map(|o| params.output_probability(x, o)).collect())
        .collect()
}

/// `max over o, x1, x2 of Pr[o | x1] / Pr[o | x2]`. An epsilon-LDP mechanism
/// has this at most `e^eps`.
pub fn max_probability_ratio(table: &[Vec<f64>]) -> f64 {
    let outputs = table.first().map_or(0, Vec::len);
    let mut worst: f64 = 1.0;
    for o in 0..outputs {
        let column = table.iter().map(|row| row[o]);
        let (lo, hi) = column.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        worst = worst.max(hi / lo);
    }
    worst
}

/// OLH parameters: hash range `g` and the inner GRR probabilities over `[g]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlhParams {
    pub epsilon: f64,
    pub g: u64,
    pub p: f64,
    pub q: f64,
}

impl OlhParams {
    /// Uses the variance-optimal range `g = ceil(e^eps + 1)`.
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let g = (epsilon.exp() + 1.0).ceil();
        if !(g < 2f64.powi(63)) {
            return Err(Error::invalid(format!(
                "epsilon {epsilon} is too large for the optimal hash range; use with_range"
            )));
        }
        Self::with_range(epsilon, g as u64)
    }

    /// Uses an explicit hash range `g >= 2`.
    pub fn with_range(epsilon: f64, g: u64) -> Result<Self> {
        if g < 2 {
            return Err(Error::invalid("OLH hash range must be at least 2"));
        }
        let inner = GrrParams::new(epsilon, g)?;
        Ok(OlhParams {
            epsilon,
            g,
            p: inner.p,
            q: inner.q,
        })
    }

    pub fn inner_grr(&self) -> GrrParams {
        GrrParams {
            epsilon: self.epsilon,
            domain_size: self.g,
            p: self.p,
            q: self.q,
        }
    }

    /// Variance of an OLH count estimate for a value nobody holds.
    pub fn variance(&self, n: usize) -> f64 {
        olh_variance(n, self.epsilon)
    }
}

/// `n 4 e^eps / (e^eps - 1)^2`.
pub fn olh_variance(n: usize, epsilon: f64) -> f64 {
    let e = epsilon.exp();
    n as f64 * 4.0 * e / ((e - 1.0) * (e - 1.0))
}

/// One sanitized OLH report: the user's hash function and perturbed bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OlhReport {
    pub hash_seed: u64,
    pub y: u64,
}

/// Hashes `value` with `H_seed` and randomizes the bucket with GRR over `[g]`.
pub fn olh_perturb<R: Rng + ?Sized>(
    value: &EncodedValue,
    params: &OlhParams,
    hash_seed: u64,
    rng: &mut R,
) -> OlhReport {
    let h = value.bucket(hash_seed, params.g);
    let y = grr_perturb(h, &params.inner_grr(), rng).expect("bucket lies in [g]");
    OlhReport { hash_seed, y }
}

/// Estimates `(support(t) - n/g) / (p - 1/g)` for every candidate `t`, where
/// `support(t)` counts reports whose hash of `t` equals their bucket.
pub fn olh_aggregate(
    reports: &[OlhReport],
    domain: &[EncodedValue],
    params: &OlhParams,
) -> Result<Vec<f64>> {
    if domain.is_empty() {
        return Err(Error::Empty("OLH candidate domain"));
    }
    if let Some(bad) = reports.iter().find(|r| r.y >= params.g) {
        return Err(Error::OutOfDomain {
            value: bad.y as usize,
            size: params.g as usize,
        });
    }
    let n = reports.len() as f64;
    let g = params.g as f64;
    let scale = params.p - 1.0 / g;
    Ok(domain
        .par_iter()
        .map(|candidate| {
            let support = reports
                .iter()
                .filter(|r| candidate.bucket(r.hash_seed, params.g) == r.y)
                .count();
            (support as f64 - n / g) / scale
        })
        .collect())
}

/// A real value or the padding dummy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Padded<T> {
    Value(T),
    Dummy,
}

/// Output of padding-and-sampling: the sampled element and the padding length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaddedSample<T> {
    pub value: Padded<T>,
    pub l: usize,
}

/// `PS_l(t)`: pads `t` with dummies to length `l` and samples one slot
/// uniformly. When `|t| >= l` the sample is uniform over `t` itself, so each
/// real element is selected with probability `min(1/l, 1/|t|)`.
pub fn ps_sample<T: Copy, R: Rng + ?Sized>(t: &[T], l: usize, rng: &mut R) -> Result<PaddedSample<T>> {
    if l == 0 {
        return Err(Error::invalid("padding length must be at least 1"));
    }
    let slots = t.len().max(l);
    let pick = rng.random_range(0..slots);
    let value = t.get(pick).map_or(Padded::Dummy, |&v| Padded::Value(v));
    Ok(PaddedSample { value, l })
}

/// PSFO estimates: OLH aggregation of padded samples over `items`, each
/// multiplied by `l`. OLH estimates are per candidate, so the dummy needs no
/// column of its own.
pub fn psfo_estimate(
    reports: &[OlhReport],
    items: &[EncodedValue],
    l: usize,
    params: &OlhParams,
) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(Error::invalid("padding length must be at least 1"));
    }
    let mut est = olh_aggregate(reports, items, params)?;
    est.iter_mut().for_each(|v| *v *= l as f64);
    Ok(est)
}

/// A frequency oracle as seen by the mining protocols: each user holds one
/// element of a candidate domain (given by index) and the analyst receives a
/// count estimate per domain element. Each call consumes one report from each
/// input.
pub trait FrequencyOracle: Sync {
    /// Whether the oracle randomizes reports. Non-private oracles exist for
    /// testing and may reuse users.
    fn is_private(&self) -> bool;

    fn estimate<R: Rng + ?Sized>(
        &self,
        inputs: &[usize],
        domain: &[EncodedValue],
        rng: &mut R,
    ) -> Result<Vec<f64>>;

    /// Like [`FrequencyOracle::estimate`], but each user first pads their set
    /// of domain indices to `pad` with `dummy` and samples one slot. The
    /// returned counts are not multiplied by `pad`.
    fn estimate_padded<R: Rng + ?Sized>(
        &self,
        inputs: &[Vec<usize>],
        pad: usize,
        dummy: usize,
        domain: &[EncodedValue],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let mut sampled = Vec::with_capacity(inputs.len());
        for set in inputs {
            let s = ps_sample(set, pad, rng)?;
            sampled.push(match s.value {
                Padded::Value(v) => v,
                Padded::Dummy => dummy,
            });
        }
        self.estimate(&sampled, domain, rng)
    }
}

fn check_inputs(inputs: &[usize], domain: &[EncodedValue]) -> Result<()> {
    if domain.is_empty() {
        return Err(Error::Empty("oracle domain"));
    }
    match inputs.iter().find(|&&i| i >= domain.len()) {
        Some(&bad) => Err(Error::OutOfDomain {
            value: bad,
            size: domain.len(),
        }),
        None => Ok(()),
    }
}

/// OLH with a fresh uniformly random hash seed per report.
#[derive(Debug, Clone, Copy)]
pub struct Olh {
    pub params: OlhParams,
}

impl Olh {
    pub fn new(epsilon: f64) -> Result<Self> {
        Ok(Olh {
            params: OlhParams::new(epsilon)?,
        })
    }

    /// Perturbs each user's input into a report.
    pub fn perturb_all<R: Rng + ?Sized>(
        &self,
        inputs: &[usize],
        domain: &[EncodedValue],
        rng: &mut R,
    ) -> Vec<OlhReport> {
        inputs
            .iter()
            .map(|&i| {
                let seed = rng.random::<u64>();
                olh_perturb(&domain[i], &self.params, seed, rng)
            })
            .collect()
    }
}

impl FrequencyOracle for Olh {
    fn is_private(&self) -> bool {
        true
    }

    fn estimate<R: Rng + ?Sized>(
        &self,
        inputs: &[usize],
        domain: &[EncodedValue],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        check_inputs(inputs, domain)?;
        let reports = self.perturb_all(inputs, domain, rng);
        olh_aggregate(&reports, domain, &self.params)
    }
}

/// Non-private stub that returns exact counts. Padded inputs contribute their
/// expected sample, `min(1/pad, 1/|t|)` per held element, so that the `pad`
/// correction recovers exact counts whenever `|t| <= pad`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactOracle;

impl FrequencyOracle for ExactOracle {
    fn is_private(&self) -> bool {
        false
    }

    fn estimate<R: Rng + ?Sized>(
        &self,
        inputs: &[usize],
        domain: &[EncodedValue],
        _rng: &mut R,
    ) -> Result<Vec<f64>> {
        check_inputs(inputs, domain)?;
        let mut counts = vec![0.0; domain.len()];
        for &i in inputs {
            counts[i] += 1.0;
        }
        Ok(counts)
    }

    fn estimate_padded<R: Rng + ?Sized>(
        &self,
        inputs: &[Vec<usize>],
        pad: usize,
        dummy: usize,
        domain: &[EncodedValue],
        _rng: &mut R,
    ) -> Result<Vec<f64>> {
        if pad == 0 {
            return Err(Error::invalid("padding length must be at least 1"));
        }
        let mut counts = vec![0.0; domain.len()];
        for set in inputs {
            check_inputs(set, domain)?;
            let slots = set.len().max(pad) as f64;
            for &i in set {
                counts[i] += 1.0 / slots;
            }
            if set.len() < pad {
                *counts.get_mut(dummy).ok_or(Error::OutOfDomain {
                    value: dummy,
                    size: domain.len(),
                })? += (pad - set.len()) as f64 / slots;
            }
        }
        Ok(counts)
    }
}
