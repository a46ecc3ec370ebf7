//! Laughlin droplets: log-domain amplitudes with and without a quasihole,
//! Metropolis sampling of `|ψ|²`, the radial one-particle density, and the
//! quasihole Berry phase and effective charge derived from it.
//!
//! Electron positions use the lowest-Landau-level convention `z = x - iy`.
//! Amplitudes are never normalized.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Proposal step in units of `l0`, giving roughly 40% acceptance at `m = 3`.
pub const DEFAULT_STEP_IN_L0: f64 = 1.5;
pub const MIN_DENSITY_SAMPLES: usize = 1000;
pub const DEFAULT_BATCHES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaughlinConfig {
    pub n_electrons: usize,
    /// Odd exponent; the filling is `1/m`.
    pub m: u32,
    pub l0: f64,
    pub seed: u64,
}

impl LaughlinConfig {
    pub fn new(n_electrons: usize, m: u32, l0: f64, seed: u64) -> Result<Self> {
        if n_electrons < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 electrons, got {n_electrons}"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("exponent m must be positive".into()));
        }
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(Error::InvalidArgument(format!("l0 must be positive, got {l0}")));
        }
        Ok(LaughlinConfig {
            n_electrons,
            m,
            l0,
            seed,
        })
    }

    pub fn filling(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Radius `sqrt(2 m N_e) l0` of the classical droplet.
    pub fn droplet_radius(&self) -> f64 {
        (2.0 * self.m as f64 * self.n_electrons as f64).sqrt() * self.l0
    }
}

/// Electron positions as complex numbers `z = x - iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectronConfiguration {
    pub z: Vec<C64>,
}

impl ElectronConfiguration {
    pub fn from_xy(points: &[(f64, f64)]) -> Result<Self> {
        if points.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::NonFinite("electron coordinate".into()));
        }
        Ok(ElectronConfiguration {
            z: points.iter().map(|&(x, y)| C64::new(x, -y)).collect(),
        })
    }

    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.z.iter().map(|z| (z.re, -z.im)).collect()
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut z = self.z.clone();
        z.swap(i, j);
        ElectronConfiguration { z }
    }
}

/// `ln ψ`, or a marker for an exact node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogAmplitude {
    Finite(C64),
    Vanishing,
}

impl LogAmplitude {
    pub fn value(self) -> Option<C64> {
        match self {
            LogAmplitude::Finite(v) => Some(v),
            LogAmplitude::Vanishing => None,
        }
    }

    /// `ln |ψ|`, `-inf` at a node.
    pub fn log_modulus(self) -> f64 {
        self.value().map_or(f64::NEG_INFINITY, |v| v.re)
    }
}

/// `m Σ_{j<k} ln(z_j - z_k) - Σ |z_i|² / 4 l0²`.
pub fn log_amplitude(config: &LaughlinConfig, positions: &ElectronConfiguration) -> LogAmplitude {
    let z = &positions.z;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..z.len() {
        for k in j + 1..z.len() {
            let d = z[j] - z[k];
            if d.norm() == 0.0 {
                return LogAmplitude::Vanishing;
            }
            acc += d.ln() * config.m as f64;
        }
    }
    let gauss: f64 = z.iter().map(|w| w.norm_sqr()).sum::<f64>() / (4.0 * config.l0 * config.l0);
    LogAmplitude::Finite(acc - gauss)
}

/// Ground-state log-amplitude plus `Σ ln(z_i - z0)`.
pub fn log_amplitude_quasihole(
    config: &LaughlinConfig,
    positions: &ElectronConfiguration,
    z0: C64,
) -> LogAmplitude {
    let LogAmplitude::Finite(base) = log_amplitude(config, positions) else {
        return LogAmplitude::Vanishing;
    };
    let mut acc = base;
    for z in &positions.z {
        let d = z - z0;
        if d.norm() == 0.0 {
            return LogAmplitude::Vanishing;
        }
        acc += d.ln();
    }
    LogAmplitude::Finite(acc)
}

/// Metropolis chain on `|ψ|²` with single-electron circular Gaussian moves.
/// Each yielded sample is the configuration after one sweep of `N_e` moves.
#[derive(Debug, Clone)]
pub struct MetropolisSampler {
    config: LaughlinConfig,
    z0: Option<C64>,
    step: Normal<f64>,
    rng: ChaCha8Rng,
    z: Vec<C64>,
    proposed: u64,
    accepted: u64,
}

impl MetropolisSampler {
    /// `z0` is the quasihole position (complex, same `x - iy` convention);
    /// `proposal_step` is the standard deviation of each coordinate shift.
    pub fn new(config: LaughlinConfig, z0: Option<C64>, proposal_step: f64) -> Result<Self> {
        if !(proposal_step.is_finite() && proposal_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "proposal step must be positive, got {proposal_step}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let radius = config.droplet_radius();
        let z = (0..config.n_electrons)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                C64::from_polar(r, TAU * rng.random::<f64>())
            })
            .collect();
        Ok(MetropolisSampler {
            config,
            z0,
            step: Normal::new(0.0, proposal_step).expect("positive step"),
            rng,
            z,
            proposed: 0,
            accepted: 0,
        })
    }

    /// Change of `ln|ψ|` when electron `i` moves to `w`.
    fn delta_log_modulus(&self, i: usize, w: C64) -> f64 {
        let old = self.z[i];
        let m = self.config.m as f64;
        let mut d = 0.0;
        for (j, zj) in self.z.iter().enumerate() {
            if j != i {
                d += m * ((w - zj).norm().ln() - (old - zj).norm().ln());
            }
        }
        if let Some(z0) = self.z0 {
            d += (w - z0).norm().ln() - (old - z0).norm().ln();
        }
        d - (w.norm_sqr() - old.norm_sqr()) / (4.0 * self.config.l0 * self.config.l0)
    }

    pub fn sweep(&mut self) {
        for i in 0..self.z.len() {
            let shift = C64::new(self.step.sample(&mut self.rng), self.step.sample(&mut self.rng));
            let w = self.z[i] + shift;
            let log_ratio = 2.0 * self.delta_log_modulus(i, w);
            self.proposed += 1;
            if log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio {
                self.z[i] = w;
                self.accepted += 1;
            }
        }
    }

    /// Run `sweeps` sweeps and reset the acceptance counters.
    pub fn burn_in(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
        self.proposed = 0;
        self.accepted = 0;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            return f64::NAN;
        }
        self.accepted as f64 / self.proposed as f64
    }

    /// A tuning hint when the acceptance rate is outside `[0.05, 0.95]`.
    pub fn acceptance_warning(&self) -> Option<String> {
        let a = self.acceptance_rate();
        if a.is_nan() || (0.05..=0.95).contains(&a) {
            return None;
        }
        let hint = if a < 0.05 { "decrease" } else { "increase" };
        Some(format!(
            "Metropolis acceptance rate {a:.3} is outside [0.05, 0.95]; {hint} the proposal step"
        ))
    }

    pub fn current(&self) -> ElectronConfiguration {
        ElectronConfiguration { z: self.z.clone() }
    }
}

impl Iterator for MetropolisSampler {
    type Item = ElectronConfiguration;

    fn next(&mut self) -> Option<Self::Item> {
        self.sweep();
        Some(self.current())
    }
}

/// Burn in, draw `n_samples` sweeps and warn on a poor acceptance rate.
pub fn metropolis_sample(
    config: &LaughlinConfig,
    z0: Option<C64>,
    n_samples: usize,
    burn_in: usize,
    proposal_step: f64,
) -> Result<(Vec<ElectronConfiguration>, f64)> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut sampler = MetropolisSampler::new(*config, z0, proposal_step)?;
    sampler.burn_in(burn_in);
    let samples: Vec<_> = sampler.by_ref().take(n_samples).collect();
    if let Some(w) = sampler.acceptance_warning() {
        log::warn!("{w}");
    }
    Ok((samples, sampler.acceptance_rate()))
}

/// Radial bins `[edges[k], edges[k+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub edges: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(r_max: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bad radial grid: r_max {r_max}, {bins} bins"
            )));
        }
        Ok(RadialGrid {
            edges: (0..=bins).map(|k| r_max * k as f64 / bins as f64).collect(),
        })
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    fn bin_of(&self, r: f64) -> Option<usize> {
        if r >= self.r_max() || r < self.edges[0] {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= r) - 1)
    }

    fn area(&self, k: usize) -> f64 {
        PI * (self.edges[k + 1].powi(2) - self.edges[k].powi(2))
    }
}

/// Histogram estimate of the radial one-particle density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub grid: RadialGrid,
    pub center: C64,
    pub l0: f64,
    pub n_electrons: usize,
    /// Electron counts per batch and bin.
    pub batch_counts: Vec<Vec<u64>>,
    pub batch_samples: Vec<usize>,
    /// Per area, per bin.
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub empty_bins: Vec<usize>,
    /// Annulus used for the far-field average.
    pub far_field_annulus: (f64, f64),
    pub far_field: f64,
    pub far_field_stderr: f64,
}

/// Batch-means mean and standard error of per-batch values weighted by
/// batch size.
fn batch_mean(values: &[f64], weights: &[usize]) -> (f64, f64) {
    let total: f64 = weights.iter().map(|&w| w as f64).sum();
    let mean = values.iter().zip(weights).map(|(v, &w)| v * w as f64).sum::<f64>() / total;
    let b = values.len() as f64;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (mean, (var / b).sqrt())
}

impl DensityEstimate {
    fn from_batches(
        grid: RadialGrid,
        center: C64,
        l0: f64,
        n_electrons: usize,
        batch_counts: Vec<Vec<u64>>,
        batch_samples: Vec<usize>,
        far_field_annulus: Option<(f64, f64)>,
    ) -> Self {
        let bins = grid.bins();
        let mut density = vec![0.0; bins];
        let mut stderr = vec![0.0; bins];
        let mut empty_bins = Vec::new();
        for k in 0..bins {
            let per_batch: Vec<f64> = batch_counts
                .iter()
                .zip(&batch_samples)
                .map(|(c, &n)| c[k] as f64 / n as f64 / grid.area(k))
                .collect();
            let (m, s) = batch_mean(&per_batch, &batch_samples);
            density[k] = m;
            stderr[k] = s;
            if batch_counts.iter().all(|c| c[k] == 0) {
                empty_bins.push(k);
            }
        }
        let annulus = far_field_annulus.unwrap_or((0.75 * grid.r_max(), grid.r_max()));
        let mut est = DensityEstimate {
            grid,
            center,
            l0,
            n_electrons,
            batch_counts,
            batch_samples,
            density,
            stderr,
            empty_bins,
            far_field_annulus: annulus,
            far_field: 0.0,
            far_field_stderr: 0.0,
        };
        let (ff, ffs) = est.annulus_average(annulus.0, annulus.1);
        est.far_field = ff;
        est.far_field_stderr = ffs;
        est
    }

    /// Expected count of electrons within radius `r` of each batch, with
    /// linear-in-area interpolation inside a partially covered bin.
    fn batch_enclosed(&self, r: f64) -> Vec<f64> {
        let g = &self.grid;
        self.batch_counts
            .iter()
            .zip(&self.batch_samples)
            .map(|(c, &n)| {
                let mut total = 0.0;
                for (&count, e) in c.iter().zip(g.edges.windows(2)) {
                    let (lo, hi) = (e[0], e[1]);
                    if r >= hi {
                        total += count as f64;
                    } else if r > lo {
                        total += count as f64 * (r * r - lo * lo) / (hi * hi - lo * lo);
                    }
                }
                total / n as f64
            })
            .collect()
    }

    /// `⟨n⟩_R = ∬_{|z|<R} ρ`, with its standard error.
    pub fn enclosed_count(&self, r: f64) -> Result<(f64, f64)> {
        if r > self.grid.r_max() + 1e-12 {
            return Err(Error::OutsideSupport {
                radius: r,
                max: self.grid.r_max(),
            });
        }
        Ok(batch_mean(&self.batch_enclosed(r), &self.batch_samples))
    }

    /// Mean density over the disk of radius `r`.
    pub fn disk_average(&self, r: f64) -> Result<(f64, f64)> {
        let (n, s) = self.enclosed_count(r)?;
        let area = PI * r * r;
        Ok((n / area, s / area))
    }

    /// Mean density over the annulus `[r_in, r_out]`.
    pub fn annulus_average(&self, r_in: f64, r_out: f64) -> (f64, f64) {
        let outer = self.batch_enclosed(r_out.min(self.grid.r_max()));
        let inner = self.batch_enclosed(r_in);
        let area = PI * (r_out * r_out - r_in * r_in);
        let per: Vec<f64> = outer.iter().zip(&inner).map(|(o, i)| (o - i) / area).collect();
        batch_mean(&per, &self.batch_samples)
    }

    /// Total number of samples.
    pub fn samples(&self) -> usize {
        self.batch_samples.iter().sum()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.grid.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Pool two estimates on the same grid, e.g. from independent chains.
    pub fn merge(&self, other: &DensityEstimate) -> Result<DensityEstimate> {
        if self.grid != other.grid || self.center != other.center || self.n_electrons != other.n_electrons {
            return Err(Error::InvalidArgument(
                "density estimates differ in grid, center or electron count".into(),
            ));
        }
        let mut counts = self.batch_counts.clone();
        counts.extend(other.batch_counts.iter().cloned());
        let mut samples = self.batch_samples.clone();
        samples.extend(other.batch_samples.iter().copied());
        Ok(Self::from_batches(
            self.grid.clone(),
            self.center,
            self.l0,
            self.n_electrons,
            counts,
            samples,
            Some(self.far_field_annulus),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOptions {
    pub batches: usize,
    pub far_field_annulus: Option<(f64, f64)>,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            batches: DEFAULT_BATCHES,
            far_field_annulus: None,
        }
    }
}

/// Histogram the samples around `center` and attach batch-means errors.
pub fn density_profile<'a, I>(
    samples: I,
    grid: &RadialGrid,
    center: C64,
    l0: f64,
    options: &DensityOptions,
) -> Result<DensityEstimate>
where
    I: IntoIterator<Item = &'a ElectronConfiguration>,
    I::IntoIter: ExactSizeIterator,
{
    let iter = samples.into_iter();
    let n = iter.len();
    if n < MIN_DENSITY_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "density needs at least {MIN_DENSITY_SAMPLES} samples, got {n}"
        )));
    }
    let batches = options.batches.clamp(2, n);
    let base = n / batches;
    let mut batch_counts = vec![vec![0u64; grid.bins()]; batches];
    let mut batch_samples = vec![base; batches];
    batch_samples[batches - 1] += n - base * batches;
    let mut n_electrons = 0;
    for (s, config) in iter.enumerate() {
        let b = (s / base).min(batches - 1);
        n_electrons = config.len();
        for z in &config.z {
            if let Some(k) = grid.bin_of((z - center).norm()) {
                batch_counts[b][k] += 1;
            }
        }
    }
    let est = DensityEstimate::from_batches(
        grid.clone(),
        center,
        l0,
        n_electrons,
        batch_counts,
        batch_samples,
        options.far_field_annulus,
    );
    if !est.empty_bins.is_empty() {
        log::warn!("density bins {:?} received no samples", est.empty_bins);
    }
    Ok(est)
}

/// Source of the density entering the quasihole Berry phase.
#[derive(Debug, Clone, Copy)]
pub enum BerryPhaseMode<'a> {
    /// `ρ = ν / (2π l0²)` everywhere.
    Uniform { nu: f64 },
    Estimated(&'a DensityEstimate),
}

/// `Φ/Φ0 = R² / 2 l0²` for a disk of radius `R`.
pub fn flux_ratio(radius: f64, l0: f64) -> f64 {
    radius * radius / (2.0 * l0 * l0)
}

/// `γ = -2π ⟨n⟩_R` for a quasihole taken around a circle of radius `R`.
pub fn quasihole_berry_phase(mode: BerryPhaseMode<'_>, radius: f64, l0: f64) -> Result<f64> {
    if !(radius.is_finite() && radius >= 0.0) || !(l0.is_finite() && l0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad loop: R = {radius}, l0 = {l0}"
        )));
    }
    match mode {
        BerryPhaseMode::Uniform { nu } => {
            if !(nu > 0.0 && nu <= 1.0) {
                return Err(Error::InvalidArgument(format!("filling {nu} outside (0, 1]")));
            }
            Ok(-TAU * nu * flux_ratio(radius, l0))
        }
        BerryPhaseMode::Estimated(est) => Ok(-TAU * est.enclosed_count(radius)?.0),
    }
}

/// `e*/e = γ / (2π Φ/Φ0)`.
pub fn effective_charge(gamma: f64, flux_ratio: f64) -> Result<f64> {
    if flux_ratio.is_nan() || flux_ratio <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "flux ratio must be positive, got {flux_ratio}"
        )));
    }
    Ok(gamma / (TAU * flux_ratio))
}

/// Lowest-Landau-level bookkeeping for area `S`, electron count `N` and field
/// `B` (charge 1, ħ = c = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LandauRelations {
    /// `N(s) = S / 2π l0²`.
    pub degeneracy: f64,
    /// `N / N(s)`.
    pub filling: f64,
    /// `2π l0² n0`.
    pub filling_from_density: f64,
    /// `B S / 2π`.
    pub flux_ratio_direct: f64,
    /// `S / 2π l0²`.
    pub flux_ratio_chain: f64,
    /// `ν Φ/Φ0` from the direct flux.
    pub enclosed_direct: f64,
    /// `ν Φ/Φ0` from the chain through `l0`.
    pub enclosed_chain: f64,
    /// `|l0² B - 1|`.
    pub l0_mismatch: f64,
}

pub fn landau_relations(area: f64, l0: f64, n_electrons: f64, b_field: f64) -> Result<LandauRelations> {
    for (name, v) in [("area", area), ("l0", l0), ("N", n_electrons), ("B", b_field)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    let degeneracy = area / (TAU * l0 * l0);
    let filling = n_electrons / degeneracy;
    let n0 = n_electrons / area;
    let flux_ratio_direct = b_field * area / TAU;
    let flux_ratio_chain = area / (TAU * l0 * l0);
    Ok(LandauRelations {
        degeneracy,
        filling,
        filling_from_density: TAU * l0 * l0 * n0,
        flux_ratio_direct,
        flux_ratio_chain,
        enclosed_direct: filling * flux_ratio_direct,
        enclosed_chain: filling * flux_ratio_chain,
        l0_mismatch: (l0 * l0 * b_field - 1.0).abs(),
    })
}

/// Orbitals `N(s) = m (N_e - 1) + 1` occupied by a Laughlin droplet.
pub fn droplet_orbitals(m: u32, n_electrons: usize) -> usize {
    m as usize * (n_electrons - 1) + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: usize, m: u32) -> LaughlinConfig {
        LaughlinConfig::new(n, m, 1.0, 7).unwrap()
    }

    #[test]
    fn coincident_electrons_vanish() {
        let p = ElectronConfiguration::from_xy(&[(0.3, 0.1), (1.0, 2.0), (0.3, 0.1)]).unwrap();
        assert_eq!(log_amplitude(&cfg(3, 3), &p), LogAmplitude::Vanishing);
        let q = ElectronConfiguration::from_xy(&[(0.3, 0.1), (1.0, 2.0)]).unwrap();
        assert_eq!(
            log_amplitude_quasihole(&cfg(2, 3), &q, q.z[1]),
            LogAmplitude::Vanishing
        );
    }

    #[test]
    fn two_electron_modulus() {
        let l0 = 1.3;
        let c = LaughlinConfig::new(2, 1, l0, 0).unwrap();
        let p = ElectronConfiguration::from_xy(&[(0.0, 0.0), (2.0 * l0, 0.0)]).unwrap();
        let a = log_amplitude(&c, &p).value().unwrap();
        assert!((a.re.exp() - 2.0 * l0 * (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn quasihole_factor_is_additive() {
        let c = cfg(4, 3);
        let p = ElectronConfiguration::from_xy(&[(0.1, 0.2), (-1.0, 0.5), (0.7, -0.9), (1.5, 1.1)]).unwrap();
        let z0 = C64::new(0.4, -0.3);
        let base = log_amplitude(&c, &p).value().unwrap();
        let hole = log_amplitude_quasihole(&c, &p, z0).value().unwrap();
        let expected: C64 = p.z.iter().map(|z| (z - z0).ln()).sum();
        assert!((hole - base - expected).norm() < 1e-12);
        // far hole: modulus gains Σ ln|z_i - z0|
        let far = C64::new(1e3, 0.0);
        let hole = log_amplitude_quasihole(&c, &p, far).value().unwrap();
        let gain: f64 = p.z.iter().map(|z| (z - far).norm().ln()).sum();
        assert!((hole.re - base.re - gain).abs() < 1e-10);
    }

    #[test]
    fn large_droplet_is_finite() {
        let c = cfg(30, 3);
        let mut s = MetropolisSampler::new(c, None, 1.5).unwrap();
        s.burn_in(10);
        let a = log_amplitude(&c, &s.current()).value().unwrap();
        let b = log_amplitude(&c, &s.next().unwrap()).value().unwrap();
        assert!(a.re.is_finite() && b.re.is_finite());
        assert!((a.re - b.re).is_finite());
    }

    #[test]
    fn same_seed_same_stream() {
        let c = cfg(4, 3);
        let a: Vec<_> = MetropolisSampler::new(c, None, 1.5).unwrap().take(50).collect();
        let b: Vec<_> = MetropolisSampler::new(c, None, 1.5).unwrap().take(50).collect();
        assert_eq!(a, b);
        let other = LaughlinConfig { seed: 8, ..c };
        let d: Vec<_> = MetropolisSampler::new(other, None, 1.5).unwrap().take(50).collect();
        assert_ne!(a, d);
    }

    #[test]
    fn integer_filling_bulk_density() {
        let c = LaughlinConfig::new(4, 1, 1.0, 11).unwrap();
        let (samples, rate) = metropolis_sample(&c, None, 20_000, 500, 1.0).unwrap();
        assert!(rate > 0.05 && rate < 0.95);
        let grid = RadialGrid::uniform(6.0, 60).unwrap();
        let est = density_profile(&samples, &grid, C64::new(0.0, 0.0), 1.0, &Default::default()).unwrap();
        let (rho, err) = est.disk_average(1.0).unwrap();
        let target = 1.0 / TAU;
        assert!((rho - target).abs() <= 3.0 * err, "rho {rho} target {target} err {err}");
        let (total, terr) = est.enclosed_count(6.0).unwrap();
        assert!(total <= 4.0 + 3.0 * terr.max(1e-12) && total > 3.9);
    }

    #[test]
    fn hole_depletes_center() {
        let c = cfg(4, 3);
        let (samples, _) = metropolis_sample(&c, Some(C64::new(0.0, 0.0)), 20_000, 500, 1.5).unwrap();
        let grid = RadialGrid::uniform(8.0, 80).unwrap();
        let est = density_profile(&samples, &grid, C64::new(0.0, 0.0), 1.0, &Default::default()).unwrap();
        let (rho, _) = est.disk_average(1.0).unwrap();
        assert!(rho < 0.5 / (6.0 * PI), "{rho}");
    }

    #[test]
    fn too_few_samples_rejected() {
        let c = cfg(3, 1);
        let (samples, _) = metropolis_sample(&c, None, 999, 0, 1.0).unwrap();
        let grid = RadialGrid::uniform(5.0, 10).unwrap();
        assert!(density_profile(&samples, &grid, C64::new(0.0, 0.0), 1.0, &Default::default()).is_err());
    }

    #[test]
    fn empty_bins_flagged_and_merge_pools() {
        let c = cfg(3, 1);
        let (a, _) = metropolis_sample(&c, None, 2000, 100, 1.0).unwrap();
        let grid = RadialGrid::uniform(40.0, 20).unwrap();
        let est = density_profile(&a, &grid, C64::new(0.0, 0.0), 1.0, &Default::default()).unwrap();
        assert!(est.empty_bins.contains(&19));
        let merged = est.merge(&est).unwrap();
        assert_eq!(merged.samples(), 4000);
        assert!((merged.density[0] - est.density[0]).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        let g = quasihole_berry_phase(BerryPhaseMode::Uniform { nu: 1.0 / 3.0 }, 6f64.sqrt(), 1.0).unwrap();
        assert!((g + TAU).abs() < 1e-14);
        assert!((effective_charge(g, 3.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(quasihole_berry_phase(BerryPhaseMode::Uniform { nu: 0.4 }, 0.0, 1.0).unwrap(), 0.0);
        assert!((effective_charge(-TAU * 2.5, 2.5).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(effective_charge(0.0, 4.0).unwrap(), 0.0);
        assert!(effective_charge(1.0, 0.0).is_err());
    }

    #[test]
    fn landau_bookkeeping() {
        let l0 = 0.8;
        let n = 12.0;
        let area = TAU * l0 * l0 * n;
        let r = landau_relations(area, l0, n, 1.0 / (l0 * l0)).unwrap();
        assert!((r.filling - 1.0).abs() < 1e-14);
        assert!((r.enclosed_direct - r.enclosed_chain).abs() <= 1e-12 * r.enclosed_chain);
        for (m, ne) in [(1, 6), (3, 6), (5, 4)] {
            let ns = droplet_orbitals(m, ne);
            assert_eq!(m as usize * (ne - 1), ns - 1);
            let rel = landau_relations(TAU * ns as f64, 1.0, ne as f64, 1.0).unwrap();
            assert!((rel.degeneracy - ns as f64).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn exchange_sign(m in prop_oneof![Just(1u32), Just(3), Just(5)],
                         xs in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..7),
                         pair in (0usize..100, 0usize..100)) {
            let n = xs.len();
            let (i, j) = (pair.0 % n, pair.1 % n);
            prop_assume!(i != j);
            let c = LaughlinConfig::new(n, m, 1.0, 0).unwrap();
            let p = ElectronConfiguration::from_xy(&xs).unwrap();
            let (Some(a), Some(b)) = (log_amplitude(&c, &p).value(), log_amplitude(&c, &p.swapped(i, j)).value()) else {
                return Ok(());
            };
            let ratio = (b - a).exp();
            let expected = if m % 2 == 1 { -1.0 } else { 1.0 };
            prop_assert!((ratio - C64::new(expected, 0.0)).norm() < 1e-9);
        }

        #[test]
        fn uniform_identity(nu in 1e-3f64..1.0, r in 0.0f64..20.0) {
            let g = quasihole_berry_phase(BerryPhaseMode::Uniform { nu }, r, 1.0).unwrap();
            prop_assert!((g / -TAU - nu * flux_ratio(r, 1.0)).abs() <= 1e-15 * (1.0 + nu * flux_ratio(r, 1.0)));
            if r > 1e-6 {
                prop_assert!((effective_charge(g, flux_ratio(r, 1.0)).unwrap() + nu).abs() <= 1e-14);
            }
        }
    }
}
