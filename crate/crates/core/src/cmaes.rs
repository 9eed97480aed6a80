//! (mu/mu_w, lambda)-CMA-ES with an ask/tell interface.
//!
//! Learning rates follow Hansen's tutorial defaults for the problem dimension.
//! Candidates can optionally be repaired into a box by coordinate-wise
//! clipping. The objective is evaluated at the repaired point while the
//! distribution update learns from the raw Gaussian sample, and the mean is
//! projected back into the box after each update. Learning from clipped points
//! instead biases steps along any coordinate that sits on a bound, which
//! inflates the step size without limit when that coordinate does not affect
//! the loss.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::Rng;

/// Mutable search distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaState {
    pub mean: DVector<f64>,
    pub step_size: f64,
    pub covariance: DMatrix<f64>,
    /// Conjugate evolution path used for step-size control.
    pub path_sigma: DVector<f64>,
    /// Evolution path used for the rank-one covariance update.
    pub path_c: DVector<f64>,
    pub generation: usize,
}

/// Strategy constants derived from dimension and population size.
#[derive(Debug, Clone)]
pub struct CmaConstants {
    pub dim: usize,
    pub population_size: usize,
    pub parents: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_c: f64,
    pub c_sigma: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub d_sigma: f64,
    pub chi_n: f64,
}

impl CmaConstants {
    pub fn new(dim: usize, population_size: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if population_size < 2 {
            return Err(invalid(format!(
                "population size must be at least 2, got {population_size}"
            )));
        }
        let n = dim as f64;
        let parents = population_size / 2;
        let raw: Vec<f64> = (1..=parents)
            .map(|i| ((population_size as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

        Ok(Self {
            dim,
            population_size,
            parents,
            weights,
            mu_eff,
            c_c,
            c_sigma,
            c_1,
            c_mu,
            d_sigma,
            chi_n,
        })
    }
}

/// Eigen-decomposition `C = B diag(d^2) B^T`.
struct Decomposition {
    basis: DMatrix<f64>,
    scales: DVector<f64>,
}

fn decompose(covariance: &DMatrix<f64>) -> Result<Decomposition> {
    let sym = (covariance + covariance.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("covariance has non-finite entries".into()));
    }
    let eig = sym
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("covariance eigendecomposition did not converge".into()))?;
    if let Some(bad) = eig.eigenvalues.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Numerical(format!(
            "covariance is not positive definite (eigenvalue {bad})"
        )));
    }
    Ok(Decomposition {
        scales: eig.eigenvalues.map(f64::sqrt),
        basis: eig.eigenvectors,
    })
}

/// One generation of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// Raw draws from the search distribution.
    samples: Vec<DVector<f64>>,
    /// Box-repaired points to evaluate.
    candidates: Vec<DVector<f64>>,
}

impl Population {
    /// Population whose raw samples are the given points.
    pub fn from_points(points: Vec<DVector<f64>>) -> Self {
        Self {
            samples: points.clone(),
            candidates: points,
        }
    }

    pub fn candidates(&self) -> &[DVector<f64>] {
        &self.candidates
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// CMA-ES optimizer holding its constants, state and optional box repair.
#[derive(Debug, Clone)]
pub struct CmaEs {
    constants: CmaConstants,
    state: CmaState,
    repair: Option<(f64, f64)>,
}

impl CmaEs {
    /// Starts from `mean` with isotropic covariance and step size `step_size`.
    pub fn new(mean: &[f64], step_size: f64, population_size: usize) -> Result<Self> {
        let constants = CmaConstants::new(mean.len(), population_size)?;
        if !(step_size.is_finite() && step_size >= 0.0) {
            return Err(invalid(format!("step size must be non-negative, got {step_size}")));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial mean must be finite"));
        }
        let n = mean.len();
        Ok(Self {
            state: CmaState {
                mean: DVector::from_column_slice(mean),
                step_size,
                covariance: DMatrix::identity(n, n),
                path_sigma: DVector::zeros(n),
                path_c: DVector::zeros(n),
                generation: 0,
            },
            constants,
            repair: None,
        })
    }

    /// Clips every sampled coordinate into `[lo, hi]`.
    pub fn with_box(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(invalid(format!("box must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        self.state.mean.apply(|v| *v = v.clamp(lo, hi));
        self.repair = Some((lo, hi));
        Ok(self)
    }

    pub fn constants(&self) -> &CmaConstants {
        &self.constants
    }

    pub fn state(&self) -> &CmaState {
        &self.state
    }

    /// Replaces the state, e.g. to restart after a numerical failure with a
    /// larger step size.
    pub fn set_state(&mut self, state: CmaState) -> Result<()> {
        let n = self.constants.dim;
        if state.mean.len() != n
            || state.covariance.shape() != (n, n)
            || state.path_sigma.len() != n
            || state.path_c.len() != n
        {
            return Err(invalid("state dimensions do not match the optimizer"));
        }
        self.state = state;
        Ok(())
    }

    fn repaired(&self, mut x: DVector<f64>) -> DVector<f64> {
        if let Some((lo, hi)) = self.repair {
            x.apply(|v| *v = v.clamp(lo, hi));
        }
        x
    }

    /// Samples `population_size` points from `N(mean, step_size^2 C)` and
    /// repairs them into the box.
    pub fn ask(&self, rng: &mut Rng) -> Result<Population> {
        let dec = decompose(&self.state.covariance)?;
        let n = self.constants.dim;
        let mut samples = Vec::with_capacity(self.constants.population_size);
        for _ in 0..self.constants.population_size {
            let z = DVector::from_fn(n, |i, _| {
                let draw: f64 = StandardNormal.sample(rng);
                dec.scales[i] * draw
            });
            samples.push(&self.state.mean + (&dec.basis * z) * self.state.step_size);
        }
        let candidates = samples.iter().map(|x| self.repaired(x.clone())).collect();
        Ok(Population { samples, candidates })
    }

    /// Updates mean, evolution paths, covariance and step size from the
    /// losses of `population`'s candidates (lower is better).
    pub fn tell(&mut self, population: &Population, losses: &[f64]) -> Result<()> {
        let candidates = population.samples();
        let c = &self.constants;
        let n = c.dim;
        if candidates.len() != c.population_size || losses.len() != candidates.len() {
            return Err(invalid(format!(
                "expected {} candidates and losses, got {} and {}",
                c.population_size,
                candidates.len(),
                losses.len()
            )));
        }
        if let Some(bad) = losses.iter().find(|l| !l.is_finite()) {
            return Err(invalid(format!("loss values must be finite, got {bad}")));
        }
        if candidates.iter().any(|x| x.len() != n) {
            return Err(invalid("candidate dimension mismatch"));
        }

        let dec = decompose(&self.state.covariance)?;
        let mut order: Vec<usize> = (0..losses.len()).collect();
        order.sort_by(|&a, &b| losses[a].total_cmp(&losses[b]));

        let st = &mut self.state;
        let sigma = st.step_size;
        let old_mean = st.mean.clone();
        let mut new_mean = DVector::zeros(n);
        for (w, &idx) in c.weights.iter().zip(&order) {
            new_mean += &candidates[idx] * *w;
        }

        if let Some((lo, hi)) = self.repair {
            new_mean.apply(|v| *v = v.clamp(lo, hi));
        }

        if sigma == 0.0 {
            st.mean = new_mean;
            st.generation += 1;
            return Ok(());
        }

        let steps: Vec<DVector<f64>> = order[..c.parents]
            .iter()
            .map(|&idx| (&candidates[idx] - &old_mean) / sigma)
            .collect();
        let y_w = (&new_mean - &old_mean) / sigma;

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let whitened = {
            let mut proj = dec.basis.transpose() * &y_w;
            for (v, d) in proj.iter_mut().zip(dec.scales.iter()) {
                *v /= d;
            }
            &dec.basis * proj
        };
        st.path_sigma = &st.path_sigma * (1.0 - c.c_sigma)
            + whitened * (c.c_sigma * (2.0 - c.c_sigma) * c.mu_eff).sqrt();

        let ps_norm = st.path_sigma.norm();
        let generations = (st.generation + 1) as f64;
        let ps_correction = (1.0 - (1.0 - c.c_sigma).powf(2.0 * generations)).sqrt();
        let h_sigma = ps_norm / ps_correction / c.chi_n < 1.4 + 2.0 / (n as f64 + 1.0);

        st.path_c = &st.path_c * (1.0 - c.c_c);
        if h_sigma {
            st.path_c += &y_w * (c.c_c * (2.0 - c.c_c) * c.mu_eff).sqrt();
        }

        let delta_h = if h_sigma { 0.0 } else { c.c_c * (2.0 - c.c_c) };
        let mut cov = &st.covariance * (1.0 - c.c_1 - c.c_mu + c.c_1 * delta_h);
        cov += (&st.path_c * st.path_c.transpose()) * c.c_1;
        for (w, y) in c.weights.iter().zip(&steps) {
            cov += (y * y.transpose()) * (c.c_mu * w);
        }
        st.covariance = (&cov + cov.transpose()) * 0.5;

        st.step_size = sigma * ((c.c_sigma / c.d_sigma) * (ps_norm / c.chi_n - 1.0)).exp();
        st.mean = new_mean;
        st.generation += 1;
        if !st.step_size.is_finite() {
            return Err(Error::Numerical("step size diverged".into()));
        }
        Ok(())
    }
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub generations: usize,
}

/// Runs CMA-ES on `objective` until the best value drops below `target` or
/// `max_generations` is reached. Returns the best point seen.
pub fn minimize<F: Fn(&DVector<f64>) -> f64>(
    mut optimizer: CmaEs,
    objective: F,
    max_generations: usize,
    target: f64,
    rng: &mut Rng,
) -> Result<Minimum> {
    let mut best = Minimum {
        x: optimizer.state().mean.clone(),
        value: f64::INFINITY,
        generations: 0,
    };
    for generation in 1..=max_generations {
        let population = optimizer.ask(rng)?;
        let losses: Vec<f64> = population.candidates().iter().map(&objective).collect();
        for (x, &l) in population.candidates().iter().zip(&losses) {
            if l < best.value {
                best.value = l;
                best.x = x.clone();
            }
        }
        optimizer.tell(&population, &losses)?;
        best.generations = generation;
        if best.value < target {
            break;
        }
    }
    Ok(best)
}
