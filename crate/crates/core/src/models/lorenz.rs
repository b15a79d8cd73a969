//! Forced Lorenz system driven by scaled Brownian motion.
//!
//! ```text
//! x1' = sigma (x2 - x1) + U(t)
//! x2' = r x1 - x2 - x1 x3
//! x3' = x1 x2 - b x3
//! ```
//!
//! The excitation is `U(k) = U(k-1) + alpha sqrt(dt) z_k` with `U(0) = 0`,
//! sampled at `t = k dt`. The response is the bounding-ellipsoid quadratic
//! form with `R = r + sigma`; the unforced flow never leaves `g <= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{DynamicModel, ExcitationSample, PerformanceTrace, StateHistory};

/// Any state coordinate beyond this magnitude aborts the evaluation.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// How the sampled excitation is held between grid instants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForcingHold {
    /// `U(t) = U(k)` on `[k dt, (k+1) dt)`.
    Zero,
    /// `U(t)` interpolated linearly between `U(k)` and `U(k+1)`.
    #[default]
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzParams {
    pub sigma: f64,
    pub b_geom: f64,
    pub r_rayleigh: f64,
    /// Excitation scale.
    pub alpha: f64,
    /// Sampling interval in seconds.
    pub dt: f64,
    /// Duration `T` in seconds; `T / dt` must be a positive integer.
    pub horizon: f64,
    pub x0: [f64; 3],
    /// Fixed RK4 substeps per sampling interval.
    pub substeps: usize,
    pub forcing: ForcingHold,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            b_geom: 1.0,
            r_rayleigh: 26.0,
            alpha: 3.0,
            dt: 0.1,
            horizon: 100.0,
            x0: [5.5, 5.5, 25.5],
            substeps: 10,
            forcing: ForcingHold::Linear,
        }
    }
}

impl LorenzParams {
    /// Nontrivial equilibrium `(sqrt(b(r-1)), sqrt(b(r-1)), r-1)` of the unforced flow.
    pub fn equilibrium(&self) -> [f64; 3] {
        let c = (self.b_geom * (self.r_rayleigh - 1.0)).sqrt();
        [c, c, self.r_rayleigh - 1.0]
    }

    /// Number of sampling steps `D = T / dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        let ratio = self.horizon / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::invalid(
                "horizon",
                format!("horizon / dt = {ratio} is not a positive integer"),
            ));
        }
        Ok(steps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma", self.sigma), ("b_geom", self.b_geom), ("r_rayleigh", self.r_rayleigh)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be nonnegative"));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("x0", "must be finite"));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        self.steps().map(|_| ())
    }
}

/// Bounding ellipsoid with `R = r + sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidResponse {
    pub radius: f64,
    sigma: f64,
    b_geom: f64,
}

impl EllipsoidResponse {
    pub fn new(params: &LorenzParams) -> Self {
        Self {
            radius: params.r_rayleigh + params.sigma,
            sigma: params.sigma,
            b_geom: params.b_geom,
        }
    }

    #[inline]
    pub fn value(&self, x: &[f64; 3]) -> f64 {
        let r2 = self.radius * self.radius;
        x[0] * x[0] / (r2 * self.b_geom / self.sigma)
            + x[1] * x[1] / (self.b_geom * r2)
            + (x[2] - self.radius) * (x[2] - self.radius) / r2
    }
}

/// Discretized Brownian forcing `U(0..=D)`.
pub fn brownian_excitation(z: &[f64], alpha: f64, dt: f64) -> Result<Vec<f64>> {
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha", "must be nonnegative"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let scale = alpha * dt.sqrt();
    let mut u = Vec::with_capacity(z.len() + 1);
    let mut acc = 0.0;
    u.push(acc);
    for &zk in z {
        acc += scale * zk;
        u.push(acc);
    }
    Ok(u)
}

#[inline]
pub fn lorenz_rhs(x: &[f64; 3], u: f64, params: &LorenzParams) -> [f64; 3] {
    [
        params.sigma * (x[1] - x[0]) + u,
        params.r_rayleigh * x[0] - x[1] - x[0] * x[2],
        x[0] * x[1] - params.b_geom * x[2],
    ]
}

#[inline]
fn axpy(x: &[f64; 3], h: f64, k: &[f64; 3]) -> [f64; 3] {
    [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]]
}

#[inline]
fn rk4_step(x: &[f64; 3], h: f64, u: [f64; 3], params: &LorenzParams) -> [f64; 3] {
    let k1 = lorenz_rhs(x, u[0], params);
    let k2 = lorenz_rhs(&axpy(x, 0.5 * h, &k1), u[1], params);
    let k3 = lorenz_rhs(&axpy(x, 0.5 * h, &k2), u[1], params);
    let k4 = lorenz_rhs(&axpy(x, h, &k3), u[2], params);
    [
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        x[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Integrated forced Lorenz system with the ellipsoid response.
#[derive(Debug, Clone)]
pub struct LorenzModel {
    params: LorenzParams,
    steps: usize,
    response: EllipsoidResponse,
}

impl LorenzModel {
    pub fn new(params: LorenzParams) -> Result<Self> {
        params.validate()?;
        let steps = params.steps()?;
        let response = EllipsoidResponse::new(&params);
        Ok(Self {
            params,
            steps,
            response,
        })
    }

    pub fn params(&self) -> &LorenzParams {
        &self.params
    }

    pub fn response(&self) -> &EllipsoidResponse {
        &self.response
    }

    /// Debug hook: the trace together with the sampled states `X(k dt)`.
    pub fn simulate_states(&self, z: &ExcitationSample) -> Result<(PerformanceTrace, Vec<[f64; 3]>)> {
        let (trace, history) = self.run(z, None)?;
        let states = history
            .values
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Ok((trace, states))
    }

    /// Integrates from `start` (step index and the trace/states up to it).
    fn run(
        &self,
        z: &ExcitationSample,
        start: Option<(usize, &PerformanceTrace, &StateHistory)>,
    ) -> Result<(PerformanceTrace, StateHistory)> {
        z.expect_dim(self.steps)?;
        let p = &self.params;
        let u = brownian_excitation(z.as_slice(), p.alpha, p.dt)?;
        let mut values = Vec::with_capacity(self.steps + 1);
        let mut states = Vec::with_capacity(3 * (self.steps + 1));
        let (first, mut x) = match start {
            None => {
                values.push(self.response.value(&p.x0));
                states.extend_from_slice(&p.x0);
                (0, p.x0)
            }
            Some((step, trace, history)) => {
                if step > self.steps || trace.horizon_steps() != self.steps || history.stride != 3 {
                    return Err(Error::Contract("resume point does not match this model".into()));
                }
                values.extend_from_slice(&trace.values()[..=step]);
                states.extend_from_slice(&history.values[..3 * (step + 1)]);
                let s = history.state(step);
                (step, [s[0], s[1], s[2]])
            }
        };

        let h = p.dt / p.substeps as f64;
        let m = p.substeps as f64;
        for k in first..self.steps {
            let (u0, u1) = match p.forcing {
                ForcingHold::Zero => (u[k], u[k]),
                ForcingHold::Linear => (u[k], u[k + 1]),
            };
            let du = u1 - u0;
            for s in 0..p.substeps {
                let s = s as f64;
                let forcing = [
                    u0 + du * (s / m),
                    u0 + du * ((s + 0.5) / m),
                    u0 + du * ((s + 1.0) / m),
                ];
                x = rk4_step(&x, h, forcing, p);
            }
            if x.iter().any(|v| !(v.abs() <= DIVERGENCE_LIMIT)) {
                return Err(Error::Divergence { step: k + 1 });
            }
            values.push(self.response.value(&x));
            states.extend_from_slice(&x);
        }
        let trace = PerformanceTrace::new(values, p.dt)?;
        Ok((trace, StateHistory { stride: 3, values: states }))
    }
}

/// Integrates the forced system for one excitation sample.
pub fn simulate_lorenz(z: &ExcitationSample, params: &LorenzParams) -> Result<PerformanceTrace> {
    LorenzModel::new(params.clone())?.evaluate(z)
}

impl DynamicModel for LorenzModel {
    fn dim(&self) -> usize {
        self.steps
    }

    fn horizon_steps(&self) -> usize {
        self.steps
    }

    fn evaluate(&self, z: &ExcitationSample) -> Result<PerformanceTrace> {
        self.run(z, None).map(|(trace, _)| trace)
    }

    fn causal_prefix(&self, step: usize) -> Option<usize> {
        // X(k) depends on U(0..=k) under linear hold and on U(0..k) under zero hold.
        Some(match self.params.forcing {
            ForcingHold::Linear => step.min(self.steps),
            ForcingHold::Zero => step.saturating_sub(1).min(self.steps),
        })
    }

    fn evaluate_recording(&self, z: &ExcitationSample) -> Option<Result<(PerformanceTrace, StateHistory)>> {
        Some(self.run(z, None))
    }

    fn resume(
        &self,
        z: &ExcitationSample,
        prefix_trace: &PerformanceTrace,
        prefix_states: &StateHistory,
        step: usize,
    ) -> Option<Result<(PerformanceTrace, StateHistory)>> {
        Some(self.run(z, Some((step, prefix_trace, prefix_states))))
    }
}
