//! Hebbian and homeostatically scaled synaptic dynamics.
//!
//! The basic rate rule grows a weight in proportion to the product of pre-
//! and postsynaptic activity. The scaled rule adds a slower term that pulls
//! the postsynaptic activity toward a target, which stabilizes the weight at
//! a closed-form fixed point for linear neurons. Both rules are integrated
//! with explicit Euler; an RK4 mode exists for cross-checking conclusions
//! against the integration scheme.

use crate::error::{CoreError, Result};
use crate::num::Real;

/// Rates and targets of the plasticity rules.
///
/// `kappa = mu / gamma` is always recomputed from its parts.
#[derive(Debug, Clone, Copy)]
pub struct PlasticityParams<T: Real> {
    /// Hebbian learning rate, > 0.
    pub mu: T,
    /// Homeostatic scaling rate, > 0. Should be well below `mu`.
    pub gamma: T,
    /// Target postsynaptic activity, >= 0.
    pub v_target: T,
}

impl<T: Real> PlasticityParams<T> {
    pub fn new(mu: T, gamma: T, v_target: T) -> Result<Self> {
        if mu <= T::zero() || gamma <= T::zero() {
            return Err(CoreError::InvalidInput(
                "mu and gamma must be positive".into(),
            ));
        }
        if v_target < T::zero() {
            return Err(CoreError::InvalidInput("v_target must be >= 0".into()));
        }
        Ok(Self { mu, gamma, v_target })
    }

    /// Construct from the ratio `kappa = mu / gamma` instead of `gamma`.
    pub fn from_kappa(mu: T, kappa: T, v_target: T) -> Result<Self> {
        if kappa <= T::zero() {
            return Err(CoreError::InvalidInput("kappa must be positive".into()));
        }
        Self::new(mu, mu / kappa, v_target)
    }

    /// Ratio of the fast to the slow rate.
    pub fn kappa(&self) -> T {
        self.mu / self.gamma
    }

    /// Set when the scaling rate is not actually slower than learning.
    pub fn timescale_warning(&self) -> bool {
        self.gamma >= self.mu
    }
}

/// Scalar synapse: one weight plus the activities driving it.
#[derive(Debug, Clone, Copy)]
pub struct SynapseState<T: Real> {
    pub w: T,
    pub u_pre: T,
    pub v_post: T,
}

impl<T: Real> SynapseState<T> {
    pub fn new(w: T, u_pre: T, v_post: T) -> Self {
        Self { w, u_pre, v_post }
    }
}

/// `dw/dt = mu * u * v` — grows without bound for persistent coactivity.
pub fn hebbian_derivative<T: Real>(s: &SynapseState<T>, p: &PlasticityParams<T>) -> T {
    p.mu * s.u_pre * s.v_post
}

/// `dw/dt = mu * u * v + gamma * (v_target - v) * w^2`.
pub fn spass_derivative<T: Real>(s: &SynapseState<T>, p: &PlasticityParams<T>) -> T {
    p.mu * s.u_pre * s.v_post + p.gamma * (p.v_target - s.v_post) * s.w * s.w
}

/// Same rule factored through `kappa`: `mu * (u v + (v_target - v) w^2 / kappa)`.
///
/// Algebraically identical to [`spass_derivative`]; kept as the second route
/// for the identity test.
pub fn spass_derivative_kappa_form<T: Real>(s: &SynapseState<T>, p: &PlasticityParams<T>) -> T {
    p.mu * (s.u_pre * s.v_post + (p.v_target - s.v_post) * s.w * s.w / p.kappa())
}

/// Stable excitatory weight fixed point of the scaled rule for a linear
/// neuron: `w* = v_T/(2u) + sqrt(kappa u + (v_T/(2u))^2)`.
///
/// This is the positive root of `u w^2 - v_T w - kappa u^2 = 0`, the
/// stationarity condition of the scaled rule with `v = w u`. It satisfies
/// `w* u == v*` exactly and is the value the ODE integrator converges to.
pub fn spass_fixed_point_weight<T: Real>(u: T, p: &PlasticityParams<T>) -> Result<T> {
    if u == T::zero() {
        return Err(CoreError::Singularity(
            "fixed-point weight undefined at u = 0".into(),
        ));
    }
    if u < T::zero() {
        return Err(CoreError::InvalidInput("u must be positive".into()));
    }
    let half = p.v_target / (u + u);
    Ok(half + (p.kappa() * u + half * half).sqrt())
}

/// Stable postsynaptic activity: `v* = v_T/2 + sqrt(kappa u^3 + (v_T/2)^2)`.
pub fn spass_fixed_point_activity<T: Real>(u: T, p: &PlasticityParams<T>) -> Result<T> {
    if u < T::zero() {
        return Err(CoreError::InvalidInput("u must be >= 0".into()));
    }
    let half = p.v_target / T::from_f64_lit(2.0);
    Ok(half + (p.kappa() * u * u * u + half * half).sqrt())
}

/// Which rule the integrator applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Hebbian,
    Spass,
}

/// Integration scheme. Euler is the primary path; RK4 exists so that
/// conclusions can be checked against the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    Rk4,
}

#[derive(Debug, Clone)]
pub struct IntegrateConfig<T: Real> {
    pub dt: T,
    pub t_max: T,
    /// When true, `v` is recomputed as `w * u` every step.
    pub linear_neuron: bool,
    pub scheme: Scheme,
    /// Converged when `|dw/dt|` stays below this for `convergence_window`
    /// consecutive steps.
    pub convergence_tol: T,
    pub convergence_window: usize,
    /// `|w|` beyond this raises a divergence error.
    pub overflow_guard: T,
    /// Record every k-th step into the trajectory (the final step is always
    /// recorded).
    pub record_stride: usize,
}

impl<T: Real> IntegrateConfig<T> {
    pub fn new(dt: T, t_max: T, linear_neuron: bool) -> Self {
        Self {
            dt,
            t_max,
            linear_neuron,
            scheme: Scheme::Euler,
            convergence_tol: T::from_f64_lit(1e-8),
            convergence_window: 100,
            overflow_guard: T::from_f64_lit(1e12),
            record_stride: 1,
        }
    }
}

/// Sampled `(t, w, v)` trajectory plus convergence metadata.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub samples: Vec<(T, T, T)>,
    pub converged: bool,
    pub steps: usize,
    pub final_w: T,
    pub final_v: T,
}

impl<T: Real> Trajectory<T> {
    /// CSV rows `t,w,v` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,w,v\n");
        for (t, w, v) in &self.samples {
            out.push_str(&format!("{t},{w},{v}\n"));
        }
        out
    }
}

fn derivative<T: Real>(rule: Rule, s: &SynapseState<T>, p: &PlasticityParams<T>) -> T {
    match rule {
        Rule::Hebbian => hebbian_derivative(s, p),
        Rule::Spass => spass_derivative(s, p),
    }
}

/// Integrate one synapse under the chosen rule.
///
/// In linear-neuron mode the postsynaptic activity is `w * u` at every
/// evaluation; otherwise `v` stays fixed at its initial value.
pub fn integrate<T: Real>(
    rule: Rule,
    s0: SynapseState<T>,
    p: &PlasticityParams<T>,
    cfg: &IntegrateConfig<T>,
) -> Result<Trajectory<T>> {
    if cfg.dt <= T::zero() || cfg.t_max < cfg.dt {
        return Err(CoreError::InvalidInput(
            "need dt > 0 and t_max >= dt".into(),
        ));
    }
    let steps = (cfg.t_max / cfg.dt).to_usize().ok_or_else(|| {
        CoreError::InvalidInput("t_max / dt does not fit in usize".into())
    })?;

    let v_of = |w: T| {
        if cfg.linear_neuron {
            w * s0.u_pre
        } else {
            s0.v_post
        }
    };
    let f = |w: T| {
        let s = SynapseState::new(w, s0.u_pre, v_of(w));
        derivative(rule, &s, p)
    };

    let mut w = s0.w;
    let mut quiet_steps = 0usize;
    let mut converged = false;
    let mut samples = Vec::with_capacity(steps / cfg.record_stride.max(1) + 2);
    samples.push((T::zero(), w, v_of(w)));

    for step in 0..steps {
        let dw = match cfg.scheme {
            Scheme::Euler => f(w),
            Scheme::Rk4 => {
                let h = cfg.dt;
                let k1 = f(w);
                let k2 = f(w + h / T::from_f64_lit(2.0) * k1);
                let k3 = f(w + h / T::from_f64_lit(2.0) * k2);
                let k4 = f(w + h * k3);
                (k1 + k2 + k2 + k3 + k3 + k4) / T::from_f64_lit(6.0)
            }
        };
        w = w + cfg.dt * dw;
        if !w.is_finite() || w.abs() > cfg.overflow_guard {
            return Err(CoreError::Divergence {
                step,
                detail: format!("|w| exceeded overflow guard {}", cfg.overflow_guard),
            });
        }
        if dw.abs() < cfg.convergence_tol {
            quiet_steps += 1;
            if quiet_steps >= cfg.convergence_window {
                converged = true;
            }
        } else {
            quiet_steps = 0;
        }
        let t = cfg.dt * T::from_usize(step + 1).unwrap();
        if (step + 1) % cfg.record_stride.max(1) == 0 || step + 1 == steps {
            samples.push((t, w, v_of(w)));
        }
    }

    Ok(Trajectory {
        converged,
        steps,
        final_w: w,
        final_v: v_of(w),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(mu: f64, gamma: f64, v_t: f64) -> PlasticityParams<f64> {
        PlasticityParams::new(mu, gamma, v_t).unwrap()
    }

    #[test]
    fn hebbian_hand_values() {
        let p = params(0.1, 0.001, 1.0);
        assert_eq!(hebbian_derivative(&SynapseState::new(0.0, 1.0, 1.0), &p), 0.1);
        assert_eq!(hebbian_derivative(&SynapseState::new(0.0, 0.0, 5.0), &p), 0.0);
        let p2 = params(0.5, 0.001, 1.0);
        assert_eq!(hebbian_derivative(&SynapseState::new(0.0, 2.0, 3.0), &p2), 3.0);
    }

    #[test]
    fn spass_hand_values() {
        // w = 0: scaling term vanishes.
        let p = params(0.1, 0.01, 1.0);
        let s = SynapseState::new(0.0, 2.0, 3.0);
        assert_eq!(spass_derivative(&s, &p), 0.1 * 2.0 * 3.0);
        // v == v_target: homeostatic term vanishes.
        let s = SynapseState::new(5.0, 2.0, 1.0);
        assert_eq!(spass_derivative(&s, &p), 0.1 * 2.0 * 1.0);
        // Hand evaluation.
        let s = SynapseState::new(1.0, 1.0, 2.0);
        assert_relative_eq!(spass_derivative(&s, &p), 0.19, max_relative = 1e-15);
    }

    #[test]
    fn kappa_form_matches_product_form() {
        // 4-ulp agreement between the two algebraic routes.
        let mut rng = crate::rng::SeedStream::new(17);
        for _ in 0..1000 {
            let p = params(
                0.01 + rng.uniform(),
                0.001 + 0.1 * rng.uniform(),
                2.0 * rng.uniform(),
            );
            let s = SynapseState::new(
                4.0 * rng.uniform() - 2.0,
                2.0 * rng.uniform(),
                4.0 * rng.uniform() - 2.0,
            );
            let a = spass_derivative(&s, &p);
            let b = spass_derivative_kappa_form(&s, &p);
            // Units-in-the-last-place of the dominant summand: the two
            // routes differ only by rounding of the summed terms, so the
            // bound is relative to the larger term, not the (possibly
            // cancelled) result.
            let term = (p.mu * s.u_pre * s.v_post)
                .abs()
                .max((p.gamma * (p.v_target - s.v_post) * s.w * s.w).abs());
            let ulp = term.max(a.abs()).max(b.abs()) * f64::EPSILON;
            assert!((a - b).abs() <= 4.0 * ulp, "{a} vs {b}");
        }
    }

    #[test]
    fn fixed_point_weight_hand_values() {
        // v_target = 0: sqrt(kappa * u).
        let p = PlasticityParams::from_kappa(1.0, 2.0, 0.0).unwrap();
        assert_relative_eq!(
            spass_fixed_point_weight(2.0, &p).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        // kappa -> 0 limit approaches v_T / u; checked at tiny kappa.
        let p = PlasticityParams::from_kappa(1.0, 1e-14, 2.0).unwrap();
        assert_relative_eq!(
            spass_fixed_point_weight(1.0, &p).unwrap(),
            2.0,
            max_relative = 1e-6
        );
        let p = PlasticityParams::from_kappa(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            spass_fixed_point_weight(1.0, &p).unwrap(),
            0.5 + 1.25f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn fixed_point_weight_singularity_at_zero() {
        let p = params(0.1, 0.01, 1.0);
        assert!(matches!(
            spass_fixed_point_weight(0.0, &p),
            Err(CoreError::Singularity(_))
        ));
    }

    #[test]
    fn fixed_point_activity_hand_values() {
        let p = PlasticityParams::from_kappa(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(spass_fixed_point_activity(0.0, &p).unwrap(), 1.0);
        let p0 = PlasticityParams::from_kappa(1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(spass_fixed_point_activity(1.0, &p0).unwrap(), 1.0);
        assert_relative_eq!(
            spass_fixed_point_activity(1.0, &p).unwrap(),
            0.5 + 1.25f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn fixed_point_consistency_grid() {
        // v* == w* u for the single-synapse linear neuron.
        for &u in &[0.5, 1.0, 2.0] {
            for &v_t in &[0.5, 1.0, 2.0] {
                for &kappa in &[0.5, 1.0, 2.0] {
                    let p = PlasticityParams::from_kappa(1.0, kappa, v_t).unwrap();
                    let w_star = spass_fixed_point_weight(u, &p).unwrap();
                    let v_star = spass_fixed_point_activity(u, &p).unwrap();
                    assert_relative_eq!(v_star, w_star * u, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn hebbian_constant_drive_grows_linearly() {
        let p = params(0.1, 0.001, 1.0);
        let cfg = IntegrateConfig::new(0.01, 10.0, false);
        let tr = integrate(Rule::Hebbian, SynapseState::new(0.5, 1.0, 1.0), &p, &cfg).unwrap();
        assert!(!tr.converged);
        // w(t) = w0 + 0.1 t under Euler exactly (constant derivative).
        assert_relative_eq!(tr.final_w, 0.5 + 0.1 * 10.0, max_relative = 1e-10);
    }

    #[test]
    fn hebbian_linear_neuron_diverges() {
        let p = params(1.0, 0.001, 1.0);
        let mut cfg = IntegrateConfig::new(0.01, 1e6, true);
        cfg.record_stride = 1000;
        let err = integrate(Rule::Hebbian, SynapseState::new(0.5, 1.0, 0.5), &p, &cfg);
        assert!(matches!(err, Err(CoreError::Divergence { .. })));
    }

    #[test]
    fn spass_converges_to_fixed_point() {
        let p = PlasticityParams::from_kappa(1.0, 1.0, 1.0).unwrap();
        let w_star = spass_fixed_point_weight(1.0, &p).unwrap();
        let mut cfg = IntegrateConfig::new(1e-3, 50.0, true);
        cfg.record_stride = 1000;
        for w0 in [0.1 * w_star, 0.5 * w_star, 2.0 * w_star, 10.0 * w_star] {
            let tr = integrate(Rule::Spass, SynapseState::new(w0, 1.0, 0.0), &p, &cfg).unwrap();
            assert!(tr.converged, "w0 = {w0}");
            assert_relative_eq!(tr.final_w, w_star, max_relative = 1e-4);
        }
    }

    #[test]
    fn spass_at_fixed_point_stays_put() {
        let p = PlasticityParams::from_kappa(1.0, 1.0, 1.0).unwrap();
        let w_star: f64 = spass_fixed_point_weight(1.0, &p).unwrap();
        let mut cfg = IntegrateConfig::new(1e-3, 10.0, true);
        cfg.record_stride = 1000;
        let tr = integrate(Rule::Spass, SynapseState::new(w_star, 1.0, 0.0), &p, &cfg).unwrap();
        let drift = (tr.final_w - w_star).abs();
        assert!(drift < 1e-12 * tr.steps as f64, "drift {drift}");
    }

    #[test]
    fn euler_and_rk4_agree_on_the_fixed_point() {
        let p = PlasticityParams::from_kappa(1.0, 2.0, 0.5).unwrap();
        let w_star = spass_fixed_point_weight(1.5, &p).unwrap();
        for scheme in [Scheme::Euler, Scheme::Rk4] {
            let mut cfg = IntegrateConfig::new(1e-3, 50.0, true);
            cfg.scheme = scheme;
            cfg.record_stride = 1000;
            let tr = integrate(Rule::Spass, SynapseState::new(0.2, 1.5, 0.0), &p, &cfg).unwrap();
            assert_relative_eq!(tr.final_w, w_star, max_relative = 1e-4);
        }
    }

    #[test]
    fn trajectory_csv_header() {
        let p = params(0.1, 0.001, 1.0);
        let cfg = IntegrateConfig::new(0.1, 0.5, false);
        let tr = integrate(Rule::Hebbian, SynapseState::new(0.0, 1.0, 1.0), &p, &cfg).unwrap();
        assert!(tr.to_csv().starts_with("t,w,v\n"));
    }

    #[test]
    fn timescale_warning_flag() {
        assert!(params(0.1, 0.1, 1.0).timescale_warning());
        assert!(!params(0.1, 0.001, 1.0).timescale_warning());
    }
}
