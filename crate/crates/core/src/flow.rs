//! Normalized gradient flows of the model solutions, on the sphere, on the
//! model boundaries, and on the a < 0 warped products.
//!
//! The flow of ∇f/|∇f| is integrated with classical RK4 and per-step
//! reprojection to the constraint manifold.  Along interior flow lines the
//! restriction of f obeys f″ + f = 0, so f(γ(t)) = L sin(α + t); along
//! boundary flow lines f″ + (1+a²)f = 0.  Both laws are measured as
//! defects rather than assumed.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{dot, norm, ModelDomain, ObataFunction, SpherePoint};
use crate::ode::WarpedModel;

/// Gradient norm below which the flow has reached the critical set.
pub const CRITICAL_GRAD: f64 = 1e-6;
/// Minimum gradient norm required at the start point.
pub const START_GRAD: f64 = 1e-8;

/// How a flow ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalEvent {
    InteriorMax,
    InteriorMin,
    BoundaryHit,
    TimeExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowDirection {
    /// Flow of +∇f/|∇f|.
    Forward,
    /// Flow of −∇f/|∇f|.
    Backward,
}

impl FlowDirection {
    fn sign(self) -> f64 {
        match self {
            FlowDirection::Forward => 1.0,
            FlowDirection::Backward => -1.0,
        }
    }
}

/// Per-trace invariant defects.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct FlowDefects {
    /// Interior traces: max | |∇f|² + f² − L² |.
    /// Boundary traces: max | |∇̄f|² + (1+a²)f² − L² |.
    pub conservation: f64,
    /// Max tangential second difference divided by dt².
    pub geodesic: f64,
    /// Max per-step distance of the raw RK4 state from the constraint set.
    pub renorm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub point: Vec<f64>,
    pub f_value: f64,
}

/// A sampled integral curve with its terminal event and defects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
    pub terminal_event: TerminalEvent,
    pub terminal_time: f64,
    pub defects: FlowDefects,
}

impl FlowTrace {
    /// CSV rows (t, y₁, …, y_{n+1}, f).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(first) = self.samples.first() {
            out.push('t');
            for i in 1..=first.point.len() {
                out.push_str(&format!(",y{i}"));
            }
            out.push_str(",f\n");
        }
        for s in &self.samples {
            out.push_str(&format!("{:.17e}", s.t));
            for v in &s.point {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push_str(&format!(",{:.17e}\n", s.f_value));
        }
        out
    }

    /// JSON summary {terminal_event, terminal_time, defects}.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "terminal_event": self.terminal_event,
            "terminal_time": self.terminal_time,
            "defects": {
                "conservation": self.defects.conservation,
                "geodesic": self.defects.geodesic,
                "renorm": self.defects.renorm,
            },
            "samples": self.samples.len(),
        })
    }

    /// Basic well-formedness: strictly increasing t, unit-speed spacing.
    pub fn validate(&self, dt: f64) -> bool {
        self.samples.windows(2).all(|w| {
            let step_ok = w[1].t > w[0].t;
            let d: f64 = w[0]
                .point
                .iter()
                .zip(&w[1].point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            step_ok && d <= 2.0 * dt
        })
    }
}

/// Integration controls.  `reproject` disables the per-step renormalization
/// only for regression experiments; production flows keep it on.
#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub dt: f64,
    pub t_max: f64,
    pub direction: FlowDirection,
    pub reproject: bool,
}

impl FlowOptions {
    pub fn new(dt: f64, t_max: f64, direction: FlowDirection) -> Self {
        Self {
            dt,
            t_max,
            direction,
            reproject: true,
        }
    }
}

fn validate_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= 1e-2) {
        return Err(CoreError::InvalidParameter {
            name: "dt",
            reason: format!("dt = {dt} must lie in (0, 1e-2]"),
        });
    }
    Ok(())
}

/// One RK4 step of y′ = V(y) in ambient coordinates.
fn rk4_vec<F: Fn(&[f64]) -> Vec<f64>>(field: &F, y: &[f64], h: f64) -> Vec<f64> {
    let k1 = field(y);
    let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
    let k2 = field(&y2);
    let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
    let k3 = field(&y3);
    let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
    let k4 = field(&y4);
    y.iter()
        .enumerate()
        .map(|(i, a)| a + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Flow of ±∇f/|∇f| on the sphere with explicit fourth-order stepping and
/// per-step reprojection.  Terminates at a domain boundary crossing
/// (bisected to 1e-10 in t), at the critical set (|∇f| < 1e-6, with the
/// terminal point snapped to the nearest pole ±c/L and the remaining arc
/// added to the terminal time), or at t_max.
pub fn normalized_gradient_flow(
    f: &ObataFunction,
    start: &SpherePoint,
    domain: Option<&ModelDomain>,
    opts: FlowOptions,
) -> Result<FlowTrace> {
    validate_dt(opts.dt)?;
    let g0 = f.gradient(start);
    let g0n = norm(&g0);
    if g0n <= START_GRAD {
        return Err(CoreError::CriticalPoint {
            norm: g0n,
            threshold: START_GRAD,
        });
    }
    if let Some(d) = domain {
        let res = d.defining_residual(start);
        if res > crate::geometry::BOUNDARY_TOL {
            return Err(CoreError::OutsideDomain { residual: res });
        }
    }
    let sigma = opts.direction.sign();
    let c = f.coefficients().to_vec();
    let field = move |y: &[f64]| -> Vec<f64> {
        let fv = dot(&c, y);
        let mut g: Vec<f64> = c.iter().zip(y).map(|(ci, yi)| ci - fv * yi).collect();
        let n = norm(&g);
        if n < 1e-300 {
            return vec![0.0; y.len()];
        }
        g.iter_mut().for_each(|x| *x *= sigma / n);
        g
    };

    let mut y = start.coords().to_vec();
    let mut t = 0.0f64;
    let mut renorm = 0.0f64;
    let mut samples = vec![FlowSample {
        t,
        point: y.clone(),
        f_value: dot(f.coefficients(), &y),
    }];
    let mut event = TerminalEvent::TimeExhausted;
    let mut terminal_time = opts.t_max;

    // the pole the flow value increases toward: +c/L forward, −c/L backward
    let (top, bottom) = f.poles();
    let pole_ahead = if sigma > 0.0 { top } else { bottom };

    let steps = (opts.t_max / opts.dt).ceil() as usize;
    'outer: for _ in 0..steps {
        let h = opts.dt.min(opts.t_max - t);
        if h <= 0.0 {
            break;
        }

        // critical-set arrival: within a few steps of the pole ahead the
        // terminal point snaps to ±c/L, the remaining great-circle arc is
        // sampled exactly and its length added to the terminal time
        // (subsumes |∇f| < 1e-6, where the remaining arc is below 1e-6/L)
        let remaining = sphere_point(&y).geodesic_distance(&pole_ahead);
        if remaining <= 16.0 * h {
            terminal_time = t + remaining;
            event = if sigma > 0.0 {
                TerminalEvent::InteriorMax
            } else {
                TerminalEvent::InteriorMin
            };
            let pole = pole_ahead.coords();
            let sin_d = remaining.sin();
            let mut arc = h;
            while arc < remaining - 1e-15 && sin_d > 1e-9 {
                let along: Vec<f64> = y
                    .iter()
                    .zip(pole)
                    .map(|(a, b)| ((remaining - arc).sin() * a + arc.sin() * b) / sin_d)
                    .collect();
                samples.push(FlowSample {
                    t: t + arc,
                    f_value: dot(f.coefficients(), &along),
                    point: along,
                });
                arc += h;
            }
            samples.push(FlowSample {
                t: terminal_time,
                point: pole.to_vec(),
                f_value: dot(f.coefficients(), pole),
            });
            break 'outer;
        }

        let step_from = |h: f64| -> Vec<f64> {
            let mut q = rk4_vec(&field, &y, h);
            if opts.reproject {
                normalize(&mut q);
            }
            q
        };
        let raw = rk4_vec(&field, &y, h);
        let drift = (norm(&raw) - 1.0).abs();
        renorm = renorm.max(drift);
        let mut q = raw;
        if opts.reproject {
            normalize(&mut q);
        }

        // boundary crossing: sign change of the defining residual, refined
        // by bisection on the step fraction
        if let Some(d) = domain {
            let res_new = d.defining_residual(&sphere_point(&q));
            if res_new > crate::geometry::BOUNDARY_TOL {
                let mut lo = 0.0f64;
                let mut hi = h;
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    let qm = step_from(mid);
                    if d.defining_residual(&sphere_point(&qm)) > 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                let h_hit = 0.5 * (lo + hi);
                let q_hit = step_from(h_hit);
                t += h_hit;
                samples.push(FlowSample {
                    t,
                    point: q_hit.clone(),
                    f_value: dot(f.coefficients(), &q_hit),
                });
                event = TerminalEvent::BoundaryHit;
                terminal_time = t;
                break 'outer;
            }
        }

        y = q;
        t += h;
        samples.push(FlowSample {
            t,
            point: y.clone(),
            f_value: dot(f.coefficients(), &y),
        });
    }

    let mut trace = FlowTrace {
        samples,
        terminal_event: event,
        terminal_time,
        defects: FlowDefects {
            renorm,
            ..Default::default()
        },
    };
    trace.defects.conservation = conservation_defect(&trace, f);
    trace.defects.geodesic = geodesic_defect(&trace).unwrap_or(0.0);
    Ok(trace)
}

fn sphere_point(y: &[f64]) -> SpherePoint {
    // traces may be intentionally un-normalized (reprojection off); the
    // residual oracles only need the raw coordinates
    SpherePoint::project(y.to_vec()).unwrap_or_else(|_| SpherePoint::new(vec![1.0]).unwrap())
}

/// Classification contract for a > 0 model domains: starts with f > 0 flow
/// forward to an interior maximum, starts with f < 0 flow (along −∇f/|∇f|)
/// to an interior minimum, and no flow reports a boundary hit first.
pub fn first_hit_classification(
    f: &ObataFunction,
    a: f64,
    domain: &ModelDomain,
    start: &SpherePoint,
) -> Result<TerminalEvent> {
    if a <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "a",
            reason: format!("a = {a}: the first-hit contract requires a > 0"),
        });
    }
    let f0 = f.value(start);
    if f0.abs() < 1e-12 {
        return Err(CoreError::InvalidParameter {
            name: "start",
            reason: "f(start) must be nonzero".into(),
        });
    }
    let direction = if f0 > 0.0 {
        FlowDirection::Forward
    } else {
        FlowDirection::Backward
    };
    let opts = FlowOptions::new(1e-3, 2.0 * std::f64::consts::PI, direction);
    let trace = normalized_gradient_flow(f, start, Some(domain), opts)?;
    Ok(trace.terminal_event)
}

/// Max tangential component of the discrete second derivative along the
/// trace, divided by dt²; zero for exact geodesics on the sphere.  Only
/// consecutive triples with uniform spacing enter (the bisected terminal
/// step is skipped).
pub fn geodesic_defect(trace: &FlowTrace) -> Result<f64> {
    if trace.samples.len() < 3 {
        return Err(CoreError::TooFewSamples {
            need: 3,
            got: trace.samples.len(),
        });
    }
    let mut worst = 0.0f64;
    for w in trace.samples.windows(3) {
        let dt1 = w[1].t - w[0].t;
        let dt2 = w[2].t - w[1].t;
        if (dt1 - dt2).abs() > 1e-12 {
            continue;
        }
        let y = &w[1].point;
        let mut second: Vec<f64> = (0..y.len())
            .map(|i| w[2].point[i] - 2.0 * y[i] + w[0].point[i])
            .collect();
        let radial = dot(&second, y) / dot(y, y);
        for (i, s) in second.iter_mut().enumerate() {
            *s -= radial * y[i];
        }
        worst = worst.max(norm(&second) / (dt1 * dt1));
    }
    Ok(worst)
}

/// Max over samples of | |∇f|² + f² − L² |, evaluated on the raw stored
/// coordinates (so drift off the sphere shows up as a defect).
pub fn conservation_defect(trace: &FlowTrace, f: &ObataFunction) -> f64 {
    let c = f.coefficients();
    let l2 = f.amplitude().powi(2);
    trace
        .samples
        .iter()
        .map(|s| {
            let fv = dot(c, &s.point);
            let g: Vec<f64> = c
                .iter()
                .zip(&s.point)
                .map(|(ci, yi)| ci - fv * yi)
                .collect();
            (dot(&g, &g) + fv * fv - l2).abs()
        })
        .fold(0.0, f64::max)
}

/// Integrates a caller-supplied tangent field on the sphere with the same
/// stepping and reprojection as the gradient flow; a control used to show
/// the geodesic defect separates gradient flows from sheared fields.
pub fn integrate_sphere_field<F: Fn(&[f64]) -> Vec<f64>>(
    field: F,
    start: &SpherePoint,
    f: &ObataFunction,
    opts: FlowOptions,
) -> Result<FlowTrace> {
    validate_dt(opts.dt)?;
    let mut y = start.coords().to_vec();
    let mut t = 0.0;
    let mut samples = vec![FlowSample {
        t,
        point: y.clone(),
        f_value: f.value(start),
    }];
    let steps = (opts.t_max / opts.dt).round() as usize;
    for _ in 0..steps {
        let mut q = rk4_vec(&field, &y, opts.dt);
        if opts.reproject {
            normalize(&mut q);
        }
        y = q;
        t += opts.dt;
        samples.push(FlowSample {
            t,
            point: y.clone(),
            f_value: dot(f.coefficients(), &y),
        });
    }
    let mut trace = FlowTrace {
        samples,
        terminal_event: TerminalEvent::TimeExhausted,
        terminal_time: t,
        defects: FlowDefects::default(),
    };
    trace.defects.conservation = conservation_defect(&trace, f);
    trace.defects.geodesic = geodesic_defect(&trace)?;
    Ok(trace)
}

/// Result of following the boundary gradient flow of f̄ = f|_{T^m(θ)}.
#[derive(Debug, Clone)]
pub struct BoundaryFlowResult {
    pub trace: FlowTrace,
    /// Max |f(σ(s)) − (L/√(1+a²))·sin(√(1+a²)s + β)| along the trace.
    pub fit_residual: f64,
}

/// Flow of ∇̄f/|∇̄f| constrained to T^m(θ), integrated on the ambient
/// product representation with per-step retraction of each factor sphere
/// (the constraint is satisfied exactly at every sample).  A terminal
/// `InteriorMax` means a focal point of the boundary was reached.
pub fn boundary_flow(
    domain: &ModelDomain,
    f: &ObataFunction,
    a: f64,
    start: &SpherePoint,
    dt: f64,
) -> Result<BoundaryFlowResult> {
    validate_dt(dt)?;
    let g0 = crate::geometry::boundary_gradient(domain, f, start)?;
    let g0n = norm(&g0);
    if g0n <= START_GRAD {
        return Err(CoreError::CriticalPoint {
            norm: g0n,
            threshold: START_GRAD,
        });
    }
    let l = f.amplitude();
    let omega = (1.0 + a * a).sqrt();

    // integrate in canonical coordinates: the torus-tangential gradient is
    // the coefficient vector minus its radial component in each factor
    // block, well defined in a neighborhood of the torus so that RK4 stage
    // points (off the torus by O(dt)) see a smooth field
    let c_can = canonical(domain, f.coefficients());
    let m = domain.m;
    let nn = domain.n;
    let field = |yc: &[f64]| -> Vec<f64> {
        let mut g = c_can.clone();
        for range in [0..m + 1, m + 1..nn + 1] {
            let yb = &yc[range.clone()];
            let denom = dot(yb, yb);
            if denom < 1e-300 {
                continue;
            }
            let coef = dot(&c_can[range.clone()], yb) / denom;
            for i in range {
                g[i] -= coef * yc[i];
            }
        }
        let n = norm(&g);
        if n < 1e-300 {
            return vec![0.0; yc.len()];
        }
        g.iter_mut().for_each(|x| *x /= n);
        g
    };

    let mut yc = canonical(domain, start.coords());
    let mut t = 0.0f64;
    let mut renorm = 0.0f64;
    let mut samples = vec![FlowSample {
        t,
        point: start.coords().to_vec(),
        f_value: f.value(start),
    }];
    let mut event = TerminalEvent::TimeExhausted;
    // half the boundary period bounds the time to a focal point
    let t_max = std::f64::consts::PI / omega + 1.0;
    let mut terminal_time = t_max;
    let steps = (t_max / dt).ceil() as usize;
    let f_of = |yc: &[f64]| dot(&c_can, yc);

    for _ in 0..steps {
        // remaining arc to the focal set on the sin θ factor sphere:
        // f = L sin θ · u with u the height on the unit factor, so the
        // leftover distance is sin θ · acos(f / (L sin θ)); near the focal
        // point the exact boundary geodesic finishes the trace
        let sin_theta = domain.theta.sin();
        let u = (f_of(&yc) / (l * sin_theta)).clamp(-1.0, 1.0);
        let remaining = sin_theta * u.acos();
        if remaining <= 16.0 * dt {
            terminal_time = t + remaining;
            event = TerminalEvent::InteriorMax;
            let here = SpherePoint::new(ambient(domain, &yc))?;
            let dir = {
                let mut d = ambient(domain, &field(&yc));
                normalize(&mut d);
                d
            };
            let mut arc = dt;
            while arc < remaining - 1e-15 {
                let q = domain.boundary_exp(&here, &dir, arc)?;
                samples.push(FlowSample {
                    t: t + arc,
                    f_value: f.value(&q),
                    point: q.coords().to_vec(),
                });
                arc += dt;
            }
            let focal = focal_point_above(domain, &here);
            samples.push(FlowSample {
                t: terminal_time,
                point: focal.coords().to_vec(),
                f_value: f.value(&focal),
            });
            break;
        }

        let raw = rk4_vec(&field, &yc, dt);
        let q = retract_blocks(domain, &raw);
        let drift: f64 = raw
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        renorm = renorm.max(drift);

        yc = q;
        t += dt;
        samples.push(FlowSample {
            t,
            point: ambient(domain, &yc),
            f_value: f_of(&yc),
        });
    }

    // transnormal law along the boundary as the conservation defect
    let mut conservation = 0.0f64;
    for s in &samples {
        let sp = SpherePoint::new(s.point.clone())?;
        let r = crate::geometry::transnormal_residual(domain, f, a, &sp)?;
        conservation = conservation.max(r.abs());
    }
    // geodesic defect relative to the torus tangent space
    let mut geodesic = 0.0f64;
    for w in samples.windows(3) {
        let dt1 = w[1].t - w[0].t;
        let dt2 = w[2].t - w[1].t;
        if (dt1 - dt2).abs() > 1e-12 {
            continue;
        }
        let mid = SpherePoint::new(w[1].point.clone())?;
        let basis = domain.boundary_tangent_basis(&mid)?;
        let second: Vec<f64> = (0..w[1].point.len())
            .map(|i| w[2].point[i] - 2.0 * w[1].point[i] + w[0].point[i])
            .collect();
        let tang: f64 = basis
            .iter()
            .map(|e| dot(&second, e).powi(2))
            .sum::<f64>()
            .sqrt();
        geodesic = geodesic.max(tang / (dt1 * dt1));
    }

    // fit against the boundary flow law f = (L/ω) sin(ω s + β)
    let f0 = samples[0].f_value;
    let beta = (omega * f0).atan2(g0n);
    let fit_residual = samples
        .iter()
        .map(|s| (s.f_value - l / omega * (omega * s.t + beta).sin()).abs())
        .fold(0.0, f64::max);

    Ok(BoundaryFlowResult {
        trace: FlowTrace {
            samples,
            terminal_event: event,
            terminal_time,
            defects: FlowDefects {
                conservation,
                geodesic,
                renorm,
            },
        },
        fit_residual,
    })
}

/// Pulls canonical coordinates back onto T^m(θ) by rescaling each factor.
fn retract_blocks(domain: &ModelDomain, yc: &[f64]) -> Vec<f64> {
    let n = domain.n;
    let m = domain.m;
    let theta = domain.theta;
    let mut out = yc.to_vec();
    let head_r = theta.cos();
    let tail_r = theta.sin();
    if m + 1 == 1 {
        out[0] = head_r;
    } else {
        let hn = norm(&yc[0..m + 1]);
        for i in 0..=m {
            out[i] = yc[i] * head_r / hn;
        }
    }
    if n - m == 1 {
        out[n] = tail_r;
    } else {
        let tn = norm(&yc[m + 1..n + 1]);
        for i in m + 1..=n {
            out[i] = yc[i] * tail_r / tn;
        }
    }
    out
}

/// Focal point above q: the tail factor rotated onto its f-maximizing pole,
/// head factor kept.
fn focal_point_above(domain: &ModelDomain, q: &SpherePoint) -> SpherePoint {
    let n = domain.n;
    let mut yc = canonical(domain, q.coords());
    for v in yc[domain.m + 1..n + 1].iter_mut() {
        *v = 0.0;
    }
    yc[n] = domain.theta.sin();
    SpherePoint::new(ambient(domain, &yc)).expect("focal point is on the sphere")
}

fn canonical(domain: &ModelDomain, y: &[f64]) -> Vec<f64> {
    match &domain.rotation {
        None => y.to_vec(),
        Some(q) => {
            let d = y.len();
            (0..d)
                .map(|i| (0..d).map(|j| q[j][i] * y[j]).sum())
                .collect()
        }
    }
}

fn ambient(domain: &ModelDomain, y: &[f64]) -> Vec<f64> {
    match &domain.rotation {
        None => y.to_vec(),
        Some(q) => {
            let d = y.len();
            (0..d)
                .map(|i| (0..d).map(|j| q[i][j] * y[j]).sum())
                .collect()
        }
    }
}

/// Survey of a one-dimensional boundary circle (n = 2, m = 0): total
/// length, number of maxima of f̄, and the arc-length period of f̄.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitReport {
    pub length: f64,
    pub maxima_count: usize,
    pub period: f64,
}

/// Walks once around the boundary circle of an n = 2, m = 0 model domain,
/// measuring its length by chord sums and counting the maxima of f̄; the
/// period is length / maxima_count (2π k sin θ signature with k maxima).
pub fn boundary_circuit(
    domain: &ModelDomain,
    f: &ObataFunction,
    samples_per_turn: usize,
) -> Result<CircuitReport> {
    if domain.n != 2 || domain.m != 0 {
        return Err(CoreError::InvalidParameter {
            name: "domain",
            reason: "boundary circuits require n = 2 and m = 0 (f varies on the circle)".into(),
        });
    }
    if samples_per_turn < 16 {
        return Err(CoreError::InvalidParameter {
            name: "samples_per_turn",
            reason: "need at least 16 samples".into(),
        });
    }
    let theta = domain.theta;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut length = 0.0f64;
    let mut values = Vec::with_capacity(samples_per_turn);
    let mut prev: Option<Vec<f64>> = None;
    for k in 0..=samples_per_turn {
        let phi = two_pi * k as f64 / samples_per_turn as f64;
        let yc = vec![
            theta.cos(),
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
        ];
        let y = ambient(domain, &yc);
        if let Some(p) = &prev {
            length += p
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
        }
        if k < samples_per_turn {
            values.push(dot(f.coefficients(), &y));
        }
        prev = Some(y);
    }
    let n = values.len();
    let mut maxima = 0usize;
    for i in 0..n {
        let prev = values[(i + n - 1) % n];
        let next = values[(i + 1) % n];
        if values[i] > prev && values[i] >= next {
            maxima += 1;
        }
    }
    if maxima == 0 {
        return Err(CoreError::CriticalPoint {
            norm: 0.0,
            threshold: 0.0,
        });
    }
    Ok(CircuitReport {
        length,
        maxima_count: maxima,
        period: length / maxima as f64,
    })
}

/// Flow of ±∇f/|∇f| on a warped model M₀ × [s₋, s₊]: f depends only on s,
/// so the normalized flow advances s at unit speed while the cross-section
/// label stays fixed.  Boundary hits are resolved exactly.
pub fn warped_gradient_flow(
    model: &WarpedModel,
    x_label: &[f64],
    s0: f64,
    opts: FlowOptions,
) -> Result<FlowTrace> {
    validate_dt(opts.dt)?;
    if !model.contains_s(s0) {
        return Err(CoreError::OutsideDomain {
            residual: model.outward_residual(s0),
        });
    }
    let sigma = opts.direction.sign();
    let mut samples = Vec::new();
    let push = |samples: &mut Vec<FlowSample>, t: f64, s: f64| {
        let mut point = x_label.to_vec();
        point.push(s);
        samples.push(FlowSample {
            t,
            point,
            f_value: model.f(s),
        });
    };
    push(&mut samples, 0.0, s0);

    // the flow is s(t) = s0 + σ t; find the exact boundary hit, if any
    let t_hit = if sigma > 0.0 {
        model.s_max - s0
    } else {
        s0 - model.s_min
    };
    let (event, terminal_time) = if t_hit <= opts.t_max {
        (TerminalEvent::BoundaryHit, t_hit)
    } else {
        (TerminalEvent::TimeExhausted, opts.t_max)
    };
    let steps = (terminal_time / opts.dt).floor() as usize;
    for k in 1..=steps {
        let t = k as f64 * opts.dt;
        push(&mut samples, t, s0 + sigma * t);
    }
    if steps as f64 * opts.dt < terminal_time - 1e-15 {
        push(&mut samples, terminal_time, s0 + sigma * terminal_time);
    }

    // conservation defect of |∇f|² + f² − L² with |∇f| = L cos s
    let l2 = model.l * model.l;
    let conservation = samples
        .iter()
        .map(|s| {
            let sv = *s.point.last().unwrap();
            (model.f_prime(sv).powi(2) + model.f(sv).powi(2) - l2).abs()
        })
        .fold(0.0, f64::max);

    Ok(FlowTrace {
        samples,
        terminal_event: event,
        terminal_time,
        defects: FlowDefects {
            conservation,
            geodesic: 0.0,
            renorm: 0.0,
        },
    })
}

/// First time at which a warped-model flow crosses the zero level of f,
/// or None if it exits first.  Backward flows from f > 0 starts must cross
/// before any boundary (the flow-to-zero-level connectivity property).
pub fn warped_zero_crossing(trace: &FlowTrace) -> Option<f64> {
    for w in trace.samples.windows(2) {
        if w[0].f_value.signum() != w[1].f_value.signum() {
            // f = L sin(s) is monotone in s along the flow; linear inverse
            let span = w[1].f_value - w[0].f_value;
            if span.abs() < 1e-300 {
                return Some(w[0].t);
            }
            let frac = -w[0].f_value / span;
            return Some(w[0].t + frac * (w[1].t - w[0].t));
        }
    }
    None
}

/// Max |f(γ(t)) − L sin(t·σ + α)| along an interior trace, with the phase
/// α fixed by the initial value and slope.
pub fn interior_flow_fit_residual(
    trace: &FlowTrace,
    f: &ObataFunction,
    direction: FlowDirection,
) -> Result<f64> {
    if trace.samples.len() < 2 {
        return Err(CoreError::TooFewSamples {
            need: 2,
            got: trace.samples.len(),
        });
    }
    let l = f.amplitude();
    let first = &trace.samples[0];
    let fv = first.f_value;
    let g: Vec<f64> = {
        let p = &first.point;
        f.coefficients()
            .iter()
            .zip(p)
            .map(|(ci, yi)| ci - fv * yi)
            .collect()
    };
    let slope = direction.sign() * norm(&g);
    let beta = fv.atan2(slope);
    Ok(trace
        .samples
        .iter()
        .map(|s| (s.f_value - l * (s.t + beta).sin()).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hemisphere, make_model_domain, negative_ball_model, DomainSide};
    use crate::ode::{warped_model_build, BaseGeometry, WarpedModel};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn random_sphere_point<R: Rng>(n: usize, rng: &mut R) -> SpherePoint {
        loop {
            let v: Vec<f64> = (0..=n)
                .map(|_| {
                    let u1: f64 = rng.gen_range(1e-12..1.0f64);
                    let u2: f64 = rng.gen_range(0.0..1.0f64);
                    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
                })
                .collect();
            if norm(&v) > 1e-6 {
                return SpherePoint::project(v).unwrap();
            }
        }
    }

    #[test]
    fn equator_start_reaches_pole_at_half_pi() {
        // f = y3 on S^2, start on the equator: f(γ(t)) = sin t
        let f = ObataFunction::height(2, 1.0);
        let start = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        let opts = FlowOptions::new(1e-3, 3.0, FlowDirection::Forward);
        let trace = normalized_gradient_flow(&f, &start, None, opts).unwrap();
        assert_eq!(trace.terminal_event, TerminalEvent::InteriorMax);
        assert_abs_diff_eq!(trace.terminal_time, FRAC_PI_2, epsilon = 1e-8);
        assert!(trace.defects.conservation <= 1e-10);
        assert!(trace.defects.geodesic <= 1e-6);
        assert!(trace.validate(1e-3));
    }

    #[test]
    fn cap_boundary_start_hits_max_at_half_pi_minus_theta() {
        for theta in [std::f64::consts::FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
            let n = 3;
            let domain = make_model_domain(n, n - 1, theta, DomainSide::Complement).unwrap();
            let f = ObataFunction::height(n, 1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let start = domain.sample_boundary(&mut rng);
            let opts = FlowOptions::new(1e-3, 3.0, FlowDirection::Forward);
            let trace = normalized_gradient_flow(&f, &start, Some(&domain), opts).unwrap();
            assert_eq!(trace.terminal_event, TerminalEvent::InteriorMax);
            assert_abs_diff_eq!(trace.terminal_time, FRAC_PI_2 - theta, epsilon = 1e-6);
        }
    }

    #[test]
    fn negative_ball_boundary_to_max_distance() {
        for theta in [2.0 * PI / 3.0, 3.0 * PI / 4.0] {
            let (domain, f, _a) = negative_ball_model(3, theta, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let start = domain.sample_boundary(&mut rng);
            let opts = FlowOptions::new(1e-3, 5.0, FlowDirection::Forward);
            let trace = normalized_gradient_flow(&f, &start, Some(&domain), opts).unwrap();
            assert_eq!(trace.terminal_event, TerminalEvent::InteriorMax);
            assert_abs_diff_eq!(trace.terminal_time, 1.5 * PI - theta, epsilon = 1e-6);
        }
    }

    #[test]
    fn negative_ball_backward_from_perturbed_max() {
        let theta = 3.0 * PI / 4.0;
        let (domain, f, _a) = negative_ball_model(3, theta, 1.0).unwrap();
        // maximum of f = -y4 is the south pole; perturb by eps along y1
        let eps: f64 = 1e-7;
        let start = SpherePoint::project(vec![eps.sin(), 0.0, 0.0, -eps.cos()]).unwrap();
        let opts = FlowOptions::new(1e-3, 5.0, FlowDirection::Backward);
        let trace = normalized_gradient_flow(&f, &start, Some(&domain), opts).unwrap();
        assert_eq!(trace.terminal_event, TerminalEvent::BoundaryHit);
        assert_abs_diff_eq!(trace.terminal_time + eps, 1.5 * PI - theta, epsilon = 1e-6);
    }

    #[test]
    fn warped_model_crossing_time() {
        for theta in [2.0 * PI / 3.0, 3.0 * PI / 4.0, 5.0 * PI / 6.0] {
            let a = 1.0 / theta.tan();
            let (s0, s1) = WarpedModel::standard_interval(a);
            let model = warped_model_build(a, BaseGeometry::FlatDisk, (s0, s1), 1.0).unwrap();
            // start on the bottom boundary where f = -L sin(theta)
            assert_abs_diff_eq!(model.f(s0), -theta.sin(), epsilon = 1e-12);
            let opts = FlowOptions::new(1e-3, 10.0, FlowDirection::Forward);
            let trace = warped_gradient_flow(&model, &[0.25], s0, opts).unwrap();
            assert_eq!(trace.terminal_event, TerminalEvent::BoundaryHit);
            assert_abs_diff_eq!(trace.terminal_time, 2.0 * PI - 2.0 * theta, epsilon = 1e-9);
            assert!(trace.defects.conservation <= 1e-12);
        }
    }

    #[test]
    fn warped_backward_flow_crosses_zero_before_boundary() {
        let theta = 2.0 * PI / 3.0;
        let a = 1.0 / theta.tan();
        let model = warped_model_build(
            a,
            BaseGeometry::FlatDisk,
            WarpedModel::standard_interval(a),
            1.0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s0 = rng.gen_range(1e-6..model.s_max - 1e-9);
            let opts = FlowOptions::new(1e-3, 10.0, FlowDirection::Backward);
            let trace = warped_gradient_flow(&model, &[0.0], s0, opts).unwrap();
            let crossing = warped_zero_crossing(&trace).expect("must cross the zero level");
            assert!(
                crossing < trace.terminal_time - 1e-9,
                "crossing {crossing} not before exit {}",
                trace.terminal_time
            );
        }
    }

    #[test]
    fn first_hit_classification_on_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // the cap (m = n-1, complement) has f > 0 throughout, so only the
        // positive branch is exercised there
        for (n, m, want_neg) in [
            (2usize, 0usize, true),
            (3, 1, true),
            (3, 2, false),
            (4, 2, true),
        ] {
            let theta = FRAC_PI_4;
            let domain = make_model_domain(n, m, theta, DomainSide::Complement).unwrap();
            let f = ObataFunction::height(n, 1.0);
            let a = 1.0 / theta.tan();
            let mut seen_pos = 0;
            let mut seen_neg = if want_neg { 0 } else { 25 };
            while seen_pos < 25 || seen_neg < 25 {
                let p = random_sphere_point(n, &mut rng);
                if !domain.contains(&p).unwrap() {
                    continue;
                }
                let fv = f.value(&p);
                if fv.abs() < 0.05 {
                    continue;
                }
                let event = first_hit_classification(&f, a, &domain, &p).unwrap();
                if fv > 0.0 {
                    assert_eq!(event, TerminalEvent::InteriorMax, "n={n} m={m}");
                    seen_pos += 1;
                } else {
                    assert_eq!(event, TerminalEvent::InteriorMin, "n={n} m={m}");
                    seen_neg += 1;
                }
            }
        }
    }

    #[test]
    fn first_hit_requires_positive_a() {
        let domain = make_model_domain(2, 0, FRAC_PI_4, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(2, 1.0);
        let p = SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(first_hit_classification(&f, -1.0, &domain, &p).is_err());
    }

    #[test]
    fn flow_rejects_critical_start() {
        let f = ObataFunction::height(2, 1.0);
        let pole = SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        let opts = FlowOptions::new(1e-3, 1.0, FlowDirection::Forward);
        assert!(matches!(
            normalized_gradient_flow(&f, &pole, None, opts),
            Err(CoreError::CriticalPoint { .. })
        ));
    }

    #[test]
    fn flow_fit_matches_sine_law() {
        let f = ObataFunction::height(3, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let start = random_sphere_point(3, &mut rng);
            if f.gradient(&start).iter().map(|v| v * v).sum::<f64>().sqrt() < 0.1 {
                continue;
            }
            for dir in [FlowDirection::Forward, FlowDirection::Backward] {
                let opts = FlowOptions::new(1e-3, 1.0, dir);
                let trace = normalized_gradient_flow(&f, &start, None, opts).unwrap();
                let r = interior_flow_fit_residual(&trace, &f, dir).unwrap();
                assert!(r <= 1e-6, "fit residual {r}");
            }
        }
    }

    #[test]
    fn trace_follows_exact_great_circle() {
        // oracle: the flow line through y0 with direction v0 is the great
        // circle cos(t)·y0 + sin(t)·v0
        let f = ObataFunction::height(3, 1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let start = random_sphere_point(3, &mut rng);
        let g = f.gradient(&start);
        let gn = norm(&g);
        assert!(gn > 0.1);
        let v0: Vec<f64> = g.iter().map(|x| x / gn).collect();
        let opts = FlowOptions::new(1e-3, 0.8, FlowDirection::Forward);
        let trace = normalized_gradient_flow(&f, &start, None, opts).unwrap();
        let mut worst = 0.0f64;
        for s in &trace.samples {
            let exact: Vec<f64> = start
                .coords()
                .iter()
                .zip(&v0)
                .map(|(y, v)| y * s.t.cos() + v * s.t.sin())
                .collect();
            let d: f64 = exact
                .iter()
                .zip(&s.point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(d);
        }
        assert!(worst <= 1e-9, "great-circle deviation {worst}");
    }

    #[test]
    fn geodesic_defect_flags_sheared_field() {
        // rotate the normalized gradient by 45 degrees in the tangent plane
        let f = ObataFunction::height(2, 1.0);
        let c = f.coefficients().to_vec();
        let sheared = move |y: &[f64]| -> Vec<f64> {
            let fv = dot(&c, y);
            let mut g: Vec<f64> = c.iter().zip(y).map(|(ci, yi)| ci - fv * yi).collect();
            let n = norm(&g);
            if n < 1e-12 {
                return vec![0.0; 3];
            }
            g.iter_mut().for_each(|x| *x /= n);
            // w = y × g completes the tangent frame on S²
            let w = [
                y[1] * g[2] - y[2] * g[1],
                y[2] * g[0] - y[0] * g[2],
                y[0] * g[1] - y[1] * g[0],
            ];
            let s = std::f64::consts::FRAC_PI_4;
            (0..3).map(|i| g[i] * s.cos() + w[i] * s.sin()).collect()
        };
        let start = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        let opts = FlowOptions::new(1e-3, 1.0, FlowDirection::Forward);
        let trace = integrate_sphere_field(sheared, &start, &f, opts).unwrap();
        assert!(
            trace.defects.geodesic > 1e-2,
            "sheared field should not be geodesic: {}",
            trace.defects.geodesic
        );

        // while the gradient flow itself is geodesic to 1e-6
        let trace = normalized_gradient_flow(&f, &start, None, opts).unwrap();
        assert!(trace.defects.geodesic <= 1e-6);
    }

    #[test]
    fn geodesic_defect_needs_three_samples() {
        let trace = FlowTrace {
            samples: vec![
                FlowSample {
                    t: 0.0,
                    point: vec![1.0, 0.0],
                    f_value: 0.0,
                },
                FlowSample {
                    t: 1e-3,
                    point: vec![1.0, 0.0],
                    f_value: 0.0,
                },
            ],
            terminal_event: TerminalEvent::TimeExhausted,
            terminal_time: 1e-3,
            defects: FlowDefects::default(),
        };
        assert!(matches!(
            geodesic_defect(&trace),
            Err(CoreError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn conservation_grows_without_reprojection() {
        let f = ObataFunction::height(2, 1.0);
        let start = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        let mut opts = FlowOptions::new(1e-2, 1.3, FlowDirection::Forward);
        opts.reproject = false;
        let drifting = normalized_gradient_flow(&f, &start, None, opts).unwrap();
        opts.reproject = true;
        let projected = normalized_gradient_flow(&f, &start, None, opts).unwrap();
        assert!(projected.defects.conservation <= 1e-10);
        assert!(
            drifting.defects.conservation > 10.0 * projected.defects.conservation,
            "defect without reprojection {} should dominate {}",
            drifting.defects.conservation,
            projected.defects.conservation
        );
    }

    #[test]
    fn boundary_flow_focal_values_and_fit() {
        // T^m(θ) with m < n-1: focal values of f are ±L sin θ
        let theta = FRAC_PI_4;
        for (n, m) in [(3usize, 1usize), (4, 1), (4, 2)] {
            let domain = make_model_domain(n, m, theta, DomainSide::Complement).unwrap();
            let f = ObataFunction::height(n, 1.0);
            let a = 1.0 / theta.tan();
            let mut rng = ChaCha8Rng::seed_from_u64(29);
            let mut start = domain.sample_boundary(&mut rng);
            while crate::geometry::boundary_gradient(&domain, &f, &start)
                .map(|g| norm(&g))
                .unwrap_or(0.0)
                < 0.3
            {
                start = domain.sample_boundary(&mut rng);
            }
            let result = boundary_flow(&domain, &f, a, &start, 1e-3).unwrap();
            assert_eq!(result.trace.terminal_event, TerminalEvent::InteriorMax);
            let f_end = result.trace.samples.last().unwrap().f_value;
            assert_abs_diff_eq!(f_end, theta.sin(), epsilon = 1e-9);
            assert!(result.fit_residual <= 1e-6, "fit {}", result.fit_residual);
            assert!(result.trace.defects.conservation <= 1e-10);
        }
    }

    #[test]
    fn boundary_flow_on_rotated_domain() {
        // a rotation fixing the height axis must not change the flow law
        let theta = FRAC_PI_4;
        let n = 3;
        let alpha = 1.1f64;
        let mut q = vec![vec![0.0; n + 1]; n + 1];
        q[0][0] = alpha.cos();
        q[0][1] = -alpha.sin();
        q[1][0] = alpha.sin();
        q[1][1] = alpha.cos();
        q[2][2] = 1.0;
        q[3][3] = 1.0;
        let domain = make_model_domain(n, 1, theta, DomainSide::Complement)
            .unwrap()
            .with_rotation(q)
            .unwrap();
        let f = ObataFunction::height(n, 1.0);
        let a = 1.0 / theta.tan();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let mut start = domain.sample_boundary(&mut rng);
        while crate::geometry::boundary_gradient(&domain, &f, &start)
            .map(|g| norm(&g))
            .unwrap_or(0.0)
            < 0.3
        {
            start = domain.sample_boundary(&mut rng);
        }
        let result = boundary_flow(&domain, &f, a, &start, 1e-3).unwrap();
        assert_eq!(result.trace.terminal_event, TerminalEvent::InteriorMax);
        assert!(result.fit_residual <= 1e-6, "fit {}", result.fit_residual);
        assert_abs_diff_eq!(
            result.trace.samples.last().unwrap().f_value,
            theta.sin(),
            epsilon = 1e-9
        );
        // all samples stay on the rotated torus
        for s in &result.trace.samples {
            let p = SpherePoint::new(s.point.clone()).unwrap();
            assert!(domain.on_boundary(&p));
        }
    }

    #[test]
    fn boundary_flow_rejects_focal_start() {
        let theta = FRAC_PI_4;
        let domain = make_model_domain(3, 2, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(3, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let start = domain.sample_boundary(&mut rng);
        // on T^{n-1} the boundary restriction is constant: every point focal
        assert!(matches!(
            boundary_flow(&domain, &f, 1.0, &start, 1e-3),
            Err(CoreError::CriticalPoint { .. })
        ));
    }

    #[test]
    fn circuit_length_and_period() {
        // n=2, m=0: boundary circle of radius sin θ, one maximum of f
        let theta = FRAC_PI_4;
        let domain = make_model_domain(2, 0, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(2, 1.0);
        let report = boundary_circuit(&domain, &f, 20_000).unwrap();
        assert_eq!(report.maxima_count, 1);
        assert_abs_diff_eq!(report.length, 2.0 * PI * theta.sin(), epsilon = 1e-6);
        // measured period = 2π sin(π/4) = π√2
        assert_abs_diff_eq!(report.period, PI * 2.0f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn circuit_requires_varying_f() {
        let theta = FRAC_PI_4;
        let domain = make_model_domain(2, 1, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(2, 1.0);
        assert!(boundary_circuit(&domain, &f, 1024).is_err());
    }

    #[test]
    fn hemisphere_neumann_backward_flows_share_terminal_point() {
        // tilted solution with ∂f/∂ν = 1 on the equator of the upper
        // hemisphere: c = (c', -1); all backward flows end at -c/L
        let n = 3;
        let domain = hemisphere(n);
        let f = ObataFunction::new(vec![0.8, 0.3, 0.0, -1.0]).unwrap();
        let l = f.amplitude();
        assert!(l > 1.0);
        let (_, bottom) = f.poles();
        assert!(domain.contains(&bottom).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mut terminals: Vec<Vec<f64>> = Vec::new();
        while terminals.len() < 20 {
            let p = random_sphere_point(n, &mut rng);
            if !domain.contains(&p).unwrap()
                || f.gradient(&p).iter().map(|v| v * v).sum::<f64>() < 1e-4
            {
                continue;
            }
            let opts = FlowOptions::new(1e-3, 7.0, FlowDirection::Backward);
            let trace = normalized_gradient_flow(&f, &p, Some(&domain), opts).unwrap();
            if trace.terminal_event == TerminalEvent::InteriorMin {
                terminals.push(trace.samples.last().unwrap().point.clone());
            }
        }
        for t in &terminals {
            let d: f64 = t
                .iter()
                .zip(bottom.coords())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(d <= 1e-6, "terminal point scattered by {d}");
        }
    }

    #[test]
    fn neumann_model_boundary_facts() {
        // the non-vanishing Neumann model: f = <c, y> with c = (c', -1) on
        // the upper hemisphere has ∂f/∂ν = 1 and |∇̄f|² + f² = L² − 1 on
        // the equator
        let n = 3;
        let domain = hemisphere(n);
        let f = ObataFunction::new(vec![0.5, -0.2, 0.4, -1.0]).unwrap();
        let l = f.amplitude();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..50 {
            let p = domain.sample_boundary(&mut rng);
            let nu = domain.outward_normal(&p).unwrap();
            let grad = f.gradient(&p);
            assert_abs_diff_eq!(dot(&grad, &nu), 1.0, epsilon = 1e-12);
            let gn = dot(&grad, &nu);
            let tang: Vec<f64> = grad.iter().zip(&nu).map(|(g, v)| g - gn * v).collect();
            let fact = dot(&tang, &tang) + f.value(&p).powi(2) - (l * l - 1.0);
            assert_abs_diff_eq!(fact, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn trace_serialization_shapes() {
        let f = ObataFunction::height(2, 1.0);
        let start = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        let opts = FlowOptions::new(1e-2, 0.05, FlowDirection::Forward);
        let trace = normalized_gradient_flow(&f, &start, None, opts).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("t,y1,y2,y3,f\n"));
        assert_eq!(csv.lines().count(), trace.samples.len() + 1);
        let summary = trace.summary_json();
        assert_eq!(summary["terminal_event"], "time_exhausted");
    }
}
