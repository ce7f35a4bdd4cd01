//! Pseudo-spectral integrator for the incompressible rotating flow
//!
//! ```text
//!   d_t u + P(u . grad u) + Omega P(e3 x u) = 0,   div u = 0,
//! ```
//!
//! with `P` the divergence-free projector. The nonlinear term is computed
//! in divergence form `div(u (x) u)` (equivalent to the advective form
//! for divergence-free, band-limited, dealiased fields): three inverse
//! transforms for the velocity, six forward transforms for the distinct
//! entries of the symmetric tensor, then frequency-side divergence,
//! rotation, projection, and dealiasing. Time stepping is classical
//! fourth-order Runge-Kutta with a defensive re-projection per step.
//!
//! The linear part (`advection = false`) has a closed-form solution,
//! [`linear_propagator`], used as an exact reference by the checks.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{PhysField, SpecField, SpecVector};
use crate::grid::Grid;
use crate::leray;

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// Rotation speed (coefficient of the Coriolis term).
    pub omega: f64,
    /// Include the nonlinear term; `false` integrates the pure rotation
    /// system, which the closed-form propagator solves exactly.
    pub advection: bool,
    /// Fixed step size; `None` derives one from the CFL heuristic.
    pub dt: Option<f64>,
    /// Safety factor of the CFL-derived step.
    pub cfl_safety: f64,
    /// Lower bound on the number of steps across the whole horizon, so
    /// that very slow flows still get a resolved trajectory.
    pub min_steps: usize,
    /// Abort when the L2 norm exceeds this multiple of its initial value.
    pub blowup_ratio: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            omega: 1.0,
            advection: true,
            dt: None,
            cfl_safety: 0.4,
            min_steps: 4,
            blowup_ratio: 1e6,
        }
    }
}

/// Per-snapshot scalar diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SnapshotInfo {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveDiagnostics {
    pub total_steps: usize,
    /// Step size targeted by the stepper (segments divide it exactly).
    pub dt_nominal: f64,
    pub initial_l2: f64,
    pub snapshots: Vec<SnapshotInfo>,
}

pub struct SolveOutput {
    /// Requested states, in time order, paired with their times.
    pub states: Vec<(f64, SpecVector)>,
    pub diagnostics: SolveDiagnostics,
}

pub struct Integrator {
    grid: Arc<Grid>,
    fft: Fft3,
    config: SolverConfig,
}

impl Integrator {
    pub fn new(grid: Arc<Grid>, config: SolverConfig) -> Self {
        Integrator {
            fft: Fft3::new(grid.clone()),
            grid,
            config,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Borrow the transform context (shared with norm computations so
    /// plans are built once per grid).
    pub fn fft_mut(&mut self) -> &mut Fft3 {
        &mut self.fft
    }

    /// Right-hand side `-P(div(u (x) u) + Omega e3 x u)`, dealiased.
    pub fn rhs(&mut self, u: &SpecVector) -> SpecVector {
        let mut out = SpecVector::zeros(&self.grid);

        if self.config.advection {
            let u_phys = [
                self.fft.inverse(&u.comps[0]),
                self.fft.inverse(&u.comps[1]),
                self.fft.inverse(&u.comps[2]),
            ];
            let mut prod = PhysField::zeros(&self.grid);
            for i in 0..3 {
                for j in i..3 {
                    u_phys[i].mul_into(&u_phys[j], &mut prod);
                    let t_ij = self.fft.forward(&prod);
                    // (div T)_i picks up i xi_j T_ij; accumulate the
                    // negated value into components i and j (symmetry).
                    accumulate_divergence(&mut out.comps[i], &t_ij, j);
                    if i != j {
                        accumulate_divergence(&mut out.comps[j], &t_ij, i);
                    }
                }
            }
        }

        // Rotation: -Omega (e3 x u) = Omega (u2, -u1, 0).
        let omega = self.config.omega;
        if omega != 0.0 {
            out.comps[0].axpy(omega, &u.comps[1]);
            out.comps[1].axpy(-omega, &u.comps[0]);
        }

        leray::project(&mut out);
        out.dealias_truncate();
        out
    }

    /// One classical RK4 step followed by a defensive re-projection.
    ///
    /// Stage buffers are reused and each tendency is freed at its last
    /// use: on large grids a full vector is hundreds of megabytes, and
    /// holding all four stages at once is what blows the memory budget,
    /// not the transforms.
    pub fn step_rk4(&mut self, u: &mut SpecVector, dt: f64) {
        let k1 = self.rhs(u);
        let mut stage = u.clone();
        stage.axpy(dt / 2.0, &k1);
        let mut acc = k1;

        let k2 = self.rhs(&stage);
        acc.axpy(2.0, &k2);
        stage.copy_from(u);
        stage.axpy(dt / 2.0, &k2);
        drop(k2);

        let k3 = self.rhs(&stage);
        acc.axpy(2.0, &k3);
        stage.copy_from(u);
        stage.axpy(dt, &k3);
        drop(k3);

        let k4 = self.rhs(&stage);
        drop(stage);
        acc.axpy(1.0, &k4);
        drop(k4);

        u.axpy(dt / 6.0, &acc);
        leray::project(u);
    }

    /// CFL-style step bound from the retained frequencies, the velocity
    /// amplitude, and the rotation speed.
    pub fn cfl_dt(&mut self, u: &SpecVector) -> f64 {
        let xi_max = (0..3)
            .map(|a| self.grid.dealias_band(a))
            .fold(0.0f64, f64::max);
        let linf = if self.config.advection {
            let phys = crate::field::PhysVector {
                comps: [
                    self.fft.inverse(&u.comps[0]),
                    self.fft.inverse(&u.comps[1]),
                    self.fft.inverse(&u.comps[2]),
                ],
            };
            phys.linf_norm()
        } else {
            0.0
        };
        self.config.cfl_safety / (xi_max * linf + self.config.omega.abs() + 1e-12)
    }

    /// Integrate from `u0` and return the state at each requested time.
    ///
    /// Convenience wrapper over [`Integrator::solve_visit`] that clones
    /// every snapshot; prefer the visitor on large grids, where retaining
    /// a whole trajectory dominates the memory budget.
    pub fn solve(
        &mut self,
        u0: &SpecVector,
        horizon: f64,
        snapshot_times: &[f64],
    ) -> Result<SolveOutput> {
        let mut states = Vec::new();
        let diagnostics = self.solve_visit(u0, horizon, snapshot_times, |t, u| {
            states.push((t, u.clone()));
            Ok(())
        })?;
        Ok(SolveOutput { states, diagnostics })
    }

    /// Integrate from `u0`, handing each requested snapshot to `visit` as
    /// it is reached instead of retaining it.
    ///
    /// Snapshot times must be nondecreasing and within `[0, horizon]`;
    /// each segment between consecutive targets is subdivided exactly, so
    /// every requested time is hit by a step boundary. An empty request
    /// list means "the final time only". A zero horizon visits the
    /// (dealiased, projected) initial state.
    pub fn solve_visit(
        &mut self,
        u0: &SpecVector,
        horizon: f64,
        snapshot_times: &[f64],
        mut visit: impl FnMut(f64, &SpecVector) -> Result<()>,
    ) -> Result<SolveDiagnostics> {
        if !(horizon >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "horizon must be nonnegative, got {horizon}"
            )));
        }
        let targets: Vec<f64> = if snapshot_times.is_empty() {
            vec![horizon]
        } else {
            snapshot_times.to_vec()
        };
        for pair in targets.windows(2) {
            if pair[1] < pair[0] {
                return Err(Error::InvalidParam(format!(
                    "snapshot times must be nondecreasing, got {} after {}",
                    pair[1], pair[0]
                )));
            }
        }
        for &t in &targets {
            if t < 0.0 || t > horizon {
                return Err(Error::SnapshotBeyondHorizon { t, horizon });
            }
        }

        let mut u = u0.clone();
        u.dealias_truncate();
        leray::project(&mut u);
        let initial_l2 = u.l2_norm();

        let dt_nominal = match self.config.dt {
            Some(dt) if dt > 0.0 && dt.is_finite() => dt,
            Some(dt) => {
                return Err(Error::InvalidParam(format!(
                    "step size must be positive and finite, got {dt}"
                )))
            }
            None => {
                let cfl = self.cfl_dt(&u);
                let spread = if horizon > 0.0 {
                    horizon / self.config.min_steps.max(1) as f64
                } else {
                    cfl
                };
                cfl.min(spread)
            }
        };

        let mut infos = Vec::with_capacity(targets.len());
        let mut total_steps = 0usize;
        let mut t_now = 0.0f64;

        for &t_target in &targets {
            let len = t_target - t_now;
            if len > 0.0 {
                let steps = ((len / dt_nominal) - 1e-9).ceil().max(1.0) as usize;
                let dt = len / steps as f64;
                for _ in 0..steps {
                    self.step_rk4(&mut u, dt);
                    total_steps += 1;
                    let l2 = u.l2_norm();
                    if !l2.is_finite() || l2 > self.config.blowup_ratio * initial_l2 {
                        return Err(Error::BlowUp {
                            t: t_now,
                            ratio: l2 / initial_l2,
                        });
                    }
                }
                t_now = t_target;
            }
            // One component at a time keeps the physical-space scratch to a
            // third of the full vector.
            let linf = (0..3)
                .map(|c| self.fft.inverse(&u.comps[c]).linf_norm())
                .fold(0.0f64, f64::max);
            if !linf.is_finite() || (initial_l2 > 0.0 && linf > self.config.blowup_ratio) {
                return Err(Error::BlowUp { t: t_now, ratio: linf });
            }
            infos.push(SnapshotInfo { t: t_target, l2: u.l2_norm(), linf });
            visit(t_target, &u)?;
        }

        Ok(SolveDiagnostics {
            total_steps,
            dt_nominal,
            initial_l2,
            snapshots: infos,
        })
    }
}

fn accumulate_divergence(rhs_comp: &mut SpecField, t_ij: &SpecField, deriv_axis: usize) {
    let grid = rhs_comp.grid().clone();
    let dst = rhs_comp.data_mut();
    let src = t_ij.data();
    grid.for_each_mode(|idx, xi| {
        // -i xi_j T: (re, im) -> (xi im, -xi re)
        let v = src[idx];
        let x = xi[deriv_axis];
        dst[idx] += Complex64::new(x * v.im, -x * v.re);
    });
}

/// Exact solution of the pure rotation system for divergence-free data:
/// each mode rotates in the plane orthogonal to its frequency vector
/// with angular speed `Omega xi_3 / |xi|`; the zero mode rotates in the
/// horizontal plane with speed `Omega`.
pub fn linear_propagator(u0: &SpecVector, omega: f64, t: f64) -> SpecVector {
    let grid = u0.grid().clone();
    let mut out = u0.clone();
    let [a, b, c] = &mut out.comps;
    let (d1, d2, d3) = (a.data_mut(), b.data_mut(), c.data_mut());
    grid.for_each_mode(|idx, xi| {
        let rho_sq = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let v = [d1[idx], d2[idx], d3[idx]];
        let w = if rho_sq == 0.0 {
            let (sin, cos) = (omega * t).sin_cos();
            [
                v[0] * cos + v[1] * sin,
                -v[0] * sin + v[1] * cos,
                v[2],
            ]
        } else {
            let rho = rho_sq.sqrt();
            let h = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let (e1, e2) = if h > 0.0 {
                (
                    [xi[1] / h, -xi[0] / h, 0.0],
                    [
                        xi[2] * xi[0] / (h * rho),
                        xi[2] * xi[1] / (h * rho),
                        -h / rho,
                    ],
                )
            } else {
                let sign = if xi[2] > 0.0 { 1.0 } else { -1.0 };
                ([1.0, 0.0, 0.0], [0.0, sign, 0.0])
            };
            let lambda = omega * xi[2] / rho;
            let (sin, cos) = (lambda * t).sin_cos();
            let alpha = v[0] * e1[0] + v[1] * e1[1] + v[2] * e1[2];
            let beta = v[0] * e2[0] + v[1] * e2[1] + v[2] * e2[2];
            let xin = [xi[0] / rho, xi[1] / rho, xi[2] / rho];
            let gamma = v[0] * xin[0] + v[1] * xin[1] + v[2] * xin[2];
            let a = alpha * cos + beta * sin;
            let b = -alpha * sin + beta * cos;
            [
                a * e1[0] + b * e2[0] + gamma * xin[0],
                a * e1[1] + b * e2[1] + gamma * xin[1],
                a * e1[2] + b * e2[2] + gamma * xin[2],
            ]
        };
        d1[idx] = w[0];
        d2[idx] = w[1];
        d3[idx] = w[2];
    });
    out
}
