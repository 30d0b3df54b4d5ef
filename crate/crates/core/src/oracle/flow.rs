//! Fixed-step RK4 integration of the normal-form flow and its variational
//! equations in `z = (q_u, p_u, theta_1..f, J_1..f)`.
//!
//! With `I = (p_u^2 - q_u^2) / 2` the flow reads
//! `q_u' = Lambda p_u`, `p_u' = Lambda q_u`, `theta' = Omega`, `J' = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{OtocError, Result};
use crate::normal_form::{ActionPoint, ActionPolynomial};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub q_u: f64,
    pub p_u: f64,
    pub theta: DVector<f64>,
    pub j: DVector<f64>,
}

impl PhaseState {
    pub fn new(q_u: f64, p_u: f64, theta: impl Into<Vec<f64>>, j: impl Into<Vec<f64>>) -> Self {
        let theta = theta.into();
        let j = j.into();
        PhaseState {
            q_u,
            p_u,
            theta: DVector::from_vec(theta),
            j: DVector::from_vec(j),
        }
    }

    /// Point on the NHIM with zero angles.
    pub fn on_nhim(j: &[f64]) -> Self {
        PhaseState::new(0.0, 0.0, vec![0.0; j.len()], j.to_vec())
    }

    pub fn bath_modes(&self) -> usize {
        self.j.len()
    }

    pub fn reaction_action(&self) -> f64 {
        0.5 * (self.p_u * self.p_u - self.q_u * self.q_u)
    }

    pub fn actions(&self) -> ActionPoint {
        ActionPoint::on_nhim(&self.j).with_reaction(self.reaction_action())
    }

    fn to_vector(&self) -> DVector<f64> {
        let f = self.bath_modes();
        let mut z = DVector::zeros(2 + 2 * f);
        z[0] = self.q_u;
        z[1] = self.p_u;
        z.rows_mut(2, f).copy_from(&self.theta);
        z.rows_mut(2 + f, f).copy_from(&self.j);
        z
    }

    fn from_vector(z: &DVector<f64>, f: usize) -> Self {
        PhaseState {
            q_u: z[0],
            p_u: z[1],
            theta: z.rows(2, f).into_owned(),
            j: z.rows(2 + f, f).into_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub state: PhaseState,
    /// `dz(t) / dz(0)`, `(2 + 2f) x (2 + 2f)`.
    pub monodromy: DMatrix<f64>,
    /// Step actually used after halving.
    pub dt: f64,
    /// Max entry change of state and monodromy between the last two step sizes.
    pub halving_change: f64,
    /// `max_t |H(t) - H(0)| / max(1, |H(0)|)`.
    pub energy_drift: f64,
    /// `max_k |J_k(t) - J_k(0)| / max(1, |J_k(0)|)`.
    pub action_drift: f64,
}

/// Accepted change between successive step sizes.
pub const HALVING_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 10;

fn vector_field(poly: &ActionPolynomial, z: &DVector<f64>, f: usize) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (q, p) = (z[0], z[1]);
    let j = z.rows(2 + f, f).into_owned();
    let pt = ActionPoint::on_nhim(&j).with_reaction(0.5 * (p * p - q * q));
    let lam = poly.lyapunov_exponent(&pt)?;
    let omega = poly.bath_frequencies(&pt)?;
    // second derivatives in (I, J)
    let h = poly.hessian(&pt)?;

    let n = 2 + 2 * f;
    let mut rhs = DVector::zeros(n);
    rhs[0] = lam * p;
    rhs[1] = lam * q;
    rhs.rows_mut(2, f).copy_from(&omega);

    // dI/dq = -q, dI/dp = p
    let mut a = DMatrix::zeros(n, n);
    let lam_i = h[(0, 0)];
    a[(0, 0)] = -p * lam_i * q;
    a[(0, 1)] = lam + p * lam_i * p;
    a[(1, 0)] = lam - q * lam_i * q;
    a[(1, 1)] = q * lam_i * p;
    for k in 0..f {
        let lam_jk = h[(0, 1 + k)];
        a[(0, 2 + f + k)] = p * lam_jk;
        a[(1, 2 + f + k)] = q * lam_jk;
        let omega_i = h[(1 + k, 0)];
        a[(2 + k, 0)] = -omega_i * q;
        a[(2 + k, 1)] = omega_i * p;
        for l in 0..f {
            a[(2 + k, 2 + f + l)] = h[(1 + k, 1 + l)];
        }
    }
    Ok((rhs, a))
}

struct Run {
    z: DVector<f64>,
    m: DMatrix<f64>,
    energy_drift: f64,
    action_drift: f64,
}

fn run(poly: &ActionPolynomial, z0: &DVector<f64>, f: usize, t: f64, steps: usize) -> Result<Run> {
    let n = z0.len();
    let h = t / steps as f64;
    let mut z = z0.clone();
    let mut m = DMatrix::<f64>::identity(n, n);
    let energy = |z: &DVector<f64>| -> Result<f64> {
        let j = z.rows(2 + f, f).into_owned();
        poly.eval(&ActionPoint::on_nhim(&j).with_reaction(0.5 * (z[1] * z[1] - z[0] * z[0])))
    };
    let e0 = energy(&z)?;
    let j0 = z.rows(2 + f, f).into_owned();
    let (mut energy_drift, mut action_drift) = (0.0f64, 0.0f64);

    for step in 0..steps {
        let (k1, a1) = vector_field(poly, &z, f)?;
        let z2 = &z + &k1 * (0.5 * h);
        let (k2, a2) = vector_field(poly, &z2, f)?;
        let z3 = &z + &k2 * (0.5 * h);
        let (k3, a3) = vector_field(poly, &z3, f)?;
        let z4 = &z + &k3 * h;
        let (k4, a4) = vector_field(poly, &z4, f)?;

        let m1 = &a1 * &m;
        let m2 = &a2 * (&m + &m1 * (0.5 * h));
        let m3 = &a3 * (&m + &m2 * (0.5 * h));
        let m4 = &a4 * (&m + &m3 * h);

        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        m += (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (h / 6.0);

        if !z.iter().chain(m.iter()).all(|v| v.is_finite()) {
            return Err(OtocError::IntegratorDiverged(h * (step + 1) as f64));
        }
        energy_drift = energy_drift.max((energy(&z)? - e0).abs() / e0.abs().max(1.0));
        for k in 0..f {
            action_drift = action_drift.max((z[2 + f + k] - j0[k]).abs() / j0[k].abs().max(1.0));
        }
    }
    Ok(Run {
        z,
        m,
        energy_drift,
        action_drift,
    })
}

/// Integrates from `z0` to time `t` starting at step `dt`, halving the step
/// until state and monodromy change by less than [`HALVING_TOL`] (relative
/// to their size).
pub fn integrate_flow_and_variations(poly: &ActionPolynomial, z0: &PhaseState, t: f64, dt: f64) -> Result<FlowResult> {
    let f = poly.bath_modes();
    if z0.bath_modes() != f || z0.theta.len() != f {
        return Err(OtocError::DimensionMismatch {
            expected: f,
            found: z0.bath_modes(),
        });
    }
    if !(dt > 0.0) || !(t >= 0.0) || !t.is_finite() {
        return Err(OtocError::InvalidConfig(format!("need dt > 0 and finite t >= 0, got dt={dt}, t={t}")));
    }
    let z0v = z0.to_vector();
    let n = z0v.len();
    if t == 0.0 {
        return Ok(FlowResult {
            state: z0.clone(),
            monodromy: DMatrix::identity(n, n),
            dt,
            halving_change: 0.0,
            energy_drift: 0.0,
            action_drift: 0.0,
        });
    }
    let mut steps = ((t / dt).ceil() as usize).max(1);
    let mut prev = run(poly, &z0v, f, t, steps)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        steps *= 2;
        let next = run(poly, &z0v, f, t, steps)?;
        let dz = (&next.z - &prev.z).amax() / next.z.amax().max(1.0);
        let dm = (&next.m - &prev.m).amax() / next.m.amax().max(1.0);
        change = dz.max(dm);
        prev = next;
        if change < HALVING_TOL {
            return Ok(FlowResult {
                state: PhaseState::from_vector(&prev.z, f),
                monodromy: prev.m,
                dt: t / steps as f64,
                halving_change: change,
                energy_drift: prev.energy_drift,
                action_drift: prev.action_drift,
            });
        }
    }
    Err(OtocError::IntegratorDiverged(change))
}
