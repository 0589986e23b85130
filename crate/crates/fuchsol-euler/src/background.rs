//! Background solutions and the change of variables
//! `V⁰ = t(1 + Û⁰ + u⁰)e^{u_*}`, `V¹ = t(Û¹ + u¹)e^{u_*}`, `t = −(−τ)^Γ`.

use fuchsol_numerics::Field;

use crate::error::EulerError;
use crate::params::KasnerParams;

/// Background fields `Û` with their first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BackgroundPoint {
    pub u: [f64; 2],
    /// `∂ₜÛ`, eliminated beforehand through the Euler equations.
    pub dt: [f64; 2],
    pub dx: [f64; 2],
}

/// A background solution written relative to the reference function `u_*`.
pub trait Background: Send + Sync {
    fn u_star(&self, x: f64) -> f64;
    fn u_star_x(&self, x: f64) -> f64;
    fn uhat(&self, t: f64, x: f64) -> BackgroundPoint;
}

/// The fluid at rest, `V̂⁰ = −V̂_*(−τ)^Γ`, `V̂¹ = 0`, for a constant
/// `V̂_* = e^{u_*}`; all `Û` vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestBackground {
    pub v_star: f64,
}

impl RestBackground {
    pub fn new(v_star: f64) -> Result<Self, EulerError> {
        if !(v_star > 0.0 && v_star.is_finite()) {
            return Err(EulerError::Parameter(format!("V_* must be positive, got {v_star}")));
        }
        Ok(Self { v_star })
    }
}

impl Background for RestBackground {
    fn u_star(&self, _: f64) -> f64 {
        self.v_star.ln()
    }
    fn u_star_x(&self, _: f64) -> f64 {
        0.0
    }
    fn uhat(&self, _: f64, _: f64) -> BackgroundPoint {
        BackgroundPoint::default()
    }
}

pub fn tau_to_t(tau: f64, params: &KasnerParams) -> f64 {
    -(-tau).powf(params.big_gamma())
}

pub fn t_to_tau(t: f64, params: &KasnerParams) -> f64 {
    -(-t).powf(1.0 / params.big_gamma())
}

/// `(u⁰, u¹) = (V − V̂)/(t e^{u_*})` from a physical state at time τ.
pub fn to_perturbation(state: &Field, bg: &dyn Background, params: &KasnerParams) -> Result<Field, EulerError> {
    params.require_regime()?;
    if !(state.time < 0.0) {
        return Err(EulerError::Time(state.time));
    }
    let t = tau_to_t(state.time, params);
    let mut out = Field::zeros(state.grid, 2, t);
    for j in 0..state.n_points() {
        let x = state.grid.x(j);
        let scale = t * bg.u_star(x).exp();
        let uh = bg.uhat(t, x).u;
        let v = state.point(j);
        let u0 = v[0] / scale - 1.0 - uh[0];
        let u1 = v[1] / scale - uh[1];
        if !(1.0 + uh[0] + u0 > 0.0) {
            return Err(EulerError::Positivity { t, x, value: 1.0 + uh[0] + u0 });
        }
        out.point_mut(j).copy_from_slice(&[u0, u1]);
    }
    Ok(out)
}

/// Inverse of [`to_perturbation`].
pub fn from_perturbation(pert: &Field, bg: &dyn Background, params: &KasnerParams) -> Result<Field, EulerError> {
    params.require_regime()?;
    if !(pert.time < 0.0) {
        return Err(EulerError::Time(pert.time));
    }
    let t = pert.time;
    let mut out = Field::zeros(pert.grid, 2, t_to_tau(t, params));
    for j in 0..pert.n_points() {
        let x = pert.grid.x(j);
        let scale = t * bg.u_star(x).exp();
        let uh = bg.uhat(t, x).u;
        let u = pert.point(j);
        if !(1.0 + uh[0] + u[0] > 0.0) {
            return Err(EulerError::Positivity { t, x, value: 1.0 + uh[0] + u[0] });
        }
        out.point_mut(j).copy_from_slice(&[scale * (1.0 + uh[0] + u[0]), scale * (uh[1] + u[1])]);
    }
    Ok(out)
}

/// Smallest `1 + Û⁰ + u⁰` over the grid and where it occurs.
pub fn positivity_margin(pert: &Field, bg: &dyn Background) -> (f64, f64) {
    (0..pert.n_points())
        .map(|j| {
            let x = pert.grid.x(j);
            (1.0 + bg.uhat(pert.time, x).u[0] + pert.point(j)[0], x)
        })
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::rest_solution;
    use fuchsol_numerics::PeriodicGrid;

    fn params() -> KasnerParams {
        KasnerParams::new(1.0, 4.0 / 3.0).unwrap()
    }

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(16, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn rest_background_maps_to_zero() {
        let bg = RestBackground::new(2.5).unwrap();
        let state = rest_solution(grid(), -0.3, &params(), |_| 2.5);
        let u = to_perturbation(&state, &bg, &params()).unwrap();
        assert!(u.max_abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let bg = RestBackground::new(0.8).unwrap();
        let pert = Field::from_fn(grid(), 2, -0.4, |x| vec![0.1 * x.sin(), 0.05 * x.cos()]);
        let back = to_perturbation(&from_perturbation(&pert, &bg, &params()).unwrap(), &bg, &params()).unwrap();
        assert!((back.time + 0.4).abs() < 1e-15);
        assert!(back.axpy(-1.0, &pert).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn hand_value() {
        let bg = RestBackground::new(1.0).unwrap();
        let pert = Field::from_fn(grid(), 2, -1.0, |_| vec![0.1, 0.0]);
        let v = from_perturbation(&pert, &bg, &params()).unwrap();
        assert!((v.point(0)[0] + 1.1).abs() < 1e-15);
        assert_eq!(v.point(0)[1], 0.0);
        assert_eq!(v.time, -1.0);
    }

    #[test]
    fn positivity_violation_is_located() {
        let bg = RestBackground::new(1.0).unwrap();
        let pert = Field::from_fn(grid(), 2, -0.5, |x| vec![if x > 3.0 && x < 3.5 { -1.5 } else { 0.0 }, 0.0]);
        match from_perturbation(&pert, &bg, &params()) {
            Err(EulerError::Positivity { x, value, .. }) => {
                assert!(x > 3.0 && x < 3.5);
                assert!(value < 0.0);
            }
            other => panic!("{other:?}"),
        }
        let (m, x) = positivity_margin(&pert, &bg);
        assert_eq!(m, -0.5);
        assert!(x > 3.0);
    }
}
