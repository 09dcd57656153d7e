use crate::error::{Error, Result};
use nalgebra::DVector;

/// Uniform-grid solution of the semi-discrete system. The stacked unknown holds the
/// acoustic coefficients first and the plate (lifted) coefficients last.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub u: Vec<DVector<f64>>,
    pub v: Vec<DVector<f64>>,
    pub a: Vec<DVector<f64>>,
    pub n_acoustic: usize,
    pub n_plate: usize,
}

impl Trajectory {
    pub fn zeros(dt: f64, steps: usize, n_acoustic: usize, n_plate: usize) -> Self {
        let n = n_acoustic + n_plate;
        let z = DVector::zeros(n);
        Trajectory {
            dt,
            times: (0..=steps).map(|i| i as f64 * dt).collect(),
            u: vec![z.clone(); steps + 1],
            v: vec![z.clone(); steps + 1],
            a: vec![z; steps + 1],
            n_acoustic,
            n_plate,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n_acoustic + self.n_plate
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Cubic Hermite interpolant of (u, u̇) at `t` and its derivative.
    pub fn state_at(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let n = self.len();
        if n == 1 {
            return (self.u[0].clone(), self.v[0].clone());
        }
        let pos = (t / self.dt).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let tau = pos - i as f64;
        if tau == 0.0 {
            return (self.u[i].clone(), self.v[i].clone());
        }
        let h = self.dt;
        let (t2, t3) = (tau * tau, tau * tau * tau);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + tau;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let d00 = (6.0 * t2 - 6.0 * tau) / h;
        let d10 = 3.0 * t2 - 4.0 * tau + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * tau) / h;
        let d11 = 3.0 * t2 - 2.0 * tau;
        let (u0, u1, v0, v1) = (&self.u[i], &self.u[i + 1], &self.v[i], &self.v[i + 1]);
        let u = u0 * h00 + v0 * (h * h10) + u1 * h01 + v1 * (h * h11);
        let v = u0 * d00 + v0 * d10 + u1 * d01 + v1 * d11;
        (u, v)
    }

    /// Multiply every stored vector by `s`.
    pub fn scaled(&self, s: f64) -> Trajectory {
        let f = |x: &Vec<DVector<f64>>| x.iter().map(|v| v * s).collect();
        Trajectory { u: f(&self.u), v: f(&self.v), a: f(&self.a), ..self.clone() }
    }

    /// Coefficientwise difference `self - other`.
    pub fn minus(&self, other: &Trajectory) -> Result<Trajectory> {
        self.check_same_grid(other)?;
        let d = |x: &Vec<DVector<f64>>, y: &Vec<DVector<f64>>| x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(Trajectory { u: d(&self.u, &other.u), v: d(&self.v, &other.v), a: d(&self.a, &other.a), ..self.clone() })
    }

    pub fn check_same_grid(&self, other: &Trajectory) -> Result<()> {
        if self.times.len() != other.times.len() || self.dt != other.dt {
            return Err(Error::GridMismatch(format!(
                "{} steps of {} versus {} steps of {}",
                self.len(),
                self.dt,
                other.len(),
                other.dt
            )));
        }
        if self.dim() != other.dim() || self.n_acoustic != other.n_acoustic {
            return Err(Error::GridMismatch("different basis sizes".into()));
        }
        Ok(())
    }

    /// True when accelerations are stored for every sample.
    pub fn has_acceleration(&self) -> bool {
        self.a.len() == self.times.len()
    }

    /// Time-differentiated trajectory `(u̇, ü)`; its accelerations are missing.
    pub fn derivative(&self) -> Result<Trajectory> {
        if !self.has_acceleration() {
            return Err(Error::MissingDerivative("accelerations are not stored".into()));
        }
        Ok(Trajectory { u: self.v.clone(), v: self.a.clone(), a: vec![], ..self.clone() })
    }

    /// Linear interpolation of the stored accelerations.
    pub fn accel_at(&self, t: f64) -> DVector<f64> {
        let n = self.len();
        if n == 1 || !self.has_acceleration() {
            return self.a.first().cloned().unwrap_or_else(|| DVector::zeros(self.dim()));
        }
        let pos = (t / self.dt).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let tau = pos - i as f64;
        &self.a[i] * (1.0 - tau) + &self.a[i + 1] * tau
    }

    /// Pad the coefficient vectors with zero plate coefficients up to `n_plate`.
    pub fn padded(&self, n_plate: usize) -> Trajectory {
        let na = self.n_acoustic;
        let pad = |x: &Vec<DVector<f64>>| {
            x.iter()
                .map(|v| {
                    let mut w = DVector::zeros(na + n_plate);
                    w.rows_mut(0, self.dim().min(na + n_plate)).copy_from(&v.rows(0, self.dim().min(na + n_plate)));
                    w
                })
                .collect()
        };
        Trajectory { u: pad(&self.u), v: pad(&self.v), a: pad(&self.a), n_plate, ..self.clone() }
    }

    /// Coefficientwise sum.
    pub fn plus(&self, other: &Trajectory) -> Result<Trajectory> {
        self.check_same_grid(other)?;
        let d = |x: &Vec<DVector<f64>>, y: &Vec<DVector<f64>>| x.iter().zip(y).map(|(a, b)| a + b).collect();
        Ok(Trajectory { u: d(&self.u, &other.u), v: d(&self.v, &other.v), a: d(&self.a, &other.a), ..self.clone() })
    }
}
