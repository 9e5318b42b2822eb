use crate::error::{NumericError, Result};

use super::tape::Tape;

/// First-order system `y' = f(s, y)`; tape `i` computes `f_i` from the
/// inputs `[s, y_0, y_1, ...]`.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    rhs: Vec<Tape>,
}

impl OdeSystem {
    pub fn new(rhs: Vec<Tape>) -> Result<OdeSystem> {
        if let Some(t) = rhs.iter().find(|t| t.inputs() != rhs.len() + 1) {
            return Err(NumericError::Precondition(format!(
                "right side takes {} inputs, expected {}",
                t.inputs(),
                rhs.len() + 1
            ))
            .into());
        }
        Ok(OdeSystem { rhs })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    fn eval(&self, s: f64, y: &[f64], out: &mut [f64], buf: &mut Vec<f64>, regs: &mut Vec<f64>) {
        buf.clear();
        buf.push(s);
        buf.extend_from_slice(y);
        for (o, t) in out.iter_mut().zip(&self.rhs) {
            *o = t.eval_with(buf, regs);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub abscissae: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial state")
    }

    /// Component `i` along the trajectory.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

/// One classical Runge-Kutta step of size `h`.
pub(crate) fn rk4_step(f: &mut impl FnMut(f64, &[f64], &mut [f64]), s: f64, y: &mut [f64], h: f64) {
    let n = y.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    f(s, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(s + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(s + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(s + h, &tmp, &mut k4);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Fixed-step RK4 from `s0` to `s1` (either direction) with `steps` steps.
/// Aborts at the first abscissa where the state stops being finite.
pub fn integrate_ode(sys: &OdeSystem, y0: &[f64], s0: f64, s1: f64, steps: usize) -> Result<Trajectory> {
    if y0.len() != sys.dim() {
        return Err(NumericError::Precondition(format!(
            "initial state has {} components, expected {}",
            y0.len(),
            sys.dim()
        ))
        .into());
    }
    if steps == 0 {
        return Err(NumericError::Precondition("at least one step is required".into()).into());
    }
    let h = (s1 - s0) / steps as f64;
    let (mut buf, mut regs) = (Vec::new(), Vec::new());
    let mut f = |s: f64, y: &[f64], out: &mut [f64]| sys.eval(s, y, out, &mut buf, &mut regs);
    let mut y = y0.to_vec();
    let mut traj = Trajectory { abscissae: vec![s0], states: vec![y.clone()] };
    for k in 1..=steps {
        let s = s0 + (k - 1) as f64 * h;
        rk4_step(&mut f, s, &mut y, h);
        if y.iter().any(|v| !v.is_finite() || v.abs() > 1e150) {
            return Err(NumericError::Pole { at: s + h }.into());
        }
        traj.abscissae.push(if k == steps { s1 } else { s0 + k as f64 * h });
        traj.states.push(y.clone());
    }
    Ok(traj)
}

/// Step count for a nominal step size over `[s0, s1]`.
pub fn steps_for(s0: f64, s1: f64, step: f64) -> usize {
    (((s1 - s0) / step).abs().round() as usize).max(1)
}
