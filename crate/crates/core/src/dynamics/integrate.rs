use num_complex::Complex64;

use super::{norm_sqr, EffectiveGenerator, StateVector};
use crate::error::{Error, Result};

/// Fixed-step grid: `steps` RK4 steps of size `dt`, sampled every `stride`
/// steps starting at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

impl StepSchedule {
    pub fn new(t_max: f64, dt: f64, stride: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
        }
        if !(t_max >= dt && t_max.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "t_max must be at least dt, got t_max = {t_max}, dt = {dt}"
            )));
        }
        if stride == 0 {
            return Err(Error::InvalidParams("output stride must be positive".into()));
        }
        let steps = (t_max / dt).round() as usize;
        Ok(Self { dt, steps, stride })
    }

    /// Smallest step not exceeding `max_dt` that lands exactly on every
    /// multiple of `spacing` up to `t_max`.
    pub fn with_sample_spacing(t_max: f64, spacing: f64, max_dt: f64) -> Result<Self> {
        if !(spacing > 0.0 && max_dt > 0.0) {
            return Err(Error::InvalidParams(
                "sample spacing and dt must be positive".into(),
            ));
        }
        let stride = (spacing / max_dt - 1e-9).ceil().max(1.0) as usize;
        let dt = spacing / stride as f64;
        let samples = (t_max / spacing).round() as usize;
        Ok(Self {
            dt,
            steps: samples * stride,
            stride,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn sample_count(&self) -> usize {
        self.steps / self.stride + 1
    }

    pub fn time_of_step(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
}

/// Classical fourth-order Runge–Kutta for a constant linear generator, with
/// preallocated stage buffers.
pub struct Rk4Stepper<'a> {
    generator: &'a EffectiveGenerator,
    dt: f64,
    k: [Vec<Complex64>; 4],
    scratch: Vec<Complex64>,
}

impl<'a> Rk4Stepper<'a> {
    pub fn new(generator: &'a EffectiveGenerator, dt: f64) -> Self {
        let n = generator.dim();
        let zero = || vec![Complex64::new(0.0, 0.0); n];
        Self {
            generator,
            dt,
            k: [zero(), zero(), zero(), zero()],
            scratch: zero(),
        }
    }

    pub fn step(&mut self, state: &mut [Complex64]) {
        let h = self.dt;
        let [k1, k2, k3, k4] = &mut self.k;
        let m = self.generator;

        m.apply(state, k1);
        for ((s, a), k) in self.scratch.iter_mut().zip(state.iter()).zip(k1.iter()) {
            *s = a + k * (0.5 * h);
        }
        m.apply(&self.scratch, k2);
        for ((s, a), k) in self.scratch.iter_mut().zip(state.iter()).zip(k2.iter()) {
            *s = a + k * (0.5 * h);
        }
        m.apply(&self.scratch, k3);
        for ((s, a), k) in self.scratch.iter_mut().zip(state.iter()).zip(k3.iter()) {
            *s = a + k * h;
        }
        m.apply(&self.scratch, k4);
        let w = h / 6.0;
        for (i, a) in state.iter_mut().enumerate() {
            *a += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

fn check_initial(generator: &EffectiveGenerator, initial: &StateVector) -> Result<()> {
    if initial.len() != generator.dim() {
        return Err(Error::InvalidParams(format!(
            "initial state has {} amplitudes, generator acts on {}",
            initial.len(),
            generator.dim()
        )));
    }
    let norm = initial.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParams(format!(
            "initial state must be normalised, norm is {norm}"
        )));
    }
    Ok(())
}

/// Integrate and hand every sampled state to `observe(time, amplitudes)`.
///
/// Every step is checked for non-finite amplitudes.
pub fn integrate_with<F>(
    generator: &EffectiveGenerator,
    initial: &StateVector,
    schedule: &StepSchedule,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(f64, &[Complex64]) -> Result<()>,
{
    check_initial(generator, initial)?;
    let mut state = initial.amplitudes.clone();
    let mut stepper = Rk4Stepper::new(generator, schedule.dt);
    observe(0.0, &state)?;
    for step in 1..=schedule.steps {
        stepper.step(&mut state);
        if !norm_sqr(&state).is_finite() {
            return Err(Error::NonFinite {
                step,
                time: schedule.time_of_step(step),
            });
        }
        if step % schedule.stride == 0 {
            observe(schedule.time_of_step(step), &state)?;
        }
    }
    Ok(())
}

pub fn integrate(
    generator: &EffectiveGenerator,
    initial: &StateVector,
    schedule: &StepSchedule,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: Vec::with_capacity(schedule.sample_count()),
        states: Vec::with_capacity(schedule.sample_count()),
    };
    integrate_with(generator, initial, schedule, |t, a| {
        traj.times.push(t);
        traj.states.push(StateVector {
            amplitudes: a.to_vec(),
        });
        Ok(())
    })?;
    Ok(traj)
}
