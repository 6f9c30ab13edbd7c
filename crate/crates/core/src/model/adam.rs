use super::config::AdamConfig;
use super::network::Gradients;
use super::params::ModelParameters;
use super::ModelError;

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. Fails without touching anything if a
/// gradient component is non-finite.
pub fn adam_step(
    params: &mut ModelParameters,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    cfg: &AdamConfig,
) -> Result<(), ModelError> {
    let n = params.values.len();
    assert_eq!(grads.values.len(), n, "gradient shape");
    assert_eq!(state.m.len(), n, "adam state shape");
    if let Some(index) = grads.values.iter().position(|g| !g.is_finite()) {
        return Err(ModelError::NonFiniteGradient {
            index,
            value: grads.values[index],
            step: state.step + 1,
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (((theta, &g), m), v) in params
        .values
        .iter_mut()
        .zip(&grads.values)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *theta -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}
