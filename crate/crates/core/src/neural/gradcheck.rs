use super::model::Model;
use crate::corpus::Label;
use crate::error::Result;

pub const DEFAULT_EPS: f64 = 1e-4;
/// Denominator floor of the relative error, so that two near-zero
/// gradients do not count as a mismatch.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// `(parameter name, flat index)` of the worst component.
    pub worst: Option<(String, usize)>,
    pub checked: usize,
}

/// Compares reverse-mode gradients of the evaluation-mode loss with central
/// differences on every trainable scalar. Frozen rows are skipped.
pub fn grad_check(model: &mut Model<f64>, ids: &[usize], target: Label, eps: f64) -> Result<GradCheck> {
    let mut grads = model.params.zero_grads();
    model.accumulate_gradient(ids, target, None, 1.0, &mut grads)?;
    let mut out = GradCheck {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
    };
    for pi in 0..model.params.len() {
        let (len, cols) = {
            let p = model.params.get(pi);
            (p.data.len(), p.cols)
        };
        for i in 0..len {
            if model.params.get(pi).frozen_rows.contains(&(i / cols)) {
                continue;
            }
            let orig = model.params.get(pi).data[i];
            model.params.get_mut(pi).data[i] = orig + eps;
            let plus = model.loss(ids, target)?;
            model.params.get_mut(pi).data[i] = orig - eps;
            let minus = model.loss(ids, target)?;
            model.params.get_mut(pi).data[i] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = grads.data[pi][i];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR);
            out.checked += 1;
            if rel > out.max_rel_error {
                out.max_rel_error = rel;
                out.worst = Some((model.params.get(pi).name.clone(), i));
            }
        }
    }
    Ok(out)
}
