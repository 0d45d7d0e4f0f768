//! Central finite-difference verification of analytic gradients.

use super::graph::{Graph, Var};
use super::params::{ParamBinding, ParamSet};
use super::TensorError;

#[derive(Clone, Copy, Debug)]
pub struct GradCheckSettings {
    pub step: f64,
    pub tolerance: f64,
}

impl Default for GradCheckSettings {
    fn default() -> Self {
        Self {
            step: 1e-5,
            tolerance: 1e-4,
        }
    }
}

/// Worst deviation between analytic and numeric gradients over a whole
/// parameter set.
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, settings: &GradCheckSettings) -> bool {
        self.max_rel_err <= settings.tolerance
    }
}

/// Relative error with an absolute floor of 1, so tiny gradients are judged
/// on absolute difference.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / f64::max(1.0, f64::max(a.abs(), b.abs()))
}

/// Compares the analytic gradient of `build`'s scalar loss against central
/// finite differences, for every scalar in `params`. `build` must construct
/// the loss afresh from the bound leaves on each call; any non-parameter
/// inputs it uses have to stay fixed across calls.
pub fn check<F, E>(
    params: &mut ParamSet,
    mut build: F,
    settings: GradCheckSettings,
) -> Result<GradCheckReport, E>
where
    F: FnMut(&mut Graph, &ParamBinding) -> Result<Var, E>,
    E: From<TensorError>,
{
    let mut graph = Graph::new();
    let binding = params.bind(&mut graph);
    let loss = build(&mut graph, &binding)?;
    graph.backward(loss).map_err(E::from)?;
    let analytic: Vec<Vec<f64>> = params
        .ids()
        .map(|id| graph.grad_slice(binding.var(id)).to_vec())
        .collect();
    drop(graph);

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        checked: 0,
    };
    let ids: Vec<_> = params.ids().collect();
    for (pi, &id) in ids.iter().enumerate() {
        for j in 0..params.value(id).len() {
            let original = params.value(id).data()[j];
            params.value_mut(id).data_mut()[j] = original + settings.step;
            let plus = eval(params, &mut build)?;
            params.value_mut(id).data_mut()[j] = original - settings.step;
            let minus = eval(params, &mut build)?;
            params.value_mut(id).data_mut()[j] = original;
            let numeric = (plus - minus) / (2.0 * settings.step);
            let err = relative_error(numeric, analytic[pi][j]);
            report.checked += 1;
            if err > report.max_rel_err {
                report.max_rel_err = err;
                report.worst_param = params.name(id).to_string();
                report.worst_index = j;
            }
        }
    }
    Ok(report)
}

fn eval<F, E>(params: &ParamSet, build: &mut F) -> Result<f64, E>
where
    F: FnMut(&mut Graph, &ParamBinding) -> Result<Var, E>,
{
    let mut graph = Graph::new();
    let binding = params.bind(&mut graph);
    let loss = build(&mut graph, &binding)?;
    Ok(graph.value(loss)[0])
}
