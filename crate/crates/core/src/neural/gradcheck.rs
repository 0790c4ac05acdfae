use super::tape::{NodeId, Tape};
use super::tensor::ParamStore;

pub const GRAD_CHECK_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst: String,
    pub checked: usize,
    /// Entries skipped because the one-sided differences disagree, i.e. the
    /// perturbation straddles a kink of a piecewise-linear activation.
    pub kinks: usize,
}

const KINK_RTOL: f64 = 1e-3;

fn rel_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn at_kink(up: f64, mid: f64, down: f64, eps: f64) -> bool {
    rel_error((up - mid) / eps, (mid - down) / eps) > KINK_RTOL
}

/// Compares backpropagated gradients of the scalar built by `f` against
/// central differences, over every parameter entry and every input entry.
/// Entries where the function is not differentiable at `eps` scale are
/// counted in `kinks` instead of being compared.
pub fn grad_check<F>(
    store: &mut ParamStore,
    inputs: &mut [Vec<f64>],
    eps: f64,
    f: F,
) -> GradCheckReport
where
    F: Fn(&mut Tape, &[NodeId]) -> NodeId,
{
    let eval = |store: &ParamStore, inputs: &[Vec<f64>]| -> f64 {
        let mut tape = Tape::new(store);
        let ids: Vec<NodeId> = inputs.iter().map(|v| tape.input(v.clone())).collect();
        let out = f(&mut tape, &ids);
        tape.scalar(out)
    };

    let (param_grads, input_grads) = {
        let mut tape = Tape::new(store);
        let ids: Vec<NodeId> = inputs.iter().map(|v| tape.input(v.clone())).collect();
        let out = f(&mut tape, &ids);
        let g = tape.backward(out);
        let pg: Vec<Vec<f64>> = (0..store.len())
            .map(|i| {
                let v = g.param(super::tensor::ParamId(i));
                if v.is_empty() {
                    vec![0.0; store.tensors()[i].len()]
                } else {
                    v.to_vec()
                }
            })
            .collect();
        let ig: Vec<Vec<f64>> = ids
            .iter()
            .zip(inputs.iter())
            .map(|(id, v)| {
                let gv = g.node(*id);
                if gv.is_empty() {
                    vec![0.0; v.len()]
                } else {
                    gv.to_vec()
                }
            })
            .collect();
        (pg, ig)
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: String::new(),
        checked: 0,
        kinks: 0,
    };
    let mid = eval(store, inputs);
    let note = |report: &mut GradCheckReport, label: String, a: f64, up: f64, down: f64| {
        if at_kink(up, mid, down, eps) {
            report.kinks += 1;
            return;
        }
        let e = rel_error(a, (up - down) / (2.0 * eps));
        report.checked += 1;
        if e >= report.max_rel_error {
            report.max_rel_error = e;
            report.worst = label;
        }
    };

    for t in 0..store.len() {
        for k in 0..store.tensors()[t].len() {
            let orig = store.tensors()[t].values[k];
            store.tensors_mut()[t].values[k] = orig + eps;
            let up = eval(store, inputs);
            store.tensors_mut()[t].values[k] = orig - eps;
            let down = eval(store, inputs);
            store.tensors_mut()[t].values[k] = orig;
            let label = format!("{}[{k}]", store.tensors()[t].name);
            note(&mut report, label, param_grads[t][k], up, down);
        }
    }
    for i in 0..inputs.len() {
        for k in 0..inputs[i].len() {
            let orig = inputs[i][k];
            inputs[i][k] = orig + eps;
            let up = eval(store, inputs);
            inputs[i][k] = orig - eps;
            let down = eval(store, inputs);
            inputs[i][k] = orig;
            note(
                &mut report,
                format!("input{i}[{k}]"),
                input_grads[i][k],
                up,
                down,
            );
        }
    }
    report
}
