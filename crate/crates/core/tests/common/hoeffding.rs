//! Inclusion–exclusion reference for the Hoeffding decomposition on finite-support laws.

use depbound_core::ustat::{hoeffding_decompose, FiniteSupportLaw, Kernel, DEFAULT_BUDGET};

fn expectation_over_rest(kernel: &dyn Kernel, law: &FiniteSupportLaw, fixed: &[usize]) -> f64 {
    // E h(x_fixed, X_{k+1}, …, X_r) by enumerating every completion.
    let r = kernel.arity();
    let free = r - fixed.len();
    let s = law.size();
    let mut total = 0.0;
    for k in 0..s.pow(free as u32) {
        let mut rest = Vec::with_capacity(free);
        let mut c = k;
        for _ in 0..free {
            rest.push(c % s);
            c /= s;
        }
        let w: f64 = rest.iter().map(|&i| law.probabilities[i]).product();
        let pts: Vec<&[f64]> = fixed.iter().chain(&rest).map(|&i| law.atoms[i].as_slice()).collect();
        total += w * kernel.eval(&pts);
    }
    total
}

/// h_p(x_1..x_p) = Σ_{S ⊆ [p]} (−1)^{p−|S|} E h(x_S, X, …).
pub fn component_by_inclusion_exclusion(kernel: &dyn Kernel, law: &FiniteSupportLaw, idx: &[usize]) -> f64 {
    let p = idx.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << p) {
        let sub: Vec<usize> = (0..p).filter(|k| mask & (1 << k) != 0).map(|k| idx[k]).collect();
        let sign = if (p - sub.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * expectation_over_rest(kernel, law, &sub);
    }
    total
}

pub fn law_from(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> FiniteSupportLaw {
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = probs[1..].iter().sum();
    probs[0] = 1.0 - head;
    FiniteSupportLaw::new(atoms, probs).unwrap()
}

pub fn tuples(s: usize, p: usize) -> Vec<Vec<usize>> {
    (0..s.pow(p as u32))
        .map(|mut k| {
            let mut v = vec![0; p];
            for slot in v.iter_mut().rev() {
                *slot = k % s;
                k /= s;
            }
            v
        })
        .collect()
}

pub fn check_decomposition(kernel: &dyn Kernel, law: &FiniteSupportLaw) -> f64 {
    let dec = hoeffding_decompose(kernel, law, DEFAULT_BUDGET).unwrap();
    let s = law.size();
    let r = kernel.arity();
    let mut worst = dec.degeneracy_residual(law);
    for idx in tuples(s, r) {
        let pts: Vec<&[f64]> = idx.iter().map(|&i| law.atoms[i].as_slice()).collect();
        worst = worst.max((dec.theta + dec.reconstruct(&idx) - kernel.eval(&pts)).abs());
    }
    for p in 1..=r {
        for idx in tuples(s, p) {
            worst = worst.max((dec.component(&idx) - component_by_inclusion_exclusion(kernel, law, &idx)).abs());
        }
    }
    worst
}
