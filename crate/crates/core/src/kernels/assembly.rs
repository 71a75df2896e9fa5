//! Pairwise force sums `Σ_j f(x_i - x_j)`.
//!
//! The production path sorts positions once and walks the kernel's
//! [`Segment`]s with binary searches: constant pieces contribute
//! `value × count`, only the remaining pieces are evaluated pairwise. The
//! direct double loop is kept as the reference.

use super::{LipschitzEnvelope, PairKernel, RegularizedKernel, SegmentValue};
use crate::par::Execution;

/// Reference O(N²) double loop, in input order.
pub fn pair_sums_direct<K: PairKernel + ?Sized>(kernel: &K, xs: &[f64], include_self: bool) -> Vec<f64> {
    xs.iter()
        .enumerate()
        .map(|(i, &xi)| {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| include_self || j != i)
                .map(|(_, &xj)| kernel.eval(xi - xj))
                .sum()
        })
        .collect()
}

/// Pair sums for ascending `sorted` positions, returned in the same order.
pub fn pair_sums_sorted<K: PairKernel + ?Sized>(
    kernel: &K,
    sorted: &[f64],
    include_self: bool,
    exec: Execution,
) -> Vec<f64> {
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let segments = kernel.segments();
    let self_term = if include_self { kernel.eval(0.0) } else { 0.0 };
    let mut out = vec![0.0; sorted.len()];
    exec.fill(&mut out, |i| {
        let xi = sorted[i];
        let mut sum = 0.0;
        for seg in &segments {
            // offsets d = xi - xj in [lo, hi)  <=>  xj in (xi - hi, xi - lo]
            let start = sorted.partition_point(|&x| x <= xi - seg.hi);
            let end = sorted.partition_point(|&x| x <= xi - seg.lo);
            if start >= end {
                continue;
            }
            let owns_self = (start..end).contains(&i);
            match seg.value {
                SegmentValue::Const(c) => {
                    let count = end - start - usize::from(owns_self);
                    sum += c * count as f64;
                }
                SegmentValue::Eval => {
                    for (j, &xj) in sorted[start..end].iter().enumerate() {
                        if start + j != i {
                            sum += kernel.eval(xi - xj);
                        }
                    }
                }
            }
        }
        sum + self_term
    });
    out
}

/// Pair sums in input order, computed through the sorted path.
pub fn pair_sums<K: PairKernel + ?Sized>(kernel: &K, xs: &[f64], include_self: bool, exec: Execution) -> Vec<f64> {
    let order = sorted_order(xs);
    let sorted: Vec<f64> = order.iter().map(|&k| xs[k]).collect();
    let sums = pair_sums_sorted(kernel, &sorted, include_self, exec);
    let mut out = vec![0.0; xs.len()];
    for (rank, &k) in order.iter().enumerate() {
        out[k] = sums[rank];
    }
    out
}

/// Permutation that sorts `xs` ascending; ties broken by index.
pub(crate) fn sorted_order(xs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    order
}

/// `K_i^ε(x) = -(1/N) Σ_j k^ε(x_i - x_j)` for a single particle, self term
/// included.
pub fn assemble_interaction_force(kernel: &RegularizedKernel, xs: &[f64], i: usize) -> f64 {
    let n = xs.len() as f64;
    -xs.iter().map(|&xj| kernel.eval(xs[i] - xj)).sum::<f64>() / n
}

/// `K^ε(x)` for every particle.
pub fn interaction_forces<K: PairKernel + ?Sized>(kernel: &K, xs: &[f64], exec: Execution) -> Vec<f64> {
    let n = xs.len() as f64;
    let mut forces = pair_sums(kernel, xs, true, exec);
    forces.iter_mut().for_each(|f| *f = -*f / n);
    forces
}

/// `L_i^ε(y) = (1/N) Σ_j l^ε(y_i - y_j)` for a single particle.
pub fn assemble_envelope_force(env: &LipschitzEnvelope, ys: &[f64], i: usize) -> f64 {
    let n = ys.len() as f64;
    ys.iter().map(|&yj| env.eval(ys[i] - yj)).sum::<f64>() / n
}

/// `L^ε(y)` for every particle.
pub fn envelope_forces(env: &LipschitzEnvelope, ys: &[f64], exec: Execution) -> Vec<f64> {
    let n = ys.len() as f64;
    let mut out = pair_sums(env, ys, true, exec);
    out.iter_mut().for_each(|v| *v /= n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelSpec, Profile};
    use proptest::prelude::*;

    fn bcm_one(eps: f64) -> RegularizedKernel {
        RegularizedKernel::new(KernelSpec::bcm(Profile::One, 1.0).unwrap(), eps).unwrap()
    }

    fn uniform(eps: f64) -> RegularizedKernel {
        RegularizedKernel::new(KernelSpec::uniform(1.0).unwrap(), eps).unwrap()
    }

    #[test]
    fn interaction_force_examples() {
        let u = uniform(0.05);
        assert_eq!(assemble_interaction_force(&u, &[0.0, 0.0], 0), 0.0);
        let b = bcm_one(0.05);
        assert_eq!(assemble_interaction_force(&b, &[0.0, 0.5], 0), -1.0);
        assert_eq!(assemble_interaction_force(&b, &[5.0], 0), -b.eval(0.0));
        let forces = interaction_forces(&b, &[0.0, 0.5], Execution::Sequential);
        assert_eq!(forces, vec![-1.0, -1.0]);
    }

    #[test]
    fn envelope_force_examples() {
        let c = 0.5;
        let eps = 0.1;
        let env_u = LipschitzEnvelope::new(&KernelSpec::uniform(1.0).unwrap(), eps, c);
        let clustered = [0.0; 5];
        for i in 0..5 {
            assert!((assemble_envelope_force(&env_u, &clustered, i) - c / eps).abs() < 1e-12);
        }
        let env_b = LipschitzEnvelope::new(&KernelSpec::bcm(Profile::One, 1.0).unwrap(), eps, c);
        assert_eq!(assemble_envelope_force(&env_b, &[0.0, 10.0], 0), c / 2.0);
        assert_eq!(assemble_envelope_force(&env_b, &[3.0], 0), env_b.eval(0.0));
        let all = envelope_forces(&env_b, &[0.0, 10.0], Execution::Sequential);
        assert_eq!(all[0], c / 2.0);
    }

    #[test]
    fn self_term_excluded_on_request() {
        let k = KernelSpec::bcm(Profile::One, 1.0).unwrap();
        let xs = [0.0, 0.5, 3.0];
        let with = pair_sums(&k, &xs, true, Execution::Sequential);
        let without = pair_sums(&k, &xs, false, Execution::Sequential);
        assert_eq!(with, vec![2.0, 2.0, 1.0]);
        assert_eq!(without, vec![1.0, 1.0, 0.0]);
    }

    fn kernels() -> Vec<Box<dyn PairKernel>> {
        vec![
            Box::new(bcm_one(0.05)),
            Box::new(bcm_one(0.3)),
            Box::new(uniform(0.1)),
            Box::new(RegularizedKernel::new(KernelSpec::bcm(Profile::Linear, 1.0).unwrap(), 0.1).unwrap()),
            Box::new(KernelSpec::uniform(1.0).unwrap()),
            Box::new(KernelSpec::bcm(Profile::One, 0.7).unwrap()),
            Box::new(LipschitzEnvelope::new(&KernelSpec::uniform(1.0).unwrap(), 0.05, 0.4)),
            Box::new(LipschitzEnvelope::new(&KernelSpec::bcm(Profile::One, 1.0).unwrap(), 0.05, 0.4)),
            Box::new(RegularizedKernel::new(KernelSpec::zero(), 0.1).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn sorted_path_matches_direct(xs in prop::collection::vec(-3.0f64..3.0, 1..60), include_self: bool) {
            for k in kernels() {
                let fast = pair_sums(k.as_ref(), &xs, include_self, Execution::Parallel);
                let slow = pair_sums_direct(k.as_ref(), &xs, include_self);
                for (a, b) in fast.iter().zip(&slow) {
                    prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
                }
            }
        }

        #[test]
        fn forces_are_permutation_equivariant(xs in prop::collection::vec(-3.0f64..3.0, 2..40), rot in 0usize..40) {
            let k = uniform(0.1);
            let f = interaction_forces(&k, &xs, Execution::Sequential);
            let r = rot % xs.len();
            let mut ys = xs.clone();
            ys.rotate_left(r);
            let mut g = interaction_forces(&k, &ys, Execution::Sequential);
            g.rotate_right(r);
            prop_assert_eq!(f, g);
        }
    }
}
